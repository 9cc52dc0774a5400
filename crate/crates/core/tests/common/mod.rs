#![allow(dead_code)]

use keller_core::poly::{MultiPoly, PolyMap};
use keller_core::ring::{Elem, Ring};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn small_rings() -> Vec<Ring> {
    vec![
        Ring::zp(2, 3).unwrap(),
        Ring::zp(3, 2).unwrap(),
        Ring::zp(5, 2).unwrap(),
        Ring::zp(7, 1).unwrap(),
        Ring::fpt(2, 3).unwrap(),
        Ring::fpt(3, 2).unwrap(),
        Ring::fpt(5, 2).unwrap(),
        Ring::unramified(2, 2, 2).unwrap(),
        Ring::unramified(3, 2, 2).unwrap(),
        Ring::unramified(2, 3, 1).unwrap(),
        Ring::residue_field(3, 2).unwrap(),
    ]
}

pub fn ring() -> impl Strategy<Value = Ring> {
    prop::sample::select(small_rings())
}

pub fn elem(ring: &Ring) -> impl Strategy<Value = Elem> {
    let r = ring.clone();
    prop::collection::vec(0..ring.coord_modulus(), ring.width())
        .prop_map(move |c| r.elem(&c).unwrap())
}

pub fn point(ring: &Ring, n: usize) -> impl Strategy<Value = Vec<Elem>> {
    prop::collection::vec(elem(ring), n)
}

/// Sparse polynomial with at most `terms` terms of degree at most `deg`.
pub fn poly(ring: &Ring, nvars: usize, deg: u32, terms: usize) -> impl Strategy<Value = MultiPoly> {
    let r = ring.clone();
    prop::collection::vec(
        (prop::collection::vec(0..=deg, nvars), elem(ring)),
        0..=terms,
    )
    .prop_map(move |ts| {
        let ts = ts.into_iter().map(|(mut e, c)| {
            // cap the total degree
            while e.iter().sum::<u32>() > deg {
                let i = e.iter().position(|&x| x > 0).unwrap();
                e[i] -= 1;
            }
            (e, c)
        });
        MultiPoly::from_terms(&r, nvars, ts).unwrap()
    })
}

pub fn poly_map(ring: &Ring, n: usize, deg: u32, terms: usize) -> impl Strategy<Value = PolyMap> {
    prop::collection::vec(poly(ring, n, deg, terms), n).prop_map(|c| PolyMap::new(c).unwrap())
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Every point of `ring^n` (the whole truncated ring, not just residues).
pub fn all_points(ring: &Ring, n: usize) -> Vec<Vec<Elem>> {
    let elems = ring.elements(1 << 20).unwrap();
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| {
                elems.iter().map(move |e| {
                    let mut q = p.clone();
                    q.push(e.clone());
                    q
                })
            })
            .collect();
    }
    out
}

/// Every point of `k^n`, lifted canonically into `ring`.
pub fn residue_points(ring: &Ring, n: usize) -> Vec<Vec<Elem>> {
    let k = ring.residue_field_of();
    all_points(&k, n)
        .into_iter()
        .map(|p| p.iter().map(|x| ring.lift(x)).collect())
        .collect()
}
