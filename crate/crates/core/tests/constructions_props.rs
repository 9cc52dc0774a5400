mod common;

use common::{all_points, poly_map, rng};
use keller_core::constructions::{
    char_p_counterexample, complete_to_sl, find_d_unimodular_extension, invariance_probe,
    pair_transitivity, point_coordinates, quasi_druzkowski_witness, restrict_scalars, ProbeFailure,
};
use keller_core::jacobian::{apply_affine, is_keller, Side};
use keller_core::linalg;
use keller_core::poly::PolyMap;
use keller_core::ring::{Elem, Ring};
use keller_core::sampling::{random_point, random_triangular_keller};
use keller_core::unimodular::{check_unimodular, Verdict};
use keller_core::Error;
use num_bigint::BigInt;
use proptest::prelude::*;

/// Square integer matrix with entries in [-9, 9] and a forced dependency:
/// column `j` is `λ` times column `i`, or a zero column.
fn singular_matrix() -> impl Strategy<Value = Vec<Vec<i64>>> {
    (1usize..=4).prop_flat_map(|n| {
        (
            prop::collection::vec(prop::collection::vec(-9i64..=9, n), n),
            0..n,
            0..n,
            -1i64..=1,
        )
            .prop_map(move |(mut b, i, j, lambda)| {
                for row in b.iter_mut() {
                    row[j] = if i == j { 0 } else { lambda * row[i] };
                }
                b
            })
    })
}

fn pow_mod(x: i128, e: u32, m: i128) -> i128 {
    (0..e).fold(1, |acc, _| acc * x % m)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn quasi_druzkowski_witnesses(b in singular_matrix(), p in prop::sample::select(vec![5u64, 7])) {
        let big: Vec<Vec<BigInt>> = b.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
        let w = quasi_druzkowski_witness(&big, p, 3).unwrap();
        let n = b.len();
        let u: Vec<i128> = w.u.iter().map(|x| i128::try_from(x).unwrap()).collect();
        prop_assert!(u.iter().any(|&x| x != 0));
        // Σ_j u_j·H_j = 0: the coefficient of X_k^3 is Σ_j b_kj·u_j
        for row in &b {
            prop_assert_eq!(row.iter().zip(&u).map(|(&x, &y)| x as i128 * y).sum::<i128>(), 0);
        }
        prop_assert!(w.instance.cubic_part(w.map.ring()).iter().zip(&w.u).fold(
            keller_core::poly::MultiPoly::zero(w.map.ring(), n),
            |acc, (h, c)| &acc + &h.scale(&w.map.ring().from_bigint(c)),
        ).is_zero());
        // F(x)_j = x_j + Σ_k b_kj·x_k^3 mod p^3, evaluated directly
        let m = (p as i128).pow(3);
        let x: Vec<i128> = (0..n).map(|i| if i == w.pivot { 1 } else { p as i128 }).collect();
        let value: Vec<i128> = (0..n)
            .map(|j| (x[j] + (0..n).map(|k| b[k][j] as i128 * pow_mod(x[k], 3, m)).sum::<i128>()).rem_euclid(m))
            .collect();
        prop_assert_eq!(w.value.iter().map(|v| v.coords()[0] as i128).collect::<Vec<_>>(), value.clone());
        prop_assert!(value.iter().any(|&v| v % p as i128 != 0));
        prop_assert!(value[w.unit_component] % p as i128 != 0);
    }

    #[test]
    fn restriction_of_scalars_corresponds_pointwise(
        (r, f) in prop::sample::select(vec![
            Ring::unramified(3, 2, 1).unwrap(),
            Ring::unramified(2, 2, 2).unwrap(),
            Ring::unramified(2, 3, 1).unwrap(),
            Ring::zp(3, 2).unwrap(),
        ])
        .prop_flat_map(|r| (Just(r.clone()), poly_map(&r, 2, 3, 3)))
    ) {
        let g = restrict_scalars(&f).unwrap();
        let m = r.residue_degree() as usize;
        prop_assert_eq!(g.dim(), 2 * m);
        for x in all_points(&r, 2) {
            let lhs = point_coordinates(&r, &f.eval(&x).unwrap()).unwrap();
            let rhs = g.eval(&point_coordinates(&r, &x).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
        prop_assert_eq!(is_keller(&g).unwrap(), is_keller(&f).unwrap());
    }

    #[test]
    fn restriction_keeps_keller_maps_keller(
        r in prop::sample::select(vec![Ring::unramified(3, 2, 1).unwrap(), Ring::unramified(2, 2, 2).unwrap()]),
        seed in any::<u64>(),
    ) {
        let f = random_triangular_keller(&r, 2, 3, 3, true, &mut rng(seed));
        prop_assert!(is_keller(&restrict_scalars(&f).unwrap()).unwrap());
    }

    #[test]
    fn pair_transitivity_interpolates(
        r in prop::sample::select(vec![Ring::zp(3, 2).unwrap(), Ring::zp(2, 3).unwrap(), Ring::fpt(5, 2).unwrap(), Ring::unramified(2, 2, 2).unwrap()]),
        n in 2usize..=4,
        seed in any::<u64>(),
    ) {
        let mut g = rng(seed);
        let unimodular = |v: &[Elem]| v.iter().any(|a| r.is_unit(a));
        let (c, d, a1, a2) = loop {
            let c = random_point(&r, n, &mut g);
            let d = random_point(&r, n, &mut g);
            let a1 = random_point(&r, n, &mut g);
            let a2 = random_point(&r, n, &mut g);
            let dc: Vec<Elem> = d.iter().zip(&c).map(|(x, y)| r.sub(x, y)).collect();
            let da: Vec<Elem> = a2.iter().zip(&a1).map(|(x, y)| r.sub(x, y)).collect();
            if unimodular(&dc) && unimodular(&da) {
                break (c, d, a1, a2);
            }
        };
        let w = pair_transitivity(&r, &a1, &a2, &c, &d).unwrap();
        prop_assert_eq!(w.h.apply(&c), a1);
        prop_assert_eq!(w.h.apply(&d), a2);
        prop_assert!(r.is_one(&linalg::det(&r, w.h.matrix())));
    }

    #[test]
    fn char_p_maps_are_keller_and_not_unimodular(p in prop::sample::select(vec![2u64, 3, 5, 7]), n in 1usize..=3, prec in 1u32..=3) {
        let r = Ring::fpt(p, prec).unwrap();
        let f = char_p_counterexample(&r, n).unwrap();
        let rep = check_unimodular(&f);
        prop_assert_eq!(rep.keller, Some(true));
        prop_assert_eq!(rep.verdict, Verdict::NotUnimodular);
        prop_assert_eq!(rep.zero_count, p.pow(n as u32));
    }

    #[test]
    fn extension_residue_field_exceeds_d(p in prop::sample::select(vec![2u64, 3, 5, 7]), d in 1u64..=200) {
        let e = find_d_unimodular_extension(p, d, 2).unwrap();
        prop_assert!(e.ring.q() > d);
        prop_assert!(e.degree == 1 || p.pow(e.degree - 1) <= d);
        prop_assert!(e.holds());
        prop_assert_eq!(e.ring.residue_degree(), e.degree);
    }
}

fn sweep(r: &Ring, n: usize) -> usize {
    let mut unimodular = 0;
    for v in all_points(r, n) {
        match complete_to_sl(r, &v) {
            Ok(a) => {
                unimodular += 1;
                assert!(r.is_one(&linalg::det(r, &a)), "{r} {v:?}");
                let e1: Vec<Elem> = (0..n).map(|i| if i == 0 { r.one() } else { r.zero() }).collect();
                assert_eq!(linalg::mat_vec(r, &a, &e1), v);
            }
            Err(Error::NotUnimodularVector) => assert!(v.iter().all(|a| !r.is_unit(a))),
            Err(e) => panic!("{e}"),
        }
    }
    unimodular
}

#[test]
fn sl_completion_sweeps() {
    // a vector is unimodular unless every coordinate lies in M
    assert_eq!(sweep(&Ring::zp(2, 2).unwrap(), 2), 16 - 4);
    assert_eq!(sweep(&Ring::zp(3, 2).unwrap(), 2), 81 - 9);
    assert_eq!(sweep(&Ring::unramified(2, 2, 1).unwrap(), 3), 64 - 1);
    assert_eq!(sweep(&Ring::fpt(2, 2).unwrap(), 3), 64 - 8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn probes_are_reproducible_and_failures_recheck(
        r in prop::sample::select(vec![Ring::zp(3, 2).unwrap(), Ring::fpt(3, 2).unwrap(), Ring::zp(2, 2).unwrap()]),
        seed in any::<u64>(),
    ) {
        let f = random_triangular_keller(&r, 2, 3, 2, true, &mut rng(seed));
        prop_assume!(check_unimodular(&f).verdict == Verdict::Unimodular);
        let a = invariance_probe(&f, 5, seed).unwrap();
        prop_assert_eq!(&a, &invariance_probe(&f, 5, seed).unwrap());
        prop_assert_eq!(a.checks, 10);
        for fail in &a.failures {
            match fail {
                ProbeFailure::Composition { g, .. } => {
                    let fgf = f.compose(&apply_affine(g, &f, Side::Left).unwrap()).unwrap();
                    prop_assert!(fgf.is_zero_on_residue().unwrap());
                }
                ProbeFailure::Translation { a, .. } => {
                    let fa = f.eval(a).unwrap();
                    let comps = f
                        .components()
                        .iter()
                        .zip(&fa)
                        .map(|(c, v)| c - &keller_core::poly::MultiPoly::constant(&r, 2, v.clone()))
                        .collect();
                    prop_assert!(PolyMap::new(comps).unwrap().is_zero_on_residue().unwrap());
                }
            }
        }
    }
}
