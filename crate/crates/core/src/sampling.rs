//! Random elements, `SL_n` matrices and Keller maps for tests and probes.

use rand::Rng;

use crate::jacobian::{apply_affine, AffineKellerAuto, Side};
use crate::linalg::{self, Matrix};
use crate::poly::{MultiPoly, PolyMap};
use crate::ring::{Elem, Ring};

pub fn random_elem<R: Rng + ?Sized>(ring: &Ring, rng: &mut R) -> Elem {
    let m = ring.coord_modulus();
    let coords: Vec<u64> = (0..ring.width()).map(|_| rng.gen_range(0..m)).collect();
    ring.elem(&coords).expect("coordinates below the modulus")
}

pub fn random_unit<R: Rng + ?Sized>(ring: &Ring, rng: &mut R) -> Elem {
    loop {
        let a = random_elem(ring, rng);
        if ring.is_unit(&a) {
            return a;
        }
    }
}

pub fn random_point<R: Rng + ?Sized>(ring: &Ring, n: usize, rng: &mut R) -> Vec<Elem> {
    (0..n).map(|_| random_elem(ring, rng)).collect()
}

/// A random element of `SL_n(ring)`: a product of elementary transvections
/// `E_ij(λ)` and signed swaps.
pub fn random_sl<R: Rng + ?Sized>(ring: &Ring, n: usize, rng: &mut R) -> Matrix {
    let mut a = linalg::identity(ring, n);
    if n < 2 {
        return a;
    }
    for _ in 0..3 * n {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        if rng.gen_bool(0.2) {
            // rows i, j ← j, −i
            a.swap(i, j);
            for x in a[j].iter_mut() {
                *x = ring.neg(x);
            }
        } else {
            let lambda = random_elem(ring, rng);
            for c in 0..n {
                let t = ring.mul(&lambda, &a[j][c]);
                a[i][c] = ring.add(&a[i][c], &t);
            }
        }
    }
    a
}

pub fn random_affine_keller<R: Rng + ?Sized>(ring: &Ring, n: usize, rng: &mut R) -> AffineKellerAuto {
    let a = random_sl(ring, n, rng);
    let b = random_point(ring, n, rng);
    AffineKellerAuto::new(ring, a, b).expect("product of SL generators")
}

/// `F_i = c_i·X_i + h_i(X_{i+1}, …, X_n)` with unit `c_i`, `∏ c_i = 1` and
/// `deg h_i ≤ max_degree`. When `conjugate` is set the result is wrapped in
/// random linear `SL_n` automorphisms on both sides, which keeps the degree.
pub fn random_triangular_keller<R: Rng + ?Sized>(
    ring: &Ring,
    n: usize,
    max_degree: u32,
    terms: usize,
    conjugate: bool,
    rng: &mut R,
) -> PolyMap {
    let mut units: Vec<Elem> = (0..n.saturating_sub(1)).map(|_| random_unit(ring, rng)).collect();
    let prod = units.iter().fold(ring.one(), |acc, u| ring.mul(&acc, u));
    units.push(ring.inv(&prod).expect("product of units"));

    let mut comps = Vec::with_capacity(n);
    for (i, c) in units.iter().enumerate() {
        let mut f = MultiPoly::var(ring, n, i)
            .expect("index below n")
            .scale(c);
        let tail = n - i - 1;
        if tail > 0 {
            for _ in 0..terms {
                let deg = rng.gen_range(0..=max_degree);
                let mut e = vec![0u32; n];
                for _ in 0..deg {
                    e[i + 1 + rng.gen_range(0..tail)] += 1;
                }
                let t = MultiPoly::from_terms(ring, n, [(e, random_elem(ring, rng))])
                    .expect("monomial in range");
                f = &f + &t;
            }
        }
        comps.push(f);
    }
    let mut f = PolyMap::new(comps).expect("square by construction");
    if conjugate {
        let left = AffineKellerAuto::new(ring, random_sl(ring, n, rng), vec![ring.zero(); n])
            .expect("SL matrix");
        let right = AffineKellerAuto::new(ring, random_sl(ring, n, rng), vec![ring.zero(); n])
            .expect("SL matrix");
        f = apply_affine(&left, &f, Side::Left).expect("same dimension");
        f = apply_affine(&right, &f, Side::Right).expect("same dimension");
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jacobian::is_keller;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sampled_objects_have_their_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for ring in [
            Ring::zp(5, 2).unwrap(),
            Ring::fpt(3, 3).unwrap(),
            Ring::unramified(2, 2, 2).unwrap(),
        ] {
            for n in 1..4 {
                let a = random_sl(&ring, n, &mut rng);
                assert!(ring.is_one(&linalg::det(&ring, &a)));
                let f = random_triangular_keller(&ring, n, 3, 2, true, &mut rng);
                assert!(f.degree().unwrap_or(0) <= 3);
                let fresh = PolyMap::new(f.components().to_vec()).unwrap();
                assert!(is_keller(&fresh).unwrap());
            }
        }
    }
}
