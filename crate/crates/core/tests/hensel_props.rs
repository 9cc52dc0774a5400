mod common;

use common::{all_points, poly_map, rng};
use keller_core::hensel::{discriminant, fiber_points, hensel_lift, lift_univariate_root};
use keller_core::jacobian::jacobian_matrix;
use keller_core::linalg;
use keller_core::poly::{MultiPoly, PolyMap};
use keller_core::ring::{Elem, Ring};
use keller_core::sampling::{random_point, random_triangular_keller};
use keller_core::Error;
use num_bigint::BigInt;
use proptest::prelude::*;

fn is_root(f: &PolyMap, x: &[Elem]) -> bool {
    let r = f.ring();
    f.eval(x).unwrap().iter().all(|v| r.is_zero(v))
}

fn congruent(r: &Ring, x: &[Elem], y: &[Elem], k: u32) -> bool {
    x.iter().zip(y).all(|(a, b)| r.ord(&r.sub(a, b)) >= k)
}

fn lift_rings() -> Vec<(Ring, usize)> {
    vec![
        (Ring::zp(3, 3).unwrap(), 1),
        (Ring::zp(2, 4).unwrap(), 1),
        (Ring::zp(3, 2).unwrap(), 2),
        (Ring::fpt(3, 3).unwrap(), 1),
        (Ring::unramified(2, 2, 2).unwrap(), 1),
        (Ring::zp(5, 3).unwrap(), 1),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    /// Every admissible start point lifts to a root; the root is unique in
    /// its class modulo M^{N-m}, and for m = 0 the class holds exactly one root.
    #[test]
    fn lifts_are_roots_and_unique(
        (r, f) in prop::sample::select(lift_rings())
            .prop_flat_map(|(r, n)| (Just(r.clone()), poly_map(&r, n, 3, 4)))
    ) {
        let n = f.dim();
        let big_n = r.precision();
        let everything = all_points(&r, n);
        let jac = jacobian_matrix(&f);
        for alpha in &everything {
            let m = r.ord(&linalg::det(&r, &jac.eval(alpha).unwrap()));
            let val = f.eval(alpha).unwrap().iter().map(|v| r.ord(v)).min().unwrap();
            let res = hensel_lift(&f, alpha, big_n);
            if m >= big_n || val < 2 * m + 1 {
                prop_assert!(res.is_err());
                continue;
            }
            let res = res.unwrap();
            prop_assert_eq!(res.m, m);
            prop_assert_eq!(res.uniqueness_exponent, m + 1);
            prop_assert!(is_root(&f, &res.beta));
            prop_assert!(congruent(&r, &res.beta, alpha, m + 1));
            prop_assert!(res.progress.windows(2).all(|w| w[0] < w[1]));
            prop_assert_eq!(*res.progress.last().unwrap(), big_n);
            let class: Vec<&Vec<Elem>> = everything
                .iter()
                .filter(|x| congruent(&r, x, alpha, m + 1) && is_root(&f, x))
                .collect();
            prop_assert!(class.iter().all(|x| congruent(&r, x, &res.beta, big_n - m)));
            if m == 0 {
                prop_assert_eq!(class.len(), 1);
            }
        }
    }

    #[test]
    fn fiber_size_matches_residue_and_exhaustive_counts(
        (r, n) in prop::sample::select(vec![
            (Ring::zp(3, 2).unwrap(), 2),
            (Ring::zp(2, 3).unwrap(), 2),
            (Ring::fpt(2, 2).unwrap(), 2),
            (Ring::zp(5, 2).unwrap(), 1),
            (Ring::unramified(2, 2, 2).unwrap(), 1),
        ]),
        seed in any::<u64>(),
    ) {
        let mut g = rng(seed);
        let f = random_triangular_keller(&r, n, 3, 3, true, &mut g);
        let c = random_point(&r, n, &mut g);
        let fiber = fiber_points(&f, &c, true).unwrap();
        let k = r.residue_field_of();
        let fr = f.reduce();
        let cr: Vec<Elem> = c.iter().map(|x| r.reduce(x)).collect();
        let residue = all_points(&k, n).into_iter().filter(|x| fr.eval(x).unwrap() == cr).count();
        let exhaustive: Vec<Vec<Elem>> = all_points(&r, n)
            .into_iter()
            .filter(|x| f.eval(x).unwrap() == c)
            .collect();
        prop_assert_eq!(fiber.len(), residue);
        prop_assert_eq!(fiber.len(), exhaustive.len());
        let mut sorted = exhaustive.clone();
        sorted.sort_by_key(|x| x.iter().map(|a| r.index_of(a)).collect::<Vec<_>>());
        let mut fs = fiber.clone();
        fs.sort_by_key(|x| x.iter().map(|a| r.index_of(a)).collect::<Vec<_>>());
        prop_assert_eq!(fs, sorted);
    }

    #[test]
    fn univariate_roots_are_simple(
        coeffs in prop::collection::vec(-9i64..=9, 2..=5),
        p in prop::sample::select(vec![3u64, 5, 7]),
    ) {
        prop_assume!(*coeffs.last().unwrap() != 0);
        let f: Vec<BigInt> = coeffs.iter().map(|&c| BigInt::from(c)).collect();
        match lift_univariate_root(&f, p, 3) {
            Ok(root) => {
                let r = &root.ring;
                let poly = MultiPoly::from_terms(
                    r,
                    1,
                    f.iter().enumerate().map(|(i, c)| (vec![i as u32], r.from_bigint(c))),
                )
                .unwrap();
                prop_assert!(r.is_zero(&poly.eval(std::slice::from_ref(&root.root)).unwrap()));
                let k = r.residue_field_of();
                let dres = poly.partial_derivative(0).unwrap().reduce();
                prop_assert!(!k.is_zero(&dres.eval(&[r.reduce(&root.root)]).unwrap()));
                prop_assert_eq!(root.ring.p(), p);
            }
            Err(Error::BadPrime { .. }) => {
                let d = discriminant(&f).unwrap();
                prop_assert_eq!(d % BigInt::from(p), BigInt::from(0));
            }
            Err(Error::NoRootWithinBudget { .. }) => {}
            Err(e) => prop_assert!(false, "{}", e),
        }
    }

    #[test]
    fn discriminant_matches_closed_forms(a in 1i64..20, b in -20i64..20, c in -20i64..20, d in -20i64..20) {
        let quad = discriminant(&[c, b, a].map(BigInt::from)).unwrap();
        prop_assert_eq!(quad, BigInt::from(b * b - 4 * a * c));
        let cubic = discriminant(&[d, c, b, a].map(BigInt::from)).unwrap();
        let want = b * b * c * c - 4 * a * c * c * c - 4 * b * b * b * d - 27 * a * a * d * d + 18 * a * b * c * d;
        prop_assert_eq!(cubic, BigInt::from(want));
    }
}
