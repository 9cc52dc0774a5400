//! Newton lifting of residue solutions, Keller fibers and univariate roots.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::jacobian::{is_keller, jacobian_matrix};
use crate::linalg::{bareiss_det, laplace_det};
use crate::poly::{MultiPoly, PolyMap};
use crate::ring::{Elem, Ring, DEFAULT_BUDGET};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HenselLiftResult {
    /// Ring of the target precision.
    pub ring: Ring,
    pub beta: Vec<Elem>,
    /// `ord det JF(α)`.
    pub m: u32,
    pub iterations: u32,
    /// `β` is the only root in `α + M^{m+1}`, up to `M^{N−m}`.
    pub uniqueness_exponent: u32,
    /// Worst component valuation of `F` before each step and after the last.
    pub progress: Vec<u32>,
}

/// Lift a point `α` with `F(α) ≡ 0 mod M^{2m+1}`, `m = ord det JF(α)`, to
/// a root of `F` at precision `N`.
///
/// The Newton step divides by `det JF(β)`, whose valuation is `m`, so the
/// iteration runs at precision `N + m` and the result is read off modulo
/// `M^N`. When `N` exceeds the precision of `F`, the coefficients and `α`
/// are lifted by the canonical section.
pub fn hensel_lift(f: &PolyMap, alpha: &[Elem], target: u32) -> Result<HenselLiftResult> {
    let n = f.dim();
    if alpha.len() != n {
        return Err(Error::ArityMismatch {
            expected: n,
            found: alpha.len(),
        });
    }
    let src = f.ring();
    let ring = src.with_precision(target)?;
    let alpha_t = coerce_point(&ring, src, alpha)?;
    let f_t = coerce_map(&ring, f)?;
    let jac = jacobian_matrix(&f_t);
    let m = ring.ord(&laplace_det(&ring, n, |a, b| jac.get(a, b).eval_unchecked(&alpha_t)));
    if m >= target {
        return Err(Error::PreconditionFailed(format!(
            "det JF(alpha) vanishes at precision {target}"
        )));
    }
    if target < 2 * m + 1 {
        return Err(Error::PrecisionTooLow {
            needed: 2 * m + 1,
            have: target,
        });
    }
    let worst = |r: &Ring, vals: &[Elem]| vals.iter().map(|v| r.ord(v)).min().unwrap_or(r.precision());
    let start = worst(&ring, &f_t.eval_unchecked(&alpha_t));
    if start < 2 * m + 1 {
        return Err(Error::PreconditionFailed(format!(
            "F(alpha) has valuation {start}, need at least {}",
            2 * m + 1
        )));
    }

    let work = ring.with_precision(target + m)?;
    let f_w = coerce_map(&work, &f_t)?;
    let jac_w = jacobian_matrix(&f_w);
    let mut beta = coerce_point(&work, &ring, &alpha_t)?;
    let mut progress = vec![start];
    let mut iterations = 0;
    loop {
        let vals = f_w.eval_unchecked(&beta);
        let ord = worst(&work, &vals).min(target);
        if iterations > 0 {
            progress.push(ord);
        }
        if ord >= target {
            break;
        }
        if iterations > 2 * target + 2 {
            return Err(Error::TheoremViolation(
                "Newton iteration failed to converge".into(),
            ));
        }
        let j: Vec<Vec<Elem>> = (0..n)
            .map(|a| (0..n).map(|b| jac_w.get(a, b).eval_unchecked(&beta)).collect())
            .collect();
        let det = laplace_det(&work, n, |a, b| j[a][b].clone());
        // adj(J)·v, entry i = det of J with column i replaced by v.
        for i in 0..n {
            let num = laplace_det(&work, n, |a, b| {
                if b == i {
                    vals[a].clone()
                } else {
                    j[a][b].clone()
                }
            });
            let step = work.div_truncated(&num, &det)?;
            beta[i] = work.sub(&beta[i], &step);
        }
        iterations += 1;
    }
    let beta = coerce_point(&ring, &work, &beta)?;
    debug_assert!(f_t.eval_unchecked(&beta).iter().all(|v| ring.is_zero(v)));
    Ok(HenselLiftResult {
        ring,
        beta,
        m,
        iterations,
        uniqueness_exponent: m + 1,
        progress,
    })
}

fn coerce_point(target: &Ring, source: &Ring, x: &[Elem]) -> Result<Vec<Elem>> {
    x.iter().map(|a| target.coerce_from(source, a)).collect()
}

fn coerce_map(target: &Ring, f: &PolyMap) -> Result<PolyMap> {
    if target == f.ring() {
        return Ok(f.clone());
    }
    let src = f.ring().clone();
    let comps = f
        .components()
        .iter()
        .map(|c| {
            c.terms()
                .map(|(mono, coef)| Ok((mono.exponents().to_vec(), target.coerce_from(&src, coef)?)))
                .collect::<Result<Vec<_>>>()
                .and_then(|terms| MultiPoly::from_terms(target, f.dim(), terms))
        })
        .collect::<Result<Vec<_>>>()?;
    PolyMap::new(comps)
}

/// All points of `(O/M^N)^n` over `c`: residue solutions of `f = c̄`, each
/// lifted. Sorted and free of duplicates.
pub fn fiber_points(f: &PolyMap, c: &[Elem], require_keller: bool) -> Result<Vec<Vec<Elem>>> {
    fiber_points_with(f, c, require_keller, DEFAULT_BUDGET)
}

pub fn fiber_points_with(
    f: &PolyMap,
    c: &[Elem],
    require_keller: bool,
    budget: u64,
) -> Result<Vec<Vec<Elem>>> {
    let ring = f.ring().clone();
    let n = f.dim();
    if c.len() != n {
        return Err(Error::ArityMismatch {
            expected: n,
            found: c.len(),
        });
    }
    if require_keller && !is_keller(f)? {
        return Err(Error::NotKeller);
    }
    let g = PolyMap::new(
        f.components()
            .iter()
            .zip(c)
            .map(|(fi, ci)| fi - &MultiPoly::constant(&ring, n, ci.clone()))
            .collect(),
    )?;
    let red = g.reduce();
    let points = ring.enumerate_residue_points(n, budget)?;
    let solutions: Vec<Vec<Elem>> = (0..points.total())
        .into_par_iter()
        .filter_map(|i| {
            let x = points.point_at(i);
            red.eval_unchecked(&x)
                .iter()
                .all(|v| v.coords().iter().all(|&d| d == 0))
                .then_some(x)
        })
        .collect();
    let target = ring.precision();
    let mut lifted: Vec<Vec<Elem>> = solutions
        .par_iter()
        .map(|x| {
            let a: Vec<Elem> = x.iter().map(|v| ring.lift(v)).collect();
            hensel_lift(&g, &a, target).map(|r| r.beta)
        })
        .collect::<Result<_>>()?;
    lifted.sort();
    lifted.dedup();
    Ok(lifted)
}

/// `(−1)^{d(d−1)/2}·Res(f, f′)/lc(f)` for `f` given low-degree first.
pub fn discriminant(f: &[BigInt]) -> Result<BigInt> {
    let f = trim(f);
    let d = f.len().saturating_sub(1);
    if d == 0 {
        return Err(Error::InvalidInput(
            "discriminant needs a nonconstant polynomial".into(),
        ));
    }
    let df: Vec<BigInt> = (1..=d).map(|i| &f[i] * BigInt::from(i)).collect();
    let res = resultant(&f, &df);
    let sign = if (d * (d - 1) / 2).is_multiple_of(2) { 1 } else { -1 };
    let lc = &f[d];
    let (q, r) = res.div_rem(lc);
    debug_assert!(r.is_zero());
    Ok(q * sign)
}

fn trim(f: &[BigInt]) -> Vec<BigInt> {
    let mut v = f.to_vec();
    while v.len() > 1 && v.last().is_some_and(Zero::is_zero) {
        v.pop();
    }
    v
}

/// Determinant of the Sylvester matrix, both inputs low-degree first.
fn resultant(f: &[BigInt], g: &[BigInt]) -> BigInt {
    let (d, e) = (f.len() - 1, g.len() - 1);
    let size = d + e;
    let mut rows = Vec::with_capacity(size);
    for s in 0..e {
        let mut row = vec![BigInt::zero(); size];
        for (k, c) in f.iter().rev().enumerate() {
            row[s + k] = c.clone();
        }
        rows.push(row);
    }
    for s in 0..d {
        let mut row = vec![BigInt::zero(); size];
        for (k, c) in g.iter().rev().enumerate() {
            row[s + k] = c.clone();
        }
        rows.push(row);
    }
    bareiss_det(&rows)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnivariateRoot {
    /// Unramified ring of residue degree `k` at the requested precision.
    pub ring: Ring,
    pub root: Elem,
    pub residue_degree: u32,
    pub discriminant: BigInt,
}

/// A root of an integer polynomial in the smallest unramified extension
/// whose residue field contains a simple root of `f mod p`.
pub fn lift_univariate_root(f: &[BigInt], p: u64, precision: u32) -> Result<UnivariateRoot> {
    lift_univariate_root_with(f, p, precision, DEFAULT_BUDGET)
}

pub fn lift_univariate_root_with(
    f: &[BigInt],
    p: u64,
    precision: u32,
    budget: u64,
) -> Result<UnivariateRoot> {
    let f = trim(f);
    let disc = discriminant(&f)?;
    let pb = BigInt::from(p);
    if disc.mod_floor(&pb).is_zero() {
        return Err(Error::BadPrime {
            p,
            discriminant: disc,
        });
    }
    let reduced_degree = f
        .iter()
        .rposition(|c| !c.mod_floor(&pb).is_zero())
        .unwrap_or(0) as u32;
    let mut k = 1u32;
    while k <= reduced_degree {
        let q = (p as u128).checked_pow(k);
        if q.is_none_or(|q| q > budget as u128) {
            break;
        }
        let ring = Ring::unramified(p, k, precision)?;
        let map = PolyMap::new(vec![int_poly(&ring, &f)])?;
        let deriv = map.component(0).partial_derivative(0)?;
        let red = map.reduce();
        let dred = deriv.reduce();
        let kf = red.ring().clone();
        let found = ring.residue_elements().into_iter().find(|a| {
            let x = std::slice::from_ref(a);
            kf.is_zero(&red.component(0).eval_unchecked(x))
                && !kf.is_zero(&dred.eval_unchecked(x))
        });
        if let Some(a) = found {
            let lifted = hensel_lift(&map, &[ring.lift(&a)], precision)?;
            return Ok(UnivariateRoot {
                ring,
                root: lifted.beta.into_iter().next().expect("one coordinate"),
                residue_degree: k,
                discriminant: disc,
            });
        }
        k += 1;
    }
    Err(Error::NoRootWithinBudget {
        max_degree: k - 1,
    })
}

fn int_poly(ring: &Ring, f: &[BigInt]) -> MultiPoly {
    let terms: Vec<(Vec<u32>, Elem)> = f
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| (vec![i as u32], ring.from_bigint(c)))
        .collect();
    MultiPoly::from_terms(ring, 1, terms).expect("univariate terms")
}
