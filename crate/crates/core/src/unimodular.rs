//! Residue maps, the unimodularity search and the degree certificates.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::jacobian::{is_keller, DET_SIZE_GUARD};
use crate::poly::{MultiPoly, PolyMap};
use crate::ring::{Elem, Ring, RingKind, DEFAULT_BUDGET};

/// Coefficient-wise reduction to the residue field.
pub fn reduce_map(f: &PolyMap) -> PolyMap {
    f.reduce()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScanOptions {
    pub budget: u64,
    /// Number of index ranges scanned in parallel; 0 picks one per thread.
    pub partitions: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            budget: DEFAULT_BUDGET,
            partitions: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Unimodular,
    NotUnimodular,
    BudgetExceeded,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Unimodular => "unimodular",
            Verdict::NotUnimodular => "not-unimodular",
            Verdict::BudgetExceeded => "budget-exceeded",
        }
    }
}

/// Which a-priori unimodularity theorems have their hypotheses met.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Certificates {
    /// Keller and residue degree at most `q − 1`.
    pub degree_q_minus_1: bool,
    /// Keller, `n = 2`, mixed characteristic, `min(deg F_1, deg F_2) < q²`.
    pub dim2_refinement: bool,
    /// Keller over `Z/p^N` with `p > 3` and `d(F)` under the log bound.
    pub degree_bound: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnimodularityReport {
    pub ring: Ring,
    pub dim: usize,
    pub digest: String,
    pub verdict: Verdict,
    /// Lexicographically least residue point with a nonzero image.
    pub witness: Option<Vec<Elem>>,
    pub witness_value: Option<Vec<Elem>>,
    pub points_checked: u64,
    /// Residue points sent to the zero vector.
    pub zero_count: u64,
    /// `q^n` when the enumeration was refused.
    pub required: Option<u128>,
    /// Product of residue component degrees; `None` when a residue component
    /// vanishes.
    pub bezout_bound: Option<u128>,
    /// `None` when the Jacobian is too large for the symbolic determinant.
    pub keller: Option<bool>,
    pub certificates: Certificates,
}

impl UnimodularityReport {
    /// Flat key-value document; keys are sorted.
    pub fn to_document(&self) -> Map<String, Value> {
        let k = self.ring.residue_field_of();
        let mut m = Map::new();
        m.insert("ring".into(), self.ring.to_string().into());
        m.insert("dim".into(), self.dim.into());
        m.insert("digest".into(), self.digest.clone().into());
        m.insert("verdict".into(), self.verdict.name().into());
        m.insert(
            "witness".into(),
            self.witness.as_ref().map(|w| k.format_point(w)).into(),
        );
        m.insert(
            "witness_value".into(),
            self.witness_value.as_ref().map(|w| k.format_point(w)).into(),
        );
        m.insert("points_checked".into(), self.points_checked.into());
        m.insert("zero_count".into(), self.zero_count.into());
        m.insert("required".into(), self.required.map(u128_value).into());
        m.insert("bezout_bound".into(), self.bezout_bound.map(u128_value).into());
        m.insert("keller".into(), self.keller.into());
        m.insert(
            "cert_degree_q_minus_1".into(),
            self.certificates.degree_q_minus_1.into(),
        );
        m.insert(
            "cert_dim2_refinement".into(),
            self.certificates.dim2_refinement.into(),
        );
        m.insert(
            "cert_degree_bound".into(),
            self.certificates.degree_bound.into(),
        );
        m
    }
}

pub(crate) fn u128_value(x: u128) -> Value {
    match u64::try_from(x) {
        Ok(v) => v.into(),
        Err(_) => x.to_string().into(),
    }
}

pub fn check_unimodular(f: &PolyMap) -> UnimodularityReport {
    check_unimodular_with(f, ScanOptions::default())
}

/// Exhaustive search of `k^n` for a point with nonzero image under the
/// residue map. The whole space is always scanned so that `zero_count` is
/// exact.
pub fn check_unimodular_with(f: &PolyMap, opts: ScanOptions) -> UnimodularityReport {
    let ring = f.ring().clone();
    let n = f.dim();
    let keller = if n <= DET_SIZE_GUARD {
        is_keller(f).ok()
    } else {
        None
    };
    let red = reduce_map(f);
    let certificates = certificates(f, &red, keller == Some(true));
    let mut report = UnimodularityReport {
        ring: ring.clone(),
        dim: n,
        digest: f.digest(),
        verdict: Verdict::BudgetExceeded,
        witness: None,
        witness_value: None,
        points_checked: 0,
        zero_count: 0,
        required: None,
        bezout_bound: bezout_bound(&red),
        keller,
        certificates,
    };
    let points = match ring.enumerate_residue_points(n, opts.budget) {
        Ok(p) => p,
        Err(Error::BudgetExceeded { required, .. }) => {
            report.required = Some(required);
            return report;
        }
        Err(e) => unreachable!("enumeration only fails on the budget: {e}"),
    };
    let total = points.total();
    let (zeros, first) = scan(&ring.residue_elements(), n, total, opts.partitions, |x| {
        red.components().iter().all(|c| c.eval_unchecked(x).coords().iter().all(|&v| v == 0))
    });
    report.points_checked = total;
    report.zero_count = zeros;
    if let Some(i) = first {
        let w = points.point_at(i);
        report.witness_value = Some(red.eval_unchecked(&w));
        report.witness = Some(w);
        report.verdict = Verdict::Unimodular;
    } else {
        report.verdict = Verdict::NotUnimodular;
    }
    report
}

fn certificates(f: &PolyMap, red: &PolyMap, keller: bool) -> Certificates {
    if !keller {
        return Certificates::default();
    }
    let ring = f.ring();
    let q = ring.q() as u128;
    let degree_q_minus_1 = red.degree().is_some_and(|d| (d as u128) < q);
    let dim2_refinement = f.dim() == 2
        && ring.kind().is_mixed_characteristic()
        && f.components()
            .iter()
            .filter_map(MultiPoly::degree)
            .min()
            .is_some_and(|d| (d as u128) < q * q);
    let degree_bound = ring.kind() == RingKind::MixedTruncated
        && ring.p() > 3
        && degree_bound_predicate(ring.p(), f.dim() as u64, f.map_stat_d() as u64)
            .is_ok_and(|b| b.holds);
    Certificates {
        degree_q_minus_1,
        dim2_refinement,
        degree_bound,
    }
}

fn bezout_bound(red: &PolyMap) -> Option<u128> {
    red.components()
        .iter()
        .try_fold(1u128, |acc, c| acc.checked_mul(c.degree()? as u128))
}

/// Count zeros and find the least index of a non-zero over `elems^nvars`,
/// split into contiguous index ranges scanned in parallel.
pub(crate) fn scan<Z>(elems: &[Elem], nvars: usize, total: u64, partitions: usize, is_zero: Z) -> (u64, Option<u64>)
where
    Z: Fn(&[Elem]) -> bool + Sync,
{
    let parts = if partitions == 0 {
        rayon::current_num_threads().max(1) * 4
    } else {
        partitions
    } as u64;
    let parts = parts.clamp(1, total.max(1));
    let chunk = total.div_ceil(parts);
    let q = elems.len() as u64;
    (0..parts)
        .into_par_iter()
        .map(|part| {
            let lo = part * chunk;
            let hi = (lo + chunk).min(total);
            if lo >= hi {
                return (0, None);
            }
            let mut digits = vec![0u64; nvars];
            let mut rest = lo;
            for d in digits.iter_mut().rev() {
                *d = rest % q;
                rest /= q;
            }
            let mut point: Vec<Elem> = digits.iter().map(|&d| elems[d as usize].clone()).collect();
            let mut zeros = 0u64;
            let mut first = None;
            for idx in lo..hi {
                if is_zero(&point) {
                    zeros += 1;
                } else if first.is_none() {
                    first = Some(idx);
                }
                for pos in (0..nvars).rev() {
                    digits[pos] += 1;
                    if digits[pos] < q {
                        point[pos] = elems[digits[pos] as usize].clone();
                        break;
                    }
                    digits[pos] = 0;
                    point[pos] = elems[0].clone();
                }
            }
            (zeros, first)
        })
        .reduce(
            || (0, None),
            |(za, fa), (zb, fb)| {
                let first = match (fa, fb) {
                    (Some(a), Some(b)) => Some(a.min(b)),
                    (a, b) => a.or(b),
                };
                (za + zb, first)
            },
        )
}

/// Number of points of `F_{q^e}^n` at which every residue component
/// vanishes.
pub fn residue_zero_count(f: &PolyMap, e: u32) -> Result<u64> {
    residue_zero_count_with(f, e, ScanOptions::default())
}

pub fn residue_zero_count_with(f: &PolyMap, e: u32, opts: ScanOptions) -> Result<u64> {
    if e == 0 {
        return Err(Error::InvalidInput("extension degree must be at least 1".into()));
    }
    let (field, comps) = residue_over_extension(f, e)?;
    let n = f.dim();
    let points = field.enumerate_residue_points(n, opts.budget)?;
    let (zeros, _) = scan(&field.residue_elements(), n, points.total(), opts.partitions, |x| {
        comps.iter().all(|c| field.is_zero(&c.eval_unchecked(x)))
    });
    Ok(zeros)
}

/// The residue map with coefficients pushed into `F_{q^e}`, embedding the
/// residue field by the least root of its modulus.
fn residue_over_extension(f: &PolyMap, e: u32) -> Result<(Ring, Vec<MultiPoly>)> {
    let ring = f.ring();
    let red = reduce_map(f);
    if e == 1 {
        let k = ring.residue_field_of();
        return Ok((k, red.into_components()));
    }
    let n = ring.residue_degree();
    let big = Ring::residue_field(ring.p(), n * e)?;
    let k = red.ring().clone();
    let theta = match k.modulus() {
        None => None,
        Some(modulus) => {
            let total = big.cardinality().expect("finite field");
            let root = (0..total)
                .map(|i| big.element_at(i))
                .find(|x| {
                    let v = modulus.iter().rev().fold(big.zero(), |acc, &c| {
                        big.add(&big.mul(&acc, x), &big.from_i64(c as i64))
                    });
                    big.is_zero(&v)
                })
                .ok_or_else(|| Error::TheoremViolation("no root of the modulus in the extension".into()))?;
            Some(root)
        }
    };
    let embed = |c: &Elem| -> Elem {
        match &theta {
            None => big.from_i64(c.coords()[0] as i64),
            Some(t) => c.coords().iter().rev().fold(big.zero(), |acc, &ci| {
                big.add(&big.mul(&acc, t), &big.from_i64(ci as i64))
            }),
        }
    };
    let comps = red
        .components()
        .iter()
        .map(|c| c.map_coefficients(&big, embed))
        .collect();
    Ok((big, comps))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BezoutCheck {
    pub bound: u128,
    pub count: u64,
    pub satisfied: bool,
}

/// `#X(F_{q^e}) ≤ ∏ deg f_i`.
pub fn bezout_check(f: &PolyMap, e: u32) -> Result<BezoutCheck> {
    let red = reduce_map(f);
    let mut bound = 1u128;
    for (i, c) in red.components().iter().enumerate() {
        let d = c.degree().ok_or(Error::DegenerateComponent { index: i + 1 })?;
        bound = bound.saturating_mul(d as u128);
    }
    let count = residue_zero_count(f, e)?;
    Ok(BezoutCheck {
        bound,
        count,
        satisfied: count as u128 <= bound,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    /// The bound the theorem guarantees on the residue zero count.
    pub zero_bound: u128,
    pub zero_count: u64,
    pub witness: Vec<Elem>,
    pub witness_value: Vec<Elem>,
}

fn certify(f: &PolyMap, zero_bound: u128, what: &str) -> Result<Certificate> {
    let report = check_unimodular(f);
    match report.verdict {
        Verdict::BudgetExceeded => Err(Error::BudgetExceeded {
            required: report.required.unwrap_or(u128::MAX),
            budget: DEFAULT_BUDGET,
        }),
        Verdict::NotUnimodular => Err(Error::TheoremViolation(format!(
            "{what}: hypotheses hold but the residue map is zero on all {} points",
            report.points_checked
        ))),
        Verdict::Unimodular if report.zero_count as u128 > zero_bound => {
            Err(Error::TheoremViolation(format!(
                "{what}: {} residue zeros exceed the bound {zero_bound}",
                report.zero_count
            )))
        }
        Verdict::Unimodular => Ok(Certificate {
            zero_bound,
            zero_count: report.zero_count,
            witness: report.witness.expect("unimodular verdict has a witness"),
            witness_value: report.witness_value.expect("unimodular verdict has a value"),
        }),
    }
}

/// A Keller map whose residue map has degree at most `q − 1` has at most
/// `∏ deg f_i < q^n` residue zeros, so a witness exists; find it.
pub fn certify_q_minus_1(f: &PolyMap) -> Result<Certificate> {
    if !is_keller(f)? {
        return Err(Error::PreconditionFailed("map is not Keller".into()));
    }
    let red = reduce_map(f);
    let q = f.ring().q();
    let d = red.degree().unwrap_or(0);
    if d as u64 > q - 1 {
        return Err(Error::PreconditionFailed(format!(
            "residue degree {d} exceeds q - 1 = {}",
            q - 1
        )));
    }
    let bound = bezout_bound(&red).ok_or_else(|| {
        Error::TheoremViolation("Keller map with a vanishing residue component".into())
    })?;
    certify(f, bound, "degree <= q-1 certificate")
}

/// In dimension 2 over a mixed-characteristic ring, a Keller map with
/// `min(deg F_1, deg F_2) < q²` has at most that many residue zeros.
///
/// The bound rests on the map being Keller over the complete ring. A map
/// that is only Keller modulo `p^N` need not lift, and such a map can
/// trigger the violation error.
pub fn dim2_refinement_check(f: &PolyMap) -> Result<Certificate> {
    let ring = f.ring();
    if f.dim() != 2 {
        return Err(Error::PreconditionFailed(format!(
            "dimension is {}, expected 2",
            f.dim()
        )));
    }
    if !ring.kind().is_mixed_characteristic() {
        return Err(Error::PreconditionFailed(format!(
            "{} has equal characteristic",
            ring
        )));
    }
    if !is_keller(f)? {
        return Err(Error::PreconditionFailed("map is not Keller".into()));
    }
    let q = ring.q() as u128;
    let m = f
        .components()
        .iter()
        .map(|c| c.degree().unwrap_or(0) as u128)
        .min()
        .unwrap_or(0);
    if m >= q * q {
        return Err(Error::PreconditionFailed(format!(
            "min component degree {m} is not below q^2 = {}",
            q * q
        )));
    }
    certify(f, m, "dimension-2 refinement")
}

#[derive(Clone, Debug, PartialEq)]
pub struct DegreeBound {
    /// `log2(n·ln(p/3)/ln 3)`.
    pub rhs: f64,
    pub holds: bool,
}

impl DegreeBound {
    pub fn rhs_display(&self) -> String {
        format!("{:.6}", self.rhs)
    }
}

/// Largest exponent size, in bits, for which the exact comparison runs.
const EXACT_BITS: f64 = 1.0e6;

/// `d ≤ log2(n·ln(p/3)/ln 3)`, decided exactly as `3^(2^d + n) ≤ p^n`
/// when the powers are of manageable size, otherwise in floating point
/// with a `1e-9` margin.
pub fn degree_bound_predicate(p: u64, n: u64, d: u64) -> Result<DegreeBound> {
    if p <= 3 {
        return Err(Error::PreconditionFailed(format!("p = {p} must exceed 3")));
    }
    if n == 0 {
        return Err(Error::PreconditionFailed(
            "inner logarithm argument is not positive for n = 0".into(),
        ));
    }
    let inner = n as f64 * (p as f64 / 3.0).ln() / 3f64.ln();
    let rhs = inner.log2();
    let lhs_bits = if d < 64 {
        ((1u128 << d) + n as u128) as f64 * 3f64.log2()
    } else {
        f64::INFINITY
    };
    let rhs_bits = n as f64 * (p as f64).log2();
    let holds = if lhs_bits <= EXACT_BITS && rhs_bits <= EXACT_BITS {
        let e = (1u64 << d) + n;
        let lhs = BigUint::from(3u32).pow(e.to_u32().expect("bounded by EXACT_BITS"));
        let rhs = BigUint::from(p).pow(n.to_u32().expect("bounded by EXACT_BITS"));
        lhs <= rhs
    } else {
        (d as f64) <= rhs - 1e-9
    };
    Ok(DegreeBound { rhs, holds })
}
