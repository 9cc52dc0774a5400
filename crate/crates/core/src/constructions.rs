//! Explicit maps, witnesses and probes.

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::jacobian::{is_keller, translate_map, AffineKellerAuto};
use crate::linalg::{self, bareiss_det, integer_kernel_vector, Matrix};
use crate::poly::{MultiPoly, PolyMap};
use crate::ring::{Elem, Ring, RingKind, DEFAULT_BUDGET};
use crate::sampling::{random_affine_keller, random_point};
use crate::unimodular::{check_unimodular_with, scan, ScanOptions, Verdict};

/// `F = X + H` with `H_j = Σ_k b_{kj}·X_k³`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuasiDruzkowskiInstance {
    pub b: Vec<Vec<BigInt>>,
}

impl QuasiDruzkowskiInstance {
    pub fn new(b: Vec<Vec<BigInt>>) -> Result<Self> {
        let n = b.len();
        if n == 0 || b.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("B must be a nonempty square matrix".into()));
        }
        Ok(QuasiDruzkowskiInstance { b })
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn cubic_part(&self, ring: &Ring) -> Vec<MultiPoly> {
        let n = self.dim();
        (0..n)
            .map(|j| {
                let terms = (0..n).filter(|&k| !self.b[k][j].is_zero()).map(|k| {
                    let mut e = vec![0u32; n];
                    e[k] = 3;
                    (e, ring.from_bigint(&self.b[k][j]))
                });
                MultiPoly::from_terms(ring, n, terms).expect("exponents in range")
            })
            .collect()
    }

    pub fn map(&self, ring: &Ring) -> PolyMap {
        let n = self.dim();
        let comps = self
            .cubic_part(ring)
            .iter()
            .enumerate()
            .map(|(j, h)| &MultiPoly::var(ring, n, j).expect("index below n") + h)
            .collect();
        PolyMap::new(comps).expect("square")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuasiDruzkowskiWitness {
    pub instance: QuasiDruzkowskiInstance,
    pub map: PolyMap,
    /// Primitive integer vector with `B·u = 0`.
    pub u: Vec<BigInt>,
    /// First coordinate of `u` prime to `p` (0-based).
    pub pivot: usize,
    /// `1` at the pivot, `p` elsewhere.
    pub point: Vec<Elem>,
    pub value: Vec<Elem>,
    /// First component of `F(point)` that is a unit (0-based).
    pub unit_component: usize,
}

/// Witness that `F = X + H` is unimodular over `Z/p^N` for singular `B`:
/// with `Σ_j u_j·H_j = 0`, the combination `Σ_j u_j F_j(x) = Σ_j u_j x_j` is
/// a unit at the point `x` with `1` at a unit position of `u` and `p`
/// elsewhere.
pub fn quasi_druzkowski_witness(b: &[Vec<BigInt>], p: u64, precision: u32) -> Result<QuasiDruzkowskiWitness> {
    let instance = QuasiDruzkowskiInstance::new(b.to_vec())?;
    let det = bareiss_det(b);
    if !det.is_zero() {
        return Err(Error::NonSingular { det });
    }
    let ring = Ring::zp(p, precision)?;
    let n = instance.dim();
    let u = integer_kernel_vector(b)
        .ok_or_else(|| Error::TheoremViolation("singular matrix with trivial kernel".into()))?;
    for (k, row) in b.iter().enumerate() {
        let s: BigInt = row.iter().zip(&u).map(|(x, y)| x * y).sum();
        if !s.is_zero() {
            return Err(Error::TheoremViolation(format!(
                "coefficient of X{}^3 in the combination is {s}",
                k + 1
            )));
        }
    }
    let pb = BigInt::from(p);
    let pivot = u
        .iter()
        .position(|x| !(x % &pb).is_zero())
        .ok_or(Error::DegenerateKernel)?;
    let point: Vec<Elem> = (0..n)
        .map(|i| if i == pivot { ring.one() } else { ring.from_i64(p as i64) })
        .collect();
    let map = instance.map(&ring);
    let combo = instance
        .cubic_part(&ring)
        .iter()
        .zip(&u)
        .fold(MultiPoly::zero(&ring, n), |acc, (h, c)| &acc + &h.scale(&ring.from_bigint(c)));
    if !combo.is_zero() {
        return Err(Error::TheoremViolation("combination of cubic parts is nonzero".into()));
    }
    let value = map.eval(&point)?;
    let unit_component = value
        .iter()
        .position(|v| ring.is_unit(v))
        .ok_or_else(|| Error::TheoremViolation("no unit component at the witness".into()))?;
    Ok(QuasiDruzkowskiWitness {
        instance,
        map,
        u,
        pivot,
        point,
        value,
        unit_component,
    })
}

/// `(X_1 − X_1^p, …, X_n − X_n^p)` over `F_p[T]/T^N`: Keller with zero
/// residue map.
pub fn char_p_counterexample(ring: &Ring, n: usize) -> Result<PolyMap> {
    if ring.kind() != RingKind::EqualTruncated {
        return Err(Error::WrongCharacteristic(format!(
            "{} is not of the form F_p[T]/T^N",
            ring
        )));
    }
    let p = ring.p() as u32;
    let comps = (0..n)
        .map(|i| {
            let x = MultiPoly::var(ring, n, i)?;
            Ok(&x - &x.pow(p))
        })
        .collect::<Result<Vec<_>>>()?;
    let f = PolyMap::new(comps)?;
    if !is_keller(&f)? {
        return Err(Error::TheoremViolation("X - X^p is not Keller".into()));
    }
    let rep = check_unimodular_with(&f, ScanOptions::default());
    if rep.verdict == Verdict::Unimodular {
        return Err(Error::TheoremViolation("X - X^p has a nonzero residue value".into()));
    }
    Ok(f)
}

/// `g(X) = −1 + X − X² + X³ − X⁴` over `F_5`.
pub fn g_polynomial(ring: &Ring, nvars: usize, var: usize) -> Result<MultiPoly> {
    let x = MultiPoly::var(ring, nvars, var)?;
    let mut g = MultiPoly::from_i64(ring, nvars, -1);
    for k in 1..=4u32 {
        let t = x.pow(k);
        g = if k % 2 == 1 { &g + &t } else { &g - &t };
    }
    Ok(g)
}

/// `F_j = X_j − X_j^5 + g(X_j^5)` over `F_5[T]/T^N`. Its residue map is
/// `(g(x_1), …, g(x_n))`.
pub fn g_composition_example(ring: &Ring, n: usize) -> Result<PolyMap> {
    if ring.kind() != RingKind::EqualTruncated || ring.p() != 5 {
        return Err(Error::WrongCharacteristic(format!(
            "the g-map lives over F_5[T]/T^N, not {}",
            ring
        )));
    }
    let comps = (0..n)
        .map(|j| {
            let x = MultiPoly::var(ring, n, j)?;
            let x5 = x.pow(5);
            let g = g_polynomial(ring, n, j)?;
            let g_of_x5 = g.substitute(
                &(0..n)
                    .map(|i| if i == j { Ok(x5.clone()) } else { MultiPoly::var(ring, n, i) })
                    .collect::<Result<Vec<_>>>()?,
            )?;
            Ok(&(&x - &x5) + &g_of_x5)
        })
        .collect::<Result<Vec<_>>>()?;
    let f = PolyMap::new(comps)?;
    if !is_keller(&f)? {
        return Err(Error::TheoremViolation("g-map is not Keller".into()));
    }
    if check_unimodular_with(&f, ScanOptions::default()).verdict == Verdict::NotUnimodular {
        return Err(Error::TheoremViolation("g-map has zero residue map".into()));
    }
    Ok(f)
}

/// Whether `F∘F` vanishes at every residue point, evaluated pointwise.
pub fn self_composition_is_zero_on_residue(f: &PolyMap, budget: u64) -> Result<bool> {
    let red = f.reduce();
    let k = red.ring().clone();
    for x in f.ring().enumerate_residue_points(f.dim(), budget)? {
        let y = red.eval_unchecked(&red.eval_unchecked(&x));
        if y.iter().any(|v| !k.is_zero(v)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Write `X_i = Σ_t Y_{i·m+t}·θ^t` and split each `F_j` along the power
/// basis: component `j·m + t` is the `θ^t` coordinate of `F_j`, over
/// `Z/p^N`.
pub fn restrict_scalars(f: &PolyMap) -> Result<PolyMap> {
    let ring = f.ring();
    match ring.kind() {
        RingKind::UnramifiedTruncated | RingKind::MixedTruncated | RingKind::ResidueField => {}
        RingKind::EqualTruncated => {
            return Err(Error::WrongRingKind(format!(
                "{} is not a free module over Z/p^N",
                ring
            )))
        }
    }
    let m = ring.residue_degree() as usize;
    let n = f.dim();
    let total = n * m;
    let theta = ring.generator().unwrap_or_else(|| ring.one());
    let mut power = ring.one();
    let mut powers = Vec::with_capacity(m);
    for _ in 0..m {
        powers.push(power.clone());
        power = ring.mul(&power, &theta);
    }
    let subs = (0..n)
        .map(|i| {
            (0..m).try_fold(MultiPoly::zero(ring, total), |acc, t| {
                Ok(&acc + &MultiPoly::var(ring, total, i * m + t)?.scale(&powers[t]))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let base = Ring::zp(ring.p(), ring.precision())?;
    let mut comps = Vec::with_capacity(total);
    for c in f.components() {
        let expanded = c.substitute(&subs)?;
        for t in 0..m {
            let terms = expanded
                .terms()
                .map(|(mono, coef)| (mono.exponents().to_vec(), coef.coords()[t]))
                .filter(|(_, v)| *v != 0)
                .map(|(e, v)| Ok((e, base.elem(&[v])?)))
                .collect::<Result<Vec<_>>>()?;
            comps.push(MultiPoly::from_terms(&base, total, terms)?);
        }
    }
    PolyMap::new(comps)
}

/// Coordinates of a point in the power basis, flattened block by block.
pub fn point_coordinates(ring: &Ring, x: &[Elem]) -> Result<Vec<Elem>> {
    let base = Ring::zp(ring.p(), ring.precision())?;
    x.iter()
        .flat_map(|a| a.coords().iter().map(|&c| base.elem(&[c])))
        .collect()
}

/// `A ∈ SL_n` with first column `v`. Columns are `v` followed by the
/// standard basis vectors other than `e_{i0}` for the first unit coordinate
/// `i0`; the second column is rescaled so that `det A = 1`.
pub fn complete_to_sl(ring: &Ring, v: &[Elem]) -> Result<Matrix> {
    let n = v.len();
    let i0 = v
        .iter()
        .position(|a| ring.is_unit(a))
        .ok_or(Error::NotUnimodularVector)?;
    if n == 1 {
        if ring.is_one(&v[0]) {
            return Ok(vec![vec![ring.one()]]);
        }
        return Err(Error::PreconditionFailed(
            "a 1x1 matrix of determinant 1 has first column 1".into(),
        ));
    }
    let mut cols: Vec<Vec<Elem>> = vec![v.to_vec()];
    for j in (0..n).filter(|&j| j != i0) {
        let mut e = vec![ring.zero(); n];
        e[j] = ring.one();
        cols.push(e);
    }
    // det[v, e_j (j ≠ i0)] = (−1)^{i0}·v_{i0} with 0-based i0.
    let mut s = ring.inv(&v[i0])?;
    if i0 % 2 == 1 {
        s = ring.neg(&s);
    }
    for x in cols[1].iter_mut() {
        *x = ring.mul(x, &s);
    }
    let a: Matrix = (0..n).map(|i| cols.iter().map(|c| c[i].clone()).collect()).collect();
    debug_assert!(ring.is_one(&linalg::det(ring, &a)));
    Ok(a)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairTransitivityWitness {
    pub h: AffineKellerAuto,
    pub c: Vec<Elem>,
    pub d: Vec<Elem>,
    pub a1: Vec<Elem>,
    pub a2: Vec<Elem>,
}

/// Affine Keller `H` with `H(c) = a1` and `H(d) = a2`.
pub fn pair_transitivity(
    ring: &Ring,
    a1: &[Elem],
    a2: &[Elem],
    c: &[Elem],
    d: &[Elem],
) -> Result<PairTransitivityWitness> {
    let n = a1.len();
    if [a2.len(), c.len(), d.len()].iter().any(|&l| l != n) {
        return Err(Error::ArityMismatch {
            expected: n,
            found: a2.len().max(c.len()).max(d.len()),
        });
    }
    let diff = |x: &[Elem], y: &[Elem]| -> Vec<Elem> {
        x.iter().zip(y).map(|(a, b)| ring.sub(a, b)).collect()
    };
    let a_s = complete_to_sl(ring, &diff(d, c))?;
    let a_t = complete_to_sl(ring, &diff(a2, a1))?;
    let l = linalg::mat_mul(ring, &a_t, &linalg::inverse(ring, &a_s)?);
    let b = diff(a1, &linalg::mat_vec(ring, &l, c));
    let h = AffineKellerAuto::new(ring, l, b)?;
    if h.apply(c) != a1 || h.apply(d) != a2 {
        return Err(Error::TheoremViolation("interpolation conditions fail".into()));
    }
    Ok(PairTransitivityWitness {
        h,
        c: c.to_vec(),
        d: d.to_vec(),
        a1: a1.to_vec(),
        a2: a2.to_vec(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DUnimodularExtension {
    pub ring: Ring,
    /// Least `n` with `p^n > d`.
    pub degree: u32,
    /// `d^n`.
    pub lhs: BigUint,
    /// `(p^n)^n`.
    pub rhs: BigUint,
}

impl DUnimodularExtension {
    pub fn holds(&self) -> bool {
        self.lhs < self.rhs
    }
}

/// The unramified ring whose residue field has more than `d` elements,
/// with the inequality `d^n < (p^n)^n` that bounds the residue zero count.
pub fn find_d_unimodular_extension(p: u64, d: u64, precision: u32) -> Result<DUnimodularExtension> {
    if d == 0 {
        return Err(Error::InvalidInput("degree bound must be at least 1".into()));
    }
    let mut n = 1u32;
    let mut q = p as u128;
    while q <= d as u128 {
        n += 1;
        q *= p as u128;
    }
    let ring = Ring::unramified(p, n, precision)?;
    let qn = BigUint::from(q);
    let ext = DUnimodularExtension {
        ring,
        degree: n,
        lhs: BigUint::from(d).pow(n),
        rhs: qn.pow(n),
    };
    if !ext.holds() {
        return Err(Error::TheoremViolation("d^n >= (p^n)^n".into()));
    }
    Ok(ext)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProbeFailure {
    /// `F∘G∘F` has zero residue map.
    Composition { trial: u32, g: AffineKellerAuto },
    /// `F − F(a)` has zero residue map.
    Translation { trial: u32, a: Vec<Elem> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbeReport {
    pub ring: Ring,
    pub digest: String,
    pub seed: u64,
    pub trials: u32,
    pub checks: u32,
    pub failures: Vec<ProbeFailure>,
}

impl ProbeReport {
    pub fn composition_failures(&self) -> usize {
        self.failures
            .iter()
            .filter(|f| matches!(f, ProbeFailure::Composition { .. }))
            .count()
    }

    pub fn translation_failures(&self) -> usize {
        self.failures.len() - self.composition_failures()
    }

    pub fn to_document(&self) -> Map<String, Value> {
        let mut m = Map::new();
        m.insert("ring".into(), self.ring.to_string().into());
        m.insert("digest".into(), self.digest.clone().into());
        m.insert("seed".into(), self.seed.into());
        m.insert("trials".into(), self.trials.into());
        m.insert("checks".into(), self.checks.into());
        m.insert("composition_failures".into(), self.composition_failures().into());
        m.insert("translation_failures".into(), self.translation_failures().into());
        let first_comp = self.failures.iter().find_map(|f| match f {
            ProbeFailure::Composition { trial, .. } => Some(*trial),
            _ => None,
        });
        let first_trans = self.failures.iter().find_map(|f| match f {
            ProbeFailure::Translation { trial, a } => Some((*trial, self.ring.format_point(a))),
            _ => None,
        });
        m.insert("first_composition_failure_trial".into(), first_comp.into());
        m.insert(
            "first_translation_failure_trial".into(),
            first_trans.as_ref().map(|t| t.0).into(),
        );
        m.insert(
            "first_translation_failure_point".into(),
            first_trans.map(|t| t.1).into(),
        );
        m
    }
}

/// Sample affine Keller automorphisms `G` and points `a`, and test whether
/// `F∘G∘F` and `F − F(a)` keep a nonzero residue map. Trial `t` draws from
/// ChaCha8 seeded with `seed` on stream `t`; trial 0 is fixed to `G = Id`
/// and `a = (1, …, 1)`.
pub fn invariance_probe(f: &PolyMap, trials: u32, seed: u64) -> Result<ProbeReport> {
    invariance_probe_with(f, trials, seed, DEFAULT_BUDGET)
}

pub fn invariance_probe_with(f: &PolyMap, trials: u32, seed: u64, budget: u64) -> Result<ProbeReport> {
    let ring = f.ring().clone();
    let n = f.dim();
    if !is_keller(f)? {
        return Err(Error::PreconditionFailed("probe needs a Keller map".into()));
    }
    let opts = ScanOptions {
        budget,
        partitions: 0,
    };
    match check_unimodular_with(f, opts) {
        r if r.verdict == Verdict::NotUnimodular => {
            return Err(Error::PreconditionFailed("probe needs a unimodular map".into()))
        }
        r if r.verdict == Verdict::BudgetExceeded => {
            return Err(Error::BudgetExceeded {
                required: r.required.unwrap_or(u128::MAX),
                budget,
            })
        }
        _ => {}
    }
    let red = f.reduce();
    let k = red.ring().clone();
    let elems = ring.residue_elements();
    let total = ring.enumerate_residue_points(n, budget)?.total();

    let per_trial: Vec<Result<Vec<ProbeFailure>>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let (g, a) = if t == 0 {
                (AffineKellerAuto::identity(&ring, n), vec![ring.one(); n])
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(t as u64);
                let g = random_affine_keller(&ring, n, &mut rng);
                let a = random_point(&ring, n, &mut rng);
                (g, a)
            };
            let mut out = Vec::new();
            let g_red = g.as_map().reduce();
            let (_, first) = scan(&elems, n, total, 1, |x| {
                let y = red.eval_unchecked(&g_red.eval_unchecked(&red.eval_unchecked(x)));
                y.iter().all(|v| k.is_zero(v))
            });
            if first.is_none() {
                out.push(ProbeFailure::Composition { trial: t, g });
            }
            let tr = translate_map(f, &a)?;
            if check_unimodular_with(&tr, ScanOptions { budget, partitions: 1 }).verdict
                == Verdict::NotUnimodular
            {
                out.push(ProbeFailure::Translation { trial: t, a });
            }
            Ok(out)
        })
        .collect();
    let mut failures = Vec::new();
    for r in per_trial {
        failures.extend(r?);
    }
    Ok(ProbeReport {
        ring,
        digest: f.digest(),
        seed,
        trials,
        checks: 2 * trials,
        failures,
    })
}

/// Integer matrix helper for callers that build `B` from small literals.
pub fn int_matrix(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
    rows.iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect()
}
