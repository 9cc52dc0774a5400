//! Sparse multivariate polynomials over a [`Ring`] and square polynomial maps.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ring::{Elem, Ring, DEFAULT_BUDGET};

/// Exponent vector. Ordered graded-lexicographically: total degree first,
/// then by the exponent of `X1`, `X2`, ….
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    fn times(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                f.write_str("*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "X{}", i + 1)?;
            } else {
                write!(f, "X{}^{}", i + 1, e)?;
            }
        }
        if first {
            f.write_str("1")?;
        }
        Ok(())
    }
}

/// A polynomial in `nvars` variables. No stored coefficient is zero.
#[derive(Clone, Debug)]
pub struct MultiPoly {
    ring: Ring,
    nvars: usize,
    terms: BTreeMap<Monomial, Elem>,
}

/// Symbolic equality: same ring, same variables, same term map.
impl PartialEq for MultiPoly {
    fn eq(&self, other: &Self) -> bool {
        self.nvars == other.nvars && self.terms == other.terms && self.ring == other.ring
    }
}

impl Eq for MultiPoly {}

impl MultiPoly {
    pub fn zero(ring: &Ring, nvars: usize) -> Self {
        MultiPoly {
            ring: ring.clone(),
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(ring: &Ring, nvars: usize, c: Elem) -> Self {
        let mut p = Self::zero(ring, nvars);
        if !ring.is_zero(&c) {
            p.terms.insert(Monomial::one(nvars), c);
        }
        p
    }

    pub fn from_i64(ring: &Ring, nvars: usize, k: i64) -> Self {
        Self::constant(ring, nvars, ring.from_i64(k))
    }

    pub fn one(ring: &Ring, nvars: usize) -> Self {
        Self::constant(ring, nvars, ring.one())
    }

    /// The variable `X_{index+1}` (0-based index).
    pub fn var(ring: &Ring, nvars: usize, index: usize) -> Result<Self> {
        if index >= nvars {
            return Err(Error::VariableIndex { index, nvars });
        }
        let mut e = vec![0; nvars];
        e[index] = 1;
        Self::from_terms(ring, nvars, [(e, ring.one())])
    }

    /// Build from `(exponents, coefficient)` pairs; repeated monomials are
    /// summed and zero coefficients dropped.
    pub fn from_terms<I>(ring: &Ring, nvars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, Elem)>,
    {
        let mut p = Self::zero(ring, nvars);
        for (exps, c) in terms {
            if exps.len() != nvars {
                return Err(Error::ArityMismatch {
                    expected: nvars,
                    found: exps.len(),
                });
            }
            if c.coords().len() != ring.width() {
                return Err(Error::RingMismatch {
                    left: ring.to_string(),
                    right: format!("element of width {}", c.coords().len()),
                });
            }
            p.add_term(Monomial(exps), c);
        }
        Ok(p)
    }

    fn add_term(&mut self, m: Monomial, c: Elem) {
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                if !self.ring.is_zero(&c) {
                    v.insert(c);
                }
            }
            Entry::Occupied(mut o) => {
                let s = self.ring.add(o.get(), &c);
                if self.ring.is_zero(&s) {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Terms in ascending graded-lexicographic order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Elem)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `None` stands for the `-∞` of the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn coefficient(&self, exponents: &[u32]) -> Elem {
        self.terms
            .get(&Monomial(exponents.to_vec()))
            .cloned()
            .unwrap_or_else(|| self.ring.zero())
    }

    pub fn constant_term(&self) -> Elem {
        self.coefficient(&vec![0; self.nvars])
    }

    /// The constant value, if the polynomial is constant.
    pub fn as_constant(&self) -> Option<Elem> {
        match self.degree() {
            None => Some(self.ring.zero()),
            Some(0) => Some(self.constant_term()),
            _ => None,
        }
    }

    fn check_compatible(&self, other: &MultiPoly) -> Result<()> {
        self.ring.ensure_same(&other.ring)?;
        if self.nvars != other.nvars {
            return Err(Error::ArityMismatch {
                expected: self.nvars,
                found: other.nvars,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &MultiPoly) -> Result<MultiPoly> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &MultiPoly) -> Result<MultiPoly> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), self.ring.neg(c));
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &MultiPoly) -> Result<MultiPoly> {
        self.check_compatible(other)?;
        let mut out = MultiPoly::zero(&self.ring, self.nvars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.times(m2), self.ring.mul(c1, c2));
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Elem) -> MultiPoly {
        let mut out = MultiPoly::zero(&self.ring, self.nvars);
        for (m, a) in &self.terms {
            out.add_term(m.clone(), self.ring.mul(a, c));
        }
        out
    }

    pub fn pow(&self, mut exp: u32) -> MultiPoly {
        let mut acc = MultiPoly::one(&self.ring, self.nvars);
        let mut base = self.clone();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = &acc * &base;
            }
            exp >>= 1;
            if exp > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    fn check_point(&self, point: &[Elem], ring: &Ring) -> Result<()> {
        if point.len() != self.nvars {
            return Err(Error::ArityMismatch {
                expected: self.nvars,
                found: point.len(),
            });
        }
        if point.iter().any(|x| x.coords().len() != ring.width()) {
            return Err(Error::RingMismatch {
                left: ring.to_string(),
                right: "point coordinate of another width".into(),
            });
        }
        Ok(())
    }

    /// Evaluate at a point over the owner ring.
    pub fn eval(&self, point: &[Elem]) -> Result<Elem> {
        self.check_point(point, &self.ring)?;
        Ok(self.eval_unchecked(point))
    }

    pub(crate) fn eval_unchecked(&self, point: &[Elem]) -> Elem {
        let r = &self.ring;
        let mut acc = r.zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(&m.0) {
                match e {
                    0 => {}
                    1 => t = r.mul(&t, x),
                    _ => t = r.mul(&t, &r.pow(x, e as u64)),
                }
            }
            acc = r.add(&acc, &t);
        }
        acc
    }

    /// Evaluate at a point over the residue field: the polynomial is reduced
    /// first.
    pub fn eval_residue(&self, point: &[Elem]) -> Result<Elem> {
        self.reduce().eval(point)
    }

    /// Coefficient-wise reduction to the residue field.
    pub fn reduce(&self) -> MultiPoly {
        let k = self.ring.residue_field_of();
        let ring = self.ring.clone();
        self.map_coefficients(&k, |c| ring.reduce(c))
    }

    /// Apply `f` to every coefficient, landing in `target`.
    pub fn map_coefficients(&self, target: &Ring, f: impl Fn(&Elem) -> Elem) -> MultiPoly {
        let mut out = MultiPoly::zero(target, self.nvars);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    /// Re-index variables: variable `i` becomes variable `mapping[i]` of a
    /// polynomial in `nvars` variables.
    pub fn rename_vars(&self, nvars: usize, mapping: &[usize]) -> Result<MultiPoly> {
        if mapping.len() != self.nvars {
            return Err(Error::ArityMismatch {
                expected: self.nvars,
                found: mapping.len(),
            });
        }
        if let Some(&bad) = mapping.iter().find(|&&j| j >= nvars) {
            return Err(Error::VariableIndex { index: bad, nvars });
        }
        let mut out = MultiPoly::zero(&self.ring, nvars);
        for (m, c) in &self.terms {
            let mut e = vec![0; nvars];
            for (i, &ei) in m.0.iter().enumerate() {
                e[mapping[i]] += ei;
            }
            out.add_term(Monomial(e), c.clone());
        }
        Ok(out)
    }

    /// Formal partial derivative with respect to variable `index` (0-based).
    pub fn partial_derivative(&self, index: usize) -> Result<MultiPoly> {
        if index >= self.nvars {
            return Err(Error::VariableIndex {
                index,
                nvars: self.nvars,
            });
        }
        let mut out = MultiPoly::zero(&self.ring, self.nvars);
        for (m, c) in &self.terms {
            let e = m.0[index];
            if e == 0 {
                continue;
            }
            let mut exps = m.0.clone();
            exps[index] -= 1;
            out.add_term(
                Monomial(exps),
                self.ring.mul(c, &self.ring.from_i64(e as i64)),
            );
        }
        Ok(out)
    }

    /// `f(s_1, …, s_n)` for polynomials `s_i` sharing a ring and a variable
    /// count, by Horner's scheme in one variable at a time.
    pub fn substitute(&self, subs: &[MultiPoly]) -> Result<MultiPoly> {
        if subs.len() != self.nvars {
            return Err(Error::ArityMismatch {
                expected: self.nvars,
                found: subs.len(),
            });
        }
        let Some(first) = subs.first() else {
            return Err(Error::InvalidInput(
                "cannot substitute into a polynomial in zero variables".into(),
            ));
        };
        for s in subs {
            self.ring.ensure_same(&s.ring)?;
            first.check_compatible(s)?;
        }
        let terms: Vec<(&[u32], &Elem)> =
            self.terms.iter().map(|(m, c)| (m.0.as_slice(), c)).collect();
        let mut caches: Vec<PowerCache> = subs.iter().map(PowerCache::new).collect();
        Ok(horner(&terms, 0, &mut caches, first))
    }

    /// `f ∘ G`.
    pub fn compose(&self, g: &PolyMap) -> Result<MultiPoly> {
        self.substitute(&g.components)
    }

    /// Number of terms of total degree greater than 3.
    pub fn monomial_stat_d(&self) -> usize {
        self.terms.keys().filter(|m| m.degree() > 3).count()
    }

    /// Equality as functions `k^n → k` after reduction.
    pub fn functional_eq_on_residue(&self, other: &MultiPoly, budget: u64) -> Result<bool> {
        self.check_compatible(other)?;
        let a = self.reduce();
        let b = other.reduce();
        for pt in self.ring.enumerate_residue_points(self.nvars, budget)? {
            if a.eval_unchecked(&pt) != b.eval_unchecked(&pt) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

struct PowerCache<'a> {
    base: &'a MultiPoly,
    powers: HashMap<u32, MultiPoly>,
}

impl<'a> PowerCache<'a> {
    fn new(base: &'a MultiPoly) -> Self {
        PowerCache {
            base,
            powers: HashMap::new(),
        }
    }

    fn get(&mut self, k: u32) -> MultiPoly {
        if k == 1 {
            return self.base.clone();
        }
        if let Some(p) = self.powers.get(&k) {
            return p.clone();
        }
        let p = if k == 0 {
            MultiPoly::one(&self.base.ring, self.base.nvars)
        } else if k.is_multiple_of(2) {
            let h = self.get(k / 2);
            &h * &h
        } else {
            &self.get(k - 1) * self.base
        };
        self.powers.insert(k, p.clone());
        p
    }
}

fn horner(
    terms: &[(&[u32], &Elem)],
    var: usize,
    caches: &mut [PowerCache<'_>],
    shape: &MultiPoly,
) -> MultiPoly {
    let ring = &shape.ring;
    if var == caches.len() {
        let mut c = ring.zero();
        for (_, t) in terms {
            c = ring.add(&c, t);
        }
        return MultiPoly::constant(ring, shape.nvars, c);
    }
    let mut groups: BTreeMap<u32, Vec<(&[u32], &Elem)>> = BTreeMap::new();
    for &(e, c) in terms {
        groups.entry(e[var]).or_default().push((e, c));
    }
    let mut acc = MultiPoly::zero(ring, shape.nvars);
    let mut prev: Option<u32> = None;
    for (&e, group) in groups.iter().rev() {
        if let Some(pe) = prev {
            acc = &acc * &caches[var].get(pe - e);
        }
        acc = &acc + &horner(group, var + 1, caches, shape);
        prev = Some(e);
    }
    match prev {
        Some(e) if e > 0 => &acc * &caches[var].get(e),
        _ => acc,
    }
}

impl Add for &MultiPoly {
    type Output = MultiPoly;

    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        self.try_add(rhs).expect("polynomials over the same ring")
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;

    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        self.try_sub(rhs).expect("polynomials over the same ring")
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;

    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        self.try_mul(rhs).expect("polynomials over the same ring")
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;

    fn neg(self) -> MultiPoly {
        let ring = self.ring.clone();
        self.map_coefficients(&self.ring, |c| ring.neg(c))
    }
}

/// Canonical text: terms in descending graded-lexicographic order,
/// coefficients as least nonnegative residues, unit coefficients omitted.
impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            let coef = self.ring.format_elem(c);
            if m.is_one() {
                f.write_str(&coef)?;
            } else if self.ring.is_one(c) {
                write!(f, "{m}")?;
            } else {
                write!(f, "{coef}*{m}")?;
            }
        }
        Ok(())
    }
}

/// A square polynomial map `O^n → O^n`.
#[derive(Debug)]
pub struct PolyMap {
    ring: Ring,
    components: Vec<MultiPoly>,
    keller: OnceLock<bool>,
}

impl Clone for PolyMap {
    fn clone(&self) -> Self {
        let keller = OnceLock::new();
        if let Some(&v) = self.keller.get() {
            let _ = keller.set(v);
        }
        PolyMap {
            ring: self.ring.clone(),
            components: self.components.clone(),
            keller,
        }
    }
}

impl PartialEq for PolyMap {
    fn eq(&self, other: &Self) -> bool {
        self.components == other.components
    }
}

impl Eq for PolyMap {}

impl PolyMap {
    pub fn new(components: Vec<MultiPoly>) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(Error::InvalidInput("a map needs at least one component".into()));
        };
        let ring = first.ring.clone();
        for c in &components {
            ring.ensure_same(&c.ring)?;
            if c.nvars != components.len() {
                return Err(Error::ArityMismatch {
                    expected: components.len(),
                    found: c.nvars,
                });
            }
        }
        Ok(PolyMap {
            ring,
            components,
            keller: OnceLock::new(),
        })
    }

    pub fn identity(ring: &Ring, n: usize) -> Self {
        let comps = (0..n)
            .map(|i| MultiPoly::var(ring, n, i).expect("index in range"))
            .collect();
        Self::new(comps).expect("identity is square")
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    /// Number of variables, equal to the number of components.
    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[MultiPoly] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &MultiPoly {
        &self.components[i]
    }

    pub fn into_components(self) -> Vec<MultiPoly> {
        self.components
    }

    /// Maximum component degree; `None` for the zero map.
    pub fn degree(&self) -> Option<u32> {
        self.components.iter().filter_map(MultiPoly::degree).max()
    }

    pub fn eval(&self, point: &[Elem]) -> Result<Vec<Elem>> {
        self.components.iter().map(|c| c.eval(point)).collect()
    }

    pub(crate) fn eval_unchecked(&self, point: &[Elem]) -> Vec<Elem> {
        self.components
            .iter()
            .map(|c| c.eval_unchecked(point))
            .collect()
    }

    /// The induced map over the residue field.
    pub fn reduce(&self) -> PolyMap {
        PolyMap::new(self.components.iter().map(MultiPoly::reduce).collect())
            .expect("reduction keeps the map square")
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &PolyMap) -> Result<PolyMap> {
        if inner.dim() != self.dim() {
            return Err(Error::ArityMismatch {
                expected: self.dim(),
                found: inner.dim(),
            });
        }
        PolyMap::new(
            self.components
                .iter()
                .map(|c| c.compose(inner))
                .collect::<Result<_>>()?,
        )
    }

    /// `d(F) = Σ_j d(F_j)`.
    pub fn map_stat_d(&self) -> usize {
        self.components.iter().map(MultiPoly::monomial_stat_d).sum()
    }

    /// True when every component is the zero polynomial.
    pub fn is_zero(&self) -> bool {
        self.components.iter().all(MultiPoly::is_zero)
    }

    /// Equality as functions `k^n → k^n` after reduction.
    pub fn functional_eq_on_residue(&self, other: &PolyMap, budget: u64) -> Result<bool> {
        if self.dim() != other.dim() {
            return Err(Error::ArityMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        self.ring.ensure_same(&other.ring)?;
        let a = self.reduce();
        let b = other.reduce();
        for pt in self.ring.enumerate_residue_points(self.dim(), budget)? {
            if a.eval_unchecked(&pt) != b.eval_unchecked(&pt) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// True when the induced residue map sends every point to zero.
    pub fn is_zero_on_residue(&self) -> Result<bool> {
        let zero = PolyMap::new(
            (0..self.dim())
                .map(|_| MultiPoly::zero(&self.ring, self.dim()))
                .collect(),
        )?;
        self.functional_eq_on_residue(&zero, DEFAULT_BUDGET)
    }

    pub(crate) fn keller_cell(&self) -> &OnceLock<bool> {
        &self.keller
    }

    pub(crate) fn with_keller(self, verdict: Option<bool>) -> Self {
        if let Some(v) = verdict {
            let _ = self.keller.set(v);
        }
        self
    }

    /// Canonical document text: the ring line, the map header, one line per
    /// component.
    pub fn canonical_text(&self) -> String {
        format!("{}\nmap n={}\n{}", self.ring, self.dim(), self)
    }

    /// SHA-256 of [`canonical_text`](Self::canonical_text), hex encoded.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_text().as_bytes()))
    }
}

impl fmt::Display for PolyMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "F{} = {}", i + 1, c)?;
        }
        Ok(())
    }
}
