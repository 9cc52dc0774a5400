//! Truncated local rings and their residue fields.
//!
//! Every descriptor is backed by one of two coordinate families:
//!
//! * Galois rings `(Z/p^N)[θ]/(f̃)` with `f̃` the canonical lift of a monic
//!   irreducible `f ∈ F_p[x]` of degree `n`. This covers the residue fields
//!   `F_{p^n}` (`N = 1`), the plain truncations `Z/p^N` (`n = 1`) and the
//!   unramified extensions. Elements are coordinate vectors in the basis
//!   `1, θ, …, θ^{n-1}`, each coordinate in `0..p^N`.
//! * Truncated power series `F_p[T]/T^N`, stored as the `N` coefficients of
//!   `1, T, …, T^{N-1}`.
//!
//! Equality, unit-ness and "being zero" are all taken at the working
//! precision `N`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use smallvec::{smallvec, SmallVec};

use crate::error::{Error, Result};

/// Default cap on the number of points any exhaustive scan may visit.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Largest modulus `p^N` we accept for coordinates; products fit in `u128`.
const MAX_COORD_MODULUS: u64 = 1 << 62;

pub(crate) type Coords = SmallVec<[u64; 4]>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RingKind {
    ResidueField,
    MixedTruncated,
    EqualTruncated,
    UnramifiedTruncated,
}

impl RingKind {
    pub fn name(self) -> &'static str {
        match self {
            RingKind::ResidueField => "residue-field",
            RingKind::MixedTruncated => "mixed-char-truncated",
            RingKind::EqualTruncated => "equal-char-truncated",
            RingKind::UnramifiedTruncated => "unramified-truncated",
        }
    }

    /// True for the families whose complete ring has characteristic zero.
    pub fn is_mixed_characteristic(self) -> bool {
        matches!(
            self,
            RingKind::MixedTruncated | RingKind::UnramifiedTruncated
        )
    }
}

impl fmt::Display for RingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RingDescriptor {
    kind: RingKind,
    p: u64,
    residue_degree: u32,
    precision: u32,
    /// Monic modulus over `F_p`, low coefficient first; `None` when the
    /// residue degree is 1.
    modulus: Option<Vec<u64>>,
    /// `p^N` for Galois rings, `p` for power series.
    coord_modulus: u64,
}

impl RingDescriptor {
    pub fn kind(&self) -> RingKind {
        self.kind
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn residue_degree(&self) -> u32 {
        self.residue_degree
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn modulus(&self) -> Option<&[u64]> {
        self.modulus.as_deref()
    }

    /// Size of the residue field.
    pub fn q(&self) -> u64 {
        self.p.pow(self.residue_degree)
    }

    /// Number of coordinates of an element.
    pub fn width(&self) -> usize {
        match self.kind {
            RingKind::EqualTruncated => self.precision as usize,
            _ => self.residue_degree as usize,
        }
    }

    /// Modulus of each coordinate.
    pub fn coord_modulus(&self) -> u64 {
        self.coord_modulus
    }

    /// Number of elements of the truncated ring, when it fits in a `u128`.
    pub fn cardinality(&self) -> Option<u128> {
        (self.coord_modulus as u128).checked_pow(self.width() as u32)
    }

    /// Rank as a free module over `Z/p^N` (Galois family only).
    pub fn free_rank(&self) -> Option<u32> {
        self.is_galois().then_some(self.residue_degree)
    }

    pub fn is_field(&self) -> bool {
        self.precision == 1
    }

    fn is_galois(&self) -> bool {
        self.kind != RingKind::EqualTruncated
    }
}

/// Shared handle to a ring descriptor. Cloning is cheap.
#[derive(Clone, Debug)]
pub struct Ring(Arc<RingDescriptor>);

impl Deref for Ring {
    type Target = RingDescriptor;

    fn deref(&self) -> &RingDescriptor {
        &self.0
    }
}

impl PartialEq for Ring {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || *self.0 == *other.0
    }
}

impl Eq for Ring {}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            RingKind::MixedTruncated => write!(f, "ring zp p={} prec={}", self.p, self.precision),
            RingKind::EqualTruncated => write!(f, "ring fpt p={} prec={}", self.p, self.precision),
            RingKind::UnramifiedTruncated => write!(
                f,
                "ring unram p={} deg={} prec={}",
                self.p, self.residue_degree, self.precision
            ),
            RingKind::ResidueField => {
                write!(f, "ring field p={} deg={}", self.p, self.residue_degree)
            }
        }
    }
}

/// A canonical coordinate vector. Which ring it belongs to is tracked by the
/// container (polynomial, map, matrix), not by the element itself.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Elem(pub(crate) Coords);

impl Elem {
    pub fn coords(&self) -> &[u64] {
        &self.0
    }
}

/// Canonical ordering: coefficient vectors with the most significant
/// coefficient last.
impl Ord for Elem {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.iter().rev().cmp(other.0.iter().rev()))
    }
}

impl PartialOrd for Elem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[inline]
fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

#[inline]
fn addmod(a: u64, b: u64, m: u64) -> u64 {
    let s = a as u128 + b as u128;
    (s % m as u128) as u64
}

#[inline]
fn submod(a: u64, b: u64, m: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        m - (b - a)
    }
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for small in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(small) {
            return n == small;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn powmod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod(acc, base, m);
        }
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    acc
}

// Dense polynomials over F_p, low coefficient first.

fn fp_poly_rem(num: &[u64], den: &[u64], p: u64) -> Vec<u64> {
    let mut r = num.to_vec();
    let dd = den.len() - 1;
    let lead_inv = powmod(den[dd], p - 2, p);
    while r.len() > dd {
        let top = *r.last().unwrap();
        if top != 0 {
            let c = mulmod(top, lead_inv, p);
            let shift = r.len() - 1 - dd;
            for (j, &dj) in den.iter().enumerate() {
                r[shift + j] = submod(r[shift + j], mulmod(c, dj, p), p);
            }
        }
        r.pop();
    }
    while r.last() == Some(&0) {
        r.pop();
    }
    r
}

/// Monic polynomial of degree `deg` whose lower coefficients are the base-`p`
/// digits of `index` (least significant first).
fn monic_from_index(mut index: u64, deg: u32, p: u64) -> Vec<u64> {
    let mut coeffs = Vec::with_capacity(deg as usize + 1);
    for _ in 0..deg {
        coeffs.push(index % p);
        index /= p;
    }
    coeffs.push(1);
    coeffs
}

/// Irreducibility over `F_p` by exhaustive search for a monic factor of
/// degree at most `deg/2`.
pub fn is_irreducible_mod_p(f: &[u64], p: u64) -> bool {
    let deg = f.len() - 1;
    if deg == 0 {
        return false;
    }
    if deg == 1 {
        return true;
    }
    // Linear factors are roots.
    for a in 0..p {
        let mut acc = 0u64;
        for &c in f.iter().rev() {
            acc = addmod(mulmod(acc, a, p), c, p);
        }
        if acc == 0 {
            return false;
        }
    }
    for d in 2..=(deg / 2) as u32 {
        for idx in 0..p.pow(d) {
            let g = monic_from_index(idx, d, p);
            if fp_poly_rem(f, &g, p).is_empty() {
                return false;
            }
        }
    }
    true
}

/// The least monic irreducible polynomial of degree `n` over `F_p`, with
/// polynomials ordered by their coefficient vectors (most significant last).
pub fn smallest_irreducible(p: u64, n: u32) -> Vec<u64> {
    let count = p.pow(n);
    (0..count)
        .map(|idx| monic_from_index(idx, n, p))
        .find(|f| is_irreducible_mod_p(f, p))
        .expect("an irreducible polynomial of every degree exists over F_p")
}

fn checked_pow(base: u64, exp: u32) -> Option<u64> {
    base.checked_pow(exp).filter(|&v| v < MAX_COORD_MODULUS)
}

impl Ring {
    fn validate_common(p: u64, precision: u32) -> Result<()> {
        if !is_prime(p) {
            return Err(Error::InvalidInput(format!("{p} is not prime")));
        }
        if precision == 0 {
            return Err(Error::InvalidInput("precision must be at least 1".into()));
        }
        Ok(())
    }

    /// `Z/p^N`.
    pub fn zp(p: u64, precision: u32) -> Result<Ring> {
        Self::validate_common(p, precision)?;
        let cm = checked_pow(p, precision)
            .ok_or_else(|| Error::InvalidInput(format!("{p}^{precision} is too large")))?;
        Ok(Ring(Arc::new(RingDescriptor {
            kind: RingKind::MixedTruncated,
            p,
            residue_degree: 1,
            precision,
            modulus: None,
            coord_modulus: cm,
        })))
    }

    /// `F_p[T]/T^N`.
    pub fn fpt(p: u64, precision: u32) -> Result<Ring> {
        Self::validate_common(p, precision)?;
        if p >= MAX_COORD_MODULUS {
            return Err(Error::InvalidInput(format!("{p} is too large")));
        }
        Ok(Ring(Arc::new(RingDescriptor {
            kind: RingKind::EqualTruncated,
            p,
            residue_degree: 1,
            precision,
            modulus: None,
            coord_modulus: p,
        })))
    }

    /// The unramified extension of `Z/p^N` whose residue field has `p^n`
    /// elements. For `n = 1` this is plain `Z/p^N`.
    pub fn unramified(p: u64, n: u32, precision: u32) -> Result<Ring> {
        Self::validate_common(p, precision)?;
        if n == 0 {
            return Err(Error::InvalidInput("residue degree must be at least 1".into()));
        }
        if n == 1 {
            return Self::zp(p, precision);
        }
        Self::galois(RingKind::UnramifiedTruncated, p, n, precision)
    }

    /// The finite field `F_{p^n}`.
    pub fn residue_field(p: u64, n: u32) -> Result<Ring> {
        Self::validate_common(p, 1)?;
        if n == 0 {
            return Err(Error::InvalidInput("residue degree must be at least 1".into()));
        }
        Self::galois(RingKind::ResidueField, p, n, 1)
    }

    fn galois(kind: RingKind, p: u64, n: u32, precision: u32) -> Result<Ring> {
        let cm = checked_pow(p, precision)
            .ok_or_else(|| Error::InvalidInput(format!("{p}^{precision} is too large")))?;
        checked_pow(p, n)
            .ok_or_else(|| Error::InvalidInput(format!("residue field {p}^{n} is too large")))?;
        let modulus = (n > 1).then(|| smallest_irreducible(p, n));
        Ok(Ring(Arc::new(RingDescriptor {
            kind,
            p,
            residue_degree: n,
            precision,
            modulus,
            coord_modulus: cm,
        })))
    }

    /// Same family, residue field and modulus at a different precision.
    pub fn with_precision(&self, precision: u32) -> Result<Ring> {
        if precision == self.precision {
            return Ok(self.clone());
        }
        match self.kind {
            RingKind::EqualTruncated => Ring::fpt(self.p, precision),
            _ if precision == 1 => Ring::residue_field(self.p, self.residue_degree),
            _ => Ring::unramified(self.p, self.residue_degree, precision),
        }
    }

    /// The residue field `k = O/M`.
    pub fn residue_field_of(&self) -> Ring {
        if self.kind == RingKind::ResidueField {
            return self.clone();
        }
        let mut desc = (*self.0).clone();
        desc.kind = RingKind::ResidueField;
        desc.precision = 1;
        desc.coord_modulus = self.p;
        Ring(Arc::new(desc))
    }

    pub(crate) fn ensure_same(&self, other: &Ring) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::RingMismatch {
                left: self.to_string(),
                right: other.to_string(),
            })
        }
    }

    /// Validate raw coordinates and wrap them as an element.
    pub fn elem(&self, coords: &[u64]) -> Result<Elem> {
        if coords.len() != self.width() {
            return Err(Error::ArityMismatch {
                expected: self.width(),
                found: coords.len(),
            });
        }
        if let Some(&bad) = coords.iter().find(|&&c| c >= self.coord_modulus) {
            return Err(Error::InvalidInput(format!(
                "coordinate {bad} not reduced modulo {}",
                self.coord_modulus
            )));
        }
        Ok(Elem(coords.iter().copied().collect()))
    }

    pub fn zero(&self) -> Elem {
        Elem(smallvec![0; self.width()])
    }

    pub fn one(&self) -> Elem {
        self.from_u64(1)
    }

    fn from_u64(&self, k: u64) -> Elem {
        let mut c = self.zero().0;
        c[0] = k % self.coord_modulus;
        Elem(c)
    }

    pub fn from_i64(&self, k: i64) -> Elem {
        let m = self.coord_modulus as i128;
        self.from_u64((k as i128).rem_euclid(m) as u64)
    }

    pub fn from_bigint(&self, k: &BigInt) -> Elem {
        let m = BigInt::from(self.coord_modulus);
        let r = k.mod_floor(&m);
        self.from_u64(r.to_u64().expect("reduced value fits in u64"))
    }

    /// The uniformizer: `p` for the Galois family, `T` for power series.
    pub fn uniformizer(&self) -> Elem {
        match self.kind {
            RingKind::EqualTruncated => {
                let mut c = self.zero().0;
                if c.len() > 1 {
                    c[1] = 1;
                }
                Elem(c)
            }
            _ => self.from_u64(self.p),
        }
    }

    /// The ring generator printed as `t`: `θ` for extensions, `T` for power
    /// series, `None` when the ring has no such generator.
    pub fn generator(&self) -> Option<Elem> {
        match self.kind {
            RingKind::EqualTruncated => Some(self.uniformizer()),
            _ if self.residue_degree > 1 => {
                let mut c = self.zero().0;
                c[1] = 1;
                Some(Elem(c))
            }
            _ => None,
        }
    }

    pub fn is_zero(&self, a: &Elem) -> bool {
        a.0.iter().all(|&c| c == 0)
    }

    pub fn is_one(&self, a: &Elem) -> bool {
        a.0[0] == 1 % self.coord_modulus && a.0[1..].iter().all(|&c| c == 0)
    }

    pub fn add(&self, a: &Elem, b: &Elem) -> Elem {
        let m = self.coord_modulus;
        Elem(a.0.iter().zip(&b.0).map(|(&x, &y)| addmod(x, y, m)).collect())
    }

    pub fn sub(&self, a: &Elem, b: &Elem) -> Elem {
        let m = self.coord_modulus;
        Elem(a.0.iter().zip(&b.0).map(|(&x, &y)| submod(x, y, m)).collect())
    }

    pub fn neg(&self, a: &Elem) -> Elem {
        let m = self.coord_modulus;
        Elem(a.0.iter().map(|&x| submod(0, x, m)).collect())
    }

    pub fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        let m = self.coord_modulus;
        let w = self.width();
        if w == 1 {
            return Elem(smallvec![mulmod(a.0[0], b.0[0], m)]);
        }
        match self.kind {
            RingKind::EqualTruncated => {
                let mut out: Coords = smallvec![0; w];
                for (i, &x) in a.0.iter().enumerate() {
                    if x == 0 {
                        continue;
                    }
                    for (j, &y) in b.0[..w - i].iter().enumerate() {
                        out[i + j] = addmod(out[i + j], mulmod(x, y, m), m);
                    }
                }
                Elem(out)
            }
            _ => {
                let f = self.modulus.as_ref().expect("extension carries a modulus");
                let mut prod: SmallVec<[u64; 8]> = smallvec![0; 2 * w - 1];
                for (i, &x) in a.0.iter().enumerate() {
                    if x == 0 {
                        continue;
                    }
                    for (j, &y) in b.0.iter().enumerate() {
                        prod[i + j] = addmod(prod[i + j], mulmod(x, y, m), m);
                    }
                }
                // Reduce by the monic lift θ^w = -(f_0 + … + f_{w-1} θ^{w-1}).
                for k in (w..2 * w - 1).rev() {
                    let c = prod[k];
                    if c == 0 {
                        continue;
                    }
                    for (j, &fj) in f[..w].iter().enumerate() {
                        prod[k - w + j] = submod(prod[k - w + j], mulmod(c, fj, m), m);
                    }
                    prod[k] = 0;
                }
                Elem(prod[..w].iter().copied().collect())
            }
        }
    }

    pub fn pow(&self, a: &Elem, mut exp: u64) -> Elem {
        let mut acc = self.one();
        let mut base = a.clone();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            exp >>= 1;
            if exp > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    /// `ord_M(a)`, with the precision `N` standing for "zero at this precision".
    pub fn ord(&self, a: &Elem) -> u32 {
        match self.kind {
            RingKind::EqualTruncated => a
                .0
                .iter()
                .position(|&c| c != 0)
                .map_or(self.precision, |i| i as u32),
            _ => a
                .0
                .iter()
                .map(|&c| self.vp(c))
                .min()
                .unwrap_or(self.precision),
        }
    }

    fn vp(&self, mut c: u64) -> u32 {
        if c == 0 {
            return self.precision;
        }
        let mut v = 0;
        while c.is_multiple_of(self.p) {
            c /= self.p;
            v += 1;
        }
        v
    }

    pub fn is_unit(&self, a: &Elem) -> bool {
        self.ord(a) == 0
    }

    /// Exact inverse of a unit: residue inverse by Fermat, then Newton
    /// iteration `x ← x(2 − ax)` which doubles the correct precision.
    pub fn inv(&self, a: &Elem) -> Result<Elem> {
        let ord = self.ord(a);
        if ord > 0 {
            return Err(Error::NonUnitInverse { ord });
        }
        // The reduction of a^(q-2) is the residue inverse.
        let mut x = self.pow(a, self.q() - 2);
        let two = self.from_u64(2);
        let mut correct = 1u32;
        while correct < self.precision {
            let ax = self.mul(a, &x);
            x = self.mul(&x, &self.sub(&two, &ax));
            correct = correct.saturating_mul(2);
        }
        debug_assert!(self.is_one(&self.mul(a, &x)));
        Ok(x)
    }

    /// Divide by `π^m` (the valuation of `a` must be at least `m`). The top
    /// `m` digits of the result are unknown at this precision and set to 0.
    pub(crate) fn shift_down(&self, a: &Elem, m: u32) -> Elem {
        match self.kind {
            RingKind::EqualTruncated => {
                let m = m as usize;
                let w = self.width();
                Elem((0..w).map(|i| if i + m < w { a.0[i + m] } else { 0 }).collect())
            }
            _ => {
                let d = self.p.pow(m);
                Elem(a.0.iter().map(|&c| c / d).collect())
            }
        }
    }

    /// `a / d` where `ord(a) ≥ ord(d) = m < N`; correct modulo `M^{N-m}`.
    pub(crate) fn div_truncated(&self, a: &Elem, d: &Elem) -> Result<Elem> {
        let m = self.ord(d);
        if m >= self.precision {
            return Err(Error::NonUnitInverse { ord: m });
        }
        if self.ord(a) < m {
            return Err(Error::PreconditionFailed(format!(
                "dividend valuation {} below divisor valuation {m}",
                self.ord(a)
            )));
        }
        let unit = self.shift_down(d, m);
        Ok(self.mul(&self.shift_down(a, m), &self.inv(&unit)?))
    }

    /// Canonical map between two rings of the same family that differ only in
    /// precision: reduction when shrinking, the canonical section when growing.
    pub fn coerce_from(&self, source: &Ring, a: &Elem) -> Result<Elem> {
        let mismatch = || Error::RingMismatch {
            left: self.to_string(),
            right: source.to_string(),
        };
        if source.p != self.p
            || source.residue_degree != self.residue_degree
            || source.modulus != self.modulus
        {
            return Err(mismatch());
        }
        let w = self.width();
        match (source.is_galois(), self.is_galois()) {
            (true, true) => Ok(Elem(a.0.iter().map(|&c| c % self.coord_modulus).collect())),
            (false, false) => Ok(Elem(
                (0..w).map(|i| a.0.get(i).copied().unwrap_or(0)).collect(),
            )),
            // F_p[T]/T^N and F_p only meet through the residue field.
            (false, true) if self.is_field() => Ok(Elem(smallvec![a.0[0]])),
            (true, false) if source.is_field() => Ok(Elem(
                (0..w).map(|i| if i == 0 { a.0[0] } else { 0 }).collect(),
            )),
            _ => Err(mismatch()),
        }
    }

    /// Reduction modulo `M`.
    pub fn reduce(&self, a: &Elem) -> Elem {
        self.residue_field_of()
            .coerce_from(self, a)
            .expect("a ring and its residue field are compatible")
    }

    /// The canonical section `k → O/M^N`.
    pub fn lift(&self, a: &Elem) -> Elem {
        self.coerce_from(&self.residue_field_of(), a)
            .expect("a ring and its residue field are compatible")
    }

    /// Element with the given index in the canonical ordering.
    pub fn element_at(&self, mut index: u128) -> Elem {
        let m = self.coord_modulus as u128;
        Elem(
            (0..self.width())
                .map(|_| {
                    let d = (index % m) as u64;
                    index /= m;
                    d
                })
                .collect(),
        )
    }

    pub fn index_of(&self, a: &Elem) -> u128 {
        let m = self.coord_modulus as u128;
        a.0.iter().rev().fold(0u128, |acc, &c| acc * m + c as u128)
    }

    /// All elements in canonical order.
    pub fn elements(&self, budget: u64) -> Result<Vec<Elem>> {
        let total = self.cardinality().unwrap_or(u128::MAX);
        if total > budget as u128 {
            return Err(Error::BudgetExceeded {
                required: total,
                budget,
            });
        }
        Ok((0..total).map(|i| self.element_at(i)).collect())
    }

    /// The `q` residue-field elements in canonical order.
    pub fn residue_elements(&self) -> Vec<Elem> {
        let k = self.residue_field_of();
        (0..self.q() as u128).map(|i| k.element_at(i)).collect()
    }

    /// Lexicographic enumeration of `k^nvars`.
    pub fn enumerate_residue_points(&self, nvars: usize, budget: u64) -> Result<ResiduePoints> {
        ResiduePoints::new(self.residue_elements(), nvars, budget)
    }

    pub fn format_elem(&self, a: &Elem) -> String {
        if self.width() == 1 {
            return a.0[0].to_string();
        }
        let parts: Vec<String> = a
            .0
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| match (i, c) {
                (0, c) => c.to_string(),
                (1, 1) => "t".to_string(),
                (1, c) => format!("{c}*t"),
                (i, 1) => format!("t^{i}"),
                (i, c) => format!("{c}*t^{i}"),
            })
            .collect();
        match parts.len() {
            0 => "0".to_string(),
            1 => parts.into_iter().next().unwrap(),
            _ => format!("({})", parts.join(" + ")),
        }
    }

    pub fn format_point(&self, point: &[Elem]) -> String {
        let items: Vec<String> = point.iter().map(|a| self.format_elem(a)).collect();
        format!("({})", items.join(","))
    }
}

/// `build_unramified`: the unramified ring with residue field `F_{p^n}`.
pub fn build_unramified(p: u64, n: u32, precision: u32) -> Result<Ring> {
    Ring::unramified(p, n, precision)
}

/// Lexicographic odometer over `k^n`; the first coordinate is the most
/// significant.
#[derive(Debug, Clone)]
pub struct ResiduePoints {
    elems: Arc<[Elem]>,
    nvars: usize,
    next: u64,
    total: u64,
}

impl ResiduePoints {
    pub(crate) fn new(elems: Vec<Elem>, nvars: usize, budget: u64) -> Result<Self> {
        let q = elems.len() as u128;
        let total = q.checked_pow(nvars as u32).unwrap_or(u128::MAX);
        if total > budget as u128 {
            return Err(Error::BudgetExceeded {
                required: total,
                budget,
            });
        }
        Ok(ResiduePoints {
            elems: elems.into(),
            nvars,
            next: 0,
            total: total as u64,
        })
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Point with the given lexicographic index.
    pub fn point_at(&self, mut index: u64) -> Vec<Elem> {
        let q = self.elems.len() as u64;
        let mut point = vec![Elem(Coords::new()); self.nvars];
        for slot in point.iter_mut().rev() {
            *slot = self.elems[(index % q) as usize].clone();
            index /= q;
        }
        point
    }
}

impl Iterator for ResiduePoints {
    type Item = Vec<Elem>;

    fn next(&mut self) -> Option<Vec<Elem>> {
        if self.next >= self.total {
            return None;
        }
        let p = self.point_at(self.next);
        self.next += 1;
        Some(p)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let rest = (self.total - self.next) as usize;
        (rest, Some(rest))
    }
}

impl ExactSizeIterator for ResiduePoints {}

/// A ring element that remembers its ring, for arithmetic across API
/// boundaries where operands may come from different places.
#[derive(Clone, Debug)]
pub struct RingElement {
    ring: Ring,
    value: Elem,
    ord: u32,
}

impl PartialEq for RingElement {
    fn eq(&self, other: &Self) -> bool {
        self.ring == other.ring && self.value == other.value
    }
}

impl Eq for RingElement {}

impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.ring.format_elem(&self.value))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Inv,
}

impl RingElement {
    pub fn new(ring: &Ring, value: Elem) -> Self {
        let ord = ring.ord(&value);
        RingElement {
            ring: ring.clone(),
            value,
            ord,
        }
    }

    pub fn from_i64(ring: &Ring, k: i64) -> Self {
        Self::new(ring, ring.from_i64(k))
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn value(&self) -> &Elem {
        &self.value
    }

    pub fn into_value(self) -> Elem {
        self.value
    }

    pub fn ord(&self) -> u32 {
        self.ord
    }

    pub fn is_unit(&self) -> bool {
        self.ord == 0
    }

    pub fn is_zero(&self) -> bool {
        self.ord == self.ring.precision
    }

    fn binary(&self, other: &Self, f: impl Fn(&Ring, &Elem, &Elem) -> Elem) -> Result<Self> {
        self.ring.ensure_same(&other.ring)?;
        Ok(Self::new(&self.ring, f(&self.ring, &self.value, &other.value)))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.binary(other, Ring::add)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.binary(other, Ring::sub)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.binary(other, Ring::mul)
    }

    pub fn inv(&self) -> Result<Self> {
        Ok(Self::new(&self.ring, self.ring.inv(&self.value)?))
    }

    pub fn reduce_to_residue(&self) -> RingElement {
        RingElement::new(&self.ring.residue_field_of(), self.ring.reduce(&self.value))
    }

    /// Canonical lift of a residue-field element into `target`.
    pub fn lift_from_residue(&self, target: &Ring) -> Result<RingElement> {
        if self.ring.kind != RingKind::ResidueField {
            return Err(Error::WrongRingKind(format!(
                "lift expects a residue-field element, got {}",
                self.ring.kind
            )));
        }
        self.ring.ensure_same(&target.residue_field_of())?;
        Ok(RingElement::new(target, target.lift(&self.value)))
    }
}

/// `ring_arith`: one arithmetic operation on elements of a shared ring. For
/// `Inv` the second operand is ignored.
pub fn ring_arith(a: &RingElement, b: &RingElement, op: ArithOp) -> Result<RingElement> {
    match op {
        ArithOp::Add => a.add(b),
        ArithOp::Sub => a.sub(b),
        ArithOp::Mul => a.mul(b),
        ArithOp::Inv => {
            a.ring.ensure_same(&b.ring)?;
            a.inv()
        }
    }
}
