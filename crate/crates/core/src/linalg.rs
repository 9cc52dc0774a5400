//! Determinants and small linear algebra over rings and over the integers.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::poly::MultiPoly;
use crate::ring::{Elem, Ring};

/// Arithmetic context for a determinant computation.
pub trait DetRing {
    type Elem: Clone;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
}

impl DetRing for Ring {
    type Elem = Elem;

    fn zero(&self) -> Elem {
        Ring::zero(self)
    }
    fn one(&self) -> Elem {
        Ring::one(self)
    }
    fn is_zero(&self, a: &Elem) -> bool {
        Ring::is_zero(self, a)
    }
    fn add(&self, a: &Elem, b: &Elem) -> Elem {
        Ring::add(self, a, b)
    }
    fn sub(&self, a: &Elem, b: &Elem) -> Elem {
        Ring::sub(self, a, b)
    }
    fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        Ring::mul(self, a, b)
    }
}

/// Polynomials over a ring in a fixed number of variables.
#[derive(Clone, Debug)]
pub struct PolyRing {
    pub ring: Ring,
    pub nvars: usize,
}

impl DetRing for PolyRing {
    type Elem = MultiPoly;

    fn zero(&self) -> MultiPoly {
        MultiPoly::zero(&self.ring, self.nvars)
    }
    fn one(&self) -> MultiPoly {
        MultiPoly::one(&self.ring, self.nvars)
    }
    fn is_zero(&self, a: &MultiPoly) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
        a + b
    }
    fn sub(&self, a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
        a - b
    }
    fn mul(&self, a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
        a * b
    }
}

/// Cofactor expansion along rows, memoised on the set of used columns.
/// Division-free, so valid over any commutative ring.
pub fn laplace_det<R: DetRing>(ring: &R, n: usize, entry: impl Fn(usize, usize) -> R::Elem) -> R::Elem {
    assert!(n < 32, "column masks are 32 bits wide");
    let entries: Vec<Vec<R::Elem>> = (0..n).map(|i| (0..n).map(|j| entry(i, j)).collect()).collect();
    let mut memo: HashMap<u32, R::Elem> = HashMap::new();
    minor(ring, &entries, 0, &mut memo)
}

fn minor<R: DetRing>(
    ring: &R,
    m: &[Vec<R::Elem>],
    used: u32,
    memo: &mut HashMap<u32, R::Elem>,
) -> R::Elem {
    let n = m.len();
    let row = used.count_ones() as usize;
    if row == n {
        return ring.one();
    }
    if let Some(v) = memo.get(&used) {
        return v.clone();
    }
    let mut acc = ring.zero();
    let mut free_before = 0;
    for j in 0..n {
        if used & (1 << j) != 0 {
            continue;
        }
        let a = &m[row][j];
        if !ring.is_zero(a) {
            let sub = minor(ring, m, used | (1 << j), memo);
            let t = ring.mul(a, &sub);
            acc = if free_before % 2 == 0 {
                ring.add(&acc, &t)
            } else {
                ring.sub(&acc, &t)
            };
        }
        free_before += 1;
    }
    memo.insert(used, acc.clone());
    acc
}

/// Square matrices of ring elements, row-major.
pub type Matrix = Vec<Vec<Elem>>;

pub fn identity(ring: &Ring, n: usize) -> Matrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { ring.one() } else { ring.zero() }).collect())
        .collect()
}

pub fn det(ring: &Ring, m: &Matrix) -> Elem {
    laplace_det(ring, m.len(), |i, j| m[i][j].clone())
}

pub fn mat_mul(ring: &Ring, a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let k = b.first().map_or(0, Vec::len);
    (0..n)
        .map(|i| {
            (0..k)
                .map(|j| {
                    a[i].iter()
                        .zip(b)
                        .fold(ring.zero(), |acc, (x, row)| ring.add(&acc, &ring.mul(x, &row[j])))
                })
                .collect()
        })
        .collect()
}

pub fn mat_vec(ring: &Ring, a: &Matrix, v: &[Elem]) -> Vec<Elem> {
    a.iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .fold(ring.zero(), |acc, (x, y)| ring.add(&acc, &ring.mul(x, y)))
        })
        .collect()
}

/// Inverse by Gauss-Jordan elimination with unit pivots. Over a local ring
/// a matrix is invertible iff every column has a unit pivot candidate.
pub fn inverse(ring: &Ring, m: &Matrix) -> Result<Matrix> {
    let n = m.len();
    let mut a: Vec<Vec<Elem>> = m
        .iter()
        .zip(identity(ring, n))
        .map(|(row, id)| row.iter().cloned().chain(id).collect())
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .find(|&r| ring.is_unit(&a[r][col]))
            .ok_or(Error::NonUnitInverse {
                ord: ring.ord(&a[col][col]),
            })?;
        a.swap(col, piv);
        let inv = ring.inv(&a[col][col])?;
        for x in a[col].iter_mut() {
            *x = ring.mul(x, &inv);
        }
        for r in 0..n {
            if r == col || ring.is_zero(&a[r][col]) {
                continue;
            }
            let f = a[r][col].clone();
            for c in 0..2 * n {
                let t = ring.mul(&f, &a[col][c]);
                a[r][c] = ring.sub(&a[r][c], &t);
            }
        }
    }
    Ok(a.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Integer determinant by Bareiss fraction-free elimination.
pub fn bareiss_det(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: Vec<Vec<BigInt>> = m.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

/// A nonzero integer vector `u` with `m·u = 0`, primitive (content 1), or
/// `None` when the kernel is trivial.
///
/// The matrix is brought to row-echelon form with fraction-free integer row
/// operations; back substitution for the first free column runs over the
/// rationals and the result is cleared of denominators.
pub fn integer_kernel_vector(m: &[Vec<BigInt>]) -> Option<Vec<BigInt>> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut a: Vec<Vec<BigInt>> = m.to_vec();
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        for i in r + 1..rows {
            if a[i][c].is_zero() {
                continue;
            }
            let (top, lead) = (a[r][c].clone(), a[i][c].clone());
            for j in 0..cols {
                a[i][j] = &a[i][j] * &top - &a[r][j] * &lead;
            }
            normalize_row(&mut a[i]);
        }
        pivots.push(c);
        r += 1;
    }
    let free = (0..cols).find(|c| !pivots.contains(c))?;
    let mut u: Vec<BigRational> = vec![BigRational::zero(); cols];
    u[free] = BigRational::one();
    for (row, &pc) in pivots.iter().enumerate().rev() {
        let mut s = BigRational::zero();
        for j in pc + 1..cols {
            if !a[row][j].is_zero() {
                s += BigRational::from_integer(a[row][j].clone()) * &u[j];
            }
        }
        u[pc] = -s / BigRational::from_integer(a[row][pc].clone());
    }
    let lcm = u
        .iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = u
        .iter()
        .map(|x| x.numer() * (&lcm / x.denom()))
        .collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    Some(ints.into_iter().map(|x| x / &g).collect())
}

fn normalize_row(row: &mut [BigInt]) {
    let g = row.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if !g.is_zero() && !g.is_one() {
        for x in row.iter_mut() {
            *x = &*x / &g;
        }
    }
}
