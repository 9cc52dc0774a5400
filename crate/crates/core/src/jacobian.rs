//! Jacobians, the Keller predicate and affine automorphisms of `O^n`.

use crate::error::{Error, Result};
use crate::linalg::{self, laplace_det, Matrix, PolyRing};
use crate::poly::{MultiPoly, PolyMap};
use crate::ring::{Elem, Ring};

/// Largest matrix handled by the symbolic determinant.
pub const DET_SIZE_GUARD: usize = 8;

/// Square matrix of polynomials sharing a ring and a variable count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMatrix {
    ring: Ring,
    nvars: usize,
    rows: Vec<Vec<MultiPoly>>,
}

impl PolyMatrix {
    pub fn new(rows: Vec<Vec<MultiPoly>>) -> Result<Self> {
        let n = rows.len();
        let first = rows
            .first()
            .and_then(|r| r.first())
            .ok_or_else(|| Error::InvalidInput("empty matrix".into()))?;
        let (ring, nvars) = (first.ring().clone(), first.nvars());
        for row in &rows {
            if row.len() != n {
                return Err(Error::ArityMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            for e in row {
                ring.ensure_same(e.ring())?;
                if e.nvars() != nvars {
                    return Err(Error::ArityMismatch {
                        expected: nvars,
                        found: e.nvars(),
                    });
                }
            }
        }
        Ok(PolyMatrix { ring, nvars, rows })
    }

    pub fn identity(ring: &Ring, n: usize, nvars: usize) -> Self {
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| MultiPoly::from_i64(ring, nvars, (i == j) as i64))
                    .collect()
            })
            .collect();
        PolyMatrix {
            ring: ring.clone(),
            nvars,
            rows,
        }
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn get(&self, i: usize, j: usize) -> &MultiPoly {
        &self.rows[i][j]
    }

    pub fn rows(&self) -> &[Vec<MultiPoly>] {
        &self.rows
    }

    pub fn mul(&self, other: &PolyMatrix) -> Result<PolyMatrix> {
        let n = self.size();
        if other.size() != n {
            return Err(Error::ArityMismatch {
                expected: n,
                found: other.size(),
            });
        }
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let mut row = Vec::with_capacity(n);
            for j in 0..n {
                let mut acc = MultiPoly::zero(&self.ring, self.nvars);
                for k in 0..n {
                    acc = acc.try_add(&self.rows[i][k].try_mul(&other.rows[k][j])?)?;
                }
                row.push(acc);
            }
            rows.push(row);
        }
        PolyMatrix::new(rows)
    }

    /// Substitute the map `g` into every entry.
    pub fn compose(&self, g: &PolyMap) -> Result<PolyMatrix> {
        let rows = self
            .rows
            .iter()
            .map(|row| row.iter().map(|e| e.compose(g)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        PolyMatrix::new(rows)
    }

    pub fn eval(&self, point: &[Elem]) -> Result<Matrix> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|e| e.eval(point)).collect())
            .collect()
    }

    pub fn det(&self) -> Result<MultiPoly> {
        det_poly_matrix(self)
    }
}

/// Entry `(i, j)` is `∂F_i/∂X_j`.
pub fn jacobian_matrix(f: &PolyMap) -> PolyMatrix {
    let n = f.dim();
    let rows = f
        .components()
        .iter()
        .map(|c| {
            (0..n)
                .map(|j| c.partial_derivative(j).expect("index below dim"))
                .collect()
        })
        .collect();
    PolyMatrix::new(rows).expect("jacobian of a square map is square")
}

pub fn det_poly_matrix(m: &PolyMatrix) -> Result<MultiPoly> {
    let n = m.size();
    if n > DET_SIZE_GUARD {
        return Err(Error::SizeGuardExceeded {
            n,
            max: DET_SIZE_GUARD,
        });
    }
    let pr = PolyRing {
        ring: m.ring.clone(),
        nvars: m.nvars,
    };
    Ok(laplace_det(&pr, n, |i, j| m.rows[i][j].clone()))
}

/// `det JF = 1` exactly at the working precision. Cached on the map.
pub fn is_keller(f: &PolyMap) -> Result<bool> {
    if let Some(&v) = f.keller_cell().get() {
        return Ok(v);
    }
    let d = det_poly_matrix(&jacobian_matrix(f))?;
    let verdict = d == MultiPoly::one(f.ring(), f.dim());
    let _ = f.keller_cell().set(verdict);
    Ok(verdict)
}

/// `F − F(a)`. The Jacobian is unchanged, so a cached verdict carries over.
pub fn translate_map(f: &PolyMap, a: &[Elem]) -> Result<PolyMap> {
    let values = f.eval(a)?;
    let comps = f
        .components()
        .iter()
        .zip(values)
        .map(|(c, v)| c - &MultiPoly::constant(f.ring(), f.dim(), v))
        .collect();
    Ok(PolyMap::new(comps)?.with_keller(f.keller_cell().get().copied()))
}

/// `X ↦ A·X + b` with `det A = 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineKellerAuto {
    ring: Ring,
    a: Matrix,
    b: Vec<Elem>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `G ∘ F`
    Left,
    /// `F ∘ G`
    Right,
}

impl AffineKellerAuto {
    pub fn new(ring: &Ring, a: Matrix, b: Vec<Elem>) -> Result<Self> {
        let n = a.len();
        if a.iter().any(|row| row.len() != n) || b.len() != n {
            return Err(Error::ArityMismatch {
                expected: n,
                found: b.len(),
            });
        }
        let d = linalg::det(ring, &a);
        if !ring.is_one(&d) {
            return Err(Error::Validation(format!(
                "affine part has determinant {}, expected 1",
                ring.format_elem(&d)
            )));
        }
        Ok(AffineKellerAuto {
            ring: ring.clone(),
            a,
            b,
        })
    }

    pub fn identity(ring: &Ring, n: usize) -> Self {
        AffineKellerAuto {
            ring: ring.clone(),
            a: linalg::identity(ring, n),
            b: vec![ring.zero(); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.a
    }

    pub fn translation(&self) -> &[Elem] {
        &self.b
    }

    pub fn apply(&self, x: &[Elem]) -> Vec<Elem> {
        linalg::mat_vec(&self.ring, &self.a, x)
            .iter()
            .zip(&self.b)
            .map(|(u, v)| self.ring.add(u, v))
            .collect()
    }

    pub fn as_map(&self) -> PolyMap {
        let n = self.dim();
        let r = &self.ring;
        let comps = (0..n)
            .map(|i| {
                let mut c = MultiPoly::constant(r, n, self.b[i].clone());
                for j in 0..n {
                    let x = MultiPoly::var(r, n, j).expect("index below dim");
                    c = &c + &x.scale(&self.a[i][j]);
                }
                c
            })
            .collect();
        PolyMap::new(comps)
            .expect("affine map is square")
            .with_keller(Some(true))
    }
}

/// `G ∘ F` for [`Side::Left`], `F ∘ G` for [`Side::Right`]. The Keller
/// verdict of `F` carries over.
pub fn apply_affine(g: &AffineKellerAuto, f: &PolyMap, side: Side) -> Result<PolyMap> {
    if g.dim() != f.dim() {
        return Err(Error::ArityMismatch {
            expected: f.dim(),
            found: g.dim(),
        });
    }
    g.ring.ensure_same(f.ring())?;
    let out = match side {
        Side::Left => g.as_map().compose(f)?,
        Side::Right => f.compose(&g.as_map())?,
    };
    Ok(out.with_keller(f.keller_cell().get().copied()))
}

/// `F^[[m]]`: `m` copies of `F` on disjoint blocks of variables.
pub fn repeat_map(f: &PolyMap, m: usize) -> Result<PolyMap> {
    if m == 0 {
        return Err(Error::InvalidInput("repetition count must be at least 1".into()));
    }
    let n = f.dim();
    let total = n * m;
    let mut comps = Vec::with_capacity(total);
    for t in 0..m {
        let mapping: Vec<usize> = (t * n..(t + 1) * n).collect();
        for c in f.components() {
            comps.push(c.rename_vars(total, &mapping)?);
        }
    }
    Ok(PolyMap::new(comps)?.with_keller(f.keller_cell().get().copied()))
}

/// Left-to-right strong composition `F_1 ∘ F_2 ∘ ⋯ ∘ F_k` (`F_k` applied
/// first).
pub fn compose_chain(maps: &[PolyMap]) -> Result<PolyMap> {
    let (last, rest) = maps
        .split_last()
        .ok_or_else(|| Error::InvalidInput("empty composition".into()))?;
    rest.iter()
        .rev()
        .try_fold(last.clone(), |acc, f| f.compose(&acc))
}
