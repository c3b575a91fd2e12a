//! Lattices of full rank given by an ordered basis.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::intmat::IntMatrix;

/// Relative determinant threshold below which a basis counts as singular.
const SINGULAR_RTOL: f64 = 1e-13;

/// A rank-n lattice in R^n; the basis vectors are the matrix columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    basis: DMatrix<f64>,
}

/// Result of a lattice basis reduction: `reduced = original · transform`,
/// and integer shift vectors convert with `inverse_transform`.
#[derive(Debug, Clone)]
pub struct Reduction {
    pub lattice: Lattice,
    pub transform: IntMatrix,
    pub inverse_transform: IntMatrix,
}

impl Lattice {
    pub fn new(basis: DMatrix<f64>) -> Result<Self> {
        if basis.nrows() != basis.ncols() {
            return Err(Error::DimensionMismatch { expected: basis.nrows(), found: basis.ncols() });
        }
        if basis.nrows() < 1 || basis.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularBasis);
        }
        let lat = Lattice { basis };
        if lat.is_singular() {
            return Err(Error::SingularBasis);
        }
        Ok(lat)
    }

    /// Builds a lattice from its generators g_1, ..., g_n.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let n = columns.len();
        for c in columns {
            if c.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: c.len() });
            }
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| columns[j][i]))
    }

    pub fn identity(n: usize) -> Self {
        Lattice { basis: DMatrix::identity(n, n) }
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn generator(&self, i: usize) -> DVector<f64> {
        self.basis.column(i).into_owned()
    }

    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.dim()).map(|j| self.basis.column(j).iter().copied().collect()).collect()
    }

    /// The lattice vector B·z for an integer coefficient vector z.
    pub fn vector(&self, shift: &[i64]) -> DVector<f64> {
        let mut v = DVector::zeros(self.dim());
        for (j, &z) in shift.iter().enumerate() {
            if z != 0 {
                v.axpy(z as f64, &self.basis.column(j), 1.0);
            }
        }
        v
    }

    pub fn determinant(&self) -> f64 {
        self.basis.determinant()
    }

    fn is_singular(&self) -> bool {
        let det = self.determinant();
        let scale: f64 = (0..self.dim()).map(|j| self.basis.column(j).norm()).product();
        !(det.abs() > SINGULAR_RTOL * scale)
    }

    /// Covolume |det B|.
    pub fn volume(&self) -> Result<f64> {
        if self.is_singular() {
            return Err(Error::SingularBasis);
        }
        Ok(self.determinant().abs())
    }

    pub fn gram(&self) -> DMatrix<f64> {
        self.basis.transpose() * &self.basis
    }

    pub fn scaled(&self, c: f64) -> Lattice {
        Lattice { basis: &self.basis * c }
    }

    /// Ratio of extreme singular values of the basis.
    pub fn condition_number(&self) -> f64 {
        let sv = self.basis.clone().singular_values();
        let max = sv.max();
        let min = sv.min();
        if min <= 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }

    /// Greedy pairwise size reduction: repeatedly shortens a basis vector by
    /// an integer multiple of another and keeps the columns sorted by norm.
    /// For n = 2 this is Lagrange-Gauss reduction.
    pub fn reduce(&self) -> Reduction {
        let cols: Vec<usize> = (0..self.dim()).collect();
        self.reduce_columns(&cols)
    }

    /// Lagrange-Gauss reduction restricted to the two given generators,
    /// which afterwards enclose an angle in [60°, 90°].
    pub fn reduce_pair(&self, a: usize, b: usize) -> Reduction {
        let mut red = self.reduce_columns(&[a, b]);
        let ga = red.lattice.basis.column(a).into_owned();
        let gb = red.lattice.basis.column(b).into_owned();
        if ga.dot(&gb) < 0.0 {
            negate_column(&mut red, b);
        }
        red
    }

    fn reduce_columns(&self, cols: &[usize]) -> Reduction {
        let n = self.dim();
        let mut red = Reduction {
            lattice: self.clone(),
            transform: identity_int(n),
            inverse_transform: identity_int(n),
        };
        let norm2 = |r: &Reduction, j: usize| r.lattice.basis.column(j).norm_squared();
        for _sweep in 0..200 {
            let mut changed = false;
            // Keep the selected columns sorted by increasing norm.
            for x in 0..cols.len() {
                for y in x + 1..cols.len() {
                    let (i, j) = (cols[x], cols[y]);
                    if norm2(&red, j) < norm2(&red, i) * (1.0 - 1e-12) {
                        swap_columns(&mut red, i, j);
                        changed = true;
                    }
                }
            }
            for &i in cols {
                for &j in cols {
                    if i == j {
                        continue;
                    }
                    let bj2 = norm2(&red, j);
                    let mu = red.lattice.basis.column(i).dot(&red.lattice.basis.column(j)) / bj2;
                    let m = mu.round();
                    if m != 0.0 {
                        let before = norm2(&red, i);
                        let candidate = red.lattice.basis.column(i) - red.lattice.basis.column(j) * m;
                        if candidate.norm_squared() < before * (1.0 - 1e-12) {
                            subtract_column(&mut red, i, j, m as i64);
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        red
    }
}

fn identity_int(n: usize) -> IntMatrix {
    (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect()
}

/// b_i <- b_i - m b_j.
fn subtract_column(r: &mut Reduction, i: usize, j: usize, m: i64) {
    let bj = r.lattice.basis.column(j).into_owned();
    let mut bi = r.lattice.basis.column_mut(i);
    bi.axpy(-(m as f64), &bj, 1.0);
    for row in r.transform.iter_mut() {
        row[i] -= m * row[j];
    }
    // Inverse transform: row j += m * row i.
    let row_i = r.inverse_transform[i].clone();
    for (dst, src) in r.inverse_transform[j].iter_mut().zip(row_i) {
        *dst += m * src;
    }
}

fn swap_columns(r: &mut Reduction, i: usize, j: usize) {
    r.lattice.basis.swap_columns(i, j);
    for row in r.transform.iter_mut() {
        row.swap(i, j);
    }
    r.inverse_transform.swap(i, j);
}

fn negate_column(r: &mut Reduction, i: usize) {
    let mut c = r.lattice.basis.column_mut(i);
    c.neg_mut();
    for row in r.transform.iter_mut() {
        row[i] = -row[i];
    }
    for v in r.inverse_transform[i].iter_mut() {
        *v = -*v;
    }
}

/// Applies an integer matrix to an integer vector.
pub fn apply_int(m: &IntMatrix, v: &[i64]) -> Vec<i64> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}
