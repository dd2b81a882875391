//! Dense symmetric matrices and the eigenvalue routines built on them.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A dense real symmetric matrix.
///
/// Construction mirrors the upper triangle onto the lower one, so the
/// stored matrix is exactly symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        SymMatrix(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        SymMatrix(DMatrix::identity(dim, dim))
    }

    pub fn scalar(dim: usize, value: f64) -> Self {
        SymMatrix(DMatrix::identity(dim, dim) * value)
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        SymMatrix(DMatrix::from_diagonal(&DVector::from_row_slice(diag)))
    }

    /// Builds from any square matrix, keeping the upper triangle.
    pub fn from_upper(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Domain(format!(
                "matrix is {}x{}, expected square",
                m.nrows(),
                m.ncols()
            )));
        }
        let mut m = m;
        let n = m.nrows();
        for i in 0..n {
            for j in 0..i {
                m[(i, j)] = m[(j, i)];
            }
        }
        Ok(SymMatrix(m))
    }

    /// Builds from a square matrix and rejects visible asymmetry.
    pub fn from_matrix(m: DMatrix<f64>, tol: f64) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Domain(format!(
                "matrix is {}x{}, expected square",
                m.nrows(),
                m.ncols()
            )));
        }
        let n = m.nrows();
        let scale = m.amax().max(1.0);
        for i in 0..n {
            for j in 0..i {
                if (m[(i, j)] - m[(j, i)]).abs() > tol * scale {
                    return Err(Error::Domain(format!(
                        "matrix not symmetric at ({i},{j}): {} vs {}",
                        m[(i, j)],
                        m[(j, i)]
                    )));
                }
            }
        }
        Self::from_upper(m)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Domain("matrix rows must form a square array".into()));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Domain("matrix has non-finite entries".into()));
        }
        let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        Self::from_matrix(m, 1e-12)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.0[(i, j)]).collect())
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.0.norm_squared()
    }

    pub fn scale(&self, s: f64) -> SymMatrix {
        SymMatrix(&self.0 * s)
    }

    pub fn add(&self, other: &SymMatrix) -> SymMatrix {
        SymMatrix(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &SymMatrix) -> SymMatrix {
        SymMatrix(&self.0 - &other.0)
    }

    /// `Qᵀ M Q` for an orthogonal (or any) `Q`.
    pub fn congruence(&self, q: &DMatrix<f64>) -> SymMatrix {
        let m = q.transpose() * &self.0 * q;
        SymMatrix::from_upper(m).expect("congruence of a square matrix is square")
    }

    /// Eigenvalues sorted ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        if self.0.iter().any(|v| !v.is_finite()) {
            return Err(Error::Computation("eigenproblem with non-finite entries".into()));
        }
        let eig = SymmetricEigen::try_new(self.0.clone(), f64::EPSILON, 10_000)
            .ok_or_else(|| Error::Computation("symmetric eigensolver did not converge".into()))?;
        let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        Ok(v)
    }

    /// Eigenvalues of `B⁻¹ A` for symmetric `A` (self) and SPD `B`,
    /// via the Cholesky factor `B = L Lᵀ` and `L⁻¹ A L⁻ᵀ`.
    pub fn generalized_eigenvalues(&self, metric: &SymMatrix) -> Result<Vec<f64>> {
        if metric.dim() != self.dim() {
            return Err(Error::Domain("metric and tensor dimensions differ".into()));
        }
        let chol = metric
            .0
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Domain("metric is not positive definite".into()))?;
        let l = chol.l();
        let linv = l
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Computation("singular Cholesky factor".into()))?;
        let reduced = &linv * &self.0 * linv.transpose();
        SymMatrix::from_upper(reduced)?.eigenvalues()
    }

    pub fn is_positive_definite(&self) -> bool {
        self.0.clone().cholesky().is_some()
    }

    pub fn inverse(&self) -> Result<SymMatrix> {
        let inv = self
            .0
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Domain("matrix is singular".into()))?;
        SymMatrix::from_upper(inv)
    }
}

impl Serialize for SymMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SymMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        SymMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// Orthogonal factor of the QR decomposition of a matrix filled row-major
/// from `entries` (cycled). Used for frame changes.
pub fn orthogonal_from(entries: &[f64], dim: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(dim, dim, |i, j| entries[(i * dim + j) % entries.len()]);
    let qr = a.qr();
    qr.q()
}
