//! Schouten tensor of `g = w⁻²|dx|²` and the conformal mean-curvature law.
//!
//! Sign convention for hypersurfaces: a sphere of radius `R` with outward
//! normal has second fundamental form `−(1/R)·g` and mean curvature
//! `H = −(n−1)/R`. Every module in this crate uses the same convention.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::symmetric::Lambda;

/// Value, gradient and Hessian of `w` at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformalJet {
    pub w: f64,
    pub grad: Vec<f64>,
    pub hess: SymMatrix,
}

impl ConformalJet {
    pub fn new(w: f64, grad: Vec<f64>, hess: SymMatrix) -> Result<Self> {
        let jet = ConformalJet { w, grad, hess };
        jet.validate()?;
        Ok(jet)
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.w > 0.0) || !self.w.is_finite() {
            return Err(Error::Domain(format!("conformal factor must be positive, got {}", self.w)));
        }
        if self.hess.dim() != self.grad.len() {
            return Err(Error::Domain(format!(
                "gradient has {} entries but Hessian is {}x{}",
                self.grad.len(),
                self.hess.dim(),
                self.hess.dim()
            )));
        }
        if self.grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Domain("non-finite gradient".into()));
        }
        Ok(())
    }

    /// Jet of the radial function `w(|x|)` at `(0, …, 0, r)`.
    pub fn radial(w: f64, wp: f64, wpp: f64, r: f64, n: usize) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("radius must be positive, got {r}")));
        }
        let mut grad = vec![0.0; n];
        grad[n - 1] = wp;
        let mut diag = vec![wp / r; n];
        diag[n - 1] = wpp;
        ConformalJet::new(w, grad, SymMatrix::diagonal(&diag))
    }

    /// Jet of `x ↦ s·w(x/s)` at the dilated point.
    pub fn dilate(&self, s: f64) -> Self {
        ConformalJet {
            w: s * self.w,
            grad: self.grad.clone(),
            hess: self.hess.scale(1.0 / s),
        }
    }
}

/// `A_w = w∇²w − ½|∇w|² I`.
pub fn schouten(jet: &ConformalJet) -> Result<SymMatrix> {
    jet.validate()?;
    let g2 = DVector::from_row_slice(&jet.grad).norm_squared();
    let n = jet.dim();
    Ok(jet.hess.scale(jet.w).sub(&SymMatrix::scalar(n, 0.5 * g2)))
}

/// Eigenvalues of `−A_w`, ascending.
pub fn negative_schouten_eigenvalues(jet: &ConformalJet) -> Result<Lambda> {
    let a = schouten(jet)?;
    Lambda::new(a.scale(-1.0).eigenvalues()?)
}

/// Mean curvature of a hypersurface with respect to `w⁻²|dx|²` and the
/// normal `ν`: `w·H_Σ + (n−1)·∂_ν w`, where `H_Σ` is the Euclidean mean
/// curvature with respect to the same normal.
pub fn mean_curvature_conformal(w0: f64, dnu_w: f64, h_sigma: f64, n: usize) -> Result<f64> {
    if !(w0 > 0.0) {
        return Err(Error::Domain(format!("trace w0 must be positive, got {w0}")));
    }
    Ok(w0 * h_sigma + (n as f64 - 1.0) * dnu_w)
}
