//! Pointwise checks on a singular hypersurface `Σ`.
//!
//! At a point of `Σ` the one-sided normal derivatives `α = ∂_ν w^±` make the
//! tangential tensor
//!
//! ```text
//! T_α = −w₀(∇²_Σ w₀ − α·II_Σ) + ½(|∇_Σ w₀|² + α²)·g_Σ
//! ```
//!
//! lie on `∂Γ_{k−1}^+`. `α ↦ σ_{k−1}(λ(g_Σ⁻¹T_α))` is a polynomial of degree
//! `2k − 2`; its two extreme admissible real roots are the candidates for
//! `∂_ν w⁺ < ∂_ν w⁻`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::poly::{chebyshev_nodes, cluster_real_roots, companion_roots, interpolate_chebyshev, RealRoot};
use crate::radial::RadialSolution;
use crate::symmetric::{binomial, sigma_all, Lambda, MAX_DIM};

/// Tolerance for `σ_j ≥ −tol` when admitting a root, before scaling.
pub const ROOT_CONE_TOL: f64 = 1e-8;

/// Geometry of `Σ` and the trace of `w` at one point, in a tangent frame.
///
/// `second_fund` follows the crate convention: a sphere of radius `R` with
/// outward normal has `II = −(1/R)·g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfacePointData {
    pub n: usize,
    pub w0: f64,
    pub grad_w0: Vec<f64>,
    pub hess_w0: SymMatrix,
    pub second_fund: SymMatrix,
    pub metric: SymMatrix,
    #[serde(rename = "H_sigma")]
    pub h_sigma: f64,
}

impl SurfacePointData {
    pub fn validate(&self) -> Result<()> {
        if self.n < 3 || self.n > MAX_DIM {
            return Err(Error::Configuration(format!("dimension n={} outside 3..=32", self.n)));
        }
        if !(self.w0 > 0.0 && self.w0.is_finite()) {
            return Err(Error::InvariantViolated {
                name: "w0_positive",
                detail: format!("w0 = {}", self.w0),
            });
        }
        let m = self.n - 1;
        if self.grad_w0.len() != m
            || self.hess_w0.dim() != m
            || self.second_fund.dim() != m
            || self.metric.dim() != m
        {
            return Err(Error::Configuration(format!(
                "tangential data must have dimension n-1 = {m}"
            )));
        }
        if !self.metric.is_positive_definite() {
            return Err(Error::InvariantViolated {
                name: "metric_positive_definite",
                detail: "metric has no Cholesky factor".into(),
            });
        }
        let trace = self.metric.inverse()?.as_matrix().component_mul(self.second_fund.as_matrix()).sum();
        if (trace - self.h_sigma).abs() > 1e-12 * self.h_sigma.abs().max(1.0) {
            return Err(Error::InvariantViolated {
                name: "mean_curvature_trace",
                detail: format!("H_sigma = {} but trace(g⁻¹II) = {trace}", self.h_sigma),
            });
        }
        Ok(())
    }

    /// Round sphere of radius `r` (outward normal) with constant trace `w0`.
    pub fn sphere(n: usize, r: f64, w0: f64) -> Result<Self> {
        let m = n.checked_sub(1).ok_or_else(|| Error::Configuration("n must be positive".into()))?;
        let data = SurfacePointData {
            n,
            w0,
            grad_w0: vec![0.0; m],
            hess_w0: SymMatrix::zeros(m),
            second_fund: SymMatrix::scalar(m, -1.0 / r),
            metric: SymMatrix::identity(m),
            h_sigma: -(m as f64) / r,
        };
        data.validate()?;
        Ok(data)
    }

    /// Point data on the junction sphere of an annulus solution.
    pub fn from_junction(sol: &RadialSolution) -> Result<Self> {
        let j = sol.junction.as_ref().ok_or_else(|| {
            Error::Configuration("no junction: the k = 1 solution is smooth".into())
        })?;
        Self::sphere(sol.problem.n, j.r_star, j.w0)
    }

    /// `|∇_Σ w₀|²` measured with `g_Σ`.
    pub fn grad_norm_sq(&self) -> Result<f64> {
        let ginv = self.metric.inverse()?;
        let m = self.grad_w0.len();
        let mut acc = 0.0;
        for i in 0..m {
            for j in 0..m {
                acc += ginv.get(i, j) * self.grad_w0[i] * self.grad_w0[j];
            }
        }
        Ok(acc)
    }

    /// `Δ_Σ w₀ = tr(g⁻¹∇²w₀)`.
    pub fn laplacian_w0(&self) -> Result<f64> {
        Ok(self.metric.inverse()?.as_matrix().component_mul(self.hess_w0.as_matrix()).sum())
    }

    /// Same point expressed in the frame `e'_i = Σ_j q_{ji} e_j`.
    pub fn change_frame(&self, q: &nalgebra::DMatrix<f64>) -> Self {
        let grad = q.transpose() * nalgebra::DVector::from_row_slice(&self.grad_w0);
        SurfacePointData {
            n: self.n,
            w0: self.w0,
            grad_w0: grad.iter().copied().collect(),
            hess_w0: self.hess_w0.congruence(q),
            second_fund: self.second_fund.congruence(q),
            metric: self.metric.congruence(q),
            h_sigma: self.h_sigma,
        }
    }
}

pub fn t_alpha(data: &SurfacePointData, alpha: f64) -> Result<SymMatrix> {
    let g2 = data.grad_norm_sq()?;
    let inner = data.hess_w0.sub(&data.second_fund.scale(alpha));
    Ok(inner
        .scale(-data.w0)
        .add(&data.metric.scale(0.5 * (g2 + alpha * alpha))))
}

/// `λ(g_Σ⁻¹T_α)`, ascending.
pub fn t_alpha_eigenvalues(data: &SurfacePointData, alpha: f64) -> Result<Lambda> {
    Lambda::new(t_alpha(data, alpha)?.generalized_eigenvalues(&data.metric)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremAResidual {
    pub alpha: f64,
    /// `σ_{k−1}(λ(g_Σ⁻¹T_α))`.
    pub residual: f64,
    /// `σ_j ≥ −tol` for every `j ≤ k − 1`.
    pub cone_ok: bool,
    pub eigenvalues: Vec<f64>,
}

fn check_k(data: &SurfacePointData, k: usize) -> Result<()> {
    if k < 2 || k > data.n {
        return Err(Error::Configuration(format!("k={k} outside 2..=n={}", data.n)));
    }
    Ok(())
}

/// Natural size of the admissible `α` range, used to scale tolerances.
fn alpha_scale(data: &SurfacePointData) -> Result<f64> {
    let spectral = |m: &SymMatrix| -> Result<f64> {
        Ok(m.generalized_eigenvalues(&data.metric)?
            .iter()
            .fold(0.0f64, |a, v| a.max(v.abs())))
    };
    let kappa = spectral(&data.second_fund)?;
    let hess = spectral(&data.hess_w0)?;
    let l = 2.0 * data.w0 * kappa + (2.0 * data.w0 * hess + data.grad_norm_sq()?).sqrt();
    Ok(if l > 0.0 && l.is_finite() { l } else { 1.0 })
}

fn residual_with_scale(data: &SurfacePointData, alpha: f64, k: usize, scale: f64) -> Result<TheoremAResidual> {
    let lambda = t_alpha_eigenvalues(data, alpha)?;
    let sig = sigma_all(lambda.values(), k - 1);
    let unit = (scale * scale).max(1.0);
    let cone_ok = (1..k).all(|j| sig[j] >= -ROOT_CONE_TOL * unit.powi(j as i32));
    Ok(TheoremAResidual {
        alpha,
        residual: sig[k - 1],
        cone_ok,
        eigenvalues: lambda.into_vec(),
    })
}

pub fn theorem_a_residual(data: &SurfacePointData, alpha: f64, k: usize) -> Result<TheoremAResidual> {
    data.validate()?;
    check_k(data, k)?;
    residual_with_scale(data, alpha, k, alpha_scale(data)?)
}

/// `(n−1)/2·α² + w₀H_Σ·α − w₀Δ_Σw₀ + (n−1)/2·|∇_Σw₀|²`, the `k = 2` residual
/// in closed form.
pub fn quadratic_residual_k2(data: &SurfacePointData, alpha: f64) -> Result<f64> {
    let m = (data.n - 1) as f64;
    Ok(0.5 * m * alpha * alpha + data.w0 * data.h_sigma * alpha - data.w0 * data.laplacian_w0()?
        + 0.5 * m * data.grad_norm_sq()?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootPair {
    /// Smaller admissible root, the candidate for `∂_ν w⁺`.
    pub alpha_plus: f64,
    /// Larger admissible root, the candidate for `∂_ν w⁻`.
    pub alpha_minus: f64,
    /// Admissible real roots with multiplicities, ascending.
    pub all_roots: Vec<RealRoot>,
    /// Only one distinct admissible root: no jump in the normal derivative.
    pub degenerate: bool,
}

/// Real admissible roots of `α ↦ σ_{k−1}(λ(g_Σ⁻¹T_α))`.
pub fn singular_alpha_roots(data: &SurfacePointData, k: usize) -> Result<RootPair> {
    data.validate()?;
    check_k(data, k)?;
    let degree = 2 * k - 2;
    let scale = alpha_scale(data)?;
    // Sample on a window comfortably containing every real root.
    let half = 2.0 * scale;
    let nodes = chebyshev_nodes(degree + 1);
    let values = nodes
        .iter()
        .map(|&t| residual_with_scale(data, half * t, k, scale).map(|r| r.residual))
        .collect::<Result<Vec<_>>>()?;
    let coeffs = interpolate_chebyshev(&values);

    // Leading coefficient: T_α ~ ½α²g, so σ_{k−1} ~ C(n−1,k−1)·(α²/2)^{k−1}.
    let expected = binomial(data.n - 1, k - 1) * 0.5f64.powi(k as i32 - 1) * half.powi(degree as i32);
    let lead = coeffs[degree];
    if (lead / expected - 1.0).abs() > 1e-6 {
        return Err(Error::Computation(format!(
            "interpolated leading coefficient {lead:e} differs from {expected:e}"
        )));
    }

    let raw = companion_roots(&coeffs)?;
    let radius = (1e-7f64).max(10.0 * 1e-15f64.powf(1.0 / degree as f64)).min(1e-3);
    let admissible: Vec<RealRoot> = cluster_real_roots(&raw, radius)
        .into_iter()
        .map(|r| RealRoot {
            value: r.value * half,
            multiplicity: r.multiplicity,
        })
        .filter(|r| {
            residual_with_scale(data, r.value, k, scale)
                .map(|res| res.cone_ok)
                .unwrap_or(false)
        })
        .collect();
    let (first, last) = match (admissible.first(), admissible.last()) {
        (Some(f), Some(l)) => (*f, *l),
        _ => {
            return Err(Error::Inconsistency(
                "no real admissible root: the data cannot come from a singular hypersurface".into(),
            ))
        }
    };
    Ok(RootPair {
        alpha_plus: first.value,
        alpha_minus: last.value,
        degenerate: admissible.len() == 1,
        all_roots: admissible,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimalityCheck {
    /// `w₀H_Σ + (n−1)·α₊`, mean curvature from the `+` side; must be negative.
    pub h_plus: f64,
    /// `w₀H_Σ + (n−1)·α₋`; positive means negative mean curvature from the
    /// `−` side with respect to `−ν`.
    pub h_minus_reversed: f64,
    pub minimal: bool,
}

/// Sign test for `Σ` to be a barrier from both sides (`k = 2`).
pub fn minimality_check_k2(data: &SurfacePointData, roots: &RootPair) -> Result<MinimalityCheck> {
    let m = (data.n - 1) as f64;
    let h_plus = data.w0 * data.h_sigma + m * roots.alpha_plus;
    let h_minus_reversed = data.w0 * data.h_sigma + m * roots.alpha_minus;
    Ok(MinimalityCheck {
        h_plus,
        h_minus_reversed,
        minimal: !roots.degenerate && h_plus < 0.0 && h_minus_reversed > 0.0,
    })
}
