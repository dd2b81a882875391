//! First correction to a singular solution near `Σ` for `k = 2`.
//!
//! On the `+` side the ansatz is `w̄ = w̃₀(π(x)) + w₁(π(x))·d(x) + w_*·d(x)^p`
//! with `d` the distance to `Σ` and `π` the closest-point projection.
//! Matching the bounded part of `σ₂(λ(−A_w̄))` as `d → 0` fixes `p = 3/2` and
//!
//! ```text
//! w_*² = (1 + ½w̃₀²(|X̊|² + 2|∇_T w₁|²)) / (−(9/8)·w̃₀·(w̃₀H_Σ + (n−1)·w₁)),
//! X = ∇²_T w̃₀ − w₁·II_Σ,  X̊ its trace-free part,
//! ```
//!
//! with `w_* < 0`. [`verify_limit`] checks this independently by finite
//! differences of `w̄` in the ambient space.
//!
//! Coordinates: `Σ` passes through the origin with normal `ν = e_n`, and is
//! the graph `x_n = φ(y)` over the first `n − 1` coordinates with `∇φ(0) = 0`,
//! so `II_Σ = ∇²φ(0)` in the crate's sign convention. `w̃₀` is the quadratic
//! `w0 + ∇w̃₀·y + ½yᵀ∇²w̃₀y` and `w₁` the affine `w1 + ∇w₁·y` in those
//! coordinates, evaluated at `y = π(x)`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conformal::{negative_schouten_eigenvalues, ConformalJet};
use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::radial::RadialSolution;
use crate::singular::{quadratic_residual_k2, SurfacePointData};
use crate::symmetric::{classify_cone, sigma_all, ConeLabel, DEFAULT_CONE_TOL};

/// Tolerance on the leading-order balance `σ₁(T_{w₁}) = 0`.
pub const BALANCE_TOL: f64 = 1e-8;

/// Analytic hypersurfaces through the origin with normal `e_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Surface {
    Hyperplane,
    /// Sphere with centre `(0, …, 0, −radius)`; a negative radius puts the
    /// centre on the `+` side.
    Sphere { radius: f64 },
    /// `x_n = ½yᵀQy`.
    Graph { hessian: SymMatrix },
}

impl Surface {
    pub fn second_fund(&self, m: usize) -> SymMatrix {
        match self {
            Surface::Hyperplane => SymMatrix::zeros(m),
            Surface::Sphere { radius } => SymMatrix::scalar(m, -1.0 / radius),
            Surface::Graph { hessian } => hessian.clone(),
        }
    }

    /// Largest principal curvature in absolute value.
    fn max_curvature(&self) -> Result<f64> {
        Ok(match self {
            Surface::Hyperplane => 0.0,
            Surface::Sphere { radius } => 1.0 / radius.abs(),
            Surface::Graph { hessian } => hessian.eigenvalues()?.iter().fold(0.0f64, |a, v| a.max(v.abs())),
        })
    }

    fn validate(&self, m: usize) -> Result<()> {
        match self {
            Surface::Hyperplane => Ok(()),
            Surface::Sphere { radius } => {
                if *radius == 0.0 || !radius.is_finite() {
                    Err(Error::Configuration(format!("sphere radius must be finite and nonzero, got {radius}")))
                } else {
                    Ok(())
                }
            }
            Surface::Graph { hessian } => {
                if hessian.dim() != m {
                    Err(Error::Configuration(format!("graph Hessian must be {m}x{m}")))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Graph coordinates of `π(x)` and the signed distance `d(x)`, positive
    /// on the side `ν` points to.
    pub fn project(&self, x: &[f64]) -> Result<(Vec<f64>, f64)> {
        let pr = self.projection(x)?;
        Ok((pr.y, pr.d))
    }

    fn projection(&self, x: &[f64]) -> Result<Projection> {
        let n = x.len();
        let (xt, xn) = (&x[..n - 1], x[n - 1]);
        let kappa = self.max_curvature()?;
        let pr = match self {
            Surface::Hyperplane => Projection {
                y: xt.to_vec(),
                shift: vec![0.0; n - 1],
                d: xn,
                bend: 0.0,
            },
            Surface::Sphere { radius } => {
                let (r, rho) = (*radius, radius.abs());
                let sg = r.signum();
                let t2: f64 = xt.iter().map(|v| v * v).sum();
                let v = (t2 + (xn + r) * (xn + r)).sqrt();
                if v == 0.0 {
                    return Err(Error::Domain("point at the centre of the sphere".into()));
                }
                // v² − R² without cancellation
                let excess = t2 + xn * xn + 2.0 * r * xn;
                let ratio = -excess / ((rho + v) * v);
                Projection {
                    y: xt.iter().map(|c| rho * c / v).collect(),
                    shift: xt.iter().map(|c| c * ratio).collect(),
                    d: sg * excess / (v + rho),
                    bend: sg * t2 / (v + rho + sg * xn),
                }
            }
            Surface::Graph { hessian } => project_graph(hessian, xt, xn)?,
        };
        let ynorm = pr.y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if kappa * pr.d.abs() >= 0.5 || kappa * ynorm >= 0.5 {
            return Err(Error::Domain(format!(
                "point outside the tubular neighbourhood (d = {:e}, |y| = {ynorm:e})",
                pr.d
            )));
        }
        Ok(pr)
    }
}

/// Closest-point data, with the small differences `y − x'` and `d − x_n`
/// computed directly so finite differences do not cancel them.
struct Projection {
    y: Vec<f64>,
    shift: Vec<f64>,
    d: f64,
    bend: f64,
}

fn project_graph(q: &SymMatrix, xt: &[f64], xn: f64) -> Result<Projection> {
    let m = xt.len();
    let qm = q.as_matrix();
    let xt_v = DVector::from_row_slice(xt);
    // Solve e + (φ(x'+e) − x_n)·Q(x'+e) = 0 for the shift e = y − x'.
    let mut e = DVector::zeros(m);
    for _ in 0..60 {
        let y = &xt_v + &e;
        let qy = qm * &y;
        let phi = 0.5 * y.dot(&qy);
        let f = &e + (phi - xn) * &qy;
        let jac = DMatrix::identity(m, m) + (phi - xn) * qm + &qy * qy.transpose();
        let step = jac
            .lu()
            .solve(&f)
            .ok_or_else(|| Error::Domain("closest-point projection is not unique".into()))?;
        e -= &step;
        if step.norm() <= 1e-17 * (1.0 + y.norm()) {
            break;
        }
    }
    let y = &xt_v + &e;
    let phi = 0.5 * y.dot(&(qm * &y));
    let tangential = e.norm_squared();
    let normal = xn - phi;
    let len = (tangential + normal * normal).sqrt();
    let d = normal.signum() * len;
    // d − x_n = (d − normal) − φ
    let bend = if len == 0.0 {
        -phi
    } else {
        normal.signum() * tangential / (len + normal.abs()) - phi
    };
    Ok(Projection {
        y: y.iter().copied().collect(),
        shift: e.iter().copied().collect(),
        d,
        bend,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionInput {
    /// `w̃₀` and the geometry of `Σ` at the origin, in an orthonormal frame.
    pub point: SurfacePointData,
    pub w1: f64,
    pub grad_w1: Vec<f64>,
    pub surface: Surface,
}

impl ExpansionInput {
    /// Checks shapes, the surface/point consistency and the leading-order
    /// balance. Does not check the sign condition, see [`expansion_coefficient`].
    pub fn validate(&self) -> Result<()> {
        let p = &self.point;
        p.validate()?;
        let m = p.n - 1;
        if self.grad_w1.len() != m {
            return Err(Error::Configuration(format!("grad_w1 must have n-1 = {m} entries")));
        }
        if !self.w1.is_finite() || self.grad_w1.iter().any(|v| !v.is_finite()) {
            return Err(Error::Configuration("non-finite w1 data".into()));
        }
        self.surface.validate(m)?;
        if p.metric.sub(&SymMatrix::identity(m)).frobenius_sq().sqrt() > 1e-12 {
            return Err(Error::InvariantViolated {
                name: "orthonormal_frame",
                detail: "expansion input must use an orthonormal frame (metric = identity)".into(),
            });
        }
        let ii = self.surface.second_fund(m);
        let gap = ii.sub(&p.second_fund).frobenius_sq().sqrt();
        if gap > 1e-12 * (1.0 + ii.frobenius_sq().sqrt()) {
            return Err(Error::InvariantViolated {
                name: "surface_consistency",
                detail: format!("second_fund differs from the surface descriptor by {gap:e}"),
            });
        }
        let balance = quadratic_residual_k2(p, self.w1)?;
        if balance.abs() > BALANCE_TOL {
            return Err(Error::InvariantViolated {
                name: "leading_order_balance",
                detail: format!(
                    "−w0Δw0 + w0w1H + (n−1)/2|∇w0|² + (n−1)/2w1² = {balance:e}, tolerance {BALANCE_TOL:e}"
                ),
            });
        }
        Ok(())
    }

    /// Outer side of the junction sphere of an annulus solution.
    pub fn annulus_outer(sol: &RadialSolution) -> Result<Self> {
        let j = sol.junction.as_ref().ok_or_else(|| {
            Error::Configuration("no junction: the k = 1 solution is smooth".into())
        })?;
        let n = sol.problem.n;
        Ok(ExpansionInput {
            point: SurfacePointData::sphere(n, j.r_star, j.w0)?,
            w1: j.dnu_w_plus,
            grad_w1: vec![0.0; n - 1],
            surface: Surface::Sphere { radius: j.r_star },
        })
    }

    /// Inner side, seen with the normal pointing toward the origin.
    pub fn annulus_inner(sol: &RadialSolution) -> Result<Self> {
        let j = sol.junction.as_ref().ok_or_else(|| {
            Error::Configuration("no junction: the k = 1 solution is smooth".into())
        })?;
        let n = sol.problem.n;
        Ok(ExpansionInput {
            point: SurfacePointData::sphere(n, -j.r_star, j.w0)?,
            w1: -j.dnu_w_minus,
            grad_w1: vec![0.0; n - 1],
            surface: Surface::Sphere { radius: -j.r_star },
        })
    }

    fn bracket(&self) -> f64 {
        let p = &self.point;
        p.w0 * p.h_sigma + (p.n as f64 - 1.0) * self.w1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionResult {
    pub p: f64,
    pub w_star: f64,
    /// `1 + ½w̃₀²(|X̊|² + 2|∇_T w₁|²)`.
    pub numerator: f64,
    /// `−(9/8)·w̃₀·(w̃₀H_Σ + (n−1)·w₁)`.
    pub denom: f64,
}

pub fn expansion_coefficient(input: &ExpansionInput) -> Result<ExpansionResult> {
    input.validate()?;
    let pt = &input.point;
    let m = pt.n - 1;
    let bracket = input.bracket();
    if !(bracket < 0.0) {
        return Err(Error::Inconsistency(format!(
            "w0·H + (n−1)·w1 = {bracket:e} is not negative; no real coefficient exists"
        )));
    }
    let x = pt.hess_w0.sub(&pt.second_fund.scale(input.w1));
    let x0 = x.sub(&SymMatrix::scalar(m, x.trace() / m as f64));
    let grad_w1_sq: f64 = input.grad_w1.iter().map(|v| v * v).sum();
    let numerator = 1.0 + 0.5 * pt.w0 * pt.w0 * (x0.frobenius_sq() + 2.0 * grad_w1_sq);
    let denom = -(9.0 / 8.0) * pt.w0 * bracket;
    Ok(ExpansionResult {
        p: 1.5,
        w_star: -(numerator / denom).sqrt(),
        numerator,
        denom,
    })
}

/// `∂_T∂_ν w̄` at the origin for the ansatz built here: `∇_T w₁ + II·∇w̃₀`.
///
/// The closed form in [`expansion_coefficient`] uses `∇_T w₁` for this
/// mixed derivative, which is exact only when `II·∇w̃₀ = 0` (constant trace,
/// or flat `Σ`). Passing this vector as `grad_w1` gives the coefficient that
/// makes the limit hold for the fields actually used by [`build_wbar`].
pub fn ambient_mixed_gradient(input: &ExpansionInput) -> Vec<f64> {
    let ii = &input.point.second_fund;
    let m = input.grad_w1.len();
    (0..m)
        .map(|a| input.grad_w1[a] + (0..m).map(|b| ii.get(a, b) * input.point.grad_w0[b]).sum::<f64>())
        .collect()
}

/// `w̄(x) − w0 − ∇w̃₀·x' − w1·x_n`, i.e. the ansatz minus its affine part at
/// the origin. Finite differences of this remainder keep full relative
/// precision: no constant or linear term can cancel in the stencil.
fn wbar_remainder(input: &ExpansionInput, result: &ExpansionResult, x: &[f64]) -> Result<f64> {
    let pr = input.surface.projection(x)?;
    if pr.d < 0.0 {
        return Err(Error::Domain(format!("point on the − side (d = {:e})", pr.d)));
    }
    let pt = &input.point;
    let m = pr.y.len();
    let mut acc = input.w1 * pr.bend + result.w_star * pr.d.powf(result.p);
    for i in 0..m {
        acc += pt.grad_w0[i] * pr.shift[i] + input.grad_w1[i] * pr.y[i] * pr.d;
        for j in 0..m {
            acc += 0.5 * pt.hess_w0.get(i, j) * pr.y[i] * pr.y[j];
        }
    }
    Ok(acc)
}

fn affine_part(input: &ExpansionInput, x: &[f64]) -> f64 {
    let n = x.len();
    let tangential: f64 = input.point.grad_w0.iter().zip(x).map(|(g, v)| g * v).sum();
    input.point.w0 + tangential + input.w1 * x[n - 1]
}

/// The ansatz `w̄(x)` on the `+` side.
pub fn build_wbar(input: &ExpansionInput, result: &ExpansionResult, x: &[f64]) -> Result<f64> {
    if x.len() != input.point.n {
        return Err(Error::Domain(format!("point must have {} coordinates", input.point.n)));
    }
    Ok(affine_part(input, x) + wbar_remainder(input, result, x)?)
}

/// Second-order central differences of `w̄` at `x` with step `h`.
pub fn finite_difference_jet(input: &ExpansionInput, result: &ExpansionResult, x: &[f64], h: f64) -> Result<ConformalJet> {
    let n = x.len();
    let f = |dx: &[(usize, f64)]| -> Result<f64> {
        let mut p = x.to_vec();
        for &(i, s) in dx {
            p[i] += s;
        }
        wbar_remainder(input, result, &p)
    };
    let f0 = f(&[])?;
    let mut grad = vec![0.0; n];
    let mut hess = DMatrix::zeros(n, n);
    for i in 0..n {
        let fp = f(&[(i, h)])?;
        let fm = f(&[(i, -h)])?;
        grad[i] = (fp - fm) / (2.0 * h);
        hess[(i, i)] = (fp - 2.0 * f0 + fm) / (h * h);
        for j in i + 1..n {
            let v = (f(&[(i, h), (j, h)])? - f(&[(i, h), (j, -h)])? - f(&[(i, -h), (j, h)])?
                + f(&[(i, -h), (j, -h)])?)
                / (4.0 * h * h);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    for (g, exact) in grad.iter_mut().zip(input.point.grad_w0.iter().chain([&input.w1])) {
        *g += exact;
    }
    ConformalJet::new(affine_part(input, x) + f0, grad, SymMatrix::from_upper(hess)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitPoint {
    pub d: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub residual: f64,
    pub cone: ConeLabel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitCheck {
    pub p: f64,
    pub w_star: f64,
    pub points: Vec<LimitPoint>,
    /// `|σ₂ − 1|` at the smallest `d`.
    pub limit_residual: f64,
    /// `Γ₂⁺` interior at every `d` except possibly the largest.
    pub cone_ok_near: bool,
    /// Slope of `ln|σ₂ − 1|` against `ln d` over the smaller half of the grid (in log scale).
    pub slope: f64,
    /// The residual reversed direction by more than a factor of two on the fitted half.
    pub precision_warning: bool,
}

/// `σ₂(λ(−A_w̄))` along the normal line `x = d·e_n`.
pub fn verify_limit(input: &ExpansionInput, result: &ExpansionResult, d_grid: &[f64]) -> Result<LimitCheck> {
    input.validate()?;
    if d_grid.len() < 2 {
        return Err(Error::Configuration("d grid needs at least two points".into()));
    }
    if d_grid.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
        return Err(Error::Configuration("d grid must be positive".into()));
    }
    if !(result.p > 1.0 && result.p < 2.0) {
        return Err(Error::Configuration(format!("exponent p = {} outside (1, 2)", result.p)));
    }
    let n = input.point.n;
    let mut points = d_grid
        .par_iter()
        .map(|&d| {
            let mut x = vec![0.0; n];
            x[n - 1] = d;
            let jet = finite_difference_jet(input, result, &x, d / 100.0)?;
            let lambda = negative_schouten_eigenvalues(&jet)?;
            let s = sigma_all(lambda.values(), 2);
            Ok(LimitPoint {
                d,
                sigma1: s[1],
                sigma2: s[2],
                residual: (s[2] - 1.0).abs(),
                cone: classify_cone(&lambda, 2, DEFAULT_CONE_TOL)?.label,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    points.sort_by(|a, b| b.d.total_cmp(&a.d));

    let d_max = points[0].d;
    let smallest = points.last().expect("non-empty grid");
    let limit_residual = smallest.residual;
    let cone_ok_near = points
        .iter()
        .filter(|pt| pt.d < d_max)
        .all(|pt| pt.cone == ConeLabel::Interior);

    let mid = (d_max.ln() + smallest.d.ln()) / 2.0;
    let lower: Vec<&LimitPoint> = points.iter().filter(|pt| pt.d.ln() <= mid + 1e-12).collect();
    let fit: Vec<(f64, f64)> = lower
        .iter()
        .filter(|pt| pt.residual > 0.0)
        .map(|pt| (pt.d.ln(), pt.residual.ln()))
        .collect();
    let slope = if fit.len() >= 2 {
        crate::radial::least_squares_line(&fit).0
    } else {
        f64::NAN
    };
    let mut precision_warning = false;
    if lower.len() >= 3 {
        let trend = (lower[lower.len() - 1].residual / lower[0].residual).ln().signum();
        for pair in lower.windows(2) {
            let step = (pair[1].residual / pair[0].residual).ln();
            if step * trend < -std::f64::consts::LN_2 {
                precision_warning = true;
            }
        }
    }
    Ok(LimitCheck {
        p: result.p,
        w_star: result.w_star,
        points,
        limit_residual,
        cone_ok_near,
        slope,
        precision_warning,
    })
}

/// `count` logarithmically spaced distances from `d_max` down to `d_min`.
pub fn log_grid(d_max: f64, d_min: f64, count: usize) -> Result<Vec<f64>> {
    if !(d_min > 0.0 && d_max > d_min) || count < 2 {
        return Err(Error::Configuration(format!(
            "need 0 < dmin < dmax and at least two points, got [{d_min}, {d_max}] x {count}"
        )));
    }
    let (a, b) = (d_max.ln(), d_min.ln());
    Ok((0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub p: f64,
    pub limit_residual: f64,
    pub slope: f64,
    pub cone_ok_near: bool,
    /// Residual at the smallest `d` within `1e−3` and admissible.
    pub pass: bool,
}

/// Repeats [`verify_limit`] with the closed-form `w_*` for each exponent.
pub fn exponent_necessity_scan(input: &ExpansionInput, p_grid: &[f64], d_grid: &[f64]) -> Result<Vec<ScanRow>> {
    let base = expansion_coefficient(input)?;
    p_grid
        .iter()
        .map(|&p| {
            let check = verify_limit(input, &ExpansionResult { p, ..base }, d_grid)?;
            Ok(ScanRow {
                p,
                limit_residual: check.limit_residual,
                slope: check.slope,
                cone_ok_near: check.cone_ok_near,
                pass: check.limit_residual <= 1e-3 && check.cone_ok_near,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere_input(n: usize, r: f64, w0: f64) -> ExpansionInput {
        ExpansionInput {
            point: SurfacePointData::sphere(n, r, w0).unwrap(),
            w1: 0.0,
            grad_w1: vec![0.0; n - 1],
            surface: Surface::Sphere { radius: r },
        }
    }

    #[test]
    fn closed_form_sphere() {
        let (n, r, w0) = (4, 2.0, 1.27);
        let res = expansion_coefficient(&sphere_input(n, r, w0)).unwrap();
        let expected = -(2.0 / (3.0 * w0)) * (2.0 * r / (n as f64 - 1.0)).sqrt();
        assert!((res.w_star - expected).abs() < 1e-14);
        assert_eq!(res.p, 1.5);
    }

    #[test]
    fn flat_case_is_rejected() {
        let input = ExpansionInput {
            point: SurfacePointData {
                second_fund: SymMatrix::zeros(3),
                h_sigma: 0.0,
                ..SurfacePointData::sphere(4, 1.0, 0.8).unwrap()
            },
            w1: 0.0,
            grad_w1: vec![0.0; 3],
            surface: Surface::Hyperplane,
        };
        assert_eq!(expansion_coefficient(&input).unwrap_err().exit_code(), 4);
        let mut off = input.clone();
        off.w1 = 0.1;
        assert!(matches!(
            expansion_coefficient(&off),
            Err(Error::InvariantViolated { name: "leading_order_balance", .. })
        ));
    }

    #[test]
    fn surface_mismatch_is_rejected() {
        let mut input = sphere_input(4, 2.0, 1.0);
        input.surface = Surface::Sphere { radius: 3.0 };
        assert!(matches!(
            input.validate(),
            Err(Error::InvariantViolated { name: "surface_consistency", .. })
        ));
    }

    #[test]
    fn projections_agree_for_sphere_and_graph() {
        // Near the origin the sphere and its osculating quadric give the same
        // normal-line distances.
        let r = 2.0;
        let sphere = Surface::Sphere { radius: r };
        let graph = Surface::Graph {
            hessian: SymMatrix::scalar(3, -1.0 / r),
        };
        let (ys, ds) = sphere.project(&[0.0, 0.0, 0.0, 1e-3]).unwrap();
        let (yg, dg) = graph.project(&[0.0, 0.0, 0.0, 1e-3]).unwrap();
        assert!((ds - 1e-3).abs() < 1e-18);
        assert_eq!(dg, 1e-3);
        assert!(ys.iter().chain(&yg).all(|v| *v == 0.0));
        let x = [0.01, -0.02, 0.005, 0.003];
        let (_, ds) = sphere.project(&x).unwrap();
        let exact = ((0.01f64.powi(2) + 0.02f64.powi(2) + 0.005f64.powi(2) + 2.003f64.powi(2)).sqrt()) - 2.0;
        assert!((ds - exact).abs() < 1e-15);
        let (y, dg) = graph.project(&x).unwrap();
        // the foot point is on the graph and x − foot is normal to it
        let phi = -0.25 * y.iter().map(|v| v * v).sum::<f64>();
        let grad: Vec<f64> = y.iter().map(|v| -v / r).collect();
        let diff: Vec<f64> = (0..3).map(|i| x[i] - y[i]).collect();
        for i in 0..3 {
            assert!((diff[i] + (x[3] - phi) * grad[i]).abs() < 1e-15);
        }
        assert!(dg > 0.0 && (dg - ds).abs() < 1e-5);
    }

    #[test]
    fn wbar_on_surface_and_normal_derivative() {
        let input = sphere_input(4, 2.0, 1.3);
        let res = expansion_coefficient(&input).unwrap();
        assert_eq!(build_wbar(&input, &res, &[0.0; 4]).unwrap(), 1.3);
        let d = 1e-4;
        let h = d / 100.0;
        let at = |t: f64| build_wbar(&input, &res, &[0.0, 0.0, 0.0, t]).unwrap();
        let fd = (at(d + h) - at(d - h)) / (2.0 * h);
        let exact = input.w1 + 1.5 * res.w_star * d.sqrt();
        assert!((fd - exact).abs() < 1e-6, "{fd} vs {exact}");
        assert!(build_wbar(&input, &res, &[0.0, 0.0, 0.0, -1e-3]).is_err());
        assert!(build_wbar(&input, &res, &[0.0, 0.0, 0.0, 1.5]).is_err());
    }
}
