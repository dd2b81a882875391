//! Radial σ_k-Loewner–Nirenberg problem on an annulus `{a < |x| < b}`.
//!
//! For `w = w(r)` the eigenvalues of `−A_w` are `μ_r = −w·w″ + ½w′²` (once)
//! and `μ_t = −w·w′/r + ½w′²` (`n − 1` times), and `σ_k = 1` is linear in
//! `μ_r` once `μ_t > 0` is known, so the ODE has no branch ambiguity:
//!
//! ```text
//! μ_r = (μ_t^{1−k} − C(n−1,k)·μ_t) / C(n−1,k−1),   w″ = (½w′² − μ_r) / w.
//! ```
//!
//! For `k ≥ 2` the equation degenerates where `μ_t = 0`, i.e. at `w′ = 0`
//! or `w′ = 2w/r`. Each side of the annulus is a branch that starts on
//! that set at the junction radius `r_*` and runs to the boundary, where
//! `w ≈ c·d + c₂·d²` with `c² = 2·C(n,k)^{−1/k}` and `c₂ = −c·H/(2(n−1))`
//! for the boundary mean curvature `H` (so `c₂ = −c/(2b)` at `r = b`,
//! `+c/(2a)` at `r = a`).
//!
//! Integrating *from* the boundary is hopeless: perturbations of the
//! boundary data grow like `dⁿ⁺¹` away from it. The solver therefore
//! starts both branches at the junction and integrates toward the
//! boundary, where that mode decays. The problem is dilation invariant,
//! so the only unknown is `q = w(r_*)/r_*`, found by matching
//! `b_hit/a_hit = b/a`; `r_*` is then fixed by `b_hit = b`.
//!
//! Near the junction the independent variable is `μ_t` itself, since
//! `dr/dμ_t = w·C(n−1,k−1)·μ_t^{k−1} / ((w′ − w/r)(C(n,k)·μ_t^k − 1))`
//! is regular there; away from it `w` is used, which is monotone on each
//! branch and keeps the boundary approach well scaled.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{Dopri5, Flow, Tolerances};
use crate::symmetric::{binomial, classify_cone, sigma_of_multiset, Lambda, DEFAULT_CONE_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnulusProblem {
    pub a: f64,
    pub b: f64,
    pub n: usize,
    pub k: usize,
}

impl AnnulusProblem {
    pub fn new(a: f64, b: f64, n: usize, k: usize) -> Result<Self> {
        let p = AnnulusProblem { a, b, n, k };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite() && self.b.is_finite() && self.a < self.b) {
            return Err(Error::Configuration(format!(
                "annulus radii must satisfy 0 < a < b, got a={}, b={}",
                self.a, self.b
            )));
        }
        if self.n < 3 || self.n > crate::symmetric::MAX_DIM {
            return Err(Error::Configuration(format!("dimension n={} outside 3..=32", self.n)));
        }
        if self.k == 0 || self.k > self.n {
            return Err(Error::Configuration(format!("k={} outside 1..=n={}", self.k, self.n)));
        }
        Ok(())
    }

    /// `√(ab)`, where the singular sphere sits for `k ≥ 2`.
    pub fn geometric_mean(&self) -> f64 {
        (self.a * self.b).sqrt()
    }

    /// Level `m_∞` with `C(n,k)·m_∞^k = 1`, the common eigenvalue at the boundary.
    pub fn isotropic_level(&self) -> f64 {
        binomial(self.n, self.k).powf(-1.0 / self.k as f64)
    }

    /// Boundary slope `c = lim w/d`.
    pub fn boundary_slope(&self) -> f64 {
        (2.0 * self.isotropic_level()).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Bound on `|σ_k(λ(−A_w)) − 1|` at grid points.
    pub ode_tol: f64,
    /// Distance from `∂Ω` at which integration stops; `None` means `1e−6·(b−a)`.
    pub eps0: Option<f64>,
    /// Smallest `μ_t` placed on the grid, and the degeneracy threshold of [`ode_rhs`].
    pub cone_floor: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Smallest `|r − r_*|` on the grid, relative to `r_*`.
    pub junction_resolution: f64,
    /// Near-junction grid density, points per decade of `|r − r_*|`.
    pub points_per_decade: usize,
    /// Relative tolerance on the shooting parameter.
    pub shoot_tol: f64,
    pub max_shoot_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            ode_tol: 1e-8,
            eps0: None,
            cone_floor: 1e-8,
            rtol: 1e-12,
            atol: 1e-15,
            junction_resolution: 1e-9,
            points_per_decade: 25,
            shoot_tol: 1e-14,
            max_shoot_iter: 200,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("ode_tol", self.ode_tol),
            ("cone_floor", self.cone_floor),
            ("rtol", self.rtol),
            ("atol", self.atol),
            ("junction_resolution", self.junction_resolution),
            ("shoot_tol", self.shoot_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Configuration(format!("{name} must be positive, got {v}")));
            }
        }
        if let Some(e) = self.eps0 {
            if !(e > 0.0 && e.is_finite()) {
                return Err(Error::Configuration(format!("eps0 must be positive, got {e}")));
            }
        }
        if self.points_per_decade < 2 {
            return Err(Error::Configuration("points_per_decade must be at least 2".into()));
        }
        Ok(())
    }

    pub fn eps0_for(&self, problem: &AnnulusProblem) -> f64 {
        self.eps0.unwrap_or(1e-6 * (problem.b - problem.a))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Inner,
    Outer,
}

impl Side {
    pub fn as_str(&self) -> &'static str {
        match self {
            Side::Inner => "inner",
            Side::Outer => "outer",
        }
    }

    /// +1 when the branch runs toward larger `r`.
    fn dir(&self) -> f64 {
        match self {
            Side::Inner => -1.0,
            Side::Outer => 1.0,
        }
    }
}

impl std::str::FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inner" => Ok(Side::Inner),
            "outer" => Ok(Side::Outer),
            other => Err(Error::Configuration(format!("side must be inner or outer, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub r: f64,
    pub w: f64,
    pub wp: f64,
    pub wpp: f64,
    pub mu_r: f64,
    pub mu_t: f64,
    pub residual: f64,
}

impl GridPoint {
    /// Fills eigenvalues and residual from `(r, w, w′, w″)`.
    pub fn from_state(r: f64, w: f64, wp: f64, wpp: f64, problem: &AnnulusProblem) -> Result<Self> {
        let eig = radial_eigenvalues(w, wp, r)?;
        let mu_r = eig.mu_r(wpp);
        let residual = sigma_of_multiset(mu_r, eig.mu_t, problem.n, problem.k)? - 1.0;
        Ok(GridPoint {
            r,
            w,
            wp,
            wpp,
            mu_r,
            mu_t: eig.mu_t,
            residual,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Junction {
    pub r_star: f64,
    pub w0: f64,
    /// `w′(r_*⁺)`, the normal derivative from the outer side (`ν` outward).
    pub dnu_w_plus: f64,
    /// `w′(r_*⁻)`.
    pub dnu_w_minus: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryHits {
    pub inner: f64,
    pub outer: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootingInfo {
    /// `w(r_s)/r_s` at the start point.
    pub q: f64,
    pub iterations: usize,
    /// `ln(b_hit/a_hit) − ln(b/a)` at the accepted `q`.
    pub mismatch: f64,
}

/// Where both branches start: the junction for `k ≥ 2`, the maximum of
/// `w` for `k = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StartPoint {
    pub r: f64,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialSolution {
    pub problem: AnnulusProblem,
    pub options: SolverOptions,
    /// Ascending in `r`, on `(r_s, b)`.
    pub outer: Vec<GridPoint>,
    /// Ascending in `r`, on `(a, r_s)`.
    pub inner: Vec<GridPoint>,
    pub junction: Option<Junction>,
    pub start: StartPoint,
    pub boundary_hits: BoundaryHits,
    pub shooting: ShootingInfo,
}

/// Radial eigenvalue data at one point. `μ_r` needs `w″`, see [`RadialEigen::mu_r`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialEigen {
    pub w: f64,
    pub wp: f64,
    pub mu_t: f64,
}

impl RadialEigen {
    pub fn mu_r(&self, wpp: f64) -> f64 {
        -self.w * wpp + 0.5 * self.wp * self.wp
    }
}

pub fn radial_eigenvalues(w: f64, wp: f64, r: f64) -> Result<RadialEigen> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("radius must be positive, got {r}")));
    }
    if !(w > 0.0) {
        return Err(Error::Domain(format!("w must be positive, got {w}")));
    }
    Ok(RadialEigen {
        w,
        wp,
        mu_t: -w * wp / r + 0.5 * wp * wp,
    })
}

/// `μ_r` on the solution set `σ_k(μ_r, μ_t, …) = 1`, given `μ_t > 0`.
pub fn mu_r_on_level_set(mu_t: f64, n: usize, k: usize) -> f64 {
    (mu_t.powi(1 - k as i32) - binomial(n - 1, k) * mu_t) / binomial(n - 1, k - 1)
}

/// The unique `w″` with `σ_k(λ(−A_w)) = 1` and `λ` in the closed cone.
pub fn ode_rhs(w: f64, wp: f64, r: f64, problem: &AnnulusProblem, cone_floor: f64) -> Result<f64> {
    let eig = radial_eigenvalues(w, wp, r)?;
    let (n, k) = (problem.n, problem.k);
    if k >= 2 && eig.mu_t <= cone_floor {
        return Err(Error::Degenerate(format!(
            "μ_t = {:e} at r = {r} is at or below the cone floor {cone_floor:e}",
            eig.mu_t
        )));
    }
    let mu_r = mu_r_on_level_set(eig.mu_t, n, k);
    let lambda = Lambda::radial(mu_r, eig.mu_t, n)?;
    if !classify_cone(&lambda, k, DEFAULT_CONE_TOL)?.in_closure() {
        return Err(Error::Degenerate(format!(
            "the σ_{k} = 1 point (μ_r = {mu_r}, μ_t = {}) lies outside the cone",
            eig.mu_t
        )));
    }
    Ok((0.5 * wp * wp - mu_r) / w)
}

/// Same as [`ode_rhs`] without the cone bookkeeping; used inside the integrator.
fn wpp_fast(w: f64, wp: f64, r: f64, n: usize, k: usize) -> Result<f64> {
    if !(w > 0.0 && r > 0.0) {
        return Err(Error::Degenerate("left the domain".into()));
    }
    let mu_t = -w * wp / r + 0.5 * wp * wp;
    if k >= 2 && mu_t <= 0.0 {
        return Err(Error::Degenerate("μ_t left the cone".into()));
    }
    Ok((0.5 * wp * wp - mu_r_on_level_set(mu_t, n, k)) / w)
}

struct BranchRun {
    hit: f64,
    /// From the start point outward (toward the boundary).
    grid: Vec<GridPoint>,
}

struct BranchSpec<'a> {
    problem: &'a AnnulusProblem,
    opts: &'a SolverOptions,
    eps0: f64,
    collect: bool,
}

impl BranchSpec<'_> {
    fn tol(&self) -> Tolerances {
        Tolerances {
            rtol: self.opts.rtol,
            atol: self.opts.atol,
            max_steps: 500_000,
        }
    }

    fn push(&self, grid: &mut Vec<GridPoint>, r: f64, w: f64, wp: f64) -> Result<()> {
        if !self.collect {
            return Ok(());
        }
        let wpp = wpp_fast(w, wp, r, self.problem.n, self.problem.k)?;
        grid.push(GridPoint::from_state(r, w, wp, wpp, self.problem)?);
        Ok(())
    }

    /// Runs one branch from `(r_s, w_s)` toward the boundary on `side`.
    fn run(&self, r_s: f64, w_s: f64, side: Side) -> Result<BranchRun> {
        let (n, k) = (self.problem.n, self.problem.k);
        let c = self.problem.boundary_slope();
        let m_inf = self.problem.isotropic_level();
        let dir = side.dir();
        let mut grid = Vec::new();

        // Phase A: leave the start point.
        let (r_a, w_a, wp_a) = if k >= 2 {
            let c_lo = binomial(n - 1, k - 1);
            let c_n = binomial(n, k);
            let kk = k as i32;
            let rhs = move |m: f64, y: &[f64; 2]| -> Result<[f64; 2]> {
                let r = r_s + y[0];
                let w = w_s + y[1];
                if !(w > 0.0 && r > 0.0) {
                    return Err(Error::Degenerate("left the domain".into()));
                }
                let ratio = w / r;
                let s = (ratio * ratio + 2.0 * m).sqrt();
                // outer branch: w′ = w/r − S ≤ 0; inner: w′ = w/r + S
                let wp = ratio - dir * s;
                let drdm = w * c_lo * m.powi(kk - 1) / ((wp - ratio) * (c_n * m.powi(kk) - 1.0));
                Ok([drdm, wp * drdm])
            };
            let s_min = self.opts.junction_resolution * r_s;
            let m_end = 0.5 * m_inf;
            let m_min = (k as f64 * s_min / (r_s * c_lo))
                .powf(1.0 / k as f64)
                .max(self.opts.cone_floor)
                .min(0.5 * m_end);
            let per_decade_m = (self.opts.points_per_decade * k) as f64;
            let count = ((m_end / m_min).log10() * per_decade_m).ceil().max(1.0) as usize;
            let mut stepper = Dopri5::new(0.0, [0.0, 0.0], m_min * 1e-3, self.tol());
            for j in 0..=count {
                let m = m_min * (m_end / m_min).powf(j as f64 / count as f64);
                stepper.advance(m, rhs, |_, _| Flow::Continue)?;
                if self.collect {
                    let r = r_s + stepper.y[0];
                    let w = w_s + stepper.y[1];
                    let ratio = w / r;
                    let wp = ratio - dir * (ratio * ratio + 2.0 * m).sqrt();
                    self.push(&mut grid, r, w, wp)?;
                }
            }
            let r = r_s + stepper.y[0];
            let w = w_s + stepper.y[1];
            let ratio = w / r;
            (r, w, ratio - dir * (ratio * ratio + 2.0 * m_end).sqrt())
        } else {
            // k = 1: regular at the maximum of w; step in r until |w′| is O(c).
            let rhs = move |r: f64, y: &[f64; 2]| -> Result<[f64; 2]> {
                Ok([y[1], wpp_fast(y[0], y[1], r, n, k)?])
            };
            if self.collect && side == Side::Outer {
                self.push(&mut grid, r_s, w_s, 0.0)?;
            }
            let mut stepper = Dopri5::new(r_s, [w_s, 0.0], 1e-6 * r_s, self.tol());
            let mut pending = Vec::new();
            let target = r_s + dir * 1e3 * r_s;
            let flow = stepper.advance(target, rhs, |r, y| {
                pending.push((r, y[0], y[1]));
                if y[1].abs() >= 0.5 * c || y[0] <= 0.5 * c * r_s * 1e-3 {
                    Flow::Stop
                } else {
                    Flow::Continue
                }
            })?;
            if flow != Flow::Stop {
                return Err(Error::Convergence("k = 1 branch never steepened".into()));
            }
            for (r, w, wp) in pending {
                self.push(&mut grid, r, w, wp)?;
            }
            (stepper.t, stepper.y[0], stepper.y[1])
        };

        // Phase B: w as the independent variable, down to w = c·eps0.
        let w_end = c * self.eps0;
        let (r_end, w_final) = if w_a > w_end {
            let rhs = move |w: f64, y: &[f64; 2]| -> Result<[f64; 2]> {
                let (r, p) = (y[0], y[1]);
                if p == 0.0 {
                    return Err(Error::Degenerate("w′ vanished away from the junction".into()));
                }
                Ok([1.0 / p, wpp_fast(w, p, r, n, k)? / p])
            };
            let mut stepper = Dopri5::new(w_a, [r_a, wp_a], 1e-3 * w_a, self.tol());
            let mut pending = Vec::new();
            stepper.advance(w_end, rhs, |w, y| {
                pending.push((y[0], w, y[1]));
                Flow::Continue
            })?;
            for (r, w, wp) in pending {
                self.push(&mut grid, r, w, wp)?;
            }
            (stepper.y[0], w_end)
        } else {
            (r_a, w_a)
        };
        let hit = boundary_from(r_end, w_final, c, side);
        Ok(BranchRun { hit, grid })
    }
}

/// Boundary location implied by a small value `w` at `r` via the two-term
/// series `w = c·d + c₂·d²`.
pub fn boundary_from(r: f64, w: f64, c: f64, side: Side) -> f64 {
    let dir = side.dir();
    let d = w / c + dir * w * w / (2.0 * r * c * c);
    r + dir * d
}

fn branch_pair(problem: &AnnulusProblem, opts: &SolverOptions, eps0: f64, q: f64, r_s: f64, collect: bool) -> Result<(BranchRun, BranchRun)> {
    let spec = BranchSpec {
        problem,
        opts,
        eps0,
        collect,
    };
    let w_s = q * r_s;
    let outer = spec.run(r_s, w_s, Side::Outer)?;
    let inner = spec.run(r_s, w_s, Side::Inner)?;
    Ok((outer, inner))
}

pub fn solve_annulus(problem: &AnnulusProblem, opts: &SolverOptions) -> Result<RadialSolution> {
    problem.validate()?;
    opts.validate()?;
    let eps0 = opts.eps0_for(problem);
    if eps0 >= 0.1 * (problem.b - problem.a) {
        return Err(Error::Configuration(format!("eps0 = {eps0} is not small against b − a")));
    }
    let target = (problem.b / problem.a).ln();
    // Shooting at unit start radius; the boundary cut-off scales with it.
    let unit_eps = eps0 / problem.geometric_mean();
    let mismatch = |q: f64| -> Result<f64> {
        let (o, i) = branch_pair(problem, opts, unit_eps, q, 1.0, false)?;
        if !(i.hit > 0.0) {
            return Err(Error::Convergence(format!("inner branch overshot the origin at q = {q}")));
        }
        Ok((o.hit / i.hit).ln() - target)
    };

    let mut iterations = 0usize;
    let (mut lo, mut hi) = (0.05, 1.0);
    let mut f_lo = mismatch(lo)?;
    let mut f_hi = mismatch(hi)?;
    while f_lo > 0.0 {
        lo *= 0.5;
        iterations += 1;
        if lo < 1e-8 {
            return Err(Error::Configuration("annulus too thin to bracket the shooting parameter".into()));
        }
        f_lo = mismatch(lo)?;
    }
    while f_hi < 0.0 {
        hi *= 2.0;
        iterations += 1;
        if hi > 1e8 {
            return Err(Error::Configuration("annulus too thick to bracket the shooting parameter".into()));
        }
        f_hi = mismatch(hi)?;
    }

    // Illinois variant of regula falsi.
    let mut side = 0i8;
    let (q, f_q) = loop {
        iterations += 1;
        if iterations > opts.max_shoot_iter {
            return Err(Error::Convergence(format!(
                "shooting did not converge in {} iterations (bracket [{lo}, {hi}])",
                opts.max_shoot_iter
            )));
        }
        let mut q = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        if !(q > lo && q < hi) {
            q = 0.5 * (lo + hi);
        }
        let f_q = mismatch(q)?;
        if f_q == 0.0 || (hi - lo) <= opts.shoot_tol * q || f_q.abs() <= 1e-15 {
            break (q, f_q);
        }
        if f_q * f_hi > 0.0 {
            hi = q;
            f_hi = f_q;
            if side == 1 {
                f_lo *= 0.5;
            }
            side = 1;
        } else {
            lo = q;
            f_lo = f_q;
            if side == -1 {
                f_hi *= 0.5;
            }
            side = -1;
        }
    };

    let (unit_outer, _) = branch_pair(problem, opts, unit_eps, q, 1.0, false)?;
    let r_s = problem.b / unit_outer.hit;
    let (outer, inner) = branch_pair(problem, opts, eps0, q, r_s, true)?;
    let hits = BoundaryHits {
        inner: inner.hit,
        outer: outer.hit,
    };
    let hit_tol = 1e-8 * (problem.b - problem.a);
    if (hits.outer - problem.b).abs() > hit_tol || (hits.inner - problem.a).abs() > hit_tol {
        return Err(Error::Convergence(format!(
            "branches end at {} and {} instead of {} and {}",
            hits.inner, hits.outer, problem.a, problem.b
        )));
    }

    let w_s = q * r_s;
    let junction = (problem.k >= 2).then_some(Junction {
        r_star: r_s,
        w0: w_s,
        dnu_w_plus: 0.0,
        dnu_w_minus: 2.0 * w_s / r_s,
    });
    let mut inner_grid = inner.grid;
    inner_grid.reverse();
    let sol = RadialSolution {
        problem: *problem,
        options: *opts,
        outer: outer.grid,
        inner: inner_grid,
        junction,
        start: StartPoint { r: r_s, w: w_s },
        boundary_hits: hits,
        shooting: ShootingInfo {
            q,
            iterations,
            mismatch: f_q,
        },
    };
    let worst = sol.max_abs_residual();
    if worst > opts.ode_tol {
        return Err(Error::Convergence(format!(
            "grid residual {worst:e} exceeds ode_tol {:e}",
            opts.ode_tol
        )));
    }
    Ok(sol)
}

/// One named invariant and whether it held.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantCheck {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
}

impl RadialSolution {
    pub fn side(&self, side: Side) -> &[GridPoint] {
        match side {
            Side::Inner => &self.inner,
            Side::Outer => &self.outer,
        }
    }

    pub fn max_abs_residual(&self) -> f64 {
        self.outer
            .iter()
            .chain(&self.inner)
            .map(|g| g.residual.abs())
            .fold(0.0, f64::max)
    }

    /// Checks positivity, residual, cone admissibility, boundary values,
    /// the junction ordering `w′(r_*⁺) < w′(r_*⁻)` and the boundary slope.
    pub fn check_invariants(&self) -> Vec<InvariantCheck> {
        let p = &self.problem;
        let mut out = Vec::new();
        let mut push = |name: &str, passed: bool, value: f64, threshold: f64| {
            out.push(InvariantCheck {
                name: name.to_string(),
                passed,
                value,
                threshold,
            })
        };
        let all = || self.outer.iter().chain(&self.inner);
        let min_w = all().map(|g| g.w).fold(f64::INFINITY, f64::min);
        push("positivity", min_w > 0.0, min_w, 0.0);

        let res = self.max_abs_residual();
        push("residual", res <= self.options.ode_tol, res, self.options.ode_tol);

        let outside = all()
            .filter(|g| {
                Lambda::radial(g.mu_r, g.mu_t, p.n)
                    .and_then(|l| classify_cone(&l, p.k, DEFAULT_CONE_TOL))
                    .map(|c| !c.is_interior())
                    .unwrap_or(true)
            })
            .count();
        push("cone_interior", outside == 0, outside as f64, 0.0);

        let hit_err = (self.boundary_hits.outer - p.b).abs().max((self.boundary_hits.inner - p.a).abs());
        let hit_tol = 1e-8 * (p.b - p.a);
        push("boundary_zero", hit_err <= hit_tol, hit_err, hit_tol);

        if let Some(j) = &self.junction {
            let gap = j.dnu_w_minus - j.dnu_w_plus;
            push("normal_derivative_ordering", gap > 0.0, gap, 0.0);
        }

        let c = p.boundary_slope();
        let slope_err = [
            self.outer.last().map(|g| g.w / (p.b - g.r)),
            self.inner.first().map(|g| g.w / (g.r - p.a)),
        ]
        .iter()
        .flatten()
        .map(|s| (s / c - 1.0).abs())
        .fold(0.0, f64::max);
        push("boundary_slope", slope_err <= 1e-3, slope_err, 1e-3);
        out
    }

    pub fn invariants_hold(&self) -> bool {
        self.check_invariants().iter().all(|c| c.passed)
    }
}

/// Result of a log–log fit of `|w′(r) − w′(r_*^±)|` against `|r − r_*|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderFit {
    pub side: Side,
    pub gamma: f64,
    /// Standard error of `gamma` from the regression residuals.
    pub stderr: f64,
    pub r2: f64,
    /// Finest spacing of the grid on this side.
    pub h: f64,
    pub window: (f64, f64),
    /// `(ln d, ln |Δw′|)` of the points in the window.
    pub points: Vec<(f64, f64)>,
}

pub fn fit_holder_exponent(sol: &RadialSolution, side: Side) -> Result<HolderFit> {
    let j = sol.junction.as_ref().ok_or_else(|| {
        Error::Configuration("no junction: the k = 1 solution is smooth".into())
    })?;
    let wp_star = match side {
        Side::Outer => j.dnu_w_plus,
        Side::Inner => j.dnu_w_minus,
    };
    let mut dist: Vec<(f64, f64)> = sol
        .side(side)
        .iter()
        .map(|g| ((g.r - j.r_star).abs(), (g.wp - wp_star).abs()))
        .collect();
    dist.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut h = f64::INFINITY;
    let mut prev = 0.0;
    for &(d, _) in &dist {
        let gap = d - prev;
        if gap > 0.0 {
            h = h.min(gap);
        }
        prev = d;
    }
    if !h.is_finite() {
        return Err(Error::Diagnostics("empty grid".into()));
    }
    let window = (10.0 * h, 1e3 * h);
    let points: Vec<(f64, f64)> = dist
        .iter()
        .filter(|(d, dw)| *d >= window.0 && *d <= window.1 && *dw > 0.0)
        .map(|(d, dw)| (d.ln(), dw.ln()))
        .collect();
    if points.len() < 20 {
        return Err(Error::Diagnostics(format!(
            "only {} grid points in the fitting window [{:e}, {:e}]",
            points.len(),
            window.0,
            window.1
        )));
    }
    let (gamma, intercept, r2) = least_squares_line(&points);
    let count = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / count;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let ss_res: f64 = points.iter().map(|p| (p.1 - intercept - gamma * p.0).powi(2)).sum();
    let stderr = (ss_res / (count - 2.0) / sxx).sqrt();
    Ok(HolderFit {
        side,
        gamma,
        stderr,
        r2,
        h,
        window,
        points,
    })
}

/// Slope, intercept and coefficient of determination.
pub fn least_squares_line(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (slope, intercept, r2)
}

/// Least-squares `w_*` in `w = w0 + w₁·d + w_*·d^p` on one side of the
/// junction, with `d` the distance to `r_*` and `w₁` the one-sided normal
/// derivative pointing into that side. Uses grid points with
/// `d/r_* ∈ [window.0, window.1]`.
pub fn fit_power_coefficient(sol: &RadialSolution, side: Side, p: f64, window: (f64, f64)) -> Result<f64> {
    let j = sol.junction.as_ref().ok_or_else(|| {
        Error::Configuration("no junction: the k = 1 solution is smooth".into())
    })?;
    let w1 = match side {
        Side::Outer => j.dnu_w_plus,
        Side::Inner => -j.dnu_w_minus,
    };
    let (lo, hi) = (window.0 * j.r_star, window.1 * j.r_star);
    let (mut sxy, mut sxx, mut count) = (0.0, 0.0, 0usize);
    for g in sol.side(side) {
        let d = (g.r - j.r_star).abs();
        if d >= lo && d <= hi {
            let x = d.powf(p);
            let y = g.w - j.w0 - w1 * d;
            sxy += x * y;
            sxx += x * x;
            count += 1;
        }
    }
    if count < 5 {
        return Err(Error::Diagnostics(format!("only {count} points in the power-fit window")));
    }
    Ok(sxy / sxx)
}

/// Image of one side under `x ↦ ab·x/|x|²`, i.e. `w̃(r) = (r²/(ab))·w(ab/r)`,
/// with derivatives by the chain rule. Ascending in `r`.
pub fn transport_by_inversion(sol: &RadialSolution, side: Side) -> Result<Vec<GridPoint>> {
    let ab = sol.problem.a * sol.problem.b;
    let mut out = sol
        .side(side)
        .iter()
        .map(|g| {
            let r = ab / g.r;
            let w = r * r / ab * g.w;
            let wp = 2.0 * r / ab * g.w - g.wp;
            let wpp = 2.0 / ab * g.w - 2.0 / r * g.wp + ab / (r * r) * g.wpp;
            GridPoint::from_state(r, w, wp, wpp, &sol.problem)
        })
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|x, y| x.r.total_cmp(&y.r));
    Ok(out)
}

/// Comparison of the transported outer branch with the inner branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InversionReport {
    pub max_residual: f64,
    /// Where the transported branch reaches `w = 0`.
    pub transported_hit: f64,
    /// Largest `|w̃ − w_inner| / w0` over points inside the inner grid.
    pub max_mismatch: f64,
    pub compared_points: usize,
}

pub fn inversion_report(sol: &RadialSolution) -> Result<InversionReport> {
    let moved = transport_by_inversion(sol, Side::Outer)?;
    let max_residual = moved.iter().map(|g| g.residual.abs()).fold(0.0, f64::max);
    let first = moved
        .first()
        .ok_or_else(|| Error::Diagnostics("empty outer branch".into()))?;
    let transported_hit = boundary_from(first.r, first.w, sol.problem.boundary_slope(), Side::Inner);
    let scale = sol.start.w;
    let inner = &sol.inner;
    let mut max_mismatch: f64 = 0.0;
    let mut compared = 0usize;
    for g in &moved {
        if let Some(w) = hermite_at(inner, g.r) {
            max_mismatch = max_mismatch.max((g.w - w).abs() / scale);
            compared += 1;
        }
    }
    Ok(InversionReport {
        max_residual,
        transported_hit,
        max_mismatch,
        compared_points: compared,
    })
}

/// Cubic Hermite interpolation of `w` on an ascending grid.
pub fn hermite_at(grid: &[GridPoint], r: f64) -> Option<f64> {
    let idx = grid.partition_point(|g| g.r <= r);
    if idx == 0 || idx >= grid.len() {
        return None;
    }
    let (g0, g1) = (&grid[idx - 1], &grid[idx]);
    let h = g1.r - g0.r;
    if h <= 0.0 {
        return Some(g0.w);
    }
    let t = (r - g0.r) / h;
    let (t2, t3) = (t * t, t * t * t);
    Some(
        (2.0 * t3 - 3.0 * t2 + 1.0) * g0.w
            + (t3 - 2.0 * t2 + t) * h * g0.wp
            + (-2.0 * t3 + 3.0 * t2) * g1.w
            + (t3 - t2) * h * g1.wp,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::{negative_schouten_eigenvalues, ConformalJet};
    use crate::symmetric::sigma;

    #[test]
    fn rejects_bad_problems() {
        assert!(AnnulusProblem::new(1.0, 1.0, 4, 2).is_err());
        assert!(AnnulusProblem::new(0.0, 1.0, 4, 2).is_err());
        assert!(AnnulusProblem::new(1.0, 2.0, 2, 1).is_err());
        assert!(AnnulusProblem::new(1.0, 2.0, 4, 5).is_err());
        assert!(AnnulusProblem::new(1.0, 2.0, 4, 0).is_err());
    }

    #[test]
    fn radial_eigen_examples() {
        let e = radial_eigenvalues(1.0, 0.0, 2.0).unwrap();
        assert_eq!(e.mu_t, 0.0);
        assert_eq!(e.mu_r(3.0), -3.0);
        let e = radial_eigenvalues(1.5, 1.0, 1.5).unwrap();
        assert_eq!(e.mu_t, -0.5);
        assert_eq!(e.mu_r(0.0), 0.5);
        assert!(radial_eigenvalues(1.0, 0.0, 0.0).is_err());
        assert!(radial_eigenvalues(0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn k1_closed_form() {
        let p = AnnulusProblem::new(1.0, 3.0, 5, 1).unwrap();
        let (w, wp, r) = (0.7, -0.2, 1.3);
        let wpp = ode_rhs(w, wp, r, &p, 1e-8).unwrap();
        let e = radial_eigenvalues(w, wp, r).unwrap();
        // σ_1 = μ_r + (n−1)μ_t = 1
        assert!((e.mu_r(wpp) + 4.0 * e.mu_t - 1.0).abs() < 1e-12);
    }

    #[test]
    fn isotropic_point() {
        for n in 3..=6 {
            for k in 1..=n {
                let p = AnnulusProblem::new(1.0, 2.0, n, k).unwrap();
                let m = p.isotropic_level();
                let mu_r = mu_r_on_level_set(m, n, k);
                assert!((mu_r - m).abs() < 1e-12 * m.max(1.0));
                assert!((sigma_of_multiset(m, m, n, k).unwrap() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn degenerate_at_zero_mu_t() {
        let p = AnnulusProblem::new(1.0, 4.0, 4, 2).unwrap();
        assert!(matches!(ode_rhs(1.0, 0.0, 2.0, &p, 1e-8), Err(Error::Degenerate(_))));
        assert!(matches!(ode_rhs(1.0, 1.0, 2.0, &p, 1e-8), Err(Error::Degenerate(_))));
    }

    #[test]
    fn two_term_boundary_series_is_the_ball_solution() {
        // w = c·(b² − r²)/(2b) solves the equation exactly on the ball of radius b.
        let p = AnnulusProblem::new(1.0, 4.0, 5, 3).unwrap();
        let c = p.boundary_slope();
        let c2 = -c / (2.0 * p.b);
        for d in [1e-4, 1e-2, 0.5, 2.0] {
            let r = p.b - d;
            let w = c * d + c2 * d * d;
            let wp = -(c + 2.0 * c2 * d);
            let wpp = 2.0 * c2;
            let e = radial_eigenvalues(w, wp, r).unwrap();
            let dev = sigma_of_multiset(e.mu_r(wpp), e.mu_t, p.n, p.k).unwrap() - 1.0;
            assert!(dev.abs() < 1e-13, "d={d}: {dev}");
            assert!((ode_rhs(w, wp, r, &p, 1e-8).unwrap() - wpp).abs() < 1e-10);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn radial_matches_ambient(w in 0.1f64..3.0, wp in -2.0f64..2.0, wpp in -5.0f64..5.0,
                                      r in 0.2f64..5.0, n in 3usize..8) {
                let e = radial_eigenvalues(w, wp, r).unwrap();
                let mut radial = Lambda::radial(e.mu_r(wpp), e.mu_t, n).unwrap().into_vec();
                radial.sort_by(f64::total_cmp);
                let jet = ConformalJet::radial(w, wp, wpp, r, n).unwrap();
                let full = negative_schouten_eigenvalues(&jet).unwrap();
                for (a, b) in radial.iter().zip(full.values()) {
                    prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
                }
            }

            #[test]
            fn rhs_is_self_consistent(w in 0.05f64..3.0, wp in -3.0f64..0.0, r in 0.5f64..5.0,
                                      n in 3usize..7, k_off in 0usize..4) {
                let k = 2 + k_off % (n - 1);
                let p = AnnulusProblem::new(1.0, 2.0, n, k).unwrap();
                let e = radial_eigenvalues(w, wp, r).unwrap();
                prop_assume!(e.mu_t > 1e-3 && e.mu_t < p.isotropic_level());
                let wpp = ode_rhs(w, wp, r, &p, 1e-8).unwrap();
                let l = Lambda::radial(e.mu_r(wpp), e.mu_t, n).unwrap();
                prop_assert!((sigma(&l, k).unwrap() - 1.0).abs() <= 1e-12 * e.mu_r(wpp).abs().max(1.0));
            }
        }
    }
}
