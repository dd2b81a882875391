use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use syl_core::expansion::{
    exponent_necessity_scan, expansion_coefficient, log_grid, verify_limit, ExpansionInput, ExpansionResult,
    LimitCheck, ScanRow,
};
use syl_core::io::{fmt_f64, load_solution, prefix_paths, read_json, save_solution};
use syl_core::linalg::orthogonal_from;
use syl_core::radial::{
    fit_holder_exponent, solve_annulus as solve, AnnulusProblem, BoundaryHits, HolderFit, InvariantCheck, Junction,
    RadialSolution, ShootingInfo, Side, SolverOptions, StartPoint,
};
use syl_core::singular::{
    minimality_check_k2, singular_alpha_roots, theorem_a_residual, MinimalityCheck, RootPair, SurfacePointData,
    TheoremAResidual,
};
use syl_core::{Error, Result};

use crate::report::{hash_inputs, read_bytes, Check, Compare, Report};
use crate::{ExpansionArgs, FitArgs, SolveArgs, SweepArgs, VerifyArgs};

fn invariant_to_check(ic: &InvariantCheck) -> Check {
    let compare = match ic.name.as_str() {
        "positivity" | "normal_derivative_ordering" => Compare::Above,
        _ => Compare::AtMost,
    };
    Check {
        name: ic.name.clone(),
        value: ic.value,
        threshold: ic.threshold,
        compare,
        passed: ic.passed,
    }
}

fn solution_checks(sol: &RadialSolution) -> Vec<Check> {
    let mut checks: Vec<Check> = sol.check_invariants().iter().map(invariant_to_check).collect();
    if let Some(j) = &sol.junction {
        let rel = (j.r_star / sol.problem.geometric_mean() - 1.0).abs();
        checks.push(Check::new("junction_at_geometric_mean", rel, Compare::AtMost, 1e-3));
    }
    checks
}

fn options(tol: f64, eps0: Option<f64>) -> SolverOptions {
    SolverOptions {
        ode_tol: tol,
        eps0,
        ..SolverOptions::default()
    }
}

#[derive(Serialize)]
struct SolveResult {
    junction: Option<Junction>,
    start: StartPoint,
    boundary_hits: BoundaryHits,
    shooting: ShootingInfo,
    max_abs_residual: f64,
    inner_points: usize,
    outer_points: usize,
    csv: PathBuf,
    sidecar: PathBuf,
}

pub fn solve_annulus(args: SolveArgs) -> Result<u8> {
    let problem = AnnulusProblem::new(args.a, args.b, args.n, args.k)?;
    let opts = options(args.tol, args.eps0);
    info!("solving a={} b={} n={} k={}", args.a, args.b, args.n, args.k);
    let sol = solve(&problem, &opts)?;
    let (csv, sidecar) = save_solution(&sol, &args.out_prefix)?;
    let checks = solution_checks(&sol);
    let result = SolveResult {
        junction: sol.junction,
        start: sol.start,
        boundary_hits: sol.boundary_hits,
        shooting: sol.shooting,
        max_abs_residual: sol.max_abs_residual(),
        inner_points: sol.inner.len(),
        outer_points: sol.outer.len(),
        csv,
        sidecar,
    };
    let seed = args.seed;
    let mut report_path = args.out_prefix.as_os_str().to_owned();
    report_path.push(".report.json");
    let report = Report::new("solve-annulus", args, &[], seed, checks, result)?;
    report.write(Path::new(&report_path))?;
    print!("{}", report.summary());
    match &report.result.junction {
        Some(j) => println!("junction r_* = {}  w0 = {}", fmt_f64(j.r_star), fmt_f64(j.w0)),
        None => println!("junction: none (k = 1, smooth solution)"),
    }
    Ok(if report.pass { 0 } else { 3 })
}

#[derive(Serialize)]
struct VerifyResult {
    k: usize,
    point: SurfacePointData,
    /// Junction record of the solution the point came from, if any.
    junction: Option<Junction>,
    roots: RootPair,
    at_alpha_plus: TheoremAResidual,
    at_alpha_minus: TheoremAResidual,
    minimality: Option<MinimalityCheck>,
    frames_checked: usize,
    frame_deviation: f64,
}

pub fn verify_sigma(args: VerifyArgs) -> Result<u8> {
    let mut inputs = Vec::new();
    let (point, junction, k) = match (&args.input, &args.from_solution) {
        (Some(path), _) => {
            inputs.push(read_bytes(path)?);
            let point: SurfacePointData = read_json(path)?;
            let k = args
                .k
                .ok_or_else(|| Error::Configuration("--k is required with --input".into()))?;
            (point, None, k)
        }
        (None, Some(prefix)) => {
            let (csv, json) = prefix_paths(prefix);
            inputs.push(read_bytes(&json)?);
            inputs.push(read_bytes(&csv)?);
            let sol = load_solution(prefix)?;
            let point = SurfacePointData::from_junction(&sol)?;
            (point, sol.junction, args.k.unwrap_or(sol.problem.k))
        }
        (None, None) => return Err(Error::Configuration("one of --input or --from-solution is required".into())),
    };
    point.validate()?;
    let roots = singular_alpha_roots(&point, k)?;
    let at_alpha_plus = theorem_a_residual(&point, roots.alpha_plus, k)?;
    let at_alpha_minus = theorem_a_residual(&point, roots.alpha_minus, k)?;

    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let m = point.n - 1;
    let mut deviation: f64 = 0.0;
    for _ in 0..args.frames {
        let entries: Vec<f64> = (0..m * m).map(|_| rand::Rng::random_range(&mut rng, -1.0..1.0)).collect();
        let moved = point.change_frame(&orthogonal_from(&entries, m));
        let r = singular_alpha_roots(&moved, k)?;
        let scale = 1.0 + roots.alpha_plus.abs().max(roots.alpha_minus.abs());
        deviation = deviation
            .max((r.alpha_plus - roots.alpha_plus).abs() / scale)
            .max((r.alpha_minus - roots.alpha_minus).abs() / scale);
        for alpha in [roots.alpha_plus, roots.alpha_minus] {
            let a = theorem_a_residual(&point, alpha, k)?.residual;
            let b = theorem_a_residual(&moved, alpha, k)?.residual;
            deviation = deviation.max((a - b).abs() / (1.0 + a.abs()));
        }
    }

    let mut checks = vec![
        Check::new("residual_at_alpha_plus", at_alpha_plus.residual.abs(), Compare::AtMost, 1e-6),
        Check::new("residual_at_alpha_minus", at_alpha_minus.residual.abs(), Compare::AtMost, 1e-6),
        Check::flag("cone_ok_at_alpha_plus", at_alpha_plus.cone_ok),
        Check::flag("cone_ok_at_alpha_minus", at_alpha_minus.cone_ok),
        Check::new("frame_invariance", deviation, Compare::AtMost, 1e-10),
    ];
    let minimality = if k == 2 {
        let mc = minimality_check_k2(&point, &roots)?;
        if !roots.degenerate {
            checks.push(Check::new("mean_curvature_plus", mc.h_plus, Compare::Below, 0.0));
            checks.push(Check::new("mean_curvature_minus_reversed", mc.h_minus_reversed, Compare::Above, 0.0));
        }
        Some(mc)
    } else {
        None
    };
    if let Some(j) = &junction {
        let scale = 1.0f64.max(j.w0);
        checks.push(Check::new(
            "roots_match_junction",
            (roots.alpha_plus - j.dnu_w_plus).abs().max((roots.alpha_minus - j.dnu_w_minus).abs()) / scale,
            Compare::AtMost,
            1e-6,
        ));
    }
    let result = VerifyResult {
        k,
        point,
        junction,
        roots,
        at_alpha_plus,
        at_alpha_minus,
        minimality,
        frames_checked: args.frames,
        frame_deviation: deviation,
    };
    let report_path = args.report.clone();
    let seed = args.seed;
    let mut report = Report::new("verify-sigma", args, &inputs, seed, checks, result)?;
    if report.result.roots.degenerate {
        let msg = "degenerate: double root, no jump in the normal derivative; minimality not asserted".to_string();
        warn!("{msg}");
        report.warnings.push(msg);
    }
    if k >= 3 {
        report
            .warnings
            .push("no minimality criterion is known for k >= 3; sign data only".into());
    }
    report.write(&report_path)?;
    print!("{}", report.summary());
    if let Some(mc) = &report.result.minimality {
        println!("minimal = {}", mc.minimal);
    }
    Ok(0)
}

#[derive(Serialize)]
struct ExpansionReportBody {
    input: ExpansionInput,
    coefficient: ExpansionResult,
    limit: LimitCheck,
    scan: Option<Vec<ScanRow>>,
}

pub fn expansion(args: ExpansionArgs) -> Result<u8> {
    let mut inputs = Vec::new();
    let input = match (&args.input, &args.from_solution) {
        (Some(path), _) => {
            inputs.push(read_bytes(path)?);
            read_json::<ExpansionInput>(path)?
        }
        (None, Some(prefix)) => {
            let (csv, json) = prefix_paths(prefix);
            inputs.push(read_bytes(&json)?);
            inputs.push(read_bytes(&csv)?);
            let sol = load_solution(prefix)?;
            if sol.problem.k != 2 {
                return Err(Error::Configuration("the expansion is for k = 2 solutions".into()));
            }
            match args.side.parse::<Side>()? {
                Side::Outer => ExpansionInput::annulus_outer(&sol)?,
                Side::Inner => ExpansionInput::annulus_inner(&sol)?,
            }
        }
        (None, None) => return Err(Error::Configuration("one of --input or --from-solution is required".into())),
    };
    let coefficient = expansion_coefficient(&input)?;
    let grid = log_grid(args.dmax, args.dmin, args.points)?;
    let limit = verify_limit(&input, &ExpansionResult { p: args.p, ..coefficient }, &grid)?;
    let scan = if args.scan_p {
        Some(exponent_necessity_scan(&input, &args.p_grid, &grid)?)
    } else {
        None
    };

    let mut checks = vec![
        Check::new("w_star", coefficient.w_star, Compare::Below, 0.0),
        Check::new("limit_residual", limit.limit_residual, Compare::AtMost, 1e-3),
        Check::flag("cone_ok_near", limit.cone_ok_near),
        Check::new("residual_slope", limit.slope, Compare::Above, 0.0),
    ];
    if let Some(rows) = &scan {
        let only_three_halves = rows.iter().all(|r| r.pass == ((r.p - 1.5).abs() < 1e-12));
        checks.push(Check::flag("scan_only_three_halves_passes", only_three_halves));
    }
    if let Some(path) = &args.csv {
        let mut text = String::from("d,sigma1,sigma2,residual,cone\n");
        for pt in &limit.points {
            text.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt_f64(pt.d),
                fmt_f64(pt.sigma1),
                fmt_f64(pt.sigma2),
                fmt_f64(pt.residual),
                pt.cone
            ));
        }
        std::fs::write(path, text).map_err(|e| Error::Configuration(format!("{}: {e}", path.display())))?;
    }
    let precision_warning = limit.precision_warning;
    let body = ExpansionReportBody {
        input,
        coefficient,
        limit,
        scan,
    };
    let report_path = args.report.clone();
    let seed = args.seed;
    let mut report = Report::new("expansion", args, &inputs, seed, checks, body)?;
    if precision_warning {
        report
            .warnings
            .push("finite-difference precision: residual reverses direction on the small-d half of the grid".into());
    }
    report.write(&report_path)?;
    print!("{}", report.summary());
    println!(
        "p = {}  w_* = {}  slope = {}",
        report.result.limit.p,
        fmt_f64(report.result.coefficient.w_star),
        fmt_f64(report.result.limit.slope)
    );
    Ok(0)
}

#[derive(Serialize)]
struct FitResult {
    k: usize,
    fit: HolderFit,
    /// `gamma ± 1.96·stderr`.
    confidence: (f64, f64),
    csv: PathBuf,
}

pub fn fit_exponent(args: FitArgs) -> Result<u8> {
    let side: Side = args.side.parse()?;
    let (csv_in, json_in) = prefix_paths(&args.solution);
    let inputs = vec![read_bytes(&json_in)?, read_bytes(&csv_in)?];
    let sol = load_solution(&args.solution)?;
    let fit = fit_holder_exponent(&sol, side)?;
    let k = sol.problem.k;

    let stem = format!("{}.{}.holder", args.solution.display(), side.as_str());
    let csv = args.csv.clone().unwrap_or_else(|| PathBuf::from(format!("{stem}.csv")));
    let mut text = String::from("log_d,log_dwp\n");
    for (x, y) in &fit.points {
        text.push_str(&format!("{},{}\n", fmt_f64(*x), fmt_f64(*y)));
    }
    std::fs::write(&csv, text).map_err(|e| Error::Configuration(format!("{}: {e}", csv.display())))?;

    let checks = vec![
        Check::new("gamma_minus_one_over_k", (fit.gamma - 1.0 / k as f64).abs(), Compare::AtMost, 0.05),
        Check::new("points_in_window", fit.points.len() as f64, Compare::AtLeast, 20.0),
    ];
    let confidence = (fit.gamma - 1.96 * fit.stderr, fit.gamma + 1.96 * fit.stderr);
    let report_path = args.report.clone().unwrap_or_else(|| PathBuf::from(format!("{stem}.json")));
    let seed = args.seed;
    let result = FitResult { k, fit, confidence, csv };
    let report = Report::new("fit-exponent", args, &inputs, seed, checks, result)?;
    report.write(&report_path)?;
    print!("{}", report.summary());
    println!(
        "gamma = {} (95% window [{}, {}], r2 = {})",
        fmt_f64(report.result.fit.gamma),
        fmt_f64(report.result.confidence.0),
        fmt_f64(report.result.confidence.1),
        fmt_f64(report.result.fit.r2)
    );
    Ok(0)
}

#[derive(Serialize, Clone, Copy)]
struct SweepParams {
    a: f64,
    b: f64,
    n: usize,
    k: usize,
    tol: f64,
    eps0: Option<f64>,
}

#[derive(Serialize)]
struct SweepRow {
    params: SweepParams,
    key: String,
    exit_code: u8,
    invariants_pass: bool,
    junction: Option<Junction>,
    error: Option<String>,
}

fn sweep_one(p: SweepParams, out_dir: &Path) -> SweepRow {
    let key = hash_inputs(&p, &[]).map(|h| h[..16].to_string()).unwrap_or_default();
    let run = || -> Result<RadialSolution> {
        let problem = AnnulusProblem::new(p.a, p.b, p.n, p.k)?;
        let sol = solve(&problem, &options(p.tol, p.eps0))?;
        save_solution(&sol, &out_dir.join(&key))?;
        Ok(sol)
    };
    info!("sweep: a={} b={} n={} k={} -> {key}", p.a, p.b, p.n, p.k);
    match run() {
        Ok(sol) => {
            let ok = solution_checks(&sol).iter().all(|c| c.passed);
            SweepRow {
                params: p,
                key,
                exit_code: if ok { 0 } else { 3 },
                invariants_pass: ok,
                junction: sol.junction,
                error: None,
            }
        }
        Err(e) => SweepRow {
            params: p,
            key,
            exit_code: e.exit_code() as u8,
            invariants_pass: false,
            junction: None,
            error: Some(e.to_string()),
        },
    }
}

pub fn sweep(args: SweepArgs) -> Result<u8> {
    if args.jobs == 0 {
        return Err(Error::Configuration("--jobs must be at least 1".into()));
    }
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| Error::Configuration(format!("{}: {e}", args.out_dir.display())))?;
    let mut params = Vec::new();
    for &a in &args.a {
        for &b in &args.b {
            for &n in &args.n {
                for &k in &args.k {
                    params.push(SweepParams {
                        a,
                        b,
                        n,
                        k,
                        tol: args.tol,
                        eps0: args.eps0,
                    });
                }
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| Error::Computation(format!("thread pool: {e}")))?;
    let out_dir = args.out_dir.clone();
    let rows: Vec<SweepRow> = pool.install(|| params.par_iter().map(|p| sweep_one(*p, &out_dir)).collect());

    let mut keys = BTreeMap::new();
    for row in &rows {
        if let Some(prev) = keys.insert(row.key.clone(), row.params) {
            warn!("duplicate sweep key {} for {:?} / {:?}", row.key, serde_json::to_string(&prev).ok(), serde_json::to_string(&row.params).ok());
        }
    }
    let checks: Vec<Check> = rows
        .iter()
        .map(|r| {
            Check::flag(
                format!("{} a={} b={} n={} k={}", r.key, r.params.a, r.params.b, r.params.n, r.params.k),
                r.exit_code == 0,
            )
        })
        .collect();
    let worst = rows.iter().map(|r| r.exit_code).max().unwrap_or(0);
    let seed = args.seed;
    let report_path = args.out_dir.join("sweep.report.json");
    let report = Report::new("sweep", args, &[], seed, checks, rows)?;
    report.write(&report_path)?;
    print!("{}", report.summary());
    Ok(worst)
}
