#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use syl_core::linalg::SymMatrix;
use syl_core::radial::{GridPoint, Junction, Side};
use syl_core::singular::SurfacePointData;

/// σ_k by summing over all k-subsets.
pub fn brute_sigma(values: &[f64], k: usize) -> (f64, f64) {
    fn rec(v: &[f64], k: usize, start: usize, prod: f64, abs: f64, acc: &mut (f64, f64)) {
        if k == 0 {
            acc.0 += prod;
            acc.1 += abs;
            return;
        }
        for i in start..=v.len() - k {
            rec(v, k - 1, i + 1, prod * v[i], abs * v[i].abs(), acc);
        }
    }
    let mut acc = (0.0, 0.0);
    if k <= values.len() {
        rec(values, k, 0, 1.0, 1.0, &mut acc);
    }
    acc
}

pub fn random_sym(rng: &mut ChaCha8Rng, m: usize, scale: f64) -> SymMatrix {
    let mut a = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let v = rng.random_range(-scale..scale);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    SymMatrix::from_upper(a).unwrap()
}

pub fn random_spd(rng: &mut ChaCha8Rng, m: usize) -> SymMatrix {
    let b = DMatrix::from_fn(m, m, |_, _| rng.random_range(-0.6..0.6));
    SymMatrix::from_upper(&b * b.transpose() + DMatrix::identity(m, m) * 0.5).unwrap()
}

/// Random point data with `H_sigma` set consistently.
pub fn random_point(rng: &mut ChaCha8Rng, n: usize, orthonormal: bool) -> SurfacePointData {
    let m = n - 1;
    let metric = if orthonormal { SymMatrix::identity(m) } else { random_spd(rng, m) };
    let second_fund = random_sym(rng, m, 1.0);
    let h_sigma = metric
        .inverse()
        .unwrap()
        .as_matrix()
        .component_mul(second_fund.as_matrix())
        .sum();
    SurfacePointData {
        n,
        w0: rng.random_range(0.2..3.0),
        grad_w0: (0..m).map(|_| rng.random_range(-1.0..1.0)).collect(),
        hess_w0: random_sym(rng, m, 1.0),
        second_fund,
        metric,
        h_sigma,
    }
}

pub fn random_orthogonal(rng: &mut ChaCha8Rng, m: usize) -> DMatrix<f64> {
    let entries: Vec<f64> = (0..m * m).map(|_| rng.random_range(-1.0..1.0)).collect();
    syl_core::linalg::orthogonal_from(&entries, m)
}

/// One-sided `w′` at the junction estimated from the grid alone, by least
/// squares on `w′ = α + c₁s^{1/k} + c₂s^{2/k}` over `s ≤ 1e−4·r_*`.
pub fn extrapolated_slope(grid: &[GridPoint], j: &Junction, k: usize, _side: Side) -> f64 {
    let e = 1.0 / k as f64;
    let rows: Vec<(f64, f64)> = grid
        .iter()
        .map(|g| ((g.r - j.r_star).abs(), g.wp))
        .filter(|(s, _)| *s > 0.0 && *s <= 1e-4 * j.r_star)
        .collect();
    let a = DMatrix::from_fn(rows.len(), 3, |i, c| rows[i].0.powf(c as f64 * e));
    let b = nalgebra::DVector::from_iterator(rows.len(), rows.iter().map(|r| r.1));
    let sol = a.svd(true, true).solve(&b, 1e-15).unwrap();
    sol[0]
}
