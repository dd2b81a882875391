//! Polynomial interpolation at Chebyshev nodes and companion-matrix roots.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A real root and its multiplicity after clustering.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealRoot {
    pub value: f64,
    pub multiplicity: usize,
}

/// Chebyshev nodes of the first kind on `[-1, 1]`.
pub fn chebyshev_nodes(count: usize) -> Vec<f64> {
    (0..count)
        .map(|j| (std::f64::consts::PI * (j as f64 + 0.5) / count as f64).cos())
        .collect()
}

/// Monomial coefficients (lowest degree first) of the degree-`values.len()-1`
/// polynomial interpolating `values` at [`chebyshev_nodes`].
pub fn interpolate_chebyshev(values: &[f64]) -> Vec<f64> {
    let m = values.len();
    let nodes = chebyshev_nodes(m);
    // Chebyshev-basis coefficients via the discrete orthogonality relation.
    let mut cheb = vec![0.0; m];
    for (deg, c) in cheb.iter_mut().enumerate() {
        let s: f64 = nodes
            .iter()
            .zip(values)
            .map(|(&t, &f)| f * (deg as f64 * t.acos()).cos())
            .sum();
        *c = 2.0 * s / m as f64;
    }
    cheb[0] *= 0.5;

    // Monomial expansion with T_{j+1} = 2t T_j − T_{j−1}.
    let mut mono = vec![0.0; m];
    let mut prev = vec![0.0; m];
    let mut cur = vec![0.0; m];
    prev[0] = 1.0;
    if m > 1 {
        cur[1] = 1.0;
    }
    for (deg, &c) in cheb.iter().enumerate() {
        if deg >= 2 {
            let mut next: Vec<f64> = prev.iter().map(|v| -v).collect();
            for i in 0..m - 1 {
                next[i + 1] += 2.0 * cur[i];
            }
            prev = std::mem::replace(&mut cur, next);
        }
        let basis = if deg == 0 { &prev } else { &cur };
        for (acc, b) in mono.iter_mut().zip(basis) {
            *acc += c * b;
        }
    }
    mono
}

pub fn eval_monomial(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// All complex roots of the polynomial with monomial `coeffs` (lowest
/// first), as eigenvalues of the companion matrix.
pub fn companion_roots(coeffs: &[f64]) -> Result<Vec<(f64, f64)>> {
    let deg = coeffs.len().saturating_sub(1);
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[deg];
    if lead == 0.0 || !lead.is_finite() {
        return Err(Error::Computation(format!("polynomial leading coefficient is {lead}")));
    }
    let mut c = DMatrix::zeros(deg, deg);
    for i in 1..deg {
        c[(i, i - 1)] = 1.0;
    }
    for i in 0..deg {
        c[(i, deg - 1)] = -coeffs[i] / lead;
    }
    let eig = c.complex_eigenvalues();
    let roots: Vec<(f64, f64)> = eig.iter().map(|z| (z.re, z.im)).collect();
    if roots.iter().any(|(re, im)| !re.is_finite() || !im.is_finite()) {
        return Err(Error::Computation("companion eigenvalues not finite".into()));
    }
    Ok(roots)
}

/// Groups roots closer than `radius` and keeps the clusters whose centre
/// is real within `radius`. Cluster centres are arithmetic means, which
/// are well conditioned even when a multiple root splits.
pub fn cluster_real_roots(roots: &[(f64, f64)], radius: f64) -> Vec<RealRoot> {
    let n = roots.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut j = i;
        while p[j] != r {
            let next = p[j];
            p[j] = r;
            j = next;
        }
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            let d = (roots[i].0 - roots[j].0).hypot(roots[i].1 - roots[j].1);
            if d <= radius {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let mut out: Vec<RealRoot> = groups
        .values()
        .filter_map(|members| {
            let m = members.len() as f64;
            let re = members.iter().map(|&i| roots[i].0).sum::<f64>() / m;
            let im = members.iter().map(|&i| roots[i].1).sum::<f64>() / m;
            (im.abs() <= radius).then_some(RealRoot {
                value: re,
                multiplicity: members.len(),
            })
        })
        .collect();
    out.sort_by(|a, b| a.value.total_cmp(&b.value));
    out
}
