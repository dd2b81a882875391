//! Elementary symmetric polynomials and Gårding cones.
//!
//! `σ_k(λ)` is evaluated by expanding `∏(1 + λ_i x)` one factor at a time
//! and keeping coefficients up to degree `k`, which costs `O(nk)` and never
//! enumerates subsets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported vector length.
pub const MAX_DIM: usize = 32;

/// Default absolute tolerance for boundary detection in [`classify_cone`].
pub const DEFAULT_CONE_TOL: f64 = 1e-10;

/// An eigenvalue vector, the argument of `σ_k` and of the cone tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Lambda(Vec<f64>);

impl Lambda {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.len() > MAX_DIM {
            return Err(Error::Domain(format!(
                "eigenvalue vector length {} outside 1..={MAX_DIM}",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite eigenvalue {bad}")));
        }
        Ok(Lambda(values))
    }

    /// `(μ_r, μ_t, …, μ_t)` with `n − 1` copies of `μ_t`.
    pub fn radial(mu_r: f64, mu_t: f64, n: usize) -> Result<Self> {
        let mut v = vec![mu_t; n];
        if let Some(first) = v.first_mut() {
            *first = mu_r;
        }
        Lambda::new(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for Lambda {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Lambda::new(values)
    }
}

impl From<Lambda> for Vec<f64> {
    fn from(l: Lambda) -> Self {
        l.0
    }
}

impl AsRef<[f64]> for Lambda {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// All of `σ_0, …, σ_k` in one pass. `out[0] = 1`.
pub fn sigma_all(values: &[f64], k: usize) -> Vec<f64> {
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for (i, &x) in values.iter().enumerate() {
        let top = k.min(i + 1);
        for j in (1..=top).rev() {
            e[j] += x * e[j - 1];
        }
    }
    e
}

/// The `k`-th elementary symmetric polynomial, `σ_0 = 1`.
pub fn sigma(lambda: &Lambda, k: usize) -> Result<f64> {
    if k > lambda.len() {
        return Err(Error::Domain(format!(
            "sigma order {k} exceeds dimension {}",
            lambda.len()
        )));
    }
    Ok(sigma_all(lambda.values(), k)[k])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConeLabel {
    Interior,
    Boundary,
    Outside,
}

impl std::fmt::Display for ConeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ConeLabel::Interior => "interior",
            ConeLabel::Boundary => "boundary",
            ConeLabel::Outside => "outside",
        };
        f.write_str(s)
    }
}

/// Position of a vector relative to `Γ_k^+`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeClassification {
    pub label: ConeLabel,
    /// First `j` (1-based) with `σ_j < −tol` when outside, or `|σ_j| ≤ tol`
    /// when on the boundary. `None` for interior points.
    pub witness: Option<usize>,
    /// `σ_1, …, σ_k`.
    pub sigma_values: Vec<f64>,
}

impl ConeClassification {
    pub fn is_interior(&self) -> bool {
        self.label == ConeLabel::Interior
    }

    /// Interior or boundary, i.e. in the closed cone up to tolerance.
    pub fn in_closure(&self) -> bool {
        self.label != ConeLabel::Outside
    }
}

/// Classify from precomputed `σ_1..σ_k`.
pub fn classify_sigmas(sigma_values: Vec<f64>, tol: f64) -> ConeClassification {
    let outside = sigma_values.iter().position(|&s| s < -tol);
    let (label, witness) = match outside {
        Some(j) => (ConeLabel::Outside, Some(j + 1)),
        None => match sigma_values.iter().position(|&s| s <= tol) {
            Some(j) => (ConeLabel::Boundary, Some(j + 1)),
            None => (ConeLabel::Interior, None),
        },
    };
    ConeClassification {
        label,
        witness,
        sigma_values,
    }
}

pub fn classify_cone(lambda: &Lambda, k: usize, tol: f64) -> Result<ConeClassification> {
    if k == 0 || k > lambda.len() {
        return Err(Error::Domain(format!(
            "cone order {k} outside 1..={}",
            lambda.len()
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("cone tolerance must be positive, got {tol}")));
    }
    let all = sigma_all(lambda.values(), k);
    Ok(classify_sigmas(all[1..].to_vec(), tol))
}

/// Binomial coefficient as a float (exact for the sizes used here).
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// `σ_k(μ_r, μ_t, …, μ_t)` in closed form:
/// `C(n−1,k)·μ_t^k + C(n−1,k−1)·μ_t^{k−1}·μ_r`.
pub fn sigma_of_multiset(mu_r: f64, mu_t: f64, n: usize, k: usize) -> Result<f64> {
    if n < 2 || k == 0 || k > n {
        return Err(Error::Domain(format!(
            "multiset sigma needs n >= 2 and 1 <= k <= n, got n={n}, k={k}"
        )));
    }
    let tail = binomial(n - 1, k) * mu_t.powi(k as i32);
    let head = binomial(n - 1, k - 1) * mu_t.powi(k as i32 - 1) * mu_r;
    Ok(tail + head)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_sigma(values: &[f64], k: usize) -> f64 {
        let n = values.len();
        let mut total = 0.0;
        for mask in 0u64..(1u64 << n) {
            if mask.count_ones() as usize == k {
                total += (0..n)
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| values[i])
                    .product::<f64>();
            }
        }
        total
    }

    #[test]
    fn small_examples() {
        let ones = Lambda::new(vec![1.0; 3]).unwrap();
        assert_eq!(sigma(&ones, 1).unwrap(), 3.0);
        let with_zero = Lambda::new(vec![1.0, 1.0, 0.0]).unwrap();
        assert_eq!(sigma(&with_zero, 3).unwrap(), 0.0);
        let l = Lambda::new(vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(brute_sigma(l.values(), 2), 11.0);
        assert_eq!(sigma(&l, 2).unwrap(), 11.0);
        assert_eq!(sigma(&l, 0).unwrap(), 1.0);
    }

    #[test]
    fn rejects_bad_orders_and_vectors() {
        let l = Lambda::new(vec![1.0, 2.0]).unwrap();
        assert!(matches!(sigma(&l, 3), Err(Error::Domain(_))));
        assert!(classify_cone(&l, 0, 1e-10).is_err());
        assert!(classify_cone(&l, 1, 0.0).is_err());
        assert!(Lambda::new(vec![]).is_err());
        assert!(Lambda::new(vec![f64::NAN]).is_err());
        assert!(Lambda::new(vec![0.0; MAX_DIM + 1]).is_err());
    }

    #[test]
    fn cone_examples() {
        for n in 1..=6 {
            let ones = Lambda::new(vec![1.0; n]).unwrap();
            for k in 1..=n {
                let c = classify_cone(&ones, k, DEFAULT_CONE_TOL).unwrap();
                assert_eq!(c.label, ConeLabel::Interior);
                assert_eq!(c.witness, None);
            }
            let neg = Lambda::new(vec![-1.0; n]).unwrap();
            let c = classify_cone(&neg, 1, DEFAULT_CONE_TOL).unwrap();
            assert_eq!(c.label, ConeLabel::Outside);
            assert_eq!(c.witness, Some(1));
        }
        let mut e1 = vec![0.0; 4];
        e1[0] = 1.0;
        let e1 = Lambda::new(e1).unwrap();
        let c = classify_cone(&e1, 2, DEFAULT_CONE_TOL).unwrap();
        assert_eq!(c.label, ConeLabel::Boundary);
        assert_eq!(c.witness, Some(2));
        assert_eq!(c.sigma_values, vec![1.0, 0.0]);
    }

    #[test]
    fn e1_is_interior_only_for_k1() {
        for n in 2..=8 {
            let mut v = vec![0.0; n];
            v[0] = 1.0;
            let l = Lambda::new(v).unwrap();
            for k in 1..=n {
                let label = classify_cone(&l, k, DEFAULT_CONE_TOL).unwrap().label;
                if k == 1 {
                    assert_eq!(label, ConeLabel::Interior);
                } else {
                    assert_eq!(label, ConeLabel::Boundary);
                }
            }
        }
    }

    #[test]
    fn multiset_examples() {
        // sigma((2,1,1), 2) by enumeration: 2 + 2 + 1
        assert_eq!(brute_sigma(&[2.0, 1.0, 1.0], 2), 5.0);
        assert_eq!(sigma_of_multiset(2.0, 1.0, 3, 2).unwrap(), 5.0);
        for n in 2..=7 {
            for k in 1..=n {
                let t = 0.37;
                let v = sigma_of_multiset(t, t, n, k).unwrap();
                let expected = binomial(n, k) * t.powi(k as i32);
                assert!((v - expected).abs() <= 1e-14 * expected.abs());
                if k >= 2 {
                    assert_eq!(sigma_of_multiset(3.0, 0.0, n, k).unwrap(), 0.0);
                }
            }
        }
        assert!(sigma_of_multiset(1.0, 1.0, 1, 1).is_err());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(4, 0), 1.0);
        assert_eq!(binomial(3, 4), 0.0);
        assert_eq!(binomial(32, 16), 601080390.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn vec_strategy() -> impl Strategy<Value = Vec<f64>> {
            proptest::collection::vec(-3.0f64..3.0, 1..=8)
        }

        proptest! {
            #[test]
            fn recurrence_matches_enumeration(v in vec_strategy()) {
                let l = Lambda::new(v.clone()).unwrap();
                for k in 0..=v.len() {
                    let fast = sigma(&l, k).unwrap();
                    let slow = brute_sigma(&v, k);
                    let scale = v.iter().map(|x| x.abs()).fold(1.0, f64::max).powi(k as i32)
                        * binomial(v.len(), k);
                    prop_assert!((fast - slow).abs() <= 1e-12 * scale);
                }
            }

            #[test]
            fn permutation_invariant(v in vec_strategy(), seed in any::<u64>()) {
                let mut w = v.clone();
                let len = w.len();
                let mut s = seed;
                for i in (1..len).rev() {
                    s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    w.swap(i, (s >> 33) as usize % (i + 1));
                }
                let a = Lambda::new(v).unwrap();
                let b = Lambda::new(w).unwrap();
                for k in 0..=len {
                    let x = sigma(&a, k).unwrap();
                    let y = sigma(&b, k).unwrap();
                    prop_assert!((x - y).abs() <= 1e-13 * (1.0 + x.abs()) * binomial(len, k));
                }
            }

            #[test]
            fn cone_nesting(v in vec_strategy()) {
                let l = Lambda::new(v.clone()).unwrap();
                for k in 1..=v.len() {
                    let c = classify_cone(&l, k, DEFAULT_CONE_TOL).unwrap();
                    if c.is_interior() {
                        prop_assert!(c.sigma_values[0] > 0.0);
                        for j in 1..=k {
                            prop_assert!(classify_cone(&l, j, DEFAULT_CONE_TOL).unwrap().is_interior());
                        }
                    }
                }
            }

            #[test]
            fn multiset_matches_general(mu_r in -2.0f64..2.0, mu_t in -2.0f64..2.0, n in 2usize..9) {
                for k in 1..=n {
                    let closed = sigma_of_multiset(mu_r, mu_t, n, k).unwrap();
                    let general = sigma(&Lambda::radial(mu_r, mu_t, n).unwrap(), k).unwrap();
                    let scale = 1.0 + general.abs().max(binomial(n, k) * 2f64.powi(k as i32) * 1e-3);
                    prop_assert!((closed - general).abs() <= 1e-12 * scale);
                }
            }
        }
    }
}
