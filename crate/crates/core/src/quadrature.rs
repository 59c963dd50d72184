//! Gauss rules on `[0, 1]` for the arcsine and Beta-type weights.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nodes and positive weights representing a probability measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub order: usize,
}

impl QuadratureRule {
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Gauss-Chebyshev (first kind) rule for the arcsine law `dλ / (π √(λ(1−λ)))`.
pub fn gauss_chebyshev_arcsine(order: usize) -> QuadratureRule {
    let n = order as f64;
    let nodes = (1..=order)
        .map(|k| 0.5 * (1.0 + ((2 * k - 1) as f64 * PI / (2.0 * n)).cos()))
        .collect();
    QuadratureRule {
        nodes,
        weights: vec![1.0 / n; order],
        order,
    }
}

/// Gauss-Jacobi rule for the weight `(1−x)^α (1+x)^β` on `[−1, 1]`, mapped to
/// `λ = (1+x)/2` on `[0, 1]`. Weights are the squared leading components of the
/// Jacobi-matrix eigenvectors (Golub-Welsch), so they sum to one; the caller
/// supplies the normalization of the target density.
pub fn gauss_jacobi_unit(order: usize, alpha: f64, beta: f64) -> Result<QuadratureRule> {
    if !(alpha > -1.0 && beta > -1.0) {
        return Err(Error::InvalidArgument(format!(
            "Jacobi exponents must exceed -1 (alpha {alpha}, beta {beta})"
        )));
    }
    let n = order;
    let ab = alpha + beta;
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let s = 2.0 * kf + ab;
        jacobi[(k, k)] = if s.abs() < 1e-14 {
            // k = 0 with α + β = 0
            (beta - alpha) / (ab + 2.0)
        } else {
            (beta * beta - alpha * alpha) / (s * (s + 2.0))
        };
        if k >= 1 {
            // Off-diagonal entry b_k; at k = 1 the factor (k+α+β)/(2k+α+β−1) is identically 1.
            let ratio = if k == 1 { 1.0 } else { (kf + ab) / (s - 1.0) };
            let b2 = 4.0 * kf * (kf + alpha) * (kf + beta) / (s * s * (s + 1.0)) * ratio;
            let b = b2.sqrt();
            jacobi[(k, k - 1)] = b;
            jacobi[(k - 1, k)] = b;
        }
    }
    let eigen = SymmetricEigen::try_new(jacobi, f64::EPSILON, 100_000).ok_or_else(|| {
        Error::Eigensolver {
            matrix: format!("Jacobi matrix of order {n}"),
        }
    })?;
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let x = eigen.eigenvalues[k].clamp(-1.0, 1.0);
            let v0 = eigen.eigenvectors[(0, k)];
            (0.5 * (1.0 + x), v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(QuadratureRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
        order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn chebyshev_moments() {
        let rule = gauss_chebyshev_arcsine(64);
        assert_abs_diff_eq!(rule.total_mass(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(rule.integrate(|x| x), 0.5, epsilon = 1e-14);
        // second moment of the arcsine law is 3/8
        assert_abs_diff_eq!(rule.integrate(|x| x * x), 0.375, epsilon = 1e-14);
        assert!(rule.nodes.iter().all(|&x| x > 0.0 && x < 1.0));
    }

    #[test]
    fn legendre_case_integrates_polynomials() {
        // α = β = 0 is the uniform density on [0, 1]
        let rule = gauss_jacobi_unit(10, 0.0, 0.0).unwrap();
        assert_abs_diff_eq!(rule.total_mass(), 1.0, epsilon = 1e-13);
        for p in 0..19 {
            assert_abs_diff_eq!(rule.integrate(|x| x.powi(p)), 1.0 / (p as f64 + 1.0), epsilon = 1e-13);
        }
    }

    #[test]
    fn jacobi_half_exponents_match_chebyshev() {
        let j = gauss_jacobi_unit(32, -0.5, -0.5).unwrap();
        let c = gauss_chebyshev_arcsine(32);
        let mut cn = c.nodes.clone();
        cn.sort_by(f64::total_cmp);
        for (a, b) in j.nodes.iter().zip(&cn) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-13);
        }
        for w in &j.weights {
            assert_abs_diff_eq!(*w, 1.0 / 32.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn rejects_non_integrable_exponents() {
        assert!(gauss_jacobi_unit(8, -1.0, 0.0).is_err());
    }
}
