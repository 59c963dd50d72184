//! The 2×2 counterexample separating the Hellinger barycenter from the power mean.
//!
//! For `A₁ = diag(4, 1)`, `A₂ = ½[[5, 3], [3, 5]]` with equal weights and the
//! arcsine generator, the barycenter `X̂₀` does not satisfy
//! `X = ½(A₁ # X + A₂ # X)`, the equation solved by the power mean of order ½.

use std::time::Instant;

use serde::Serialize;

use crate::barycenter::{residual, solve_barycenter, SolverOptions, WeightedEnsemble};
use crate::divergence::DivergenceSpec;
use crate::error::Result;
use crate::fixed_point::{power_mean_map, solve_power_mean};
use crate::matrix::{frobenius_dist, PositiveDefiniteMatrix};

/// Reference barycenter, six significant digits.
pub const REFERENCE_BARYCENTER: [[f64; 2]; 2] = [[2.99035, 0.634419], [0.634419, 1.72151]];

/// Reference value of `½(A₁ # X̂₀ + A₂ # X̂₀)`.
pub const REFERENCE_MAP_IMAGE: [[f64; 2]; 2] = [[3.02915, 0.673215], [0.673215, 1.68272]];

/// Entrywise agreement required with the six-digit reference values.
pub const ENTRY_TOLERANCE: f64 = 1e-3;

/// Minimal Frobenius separation demanded of the non-coincidence.
pub const MIN_GAP: f64 = 0.03;

/// Largest imaginary part allowed in the (complex arithmetic) barycenter.
pub const MAX_IMAGINARY: f64 = 1e-8;

/// Largest stationarity residual accepted at the computed barycenter.
pub const MAX_RESIDUAL: f64 = 1e-6;

pub fn ensemble() -> WeightedEnsemble {
    WeightedEnsemble::uniform(vec![
        PositiveDefiniteMatrix::from_diagonal(&[4.0, 1.0]).expect("diag(4, 1)"),
        PositiveDefiniteMatrix::from_real_rows(&[vec![2.5, 1.5], vec![1.5, 2.5]]).expect("A2"),
    ])
    .expect("two members with weight 1/2")
}

#[derive(Clone, Debug, Serialize)]
pub struct Comparison {
    pub computed: [[f64; 2]; 2],
    pub reference: [[f64; 2]; 2],
    pub deltas: [[f64; 2]; 2],
    pub max_delta: f64,
    pub matches: bool,
}

impl Comparison {
    fn new(m: &PositiveDefiniteMatrix, reference: [[f64; 2]; 2]) -> Self {
        let mut computed = [[0.0; 2]; 2];
        let mut deltas = [[0.0; 2]; 2];
        let mut max_delta = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                computed[i][j] = m.get(i, j).re;
                deltas[i][j] = computed[i][j] - reference[i][j];
                max_delta = max_delta.max(deltas[i][j].abs());
            }
        }
        Self {
            computed,
            reference,
            deltas,
            max_delta,
            matches: max_delta <= ENTRY_TOLERANCE,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CounterexampleReport {
    pub barycenter: Comparison,
    pub map_at_barycenter: Comparison,
    /// `‖½(A₁ # X̂₀ + A₂ # X̂₀) − X̂₀‖_F`.
    pub map_gap: f64,
    /// Power mean of order ½, the fixed point of the map.
    pub power_mean: [[f64; 2]; 2],
    /// `‖P − X̂₀‖_F`.
    pub power_mean_gap: f64,
    pub residual: f64,
    pub iterations: usize,
    pub max_imaginary: f64,
    pub seconds: f64,
    pub passed: bool,
}

pub fn verify_counterexample(opts: &SolverOptions) -> Result<CounterexampleReport> {
    let ens = ensemble();
    let spec = DivergenceSpec::arcsine();
    let start = Instant::now();
    let report = solve_barycenter(&ens, &spec, opts)?;
    let seconds = start.elapsed().as_secs_f64();
    let x = &report.solution;
    let res = residual(&ens, x, &spec)?;
    let image = power_mean_map(&ens, x, 0.5)?;
    let power = solve_power_mean(&ens, 0.5, &SolverOptions::default().with_tol(1e-13))?;
    let map_gap = frobenius_dist(&image, x)?;
    let power_mean_gap = frobenius_dist(&power.solution, x)?;
    let barycenter = Comparison::new(x, REFERENCE_BARYCENTER);
    let map_at_barycenter = Comparison::new(&image, REFERENCE_MAP_IMAGE);
    let max_imaginary = x.max_imaginary();
    let passed = barycenter.matches
        && map_at_barycenter.matches
        && map_gap >= MIN_GAP
        && power_mean_gap >= MIN_GAP
        && max_imaginary <= MAX_IMAGINARY
        && res <= MAX_RESIDUAL;
    Ok(CounterexampleReport {
        power_mean: Comparison::new(&power.solution, REFERENCE_MAP_IMAGE).computed,
        barycenter,
        map_at_barycenter,
        map_gap,
        power_mean_gap,
        residual: res,
        iterations: report.iterations,
        max_imaginary,
        seconds,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn counterexample_reproduces() {
        let report = verify_counterexample(&SolverOptions::default()).unwrap();
        assert!(report.passed, "{report:#?}");
        assert_abs_diff_eq!(report.power_mean_gap, 0.1438, epsilon = 5e-4);
        assert_abs_diff_eq!(report.map_gap, 0.0776, epsilon = 5e-4);
        assert_abs_diff_eq!(report.power_mean[0][0], 3.0606, epsilon = 5e-4);
    }
}
