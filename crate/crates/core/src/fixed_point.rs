//! Fixed-point solvers for weighted power means and for the mean equation
//! `X = (1/c) Σ_j w_j X^{1/2} f'((X^{-1/2} A_j X^{-1/2})^{-1}) X^{1/2}`,
//! and the noncommutativity measure built on them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::barycenter::{solve_barycenter, SolverOptions, SolverReport, WeightedEnsemble};
use crate::divergence::{map_with_anchor, Anchor, DivergenceSpec};
use crate::error::{Error, Result};
use crate::matrix::{frobenius_dist, thompson_dist, CMatrix, HermitianMatrix, PositiveDefiniteMatrix};

/// Smallest damping reached by automatic halving.
pub const MIN_DAMPING: f64 = 1.0 / 16.0;

/// Damped Picard iteration `X ← (1−θ)X + θ T(X)`, halving `θ` (down to
/// [`MIN_DAMPING`]) whenever the step norm grows twice in a row.
fn damped_iteration(
    ens: &WeightedEnsemble,
    opts: &SolverOptions,
    map: impl Fn(&PositiveDefiniteMatrix) -> Result<CMatrix>,
) -> Result<SolverReport> {
    let mut x = opts.start(ens)?;
    let mut damping = opts.damping;
    let floor = MIN_DAMPING.min(opts.damping);
    let mut previous_step = f64::INFINITY;
    let mut growth = 0;
    let mut relative = f64::INFINITY;
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        let image = map(&x)?;
        let next = HermitianMatrix::symmetrized(x.as_matrix().scale(1.0 - damping) + image.scale(damping));
        let next = PositiveDefiniteMatrix::new(next)?;
        let step = frobenius_dist(&next, &x)?;
        relative = step / x.frobenius_norm();
        x = next;
        iterations += 1;
        if relative <= opts.residual_tol {
            break;
        }
        if step > previous_step {
            growth += 1;
            if growth >= 2 && damping > floor {
                damping = (0.5 * damping).max(floor);
                growth = 0;
            }
        } else {
            growth = 0;
        }
        previous_step = step;
    }
    Ok(SolverReport {
        solution: x,
        iterations,
        final_residual: relative,
        objective_trace: Vec::new(),
        converged: relative <= opts.residual_tol,
    })
}

/// `Σ_j w_j X #_s A_j` with `X #_s A = X^{1/2}(X^{-1/2} A X^{-1/2})^s X^{1/2}`.
pub fn power_mean_map(ens: &WeightedEnsemble, x: &PositiveDefiniteMatrix, s: f64) -> Result<PositiveDefiniteMatrix> {
    ens.check_point(x)?;
    PositiveDefiniteMatrix::new(HermitianMatrix::symmetrized(power_map(ens, x, s)?))
}

fn power_map(ens: &WeightedEnsemble, x: &PositiveDefiniteMatrix, s: f64) -> Result<CMatrix> {
    let anchor = Anchor::new(x)?;
    let n = x.dim();
    let mut acc = CMatrix::zeros(n, n);
    for (a, w) in ens.members() {
        acc += map_with_anchor(&anchor, a, |v| v.powf(s))?.as_matrix().scale(w);
    }
    Ok(acc)
}

/// Weighted power mean of order `t`: the solution of `X = Σ_j w_j X #_{1−t} A_j`.
pub fn solve_power_mean(ens: &WeightedEnsemble, t: f64, opts: &SolverOptions) -> Result<SolverReport> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::InvalidArgument(format!("power mean order t = {t} must lie in (0, 1)")));
    }
    damped_iteration(ens, opts, |x| power_map(ens, x, 1.0 - t))
}

/// Right-hand side of the mean equation at `X`.
pub fn mean_equation_map(
    ens: &WeightedEnsemble,
    x: &PositiveDefiniteMatrix,
    spec: &DivergenceSpec,
) -> Result<PositiveDefiniteMatrix> {
    ens.check_point(x)?;
    PositiveDefiniteMatrix::new(HermitianMatrix::symmetrized(mean_map(ens, x, spec)?))
}

fn mean_map(ens: &WeightedEnsemble, x: &PositiveDefiniteMatrix, spec: &DivergenceSpec) -> Result<CMatrix> {
    let gen = spec.generator();
    let anchor = Anchor::new(x)?;
    let n = x.dim();
    let mut acc = CMatrix::zeros(n, n);
    for (a, w) in ens.members() {
        acc += map_with_anchor(&anchor, a, |v| gen.derivative(1.0 / v))?
            .as_matrix()
            .scale(w);
    }
    Ok(acc.unscale(spec.weight()))
}

/// Solves the mean equation by damped fixed-point iteration. Uniqueness of the
/// solution is not certified for general generators.
pub fn solve_mean_equation(
    ens: &WeightedEnsemble,
    spec: &DivergenceSpec,
    opts: &SolverOptions,
) -> Result<SolverReport> {
    damped_iteration(ens, opts, |x| mean_map(ens, x, spec))
}

/// Distance used by [`noncommutativity_measure`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Frobenius,
    Thompson,
}

impl Metric {
    pub fn distance(self, a: &PositiveDefiniteMatrix, b: &PositiveDefiniteMatrix) -> Result<f64> {
        match self {
            Metric::Frobenius => frobenius_dist(a, b),
            Metric::Thompson => thompson_dist(a, b),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Frobenius => "frobenius",
            Metric::Thompson => "thompson",
        })
    }
}

impl FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "frobenius" => Ok(Metric::Frobenius),
            "thompson" => Ok(Metric::Thompson),
            other => Err(Error::InvalidArgument(format!("unknown metric `{other}`"))),
        }
    }
}

/// Both solutions entering the noncommutativity measure.
#[derive(Clone, Debug, Serialize)]
pub struct NoncommutativityReport {
    pub value: f64,
    pub metric: Metric,
    pub barycenter: SolverReport,
    pub mean_equation: SolverReport,
}

/// Distance between the barycenter and the solution of the mean equation.
pub fn noncommutativity_measure(
    ens: &WeightedEnsemble,
    spec: &DivergenceSpec,
    metric: Metric,
    opts: &SolverOptions,
) -> Result<f64> {
    Ok(noncommutativity_report(ens, spec, metric, opts)?.value)
}

pub fn noncommutativity_report(
    ens: &WeightedEnsemble,
    spec: &DivergenceSpec,
    metric: Metric,
    opts: &SolverOptions,
) -> Result<NoncommutativityReport> {
    let barycenter = solve_barycenter(ens, spec, opts)?;
    require_converged("barycenter", &barycenter)?;
    let mean_equation = solve_mean_equation(ens, spec, opts)?;
    require_converged("mean equation", &mean_equation)?;
    let value = metric.distance(&barycenter.solution, &mean_equation.solution)?;
    Ok(NoncommutativityReport {
        value,
        metric,
        barycenter,
        mean_equation,
    })
}

pub(crate) fn require_converged(solver: &'static str, report: &SolverReport) -> Result<()> {
    if report.converged {
        Ok(())
    } else {
        Err(Error::NonConvergence {
            solver,
            iterations: report.iterations,
            residual: report.final_residual,
        })
    }
}
