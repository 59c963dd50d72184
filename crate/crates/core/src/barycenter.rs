//! Weighted barycenters `argmin_X Σ_j w_j φ(A_j, X)`.
//!
//! The gradient solver descends along the exact Euclidean gradient
//! `G = c·I − Σ_j w_j ∫ λ (Z*)^{-1} Z^{-1} dμ(λ)`, `Z = (1−λ)X A_j^{-1} + λI`,
//! and declares convergence on `‖G‖_F`, whose zero set is the barycenter.

use serde::{Deserialize, Serialize};

use crate::divergence::{check_commuting, phi_with_anchor, Anchor, DivergenceSpec};
use crate::error::{Error, Result};
use crate::generator::Generator;
use crate::matrix::{frechet_derivative, CMatrix, HermitianMatrix, PositiveDefiniteMatrix};
use crate::measure::Measure;

/// Tolerance on `Σ w_j = 1`.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

/// Matrices `A_1..A_m` of equal dimension with positive weights summing to one.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "EnsembleJson")]
pub struct WeightedEnsemble {
    matrices: Vec<PositiveDefiniteMatrix>,
    weights: Vec<f64>,
}

#[derive(Deserialize)]
struct EnsembleJson {
    matrices: Vec<PositiveDefiniteMatrix>,
    weights: Vec<f64>,
}

impl TryFrom<EnsembleJson> for WeightedEnsemble {
    type Error = Error;
    fn try_from(raw: EnsembleJson) -> Result<Self> {
        Self::new(raw.matrices, raw.weights)
    }
}

impl WeightedEnsemble {
    pub fn new(matrices: Vec<PositiveDefiniteMatrix>, weights: Vec<f64>) -> Result<Self> {
        if matrices.is_empty() {
            return Err(Error::InvalidArgument("ensemble needs at least one matrix".into()));
        }
        if matrices.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: matrices.len(),
                found: weights.len(),
            });
        }
        let dim = matrices[0].dim();
        if let Some(bad) = matrices.iter().find(|m| m.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }
        if let Some(&w) = weights.iter().find(|&&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidArgument(format!("weight {w} is not positive")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::InvalidArgument(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { matrices, weights })
    }

    /// Equal weights `1/m`.
    pub fn uniform(matrices: Vec<PositiveDefiniteMatrix>) -> Result<Self> {
        let m = matrices.len().max(1);
        Self::new(matrices, vec![1.0 / m as f64; m])
    }

    pub fn matrices(&self) -> &[PositiveDefiniteMatrix] {
        &self.matrices
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.matrices[0].dim()
    }

    pub fn members(&self) -> impl Iterator<Item = (&PositiveDefiniteMatrix, f64)> {
        self.matrices.iter().zip(self.weights.iter().copied())
    }

    /// `Σ_j w_j A_j`.
    pub fn arithmetic_mean(&self) -> PositiveDefiniteMatrix {
        let mut acc = CMatrix::zeros(self.dim(), self.dim());
        for (a, w) in self.members() {
            acc += a.as_matrix().scale(w);
        }
        PositiveDefiniteMatrix::assume_pd(HermitianMatrix::symmetrized(acc))
    }

    pub(crate) fn check_point(&self, x: &HermitianMatrix) -> Result<()> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.dim(),
            });
        }
        Ok(())
    }
}

/// Solver settings shared by the gradient and fixed-point solvers.
#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub max_iterations: usize,
    pub residual_tol: f64,
    pub line_search_shrink: f64,
    pub armijo_c: f64,
    pub initial_guess: Option<PositiveDefiniteMatrix>,
    pub damping: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            residual_tol: 1e-8,
            line_search_shrink: 0.5,
            armijo_c: 1e-4,
            initial_guess: None,
            damping: 1.0,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(mut self, residual_tol: f64) -> Self {
        self.residual_tol = residual_tol;
        self
    }

    pub fn with_initial_guess(mut self, x: PositiveDefiniteMatrix) -> Self {
        self.initial_guess = Some(x);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(format!("solver option {what}")));
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive");
        }
        if !(self.residual_tol > 0.0) {
            return bad("residual_tol must be positive");
        }
        if !(self.line_search_shrink > 0.0 && self.line_search_shrink < 1.0) {
            return bad("line_search_shrink must lie in (0, 1)");
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 0.5) {
            return bad("armijo_c must lie in (0, 0.5)");
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return bad("damping must lie in (0, 1]");
        }
        Ok(())
    }

    pub(crate) fn start(&self, ens: &WeightedEnsemble) -> Result<PositiveDefiniteMatrix> {
        self.validate()?;
        match &self.initial_guess {
            Some(x) => {
                ens.check_point(x)?;
                Ok(x.clone())
            }
            None => Ok(ens.arithmetic_mean()),
        }
    }
}

/// Outcome of a solver run. Fixed-point solvers leave `objective_trace` empty
/// and report the last relative step as `final_residual`.
#[derive(Clone, Debug, Serialize)]
pub struct SolverReport {
    pub solution: PositiveDefiniteMatrix,
    pub iterations: usize,
    pub final_residual: f64,
    pub objective_trace: Vec<f64>,
    pub converged: bool,
}

/// Per-ensemble data reused across objective and gradient evaluations.
struct Prepared<'a> {
    ens: &'a WeightedEnsemble,
    anchors: Vec<Anchor>,
    inverses: Vec<CMatrix>,
}

impl<'a> Prepared<'a> {
    fn new(ens: &'a WeightedEnsemble) -> Result<Self> {
        let anchors = ens.matrices.iter().map(Anchor::new).collect::<Result<Vec<_>>>()?;
        let inverses = ens
            .matrices
            .iter()
            .map(|a| a.inv().map(|inv| inv.into_hermitian().into_matrix()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            ens,
            anchors,
            inverses,
        })
    }

    fn objective(&self, x: &HermitianMatrix, spec: &DivergenceSpec) -> Result<f64> {
        let mut total = 0.0;
        for (anchor, &w) in self.anchors.iter().zip(&self.ens.weights) {
            total += w * phi_with_anchor(anchor, x, spec)?;
        }
        Ok(total)
    }

    fn gradient(&self, x: &HermitianMatrix, spec: &DivergenceSpec) -> Result<HermitianMatrix> {
        let measure = representing(spec)?;
        let rule = measure.rule();
        let n = x.dim();
        let identity = CMatrix::identity(n, n);
        let mut acc = CMatrix::zeros(n, n);
        for (inverse, &w) in self.inverses.iter().zip(&self.ens.weights) {
            let p = x.as_matrix() * inverse;
            let mut term = CMatrix::zeros(n, n);
            for (&lambda, &weight) in rule.nodes.iter().zip(&rule.weights) {
                if lambda == 0.0 {
                    continue;
                }
                let z = p.scale(1.0 - lambda) + identity.scale(lambda);
                let z_inv = z.try_inverse().ok_or_else(|| Error::Eigensolver {
                    matrix: format!("Z at λ = {lambda}"),
                })?;
                term += (z_inv.adjoint() * z_inv).scale(lambda * weight);
            }
            acc += term.scale(w);
        }
        Ok(HermitianMatrix::symmetrized(identity.scale(spec.weight()) - acc))
    }
}

fn representing(spec: &DivergenceSpec) -> Result<&Measure> {
    spec.generator().measure().ok_or_else(|| {
        Error::UnsupportedGenerator(format!("`{}` has no representing measure", spec.generator().spec()))
    })
}

/// `Σ_j w_j φ(A_j, X)`.
pub fn objective(ens: &WeightedEnsemble, x: &PositiveDefiniteMatrix, spec: &DivergenceSpec) -> Result<f64> {
    ens.check_point(x)?;
    Prepared::new(ens)?.objective(x, spec)
}

/// Euclidean gradient of [`objective`] evaluated on the quadrature nodes of the
/// representing measure; `DF(X)[Y] = Tr(G Y)`.
pub fn euclidean_gradient(
    ens: &WeightedEnsemble,
    x: &PositiveDefiniteMatrix,
    spec: &DivergenceSpec,
) -> Result<HermitianMatrix> {
    ens.check_point(x)?;
    Prepared::new(ens)?.gradient(x, spec)
}

/// The same gradient through `A^{-1/2} Df(M)[A] A^{-1/2}`, `M = A^{-1/2} X A^{-1/2}`,
/// with the Fréchet derivative taken by divided differences.
pub fn euclidean_gradient_spectral(
    ens: &WeightedEnsemble,
    x: &PositiveDefiniteMatrix,
    spec: &DivergenceSpec,
) -> Result<HermitianMatrix> {
    ens.check_point(x)?;
    let gen = spec.generator();
    let n = x.dim();
    let mut acc = HermitianMatrix::identity(n).scale(spec.weight());
    for (a, w) in ens.members() {
        let inv_sqrt = a.inv_sqrt()?;
        let m = x.congruence(inv_sqrt.as_matrix());
        let df = frechet_derivative(&m.eig()?, |v| gen.value(v), |v| gen.derivative(v), a)?;
        acc = &acc - &df.congruence(inv_sqrt.as_matrix()).scale(w);
    }
    Ok(acc)
}

/// `Df_μ(X)[Y] = ∫ λ ((1−λ)X + λI)^{-1} Y ((1−λ)X + λI)^{-1} dμ(λ)` by quadrature.
pub fn frechet_derivative_fmu(
    mu: &Measure,
    x: &PositiveDefiniteMatrix,
    y: &HermitianMatrix,
) -> Result<HermitianMatrix> {
    crate::matrix::check_same_dim(x, y)?;
    let n = x.dim();
    let identity = CMatrix::identity(n, n);
    let mut acc = CMatrix::zeros(n, n);
    let rule = mu.rule();
    for (&lambda, &weight) in rule.nodes.iter().zip(&rule.weights) {
        if lambda == 0.0 {
            continue;
        }
        let r = x.as_matrix().scale(1.0 - lambda) + identity.scale(lambda);
        let r_inv = r.try_inverse().ok_or_else(|| Error::Eigensolver {
            matrix: format!("resolvent at λ = {lambda}"),
        })?;
        acc += (&r_inv * y.as_matrix() * &r_inv).scale(lambda * weight);
    }
    Ok(HermitianMatrix::symmetrized(acc))
}

/// `‖euclidean_gradient(ens, X, spec)‖_F`.
pub fn residual(ens: &WeightedEnsemble, x: &PositiveDefiniteMatrix, spec: &DivergenceSpec) -> Result<f64> {
    Ok(euclidean_gradient(ens, x, spec)?.frobenius_norm())
}

const MAX_BACKTRACKS: usize = 60;

/// Gradient descent with Barzilai-Borwein trial steps, Armijo backtracking and
/// rejection of trial points that fail a Cholesky factorization.
pub fn solve_barycenter(ens: &WeightedEnsemble, spec: &DivergenceSpec, opts: &SolverOptions) -> Result<SolverReport> {
    let mut x = opts.start(ens)?;
    let prepared = Prepared::new(ens)?;
    let mut value = prepared.objective(&x, spec)?;
    let mut grad = prepared.gradient(&x, spec)?;
    let mut res = grad.frobenius_norm();
    let mut trace = vec![value];
    let mut step = x.trace() / x.dim() as f64;
    let mut iterations = 0;

    while res > opts.residual_tol && iterations < opts.max_iterations {
        let slack = 1e-13 * (1.0 + value.abs());
        let mut s = step;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let trial = &*x - &grad.scale(s);
            if PositiveDefiniteMatrix::cholesky_ok(&trial) {
                if let Ok(trial) = PositiveDefiniteMatrix::new(trial) {
                    let trial_value = prepared.objective(&trial, spec)?;
                    if trial_value <= value - opts.armijo_c * s * res * res + slack {
                        accepted = Some((trial, trial_value, s));
                        break;
                    }
                }
            }
            s *= opts.line_search_shrink;
        }
        let Some((next, next_value, s)) = accepted else {
            break;
        };
        let next_grad = prepared.gradient(&next, spec)?;
        let dx = &*next - &*x;
        let dg = &next_grad - &grad;
        let curvature = dx.trace_product(&dg);
        step = if curvature > 0.0 {
            dx.trace_product(&dx) / curvature
        } else {
            2.0 * s
        };
        x = next;
        value = next_value;
        grad = next_grad;
        res = grad.frobenius_norm();
        trace.push(value);
        iterations += 1;
    }

    Ok(SolverReport {
        solution: x,
        iterations,
        final_residual: res,
        objective_trace: trace,
        converged: res <= opts.residual_tol,
    })
}

/// `Σ_j w_j φ_f(A_j, X)` with the commutative divergence; all matrices must commute.
pub fn commutative_objective(ens: &WeightedEnsemble, x: &PositiveDefiniteMatrix, gen: &Generator) -> Result<f64> {
    ens.check_point(x)?;
    let mut total = 0.0;
    for (a, w) in ens.members() {
        total += w * crate::divergence::commutative_phi(a, x, gen)?;
    }
    Ok(total)
}

/// Barycenter of a pairwise commuting ensemble under the commutative divergence of
/// `gen` (e.g. `log` or `power:t`). In a joint eigenbasis each diagonal entry solves
/// `Σ_j w_j f'(x / a_j) = f'(1)`, found by bisection between `min a_j` and `max a_j`.
pub fn solve_commutative_barycenter(
    ens: &WeightedEnsemble,
    gen: &Generator,
    opts: &SolverOptions,
) -> Result<SolverReport> {
    opts.validate()?;
    let (basis, diagonals) = joint_diagonalization(ens)?;
    let target = gen.derivative(1.0);
    let h = |x: f64, i: usize| -> f64 {
        diagonals
            .iter()
            .zip(&ens.weights)
            .map(|(d, &w)| w * gen.derivative(x / d[i]))
            .sum::<f64>()
            - target
    };
    let n = ens.dim();
    let mut solution = vec![0.0; n];
    let mut iterations = 0;
    for (i, slot) in solution.iter_mut().enumerate() {
        let (mut lo, mut hi) = diagonals
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), d| (lo.min(d[i]), hi.max(d[i])));
        while hi - lo > 4.0 * f64::EPSILON * hi && iterations < 64 * n {
            let mid = 0.5 * (lo + hi);
            if h(mid, i) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            iterations += 1;
        }
        *slot = 0.5 * (lo + hi);
    }
    let residual = solution
        .iter()
        .enumerate()
        .map(|(i, &x)| h(x, i).powi(2))
        .sum::<f64>()
        .sqrt();
    let diag = HermitianMatrix::from_diagonal(&solution)?;
    let x = PositiveDefiniteMatrix::new(diag.congruence(&basis))?;
    let value = commutative_objective(ens, &x, gen)?;
    Ok(SolverReport {
        solution: x,
        iterations,
        final_residual: residual,
        objective_trace: vec![value],
        converged: residual <= opts.residual_tol.max(1e-12),
    })
}

/// Unitary `U` and the diagonals of `U* A_j U` for a commuting ensemble.
fn joint_diagonalization(ens: &WeightedEnsemble) -> Result<(CMatrix, Vec<Vec<f64>>)> {
    for (i, a) in ens.matrices.iter().enumerate() {
        for b in &ens.matrices[i + 1..] {
            check_commuting(a, b)?;
        }
    }
    // A generic combination separates the joint eigenspaces.
    let n = ens.dim();
    let mut combo = CMatrix::zeros(n, n);
    for (j, a) in ens.matrices.iter().enumerate() {
        let r = 1.0 + ((j as f64 + 1.0) * 0.618_033_988_749_895).fract();
        combo += a.as_matrix().scale(r / a.frobenius_norm());
    }
    let basis = HermitianMatrix::symmetrized(combo).eig()?.eigenvectors;
    let mut diagonals = Vec::with_capacity(ens.len());
    for a in &ens.matrices {
        let rotated = a.congruence(&basis.adjoint());
        let off = (&rotated - &rotated.diagonal_part()).frobenius_norm();
        if off > 1e-8 * a.frobenius_norm() {
            return Err(Error::InvalidArgument(format!(
                "ensemble could not be jointly diagonalized (off-diagonal mass {off:e})"
            )));
        }
        diagonals.push((0..n).map(|i| rotated.get(i, i).re).collect());
    }
    Ok((basis, diagonals))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::GeneratorSpec;
    use crate::matrix::frobenius_dist;
    use approx::assert_abs_diff_eq;

    pub(crate) fn counterexample_ensemble() -> WeightedEnsemble {
        WeightedEnsemble::uniform(vec![
            PositiveDefiniteMatrix::from_diagonal(&[4.0, 1.0]).unwrap(),
            PositiveDefiniteMatrix::from_real_rows(&[vec![2.5, 1.5], vec![1.5, 2.5]]).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn ensemble_validation() {
        let a = PositiveDefiniteMatrix::identity(2);
        assert!(WeightedEnsemble::new(vec![], vec![]).is_err());
        assert!(WeightedEnsemble::new(vec![a.clone()], vec![0.9]).is_err());
        assert!(WeightedEnsemble::new(vec![a.clone(), a.clone()], vec![1.2, -0.2]).is_err());
        assert!(WeightedEnsemble::new(vec![a.clone(), PositiveDefiniteMatrix::identity(3)], vec![0.5, 0.5]).is_err());
        let json = r#"{"matrices":[{"dim":1,"re":[[2.0]]},{"dim":1,"re":[[4.0]]}],"weights":[0.25,0.75]}"#;
        let ens: WeightedEnsemble = serde_json::from_str(json).unwrap();
        assert_abs_diff_eq!(ens.arithmetic_mean().get(0, 0).re, 3.5, epsilon = 1e-15);
        let bad = r#"{"matrices":[{"dim":1,"re":[[2.0]]}],"weights":[0.5]}"#;
        assert!(serde_json::from_str::<WeightedEnsemble>(bad).is_err());
    }

    #[test]
    fn options_validation() {
        assert!(SolverOptions::default().validate().is_ok());
        let bad = SolverOptions {
            armijo_c: 0.6,
            ..SolverOptions::default()
        };
        assert!(bad.validate().is_err());
        let bad = SolverOptions {
            damping: 0.0,
            ..SolverOptions::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn single_member_is_its_own_barycenter() {
        let a = PositiveDefiniteMatrix::from_real_rows(&[vec![2.5, 1.5], vec![1.5, 2.5]]).unwrap();
        let ens = WeightedEnsemble::uniform(vec![a.clone()]).unwrap();
        let spec = DivergenceSpec::arcsine();
        assert_abs_diff_eq!(objective(&ens, &a, &spec).unwrap(), 0.0, epsilon = 1e-12);
        assert!(residual(&ens, &a, &spec).unwrap() < 1e-10);
        let report = solve_barycenter(&ens, &spec, &SolverOptions::default()).unwrap();
        assert!(report.converged);
        assert!(frobenius_dist(&report.solution, &a).unwrap() < 1e-8);
    }

    #[test]
    fn counterexample_barycenter() {
        let spec = DivergenceSpec::arcsine();
        let ens = counterexample_ensemble();
        let report = solve_barycenter(&ens, &spec, &SolverOptions::default()).unwrap();
        assert!(report.converged, "{report:?}");
        let expected = [[2.99035, 0.634419], [0.634419, 1.72151]];
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(report.solution.get(i, j).re, expected[i][j], epsilon = 1e-3);
            }
        }
        for pair in report.objective_trace.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12);
        }
        assert!(residual(&ens, &PositiveDefiniteMatrix::identity(2), &spec).unwrap() > 1e-3);
    }

    #[test]
    fn gradient_paths_agree() {
        let ens = counterexample_ensemble();
        let x = PositiveDefiniteMatrix::from_real_rows(&[vec![2.0, 0.3], vec![0.3, 1.1]]).unwrap();
        for spec in [
            DivergenceSpec::arcsine(),
            DivergenceSpec::from_spec(GeneratorSpec::Geometric { lambda: 0.3 }).unwrap(),
            DivergenceSpec::from_spec(GeneratorSpec::Harmonic { lambda: 0.7 }).unwrap(),
        ] {
            let g1 = euclidean_gradient(&ens, &x, &spec).unwrap();
            let g2 = euclidean_gradient_spectral(&ens, &x, &spec).unwrap();
            assert!(frobenius_dist(&g1, &g2).unwrap() < 1e-9);
        }
    }

    #[test]
    fn fmu_derivative_examples() {
        let mu = Measure::new(crate::measure::MeasureSpec::Arcsine).unwrap();
        let y = HermitianMatrix::from_real_rows(&[vec![1.0, 2.0], vec![2.0, -3.0]]).unwrap();
        let at_identity = frechet_derivative_fmu(&mu, &PositiveDefiniteMatrix::identity(2), &y).unwrap();
        assert!(frobenius_dist(&at_identity, &y.scale(0.5)).unwrap() < 1e-12);
        let x = PositiveDefiniteMatrix::from_diagonal(&[0.5, 3.0]).unwrap();
        let yd = HermitianMatrix::from_diagonal(&[2.0, -1.0]).unwrap();
        let d = frechet_derivative_fmu(&mu, &x, &yd).unwrap();
        assert_abs_diff_eq!(d.get(0, 0).re, 2.0 * 0.5 / 0.5f64.sqrt(), epsilon = 1e-10);
        assert_abs_diff_eq!(d.get(1, 1).re, -0.5 / 3f64.sqrt(), epsilon = 1e-10);
        assert!(d.get(0, 1).norm() < 1e-14);
    }

    #[test]
    fn commutative_log_barycenter_is_arithmetic_mean() {
        let ens = WeightedEnsemble::new(
            vec![
                PositiveDefiniteMatrix::from_diagonal(&[1.0, 5.0, 2.0]).unwrap(),
                PositiveDefiniteMatrix::from_diagonal(&[3.0, 0.5, 2.0]).unwrap(),
            ],
            vec![0.3, 0.7],
        )
        .unwrap();
        let log = Generator::new(GeneratorSpec::CommutativeLog).unwrap();
        let report = solve_commutative_barycenter(&ens, &log, &SolverOptions::default()).unwrap();
        assert!(report.converged);
        assert!(frobenius_dist(&report.solution, &ens.arithmetic_mean()).unwrap() < 1e-12);
        assert!(solve_commutative_barycenter(&counterexample_ensemble(), &log, &SolverOptions::default()).is_err());
    }
}
