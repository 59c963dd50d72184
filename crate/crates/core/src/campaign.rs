//! Seeded property campaigns: data processing, joint convexity, divergence
//! axioms and convex-order monotonicity of means.
//!
//! Trials run in parallel; each owns the stream `trial` of the campaign seed and
//! results are collected in trial order, so reports do not depend on scheduling.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::channel::{check_dpi, check_joint_convexity, random_cptp, QuantumChannel};
use crate::divergence::{kubo_ando_mean, phi, DivergenceSpec};
use crate::error::{Error, Result};
use crate::generator::{Generator, GeneratorSpec};
use crate::matrix::{loewner_slack, HermitianMatrix, MatrixJson, PositiveDefiniteMatrix};
use crate::random::{random_convex_order_pair, random_hermitian, random_pd, trial_rng};

/// A property holds on a trial iff its slack is at least `-SLACK_TOLERANCE`.
pub const SLACK_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug)]
pub struct CampaignConfig {
    pub seed: u64,
    pub trials: usize,
    pub dim: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialFailure {
    pub trial: usize,
    pub seed: u64,
    pub slack: f64,
    pub inputs: serde_json::Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct CampaignSummary {
    pub name: &'static str,
    pub trials: usize,
    pub passed: usize,
    /// Trials skipped because a channel output was numerically singular.
    pub discarded: usize,
    /// Smallest slack seen; `+∞` when no trial was evaluated.
    pub worst_slack: f64,
    pub failures: Vec<TrialFailure>,
}

impl CampaignSummary {
    pub fn all_passed(&self) -> bool {
        self.failures.is_empty()
    }
}

enum Outcome {
    Evaluated { slack: f64, ok: bool, inputs: serde_json::Value },
    Discarded,
}

fn run(name: &'static str, cfg: &CampaignConfig, trial: impl Fn(usize) -> Result<Outcome> + Sync) -> Result<CampaignSummary> {
    let outcomes: Vec<Result<Outcome>> = (0..cfg.trials).into_par_iter().map(&trial).collect();
    let mut summary = CampaignSummary {
        name,
        trials: cfg.trials,
        passed: 0,
        discarded: 0,
        worst_slack: f64::INFINITY,
        failures: Vec::new(),
    };
    for (index, outcome) in outcomes.into_iter().enumerate() {
        match outcome? {
            Outcome::Discarded => summary.discarded += 1,
            Outcome::Evaluated { slack, ok, inputs } => {
                summary.worst_slack = summary.worst_slack.min(slack);
                if ok && slack >= -SLACK_TOLERANCE {
                    summary.passed += 1;
                } else {
                    summary.failures.push(TrialFailure {
                        trial: index,
                        seed: cfg.seed,
                        slack,
                        inputs,
                    });
                }
            }
        }
    }
    Ok(summary)
}

fn dump(m: &HermitianMatrix) -> serde_json::Value {
    serde_json::to_value(MatrixJson::from_matrix(m.as_matrix())).unwrap_or_default()
}

fn check_dims(cfg: &CampaignConfig) -> Result<()> {
    if cfg.dim == 0 {
        return Err(Error::InvalidArgument("campaign dimension must be at least 1".into()));
    }
    Ok(())
}

fn channel_seed(seed: u64, trial: usize) -> u64 {
    seed ^ (trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn dpi_with(
    name: &'static str,
    spec: &DivergenceSpec,
    cfg: &CampaignConfig,
    channel: impl Fn(usize) -> Result<QuantumChannel> + Sync,
) -> Result<CampaignSummary> {
    check_dims(cfg)?;
    run(name, cfg, |t| {
        let mut rng = trial_rng(cfg.seed, t as u64);
        let a = random_pd(&mut rng, cfg.dim);
        let b = random_pd(&mut rng, cfg.dim);
        let channel = channel(t)?;
        match check_dpi(spec, &channel, &a, &b) {
            Ok(check) => Ok(Outcome::Evaluated {
                slack: check.slack,
                ok: true,
                inputs: json!({ "a": dump(&a), "b": dump(&b), "channel": channel, "regularization": check.regularization }),
            }),
            Err(Error::Degenerate { .. }) => Ok(Outcome::Discarded),
            Err(e) => Err(e),
        }
    })
}

/// `φ(T(A), T(B)) ≤ φ(A, B)` for random channels with full Kraus rank.
pub fn dpi_campaign(spec: &DivergenceSpec, cfg: &CampaignConfig) -> Result<CampaignSummary> {
    dpi_with("data processing", spec, cfg, |t| {
        random_cptp(cfg.dim, cfg.dim, cfg.dim, channel_seed(cfg.seed, t))
    })
}

/// The data-processing campaign run on unitary channels scaled by `√2`, which
/// are not trace preserving; every trial should fail.
pub fn corrupted_dpi_campaign(spec: &DivergenceSpec, cfg: &CampaignConfig) -> Result<CampaignSummary> {
    dpi_with("data processing (corrupted channel)", spec, cfg, |t| {
        Ok(random_cptp(cfg.dim, cfg.dim, 1, channel_seed(cfg.seed, t))?.scaled_unchecked(2f64.sqrt()))
    })
}

/// Joint convexity at `s = 1/2` for random pairs.
pub fn joint_convexity_campaign(spec: &DivergenceSpec, cfg: &CampaignConfig) -> Result<CampaignSummary> {
    check_dims(cfg)?;
    run("joint convexity", cfg, |t| {
        let mut rng = trial_rng(cfg.seed, t as u64);
        let m: Vec<PositiveDefiniteMatrix> = (0..4).map(|_| random_pd(&mut rng, cfg.dim)).collect();
        let slack = check_joint_convexity(spec, (&m[0], &m[1]), (&m[2], &m[3]), 0.5)?;
        Ok(Outcome::Evaluated {
            slack,
            ok: true,
            inputs: json!({ "a1": dump(&m[0]), "b1": dump(&m[1]), "a2": dump(&m[2]), "b2": dump(&m[3]), "s": 0.5 }),
        })
    })
}

/// Nonnegativity, `φ(A, A) = 0`, strict positivity for `A ≠ B` and a vanishing
/// derivative of `X ↦ φ(A, X)` at `X = A`.
///
/// The slack is the minimum of `φ(A, B)`, `−|φ(A, A)|` and `−|D|`, where `D` is a
/// Richardson-extrapolated central difference along a random unit direction.
pub fn axiom_campaign(spec: &DivergenceSpec, cfg: &CampaignConfig) -> Result<CampaignSummary> {
    check_dims(cfg)?;
    run("divergence axioms", cfg, |t| {
        let mut rng = trial_rng(cfg.seed, t as u64);
        let a = random_pd(&mut rng, cfg.dim);
        let b = random_pd(&mut rng, cfg.dim);
        let y = random_hermitian(&mut rng, cfg.dim);
        let y = y.scale(1.0 / y.frobenius_norm());
        let value = phi(&a, &b, spec)?;
        let diagonal = phi(&a, &a, spec)?;
        let derivative = diagonal_derivative(spec, &a, &y)?;
        let slack = value.min(-diagonal.abs()).min(-derivative.abs());
        Ok(Outcome::Evaluated {
            slack,
            ok: value > 0.0,
            inputs: json!({ "a": dump(&a), "b": dump(&b), "direction": dump(&y), "phi": value, "phi_aa": diagonal, "derivative": derivative }),
        })
    })
}

fn diagonal_derivative(spec: &DivergenceSpec, a: &PositiveDefiniteMatrix, y: &HermitianMatrix) -> Result<f64> {
    // step scaled so that A ± hY stays well inside the cone
    let h = 1e-3 * a.min_eigenvalue()?;
    let central = |h: f64| -> Result<f64> {
        let plus = PositiveDefiniteMatrix::new(a.as_hermitian() + &y.scale(h))?;
        let minus = PositiveDefiniteMatrix::new(a.as_hermitian() - &y.scale(h))?;
        Ok((phi(a, &plus, spec)? - phi(a, &minus, spec)?) / (2.0 * h))
    };
    Ok((4.0 * central(0.5 * h)? - central(h)?) / 3.0)
}

/// `A σ_μ B ≤ A σ_ν B` for sampled discrete `μ ≼ ν` and random PD `A`, `B`.
pub fn convex_order_campaign(cfg: &CampaignConfig) -> Result<CampaignSummary> {
    check_dims(cfg)?;
    run("convex order", cfg, |t| {
        let mut rng = trial_rng(cfg.seed, t as u64);
        let (mu, nu) = random_convex_order_pair(&mut rng);
        let a = random_pd(&mut rng, cfg.dim);
        let b = random_pd(&mut rng, cfg.dim);
        let lower = Generator::new(GeneratorSpec::Measure { mu: mu.clone() })?;
        let upper = Generator::new(GeneratorSpec::Measure { mu: nu.clone() })?;
        let low = kubo_ando_mean(&a, &b, &lower)?;
        let high = kubo_ando_mean(&a, &b, &upper)?;
        let slack = loewner_slack(&low, &high)?;
        Ok(Outcome::Evaluated {
            slack,
            ok: true,
            inputs: json!({ "mu": mu, "nu": nu, "a": dump(&a), "b": dump(&b) }),
        })
    })
}

/// Results of all four campaigns.
#[derive(Clone, Debug, Serialize)]
pub struct PropertiesReport {
    pub generator: String,
    pub seed: u64,
    pub dim: usize,
    pub campaigns: Vec<CampaignSummary>,
}

impl PropertiesReport {
    pub fn all_passed(&self) -> bool {
        self.campaigns.iter().all(CampaignSummary::all_passed)
    }
}

/// Runs the data-processing, joint-convexity, axiom and convex-order campaigns.
/// With `corrupt_channel` the data-processing campaign uses non trace-preserving
/// channels, so a correct harness reports violations.
pub fn run_properties(spec: &DivergenceSpec, cfg: &CampaignConfig, corrupt_channel: bool) -> Result<PropertiesReport> {
    let dpi = if corrupt_channel {
        corrupted_dpi_campaign(spec, cfg)?
    } else {
        dpi_campaign(spec, cfg)?
    };
    Ok(PropertiesReport {
        generator: spec.generator().spec().to_string(),
        seed: cfg.seed,
        dim: cfg.dim,
        campaigns: vec![
            dpi,
            joint_convexity_campaign(spec, cfg)?,
            axiom_campaign(spec, cfg)?,
            convex_order_campaign(cfg)?,
        ],
    })
}
