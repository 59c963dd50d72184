use std::fs;
use std::path::Path;

use serde::Deserialize;
use serde_json::json;

use qhellinger::barycenter::{solve_barycenter, solve_commutative_barycenter, SolverOptions, SolverReport, WeightedEnsemble};
use qhellinger::campaign::{run_properties, CampaignConfig, PropertiesReport};
use qhellinger::counterexample::{verify_counterexample, CounterexampleReport, MIN_GAP};
use qhellinger::divergence::{commutative_phi, kubo_ando_mean, phi, DivergenceSpec};
use qhellinger::fixed_point::{noncommutativity_report, solve_power_mean, NoncommutativityReport};
use qhellinger::generator::{Generator, GeneratorSpec};
use qhellinger::matrix::{MatrixJson, PositiveDefiniteMatrix};

use crate::error::{CliError, Result};
use crate::format;
use crate::{Cli, Command, OutputFormat};

/// Command failure, possibly with output that should still be printed.
pub struct Failure {
    pub output: Option<String>,
    pub error: CliError,
}

impl<E: Into<CliError>> From<E> for Failure {
    fn from(e: E) -> Self {
        Self {
            output: None,
            error: e.into(),
        }
    }
}

pub fn run(cli: &Cli) -> std::result::Result<String, Failure> {
    match cli.command {
        Command::Mean => Ok(mean(cli)?),
        Command::Divergence => Ok(divergence(cli)?),
        Command::Barycenter => barycenter(cli),
        Command::PowerMean => power_mean(cli),
        Command::Ncmeasure => Ok(ncmeasure(cli)?),
        Command::Properties => properties(cli),
        Command::VerifyPaper => verify(cli),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn document(cli: &Cli) -> Result<Option<String>> {
    match (&cli.shared.input, &cli.shared.inline) {
        (Some(path), _) => Ok(Some(read(path)?)),
        (None, Some(text)) => Ok(Some(text.clone())),
        (None, None) => Ok(None),
    }
}

fn generator(cli: &Cli) -> Result<Generator> {
    let spec: GeneratorSpec = cli.shared.generator.parse()?;
    Ok(Generator::with_quadrature_order(spec, cli.shared.quad_order)?)
}

fn is_commutative(gen: &Generator) -> bool {
    matches!(
        gen.spec(),
        GeneratorSpec::CommutativeLog | GeneratorSpec::CommutativePower { .. }
    )
}

fn options(cli: &Cli) -> SolverOptions {
    SolverOptions {
        max_iterations: cli.shared.max_iter,
        residual_tol: cli.shared.tol,
        ..SolverOptions::default()
    }
}

#[derive(Deserialize)]
struct Pair {
    a: PositiveDefiniteMatrix,
    b: PositiveDefiniteMatrix,
}

fn pair(cli: &Cli) -> Result<(PositiveDefiniteMatrix, PositiveDefiniteMatrix)> {
    if let (Some(a), Some(b)) = (&cli.shared.a_file, &cli.shared.b_file) {
        let a = serde_json::from_str(&read(a)?)?;
        let b = serde_json::from_str(&read(b)?)?;
        return Ok((a, b));
    }
    if cli.shared.a_file.is_some() || cli.shared.b_file.is_some() {
        return Err(CliError::Input("--a-file and --b-file must be given together".into()));
    }
    let text = document(cli)?.ok_or_else(|| {
        CliError::Input("give --a-file/--b-file, or --input/--inline with {\"a\": ..., \"b\": ...}".into())
    })?;
    let pair: Pair = serde_json::from_str(&text)?;
    Ok((pair.a, pair.b))
}

fn ensemble(cli: &Cli) -> Result<WeightedEnsemble> {
    let text = document(cli)?
        .ok_or_else(|| CliError::Input("give an ensemble with --input <path> or --inline <json>".into()))?;
    Ok(serde_json::from_str(&text)?)
}

fn pretty(value: &impl serde::Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

fn mean(cli: &Cli) -> Result<String> {
    let gen = generator(cli)?;
    let (a, b) = pair(cli)?;
    let m = kubo_ando_mean(&a, &b, &gen)?;
    match cli.shared.format {
        OutputFormat::Json => pretty(&MatrixJson::from_matrix(m.as_matrix())),
        OutputFormat::Table => Ok(format::matrix(&m)),
    }
}

fn divergence(cli: &Cli) -> Result<String> {
    let gen = generator(cli)?;
    let (a, b) = pair(cli)?;
    let value = if is_commutative(&gen) {
        commutative_phi(&a, &b, &gen)?
    } else {
        phi(&a, &b, &DivergenceSpec::new(gen.clone())?)?
    };
    match cli.shared.format {
        OutputFormat::Json => pretty(&json!({ "generator": gen.spec().to_string(), "divergence": value })),
        OutputFormat::Table => Ok(format::sig6(value)),
    }
}

fn render_report(cli: &Cli, report: &SolverReport) -> Result<String> {
    match cli.shared.format {
        OutputFormat::Json => pretty(report),
        OutputFormat::Table => Ok(format!(
            "solution:   {}\niterations: {}\nresidual:   {}\nconverged:  {}",
            format::matrix(&report.solution),
            report.iterations,
            format::sig6(report.final_residual),
            report.converged
        )),
    }
}

fn finish_report(cli: &Cli, solver: &str, report: SolverReport) -> std::result::Result<String, Failure> {
    let output = render_report(cli, &report)?;
    if report.converged {
        Ok(output)
    } else {
        Err(Failure {
            output: Some(output),
            error: CliError::NonConvergence(format!(
                "{solver} stopped after {} iterations with residual {:e}",
                report.iterations, report.final_residual
            )),
        })
    }
}

fn barycenter(cli: &Cli) -> std::result::Result<String, Failure> {
    let gen = generator(cli)?;
    let ens = ensemble(cli)?;
    let opts = options(cli);
    let report = if is_commutative(&gen) {
        solve_commutative_barycenter(&ens, &gen, &opts)?
    } else {
        solve_barycenter(&ens, &DivergenceSpec::new(gen)?, &opts)?
    };
    finish_report(cli, "barycenter", report)
}

fn power_mean(cli: &Cli) -> std::result::Result<String, Failure> {
    let ens = ensemble(cli)?;
    let t = cli
        .shared
        .t
        .ok_or_else(|| CliError::Input("power-mean needs --t <order in (0, 1)>".into()))?;
    let report = solve_power_mean(&ens, t, &options(cli))?;
    finish_report(cli, "power mean", report)
}

fn ncmeasure(cli: &Cli) -> Result<String> {
    let spec = DivergenceSpec::new(generator(cli)?)?;
    let ens = ensemble(cli)?;
    let report: NoncommutativityReport = noncommutativity_report(&ens, &spec, cli.shared.metric.into(), &options(cli))?;
    match cli.shared.format {
        OutputFormat::Json => pretty(&report),
        OutputFormat::Table => Ok(format!(
            "noncommutativity ({}): {}\nbarycenter:    {}\nmean equation: {}",
            report.metric,
            format::sig6(report.value),
            format::matrix(&report.barycenter.solution),
            format::matrix(&report.mean_equation.solution)
        )),
    }
}

const DUMPED_FAILURES: usize = 3;

fn render_properties(cli: &Cli, report: &PropertiesReport) -> Result<String> {
    if cli.shared.format == OutputFormat::Json {
        return pretty(report);
    }
    let mut lines = vec![format!(
        "generator {}, seed {}, dim {}",
        report.generator, report.seed, report.dim
    )];
    for c in &report.campaigns {
        let worst = if c.worst_slack.is_finite() {
            format::sig6(c.worst_slack)
        } else {
            "n/a".into()
        };
        lines.push(format!(
            "{:<36} {} {}/{} passed, {} discarded, worst slack {}",
            c.name,
            if c.all_passed() { "PASS" } else { "FAIL" },
            c.passed,
            c.trials,
            c.discarded,
            worst
        ));
        for f in c.failures.iter().take(DUMPED_FAILURES) {
            lines.push(format!(
                "  violation: trial {} (seed {}), slack {}, inputs {}",
                f.trial,
                f.seed,
                format::sig6(f.slack),
                serde_json::to_string(&f.inputs)?
            ));
        }
        if c.failures.len() > DUMPED_FAILURES {
            lines.push(format!("  ... {} more violations", c.failures.len() - DUMPED_FAILURES));
        }
    }
    Ok(lines.join("\n"))
}

fn properties(cli: &Cli) -> std::result::Result<String, Failure> {
    let spec = DivergenceSpec::new(generator(cli)?)?;
    let cfg = CampaignConfig {
        seed: cli.shared.seed,
        trials: cli.shared.trials,
        dim: cli.shared.dim,
    };
    let report = run_properties(&spec, &cfg, cli.shared.self_test)?;
    let output = render_properties(cli, &report)?;
    if report.all_passed() {
        Ok(output)
    } else {
        let failed: Vec<&str> = report
            .campaigns
            .iter()
            .filter(|c| !c.all_passed())
            .map(|c| c.name)
            .collect();
        Err(Failure {
            output: Some(output),
            error: CliError::Violation(format!("failed campaigns: {} (seed {})", failed.join(", "), cfg.seed)),
        })
    }
}

fn render_verification(cli: &Cli, r: &CounterexampleReport) -> Result<String> {
    if cli.shared.format == OutputFormat::Json {
        return pretty(r);
    }
    let status = |ok: bool| if ok { "ok" } else { "MISMATCH" };
    Ok([
        format!(
            "(a) barycenter            {}  reference {}  deltas {}  [{}]",
            format::grid(&r.barycenter.computed),
            format::grid(&r.barycenter.reference),
            format::grid(&r.barycenter.deltas),
            status(r.barycenter.matches)
        ),
        format!(
            "(b) power-mean map at (a) {}  reference {}  deltas {}  [{}]",
            format::grid(&r.map_at_barycenter.computed),
            format::grid(&r.map_at_barycenter.reference),
            format::grid(&r.map_at_barycenter.deltas),
            status(r.map_at_barycenter.matches)
        ),
        format!(
            "(c) power mean            {}  Frobenius gap to (a) {}  map gap {}  [{}]",
            format::grid(&r.power_mean),
            format::sig6(r.power_mean_gap),
            format::sig6(r.map_gap),
            status(r.power_mean_gap >= MIN_GAP && r.map_gap >= MIN_GAP)
        ),
        format!(
            "residual {}, iterations {}, max imaginary part {}, {} s",
            format::sig6(r.residual),
            r.iterations,
            format::sig6(r.max_imaginary),
            format::sig6(r.seconds)
        ),
    ]
    .join("\n"))
}

fn verify(cli: &Cli) -> std::result::Result<String, Failure> {
    let report = verify_counterexample(&options(cli))?;
    let output = render_verification(cli, &report)?;
    if report.passed {
        Ok(output)
    } else {
        Err(Failure {
            output: Some(output),
            error: CliError::Mismatch("computed values do not reproduce the reference counterexample".into()),
        })
    }
}
