//! `sgi run | sweep | validate`.

pub mod config;
pub mod output;
pub mod units;

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sgi_core::angular::{phase_uncertainty_mc, McEstimate};
use sgi_core::experiments::{fig3_scenarios, paths, summarize, sweep, RampMode, RunSummary, Series, Spacing};
use sgi_core::validation::all_pass;
use sgi_core::{
    run_oracles, Experiment, OracleReport, Scenario, SgiError, SweepRange, SweepSpec, SweepVar, ValidationOptions,
};

use crate::config::{parse_spins, ConfigError, RunSettings};
use crate::output::{label, num, sink, write_json, Table, SCHEMA_VERSION, VERSION};
use crate::units::Dim;

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;
pub const EXIT_VALIDATION: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "sgi", version, about = "Nanodiamond Stern-Gerlach interferometer simulator")]
pub struct Cli {
    /// Worker threads for sweeps and Monte Carlo (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Log progress and skipped stages to stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One interferometer shot with phase, spread and coherence summary.
    Run(RunArgs),
    /// Parameter sweep or named figure experiment, one row per point.
    Sweep(SweepArgs),
    /// Built-in oracle suite.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Ramp {
    Constant,
    Quadratic,
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override a config entry, e.g. `--set field.b0="5 G"`.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    pub set: Vec<String>,
    /// Output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Arm 1 spins per pulse, e.g. `-,0,-`.
    #[arg(long, allow_hyphen_values = true)]
    pub spin_arm1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub spin_arm2: Option<String>,
    #[arg(long, value_enum)]
    pub ramp: Option<Ramp>,
    /// Also write both arm trajectories as CSV.
    #[arg(long)]
    pub trajectory: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// run, fig3 ... fig10; sets the base scenario, default range and curves.
    #[arg(long, default_value = "run")]
    pub experiment: Experiment,
    /// Swept variable: theta0, omega_t, b0, b_grad, g_xi, d, t_theta.
    #[arg(long)]
    pub var: Option<SweepVar>,
    /// Range start with unit, e.g. "1 G".
    #[arg(long, allow_hyphen_values = true)]
    pub min: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub max: Option<String>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub log: bool,
    /// Drop the experiment's curve set and sweep the base scenario only.
    #[arg(long)]
    pub no_series: bool,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Reduced sample counts.
    #[arg(long)]
    pub quick: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub json: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Oracle failures, reported with exit code 4.
#[derive(Debug)]
pub struct ValidationFailed(pub usize);

impl std::fmt::Display for ValidationFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} oracle(s) failed", self.0)
    }
}

impl std::error::Error for ValidationFailed {}

pub fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<ConfigError>().is_some() || e.downcast_ref::<clap::Error>().is_some() {
        return EXIT_CONFIG;
    }
    if e.downcast_ref::<ValidationFailed>().is_some() {
        return EXIT_VALIDATION;
    }
    match e.downcast_ref::<SgiError>() {
        Some(SgiError::InvalidParameter { .. } | SgiError::UnbalancedArms { .. }) => EXIT_CONFIG,
        Some(_) => EXIT_NUMERICAL,
        None => 1,
    }
}

pub fn main_with(cli: Cli) -> ExitCode {
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: --threads: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Validate(a) => cmd_validate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn resolve(common: &Common, base: &Scenario) -> anyhow::Result<(Scenario, RunSettings)> {
    let file = config::load(common.config.as_deref(), &common.set)?;
    let (scn, mut settings) = file.apply(base)?;
    if let Some(seed) = common.seed {
        settings.seed = seed;
    }
    Ok((scn, settings))
}

fn config_json(scn: &Scenario) -> String {
    serde_json::to_string(scn).expect("scenario serializes")
}

#[derive(Serialize)]
struct RunReport<'a> {
    schema_version: u32,
    sgi_version: &'a str,
    seed: u64,
    config: &'a Scenario,
    summary: &'a RunSummary,
    /// Angular-only phase spread from sampling the closed-form phase.
    monte_carlo: McEstimate,
}

pub fn cmd_run(a: &RunArgs) -> anyhow::Result<()> {
    let (mut scn, settings) = resolve(&a.common, &Scenario::test_case())?;
    if let Some(s) = &a.spin_arm1 {
        scn.sequence.arm1 = parse_spins(s).map_err(|e| ConfigError(format!("--spin-arm1: {e}")))?;
    }
    if let Some(s) = &a.spin_arm2 {
        scn.sequence.arm2 = parse_spins(s).map_err(|e| ConfigError(format!("--spin-arm2: {e}")))?;
    }
    match a.ramp {
        Some(Ramp::Quadratic) => scn.ramp = RampMode::Compensating,
        Some(Ramp::Constant) => scn.ramp = RampMode::Constant,
        None => {}
    }
    scn.validate()?;
    let summary = summarize(&scn).context("stage: interferometer run")?;
    let stats = scn.angular_stats()?;
    let mc =
        phase_uncertainty_mc(&stats, summary.omega, scn.sequence.t_pulse, &scn.nd, settings.mc_samples, settings.seed)
            .context("stage: monte carlo")?;

    if let Some(path) = &a.trajectory {
        let run = scn.run(0.0, 0.0).context("stage: trajectory")?;
        let mut t = Table::new(
            [("t", "s"), ("arm", "1"), ("xi", "m"), ("zeta", "m"), ("theta_prime", "rad")]
                .iter()
                .map(|(n, u)| label(n, u))
                .chain(["resolved_config".to_string()])
                .collect(),
        );
        provenance(&mut t, "trajectory", settings.seed);
        let cfg = config_json(&scn);
        for r in paths(&run, &scn) {
            t.rows.push(vec![num(r.t), r.arm.to_string(), num(r.xi), num(r.zeta), num(r.theta_prime), cfg.clone()]);
        }
        t.write_csv(&mut *sink(Some(path))?)?;
    }

    let mut w = sink(a.common.out.as_deref())?;
    match a.format {
        Format::Json => write_json(
            &mut *w,
            &RunReport {
                schema_version: SCHEMA_VERSION,
                sgi_version: VERSION,
                seed: settings.seed,
                config: &scn,
                summary: &summary,
                monte_carlo: mc,
            },
        ),
        Format::Csv => {
            let value = serde_json::to_value(&summary)?;
            let fields = value.as_object().expect("summary is an object");
            let mut t = Table::new(fields.keys().cloned().chain(["resolved_config".to_string()]).collect());
            provenance(&mut t, "run", settings.seed);
            t.rows.push(
                fields
                    .values()
                    .map(|v| match v {
                        serde_json::Value::Number(n) => num(n.as_f64().unwrap_or(f64::NAN)),
                        serde_json::Value::Null => String::new(),
                        other => other.to_string(),
                    })
                    .chain([config_json(&scn)])
                    .collect(),
            );
            t.write_csv(&mut *w)
        }
    }
}

fn provenance(t: &mut Table, what: &str, seed: u64) {
    t.comment("sgi", VERSION);
    t.comment("schema_version", SCHEMA_VERSION);
    t.comment("output", what);
    t.comment("seed", seed);
}

pub fn sweep_dim(var: SweepVar) -> Option<Dim> {
    match var {
        SweepVar::Theta0 => Some(Dim::Angle),
        SweepVar::OmegaT => None,
        SweepVar::B0 => Some(Dim::Field),
        SweepVar::BGrad => Some(Dim::Gradient),
        SweepVar::GXi => Some(Dim::Acceleration),
        SweepVar::NvDistance => Some(Dim::Length),
        SweepVar::TTheta => Some(Dim::Temperature),
    }
}

fn bound(var: SweepVar, text: &str, which: &str) -> Result<f64, ConfigError> {
    match sweep_dim(var) {
        Some(dim) => units::parse(text, dim),
        None => text.trim().parse().map_err(|_| format!("'{text}' is not a number")),
    }
    .map_err(|e| ConfigError(format!("--{which}: {e}")))
}

/// Experiment defaults with the command-line range overrides applied.
pub fn sweep_spec(a: &SweepArgs) -> Result<SweepSpec, ConfigError> {
    let mut spec = a.experiment.default_sweep();
    if let Some(var) = a.var {
        if var != spec.variable && (a.min.is_none() || a.max.is_none()) {
            return Err(ConfigError(format!("--var {var} needs --min and --max")));
        }
        spec.variable = var;
    }
    if let Some(m) = &a.min {
        spec.range.min = bound(spec.variable, m, "min")?;
    }
    if let Some(m) = &a.max {
        spec.range.max = bound(spec.variable, m, "max")?;
    }
    if let Some(n) = a.points {
        spec.range.n_points = n;
    }
    if a.log {
        spec.range.spacing = Spacing::Log;
    }
    spec.validate().map_err(|e| ConfigError(e.to_string()))?;
    Ok(spec)
}

#[derive(Serialize)]
struct SweepReport<'a> {
    schema_version: u32,
    sgi_version: &'a str,
    experiment: &'a str,
    seed: u64,
    variable: SweepVar,
    range: &'a SweepRange,
    columns: Vec<String>,
    rows: Vec<SweepRecord>,
}

#[derive(Serialize)]
struct SweepRecord {
    index: usize,
    series: Vec<(SweepVar, f64)>,
    value: f64,
    outputs: Option<Vec<f64>>,
    error: Option<String>,
    resolved_config: Option<Scenario>,
}

pub fn cmd_sweep(a: &SweepArgs) -> anyhow::Result<()> {
    if a.experiment == Experiment::Fig3 {
        return fig3(a);
    }
    let spec = sweep_spec(a)?;
    let (base, settings) = resolve(&a.common, &a.experiment.base())?;
    base.validate()?;
    let series: Vec<Series> = if a.no_series { Vec::new() } else { a.experiment.default_series() };
    log::info!("{}: {} x {} points", a.experiment, series.len().max(1), spec.range.n_points);
    let rows = sweep(&base, a.experiment, &spec, &series).context("stage: sweep")?;
    let columns = a.experiment.columns();
    let series_vars: Vec<SweepVar> = series.first().map(|s| s.iter().map(|(v, _)| *v).collect()).unwrap_or_default();

    let mut w = sink(a.common.out.as_deref())?;
    match a.format {
        Format::Json => write_json(
            &mut *w,
            &SweepReport {
                schema_version: SCHEMA_VERSION,
                sgi_version: VERSION,
                experiment: a.experiment.name(),
                seed: settings.seed,
                variable: spec.variable,
                range: &spec.range,
                columns: columns.iter().map(|(n, u)| label(n, u)).collect(),
                rows: rows
                    .into_iter()
                    .map(|r| SweepRecord {
                        index: r.index,
                        series: r.series,
                        value: r.value,
                        error: r.outputs.as_ref().err().cloned(),
                        outputs: r.outputs.ok(),
                        resolved_config: r.scenario,
                    })
                    .collect(),
            },
        ),
        Format::Csv => {
            let mut header = vec!["index".to_string()];
            header.extend(series_vars.iter().map(|v| label(v.name(), v.unit())));
            header.push(label(spec.variable.name(), spec.variable.unit()));
            header.extend(columns.iter().map(|(n, u)| label(n, u)));
            header.extend(["error".to_string(), "resolved_config".to_string()]);
            let mut t = Table::new(header);
            provenance(&mut t, a.experiment.name(), settings.seed);
            for r in rows {
                let mut row = vec![r.index.to_string()];
                row.extend(r.series.iter().map(|(_, x)| num(*x)));
                row.push(num(r.value));
                match &r.outputs {
                    Ok(o) => row.extend(o.iter().map(|x| num(*x))),
                    Err(_) => row.extend(columns.iter().map(|_| String::new())),
                }
                row.push(r.outputs.err().unwrap_or_default());
                row.push(r.scenario.as_ref().map(config_json).unwrap_or_default());
                t.rows.push(row);
            }
            t.write_csv(&mut *w)
        }
    }
}

fn fig3(a: &SweepArgs) -> anyhow::Result<()> {
    if a.var.is_some() || a.min.is_some() || a.max.is_some() || a.points.is_some() {
        bail!(ConfigError("fig3 writes paths and takes no sweep range".into()));
    }
    let mut header = vec!["case".to_string()];
    header.extend(Experiment::Fig3.columns().iter().map(|(n, u)| label(n, u)));
    header.push("resolved_config".into());
    let mut t = Table::new(header);
    let mut seed = RunSettings::default().seed;
    for (case, mut base) in ["ideal", "tilted"].into_iter().zip(fig3_scenarios()) {
        base.numerics.record_stride = 20;
        let (scn, settings) = resolve(&a.common, &base)?;
        seed = settings.seed;
        scn.validate()?;
        let run = scn.run(0.0, 0.0).with_context(|| format!("stage: fig3 {case} run"))?;
        let cfg = config_json(&scn);
        for r in paths(&run, &scn) {
            t.rows.push(vec![
                case.to_string(),
                num(r.t),
                r.arm.to_string(),
                num(r.xi),
                num(r.zeta),
                num(r.theta_prime),
                cfg.clone(),
            ]);
        }
    }
    provenance(&mut t, "fig3", seed);
    let mut w = sink(a.common.out.as_deref())?;
    match a.format {
        Format::Csv => t.write_csv(&mut *w),
        Format::Json => bail!(ConfigError("fig3 paths are written as CSV only".into())),
    }
}

#[derive(Serialize)]
struct ValidateReport<'a> {
    schema_version: u32,
    sgi_version: &'a str,
    quick: bool,
    seed: u64,
    pass: bool,
    oracles: &'a [OracleReport],
}

pub fn cmd_validate(a: &ValidateArgs) -> anyhow::Result<()> {
    let mut opts = ValidationOptions { quick: a.quick, ..ValidationOptions::default() };
    if let Some(s) = a.seed {
        opts.seed = s;
    }
    let reports = run_oracles(&opts);
    let pass = all_pass(&reports);
    let mut w = sink(a.out.as_deref())?;
    if a.json {
        write_json(
            &mut *w,
            &ValidateReport {
                schema_version: SCHEMA_VERSION,
                sgi_version: VERSION,
                quick: a.quick,
                seed: opts.seed,
                pass,
                oracles: &reports,
            },
        )?;
    } else {
        for r in &reports {
            let verdict = match (r.informational, r.pass) {
                (true, _) => "INFO",
                (false, true) => "PASS",
                (false, false) => "FAIL",
            };
            writeln!(w, "{verdict}  {:<52} {:>10.3e}  tol {:.0e}  {}", r.name, r.observed, r.tolerance, r.detail)?;
        }
        w.flush()?;
    }
    if pass {
        Ok(())
    } else {
        Err(ValidationFailed(reports.iter().filter(|r| !r.pass && !r.informational).count()).into())
    }
}
