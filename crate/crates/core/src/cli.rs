//! Command-line front end.
//!
//! Every invocation resolves to an [`ExperimentConfig`], which doubles as the
//! JSON config file format, and runs through [`execute`]. Output is pinned:
//! CSV cells use [`fmt_sci`], lines end in `\n`, and randomness comes from a
//! ChaCha8 stream seeded by `--seed`, so a config and seed reproduce the same
//! bytes.
//!
//! Exit codes: 0 success, 1 check failure, 2 configuration error,
//! 3 numerical failure.

use std::f64::consts::LN_2;
use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::distortion::DistortionSpec;
use crate::error::Error;
use crate::fourier::FourierDensity;
use crate::group::{builtin_group, subgroup_closure, FiniteGroup, GroupFamily, GroupJson};
use crate::io::{fmt_sci, write_text, Table};
use crate::lab::{decay_bound_check, detect_obstruction, one_bit_floor, run_series, run_series_fourier};
use crate::measure::{
    compensation_identity_residual, divergence, divergence_to_uniform, haar_check, total_variation, GroupDistribution,
};
use crate::rd::{rd_curve, sandwich_check, uniform_rd_curve, BaOptions, BetaGrid};
use crate::transport::transport_distance;

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_INSTANCES: usize = 50;
pub const DEFAULT_BETAS: &str = "log:-20..0:40";
const DEFAULT_CHECK_GROUPS: [&str; 6] = ["cyclic:2", "cyclic:6", "cyclic:8", "dihedral:4", "symmetric:3", "cube"];
const CHECK_NAMES: [&str; 6] = ["haar", "pinsker", "compensation", "sandwich", "decay-bound", "one-bit"];

pub mod exit {
    pub const OK: i32 = 0;
    pub const CHECK_FAILED: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const NUMERICAL: i32 = 3;
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError {
            code: exit::CONFIG,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NoConvergence { .. } | Error::QuadratureFailure { .. } => exit::NUMERICAL,
            _ => exit::CONFIG,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    RdCurve,
    Converge,
    Check,
    Transport,
    GroupInfo,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Log,
    Linear,
}

/// `"log:-20..0:40"` or `{min, max, count, spacing}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BetaGridSpec {
    Text(String),
    Fields {
        min: f64,
        max: f64,
        count: usize,
        spacing: Spacing,
    },
}

impl BetaGridSpec {
    pub fn resolve(&self) -> CliResult<BetaGrid> {
        let text = match self {
            BetaGridSpec::Text(s) => s.clone(),
            BetaGridSpec::Fields {
                min,
                max,
                count,
                spacing,
            } => {
                let kind = if *spacing == Spacing::Log { "log" } else { "lin" };
                format!("{kind}:{min}..{max}:{count}")
            }
        };
        Ok(text.parse()?)
    }
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn is_false(b: &bool) -> bool {
    !*b
}

/// A complete, re-runnable description of one command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: CommandKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dist: Option<String>,
    /// Second distribution of `transport`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to: Option<String>,
    /// Source distribution of `rd-curve`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fourier: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub betas: Option<BetaGridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instances: Option<usize>,
    /// Coupling CSV destination for `transport`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<PathBuf>,
    /// Include the Cayley table in `group-info`.
    #[serde(default, skip_serializing_if = "is_false")]
    pub table: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "is_false")]
    pub bits: bool,
    #[serde(default, skip_serializing_if = "is_false")]
    pub json: bool,
}

impl ExperimentConfig {
    pub fn new(command: CommandKind) -> Self {
        ExperimentConfig {
            command,
            group: None,
            dist: None,
            to: None,
            source: None,
            profile: None,
            fourier: None,
            betas: None,
            n: None,
            burn_in: None,
            tol: None,
            max_iter: None,
            checks: Vec::new(),
            instances: None,
            coupling: None,
            table: false,
            out: None,
            seed: DEFAULT_SEED,
            bits: false,
            json: false,
        }
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::config(format!("bad config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }

    fn ba_options(&self) -> BaOptions {
        let d = BaOptions::default();
        BaOptions {
            tol: self.tol.unwrap_or(d.tol),
            max_iter: self.max_iter.unwrap_or(d.max_iter),
            ..d
        }
    }

    fn info_unit(&self) -> (&'static str, f64) {
        if self.bits {
            ("bits", 1.0 / LN_2)
        } else {
            ("nats", 1.0)
        }
    }

    fn require<'a>(&self, field: &'a Option<String>, name: &str) -> CliResult<&'a str> {
        field
            .as_deref()
            .ok_or_else(|| CliError::config(format!("--{name} is required for this command")))
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "haarlab",
    version,
    about = "Convolution, divergence to Haar measure and rate-distortion on compact groups"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,
    /// JSON experiment config, used instead of a subcommand
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output file; stdout when absent. Reports go next to it as .json
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Seed for random distributions and the check suite
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Report information quantities in bits instead of nats
    #[arg(long, global = true)]
    pub bits: bool,
    /// Emit a single JSON document
    #[arg(long, global = true)]
    pub json: bool,
    /// Print the resolved config and exit
    #[arg(long, global = true)]
    pub print_config: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Rate-distortion curve as (beta, delta, rate) rows
    RdCurve(RdCurveArgs),
    /// Convolution powers of a distribution: obstruction, series, fitted rate
    Converge(ConvergeArgs),
    /// Seeded property suite over built-in groups
    Check(CheckArgs),
    /// Exact transport distance between two distributions
    Transport(TransportArgs),
    /// Basic facts about a group
    GroupInfo(GroupInfoArgs),
}

#[derive(Args, Debug)]
pub struct RdCurveArgs {
    /// so2, cyclic:N, dihedral:N, symmetric:N, cube, or a group JSON file
    #[arg(long, default_value = "so2")]
    pub group: String,
    /// cosine, hamming or table:v0,v1,...
    #[arg(long)]
    pub profile: Option<String>,
    /// Source distribution (default uniform)
    #[arg(long, allow_hyphen_values = true)]
    pub source: Option<String>,
    /// log:MIN..MAX:COUNT or lin:MIN..MAX:COUNT
    #[arg(long, default_value = DEFAULT_BETAS)]
    pub betas: String,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
}

#[derive(Args, Debug)]
pub struct ConvergeArgs {
    #[arg(long)]
    pub group: Option<String>,
    /// uniform, random, point:K, uniform-on:A,B,..., or masses m0,m1,...
    #[arg(long, allow_hyphen_values = true)]
    pub dist: Option<String>,
    /// Circle density a1=AMP@PHASE,a2=...; replaces --group/--dist
    #[arg(long)]
    pub fourier: Option<String>,
    /// Number of convolution powers
    #[arg(long = "n")]
    pub n: Option<usize>,
    /// Adds a transport column
    #[arg(long)]
    pub profile: Option<String>,
    /// Leading entries skipped by the rate fit
    #[arg(long)]
    pub burn_in: Option<usize>,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    /// haar, pinsker, compensation, sandwich, decay-bound, one-bit (repeatable; default all)
    #[arg(long = "check")]
    pub checks: Vec<String>,
    /// Restrict to one group
    #[arg(long)]
    pub group: Option<String>,
    /// Extra distribution on --group, added to the applicable checks
    #[arg(long, allow_hyphen_values = true)]
    pub dist: Option<String>,
    /// Random instances per check and group
    #[arg(long)]
    pub instances: Option<usize>,
}

#[derive(Args, Debug)]
pub struct TransportArgs {
    #[arg(long)]
    pub group: String,
    #[arg(long, allow_hyphen_values = true)]
    pub dist: String,
    /// Target distribution (default uniform)
    #[arg(long, allow_hyphen_values = true)]
    pub to: Option<String>,
    #[arg(long)]
    pub profile: Option<String>,
    /// Write the optimal coupling as CSV
    #[arg(long, value_name = "PATH")]
    pub coupling: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GroupInfoArgs {
    #[arg(long)]
    pub group: String,
    /// Include the Cayley table
    #[arg(long)]
    pub table: bool,
}

impl Cli {
    /// Resolves flags or the config file into one config. Global flags given
    /// on the command line override the file.
    pub fn into_config(self) -> CliResult<ExperimentConfig> {
        let mut cfg = match (self.config, self.command) {
            (Some(_), Some(_)) => return Err(CliError::config("give either --config or a subcommand, not both")),
            (None, None) => return Err(CliError::config("no command given; see --help")),
            (Some(path), None) => {
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
                ExperimentConfig::from_json(&text)?
            }
            (None, Some(cmd)) => command_config(cmd),
        };
        if self.out.is_some() {
            cfg.out = self.out;
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        cfg.bits |= self.bits;
        cfg.json |= self.json;
        Ok(cfg)
    }
}

fn command_config(cmd: Command) -> ExperimentConfig {
    match cmd {
        Command::RdCurve(a) => ExperimentConfig {
            group: Some(a.group),
            profile: a.profile,
            source: a.source,
            betas: Some(BetaGridSpec::Text(a.betas)),
            tol: a.tol,
            max_iter: a.max_iter,
            ..ExperimentConfig::new(CommandKind::RdCurve)
        },
        Command::Converge(a) => ExperimentConfig {
            group: a.group,
            dist: a.dist,
            fourier: a.fourier,
            n: a.n,
            profile: a.profile,
            burn_in: a.burn_in,
            ..ExperimentConfig::new(CommandKind::Converge)
        },
        Command::Check(a) => ExperimentConfig {
            checks: a.checks,
            group: a.group,
            dist: a.dist,
            instances: a.instances,
            ..ExperimentConfig::new(CommandKind::Check)
        },
        Command::Transport(a) => ExperimentConfig {
            group: Some(a.group),
            dist: Some(a.dist),
            to: a.to,
            profile: a.profile,
            coupling: a.coupling,
            ..ExperimentConfig::new(CommandKind::Transport)
        },
        Command::GroupInfo(a) => ExperimentConfig {
            group: Some(a.group),
            table: a.table,
            ..ExperimentConfig::new(CommandKind::GroupInfo)
        },
    }
}

/// Result of a command, before anything is written.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Output {
    /// Goes to `--out`, or stdout.
    pub primary: String,
    /// JSON report; next to `--out` with a `.json` extension, or stderr.
    pub report: Option<String>,
    pub files: Vec<(PathBuf, String)>,
    pub exit_code: i32,
}

/// Parses arguments, runs, writes outputs; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::CONFIG } else { exit::OK };
            let _ = e.print();
            return code;
        }
    };
    let print_config = cli.print_config;
    let result = cli.into_config().and_then(|cfg| {
        if print_config {
            return Ok(Output {
                primary: cfg.to_json(),
                ..Output::default()
            });
        }
        let out = execute(&cfg)?;
        emit(&cfg, &out)?;
        Ok(Output {
            exit_code: out.exit_code,
            ..Output::default()
        })
    });
    match result {
        Ok(out) => {
            if !out.primary.is_empty() {
                print!("{}", out.primary);
            }
            out.exit_code
        }
        Err(e) => {
            eprintln!("haarlab: {e}");
            e.code
        }
    }
}

fn emit(cfg: &ExperimentConfig, out: &Output) -> CliResult<()> {
    let io = |e: Error| CliError::config(e.to_string());
    write_text(cfg.out.as_deref(), &out.primary).map_err(io)?;
    if let Some(report) = &out.report {
        match cfg.out.as_deref().filter(|p| p.as_os_str() != "-") {
            Some(p) => write_text(Some(&p.with_extension("json")), report).map_err(io)?,
            None => eprint!("{report}"),
        }
    }
    for (path, text) in &out.files {
        write_text(Some(path), text).map_err(io)?;
    }
    Ok(())
}

/// Runs one command without touching the filesystem (except to read group
/// JSON files).
pub fn execute(cfg: &ExperimentConfig) -> CliResult<Output> {
    match cfg.command {
        CommandKind::RdCurve => cmd_rd_curve(cfg),
        CommandKind::Converge => cmd_converge(cfg),
        CommandKind::Check => cmd_check(cfg),
        CommandKind::Transport => cmd_transport(cfg),
        CommandKind::GroupInfo => cmd_group_info(cfg),
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json value serializes") + "\n"
}

/// `cyclic:6`-style family names, or a path to a group JSON file.
pub fn parse_group(spec: &str) -> CliResult<Arc<FiniteGroup>> {
    if let Ok(family) = spec.parse::<GroupFamily>() {
        return Ok(builtin_group(family)?.0);
    }
    let path = Path::new(spec);
    if path.extension().is_some_and(|e| e == "json") {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read group file {spec}: {e}")))?;
        let json: GroupJson =
            serde_json::from_str(&text).map_err(|e| CliError::config(format!("bad group file {spec}: {e}")))?;
        return Ok(Arc::new(FiniteGroup::from_json(&json)?));
    }
    Err(CliError::config(format!(
        "unknown group '{spec}': use cyclic:N, dihedral:N, symmetric:N, cube or a .json Cayley table"
    )))
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> CliResult<Vec<T>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| CliError::config(format!("bad {what} '{t}' in '{text}'")))
        })
        .collect()
}

/// `uniform`, `random`, `point:K`, `uniform-on:A,B,...` or explicit masses.
pub fn parse_dist(spec: &str, group: &Arc<FiniteGroup>, rng: &mut ChaCha8Rng) -> CliResult<GroupDistribution> {
    let spec = spec.trim();
    let g = group.clone();
    let d = match spec.split_once(':') {
        _ if spec == "uniform" => GroupDistribution::uniform(g),
        _ if spec == "random" => GroupDistribution::new(g.clone(), random_mass(rng, g.order(), false))?,
        Some(("point", k)) => GroupDistribution::point(g, parse_list::<usize>(k, "element")?[0])?,
        Some(("uniform-on", ks)) => GroupDistribution::uniform_on(g, &parse_list::<usize>(ks, "element")?)?,
        _ => GroupDistribution::new(g, parse_list::<f64>(spec, "mass")?)?,
    };
    Ok(d)
}

/// `cosine`, `hamming` or `table:v0,v1,...`; by default cosine on standard
/// cyclic groups and hamming elsewhere.
pub fn parse_profile(spec: Option<&str>, group: &Arc<FiniteGroup>) -> CliResult<DistortionSpec> {
    let g = group.clone();
    let spec = match spec {
        Some(s) => s.trim(),
        None if group.is_standard_cyclic() => "cosine",
        None => "hamming",
    };
    Ok(match spec.split_once(':') {
        _ if spec == "cosine" => DistortionSpec::cosine(g)?,
        _ if spec == "hamming" => DistortionSpec::hamming(g)?,
        Some(("table", vals)) => DistortionSpec::table(g, parse_list(vals, "profile value")?)?,
        _ => {
            return Err(CliError::config(format!(
                "unknown profile '{spec}': use cosine, hamming or table:..."
            )))
        }
    })
}

/// Masses `U(0,1) + 10⁻³`, or with some entries zeroed when `sparse`.
fn random_mass(rng: &mut ChaCha8Rng, n: usize, sparse: bool) -> Vec<f64> {
    let mut m: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() + 1e-3).collect();
    if sparse {
        let zeros = rng.gen_range(0..n);
        for _ in 0..zeros {
            let k = rng.gen_range(0..n);
            m[k] = 0.0;
        }
        if m.iter().all(|&v| v == 0.0) {
            m[rng.gen_range(0..n)] = 1.0;
        }
    }
    m
}

fn cmd_rd_curve(cfg: &ExperimentConfig) -> CliResult<Output> {
    let group = cfg.group.as_deref().unwrap_or("so2");
    let grid = cfg
        .betas
        .clone()
        .unwrap_or(BetaGridSpec::Text(DEFAULT_BETAS.into()))
        .resolve()?;
    let betas = grid.values();
    let curve = if group == "so2" {
        if cfg.source.as_deref().is_some_and(|s| s != "uniform") {
            return Err(CliError::config("so2 supports the uniform source only"));
        }
        if cfg.profile.is_some() {
            return Err(CliError::config(
                "so2 uses its fixed 2 - 2cos distortion; drop --profile",
            ));
        }
        uniform_rd_curve(&DistortionSpec::so2(), &betas)?
    } else {
        let g = parse_group(group)?;
        let spec = parse_profile(cfg.profile.as_deref(), &g)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let source = parse_dist(cfg.source.as_deref().unwrap_or("uniform"), &g, &mut rng)?;
        rd_curve(&source, &spec, &betas, &cfg.ba_options())?
    };
    let (unit, scale) = cfg.info_unit();
    if cfg.json {
        let pts: Vec<Value> = curve
            .points
            .iter()
            .map(|p| json!({"beta": p.beta, "delta": p.delta, "rate": p.rate * scale}))
            .collect();
        let doc = json!({"source": curve.source, "group": group, "unit": unit, "points": pts});
        return Ok(Output {
            primary: pretty(&doc),
            ..Output::default()
        });
    }
    let mut t = Table::new(["beta".to_string(), "delta".into(), format!("rate_{unit}")]);
    for p in &curve.points {
        t.push(vec![fmt_sci(p.beta), fmt_sci(p.delta), fmt_sci(p.rate * scale)]);
    }
    Ok(Output {
        primary: t.to_csv(),
        ..Output::default()
    })
}

fn cmd_converge(cfg: &ExperimentConfig) -> CliResult<Output> {
    let (unit, scale) = cfg.info_unit();
    let burn_in = cfg.burn_in.unwrap_or(4);
    if let Some(f) = &cfg.fourier {
        if cfg.group.is_some() || cfg.dist.is_some() {
            return Err(CliError::config("--fourier replaces --group and --dist"));
        }
        let a: FourierDensity = f.parse()?;
        let n = cfg.n.unwrap_or(20);
        let series = run_series_fourier(&a, n)?;
        let fit = series.fit_rate(burn_in);
        let mut table = Table::new([
            "n".to_string(),
            format!("divergence_exact_{unit}"),
            format!("divergence_quadratic_{unit}"),
            format!("divergence_second_order_{unit}"),
        ]);
        for k in 0..n {
            table.push(vec![
                series.n_values[k].to_string(),
                fmt_sci(series.exact[k] * scale),
                fmt_sci(series.quadratic[k] * scale),
                fmt_sci(series.second_order[k] * scale),
            ]);
        }
        let report = json!({
            "fourier": a.to_inline(),
            "n": n,
            "unit": unit,
            "fit": fit.as_ref().ok(),
            "fit_error": fit.as_ref().err().map(|e| e.to_string()),
        });
        return Ok(finish_series(
            cfg,
            table,
            report,
            || json!({"exact": series.exact, "quadratic": series.quadratic, "second_order": series.second_order}),
        ));
    }
    let g = parse_group(cfg.require(&cfg.group, "group")?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let p = parse_dist(cfg.require(&cfg.dist, "dist")?, &g, &mut rng)?;
    let spec = match &cfg.profile {
        Some(s) => Some(parse_profile(Some(s), &g)?),
        None => None,
    };
    let n = cfg.n.unwrap_or(40);
    let obstruction = detect_obstruction(&p);
    let series = run_series(&p, n, spec.as_ref())?;
    let fit = series.fit_rate(burn_in);
    let mut table = series.to_table();
    if cfg.bits {
        table.header[1] = "divergence_bits".into();
        table.header[5] = "bound_(1-c)^(n-1)_bits".into();
        for (k, row) in table.rows.iter_mut().enumerate() {
            row[1] = fmt_sci(series.divergence[k] * scale);
            row[5] = fmt_sci(series.bound[k] * scale);
        }
    }
    let first = series.divergence[0];
    let constant = series
        .divergence
        .iter()
        .all(|d| (d - first).abs() <= 1e-12 * first.max(1.0));
    let report = json!({
        "group": cfg.group,
        "dist": p.mass(),
        "n": n,
        "unit": unit,
        "obstruction": obstruction,
        "divergence_first": first * scale,
        "divergence_last": series.divergence[n - 1] * scale,
        "divergence_constant": constant,
        "fit": fit.as_ref().ok(),
        "fit_error": fit.as_ref().err().map(|e| e.to_string()),
    });
    Ok(finish_series(cfg, table, report, || {
        serde_json::to_value(&series).expect("series serializes")
    }))
}

fn finish_series(cfg: &ExperimentConfig, table: Table, report: Value, series: impl FnOnce() -> Value) -> Output {
    if cfg.json {
        let mut doc = report;
        doc["series"] = series();
        return Output {
            primary: pretty(&doc),
            ..Output::default()
        };
    }
    Output {
        primary: table.to_csv(),
        report: Some(pretty(&report)),
        ..Output::default()
    }
}

fn cmd_transport(cfg: &ExperimentConfig) -> CliResult<Output> {
    let g = parse_group(cfg.require(&cfg.group, "group")?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let p = parse_dist(cfg.require(&cfg.dist, "dist")?, &g, &mut rng)?;
    let q = parse_dist(cfg.to.as_deref().unwrap_or("uniform"), &g, &mut rng)?;
    let spec = parse_profile(cfg.profile.as_deref(), &g)?;
    let t = transport_distance(&p, &q, &spec)?;
    let files = cfg
        .coupling
        .iter()
        .map(|path| (path.clone(), t.coupling.to_csv()))
        .collect();
    let primary = if cfg.json {
        pretty(&json!({"value": t.value, "coupling": t.coupling.joint}))
    } else {
        format!("transport_distance,{}\n", fmt_sci(t.value))
    };
    Ok(Output {
        primary,
        files,
        ..Output::default()
    })
}

fn cmd_group_info(cfg: &ExperimentConfig) -> CliResult<Output> {
    let spec = cfg.require(&cfg.group, "group")?;
    let g = parse_group(spec)?;
    let orders: Vec<usize> = (0..g.order()).map(|a| g.element_order(a)).collect();
    let labels: Vec<String> = (0..g.order()).map(|a| g.label(a)).collect();
    let mut doc = json!({
        "group": spec,
        "order": g.order(),
        "identity": g.identity(),
        "abelian": g.is_abelian(),
        "standard_cyclic": g.is_standard_cyclic(),
        "element_orders": orders,
        "inverses": g.inverses(),
        "labels": labels,
    });
    if cfg.table {
        doc["table"] = json!(g.table());
    }
    if cfg.json {
        return Ok(Output {
            primary: pretty(&doc),
            ..Output::default()
        });
    }
    let join = |v: &[usize]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",");
    let mut text = format!(
        "group: {spec}\norder: {}\nidentity: {}\nabelian: {}\nstandard_cyclic: {}\nelement_orders: {}\ninverses: {}\nlabels: {}\n",
        g.order(),
        g.identity(),
        g.is_abelian(),
        g.is_standard_cyclic(),
        join(&orders),
        join(g.inverses()),
        labels.join(","),
    );
    if cfg.table {
        text.push_str("table:\n");
        for row in g.table() {
            text.push_str(&join(&row));
            text.push('\n');
        }
    }
    Ok(Output {
        primary: text,
        ..Output::default()
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckSummary {
    pub name: String,
    pub group: String,
    pub instances: usize,
    pub passed: usize,
    pub failed: usize,
    /// Largest violation seen (positive means failure), where meaningful.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst: Option<f64>,
    /// First few failure descriptions.
    pub failures: Vec<String>,
}

impl CheckSummary {
    fn new(name: &str, group: &str) -> Self {
        CheckSummary {
            name: name.into(),
            group: group.into(),
            instances: 0,
            passed: 0,
            failed: 0,
            worst: None,
            failures: Vec::new(),
        }
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.instances += 1;
        if ok {
            self.passed += 1;
        } else {
            self.failed += 1;
            if self.failures.len() < 5 {
                self.failures.push(what());
            }
        }
    }

    fn worst(&mut self, v: f64) {
        self.worst = Some(self.worst.map_or(v, |w| w.max(v)));
    }
}

fn canonical_check(name: &str) -> CliResult<&'static str> {
    let norm = name.trim().replace('_', "-");
    CHECK_NAMES.iter().find(|c| **c == norm).copied().ok_or_else(|| {
        CliError::config(format!(
            "unknown check '{name}': expected one of {}",
            CHECK_NAMES.join(", ")
        ))
    })
}

fn cmd_check(cfg: &ExperimentConfig) -> CliResult<Output> {
    let checks: Vec<&str> = if cfg.checks.is_empty() {
        CHECK_NAMES.to_vec()
    } else {
        cfg.checks
            .iter()
            .map(|c| canonical_check(c))
            .collect::<CliResult<_>>()?
    };
    let groups: Vec<String> = match &cfg.group {
        Some(g) => vec![g.clone()],
        None => DEFAULT_CHECK_GROUPS.iter().map(|s| s.to_string()).collect(),
    };
    if cfg.dist.is_some() && cfg.group.is_none() {
        return Err(CliError::config("--dist in check needs --group"));
    }
    let instances = cfg.instances.unwrap_or(DEFAULT_INSTANCES).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut summaries = Vec::new();
    for name in &groups {
        let g = parse_group(name)?;
        let extra = match &cfg.dist {
            Some(d) => Some(parse_dist(d, &g, &mut rng)?),
            None => None,
        };
        for &check in &checks {
            let mut s = CheckSummary::new(check, name);
            match check {
                "haar" => check_haar(&g, &mut rng, instances, &mut s),
                "pinsker" => check_pinsker(&g, &mut rng, instances, extra.as_ref(), &mut s)?,
                "compensation" => check_compensation(&g, &mut rng, instances, &mut s)?,
                "sandwich" => check_sandwich(&g, &mut rng, instances, extra.as_ref(), cfg, &mut s)?,
                "decay-bound" => check_decay(&g, &mut rng, instances, extra.as_ref(), &mut s)?,
                "one-bit" => check_one_bit(&g, &mut rng, instances, extra.as_ref(), &mut s)?,
                _ => unreachable!("names are canonical"),
            }
            summaries.push(s);
        }
    }
    let passed: usize = summaries.iter().map(|s| s.passed).sum();
    let failed: usize = summaries.iter().map(|s| s.failed).sum();
    let doc = json!({
        "seed": cfg.seed,
        "instances": instances,
        "checks": summaries,
        "passed": passed,
        "failed": failed,
        "all_passed": failed == 0,
    });
    Ok(Output {
        primary: pretty(&doc),
        exit_code: if failed == 0 { exit::OK } else { exit::CHECK_FAILED },
        ..Output::default()
    })
}

fn random_dist(g: &Arc<FiniteGroup>, rng: &mut ChaCha8Rng, sparse: bool) -> CliResult<GroupDistribution> {
    Ok(GroupDistribution::new(g.clone(), random_mass(rng, g.order(), sparse))?)
}

fn check_haar(g: &Arc<FiniteGroup>, rng: &mut ChaCha8Rng, k: usize, s: &mut CheckSummary) {
    let u = GroupDistribution::uniform(g.clone());
    let r = haar_check(&u);
    s.record(r.is_haar && r.idempotent && r.full_support, || {
        "uniform rejected".into()
    });
    for _ in 1..k {
        if rng.gen_bool(0.5) {
            let p = GroupDistribution::new(g.clone(), random_mass(rng, g.order(), false)).expect("positive masses");
            let r = haar_check(&p);
            s.record(!r.is_haar, || format!("non-uniform accepted: {:?}", p.mass()));
        } else {
            let x = rng.gen_range(0..g.order());
            let f = subgroup_closure(g, &[x]).expect("valid element");
            let p = GroupDistribution::uniform_on(g.clone(), f.members()).expect("non-empty");
            let r = haar_check(&p);
            // U_F is Haar exactly when F = G
            s.record(r.is_haar == f.is_whole_group() && r.idempotent, || {
                format!("subgroup uniform on {:?} misclassified", f.members())
            });
        }
    }
}

fn check_pinsker(
    g: &Arc<FiniteGroup>,
    rng: &mut ChaCha8Rng,
    k: usize,
    extra: Option<&GroupDistribution>,
    s: &mut CheckSummary,
) -> CliResult<()> {
    let one = |p: &GroupDistribution, q: &GroupDistribution, s: &mut CheckSummary| -> CliResult<()> {
        let d = divergence(p, q)?;
        let tv = total_variation(p, q)?;
        let excess = 0.5 * tv * tv - d;
        s.worst(excess);
        s.record(excess <= 1e-15, || format!("½tv² − D = {excess:.3e}"));
        Ok(())
    };
    for _ in 0..k {
        let p = random_dist(g, rng, true)?;
        let q = random_dist(g, rng, false)?;
        one(&p, &q, s)?;
    }
    if let Some(p) = extra {
        one(p, &GroupDistribution::uniform(g.clone()), s)?;
    }
    Ok(())
}

fn check_compensation(g: &Arc<FiniteGroup>, rng: &mut ChaCha8Rng, k: usize, s: &mut CheckSummary) -> CliResult<()> {
    for _ in 0..k {
        let m = rng.gen_range(2..=4);
        let family = (0..m)
            .map(|_| random_dist(g, rng, true))
            .collect::<CliResult<Vec<_>>>()?;
        let weights: Vec<f64> = (0..m).map(|_| rng.gen::<f64>() + 1e-3).collect();
        let reference = random_dist(g, rng, false)?;
        let res = compensation_identity_residual(&family, &weights, &reference)?;
        s.worst(res);
        s.record(res <= 1e-10, || format!("residual {res:.3e}"));
    }
    Ok(())
}

fn check_sandwich(
    g: &Arc<FiniteGroup>,
    rng: &mut ChaCha8Rng,
    k: usize,
    extra: Option<&GroupDistribution>,
    cfg: &ExperimentConfig,
    s: &mut CheckSummary,
) -> CliResult<()> {
    let spec = parse_profile(None, g)?;
    let grid = cfg
        .betas
        .clone()
        .unwrap_or(BetaGridSpec::Text("log:-10..0:8".into()))
        .resolve()?;
    let betas = grid.values();
    let opts = cfg.ba_options();
    let one = |p: &GroupDistribution, s: &mut CheckSummary| -> CliResult<()> {
        let r = sandwich_check(p, &spec, &betas, &opts)?;
        let excess = r
            .rows
            .iter()
            .map(|row| (row.lower.max(0.0) - row.rate_p).max(row.rate_p - row.rate_u))
            .fold(f64::NEG_INFINITY, f64::max);
        s.worst(excess);
        s.record(r.violations.is_empty(), || {
            format!("{} band violations", r.violations.len())
        });
        Ok(())
    };
    for _ in 0..k {
        let p = random_dist(g, rng, true)?;
        one(&p, s)?;
    }
    if let Some(p) = extra {
        one(p, s)?;
    }
    Ok(())
}

fn check_decay(
    g: &Arc<FiniteGroup>,
    rng: &mut ChaCha8Rng,
    k: usize,
    extra: Option<&GroupDistribution>,
    s: &mut CheckSummary,
) -> CliResult<()> {
    let one = |p: &GroupDistribution, s: &mut CheckSummary| -> CliResult<()> {
        let r = decay_bound_check(p, 20)?;
        let worst = r.rows.iter().map(|row| -row.margin).fold(f64::NEG_INFINITY, f64::max);
        s.worst(worst);
        s.record(r.holds, || format!("bound exceeded by {worst:.3e}"));
        Ok(())
    };
    for _ in 0..k {
        let p = random_dist(g, rng, false)?;
        one(&p, s)?;
    }
    if let Some(p) = extra.filter(|p| p.min_density() > 0.0) {
        one(p, s)?;
    }
    Ok(())
}

fn check_one_bit(
    g: &Arc<FiniteGroup>,
    rng: &mut ChaCha8Rng,
    k: usize,
    extra: Option<&GroupDistribution>,
    s: &mut CheckSummary,
) -> CliResult<()> {
    let n = g.order() as f64;
    for _ in 0..k {
        let r = random_mass(rng, g.order(), true);
        let total: f64 = r.iter().sum();
        let mut t: f64 = rng.gen_range(0.05..=1.0);
        let p = loop {
            let mass: Vec<f64> = r.iter().map(|v| (1.0 - t) / n + t * v / total).collect();
            let p = GroupDistribution::new(g.clone(), mass)?;
            if divergence_to_uniform(&p) < LN_2 - 1e-9 {
                break p;
            }
            t *= 0.5;
        };
        let rep = one_bit_floor(&p)?;
        s.worst(rep.floor - rep.min_density_pp);
        s.record(rep.holds, || {
            format!("floor {} above min density {}", rep.floor, rep.min_density_pp)
        });
    }
    if let Some(p) = extra {
        let rep = one_bit_floor(p)?;
        if rep.applicable {
            s.record(rep.holds, || {
                format!("floor {} above min density {}", rep.floor, rep.min_density_pp)
            });
        }
    }
    // boundary: an index-2 subgroup has D = log 2 and P∗P vanishes off it
    let index_two = (0..g.order())
        .filter_map(|x| subgroup_closure(g, &[x]).ok())
        .find(|f| f.index() == 2);
    if let Some(f) = index_two {
        let p = GroupDistribution::uniform_on(g.clone(), f.members())?;
        let rep = one_bit_floor(&p)?;
        s.record(!rep.applicable && rep.min_density_pp == 0.0, || {
            "index-2 boundary case not sharp".into()
        });
    }
    Ok(())
}
