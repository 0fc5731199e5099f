//! Command-line front end for the `sphens` binary.
//!
//! Exit codes: 0 on success, 1 on runtime failure, 2 on usage or domain
//! errors.
//!
//! The top-level help lists every exact quantity and statistic id:
//!
//! ```
//! let help = sphens_cli::help_text();
//! for q in sphens_cli::exact::QUANTITIES {
//!     assert!(help.contains(q.name));
//! }
//! for id in sphens::experiments::STATISTIC_IDS {
//!     assert!(help.contains(id));
//! }
//! ```

pub mod exact;
pub mod plot;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde_json::json;
use sphens::estimators::{cap_discrepancy, largest_empty_cap, DiscrepancyMode, CANDIDATE_LIMIT};
use sphens::experiments::{self, ExperimentConfig, Parallelism, Statistic, STATISTIC_IDS};
use sphens::io::{self, SampleManifest, SOFTWARE_VERSION};
use sphens::samplers::{self, SamplerKind};
use sphens::{Configuration, Error, RngSeed};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or out-of-domain parameters (exit 2).
    Usage(String),
    /// Anything that fails while running (exit 1).
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_)
            | Error::InfiniteEnergy { .. }
            | Error::CandidateLimit { .. }
            | Error::UnboundStatistic(_) => CliError::Usage(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "sphens", version, about = "Spherical ensemble sampling, exact analytics and estimators")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "SPHENS_THREADS", value_parser = clap::value_parser!(u32).range(1..))]
    pub threads: Option<u32>,
    /// Print machine-readable JSON on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw one configuration and write it as CSV (or JSON for a .json path).
    Sample(SampleArgs),
    /// Evaluate an exact formula; prints JSON.
    Exact(ExactArgs),
    /// Evaluate statistics on a point file.
    Stats(StatsArgs),
    /// Run an experiment config file.
    Experiment(ExperimentArgs),
    /// Render a plot spec (or a built-in figure) to SVG.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long, value_enum)]
    pub sampler: SamplerArg,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output path; a manifest is written beside it. Default: stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SamplerArg {
    Matrix,
    Dpp,
    Iid,
}

impl From<SamplerArg> for SamplerKind {
    fn from(s: SamplerArg) -> Self {
        match s {
            SamplerArg::Matrix => SamplerKind::Matrix,
            SamplerArg::Dpp => SamplerKind::Dpp,
            SamplerArg::Iid => SamplerKind::Iid,
        }
    }
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    /// Quantity name (see the list below).
    pub quantity: String,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub s: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub x: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub area: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Auto,
    Grid,
    CandidateExact,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Point file (CSV `x,y,z` or JSON).
    pub input: PathBuf,
    /// Statistic ids to evaluate (default: all).
    #[arg(long = "statistic", value_name = "ID")]
    pub statistics: Vec<String>,
    /// Riesz exponent.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub s: f64,
    /// Area fraction of the fixed cap used by cap statistics.
    #[arg(long, default_value_t = 0.2)]
    pub alpha: f64,
    /// Pair-count threshold; default `t = 2 n^(-3/4)`.
    #[arg(long)]
    pub t: Option<f64>,
    /// Cap discrepancy mode; `auto` is exact up to the candidate limit.
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    pub discrepancy_mode: ModeArg,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// TOML config (`experiment_schema = 1`).
    pub config: PathBuf,
    /// Override the configured output directory.
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    /// Recompute 1% of replicates afterwards and compare bitwise.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Preset {
    /// Spacing density Q(x) against e^(-x).
    Figure1,
    /// Energy-bound coefficients over s in (-2, 2).
    Figure2,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// PlotSpec JSON file.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    pub spec: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Output SVG path (overrides the spec's `output`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// For figure1: replicates of the empirical overlay (0 = curves only).
    #[arg(long, default_value_t = 0)]
    pub replicates: u64,
    /// For figure1: points per replicate.
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

/// Text appended to `--help`, listing the registries.
pub fn help_text() -> String {
    let mut s = String::from("Exact quantities (sphens exact <quantity>):\n");
    for q in exact::QUANTITIES {
        let flags: Vec<String> = q.params.iter().map(|p| format!("--{}", p.flag())).collect();
        s.push_str(&format!("  {:<28} {:<20} {}\n", q.name, flags.join(" "), q.about));
    }
    s.push_str("\nStatistic ids (sphens stats --statistic <id>, experiment configs):\n");
    for id in STATISTIC_IDS {
        s.push_str(&format!("  {id}\n"));
    }
    s.push_str("\nExit codes: 0 success, 1 runtime error, 2 usage or domain error.\n");
    s
}

pub fn command() -> clap::Command {
    let help = help_text();
    Cli::command()
        .after_help(help.clone())
        .mut_subcommand("exact", |c| c.after_help(help.clone()))
        .mut_subcommand("stats", |c| c.after_help(help))
}

/// Parses `args`, runs the command and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return 2;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn thread_count(cli: &Cli) -> Option<usize> {
    cli.threads.map(|t| t as usize)
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(t) = thread_count(cli) {
        // ignore a pool that is already built (repeated calls in one process)
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let mut out = std::io::stdout().lock();
    match &cli.command {
        Command::Sample(a) => cmd_sample(a, cli.json, &mut out),
        Command::Exact(a) => cmd_exact(a, &mut out),
        Command::Stats(a) => cmd_stats(a, cli.json, &mut out),
        Command::Experiment(a) => cmd_experiment(a, thread_count(cli), cli.json, &mut out),
        Command::Plot(a) => cmd_plot(a, cli.json, &mut out),
    }
}

fn print_json(out: &mut dyn Write, v: &serde_json::Value) -> Result<(), CliError> {
    writeln!(out, "{}", serde_json::to_string_pretty(v).expect("json value"))?;
    Ok(())
}

pub fn cmd_sample(a: &SampleArgs, json: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let kind = SamplerKind::from(a.sampler);
    let n = usize::try_from(a.n).map_err(|_| CliError::Usage(format!("n = {} is too large", a.n)))?;
    let config = samplers::sample(kind, n, RngSeed(a.seed))?;
    let manifest = SampleManifest { sampler: kind.name().into(), n, seed: a.seed, software_version: SOFTWARE_VERSION.into() };
    match &a.out {
        Some(path) => {
            io::write_points(path, config.points())?;
            let mpath = io::manifest_path(path);
            fs::write(&mpath, serde_json::to_string_pretty(&manifest).expect("manifest"))?;
            if json {
                print_json(out, &json!({ "points": path, "manifest": mpath, "sampler": kind.name(), "n": n, "seed": a.seed }))?;
            }
        }
        None if json => {
            io::write_json(config.points(), &mut *out)?;
            writeln!(out)?;
        }
        None => io::write_csv(config.points(), &mut *out)?,
    }
    Ok(())
}

pub fn cmd_exact(a: &ExactArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let inputs = exact::Inputs { n: a.n, s: a.s, alpha: a.alpha, k: a.k, x: a.x, t: a.t, area: a.area };
    let result = exact::evaluate(&a.quantity, &inputs)?;
    print_json(out, &serde_json::to_value(result).expect("exact output"))
}

/// Builds the statistic for `id` with the flags of `stats`.
pub fn statistic_for(id: &str, a: &StatsArgs, n: usize) -> Result<Statistic, CliError> {
    Ok(match id {
        "riesz_energy" => Statistic::RieszEnergy { s: a.s },
        "log_energy" => Statistic::LogEnergy,
        "l2_discrepancy_sq" => Statistic::L2DiscrepancySq,
        "min_spacing" => Statistic::MinSpacing,
        "pair_count" => match a.t {
            Some(t) => Statistic::PairCount { t: Some(t), x: None },
            None => Statistic::PairCount { t: None, x: Some(2.0) },
        },
        "cap_count" => Statistic::CapCount { alpha: a.alpha },
        "cap_count_centered_sq" => Statistic::CapCountCenteredSq { alpha: a.alpha },
        "hole" => Statistic::Hole { alpha: a.alpha },
        "cap_discrepancy" => Statistic::CapDiscrepancy {
            mode: match a.discrepancy_mode {
                ModeArg::Grid => DiscrepancyMode::Grid,
                ModeArg::CandidateExact => DiscrepancyMode::CandidateExact,
                ModeArg::Auto if n <= CANDIDATE_LIMIT => DiscrepancyMode::CandidateExact,
                ModeArg::Auto => DiscrepancyMode::Grid,
            },
        },
        "largest_empty_cap" => Statistic::LargestEmptyCap,
        other => return Err(CliError::Usage(format!("unknown statistic `{other}`; run `sphens stats --help`"))),
    })
}

fn stat_details(st: &Statistic, config: &Configuration) -> Option<serde_json::Value> {
    match st {
        Statistic::CapDiscrepancy { mode } => cap_discrepancy(config, *mode).ok().map(|r| {
            let c = r.witness_cap.center();
            json!({
                "lower_bound": r.lower_bound,
                "witness_center": [c.x(), c.y(), c.z()],
                "witness_chord_radius": r.witness_cap.chord_radius(),
                "witness_count": r.witness_count,
            })
        }),
        Statistic::LargestEmptyCap => largest_empty_cap(config).ok().map(|e| {
            json!({ "center": e.center.to_array(), "chord_radius": e.chord_radius, "tolerance": e.tolerance })
        }),
        _ => None,
    }
}

pub fn cmd_stats(a: &StatsArgs, json: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let points = io::read_points(&a.input)?;
    let n = points.len();
    let config = Configuration::new(points, "file", 0)?;
    let ids: Vec<String> =
        if a.statistics.is_empty() { STATISTIC_IDS.iter().map(|s| s.to_string()).collect() } else { a.statistics.clone() };
    let stats: Vec<Statistic> = ids.iter().map(|id| statistic_for(id, a, n)).collect::<Result<_, _>>()?;
    for st in &stats {
        st.validate()?;
    }
    let mut rows = Vec::new();
    let mut failed = 0;
    for st in &stats {
        let mut row = json!({ "statistic": st.id(), "params": st.params() });
        match st.evaluate(&config) {
            Ok(v) => {
                row["value"] = json!(v);
                if let Some(d) = stat_details(st, &config) {
                    row["details"] = d;
                }
            }
            Err(e) => {
                failed += 1;
                row["error"] = json!(e.to_string());
            }
        }
        rows.push(row);
    }
    if json {
        print_json(out, &json!({ "n": n, "statistics": rows }))?;
    } else {
        writeln!(out, "n = {n}")?;
        for r in &rows {
            let name = match r["params"].as_str() {
                Some(p) if !p.is_empty() => format!("{} ({p})", r["statistic"].as_str().unwrap_or_default()),
                _ => r["statistic"].as_str().unwrap_or_default().to_string(),
            };
            match r.get("value") {
                Some(v) => writeln!(out, "{name}: {v}")?,
                None => writeln!(out, "{name}: error: {}", r["error"].as_str().unwrap_or_default())?,
            }
        }
    }
    if failed > 0 {
        return Err(CliError::Runtime(format!("{failed} statistic(s) failed")));
    }
    Ok(())
}

pub fn cmd_experiment(a: &ExperimentArgs, threads: Option<usize>, json: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let text = fs::read_to_string(&a.config)?;
    let mut config = ExperimentConfig::from_toml(&text).map_err(|e| match e {
        Error::Parse(m) => CliError::Usage(format!("{}: {m}", a.config.display())),
        other => CliError::from(other),
    })?;
    if let Some(dir) = &a.output_dir {
        config.output_dir = dir.clone();
    } else if config.output_dir.is_relative() {
        let base = a.config.parent().unwrap_or(Path::new("."));
        config.output_dir = base.join(&config.output_dir);
    }
    if let Some(t) = threads {
        config.parallelism = Parallelism::Threads(t);
    }
    let outcome = experiments::run_experiment(&config)?;
    let report = if a.verify { Some(experiments::verify(&config)?) } else { None };
    if json {
        print_json(
            out,
            &json!({
                "summaries": outcome.summaries,
                "raw": outcome.raw_path,
                "summary": outcome.summary_path,
                "manifest": outcome.manifest_path,
                "error_count": outcome.manifest.error_count,
                "verify": report,
            }),
        )?;
    } else {
        writeln!(out, "{:<24} {:<16} {:>6} {:<7} {:>14} {:>12} {:>14} {:>8}", "statistic", "params", "n", "sampler", "mean", "stderr", "exact", "z")?;
        for r in &outcome.summaries {
            let exact = r.exact_value.map_or("-".to_string(), |v| format!("{v:.6e}"));
            let z = r.z_score.map_or("-".to_string(), |v| format!("{v:.2}{}", if r.flagged { "!" } else { "" }));
            writeln!(out, "{:<24} {:<16} {:>6} {:<7} {:>14.6e} {:>12.3e} {:>14} {:>8}", r.statistic, r.params, r.n, r.sampler, r.mean, r.stderr, exact, z)?;
        }
        writeln!(out, "raw values: {}", outcome.raw_path.display())?;
        writeln!(out, "errors: {}", outcome.manifest.error_count)?;
        if let Some(rep) = &report {
            writeln!(out, "verify: {} values checked, {} mismatches", rep.checked, rep.mismatches.len())?;
        }
    }
    if let Some(rep) = report {
        if !rep.mismatches.is_empty() {
            return Err(CliError::Runtime(format!("verify found {} mismatches", rep.mismatches.len())));
        }
    }
    Ok(())
}

pub fn cmd_plot(a: &PlotArgs, json: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let (spec, base) = match (&a.spec, a.preset) {
        (Some(path), _) => {
            let text = fs::read_to_string(path)?;
            let spec: plot::PlotSpec =
                serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            (spec, path.parent().unwrap_or(Path::new(".")).to_path_buf())
        }
        (None, Some(Preset::Figure1)) => (plot::figure1(a.replicates, a.n, a.seed), PathBuf::from(".")),
        (None, Some(Preset::Figure2)) => (plot::figure2(), PathBuf::from(".")),
        (None, None) => return Err(CliError::Usage("give --spec or --preset".into())),
    };
    let target = a
        .out
        .clone()
        .or_else(|| spec.output.as_ref().map(|p| if p.is_absolute() { p.clone() } else { base.join(p) }))
        .ok_or_else(|| CliError::Usage("no output path: give --out or set `output` in the spec".into()))?;
    let svg = plot::render(&spec, &base)?;
    fs::write(&target, svg)?;
    if json {
        print_json(out, &json!({ "output": target, "series": spec.series.len() }))?;
    }
    Ok(())
}
