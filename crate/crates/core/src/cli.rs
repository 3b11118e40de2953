//! Command-line front end.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::channels::{ChannelKind, TwoQubitNoise};
use crate::circuit::build_qpe;
use crate::engine::{run_exact, run_trajectories, SimMode, SimSpec, DEFAULT_SHOTS};
use crate::error::{Error, Result};
use crate::experiment::{
    emit_results, fit_all, io::fits_to_json, io::read_rows_file, run_sweep, write_figure_data,
    FitRecord, SweepConfig,
};
use crate::transpile::{gate_census, transpile};

#[derive(Debug, Parser)]
#[command(
    name = "qpe-lab",
    version,
    about = "Noisy quantum phase estimation experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the phase-estimation circuit in the text format.
    Build(BuildArgs),
    /// Simulate one circuit and print θ̄ and Δθ.
    Simulate(SimulateArgs),
    /// Run a sweep from a config file or preset and write CSV + JSON.
    Sweep(SweepArgs),
    /// Fit Δθ(p) = k1 + k2·exp(−k3·p) to every series of a sweep CSV.
    Fit(FitArgs),
    /// Write figure-ready data files from a sweep CSV.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=12))]
    pub n: u64,
    #[arg(long)]
    pub theta: f64,
    /// Rewrite into the {I, X, SX, Rz, CX} basis.
    #[arg(long)]
    pub transpile: bool,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ChannelArg {
    Bitflip,
    Phaseflip,
    Bitphaseflip,
    Depolarizing,
}

impl From<ChannelArg> for ChannelKind {
    fn from(c: ChannelArg) -> Self {
        match c {
            ChannelArg::Bitflip => ChannelKind::BitFlip,
            ChannelArg::Phaseflip => ChannelKind::PhaseFlip,
            ChannelArg::Bitphaseflip => ChannelKind::BitPhaseFlip,
            ChannelArg::Depolarizing => ChannelKind::Depolarizing,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Exact,
    Sampled,
}

impl From<ModeArg> for SimMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exact => SimMode::Exact,
            ModeArg::Sampled => SimMode::Sampled,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PlacementArg {
    Both,
    Target,
    None,
}

impl From<PlacementArg> for TwoQubitNoise {
    fn from(p: PlacementArg) -> Self {
        match p {
            PlacementArg::Both => TwoQubitNoise::Both,
            PlacementArg::Target => TwoQubitNoise::Target,
            PlacementArg::None => TwoQubitNoise::None,
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=11))]
    pub n: u64,
    #[arg(long)]
    pub theta: f64,
    #[arg(long, value_enum)]
    pub channel: ChannelArg,
    #[arg(long)]
    pub p: f64,
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = DEFAULT_SHOTS)]
    pub shots: u64,
    #[arg(long, env = "QPE_LAB_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long = "two-qubit-noise", value_enum, default_value = "both")]
    pub two_qubit_noise: PlacementArg,
    /// Also print the outcome distribution, one `k theta_hat probability` line per outcome.
    #[arg(long)]
    pub dump: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Preset {
    /// Four channels, n = 5, θ ∈ {1/32, 1/2, 31/32}, 26 points on [0, 0.05].
    Fig2,
    /// As fig2 on 21 points of [0, 0.01].
    Fit,
    /// Depolarizing, θ = 1/8, n = 3..=8, p = 0.001.
    Nsweep,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// TOML config file.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Override the config seed.
    #[arg(long, env = "QPE_LAB_SEED")]
    pub seed: Option<u64>,
    /// Fit window `lo:hi` for the JSON fits.
    #[arg(long, default_value = "0:0.01", value_parser = parse_window)]
    pub window: (f64, f64),
    /// Maximum number of sweep points simulated concurrently.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Also write figure data files.
    #[arg(long)]
    pub figures: bool,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Sweep CSV produced by `sweep`.
    #[arg(long)]
    pub csv: PathBuf,
    #[arg(long, default_value = "0:0.01", value_parser = parse_window)]
    pub window: (f64, f64),
    /// Write the fit JSON here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub csv: PathBuf,
    #[arg(long, default_value = "0:0.01", value_parser = parse_window)]
    pub window: (f64, f64),
    #[arg(long)]
    pub out: PathBuf,
}

pub fn parse_window(s: &str) -> std::result::Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("expected lo:hi, got `{s}`"))?;
    let lo: f64 = lo
        .trim()
        .parse()
        .map_err(|e| format!("window start: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("window end: {e}"))?;
    if lo.is_nan() || hi.is_nan() || lo > hi {
        return Err(format!("window start {lo} exceeds end {hi}"));
    }
    Ok((lo, hi))
}

/// Runs one command, writing user-facing output to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Build(args) => cmd_build(&args, out),
        Command::Simulate(args) => cmd_simulate(&args, out),
        Command::Sweep(args) => cmd_sweep(&args, out),
        Command::Fit(args) => cmd_fit(&args, out),
        Command::Report(args) => cmd_report(&args, out),
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())
        .map_err(|e| Error::io("<stdout>", e))
}

fn write_path(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn cmd_build(args: &BuildArgs, out: &mut dyn Write) -> Result<()> {
    let circuit = build_qpe(args.n as usize, args.theta)?;
    let text = if args.transpile {
        let basis = transpile(&circuit)?;
        let census = gate_census(&basis);
        let counts: Vec<String> = census
            .by_name
            .iter()
            .filter(|(_, v)| **v > 0)
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        format!("# basis gates: {}\n{}", counts.join(" "), basis.to_text())
    } else {
        circuit.to_text()
    };
    match &args.out {
        Some(path) => write_path(path, &text),
        None => emit(out, &text),
    }
}

pub fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<()> {
    let spec = SimSpec::qpe(args.n as usize, args.theta, args.channel.into(), args.p)?
        .with_two_qubit_noise(args.two_qubit_noise.into())
        .with_seed(args.seed);
    let dist = match SimMode::from(args.mode) {
        SimMode::Exact => run_exact(&spec)?,
        SimMode::Sampled => run_trajectories(&spec, args.shots)?,
    };
    let stats = dist.stats();
    let mut text = format!(
        "theta_bar={} delta_theta={}\n",
        stats.theta_bar, stats.delta_theta
    );
    if args.dump {
        for (k, p) in dist.probs().iter().enumerate() {
            writeln!(text, "{k} {} {p}", dist.estimate(k)).expect("writing to String");
        }
    }
    emit(out, &text)
}

fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Config(format!("cannot start {n} worker threads: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn successful_fits(
    rows: &[crate::experiment::SweepRow],
    window: (f64, f64),
) -> (Vec<FitRecord>, Vec<String>) {
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (key, fit) in fit_all(rows, window) {
        match fit {
            Ok(fit) => records.push(FitRecord::new(key, &fit)),
            Err(e) => failures.push(format!(
                "{} n={} theta={}: {e}",
                key.channel, key.n, key.theta_actual
            )),
        }
    }
    (records, failures)
}

pub fn cmd_sweep(args: &SweepArgs, out: &mut dyn Write) -> Result<()> {
    let mut cfg = match (&args.config, args.preset) {
        (Some(path), _) => SweepConfig::load(path)?,
        (None, Some(Preset::Fig2)) => SweepConfig::fig2(),
        (None, Some(Preset::Fit)) => SweepConfig::fit_window(),
        (None, Some(Preset::Nsweep)) => SweepConfig::n_sweep(0.001),
        (None, None) => {
            return Err(Error::Config(
                "either --config or --preset is required".into(),
            ))
        }
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    let rows = with_jobs(args.jobs, || run_sweep(&cfg))??;

    let (fits, skipped) = successful_fits(&rows, args.window);
    let mut preamble = cfg.describe();
    preamble.push((
        "fit_window".into(),
        format!("{}:{}", args.window.0, args.window.1),
    ));
    let mut written = emit_results(&rows, &fits, &preamble, &args.out)?;
    if args.figures {
        written.extend(write_figure_data(&rows, &fits, &args.out)?);
    }

    let mut text = format!("{} rows, {} fits\n", rows.len(), fits.len());
    for s in skipped {
        writeln!(text, "no fit: {s}").expect("writing to String");
    }
    for path in written {
        writeln!(text, "wrote {}", path.display()).expect("writing to String");
    }
    emit(out, &text)
}

/// Table of k1, k2, k3 per channel and θ, one block per n.
pub fn format_fit_table(fits: &[FitRecord]) -> String {
    let mut ns: Vec<usize> = fits.iter().map(|f| f.n).collect();
    ns.sort_unstable();
    ns.dedup();
    let mut text = String::new();
    for n in ns {
        let mut thetas: Vec<f64> = fits
            .iter()
            .filter(|f| f.n == n)
            .map(|f| f.theta_actual)
            .collect();
        thetas.sort_by(f64::total_cmp);
        thetas.dedup();
        writeln!(text, "n = {n}").unwrap();
        for theta in thetas {
            writeln!(text, "  theta_actual = {theta}").unwrap();
            writeln!(
                text,
                "    {:<16} {:>8} {:>8} {:>10} {:>8}",
                "Noise channel", "k1", "k2", "k3", "R^2"
            )
            .unwrap();
            for kind in ChannelKind::ALL.iter().rev() {
                if let Some(f) = fits
                    .iter()
                    .find(|f| f.n == n && f.theta_actual == theta && f.channel == *kind)
                {
                    writeln!(
                        text,
                        "    {:<16} {:>8.2} {:>8.2} {:>10.0} {:>8.4}{}",
                        kind.title(),
                        f.k1,
                        f.k2,
                        f.k3,
                        f.r_squared,
                        if f.converged { "" } else { "  (not converged)" }
                    )
                    .unwrap();
                }
            }
        }
    }
    text
}

pub fn cmd_fit(args: &FitArgs, out: &mut dyn Write) -> Result<()> {
    let rows = read_rows_file(&args.csv)?;
    let mut records = Vec::new();
    for (key, fit) in fit_all(&rows, args.window) {
        let fit = fit.map_err(|e| Error::InSeries {
            series: format!("{} n={} theta={}", key.channel, key.n, key.theta_actual),
            source: Box::new(e),
        })?;
        records.push(FitRecord::new(key, &fit));
    }
    if records.is_empty() {
        return Err(Error::TooFewPoints {
            got: 0,
            need: crate::experiment::fit::MIN_FIT_POINTS,
        });
    }
    let json = fits_to_json(&records)?;
    if let Some(path) = &args.out {
        write_path(path, &json)?;
    } else {
        emit(out, &json)?;
    }
    emit(out, &format_fit_table(&records))
}

pub fn cmd_report(args: &ReportArgs, out: &mut dyn Write) -> Result<()> {
    let rows = read_rows_file(&args.csv)?;
    let (fits, _) = successful_fits(&rows, args.window);
    let written = write_figure_data(&rows, &fits, &args.out)?;
    let mut text = String::new();
    for path in written {
        writeln!(text, "wrote {}", path.display()).unwrap();
    }
    emit(out, &text)
}
