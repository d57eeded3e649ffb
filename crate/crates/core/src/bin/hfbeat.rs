#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use hfbeat::beat_model::{simulate, BeatModel, PulseModel};
use hfbeat::dataset::{load_dataset, parse_dataset, BeatDataset, DataPoint};
use hfbeat::fitting::{fit, residual_report, FitConfig, FitResult, GridAxis, UncertaintyMethod};
use hfbeat::hyperfine::{beat_spectrum, has_quadrupole, BeatComponent, BeatTemplate, HyperfineSystem};
use hfbeat::report::{fit_curve_csv, residuals_csv, FitReport};
use hfbeat::{Error, HalfInt};

/// Largest angular momentum any 6-j argument may take.
const MAX_TWICE_J: i32 = 25;

const EXIT_USAGE: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_CONVERGENCE: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "hfbeat", version, about = "Hyperfine quantum-beat polarization model and fitter")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the beat spectrum (constant term, frequencies, amplitudes).
    Freqs(FreqsArgs),
    /// Generate a synthetic dataset in the ingestion CSV format.
    Simulate(SimulateArgs),
    /// Fit A, B, δt and W to a dataset and write a JSON report.
    Fit(FitArgs),
    /// Fit a dataset and report the normalized residuals.
    Residuals(ResidualsArgs),
}

#[derive(Args, Debug, Clone)]
struct SystemArgs {
    /// Nuclear spin, e.g. 7/2.
    #[arg(long = "I", default_value = "7/2", value_parser = parse_half_int)]
    nuclear_spin: HalfInt,
    /// Electronic angular momentum of the level, e.g. 3/2.
    #[arg(long = "J", default_value = "3/2", value_parser = parse_half_int)]
    electronic_j: HalfInt,
}

#[derive(Args, Debug, Clone)]
struct ConstantsArgs {
    /// Magnetic dipole constant, MHz.
    #[arg(long = "A", default_value_t = 7.42, allow_negative_numbers = true)]
    a: f64,
    /// Electric quadrupole constant, MHz [default: 0.14, or 0 when the level
    /// has no quadrupole shift].
    #[arg(long = "B", allow_negative_numbers = true)]
    b: Option<f64>,
}

const DEFAULT_B: f64 = 0.14;

fn system_with_constants(args: &SystemArgs, constants: &ConstantsArgs) -> CliResult<HyperfineSystem> {
    let b = constants.b.unwrap_or_else(|| {
        if has_quadrupole(args.nuclear_spin, args.electronic_j) {
            DEFAULT_B
        } else {
            0.0
        }
    });
    system(args, constants.a, b)
}

#[derive(Args, Debug)]
struct FreqsArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[command(flatten)]
    constants: ConstantsArgs,
    /// Emit JSON instead of a table.
    #[arg(long)]
    json: bool,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[command(flatten)]
    constants: ConstantsArgs,
    /// Rectangular pulse width, ns.
    #[arg(long = "W", default_value_t = 0.0, allow_negative_numbers = true)]
    width: f64,
    /// Time offset added to every delay, ns.
    #[arg(long = "dt", default_value_t = 0.0, allow_negative_numbers = true)]
    dt: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    tmin: f64,
    #[arg(long, allow_negative_numbers = true)]
    tmax: Option<f64>,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    step: f64,
    /// Delays to sample: a dataset CSV (its t_ns column) or one number per line.
    #[arg(long, conflicts_with_all = ["tmax"])]
    times: Option<PathBuf>,
    /// Gaussian noise standard deviation on P_L, as a fraction.
    #[arg(long, allow_negative_numbers = true)]
    noise: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Sigma written for each point when no noise is added, as a fraction.
    #[arg(long, default_value_t = 0.01, allow_negative_numbers = true)]
    sigma: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum UncertaintyArg {
    Profile,
    Covariance,
}

#[derive(Args, Debug)]
struct FitOptions {
    /// Dataset CSV (`index,t_ns,PL_percent,sigma_percent`).
    input: PathBuf,
    #[command(flatten)]
    system: SystemArgs,
    /// Start-grid override, `NAME=lo:hi:step` or `NAME=value`; NAME is A, B, dt or W.
    #[arg(long = "grid", value_parser = parse_grid_override)]
    grid: Vec<(String, GridAxis)>,
    #[arg(long, value_enum, default_value = "profile")]
    uncertainty: UncertaintyArg,
    /// Refine only this many lowest-chi2 grid nodes.
    #[arg(long)]
    max_refinements: Option<usize>,
    /// Iteration cap for each local refinement.
    #[arg(long)]
    max_iterations: Option<usize>,
    /// Run the multi-start refinements on one thread.
    #[arg(long)]
    serial: bool,
}

#[derive(Args, Debug)]
struct FitArgs {
    #[command(flatten)]
    options: FitOptions,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write fit_curve.csv and residuals.csv into this directory.
    #[arg(long)]
    plot_dir: Option<PathBuf>,
    /// Spacing of the model curve in fit_curve.csv, ns.
    #[arg(long, default_value_t = 0.1)]
    curve_step: f64,
    /// Accepted for symmetry with the other commands; the report is always JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct ResidualsArgs {
    #[command(flatten)]
    options: FitOptions,
    #[arg(long)]
    json: bool,
    /// Write residuals.csv here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Lib(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Lib(e) => match e {
                Error::Parse { .. } | Error::Validation(_) | Error::Io { .. } => EXIT_DATA,
                Error::Convergence(_) | Error::Profile { .. } => EXIT_CONVERGENCE,
                Error::Domain(_) | Error::InvalidArgument(_) => EXIT_USAGE,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn parse_half_int(s: &str) -> Result<HalfInt, String> {
    let h: HalfInt = s.parse().map_err(|e: Error| e.to_string())?;
    if h.twice() < 0 {
        return Err("angular momentum must be >= 0".into());
    }
    if h.twice() > MAX_TWICE_J {
        return Err(format!("values above 25/2 are not supported, got {h}"));
    }
    Ok(h)
}

fn parse_grid_override(s: &str) -> Result<(String, GridAxis), String> {
    let (name, range) = s
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=lo:hi:step, got {s:?}"))?;
    let name = match name.trim() {
        n @ ("A" | "B" | "dt" | "W") => n.to_string(),
        other => return Err(format!("unknown grid parameter {other:?}; use A, B, dt or W")),
    };
    let nums: Vec<f64> = range
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("bad number {p:?} in {s:?}")))
        .collect::<Result<_, _>>()?;
    let axis = match nums.as_slice() {
        [v] => GridAxis::pinned(*v),
        [lo, hi] if lo == hi => GridAxis::pinned(*lo),
        [lo, hi] => return Err(format!("grid {name}={lo}:{hi} needs a step")),
        [lo, hi, step] => GridAxis::new(*lo, *hi, *step),
        _ => return Err(format!("expected NAME=lo:hi:step, got {s:?}")),
    };
    Ok((name, axis))
}

fn system(args: &SystemArgs, a: f64, b: f64) -> CliResult<HyperfineSystem> {
    if (args.nuclear_spin + args.electronic_j).twice() > MAX_TWICE_J {
        return Err(CliError::Usage(format!(
            "I + J = {} exceeds 25/2",
            args.nuclear_spin + args.electronic_j
        )));
    }
    Ok(HyperfineSystem::new(args.nuclear_spin, args.electronic_j, a, b)?)
}

fn write_output(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| {
            CliError::Lib(Error::Io {
                path: path.to_path_buf(),
                source,
            })
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct FreqsJson<'a> {
    #[serde(rename = "I")]
    nuclear_spin: String,
    #[serde(rename = "J")]
    electronic_j: String,
    #[serde(rename = "A_MHz")]
    a: f64,
    #[serde(rename = "B_MHz")]
    b: f64,
    constant: f64,
    components: &'a [BeatComponent],
}

fn cmd_freqs(args: &FreqsArgs) -> CliResult<()> {
    let sys = system_with_constants(&args.system, &args.constants)?;
    let spectrum = beat_spectrum(&sys);
    let text = if args.json {
        let doc = FreqsJson {
            nuclear_spin: sys.nuclear_spin.to_string(),
            electronic_j: sys.electronic_j.to_string(),
            a: sys.a,
            b: sys.b,
            constant: spectrum.constant,
            components: &spectrum.components,
        };
        serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
    } else {
        let mut t = String::new();
        let _ = writeln!(
            t,
            "# I = {}, J = {}, A = {} MHz, B = {} MHz",
            sys.nuclear_spin, sys.electronic_j, sys.a, sys.b
        );
        let _ = writeln!(t, "constant {:.6}", spectrum.constant);
        let _ = writeln!(t, "{:>5} {:>5} {:>12} {:>10}", "F", "F'", "nu_MHz", "amplitude");
        for c in &spectrum.components {
            let _ = writeln!(
                t,
                "{:>5} {:>5} {:>12.6} {:>10.6}",
                c.f.to_string(),
                c.f_prime.to_string(),
                c.nu,
                c.amplitude
            );
        }
        t
    };
    write_output(args.out.as_deref(), &text)
}

fn read_times(path: &Path) -> CliResult<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    if text.lines().any(|l| l.trim_start().starts_with("index,")) {
        return Ok(parse_dataset(&text)?.times());
    }
    let mut times = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let t: f64 = line.parse().map_err(|_| Error::Parse {
            line: n as u64 + 1,
            column: "t_ns".into(),
            message: format!("not a number: {line:?}"),
        })?;
        times.push(t);
    }
    Ok(times)
}

fn cmd_simulate(args: &SimulateArgs) -> CliResult<()> {
    let sys = system_with_constants(&args.system, &args.constants)?;
    let pulse = PulseModel::new(args.width, args.dt)?;
    if !(args.sigma > 0.0) {
        return Err(CliError::Usage("--sigma must be > 0".into()));
    }
    let times = match &args.times {
        Some(path) => read_times(path)?,
        None => {
            let tmax = args.tmax.unwrap_or(args.tmin);
            if tmax < args.tmin {
                return Err(CliError::Usage("--tmax is below --tmin".into()));
            }
            if tmax > args.tmin && !(args.step > 0.0) {
                return Err(CliError::Usage("--step must be > 0".into()));
            }
            GridAxis::new(args.tmin, tmax, args.step).values()
        }
    };
    let points = simulate(&sys, &pulse, &times, args.noise, args.seed)?;
    let data = BeatDataset::new(
        points
            .iter()
            .enumerate()
            .map(|(i, p)| DataPoint {
                index: i as i64 + 1,
                t: p.t,
                pl: p.pl,
                sigma: p.sigma.filter(|s| *s > 0.0).unwrap_or(args.sigma),
            })
            .collect(),
        0.0,
    )?;
    let mut text = format!(
        "# simulated: I = {}, J = {}, A = {} MHz, B = {} MHz, dt = {} ns, W = {} ns",
        sys.nuclear_spin, sys.electronic_j, sys.a, sys.b, pulse.dt_offset, pulse.width
    );
    if let Some(noise) = args.noise {
        let _ = write!(text, ", noise = {noise}");
        if let Some(seed) = args.seed {
            let _ = write!(text, ", seed = {seed}");
        }
    }
    text.push('\n');
    text.push_str(&data.to_csv());
    write_output(args.out.as_deref(), &text)
}

fn run_fit(opts: &FitOptions) -> CliResult<(BeatDataset, HyperfineSystem, FitConfig, FitResult)> {
    let sys = system(&opts.system, 0.0, 0.0)?;
    let data = load_dataset(&opts.input)?;
    let mut config = FitConfig::default();
    for (name, axis) in &opts.grid {
        match name.as_str() {
            "A" => config.a_grid = *axis,
            "B" => config.b_grid = *axis,
            "dt" => config.dt_grid = *axis,
            _ => config.w_grid = *axis,
        }
    }
    config.uncertainty = match opts.uncertainty {
        UncertaintyArg::Profile => UncertaintyMethod::Profile,
        UncertaintyArg::Covariance => UncertaintyMethod::Covariance,
    };
    config.max_refinements = opts.max_refinements;
    config.parallel = !opts.serial;
    if let Some(n) = opts.max_iterations {
        config.lm.max_iterations = n;
    }
    let result = fit(&data, &sys, &config)?;
    Ok((data, sys, config, result))
}

fn cmd_fit(args: &FitArgs) -> CliResult<()> {
    let (data, sys, config, result) = run_fit(&args.options)?;
    let report = FitReport::new(&result, &sys);
    write_output(args.out.as_deref(), &(report.to_json() + "\n"))?;

    if let Some(dir) = &args.plot_dir {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.clone(),
            source,
        })?;
        let model = BeatModel::new(BeatTemplate::for_system(&sys), config.geometry);
        let t_max = data.points.iter().map(|p| p.t).fold(f64::NEG_INFINITY, f64::max);
        let t_min = data.points.iter().map(|p| p.t).fold(0.0, f64::min);
        let curve = fit_curve_csv(&model, &result.params, t_min, t_max, args.curve_step);
        write_output(Some(&dir.join("fit_curve.csv")), &curve)?;
        write_output(Some(&dir.join("residuals.csv")), &residuals_csv(&result))?;
    }
    Ok(())
}

fn cmd_residuals(args: &ResidualsArgs) -> CliResult<()> {
    let (_, _, _, result) = run_fit(&args.options)?;
    let report = residual_report(&result);
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
    } else {
        println!("mean {:.6}", report.mean);
        println!("fraction_within_1sigma {:.6}", report.fraction_within_1sigma);
        println!("{:>6} {:>10} {:>12}", "index", "t_ns", "residual");
        for r in &report.per_point {
            println!("{:>6} {:>10.3} {:>12.6}", r.index, r.t_ns, r.normalized_residual);
        }
    }
    if let Some(out) = &args.out {
        write_output(Some(out), &residuals_csv(&result))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Freqs(a) => cmd_freqs(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Residuals(a) => cmd_residuals(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
