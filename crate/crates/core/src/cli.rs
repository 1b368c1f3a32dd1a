//! Command-line front end.
//!
//! Exit codes: 0 success, 1 validation or configuration error, 2 invariant
//! failure, 3 I/O error. Settings resolve as flag > `--config` JSON file >
//! built-in default.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{self, coupon_statistics, sweep_noise};
use crate::chain::{mixing_time_bound, mixing_time_bound_general, TransitionMatrix};
use crate::experiment::{ExperimentConfig, InitialState, Mode, Simulator, DEFAULT_BURN_IN};
use crate::io::{self, fmt17, RunManifest};
use crate::quantum::{SquareOperators, CANONICAL_CONTEXTS};
use crate::verify;

pub const DEFAULT_ROUNDS: usize = 100_000;
pub const DEFAULT_SWEEP_ROUNDS: usize = 1_000_000;
pub const DEFAULT_TRIALS: usize = 10_000;
pub const DEFAULT_EPSILON: f64 = 1e-3;
pub const DEFAULT_GRID: &str = "0.70:0.05:1.00";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("invariant failure: {0}")]
    Invariant(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Invariant(_) => 2,
            CliError::Io { .. } => 3,
        }
    }

    fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "contextuality", version, about = "State-recycling Peres-Mermin contextuality simulator")]
pub struct Cli {
    /// RNG seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// JSON file with default settings; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Machine-readable output on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    /// Output path (a directory for `simulate`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Suppress informational output.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Chain,
    Quantum,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Chain => Mode::Chain,
            ModeArg::Quantum => Mode::Quantum,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the algebraic and spectral invariants.
    Verify {
        /// Flip the sign of observable k (1..=9) before checking.
        #[arg(long, hide = true)]
        corrupt_observable: Option<usize>,
    },
    /// Export the perfect (24-state) or noisy (48-state) transition matrix.
    Matrix {
        #[arg(long)]
        noise: Option<f64>,
        #[arg(long, value_enum)]
        format: Option<MatrixFormat>,
    },
    /// Simulate one recycled trajectory and evaluate the inequality.
    Simulate {
        #[arg(long)]
        rounds: Option<usize>,
        #[arg(long)]
        noise: Option<f64>,
        #[arg(long)]
        burn_in: Option<usize>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Initial triple state: a flat index 0..24 or "uniform".
        #[arg(long)]
        initial: Option<String>,
    },
    /// Tabulate worst-case distance to stationarity against the bound.
    Mixing {
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        noise: Option<f64>,
    },
    /// Coverage-time statistics over many trajectories.
    Coupon {
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        noise: Option<f64>,
        #[arg(long)]
        burn_in: Option<usize>,
    },
    /// Inequality value across a grid of alignment probabilities.
    Sweep {
        /// start:step:stop (inclusive) or comma-separated values.
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        rounds: Option<usize>,
    },
}

/// Settings accepted from `--config`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub rounds: Option<usize>,
    pub noise: Option<f64>,
    pub burn_in: Option<usize>,
    pub mode: Option<Mode>,
    pub initial: Option<String>,
    pub epsilon: Option<f64>,
    pub trials: Option<usize>,
    pub grid: Option<String>,
    pub format: Option<MatrixFormat>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
    }
}

/// Parses `start:step:stop` (inclusive) or `a,b,c`; every value must lie in [0, 1].
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| invalid(format!("grid: {s:?} is not a number")))
    };
    let values: Vec<f64> = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(invalid(format!("grid: {spec:?} is not start:step:stop")));
        }
        let (start, step, stop) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if step.is_nan() || step <= 0.0 || stop < start {
            return Err(invalid(format!("grid: {spec:?} needs step > 0 and stop >= start")));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        (0..=n)
            .map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12)
            .collect()
    } else {
        spec.split(',').map(num).collect::<Result<_, _>>()?
    };
    if values.is_empty() {
        return Err(invalid("grid is empty"));
    }
    if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(invalid(format!("grid value {v} outside [0, 1]")));
    }
    Ok(values)
}

fn parse_initial(s: &str) -> Result<InitialState, CliError> {
    if s.eq_ignore_ascii_case("uniform") {
        return Ok(InitialState::Uniform);
    }
    s.parse::<usize>()
        .map(InitialState::Index)
        .map_err(|_| invalid(format!("initial state {s:?} is neither an index nor \"uniform\"")))
}

fn check_noise(p: f64) -> Result<f64, CliError> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(invalid(format!("domain error: noise {p} outside [0, 1]")))
    }
}

fn square() -> Result<SquareOperators, CliError> {
    SquareOperators::peres_mermin().map_err(|e| CliError::Invariant(e.to_string()))
}

/// Parses `args` (program name first), runs, and maps the outcome to an exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if e.use_stderr() {
                write!(stderr, "{e}")
            } else {
                write!(stdout, "{e}")
            };
            return code;
        }
    };
    match run(&cli, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn main_from_env() -> ExitCode {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    ExitCode::from(main_with_args(
        std::env::args_os(),
        &mut stdout.lock(),
        &mut stderr.lock(),
    ))
}

struct Ctx<'a> {
    cli: &'a Cli,
    file: FileConfig,
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
    started: f64,
}

impl Ctx<'_> {
    fn seed(&self) -> u64 {
        self.cli.seed.or(self.file.seed).unwrap_or(0)
    }

    fn say(&mut self, text: &str) -> Result<(), CliError> {
        if !self.cli.quiet {
            self.stdout
                .write_all(text.as_bytes())
                .map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
        }
        Ok(())
    }

    fn emit(&mut self, text: &str) -> Result<(), CliError> {
        self.stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io(Path::new("<stdout>"), e))
    }

    fn note(&mut self, text: &str) {
        if !self.cli.quiet {
            let _ = self.stderr.write_all(text.as_bytes());
        }
    }

    /// Writes `data` to `path` plus a `<path>.manifest.json` beside it.
    fn write_with_manifest(
        &mut self,
        subcommand: &str,
        config: serde_json::Value,
        seed: Option<u64>,
        path: &Path,
        data: &[u8],
    ) -> Result<(), CliError> {
        let mut manifest = RunManifest::new(subcommand, config, seed, self.started);
        io::write_atomic(path, data).map_err(|e| CliError::io(path, e))?;
        manifest.record_output(path, data);
        let mpath = manifest_path(path);
        io::write_atomic(&mpath, manifest.to_json().as_bytes()).map_err(|e| {
            let _ = fs::remove_file(path);
            CliError::io(&mpath, e)
        })
    }
}

fn manifest_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    path.with_file_name(name)
}

pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let mut ctx = Ctx {
        cli,
        file,
        stdout,
        stderr,
        started: io::unix_now(),
    };
    match &cli.command {
        Command::Verify { corrupt_observable } => cmd_verify(&mut ctx, *corrupt_observable),
        Command::Matrix { noise, format } => cmd_matrix(&mut ctx, *noise, *format),
        Command::Simulate {
            rounds,
            noise,
            burn_in,
            mode,
            initial,
        } => cmd_simulate(&mut ctx, *rounds, *noise, *burn_in, *mode, initial.clone()),
        Command::Mixing { epsilon, noise } => cmd_mixing(&mut ctx, *epsilon, *noise),
        Command::Coupon { trials, noise, burn_in } => cmd_coupon(&mut ctx, *trials, *noise, *burn_in),
        Command::Sweep { grid, rounds } => cmd_sweep(&mut ctx, grid.clone(), *rounds),
    }
}

fn cmd_verify(ctx: &mut Ctx, corrupt: Option<usize>) -> Result<(), CliError> {
    let square = match corrupt {
        None => square()?,
        Some(k) if (1..=9).contains(&k) => {
            let mut obs = square()?.observables().to_vec();
            obs[k - 1] = obs[k - 1].scale_real(-1.0);
            SquareOperators::from_parts_unchecked(obs, CANONICAL_CONTEXTS)
        }
        Some(k) => return Err(invalid(format!("observable {k} outside 1..=9"))),
    };
    let report = verify::run_checks(&square);
    if ctx.cli.json {
        let text = serde_json::to_string_pretty(&report).expect("report serializes");
        ctx.emit(&(text + "\n"))?;
    } else {
        ctx.emit(&report.table())?;
    }
    if report.passed {
        Ok(())
    } else {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
        Err(CliError::Invariant(failed.join(", ")))
    }
}

#[derive(Serialize)]
struct MatrixSettings {
    noise: Option<f64>,
    format: MatrixFormat,
}

fn cmd_matrix(ctx: &mut Ctx, noise: Option<f64>, format: Option<MatrixFormat>) -> Result<(), CliError> {
    let settings = MatrixSettings {
        noise: noise.or(ctx.file.noise).map(check_noise).transpose()?,
        format: format.or(ctx.file.format).unwrap_or(MatrixFormat::Csv),
    };
    let perfect = TransitionMatrix::perfect(&square()?).map_err(|e| CliError::Invariant(e.to_string()))?;
    let matrix = match settings.noise {
        Some(p) => perfect.with_errors(p).map_err(invalid)?,
        None => perfect,
    };
    let text = match settings.format {
        MatrixFormat::Csv => io::matrix_csv(&matrix),
        MatrixFormat::Json => io::matrix_json(&matrix) + "\n",
    };
    let check = format!(
        "{}x{} matrix, max |column sum - 1| = {:e}\n",
        matrix.n(),
        matrix.n(),
        matrix.column_sum_error()
    );
    match ctx.cli.out.clone() {
        Some(path) => {
            let config = serde_json::to_value(&settings).expect("settings serialize");
            ctx.write_with_manifest("matrix", config, None, &path, text.as_bytes())?;
            ctx.say(&check)
        }
        None => {
            ctx.emit(&text)?;
            ctx.note(&check);
            Ok(())
        }
    }
}

fn cmd_simulate(
    ctx: &mut Ctx,
    rounds: Option<usize>,
    noise: Option<f64>,
    burn_in: Option<usize>,
    mode: Option<ModeArg>,
    initial: Option<String>,
) -> Result<(), CliError> {
    let p = check_noise(noise.or(ctx.file.noise).unwrap_or(1.0))?;
    let initial = match initial.or_else(|| ctx.file.initial.clone()) {
        Some(s) => parse_initial(&s)?,
        None => InitialState::Index(0),
    };
    let config = ExperimentConfig::new(rounds.or(ctx.file.rounds).unwrap_or(DEFAULT_ROUNDS))
        .with_burn_in(burn_in.or(ctx.file.burn_in).unwrap_or(DEFAULT_BURN_IN))
        .with_alignment(p)
        .with_seed(ctx.seed())
        .with_mode(mode.map(Mode::from).or(ctx.file.mode).unwrap_or(Mode::Chain))
        .with_initial_state(initial);
    config.validate().map_err(invalid)?;

    let square = square()?;
    let chain = TransitionMatrix::perfect(&square)
        .and_then(|t| t.with_errors(p))
        .map_err(|e| CliError::Invariant(e.to_string()))?;
    let traj = Simulator::new(&square, &chain)
        .and_then(|s| s.run(&config))
        .map_err(invalid)?;
    let report = analysis::analyze(&traj).map_err(invalid)?;
    let report_text = io::report_json(&report) + "\n";

    if let Some(dir) = ctx.cli.out.clone() {
        fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        let traj_path = dir.join("trajectory.csv");
        let report_path = dir.join("report.json");
        let manifest_path = dir.join("manifest.json");
        let traj_text = io::trajectory_csv(&traj);
        let mut manifest = RunManifest::new(
            "simulate",
            serde_json::to_value(&config).expect("config serializes"),
            Some(config.seed),
            ctx.started,
        );
        let result = (|| {
            io::write_atomic(&traj_path, traj_text.as_bytes()).map_err(|e| CliError::io(&traj_path, e))?;
            manifest.record_output(&traj_path, traj_text.as_bytes());
            io::write_atomic(&report_path, report_text.as_bytes()).map_err(|e| CliError::io(&report_path, e))?;
            manifest.record_output(&report_path, report_text.as_bytes());
            io::write_atomic(&manifest_path, manifest.to_json().as_bytes())
                .map_err(|e| CliError::io(&manifest_path, e))
        })();
        if result.is_err() {
            for p in [&traj_path, &report_path, &manifest_path] {
                let _ = fs::remove_file(p);
            }
        }
        result?;
    }
    if ctx.cli.json || ctx.cli.out.is_none() {
        ctx.emit(&report_text)
    } else {
        ctx.say(&format!(
            "value = {} +/- {} (bound 4, quantum 6), violated = {}\n",
            fmt17(report.value),
            fmt17(report.std_error),
            report.violated
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingTable {
    pub epsilon: f64,
    pub noise: Option<f64>,
    /// Analytic upper bound on the mixing time; absent when undefined.
    pub bound: Option<f64>,
    pub distances: Vec<f64>,
    /// First t with d(t) <= epsilon.
    pub crossing: Option<usize>,
}

pub fn mixing_table(epsilon: f64, noise: Option<f64>) -> Result<MixingTable, CliError> {
    let perfect = TransitionMatrix::perfect(&square()?).map_err(|e| CliError::Invariant(e.to_string()))?;
    let (chain, bound) = match noise {
        None => (perfect, mixing_time_bound(epsilon).map_err(invalid)?),
        Some(p) => {
            let chain = perfect.with_errors(check_noise(p)?).map_err(invalid)?;
            mixing_time_bound(epsilon).map_err(invalid)?;
            let pi = chain.stationary().map_err(|e| CliError::Invariant(e.to_string()))?;
            let pi_min = pi
                .as_slice()
                .iter()
                .copied()
                .filter(|&x| x > 0.0)
                .fold(f64::INFINITY, f64::min);
            let lambda = chain
                .spectrum()
                .map_err(|e| CliError::Invariant(e.to_string()))?
                .second_largest;
            let bound = mixing_time_bound_general(pi_min, lambda, epsilon).map_err(invalid)?;
            (chain, bound)
        }
    };
    let t_max = bound.ceil() as usize + 5;
    let distances = chain
        .distance_profile(t_max)
        .map_err(|e| CliError::Invariant(e.to_string()))?;
    let crossing = distances.iter().position(|&d| d <= epsilon);
    Ok(MixingTable {
        epsilon,
        noise,
        bound: Some(bound),
        distances,
        crossing,
    })
}

fn cmd_mixing(ctx: &mut Ctx, epsilon: Option<f64>, noise: Option<f64>) -> Result<(), CliError> {
    let epsilon = epsilon.or(ctx.file.epsilon).unwrap_or(DEFAULT_EPSILON);
    let noise = noise.or(ctx.file.noise);
    let table = mixing_table(epsilon, noise)?;
    let text = if ctx.cli.json {
        serde_json::to_string_pretty(&table).expect("table serializes") + "\n"
    } else {
        let mut s = format!(
            "epsilon = {epsilon:e}\nbound = {:.2}\n t  d(t)\n",
            table.bound.unwrap_or(f64::NAN)
        );
        for (t, d) in table.distances.iter().enumerate() {
            s.push_str(&format!("{t:2}  {d:.6e}{}\n", if Some(t) == table.crossing { "  <= epsilon" } else { "" }));
        }
        match table.crossing {
            Some(t) => s.push_str(&format!("first t with d(t) <= epsilon: {t}\n")),
            None => s.push_str("d(t) stays above epsilon over the table\n"),
        }
        s
    };
    match ctx.cli.out.clone() {
        Some(path) => {
            let config = serde_json::json!({ "epsilon": epsilon, "noise": noise });
            ctx.write_with_manifest("mixing", config, None, &path, text.as_bytes())
        }
        None => ctx.emit(&text),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouponReport {
    pub trials: usize,
    pub completed: usize,
    pub noise: f64,
    pub burn_in: usize,
    pub seed: u64,
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
    pub analytic: f64,
}

fn cmd_coupon(
    ctx: &mut Ctx,
    trials: Option<usize>,
    noise: Option<f64>,
    burn_in: Option<usize>,
) -> Result<(), CliError> {
    let trials = trials.or(ctx.file.trials).unwrap_or(DEFAULT_TRIALS);
    if trials == 0 {
        return Err(invalid("configuration error: trials must be at least 1"));
    }
    let p = check_noise(noise.or(ctx.file.noise).unwrap_or(1.0))?;
    let burn_in = burn_in.or(ctx.file.burn_in).unwrap_or(DEFAULT_BURN_IN);
    let seed = ctx.seed();
    let summary = coupon_statistics(&square()?, p, trials, seed, burn_in).map_err(invalid)?;
    let report = CouponReport {
        trials,
        completed: summary.completed,
        noise: p,
        burn_in,
        seed,
        mean: summary.mean,
        variance: summary.variance,
        std_error: summary.std_error,
        analytic: summary.analytic,
    };
    let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    match ctx.cli.out.clone() {
        Some(path) => {
            let config = serde_json::json!({ "trials": trials, "noise": p, "burn_in": burn_in });
            ctx.write_with_manifest("coupon", config, Some(seed), &path, text.as_bytes())
        }
        None => ctx.emit(&text),
    }
}

fn cmd_sweep(ctx: &mut Ctx, grid: Option<String>, rounds: Option<usize>) -> Result<(), CliError> {
    let spec = grid
        .or_else(|| ctx.file.grid.clone())
        .unwrap_or_else(|| DEFAULT_GRID.to_string());
    let values = parse_grid(&spec)?;
    let rounds = rounds.or(ctx.file.rounds).unwrap_or(DEFAULT_SWEEP_ROUNDS);
    ExperimentConfig::new(rounds).validate().map_err(invalid)?;
    let seed = ctx.seed();
    let points = sweep_noise(&square()?, &values, rounds, seed).map_err(invalid)?;
    let text = io::sweep_csv(&points);
    match ctx.cli.out.clone() {
        Some(path) => {
            let config = serde_json::json!({ "grid": spec, "values": values, "rounds": rounds });
            ctx.write_with_manifest("sweep", config, Some(seed), &path, text.as_bytes())
        }
        None => ctx.emit(&text),
    }
}
