//! The `photonweak` command-line front end.
//!
//! Every subcommand accepts the same parameter flags. Values can also come
//! from a YAML (or JSON) file passed with `--config`; flags win over file
//! values and unknown file keys are rejected.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 2 | command-line usage error |
//! | 3 | config file unreadable or malformed |
//! | 4 | conflicting values |
//! | 5 | parameter out of range |
//! | 6 | simulation or analysis error |
//! | 7 | I/O error while writing output |
//! | 8 | `gate-verify` infidelity above tolerance |

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::counting::{run_fig2, RunPlan, DEFAULT_K_GRID};
use crate::device::{run_device, DeviceConfig, TwoQubitState};
use crate::imperfection::{DeviceModel, ImperfectionParams};
use crate::tomography::{format_real, process_tomography};
use crate::weak::{povm_elements, weak_value_analytic, MeterSetting, Polarization, PostselectState};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "PHOTONWEAK_OUT_DIR";

/// Largest accepted `1 − F` in `gate-verify`.
pub const GATE_TOLERANCE: f64 = 1e-10;

/// Meter preparations checked by `gate-verify`.
pub const GATE_GAMMAS: [f64; 5] = [std::f64::consts::FRAC_1_SQRT_2, 0.75, 0.8, 0.9, 1.0];

/// Random signal states per meter preparation in `gate-verify`.
pub const GATE_SIGNALS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Success = 0,
    Usage = 2,
    ConfigFile = 3,
    Conflict = 4,
    OutOfRange = 5,
    Library = 6,
    Io = 7,
    GateFailed = 8,
}

impl ExitCode {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    ConfigFile(String),
    Conflict(String),
    OutOfRange(String),
    Library(crate::Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::Usage,
            CliError::ConfigFile(_) => ExitCode::ConfigFile,
            CliError::Conflict(_) => ExitCode::Conflict,
            CliError::OutOfRange(_) => ExitCode::OutOfRange,
            CliError::Library(_) => ExitCode::Library,
            CliError::Io(_) => ExitCode::Io,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::ConfigFile(m) => write!(f, "config file: {m}"),
            CliError::Conflict(m) => write!(f, "conflicting values: {m}"),
            CliError::OutOfRange(m) => write!(f, "out of range: {m}"),
            CliError::Library(e) => write!(f, "{e}"),
            CliError::Io(m) => write!(f, "i/o: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Library(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum Command {
    /// Compare Fock-level propagation with the ideal two-qubit gate.
    GateVerify,
    /// Print the POVM elements realized on the signal.
    Povm,
    /// Print the postselected weak value of S1.
    WeakValue,
    /// Simulate the strength sweep and write its CSV.
    Fig2,
    /// Reconstruct the device's chi matrix and write it as CSV.
    Tomo,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::GateVerify => "gate-verify",
            Command::Povm => "povm",
            Command::WeakValue => "weak-value",
            Command::Fig2 => "fig2",
            Command::Tomo => "tomo",
        }
    }

    fn default_file(self) -> Option<&'static str> {
        match self {
            Command::Fig2 => Some("fig2.csv"),
            Command::Tomo => Some("chi.csv"),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum PostChoice {
    A,
    D,
}

impl PostChoice {
    fn state(self) -> PostselectState {
        match self {
            PostChoice::A => PostselectState::A,
            PostChoice::D => PostselectState::D,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "photonweak", version, about = "Postselected weak measurement of photon polarization")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Compare Fock-level propagation with the ideal two-qubit gate.
    GateVerify(Flags),
    /// Print the POVM elements realized on the signal.
    Povm(Flags),
    /// Print the postselected weak value of S1.
    WeakValue(Flags),
    /// Simulate the strength sweep and write its CSV plus JSON metadata.
    Fig2(Flags),
    /// Reconstruct the device's chi matrix and write it as CSV plus JSON metadata.
    Tomo(Flags),
}

#[derive(Debug, Clone, Default, clap::Args)]
struct Flags {
    /// YAML or JSON file with default values for the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Signal polarization angle in degrees, cos θ|H⟩ + sin θ|V⟩ [default: 42].
    #[arg(long)]
    angle: Option<f64>,
    /// Single measurement strength K.
    #[arg(long = "K", visible_alias = "k", allow_negative_numbers = true)]
    strength: Option<f64>,
    /// Comma-separated strength grid [default: 0.006,0.02,0.05,0.1,0.125,0.2,0.3,0.5,0.75,1].
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    k_grid: Option<Vec<f64>>,
    /// Mode-matching visibility in [0, 1] [default: 1].
    #[arg(long)]
    visibility: Option<f64>,
    /// Depolarizing probability in [0, 1] [default: 0].
    #[arg(long)]
    depol: Option<f64>,
    /// Random seed [default: 0].
    #[arg(long)]
    seed: Option<u64>,
    /// Coincidence rate of the calibration run, per second [default: 44.6].
    #[arg(long)]
    unpostselected_rate: Option<f64>,
    /// Coincidence rate of the postselected run, per second [default: 0.52].
    #[arg(long)]
    postselected_rate: Option<f64>,
    /// Calibration run time in seconds [default: 100].
    #[arg(long)]
    duration_k: Option<f64>,
    /// Postselected run time in seconds [default: 1000].
    #[arg(long)]
    duration_wv: Option<f64>,
    /// Signal postselection for weak-value [default: a].
    #[arg(long, value_enum)]
    post: Option<PostChoice>,
    /// Output CSV path for fig2 and tomo; the JSON metadata goes next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for fig2 [default: rayon's choice].
    #[arg(long)]
    threads: Option<usize>,
}

/// Keys accepted in a `--config` file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    angle: Option<f64>,
    #[serde(rename = "K", alias = "k")]
    strength: Option<f64>,
    #[serde(alias = "k-grid")]
    k_grid: Option<Vec<f64>>,
    visibility: Option<f64>,
    depol: Option<f64>,
    seed: Option<u64>,
    unpostselected_rate: Option<f64>,
    postselected_rate: Option<f64>,
    duration_k: Option<f64>,
    duration_wv: Option<f64>,
    post: Option<PostChoice>,
    out: Option<PathBuf>,
    threads: Option<usize>,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub angle_deg: f64,
    pub strengths: Vec<f64>,
    pub params: ImperfectionParams,
    pub plan: RunPlan,
    pub post: PostChoice,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn signal(&self) -> Polarization {
        Polarization::from_angle_deg(self.angle_deg)
    }
}

/// Parses `args` (including the program name), reading the default output
/// directory from the environment.
pub fn parse_config<I, T>(args: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let out_dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from);
    parse_config_with(args, out_dir)
}

pub fn parse_config_with<I, T>(args: I, out_dir: Option<PathBuf>) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Usage(e.to_string()))?;
    let (command, flags) = match cli.command {
        Sub::GateVerify(f) => (Command::GateVerify, f),
        Sub::Povm(f) => (Command::Povm, f),
        Sub::WeakValue(f) => (Command::WeakValue, f),
        Sub::Fig2(f) => (Command::Fig2, f),
        Sub::Tomo(f) => (Command::Tomo, f),
    };
    let file = match &flags.config {
        Some(path) => read_file_config(path)?,
        None => FileConfig::default(),
    };
    resolve(command, flags, file, out_dir)
}

fn read_file_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::ConfigFile(format!("{}: {e}", path.display())))?;
    if text.trim().is_empty() {
        return Ok(FileConfig::default());
    }
    serde_yaml::from_str(&text).map_err(|e| CliError::ConfigFile(format!("{}: {e}", path.display())))
}

fn strengths_from(
    strength: Option<f64>,
    grid: Option<Vec<f64>>,
    source: &str,
) -> Result<Option<Vec<f64>>, CliError> {
    match (strength, grid) {
        (Some(_), Some(_)) => Err(CliError::Conflict(format!(
            "both K and k-grid given {source}"
        ))),
        (Some(k), None) => Ok(Some(vec![k])),
        (None, Some(g)) => Ok(Some(g)),
        (None, None) => Ok(None),
    }
}

fn resolve(
    command: Command,
    flags: Flags,
    file: FileConfig,
    out_dir: Option<PathBuf>,
) -> Result<RunConfig, CliError> {
    let from_flags = strengths_from(flags.strength, flags.k_grid, "on the command line")?;
    let from_file = strengths_from(file.strength, file.k_grid, "in the config file")?;
    let strengths = from_flags
        .or(from_file)
        .unwrap_or_else(|| match command {
            Command::Povm | Command::Tomo => vec![1.0],
            _ => DEFAULT_K_GRID.to_vec(),
        });

    let angle_deg = flags.angle.or(file.angle).unwrap_or(42.0);
    if !(0.0..360.0).contains(&angle_deg) {
        return Err(range("angle", angle_deg, "[0, 360)"));
    }
    if strengths.is_empty() {
        return Err(CliError::OutOfRange("strength grid is empty".into()));
    }
    for &k in &strengths {
        if !(k > -1.0 && k <= 1.0) {
            return Err(range("K", k, "(-1, 1]"));
        }
        if k == 0.0 && command == Command::WeakValue {
            return Err(CliError::OutOfRange(
                "K = 0: the weak value is undefined without a measurement".into(),
            ));
        }
    }

    let visibility = flags.visibility.or(file.visibility).unwrap_or(1.0);
    let depol = flags.depol.or(file.depol).unwrap_or(0.0);
    if !(0.0..=1.0).contains(&visibility) {
        return Err(range("visibility", visibility, "[0, 1]"));
    }
    if !(0.0..=1.0).contains(&depol) {
        return Err(range("depol", depol, "[0, 1]"));
    }
    let params = ImperfectionParams::new(visibility, depol)?;

    let defaults = RunPlan::default();
    let plan = RunPlan {
        unpostselected_rate: flags
            .unpostselected_rate
            .or(file.unpostselected_rate)
            .unwrap_or(defaults.unpostselected_rate),
        postselected_rate: flags
            .postselected_rate
            .or(file.postselected_rate)
            .unwrap_or(defaults.postselected_rate),
        duration_k: flags.duration_k.or(file.duration_k).unwrap_or(defaults.duration_k),
        duration_wv: flags.duration_wv.or(file.duration_wv).unwrap_or(defaults.duration_wv),
        seed: flags.seed.or(file.seed).unwrap_or(defaults.seed),
    };
    if let Err(crate::Error::OutOfRange { name, value }) = plan.validate() {
        return Err(range(name, value, "[0, inf)"));
    }

    let threads = flags.threads.or(file.threads);
    if threads == Some(0) {
        return Err(CliError::OutOfRange("threads must be at least 1".into()));
    }

    let out = flags
        .out
        .or(file.out)
        .or_else(|| {
            command
                .default_file()
                .map(|name| out_dir.unwrap_or_default().join(name))
        });
    if let Some(path) = &out {
        if path.extension().is_some_and(|e| e == "json") {
            return Err(CliError::Conflict(format!(
                "{} would be overwritten by the JSON metadata",
                path.display()
            )));
        }
    }

    Ok(RunConfig {
        command,
        angle_deg,
        strengths,
        params,
        plan,
        post: flags.post.or(file.post).unwrap_or(PostChoice::A),
        out,
        threads,
    })
}

fn range(name: &str, value: f64, allowed: &str) -> CliError {
    CliError::OutOfRange(format!("{name} = {value} is outside {allowed}"))
}

/// What a successful `execute` produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub exit: ExitCode,
    pub files: Vec<PathBuf>,
}

/// Runs `config`, printing results to `stdout` and writing any artifacts.
pub fn execute<W: Write>(config: &RunConfig, stdout: &mut W) -> Result<Outcome, CliError> {
    match config.command {
        Command::GateVerify => gate_verify(config, stdout),
        Command::Povm => povm(config, stdout),
        Command::WeakValue => weak_value(config, stdout),
        Command::Fig2 => fig2(config, stdout),
        Command::Tomo => tomo(config, stdout),
    }
}

#[derive(Serialize)]
struct PrintedMeta<'a> {
    command: &'static str,
    seed: u64,
    angle_deg: f64,
    params: ImperfectionParams,
    strengths: &'a [f64],
    crate_version: &'static str,
}

fn write_meta<W: Write>(config: &RunConfig, stdout: &mut W) -> Result<(), CliError> {
    let meta = PrintedMeta {
        command: config.command.name(),
        seed: config.plan.seed,
        angle_deg: config.angle_deg,
        params: config.params,
        strengths: &config.strengths,
        crate_version: env!("CARGO_PKG_VERSION"),
    };
    let json = serde_json::to_string(&meta).map_err(|e| CliError::Io(e.to_string()))?;
    writeln!(stdout, "# {json}")?;
    Ok(())
}

/// `1 − F` between the Fock-level device output and the ideal gate output
/// for one signal/meter pair, and the device success probability.
pub fn gate_infidelity(signal: &Polarization, meter: &MeterSetting) -> crate::Result<(f64, f64)> {
    let out = run_device(signal, meter, &DeviceConfig::default())?;
    let (a, b) = (signal.alpha(), signal.beta());
    let g = Complex64::new(meter.gamma(), 0.0);
    let gb = Complex64::new(meter.gammabar(), 0.0);
    let ideal = TwoQubitState::from_unnormalized([a * g, a * gb, b * gb, b * g]);
    Ok(((1.0 - out.fidelity_up_to_local_phases(&ideal)).max(0.0), out.success_prob()))
}

fn random_signal(rng: &mut ChaCha20Rng) -> crate::Result<Polarization> {
    let mut c = || Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
    Polarization::normalized(c(), c())
}

fn gate_verify<W: Write>(config: &RunConfig, stdout: &mut W) -> Result<Outcome, CliError> {
    write_meta(config, stdout)?;
    writeln!(stdout, "gamma,max_infidelity,max_success_error")?;
    let mut rng = ChaCha20Rng::seed_from_u64(config.plan.seed);
    let (mut worst, mut worst_p) = (0.0f64, 0.0f64);
    for &gamma in &GATE_GAMMAS {
        let meter = MeterSetting::new(gamma)?;
        let (mut inf, mut dp) = (0.0f64, 0.0f64);
        for _ in 0..GATE_SIGNALS {
            let (i, p) = gate_infidelity(&random_signal(&mut rng)?, &meter)?;
            inf = inf.max(i);
            dp = dp.max((p - 1.0 / 9.0).abs());
        }
        writeln!(stdout, "{},{},{}", format_real(gamma), format_real(inf), format_real(dp))?;
        worst = worst.max(inf);
        worst_p = worst_p.max(dp);
    }
    writeln!(stdout, "max_infidelity={}", format_real(worst))?;
    let exit = if worst > GATE_TOLERANCE || worst_p > GATE_TOLERANCE {
        ExitCode::GateFailed
    } else {
        ExitCode::Success
    };
    Ok(Outcome { exit, files: vec![] })
}

fn povm<W: Write>(config: &RunConfig, stdout: &mut W) -> Result<Outcome, CliError> {
    write_meta(config, stdout)?;
    writeln!(stdout, "K,outcome,m00,m01,m10,m11")?;
    for &k in &config.strengths {
        let elements = povm_elements(&MeterSetting::from_strength(k)?);
        for (label, m) in [("H", elements.pi_h), ("V", elements.pi_v)] {
            writeln!(
                stdout,
                "{},{label},{},{},{},{}",
                format_real(k),
                format_real(m[(0, 0)].re),
                format_real(m[(0, 1)].re),
                format_real(m[(1, 0)].re),
                format_real(m[(1, 1)].re)
            )?;
        }
    }
    Ok(Outcome {
        exit: ExitCode::Success,
        files: vec![],
    })
}

fn weak_value<W: Write>(config: &RunConfig, stdout: &mut W) -> Result<Outcome, CliError> {
    write_meta(config, stdout)?;
    writeln!(stdout, "K,weak_value")?;
    let signal = config.signal();
    let post = config.post.state();
    let ideal = config.params == ImperfectionParams::ideal();
    let model = DeviceModel::new(&DeviceConfig::default())?;
    for &k in &config.strengths {
        let meter = MeterSetting::from_strength(k)?;
        let value = if ideal {
            weak_value_analytic(&signal, &meter, &post)?
        } else {
            let p = model.postselected(&config.params, &signal, &meter, &post)?;
            (p.meter_h - p.meter_v) / k
        };
        writeln!(stdout, "{},{}", format_real(k), format_real(value))?;
    }
    Ok(Outcome {
        exit: ExitCode::Success,
        files: vec![],
    })
}

fn output_paths(config: &RunConfig) -> (PathBuf, PathBuf) {
    let csv = config
        .out
        .clone()
        .or_else(|| config.command.default_file().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out.csv"));
    let json = csv.with_extension("json");
    (csv, json)
}

fn fig2<W: Write>(config: &RunConfig, stdout: &mut W) -> Result<Outcome, CliError> {
    let signal = config.signal();
    let run = || run_fig2(&config.plan, &signal, &config.params, &config.strengths);
    let table = match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Io(e.to_string()))?
            .install(run)?,
        None => run()?,
    };
    let (csv, json) = output_paths(config);
    write_pair(&csv, table.to_csv_string().as_bytes(), &json, table.metadata_json().as_bytes())?;
    writeln!(
        stdout,
        "wrote {} ({} rows) and {}",
        csv.display(),
        table.rows.len(),
        json.display()
    )?;
    Ok(Outcome {
        exit: ExitCode::Success,
        files: vec![csv, json],
    })
}

#[derive(Serialize)]
struct TomoMeta {
    seed: u64,
    params: ImperfectionParams,
    device: DeviceConfig,
    trace: f64,
    rank: usize,
    eigenvalues: Vec<f64>,
    crate_version: &'static str,
}

fn tomo<W: Write>(config: &RunConfig, stdout: &mut W) -> Result<Outcome, CliError> {
    let device = DeviceConfig::default();
    let channel = DeviceModel::new(&device)?.channel(&config.params)?;
    let chi = process_tomography(&channel)?;
    let mut csv_bytes = Vec::new();
    chi.write_csv(&mut csv_bytes)?;
    let meta = TomoMeta {
        seed: config.plan.seed,
        params: config.params,
        device,
        trace: chi.trace(),
        rank: chi.rank(1e-9),
        eigenvalues: chi.eigenvalues(),
        crate_version: env!("CARGO_PKG_VERSION"),
    };
    let json_bytes = serde_json::to_string_pretty(&meta).map_err(|e| CliError::Io(e.to_string()))?;
    let (csv, json) = output_paths(config);
    write_pair(&csv, &csv_bytes, &json, json_bytes.as_bytes())?;
    writeln!(
        stdout,
        "trace={} rank={}\nwrote {} and {}",
        format_real(meta.trace),
        meta.rank,
        csv.display(),
        json.display()
    )?;
    Ok(Outcome {
        exit: ExitCode::Success,
        files: vec![csv, json],
    })
}

/// Writes both files through temporaries; if the second fails the first is
/// removed again.
fn write_pair(first: &Path, a: &[u8], second: &Path, b: &[u8]) -> Result<(), CliError> {
    write_atomic(first, a)?;
    if let Err(e) = write_atomic(second, b) {
        let _ = std::fs::remove_file(first);
        return Err(e);
    }
    Ok(())
}

fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Parses, executes and reports; returns the process exit code.
pub fn run<I, T, W, E>(args: I, stdout: &mut W, stderr: &mut E) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
    W: Write,
    E: Write,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    // --help and --version are not errors
    if let Err(e) = Cli::try_parse_from(&args) {
        if !e.use_stderr() {
            let _ = write!(stdout, "{e}");
            return ExitCode::Success.code();
        }
    }
    let result = parse_config(args).and_then(|config| execute(&config, stdout));
    match result {
        Ok(outcome) => outcome.exit.code(),
        Err(e) => {
            let _ = writeln!(stderr, "photonweak: {e}");
            e.exit_code().code()
        }
    }
}

pub fn main() -> i32 {
    run(
        std::env::args_os(),
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<RunConfig, CliError> {
        parse_config_with(std::iter::once("photonweak").chain(args.iter().copied()), None)
    }

    #[test]
    fn fig2_flags_are_echoed() {
        let c = parse(&["fig2", "--angle", "42", "--k-grid", "0.006,0.125,0.5,1", "--seed", "7"]).unwrap();
        assert_eq!(c.command, Command::Fig2);
        assert_eq!(c.angle_deg, 42.0);
        assert_eq!(c.strengths, vec![0.006, 0.125, 0.5, 1.0]);
        assert_eq!(c.plan.seed, 7);
        assert_eq!(c.out, Some(PathBuf::from("fig2.csv")));
    }

    #[test]
    fn zero_strength_weak_value_rejected() {
        let err = parse(&["weak-value", "--angle", "42", "--K", "0"]).unwrap_err();
        assert_eq!(err.exit_code(), ExitCode::OutOfRange);
    }

    #[test]
    fn both_strength_forms_conflict() {
        let err = parse(&["fig2", "--K", "0.5", "--k-grid", "0.1,0.2"]).unwrap_err();
        assert_eq!(err.exit_code(), ExitCode::Conflict);
    }

    #[test]
    fn weak_value_prints_derived_number() {
        let c = parse(&["weak-value", "--angle", "42", "--K", "0.006"]).unwrap();
        let mut out = Vec::new();
        execute(&c, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let last = text.lines().last().unwrap();
        let value: f64 = last.split(',').nth(1).unwrap().parse().unwrap();
        assert!((value - 19.02).abs() < 5e-3, "{value}");
    }
}
