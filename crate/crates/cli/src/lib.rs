//! The `qwalk` command line: maze generation, probability curves, recovery
//! trials and verification suites.
//!
//! Exit status is 0 on success, 1 for usage and input errors, 2 when a
//! verification suite fails.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use qwalk_core::analytic::{ChainModel, ReducedGroverModel, RingSpectrum};
use qwalk_core::maze::build_maze;
use qwalk_core::recovery::{run_trials, RecoveryConfig, RecoveryResult, Strategy, TrialSummary, DEFAULT_MAX_ROUNDS_PER_STAGE};
use qwalk_core::verify::{run_suite, Suite, VerifyReport};
use qwalk_core::walk::{connection_amplitudes, prepare, Propagator, StatePrescription};
use qwalk_core::{MazeSpec, Topology};

pub const CURVE_HEADER: &str = "steps,p_simulated,p_exact,p_bessel,e_plus,e_minus";
pub const THREADS_ENV: &str = "QWALK_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] qwalk_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) => EXIT_VERIFY,
            _ => EXIT_USAGE,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "qwalk", version, about = "Scattering quantum walks on chains and rings of stars")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a maze and write it as JSON.
    Generate(GenerateArgs),
    /// Success probability at one junction against step count, as CSV.
    Curve(CurveArgs),
    /// Run seeded path-recovery trials.
    Recover(RecoverArgs),
    /// Run verification suites; exits with status 2 if any fails.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_parser = parse_topology)]
    pub topology: Topology,
    #[arg(long)]
    pub stars: usize,
    #[arg(long)]
    pub spokes: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Also print the hidden path.
    #[arg(long)]
    pub reveal: bool,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[arg(long)]
    pub maze: PathBuf,
    /// start | connection:K | superposed | two-star:J
    #[arg(long, value_parser = parse_init)]
    pub init: CurveInit,
    /// Junction index whose success states are tracked.
    #[arg(long)]
    pub target: usize,
    /// Last step count; rows are written for every even count up to it.
    #[arg(long)]
    pub max_steps: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RecoverArgs {
    #[arg(long)]
    pub maze: PathBuf,
    #[arg(long, value_parser = parse_strategy)]
    pub strategy: Strategy,
    #[arg(long, default_value_t = 1)]
    pub trials: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_MAX_ROUNDS_PER_STAGE)]
    pub max_rounds: u32,
    /// Even step count used instead of the optimal one.
    #[arg(long)]
    pub steps: Option<u64>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// unitarity | subspace | ring-exact | mirror | bounds | bessel | eigenvectors | all
    #[arg(long, default_value = "all", value_parser = parse_suites)]
    pub suite: SuiteSelection,
    /// Also write the reports here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Initial state of a curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveInit {
    Start,
    Connection(usize),
    Superposed,
    TwoStar(usize),
}

impl FromStr for CurveInit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let index = |v: &str| v.parse::<usize>().map_err(|_| format!("bad index in {s:?}"));
        match s.split_once(':') {
            None if s == "start" => Ok(Self::Start),
            None if s == "superposed" => Ok(Self::Superposed),
            Some(("connection", k)) => Ok(Self::Connection(index(k)?)),
            Some(("two-star", j)) => Ok(Self::TwoStar(index(j)?)),
            _ => Err(format!(
                "unknown init {s:?}; expected start, connection:K, superposed or two-star:J"
            )),
        }
    }
}

impl std::fmt::Display for CurveInit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Start => f.write_str("start"),
            Self::Connection(k) => write!(f, "connection:{k}"),
            Self::Superposed => f.write_str("superposed"),
            Self::TwoStar(j) => write!(f, "two-star:{j}"),
        }
    }
}

fn parse_topology(s: &str) -> Result<Topology, String> {
    s.parse().map_err(|e: qwalk_core::Error| e.to_string())
}

fn parse_init(s: &str) -> Result<CurveInit, String> {
    s.parse()
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse().map_err(|e: qwalk_core::Error| e.to_string())
}

/// Suites picked by one `--suite` value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteSelection(pub Vec<Suite>);

fn parse_suites(s: &str) -> Result<SuiteSelection, String> {
    Suite::parse_selector(s).map(SuiteSelection).map_err(|e| e.to_string())
}

/// Writes `contents` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> CliResult<()> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn read_maze(path: &Path) -> CliResult<MazeSpec> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(MazeSpec::from_json(&text)?)
}

fn generate(args: &GenerateArgs, out: &mut dyn Write) -> CliResult<()> {
    let maze = build_maze(args.topology, args.stars, args.spokes, args.seed)?;
    let mut json = maze.to_json();
    json.push('\n');
    write_atomic(&args.out, json.as_bytes())?;
    emit(
        out,
        &format!(
            "wrote {}: {} M={} N={} seed={}, {} directed edge states\n",
            args.out.display(),
            maze.topology(),
            maze.stars(),
            maze.spokes(),
            maze.seed(),
            maze.edge_count()
        ),
    )?;
    if args.reveal {
        emit(out, &format!("path: {}\n", maze.reveal_path().join(" -> ")))?;
    }
    Ok(())
}

/// One CSV row. Empty analytic fields mean no closed form applies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow {
    pub steps: u64,
    pub p_simulated: f64,
    pub p_exact: Option<f64>,
    pub p_bessel: Option<f64>,
    pub e_plus: f64,
    pub e_minus: f64,
}

fn number(x: f64) -> String {
    format!("{x:.16e}")
}

impl CurveRow {
    pub fn to_csv(&self) -> String {
        let opt = |x: Option<f64>| x.map(number).unwrap_or_default();
        format!(
            "{},{},{},{},{},{}",
            self.steps,
            number(self.p_simulated),
            opt(self.p_exact),
            opt(self.p_bessel),
            number(self.e_plus),
            number(self.e_minus)
        )
    }
}

/// Closed forms for one (maze, init, target) combination.
enum Predictor {
    Chain { model: ChainModel, from: usize, target: usize },
    Ring { spectrum: RingSpectrum, offset: usize },
    /// Fraction of the path probability that sits on the target junction.
    Grover { model: ReducedGroverModel, share: f64 },
    None,
}

impl Predictor {
    fn exact(&self, steps: u64) -> CliResult<Option<f64>> {
        Ok(match self {
            Self::Chain { model, from, target } => Some(model.psuc(*from, *target, steps)?),
            Self::Ring { spectrum, offset } => Some(spectrum.ring_psuc(*offset, steps)?),
            Self::Grover { model, share } => Some(share * model.grover_psuc(steps, true)?),
            Self::None => None,
        })
    }

    fn bessel(&self, steps: u64) -> CliResult<Option<f64>> {
        Ok(match self {
            Self::Chain { model, from, target } => Some(model.bessel_psuc(*from, *target, steps)?),
            Self::Ring { spectrum, offset } => Some(2.0 * spectrum.bessel_amplitude(*offset, steps)?.powi(2)),
            Self::Grover { .. } | Self::None => None,
        })
    }
}

fn curve_setup(maze: &MazeSpec, init: CurveInit, target: usize) -> CliResult<(StatePrescription, Predictor)> {
    let m = maze.stars();
    let n = maze.spokes();
    let chain = maze.topology() == Topology::Chain;
    let target_ok = if chain { target <= m } else { (1..=m).contains(&target) };
    if !target_ok {
        let range = if chain { format!("0..={m}") } else { format!("1..={m}") };
        return Err(CliError::Usage(format!("target {target} not in {range} for this maze")));
    }
    Ok(match init {
        CurveInit::Start => {
            if !chain {
                return Err(CliError::Usage("init start needs a chain".into()));
            }
            (
                StatePrescription::LocalizedStart,
                Predictor::Chain {
                    model: ChainModel::new(m, n)?,
                    from: 0,
                    target,
                },
            )
        }
        CurveInit::Connection(k) => {
            let max = if chain { m - 1 } else { m };
            if !(1..=max).contains(&k) {
                return Err(CliError::Usage(format!("connection {k} not in 1..={max}")));
            }
            let predictor = if chain {
                Predictor::Chain {
                    model: ChainModel::new(m, n)?,
                    from: k,
                    target,
                }
            } else {
                Predictor::Ring {
                    spectrum: RingSpectrum::new(m, n)?,
                    offset: (target + m - k) % m,
                }
            };
            (StatePrescription::LocalizedConnection(k), predictor)
        }
        CurveInit::Superposed => {
            if n < 4 {
                return Err(CliError::Usage("init superposed needs N >= 4".into()));
            }
            // the alternating signs close consistently only on chains and even rings
            let predictor = if chain || m.is_multiple_of(2) {
                let terminal = chain && (target == 0 || target == m);
                Predictor::Grover {
                    model: ReducedGroverModel::new(n)?,
                    share: if terminal { 0.5 } else { 1.0 } / m as f64,
                }
            } else {
                Predictor::None
            };
            (StatePrescription::SuperposedInit, predictor)
        }
        CurveInit::TwoStar(j) => {
            let max = if chain { m - 1 } else { m };
            if !(1..=max).contains(&j) {
                return Err(CliError::Usage(format!("two-star index {j} not in 1..={max}")));
            }
            (StatePrescription::TwoStar(j), Predictor::None)
        }
    })
}

/// Every even step from 0 to `max_steps`, simulated and predicted.
pub fn curve_rows(maze: &MazeSpec, init: CurveInit, target: usize, max_steps: u64) -> CliResult<Vec<CurveRow>> {
    let (prescription, predictor) = curve_setup(maze, init, target)?;
    let mut state = prepare(maze, prescription)?;
    let mut prop = Propagator::new(maze);
    let mut simulated = Vec::new();
    for steps in (0..=max_steps).step_by(2) {
        simulated.push((steps, connection_amplitudes(maze, &state, target)?));
        if steps + 2 <= max_steps {
            prop.advance(&mut state, 2);
        }
    }
    simulated
        .into_par_iter()
        .map(|(steps, amp)| {
            Ok(CurveRow {
                steps,
                p_simulated: amp.probability(),
                p_exact: predictor.exact(steps)?,
                p_bessel: predictor.bessel(steps)?,
                e_plus: amp.e_plus,
                e_minus: amp.e_minus,
            })
        })
        .collect()
}

pub fn curve_csv(maze: &MazeSpec, init: CurveInit, target: usize, max_steps: u64) -> CliResult<String> {
    let rows = curve_rows(maze, init, target, max_steps)?;
    let mut csv = String::new();
    let _ = writeln!(
        csv,
        "# success probability at junction {target} against steps; init={init}; {} M={} N={} seed={}",
        maze.topology(),
        maze.stars(),
        maze.spokes(),
        maze.seed()
    );
    csv.push_str(CURVE_HEADER);
    csv.push('\n');
    for row in rows {
        csv.push_str(&row.to_csv());
        csv.push('\n');
    }
    Ok(csv)
}

fn curve(args: &CurveArgs, out: &mut dyn Write) -> CliResult<()> {
    let maze = read_maze(&args.maze)?;
    let csv = curve_csv(&maze, args.init, args.target, args.max_steps)?;
    write_atomic(&args.out, csv.as_bytes())?;
    emit(
        out,
        &format!("wrote {} ({} rows)\n", args.out.display(), args.max_steps / 2 + 1),
    )
}

/// Everything `recover` writes.
#[derive(Debug, Serialize)]
pub struct RecoveryReport<'a> {
    pub maze: MazeInfo,
    pub config: &'a RecoveryConfig,
    pub summary: TrialSummary,
    pub results: Vec<RecoveryResult>,
}

#[derive(Debug, Serialize)]
pub struct MazeInfo {
    pub topology: Topology,
    #[serde(rename = "M")]
    pub stars: usize,
    #[serde(rename = "N")]
    pub spokes: usize,
    pub seed: u64,
}

fn recover(args: &RecoverArgs, out: &mut dyn Write) -> CliResult<()> {
    let maze = read_maze(&args.maze)?;
    let config = RecoveryConfig {
        strategy: args.strategy,
        max_rounds_per_stage: args.max_rounds,
        trials: args.trials,
        master_seed: args.seed,
        step_override: args.steps,
    };
    let (results, summary) = run_trials(&maze, &config)?;
    let report = RecoveryReport {
        maze: MazeInfo {
            topology: maze.topology(),
            stars: maze.stars(),
            spokes: maze.spokes(),
            seed: maze.seed(),
        },
        config: &config,
        summary: summary.clone(),
        results,
    };
    let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
    json.push('\n');
    write_atomic(&args.out, json.as_bytes())?;
    emit(out, &summary_table(&summary))
}

pub fn summary_table(s: &TrialSummary) -> String {
    format!(
        "strategy      trials  success  mean_rounds  mean_unitary  mean_queries\n\
         {:<13} {:>6}  {:>7.4}  {:>11.3}  {:>12.1}  {:>12.2}\n",
        s.strategy.as_str(),
        s.trials,
        s.success_rate,
        s.mean_rounds,
        s.mean_unitary_applications,
        s.mean_oracle_queries
    )
}

fn verify(args: &VerifyArgs, out: &mut dyn Write) -> CliResult<()> {
    let suites = &args.suite.0;
    let reports = suites
        .iter()
        .map(|&s| run_suite(s))
        .collect::<qwalk_core::Result<Vec<VerifyReport>>>()?;
    let mut json = serde_json::to_string_pretty(&reports).expect("reports serialize");
    json.push('\n');
    if let Some(path) = &args.out {
        write_atomic(path, json.as_bytes())?;
    }
    emit(out, &json)?;
    let failed: Vec<&str> = reports.iter().filter(|r| !r.pass).map(|r| r.suite.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join(", ")))
    }
}

fn emit(out: &mut dyn Write, text: &str) -> CliResult<()> {
    out.write_all(text.as_bytes()).map_err(|source| CliError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    })
}

/// Caps the global rayon pool from `QWALK_THREADS`, if set.
pub fn configure_threads(value: Option<&str>) -> CliResult<()> {
    let Some(v) = value else { return Ok(()) };
    let threads: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
    // a pool that is already built (tests, repeated calls) is left alone
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> CliResult<()> {
    match &cli.command {
        Command::Generate(a) => generate(a, out),
        Command::Curve(a) => curve(a, out),
        Command::Recover(a) => recover(a, out),
        Command::Verify(a) => verify(a, out),
    }
}

/// Parses `args` (program name first), runs the command and returns the exit
/// status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    if let Err(e) = configure_threads(std::env::var(THREADS_ENV).ok().as_deref()) {
        let _ = writeln!(err, "error: {e}");
        return e.exit_code();
    }
    match execute(&cli, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_parsing() {
        assert_eq!("start".parse::<CurveInit>().unwrap(), CurveInit::Start);
        assert_eq!("connection:5".parse::<CurveInit>().unwrap(), CurveInit::Connection(5));
        assert_eq!("two-star:2".parse::<CurveInit>().unwrap(), CurveInit::TwoStar(2));
        assert_eq!("superposed".parse::<CurveInit>().unwrap(), CurveInit::Superposed);
        for bad in ["", "connection", "connection:x", "two-star:-1", "stop"] {
            assert!(bad.parse::<CurveInit>().is_err(), "{bad}");
        }
        for i in [CurveInit::Start, CurveInit::Connection(3), CurveInit::Superposed, CurveInit::TwoStar(1)] {
            assert_eq!(i.to_string().parse::<CurveInit>().unwrap(), i);
        }
    }

    #[test]
    fn row_formatting() {
        let row = CurveRow {
            steps: 4,
            p_simulated: 0.25,
            p_exact: None,
            p_bessel: Some(1.0 / 3.0),
            e_plus: -0.5,
            e_minus: 0.0,
        };
        assert_eq!(
            row.to_csv(),
            "4,2.5000000000000000e-1,,3.3333333333333331e-1,-5.0000000000000000e-1,0.0000000000000000e0"
        );
    }

    #[test]
    fn thread_variable_validation() {
        assert!(configure_threads(None).is_ok());
        assert!(configure_threads(Some("0")).is_err());
        assert!(configure_threads(Some("many")).is_err());
        assert!(configure_threads(Some("2")).is_ok());
    }

    #[test]
    fn superposed_curve_matches_the_rotation_law() {
        let maze = build_maze(Topology::Chain, 5, 100, 1).unwrap();
        for target in [0, 2, 5] {
            let rows = curve_rows(&maze, CurveInit::Superposed, target, 60).unwrap();
            for r in rows {
                assert!((r.p_simulated - r.p_exact.unwrap()).abs() < 1e-12, "{r:?}");
                assert!(r.p_bessel.is_none());
            }
        }
    }

    #[test]
    fn ring_curves_have_closed_forms() {
        let maze = build_maze(Topology::Ring, 7, 40, 1).unwrap();
        let rows = curve_rows(&maze, CurveInit::Connection(6), 2, 40).unwrap();
        for r in &rows {
            assert!((r.p_simulated - r.p_exact.unwrap()).abs() < 1e-12);
        }
        assert!(curve_rows(&maze, CurveInit::Start, 2, 4).is_err());
        assert!(curve_rows(&maze, CurveInit::Connection(1), 0, 4).is_err());
        let odd = curve_rows(&maze, CurveInit::Superposed, 3, 4).unwrap();
        assert!(odd[0].p_exact.is_none());
    }
}
