//! Command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 propagation failure,
//! 64 usage error, 74 I/O error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::conservation::{
    weak_ratio, ConservationVerdict, GuidanceField, VelocityPart, WeakRatioOptions,
};
use crate::dynamics::{
    self, find_stationary_points, IntegrationOptions, PeriodOptions, StationaryPointInfo,
    Trajectory, TrajectoryStatus,
};
use crate::error::Error;
use crate::export::{self, complex_obj, parse_complex, EventRecord, SampleRecord};
use crate::portrait::{self, GridSpec, OrbitClass, PortraitOptions, PortraitRecord};
use crate::systems::{
    all_systems, catalog, ExpectedPeriod, PotentialConvention, StationarySystem, SystemId,
    TimeDependentState,
};
use crate::verify::{self, CheckRecord, Selector};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_PROPAGATION: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_IO: i32 = 74;

#[derive(Debug, Parser)]
#[command(
    name = "cbohm",
    version,
    about = "Complex quantum trajectories for analytic wavefunctions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the catalog of systems as JSON.
    ListSystems {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate one trajectory.
    Simulate(SimulateArgs),
    /// Classify trajectories started on a grid.
    Portrait(PortraitArgs),
    /// Run the self-check suite.
    Verify(VerifyArgs),
    /// Locate and classify stationary points.
    Stationary(StationaryArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VelocityChoice {
    /// The full guidance velocity.
    Full,
    /// Its REAL part only (time-dependent states).
    Re,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct NumericArgs {
    #[arg(long, default_value_t = 1e-10)]
    pub rtol: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub atol: f64,
    #[arg(long, default_value_t = 100.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 1e8)]
    pub v_max: f64,
    #[arg(long, default_value_t = 1e-13)]
    pub h_min: f64,
    #[arg(long, default_value_t = 0.25)]
    pub h_max: f64,
}

impl NumericArgs {
    fn integration(&self) -> Result<IntegrationOptions, Error> {
        let all_finite = [
            self.rtol, self.atol, self.t_max, self.v_max, self.h_min, self.h_max,
        ]
        .iter()
        .all(|x| x.is_finite());
        if !all_finite
            || self.rtol <= 0.0
            || self.atol <= 0.0
            || self.h_min <= 0.0
            || self.h_max <= 0.0
        {
            return Err(Error::InvalidInput(
                "tolerances and step bounds must be finite and positive".into(),
            ));
        }
        if self.t_max <= 0.0 || self.v_max <= 0.0 {
            return Err(Error::InvalidInput(
                "--t-max and --v-max must be positive".into(),
            ));
        }
        Ok(IntegrationOptions {
            rtol: self.rtol,
            atol: self.atol,
            h_min: self.h_min,
            h_max: self.h_max,
            v_max: self.v_max,
            ..IntegrationOptions::default()
        })
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    /// Catalog id (I..V) or `gaussian`.
    #[arg(long)]
    pub system: String,
    /// Starting point, `a+bi`.
    #[arg(long, allow_hyphen_values = true)]
    pub z0: String,
    /// Time interval `a:b`; defaults to `0:t_max`. May run backwards.
    #[arg(long, allow_hyphen_values = true)]
    pub t_span: Option<String>,
    /// Stop at the N-th real-axis crossing.
    #[arg(long)]
    pub crossing: Option<usize>,
    #[arg(long, value_enum, default_value_t = VelocityChoice::Full)]
    pub velocity: VelocityChoice,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[serde(skip)]
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub numeric: NumericArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PortraitArgs {
    #[arg(long)]
    pub system: String,
    /// `re_min:re_max:n_re,im_min:im_max:n_im`.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: String,
    #[arg(long, default_value_t = 50.0)]
    pub escape_radius: f64,
    #[arg(long, default_value_t = 20)]
    pub spiral_window: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub closure_tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[serde(skip)]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all processors).
    #[serde(skip)]
    #[arg(long)]
    pub jobs: Option<usize>,
    #[command(flatten)]
    pub numeric: NumericArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    /// `all`, `gaussian` or a catalog id.
    pub selector: Option<String>,
    #[arg(long, conflicts_with = "selector")]
    pub system: Option<String>,
    #[serde(skip)]
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub numeric: NumericArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct StationaryArgs {
    #[arg(long)]
    pub system: String,
    /// Extra Newton seeds, `a+bi`; the catalog points are always tried.
    #[arg(long = "seed", allow_hyphen_values = true)]
    pub seeds: Vec<String>,
    #[serde(skip)]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(e: impl std::fmt::Display) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: e.to_string(),
        }
    }

    fn io(path: Option<&Path>, e: io::Error) -> Self {
        let target = path.map_or("stdout".to_string(), |p| p.display().to_string());
        CliError {
            code: EXIT_IO,
            message: format!("cannot write {target}: {e}"),
        }
    }
}

fn lib_error(e: Error) -> CliError {
    let code = match e {
        Error::Propagation { .. } => EXIT_PROPAGATION,
        _ => EXIT_USAGE,
    };
    CliError {
        code,
        message: e.to_string(),
    }
}

/// SHA-256 of the canonical JSON form of a command's configuration.
pub fn config_hash<T: Serialize>(command: &str, cfg: &T) -> String {
    let body = serde_json::to_string(&(command, cfg)).expect("config serializes");
    Sha256::digest(body.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn parse_span(s: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::usage(format!("bad --t-span `{s}`; expected a:b"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let a = a.trim().parse::<f64>().map_err(|_| bad())?;
    let b = b.trim().parse::<f64>().map_err(|_| bad())?;
    if !(a.is_finite() && b.is_finite()) || a == b {
        return Err(bad());
    }
    Ok((a, b))
}

fn parse_system(s: &str) -> Result<StationarySystem, CliError> {
    s.parse::<SystemId>().map(catalog).map_err(CliError::usage)
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match path {
        Some(p) => File::create(p)
            .map(|f| Box::new(BufWriter::new(f)) as Box<dyn Write>)
            .map_err(|e| CliError::io(Some(p), e)),
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

fn write_json<T: Serialize + ?Sized>(path: Option<&Path>, value: &T) -> Result<(), CliError> {
    let mut w = open_out(path)?;
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(io::Error::from)
        .and_then(|_| writeln!(w))
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(path, e))
}

/// Path of the JSON file written next to a CSV trajectory.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".events.json");
    PathBuf::from(s)
}

#[derive(Debug, Serialize)]
struct CatalogEntry {
    id: String,
    name: &'static str,
    psi: &'static str,
    velocity: &'static str,
    potential: &'static str,
    energy: f64,
    convention: PotentialConvention,
    #[serde(with = "complex_obj::vec")]
    nodes: Vec<Complex64>,
    #[serde(with = "complex_obj::vec")]
    stationary_points: Vec<Complex64>,
    periods: Vec<ExpectedPeriod>,
}

fn cmd_list_systems(out: Option<&Path>) -> Result<i32, CliError> {
    let entries: Vec<CatalogEntry> = all_systems()
        .into_iter()
        .map(|s| CatalogEntry {
            id: s.id.to_string(),
            name: s.id.name(),
            psi: s.formulas.psi,
            velocity: s.formulas.velocity,
            potential: s.formulas.potential,
            energy: s.energy,
            convention: s.convention,
            nodes: s.nodes.clone(),
            stationary_points: s.stationary_points.clone(),
            periods: s.expected_periods.clone(),
        })
        .collect();
    write_json(out, &entries)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct SimulationSummary<'a> {
    config_hash: &'a str,
    system: &'a str,
    #[serde(with = "complex_obj")]
    z_start: Complex64,
    t_span: (f64, f64),
    status: TrajectoryStatus,
    t_end: f64,
    events: Vec<EventRecord>,
    verdict: Option<ConservationVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<Vec<SampleRecord>>,
}

fn cmd_simulate(args: &SimulateArgs) -> Result<i32, CliError> {
    let hash = config_hash("simulate", args);
    let opts = args.numeric.integration().map_err(CliError::usage)?;
    let z0 = parse_complex(&args.z0).map_err(CliError::usage)?;
    let span = match &args.t_span {
        Some(s) => parse_span(s)?,
        None => (0.0, args.numeric.t_max),
    };
    if args.crossing == Some(0) {
        return Err(CliError::usage("--crossing counts from 1"));
    }
    let is_gaussian = args.system.eq_ignore_ascii_case(verify::GAUSSIAN);

    let run = |traj: Result<Trajectory, Error>| traj.map_err(lib_error);
    let (traj, label, verdict) = if is_gaussian {
        let g = TimeDependentState::free_gaussian();
        let part = match args.velocity {
            VelocityChoice::Full => VelocityPart::Full,
            VelocityChoice::Re => VelocityPart::RealPart,
        };
        let field = GuidanceField::new(&g, part);
        let traj = match args.crossing {
            Some(n) => run(dynamics::integrate_to_crossing(&field, z0, span, n, &opts))?,
            None => run(dynamics::integrate(&field, z0, span, &opts))?,
        };
        (traj, verify::GAUSSIAN.to_string(), None)
    } else {
        let sys = parse_system(&args.system)?;
        if args.velocity != VelocityChoice::Full {
            return Err(CliError::usage(
                "--velocity re applies only to the gaussian state",
            ));
        }
        if sys.node_distance(z0) < opts.node_guard {
            return Err(CliError::usage(format!(
                "start {z0} is at a node of system {}",
                sys.id
            )));
        }
        let traj = match args.crossing {
            Some(n) => run(dynamics::integrate_to_crossing(&sys, z0, span, n, &opts))?,
            None => run(dynamics::integrate(&sys, z0, span, &opts))?,
        };
        let verdict = match args.crossing {
            Some(n)
                if z0.im == 0.0 && span.0 == 0.0 && span.1 > 0.0 && traj.crossings.len() >= n =>
            {
                let wr = WeakRatioOptions {
                    t_max: span.1,
                    crossing: n,
                };
                weak_ratio(&sys, z0.re, &wr, &opts).ok()
            }
            _ => None,
        };
        (traj, sys.id.to_string(), verdict)
    };

    let mut summary = SimulationSummary {
        config_hash: &hash,
        system: &label,
        z_start: z0,
        t_span: span,
        status: traj.status,
        t_end: traj.last().t,
        events: traj.crossings.iter().map(EventRecord::from).collect(),
        verdict,
        samples: None,
    };
    let out = args.out.as_deref();
    match args.format {
        Format::Csv => {
            let mut w = open_out(out)?;
            export::write_trajectory_csv(&traj, &mut w)
                .and_then(|_| w.flush())
                .map_err(|e| CliError::io(out, e))?;
            if let Some(p) = out {
                write_json(Some(&sidecar_path(p)), &summary)?;
            }
        }
        Format::Json => {
            summary.samples = Some(export::sample_records(&traj));
            write_json(out, &summary)?;
        }
    }
    if traj.status.is_failure() {
        let diag = serde_json::json!({
            "config_hash": hash,
            "status": traj.status,
            "t": traj.last().t,
            "z": {"re": traj.last().z.re, "im": traj.last().z.im},
        });
        eprintln!("{diag}");
        return Ok(EXIT_PROPAGATION);
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct HashedRecord<'a, T: Serialize> {
    config_hash: &'a str,
    #[serde(flatten)]
    record: &'a T,
}

fn portrait_csv<W: Write>(records: &[PortraitRecord], hash: &str, mut w: W) -> io::Result<()> {
    writeln!(
        w,
        "index,re_z,im_z,class,period,crossings,encloses,config_hash"
    )?;
    for r in records {
        let period = r.period.map(export::fmt_f64).unwrap_or_default();
        let encloses: Vec<String> = r.encloses.iter().map(|k| k.to_string()).collect();
        writeln!(
            w,
            "{},{},{},{:?},{},{},{},{}",
            r.index,
            export::fmt_f64(r.z_start.re),
            export::fmt_f64(r.z_start.im),
            r.class,
            period,
            r.crossings,
            encloses.join(";"),
            hash
        )?;
    }
    w.flush()
}

fn cmd_portrait(args: &PortraitArgs) -> Result<i32, CliError> {
    let hash = config_hash("portrait", args);
    let sys = parse_system(&args.system)?;
    let grid = GridSpec::parse(&args.grid).map_err(CliError::usage)?;
    let integration = args.numeric.integration().map_err(CliError::usage)?;
    if !(args.escape_radius > 0.0 && args.closure_tol > 0.0) || args.spiral_window < 2 {
        return Err(CliError::usage(
            "escape radius and closure tolerance must be positive, spiral window at least 2",
        ));
    }
    if args.jobs == Some(0) {
        return Err(CliError::usage("--jobs must be at least 1"));
    }
    let opts = PortraitOptions {
        integration,
        period: PeriodOptions {
            t_max: args.numeric.t_max,
            closure_tol: args.closure_tol,
            ..PeriodOptions::default()
        },
        escape_radius: args.escape_radius,
        spiral_window: args.spiral_window,
        jobs: args.jobs,
    };
    let records = portrait::sweep(&sys, &grid, &opts).map_err(lib_error)?;
    let out = args.out.as_deref();
    match args.format {
        Format::Csv => {
            let w = open_out(out)?;
            portrait_csv(&records, &hash, w).map_err(|e| CliError::io(out, e))?;
        }
        Format::Json => {
            let wrapped: Vec<_> = records
                .iter()
                .map(|r| HashedRecord {
                    config_hash: &hash,
                    record: r,
                })
                .collect();
            write_json(out, &wrapped)?;
        }
    }
    let summary: Vec<String> = portrait::families(&records, 1e-4)
        .iter()
        .map(|f| match f.class {
            OrbitClass::Closed => format!(
                "{:?}(T={:.6}, n={})",
                f.class,
                f.period.unwrap_or(f64::NAN),
                f.count
            ),
            _ => format!("{:?}(n={})", f.class, f.count),
        })
        .collect();
    eprintln!("system {}: {}", sys.id, summary.join(", "));
    Ok(EXIT_OK)
}

fn cmd_verify(args: &VerifyArgs) -> Result<i32, CliError> {
    let hash = config_hash("verify", args);
    let opts = args.numeric.integration().map_err(CliError::usage)?;
    let raw = args
        .selector
        .as_deref()
        .or(args.system.as_deref())
        .unwrap_or("all");
    let selector: Selector = raw.parse().map_err(CliError::usage)?;
    let records = verify::run(selector, &opts);
    let wrapped: Vec<HashedRecord<CheckRecord>> = records
        .iter()
        .map(|r| HashedRecord {
            config_hash: &hash,
            record: r,
        })
        .collect();
    write_json(args.out.as_deref(), &wrapped)?;
    let bad = records.iter().filter(|r| !r.as_expected()).count();
    if bad > 0 {
        eprintln!(
            "{bad} of {} checks did not match expectations",
            records.len()
        );
        return Ok(EXIT_VERIFY);
    }
    eprintln!("all {} checks matched expectations", records.len());
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct StationaryRecord<'a> {
    config_hash: &'a str,
    system: String,
    #[serde(with = "complex_obj")]
    z0: Complex64,
    #[serde(with = "complex_obj")]
    a1: Complex64,
    kind: dynamics::StationaryKind,
    period: Option<f64>,
}

fn cmd_stationary(args: &StationaryArgs) -> Result<i32, CliError> {
    let hash = config_hash("stationary", args);
    let sys = parse_system(&args.system)?;
    let mut seeds: Vec<Complex64> = sys
        .stationary_points
        .iter()
        .map(|z| z + Complex64::new(0.05, 0.03))
        .collect();
    for s in &args.seeds {
        seeds.push(parse_complex(s).map_err(CliError::usage)?);
    }
    let search = find_stationary_points(&sys, &seeds);
    for (seed, err) in &search.failures {
        eprintln!("seed {seed}: {err}");
    }
    let records: Vec<StationaryRecord> = search
        .points
        .iter()
        .map(|p: &StationaryPointInfo| StationaryRecord {
            config_hash: &hash,
            system: sys.id.to_string(),
            z0: p.z0,
            a1: p.a1,
            kind: p.kind,
            period: p.period,
        })
        .collect();
    write_json(args.out.as_deref(), &records)?;
    Ok(EXIT_OK)
}

/// Runs the command line `argv` (including the program name).
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Command::ListSystems { out } => cmd_list_systems(out.as_deref()),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Portrait(a) => cmd_portrait(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Stationary(a) => cmd_stationary(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

pub fn main() -> i32 {
    run(std::env::args_os())
}
