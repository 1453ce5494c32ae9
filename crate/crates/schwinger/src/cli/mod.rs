//! Command-line front end: argument and config parsing, dispatch, and
//! provenance-stamped JSON / CSV output.

mod commands;
pub mod output;
pub mod selftest;

use crate::error::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::ffi::OsString;
use std::path::PathBuf;

pub use commands::*;
pub use selftest::SelftestArgs;

pub const OUT_DIR_ENV: &str = "SCHWINGER_OUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_CONVERGENCE: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Convergence(String),
    Check(String),
    Io(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Convergence(_) => EXIT_CONVERGENCE,
            CliError::Check(_) | CliError::Io(_) => EXIT_CHECK,
        }
    }

    /// One line: `<kind>: <reason>`.
    pub fn line(&self) -> String {
        let (kind, msg) = match self {
            CliError::Validation(m) => ("validation", m),
            CliError::Convergence(m) => ("convergence", m),
            CliError::Check(m) => ("check", m),
            CliError::Io(m) => ("io", m),
        };
        format!("{kind}: {}", msg.replace('\n', " "))
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Validation(_) | Error::Capacity { .. } => CliError::Validation(e.to_string()),
            Error::NoConvergence { .. } | Error::Quadrature { .. } => CliError::Convergence(e.to_string()),
            Error::Check(_) => CliError::Check(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub(crate) fn require<T>(v: Option<T>, flag: &str) -> CliResult<T> {
    v.ok_or_else(|| CliError::Validation(format!("missing required flag --{flag}")))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Parser, Debug)]
#[command(name = "schwinger", version, about = "Lattice Schwinger model toolkit")]
pub struct Cli {
    /// JSON file with flag values; explicit flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory; defaults to $SCHWINGER_OUT_DIR when set.
    #[arg(long = "out-dir", global = true)]
    pub out_dir: Option<PathBuf>,
    /// Explicit JSON output path.
    #[arg(long, global = true)]
    pub json: Option<PathBuf>,
    /// Explicit CSV output path.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    /// What goes to stdout.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Report written files on stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Enumerate the Gauss-law sector.
    Basis(BasisArgs),
    /// Lowest levels and ground-state field profile.
    Ground(GroundArgs),
    /// Ground-state expectation values.
    Measure(MeasureArgs),
    /// Interface path and heights of an occupation string.
    Encode(EncodeArgs),
    /// Compare the Ising encoding with the lattice Hamiltonian.
    VerifyIsing(LatticeArgs),
    /// Atom layout, detunings and Rabi frequency for a lattice point.
    RydbergDesign(DesignArgs),
    /// Exact diagonalization of a clamped atom patch.
    RydbergVerify(PatchArgs),
    /// Field-fluctuation tails and their bounds.
    Bounds(BoundsArgs),
    /// Array size for a target resolution.
    Resources(ResourcesArgs),
    /// Real-time quench.
    Quench(QuenchArgs),
    /// Reference-value and oracle checks.
    Selftest(SelftestArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Basis(_) => "basis",
            Command::Ground(_) => "ground",
            Command::Measure(_) => "measure",
            Command::Encode(_) => "encode",
            Command::VerifyIsing(_) => "verify-ising",
            Command::RydbergDesign(_) => "rydberg-design",
            Command::RydbergVerify(_) => "rydberg-verify",
            Command::Bounds(_) => "bounds",
            Command::Resources(_) => "resources",
            Command::Quench(_) => "quench",
            Command::Selftest(_) => "selftest",
        }
    }
}

const GLOBAL_KEYS: [&str; 7] = ["command", "threads", "out-dir", "json", "csv", "format", "verbose"];

/// Merges config values under explicit flags; rejects keys the command does not know.
pub(crate) fn resolve<T: Serialize + DeserializeOwned + Default>(cli: &T, cfg: &Map<String, Value>) -> CliResult<T> {
    let allowed = match serde_json::to_value(T::default()) {
        Ok(Value::Object(m)) => m,
        _ => Map::new(),
    };
    let mut merged = Map::new();
    for (k, v) in cfg {
        if GLOBAL_KEYS.contains(&k.as_str()) {
            continue;
        }
        if !allowed.contains_key(k) {
            return Err(CliError::Validation(format!("unknown config key \"{k}\"")));
        }
        merged.insert(k.clone(), v.clone());
    }
    if let Ok(Value::Object(m)) = serde_json::to_value(cli) {
        for (k, v) in m {
            if !(v.is_null() || v == Value::Bool(false)) {
                merged.insert(k, v);
            }
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::Validation(format!("config: {e}")))
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GlobalConfig {
    command: Option<String>,
    threads: Option<usize>,
    #[serde(rename = "out-dir")]
    out_dir: Option<PathBuf>,
    json: Option<PathBuf>,
    csv: Option<PathBuf>,
    format: Option<Format>,
    verbose: Option<u8>,
}

fn read_config(cli: &Cli) -> CliResult<(GlobalConfig, Map<String, Value>)> {
    let Some(path) = &cli.config else {
        return Ok((GlobalConfig::default(), Map::new()));
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
    let map: Map<String, Value> =
        serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("config is not a JSON object: {e}")))?;
    let globals: Map<String, Value> =
        map.iter().filter(|(k, _)| GLOBAL_KEYS.contains(&k.as_str())).map(|(k, v)| (k.clone(), v.clone())).collect();
    let g: GlobalConfig =
        serde_json::from_value(Value::Object(globals)).map_err(|e| CliError::Validation(format!("config: {e}")))?;
    if let Some(c) = &g.command {
        if c != cli.command.name() {
            return Err(CliError::Validation(format!("config is for \"{c}\", not \"{}\"", cli.command.name())));
        }
    }
    Ok((g, map))
}

/// Output of one command before serialization.
pub struct Report {
    pub params: Value,
    pub result: Value,
    pub csv: Option<output::Csv>,
    /// Replaces the JSON document on stdout when set.
    pub text: Option<String>,
    pub exit: i32,
}

#[derive(Serialize)]
struct Document<'a> {
    version: &'a str,
    command: &'a str,
    params: &'a Value,
    result: &'a Value,
}

fn emit(cli: &Cli, g: &GlobalConfig, name: &str, report: Report) -> CliResult<i32> {
    let doc = output::to_json(&Document { version: output::VERSION, command: name, params: &report.params, result: &report.result });
    let out_dir = cli.out_dir.clone().or(g.out_dir.clone()).or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from));
    let json_path = cli.json.clone().or(g.json.clone()).or_else(|| out_dir.as_ref().map(|d| d.join(format!("{name}.json"))));
    let csv_path = cli.csv.clone().or(g.csv.clone()).or_else(|| out_dir.as_ref().map(|d| d.join(format!("{name}.csv"))));
    let verbose = cli.verbose.max(g.verbose.unwrap_or(0)) > 0;
    if let Some(p) = &json_path {
        output::write_atomic(p, &doc)?;
        if verbose {
            eprintln!("wrote {}", p.display());
        }
    }
    let csv_text = report.csv.as_ref().map(|c| c.render());
    if let (Some(p), Some(text)) = (&csv_path, &csv_text) {
        output::write_atomic(p, text)?;
        if verbose {
            eprintln!("wrote {}", p.display());
        }
    }
    let format = cli.format.or(g.format).unwrap_or(Format::Json);
    let stdout = match (&report.text, format, &csv_text) {
        (Some(t), _, _) => t.clone(),
        (None, Format::Csv, Some(c)) => c.clone(),
        _ => doc,
    };
    print!("{stdout}");
    Ok(report.exit)
}

fn run(cli: &Cli) -> CliResult<i32> {
    let (g, cfg) = read_config(cli)?;
    if let Some(n) = cli.threads.or(g.threads) {
        if n == 0 {
            return Err(CliError::Validation("--threads must be positive".into()));
        }
        // a pool may already exist when called twice in one process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let name = cli.command.name();
    let report = match &cli.command {
        Command::Basis(a) => cmd_basis(&resolve(a, &cfg)?)?,
        Command::Ground(a) => cmd_ground(&resolve(a, &cfg)?)?,
        Command::Measure(a) => cmd_measure(&resolve(a, &cfg)?)?,
        Command::Encode(a) => cmd_encode(&resolve(a, &cfg)?)?,
        Command::VerifyIsing(a) => cmd_verify_ising(&resolve(a, &cfg)?)?,
        Command::RydbergDesign(a) => cmd_rydberg_design(&resolve(a, &cfg)?)?,
        Command::RydbergVerify(a) => cmd_rydberg_verify(&resolve(a, &cfg)?)?,
        Command::Bounds(a) => cmd_bounds(&resolve(a, &cfg)?)?,
        Command::Resources(a) => cmd_resources(&resolve(a, &cfg)?)?,
        Command::Quench(a) => cmd_quench(&resolve(a, &cfg)?)?,
        Command::Selftest(a) => selftest::cmd_selftest(&resolve(a, &cfg)?)?,
    };
    emit(cli, &g, name, report)
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    EXIT_OK
                }
                _ => {
                    let first = e.to_string().lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
                    eprintln!("validation: {first}");
                    EXIT_VALIDATION
                }
            };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", e.line());
            e.code()
        }
    }
}

/// Shared lattice flags.
#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
pub struct LatticeArgs {
    /// Half the number of sites.
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub size: Option<usize>,
    /// Field cutoff.
    #[arg(long = "W")]
    #[serde(rename = "W")]
    pub cutoff: Option<u32>,
    #[arg(long)]
    pub am: Option<f64>,
    /// Default 1.
    #[arg(long)]
    pub aq: Option<f64>,
    /// Default 0.
    #[arg(long)]
    pub theta: Option<f64>,
}

impl LatticeArgs {
    pub fn lattice(&self) -> CliResult<crate::lattice::LatticeParams> {
        let p = crate::lattice::LatticeParams::dimensionless(
            require(self.size, "L")?,
            require(self.cutoff, "W")?,
            require(self.am, "am")?,
            self.aq.unwrap_or(1.0),
            self.theta.unwrap_or(0.0),
        );
        p.validate()?;
        Ok(p)
    }
}
