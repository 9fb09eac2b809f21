//! `blindgate` command-line front end: key management, the four blind
//! application pipelines, benchmarks and the stream calculator.

pub mod bench;
mod commands;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub use commands::execute;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] blindgate::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    File { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("result disagrees with the plaintext oracle: {0}")]
    OracleMismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(blindgate::Error::NoiseOverflow { .. }) => 3,
            CliError::Core(blindgate::Error::Io(_)) | CliError::File { .. } | CliError::Io(_) => 4,
            _ => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "blindgate", version, about = "Blind queries over integer somewhat-homomorphic encryption")]
pub struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true, env = "BLINDGATE_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Security parameter.
    #[arg(long, global = true, default_value_t = 3)]
    pub lambda: u32,
    /// Parameter profile: a, b or vod.
    #[arg(long, global = true, default_value = "b")]
    pub profile: String,
    /// Worker threads; 1 runs serially, 0 uses every core.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    /// CSV output file. Only `bench` falls back to stdout without it.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a key pair.
    Keygen(KeygenArgs),
    /// Encrypt an integer as a little-endian word of encrypted bits.
    Encrypt(EncryptArgs),
    /// Decrypt an encrypted word.
    Decrypt(DecryptArgs),
    /// Run a blind query over an encrypted table.
    Sql(SqlArgs),
    /// Blind location-based lookup.
    Lbs(LbsArgs),
    /// Encrypted trust-based route discovery.
    Route(RouteArgs),
    /// Blind video retrieval.
    Vod(VodArgs),
    /// Timed sweeps with gate counts and noise probes.
    Bench(BenchArgs),
    /// Encrypted stream size, bandwidth and cache calculator.
    Estimate(EstimateArgs),
}

#[derive(Debug, Args)]
pub struct KeygenArgs {
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the public half here.
    #[arg(long)]
    pub public_out: Option<PathBuf>,
    /// Publish encryptions of zero so anyone can encrypt.
    #[arg(long)]
    pub asymmetric: bool,
    /// Attach the squashed-decryption hint.
    #[arg(long)]
    pub squash: bool,
    /// Do not publish the reduction modulus x0.
    #[arg(long)]
    pub no_x0: bool,
}

#[derive(Debug, Args)]
pub struct EncryptArgs {
    #[arg(long)]
    pub key: PathBuf,
    #[arg(long)]
    pub value: u64,
    #[arg(long, default_value_t = 8)]
    pub width: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DecryptArgs {
    #[arg(long)]
    pub key: PathBuf,
    #[arg(long = "in")]
    pub input: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SqlOpArg {
    Select,
    Update,
    Delete,
    Count,
    Avg,
}

#[derive(Debug, Args)]
pub struct SqlArgs {
    #[arg(long)]
    pub key: PathBuf,
    /// Plain table, CSV with a header row.
    #[arg(long)]
    pub table: PathBuf,
    /// Schema JSON.
    #[arg(long)]
    pub schema: PathBuf,
    #[arg(long, value_enum)]
    pub op: SqlOpArg,
    /// `column=value`, `column>value` or `column<value`. In an equality a
    /// value of `*` matches anything and `_` matches any single character of
    /// a text column.
    #[arg(long = "where")]
    pub filter: String,
    /// Which match SELECT returns, counting from 1.
    #[arg(long, default_value_t = 1)]
    pub index: u64,
    /// Replacement record for UPDATE, comma separated in schema order.
    #[arg(long)]
    pub set: Option<String>,
    /// Column averaged by AVG.
    #[arg(long)]
    pub target: Option<String>,
    /// Run through the generic datagram circuit.
    #[arg(long)]
    pub generic: bool,
    /// Write the encrypted result table (UPDATE, DELETE) as JSON lines.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LbsModeArg {
    Coverage,
    Sort,
}

#[derive(Debug, Args)]
pub struct LbsArgs {
    #[arg(long)]
    pub key: PathBuf,
    /// Store JSON.
    #[arg(long)]
    pub store: PathBuf,
    #[arg(long)]
    pub x: u64,
    #[arg(long)]
    pub y: u64,
    #[arg(long)]
    pub category: u64,
    #[arg(long)]
    pub radius: u64,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Encrypt the radius too.
    #[arg(long)]
    pub hide_radius: bool,
    #[arg(long, value_enum, default_value_t = LbsModeArg::Coverage)]
    pub mode: LbsModeArg,
}

#[derive(Debug, Args)]
pub struct RouteArgs {
    /// Source key pair; generated from the global flags when absent.
    #[arg(long)]
    pub key: Option<PathBuf>,
    /// Topology JSON; a seeded random one is built when absent.
    #[arg(long)]
    pub topology: Option<PathBuf>,
    /// Save the topology used.
    #[arg(long)]
    pub save_topology: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    pub nodes: usize,
    #[arg(long, default_value_t = 5)]
    pub degree: usize,
    #[arg(long, default_value_t = 0)]
    pub source: usize,
    /// Defaults to the last node.
    #[arg(long)]
    pub dest: Option<usize>,
    /// Defaults to one less than the node count.
    #[arg(long)]
    pub max_hops: Option<usize>,
    /// Write every packet, one JSON object per line.
    #[arg(long)]
    pub packets: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VodArgs {
    #[command(subcommand)]
    pub action: VodAction,
}

#[derive(Debug, Subcommand)]
pub enum VodAction {
    /// Write a store of pseudo-random videos.
    Store {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long, default_value_t = 8)]
        count: usize,
        #[arg(long, default_value_t = 1024)]
        size: usize,
    },
    /// Request a video blindly and decrypt the stream.
    Fetch {
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        dir: PathBuf,
        #[arg(long)]
        id: u64,
        /// Decrypted bytes.
        #[arg(long)]
        out: PathBuf,
        /// Encrypted stream as sent by the provider.
        #[arg(long)]
        stream: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BenchCircuit {
    Mul,
    Sql,
    Route,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value_t = BenchCircuit::Mul)]
    pub circuit: BenchCircuit,
    /// Security parameters to sweep; the global `--lambda` when empty.
    #[arg(long, value_delimiter = ',')]
    pub lambdas: Vec<u32>,
    /// Word widths (mul), row counts (sql) or node counts (route).
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    pub reps: usize,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Security parameters; the global `--lambda` when empty.
    #[arg(long, value_delimiter = ',')]
    pub lambdas: Vec<u32>,
    #[arg(long, default_value_t = blindgate::vod::REFERENCE_MB)]
    pub size_mb: f64,
    /// Original bandwidth in MB/s.
    #[arg(long, default_value_t = blindgate::vod::REFERENCE_BW)]
    pub bw: f64,
    /// Stream length in seconds for the cache column.
    #[arg(long, default_value_t = 0.0)]
    pub length_s: f64,
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            if code == 0 {
                let _ = write!(out, "{e}");
            } else {
                let first = e.to_string();
                let _ = writeln!(err, "{}", first.lines().next().unwrap_or("invalid arguments"));
                let _ = writeln!(err, "usage: blindgate [--seed N] [--lambda L] [--profile a|b|vod] [--threads N] [--csv PATH] <keygen|encrypt|decrypt|sql|lbs|route|vod|bench|estimate> ...");
            }
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let file_err = |source| CliError::File {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(file_err)?;
    tmp.write_all(bytes).map_err(file_err)?;
    tmp.persist(path).map_err(|e| file_err(e.error))?;
    Ok(())
}

pub fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::File {
        path: path.to_path_buf(),
        source,
    })
}
