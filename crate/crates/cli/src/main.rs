//! `ndlomb`: spectral analysis of irregularly sampled data from the
//! command line. Generate test datasets, run the least-squares spectrum,
//! compare against the zero-padded DFT and quadrature demodulation
//! baselines, sweep estimator consistency, and render reports.

mod commands;
mod spec;

use clap::{Args, Parser, Subcommand};

const EXIT_CODES_HELP: &str = "EXIT CODES:
      0   success
      2   command-line usage error
      3   I/O failure
      4   file parse error
      5   no finite-valued samples after filtering
      6   dimension mismatch
      7   invalid range or grid
      8   degenerate denominator or singular system
      9   zero variance in sample values
     10   sample count too small for the statistic
     11   gridded field has no finite values
     12   invalid configuration or parameter

The seed defaults to the NDLOMB_SEED environment variable, then to 1.";

#[derive(Parser)]
#[command(
    name = "ndlomb",
    about = "Least-squares spectral estimation for irregularly sampled, fragmented data",
    after_long_help = EXIT_CODES_HELP,
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic sample set (and optionally its gridded form)
    Generate(GenerateArgs),
    /// Run the least-squares spectrum over a frequency grid
    Analyze(AnalyzeArgs),
    /// Run a comparison method: zero-padded DFT or quadrature demodulation
    Baseline(BaselineArgs),
    /// Analyze a dataset with both the estimator and the DFT and compare peaks
    Compare(CompareArgs),
    /// Monte Carlo consistency sweep over sample counts
    Sweep(SweepArgs),
    /// Scan the worst-case noise-projection factor (analytically 4/pi)
    Emax(EmaxArgs),
    /// Render a plain-text summary of a spectrum
    Report(ReportArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Named scenario: simple-wave, traveling-wave, or noise-only
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Flat key=value spec file (same schema as the sidecar echo)
    #[arg(long)]
    config: Option<String>,
    /// Components as "f1,..,fm@amplitude@phase[;...]"; "" for none
    #[arg(long, conflicts_with_all = ["preset", "config"])]
    components: Option<String>,
    /// Sampling pattern: regular, uniform, or jittered
    #[arg(long, conflicts_with_all = ["preset", "config"])]
    pattern: Option<String>,
    /// Per-axis ranges: "min:step:max,..." (regular/jittered) or "min:max,..." (uniform)
    #[arg(long, conflicts_with_all = ["preset", "config"])]
    range: Option<String>,
    /// Sample count for the uniform pattern
    #[arg(long, conflicts_with_all = ["preset", "config"])]
    n: Option<usize>,
    /// Jitter fraction of the step for the jittered pattern
    #[arg(long, conflicts_with_all = ["preset", "config"])]
    jitter: Option<f64>,
    /// Exclusion intervals "axis:lo..hi[;...]"
    #[arg(long, conflicts_with_all = ["preset", "config"])]
    gaps: Option<String>,
    /// Fraction of points deleted as missing, in [0, 1)
    #[arg(long)]
    missing: Option<f64>,
    /// Gaussian noise standard deviation
    #[arg(long)]
    sigma: Option<f64>,
    /// Master seed (locations, mask, and noise)
    #[arg(long)]
    seed: Option<u64>,
    /// Output sample CSV path
    #[arg(long)]
    output: String,
    /// Also write the gridded-field CSV (regular patterns only)
    #[arg(long)]
    field_output: Option<String>,
    #[command(flatten)]
    format: FormatArg,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Input sample CSV
    #[arg(long)]
    input: String,
    /// Frequency grid "min:step:max[,min:step:max...]" (ordinary frequencies)
    #[arg(long)]
    grid: String,
    /// Noise standard deviation for confidence reporting
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    /// Significance level in (0, 1)
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Override the independent-frequency count M
    #[arg(long)]
    m_indep: Option<f64>,
    /// Output spectrum CSV path
    #[arg(long)]
    output: String,
    /// Cap the worker-thread count
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    format: FormatArg,
}

#[derive(Args)]
struct BaselineArgs {
    /// Method: dft or omd
    #[arg(long)]
    method: String,
    /// Gridded-field CSV (dft)
    #[arg(long)]
    field: Option<String>,
    /// Sample CSV (omd)
    #[arg(long)]
    input: Option<String>,
    /// Frequency vector "f1[,f2...]" for omd, ordinary frequencies
    #[arg(long)]
    freq: Option<String>,
    /// Output spectrum CSV path (dft)
    #[arg(long)]
    output: Option<String>,
    /// Noise standard deviation for the omd error budget
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    /// Significance level for the omd error budget
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Cap the worker-thread count
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    format: FormatArg,
}

#[derive(Args)]
struct CompareArgs {
    /// Named scenario to generate and compare on
    #[arg(long, conflicts_with_all = ["input", "field"])]
    preset: Option<String>,
    /// Sample CSV (file mode)
    #[arg(long, requires = "field")]
    input: Option<String>,
    /// Gridded-field CSV (file mode)
    #[arg(long, requires = "input")]
    field: Option<String>,
    /// Estimator grid "min:step:max[,...]"; defaults to the preset grid
    #[arg(long)]
    grid: Option<String>,
    /// Seed for preset generation
    #[arg(long)]
    seed: Option<u64>,
    /// Write the estimator spectrum here
    #[arg(long)]
    lsm_output: Option<String>,
    /// Write the DFT spectrum here
    #[arg(long)]
    dft_output: Option<String>,
    /// Cap the worker-thread count
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    format: FormatArg,
}

#[derive(Args)]
struct SweepArgs {
    /// Observation window length
    #[arg(long, default_value_t = std::f64::consts::TAU + std::f64::consts::PI / 5.0)]
    t: f64,
    /// Angular frequency of the injected cosine
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    /// Sample counts, comma separated
    #[arg(long, default_value = "50,100,200,400,800")]
    n_list: String,
    /// Monte Carlo replicates per sample count
    #[arg(long, default_value_t = 500)]
    replicates: usize,
    /// Gaussian noise standard deviation
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Seed for the noise replicates
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path (long form: n,method,replicate,error)
    #[arg(long)]
    output: String,
    #[command(flatten)]
    format: FormatArg,
}

#[derive(Args)]
struct EmaxArgs {
    /// Scan points over (0, 2 pi]
    #[arg(long, default_value_t = 1_000_000)]
    resolution: usize,
}

#[derive(Args)]
struct ReportArgs {
    /// Spectrum CSV to report on
    #[arg(long, conflicts_with = "preset")]
    input: Option<String>,
    /// Sample CSV behind the spectrum (enables SNR and error-budget blocks)
    #[arg(long)]
    samples: Option<String>,
    /// Named scenario: generate, analyze, and report in one step
    #[arg(long)]
    preset: Option<String>,
    /// Seed for preset generation
    #[arg(long)]
    seed: Option<u64>,
    /// Noise standard deviation for the confidence-interval block
    /// (defaults to the preset's noise level, or 0 for file input)
    #[arg(long)]
    sigma: Option<f64>,
    /// Significance level in (0, 1)
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Override the independent-frequency count M
    #[arg(long)]
    m_indep: Option<f64>,
    /// Number of peaks to tabulate
    #[arg(long, default_value_t = 5)]
    top: usize,
    /// Write the report here instead of standard output
    #[arg(long)]
    output: Option<String>,
    /// Cap the worker-thread count
    #[arg(long)]
    threads: Option<usize>,
}

/// Output format selector; CSV is the only format.
#[derive(Args)]
struct FormatArg {
    #[arg(long, default_value = "csv")]
    format: String,
}

impl FormatArg {
    fn validate(&self) -> Result<(), CliError> {
        if self.format != "csv" {
            return Err(CliError::Usage(format!(
                "unsupported format {:?} (only csv)",
                self.format
            )));
        }
        Ok(())
    }
}

/// Errors with their process exit codes.
#[derive(Debug)]
pub enum CliError {
    Core(ndlomb::Error),
    Usage(String),
}

impl From<ndlomb::Error> for CliError {
    fn from(e: ndlomb::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(ndlomb::Error::Io(e))
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        use ndlomb::Error::*;
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) => match e {
                Io(_) => 3,
                Parse { .. } => 4,
                EmptyAfterFilter => 5,
                DimensionMismatch { .. } | NonFiniteCoordinate { .. } => 6,
                BadRange { .. } => 7,
                DegenerateDenominator { .. } | SingularSystem => 8,
                ZeroVariance => 9,
                BadN { .. } => 10,
                AllMissing => 11,
                BadInput(_) | GridMismatch => 12,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) => m.clone(),
            CliError::Core(e) => e.to_string(),
        }
    }
}

/// Seed resolution: flag, then NDLOMB_SEED, then 1.
fn resolve_seed(flag: Option<u64>) -> u64 {
    flag.or_else(|| {
        std::env::var("NDLOMB_SEED")
            .ok()
            .and_then(|s| s.trim().parse().ok())
    })
    .unwrap_or(1)
}

fn configure_threads(threads: Option<usize>) -> Result<(), CliError> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => commands::generate(args),
        Command::Analyze(args) => commands::analyze(args),
        Command::Baseline(args) => commands::baseline(args),
        Command::Compare(args) => commands::compare(args),
        Command::Sweep(args) => commands::sweep(args),
        Command::Emax(args) => commands::emax(args),
        Command::Report(args) => commands::report(args),
    };
    if let Err(e) = result {
        eprintln!("ndlomb: error: {}", e.message());
        std::process::exit(e.exit_code());
    }
}
