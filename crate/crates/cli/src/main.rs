mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::{FileConfig, Method, OutFormat, Policy, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "qcredit", version, about = "q-Gaussian structural default-risk toolkit")]
struct Cli {
    /// Flat TOML file with run settings; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for the firm store and all output tables.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<OutFormat>,
    #[arg(long, global = true, value_enum)]
    method: Option<Method>,
    #[arg(long, global = true, value_enum)]
    dp_policy: Option<Policy>,
    /// Rolling-window length in trading days.
    #[arg(long, global = true)]
    window: Option<usize>,
    /// PD horizon in trading days.
    #[arg(long, global = true)]
    horizon_days: Option<usize>,
    /// Risk-free rate per year (implied-asset method).
    #[arg(long, global = true)]
    risk_free: Option<f64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Transform {
    Abs,
    Squared,
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LawKind {
    Q,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimKind {
    /// Labelled synthetic firm panel in the ingest schema.
    Portfolio,
    /// One superstatistical return series.
    Returns,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Validate market CSVs and write the normalized firm store.
    Ingest { files: Vec<PathBuf> },
    /// Asset values, default points and log-returns.
    Assets,
    /// Rolling q-Gaussian fits.
    Fit,
    /// Daily DTDs and one-horizon Black-Cox / q-Black-Cox PDs.
    Pd,
    /// Simple and generalized distances to default.
    Dtd,
    /// Autocorrelation of each firm's log-asset returns.
    Acf {
        #[arg(long, value_enum, default_value = "abs")]
        transform: Transform,
        #[arg(long, default_value_t = 100)]
        max_lag: usize,
        #[arg(long)]
        firm: Option<String>,
    },
    /// Q-Q pairs of the last window against its fitted law.
    Qq {
        #[arg(long, value_enum, default_value = "q")]
        law: LawKind,
        #[arg(long)]
        firm: Option<String>,
    },
    /// Histogram of final-window q per firm.
    Qhist {
        #[arg(long, default_value_t = 0.05)]
        bin_width: f64,
    },
    /// ROC of final PD_qBC against default labels, with balanced resampling.
    Roc {
        #[arg(long, default_value_t = 100)]
        repeats: usize,
    },
    /// Synthetic data.
    Simulate {
        #[arg(value_enum, default_value = "portfolio")]
        kind: SimKind,
        /// Gamma shape of the precision law.
        #[arg(long, default_value_t = 1.5)]
        shape: f64,
        /// Gamma rate of the precision law (per day).
        #[arg(long, default_value_t = 2e-4)]
        rate: f64,
        /// Mean regime length in days.
        #[arg(long, default_value_t = 50)]
        regime_len: usize,
        #[arg(long, default_value_t = 2500)]
        days: usize,
    },
}

/// Error with the process exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub msg: String,
}

impl Failure {
    pub fn usage(msg: impl Into<String>) -> Self {
        Self { code: 2, msg: msg.into() }
    }
}

impl From<qcredit::Error> for Failure {
    fn from(e: qcredit::Error) -> Self {
        let code = match e {
            qcredit::Error::Schema { .. } | qcredit::Error::Invalid(_) | qcredit::Error::Io(_) => 2,
            _ => 1,
        };
        Self { code, msg: e.to_string() }
    }
}

fn resolve(cli: &Cli) -> Result<RunConfig, Failure> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let cfg = RunConfig {
        input: file.input.unwrap_or_default(),
        method: cli.method.or(file.method).unwrap_or(Method::Proxy),
        dp_policy: cli.dp_policy.or(file.dp_policy).unwrap_or(Policy::Total),
        window: cli.window.or(file.window).unwrap_or(250),
        horizon_days: cli.horizon_days.or(file.horizon_days).unwrap_or(250),
        risk_free: cli.risk_free.or(file.risk_free).unwrap_or(0.02),
        seed: cli.seed.or(file.seed).unwrap_or(0),
        format: cli.format.or(file.format).unwrap_or(OutFormat::Csv),
        out_dir: cli
            .out_dir
            .clone()
            .or(file.out_dir)
            .unwrap_or_else(|| PathBuf::from("out")),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let cfg = resolve(&cli)?;
    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| {
        Failure::usage(format!("cannot create {}: {e}", cfg.out_dir.display()))
    })?;
    match cli.cmd {
        Cmd::Ingest { files } => commands::ingest(&cfg, files),
        Cmd::Assets => commands::assets(&cfg),
        Cmd::Fit => commands::fit(&cfg),
        Cmd::Pd => commands::pd(&cfg),
        Cmd::Dtd => commands::dtd(&cfg),
        Cmd::Acf {
            transform,
            max_lag,
            firm,
        } => commands::acf(&cfg, transform, max_lag, firm.as_deref()),
        Cmd::Qq { law, firm } => commands::qq(&cfg, law, firm.as_deref()),
        Cmd::Qhist { bin_width } => commands::qhist(&cfg, bin_width),
        Cmd::Roc { repeats } => commands::roc(&cfg, repeats),
        Cmd::Simulate {
            kind,
            shape,
            rate,
            regime_len,
            days,
        } => commands::simulate(&cfg, kind, shape, rate, regime_len, days),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
