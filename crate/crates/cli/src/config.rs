use std::path::{Path, PathBuf};

use clap::ValueEnum;
use qcredit::market::{AssetMethod, DefaultPointPolicy, ImpliedConfig};
use qcredit::pipeline::PipelineConfig;
use qcredit::table::Format;
use serde::Deserialize;

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Proxy,
    Implied,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    Total,
    Total80,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutFormat {
    Csv,
    Json,
}

/// Flat key/value run settings; every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub input: Option<Vec<PathBuf>>,
    pub method: Option<Method>,
    pub dp_policy: Option<Policy>,
    pub window: Option<usize>,
    pub horizon_days: Option<usize>,
    pub risk_free: Option<f64>,
    pub seed: Option<u64>,
    pub format: Option<OutFormat>,
    pub out_dir: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| Failure::usage(format!("bad config {}: {e}", path.display())))
    }
}

/// Settings after merging the config file with command-line overrides.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input: Vec<PathBuf>,
    pub method: Method,
    pub dp_policy: Policy,
    pub window: usize,
    pub horizon_days: usize,
    pub risk_free: f64,
    pub seed: u64,
    pub format: OutFormat,
    pub out_dir: PathBuf,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), Failure> {
        if self.window < 100 {
            return Err(Failure::usage(format!("window must be at least 100, got {}", self.window)));
        }
        if self.horizon_days < 1 {
            return Err(Failure::usage("horizon_days must be at least 1"));
        }
        if !self.risk_free.is_finite() {
            return Err(Failure::usage("risk_free must be finite"));
        }
        Ok(())
    }

    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            method: match self.method {
                Method::Proxy => AssetMethod::DirectProxy,
                Method::Implied => AssetMethod::IterativeImplied,
            },
            dp_policy: match self.dp_policy {
                Policy::Total => DefaultPointPolicy::TotalLiabilities,
                Policy::Total80 => DefaultPointPolicy::Liabilities80,
            },
            window: self.window,
            horizon_days: self.horizon_days,
            implied: ImpliedConfig {
                risk_free: self.risk_free,
                ..ImpliedConfig::default()
            },
        }
    }

    pub fn table_format(&self) -> Format {
        match self.format {
            OutFormat::Csv => Format::Csv,
            OutFormat::Json => Format::Json,
        }
    }

    pub fn out_path(&self, stem: &str) -> PathBuf {
        let ext = match self.format {
            OutFormat::Csv => "csv",
            OutFormat::Json => "jsonl",
        };
        self.out_dir.join(format!("{stem}.{ext}"))
    }

    /// The firm store written by `ingest`.
    pub fn store_path(&self) -> PathBuf {
        self.out_dir.join("firms.csv")
    }
}
