//! α-sweeps of the generalized GHZ family.

use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use belltensor::bell::{optimize_settings, Functional};
use belltensor::optimize::SEARCH_MARGIN;
use belltensor::{correlation_tensor, density_of, make_ghz, maximize_criterion, maximize_sum_squares};
use belltensor::{GhzParams, OptimizerConfig};
use clap::ValueEnum;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanMode {
    Criterion,
    SumSquares,
    Mabk,
    Wwzb,
    CondChsh,
}

impl ScanMode {
    pub fn label(self) -> &'static str {
        match self {
            ScanMode::Criterion => "criterion",
            ScanMode::SumSquares => "sum-squares",
            ScanMode::Mabk => "mabk",
            ScanMode::Wwzb => "wwzb",
            ScanMode::CondChsh => "cond-chsh",
        }
    }

    /// Value separating LHV-compatible from violating results.
    pub fn bound(self) -> f64 {
        match self {
            ScanMode::Criterion | ScanMode::SumSquares | ScanMode::Wwzb => 1.0,
            ScanMode::Mabk | ScanMode::CondChsh => 2.0,
        }
    }
}

impl fmt::Display for ScanMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl AlphaGrid {
    pub fn new(start: f64, stop: f64, points: usize) -> Result<Self> {
        let grid = Self { start, stop, points };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start.is_finite() && self.stop.is_finite()) || self.start >= self.stop {
            return Err(CliError::Parameter(format!(
                "alpha grid needs start < stop, got [{}, {}]",
                self.start, self.stop
            )));
        }
        if self.points < 2 {
            return Err(CliError::Parameter("alpha grid needs at least 2 points".into()));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let step = (self.stop - self.start) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.stop
                } else {
                    self.start + step * i as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig {
    pub n: usize,
    pub alpha_grid: AlphaGrid,
    pub mode: ScanMode,
    pub optimizer: OptimizerConfig,
    pub output_path: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub alpha_rad: f64,
    pub sin_2alpha: f64,
    pub value: f64,
    pub violated: bool,
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanMetadata {
    pub mode: ScanMode,
    pub n: usize,
    pub seed: u64,
    pub restarts: usize,
    pub version: String,
    pub generated_unix: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub metadata: ScanMetadata,
    pub rows: Vec<ScanRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl ScanReport {
    /// Everything except the timestamp line; byte-identical for identical
    /// configurations.
    pub fn csv_body(&self) -> Result<String> {
        let m = &self.metadata;
        let mut out = format!(
            "# mode={} n={} seed={} restarts={} version={}\n",
            m.mode, m.n, m.seed, m.restarts, m.version
        );
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["alpha_rad", "sin_2alpha", "value", "violated", "certified"])?;
        for r in &self.rows {
            w.write_record([
                r.alpha_rad.to_string(),
                r.sin_2alpha.to_string(),
                r.value.to_string(),
                (r.violated as u8).to_string(),
                (r.certified as u8).to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
        out.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
        Ok(out)
    }

    pub fn to_csv(&self) -> Result<String> {
        Ok(format!(
            "# generated_unix={}\n{}",
            self.metadata.generated_unix,
            self.csv_body()?
        ))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

/// Value and certification flag for one grid point.
pub fn evaluate_point(n: usize, alpha: f64, mode: ScanMode, config: &OptimizerConfig) -> Result<(f64, bool)> {
    let state = make_ghz(GhzParams::new(n, alpha)?)?;
    let out = match mode {
        ScanMode::Criterion | ScanMode::SumSquares => {
            let t = correlation_tensor(&density_of(&state))?;
            let r = if mode == ScanMode::Criterion {
                maximize_criterion(&t, config)?
            } else {
                maximize_sum_squares(&t, config)?
            };
            (r.value, r.certified)
        }
        ScanMode::Mabk | ScanMode::Wwzb | ScanMode::CondChsh => {
            let functional = match mode {
                ScanMode::Mabk => Functional::Mabk,
                ScanMode::Wwzb => Functional::Wwzb,
                _ => Functional::CondChsh,
            };
            let r = optimize_settings(&state, functional, config)?;
            (r.value, r.certified)
        }
    };
    Ok(out)
}

/// Evaluates every grid point (concurrently, rows kept in grid order) and
/// writes the CSV report when an output path is set.
pub fn run_scan(config: &ScanConfig) -> Result<ScanReport> {
    config.alpha_grid.validate()?;
    config.optimizer.validate()?;
    let rows = config
        .alpha_grid
        .values()
        .into_par_iter()
        .map(|alpha| {
            let (value, certified) = evaluate_point(config.n, alpha, config.mode, &config.optimizer)?;
            Ok(ScanRow {
                alpha_rad: alpha,
                sin_2alpha: (2.0 * alpha).sin(),
                value,
                violated: value > config.mode.bound() + SEARCH_MARGIN,
                certified,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let generated_unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let report = ScanReport {
        metadata: ScanMetadata {
            mode: config.mode,
            n: config.n,
            seed: config.optimizer.seed,
            restarts: config.optimizer.restarts,
            version: env!("CARGO_PKG_VERSION").to_string(),
            generated_unix,
        },
        rows,
    };
    if let Some(path) = &config.output_path {
        fs::write(path, report.to_csv()?)?;
    }
    Ok(report)
}
