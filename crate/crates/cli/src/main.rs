use std::fs;
use std::path::PathBuf;
use std::process;

use belltensor::bell::{optimize_settings, Functional};
use belltensor::lhv::enumerate_inequalities;
use belltensor::optimize::DEFAULT_SEED;
use belltensor::{analytic_ghz_tensor, correlation_tensor, density_of, make_ghz, maximize_criterion};
use belltensor::{maximize_sum_squares, GhzParams, OptimizerConfig};
use belltensor_cli::error::Result;
use belltensor_cli::{bisect_threshold, run_checks, run_scan, AlphaGrid, CliError, Expectations};
use belltensor_cli::{ExitCode, Format, ScanConfig, ScanMode};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "belltensor",
    version,
    about = "Correlation-tensor and Bell-inequality checks for generalized GHZ states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Correlation tensor of a generalized GHZ state
    Tensor {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        alpha: AlphaArgs,
        /// Use the closed-form tensor instead of the numeric expansion
        #[arg(long)]
        analytic: bool,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Maximize the tensor criterion over local frames
    Criterion {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        alpha: AlphaArgs,
        #[arg(long, value_enum, default_value = "criterion")]
        mode: CriterionArg,
        #[command(flatten)]
        opt: OptArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Maximize a Bell functional over measurement settings
    Bell {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        alpha: AlphaArgs,
        #[arg(long, value_enum)]
        mode: FunctionalArg,
        #[command(flatten)]
        opt: OptArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export the sign-tensor inequality catalog with exact local bounds
    Oracle {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep α and report the chosen quantity at every grid point
    Scan {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum)]
        mode: ScanMode,
        #[arg(long, default_value_t = 0.0)]
        start: f64,
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_4)]
        stop: f64,
        #[arg(long, default_value_t = 50)]
        points: usize,
        #[command(flatten)]
        opt: OptArgs,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Locate the violation threshold for odd n
    Bisect {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        opt: OptArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the named reproduction checks
    Reproduce {
        /// Run a single check group
        #[arg(long)]
        only: Option<String>,
        /// Override an expected value, as NAME=VALUE
        #[arg(long = "expect", value_name = "NAME=VALUE")]
        expect: Vec<String>,
        #[command(flatten)]
        opt: OptArgs,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct AlphaArgs {
    /// State angle in radians
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// State angle in degrees
    #[arg(long, allow_negative_numbers = true)]
    alpha_deg: Option<f64>,
}

impl AlphaArgs {
    fn radians(&self) -> f64 {
        match (self.alpha, self.alpha_deg) {
            (Some(a), _) => a,
            (None, Some(d)) => d.to_radians(),
            (None, None) => unreachable!("clap requires one angle flag"),
        }
    }
}

#[derive(Args)]
struct OptArgs {
    #[arg(long, env = "BELLTENSOR_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 64)]
    restarts: usize,
    /// Convergence tolerance of each restart
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 500)]
    max_iterations: usize,
}

impl OptArgs {
    fn config(&self) -> OptimizerConfig {
        OptimizerConfig {
            restarts: self.restarts,
            max_iterations: self.max_iterations,
            tolerance: self.tol,
            seed: self.seed,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CriterionArg {
    Criterion,
    SumSquares,
}

#[derive(Clone, Copy, ValueEnum)]
enum FunctionalArg {
    Chsh,
    Mabk,
    Wwzb,
    CondChsh,
}

impl From<FunctionalArg> for Functional {
    fn from(f: FunctionalArg) -> Self {
        match f {
            FunctionalArg::Chsh => Functional::Chsh,
            FunctionalArg::Mabk => Functional::Mabk,
            FunctionalArg::Wwzb => Functional::Wwzb,
            FunctionalArg::CondChsh => Functional::CondChsh,
        }
    }
}

fn emit(text: &str, out: &Option<PathBuf>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn params(n: usize, alpha: &AlphaArgs) -> Result<GhzParams> {
    Ok(GhzParams::new(n, alpha.radians())?)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Tensor {
            n,
            alpha,
            analytic,
            format,
            out,
        } => {
            let p = params(n, &alpha)?;
            let t = if analytic {
                analytic_ghz_tensor(p)?
            } else {
                correlation_tensor(&density_of(&make_ghz(p)?))?
            };
            let text = match format {
                Format::Json => serde_json::to_string_pretty(&t.to_record())? + "\n",
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    w.write_record(["index", "label", "value"])?;
                    for (i, v) in t.entries().iter().enumerate() {
                        let label: String = belltensor::tensor::digits_of(n, i)
                            .iter()
                            .map(|d| ['I', 'x', 'y', 'z'][*d as usize])
                            .collect();
                        w.write_record([i.to_string(), label, v.to_string()])?;
                    }
                    String::from_utf8(w.into_inner().map_err(|e| CliError::Io(e.into_error()))?)
                        .expect("csv output is utf-8")
                }
            };
            emit(&text, &out)?;
        }
        Command::Criterion {
            n,
            alpha,
            mode,
            opt,
            out,
        } => {
            let t = correlation_tensor(&density_of(&make_ghz(params(n, &alpha)?)?))?;
            let r = match mode {
                CriterionArg::Criterion => maximize_criterion(&t, &opt.config())?,
                CriterionArg::SumSquares => maximize_sum_squares(&t, &opt.config())?,
            };
            emit(&(serde_json::to_string_pretty(&r.to_record())? + "\n"), &out)?;
        }
        Command::Bell {
            n,
            alpha,
            mode,
            opt,
            out,
        } => {
            let state = make_ghz(params(n, &alpha)?)?;
            let r = optimize_settings(&state, mode.into(), &opt.config())?;
            emit(&(serde_json::to_string_pretty(&r.to_record())? + "\n"), &out)?;
        }
        Command::Oracle { n, format, out } => {
            let records = enumerate_inequalities(n)?;
            let text = match format {
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    w.write_record(["sign_bits_hex", "local_bound"])?;
                    for r in &records {
                        w.write_record([r.sign_bits_hex(), r.local_bound.to_string()])?;
                    }
                    String::from_utf8(w.into_inner().map_err(|e| CliError::Io(e.into_error()))?)
                        .expect("csv output is utf-8")
                }
                Format::Json => {
                    let rows: Vec<_> = records
                        .iter()
                        .map(|r| json!({"sign_bits_hex": r.sign_bits_hex(), "local_bound": r.local_bound}))
                        .collect();
                    serde_json::to_string_pretty(&rows)? + "\n"
                }
            };
            emit(&text, &out)?;
        }
        Command::Scan {
            n,
            mode,
            start,
            stop,
            points,
            opt,
            format,
            out,
        } => {
            let config = ScanConfig {
                n,
                alpha_grid: AlphaGrid::new(start, stop, points)?,
                mode,
                optimizer: opt.config(),
                output_path: None,
            };
            let report = run_scan(&config)?;
            emit(&report.render(format)?, &out)?;
        }
        Command::Bisect { n, opt, out } => {
            let alpha = bisect_threshold(n, &opt.config())?;
            let record = json!({"n": n, "alpha_rad": alpha, "sin_2alpha": (2.0 * alpha).sin()});
            emit(&(serde_json::to_string_pretty(&record)? + "\n"), &out)?;
        }
        Command::Reproduce { only, expect, opt } => {
            let mut expectations = Expectations::default();
            for item in &expect {
                let (name, value) = item
                    .split_once('=')
                    .ok_or_else(|| CliError::Parameter(format!("expected NAME=VALUE, got {item:?}")))?;
                let value: f64 = value
                    .trim()
                    .parse()
                    .map_err(|_| CliError::Parameter(format!("not a number: {value:?}")))?;
                expectations.set(name.trim(), value)?;
            }
            let summary = run_checks(&expectations, only.as_deref(), &opt.config())?;
            print!("{}", summary.render());
            if !summary.all_passed() {
                for c in summary.failed() {
                    eprintln!("failed: {}", c.name);
                }
                return Ok(ExitCode::CheckFailure);
            }
        }
    }
    Ok(ExitCode::Success)
}

fn main() {
    let code = match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    process::exit(code as i32);
}
