use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use ncorlicz::algebra::{random_operator, Block};
use ncorlicz::direct_sum::{tuple_norm, Exponent, TupleOperator, TupleSpace};
use ncorlicz::norms::{luxemburg_norm, orlicz_norm, Gauge, NormMethod};
use ncorlicz::report::VerificationReport;
use ncorlicz::suites::{run_suite, Suite, SuiteConfig};
use ncorlicz::{Error, Operator, OperatorKind, OrliczFunction, TracialAlgebra};

#[derive(Parser)]
#[command(name = "ncorlicz", version, about = "Norms and inequality checks in noncommutative Orlicz spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Norm of an operator (or of a tuple of operators) read from a JSON file.
    Norm {
        operator_file: PathBuf,
        /// N-function descriptor as JSON, or `@path` to read it from a file.
        #[arg(long)]
        phi: String,
        #[arg(long, value_enum, default_value = "luxemburg")]
        gauge: Gauge,
        /// Outer exponent for tuple inputs (`inf` allowed).
        #[arg(long)]
        p: Option<String>,
        /// Comma-separated weights for tuple inputs (default: all 1).
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
    },
    /// Run a verification suite and print its reports.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Master seed [default: 42]
        #[arg(long)]
        seed: Option<u64>,
        /// Trials per check [default: 1000]
        #[arg(long)]
        trials: Option<usize>,
        /// Matrix block size [default: 3]
        #[arg(long)]
        dim: Option<usize>,
        /// Overrides every suite tolerance
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Write a deterministic corpus of random operators.
    Gen {
        /// Comma-separated block dimensions.
        #[arg(long, value_delimiter = ',', default_value = "3")]
        blocks: Vec<usize>,
        #[arg(long, value_enum, default_value = "general")]
        kind: OperatorKind,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

enum Failure {
    Config(String),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Numeric(_) | Error::Sampling(_) | Error::Domain { .. } => Failure::Numeric(e.to_string()),
            Error::Input(_) | Error::Shape(_) => Failure::Config(e.to_string()),
        }
    }
}

fn config_err(e: impl std::fmt::Display) -> Failure {
    Failure::Config(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(m)) => {
            eprintln!("numeric error: {m}");
            ExitCode::from(3)
        }
    }
}

fn run(cmd: Command) -> Result<ExitCode, Failure> {
    match cmd {
        Command::Norm { operator_file, phi, gauge, p, weights } => cmd_norm(&operator_file, &phi, gauge, p.as_deref(), weights),
        Command::Verify { suite, config, seed, trials, dim, tol, out, format } => {
            let mut cfg = match config {
                Some(path) => serde_json::from_str(&read(&path)?).map_err(|e| config_err(format!("{}: {e}", path.display())))?,
                None => SuiteConfig::default(),
            };
            cfg.seed = seed.unwrap_or(cfg.seed);
            cfg.trials = trials.unwrap_or(cfg.trials);
            cfg.dim = dim.unwrap_or(cfg.dim);
            cfg.tol = tol.or(cfg.tol);
            let reports = run_suite(suite, &cfg)?;
            emit(&reports, format, out.as_deref())?;
            Ok(if reports.iter().all(VerificationReport::passed) { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Gen { blocks, kind, count, seed, scale, out } => {
            let alg = TracialAlgebra::new(blocks.iter().map(|&dim| Block { dim, trace_scale: 1.0 }).collect())?;
            fs::create_dir_all(&out).map_err(|e| config_err(format!("{}: {e}", out.display())))?;
            let width = count.saturating_sub(1).to_string().len().max(3);
            for i in 0..count {
                let op = random_operator(&alg, kind, scale, seed ^ i as u64)?;
                let path = out.join(format!("op_{i:0width$}.json"));
                let body = serde_json::to_string_pretty(&op).map_err(config_err)?;
                fs::write(&path, body + "\n").map_err(|e| config_err(format!("{}: {e}", path.display())))?;
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))
}

fn cmd_norm(file: &Path, phi: &str, gauge: Gauge, p: Option<&str>, weights: Option<Vec<f64>>) -> Result<ExitCode, Failure> {
    let phi_text = match phi.strip_prefix('@') {
        Some(path) => read(Path::new(path))?,
        None => phi.to_string(),
    };
    let phi: OrliczFunction = serde_json::from_str(&phi_text).map_err(|e| config_err(format!("phi descriptor: {e}")))?;
    let body: Value = serde_json::from_str(&read(file)?).map_err(|e| config_err(format!("{}: {e}", file.display())))?;
    let method = match gauge {
        Gauge::Luxemburg => NormMethod::Bisection,
        Gauge::Orlicz => NormMethod::Amemiya,
    };
    let result = if body.get("parts").is_some() {
        let tuple: TupleOperator = serde_json::from_value(body).map_err(config_err)?;
        let p: Exponent = match p {
            Some(text) => text.parse().map_err(|e| config_err(format!("--p: {e}")))?,
            None => return Err(Failure::Config("tuple input needs --p".into())),
        };
        let weights = weights.unwrap_or_else(|| vec![1.0; tuple.len()]);
        let components = tuple
            .parts
            .iter()
            .map(|x| ncorlicz::direct_sum::Component { phi: phi.clone(), algebra: x.algebra().clone() })
            .collect();
        let space = TupleSpace::new(components, weights, p, gauge)?;
        json!({ "value": tuple_norm(&space, &tuple)?, "method": method, "residual": Value::Null })
    } else {
        if p.is_some() || weights.is_some() {
            return Err(Failure::Config("--p and --weights apply to tuple inputs only".into()));
        }
        let op: Operator = serde_json::from_value(body).map_err(config_err)?;
        let r = match gauge {
            Gauge::Luxemburg => luxemburg_norm(&op, &phi)?,
            Gauge::Orlicz => orlicz_norm(&op, &phi)?,
        };
        serde_json::to_value(r).map_err(config_err)?
    };
    println!("{result}");
    Ok(ExitCode::SUCCESS)
}

fn emit(reports: &[VerificationReport], format: Format, out: Option<&Path>) -> Result<(), Failure> {
    let text = match format {
        Format::Json => serde_json::to_string_pretty(reports).map_err(config_err)? + "\n",
        Format::Text => reports.iter().map(VerificationReport::to_text).collect::<Vec<_>>().join("\n"),
    };
    match out {
        Some(path) => fs::write(path, text).map_err(|e| config_err(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
