//! `mixgp`: designs, fits, predictions and benchmarks from the command line.
//!
//! Exit codes: 0 success, 2 bad input or unreadable files, 3 design
//! generation failure, 4 numerical failure while fitting, 5 points that do
//! not fit their design space, 6 a failed fit under `benchmark --strict`.

use clap::{Parser, Subcommand, ValueEnum};
use mixgp::benchmarks::{
    cantilever_space, cosine_space, dragon_space_audit, run_cantilever_benchmark, run_cosine_benchmark,
    write_correlation, write_report, BenchmarkSettings, CantileverConfig, KindOutcome,
};
use mixgp::doe::{grid, lhs, write_design};
use mixgp::kernels::hyperparameter_count;
use mixgp::space::VariableSpec;
use mixgp::{fit, CategoricalKernelKind, Data, DesignSpace, Error, ExponentPower, FitConfig, Model, Point};
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "mixgp",
    version,
    about = "Gaussian processes over mixed continuous, integer and categorical inputs",
    after_help = "Environment: MIXGP_SEED sets the default --seed, MIXGP_JITTER the default --jitter."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a design (LHS or full grid) over a design space.
    Doe {
        /// Design space JSON file.
        #[arg(long)]
        space: PathBuf,
        /// Number of LHS points.
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, env = "MIXGP_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Method::Lhs)]
        method: Method,
        /// Grid points per continuous/integer variable, comma separated.
        #[arg(long, value_delimiter = ',')]
        counts: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a model by maximum likelihood and write it as JSON.
    Fit {
        #[arg(long)]
        space: PathBuf,
        /// CSV with one column per variable and a final `y` column.
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "ehh", value_parser = parse_kind)]
        kernel: CategoricalKernelKind,
        /// Continuous exponent: 1 (absolute) or 2 (squared).
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
        p: u8,
        #[arg(long, default_value_t = 10)]
        starts: usize,
        #[arg(long, env = "MIXGP_SEED", default_value_t = 0)]
        seed: u64,
        /// Likelihood evaluations per start (default 500 × hyperparameters).
        #[arg(long)]
        max_evals: Option<usize>,
        #[arg(long, env = "MIXGP_JITTER", default_value_t = 1e-10)]
        jitter: f64,
        #[arg(long)]
        out_model: PathBuf,
    },
    /// Predict mean and standard deviation at the points of a CSV file.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a benchmark problem and write one row per kernel.
    Benchmark {
        #[arg(long, value_enum)]
        problem: Problem,
        #[arg(long, value_delimiter = ',', default_value = "gd,cr,ehh", value_parser = parse_kind)]
        kernels: Vec<CategoricalKernelKind>,
        #[arg(long, default_value_t = 98)]
        doe_size: usize,
        #[arg(long, env = "MIXGP_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
        p: u8,
        #[arg(long, default_value_t = 10)]
        starts: usize,
        #[arg(long)]
        max_evals: Option<usize>,
        #[arg(long, env = "MIXGP_JITTER", default_value_t = 1e-10)]
        jitter: f64,
        /// Report CSV; printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Directory for per-kernel R_1 exports.
        #[arg(long)]
        corr_dir: Option<PathBuf>,
        /// Exit with code 6 if any fit fails.
        #[arg(long)]
        strict: bool,
    },
    /// Print hyperparameter counts of every kernel kind for a design space.
    KernelInfo {
        #[arg(long)]
        space: PathBuf,
    },
    /// Write the fitted correlation matrix R_i of one categorical variable.
    ExportCorr {
        #[arg(long)]
        model: PathBuf,
        /// 0-based position of the variable in the design space.
        #[arg(long)]
        variable: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Lhs,
    Grid,
}

#[derive(Clone, Copy, ValueEnum)]
enum Problem {
    Cosine,
    Beam,
    DragonAudit,
}

fn parse_kind(s: &str) -> Result<CategoricalKernelKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

struct Failure {
    code: u8,
    message: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn fail(code: u8, context: &str, e: impl fmt::Display) -> Failure {
    Failure {
        code,
        message: format!("{context}: {e}"),
    }
}

/// Loading errors: points outside their space are validation (5), the rest input (2).
fn load_failure(context: &str, e: Error) -> Failure {
    fail(if e.is_validation() { 5 } else { 2 }, context, e)
}

fn exponent(p: u8) -> ExponentPower {
    ExponentPower::try_from(p).expect("clap restricts p to 1 or 2")
}

/// Writes the whole artifact at once so a failure never leaves a partial file.
fn write_file(path: &Path, bytes: Vec<u8>) -> Result<(), Failure> {
    std::fs::write(path, bytes).map_err(|e| fail(2, &format!("writing {}", path.display()), e))
}

fn load_space(path: &Path) -> Result<DesignSpace, Failure> {
    DesignSpace::load(path).map_err(|e| fail(2, &format!("reading space {}", path.display()), e))
}

fn load_model(path: &Path) -> Result<Model, Failure> {
    Model::load(path).map_err(|e| load_failure(&format!("reading model {}", path.display()), e))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Doe {
            space,
            n,
            seed,
            method,
            counts,
            out,
        } => {
            let space = load_space(&space)?;
            let points: Vec<Point> = match method {
                Method::Lhs if n == 0 => return Err(fail(3, "lhs", "--n must be at least 1")),
                Method::Lhs => lhs(&space, n, seed),
                Method::Grid => grid(&space, &counts),
            }
            .map_err(|e| fail(3, "generating design", e))?;
            let mut buf = Vec::new();
            write_design(&mut buf, &space, &points).map_err(|e| fail(3, "formatting design", e))?;
            write_file(&out, buf)?;
            println!("{} points written to {}", points.len(), out.display());
        }
        Command::Fit {
            space,
            data,
            kernel,
            p,
            starts,
            seed,
            max_evals,
            jitter,
            out_model,
        } => {
            let space = load_space(&space)?;
            let data = Data::load(space, &data).map_err(|e| load_failure(&format!("reading data {}", data.display()), e))?;
            let cfg = FitConfig {
                n_starts: starts,
                max_evals,
                jitter,
                seed,
                ..FitConfig::default()
            };
            cfg.validate().map_err(|e| fail(2, "fit options", e))?;
            let t0 = Instant::now();
            let model = fit(&data, kernel, exponent(p), &cfg).map_err(|e| match e {
                e if e.is_validation() => fail(5, "fit", e),
                e => fail(4, "fit", e),
            })?;
            let secs = t0.elapsed().as_secs_f64();
            let json = model.to_json().map_err(|e| fail(4, "serializing model", e))?;
            write_file(&out_model, json.into_bytes())?;
            println!(
                "kernel={} n_hyper={} log_likelihood={:.6} time={:.3}s",
                model.kind(),
                model.n_hyper(),
                model.log_likelihood(),
                secs
            );
        }
        Command::Predict { model, points, out } => {
            let model = load_model(&model)?;
            let space = model.space().clone();
            let text = std::fs::read_to_string(&points).map_err(|e| fail(2, &format!("reading {}", points.display()), e))?;
            if text.trim().is_empty() {
                write_file(&out, Vec::new())?;
                println!("0 predictions written to {}", out.display());
                return Ok(());
            }
            let (pts, _) = space
                .read_points::<_, f64>(text.as_bytes(), false)
                .map_err(|e| load_failure(&format!("reading points {}", points.display()), e))?;
            let preds = model.predict_batch(&pts).map_err(|e| fail(5, "predict", e))?;
            let mut buf = Vec::new();
            write_predictions(&mut buf, &space, &pts, &preds).map_err(|e| fail(2, "formatting predictions", e))?;
            write_file(&out, buf)?;
            println!("{} predictions written to {}", pts.len(), out.display());
        }
        Command::Benchmark {
            problem,
            kernels,
            doe_size,
            seed,
            p,
            starts,
            max_evals,
            jitter,
            out,
            corr_dir,
            strict,
        } => {
            let settings = BenchmarkSettings {
                p: exponent(p),
                fit: FitConfig {
                    n_starts: starts,
                    max_evals,
                    jitter,
                    ..FitConfig::default()
                },
            };
            settings.fit.validate().map_err(|e| fail(2, "benchmark options", e))?;
            let (name, outcomes, scale, space) = match problem {
                Problem::DragonAudit => {
                    let audit = dragon_space_audit().map_err(|e| fail(6, "audit", e))?;
                    println!("{audit}");
                    return Ok(());
                }
                Problem::Cosine => (
                    "cosine",
                    run_cosine_benchmark(&kernels, doe_size, seed, &settings),
                    1.0,
                    cosine_space(),
                ),
                Problem::Beam => (
                    "beam",
                    run_cantilever_benchmark(&kernels, doe_size, seed, &CantileverConfig::default(), &settings),
                    100.0,
                    cantilever_space(),
                ),
            };
            let outcomes = outcomes.map_err(|e| fail(3, "benchmark setup", e))?;
            let mut buf = Vec::new();
            write_report(&mut buf, name, &outcomes, scale).map_err(|e| fail(2, "formatting report", e))?;
            match &out {
                Some(path) => {
                    write_file(path, buf)?;
                    for o in &outcomes {
                        println!("{}", summary_line(o, scale));
                    }
                }
                None => print!("{}", String::from_utf8_lossy(&buf)),
            }
            if let Some(dir) = corr_dir {
                std::fs::create_dir_all(&dir).map_err(|e| fail(2, "creating correlation directory", e))?;
                let names = level_names(&space);
                for o in &outcomes {
                    if let Ok(r) = &o.result {
                        let mut buf = Vec::new();
                        write_correlation(&mut buf, &r.correlation, &names).map_err(|e| fail(2, "formatting matrix", e))?;
                        write_file(&dir.join(format!("{name}_{}_R1.csv", o.kind)), buf)?;
                    }
                }
            }
            if strict && outcomes.iter().any(|o| o.result.is_err()) {
                return Err(fail(6, "benchmark", "at least one fit failed"));
            }
        }
        Command::KernelInfo { space } => {
            let space = load_space(&space)?;
            println!(
                "continuous={} integer={} categorical={} relaxed={}",
                space.n_continuous(),
                space.n_integer(),
                space.n_categorical(),
                space.relaxed_dim()
            );
            for kind in CategoricalKernelKind::ALL {
                println!("{} {}", kind, hyperparameter_count(&space, kind));
            }
        }
        Command::ExportCorr { model, variable, out } => {
            let model = load_model(&model)?;
            let space = model.space();
            let Some(VariableSpec::Categorical { levels, .. }) = space.variables().get(variable) else {
                return Err(fail(5, "export-corr", format!("variable {variable} is not categorical")));
            };
            let k = space.variables()[..variable].iter().filter(|v| v.level_count().is_some()).count();
            let mut buf = Vec::new();
            write_correlation(&mut buf, &model.categorical_matrices()[k], levels).map_err(|e| fail(2, "formatting matrix", e))?;
            write_file(&out, buf)?;
            println!("{}x{} matrix written to {}", levels.len(), levels.len(), out.display());
        }
    }
    Ok(())
}

fn level_names(space: &DesignSpace) -> Vec<String> {
    match space.variables().iter().find(|v| v.level_count().is_some()) {
        Some(VariableSpec::Categorical { levels, .. }) => levels.clone(),
        _ => Vec::new(),
    }
}

fn summary_line(o: &KindOutcome, scale: f64) -> String {
    match &o.result {
        Ok(r) => format!(
            "{} n_hyper={} rmse={:.6} total_error={:.6} pva={:.4} log_likelihood={:.4} time={:.2}s",
            r.kind,
            r.n_hyper,
            r.rmse * scale,
            r.total_error * scale,
            r.pva,
            r.log_likelihood,
            r.fit_seconds
        ),
        Err(e) => format!("{} error: {e}", o.kind),
    }
}

fn write_predictions(out: &mut Vec<u8>, space: &DesignSpace, pts: &[Point], preds: &[(f64, f64)]) -> mixgp::Result<()> {
    // reuse the points writer for the input columns, then append mean/std
    let mut cols = Vec::new();
    space.write_points(&mut cols, pts, None)?;
    let text = String::from_utf8(cols).expect("csv output is utf-8");
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    out.extend_from_slice(format!("{header},mean,std\n").as_bytes());
    for (line, (m, v)) in lines.zip(preds) {
        out.extend_from_slice(format!("{line},{m:?},{:?}\n", v.max(0.0).sqrt()).as_bytes());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
