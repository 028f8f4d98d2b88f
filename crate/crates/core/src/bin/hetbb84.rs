use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hetbb84::numerics::lambda_coeffs;
use hetbb84::rates::{constrained_min_rate, ConstraintMode, EstimateSet, Target, TAIL_HORIZON};
use hetbb84::sweep::{
    etas_from, format_estimate, gaussian_table, gaussian_tau_ceiling, parse_grid, pure_loss_table,
    qi_compare_table, region_table, SweepTable, TauChoice,
};
use hetbb84::verify::{report, run_all, VerifyOptions};
use hetbb84::Error;

const EXIT_VERIFY: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "hetbb84",
    version,
    about = "Key rates for hybrid BB84 with heterodyne threshold detection"
)]
struct Cli {
    /// Worker threads for sweeps (default: number of processors).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Loss {
    /// Transmissivities: `a,b,c`, `start:stop:count` or `start:stop:count:log`.
    #[arg(long)]
    eta: Option<String>,
    /// Channel losses in dB, same grid syntax.
    #[arg(long = "loss-db")]
    loss_db: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Rate over a pure-loss channel.
    PureLoss {
        #[command(flatten)]
        loss: Loss,
        /// `opt` or a grid of thresholds.
        #[arg(long, default_value = "opt")]
        tau: String,
        /// Search interval for `--tau opt`, as `lo:hi`.
        #[arg(long, default_value = "0.05:5")]
        tau_range: String,
    },
    /// Boundary of the passive-attack (Q, c) region.
    Region {
        #[arg(long, default_value = "0.5,1,1.5")]
        tau: String,
        /// Transmissivity samples per threshold.
        #[arg(long, default_value_t = 201)]
        points: usize,
    },
    /// Comparison against the virtual single-photon detector model.
    QiCompare {
        /// Misalignment error rates.
        #[arg(long, default_value = "0,0.01,0.05")]
        ed: String,
        #[arg(long = "loss-db", default_value = "0:40:81")]
        loss_db: String,
        #[arg(long, default_value = "0.1:5")]
        tau_range: String,
    },
    /// Rate under loss plus excess Gaussian noise.
    Gaussian {
        /// Excess noise values N.
        #[arg(long, default_value = "1e-6,1e-4,1e-3")]
        noise: String,
        #[arg(long = "loss-db", default_value = "0:25:51")]
        loss_db: String,
        /// `opt` or a grid of thresholds.
        #[arg(long, default_value = "opt")]
        tau: String,
        /// Search interval for `--tau opt`; the upper end defaults to the
        /// largest threshold where the tail bound holds.
        #[arg(long)]
        tau_range: Option<String>,
    },
    /// Worst-case rate consistent with measured estimates.
    Estimate {
        /// Measured gain.
        #[arg(long = "Q")]
        q: f64,
        /// Measured error rate.
        #[arg(long = "E", conflicts_with = "c", required_unless_present = "c")]
        e: Option<f64>,
        /// Measured error parameter.
        #[arg(long = "c")]
        c: Option<f64>,
        /// Photon-number probabilities `p0,p1,...`.
        #[arg(long = "P")]
        p: String,
        #[arg(long)]
        tau: f64,
        #[arg(long, value_enum, default_value_t = Mode::Equality)]
        mode: Mode,
    },
    /// Run the self-check suites.
    Verify {
        /// Shift lambda_n by DELTA in the closed-form inputs, as `n:delta`.
        #[arg(long, hide = true)]
        perturb_lambda: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Equality,
    Inequality,
}

enum Failure {
    Usage(String),
    Infeasible(String),
    Verify(String),
    Other(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Infeasible { .. } => Failure::Infeasible(e.to_string()),
            Error::Domain { .. } | Error::BoundInvalid { .. } | Error::Degenerate { .. } => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Other(e.to_string()),
        }
    }
}

fn grid(spec: &str) -> Result<Vec<f64>, Failure> {
    parse_grid(spec).map_err(|e| Failure::Usage(e.to_string()))
}

fn range(spec: &str) -> Result<(f64, f64), Failure> {
    let bad = || Failure::Usage(format!("malformed range '{spec}', expected lo:hi"));
    let (a, b) = spec.split_once(':').ok_or_else(bad)?;
    let lo: f64 = a.trim().parse().map_err(|_| bad())?;
    let hi: f64 = b.trim().parse().map_err(|_| bad())?;
    if !(lo > 0.0 && hi > lo) {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn tau_choice(spec: &str, lo: f64, hi: f64) -> Result<TauChoice, Failure> {
    if spec.trim() == "opt" {
        Ok(TauChoice::Optimize { lo, hi })
    } else {
        Ok(TauChoice::Fixed(grid(spec)?))
    }
}

fn with_meta(mut table: SweepTable) -> String {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut meta = vec![
        format!("hetbb84 {}", env!("CARGO_PKG_VERSION")),
        format!("args: {}", args.join(" ")),
    ];
    meta.append(&mut table.meta);
    table.meta = meta;
    table.to_csv()
}

fn run(cli: &Cli) -> Result<String, Failure> {
    match &cli.cmd {
        Command::PureLoss {
            loss,
            tau,
            tau_range,
        } => {
            let eta = loss.eta.as_deref().map(grid).transpose()?;
            let db = loss.loss_db.as_deref().map(grid).transpose()?;
            let etas = etas_from(eta, db)?;
            let (lo, hi) = range(tau_range)?;
            Ok(with_meta(pure_loss_table(
                &etas,
                &tau_choice(tau, lo, hi)?,
            )?))
        }
        Command::Region { tau, points } => Ok(with_meta(region_table(&grid(tau)?, *points)?)),
        Command::QiCompare {
            ed,
            loss_db,
            tau_range,
        } => {
            let (lo, hi) = range(tau_range)?;
            Ok(with_meta(qi_compare_table(
                &grid(ed)?,
                &grid(loss_db)?,
                lo,
                hi,
            )?))
        }
        Command::Gaussian {
            noise,
            loss_db,
            tau,
            tau_range,
        } => {
            let (lo, hi) = match tau_range {
                Some(r) => range(r)?,
                None => (0.1, gaussian_tau_ceiling()?),
            };
            let choice = tau_choice(tau, lo, hi)?;
            Ok(with_meta(gaussian_table(
                &grid(noise)?,
                &grid(loss_db)?,
                &choice,
            )?))
        }
        Command::Estimate {
            q,
            e,
            c,
            p,
            tau,
            mode,
        } => {
            let p_hat = grid(p)?;
            let target = match (e, c) {
                (Some(e), None) => Target::Qber(*e),
                (None, Some(c)) => Target::C(*c),
                _ => return Err(Failure::Usage("give exactly one of --E or --c".into())),
            };
            let est = EstimateSet {
                q_hat: *q,
                target,
                p_hat,
            };
            let coeffs = lambda_coeffs(*tau, (est.k() + 1).max(TAIL_HORIZON + 1))?;
            let mode = match mode {
                Mode::Equality => ConstraintMode::Equality,
                Mode::Inequality => ConstraintMode::Inequality,
            };
            Ok(format_estimate(&constrained_min_rate(&est, &coeffs, mode)?))
        }
        Command::Verify { perturb_lambda } => {
            let mut opts = VerifyOptions::default();
            if let Some(spec) = perturb_lambda {
                let bad =
                    || Failure::Usage(format!("malformed perturbation '{spec}', expected n:delta"));
                let (n, d) = spec.split_once(':').ok_or_else(bad)?;
                opts.perturb_lambda =
                    Some((n.parse().map_err(|_| bad())?, d.parse().map_err(|_| bad())?));
            }
            let results = run_all(&opts);
            let text = report(&results);
            if results.iter().all(|r| r.passed()) {
                Ok(text)
            } else {
                Err(Failure::Verify(text))
            }
        }
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> std::io::Result<()> {
    match out {
        Some(path) => fs::write(path, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_default_env()
        .filter_level(log::LevelFilter::Warn)
        .init();
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let (text, code) = match run(&cli) {
        Ok(text) => (text, 0),
        Err(Failure::Verify(text)) => (text, EXIT_VERIFY),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_USAGE);
        }
        Err(Failure::Infeasible(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_INFEASIBLE);
        }
        Err(Failure::Other(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::FAILURE;
        }
    };
    if let Err(e) = emit(&cli.out, &text) {
        eprintln!("error: {e}");
        return ExitCode::FAILURE;
    }
    ExitCode::from(code)
}
