use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use weakring::attack::{Progress, ProgressFn};
use weakring::runner::{
    attack_sample_set, generate_samples, load_config, run_experiment_with, save_report, RunOptions, SampleAttackOptions,
};
use weakring::sampling::{load_samples, save_samples};
use weakring::vetting::{
    check_family_conditions, cyclotomic_immunity_check, fermat_family_checks, findq, search_trinomials, vet_parameters,
    RootTarget, Variant, VetOptions,
};
use weakring::{Budgets, Error, IntPolynomial, Integer, PrimeModulus};

#[derive(Parser, Debug)]
#[command(name = "weakring", version, about = "Attacks and parameter checks for Poly-LWE and Ring-LWE instances")]
struct Cli {
    /// JSON file overriding the default resource budgets.
    #[arg(long, global = true)]
    budgets: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run an experiment described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Write the report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Attack a stored sample file through the root alpha.
    Attack {
        #[arg(long)]
        samples: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[arg(long)]
        workers: Option<usize>,
        /// Directory for cached embeddings (Ring-LWE samples).
        #[arg(long)]
        embedding_cache: Option<PathBuf>,
    },
    /// Write the samples of one trial of a config to a file.
    Gen {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        trial: usize,
    },
    /// Check a parameter set against the known attacks.
    Vet {
        /// Defining polynomial, e.g. "x^4 + 256".
        #[arg(long)]
        f: String,
        #[arg(long)]
        q: String,
        /// Gaussian width w = sqrt(2 pi) sigma.
        #[arg(long)]
        w: f64,
        #[arg(long, value_enum, default_value_t = VariantArg::Polylwe)]
        variant: VariantArg,
        #[arg(long, default_value_t = 16)]
        order_bound: u64,
        #[arg(long)]
        precision_bits: Option<u32>,
        #[arg(long)]
        embedding_cache: Option<PathBuf>,
    },
    /// Prime q for which f and the m-th cyclotomic polynomial share a root.
    Findq {
        #[arg(long)]
        f: String,
        #[arg(long)]
        m: u64,
    },
    /// Search trinomials x^n + a x + b with a large prime factor of f(1) or f(-1).
    Search {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = TargetArg::One)]
        target: TargetArg,
        #[arg(long, allow_hyphen_values = true)]
        a_min: i64,
        #[arg(long, allow_hyphen_values = true)]
        a_max: i64,
        #[arg(long, allow_hyphen_values = true)]
        b_min: i64,
        #[arg(long, allow_hyphen_values = true)]
        b_max: i64,
        #[arg(long, default_value = "2")]
        q_min: String,
    },
    /// Conditions on x^n + q - 1, or the 2-power family table with --fermat.
    FamilyCheck {
        #[arg(long, required_unless_present = "fermat")]
        n: Option<usize>,
        #[arg(long, required_unless_present = "fermat")]
        q: Option<String>,
        #[arg(long, required_unless_present = "fermat")]
        w: Option<f64>,
        /// Check the table entries below this bound instead.
        #[arg(long, conflicts_with_all = ["n", "q", "w"])]
        fermat: Option<String>,
    },
    /// Orders of the roots of the m-th cyclotomic polynomial mod a split prime.
    CycloCheck {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        q: String,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VariantArg {
    Polylwe,
    Ringlwe,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Polylwe => Variant::Polylwe,
            VariantArg::Ringlwe => Variant::Ringlwe,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TargetArg {
    One,
    MinusOne,
}

/// Completed normally, or stopped by a resource limit.
enum Status {
    Done,
    Budget,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // clap exits with 2 on usage errors, which is reserved for budget failures here
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::FAILURE } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli) {
        Ok(Status::Done) => ExitCode::SUCCESS,
        Ok(Status::Budget) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            let budget = e.downcast_ref::<Error>().is_some_and(Error::is_budget_exceeded);
            ExitCode::from(if budget { 2 } else { 1 })
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<Status> {
    let budgets = match &cli.budgets {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => Budgets::default(),
    };
    match cli.command {
        Command::Run { config, out, workers } => run(&config, out.as_deref(), workers),
        Command::Attack {
            samples,
            alpha,
            workers,
            embedding_cache,
        } => {
            let set = load_samples(&samples)?;
            let alpha = parse_integer(&alpha)?;
            let opts = SampleAttackOptions {
                budgets,
                embedding_cache,
                progress: Some(progress_printer()),
                workers,
                ..SampleAttackOptions::default()
            };
            emit(&attack_sample_set(&set, &alpha, &opts)?)?;
            Ok(Status::Done)
        }
        Command::Gen { config, out, trial } => {
            let config = load_config(&config)?;
            let g = generate_samples(&config, trial)?;
            save_samples(&g.set, &out)?;
            emit(&GenSummary {
                out: out.display().to_string(),
                variant: config.variant,
                samples: g.set.count(),
                alpha: g.plan.alpha.to_string(),
                planted_residue: g.planted_residue.map(|r| r.to_string()),
                secret_commitment: g.secret_commitment,
            })?;
            Ok(Status::Done)
        }
        Command::Vet {
            f,
            q,
            w,
            variant,
            order_bound,
            precision_bits,
            embedding_cache,
        } => {
            let mut opts = VetOptions {
                order_bound,
                budgets,
                embedding_cache,
                ..VetOptions::default()
            };
            if let Some(p) = precision_bits {
                opts.precision_bits = p;
            }
            let report = vet_parameters(&parse_poly(&f)?, &PrimeModulus::parse(&q)?, w, variant.into(), &opts);
            emit(&report)?;
            Ok(Status::Done)
        }
        Command::Findq { f, m } => {
            let r = findq(&parse_poly(&f)?, m, &budgets)?;
            emit(&r)?;
            Ok(if r.lower_bound_only { Status::Budget } else { Status::Done })
        }
        Command::Search {
            n,
            target,
            a_min,
            a_max,
            b_min,
            b_max,
            q_min,
        } => {
            let target = match target {
                TargetArg::One => RootTarget::One,
                TargetArg::MinusOne => RootTarget::MinusOne,
            };
            let hits = search_trinomials(n, target, a_min..=a_max, b_min..=b_max, &parse_integer(&q_min)?, &budgets)?;
            emit(&hits)?;
            Ok(Status::Done)
        }
        Command::FamilyCheck { n, q, w, fermat } => {
            if let Some(bound) = fermat {
                emit(&fermat_family_checks(&parse_integer(&bound)?)?)?;
                return Ok(Status::Done);
            }
            let (Some(n), Some(q), Some(w)) = (n, q, w) else {
                bail!("--n, --q and --w are required");
            };
            emit(&check_family_conditions(n, &PrimeModulus::parse(&q)?, w, &budgets))?;
            Ok(Status::Done)
        }
        Command::CycloCheck { m, q } => {
            emit(&cyclotomic_immunity_check(m, &PrimeModulus::parse(&q)?, &budgets)?)?;
            Ok(Status::Done)
        }
    }
}

#[derive(Serialize)]
struct GenSummary {
    out: String,
    variant: Variant,
    samples: usize,
    alpha: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    planted_residue: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    secret_commitment: Option<String>,
}

#[derive(Serialize)]
struct RunSummary {
    out: String,
    trials: usize,
    successes: usize,
    verdict_counts: std::collections::BTreeMap<String, usize>,
}

fn run(config: &Path, out: Option<&Path>, workers: Option<usize>) -> anyhow::Result<Status> {
    let config = load_config(config)?;
    let total = config.trials;
    let opts = RunOptions {
        progress: Some(progress_printer()),
        workers,
        on_trial: Some(Arc::new(move |k, rec| {
            let status = match (&rec.error, rec.correct) {
                (Some(e), _) => format!("failed: {}", e.message),
                (None, true) => "correct".to_string(),
                (None, false) => "incorrect".to_string(),
            };
            eprintln!("trial {}/{total}: {status}", k + 1);
        })),
        ..RunOptions::default()
    };
    let report = run_experiment_with(&config, &opts)?;
    let budget = report
        .trials
        .iter()
        .any(|t| t.error.as_ref().is_some_and(|e| e.budget_exceeded));
    match out {
        Some(path) => {
            save_report(&report, path)?;
            emit(&RunSummary {
                out: path.display().to_string(),
                trials: report.trials.len(),
                successes: report.successes,
                verdict_counts: report.verdict_counts.clone(),
            })?;
        }
        None => emit(&report)?,
    }
    Ok(if budget { Status::Budget } else { Status::Done })
}

fn progress_printer() -> ProgressFn {
    Arc::new(|p: &Progress| {
        let pct = 100.0 * p.done as f64 / p.total.max(1) as f64;
        let eta = p.eta().map_or_else(|| "?".to_string(), fmt_duration);
        eprintln!(
            "guesses {}/{} ({pct:.1}%), elapsed {}, eta {eta}",
            p.done,
            p.total,
            fmt_duration(p.elapsed)
        );
    })
}

fn fmt_duration(d: Duration) -> String {
    let s = d.as_secs_f64();
    if s < 60.0 {
        format!("{s:.1}s")
    } else if s < 3600.0 {
        format!("{}m{:02}s", (s / 60.0) as u64, (s % 60.0) as u64)
    } else {
        format!("{}h{:02}m", (s / 3600.0) as u64, ((s % 3600.0) / 60.0) as u64)
    }
}

fn emit<T: Serialize>(value: &T) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn parse_poly(s: &str) -> anyhow::Result<IntPolynomial> {
    Ok(IntPolynomial::parse(s)?)
}

fn parse_integer(s: &str) -> anyhow::Result<Integer> {
    Integer::from_str(s.trim()).with_context(|| format!("not an integer: {s:?}"))
}
