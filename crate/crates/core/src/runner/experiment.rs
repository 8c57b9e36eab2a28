use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rug::ops::RemRounding;
use rug::Integer;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, SampleSource};
use super::report::{
    is_success, verdict_key, AttackPlan, Environment, ExperimentReport, RunTimings, TrialError, TrialRecord,
    TrialTimings,
};
use crate::attack::algorithms::eval_u64;
use crate::attack::{
    build_error_set, evaluate_samples, histogram_mod_q, residuals, small_error_on, small_set_on, transport_samples,
    AttackKind, AttackOptions, AttackOutcome, ErrorValueSet, EvaluatedSamples, NamedHistogram, ProgressFn,
};
use crate::embedding::transport::{eval_coords, lattice_coordinates};
use crate::embedding::{build_embedding, tau, EmbeddingData, DEFAULT_PRECISION_BITS};
use crate::error::{Error, Result};
use crate::ring::roots::{find_roots_with, multiplicative_order, poly_eval_mod, DEFAULT_ROOT_SEED};
use crate::ring::{PrimeModulus, RootInfo};
use crate::sampling::gaussian::uniform_residues;
use crate::sampling::rng::derive_u64;
use crate::sampling::samples::{commit_secret, QuotientRing};
use crate::sampling::{
    error_norm_stats, gen_polylwe_samples, gen_ringlwe_samples, gen_uniform_polylwe_samples,
    gen_uniform_ringlwe_samples, random_secret, sample_lattice_gaussian, derive_stream, CoeffSampler, GaussianSpec,
    LweSampleSet, NormStats, SampleVariant,
};
use crate::vetting::Variant;

/// Error draws binned for the per-trial error histogram.
pub const ERROR_HISTOGRAM_DRAWS: usize = 80;
/// Draws in the lattice norm smoke test.
pub const NORM_SMOKE_DRAWS: usize = 5;

#[derive(Clone, Default)]
pub struct RunOptions {
    pub progress: Option<ProgressFn>,
    /// Overrides `config.workers`.
    pub workers: Option<usize>,
    /// Called after each trial with (index, record).
    pub on_trial: Option<std::sync::Arc<dyn Fn(usize, &TrialRecord) + Send + Sync>>,
    /// Runs before each trial; an error fails that trial only.
    #[doc(hidden)]
    pub before_trial: Option<std::sync::Arc<dyn Fn(usize) -> Result<()> + Send + Sync>>,
}

/// The fixed part of an experiment, built once before the trials.
struct Setup {
    q: u64,
    spec: GaussianSpec,
    emb: Option<EmbeddingData>,
    alpha: RootInfo,
    set: Option<ErrorValueSet>,
    plan: AttackPlan,
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    run_experiment_with(config, &RunOptions::default())
}

pub fn run_experiment_with(config: &ExperimentConfig, opts: &RunOptions) -> Result<ExperimentReport> {
    config.validate()?;
    match opts.workers.or(config.workers) {
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
            pool.install(|| run_inner(config, opts))
        }
        None => run_inner(config, opts),
    }
}

/// A sample set built from a config, with what was planted in it.
#[derive(Clone, Debug)]
pub struct GeneratedSamples {
    pub set: LweSampleSet,
    pub plan: AttackPlan,
    /// s(α) at the plan's α; absent for uniform samples.
    pub planted_residue: Option<u64>,
    pub secret_commitment: Option<String>,
}

/// The samples that trial `index` of [`run_experiment`] attacks.
pub fn generate_samples(config: &ExperimentConfig, index: usize) -> Result<GeneratedSamples> {
    config.validate()?;
    let (setup, _, _) = build_setup(config)?;
    let (set, planted) = trial_samples(config, &setup, derive_u64(config.seed, "trial", index as u64))?;
    let (planted_residue, secret_commitment) = planted.map_or((None, None), |(r, c)| (Some(r), Some(c)));
    Ok(GeneratedSamples {
        set,
        plan: setup.plan,
        planted_residue,
        secret_commitment,
    })
}

#[derive(Clone, Default)]
pub struct SampleAttackOptions {
    pub budgets: crate::Budgets,
    /// Embedding precision for Ring-LWE sets that do not record one.
    pub precision_bits: Option<u32>,
    pub embedding_cache: Option<std::path::PathBuf>,
    pub progress: Option<ProgressFn>,
    pub workers: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleAttackReport {
    pub plan: AttackPlan,
    pub outcome: AttackOutcome,
}

/// Runs the guess loop on a stored sample set at the root α of f mod q.
/// Ring-LWE sets are transported through the embedding and need α = 1.
pub fn attack_sample_set(set: &LweSampleSet, alpha: &Integer, opts: &SampleAttackOptions) -> Result<SampleAttackReport> {
    let q = &set.modulus;
    let a = alpha.clone().rem_euc(q.value());
    let attack_opts = AttackOptions {
        max_attack_q: opts.budgets.max_attack_q,
        progress: opts.progress.clone(),
        workers: opts.workers,
        ..AttackOptions::default()
    };
    match set.variant {
        SampleVariant::RinglweEmbedded => {
            if a != 1 {
                return Err(Error::InvalidInput(format!(
                    "Ring-LWE samples are attacked through α = 1, got {alpha}"
                )));
            }
            let prec = set.precision_bits.or(opts.precision_bits).unwrap_or(DEFAULT_PRECISION_BITS);
            let emb = match &opts.embedding_cache {
                Some(dir) => EmbeddingData::load_or_build(dir, &set.f, prec)?,
                None => build_embedding(&set.f, prec)?,
            };
            let ev = transport_samples(set, &emb, &attack_opts)?;
            let plan = AttackPlan {
                kind: AttackKind::SmallError,
                alpha: 1,
                order: Some(1),
                transported: true,
                set_size: None,
                notes: Vec::new(),
            };
            Ok(SampleAttackReport {
                plan,
                outcome: small_error_on(&ev, &attack_opts)?,
            })
        }
        SampleVariant::PolylweCoefficient => {
            if poly_eval_mod(&set.f, &a, q) != 0 {
                return Err(Error::InvalidInput(format!("{alpha} is not a root of f mod {q}")));
            }
            let mut root = RootInfo::new(a, None, q);
            let order = if root.is_one {
                Some(1)
            } else if root.is_minus_one {
                Some(2)
            } else {
                match multiplicative_order(&root.root, q, &opts.budgets) {
                    Ok(o) => {
                        root.order = Some(o.clone());
                        o.to_u64()
                    }
                    Err(e) => {
                        log::warn!("order of {} unavailable: {e}", root.root);
                        None
                    }
                }
            };
            if root.order.is_none() {
                root.order = order.map(Integer::from);
            }
            let (es, plan) = plan_for_root(&root, order, set.gaussian.sigma, set.n(), q, &opts.budgets)?;
            let ev = evaluate_samples(set, &root, &attack_opts)?;
            let outcome = match &es {
                Some(s) => small_set_on(&ev, s, &attack_opts)?,
                None => small_error_on(&ev, &attack_opts)?,
            };
            Ok(SampleAttackReport { plan, outcome })
        }
    }
}

/// Builds the embedding (Ring-LWE), rescales σ and picks the attack.
fn build_setup(config: &ExperimentConfig) -> Result<(Setup, Option<f64>, Option<NormStats>)> {
    let q = config.q.as_u64().filter(|&v| v <= config.budgets.max_attack_q).ok_or_else(|| {
        Error::AttackInfeasible(format!(
            "q = {} exceeds the guess-loop limit {}",
            config.q, config.budgets.max_attack_q
        ))
    })?;

    let mut spec = GaussianSpec::from_width(config.w, config.truncation)?;
    let sigma = spec.sigma;
    let mut det_root = None;
    let mut norm_smoke_test = None;
    let emb = match config.variant {
        Variant::Polylwe => None,
        Variant::Ringlwe => {
            let emb = match &config.embedding_cache {
                Some(dir) => EmbeddingData::load_or_build(dir, &config.f, config.precision_bits)?,
                None => build_embedding(&config.f, config.precision_bits)?,
            };
            let d = emb.det_root().to_f64();
            spec = spec.with_det_root(d);
            det_root = Some(d);
            let stats = error_norm_stats(NORM_SMOKE_DRAWS, &emb, &spec, derive_u64(config.seed, "norm-test", 0))?;
            if stats.warn {
                log::warn!("error norms exceed √n·σ′·√(2π): max ratio {:.3}", stats.max_ratio);
            }
            norm_smoke_test = Some(stats);
            Some(emb)
        }
    };
    let (alpha, set, plan) = choose_attack(config, sigma)?;
    let setup = Setup {
        q,
        spec,
        emb,
        alpha,
        set,
        plan,
    };
    Ok((setup, det_root, norm_smoke_test))
}

fn run_inner(config: &ExperimentConfig, opts: &RunOptions) -> Result<ExperimentReport> {
    let start = Instant::now();
    let n = config.n();
    let (setup, det_root, norm_smoke_test) = build_setup(config)?;
    let sigma = setup.spec.sigma;
    let setup_secs = start.elapsed().as_secs_f64();

    let attack_opts = AttackOptions {
        max_attack_q: config.budgets.max_attack_q,
        progress: opts.progress.clone(),
        ..AttackOptions::default()
    };
    let mut trials = Vec::with_capacity(config.trials);
    for k in 0..config.trials {
        let seed = derive_u64(config.seed, "trial", k as u64);
        let mut rec = TrialRecord {
            index: k,
            seed,
            planted_residue: None,
            secret_commitment: None,
            sanity_ok: None,
            histograms: Vec::new(),
            outcome: None,
            correct: false,
            error: None,
            timings: TrialTimings::default(),
        };
        let res = catch_unwind(AssertUnwindSafe(|| {
            if let Some(hook) = &opts.before_trial {
                hook(k)?;
            }
            run_trial(config, &setup, &attack_opts, &mut rec)
        }));
        let err = match res {
            Ok(Ok(())) => None,
            Ok(Err(e)) => Some(TrialError::from_error(&e)),
            Err(p) => Some(TrialError {
                kind: "Panic".into(),
                message: panic_message(p),
                budget_exceeded: false,
            }),
        };
        if let Some(e) = &err {
            log::warn!("trial {k} failed: {}", e.message);
        }
        rec.error = err;
        rec.correct = is_success(&rec);
        if let Some(cb) = &opts.on_trial {
            cb(k, &rec);
        }
        trials.push(rec);
    }

    let successes = trials.iter().filter(|t| t.correct).count();
    let mut verdict_counts = BTreeMap::new();
    for t in &trials {
        *verdict_counts.entry(verdict_key(t)).or_insert(0) += 1;
    }
    let family = config
        .f
        .as_binomial()
        .is_some_and(|(_, c)| Integer::from(c + 1u32) == *config.q.value());
    let feasibility_quantity = tau(n, config.q.value(), config.w);
    Ok(ExperimentReport {
        config: config.clone(),
        plan: setup.plan,
        sigma,
        sigma_prime: setup.spec.sigma_prime,
        det_root,
        tau: family.then_some(feasibility_quantity),
        feasibility_quantity,
        norm_smoke_test,
        trials,
        successes,
        verdict_counts,
        timings: RunTimings {
            setup_secs,
            total_secs: start.elapsed().as_secs_f64(),
        },
        environment: Environment::current(),
    })
}

fn panic_message(p: Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = p.downcast_ref::<&str>() {
        s.to_string()
    } else if let Some(s) = p.downcast_ref::<String>() {
        s.clone()
    } else {
        "panic".into()
    }
}

/// Ring-LWE always goes through the root 1. Poly-LWE prefers 1, then −1,
/// then the root of smallest order up to `order_bound` with the small-set test.
fn choose_attack(config: &ExperimentConfig, sigma: f64) -> Result<(RootInfo, Option<ErrorValueSet>, AttackPlan)> {
    if config.variant == Variant::Ringlwe {
        let one = RootInfo::new(Integer::from(1), Some(Integer::from(1)), &config.q);
        let plan = AttackPlan {
            kind: AttackKind::SmallError,
            alpha: 1,
            order: Some(1),
            transported: true,
            set_size: None,
            notes: Vec::new(),
        };
        return Ok((one, None, plan));
    }
    let search = find_roots_with(&config.f, &config.q, &config.budgets, DEFAULT_ROOT_SEED)?;
    let order = |r: &RootInfo| -> Option<u64> {
        if r.is_one {
            Some(1)
        } else if r.is_minus_one {
            Some(2)
        } else {
            r.order_u64()
        }
    };
    let root = match &config.alpha {
        Some(a) => search
            .roots
            .iter()
            .find(|r| &r.root == a)
            .cloned()
            .ok_or_else(|| Error::InvalidInput(format!("{a} is not a root of f mod q")))?,
        None => search
            .roots
            .iter()
            .filter(|r| order(r).is_some_and(|o| o <= config.order_bound))
            .min_by_key(|r| (order(r), r.root.clone()))
            .cloned()
            .ok_or_else(|| {
                let why = if search.orders_available {
                    "no root of f mod q has order within the bound"
                } else {
                    "orders unavailable and neither 1 nor −1 is a root"
                };
                Error::InvalidInput(why.into())
            })?,
    };
    let (set, plan) = plan_for_root(&root, order(&root), sigma, config.n(), &config.q, &config.budgets)?;
    Ok((root, set, plan))
}

/// Small-error test for roots of order 1 or 2 (or unknown order), the
/// small-set test otherwise unless the value set is over its cap.
fn plan_for_root(
    root: &RootInfo,
    r: Option<u64>,
    sigma: f64,
    n: usize,
    q: &PrimeModulus,
    budgets: &crate::Budgets,
) -> Result<(Option<ErrorValueSet>, AttackPlan)> {
    let mut notes = Vec::new();
    let alpha = root.root.to_u64().expect("root below q");
    let (kind, set) = match r {
        Some(1) | Some(2) => (AttackKind::SmallError, None),
        Some(_) => match build_error_set(root, sigma, n, q, budgets) {
            Ok(s) => (AttackKind::SmallSet, Some(s)),
            Err(e @ Error::SetTooLarge { .. }) => {
                notes.push(format!("falling back to the small-error test: {e}"));
                (AttackKind::SmallError, None)
            }
            Err(e) => return Err(e),
        },
        None => {
            notes.push("order of the root unknown; using the small-error test".into());
            (AttackKind::SmallError, None)
        }
    };
    let plan = AttackPlan {
        kind,
        alpha,
        order: r,
        transported: false,
        set_size: set.as_ref().map(|s| s.cardinality()),
        notes,
    };
    Ok((set, plan))
}

/// Samples for the trial with this seed, plus s(α) and the secret commitment
/// when a secret was planted.
fn trial_samples(config: &ExperimentConfig, setup: &Setup, seed: u64) -> Result<(LweSampleSet, Option<(u64, String)>)> {
    let genuine = config.samples == SampleSource::Genuine;
    let secret = random_secret(&config.q, config.n(), derive_u64(seed, "secret", 0))?;
    let sample_seed = derive_u64(seed, "samples", 0);
    let set = match (&setup.emb, genuine) {
        (None, true) => gen_polylwe_samples(&config.f, &config.q, &setup.spec, &secret, config.ell, sample_seed)?,
        (None, false) => gen_uniform_polylwe_samples(&config.f, &config.q, &setup.spec, config.ell, sample_seed)?,
        (Some(emb), true) => gen_ringlwe_samples(emb, &config.q, &setup.spec, &secret, config.ell, sample_seed)?,
        (Some(emb), false) => gen_uniform_ringlwe_samples(emb, &config.q, &setup.spec, config.ell, sample_seed)?,
    };
    let planted = genuine.then(|| (eval_u64(&secret, setup.plan.alpha, setup.q), commit_secret(&secret)));
    Ok((set, planted))
}

fn run_trial(config: &ExperimentConfig, setup: &Setup, opts: &AttackOptions, rec: &mut TrialRecord) -> Result<()> {
    let t0 = Instant::now();
    let (set, planted) = trial_samples(config, setup, rec.seed)?;
    if let Some((residue, commitment)) = planted {
        rec.planted_residue = Some(residue);
        rec.secret_commitment = Some(commitment);
    }
    rec.sanity_ok = Some(sanity_check(config, setup, derive_u64(rec.seed, "sanity", 0))?);
    rec.timings.generate_secs = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let ev: EvaluatedSamples = match &setup.emb {
        Some(emb) => transport_samples(&set, emb, opts)?,
        None => evaluate_samples(&set, &setup.alpha, opts)?,
    };
    rec.histograms = diagnostic_histograms(config, setup, &ev, rec.planted_residue, derive_u64(rec.seed, "histogram", 0))?;
    rec.timings.histogram_secs = t1.elapsed().as_secs_f64();

    let t2 = Instant::now();
    let outcome = match &setup.set {
        Some(s) => small_set_on(&ev, s, opts)?,
        None => small_error_on(&ev, opts)?,
    };
    rec.timings.attack_secs = t2.elapsed().as_secs_f64();
    rec.outcome = Some(outcome);
    Ok(())
}

/// Checks that reduction to F_q respects products, i.e. α is a root of f
/// mod q and, for Ring-LWE, that lattice coordinates survive the embedding.
fn sanity_check(config: &ExperimentConfig, setup: &Setup, seed: u64) -> Result<bool> {
    let q = setup.q;
    let n = config.n();
    let ring = QuotientRing::new(&config.f, q)?;
    let mut rng = derive_stream(seed, "sanity", 0);
    let mut u = uniform_residues(q, n, &mut rng);
    let v = uniform_residues(q, n, &mut rng);
    if let Some(emb) = &setup.emb {
        let ints: Vec<Integer> = u.iter().map(|&c| Integer::from(c)).collect();
        let back = lattice_coordinates(&emb.embed(&ints), emb)?;
        if back != ints {
            return Ok(false);
        }
        u = back.iter().map(|c| c.to_u64().expect("coordinate below q")).collect();
    }
    let a = setup.plan.alpha;
    let lhs = eval_u64(&ring.mul(&u, &v), a, q);
    let rhs = crate::ring::prime::mul_mod(eval_u64(&u, a, q), eval_u64(&v, a, q), q);
    Ok(lhs == rhs)
}

/// Errors e(α) of fresh draws, the a(α) values, and b(α) − s(α)·a(α) at the
/// planted residue.
fn diagnostic_histograms(
    config: &ExperimentConfig,
    setup: &Setup,
    ev: &EvaluatedSamples,
    planted: Option<u64>,
    seed: u64,
) -> Result<Vec<NamedHistogram>> {
    let q = setup.q;
    let qm = PrimeModulus::new(q)?;
    let alpha = Integer::from(setup.plan.alpha);
    let mut errs = Vec::with_capacity(ERROR_HISTOGRAM_DRAWS);
    match &setup.emb {
        Some(emb) => {
            for i in 0..ERROR_HISTOGRAM_DRAWS {
                let mut rng = derive_stream(seed, "error-draw", i as u64);
                let d = sample_lattice_gaussian(emb, &setup.spec, &mut rng)?;
                errs.push(eval_coords(&d.coords, &alpha, &qm).to_u64().expect("residue below q"));
            }
        }
        None => {
            let sampler = CoeffSampler::new(&setup.spec);
            for i in 0..ERROR_HISTOGRAM_DRAWS {
                let mut rng = derive_stream(seed, "error-draw", i as u64);
                let e: Vec<Integer> = sampler.draw_vec(config.n(), &mut rng).into_iter().map(Integer::from).collect();
                errs.push(eval_coords(&e, &alpha, &qm).to_u64().expect("residue below q"));
            }
        }
    }
    let mut out = vec![
        NamedHistogram {
            name: "errors".into(),
            histogram: histogram_mod_q(errs, q),
        },
        NamedHistogram {
            name: "a_values".into(),
            histogram: histogram_mod_q(ev.pairs.iter().map(|p| p.0), q),
        },
    ];
    if let Some(s) = planted {
        out.push(NamedHistogram {
            name: "residuals_at_planted".into(),
            histogram: histogram_mod_q(residuals(ev, s), q),
        });
    }
    Ok(out)
}
