use std::time::Instant;

use rayon::prelude::*;
use rug::Integer;

use super::error_set::ErrorValueSet;
use super::guess::{rescan, sweep, AttackOptions, EvaluatedSamples, LoopResult, SurvivorTest};
use super::histogram::{histogram_mod_q, NamedHistogram};
use super::outcome::{verdict_for, AttackKind, AttackOutcome, Verdict};
use crate::embedding::transport::{eval_coords, lattice_coordinates};
use crate::embedding::EmbeddingData;
use crate::error::{Error, Result};
use crate::ring::prime::{add_mod, mul_mod, sub_mod};
use crate::ring::{poly_eval_mod, RootInfo};
use crate::sampling::{LweSampleSet, SampleVariant};

pub(crate) fn eval_u64(coeffs: &[u64], alpha: u64, q: u64) -> u64 {
    coeffs.iter().rev().fold(0, |acc, &c| add_mod(mul_mod(acc, alpha, q), c, q))
}

fn attack_q(set: &LweSampleSet, opts: &AttackOptions) -> Result<u64> {
    let q = set
        .modulus
        .as_u64()
        .filter(|&q| q <= opts.max_attack_q)
        .ok_or_else(|| {
            Error::AttackInfeasible(format!(
                "q = {} exceeds the guess-loop limit {}",
                set.modulus, opts.max_attack_q
            ))
        })?;
    Ok(q)
}

/// Evaluates every Poly-LWE pair at a root α of f mod q.
pub fn evaluate_samples(set: &LweSampleSet, alpha: &RootInfo, opts: &AttackOptions) -> Result<EvaluatedSamples> {
    if set.variant != SampleVariant::PolylweCoefficient {
        return Err(Error::SampleVariantMismatch("the polynomial attacks need Poly-LWE samples".into()));
    }
    let q = attack_q(set, opts)?;
    if poly_eval_mod(&set.f, &alpha.root, &set.modulus) != 0 {
        return Err(Error::InvalidInput(format!("{} is not a root of f mod {q}", alpha.root)));
    }
    let a = alpha.root.to_u64().expect("root below q");
    let pairs = set
        .poly_samples()?
        .iter()
        .map(|s| (eval_u64(&s.a, a, q), eval_u64(&s.b, a, q)))
        .collect();
    Ok(EvaluatedSamples { q, alpha: a, pairs })
}

/// Transports every Ring-LWE pair to F_q through the root 1.
pub fn transport_samples(set: &LweSampleSet, emb: &EmbeddingData, opts: &AttackOptions) -> Result<EvaluatedSamples> {
    if set.variant != SampleVariant::RinglweEmbedded {
        return Err(Error::SampleVariantMismatch("attack_ringlwe needs Ring-LWE samples".into()));
    }
    if emb.f != set.f {
        return Err(Error::SampleVariantMismatch("samples and embedding use different f".into()));
    }
    let q = attack_q(set, opts)?;
    let one = Integer::from(1);
    if poly_eval_mod(&set.f, &one, &set.modulus) != 0 {
        return Err(Error::InvalidInput(format!("1 is not a root of f mod {q}")));
    }
    let to_res = |v: &[rug::Float]| -> Result<u64> {
        let c = lattice_coordinates(v, emb)?;
        Ok(eval_coords(&c, &one, &set.modulus).to_u64().expect("residue below q"))
    };
    let pairs = set
        .ring_samples()?
        .par_iter()
        .map(|s| Ok((to_res(&s.a)?, to_res(&s.b)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(EvaluatedSamples { q, alpha: 1, pairs })
}

fn finish(
    kind: AttackKind,
    ev: &EvaluatedSamples,
    r: LoopResult,
    set_size: Option<usize>,
    start: Instant,
    opts: &AttackOptions,
) -> AttackOutcome {
    let truncated = (r.survivors.len() as u64) < r.survivor_count;
    let verdict = verdict_for(r.survivors, r.survivor_count);
    let mut histograms = Vec::new();
    if opts.histograms {
        histograms.push(NamedHistogram {
            name: "a_values".into(),
            histogram: histogram_mod_q(ev.pairs.iter().map(|p| p.0), ev.q),
        });
        if let Verdict::Guess { residue } = verdict {
            histograms.push(NamedHistogram {
                name: "residuals_at_guess".into(),
                histogram: histogram_mod_q(residuals(ev, residue), ev.q),
            });
        }
    }
    AttackOutcome {
        kind,
        q: ev.q,
        alpha: ev.alpha,
        verdict,
        survivor_count: r.survivor_count,
        survivors_truncated: truncated,
        survivor_trace: r.trace,
        samples_consumed: ev.pairs.len(),
        sample_tests: r.sample_tests,
        set_size,
        elapsed_secs: start.elapsed().as_secs_f64(),
        histograms,
    }
}

/// b_i(α) − g·a_i(α) mod q for every sample.
pub fn residuals(ev: &EvaluatedSamples, g: u64) -> impl Iterator<Item = u64> + '_ {
    ev.pairs.iter().map(move |&(a, b)| sub_mod(b, mul_mod(g, a, ev.q), ev.q))
}

/// Small-set attack on evaluated pairs.
pub fn small_set_on(ev: &EvaluatedSamples, s: &ErrorValueSet, opts: &AttackOptions) -> Result<AttackOutcome> {
    if s.q != ev.q || s.alpha.root != ev.alpha {
        return Err(Error::SampleVariantMismatch("error value set built for another (q, α)".into()));
    }
    let start = Instant::now();
    let r = sweep(ev, SurvivorTest::SmallSet(&s.values), opts)?;
    Ok(finish(AttackKind::SmallSet, ev, r, Some(s.cardinality()), start, opts))
}

/// Small-error attack on evaluated pairs.
pub fn small_error_on(ev: &EvaluatedSamples, opts: &AttackOptions) -> Result<AttackOutcome> {
    let start = Instant::now();
    let r = sweep(ev, SurvivorTest::SmallError, opts)?;
    Ok(finish(AttackKind::SmallError, ev, r, None, start, opts))
}

/// Guesses g for s(α) such that b_i(α) − g·a_i(α) ∈ S for every sample.
pub fn attack_small_set(set: &LweSampleSet, alpha: &RootInfo, s: &ErrorValueSet, opts: &AttackOptions) -> Result<AttackOutcome> {
    let ev = evaluate_samples(set, alpha, opts)?;
    small_set_on(&ev, s, opts)
}

/// Guesses g for s(α) such that every b_i(α) − g·a_i(α) lies in
/// [0, ⌊q/4⌋) ∪ (⌈3q/4⌉, q).
pub fn attack_small_error(set: &LweSampleSet, alpha: &RootInfo, opts: &AttackOptions) -> Result<AttackOutcome> {
    let ev = evaluate_samples(set, alpha, opts)?;
    small_error_on(&ev, opts)
}

/// Transports Ring-LWE samples to F_q through α = 1 and runs the
/// small-error attack there.
pub fn attack_ringlwe(set: &LweSampleSet, emb: &EmbeddingData, opts: &AttackOptions) -> Result<AttackOutcome> {
    let start = Instant::now();
    let ev = transport_samples(set, emb, opts)?;
    let mut out = small_error_on(&ev, opts)?;
    out.elapsed_secs = start.elapsed().as_secs_f64();
    Ok(out)
}

/// Re-tests the survivors of an inconclusive run against fresh evaluated
/// samples. `s` is required when the prior run used the small-set test.
pub fn continue_attack(prior: &AttackOutcome, new: &EvaluatedSamples, s: Option<&ErrorValueSet>) -> Result<AttackOutcome> {
    let Verdict::InsufficientSamples { survivors } = &prior.verdict else {
        return Err(Error::InvalidInput("only an InsufficientSamples outcome can be continued".into()));
    };
    if new.q != prior.q || new.alpha != prior.alpha {
        return Err(Error::SampleVariantMismatch(format!(
            "new samples are for (q, α) = ({}, {}), prior run used ({}, {})",
            new.q, new.alpha, prior.q, prior.alpha
        )));
    }
    if new.pairs.is_empty() {
        return Ok(prior.clone());
    }
    let test = match prior.kind {
        AttackKind::SmallError => SurvivorTest::SmallError,
        AttackKind::SmallSet => {
            let s = s.ok_or_else(|| Error::InvalidInput("continuing a small-set run needs its error value set".into()))?;
            if s.q != new.q || s.alpha.root != new.alpha {
                return Err(Error::SampleVariantMismatch("error value set built for another (q, α)".into()));
            }
            SurvivorTest::SmallSet(&s.values)
        }
    };
    let start = Instant::now();
    let r = rescan(survivors, new, test, usize::MAX);
    let mut trace = prior.survivor_trace.clone();
    let offset = prior.samples_consumed;
    trace.passed_by_depth.extend(r.trace.passed_by_depth.iter().copied());
    let best = r.trace.records.last().map(|c| c.chain).unwrap_or(0);
    if let Some(rec) = r.trace.records.last() {
        if offset + best > trace.longest_chain {
            trace.longest_chain = offset + best;
            trace.records.push(super::outcome::ChainRecord {
                guess: rec.guess,
                chain: offset + best,
            });
        }
    }
    Ok(AttackOutcome {
        kind: prior.kind,
        q: prior.q,
        alpha: prior.alpha,
        verdict: verdict_for(r.survivors, r.survivor_count),
        survivor_count: r.survivor_count,
        survivors_truncated: false,
        survivor_trace: trace,
        samples_consumed: prior.samples_consumed + new.pairs.len(),
        sample_tests: prior.sample_tests + r.sample_tests,
        set_size: prior.set_size,
        elapsed_secs: prior.elapsed_secs + start.elapsed().as_secs_f64(),
        histograms: Vec::new(),
    })
}
