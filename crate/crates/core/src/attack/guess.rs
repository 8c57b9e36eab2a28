use std::ops::Range;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::outcome::{ChainRecord, SurvivorTrace};
use crate::error::{Error, Result};
use crate::ring::prime::{mul_mod, sub_mod};

pub const CHUNK_SIZE: u64 = 1 << 16;
pub const PROGRESS_INTERVAL: u64 = 1 << 20;
pub const DEFAULT_SURVIVOR_CAP: usize = 1 << 20;

/// a_i(α), b_i(α) mod q for every sample.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvaluatedSamples {
    pub q: u64,
    pub alpha: u64,
    pub pairs: Vec<(u64, u64)>,
}

#[derive(Clone, Copy, Debug)]
pub struct Progress {
    pub done: u64,
    pub total: u64,
    pub elapsed: Duration,
}

impl Progress {
    pub fn eta(&self) -> Option<Duration> {
        if self.done == 0 {
            return None;
        }
        let rate = self.elapsed.as_secs_f64() / self.done as f64;
        Some(Duration::from_secs_f64(rate * (self.total - self.done) as f64))
    }
}

pub type ProgressFn = Arc<dyn Fn(&Progress) + Send + Sync>;

#[derive(Clone)]
pub struct AttackOptions {
    pub max_attack_q: u64,
    pub survivor_cap: usize,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
    pub progress: Option<ProgressFn>,
    pub histograms: bool,
}

impl Default for AttackOptions {
    fn default() -> Self {
        AttackOptions {
            max_attack_q: crate::budget::Budgets::default().max_attack_q,
            survivor_cap: DEFAULT_SURVIVOR_CAP,
            workers: None,
            progress: None,
            histograms: false,
        }
    }
}

impl std::fmt::Debug for AttackOptions {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AttackOptions")
            .field("max_attack_q", &self.max_attack_q)
            .field("survivor_cap", &self.survivor_cap)
            .field("workers", &self.workers)
            .field("progress", &self.progress.is_some())
            .field("histograms", &self.histograms)
            .finish()
    }
}

#[derive(Clone, Copy, Debug)]
pub enum SurvivorTest<'a> {
    SmallError,
    SmallSet(&'a [u64]),
}

impl SurvivorTest<'_> {
    /// Residue r ∈ [0, q) passes.
    #[inline]
    pub fn accepts(&self, r: u64, q: u64) -> bool {
        match self {
            SurvivorTest::SmallError => r < q / 4 || r > (3 * q as u128).div_ceil(4) as u64,
            SurvivorTest::SmallSet(s) => s.binary_search(&r).is_ok(),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct LoopResult {
    pub survivors: Vec<u64>,
    pub survivor_count: u64,
    pub trace: SurvivorTrace,
    pub sample_tests: u64,
}

impl LoopResult {
    fn merge(&mut self, later: LoopResult, cap: usize) {
        let room = cap.saturating_sub(self.survivors.len());
        self.survivors.extend(later.survivors.into_iter().take(room));
        self.survivor_count += later.survivor_count;
        self.sample_tests += later.sample_tests;
        self.trace.merge(later.trace);
    }
}

/// Number of leading samples g passes.
#[inline]
fn chain(g: u64, pairs: &[(u64, u64)], q: u64, test: &SurvivorTest) -> usize {
    if q <= u32::MAX as u64 {
        for (i, &(a, b)) in pairs.iter().enumerate() {
            let r = sub_mod(b, g * a % q, q);
            if !test.accepts(r, q) {
                return i;
            }
        }
    } else {
        for (i, &(a, b)) in pairs.iter().enumerate() {
            let r = sub_mod(b, mul_mod(g, a, q), q);
            if !test.accepts(r, q) {
                return i;
            }
        }
    }
    pairs.len()
}

fn scan<I: Iterator<Item = u64>>(guesses: I, ev: &EvaluatedSamples, test: &SurvivorTest, cap: usize) -> LoopResult {
    let ell = ev.pairs.len();
    let mut out = LoopResult {
        trace: SurvivorTrace {
            passed_by_depth: vec![0; ell],
            ..SurvivorTrace::default()
        },
        ..LoopResult::default()
    };
    for g in guesses {
        let c = chain(g, &ev.pairs, ev.q, test);
        out.sample_tests += (c + usize::from(c < ell)) as u64;
        for d in &mut out.trace.passed_by_depth[..c] {
            *d += 1;
        }
        if out.trace.records.is_empty() || c > out.trace.longest_chain {
            out.trace.longest_chain = c;
            out.trace.records.push(ChainRecord { guess: g, chain: c });
        }
        if c == ell {
            out.survivor_count += 1;
            if out.survivors.len() < cap {
                out.survivors.push(g);
            }
        }
    }
    out
}

/// Tests every guess in [0, q), chunked and merged in ascending order.
pub fn sweep(ev: &EvaluatedSamples, test: SurvivorTest, opts: &AttackOptions) -> Result<LoopResult> {
    if ev.q > opts.max_attack_q {
        return Err(Error::AttackInfeasible(format!(
            "q = {} exceeds the guess-loop limit {}",
            ev.q, opts.max_attack_q
        )));
    }
    let run = || sweep_range(ev, test, 0..ev.q, opts);
    match opts.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    }
}

fn sweep_range(ev: &EvaluatedSamples, test: SurvivorTest, range: Range<u64>, opts: &AttackOptions) -> Result<LoopResult> {
    let total = range.end - range.start;
    let chunks = total.div_ceil(CHUNK_SIZE);
    let batch = (rayon::current_num_threads() as u64 * 16).max(16);
    let done = AtomicU64::new(0);
    let start = Instant::now();
    let mut acc: Option<LoopResult> = None;
    let mut first = 0;
    while first < chunks {
        let last = (first + batch).min(chunks);
        let parts: Vec<LoopResult> = (first..last)
            .into_par_iter()
            .map(|c| {
                let lo = range.start + c * CHUNK_SIZE;
                let hi = (lo + CHUNK_SIZE).min(range.end);
                let r = scan(lo..hi, ev, &test, opts.survivor_cap);
                let before = done.fetch_add(hi - lo, Ordering::Relaxed);
                if let Some(p) = &opts.progress {
                    let after = before + (hi - lo);
                    if before / PROGRESS_INTERVAL != after / PROGRESS_INTERVAL {
                        p(&Progress {
                            done: after,
                            total,
                            elapsed: start.elapsed(),
                        });
                    }
                }
                r
            })
            .collect();
        for p in parts {
            match &mut acc {
                None => acc = Some(p),
                Some(a) => a.merge(p, opts.survivor_cap),
            }
        }
        first = last;
    }
    Ok(acc.unwrap_or_else(|| scan(std::iter::empty(), ev, &test, opts.survivor_cap)))
}

/// Tests an explicit list of guesses serially.
pub fn rescan(guesses: &[u64], ev: &EvaluatedSamples, test: SurvivorTest, cap: usize) -> LoopResult {
    scan(guesses.iter().copied(), ev, &test, cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_ev(q: u64, ell: usize, seed: u64) -> EvaluatedSamples {
        let mut rng = crate::sampling::derive_stream(seed, "ev", 0);
        EvaluatedSamples {
            q,
            alpha: 1,
            pairs: (0..ell).map(|_| (rng.gen_range(0..q), rng.gen_range(0..q))).collect(),
        }
    }

    #[test]
    fn window_boundaries() {
        let t = SurvivorTest::SmallError;
        // q = 257: ⌊q/4⌋ = 64, ⌈3q/4⌉ = 193
        assert!(t.accepts(0, 257) && t.accepts(63, 257));
        assert!(!t.accepts(64, 257) && !t.accepts(193, 257));
        assert!(t.accepts(194, 257) && t.accepts(256, 257));
        let accepted = (0..4093).filter(|&r| t.accepts(r, 4093)).count();
        assert_eq!(accepted, 2045);
    }

    #[test]
    fn chunking_does_not_change_results() {
        let ev = random_ev(300_007, 3, 1);
        let serial = scan(0..ev.q, &ev, &SurvivorTest::SmallError, usize::MAX);
        for workers in [1, 3] {
            let opts = AttackOptions {
                workers: Some(workers),
                ..AttackOptions::default()
            };
            let par = sweep(&ev, SurvivorTest::SmallError, &opts).unwrap();
            assert_eq!(par.survivors, serial.survivors);
            assert_eq!(par.survivor_count, serial.survivor_count);
            assert_eq!(par.trace, serial.trace);
            assert_eq!(par.sample_tests, serial.sample_tests);
        }
    }

    #[test]
    fn survivor_cap_keeps_exact_count() {
        let ev = EvaluatedSamples {
            q: 200_003,
            alpha: 1,
            pairs: vec![(0, 0)],
        };
        let opts = AttackOptions {
            survivor_cap: 10,
            ..AttackOptions::default()
        };
        let r = sweep(&ev, SurvivorTest::SmallError, &opts).unwrap();
        assert_eq!(r.survivor_count, 200_003);
        assert_eq!(r.survivors, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn refuses_large_q() {
        let ev = random_ev(1 << 20, 1, 2);
        let opts = AttackOptions {
            max_attack_q: 1000,
            ..AttackOptions::default()
        };
        assert!(matches!(sweep(&ev, SurvivorTest::SmallError, &opts), Err(Error::AttackInfeasible(_))));
    }

    #[test]
    fn progress_fires_per_interval() {
        let ev = random_ev(3 * PROGRESS_INTERVAL + 5, 2, 3);
        let calls = Arc::new(AtomicU64::new(0));
        let c2 = calls.clone();
        let opts = AttackOptions {
            progress: Some(Arc::new(move |p: &Progress| {
                assert!(p.done <= p.total);
                c2.fetch_add(1, Ordering::Relaxed);
            })),
            ..AttackOptions::default()
        };
        sweep(&ev, SurvivorTest::SmallError, &opts).unwrap();
        assert_eq!(calls.load(Ordering::Relaxed), 3);
    }

    #[test]
    fn large_modulus_path_matches_small() {
        // the u128 product path agrees with the u64 one
        let ev = random_ev(1_000_003, 4, 4);
        let t = SurvivorTest::SmallError;
        for g in (0..1_000_003).step_by(997) {
            let small = chain(g, &ev.pairs, ev.q, &t);
            let mut big = 0;
            for &(a, b) in &ev.pairs {
                if !t.accepts(sub_mod(b, mul_mod(g, a, ev.q), ev.q), ev.q) {
                    break;
                }
                big += 1;
            }
            assert_eq!(small, big);
        }
    }
}
