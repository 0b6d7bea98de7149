//! Monte-Carlo evaluation of rank-based stopping rules.
//!
//! Trial `i` draws its values from a ChaCha8 stream keyed by the base seed
//! and selected by `i`, so a report depends only on `(base_seed, trials)`
//! and never on how trials are split across workers.

use std::num::NonZeroUsize;
use std::thread;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heuristic::HeuristicParams;
use crate::policy::{backward_induction, PolicyTable};
use crate::rankprob::Mode;

/// Decides whether to stop on the arrival of round `t` given its rank `r`
/// among the first `t` arrivals (`r = 1` is the smallest).
pub trait StoppingRule {
    fn should_stop(&self, t: usize, r: usize) -> bool;
}

impl StoppingRule for PolicyTable {
    fn should_stop(&self, t: usize, r: usize) -> bool {
        PolicyTable::should_stop(self, t, r)
    }
}

impl StoppingRule for HeuristicParams {
    fn should_stop(&self, t: usize, r: usize) -> bool {
        HeuristicParams::should_stop(self, t, r)
    }
}

impl<F: Fn(usize, usize) -> bool> StoppingRule for F {
    fn should_stop(&self, t: usize, r: usize) -> bool {
        self(t, r)
    }
}

/// One random instance: `n` distinct uniforms in arrival order.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialInstance {
    pub values: Vec<f64>,
    /// 1-based arrival index of the value closest to `1/2`.
    pub best_index: usize,
    /// `ranks[i]` is the 1-based rank of arrival `i + 1` among all `n`.
    pub ranks: Vec<usize>,
}

impl TrialInstance {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// Rebuilds derived fields from raw values; `None` on ties in value or
    /// in distance to `1/2`.
    pub fn from_values(values: Vec<f64>) -> Option<Self> {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_unstable_by(|&a, &b| values[a].total_cmp(&values[b]));
        if order.windows(2).any(|w| values[w[0]] == values[w[1]]) {
            return None;
        }
        let mut ranks = vec![0; values.len()];
        for (rank, &i) in order.iter().enumerate() {
            ranks[i] = rank + 1;
        }
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        let mut tied = false;
        for (i, &x) in values.iter().enumerate() {
            let d = (x - 0.5).abs();
            if d < best_dist {
                best = i;
                best_dist = d;
                tied = false;
            } else if d == best_dist {
                tied = true;
            }
        }
        if tied {
            return None;
        }
        Some(TrialInstance {
            values,
            best_index: best + 1,
            ranks,
        })
    }
}

/// Draws `n` uniforms on `[0, 1)`, redrawing on the (measure-zero) tie
/// events.
pub fn generate_instance<R: Rng + ?Sized>(n: usize, rng: &mut R) -> TrialInstance {
    assert!(n >= 1, "instance needs n >= 1");
    loop {
        let values: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        if let Some(instance) = TrialInstance::from_values(values) {
            return instance;
        }
    }
}

/// RNG stream for trial `index` under `base_seed`.
pub fn trial_rng(base_seed: u64, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&base_seed.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

/// Binary indexed tree of counts over positions `1..=n`.
#[derive(Debug, Clone)]
struct Fenwick {
    tree: Vec<u32>,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Fenwick { tree: vec![0; n + 1] }
    }

    fn clear(&mut self, n: usize) {
        self.tree.clear();
        self.tree.resize(n + 1, 0);
    }

    fn add(&mut self, mut i: usize) {
        while i < self.tree.len() {
            self.tree[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    fn prefix(&self, mut i: usize) -> usize {
        let mut sum = 0;
        while i > 0 {
            sum += self.tree[i] as usize;
            i &= i - 1;
        }
        sum
    }
}

/// Relative ranks of successive arrivals, from their known global ranks and
/// a Fenwick counter: `O(log n)` per arrival.
#[derive(Debug, Clone)]
pub struct RankTracker {
    fenwick: Fenwick,
    inserted: usize,
}

impl RankTracker {
    pub fn new(n: usize) -> Self {
        RankTracker {
            fenwick: Fenwick::new(n),
            inserted: 0,
        }
    }

    pub fn reset(&mut self, n: usize) {
        self.fenwick.clear(n);
        self.inserted = 0;
    }

    /// Inserts an arrival by its global rank and returns its rank among the
    /// arrivals inserted so far.
    pub fn insert(&mut self, global_rank: usize) -> usize {
        self.fenwick.add(global_rank);
        self.inserted += 1;
        self.fenwick.prefix(global_rank)
    }

    pub fn inserted(&self) -> usize {
        self.inserted
    }
}

/// Relative ranks by binary-search insertion into a sorted prefix, using
/// values only.
#[derive(Debug, Clone, Default)]
pub struct OnlineRanker {
    sorted: Vec<f64>,
}

impl OnlineRanker {
    pub fn insert(&mut self, x: f64) -> usize {
        let pos = self.sorted.partition_point(|&y| y < x);
        self.sorted.insert(pos, x);
        pos + 1
    }

    pub fn clear(&mut self) {
        self.sorted.clear();
    }
}

/// Plays `rule` on `instance` and returns the chosen 1-based round.
pub fn run_policy<S: StoppingRule + ?Sized>(instance: &TrialInstance, rule: &S) -> Result<usize> {
    let mut tracker = RankTracker::new(instance.n());
    run_policy_with(instance, rule, &mut tracker)
}

fn run_policy_with<S: StoppingRule + ?Sized>(
    instance: &TrialInstance,
    rule: &S,
    tracker: &mut RankTracker,
) -> Result<usize> {
    let n = instance.n();
    tracker.reset(n);
    for (i, &global) in instance.ranks.iter().enumerate() {
        let r = tracker.insert(global);
        if rule.should_stop(i + 1, r) {
            return Ok(i + 1);
        }
    }
    Err(Error::Contract(format!("rule did not stop by t = {n}")))
}

/// Same as [`run_policy`] but ranks values online with [`OnlineRanker`].
pub fn run_policy_online<S: StoppingRule + ?Sized>(instance: &TrialInstance, rule: &S) -> Result<usize> {
    let mut ranker = OnlineRanker::default();
    for (i, &x) in instance.values.iter().enumerate() {
        let r = ranker.insert(x);
        if rule.should_stop(i + 1, r) {
            return Ok(i + 1);
        }
    }
    Err(Error::Contract(format!("rule did not stop by t = {}", instance.n())))
}

/// Which rule a simulation plays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "algo", rename_all = "lowercase")]
pub enum AlgoSpec {
    Optimal { mode: Mode },
    Heuristic { params: HeuristicParams },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub n: usize,
    #[serde(flatten)]
    pub algo: AlgoSpec,
    pub trials: u64,
    pub successes: u64,
    pub rate: f64,
    pub stderr: f64,
    pub base_seed: u64,
}

impl SimulationReport {
    fn new(n: usize, algo: AlgoSpec, trials: u64, successes: u64, base_seed: u64) -> Self {
        let rate = successes as f64 / trials as f64;
        SimulationReport {
            n,
            algo,
            trials,
            successes,
            rate,
            stderr: (rate * (1.0 - rate) / trials as f64).sqrt(),
            base_seed,
        }
    }
}

/// A report plus the worker count that produced it. The worker count is
/// kept outside the report, which is identical for every worker count.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationRun {
    pub report: SimulationReport,
    pub workers_used: usize,
}

fn resolve_workers(workers: usize) -> usize {
    if workers > 0 {
        workers
    } else {
        thread::available_parallelism().map_or(1, NonZeroUsize::get)
    }
}

/// Successes of `rule` over trials `0..trials`. `workers = 0` uses every
/// available core.
pub fn count_successes<S: StoppingRule + Sync + ?Sized>(
    n: usize,
    rule: &S,
    trials: u64,
    base_seed: u64,
    workers: usize,
) -> Result<(u64, usize)> {
    if n < 1 {
        return Err(Error::range("n", n, 1, usize::MAX));
    }
    let workers = resolve_workers(workers).min(trials.max(1) as usize);
    let chunk = trials.div_ceil(workers as u64);
    let results: Vec<Result<u64>> = thread::scope(|scope| {
        let handles: Vec<_> = (0..workers as u64)
            .map(|k| {
                let start = (k * chunk).min(trials);
                let end = ((k + 1) * chunk).min(trials);
                scope.spawn(move || {
                    let mut tracker = RankTracker::new(n);
                    let mut wins = 0u64;
                    for i in start..end {
                        let mut rng = trial_rng(base_seed, i);
                        let instance = generate_instance(n, &mut rng);
                        if run_policy_with(&instance, rule, &mut tracker)? == instance.best_index {
                            wins += 1;
                        }
                    }
                    Ok(wins)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("simulation worker panicked"))
            .collect()
    });
    let mut total = 0;
    for r in results {
        total += r?;
    }
    Ok((total, workers))
}

/// Builds the rule named by `algo` and estimates its success probability.
pub fn simulate(n: usize, algo: &AlgoSpec, trials: u64, base_seed: u64, workers: usize) -> Result<SimulationRun> {
    if trials < 1 {
        return Err(Error::Precondition("trials must be at least 1".into()));
    }
    let (successes, workers_used) = match algo {
        AlgoSpec::Optimal { mode } => {
            let table = backward_induction(n, *mode)?;
            count_successes(n, &table, trials, base_seed, workers)?
        }
        AlgoSpec::Heuristic { params } => {
            if params.n != n {
                return Err(Error::Precondition(format!(
                    "heuristic parameters are for n = {}, simulation has n = {n}",
                    params.n
                )));
            }
            count_successes(n, params, trials, base_seed, workers)?
        }
    };
    Ok(SimulationRun {
        report: SimulationReport::new(n, *algo, trials, successes, base_seed),
        workers_used,
    })
}
