//! Empirical hyperparameter search: enumerate or sample configurations from
//! a bounded grid, train and score each one, and rank the results.
//!
//! Enumeration order is pinned so configuration indices are meaningful: the
//! layer count L rises first, then hidden-width tuples in lexicographic
//! order over the candidate list (rightmost position varies fastest), then
//! the learning rate, then the regularization strength (fastest). Random
//! sampling draws distinct positions of that same order uniformly, so a
//! budget plus a seed fully determines the sample.

use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::dataset::{split, Dataset};
use crate::error::{Error, Result};
use crate::network::{Activation, HyperParams};
use crate::rng::Rng;
use crate::trainer::{train, TrainConfig};
use crate::validation::{cross_validate, evaluate};

/// Placeholder batch size meaning "the whole training set"; resolved to the
/// actual training-set size before any training run.
pub const FULL_BATCH: usize = usize::MAX;

/// How the batch size is assigned during search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatchRule {
    /// `nb = N`: one batch spanning the whole training set.
    FullTrainingSet,
    Fixed(usize),
}

/// Candidate widths for the hidden layers of a configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum HiddenCandidates {
    /// One candidate list shared by every hidden position.
    Shared(Vec<usize>),
    /// A separate candidate list per hidden position; pins the layer count
    /// to one more than the number of lists.
    PerPosition(Vec<Vec<usize>>),
}

/// The bounded configuration grid the search walks.
///
/// Activations are not part of the grid: hidden layers take ReLU and the
/// output layer sigmoid, matching the best-found configuration's pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    pub l_min: usize,
    pub l_max: usize,
    /// Candidate widths for the hidden positions.
    pub hidden_sizes: HiddenCandidates,
    /// Restrict hidden widths to non-increasing tuples. Shrinks the
    /// otherwise infeasible exhaustive walk to a tractable subset that
    /// still contains the shipped preset.
    pub monotone_only: bool,
    pub lambdas: Vec<f64>,
    pub alphas: Vec<f64>,
    pub batch_rule: BatchRule,
    pub epochs: usize,
    /// Refuse exhaustive enumeration beyond this many configurations.
    pub exhaustive_cap: u128,
}

impl Default for SearchSpace {
    fn default() -> Self {
        SearchSpace {
            l_min: 2,
            l_max: 10,
            hidden_sizes: HiddenCandidates::Shared((1..=13).collect()),
            monotone_only: false,
            lambdas: vec![0.001, 0.01, 0.1],
            alphas: vec![0.0, 0.7, 1.0],
            batch_rule: BatchRule::FullTrainingSet,
            epochs: 6000,
            exhaustive_cap: 100_000,
        }
    }
}

/// How configurations are drawn from the space.
#[derive(Debug, Clone, PartialEq)]
pub enum Strategy {
    Exhaustive,
    Random { budget: usize, seed: u64 },
}

/// Scoring protocol for each configuration. The split or partition comes
/// from the protocol seed and is shared by every configuration so scores
/// stay comparable; training seeds are shared the same way.
#[derive(Debug, Clone, PartialEq)]
pub enum EvalProtocol {
    Holdout { train_fraction: f64, seed: u64 },
    KFold { k: usize, seed: u64 },
}

/// Outcome of scoring one configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum TuneStatus {
    Completed { accuracy: f64, mcc: f64 },
    Diverged,
}

/// One scored configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct TunerRecord {
    pub config_index: usize,
    pub hp: HyperParams,
    pub status: TuneStatus,
}

impl TunerRecord {
    pub fn accuracy(&self) -> Option<f64> {
        match self.status {
            TuneStatus::Completed { accuracy, .. } => Some(accuracy),
            TuneStatus::Diverged => None,
        }
    }

    pub fn mcc(&self) -> Option<f64> {
        match self.status {
            TuneStatus::Completed { mcc, .. } => Some(mcc),
            TuneStatus::Diverged => None,
        }
    }

    pub fn is_completed(&self) -> bool {
        matches!(self.status, TuneStatus::Completed { .. })
    }
}

/// The best configuration found by the original search:
/// five layers sized (9, 7, 5, 3, 1), ReLU hidden layers with a sigmoid
/// output, learning rate 0.01, regularization 0.7, batch size 200, and
/// 6000 epochs.
pub fn hearo5_preset() -> HyperParams {
    HyperParams::new(
        vec![9, 7, 5, 3, 1],
        vec![
            Activation::Relu,
            Activation::Relu,
            Activation::Relu,
            Activation::Relu,
            Activation::Sigmoid,
        ],
        0.01,
        0.7,
        200,
        6000,
    )
    .expect("preset is valid by construction")
}

/// Named presets for the CLI: `hearo5` is the best-found configuration;
/// `hearo2` and `hearo7` are the shallower/deeper comparison networks, with
/// hidden widths reconstructed by the non-increasing-width rule since only
/// their depths are on record.
pub fn preset(name: &str) -> Result<HyperParams> {
    let relu_stack = |sizes: Vec<usize>| {
        let mut acts = vec![Activation::Relu; sizes.len() - 1];
        acts.push(Activation::Sigmoid);
        HyperParams::new(sizes, acts, 0.01, 0.7, 200, 6000)
    };
    match name {
        "hearo5" => Ok(hearo5_preset()),
        "hearo2" => relu_stack(vec![9, 1]),
        "hearo7" => relu_stack(vec![9, 8, 7, 5, 3, 2, 1]),
        other => Err(Error::argument(format!(
            "unknown preset {other:?}, expected hearo2, hearo5 or hearo7"
        ))),
    }
}

fn binomial(n: u128, r: u128) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

impl SearchSpace {
    fn validate(&self) -> Result<()> {
        if self.l_min == 0 || self.l_min > self.l_max {
            return Err(Error::argument(format!(
                "layer range {}..={} is invalid",
                self.l_min, self.l_max
            )));
        }
        let check_list = |list: &[usize]| -> Result<()> {
            if list.is_empty() {
                return Err(Error::argument("no hidden-width candidates"));
            }
            if list.iter().any(|&v| v == 0) {
                return Err(Error::argument("hidden widths must be positive"));
            }
            let mut sorted = list.to_vec();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != list.len() {
                return Err(Error::argument("hidden-width candidates must be distinct"));
            }
            Ok(())
        };
        match &self.hidden_sizes {
            HiddenCandidates::Shared(list) => {
                if self.l_max > 1 {
                    check_list(list)?;
                }
            }
            HiddenCandidates::PerPosition(lists) => {
                if self.l_min != self.l_max || self.l_max != lists.len() + 1 {
                    return Err(Error::argument(format!(
                        "per-position candidates fix the layer count to {}, \
                         but the range is {}..={}",
                        lists.len() + 1,
                        self.l_min,
                        self.l_max
                    )));
                }
                if self.monotone_only {
                    return Err(Error::argument(
                        "the monotone filter applies only to a shared candidate list",
                    ));
                }
                for list in lists {
                    check_list(list)?;
                }
            }
        }
        if self.lambdas.is_empty() || self.alphas.is_empty() {
            return Err(Error::argument("lambda and alpha lists must be non-empty"));
        }
        if let BatchRule::Fixed(0) = self.batch_rule {
            return Err(Error::argument("fixed batch size must be positive"));
        }
        Ok(())
    }

    /// Hidden-width tuple count for one layer count.
    fn tuples_for(&self, l: usize) -> u128 {
        let k = (l - 1) as u128;
        if k == 0 {
            return 1;
        }
        match &self.hidden_sizes {
            HiddenCandidates::Shared(list) => {
                let m = list.len() as u128;
                if self.monotone_only {
                    binomial(m + k - 1, k)
                } else {
                    m.pow(k as u32)
                }
            }
            HiddenCandidates::PerPosition(lists) => {
                lists.iter().map(|l| l.len() as u128).product()
            }
        }
    }

    /// Total number of configurations in the space.
    pub fn count(&self) -> Result<u128> {
        self.validate()?;
        let per_tuple = (self.lambdas.len() * self.alphas.len()) as u128;
        let mut total: u128 = 0;
        for l in self.l_min..=self.l_max {
            total = total
                .checked_add(self.tuples_for(l).checked_mul(per_tuple).ok_or_else(|| {
                    Error::argument("search space size overflows")
                })?)
                .ok_or_else(|| Error::argument("search space size overflows"))?;
        }
        Ok(total)
    }

    /// The configuration at `index` of the pinned enumeration order.
    fn unrank(&self, index: u128) -> HyperParams {
        let per_tuple = (self.lambdas.len() * self.alphas.len()) as u128;
        let mut idx = index;
        let mut l = self.l_min;
        loop {
            let block = self.tuples_for(l) * per_tuple;
            if idx < block {
                break;
            }
            idx -= block;
            l += 1;
        }
        let tuple_idx = idx / per_tuple;
        let rest = (idx % per_tuple) as usize;
        let lambda_idx = rest / self.alphas.len();
        let alpha_idx = rest % self.alphas.len();

        let hidden = self.unrank_tuple(l - 1, tuple_idx);
        let mut sizes = hidden;
        sizes.push(1);
        let mut acts = vec![Activation::Relu; l - 1];
        acts.push(Activation::Sigmoid);
        let nb = match self.batch_rule {
            BatchRule::FullTrainingSet => FULL_BATCH,
            BatchRule::Fixed(v) => v,
        };
        HyperParams::new(
            sizes,
            acts,
            self.lambdas[lambda_idx],
            self.alphas[alpha_idx],
            nb,
            self.epochs,
        )
        .expect("space bounds were validated")
    }

    /// Hidden-width tuple at `tuple_idx` for `k` hidden positions, in the
    /// same candidate-list order the counting uses.
    fn unrank_tuple(&self, k: usize, tuple_idx: u128) -> Vec<usize> {
        let mut out = Vec::with_capacity(k);
        if k == 0 {
            return out;
        }
        let mut idx = tuple_idx;
        match &self.hidden_sizes {
            HiddenCandidates::Shared(list) if self.monotone_only => {
                // Candidates sorted ascending; each position may use values
                // up to the previous choice, giving multiset-style blocks.
                // With `cand + 1` values allowed and `remaining` positions
                // left there are C(cand + remaining, remaining) completions.
                let mut sorted = list.clone();
                sorted.sort_unstable();
                let mut limit = sorted.len(); // candidates still allowed
                for pos in 0..k {
                    let remaining = (k - pos - 1) as u128;
                    let mut chosen = 0usize;
                    for cand in 0..limit {
                        let completions = binomial(cand as u128 + remaining, remaining);
                        if idx < completions {
                            chosen = cand;
                            break;
                        }
                        idx -= completions;
                    }
                    out.push(sorted[chosen]);
                    limit = chosen + 1;
                }
            }
            HiddenCandidates::Shared(list) => {
                // Plain mixed-radix digits, leftmost most significant.
                let m = list.len() as u128;
                let mut divisor = m.pow((k - 1) as u32);
                for _ in 0..k {
                    let digit = (idx / divisor) as usize;
                    out.push(list[digit]);
                    idx %= divisor;
                    divisor = (divisor / m).max(1);
                }
            }
            HiddenCandidates::PerPosition(lists) => {
                for (i, list) in lists.iter().enumerate() {
                    let divisor: u128 = lists[i + 1..].iter().map(|l| l.len() as u128).product();
                    let digit = (idx / divisor) as usize;
                    out.push(list[digit]);
                    idx %= divisor;
                }
            }
        }
        out
    }
}

/// Materialize the configurations a strategy selects, in emission order;
/// a record's `config_index` is its position in this sequence.
pub fn enumerate(space: &SearchSpace, strategy: &Strategy) -> Result<Vec<HyperParams>> {
    let total = space.count()?;
    if total == 0 {
        return Err(Error::argument("search space is empty"));
    }
    match strategy {
        Strategy::Exhaustive => {
            if total > space.exhaustive_cap {
                return Err(Error::argument(format!(
                    "exhaustive enumeration refused: the space holds {total} configurations, \
                     above the cap of {}; use random sampling or the monotone filter",
                    space.exhaustive_cap
                )));
            }
            Ok((0..total).map(|i| space.unrank(i)).collect())
        }
        Strategy::Random { budget, seed } => {
            if *budget == 0 {
                return Err(Error::argument("random strategy needs a budget of at least 1"));
            }
            if *budget as u128 > total {
                return Err(Error::argument(format!(
                    "budget {budget} exceeds the {total} configurations in the space"
                )));
            }
            if total > u64::MAX as u128 {
                return Err(Error::argument(
                    "search space too large to sample uniformly; restrict it first",
                ));
            }
            let mut rng = Rng::new(*seed);
            let indices: Vec<u128> = if total <= 1_000_000 {
                // Partial Fisher-Yates over the whole index range.
                let mut all: Vec<u128> = (0..total).collect();
                for i in 0..*budget {
                    let j = i + rng.next_below((total - i as u128) as u64) as usize;
                    all.swap(i, j);
                }
                all.truncate(*budget);
                all
            } else {
                // Rejection sampling; the budget is tiny next to the space.
                let mut seen = std::collections::HashSet::new();
                let mut picks = Vec::with_capacity(*budget);
                while picks.len() < *budget {
                    let candidate = rng.next_below(total as u64) as u128;
                    if seen.insert(candidate) {
                        picks.push(candidate);
                    }
                }
                picks
            };
            Ok(indices.into_iter().map(|i| space.unrank(i)).collect())
        }
    }
}

/// Train and score every selected configuration, then rank: completed
/// records sort by accuracy (descending), MCC (descending), configuration
/// index (ascending); diverged records rank below all completed ones.
/// `jobs` bounds how many configurations train concurrently; the output is
/// identical for any job count.
pub fn tune(
    d: &Dataset,
    space: &SearchSpace,
    strategy: &Strategy,
    protocol: &EvalProtocol,
    jobs: usize,
) -> Result<Vec<TunerRecord>> {
    if jobs == 0 {
        return Err(Error::argument("job count must be at least 1"));
    }
    let configs = enumerate(space, strategy)?;
    if configs.is_empty() {
        return Err(Error::argument("no configurations to evaluate"));
    }

    // Resolve the full-batch placeholder against the protocol's training
    // set size so the trainer never needs to clamp.
    let n = d.n_examples();
    let resolved_n = match protocol {
        EvalProtocol::Holdout { train_fraction, .. } => {
            let t = (train_fraction * n as f64).round() as usize;
            t.clamp(1, n.saturating_sub(1).max(1))
        }
        EvalProtocol::KFold { k, .. } => {
            if *k < 2 || *k > n {
                return Err(Error::argument(format!(
                    "fold count must satisfy 2 <= k <= n, got k={k}, n={n}"
                )));
            }
            n - n.div_ceil(*k)
        }
    };
    let configs: Vec<HyperParams> = configs
        .into_iter()
        .map(|hp| {
            if hp.batch_size() == FULL_BATCH {
                hp.with_batch_size(resolved_n.max(1))
            } else {
                Ok(hp)
            }
        })
        .collect::<Result<_>>()?;

    // Shared data division for every configuration.
    let holdout_parts = match protocol {
        EvalProtocol::Holdout {
            train_fraction,
            seed,
        } => {
            let spec = split(d, *train_fraction, *seed)?;
            Some((d.subset(&spec.train_indices)?, d.subset(&spec.test_indices)?))
        }
        EvalProtocol::KFold { .. } => None,
    };

    let score_one = |config_index: usize, hp: &HyperParams| -> Result<TunerRecord> {
        let outcome = match protocol {
            EvalProtocol::Holdout { seed, .. } => {
                let (d_train, d_test) = holdout_parts.as_ref().expect("precomputed split");
                let cfg = TrainConfig::new(hp.clone(), *seed);
                match train(d_train, &cfg, None) {
                    Ok((model, _)) => {
                        let report = evaluate(&model, d_test)?;
                        TuneStatus::Completed {
                            accuracy: report.accuracy,
                            mcc: report.mcc,
                        }
                    }
                    Err(Error::Divergence { .. }) => TuneStatus::Diverged,
                    Err(other) => return Err(other),
                }
            }
            EvalProtocol::KFold { k, seed } => {
                let cfg = TrainConfig::new(hp.clone(), *seed);
                match cross_validate(d, &cfg, *k, *seed) {
                    Ok(cv) => TuneStatus::Completed {
                        accuracy: cv.mean_accuracy,
                        mcc: cv.mean_mcc,
                    },
                    Err(Error::Fold { source, .. })
                        if matches!(*source, Error::Divergence { .. }) =>
                    {
                        TuneStatus::Diverged
                    }
                    Err(Error::Divergence { .. }) => TuneStatus::Diverged,
                    Err(other) => return Err(other),
                }
            }
        };
        Ok(TunerRecord {
            config_index,
            hp: hp.clone(),
            status: outcome,
        })
    };

    let mut records: Vec<TunerRecord> = if jobs == 1 {
        configs
            .iter()
            .enumerate()
            .map(|(i, hp)| score_one(i, hp))
            .collect::<Result<_>>()?
    } else {
        let next = AtomicUsize::new(0);
        let slots: Mutex<Vec<Option<Result<TunerRecord>>>> =
            Mutex::new((0..configs.len()).map(|_| None).collect());
        std::thread::scope(|scope| {
            for _ in 0..jobs.min(configs.len()) {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    if i >= configs.len() {
                        break;
                    }
                    let result = score_one(i, &configs[i]);
                    slots.lock().expect("result mutex")[i] = Some(result);
                });
            }
        });
        let collected = slots.into_inner().expect("result mutex");
        let mut out = Vec::with_capacity(configs.len());
        for slot in collected {
            out.push(slot.expect("every slot filled")?);
        }
        out
    };

    records.sort_by(|a, b| match (&a.status, &b.status) {
        (
            TuneStatus::Completed {
                accuracy: aa,
                mcc: am,
            },
            TuneStatus::Completed {
                accuracy: ba,
                mcc: bm,
            },
        ) => ba
            .total_cmp(aa)
            .then(bm.total_cmp(am))
            .then(a.config_index.cmp(&b.config_index)),
        (TuneStatus::Completed { .. }, TuneStatus::Diverged) => std::cmp::Ordering::Less,
        (TuneStatus::Diverged, TuneStatus::Completed { .. }) => std::cmp::Ordering::Greater,
        (TuneStatus::Diverged, TuneStatus::Diverged) => a.config_index.cmp(&b.config_index),
    });
    Ok(records)
}

/// CSV form: one row per record in rank order.
pub fn write_tuner_csv<W: Write>(records: &[TunerRecord], w: &mut W) -> Result<()> {
    writeln!(w, "rank,config_index,hyperparams,accuracy,mcc,status")?;
    for (rank, r) in records.iter().enumerate() {
        match &r.status {
            TuneStatus::Completed { accuracy, mcc } => writeln!(
                w,
                "{},{},{},{},{},completed",
                rank + 1,
                r.config_index,
                r.hp.to_flat_string(),
                accuracy,
                mcc
            )?,
            TuneStatus::Diverged => writeln!(
                w,
                "{},{},{},,,diverged",
                rank + 1,
                r.config_index,
                r.hp.to_flat_string()
            )?,
        }
    }
    Ok(())
}

/// Human-readable table of the best records.
pub fn render_top_table(records: &[TunerRecord], limit: usize) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:>4}  {:>6}  {:>9}  {:>9}  {}\n",
        "rank", "config", "accuracy", "mcc", "hyperparams"
    ));
    for (rank, r) in records.iter().take(limit).enumerate() {
        let (acc, mcc) = match &r.status {
            TuneStatus::Completed { accuracy, mcc } => {
                (format!("{accuracy:.4}"), format!("{mcc:.4}"))
            }
            TuneStatus::Diverged => ("diverged".to_string(), "-".to_string()),
        };
        out.push_str(&format!(
            "{:>4}  {:>6}  {:>9}  {:>9}  [{}]\n",
            rank + 1,
            r.config_index,
            acc,
            mcc,
            r.hp.to_flat_string()
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    fn tiny_space() -> SearchSpace {
        SearchSpace {
            l_min: 2,
            l_max: 2,
            hidden_sizes: HiddenCandidates::Shared(vec![2, 3]),
            monotone_only: false,
            lambdas: vec![0.05],
            alphas: vec![0.0],
            batch_rule: BatchRule::FullTrainingSet,
            epochs: 5,
            exhaustive_cap: 100_000,
        }
    }

    fn toy_dataset() -> Dataset {
        let n = 24;
        let x = Matrix::from_fn(2, n, |i, j| {
            let side = if j < n / 2 { -1.0 } else { 1.0 };
            if i == 0 {
                side + 0.01 * (j % 4) as f64
            } else {
                0.1 * (j % 3) as f64
            }
        });
        let y = Matrix::from_fn(1, n, |_, j| f64::from(j >= n / 2));
        Dataset::from_parts(x, y, vec!["a".into(), "b".into()]).unwrap()
    }

    #[test]
    fn default_space_matches_published_grid() {
        let s = SearchSpace::default();
        assert_eq!((s.l_min, s.l_max), (2, 10));
        assert_eq!(
            s.hidden_sizes,
            HiddenCandidates::Shared((1..=13).collect::<Vec<_>>())
        );
        assert_eq!(s.lambdas, vec![0.001, 0.01, 0.1]);
        assert_eq!(s.alphas, vec![0.0, 0.7, 1.0]);
        assert_eq!(s.batch_rule, BatchRule::FullTrainingSet);
        assert_eq!(s.epochs, 6000);
    }

    #[test]
    fn two_layer_count_is_117() {
        let mut s = SearchSpace::default();
        s.l_min = 2;
        s.l_max = 2;
        assert_eq!(s.count().unwrap(), 117);
        let configs = enumerate(&s, &Strategy::Exhaustive).unwrap();
        assert_eq!(configs.len(), 117);
    }

    #[test]
    fn exhaustive_order_is_lexicographic() {
        let configs = enumerate(&tiny_space(), &Strategy::Exhaustive).unwrap();
        let sizes: Vec<Vec<usize>> = configs.iter().map(|c| c.layer_sizes().to_vec()).collect();
        assert_eq!(sizes, vec![vec![2, 1], vec![3, 1]]);

        let mut two_lambdas = tiny_space();
        two_lambdas.lambdas = vec![0.001, 0.1];
        two_lambdas.alphas = vec![0.0, 0.7];
        let configs = enumerate(&two_lambdas, &Strategy::Exhaustive).unwrap();
        // Alpha varies fastest, then lambda, then widths.
        let key: Vec<(usize, f64, f64)> = configs
            .iter()
            .map(|c| (c.layer_sizes()[0], c.learning_rate(), c.reg_alpha()))
            .collect();
        assert_eq!(
            key,
            vec![
                (2, 0.001, 0.0),
                (2, 0.001, 0.7),
                (2, 0.1, 0.0),
                (2, 0.1, 0.7),
                (3, 0.001, 0.0),
                (3, 0.001, 0.7),
                (3, 0.1, 0.0),
                (3, 0.1, 0.7),
            ]
        );
    }

    #[test]
    fn exhaustive_refuses_oversized_spaces() {
        let s = SearchSpace::default();
        assert!(s.count().unwrap() > s.exhaustive_cap);
        let err = enumerate(&s, &Strategy::Exhaustive).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("refused"), "{msg}");
        assert!(msg.contains(&s.count().unwrap().to_string()), "{msg}");
    }

    #[test]
    fn monotone_filter_counts_and_membership() {
        let mut s = SearchSpace::default();
        s.l_min = 5;
        s.l_max = 5;
        s.hidden_sizes = HiddenCandidates::Shared(vec![3, 5, 7, 9]);
        s.monotone_only = true;
        s.lambdas = vec![0.01];
        s.alphas = vec![0.7];
        // Non-increasing 4-tuples over 4 values: C(7, 4).
        assert_eq!(s.count().unwrap(), 35);
        let configs = enumerate(&s, &Strategy::Exhaustive).unwrap();
        assert_eq!(configs.len(), 35);
        for c in &configs {
            let widths = &c.layer_sizes()[..4];
            assert!(widths.windows(2).all(|w| w[0] >= w[1]), "{widths:?}");
        }
        assert!(
            configs.iter().any(|c| c.layer_sizes() == [9, 7, 5, 3, 1]),
            "preset architecture must be inside the monotone sub-space"
        );
    }

    #[test]
    fn random_sampling_is_deterministic_and_sound() {
        let mut s = SearchSpace::default();
        s.l_min = 2;
        s.l_max = 4;
        let strat = Strategy::Random { budget: 50, seed: 5 };
        let a = enumerate(&s, &strat).unwrap();
        let b = enumerate(&s, &strat).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 50);
        for hp in &a {
            assert!(hp.layers() >= 2 && hp.layers() <= 4);
            let HiddenCandidates::Shared(candidates) = &s.hidden_sizes else {
                unreachable!()
            };
            for &w in &hp.layer_sizes()[..hp.layers() - 1] {
                assert!(candidates.contains(&w));
            }
            assert_eq!(*hp.layer_sizes().last().unwrap(), 1);
            assert!(s.lambdas.contains(&hp.learning_rate()));
            assert!(s.alphas.contains(&hp.reg_alpha()));
            assert_eq!(hp.epochs(), s.epochs);
        }
        // Distinctness.
        for (i, x) in a.iter().enumerate() {
            for y in &a[i + 1..] {
                assert_ne!(x, y);
            }
        }
    }

    #[test]
    fn per_position_candidates() {
        let s = SearchSpace {
            l_min: 3,
            l_max: 3,
            hidden_sizes: HiddenCandidates::PerPosition(vec![vec![4, 8], vec![2, 3, 5]]),
            monotone_only: false,
            lambdas: vec![0.01],
            alphas: vec![0.7],
            batch_rule: BatchRule::Fixed(10),
            epochs: 5,
            exhaustive_cap: 100_000,
        };
        assert_eq!(s.count().unwrap(), 6);
        let configs = enumerate(&s, &Strategy::Exhaustive).unwrap();
        let sizes: Vec<Vec<usize>> = configs.iter().map(|c| c.layer_sizes().to_vec()).collect();
        assert_eq!(
            sizes,
            vec![
                vec![4, 2, 1],
                vec![4, 3, 1],
                vec![4, 5, 1],
                vec![8, 2, 1],
                vec![8, 3, 1],
                vec![8, 5, 1],
            ]
        );

        // The layer range must agree with the list count.
        let mut bad = s.clone();
        bad.l_max = 4;
        assert!(bad.count().is_err());
        let mut bad = s;
        bad.monotone_only = true;
        assert!(bad.count().is_err());
    }

    #[test]
    fn random_budget_validation() {
        let s = tiny_space();
        assert!(enumerate(&s, &Strategy::Random { budget: 0, seed: 1 }).is_err());
        assert!(enumerate(&s, &Strategy::Random { budget: 3, seed: 1 }).is_err());
        let all = enumerate(&s, &Strategy::Random { budget: 2, seed: 1 }).unwrap();
        assert_eq!(all.len(), 2);
    }

    #[test]
    fn tune_ranks_by_key() {
        let d = toy_dataset();
        let mut s = tiny_space();
        s.epochs = 40;
        s.lambdas = vec![0.005, 0.5];
        let records = tune(
            &d,
            &s,
            &Strategy::Exhaustive,
            &EvalProtocol::Holdout {
                train_fraction: 0.5,
                seed: 3,
            },
            1,
        )
        .unwrap();
        assert_eq!(records.len(), 4);
        // Re-sort oracle over the emitted scores.
        for pair in records.windows(2) {
            match (&pair[0].status, &pair[1].status) {
                (
                    TuneStatus::Completed { accuracy: a1, mcc: m1 },
                    TuneStatus::Completed { accuracy: a2, mcc: m2 },
                ) => {
                    assert!(
                        a1 > a2
                            || (a1 == a2 && m1 > m2)
                            || (a1 == a2 && m1 == m2 && pair[0].config_index < pair[1].config_index)
                    );
                }
                (TuneStatus::Diverged, TuneStatus::Completed { .. }) => {
                    panic!("diverged record ranked above a completed one")
                }
                _ => {}
            }
        }
    }

    #[test]
    fn tune_single_config_space() {
        let d = toy_dataset();
        let mut s = tiny_space();
        s.hidden_sizes = HiddenCandidates::Shared(vec![3]);
        s.epochs = 10;
        let records = tune(
            &d,
            &s,
            &Strategy::Exhaustive,
            &EvalProtocol::KFold { k: 3, seed: 2 },
            1,
        )
        .unwrap();
        assert_eq!(records.len(), 1);
        assert!(records[0].is_completed());
    }

    #[test]
    fn diverged_configs_rank_last() {
        let d = toy_dataset();
        let mut s = tiny_space();
        s.epochs = 60;
        s.lambdas = vec![0.01, 1e155];
        let records = tune(
            &d,
            &s,
            &Strategy::Exhaustive,
            &EvalProtocol::Holdout {
                train_fraction: 0.5,
                seed: 1,
            },
            1,
        )
        .unwrap();
        let first_diverged = records.iter().position(|r| !r.is_completed());
        if let Some(pos) = first_diverged {
            assert!(records[pos..].iter().all(|r| !r.is_completed()));
            assert!(records[..pos].iter().all(TunerRecord::is_completed));
        }
        assert!(
            records.iter().any(|r| !r.is_completed()),
            "a 1e155 learning rate should diverge"
        );
    }

    #[test]
    fn tune_schedule_invariant() {
        let d = toy_dataset();
        let mut s = tiny_space();
        s.epochs = 30;
        s.lambdas = vec![0.005, 0.05];
        let protocol = EvalProtocol::Holdout {
            train_fraction: 0.5,
            seed: 8,
        };
        let sequential = tune(&d, &s, &Strategy::Exhaustive, &protocol, 1).unwrap();
        let parallel = tune(&d, &s, &Strategy::Exhaustive, &protocol, 4).unwrap();
        assert_eq!(sequential, parallel);
    }

    #[test]
    fn preset_values() {
        let hp = hearo5_preset();
        assert_eq!(hp.layer_sizes(), &[9, 7, 5, 3, 1]);
        assert_eq!(
            hp.activations().iter().map(|a| a.code()).collect::<Vec<_>>(),
            vec![1, 1, 1, 1, 2]
        );
        assert_eq!(hp.learning_rate(), 0.01);
        assert_eq!(hp.reg_alpha(), 0.7);
        assert_eq!(hp.batch_size(), 200);
        assert_eq!(hp.epochs(), 6000);

        assert!(preset("hearo2").unwrap().layers() == 2);
        assert!(preset("hearo7").unwrap().layers() == 7);
        assert!(preset("nope").is_err());
    }

    #[test]
    fn full_batch_placeholder_resolved_before_training() {
        let d = toy_dataset();
        let mut s = tiny_space();
        s.epochs = 5;
        let records = tune(
            &d,
            &s,
            &Strategy::Exhaustive,
            &EvalProtocol::Holdout {
                train_fraction: 0.5,
                seed: 4,
            },
            1,
        )
        .unwrap();
        for r in &records {
            assert_eq!(r.hp.batch_size(), 12);
        }
    }

    #[test]
    fn tuner_csv_shape() {
        let d = toy_dataset();
        let mut s = tiny_space();
        s.epochs = 5;
        let records = tune(
            &d,
            &s,
            &Strategy::Exhaustive,
            &EvalProtocol::Holdout {
                train_fraction: 0.5,
                seed: 4,
            },
            1,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_tuner_csv(&records, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), records.len() + 1);
        let table = render_top_table(&records, 10);
        assert!(table.contains("rank"));
    }
}
