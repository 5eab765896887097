//! Batch gradient-descent training loop.
//!
//! Each epoch reshuffles the example order with the run's generator, walks
//! the permutation in contiguous batches of `nb` examples (the final short
//! batch is used as-is), and applies `W_i -= lambda dW_i`,
//! `b_i -= lambda db_i` after every batch. Two pinned streams derive from
//! the config seed: the raw seed drives weight initialization and
//! `derive_seed(seed, 1)` drives the per-epoch shuffles.

use std::io::Write;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::metrics;
use crate::network::{backward, cost, forward, init_model, HyperParams, Model};
use crate::rng::{derive_seed, Rng};

/// Stream index for the shuffle generator, see module docs.
const SHUFFLE_STREAM: u64 = 1;

/// Everything a single training run needs besides the data.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub hp: HyperParams,
    pub seed: u64,
    /// Epoch stride for history sampling.
    pub record_every: usize,
}

impl TrainConfig {
    pub fn new(hp: HyperParams, seed: u64) -> Self {
        TrainConfig {
            hp,
            seed,
            record_every: 100,
        }
    }

    pub fn with_record_every(mut self, record_every: usize) -> Result<Self> {
        if record_every == 0 {
            return Err(Error::argument("record stride must be at least 1"));
        }
        self.record_every = record_every;
        Ok(self)
    }
}

/// One sampled point of a training run.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryEntry {
    pub epoch: usize,
    pub cost: f64,
    pub train_accuracy: f64,
    pub test_accuracy: Option<f64>,
}

/// Cost/accuracy samples over a run: entry 0 is the freshly initialized
/// model, later entries land every `record_every` epochs and at the final
/// epoch.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainHistory {
    entries: Vec<HistoryEntry>,
}

impl TrainHistory {
    pub fn entries(&self) -> &[HistoryEntry] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub const CSV_HEADER: &'static str = "epoch,cost,train_acc,test_acc";

    /// CSV form backing the accuracy-vs-epoch plots; `test_acc` is empty
    /// when no evaluation set was supplied.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        for e in &self.entries {
            match e.test_accuracy {
                Some(t) => writeln!(w, "{},{},{},{}", e.epoch, e.cost, e.train_accuracy, t)?,
                None => writeln!(w, "{},{},{},", e.epoch, e.cost, e.train_accuracy)?,
            }
        }
        Ok(())
    }
}

/// Train a model on `d_train`, recording history; `d_eval` adds test
/// accuracy to every history entry. Deterministic given the config and
/// datasets. Fails with [`Error::Divergence`] when the cost leaves the
/// finite range, which usually means the learning rate is too large.
pub fn train(
    d_train: &Dataset,
    cfg: &TrainConfig,
    d_eval: Option<&Dataset>,
) -> Result<(Model, TrainHistory)> {
    let n = d_train.n_examples();
    let mut nb = cfg.hp.batch_size();
    if nb > n {
        eprintln!("warning: batch size {nb} exceeds the {n} training examples, clamping to {n}");
        nb = n;
    }
    let alpha = cfg.hp.reg_alpha();
    let lr = cfg.hp.learning_rate();
    let epochs = cfg.hp.epochs();

    let mut model = init_model(&cfg.hp, d_train.n_features(), cfg.seed)?;
    let mut history = TrainHistory::default();
    if epochs == 0 {
        return Ok((model, history));
    }

    record_entry(&mut history, 0, &model, d_train, d_eval, alpha)?;

    let mut shuffle_rng = Rng::new(derive_seed(cfg.seed, SHUFFLE_STREAM));
    let mut last_finite_cost = history.entries[0].cost;

    for epoch in 1..=epochs {
        let perm = shuffle_rng.permutation(n);
        for chunk in perm.chunks(nb) {
            // The penalty is alpha/(2N) over the squared parameter norm with
            // N the training-set size, so its per-batch share scales with the
            // batch's fraction of the set. Without this a short remainder
            // batch would apply the full penalty at 1/nb_batch strength and
            // erase the weights over a long run.
            let batch_alpha = alpha * chunk.len() as f64 / n as f64;
            let x_batch = d_train.x().select_cols(chunk)?;
            let y_batch = d_train.y().select_cols(chunk)?;
            let trace = forward(&model, &x_batch)?;
            let batch_cost = cost(trace.output(), &y_batch, &model, batch_alpha)?;
            if !batch_cost.is_finite() {
                return Err(Error::Divergence {
                    epoch,
                    last_cost: last_finite_cost,
                });
            }
            last_finite_cost = batch_cost;
            let grads = backward(&model, &trace, &y_batch, batch_alpha)?;
            apply_update(&mut model, &grads.dw, &grads.db, lr)?;
            if !model.params_finite() {
                return Err(Error::Divergence {
                    epoch,
                    last_cost: last_finite_cost,
                });
            }
        }
        if epoch % cfg.record_every == 0 || epoch == epochs {
            record_entry(&mut history, epoch, &model, d_train, d_eval, alpha)?;
        }
    }
    Ok((model, history))
}

fn apply_update(model: &mut Model, dw: &[Matrix], db: &[Matrix], lr: f64) -> Result<()> {
    let (weights, biases) = model.weights_mut();
    for (w, g) in weights.iter_mut().zip(dw) {
        *w = w.sub(&g.scale(lr))?;
    }
    for (b, g) in biases.iter_mut().zip(db) {
        *b = b.sub(&g.scale(lr))?;
    }
    Ok(())
}

fn record_entry(
    history: &mut TrainHistory,
    epoch: usize,
    model: &Model,
    d_train: &Dataset,
    d_eval: Option<&Dataset>,
    alpha: f64,
) -> Result<()> {
    let trace = forward(model, d_train.x())?;
    let j = cost(trace.output(), d_train.y(), model, alpha)?;
    if !j.is_finite() {
        return Err(Error::Divergence {
            epoch,
            last_cost: history
                .entries
                .last()
                .map(|e| e.cost)
                .unwrap_or(f64::NAN),
        });
    }
    let train_accuracy = accuracy_of(&threshold(trace.output()), d_train.y())?;
    let test_accuracy = match d_eval {
        Some(d) => Some(accuracy_of(&predict(model, d.x())?, d.y())?),
        None => None,
    };
    history.entries.push(HistoryEntry {
        epoch,
        cost: j,
        train_accuracy,
        test_accuracy,
    });
    Ok(())
}

fn accuracy_of(predicted: &Matrix, actual: &Matrix) -> Result<f64> {
    metrics::accuracy(&metrics::confusion(predicted, actual)?)
}

fn threshold(a_l: &Matrix) -> Matrix {
    a_l.map(|v| if v >= 0.5 { 1.0 } else { 0.0 })
}

/// Hard 0/1 predictions: class 1 whenever the network output reaches 0.5.
pub fn predict(model: &Model, x: &Matrix) -> Result<Matrix> {
    let trace = forward(model, x)?;
    Ok(threshold(trace.output()))
}
