//! K-fold cross-validation driver and hold-out evaluation.

use std::io::Write;

use crate::dataset::{k_fold_partition, split, Dataset};
use crate::error::{Error, Result};
use crate::metrics::{confusion, EvalReport};
use crate::network::Model;
use crate::trainer::{predict, train, TrainConfig};

/// Per-fold reports plus their means; optionally a 2:1 hold-out report for
/// comparison with the cross-validated figures.
#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub fold_reports: Vec<EvalReport>,
    pub mean_accuracy: f64,
    pub mean_mcc: f64,
    pub holdout_report: Option<EvalReport>,
}

/// Score a trained model over every example of `d`.
pub fn evaluate(model: &Model, d: &Dataset) -> Result<EvalReport> {
    if d.n_examples() == 0 {
        return Err(Error::argument("cannot evaluate on an empty dataset"));
    }
    if d.n_features() != model.n_input() {
        return Err(Error::shape(
            "evaluate",
            (d.n_features(), d.n_examples()),
            (model.n_input(), d.n_examples()),
        ));
    }
    let predictions = predict(model, d.x())?;
    EvalReport::from_confusion(confusion(&predictions, d.y())?)
}

/// K-fold cross-validation: train on all-but-one fold, evaluate on the
/// held-out fold, rotating through all k folds. The partition comes from
/// `seed` and fold f trains with seed `seed ^ f`, so every fold is
/// independently reproducible. Training failures propagate tagged with
/// their fold index.
pub fn cross_validate(d: &Dataset, cfg: &TrainConfig, k: usize, seed: u64) -> Result<CvResult> {
    let folds = k_fold_partition(d.n_examples(), k, seed)?;
    let mut fold_reports = Vec::with_capacity(k);
    for f in 0..k {
        let mut train_indices = Vec::with_capacity(d.n_examples() - folds[f].len());
        for (g, fold) in folds.iter().enumerate() {
            if g != f {
                train_indices.extend_from_slice(fold);
            }
        }
        let d_train = d.subset(&train_indices)?;
        let d_test = d.subset(&folds[f])?;
        let fold_cfg = TrainConfig {
            hp: cfg.hp.clone(),
            seed: seed ^ f as u64,
            record_every: cfg.record_every,
        };
        let (model, _) = train(&d_train, &fold_cfg, None).map_err(|e| Error::in_fold(f, e))?;
        fold_reports.push(evaluate(&model, &d_test).map_err(|e| Error::in_fold(f, e))?);
    }
    let kf = k as f64;
    let mean_accuracy = fold_reports.iter().map(|r| r.accuracy).sum::<f64>() / kf;
    let mean_mcc = fold_reports.iter().map(|r| r.mcc).sum::<f64>() / kf;
    Ok(CvResult {
        fold_reports,
        mean_accuracy,
        mean_mcc,
        holdout_report: None,
    })
}

/// [`cross_validate`] plus a hold-out comparison trained on a
/// `train_fraction` split of the same data with the same seed.
pub fn cross_validate_with_holdout(
    d: &Dataset,
    cfg: &TrainConfig,
    k: usize,
    seed: u64,
    train_fraction: f64,
) -> Result<CvResult> {
    let mut result = cross_validate(d, cfg, k, seed)?;
    let spec = split(d, train_fraction, seed)?;
    let d_train = d.subset(&spec.train_indices)?;
    let d_test = d.subset(&spec.test_indices)?;
    let holdout_cfg = TrainConfig {
        hp: cfg.hp.clone(),
        seed,
        record_every: cfg.record_every,
    };
    let (model, _) = train(&d_train, &holdout_cfg, None)?;
    result.holdout_report = Some(evaluate(&model, &d_test)?);
    Ok(result)
}

impl CvResult {
    /// CSV form: one row per fold, then a `mean` summary row.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "fold,{}", EvalReport::CSV_HEADER)?;
        for (f, report) in self.fold_reports.iter().enumerate() {
            writeln!(w, "{f},{}", report.csv_row())?;
        }
        writeln!(w, "mean,,,,,{},{},,,", self.mean_accuracy, self.mean_mcc)?;
        if let Some(h) = &self.holdout_report {
            writeln!(w, "holdout,{}", h.csv_row())?;
        }
        Ok(())
    }
}
