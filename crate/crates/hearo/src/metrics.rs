//! Confusion-matrix construction and the scalar quality measures derived
//! from it: accuracy, Matthews correlation coefficient, precision, recall,
//! and F1.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Binary confusion counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, tn: u64, fp: u64, fn_: u64) -> Self {
        ConfusionMatrix { tp, tn, fp, fn_ }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }
}

/// Confusion matrix plus the derived metrics, ready for reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub cm: ConfusionMatrix,
    pub accuracy: f64,
    pub mcc: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Count the four confusion categories from 1 x n rows of 0/1 values.
pub fn confusion(predicted: &Matrix, actual: &Matrix) -> Result<ConfusionMatrix> {
    if predicted.rows() != 1 || actual.rows() != 1 || predicted.cols() != actual.cols() {
        return Err(Error::shape("confusion", predicted.shape(), actual.shape()));
    }
    let mut cm = ConfusionMatrix::new(0, 0, 0, 0);
    for j in 0..predicted.cols() {
        let p = predicted.get(0, j);
        let a = actual.get(0, j);
        if (p != 0.0 && p != 1.0) || (a != 0.0 && a != 1.0) {
            return Err(Error::argument(format!(
                "confusion requires 0/1 entries, found predicted={p}, actual={a} at column {j}"
            )));
        }
        match (p == 1.0, a == 1.0) {
            (true, true) => cm.tp += 1,
            (false, false) => cm.tn += 1,
            (true, false) => cm.fp += 1,
            (false, true) => cm.fn_ += 1,
        }
    }
    Ok(cm)
}

/// Matthews correlation coefficient. Products run in 128-bit integers before
/// the single floating square root; if any denominator factor is zero the
/// coefficient is defined as 0.
pub fn mcc(cm: &ConfusionMatrix) -> f64 {
    let (tp, tn, fp, fn_) = (cm.tp as i128, cm.tn as i128, cm.fp as i128, cm.fn_ as i128);
    let f1 = tp + fp;
    let f2 = tp + fn_;
    let f3 = tn + fp;
    let f4 = tn + fn_;
    if f1 == 0 || f2 == 0 || f3 == 0 || f4 == 0 {
        return 0.0;
    }
    let numerator = tp * tn - fp * fn_;
    let denominator = (f1 * f2 * f3 * f4) as f64;
    numerator as f64 / denominator.sqrt()
}

/// Fraction of correct predictions. Errors when the matrix is empty.
pub fn accuracy(cm: &ConfusionMatrix) -> Result<f64> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::argument("accuracy is undefined for zero examples"));
    }
    Ok((cm.tp + cm.tn) as f64 / total as f64)
}

pub fn precision(cm: &ConfusionMatrix) -> f64 {
    let denom = cm.tp + cm.fp;
    if denom == 0 {
        0.0
    } else {
        cm.tp as f64 / denom as f64
    }
}

pub fn recall(cm: &ConfusionMatrix) -> f64 {
    let denom = cm.tp + cm.fn_;
    if denom == 0 {
        0.0
    } else {
        cm.tp as f64 / denom as f64
    }
}

pub fn f1(cm: &ConfusionMatrix) -> f64 {
    let p = precision(cm);
    let r = recall(cm);
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

impl EvalReport {
    pub fn from_confusion(cm: ConfusionMatrix) -> Result<Self> {
        Ok(EvalReport {
            accuracy: accuracy(&cm)?,
            mcc: mcc(&cm),
            precision: precision(&cm),
            recall: recall(&cm),
            f1: f1(&cm),
            cm,
        })
    }

    pub const CSV_HEADER: &'static str = "tp,tn,fp,fn,accuracy,mcc,precision,recall,f1";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.cm.tp,
            self.cm.tn,
            self.cm.fp,
            self.cm.fn_,
            self.accuracy,
            self.mcc,
            self.precision,
            self.recall,
            self.f1
        )
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "confusion   TP {:>6}   FN {:>6}", self.cm.tp, self.cm.fn_)?;
        writeln!(f, "            FP {:>6}   TN {:>6}", self.cm.fp, self.cm.tn)?;
        writeln!(f, "accuracy    {:.4}", self.accuracy)?;
        writeln!(f, "mcc         {:.4}", self.mcc)?;
        writeln!(f, "precision   {:.4}", self.precision)?;
        writeln!(f, "recall      {:.4}", self.recall)?;
        write!(f, "f1          {:.4}", self.f1)
    }
}
