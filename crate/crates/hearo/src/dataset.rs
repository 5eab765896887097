//! Cleveland-format ingestion and preprocessing.
//!
//! The raw file is comma-separated with 14 fields per line (13 clinical
//! attributes plus the outcome) and `?` marking missing cells. Preprocessing
//! replaces missing values with -1, collapses the outcome to a binary label,
//! and scales every feature row to unit L2 length across the examples.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::Rng;

/// Cleveland column order for the 13 attributes used.
pub const FEATURE_NAMES: [&str; 13] = [
    "age", "sex", "cp", "trestbps", "chol", "fbs", "restecg", "thalach", "exang", "oldpeak",
    "slope", "ca", "thal",
];

/// Number of fields per raw record: 13 attributes plus the outcome.
pub const FIELDS_PER_RECORD: usize = 14;

/// One raw line of the Cleveland file, still in text form.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRecord {
    /// Exactly 14 tokens, each a decimal numeral or `?`.
    pub values: Vec<String>,
}

/// Preprocessed training tensors plus provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// Features, one row per attribute, one column per example.
    x: Matrix,
    /// Labels, 1 x N, entries exactly 0.0 or 1.0.
    y: Matrix,
    n_examples: usize,
    feature_names: Vec<String>,
    /// Marks cells whose raw value was `?`, row-major over (feature, example).
    missing_mask: Vec<bool>,
    /// Feature rows that were identically zero and therefore left unscaled.
    unscaled_features: Vec<usize>,
}

/// A deterministic train/test division of example indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitSpec {
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub seed: u64,
}

/// Parse the raw comma-separated Cleveland format.
///
/// Empty lines are skipped; every other line must carry exactly 14 fields,
/// each a decimal numeral or `?`. Errors carry 1-based line (and column)
/// positions.
pub fn parse_cleveland(text: &str) -> Result<Vec<RawRecord>> {
    let mut records = Vec::new();
    for (line_idx, raw_line) in text.lines().enumerate() {
        let line = raw_line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split(',').collect();
        if tokens.len() != FIELDS_PER_RECORD {
            return Err(Error::parse(
                line_idx + 1,
                None,
                format!(
                    "expected {FIELDS_PER_RECORD} comma-separated fields, found {}",
                    tokens.len()
                ),
            ));
        }
        let mut values = Vec::with_capacity(FIELDS_PER_RECORD);
        for (col_idx, token) in tokens.iter().enumerate() {
            let token = token.trim();
            if token != "?" && !is_finite_numeral(token) {
                return Err(Error::parse(
                    line_idx + 1,
                    Some(col_idx + 1),
                    format!("token {token:?} is neither a decimal numeral nor \"?\""),
                ));
            }
            values.push(token.to_string());
        }
        records.push(RawRecord { values });
    }
    Ok(records)
}

fn is_finite_numeral(token: &str) -> bool {
    !token.is_empty() && matches!(token.parse::<f64>(), Ok(v) if v.is_finite())
}

/// Run the fixed preprocessing pipeline:
/// missing-value substitution (`?` becomes -1), outcome binarization
/// (0 stays 0, grades 1..4 become 1), then per-feature unit-length scaling.
pub fn preprocess(records: &[RawRecord]) -> Result<Dataset> {
    if records.is_empty() {
        return Err(Error::argument("cannot preprocess an empty record set"));
    }
    let n = records.len();
    let n_features = FIELDS_PER_RECORD - 1;
    let mut x = Matrix::zeros(n_features, n);
    let mut y = Matrix::zeros(1, n);
    let mut missing_mask = vec![false; n_features * n];

    for (j, record) in records.iter().enumerate() {
        if record.values.len() != FIELDS_PER_RECORD {
            return Err(Error::argument(format!(
                "record {j} has {} fields, expected {FIELDS_PER_RECORD}",
                record.values.len()
            )));
        }
        for (i, token) in record.values[..n_features].iter().enumerate() {
            if token == "?" {
                x.set(i, j, -1.0);
                missing_mask[i * n + j] = true;
            } else {
                let v: f64 = token.parse().map_err(|_| {
                    Error::argument(format!("record {j}, field {}: bad numeral {token:?}", i + 1))
                })?;
                x.set(i, j, v);
            }
        }
        let outcome_token = &record.values[n_features];
        let outcome: f64 = outcome_token.parse().map_err(|_| {
            Error::argument(format!("record {j}: outcome {outcome_token:?} is not numeric"))
        })?;
        if outcome == 0.0 {
            y.set(0, j, 0.0);
        } else if outcome >= 1.0 {
            y.set(0, j, 1.0);
        } else {
            return Err(Error::argument(format!(
                "record {j}: outcome {outcome} is outside the expected 0..4 grades"
            )));
        }
    }

    let mut unscaled_features = Vec::new();
    for i in 0..n_features {
        let norm_sq: f64 = (0..n).map(|j| x.get(i, j) * x.get(i, j)).sum();
        if norm_sq == 0.0 {
            unscaled_features.push(i);
            continue;
        }
        let inv = 1.0 / norm_sq.sqrt();
        for j in 0..n {
            x.set(i, j, x.get(i, j) * inv);
        }
    }

    Ok(Dataset {
        x,
        y,
        n_examples: n,
        feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        missing_mask,
        unscaled_features,
    })
}

/// Deterministic shuffled hold-out split. `train_fraction` must lie in (0,1)
/// and must leave both sides non-empty after rounding.
pub fn split(d: &Dataset, train_fraction: f64, seed: u64) -> Result<SplitSpec> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::argument(format!(
            "train fraction must be in (0, 1), got {train_fraction}"
        )));
    }
    let n = d.n_examples;
    let train_size = (train_fraction * n as f64).round() as usize;
    if train_size == 0 || train_size == n {
        return Err(Error::argument(format!(
            "train fraction {train_fraction} leaves an empty side for {n} examples"
        )));
    }
    let perm = Rng::new(seed).permutation(n);
    Ok(SplitSpec {
        train_indices: perm[..train_size].to_vec(),
        test_indices: perm[train_size..].to_vec(),
        seed,
    })
}

/// Deterministic k-fold partition of `0..n`: folds are disjoint, cover the
/// range, and their sizes differ by at most one.
pub fn k_fold_partition(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 || k > n {
        return Err(Error::argument(format!(
            "fold count must satisfy 2 <= k <= n, got k={k}, n={n}"
        )));
    }
    let perm = Rng::new(seed).permutation(n);
    let base = n / k;
    let remainder = n % k;
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = base + usize::from(f < remainder);
        folds.push(perm[start..start + size].to_vec());
        start += size;
    }
    Ok(folds)
}

impl Dataset {
    /// Assemble a dataset directly from tensors; used for toy problems and
    /// for loading the preprocessed CSV form.
    pub fn from_parts(x: Matrix, y: Matrix, feature_names: Vec<String>) -> Result<Self> {
        if y.rows() != 1 || y.cols() != x.cols() {
            return Err(Error::shape("dataset", x.shape(), y.shape()));
        }
        if feature_names.len() != x.rows() {
            return Err(Error::argument(format!(
                "{} feature names for {} feature rows",
                feature_names.len(),
                x.rows()
            )));
        }
        for j in 0..y.cols() {
            let v = y.get(0, j);
            if v != 0.0 && v != 1.0 {
                return Err(Error::argument(format!(
                    "label at example {j} is {v}, expected exactly 0 or 1"
                )));
            }
        }
        let n = x.cols();
        let mask_len = x.rows() * n;
        Ok(Dataset {
            x,
            y,
            n_examples: n,
            feature_names,
            missing_mask: vec![false; mask_len],
            unscaled_features: Vec::new(),
        })
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn y(&self) -> &Matrix {
        &self.y
    }

    pub fn n_examples(&self) -> usize {
        self.n_examples
    }

    pub fn n_features(&self) -> usize {
        self.x.rows()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Whether the cell (feature, example) was substituted for a `?`.
    pub fn is_missing(&self, feature: usize, example: usize) -> bool {
        self.missing_mask[feature * self.n_examples + example]
    }

    /// Total number of substituted cells.
    pub fn missing_count(&self) -> usize {
        self.missing_mask.iter().filter(|&&m| m).count()
    }

    /// Feature rows left unscaled because they were identically zero.
    pub fn unscaled_features(&self) -> &[usize] {
        &self.unscaled_features
    }

    /// (count of label 0, count of label 1).
    pub fn class_counts(&self) -> (usize, usize) {
        let ones = (0..self.n_examples)
            .filter(|&j| self.y.get(0, j) == 1.0)
            .count();
        (self.n_examples - ones, ones)
    }

    /// New dataset holding the given example columns, in index order.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        if indices.is_empty() {
            return Err(Error::argument("subset: empty index set"));
        }
        let x = self.x.select_cols(indices)?;
        let y = self.y.select_cols(indices)?;
        let n = indices.len();
        let mut missing_mask = vec![false; self.x.rows() * n];
        for (jj, &j) in indices.iter().enumerate() {
            for i in 0..self.x.rows() {
                missing_mask[i * n + jj] = self.missing_mask[i * self.n_examples + j];
            }
        }
        Ok(Dataset {
            x,
            y,
            n_examples: n,
            feature_names: self.feature_names.clone(),
            missing_mask,
            unscaled_features: self.unscaled_features.clone(),
        })
    }

    /// Write the canonical preprocessed CSV: a header row with the feature
    /// names plus `label`, then one row per example. Values are printed in
    /// Rust's shortest round-trip form, so reading the file back reproduces
    /// the exact 64-bit values.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        write!(w, "{}", self.feature_names.join(","))?;
        writeln!(w, ",label")?;
        for j in 0..self.n_examples {
            for i in 0..self.x.rows() {
                write!(w, "{},", self.x.get(i, j))?;
            }
            writeln!(w, "{}", self.y.get(0, j))?;
        }
        Ok(())
    }

    /// Read the preprocessed CSV form written by [`Dataset::write_csv`].
    /// Provenance (missing mask, unscaled rows) does not survive this format.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Dataset> {
        let mut lines = r.lines().enumerate();
        let header = loop {
            match lines.next() {
                Some((idx, line)) => {
                    let line = line?;
                    let trimmed = line.trim_end_matches('\r');
                    if trimmed.trim().is_empty() {
                        continue;
                    }
                    break (idx, trimmed.to_string());
                }
                None => return Err(Error::parse(1, None, "empty file, expected a header row")),
            }
        };
        let columns: Vec<String> = header.1.split(',').map(|s| s.trim().to_string()).collect();
        if columns.len() < 2 || columns.last().map(String::as_str) != Some("label") {
            return Err(Error::parse(
                header.0 + 1,
                None,
                "header must list feature names followed by \"label\"",
            ));
        }
        let n_features = columns.len() - 1;
        let feature_names = columns[..n_features].to_vec();

        let mut features: Vec<f64> = Vec::new();
        let mut labels: Vec<f64> = Vec::new();
        let mut n = 0usize;
        for (idx, line) in lines {
            let line = line?;
            let trimmed = line.trim_end_matches('\r');
            if trimmed.trim().is_empty() {
                continue;
            }
            let tokens: Vec<&str> = trimmed.split(',').collect();
            if tokens.len() != n_features + 1 {
                return Err(Error::parse(
                    idx + 1,
                    None,
                    format!("expected {} fields, found {}", n_features + 1, tokens.len()),
                ));
            }
            for (col, token) in tokens.iter().enumerate() {
                let v: f64 = token.trim().parse().map_err(|_| {
                    Error::parse(idx + 1, Some(col + 1), format!("bad numeral {token:?}"))
                })?;
                if !v.is_finite() {
                    return Err(Error::parse(
                        idx + 1,
                        Some(col + 1),
                        format!("non-finite value {token:?}"),
                    ));
                }
                if col < n_features {
                    features.push(v);
                } else {
                    labels.push(v);
                }
            }
            n += 1;
        }
        if n == 0 {
            return Err(Error::parse(2, None, "no data rows"));
        }
        // Rows arrived example-major; transpose into feature-major storage.
        let mut x = Matrix::zeros(n_features, n);
        for j in 0..n {
            for i in 0..n_features {
                x.set(i, j, features[j * n_features + i]);
            }
        }
        let y = Matrix::from_vec(1, n, labels)?;
        Dataset::from_parts(x, y, feature_names)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(tokens: &[&str]) -> String {
        tokens.join(",")
    }

    fn sample_line(age: f64, outcome: &str) -> String {
        record(&[
            &format!("{age}"),
            "1.0",
            "4.0",
            "130.0",
            "250.0",
            "0.0",
            "2.0",
            "150.0",
            "0.0",
            "1.5",
            "2.0",
            "0.0",
            "3.0",
            outcome,
        ])
    }

    #[test]
    fn parse_counts_records() {
        let text = format!("{}\n{}\n\n{}\n", sample_line(63.0, "0"), sample_line(50.0, "2"), sample_line(41.0, "1"));
        let records = parse_cleveland(&text).unwrap();
        assert_eq!(records.len(), 3);
        assert_eq!(records[0].values[0], "63");
    }

    #[test]
    fn parse_empty_input() {
        assert!(parse_cleveland("").unwrap().is_empty());
        assert!(parse_cleveland("\n\n").unwrap().is_empty());
    }

    #[test]
    fn parse_rejects_wrong_field_count() {
        let short = "1,2,3,4,5,6,7,8,9,10,11,12,0";
        let err = parse_cleveland(short).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 1),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_bad_token_with_position() {
        let text = format!("{}\n{}", sample_line(63.0, "0"), record(&[
            "57.0", "1.0", "abc", "130", "250", "0", "2", "150", "0", "1.5", "2", "0", "3", "0",
        ]));
        let err = parse_cleveland(&text).unwrap_err();
        match err {
            Error::Parse { line, column, .. } => {
                assert_eq!(line, 2);
                assert_eq!(column, Some(3));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn parse_accepts_question_marks_and_crlf() {
        let mut fields = vec!["60.0"; 13];
        fields[11] = "?";
        let mut line = fields.join(",");
        line.push_str(",1\r\n");
        let records = parse_cleveland(&line).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].values[11], "?");
    }

    #[test]
    fn preprocess_substitutes_missing_before_scaling() {
        let mut fields: Vec<String> = (0..13).map(|i| format!("{}", i + 1)).collect();
        fields[11] = "?".to_string();
        fields.push("0".to_string());
        let text = format!("{}\n{}", fields.join(","), sample_line(50.0, "3"));
        let d = preprocess(&parse_cleveland(&text).unwrap()).unwrap();
        assert!(d.is_missing(11, 0));
        assert!(!d.is_missing(11, 1));
        assert_eq!(d.missing_count(), 1);
        // Scaled value of the substituted cell keeps the -1 sign.
        assert!(d.x().get(11, 0) < 0.0);
    }

    #[test]
    fn preprocess_binarizes_outcomes() {
        let text = [
            sample_line(40.0, "0"),
            sample_line(41.0, "1"),
            sample_line(42.0, "2"),
            sample_line(43.0, "3"),
            sample_line(44.0, "4"),
        ]
        .join("\n");
        let d = preprocess(&parse_cleveland(&text).unwrap()).unwrap();
        assert_eq!(d.class_counts(), (1, 4));
        for j in 0..d.n_examples() {
            let v = d.y().get(0, j);
            assert!(v == 0.0 || v == 1.0);
        }
    }

    #[test]
    fn preprocess_single_record_scales_to_one() {
        let fields: Vec<String> = std::iter::repeat("5".to_string()).take(13).chain(["1".to_string()]).collect();
        let d = preprocess(&parse_cleveland(&fields.join(",")).unwrap()).unwrap();
        for i in 0..13 {
            assert!((d.x().get(i, 0) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn preprocess_unit_norm_rows() {
        let text = [
            sample_line(63.0, "0"),
            sample_line(50.0, "1"),
            sample_line(47.0, "2"),
        ]
        .join("\n");
        let d = preprocess(&parse_cleveland(&text).unwrap()).unwrap();
        for i in 0..d.n_features() {
            if d.unscaled_features().contains(&i) {
                continue;
            }
            let norm_sq: f64 = (0..d.n_examples()).map(|j| d.x().get(i, j).powi(2)).sum();
            assert!((norm_sq - 1.0).abs() <= 1e-12, "row {i} norm^2 {norm_sq}");
        }
    }

    #[test]
    fn preprocess_leaves_zero_rows_unscaled() {
        let mut fields: Vec<String> = (0..13).map(|i| format!("{}", i + 1)).collect();
        fields[4] = "0".to_string();
        fields.push("1".to_string());
        let d = preprocess(&parse_cleveland(&fields.join(",")).unwrap()).unwrap();
        assert_eq!(d.unscaled_features(), &[4]);
        assert_eq!(d.x().get(4, 0), 0.0);
    }

    #[test]
    fn split_matches_two_to_one_ratio() {
        let text: String = (0..303)
            .map(|i| sample_line(30.0 + (i % 40) as f64, if i % 2 == 0 { "0" } else { "1" }))
            .collect::<Vec<_>>()
            .join("\n");
        let d = preprocess(&parse_cleveland(&text).unwrap()).unwrap();
        let s = split(&d, 2.0 / 3.0, 9).unwrap();
        assert_eq!(s.train_indices.len(), 202);
        assert_eq!(s.test_indices.len(), 101);
        assert_eq!(split(&d, 2.0 / 3.0, 9).unwrap(), s);

        assert!(split(&d, 0.0, 1).is_err());
        assert!(split(&d, 1.0, 1).is_err());
        assert!(split(&d, -0.3, 1).is_err());
    }

    #[test]
    fn k_fold_examples() {
        let folds = k_fold_partition(303, 3, 4).unwrap();
        assert_eq!(folds.iter().map(Vec::len).collect::<Vec<_>>(), vec![101, 101, 101]);

        let folds = k_fold_partition(5, 5, 0).unwrap();
        assert!(folds.iter().all(|f| f.len() == 1));

        let mut sizes: Vec<usize> = k_fold_partition(7, 3, 1).unwrap().iter().map(Vec::len).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![2, 2, 3]);

        assert!(k_fold_partition(5, 1, 0).is_err());
        assert!(k_fold_partition(5, 6, 0).is_err());
    }

    #[test]
    fn csv_round_trip_exact() {
        let text = [
            sample_line(63.0, "0"),
            sample_line(50.5, "1"),
            sample_line(47.25, "4"),
        ]
        .join("\n");
        let d = preprocess(&parse_cleveland(&text).unwrap()).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let back = Dataset::read_csv(std::io::Cursor::new(&buf)).unwrap();
        assert_eq!(back.x(), d.x());
        assert_eq!(back.y(), d.y());
        assert_eq!(back.feature_names(), d.feature_names());
    }

    proptest! {
        #[test]
        fn fold_partition_properties(n in 2usize..500, k_off in 0usize..499, seed in any::<u64>()) {
            let k = 2 + k_off % (n - 1).max(1);
            prop_assume!(k >= 2 && k <= n);
            let folds = k_fold_partition(n, k, seed).unwrap();
            let mut seen = vec![false; n];
            for fold in &folds {
                for &i in fold {
                    prop_assert!(!seen[i], "index {i} appears twice");
                    seen[i] = true;
                }
            }
            prop_assert!(seen.iter().all(|&s| s));
            let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
            let max = *sizes.iter().max().unwrap();
            let min = *sizes.iter().min().unwrap();
            prop_assert!(max - min <= 1);
        }

        #[test]
        fn split_determinism_and_disjointness(n in 3usize..200, seed in any::<u64>(), frac in 0.05f64..0.95) {
            let x = Matrix::zeros(2, n);
            let y = Matrix::from_vec(1, n, (0..n).map(|j| (j % 2) as f64).collect()).unwrap();
            let d = Dataset::from_parts(x, y, vec!["a".into(), "b".into()]).unwrap();
            if let Ok(s) = split(&d, frac, seed) {
                let mut seen = vec![false; n];
                for &i in s.train_indices.iter().chain(&s.test_indices) {
                    prop_assert!(!seen[i]);
                    seen[i] = true;
                }
                prop_assert!(seen.iter().all(|&v| v));
                prop_assert_eq!(split(&d, frac, seed).unwrap(), s);
            }
        }
    }
}
