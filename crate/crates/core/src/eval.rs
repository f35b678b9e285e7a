//! Binary classification metrics, fold splitting and the label
//! correlation matrix.

use std::fmt::{self, Write as _};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::aggregator::{Trait, TraitLabels};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("predicted and actual lists differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("{0} is undefined (zero denominator)")]
    UndefinedMetric(Metric),
    #[error("cannot split {n} items into {k} folds")]
    InvalidK { n: usize, k: usize },
    #[error("at least two essays are required, got {0}")]
    TooFewEssays(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    pub fn_: usize,
}

pub fn confusion_counts(predicted: &[u8], actual: &[u8]) -> Result<ConfusionCounts, EvalError> {
    if predicted.len() != actual.len() {
        return Err(EvalError::LengthMismatch(predicted.len(), actual.len()));
    }
    let mut c = ConfusionCounts::default();
    for (&p, &a) in predicted.iter().zip(actual) {
        match (p != 0, a != 0) {
            (true, true) => c.tp += 1,
            (false, false) => c.tn += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(c)
}

fn ratio(num: usize, den: usize, metric: Metric) -> Result<f64, EvalError> {
    if den == 0 {
        Err(EvalError::UndefinedMetric(metric))
    } else {
        Ok(num as f64 / den as f64)
    }
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn precision(&self) -> Result<f64, EvalError> {
        ratio(self.tp, self.tp + self.fp, Metric::Precision)
    }

    pub fn recall(&self) -> Result<f64, EvalError> {
        ratio(self.tp, self.tp + self.fn_, Metric::Recall)
    }

    /// Harmonic mean of precision and recall, taken from the counts as
    /// `2tp / (2tp + fp + fn)`.
    pub fn f_measure(&self) -> Result<f64, EvalError> {
        self.precision()?;
        self.recall()?;
        if self.tp == 0 {
            return Err(EvalError::UndefinedMetric(Metric::FMeasure));
        }
        ratio(2 * self.tp, 2 * self.tp + self.fp + self.fn_, Metric::FMeasure)
    }

    pub fn accuracy(&self) -> Result<f64, EvalError> {
        ratio(self.tp + self.tn, self.total(), Metric::Accuracy)
    }

    pub fn metric(&self, m: Metric) -> Result<f64, EvalError> {
        match m {
            Metric::Precision => self.precision(),
            Metric::Recall => self.recall(),
            Metric::FMeasure => self.f_measure(),
            Metric::Accuracy => self.accuracy(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    Precision,
    Recall,
    FMeasure,
    Accuracy,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Precision, Metric::Recall, Metric::FMeasure, Metric::Accuracy];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Precision => "precision",
            Metric::Recall => "recall",
            Metric::FMeasure => "f_measure",
            Metric::Accuracy => "accuracy",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Shuffles `0..n` with `seed` and deals it into `k` folds; the first
/// `n % k` folds get one extra index.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>, EvalError> {
    if k < 2 || n < k {
        return Err(EvalError::InvalidK { n, k });
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        let mut fold = idx[start..start + size].to_vec();
        fold.sort_unstable();
        folds.push(fold);
        start += size;
    }
    Ok(folds)
}

/// Seeded holdout split: `(train, test)` with `ceil(n * test_fraction)`
/// test items, clamped so both sides are non-empty.
pub fn holdout_split(n: usize, test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>), EvalError> {
    if n < 2 || !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(EvalError::InvalidK { n, k: 2 });
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_test = ((n as f64 * test_fraction).ceil() as usize).clamp(1, n - 1);
    let mut test = idx.split_off(n - n_test);
    idx.sort_unstable();
    test.sort_unstable();
    Ok((idx, test))
}

/// Pearson correlation between every pair of binary label columns.
/// Cells involving a constant column are `None`.
pub fn trait_correlations(labels: &[TraitLabels]) -> Result<[[Option<f64>; 5]; 5], EvalError> {
    if labels.len() < 2 {
        return Err(EvalError::TooFewEssays(labels.len()));
    }
    let n = labels.len() as f64;
    let mean: Vec<f64> =
        Trait::ALL.iter().map(|&t| labels.iter().map(|l| l.get(t) as f64).sum::<f64>() / n).collect();
    let mut out = [[None; 5]; 5];
    for a in 0..5 {
        for b in 0..5 {
            let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
            for l in labels {
                let x = l.0[a] as f64 - mean[a];
                let y = l.0[b] as f64 - mean[b];
                sab += x * y;
                saa += x * x;
                sbb += y * y;
            }
            if saa > 0.0 && sbb > 0.0 {
                out[a][b] = Some(if a == b { 1.0 } else { (sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0) });
            }
        }
    }
    Ok(out)
}

/// `trait,O,C,E,A,N` matrix with `NA` for undefined cells.
pub fn correlations_csv(matrix: &[[Option<f64>; 5]; 5]) -> String {
    let mut out = String::from("trait,O,C,E,A,N\n");
    for (t, row) in Trait::ALL.iter().zip(matrix) {
        out.push_str(t.name());
        for cell in row {
            out.push(',');
            out.push_str(&fmt_cell(*cell));
        }
        out.push('\n');
    }
    out
}

fn fmt_cell(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:.6}"))
}

/// Per-fold confusion counts for every trait and the statistics derived
/// from them.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricReport {
    folds: Vec<[ConfusionCounts; 5]>,
}

/// Mean and population standard deviation over the folds where a metric
/// is defined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    pub defined_folds: usize,
}

impl MetricReport {
    pub fn new(folds: Vec<[ConfusionCounts; 5]>) -> Self {
        Self { folds }
    }

    pub fn folds(&self) -> &[[ConfusionCounts; 5]] {
        &self.folds
    }

    pub fn value(&self, fold: usize, t: Trait, m: Metric) -> Option<f64> {
        self.folds[fold][t.index()].metric(m).ok()
    }

    pub fn summary(&self, t: Trait, m: Metric) -> Option<Summary> {
        let values: Vec<f64> = (0..self.folds.len()).filter_map(|f| self.value(f, t, m)).collect();
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Some(Summary { mean, std: var.sqrt(), defined_folds: values.len() })
    }

    /// Mean over traits of the per-trait means, skipping undefined traits.
    /// The second value counts the skipped traits.
    pub fn average(&self, m: Metric) -> (Option<f64>, usize) {
        let means: Vec<f64> = Trait::ALL.iter().filter_map(|&t| self.summary(t, m)).map(|s| s.mean).collect();
        let skipped = 5 - means.len();
        let avg = (!means.is_empty()).then(|| means.iter().sum::<f64>() / means.len() as f64);
        (avg, skipped)
    }

    /// `metric,O,C,E,A,N,avg` with a mean row and a `_std` row per metric.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,O,C,E,A,N,avg\n");
        for m in Metric::ALL {
            let sums: Vec<Option<Summary>> = Trait::ALL.iter().map(|&t| self.summary(t, m)).collect();
            let (avg, skipped) = self.average(m);
            if skipped > 0 {
                log::warn!("{m}: average skips {skipped} trait(s) where it is undefined");
            }
            out.push_str(m.name());
            for s in &sums {
                write!(out, ",{}", fmt_cell(s.map(|s| s.mean))).unwrap();
            }
            writeln!(out, ",{}", fmt_cell(avg)).unwrap();
            write!(out, "{}_std", m.name()).unwrap();
            for s in &sums {
                write!(out, ",{}", fmt_cell(s.map(|s| s.std))).unwrap();
            }
            let stds: Vec<f64> = sums.iter().flatten().map(|s| s.std).collect();
            let avg_std = (!stds.is_empty()).then(|| stds.iter().sum::<f64>() / stds.len() as f64);
            writeln!(out, ",{}", fmt_cell(avg_std)).unwrap();
        }
        out
    }

    /// One `trait,metric,value,fold` row per trait, metric and fold.
    pub fn to_long_csv(&self) -> String {
        let mut out = String::from("trait,metric,value,fold\n");
        for t in Trait::ALL {
            for m in Metric::ALL {
                for f in 0..self.folds.len() {
                    writeln!(out, "{t},{m},{},{f}", fmt_cell(self.value(f, t, m))).unwrap();
                }
            }
        }
        out
    }
}
