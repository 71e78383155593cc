//! The eleven multi-label performance measures.
//!
//! Ranking measures (ranking loss, one-error, coverage, average precision,
//! the three AUC variants) evaluate a real-valued score matrix `F`;
//! classification measures (Hamming loss, the three F1 variants) evaluate
//! a binary prediction matrix `H`. Pair counting follows the literal set
//! definitions: a tie counts as reversed for ranking loss (`<=`) and as
//! correct for every AUC (`>=`). Rank and argmax ties break toward the
//! lower label index. Rows or columns on which a per-row/per-column
//! average is undefined (no relevant label, or no positive/negative side)
//! are skipped and counted in the [`MeasureReport`].
//!
//! Pair counts use sorted score arrays (overall `O(P log P)` for `P`
//! cells); unit and acceptance suites pin them against direct quadratic
//! enumeration of the set definitions.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::data::LabelMatrix;
use crate::error::{Error, Result};

/// Real-valued confidence matrix `F`, one score per (instance, label).
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    scores: Array2<f64>,
}

impl ScoreMatrix {
    pub fn new(scores: Array2<f64>) -> Result<Self> {
        if let Some(bad) = scores.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "scores must be finite, found {bad}"
            )));
        }
        Ok(Self { scores })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let l = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != l) {
            return Err(Error::InvalidArgument("ragged score rows".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let arr = Array2::from_shape_vec((m, l), flat)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Self::new(arr)
    }

    pub fn instances(&self) -> usize {
        self.scores.nrows()
    }

    pub fn labels(&self) -> usize {
        self.scores.ncols()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.scores[(i, j)]
    }

    pub fn scores(&self) -> &Array2<f64> {
        &self.scores
    }
}

/// Binary classifier output `H`.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionMatrix {
    bits: Array2<u8>,
}

impl PredictionMatrix {
    pub fn new(bits: Array2<u8>) -> Result<Self> {
        if let Some(bad) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidArgument(format!(
                "predictions must be 0 or 1, found {bad}"
            )));
        }
        Ok(Self { bits })
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let m = rows.len();
        let l = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != l) {
            return Err(Error::InvalidArgument("ragged prediction rows".into()));
        }
        let flat: Vec<u8> = rows.iter().flatten().copied().collect();
        let arr = Array2::from_shape_vec((m, l), flat)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Self::new(arr)
    }

    pub fn instances(&self) -> usize {
        self.bits.nrows()
    }

    pub fn labels(&self) -> usize {
        self.bits.ncols()
    }

    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.bits[(i, j)]
    }

    pub fn bits(&self) -> &Array2<u8> {
        &self.bits
    }
}

/// Whether larger values of a measure are better.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    HigherBetter,
    LowerBetter,
}

/// Identifier for one of the eleven measures, in canonical report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    HammingLoss,
    RankingLoss,
    OneError,
    Coverage,
    AveragePrecision,
    MacroF1,
    InstanceF1,
    MicroF1,
    MacroAuc,
    InstanceAuc,
    MicroAuc,
}

impl Measure {
    pub const ALL: [Measure; 11] = [
        Measure::HammingLoss,
        Measure::RankingLoss,
        Measure::OneError,
        Measure::Coverage,
        Measure::AveragePrecision,
        Measure::MacroF1,
        Measure::InstanceF1,
        Measure::MicroF1,
        Measure::MacroAuc,
        Measure::InstanceAuc,
        Measure::MicroAuc,
    ];

    /// Stable key used in JSON and CSV output.
    pub fn key(self) -> &'static str {
        match self {
            Measure::HammingLoss => "hamming_loss",
            Measure::RankingLoss => "ranking_loss",
            Measure::OneError => "one_error",
            Measure::Coverage => "coverage",
            Measure::AveragePrecision => "average_precision",
            Measure::MacroF1 => "macro_f1",
            Measure::InstanceF1 => "instance_f1",
            Measure::MicroF1 => "micro_f1",
            Measure::MacroAuc => "macro_auc",
            Measure::InstanceAuc => "instance_auc",
            Measure::MicroAuc => "micro_auc",
        }
    }

    pub fn parse(key: &str) -> Option<Measure> {
        Measure::ALL.iter().copied().find(|m| m.key() == key)
    }

    pub fn direction(self) -> Direction {
        match self {
            Measure::HammingLoss
            | Measure::RankingLoss
            | Measure::OneError
            | Measure::Coverage => Direction::LowerBetter,
            _ => Direction::HigherBetter,
        }
    }

    /// True for the measures computed from the thresholded classifier `H`.
    pub fn needs_predictions(self) -> bool {
        matches!(
            self,
            Measure::HammingLoss | Measure::MacroF1 | Measure::InstanceF1 | Measure::MicroF1
        )
    }
}

/// All eleven measure values plus counts of skipped degenerate rows and
/// columns. Serializes to a flat JSON object with fixed key names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub hamming_loss: f64,
    pub ranking_loss: f64,
    pub one_error: f64,
    pub coverage: f64,
    pub average_precision: f64,
    pub macro_f1: f64,
    pub instance_f1: f64,
    pub micro_f1: f64,
    pub macro_auc: f64,
    pub instance_auc: f64,
    pub micro_auc: f64,
    /// Rows without both a relevant and an irrelevant label, skipped by
    /// ranking loss and instance-AUC.
    pub skipped_rows_mixed: usize,
    /// Rows without any relevant label, skipped by one-error, coverage and
    /// average precision.
    pub skipped_rows_no_relevant: usize,
    /// Columns without both a positive and a negative instance, skipped by
    /// macro-AUC.
    pub skipped_cols_mixed: usize,
    /// Labels whose macro-F1 denominator was zero (counted as 1).
    pub vacuous_f1_labels: usize,
    /// Rows whose instance-F1 denominator was zero (counted as 1).
    pub vacuous_f1_rows: usize,
}

impl MeasureReport {
    pub fn value(&self, m: Measure) -> f64 {
        match m {
            Measure::HammingLoss => self.hamming_loss,
            Measure::RankingLoss => self.ranking_loss,
            Measure::OneError => self.one_error,
            Measure::Coverage => self.coverage,
            Measure::AveragePrecision => self.average_precision,
            Measure::MacroF1 => self.macro_f1,
            Measure::InstanceF1 => self.instance_f1,
            Measure::MicroF1 => self.micro_f1,
            Measure::MacroAuc => self.macro_auc,
            Measure::InstanceAuc => self.instance_auc,
            Measure::MicroAuc => self.micro_auc,
        }
    }
}

fn check_shape(m: usize, l: usize, y: &LabelMatrix) -> Result<()> {
    if m != y.instances() || l != y.labels() {
        return Err(Error::InvalidArgument(format!(
            "shape mismatch: {m}x{l} vs label matrix {}x{}",
            y.instances(),
            y.labels()
        )));
    }
    Ok(())
}

fn sorted(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_unstable_by(f64::total_cmp);
    v
}

/// Counts pairs `(p, n)` with `p <= n` (`neg` must be sorted ascending).
fn count_pairs_le(pos: impl Iterator<Item = f64>, neg_sorted: &[f64]) -> u64 {
    pos.map(|p| (neg_sorted.len() - neg_sorted.partition_point(|&x| x < p)) as u64)
        .sum()
}

/// Counts pairs `(p, n)` with `p >= n` (`neg` must be sorted ascending).
fn count_pairs_ge(pos: impl Iterator<Item = f64>, neg_sorted: &[f64]) -> u64 {
    pos.map(|p| neg_sorted.partition_point(|&x| x <= p) as u64).sum()
}

/// 1-based rank of `f_j(x_i)` when row `i` is sorted descending; ties
/// break by ascending label index.
pub fn rank_of(f: &ScoreMatrix, i: usize, j: usize) -> Result<usize> {
    if i >= f.instances() || j >= f.labels() {
        return Err(Error::InvalidArgument(format!(
            "index ({i},{j}) out of range for {}x{}",
            f.instances(),
            f.labels()
        )));
    }
    let row = f.scores.row(i);
    let s = row[j];
    let mut rank = 1;
    for (k, &v) in row.iter().enumerate() {
        if v > s || (v == s && k < j) {
            rank += 1;
        }
    }
    Ok(rank)
}

/// Ranks of every label in row `i`; `ranks[j] == rank_of(f, i, j)`.
fn row_ranks(row: ndarray::ArrayView1<'_, f64>) -> Vec<usize> {
    let l = row.len();
    let mut idx: Vec<usize> = (0..l).collect();
    idx.sort_by(|&a, &b| row[b].partial_cmp(&row[a]).unwrap().then(a.cmp(&b)));
    let mut ranks = vec![0usize; l];
    for (pos, &j) in idx.iter().enumerate() {
        ranks[j] = pos + 1;
    }
    ranks
}

/// Fraction of misclassified (instance, label) cells.
pub fn hamming_loss(h: &PredictionMatrix, y: &LabelMatrix) -> Result<f64> {
    check_shape(h.instances(), h.labels(), y)?;
    let wrong = h
        .bits
        .iter()
        .zip(y.bits().iter())
        .filter(|(a, b)| a != b)
        .count();
    Ok(wrong as f64 / (h.instances() * h.labels()) as f64)
}

fn ranking_loss_impl(f: &ScoreMatrix, y: &LabelMatrix) -> Result<(f64, usize)> {
    check_shape(f.instances(), f.labels(), y)?;
    let mut sum = 0.0;
    let mut eligible = 0usize;
    let mut skipped = 0usize;
    for i in 0..f.instances() {
        let pos = y.relevant(i);
        let neg = y.irrelevant(i);
        if pos.is_empty() || neg.is_empty() {
            skipped += 1;
            continue;
        }
        let row = f.scores.row(i);
        let neg_sorted = sorted(neg.iter().map(|&j| row[j]));
        let reversed = count_pairs_le(pos.iter().map(|&j| row[j]), &neg_sorted);
        sum += reversed as f64 / (pos.len() * neg.len()) as f64;
        eligible += 1;
    }
    if eligible == 0 {
        return Err(Error::Evaluation(
            "ranking loss undefined: no row has both a relevant and an irrelevant label".into(),
        ));
    }
    Ok((sum / eligible as f64, skipped))
}

/// Average fraction of reversely ordered (relevant, irrelevant) label
/// pairs per instance; ties count as reversed.
pub fn ranking_loss(f: &ScoreMatrix, y: &LabelMatrix) -> Result<f64> {
    ranking_loss_impl(f, y).map(|(v, _)| v)
}

fn one_error_impl(f: &ScoreMatrix, y: &LabelMatrix) -> Result<(f64, usize)> {
    check_shape(f.instances(), f.labels(), y)?;
    let mut errors = 0usize;
    let mut eligible = 0usize;
    let mut skipped = 0usize;
    for i in 0..f.instances() {
        if y.relevant(i).is_empty() {
            skipped += 1;
            continue;
        }
        let row = f.scores.row(i);
        let mut best = 0usize;
        for (k, &v) in row.iter().enumerate() {
            if v > row[best] {
                best = k;
            }
        }
        if y.get(i, best) == 0 {
            errors += 1;
        }
        eligible += 1;
    }
    if eligible == 0 {
        return Err(Error::Evaluation(
            "one-error undefined: no row has a relevant label".into(),
        ));
    }
    Ok((errors as f64 / eligible as f64, skipped))
}

/// Fraction of instances whose most confident label is irrelevant.
pub fn one_error(f: &ScoreMatrix, y: &LabelMatrix) -> Result<f64> {
    one_error_impl(f, y).map(|(v, _)| v)
}

fn coverage_impl(f: &ScoreMatrix, y: &LabelMatrix) -> Result<(f64, usize)> {
    check_shape(f.instances(), f.labels(), y)?;
    let mut sum = 0.0;
    let mut eligible = 0usize;
    let mut skipped = 0usize;
    for i in 0..f.instances() {
        let pos = y.relevant(i);
        if pos.is_empty() {
            skipped += 1;
            continue;
        }
        let ranks = row_ranks(f.scores.row(i));
        let worst = pos.iter().map(|&j| ranks[j]).max().unwrap();
        sum += (worst - 1) as f64;
        eligible += 1;
    }
    if eligible == 0 {
        return Err(Error::Evaluation(
            "coverage undefined: no row has a relevant label".into(),
        ));
    }
    Ok((sum / eligible as f64, skipped))
}

/// Average number of extra ranks needed to cover all relevant labels.
pub fn coverage(f: &ScoreMatrix, y: &LabelMatrix) -> Result<f64> {
    coverage_impl(f, y).map(|(v, _)| v)
}

fn average_precision_impl(f: &ScoreMatrix, y: &LabelMatrix) -> Result<(f64, usize)> {
    check_shape(f.instances(), f.labels(), y)?;
    let mut sum = 0.0;
    let mut eligible = 0usize;
    let mut skipped = 0usize;
    for i in 0..f.instances() {
        let pos = y.relevant(i);
        if pos.is_empty() {
            skipped += 1;
            continue;
        }
        let ranks = row_ranks(f.scores.row(i));
        let mut pos_ranks: Vec<usize> = pos.iter().map(|&j| ranks[j]).collect();
        pos_ranks.sort_unstable();
        let mut row_sum = 0.0;
        for &j in pos {
            let r = ranks[j];
            let within = pos_ranks.partition_point(|&x| x <= r);
            row_sum += within as f64 / r as f64;
        }
        sum += row_sum / pos.len() as f64;
        eligible += 1;
    }
    if eligible == 0 {
        return Err(Error::Evaluation(
            "average precision undefined: no row has a relevant label".into(),
        ));
    }
    Ok((sum / eligible as f64, skipped))
}

/// Average fraction of relevant labels ranked at or above each relevant
/// label.
pub fn average_precision(f: &ScoreMatrix, y: &LabelMatrix) -> Result<f64> {
    average_precision_impl(f, y).map(|(v, _)| v)
}

fn f1_term(tp2: u64, den: u64) -> Option<f64> {
    if den == 0 {
        None
    } else {
        Some(tp2 as f64 / den as f64)
    }
}

fn macro_f1_impl(h: &PredictionMatrix, y: &LabelMatrix) -> Result<(f64, usize)> {
    check_shape(h.instances(), h.labels(), y)?;
    let mut sum = 0.0;
    let mut vacuous = 0usize;
    for j in 0..h.labels() {
        let mut tp = 0u64;
        let mut cy = 0u64;
        let mut ch = 0u64;
        for i in 0..h.instances() {
            let (yy, hh) = (y.get(i, j) as u64, h.get(i, j) as u64);
            tp += yy * hh;
            cy += yy;
            ch += hh;
        }
        match f1_term(2 * tp, cy + ch) {
            Some(v) => sum += v,
            None => {
                // No positives and no predictions: vacuously perfect.
                sum += 1.0;
                vacuous += 1;
            }
        }
    }
    Ok((sum / h.labels() as f64, vacuous))
}

/// F-measure averaged over labels; a label with no positives and no
/// predictions contributes 1.
pub fn macro_f1(h: &PredictionMatrix, y: &LabelMatrix) -> Result<f64> {
    macro_f1_impl(h, y).map(|(v, _)| v)
}

fn instance_f1_impl(h: &PredictionMatrix, y: &LabelMatrix) -> Result<(f64, usize)> {
    check_shape(h.instances(), h.labels(), y)?;
    let mut sum = 0.0;
    let mut vacuous = 0usize;
    for i in 0..h.instances() {
        let mut tp = 0u64;
        let mut cy = 0u64;
        let mut ch = 0u64;
        for j in 0..h.labels() {
            let (yy, hh) = (y.get(i, j) as u64, h.get(i, j) as u64);
            tp += yy * hh;
            cy += yy;
            ch += hh;
        }
        match f1_term(2 * tp, cy + ch) {
            Some(v) => sum += v,
            None => {
                sum += 1.0;
                vacuous += 1;
            }
        }
    }
    Ok((sum / h.instances() as f64, vacuous))
}

/// F-measure averaged over instances; a row with no relevant labels and
/// no predictions contributes 1.
pub fn instance_f1(h: &PredictionMatrix, y: &LabelMatrix) -> Result<f64> {
    instance_f1_impl(h, y).map(|(v, _)| v)
}

/// F-measure over the whole prediction matrix.
pub fn micro_f1(h: &PredictionMatrix, y: &LabelMatrix) -> Result<f64> {
    check_shape(h.instances(), h.labels(), y)?;
    let mut tp = 0u64;
    let mut cy = 0u64;
    let mut ch = 0u64;
    for (a, b) in h.bits.iter().zip(y.bits().iter()) {
        tp += (*a as u64) * (*b as u64);
        cy += *b as u64;
        ch += *a as u64;
    }
    f1_term(2 * tp, cy + ch).ok_or_else(|| {
        Error::Evaluation("micro-F1 undefined: no positive labels and no predictions".into())
    })
}

fn macro_auc_impl(f: &ScoreMatrix, y: &LabelMatrix) -> Result<(f64, usize)> {
    check_shape(f.instances(), f.labels(), y)?;
    let mut sum = 0.0;
    let mut eligible = 0usize;
    let mut skipped = 0usize;
    for j in 0..f.labels() {
        let pos = y.positives(j);
        let neg = y.negatives(j);
        if pos.is_empty() || neg.is_empty() {
            skipped += 1;
            continue;
        }
        let col = f.scores.column(j);
        let neg_sorted = sorted(neg.iter().map(|&i| col[i]));
        let correct = count_pairs_ge(pos.iter().map(|&i| col[i]), &neg_sorted);
        sum += correct as f64 / (pos.len() * neg.len()) as f64;
        eligible += 1;
    }
    if eligible == 0 {
        return Err(Error::Evaluation(
            "macro-AUC undefined: no label has both a positive and a negative instance".into(),
        ));
    }
    Ok((sum / eligible as f64, skipped))
}

/// AUC averaged over labels; ties count as correctly ordered.
pub fn macro_auc(f: &ScoreMatrix, y: &LabelMatrix) -> Result<f64> {
    macro_auc_impl(f, y).map(|(v, _)| v)
}

fn instance_auc_impl(f: &ScoreMatrix, y: &LabelMatrix) -> Result<(f64, usize)> {
    check_shape(f.instances(), f.labels(), y)?;
    let mut sum = 0.0;
    let mut eligible = 0usize;
    let mut skipped = 0usize;
    for i in 0..f.instances() {
        let pos = y.relevant(i);
        let neg = y.irrelevant(i);
        if pos.is_empty() || neg.is_empty() {
            skipped += 1;
            continue;
        }
        let row = f.scores.row(i);
        let neg_sorted = sorted(neg.iter().map(|&j| row[j]));
        let correct = count_pairs_ge(pos.iter().map(|&j| row[j]), &neg_sorted);
        sum += correct as f64 / (pos.len() * neg.len()) as f64;
        eligible += 1;
    }
    if eligible == 0 {
        return Err(Error::Evaluation(
            "instance-AUC undefined: no row has both a relevant and an irrelevant label".into(),
        ));
    }
    Ok((sum / eligible as f64, skipped))
}

/// AUC averaged over instances; ties count as correctly ordered.
pub fn instance_auc(f: &ScoreMatrix, y: &LabelMatrix) -> Result<f64> {
    instance_auc_impl(f, y).map(|(v, _)| v)
}

/// AUC over the flattened prediction matrix: the fraction of
/// (positive cell, negative cell) pairs ordered correctly, ties counting
/// as correct. Computed by sorting all cells once.
pub fn micro_auc(f: &ScoreMatrix, y: &LabelMatrix) -> Result<f64> {
    check_shape(f.instances(), f.labels(), y)?;
    let total_pos = y.total_relevant();
    let total_neg = f.instances() * f.labels() - total_pos;
    if total_pos == 0 || total_neg == 0 {
        return Err(Error::Evaluation(
            "micro-AUC undefined: label matrix is all-positive or all-negative".into(),
        ));
    }
    let neg_sorted = sorted(
        f.scores
            .indexed_iter()
            .filter(|((i, j), _)| y.get(*i, *j) == 0)
            .map(|(_, &v)| v),
    );
    let correct = count_pairs_ge(
        f.scores
            .indexed_iter()
            .filter(|((i, j), _)| y.get(*i, *j) == 1)
            .map(|(_, &v)| v),
        &neg_sorted,
    );
    Ok(correct as f64 / (total_pos as f64 * total_neg as f64))
}

/// Computes all eleven measures. Ranking measures come from `F`;
/// Hamming loss, instance-F1 and micro-F1 come from the per-instance
/// thresholded predictions, macro-F1 from the per-label thresholded ones,
/// matching the pairing of thresholding strategies with the measures each
/// one optimizes. Pass the same matrix twice when only one classifier
/// exists.
pub fn evaluate_all(
    f: &ScoreMatrix,
    y: &LabelMatrix,
    h_per_instance: &PredictionMatrix,
    h_per_label: &PredictionMatrix,
) -> Result<MeasureReport> {
    check_shape(f.instances(), f.labels(), y)?;
    check_shape(h_per_instance.instances(), h_per_instance.labels(), y)?;
    check_shape(h_per_label.instances(), h_per_label.labels(), y)?;

    let (ranking_loss, skipped_rows_mixed) = ranking_loss_impl(f, y)?;
    let (one_error, skipped_rows_no_relevant) = one_error_impl(f, y)?;
    let (coverage, _) = coverage_impl(f, y)?;
    let (average_precision, _) = average_precision_impl(f, y)?;
    let (macro_f1, vacuous_f1_labels) = macro_f1_impl(h_per_label, y)?;
    let (instance_f1, vacuous_f1_rows) = instance_f1_impl(h_per_instance, y)?;
    let (macro_auc, skipped_cols_mixed) = macro_auc_impl(f, y)?;
    Ok(MeasureReport {
        hamming_loss: hamming_loss(h_per_instance, y)?,
        ranking_loss,
        one_error,
        coverage,
        average_precision,
        macro_f1,
        instance_f1,
        micro_f1: micro_f1(h_per_instance, y)?,
        macro_auc,
        instance_auc: instance_auc(f, y)?,
        micro_auc: micro_auc(f, y)?,
        skipped_rows_mixed,
        skipped_rows_no_relevant,
        skipped_cols_mixed,
        vacuous_f1_labels,
        vacuous_f1_rows,
    })
}
