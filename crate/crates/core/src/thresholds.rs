//! Turning confidence scores into binary predictions.
//!
//! Two strategies: a scalar threshold per label, calibrated on training
//! scores by sweeping the candidate cuts of each column, and a
//! per-instance rule that predicts how many of a row's top-ranked labels
//! to switch on (a linear regression from the descending-sorted score
//! vector to the row's optimal cut). Per-label thresholds suit
//! instance-wise effective predictors, the per-instance rule suits
//! label-wise effective ones.

use nalgebra::{DMatrix, DVector};
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::data::LabelMatrix;
use crate::error::{Error, Result};
use crate::measures::{PredictionMatrix, ScoreMatrix};

/// One scalar threshold per label; `h_ij = [f_ij > t_j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerLabelThresholds {
    pub t: Vec<f64>,
}

/// Cardinality predictor: maps a row's descending-sorted score vector
/// through a fitted linear function to a cut in `[0, l]`, and the top-cut
/// ranked labels are predicted positive.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceThresholder {
    weights: Vec<f64>,
    bias: f64,
}

impl InstanceThresholder {
    pub fn labels(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    /// Predicted cut for one row of scores (any order; sorted internally).
    pub fn predict_cut(&self, row: &[f64]) -> usize {
        let mut sorted: Vec<f64> = row.to_vec();
        sorted.sort_unstable_by(|a, b| b.total_cmp(a));
        let l = self.weights.len();
        let raw: f64 = self
            .weights
            .iter()
            .zip(sorted.iter())
            .map(|(w, s)| w * s)
            .sum::<f64>()
            + self.bias;
        (raw.round().max(0.0) as usize).min(l)
    }
}

/// Serializable thresholding rule stored inside model files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ThresholdRule {
    PerLabel { thresholds: Vec<f64> },
    PerInstance { weights: Vec<f64>, bias: f64 },
}

impl From<&PerLabelThresholds> for ThresholdRule {
    fn from(t: &PerLabelThresholds) -> Self {
        ThresholdRule::PerLabel {
            thresholds: t.t.clone(),
        }
    }
}

impl From<&InstanceThresholder> for ThresholdRule {
    fn from(t: &InstanceThresholder) -> Self {
        ThresholdRule::PerInstance {
            weights: t.weights.clone(),
            bias: t.bias,
        }
    }
}

impl ThresholdRule {
    pub fn induce(&self, f: &ScoreMatrix) -> Result<PredictionMatrix> {
        match self {
            ThresholdRule::PerLabel { thresholds } => induce_per_label(
                f,
                &PerLabelThresholds {
                    t: thresholds.clone(),
                },
            ),
            ThresholdRule::PerInstance { weights, bias } => induce_per_instance(
                f,
                &InstanceThresholder {
                    weights: weights.clone(),
                    bias: *bias,
                },
            ),
        }
    }
}

/// Classification measure a per-label calibration optimizes on training
/// data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationTarget {
    MacroF1,
    HammingLoss,
    MicroF1,
}

/// One candidate threshold of a column together with the prediction
/// statistics it induces.
#[derive(Debug, Clone, Copy)]
struct Candidate {
    t: f64,
    predicted: usize,
    true_positives: usize,
}

/// Candidate thresholds of one column in ascending order: one sentinel
/// below the minimum score, midpoints between consecutive distinct
/// scores, one sentinel above the maximum. The objective is piecewise
/// constant in the threshold, so these cover every attainable classifier.
fn column_candidates(scores: &[f64], labels: &[u8]) -> Vec<Candidate> {
    let m = scores.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_unstable_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let total_pos = labels.iter().filter(|&&y| y == 1).count();

    let mut cands = Vec::new();
    cands.push(Candidate {
        t: scores[order[0]] - 1.0,
        predicted: m,
        true_positives: total_pos,
    });
    let mut predicted = m;
    let mut tp = total_pos;
    let mut idx = 0;
    while idx < m {
        // Cross the whole tie group at scores[order[idx]].
        let v = scores[order[idx]];
        while idx < m && scores[order[idx]] == v {
            predicted -= 1;
            if labels[order[idx]] == 1 {
                tp -= 1;
            }
            idx += 1;
        }
        let t = if idx < m {
            (v + scores[order[idx]]) / 2.0
        } else {
            v + 1.0
        };
        cands.push(Candidate {
            t,
            predicted,
            true_positives: tp,
        });
    }
    cands
}

/// Calibrates one threshold per label on training scores. Hamming loss
/// and macro-F1 decompose per label, so each column takes its own optimal
/// candidate; micro-F1 starts from the Hamming optimum and runs one
/// greedy coordinate pass over the labels in index order. Ties always
/// resolve to the larger threshold.
pub fn calibrate_per_label(
    f_train: &ScoreMatrix,
    y_train: &LabelMatrix,
    target: CalibrationTarget,
) -> Result<PerLabelThresholds> {
    if f_train.instances() != y_train.instances() || f_train.labels() != y_train.labels() {
        return Err(Error::InvalidArgument("score/label shape mismatch".into()));
    }
    if f_train.instances() == 0 {
        return Err(Error::InvalidArgument("no training scores".into()));
    }
    let l = f_train.labels();
    let per_column: Vec<Vec<Candidate>> = (0..l)
        .map(|j| {
            let col: Vec<f64> = f_train.scores().column(j).to_vec();
            let lab: Vec<u8> = (0..y_train.instances()).map(|i| y_train.get(i, j)).collect();
            column_candidates(&col, &lab)
        })
        .collect();
    let pos_per_column: Vec<usize> = (0..l).map(|j| y_train.positives(j).len()).collect();

    let hamming_pick = |cands: &[Candidate], pos: usize| -> f64 {
        let mut best_t = cands[0].t;
        let mut best_err = usize::MAX;
        for c in cands {
            let err = (pos - c.true_positives) + (c.predicted - c.true_positives);
            if err <= best_err {
                best_err = err;
                best_t = c.t;
            }
        }
        best_t
    };

    match target {
        CalibrationTarget::HammingLoss => {
            let t = per_column
                .iter()
                .zip(&pos_per_column)
                .map(|(cands, &pos)| hamming_pick(cands, pos))
                .collect();
            Ok(PerLabelThresholds { t })
        }
        CalibrationTarget::MacroF1 => {
            let t = per_column
                .iter()
                .zip(&pos_per_column)
                .map(|(cands, &pos)| {
                    let mut best_t = cands[0].t;
                    let mut best = f64::NEG_INFINITY;
                    for c in cands {
                        let den = pos + c.predicted;
                        let f1 = if den == 0 {
                            1.0
                        } else {
                            2.0 * c.true_positives as f64 / den as f64
                        };
                        if f1 >= best {
                            best = f1;
                            best_t = c.t;
                        }
                    }
                    best_t
                })
                .collect();
            Ok(PerLabelThresholds { t })
        }
        CalibrationTarget::MicroF1 => {
            // Start from the Hamming optimum and greedily re-pick each
            // label's threshold against the running global totals.
            let mut picks: Vec<usize> = per_column
                .iter()
                .zip(&pos_per_column)
                .map(|(cands, &pos)| {
                    let t = hamming_pick(cands, pos);
                    cands.iter().position(|c| c.t == t).unwrap()
                })
                .collect();
            let total_y: usize = pos_per_column.iter().sum();
            let mut total_tp: usize = picks
                .iter()
                .zip(&per_column)
                .map(|(&p, cands)| cands[p].true_positives)
                .sum();
            let mut total_pred: usize = picks
                .iter()
                .zip(&per_column)
                .map(|(&p, cands)| cands[p].predicted)
                .sum();
            for j in 0..l {
                let rest_tp = total_tp - per_column[j][picks[j]].true_positives;
                let rest_pred = total_pred - per_column[j][picks[j]].predicted;
                let mut best_idx = picks[j];
                let mut best = f64::NEG_INFINITY;
                for (idx, c) in per_column[j].iter().enumerate() {
                    let den = total_y + rest_pred + c.predicted;
                    let f1 = if den == 0 {
                        1.0
                    } else {
                        2.0 * (rest_tp + c.true_positives) as f64 / den as f64
                    };
                    if f1 >= best {
                        best = f1;
                        best_idx = idx;
                    }
                }
                picks[j] = best_idx;
                total_tp = rest_tp + per_column[j][best_idx].true_positives;
                total_pred = rest_pred + per_column[j][best_idx].predicted;
            }
            let t = picks
                .iter()
                .zip(&per_column)
                .map(|(&p, cands)| cands[p].t)
                .collect();
            Ok(PerLabelThresholds { t })
        }
    }
}

/// Rank order of one row: indices sorted by descending score, ties by
/// ascending label index.
fn rank_order(row: ndarray::ArrayView1<'_, f64>) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..row.len()).collect();
    idx.sort_by(|&a, &b| row[b].partial_cmp(&row[a]).unwrap().then(a.cmp(&b)));
    idx
}

/// Optimal cut of one row: the prefix length of the rank order minimizing
/// the row's Hamming error against `Y`; ties resolve to the smaller cut.
fn optimal_cut(row: ndarray::ArrayView1<'_, f64>, relevant: &[usize]) -> usize {
    let order = rank_order(row);
    let k = relevant.len();
    let mut best_c = 0;
    // Errors at cut 0: all relevant labels missed.
    let mut best_err = k;
    let mut tp = 0usize;
    for (c, &j) in order.iter().enumerate() {
        if relevant.contains(&j) {
            tp += 1;
        }
        let cut = c + 1;
        let err = (k - tp) + (cut - tp);
        if err < best_err {
            best_err = err;
            best_c = cut;
        }
    }
    best_c
}

/// Fits the per-instance cardinality predictor: least squares from the
/// descending-sorted training score rows to their optimal cuts. With
/// fewer than `l + 2` rows the fit degenerates to predicting the mean
/// label cardinality.
pub fn fit_instance_thresholder(
    f_train: &ScoreMatrix,
    y_train: &LabelMatrix,
) -> Result<InstanceThresholder> {
    if f_train.instances() != y_train.instances() || f_train.labels() != y_train.labels() {
        return Err(Error::InvalidArgument("score/label shape mismatch".into()));
    }
    let m = f_train.instances();
    let l = f_train.labels();
    if m < l + 2 {
        let mean_card = (0..m).map(|i| y_train.relevant(i).len()).sum::<usize>() as f64 / m as f64;
        return Ok(InstanceThresholder {
            weights: vec![0.0; l],
            bias: mean_card,
        });
    }
    let mut design = DMatrix::zeros(m, l + 1);
    let mut target = DVector::zeros(m);
    for i in 0..m {
        let row = f_train.scores().row(i);
        let mut sorted: Vec<f64> = row.to_vec();
        sorted.sort_unstable_by(|a, b| b.total_cmp(a));
        for (j, &s) in sorted.iter().enumerate() {
            design[(i, j)] = s;
        }
        design[(i, l)] = 1.0;
        target[i] = optimal_cut(row, y_train.relevant(i)) as f64;
    }
    let svd = design.svd(true, true);
    let sol = svd
        .solve(&target, 1e-12)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(InstanceThresholder {
        weights: sol.iter().take(l).copied().collect(),
        bias: sol[l],
    })
}

/// `h_ij = [f_ij > t_j]`.
pub fn induce_per_label(f: &ScoreMatrix, t: &PerLabelThresholds) -> Result<PredictionMatrix> {
    if t.t.len() != f.labels() {
        return Err(Error::InvalidArgument(format!(
            "{} thresholds for {} labels",
            t.t.len(),
            f.labels()
        )));
    }
    let bits = Array2::from_shape_fn((f.instances(), f.labels()), |(i, j)| {
        u8::from(f.get(i, j) > t.t[j])
    });
    PredictionMatrix::new(bits)
}

/// Sets the `cuts[i]` top-ranked labels of each row to 1 (rank ties break
/// by ascending label index).
pub fn top_cut_classifier(f: &ScoreMatrix, cuts: &[usize]) -> Result<PredictionMatrix> {
    if cuts.len() != f.instances() {
        return Err(Error::InvalidArgument(format!(
            "{} cuts for {} rows",
            cuts.len(),
            f.instances()
        )));
    }
    if let Some(&bad) = cuts.iter().find(|&&c| c > f.labels()) {
        return Err(Error::InvalidArgument(format!(
            "cut {bad} exceeds label count {}",
            f.labels()
        )));
    }
    let mut bits = Array2::zeros((f.instances(), f.labels()));
    for i in 0..f.instances() {
        let order = rank_order(f.scores().row(i));
        for &j in order.iter().take(cuts[i]) {
            bits[(i, j)] = 1;
        }
    }
    PredictionMatrix::new(bits)
}

/// Applies the fitted cardinality predictor row by row.
pub fn induce_per_instance(
    f: &ScoreMatrix,
    thresholder: &InstanceThresholder,
) -> Result<PredictionMatrix> {
    if thresholder.labels() != f.labels() {
        return Err(Error::InvalidArgument(format!(
            "thresholder fitted for {} labels, scores have {}",
            thresholder.labels(),
            f.labels()
        )));
    }
    let cuts: Vec<usize> = (0..f.instances())
        .map(|i| thresholder.predict_cut(f.scores().row(i).as_slice().unwrap()))
        .collect();
    top_cut_classifier(f, &cuts)
}
