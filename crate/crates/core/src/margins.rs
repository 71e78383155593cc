//! Label-wise and instance-wise margins, effectiveness predicates,
//! threshold error, and score-matrix constructors used by the theorem
//! property suites.
//!
//! The label-wise margin of an instance is the smallest score gap between
//! any of its relevant and any of its irrelevant labels; the instance-wise
//! margin of a label is the column analogue. A predictor is label-wise /
//! instance-wise / double effective when every defined margin of the
//! respective kind(s) is strictly positive; margins over an empty pair set
//! are undefined and count as vacuously satisfied.

use rand::Rng;
use serde::Serialize;

use crate::data::LabelMatrix;
use crate::error::{Error, Result};
use crate::measures::ScoreMatrix;
use crate::rng::{self, purpose};

/// Per-instance label-wise margins and per-label instance-wise margins;
/// `None` marks an undefined margin (empty pair set).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginProfile {
    pub label_wise: Vec<Option<f64>>,
    pub instance_wise: Vec<Option<f64>>,
}

impl MarginProfile {
    pub fn label_wise_effective(&self) -> bool {
        self.label_wise.iter().flatten().all(|&g| g > 0.0)
    }

    pub fn instance_wise_effective(&self) -> bool {
        self.instance_wise.iter().flatten().all(|&g| g > 0.0)
    }

    pub fn double_effective(&self) -> bool {
        self.label_wise_effective() && self.instance_wise_effective()
    }
}

fn check_shape(f: &ScoreMatrix, y: &LabelMatrix) -> Result<()> {
    if f.instances() != y.instances() || f.labels() != y.labels() {
        return Err(Error::InvalidArgument(format!(
            "shape mismatch: scores {}x{} vs labels {}x{}",
            f.instances(),
            f.labels(),
            y.instances(),
            y.labels()
        )));
    }
    Ok(())
}

/// Minimum score gap between relevant and irrelevant labels of row `i`;
/// `None` when the row has no relevant or no irrelevant label.
pub fn label_wise_margin(f: &ScoreMatrix, y: &LabelMatrix, i: usize) -> Result<Option<f64>> {
    check_shape(f, y)?;
    if i >= y.instances() {
        return Err(Error::InvalidArgument(format!("row {i} out of range")));
    }
    let pos = y.relevant(i);
    let neg = y.irrelevant(i);
    if pos.is_empty() || neg.is_empty() {
        return Ok(None);
    }
    let min_pos = pos.iter().map(|&j| f.get(i, j)).fold(f64::INFINITY, f64::min);
    let max_neg = neg.iter().map(|&j| f.get(i, j)).fold(f64::NEG_INFINITY, f64::max);
    Ok(Some(min_pos - max_neg))
}

/// Minimum score gap between positive and negative instances of column
/// `j`; `None` when the column has no positive or no negative instance.
pub fn instance_wise_margin(f: &ScoreMatrix, y: &LabelMatrix, j: usize) -> Result<Option<f64>> {
    check_shape(f, y)?;
    if j >= y.labels() {
        return Err(Error::InvalidArgument(format!("column {j} out of range")));
    }
    let pos = y.positives(j);
    let neg = y.negatives(j);
    if pos.is_empty() || neg.is_empty() {
        return Ok(None);
    }
    let min_pos = pos.iter().map(|&i| f.get(i, j)).fold(f64::INFINITY, f64::min);
    let max_neg = neg.iter().map(|&i| f.get(i, j)).fold(f64::NEG_INFINITY, f64::max);
    Ok(Some(min_pos - max_neg))
}

/// Computes every margin of both kinds.
pub fn margin_profile(f: &ScoreMatrix, y: &LabelMatrix) -> Result<MarginProfile> {
    check_shape(f, y)?;
    let label_wise = (0..y.instances())
        .map(|i| label_wise_margin(f, y, i))
        .collect::<Result<_>>()?;
    let instance_wise = (0..y.labels())
        .map(|j| instance_wise_margin(f, y, j))
        .collect::<Result<_>>()?;
    Ok(MarginProfile {
        label_wise,
        instance_wise,
    })
}

/// True iff every defined label-wise margin is strictly positive.
pub fn is_label_wise_effective(f: &ScoreMatrix, y: &LabelMatrix) -> Result<bool> {
    check_shape(f, y)?;
    for i in 0..y.instances() {
        if let Some(g) = label_wise_margin(f, y, i)? {
            if g <= 0.0 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// True iff every defined instance-wise margin is strictly positive.
pub fn is_instance_wise_effective(f: &ScoreMatrix, y: &LabelMatrix) -> Result<bool> {
    check_shape(f, y)?;
    for j in 0..y.labels() {
        if let Some(g) = instance_wise_margin(f, y, j)? {
            if g <= 0.0 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// True iff both margin kinds are strictly positive wherever defined.
pub fn is_double_effective(f: &ScoreMatrix, y: &LabelMatrix) -> Result<bool> {
    Ok(is_label_wise_effective(f, y)? && is_instance_wise_effective(f, y)?)
}

/// A descending score sequence with its optimal cut; the raw material of
/// the threshold-error definition.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdErrorCase {
    ordered_scores: Vec<f64>,
    optimal_cut: usize,
    threshold: f64,
}

impl ThresholdErrorCase {
    /// Validates that scores are finite and strictly descending, the cut
    /// lies in `[1, k]`, and the threshold lies in `(x_k - 1, x_1 + 1)`.
    pub fn new(ordered_scores: Vec<f64>, optimal_cut: usize, threshold: f64) -> Result<Self> {
        if ordered_scores.is_empty() {
            return Err(Error::InvalidArgument("score sequence is empty".into()));
        }
        if ordered_scores.iter().any(|v| !v.is_finite()) || !threshold.is_finite() {
            return Err(Error::InvalidArgument("scores and threshold must be finite".into()));
        }
        if ordered_scores.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::InvalidArgument(
                "scores must be strictly descending".into(),
            ));
        }
        let k = ordered_scores.len();
        if optimal_cut < 1 || optimal_cut > k {
            return Err(Error::InvalidArgument(format!(
                "optimal cut {optimal_cut} outside [1, {k}]"
            )));
        }
        let lo = ordered_scores[k - 1] - 1.0;
        let hi = ordered_scores[0] + 1.0;
        if !(threshold > lo && threshold < hi) {
            return Err(Error::InvalidArgument(format!(
                "threshold {threshold} outside ({lo}, {hi})"
            )));
        }
        Ok(Self {
            ordered_scores,
            optimal_cut,
            threshold,
        })
    }
}

/// Number of items the threshold misclassifies relative to the optimal
/// cut: `|c - c*|` with `c` the count of scores strictly above `t`.
pub fn threshold_error(case: &ThresholdErrorCase) -> usize {
    let above = case
        .ordered_scores
        .iter()
        .filter(|&&x| x > case.threshold)
        .count();
    above.abs_diff(case.optimal_cut)
}

/// Worst-case per-row (or per-column) F1 given `positives` true positives
/// and a threshold error of `eps`: the smaller of the all-false-negative
/// and all-false-positive outcomes. `eps == 0` gives 1.
pub fn threshold_f1_bound(positives: usize, eps: usize) -> f64 {
    if eps == 0 {
        return 1.0;
    }
    let p = positives as f64;
    let e = eps as f64;
    let fp_side = 2.0 * p / (2.0 * p + e);
    if 2 * positives == eps {
        return fp_side;
    }
    let fn_side = 2.0 * (p - e) / (2.0 * p - e);
    fn_side.min(fp_side)
}

/// Which effectiveness property an oracle score matrix must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EffectiveKind {
    /// Label-wise effective but *not* instance-wise effective.
    LabelWiseOnly,
    /// Instance-wise effective but *not* label-wise effective.
    InstanceWiseOnly,
    /// Both margin kinds strictly positive.
    Double,
}

fn double_scores(y: &LabelMatrix, rng: &mut impl Rng) -> ScoreMatrix {
    // Positives land in (1, 1.49), negatives in (0, 0.49): every defined
    // margin exceeds 0.51.
    let scores = y.bits().mapv(|b| b as f64 + rng.random_range(0.0..0.49));
    ScoreMatrix::new(scores).expect("finite by construction")
}

/// Distinct positive row/column scales spanning many orders of magnitude.
/// Powers of ten for small counts; for larger counts the exponents are
/// spread over (0, 150) to stay finite.
fn scales(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    if n <= 150 {
        order.iter().map(|&e| 10f64.powi(e as i32)).collect()
    } else {
        let step = 150.0 / n as f64;
        order.iter().map(|&e| 10f64.powf(e as f64 * step)).collect()
    }
}

/// Builds a score matrix with the requested effectiveness on `Y`. The
/// double construction adds sub-0.49 uniform noise to the labels. The
/// "only" kinds rescale rows (resp. columns) of a double-effective matrix
/// by distinct scales, which preserves the within-row (resp. within-column)
/// order while breaking the other kind; the result is checked against the
/// predicates and redrawn until it verifies. Errors when the requested
/// kind is impossible on `Y` (no mixed column / row to break).
pub fn make_effective_oracle(y: &LabelMatrix, kind: EffectiveKind, seed: u64) -> Result<ScoreMatrix> {
    const ATTEMPTS: u64 = 64;
    match kind {
        EffectiveKind::Double => {
            let mut rng = rng::substream(seed, purpose::ORACLE_NOISE);
            let f = double_scores(y, &mut rng);
            debug_assert!(is_double_effective(&f, y)?);
            Ok(f)
        }
        EffectiveKind::LabelWiseOnly => {
            let breakable = (0..y.labels())
                .any(|j| !y.positives(j).is_empty() && !y.negatives(j).is_empty());
            if !breakable {
                return Err(Error::Construction(
                    "no label has both positive and negative instances; \
                     instance-wise effectiveness cannot be broken"
                        .into(),
                ));
            }
            for attempt in 0..ATTEMPTS {
                let mut noise = rng::substream(seed, purpose::ORACLE_NOISE + (attempt << 32));
                let mut scale_rng =
                    rng::substream(seed, purpose::ORACLE_SCALING + (attempt << 32));
                let base = double_scores(y, &mut noise);
                let row_scales = scales(y.instances(), &mut scale_rng);
                let mut scores = base.scores().clone();
                for (i, mut row) in scores.rows_mut().into_iter().enumerate() {
                    row.mapv_inplace(|v| v * row_scales[i]);
                }
                let f = ScoreMatrix::new(scores)?;
                if is_label_wise_effective(&f, y)? && !is_instance_wise_effective(&f, y)? {
                    return Ok(f);
                }
            }
            Err(Error::Construction(
                "could not break instance-wise effectiveness by row scaling".into(),
            ))
        }
        EffectiveKind::InstanceWiseOnly => {
            let breakable = (0..y.instances())
                .any(|i| !y.relevant(i).is_empty() && !y.irrelevant(i).is_empty());
            if !breakable {
                return Err(Error::Construction(
                    "no instance has both relevant and irrelevant labels; \
                     label-wise effectiveness cannot be broken"
                        .into(),
                ));
            }
            for attempt in 0..ATTEMPTS {
                let mut noise = rng::substream(seed, purpose::ORACLE_NOISE + (attempt << 32));
                let mut scale_rng =
                    rng::substream(seed, purpose::ORACLE_SCALING + (attempt << 32));
                let base = double_scores(y, &mut noise);
                let col_scales = scales(y.labels(), &mut scale_rng);
                let mut scores = base.scores().clone();
                for (j, mut col) in scores.columns_mut().into_iter().enumerate() {
                    col.mapv_inplace(|v| v * col_scales[j]);
                }
                let f = ScoreMatrix::new(scores)?;
                if is_instance_wise_effective(&f, y)? && !is_label_wise_effective(&f, y)? {
                    return Ok(f);
                }
            }
            Err(Error::Construction(
                "could not break label-wise effectiveness by column scaling".into(),
            ))
        }
    }
}

/// Generative construction behind the micro-AUC limit theorem: positive
/// cells draw from U(0,1); each negative cell draws from U(0, b) where `b`
/// is the smallest positive score in its row and column (one side when the
/// other has no positives, U(0,1) when neither does). The output is double
/// effective, and its micro-AUC approaches 1 as the instance count grows.
pub fn make_theorem3_scores(y: &LabelMatrix, seed: u64) -> Result<ScoreMatrix> {
    let (m, l) = (y.instances(), y.labels());
    let mut rng = rng::substream(seed, purpose::THEOREM3);
    let mut scores = ndarray::Array2::zeros((m, l));
    // First pass: positives, row-major.
    for i in 0..m {
        for j in 0..l {
            if y.get(i, j) == 1 {
                let mut v: f64 = rng.random_range(0.0..1.0);
                while v == 0.0 {
                    v = rng.random_range(0.0..1.0);
                }
                scores[(i, j)] = v;
            }
        }
    }
    let row_min: Vec<Option<f64>> = (0..m)
        .map(|i| {
            y.relevant(i)
                .iter()
                .map(|&j| scores[(i, j)])
                .min_by(f64::total_cmp)
        })
        .collect();
    let col_min: Vec<Option<f64>> = (0..l)
        .map(|j| {
            y.positives(j)
                .iter()
                .map(|&i| scores[(i, j)])
                .min_by(f64::total_cmp)
        })
        .collect();
    // Second pass: negatives, squeezed under the relevant minima.
    for i in 0..m {
        for j in 0..l {
            if y.get(i, j) == 0 {
                let b = match (row_min[i], col_min[j]) {
                    (Some(r), Some(c)) => r.min(c),
                    (Some(r), None) => r,
                    (None, Some(c)) => c,
                    (None, None) => 1.0,
                };
                scores[(i, j)] = rng.random_range(0.0..1.0) * b;
            }
        }
    }
    ScoreMatrix::new(scores)
}
