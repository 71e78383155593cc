//! Max-margin training of a linear multi-label model by stochastic
//! subgradient descent over sampled score triplets.
//!
//! The objective is the squared norm of the per-label weight vectors plus
//! hinge penalties for every (relevant, irrelevant) label pair of each
//! instance (weight `lambda1`) and every (positive, negative) instance
//! pair of each label (weight `lambda2`). Each iteration samples one
//! label-wise triplet (instance weighted by its pair count, then one
//! relevant and one irrelevant label uniformly) and one instance-wise
//! triplet (label weighted by its pair count, then one positive and one
//! negative instance uniformly), applies the hinge subgradient step for
//! whichever hinge is active, and the returned model is the average of
//! the per-iteration iterates. Setting `lambda1 = 0` (or `lambda2 = 0`)
//! trains the instance-wise-only (or label-wise-only) variant and skips
//! the corresponding sampling entirely.
//!
//! The per-iteration update applies the `eta * w` shrink only when the
//! hinge fires, exactly as the sampled-triplet scheme prescribes, which
//! deviates from the always-on subgradient of the regularizer; the
//! expectation of each sampled term still matches the corresponding term
//! of [`full_subgradient`] up to a positive constant.

use ndarray::{Array2, ArrayView1};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, FeatureMatrix, LabelMatrix};
use crate::error::{Error, Result};
use crate::measures::ScoreMatrix;
use crate::rng::{self, purpose};
use crate::thresholds::ThresholdRule;

/// Training hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Trade-off of the label-wise (per-instance pair) hinge term.
    pub lambda1: f64,
    /// Trade-off of the instance-wise (per-label pair) hinge term.
    pub lambda2: f64,
    /// Step size.
    pub eta: f64,
    /// Iteration count.
    pub iters: usize,
    pub seed: u64,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda1 >= 0.0 && self.lambda2 >= 0.0) {
            return Err(Error::InvalidArgument(
                "trade-off parameters must be non-negative".into(),
            ));
        }
        if self.lambda1 == 0.0 && self.lambda2 == 0.0 {
            return Err(Error::InvalidArgument(
                "at least one trade-off parameter must be positive".into(),
            ));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidArgument("step size must be positive".into()));
        }
        if self.iters == 0 {
            return Err(Error::InvalidArgument("iteration count must be positive".into()));
        }
        Ok(())
    }
}

/// Linear model `W` with one weight column per label; scores are `X * W`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    weights: Array2<f64>,
}

impl LinearModel {
    pub fn new(weights: Array2<f64>) -> Result<Self> {
        if let Some(bad) = weights.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "model weights must be finite, found {bad}"
            )));
        }
        Ok(Self { weights })
    }

    pub fn dim(&self) -> usize {
        self.weights.nrows()
    }

    pub fn labels(&self) -> usize {
        self.weights.ncols()
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    /// Confidence scores `w_j . x_i` for every instance and label.
    pub fn predict_scores(&self, x: &FeatureMatrix) -> Result<ScoreMatrix> {
        if x.dim() != self.dim() {
            return Err(Error::InvalidArgument(format!(
                "feature dimension {} does not match model dimension {}",
                x.dim(),
                self.dim()
            )));
        }
        ScoreMatrix::new(x.values().dot(&self.weights))
    }
}

/// Versioned on-disk model: weights, the training configuration that
/// produced them, and optionally the calibrated thresholding rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavedModel {
    pub format: String,
    pub version: u32,
    pub d: usize,
    pub l: usize,
    pub config: TrainConfig,
    /// Row-major `d x l` weights.
    pub weights: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<ThresholdRule>,
}

impl SavedModel {
    pub const FORMAT: &'static str = "limo-model";

    pub fn new(model: &LinearModel, config: TrainConfig, thresholds: Option<ThresholdRule>) -> Self {
        Self {
            format: Self::FORMAT.into(),
            version: 1,
            d: model.dim(),
            l: model.labels(),
            config,
            weights: model.weights().iter().copied().collect(),
            thresholds,
        }
    }

    pub fn model(&self) -> Result<LinearModel> {
        let w = Array2::from_shape_vec((self.d, self.l), self.weights.clone())
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        LinearModel::new(w)
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path.as_ref(), json)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        let saved: SavedModel = serde_json::from_str(&text)?;
        if saved.format != Self::FORMAT {
            return Err(Error::InvalidArgument(format!(
                "not a model file (format `{}`)",
                saved.format
            )));
        }
        if saved.version != 1 {
            return Err(Error::InvalidArgument(format!(
                "unsupported model version {}",
                saved.version
            )));
        }
        if saved.weights.len() != saved.d * saved.l {
            return Err(Error::InvalidArgument("weight count does not match d*l".into()));
        }
        Ok(saved)
    }
}

/// Normalized triplet-sampling weights: each instance in proportion to its
/// count of (relevant, irrelevant) label pairs, each label in proportion
/// to its count of (positive, negative) instance pairs. Degenerate rows
/// and columns get weight exactly 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingWeights {
    per_instance: Vec<f64>,
    per_label: Vec<f64>,
    instance_cdf: Vec<f64>,
    label_cdf: Vec<f64>,
}

fn normalize(products: Vec<f64>) -> (Vec<f64>, Vec<f64>) {
    let total: f64 = products.iter().sum();
    let weights: Vec<f64> = if total > 0.0 {
        products.iter().map(|p| p / total).collect()
    } else {
        products
    };
    let mut cdf = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for &w in &weights {
        acc += w;
        cdf.push(acc);
    }
    (weights, cdf)
}

fn sample_cdf(cdf: &[f64], weights: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.random_range(0.0..1.0);
    let mut idx = cdf.partition_point(|&c| c <= u);
    if idx >= weights.len() {
        idx = weights.len() - 1;
    }
    while weights[idx] == 0.0 && idx > 0 {
        idx -= 1;
    }
    idx
}

impl SamplingWeights {
    pub fn compute(y: &LabelMatrix) -> Self {
        let inst: Vec<f64> = (0..y.instances())
            .map(|i| (y.relevant(i).len() * y.irrelevant(i).len()) as f64)
            .collect();
        let lab: Vec<f64> = (0..y.labels())
            .map(|j| (y.positives(j).len() * y.negatives(j).len()) as f64)
            .collect();
        let (per_instance, instance_cdf) = normalize(inst);
        let (per_label, label_cdf) = normalize(lab);
        Self {
            per_instance,
            per_label,
            instance_cdf,
            label_cdf,
        }
    }

    pub fn per_instance(&self) -> &[f64] {
        &self.per_instance
    }

    pub fn per_label(&self) -> &[f64] {
        &self.per_label
    }

    pub fn has_instance_pairs(&self) -> bool {
        self.per_instance.iter().any(|&w| w > 0.0)
    }

    pub fn has_label_pairs(&self) -> bool {
        self.per_label.iter().any(|&w| w > 0.0)
    }

    /// Samples an instance index by weight; never returns a zero-weight row.
    pub fn sample_instance(&self, rng: &mut impl Rng) -> usize {
        sample_cdf(&self.instance_cdf, &self.per_instance, rng)
    }

    /// Samples a label index by weight; never returns a zero-weight column.
    pub fn sample_label(&self, rng: &mut impl Rng) -> usize {
        sample_cdf(&self.label_cdf, &self.per_label, rng)
    }
}

/// Computes the sampling weights and checks that every active hinge term
/// (positive lambda) has at least one pair to sample.
pub fn sampling_weights(y: &LabelMatrix, lambda1: f64, lambda2: f64) -> Result<SamplingWeights> {
    let sw = SamplingWeights::compute(y);
    if lambda1 > 0.0 && !sw.has_instance_pairs() {
        return Err(Error::InvalidArgument(
            "label-wise term is active but no instance has both a relevant and an \
             irrelevant label"
                .into(),
        ));
    }
    if lambda2 > 0.0 && !sw.has_label_pairs() {
        return Err(Error::InvalidArgument(
            "instance-wise term is active but no label has both a positive and a \
             negative instance"
                .into(),
        ));
    }
    Ok(sw)
}

fn check_shapes(w: &Array2<f64>, x: &FeatureMatrix, y: &LabelMatrix) -> Result<()> {
    if x.dim() != w.nrows() || y.labels() != w.ncols() || x.instances() != y.instances() {
        return Err(Error::InvalidArgument(format!(
            "inconsistent shapes: W {}x{}, X {}x{}, Y {}x{}",
            w.nrows(),
            w.ncols(),
            x.instances(),
            x.dim(),
            y.instances(),
            y.labels()
        )));
    }
    Ok(())
}

/// Value of the regularized hinge objective: `sum_j ||w_j||^2` plus
/// `lambda1` times the label-pair hinges plus `lambda2` times the
/// instance-pair hinges, all pairs enumerated exactly.
pub fn objective_value(
    model: &LinearModel,
    x: &FeatureMatrix,
    y: &LabelMatrix,
    lambda1: f64,
    lambda2: f64,
) -> Result<f64> {
    let w = model.weights();
    check_shapes(w, x, y)?;
    let scores = x.values().dot(w);
    let reg: f64 = w.iter().map(|v| v * v).sum();
    let mut label_term = 0.0;
    for i in 0..y.instances() {
        for &u in y.relevant(i) {
            for &v in y.irrelevant(i) {
                label_term += (1.0 - (scores[(i, u)] - scores[(i, v)])).max(0.0);
            }
        }
    }
    let mut inst_term = 0.0;
    for j in 0..y.labels() {
        for &a in y.positives(j) {
            for &b in y.negatives(j) {
                inst_term += (1.0 - (scores[(a, j)] - scores[(b, j)])).max(0.0);
            }
        }
    }
    Ok(reg + lambda1 * label_term + lambda2 * inst_term)
}

/// Exact subgradient of [`objective_value`] over all pairs, with the hinge
/// subgradient taken as 0 at the kink. Active label pair `(u, v)` on
/// instance `i` contributes `-x_i` to column `u` and `+x_i` to column `v`
/// (times `lambda1`); active instance pair `(a, b)` on label `j`
/// contributes `x_b - x_a` to column `j` (times `lambda2`); the
/// regularizer contributes `2W`.
pub fn full_subgradient(
    model: &LinearModel,
    x: &FeatureMatrix,
    y: &LabelMatrix,
    lambda1: f64,
    lambda2: f64,
) -> Result<Array2<f64>> {
    let w = model.weights();
    check_shapes(w, x, y)?;
    let scores = x.values().dot(w);
    let mut grad = w.mapv(|v| 2.0 * v);
    for i in 0..y.instances() {
        let xi = x.row(i);
        for &u in y.relevant(i) {
            for &v in y.irrelevant(i) {
                if 1.0 - (scores[(i, u)] - scores[(i, v)]) > 0.0 {
                    let mut cu = grad.column_mut(u);
                    cu.zip_mut_with(&xi, |g, &xv| *g -= lambda1 * xv);
                    let mut cv = grad.column_mut(v);
                    cv.zip_mut_with(&xi, |g, &xv| *g += lambda1 * xv);
                }
            }
        }
    }
    for j in 0..y.labels() {
        for &a in y.positives(j) {
            for &b in y.negatives(j) {
                if 1.0 - (scores[(a, j)] - scores[(b, j)]) > 0.0 {
                    let xa = x.row(a);
                    let xb = x.row(b);
                    let mut cj = grad.column_mut(j);
                    for k in 0..x.dim() {
                        cj[k] += lambda2 * (xb[k] - xa[k]);
                    }
                }
            }
        }
    }
    Ok(grad)
}

fn flush_column(
    sum: &mut Array2<f64>,
    w: &Array2<f64>,
    synced: &mut [usize],
    col: usize,
    upto: usize,
) {
    let pending = upto - synced[col];
    if pending > 0 {
        let scale = pending as f64;
        let wcol = w.column(col);
        let mut scol = sum.column_mut(col);
        scol.zip_mut_with(&wcol, |s, &v| *s += v * scale);
    }
    synced[col] = upto;
}

fn column_finite(w: &Array2<f64>, col: usize) -> bool {
    w.column(col).iter().all(|v| v.is_finite())
}

/// Runs the sampled-triplet subgradient descent and returns the average
/// of the post-iteration iterates. Fully deterministic given the seed:
/// initialization and triplet sampling use independent streams, and an
/// inactive hinge term (`lambda = 0`) consumes no randomness.
pub fn train(data: &Dataset, cfg: &TrainConfig) -> Result<LinearModel> {
    cfg.validate()?;
    let x = data.features();
    let y = data.labels();
    let (d, l) = (x.dim(), y.labels());
    if d == 0 {
        return Err(Error::InvalidArgument("feature dimension must be positive".into()));
    }
    let sw = sampling_weights(y, cfg.lambda1, cfg.lambda2)?;

    let mut init_rng = rng::substream(cfg.seed, purpose::TRAIN_INIT);
    let normal = Normal::new(0.0, 1.0 / (d as f64).sqrt())
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut w = Array2::from_shape_fn((d, l), |_| normal.sample(&mut init_rng));

    let mut sampling_rng = rng::substream(cfg.seed, purpose::TRAIN_SAMPLING);
    let mut sum = Array2::<f64>::zeros((d, l));
    let mut synced = vec![0usize; l];
    let eta = cfg.eta;

    for t in 1..=cfg.iters {
        if cfg.lambda1 > 0.0 {
            let i = sw.sample_instance(&mut sampling_rng);
            let pos = y.relevant(i);
            let neg = y.irrelevant(i);
            let u = pos[sampling_rng.random_range(0..pos.len())];
            let v = neg[sampling_rng.random_range(0..neg.len())];
            let xi = x.row(i);
            let margin = w.column(u).dot(&xi) - w.column(v).dot(&xi);
            if 1.0 - margin > 0.0 {
                flush_column(&mut sum, &w, &mut synced, u, t - 1);
                flush_column(&mut sum, &w, &mut synced, v, t - 1);
                apply_pair_update(&mut w, u, v, xi, eta, cfg.lambda1);
                if !column_finite(&w, u) || !column_finite(&w, v) {
                    return Err(Error::Numeric {
                        iteration: t,
                        msg: "label-wise update produced a non-finite weight".into(),
                    });
                }
            }
        }
        if cfg.lambda2 > 0.0 {
            let j = sw.sample_label(&mut sampling_rng);
            let pos = y.positives(j);
            let neg = y.negatives(j);
            let a = pos[sampling_rng.random_range(0..pos.len())];
            let b = neg[sampling_rng.random_range(0..neg.len())];
            let margin = w.column(j).dot(&x.row(a)) - w.column(j).dot(&x.row(b));
            if 1.0 - margin > 0.0 {
                flush_column(&mut sum, &w, &mut synced, j, t - 1);
                apply_column_update(&mut w, j, x.row(a), x.row(b), eta, cfg.lambda2);
                if !column_finite(&w, j) {
                    return Err(Error::Numeric {
                        iteration: t,
                        msg: "instance-wise update produced a non-finite weight".into(),
                    });
                }
            }
        }
    }
    for col in 0..l {
        flush_column(&mut sum, &w, &mut synced, col, cfg.iters);
    }
    LinearModel::new(sum / cfg.iters as f64)
}

/// `w_u <- (1 - eta) w_u + eta lambda x`, `w_v <- (1 - eta) w_v - eta lambda x`.
fn apply_pair_update(
    w: &mut Array2<f64>,
    u: usize,
    v: usize,
    xi: ArrayView1<'_, f64>,
    eta: f64,
    lambda: f64,
) {
    let mut cu = w.column_mut(u);
    cu.zip_mut_with(&xi, |wv, &xv| *wv = *wv * (1.0 - eta) + eta * lambda * xv);
    let mut cv = w.column_mut(v);
    cv.zip_mut_with(&xi, |wv, &xv| *wv = *wv * (1.0 - eta) - eta * lambda * xv);
}

/// `w_j <- (1 - eta) w_j + eta lambda (x_a - x_b)`.
fn apply_column_update(
    w: &mut Array2<f64>,
    j: usize,
    xa: ArrayView1<'_, f64>,
    xb: ArrayView1<'_, f64>,
    eta: f64,
    lambda: f64,
) {
    let mut cj = w.column_mut(j);
    for k in 0..xa.len() {
        cj[k] = cj[k] * (1.0 - eta) + eta * lambda * (xa[k] - xb[k]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synth_quadrant;
    use ndarray::array;

    fn e1_labels() -> LabelMatrix {
        LabelMatrix::from_rows(&[vec![1, 0, 1], vec![0, 1, 0]]).unwrap()
    }

    fn e1_features() -> FeatureMatrix {
        FeatureMatrix::new(array![[1.0, 0.0], [0.0, 1.0]]).unwrap()
    }

    #[test]
    fn sampling_weights_worked_example() {
        let y = e1_labels();
        let sw = SamplingWeights::compute(&y);
        assert_eq!(sw.per_instance(), &[0.5, 0.5]);
        for w in sw.per_label() {
            assert!((w - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn degenerate_row_gets_zero_weight() {
        let y = LabelMatrix::from_rows(&[vec![1, 1], vec![1, 0]]).unwrap();
        let sw = SamplingWeights::compute(&y);
        assert_eq!(sw.per_instance()[0], 0.0);
        assert_eq!(sw.per_instance()[1], 1.0);
    }

    #[test]
    fn zero_weight_rows_are_never_sampled() {
        let y = LabelMatrix::from_rows(&[
            vec![1, 1, 1],
            vec![1, 0, 1],
            vec![0, 0, 0],
            vec![0, 1, 0],
        ])
        .unwrap();
        let sw = SamplingWeights::compute(&y);
        let mut rng = rng::substream(5, 92);
        for _ in 0..100_000 {
            let i = sw.sample_instance(&mut rng);
            assert!(i == 1 || i == 3, "sampled degenerate row {i}");
        }
    }

    #[test]
    fn sampling_weights_error_when_active_side_empty() {
        let y = LabelMatrix::from_rows(&[vec![1, 1], vec![1, 1]]).unwrap();
        assert!(sampling_weights(&y, 1.0, 0.0).is_err());
        assert!(sampling_weights(&y, 0.0, 1.0).is_err());
    }

    #[test]
    fn objective_at_zero_counts_pairs() {
        let y = e1_labels();
        let x = e1_features();
        let w = LinearModel::new(Array2::zeros((2, 3))).unwrap();
        // Label pairs: row 1 has 2*1, row 2 has 1*2. Instance pairs: each
        // of the 3 columns has 1*1.
        let got = objective_value(&w, &x, &y, 2.0, 5.0).unwrap();
        assert_eq!(got, 2.0 * 4.0 + 5.0 * 3.0);
    }

    #[test]
    fn objective_with_wide_margins_is_pure_regularizer() {
        let y = e1_labels();
        let x = e1_features();
        let w = LinearModel::new(array![[2.0, 0.0, 2.0], [0.0, 2.0, 0.0]]).unwrap();
        let got = objective_value(&w, &x, &y, 3.0, 4.0).unwrap();
        assert_eq!(got, 12.0);
    }

    #[test]
    fn subgradient_is_2w_when_hinges_inactive() {
        let y = e1_labels();
        let x = e1_features();
        let model = LinearModel::new(array![[2.0, 0.0, 2.0], [0.0, 2.0, 0.0]]).unwrap();
        let g = full_subgradient(&model, &x, &y, 3.0, 4.0).unwrap();
        assert_eq!(g, model.weights().mapv(|v| 2.0 * v));
    }

    #[test]
    fn subgradient_single_active_label_pair() {
        let y = LabelMatrix::from_rows(&[vec![1, 0]]).unwrap();
        let x = FeatureMatrix::new(array![[0.5]]).unwrap();
        let model = LinearModel::new(Array2::zeros((1, 2))).unwrap();
        let g = full_subgradient(&model, &x, &y, 2.0, 0.0).unwrap();
        assert_eq!(g, array![[-1.0, 1.0]]);
    }

    #[test]
    fn subgradient_matches_finite_differences() {
        let data = synth_quadrant(30, 4).unwrap();
        let (x, y) = (data.features(), data.labels());
        let mut rng = rng::substream(17, 91);
        let w = Array2::from_shape_fn((2, 4), |_| rng.random_range(-0.5..0.5));
        let model = LinearModel::new(w.clone()).unwrap();
        let grad = full_subgradient(&model, x, y, 1.5, 2.5).unwrap();
        let dir = Array2::from_shape_fn((2, 4), |_| rng.random_range(-1.0..1.0));
        let h = 1e-6;
        let wp = LinearModel::new(&w + &(&dir * h)).unwrap();
        let wm = LinearModel::new(&w - &(&dir * h)).unwrap();
        let fd = (objective_value(&wp, x, y, 1.5, 2.5).unwrap()
            - objective_value(&wm, x, y, 1.5, 2.5).unwrap())
            / (2.0 * h);
        let analytic: f64 = (&grad * &dir).sum();
        assert!(
            (analytic - fd).abs() <= 1e-5 * fd.abs().max(1.0),
            "directional derivative {analytic} vs finite difference {fd}"
        );
    }

    fn quick_cfg(lambda1: f64, lambda2: f64, iters: usize, seed: u64) -> TrainConfig {
        TrainConfig {
            lambda1,
            lambda2,
            eta: 0.01,
            iters,
            seed,
        }
    }

    #[test]
    fn config_validation() {
        assert!(quick_cfg(0.0, 0.0, 10, 0).validate().is_err());
        assert!(quick_cfg(-1.0, 1.0, 10, 0).validate().is_err());
        let mut c = quick_cfg(1.0, 1.0, 10, 0);
        c.eta = 0.0;
        assert!(c.validate().is_err());
        c.eta = 0.01;
        c.iters = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn train_is_deterministic() {
        let data = synth_quadrant(60, 2).unwrap();
        let cfg = quick_cfg(10.0, 10.0, 500, 7);
        let a = train(&data, &cfg).unwrap();
        let b = train(&data, &cfg).unwrap();
        assert_eq!(a, b);
        let c = train(&data, &quick_cfg(10.0, 10.0, 500, 8)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn single_margin_variants_train() {
        let data = synth_quadrant(60, 2).unwrap();
        let label_only = train(&data, &quick_cfg(10.0, 0.0, 300, 7)).unwrap();
        let inst_only = train(&data, &quick_cfg(0.0, 10.0, 300, 7)).unwrap();
        assert_ne!(label_only, inst_only);
    }

    #[test]
    fn train_reports_numeric_blowup_with_iteration() {
        let data = synth_quadrant(20, 2).unwrap();
        let mut cfg = quick_cfg(1e308, 0.0, 50, 1);
        cfg.eta = 1e6;
        match train(&data, &cfg) {
            Err(Error::Numeric { iteration, .. }) => assert!(iteration >= 1),
            other => panic!("expected numeric error, got {other:?}"),
        }
    }

    /// Reference implementation of the iterate average: re-runs the same
    /// sampling schedule, snapshotting the full matrix each iteration.
    fn train_naive_average(data: &Dataset, cfg: &TrainConfig) -> Array2<f64> {
        let x = data.features();
        let y = data.labels();
        let (d, l) = (x.dim(), y.labels());
        let sw = SamplingWeights::compute(y);
        let mut init_rng = rng::substream(cfg.seed, purpose::TRAIN_INIT);
        let normal = Normal::new(0.0, 1.0 / (d as f64).sqrt()).unwrap();
        let mut w = Array2::from_shape_fn((d, l), |_| normal.sample(&mut init_rng));
        let mut sampling_rng = rng::substream(cfg.seed, purpose::TRAIN_SAMPLING);
        let mut sum = Array2::<f64>::zeros((d, l));
        for _ in 1..=cfg.iters {
            if cfg.lambda1 > 0.0 {
                let i = sw.sample_instance(&mut sampling_rng);
                let pos = y.relevant(i);
                let neg = y.irrelevant(i);
                let u = pos[sampling_rng.random_range(0..pos.len())];
                let v = neg[sampling_rng.random_range(0..neg.len())];
                let xi = x.row(i);
                if 1.0 - (w.column(u).dot(&xi) - w.column(v).dot(&xi)) > 0.0 {
                    apply_pair_update(&mut w, u, v, xi, cfg.eta, cfg.lambda1);
                }
            }
            if cfg.lambda2 > 0.0 {
                let j = sw.sample_label(&mut sampling_rng);
                let pos = y.positives(j);
                let neg = y.negatives(j);
                let a = pos[sampling_rng.random_range(0..pos.len())];
                let b = neg[sampling_rng.random_range(0..neg.len())];
                if 1.0 - (w.column(j).dot(&x.row(a)) - w.column(j).dot(&x.row(b))) > 0.0 {
                    apply_column_update(&mut w, j, x.row(a), x.row(b), cfg.eta, cfg.lambda2);
                }
            }
            sum += &w;
        }
        sum / cfg.iters as f64
    }

    #[test]
    fn iterate_average_matches_naive_reference() {
        let data = synth_quadrant(40, 3).unwrap();
        let cfg = quick_cfg(5.0, 5.0, 97, 13);
        let fast = train(&data, &cfg).unwrap();
        let naive = train_naive_average(&data, &cfg);
        for (a, b) in fast.weights().iter().zip(naive.iter()) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn objective_descends_in_expectation() {
        let data = synth_quadrant(200, 21).unwrap();
        let mut early = Vec::new();
        let mut late = Vec::new();
        for seed in 0..10 {
            let cfg_t = quick_cfg(10.0, 10.0, 5000, seed);
            let cfg_tenth = quick_cfg(10.0, 10.0, 500, seed);
            let m_t = train(&data, &cfg_t).unwrap();
            let m_tenth = train(&data, &cfg_tenth).unwrap();
            late.push(objective_value(&m_t, data.features(), data.labels(), 10.0, 10.0).unwrap());
            early.push(
                objective_value(&m_tenth, data.features(), data.labels(), 10.0, 10.0).unwrap(),
            );
        }
        early.sort_by(f64::total_cmp);
        late.sort_by(f64::total_cmp);
        let median = |v: &[f64]| (v[4] + v[5]) / 2.0;
        assert!(
            median(&late) < median(&early),
            "median objective did not descend: {} -> {}",
            median(&early),
            median(&late)
        );
    }

    #[test]
    fn predict_scores_worked_examples() {
        let zero = LinearModel::new(Array2::zeros((2, 3))).unwrap();
        let x = e1_features();
        let s = zero.predict_scores(&x).unwrap();
        assert!(s.scores().iter().all(|&v| v == 0.0));

        let model = LinearModel::new(array![[3.0]]).unwrap();
        let x1 = FeatureMatrix::new(array![[2.0]]).unwrap();
        assert_eq!(model.predict_scores(&x1).unwrap().get(0, 0), 6.0);

        // Basis-vector rows echo the weight rows.
        let model = LinearModel::new(array![[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]).unwrap();
        let s = model.predict_scores(&e1_features()).unwrap();
        assert_eq!(s.scores().row(0).to_vec(), vec![1.0, 2.0, 3.0]);
        assert_eq!(s.scores().row(1).to_vec(), vec![4.0, 5.0, 6.0]);

        let bad = FeatureMatrix::new(array![[1.0, 2.0, 3.0]]).unwrap();
        assert!(model.predict_scores(&bad).is_err());
    }

    #[test]
    fn saved_model_round_trips_exactly() {
        let data = synth_quadrant(30, 6).unwrap();
        let cfg = quick_cfg(10.0, 10.0, 200, 3);
        let model = train(&data, &cfg).unwrap();
        let saved = SavedModel::new(&model, cfg, None);
        let f = tempfile::NamedTempFile::new().unwrap();
        saved.save(f.path()).unwrap();
        let back = SavedModel::load(f.path()).unwrap();
        assert_eq!(back, saved);
        assert_eq!(back.model().unwrap(), model);
    }
}
