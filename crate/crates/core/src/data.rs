//! Core data containers: label matrix, feature matrix, dataset bundle,
//! train/test splitting, and the synthetic quadrant generator.

use ndarray::{Array2, ArrayView1};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{self, purpose};

/// Binary relevance matrix `Y` of shape `m x l` with cached index sets of
/// relevant/irrelevant labels per row and positive/negative instances per
/// column.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelMatrix {
    bits: Array2<u8>,
    row_pos: Vec<Vec<usize>>,
    row_neg: Vec<Vec<usize>>,
    col_pos: Vec<Vec<usize>>,
    col_neg: Vec<Vec<usize>>,
}

impl LabelMatrix {
    /// Builds a label matrix, checking that every entry is 0 or 1 and that
    /// both dimensions are at least 1.
    pub fn new(bits: Array2<u8>) -> Result<Self> {
        let (m, l) = bits.dim();
        if m == 0 || l == 0 {
            return Err(Error::InvalidArgument(
                "label matrix must have at least one row and one column".into(),
            ));
        }
        if let Some(bad) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidArgument(format!(
                "label matrix entries must be 0 or 1, found {bad}"
            )));
        }
        let mut row_pos = vec![Vec::new(); m];
        let mut row_neg = vec![Vec::new(); m];
        let mut col_pos = vec![Vec::new(); l];
        let mut col_neg = vec![Vec::new(); l];
        for ((i, j), &b) in bits.indexed_iter() {
            if b == 1 {
                row_pos[i].push(j);
                col_pos[j].push(i);
            } else {
                row_neg[i].push(j);
                col_neg[j].push(i);
            }
        }
        Ok(Self {
            bits,
            row_pos,
            row_neg,
            col_pos,
            col_neg,
        })
    }

    /// Convenience constructor from row-major vectors.
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let m = rows.len();
        let l = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != l) {
            return Err(Error::InvalidArgument("ragged label rows".into()));
        }
        let flat: Vec<u8> = rows.iter().flatten().copied().collect();
        let bits = Array2::from_shape_vec((m, l), flat)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Self::new(bits)
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

    /// Index set of relevant labels of row `i`.
    pub fn relevant(&self, i: usize) -> &[usize] {
        &self.row_pos[i]
    }

    /// Index set of irrelevant labels of row `i`.
    pub fn irrelevant(&self, i: usize) -> &[usize] {
        &self.row_neg[i]
    }

    /// Index set of positive instances of column `j`.
    pub fn positives(&self, j: usize) -> &[usize] {
        &self.col_pos[j]
    }

    /// Index set of negative instances of column `j`.
    pub fn negatives(&self, j: usize) -> &[usize] {
        &self.col_neg[j]
    }

    /// Total number of relevant (instance, label) cells.
    pub fn total_relevant(&self) -> usize {
        self.row_pos.iter().map(Vec::len).sum()
    }

    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let l = self.labels();
        let mut bits = Array2::zeros((rows.len(), l));
        for (r, &i) in rows.iter().enumerate() {
            bits.row_mut(r).assign(&self.bits.row(i));
        }
        Self::new(bits)
    }
}

/// Real-valued instance matrix `X` of shape `m x d`; all entries finite.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    values: Array2<f64>,
}

impl FeatureMatrix {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "feature values must be finite, found {bad}"
            )));
        }
        Ok(Self { values })
    }

    pub fn instances(&self) -> usize {
        self.values.nrows()
    }

    pub fn dim(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.values.row(i)
    }

    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let d = self.dim();
        let mut values = Array2::zeros((rows.len(), d));
        for (r, &i) in rows.iter().enumerate() {
            values.row_mut(r).assign(&self.values.row(i));
        }
        Self::new(values)
    }
}

/// Feature matrix paired with its label matrix; row counts always agree.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: FeatureMatrix,
    labels: LabelMatrix,
}

impl Dataset {
    pub fn new(features: FeatureMatrix, labels: LabelMatrix) -> Result<Self> {
        if features.instances() != labels.instances() {
            return Err(Error::InvalidArgument(format!(
                "feature rows ({}) do not match label rows ({})",
                features.instances(),
                labels.instances()
            )));
        }
        Ok(Self { features, labels })
    }

    pub fn features(&self) -> &FeatureMatrix {
        &self.features
    }

    pub fn labels(&self) -> &LabelMatrix {
        &self.labels
    }

    pub fn instances(&self) -> usize {
        self.labels.instances()
    }

    fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        Dataset::new(
            self.features.select_rows(rows)?,
            self.labels.select_rows(rows)?,
        )
    }
}

/// Train/test split parameters: fraction of rows for training plus the
/// seed of the permutation.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train_fraction: f64, seed: u64) -> Result<Self> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "train fraction must lie in (0,1), got {train_fraction}"
            )));
        }
        Ok(Self {
            train_fraction,
            seed,
        })
    }
}

/// Splits `data` into train and test parts. A uniformly random permutation
/// of row indices is drawn from the split seed; the first
/// `round(train_fraction * m)` permuted rows become the train set. Errors
/// if either part would be empty.
pub fn split(data: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    let m = data.instances();
    let train_size = (spec.train_fraction * m as f64).round() as usize;
    if train_size == 0 || train_size >= m {
        return Err(Error::InvalidArgument(format!(
            "split of {m} rows at fraction {} leaves an empty part",
            spec.train_fraction
        )));
    }
    let mut order: Vec<usize> = (0..m).collect();
    let mut rng = rng::substream(spec.seed, purpose::SPLIT);
    order.shuffle(&mut rng);
    let train = data.select_rows(&order[..train_size])?;
    let test = data.select_rows(&order[train_size..])?;
    Ok((train, test))
}

/// Quadrant label table for the synthetic generator. Columns are the
/// labels A, B, C, D; the quadrants carry the label sets
/// upper-right `{A}`, upper-left `{A,B}`, lower-left `{B,C}`,
/// lower-right `{C,D}`. The co-occurrence count varies (1 to 2 labels),
/// every label covers a different region (upper half, left half, lower
/// half, lower-right quadrant), and label D's region is a single
/// quadrant, which no linear classifier carves out of the square; at the
/// same time every pairwise label ordering the quadrants demand is
/// realizable by a linear score function, so ranking measures can
/// approach their optima while classification cannot.
pub fn quadrant_labels(x: f64, y: f64) -> [u8; 4] {
    match (x > 0.0, y > 0.0) {
        (true, true) => [1, 0, 0, 0],
        (false, true) => [1, 1, 0, 0],
        (false, false) => [0, 1, 1, 0],
        (true, false) => [0, 0, 1, 1],
    }
}

/// Generates `n` points uniformly from the open square `(-1,1)^2` with the
/// quadrant label assignment of [`quadrant_labels`]; `d = 2`, `l = 4`.
/// Points landing on an axis are redrawn. If some label ends up without a
/// positive or without a negative instance the whole draw is retried on a
/// fresh substream, so every label of the returned dataset is mixed.
pub fn synth_quadrant(n: usize, seed: u64) -> Result<Dataset> {
    if n < 4 {
        return Err(Error::InvalidArgument(format!(
            "synthetic generator needs n >= 4, got {n}"
        )));
    }
    const MAX_ATTEMPTS: u64 = 10_000;
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = rng::substream(seed, purpose::SYNTH + (attempt << 32));
        let mut feats = Array2::zeros((n, 2));
        let mut labels = Array2::zeros((n, 4));
        for i in 0..n {
            let (x, y) = loop {
                let x: f64 = rng.random_range(-1.0..1.0);
                let y: f64 = rng.random_range(-1.0..1.0);
                if x != 0.0 && y != 0.0 && x > -1.0 && y > -1.0 {
                    break (x, y);
                }
            };
            feats[(i, 0)] = x;
            feats[(i, 1)] = y;
            for (j, &b) in quadrant_labels(x, y).iter().enumerate() {
                labels[(i, j)] = b;
            }
        }
        let col_ok = (0..4).all(|j| {
            let pos = labels.column(j).iter().filter(|&&b| b == 1).count();
            pos >= 1 && pos < n
        });
        if col_ok {
            return Dataset::new(FeatureMatrix::new(feats)?, LabelMatrix::new(labels)?);
        }
    }
    Err(Error::Construction(format!(
        "could not draw {n} synthetic points covering all labels"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Dataset {
        let x = FeatureMatrix::new(
            Array2::from_shape_vec((4, 1), vec![0.0, 1.0, 2.0, 3.0]).unwrap(),
        )
        .unwrap();
        let y = LabelMatrix::from_rows(&[vec![1, 0], vec![0, 1], vec![1, 1], vec![0, 0]]).unwrap();
        Dataset::new(x, y).unwrap()
    }

    #[test]
    fn label_matrix_rejects_non_binary() {
        let arr = Array2::from_shape_vec((1, 2), vec![0u8, 2u8]).unwrap();
        assert!(LabelMatrix::new(arr).is_err());
    }

    #[test]
    fn label_matrix_index_sets_partition() {
        let y = LabelMatrix::from_rows(&[vec![1, 0, 1], vec![0, 1, 0]]).unwrap();
        for i in 0..y.instances() {
            assert_eq!(y.relevant(i).len() + y.irrelevant(i).len(), y.labels());
        }
        for j in 0..y.labels() {
            assert_eq!(y.positives(j).len() + y.negatives(j).len(), y.instances());
        }
        assert_eq!(y.relevant(0), &[0, 2]);
        assert_eq!(y.positives(1), &[1]);
    }

    #[test]
    fn feature_matrix_rejects_non_finite() {
        let arr = Array2::from_shape_vec((1, 2), vec![0.0, f64::NAN]).unwrap();
        assert!(FeatureMatrix::new(arr).is_err());
    }

    #[test]
    fn split_sizes_follow_fraction() {
        let data = toy();
        let (train, test) = split(&data, &SplitSpec::new(0.7, 3).unwrap()).unwrap();
        assert_eq!(train.instances(), 3);
        assert_eq!(test.instances(), 1);
    }

    #[test]
    fn split_is_deterministic_and_seed_sensitive() {
        let mut rows = Vec::new();
        for i in 0..30 {
            rows.push(vec![(i % 2) as u8]);
        }
        let x = FeatureMatrix::new(Array2::from_shape_fn((30, 2), |(i, j)| {
            (i * 2 + j) as f64
        }))
        .unwrap();
        let data = Dataset::new(x, LabelMatrix::from_rows(&rows).unwrap()).unwrap();
        let spec = SplitSpec::new(0.5, 11).unwrap();
        let (a1, b1) = split(&data, &spec).unwrap();
        let (a2, b2) = split(&data, &spec).unwrap();
        assert_eq!(a1, a2);
        assert_eq!(b1, b2);
        let (a3, _) = split(&data, &SplitSpec::new(0.5, 12).unwrap()).unwrap();
        assert_ne!(a1, a3);
    }

    #[test]
    fn split_rejects_empty_part() {
        let data = toy();
        // round(0.999 * 4) = 4 -> empty test part
        assert!(split(&data, &SplitSpec::new(0.999, 0).unwrap()).is_err());
        assert!(SplitSpec::new(0.0, 0).is_err());
        assert!(SplitSpec::new(1.0, 0).is_err());
    }

    #[test]
    fn quadrant_table_matches_fixed_assignment() {
        assert_eq!(quadrant_labels(0.5, 0.2), [1, 0, 0, 0]);
        assert_eq!(quadrant_labels(-0.3, 0.8), [1, 1, 0, 0]);
        assert_eq!(quadrant_labels(-0.5, -0.2), [0, 1, 1, 0]);
        assert_eq!(quadrant_labels(0.5, -0.2), [0, 0, 1, 1]);
    }

    #[test]
    fn quadrant_orderings_are_linearly_realizable() {
        // Witness weights whose scores order every quadrant's relevant
        // labels strictly above its irrelevant ones; ranking optima are
        // therefore reachable by a linear model on this layout.
        let w = [[0.0, 0.0], [-1.0, -1.0], [0.0, -2.0], [0.0, -1.0]];
        let mut rng = crate::rng::substream(0, 50);
        for _ in 0..2000 {
            let x: f64 = rng.random_range(-1.0..1.0);
            let y: f64 = rng.random_range(-1.0..1.0);
            if x == 0.0 || y == 0.0 {
                continue;
            }
            let labels = quadrant_labels(x, y);
            let scores: Vec<f64> = w.iter().map(|wj| wj[0] * x + wj[1] * y).collect();
            for u in 0..4 {
                for v in 0..4 {
                    if labels[u] == 1 && labels[v] == 0 {
                        assert!(
                            scores[u] > scores[v],
                            "({x},{y}): label {u} not above {v}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn synth_quadrant_is_deterministic() {
        let a = synth_quadrant(200, 9).unwrap();
        let b = synth_quadrant(200, 9).unwrap();
        assert_eq!(a, b);
        let c = synth_quadrant(200, 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn synth_quadrant_points_lie_in_open_square() {
        let data = synth_quadrant(500, 1).unwrap();
        for v in data.features().values().iter() {
            assert!(*v > -1.0 && *v < 1.0 && *v != 0.0);
        }
        assert_eq!(data.labels().labels(), 4);
    }

    #[test]
    fn synth_quadrant_labels_match_points() {
        let data = synth_quadrant(100, 2).unwrap();
        for i in 0..100 {
            let x = data.features().values()[(i, 0)];
            let y = data.features().values()[(i, 1)];
            let expect = quadrant_labels(x, y);
            for j in 0..4 {
                assert_eq!(data.labels().get(i, j), expect[j]);
            }
        }
    }

    #[test]
    fn synth_quadrant_every_label_mixed() {
        let data = synth_quadrant(2000, 3).unwrap();
        for j in 0..4 {
            assert!(!data.labels().positives(j).is_empty());
            assert!(!data.labels().negatives(j).is_empty());
        }
    }

    #[test]
    fn synth_quadrant_rejects_tiny_n() {
        assert!(synth_quadrant(3, 0).is_err());
    }
}
