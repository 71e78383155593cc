//! Replicated train/evaluate pipelines with deterministic seeding,
//! relative rescaling across variants, and average-rank aggregation
//! across datasets.
//!
//! A plan names a dataset source, the trainer variants to compare, the
//! split and training templates, and how many replicates to run. Each
//! replicate splits with seed `base_seed + r`, trains every variant with
//! a seed derived from `(base_seed, r, variant)`, calibrates thresholds
//! on the training scores, and evaluates all requested measures on the
//! test split. Failures are recorded per cell and aggregation proceeds
//! over the completed cells.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::data::{split, synth_quadrant, Dataset, SplitSpec};
use crate::error::{Error, Result};
use crate::io;
use crate::measures::{self, Direction, Measure, MeasureReport};
use crate::rng::derive_seed;
use crate::thresholds::{
    calibrate_per_label, fit_instance_thresholder, induce_per_instance, induce_per_label,
    CalibrationTarget,
};
use crate::trainer::{train, TrainConfig};

/// Where the experiment data comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    /// Dense-format file.
    DenseFile { path: String },
    /// Sparse-format file with its label count (and optional dimension).
    SparseFile {
        path: String,
        labels: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
    },
    /// Synthetic quadrant data of the given size.
    Synth { n: usize, seed: u64 },
}

impl DataSource {
    pub fn load(&self) -> Result<Dataset> {
        match self {
            DataSource::DenseFile { path } => io::load_dense(path),
            DataSource::SparseFile { path, labels, dim } => io::load_sparse(path, *labels, *dim),
            DataSource::Synth { n, seed } => synth_quadrant(*n, *seed),
        }
    }
}

/// Which thresholding rule(s) a variant reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdPairing {
    /// Per-label thresholds (`-t` rows).
    PerLabel,
    /// Per-instance cardinality rule (`-t(x)` rows).
    PerInstance,
    /// Report both rules as separate result rows.
    Both,
}

/// One trainer configuration to compare.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variant {
    pub name: String,
    pub lambda1: f64,
    pub lambda2: f64,
    pub thresholding: ThresholdPairing,
}

/// Everything needed to reproduce an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub dataset: DataSource,
    pub variants: Vec<Variant>,
    pub replicates: usize,
    pub train_fraction: f64,
    pub eta: f64,
    pub iters: usize,
    pub base_seed: u64,
    /// Measures to report; empty means all eleven.
    #[serde(default)]
    pub measures: Vec<Measure>,
    /// Per-label calibration target (Hamming loss when absent).
    #[serde(default)]
    pub calibration_target: Option<CalibrationTarget>,
}

impl ExperimentPlan {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.variants.is_empty() {
            return Err(Error::InvalidArgument("plan has no variants".into()));
        }
        if self.replicates == 0 {
            return Err(Error::InvalidArgument("plan needs at least one replicate".into()));
        }
        if self.iters == 0 || !(self.eta > 0.0) {
            return Err(Error::InvalidArgument("invalid training template".into()));
        }
        for v in &self.variants {
            if v.lambda1 < 0.0 || v.lambda2 < 0.0 || (v.lambda1 == 0.0 && v.lambda2 == 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "variant `{}` has invalid trade-offs",
                    v.name
                )));
            }
        }
        Ok(())
    }

    pub fn measures(&self) -> Vec<Measure> {
        if self.measures.is_empty() {
            Measure::ALL.to_vec()
        } else {
            self.measures.clone()
        }
    }
}

/// One (result row, replicate) outcome: a full measure report or the
/// error that stopped it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateCell {
    pub replicate: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<MeasureReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Aggregated statistics of one measure for one result row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureStats {
    pub measure: Measure,
    pub mean: f64,
    /// Sample standard deviation over replicates (0 for a single one).
    pub std: f64,
    /// Affine rescaling across rows: best 1, worst 0 (see
    /// [`rescale_relative`]).
    pub relative: f64,
    /// Mean over replicates of this row's competition rank among rows.
    pub average_rank: f64,
}

/// Results of one (variant, thresholding) row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowReport {
    /// Variant name plus `-t` / `-t(x)` suffix when the variant reports
    /// both thresholding rules.
    pub name: String,
    pub variant: String,
    pub thresholding: ThresholdPairing,
    pub cells: Vec<ReplicateCell>,
    pub stats: Vec<MeasureStats>,
}

/// Full experiment output: plan echo, per-row raw values and statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub plan: ExperimentPlan,
    pub rows: Vec<RowReport>,
    pub wall_clock_seconds: f64,
}

fn std_dev(values: &[f64], mean: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}

/// Affine map sending the best value to 1 and the worst to 0, respecting
/// the measure direction. All-equal inputs map to all 1 with the flag set.
pub fn rescale_relative(values: &[f64], direction: Direction) -> Result<(Vec<f64>, bool)> {
    if values.len() < 2 {
        return Err(Error::InvalidArgument(
            "relative rescaling needs at least two values".into(),
        ));
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        return Ok((vec![1.0; values.len()], true));
    }
    let scaled = values
        .iter()
        .map(|&v| match direction {
            Direction::HigherBetter => (v - min) / (max - min),
            Direction::LowerBetter => (max - v) / (max - min),
        })
        .collect();
    Ok((scaled, false))
}

/// Competition ranks within one dataset: best value gets rank 1; ties
/// receive the mean of the positions they span.
fn ranks_within(values: &[f64], direction: Direction) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| match direction {
        Direction::HigherBetter => values[b].total_cmp(&values[a]),
        Direction::LowerBetter => values[a].total_cmp(&values[b]),
    });
    let mut ranks = vec![0.0; n];
    let mut pos = 0;
    while pos < n {
        let mut end = pos;
        while end + 1 < n && values[order[end + 1]] == values[order[pos]] {
            end += 1;
        }
        // Positions pos..=end (0-based) share the mean rank.
        let mean_rank = (pos + end) as f64 / 2.0 + 1.0;
        for &idx in &order[pos..=end] {
            ranks[idx] = mean_rank;
        }
        pos = end + 1;
    }
    ranks
}

/// Mean competition rank of each variant over datasets. `per_dataset`
/// holds one row per dataset with one value per variant.
pub fn average_ranks(per_dataset: &[Vec<f64>], direction: Direction) -> Result<Vec<f64>> {
    if per_dataset.is_empty() {
        return Err(Error::InvalidArgument("no dataset rows".into()));
    }
    let v = per_dataset[0].len();
    if v == 0 || per_dataset.iter().any(|row| row.len() != v) {
        return Err(Error::InvalidArgument("ragged rank input".into()));
    }
    let mut sums = vec![0.0; v];
    for row in per_dataset {
        for (s, r) in sums.iter_mut().zip(ranks_within(row, direction)) {
            *s += r;
        }
    }
    Ok(sums.into_iter().map(|s| s / per_dataset.len() as f64).collect())
}

struct RowSpec {
    name: String,
    variant_index: usize,
    pairing: ThresholdPairing,
}

fn result_rows(plan: &ExperimentPlan) -> Vec<RowSpec> {
    let mut rows = Vec::new();
    for (vi, v) in plan.variants.iter().enumerate() {
        match v.thresholding {
            ThresholdPairing::PerLabel => rows.push(RowSpec {
                name: v.name.clone(),
                variant_index: vi,
                pairing: ThresholdPairing::PerLabel,
            }),
            ThresholdPairing::PerInstance => rows.push(RowSpec {
                name: v.name.clone(),
                variant_index: vi,
                pairing: ThresholdPairing::PerInstance,
            }),
            ThresholdPairing::Both => {
                rows.push(RowSpec {
                    name: format!("{}-t", v.name),
                    variant_index: vi,
                    pairing: ThresholdPairing::PerLabel,
                });
                rows.push(RowSpec {
                    name: format!("{}-t(x)", v.name),
                    variant_index: vi,
                    pairing: ThresholdPairing::PerInstance,
                });
            }
        }
    }
    rows
}

fn run_cell(
    data: &Dataset,
    plan: &ExperimentPlan,
    variant: &Variant,
    pairing: ThresholdPairing,
    replicate: usize,
    variant_index: usize,
) -> Result<MeasureReport> {
    let spec = SplitSpec::new(plan.train_fraction, plan.base_seed.wrapping_add(replicate as u64))?;
    let (train_set, test_set) = split(data, &spec)?;
    let cfg = TrainConfig {
        lambda1: variant.lambda1,
        lambda2: variant.lambda2,
        eta: plan.eta,
        iters: plan.iters,
        seed: derive_seed(plan.base_seed, replicate as u64, variant_index as u64),
    };
    let model = train(&train_set, &cfg)?;
    let f_train = model.predict_scores(train_set.features())?;
    let f_test = model.predict_scores(test_set.features())?;
    let target = plan.calibration_target.unwrap_or(CalibrationTarget::HammingLoss);
    let h_test = match pairing {
        ThresholdPairing::PerLabel => {
            let t = calibrate_per_label(&f_train, train_set.labels(), target)?;
            induce_per_label(&f_test, &t)?
        }
        ThresholdPairing::PerInstance | ThresholdPairing::Both => {
            let th = fit_instance_thresholder(&f_train, train_set.labels())?;
            induce_per_instance(&f_test, &th)?
        }
    };
    measures::evaluate_all(&f_test, test_set.labels(), &h_test, &h_test)
}

/// Runs the full plan. Deterministic given the plan (the wall-clock field
/// aside); per-cell failures are recorded and skipped by aggregation, and
/// only an entirely failed run is an error.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<ExperimentReport> {
    plan.validate()?;
    let started = Instant::now();
    let data = plan.dataset.load()?;
    let rows_spec = result_rows(plan);
    let wanted = plan.measures();

    let mut rows: Vec<RowReport> = Vec::with_capacity(rows_spec.len());
    for spec in &rows_spec {
        let variant = &plan.variants[spec.variant_index];
        let mut cells = Vec::with_capacity(plan.replicates);
        for r in 0..plan.replicates {
            match run_cell(&data, plan, variant, spec.pairing, r, spec.variant_index) {
                Ok(report) => cells.push(ReplicateCell {
                    replicate: r,
                    report: Some(report),
                    error: None,
                }),
                Err(e) => cells.push(ReplicateCell {
                    replicate: r,
                    report: None,
                    error: Some(e.to_string()),
                }),
            }
        }
        rows.push(RowReport {
            name: spec.name.clone(),
            variant: variant.name.clone(),
            thresholding: spec.pairing,
            cells,
            stats: Vec::new(),
        });
    }

    if rows
        .iter()
        .all(|row| row.cells.iter().all(|c| c.report.is_none()))
    {
        return Err(Error::Evaluation(
            "every (variant, replicate) cell failed".into(),
        ));
    }

    // Aggregate: means/stds per row, then cross-row relative values and
    // per-replicate average ranks.
    let mut means = vec![vec![f64::NAN; rows.len()]; wanted.len()];
    for (mi, &measure) in wanted.iter().enumerate() {
        for (ri, row) in rows.iter().enumerate() {
            let vals: Vec<f64> = row
                .cells
                .iter()
                .filter_map(|c| c.report.as_ref())
                .map(|rep| rep.value(measure))
                .collect();
            if !vals.is_empty() {
                means[mi][ri] = vals.iter().sum::<f64>() / vals.len() as f64;
            }
        }
    }

    for (mi, &measure) in wanted.iter().enumerate() {
        let row_means = &means[mi];
        let complete = row_means.iter().all(|v| v.is_finite());
        let relative: Vec<f64> = if rows.len() >= 2 && complete {
            rescale_relative(row_means, measure.direction())?.0
        } else {
            vec![f64::NAN; rows.len()]
        };
        // Average rank over replicates where every row completed.
        let mut rank_sums = vec![0.0; rows.len()];
        let mut ranked_reps = 0usize;
        for r in 0..plan.replicates {
            let vals: Option<Vec<f64>> = rows
                .iter()
                .map(|row| {
                    row.cells[r]
                        .report
                        .as_ref()
                        .map(|rep| rep.value(measure))
                })
                .collect();
            if let Some(vals) = vals {
                for (s, rank) in rank_sums.iter_mut().zip(ranks_within(&vals, measure.direction()))
                {
                    *s += rank;
                }
                ranked_reps += 1;
            }
        }
        for (ri, row) in rows.iter_mut().enumerate() {
            let vals: Vec<f64> = row
                .cells
                .iter()
                .filter_map(|c| c.report.as_ref())
                .map(|rep| rep.value(measure))
                .collect();
            let mean = means[mi][ri];
            row.stats.push(MeasureStats {
                measure,
                mean,
                std: if vals.is_empty() { f64::NAN } else { std_dev(&vals, mean) },
                relative: relative[ri],
                average_rank: if ranked_reps > 0 {
                    rank_sums[ri] / ranked_reps as f64
                } else {
                    f64::NAN
                },
            });
        }
    }

    Ok(ExperimentReport {
        plan: plan.clone(),
        rows,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    })
}

/// Output format of [`emit_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

/// Serializes the report: JSON keeps the full nested structure with
/// stable key order; CSV emits one row per (result row, measure,
/// statistic) with statistics mean, std, relative, average_rank.
pub fn emit_report(report: &ExperimentReport, format: ReportFormat, path: &str) -> Result<()> {
    let text = match format {
        ReportFormat::Json => report_to_json(report)?,
        ReportFormat::Csv => report_to_csv(report),
    };
    std::fs::write(path, text)?;
    Ok(())
}

pub fn report_to_json(report: &ExperimentReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)?)
}

pub fn report_to_csv(report: &ExperimentReport) -> String {
    let mut out = String::from("variant,measure,statistic,value\n");
    for row in &report.rows {
        for stat in &row.stats {
            for (name, value) in [
                ("mean", stat.mean),
                ("std", stat.std),
                ("relative", stat.relative),
                ("average_rank", stat.average_rank),
            ] {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    row.name.replace(',', ";"),
                    stat.measure.key(),
                    name,
                    value
                ));
            }
        }
    }
    out
}
