use std::io::Write;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::dataset::DatasetProfile;
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Outcome of training and evaluating one fold. Accuracies are fractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub seed: u64,
    pub train_images: usize,
    pub test_graphs: usize,
    /// Test accuracy after every epoch; a single entry for the untrained
    /// model when the run has zero epochs.
    pub test_accuracy: Vec<f64>,
    /// Mean training loss of every epoch.
    pub train_loss: Vec<f64>,
    pub best_accuracy: f64,
    /// Epoch of the first best accuracy, 0 for the untrained model.
    pub best_epoch: usize,
    pub final_accuracy: f64,
    pub wall_clock_seconds: f64,
}

impl FoldReport {
    pub(crate) fn from_traces(
        fold: usize,
        seed: u64,
        train_images: usize,
        test_graphs: usize,
        test_accuracy: Vec<f64>,
        train_loss: Vec<f64>,
        wall_clock_seconds: f64,
    ) -> Self {
        let (best_index, best_accuracy) =
            test_accuracy.iter().copied().enumerate().fold((0, f64::NEG_INFINITY), |b, (i, a)| if a > b.1 { (i, a) } else { b });
        let trained = !train_loss.is_empty();
        FoldReport {
            fold,
            seed,
            train_images,
            test_graphs,
            final_accuracy: *test_accuracy.last().expect("trace has an entry"),
            best_accuracy,
            best_epoch: if trained { best_index + 1 } else { 0 },
            test_accuracy,
            train_loss,
            wall_clock_seconds,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean_best: f64,
    /// Population standard deviation over folds.
    pub std_best: f64,
    pub mean_final: f64,
    pub std_final: f64,
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

impl Summary {
    pub fn from_folds(folds: &[FoldReport]) -> Self {
        let (mean_best, std_best) = mean_std(folds.iter().map(|f| f.best_accuracy));
        let (mean_final, std_final) = mean_std(folds.iter().map(|f| f.final_accuracy));
        Summary { mean_best, std_best, mean_final, std_final }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub schema_version: u32,
    pub build_id: String,
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub profile: DatasetProfile,
    pub parameter_count: usize,
    pub folds: Vec<FoldReport>,
    pub summary: Summary,
    pub wall_clock_seconds: f64,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    dataset: &'a str,
    variant: &'a str,
    aug: usize,
    seed: u64,
    fold: &'a str,
    best_accuracy: f64,
    best_epoch: Option<usize>,
    final_accuracy: f64,
    std_best: Option<f64>,
    std_final: Option<f64>,
    train_images: Option<usize>,
    test_graphs: Option<usize>,
    wall_clock_seconds: f64,
}

impl CvReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Format {
            file: "report".into(),
            line: Some(e.line()),
            message: e.to_string(),
        })?;
        let version = value.get("schema_version").and_then(|v| v.as_u64());
        if version != Some(SCHEMA_VERSION as u64) {
            return Err(Error::Format {
                file: "report".into(),
                line: None,
                message: format!("unsupported schema version {version:?}, expected {SCHEMA_VERSION}"),
            });
        }
        serde_json::from_value(value).map_err(|e| Error::Format { file: "report".into(), line: None, message: e.to_string() })
    }

    /// Copy with every wall-clock field zeroed, for run-to-run comparison.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        r.wall_clock_seconds = 0.0;
        for f in &mut r.folds {
            f.wall_clock_seconds = 0.0;
        }
        r
    }

    /// The summary and each fold's best/final fields agree with the traces.
    pub fn is_consistent(&self) -> bool {
        let folds_ok = self.folds.iter().all(|f| {
            f.test_accuracy.iter().copied().fold(f64::NEG_INFINITY, f64::max) == f.best_accuracy
                && f.test_accuracy.last() == Some(&f.final_accuracy)
        });
        folds_ok && !self.folds.is_empty() && Summary::from_folds(&self.folds) == self.summary
    }

    /// One row per fold plus a closing `mean` row.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let c = &self.config;
        let err = |e: csv::Error| Error::Format { file: "csv".into(), line: None, message: e.to_string() };
        for f in &self.folds {
            let fold = f.fold.to_string();
            w.serialize(CsvRow {
                dataset: &c.dataset,
                variant: c.variant.name(),
                aug: c.aug,
                seed: c.seed,
                fold: &fold,
                best_accuracy: f.best_accuracy,
                best_epoch: Some(f.best_epoch),
                final_accuracy: f.final_accuracy,
                std_best: None,
                std_final: None,
                train_images: Some(f.train_images),
                test_graphs: Some(f.test_graphs),
                wall_clock_seconds: f.wall_clock_seconds,
            })
            .map_err(err)?;
        }
        w.serialize(CsvRow {
            dataset: &c.dataset,
            variant: c.variant.name(),
            aug: c.aug,
            seed: c.seed,
            fold: "mean",
            best_accuracy: self.summary.mean_best,
            best_epoch: None,
            final_accuracy: self.summary.mean_final,
            std_best: Some(self.summary.std_best),
            std_final: Some(self.summary.std_final),
            train_images: None,
            test_graphs: None,
            wall_clock_seconds: self.wall_clock_seconds,
        })
        .map_err(err)?;
        w.flush().map_err(|e| Error::io("csv output", e))
    }
}
