//! From-scratch classifiers and evaluation metrics.
//!
//! Models operate on row-major `f64` matrices with dense `u16` class ids;
//! callers own the mapping between ids and display labels.

pub mod forest;
pub mod knn;

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use forest::{feature_importances, forest_fit, forest_predict, ForestConfig, ForestModel};
pub use knn::{knn_fit, knn_predict, KnnModel, Metric};

/// Mean 0/1 agreement between predictions and truth.
pub fn accuracy(pred: &[u16], truth: &[u16]) -> Result<f64> {
    if pred.is_empty() || pred.len() != truth.len() {
        return Err(Error::DimensionMismatch(format!(
            "accuracy over {} predictions vs {} truths",
            pred.len(),
            truth.len()
        )));
    }
    let hits = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / pred.len() as f64)
}

/// Square count matrix indexed by class; rows are truth, columns prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    /// Row-major `labels.len() x labels.len()` counts.
    pub counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn zeros(labels: Vec<String>) -> Self {
        let k = labels.len();
        ConfusionMatrix {
            labels,
            counts: vec![0; k * k],
        }
    }

    pub fn n_classes(&self) -> usize {
        self.labels.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// trace / total; 0 for an empty matrix.
    pub fn accuracy(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        let k = self.n_classes();
        let trace: u64 = (0..k).map(|i| self.counts[i * k + i]).sum();
        trace as f64 / total as f64
    }

    /// Sum another matrix into this one (same labels required).
    pub fn merge(&mut self, other: &ConfusionMatrix) -> Result<()> {
        if self.labels != other.labels {
            return Err(Error::DimensionMismatch(
                "confusion matrices with different label sets".into(),
            ));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        Ok(())
    }

    /// Row-normalized rates; all-zero rows stay zero.
    pub fn row_normalized(&self) -> Vec<f64> {
        let k = self.n_classes();
        let mut out = vec![0.0; k * k];
        for i in 0..k {
            let row_sum: u64 = self.counts[i * k..(i + 1) * k].iter().sum();
            if row_sum > 0 {
                for j in 0..k {
                    out[i * k + j] = self.counts[i * k + j] as f64 / row_sum as f64;
                }
            }
        }
        out
    }

    /// CSV export: header = predicted labels, one row per true label.
    pub fn to_csv(&self, path: &Path) -> Result<()> {
        let k = self.n_classes();
        let mut text = String::from("truth");
        for l in &self.labels {
            text.push(',');
            text.push_str(l);
        }
        text.push('\n');
        for i in 0..k {
            text.push_str(&self.labels[i]);
            for j in 0..k {
                text.push_str(&format!(",{}", self.counts[i * k + j]));
            }
            text.push('\n');
        }
        fs::write(path, text)?;
        Ok(())
    }
}

/// Build a confusion matrix from dense class ids; `labels[id]` names class id.
pub fn confusion(pred: &[u16], truth: &[u16], labels: &[String]) -> Result<ConfusionMatrix> {
    if pred.is_empty() || pred.len() != truth.len() {
        return Err(Error::DimensionMismatch(format!(
            "confusion over {} predictions vs {} truths",
            pred.len(),
            truth.len()
        )));
    }
    let k = labels.len();
    let mut m = ConfusionMatrix::zeros(labels.to_vec());
    for (&p, &t) in pred.iter().zip(truth) {
        let (p, t) = (p as usize, t as usize);
        if p >= k || t >= k {
            return Err(Error::Data(format!(
                "class id out of range: pred {p}, truth {t}, {k} labels"
            )));
        }
        m.counts[t * k + p] += 1;
    }
    Ok(m)
}
