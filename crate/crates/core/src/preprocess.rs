//! Anomaly handling and standardization before any training.
//!
//! Invalid entries (NaN or infinite) are filled per column: forward-fill,
//! then backward-fill, then the column mean of valid entries, then 0 for
//! all-invalid columns. The scaler is fitted on training rows only and uses
//! population standard deviation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

/// Fill invalid entries in place. Idempotent: a second pass is a no-op.
pub fn impute(matrix: &mut FeatureMatrix) {
    let rows = matrix.n_rows();
    let cols = matrix.n_cols();
    for j in 0..cols {
        // Forward fill.
        let mut last_valid: Option<f64> = None;
        for i in 0..rows {
            let v = matrix.data[i * cols + j];
            if v.is_finite() {
                last_valid = Some(v);
            } else if let Some(l) = last_valid {
                matrix.data[i * cols + j] = l;
            }
        }
        // Backward fill for a leading gap.
        let mut next_valid: Option<f64> = None;
        for i in (0..rows).rev() {
            let v = matrix.data[i * cols + j];
            if v.is_finite() {
                next_valid = Some(v);
            } else if let Some(nv) = next_valid {
                matrix.data[i * cols + j] = nv;
            }
        }
        // Remaining gaps: column mean of valid entries, or 0 when none exist.
        if matrix.data[j..]
            .iter()
            .step_by(cols)
            .any(|v| !v.is_finite())
        {
            let (mut sum, mut count) = (0.0, 0usize);
            for i in 0..rows {
                let v = matrix.data[i * cols + j];
                if v.is_finite() {
                    sum += v;
                    count += 1;
                }
            }
            let fill = if count > 0 { sum / count as f64 } else { 0.0 };
            for i in 0..rows {
                let v = &mut matrix.data[i * cols + j];
                if !v.is_finite() {
                    *v = fill;
                }
            }
        }
    }
}

/// Per-column standardization parameters fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    /// Population standard deviation; entries are >= 0.
    pub std: Vec<f64>,
    pub fitted_on: usize,
}

/// Fit a scaler on (already imputed) training rows.
pub fn fit_scaler(train: &FeatureMatrix) -> Result<Scaler> {
    if train.n_rows() == 0 {
        return Err(Error::EmptyInput("cannot fit a scaler on zero rows".into()));
    }
    let rows = train.n_rows();
    let cols = train.n_cols();
    let mut mean = vec![0.0; cols];
    for i in 0..rows {
        for (j, v) in train.row(i).iter().enumerate() {
            mean[j] += v;
        }
    }
    for m in &mut mean {
        *m /= rows as f64;
    }
    let mut var = vec![0.0; cols];
    for i in 0..rows {
        for (j, v) in train.row(i).iter().enumerate() {
            let d = v - mean[j];
            var[j] += d * d;
        }
    }
    let std = var.iter().map(|v| (v / rows as f64).sqrt()).collect();
    Ok(Scaler {
        mean,
        std,
        fitted_on: rows,
    })
}

/// Standardize a matrix in place with a fitted scaler. Constant training
/// columns (std = 0) map to 0.
pub fn apply_scaler(scaler: &Scaler, matrix: &mut FeatureMatrix) -> Result<()> {
    let cols = matrix.n_cols();
    if scaler.mean.len() != cols {
        return Err(Error::DimensionMismatch(format!(
            "scaler fitted on {} columns, matrix has {cols}",
            scaler.mean.len()
        )));
    }
    for i in 0..matrix.n_rows() {
        for j in 0..cols {
            let v = &mut matrix.data[i * cols + j];
            *v = if scaler.std[j] > 0.0 {
                (*v - scaler.mean[j]) / scaler.std[j]
            } else {
                0.0
            };
        }
    }
    Ok(())
}
