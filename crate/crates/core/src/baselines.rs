//! Single-objective baselines: recursive feature elimination with a fixed
//! target size and with 5-fold cross-validated size selection.
//!
//! Elimination ranks features by forest importance and repeatedly drops the
//! `step` least important (ties broken by feature index), so the survivor
//! set at each iteration is a subset of the previous one. The CV variant
//! scores a fixed size grid {5, 10, 20, 30, ..., d} with stratified folds
//! and keeps the smallest size achieving the best mean accuracy.

use rand::seq::SliceRandom;

use crate::classifiers::{accuracy, feature_importances, forest_fit, forest_predict, ForestConfig};
use crate::error::{Error, Result};
use crate::nsga2::FeatureMask;
use crate::seeds;

const TAG_RFE_FIT: u64 = 0x72666566; // per-iteration elimination forests
const TAG_CV_FOLDS: u64 = 0x63766664; // fold assignment shuffle
const TAG_CV_SCORE: u64 = 0x63767363; // per-(fold, size) scoring forests

/// Trees per internal forest; elimination needs rankings, not peak accuracy.
const RFE_TREES: usize = 50;

fn forest_seed(master: u64, path: &[u64]) -> u64 {
    u64::from_le_bytes(seeds::derive_seed(master, path)[..8].try_into().unwrap())
}

/// Select `n_target` features from row-major `x` by recursive elimination.
pub fn rfe(
    x: &[f64],
    cols: usize,
    y: &[u16],
    n_target: usize,
    step: usize,
    seed: u64,
) -> Result<FeatureMask> {
    let masks = rfe_path(x, cols, y, &[n_target], step, seed)?;
    Ok(masks.into_iter().next().unwrap())
}

/// One elimination run capturing the survivor mask at every requested
/// target size. Targets may come in any order; masks return in the same
/// order. Larger targets are snapshots of earlier iterations, so the masks
/// are nested: smaller targets are subsets of larger ones.
pub fn rfe_path(
    x: &[f64],
    cols: usize,
    y: &[u16],
    targets: &[usize],
    step: usize,
    seed: u64,
) -> Result<Vec<FeatureMask>> {
    if y.is_empty() || cols == 0 {
        return Err(Error::EmptyInput("rfe training set is empty".into()));
    }
    if x.len() != y.len() * cols {
        return Err(Error::DimensionMismatch(format!(
            "{} values is not {} rows x {cols} columns",
            x.len(),
            y.len()
        )));
    }
    if step == 0 {
        return Err(Error::InvalidConfig("rfe step must be >= 1".into()));
    }
    if targets.is_empty() {
        return Err(Error::InvalidConfig("rfe needs at least one target size".into()));
    }
    for &t in targets {
        if t == 0 || t > cols {
            return Err(Error::InvalidConfig(format!(
                "rfe target {t} outside 1..={cols}"
            )));
        }
    }

    let rows = y.len();
    let smallest = *targets.iter().min().unwrap();
    let mut surviving: Vec<usize> = (0..cols).collect();
    let mut snapshots: Vec<(usize, FeatureMask)> = Vec::new();
    let mut iteration = 0u64;
    loop {
        for &t in targets {
            if t == surviving.len() && !snapshots.iter().any(|(s, _)| *s == t) {
                snapshots.push((t, FeatureMask::from_indices(cols, &surviving)));
            }
        }
        if surviving.len() <= smallest {
            break;
        }

        let mut sub = Vec::with_capacity(rows * surviving.len());
        for r in 0..rows {
            let row = &x[r * cols..(r + 1) * cols];
            sub.extend(surviving.iter().map(|&f| row[f]));
        }
        let cfg = ForestConfig::with_trees(forest_seed(seed, &[TAG_RFE_FIT, iteration]), RFE_TREES);
        let model = forest_fit(&sub, surviving.len(), y, &cfg)?;
        let importances = feature_importances(&model);

        // Next target below the current size bounds how far this pass may cut.
        let floor = targets
            .iter()
            .copied()
            .filter(|&t| t < surviving.len())
            .max()
            .unwrap_or(smallest);
        let drop_n = step.min(surviving.len() - floor);
        let mut ranked: Vec<(f64, usize)> = importances
            .iter()
            .zip(&surviving)
            .map(|(&imp, &f)| (imp, f))
            .collect();
        ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let dropped: Vec<usize> = ranked.iter().take(drop_n).map(|&(_, f)| f).collect();
        surviving.retain(|f| !dropped.contains(f));
        iteration += 1;
    }

    targets
        .iter()
        .map(|t| {
            snapshots
                .iter()
                .find(|(s, _)| s == t)
                .map(|(_, m)| m.clone())
                .ok_or_else(|| Error::InvalidConfig(format!("rfe never reached target {t}")))
        })
        .collect()
}

/// The candidate-size grid {5, 10, 20, 30, ..., d}, restricted to sizes <= d
/// and always containing d itself.
pub fn rfe_cv_grid(d: usize) -> Vec<usize> {
    let mut grid: Vec<usize> = [5usize, 10]
        .into_iter()
        .chain((2..).map(|i| i * 10))
        .take_while(|&s| s < d)
        .collect();
    grid.push(d);
    grid
}

/// RFE with the subset size chosen by stratified k-fold cross-validation.
/// Ties in mean accuracy resolve to the smaller size.
pub fn rfe_cv(x: &[f64], cols: usize, y: &[u16], folds: usize, seed: u64) -> Result<FeatureMask> {
    if folds < 2 {
        return Err(Error::InvalidConfig("rfe_cv needs at least 2 folds".into()));
    }
    if y.is_empty() || cols == 0 {
        return Err(Error::EmptyInput("rfe_cv training set is empty".into()));
    }
    if x.len() != y.len() * cols {
        return Err(Error::DimensionMismatch(format!(
            "{} values is not {} rows x {cols} columns",
            x.len(),
            y.len()
        )));
    }

    let fold_of = stratified_folds(y, folds, seed)?;
    let grid = rfe_cv_grid(cols);
    let mut mean_accuracy = vec![0.0f64; grid.len()];

    for fold in 0..folds {
        let train_rows: Vec<usize> = (0..y.len()).filter(|&r| fold_of[r] != fold).collect();
        let test_rows: Vec<usize> = (0..y.len()).filter(|&r| fold_of[r] == fold).collect();
        let gather = |rows: &[usize]| -> (Vec<f64>, Vec<u16>) {
            let mut gx = Vec::with_capacity(rows.len() * cols);
            let mut gy = Vec::with_capacity(rows.len());
            for &r in rows {
                gx.extend_from_slice(&x[r * cols..(r + 1) * cols]);
                gy.push(y[r]);
            }
            (gx, gy)
        };
        let (train_x, train_y) = gather(&train_rows);
        let (test_x, test_y) = gather(&test_rows);

        let masks = rfe_path(&train_x, cols, &train_y, &grid, 1, forest_seed(seed, &[fold as u64]))?;
        for (gi, mask) in masks.iter().enumerate() {
            let keep_train = select(&train_x, cols, &mask.bits);
            let keep_test = select(&test_x, cols, &mask.bits);
            let cfg = ForestConfig::with_trees(
                forest_seed(seed, &[TAG_CV_SCORE, fold as u64, grid[gi] as u64]),
                RFE_TREES,
            );
            let model = forest_fit(&keep_train, mask.count_ones(), &train_y, &cfg)?;
            let pred = forest_predict(&model, &keep_test)?;
            mean_accuracy[gi] += accuracy(&pred, &test_y)? / folds as f64;
        }
    }

    // Ascending grid: strict improvement keeps the smallest tied size.
    let mut best = 0usize;
    for (gi, &acc) in mean_accuracy.iter().enumerate() {
        if acc > mean_accuracy[best] {
            best = gi;
        }
    }
    rfe(x, cols, y, grid[best], 1, seed)
}

fn select(x: &[f64], cols: usize, bits: &[bool]) -> Vec<f64> {
    let rows = x.len() / cols;
    let keep: Vec<usize> = (0..cols).filter(|&j| bits[j]).collect();
    let mut out = Vec::with_capacity(rows * keep.len());
    for r in 0..rows {
        let row = &x[r * cols..(r + 1) * cols];
        out.extend(keep.iter().map(|&j| row[j]));
    }
    out
}

/// Round-robin deal of shuffled per-class indices; every class must have at
/// least `folds` rows.
fn stratified_folds(y: &[u16], folds: usize, seed: u64) -> Result<Vec<usize>> {
    let n_classes = y.iter().copied().max().unwrap_or(0) as usize + 1;
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (r, &label) in y.iter().enumerate() {
        by_class[label as usize].push(r);
    }
    let mut rng = seeds::stream_rng(seed, &[TAG_CV_FOLDS]);
    let mut fold_of = vec![0usize; y.len()];
    for (class, rows) in by_class.iter_mut().enumerate() {
        if rows.is_empty() {
            continue;
        }
        if rows.len() < folds {
            return Err(Error::Data(format!(
                "class {class} has {} rows, fewer than {folds} folds",
                rows.len()
            )));
        }
        rows.shuffle(&mut rng);
        for (i, &r) in rows.iter().enumerate() {
            fold_of[r] = i % folds;
        }
    }
    Ok(fold_of)
}
