//! Dual-model fitness: breathing-activity recognition vs. user
//! identification.
//!
//! `evaluate` trains a recognition forest on the training subjects and scores
//! it on the held-out group, then trains an identification forest on the
//! held-out group's sitting rows and scores it on the same subjects' lying
//! rows. The objective triple is (a_R, 1 - a_I, a_R - a_I), all maximized;
//! `suppress_activity` swaps the two accuracies for the reversed search.
//!
//! During evolution the held-out group is the validation group; final
//! reporting builds a separate context around the test group. The two uses
//! never share a context.
//!
//! `evaluate_surrogate` replaces each forest with PCA (5 dims, fitted per
//! task on the masked training rows) followed by 3-NN, trading accuracy
//! fidelity for per-generation speed.

use std::collections::HashMap;
use std::sync::Mutex;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::classifiers::{forest_fit, forest_predict, knn_fit, knn_predict, ForestConfig, Metric};
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::nsga2::{FeatureMask, ObjectiveMode, PENALTY};
use crate::preprocess::{apply_scaler, fit_scaler, impute};
use crate::sigsynth::{Activity, Position};

const TAG_REC_FOREST: u64 = 0x72656366; // recognition forest stream
const TAG_ID_FOREST: u64 = 0x69646677; // identification forest stream

/// Knobs for building a [`FitnessContext`]. `seed` pins every stochastic
/// component so fitness is a pure function of the mask.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitnessConfig {
    pub seed: u64,
    #[serde(default)]
    pub objective_mode: ObjectiveMode,
    #[serde(default)]
    pub surrogate: bool,
    #[serde(default = "default_pca_dims")]
    pub pca_dims: usize,
    /// Trees per forest during evolution; reporting protocols use their own
    /// (larger) forests.
    #[serde(default = "default_fitness_trees")]
    pub fitness_trees: usize,
    #[serde(default = "default_knn_k")]
    pub knn_k: usize,
}

fn default_pca_dims() -> usize {
    5
}

fn default_fitness_trees() -> usize {
    50
}

fn default_knn_k() -> usize {
    3
}

impl FitnessConfig {
    pub fn new(seed: u64) -> Self {
        FitnessConfig {
            seed,
            objective_mode: ObjectiveMode::default(),
            surrogate: false,
            pca_dims: default_pca_dims(),
            fitness_trees: default_fitness_trees(),
            knn_k: default_knn_k(),
        }
    }
}

/// Immutable evaluation snapshot: pre-imputed, pre-standardized splits for
/// both tasks plus a memo of (a_R, a_I) per mask. Safe to share across
/// threads; evaluations are pure in the mask.
pub struct FitnessContext {
    rec_train: FeatureMatrix,
    rec_train_y: Vec<u16>,
    rec_eval: FeatureMatrix,
    rec_eval_y: Vec<u16>,
    id_train: FeatureMatrix,
    id_train_y: Vec<u16>,
    id_eval: FeatureMatrix,
    id_eval_y: Vec<u16>,
    /// Sorted held-out ids; identification class i is `heldout_subjects[i]`.
    heldout_subjects: Vec<u32>,
    config: FitnessConfig,
    cache: Mutex<HashMap<Vec<bool>, (f64, f64)>>,
}

/// Per-row predictions and truths from one full evaluation.
#[derive(Debug, Clone)]
pub struct DetailedEvaluation {
    pub rec_pred: Vec<u16>,
    pub rec_truth: Vec<u16>,
    pub id_pred: Vec<u16>,
    pub id_truth: Vec<u16>,
    /// Identification class order: class i is this subject id.
    pub id_subjects: Vec<u32>,
}

/// Class id of an activity: its position in [`Activity::ALL`].
pub fn activity_class(a: Activity) -> u16 {
    Activity::ALL.iter().position(|&x| x == a).unwrap() as u16
}

impl FitnessContext {
    /// Build a context from an extracted feature matrix.
    ///
    /// `train_subjects` feed the recognition model; `heldout_subjects` (the
    /// validation group during evolution, the test group for reporting)
    /// provide the recognition evaluation rows and both identification
    /// splits. Each split is imputed independently and standardized with
    /// statistics fitted on the recognition training rows only.
    pub fn new(
        features: &FeatureMatrix,
        train_subjects: &[u32],
        heldout_subjects: &[u32],
        config: FitnessConfig,
    ) -> Result<Self> {
        if train_subjects.is_empty() || heldout_subjects.is_empty() {
            return Err(Error::EmptyInput("subject split is empty".into()));
        }
        if train_subjects.iter().any(|s| heldout_subjects.contains(s)) {
            return Err(Error::InvalidConfig(
                "train and held-out subject sets overlap".into(),
            ));
        }
        if config.fitness_trees == 0 {
            return Err(Error::InvalidConfig("fitness_trees must be >= 1".into()));
        }

        let mut rec_train = features.filter_rows(|m| train_subjects.contains(&m.subject_id));
        let mut rec_eval = features.filter_rows(|m| heldout_subjects.contains(&m.subject_id));
        let mut id_train = features.filter_rows(|m| {
            heldout_subjects.contains(&m.subject_id) && m.position == Position::Sitting
        });
        let mut id_eval = features.filter_rows(|m| {
            heldout_subjects.contains(&m.subject_id) && m.position == Position::Lying
        });
        for (split, name) in [
            (&rec_train, "recognition train"),
            (&rec_eval, "recognition eval"),
            (&id_train, "identification train (sitting)"),
            (&id_eval, "identification eval (lying)"),
        ] {
            if split.n_rows() == 0 {
                return Err(Error::Data(format!("{name} split has no rows")));
            }
        }

        impute(&mut rec_train);
        let scaler = fit_scaler(&rec_train)?;
        apply_scaler(&scaler, &mut rec_train)?;
        for split in [&mut rec_eval, &mut id_train, &mut id_eval] {
            impute(split);
            apply_scaler(&scaler, split)?;
        }

        let mut id_classes: Vec<u32> = heldout_subjects.to_vec();
        id_classes.sort_unstable();
        let subject_class = |id: u32| -> u16 {
            id_classes.iter().position(|&s| s == id).unwrap() as u16
        };

        let rec_train_y = rec_train.meta.iter().map(|m| activity_class(m.activity)).collect();
        let rec_eval_y = rec_eval.meta.iter().map(|m| activity_class(m.activity)).collect();
        let id_train_y = id_train.meta.iter().map(|m| subject_class(m.subject_id)).collect();
        let id_eval_y = id_eval.meta.iter().map(|m| subject_class(m.subject_id)).collect();

        Ok(FitnessContext {
            rec_train,
            rec_train_y,
            rec_eval,
            rec_eval_y,
            id_train,
            id_train_y,
            id_eval,
            id_eval_y,
            heldout_subjects: id_classes,
            config,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn n_features(&self) -> usize {
        self.rec_train.n_cols()
    }

    pub fn config(&self) -> &FitnessConfig {
        &self.config
    }

    /// Number of distinct masks evaluated so far.
    pub fn cached_evaluations(&self) -> usize {
        self.cache.lock().unwrap().len()
    }

    /// Objective triple for `mask`, routed through the surrogate when the
    /// config asks for it. Empty masks take the penalty triple.
    pub fn objectives(&self, mask: &FeatureMask) -> Result<[f64; 3]> {
        if self.config.surrogate {
            self.evaluate_surrogate(mask)
        } else {
            self.evaluate(mask)
        }
    }

    /// Full fitness path: one forest per task on the masked columns.
    pub fn evaluate(&self, mask: &FeatureMask) -> Result<[f64; 3]> {
        self.evaluate_with(mask, Self::accuracies_full)
    }

    /// Surrogate path: PCA to `pca_dims` (clamped to the masked width)
    /// followed by k-NN, per task.
    pub fn evaluate_surrogate(&self, mask: &FeatureMask) -> Result<[f64; 3]> {
        self.evaluate_with(mask, Self::accuracies_surrogate)
    }

    fn evaluate_with(
        &self,
        mask: &FeatureMask,
        accuracies: fn(&Self, &FeatureMask) -> Result<(f64, f64)>,
    ) -> Result<[f64; 3]> {
        if mask.len() != self.n_features() {
            return Err(Error::DimensionMismatch(format!(
                "mask has {} bits, catalog has {}",
                mask.len(),
                self.n_features()
            )));
        }
        if mask.count_ones() == 0 {
            return Ok(PENALTY);
        }
        if let Some(&(a_r, a_i)) = self.cache.lock().unwrap().get(&mask.bits) {
            return Ok(self.compose(a_r, a_i));
        }
        let (a_r, a_i) = accuracies(self, mask)?;
        debug_assert!((0.0..=1.0).contains(&a_r) && (0.0..=1.0).contains(&a_i));
        self.cache.lock().unwrap().insert(mask.bits.clone(), (a_r, a_i));
        Ok(self.compose(a_r, a_i))
    }

    fn compose(&self, a_r: f64, a_i: f64) -> [f64; 3] {
        match self.config.objective_mode {
            ObjectiveMode::SuppressIdentity => [a_r, 1.0 - a_i, a_r - a_i],
            ObjectiveMode::SuppressActivity => [a_i, 1.0 - a_r, a_i - a_r],
        }
    }

    /// Raw predictions and truths for both tasks (full forest path, no
    /// memoization); reporting protocols build confusion matrices from this.
    pub fn evaluate_detailed(&self, mask: &FeatureMask) -> Result<DetailedEvaluation> {
        if mask.len() != self.n_features() {
            return Err(Error::DimensionMismatch(format!(
                "mask has {} bits, catalog has {}",
                mask.len(),
                self.n_features()
            )));
        }
        if mask.count_ones() == 0 {
            return Err(Error::EmptyInput("mask selects no features".into()));
        }
        let rec_pred = self.forest_predictions(
            mask,
            &self.rec_train,
            &self.rec_train_y,
            &self.rec_eval,
            TAG_REC_FOREST,
        )?;
        let id_pred = self.forest_predictions(
            mask,
            &self.id_train,
            &self.id_train_y,
            &self.id_eval,
            TAG_ID_FOREST,
        )?;
        Ok(DetailedEvaluation {
            rec_pred,
            rec_truth: self.rec_eval_y.clone(),
            id_pred,
            id_truth: self.id_eval_y.clone(),
            id_subjects: self.heldout_subjects.clone(),
        })
    }

    fn accuracies_full(&self, mask: &FeatureMask) -> Result<(f64, f64)> {
        let rec_pred = self.forest_predictions(
            mask,
            &self.rec_train,
            &self.rec_train_y,
            &self.rec_eval,
            TAG_REC_FOREST,
        )?;
        let id_pred = self.forest_predictions(
            mask,
            &self.id_train,
            &self.id_train_y,
            &self.id_eval,
            TAG_ID_FOREST,
        )?;
        let a_r = crate::classifiers::accuracy(&rec_pred, &self.rec_eval_y)?;
        let a_i = crate::classifiers::accuracy(&id_pred, &self.id_eval_y)?;
        Ok((a_r, a_i))
    }

    fn forest_predictions(
        &self,
        mask: &FeatureMask,
        train: &FeatureMatrix,
        train_y: &[u16],
        eval: &FeatureMatrix,
        tag: u64,
    ) -> Result<Vec<u16>> {
        let train_sel = train.select_columns(&mask.bits)?;
        let eval_sel = eval.select_columns(&mask.bits)?;
        let forest_seed = crate::seeds::derive_seed(self.config.seed, &[tag]);
        let cfg = ForestConfig::with_trees(
            u64::from_le_bytes(forest_seed[..8].try_into().unwrap()),
            self.config.fitness_trees,
        );
        let model = forest_fit(&train_sel.data, train_sel.n_cols(), train_y, &cfg)?;
        forest_predict(&model, &eval_sel.data)
    }

    fn accuracies_surrogate(&self, mask: &FeatureMask) -> Result<(f64, f64)> {
        let a_r = self.surrogate_accuracy(
            mask,
            &self.rec_train,
            &self.rec_train_y,
            &self.rec_eval,
            &self.rec_eval_y,
        )?;
        let a_i = self.surrogate_accuracy(
            mask,
            &self.id_train,
            &self.id_train_y,
            &self.id_eval,
            &self.id_eval_y,
        )?;
        Ok((a_r, a_i))
    }

    fn surrogate_accuracy(
        &self,
        mask: &FeatureMask,
        train: &FeatureMatrix,
        train_y: &[u16],
        eval: &FeatureMatrix,
        eval_y: &[u16],
    ) -> Result<f64> {
        let train_sel = train.select_columns(&mask.bits)?;
        let eval_sel = eval.select_columns(&mask.bits)?;
        let dims = self
            .config
            .pca_dims
            .min(train_sel.n_cols())
            .min(train_sel.n_rows());
        let pca = pca_fit(&train_sel.data, train_sel.n_cols(), dims)?;
        let train_red = pca_transform(&pca, &train_sel.data)?;
        let eval_red = pca_transform(&pca, &eval_sel.data)?;
        let k = self.config.knn_k.min(train_sel.n_rows());
        let model = knn_fit(train_red, dims, train_y.to_vec(), k, Metric::Euclidean)?;
        let pred = knn_predict(&model, &eval_red)?;
        crate::classifiers::accuracy(&pred, eval_y)
    }
}

/// Principal-component basis fitted on one task's masked training rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PcaModel {
    /// Column means of the fitting data.
    pub means: Vec<f64>,
    /// d x dims, column-major: column j is the j-th component (orthonormal).
    pub components: Vec<f64>,
    pub dims: usize,
    /// Fraction of total variance per kept component, non-increasing.
    pub explained_variance_ratio: Vec<f64>,
}

/// Eigendecomposition of the sample covariance (divisor n - 1) of mean-
/// centered `x`. Components are sorted by descending eigenvalue; each is
/// oriented so its largest-magnitude loading is positive.
pub fn pca_fit(x: &[f64], cols: usize, dims: usize) -> Result<PcaModel> {
    if cols == 0 || x.is_empty() {
        return Err(Error::EmptyInput("pca input is empty".into()));
    }
    if x.len() % cols != 0 {
        return Err(Error::DimensionMismatch(format!(
            "{} values is not a multiple of {cols} columns",
            x.len()
        )));
    }
    let rows = x.len() / cols;
    if dims == 0 || dims > rows.min(cols) {
        return Err(Error::InvalidConfig(format!(
            "pca dims {dims} outside 1..=min(rows {rows}, cols {cols})"
        )));
    }

    let matrix = DMatrix::from_row_slice(rows, cols, x);
    let means: Vec<f64> = (0..cols).map(|j| matrix.column(j).mean()).collect();
    let mut centered = matrix;
    for j in 0..cols {
        let mu = means[j];
        centered.column_mut(j).iter_mut().for_each(|v| *v -= mu);
    }
    let divisor = if rows > 1 { (rows - 1) as f64 } else { 1.0 };
    let cov = centered.transpose() * &centered / divisor;
    let eig = cov.symmetric_eigen();

    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let total: f64 = eig.eigenvalues.iter().map(|&l| l.max(0.0)).sum();

    let mut components = Vec::with_capacity(cols * dims);
    let mut ratios = Vec::with_capacity(dims);
    for &e in order.iter().take(dims) {
        let mut comp: DVector<f64> = eig.eigenvectors.column(e).into();
        let lead = comp
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()).then(b.0.cmp(&a.0)))
            .map(|(i, _)| i)
            .unwrap();
        if comp[lead] < 0.0 {
            comp.neg_mut();
        }
        components.extend(comp.iter().copied());
        ratios.push(if total > 0.0 {
            eig.eigenvalues[e].max(0.0) / total
        } else {
            0.0
        });
    }
    Ok(PcaModel {
        means,
        components,
        dims,
        explained_variance_ratio: ratios,
    })
}

/// Project row-major `rows` (same width as the fitting data) onto the model
/// basis; returns row-major n x dims.
pub fn pca_transform(model: &PcaModel, rows: &[f64]) -> Result<Vec<f64>> {
    let cols = model.means.len();
    if rows.len() % cols != 0 {
        return Err(Error::DimensionMismatch(format!(
            "{} values is not a multiple of {cols} columns",
            rows.len()
        )));
    }
    let n = rows.len() / cols;
    let mut out = vec![0.0; n * model.dims];
    for i in 0..n {
        let row = &rows[i * cols..(i + 1) * cols];
        for j in 0..model.dims {
            let comp = &model.components[j * cols..(j + 1) * cols];
            out[i * model.dims + j] = row
                .iter()
                .zip(comp)
                .zip(&model.means)
                .map(|((&v, &c), &m)| (v - m) * c)
                .sum();
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{FeatureVector, RowMeta};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Toy matrix: feature 0 encodes the activity, feature 1 the subject,
    /// feature 2 is noise. Subjects 0..4 train, 4..6 held out.
    fn toy_features() -> FeatureMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let names = vec!["f_act".into(), "f_subj".into(), "f_noise".into()];
        let mut rows = Vec::new();
        for subject_id in 0..6u32 {
            for (ai, &activity) in Activity::ALL.iter().enumerate().take(2) {
                for &position in &[Position::Sitting, Position::Lying] {
                    for _ in 0..4 {
                        rows.push(FeatureVector {
                            values: vec![
                                ai as f64 + rng.gen_range(-0.05..0.05),
                                subject_id as f64 + rng.gen_range(-0.05..0.05),
                                rng.gen_range(-1.0..1.0),
                            ],
                            meta: RowMeta {
                                subject_id,
                                activity,
                                position,
                            },
                        });
                    }
                }
            }
        }
        FeatureMatrix::from_rows(names, rows).unwrap()
    }

    fn toy_context(config: FitnessConfig) -> FitnessContext {
        FitnessContext::new(&toy_features(), &[0, 1, 2, 3], &[4, 5], config).unwrap()
    }

    #[test]
    fn objective_arithmetic_identities() {
        let ctx = toy_context(FitnessConfig::new(5));
        let [o1, o2, o3] = ctx.evaluate(&FeatureMask::full(3)).unwrap();
        // Recover the raw accuracies and check the exact identities.
        let (a_r, a_i) = (o1, 1.0 - o2);
        assert_eq!(o2, 1.0 - a_i);
        assert_eq!(o3, a_r - a_i);
        assert!((0.0..=1.0).contains(&a_r));
        assert!((0.0..=1.0).contains(&a_i));
    }

    #[test]
    fn informative_masks_steer_each_task() {
        let ctx = toy_context(FitnessConfig::new(5));
        // Activity feature only: recognition near-perfect, identification
        // near chance (two held-out subjects).
        let [o1, o2, _] = ctx
            .evaluate(&FeatureMask::new(vec![true, false, false]))
            .unwrap();
        assert!(o1 > 0.9, "a_R {o1}");
        assert!(1.0 - o2 < 0.8, "a_I {}", 1.0 - o2);
        // Subject feature only: identification near-perfect.
        let [p1, p2, _] = ctx
            .evaluate(&FeatureMask::new(vec![false, true, false]))
            .unwrap();
        assert!(1.0 - p2 > 0.9, "a_I {}", 1.0 - p2);
        assert!(p1 < 0.8, "a_R {p1}");
    }

    #[test]
    fn suppress_activity_swaps_roles() {
        let forward = toy_context(FitnessConfig::new(5));
        let mut cfg = FitnessConfig::new(5);
        cfg.objective_mode = ObjectiveMode::SuppressActivity;
        let reversed = toy_context(cfg);
        let mask = FeatureMask::full(3);
        let [f1, f2, f3] = forward.evaluate(&mask).unwrap();
        let [r1, r2, r3] = reversed.evaluate(&mask).unwrap();
        let (a_r, a_i) = (f1, 1.0 - f2);
        assert_eq!(r1, a_i);
        assert_eq!(r2, 1.0 - a_r);
        assert_eq!(r3, a_i - a_r);
        assert_eq!(r3, -f3);
    }

    #[test]
    fn empty_mask_takes_penalty() {
        let ctx = toy_context(FitnessConfig::new(5));
        assert_eq!(ctx.evaluate(&FeatureMask::new(vec![false; 3])).unwrap(), PENALTY);
        assert_eq!(
            ctx.evaluate_surrogate(&FeatureMask::new(vec![false; 3])).unwrap(),
            PENALTY
        );
        assert_eq!(ctx.cached_evaluations(), 0);
    }

    #[test]
    fn evaluation_is_memoized_and_deterministic() {
        let ctx = toy_context(FitnessConfig::new(5));
        let mask = FeatureMask::full(3);
        let a = ctx.evaluate(&mask).unwrap();
        assert_eq!(ctx.cached_evaluations(), 1);
        let b = ctx.evaluate(&mask).unwrap();
        assert_eq!(ctx.cached_evaluations(), 1);
        assert_eq!(a, b);
        // A fresh context reproduces the same triple.
        let again = toy_context(FitnessConfig::new(5));
        assert_eq!(again.evaluate(&mask).unwrap(), a);
    }

    #[test]
    fn surrogate_handles_narrow_masks() {
        let mut cfg = FitnessConfig::new(5);
        cfg.surrogate = true;
        let ctx = toy_context(cfg);
        // 2 masked columns < pca_dims: clamped, no error.
        let obj = ctx
            .objectives(&FeatureMask::new(vec![true, true, false]))
            .unwrap();
        assert!(obj[0] > 0.9, "surrogate a_R {}", obj[0]);
    }

    #[test]
    fn context_rejects_overlapping_or_empty_splits() {
        let features = toy_features();
        assert!(FitnessContext::new(&features, &[0, 1], &[1, 2], FitnessConfig::new(1)).is_err());
        assert!(FitnessContext::new(&features, &[], &[4], FitnessConfig::new(1)).is_err());
        // Held-out subject with no rows at all.
        assert!(FitnessContext::new(&features, &[0, 1], &[9], FitnessConfig::new(1)).is_err());
    }

    #[test]
    fn mask_width_checked() {
        let ctx = toy_context(FitnessConfig::new(5));
        assert!(ctx.evaluate(&FeatureMask::full(5)).is_err());
    }

    #[test]
    fn pca_rank_two_plane_explains_everything() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (rows, cols) = (60, 10);
        let u: Vec<f64> = (0..cols).map(|j| (j as f64 + 1.0).sin()).collect();
        let v: Vec<f64> = (0..cols).map(|j| (j as f64 * 0.7).cos()).collect();
        let mut x = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let (a, b): (f64, f64) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            for j in 0..cols {
                x.push(a * u[j] + b * v[j]);
            }
        }
        let model = pca_fit(&x, cols, 2).unwrap();
        let sum: f64 = model.explained_variance_ratio.iter().sum();
        assert_relative_eq!(sum, 1.0, epsilon = 1e-9);
        assert!(model.explained_variance_ratio[0] >= model.explained_variance_ratio[1]);
    }

    #[test]
    fn pca_full_rank_preserves_distances() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (rows, cols) = (40, 6);
        let x: Vec<f64> = (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let model = pca_fit(&x, cols, cols).unwrap();
        let z = pca_transform(&model, &x).unwrap();
        let dist = |buf: &[f64], w: usize, i: usize, j: usize| -> f64 {
            (0..w)
                .map(|c| (buf[i * w + c] - buf[j * w + c]).powi(2))
                .sum::<f64>()
                .sqrt()
        };
        for i in 0..10 {
            for j in (i + 1)..10 {
                assert_relative_eq!(
                    dist(&x, cols, i, j),
                    dist(&z, cols, i, j),
                    epsilon = 1e-8
                );
            }
        }
    }

    #[test]
    fn pca_components_orthonormal_and_sign_fixed() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let (rows, cols, dims) = (50, 8, 4);
        let x: Vec<f64> = (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let model = pca_fit(&x, cols, dims).unwrap();
        for a in 0..dims {
            let ca = &model.components[a * cols..(a + 1) * cols];
            for b in 0..dims {
                let cb = &model.components[b * cols..(b + 1) * cols];
                let dot: f64 = ca.iter().zip(cb).map(|(x, y)| x * y).sum();
                let expect = if a == b { 1.0 } else { 0.0 };
                assert_relative_eq!(dot, expect, epsilon = 1e-8);
            }
            let lead = ca.iter().cloned().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
            assert!(lead > 0.0, "component {a} leading loading {lead}");
        }
        for w in model.explained_variance_ratio.windows(2) {
            assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn pca_dimension_errors() {
        let x = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        assert!(pca_fit(&x, 2, 3).is_err()); // dims > cols
        assert!(pca_fit(&x, 3, 3).is_err()); // dims > rows
        assert!(pca_fit(&x, 2, 0).is_err());
        let model = pca_fit(&x, 2, 1).unwrap();
        assert!(pca_transform(&model, &[1.0]).is_err());
    }
}
