//! k-nearest-neighbours classifier with majority vote.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distance used for neighbour ranking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Euclidean,
    /// Cosine distance, 1 - cosine similarity; zero vectors sit at distance 1.
    Cosine,
}

/// Stored training data; k-NN has no training phase beyond validation.
#[derive(Debug, Clone)]
pub struct KnnModel {
    x: Vec<f64>,
    cols: usize,
    y: Vec<u16>,
    k: usize,
    metric: Metric,
}

/// Validate and store the training set. `x` is row-major with `cols` columns.
pub fn knn_fit(x: Vec<f64>, cols: usize, y: Vec<u16>, k: usize, metric: Metric) -> Result<KnnModel> {
    if cols == 0 || y.is_empty() {
        return Err(Error::EmptyInput("k-NN training set is empty".into()));
    }
    if x.len() != cols * y.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} values is not {} rows x {cols} columns",
            x.len(),
            y.len()
        )));
    }
    if k == 0 || k > y.len() {
        return Err(Error::InvalidConfig(format!(
            "k = {k} must be in 1..={} (training size)",
            y.len()
        )));
    }
    Ok(KnnModel {
        x,
        cols,
        y,
        k,
        metric,
    })
}

/// Predict labels for row-major `queries`.
///
/// Majority vote over the k nearest rows; vote ties break toward the class
/// with the smallest summed distance, then toward the smaller class id.
pub fn knn_predict(model: &KnnModel, queries: &[f64]) -> Result<Vec<u16>> {
    if queries.len() % model.cols != 0 {
        return Err(Error::DimensionMismatch(format!(
            "query buffer of {} values is not a multiple of {} columns",
            queries.len(),
            model.cols
        )));
    }
    let n_queries = queries.len() / model.cols;
    (0..n_queries)
        .into_par_iter()
        .map(|q| {
            let row = &queries[q * model.cols..(q + 1) * model.cols];
            Ok(classify(model, row))
        })
        .collect()
}

fn classify(model: &KnnModel, query: &[f64]) -> u16 {
    let n = model.y.len();
    let mut dist: Vec<(f64, usize)> = (0..n)
        .map(|i| {
            let row = &model.x[i * model.cols..(i + 1) * model.cols];
            (distance(model.metric, query, row), i)
        })
        .collect();
    // Index tie-break keeps neighbour selection order-stable.
    dist.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let n_classes = model.y.iter().copied().max().unwrap_or(0) as usize + 1;
    let mut votes = vec![0u32; n_classes];
    let mut summed = vec![0.0f64; n_classes];
    for &(d, i) in dist.iter().take(model.k) {
        let c = model.y[i] as usize;
        votes[c] += 1;
        summed[c] += d;
    }
    let mut best: Option<usize> = None;
    for c in 0..n_classes {
        if votes[c] == 0 {
            continue;
        }
        best = match best {
            None => Some(c),
            Some(b) => {
                if votes[c] > votes[b] || (votes[c] == votes[b] && summed[c] < summed[b]) {
                    Some(c)
                } else {
                    Some(b)
                }
            }
        };
    }
    best.unwrap_or(0) as u16
}

fn distance(metric: Metric, a: &[f64], b: &[f64]) -> f64 {
    match metric {
        Metric::Euclidean => a
            .iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt(),
        Metric::Cosine => {
            let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
            for (x, y) in a.iter().zip(b) {
                dot += x * y;
                na += x * x;
                nb += y * y;
            }
            if na == 0.0 || nb == 0.0 {
                1.0
            } else {
                1.0 - dot / (na.sqrt() * nb.sqrt())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cluster_data() -> (Vec<f64>, Vec<u16>) {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..40 {
            let center = if i % 2 == 0 { -5.0 } else { 5.0 };
            x.push(center + rng.gen_range(-0.5..0.5));
            x.push(center + rng.gen_range(-0.5..0.5));
            y.push((i % 2) as u16);
        }
        (x, y)
    }

    #[test]
    fn separated_clusters_classify_perfectly() {
        let (x, y) = cluster_data();
        let model = knn_fit(x, 2, y, 3, Metric::Euclidean).unwrap();
        let pred = knn_predict(&model, &[-5.0, -5.0, 5.0, 5.0, -4.6, -5.2]).unwrap();
        assert_eq!(pred, vec![0, 1, 0]);
    }

    #[test]
    fn single_row_predicts_its_label() {
        let model = knn_fit(vec![1.0, 2.0], 2, vec![7], 1, Metric::Euclidean).unwrap();
        assert_eq!(knn_predict(&model, &[100.0, -3.0]).unwrap(), vec![7]);
    }

    #[test]
    fn exact_match_wins_with_k1() {
        let x = vec![0.0, 0.0, 1.0, 1.0, 2.0, 2.0];
        let model = knn_fit(x, 2, vec![0, 1, 2], 1, Metric::Euclidean).unwrap();
        assert_eq!(knn_predict(&model, &[1.0, 1.0]).unwrap(), vec![1]);
    }

    #[test]
    fn permutation_invariance() {
        let (x, y) = cluster_data();
        let queries: Vec<f64> = vec![-4.8, -5.1, 4.9, 5.3, 0.4, 0.1, -0.2, 0.3];
        let model = knn_fit(x.clone(), 2, y.clone(), 5, Metric::Euclidean).unwrap();
        let base = knn_predict(&model, &queries).unwrap();

        let mut order: Vec<usize> = (0..y.len()).collect();
        order.reverse();
        order.swap(3, 11);
        let px: Vec<f64> = order
            .iter()
            .flat_map(|&i| x[i * 2..i * 2 + 2].to_vec())
            .collect();
        let py: Vec<u16> = order.iter().map(|&i| y[i]).collect();
        let permuted = knn_fit(px, 2, py, 5, Metric::Euclidean).unwrap();
        assert_eq!(knn_predict(&permuted, &queries).unwrap(), base);
    }

    #[test]
    fn tie_breaks() {
        // Vote tie at k=2; class 1 is nearer, so it wins.
        let model = knn_fit(vec![0.0, 3.0], 1, vec![1, 0], 2, Metric::Euclidean).unwrap();
        assert_eq!(knn_predict(&model, &[1.0]).unwrap(), vec![1]);
        // Fully symmetric tie: smaller class id wins.
        let model = knn_fit(vec![0.0, 2.0], 1, vec![1, 0], 2, Metric::Euclidean).unwrap();
        assert_eq!(knn_predict(&model, &[1.0]).unwrap(), vec![0]);
    }

    #[test]
    fn cosine_metric_uses_direction() {
        // Same direction, different magnitude: cosine calls them identical.
        let x = vec![1.0, 0.0, 0.0, 1.0];
        let model = knn_fit(x, 2, vec![0, 1], 1, Metric::Cosine).unwrap();
        assert_eq!(knn_predict(&model, &[100.0, 1.0]).unwrap(), vec![0]);
        assert_eq!(knn_predict(&model, &[0.5, 60.0]).unwrap(), vec![1]);
    }

    #[test]
    fn validation_errors() {
        assert!(knn_fit(vec![], 2, vec![], 1, Metric::Euclidean).is_err());
        assert!(knn_fit(vec![1.0], 1, vec![0], 2, Metric::Euclidean).is_err());
        assert!(knn_fit(vec![1.0, 2.0], 2, vec![0, 1], 1, Metric::Euclidean).is_err());
        let model = knn_fit(vec![1.0, 2.0], 2, vec![0], 1, Metric::Euclidean).unwrap();
        assert!(knn_predict(&model, &[1.0]).is_err());
    }
}
