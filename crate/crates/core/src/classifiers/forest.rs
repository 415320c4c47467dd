//! Random forest of Gini decision trees with mean-decrease-in-impurity
//! feature importances.
//!
//! Trees grow unbounded in depth until pure or below the minimum split size,
//! each on a bootstrap sample, considering floor(sqrt(d)) random features per
//! node. Per-tree RNG streams derive from the forest seed, so tree-parallel
//! training stays deterministic.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::seeds;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub min_samples_split: usize,
    pub seed: u64,
}

impl ForestConfig {
    pub fn new(seed: u64) -> Self {
        ForestConfig {
            n_trees: 100,
            min_samples_split: 2,
            seed,
        }
    }

    pub fn with_trees(seed: u64, n_trees: usize) -> Self {
        ForestConfig {
            n_trees,
            ..ForestConfig::new(seed)
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Node {
    Split {
        feature: u32,
        threshold: f32,
        left: u32,
        right: u32,
    },
    Leaf(u16),
}

#[derive(Debug, Clone)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn predict(&self, row: &[f64]) -> u16 {
        let mut at = 0usize;
        loop {
            match self.nodes[at] {
                Node::Leaf(class) => return class,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if (row[feature as usize] as f32) < threshold {
                        left as usize
                    } else {
                        right as usize
                    };
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ForestModel {
    trees: Vec<Tree>,
    pub n_features: usize,
    pub n_classes: u16,
    importances: Vec<f64>,
}

/// Normalized mean-decrease-in-impurity importances; uniform when the forest
/// never split (single-class data).
pub fn feature_importances(model: &ForestModel) -> Vec<f64> {
    model.importances.clone()
}

/// Train a forest on row-major `x` with `cols` columns and labels `y`.
pub fn forest_fit(x: &[f64], cols: usize, y: &[u16], cfg: &ForestConfig) -> Result<ForestModel> {
    if y.is_empty() || cols == 0 {
        return Err(Error::EmptyInput("forest training set is empty".into()));
    }
    let rows = y.len();
    if x.len() != rows * cols {
        return Err(Error::DimensionMismatch(format!(
            "{} values is not {rows} rows x {cols} columns",
            x.len()
        )));
    }
    if cfg.n_trees == 0 {
        return Err(Error::InvalidConfig("forest needs at least one tree".into()));
    }
    let n_classes = y.iter().copied().max().unwrap_or(0) + 1;

    // Column-major f32 copy: node training scans one feature at a time.
    let mut xt = vec![0.0f32; rows * cols];
    for i in 0..rows {
        for j in 0..cols {
            xt[j * rows + i] = x[i * cols + j] as f32;
        }
    }

    let grown: Vec<(Tree, Vec<f64>)> = (0..cfg.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = seeds::stream_rng(cfg.seed, &[t as u64]);
            grow_tree(&xt, rows, cols, y, n_classes, cfg.min_samples_split, &mut rng)
        })
        .collect();

    let mut importances = vec![0.0; cols];
    let mut trees = Vec::with_capacity(cfg.n_trees);
    for (tree, imp) in grown {
        for (a, b) in importances.iter_mut().zip(&imp) {
            *a += b;
        }
        trees.push(tree);
    }
    let total: f64 = importances.iter().sum();
    if total > 0.0 {
        for v in &mut importances {
            *v /= total;
        }
    } else {
        importances = vec![1.0 / cols as f64; cols];
    }

    Ok(ForestModel {
        trees,
        n_features: cols,
        n_classes,
        importances,
    })
}

/// Majority vote across trees; ties go to the smaller class id.
pub fn forest_predict(model: &ForestModel, queries: &[f64]) -> Result<Vec<u16>> {
    if queries.len() % model.n_features != 0 {
        return Err(Error::DimensionMismatch(format!(
            "query buffer of {} values is not a multiple of {} columns",
            queries.len(),
            model.n_features
        )));
    }
    let n = queries.len() / model.n_features;
    (0..n)
        .into_par_iter()
        .map(|i| {
            let row = &queries[i * model.n_features..(i + 1) * model.n_features];
            let mut votes = vec![0u32; model.n_classes as usize];
            for tree in &model.trees {
                votes[tree.predict(row) as usize] += 1;
            }
            let mut best = 0usize;
            for (c, &v) in votes.iter().enumerate() {
                if v > votes[best] {
                    best = c;
                }
            }
            Ok(best as u16)
        })
        .collect()
}

struct NodeJob {
    slot: usize,
    lo: usize,
    hi: usize,
}

/// Monotone map from f32 total order to u32 order, so (value, label) pairs
/// can sort as plain integers in the split-scan hot loop.
#[inline]
fn ordered_bits(v: f32) -> u32 {
    let b = v.to_bits();
    if b & 0x8000_0000 != 0 {
        !b
    } else {
        b ^ 0x8000_0000
    }
}

#[inline]
fn from_ordered_bits(b: u32) -> f32 {
    if b & 0x8000_0000 != 0 {
        f32::from_bits(b ^ 0x8000_0000)
    } else {
        f32::from_bits(!b)
    }
}

fn grow_tree(
    xt: &[f32],
    rows: usize,
    cols: usize,
    y: &[u16],
    n_classes: u16,
    min_split: usize,
    rng: &mut ChaCha8Rng,
) -> (Tree, Vec<f64>) {
    let k = n_classes as usize;
    let mut importances = vec![0.0; cols];

    // Bootstrap sample of size n, stored as indices into the original rows.
    let mut idx: Vec<u32> = (0..rows).map(|_| rng.gen_range(0..rows) as u32).collect();

    let mtry = ((cols as f64).sqrt().floor() as usize).max(1);
    let mut feat_order: Vec<u32> = (0..cols as u32).collect();
    let mut counts = vec![0u64; k];
    let mut left_counts = vec![0u64; k];
    // Packed (ordered value bits << 16 | label); integer sort beats a
    // comparator sort here and leaves split choices unchanged, because no
    // threshold falls inside a run of equal values.
    let mut pairs: Vec<u64> = Vec::with_capacity(rows);

    let mut nodes = vec![Node::Leaf(0)];
    let mut stack = vec![NodeJob {
        slot: 0,
        lo: 0,
        hi: rows,
    }];

    while let Some(job) = stack.pop() {
        let n_node = job.hi - job.lo;
        counts.iter_mut().for_each(|c| *c = 0);
        for &r in &idx[job.lo..job.hi] {
            counts[y[r as usize] as usize] += 1;
        }
        let majority = counts
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .map(|(c, _)| c as u16)
            .unwrap_or(0);
        let pure = counts.iter().any(|&c| c as usize == n_node);
        if pure || n_node < min_split {
            nodes[job.slot] = Node::Leaf(majority);
            continue;
        }

        // Parent score: sum over classes of count^2 / n, the quantity any
        // accepted split must strictly improve.
        let parent_score: f64 = counts.iter().map(|&c| (c * c) as f64).sum::<f64>() / n_node as f64;

        let mut best: Option<(f64, u32, f32)> = None; // (score, feature, threshold)
        for pick in 0..mtry {
            let swap_with = rng.gen_range(pick..cols);
            feat_order.swap(pick, swap_with);
            let f = feat_order[pick];
            let col = &xt[f as usize * rows..(f as usize + 1) * rows];

            pairs.clear();
            for &r in &idx[job.lo..job.hi] {
                pairs.push(u64::from(ordered_bits(col[r as usize])) << 16 | u64::from(y[r as usize]));
            }
            pairs.sort_unstable();

            left_counts.iter_mut().for_each(|c| *c = 0);
            let mut ss_left = 0.0f64;
            let mut ss_right: f64 = counts.iter().map(|&c| (c * c) as f64).sum();
            for i in 1..n_node {
                let prev = pairs[i - 1];
                let c = (prev & 0xFFFF) as usize;
                // Incremental sum-of-squares updates as one row moves left.
                ss_left += (2 * left_counts[c] + 1) as f64;
                ss_right -= (2 * (counts[c] - left_counts[c]) - 1) as f64;
                left_counts[c] += 1;
                if pairs[i] >> 16 == prev >> 16 {
                    continue;
                }
                let v_prev = from_ordered_bits((prev >> 16) as u32);
                let v = from_ordered_bits((pairs[i] >> 16) as u32);
                if v == v_prev {
                    continue;
                }
                let score = ss_left / i as f64 + ss_right / (n_node - i) as f64;
                if best.map_or(true, |(s, _, _)| score > s) {
                    // The midpoint of adjacent representable values can round
                    // down to v_prev, which would leave the `< threshold` left
                    // partition empty; fall back to the upper value.
                    let midpoint = v_prev + (v - v_prev) / 2.0;
                    let threshold = if midpoint > v_prev { midpoint } else { v };
                    best = Some((score, f, threshold));
                }
            }
        }

        let accepted = best.filter(|&(score, _, _)| score > parent_score + 1e-9);
        let Some((score, feature, threshold)) = accepted else {
            nodes[job.slot] = Node::Leaf(majority);
            continue;
        };

        // Weighted impurity decrease, scaled by the node's sample fraction.
        let decrease = (score - parent_score) / rows as f64;
        debug_assert!(decrease > 0.0, "accepted split must have positive gain");
        importances[feature as usize] += decrease;

        // In-place partition of the index range.
        let col = &xt[feature as usize * rows..(feature as usize + 1) * rows];
        let mut mid = job.lo;
        for i in job.lo..job.hi {
            if col[idx[i] as usize] < threshold {
                idx.swap(i, mid);
                mid += 1;
            }
        }
        debug_assert!(mid > job.lo && mid < job.hi);

        let left_slot = nodes.len();
        nodes.push(Node::Leaf(0));
        let right_slot = nodes.len();
        nodes.push(Node::Leaf(0));
        nodes[job.slot] = Node::Split {
            feature,
            threshold,
            left: left_slot as u32,
            right: right_slot as u32,
        };
        stack.push(NodeJob {
            slot: right_slot,
            lo: mid,
            hi: job.hi,
        });
        stack.push(NodeJob {
            slot: left_slot,
            lo: job.lo,
            hi: mid,
        });
    }

    (Tree { nodes }, importances)
}
