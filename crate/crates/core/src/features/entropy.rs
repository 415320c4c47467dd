//! Entropy features: permutation, approximate, sample, histogram, and SVD.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::features::spectral::entropy_of_distribution;
use crate::features::stats;

/// Shannon entropy of the ordinal-pattern distribution.
///
/// Ties inside a pattern are broken by index order, so a constant signal maps
/// to the single identity pattern and returns 0. Normalized by ln(order!)
/// when `normalized`.
pub fn permutation_entropy(x: &[f64], order: usize, delay: usize, normalized: bool) -> Result<f64> {
    if order < 2 || order > 8 || delay == 0 {
        return Err(Error::InvalidConfig(format!(
            "permutation entropy needs 2 <= order <= 8 and delay >= 1, got order={order} delay={delay}"
        )));
    }
    if x.len() <= order * delay {
        return Err(Error::TooShort {
            need: order * delay + 1,
            got: x.len(),
        });
    }
    let n_patterns: usize = (1..=order).product();
    let mut counts = vec![0.0f64; n_patterns];
    let span = (order - 1) * delay;
    let mut ranks: Vec<usize> = Vec::with_capacity(order);
    for start in 0..(x.len() - span) {
        ranks.clear();
        ranks.extend(0..order);
        // Stable sort by value keeps index order on ties.
        ranks.sort_by(|&a, &b| {
            x[start + a * delay]
                .partial_cmp(&x[start + b * delay])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        counts[lehmer_code(&ranks)] += 1.0;
    }
    let h = entropy_of_distribution(&counts, false);
    if normalized {
        let max_h = (n_patterns as f64).ln();
        Ok(if max_h > 0.0 { h / max_h } else { 0.0 })
    } else {
        Ok(h)
    }
}

/// Bijective encoding of a permutation into 0..order!.
fn lehmer_code(perm: &[usize]) -> usize {
    let mut code = 0usize;
    for (i, &p) in perm.iter().enumerate() {
        let smaller_after = perm[i + 1..].iter().filter(|&&q| q < p).count();
        code = code * (perm.len() - i) + smaller_after;
    }
    code
}

/// Approximate entropy with Chebyshev distance and `r = r_factor * std(x)`.
pub fn approx_entropy(x: &[f64], m: usize, r_factor: f64) -> Result<f64> {
    check_template_input(x, m)?;
    let r = r_factor * stats::std(x);
    Ok(phi(x, m, r) - phi(x, m + 1, r))
}

fn phi(x: &[f64], k: usize, r: f64) -> f64 {
    let n_templates = x.len() - k + 1;
    let mut sum = 0.0;
    for i in 0..n_templates {
        let mut count = 0usize;
        for j in 0..n_templates {
            if chebyshev_match(x, i, j, k, r) {
                count += 1;
            }
        }
        sum += (count as f64 / n_templates as f64).ln();
    }
    sum / n_templates as f64
}

/// Sample entropy with Chebyshev distance and `r = r_factor * std(x)`,
/// excluding self-matches. Zero matches at length m+1 (or m) return the
/// +infinity sentinel, later handled by imputation.
pub fn sample_entropy(x: &[f64], m: usize, r_factor: f64) -> Result<f64> {
    check_template_input(x, m)?;
    let r = r_factor * stats::std(x);
    let n_templates = x.len() - m; // same template count for lengths m and m+1
    let mut b = 0u64;
    let mut a = 0u64;
    for i in 0..n_templates {
        for j in (i + 1)..n_templates {
            if chebyshev_match(x, i, j, m, r) {
                b += 1;
                if (x[i + m] - x[j + m]).abs() <= r {
                    a += 1;
                }
            }
        }
    }
    if a == 0 || b == 0 {
        return Ok(f64::INFINITY);
    }
    Ok(-((a as f64 / b as f64).ln()))
}

fn chebyshev_match(x: &[f64], i: usize, j: usize, k: usize, r: f64) -> bool {
    (0..k).all(|t| (x[i + t] - x[j + t]).abs() <= r)
}

fn check_template_input(x: &[f64], m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidConfig("entropy order m must be >= 1".into()));
    }
    if x.len() < m + 2 {
        return Err(Error::TooShort {
            need: m + 2,
            got: x.len(),
        });
    }
    Ok(())
}

/// Shannon entropy of a 10-bin (by default) equal-width histogram,
/// normalized by ln(bins). Constant input -> 0.
pub fn hist_entropy(x: &[f64], bins: usize) -> f64 {
    if x.is_empty() || bins < 2 {
        return 0.0;
    }
    let lo = stats::min(x);
    let hi = stats::max(x);
    if !(hi > lo) {
        return 0.0;
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0.0f64; bins];
    for &v in x {
        let idx = (((v - lo) / width) as usize).min(bins - 1);
        counts[idx] += 1.0;
    }
    entropy_of_distribution(&counts, true)
}

/// Entropy of normalized singular values of the (order, delay) delay
/// embedding, normalized by ln(order). Zero signal -> 0.
pub fn svd_entropy(x: &[f64], order: usize, delay: usize, normalized: bool) -> f64 {
    let span = (order - 1) * delay;
    if order < 2 || delay == 0 || x.len() <= span {
        return 0.0;
    }
    let rows = x.len() - span;
    let embedding = DMatrix::from_fn(rows, order, |r, c| x[r + c * delay]);
    let gram = embedding.transpose() * &embedding;
    let eig = gram.symmetric_eigen();
    let sigma: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
    let total: f64 = sigma.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let mut h = 0.0;
    for &s in &sigma {
        if s > 0.0 {
            let p = s / total;
            h -= p * p.ln();
        }
    }
    if normalized {
        h / (order as f64).ln()
    } else {
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn permutation_entropy_extremes() {
        let increasing: Vec<f64> = (0..100).map(|i| i as f64).collect();
        assert_eq!(permutation_entropy(&increasing, 3, 1, true).unwrap(), 0.0);
        assert_eq!(permutation_entropy(&[5.0; 50], 3, 1, true).unwrap(), 0.0);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let noise: Vec<f64> = (0..10000).map(|_| rng.gen::<f64>()).collect();
        let h = permutation_entropy(&noise, 3, 1, true).unwrap();
        assert!((h - 1.0).abs() < 0.02, "got {h}");
    }

    #[test]
    fn permutation_entropy_too_short() {
        assert!(matches!(
            permutation_entropy(&[1.0, 2.0, 3.0], 3, 1, true),
            Err(Error::TooShort { .. })
        ));
    }

    #[test]
    fn lehmer_codes_are_distinct() {
        let mut seen = std::collections::HashSet::new();
        let perms3 = [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        for p in perms3 {
            assert!(seen.insert(lehmer_code(&p)));
            assert!(lehmer_code(&p) < 6);
        }
    }

    #[test]
    fn sample_entropy_regular_vs_noise() {
        assert_eq!(sample_entropy(&[1.0; 64], 2, 0.2).unwrap(), 0.0);

        // Long-period square wave: transition templates are rare, so the
        // m -> m+1 extension almost always succeeds.
        let square: Vec<f64> = (0..512)
            .map(|i| if (i / 32) % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let s = sample_entropy(&square, 2, 0.2).unwrap();
        assert!(s < 0.1, "long square wave should be near 0, got {s}");

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let noise: Vec<f64> = (0..200).map(|_| rng.gen::<f64>()).collect();
        assert!(sample_entropy(&noise, 2, 0.2).unwrap() > 1.0);
    }

    #[test]
    fn approx_entropy_basics() {
        let a = approx_entropy(&[1.0; 64], 2, 0.2).unwrap();
        assert_abs_diff_eq!(a, 0.0, epsilon = 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let noise: Vec<f64> = (0..200).map(|_| rng.gen::<f64>()).collect();
        let sine: Vec<f64> = (0..200).map(|i| (0.3 * i as f64).sin()).collect();
        assert!(approx_entropy(&noise, 2, 0.2).unwrap() > approx_entropy(&sine, 2, 0.2).unwrap());
    }

    #[test]
    fn sample_entropy_infinity_sentinel() {
        // Ramp: every pair of distinct templates differs by >= 1, while
        // r = 0.2 * std(0..15) is below 1, so no matches exist at all.
        let x: Vec<f64> = (0..16).map(|i| i as f64).collect();
        assert!(sample_entropy(&x, 2, 0.2).unwrap().is_infinite());
    }

    #[test]
    fn hist_entropy_extremes() {
        assert_eq!(hist_entropy(&[2.0; 32], 10), 0.0);
        let uniform: Vec<f64> = (0..10000).map(|i| (i % 100) as f64).collect();
        assert!(hist_entropy(&uniform, 10) > 0.99);
    }

    #[test]
    fn svd_entropy_orders_signals() {
        let line: Vec<f64> = (0..200).map(|i| i as f64).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let noise: Vec<f64> = (0..200).map(|_| rng.gen::<f64>()).collect();
        assert!(svd_entropy(&noise, 3, 1, true) > svd_entropy(&line, 3, 1, true));
        assert_eq!(svd_entropy(&[0.0; 50], 3, 1, true), 0.0);
    }
}
