//! Fractal-dimension features: Katz, Higuchi, Petrosian.

use crate::error::{Error, Result};

/// Katz fractal dimension, amplitude-only curve-length convention:
/// `log10(n) / (log10(n) + log10(d/L))` with `n` the number of steps,
/// `L` the summed absolute first differences, and `d` the maximum distance
/// from the first sample. Constant signals (L = 0) return 1.0.
pub fn katz_fd(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 1.0;
    }
    let length: f64 = x.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    if length == 0.0 {
        return 1.0;
    }
    let d = x
        .iter()
        .map(|&v| (v - x[0]).abs())
        .fold(0.0f64, f64::max);
    let n = (x.len() - 1) as f64;
    let denom = n.log10() + (d / length).log10();
    if denom == 0.0 {
        return 1.0;
    }
    n.log10() / denom
}

/// Higuchi fractal dimension: least-squares slope of ln L(k) against
/// ln(1/k) for k = 1..=k_max. Needs at least 2*k_max samples.
pub fn higuchi_fd(x: &[f64], k_max: usize) -> Result<f64> {
    if k_max < 2 {
        return Err(Error::InvalidConfig(format!(
            "higuchi k_max must be >= 2, got {k_max}"
        )));
    }
    if x.len() < 2 * k_max {
        return Err(Error::TooShort {
            need: 2 * k_max,
            got: x.len(),
        });
    }
    let n = x.len();
    let mut log_inv_k = Vec::with_capacity(k_max);
    let mut log_len = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let mut total = 0.0;
        let mut curves = 0usize;
        for m in 0..k {
            let steps = (n - 1 - m) / k;
            if steps == 0 {
                continue;
            }
            let mut length = 0.0;
            for j in 1..=steps {
                length += (x[m + j * k] - x[m + (j - 1) * k]).abs();
            }
            // Normalization maps every subsampled curve to the full n-1 span.
            total += length * (n - 1) as f64 / (steps * k) as f64 / k as f64;
            curves += 1;
        }
        if curves == 0 || total <= 0.0 {
            // Constant (or degenerate) signal: define FD = 1, matching Katz.
            return Ok(1.0);
        }
        log_inv_k.push((1.0 / k as f64).ln());
        log_len.push((total / curves as f64).ln());
    }
    Ok(ls_slope(&log_inv_k, &log_len))
}

fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut num, mut den) = (0.0, 0.0);
    for (&a, &b) in xs.iter().zip(ys) {
        num += (a - mx) * (b - my);
        den += (a - mx) * (a - mx);
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Petrosian fractal dimension from the count of first-difference sign
/// changes. Monotone and constant signals return exactly 1.0.
pub fn petrosian_fd(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 1.0;
    }
    let mut n_delta = 0usize;
    let mut prev = 0.0f64;
    for w in x.windows(2) {
        let d = w[1] - w[0];
        if prev * d < 0.0 {
            n_delta += 1;
        }
        if d != 0.0 {
            prev = d;
        }
    }
    let n = x.len() as f64;
    let denom = n.log10() + (n / (n + 0.4 * n_delta as f64)).log10();
    n.log10() / denom
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn katz_ramp_is_one() {
        let ramp: Vec<f64> = (0..100).map(|i| i as f64).collect();
        assert!((katz_fd(&ramp) - 1.0).abs() < 1e-9);
        assert_eq!(katz_fd(&[3.0; 50]), 1.0);
        assert!(katz_fd(&noise(500, 9)) > 1.0);
    }

    #[test]
    fn higuchi_known_limits() {
        let ramp: Vec<f64> = (0..1000).map(|i| i as f64 * 0.01).collect();
        let fd = higuchi_fd(&ramp, 10).unwrap();
        assert!((fd - 1.0).abs() < 0.05, "ramp FD {fd}");

        let fd_noise = higuchi_fd(&noise(1000, 9), 10).unwrap();
        assert!((fd_noise - 2.0).abs() < 0.15, "white noise FD {fd_noise}");

        assert!(matches!(
            higuchi_fd(&[1.0; 10], 10),
            Err(Error::TooShort { .. })
        ));
        assert_eq!(higuchi_fd(&[5.0; 64], 10).unwrap(), 1.0);
    }

    #[test]
    fn petrosian_exact_cases() {
        let ramp: Vec<f64> = (0..64).map(|i| i as f64).collect();
        assert_eq!(petrosian_fd(&ramp), 1.0);
        assert_eq!(petrosian_fd(&[2.0; 64]), 1.0);

        // Alternating signal: n_delta = n - 2 sign changes.
        let alt: Vec<f64> = (0..64).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let n = 64.0f64;
        let n_delta = 62.0;
        let expected = n.log10() / (n.log10() + (n / (n + 0.4 * n_delta)).log10());
        assert!((petrosian_fd(&alt) - expected).abs() < 1e-12);
        assert!(petrosian_fd(&alt) > petrosian_fd(&ramp));
    }
}
