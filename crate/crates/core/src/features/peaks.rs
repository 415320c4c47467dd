//! Peak detection and peak-interval variability features.

use crate::features::stats;

/// Detect local maxima separated by at least `min_distance_s` seconds with
/// topographic prominence at least `min_prominence` (absolute units).
/// Returns strictly increasing sample indices; may be empty.
pub fn detect_peaks(x: &[f64], fs: f64, min_distance_s: f64, min_prominence: f64) -> Vec<usize> {
    if x.len() < 3 || fs <= 0.0 {
        return Vec::new();
    }
    let mut candidates = Vec::new();
    for i in 1..x.len() - 1 {
        if x[i - 1] < x[i] && x[i] > x[i + 1] && prominence(x, i) >= min_prominence {
            candidates.push(i);
        }
    }
    // Highest peaks win; lower ones inside the exclusion distance are dropped.
    let min_dist = (min_distance_s * fs).round().max(1.0) as usize;
    candidates.sort_by(|&a, &b| x[b].partial_cmp(&x[a]).unwrap().then(a.cmp(&b)));
    let mut kept: Vec<usize> = Vec::new();
    for &c in &candidates {
        if kept.iter().all(|&k| c.abs_diff(k) >= min_dist) {
            kept.push(c);
        }
    }
    kept.sort_unstable();
    kept
}

/// Topographic prominence of sample `i`: height above the higher of the two
/// valley floors that separate it from taller terrain (or the signal edge).
fn prominence(x: &[f64], i: usize) -> f64 {
    let peak = x[i];
    let mut left_base = peak;
    let mut j = i;
    while j > 0 {
        j -= 1;
        if x[j] > peak {
            break;
        }
        left_base = left_base.min(x[j]);
    }
    let mut right_base = peak;
    let mut j = i;
    while j + 1 < x.len() {
        j += 1;
        if x[j] > peak {
            break;
        }
        right_base = right_base.min(x[j]);
    }
    peak - left_base.max(right_base)
}

/// Names of the variability block, in emission order.
pub const VARIABILITY_NAMES: [&str; 23] = [
    "ibi_mean",
    "ibi_std",
    "ibi_rmssd",
    "ibi_psc50",
    "rate_per_min",
    "peak_amp_mean",
    "peak_amp_std",
    "rise_fall_ratio",
    "ibi_median",
    "ibi_q1",
    "ibi_q3",
    "ibi_iqr",
    "ibi_min",
    "ibi_max",
    "ibi_range",
    "ibi_cv",
    "ibi_succ_diff_mean",
    "ibi_succ_diff_max",
    "peak_amp_median",
    "peak_amp_min",
    "peak_amp_max",
    "peak_amp_range",
    "peak_amp_cv",
];

/// Inter-peak-interval (IBI) and peak-amplitude features, aligned with
/// [`VARIABILITY_NAMES`]. Fewer than 2 peaks yields an all-NaN block, which
/// downstream imputation fills.
pub fn variability_features(peaks: &[usize], x: &[f64], fs: f64) -> [f64; 23] {
    if peaks.len() < 2 {
        return [f64::NAN; 23];
    }
    let ibi: Vec<f64> = peaks.windows(2).map(|w| (w[1] - w[0]) as f64 / fs).collect();
    let amps: Vec<f64> = peaks.iter().map(|&p| x[p]).collect();
    let succ: Vec<f64> = ibi.windows(2).map(|w| w[1] - w[0]).collect();

    let ibi_mean = stats::mean(&ibi);
    let ibi_std = stats::std(&ibi);
    let rmssd = if succ.is_empty() {
        0.0
    } else {
        (succ.iter().map(|d| d * d).sum::<f64>() / succ.len() as f64).sqrt()
    };
    // Analog of pNN50: fraction of successive interval changes above 50 ms.
    let psc50 = if succ.is_empty() {
        0.0
    } else {
        succ.iter().filter(|d| d.abs() > 0.05).count() as f64 / succ.len() as f64
    };
    let rate = if ibi_mean > 0.0 { 60.0 / ibi_mean } else { 0.0 };
    let amp_mean = stats::mean(&amps);
    let amp_std = stats::std(&amps);

    // Rise time: preceding trough to peak; fall time: peak to following
    // trough. Troughs are interval minima between consecutive peaks.
    let troughs: Vec<usize> = peaks
        .windows(2)
        .map(|w| {
            let mut best = w[0] + 1;
            for i in (w[0] + 1)..w[1] {
                if x[i] < x[best] {
                    best = i;
                }
            }
            best
        })
        .collect();
    let rises: Vec<f64> = (1..peaks.len())
        .map(|k| (peaks[k] - troughs[k - 1]) as f64 / fs)
        .collect();
    let falls: Vec<f64> = (0..peaks.len() - 1)
        .map(|k| (troughs[k] - peaks[k]) as f64 / fs)
        .collect();
    let mean_fall = stats::mean(&falls);
    let rise_fall = if mean_fall > 0.0 {
        stats::mean(&rises) / mean_fall
    } else {
        0.0
    };

    let cv = |sd: f64, m: f64| if m != 0.0 { sd / m } else { 0.0 };
    [
        ibi_mean,
        ibi_std,
        rmssd,
        psc50,
        rate,
        amp_mean,
        amp_std,
        rise_fall,
        stats::median(&ibi),
        stats::quantile(&ibi, 0.25),
        stats::quantile(&ibi, 0.75),
        stats::quantile(&ibi, 0.75) - stats::quantile(&ibi, 0.25),
        stats::min(&ibi),
        stats::max(&ibi),
        stats::max(&ibi) - stats::min(&ibi),
        cv(ibi_std, ibi_mean),
        if succ.is_empty() {
            0.0
        } else {
            succ.iter().map(|d| d.abs()).sum::<f64>() / succ.len() as f64
        },
        succ.iter().map(|d| d.abs()).fold(0.0, f64::max),
        stats::median(&amps),
        stats::min(&amps),
        stats::max(&amps),
        stats::max(&amps) - stats::min(&amps),
        cv(amp_std, amp_mean),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine(freq: f64, fs: f64, secs: f64) -> Vec<f64> {
        let n = (secs * fs) as usize;
        (0..n)
            .map(|i| (std::f64::consts::TAU * freq * i as f64 / fs).sin())
            .collect()
    }

    #[test]
    fn sine_peak_count_and_rate() {
        let x = sine(0.25, 20.0, 30.0);
        let peaks = detect_peaks(&x, 20.0, 2.0, 0.3 * stats::std(&x));
        assert!(
            peaks.len() == 7 || peaks.len() == 8,
            "got {} peaks",
            peaks.len()
        );
        let v = variability_features(&peaks, &x, 20.0);
        let rate = v[4];
        assert!((rate - 15.0).abs() <= 1.0, "rate {rate}");
        let ibi_std = v[1];
        assert!(ibi_std < 0.11, "periodic peaks, ibi std {ibi_std}");
    }

    #[test]
    fn constant_has_no_peaks() {
        assert!(detect_peaks(&[1.0; 100], 20.0, 1.0, 0.0).is_empty());
    }

    #[test]
    fn two_bumps_five_seconds_apart() {
        let fs = 20.0;
        let n = (12.0 * fs) as usize;
        let bump = |t: f64, c: f64| (-((t - c) * (t - c)) / 0.5).exp();
        let x: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 / fs;
                bump(t, 3.0) + bump(t, 8.0)
            })
            .collect();
        let peaks = detect_peaks(&x, fs, 2.0, 0.3 * stats::std(&x));
        assert_eq!(peaks.len(), 2, "peaks at {peaks:?}");
        assert!((peaks[1] - peaks[0]) as f64 / fs > 4.5);
    }

    #[test]
    fn min_distance_suppresses_ripples() {
        // 1 Hz carrier with shallow 5 Hz ripple: distance 0.8 s keeps only
        // the carrier peaks.
        let fs = 50.0;
        let x: Vec<f64> = (0..500)
            .map(|i| {
                let t = i as f64 / fs;
                (std::f64::consts::TAU * t).sin() + 0.05 * (std::f64::consts::TAU * 5.0 * t).sin()
            })
            .collect();
        let peaks = detect_peaks(&x, fs, 0.8, 0.0);
        assert!(peaks.len() <= 10, "got {}", peaks.len());
        for w in peaks.windows(2) {
            assert!(w[1] - w[0] >= 40);
        }
    }

    #[test]
    fn variability_contracts() {
        assert!(variability_features(&[5], &[0.0; 10], 20.0)
            .iter()
            .all(|v| v.is_nan()));

        // Perfectly periodic peaks every 4 s.
        let peaks: Vec<usize> = (0..8).map(|k| k * 80).collect();
        let x = vec![1.0; 700];
        let v = variability_features(&peaks, &x, 20.0);
        assert_eq!(v[1], 0.0); // ibi_std
        assert_eq!(v[4], 15.0); // rate per minute
        assert_eq!(v[0], 4.0); // ibi_mean
    }

    #[test]
    fn jittered_ibi_std_matches_direct_computation() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let mut peaks = vec![10usize];
        for _ in 0..12 {
            peaks.push(peaks.last().unwrap() + 60 + rng.gen_range(0..20));
        }
        let x = vec![0.5; 2000];
        let v = variability_features(&peaks, &x, 20.0);
        let ibi: Vec<f64> = peaks.windows(2).map(|w| (w[1] - w[0]) as f64 / 20.0).collect();
        let mean = ibi.iter().sum::<f64>() / ibi.len() as f64;
        let var = ibi.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / ibi.len() as f64;
        assert!((v[1] - var.sqrt()).abs() < 1e-12);
    }
}
