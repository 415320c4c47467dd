//! Spectral features via a one-sided periodogram.
//!
//! The PSD is computed from the mean-removed signal; DC is always excluded.
//! Shape features (centroid, band powers, flatness, ...) use a Hann window to
//! tame leakage. `spectral_entropy` deliberately uses the rectangular window
//! so a bin-centered sine concentrates in exactly one bin.

use std::cell::RefCell;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Taper applied before the FFT.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Taper {
    Rectangular,
    Hann,
}

/// One-sided power spectral density of the mean-removed signal, DC excluded.
///
/// Returns `(freqs, psd)` where `freqs[j] = (j + 1) * fs / n`. Density
/// normalization: `sum(psd) * fs / n` recovers the tapered signal's power.
pub fn periodogram(x: &[f64], fs: f64, taper: Taper) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    if n < 2 {
        return (Vec::new(), Vec::new());
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex<f64>> = Vec::with_capacity(n);
    let mut win_sq = 0.0;
    for (i, &v) in x.iter().enumerate() {
        let w = match taper {
            Taper::Rectangular => 1.0,
            Taper::Hann => {
                let c = (std::f64::consts::TAU * i as f64 / n as f64).cos();
                0.5 * (1.0 - c)
            }
        };
        win_sq += w * w;
        buf.push(Complex::new((v - mean) * w, 0.0));
    }
    if win_sq == 0.0 {
        return (Vec::new(), Vec::new());
    }
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n).process(&mut buf));

    let half = n / 2;
    let scale = 1.0 / (fs * win_sq);
    let mut freqs = Vec::with_capacity(half);
    let mut psd = Vec::with_capacity(half);
    for k in 1..=half {
        let two_sided = buf[k].norm_sqr() * scale;
        // The Nyquist bin of an even-length FFT has no mirror image.
        let factor = if n % 2 == 0 && k == half { 1.0 } else { 2.0 };
        freqs.push(k as f64 * fs / n as f64);
        psd.push(two_sided * factor);
    }
    (freqs, psd)
}

/// Bundle of the nine spectral catalog features for one window.
#[derive(Debug, Clone, Copy)]
pub struct SpectralFeatures {
    pub total_power: f64,
    pub dom_freq: f64,
    pub dom_power: f64,
    pub centroid: f64,
    pub bandwidth: f64,
    pub band_power_low: f64,
    pub band_power_mid: f64,
    pub band_power_high: f64,
    pub entropy: f64,
}

/// Compute the spectral feature block. Band edges in Hz split the axis into
/// [0, e0), [e0, e1), [e1, e2).
pub fn spectral_features(x: &[f64], fs: f64, band_edges: [f64; 3]) -> SpectralFeatures {
    let (freqs, psd) = periodogram(x, fs, Taper::Hann);
    let df = if x.is_empty() { 0.0 } else { fs / x.len() as f64 };
    let total: f64 = psd.iter().sum();
    let mut out = SpectralFeatures {
        total_power: total * df,
        dom_freq: 0.0,
        dom_power: 0.0,
        centroid: 0.0,
        bandwidth: 0.0,
        band_power_low: 0.0,
        band_power_mid: 0.0,
        band_power_high: 0.0,
        entropy: spectral_entropy(x, fs, true),
    };
    if total <= 0.0 || psd.is_empty() {
        return out;
    }
    let mut best = 0usize;
    for (j, (&f, &p)) in freqs.iter().zip(&psd).enumerate() {
        if p > psd[best] {
            best = j;
        }
        out.centroid += f * p;
        if f < band_edges[0] {
            out.band_power_low += p * df;
        } else if f < band_edges[1] {
            out.band_power_mid += p * df;
        } else if f < band_edges[2] {
            out.band_power_high += p * df;
        }
    }
    out.dom_freq = freqs[best];
    out.dom_power = psd[best] * df;
    out.centroid /= total;
    let mut spread = 0.0;
    for (&f, &p) in freqs.iter().zip(&psd) {
        spread += (f - out.centroid) * (f - out.centroid) * p;
    }
    out.bandwidth = (spread / total).sqrt();
    out
}

/// Shannon entropy of the normalized one-sided PSD (rectangular taper, DC
/// excluded); divided by ln(#bins) when `normalized`. Zero-power input -> 0.
pub fn spectral_entropy(x: &[f64], fs: f64, normalized: bool) -> f64 {
    let (_, psd) = periodogram(x, fs, Taper::Rectangular);
    entropy_of_distribution(&psd, normalized)
}

/// Geometric over arithmetic mean of the Hann PSD; 0 when any bin is empty.
pub fn spectral_flatness(x: &[f64], fs: f64) -> f64 {
    let (_, psd) = periodogram(x, fs, Taper::Hann);
    if psd.is_empty() {
        return 0.0;
    }
    let arith = psd.iter().sum::<f64>() / psd.len() as f64;
    if arith <= 0.0 {
        return 0.0;
    }
    let mut log_sum = 0.0;
    for &p in &psd {
        if p <= 0.0 {
            return 0.0;
        }
        log_sum += p.ln();
    }
    ((log_sum / psd.len() as f64).exp()) / arith
}

pub(crate) fn entropy_of_distribution(weights: &[f64], normalized: bool) -> f64 {
    let total: f64 = weights.iter().sum();
    if total <= 0.0 || weights.len() < 2 {
        return 0.0;
    }
    let mut h = 0.0;
    for &w in weights {
        if w > 0.0 {
            let p = w / total;
            h -= p * p.ln();
        }
    }
    if normalized {
        h / (weights.len() as f64).ln()
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

    fn sine(freq: f64, fs: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| (std::f64::consts::TAU * freq * i as f64 / fs).sin())
            .collect()
    }

    #[test]
    fn parseval_rectangular() {
        let x = sine(2.5, 20.0, 256);
        let (_, psd) = periodogram(&x, 20.0, Taper::Rectangular);
        let df = 20.0 / 256.0;
        let power: f64 = psd.iter().sum::<f64>() * df;
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        let direct: f64 = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / x.len() as f64;
        assert_abs_diff_eq!(power, direct, epsilon = 1e-9);
    }

    #[test]
    fn dominant_frequency_of_sine() {
        // 2.5 Hz is bin-centered for n=256 at fs=20 (bin width 0.078125).
        let x = sine(2.5, 20.0, 256);
        let f = spectral_features(&x, 20.0, [0.5, 2.0, 5.0]);
        assert_abs_diff_eq!(f.dom_freq, 2.5, epsilon = 20.0 / 256.0);
        assert!(f.band_power_high > f.band_power_low);
        assert!(f.band_power_high > f.band_power_mid);
        assert_abs_diff_eq!(f.centroid, 2.5, epsilon = 0.1);
    }

    #[test]
    fn entropy_extremes() {
        let x = sine(2.5, 20.0, 256);
        assert!(spectral_entropy(&x, 20.0, true) < 0.05);

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let noise: Vec<f64> = (0..2048).map(|_| rng.gen_range(-1.0..1.0)).collect();
        assert!(spectral_entropy(&noise, 20.0, true) > 0.9);

        assert_eq!(spectral_entropy(&[3.0; 64], 20.0, true), 0.0);
    }

    #[test]
    fn flatness_orders_noise_above_sine() {
        let x = sine(2.5, 20.0, 256);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let noise: Vec<f64> = (0..256).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let fx = spectral_flatness(&x, 20.0);
        let fn_ = spectral_flatness(&noise, 20.0);
        assert!(fx < fn_, "sine {fx} should be flatter than noise {fn_}");
        assert_eq!(spectral_flatness(&[0.0; 64], 20.0), 0.0);
    }

    #[test]
    fn zero_signal_features_are_zero() {
        let f = spectral_features(&[0.0; 128], 20.0, [0.5, 2.0, 5.0]);
        assert_eq!(f.total_power, 0.0);
        assert_eq!(f.dom_freq, 0.0);
        assert_eq!(f.entropy, 0.0);
    }
}
