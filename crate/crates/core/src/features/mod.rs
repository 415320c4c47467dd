//! Windowing and the 189-column feature catalog.
//!
//! Each window yields 63 features per channel (12 statistical, 8 time-domain,
//! 9 spectral, 6 entropy, 5 fractal/complexity, 23 peak-variability) for the
//! chest, respiration, and cardiac channels: 189 columns total. The catalog
//! is a versioned convention; names are stable and unique.

pub mod entropy;
pub mod fractal;
pub mod peaks;
pub mod spectral;
pub mod stats;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write as _};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sigsynth::{Activity, Channel, Position, SignalRecord};

const STAT_NAMES: [&str; 12] = [
    "mean", "min", "max", "std", "variance", "median", "q1", "q3", "iqr", "range", "rms", "snr",
];
const TIME_NAMES: [&str; 8] = [
    "slope",
    "energy",
    "line_length",
    "mean_abs_diff",
    "mean_abs_diff2",
    "zcr",
    "peak_count",
    "skewness",
];
const SPECTRAL_NAMES: [&str; 9] = [
    "total_power",
    "dom_freq",
    "dom_power",
    "spectral_centroid",
    "spectral_bandwidth",
    "band_power_low",
    "band_power_mid",
    "band_power_high",
    "spectral_entropy",
];
const ENTROPY_NAMES: [&str; 6] = [
    "perm_entropy",
    "approx_entropy",
    "sample_entropy",
    "hist_entropy",
    "svd_entropy",
    "spectral_flatness",
];
const FRACTAL_NAMES: [&str; 5] = [
    "katz_fd",
    "higuchi_fd",
    "petrosian_fd",
    "hjorth_mobility",
    "hjorth_complexity",
];

/// Features per channel under the default catalog.
pub const FEATURES_PER_CHANNEL: usize = 63;
/// Total catalog size: 63 features x 3 channels.
pub const CATALOG_SIZE: usize = FEATURES_PER_CHANNEL * 3;

/// Tunables of windowing and extraction. Defaults reproduce the documented
/// catalog: 10 s windows with 1 s steps (90% overlap at any rate).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CatalogConfig {
    pub win_s: f64,
    pub step_s: f64,
    /// Band-power edges in Hz: [0, e0), [e0, e1), [e1, e2).
    pub band_edges_hz: [f64; 3],
    pub hist_bins: usize,
    pub perm_order: usize,
    pub entropy_m: usize,
    pub entropy_r_factor: f64,
    pub higuchi_k_max: usize,
    /// Peak prominence threshold as a fraction of the window's std.
    pub prominence_factor: f64,
    /// Minimum peak separation per channel, seconds.
    pub peak_distance_chest_s: f64,
    pub peak_distance_respiration_s: f64,
    pub peak_distance_cardiac_s: f64,
}

impl Default for CatalogConfig {
    fn default() -> Self {
        CatalogConfig {
            win_s: 10.0,
            step_s: 1.0,
            band_edges_hz: [0.5, 2.0, 5.0],
            hist_bins: 10,
            perm_order: 3,
            entropy_m: 2,
            entropy_r_factor: 0.2,
            higuchi_k_max: 10,
            prominence_factor: 0.3,
            peak_distance_chest_s: 2.0,
            peak_distance_respiration_s: 2.0,
            peak_distance_cardiac_s: 0.4,
        }
    }
}

impl CatalogConfig {
    fn peak_distance_s(&self, ch: Channel) -> f64 {
        match ch {
            Channel::Chest => self.peak_distance_chest_s,
            Channel::Respiration => self.peak_distance_respiration_s,
            Channel::Cardiac => self.peak_distance_cardiac_s,
        }
    }
}

/// The 189 column names, channel-prefixed, in extraction order.
pub fn catalog_names() -> Vec<String> {
    let mut names = Vec::with_capacity(CATALOG_SIZE);
    for ch in Channel::ALL {
        for block in [
            &STAT_NAMES[..],
            &TIME_NAMES[..],
            &SPECTRAL_NAMES[..],
            &ENTROPY_NAMES[..],
            &FRACTAL_NAMES[..],
            &peaks::VARIABILITY_NAMES[..],
        ] {
            for name in block {
                names.push(format!("{}_{}", ch.key(), name));
            }
        }
    }
    names
}

/// Labels carried by every window and feature row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowMeta {
    pub subject_id: u32,
    pub activity: Activity,
    pub position: Position,
}

/// One windowed slice of a session, all three channels.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub meta: RowMeta,
    pub window_index: usize,
    pub sample_rate_hz: f64,
    pub chest: Vec<f64>,
    pub respiration: Vec<f64>,
    pub cardiac: Vec<f64>,
}

impl Window {
    pub fn len(&self) -> usize {
        self.chest.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chest.is_empty()
    }

    pub fn channel(&self, ch: Channel) -> &[f64] {
        match ch {
            Channel::Chest => &self.chest,
            Channel::Respiration => &self.respiration,
            Channel::Cardiac => &self.cardiac,
        }
    }
}

/// Feature values of one window; names live in the shared catalog.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub meta: RowMeta,
}

/// Slice a record into overlapping windows of `win_s` seconds every `step_s`
/// seconds. Yields floor((L - W) / S) + 1 windows.
pub fn window_signal(record: &SignalRecord, win_s: f64, step_s: f64) -> Result<Vec<Window>> {
    let fs = record.sample_rate_hz;
    let w = whole_samples(win_s, fs, "win_s")?;
    let s = whole_samples(step_s, fs, "step_s")?;
    let l = record.len();
    if l < w {
        return Err(Error::TooShort { need: w, got: l });
    }
    let count = (l - w) / s + 1;
    let meta = RowMeta {
        subject_id: record.subject_id,
        activity: record.activity,
        position: record.position,
    };
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let start = i * s;
        out.push(Window {
            meta,
            window_index: i,
            sample_rate_hz: fs,
            chest: record.chest[start..start + w].to_vec(),
            respiration: record.respiration[start..start + w].to_vec(),
            cardiac: record.cardiac[start..start + w].to_vec(),
        });
    }
    Ok(out)
}

fn whole_samples(seconds: f64, fs: f64, what: &str) -> Result<usize> {
    let samples = seconds * fs;
    if !(samples >= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "{what} = {seconds} s is below one sample at fs = {fs}"
        )));
    }
    if (samples - samples.round()).abs() > 1e-9 {
        return Err(Error::InvalidConfig(format!(
            "{what} = {seconds} s is not a whole sample count at fs = {fs}"
        )));
    }
    Ok(samples.round() as usize)
}

/// Extract the full catalog for one window.
pub fn extract_window(window: &Window, cfg: &CatalogConfig) -> Result<FeatureVector> {
    let mut values = Vec::with_capacity(CATALOG_SIZE);
    for ch in Channel::ALL {
        channel_features(window.channel(ch), window.sample_rate_hz, ch, cfg, &mut values)?;
    }
    Ok(FeatureVector {
        values,
        meta: window.meta,
    })
}

fn channel_features(
    x: &[f64],
    fs: f64,
    ch: Channel,
    cfg: &CatalogConfig,
    out: &mut Vec<f64>,
) -> Result<()> {
    // Statistical block.
    let mean = stats::mean(x);
    let std = stats::std(x);
    let min = stats::min(x);
    let max = stats::max(x);
    let q1 = stats::quantile(x, 0.25);
    let q3 = stats::quantile(x, 0.75);
    out.extend([
        mean,
        min,
        max,
        std,
        stats::variance(x),
        stats::median(x),
        q1,
        q3,
        q3 - q1,
        max - min,
        stats::rms(x),
        stats::snr(x),
    ]);

    // Time-domain block.
    let detected = peaks::detect_peaks(x, fs, cfg.peak_distance_s(ch), cfg.prominence_factor * std);
    out.extend([
        stats::slope(x, fs),
        stats::energy(x),
        stats::line_length(x),
        stats::mean_abs_diff(x),
        stats::mean_abs_diff2(x),
        stats::zero_crossing_rate(x),
        detected.len() as f64,
        stats::skewness(x),
    ]);

    // Spectral block.
    let sp = spectral::spectral_features(x, fs, cfg.band_edges_hz);
    out.extend([
        sp.total_power,
        sp.dom_freq,
        sp.dom_power,
        sp.centroid,
        sp.bandwidth,
        sp.band_power_low,
        sp.band_power_mid,
        sp.band_power_high,
        sp.entropy,
    ]);

    // Entropy block.
    out.extend([
        entropy::permutation_entropy(x, cfg.perm_order, 1, true)?,
        entropy::approx_entropy(x, cfg.entropy_m, cfg.entropy_r_factor)?,
        entropy::sample_entropy(x, cfg.entropy_m, cfg.entropy_r_factor)?,
        entropy::hist_entropy(x, cfg.hist_bins),
        entropy::svd_entropy(x, 3, 1, true),
        spectral::spectral_flatness(x, fs),
    ]);

    // Fractal/complexity block.
    out.extend([
        fractal::katz_fd(x),
        fractal::higuchi_fd(x, cfg.higuchi_k_max)?,
        fractal::petrosian_fd(x),
        stats::hjorth_mobility(x),
        stats::hjorth_complexity(x),
    ]);

    // Peak-variability block.
    out.extend(peaks::variability_features(&detected, x, fs));
    Ok(())
}

/// Rectangular matrix of feature rows over one shared catalog.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub names: Vec<String>,
    /// Row-major values, `meta.len() * names.len()` entries.
    pub data: Vec<f64>,
    pub meta: Vec<RowMeta>,
}

impl FeatureMatrix {
    pub fn n_rows(&self) -> usize {
        self.meta.len()
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols()..(i + 1) * self.n_cols()]
    }

    pub fn from_rows(names: Vec<String>, rows: Vec<FeatureVector>) -> Result<Self> {
        let n_cols = names.len();
        let mut data = Vec::with_capacity(rows.len() * n_cols);
        let mut meta = Vec::with_capacity(rows.len());
        for row in rows {
            if row.values.len() != n_cols {
                return Err(Error::DimensionMismatch(format!(
                    "feature row has {} values, catalog has {n_cols}",
                    row.values.len()
                )));
            }
            data.extend(row.values);
            meta.push(row.meta);
        }
        Ok(FeatureMatrix { names, data, meta })
    }

    /// Keep the columns whose mask bit is set.
    pub fn select_columns(&self, mask: &[bool]) -> Result<FeatureMatrix> {
        if mask.len() != self.n_cols() {
            return Err(Error::DimensionMismatch(format!(
                "mask length {} vs {} columns",
                mask.len(),
                self.n_cols()
            )));
        }
        let kept: Vec<usize> = (0..mask.len()).filter(|&j| mask[j]).collect();
        let names = kept.iter().map(|&j| self.names[j].clone()).collect();
        let mut data = Vec::with_capacity(kept.len() * self.n_rows());
        for i in 0..self.n_rows() {
            let row = self.row(i);
            data.extend(kept.iter().map(|&j| row[j]));
        }
        Ok(FeatureMatrix {
            names,
            data,
            meta: self.meta.clone(),
        })
    }

    /// Keep the rows whose meta satisfies `pred`, preserving order.
    pub fn filter_rows(&self, pred: impl Fn(&RowMeta) -> bool) -> FeatureMatrix {
        let mut data = Vec::new();
        let mut meta = Vec::new();
        for (i, m) in self.meta.iter().enumerate() {
            if pred(m) {
                data.extend_from_slice(self.row(i));
                meta.push(*m);
            }
        }
        FeatureMatrix {
            names: self.names.clone(),
            data,
            meta,
        }
    }

    /// Sorted unique subject ids present in the rows.
    pub fn subject_ids(&self) -> Vec<u32> {
        let mut ids: Vec<u32> = self.meta.iter().map(|m| m.subject_id).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    /// Write as CSV: feature columns, then `subject,activity,position`.
    /// Values print in shortest round-trip form, so a read-back is lossless.
    pub fn to_csv(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        let mut header = self.names.join(",");
        header.push_str(",subject,activity,position\n");
        out.write_all(header.as_bytes())?;
        let mut line = String::new();
        for (i, meta) in self.meta.iter().enumerate() {
            line.clear();
            for v in self.row(i) {
                line.push_str(&format!("{v}"));
                line.push(',');
            }
            line.push_str(&format!(
                "{},{},{}\n",
                meta.subject_id, meta.activity, meta.position
            ));
            out.write_all(line.as_bytes())?;
        }
        out.flush()?;
        Ok(())
    }

    /// Read a CSV produced by [`FeatureMatrix::to_csv`].
    pub fn from_csv(path: &Path) -> Result<FeatureMatrix> {
        let mut reader = csv::Reader::from_reader(BufReader::new(File::open(path).map_err(
            |e| Error::Data(format!("cannot open {}: {e}", path.display())),
        )?));
        let headers = reader.headers()?.clone();
        if headers.len() < 4 {
            return Err(Error::Data(format!(
                "{} has {} columns; need features plus subject,activity,position",
                path.display(),
                headers.len()
            )));
        }
        let n_cols = headers.len() - 3;
        let tail: Vec<&str> = headers.iter().skip(n_cols).collect();
        if tail != ["subject", "activity", "position"] {
            return Err(Error::Data(format!(
                "{} label columns are {tail:?}, expected subject,activity,position",
                path.display()
            )));
        }
        let names: Vec<String> = headers.iter().take(n_cols).map(str::to_owned).collect();
        let mut data = Vec::new();
        let mut meta = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record?;
            if record.len() != headers.len() {
                return Err(Error::Data(format!(
                    "{} row {line}: {} fields, header has {}",
                    path.display(),
                    record.len(),
                    headers.len()
                )));
            }
            for j in 0..n_cols {
                let v: f64 = record[j].parse().map_err(|_| {
                    Error::Data(format!(
                        "{} row {line}: bad value {:?} in column {}",
                        path.display(),
                        &record[j],
                        names[j]
                    ))
                })?;
                data.push(v);
            }
            meta.push(RowMeta {
                subject_id: record[n_cols].parse().map_err(|_| {
                    Error::Data(format!("{} row {line}: bad subject id", path.display()))
                })?,
                activity: record[n_cols + 1].parse()?,
                position: record[n_cols + 2].parse()?,
            });
        }
        Ok(FeatureMatrix { names, data, meta })
    }
}

/// Extract features for a batch of windows (parallel, deterministic order).
pub fn extract_all(windows: &[Window], cfg: &CatalogConfig) -> Result<FeatureMatrix> {
    if windows.is_empty() {
        return Err(Error::EmptyInput("no windows to extract".into()));
    }
    let len = windows[0].len();
    let fs = windows[0].sample_rate_hz;
    for w in windows {
        if w.len() != len || w.sample_rate_hz != fs {
            return Err(Error::DimensionMismatch(
                "windows disagree on length or sample rate".into(),
            ));
        }
    }
    let rows: Vec<FeatureVector> = windows
        .par_iter()
        .map(|w| extract_window(w, cfg))
        .collect::<Result<_>>()?;
    FeatureMatrix::from_rows(catalog_names(), rows)
}

/// Window every record and extract the full catalog, ordered by
/// (record, window_index).
pub fn extract_from_records(records: &[SignalRecord], cfg: &CatalogConfig) -> Result<FeatureMatrix> {
    let mut windows = Vec::new();
    for rec in records {
        windows.extend(window_signal(rec, cfg.win_s, cfg.step_s)?);
    }
    extract_all(&windows, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sigsynth;
    use proptest::prelude::*;

    fn record(n: usize) -> SignalRecord {
        let profile = sigsynth::generate_profiles(7, 1).unwrap()[0];
        let mut rec = sigsynth::synthesize_session(
            &profile,
            Activity::Normal,
            Position::Sitting,
            n as f64 / 20.0,
            20.0,
        )
        .unwrap();
        rec.chest.truncate(n);
        rec.respiration.truncate(n);
        rec.cardiac.truncate(n);
        rec
    }

    #[test]
    fn window_counts() {
        let rec = record(600);
        let wins = window_signal(&rec, 10.0, 1.0).unwrap();
        assert_eq!(wins.len(), 21);
        assert_eq!(wins[0].len(), 200);
        assert_eq!(wins[20].window_index, 20);

        assert_eq!(window_signal(&record(200), 10.0, 1.0).unwrap().len(), 1);
        assert!(window_signal(&record(199), 10.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn window_count_closed_form(w in 2usize..80, s in 1usize..40, extra in 0usize..300) {
            let l = w + extra;
            let rec = record(l);
            let fs = 20.0;
            let wins = window_signal(&rec, w as f64 / fs, s as f64 / fs).unwrap();
            prop_assert_eq!(wins.len(), (l - w) / s + 1);
            for win in &wins {
                prop_assert_eq!(win.len(), w);
            }
        }
    }

    #[test]
    fn catalog_is_189_unique_names() {
        let names = catalog_names();
        assert_eq!(names.len(), 189);
        let unique: std::collections::HashSet<_> = names.iter().collect();
        assert_eq!(unique.len(), 189);
        assert!(names[0].starts_with("chest_"));
        assert!(names[63].starts_with("respiration_"));
        assert!(names[126].starts_with("cardiac_"));
    }

    #[test]
    fn extraction_shape_and_determinism() {
        let rec = record(600);
        let wins = window_signal(&rec, 10.0, 1.0).unwrap();
        let cfg = CatalogConfig::default();
        let m = extract_all(&wins, &cfg).unwrap();
        assert_eq!(m.n_rows(), 21);
        assert_eq!(m.n_cols(), 189);
        let again = extract_all(&wins, &cfg).unwrap();
        assert_eq!(m.data.len(), again.data.len());
        assert!(m
            .data
            .iter()
            .zip(&again.data)
            .all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn zero_window_statistics_are_zero() {
        let meta = RowMeta {
            subject_id: 0,
            activity: Activity::Normal,
            position: Position::Sitting,
        };
        let win = Window {
            meta,
            window_index: 0,
            sample_rate_hz: 20.0,
            chest: vec![0.0; 200],
            respiration: vec![0.0; 200],
            cardiac: vec![0.0; 200],
        };
        let fv = extract_window(&win, &CatalogConfig::default()).unwrap();
        // Statistical block of the chest channel: indices 0..12.
        assert!(fv.values[..12].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sine_respiration_rate() {
        let meta = RowMeta {
            subject_id: 0,
            activity: Activity::Guided,
            position: Position::Sitting,
        };
        let sine: Vec<f64> = (0..600)
            .map(|i| (std::f64::consts::TAU * 0.25 * i as f64 / 20.0).sin())
            .collect();
        let win = Window {
            meta,
            window_index: 0,
            sample_rate_hz: 20.0,
            chest: sine.clone(),
            respiration: sine.clone(),
            cardiac: sine,
        };
        let fv = extract_window(&win, &CatalogConfig::default()).unwrap();
        let names = catalog_names();
        let idx = names
            .iter()
            .position(|n| n == "respiration_rate_per_min")
            .unwrap();
        assert!((fv.values[idx] - 15.0).abs() <= 1.0, "{}", fv.values[idx]);
    }

    #[test]
    fn csv_roundtrip_is_lossless() {
        let rec = record(280);
        let wins = window_signal(&rec, 10.0, 2.0).unwrap();
        let m = extract_all(&wins, &CatalogConfig::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("features.csv");
        m.to_csv(&path).unwrap();
        let back = FeatureMatrix::from_csv(&path).unwrap();
        assert_eq!(m.names, back.names);
        assert_eq!(m.meta, back.meta);
        assert_eq!(m.data.len(), back.data.len());
        for (a, b) in m.data.iter().zip(&back.data) {
            assert_eq!(a.to_bits(), b.to_bits(), "{a} vs {b}");
        }
    }

    #[test]
    fn select_and_filter() {
        let rec = record(240);
        let wins = window_signal(&rec, 10.0, 2.0).unwrap();
        let m = extract_all(&wins, &CatalogConfig::default()).unwrap();
        let mut mask = vec![false; 189];
        mask[0] = true;
        mask[100] = true;
        let sel = m.select_columns(&mask).unwrap();
        assert_eq!(sel.n_cols(), 2);
        assert_eq!(sel.n_rows(), m.n_rows());
        assert_eq!(sel.names[0], m.names[0]);
        assert_eq!(sel.names[1], m.names[100]);
        assert!(m.select_columns(&vec![true; 5]).is_err());

        let none = m.filter_rows(|meta| meta.subject_id == 99);
        assert_eq!(none.n_rows(), 0);
    }
}
