//! Deterministic synthetic vital-sign generator.
//!
//! Emits per-session chest, respiration, and cardiac waveforms for a cohort of
//! synthetic subjects, four breathing activities, and two body positions. The
//! statistical construction makes "recognize the activity while suppressing
//! who the user is" a real, falsifiable trade-off rather than a vacuous one:
//!
//! - Identity lives in traits that survive re-recording: the cardiac beat
//!   rate, beat-interval variability, and harmonic waveform shape, plus the
//!   subject's spontaneous breathing rate. Strata are narrow and per-beat
//!   jitter is large, so one window estimates any trait to only about one
//!   between-subject gap: no single feature identifies anyone reliably, and
//!   identification accuracy accumulates (or decays) feature by feature.
//! - Every absolute scale is scrambled per session (independent channel
//!   gains, small rate drifts, harmonic-ratio jitter), so amplitude- and
//!   energy-like features carry activity information but almost no identity.
//! - Activity is encoded redundantly: in breathing-rate placement (which
//!   also carries the personal rate, entangling the two tasks) and in
//!   rate-free regularity patterns (per-breath amplitude spread, pauses,
//!   flatness) whose randomness is drawn fresh each session.
//!
//! A selector can therefore keep recognition high while starving
//! identification, but only by preferring the pattern features over the rate
//! and cardiac families; keeping the single best activity features drags
//! identity along.
//!
//! The inter-subject waveform model is an artifact convention: no public
//! signal-level characterization of such differences exists, so the generator
//! commits to one and documents it.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeds;

/// Guide frequency for the Guided breathing activity, in Hz.
pub const GUIDE_FREQ_HZ: f64 = 0.1;

/// Default sampling rate of emitted sessions, in Hz.
pub const DEFAULT_SAMPLE_RATE_HZ: f64 = 20.0;

/// Default session duration, in seconds.
pub const DEFAULT_DURATION_S: f64 = 30.0;

const TAU: f64 = std::f64::consts::TAU;

// Stream tags keep the per-purpose RNG streams disjoint.
const TAG_PROFILES: u64 = 0x70726f66; // cohort-level draws
const TAG_SUBJECT: u64 = 0x73756266; // per-subject profile draws
const TAG_SESSION: u64 = 0x73657373; // per-session waveform draws
const TAG_SHAPE: u64 = 0x73687065; // subject-fixed cardiac waveform shape

/// One of the four breathing activities a session records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activity {
    /// Spontaneous breathing at the subject's own pace.
    Normal,
    /// Reading aloud: irregular breath amplitudes with inserted pauses.
    Reading,
    /// Paced breathing locked to [`GUIDE_FREQ_HZ`].
    Guided,
    /// Breath hold: respiration collapses to a small residual plus slow drift.
    Apnea,
}

impl Activity {
    pub const ALL: [Activity; 4] = [
        Activity::Normal,
        Activity::Reading,
        Activity::Guided,
        Activity::Apnea,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Activity::Normal => "normal",
            Activity::Reading => "reading",
            Activity::Guided => "guided",
            Activity::Apnea => "apnea",
        }
    }

    /// Stable code used in RNG stream derivation and class indexing.
    pub fn code(self) -> u64 {
        match self {
            Activity::Normal => 0,
            Activity::Reading => 1,
            Activity::Guided => 2,
            Activity::Apnea => 3,
        }
    }
}

impl fmt::Display for Activity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Activity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(Activity::Normal),
            "reading" => Ok(Activity::Reading),
            "guided" => Ok(Activity::Guided),
            "apnea" => Ok(Activity::Apnea),
            other => Err(Error::InvalidConfig(format!("unknown activity {other:?}"))),
        }
    }
}

/// Body position during a session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Position {
    Sitting,
    Lying,
}

impl Position {
    pub const ALL: [Position; 2] = [Position::Sitting, Position::Lying];

    pub fn as_str(self) -> &'static str {
        match self {
            Position::Sitting => "sitting",
            Position::Lying => "lying",
        }
    }

    pub fn code(self) -> u64 {
        match self {
            Position::Sitting => 0,
            Position::Lying => 1,
        }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Position {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sitting" => Ok(Position::Sitting),
            "lying" => Ok(Position::Lying),
            other => Err(Error::InvalidConfig(format!("unknown position {other:?}"))),
        }
    }
}

/// The three emitted signal channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Chest,
    Respiration,
    Cardiac,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::Chest, Channel::Respiration, Channel::Cardiac];

    /// Short key used as CSV column name and feature-name prefix.
    pub fn key(self) -> &'static str {
        match self {
            Channel::Chest => "chest",
            Channel::Respiration => "respiration",
            Channel::Cardiac => "cardiac",
        }
    }
}

/// Fixed physiological parameters of one synthetic subject.
///
/// These are the identity carriers: beat rates are stratified over
/// [1.0, 1.3] Hz so any two subjects differ, beat-interval variability and
/// spontaneous breathing rate are stratified over independent permutations,
/// and the harmonic shape of the beat waveform is drawn per subject from
/// `noise_seed`. The large per-beat jitter keeps every single-window trait
/// estimate near one between-subject gap, so identity is a weak-per-feature,
/// strong-in-ensemble signal. Everything else about a session is redrawn per
/// recording.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubjectProfile {
    pub subject_id: u32,
    /// Mean beat rate in Hz, within [1.0, 1.3].
    pub cardiac_rate_hz: f64,
    /// Relative standard deviation of per-beat rate jitter, within
    /// [0.10, 0.18]. Doubles as a (noisy) identity trait of its own.
    pub cardiac_variability: f64,
    /// Chest displacement scale, arbitrary units, within [0.95, 1.05]. Kept
    /// deliberately narrow: per-session sensor gain swamps it, so absolute
    /// amplitude is not a usable identifier.
    pub chest_amplitude: f64,
    /// Spontaneous breathing rate in Hz, stratified within [0.18, 0.34].
    /// This is the entangling trait: breathing-rate features are among the
    /// best activity discriminators and also carry the person.
    pub breath_rate_hz: f64,
    /// Seed for all per-subject and per-session waveform randomness.
    pub noise_seed: u64,
}

/// One recorded session: three equal-length channels plus labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalRecord {
    pub subject_id: u32,
    pub activity: Activity,
    pub position: Position,
    pub sample_rate_hz: f64,
    pub chest: Vec<f64>,
    pub respiration: Vec<f64>,
    pub cardiac: Vec<f64>,
}

impl SignalRecord {
    /// Number of samples per channel.
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

/// Generate `n_subjects` profiles, deterministic in `(master_seed, n_subjects)`.
///
/// Cardiac rates are stratified: subject `i` falls inside stratum `i` of
/// [1.0, 1.3] with at least 30% of a stratum width separating any two
/// subjects. Variability and breathing-rate strata are assigned through
/// independent random permutations so none of the three traits correlate.
pub fn generate_profiles(master_seed: u64, n_subjects: usize) -> Result<Vec<SubjectProfile>> {
    if n_subjects == 0 {
        return Err(Error::EmptyInput("cohort of zero subjects".into()));
    }
    let n = n_subjects as f64;
    let rate_width = (1.3 - 1.0) / n;
    let var_width = (0.18 - 0.10) / n;
    let breath_width = (0.34 - 0.18) / n;

    let mut cohort_rng = seeds::stream_rng(master_seed, &[TAG_PROFILES]);
    let mut var_strata: Vec<usize> = (0..n_subjects).collect();
    shuffle(&mut var_strata, &mut cohort_rng);
    let mut breath_strata: Vec<usize> = (0..n_subjects).collect();
    shuffle(&mut breath_strata, &mut cohort_rng);

    let mut out = Vec::with_capacity(n_subjects);
    for i in 0..n_subjects {
        let mut rng = seeds::stream_rng(master_seed, &[TAG_SUBJECT, i as u64]);
        // Jitter stays in [0.15, 0.85] of the stratum, guaranteeing pairwise
        // distinct rates.
        let rate = 1.0 + (i as f64 + rng.gen_range(0.15..0.85)) * rate_width;
        let variability = 0.10 + (var_strata[i] as f64 + rng.gen_range(0.0..1.0)) * var_width;
        let breath = 0.18 + (breath_strata[i] as f64 + rng.gen_range(0.15..0.85)) * breath_width;
        let chest = rng.gen_range(0.95..1.05);
        let noise_seed = rng.gen::<u64>();
        out.push(SubjectProfile {
            subject_id: i as u32,
            cardiac_rate_hz: rate,
            cardiac_variability: variability,
            chest_amplitude: chest,
            breath_rate_hz: breath,
            noise_seed,
        });
    }
    Ok(out)
}

/// Synthesize one session for `(profile, activity, position)`.
///
/// Respiration carries the activity signature, cardiac carries identity plus
/// a mild activity coupling (respiratory sinus arrhythmia for Normal, guided
/// rate modulation, a slow rate drift under breath hold, erratic per-beat
/// perturbations while reading). Chest is scaled respiration plus scaled
/// cardiac plus noise; the Lying position scales chest by 0.8 and adds
/// low-frequency baseline wander.
///
/// Each session redraws what a re-recording would not preserve: independent
/// per-channel sensor gains in [0.8, 1.2], small drifts of the breathing
/// (1.5%) and cardiac (1.5%) rates around the subject's traits, and a 30%
/// jitter of the cardiac harmonic ratios.
pub fn synthesize_session(
    profile: &SubjectProfile,
    activity: Activity,
    position: Position,
    duration_s: f64,
    sample_rate_hz: f64,
) -> Result<SignalRecord> {
    if !(duration_s > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "duration_s must be positive, got {duration_s}"
        )));
    }
    if !(sample_rate_hz > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "sample_rate_hz must be positive, got {sample_rate_hz}"
        )));
    }
    let n = (duration_s * sample_rate_hz).round() as usize;
    if n == 0 {
        return Err(Error::InvalidConfig(
            "session would contain zero samples".into(),
        ));
    }

    let shape = CardiacShape::for_profile(profile);
    let mut rng = seeds::stream_rng(
        profile.noise_seed,
        &[TAG_SESSION, activity.code(), position.code()],
    );

    // Session-level nuisance draws, in fixed order for reproducibility.
    let resp_gain = rng.gen_range(0.8..1.2);
    let card_gain = rng.gen_range(0.8..1.2);
    let chest_gain = rng.gen_range(0.8..1.2);
    let breath_hz = profile.breath_rate_hz * rng.gen_range(0.985..1.015);
    let cardiac_hz = profile.cardiac_rate_hz * rng.gen_range(0.985..1.015);
    let shape = shape.session_jittered(rng.gen_range(0.7..1.3), rng.gen_range(0.7..1.3));

    let resp_clean = respiration_wave(n, sample_rate_hz, duration_s, breath_hz, activity, &mut rng);
    let card_clean = cardiac_wave(
        n,
        sample_rate_hz,
        duration_s,
        cardiac_hz,
        breath_hz,
        profile.cardiac_variability,
        activity,
        &shape,
        &mut rng,
    );

    let pos_factor = match position {
        Position::Sitting => 1.0,
        Position::Lying => 0.8,
    };
    let wander_phase = match position {
        Position::Sitting => 0.0,
        Position::Lying => rng.gen_range(0.0..TAU),
    };

    let mut respiration = Vec::with_capacity(n);
    let mut cardiac = Vec::with_capacity(n);
    let mut chest = Vec::with_capacity(n);
    for i in 0..n {
        respiration.push(resp_gain * resp_clean[i] + 0.004 * gauss(&mut rng));
        cardiac.push(card_gain * card_clean[i] + 0.004 * gauss(&mut rng));
    }
    for i in 0..n {
        let t = i as f64 / sample_rate_hz;
        let mut x = pos_factor
            * chest_gain
            * profile.chest_amplitude
            * (resp_clean[i] + 0.25 * card_clean[i]);
        if position == Position::Lying {
            x += 0.2 * (TAU * 0.04 * t + wander_phase).sin();
        }
        chest.push(x + 0.02 * gauss(&mut rng));
    }

    debug_assert!(chest.iter().chain(&respiration).chain(&cardiac).all(|v| v.is_finite()));
    Ok(SignalRecord {
        subject_id: profile.subject_id,
        activity,
        position,
        sample_rate_hz,
        chest,
        respiration,
        cardiac,
    })
}

/// Synthesize the full `subjects x activities x positions` grid, in that
/// nesting order. Pure function of its arguments.
pub fn synthesize_dataset(
    master_seed: u64,
    n_subjects: usize,
    activities: &[Activity],
    positions: &[Position],
    duration_s: f64,
    sample_rate_hz: f64,
) -> Result<Vec<SignalRecord>> {
    if activities.is_empty() {
        return Err(Error::EmptyInput("no activities requested".into()));
    }
    if positions.is_empty() {
        return Err(Error::EmptyInput("no positions requested".into()));
    }
    let profiles = generate_profiles(master_seed, n_subjects)?;
    let mut out = Vec::with_capacity(n_subjects * activities.len() * positions.len());
    for profile in &profiles {
        for &activity in activities {
            for &position in positions {
                out.push(synthesize_session(
                    profile,
                    activity,
                    position,
                    duration_s,
                    sample_rate_hz,
                )?);
            }
        }
    }
    Ok(out)
}

/// Subject-fixed harmonic shape of the cardiac beat waveform.
#[derive(Clone, Copy)]
struct CardiacShape {
    amp: f64,
    a2: f64,
    a3: f64,
    p2: f64,
    p3: f64,
}

impl CardiacShape {
    fn for_profile(profile: &SubjectProfile) -> Self {
        let mut rng = seeds::stream_rng(profile.noise_seed, &[TAG_SHAPE]);
        CardiacShape {
            // Narrow amplitude band: the per-session channel gain spans a
            // wider ratio, so waveform scale cannot identify the subject.
            amp: rng.gen_range(0.5..0.65),
            a2: rng.gen_range(0.15..0.45),
            a3: rng.gen_range(0.05..0.25),
            p2: rng.gen_range(0.0..TAU),
            p3: rng.gen_range(0.0..TAU),
        }
    }

    /// Harmonic ratios wobble between recordings; only their subject-level
    /// tendency persists.
    fn session_jittered(&self, m2: f64, m3: f64) -> Self {
        CardiacShape {
            a2: self.a2 * m2,
            a3: self.a3 * m3,
            ..*self
        }
    }

    fn sample(&self, phase: f64) -> f64 {
        self.amp
            * (phase.sin() + self.a2 * (2.0 * phase + self.p2).sin() + self.a3 * (3.0 * phase + self.p3).sin())
    }
}

fn respiration_wave(
    n: usize,
    fs: f64,
    duration_s: f64,
    breath_hz: f64,
    activity: Activity,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    // Normal and Reading overlap deliberately: a 10 s window sees only a few
    // breaths, so jitter and amplitude-spread estimates stay ambiguous and
    // windowed recognition cannot saturate. Ambiguity keeps the fitness
    // landscape a genuine two-objective surface instead of a line.
    //
    // Jitter level, amplitude span, and pause odds are redrawn per session
    // around activity-typical centers. Pattern features therefore shift
    // between a subject's recordings: a model that leans on them for
    // identity overfits one session and misses the next.
    match activity {
        Activity::Normal => {
            let jitter = rng.gen_range(0.10..0.26);
            let half_span = rng.gen_range(0.06..0.17);
            breath_train(
                n,
                fs,
                duration_s,
                breath_hz,
                jitter,
                1.0 - half_span..1.0 + half_span,
                0.0,
                rng,
            )
        }
        // Reading aloud elevates the pace above the spontaneous rate. The
        // offset is multiplicative, so reading-rate features still carry the
        // personal rate, and the reading band [0.234, 0.442] overlaps the
        // normal band across subjects: rate alone ranks high for activity
        // but cannot finish the normal/reading distinction without the
        // regularity patterns.
        Activity::Reading => {
            let jitter = rng.gen_range(0.22..0.38);
            let amp_lo = rng.gen_range(0.45..0.62);
            let amp_hi = rng.gen_range(1.10..1.35);
            let pause = rng.gen_range(0.12..0.35);
            breath_train(n, fs, duration_s, breath_hz * 1.3, jitter, amp_lo..amp_hi, pause, rng)
        }
        Activity::Guided => (0..n)
            .map(|i| (TAU * GUIDE_FREQ_HZ * i as f64 / fs).sin())
            .collect(),
        Activity::Apnea => {
            // Residual effort oscillation at a cohort-wide rate (so apnea
            // respiration carries no personal rate) plus slow drift. Peak
            // amplitude stays below 10% of any Normal session's.
            let a1 = rng.gen_range(0.017..0.025);
            let a2 = rng.gen_range(0.010..0.016);
            let p1 = rng.gen_range(0.0..TAU);
            let p2 = rng.gen_range(0.0..TAU);
            (0..n)
                .map(|i| {
                    let t = i as f64 / fs;
                    a1 * (TAU * 0.06 * t + p1).sin() + a2 * (TAU * 0.03 * t + p2).sin()
                })
                .collect()
        }
    }
}

/// Piecewise-sinusoidal breath train: one half-wave pair per breath, period
/// and amplitude redrawn per breath, optional inter-breath pauses.
fn breath_train(
    n: usize,
    fs: f64,
    duration_s: f64,
    rate_hz: f64,
    period_jitter: f64,
    amp_range: std::ops::Range<f64>,
    pause_prob: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let mut out = vec![0.0; n];
    let base_period = 1.0 / rate_hz;
    let mut t0 = 0.0;
    while t0 < duration_s {
        let period = base_period * (1.0 + rng.gen_range(-period_jitter..period_jitter));
        let amp = rng.gen_range(amp_range.clone());
        let first = (t0 * fs).ceil() as usize;
        let last = ((t0 + period) * fs).ceil() as usize;
        for i in first..last.min(n) {
            let t = i as f64 / fs;
            out[i] = amp * (TAU * (t - t0) / period).sin();
        }
        t0 += period;
        if pause_prob > 0.0 && rng.gen::<f64>() < pause_prob {
            t0 += rng.gen_range(0.5..2.0);
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn cardiac_wave(
    n: usize,
    fs: f64,
    duration_s: f64,
    rate: f64,
    breath_hz: f64,
    variability: f64,
    activity: Activity,
    shape: &CardiacShape,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    // Uniform jitter with std = variability * rate (relative units).
    let jitter_half = (3.0f64).sqrt() * variability * rate;
    let rsa_phase = rng.gen_range(0.0..TAU);
    let mut phase = rng.gen_range(0.0..TAU);
    let mut beat = (phase / TAU).floor();
    let mut beat_jitter = rng.gen_range(-jitter_half..jitter_half);
    let mut reading_pert = match activity {
        Activity::Reading => rng.gen_range(-0.04..0.04),
        _ => 0.0,
    };

    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 / fs;
        let coupling = match activity {
            Activity::Normal => 0.02 * (TAU * breath_hz * t + rsa_phase).sin(),
            Activity::Guided => 0.03 * (TAU * GUIDE_FREQ_HZ * t).sin(),
            Activity::Apnea => 0.04 * t / duration_s,
            Activity::Reading => reading_pert,
        };
        out.push(shape.sample(phase));
        let freq = rate * (1.0 + coupling) * (1.0 + beat_jitter);
        phase += TAU * freq / fs;
        if phase >= TAU * (beat + 1.0) {
            beat = (phase / TAU).floor();
            beat_jitter = rng.gen_range(-jitter_half..jitter_half);
            if activity == Activity::Reading {
                reading_pert = rng.gen_range(-0.04..0.04);
            }
        }
    }
    out
}

/// Fisher-Yates shuffle driven by the supplied stream.
fn shuffle<T>(items: &mut [T], rng: &mut ChaCha8Rng) {
    for i in (1..items.len()).rev() {
        let j = rng.gen_range(0..=i);
        items.swap(i, j);
    }
}

/// Box-Muller standard normal.
fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
}

/// Manifest describing a dataset directory written by [`write_dataset`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    /// Master seed the whole dataset derives from.
    pub seed: u64,
    pub sessions: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub subject_id: u32,
    pub activity: Activity,
    pub position: Position,
    pub sample_rate_hz: f64,
    pub n_samples: usize,
    pub file: String,
}

/// Name of the manifest file inside a dataset directory.
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Serialize, Deserialize)]
struct SampleRow {
    t: f64,
    chest: f64,
    respiration: f64,
    cardiac: f64,
}

/// Write one CSV per session (`t, chest, respiration, cardiac`) plus a JSON
/// manifest into `dir`, creating it if needed.
pub fn write_dataset(dir: &Path, records: &[SignalRecord], seed: u64) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut entries = Vec::with_capacity(records.len());
    for rec in records {
        let file = format!(
            "s{:03}_{}_{}.csv",
            rec.subject_id, rec.activity, rec.position
        );
        let mut writer = csv::Writer::from_path(dir.join(&file))?;
        for i in 0..rec.len() {
            writer.serialize(SampleRow {
                t: i as f64 / rec.sample_rate_hz,
                chest: rec.chest[i],
                respiration: rec.respiration[i],
                cardiac: rec.cardiac[i],
            })?;
        }
        writer.flush()?;
        entries.push(ManifestEntry {
            subject_id: rec.subject_id,
            activity: rec.activity,
            position: rec.position,
            sample_rate_hz: rec.sample_rate_hz,
            n_samples: rec.len(),
            file,
        });
    }
    let manifest = Manifest {
        seed,
        sessions: entries,
    };
    let json = serde_json::to_string_pretty(&manifest)?;
    fs::write(dir.join(MANIFEST_FILE), json + "\n")?;
    Ok(())
}

/// Read a dataset directory written by [`write_dataset`]. Session order
/// follows the manifest.
pub fn read_dataset(dir: &Path) -> Result<Vec<SignalRecord>> {
    let manifest = read_manifest(dir)?;
    let mut out = Vec::with_capacity(manifest.sessions.len());
    for entry in &manifest.sessions {
        let path = dir.join(&entry.file);
        out.push(read_session(&path, entry)?);
    }
    Ok(out)
}

/// Read just the manifest of a dataset directory.
pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path)
        .map_err(|e| Error::Data(format!("cannot read {}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

fn read_session(path: &PathBuf, entry: &ManifestEntry) -> Result<SignalRecord> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| Error::Data(format!("cannot open {}: {e}", path.display())))?;
    let mut chest = Vec::with_capacity(entry.n_samples);
    let mut respiration = Vec::with_capacity(entry.n_samples);
    let mut cardiac = Vec::with_capacity(entry.n_samples);
    for row in reader.deserialize::<SampleRow>() {
        let row = row.map_err(|e| Error::Data(format!("corrupt session {}: {e}", path.display())))?;
        chest.push(row.chest);
        respiration.push(row.respiration);
        cardiac.push(row.cardiac);
    }
    if chest.len() != entry.n_samples {
        return Err(Error::Data(format!(
            "session {} has {} samples, manifest says {}",
            path.display(),
            chest.len(),
            entry.n_samples
        )));
    }
    Ok(SignalRecord {
        subject_id: entry.subject_id,
        activity: entry.activity,
        position: entry.position,
        sample_rate_hz: entry.sample_rate_hz,
        chest,
        respiration,
        cardiac,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile() -> SubjectProfile {
        generate_profiles(7, 4).unwrap()[1]
    }

    #[test]
    fn profiles_respect_ranges_and_determinism() {
        let a = generate_profiles(7, 50).unwrap();
        let b = generate_profiles(7, 50).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 50);
        for p in &a {
            assert!(p.cardiac_rate_hz >= 1.0 && p.cardiac_rate_hz <= 1.3);
            assert!(p.cardiac_variability >= 0.10 && p.cardiac_variability <= 0.18);
            assert!(p.chest_amplitude >= 0.95 && p.chest_amplitude <= 1.05);
            assert!(p.breath_rate_hz >= 0.18 && p.breath_rate_hz <= 0.34);
        }
        let c = generate_profiles(8, 50).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn identity_rates_pairwise_distinct() {
        let profiles = generate_profiles(123, 50).unwrap();
        for i in 0..profiles.len() {
            for j in (i + 1)..profiles.len() {
                let cardiac = (profiles[i].cardiac_rate_hz - profiles[j].cardiac_rate_hz).abs();
                assert!(cardiac > 1e-4, "subjects {i} and {j} nearly share a beat rate");
                let breath = (profiles[i].breath_rate_hz - profiles[j].breath_rate_hz).abs();
                assert!(breath > 1e-5, "subjects {i} and {j} nearly share a breath rate");
            }
        }
    }

    #[test]
    fn zero_subjects_is_an_error() {
        assert!(generate_profiles(7, 0).is_err());
    }

    #[test]
    fn session_shape_and_determinism() {
        let p = profile();
        let a = synthesize_session(&p, Activity::Normal, Position::Sitting, 30.0, 20.0).unwrap();
        assert_eq!(a.len(), 600);
        assert_eq!(a.respiration.len(), 600);
        assert_eq!(a.cardiac.len(), 600);
        assert!(a.chest.iter().all(|v| v.is_finite()));
        let b = synthesize_session(&p, Activity::Normal, Position::Sitting, 30.0, 20.0).unwrap();
        assert_eq!(a, b);
        let c = synthesize_session(&p, Activity::Normal, Position::Lying, 30.0, 20.0).unwrap();
        assert_ne!(a.chest, c.chest);
    }

    #[test]
    fn bad_session_params_rejected() {
        let p = profile();
        assert!(synthesize_session(&p, Activity::Normal, Position::Sitting, 0.0, 20.0).is_err());
        assert!(synthesize_session(&p, Activity::Normal, Position::Sitting, 30.0, 0.0).is_err());
    }

    #[test]
    fn apnea_amplitude_contract() {
        for p in generate_profiles(7, 10).unwrap() {
            let normal =
                synthesize_session(&p, Activity::Normal, Position::Sitting, 30.0, 20.0).unwrap();
            let apnea =
                synthesize_session(&p, Activity::Apnea, Position::Sitting, 30.0, 20.0).unwrap();
            let max = |xs: &[f64]| xs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(
                max(&apnea.respiration) < 0.1 * max(&normal.respiration),
                "subject {}: apnea {} vs normal {}",
                p.subject_id,
                max(&apnea.respiration),
                max(&normal.respiration)
            );
        }
    }

    #[test]
    fn guided_peak_at_guide_frequency() {
        let p = profile();
        let rec = synthesize_session(&p, Activity::Guided, Position::Sitting, 30.0, 20.0).unwrap();
        // Naive DFT keeps this test independent of the FFT-based feature path.
        let n = rec.respiration.len();
        let mut best = (0usize, 0.0f64);
        for k in 1..n / 2 {
            let (mut re, mut im) = (0.0, 0.0);
            for (i, &x) in rec.respiration.iter().enumerate() {
                let ang = TAU * k as f64 * i as f64 / n as f64;
                re += x * ang.cos();
                im -= x * ang.sin();
            }
            let mag = re * re + im * im;
            if mag > best.1 {
                best = (k, mag);
            }
        }
        let bin_hz = 20.0 / n as f64;
        let peak_hz = best.0 as f64 * bin_hz;
        assert!(
            (peak_hz - GUIDE_FREQ_HZ).abs() <= bin_hz + 1e-12,
            "dominant respiration peak at {peak_hz} Hz"
        );
    }

    #[test]
    fn dataset_grid_and_roundtrip() {
        let recs =
            synthesize_dataset(7, 2, &Activity::ALL, &Position::ALL, 10.0, 20.0).unwrap();
        assert_eq!(recs.len(), 2 * 4 * 2);
        let again =
            synthesize_dataset(7, 2, &Activity::ALL, &Position::ALL, 10.0, 20.0).unwrap();
        assert_eq!(recs, again);

        let dir = tempfile::tempdir().unwrap();
        write_dataset(dir.path(), &recs, 7).unwrap();
        let back = read_dataset(dir.path()).unwrap();
        assert_eq!(recs, back);
        let manifest = read_manifest(dir.path()).unwrap();
        assert_eq!(manifest.seed, 7);
        assert_eq!(manifest.sessions.len(), 16);
    }

    #[test]
    fn singleton_dataset() {
        let recs = synthesize_dataset(7, 1, &[Activity::Normal], &[Position::Sitting], 10.0, 20.0)
            .unwrap();
        assert_eq!(recs.len(), 1);
        assert!(synthesize_dataset(7, 1, &[], &[Position::Sitting], 10.0, 20.0).is_err());
    }
}
