//! C ABI for the vitalsel pipeline: opaque handles, integer status codes,
//! and per-thread error messages, so other languages can bind without Rust
//! types. The generated header lives at `include/vitalsel.h`.
//!
//! Conventions:
//! - Every fallible call returns [`VsStatus`]; `Ok` is zero.
//! - On failure the call stores a message retrievable on the same thread via
//!   [`vs_last_error_message`]; release it with [`vs_string_free`].
//! - Handles from `vs_*` constructors are released with the matching
//!   `vs_*_free`; every free tolerates null.
//! - Masks cross the boundary as byte buffers with one 0/1 entry per feature
//!   in catalog order, always of length [`vs_features_cols`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use vitalsel::baselines::rfe;
use vitalsel::cli::{baseline_training, cli_split};
use vitalsel::evalproto::{pick_solution, run_logo};
use vitalsel::features::{extract_from_records, CatalogConfig, FeatureMatrix};
use vitalsel::fitness::{FitnessConfig, FitnessContext};
use vitalsel::nsga2::{evolve, FeatureMask, GaConfig, ObjectiveMode};
use vitalsel::sigsynth::{synthesize_dataset, Activity, Position};
use vitalsel::Error;

/// Status code returned by every fallible `vs_*` call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VsStatus {
    /// Success.
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    Utf8 = 2,
    /// A configuration value violates its documented range.
    InvalidConfig = 3,
    /// Input data is structurally broken (bad CSV, unknown labels, ...).
    Data = 4,
    /// A buffer or mask length does not match the feature table.
    DimensionMismatch = 5,
    /// An input was empty where rows were required.
    EmptyInput = 6,
    /// A signal was shorter than the operation requires.
    TooShort = 7,
    /// The operating system reported an I/O failure.
    Io = 8,
    /// An index argument was out of range.
    OutOfRange = 9,
    /// A panic was caught at the boundary; the error message describes it.
    Panic = 10,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure {
    status: VsStatus,
    message: String,
}

fn fail(status: VsStatus, message: impl Into<String>) -> Failure {
    Failure { status, message: message.into() }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::EmptyInput(_) => VsStatus::EmptyInput,
            Error::TooShort { .. } => VsStatus::TooShort,
            Error::DimensionMismatch(_) => VsStatus::DimensionMismatch,
            Error::InvalidConfig(_) => VsStatus::InvalidConfig,
            Error::Data(_) | Error::Csv(_) | Error::Json(_) => VsStatus::Data,
            Error::Io(_) => VsStatus::Io,
        };
        Failure { status, message: e.to_string() }
    }
}

fn set_error(message: &str) {
    // Interior NULs cannot survive the CString conversion.
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = CString::new(sanitized).ok());
}

/// Clears the error slot, runs one API body, and converts failures and
/// panics into status codes plus a stored message.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> VsStatus {
    LAST_ERROR.with(|slot| slot.borrow_mut().take());
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => VsStatus::Ok,
        Ok(Err(f)) => {
            set_error(&f.message);
            f.status
        }
        Err(payload) => {
            let text = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic crossed the FFI boundary".into());
            set_error(&text);
            VsStatus::Panic
        }
    }
}

/// # Safety
/// `ptr` must be null or valid for reads for the call's duration.
unsafe fn deref<'a, T>(ptr: *const T, name: &str) -> Result<&'a T, Failure> {
    unsafe { ptr.as_ref() }
        .ok_or_else(|| fail(VsStatus::NullPointer, format!("{name} must not be null")))
}

/// # Safety
/// `ptr` must be null or valid for writes for the call's duration.
unsafe fn deref_out<'a, T>(ptr: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    unsafe { ptr.as_mut() }
        .ok_or_else(|| fail(VsStatus::NullPointer, format!("{name} must not be null")))
}

/// # Safety
/// `ptr` must be null or point to a NUL-terminated string.
unsafe fn path_arg(ptr: *const c_char, name: &str) -> Result<PathBuf, Failure> {
    if ptr.is_null() {
        return Err(fail(VsStatus::NullPointer, format!("{name} must not be null")));
    }
    let s = unsafe { CStr::from_ptr(ptr) }
        .to_str()
        .map_err(|_| fail(VsStatus::Utf8, format!("{name} is not valid UTF-8")))?;
    Ok(PathBuf::from(s))
}

/// # Safety
/// `mask` must be null or valid for `len` bytes of reads.
unsafe fn mask_arg(
    mask: *const u8,
    len: usize,
    n_features: usize,
) -> Result<Option<FeatureMask>, Failure> {
    if mask.is_null() {
        return Ok(None);
    }
    if len != n_features {
        return Err(fail(
            VsStatus::DimensionMismatch,
            format!("mask holds {len} entries, table has {n_features} features"),
        ));
    }
    let bits = unsafe { std::slice::from_raw_parts(mask, len) };
    Ok(Some(FeatureMask { bits: bits.iter().map(|&b| b != 0).collect() }))
}

/// Opaque handle to an in-memory feature table (rows x named features).
pub struct VsFeatureTable {
    inner: FeatureMatrix,
}

/// Opaque handle to the Pareto archive produced by [`vs_select`].
pub struct VsArchive {
    masks: Vec<FeatureMask>,
    objectives: Vec<[f64; 3]>,
    picked: isize,
    n_features: usize,
}

/// GA options for [`vs_select`]; obtain defaults from
/// [`vs_ga_options_default`] and override fields as needed.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct VsGaOptions {
    /// Master seed; drives the subject split, the GA, and every forest.
    pub seed: u64,
    pub population_size: usize,
    pub max_generations: usize,
    /// Per-pair probability of uniform crossover, in [0, 1].
    pub crossover_rate: f64,
    /// Per-bit mutation probability; any negative value selects the
    /// 1/n_features default.
    pub mutation_rate: f64,
    /// Trees per forest during fitness evaluation.
    pub fitness_trees: usize,
    /// Swap the objectives: protect activity, expose identity.
    pub suppress_activity: bool,
    /// Score masks with the PCA + k-NN surrogate instead of forests.
    pub surrogate: bool,
    /// Scale crowding-distance gaps by each objective's front range.
    pub normalized_crowding: bool,
}

/// Library version as a static NUL-terminated string; do not free.
#[no_mangle]
pub extern "C" fn vs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message describing the most recent failure on this thread, or null when
/// the last call succeeded. The caller owns the returned string; release it
/// with [`vs_string_free`].
#[no_mangle]
pub extern "C" fn vs_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(ptr::null_mut(), |s| s.clone().into_raw())
    })
}

/// Releases a string returned by this library. Tolerates null.
///
/// # Safety
/// `s` must have been returned by a `vs_*` call and not freed already.
#[no_mangle]
pub unsafe extern "C" fn vs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Synthesizes the full subjects x activities x positions session grid and
/// extracts the feature catalog, returning a new table in `out`.
///
/// # Safety
/// `out` must point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn vs_synthesize_features(
    seed: u64,
    n_subjects: usize,
    duration_s: f64,
    sample_rate_hz: f64,
    out: *mut *mut VsFeatureTable,
) -> VsStatus {
    guard(|| {
        let out = unsafe { deref_out(out, "out") }?;
        let records = synthesize_dataset(
            seed,
            n_subjects,
            &Activity::ALL,
            &Position::ALL,
            duration_s,
            sample_rate_hz,
        )?;
        let inner = extract_from_records(&records, &CatalogConfig::default())?;
        *out = Box::into_raw(Box::new(VsFeatureTable { inner }));
        Ok(())
    })
}

/// Loads a feature table from a CSV written by [`vs_features_save_csv`] or
/// the `extract` CLI command.
///
/// # Safety
/// `path` must be NUL-terminated; `out` must point to writable storage for
/// one pointer.
#[no_mangle]
pub unsafe extern "C" fn vs_features_load_csv(
    path: *const c_char,
    out: *mut *mut VsFeatureTable,
) -> VsStatus {
    guard(|| {
        let out = unsafe { deref_out(out, "out") }?;
        let path = unsafe { path_arg(path, "path") }?;
        let inner = FeatureMatrix::from_csv(&path)?;
        *out = Box::into_raw(Box::new(VsFeatureTable { inner }));
        Ok(())
    })
}

/// Writes the table to CSV, one row per window with metadata columns.
///
/// # Safety
/// `table` must be a live table handle; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn vs_features_save_csv(
    table: *const VsFeatureTable,
    path: *const c_char,
) -> VsStatus {
    guard(|| {
        let table = unsafe { deref(table, "table") }?;
        let path = unsafe { path_arg(path, "path") }?;
        table.inner.to_csv(&path)?;
        Ok(())
    })
}

/// Number of rows in the table; 0 when `table` is null.
///
/// # Safety
/// `table` must be null or a live table handle.
#[no_mangle]
pub unsafe extern "C" fn vs_features_rows(table: *const VsFeatureTable) -> usize {
    unsafe { table.as_ref() }.map_or(0, |t| t.inner.n_rows())
}

/// Number of feature columns in the table; 0 when `table` is null.
///
/// # Safety
/// `table` must be null or a live table handle.
#[no_mangle]
pub unsafe extern "C" fn vs_features_cols(table: *const VsFeatureTable) -> usize {
    unsafe { table.as_ref() }.map_or(0, |t| t.inner.n_cols())
}

/// Name of feature `index`, returned as a new string the caller must release
/// with [`vs_string_free`].
///
/// # Safety
/// `table` must be a live table handle; `out` must point to writable storage
/// for one pointer.
#[no_mangle]
pub unsafe extern "C" fn vs_features_name(
    table: *const VsFeatureTable,
    index: usize,
    out: *mut *mut c_char,
) -> VsStatus {
    guard(|| {
        let out = unsafe { deref_out(out, "out") }?;
        let table = unsafe { deref(table, "table") }?;
        let name = table.inner.names.get(index).ok_or_else(|| {
            fail(
                VsStatus::OutOfRange,
                format!(
                    "feature index {index} out of range for {} features",
                    table.inner.n_cols()
                ),
            )
        })?;
        let c = CString::new(name.as_str())
            .map_err(|_| fail(VsStatus::Utf8, "feature name contains NUL"))?;
        *out = c.into_raw();
        Ok(())
    })
}

/// Releases a table handle. Tolerates null.
///
/// # Safety
/// `table` must be null or a live handle from this library, not freed twice.
#[no_mangle]
pub unsafe extern "C" fn vs_features_free(table: *mut VsFeatureTable) {
    if !table.is_null() {
        drop(unsafe { Box::from_raw(table) });
    }
}

/// The GA defaults used by the CLI: population 50, 30 generations, crossover
/// 0.9, 1/n mutation, 50-tree fitness forests, identity suppressed.
#[no_mangle]
pub extern "C" fn vs_ga_options_default(seed: u64) -> VsGaOptions {
    VsGaOptions {
        seed,
        population_size: 50,
        max_generations: 30,
        crossover_rate: 0.9,
        mutation_rate: -1.0,
        fitness_trees: 50,
        suppress_activity: false,
        surrogate: false,
        normalized_crowding: false,
    }
}

/// Runs multi-objective selection: derives the train/validation/test subject
/// split from `options.seed`, evolves masks on the train subjects with the
/// validation group held out, and returns the Pareto archive in `out`.
///
/// # Safety
/// `table` and `options` must be live; `out` must point to writable storage
/// for one pointer.
#[no_mangle]
pub unsafe extern "C" fn vs_select(
    table: *const VsFeatureTable,
    options: *const VsGaOptions,
    out: *mut *mut VsArchive,
) -> VsStatus {
    guard(|| {
        let out = unsafe { deref_out(out, "out") }?;
        let table = unsafe { deref(table, "table") }?;
        let opt = unsafe { deref(options, "options") }?;
        let features = &table.inner;
        let mode = if opt.suppress_activity {
            ObjectiveMode::SuppressActivity
        } else {
            ObjectiveMode::SuppressIdentity
        };

        let split = cli_split(features, opt.seed)?;
        let mut fit_cfg = FitnessConfig::new(opt.seed);
        fit_cfg.objective_mode = mode;
        fit_cfg.surrogate = opt.surrogate;
        fit_cfg.fitness_trees = opt.fitness_trees;
        let ctx = FitnessContext::new(
            features,
            &split.train_subjects,
            &split.validation_subjects,
            fit_cfg,
        )?;

        let ga = GaConfig {
            n_features: features.n_cols(),
            population_size: opt.population_size,
            max_generations: opt.max_generations,
            crossover_rate: opt.crossover_rate,
            mutation_rate: (opt.mutation_rate >= 0.0).then_some(opt.mutation_rate),
            seed: opt.seed,
            objective_mode: mode,
            normalized_crowding: opt.normalized_crowding,
        };
        let archive = evolve(&ga, |m| ctx.objectives(m))?;

        let picked = pick_solution(&archive)
            .and_then(|p| archive.members().iter().position(|m| ptr::eq(m, p)))
            .map_or(-1, |i| i as isize);
        let members = archive.members();
        *out = Box::into_raw(Box::new(VsArchive {
            masks: members.iter().map(|m| m.mask.clone()).collect(),
            objectives: members.iter().map(|m| m.objectives).collect(),
            picked,
            n_features: features.n_cols(),
        }));
        Ok(())
    })
}

/// Number of archive members; 0 when `archive` is null.
///
/// # Safety
/// `archive` must be null or a live archive handle.
#[no_mangle]
pub unsafe extern "C" fn vs_archive_len(archive: *const VsArchive) -> usize {
    unsafe { archive.as_ref() }.map_or(0, |a| a.masks.len())
}

/// Index of the deployment pick (best trade-off objective, ties broken
/// toward higher recognition), or -1 when the archive is empty or null.
///
/// # Safety
/// `archive` must be null or a live archive handle.
#[no_mangle]
pub unsafe extern "C" fn vs_archive_picked(archive: *const VsArchive) -> isize {
    unsafe { archive.as_ref() }.map_or(-1, |a| a.picked)
}

/// Copies the three objectives of member `index` into `out[0..3]`.
///
/// # Safety
/// `archive` must be live; `out` must be valid for three writes.
#[no_mangle]
pub unsafe extern "C" fn vs_archive_objectives(
    archive: *const VsArchive,
    index: usize,
    out: *mut f64,
) -> VsStatus {
    guard(|| {
        let archive = unsafe { deref(archive, "archive") }?;
        if out.is_null() {
            return Err(fail(VsStatus::NullPointer, "out must not be null"));
        }
        let objectives = archive.objectives.get(index).ok_or_else(|| {
            fail(
                VsStatus::OutOfRange,
                format!(
                    "member index {index} out of range for {} members",
                    archive.objectives.len()
                ),
            )
        })?;
        unsafe { ptr::copy_nonoverlapping(objectives.as_ptr(), out, 3) };
        Ok(())
    })
}

/// Copies member `index`'s mask into `out[0..len]` as 0/1 bytes; `len` must
/// equal the source table's feature count.
///
/// # Safety
/// `archive` must be live; `out` must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn vs_archive_mask(
    archive: *const VsArchive,
    index: usize,
    out: *mut u8,
    len: usize,
) -> VsStatus {
    guard(|| {
        let archive = unsafe { deref(archive, "archive") }?;
        if out.is_null() {
            return Err(fail(VsStatus::NullPointer, "out must not be null"));
        }
        let mask = archive.masks.get(index).ok_or_else(|| {
            fail(
                VsStatus::OutOfRange,
                format!(
                    "member index {index} out of range for {} members",
                    archive.masks.len()
                ),
            )
        })?;
        if len != archive.n_features {
            return Err(fail(
                VsStatus::DimensionMismatch,
                format!(
                    "mask buffer holds {len} entries, table has {} features",
                    archive.n_features
                ),
            ));
        }
        let out = unsafe { std::slice::from_raw_parts_mut(out, len) };
        for (dst, &bit) in out.iter_mut().zip(&mask.bits) {
            *dst = bit as u8;
        }
        Ok(())
    })
}

/// Releases an archive handle. Tolerates null.
///
/// # Safety
/// `archive` must be null or a live handle from this library, not freed twice.
#[no_mangle]
pub unsafe extern "C" fn vs_archive_free(archive: *mut VsArchive) {
    if !archive.is_null() {
        drop(unsafe { Box::from_raw(archive) });
    }
}

/// Leave-one-group-out evaluation of `mask` (null for all features) over
/// `repeats` reshuffles; writes micro-averaged accuracies. Pass null for
/// `identification_out` when only recognition is wanted.
///
/// # Safety
/// `table` must be live; `mask` must be null or valid for `mask_len` reads;
/// `recognition_out` must be valid for one write, and `identification_out`
/// null or valid for one write.
#[no_mangle]
pub unsafe extern "C" fn vs_evaluate_logo(
    table: *const VsFeatureTable,
    mask: *const u8,
    mask_len: usize,
    repeats: usize,
    seed: u64,
    recognition_out: *mut f64,
    identification_out: *mut f64,
) -> VsStatus {
    guard(|| {
        let table = unsafe { deref(table, "table") }?;
        let rec_out = unsafe { deref_out(recognition_out, "recognition_out") }?;
        let mask = unsafe { mask_arg(mask, mask_len, table.inner.n_cols()) }?;
        let report = run_logo(&table.inner, mask.as_ref(), repeats, seed)?;
        *rec_out = report.recognition_accuracy;
        if let Some(id_out) = unsafe { identification_out.as_mut() } {
            *id_out = report.identification_accuracy.unwrap_or(f64::NAN);
        }
        Ok(())
    })
}

/// Recursive feature elimination down to `n_target` features, dropping
/// `step` per round, trained on the standardized train + validation rows of
/// the seed-derived split; writes the survivor mask into `out[0..len]`.
///
/// # Safety
/// `table` must be live; `out` must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn vs_rfe(
    table: *const VsFeatureTable,
    n_target: usize,
    step: usize,
    seed: u64,
    out: *mut u8,
    len: usize,
) -> VsStatus {
    guard(|| {
        let table = unsafe { deref(table, "table") }?;
        if out.is_null() {
            return Err(fail(VsStatus::NullPointer, "out must not be null"));
        }
        let features = &table.inner;
        if len != features.n_cols() {
            return Err(fail(
                VsStatus::DimensionMismatch,
                format!(
                    "mask buffer holds {len} entries, table has {} features",
                    features.n_cols()
                ),
            ));
        }
        let split = cli_split(features, seed)?;
        let (train, y) = baseline_training(features, &split)?;
        let mask = rfe(&train.data, train.n_cols(), &y, n_target, step, seed)?;
        let out = unsafe { std::slice::from_raw_parts_mut(out, len) };
        for (dst, &bit) in out.iter_mut().zip(&mask.bits) {
            *dst = bit as u8;
        }
        Ok(())
    })
}
