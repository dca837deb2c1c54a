//! C ABI for `qpca`.
//!
//! Every fallible function returns a [`QpcaStatus`]; on failure the message is
//! available from [`qpca_last_error_message`] on the same thread. Models are
//! opaque [`QpcaModel`] handles released with [`qpca_model_free`]. Strings
//! returned by the library are released with [`qpca_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qpca::classifier::{self, ClassifierModel, ClassifyOptions, TrainOptions};
use qpca::model_io;
use qpca::pca::ComponentSelection;
use qpca::quantum::Outcome;
use qpca::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QpcaStatus {
    Ok = 0,
    DimensionError = 1,
    NormalizationError = 2,
    NotProjectorError = 3,
    ZeroProbabilityError = 4,
    DegenerateSampleError = 5,
    NumericalError = 6,
    RankError = 7,
    RangeError = 8,
    ModelIntegrityError = 9,
    ParseError = 10,
    FormatError = 11,
    VersionError = 12,
    UsageError = 13,
    IoError = 14,
    NullPointer = 15,
    InvalidUtf8 = 16,
    Panic = 17,
}

impl From<&Error> for QpcaStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Dimension(_) => Self::DimensionError,
            Error::Normalization { .. } => Self::NormalizationError,
            Error::NotProjector(_) => Self::NotProjectorError,
            Error::ZeroProbability => Self::ZeroProbabilityError,
            Error::DegenerateSample { .. } => Self::DegenerateSampleError,
            Error::Numerical(_) => Self::NumericalError,
            Error::Rank { .. } => Self::RankError,
            Error::Range(_) => Self::RangeError,
            Error::ModelIntegrity(_) => Self::ModelIntegrityError,
            Error::Parse { .. } => Self::ParseError,
            Error::Format(_) => Self::FormatError,
            Error::Version { .. } => Self::VersionError,
            Error::Usage(_) => Self::UsageError,
            Error::Io { .. } => Self::IoError,
        }
    }
}

/// Opaque trained classifier.
pub struct QpcaModel {
    inner: ClassifierModel,
}

/// Closed-form probabilities for one input.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct QpcaAnalytic {
    pub likelihood: f64,
    pub per_trial_probability: f64,
    pub trials: u64,
    pub overall_yes_probability: f64,
    pub overall_no_probability: f64,
    pub input_norm: f64,
}

/// Outcome of the repeated-measurement protocol.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct QpcaClassification {
    /// 1 for yes, 0 for no.
    pub decision: i32,
    pub trials_run: u64,
    /// Zero-based index of the first positive trial, or -1.
    pub positive_trial_index: i64,
    pub per_trial_probability: f64,
    pub analytic_overall_no_probability: f64,
    pub seed: u64,
    pub input_norm: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

struct Failure(QpcaStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(QpcaStatus::from(&e), format!("{}: {e}", e.kind()))
    }
}

fn null(what: &str) -> Failure {
    Failure(QpcaStatus::NullPointer, format!("{what} is null"))
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> QpcaStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => QpcaStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(_) => {
            set_last_error("panic inside qpca".to_string());
            QpcaStatus::Panic
        }
    }
}

unsafe fn model_ref<'a>(model: *const QpcaModel) -> Result<&'a ClassifierModel, Failure> {
    model
        .as_ref()
        .map(|m| &m.inner)
        .ok_or_else(|| null("model"))
}

unsafe fn input<'a>(
    model: &ClassifierModel,
    x: *const f64,
    len: usize,
) -> Result<&'a [f64], Failure> {
    if x.is_null() {
        return Err(null("input"));
    }
    if len != model.pixel_count() {
        return Err(Error::Dimension(format!(
            "input has {len} features, model expects {}",
            model.pixel_count()
        ))
        .into());
    }
    Ok(std::slice::from_raw_parts(x, len))
}

unsafe fn path_arg<'a>(path: *const c_char) -> Result<&'a str, Failure> {
    if path.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(path)
        .to_str()
        .map_err(|_| Failure(QpcaStatus::InvalidUtf8, "path is not valid UTF-8".into()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn qpca_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failing call on this thread, or null. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qpca_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static name of a status code, e.g. `"RankError"`.
#[no_mangle]
pub extern "C" fn qpca_status_name(status: QpcaStatus) -> *const c_char {
    let name: &'static str = match status {
        QpcaStatus::Ok => "Ok\0",
        QpcaStatus::DimensionError => "DimensionError\0",
        QpcaStatus::NormalizationError => "NormalizationError\0",
        QpcaStatus::NotProjectorError => "NotProjectorError\0",
        QpcaStatus::ZeroProbabilityError => "ZeroProbabilityError\0",
        QpcaStatus::DegenerateSampleError => "DegenerateSampleError\0",
        QpcaStatus::NumericalError => "NumericalError\0",
        QpcaStatus::RankError => "RankError\0",
        QpcaStatus::RangeError => "RangeError\0",
        QpcaStatus::ModelIntegrityError => "ModelIntegrityError\0",
        QpcaStatus::ParseError => "ParseError\0",
        QpcaStatus::FormatError => "FormatError\0",
        QpcaStatus::VersionError => "VersionError\0",
        QpcaStatus::UsageError => "UsageError\0",
        QpcaStatus::IoError => "IoError\0",
        QpcaStatus::NullPointer => "NullPointer\0",
        QpcaStatus::InvalidUtf8 => "InvalidUtf8\0",
        QpcaStatus::Panic => "Panic\0",
    };
    name.as_ptr().cast()
}

/// Trains on `sample_count` row-major samples of `feature_count` values in
/// `[0, 1]`. `components == 0` selects by the default variance threshold.
///
/// # Safety
/// `samples` must point to `sample_count * feature_count` readable doubles
/// and `out` to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn qpca_model_train(
    samples: *const f64,
    sample_count: usize,
    feature_count: usize,
    components: usize,
    center: bool,
    out: *mut *mut QpcaModel,
) -> QpcaStatus {
    guard(|| {
        if samples.is_null() {
            return Err(null("samples"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let total = sample_count.checked_mul(feature_count).ok_or_else(|| {
            Failure::from(Error::Dimension("sample matrix size overflows".into()))
        })?;
        let data = std::slice::from_raw_parts(samples, total);
        let rows: Vec<&[f64]> = if feature_count == 0 {
            Vec::new()
        } else {
            data.chunks(feature_count).collect()
        };
        let selection = match components {
            0 => ComponentSelection::default(),
            s => ComponentSelection::Count(s),
        };
        let options = TrainOptions {
            selection,
            center,
            ..Default::default()
        };
        let report = classifier::train(&rows, &options)?;
        *out = Box::into_raw(Box::new(QpcaModel {
            inner: report.model,
        }));
        Ok(())
    })
}

/// # Safety
/// `path` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qpca_model_load(
    path: *const c_char,
    out: *mut *mut QpcaModel,
) -> QpcaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let model = model_io::load_model_file(path_arg(path)?)?;
        *out = Box::into_raw(Box::new(QpcaModel { inner: model }));
        Ok(())
    })
}

/// Parses a model from its JSON text.
///
/// # Safety
/// `text` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qpca_model_from_json(
    text: *const c_char,
    out: *mut *mut QpcaModel,
) -> QpcaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if text.is_null() {
            return Err(null("text"));
        }
        let text = CStr::from_ptr(text).to_str().map_err(|_| {
            Failure(
                QpcaStatus::InvalidUtf8,
                "model text is not valid UTF-8".into(),
            )
        })?;
        let model = model_io::model_from_str(text)?;
        *out = Box::into_raw(Box::new(QpcaModel { inner: model }));
        Ok(())
    })
}

/// # Safety
/// `model` must come from this library; `path` must be a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn qpca_model_save(
    model: *const QpcaModel,
    path: *const c_char,
) -> QpcaStatus {
    guard(|| {
        let model = model_ref(model)?;
        model_io::save_model_file(model, path_arg(path)?)?;
        Ok(())
    })
}

/// Serializes the model; release the string with [`qpca_string_free`].
///
/// # Safety
/// `model` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qpca_model_to_json(
    model: *const QpcaModel,
    out: *mut *mut c_char,
) -> QpcaStatus {
    guard(|| {
        let model = model_ref(model)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CString::new(model_io::model_to_string(model)).expect("JSON has no nul bytes");
        *out = text.into_raw();
        Ok(())
    })
}

/// # Safety
/// `text` must be null or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn qpca_string_free(text: *mut c_char) {
    if !text.is_null() {
        drop(CString::from_raw(text));
    }
}

/// # Safety
/// `model` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn qpca_model_free(model: *mut QpcaModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Pixel count `n`, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qpca_model_pixel_count(model: *const QpcaModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.pixel_count())
}

/// Component count `s`, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qpca_model_component_count(model: *const QpcaModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.component_count())
}

/// Block dimension `k`, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qpca_model_block_dim(model: *const QpcaModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.block_dim())
}

/// # Safety
/// `x` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qpca_classical_likelihood(
    model: *const QpcaModel,
    x: *const f64,
    len: usize,
    out: *mut f64,
) -> QpcaStatus {
    guard(|| {
        let model = model_ref(model)?;
        let x = input(model, x, len)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = classifier::classical_likelihood(model, x)?;
        Ok(())
    })
}

/// # Safety
/// `x` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qpca_yes_probability(
    model: *const QpcaModel,
    x: *const f64,
    len: usize,
    out: *mut f64,
) -> QpcaStatus {
    guard(|| {
        let model = model_ref(model)?;
        let x = input(model, x, len)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = classifier::yes_probability(model, x)?;
        Ok(())
    })
}

/// `trials == 0` uses the model's `n^2`.
///
/// # Safety
/// `x` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qpca_analyze(
    model: *const QpcaModel,
    x: *const f64,
    len: usize,
    trials: u64,
    out: *mut QpcaAnalytic,
) -> QpcaStatus {
    guard(|| {
        let model = model_ref(model)?;
        let x = input(model, x, len)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let r = classifier::analyze(model, x, (trials > 0).then_some(trials))?;
        *out = QpcaAnalytic {
            likelihood: r.likelihood,
            per_trial_probability: r.per_trial_probability,
            trials: r.trials,
            overall_yes_probability: r.overall_yes_probability,
            overall_no_probability: r.overall_no_probability,
            input_norm: r.input_norm,
        };
        Ok(())
    })
}

/// Runs the seeded protocol. `trials == 0` uses the model's `n^2`.
///
/// # Safety
/// `x` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qpca_classify(
    model: *const QpcaModel,
    x: *const f64,
    len: usize,
    seed: u64,
    trials: u64,
    out: *mut QpcaClassification,
) -> QpcaStatus {
    guard(|| {
        let model = model_ref(model)?;
        let x = input(model, x, len)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let options = ClassifyOptions {
            seed,
            trials: (trials > 0).then_some(trials),
        };
        let r = classifier::classify_with(model, x, options)?;
        *out = QpcaClassification {
            decision: i32::from(r.decision == Outcome::Yes),
            trials_run: r.trials_run,
            positive_trial_index: r.positive_trial_index.map_or(-1, |i| i as i64),
            per_trial_probability: r.per_trial_probability,
            analytic_overall_no_probability: r.analytic_overall_no_probability,
            seed: r.seed,
            input_norm: r.input_norm,
        };
        Ok(())
    })
}
