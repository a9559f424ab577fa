//! C ABI over `pcbfeat`.
//!
//! Every fallible call returns a [`PcbStatus`]; on failure the message is
//! available from [`pcb_last_error`] on the same thread. Objects are opaque
//! handles created by `*_new`/`*_load`/`*_from_*` and released by the matching
//! `*_free`. Strings returned through `char **` out-parameters are owned by the
//! caller and released with [`pcb_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use pcbfeat::imaging::{load_image, load_mask};
use pcbfeat::pipeline::{
    extract_feature_matrices, render_report, run_extract, run_rank, synth_dataset, with_jobs, PipelineConfig,
    RunSummary, SyntheticBoardSpec,
};
use pcbfeat::selection::{feature_importances, fit_forest, gini_impurity, tukey_quartiles, FeatureMatrix};
use pcbfeat::{Error, RgbRaster, SemanticMask};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcbStatus {
    Ok = 0,
    /// Some images failed; the rest were processed.
    Partial = 1,
    NullPointer = 2,
    InvalidArgument = 3,
    Io = 4,
    Format = 5,
    Config = 6,
    /// All regions fall into a single target class.
    DegenerateTarget = 7,
    /// Output buffer too small.
    BufferTooSmall = 8,
    Panic = 9,
}

/// Pipeline configuration.
pub struct PcbConfig {
    inner: PipelineConfig,
}

/// 8-bit RGB image.
pub struct PcbImage {
    inner: RgbRaster,
}

/// Per-pixel component mask (non-zero = component).
pub struct PcbMask {
    inner: SemanticMask,
}

/// Region-by-feature matrix with decile labels.
pub struct PcbFeatureMatrix {
    inner: FeatureMatrix,
    names: Vec<CString>,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PcbQuartiles {
    pub count: usize,
    pub min: f64,
    pub lower_hinge: f64,
    pub median: f64,
    pub upper_hinge: f64,
    pub max: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> PcbStatus {
    match e {
        Error::Io { .. } => PcbStatus::Io,
        Error::Format(_) => PcbStatus::Format,
        Error::Config(_) => PcbStatus::Config,
        Error::DegenerateTarget => PcbStatus::DegenerateTarget,
        _ => PcbStatus::InvalidArgument,
    }
}

struct Fail(PcbStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(PcbStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<PcbStatus, Fail>) -> PcbStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            PcbStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(PcbStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn handle_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<PcbStatus, Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(PcbStatus::Ok)
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<PcbStatus, Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = CString::new(s)
        .map_err(|_| Fail(PcbStatus::Format, "string contains a nul byte".into()))?
        .into_raw();
    Ok(PcbStatus::Ok)
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

fn summary_status(s: &RunSummary, failed: *mut usize) -> PcbStatus {
    if !failed.is_null() {
        unsafe { *failed = s.failed.len() };
    }
    if let Some((id, err)) = s.failed.first() {
        set_error(format!("{} image(s) failed; first {id}: {err}", s.failed.len()));
        PcbStatus::Partial
    } else {
        PcbStatus::Ok
    }
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn pcb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call into the library on this thread.
#[no_mangle]
pub extern "C" fn pcb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn pcb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Default configuration.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pcb_config_new(out: *mut *mut PcbConfig) -> PcbStatus {
    guard(|| {
        put(
            out,
            PcbConfig {
                inner: PipelineConfig::default(),
            },
        )
    })
}

/// Parses a JSON configuration; missing fields take defaults.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pcb_config_from_json(json: *const c_char, out: *mut *mut PcbConfig) -> PcbStatus {
    guard(|| {
        let text = str_arg(json, "json")?;
        let inner: PipelineConfig =
            serde_json::from_str(text).map_err(|e| Fail(PcbStatus::Config, format!("config: {e}")))?;
        inner.validate()?;
        put(out, PcbConfig { inner })
    })
}

/// # Safety
/// `config` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pcb_config_to_json(config: *const PcbConfig, out: *mut *mut c_char) -> PcbStatus {
    guard(|| put_string(out, handle(config, "config")?.inner.to_json()))
}

/// # Safety
/// `config` must be a live handle and `path` a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn pcb_config_set_dataset(config: *mut PcbConfig, path: *const c_char) -> PcbStatus {
    guard(|| {
        handle_mut(config, "config")?.inner.dataset = PathBuf::from(str_arg(path, "path")?);
        Ok(PcbStatus::Ok)
    })
}

/// # Safety
/// `config` must be a live handle and `path` a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn pcb_config_set_output_dir(config: *mut PcbConfig, path: *const c_char) -> PcbStatus {
    guard(|| {
        handle_mut(config, "config")?.inner.output_dir = PathBuf::from(str_arg(path, "path")?);
        Ok(PcbStatus::Ok)
    })
}

/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pcb_config_set_seed(config: *mut PcbConfig, seed: u64) -> PcbStatus {
    guard(|| {
        handle_mut(config, "config")?.inner.seed = seed;
        Ok(PcbStatus::Ok)
    })
}

/// Worker threads; 0 uses every core. Results do not depend on it.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pcb_config_set_jobs(config: *mut PcbConfig, jobs: usize) -> PcbStatus {
    guard(|| {
        handle_mut(config, "config")?.inner.jobs = (jobs > 0).then_some(jobs);
        Ok(PcbStatus::Ok)
    })
}

/// # Safety
/// `config` must be a live handle and `ksizes` point to `len` values.
#[no_mangle]
pub unsafe extern "C" fn pcb_config_set_ksizes(config: *mut PcbConfig, ksizes: *const usize, len: usize) -> PcbStatus {
    guard(|| {
        let c = handle_mut(config, "config")?;
        let mut next = c.inner.clone();
        next.ksizes = slice_arg(ksizes, len, "ksizes")?.to_vec();
        next.validate()?;
        c.inner = next;
        Ok(PcbStatus::Ok)
    })
}

/// # Safety
/// `config` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pcb_config_free(config: *mut PcbConfig) {
    free(config)
}

/// Writes `count` synthetic boards, masks and `dataset.json` into `out_dir`.
///
/// # Safety
/// `out_dir` must be a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn pcb_synth(out_dir: *const c_char, count: usize, seed: u64) -> PcbStatus {
    guard(|| {
        let spec = SyntheticBoardSpec {
            seed,
            ..SyntheticBoardSpec::default()
        };
        synth_dataset(&spec, count, str_arg(out_dir, "out_dir")?)?;
        Ok(PcbStatus::Ok)
    })
}

/// Runs extraction over the configured dataset. `failed` (optional) receives
/// the number of skipped images; `PCB_STATUS_PARTIAL` is returned if any.
///
/// # Safety
/// `config` must be a live handle; `failed` NULL or valid.
#[no_mangle]
pub unsafe extern "C" fn pcb_extract(config: *const PcbConfig, failed: *mut usize) -> PcbStatus {
    guard(|| {
        let c = &handle(config, "config")?.inner;
        let s = with_jobs(c.jobs, || run_extract(c))??;
        Ok(summary_status(&s, failed))
    })
}

/// Fits forests on the extracted CSVs and writes the importance reports.
///
/// # Safety
/// `config` must be a live handle; `failed` NULL or valid.
#[no_mangle]
pub unsafe extern "C" fn pcb_rank(config: *const PcbConfig, failed: *mut usize) -> PcbStatus {
    guard(|| {
        let c = &handle(config, "config")?.inner;
        let s = with_jobs(c.jobs, || run_rank(c))??;
        Ok(summary_status(&s, failed))
    })
}

/// Text digest of a finished rank run.
///
/// # Safety
/// `output_dir` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pcb_report(output_dir: *const c_char, out: *mut *mut c_char) -> PcbStatus {
    guard(|| put_string(out, render_report(str_arg(output_dir, "output_dir")?.as_ref())?))
}

/// Copies `width * height * 3` interleaved RGB bytes.
///
/// # Safety
/// `rgb` must point to `width * height * 3` bytes and `out` be valid.
#[no_mangle]
pub unsafe extern "C" fn pcb_image_from_rgb(
    width: usize,
    height: usize,
    rgb: *const u8,
    out: *mut *mut PcbImage,
) -> PcbStatus {
    guard(|| {
        let n = width
            .checked_mul(height)
            .and_then(|p| p.checked_mul(3))
            .ok_or_else(|| Fail(PcbStatus::InvalidArgument, "image too large".into()))?;
        let data = slice_arg(rgb, n, "rgb")?.to_vec();
        put(
            out,
            PcbImage {
                inner: RgbRaster::new(width, height, 3, data)?,
            },
        )
    })
}

/// # Safety
/// `path` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pcb_image_load(path: *const c_char, out: *mut *mut PcbImage) -> PcbStatus {
    guard(|| {
        put(
            out,
            PcbImage {
                inner: load_image(str_arg(path, "path")?)?,
            },
        )
    })
}

/// # Safety
/// `image` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pcb_image_free(image: *mut PcbImage) {
    free(image)
}

/// Copies `width * height` mask bytes.
///
/// # Safety
/// `data` must point to `width * height` bytes and `out` be valid.
#[no_mangle]
pub unsafe extern "C" fn pcb_mask_from_raw(
    width: usize,
    height: usize,
    data: *const u8,
    out: *mut *mut PcbMask,
) -> PcbStatus {
    guard(|| {
        let n = width
            .checked_mul(height)
            .ok_or_else(|| Fail(PcbStatus::InvalidArgument, "mask too large".into()))?;
        let inner = SemanticMask::from_raw(width, height, slice_arg(data, n, "data")?)?;
        put(out, PcbMask { inner })
    })
}

/// # Safety
/// `path` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pcb_mask_load(path: *const c_char, out: *mut *mut PcbMask) -> PcbStatus {
    guard(|| {
        put(
            out,
            PcbMask {
                inner: load_mask(str_arg(path, "path")?)?,
            },
        )
    })
}

/// # Safety
/// `mask` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pcb_mask_free(mask: *mut PcbMask) {
    free(mask)
}

/// Extracts the enabled feature families of one image at one ksize.
///
/// # Safety
/// Handles must be live and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pcb_features_extract(
    config: *const PcbConfig,
    image: *const PcbImage,
    mask: *const PcbMask,
    ksize: usize,
    out: *mut *mut PcbFeatureMatrix,
) -> PcbStatus {
    guard(|| {
        let mut c = handle(config, "config")?.inner.clone();
        c.ksizes = vec![ksize];
        c.validate()?;
        let (image, mask) = (&handle(image, "image")?.inner, &handle(mask, "mask")?.inner);
        let inner = with_jobs(c.jobs, || extract_feature_matrices(image, mask, "image", &c))??
            .pop()
            .expect("one ksize");
        let names = inner
            .feature_names()
            .iter()
            .map(|n| CString::new(n.as_str()).expect("feature names have no nul"))
            .collect();
        put(out, PcbFeatureMatrix { inner, names })
    })
}

/// # Safety
/// `m` must be a live handle or NULL (returns 0).
#[no_mangle]
pub unsafe extern "C" fn pcb_features_rows(m: *const PcbFeatureMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.inner.n_rows())
}

/// # Safety
/// `m` must be a live handle or NULL (returns 0).
#[no_mangle]
pub unsafe extern "C" fn pcb_features_cols(m: *const PcbFeatureMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.inner.n_features())
}

/// Column name, borrowed from the matrix; NULL when out of range.
///
/// # Safety
/// `m` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn pcb_features_name(m: *const PcbFeatureMatrix, col: usize) -> *const c_char {
    m.as_ref()
        .and_then(|m| m.names.get(col))
        .map_or(ptr::null(), |s| s.as_ptr())
}

/// Copies the values row-major into `out`, which holds `len` doubles.
///
/// # Safety
/// `m` must be a live handle and `out` point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pcb_features_values(m: *const PcbFeatureMatrix, out: *mut f64, len: usize) -> PcbStatus {
    guard(|| {
        let m = &handle(m, "matrix")?.inner;
        let need = m.n_rows() * m.n_features();
        if len < need {
            return Err(Fail(PcbStatus::BufferTooSmall, format!("need {need} values, got {len}")));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let out = std::slice::from_raw_parts_mut(out, need);
        for (dst, v) in out.iter_mut().zip(m.rows().iter().flatten()) {
            *dst = *v;
        }
        Ok(PcbStatus::Ok)
    })
}

/// Copies the per-region decile labels (0..=10) into `out`.
///
/// # Safety
/// `m` must be a live handle and `out` point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn pcb_features_labels(m: *const PcbFeatureMatrix, out: *mut u8, len: usize) -> PcbStatus {
    guard(|| {
        let labels = handle(m, "matrix")?.inner.labels();
        if len < labels.len() {
            return Err(Fail(
                PcbStatus::BufferTooSmall,
                format!("need {} labels, got {len}", labels.len()),
            ));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        std::slice::from_raw_parts_mut(out, labels.len()).copy_from_slice(labels);
        Ok(PcbStatus::Ok)
    })
}

/// Fits a forest with the configuration's forest settings and seed and
/// writes one normalized importance per column into `out`.
///
/// # Safety
/// Handles must be live and `out` point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pcb_features_importances(
    m: *const PcbFeatureMatrix,
    config: *const PcbConfig,
    out: *mut f64,
    len: usize,
) -> PcbStatus {
    guard(|| {
        let m = &handle(m, "matrix")?.inner;
        let c = &handle(config, "config")?.inner;
        if len < m.n_features() {
            return Err(Fail(
                PcbStatus::BufferTooSmall,
                format!("need {} values, got {len}", m.n_features()),
            ));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let model = with_jobs(c.jobs, || fit_forest(m, &c.forest_config()))??;
        let imp = feature_importances(&model);
        std::slice::from_raw_parts_mut(out, imp.len()).copy_from_slice(&imp);
        Ok(PcbStatus::Ok)
    })
}

/// # Safety
/// `m` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pcb_features_free(m: *mut PcbFeatureMatrix) {
    free(m)
}

/// `1 - sum p^2` of a class distribution summing to 1.
///
/// # Safety
/// `p` must point to `len` doubles and `out` be valid.
#[no_mangle]
pub unsafe extern "C" fn pcb_gini_impurity(p: *const f64, len: usize, out: *mut f64) -> PcbStatus {
    guard(|| {
        let g = gini_impurity(slice_arg(p, len, "p")?)?;
        *out.as_mut().ok_or_else(|| null("out"))? = g;
        Ok(PcbStatus::Ok)
    })
}

/// Five-number summary with Tukey hinges.
///
/// # Safety
/// `values` must point to `len` doubles and `out` be valid.
#[no_mangle]
pub unsafe extern "C" fn pcb_tukey_quartiles(values: *const f64, len: usize, out: *mut PcbQuartiles) -> PcbStatus {
    guard(|| {
        let q = tukey_quartiles("values", slice_arg(values, len, "values")?)?;
        *out.as_mut().ok_or_else(|| null("out"))? = PcbQuartiles {
            count: q.count,
            min: q.min,
            lower_hinge: q.lower_hinge,
            median: q.median,
            upper_hinge: q.upper_hinge,
            max: q.max,
        };
        Ok(PcbStatus::Ok)
    })
}
