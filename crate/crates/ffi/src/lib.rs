//! C ABI over trained model archives.
//!
//! Every fallible function returns an [`AugtagStatus`]; on failure a message
//! is available from [`augtag_last_error`] on the same thread. Models are
//! opaque handles created by [`augtag_model_load`] and released with
//! [`augtag_model_free`]. A handle may be shared across threads for reading.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use augtag::corpus::Split;
use augtag::dat::reward;
use augtag::pipeline::infer_stage;
use augtag::tagger::{BaseTagger, Source};
use augtag::{Corpus, Error, LabelId, ModelArchive, Sentence, Token};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AugtagStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    InvalidArgument = 4,
    InvalidModel = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// Opaque handle to a loaded model archive.
pub struct AugtagModel {
    archive: ModelArchive,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let message = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(message).ok());
}

struct Failure(AugtagStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Io(_) => AugtagStatus::Io,
            Error::Archive(_) => AugtagStatus::InvalidModel,
            _ => AugtagStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn fail<T>(status: AugtagStatus, message: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(status, message.into()))
}

/// Runs `f`, recording any error or panic for [`augtag_last_error`].
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> AugtagStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            AugtagStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            AugtagStatus::Panic
        }
    }
}

unsafe fn model_ref<'a>(model: *const AugtagModel) -> Result<&'a AugtagModel, Failure> {
    match unsafe { model.as_ref() } {
        Some(m) => Ok(m),
        None => fail(AugtagStatus::NullPointer, "model handle is null"),
    }
}

unsafe fn c_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return fail(AugtagStatus::NullPointer, format!("{what} is null"));
    }
    match unsafe { CStr::from_ptr(s) }.to_str() {
        Ok(s) => Ok(s),
        Err(_) => fail(AugtagStatus::InvalidUtf8, format!("{what} is not valid UTF-8")),
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if p.is_null() {
        return fail(AugtagStatus::NullPointer, format!("{what} is null"));
    }
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if p.is_null() {
        return fail(AugtagStatus::NullPointer, format!("{what} is null"));
    }
    Ok(unsafe { std::slice::from_raw_parts_mut(p, len) })
}

/// One-sentence corpus over the model's inventory. Gold labels are
/// placeholders; inference never reads them.
unsafe fn sentence_corpus(
    model: &AugtagModel,
    words: *const *const c_char,
    num_words: usize,
) -> Result<Corpus, Failure> {
    if num_words == 0 {
        return fail(AugtagStatus::InvalidArgument, "sentence has no words");
    }
    let ptrs = unsafe { slice(words, num_words, "words") }?;
    let tokens = ptrs
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            Ok(Token {
                surface: unsafe { c_str(w, &format!("word {i}")) }?.to_string(),
                gold: LabelId(0),
            })
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    Ok(Corpus {
        sentences: vec![Sentence::new(tokens)?],
        inventory: model.archive.inventory.clone(),
        split: Split::Test,
    })
}

/// Loads an archive written by `augtag train-base` or `augtag train-dat`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn augtag_model_load(path: *const c_char, out: *mut *mut AugtagModel) -> AugtagStatus {
    guard(|| {
        if out.is_null() {
            return fail(AugtagStatus::NullPointer, "output pointer is null");
        }
        unsafe { *out = ptr::null_mut() };
        let path = unsafe { c_str(path, "path") }?;
        let archive = ModelArchive::load(Path::new(path))?;
        unsafe { *out = Box::into_raw(Box::new(AugtagModel { archive })) };
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `model` must come from [`augtag_model_load`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn augtag_model_free(model: *mut AugtagModel) {
    if !model.is_null() {
        drop(unsafe { Box::from_raw(model) });
    }
}

/// Number of labels, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn augtag_model_num_labels(model: *const AugtagModel) -> usize {
    unsafe { model.as_ref() }.map_or(0, |m| m.archive.inventory.len())
}

/// Whether the archive holds an augmented tagger. Without one, tagging
/// returns the base tagger's labels.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn augtag_model_has_dat(model: *const AugtagModel) -> bool {
    unsafe { model.as_ref() }.is_some_and(|m| m.archive.dat.is_some())
}

/// Copies the NUL-terminated name of label `id` into `buf`.
///
/// `*needed` (if non-null) receives the required size including the
/// terminator; a short buffer fails with `AUGTAG_STATUS_BUFFER_TOO_SMALL`
/// and is left untouched.
///
/// # Safety
/// `buf` must hold `buf_len` writable bytes, or be null when `buf_len` is 0.
#[no_mangle]
pub unsafe extern "C" fn augtag_model_label_name(
    model: *const AugtagModel,
    id: u32,
    buf: *mut c_char,
    buf_len: usize,
    needed: *mut usize,
) -> AugtagStatus {
    guard(|| {
        let model = unsafe { model_ref(model) }?;
        let inventory = &model.archive.inventory;
        if id as usize >= inventory.len() {
            return fail(
                AugtagStatus::InvalidArgument,
                format!("label id {id} out of range for {} labels", inventory.len()),
            );
        }
        let name = inventory.name(LabelId(id)).as_bytes();
        if !needed.is_null() {
            unsafe { *needed = name.len() + 1 };
        }
        if buf_len < name.len() + 1 {
            return fail(AugtagStatus::BufferTooSmall, format!("label name needs {} bytes", name.len() + 1));
        }
        let dst = unsafe { slice_mut(buf.cast::<u8>(), buf_len, "buf") }?;
        dst[..name.len()].copy_from_slice(name);
        dst[name.len()] = 0;
        Ok(())
    })
}

/// Base-tagger distributions for one sentence, written row-major into
/// `out` (`num_words * num_labels` values).
///
/// # Safety
/// `words` must point to `num_words` NUL-terminated strings and `out` to
/// `out_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn augtag_model_distribution(
    model: *const AugtagModel,
    words: *const *const c_char,
    num_words: usize,
    out: *mut f64,
    out_len: usize,
) -> AugtagStatus {
    guard(|| {
        let model = unsafe { model_ref(model) }?;
        let corpus = unsafe { sentence_corpus(model, words, num_words) }?;
        let w = model.archive.inventory.len();
        if out_len < num_words * w {
            return fail(
                AugtagStatus::BufferTooSmall,
                format!("distribution needs {} values", num_words * w),
            );
        }
        let out = unsafe { slice_mut(out, out_len, "out") }?;
        let rows = model.archive.base.predict_distribution(&corpus.sentences[0])?;
        for (dst, row) in out.chunks_mut(w).zip(&rows) {
            dst.copy_from_slice(row);
        }
        Ok(())
    })
}

/// Tags one sentence. Tokens whose top base probability is below
/// `threshold` are relabelled by the augmented tagger when the archive has
/// one.
///
/// `labels` receives `num_words` label ids. `relabelled` (nullable) receives
/// 1 for tokens labelled by the augmented tagger and 0 otherwise.
///
/// # Safety
/// `words` must point to `num_words` NUL-terminated strings; `labels`, and
/// `relabelled` when non-null, must hold `num_words` writable elements.
#[no_mangle]
pub unsafe extern "C" fn augtag_model_tag(
    model: *const AugtagModel,
    words: *const *const c_char,
    num_words: usize,
    threshold: f64,
    labels: *mut u32,
    relabelled: *mut u8,
) -> AugtagStatus {
    guard(|| {
        let model = unsafe { model_ref(model) }?;
        if !(0.0..=1.0).contains(&threshold) {
            return fail(AugtagStatus::InvalidArgument, format!("threshold {threshold} outside [0, 1]"));
        }
        let corpus = unsafe { sentence_corpus(model, words, num_words) }?;
        let labels = unsafe { slice_mut(labels, num_words, "labels") }?;
        let outcome = infer_stage(&model.archive, &corpus, threshold, 1)?;
        let tokens = &outcome.predictions.sentences[0];
        for (dst, t) in labels.iter_mut().zip(tokens) {
            *dst = t.label().0;
        }
        if !relabelled.is_null() {
            let flags = unsafe { slice_mut(relabelled, num_words, "relabelled") }?;
            for (dst, t) in flags.iter_mut().zip(tokens) {
                *dst = u8::from(t.source == Some(Source::Dat));
            }
        }
        Ok(())
    })
}

/// Reward for moving to the label encoded by `o_state` when the truth is
/// `o_true` and the base distribution is `p`; all three have length `len`.
///
/// # Safety
/// The three inputs must hold `len` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn augtag_reward(
    o_true: *const f64,
    o_state: *const f64,
    p: *const f64,
    len: usize,
    epsilon: f64,
    out: *mut f64,
) -> AugtagStatus {
    guard(|| {
        let o_true = unsafe { slice(o_true, len, "o_true") }?;
        let o_state = unsafe { slice(o_state, len, "o_state") }?;
        let p = unsafe { slice(p, len, "p") }?;
        if out.is_null() {
            return fail(AugtagStatus::NullPointer, "out is null");
        }
        let r = reward(o_true, o_state, p, epsilon)?;
        unsafe { *out = r };
        Ok(())
    })
}

/// Message for the most recent failure on this thread, or null after a
/// success. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn augtag_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn augtag_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
