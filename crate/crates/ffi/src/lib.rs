//! C ABI for the career-inequality toolkit.
//!
//! Conventions: every function returns a [`MatildaStatus`]; results leave
//! through out-pointers. Corpora are opaque handles created by
//! `matilda_corpus_load_snapshot` and released by `matilda_corpus_free`.
//! A loaded corpus is immutable, so one handle may be read from any
//! number of threads. The header `include/matilda.h` is regenerated at
//! build time.

use std::ffi::CStr;
use std::fs::File;
use std::io::BufReader;
use std::os::raw::c_char;

use matilda::careers::{build_series, Counting, Measure};
use matilda::corpus::{make_view, Corpus};
use matilda::error::Error;
use matilda::matthew::{estimate_cutoff, FitOptions};
use matilda::CAREER_SPAN;

/// Result of every call in this interface.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatildaStatus {
    Ok = 0,
    /// A required pointer was null.
    NullPointer = 1,
    /// Arguments violate a precondition (sizes, ranges, encodings).
    InvalidInput = 2,
    /// The statistic has no defined value for this input.
    NotComputable = 3,
    /// The file could not be read or parsed.
    Io = 4,
}

fn status_of(err: &Error) -> MatildaStatus {
    match err {
        Error::NotComputable(_) => MatildaStatus::NotComputable,
        Error::Io(_) | Error::Json(_) | Error::Csv(_) | Error::Pipeline(_) => MatildaStatus::Io,
        _ => MatildaStatus::InvalidInput,
    }
}

/// Opaque corpus handle.
pub struct MatildaCorpus {
    corpus: Corpus,
}

unsafe fn slice_arg<'a>(ptr: *const f64, len: usize) -> Option<&'a [f64]> {
    if ptr.is_null() && len > 0 {
        return None;
    }
    if len == 0 {
        return Some(&[]);
    }
    // SAFETY: caller guarantees ptr points at len readable doubles.
    Some(unsafe { std::slice::from_raw_parts(ptr, len) })
}

/// Gini coefficient of `len` nonnegative values.
///
/// # Safety
/// `values` must point at `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn matilda_gini(
    values: *const f64,
    len: usize,
    out: *mut f64,
) -> MatildaStatus {
    if out.is_null() {
        return MatildaStatus::NullPointer;
    }
    let Some(values) = (unsafe { slice_arg(values, len) }) else {
        return MatildaStatus::NullPointer;
    };
    match matilda::inequality::gini(values) {
        Ok(g) => {
            unsafe { *out = g };
            MatildaStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Mann-Whitney U for two samples: the male-group U statistic and the
/// two-sided tie-corrected p-value.
///
/// # Safety
/// Both sample pointers must cover their stated lengths; both out
/// pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn matilda_mann_whitney_u(
    male: *const f64,
    male_len: usize,
    female: *const f64,
    female_len: usize,
    u_out: *mut f64,
    p_out: *mut f64,
) -> MatildaStatus {
    if u_out.is_null() || p_out.is_null() {
        return MatildaStatus::NullPointer;
    }
    let (Some(male), Some(female)) = (
        unsafe { slice_arg(male, male_len) },
        unsafe { slice_arg(female, female_len) },
    ) else {
        return MatildaStatus::NullPointer;
    };
    match matilda::inequality::mann_whitney_u(male, female) {
        Ok(mw) => {
            unsafe {
                *u_out = mw.u;
                *p_out = mw.p;
            }
            MatildaStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Cliff's d effect size; positive values mean the first (male) sample
/// dominates.
///
/// # Safety
/// As for [`matilda_mann_whitney_u`].
#[no_mangle]
pub unsafe extern "C" fn matilda_cliffs_d(
    male: *const f64,
    male_len: usize,
    female: *const f64,
    female_len: usize,
    out: *mut f64,
) -> MatildaStatus {
    if out.is_null() {
        return MatildaStatus::NullPointer;
    }
    let (Some(male), Some(female)) = (
        unsafe { slice_arg(male, male_len) },
        unsafe { slice_arg(female, female_len) },
    ) else {
        return MatildaStatus::NullPointer;
    };
    match matilda::inequality::cliffs_d(male, female) {
        Ok(d) => {
            unsafe { *out = d };
            MatildaStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// h-index of per-publication citation counts.
///
/// # Safety
/// `counts` must point at `len` readable u64 values; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn matilda_h_index(
    counts: *const u64,
    len: usize,
    out: *mut u64,
) -> MatildaStatus {
    if out.is_null() || (counts.is_null() && len > 0) {
        return MatildaStatus::NullPointer;
    }
    let counts = if len == 0 {
        &[]
    } else {
        // SAFETY: caller guarantees counts covers len values.
        unsafe { std::slice::from_raw_parts(counts, len) }
    };
    unsafe { *out = matilda::indices::h_index(counts) };
    MatildaStatus::Ok
}

/// Scaling-law fit with automatic lower-cutoff estimation over
/// (x_prev, x_now) pairs: ln(x_now) ≈ intercept + beta·ln(x_prev) for
/// x_prev ≥ x_min. `bins` of zero uses the default binning (20).
///
/// # Safety
/// `x_prev` and `x_now` must each cover `len` readable doubles; the five
/// out pointers must be writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn matilda_fit_scaling(
    x_prev: *const f64,
    x_now: *const f64,
    len: usize,
    bins: u32,
    min_pairs: u32,
    beta_out: *mut f64,
    intercept_out: *mut f64,
    x_min_out: *mut f64,
    r2_out: *mut f64,
    n_obs_out: *mut u64,
) -> MatildaStatus {
    if beta_out.is_null()
        || intercept_out.is_null()
        || x_min_out.is_null()
        || r2_out.is_null()
        || n_obs_out.is_null()
    {
        return MatildaStatus::NullPointer;
    }
    let (Some(xs), Some(ys)) = (
        unsafe { slice_arg(x_prev, len) },
        unsafe { slice_arg(x_now, len) },
    ) else {
        return MatildaStatus::NullPointer;
    };
    let pairs: Vec<(f64, f64)> = xs.iter().copied().zip(ys.iter().copied()).collect();
    let defaults = FitOptions::default();
    let opts = FitOptions {
        bin_count: if bins == 0 { defaults.bin_count } else { bins as usize },
        min_pairs: if min_pairs == 0 {
            defaults.min_pairs
        } else {
            min_pairs as usize
        },
    };
    match estimate_cutoff(&pairs, &opts) {
        Ok(fit) => {
            unsafe {
                *beta_out = fit.beta;
                *intercept_out = fit.intercept;
                *x_min_out = fit.x_min;
                *r2_out = fit.r2;
                *n_obs_out = fit.n_obs as u64;
            }
            MatildaStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Load a corpus snapshot (the `corpus.json` the CLI writes) into an
/// opaque handle. On success the handle must be released with
/// [`matilda_corpus_free`].
///
/// # Safety
/// `path` must be a NUL-terminated UTF-8 string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn matilda_corpus_load_snapshot(
    path: *const c_char,
    out: *mut *mut MatildaCorpus,
) -> MatildaStatus {
    if path.is_null() || out.is_null() {
        return MatildaStatus::NullPointer;
    }
    let Ok(path) = (unsafe { CStr::from_ptr(path) }).to_str() else {
        return MatildaStatus::InvalidInput;
    };
    let file = match File::open(path) {
        Ok(file) => file,
        Err(_) => return MatildaStatus::Io,
    };
    match Corpus::load_snapshot(BufReader::new(file)) {
        Ok(corpus) => {
            unsafe { *out = Box::into_raw(Box::new(MatildaCorpus { corpus })) };
            MatildaStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Release a corpus handle. Null is a no-op.
///
/// # Safety
/// `handle` must come from [`matilda_corpus_load_snapshot`] and must not
/// be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn matilda_corpus_free(handle: *mut MatildaCorpus) {
    if !handle.is_null() {
        // SAFETY: ownership returns to Rust exactly once.
        drop(unsafe { Box::from_raw(handle) });
    }
}

/// Basic corpus counts.
///
/// # Safety
/// `handle` must be a live corpus handle; out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn matilda_corpus_counts(
    handle: *const MatildaCorpus,
    publications_out: *mut u64,
    authors_out: *mut u64,
    citations_out: *mut u64,
) -> MatildaStatus {
    if handle.is_null()
        || publications_out.is_null()
        || authors_out.is_null()
        || citations_out.is_null()
    {
        return MatildaStatus::NullPointer;
    }
    let corpus = unsafe { &(*handle).corpus };
    unsafe {
        *publications_out = corpus.publications().len() as u64;
        *authors_out = corpus.authors().len() as u64;
        *citations_out = corpus.citations().len() as u64;
    }
    MatildaStatus::Ok
}

/// Gini per career age for one cohort. `measure` 0 counts publications,
/// 1 citations; `window` 0 counts cumulatively, otherwise it is the
/// backward window width. Writes 15 values and 15 presence flags
/// (absent ages carry no defined value).
///
/// # Safety
/// `handle` must be live; `values_out` and `present_out` must each cover
/// 15 writable slots.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn matilda_corpus_gini_series(
    handle: *const MatildaCorpus,
    cohort: i32,
    measure: u32,
    window: u32,
    first_author_only: bool,
    dropouts_removed: bool,
    values_out: *mut f64,
    present_out: *mut bool,
) -> MatildaStatus {
    if handle.is_null() || values_out.is_null() || present_out.is_null() {
        return MatildaStatus::NullPointer;
    }
    let corpus = unsafe { &(*handle).corpus };
    let measure = match measure {
        0 => Measure::Productivity,
        1 => Measure::Impact,
        _ => return MatildaStatus::InvalidInput,
    };
    let counting = if window == 0 {
        Counting::Cumulative
    } else if window as usize <= CAREER_SPAN {
        Counting::Window(window as usize)
    } else {
        return MatildaStatus::InvalidInput;
    };
    let view = make_view(corpus, first_author_only, dropouts_removed);
    let series = build_series(&view, cohort);
    match matilda::inequality::gini_series_from(&series, measure, counting) {
        Ok(gini) => {
            for (t, value) in gini.values.iter().enumerate() {
                unsafe {
                    *values_out.add(t) = value.unwrap_or(f64::NAN);
                    *present_out.add(t) = value.is_some();
                }
            }
            MatildaStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}
