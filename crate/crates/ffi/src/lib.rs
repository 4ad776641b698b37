//! C interface to `hexloop`.
//!
//! Every function returns an [`HxlStatus`]. On failure the message is kept
//! per thread and read with [`hxl_last_error`]. Handles are opaque and must
//! be released with their `_free` function; passing null to `_free` is a
//! no-op.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use hexloop::glauber::{initial_config, Chain};
use hexloop::kasteleyn::{edge_probabilities, hexagon_triple_probability, kinv_entry, EdgeDisplacement, WeightTriple};
use hexloop::matching::{read_all, AnyConfig};
use hexloop::render::{render_edges, Layer, RenderOptions};
use hexloop::{DimerConfig, EdgeConfig, Error, FaceCoord, Lattice};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HxlStatus {
    Ok = 0,
    NullPointer = 1,
    /// Invalid argument or configuration.
    Invalid = 2,
    /// A documented precondition failed (frozen weights, empty sector, ...).
    Precondition = 3,
    /// An internal consistency check failed.
    Invariant = 4,
    Panic = 5,
}

/// A dimer configuration on a torus.
pub struct HxlConfig {
    inner: DimerConfig,
}

/// A flip Markov chain.
pub struct HxlChain {
    inner: Chain,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> HxlStatus {
    match e.exit_code() {
        2 => HxlStatus::Invalid,
        3 => HxlStatus::Precondition,
        _ => HxlStatus::Invariant,
    }
}

fn guard(f: impl FnOnce() -> Result<(), HxlStatus>) -> HxlStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HxlStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("panic inside hexloop");
            HxlStatus::Panic
        }
    }
}

fn check<T>(r: hexloop::Result<T>) -> Result<T, HxlStatus> {
    r.map_err(|e| {
        set_error(&e.to_string());
        status_of(&e)
    })
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), HxlStatus> {
    if p.is_null() {
        set_error(&format!("{name} is null"));
        return Err(HxlStatus::NullPointer);
    }
    Ok(())
}

fn weights(a: f64, b: f64, c: f64) -> Result<WeightTriple, HxlStatus> {
    check(WeightTriple::new(a, b, c))
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn hxl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hxl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Limiting A, B and C edge probabilities for weights `(a, b, c)`.
///
/// # Safety
/// `out` must point to 3 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn hxl_edge_probabilities(a: f64, b: f64, c: f64, out: *mut f64) -> HxlStatus {
    guard(|| {
        non_null(out, "out")?;
        let (pa, pb, pc) = check(edge_probabilities(&weights(a, b, c)?))?;
        let out = std::slice::from_raw_parts_mut(out, 3);
        out.copy_from_slice(&[pa, pb, pc]);
        Ok(())
    })
}

/// Probability that a hexagon carries a given alternating edge triple.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hxl_hexagon_triple_probability(a: f64, b: f64, c: f64, out: *mut f64) -> HxlStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = check(hexagon_triple_probability(&weights(a, b, c)?))?;
        Ok(())
    })
}

/// Inverse Kasteleyn entry for the cell displacement `(dn, dm)` from the
/// white to the black vertex.
///
/// # Safety
/// `value` must be writable; `error_estimate` may be null.
#[no_mangle]
pub unsafe extern "C" fn hxl_kinv_entry(
    a: f64,
    b: f64,
    c: f64,
    dn: i32,
    dm: i32,
    tol: f64,
    value: *mut f64,
    error_estimate: *mut f64,
) -> HxlStatus {
    guard(|| {
        non_null(value, "value")?;
        let v = check(kinv_entry(&weights(a, b, c)?, EdgeDisplacement::new(dn, dm), tol))?;
        *value = v.value;
        if !error_estimate.is_null() {
            *error_estimate = v.error_estimate;
        }
        Ok(())
    })
}

/// Number of perfect matchings of the k×k torus by exhaustive search.
/// Sizes above the built-in guard need `allow_large`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hxl_enumerate_count(k: usize, allow_large: bool, out: *mut u64) -> HxlStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = check(hexloop::enumeration::enumerate_all(k, allow_large))?.total() as u64;
        Ok(())
    })
}

fn into_handle(m: DimerConfig) -> *mut HxlConfig {
    Box::into_raw(Box::new(HxlConfig { inner: m }))
}

/// Maximal-height configuration of the k×k torus in sector `(i, j)`.
///
/// # Safety
/// `out` must be writable; the result is released with [`hxl_config_free`].
#[no_mangle]
pub unsafe extern "C" fn hxl_config_new(k: usize, i: i64, j: i64, out: *mut *mut HxlConfig) -> HxlStatus {
    guard(|| {
        non_null(out, "out")?;
        let lat = Arc::new(check(Lattice::torus(k))?);
        *out = into_handle(check(initial_config(&lat, (i, j)))?);
        Ok(())
    })
}

/// Decodes the first record of a binary configuration buffer.
///
/// # Safety
/// `data` must point to `len` readable bytes and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hxl_config_from_bytes(data: *const u8, len: usize, out: *mut *mut HxlConfig) -> HxlStatus {
    guard(|| {
        non_null(data, "data")?;
        non_null(out, "out")?;
        let mut bytes = std::slice::from_raw_parts(data, len);
        let rec = check(read_all(&mut bytes))?;
        let first = rec.into_iter().next().ok_or_else(|| {
            set_error("empty buffer");
            HxlStatus::Invalid
        })?;
        *out = into_handle(match first {
            AnyConfig::Dimer(m) => m,
            other => other.as_dimer(),
        });
        Ok(())
    })
}

/// Serializes a configuration. With `buf` null only `written` is set to the
/// needed size.
///
/// # Safety
/// `cfg` must be a live handle, `written` writable and `buf` (if not null)
/// must hold `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn hxl_config_to_bytes(
    cfg: *const HxlConfig,
    buf: *mut u8,
    cap: usize,
    written: *mut usize,
) -> HxlStatus {
    guard(|| {
        non_null(cfg, "cfg")?;
        non_null(written, "written")?;
        let bytes = check((*cfg).inner.to_bytes())?;
        *written = bytes.len();
        if buf.is_null() {
            return Ok(());
        }
        if cap < bytes.len() {
            set_error(&format!("buffer holds {cap} bytes, {} needed", bytes.len()));
            return Err(HxlStatus::Invalid);
        }
        ptr::copy_nonoverlapping(bytes.as_ptr(), buf, bytes.len());
        Ok(())
    })
}

/// # Safety
/// `cfg` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hxl_config_free(cfg: *mut HxlConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// # Safety
/// `cfg` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hxl_config_clone(cfg: *const HxlConfig, out: *mut *mut HxlConfig) -> HxlStatus {
    guard(|| {
        non_null(cfg, "cfg")?;
        non_null(out, "out")?;
        *out = into_handle((*cfg).inner.clone());
        Ok(())
    })
}

/// Number of A, B and C dimers.
///
/// # Safety
/// `cfg` must be a live handle and `out` must hold 3 values.
#[no_mangle]
pub unsafe extern "C" fn hxl_config_type_counts(cfg: *const HxlConfig, out: *mut usize) -> HxlStatus {
    guard(|| {
        non_null(cfg, "cfg")?;
        non_null(out, "out")?;
        std::slice::from_raw_parts_mut(out, 3).copy_from_slice(&(*cfg).inner.type_counts());
        Ok(())
    })
}

/// Height change around the two fundamental cycles.
///
/// # Safety
/// `cfg` must be a live handle, `i` and `j` writable.
#[no_mangle]
pub unsafe extern "C" fn hxl_config_height_change(cfg: *const HxlConfig, i: *mut i64, j: *mut i64) -> HxlStatus {
    guard(|| {
        non_null(cfg, "cfg")?;
        non_null(i, "i")?;
        non_null(j, "j")?;
        let (a, b) = check((*cfg).inner.height_change())?;
        *i = a;
        *j = b;
        Ok(())
    })
}

fn face_of(m: &DimerConfig, n: i32, mm: i32) -> Result<usize, HxlStatus> {
    let k = m.lattice().k().unwrap_or(1);
    m.lattice().face_index(FaceCoord::new(n, mm).reduce(k)).ok_or_else(|| {
        set_error("face outside the lattice");
        HxlStatus::Invalid
    })
}

/// Flips face `(n, m)` if it is flippable; `flipped` reports whether it was.
///
/// # Safety
/// `cfg` must be a live handle; `flipped` may be null.
#[no_mangle]
pub unsafe extern "C" fn hxl_config_flip(cfg: *mut HxlConfig, n: i32, m: i32, flipped: *mut bool) -> HxlStatus {
    guard(|| {
        non_null(cfg, "cfg")?;
        let c = &mut (*cfg).inner;
        let f = face_of(c, n, m)?;
        let did = c.flip_mut(f);
        if !flipped.is_null() {
            *flipped = did;
        }
        Ok(())
    })
}

/// SVG picture; the string is released with [`hxl_string_free`].
///
/// # Safety
/// `cfg` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hxl_config_render_svg(
    cfg: *const HxlConfig,
    loops: bool,
    heights: bool,
    out: *mut *mut c_char,
) -> HxlStatus {
    guard(|| {
        non_null(cfg, "cfg")?;
        non_null(out, "out")?;
        let m = &(*cfg).inner;
        let opts = RenderOptions {
            layer: if loops { Layer::Loops } else { Layer::Dimers },
            heights,
            ..Default::default()
        };
        let svg = check(render_edges(m.lattice(), m.edges(), &opts))?;
        *out = CString::new(svg).map_err(|_| HxlStatus::Invariant)?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn hxl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Metropolis flip chain started from a copy of `start`.
///
/// # Safety
/// `start` must be a live handle and `out` writable; the result is released
/// with [`hxl_chain_free`].
#[no_mangle]
pub unsafe extern "C" fn hxl_chain_new(
    start: *const HxlConfig,
    a: f64,
    b: f64,
    c: f64,
    seed: u64,
    out: *mut *mut HxlChain,
) -> HxlStatus {
    guard(|| {
        non_null(start, "start")?;
        non_null(out, "out")?;
        let w = weights(a, b, c)?.as_array();
        let chain = check(Chain::new((*start).inner.clone(), w, seed, false))?;
        *out = Box::into_raw(Box::new(HxlChain { inner: chain }));
        Ok(())
    })
}

/// Runs `sweeps` sweeps; `accepted` (may be null) receives the flip count.
///
/// # Safety
/// `chain` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hxl_chain_sweep(chain: *mut HxlChain, sweeps: usize, accepted: *mut u64) -> HxlStatus {
    guard(|| {
        non_null(chain, "chain")?;
        let ch = &mut (*chain).inner;
        let total: usize = (0..sweeps).map(|_| ch.sweep()).sum();
        if !accepted.is_null() {
            *accepted = total as u64;
        }
        Ok(())
    })
}

/// Copy of the chain's current configuration.
///
/// # Safety
/// `chain` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hxl_chain_config(chain: *const HxlChain, out: *mut *mut HxlConfig) -> HxlStatus {
    guard(|| {
        non_null(chain, "chain")?;
        non_null(out, "out")?;
        *out = into_handle((*chain).inner.config().clone());
        Ok(())
    })
}

/// # Safety
/// `chain` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hxl_chain_free(chain: *mut HxlChain) {
    if !chain.is_null() {
        drop(Box::from_raw(chain));
    }
}
