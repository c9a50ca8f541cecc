//! C ABI.
//!
//! Objects cross the boundary as opaque handles created by `*_new`-style
//! constructors and released with the matching `*_free`. Every fallible call
//! returns a [`HaarlabStatus`]; on failure [`haarlab_last_error`] describes
//! the most recent error on the calling thread. Results are written through
//! out-pointers, which are left untouched on failure.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use haarlab::error::Error;
use haarlab::rd::{blahut_arimoto, uniform_rd_point, BaOptions};
use haarlab::{
    bessel_i, builtin_group, divergence, divergence_to_uniform, total_variation, transport_distance, DistortionSpec,
    FiniteGroup, FourierDensity, GroupDistribution, GroupFamily,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HaarlabStatus {
    Ok = 0,
    NullPointer = 1,
    NotAGroup = 2,
    UnsupportedSize = 3,
    InvalidIndex = 4,
    GroupMismatch = 5,
    InvalidDistribution = 6,
    InfiniteTerm = 7,
    NotADensity = 8,
    GridTooCoarse = 9,
    QuadratureFailure = 10,
    ProfileInvalid = 11,
    SizeLimit = 12,
    RangeError = 13,
    InvalidBeta = 14,
    NoConvergence = 15,
    PreconditionFailed = 16,
    Parse = 17,
    BufferTooSmall = 18,
    Internal = 19,
}

/// A finite group.
pub struct HaarlabGroup(Arc<FiniteGroup>);
/// A probability distribution on a finite group.
pub struct HaarlabDist(GroupDistribution);
/// A right-invariant distortion on a finite group or on the circle.
pub struct HaarlabDistortion(DistortionSpec);
/// A truncated Fourier density on the circle.
pub struct HaarlabFourier(FourierDensity);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> HaarlabStatus {
    use HaarlabStatus as S;
    match e {
        Error::NotAGroup(_) | Error::EmptySeed | Error::InvalidAction(_) => S::NotAGroup,
        Error::UnsupportedSize(_) => S::UnsupportedSize,
        Error::InvalidIndex { .. } => S::InvalidIndex,
        Error::GroupMismatch => S::GroupMismatch,
        Error::InvalidDistribution(_) => S::InvalidDistribution,
        Error::InfiniteTerm => S::InfiniteTerm,
        Error::NotADensity { .. } => S::NotADensity,
        Error::GridTooCoarse { .. } => S::GridTooCoarse,
        Error::QuadratureFailure { .. } => S::QuadratureFailure,
        Error::ProfileInvalid(_) => S::ProfileInvalid,
        Error::SizeLimit { .. } => S::SizeLimit,
        Error::RangeError(_) => S::RangeError,
        Error::InvalidBeta(_) => S::InvalidBeta,
        Error::NoConvergence { .. } => S::NoConvergence,
        Error::InsufficientData(_) | Error::PreconditionFailed(_) => S::PreconditionFailed,
        Error::Parse(_) | Error::Json(_) => S::Parse,
        Error::Io(_) => S::Internal,
    }
}

struct Fail(HaarlabStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(HaarlabStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, records any error or panic, and clears the last error on success.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> HaarlabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            HaarlabStatus::Ok
        }
        Ok(Err(Fail(code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("internal panic".into());
            HaarlabStatus::Internal
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn put_handle<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    out.write(Box::into_raw(Box::new(value)));
    Ok(())
}

unsafe fn free_handle<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn haarlab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn haarlab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Built-in group from a family name such as `"cyclic:6"`, `"dihedral:4"`,
/// `"symmetric:3"` or `"cube"`.
///
/// # Safety
/// `spec` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn haarlab_group_builtin(spec: *const c_char, out: *mut *mut HaarlabGroup) -> HaarlabStatus {
    guard(|| {
        if spec.is_null() {
            return Err(null("spec"));
        }
        let text = CStr::from_ptr(spec)
            .to_str()
            .map_err(|_| Fail(HaarlabStatus::Parse, "spec is not UTF-8".into()))?;
        let family: GroupFamily = text.parse()?;
        put_handle(out, HaarlabGroup(builtin_group(family)?.0))
    })
}

/// Group from a row-major `order × order` Cayley table; element 0 need not
/// be the identity.
///
/// # Safety
/// `table` must point to `order * order` values and `out` be valid.
#[no_mangle]
pub unsafe extern "C" fn haarlab_group_from_table(
    table: *const u32,
    order: usize,
    out: *mut *mut HaarlabGroup,
) -> HaarlabStatus {
    guard(|| {
        let cells = order
            .checked_mul(order)
            .ok_or_else(|| Fail(HaarlabStatus::UnsupportedSize, format!("order {order} too large")))?;
        let flat = slice(table, cells, "table")?;
        let rows: Vec<Vec<usize>> = flat
            .chunks(order.max(1))
            .map(|r| r.iter().map(|&v| v as usize).collect())
            .collect();
        put_handle(out, HaarlabGroup(Arc::new(FiniteGroup::from_table(rows, None)?)))
    })
}

/// Group order, or 0 for a null handle.
///
/// # Safety
/// `g` must be null or a live group handle.
#[no_mangle]
pub unsafe extern "C" fn haarlab_group_order(g: *const HaarlabGroup) -> usize {
    g.as_ref().map_or(0, |g| g.0.order())
}

/// Product `a·b`, written to `out`.
///
/// # Safety
/// `g` must be a live group handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn haarlab_group_mul(
    g: *const HaarlabGroup,
    a: usize,
    b: usize,
    out: *mut usize,
) -> HaarlabStatus {
    guard(|| {
        let g = &as_ref(g, "group")?.0;
        g.check_index(a)?;
        g.check_index(b)?;
        write(out, g.mul(a, b), "out")
    })
}

/// # Safety
/// `g` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn haarlab_group_free(g: *mut HaarlabGroup) {
    free_handle(g)
}

/// Distribution with the given masses (non-negative, summing to 1 within
/// 1e-9; they are renormalized).
///
/// # Safety
/// `mass` must point to `len` doubles; `g` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn haarlab_dist_new(
    g: *const HaarlabGroup,
    mass: *const f64,
    len: usize,
    out: *mut *mut HaarlabDist,
) -> HaarlabStatus {
    guard(|| {
        let g = as_ref(g, "group")?;
        let m = slice(mass, len, "mass")?.to_vec();
        put_handle(out, HaarlabDist(GroupDistribution::new(g.0.clone(), m)?))
    })
}

/// Haar (uniform) distribution.
///
/// # Safety
/// `g` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn haarlab_dist_uniform(g: *const HaarlabGroup, out: *mut *mut HaarlabDist) -> HaarlabStatus {
    guard(|| {
        let g = as_ref(g, "group")?;
        put_handle(out, HaarlabDist(GroupDistribution::uniform(g.0.clone())))
    })
}

/// Copies the masses into `buf`; fails with `BufferTooSmall` when `len` is
/// below the group order.
///
/// # Safety
/// `buf` must have room for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn haarlab_dist_mass(p: *const HaarlabDist, buf: *mut f64, len: usize) -> HaarlabStatus {
    guard(|| {
        let m = as_ref(p, "dist")?.0.mass();
        if len < m.len() {
            return Err(Fail(
                HaarlabStatus::BufferTooSmall,
                format!("need {} slots, got {len}", m.len()),
            ));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(m.as_ptr(), buf, m.len());
        Ok(())
    })
}

/// `P ∗ Q`.
///
/// # Safety
/// All handles must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn haarlab_dist_convolve(
    p: *const HaarlabDist,
    q: *const HaarlabDist,
    out: *mut *mut HaarlabDist,
) -> HaarlabStatus {
    guard(|| {
        let r = as_ref(p, "p")?.0.convolve(&as_ref(q, "q")?.0)?;
        put_handle(out, HaarlabDist(r))
    })
}

/// `n`-fold convolution power, `n ≥ 1`.
///
/// # Safety
/// `p` must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn haarlab_dist_n_fold(
    p: *const HaarlabDist,
    n: usize,
    out: *mut *mut HaarlabDist,
) -> HaarlabStatus {
    guard(|| put_handle(out, HaarlabDist(as_ref(p, "p")?.0.n_fold(n)?)))
}

/// # Safety
/// `p` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn haarlab_dist_free(p: *mut HaarlabDist) {
    free_handle(p)
}

/// `D(P‖Q)` in nats; `+INFINITY` when P is not absolutely continuous with
/// respect to Q.
///
/// # Safety
/// Handles must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn haarlab_divergence(
    p: *const HaarlabDist,
    q: *const HaarlabDist,
    out: *mut f64,
) -> HaarlabStatus {
    guard(|| write(out, divergence(&as_ref(p, "p")?.0, &as_ref(q, "q")?.0)?, "out"))
}

/// `D(P‖U)` in nats.
///
/// # Safety
/// `p` must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn haarlab_divergence_to_uniform(p: *const HaarlabDist, out: *mut f64) -> HaarlabStatus {
    guard(|| write(out, divergence_to_uniform(&as_ref(p, "p")?.0), "out"))
}

/// Total variation `Σ|P − Q|`.
///
/// # Safety
/// Handles must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn haarlab_total_variation(
    p: *const HaarlabDist,
    q: *const HaarlabDist,
    out: *mut f64,
) -> HaarlabStatus {
    guard(|| write(out, total_variation(&as_ref(p, "p")?.0, &as_ref(q, "q")?.0)?, "out"))
}

/// Cosine profile `2 − 2cos(2πk/n)`; needs a standard cyclic group.
///
/// # Safety
/// `g` must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn haarlab_distortion_cosine(
    g: *const HaarlabGroup,
    out: *mut *mut HaarlabDistortion,
) -> HaarlabStatus {
    guard(|| {
        put_handle(
            out,
            HaarlabDistortion(DistortionSpec::cosine(as_ref(g, "group")?.0.clone())?),
        )
    })
}

/// Hamming profile: 0 at the identity, 1 elsewhere.
///
/// # Safety
/// `g` must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn haarlab_distortion_hamming(
    g: *const HaarlabGroup,
    out: *mut *mut HaarlabDistortion,
) -> HaarlabStatus {
    guard(|| {
        put_handle(
            out,
            HaarlabDistortion(DistortionSpec::hamming(as_ref(g, "group")?.0.clone())?),
        )
    })
}

/// Right-invariant distortion `d(x, y) = profile[x·y⁻¹]`.
///
/// # Safety
/// `profile` must point to `len` doubles; `g` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn haarlab_distortion_table(
    g: *const HaarlabGroup,
    profile: *const f64,
    len: usize,
    out: *mut *mut HaarlabDistortion,
) -> HaarlabStatus {
    guard(|| {
        let g = as_ref(g, "group")?.0.clone();
        let v = slice(profile, len, "profile")?.to_vec();
        put_handle(out, HaarlabDistortion(DistortionSpec::table(g, v)?))
    })
}

/// `2 − 2cos(x − y)` on the circle.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn haarlab_distortion_so2(out: *mut *mut HaarlabDistortion) -> HaarlabStatus {
    guard(|| put_handle(out, HaarlabDistortion(DistortionSpec::so2())))
}

/// # Safety
/// `d` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn haarlab_distortion_free(d: *mut HaarlabDistortion) {
    free_handle(d)
}

/// Exact transport distance. When `coupling` is non-null it receives the
/// optimal joint distribution, row-major `order × order`.
///
/// # Safety
/// Handles must be live, `value` valid, `coupling` null or room for
/// `order²` doubles.
#[no_mangle]
pub unsafe extern "C" fn haarlab_transport_distance(
    p: *const HaarlabDist,
    q: *const HaarlabDist,
    d: *const HaarlabDistortion,
    value: *mut f64,
    coupling: *mut f64,
) -> HaarlabStatus {
    guard(|| {
        let t = transport_distance(&as_ref(p, "p")?.0, &as_ref(q, "q")?.0, &as_ref(d, "distortion")?.0)?;
        write(value, t.value, "value")?;
        if !coupling.is_null() {
            for (k, v) in t.coupling.joint.iter().flatten().enumerate() {
                coupling.add(k).write(*v);
            }
        }
        Ok(())
    })
}

/// Closed-form rate-distortion point of the uniform source at slope
/// `beta ≤ 0` (`-INFINITY` allowed): mean distortion and rate in nats.
///
/// # Safety
/// `d` must be live; `delta` and `rate` valid.
#[no_mangle]
pub unsafe extern "C" fn haarlab_uniform_rd_point(
    d: *const HaarlabDistortion,
    beta: f64,
    delta: *mut f64,
    rate: *mut f64,
) -> HaarlabStatus {
    guard(|| {
        let pt = uniform_rd_point(&as_ref(d, "distortion")?.0, beta)?;
        if delta.is_null() || rate.is_null() {
            return Err(null("delta/rate"));
        }
        delta.write(pt.delta);
        rate.write(pt.rate);
        Ok(())
    })
}

/// Blahut–Arimoto at slope `beta < 0` for source `p`. `tol ≤ 0` and
/// `max_iter = 0` select the defaults. `iterations` may be null.
///
/// # Safety
/// Handles must be live; `delta` and `rate` valid.
#[no_mangle]
pub unsafe extern "C" fn haarlab_blahut_arimoto(
    p: *const HaarlabDist,
    d: *const HaarlabDistortion,
    beta: f64,
    tol: f64,
    max_iter: usize,
    delta: *mut f64,
    rate: *mut f64,
    iterations: *mut usize,
) -> HaarlabStatus {
    guard(|| {
        let def = BaOptions::default();
        let opts = BaOptions {
            tol: if tol > 0.0 { tol } else { def.tol },
            max_iter: if max_iter > 0 { max_iter } else { def.max_iter },
            ..def
        };
        let sol = blahut_arimoto(&as_ref(p, "p")?.0, &as_ref(d, "distortion")?.0, beta, &opts)?;
        if delta.is_null() || rate.is_null() {
            return Err(null("delta/rate"));
        }
        delta.write(sol.point.delta);
        rate.write(sol.point.rate);
        if !iterations.is_null() {
            iterations.write(sol.iterations);
        }
        Ok(())
    })
}

/// Density `1 + Σ_k amps[k]·cos((k+1)(x + phases[k]))`; fails with
/// `NotADensity` when it goes negative.
///
/// # Safety
/// `amps` and `phases` must point to `len` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn haarlab_fourier_new(
    amps: *const f64,
    phases: *const f64,
    len: usize,
    out: *mut *mut HaarlabFourier,
) -> HaarlabStatus {
    guard(|| {
        let a = slice(amps, len, "amps")?.to_vec();
        let ph = slice(phases, len, "phases")?.to_vec();
        put_handle(out, HaarlabFourier(FourierDensity::new(a, ph)?))
    })
}

/// `n`-fold convolution power on the circle.
///
/// # Safety
/// `f` must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn haarlab_fourier_n_fold(
    f: *const HaarlabFourier,
    n: usize,
    out: *mut *mut HaarlabFourier,
) -> HaarlabStatus {
    guard(|| put_handle(out, HaarlabFourier(as_ref(f, "fourier")?.0.n_fold(n)?)))
}

/// Divergence to the uniform measure by adaptive quadrature, in nats.
///
/// # Safety
/// `f` must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn haarlab_fourier_divergence(f: *const HaarlabFourier, out: *mut f64) -> HaarlabStatus {
    guard(|| write(out, as_ref(f, "fourier")?.0.divergence_exact()?, "out"))
}

/// Density value at angle `x`, or NaN for a null handle.
///
/// # Safety
/// `f` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn haarlab_fourier_eval(f: *const HaarlabFourier, x: f64) -> f64 {
    f.as_ref().map_or(f64::NAN, |f| f.0.eval(x))
}

/// # Safety
/// `f` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn haarlab_fourier_free(f: *mut HaarlabFourier) {
    free_handle(f)
}

/// Modified Bessel function `I_order(x)`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn haarlab_bessel_i(order: u32, x: f64, out: *mut f64) -> HaarlabStatus {
    guard(|| write(out, bessel_i(order, x)?, "out"))
}
