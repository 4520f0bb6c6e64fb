//! C ABI over `gls-core`.
//!
//! Objects are opaque handles created by `gls_*_new` and released with the
//! matching `gls_*_free`. Every fallible call returns a [`GlsStatus`] and
//! writes its result through an out-pointer; on failure a message is kept
//! per thread and can be read with [`gls_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use gls_core::psi::PsiSpec;
use gls_core::{group, norms, pgrid, tails};
use gls_core::{
    FiniteGroup, GeneratingFunction, GlsError, GridSequence, GroupFunction, GroupKind, NormResult, RandomVariableModel,
    RestrictedSet, TailEnvelope,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlsStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidParameter = 4,
    Domain = 5,
    Divergent = 6,
    Unsupported = 7,
    SizeMismatch = 8,
    Numerical = 9,
    Io = 10,
    Panic = 11,
}

impl From<&GlsError> for GlsStatus {
    fn from(e: &GlsError) -> Self {
        match e {
            GlsError::Parse(_) => GlsStatus::Parse,
            GlsError::InvalidParameter(_) | GlsError::NonMonotone(_) | GlsError::AxiomViolation(_) | GlsError::EmptyBatch => {
                GlsStatus::InvalidParameter
            }
            GlsError::Domain { .. } => GlsStatus::Domain,
            GlsError::Divergent { .. } => GlsStatus::Divergent,
            GlsError::UnsupportedBackend(_) => GlsStatus::Unsupported,
            GlsError::SizeMismatch { .. } => GlsStatus::SizeMismatch,
            GlsError::Degenerate(_) | GlsError::TruncationInsufficient { .. } | GlsError::NoFeasibleK { .. } => {
                GlsStatus::Numerical
            }
            GlsError::Io(_) => GlsStatus::Io,
        }
    }
}

/// A random variable model.
pub struct GlsModel(RandomVariableModel);
/// A generating function `psi`.
pub struct GlsPsi(GeneratingFunction);
/// A grid sequence `q`.
pub struct GlsGrid(GridSequence);
/// A restricted exponent set.
pub struct GlsSet(RestrictedSet);
/// A finite group.
pub struct GlsGroup(FiniteGroup);

/// A norm value. `decreasing` is 1 or 0 when the ratio's trend at the
/// truncation point is known, -1 otherwise.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlsNorm {
    pub value: f64,
    pub arg_p: f64,
    pub p_max: f64,
    pub decreasing: i32,
}

impl From<&NormResult> for GlsNorm {
    fn from(r: &NormResult) -> Self {
        GlsNorm {
            value: r.value,
            arg_p: r.arg_p,
            p_max: r.truncation_p_max,
            decreasing: r.decreasing_at_truncation.map_or(-1, i32::from),
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(GlsStatus, String);

impl From<GlsError> for Failure {
    fn from(e: GlsError) -> Self {
        Failure(GlsStatus::from(&e), e.to_string())
    }
}

type Outcome = std::result::Result<(), Failure>;

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `body`, recording failures and converting panics into `Panic`.
fn guard(body: impl FnOnce() -> Outcome) -> GlsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            GlsStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("internal panic: {msg}"));
            GlsStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(GlsStatus::NullArgument, format!("{what} is null"))
}

unsafe fn arg<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, Failure> {
    ptr.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(ptr: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    ptr.as_mut().ok_or_else(|| null(what))
}

unsafe fn text<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| Failure(GlsStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn slice<'a>(ptr: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

unsafe fn free<T>(ptr: *mut T) {
    if !ptr.is_null() {
        drop(Box::from_raw(ptr));
    }
}

/// Message of the last failed call on this thread, or null after a
/// successful one. The pointer stays valid until the next call on the same
/// thread.
#[no_mangle]
pub extern "C" fn gls_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gls_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a model specifier such as `gaussian`, `constant:2`,
/// `bernoulli:0.01`, `empirical:<path>` or `density:pareto:3`.
///
/// # Safety
/// `spec` must be a NUL-terminated string and `out` a valid pointer. The
/// handle written to `out` must be released with [`gls_model_free`].
#[no_mangle]
pub unsafe extern "C" fn gls_model_new(spec: *const c_char, out_model: *mut *mut GlsModel) -> GlsStatus {
    guard(|| {
        let out_model = out(out_model, "out_model")?;
        let m = RandomVariableModel::from_spec(text(spec, "spec")?)?;
        *out_model = boxed(GlsModel(m));
        Ok(())
    })
}

/// The model of `alpha * xi`, as a new handle.
///
/// # Safety
/// `model` must be a live handle and `out_model` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gls_model_scaled(model: *const GlsModel, alpha: f64, out_model: *mut *mut GlsModel) -> GlsStatus {
    guard(|| {
        let out_model = out(out_model, "out_model")?;
        let m = arg(model, "model")?;
        if !alpha.is_finite() {
            return Err(Failure(GlsStatus::InvalidParameter, format!("scale must be finite, got {alpha}")));
        }
        *out_model = boxed(GlsModel(m.0.scaled(alpha)));
        Ok(())
    })
}

/// `|xi|_p` for `p >= 1`.
///
/// # Safety
/// `model` must be a live handle and `out_value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gls_model_lp_norm(model: *const GlsModel, p: f64, out_value: *mut f64) -> GlsStatus {
    guard(|| {
        let out_value = out(out_value, "out_value")?;
        *out_value = arg(model, "model")?.0.lp_norm(p)?;
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gls_model_free(model: *mut GlsModel) {
    free(model)
}

/// Parses a generating function such as `power_slowvary(r=2, delta=0)`,
/// `oscillating(r=2, amp=0.3)` or `natural`. `natural` needs `model`;
/// otherwise `model` may be null.
///
/// # Safety
/// `spec` must be a NUL-terminated string, `model` null or a live handle,
/// and `out_psi` a valid pointer. Release the result with [`gls_psi_free`].
#[no_mangle]
pub unsafe extern "C" fn gls_psi_new(spec: *const c_char, model: *const GlsModel, out_psi: *mut *mut GlsPsi) -> GlsStatus {
    guard(|| {
        let out_psi = out(out_psi, "out_psi")?;
        let spec: PsiSpec = text(spec, "spec")?.parse()?;
        let psi = spec.build(model.as_ref().map(|m| &m.0))?;
        *out_psi = boxed(GlsPsi(psi));
        Ok(())
    })
}

/// `psi(p)` for `p >= 1`.
///
/// # Safety
/// `psi` must be a live handle and `out_value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gls_psi_eval(psi: *const GlsPsi, p: f64, out_value: *mut f64) -> GlsStatus {
    guard(|| {
        let out_value = out(out_value, "out_value")?;
        *out_value = arg(psi, "psi")?.0.eval(p)?;
        Ok(())
    })
}

/// # Safety
/// `psi` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gls_psi_free(psi: *mut GlsPsi) {
    free(psi)
}

/// Parses a grid such as `integers:M=50` or `geometric:D=2:M=60`.
///
/// # Safety
/// `spec` must be a NUL-terminated string and `out_grid` a valid pointer.
/// Release the result with [`gls_grid_free`].
#[no_mangle]
pub unsafe extern "C" fn gls_grid_new(spec: *const c_char, out_grid: *mut *mut GlsGrid) -> GlsStatus {
    guard(|| {
        let out_grid = out(out_grid, "out_grid")?;
        let g: GridSequence = text(spec, "spec")?.parse()?;
        *out_grid = boxed(GlsGrid(g));
        Ok(())
    })
}

/// `q(m)` for `m >= 1`, beyond the truncation if needed.
///
/// # Safety
/// `grid` must be a live handle and `out_value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gls_grid_value(grid: *const GlsGrid, m: usize, out_value: *mut f64) -> GlsStatus {
    guard(|| {
        let out_value = out(out_value, "out_value")?;
        let g = arg(grid, "grid")?;
        if m == 0 {
            return Err(Failure(GlsStatus::Domain, "grid indices start at 1".into()));
        }
        *out_value = g.0.value_at(m);
        Ok(())
    })
}

/// The equivalence constant `W` (or `W-hat` when `use_cell_minimum` is
/// nonzero) of a grid. `+inf` means the discrete norm is not equivalent.
///
/// # Safety
/// `grid`, `psi` must be live handles and `out_value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gls_grid_w_constant(
    grid: *const GlsGrid,
    psi: *const GlsPsi,
    use_cell_minimum: i32,
    out_value: *mut f64,
) -> GlsStatus {
    guard(|| {
        let out_value = out(out_value, "out_value")?;
        let (g, psi) = (&arg(grid, "grid")?.0, &arg(psi, "psi")?.0);
        let rep = if use_cell_minimum != 0 {
            pgrid::w_hat_constant(g, psi, pgrid::DEFAULT_CELL_GRID)?
        } else {
            pgrid::w_constant(g, psi)?
        };
        *out_value = rep.value;
        Ok(())
    })
}

/// # Safety
/// `grid` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gls_grid_free(grid: *mut GlsGrid) {
    free(grid)
}

/// Parses a restricted set such as `full`, `intervals:1-2,3-inf;points:5`
/// or `grid:integers:M=100`.
///
/// # Safety
/// `spec` must be a NUL-terminated string and `out_set` a valid pointer.
/// Release the result with [`gls_set_free`].
#[no_mangle]
pub unsafe extern "C" fn gls_set_new(spec: *const c_char, out_set: *mut *mut GlsSet) -> GlsStatus {
    guard(|| {
        let out_set = out(out_set, "out_set")?;
        let s: RestrictedSet = text(spec, "spec")?.parse()?;
        *out_set = boxed(GlsSet(s));
        Ok(())
    })
}

/// `p+`, the smallest member of the set at or above `p`; `+inf` if none.
///
/// # Safety
/// `set` must be a live handle and `out_value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gls_set_p_plus(set: *const GlsSet, p: f64, out_value: *mut f64) -> GlsStatus {
    guard(|| {
        let out_value = out(out_value, "out_value")?;
        *out_value = arg(set, "set")?.0.p_plus(p)?;
        Ok(())
    })
}

/// The equivalence constant `Z` of a restricted set.
///
/// # Safety
/// `set`, `psi` must be live handles and `out_value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gls_set_z_constant(set: *const GlsSet, psi: *const GlsPsi, out_value: *mut f64) -> GlsStatus {
    guard(|| {
        let out_value = out(out_value, "out_value")?;
        *out_value = pgrid::z_constant(&arg(set, "set")?.0, &arg(psi, "psi")?.0)?.value;
        Ok(())
    })
}

/// # Safety
/// `set` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gls_set_free(set: *mut GlsSet) {
    free(set)
}

fn p_max_or_default(p_max: f64, model: &RandomVariableModel) -> f64 {
    if p_max > 0.0 {
        p_max
    } else {
        norms::default_p_max(model)
    }
}

/// The GLS norm over `[1, p_max]`; `p_max <= 0` picks the model's default.
///
/// # Safety
/// `model`, `psi` must be live handles and `out_norm` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gls_norm_full(
    model: *const GlsModel,
    psi: *const GlsPsi,
    p_max: f64,
    out_norm: *mut GlsNorm,
) -> GlsStatus {
    guard(|| {
        let out_norm = out(out_norm, "out_norm")?;
        let (m, psi) = (&arg(model, "model")?.0, &arg(psi, "psi")?.0);
        let r = norms::gls_norm(m, psi, p_max_or_default(p_max, m), norms::DEFAULT_REFINE_TOL)?;
        *out_norm = GlsNorm::from(&r);
        Ok(())
    })
}

/// The norm restricted to `set`; `p_max <= 0` picks the model's default.
///
/// # Safety
/// `model`, `psi`, `set` must be live handles and `out_norm` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gls_norm_restricted(
    model: *const GlsModel,
    psi: *const GlsPsi,
    set: *const GlsSet,
    p_max: f64,
    out_norm: *mut GlsNorm,
) -> GlsStatus {
    guard(|| {
        let out_norm = out(out_norm, "out_norm")?;
        let (m, psi, s) = (&arg(model, "model")?.0, &arg(psi, "psi")?.0, &arg(set, "set")?.0);
        let r = norms::restricted_norm(m, psi, s, p_max_or_default(p_max, m))?;
        *out_norm = GlsNorm::from(&r);
        Ok(())
    })
}

/// The discrete norm over the grid's points.
///
/// # Safety
/// `model`, `psi`, `grid` must be live handles and `out_norm` a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn gls_norm_discrete(
    model: *const GlsModel,
    psi: *const GlsPsi,
    grid: *const GlsGrid,
    out_norm: *mut GlsNorm,
) -> GlsStatus {
    guard(|| {
        let out_norm = out(out_norm, "out_norm")?;
        let r = norms::discrete_norm(&arg(model, "model")?.0, &arg(psi, "psi")?.0, &arg(grid, "grid")?.0)?;
        *out_norm = GlsNorm::from(&r);
        Ok(())
    })
}

/// The tail transform `h(x)` for `x >= 1`, with the maximizing index.
/// `out_argmax` may be null.
///
/// # Safety
/// `grid`, `psi` must be live handles, `out_value` a valid pointer and
/// `out_argmax` null or valid.
#[no_mangle]
pub unsafe extern "C" fn gls_h_transform(
    grid: *const GlsGrid,
    psi: *const GlsPsi,
    x: f64,
    out_value: *mut f64,
    out_argmax: *mut usize,
) -> GlsStatus {
    guard(|| {
        let out_value = out(out_value, "out_value")?;
        let h = tails::h_transform(&arg(grid, "grid")?.0, &arg(psi, "psi")?.0, x)?;
        *out_value = h.value;
        if let Some(a) = out_argmax.as_mut() {
            *a = h.argmax_m;
        }
        Ok(())
    })
}

/// The tail bound `P(|xi| >= x) <= exp(-h(x / norm))`, defined for
/// `x >= e * norm`; smaller `x` gives `Domain`.
///
/// # Safety
/// `grid`, `psi` must be live handles and `out_value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gls_tail_envelope(
    grid: *const GlsGrid,
    psi: *const GlsPsi,
    norm: f64,
    x: f64,
    out_value: *mut f64,
) -> GlsStatus {
    guard(|| {
        let out_value = out(out_value, "out_value")?;
        let env = TailEnvelope::new(arg(grid, "grid")?.0.clone(), arg(psi, "psi")?.0.clone(), norm)?;
        *out_value = env.at(x)?;
        Ok(())
    })
}

/// Parses a group such as `cyclic:8`, `dihedral:5`, `symmetric:4` or
/// `product:cyclic:2xdihedral:3`.
///
/// # Safety
/// `spec` must be a NUL-terminated string and `out_group` a valid pointer.
/// Release the result with [`gls_group_free`].
#[no_mangle]
pub unsafe extern "C" fn gls_group_new(spec: *const c_char, out_group: *mut *mut GlsGroup) -> GlsStatus {
    guard(|| {
        let out_group = out(out_group, "out_group")?;
        let kind: GroupKind = text(spec, "spec")?.parse()?;
        *out_group = boxed(GlsGroup(FiniteGroup::new(&kind)?));
        Ok(())
    })
}

/// Number of elements; 0 for a null handle.
///
/// # Safety
/// `group` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gls_group_order(group: *const GlsGroup) -> usize {
    group.as_ref().map_or(0, |g| g.0.order())
}

/// Writes `f * g` (normalized Haar measure) to `out`. All three arrays have
/// the group's order as length and are indexed by element.
///
/// # Safety
/// `group` must be a live handle; `f`, `g` must point to `len` readable
/// values and `out_values` to `len` writable ones.
#[no_mangle]
pub unsafe extern "C" fn gls_convolve(
    group: *const GlsGroup,
    f: *const f64,
    g: *const f64,
    len: usize,
    out_values: *mut f64,
) -> GlsStatus {
    guard(|| {
        let grp = &arg(group, "group")?.0;
        let f = GroupFunction::new(slice(f, len, "f")?.to_vec())?;
        let g = GroupFunction::new(slice(g, len, "g")?.to_vec())?;
        let fg = group::convolve(grp, &f, &g)?;
        if out_values.is_null() && len > 0 {
            return Err(null("out_values"));
        }
        std::ptr::copy_nonoverlapping(fg.values().as_ptr(), out_values, fg.len());
        Ok(())
    })
}

/// `|f|_p` under normalized Haar measure; `p` may be `+inf`.
///
/// # Safety
/// `group` must be a live handle and `f` point to `len` readable values.
#[no_mangle]
pub unsafe extern "C" fn gls_group_lp_norm(
    group: *const GlsGroup,
    f: *const f64,
    len: usize,
    p: f64,
    out_value: *mut f64,
) -> GlsStatus {
    guard(|| {
        let out_value = out(out_value, "out_value")?;
        let grp = &arg(group, "group")?.0;
        let f = GroupFunction::new(slice(f, len, "f")?.to_vec())?;
        if f.len() != grp.order() {
            return Err(GlsError::SizeMismatch {
                expected: grp.order(),
                got: f.len(),
            }
            .into());
        }
        *out_value = group::group_lp_norm(grp, &f, p)?;
        Ok(())
    })
}

/// # Safety
/// `group` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gls_group_free(group: *mut GlsGroup) {
    free(group)
}
