//! C ABI over `algae-core`. Every fallible call returns an [`AlgaeStatus`];
//! the message of the most recent failure on the calling thread is available
//! from [`algae_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use algae_core::algae::{policy_gradient, solve_nu_quadratic, AlgaeConfig};
use algae_core::envs::four_rooms;
use algae_core::{AlgaeError, Occupancy, SoftmaxPolicy, TabularMdp};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgaeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Config = 3,
    Domain = 4,
    Support = 5,
    SolverFailure = 6,
    Parse = 7,
    Io = 8,
    BufferSize = 9,
    Panic = 10,
}

/// Opaque MDP handle.
pub struct AlgaeMdp(TabularMdp);

/// Opaque softmax policy handle.
pub struct AlgaePolicy(SoftmaxPolicy);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(AlgaeStatus, String);

impl From<AlgaeError> for Failure {
    fn from(e: AlgaeError) -> Self {
        let status = match &e {
            AlgaeError::InvalidInput(_) => AlgaeStatus::InvalidInput,
            AlgaeError::Config(_) => AlgaeStatus::Config,
            AlgaeError::Domain(_) => AlgaeStatus::Domain,
            AlgaeError::Support { .. } => AlgaeStatus::Support,
            AlgaeError::Parse(_) | AlgaeError::Json(_) => AlgaeStatus::Parse,
            AlgaeError::Io(_) => AlgaeStatus::Io,
            _ => AlgaeStatus::SolverFailure,
        };
        Failure(status, e.to_string())
    }
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> AlgaeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AlgaeStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(_) => {
            set_last_error("panic inside algae".into());
            AlgaeStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(AlgaeStatus::NullPointer, format!("{what} is null"))
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    // SAFETY: caller passes either null or a live handle.
    unsafe { p.as_ref() }.ok_or_else(|| null(what))
}

unsafe fn out_slice<'a>(p: *mut f64, len: usize, needed: usize, what: &str) -> Result<&'a mut [f64], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    if len != needed {
        return Err(Failure(
            AlgaeStatus::BufferSize,
            format!("{what} has length {len}, expected {needed}"),
        ));
    }
    // SAFETY: caller guarantees `len` writable doubles.
    Ok(unsafe { std::slice::from_raw_parts_mut(p, len) })
}

unsafe fn in_slice<'a>(p: *const f64, len: usize, needed: usize, what: &str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    if len != needed {
        return Err(Failure(
            AlgaeStatus::BufferSize,
            format!("{what} has length {len}, expected {needed}"),
        ));
    }
    // SAFETY: caller guarantees `len` readable doubles.
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

unsafe fn write_handle<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    // SAFETY: `out` is a valid, writable pointer per the caller.
    unsafe { *out = Box::into_raw(Box::new(value)) };
    Ok(())
}

/// Message for the last failed call on this thread, or NULL. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn algae_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn algae_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses an MDP from its JSON description.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn algae_mdp_from_json(json: *const c_char, out: *mut *mut AlgaeMdp) -> AlgaeStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        // SAFETY: NUL-terminated per the contract.
        let text = unsafe { CStr::from_ptr(json) }
            .to_str()
            .map_err(|e| Failure(AlgaeStatus::Parse, format!("json is not UTF-8: {e}")))?;
        let mdp = TabularMdp::from_json_str(text)?;
        unsafe { write_handle(out, AlgaeMdp(mdp)) }
    })
}

/// Builds the Four Rooms MDP with the default layout and `γ = 0.99`.
///
/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn algae_mdp_four_rooms(slip: f64, goal_reset: bool, out: *mut *mut AlgaeMdp) -> AlgaeStatus {
    guard(|| {
        let mdp = four_rooms(slip, goal_reset)?;
        unsafe { write_handle(out, AlgaeMdp(mdp)) }
    })
}

/// # Safety
/// `mdp` must be a live handle; the output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn algae_mdp_shape(
    mdp: *const AlgaeMdp,
    num_states: *mut usize,
    num_actions: *mut usize,
) -> AlgaeStatus {
    guard(|| {
        let mdp = unsafe { as_ref(mdp, "mdp") }?;
        if num_states.is_null() || num_actions.is_null() {
            return Err(null("shape output"));
        }
        unsafe {
            *num_states = mdp.0.num_states();
            *num_actions = mdp.0.num_actions();
        }
        Ok(())
    })
}

/// # Safety
/// `mdp` must be NULL or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn algae_mdp_free(mdp: *mut AlgaeMdp) {
    if !mdp.is_null() {
        drop(unsafe { Box::from_raw(mdp) });
    }
}

/// Softmax policy from `num_states * num_actions` logits, row-major by state.
///
/// # Safety
/// `logits` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn algae_policy_new(
    num_states: usize,
    num_actions: usize,
    logits: *const f64,
    len: usize,
    out: *mut *mut AlgaePolicy,
) -> AlgaeStatus {
    guard(|| {
        let needed = num_states.checked_mul(num_actions).ok_or_else(|| {
            Failure(AlgaeStatus::InvalidInput, "policy shape overflows".into())
        })?;
        let logits = unsafe { in_slice(logits, len, needed, "logits") }?;
        let pi = SoftmaxPolicy::new(num_states, num_actions, logits.to_vec())?;
        unsafe { write_handle(out, AlgaePolicy(pi)) }
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn algae_policy_uniform(
    num_states: usize,
    num_actions: usize,
    out: *mut *mut AlgaePolicy,
) -> AlgaeStatus {
    guard(|| {
        if num_states == 0 || num_actions == 0 {
            return Err(Failure(AlgaeStatus::InvalidInput, "empty policy shape".into()));
        }
        unsafe { write_handle(out, AlgaePolicy(SoftmaxPolicy::uniform(num_states, num_actions))) }
    })
}

/// # Safety
/// `policy` must be NULL or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn algae_policy_free(policy: *mut AlgaePolicy) {
    if !policy.is_null() {
        drop(unsafe { Box::from_raw(policy) });
    }
}

/// Normalized primal and dual returns of `policy`.
///
/// # Safety
/// Handles must be live; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn algae_returns(
    mdp: *const AlgaeMdp,
    policy: *const AlgaePolicy,
    primal: *mut f64,
    dual: *mut f64,
) -> AlgaeStatus {
    guard(|| {
        let (mdp, pi) = unsafe { (as_ref(mdp, "mdp")?, as_ref(policy, "policy")?) };
        if primal.is_null() || dual.is_null() {
            return Err(null("return output"));
        }
        let (p, d) = (mdp.0.primal_return(&pi.0)?, mdp.0.dual_return(&pi.0)?);
        unsafe {
            *primal = p;
            *dual = d;
        }
        Ok(())
    })
}

/// Normalized discounted visitation `d^π`, flattened `s * A + a`.
///
/// # Safety
/// Handles must be live; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn algae_visitation(
    mdp: *const AlgaeMdp,
    policy: *const AlgaePolicy,
    out: *mut f64,
    len: usize,
) -> AlgaeStatus {
    guard(|| {
        let (mdp, pi) = unsafe { (as_ref(mdp, "mdp")?, as_ref(policy, "policy")?) };
        let out = unsafe { out_slice(out, len, mdp.0.num_pairs(), "visitation output") }?;
        out.copy_from_slice(mdp.0.visitation(&pi.0)?.as_slice());
        Ok(())
    })
}

/// `Q_π`, flattened `s * A + a`.
///
/// # Safety
/// Handles must be live; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn algae_q_values(
    mdp: *const AlgaeMdp,
    policy: *const AlgaePolicy,
    out: *mut f64,
    len: usize,
) -> AlgaeStatus {
    guard(|| {
        let (mdp, pi) = unsafe { (as_ref(mdp, "mdp")?, as_ref(policy, "policy")?) };
        let out = unsafe { out_slice(out, len, mdp.0.num_pairs(), "q output") }?;
        out.copy_from_slice(mdp.0.q_values(&pi.0)?.as_slice());
        Ok(())
    })
}

unsafe fn data_distribution(mdp: &TabularMdp, d_data: *const f64, len: usize) -> Result<Occupancy, Failure> {
    let d = unsafe { in_slice(d_data, len, mdp.num_pairs(), "d_data") }?;
    Ok(Occupancy::new(mdp.num_states(), mdp.num_actions(), d.to_vec())?)
}

/// Exact saddle point for the quadratic divergence. `nu_out` and
/// `zeta_out` may be NULL; otherwise each holds `num_pairs` doubles.
///
/// # Safety
/// Handles must be live; buffers sized as documented.
#[no_mangle]
pub unsafe extern "C" fn algae_solve_quadratic(
    mdp: *const AlgaeMdp,
    policy: *const AlgaePolicy,
    d_data: *const f64,
    len: usize,
    alpha: f64,
    nu_out: *mut f64,
    zeta_out: *mut f64,
    objective_out: *mut f64,
) -> AlgaeStatus {
    guard(|| {
        let (mdp, pi) = unsafe { (as_ref(mdp, "mdp")?, as_ref(policy, "policy")?) };
        let d = unsafe { data_distribution(&mdp.0, d_data, len) }?;
        if objective_out.is_null() {
            return Err(null("objective output"));
        }
        let sol = solve_nu_quadratic(&mdp.0, &pi.0, &d, alpha)?;
        if !nu_out.is_null() {
            unsafe { out_slice(nu_out, len, len, "nu output") }?.copy_from_slice(sol.nu.as_slice());
        }
        if !zeta_out.is_null() {
            unsafe { out_slice(zeta_out, len, len, "zeta output") }?.copy_from_slice(sol.zeta.as_slice());
        }
        unsafe { *objective_out = sol.objective };
        Ok(())
    })
}

/// Gradient of the quadratic-divergence objective with respect to the
/// policy logits. `grad_out` holds `num_pairs` doubles; `objective_out`
/// may be NULL.
///
/// # Safety
/// Handles must be live; buffers sized as documented.
#[no_mangle]
pub unsafe extern "C" fn algae_policy_gradient(
    mdp: *const AlgaeMdp,
    policy: *const AlgaePolicy,
    d_data: *const f64,
    len: usize,
    alpha: f64,
    grad_out: *mut f64,
    objective_out: *mut f64,
) -> AlgaeStatus {
    guard(|| {
        let (mdp, pi) = unsafe { (as_ref(mdp, "mdp")?, as_ref(policy, "policy")?) };
        let d = unsafe { data_distribution(&mdp.0, d_data, len) }?;
        let grad = unsafe { out_slice(grad_out, len, len, "gradient output") }?;
        let pg = policy_gradient(&mdp.0, &pi.0, &d, &AlgaeConfig::with_alpha(alpha))?;
        grad.copy_from_slice(&pg.gradient);
        if !objective_out.is_null() {
            unsafe { *objective_out = pg.solution.objective };
        }
        Ok(())
    })
}
