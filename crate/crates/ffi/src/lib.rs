//! C ABI over the `hodyn` engine.
//!
//! Every fallible call returns a [`HodynStatus`]; on failure the message is
//! kept per thread and read back with [`hodyn_last_error`]. Strings are
//! written NUL-terminated into caller buffers. `needed` receives the size
//! including the terminator, so a call with a null buffer queries the size.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hodyn::dynamics::{hamilton_ode, integrate_rk4, lagrangian_ode, Trajectory};
use hodyn::hamiltonian::{canonical_hamiltonian, reconstruct_lagrangian};
use hodyn::symbolic::{check_equivalent, parse, Equivalence};
use hodyn::{Error, HamiltonianSystem, LagrangianSystem};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HodynStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Validation = 4,
    Singular = 5,
    NotKthOrder = 6,
    NotProjectable = 7,
    Numerical = 8,
    BufferTooSmall = 9,
    WrongKind = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HodynKind {
    Lagrangian = 0,
    Hamiltonian = 1,
}

/// Opaque handle to a Lagrangian or Hamiltonian system.
pub struct HodynSystem {
    inner: System,
}

enum System {
    Lagrangian(LagrangianSystem),
    Hamiltonian(HamiltonianSystem),
}

/// Opaque handle to an integrated trajectory.
pub struct HodynTrajectory {
    inner: Trajectory,
}

struct Failure {
    status: HodynStatus,
    message: String,
}

impl Failure {
    fn new(status: HodynStatus, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Parse(_) => HodynStatus::Parse,
            Error::SingularLagrangian(_) | Error::SingularHessian { .. } | Error::Irregular(_) => {
                HodynStatus::Singular
            }
            Error::NotKthOrder(_) => HodynStatus::NotKthOrder,
            Error::NotProjectable { .. } => HodynStatus::NotProjectable,
            Error::Eval(_) | Error::InversionFailed { .. } | Error::NonFinite { .. } => {
                HodynStatus::Numerical
            }
            _ => HodynStatus::Validation,
        };
        Failure::new(status, e.to_string())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> HodynStatus {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|payload| {
        let message = payload
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| payload.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "panic".into());
        Err(Failure::new(HodynStatus::Panic, message))
    });
    LAST_ERROR.with(|slot| {
        let mut slot = slot.borrow_mut();
        slot.clear();
        match outcome {
            Ok(()) => HodynStatus::Ok,
            Err(failure) => {
                slot.push_str(&failure.message);
                failure.status
            }
        }
    })
}

unsafe fn c_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return Err(Failure::new(
            HodynStatus::NullPointer,
            format!("{what} is null"),
        ));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|e| Failure::new(HodynStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn deref<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, Failure> {
    ptr.as_ref()
        .ok_or_else(|| Failure::new(HodynStatus::NullPointer, format!("{what} is null")))
}

unsafe fn check_out<T>(ptr: *mut T, what: &str) -> Result<(), Failure> {
    if ptr.is_null() {
        return Err(Failure::new(
            HodynStatus::NullPointer,
            format!("{what} is null"),
        ));
    }
    Ok(())
}

unsafe fn write_str(
    s: &str,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> Result<(), Failure> {
    let size = s.len() + 1;
    if !needed.is_null() {
        *needed = size;
    }
    if buf.is_null() || len < size {
        return Err(Failure::new(
            HodynStatus::BufferTooSmall,
            format!("buffer of {len} bytes, need {size}"),
        ));
    }
    ptr::copy_nonoverlapping(s.as_ptr(), buf.cast::<u8>(), s.len());
    *buf.add(s.len()) = 0;
    Ok(())
}

fn boxed(inner: System) -> *mut HodynSystem {
    Box::into_raw(Box::new(HodynSystem { inner }))
}

fn lagrangian(sys: &HodynSystem) -> Result<&LagrangianSystem, Failure> {
    match &sys.inner {
        System::Lagrangian(l) => Ok(l),
        System::Hamiltonian(_) => Err(Failure::new(
            HodynStatus::WrongKind,
            "expected a Lagrangian system",
        )),
    }
}

fn hamiltonian(sys: &HodynSystem) -> Result<&HamiltonianSystem, Failure> {
    match &sys.inner {
        System::Hamiltonian(h) => Ok(h),
        System::Lagrangian(_) => Err(Failure::new(
            HodynStatus::WrongKind,
            "expected a Hamiltonian system",
        )),
    }
}

/// Copies the last error message of this thread into `buf`.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes; `needed` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn hodyn_last_error(
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> HodynStatus {
    let message = LAST_ERROR.with(|slot| slot.borrow().clone());
    match write_str(&message, buf, len, needed) {
        Ok(()) => HodynStatus::Ok,
        Err(f) => f.status,
    }
}

/// Parses a kth-order Lagrangian in `n` degrees of freedom.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hodyn_lagrangian_new(
    text: *const c_char,
    n: u32,
    k: u32,
    out: *mut *mut HodynSystem,
) -> HodynStatus {
    guard(|| {
        check_out(out, "out")?;
        let sys = LagrangianSystem::parse(n, k, c_str(text, "text")?)?;
        *out = boxed(System::Lagrangian(sys));
        Ok(())
    })
}

/// Parses a Hamiltonian on the cotangent bundle of the `(k-1)`-jets.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hodyn_hamiltonian_new(
    text: *const c_char,
    n: u32,
    k: u32,
    out: *mut *mut HodynSystem,
) -> HodynStatus {
    guard(|| {
        check_out(out, "out")?;
        let sys = HamiltonianSystem::parse(n, k, c_str(text, "text")?)?;
        *out = boxed(System::Hamiltonian(sys));
        Ok(())
    })
}

/// # Safety
/// `sys` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn hodyn_system_free(sys: *mut HodynSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// # Safety
/// `sys` must be a live handle; `kind`, `n` and `k` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn hodyn_system_info(
    sys: *const HodynSystem,
    kind: *mut HodynKind,
    n: *mut u32,
    k: *mut u32,
) -> HodynStatus {
    guard(|| {
        let sys = deref(sys, "sys")?;
        let (kd, dn, dk) = match &sys.inner {
            System::Lagrangian(l) => (HodynKind::Lagrangian, l.n(), l.k()),
            System::Hamiltonian(h) => (HodynKind::Hamiltonian, h.n(), h.k()),
        };
        if !kind.is_null() {
            *kind = kd;
        }
        if !n.is_null() {
            *n = dn;
        }
        if !k.is_null() {
            *k = dk;
        }
        Ok(())
    })
}

/// The simplified defining function, `L` or `H`.
///
/// # Safety
/// `sys` must be a live handle; see the module docs for the buffer contract.
#[no_mangle]
pub unsafe extern "C" fn hodyn_system_expr(
    sys: *const HodynSystem,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> HodynStatus {
    guard(|| {
        let expr = match &deref(sys, "sys")?.inner {
            System::Lagrangian(l) => l.lagrangian().to_string(),
            System::Hamiltonian(h) => h.hamiltonian().to_string(),
        };
        write_str(&expr, buf, len, needed)
    })
}

/// Euler-Lagrange expression for the 1-based coordinate `i`.
///
/// # Safety
/// `sys` must be a live handle; see the module docs for the buffer contract.
#[no_mangle]
pub unsafe extern "C" fn hodyn_euler_lagrange(
    sys: *const HodynSystem,
    i: u32,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> HodynStatus {
    guard(|| {
        let lsys = lagrangian(deref(sys, "sys")?)?;
        if i == 0 || i > lsys.n() {
            return Err(Failure::new(
                HodynStatus::Validation,
                format!("coordinate {i} outside 1..={}", lsys.n()),
            ));
        }
        let el = lsys.euler_lagrange();
        write_str(&el[i as usize - 1].to_string(), buf, len, needed)
    })
}

/// Jacobi-Ostrogradsky momentum `p_i^(r)`, `i` 1-based, `r` in `0..k`.
///
/// # Safety
/// `sys` must be a live handle; see the module docs for the buffer contract.
#[no_mangle]
pub unsafe extern "C" fn hodyn_momentum(
    sys: *const HodynSystem,
    i: u32,
    r: u32,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> HodynStatus {
    guard(|| {
        let lsys = lagrangian(deref(sys, "sys")?)?;
        if i == 0 || i > lsys.n() || r >= lsys.k() {
            return Err(Failure::new(
                HodynStatus::Validation,
                format!(
                    "momentum p{i}_{r} outside n = {}, k = {}",
                    lsys.n(),
                    lsys.k()
                ),
            ));
        }
        let table = lsys.jacobi_ostrogradsky_momenta();
        write_str(&table.get(i, r).to_string(), buf, len, needed)
    })
}

/// Canonical Hamiltonian of a regular Lagrangian. Fails with `Numerical`
/// when the Legendre map has no closed-form inverse.
///
/// # Safety
/// `sys` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hodyn_canonical_hamiltonian(
    sys: *const HodynSystem,
    out: *mut *mut HodynSystem,
) -> HodynStatus {
    guard(|| {
        check_out(out, "out")?;
        let lsys = lagrangian(deref(sys, "sys")?)?;
        let (can, _) = canonical_hamiltonian(lsys)?;
        let hsys = can.symbolic().cloned().ok_or_else(|| {
            Failure::new(HodynStatus::Numerical, "Hamiltonian has no closed form")
        })?;
        *out = boxed(System::Hamiltonian(hsys));
        Ok(())
    })
}

/// Lagrangian of a regular kth-order Hamiltonian.
///
/// # Safety
/// `sys` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hodyn_reconstruct_lagrangian(
    sys: *const HodynSystem,
    out: *mut *mut HodynSystem,
) -> HodynStatus {
    guard(|| {
        check_out(out, "out")?;
        let hsys = hamiltonian(deref(sys, "sys")?)?;
        let rec = reconstruct_lagrangian(hsys)?;
        let lsys = rec
            .symbolic()
            .cloned()
            .ok_or_else(|| Failure::new(HodynStatus::Numerical, "Lagrangian has no closed form"))?;
        *out = boxed(System::Lagrangian(lsys));
        Ok(())
    })
}

/// RK4 from `t0` to `t1` with step `h`.
///
/// Lagrangian systems take `x0` in jet coordinates `q_(0..2k-1)`, level
/// outer and coordinate inner; Hamiltonian systems take `(q_(0..k-1), p^(0..k-1))`.
///
/// # Safety
/// `sys` must be a live handle, `x0` valid for `len` doubles, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hodyn_integrate(
    sys: *const HodynSystem,
    x0: *const f64,
    len: usize,
    t0: f64,
    t1: f64,
    h: f64,
    out: *mut *mut HodynTrajectory,
) -> HodynStatus {
    guard(|| {
        check_out(out, "out")?;
        let sys = deref(sys, "sys")?;
        let x0 = std::slice::from_raw_parts(deref(x0, "x0")?, len);
        let ode = match &sys.inner {
            System::Lagrangian(l) => lagrangian_ode(l)?,
            System::Hamiltonian(h) => hamilton_ode(h),
        };
        let traj = integrate_rk4(&ode, x0, t0, t1, h)?;
        *out = Box::into_raw(Box::new(HodynTrajectory { inner: traj }));
        Ok(())
    })
}

/// # Safety
/// `traj` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn hodyn_trajectory_free(traj: *mut HodynTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Number of samples, 0 for a null handle.
///
/// # Safety
/// `traj` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hodyn_trajectory_len(traj: *const HodynTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.inner.len())
}

/// State dimension, 0 for a null handle.
///
/// # Safety
/// `traj` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hodyn_trajectory_dim(traj: *const HodynTrajectory) -> usize {
    traj.as_ref()
        .and_then(|t| t.inner.states.first())
        .map_or(0, Vec::len)
}

/// Time and state of sample `idx`; `state` must hold `dim` doubles.
///
/// # Safety
/// `traj` must be a live handle, `time` null or writable, `state` valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn hodyn_trajectory_sample(
    traj: *const HodynTrajectory,
    idx: usize,
    time: *mut f64,
    state: *mut f64,
    len: usize,
) -> HodynStatus {
    guard(|| {
        let traj = &deref(traj, "traj")?.inner;
        if idx >= traj.len() {
            return Err(Failure::new(
                HodynStatus::Validation,
                format!("sample {idx} of {}", traj.len()),
            ));
        }
        let values = &traj.states[idx];
        check_out(state, "state")?;
        if len < values.len() {
            return Err(Failure::new(
                HodynStatus::BufferTooSmall,
                format!("buffer of {len} doubles, need {}", values.len()),
            ));
        }
        ptr::copy_nonoverlapping(values.as_ptr(), state, values.len());
        if !time.is_null() {
            *time = traj.times[idx];
        }
        Ok(())
    })
}

/// Sets `out` to whether two expressions agree, exactly or on random samples.
///
/// # Safety
/// `a` and `b` must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hodyn_equivalent(
    a: *const c_char,
    b: *const c_char,
    out: *mut bool,
) -> HodynStatus {
    guard(|| {
        check_out(out, "out")?;
        let ea = parse(c_str(a, "a")?).map_err(Error::from)?;
        let eb = parse(c_str(b, "b")?).map_err(Error::from)?;
        *out = match check_equivalent(&ea, &eb) {
            Equivalence::Exact | Equivalence::Sampled => true,
            Equivalence::Different { .. } => false,
            Equivalence::Inconclusive(e) => return Err(Error::from(e).into()),
        };
        Ok(())
    })
}
