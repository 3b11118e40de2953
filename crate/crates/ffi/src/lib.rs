//! C ABI for qpe-lab.
//!
//! Every fallible function returns a [`QpeStatus`] and writes its result
//! through an out-pointer. On failure, [`qpe_last_error_message`] describes
//! the most recent error on the calling thread. Handles returned by the
//! library are owned by the caller and released with the matching `_free`
//! function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qpe_lab::experiment::fit_saturating_exponential;
use qpe_lab::{
    build_qpe, run_exact, run_trajectories, transpile, ChannelKind, Circuit, PhaseDistribution,
    SimSpec, TwoQubitNoise,
};

pub const QPE_CHANNEL_BITFLIP: u32 = 0;
pub const QPE_CHANNEL_PHASEFLIP: u32 = 1;
pub const QPE_CHANNEL_BITPHASEFLIP: u32 = 2;
pub const QPE_CHANNEL_DEPOLARIZING: u32 = 3;

pub const QPE_TWO_QUBIT_NOISE_BOTH: u32 = 0;
pub const QPE_TWO_QUBIT_NOISE_TARGET: u32 = 1;
pub const QPE_TWO_QUBIT_NOISE_NONE: u32 = 2;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QpeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Simulation = 3,
    Fit = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

/// Opaque circuit handle.
pub struct QpeCircuit(Circuit);

/// Opaque outcome distribution handle.
pub struct QpeDistribution(PhaseDistribution);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct QpeStats {
    pub theta_bar: f64,
    pub delta_theta: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct QpeFit {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub r_squared: f64,
    pub window_lo: f64,
    pub window_hi: f64,
    pub iterations: u32,
    pub converged: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: impl Into<String>) {
    let mut bytes = message.into().into_bytes();
    bytes.retain(|&b| b != 0);
    let message = CString::new(bytes).expect("interior NULs removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = message);
}

struct Failure(QpeStatus, String);

impl Failure {
    fn null(what: &str) -> Self {
        Failure(QpeStatus::NullPointer, format!("{what} is NULL"))
    }

    fn invalid(message: impl Into<String>) -> Self {
        Failure(QpeStatus::InvalidArgument, message.into())
    }
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> QpeStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_last_error("");
            QpeStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {message}"));
            QpeStatus::Panic
        }
    }
}

fn channel_from(code: u32) -> Result<ChannelKind, Failure> {
    match code {
        QPE_CHANNEL_BITFLIP => Ok(ChannelKind::BitFlip),
        QPE_CHANNEL_PHASEFLIP => Ok(ChannelKind::PhaseFlip),
        QPE_CHANNEL_BITPHASEFLIP => Ok(ChannelKind::BitPhaseFlip),
        QPE_CHANNEL_DEPOLARIZING => Ok(ChannelKind::Depolarizing),
        other => Err(Failure::invalid(format!("unknown channel code {other}"))),
    }
}

fn placement_from(code: u32) -> Result<TwoQubitNoise, Failure> {
    match code {
        QPE_TWO_QUBIT_NOISE_BOTH => Ok(TwoQubitNoise::Both),
        QPE_TWO_QUBIT_NOISE_TARGET => Ok(TwoQubitNoise::Target),
        QPE_TWO_QUBIT_NOISE_NONE => Ok(TwoQubitNoise::None),
        other => Err(Failure::invalid(format!(
            "unknown two-qubit noise code {other}"
        ))),
    }
}

unsafe fn out_ref<'a, T>(ptr: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    ptr.as_mut().ok_or_else(|| Failure::null(what))
}

unsafe fn in_ref<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, Failure> {
    ptr.as_ref().ok_or_else(|| Failure::null(what))
}

/// Message for the last failed call on this thread, or an empty string.
/// The pointer stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn qpe_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Builds the phase-estimation circuit for `n` estimation qubits and phase
/// `theta`, optionally rewritten into the {I, X, SX, Rz, CX} basis.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn qpe_circuit_build(
    n: u32,
    theta: f64,
    transpiled: bool,
    out: *mut *mut QpeCircuit,
) -> QpeStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let circuit = build_qpe(n as usize, theta).map_err(|e| Failure::invalid(e.to_string()))?;
        let circuit = if transpiled {
            transpile(&circuit)
                .map_err(|e| Failure::invalid(e.to_string()))?
                .into_inner()
        } else {
            circuit
        };
        *out = Box::into_raw(Box::new(QpeCircuit(circuit)));
        Ok(())
    })
}

/// # Safety
/// `circuit` must be NULL or a handle from [`qpe_circuit_build`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qpe_circuit_free(circuit: *mut QpeCircuit) {
    if !circuit.is_null() {
        drop(Box::from_raw(circuit));
    }
}

/// # Safety
/// `circuit` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qpe_circuit_width(
    circuit: *const QpeCircuit,
    out: *mut usize,
) -> QpeStatus {
    guard(|| {
        *out_ref(out, "out")? = in_ref(circuit, "circuit")?.0.width();
        Ok(())
    })
}

/// # Safety
/// `circuit` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qpe_circuit_num_ops(
    circuit: *const QpeCircuit,
    out: *mut usize,
) -> QpeStatus {
    guard(|| {
        *out_ref(out, "out")? = in_ref(circuit, "circuit")?.0.len();
        Ok(())
    })
}

/// Serializes the circuit to its text form. Release the string with
/// [`qpe_string_free`].
///
/// # Safety
/// `circuit` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qpe_circuit_to_text(
    circuit: *const QpeCircuit,
    out: *mut *mut c_char,
) -> QpeStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let text = in_ref(circuit, "circuit")?.0.to_text();
        *out = CString::new(text)
            .map_err(|e| Failure::invalid(e.to_string()))?
            .into_raw();
        Ok(())
    })
}

/// Parses a circuit from its text form.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qpe_circuit_parse(
    text: *const c_char,
    out: *mut *mut QpeCircuit,
) -> QpeStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        if text.is_null() {
            return Err(Failure::null("text"));
        }
        let text = CStr::from_ptr(text)
            .to_str()
            .map_err(|e| Failure::invalid(format!("text is not UTF-8: {e}")))?;
        let circuit: Circuit = text
            .parse()
            .map_err(|e: qpe_lab::Error| Failure::invalid(e.to_string()))?;
        *out = Box::into_raw(Box::new(QpeCircuit(circuit)));
        Ok(())
    })
}

/// # Safety
/// `s` must be NULL or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qpe_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

fn spec_for(
    n: u32,
    theta: f64,
    channel: u32,
    p: f64,
    two_qubit_noise: u32,
) -> Result<SimSpec, Failure> {
    let kind = channel_from(channel)?;
    let placement = placement_from(two_qubit_noise)?;
    Ok(SimSpec::qpe(n as usize, theta, kind, p)
        .map_err(|e| Failure::invalid(e.to_string()))?
        .with_two_qubit_noise(placement))
}

/// Exact density-matrix simulation of the noisy phase-estimation circuit.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qpe_simulate_exact(
    n: u32,
    theta: f64,
    channel: u32,
    p: f64,
    two_qubit_noise: u32,
    out: *mut *mut QpeDistribution,
) -> QpeStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let spec = spec_for(n, theta, channel, p, two_qubit_noise)?;
        let dist = run_exact(&spec).map_err(|e| Failure(QpeStatus::Simulation, e.to_string()))?;
        *out = Box::into_raw(Box::new(QpeDistribution(dist)));
        Ok(())
    })
}

/// Sampled simulation with `shots` seeded trajectories.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qpe_simulate_sampled(
    n: u32,
    theta: f64,
    channel: u32,
    p: f64,
    two_qubit_noise: u32,
    shots: u64,
    seed: u64,
    out: *mut *mut QpeDistribution,
) -> QpeStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let spec = spec_for(n, theta, channel, p, two_qubit_noise)?.with_seed(seed);
        let dist = run_trajectories(&spec, shots)
            .map_err(|e| Failure(QpeStatus::Simulation, e.to_string()))?;
        *out = Box::into_raw(Box::new(QpeDistribution(dist)));
        Ok(())
    })
}

/// Number of outcomes, 2^n.
///
/// # Safety
/// `dist` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qpe_distribution_len(
    dist: *const QpeDistribution,
    out: *mut usize,
) -> QpeStatus {
    guard(|| {
        *out_ref(out, "out")? = in_ref(dist, "dist")?.0.probs().len();
        Ok(())
    })
}

/// Copies the outcome probabilities into `buf`, which holds `len` doubles.
///
/// # Safety
/// `dist` must be a live handle; `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn qpe_distribution_probs(
    dist: *const QpeDistribution,
    buf: *mut f64,
    len: usize,
) -> QpeStatus {
    guard(|| {
        let probs = in_ref(dist, "dist")?.0.probs();
        if buf.is_null() {
            return Err(Failure::null("buf"));
        }
        if len < probs.len() {
            return Err(Failure(
                QpeStatus::BufferTooSmall,
                format!("buffer holds {len} values, need {}", probs.len()),
            ));
        }
        std::slice::from_raw_parts_mut(buf, probs.len()).copy_from_slice(probs);
        Ok(())
    })
}

/// # Safety
/// `dist` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qpe_distribution_stats(
    dist: *const QpeDistribution,
    out: *mut QpeStats,
) -> QpeStatus {
    guard(|| {
        let stats = in_ref(dist, "dist")?.0.stats();
        *out_ref(out, "out")? = QpeStats {
            theta_bar: stats.theta_bar,
            delta_theta: stats.delta_theta,
        };
        Ok(())
    })
}

/// # Safety
/// `dist` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qpe_distribution_free(dist: *mut QpeDistribution) {
    if !dist.is_null() {
        drop(Box::from_raw(dist));
    }
}

/// Fits y = k1 + k2·exp(−k3·p) to the points with p in [window_lo, window_hi].
///
/// # Safety
/// `p` and `y` must each point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qpe_fit_exponential(
    p: *const f64,
    y: *const f64,
    len: usize,
    window_lo: f64,
    window_hi: f64,
    out: *mut QpeFit,
) -> QpeStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        if p.is_null() {
            return Err(Failure::null("p"));
        }
        if y.is_null() {
            return Err(Failure::null("y"));
        }
        let (p, y) = (
            std::slice::from_raw_parts(p, len),
            std::slice::from_raw_parts(y, len),
        );
        let fit = fit_saturating_exponential(p, y, (window_lo, window_hi))
            .map_err(|e| Failure(QpeStatus::Fit, e.to_string()))?;
        *out = QpeFit {
            k1: fit.k1,
            k2: fit.k2,
            k3: fit.k3,
            r_squared: fit.r_squared,
            window_lo: fit.window.0,
            window_hi: fit.window.1,
            iterations: fit.iterations as u32,
            converged: fit.converged,
        };
        Ok(())
    })
}
