//! C ABI over `macrospin`.
//!
//! Objects are opaque handles created by `ms_*_new`-style functions and
//! released with the matching `ms_*_free`. Every fallible call returns an
//! [`MsStatus`]; on failure a message is kept per thread and can be copied out
//! with [`ms_last_error_message`]. Panics never cross the boundary.

use macrospin::classical::{quadrature_slot_histogram, total_variation};
use macrospin::lg::{coarse_lg, k_analytic, k_exact, LgProtocol};
use macrospin::measurement::{
    coarse_probabilities, disturbance_metric, make_partition, two_time_correlation, DichotomicObservable,
    PartitionPolicy, SlotPartition,
};
use macrospin::spin::{Hamiltonian, SpinLength};
use macrospin::states::{
    coherent_vector, husimi_q, maximally_mixed, outcome_distribution, CoherentStateParams, DensityMatrix,
};
use macrospin::Error;
use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    InvalidState = 4,
    NonDivisorSlotWidth = 5,
    PartitionMismatch = 6,
    ZeroProbabilityBranch = 7,
    Numerical = 8,
    BufferTooSmall = 9,
    Io = 10,
    Panic = 11,
}

/// Density matrix handle.
pub struct MsDensityMatrix(DensityMatrix);

/// Slot partition handle.
pub struct MsPartition(SlotPartition);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> MsStatus {
    match e {
        Error::InvalidArgument(_) | Error::OracleTooLarge { .. } => MsStatus::InvalidArgument,
        Error::DimensionMismatch { .. } => MsStatus::DimensionMismatch,
        Error::InvalidState(_) => MsStatus::InvalidState,
        Error::NonDivisorSlotWidth { .. } => MsStatus::NonDivisorSlotWidth,
        Error::PartitionMismatch => MsStatus::PartitionMismatch,
        Error::ZeroProbabilityBranch { .. } => MsStatus::ZeroProbabilityBranch,
        Error::BackendDisagreement { .. }
        | Error::NoConvergence
        | Error::LowAcceptance { .. }
        | Error::Numerical(_) => MsStatus::Numerical,
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => MsStatus::Io,
    }
}

enum Failure {
    Status(MsStatus, String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn null(what: &str) -> Failure {
    Failure::Status(MsStatus::NullPointer, format!("{what} is null"))
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> MsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MsStatus::Ok,
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            MsStatus::Panic
        }
    }
}

unsafe fn out_slice<'a>(buf: *mut f64, len: usize, needed: usize) -> Result<&'a mut [f64], Failure> {
    if buf.is_null() {
        return Err(null("output buffer"));
    }
    if len < needed {
        return Err(Failure::Status(MsStatus::BufferTooSmall, format!("buffer holds {len}, need {needed}")));
    }
    Ok(std::slice::from_raw_parts_mut(buf, needed))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ms_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length excluding the NUL, or
/// 0 when there is no message.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn ms_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len - 1);
                ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
                *buf.add(n) = 0;
            }
            bytes.len()
        }
    })
}

/// The maximally mixed state of spin `two_j / 2`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ms_density_maximally_mixed(two_j: u32, out: *mut *mut MsDensityMatrix) -> MsStatus {
    guard(|| {
        let rho = maximally_mixed(SpinLength::from_two_j(two_j));
        write_out(out, Box::into_raw(Box::new(MsDensityMatrix(rho))))
    })
}

/// The spin coherent state pointing at `(theta, phi)`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ms_density_coherent(
    two_j: u32,
    theta: f64,
    phi: f64,
    out: *mut *mut MsDensityMatrix,
) -> MsStatus {
    guard(|| {
        let j = SpinLength::from_two_j(two_j);
        let p = CoherentStateParams::new(j, theta, phi)?;
        let rho = DensityMatrix::pure(j, &coherent_vector(&p))?;
        write_out(out, Box::into_raw(Box::new(MsDensityMatrix(rho))))
    })
}

/// # Safety
/// `rho` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ms_density_free(rho: *mut MsDensityMatrix) {
    if !rho.is_null() {
        drop(Box::from_raw(rho));
    }
}

/// Hilbert-space dimension `2j+1`, or 0 for a null handle.
///
/// # Safety
/// `rho` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ms_density_dim(rho: *const MsDensityMatrix) -> usize {
    rho.as_ref().map_or(0, |r| r.0.spin().dim())
}

/// Writes `p(m)` for `m = j, ..., -j` into `buf` (`len >= 2j+1`).
///
/// # Safety
/// `rho` must be a live handle and `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ms_outcome_distribution(rho: *const MsDensityMatrix, buf: *mut f64, len: usize) -> MsStatus {
    guard(|| {
        let rho = rho.as_ref().ok_or_else(|| null("density matrix"))?;
        let p = outcome_distribution(&rho.0);
        out_slice(buf, len, p.len())?.copy_from_slice(&p);
        Ok(())
    })
}

/// Husimi Q-function at `(theta, phi)`.
///
/// # Safety
/// `rho` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn ms_husimi_q(rho: *const MsDensityMatrix, theta: f64, phi: f64, out: *mut f64) -> MsStatus {
    guard(|| {
        let rho = rho.as_ref().ok_or_else(|| null("density matrix"))?;
        write_out(out, husimi_q(&rho.0, theta, phi)?)
    })
}

/// Slots of width `delta_m`; `strict` rejects widths that do not divide `2j+1`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ms_partition_new(two_j: u32, delta_m: usize, strict: bool, out: *mut *mut MsPartition) -> MsStatus {
    guard(|| {
        let policy = if strict { PartitionPolicy::Strict } else { PartitionPolicy::Ragged };
        let part = make_partition(SpinLength::from_two_j(two_j), delta_m, policy)?;
        write_out(out, Box::into_raw(Box::new(MsPartition(part))))
    })
}

/// # Safety
/// `part` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ms_partition_free(part: *mut MsPartition) {
    if !part.is_null() {
        drop(Box::from_raw(part));
    }
}

/// Number of slots, or 0 for a null handle.
///
/// # Safety
/// `part` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ms_partition_len(part: *const MsPartition) -> usize {
    part.as_ref().map_or(0, |p| p.0.len())
}

/// Slot labels in ascending order.
///
/// # Safety
/// `part` must be a live handle and `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ms_partition_labels(part: *const MsPartition, buf: *mut f64, len: usize) -> MsStatus {
    guard(|| {
        let part = part.as_ref().ok_or_else(|| null("partition"))?;
        let labels = part.0.labels();
        out_slice(buf, len, labels.len())?.copy_from_slice(&labels);
        Ok(())
    })
}

/// Coarse-grained outcome probabilities in slot order.
///
/// # Safety
/// Handles must be live and `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ms_coarse_probabilities(
    rho: *const MsDensityMatrix,
    part: *const MsPartition,
    buf: *mut f64,
    len: usize,
) -> MsStatus {
    guard(|| {
        let rho = rho.as_ref().ok_or_else(|| null("density matrix"))?;
        let part = part.as_ref().ok_or_else(|| null("partition"))?;
        let p = coarse_probabilities(&rho.0, &part.0)?;
        out_slice(buf, len, p.len())?.copy_from_slice(&p);
        Ok(())
    })
}

/// Total variation between the coarse quantum distribution and the band
/// quadrature of the Q-function.
///
/// # Safety
/// Handles must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn ms_quantum_q_band_distance(
    rho: *const MsDensityMatrix,
    part: *const MsPartition,
    out: *mut f64,
) -> MsStatus {
    guard(|| {
        let rho = rho.as_ref().ok_or_else(|| null("density matrix"))?;
        let part = part.as_ref().ok_or_else(|| null("partition"))?;
        let quantum = macrospin::classical::SlotHistogram::new(&part.0, coarse_probabilities(&rho.0, &part.0)?)?;
        let quad = quadrature_slot_histogram(&rho.0, &part.0)?;
        write_out(out, total_variation(&quantum, &quad)?)
    })
}

/// Probability-weighted Q-function disturbance of a slot measurement.
///
/// # Safety
/// Handles must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn ms_disturbance_average(
    rho: *const MsDensityMatrix,
    part: *const MsPartition,
    out: *mut f64,
) -> MsStatus {
    guard(|| {
        let rho = rho.as_ref().ok_or_else(|| null("density matrix"))?;
        let part = part.as_ref().ok_or_else(|| null("partition"))?;
        write_out(out, disturbance_metric(&rho.0, &part.0)?.average)
    })
}

/// Parity two-time correlation for `H = omega J_x` between `t1 <= t2`.
///
/// # Safety
/// `rho` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn ms_parity_correlation(
    rho: *const MsDensityMatrix,
    omega: f64,
    t1: f64,
    t2: f64,
    out: *mut f64,
) -> MsStatus {
    guard(|| {
        let rho = rho.as_ref().ok_or_else(|| null("density matrix"))?;
        let j = rho.0.spin();
        if !omega.is_finite() {
            return Err(Error::InvalidArgument("omega must be finite".into()).into());
        }
        let h = Hamiltonian::precession(j, omega);
        let r = two_time_correlation(&rho.0, &DichotomicObservable::parity(j), &h, t1, t2)?;
        write_out(out, r.c)
    })
}

/// `3 sin(x)/x - sin(3x)/(3x)`.
#[no_mangle]
pub extern "C" fn ms_k_analytic(x: f64) -> f64 {
    k_analytic(x)
}

/// Exact four-time K for parity measurements on the maximally mixed state
/// at `x = (2j+1) omega dt`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ms_k_exact_parity(two_j: u32, x: f64, out: *mut f64) -> MsStatus {
    guard(|| {
        let protocol = LgProtocol::parity_mixed(SpinLength::from_two_j(two_j), 1.0, x)?;
        write_out(out, k_exact(&protocol)?.k)
    })
}

/// Four-time K with the slot-sign observable.
///
/// # Safety
/// `part` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn ms_coarse_lg(part: *const MsPartition, omega: f64, dt: f64, out: *mut f64) -> MsStatus {
    guard(|| {
        let part = part.as_ref().ok_or_else(|| null("partition"))?;
        if !omega.is_finite() {
            return Err(Error::InvalidArgument("omega must be finite".into()).into());
        }
        write_out(out, coarse_lg(part.0.spin(), &part.0, omega, dt)?.k)
    })
}
