//! The four-time Leggett–Garg protocol with equidistant measurement times.

use crate::error::{invalid, Error, Result};
use crate::measurement::{two_time_correlation_with, DichotomicObservable, Propagator, SlotPartition};
use crate::numeric::{bisect, golden_section_max};
use crate::spin::{Hamiltonian, SpinLength};
use crate::states::{maximally_mixed, DensityMatrix};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Tolerance of the stationarity check for time-invariant initial states.
pub const STATIONARITY_TOL: f64 = 1e-10;

/// Slack allowed on `|C| <= 1` for correlations carrying roundoff.
const RANGE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct LgProtocol {
    pub hamiltonian: Hamiltonian,
    pub dt: f64,
    pub t1: f64,
    pub observable: DichotomicObservable,
    pub initial: DensityMatrix,
}

impl LgProtocol {
    pub fn new(
        hamiltonian: Hamiltonian,
        dt: f64,
        observable: DichotomicObservable,
        initial: DensityMatrix,
    ) -> Result<Self> {
        LgProtocol::starting_at(hamiltonian, 0.0, dt, observable, initial)
    }

    pub fn starting_at(
        hamiltonian: Hamiltonian,
        t1: f64,
        dt: f64,
        observable: DichotomicObservable,
        initial: DensityMatrix,
    ) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(invalid(format!("time step must be positive, got {dt}")));
        }
        if !(t1 >= 0.0 && t1.is_finite()) {
            return Err(invalid(format!("first time must be non-negative, got {t1}")));
        }
        let j = hamiltonian.j;
        if observable.spin() != j || initial.spin() != j {
            return Err(Error::DimensionMismatch { expected: j.dim(), got: observable.spin().dim() });
        }
        Ok(LgProtocol { hamiltonian, dt, t1, observable, initial })
    }

    /// Parity measurements on the maximally mixed state at `x = (2j+1) omega dt`.
    pub fn parity_mixed(j: SpinLength, omega: f64, x: f64) -> Result<Self> {
        let dt = x / (j.dim() as f64 * omega);
        LgProtocol::new(Hamiltonian::precession(j, omega), dt, DichotomicObservable::parity(j), maximally_mixed(j))
    }

    pub fn spin(&self) -> SpinLength {
        self.hamiltonian.j
    }

    /// `x = (2j+1) omega dt`.
    pub fn x(&self) -> f64 {
        self.spin().dim() as f64 * self.hamiltonian.omega * self.dt
    }

    pub fn times(&self) -> [f64; 4] {
        [0.0, 1.0, 2.0, 3.0].map(|i| self.t1 + i * self.dt)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LgResult {
    pub c12: f64,
    pub c23: f64,
    pub c34: f64,
    pub c14: f64,
    pub k: f64,
}

impl LgResult {
    pub fn new(c12: f64, c23: f64, c34: f64, c14: f64) -> Result<Self> {
        Ok(LgResult { c12, c23, c34, c14, k: k_statistic(c12, c23, c34, c14)? })
    }

    pub fn violates(&self) -> bool {
        self.k > 2.0
    }
}

/// `K = C12 + C23 + C34 - C14`.
pub fn k_statistic(c12: f64, c23: f64, c34: f64, c14: f64) -> Result<f64> {
    for c in [c12, c23, c34, c14] {
        if !(c.abs() <= 1.0 + RANGE_SLACK) {
            return Err(invalid(format!("correlation {c} outside [-1, 1]")));
        }
    }
    Ok(c12 + c23 + c34 - c14)
}

/// Correlations from the projection postulate for the protocol's dynamics.
pub fn k_exact(protocol: &LgProtocol) -> Result<LgResult> {
    k_exact_with(&Propagator::new(protocol.hamiltonian)?, protocol)
}

pub fn k_exact_with(prop: &Propagator, protocol: &LgProtocol) -> Result<LgResult> {
    let [t1, t2, t3, t4] = protocol.times();
    let corr = |a: f64, b: f64| -> Result<f64> {
        Ok(two_time_correlation_with(prop, &protocol.initial, &protocol.observable, a, b)?.c)
    };
    let c12 = corr(t1, t2)?;
    let c23 = corr(t2, t3)?;
    let c34 = corr(t3, t4)?;
    let c14 = corr(t1, t4)?;
    if protocol.initial.is_maximally_mixed() {
        let drift = (c12 - c23).abs().max((c23 - c34).abs());
        if drift > STATIONARITY_TOL {
            return Err(Error::Numerical(format!(
                "stationary state gave time-dependent correlations (drift {drift:e})"
            )));
        }
    }
    LgResult::new(c12, c23, c34, c14)
}

/// `K(x) = 3 sin(x)/x - sin(3x)/(3x)`, continuous at `x = 0`.
pub fn k_analytic(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        return 2.0 + x2 - 0.65 * x2 * x2;
    }
    3.0 * x.sin() / x - (3.0 * x).sin() / (3.0 * x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxK {
    pub x_star: f64,
    pub k_star: f64,
    /// Argmax of the grid scan used as a cross-check.
    pub grid_x_star: f64,
}

pub const MAX_K_GRID: usize = 100_000;

/// Maximises [`k_analytic`] on `[x_lo, x_hi]` by golden section (to 1e-9),
/// cross-checked by a grid scan.
pub fn find_max_k(x_lo: f64, x_hi: f64) -> Result<MaxK> {
    if !(x_lo > 0.0 && x_hi > x_lo && x_hi.is_finite()) {
        return Err(invalid(format!("need 0 < x_lo < x_hi, got ({x_lo}, {x_hi})")));
    }
    let (x_star, k_star) = golden_section_max(k_analytic, x_lo, x_hi, 1e-9);
    let step = (x_hi - x_lo) / (MAX_K_GRID - 1) as f64;
    let grid_x_star = (0..MAX_K_GRID)
        .map(|i| x_lo + i as f64 * step)
        .map(|x| (x, k_analytic(x)))
        .fold((x_lo, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best })
        .0;
    if (grid_x_star - x_star).abs() > 1e-4 + step {
        return Err(Error::Numerical(format!(
            "golden-section maximum {x_star} disagrees with grid maximum {grid_x_star}"
        )));
    }
    Ok(MaxK { x_star, k_star, grid_x_star })
}

/// Root of `k_analytic(x) - 2` on `[lo, hi]` to `1e-12`.
pub fn violation_boundary(lo: f64, hi: f64) -> Option<f64> {
    bisect(|x| k_analytic(x) - 2.0, lo, hi, 1e-12)
}

/// The violation boundary in `(1, 2)`.
pub fn violation_boundary_x() -> f64 {
    violation_boundary(1.0, 2.0).expect("k_analytic crosses 2 in (1, 2)")
}

/// Four-time protocol with the slot-sign observable on the maximally mixed state.
pub fn coarse_lg(j: SpinLength, part: &SlotPartition, omega: f64, dt: f64) -> Result<LgResult> {
    let prop = Propagator::new(Hamiltonian::precession(j, omega))?;
    coarse_lg_with(&prop, part, dt)
}

pub fn coarse_lg_with(prop: &Propagator, part: &SlotPartition, dt: f64) -> Result<LgResult> {
    let j = prop.hamiltonian().j;
    if part.spin() != j {
        return Err(Error::DimensionMismatch { expected: j.dim(), got: part.spin().dim() });
    }
    let protocol = LgProtocol::new(*prop.hamiltonian(), dt, DichotomicObservable::slot_sign(part), maximally_mixed(j))?;
    k_exact_with(prop, &protocol)
}

/// `K` at each `omega * dt` in `angles` for one observable on the maximally
/// mixed state (`omega = 1`).
pub fn scan_angles(j: SpinLength, observable: &DichotomicObservable, angles: &[f64]) -> Result<Vec<LgResult>> {
    let prop = Propagator::new(Hamiltonian::precession(j, 1.0))?;
    let rho = maximally_mixed(j);
    angles
        .par_iter()
        .map(|&a| {
            let protocol = LgProtocol::new(*prop.hamiltonian(), a, observable.clone(), rho.clone())?;
            k_exact_with(&prop, &protocol)
        })
        .collect()
}

/// `n` points from `lo` to `hi` (inclusive), equally spaced in `ln`.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo && n >= 2, "invalid geometric grid");
    let r = (hi / lo).ln() / (n - 1) as f64;
    (0..n)
        .map(|i| if i + 1 == n { hi } else { lo * (r * i as f64).exp() })
        .collect()
}
