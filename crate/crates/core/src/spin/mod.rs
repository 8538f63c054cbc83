//! Spin-j operator algebra and the `exp(-i angle J_x)` time-evolution kernels.
//!
//! Every operator is a dense matrix in the `J_z` eigenbasis ordered
//! `m = j, j-1, ..., -j`; index `i` corresponds to `m = j - i`.

mod expm;
mod operator;
mod rotation;
mod tridiag;
mod wigner;

pub use expm::{matrix_exp_oracle, matrix_exp_oracle_with_cap, DEFAULT_ORACLE_CAP};
pub use operator::ComplexOperator;
pub use rotation::{
    check_backends, rotation_x, rotation_x_with, RotationBackend, XRotation,
    BACKEND_AGREEMENT_TOL,
};
pub use tridiag::{symmetric_tridiagonal_eigen, TridiagEigen};
pub use wigner::wigner_small_d;

use crate::error::{invalid, Result};
use crate::C64;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Spin quantum number stored as `2j` so half-integers stay exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SpinLength {
    two_j: u32,
}

impl SpinLength {
    pub const fn from_two_j(two_j: u32) -> Self {
        SpinLength { two_j }
    }

    /// Builds `j` from a float; fails unless `2j` is a non-negative integer.
    pub fn from_j(j: f64) -> Result<Self> {
        let two = 2.0 * j;
        if !two.is_finite() || two < 0.0 || (two - two.round()).abs() > 1e-9 {
            return Err(invalid(format!("spin length {j} is not a non-negative half-integer")));
        }
        Ok(SpinLength { two_j: two.round() as u32 })
    }

    pub const fn two_j(self) -> u32 {
        self.two_j
    }

    pub fn j(self) -> f64 {
        self.two_j as f64 / 2.0
    }

    /// Hilbert-space dimension `2j + 1`.
    pub const fn dim(self) -> usize {
        self.two_j as usize + 1
    }

    pub const fn is_integer(self) -> bool {
        self.two_j.is_multiple_of(2)
    }

    /// Eigenvalue `m` at basis index `i`.
    pub fn m_at(self, index: usize) -> f64 {
        self.j() - index as f64
    }

    /// `2m` at basis index `i`, exact.
    pub fn two_m_at(self, index: usize) -> i64 {
        self.two_j as i64 - 2 * index as i64
    }

    /// Basis index of the eigenvalue `m`, if `m` belongs to the spectrum.
    pub fn index_of(self, m: f64) -> Option<usize> {
        let idx = self.j() - m;
        if idx < -1e-9 || idx > self.two_j as f64 + 1e-9 || (idx - idx.round()).abs() > 1e-9 {
            return None;
        }
        Some(idx.round() as usize)
    }

    /// All `m` values in basis order.
    pub fn ms(self) -> impl Iterator<Item = f64> {
        (0..self.dim()).map(move |i| self.m_at(i))
    }

    /// Classical magnitude `sqrt(j(j+1))`.
    pub fn casimir_length(self) -> f64 {
        let j = self.j();
        (j * (j + 1.0)).sqrt()
    }
}

impl fmt::Display for SpinLength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.two_j / 2)
        } else {
            write!(f, "{}/2", self.two_j)
        }
    }
}

/// `H = J^2 / 2I + omega J_x`.
///
/// The `J^2` term is proportional to the identity on a fixed-`j` space and
/// only contributes a global phase, so [`Hamiltonian::propagator`] ignores it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hamiltonian {
    pub j: SpinLength,
    pub omega: f64,
    pub moment_of_inertia: f64,
}

impl Hamiltonian {
    pub fn new(j: SpinLength, omega: f64, moment_of_inertia: f64) -> Result<Self> {
        if !omega.is_finite() {
            return Err(invalid("omega must be finite"));
        }
        if !(moment_of_inertia > 0.0) {
            return Err(invalid("moment of inertia must be positive"));
        }
        Ok(Hamiltonian { j, omega, moment_of_inertia })
    }

    /// Precession-only Hamiltonian with `I -> infinity`.
    pub fn precession(j: SpinLength, omega: f64) -> Self {
        Hamiltonian { j, omega, moment_of_inertia: f64::INFINITY }
    }

    /// Dense matrix of the full Hamiltonian, including the `J^2/2I` term.
    pub fn matrix(&self) -> ComplexOperator {
        let jj = self.j.j() * (self.j.j() + 1.0);
        let shift = if self.moment_of_inertia.is_finite() {
            jj / (2.0 * self.moment_of_inertia)
        } else {
            0.0
        };
        let mut h = build_jx(self.j).scale(C64::new(self.omega, 0.0));
        for i in 0..self.j.dim() {
            h[(i, i)] += shift;
        }
        h
    }

    /// Rotation angle accumulated after time `t`.
    pub fn angle(&self, t: f64) -> f64 {
        self.omega * t
    }

    /// `U_t = exp(-i omega t J_x)`.
    pub fn propagator(&self, t: f64) -> ComplexOperator {
        rotation_x(self.j, self.angle(t))
    }
}

/// `J_z = diag(j, j-1, ..., -j)`.
pub fn build_jz(j: SpinLength) -> ComplexOperator {
    let diag: Vec<f64> = j.ms().collect();
    ComplexOperator::from_real_diagonal(&diag)
}

/// Off-diagonal element `<m|J_x|m-1> = sqrt(j(j+1) - m(m-1)) / 2` for the
/// pair of basis indices `(i, i+1)`.
pub(crate) fn jx_offdiagonal(j: SpinLength) -> Vec<f64> {
    let jj = j.j() * (j.j() + 1.0);
    (0..j.dim().saturating_sub(1))
        .map(|i| {
            let m = j.m_at(i);
            0.5 * (jj - m * (m - 1.0)).max(0.0).sqrt()
        })
        .collect()
}

/// `J_x = (J_+ + J_-) / 2`: real symmetric tridiagonal.
pub fn build_jx(j: SpinLength) -> ComplexOperator {
    let n = j.dim();
    let off = jx_offdiagonal(j);
    let mut op = ComplexOperator::zeros(n);
    for (i, &v) in off.iter().enumerate() {
        op[(i, i + 1)] = C64::new(v, 0.0);
        op[(i + 1, i)] = C64::new(v, 0.0);
    }
    op
}

/// `J_y = (J_+ - J_-) / 2i`.
pub fn build_jy(j: SpinLength) -> ComplexOperator {
    let n = j.dim();
    let off = jx_offdiagonal(j);
    let mut op = ComplexOperator::zeros(n);
    for (i, &v) in off.iter().enumerate() {
        // <m|J_y|m-1> = -i v, <m-1|J_y|m> = +i v
        op[(i, i + 1)] = C64::new(0.0, -v);
        op[(i + 1, i)] = C64::new(0.0, v);
    }
    op
}

/// Parity `Q = sum_m (-1)^(j-m) |m><m|`.
pub fn parity_operator(j: SpinLength) -> ComplexOperator {
    let diag: Vec<f64> = (0..j.dim()).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    ComplexOperator::from_real_diagonal(&diag)
}
