use super::{jx_offdiagonal, symmetric_tridiagonal_eigen, wigner_small_d, ComplexOperator, SpinLength};
use crate::error::{Error, Result};
use crate::C64;
use ndarray::{Array1, Array2, Axis, Zip};

/// Default max elementwise disagreement between the two rotation backends.
pub const BACKEND_AGREEMENT_TOL: f64 = 1e-9;

/// Which algorithm builds `exp(-i angle J_x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RotationBackend {
    /// Eigen-decomposition of the real symmetric tridiagonal `J_x`.
    Eigen,
    /// Wigner small-d matrix for a `y` rotation, conjugated by `z` phases.
    Wigner,
}

/// Precomputed eigenbasis of `J_x` for one spin length.
///
/// Building it costs `O(n^3)`; afterwards each rotation matrix costs two real
/// matrix products and each state-vector rotation `O(n^2)`.
#[derive(Debug, Clone)]
pub struct XRotation {
    j: SpinLength,
    eigenvalues: Array1<f64>,
    eigenvectors: Array2<f64>,
}

impl XRotation {
    pub fn new(j: SpinLength) -> Result<Self> {
        let n = j.dim();
        let eig = symmetric_tridiagonal_eigen(&vec![0.0; n], &jx_offdiagonal(j))?;
        Ok(XRotation {
            j,
            eigenvalues: Array1::from(eig.values),
            eigenvectors: eig.vectors,
        })
    }

    pub fn spin(&self) -> SpinLength {
        self.j
    }

    /// Computed eigenvalues of `J_x`, ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        self.eigenvalues.as_slice().expect("contiguous")
    }

    /// `exp(-i angle J_x) = V diag(exp(-i angle w)) V^T`.
    pub fn matrix(&self, angle: f64) -> ComplexOperator {
        let v = &self.eigenvectors;
        let cos = self.eigenvalues.mapv(|w| (angle * w).cos());
        let sin = self.eigenvalues.mapv(|w| -(angle * w).sin());
        let vt = v.t();
        let re = (v * &cos.view().insert_axis(Axis(0))).dot(&vt);
        let im = (v * &sin.view().insert_axis(Axis(0))).dot(&vt);
        let mut out = Array2::<C64>::zeros(re.raw_dim());
        Zip::from(&mut out).and(&re).and(&im).for_each(|o, &r, &i| *o = C64::new(r, i));
        ComplexOperator::from_array(out)
    }

    /// Transition probabilities `|<m'| exp(-i angle J_x) |m>|^2`, indexed `[m', m]`.
    pub fn transition_probabilities(&self, angle: f64) -> Array2<f64> {
        self.matrix(angle).as_array().mapv(|z| z.norm_sqr())
    }

    /// `exp(-i angle J_x) |psi>` without forming the matrix.
    pub fn apply(&self, angle: f64, psi: &[C64]) -> Vec<C64> {
        let n = self.j.dim();
        assert_eq!(psi.len(), n, "state dimension mismatch");
        let v = &self.eigenvectors;
        let mut coeffs = vec![C64::new(0.0, 0.0); n];
        for (k, coeff) in coeffs.iter_mut().enumerate() {
            let col = v.column(k);
            let proj: C64 = col.iter().zip(psi).map(|(a, b)| b * *a).sum();
            let phase = C64::from_polar(1.0, -angle * self.eigenvalues[k]);
            *coeff = proj * phase;
        }
        (0..n)
            .map(|i| v.row(i).iter().zip(&coeffs).map(|(a, c)| c * *a).sum())
            .collect()
    }
}

/// `exp(-i angle J_x)` via the eigen backend.
pub fn rotation_x(j: SpinLength, angle: f64) -> ComplexOperator {
    rotation_x_with(j, angle, RotationBackend::Eigen)
        .expect("tridiagonal eigensolver failed on J_x")
}

pub fn rotation_x_with(j: SpinLength, angle: f64, backend: RotationBackend) -> Result<ComplexOperator> {
    if !angle.is_finite() {
        return Err(Error::InvalidArgument("rotation angle must be finite".into()));
    }
    match backend {
        RotationBackend::Eigen => Ok(XRotation::new(j)?.matrix(angle)),
        RotationBackend::Wigner => Ok(wigner_rotation_x(j, angle)),
    }
}

/// `exp(-i a J_x) = exp(i pi/2 J_z) exp(-i a J_y) exp(-i pi/2 J_z)`, so
/// `U[i', i] = i^(m' - m) d[i', i]` with `m' - m = i - i'`.
fn wigner_rotation_x(j: SpinLength, angle: f64) -> ComplexOperator {
    let d = wigner_small_d(j, angle);
    let n = j.dim();
    let phases = [
        C64::new(1.0, 0.0),
        C64::new(0.0, 1.0),
        C64::new(-1.0, 0.0),
        C64::new(0.0, -1.0),
    ];
    let mut out = Array2::<C64>::zeros((n, n));
    for ip in 0..n {
        for i in 0..n {
            let p = (i as i64 - ip as i64).rem_euclid(4) as usize;
            out[(ip, i)] = phases[p] * d[(ip, i)];
        }
    }
    ComplexOperator::from_array(out)
}

/// Builds the rotation with both backends and returns their max elementwise
/// difference, or [`Error::BackendDisagreement`] above `tol`.
pub fn check_backends(j: SpinLength, angle: f64, tol: f64) -> Result<f64> {
    let a = rotation_x_with(j, angle, RotationBackend::Eigen)?;
    let b = rotation_x_with(j, angle, RotationBackend::Wigner)?;
    let diff = a.max_abs_diff(&b);
    if diff > tol {
        return Err(Error::BackendDisagreement { diff, tol });
    }
    Ok(diff)
}
