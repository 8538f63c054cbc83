//! Quantum states of a spin-j: density matrices, spin coherent states,
//! outcome distributions, the Gaussian approximation and the Husimi
//! Q-function.

use crate::error::{invalid, Error, Result};
use crate::numeric::LnFactorials;
use crate::spin::{ComplexOperator, SpinLength, XRotation};
use crate::C64;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Tolerance for Hermiticity and unit trace on construction.
pub const STATE_TOL: f64 = 1e-12;

/// Hermitian, positive, unit-trace matrix on the `2j+1` dimensional space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    j: SpinLength,
    matrix: ComplexOperator,
}

impl DensityMatrix {
    /// Validates Hermiticity and unit trace to [`STATE_TOL`].
    pub fn new(j: SpinLength, matrix: ComplexOperator) -> Result<Self> {
        if matrix.dim() != j.dim() {
            return Err(Error::DimensionMismatch { expected: j.dim(), got: matrix.dim() });
        }
        if !matrix.is_hermitian(STATE_TOL) {
            return Err(Error::InvalidState("matrix is not Hermitian".into()));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        Ok(DensityMatrix { j, matrix })
    }

    /// Skips validation; for results of trace-preserving maps on valid states.
    pub(crate) fn new_unchecked(j: SpinLength, matrix: ComplexOperator) -> Self {
        DensityMatrix { j, matrix }
    }

    /// `|psi><psi|` for a normalised `psi`.
    pub fn pure(j: SpinLength, psi: &[C64]) -> Result<Self> {
        if psi.len() != j.dim() {
            return Err(Error::DimensionMismatch { expected: j.dim(), got: psi.len() });
        }
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!("state vector has norm^2 {norm}")));
        }
        Ok(DensityMatrix { j, matrix: ComplexOperator::outer(psi, 1.0) })
    }

    pub fn spin(&self) -> SpinLength {
        self.j
    }

    pub fn matrix(&self) -> &ComplexOperator {
        &self.matrix
    }

    pub fn purity(&self) -> f64 {
        self.matrix.matmul(&self.matrix).trace().re
    }

    /// Whether every off-diagonal entry is exactly zero.
    pub fn is_diagonal(&self) -> bool {
        self.matrix.max_offdiagonal() == 0.0
    }

    /// Whether the state is exactly `1/(2j+1)`.
    pub fn is_maximally_mixed(&self) -> bool {
        let target = 1.0 / self.j.dim() as f64;
        self.is_diagonal()
            && self
                .matrix
                .diagonal()
                .iter()
                .all(|z| z.im == 0.0 && (z.re - target).abs() <= f64::EPSILON * target)
    }

    /// `U rho U^dagger`.
    pub fn evolve(&self, u: &ComplexOperator) -> DensityMatrix {
        if self.is_maximally_mixed() {
            return self.clone();
        }
        let m = u.matmul(&self.matrix).matmul(&u.adjoint());
        DensityMatrix::new_unchecked(self.j, m)
    }

    /// `<psi| rho |psi>`.
    pub fn expectation_in(&self, psi: &[C64]) -> f64 {
        let rho_psi = self.matrix.apply(psi);
        psi.iter().zip(&rho_psi).map(|(a, b)| (a.conj() * b).re).sum()
    }

    /// `Tr[rho A]`.
    pub fn expectation(&self, op: &ComplexOperator) -> C64 {
        self.matrix.matmul(op).trace()
    }

    /// Smallest eigenvalue (dense Hermitian eigensolver; intended for small `j`).
    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigen(&self.matrix).0.into_iter().fold(f64::INFINITY, f64::min)
    }
}

/// Eigenvalues and eigenvectors (columns) of a Hermitian operator.
pub(crate) fn hermitian_eigen(op: &ComplexOperator) -> (Vec<f64>, Vec<Vec<C64>>) {
    let n = op.dim();
    let m = DMatrix::from_fn(n, n, |r, c| op[(r, c)]);
    let eig = m.symmetric_eigen();
    let values = eig.eigenvalues.iter().copied().collect();
    let vectors = (0..n).map(|k| eig.eigenvectors.column(k).iter().copied().collect()).collect();
    (values, vectors)
}

/// `1 / (2j+1)`.
pub fn maximally_mixed(j: SpinLength) -> DensityMatrix {
    let p = 1.0 / j.dim() as f64;
    DensityMatrix::new_unchecked(j, ComplexOperator::from_real_diagonal(&vec![p; j.dim()]))
}

/// A spin coherent state by its polar and azimuthal angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherentStateParams {
    pub j: SpinLength,
    pub theta: f64,
    pub phi: f64,
}

impl CoherentStateParams {
    /// `theta` must lie in `[0, pi]`; `phi` is wrapped into `[0, 2 pi)`.
    pub fn new(j: SpinLength, theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() {
            return Err(invalid("coherent-state angles must be finite"));
        }
        if !(-1e-12..=PI + 1e-12).contains(&theta) {
            return Err(invalid(format!("polar angle {theta} outside [0, pi]")));
        }
        Ok(CoherentStateParams {
            j,
            theta: theta.clamp(0.0, PI),
            phi: phi.rem_euclid(2.0 * PI),
        })
    }

    /// Builds the parameters of the direction `v` (need not be normalised).
    pub fn from_direction(j: SpinLength, v: [f64; 3]) -> Result<Self> {
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if !(norm > 0.0) {
            return Err(invalid("direction vector must be non-zero"));
        }
        let theta = (v[2] / norm).clamp(-1.0, 1.0).acos();
        let phi = v[1].atan2(v[0]);
        CoherentStateParams::new(j, theta, phi)
    }

    pub fn direction(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }
}

/// Non-negative real coherent-state amplitudes `|<m|theta, phi>|` restricted
/// to the window of indices where they exceed `1e-18` of the peak.
#[derive(Debug, Clone)]
pub struct CoherentProfile {
    /// First basis index of the window.
    pub start: usize,
    pub values: Vec<f64>,
}

const PROFILE_CUTOFF: f64 = 1e-18;

impl CoherentProfile {
    /// `sqrt(C(2j, j+m)) cos^(j+m)(theta/2) sin^(j-m)(theta/2)`, evaluated
    /// outward from the binomial mode by ratio recurrence.
    pub fn new(j: SpinLength, theta: f64, lf: &LnFactorials) -> Self {
        let two_j = j.two_j() as usize;
        let (s, c) = (0.5 * theta).sin_cos();
        let (s, c) = (s.abs(), c.abs());
        if s == 0.0 {
            return CoherentProfile { start: 0, values: vec![1.0] };
        }
        if c == 0.0 {
            return CoherentProfile { start: two_j, values: vec![1.0] };
        }
        // k = j + m counts "up" quanta; index i = two_j - k.
        let mode = ((two_j as f64) * c * c).round().clamp(0.0, two_j as f64) as usize;
        let ln_peak = 0.5 * lf.ln_binomial(two_j, mode)
            + mode as f64 * c.ln()
            + (two_j - mode) as f64 * s.ln();
        let peak = ln_peak.exp();
        let ratio_down = s / c; // k -> k-1
        let ratio_up = c / s; // k -> k+1

        let mut below = Vec::new(); // k = mode-1, mode-2, ...
        let mut v = peak;
        let mut k = mode;
        while k > 0 {
            v *= ((k as f64) / ((two_j - k + 1) as f64)).sqrt() * ratio_down;
            if v < PROFILE_CUTOFF * peak {
                break;
            }
            below.push(v);
            k -= 1;
        }
        let mut above = Vec::new(); // k = mode+1, ...
        let mut v = peak;
        let mut k = mode;
        while k < two_j {
            v *= (((two_j - k) as f64) / ((k + 1) as f64)).sqrt() * ratio_up;
            if v < PROFILE_CUTOFF * peak {
                break;
            }
            above.push(v);
            k += 1;
        }
        // index order is k descending: above (reversed), peak, below
        let k_max = mode + above.len();
        let mut values = Vec::with_capacity(above.len() + below.len() + 1);
        values.extend(above.iter().rev());
        values.push(peak);
        values.extend(below.iter());
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in &mut values {
            *v /= norm;
        }
        CoherentProfile { start: two_j - k_max, values }
    }

    pub fn end(&self) -> usize {
        self.start + self.values.len()
    }
}

/// Amplitudes `a_m = sqrt(C(2j, j+m)) cos^(j+m)(theta/2) sin^(j-m)(theta/2) e^(-i m phi)`.
pub fn coherent_vector(p: &CoherentStateParams) -> Vec<C64> {
    let lf = LnFactorials::new(p.j.two_j() as usize);
    coherent_vector_with(p, &lf)
}

pub(crate) fn coherent_vector_with(p: &CoherentStateParams, lf: &LnFactorials) -> Vec<C64> {
    let profile = CoherentProfile::new(p.j, p.theta, lf);
    let mut v = vec![C64::new(0.0, 0.0); p.j.dim()];
    for (offset, &b) in profile.values.iter().enumerate() {
        let i = profile.start + offset;
        let m = p.j.m_at(i);
        v[i] = C64::from_polar(b, -m * p.phi);
    }
    v
}

/// Probabilities `p(m) = <m| rho |m>` in basis order.
pub fn outcome_distribution(rho: &DensityMatrix) -> Vec<f64> {
    rho.matrix.diagonal_re()
}

/// Mean and width of the Gaussian approximation to a coherent state's
/// `J_z` distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianApprox {
    pub mu: f64,
    pub sigma: f64,
}

impl GaussianApprox {
    pub fn density(&self, m: f64) -> f64 {
        let z = (m - self.mu) / self.sigma;
        (-0.5 * z * z).exp() / ((2.0 * PI).sqrt() * self.sigma)
    }
}

/// `mu = j cos(theta)`, `sigma = sqrt(j/2) sin(theta)`.
pub fn gaussian_approx(j: SpinLength, theta: f64) -> Result<GaussianApprox> {
    if !(0.0..=PI).contains(&theta) {
        return Err(invalid(format!("polar angle {theta} outside [0, pi]")));
    }
    let jf = j.j();
    Ok(GaussianApprox { mu: jf * theta.cos(), sigma: (jf / 2.0).sqrt() * theta.sin() })
}

/// Rotates a direction about the x axis with the sense of
/// `exp(-i angle J_x)`: `y' = y cos a - z sin a`, `z' = z cos a + y sin a`.
pub fn rotate_direction(v: [f64; 3], angle: f64) -> [f64; 3] {
    let (s, c) = angle.sin_cos();
    [v[0], v[1] * c - v[2] * s, v[2] * c + v[1] * s]
}

/// Angles of the coherent state `exp(-i angle J_x) |theta0, phi0>`.
///
/// `cos(theta) = sin(angle) sin(theta0) sin(phi0) + cos(angle) cos(theta0)`;
/// `phi` is read off the rotated direction vector.
pub fn rotated_coherent_angles(p0: &CoherentStateParams, angle: f64) -> CoherentStateParams {
    let (st, ct) = p0.theta.sin_cos();
    let (sp, cp) = p0.phi.sin_cos();
    let (sa, ca) = angle.sin_cos();
    let cos_theta = (sa * st * sp + ca * ct).clamp(-1.0, 1.0);
    let x = st * cp;
    let y = st * sp * ca - ct * sa;
    let theta = cos_theta.acos();
    let phi = if x == 0.0 && y == 0.0 { p0.phi } else { y.atan2(x) };
    CoherentStateParams { j: p0.j, theta, phi: phi.rem_euclid(2.0 * PI) }
}

/// `g(theta, phi) = (2j+1)/(4 pi) <theta, phi| rho |theta, phi>`.
pub fn husimi_q(rho: &DensityMatrix, theta: f64, phi: f64) -> Result<f64> {
    let p = CoherentStateParams::new(rho.j, theta, phi)?;
    let v = coherent_vector(&p);
    Ok((q_prefactor(rho.j) * rho.expectation_in(&v)).max(0.0))
}

pub(crate) fn q_prefactor(j: SpinLength) -> f64 {
    j.dim() as f64 / (4.0 * PI)
}

/// A discrete positive P-representation: `rho = sum_k w_k |theta_k, phi_k><theta_k, phi_k|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherentMixture {
    components: Vec<(f64, CoherentStateParams)>,
}

impl CoherentMixture {
    /// Weights must be positive and sum to 1 within `1e-12`; all components
    /// must share one spin length.
    pub fn new(components: Vec<(f64, CoherentStateParams)>) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(invalid("coherent mixture must have at least one component"));
        };
        let j = first.1.j;
        if components.iter().any(|(_, p)| p.j != j) {
            return Err(invalid("mixture components have different spin lengths"));
        }
        if components.iter().any(|(w, _)| !(*w > 0.0)) {
            return Err(invalid("mixture weights must be positive"));
        }
        let total: f64 = components.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("mixture weights sum to {total}, not 1")));
        }
        Ok(CoherentMixture { components })
    }

    /// Rescales positive weights to unit sum.
    pub fn normalized(mut components: Vec<(f64, CoherentStateParams)>) -> Result<Self> {
        let total: f64 = components.iter().map(|(w, _)| w).sum();
        if !(total > 0.0) {
            return Err(invalid("mixture weights must have positive sum"));
        }
        for c in &mut components {
            c.0 /= total;
        }
        CoherentMixture::new(components)
    }

    pub fn spin(&self) -> SpinLength {
        self.components[0].1.j
    }

    pub fn components(&self) -> &[(f64, CoherentStateParams)] {
        &self.components
    }

    /// `(2j+1)/(4 pi) sum_k w_k cos^(4j)(Theta_k / 2)` with `Theta_k` the
    /// angle between `(theta, phi)` and component `k`.
    pub fn q_from_kernel(&self, theta: f64, phi: f64) -> f64 {
        let j = self.spin();
        let dir = CoherentStateParams { j, theta, phi }.direction();
        let total: f64 = self
            .components
            .iter()
            .map(|(w, p)| {
                let d = p.direction();
                let cos_big = (dir[0] * d[0] + dir[1] * d[1] + dir[2] * d[2]).clamp(-1.0, 1.0);
                // cos^2(Theta/2) = (1 + cos Theta) / 2
                w * (0.5 * (1.0 + cos_big)).powf(j.two_j() as f64)
            })
            .sum();
        q_prefactor(j) * total
    }
}

/// `sum_k w_k |theta_k, phi_k><theta_k, phi_k|`.
pub fn mixture_to_density(mix: &CoherentMixture) -> DensityMatrix {
    let j = mix.spin();
    let lf = LnFactorials::new(j.two_j() as usize);
    let mut acc = ComplexOperator::zeros(j.dim());
    for (w, p) in mix.components() {
        let v = coherent_vector_with(p, &lf);
        acc = &acc + &ComplexOperator::outer(&v, *w);
    }
    DensityMatrix::new_unchecked(j, acc)
}

/// Evolves a coherent state vector with a cached rotation kernel.
pub fn evolve_coherent(rot: &XRotation, p0: &CoherentStateParams, angle: f64) -> Vec<C64> {
    rot.apply(angle, &coherent_vector(p0))
}

/// Fast Husimi evaluator for repeated evaluation at many points.
///
/// The state is stored either as a diagonal (then `g` does not depend on
/// `phi`) or as weighted vectors `rho = sum_k l_k |v_k><v_k|`. Each evaluation
/// only touches the window of `m` values where the coherent amplitudes are
/// non-negligible.
#[derive(Debug, Clone)]
pub struct QFunction {
    j: SpinLength,
    lf: LnFactorials,
    repr: QRepr,
}

#[derive(Debug, Clone)]
pub(crate) enum QRepr {
    Diagonal(Vec<f64>),
    Factors(Vec<(f64, Vec<C64>)>),
}

impl QFunction {
    /// Diagonal states are stored directly; others are factorised with a
    /// dense Hermitian eigensolver, dropping eigenvalues below `1e-14`.
    pub fn from_density(rho: &DensityMatrix) -> Self {
        let j = rho.j;
        let repr = if rho.is_diagonal() {
            QRepr::Diagonal(outcome_distribution(rho))
        } else {
            let (vals, vecs) = hermitian_eigen(&rho.matrix);
            QRepr::Factors(
                vals.into_iter().zip(vecs).filter(|(l, _)| *l > 1e-14).collect(),
            )
        };
        QFunction::with_repr(j, repr)
    }

    pub fn from_pure(j: SpinLength, psi: Vec<C64>) -> Result<Self> {
        if psi.len() != j.dim() {
            return Err(Error::DimensionMismatch { expected: j.dim(), got: psi.len() });
        }
        Ok(QFunction::with_repr(j, QRepr::Factors(vec![(1.0, psi)])))
    }

    pub fn from_mixture(mix: &CoherentMixture) -> Self {
        let j = mix.spin();
        let lf = LnFactorials::new(j.two_j() as usize);
        let factors = mix
            .components()
            .iter()
            .map(|(w, p)| (*w, coherent_vector_with(p, &lf)))
            .collect();
        QFunction { j, lf, repr: QRepr::Factors(factors) }
    }

    pub(crate) fn with_repr(j: SpinLength, repr: QRepr) -> Self {
        QFunction { j, lf: LnFactorials::new(j.two_j() as usize), repr }
    }

    pub fn spin(&self) -> SpinLength {
        self.j
    }

    pub fn profile(&self, theta: f64) -> CoherentProfile {
        CoherentProfile::new(self.j, theta, &self.lf)
    }

    /// Whether `g` is independent of `phi`.
    pub fn is_axisymmetric(&self) -> bool {
        matches!(self.repr, QRepr::Diagonal(_))
    }

    pub fn eval(&self, theta: f64, phi: f64) -> f64 {
        let profile = self.profile(theta);
        self.eval_with_profile(&profile, phi)
    }

    pub fn eval_with_profile(&self, profile: &CoherentProfile, phi: f64) -> f64 {
        q_prefactor(self.j) * self.overlap_with_profile(profile, phi)
    }

    /// `<theta, phi| rho |theta, phi>`.
    pub(crate) fn overlap_with_profile(&self, profile: &CoherentProfile, phi: f64) -> f64 {
        match &self.repr {
            QRepr::Diagonal(p) => profile
                .values
                .iter()
                .zip(&p[profile.start..profile.end()])
                .map(|(b, p)| b * b * p)
                .sum(),
            QRepr::Factors(factors) => {
                let phases = window_phases(self.j, profile, phi);
                factors
                    .iter()
                    .map(|(w, v)| {
                        let amp: C64 = profile
                            .values
                            .iter()
                            .zip(&phases)
                            .zip(&v[profile.start..profile.end()])
                            .map(|((b, ph), vm)| vm * (ph * *b))
                            .sum();
                        w * amp.norm_sqr()
                    })
                    .sum()
            }
        }
    }
}

impl QFunction {
    /// Outcome probabilities `<m| rho |m>`.
    pub fn diagonal(&self) -> Vec<f64> {
        match &self.repr {
            QRepr::Diagonal(p) => p.clone(),
            QRepr::Factors(factors) => {
                let mut p = vec![0.0; self.j.dim()];
                for (w, v) in factors {
                    for (pm, vm) in p.iter_mut().zip(v) {
                        *pm += w * vm.norm_sqr();
                    }
                }
                p
            }
        }
    }

    /// `integral_0^{2 pi} g(theta, phi) dphi` from the diagonal `p` (the
    /// off-diagonal elements average out).
    pub fn phi_integral(&self, profile: &CoherentProfile, p: &[f64]) -> f64 {
        let s: f64 = profile
            .values
            .iter()
            .zip(&p[profile.start..profile.end()])
            .map(|(b, pm)| b * b * pm)
            .sum();
        2.0 * PI * q_prefactor(self.j) * s
    }

    /// Overlaps `<theta, phi| P_s rho P_s |theta, phi>` for the diagonal
    /// projectors `P_s` of a partition given by `slot_of_index`, written into
    /// `out`; returns the unprojected overlap `<theta, phi| rho |theta, phi>`.
    pub fn slot_overlaps(
        &self,
        profile: &CoherentProfile,
        phi: f64,
        slot_of_index: &[usize],
        out: &mut [f64],
    ) -> f64 {
        out.iter_mut().for_each(|o| *o = 0.0);
        let window = profile.start..profile.end();
        match &self.repr {
            QRepr::Diagonal(p) => {
                let mut total = 0.0;
                for ((b, pm), s) in profile.values.iter().zip(&p[window.clone()]).zip(&slot_of_index[window]) {
                    let x = b * b * pm;
                    out[*s] += x;
                    total += x;
                }
                total
            }
            QRepr::Factors(factors) => {
                let phases = window_phases(self.j, profile, phi);
                let mut total = 0.0;
                let mut amps: Vec<(usize, C64)> = Vec::new();
                for (w, v) in factors {
                    amps.clear();
                    let mut full = C64::new(0.0, 0.0);
                    for (((b, ph), vm), s) in profile
                        .values
                        .iter()
                        .zip(&phases)
                        .zip(&v[window.clone()])
                        .zip(&slot_of_index[window.clone()])
                    {
                        let a = vm * (ph * *b);
                        full += a;
                        match amps.last_mut() {
                            Some((last, acc)) if *last == *s => *acc += a,
                            _ => amps.push((*s, a)),
                        }
                    }
                    for (s, a) in &amps {
                        out[*s] += w * a.norm_sqr();
                    }
                    total += w * full.norm_sqr();
                }
                total
            }
        }
    }
}

/// `e^(i m phi)` for the window's `m` values (conjugate coherent phases).
pub(crate) fn window_phases(j: SpinLength, profile: &CoherentProfile, phi: f64) -> Vec<C64> {
    let m0 = j.m_at(profile.start);
    let mut ph = C64::from_polar(1.0, m0 * phi);
    let step = C64::from_polar(1.0, -phi);
    let mut out = Vec::with_capacity(profile.values.len());
    for _ in 0..profile.values.len() {
        out.push(ph);
        ph *= step;
    }
    out
}
