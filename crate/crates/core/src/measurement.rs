//! Projective and coarse-grained `J_z` measurements.

use crate::error::{invalid, Error, Result};
use crate::sphere::{latitude_rule_with_breaks, SphereGrid};
use crate::spin::{ComplexOperator, Hamiltonian, SpinLength, XRotation};
use crate::states::{outcome_distribution, CoherentMixture, DensityMatrix, QFunction};
use crate::C64;
use log::warn;
use ndarray::Array2;
use serde::{Deserialize, Serialize};

/// Branches with probability below this are dropped instead of renormalised.
pub const ZERO_BRANCH_EPS: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionPolicy {
    /// `delta_m` must divide `2j+1`.
    Strict,
    /// The most negative slot absorbs the remainder.
    Ragged,
}

/// One coarse-grained outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Slot {
    /// Mean of the member `m` values.
    pub label: f64,
    /// Largest member `m`.
    pub m_max: f64,
    /// Smallest member `m`.
    pub m_min: f64,
    /// `(theta1, theta2)` with `theta1 > theta2`; `cos theta = clamp(border / j)`
    /// for the borders `m_min - 1/2` and `m_max + 1/2`.
    pub theta_borders: (f64, f64),
}

impl Slot {
    pub fn size(&self) -> usize {
        (self.m_max - self.m_min).round() as usize + 1
    }

    pub fn contains_m(&self, m: f64) -> bool {
        m >= self.m_min - 1e-9 && m <= self.m_max + 1e-9
    }

    /// `cos` of the lower and upper polar border, `u_lo < u_hi`.
    pub fn u_range(&self) -> (f64, f64) {
        (self.theta_borders.0.cos(), self.theta_borders.1.cos())
    }
}

/// Contiguous partition of the `2j+1` outcomes, slots ordered by ascending label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotPartition {
    j: SpinLength,
    delta_m: usize,
    policy: PartitionPolicy,
    slots: Vec<Slot>,
    slot_of_index: Vec<usize>,
}

/// Builds slots of width `delta_m` from `m = j` downwards.
pub fn make_partition(j: SpinLength, delta_m: usize, policy: PartitionPolicy) -> Result<SlotPartition> {
    let n = j.dim();
    if delta_m == 0 || delta_m > n {
        return Err(invalid(format!("slot width {delta_m} outside 1..={n}")));
    }
    if policy == PartitionPolicy::Strict && !n.is_multiple_of(delta_m) {
        let below = (1..delta_m).rev().find(|d| n.is_multiple_of(*d)).unwrap_or(1);
        let above = (delta_m + 1..=n).find(|d| n.is_multiple_of(*d));
        return Err(Error::NonDivisorSlotWidth { delta_m, outcomes: n, below, above });
    }
    let count = n / delta_m;
    let jf = j.j();
    let mut slots = Vec::with_capacity(count);
    let mut slot_of_index = vec![0; n];
    let mut start = 0;
    for s in 0..count {
        let end = if s + 1 == count { n } else { start + delta_m };
        let m_max = j.m_at(start);
        let m_min = j.m_at(end - 1);
        let u = |b: f64| if jf > 0.0 { (b / jf).clamp(-1.0, 1.0) } else { b.signum() };
        let theta_borders = (u(m_min - 0.5).acos(), u(m_max + 0.5).acos());
        slots.push(Slot { label: 0.5 * (m_max + m_min), m_max, m_min, theta_borders });
        // indices are filled with the top-down position and flipped below
        slot_of_index[start..end].iter_mut().for_each(|x| *x = s);
        start = end;
    }
    slots.reverse();
    slot_of_index.iter_mut().for_each(|s| *s = count - 1 - *s);
    Ok(SlotPartition { j, delta_m, policy, slots, slot_of_index })
}

impl SlotPartition {
    pub fn spin(&self) -> SpinLength {
        self.j
    }

    pub fn delta_m(&self) -> usize {
        self.delta_m
    }

    pub fn policy(&self) -> PartitionPolicy {
        self.policy
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn labels(&self) -> Vec<f64> {
        self.slots.iter().map(|s| s.label).collect()
    }

    /// Slot index of each basis index.
    pub fn slot_of_index(&self) -> &[usize] {
        &self.slot_of_index
    }

    /// `cos` of the interior polar borders, ascending.
    pub fn interior_borders_u(&self) -> Vec<f64> {
        self.slots.iter().skip(1).map(|s| s.u_range().0).collect()
    }

    /// Slot whose band `(u_lo, u_hi]` contains `u = cos(theta)`; values beyond
    /// the poles go to the outermost slots.
    pub fn slot_of_u(&self, u: f64) -> usize {
        self.slots[1..].partition_point(|s| s.u_range().0 < u)
    }

    /// Index of the slot containing outcome `m`.
    pub fn slot_of_m(&self, m: f64) -> Option<usize> {
        self.j.index_of(m).map(|i| self.slot_of_index[i])
    }

    /// Distance from `mu` (in units of `m`) to the nearest interior border
    /// `m_min - 1/2`; infinite for a single slot.
    pub fn border_distance(&self, mu: f64) -> f64 {
        self.slots
            .iter()
            .skip(1)
            .map(|s| (mu - (s.m_min - 0.5)).abs())
            .fold(f64::INFINITY, f64::min)
    }

    fn check_spin(&self, j: SpinLength) -> Result<()> {
        if j != self.j {
            return Err(Error::DimensionMismatch { expected: self.j.dim(), got: j.dim() });
        }
        Ok(())
    }
}

/// `P(m_bar) = sum_{m in slot} p(m)`, in slot order.
pub fn coarse_probabilities(rho: &DensityMatrix, part: &SlotPartition) -> Result<Vec<f64>> {
    part.check_spin(rho.spin())?;
    Ok(coarse_from_distribution(&outcome_distribution(rho), part))
}

pub fn coarse_from_distribution(p: &[f64], part: &SlotPartition) -> Vec<f64> {
    let mut out = vec![0.0; part.len()];
    for (pm, s) in p.iter().zip(part.slot_of_index()) {
        out[*s] += pm;
    }
    out
}

/// Total weight of mixture components whose polar angle lies in each slot's
/// band `[theta2, theta1)`.
pub fn angle_integral_probabilities(mix: &CoherentMixture, part: &SlotPartition) -> Result<Vec<f64>> {
    part.check_spin(mix.spin())?;
    let borders = part.interior_borders_u();
    let mut out = vec![0.0; part.len()];
    for (w, p) in mix.components() {
        let u = p.theta.cos();
        if borders.iter().any(|b| (u - b).abs() < 1e-9) {
            warn!("mixture component at theta={} lies on a slot border", p.theta);
        }
        out[part.slot_of_u(u)] += w;
    }
    Ok(out)
}

/// Two-valued observable, diagonal in the `J_z` basis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DichotomicObservable {
    j: SpinLength,
    values: Vec<i8>,
}

impl DichotomicObservable {
    pub fn new(j: SpinLength, values: Vec<i8>) -> Result<Self> {
        if values.len() != j.dim() {
            return Err(Error::DimensionMismatch { expected: j.dim(), got: values.len() });
        }
        if values.iter().any(|v| *v != 1 && *v != -1) {
            return Err(invalid("dichotomic values must be +1 or -1"));
        }
        Ok(DichotomicObservable { j, values })
    }

    /// `(-1)^(j-m)`.
    pub fn parity(j: SpinLength) -> Self {
        let values = (0..j.dim()).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
        DichotomicObservable { j, values }
    }

    /// `+1` for `m >= 0`, `-1` for `m < 0`.
    pub fn sign_of_m(j: SpinLength) -> Self {
        let values = (0..j.dim()).map(|i| if j.two_m_at(i) >= 0 { 1 } else { -1 }).collect();
        DichotomicObservable { j, values }
    }

    /// Sign of the slot label; a slot labelled exactly 0 counts as `+1`.
    pub fn slot_sign(part: &SlotPartition) -> Self {
        let values = part
            .slot_of_index()
            .iter()
            .map(|s| if part.slots()[*s].label >= 0.0 { 1 } else { -1 })
            .collect();
        DichotomicObservable { j: part.spin(), values }
    }

    pub fn spin(&self) -> SpinLength {
        self.j
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }

    /// Diagonal of the projector onto outcome `sign`.
    pub fn mask(&self, sign: i8) -> Vec<bool> {
        self.values.iter().map(|v| *v == sign).collect()
    }

    /// `P_sign = (1 + sign * Q) / 2`.
    pub fn projector(&self, sign: i8) -> ComplexOperator {
        let d: Vec<f64> = self.mask(sign).iter().map(|b| if *b { 1.0 } else { 0.0 }).collect();
        ComplexOperator::from_real_diagonal(&d)
    }

    pub fn operator(&self) -> ComplexOperator {
        let d: Vec<f64> = self.values.iter().map(|v| *v as f64).collect();
        ComplexOperator::from_real_diagonal(&d)
    }

    /// `<Q>` in a distribution over `m`.
    pub fn mean(&self, p: &[f64]) -> f64 {
        p.iter().zip(&self.values).map(|(p, v)| p * *v as f64).sum()
    }
}

/// `(Tr[P rho P], P rho P / Tr[P rho P])`.
pub fn luders_reduce(rho: &DensityMatrix, projector: &ComplexOperator) -> Result<(f64, DensityMatrix)> {
    luders_reduce_with_eps(rho, projector, ZERO_BRANCH_EPS)
}

pub fn luders_reduce_with_eps(
    rho: &DensityMatrix,
    projector: &ComplexOperator,
    eps: f64,
) -> Result<(f64, DensityMatrix)> {
    let j = rho.spin();
    if projector.dim() != j.dim() {
        return Err(Error::DimensionMismatch { expected: j.dim(), got: projector.dim() });
    }
    if !projector.is_hermitian(1e-10) || projector.matmul(projector).max_abs_diff(projector) > 1e-10 {
        return Err(invalid("projector must be Hermitian and idempotent"));
    }
    if projector.max_offdiagonal() == 0.0 {
        let mask: Vec<bool> = projector.diagonal_re().iter().map(|d| *d > 0.5).collect();
        return luders_reduce_diagonal(rho, &mask, eps);
    }
    let prp = projector.matmul(rho.matrix()).matmul(projector);
    let prob = prp.trace().re;
    if !(prob >= eps) {
        return Err(Error::ZeroProbabilityBranch { prob, eps });
    }
    Ok((prob, DensityMatrix::new_unchecked(j, prp.scale(C64::new(1.0 / prob, 0.0)))))
}

/// Lüders reduction by the diagonal projector with the given support.
pub fn luders_reduce_diagonal(rho: &DensityMatrix, mask: &[bool], eps: f64) -> Result<(f64, DensityMatrix)> {
    let j = rho.spin();
    let src = rho.matrix().as_array();
    let prob: f64 = mask.iter().enumerate().filter(|(_, m)| **m).map(|(i, _)| src[(i, i)].re).sum();
    if !(prob >= eps) {
        return Err(Error::ZeroProbabilityBranch { prob, eps });
    }
    let n = j.dim();
    let scale = 1.0 / prob;
    let out = Array2::from_shape_fn((n, n), |(r, c)| {
        if mask[r] && mask[c] {
            src[(r, c)] * scale
        } else {
            C64::new(0.0, 0.0)
        }
    });
    Ok((prob, DensityMatrix::new_unchecked(j, ComplexOperator::from_array(out))))
}

/// Outcome of measuring a dichotomic observable at `t1` and again at `t2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoTimeResult {
    pub p_plus: f64,
    pub p_minus: f64,
    /// `q_{+|+}`: probability of `+` at `t2` given `+` at `t1`.
    pub q_plus_plus: f64,
    /// `q_{-|+}`.
    pub q_minus_plus: f64,
    /// `q_{+|-}`.
    pub q_plus_minus: f64,
    /// `q_{-|-}`.
    pub q_minus_minus: f64,
    pub c: f64,
}

impl TwoTimeResult {
    pub fn correlation_from_fields(&self) -> f64 {
        self.p_plus * self.q_plus_plus + self.p_minus * self.q_minus_minus
            - self.p_plus * self.q_minus_plus
            - self.p_minus * self.q_plus_minus
    }
}

/// Time evolution by a Hamiltonian with a cached `J_x` eigenbasis.
#[derive(Debug, Clone)]
pub struct Propagator {
    h: Hamiltonian,
    rot: XRotation,
}

impl Propagator {
    pub fn new(h: Hamiltonian) -> Result<Self> {
        Ok(Propagator { h, rot: XRotation::new(h.j)? })
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.h
    }

    pub fn rotation(&self) -> &XRotation {
        &self.rot
    }

    /// `rho(t) = U_t rho U_t^dagger`; the maximally mixed state is returned
    /// unchanged.
    pub fn evolve(&self, rho: &DensityMatrix, t: f64) -> DensityMatrix {
        let angle = self.h.angle(t);
        if angle == 0.0 || rho.is_maximally_mixed() {
            return rho.clone();
        }
        rho.evolve(&self.rot.matrix(angle))
    }
}

/// `diag(U rho U^dagger)` given `U` and `|U|^2`.
fn evolved_distribution(rho: &DensityMatrix, u: &ComplexOperator, abs2: &Array2<f64>) -> Vec<f64> {
    if rho.is_diagonal() {
        let s = rho.matrix().diagonal_re();
        abs2.dot(&ndarray::Array1::from(s)).to_vec()
    } else {
        let ur = u.matmul(rho.matrix());
        let (a, b) = (ur.as_array(), u.as_array());
        (0..u.dim())
            .map(|m| a.row(m).iter().zip(b.row(m)).map(|(x, y)| (x * y.conj()).re).sum())
            .collect()
    }
}

/// Two-time correlation `C = sum_{k,l} k l p_k q_{l|k}` with ideal
/// measurements at `t1` and `t2`.
pub fn two_time_correlation(
    rho0: &DensityMatrix,
    obs: &DichotomicObservable,
    h: &Hamiltonian,
    t1: f64,
    t2: f64,
) -> Result<TwoTimeResult> {
    two_time_correlation_with(&Propagator::new(*h)?, rho0, obs, t1, t2)
}

pub fn two_time_correlation_with(
    prop: &Propagator,
    rho0: &DensityMatrix,
    obs: &DichotomicObservable,
    t1: f64,
    t2: f64,
) -> Result<TwoTimeResult> {
    let j = rho0.spin();
    if obs.spin() != j || prop.h.j != j {
        return Err(Error::DimensionMismatch { expected: j.dim(), got: obs.spin().dim() });
    }
    if !(t1.is_finite() && t2.is_finite()) || t1 > t2 {
        return Err(invalid(format!("measurement times must satisfy t1 <= t2 (got {t1}, {t2})")));
    }
    let rho1 = prop.evolve(rho0, t1);
    let angle = prop.h.angle(t2 - t1);
    let mut evolution: Option<(ComplexOperator, Array2<f64>)> = None;

    let mut probs = [0.0; 2];
    let mut conditionals = [[0.0; 2]; 2];
    for (bi, sign) in [1i8, -1].into_iter().enumerate() {
        let (p, branch) = match luders_reduce_diagonal(&rho1, &obs.mask(sign), ZERO_BRANCH_EPS) {
            Ok(r) => r,
            Err(Error::ZeroProbabilityBranch { .. }) => continue,
            Err(e) => return Err(e),
        };
        probs[bi] = p;
        let dist = if angle == 0.0 {
            outcome_distribution(&branch)
        } else {
            let (u, abs2) = evolution.get_or_insert_with(|| {
                let u = prop.rot.matrix(angle);
                let abs2 = u.as_array().mapv(|z| z.norm_sqr());
                (u, abs2)
            });
            evolved_distribution(&branch, u, abs2)
        };
        let q_plus: f64 = dist.iter().zip(obs.values()).filter(|(_, v)| **v == 1).map(|(p, _)| p).sum();
        let q_plus = q_plus.clamp(0.0, 1.0);
        conditionals[bi] = [q_plus, 1.0 - q_plus];
    }
    let mut result = TwoTimeResult {
        p_plus: probs[0],
        p_minus: probs[1],
        q_plus_plus: conditionals[0][0],
        q_minus_plus: conditionals[0][1],
        q_plus_minus: conditionals[1][0],
        q_minus_minus: conditionals[1][1],
        c: 0.0,
    };
    result.c = result.correlation_from_fields();
    Ok(result)
}

/// Per-slot disturbance and its probability-weighted average.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Disturbance {
    /// `None` for slots with negligible probability.
    pub per_slot: Vec<Option<f64>>,
    pub average: f64,
}

/// `D(m_bar) = 1/2 integral |g_mbar - g chi_mbar / w_mbar| d^2 Omega`: the
/// distance between the Q-function after a slot measurement and the
/// band-restricted, renormalised Q-function before it.
pub fn disturbance_metric(rho: &DensityMatrix, part: &SlotPartition) -> Result<Disturbance> {
    part.check_spin(rho.spin())?;
    disturbance_metric_q(&QFunction::from_density(rho), part)
}

pub fn disturbance_metric_q(q: &QFunction, part: &SlotPartition) -> Result<Disturbance> {
    part.check_spin(q.spin())?;
    let j = q.spin();
    let ns = part.len();
    let p = q.diagonal();
    let probs = coarse_from_distribution(&p, part);
    let band_mass = band_masses(q, &p, part);
    let grid = if q.is_axisymmetric() {
        let mut g = SphereGrid::with_breaks(j, &part.interior_borders_u());
        g.n_phi = 1;
        g
    } else {
        SphereGrid::with_breaks(j, &part.interior_borders_u())
    };
    let pref = j.dim() as f64 / (4.0 * std::f64::consts::PI);
    let dphi = grid.phi_weight();
    let mut acc = vec![0.0; ns];
    let mut ov = vec![0.0; ns];
    for (u, w) in grid.u.iter().zip(&grid.u_weights) {
        let theta = u.clamp(-1.0, 1.0).acos();
        let profile = q.profile(theta);
        let band = part.slot_of_u(*u);
        for phi in grid.phis() {
            let total = q.slot_overlaps(&profile, phi, part.slot_of_index(), &mut ov);
            for s in 0..ns {
                if probs[s] <= ZERO_BRANCH_EPS {
                    continue;
                }
                let after = pref * ov[s] / probs[s];
                let before = if s == band { pref * total / band_mass[s] } else { 0.0 };
                acc[s] += w * dphi * (after - before).abs();
            }
        }
    }
    let per_slot: Vec<Option<f64>> = (0..ns)
        .map(|s| (probs[s] > ZERO_BRANCH_EPS).then(|| 0.5 * acc[s]))
        .collect();
    let average = per_slot.iter().zip(&probs).filter_map(|(d, p)| d.map(|d| d * p)).sum();
    Ok(Disturbance { per_slot, average })
}

/// `integral_{band} g d^2 Omega` for every slot band.
pub(crate) fn band_masses(q: &QFunction, p: &[f64], part: &SlotPartition) -> Vec<f64> {
    let j = q.spin();
    let mut out = vec![0.0; part.len()];
    for (s, slot) in part.slots().iter().enumerate() {
        let (lo, hi) = slot.u_range();
        let (nodes, weights) = latitude_rule_with_breaks(j, &[lo, hi]);
        out[s] = nodes
            .iter()
            .zip(&weights)
            .map(|(u, w)| w * q.phi_integral(&q.profile(u.clamp(-1.0, 1.0).acos()), p))
            .sum();
    }
    out
}

/// Piecewise-constant band average of the Q-function: for each slot, its
/// g-mass divided by the band's solid angle.
pub fn band_averaged_q(rho: &DensityMatrix, part: &SlotPartition) -> Result<Vec<f64>> {
    part.check_spin(rho.spin())?;
    let q = QFunction::from_density(rho);
    let masses = band_masses(&q, &q.diagonal(), part);
    Ok(part
        .slots()
        .iter()
        .zip(masses)
        .map(|(slot, mass)| {
            let (lo, hi) = slot.u_range();
            let area = 2.0 * std::f64::consts::PI * (hi - lo);
            if area > 0.0 {
                mass / area
            } else {
                0.0
            }
        })
        .collect())
}
