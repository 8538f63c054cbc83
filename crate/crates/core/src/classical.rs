//! Classical rotating spins, Q-function ensembles and coarse-grained
//! classical predictions.

use crate::error::{invalid, Error, Result};
use crate::measurement::{band_masses, coarse_from_distribution, make_partition, PartitionPolicy, SlotPartition};
use crate::numeric::{golden_section_max, LnFactorials};
use crate::spin::{Hamiltonian, SpinLength, XRotation};
use crate::states::{
    coherent_vector, gaussian_approx, rotate_direction, CoherentProfile, CoherentStateParams, DensityMatrix,
    QFunction,
};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// A classical angular momentum vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalSpin {
    direction: [f64; 3],
    magnitude: f64,
}

impl ClassicalSpin {
    /// Normalises `direction`; `magnitude` must be positive.
    pub fn new(direction: [f64; 3], magnitude: f64) -> Result<Self> {
        let norm = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(invalid("classical spin direction must be a non-zero finite vector"));
        }
        if !(magnitude > 0.0 && magnitude.is_finite()) {
            return Err(invalid("classical spin magnitude must be positive"));
        }
        Ok(ClassicalSpin { direction: direction.map(|x| x / norm), magnitude })
    }

    /// Spin of length `sqrt(j(j+1))` pointing at `(theta, phi)`.
    pub fn from_angles(j: SpinLength, theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        ClassicalSpin { direction: [st * cp, st * sp, ct], magnitude: j.casimir_length().max(f64::MIN_POSITIVE) }
    }

    pub fn direction(&self) -> [f64; 3] {
        self.direction
    }

    pub fn magnitude(&self) -> f64 {
        self.magnitude
    }

    pub fn vector(&self) -> [f64; 3] {
        self.direction.map(|x| x * self.magnitude)
    }

    pub fn cos_theta(&self) -> f64 {
        self.direction[2].clamp(-1.0, 1.0)
    }

    pub fn theta(&self) -> f64 {
        self.cos_theta().acos()
    }

    pub fn phi(&self) -> f64 {
        self.direction[1].atan2(self.direction[0]).rem_euclid(2.0 * PI)
    }
}

/// Rotation generated by `H = J^2/2I + omega J_x` over `omega t = angle`.
pub fn evolve_classical(spin: &ClassicalSpin, angle: f64) -> ClassicalSpin {
    ClassicalSpin { direction: rotate_direction(spin.direction, angle), magnitude: spin.magnitude }
}

/// `dJ/dt = {J, H}` for `H = J^2/2I + omega J_x`.
pub fn poisson_velocity(vector: [f64; 3], omega: f64) -> [f64; 3] {
    // {J_i, J_j} = eps_ijk J_k and J^2 is a Casimir
    [0.0, -omega * vector[2], omega * vector[1]]
}

/// Which length multiplies `cos(theta)` when a spin is binned into slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZConvention {
    /// `j cos(theta)`.
    #[default]
    SpinLength,
    /// `sqrt(j(j+1)) cos(theta)`.
    Magnitude,
}

/// Monte Carlo ensemble of classical spins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalEnsemble {
    pub j: SpinLength,
    pub spins: Vec<ClassicalSpin>,
    pub seed: u64,
    pub source: String,
}

impl ClassicalEnsemble {
    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    pub fn evolve(&self, angle: f64) -> ClassicalEnsemble {
        ClassicalEnsemble {
            j: self.j,
            spins: self.spins.iter().map(|s| evolve_classical(s, angle)).collect(),
            seed: self.seed,
            source: format!("{} rotated by {angle}", self.source),
        }
    }

    /// Sample mean of the unit directions.
    pub fn mean_direction(&self) -> [f64; 3] {
        let n = self.spins.len() as f64;
        let mut m = [0.0; 3];
        for s in &self.spins {
            for (a, b) in m.iter_mut().zip(s.direction) {
                *a += b / n;
            }
        }
        m
    }
}

/// Proposal distribution of the rejection sampler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Proposal {
    /// Piecewise-constant envelope over cells of width about `1/(2 sqrt j)`.
    #[default]
    Cells,
    /// Uniform on the sphere with a single global bound.
    Uniform,
}

/// Diagnostics of one sampler run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerStats {
    pub proposals: u64,
    pub accepted: u64,
    /// Proposals where `g` exceeded the envelope.
    pub envelope_violations: u64,
}

impl SamplerStats {
    pub fn acceptance_rate(&self) -> f64 {
        self.accepted as f64 / self.proposals.max(1) as f64
    }
}

pub const MIN_ACCEPTANCE: f64 = 1e-4;
const ENVELOPE_SAFETY: f64 = 1.2;
const CHUNK: usize = 4096;

/// Piecewise-constant bound on `g` over a `theta x phi` cell grid.
struct Envelope {
    theta_edges: Vec<f64>,
    n_phi: usize,
    bound: Vec<f64>,
    pick: WeightedIndex<f64>,
}

impl Envelope {
    fn cells(q: &QFunction) -> Result<Self> {
        let j = q.spin();
        let h = 0.5 / j.j().max(0.25).sqrt();
        let n_theta = ((PI / h).ceil() as usize).max(4);
        let n_phi = if q.is_axisymmetric() { 1 } else { ((2.0 * PI / h).ceil() as usize).max(4) };
        let theta_edges: Vec<f64> = (0..=n_theta).map(|i| PI * i as f64 / n_theta as f64).collect();
        let dphi = 2.0 * PI / n_phi as f64;
        // g at lattice points: rows are theta edges, columns phi edges (periodic)
        let lattice: Vec<Vec<f64>> = theta_edges
            .par_iter()
            .map(|&t| {
                let profile = q.profile(t);
                if n_phi == 1 {
                    vec![q.eval_with_profile(&profile, 0.0)]
                } else {
                    (0..n_phi).map(|k| q.eval_with_profile(&profile, k as f64 * dphi)).collect()
                }
            })
            .collect();
        let corner_max = |it: usize, ip: usize| -> f64 {
            let ip1 = (ip + 1) % n_phi;
            lattice[it][ip].max(lattice[it][ip1]).max(lattice[it + 1][ip]).max(lattice[it + 1][ip1])
        };
        let raw: Vec<f64> =
            (0..n_theta).flat_map(|it| (0..n_phi).map(move |ip| (it, ip))).map(|(it, ip)| corner_max(it, ip)).collect();
        let mut bound = vec![0.0; raw.len()];
        for it in 0..n_theta {
            for ip in 0..n_phi {
                let mut m = 0.0f64;
                for dt in [-1i64, 0, 1] {
                    let t = it as i64 + dt;
                    if t < 0 || t >= n_theta as i64 {
                        continue;
                    }
                    for dp in [-1i64, 0, 1] {
                        let p = (ip as i64 + dp).rem_euclid(n_phi as i64) as usize;
                        m = m.max(raw[t as usize * n_phi + p]);
                    }
                }
                bound[it * n_phi + ip] = ENVELOPE_SAFETY * m;
            }
        }
        Envelope::finish(theta_edges, n_phi, bound)
    }

    fn uniform(q: &QFunction) -> Result<Self> {
        let j = q.spin();
        let h = 0.5 / j.j().max(0.25).sqrt();
        let n_theta = ((PI / h).ceil() as usize).max(4);
        let n_phi = if q.is_axisymmetric() { 1 } else { ((2.0 * PI / h).ceil() as usize).max(4) };
        let dphi = 2.0 * PI / n_phi as f64;
        let mut best = (0.0, 0.0, f64::NEG_INFINITY);
        for it in 0..=n_theta {
            let t = PI * it as f64 / n_theta as f64;
            let profile = q.profile(t);
            for k in 0..n_phi {
                let g = q.eval_with_profile(&profile, k as f64 * dphi);
                if g > best.2 {
                    best = (t, k as f64 * dphi, g);
                }
            }
        }
        // local refinement along each coordinate around the best lattice point
        let (t0, p0, _) = best;
        let (t1, _) = golden_section_max(|t| q.eval(t, p0), (t0 - h).max(0.0), (t0 + h).min(PI), 1e-10);
        let (p1, g1) = golden_section_max(|p| q.eval(t1, p), p0 - dphi, p0 + dphi, 1e-10);
        let (_, g2) = golden_section_max(|t| q.eval(t, p1), (t1 - h).max(0.0), (t1 + h).min(PI), 1e-10);
        let gmax = best.2.max(g1).max(g2);
        Envelope::finish(vec![0.0, PI], 1, vec![ENVELOPE_SAFETY * gmax])
    }

    fn finish(theta_edges: Vec<f64>, n_phi: usize, bound: Vec<f64>) -> Result<Self> {
        let dphi = 2.0 * PI / n_phi as f64;
        let weights: Vec<f64> = bound
            .iter()
            .enumerate()
            .map(|(c, b)| {
                let it = c / n_phi;
                b * dphi * (theta_edges[it].cos() - theta_edges[it + 1].cos())
            })
            .collect();
        let pick = WeightedIndex::new(&weights).map_err(|e| Error::Numerical(format!("envelope: {e}")))?;
        Ok(Envelope { theta_edges, n_phi, bound, pick })
    }

    /// Draws a proposal point and the envelope value there.
    fn propose<R: Rng>(&self, rng: &mut R) -> (f64, f64, f64) {
        let c = self.pick.sample(rng);
        let (it, ip) = (c / self.n_phi, c % self.n_phi);
        let (ua, ub) = (self.theta_edges[it + 1].cos(), self.theta_edges[it].cos());
        let u: f64 = ua + (ub - ua) * rng.random::<f64>();
        let dphi = 2.0 * PI / self.n_phi as f64;
        let phi = (ip as f64 + rng.random::<f64>()) * dphi;
        (u.clamp(-1.0, 1.0).acos(), phi, self.bound[c])
    }
}

/// Rejection sampling of `n` directions from the Q-function of `rho`.
pub fn sample_from_q(rho: &DensityMatrix, n: usize, seed: u64) -> Result<ClassicalEnsemble> {
    Ok(sample_q_function(&QFunction::from_density(rho), n, seed, Proposal::Cells)?.0)
}

/// As [`sample_from_q`] for a prepared Q-function evaluator.
///
/// Samples are drawn in chunks of 4096, chunk `c` using ChaCha8 stream `c`
/// of `seed`, so results do not depend on the thread count.
pub fn sample_q_function(
    q: &QFunction,
    n: usize,
    seed: u64,
    proposal: Proposal,
) -> Result<(ClassicalEnsemble, SamplerStats)> {
    if n == 0 {
        return Err(invalid("sample count must be at least 1"));
    }
    let j = q.spin();
    let env = match proposal {
        Proposal::Cells => Envelope::cells(q)?,
        Proposal::Uniform => Envelope::uniform(q)?,
    };
    let chunks = n.div_ceil(CHUNK);
    let results: Vec<Result<(Vec<ClassicalSpin>, SamplerStats)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let quota = CHUNK.min(n - c * CHUNK);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let mut spins = Vec::with_capacity(quota);
            let mut stats = SamplerStats { proposals: 0, accepted: 0, envelope_violations: 0 };
            let budget = (quota as f64 / MIN_ACCEPTANCE).ceil() as u64;
            while spins.len() < quota {
                if stats.proposals >= budget {
                    return Err(Error::LowAcceptance { rate: stats.acceptance_rate() });
                }
                let (theta, phi, bound) = env.propose(&mut rng);
                stats.proposals += 1;
                let g = q.eval(theta, phi);
                if g > bound {
                    stats.envelope_violations += 1;
                }
                if rng.random::<f64>() * bound < g {
                    stats.accepted += 1;
                    spins.push(ClassicalSpin::from_angles(j, theta, phi));
                }
            }
            Ok((spins, stats))
        })
        .collect();
    let mut spins = Vec::with_capacity(n);
    let mut stats = SamplerStats { proposals: 0, accepted: 0, envelope_violations: 0 };
    for r in results {
        let (s, st) = r?;
        spins.extend(s);
        stats.proposals += st.proposals;
        stats.accepted += st.accepted;
        stats.envelope_violations += st.envelope_violations;
    }
    if stats.acceptance_rate() < MIN_ACCEPTANCE {
        return Err(Error::LowAcceptance { rate: stats.acceptance_rate() });
    }
    if stats.envelope_violations > 0 {
        log::warn!("Q-function exceeded the sampling envelope {} times", stats.envelope_violations);
    }
    let ens = ClassicalEnsemble { j, spins, seed, source: "husimi_q".into() };
    Ok((ens, stats))
}

/// Probabilities over the slots of one partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotHistogram {
    pub two_j: u32,
    pub labels: Vec<f64>,
    pub probabilities: Vec<f64>,
}

impl SlotHistogram {
    /// Checks non-negativity and unit sum to `1e-9`.
    pub fn new(part: &SlotPartition, probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.len() != part.len() {
            return Err(Error::DimensionMismatch { expected: part.len(), got: probabilities.len() });
        }
        let total: f64 = probabilities.iter().sum();
        if probabilities.iter().any(|p| *p < -1e-12) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::Numerical(format!("slot histogram sums to {total}")));
        }
        Ok(SlotHistogram { two_j: part.spin().two_j(), labels: part.labels(), probabilities })
    }

    pub fn one_hot(part: &SlotPartition, slot: usize) -> Self {
        let mut p = vec![0.0; part.len()];
        p[slot] = 1.0;
        SlotHistogram { two_j: part.spin().two_j(), labels: part.labels(), probabilities: p }
    }

    pub fn modal_mass(&self) -> f64 {
        self.probabilities.iter().copied().fold(0.0, f64::max)
    }
}

/// Bins each spin's `z` component (see [`ZConvention`]) into slot bands.
pub fn ensemble_slot_histogram(
    ens: &ClassicalEnsemble,
    part: &SlotPartition,
    convention: ZConvention,
) -> Result<SlotHistogram> {
    if ens.j != part.spin() {
        return Err(Error::DimensionMismatch { expected: part.spin().dim(), got: ens.j.dim() });
    }
    if ens.is_empty() {
        return Err(invalid("ensemble is empty"));
    }
    let jf = ens.j.j();
    let mut counts = vec![0usize; part.len()];
    for s in &ens.spins {
        let z = match convention {
            ZConvention::SpinLength => jf * s.cos_theta(),
            ZConvention::Magnitude => s.magnitude * s.cos_theta(),
        };
        let u = if jf > 0.0 { z / jf } else { s.cos_theta() };
        counts[part.slot_of_u(u)] += 1;
    }
    let n = ens.len() as f64;
    SlotHistogram::new(part, counts.into_iter().map(|c| c as f64 / n).collect())
}

/// Quadrature of the Q-function over each slot's latitude band.
pub fn quadrature_slot_histogram(rho: &DensityMatrix, part: &SlotPartition) -> Result<SlotHistogram> {
    if rho.spin() != part.spin() {
        return Err(Error::DimensionMismatch { expected: part.spin().dim(), got: rho.spin().dim() });
    }
    quadrature_histogram_q(&QFunction::from_density(rho), part)
}

pub fn quadrature_histogram_q(q: &QFunction, part: &SlotPartition) -> Result<SlotHistogram> {
    SlotHistogram::new(part, band_masses(q, &q.diagonal(), part))
}

/// `1/2 sum |p - q|`.
pub fn total_variation(p: &SlotHistogram, q: &SlotHistogram) -> Result<f64> {
    if p.two_j != q.two_j || p.labels != q.labels {
        return Err(Error::PartitionMismatch);
    }
    Ok(0.5 * p.probabilities.iter().zip(&q.probabilities).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Quantum coarse prediction vs a single classical spin at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapPoint {
    pub t: f64,
    pub tvd: f64,
    /// Classical `j cos(theta(t))`.
    pub mu: f64,
    /// `sqrt(j/2) sin(theta(t))`.
    pub sigma: f64,
    /// Distance of `mu` to the nearest interior slot border, in units of
    /// `sigma` (infinite when `sigma = 0` or there is one slot).
    pub border_distance_sigma: f64,
}

/// For each time: TVD between the coarse quantum distribution of the evolved
/// coherent state and the one-hot histogram of the evolved classical spin.
pub fn quantum_classical_gap(
    p0: &CoherentStateParams,
    h: &Hamiltonian,
    times: &[f64],
    part: &SlotPartition,
) -> Result<Vec<GapPoint>> {
    if p0.j != h.j || part.spin() != h.j {
        return Err(Error::DimensionMismatch { expected: h.j.dim(), got: part.spin().dim() });
    }
    let rot = XRotation::new(h.j)?;
    let psi0 = coherent_vector(p0);
    let spin0 = ClassicalSpin::from_angles(h.j, p0.theta, p0.phi);
    times
        .iter()
        .map(|&t| {
            let angle = h.angle(t);
            let psi = rot.apply(angle, &psi0);
            let p: Vec<f64> = psi.iter().map(|z| z.norm_sqr()).collect();
            let quantum = SlotHistogram::new(part, coarse_from_distribution(&p, part))?;
            let spin = evolve_classical(&spin0, angle);
            gap_point(t, &quantum, &spin, part)
        })
        .collect()
}

pub(crate) fn gap_point(t: f64, quantum: &SlotHistogram, spin: &ClassicalSpin, part: &SlotPartition) -> Result<GapPoint> {
    let j = part.spin();
    let classical = SlotHistogram::one_hot(part, part.slot_of_u(spin.cos_theta()));
    let mu = j.j() * spin.cos_theta();
    let sigma = gaussian_approx(j, spin.theta())?.sigma;
    let d = part.border_distance(mu);
    let border_distance_sigma = if sigma > 0.0 { d / sigma } else { f64::INFINITY };
    Ok(GapPoint { t, tvd: total_variation(quantum, &classical)?, mu, sigma, border_distance_sigma })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendPoint {
    pub two_j: u32,
    pub delta_m: usize,
    pub modal_mass: f64,
    pub slot_count: usize,
}

/// Coarse-grained distribution of a coherent state as `j` grows with
/// `delta_m = round(base * j^alpha)` (ragged slots).
///
/// The state sits at the centre of the slot containing `m = 0`, so the
/// comparison across `j` is not biased by border placement.
pub fn delta_limit_trend(j_list: &[SpinLength], alpha: f64, base: f64) -> Result<Vec<TrendPoint>> {
    if !(alpha > 0.0 && alpha <= 1.0) || !(base > 0.0) {
        return Err(invalid(format!("need alpha in (0, 1] and base > 0, got {alpha}, {base}")));
    }
    j_list
        .iter()
        .map(|&j| {
            let delta_m = (base * j.j().powf(alpha)).round();
            if delta_m < 1.0 {
                return Err(invalid(format!("slot width rounds to {delta_m} at j = {j}")));
            }
            let delta_m = (delta_m as usize).min(j.dim());
            let part = make_partition(j, delta_m, PartitionPolicy::Ragged)?;
            let centre = part.slot_of_m(if j.is_integer() { 0.0 } else { 0.5 }).expect("m is in range");
            let label = part.slots()[centre].label;
            let theta = if j.j() > 0.0 { (label / j.j()).clamp(-1.0, 1.0).acos() } else { 0.0 };
            let profile = CoherentProfile::new(j, theta, &LnFactorials::new(j.two_j() as usize));
            let mut p = vec![0.0; j.dim()];
            for (k, b) in profile.values.iter().enumerate() {
                p[profile.start + k] = b * b;
            }
            let coarse = coarse_from_distribution(&p, &part);
            let modal_mass = coarse.iter().copied().fold(0.0, f64::max);
            Ok(TrendPoint { two_j: j.two_j(), delta_m, modal_mass, slot_count: part.len() })
        })
        .collect()
}
