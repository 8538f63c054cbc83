//! Quadrature on the unit sphere tuned to Q-functions of a spin-j.
//!
//! Latitude: composite Gauss–Legendre in `u = cos(theta)` with panel widths
//! that follow the local width of coherent-state overlaps (`sin(theta)/sqrt(j)`
//! away from the poles, `1/j` near them). Longitude: periodic trapezoid.

use crate::numeric::gauss_legendre;
use crate::spin::SpinLength;
use std::f64::consts::PI;

const PANEL_ORDER: usize = 8;

/// Nodes and weights in `u` for `integral_{u_lo}^{u_hi} f(u) du`.
pub fn latitude_rule(j: SpinLength, u_lo: f64, u_hi: f64) -> (Vec<f64>, Vec<f64>) {
    latitude_rule_with_breaks(j, &[u_lo, u_hi])
}

/// As [`latitude_rule`] over `[breaks[0], breaks[last]]`, with panel edges
/// placed at every break (integrands may be discontinuous there).
pub fn latitude_rule_with_breaks(j: SpinLength, breaks: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let (gx, gw) = gauss_legendre(PANEL_ORDER);
    let jf = j.j().max(0.5);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for seg in breaks.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        if !(b > a) {
            continue;
        }
        let mut lo = a;
        while lo < b {
            let mid = lo.clamp(-1.0, 1.0);
            let h = (1.0 - mid * mid).max(0.0).sqrt() / jf.sqrt() + 1.0 / jf;
            let hi = if lo + h >= b - 0.25 * h { b } else { lo + h };
            let half = 0.5 * (hi - lo);
            let centre = 0.5 * (hi + lo);
            for (x, w) in gx.iter().zip(&gw) {
                nodes.push(centre + half * x);
                weights.push(half * w);
            }
            lo = hi;
        }
    }
    (nodes, weights)
}

/// Number of equispaced longitudes resolving a spin-j Q-function.
pub fn longitude_count(j: SpinLength) -> usize {
    let n = (12.0 * (2.0 * j.j()).sqrt()).ceil() as usize + 16;
    n.max(32)
}

/// Product grid on the whole sphere.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    pub u: Vec<f64>,
    pub u_weights: Vec<f64>,
    pub n_phi: usize,
}

impl SphereGrid {
    pub fn new(j: SpinLength) -> Self {
        SphereGrid::with_breaks(j, &[])
    }

    /// Latitude panels also break at each `u` in `interior` (ascending order
    /// not required).
    pub fn with_breaks(j: SpinLength, interior: &[f64]) -> Self {
        let mut breaks: Vec<f64> = interior.iter().copied().filter(|u| u.abs() < 1.0).collect();
        breaks.push(-1.0);
        breaks.push(1.0);
        breaks.sort_by(|a, b| a.total_cmp(b));
        breaks.dedup();
        let (u, u_weights) = latitude_rule_with_breaks(j, &breaks);
        SphereGrid { u, u_weights, n_phi: longitude_count(j) }
    }

    pub fn phis(&self) -> impl Iterator<Item = f64> + '_ {
        let step = 2.0 * PI / self.n_phi as f64;
        (0..self.n_phi).map(move |k| k as f64 * step)
    }

    pub fn phi_weight(&self) -> f64 {
        2.0 * PI / self.n_phi as f64
    }

    pub fn len(&self) -> usize {
        self.u.len() * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `integral f(theta, phi) d^2 Omega`.
    pub fn integrate<F: FnMut(f64, f64) -> f64>(&self, mut f: F) -> f64 {
        let dphi = self.phi_weight();
        let mut total = 0.0;
        for (u, w) in self.u.iter().zip(&self.u_weights) {
            let theta = u.clamp(-1.0, 1.0).acos();
            let row: f64 = self.phis().map(|phi| f(theta, phi)).sum();
            total += w * dphi * row;
        }
        total
    }
}

/// `integral f d^2 Omega` on the default grid for spin `j`.
pub fn integrate_sphere<F: FnMut(f64, f64) -> f64>(j: SpinLength, f: F) -> f64 {
    SphereGrid::new(j).integrate(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn latitude_rule_integrates_polynomials() {
        let (x, w) = latitude_rule(SpinLength::from_two_j(40), -0.3, 0.9);
        let exact = (0.9f64.powi(8) - 0.3f64.powi(8)) / 8.0;
        let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(7)).sum();
        assert!((got - exact).abs() < 1e-14);
    }

    #[test]
    fn sphere_area_and_moments() {
        let j = SpinLength::from_two_j(30);
        assert!((integrate_sphere(j, |_, _| 1.0) - 4.0 * PI).abs() < 1e-12);
        let zz = integrate_sphere(j, |t, _| t.cos().powi(2));
        assert!((zz - 4.0 * PI / 3.0).abs() < 1e-12);
        let xx = integrate_sphere(j, |t, p| (t.sin() * p.cos()).powi(2));
        assert!((xx - 4.0 * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn breaks_become_panel_edges() {
        let j = SpinLength::from_two_j(50);
        let grid = SphereGrid::with_breaks(j, &[0.2]);
        let step = grid.integrate(|t, _| if t.cos() > 0.2 { 1.0 } else { 0.0 });
        assert!((step - 2.0 * PI * 0.8).abs() < 1e-12);
    }
}
