use super::SpinLength;
use crate::numeric::LnFactorials;
use ndarray::Array2;

const RESCALE: f64 = 1e150;

/// Wigner small-d matrix `d[(i', i)] = <j m'| exp(-i beta J_y) |j m>` with
/// `m' = j - i'`, `m = j - i`.
///
/// Uses the Jacobi-polynomial closed form. The degree recurrence is run with
/// a running power-of-ten exponent and all prefactors are combined in log
/// space, so large `j` neither overflows nor underflows prematurely.
pub fn wigner_small_d(j: SpinLength, beta: f64) -> Array2<f64> {
    let n = j.dim();
    let two_j = j.two_j() as usize;
    let lf = LnFactorials::new(two_j + 1);
    let half = 0.5 * beta;
    let (s, c) = half.sin_cos();
    let x = beta.cos();
    let (ln_s, ln_c) = (s.abs().ln(), c.abs().ln());
    let mut d = Array2::zeros((n, n));
    for ip in 0..n {
        for i in 0..n {
            d[(ip, i)] = element(two_j, ip, i, s, c, ln_s, ln_c, x, &lf);
        }
    }
    d
}

#[allow(clippy::too_many_arguments)]
fn element(
    two_j: usize,
    ip: usize,
    i: usize,
    s: f64,
    c: f64,
    ln_s: f64,
    ln_c: f64,
    x: f64,
    lf: &LnFactorials,
) -> f64 {
    // j+m = two_j - i, j-m = i, j+m' = two_j - ip, j-m' = ip; m' - m = i - ip.
    let jpm = two_j - i;
    let jmm = i;
    let jpmp = two_j - ip;
    let jmmp = ip;
    let k = jpm.min(jmm).min(jpmp).min(jmmp);
    let mp_minus_m = i as i64 - ip as i64;
    let (a, lambda) = if k == jpm {
        (mp_minus_m, mp_minus_m)
    } else if k == jmm || k == jpmp {
        (-mp_minus_m, 0)
    } else {
        (mp_minus_m, mp_minus_m)
    };
    debug_assert!(a >= 0);
    let a = a as usize;
    let b = two_j - 2 * k - a;

    if (a > 0 && s == 0.0) || (b > 0 && c == 0.0) {
        return 0.0;
    }
    let (p, p_log_scale) = jacobi(k, a as f64, b as f64, x);
    if p == 0.0 {
        return 0.0;
    }
    let mut log_mag = 0.5 * (lf.ln_binomial(two_j - k, k + a) - lf.ln_binomial(k + b, b))
        + p.abs().ln()
        + p_log_scale;
    if a > 0 {
        log_mag += a as f64 * ln_s;
    }
    if b > 0 {
        log_mag += b as f64 * ln_c;
    }
    let mut negative = p < 0.0;
    if lambda.rem_euclid(2) == 1 {
        negative = !negative;
    }
    if s < 0.0 && a % 2 == 1 {
        negative = !negative;
    }
    if c < 0.0 && b % 2 == 1 {
        negative = !negative;
    }
    let mag = log_mag.exp();
    if negative {
        -mag
    } else {
        mag
    }
}

/// Jacobi polynomial `P_n^{(a,b)}(x)` as `(value, ln_scale)` with the true
/// value `value * exp(ln_scale)`.
fn jacobi(n: usize, a: f64, b: f64, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p_prev = 1.0;
    let mut p = (a + 1.0) + (a + b + 2.0) * (x - 1.0) / 2.0;
    let mut ln_scale = 0.0;
    for deg in 2..=n {
        let nf = deg as f64;
        let s = 2.0 * nf + a + b;
        let lhs = 2.0 * nf * (nf + a + b) * (s - 2.0);
        let c1 = (s - 1.0) * (s * (s - 2.0) * x + a * a - b * b);
        let c2 = 2.0 * (nf + a - 1.0) * (nf + b - 1.0) * s;
        let next = (c1 * p - c2 * p_prev) / lhs;
        p_prev = p;
        p = next;
        if p.abs() > RESCALE {
            p /= RESCALE;
            p_prev /= RESCALE;
            ln_scale += RESCALE.ln();
        }
    }
    (p, ln_scale)
}
