use crate::error::{Error, Result};
use ndarray::Array2;

/// Eigen-decomposition of a real symmetric tridiagonal matrix.
#[derive(Debug, Clone)]
pub struct TridiagEigen {
    /// Eigenvalues, ascending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: Array2<f64>,
}

const MAX_SWEEPS: usize = 60;

/// Implicit QL with Wilkinson-type shifts on the tridiagonal matrix with
/// diagonal `diag` and sub/super-diagonal `offdiag` (`offdiag[i]` couples
/// rows `i` and `i + 1`).
pub fn symmetric_tridiagonal_eigen(diag: &[f64], offdiag: &[f64]) -> Result<TridiagEigen> {
    let n = diag.len();
    if n == 0 {
        return Ok(TridiagEigen { values: vec![], vectors: Array2::zeros((0, 0)) });
    }
    assert_eq!(offdiag.len(), n - 1, "off-diagonal must have n-1 entries");
    let mut d = diag.to_vec();
    let mut e = offdiag.to_vec();
    e.push(0.0);
    // column-major: column k occupies z[k*n..(k+1)*n]
    let mut z = vec![0.0; n * n];
    for k in 0..n {
        z[k * n + k] = 1.0;
    }

    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(Error::NoConvergence);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let (left, right) = z.split_at_mut((i + 1) * n);
                let col_i = &mut left[i * n..];
                let col_next = &mut right[..n];
                for (zi, zn) in col_i.iter_mut().zip(col_next.iter_mut()) {
                    let f = *zn;
                    *zn = s * *zi + c * f;
                    *zi = c * *zi - s * f;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&k| d[k]).collect();
    let mut vectors = Array2::zeros((n, n));
    for (col, &k) in order.iter().enumerate() {
        for row in 0..n {
            vectors[(row, col)] = z[k * n + row];
        }
    }
    Ok(TridiagEigen { values, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(diag: &[f64], off: &[f64], eig: &TridiagEigen) -> f64 {
        let n = diag.len();
        let mut worst: f64 = 0.0;
        for k in 0..n {
            for i in 0..n {
                let mut av = diag[i] * eig.vectors[(i, k)];
                if i > 0 {
                    av += off[i - 1] * eig.vectors[(i - 1, k)];
                }
                if i + 1 < n {
                    av += off[i] * eig.vectors[(i + 1, k)];
                }
                worst = worst.max((av - eig.values[k] * eig.vectors[(i, k)]).abs());
            }
        }
        worst
    }

    #[test]
    fn two_by_two() {
        let eig = symmetric_tridiagonal_eigen(&[2.0, 2.0], &[1.0]).unwrap();
        assert!((eig.values[0] - 1.0).abs() < 1e-15);
        assert!((eig.values[1] - 3.0).abs() < 1e-15);
        assert!(residual(&[2.0, 2.0], &[1.0], &eig) < 1e-15);
    }

    #[test]
    fn laplacian_spectrum() {
        // -1, 2, -1 tridiagonal: eigenvalues 2 - 2 cos(k pi / (n+1))
        let n = 50;
        let diag = vec![2.0; n];
        let off = vec![-1.0; n - 1];
        let eig = symmetric_tridiagonal_eigen(&diag, &off).unwrap();
        for (k, v) in eig.values.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos();
            assert!((v - exact).abs() < 1e-13);
        }
        assert!(residual(&diag, &off, &eig) < 1e-13);
        let gram = eig.vectors.t().dot(&eig.vectors);
        for i in 0..n {
            for k in 0..n {
                let expect = if i == k { 1.0 } else { 0.0 };
                assert!((gram[(i, k)] - expect).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn empty_and_single() {
        assert!(symmetric_tridiagonal_eigen(&[], &[]).unwrap().values.is_empty());
        let eig = symmetric_tridiagonal_eigen(&[4.0], &[]).unwrap();
        assert_eq!(eig.values, vec![4.0]);
    }
}
