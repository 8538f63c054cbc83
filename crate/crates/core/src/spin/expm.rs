use super::ComplexOperator;
use crate::error::{Error, Result};
use crate::C64;

/// Default dimension cap of [`matrix_exp_oracle`].
pub const DEFAULT_ORACLE_CAP: usize = 64;

/// `exp(scale * op)` by scaling and squaring with a Taylor series.
///
/// Brute-force reference for tests; refuses dimensions above
/// [`DEFAULT_ORACLE_CAP`].
pub fn matrix_exp_oracle(op: &ComplexOperator, scale: C64) -> Result<ComplexOperator> {
    matrix_exp_oracle_with_cap(op, scale, DEFAULT_ORACLE_CAP)
}

pub fn matrix_exp_oracle_with_cap(
    op: &ComplexOperator,
    scale: C64,
    cap: usize,
) -> Result<ComplexOperator> {
    let n = op.dim();
    if n > cap {
        return Err(Error::OracleTooLarge { dim: n, cap });
    }
    let a = op.scale(scale);
    let norm = one_norm(&a);
    // Halve until ||A / 2^s||_1 <= 1/2.
    let mut squarings = 0u32;
    let mut scaled_norm = norm;
    while scaled_norm > 0.5 {
        scaled_norm /= 2.0;
        squarings += 1;
    }
    let a = a.scale(C64::new(0.5f64.powi(squarings as i32), 0.0));

    let mut result = ComplexOperator::identity(n);
    let mut term = ComplexOperator::identity(n);
    for k in 1..=40 {
        term = term.matmul(&a).scale(C64::new(1.0 / k as f64, 0.0));
        result = &result + &term;
        if term.max_abs() < 1e-18 * result.max_abs() {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.matmul(&result);
    }
    Ok(result)
}

fn one_norm(a: &ComplexOperator) -> f64 {
    let n = a.dim();
    (0..n)
        .map(|c| (0..n).map(|r| a[(r, c)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}
