//! Perron–Frobenius vectors of nonnegative matrices.

use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 100_000;
const RAYLEIGH_TOL: f64 = 1e-14;

#[derive(Clone, Debug)]
pub struct PerronVector {
    pub eigenvalue: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

fn apply(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn residual(m: &[Vec<f64>], v: &[f64], lambda: f64) -> f64 {
    apply(m, v)
        .iter()
        .zip(v)
        .map(|(mv, x)| (mv - lambda * x).abs())
        .fold(0.0, f64::max)
}

fn normalize(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    for x in v.iter_mut() {
        *x /= s;
    }
    let n = v.len();
    if n > 1 {
        let head: f64 = v[..n - 1].iter().sum();
        v[n - 1] = 1.0 - head;
    }
}

/// Power iteration with a Rayleigh-quotient stopping rule.
///
/// Iterates on `(M + I)`, which has the same Perron vector and removes
/// periodicity of irreducible matrices.
pub fn power_iteration(m: &[Vec<f64>]) -> Result<PerronVector> {
    let n = m.len();
    if n == 0 || m.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidInput(
            "matrix must be square and nonempty".into(),
        ));
    }
    let mut v = vec![1.0 / n as f64; n];
    let mut lambda_prev = f64::NAN;
    let mut stable = 0;
    for it in 1..=MAX_ITERATIONS {
        let mv = apply(m, &v);
        let mut w: Vec<f64> = mv.iter().zip(&v).map(|(a, b)| a + b).collect();
        let lambda = rayleigh(&v, &mv);
        normalize(&mut w);
        let delta = w
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        v = w;
        if (lambda - lambda_prev).abs() <= RAYLEIGH_TOL * lambda.abs().max(1.0) && delta <= 1e-16 {
            stable += 1;
            if stable >= 3 {
                let lambda = rayleigh(&v, &apply(m, &v));
                return Ok(PerronVector {
                    eigenvalue: lambda,
                    residual: residual(m, &v, lambda),
                    vector: v,
                    iterations: it,
                });
            }
        } else {
            stable = 0;
        }
        lambda_prev = lambda;
    }
    let lambda = rayleigh(&v, &apply(m, &v));
    let res = residual(m, &v, lambda);
    if res <= 1e-12 {
        return Ok(PerronVector {
            eigenvalue: lambda,
            residual: res,
            vector: v,
            iterations: MAX_ITERATIONS,
        });
    }
    Err(Error::Precondition(format!(
        "power iteration did not converge (residual {res:e})"
    )))
}

fn rayleigh(v: &[f64], mv: &[f64]) -> f64 {
    let num: f64 = v.iter().zip(mv).map(|(a, b)| a * b).sum();
    let den: f64 = v.iter().map(|a| a * a).sum();
    num / den
}

/// Closed form for 2×2 nonnegative matrices with a positive off-diagonal.
pub fn closed_form_2x2(m: &[Vec<f64>]) -> Option<(f64, [f64; 2])> {
    let (a, b, c, d) = (m[0][0], m[0][1], m[1][0], m[1][1]);
    let tr = a + d;
    let disc = (a - d) * (a - d) + 4.0 * b * c;
    let lambda = (tr + disc.sqrt()) / 2.0;
    let (x, y) = if b > 0.0 {
        (b, lambda - a)
    } else if c > 0.0 {
        (lambda - d, c)
    } else {
        return None;
    };
    let s = x + y;
    Some((lambda, [x / s, 1.0 - x / s]))
}
