//! Weyl-sum scans for eigenfrequencies.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::Serialize;

use super::estimate::{cylinder_intervals, occurrence_marks};
use crate::error::{precondition, Result};
use crate::hierarchy::SequenceWindow;
use crate::tiling::{FlowCylinder, TilingPoint};
use crate::word::Letter;

pub const MIN_SCAN_WINDOW: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralScan {
    pub lambdas: Vec<f64>,
    pub moduli: Vec<f64>,
    pub window: f64,
}

impl SpectralScan {
    /// Largest modulus over λ outside [−eps, eps] mod 1.
    pub fn max_away_from_zero(&self, eps: f64) -> Option<(f64, f64)> {
        self.lambdas
            .iter()
            .zip(&self.moduli)
            .filter(|(l, _)| {
                let f = l.rem_euclid(1.0);
                f > eps && f < 1.0 - eps
            })
            .map(|(&l, &m)| (l, m))
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }

    pub fn at(&self, lambda: f64) -> Option<f64> {
        self.lambdas
            .iter()
            .position(|&l| l == lambda)
            .map(|i| self.moduli[i])
    }
}

/// 0 and p/q in (0, 1) in lowest terms, q ≤ max_q.
pub fn rational_grid(max_q: u32) -> Vec<f64> {
    let mut out = vec![0.0];
    for q in 2..=max_q {
        for p in 1..q {
            if gcd(p, q) == 1 {
                out.push(p as f64 / q as f64);
            }
        }
    }
    out
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Rationals with q ≤ 16, 64 uniform points, and 1/α, 1/(1+α) when scanning a flow.
pub fn default_lambda_grid(flow_alpha: Option<f64>) -> Vec<f64> {
    let mut g = rational_grid(16);
    g.extend((0..64).map(|k| (k as f64 + 0.5) / 64.0));
    if let Some(a) = flow_alpha {
        g.push(1.0 / a);
        g.push(1.0 / (1.0 + a));
    }
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

fn weyl_moduli(hits: &[usize], n: usize, grid: &[f64]) -> Vec<f64> {
    grid.par_iter()
        .map(|&lambda| {
            let (mut re, mut im) = (0.0f64, 0.0f64);
            for &i in hits {
                let phase = (lambda * i as f64).fract();
                let (s, c) = (TAU * phase).sin_cos();
                re += c;
                im -= s;
            }
            (re * re + im * im).sqrt() / n as f64
        })
        .collect()
}

/// |(1/N) Σ e^{−2πiλn} 1_[u](Tⁿx)| per λ, with n counted from the window start.
pub fn spectral_scan(window: &SequenceWindow, u: &[Letter], grid: &[f64]) -> Result<SpectralScan> {
    let marks = occurrence_marks(window, u)?;
    if marks.len() < MIN_SCAN_WINDOW {
        return precondition(format!(
            "spectral scans need {MIN_SCAN_WINDOW} positions, got {}",
            marks.len()
        ));
    }
    let hits: Vec<usize> = marks
        .iter()
        .enumerate()
        .filter(|(_, &m)| m)
        .map(|(i, _)| i)
        .collect();
    Ok(SpectralScan {
        lambdas: grid.to_vec(),
        moduli: weyl_moduli(&hits, marks.len(), grid),
        window: marks.len() as f64,
    })
}

/// The control: rotation by α and the indicator of [a, b).
pub fn spectral_scan_rotation(
    alpha: f64,
    x0: f64,
    interval: (f64, f64),
    n: usize,
    grid: &[f64],
) -> SpectralScan {
    let hits: Vec<usize> = (0..n)
        .filter(|&i| {
            let x = (x0 + alpha * i as f64).rem_euclid(1.0);
            interval.0 <= x && x < interval.1
        })
        .collect();
    SpectralScan {
        lambdas: grid.to_vec(),
        moduli: weyl_moduli(&hits, n, grid),
        window: n as f64,
    }
}

/// |(1/T) ∫_0^T e^{−2πiλt} 1_C(T_t S) dt| per λ, integrated exactly per visit.
pub fn spectral_scan_flow(
    point: &TilingPoint,
    cyl: &FlowCylinder,
    horizon: f64,
    grid: &[f64],
) -> Result<SpectralScan> {
    if horizon < MIN_SCAN_WINDOW as f64 {
        return precondition(format!(
            "flow scans need {MIN_SCAN_WINDOW} time units, got {horizon}"
        ));
    }
    let iv = cylinder_intervals(point, cyl, horizon)?;
    let moduli = grid
        .par_iter()
        .map(|&lambda| {
            let (mut re, mut im) = (0.0f64, 0.0f64);
            for &(a, b) in &iv {
                if lambda == 0.0 {
                    re += b - a;
                    continue;
                }
                let (sa, ca) = (TAU * (lambda * a).fract()).sin_cos();
                let (sb, cb) = (TAU * (lambda * b).fract()).sin_cos();
                let w = TAU * lambda;
                re += (sb - sa) / w;
                im += (cb - ca) / w;
            }
            (re * re + im * im).sqrt() / horizon
        })
        .collect();
    Ok(SpectralScan {
        lambdas: grid.to_vec(),
        moduli,
        window: horizon,
    })
}
