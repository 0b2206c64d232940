//! Empirical two-fold self-joinings along the diagonal action.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, precondition, Result};
use crate::hierarchy::SequenceWindow;
use crate::recognizer::same_orbit;
use crate::word::Word;

pub const MIN_JOINING_WINDOW: usize = 100_000;
pub const MARGINAL_TOLERANCE: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum JoiningClass {
    #[serde(rename = "OFF_DIAGONAL")]
    OffDiagonal(i64),
    #[serde(rename = "PRODUCT_CONSISTENT")]
    ProductConsistent,
    #[serde(rename = "INCONCLUSIVE")]
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairFrequency {
    pub p: String,
    pub q: String,
    pub frequency: f64,
    pub product: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JoiningEstimate {
    pub pair_frequencies: Vec<PairFrequency>,
    pub classification: JoiningClass,
    pub max_deviation: f64,
    pub marginal_deviation: f64,
    pub marginals_ok: bool,
    pub tolerance: f64,
    pub window: usize,
}

pub fn default_tolerance(window: usize) -> f64 {
    0.02f64.max(10.0 / (window as f64).sqrt())
}

/// Pair frequencies of [P] × [Q] for P in `ps`, Q in `qs` along i ↦ (T^i x, T^i y).
/// Marginals are compared with the single-coordinate frequencies, so `ps` and
/// `qs` should each partition the space.
pub fn joining_estimate(
    x: &SequenceWindow,
    y: &SequenceWindow,
    ps: &[Word],
    qs: &[Word],
    tolerance: Option<f64>,
    horizon: i64,
) -> Result<JoiningEstimate> {
    if x.provenance.family != y.provenance.family || x.alphabet != y.alphabet {
        return invalid(format!(
            "windows come from different systems ({} and {})",
            x.provenance.family, y.provenance.family
        ));
    }
    if ps.is_empty() || qs.is_empty() || ps.iter().chain(qs).any(|w| w.is_empty()) {
        return invalid("cylinder words must be nonempty");
    }
    let longest = ps.iter().chain(qs).map(|w| w.len()).max().unwrap() as i64;
    let lo = x.lo().max(y.lo());
    let hi = x.hi().min(y.hi()) - longest + 1;
    let n = (hi - lo).max(0) as usize;
    if n < MIN_JOINING_WINDOW {
        return precondition(format!(
            "joint window of {n} positions is shorter than {MIN_JOINING_WINDOW}"
        ));
    }
    let label = |w: &Word| x.alphabet.render(w);
    let index = |win: &SequenceWindow, words: &[Word]| -> Vec<Option<u16>> {
        (lo..hi)
            .into_par_iter()
            .map(|i| {
                words
                    .iter()
                    .position(|w| win.slice(i, i + w.len() as i64) == Some(&w[..]))
                    .map(|j| j as u16)
            })
            .collect()
    };
    let ix = index(x, ps);
    let iy = index(y, qs);
    let mut joint = vec![vec![0u64; qs.len()]; ps.len()];
    let mut px = vec![0u64; ps.len()];
    let mut qy = vec![0u64; qs.len()];
    for (a, b) in ix.iter().zip(&iy) {
        if let Some(a) = a {
            px[*a as usize] += 1;
        }
        if let Some(b) = b {
            qy[*b as usize] += 1;
        }
        if let (Some(a), Some(b)) = (a, b) {
            joint[*a as usize][*b as usize] += 1;
        }
    }
    let nf = n as f64;
    let mut pairs = Vec::new();
    let mut max_dev = 0.0f64;
    for (i, p) in ps.iter().enumerate() {
        for (j, q) in qs.iter().enumerate() {
            let f = joint[i][j] as f64 / nf;
            let prod = px[i] as f64 / nf * (qy[j] as f64 / nf);
            max_dev = max_dev.max((f - prod).abs());
            pairs.push(PairFrequency {
                p: label(p),
                q: label(q),
                frequency: f,
                product: prod,
            });
        }
    }
    let mut marginal_dev = 0.0f64;
    for i in 0..ps.len() {
        let row: u64 = joint[i].iter().sum();
        marginal_dev = marginal_dev.max((row as f64 - px[i] as f64).abs() / nf);
    }
    for j in 0..qs.len() {
        let col: u64 = joint.iter().map(|r| r[j]).sum();
        marginal_dev = marginal_dev.max((col as f64 - qy[j] as f64).abs() / nf);
    }
    let tolerance = tolerance.unwrap_or_else(|| default_tolerance(n));
    let classification = match same_orbit(x, y, horizon)? {
        Some(k) => JoiningClass::OffDiagonal(k),
        None if max_dev <= tolerance => JoiningClass::ProductConsistent,
        None => JoiningClass::Inconclusive,
    };
    Ok(JoiningEstimate {
        pair_frequencies: pairs,
        classification,
        max_deviation: max_dev,
        marginal_deviation: marginal_dev,
        marginals_ok: marginal_dev <= MARGINAL_TOLERANCE,
        tolerance,
        window: n,
    })
}
