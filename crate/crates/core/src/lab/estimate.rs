//! Birkhoff averages over shift windows and flow trajectories.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{inconclusive, invalid, Result};
use crate::hierarchy::SequenceWindow;
use crate::tiling::{FlowCylinder, TilingPoint};
use crate::word::{count_occurrences, occurrences, Letter, Word};

pub const MIN_WINDOW: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeasureEstimate {
    pub value: f64,
    pub window: f64,
    /// Half the spread of the four quarter values.
    pub stderr_proxy: f64,
    pub quarters: [f64; 4],
}

impl MeasureEstimate {
    /// `hits[i]` out of `sizes[i]` in quarter i.
    pub fn from_quarters(hits: [f64; 4], sizes: [f64; 4]) -> Self {
        let total: f64 = hits.iter().sum();
        let window: f64 = sizes.iter().sum();
        let quarters = std::array::from_fn(|i| {
            if sizes[i] > 0.0 {
                hits[i] / sizes[i]
            } else {
                0.0
            }
        });
        let hi = quarters.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = quarters.iter().cloned().fold(f64::INFINITY, f64::min);
        MeasureEstimate {
            value: total / window,
            window,
            stderr_proxy: (hi - lo) / 2.0,
            quarters,
        }
    }

    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.stderr_proxy
    }

    pub fn agrees(&self, other: &MeasureEstimate, k: f64) -> bool {
        (self.value - other.value).abs() <= k * (self.stderr_proxy + other.stderr_proxy)
    }
}

pub(crate) fn quarter_bounds(n: usize) -> [(usize, usize); 4] {
    std::array::from_fn(|i| (i * n / 4, (i + 1) * n / 4))
}

fn starts(window: &SequenceWindow, len: usize) -> Result<usize> {
    if len == 0 {
        return invalid("word must be nonempty");
    }
    let n = (window.len() + 1).saturating_sub(len);
    if n < MIN_WINDOW {
        return inconclusive(format!(
            "window of {} symbols is shorter than {MIN_WINDOW}",
            window.len()
        ));
    }
    Ok(n)
}

/// Frequency of u over all start positions of the window.
pub fn birkhoff(window: &SequenceWindow, u: &[Letter]) -> Result<MeasureEstimate> {
    let n = starts(window, u.len())?;
    let s = window.symbols();
    let hits: Vec<f64> = quarter_bounds(n)
        .par_iter()
        .map(|&(a, b)| count_occurrences(&s[a..b + u.len() - 1], u) as f64)
        .collect();
    let sizes = quarter_bounds(n).map(|(a, b)| (b - a) as f64);
    Ok(MeasureEstimate::from_quarters(
        [hits[0], hits[1], hits[2], hits[3]],
        sizes,
    ))
}

/// Start-position indicator of u (index 0 is the window's first symbol).
pub fn occurrence_marks(window: &SequenceWindow, u: &[Letter]) -> Result<Vec<bool>> {
    let n = starts(window, u.len())?;
    let mut marks = vec![false; n];
    for i in occurrences(window.symbols(), u) {
        marks[i] = true;
    }
    Ok(marks)
}

/// Frequency of the union of the cylinders [w], w in `words`.
pub fn birkhoff_union(window: &SequenceWindow, words: &[Word]) -> Result<MeasureEstimate> {
    let longest = words
        .iter()
        .map(|w| w.len())
        .max()
        .ok_or_else(|| crate::Error::InvalidInput("no words given".into()))?;
    let n = starts(window, longest)?;
    let mut marks = vec![false; n];
    for w in words {
        for i in occurrences(window.symbols(), w) {
            if i < n {
                marks[i] = true;
            }
        }
    }
    Ok(marks_estimate(&marks))
}

pub(crate) fn marks_estimate(marks: &[bool]) -> MeasureEstimate {
    let q = quarter_bounds(marks.len());
    let hits = q.map(|(a, b)| marks[a..b].iter().filter(|&&m| m).count() as f64);
    MeasureEstimate::from_quarters(hits, q.map(|(a, b)| (b - a) as f64))
}

/// Times in [0, horizon) at which the flow from `point` lies in the cylinder,
/// as sorted disjoint intervals.
pub fn cylinder_intervals(
    point: &TilingPoint,
    cyl: &FlowCylinder,
    horizon: f64,
) -> Result<Vec<(f64, f64)>> {
    let visits = point.tiles_ahead(horizon)?;
    let base = point.base();
    let (a, b) = cyl.interval;
    let mut out = Vec::new();
    for v in visits {
        if v.letter != cyl.word[0] {
            continue;
        }
        let from = (v.start + a).max(0.0);
        let to = (v.start + b).min(horizon);
        if from >= to {
            continue;
        }
        let Some(read) = base.slice(v.tile, v.tile + cyl.word.len() as i64) else {
            return inconclusive("window ends before the cylinder word");
        };
        if read == &cyl.word[..] {
            out.push((from, to));
        }
    }
    Ok(out)
}

/// Total length of `intervals` inside [lo, hi).
pub fn measure_in(intervals: &[(f64, f64)], lo: f64, hi: f64) -> f64 {
    intervals
        .iter()
        .map(|&(a, b)| (b.min(hi) - a.max(lo)).max(0.0))
        .sum()
}

/// Length of the intersection of two sorted disjoint interval lists.
pub fn intersection_length(x: &[(f64, f64)], y: &[(f64, f64)]) -> f64 {
    let (mut i, mut j, mut total) = (0, 0, 0.0);
    while i < x.len() && j < y.len() {
        let lo = x[i].0.max(y[j].0);
        let hi = x[i].1.min(y[j].1);
        if hi > lo {
            total += hi - lo;
        }
        if x[i].1 < y[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    total
}

/// Time fraction in [u] × I along [0, horizon), integrated exactly per tile.
pub fn birkhoff_flow(
    point: &TilingPoint,
    cyl: &FlowCylinder,
    horizon: f64,
) -> Result<MeasureEstimate> {
    if horizon < MIN_WINDOW as f64 {
        return inconclusive(format!(
            "flow window {horizon} is shorter than {MIN_WINDOW}"
        ));
    }
    let iv = cylinder_intervals(point, cyl, horizon)?;
    let q: [f64; 4] = std::array::from_fn(|i| horizon * i as f64 / 4.0);
    let hits =
        std::array::from_fn(|i| measure_in(&iv, q[i], if i == 3 { horizon } else { q[i + 1] }));
    let sizes = std::array::from_fn(|i| {
        if i == 3 {
            horizon - q[3]
        } else {
            q[i + 1] - q[i]
        }
    });
    Ok(MeasureEstimate::from_quarters(hits, sizes))
}
