//! Self-correlations of cylinders and rigidity ratios, for shifts and flows.

use rayon::prelude::*;
use serde::Serialize;

use super::estimate::{
    cylinder_intervals, intersection_length, marks_estimate, measure_in, occurrence_marks,
    MeasureEstimate, MIN_WINDOW,
};
use crate::error::{inconclusive, invalid, Result};
use crate::hierarchy::SequenceWindow;
use crate::tiling::{FlowCylinder, TilingPoint};
use crate::word::Letter;

/// Empirical μ([u] ∩ T^{−k}[u]) for each shift k.
pub fn correlation_sequence(
    window: &SequenceWindow,
    u: &[Letter],
    shifts: &[i64],
) -> Result<Vec<MeasureEstimate>> {
    let marks = occurrence_marks(window, u)?;
    shifts
        .par_iter()
        .map(|&k| shifted_overlap(&marks, k.unsigned_abs() as usize))
        .collect()
}

fn shifted_overlap(marks: &[bool], k: usize) -> Result<MeasureEstimate> {
    if marks.len() < k + MIN_WINDOW {
        return inconclusive(format!(
            "shift {k} leaves fewer than {MIN_WINDOW} positions"
        ));
    }
    let both: Vec<bool> = (0..marks.len() - k)
        .map(|i| marks[i] && marks[i + k])
        .collect();
    Ok(marks_estimate(&both))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RigidityResult {
    pub measure: MeasureEstimate,
    pub times: Vec<f64>,
    pub ratios: Vec<f64>,
}

fn check_measure(m: &MeasureEstimate) -> Result<()> {
    if m.value <= 0.0 || m.value < 10.0 * m.stderr_proxy {
        return inconclusive(format!(
            "cylinder measure {} is not resolved (spread {})",
            m.value, m.stderr_proxy
        ));
    }
    Ok(())
}

/// μ(A ∩ T^{−t}A)/μ(A) for A = [u] along integer times.
pub fn rigidity_test(
    window: &SequenceWindow,
    u: &[Letter],
    times: &[u64],
) -> Result<RigidityResult> {
    let marks = occurrence_marks(window, u)?;
    let measure = marks_estimate(&marks);
    check_measure(&measure)?;
    let ratios = times
        .par_iter()
        .map(|&t| {
            if marks.len() < t as usize + MIN_WINDOW {
                return inconclusive(format!("time {t} exceeds the window"));
            }
            let k = t as usize;
            let joint = (0..marks.len() - k)
                .filter(|&i| marks[i] && marks[i + k])
                .count() as f64;
            let single = marks[..marks.len() - k].iter().filter(|&&m| m).count() as f64;
            Ok(joint / single)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RigidityResult {
        measure,
        times: times.iter().map(|&t| t as f64).collect(),
        ratios,
    })
}

/// ν(C ∩ T_{−t}C)/ν(C) along flow times, over the time window [0, horizon).
pub fn flow_rigidity_test(
    point: &TilingPoint,
    cyl: &FlowCylinder,
    times: &[f64],
    horizon: f64,
) -> Result<RigidityResult> {
    if times.iter().any(|&t| !(t >= 0.0 && t.is_finite())) {
        return invalid("flow times must be finite and nonnegative");
    }
    let reach = times.iter().cloned().fold(0.0, f64::max);
    let all = cylinder_intervals(point, cyl, horizon + reach)?;
    let measure = super::estimate::birkhoff_flow(point, cyl, horizon)?;
    check_measure(&measure)?;
    let base: Vec<(f64, f64)> = all
        .iter()
        .filter(|iv| iv.0 < horizon)
        .map(|&(a, b)| (a, b.min(horizon)))
        .collect();
    let single = measure_in(&base, 0.0, horizon);
    let ratios = times
        .par_iter()
        .map(|&t| {
            let back: Vec<(f64, f64)> = all
                .iter()
                .map(|&(a, b)| (a - t, b - t))
                .filter(|iv| iv.1 > 0.0)
                .collect();
            intersection_length(&base, &back) / single
        })
        .collect();
    Ok(RigidityResult {
        measure,
        times: times.to_vec(),
        ratios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::Provenance;
    use crate::word::Alphabet;

    #[test]
    fn periodic_correlations() {
        let s: Vec<Letter> = [0, 0, 1].iter().cycle().take(6000).copied().collect();
        let w = SequenceWindow::new(s, 0, Provenance::new("test", None, ""), Alphabet::digits(2))
            .unwrap();
        let c = correlation_sequence(&w, &[1], &[0, 1, 3]).unwrap();
        assert!((c[0].value - 1.0 / 3.0).abs() < 1e-3);
        assert_eq!(c[1].value, 0.0);
        assert!((c[2].value - 1.0 / 3.0).abs() < 1e-3);
        let r = rigidity_test(&w, &[1], &[0, 3, 4]).unwrap();
        assert_eq!(r.ratios[..2], [1.0, 1.0]);
        assert_eq!(r.ratios[2], 0.0);
    }
}
