//! The DJR tiling flow: the E_n / F_n experiment and the time-α map probe.

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::estimate::MeasureEstimate;
use super::system::System;
use crate::error::{inconclusive, invalid, precondition, Error, Result};
use crate::hierarchy::{
    djr_letter_frequencies, djr_ratio_limit, ratio_f64, DjrBlocks, Provenance, SequenceWindow,
};
use crate::tiling::{
    cylinder_measure_from, BoundaryCoords, FlowCylinder, TileLengths, TilingPoint,
};
use crate::word::{letter_counts, minimal_period, Alphabet, Letter};

/// Deepest n for which B_n^{2^{n+1}} still fits a materialized block.
pub const DJR_EXPERIMENT_MAX_DEPTH: u32 = 5;
/// Block whose counts stand in for the invariant measure.
pub const DJR_COUNT_LEVEL: u32 = 12;
/// Slack on the ½·d target.
pub const DJR_BOUND_FACTOR: f64 = 0.45;

#[derive(Clone, Debug, Serialize)]
pub struct DjrLevelReport {
    pub n: u32,
    pub h_n: u128,
    pub alpha_n: u64,
    pub beta_n: u64,
    pub t_n: f64,
    pub mu_next_block: f64,
    pub mu_double_run: f64,
    pub nu_e: f64,
    pub nu_f: f64,
    pub e_bound_ok: bool,
    pub f_bound_ok: bool,
    pub e_disjoint: bool,
    pub f_disjoint: bool,
    /// Boundary displacement across the inserted 1, minus 2^n(α_n, β_n).
    pub insert_displacement: BoundaryCoords,
    pub insert_ok: bool,
    /// Boundary displacement across a B_{n+1}B_{n+1} junction.
    pub pure_displacement: BoundaryCoords,
    pub pure_ok: bool,
    /// The flow by 2^n t_n + α lands on the second run.
    pub flow_landing_ok: bool,
}

impl DjrLevelReport {
    pub fn ok(&self) -> bool {
        self.e_bound_ok
            && self.f_bound_ok
            && self.e_disjoint
            && self.f_disjoint
            && self.insert_ok
            && self.pure_ok
            && self.flow_landing_ok
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DjrWeakMixingReport {
    pub tile_lengths: TileLengths,
    pub letter_frequencies: [f64; 2],
    pub normalizer: f64,
    pub c: f64,
    pub d: f64,
    pub target: f64,
    pub levels: Vec<DjrLevelReport>,
    pub all_ok: bool,
}

fn window_of(word: Vec<Letter>, note: &str) -> Result<SequenceWindow> {
    SequenceWindow::new(
        word,
        0,
        Provenance::new("djr", None, note),
        Alphabet::digits(2),
    )
}

/// B_n^{2^{n+1}+1} occurs nowhere: it is shorter than two B_{n+1} copies plus
/// a spacer, so it would sit inside three consecutive copies separated by at
/// most one spacer.
fn overlong_run_absent(blocks: &DjrBlocks, n: u32) -> Result<bool> {
    let bn = blocks.word(n).unwrap();
    let bn1 = blocks
        .word(n + 1)
        .ok_or_else(|| Error::Precondition(format!("B_{} is not materialized", n + 1)))?;
    let run = bn.repeat((1usize << (n + 1)) + 1);
    for gaps in [[false, false], [false, true], [true, false]] {
        let mut ctx = bn1.to_vec();
        for g in gaps {
            if g {
                ctx.push(1);
            }
            ctx.extend_from_slice(bn1);
        }
        if crate::word::contains(&ctx, &run) {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn djr_weak_mixing_experiment(
    lengths: &TileLengths,
    depth: u32,
) -> Result<DjrWeakMixingReport> {
    if depth < 3 {
        return inconclusive(format!("depth {depth} is below 3"));
    }
    if depth > DJR_EXPERIMENT_MAX_DEPTH {
        return precondition(format!("depth {depth} exceeds {DJR_EXPERIMENT_MAX_DEPTH}, where B_n^(2^(n+1)) stops fitting the cap"));
    }
    let blocks = DjrBlocks::new();
    let freqs = djr_letter_frequencies();
    let [j0, j1] = lengths.lengths();
    let normalizer = lengths.normalizer(&freqs);
    let c = *djr_ratio_limit(DJR_COUNT_LEVEL, [j0, j1])?
        .tile_ratios
        .last()
        .unwrap();
    let d = c / normalizer;
    let target = DJR_BOUND_FACTOR * d;
    let total = BigUint::from(blocks.length(DJR_COUNT_LEVEL));
    let mut levels = Vec::new();
    for n in 3..=depth {
        let bn = blocks.word(n).unwrap().clone();
        let bn1 = blocks.word(n + 1).unwrap().clone();
        let h = blocks.length(n);
        let counts = letter_counts(&bn, 2);
        let (alpha_n, beta_n) = (counts[0], counts[1]);
        let t_n = alpha_n as f64 * j0 + beta_n as f64 * j1;
        let reps = 1usize << n;
        let run_time = reps as f64 * t_n;
        let mu_next = ratio_f64(&blocks.count(&bn1, DJR_COUNT_LEVEL)?, &total);
        let double = bn.repeat(2 * reps);
        let mu_double = ratio_f64(&blocks.count(&double, DJR_COUNT_LEVEL)?, &total);
        let nu_e = mu_next * run_time / normalizer;
        let nu_f = mu_double * run_time / normalizer;
        let e_disjoint = minimal_period(&bn1) >= reps * h as usize;
        let f_disjoint = crate::word::is_primitive_word(&bn) && overlong_run_absent(&blocks, n)?;

        let run = BoundaryCoords::new(
            (reps as u64 * alpha_n) as i64,
            (reps as u64 * beta_n) as i64,
        );
        let second = reps * h as usize + 1;
        let c_first = letter_counts(&bn1[..second], 2);
        let insert_displacement =
            BoundaryCoords::new(c_first[0] as i64, c_first[1] as i64).minus(run);
        let reads_run = |w: &[Letter], at: usize| {
            w.len() >= at + reps * h as usize
                && w[at..at + reps * h as usize] == double[..reps * h as usize]
        };
        let insert_ok = insert_displacement == BoundaryCoords::new(0, 1)
            && reads_run(&bn1, 0)
            && reads_run(&bn1, second);
        let mut pair = bn1.to_vec();
        pair.extend_from_slice(&bn1);
        let c_pair = letter_counts(&pair[second..bn1.len()], 2);
        let pure_displacement = BoundaryCoords::new(c_pair[0] as i64, c_pair[1] as i64);
        let pure_ok = pure_displacement == run && reads_run(&pair, bn1.len());

        let start = TilingPoint::new(window_of(bn1.to_vec(), "B_{n+1}")?, lengths.clone(), 0.0)?;
        let nudge = 0.5 * j0.min(j1);
        let landed = start.flow(run_time + j1 + nudge)?;
        let flow_landing_ok = landed.tile() == second as i64
            && landed.coords() == run.plus(BoundaryCoords::new(0, 1))
            && (landed.offset() - nudge).abs() < 1e-6;

        levels.push(DjrLevelReport {
            n,
            h_n: h,
            alpha_n,
            beta_n,
            t_n,
            mu_next_block: mu_next,
            mu_double_run: mu_double,
            nu_e,
            nu_f,
            e_bound_ok: nu_e >= target,
            f_bound_ok: nu_f >= target,
            e_disjoint,
            f_disjoint,
            insert_displacement,
            insert_ok,
            pure_displacement,
            pure_ok,
            flow_landing_ok,
        });
    }
    let all_ok = levels.iter().all(|l| l.ok());
    Ok(DjrWeakMixingReport {
        tile_lengths: lengths.clone(),
        letter_frequencies: freqs,
        normalizer,
        c,
        d,
        target,
        levels,
        all_ok,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TAlphaReport {
    pub alpha: f64,
    pub iterates: usize,
    pub estimates: [MeasureEstimate; 2],
    pub formula: f64,
    pub starts_agree: bool,
    pub formula_deviation: f64,
}

/// A DJR tiling whose window covers `span` time units ahead of the origin.
pub fn djr_flow_point<R: Rng>(
    system: &System,
    rng: &mut R,
    lengths: &TileLengths,
    span: f64,
) -> Result<TilingPoint> {
    let [j0, j1] = lengths.lengths();
    let tiles = (span / j0.min(j1)).ceil() as usize + 64;
    let src = &system.sources()[0];
    let w = src.random_window(rng, 64, tiles)?;
    let roof = lengths.of(w.get(0).unwrap());
    TilingPoint::new(w, lengths.clone(), rng.gen_range(0.0..roof))
}

/// Frequency of T_α^k(S) ∈ P for k < N from two random starts; α is |J_1|
/// and P is the union of disjoint cylinders.
pub fn t_alpha_ergodicity_probe(
    lengths: &TileLengths,
    cylinders: &[FlowCylinder],
    iterates: usize,
    seeds: [u64; 2],
) -> Result<TAlphaReport> {
    if cylinders.is_empty() {
        return invalid("no cylinders given");
    }
    if iterates < 10_000 {
        return invalid(format!("{iterates} iterates is below 10000"));
    }
    let system = System::djr();
    let alpha = lengths.of(1);
    let span = alpha * iterates as f64 + 1.0;
    let mut estimates = Vec::new();
    for seed in seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = djr_flow_point(&system, &mut rng, lengths, span)?;
        let visits = p.tiles_ahead(span)?;
        let quarter = iterates.div_ceil(4);
        let mut hits = [0.0; 4];
        let mut sizes = [0.0; 4];
        let mut v = 0usize;
        for k in 0..iterates {
            let t = alpha * k as f64;
            while v + 1 < visits.len() && visits[v + 1].start <= t {
                v += 1;
            }
            let vis = visits[v];
            let q = k / quarter;
            sizes[q] += 1.0;
            let offset = t - vis.start;
            for cyl in cylinders {
                let read = p
                    .base()
                    .slice(vis.tile, vis.tile + cyl.word.len() as i64)
                    .ok_or_else(|| {
                        Error::Inconclusive("window ends before the cylinder word".into())
                    })?;
                if read == &cyl.word[..] && cyl.interval.0 <= offset && offset < cyl.interval.1 {
                    hits[q] += 1.0;
                    break;
                }
            }
        }
        estimates.push(MeasureEstimate::from_quarters(hits, sizes));
    }
    let letters = djr_letter_frequencies();
    let mut formula = 0.0;
    for cyl in cylinders {
        let mu = if cyl.word.len() == 1 {
            letters[cyl.word[0] as usize]
        } else {
            system.word_frequency(&cyl.word)?
        };
        formula += cylinder_measure_from(mu, &letters, lengths, cyl);
    }
    let estimates = [estimates[0], estimates[1]];
    let starts_agree = estimates[0].agrees(&estimates[1], 3.0);
    let formula_deviation = estimates
        .iter()
        .map(|e| (e.value - formula).abs())
        .fold(0.0, f64::max);
    Ok(TAlphaReport {
        alpha,
        iterates,
        estimates,
        formula,
        starts_agree,
        formula_deviation,
    })
}

pub fn whole_space(lengths: &TileLengths) -> [FlowCylinder; 2] {
    [
        FlowCylinder::letter(0, lengths),
        FlowCylinder::letter(1, lengths),
    ]
}
