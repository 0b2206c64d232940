use std::sync::Arc;

use serde::Serialize;

use super::{same_orbit, Recognizer};
use crate::error::{inconclusive, precondition, Error, Result};
use rand::Rng;

use crate::hierarchy::{
    build_hierarchy, BlockHierarchy, BlockKind, Family, SequenceSource, SequenceWindow,
};
use crate::word::{Letter, Word};

const MAX_LEVEL: u32 = 11;

/// Level of the A and B blocks that seeded pairs are cut from.
pub const SAMPLE_LEVEL: u32 = 11;

#[derive(Clone, Debug, Serialize)]
pub struct SampledWitness {
    pub witness: StructureWitness,
    /// Pairs discarded because they lay in one window-level orbit.
    pub resamples: usize,
    pub half_width: usize,
    #[serde(skip)]
    pub x: SequenceWindow,
    #[serde(skip)]
    pub y: SequenceWindow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum WitnessCase {
    #[serde(rename = "THETA_00_vs_1")]
    Theta00Vs1,
    EtaI,
    EtaII,
    EtaIII,
}

#[derive(Clone, Debug, Serialize)]
pub struct Intervals {
    pub l: (i64, i64),
    pub m: (i64, i64),
    pub t_shift: i64,
    /// |M| and |L| as integer point counts.
    pub gamma: (i64, i64),
    pub gamma_value: f64,
    /// γ lower bound 1/den.
    pub gamma_bound_den: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundsReport {
    pub position_bound: i64,
    pub m1_ok: bool,
    pub m2_ok: bool,
    /// Bound on 2|m1 − m2|.
    pub twice_difference_bound: i64,
    pub difference_ok: bool,
    pub m_in_l: bool,
    pub shifted_m_in_l: bool,
    pub gamma_ok: bool,
    pub patterns_verified: bool,
    pub shift_consistent: bool,
}

impl BoundsReport {
    pub fn all(&self) -> bool {
        self.m1_ok
            && self.m2_ok
            && self.difference_ok
            && self.m_in_l
            && self.shifted_m_in_l
            && self.gamma_ok
            && self.patterns_verified
            && self.shift_consistent
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StructureWitness {
    pub family: String,
    pub n: u32,
    pub m1: i64,
    pub m2: i64,
    pub case: WitnessCase,
    pub subcase: String,
    pub k_align: i64,
    pub s_index: i64,
    pub swapped: bool,
    pub x_pattern: String,
    pub y_pattern: String,
    /// Length of the first block of each pattern.
    pub first_block: (i64, i64),
    /// Offsets o with symbol(i) = symbol(i + t + o) on M, for x and y.
    pub offsets: (i64, i64),
    pub threshold: i64,
    pub l_n: i64,
    pub l_next: i64,
    pub intervals: Intervals,
    pub bounds: BoundsReport,
    pub bounds_ok: bool,
}

pub fn witness_intervals(w: &StructureWitness) -> Intervals {
    let m = w.threshold;
    let (radius, t, gamma_den) = match w.case {
        WitnessCase::Theta00Vs1 => ((m + 4) * (w.l_n + 2), w.l_n + 1, 4 * (m + 4)),
        WitnessCase::EtaI | WitnessCase::EtaII => ((m + 4) * w.l_next, 2 * w.l_n - 2, 16 * (m + 4)),
        WitnessCase::EtaIII => ((m + 4) * w.l_next, w.l_n - 1, 16 * (m + 4)),
    };
    let lo = w.m1.max(w.m2);
    let hi = (w.m1 + w.first_block.0).min(w.m2 + w.first_block.1) - 1;
    let count_m = (hi - lo + 1).max(0);
    let count_l = 2 * radius + 1;
    Intervals {
        l: (-radius, radius),
        m: (lo, hi),
        t_shift: t,
        gamma: (count_m, count_l),
        gamma_value: count_m as f64 / count_l as f64,
        gamma_bound_den: gamma_den,
    }
}

/// Reusable state for witness searches over one family.
#[derive(Clone, Debug)]
pub struct WitnessSearch {
    rec: Recognizer,
    hierarchy: BlockHierarchy,
    m: i64,
}

#[derive(Clone, Copy, Debug)]
struct Block {
    start: i64,
    kind: u8,
}

impl WitnessSearch {
    pub fn new(family: &Family) -> Result<Self> {
        if !matches!(family, Family::Theta | Family::Eta) {
            return precondition("structure witnesses are defined for θ and η");
        }
        let rec = Recognizer::new(family)?;
        let hierarchy = build_hierarchy(family.clone(), MAX_LEVEL + 1)?;
        let m = rec.threshold() as i64;
        Ok(WitnessSearch { rec, hierarchy, m })
    }

    pub fn recognizer(&self) -> &Recognizer {
        &self.rec
    }

    pub fn hierarchy(&self) -> &BlockHierarchy {
        &self.hierarchy
    }

    fn is_theta(&self) -> bool {
        *self.rec.family() == Family::Theta
    }

    pub fn l(&self, n: u32) -> i64 {
        self.hierarchy.level(n).unwrap().length_usize().unwrap() as i64
    }

    /// Level at which blocks are compared for witness level n.
    fn block_level(&self, n: u32) -> u32 {
        if self.is_theta() {
            n
        } else {
            n + 1
        }
    }

    /// Lengths of the A and B blocks at a level.
    pub fn block_lengths(&self, level: u32) -> (i64, i64) {
        let l = self.l(level);
        if self.is_theta() {
            (l + 2, l + 1)
        } else {
            (l, l - 1)
        }
    }

    pub fn radius(&self, n: u32) -> i64 {
        if self.is_theta() {
            (self.m + 4) * (self.l(n) + 2)
        } else {
            (self.m + 4) * self.l(n + 1)
        }
    }

    /// Half width a window needs for a search at level n.
    pub fn required_half_width(&self, n: u32) -> usize {
        let bl = self.block_level(n);
        (self.radius(n) + 4 * self.block_lengths(bl).0) as usize
    }

    pub fn max_level(&self) -> u32 {
        if self.is_theta() {
            MAX_LEVEL
        } else {
            MAX_LEVEL - 1
        }
    }

    fn supports(&self, x: &SequenceWindow, n: u32) -> bool {
        let r = self.radius(n) + 2 * self.block_lengths(self.block_level(n)).0;
        x.covers(-r, r + 1)
    }

    fn decompose(&self, x: &SequenceWindow, depth: u32) -> Vec<Vec<Block>> {
        self.rec
            .decompose_partial(x, depth)
            .into_iter()
            .map(|lv| {
                lv.into_iter()
                    .map(|(start, kind)| Block { start, kind })
                    .collect()
            })
            .collect()
    }

    fn word(&self, n: u32, kind: BlockKind) -> Arc<Word> {
        self.hierarchy.block(n, kind).expect("materialized level")
    }

    fn c_word(&self, n: u32) -> Arc<Word> {
        self.hierarchy
            .level(n)
            .unwrap()
            .c
            .clone()
            .expect("θ has C blocks")
    }

    /// Cuts x from A and y from B at the sample level, wide enough for two
    /// levels above n, and resamples while the pair shares a window-level orbit.
    pub fn sample<R: Rng>(&self, rng: &mut R, n: u32, max_tries: usize) -> Result<SampledWitness> {
        if n == 0 || n > self.max_level() {
            return precondition(format!("level {n} outside 1..={}", self.max_level()));
        }
        let a = self.hierarchy.block(SAMPLE_LEVEL, BlockKind::A)?;
        let b = self.hierarchy.block(SAMPLE_LEVEL, BlockKind::B)?;
        let len = a.len().min(b.len());
        let top = (n..=self.max_level())
            .filter(|&j| 2 * self.required_half_width(j) < len)
            .take(3)
            .last()
            .ok_or_else(|| {
                Error::Inconclusive(format!(
                    "level-{SAMPLE_LEVEL} blocks are too short for level {n}"
                ))
            })?;
        let half_width = self.required_half_width(top);
        let source = |word| SequenceSource::Materialized {
            family: self.rec.family().name(),
            level: Some(SAMPLE_LEVEL),
            word,
            alphabet: self.rec.alphabet().clone(),
        };
        let (sa, sb) = (source(a), source(b));
        let mut last = None;
        for resamples in 0..max_tries.max(1) {
            let x = sa.random_window(rng, half_width, half_width)?;
            let y = sb.random_window(rng, half_width, half_width)?;
            match self.find(&x, &y, n) {
                Ok(witness) => {
                    return Ok(SampledWitness {
                        witness,
                        resamples,
                        half_width,
                        x,
                        y,
                    })
                }
                Err(Error::Precondition(m)) => last = Some(m),
                Err(e) => return Err(e),
            }
        }
        inconclusive(format!(
            "no non-aligned pair in {max_tries} tries: {}",
            last.unwrap_or_default()
        ))
    }

    pub fn find(&self, x: &SequenceWindow, y: &SequenceWindow, n: u32) -> Result<StructureWitness> {
        if n == 0 || n > self.max_level() {
            return precondition(format!("level {n} outside 1..={}", self.max_level()));
        }
        if !self.supports(x, n) || !self.supports(y, n) {
            return inconclusive(format!("windows do not cover ±{} around 0", self.radius(n)));
        }
        let horizon = self.block_lengths(self.block_level(n)).0;
        if let Some(k) = same_orbit(x, y, horizon)? {
            return precondition(format!("windows agree after shift {k}"));
        }
        let top = (n..=self.max_level())
            .take_while(|&j| self.supports(x, j) && self.supports(y, j))
            .last()
            .unwrap_or(n);
        let depth = self.block_level(top);
        let xd = self.decompose(x, depth);
        let yd = self.decompose(y, depth);
        let mut failures: Vec<String> = Vec::new();
        let mut agreed = false;
        for level in n..=top {
            let bl = self.block_level(level);
            if xd.len() < bl as usize || yd.len() < bl as usize {
                break;
            }
            match self.try_level(x, y, level, &xd[bl as usize - 1], &yd[bl as usize - 1]) {
                LevelOutcome::Found(w) => return Ok(*w),
                LevelOutcome::Agree => {
                    agreed = true;
                    break;
                }
                LevelOutcome::TooFar | LevelOutcome::Short => {}
                LevelOutcome::Failed(msgs) => failures.extend(msgs),
            }
        }
        if !failures.is_empty() {
            return Err(Error::VerificationFailure(failures.join("; ")));
        }
        if agreed {
            return inconclusive("the windows agree on their whole decomposed range");
        }
        inconclusive(format!(
            "no level in {n}..={top} has a mismatch within the threshold"
        ))
    }

    fn try_level(
        &self,
        x: &SequenceWindow,
        y: &SequenceWindow,
        n: u32,
        d: &[Block],
        e: &[Block],
    ) -> LevelOutcome {
        let bl = self.block_level(n);
        let (la, lb) = self.block_lengths(bl);
        let len = |b: &Block| if b.kind == 0 { la } else { lb };
        let Some(i0) = d.iter().position(|b| b.start <= 0 && 0 < b.start + len(b)) else {
            return LevelOutcome::Short;
        };
        let delta0 = d[i0].start;
        let mut cands: Vec<(i64, usize)> = e
            .iter()
            .enumerate()
            .map(|(j, b)| (delta0 - b.start, j))
            .collect();
        cands.sort_by_key(|&(k, _)| (k.abs(), k >= 0));
        let best = cands.first().map(|c| c.0.abs());
        let cands: Vec<(i64, usize)> = cands
            .into_iter()
            .take_while(|c| Some(c.0.abs()) == best)
            .collect();
        let mut failures = Vec::new();
        let mut too_far = false;
        for (k, j0) in cands {
            let Some(s) = mismatch(d, e, i0, j0) else {
                return LevelOutcome::Agree;
            };
            if s.abs() > self.m {
                too_far = true;
                continue;
            }
            let built = if self.is_theta() {
                self.theta_witness(x, y, n, d, e, i0, j0, k, s)
            } else {
                self.eta_witness(x, y, n, d, e, i0, j0, k, s)
            };
            match built {
                Some(w) if w.bounds_ok => return LevelOutcome::Found(Box::new(w)),
                Some(w) => failures.push(format!("level {n} k={k} s={s}: {:?}", w.bounds)),
                None => failures.push(format!(
                    "level {n} k={k} s={s}: pattern context outside the windows"
                )),
            }
        }
        if !failures.is_empty() {
            // A later level may still satisfy every bound; failures are only
            // reported if none does.
            return LevelOutcome::Failed(failures);
        }
        if too_far {
            LevelOutcome::TooFar
        } else {
            LevelOutcome::Short
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn theta_witness(
        &self,
        x: &SequenceWindow,
        y: &SequenceWindow,
        n: u32,
        d: &[Block],
        e: &[Block],
        i0: usize,
        j0: usize,
        k: i64,
        s: i64,
    ) -> Option<StructureWitness> {
        let di = (i0 as i64 + s) as usize;
        let ej = (j0 as i64 + s) as usize;
        if di == 0 || ej == 0 {
            return None;
        }
        let l = self.l(n);
        let c = self.c_word(n);
        let with_mid = |mid: &[Letter]| -> Vec<Letter> {
            let mut p = c.to_vec();
            p.extend_from_slice(mid);
            p.extend_from_slice(&c);
            p
        };
        let double_zero = with_mid(&[0, 0]);
        let one = with_mid(&[1]);
        let x_is_a = d[di].kind == 0;
        let (m1, m2) = (d[di].start - l, e[ej].start - l);
        let (xp, yp) = if x_is_a {
            (&double_zero, &one)
        } else {
            (&one, &double_zero)
        };
        let offsets = if x_is_a { (1, 0) } else { (0, 1) };
        let patterns_verified = x.slice(m1, m1 + xp.len() as i64) == Some(xp)
            && y.slice(m2, m2 + yp.len() as i64) == Some(yp);
        let mut w = StructureWitness {
            family: "theta".into(),
            n,
            m1,
            m2,
            case: WitnessCase::Theta00Vs1,
            subcase: if s >= 0 {
                "s_nonneg".into()
            } else {
                "s_neg".into()
            },
            k_align: k,
            s_index: s,
            swapped: !x_is_a,
            x_pattern: if x_is_a { "C00C".into() } else { "C1C".into() },
            y_pattern: if x_is_a { "C1C".into() } else { "C00C".into() },
            first_block: (l, l),
            offsets,
            threshold: self.m,
            l_n: l,
            l_next: self.l(n + 1),
            intervals: dummy_intervals(),
            bounds: dummy_bounds(),
            bounds_ok: false,
        };
        self.finish(
            &mut w,
            x,
            y,
            (self.m + 3) * (l + 2),
            l + 3,
            patterns_verified,
        );
        Some(w)
    }

    #[allow(clippy::too_many_arguments)]
    fn eta_witness(
        &self,
        x: &SequenceWindow,
        y: &SequenceWindow,
        n: u32,
        d: &[Block],
        e: &[Block],
        i0: usize,
        j0: usize,
        k_align: i64,
        s: i64,
    ) -> Option<StructureWitness> {
        let di = (i0 as i64 + s) as usize;
        let ej = (j0 as i64 + s) as usize;
        if di == 0 || ej == 0 {
            return None;
        }
        let l = self.l(n);
        let big = self.l(n + 1);
        // X' carries A_{n+1} at i, Y' carries B_{n+1} at j.
        let swapped = d[di].kind != 0;
        let (xs, ys, xi, yj) = if swapped {
            (e, d, ej, di)
        } else {
            (d, e, di, ej)
        };
        let i = xs[xi].start;
        let j = ys[yj].start;
        let k = i - j;
        let prev_x_is_a = xs[xi - 1].kind == 0;
        let prev_y_is_a = ys[yj - 1].kind == 0;
        use WitnessCase::*;
        // Patterns as block strings over {A, B} at level n.
        let (case, sub, px, mx, py, my): (WitnessCase, &str, &str, i64, &str, i64) =
            if -big <= 8 * k && 8 * k < big {
                (EtaI, "a", "ABA", i, "BBB", j)
            } else if -3 * big <= 8 * k && 8 * k < -big {
                (EtaII, "b", "BAB", i + l, "BBB", j)
            } else if -4 * big - 8 <= 8 * k && 8 * k < -3 * big {
                if prev_y_is_a {
                    (
                        EtaII,
                        "c: preceding Y block A",
                        "BAB",
                        i + l,
                        "BBB",
                        j - l + 1,
                    )
                } else if !prev_x_is_a {
                    (
                        EtaIII,
                        "c: preceding blocks B, B",
                        "AA",
                        i - l,
                        "BB",
                        j - 3 * l + 2,
                    )
                } else {
                    (
                        EtaI,
                        "c: preceding blocks A, B",
                        "ABA",
                        i - 2 * l + 1,
                        "BBB",
                        j - 4 * l + 3,
                    )
                }
            } else if big <= 8 * k && 8 * k < 3 * big {
                if !prev_x_is_a {
                    (EtaIII, "d: preceding X block B", "AA", i - l, "BB", j)
                } else {
                    (EtaII, "d: preceding X block A", "BAB", i - l + 1, "BBB", j)
                }
            } else if 3 * big <= 8 * k && 2 * k <= big {
                if !prev_x_is_a {
                    (
                        EtaIII,
                        "e: preceding X block B",
                        "AA",
                        i - l,
                        "BB",
                        j + l - 1,
                    )
                } else {
                    (
                        EtaI,
                        "e: preceding X block A",
                        "ABA",
                        i - 2 * l + 1,
                        "BBB",
                        j,
                    )
                }
            } else {
                return None;
            };
        let a = self.word(n, BlockKind::A);
        let b = self.word(n, BlockKind::B);
        let spell = |p: &str| -> Vec<Letter> {
            p.chars()
                .flat_map(|ch| if ch == 'A' { a.to_vec() } else { b.to_vec() })
                .collect()
        };
        let first_len = |p: &str| if p.starts_with('A') { l } else { l - 1 };
        let (wx, wy) = if swapped { (y, x) } else { (x, y) };
        let (sx, sy) = (spell(px), spell(py));
        let patterns_verified = wx.slice(mx, mx + sx.len() as i64) == Some(&sx[..])
            && wy.slice(my, my + sy.len() as i64) == Some(&sy[..]);
        let (m1, m2, xpat, ypat, first, offsets) = if swapped {
            (my, mx, py, px, (first_len(py), first_len(px)), (0, 1))
        } else {
            (mx, my, px, py, (first_len(px), first_len(py)), (1, 0))
        };
        let mut w = StructureWitness {
            family: "eta".into(),
            n,
            m1,
            m2,
            case,
            subcase: sub.to_string(),
            k_align,
            s_index: s,
            swapped,
            x_pattern: xpat.into(),
            y_pattern: ypat.into(),
            first_block: first,
            offsets,
            threshold: self.m,
            l_n: l,
            l_next: big,
            intervals: dummy_intervals(),
            bounds: dummy_bounds(),
            bounds_ok: false,
        };
        self.finish(&mut w, x, y, (self.m + 3) * big, l + 4, patterns_verified);
        Some(w)
    }

    fn finish(
        &self,
        w: &mut StructureWitness,
        x: &SequenceWindow,
        y: &SequenceWindow,
        pos_bound: i64,
        twice_diff: i64,
        patterns_verified: bool,
    ) {
        let iv = witness_intervals(w);
        let (ll, lh) = iv.l;
        let (ml, mh) = iv.m;
        let t = iv.t_shift;
        let nonempty = ml <= mh;
        let m_in_l = nonempty && ll <= ml && mh <= lh;
        let shifted_m_in_l = nonempty && ll <= ml + t && mh + t <= lh;
        let gamma_ok = iv.gamma.0 * iv.gamma_bound_den >= iv.gamma.1 && iv.gamma.0 > 0;
        let shift_consistent = nonempty
            && (ml..=mh).all(|i| {
                let xs = x.get(i).is_some() && x.get(i) == x.get(i + t + w.offsets.0);
                let ys = y.get(i).is_some() && y.get(i) == y.get(i + t + w.offsets.1);
                xs && ys
            });
        let bounds = BoundsReport {
            position_bound: pos_bound,
            m1_ok: w.m1.abs() <= pos_bound,
            m2_ok: w.m2.abs() <= pos_bound,
            twice_difference_bound: twice_diff,
            difference_ok: 2 * (w.m1 - w.m2).abs() <= twice_diff,
            m_in_l,
            shifted_m_in_l,
            gamma_ok,
            patterns_verified,
            shift_consistent,
        };
        w.bounds_ok = bounds.all();
        w.bounds = bounds;
        w.intervals = iv;
    }
}

enum LevelOutcome {
    Found(Box<StructureWitness>),
    Agree,
    TooFar,
    Short,
    Failed(Vec<String>),
}

fn dummy_intervals() -> Intervals {
    Intervals {
        l: (0, 0),
        m: (0, 0),
        t_shift: 0,
        gamma: (0, 1),
        gamma_value: 0.0,
        gamma_bound_den: 1,
    }
}

fn dummy_bounds() -> BoundsReport {
    BoundsReport {
        position_bound: 0,
        m1_ok: false,
        m2_ok: false,
        twice_difference_bound: 0,
        difference_ok: false,
        m_in_l: false,
        shifted_m_in_l: false,
        gamma_ok: false,
        patterns_verified: false,
        shift_consistent: false,
    }
}

/// Minimal-|s| index where aligned block kinds differ; nonnegative wins ties.
fn mismatch(d: &[Block], e: &[Block], i0: usize, j0: usize) -> Option<i64> {
    let fwd = (0..)
        .take_while(|&s| i0 + s < d.len() && j0 + s < e.len())
        .find(|&s| d[i0 + s].kind != e[j0 + s].kind);
    let bwd = (1..)
        .take_while(|&s| s <= i0 && s <= j0)
        .find(|&s| d[i0 - s].kind != e[j0 - s].kind);
    match (fwd, bwd) {
        (Some(f), Some(b)) if b < f => Some(-(b as i64)),
        (Some(f), _) => Some(f as i64),
        (None, Some(b)) => Some(-(b as i64)),
        (None, None) => None,
    }
}

pub fn find_structure_witness(
    family: &Family,
    x: &SequenceWindow,
    y: &SequenceWindow,
    n: u32,
) -> Result<StructureWitness> {
    WitnessSearch::new(family)?.find(x, y, n)
}
