//! The suspension tiling flow over a two-letter sequence.
//!
//! Tile boundaries are addressed by exact letter-count pairs (p, q), the
//! boundary sitting at p·|J_0| + q·|J_1| from the anchor tile. Offsets are
//! the only floating-point state.

use serde::Serialize;

use crate::error::{inconclusive, invalid, Error, Result};
use crate::hierarchy::{Provenance, SequenceWindow};
use crate::substitution::Substitution;
use crate::word::{Alphabet, Letter, Word};

pub const OFFSET_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TileLengths {
    lengths: [f64; 2],
    pub ratio_irrational: bool,
}

impl TileLengths {
    pub fn new(j0: f64, j1: f64, ratio_irrational: bool) -> Result<Self> {
        if !(j0 > 0.0 && j1 > 0.0 && j0.is_finite() && j1.is_finite()) {
            return invalid(format!("tile lengths must be positive, got {j0} and {j1}"));
        }
        Ok(TileLengths {
            lengths: [j0, j1],
            ratio_irrational,
        })
    }

    /// |J_0| = 1, |J_1| = α.
    pub fn unit_and(alpha: f64, ratio_irrational: bool) -> Result<Self> {
        Self::new(1.0, alpha, ratio_irrational)
    }

    pub fn golden() -> Self {
        Self::new(1.0, golden_conjugate(), true).unwrap()
    }

    pub fn sqrt2m1() -> Self {
        Self::new(1.0, std::f64::consts::SQRT_2 - 1.0, true).unwrap()
    }

    pub fn lengths(&self) -> [f64; 2] {
        self.lengths
    }

    pub fn of(&self, a: Letter) -> f64 {
        self.lengths[a as usize]
    }

    pub fn position(&self, c: BoundaryCoords) -> f64 {
        c.p as f64 * self.lengths[0] + c.q as f64 * self.lengths[1]
    }

    /// Mean tile length μ([0])|J_0| + μ([1])|J_1|.
    pub fn normalizer(&self, letter_freqs: &[f64]) -> f64 {
        letter_freqs[0] * self.lengths[0] + letter_freqs[1] * self.lengths[1]
    }
}

pub fn golden_conjugate() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

/// Letter counts between two tile boundaries.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct BoundaryCoords {
    pub p: i64,
    pub q: i64,
}

impl BoundaryCoords {
    pub fn new(p: i64, q: i64) -> Self {
        BoundaryCoords { p, q }
    }

    fn step(self, a: Letter, sign: i64) -> Self {
        if a == 0 {
            BoundaryCoords {
                p: self.p + sign,
                q: self.q,
            }
        } else {
            BoundaryCoords {
                p: self.p,
                q: self.q + sign,
            }
        }
    }

    pub fn minus(self, o: Self) -> Self {
        BoundaryCoords {
            p: self.p - o.p,
            q: self.q - o.q,
        }
    }

    pub fn plus(self, o: Self) -> Self {
        BoundaryCoords {
            p: self.p + o.p,
            q: self.q + o.q,
        }
    }
}

/// A tiling: the base sequence, the current tile index and the offset of
/// the origin inside it.
#[derive(Clone, Debug)]
pub struct TilingPoint {
    base: SequenceWindow,
    lengths: TileLengths,
    tile: i64,
    offset: f64,
    coords: BoundaryCoords,
}

impl TilingPoint {
    pub fn new(base: SequenceWindow, lengths: TileLengths, offset: f64) -> Result<Self> {
        if base.alphabet.size() != 2 {
            return invalid("tilings need a two-letter alphabet");
        }
        let a = base.get(0).expect("window straddles 0");
        if !(0.0..lengths.of(a)).contains(&offset) {
            return invalid(format!("offset {offset} outside [0, {})", lengths.of(a)));
        }
        Ok(TilingPoint {
            base,
            lengths,
            tile: 0,
            offset,
            coords: BoundaryCoords::default(),
        })
    }

    pub fn base(&self) -> &SequenceWindow {
        &self.base
    }

    pub fn lengths(&self) -> &TileLengths {
        &self.lengths
    }

    pub fn tile(&self) -> i64 {
        self.tile
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn coords(&self) -> BoundaryCoords {
        self.coords
    }

    pub fn letter(&self) -> Letter {
        self.base.get(self.tile).unwrap()
    }

    /// Roof value f at the current tile.
    pub fn roof(&self) -> f64 {
        self.lengths.of(self.letter())
    }

    /// T_t: the origin moves forward by t along the tiling.
    pub fn flow(&self, t: f64) -> Result<TilingPoint> {
        if !t.is_finite() {
            return invalid("flow time must be finite");
        }
        let u = self.offset + t;
        let mut tile = self.tile;
        let mut rel = BoundaryCoords::default();
        let at = |tile: i64| {
            self.base.get(tile).ok_or_else(|| {
                Error::Inconclusive(format!("flow by {t} leaves the window at tile {tile}"))
            })
        };
        if u >= 0.0 {
            loop {
                let a = at(tile)?;
                let next = rel.step(a, 1);
                if u < self.lengths.position(next) {
                    break;
                }
                rel = next;
                tile += 1;
            }
        } else {
            while u < self.lengths.position(rel) {
                tile -= 1;
                rel = rel.step(at(tile)?, -1);
            }
            let a = at(tile)?;
            if u >= self.lengths.position(rel.step(a, 1)) {
                rel = rel.step(a, 1);
                tile += 1;
                at(tile)?;
            }
        }
        let offset = (u - self.lengths.position(rel)).max(0.0);
        let offset = if offset >= self.lengths.of(at(tile)?) {
            0.0
        } else {
            offset
        };
        Ok(TilingPoint {
            base: self.base.clone(),
            lengths: self.lengths.clone(),
            tile,
            offset,
            coords: self.coords.plus(rel),
        })
    }

    /// Same tile, same exact boundary and offsets within tolerance.
    pub fn agrees_with(&self, other: &TilingPoint) -> bool {
        self.tile == other.tile
            && self.coords == other.coords
            && (self.offset - other.offset).abs() <= OFFSET_TOLERANCE
    }

    /// Start times (relative to the origin) of the tiles from the current one on,
    /// stopping once `horizon` time has been covered.
    pub fn tiles_ahead(&self, horizon: f64) -> Result<Vec<TileVisit>> {
        let mut out = Vec::new();
        let mut rel = BoundaryCoords::default();
        let mut tile = self.tile;
        loop {
            let start = self.lengths.position(rel) - self.offset;
            if start >= horizon {
                break;
            }
            let a = self
                .base
                .get(tile)
                .ok_or_else(|| Error::Inconclusive(format!("window ends before time {horizon}")))?;
            out.push(TileVisit {
                tile,
                letter: a,
                start,
                coords: self.coords.plus(rel),
            });
            rel = rel.step(a, 1);
            tile += 1;
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TileVisit {
    pub tile: i64,
    pub letter: Letter,
    pub start: f64,
    pub coords: BoundaryCoords,
}

/// [u] × I: tilings whose tiles from the origin's tile on read u, with the
/// origin at offset in I = [a, b).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowCylinder {
    pub word: Word,
    pub interval: (f64, f64),
}

impl FlowCylinder {
    pub fn new(word: Word, a: f64, b: f64, lengths: &TileLengths) -> Result<Self> {
        let Some(&u0) = word.first() else {
            return invalid("cylinder word must be nonempty");
        };
        if u0 > 1 || word.iter().any(|&x| x > 1) {
            return invalid("cylinder word must be over {0, 1}");
        }
        if !(0.0 <= a && a < b && b <= lengths.of(u0)) {
            return invalid(format!(
                "interval [{a}, {b}) not inside [0, {})",
                lengths.of(u0)
            ));
        }
        Ok(FlowCylinder {
            word,
            interval: (a, b),
        })
    }

    /// The letter cylinder with its full interval.
    pub fn letter(a: Letter, lengths: &TileLengths) -> Self {
        FlowCylinder {
            word: Word::new(vec![a]),
            interval: (0.0, lengths.of(a)),
        }
    }

    pub fn width(&self) -> f64 {
        self.interval.1 - self.interval.0
    }
}

/// ν([u] × I) = μ([u])·|I| / (μ([0])|J_0| + μ([1])|J_1|).
pub fn cylinder_measure_from(
    mu_u: f64,
    letter_freqs: &[f64],
    lengths: &TileLengths,
    cyl: &FlowCylinder,
) -> f64 {
    mu_u * cyl.width() / lengths.normalizer(letter_freqs)
}

/// Cylinder measure with exact word and letter frequencies of `sub`.
pub fn cylinder_measure(
    sub: &Substitution,
    lengths: &TileLengths,
    cyl: &FlowCylinder,
) -> Result<f64> {
    if sub.size() != 2 {
        return invalid("tilings need a two-letter alphabet");
    }
    let letters = sub.pf_frequencies()?.frequencies;
    let mu = if cyl.word.len() == 1 {
        letters[cyl.word[0] as usize]
    } else {
        sub.word_frequency(&cyl.word)?
    };
    if mu == 0.0 {
        return invalid(format!(
            "cylinder word {} is not admissible",
            sub.alphabet().render(&cyl.word)
        ));
    }
    Ok(cylinder_measure_from(mu, &letters, lengths, cyl))
}

pub fn hits_cylinder(point: &TilingPoint, cyl: &FlowCylinder) -> Result<bool> {
    let t = point.tile();
    let Some(read) = point.base().slice(t, t + cyl.word.len() as i64) else {
        return inconclusive("window does not cover the cylinder word");
    };
    Ok(
        read == &cyl.word[..]
            && cyl.interval.0 <= point.offset()
            && point.offset() < cyl.interval.1,
    )
}

/// A recoded tiling together with its anchor relative to the original one.
#[derive(Clone, Debug)]
pub struct RecodedPoint {
    pub point: TilingPoint,
    /// Original-coordinate position of the recoded anchor boundary.
    pub anchor: BoundaryCoords,
    /// Original tile index of every recoded tile start.
    pub original_starts: Vec<i64>,
}

/// Rewrites 00 → a and 1 → b with |J_a| = 2|J_0| and |J_b| = |J_1|.
pub fn doubling_recode(point: &TilingPoint) -> Result<RecodedPoint> {
    let base = point.base();
    let s = base.symbols();
    let mut from = 0usize;
    let mut to = s.len();
    let leading = s.iter().take_while(|&&a| a == 0).count();
    if leading == s.len() {
        return invalid("window has no 1 to align the pairs of zeros");
    }
    if leading % 2 == 1 {
        from = 1;
    }
    let trailing = s.iter().rev().take_while(|&&a| a == 0).count();
    if trailing % 2 == 1 {
        to -= 1;
    }
    let mut letters = Vec::new();
    let mut starts = Vec::new();
    let mut i = from;
    while i < to {
        if s[i] == 1 {
            letters.push(1);
            starts.push(base.lo() + i as i64);
            i += 1;
        } else {
            let run = s[i..to].iter().take_while(|&&a| a == 0).count();
            if run % 2 == 1 {
                return invalid(format!("isolated 0 at index {}", base.lo() + i as i64));
            }
            for _ in 0..run / 2 {
                letters.push(0);
                starts.push(base.lo() + i as i64);
                i += 2;
            }
        }
    }
    let locate = |orig: i64| -> Result<usize> {
        match starts.binary_search(&orig) {
            Ok(j) => Ok(j),
            Err(0) => inconclusive("tile lies before the recoded range"),
            Err(j) => {
                if letters[j - 1] == 0 && starts[j - 1] + 1 == orig {
                    Ok(j - 1)
                } else {
                    inconclusive("tile lies outside the recoded range")
                }
            }
        }
    };
    let j0 = locate(0)?;
    let jc = locate(point.tile())?;
    let anchor = BoundaryCoords::new(if starts[j0] < 0 { -1 } else { 0 }, 0);
    let lo = -(j0 as i64);
    let window = SequenceWindow::new(
        letters.clone(),
        lo,
        Provenance::new(
            &base.provenance.family,
            base.provenance.level,
            format!("doubling recode of {}", base.provenance.note),
        ),
        Alphabet::letters(2),
    )?;
    let lengths = TileLengths::new(
        2.0 * point.lengths().of(0),
        point.lengths().of(1),
        point.lengths().ratio_irrational,
    )?;
    let extra = if starts[jc] < point.tile() {
        point.lengths().of(0)
    } else {
        0.0
    };
    let mut coords = BoundaryCoords::default();
    let (lo_j, hi_j) = if jc >= j0 { (j0, jc) } else { (jc, j0) };
    for &a in &letters[lo_j..hi_j] {
        coords = coords.step(a, 1);
    }
    if jc < j0 {
        coords = BoundaryCoords::default().minus(coords);
    }
    let recoded = TilingPoint {
        base: window,
        lengths,
        tile: jc as i64 - j0 as i64,
        offset: point.offset() + extra,
        coords,
    };
    Ok(RecodedPoint {
        point: recoded,
        anchor,
        original_starts: starts,
    })
}

/// Original-coordinate boundary of a recoded tile boundary.
pub fn recoded_to_original(r: &RecodedPoint, c: BoundaryCoords) -> BoundaryCoords {
    BoundaryCoords::new(r.anchor.p + 2 * c.p, r.anchor.q + c.q)
}
