//! Block hierarchies of θ, η, common-tail substitutions and the DJR block
//! system, plus anchored sequence windows cut from them.

use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::Serialize;

use crate::error::{invalid, precondition, Error, Result};
use crate::substitution::Substitution;
use crate::word::{count_occurrences, letter_counts, Alphabet, Letter, Word};

/// Words longer than this are not stored.
pub const MATERIALIZATION_CAP: usize = 10_000_000;

/// Deepest DJR level whose lengths are tracked.
pub const DJR_DEPTH_CAP: u32 = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Family {
    Theta,
    Eta,
    GeneralS(Substitution),
    Djr,
}

impl Family {
    pub fn name(&self) -> String {
        match self {
            Family::Theta => "theta".into(),
            Family::Eta => "eta".into(),
            Family::GeneralS(s) => s.name().to_string(),
            Family::Djr => "djr".into(),
        }
    }

    pub fn general(sub: Substitution) -> Result<Family> {
        sub.common_tail_shape()?;
        Ok(Family::GeneralS(sub))
    }

    pub fn substitution(&self) -> Option<Substitution> {
        match self {
            Family::Theta => Some(Substitution::theta()),
            Family::Eta => Some(Substitution::eta()),
            Family::GeneralS(s) => Some(s.clone()),
            Family::Djr => None,
        }
    }

    pub fn alphabet(&self) -> Alphabet {
        match self {
            Family::GeneralS(s) => s.alphabet().clone(),
            _ => Alphabet::digits(2),
        }
    }

    /// Preimages of the two level-1 blocks.
    fn seeds(&self) -> (Word, Word) {
        match self {
            Family::Theta | Family::Eta => (Word::new(vec![0, 0]), Word::new(vec![1])),
            _ => (Word::new(vec![0]), Word::new(vec![1])),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BlockKind {
    A,
    B,
}

#[derive(Clone, Debug)]
pub struct Level {
    pub n: u32,
    /// l_n: |C_n| for θ and common-tail families, |A_n| for η, h_n = |B_n| for DJR.
    pub length: BigUint,
    /// Letter counts of A_n (B_n for DJR).
    pub alpha: BigUint,
    pub beta: BigUint,
    /// Letter counts of B_n for two-block families.
    pub b_counts: Option<(BigUint, BigUint)>,
    pub a: Option<Arc<Word>>,
    pub b: Option<Arc<Word>>,
    pub c: Option<Arc<Word>>,
}

impl Level {
    pub fn materialized(&self) -> bool {
        self.a.is_some() || self.b.is_some()
    }

    pub fn block(&self, kind: BlockKind) -> Option<&Arc<Word>> {
        match kind {
            BlockKind::A => self.a.as_ref(),
            BlockKind::B => self.b.as_ref(),
        }
    }

    pub fn length_usize(&self) -> Option<usize> {
        self.length.to_usize()
    }
}

#[derive(Clone, Debug)]
pub struct BlockHierarchy {
    family: Family,
    levels: Vec<Level>,
}

impl BlockHierarchy {
    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn depth(&self) -> u32 {
        self.levels.len() as u32
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn level(&self, n: u32) -> Result<&Level> {
        if n == 0 || n as usize > self.levels.len() {
            return invalid(format!("level {n} outside 1..={}", self.levels.len()));
        }
        Ok(&self.levels[n as usize - 1])
    }

    /// The block that windows are cut from: A_n, or B_n for DJR.
    pub fn primary_block(&self, n: u32) -> Result<Arc<Word>> {
        let kind = if self.family == Family::Djr {
            BlockKind::B
        } else {
            BlockKind::A
        };
        self.block(n, kind)
    }

    pub fn block(&self, n: u32, kind: BlockKind) -> Result<Arc<Word>> {
        let level = self.level(n)?;
        if self.family == Family::Djr && kind == BlockKind::A {
            return invalid("the DJR system has a single block per level");
        }
        level.block(kind).cloned().ok_or_else(|| {
            Error::Precondition(format!("level {n} exceeds the materialization cap"))
        })
    }

    pub fn window(
        &self,
        n: u32,
        kind: BlockKind,
        center_offset: i64,
        half_width: usize,
    ) -> Result<SequenceWindow> {
        let block = self.block(n, kind)?;
        let note = format!("{:?}_{} offset {}", kind, n, center_offset);
        SequenceWindow::cut(
            &block,
            center_offset,
            half_width,
            Provenance::new(&self.family.name(), Some(n), note),
            self.family.alphabet(),
        )
    }
}

pub fn build_hierarchy(family: Family, depth: u32) -> Result<BlockHierarchy> {
    if depth == 0 {
        return invalid("depth must be at least 1");
    }
    let levels = match &family {
        Family::Djr => {
            if depth > DJR_DEPTH_CAP {
                return precondition(format!("DJR depth {depth} exceeds the cap {DJR_DEPTH_CAP}"));
            }
            djr_levels(depth)
        }
        _ => substitutive_levels(&family, depth)?,
    };
    Ok(BlockHierarchy { family, levels })
}

fn big_counts(sub: &Substitution, w: &[Letter]) -> Vec<BigUint> {
    letter_counts(w, sub.size())
        .into_iter()
        .map(BigUint::from)
        .collect()
}

fn substitutive_levels(family: &Family, depth: u32) -> Result<Vec<Level>> {
    let sub = family.substitution().expect("substitutive family");
    if let Family::GeneralS(s) = family {
        s.common_tail_shape()?;
    }
    let m = sub.matrix();
    let (seed_a, seed_b) = family.seeds();
    let mut counts_a = big_counts(&sub, &seed_a);
    let mut counts_b = big_counts(&sub, &seed_b);
    let mut words = Some((seed_a.into_vec(), seed_b.into_vec()));
    let mut levels = Vec::with_capacity(depth as usize);
    let mut length = BigUint::zero();
    for n in 1..=depth {
        let step = |c: &[BigUint]| -> Vec<BigUint> {
            (0..sub.size())
                .map(|i| (0..sub.size()).map(|j| &c[j] * m.get(i, j)).sum())
                .collect()
        };
        counts_a = step(&counts_a);
        counts_b = step(&counts_b);
        length = match family {
            Family::Theta => {
                if n == 1 {
                    BigUint::from(4u32)
                } else {
                    length * 4u32 + 4u32
                }
            }
            Family::Eta => {
                if n == 1 {
                    BigUint::from(6u32)
                } else {
                    length * 4u32 - 2u32
                }
            }
            _ => counts_a.iter().sum::<BigUint>() - 1u32,
        };
        words = words.and_then(|(a, b)| {
            let la = counts_a.iter().sum::<BigUint>();
            if la > BigUint::from(MATERIALIZATION_CAP) {
                None
            } else {
                Some((
                    sub.expand(&a, 1).ok()?.into_vec(),
                    sub.expand(&b, 1).ok()?.into_vec(),
                ))
            }
        });
        let (a, b, c) = match &words {
            Some((a, b)) => {
                let c = match family {
                    Family::Theta => Some(Arc::new(Word::from(&a[2..]))),
                    Family::Eta => None,
                    _ => Some(Arc::new(Word::from(&a[1..]))),
                };
                (
                    Some(Arc::new(Word::from(a.as_slice()))),
                    Some(Arc::new(Word::from(b.as_slice()))),
                    c,
                )
            }
            None => (None, None, None),
        };
        levels.push(Level {
            n,
            length: length.clone(),
            alpha: counts_a[0].clone(),
            beta: counts_a.get(1).cloned().unwrap_or_default(),
            b_counts: Some((
                counts_b[0].clone(),
                counts_b.get(1).cloned().unwrap_or_default(),
            )),
            a,
            b,
            c,
        });
    }
    Ok(levels)
}

fn djr_levels(depth: u32) -> Vec<Level> {
    let mut levels = Vec::with_capacity(depth as usize);
    let mut word: Option<Vec<Letter>> = Some(vec![0, 1, 0]);
    let mut h = BigUint::from(3u32);
    let mut alpha = BigUint::from(2u32);
    let mut beta = BigUint::one();
    for n in 1..=depth {
        if n > 1 {
            let reps = BigUint::one() << (n - 1);
            let copies = (n - 1) as usize;
            h = &h * &reps * 2u32 + 1u32;
            alpha = &alpha * &reps * 2u32;
            beta = &beta * &reps * 2u32 + 1u32;
            word = word.and_then(|w| {
                if h > BigUint::from(MATERIALIZATION_CAP) {
                    return None;
                }
                let half = w.repeat(1usize << copies);
                let mut next = Vec::with_capacity(2 * half.len() + 1);
                next.extend_from_slice(&half);
                next.push(1);
                next.extend_from_slice(&half);
                Some(next)
            });
        }
        levels.push(Level {
            n,
            length: h.clone(),
            alpha: alpha.clone(),
            beta: beta.clone(),
            b_counts: None,
            a: None,
            b: word.as_ref().map(|w| Arc::new(Word::from(w.as_slice()))),
            c: None,
        });
    }
    levels
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: impl Into<String>) -> IdentityCheck {
    IdentityCheck {
        name: name.to_string(),
        passed,
        detail: detail.into(),
    }
}

/// Checks every materialized level against direct expansion and the
/// family's block identities and length recurrences.
pub fn identity_checks(h: &BlockHierarchy) -> Result<Vec<IdentityCheck>> {
    let mut out = Vec::new();
    let mats: Vec<&Level> = h.levels().iter().filter(|l| l.materialized()).collect();
    match h.family() {
        Family::Djr => {
            let mut prev: Option<&Level> = None;
            for l in &mats {
                let b = l.b.as_ref().unwrap();
                let counts = letter_counts(b, 2);
                let counts_ok = BigUint::from(counts[0]) == l.alpha
                    && BigUint::from(counts[1]) == l.beta
                    && BigUint::from(b.len()) == l.length;
                out.push(check(
                    &format!("counts_{}", l.n),
                    counts_ok,
                    format!("h={} alpha={} beta={}", b.len(), counts[0], counts[1]),
                ));
                if let Some(p) = prev {
                    let pb = p.b.as_ref().unwrap();
                    let half = pb.repeat(1usize << p.n);
                    let expected = half.concat(&[1]).concat(&half);
                    out.push(check(
                        &format!("block_recurrence_{}", l.n),
                        **b == expected,
                        "B_{n+1} = B_n^(2^n) 1 B_n^(2^n)",
                    ));
                    let reps = 1u64 << p.n;
                    let pc = letter_counts(pb, 2);
                    let ok = b.len() as u64 == 2 * reps * pb.len() as u64 + 1
                        && counts[0] == 2 * reps * pc[0]
                        && counts[1] == 2 * reps * pc[1] + 1;
                    out.push(check(
                        &format!("length_recurrence_{}", l.n),
                        ok,
                        "h, alpha, beta recurrences",
                    ));
                }
                prev = Some(l);
            }
        }
        fam => {
            let sub = fam.substitution().unwrap();
            let (sa, sb) = fam.seeds();
            let mut prev: Option<(usize, usize)> = None;
            for l in &mats {
                let (a, b) = (l.a.as_ref().unwrap(), l.b.as_ref().unwrap());
                let ea = sub.expand(&sa, l.n)?;
                let eb = sub.expand(&sb, l.n)?;
                out.push(check(
                    &format!("expansion_{}", l.n),
                    **a == ea && **b == eb,
                    "blocks equal direct expansions",
                ));
                let (la, lb) = (a.len(), b.len());
                match fam {
                    Family::Theta => {
                        let ok = a.starts_with(&[0, 0]) && b.starts_with(&[1]) && a[2..] == b[1..];
                        out.push(check(
                            &format!("common_part_{}", l.n),
                            ok,
                            "A_n = 00 C_n, B_n = 1 C_n",
                        ));
                        out.push(check(
                            &format!("stored_length_{}", l.n),
                            l.length == BigUint::from(la - 2),
                            format!("l_n = {}", la - 2),
                        ));
                        if let Some((pa, _)) = prev {
                            let ok = la - 2 == 4 * (pa - 2) + 4;
                            out.push(check(
                                &format!("length_recurrence_{}", l.n),
                                ok,
                                format!("{} = 4*{} + 4", la - 2, pa - 2),
                            ));
                        }
                    }
                    Family::Eta => {
                        out.push(check(
                            &format!("stored_length_{}", l.n),
                            l.length == BigUint::from(la) && lb + 1 == la,
                            format!("l_n = {la}"),
                        ));
                        if let Some((pa, _)) = prev {
                            let ok = la + 2 == 4 * pa;
                            out.push(check(
                                &format!("length_recurrence_{}", l.n),
                                ok,
                                format!("{la} = 4*{pa} - 2"),
                            ));
                        }
                    }
                    _ => {
                        let ok = a.first() == Some(&0) && b.first() == Some(&1) && a[1..] == b[1..];
                        out.push(check(
                            &format!("common_part_{}", l.n),
                            ok,
                            "A_n = a C_n, B_n = b C_n",
                        ));
                    }
                }
                prev = Some((la, lb));
            }
        }
    }
    Ok(out)
}

/// num/den as f64 without overflowing on huge operands.
pub fn ratio_f64(num: &BigUint, den: &BigUint) -> f64 {
    let shift = den.bits().saturating_sub(60);
    let n = (num >> shift).to_f64().unwrap_or(f64::INFINITY);
    let d = (den >> shift).to_f64().unwrap_or(f64::INFINITY);
    n / d
}

#[derive(Clone, Debug, Serialize)]
pub struct DjrRatioReport {
    pub depth: u32,
    /// (β_n, α_n) as decimal strings.
    pub exact: Vec<(String, String)>,
    pub ratios: Vec<f64>,
    pub monotone: bool,
    pub bounded_by_one: bool,
    pub limit: f64,
    pub tile_lengths: [f64; 2],
    /// t_n / h_n with t_n = α_n|J_0| + β_n|J_1|.
    pub tile_ratios: Vec<f64>,
    pub tile_differences: Vec<f64>,
    pub differences_shrinking: bool,
}

pub fn djr_ratio_limit(depth: u32, tile_lengths: [f64; 2]) -> Result<DjrRatioReport> {
    if depth < 2 {
        return invalid("depth must be at least 2");
    }
    let h = build_hierarchy(Family::Djr, depth)?;
    let mut exact = Vec::new();
    let mut ratios = Vec::new();
    let mut monotone = true;
    let mut bounded_by_one = true;
    let mut tile_ratios = Vec::new();
    for l in h.levels() {
        exact.push((l.beta.to_string(), l.alpha.to_string()));
        if let Some(prev) = (l.n as usize)
            .checked_sub(2)
            .and_then(|i| h.levels().get(i))
        {
            monotone &= &l.beta * &prev.alpha > &prev.beta * &l.alpha;
        }
        bounded_by_one &= l.beta <= l.alpha;
        let r = ratio_f64(&l.beta, &l.alpha);
        ratios.push(r);
        let wa = ratio_f64(&l.alpha, &l.length);
        let wb = ratio_f64(&l.beta, &l.length);
        tile_ratios.push(wa * tile_lengths[0] + wb * tile_lengths[1]);
    }
    let tile_differences: Vec<f64> = tile_ratios
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .collect();
    let differences_shrinking = tile_differences.windows(2).all(|w| w[1] <= w[0]);
    Ok(DjrRatioReport {
        depth,
        exact,
        limit: *ratios.last().unwrap(),
        ratios,
        monotone,
        bounded_by_one,
        tile_lengths,
        tile_ratios,
        tile_differences,
        differences_shrinking,
    })
}

/// Limit letter frequencies of the DJR system.
pub fn djr_letter_frequencies() -> [f64; 2] {
    let r = djr_ratio_limit(12, [1.0, 1.0])
        .expect("depth 12 is valid")
        .limit;
    [1.0 / (1.0 + r), r / (1.0 + r)]
}

#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub family: String,
    pub level: Option<u32>,
    pub note: String,
}

impl Provenance {
    pub fn new(family: &str, level: Option<u32>, note: impl Into<String>) -> Self {
        Provenance {
            family: family.to_string(),
            level,
            note: note.into(),
        }
    }
}

/// A finite piece of a bi-infinite sequence; `symbols[0]` sits at index `lo`.
#[derive(Clone, Debug)]
pub struct SequenceWindow {
    symbols: Arc<Vec<Letter>>,
    lo: i64,
    pub provenance: Provenance,
    pub alphabet: Alphabet,
}

impl SequenceWindow {
    pub fn new(
        symbols: Vec<Letter>,
        lo: i64,
        provenance: Provenance,
        alphabet: Alphabet,
    ) -> Result<Self> {
        if lo > 0 || lo + symbols.len() as i64 <= 0 {
            return invalid(format!(
                "window [{lo}, {}) does not straddle index 0",
                lo + symbols.len() as i64
            ));
        }
        Ok(SequenceWindow {
            symbols: Arc::new(symbols),
            lo,
            provenance,
            alphabet,
        })
    }

    /// Width 2·half_width+1 subword of `block` with index 0 at `center`.
    pub fn cut(
        block: &[Letter],
        center: i64,
        half_width: usize,
        provenance: Provenance,
        alphabet: Alphabet,
    ) -> Result<Self> {
        let hw = half_width as i64;
        if center < hw || center + hw >= block.len() as i64 {
            return invalid(format!(
                "center {center} with half width {half_width} leaves a block of length {}",
                block.len()
            ));
        }
        let s = (center - hw) as usize;
        Self::new(
            block[s..s + 2 * half_width + 1].to_vec(),
            -hw,
            provenance,
            alphabet,
        )
    }

    pub fn symbols(&self) -> &[Letter] {
        &self.symbols
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    /// One past the last index.
    pub fn hi(&self) -> i64 {
        self.lo + self.symbols.len() as i64
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn get(&self, i: i64) -> Option<Letter> {
        if i < self.lo || i >= self.hi() {
            return None;
        }
        Some(self.symbols[(i - self.lo) as usize])
    }

    /// Symbols at indices [from, to).
    pub fn slice(&self, from: i64, to: i64) -> Option<&[Letter]> {
        if from < self.lo || to > self.hi() || from > to {
            return None;
        }
        Some(&self.symbols[(from - self.lo) as usize..(to - self.lo) as usize])
    }

    pub fn covers(&self, from: i64, to: i64) -> bool {
        from >= self.lo && to <= self.hi()
    }

    /// The window of Tᵏx, where (Tᵏx)_i = x_{i+k}.
    pub fn shifted(&self, k: i64) -> Result<Self> {
        let lo = self.lo - k;
        if lo > 0 || lo + self.len() as i64 <= 0 {
            return invalid(format!("shift {k} moves index 0 outside the window"));
        }
        Ok(SequenceWindow {
            symbols: self.symbols.clone(),
            lo,
            provenance: Provenance::new(
                &self.provenance.family,
                self.provenance.level,
                format!("{} shifted by {k}", self.provenance.note),
            ),
            alphabet: self.alphabet.clone(),
        })
    }

    pub fn render(&self) -> String {
        self.alphabet.render(&self.symbols)
    }
}

/// Lazily addressable DJR blocks beyond the materialization cap.
#[derive(Clone, Debug)]
pub struct DjrBlocks {
    words: Vec<Arc<Word>>,
    lengths: Vec<u128>,
}

impl DjrBlocks {
    /// Levels whose lengths fit in u128.
    pub fn new() -> Self {
        let h = build_hierarchy(Family::Djr, 14).expect("valid depth");
        let words = h.levels().iter().filter_map(|l| l.b.clone()).collect();
        let lengths = h
            .levels()
            .iter()
            .filter_map(|l| l.length.to_u128())
            .collect();
        DjrBlocks { words, lengths }
    }

    pub fn materialized_depth(&self) -> u32 {
        self.words.len() as u32
    }

    pub fn max_level(&self) -> u32 {
        self.lengths.len() as u32
    }

    pub fn word(&self, n: u32) -> Option<&Arc<Word>> {
        self.words.get(n as usize - 1)
    }

    pub fn length(&self, n: u32) -> u128 {
        self.lengths[n as usize - 1]
    }

    /// Symbols [start, start+len) of B_level.
    pub fn extract(&self, level: u32, start: u128, len: usize) -> Result<Vec<Letter>> {
        if level == 0 || level > self.max_level() {
            return invalid(format!(
                "DJR level {level} outside 1..={}",
                self.max_level()
            ));
        }
        if start + len as u128 > self.length(level) {
            return invalid("extraction range exceeds the block");
        }
        let mut out = Vec::with_capacity(len);
        self.fill(level, start, len as u128, &mut out);
        Ok(out)
    }

    fn fill(&self, level: u32, start: u128, len: u128, out: &mut Vec<Letter>) {
        if len == 0 {
            return;
        }
        if let Some(w) = self.word(level) {
            out.extend_from_slice(&w[start as usize..(start + len) as usize]);
            return;
        }
        let h = self.length(level - 1);
        let reps = 1u128 << (level - 1);
        let half = reps * h;
        let mut pos = start;
        let end = start + len;
        while pos < end {
            if pos != half {
                let rel = if pos < half { pos } else { pos - half - 1 };
                let seg_end = if pos < half { half } else { 2 * half + 1 };
                let off = rel % h;
                let take = (h - off).min(end - pos).min(seg_end - pos);
                self.fill(level - 1, off, take, out);
                pos += take;
            } else {
                out.push(1);
                pos += 1;
            }
        }
    }

    /// Occurrences of `pattern` in B_level, counted exactly through the
    /// junction recurrence from the least materialized level that holds it.
    pub fn count(&self, pattern: &[Letter], level: u32) -> Result<BigUint> {
        if pattern.is_empty() {
            return invalid("pattern must be nonempty");
        }
        let len = pattern.len() as u128;
        let base = (1..=self.materialized_depth())
            .find(|&j| self.length(j) >= len)
            .ok_or_else(|| {
                Error::Precondition("pattern longer than every materialized block".into())
            })?;
        if level < base {
            return Ok(BigUint::from(count_occurrences(
                &self.word(level).unwrap()[..],
                pattern,
            )));
        }
        let w = self.word(base).unwrap();
        let k = pattern.len() - 1;
        let suffix = &w[w.len() - k..];
        let prefix = &w[..k];
        let mut bb = suffix.to_vec();
        bb.extend_from_slice(prefix);
        let mut b1b = suffix.to_vec();
        b1b.push(1);
        b1b.extend_from_slice(prefix);
        let c_bb = count_occurrences(&bb, pattern);
        let c_b1b = count_occurrences(&b1b, pattern);
        let mut count = BigUint::from(count_occurrences(w, pattern));
        for j in base..level {
            let copies = BigUint::one() << j;
            count = &count * &copies * 2u32 + (&copies * 2u32 - 2u32) * c_bb + c_b1b;
        }
        Ok(count)
    }

    /// Big-integer length of B_n for any n.
    pub fn big_length(n: u32) -> BigUint {
        build_hierarchy(Family::Djr, n)
            .expect("valid depth")
            .levels()[n as usize - 1]
            .length
            .clone()
    }
}

impl Default for DjrBlocks {
    fn default() -> Self {
        Self::new()
    }
}

/// A long word that windows are sampled from.
#[derive(Clone, Debug)]
pub enum SequenceSource {
    Materialized {
        family: String,
        level: Option<u32>,
        word: Arc<Word>,
        alphabet: Alphabet,
    },
    Djr {
        level: u32,
        blocks: Arc<DjrBlocks>,
    },
}

impl SequenceSource {
    pub fn len(&self) -> u128 {
        match self {
            SequenceSource::Materialized { word, .. } => word.len() as u128,
            SequenceSource::Djr { level, blocks } => blocks.length(*level),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn family(&self) -> String {
        match self {
            SequenceSource::Materialized { family, .. } => family.clone(),
            SequenceSource::Djr { .. } => "djr".into(),
        }
    }

    pub fn level(&self) -> Option<u32> {
        match self {
            SequenceSource::Materialized { level, .. } => *level,
            SequenceSource::Djr { level, .. } => Some(*level),
        }
    }

    pub fn alphabet(&self) -> Alphabet {
        match self {
            SequenceSource::Materialized { alphabet, .. } => alphabet.clone(),
            SequenceSource::Djr { .. } => Alphabet::digits(2),
        }
    }

    pub fn extract(&self, start: u128, len: usize) -> Result<Vec<Letter>> {
        match self {
            SequenceSource::Materialized { word, .. } => {
                if start + len as u128 > word.len() as u128 {
                    return invalid("extraction range exceeds the source");
                }
                Ok(word[start as usize..start as usize + len].to_vec())
            }
            SequenceSource::Djr { level, blocks } => blocks.extract(*level, start, len),
        }
    }

    /// Window [center−before, center+after] with index 0 at `center`.
    pub fn window_at(&self, center: u128, before: usize, after: usize) -> Result<SequenceWindow> {
        if center < before as u128 || center + after as u128 >= self.len() {
            return invalid(format!(
                "window around {center} does not fit a source of length {}",
                self.len()
            ));
        }
        let symbols = self.extract(center - before as u128, before + after + 1)?;
        let prov = Provenance::new(&self.family(), self.level(), format!("center {center}"));
        SequenceWindow::new(symbols, -(before as i64), prov, self.alphabet())
    }

    pub fn random_center<R: Rng>(&self, rng: &mut R, before: usize, after: usize) -> Result<u128> {
        let total = before as u128 + after as u128 + 1;
        if total > self.len() {
            return Err(Error::Inconclusive(format!(
                "source of length {} cannot hold a window of {total} symbols",
                self.len()
            )));
        }
        Ok(before as u128 + rng.gen_range(0..=self.len() - total))
    }

    pub fn random_window<R: Rng>(
        &self,
        rng: &mut R,
        before: usize,
        after: usize,
    ) -> Result<SequenceWindow> {
        let c = self.random_center(rng, before, after)?;
        self.window_at(c, before, after)
    }
}

/// The window of width 2·half_width+1 around `center_offset` in the primary block.
pub fn window_from_hierarchy(
    h: &BlockHierarchy,
    level: u32,
    center_offset: i64,
    half_width: usize,
) -> Result<SequenceWindow> {
    let kind = if *h.family() == Family::Djr {
        BlockKind::B
    } else {
        BlockKind::A
    };
    h.window(level, kind, center_offset, half_width)
}
