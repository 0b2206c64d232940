//! Desubstitution: unique block decompositions of admissible words, window
//! orbit comparison and structure witnesses.

mod witness;

use serde::Serialize;

pub use witness::{
    find_structure_witness, witness_intervals, BoundsReport, Intervals, SampledWitness,
    StructureWitness, WitnessCase, WitnessSearch, SAMPLE_LEVEL,
};

use crate::error::{inconclusive, invalid, precondition, Error, Result};
use crate::hierarchy::{Family, SequenceWindow};
use crate::substitution::{FactorSet, Substitution};
use crate::word::{contains, Alphabet, Letter, Word};

/// Parses of short words beyond this count are dropped from `all_parses`.
pub const MAX_REPORTED_PARSES: usize = 4096;

/// One block of a parse scheme: the image ζ(v) = v·C.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockShape {
    pub v: Word,
    pub c: Word,
    pub image: Word,
}

#[derive(Clone, Debug)]
pub struct Recognizer {
    family: Family,
    sub: Substitution,
    blocks: Vec<BlockShape>,
    anchor: Word,
    threshold: usize,
    factors: FactorSet,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ParseItem {
    pub block: usize,
    pub start: usize,
    pub v: String,
    pub c: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ParseCandidate {
    pub k1: String,
    pub items: Vec<ParseItem>,
    pub k2: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ParseResult {
    pub k1: String,
    pub items: Vec<ParseItem>,
    pub k2: String,
    pub unique: bool,
    pub parse_count: usize,
    pub all_parses: Vec<ParseCandidate>,
}

/// A parse in index form: K1 = w[..k1], blocks, K2 = w[k2..].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawParse {
    pub k1: usize,
    pub blocks: Vec<(usize, u8)>,
    pub k2: usize,
}

struct Node {
    pos: usize,
    block: u8,
    parent: usize,
}

impl Recognizer {
    pub fn new(family: &Family) -> Result<Self> {
        let sub = family.substitution().ok_or_else(|| {
            Error::Precondition("parsing applies to θ, η and common-tail families".into())
        })?;
        let blocks = match family {
            Family::Theta | Family::Eta => [vec![0, 0], vec![1]]
                .into_iter()
                .map(|v| {
                    let image = sub.expand(&v, 1).expect("valid letters");
                    BlockShape {
                        c: Word::from(&image[v.len()..]),
                        v: Word::new(v),
                        image,
                    }
                })
                .collect(),
            Family::GeneralS(s) => {
                s.common_tail_shape()?;
                (0..2u8)
                    .map(|a| {
                        let image = s.image(a).clone();
                        BlockShape {
                            v: Word::new(vec![a]),
                            c: Word::from(&image[1..]),
                            image,
                        }
                    })
                    .collect()
            }
            Family::Djr => unreachable!(),
        };
        let anchor = match family {
            Family::Theta | Family::Eta => sub.expand(&[1], 1)?,
            _ => {
                let lang = sub.language();
                let seed = if lang.pairs().contains(&[1, 1]) {
                    [1, 1, 0]
                } else {
                    [0, 0, 1]
                };
                sub.expand(&seed, 1)?
            }
        };
        let threshold = anchor_threshold(&sub, &anchor)?;
        let factors = FactorSet::new(&sub, 2 * threshold);
        Ok(Recognizer {
            family: family.clone(),
            sub,
            blocks,
            anchor,
            threshold,
            factors,
        })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn substitution(&self) -> &Substitution {
        &self.sub
    }

    pub fn blocks(&self) -> &[BlockShape] {
        &self.blocks
    }

    pub fn anchor(&self) -> &Word {
        &self.anchor
    }

    /// Least m such that every admissible word of length m contains the anchor.
    pub fn threshold(&self) -> usize {
        self.threshold
    }

    pub fn alphabet(&self) -> &Alphabet {
        self.sub.alphabet()
    }

    pub fn is_admissible(&self, w: &[Letter]) -> bool {
        self.factors.admits(w)
    }

    fn max_block(&self) -> usize {
        self.blocks.iter().map(|b| b.image.len()).max().unwrap_or(0)
    }

    fn is_proper_suffix(&self, w: &[Letter]) -> bool {
        self.blocks
            .iter()
            .any(|b| w.len() < b.image.len() && b.image.ends_with(w))
    }

    fn is_proper_prefix(&self, w: &[Letter]) -> bool {
        self.blocks
            .iter()
            .any(|b| w.len() < b.image.len() && b.image.starts_with(w))
    }

    /// Every decomposition K1·blocks·K2 of `w`, up to `limit` of them.
    pub fn enumerate(&self, w: &[Letter], limit: usize) -> Vec<RawParse> {
        let mut out = Vec::new();
        let max_k1 = self.max_block().saturating_sub(1).min(w.len());
        for k1 in 0..=max_k1 {
            if k1 > 0 && !self.is_proper_suffix(&w[..k1]) {
                continue;
            }
            let mut nodes: Vec<Node> = vec![Node {
                pos: k1,
                block: u8::MAX,
                parent: usize::MAX,
            }];
            let mut stack = vec![0usize];
            while let Some(id) = stack.pop() {
                let pos = nodes[id].pos;
                let rest = &w[pos..];
                if self.is_proper_prefix(rest) {
                    let mut blocks = Vec::new();
                    let mut cur = id;
                    while nodes[cur].parent != usize::MAX {
                        let parent = nodes[cur].parent;
                        blocks.push((nodes[parent].pos, nodes[cur].block));
                        cur = parent;
                    }
                    blocks.reverse();
                    out.push(RawParse {
                        k1,
                        blocks,
                        k2: pos,
                    });
                    if out.len() >= limit {
                        return out;
                    }
                }
                for (bi, b) in self.blocks.iter().enumerate().rev() {
                    if rest.starts_with(&b.image) {
                        nodes.push(Node {
                            pos: pos + b.image.len(),
                            block: bi as u8,
                            parent: id,
                        });
                        stack.push(nodes.len() - 1);
                    }
                }
            }
        }
        out
    }

    fn render_raw(&self, w: &[Letter], raw: &RawParse) -> ParseCandidate {
        let a = self.alphabet();
        ParseCandidate {
            k1: a.render(&w[..raw.k1]),
            items: raw
                .blocks
                .iter()
                .map(|&(start, bi)| {
                    let b = &self.blocks[bi as usize];
                    ParseItem {
                        block: bi as usize,
                        start,
                        v: a.render(&b.v),
                        c: a.render(&b.c),
                    }
                })
                .collect(),
            k2: a.render(&w[raw.k2..]),
        }
    }

    /// Decomposition of an admissible word into K1, images v·C and K2.
    pub fn parse(&self, w: &[Letter]) -> Result<ParseResult> {
        if let Some(i) = self.factors.first_violation(w) {
            return invalid(format!("word is not admissible (bad factor at {i})"));
        }
        let limit = if w.len() >= self.threshold {
            2
        } else {
            MAX_REPORTED_PARSES
        };
        let raws = self.enumerate(w, limit);
        let Some(first) = raws.first() else {
            return inconclusive("admissible word has no decomposition");
        };
        let unique = raws.len() == 1;
        let head = self.render_raw(w, first);
        let all_parses = if unique {
            Vec::new()
        } else {
            raws.iter().map(|r| self.render_raw(w, r)).collect()
        };
        Ok(ParseResult {
            k1: head.k1,
            items: head.items,
            k2: head.k2,
            unique,
            parse_count: raws.len(),
            all_parses,
        })
    }

    /// Distinct words v with expand(v) = image, read off every parse whose
    /// K1 and K2 are empty or the image of a single letter.
    pub fn preimages(&self, image: &[Letter]) -> Vec<Word> {
        let singles: Vec<(Letter, Word)> = (0..self.sub.size() as Letter)
            .map(|a| (a, self.sub.image(a).clone()))
            .collect();
        let letter_of = |part: &[Letter]| -> Option<Option<Letter>> {
            if part.is_empty() {
                return Some(None);
            }
            singles
                .iter()
                .find(|(_, img)| &img[..] == part)
                .map(|(a, _)| Some(*a))
        };
        let mut out: Vec<Word> = Vec::new();
        for raw in self.enumerate(image, MAX_REPORTED_PARSES) {
            let (Some(head), Some(tail)) =
                (letter_of(&image[..raw.k1]), letter_of(&image[raw.k2..]))
            else {
                continue;
            };
            let mut v: Vec<Letter> = head.into_iter().collect();
            for &(_, bi) in &raw.blocks {
                v.extend_from_slice(&self.blocks[bi as usize].v);
            }
            v.extend(tail);
            let v = Word::new(v);
            if self
                .sub
                .expand(&v, 1)
                .map(|e| &e[..] == image)
                .unwrap_or(false)
                && !out.contains(&v)
            {
                out.push(v);
            }
        }
        out
    }

    pub fn parse_str(&self, text: &str) -> Result<ParseResult> {
        self.parse(&self.alphabet().parse(text)?)
    }

    /// Preimage letters of the full blocks of the unique parse, with the
    /// coordinate of each letter's image start.
    pub fn desubstitute(&self, w: &[Letter], coords: &[i64]) -> Result<(Vec<Letter>, Vec<i64>)> {
        let raws = self.enumerate(w, 2);
        match raws.len() {
            0 => return inconclusive("no decomposition"),
            1 => {}
            _ => {
                return inconclusive(format!(
                    "ambiguous decomposition of a {}-symbol word",
                    w.len()
                ))
            }
        }
        let mut letters = Vec::new();
        let mut pos = Vec::new();
        for &(start, bi) in &raws[0].blocks {
            let mut p = start;
            for &v in self.blocks[bi as usize].v.iter() {
                letters.push(v);
                pos.push(coords[p]);
                p += self.sub.image(v).len();
            }
        }
        Ok((letters, pos))
    }

    /// Level-1..=depth block decompositions of a window: (start, kind) per block.
    pub fn decompose(&self, x: &SequenceWindow, depth: u32) -> Result<Vec<Vec<(i64, u8)>>> {
        let levels = self.decompose_partial(x, depth);
        if levels.len() < depth as usize {
            return inconclusive(format!("window decomposes only to level {}", levels.len()));
        }
        Ok(levels)
    }

    /// As many levels of `decompose` as the window allows, up to `depth`.
    pub fn decompose_partial(&self, x: &SequenceWindow, depth: u32) -> Vec<Vec<(i64, u8)>> {
        let mut word: Vec<Letter> = x.symbols().to_vec();
        let mut coords: Vec<i64> = (x.lo()..x.hi()).collect();
        let mut levels = Vec::new();
        for _ in 1..=depth {
            if word.len() < self.threshold {
                break;
            }
            let raws = self.enumerate(&word, 2);
            if raws.len() != 1 {
                break;
            }
            let level: Vec<(i64, u8)> = raws[0]
                .blocks
                .iter()
                .map(|&(s, b)| (coords[s], b))
                .collect();
            let mut next = Vec::new();
            let mut next_coords = Vec::new();
            for &(start, bi) in &raws[0].blocks {
                let mut p = start;
                for &v in self.blocks[bi as usize].v.iter() {
                    next.push(v);
                    next_coords.push(coords[p]);
                    p += self.sub.image(v).len();
                }
            }
            levels.push(level);
            word = next;
            coords = next_coords;
        }
        levels
    }
}

fn anchor_threshold(sub: &Substitution, anchor: &[Letter]) -> Result<usize> {
    let lang = sub.language();
    for len in anchor.len()..=64 {
        if lang
            .words_of_length(len)
            .iter()
            .all(|w| contains(w, anchor))
        {
            return Ok(len);
        }
    }
    precondition("anchor word is not forced by words of length ≤ 64")
}

pub fn parse_threshold(family: &Family) -> Result<usize> {
    Ok(Recognizer::new(family)?.threshold())
}

pub fn parse(family: &Family, w: &[Letter]) -> Result<ParseResult> {
    Recognizer::new(family)?.parse(w)
}

/// Shift k with y = Tᵏx on the common range, smallest |k| first, negative first on ties.
pub fn same_orbit(x: &SequenceWindow, y: &SequenceWindow, horizon: i64) -> Result<Option<i64>> {
    if horizon < 0 {
        return invalid("horizon must be nonnegative");
    }
    let overlap = |k: i64| (y.hi().min(x.hi() - k) - y.lo().max(x.lo() - k)).max(0);
    for k in [-horizon, horizon] {
        if overlap(k) < 2 * horizon.max(1) {
            return inconclusive(format!(
                "windows overlap by {} < {} after shift {k}",
                overlap(k),
                2 * horizon.max(1)
            ));
        }
    }
    let mut order = vec![0];
    for d in 1..=horizon {
        order.push(-d);
        order.push(d);
    }
    for k in order {
        let from = y.lo().max(x.lo() - k);
        let to = y.hi().min(x.hi() - k);
        if y.slice(from, to) == x.slice(from + k, to + k) {
            return Ok(Some(k));
        }
    }
    Ok(None)
}
