//! The systems experiments run on: a primitive substitution or the DJR blocks,
//! with long admissible source words to cut windows from.

use std::sync::Arc;

use num_bigint::BigUint;
use rand::Rng;

use crate::error::{invalid, Result};
use crate::hierarchy::{
    djr_letter_frequencies, ratio_f64, DjrBlocks, SequenceSource, SequenceWindow,
    MATERIALIZATION_CAP,
};
use crate::substitution::Substitution;
use crate::word::{Alphabet, Letter, Word};

/// DJR level windows are sampled from; frequencies are counted one level deeper.
pub const DJR_SOURCE_LEVEL: u32 = 12;

#[derive(Clone, Debug)]
pub enum SystemKind {
    Substitution(Substitution),
    Djr(Arc<DjrBlocks>),
}

#[derive(Clone, Debug)]
pub struct System {
    name: String,
    kind: SystemKind,
    sources: Vec<SequenceSource>,
}

impl System {
    /// `theta`, `eta`, `theta-tilde`, `eta-tilde`, `djr` or `file:<path>`.
    pub fn from_spec(spec: &str) -> Result<System> {
        if spec == "djr" {
            return Ok(System::djr());
        }
        if let Some(path) = spec.strip_prefix("file:") {
            let text = std::fs::read_to_string(path)
                .or_else(|e| invalid(format!("cannot read {path}: {e}")))?;
            return System::substitution(Substitution::parse_text(path, &text)?);
        }
        System::substitution(Substitution::builtin(spec)?)
    }

    pub fn djr() -> System {
        let blocks = Arc::new(DjrBlocks::new());
        let src = SequenceSource::Djr {
            level: DJR_SOURCE_LEVEL,
            blocks: blocks.clone(),
        };
        System {
            name: "djr".into(),
            kind: SystemKind::Djr(blocks),
            sources: vec![src.clone(), src],
        }
    }

    /// Sources are ζ^k(p) for p a prefix of ζ(a), as long as the cap allows.
    pub fn substitution(sub: Substitution) -> Result<System> {
        if !sub.is_primitive() {
            return invalid(format!("{} is not primitive", sub.name()));
        }
        let mut sources = Vec::new();
        for a in 0..sub.size() as Letter {
            let seed = Word::new(vec![a]);
            let k = (1..)
                .take_while(|&k| {
                    sub.expand(&seed, k)
                        .map(|w| w.len() <= MATERIALIZATION_CAP)
                        .unwrap_or(false)
                })
                .last()
                .unwrap_or(0);
            let image = sub.image(a);
            let mut best = sub.expand(&seed, k)?;
            for end in 2..=image.len() {
                match sub.expand(&image[..end], k) {
                    Ok(w) if w.len() <= MATERIALIZATION_CAP => best = w,
                    _ => break,
                }
            }
            sources.push(SequenceSource::Materialized {
                family: sub.name().to_string(),
                level: Some(k),
                word: Arc::new(best),
                alphabet: sub.alphabet().clone(),
            });
        }
        Ok(System {
            name: sub.name().to_string(),
            kind: SystemKind::Substitution(sub),
            sources,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &SystemKind {
        &self.kind
    }

    pub fn substitution_ref(&self) -> Option<&Substitution> {
        match &self.kind {
            SystemKind::Substitution(s) => Some(s),
            SystemKind::Djr(_) => None,
        }
    }

    pub fn alphabet(&self) -> Alphabet {
        self.sources[0].alphabet()
    }

    pub fn sources(&self) -> &[SequenceSource] {
        &self.sources
    }

    /// Longest window any source holds.
    pub fn max_window(&self) -> u128 {
        self.sources.iter().map(|s| s.len()).min().unwrap_or(0)
    }

    pub fn letter_frequencies(&self) -> Result<Vec<f64>> {
        match &self.kind {
            SystemKind::Substitution(s) => Ok(s.pf_frequencies()?.frequencies),
            SystemKind::Djr(_) => Ok(djr_letter_frequencies().to_vec()),
        }
    }

    /// μ([u]): k-block eigenvector for substitutions, count in a deep block for DJR.
    pub fn word_frequency(&self, u: &[Letter]) -> Result<f64> {
        match &self.kind {
            SystemKind::Substitution(s) => s.word_frequency(u),
            SystemKind::Djr(blocks) => {
                if u.iter().any(|&a| a > 1) {
                    return invalid("DJR words are over {0, 1}");
                }
                let level = DJR_SOURCE_LEVEL + 1;
                let count = blocks.count(u, level)?;
                let len = BigUint::from(blocks.length(level));
                Ok(ratio_f64(&count, &len))
            }
        }
    }

    /// A window of `len` symbols from source `which`, index 0 in the middle.
    pub fn random_window<R: Rng>(
        &self,
        rng: &mut R,
        which: usize,
        len: usize,
    ) -> Result<SequenceWindow> {
        if len == 0 {
            return invalid("window length must be positive");
        }
        let src = &self.sources[which % self.sources.len()];
        let before = len / 2;
        src.random_window(rng, before, len - before - 1)
    }
}
