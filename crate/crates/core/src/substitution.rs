//! Substitutions, their matrices, letter and word frequencies, admissibility.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{invalid, precondition, Error, Result};
use crate::perron::{self, closed_form_2x2};
use crate::word::{contains, Alphabet, Letter, Word};

/// Images longer than this are refused by `expand`.
pub const EXPAND_LIMIT: usize = 200_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Substitution {
    name: String,
    alphabet: Alphabet,
    images: Vec<Word>,
}

impl Substitution {
    pub fn new(name: impl Into<String>, alphabet: Alphabet, images: Vec<Word>) -> Result<Self> {
        if images.len() != alphabet.size() {
            return invalid(format!(
                "{} images for an alphabet of size {}",
                images.len(),
                alphabet.size()
            ));
        }
        for (j, img) in images.iter().enumerate() {
            if img.is_empty() {
                return invalid(format!("image of letter {j} is empty"));
            }
            if let Some(&a) = img.iter().find(|&&a| a as usize >= alphabet.size()) {
                return invalid(format!(
                    "image of letter {j} uses letter {a} outside the alphabet"
                ));
            }
        }
        Ok(Substitution {
            name: name.into(),
            alphabet,
            images,
        })
    }

    fn from_strs(name: &str, alphabet: Alphabet, images: &[&str]) -> Self {
        let images = images.iter().map(|s| alphabet.parse(s).unwrap()).collect();
        Substitution::new(name, alphabet, images).unwrap()
    }

    /// θ: 0 → 001, 1 → 11001.
    pub fn theta() -> Self {
        Self::from_strs("theta", Alphabet::digits(2), &["001", "11001"])
    }

    /// η: 0 → 001, 1 → 11100.
    pub fn eta() -> Self {
        Self::from_strs("eta", Alphabet::digits(2), &["001", "11100"])
    }

    pub fn theta_tilde() -> Self {
        Self::from_strs("theta-tilde", Alphabet::letters(2), &["abab", "bbab"])
    }

    pub fn eta_tilde() -> Self {
        Self::from_strs("eta-tilde", Alphabet::letters(2), &["abab", "bbba"])
    }

    /// s(a) = aA, s(b) = bA.
    pub fn common_tail(tail: &str) -> Result<Self> {
        let alphabet = Alphabet::letters(2);
        let a = alphabet.parse(tail)?;
        let images = vec![Word::new(vec![0]).concat(&a), Word::new(vec![1]).concat(&a)];
        Substitution::new(format!("s[{tail}]"), alphabet, images)
    }

    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "theta" => Ok(Self::theta()),
            "eta" => Ok(Self::eta()),
            "theta-tilde" => Ok(Self::theta_tilde()),
            "eta-tilde" => Ok(Self::eta_tilde()),
            "djr" => invalid("djr is a block system, not a stationary substitution"),
            other => invalid(format!("unknown substitution {other:?}")),
        }
    }

    /// Parses lines `x -> w`; the left-hand symbols define the alphabet in order.
    pub fn parse_text(name: &str, text: &str) -> Result<Self> {
        let mut symbols = Vec::new();
        let mut rhs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((l, r)) = line.split_once("->") else {
                return invalid(format!("line {}: expected `x -> w`", lineno + 1));
            };
            let mut lc = l.trim().chars();
            let (Some(c), None) = (lc.next(), lc.next()) else {
                return invalid(format!("line {}: left side must be one symbol", lineno + 1));
            };
            symbols.push(c);
            rhs.push(r.trim().to_string());
        }
        let alphabet = Alphabet::new(symbols)?;
        let images = rhs
            .iter()
            .map(|r| alphabet.parse(r))
            .collect::<Result<Vec<_>>>()?;
        Substitution::new(name, alphabet, images)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn size(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    pub fn image(&self, a: Letter) -> &Word {
        &self.images[a as usize]
    }

    fn check_word(&self, w: &[Letter]) -> Result<()> {
        match w.iter().find(|&&a| a as usize >= self.size()) {
            Some(a) => invalid(format!(
                "letter {a} outside alphabet of size {}",
                self.size()
            )),
            None => Ok(()),
        }
    }

    fn apply_once(&self, w: &[Letter]) -> Vec<Letter> {
        let len: usize = w.iter().map(|&a| self.images[a as usize].len()).sum();
        let mut out = Vec::with_capacity(len);
        for &a in w {
            out.extend_from_slice(&self.images[a as usize]);
        }
        out
    }

    /// ζⁿ(w).
    pub fn expand(&self, w: &[Letter], n: u32) -> Result<Word> {
        self.check_word(w)?;
        let lens = self.image_lengths(n);
        let total = w
            .iter()
            .try_fold(0u128, |acc, &a| lens[a as usize].map(|l| acc + l));
        match total {
            Some(t) if t <= EXPAND_LIMIT as u128 => {}
            _ => return invalid(format!("expansion of length beyond {EXPAND_LIMIT} symbols")),
        }
        let mut cur = w.to_vec();
        for _ in 0..n {
            cur = self.apply_once(&cur);
        }
        Ok(Word::new(cur))
    }

    /// |ζⁿ(a)| per letter, `None` on overflow.
    pub fn image_lengths(&self, n: u32) -> Vec<Option<u128>> {
        let m = self.matrix();
        let mut lens: Vec<Option<u128>> = vec![Some(1); self.size()];
        for _ in 0..n {
            lens = (0..self.size())
                .map(|j| {
                    (0..self.size()).try_fold(0u128, |acc, i| {
                        let c = m.get(i, j) as u128;
                        lens[i]
                            .and_then(|l| l.checked_mul(c))
                            .and_then(|x| acc.checked_add(x))
                    })
                })
                .collect();
        }
        lens
    }

    pub fn matrix(&self) -> SubstitutionMatrix {
        let n = self.size();
        let mut entries = vec![0u64; n * n];
        for (j, img) in self.images.iter().enumerate() {
            for &i in img.iter() {
                entries[i as usize * n + j] += 1;
            }
        }
        SubstitutionMatrix { size: n, entries }
    }

    /// Smallest m with Mᵐ entrywise positive, searched up to size².
    pub fn primitivity_exponent(&self) -> Option<u32> {
        let n = self.size();
        let base: Vec<bool> = self.matrix().entries.iter().map(|&e| e > 0).collect();
        let mut cur = base.clone();
        for m in 1..=(n * n) as u32 {
            if cur.iter().all(|&b| b) {
                return Some(m);
            }
            let mut next = vec![false; n * n];
            for i in 0..n {
                for j in 0..n {
                    next[i * n + j] = (0..n).any(|k| cur[i * n + k] && base[k * n + j]);
                }
            }
            cur = next;
        }
        None
    }

    pub fn is_primitive(&self) -> bool {
        self.primitivity_exponent().is_some()
    }

    pub fn pf_frequencies(&self) -> Result<FrequencyVector> {
        if !self.is_primitive() {
            return precondition(format!("{} is not primitive", self.name));
        }
        let m = self.matrix().as_f64();
        let p = perron::power_iteration(&m)?;
        let (eigenvalue, frequencies) = if self.size() == 2 {
            let (l, v) = closed_form_2x2(&m).expect("primitive 2x2 has a positive off-diagonal");
            let gap = (v[0] - p.vector[0]).abs().max((l - p.eigenvalue).abs() / l);
            if gap > 1e-10 {
                return Err(Error::VerificationFailure(format!(
                    "power iteration disagrees with the closed form by {gap:e}"
                )));
            }
            (l, v.to_vec())
        } else {
            (p.eigenvalue, p.vector)
        };
        let residual = perron::residual(&m, &frequencies, eigenvalue);
        Ok(FrequencyVector {
            frequencies,
            eigenvalue,
            residual,
        })
    }

    /// Letter-by-letter check that ζ has the shape s(a) = aA, s(b) = bA.
    pub fn common_tail_shape(&self) -> Result<Word> {
        if self.size() != 2 {
            return precondition("common-tail shape needs a two-letter alphabet");
        }
        let (a, b) = (&self.images[0], &self.images[1]);
        if a.len() != b.len() {
            return precondition("common-tail shape needs constant length");
        }
        if a.len() < 2 {
            return precondition("images must be longer than one letter");
        }
        if a[0] != 0 || b[0] != 1 || a[1..] != b[1..] {
            return precondition(format!("{} is not of the form a -> aA, b -> bA", self.name));
        }
        Ok(Word::from(&a[1..]))
    }

    /// Runs the letter-disagreement argument for every period 1..=max_period.
    pub fn aperiodicity_check(&self, max_period: usize) -> Result<AperiodicityReport> {
        self.common_tail_shape()?;
        if !self.is_primitive() {
            return precondition(format!("{} is not primitive", self.name));
        }
        let len = self.images[0].len();
        let mut killed = Vec::with_capacity(max_period);
        let mut level = 0u32;
        let mut block_len = 1usize;
        let mut wa = Word::new(vec![0]);
        let mut wb = Word::new(vec![1]);
        for k in 1..=max_period {
            while block_len * len <= k {
                block_len *= len;
                level += 1;
            }
            if wa.len() != block_len * len {
                wa = self.expand(&[0], level + 1)?;
                wb = self.expand(&[1], level + 1)?;
            }
            let survives = wa[k] == 0 && wb[k] == 1;
            killed.push(PeriodCheck {
                k,
                n: level,
                letter_a: wa[k],
                letter_b: wb[k],
                survives,
            });
        }
        let aperiodic = killed.iter().all(|c| !c.survives);
        Ok(AperiodicityReport {
            max_period,
            checks: killed,
            aperiodic,
        })
    }

    pub fn language(&self) -> Language<'_> {
        Language::new(self)
    }

    /// True iff `w` occurs in ζᵐ(a) for some letter a and 1 ≤ m ≤ search_depth.
    ///
    /// Scanning stops early at the first depth whose images already contain
    /// every admissible word of length |w|; deeper images add nothing.
    pub fn is_admissible(&self, w: &[Letter], search_depth: u32) -> Result<bool> {
        if search_depth == 0 {
            return invalid("search depth must be at least 1");
        }
        self.check_word(w)?;
        if w.is_empty() {
            return Ok(true);
        }
        let lang = self.language();
        let all = lang.words_of_length(w.len());
        let mut images: Vec<Vec<Letter>> = (0..self.size() as Letter).map(|a| vec![a]).collect();
        for _ in 1..=search_depth {
            images = images.iter().map(|x| self.apply_once(x)).collect();
            if images.iter().any(|x| contains(x, w)) {
                return Ok(true);
            }
            let seen: BTreeSet<&[Letter]> =
                images.iter().flat_map(|x| x.windows(w.len())).collect();
            if seen.len() == all.len() || images.iter().any(|x| x.len() > EXPAND_LIMIT / 4) {
                return Ok(false);
            }
        }
        Ok(false)
    }

    /// First depth whose letter images contain every admissible word of length `len`.
    pub fn stabilization_depth(&self, len: usize) -> u32 {
        let all = self.language().words_of_length(len);
        let mut images: Vec<Vec<Letter>> = (0..self.size() as Letter).map(|a| vec![a]).collect();
        let mut depth = 0;
        loop {
            depth += 1;
            images = images.iter().map(|x| self.apply_once(x)).collect();
            let seen: BTreeSet<&[Letter]> = images.iter().flat_map(|x| x.windows(len)).collect();
            if seen.len() == all.len() {
                return depth;
            }
        }
    }

    /// Exact frequencies of all admissible words of length k, via the
    /// induced substitution on k-blocks.
    pub fn word_frequencies(&self, k: usize) -> Result<BTreeMap<Word, f64>> {
        if k == 0 {
            return invalid("word length must be positive");
        }
        let letters = self.pf_frequencies()?;
        if k == 1 {
            return Ok((0..self.size())
                .map(|a| (Word::new(vec![a as Letter]), letters.frequencies[a]))
                .collect());
        }
        let states: Vec<Word> = self.language().words_of_length(k).into_iter().collect();
        let index: BTreeMap<&[Letter], usize> = states
            .iter()
            .enumerate()
            .map(|(i, w)| (w.as_slice(), i))
            .collect();
        let n = states.len();
        let mut m = vec![vec![0.0; n]; n];
        for (j, w) in states.iter().enumerate() {
            let img = self.apply_once(w);
            for i in 0..self.images[w[0] as usize].len() {
                let f = &img[i..i + k];
                let r = *index.get(f).ok_or_else(|| {
                    Error::VerificationFailure("k-block image leaves the language".into())
                })?;
                m[r][j] += 1.0;
            }
        }
        let p = perron::power_iteration(&m)?;
        Ok(states.into_iter().zip(p.vector).collect())
    }

    pub fn word_frequency(&self, u: &[Letter]) -> Result<f64> {
        self.check_word(u)?;
        if u.is_empty() {
            return Ok(1.0);
        }
        let table = self.word_frequencies(u.len())?;
        Ok(table.get(u).copied().unwrap_or(0.0))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubstitutionMatrix {
    size: usize,
    entries: Vec<u64>,
}

impl SubstitutionMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    /// Occurrences of letter i in the image of letter j.
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.entries[i * self.size + j]
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.entries.chunks(self.size).map(|r| r.to_vec()).collect()
    }

    pub fn column_sum(&self, j: usize) -> u64 {
        (0..self.size).map(|i| self.get(i, j)).sum()
    }

    pub fn as_f64(&self) -> Vec<Vec<f64>> {
        self.entries
            .chunks(self.size)
            .map(|r| r.iter().map(|&x| x as f64).collect())
            .collect()
    }

    pub fn pow(&self, n: u32) -> Vec<Vec<u128>> {
        let s = self.size;
        let mut acc: Vec<Vec<u128>> = (0..s)
            .map(|i| (0..s).map(|j| (i == j) as u128).collect())
            .collect();
        for _ in 0..n {
            acc = (0..s)
                .map(|i| {
                    (0..s)
                        .map(|j| (0..s).map(|k| acc[i][k] * self.get(k, j) as u128).sum())
                        .collect()
                })
                .collect();
        }
        acc
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FrequencyVector {
    pub frequencies: Vec<f64>,
    pub eigenvalue: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PeriodCheck {
    pub k: usize,
    pub n: u32,
    pub letter_a: Letter,
    pub letter_b: Letter,
    pub survives: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AperiodicityReport {
    pub max_period: usize,
    pub checks: Vec<PeriodCheck>,
    pub aperiodic: bool,
}

/// The exact admissible language of a primitive substitution.
///
/// Admissible two-letter words are closed under ζ; every admissible word of
/// length L is a factor of ζᵏ(u) for an admissible two-letter word u once
/// all images ζᵏ(a) have length at least L.
#[derive(Clone, Debug)]
pub struct Language<'a> {
    sub: &'a Substitution,
    pairs: BTreeSet<[Letter; 2]>,
}

impl<'a> Language<'a> {
    fn new(sub: &'a Substitution) -> Self {
        let mut pairs: BTreeSet<[Letter; 2]> = BTreeSet::new();
        for img in &sub.images {
            for p in img.windows(2) {
                pairs.insert([p[0], p[1]]);
            }
        }
        loop {
            let mut next = pairs.clone();
            for p in &pairs {
                for q in sub.apply_once(p).windows(2) {
                    next.insert([q[0], q[1]]);
                }
            }
            if next.len() == pairs.len() {
                break;
            }
            pairs = next;
        }
        Language { sub, pairs }
    }

    pub fn pairs(&self) -> &BTreeSet<[Letter; 2]> {
        &self.pairs
    }

    fn covering_depth(&self, len: usize) -> u32 {
        let mut k = 0;
        let mut lens: Vec<usize> = vec![1; self.sub.size()];
        while lens.iter().copied().min().unwrap_or(0) < len {
            lens = (0..self.sub.size())
                .map(|a| self.sub.images[a].iter().map(|&b| lens[b as usize]).sum())
                .collect();
            k += 1;
        }
        k
    }

    /// All admissible words of the given length, in lexicographic order.
    pub fn words_of_length(&self, len: usize) -> BTreeSet<Word> {
        let mut out = BTreeSet::new();
        if len == 0 {
            out.insert(Word::empty());
            return out;
        }
        if len == 1 {
            for p in &self.pairs {
                out.insert(Word::new(vec![p[0]]));
                out.insert(Word::new(vec![p[1]]));
            }
            return out;
        }
        let k = self.covering_depth(len);
        for p in &self.pairs {
            let mut img = p.to_vec();
            for _ in 0..k {
                img = self.sub.apply_once(&img);
            }
            for f in img.windows(len) {
                if !out.contains(f) {
                    out.insert(Word::from(f));
                }
            }
        }
        out
    }

    pub fn contains(&self, w: &[Letter]) -> bool {
        if w.len() <= 1 {
            return w.iter().all(|&a| (a as usize) < self.sub.size());
        }
        self.words_of_length(w.len()).contains(w)
    }

    pub fn complexity(&self, len: usize) -> usize {
        self.words_of_length(len).len()
    }
}

/// Admissibility of long words through their factors of a fixed length.
///
/// Exact for words no longer than `factor_len`.
#[derive(Clone, Debug)]
pub struct FactorSet {
    factor_len: usize,
    short: Vec<BTreeSet<Word>>,
}

impl FactorSet {
    pub fn new(sub: &Substitution, factor_len: usize) -> Self {
        let lang = sub.language();
        let short = (0..=factor_len).map(|l| lang.words_of_length(l)).collect();
        FactorSet { factor_len, short }
    }

    pub fn factor_len(&self) -> usize {
        self.factor_len
    }

    pub fn admits(&self, w: &[Letter]) -> bool {
        if w.len() <= self.factor_len {
            return self.short[w.len()].contains(w);
        }
        w.windows(self.factor_len)
            .all(|f| self.short[self.factor_len].contains(f))
    }

    /// Index of the first inadmissible factor, if any.
    pub fn first_violation(&self, w: &[Letter]) -> Option<usize> {
        if w.len() <= self.factor_len {
            return (!self.short[w.len()].contains(w)).then_some(0);
        }
        w.windows(self.factor_len)
            .position(|f| !self.short[self.factor_len].contains(f))
    }
}

impl Substitution {
    pub fn renamed(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Alphabet::digits(2).parse(s).unwrap()
    }

    #[test]
    fn expand_examples() {
        let t = Substitution::theta();
        assert_eq!(t.expand(&w("0"), 1).unwrap(), w("001"));
        assert_eq!(t.expand(&[], 5).unwrap(), Word::empty());
        let hand: String = ["11001", "11001", "001", "001", "11001"].concat();
        assert_eq!(t.expand(&w("1"), 2).unwrap(), w(&hand));
        assert_eq!(hand.len(), 21);
        assert!(t.expand(&[2], 1).is_err());
    }

    #[test]
    fn matrices() {
        assert_eq!(
            Substitution::theta().matrix().rows(),
            vec![vec![2, 2], vec![1, 3]]
        );
        assert_eq!(
            Substitution::eta().matrix().rows(),
            vec![vec![2, 2], vec![1, 3]]
        );
        let id = Substitution::parse_text("id", "0 -> 0\n1 -> 1\n2 -> 2").unwrap();
        assert_eq!(
            id.matrix().rows(),
            vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]
        );
    }

    #[test]
    fn pf_examples() {
        for s in [Substitution::theta(), Substitution::eta()] {
            let f = s.pf_frequencies().unwrap();
            assert_eq!(f.frequencies, vec![0.5, 0.5]);
            assert_eq!(f.eigenvalue, 4.0);
            assert!(f.residual <= 1e-12);
        }
        let tm = Substitution::parse_text("tm", "0 -> 01\n1 -> 10").unwrap();
        let f = tm.pf_frequencies().unwrap();
        assert!((f.frequencies[0] - 0.5).abs() < 1e-15);
        let split = Substitution::parse_text("split", "0 -> 00\n1 -> 11").unwrap();
        assert!(matches!(
            split.pf_frequencies(),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn primitivity_examples() {
        assert_eq!(Substitution::theta().primitivity_exponent(), Some(1));
        assert_eq!(Substitution::eta().primitivity_exponent(), Some(1));
        let split = Substitution::parse_text("split", "0 -> 00\n1 -> 11").unwrap();
        assert!(!split.is_primitive());
        let slow = Substitution::parse_text("slow", "0 -> 1\n1 -> 01").unwrap();
        assert_eq!(slow.primitivity_exponent(), Some(2));
    }

    #[test]
    fn admissibility_examples() {
        let t = Substitution::theta();
        let e = Substitution::eta();
        assert!(t.is_admissible(&w("11001"), 2).unwrap());
        assert!(t.is_admissible(&w("0"), 1).unwrap());
        assert!(!t.is_admissible(&w("000"), 6).unwrap());
        assert!(t.is_admissible(&w("111"), 6).unwrap());
        assert!(!t.is_admissible(&w("1111"), 6).unwrap());
        assert!(e.is_admissible(&w("111"), 6).unwrap());
        assert!(e.is_admissible(&w("000"), 6).unwrap());
        assert!(t.is_admissible(&w("0"), 1).is_ok());
        assert!(t.is_admissible(&w("0"), 0).is_err());
    }

    #[test]
    fn text_format() {
        let s = Substitution::parse_text("x", "# comment\na -> abab\nb -> bbab\n").unwrap();
        assert_eq!(s, Substitution::theta_tilde().renamed("x"));
        assert!(Substitution::parse_text("x", "a -> ac\nb -> b").is_err());
        assert!(Substitution::parse_text("x", "a => b").is_err());
    }

    #[test]
    fn aperiodicity_examples() {
        let r = Substitution::theta_tilde().aperiodicity_check(100).unwrap();
        assert!(r.aperiodic);
        assert_eq!(r.checks.len(), 100);
        assert!(matches!(
            Substitution::eta_tilde().aperiodicity_check(100),
            Err(Error::Precondition(_))
        ));
        let degenerate = Substitution::parse_text("d", "a -> a\nb -> b").unwrap();
        assert!(matches!(
            degenerate.aperiodicity_check(10),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn frequencies_of_pairs() {
        let f = Substitution::theta().word_frequencies(2).unwrap();
        let total: f64 = f.values().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(f[&w("00")] > 0.0);
        assert_eq!(f.len(), 4);
        let triples = Substitution::theta().word_frequencies(3).unwrap();
        assert!(!triples.contains_key(&w("000")));
        assert!(triples[&w("111")] > 0.0);
    }
}
