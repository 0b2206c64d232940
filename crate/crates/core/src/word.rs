//! Letters, words and named alphabets.

use std::fmt;

use memchr::memmem;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub type Letter = u8;

/// A finite word over a small integer alphabet.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn new(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn as_slice(&self) -> &[Letter] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<Letter> {
        self.0
    }

    pub fn concat(&self, other: &[Letter]) -> Word {
        let mut v = Vec::with_capacity(self.0.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(other);
        Word(v)
    }

    pub fn repeat(&self, times: usize) -> Word {
        Word(self.0.repeat(times))
    }

    /// Digit rendering, used for debugging and error messages.
    pub fn digits(&self) -> String {
        self.0.iter().map(|&a| char::from(b'0' + a)).collect()
    }
}

impl std::ops::Deref for Word {
    type Target = [Letter];
    fn deref(&self) -> &[Letter] {
        &self.0
    }
}

impl std::borrow::Borrow<[Letter]> for Word {
    fn borrow(&self) -> &[Letter] {
        &self.0
    }
}

impl From<Vec<Letter>> for Word {
    fn from(v: Vec<Letter>) -> Self {
        Word(v)
    }
}

impl From<&[Letter]> for Word {
    fn from(v: &[Letter]) -> Self {
        Word(v.to_vec())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({})", self.digits())
    }
}

/// Maps external symbols to letters `0..size`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    symbols: Vec<char>,
}

impl Alphabet {
    pub fn new(symbols: Vec<char>) -> Result<Self> {
        if symbols.is_empty() || symbols.len() > 36 {
            return invalid(format!("alphabet size {} out of range", symbols.len()));
        }
        for (i, c) in symbols.iter().enumerate() {
            if symbols[..i].contains(c) {
                return invalid(format!("duplicate alphabet symbol {c:?}"));
            }
        }
        Ok(Alphabet { symbols })
    }

    pub fn digits(size: usize) -> Self {
        Alphabet {
            symbols: (0..size as u32)
                .map(|d| char::from_digit(d, 36).unwrap())
                .collect(),
        }
    }

    pub fn letters(size: usize) -> Self {
        Alphabet {
            symbols: (0..size as u8).map(|d| char::from(b'a' + d)).collect(),
        }
    }

    pub fn size(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    pub fn letter(&self, c: char) -> Option<Letter> {
        self.symbols
            .iter()
            .position(|&s| s == c)
            .map(|i| i as Letter)
    }

    pub fn parse(&self, text: &str) -> Result<Word> {
        text.chars()
            .map(|c| {
                self.letter(c).ok_or_else(|| {
                    crate::Error::InvalidInput(format!(
                        "symbol {c:?} not in alphabet {:?}",
                        self.render_symbols()
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }

    pub fn render(&self, w: &[Letter]) -> String {
        w.iter()
            .map(|&a| self.symbols.get(a as usize).copied().unwrap_or('?'))
            .collect()
    }

    fn render_symbols(&self) -> String {
        self.symbols.iter().collect()
    }
}

/// Start positions of all (possibly overlapping) occurrences of `pat` in `hay`.
pub fn occurrences(hay: &[Letter], pat: &[Letter]) -> Vec<usize> {
    let mut out = Vec::new();
    if pat.is_empty() {
        out.extend(0..=hay.len());
        return out;
    }
    let finder = memmem::Finder::new(pat);
    let mut pos = 0;
    while pos + pat.len() <= hay.len() {
        match finder.find(&hay[pos..]) {
            Some(i) => {
                out.push(pos + i);
                pos += i + 1;
            }
            None => break,
        }
    }
    out
}

pub fn count_occurrences(hay: &[Letter], pat: &[Letter]) -> usize {
    if pat.is_empty() {
        return hay.len() + 1;
    }
    let finder = memmem::Finder::new(pat);
    let mut pos = 0;
    let mut count = 0;
    while pos + pat.len() <= hay.len() {
        match finder.find(&hay[pos..]) {
            Some(i) => {
                count += 1;
                pos += i + 1;
            }
            None => break,
        }
    }
    count
}

pub fn contains(hay: &[Letter], pat: &[Letter]) -> bool {
    memmem::find(hay, pat).is_some()
}

/// Smallest period of a nonempty word (prefix function).
pub fn minimal_period(w: &[Letter]) -> usize {
    if w.is_empty() {
        return 0;
    }
    let mut pi = vec![0usize; w.len()];
    for i in 1..w.len() {
        let mut k = pi[i - 1];
        while k > 0 && w[i] != w[k] {
            k = pi[k - 1];
        }
        if w[i] == w[k] {
            k += 1;
        }
        pi[i] = k;
    }
    w.len() - pi[w.len() - 1]
}

/// True when the word is not a proper power of a shorter word.
pub fn is_primitive_word(w: &[Letter]) -> bool {
    let p = minimal_period(w);
    p == w.len() || !w.len().is_multiple_of(p)
}

pub fn letter_counts(w: &[Letter], size: usize) -> Vec<u64> {
    let mut c = vec![0u64; size];
    for &a in w {
        c[a as usize] += 1;
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlapping_occurrences() {
        assert_eq!(occurrences(&[0, 0, 0, 0], &[0, 0]), vec![0, 1, 2]);
        assert_eq!(count_occurrences(&[0, 1, 0, 1, 0], &[0, 1, 0]), 2);
    }

    #[test]
    fn periods() {
        assert_eq!(minimal_period(&[0, 1, 0, 1, 0]), 2);
        assert_eq!(minimal_period(&[0, 0, 1]), 3);
        assert!(!is_primitive_word(&[0, 1, 0, 1]));
        assert!(is_primitive_word(&[0, 1, 0]));
    }

    #[test]
    fn alphabet_round_trip() {
        let a = Alphabet::letters(2);
        let w = a.parse("abba").unwrap();
        assert_eq!(w.as_slice(), &[0, 1, 1, 0]);
        assert_eq!(a.render(&w), "abba");
        assert!(a.parse("abc").is_err());
    }
}
