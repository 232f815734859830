//! Reduced words in a free group.
//!
//! Letter `2i` is generator `i`, letter `2i + 1` its inverse. Words print as
//! `a`, `A` (= `a^{-1}`), `b`, `B`, ... and the identity as `e`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Word(Vec<u8>);

#[inline]
pub fn inverse_letter(l: u8) -> u8 {
    l ^ 1
}

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn generator(index: usize) -> Self {
        Word(vec![(2 * index) as u8])
    }

    /// Builds a word from letters, freely reducing it.
    pub fn from_letters(letters: &[u8]) -> Self {
        let mut out: Vec<u8> = Vec::with_capacity(letters.len());
        for &l in letters {
            if out.last() == Some(&inverse_letter(l)) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> Option<u8> {
        self.0.last().copied()
    }

    pub fn inverse(&self) -> Self {
        Word(self.0.iter().rev().map(|&l| inverse_letter(l)).collect())
    }

    /// Reduced product `self * other`.
    pub fn mul(&self, other: &Word) -> Self {
        let mut out = self.0.clone();
        for &l in &other.0 {
            if out.last() == Some(&inverse_letter(l)) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    /// Appends one letter without reduction; the caller guarantees the
    /// result is reduced.
    pub fn extended(&self, letter: u8) -> Self {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.extend_from_slice(&self.0);
        v.push(letter);
        Word(v)
    }

    pub fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|w| w[1] != inverse_letter(w[0]))
    }

    /// Largest generator index used, plus one.
    pub fn rank_needed(&self) -> usize {
        self.0.iter().map(|&l| (l / 2) as usize + 1).max().unwrap_or(0)
    }

    /// Parses `e`, or a string of letters `a..z` / `A..Z`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "e" || s.is_empty() {
            return Ok(Word::identity());
        }
        let mut letters = Vec::with_capacity(s.len());
        for ch in s.chars() {
            let l = match ch {
                'a'..='z' => 2 * (ch as u8 - b'a'),
                'A'..='Z' => 2 * (ch as u8 - b'A') + 1,
                _ => return Err(Error::InvalidParameter(format!("bad letter {ch:?} in word {s:?}"))),
            };
            letters.push(l);
        }
        Ok(Word::from_letters(&letters))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("e");
        }
        for &l in &self.0 {
            let base = if l % 2 == 0 { b'a' } else { b'A' };
            write!(f, "{}", (base + l / 2) as char)?;
        }
        Ok(())
    }
}

/// Number of reduced words of exact length `len` in a free group of rank `rank`.
pub fn free_sphere_count(rank: usize, len: usize) -> usize {
    if len == 0 {
        return 1;
    }
    if rank == 0 {
        return 0;
    }
    2 * rank * (2 * rank - 1).pow(len as u32 - 1)
}

/// Number of reduced words of length at most `len`.
pub fn free_ball_count(rank: usize, len: usize) -> usize {
    (0..=len).map(|l| free_sphere_count(rank, l)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn display_and_parse() {
        let w = Word::parse("abAB").unwrap();
        assert_eq!(w.to_string(), "abAB");
        assert_eq!(Word::parse("aA").unwrap(), Word::identity());
        assert_eq!(Word::identity().to_string(), "e");
        assert!(Word::parse("a1").is_err());
    }

    #[test]
    fn counts() {
        assert_eq!(free_sphere_count(2, 1), 4);
        assert_eq!(free_sphere_count(2, 2), 12);
        assert_eq!(free_sphere_count(2, 3), 36);
        assert_eq!(free_ball_count(2, 3), 53);
        assert_eq!(free_ball_count(1, 5), 11);
    }

    fn word_strategy() -> impl Strategy<Value = Word> {
        proptest::collection::vec(0u8..4, 0..12).prop_map(|v| Word::from_letters(&v))
    }

    proptest! {
        #[test]
        fn group_axioms(a in word_strategy(), b in word_strategy(), c in word_strategy()) {
            prop_assert!(a.is_reduced());
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert!(a.mul(&a.inverse()).is_identity());
            prop_assert_eq!(a.mul(&b).inverse(), b.inverse().mul(&a.inverse()));
        }
    }
}
