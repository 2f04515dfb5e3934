//! Words in the universal Coxeter group `W_n = <x_1, ..., x_n | x_i^2 = 1>`.
//!
//! Every element has a unique reduced form: a sequence of letters in
//! `1..=n` with no two adjacent letters equal. [`Word`] values are always
//! reduced; the empty word is the identity. Since each generator is an
//! involution, inversion is just reversal.

use std::fmt;

use crate::error::Error;

/// Ambient rank `n` of the group, with `2 <= n <= 64`.
///
/// Every value in this crate carries its rank; binary operations panic when
/// ranks are mixed.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Rank(u8);

impl Rank {
    pub const MIN: usize = 2;
    pub const MAX: usize = 64;

    pub fn new(n: usize) -> Result<Rank, Error> {
        if (Self::MIN..=Self::MAX).contains(&n) {
            Ok(Rank(n as u8))
        } else {
            Err(Error::InvalidRank { got: n })
        }
    }

    pub fn get(self) -> usize {
        self.0 as usize
    }

    /// Iterates over the generator letters `1..=n`.
    pub fn letters(self) -> impl Iterator<Item = u8> {
        1..=self.0
    }

    pub fn contains(self, letter: u8) -> bool {
        (1..=self.0).contains(&letter)
    }

    fn check(self, letter: u8) -> Result<(), Error> {
        if self.contains(letter) {
            Ok(())
        } else {
            Err(Error::LetterOutOfRange { letter: letter as usize, rank: self.get() })
        }
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A reduced word; the canonical representative of a group element.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    rank: Rank,
    letters: Vec<u8>,
}

impl Word {
    pub fn identity(rank: Rank) -> Word {
        Word { rank, letters: Vec::new() }
    }

    pub fn generator(rank: Rank, letter: u8) -> Result<Word, Error> {
        rank.check(letter)?;
        Ok(Word { rank, letters: vec![letter] })
    }

    /// Reduces an arbitrary letter sequence by cancelling `x_i x_i` pairs.
    /// The result is the unique reduced word equal to the product in `W_n`.
    pub fn reduce(rank: Rank, letters: &[u8]) -> Result<Word, Error> {
        let mut out: Vec<u8> = Vec::with_capacity(letters.len());
        for &l in letters {
            rank.check(l)?;
            if out.last() == Some(&l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Ok(Word { rank, letters: out })
    }

    pub(crate) fn from_reduced(rank: Rank, letters: Vec<u8>) -> Word {
        debug_assert!(letters.windows(2).all(|w| w[0] != w[1]));
        debug_assert!(letters.iter().all(|&l| rank.contains(l)));
        Word { rank, letters }
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    pub fn letters(&self) -> &[u8] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// `self · other`, reduced.
    pub fn mul(&self, other: &Word) -> Word {
        assert_eq!(self.rank, other.rank, "rank mismatch in word multiplication");
        let mut out = self.letters.clone();
        for &l in &other.letters {
            if out.last() == Some(&l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word { rank: self.rank, letters: out }
    }

    /// Each generator is its own inverse, so inversion reverses the word.
    pub fn inverse(&self) -> Word {
        let mut letters = self.letters.clone();
        letters.reverse();
        Word { rank: self.rank, letters }
    }

    /// `g · self · g^{-1}`.
    pub fn conjugated_by(&self, g: &Word) -> Word {
        g.mul(self).mul(&g.inverse())
    }

    /// Splits `self = conjugator · core · conjugator^{-1}` with `core`
    /// cyclically reduced (first letter distinct from last, or length <= 1).
    /// Returns `(core, conjugator)`.
    pub fn cyclic_reduce(&self) -> (Word, Word) {
        let mut letters = self.letters.clone();
        let mut conj = Vec::new();
        while letters.len() >= 2 && letters.first() == letters.last() {
            conj.push(letters[0]);
            letters.remove(0);
            letters.pop();
        }
        (
            Word { rank: self.rank, letters },
            Word { rank: self.rank, letters: conj },
        )
    }

    /// Canonical representative of the conjugacy class: the lexicographically
    /// least cyclic rotation of the cyclically reduced core. Deterministic,
    /// so it can serve as a hash key for classes.
    pub fn conjugacy_representative(&self) -> Word {
        let (core, _) = self.cyclic_reduce();
        if core.is_empty() {
            return core;
        }
        let m = core.letters.len();
        let mut best: Option<Vec<u8>> = None;
        for k in 0..m {
            let mut rot = Vec::with_capacity(m);
            rot.extend_from_slice(&core.letters[k..]);
            rot.extend_from_slice(&core.letters[..k]);
            if best.as_ref().map_or(true, |b| rot < *b) {
                best = Some(rot);
            }
        }
        Word { rank: self.rank, letters: best.unwrap() }
    }

    /// Finds `g` with `g · self · g^{-1} = other`, if the two words are
    /// conjugate. Cyclically reduced words are conjugate exactly when one is
    /// a cyclic rotation of the other.
    pub fn are_conjugate(&self, other: &Word) -> Option<Word> {
        assert_eq!(self.rank, other.rank, "rank mismatch in conjugacy test");
        let (cw, gw) = self.cyclic_reduce();
        let (cv, gv) = other.cyclic_reduce();
        if cw.len() != cv.len() {
            return None;
        }
        if cw.is_empty() {
            return Some(Word::identity(self.rank));
        }
        let m = cw.letters.len();
        for k in 0..m {
            let rotated =
                cw.letters[k..].iter().chain(cw.letters[..k].iter()).copied().collect::<Vec<_>>();
            if rotated == cv.letters {
                // cw = p·s with p of length k; then s·cw·s^{-1} = s·p = rotation.
                let suffix = Word { rank: self.rank, letters: cw.letters[k..].to_vec() };
                let witness = gv.mul(&suffix).mul(&gw.inverse());
                debug_assert_eq!(self.conjugated_by(&witness), *other);
                return Some(witness);
            }
        }
        None
    }

    pub fn is_involution(&self) -> bool {
        self.as_involution().is_some()
    }

    /// Decomposes `self = u · x_j · u^{-1}` when `self` has order two, i.e.
    /// is a nonempty odd-length palindrome.
    pub fn as_involution(&self) -> Option<Involution> {
        let m = self.letters.len();
        if m == 0 || m % 2 == 0 {
            return None;
        }
        let palindrome = (0..m / 2).all(|i| self.letters[i] == self.letters[m - 1 - i]);
        if !palindrome {
            return None;
        }
        let conjugator = Word { rank: self.rank, letters: self.letters[..m / 2].to_vec() };
        Some(Involution { conjugator, letter: self.letters[m / 2] })
    }

    /// Parses the dot-separated text form produced by `Display`; `"e"` is the
    /// identity. Unreduced input is accepted and reduced, so the round trip
    /// `parse(rank, w.to_string()) == w` is bit-exact.
    pub fn parse(rank: Rank, input: &str) -> Result<Word, Error> {
        let trimmed = input.trim();
        if trimmed == "e" {
            return Ok(Word::identity(rank));
        }
        let mut letters = Vec::new();
        for part in trimmed.split('.') {
            let letter: usize =
                part.parse().map_err(|_| Error::WordParse { input: input.to_string() })?;
            if letter == 0 || letter > Rank::MAX {
                return Err(Error::LetterOutOfRange { letter, rank: rank.get() });
            }
            letters.push(letter as u8);
        }
        Word::reduce(rank, &letters)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "e");
        }
        let mut first = true;
        for l in &self.letters {
            if !first {
                write!(f, ".")?;
            }
            write!(f, "{l}")?;
            first = false;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w[{self}]")
    }
}

/// An order-two element `u · x_j · u^{-1}` in reduced form: the conjugator
/// `u` does not end with the core letter `j`. As a word this is an
/// odd-length palindrome, equal to its own inverse.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Involution {
    conjugator: Word,
    letter: u8,
}

impl Involution {
    pub fn new(conjugator: Word, letter: u8) -> Result<Involution, Error> {
        let rank = conjugator.rank();
        rank.check(letter)?;
        if conjugator.letters().last() == Some(&letter) {
            return Err(Error::UnreducedInvolution { letter });
        }
        Ok(Involution { conjugator, letter })
    }

    /// The standard generator `x_j`.
    pub fn standard(rank: Rank, letter: u8) -> Result<Involution, Error> {
        Involution::new(Word::identity(rank), letter)
    }

    pub fn rank(&self) -> Rank {
        self.conjugator.rank()
    }

    pub fn conjugator(&self) -> &Word {
        &self.conjugator
    }

    /// The conjugacy class of an involution is determined by this letter.
    pub fn letter(&self) -> u8 {
        self.letter
    }

    /// The full reduced word `u · x_j · u^{-1}`.
    pub fn word(&self) -> Word {
        let mut letters = self.conjugator.letters().to_vec();
        letters.push(self.letter);
        letters.extend(self.conjugator.letters().iter().rev());
        Word::from_reduced(self.conjugator.rank(), letters)
    }
}

impl fmt::Display for Involution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.word())
    }
}

impl fmt::Debug for Involution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "inv[{self}]")
    }
}
