use alloc::vec::Vec;
use core::fmt;

use crate::{Error, Result};

/// A finite alphabet `{0, .., A-1}` with `2 <= A <= 256`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Alphabet(u16);

impl Alphabet {
    pub const BINARY: Alphabet = Alphabet(2);
    pub const BYTES: Alphabet = Alphabet(256);

    pub fn new(size: usize) -> Result<Self> {
        if (2..=256).contains(&size) {
            Ok(Alphabet(size as u16))
        } else {
            Err(Error::InvalidAlphabet(size))
        }
    }

    #[inline]
    pub fn size(self) -> usize {
        self.0 as usize
    }

    /// Bits of a fixed-width symbol code, `ceil(log2 A)`.
    #[inline]
    pub fn symbol_bits(self) -> u32 {
        usize::BITS - (self.size() - 1).leading_zeros()
    }

    #[inline]
    pub fn log2_size(self) -> f64 {
        libm::log2(self.size() as f64)
    }

    pub fn validate(self, symbols: &[u8]) -> Result<()> {
        match symbols.iter().position(|&s| s as usize >= self.size()) {
            None => Ok(()),
            Some(position) => Err(Error::InvalidSymbol {
                symbol: symbols[position],
                position,
                alphabet: self.size(),
            }),
        }
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "A={}", self.0)
    }
}

/// An individual sequence over a finite alphabet.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Sequence {
    alphabet: Alphabet,
    symbols: Vec<u8>,
}

impl Sequence {
    pub fn new(alphabet: Alphabet, symbols: Vec<u8>) -> Result<Self> {
        alphabet.validate(&symbols)?;
        Ok(Sequence { alphabet, symbols })
    }

    /// Builds a sequence from lowercase letters, `a` being symbol 0.
    ///
    /// ```
    /// use ctz_core::{Alphabet, Sequence};
    /// let s = Sequence::from_letters(Alphabet::BINARY, "abba").unwrap();
    /// assert_eq!(s.symbols(), &[0, 1, 1, 0]);
    /// ```
    pub fn from_letters(alphabet: Alphabet, letters: &str) -> Result<Self> {
        let symbols = letters
            .bytes()
            .map(|b| b.wrapping_sub(b'a'))
            .collect::<Vec<_>>();
        Self::new(alphabet, symbols)
    }

    #[inline]
    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    #[inline]
    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn into_symbols(self) -> Vec<u8> {
        self.symbols
    }

    /// The sub-sequence `[start, end)`, same alphabet.
    pub fn slice(&self, start: usize, end: usize) -> Sequence {
        Sequence {
            alphabet: self.alphabet,
            symbols: self.symbols[start..end].to_vec(),
        }
    }
}

impl AsRef<[u8]> for Sequence {
    fn as_ref(&self) -> &[u8] {
        &self.symbols
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbol_bits() {
        assert_eq!(Alphabet::new(2).unwrap().symbol_bits(), 1);
        assert_eq!(Alphabet::new(3).unwrap().symbol_bits(), 2);
        assert_eq!(Alphabet::new(4).unwrap().symbol_bits(), 2);
        assert_eq!(Alphabet::new(5).unwrap().symbol_bits(), 3);
        assert_eq!(Alphabet::BYTES.symbol_bits(), 8);
    }

    #[test]
    fn rejects_bad_alphabets_and_symbols() {
        assert_eq!(Alphabet::new(1), Err(Error::InvalidAlphabet(1)));
        assert_eq!(Alphabet::new(257), Err(Error::InvalidAlphabet(257)));
        let err = Sequence::new(Alphabet::BINARY, alloc::vec![0, 1, 2]).unwrap_err();
        assert!(matches!(err, Error::InvalidSymbol { symbol: 2, position: 2, .. }));
    }
}
