//! Phase-averaged empirical measures over a sequence cut into `M` blocks of
//! length `N`, and the entropies built on them.
//!
//! For a pattern `Z` of length `l` the phase-`i` measure averages the
//! indicator of `Z` over the `M - 1` windows starting at `i, i + l, ..,
//! i + (M - 2) l` (1-based); the full measure averages the `N` phases.
//! Collapsing the double sum, a window starting at `p` carries weight
//! `#{j in 0..=M-2 : p - N <= j l <= p - 1}` out of `N (M - 1)`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::{entropy_of_counts, Error, Result, Sequence};

/// `ceil((log2 N)^2)`, capped at `N`.
pub fn default_depth(block_len: usize) -> usize {
    if block_len <= 1 {
        return block_len;
    }
    let l = libm::log2(block_len as f64);
    let t = libm::ceil(l * l - 1e-9) as usize;
    t.clamp(1, block_len)
}

/// A non-negative exact fraction.
#[derive(Clone, Copy, Debug)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den > 0, "zero denominator");
        Ratio { num, den }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn is_zero(self) -> bool {
        self.num == 0
    }
}

impl PartialEq for Ratio {
    fn eq(&self, other: &Self) -> bool {
        self.num as u128 * other.den as u128 == other.num as u128 * self.den as u128
    }
}

impl Eq for Ratio {}

impl PartialOrd for Ratio {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ratio {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

/// Empirical statistics of `X_1^{MN}`.
///
/// Symbols past `M * N` are dropped. The model is immutable once built.
#[derive(Clone, Debug)]
pub struct EmpiricalModel {
    symbols: Vec<u8>,
    alphabet: crate::Alphabet,
    block_len: usize,
    blocks: usize,
    depth: usize,
}

impl EmpiricalModel {
    /// Model with the default depth `ceil((log2 N)^2)`.
    pub fn new(seq: &Sequence, block_len: usize) -> Result<Self> {
        Self::with_depth(seq, block_len, default_depth(block_len))
    }

    pub fn with_depth(seq: &Sequence, block_len: usize, depth: usize) -> Result<Self> {
        if block_len == 0 {
            return Err(Error::param("block length must be positive"));
        }
        if depth > block_len {
            return Err(Error::DepthExceeded {
                requested: depth,
                max: block_len,
            });
        }
        let blocks = seq.len() / block_len;
        if blocks < 2 {
            return Err(Error::InsufficientBlocks { blocks });
        }
        Ok(EmpiricalModel {
            symbols: seq.symbols()[..blocks * block_len].to_vec(),
            alphabet: seq.alphabet(),
            block_len,
            blocks,
            depth,
        })
    }

    pub fn alphabet(&self) -> crate::Alphabet {
        self.alphabet
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// The `M * N` symbols the model is built on.
    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len == 0 || len > self.depth {
            return Err(Error::DepthExceeded {
                requested: len,
                max: self.depth,
            });
        }
        Ok(())
    }

    /// Weight of the window starting at 0-based offset `start` for pattern
    /// length `len`.
    fn window_weight(&self, start: usize, len: usize) -> u64 {
        // 1-based start p = start + 1; count j with p - N <= j len <= p - 1
        let p = start + 1;
        let lo = p.saturating_sub(self.block_len).div_ceil(len);
        let hi = ((p - 1) / len).min(self.blocks - 2);
        if hi >= lo {
            (hi - lo + 1) as u64
        } else {
            0
        }
    }

    fn window_count(&self, len: usize) -> usize {
        self.block_len + (self.blocks - 2) * len
    }

    fn denominator(&self) -> u64 {
        (self.block_len * (self.blocks - 1)) as u64
    }

    /// Phase-`i` measure of `z` (1-based phase), a multiple of `1/(M-1)`.
    pub fn phase_probability(&self, z: &[u8], phase: usize) -> Result<Ratio> {
        let len = z.len();
        self.check_len(len)?;
        if phase == 0 || phase > self.block_len {
            return Err(Error::param("phase must lie in 1..=N"));
        }
        let hits = (0..self.blocks - 1)
            .filter(|j| {
                let s = phase - 1 + j * len;
                &self.symbols[s..s + len] == z
            })
            .count();
        Ok(Ratio::new(hits as u64, (self.blocks - 1) as u64))
    }

    /// Phase-averaged measure of `z`, a multiple of `1/(N(M-1))`.
    pub fn probability(&self, z: &[u8]) -> Result<Ratio> {
        self.check_len(z.len())?;
        Ok(self.probability_unbounded(z))
    }

    /// As [`Self::probability`] but only requires `1 <= |z| <= N`.
    pub(crate) fn probability_unbounded(&self, z: &[u8]) -> Ratio {
        let len = z.len();
        debug_assert!(len >= 1 && len <= self.block_len);
        let mut num = 0;
        for start in 0..self.window_count(len) {
            if &self.symbols[start..start + len] == z {
                num += self.window_weight(start, len);
            }
        }
        Ratio::new(num, self.denominator())
    }

    /// All patterns of length `len` with positive measure, with their
    /// numerators over `N(M-1)`.
    pub fn distribution(&self, len: usize) -> Result<BTreeMap<Vec<u8>, u64>> {
        self.check_len(len)?;
        let mut map: BTreeMap<&[u8], u64> = BTreeMap::new();
        for start in 0..self.window_count(len) {
            let w = self.window_weight(start, len);
            if w > 0 {
                *map.entry(&self.symbols[start..start + len]).or_default() += w;
            }
        }
        Ok(map.into_iter().map(|(k, v)| (k.to_vec(), v)).collect())
    }

    /// `H_MN(l, N)` in bits per letter. `len == N` is always accepted and
    /// uses [`Self::full_block_entropy`].
    pub fn block_entropy(&self, len: usize) -> Result<f64> {
        if len == self.block_len {
            return Ok(self.full_block_entropy());
        }
        let dist = self.distribution(len)?;
        Ok(entropy_of_counts(dist.values().copied()) / (self.denominator() as f64 * len as f64))
    }

    /// `H_MN(N)`: with `l = N` every start `1..=(M-1)N` has weight one, so
    /// this is the entropy of the sliding N-windows over those starts.
    pub fn full_block_entropy(&self) -> f64 {
        let n = self.block_len;
        let counts = distinct_window_counts(&self.symbols[..(self.blocks - 1) * n + n - 1], n);
        entropy_of_counts(counts.into_iter()) / (self.denominator() as f64 * n as f64)
    }

    /// Entropy of the next symbol given context `z` (oldest symbol first),
    /// `|z| < t`. The empty context gives the order-0 entropy.
    ///
    /// The successor law is `P(z a) / sum_b P(z b)`.
    pub fn conditional_entropy(&self, z: &[u8]) -> Result<f64> {
        if z.len() >= self.depth {
            return Err(Error::DepthExceeded {
                requested: z.len() + 1,
                max: self.depth,
            });
        }
        if !z.is_empty() && self.probability(z)?.is_zero() {
            return Err(Error::UnseenContext);
        }
        let mut counts = Vec::with_capacity(self.alphabet.size());
        let mut ext = z.to_vec();
        ext.push(0);
        for a in 0..self.alphabet.size() {
            *ext.last_mut().unwrap() = a as u8;
            counts.push(self.probability(&ext)?.num);
        }
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::UnseenContext);
        }
        Ok(entropy_of_counts(counts) / total as f64)
    }
}

/// Counts of the distinct sliding windows of length `n` over `data`,
/// sorted by window content.
pub(crate) fn distinct_window_counts(data: &[u8], n: usize) -> Vec<u64> {
    distinct_windows(data, n).into_iter().map(|(_, c)| c).collect()
}

/// Distinct sliding windows of length `n` with their counts, in
/// lexicographic order.
pub(crate) fn distinct_windows(data: &[u8], n: usize) -> Vec<(&[u8], u64)> {
    if data.len() < n {
        return Vec::new();
    }
    let mut starts: Vec<usize> = (0..=data.len() - n).collect();
    starts.sort_unstable_by(|&a, &b| data[a..a + n].cmp(&data[b..b + n]));
    let mut out: Vec<(&[u8], u64)> = Vec::new();
    for s in starts {
        let w = &data[s..s + n];
        match out.last_mut() {
            Some((prev, c)) if *prev == w => *c += 1,
            _ => out.push((w, 1)),
        }
    }
    out
}
