//! Krichevsky-Trofimov sequential estimator.
//!
//! After counts `n_a` (total `n`) the next symbol gets probability
//! `(n_a + 1/2) / (n + A/2)`, kept as the integer frequencies `2 n_a + 1`
//! out of `2 n + A`.

use alloc::vec;
use alloc::vec::Vec;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KtState {
    counts: Vec<u32>,
    seen: u32,
}

impl KtState {
    pub fn new(alphabet: usize) -> Self {
        KtState {
            counts: vec![0; alphabet],
            seen: 0,
        }
    }

    #[inline]
    pub fn total(&self) -> u32 {
        2 * self.seen + self.counts.len() as u32
    }

    #[inline]
    pub fn freq(&self, symbol: u8) -> u32 {
        2 * self.counts[symbol as usize] + 1
    }

    /// Cumulative frequency of the symbols below `symbol`.
    #[inline]
    pub fn cum(&self, symbol: u8) -> u32 {
        let below: u32 = self.counts[..symbol as usize].iter().sum();
        2 * below + symbol as u32
    }

    /// Symbol whose cumulative interval holds `target`.
    pub fn lookup(&self, target: u32) -> (u8, u32) {
        let mut cum = 0;
        for (s, &c) in self.counts.iter().enumerate() {
            let f = 2 * c + 1;
            if target < cum + f {
                return (s as u8, cum);
            }
            cum += f;
        }
        unreachable!("target {target} outside total {}", self.total())
    }

    pub fn update(&mut self, symbol: u8) {
        self.counts[symbol as usize] += 1;
        self.seen += 1;
    }

    pub fn probability(&self, symbol: u8) -> f64 {
        self.freq(symbol) as f64 / self.total() as f64
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }
}

/// KT code length in bits of a sequence with the given final counts,
/// independent of order.
pub fn kt_length_bits(counts: &[u64]) -> f64 {
    let a = counts.len() as f64;
    let n: u64 = counts.iter().sum();
    let mut bits = 0.0;
    for &c in counts {
        for k in 0..c {
            bits -= libm::log2(k as f64 + 0.5);
        }
    }
    for k in 0..n {
        bits += libm::log2(k as f64 + a / 2.0);
    }
    bits
}
