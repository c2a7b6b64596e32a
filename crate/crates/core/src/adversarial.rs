//! Repeated blocks of distinct segments.
//!
//! A block is `2^k` distinct vectors of length `l` drawn without
//! replacement from `A^l`, concatenated in random order, so `N = l 2^k`
//! and `h = k / l`. The block is repeated `M` times. Within a block no
//! segment repeats, so every coder that sees one block at a time pays for
//! the segments, while the repetition keeps the empirical entropies at or
//! below `2h`.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::stats::{EmpiricalModel, Ratio};
use crate::tree::{h_u, InverseFloor};
use crate::{Alphabet, Error, Result, Sequence};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AdversarialParams {
    pub alphabet: Alphabet,
    /// Segment length `l`.
    pub segment_len: usize,
    /// `k = h l`, so there are `2^k` segments.
    pub rate_bits: u32,
    /// Block repetitions `M`.
    pub blocks: usize,
    pub seed: u64,
}

impl AdversarialParams {
    /// Parameters from the rate `h`, which must make `h l` a positive
    /// integer.
    pub fn from_rate(alphabet: Alphabet, segment_len: usize, rate: f64, blocks: usize, seed: u64) -> Result<Self> {
        let k = rate * segment_len as f64;
        let kr = libm::round(k);
        if !(kr >= 1.0) || libm::fabs(k - kr) > 1e-9 {
            return Err(Error::param("h * l must be a positive integer"));
        }
        let p = AdversarialParams {
            alphabet,
            segment_len,
            rate_bits: kr as u32,
            blocks,
            seed,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.segment_len == 0 || self.rate_bits == 0 || self.blocks == 0 {
            return Err(Error::param("segment length, rate and block count must be positive"));
        }
        if self.rate_bits > 24 {
            return Err(Error::param("at most 2^24 segments"));
        }
        let space_bits = self.segment_len as f64 * self.alphabet.log2_size();
        if space_bits > 62.0 {
            return Err(Error::param("segment space A^l too large to index"));
        }
        if (self.rate_bits as f64) > space_bits + 1e-9 {
            return Err(Error::param("2^(h l) exceeds the number of distinct segments A^l"));
        }
        Ok(())
    }

    pub fn rate(&self) -> f64 {
        self.rate_bits as f64 / self.segment_len as f64
    }

    pub fn segments(&self) -> usize {
        1 << self.rate_bits
    }

    /// `N = l 2^(h l)`.
    pub fn block_len(&self) -> usize {
        self.segment_len * self.segments()
    }
}

fn segment_space(p: &AdversarialParams) -> usize {
    let a = p.alphabet.size();
    (0..p.segment_len).fold(1usize, |acc, _| acc * a)
}

/// The distinct segments of the block, in block order.
pub fn segments(params: &AdversarialParams) -> Result<Vec<Vec<u8>>> {
    params.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(params.seed);
    let space = segment_space(params);
    let mut picks = rand::seq::index::sample(&mut rng, space, params.segments()).into_vec();
    picks.shuffle(&mut rng);
    let a = params.alphabet.size();
    Ok(picks
        .into_iter()
        .map(|mut v| {
            let mut seg = alloc::vec![0u8; params.segment_len];
            for s in seg.iter_mut().rev() {
                *s = (v % a) as u8;
                v /= a;
            }
            seg
        })
        .collect())
}

/// One block repeated `M` times; deterministic in the seed.
pub fn generate(params: &AdversarialParams) -> Result<Sequence> {
    let block: Vec<u8> = segments(params)?.concat();
    let symbols = block.repeat(params.blocks);
    Sequence::new(params.alphabet, symbols)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntropyBoundsReport {
    /// `H_u(N, K, M)` with `K = N M / (M - 1)`.
    pub h_u: f64,
    /// `H_MN(l, N)`.
    pub block_entropy: f64,
    /// `(log2 N) / l`.
    pub log_bound: f64,
    /// `2h`.
    pub two_h: f64,
    /// `H_MN(1, N)`.
    pub letter_entropy: f64,
    /// Smallest `P_MN(segment, N)` over the block's segments.
    pub min_segment_probability: Ratio,
    /// `(M - 1) / (M N)`.
    pub segment_floor: Ratio,
}

impl EntropyBoundsReport {
    pub fn h_u_below_block_entropy(&self) -> bool {
        self.h_u <= self.block_entropy + 1e-12
    }

    pub fn block_entropy_below_log_bound(&self) -> bool {
        self.block_entropy <= self.log_bound + 1e-12
    }

    pub fn log_bound_below_two_h(&self) -> bool {
        self.log_bound <= self.two_h + 1e-12
    }

    pub fn segments_above_floor(&self) -> bool {
        self.min_segment_probability >= self.segment_floor
    }

    /// The whole chain `H_u <= H_MN(l, N) <= log2 N / l <= 2h`.
    pub fn chain_holds(&self) -> bool {
        self.h_u_below_block_entropy() && self.block_entropy_below_log_bound() && self.log_bound_below_two_h()
    }
}

pub fn verify_entropy_bounds(x: &Sequence, params: &AdversarialParams) -> Result<EntropyBoundsReport> {
    let n = params.block_len();
    let m = params.blocks;
    if m < 2 {
        return Err(Error::InsufficientBlocks { blocks: m });
    }
    let l = params.segment_len;
    let model = EmpiricalModel::with_depth(x, n, l.min(n))?;
    let k = InverseFloor::ratio((n * m) as u64, (m - 1) as u64)?;
    let min_segment_probability = segments(params)?
        .iter()
        .map(|s| model.probability(s))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .min()
        .expect("at least one segment");
    Ok(EntropyBoundsReport {
        h_u: h_u(x, n, k, m)?,
        block_entropy: model.block_entropy(l)?,
        log_bound: libm::log2(n as f64) / l as f64,
        two_h: 2.0 * params.rate(),
        letter_entropy: model.block_entropy(1)?,
        min_segment_probability,
        segment_floor: Ratio::new((m - 1) as u64, (m * n) as u64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_pairs_when_forced() {
        let p = AdversarialParams::from_rate(Alphabet::BINARY, 2, 1.0, 5, 1).unwrap();
        assert_eq!(p.block_len(), 8);
        let mut segs = segments(&p).unwrap();
        segs.sort();
        assert_eq!(segs, alloc::vec![alloc::vec![0, 0], alloc::vec![0, 1], alloc::vec![1, 0], alloc::vec![1, 1]]);
        let x = generate(&p).unwrap();
        assert_eq!(x.len(), 40);
        let r = verify_entropy_bounds(&x, &p).unwrap();
        assert!(r.block_entropy <= 1.5 + 1e-12);
        assert!(r.chain_holds());
    }

    #[test]
    fn sizes_and_determinism() {
        let p = AdversarialParams::from_rate(Alphabet::BINARY, 8, 0.5, 3, 42).unwrap();
        assert_eq!(p.segments(), 16);
        assert_eq!(p.block_len(), 128);
        let x = generate(&p).unwrap();
        assert_eq!(x, generate(&p).unwrap());
        let q = AdversarialParams { seed: 43, ..p };
        assert_ne!(x, generate(&q).unwrap());
        let s = x.symbols();
        assert_eq!(&s[..128], &s[128..256]);
        let mut segs = segments(&p).unwrap();
        segs.sort();
        segs.dedup();
        assert_eq!(segs.len(), 16);
    }

    #[test]
    fn infeasible() {
        assert!(AdversarialParams::from_rate(Alphabet::BINARY, 8, 0.3, 2, 0).is_err());
        assert!(AdversarialParams::from_rate(Alphabet::BINARY, 2, 1.5, 2, 0).is_err());
    }

    #[test]
    fn worked_example_chain() {
        let p = AdversarialParams::from_rate(Alphabet::BINARY, 8, 0.5, 16, 7).unwrap();
        let x = generate(&p).unwrap();
        let r = verify_entropy_bounds(&x, &p).unwrap();
        assert!((r.log_bound - 0.875).abs() < 1e-12);
        assert!(r.block_entropy <= 0.875 + 1e-12);
        assert!(r.h_u <= 1.0);
        assert!(r.chain_holds());
    }
}
