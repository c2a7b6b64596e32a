//! Rayon drivers. `CTZ_THREADS` caps the worker count.

use std::sync::Once;

use rayon::prelude::*;

use ctz_core::classifier::{classify, ClassificationResult, Signature};
use ctz_core::codec::{self, BlockReport, CodecParams, EncodedBlock};
use ctz_core::{Result, Sequence};

static INIT: Once = Once::new();

/// Sizes the global pool from `CTZ_THREADS`, once. Unset, empty or
/// unparsable values leave rayon's default.
pub fn init_threads() {
    INIT.call_once(|| {
        let n = std::env::var("CTZ_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok());
        if let Some(n) = n.filter(|&n| n > 0) {
            // a pool built earlier by someone else wins; that is fine
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    });
}

/// Encodes consecutive blocks; output is in block order.
pub fn encode_blocks(symbols: &[u8], params: &CodecParams) -> Result<Vec<(EncodedBlock, BlockReport)>> {
    init_threads();
    symbols
        .par_chunks_exact(params.block_len())
        .map(|b| codec::encode_block_with_report(b, params))
        .collect()
}

pub fn decode_blocks(blocks: &[EncodedBlock], params: &CodecParams) -> Result<Vec<Vec<u8>>> {
    init_threads();
    blocks.par_iter().map(|b| codec::decode_block(b, params)).collect()
}

/// `Delta` of every training window, in window order.
pub fn training_deltas(x: &Sequence, sig: &Signature) -> Result<Vec<f64>> {
    init_threads();
    let n = sig.block_len();
    let s = x.symbols();
    if s.len() < n {
        return Err(ctz_core::Error::InsufficientTraining { len: s.len(), needed: n });
    }
    (0..=s.len() - n)
        .into_par_iter()
        .map(|j| classify(&s[j..j + n], sig, 0).map(|r| r.delta))
        .collect()
}

/// Trains and calibrates a signature, scoring training windows in parallel.
pub fn build_signature(x: &Sequence, block_len: usize, epsilon: f64) -> Result<Signature> {
    let mut sig = Signature::train(x, block_len, epsilon)?;
    let deltas = training_deltas(x, &sig)?;
    sig.calibrate(&deltas);
    Ok(sig)
}

pub fn classify_all(vectors: &[&[u8]], sig: &Signature, radius: usize) -> Result<Vec<ClassificationResult>> {
    init_threads();
    vectors.par_iter().map(|z| classify(z, sig, radius)).collect()
}
