//! Frozen stream: any change to the encoder's output shows up here.

use ctz::container;
use ctz_core::codec::CodecParams;
use ctz_core::Alphabet;

const FROZEN: &[u8] = include_bytes!("data/markov_a2_n256.ctz");

/// Binary source that flips with probability 1/5, driven by a fixed LCG.
fn input() -> Vec<u8> {
    let mut state = 2024u64;
    let mut prev = 0u8;
    (0..256 * 8 + 37)
        .map(|_| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            if (state >> 33) % 10 >= 8 {
                prev ^= 1;
            }
            prev
        })
        .collect()
}

#[test]
fn encoder_output_is_frozen() {
    let p = CodecParams::new(Alphabet::BINARY, 256).unwrap();
    let c = container::compress(&input(), &p).unwrap();
    assert_eq!(c.bytes, FROZEN);
}

#[test]
fn frozen_stream_decodes() {
    let (x, h) = container::decompress(FROZEN).unwrap();
    assert_eq!(x, input());
    assert_eq!((h.block_len, h.depth, h.blocks), (256, 64, 8));
}
