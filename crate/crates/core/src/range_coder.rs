//! A 32-bit range coder with carry propagation.
//!
//! `low` carries 33 bits (bit 32 is the pending carry), bytes equal to
//! `0xFF` wait in `pending` until the carry is known. The encoder finishes
//! with the shortest dyadic interval inside the final range, so a codeword
//! is a bit string rather than whole bytes and the decoder reads zeros past
//! its end. Every codeword's dyadic interval lies inside its message's
//! interval, so codewords of distinct messages are prefix-free.

use alloc::vec::Vec;

use crate::{Error, Result};

const TOP: u64 = 1 << 24;

/// Largest frequency total the coder accepts.
pub const MAX_TOTAL: u32 = 1 << 23;

#[derive(Clone, Debug)]
pub struct Encoder {
    low: u64,
    range: u32,
    cache: u8,
    pending: u64,
    out: Vec<u8>,
    started: bool,
    symbols: u64,
}

impl Default for Encoder {
    fn default() -> Self {
        Self::new()
    }
}

impl Encoder {
    pub fn new() -> Self {
        Encoder {
            low: 0,
            range: u32::MAX,
            cache: 0,
            pending: 1,
            out: Vec::new(),
            started: false,
            symbols: 0,
        }
    }

    /// Narrows to `[cum, cum + freq)` out of `total`.
    pub fn encode(&mut self, cum: u32, freq: u32, total: u32) {
        debug_assert!(freq > 0 && cum + freq <= total && total <= MAX_TOTAL);
        let r = self.range / total;
        self.low += r as u64 * cum as u64;
        self.range = r * freq;
        while (self.range as u64) < TOP {
            self.range <<= 8;
            self.shift_low();
        }
        self.symbols += 1;
    }

    fn shift_low(&mut self) {
        if (self.low as u32) < 0xFF00_0000 || (self.low >> 32) != 0 {
            let carry = (self.low >> 32) as u8;
            let mut byte = self.cache;
            loop {
                let b = byte.wrapping_add(carry);
                if self.started {
                    self.out.push(b);
                } else {
                    // the first byte only ever holds the initial zero cache
                    debug_assert_eq!(b, 0);
                    self.started = true;
                }
                byte = 0xFF;
                self.pending -= 1;
                if self.pending == 0 {
                    break;
                }
            }
            self.cache = (self.low >> 24) as u8;
        }
        self.pending += 1;
        self.low = (self.low & 0x00FF_FFFF) << 8;
    }

    /// Bytes and exact bit length of the codeword.
    pub fn finish(mut self) -> (Vec<u8>, usize) {
        if self.symbols == 0 {
            return (Vec::new(), 0);
        }
        // bytes already fixed ahead of the 32-bit window of `low`
        let committed = self.out.len() as u64 + self.pending - if self.started { 0 } else { 1 };
        let high = self.low + self.range as u64;
        let mut s = 32;
        let v = loop {
            let step = 1u64 << s;
            let v = self.low.div_ceil(step) * step;
            if v + step <= high {
                break v;
            }
            s -= 1;
        };
        self.low = v;
        for _ in 0..5 {
            self.shift_low();
        }
        let bits = (committed * 8 + 32 - s as u64) as usize;
        let mut out = self.out;
        out.truncate(bits.div_ceil(8));
        (out, bits)
    }
}

#[derive(Clone, Debug)]
pub struct Decoder<'a> {
    data: &'a [u8],
    bits: usize,
    pos: usize,
    code: u32,
    range: u32,
}

impl<'a> Decoder<'a> {
    /// Starts decoding the first `bits` bits of `data`.
    pub fn new(data: &'a [u8], bits: usize) -> Result<Self> {
        if bits > data.len() * 8 {
            return Err(Error::Format("payload shorter than its declared length"));
        }
        let mut d = Decoder {
            data,
            bits,
            pos: 0,
            code: 0,
            range: u32::MAX,
        };
        for _ in 0..4 {
            d.code = (d.code << 8) | d.next_byte() as u32;
        }
        Ok(d)
    }

    fn next_byte(&mut self) -> u8 {
        let i = self.pos;
        self.pos += 1;
        let start = i * 8;
        if start >= self.bits {
            return 0;
        }
        let b = self.data[i];
        let valid = self.bits - start;
        if valid >= 8 {
            b
        } else {
            b & (0xFFu8 << (8 - valid))
        }
    }

    /// The target value in `[0, total)`; the caller maps it to a symbol
    /// and then calls [`Self::consume`]. Values past `total` mean the
    /// stream is corrupt.
    pub fn target(&mut self, total: u32) -> Option<u32> {
        let r = self.range / total;
        let v = self.code / r;
        (v < total).then_some(v)
    }

    pub fn consume(&mut self, cum: u32, freq: u32, total: u32) {
        let r = self.range / total;
        self.code -= r * cum;
        self.range = r * freq;
        while (self.range as u64) < TOP {
            self.range <<= 8;
            self.code = (self.code << 8) | self.next_byte() as u32;
        }
    }
}
