//! Compressed stream container.
//!
//! ```text
//! "ZCTC" | version u8 | A u16 | N u32 | t u32 | M u32
//! M times: L1 bits u32 | L3 bits u32 | m1 | m2 | m3
//! tail length u32 | tail symbols
//! ```
//!
//! Integers are big-endian. `m1` and `m3` occupy `ceil(bits / 8)` bytes,
//! `m2` holds `t` symbols packed at `ceil(log2 A)` bits and padded to a
//! byte. The tail keeps the symbols past the last full block, uncoded.

use ctz_core::codec::{BlockReport, CodecParams, EncodedBlock, DEFAULT_DELTA};
use ctz_core::Alphabet;

use crate::parallel;
use crate::{CtzError, Result};

pub const MAGIC: &[u8; 4] = b"ZCTC";
pub const VERSION: u8 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StreamHeader {
    pub alphabet: Alphabet,
    pub block_len: usize,
    pub depth: usize,
    pub blocks: usize,
}

/// A compressed stream plus the encoder's per-block accounting.
#[derive(Clone, Debug)]
pub struct Compressed {
    pub bytes: Vec<u8>,
    pub header: StreamHeader,
    pub reports: Vec<BlockReport>,
    pub tail_len: usize,
}

pub fn compress(symbols: &[u8], params: &CodecParams) -> Result<Compressed> {
    let n = params.block_len();
    if symbols.len() < n {
        return Err(CtzError::Core(ctz_core::Error::SequenceTooShort {
            len: symbols.len(),
            needed: n,
        }));
    }
    params.alphabet().validate(symbols)?;
    let blocks = symbols.len() / n;
    if blocks > u32::MAX as usize {
        return Err(CtzError::Usage("too many blocks".into()));
    }
    let coded = parallel::encode_blocks(&symbols[..blocks * n], params)?;
    let header = StreamHeader {
        alphabet: params.alphabet(),
        block_len: n,
        depth: params.depth(),
        blocks,
    };

    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&(params.alphabet().size() as u16 - 1).to_be_bytes());
    out.extend_from_slice(&(n as u32).to_be_bytes());
    out.extend_from_slice(&(params.depth() as u32).to_be_bytes());
    out.extend_from_slice(&(blocks as u32).to_be_bytes());
    let mut reports = Vec::with_capacity(blocks);
    for (b, r) in coded {
        out.extend_from_slice(&(b.tree_bits as u32).to_be_bytes());
        out.extend_from_slice(&(b.payload_bits as u32).to_be_bytes());
        out.extend_from_slice(&b.tree);
        out.extend_from_slice(&b.prefix);
        out.extend_from_slice(&b.payload);
        reports.push(r);
    }
    let tail = &symbols[blocks * n..];
    out.extend_from_slice(&(tail.len() as u32).to_be_bytes());
    out.extend_from_slice(tail);
    Ok(Compressed {
        bytes: out,
        header,
        reports,
        tail_len: tail.len(),
    })
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.data.len() - self.pos < n {
            return Err(CtzError::Corrupt(format!("truncated {what}")));
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_be_bytes(self.take(4, what)?.try_into().unwrap()))
    }
}

pub fn read_header(bytes: &[u8]) -> Result<StreamHeader> {
    let mut r = Reader { data: bytes, pos: 0 };
    header(&mut r)
}

fn header(r: &mut Reader<'_>) -> Result<StreamHeader> {
    if r.take(4, "magic")? != MAGIC {
        return Err(CtzError::Corrupt("bad magic".into()));
    }
    let version = r.take(1, "version")?[0];
    if version != VERSION {
        return Err(CtzError::Corrupt(format!("unsupported version {version}")));
    }
    let a = u16::from_be_bytes(r.take(2, "alphabet")?.try_into().unwrap()) as usize + 1;
    let alphabet = Alphabet::new(a).map_err(|_| CtzError::Corrupt(format!("alphabet size {a}")))?;
    let block_len = r.u32("block length")? as usize;
    let depth = r.u32("depth")? as usize;
    let blocks = r.u32("block count")? as usize;
    Ok(StreamHeader {
        alphabet,
        block_len,
        depth,
        blocks,
    })
}

pub fn decompress(bytes: &[u8]) -> Result<(Vec<u8>, StreamHeader)> {
    let mut r = Reader { data: bytes, pos: 0 };
    let h = header(&mut r)?;
    let params = CodecParams::with(h.alphabet, h.block_len, h.depth, DEFAULT_DELTA)
        .map_err(|e| CtzError::Corrupt(format!("header parameters: {e}")))?;
    let prefix_bytes = params.prefix_bits().div_ceil(8);

    let mut blocks = Vec::with_capacity(h.blocks.min(bytes.len() / 8));
    for _ in 0..h.blocks {
        let tree_bits = r.u32("block header")? as usize;
        let payload_bits = r.u32("block header")? as usize;
        let tree = r.take(tree_bits.div_ceil(8), "context tree")?.to_vec();
        let prefix = r.take(prefix_bytes, "prefix")?.to_vec();
        let payload = r.take(payload_bits.div_ceil(8), "payload")?.to_vec();
        blocks.push(EncodedBlock {
            tree,
            tree_bits,
            prefix,
            payload,
            payload_bits,
        });
    }
    let tail_len = r.u32("tail")? as usize;
    let tail = r.take(tail_len, "tail")?;
    if r.pos != bytes.len() {
        return Err(CtzError::Corrupt("trailing bytes after the stream".into()));
    }
    h.alphabet
        .validate(tail)
        .map_err(|_| CtzError::Corrupt("tail symbol outside the alphabet".into()))?;

    let decoded = parallel::decode_blocks(&blocks, &params)?;
    let mut out = Vec::with_capacity(h.blocks * h.block_len + tail_len);
    for d in decoded {
        out.extend_from_slice(&d);
    }
    out.extend_from_slice(tail);
    Ok((out, h))
}
