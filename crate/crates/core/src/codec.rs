//! The N-block context-tree coder.
//!
//! Each block is coded on its own as three parts:
//!
//! * `m1`: the leaves of the block's selected context sub-tree;
//! * `m2`: the first `t` symbols, uncoded;
//! * `m3`: symbols `t+1..N`, arithmetic coded with a KT estimator per
//!   sub-tree context. Each symbol uses the deepest context its `t`
//!   preceding symbols end in.
//!
//! The candidate tree is built with floor `1/N'`, `N' = floor(N^(1-delta))`.

use alloc::vec;
use alloc::vec::Vec;

use crate::bits::{ceil_log2, BitReader, BitWriter};
use crate::kt::KtState;
use crate::range_coder::{Decoder, Encoder};
use crate::stats::{default_depth, EmpiricalModel};
use crate::tree::{ContextSet, ContextTree, InverseFloor, PrunedTree};
use crate::{Alphabet, Error, Result, Sequence};

pub const DEFAULT_DELTA: f64 = 0.25;

/// Largest block length the coder accepts (KT totals must fit the coder).
pub const MAX_BLOCK_LEN: usize = 1 << 21;

/// Block coder configuration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CodecParams {
    alphabet: Alphabet,
    block_len: usize,
    depth: usize,
    delta: f64,
    floor: InverseFloor,
}

/// `floor(n^e)`, robust to `pow` landing just under an integer.
pub fn floor_pow(n: usize, e: f64) -> u64 {
    let v = libm::pow(n as f64, e);
    let f = libm::floor(v + 1e-9 * v.max(1.0)) as u64;
    f.max(1)
}

impl CodecParams {
    /// Default depth `min(ceil((log2 N)^2), N - 1)` and `delta = 0.25`.
    pub fn new(alphabet: Alphabet, block_len: usize) -> Result<Self> {
        let depth = default_depth(block_len).min(block_len.saturating_sub(1));
        Self::with(alphabet, block_len, depth, DEFAULT_DELTA)
    }

    pub fn with(alphabet: Alphabet, block_len: usize, depth: usize, delta: f64) -> Result<Self> {
        if block_len < 2 || block_len > MAX_BLOCK_LEN {
            return Err(Error::param("block length must lie in 2..=2^21"));
        }
        if depth >= block_len {
            return Err(Error::param("depth must be below the block length"));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::param("delta must lie in (0, 1)"));
        }
        let floor = InverseFloor::integer(floor_pow(block_len, 1.0 - delta))?;
        Ok(CodecParams {
            alphabet,
            block_len,
            depth,
            delta,
            floor,
        })
    }

    pub fn with_depth(self, depth: usize) -> Result<Self> {
        Self::with(self.alphabet, self.block_len, depth, self.delta)
    }

    pub fn with_delta(self, delta: f64) -> Result<Self> {
        Self::with(self.alphabet, self.block_len, self.depth, delta)
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `N'`, the inverse of the candidate-tree floor.
    pub fn floor(&self) -> InverseFloor {
        self.floor
    }

    /// `t * ceil(log2 A)`, the exact size of `m2`.
    pub fn prefix_bits(&self) -> usize {
        self.depth * self.alphabet.symbol_bits() as usize
    }
}

/// One coded block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedBlock {
    pub tree: Vec<u8>,
    pub tree_bits: usize,
    /// `t` symbols packed at `ceil(log2 A)` bits, padded to a byte.
    pub prefix: Vec<u8>,
    pub payload: Vec<u8>,
    pub payload_bits: usize,
}

impl EncodedBlock {
    /// `L1 + L2 + L3` in bits.
    pub fn total_bits(&self, params: &CodecParams) -> usize {
        self.tree_bits + params.prefix_bits() + self.payload_bits
    }
}

/// Encoder-side facts about a block.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockReport {
    pub tree_bits: usize,
    pub prefix_bits: usize,
    pub payload_bits: usize,
    pub leaves: usize,
    /// `H_u(t, N', M')` of the block, bits per coded symbol.
    pub h_u: f64,
}

impl BlockReport {
    pub fn total_bits(&self) -> usize {
        self.tree_bits + self.prefix_bits + self.payload_bits
    }
}

/// The explicit bound `(t b + ceil(log2 t) + 2) * leaves + 32` on `L1`.
pub fn tree_bits_bound(leaves: usize, depth: usize, alphabet: Alphabet) -> usize {
    (depth * alphabet.symbol_bits() as usize + ceil_log2(depth as u64) as usize + 2) * leaves + 32
}

fn length_width(depth: usize) -> u32 {
    ceil_log2(depth as u64 + 1)
}

/// Leaf count in 32 bits, then per leaf its length and symbols, leaves in
/// lexicographic order (oldest symbol first).
pub fn serialize_tree(leaves: &[Vec<u8>], depth: usize, alphabet: Alphabet) -> (Vec<u8>, usize) {
    let mut sorted: Vec<&Vec<u8>> = leaves.iter().collect();
    sorted.sort();
    let mut w = BitWriter::new();
    w.write(sorted.len() as u64, 32);
    let lw = length_width(depth);
    let sb = alphabet.symbol_bits();
    for leaf in sorted {
        debug_assert!(leaf.len() <= depth);
        w.write(leaf.len() as u64, lw);
        for &s in leaf.iter() {
            w.write(s as u64, sb);
        }
    }
    w.into_parts()
}

/// Inverse of [`serialize_tree`]; rejects anything the encoder cannot
/// have produced.
pub fn deserialize_tree(reader: &mut BitReader<'_>, depth: usize, alphabet: Alphabet) -> Result<Vec<Vec<u8>>> {
    let count = reader.read(32)? as usize;
    let lw = length_width(depth);
    if count == 0 || (lw == 0 && count != 1) || count > reader.remaining() / lw.max(1) as usize + 1 {
        return Err(Error::Format("bad leaf count"));
    }
    let sb = alphabet.symbol_bits();
    let mut leaves: Vec<Vec<u8>> = Vec::with_capacity(count);
    for _ in 0..count {
        let len = reader.read(lw)? as usize;
        if len > depth {
            return Err(Error::Format("context longer than the depth"));
        }
        let mut leaf = Vec::with_capacity(len);
        for _ in 0..len {
            let s = reader.read(sb)?;
            if s as usize >= alphabet.size() {
                return Err(Error::Format("context symbol outside the alphabet"));
            }
            leaf.push(s as u8);
        }
        if let Some(prev) = leaves.last() {
            if *prev >= leaf {
                return Err(Error::Format("contexts out of order"));
            }
        }
        leaves.push(leaf);
    }
    for a in &leaves {
        for b in &leaves {
            if a.len() < b.len() && b.ends_with(a) {
                return Err(Error::Format("context is a suffix of another"));
            }
        }
    }
    Ok(leaves)
}

fn pack_symbols(symbols: &[u8], alphabet: Alphabet) -> Vec<u8> {
    let mut w = BitWriter::new();
    for &s in symbols {
        w.write(s as u64, alphabet.symbol_bits());
    }
    w.into_parts().0
}

fn unpack_symbols(bytes: &[u8], count: usize, alphabet: Alphabet) -> Result<Vec<u8>> {
    let sb = alphabet.symbol_bits();
    let mut r = BitReader::new(bytes, bytes.len() * 8)?;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let s = r.read(sb)?;
        if s as usize >= alphabet.size() {
            return Err(Error::Format("prefix symbol outside the alphabet"));
        }
        out.push(s as u8);
    }
    Ok(out)
}

/// Selected sub-tree of one block.
pub fn block_tree(block: &[u8], params: &CodecParams) -> Result<PrunedTree> {
    Ok(ContextTree::build(params.alphabet, block, params.floor, params.depth)?.select())
}

pub fn encode_block(block: &[u8], params: &CodecParams) -> Result<EncodedBlock> {
    encode_block_with_report(block, params).map(|(b, _)| b)
}

pub fn encode_block_with_report(block: &[u8], params: &CodecParams) -> Result<(EncodedBlock, BlockReport)> {
    if block.len() != params.block_len {
        return Err(Error::BlockLength {
            expected: params.block_len,
            actual: block.len(),
        });
    }
    params.alphabet.validate(block)?;
    let t = params.depth;
    let pruned = block_tree(block, params)?;
    let (tree, tree_bits) = serialize_tree(&pruned.leaves, t, params.alphabet);
    let set = pruned.context_set();

    let a = params.alphabet.size();
    let mut states = vec![KtState::new(a); set.len()];
    let mut enc = Encoder::new();
    for p in t..block.len() {
        let v = set.resolve(&block[p - t..p]);
        let st = &mut states[v];
        let s = block[p];
        enc.encode(st.cum(s), st.freq(s), st.total());
        st.update(s);
    }
    let (payload, payload_bits) = enc.finish();
    let report = BlockReport {
        tree_bits,
        prefix_bits: params.prefix_bits(),
        payload_bits,
        leaves: pruned.leaves.len(),
        h_u: pruned.h_u,
    };
    Ok((
        EncodedBlock {
            tree,
            tree_bits,
            prefix: pack_symbols(&block[..t], params.alphabet),
            payload,
            payload_bits,
        },
        report,
    ))
}

pub fn decode_block(block: &EncodedBlock, params: &CodecParams) -> Result<Vec<u8>> {
    let t = params.depth;
    let mut r = BitReader::new(&block.tree, block.tree_bits)?;
    let leaves = deserialize_tree(&mut r, t, params.alphabet)?;
    if r.remaining() != 0 {
        return Err(Error::Format("trailing bits after the context tree"));
    }
    let set = ContextSet::from_contexts(leaves.iter().map(|l| l.as_slice()));

    let mut out = unpack_symbols(&block.prefix, t, params.alphabet)?;
    out.reserve(params.block_len - t);
    let a = params.alphabet.size();
    let mut states = vec![KtState::new(a); set.len()];
    let mut dec = Decoder::new(&block.payload, block.payload_bits)?;
    for p in t..params.block_len {
        let v = set.resolve(&out[p - t..p]);
        let st = &mut states[v];
        let target = dec.target(st.total()).ok_or(Error::DecodeFailure {
            position: p,
            reason: "code value outside the frequency total",
        })?;
        let (s, cum) = st.lookup(target);
        dec.consume(cum, st.freq(s), st.total());
        st.update(s);
        out.push(s);
    }
    Ok(out)
}

/// A block length function, `L(Z)` for `|Z| = N`.
pub trait LengthFunction {
    fn block_len(&self) -> usize;

    fn length(&self, block: &[u8]) -> Result<u64>;

    /// An upper bound on `sum_Z 2^-L(Z)` over all `N`-vectors, or `None`
    /// when the function cannot certify one.
    fn kraft_bound(&self) -> Option<f64>;
}

/// `L1 + L2 + L3` of the block coder. The three parts form a prefix-free
/// code, so the Kraft sum is at most one.
#[derive(Clone, Debug)]
pub struct CodecLength {
    pub params: CodecParams,
}

impl LengthFunction for CodecLength {
    fn block_len(&self) -> usize {
        self.params.block_len
    }

    fn length(&self, block: &[u8]) -> Result<u64> {
        Ok(encode_block(block, &self.params)?.total_bits(&self.params) as u64)
    }

    fn kraft_bound(&self) -> Option<f64> {
        Some(1.0)
    }
}

/// Fixed-rate `N ceil(log2 A)` bits.
#[derive(Clone, Debug)]
pub struct RawLength {
    pub alphabet: Alphabet,
    pub block_len: usize,
}

impl LengthFunction for RawLength {
    fn block_len(&self) -> usize {
        self.block_len
    }

    fn length(&self, _block: &[u8]) -> Result<u64> {
        Ok((self.block_len * self.alphabet.symbol_bits() as usize) as u64)
    }

    fn kraft_bound(&self) -> Option<f64> {
        let a = self.alphabet.size() as f64;
        let b = self.alphabet.symbol_bits() as f64;
        Some(libm::pow(a / libm::exp2(b), self.block_len as f64))
    }
}

/// Explicit lengths for listed blocks and one length for all others.
#[derive(Clone, Debug)]
pub struct TableLength {
    pub alphabet: Alphabet,
    pub block_len: usize,
    pub table: alloc::collections::BTreeMap<Vec<u8>, u64>,
    pub default: u64,
}

impl LengthFunction for TableLength {
    fn block_len(&self) -> usize {
        self.block_len
    }

    fn length(&self, block: &[u8]) -> Result<u64> {
        Ok(self.table.get(block).copied().unwrap_or(self.default))
    }

    fn kraft_bound(&self) -> Option<f64> {
        let listed: f64 = self.table.values().map(|&l| libm::exp2(-(l as f64))).sum();
        let others = libm::pow(self.alphabet.size() as f64, self.block_len as f64) - self.table.len() as f64;
        Some(listed + others.max(0.0) * libm::exp2(-(self.default as f64)))
    }
}

/// Boundary vectors in `rho` are coded raw: `len * ceil(log2 A) + 1` bits.
pub fn raw_length(len: usize, alphabet: Alphabet) -> u64 {
    (len * alphabet.symbol_bits() as usize) as u64 + 1
}

/// Worst-phase compression in bits per letter and the phase attaining it.
///
/// Phase `i` codes the `M - 1` blocks starting after `X_1^i`, plus the raw
/// prefix `X_1^i` and the raw tail.
pub fn rho<L: LengthFunction + ?Sized>(x: &Sequence, blocks: usize, len_fn: &L) -> Result<(f64, usize)> {
    let n = len_fn.block_len();
    let total = n * blocks;
    if blocks < 2 || n < 2 {
        return Err(Error::param("rho needs N >= 2 and M >= 2"));
    }
    if x.len() < total {
        return Err(Error::SequenceTooShort {
            len: x.len(),
            needed: total,
        });
    }
    let s = &x.symbols()[..total];
    let a = x.alphabet();
    let mut best = (0u64, 0usize);
    for i in 1..n {
        let mut bits = raw_length(i, a) + raw_length(total - (i + (blocks - 1) * n), a);
        for j in 0..blocks - 1 {
            let start = i + j * n;
            bits += len_fn.length(&s[start..start + n])?;
        }
        if bits > best.0 {
            best = (bits, i);
        }
    }
    Ok((best.0 as f64 / total as f64, best.1))
}

/// Both sides of the block-entropy lower bound.
#[derive(Clone, Debug, PartialEq)]
pub struct LowerBoundReport {
    pub rho: f64,
    pub worst_phase: usize,
    pub block_entropy: f64,
    /// `rho - H_MN(N)`; never negative for a Kraft-satisfying length.
    pub margin: f64,
}

/// Evaluates `rho_L(X, N, M)` against `H_MN(N)`. Length functions that
/// cannot certify the Kraft inequality are rejected.
pub fn check_lower_bound<L: LengthFunction + ?Sized>(x: &Sequence, blocks: usize, len_fn: &L) -> Result<LowerBoundReport> {
    match len_fn.kraft_bound() {
        Some(k) if k <= 1.0 + 1e-12 => {}
        Some(k) => return Err(Error::KraftViolation(k)),
        None => return Err(Error::KraftViolation(f64::NAN)),
    }
    let n = len_fn.block_len();
    let model = EmpiricalModel::with_depth(&x.slice(0, (n * blocks).min(x.len())), n, 0)?;
    let (rho, worst_phase) = rho(x, blocks, len_fn)?;
    let h = model.full_block_entropy();
    Ok(LowerBoundReport {
        rho,
        worst_phase,
        block_entropy: h,
        margin: rho - h,
    })
}

/// Exact test of `sum_i 2^-L_i <= 1` for integer lengths.
pub fn kraft_holds(lengths: &[u64]) -> bool {
    let mut by_len: alloc::collections::BTreeMap<u64, u128> = alloc::collections::BTreeMap::new();
    for &l in lengths {
        *by_len.entry(l).or_default() += 1;
    }
    // carry from the longest lengths up, remembering any remainder
    let mut carry: u128 = 0;
    let mut frac = false;
    let mut level = match by_len.keys().next_back() {
        Some(&l) => l,
        None => return true,
    };
    loop {
        carry += by_len.get(&level).copied().unwrap_or(0);
        if level == 0 {
            return carry < 1 || (carry == 1 && !frac);
        }
        frac |= carry % 2 == 1;
        carry /= 2;
        level -= 1;
    }
}
