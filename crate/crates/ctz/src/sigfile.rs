//! Signature files.
//!
//! ```text
//! "ZSIG" | version u8 | A u16 | N u32 | t u32 | eps u32 (Q0.32)
//! H_min f64 | eps' f64 | training H_u f64 | contexts u32
//! per context: length u32 | symbols (one byte each) | A counts u64
//! ```
//!
//! Big-endian throughout. Contexts are listed in lexicographic order,
//! oldest symbol first, and form a suffix-closed set.

use ctz_core::classifier::{Signature, SignatureParts};
use ctz_core::Alphabet;

use crate::{CtzError, Result};

pub const MAGIC: &[u8; 4] = b"ZSIG";
pub const VERSION: u8 = 1;

fn to_q32(x: f64) -> u32 {
    (x * 4294967296.0).round().clamp(1.0, u32::MAX as f64) as u32
}

fn from_q32(q: u32) -> f64 {
    q as f64 / 4294967296.0
}

pub fn write_signature(sig: &Signature) -> Vec<u8> {
    let p = sig.to_parts();
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&(p.alphabet.size() as u16 - 1).to_be_bytes());
    out.extend_from_slice(&(p.block_len as u32).to_be_bytes());
    out.extend_from_slice(&(p.depth as u32).to_be_bytes());
    out.extend_from_slice(&to_q32(p.epsilon).to_be_bytes());
    out.extend_from_slice(&p.h_min.to_be_bytes());
    out.extend_from_slice(&p.epsilon_prime.to_be_bytes());
    out.extend_from_slice(&p.train_h_u.to_be_bytes());
    out.extend_from_slice(&(p.contexts.len() as u32).to_be_bytes());
    for (c, n) in &p.contexts {
        out.extend_from_slice(&(c.len() as u32).to_be_bytes());
        out.extend_from_slice(c);
        for &k in n {
            out.extend_from_slice(&k.to_be_bytes());
        }
    }
    out
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.data.len() - self.pos < n {
            return Err(CtzError::Corrupt("truncated signature".into()));
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_be_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn read_signature(bytes: &[u8]) -> Result<Signature> {
    let mut r = Reader { data: bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(CtzError::Corrupt("bad signature magic".into()));
    }
    let version = r.take(1)?[0];
    if version != VERSION {
        return Err(CtzError::Corrupt(format!("unsupported signature version {version}")));
    }
    let a = u16::from_be_bytes(r.take(2)?.try_into().unwrap()) as usize + 1;
    let alphabet = Alphabet::new(a).map_err(|_| CtzError::Corrupt(format!("alphabet size {a}")))?;
    let block_len = r.u32()? as usize;
    let depth = r.u32()? as usize;
    let epsilon = from_q32(r.u32()?);
    let h_min = r.f64()?;
    let epsilon_prime = r.f64()?;
    let train_h_u = r.f64()?;
    let count = r.u32()? as usize;
    let mut contexts = Vec::with_capacity(count.min(bytes.len() / 4));
    for _ in 0..count {
        let len = r.u32()? as usize;
        if len > depth {
            return Err(CtzError::Corrupt("context longer than the depth".into()));
        }
        let c = r.take(len)?.to_vec();
        let n = (0..a).map(|_| r.u64()).collect::<Result<Vec<_>>>()?;
        contexts.push((c, n));
    }
    if r.pos != bytes.len() {
        return Err(CtzError::Corrupt("trailing bytes after the signature".into()));
    }
    Signature::from_parts(SignatureParts {
        alphabet,
        block_len,
        depth,
        epsilon,
        h_min,
        epsilon_prime,
        train_h_u,
        contexts,
    })
    .map_err(|e| CtzError::Corrupt(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ctz_core::classifier::cross_entropy;
    use ctz_core::Sequence;

    #[test]
    fn round_trip() {
        let x: Vec<u8> = (0..4000u32).map(|i| ((i / 3 + i / 7) % 3) as u8).collect();
        let x = Sequence::new(Alphabet::new(3).unwrap(), x).unwrap();
        let sig = Signature::train(&x, 64, 0.1).unwrap();
        let bytes = write_signature(&sig);
        let back = read_signature(&bytes).unwrap();
        assert_eq!(back.to_parts().contexts, sig.to_parts().contexts);
        assert!((back.epsilon() - 0.1).abs() < 1e-9);
        let z = &x.symbols()[10..74];
        assert_eq!(cross_entropy(z, &back).unwrap(), cross_entropy(z, &sig).unwrap());
        assert!(read_signature(&bytes[..bytes.len() - 1]).is_err());
    }
}
