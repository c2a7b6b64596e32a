//! Symbol files: one symbol per byte, every byte below the alphabet size.
//! With `A = 256` any file qualifies.

use std::fs;
use std::path::Path;

use ctz_core::{Alphabet, Sequence};

use crate::{CtzError, Result};

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| CtzError::io(path, e))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| CtzError::io(path, e))
}

pub fn read_sequence(path: &Path, alphabet: Alphabet) -> Result<Sequence> {
    Ok(Sequence::new(alphabet, read_bytes(path)?)?)
}
