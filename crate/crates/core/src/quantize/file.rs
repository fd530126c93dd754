//! Binary matrix files.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "BTQM"            magic
//! u32               format version (1)
//! u8                phase space (0 torus, 1 sphere)
//! u64               N
//! u64               dimension
//! u64               length of the symbol record in bytes
//! [u8]              symbol record (UTF-8, see `SymbolSpec::to_record`)
//! [f64; 2 * dim^2]  entries, row-major, (re, im) pairs
//! ```

use std::path::Path;

use num_complex::Complex64;

use super::{bergman_dimension, ToeplitzMatrix};
use crate::error::{Error, Result};
use crate::geometry::{make_phase_space, SpaceKind, SymbolSpec};
use crate::linalg::CMatrix;

pub const MATRIX_MAGIC: &[u8; 4] = b"BTQM";
pub const MATRIX_VERSION: u32 = 1;

/// Upper bound on the symbol record, far above anything the builders accept.
const MAX_RECORD: u64 = 1 << 24;

pub fn encode_matrix(t: &ToeplitzMatrix) -> Vec<u8> {
    let record = t.symbol.to_record();
    let mut out = Vec::with_capacity(33 + record.len() + 16 * t.dim * t.dim);
    out.extend_from_slice(MATRIX_MAGIC);
    out.extend_from_slice(&MATRIX_VERSION.to_le_bytes());
    out.push(t.space.kind.to_tag());
    out.extend_from_slice(&(t.n as u64).to_le_bytes());
    out.extend_from_slice(&(t.dim as u64).to_le_bytes());
    out.extend_from_slice(&(record.len() as u64).to_le_bytes());
    out.extend_from_slice(record.as_bytes());
    for i in 0..t.dim {
        for j in 0..t.dim {
            let z = t.entries[(i, j)];
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.buf.len() < n {
            return Err(Error::Format(format!("truncated {what}")));
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}

pub fn decode_matrix(bytes: &[u8]) -> Result<ToeplitzMatrix> {
    let mut r = Reader { buf: bytes };
    if r.take(4, "magic")? != MATRIX_MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u32::from_le_bytes(r.take(4, "version")?.try_into().unwrap());
    if version != MATRIX_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let tag = r.take(1, "kind")?[0];
    let kind = SpaceKind::from_tag(tag).ok_or_else(|| Error::Format(format!("unknown space tag {tag}")))?;
    let n = r.u64("N")?;
    let dim = r.u64("dimension")?;
    let record_len = r.u64("record length")?;
    if record_len > MAX_RECORD {
        return Err(Error::Format(format!("symbol record of {record_len} bytes")));
    }
    let record = std::str::from_utf8(r.take(record_len as usize, "symbol record")?)
        .map_err(|_| Error::Format("symbol record is not UTF-8".into()))?;
    let symbol = SymbolSpec::parse_record(record).map_err(|e| Error::Format(format!("symbol record: {e}")))?;
    if symbol.kind() != kind {
        return Err(Error::Format("symbol kind disagrees with header".into()));
    }
    let n = usize::try_from(n).map_err(|_| Error::Format("N overflows".into()))?;
    let space = make_phase_space(kind);
    if n == 0 || bergman_dimension(&space, n) as u64 != dim {
        return Err(Error::Format(format!("dimension {dim} does not match N = {n} on the {kind}")));
    }
    let dim = dim as usize;
    let expected = dim.checked_mul(dim).and_then(|d| d.checked_mul(16));
    if expected != Some(r.buf.len()) {
        return Err(Error::Format(format!("expected {dim}x{dim} entries, found {} trailing bytes", r.buf.len())));
    }
    let data = r.buf;
    let f = |off: usize| f64::from_le_bytes(data[off..off + 8].try_into().unwrap());
    let entries = CMatrix::from_fn(dim, dim, |i, j| {
        let off = 16 * (i * dim + j);
        Complex64::new(f(off), f(off + 8))
    });
    Ok(ToeplitzMatrix { space, n, dim, entries, symbol })
}

/// Write atomically: the file appears complete or not at all.
pub fn write_matrix(t: &ToeplitzMatrix, path: &Path) -> Result<()> {
    crate::fsutil::write_atomic(path, &encode_matrix(t))
}

pub fn read_matrix(path: &Path) -> Result<ToeplitzMatrix> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_matrix(&bytes)
}
