//! Binary dump of an assembled [`StiffnessOperator`].
//!
//! Layout (all integers `u64` little-endian, values IEEE-754 `f64` LE bits):
//!
//! ```text
//! magic      8 bytes  "GFSTIFF\0"
//! version    u64      1
//! nodes      u64      n
//! nnz        u64
//! top        u64      number of top nodes
//! fixed      u64      number of fixed nodes
//! row_ptr    (3n + 1) x u64
//! col_idx    nnz x u64
//! values     nnz x f64
//! top_nodes  top x u64
//! fixed_nodes fixed x u64
//! sha256     32 bytes over everything above
//! ```
//!
//! Values are stored bit-for-bit, so a loaded operator reproduces the
//! in-memory matvec exactly.

use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fem::operator::StiffnessOperator;
use crate::fem::sparse::CsrMatrix;

pub const STIFFNESS_MAGIC: &[u8; 8] = b"GFSTIFF\0";
pub const STIFFNESS_FORMAT_VERSION: u64 = 1;

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Serializes the operator; returns the bytes and their hex SHA-256.
pub fn encode_operator(op: &StiffnessOperator) -> (Vec<u8>, String) {
    let k = op.matrix();
    let mut out = Vec::with_capacity(64 + 16 * k.nnz() + 8 * k.dim());
    out.extend_from_slice(STIFFNESS_MAGIC);
    let put = |v: u64, out: &mut Vec<u8>| out.extend_from_slice(&v.to_le_bytes());
    put(STIFFNESS_FORMAT_VERSION, &mut out);
    put(op.node_count() as u64, &mut out);
    put(k.nnz() as u64, &mut out);
    put(op.top_nodes().len() as u64, &mut out);
    put(op.fixed_nodes().len() as u64, &mut out);
    for &p in k.row_ptr() {
        put(p as u64, &mut out);
    }
    for &c in k.col_idx() {
        put(c as u64, &mut out);
    }
    for &v in k.values() {
        put(v.to_bits(), &mut out);
    }
    for &i in op.top_nodes().iter().chain(op.fixed_nodes()) {
        put(i as u64, &mut out);
    }
    let digest = Sha256::digest(&out);
    out.extend_from_slice(&digest);
    (out, hex(&digest))
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn u64(&mut self) -> Result<u64> {
        let end = self.pos + 8;
        let bytes = self
            .buf
            .get(self.pos..end)
            .ok_or_else(|| Error::format("stiffness dump", "truncated"))?;
        self.pos = end;
        Ok(u64::from_le_bytes(bytes.try_into().expect("8 bytes")))
    }

    fn usize(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| Error::format("stiffness dump", "index overflow"))
    }

    fn usizes(&mut self, count: usize) -> Result<Vec<usize>> {
        (0..count).map(|_| self.usize()).collect()
    }
}

/// Parses and verifies a dump. Returns the operator and its checksum.
pub fn decode_operator(bytes: &[u8]) -> Result<(StiffnessOperator, String)> {
    if bytes.len() < 8 + 5 * 8 + 32 || &bytes[..8] != STIFFNESS_MAGIC {
        return Err(Error::format("stiffness dump", "bad magic"));
    }
    let (body, trailer) = bytes.split_at(bytes.len() - 32);
    let digest = Sha256::digest(body);
    if digest.as_slice() != trailer {
        return Err(Error::Checksum {
            expected: hex(trailer),
            found: hex(&digest),
        });
    }
    let mut r = Reader { buf: body, pos: 8 };
    let version = r.u64()?;
    if version != STIFFNESS_FORMAT_VERSION {
        return Err(Error::format(
            "stiffness dump",
            format!("unsupported version {version}"),
        ));
    }
    let n = r.usize()?;
    let nnz = r.usize()?;
    let n_top = r.usize()?;
    let n_fixed = r.usize()?;
    let expected = 8 + 5 * 8 + 8 * ((3 * n + 1) + 2 * nnz + n_top + n_fixed);
    if body.len() != expected {
        return Err(Error::format(
            "stiffness dump",
            "length does not match header",
        ));
    }
    let row_ptr = r.usizes(3 * n + 1)?;
    let col_idx = r.usizes(nnz)?;
    let values = (0..nnz)
        .map(|_| r.u64().map(f64::from_bits))
        .collect::<Result<Vec<_>>>()?;
    let top = r.usizes(n_top)?;
    let fixed = r.usizes(n_fixed)?;
    let k = CsrMatrix::from_parts(3 * n, row_ptr, col_idx, values)?;
    Ok((StiffnessOperator::from_parts(k, top, fixed)?, hex(&digest)))
}

pub fn save_operator(op: &StiffnessOperator, path: &Path) -> Result<String> {
    let (bytes, sum) = encode_operator(op);
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    Ok(sum)
}

/// Loads a dump; if `expected_checksum` is given it must match.
pub fn load_operator(path: &Path, expected_checksum: Option<&str>) -> Result<StiffnessOperator> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let (op, sum) = decode_operator(&bytes)?;
    if let Some(want) = expected_checksum {
        if !want.eq_ignore_ascii_case(&sum) {
            return Err(Error::Checksum {
                expected: want.to_string(),
                found: sum,
            });
        }
    }
    Ok(op)
}
