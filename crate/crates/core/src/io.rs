//! On-disk formats.
//!
//! Density matrix dump, all integers and floats little-endian:
//!
//! ```text
//! magic     8 bytes  "HUBRHO01"
//! dim       u64
//! entries   dim * dim pairs (re: f64, im: f64), row-major
//! checksum  8 bytes  leading bytes of SHA-256 over dim and entries
//! ```

use std::io::{Read, Write};

use sha2::{Digest, Sha256};

use crate::aux_space::{AuxSpace, LabelledEntry};
use crate::error::{Error, Result};
use crate::linalg::{DenseOperator, SparseOperator, C64};

pub const RHO_MAGIC: &[u8; 8] = b"HUBRHO01";

/// Refuse headers that claim more than this many rows.
const MAX_DUMP_DIM: u64 = 1 << 16;

fn checksum(payload: &[u8]) -> [u8; 8] {
    let digest = Sha256::digest(payload);
    let mut out = [0u8; 8];
    out.copy_from_slice(&digest[..8]);
    out
}

pub fn write_rho<W: Write>(mut w: W, rho: &DenseOperator) -> Result<()> {
    let mut payload = Vec::with_capacity(8 + 16 * rho.as_slice().len());
    payload.extend_from_slice(&(rho.dim() as u64).to_le_bytes());
    for z in rho.as_slice() {
        payload.extend_from_slice(&z.re.to_le_bytes());
        payload.extend_from_slice(&z.im.to_le_bytes());
    }
    w.write_all(RHO_MAGIC)?;
    w.write_all(&payload)?;
    w.write_all(&checksum(&payload))?;
    w.flush()?;
    Ok(())
}

pub fn read_rho<R: Read>(mut r: R) -> Result<DenseOperator> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != RHO_MAGIC {
        return Err(Error::Format("not a density-matrix dump (bad magic)".into()));
    }
    let mut dim_bytes = [0u8; 8];
    r.read_exact(&mut dim_bytes)?;
    let dim = u64::from_le_bytes(dim_bytes);
    if dim == 0 || dim > MAX_DUMP_DIM {
        return Err(Error::Format(format!("implausible dimension {dim}")));
    }
    let n = (dim * dim) as usize;
    let mut body = vec![0u8; 16 * n];
    r.read_exact(&mut body)?;
    let mut stored = [0u8; 8];
    r.read_exact(&mut stored)?;
    let mut payload = dim_bytes.to_vec();
    payload.extend_from_slice(&body);
    if checksum(&payload) != stored {
        return Err(Error::Format("checksum mismatch".into()));
    }
    let f = |b: &[u8]| f64::from_le_bytes(b.try_into().expect("8-byte chunk"));
    let data = body
        .chunks_exact(16)
        .map(|c| C64::new(f(&c[..8]), f(&c[8..])))
        .collect();
    Ok(DenseOperator::from_row_major(dim as usize, data)?)
}

/// JSON array of `{row, col, re, im}` entries with vertex labels.
pub fn write_labelled_json<W: Write>(w: W, space: &AuxSpace, op: &SparseOperator) -> Result<()> {
    if op.shape() != (space.dim(), space.dim()) {
        return Err(Error::InvalidArgument(format!(
            "operator of shape {:?} on an auxiliary space of dimension {}",
            op.shape(),
            space.dim()
        )));
    }
    serde_json::to_writer_pretty(w, &space.labelled_entries(op))
        .map_err(|e| Error::Format(e.to_string()))
}

/// Inverse of [`write_labelled_json`].
pub fn read_labelled_json<R: Read>(r: R, space: &AuxSpace) -> Result<SparseOperator> {
    let entries: Vec<LabelledEntry> =
        serde_json::from_reader(r).map_err(|e| Error::Format(e.to_string()))?;
    let lookup = |label: &str| -> Result<usize> {
        crate::aux_space::AuxVertex::parse(label)
            .and_then(|v| space.index(v))
            .ok_or_else(|| Error::Format(format!("unknown vertex label {label:?}")))
    };
    let triplets = entries
        .iter()
        .map(|e| Ok((lookup(&e.row)?, lookup(&e.col)?, C64::new(e.re, e.im))))
        .collect::<Result<Vec<_>>>()?;
    Ok(SparseOperator::from_triplets(space.dim(), space.dim(), triplets)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lax::{LaxFamily, LaxParams};

    fn sample() -> DenseOperator {
        DenseOperator::from_fn(4, |i, j| C64::new(i as f64 - 0.25 * j as f64, (i * j) as f64 / 7.0))
    }

    #[test]
    fn rho_round_trip_is_exact() {
        let rho = sample();
        let mut buf = Vec::new();
        write_rho(&mut buf, &rho).unwrap();
        assert_eq!(buf.len(), 8 + 8 + 16 * 16 + 8);
        assert_eq!(&buf[..8], RHO_MAGIC);
        let back = read_rho(buf.as_slice()).unwrap();
        assert_eq!(back.as_slice(), rho.as_slice());
    }

    #[test]
    fn corrupted_dumps_rejected() {
        let mut buf = Vec::new();
        write_rho(&mut buf, &sample()).unwrap();
        let mut flipped = buf.clone();
        flipped[40] ^= 1;
        assert!(matches!(read_rho(flipped.as_slice()), Err(Error::Format(_))));
        let mut bad_magic = buf.clone();
        bad_magic[0] = b'X';
        assert!(matches!(read_rho(bad_magic.as_slice()), Err(Error::Format(_))));
        assert!(matches!(read_rho(&buf[..buf.len() - 3]), Err(Error::Io(_))));
    }

    #[test]
    fn labelled_json_round_trip() {
        let p = LaxParams::new(C64::new(0.3, 0.4), C64::new(-0.7, 0.2), 1.0);
        let fam = LaxFamily::new(p, 3).unwrap();
        let mut buf = Vec::new();
        write_labelled_json(&mut buf, &fam.space, &fam.x).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.contains("\"3/2-\""));
        let back = read_labelled_json(buf.as_slice(), &fam.space).unwrap();
        assert_eq!(back.max_abs_diff(&fam.x).unwrap(), 0.0);
        let wrong = AuxSpace::new(2).unwrap();
        assert!(write_labelled_json(Vec::new(), &wrong, &fam.x).is_err());
    }
}
