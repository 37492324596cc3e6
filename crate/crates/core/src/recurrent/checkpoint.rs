//! Parameter checkpoint files.
//!
//! Versioned little-endian binary layout: magic, version, the three shape
//! counts, then all parameters row-major in flat order. Write then read is
//! bit-exact.

use super::lstm::LstmParams;
use crate::{Error, Result};
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: u32 = 0x5247_4c50; // "RGLP"
const VERSION: u32 = 1;

pub fn write_params(path: &Path, params: &LstmParams) -> Result<()> {
    let mut buf = Vec::with_capacity(20 + params.n_params() * 8);
    buf.extend_from_slice(&MAGIC.to_le_bytes());
    buf.extend_from_slice(&VERSION.to_le_bytes());
    for dim in [params.d_in(), params.hidden(), params.d_out()] {
        buf.extend_from_slice(&(dim as u32).to_le_bytes());
    }
    for v in params.to_flat() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(&buf)?;
    Ok(())
}

fn read_u32(bytes: &[u8], off: &mut usize, what: &str) -> Result<u32> {
    let end = *off + 4;
    if end > bytes.len() {
        return Err(Error::TruncatedFile(what.into()));
    }
    let v = u32::from_le_bytes(bytes[*off..end].try_into().unwrap());
    *off = end;
    Ok(v)
}

pub fn read_params(path: &Path) -> Result<LstmParams> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    let mut off = 0;
    let magic = read_u32(&bytes, &mut off, "magic")?;
    if magic != MAGIC {
        return Err(Error::BadMagic {
            got: magic,
            expected: MAGIC,
        });
    }
    let version = read_u32(&bytes, &mut off, "version")?;
    if version != VERSION {
        return Err(Error::Parse(format!("unsupported checkpoint version {version}")));
    }
    let d_in = read_u32(&bytes, &mut off, "d_in")? as usize;
    let hidden = read_u32(&bytes, &mut off, "hidden")? as usize;
    let d_out = read_u32(&bytes, &mut off, "d_out")? as usize;

    let shape = LstmParams::new(d_in, hidden, d_out);
    let want = shape.n_params();
    if bytes.len() - off != want * 8 {
        return Err(Error::TruncatedFile(format!(
            "expected {} parameter bytes, found {}",
            want * 8,
            bytes.len() - off
        )));
    }
    let mut flat = Vec::with_capacity(want);
    for chunk in bytes[off..].chunks_exact(8) {
        flat.push(f64::from_le_bytes(chunk.try_into().unwrap()));
    }
    shape.from_flat(&flat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rng;
    use crate::recurrent::init_params;

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.params");
        let p = init_params(3, 7, 2, &mut Rng::new(4));
        write_params(&path, &p).unwrap();
        let q = read_params(&path).unwrap();
        let a = p.to_flat();
        let b = q.to_flat();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn bad_magic_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("junk.params");
        std::fs::write(&path, [0u8; 64]).unwrap();
        assert!(matches!(read_params(&path), Err(Error::BadMagic { .. })));
    }

    #[test]
    fn truncation_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.params");
        let p = init_params(2, 3, 1, &mut Rng::new(1));
        write_params(&path, &p).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 5]).unwrap();
        assert!(matches!(read_params(&path), Err(Error::TruncatedFile(_))));
    }
}
