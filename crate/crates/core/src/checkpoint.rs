//! Flat binary network files.
//!
//! Layout (all integers little-endian `u32`):
//!
//! ```text
//! magic       4 bytes  b"WFNN"
//! version     u32      1
//! activation  u32      hidden activation (0 identity, 1 tanh, 2 swish)
//! layers      u32      number of dense layers L
//! sizes       (L+1) x u32
//! body        per layer: weights [out][in] then biases [out], f32 LE
//! ```
//!
//! Parameters are computed in f64 and stored as f32, so a save/load cycle
//! rounds them; everything downstream of a checkpoint uses the loaded values.

use std::path::Path;

use crate::nn::{param_count, Activation, Mlp};
use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"WFNN";
pub const VERSION: u32 = 1;

pub fn encode(net: &Mlp) -> Vec<u8> {
    let sizes = net.sizes();
    let mut out = Vec::with_capacity(16 + 4 * sizes.len() + 4 * net.param_count());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&net.hidden_activation().code().to_le_bytes());
    out.extend_from_slice(&((sizes.len() - 1) as u32).to_le_bytes());
    for &s in sizes {
        out.extend_from_slice(&(s as u32).to_le_bytes());
    }
    for &p in net.params() {
        out.extend_from_slice(&(p as f32).to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8], path: &Path) -> Result<Mlp> {
    let bad = |reason: &str| Error::Format {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };
    let mut cursor = bytes;
    let mut read_u32 = |what: &str| -> Result<u32> {
        if cursor.len() < 4 {
            return Err(bad(&format!("truncated while reading {what}")));
        }
        let (head, rest) = cursor.split_at(4);
        cursor = rest;
        Ok(u32::from_le_bytes(head.try_into().unwrap()))
    };

    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(bad("bad magic"));
    }
    read_u32("magic")?;
    let version = read_u32("version")?;
    if version != VERSION {
        return Err(bad(&format!("unsupported version {version}")));
    }
    let activation = Activation::from_code(read_u32("activation")?).ok_or_else(|| bad("unknown activation code"))?;
    let layers = read_u32("layer count")? as usize;
    if layers == 0 || layers > 64 {
        return Err(bad("implausible layer count"));
    }
    let sizes = (0..=layers)
        .map(|_| read_u32("layer size").map(|s| s as usize))
        .collect::<Result<Vec<_>>>()?;
    if sizes.contains(&0) {
        return Err(bad("zero-width layer"));
    }
    let header = 16 + 4 * sizes.len();
    let expected = param_count(&sizes);
    let body = &bytes[header..];
    if body.len() != 4 * expected {
        return Err(bad(&format!(
            "expected {} parameter bytes, found {}",
            4 * expected,
            body.len()
        )));
    }
    let params = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    Mlp::from_parts(sizes, activation, params).ok_or_else(|| bad("inconsistent sizes"))
}

pub fn save(net: &Mlp, path: &Path) -> Result<()> {
    std::fs::write(path, encode(net)).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<Mlp> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes, path)
}

/// Rounds parameters to f32 precision, i.e. what a save/load cycle yields.
pub fn round_trip(net: &Mlp) -> Mlp {
    decode(&encode(net), Path::new("<memory>")).expect("encoder output decodes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn header_layout_is_exact() {
        let mut r = rng::stream(2, 0);
        let net = Mlp::new(&[4, 3, 2], Activation::Tanh, &mut r);
        let bytes = encode(&net);
        assert_eq!(&bytes[..4], b"WFNN");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 2);
        let sizes: Vec<u32> = bytes[16..28]
            .chunks(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        assert_eq!(sizes, vec![4, 3, 2]);
        assert_eq!(bytes.len(), 28 + 4 * (4 * 3 + 3 + 3 * 2 + 2));
        // first weight, row-major [out][in]
        let w0 = f32::from_le_bytes(bytes[28..32].try_into().unwrap());
        assert_eq!(w0, net.params()[0] as f32);
    }

    #[test]
    fn rejects_corrupt_files() {
        let mut r = rng::stream(2, 0);
        let net = Mlp::new(&[2, 2], Activation::Swish, &mut r);
        let good = encode(&net);
        let p = Path::new("x.bin");
        assert!(decode(&good[..good.len() - 1], p).is_err());
        let mut wrong_magic = good.clone();
        wrong_magic[0] = b'X';
        assert!(decode(&wrong_magic, p).is_err());
        let mut wrong_version = good.clone();
        wrong_version[4] = 9;
        assert!(decode(&wrong_version, p).is_err());
        assert!(decode(&good, p).is_ok());
    }

    #[test]
    fn round_trip_is_idempotent() {
        let mut r = rng::stream(5, 0);
        let net = Mlp::new(&[3, 8, 1], Activation::Swish, &mut r);
        let once = round_trip(&net);
        assert_eq!(once, round_trip(&once));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.bin");
        save(&once, &path).unwrap();
        assert_eq!(load(&path).unwrap(), once);
    }
}
