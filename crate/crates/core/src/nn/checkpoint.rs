//! Binary parameter snapshots.
//!
//! Layout, all integers little-endian `u32`, reals little-endian `f64`:
//! magic `SPCNNCKP`, version, layer count, then per layer a one-byte kind
//! tag, the tensor count and, per tensor, its rank, dimensions and values.

use std::path::Path;

use super::network::{Layer, Network};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"SPCNNCKP";
pub const VERSION: u32 = 1;

fn kind_tag(layer: &Layer) -> u8 {
    match layer {
        Layer::Conv(_) => 1,
        Layer::Nonlin(_) => 2,
        Layer::SubNorm(_) => 3,
        Layer::DivNorm(_) => 4,
        Layer::Subs(_) => 5,
        Layer::LpPool(_) => 6,
        Layer::Full(_) => 7,
    }
}

fn put_u32(out: &mut Vec<u8>, v: usize) {
    out.extend_from_slice(&(v as u32).to_le_bytes());
}

pub fn encode(net: &Network) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    put_u32(&mut out, net.layers.len());
    for layer in &net.layers {
        out.push(kind_tag(layer));
        let dims = layer.param_dims();
        put_u32(&mut out, dims.len());
        for (d, values) in dims.iter().zip(layer.params()) {
            put_u32(&mut out, d.len());
            d.iter().for_each(|&n| put_u32(&mut out, n));
            values.iter().for_each(|v| out.extend_from_slice(&v.to_le_bytes()));
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::Checkpoint(format!("truncated at byte {}", self.pos)))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")) as usize)
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

/// Overwrites the parameters of `net`, which must have the same layer kinds
/// and tensor dimensions as the snapshot.
pub fn decode_into(bytes: &[u8], net: &mut Network) -> Result<()> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let version = r.u32()?;
    if version != VERSION as usize {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let count = r.u32()?;
    if count != net.layers.len() {
        return Err(Error::Checkpoint(format!(
            "snapshot has {count} layers, network has {}",
            net.layers.len()
        )));
    }
    for (k, layer) in net.layers.iter_mut().enumerate() {
        let tag = r.u8()?;
        if tag != kind_tag(layer) {
            return Err(Error::Checkpoint(format!("layer {k}: kind tag {tag}, expected {}", kind_tag(layer))));
        }
        let expected = layer.param_dims();
        if r.u32()? != expected.len() {
            return Err(Error::Checkpoint(format!("layer {k}: tensor count mismatch")));
        }
        for (t, (dims, values)) in expected.iter().zip(layer.params_mut()).enumerate() {
            let rank = r.u32()?;
            let found = (0..rank).map(|_| r.u32()).collect::<Result<Vec<_>>>()?;
            if &found != dims {
                return Err(Error::Checkpoint(format!(
                    "layer {k} tensor {t}: dimensions {found:?}, expected {dims:?}"
                )));
            }
            for v in values.iter_mut() {
                *v = r.f64()?;
            }
        }
    }
    if r.pos != bytes.len() {
        return Err(Error::Checkpoint(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    Ok(())
}

pub fn save(net: &Network, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, encode(net)).map_err(|e| Error::io(path, e))
}

pub fn load_into(path: &Path, net: &mut Network) -> Result<()> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_into(&bytes, net)
}
