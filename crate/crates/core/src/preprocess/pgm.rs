//! Binary PGM (P5) images, 8-bit only.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub fn encode(side: usize, pixels: &[u8]) -> Vec<u8> {
    debug_assert_eq!(pixels.len(), side * side);
    let mut out = format!("P5\n{side} {side}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    out
}

/// Decodes a P5 file with maxval 255. Header comments are accepted.
/// Returns `(width, height, pixels)`.
pub fn decode(bytes: &[u8]) -> Result<(usize, usize, Vec<u8>)> {
    let mut pos = 0;
    let magic = next_token(bytes, &mut pos)?;
    if magic != b"P5" {
        return Err(Error::Image(format!(
            "expected P5 magic, found {:?}",
            String::from_utf8_lossy(magic)
        )));
    }
    let width = number(bytes, &mut pos, "width")?;
    let height = number(bytes, &mut pos, "height")?;
    let maxval = number(bytes, &mut pos, "maxval")?;
    if maxval != 255 {
        return Err(Error::Image(format!("only maxval 255 is supported, found {maxval}")));
    }
    // Exactly one whitespace byte separates the header from the raster.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(Error::Image("missing whitespace after maxval".into()));
    }
    pos += 1;
    let len = width
        .checked_mul(height)
        .ok_or_else(|| Error::Image("image dimensions overflow".into()))?;
    let raster = bytes
        .get(pos..pos + len)
        .ok_or_else(|| Error::Image(format!("raster truncated: need {len} bytes, have {}", bytes.len() - pos)))?;
    if bytes.len() != pos + len {
        return Err(Error::Image(format!("{} trailing bytes after raster", bytes.len() - pos - len)));
    }
    Ok((width, height, raster.to_vec()))
}

fn next_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a [u8]> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::Image("unexpected end of header".into()));
    }
    Ok(&bytes[start..*pos])
}

fn number(bytes: &[u8], pos: &mut usize, what: &str) -> Result<usize> {
    let tok = next_token(bytes, pos)?;
    std::str::from_utf8(tok)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Image(format!("bad {what} `{}`", String::from_utf8_lossy(tok))))
}

pub fn write(path: &Path, side: usize, pixels: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, encode(side, pixels)).map_err(|e| Error::io(path, e))
}

pub fn read(path: &Path) -> Result<(usize, usize, Vec<u8>)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}
