//! `TNS3` tensor and `MSK3` mask files.
//!
//! Both start with a 4-byte magic and three little-endian `u32` dims
//! `(n1, n2, n3)`. `TNS3` carries `n1·n2·n3` little-endian `f64` values and
//! `MSK3` one byte (0 or 1) per entry, both in slice-major, column-major order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::{Mask3, Shape, Tensor3};

pub const TENSOR_MAGIC: &[u8; 4] = b"TNS3";
pub const MASK_MAGIC: &[u8; 4] = b"MSK3";

fn write_header<W: Write>(w: &mut W, magic: &[u8; 4], shape: Shape) -> Result<()> {
    w.write_all(magic)?;
    for d in [shape.n1, shape.n2, shape.n3] {
        let d = u32::try_from(d)
            .map_err(|_| Error::Format(format!("dimension {d} does not fit in u32")))?;
        w.write_all(&d.to_le_bytes())?;
    }
    Ok(())
}

/// Reads everything and splits off a validated header.
fn read_body<R: Read>(r: &mut R, magic: &[u8; 4], elem: usize) -> Result<(Shape, Vec<u8>)> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    if buf.len() < 16 {
        return Err(Error::Format(format!(
            "file is {} bytes, shorter than the 16-byte header",
            buf.len()
        )));
    }
    if &buf[..4] != magic {
        return Err(Error::Format(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(&buf[..4]),
            String::from_utf8_lossy(magic)
        )));
    }
    let dim = |o: usize| u32::from_le_bytes(buf[o..o + 4].try_into().expect("4 bytes")) as usize;
    let shape = Shape::new(dim(4), dim(8), dim(12));
    if shape.n1 == 0 || shape.n2 == 0 || shape.n3 == 0 {
        return Err(Error::Format(format!(
            "header has a zero dimension: {shape}"
        )));
    }
    let expect = shape
        .n1
        .checked_mul(shape.n2)
        .and_then(|v| v.checked_mul(shape.n3))
        .and_then(|v| v.checked_mul(elem))
        .ok_or_else(|| Error::Format(format!("header dims {shape} overflow")))?;
    let payload = buf.len() - 16;
    if payload != expect {
        return Err(Error::Format(format!(
            "header dims {shape} need {expect} payload bytes, found {payload}"
        )));
    }
    buf.drain(..16);
    Ok((shape, buf))
}

pub fn write_tensor<W: Write>(w: &mut W, t: &Tensor3) -> Result<()> {
    write_header(w, TENSOR_MAGIC, t.shape())?;
    for v in t.as_slice() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_tensor<R: Read>(r: &mut R) -> Result<Tensor3> {
    let (shape, body) = read_body(r, TENSOR_MAGIC, 8)?;
    let data: Vec<f64> = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::Format(
            "tensor payload contains non-finite values".into(),
        ));
    }
    Tensor3::from_vec(shape, data)
}

pub fn write_mask<W: Write>(w: &mut W, m: &Mask3) -> Result<()> {
    write_header(w, MASK_MAGIC, m.shape())?;
    let bytes: Vec<u8> = m.as_slice().iter().map(|&b| b as u8).collect();
    w.write_all(&bytes)?;
    Ok(())
}

pub fn read_mask<R: Read>(r: &mut R) -> Result<Mask3> {
    let (shape, body) = read_body(r, MASK_MAGIC, 1)?;
    let data = body
        .iter()
        .map(|&b| match b {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(Error::Format(format!("mask byte {other} is not 0 or 1"))),
        })
        .collect::<Result<Vec<bool>>>()?;
    Mask3::from_vec(shape, data)
}

pub fn save_tensor(path: impl AsRef<Path>, t: &Tensor3) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_tensor(&mut w, t)?;
    w.flush()?;
    Ok(())
}

pub fn load_tensor(path: impl AsRef<Path>) -> Result<Tensor3> {
    read_tensor(&mut BufReader::new(File::open(path)?))
}

pub fn save_mask(path: impl AsRef<Path>, m: &Mask3) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_mask(&mut w, m)?;
    w.flush()?;
    Ok(())
}

pub fn load_mask(path: impl AsRef<Path>) -> Result<Mask3> {
    read_mask(&mut BufReader::new(File::open(path)?))
}
