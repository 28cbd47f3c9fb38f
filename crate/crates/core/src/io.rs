//! File formats: a small binary grid container for images and sinograms,
//! and a human-readable text format for filter coefficients.
//!
//! Binary layout (little-endian, 16-byte header):
//!
//! ```text
//! offset 0  magic  "TOMO"
//! offset 4  version byte (1)
//! offset 5  dtype byte (1 = f32)
//! offset 6  reserved u16 (0)
//! offset 8  rows u32
//! offset 12 cols u32
//! offset 16 rows·cols f32 values, row-major
//! ```
//!
//! Values are stored in 32-bit precision; loading and re-saving a file is
//! byte-identical.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::filters::IirFilterPair;
use crate::scalar::{cast, Scalar};
use crate::types::{Image, Sinogram};

const MAGIC: [u8; 4] = *b"TOMO";
const VERSION: u8 = 1;
const DTYPE_F32: u8 = 1;

fn encode_grid<T: Scalar>(rows: usize, cols: usize, values: &[T]) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + values.len() * 4);
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.push(DTYPE_F32);
    out.extend_from_slice(&0u16.to_le_bytes());
    out.extend_from_slice(&(rows as u32).to_le_bytes());
    out.extend_from_slice(&(cols as u32).to_le_bytes());
    for v in values {
        out.extend_from_slice(&(v.to_f32().unwrap()).to_le_bytes());
    }
    out
}

fn decode_grid<T: Scalar>(bytes: &[u8]) -> Result<(usize, usize, Vec<T>)> {
    let parse = |offset: usize, message: &str| Error::Parse {
        offset: offset as u64,
        message: message.into(),
    };
    if bytes.len() < 16 {
        return Err(parse(bytes.len(), "truncated header (need 16 bytes)"));
    }
    if bytes[..4] != MAGIC {
        return Err(parse(0, "bad magic, expected \"TOMO\""));
    }
    if bytes[4] != VERSION {
        return Err(parse(4, "unsupported version"));
    }
    if bytes[5] != DTYPE_F32 {
        return Err(parse(5, "unsupported dtype tag"));
    }
    if bytes[6..8] != [0, 0] {
        return Err(parse(6, "reserved bytes must be zero"));
    }
    let rows = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let expected = 16 + rows
        .checked_mul(cols)
        .and_then(|c| c.checked_mul(4))
        .ok_or_else(|| parse(8, "dimensions overflow"))?;
    if bytes.len() < expected {
        return Err(parse(bytes.len(), "truncated data section"));
    }
    if bytes.len() > expected {
        return Err(parse(expected, "trailing bytes after data section"));
    }
    let values = bytes[16..]
        .chunks_exact(4)
        .map(|c| cast::<T>(f32::from_le_bytes(c.try_into().unwrap()) as f64))
        .collect();
    Ok((rows, cols, values))
}

pub fn save_image<T: Scalar>(path: impl AsRef<Path>, img: &Image<T>) -> Result<()> {
    fs::write(path, encode_grid(img.size(), img.size(), img.data()))?;
    Ok(())
}

pub fn load_image<T: Scalar>(path: impl AsRef<Path>) -> Result<Image<T>> {
    let bytes = fs::read(path)?;
    let (rows, cols, values) = decode_grid(&bytes)?;
    if rows != cols {
        return Err(Error::dims("square image", format!("{rows}x{cols}")));
    }
    Image::new(rows, values)
}

pub fn save_sinogram<T: Scalar>(path: impl AsRef<Path>, sino: &Sinogram<T>) -> Result<()> {
    fs::write(
        path,
        encode_grid(sino.num_angles(), sino.num_bins(), sino.data()),
    )?;
    Ok(())
}

pub fn load_sinogram<T: Scalar>(path: impl AsRef<Path>) -> Result<Sinogram<T>> {
    let bytes = fs::read(path)?;
    let (rows, cols, values) = decode_grid(&bytes)?;
    Sinogram::new(rows, cols, values)
}

/// Serialize fitted coefficients with their achieved mean-square error.
/// Floats print in shortest round-trip form, so load/save cycles are exact.
pub fn save_coeffs<T: Scalar>(
    path: impl AsRef<Path>,
    filter: &IirFilterPair<T>,
    mse: T,
) -> Result<()> {
    let fmt = |values: &[T]| {
        values
            .iter()
            .map(|v| format!("{}", v.to_f64().unwrap()))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let text = format!(
        "houghfbp-coeffs v1\nm {}\nq {}\nb {}\na {}\nmse {}\n",
        filter.feedforward_order(),
        filter.feedback_order(),
        fmt(filter.feedforward()),
        fmt(filter.feedback()),
        mse.to_f64().unwrap(),
    );
    fs::write(path, text)?;
    Ok(())
}

pub fn load_coeffs<T: Scalar>(path: impl AsRef<Path>) -> Result<(IirFilterPair<T>, T)> {
    let text = fs::read_to_string(path)?;
    parse_coeffs(&text)
}

fn parse_coeffs<T: Scalar>(text: &str) -> Result<(IirFilterPair<T>, T)> {
    let mut offset = 0u64;
    let mut m = None;
    let mut q = None;
    let mut b: Option<Vec<T>> = None;
    let mut a: Option<Vec<T>> = None;
    let mut mse = None;

    for (index, line) in text.lines().enumerate() {
        let fail = |message: String| Error::Parse { offset, message };
        let parse_floats = |rest: &str| -> Result<Vec<T>> {
            rest.split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>().map(cast::<T>).map_err(|_| Error::Parse {
                        offset,
                        message: format!("bad float {tok:?}"),
                    })
                })
                .collect()
        };
        if index == 0 {
            if line.trim() != "houghfbp-coeffs v1" {
                return Err(fail("expected header \"houghfbp-coeffs v1\"".into()));
            }
        } else if !line.trim().is_empty() {
            let (key, rest) = line.split_once(' ').unwrap_or((line.trim(), ""));
            match key {
                "m" => {
                    m = Some(rest.trim().parse::<usize>().map_err(|_| {
                        fail(format!("bad feedforward order {:?}", rest.trim()))
                    })?)
                }
                "q" => {
                    q = Some(rest.trim().parse::<usize>().map_err(|_| {
                        fail(format!("bad feedback order {:?}", rest.trim()))
                    })?)
                }
                "b" => b = Some(parse_floats(rest)?),
                "a" => a = Some(parse_floats(rest)?),
                "mse" => {
                    mse = Some(rest.trim().parse::<f64>().map(cast::<T>).map_err(|_| {
                        fail(format!("bad mse value {:?}", rest.trim()))
                    })?)
                }
                other => return Err(fail(format!("unknown key {other:?}"))),
            }
        }
        offset += line.len() as u64 + 1;
    }

    let end = text.len() as u64;
    let missing = |what: &str| Error::Parse {
        offset: end,
        message: format!("missing {what}"),
    };
    let m = m.ok_or_else(|| missing("m line"))?;
    let q = q.ok_or_else(|| missing("q line"))?;
    let b = b.ok_or_else(|| missing("b line"))?;
    let a = a.unwrap_or_default();
    let mse = mse.ok_or_else(|| missing("mse line"))?;
    if b.len() != m {
        return Err(Error::Parse {
            offset: end,
            message: format!("m is {m} but {} feedforward values given", b.len()),
        });
    }
    if a.len() != q {
        return Err(Error::Parse {
            offset: end,
            message: format!("q is {q} but {} feedback values given", a.len()),
        });
    }
    Ok((IirFilterPair::new(b, a)?, mse))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp(name: &str) -> std::path::PathBuf {
        let mut p = std::env::temp_dir();
        p.push(format!("houghfbp-io-{}-{name}", std::process::id()));
        p
    }

    fn random_values(n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| ((i.wrapping_mul(2654435761) % 10007) as f64 - 5000.0) * 0.125)
            .collect()
    }

    #[test]
    fn image_round_trip_is_bit_exact_at_stored_precision() {
        let path = tmp("img.tomo");
        let img = Image::new(32, random_values(32 * 32)).unwrap();
        save_image(&path, &img).unwrap();
        let loaded: Image = load_image(&path).unwrap();
        save_image(&path, &loaded).unwrap();
        let reloaded: Image = load_image(&path).unwrap();
        assert_eq!(loaded, reloaded);
        for (a, b) in img.data().iter().zip(loaded.data()) {
            assert_eq!(*a as f32, *b as f32);
        }
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn sinogram_round_trip() {
        let path = tmp("sino.tomo");
        let sino = Sinogram::new(12, 40, random_values(480)).unwrap();
        save_sinogram(&path, &sino).unwrap();
        let loaded: Sinogram = load_sinogram(&path).unwrap();
        assert_eq!(loaded.num_angles(), 12);
        assert_eq!(loaded.num_bins(), 40);
        for (a, b) in sino.data().iter().zip(loaded.data()) {
            assert_eq!(*a as f32, *b as f32);
        }
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn truncated_file_is_a_parse_error() {
        let path = tmp("trunc.tomo");
        let img = Image::new(8, random_values(64)).unwrap();
        save_image(&path, &img).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes.truncate(bytes.len() - 7);
        std::fs::write(&path, &bytes).unwrap();
        match load_image::<f64>(&path) {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, bytes.len() as u64),
            other => panic!("expected parse error, got {other:?}"),
        }
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn bad_magic_and_trailing_bytes_are_rejected() {
        let path = tmp("magic.tomo");
        let img = Image::new(4, random_values(16)).unwrap();
        save_image(&path, &img).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[0] = b'X';
        std::fs::write(&path, &bytes).unwrap();
        match load_image::<f64>(&path) {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 0),
            other => panic!("expected parse error, got {other:?}"),
        }
        bytes[0] = b'T';
        bytes.push(0);
        std::fs::write(&path, &bytes).unwrap();
        match load_image::<f64>(&path) {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, (bytes.len() - 1) as u64),
            other => panic!("expected parse error, got {other:?}"),
        }
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn coeffs_round_trip_preserves_error_to_full_precision() {
        let path = tmp("coeffs.txt");
        let filter = IirFilterPair::new(
            vec![0.12345678901234567, -0.9876543210987654, 3.5e-17],
            vec![-0.5000000000000001, 0.2499999999999999],
        )
        .unwrap();
        let mse = 1.2345678901234567e-13;
        save_coeffs(&path, &filter, mse).unwrap();
        let (loaded, loaded_mse): (IirFilterPair, f64) = load_coeffs(&path).unwrap();
        assert_eq!(loaded.feedforward(), filter.feedforward());
        assert_eq!(loaded.feedback(), filter.feedback());
        assert_eq!(loaded_mse.to_bits(), mse.to_bits());
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn malformed_coeffs_report_offsets() {
        let text = "houghfbp-coeffs v1\nm 2\nq 1\nb 0.5 oops\na -0.5\nmse 1e-9\n";
        match parse_coeffs::<f64>(text) {
            Err(Error::Parse { offset, message }) => {
                assert_eq!(offset, 27, "{message}");
                assert!(message.contains("oops"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        let text = "houghfbp-coeffs v1\nm 2\nq 1\nb 0.5 0.25\nmse 1e-9\n";
        assert!(matches!(
            parse_coeffs::<f64>(text),
            Err(Error::Parse { .. })
        ));
    }
}
