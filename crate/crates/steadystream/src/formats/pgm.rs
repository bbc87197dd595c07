//! Netpbm grayscale: `P2` (ASCII) and `P5` (binary, 8- or 16-bit big-endian).

use steadystream_core::scoring::GrayImage;

use super::{parse_err, FormatError, HeaderCursor, Result};

/// Largest accepted width or height.
const MAX_DIM: usize = 1 << 20;

/// Pixels are scaled to `[0, 1]` by maxval.
pub fn read_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut cur = HeaderCursor::new(bytes);
    let magic = cur.token(false).unwrap_or("");
    let ascii = match magic {
        "P2" => true,
        "P5" => false,
        other => return Err(FormatError::UnsupportedMagic(other.to_string())),
    };
    let width = cur.expect_usize("width", MAX_DIM)?;
    let height = cur.expect_usize("height", MAX_DIM)?;
    let maxval = cur.expect_usize("maxval", 65535)?;
    let count = width.checked_mul(height).ok_or_else(|| parse_err(cur.line, "image too large"))?;
    let scale = 1.0 / maxval as f64;

    let pixels = if ascii {
        // At least one digit and one separator per sample; checked before allocating.
        if cur.rest().len() < 2 * count - 1 {
            return Err(parse_err(cur.line, "truncated pixel data"));
        }
        let mut pixels = Vec::with_capacity(count);
        for _ in 0..count {
            let line = cur.line;
            let tok = cur.token(true).ok_or_else(|| parse_err(line, "truncated pixel data"))?;
            match tok.parse::<usize>() {
                Ok(v) if v <= maxval => pixels.push(v as f64 * scale),
                _ => return Err(parse_err(line, format!("bad sample {tok:?}"))),
            }
        }
        cur.expect_end(true)?;
        pixels
    } else {
        cur.end_header()?;
        let bps = if maxval > 255 { 2 } else { 1 };
        let data = cur.rest();
        if data.len() != count * bps {
            let what = if data.len() < count * bps { "truncated pixel data" } else { "trailing data after payload" };
            return Err(parse_err(cur.line, what));
        }
        let mut pixels = Vec::with_capacity(count);
        for chunk in data.chunks_exact(bps) {
            let v = if bps == 2 { u16::from_be_bytes([chunk[0], chunk[1]]) as usize } else { chunk[0] as usize };
            if v > maxval {
                return Err(parse_err(cur.line, format!("sample {v} exceeds maxval {maxval}")));
            }
            pixels.push(v as f64 * scale);
        }
        pixels
    };
    Ok(GrayImage::new(width, height, pixels)?)
}

/// Binary `P5`; two bytes per sample when `maxval > 255`. Pixels are clamped
/// to `[0, 1]` and rounded.
pub fn write_pgm(img: &GrayImage, maxval: u16) -> Vec<u8> {
    let maxval = maxval.max(1);
    let mut out = format!("P5\n{} {}\n{}\n", img.width(), img.height(), maxval).into_bytes();
    for p in img.pixels() {
        let v = (p.clamp(0.0, 1.0) * maxval as f64).round() as u16;
        if maxval > 255 {
            out.extend_from_slice(&v.to_be_bytes());
        } else {
            out.push(v as u8);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ascii_single_pixel() {
        let img = read_pgm(b"P2\n1 1\n255\n255\n").unwrap();
        assert_eq!(img.pixels(), &[1.0]);
    }

    #[test]
    fn binary_quarter_steps() {
        let mut bytes = b"P5\n# comment\n2 2\n255\n".to_vec();
        bytes.extend_from_slice(&[0, 85, 170, 255]);
        let img = read_pgm(&bytes).unwrap();
        for (got, want) in img.pixels().iter().zip([0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]) {
            assert!((got - want).abs() < 1e-9);
        }
    }

    #[test]
    fn sixteen_bit_is_big_endian() {
        let mut bytes = b"P5 2 1 65535\n".to_vec();
        bytes.extend_from_slice(&[0x80, 0x00, 0xff, 0xff]);
        let img = read_pgm(&bytes).unwrap();
        assert_eq!(img.pixels(), &[32768.0 / 65535.0, 1.0]);
        assert_eq!(read_pgm(&write_pgm(&img, 65535)).unwrap(), img);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(read_pgm(b"P6\n1 1\n255\n\0\0\0"), Err(FormatError::UnsupportedMagic("P6".into())));
        assert!(read_pgm(b"P5\n2 2\n255\n\0\0\0").is_err());
        assert!(read_pgm(b"P5\n1 1\n255\n\0\0").is_err());
        assert!(read_pgm(b"P2\n2 1\n255\n1 2 3\n").is_err());
        assert!(read_pgm(b"P2\n2 1\n255\n1 256\n").is_err());
        assert!(read_pgm(b"P2\n2 1\n70000\n1 2\n").is_err());
        assert!(read_pgm(b"P2\n0 1\n255\n").is_err());
        // Declared size far larger than the payload fails before allocating.
        assert!(read_pgm(b"P2\n1000000 1000000\n255\n1\n").is_err());
        assert!(read_pgm(b"P5\n1048576 1048576\n255\n\0").is_err());
        assert!(read_pgm(b"P2\n2 1\n255\n1 2 # ok\n").is_ok());
    }

    #[test]
    fn write_read_round_trip() {
        let img = GrayImage::from_fn(5, 3, |x, y| ((x * 3 + y * 7) % 256) as f64 / 255.0).unwrap();
        let back = read_pgm(&write_pgm(&img, 255)).unwrap();
        for (a, b) in back.pixels().iter().zip(img.pixels()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
