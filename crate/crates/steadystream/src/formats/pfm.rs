//! Single-channel PFM (`Pf`): 32-bit floats, rows stored bottom-up, the sign
//! of the scale line selects endianness (negative = little-endian).

use steadystream_core::refine::DepthMap;

use super::{parse_err, FormatError, HeaderCursor, Result};

const MAX_DIM: usize = 1 << 20;

/// NaN, infinite and non-positive values become invalid pixels.
pub fn read_pfm(bytes: &[u8]) -> Result<DepthMap> {
    let mut cur = HeaderCursor::new(bytes);
    match cur.token(false).unwrap_or("") {
        "Pf" => {}
        other => return Err(FormatError::UnsupportedMagic(other.to_string())),
    }
    let width = cur.expect_usize("width", MAX_DIM)?;
    let height = cur.expect_usize("height", MAX_DIM)?;
    let line = cur.line;
    let scale_tok = cur.token(false).ok_or_else(|| parse_err(line, "missing scale"))?;
    let scale: f64 = scale_tok.parse().map_err(|_| parse_err(line, format!("bad scale {scale_tok:?}")))?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(parse_err(line, "scale must be finite and nonzero"));
    }
    let little = scale < 0.0;
    cur.end_header()?;

    let count = width.checked_mul(height).ok_or_else(|| parse_err(line, "image too large"))?;
    let data = cur.rest();
    if data.len() != count * 4 {
        let what = if data.len() < count * 4 { "truncated pixel data" } else { "trailing data after payload" };
        return Err(parse_err(cur.line, what));
    }
    let mut depths = vec![0.0; count];
    for (i, chunk) in data.chunks_exact(4).enumerate() {
        let b = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let v = if little { f32::from_le_bytes(b) } else { f32::from_be_bytes(b) };
        let (x, file_row) = (i % width, i / width);
        depths[(height - 1 - file_row) * width + x] = v as f64;
    }
    Ok(DepthMap::from_depths(width, height, depths)?)
}

/// Little-endian, invalid pixels written as 0.
pub fn write_pfm(map: &DepthMap) -> Vec<u8> {
    let (w, h) = (map.width(), map.height());
    let mut out = format!("Pf\n{w} {h}\n-1.0\n").into_bytes();
    out.reserve(w * h * 4);
    for y in (0..h).rev() {
        for x in 0..w {
            let v = if map.is_valid(x, y) { map.depth(x, y) as f32 } else { 0.0 };
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}
