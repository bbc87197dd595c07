//! ASCII PLY point clouds: one `vertex` element with `x`, `y`, `z` and an
//! optional `confidence`; other scalar properties are read and ignored.

use steadystream_core::losses::PointSet;
use steadystream_core::Vec3;

use super::{fmt_real, parse_err, parse_real, FormatError, Result};

const SCALAR_TYPES: &[&str] = &[
    "char", "uchar", "short", "ushort", "int", "uint", "float", "double", "int8", "uint8", "int16", "uint16", "int32",
    "uint32", "float32", "float64",
];

pub fn read_ply(bytes: &[u8]) -> Result<PointSet> {
    let text = std::str::from_utf8(bytes).map_err(|_| parse_err(0, "not UTF-8 text"))?;
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));

    match lines.next() {
        Some((_, "ply")) => {}
        Some((_, other)) => return Err(FormatError::UnsupportedMagic(other.to_string())),
        None => return Err(FormatError::UnsupportedMagic(String::new())),
    }
    let mut count: Option<usize> = None;
    let mut props: Vec<String> = Vec::new();
    let mut saw_format = false;
    let mut header_end = 0;
    for (line, l) in lines.by_ref() {
        let toks: Vec<&str> = l.split_whitespace().collect();
        match toks.as_slice() {
            [] => {}
            ["comment", ..] | ["obj_info", ..] => {}
            ["format", "ascii", "1.0"] => saw_format = true,
            ["format", ..] => return Err(parse_err(line, "only ascii 1.0 is supported")),
            ["element", "vertex", n] if count.is_none() => {
                count = Some(n.parse().map_err(|_| parse_err(line, format!("bad vertex count {n:?}")))?);
            }
            ["element", ..] => return Err(parse_err(line, "only a single vertex element is supported")),
            ["property", "list", ..] => return Err(parse_err(line, "list properties are not supported")),
            ["property", ty, name] if count.is_some() && SCALAR_TYPES.contains(ty) => props.push(name.to_string()),
            ["end_header"] => {
                header_end = line;
                break;
            }
            _ => return Err(parse_err(line, format!("unexpected header line {l:?}"))),
        }
    }
    if header_end == 0 {
        return Err(parse_err(0, "missing end_header"));
    }
    if !saw_format {
        return Err(parse_err(header_end, "missing format line"));
    }
    let count = count.ok_or_else(|| parse_err(header_end, "missing vertex element"))?;
    let find = |name: &'static str| props.iter().position(|p| p == name).ok_or(FormatError::MissingProperty(name));
    let (ix, iy, iz) = (find("x")?, find("y")?, find("z")?);
    let ic = props.iter().position(|p| p == "confidence");

    // Grows with the data actually present, not with the declared count.
    let mut points = Vec::new();
    let mut conf = Vec::new();
    let mut vals = vec![0.0; props.len()];
    while points.len() < count {
        let (line, l) =
            lines.next().ok_or_else(|| parse_err(header_end + points.len() + 1, "truncated vertex data"))?;
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() != props.len() {
            return Err(parse_err(line, format!("expected {} values, found {}", props.len(), toks.len())));
        }
        for (v, t) in vals.iter_mut().zip(&toks) {
            *v = parse_real(t, line)?;
        }
        points.push(Vec3::new(vals[ix], vals[iy], vals[iz]));
        if let Some(c) = ic {
            conf.push(vals[c]);
        }
    }
    if let Some((line, _)) = lines.find(|(_, l)| !l.is_empty()) {
        return Err(parse_err(line, "trailing data after payload"));
    }
    Ok(match ic {
        Some(_) => PointSet::with_confidences(points, conf)?,
        None => PointSet::new(points)?,
    })
}

pub fn write_ply(set: &PointSet) -> String {
    let mut out = format!("ply\nformat ascii 1.0\nelement vertex {}\n", set.len());
    out.push_str("property double x\nproperty double y\nproperty double z\n");
    if set.confidences.is_some() {
        out.push_str("property double confidence\n");
    }
    out.push_str("end_header\n");
    for (i, p) in set.points.iter().enumerate() {
        out.push_str(&format!("{} {} {}", fmt_real(p.x), fmt_real(p.y), fmt_real(p.z)));
        if let Some(c) = &set.confidences {
            out.push(' ');
            out.push_str(&fmt_real(c[i]));
        }
        out.push('\n');
    }
    out
}
