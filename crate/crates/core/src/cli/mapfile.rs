//! On-disk formats: one map per file as its Choi matrix, and tabulations of a
//! quadratic function on the polarization vectors.
//!
//! Complex entries are `[re, im]` pairs. With `float_format = "decimal"` they
//! are JSON numbers printed in shortest round-trip form; with `"hex"` they are
//! strings `"0x"` followed by the 16 hex digits of the IEEE-754 bit pattern.
//! Both read back bit-identically.

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Ket, C64};
use crate::mapcore::LinearMap;

pub const MAP_FORMAT: &str = "posmap-map";
pub const TABLE_FORMAT: &str = "posmap-table";
pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FloatFormat {
    Decimal,
    Hex,
}

impl FloatFormat {
    fn name(self) -> &'static str {
        match self {
            FloatFormat::Decimal => "decimal",
            FloatFormat::Hex => "hex",
        }
    }
}

/// A map together with the optional metadata block.
#[derive(Debug, Clone, PartialEq)]
pub struct MapFile {
    pub map: LinearMap,
    pub name: Option<String>,
    pub provenance: Option<String>,
    /// `("kraus" | "cokraus", matrix)` when the file was generated from a
    /// single generator.
    pub generator: Option<(String, ComplexMatrix)>,
}

impl MapFile {
    pub fn new(map: LinearMap) -> MapFile {
        MapFile { map, name: None, provenance: None, generator: None }
    }
}

pub fn encode_float(x: f64, fmt: FloatFormat) -> Value {
    match fmt {
        FloatFormat::Decimal => json!(x),
        FloatFormat::Hex => Value::String(format!("0x{:016x}", x.to_bits())),
    }
}

fn decode_float(v: &Value) -> Result<f64> {
    let x = match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| Error::Parse(format!("bad number {n}")))?,
        Value::String(s) => {
            let digits = s.strip_prefix("0x").ok_or_else(|| Error::Parse(format!("bad hex float {s:?}")))?;
            let bits = u64::from_str_radix(digits, 16).map_err(|e| Error::Parse(format!("bad hex float {s:?}: {e}")))?;
            f64::from_bits(bits)
        }
        other => return Err(Error::Parse(format!("expected a number, found {other}"))),
    };
    if !x.is_finite() {
        return Err(Error::NonFinite("map file"));
    }
    Ok(x)
}

pub fn encode_complex(c: C64, fmt: FloatFormat) -> Value {
    Value::Array(vec![encode_float(c.re, fmt), encode_float(c.im, fmt)])
}

fn decode_complex(v: &Value) -> Result<C64> {
    match v.as_array().map(Vec::as_slice) {
        Some([re, im]) => Ok(C64::new(decode_float(re)?, decode_float(im)?)),
        _ => Err(Error::Parse(format!("expected [re, im], found {v}"))),
    }
}

pub fn encode_ket(v: &Ket, fmt: FloatFormat) -> Value {
    Value::Array(v.as_slice().iter().map(|&c| encode_complex(c, fmt)).collect())
}

fn decode_ket(v: &Value) -> Result<Ket> {
    let arr = v.as_array().ok_or_else(|| Error::Parse("expected an array of [re, im] pairs".into()))?;
    Ket::new(arr.iter().map(decode_complex).collect::<Result<_>>()?)
}

fn encode_row(m: &ComplexMatrix, r: usize, fmt: FloatFormat) -> Value {
    Value::Array((0..m.cols()).map(|c| encode_complex(m[(r, c)], fmt)).collect())
}

pub fn encode_matrix(m: &ComplexMatrix, fmt: FloatFormat) -> Value {
    Value::Array((0..m.rows()).map(|r| encode_row(m, r, fmt)).collect())
}

pub fn decode_matrix(v: &Value) -> Result<ComplexMatrix> {
    let rows = v.as_array().ok_or_else(|| Error::Parse("expected an array of rows".into()))?;
    let ncols = rows.first().and_then(Value::as_array).map_or(0, Vec::len);
    let mut data = Vec::with_capacity(rows.len() * ncols);
    for row in rows {
        let row = row.as_array().ok_or_else(|| Error::Parse("expected a row array".into()))?;
        if row.len() != ncols {
            return Err(Error::DimensionMismatch(format!("ragged matrix: row of length {} after {ncols}", row.len())));
        }
        for c in row {
            data.push(decode_complex(c)?);
        }
    }
    ComplexMatrix::new(rows.len(), ncols, data)
}

fn metadata_value(file: &MapFile, fmt: FloatFormat) -> Value {
    let mut meta = Map::new();
    if let Some(n) = &file.name {
        meta.insert("name".into(), json!(n));
    }
    if let Some(p) = &file.provenance {
        meta.insert("provenance".into(), json!(p));
    }
    if let Some((kind, g)) = &file.generator {
        meta.insert("generator".into(), json!({ "kind": kind, "matrix": encode_matrix(g, fmt) }));
    }
    Value::Object(meta)
}

/// Canonical text of a map file: fixed key order, one Choi row per line.
pub fn write_map(file: &MapFile, fmt: FloatFormat) -> String {
    let j = file.map.to_choi();
    let mut s = String::new();
    s.push_str("{\n");
    s.push_str(&format!("  \"format\": \"{MAP_FORMAT}\",\n"));
    s.push_str(&format!("  \"version\": {FORMAT_VERSION},\n"));
    s.push_str(&format!("  \"dim_in\": {},\n", file.map.dim_in()));
    s.push_str(&format!("  \"dim_out\": {},\n", file.map.dim_out()));
    s.push_str(&format!("  \"float_format\": \"{}\",\n", fmt.name()));
    s.push_str(&format!("  \"metadata\": {},\n", metadata_value(file, fmt)));
    s.push_str("  \"choi\": [\n");
    for r in 0..j.rows() {
        let sep = if r + 1 < j.rows() { "," } else { "" };
        s.push_str(&format!("    {}{sep}\n", encode_row(&j, r, fmt)));
    }
    s.push_str("  ]\n}\n");
    s
}

fn header(doc: &Value, expected: &str) -> Result<(usize, usize)> {
    let format = doc.get("format").and_then(Value::as_str).ok_or_else(|| Error::Parse("missing \"format\"".into()))?;
    if format != expected {
        return Err(Error::Parse(format!("format is {format:?}, expected {expected:?}")));
    }
    let version = doc.get("version").and_then(Value::as_u64).ok_or_else(|| Error::Parse("missing \"version\"".into()))?;
    if version != FORMAT_VERSION {
        return Err(Error::Parse(format!("unsupported version {version}")));
    }
    let dim = |key: &str| -> Result<usize> {
        let d = doc.get(key).and_then(Value::as_u64).ok_or_else(|| Error::Parse(format!("missing {key:?}")))?;
        if d == 0 {
            return Err(Error::Parse(format!("{key} must be positive")));
        }
        Ok(d as usize)
    };
    Ok((dim("dim_in")?, dim("dim_out")?))
}

pub fn read_map(text: &str) -> Result<MapFile> {
    let doc: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let (k, h) = header(&doc, MAP_FORMAT)?;
    let choi = decode_matrix(doc.get("choi").ok_or_else(|| Error::Parse("missing \"choi\"".into()))?)?;
    if choi.rows() != k * h || choi.cols() != k * h {
        return Err(Error::DimensionMismatch(format!("Choi matrix is {}x{}, expected {}x{}", choi.rows(), choi.cols(), k * h, k * h)));
    }
    let map = LinearMap::from_choi(&choi, k, h)?;
    let meta = doc.get("metadata");
    let text_field = |key: &str| meta.and_then(|m| m.get(key)).and_then(Value::as_str).map(str::to_string);
    let generator = match meta.and_then(|m| m.get("generator")) {
        Some(g) => {
            let kind = g.get("kind").and_then(Value::as_str).ok_or_else(|| Error::Parse("generator without kind".into()))?;
            let m = decode_matrix(g.get("matrix").ok_or_else(|| Error::Parse("generator without matrix".into()))?)?;
            Some((kind.to_string(), m))
        }
        None => None,
    };
    Ok(MapFile { map, name: text_field("name"), provenance: text_field("provenance"), generator })
}

/// Tabulation file of `(eta, R(eta))` pairs, one entry per line.
pub fn write_table(k: usize, h: usize, entries: &[(Ket, ComplexMatrix)], fmt: FloatFormat) -> String {
    let mut s = String::new();
    s.push_str("{\n");
    s.push_str(&format!("  \"format\": \"{TABLE_FORMAT}\",\n"));
    s.push_str(&format!("  \"version\": {FORMAT_VERSION},\n"));
    s.push_str(&format!("  \"dim_in\": {k},\n"));
    s.push_str(&format!("  \"dim_out\": {h},\n"));
    s.push_str(&format!("  \"float_format\": \"{}\",\n", fmt.name()));
    s.push_str("  \"entries\": [\n");
    for (idx, (eta, value)) in entries.iter().enumerate() {
        let sep = if idx + 1 < entries.len() { "," } else { "" };
        let e = json!({ "eta": encode_ket(eta, fmt), "value": encode_matrix(value, fmt) });
        s.push_str(&format!("    {e}{sep}\n"));
    }
    s.push_str("  ]\n}\n");
    s
}

pub fn read_table(text: &str) -> Result<(usize, usize, Vec<(Ket, ComplexMatrix)>)> {
    let doc: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let (k, h) = header(&doc, TABLE_FORMAT)?;
    let entries = doc.get("entries").and_then(Value::as_array).ok_or_else(|| Error::Parse("missing \"entries\"".into()))?;
    let mut out = Vec::with_capacity(entries.len());
    for e in entries {
        let eta = decode_ket(e.get("eta").ok_or_else(|| Error::Parse("entry without eta".into()))?)?;
        let value = decode_matrix(e.get("value").ok_or_else(|| Error::Parse("entry without value".into()))?)?;
        out.push((eta, value));
    }
    Ok((k, h, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapcore::choi_example;

    #[test]
    fn round_trip_is_exact_in_both_formats() {
        let phi = LinearMap::from_choi(
            &ComplexMatrix::from_fn(4, 4, |r, c| C64::new((r as f64 + 0.1).sqrt() / 3.0, -(c as f64) * std::f64::consts::PI)),
            2,
            2,
        )
        .unwrap();
        for fmt in [FloatFormat::Decimal, FloatFormat::Hex] {
            let mut f = MapFile::new(phi.clone());
            f.name = Some("x".into());
            f.generator = Some(("kraus".into(), ComplexMatrix::identity(2).scale_real(1.0 / 3.0)));
            let text = write_map(&f, fmt);
            let back = read_map(&text).unwrap();
            assert_eq!(back, f);
            assert_eq!(write_map(&back, fmt), text);
        }
    }

    #[test]
    fn bad_files_are_rejected() {
        let text = write_map(&MapFile::new(choi_example()), FloatFormat::Decimal);
        assert!(matches!(read_map(&text.replace("\"dim_in\": 3", "\"dim_in\": 2")), Err(Error::DimensionMismatch(_))));
        assert!(matches!(read_map("{"), Err(Error::Parse(_))));
        assert!(matches!(read_map(&text.replace("posmap-map", "other")), Err(Error::Parse(_))));
    }
}
