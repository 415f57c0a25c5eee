//! Core-parameter vector manifests: CSV with a `label` column and the 11
//! core parameter columns.

use std::io::Write;

use vidsource::h264::{CoreParams, CORE_PARAM_NAMES, USER_ADJUSTABLE_CORE};
use vidsource::synth::brand_of;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VectorRow {
    pub label: String,
    pub params: CoreParams,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum VectorError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
}

fn bad(line: usize, reason: impl Into<String>) -> VectorError {
    VectorError::Malformed { line, reason: reason.into() }
}

/// Columns are matched by header name, so their order is free; extra
/// columns such as `path` are ignored.
pub fn parse_vectors(text: &str) -> Result<Vec<VectorRow>, VectorError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(true).from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| bad(1, e.to_string()))?.clone();
    let col = |name: &str| header.iter().position(|h| h == name).ok_or_else(|| bad(1, format!("missing column {name:?}")));
    let label_col = col("label")?;
    let cols: Vec<usize> = CORE_PARAM_NAMES.iter().map(|n| col(n)).collect::<Result<_, _>>()?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| bad(line, e.to_string()))?;
        if rec.len() != header.len() {
            return Err(bad(line, format!("{} fields, header has {}", rec.len(), header.len())));
        }
        let label = rec[label_col].to_owned();
        if label.is_empty() {
            return Err(bad(line, "empty label"));
        }
        let mut values = [0i64; 11];
        for (v, (&c, name)) in values.iter_mut().zip(cols.iter().zip(CORE_PARAM_NAMES)) {
            *v = rec[c].parse().map_err(|_| bad(line, format!("{name} = {:?} is not an integer", &rec[c])))?;
        }
        out.push(VectorRow { label, params: CoreParams { values } });
    }
    Ok(out)
}

pub fn write_header(mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "label,{}", CORE_PARAM_NAMES.join(","))
}

pub fn write_row(mut w: impl Write, label: &str, p: &CoreParams) -> std::io::Result<()> {
    let mut rec = csv::Writer::from_writer(Vec::new());
    rec.write_field(label)?;
    for v in p.values {
        rec.write_field(v.to_string())?;
    }
    rec.write_record(None::<&[u8]>)?;
    w.write_all(&rec.into_inner().map_err(|e| e.into_error())?)
}

/// Feature columns kept after optionally dropping the user-adjustable ones.
pub fn kept_columns(drop_user_adjustable: bool) -> Vec<usize> {
    (0..CORE_PARAM_NAMES.len()).filter(|i| !(drop_user_adjustable && USER_ADJUSTABLE_CORE.contains(i))).collect()
}

pub fn project(p: &CoreParams, columns: &[usize]) -> Vec<f64> {
    columns.iter().map(|&c| p.values[c] as f64).collect()
}

/// Brand-level label: the text before the first `_`.
pub fn brand_label(label: &str) -> String {
    brand_of(label).to_owned()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let p = CoreParams { values: [0, 2, -1, 1, 1, 1, 79, -3, 1, 4, 720] };
        let mut buf = Vec::new();
        write_header(&mut buf).unwrap();
        write_row(&mut buf, "A_1", &p).unwrap();
        let rows = parse_vectors(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(rows, vec![VectorRow { label: "A_1".into(), params: p }]);
    }

    #[test]
    fn malformed_rows() {
        let head = format!("label,{}\n", CORE_PARAM_NAMES.join(","));
        assert!(matches!(parse_vectors(&format!("{head}x,1,2\n")), Err(VectorError::Malformed { line: 2, .. })));
        let row = format!("x{}\n", ",1".repeat(10) + ",q");
        assert!(parse_vectors(&format!("{head}{row}")).is_err());
        assert!(parse_vectors("label,height\n").is_err());
    }

    #[test]
    fn column_selection() {
        assert_eq!(kept_columns(false).len(), 11);
        assert_eq!(kept_columns(true), vec![0, 1, 2, 3, 4, 5, 7]);
        assert_eq!(brand_label("BrandA_M01"), "BrandA");
    }
}
