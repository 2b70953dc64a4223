//! Artifact writing. JSON keys come out sorted (serde_json's default map is a
//! BTreeMap) and every float is rounded to 12 significant digits so reruns
//! are byte-identical.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::Value;
use sha2::{Digest, Sha256};

use nonmarkov::linalg::ComplexMatrix;
use nonmarkov::C64;

pub const SIGNIFICANT_DIGITS: usize = 12;

pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() { 0.0 } else { x };
    }
    let r: f64 = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().expect("formatted float parses");
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Rounded float as JSON; non-finite values become null.
pub fn num(x: f64) -> Value {
    let r = round_sig(x);
    if r.is_finite() {
        Value::from(r)
    } else {
        Value::Null
    }
}

/// Text form used in CSV cells.
pub fn fmt(x: f64) -> String {
    let r = round_sig(x);
    if r.is_finite() {
        format!("{r}")
    } else {
        "nan".to_string()
    }
}

pub fn complex(z: C64) -> Value {
    Value::Array(vec![num(z.re), num(z.im)])
}

pub fn matrix(m: &ComplexMatrix<f64>) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| Value::Array((0..m.cols()).map(|j| complex(m[(i, j)])).collect()))
            .collect(),
    )
}

pub fn intervals(iv: &[(f64, f64)]) -> Value {
    Value::Array(iv.iter().map(|&(a, b)| Value::Array(vec![num(a), num(b)])).collect())
}

/// Rounds any float left in a document built with `json!`.
pub fn canonicalize(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => num(n.as_f64().unwrap_or(f64::NAN)),
        Value::Array(a) => Value::Array(a.into_iter().map(canonicalize).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, canonicalize(v))).collect()),
        other => other,
    }
}

pub fn scenario_hash(canonical: &str, version: &str) -> String {
    let mut h = Sha256::new();
    h.update(canonical.as_bytes());
    h.update(b"\n");
    h.update(version.as_bytes());
    hex::encode(h.finalize())
}

/// Small CSV builder: fixed header, LF line endings.
pub struct Csv {
    text: String,
    columns: usize,
}

impl Csv {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        let cols: Vec<&str> = header.iter().map(AsRef::as_ref).collect();
        Self {
            text: format!("{}\n", cols.join(",")),
            columns: cols.len(),
        }
    }

    pub fn row(&mut self, cells: &[f64]) {
        debug_assert_eq!(cells.len(), self.columns);
        let line: Vec<String> = cells.iter().map(|&x| fmt(x)).collect();
        self.text.push_str(&line.join(","));
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

/// Writes through a temporary sibling file and renames it into place.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> std::io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, &target)?;
    Ok(target)
}

pub fn write_json(dir: &Path, name: &str, doc: Value) -> std::io::Result<PathBuf> {
    let mut text = serde_json::to_string_pretty(&canonicalize(doc)).expect("JSON value serializes");
    text.push('\n');
    write_atomic(dir, name, &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_keeps_twelve_digits() {
        assert_eq!(round_sig(0.1 + 0.2), 0.3);
        assert_eq!(round_sig(1.0 / 3.0), 0.333333333333);
        assert_eq!(round_sig(-1e-30), -1e-30);
        assert_eq!(round_sig(-0.0), 0.0);
        assert_eq!(fmt(2.0), "2");
    }

    #[test]
    fn keys_are_sorted() {
        let v = serde_json::json!({"b": 1, "a": {"d": 0.1, "c": 2}});
        let s = serde_json::to_string(&canonicalize(v)).unwrap();
        assert_eq!(s, r#"{"a":{"c":2,"d":0.1},"b":1}"#);
    }
}
