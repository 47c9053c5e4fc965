//! Result records, rounding and atomic file output.

use std::io::{self, Write};
use std::path::Path;

use serde_json::{Map, Number, Value};

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

/// Rounds every non-integer number in a JSON tree and replaces infinities
/// with the string `"inf"`.
pub fn round_record(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            Number::from_f64(round12(n.as_f64().expect("f64 number"))).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_record).collect()),
        Value::Object(fields) => Value::Object(fields.into_iter().map(|(k, v)| (k, round_record(v))).collect::<Map<_, _>>()),
        other => other,
    }
}

/// JSON for a float, with `+inf` as `"inf"` (serde_json would emit `null`).
pub fn num(x: f64) -> Value {
    if x == f64::INFINITY {
        Value::String("inf".into())
    } else {
        Number::from_f64(x).map_or(Value::Null, Value::Number)
    }
}

/// Writes to `out`, or to stdout when `out` is `None`. Files are written to a
/// sibling temporary and renamed into place.
pub fn emit(text: &str, out: Option<&Path>) -> io::Result<()> {
    let Some(path) = out else {
        let mut stdout = io::stdout().lock();
        stdout.write_all(text.as_bytes())?;
        return stdout.flush();
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn rounds_to_twelve_digits() {
        assert_eq!(round12(0.1123773987654321), 0.112377398765);
        assert_eq!(round12(2.0 / 3.0), 0.666666666667);
        assert_eq!(round12(-1234567.891234567), -1234567.89123);
        assert_eq!(round12(0.0), 0.0);
    }

    #[test]
    fn record_rounding_keeps_integers_and_markers() {
        let v = round_record(json!({"n": 3, "x": [1.0 / 3.0, "inf"], "nested": {"y": 1e-20 / 3.0}}));
        assert_eq!(v, json!({"n": 3, "x": [0.333333333333, "inf"], "nested": {"y": 3.33333333333e-21}}));
        assert_eq!(num(f64::INFINITY), json!("inf"));
    }

    #[test]
    fn emit_replaces_files_atomically() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        emit("first\n", Some(&path)).unwrap();
        emit("second\n", Some(&path)).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "second\n");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
