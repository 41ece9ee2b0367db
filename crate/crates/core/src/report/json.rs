use std::io::Write;

use serde::Serialize;
use serde_json::{Map, Value};

/// Rebuilds every object with its keys in lexicographic order, whatever map
/// implementation `serde_json` was compiled with.
fn sorted(value: Value) -> Value {
    match value {
        Value::Object(map) => {
            let mut entries: Vec<(String, Value)> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            let mut out = Map::new();
            for (k, v) in entries {
                out.insert(k, sorted(v));
            }
            Value::Object(out)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(sorted).collect()),
        other => other,
    }
}

/// Pretty-printed JSON with sorted keys and a trailing newline.
pub fn to_json_string<T: Serialize>(report: &T) -> serde_json::Result<String> {
    let value = sorted(serde_json::to_value(report)?);
    let mut text = serde_json::to_string_pretty(&value)?;
    text.push('\n');
    Ok(text)
}

/// Writes `report` (a `DatasetReport` or a `ProjectReport`) and returns the
/// number of bytes written.
pub fn emit_json<T: Serialize>(report: &T, mut destination: impl Write) -> std::io::Result<usize> {
    let text = to_json_string(report).map_err(std::io::Error::other)?;
    destination.write_all(text.as_bytes())?;
    destination.flush()?;
    Ok(text.len())
}
