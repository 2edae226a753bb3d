use serde_json::{Map, Value};

use crate::error::{Error, Result};

/// Pretty JSON with a trailing newline.
pub fn to_json(v: &Value) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::Diagnostic(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// One CSV row per element of `rows`, nested objects flattened to dotted keys.
/// The header is the union of keys in first-seen order.
pub fn to_csv(rows: &[Value]) -> Result<String> {
    let flat: Vec<Vec<(String, String)>> = rows
        .iter()
        .map(|r| {
            let mut out = Vec::new();
            flatten("", r, &mut out);
            out
        })
        .collect();
    let mut header: Vec<String> = Vec::new();
    for row in &flat {
        for (k, _) in row {
            if !header.contains(k) {
                header.push(k.clone());
            }
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::Diagnostic(e.to_string());
    w.write_record(&header).map_err(err)?;
    for row in &flat {
        let rec: Vec<&str> = header
            .iter()
            .map(|h| row.iter().find(|(k, _)| k == h).map_or("", |(_, v)| v.as_str()))
            .collect();
        w.write_record(&rec).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Diagnostic(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Diagnostic(e.to_string()))
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => flatten_object(prefix, m, out),
        Value::Array(xs) if xs.iter().all(|x| !x.is_object() && !x.is_array()) => {
            out.push((key(""), xs.iter().map(scalar).collect::<Vec<_>>().join(";")));
        }
        Value::Array(_) => out.push((key(""), v.to_string())),
        _ => out.push((if prefix.is_empty() { "value".into() } else { prefix.to_string() }, scalar(v))),
    }
}

fn flatten_object(prefix: &str, m: &Map<String, Value>, out: &mut Vec<(String, String)>) {
    for (k, v) in m {
        let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            Value::Object(inner) => flatten_object(&p, inner, out),
            Value::Array(xs) if xs.iter().all(|x| !x.is_object() && !x.is_array()) => {
                out.push((p, xs.iter().map(scalar).collect::<Vec<_>>().join(";")));
            }
            Value::Array(_) => out.push((p, v.to_string())),
            _ => out.push((p, scalar(v))),
        }
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}
