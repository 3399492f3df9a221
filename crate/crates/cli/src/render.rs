use serde_json::Value;

use crate::commands::Report;

/// Plain-text rendering: `key  value` lines, nested keys joined by dots.
pub fn table(report: &Report) -> String {
    if let Some(t) = &report.table {
        return t.clone();
    }
    let mut rows = Vec::new();
    flatten("", &report.value, &mut rows);
    let width = rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
    let mut out = String::new();
    for (k, v) in rows {
        out.push_str(&format!("{:<width$}  {}\n", k, v, width = width));
    }
    if let Some(p) = report.passed {
        out.push_str(if p { "PASS\n" } else { "FAIL\n" });
    }
    out
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Array(_) | Value::Object(_) => None,
        other => Some(other.to_string()),
    }
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{}.{}", prefix, k) };
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                flatten(&key(k), x, rows);
            }
        }
        Value::Array(xs) => {
            if let Some(items) = xs.iter().map(scalar).collect::<Option<Vec<_>>>() {
                rows.push((prefix.to_string(), format!("[{}]", items.join(", "))));
            } else {
                for (i, x) in xs.iter().enumerate() {
                    flatten(&key(&i.to_string()), x, rows);
                }
            }
        }
        other => rows.push((prefix.to_string(), scalar(other).unwrap_or_default())),
    }
}
