//! Aligned text for `--human`: one `key  value` line per top-level field,
//! nested objects indented below their key.

use serde_json::Value;

pub fn render(doc: &Value) -> String {
    let mut out = String::new();
    if let Value::Object(map) = doc {
        write_object(&mut out, map, 0);
    } else {
        out.push_str(&scalar(doc));
        out.push('\n');
    }
    out
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

fn write_object(out: &mut String, map: &serde_json::Map<String, Value>, indent: usize) {
    let width = map.keys().filter(|k| k.as_str() != "schema").map(|k| k.len()).max().unwrap_or(0);
    for (k, v) in map {
        if k == "schema" && indent == 0 {
            continue;
        }
        let pad = " ".repeat(indent);
        match v {
            Value::Object(inner) if !inner.is_empty() && inner.values().any(|x| x.is_object() || x.is_array()) => {
                out.push_str(&format!("{pad}{k}\n"));
                write_object(out, inner, indent + 2);
            }
            _ => out.push_str(&format!("{pad}{k:<width$}  {}\n", scalar(v))),
        }
    }
}
