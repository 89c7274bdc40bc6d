//! Deterministic JSON rendering: two-space indentation, keys in insertion order, every
//! floating-point number with 17 significant digits.

use serde_json::Value;

pub fn render(value: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, value, 0);
    out.push('\n');
    out
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

/// Non-finite values have no JSON form and become `null`.
pub fn float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

fn write_value(out: &mut String, value: &Value, level: usize) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&float(n.as_f64().unwrap_or(f64::NAN)));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("strings serialize")),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            // short arrays of scalars stay on one line
            if items.iter().all(|v| !v.is_array() && !v.is_object()) {
                out.push('[');
                for (t, v) in items.iter().enumerate() {
                    if t > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, v, level);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (t, v) in items.iter().enumerate() {
                indent(out, level + 1);
                write_value(out, v, level + 1);
                if t + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            indent(out, level);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (t, (k, v)) in map.iter().enumerate() {
                indent(out, level + 1);
                out.push_str(&serde_json::to_string(k).expect("strings serialize"));
                out.push_str(": ");
                write_value(out, v, level + 1);
                if t + 1 < map.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            indent(out, level);
            out.push('}');
        }
    }
}
