//! Canonical JSON: sorted keys, floats with 17 significant digits.

use serde::Serialize;
use serde_json::Value;

/// Floats always carry 17 significant digits in exponent form, which
/// round-trips every finite `f64` exactly.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_number(n: &serde_json::Number, out: &mut String) {
    if let Some(u) = n.as_u64() {
        out.push_str(&u.to_string());
    } else if let Some(i) = n.as_i64() {
        out.push_str(&i.to_string());
    } else {
        out.push_str(&format_float(n.as_f64().unwrap_or(f64::NAN)));
    }
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

fn write_inline(v: &Value, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => write_number(n, out),
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_inline(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            out.push('{');
            for (i, (k, item)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push(':');
                write_inline(item, out);
            }
            out.push('}');
        }
    }
}

fn write_pretty(v: &Value, indent: usize, out: &mut String) {
    let pad = |n: usize, out: &mut String| out.extend(std::iter::repeat_n(' ', n));
    match v {
        Value::Object(map) if !map.is_empty() => {
            out.push_str("{\n");
            for (i, (k, item)) in map.iter().enumerate() {
                pad(indent + 2, out);
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_pretty(item, indent + 2, out);
                if i + 1 < map.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(indent, out);
            out.push('}');
        }
        Value::Array(items) if items.iter().any(|x| !is_scalar(x)) && items.iter().any(|x| matches!(x, Value::Object(_))) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                pad(indent + 2, out);
                write_pretty(item, indent + 2, out);
                if i + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(indent, out);
            out.push(']');
        }
        other => write_inline(other, out),
    }
}

/// Multi-line canonical document with a trailing newline. Objects are
/// expanded one key per line; numeric arrays stay on one line.
pub fn to_canonical_string(v: &Value) -> String {
    let mut out = String::new();
    write_pretty(v, 0, &mut out);
    out.push('\n');
    out
}

/// Single-line canonical form, used for JSON-lines records.
pub fn to_canonical_line(v: &Value) -> String {
    let mut out = String::new();
    write_inline(v, &mut out);
    out
}

pub fn canonical<T: Serialize>(value: &T) -> serde_json::Result<String> {
    Ok(to_canonical_string(&serde_json::to_value(value)?))
}

pub fn canonical_line<T: Serialize>(value: &T) -> serde_json::Result<String> {
    Ok(to_canonical_line(&serde_json::to_value(value)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn floats_round_trip_exactly() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 1e300, 0.0, -0.0, std::f64::consts::PI] {
            let s = format_float(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
            let digits = s.split('e').next().unwrap().chars().filter(|c| c.is_ascii_digit()).count();
            assert_eq!(digits, 17);
        }
    }

    #[test]
    fn keys_are_sorted_and_integers_kept() {
        let v = json!({"b": 1, "a": [0.5, 2], "c": {"z": -3, "y": true}});
        assert_eq!(to_canonical_line(&v), r#"{"a":[5.0000000000000000e-1,2],"b":1,"c":{"y":true,"z":-3}}"#);
        let pretty = to_canonical_string(&v);
        assert!(pretty.starts_with("{\n  \"a\": [5.0000000000000000e-1,2],\n"));
        let reparsed: Value = serde_json::from_str(&pretty).unwrap();
        assert_eq!(to_canonical_string(&reparsed), pretty);
    }
}
