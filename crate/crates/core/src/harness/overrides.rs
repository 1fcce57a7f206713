//! Dotted-path `key=value` overrides and multiplicative scaling on
//! serializable configuration trees.

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::{Error, Result};

/// Splits `key=value`; the key must be a non-empty dotted path.
pub fn parse_override(s: &str) -> Result<(String, String)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| Error::Override(s.to_string(), "expected key=value".into()))?;
    let k = k.trim();
    if k.is_empty() || k.split('.').any(|p| p.is_empty()) {
        return Err(Error::Override(s.to_string(), "empty path segment".into()));
    }
    Ok((k.to_string(), v.trim().to_string()))
}

/// Interprets an override value as JSON when it parses, else as a string.
pub fn parse_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

fn lookup<'a>(root: &'a mut Value, path: &str) -> Result<&'a mut Value> {
    let mut cur = root;
    for seg in path.split('.') {
        cur = match cur {
            Value::Object(map) => map
                .get_mut(seg)
                .ok_or_else(|| Error::Override(path.to_string(), format!("unknown key `{seg}`")))?,
            Value::Array(items) => {
                let i: usize = seg
                    .parse()
                    .map_err(|_| Error::Override(path.to_string(), format!("`{seg}` is not an index")))?;
                let len = items.len();
                items.get_mut(i).ok_or_else(|| {
                    Error::Override(path.to_string(), format!("index {i} out of range {len}"))
                })?
            }
            _ => {
                return Err(Error::Override(
                    path.to_string(),
                    format!("`{seg}` is not a table"),
                ))
            }
        };
    }
    Ok(cur)
}

/// Replaces the value at `path`. Keys must already exist, except that a
/// `null` (absent optional) may be replaced.
pub fn set_path(root: &mut Value, path: &str, value: Value) -> Result<()> {
    *lookup(root, path)? = value;
    Ok(())
}

fn scale_numbers(v: &mut Value, factor: f64) -> usize {
    match v {
        Value::Number(n) => match n.as_f64().map(|x| x * factor) {
            Some(x) => match serde_json::Number::from_f64(x) {
                Some(num) => {
                    *n = num;
                    1
                }
                None => 0,
            },
            None => 0,
        },
        Value::Array(items) => items.iter_mut().map(|x| scale_numbers(x, factor)).sum(),
        Value::Object(map) => map.values_mut().map(|x| scale_numbers(x, factor)).sum(),
        _ => 0,
    }
}

/// Multiplies every number under `path` by `factor`.
pub fn scale_path(root: &mut Value, path: &str, factor: f64) -> Result<()> {
    if !factor.is_finite() {
        return Err(Error::Override(path.to_string(), "non-finite factor".into()));
    }
    if scale_numbers(lookup(root, path)?, factor) == 0 {
        return Err(Error::Override(
            path.to_string(),
            "no numeric values to scale".into(),
        ));
    }
    Ok(())
}

/// Applies `key=value` strings to a serializable config by round-tripping
/// through a JSON tree.
pub fn apply_overrides<T: Serialize + DeserializeOwned>(cfg: &T, overrides: &[String]) -> Result<T> {
    let mut tree = serde_json::to_value(cfg)?;
    for o in overrides {
        let (k, v) = parse_override(o)?;
        set_path(&mut tree, &k, parse_value(&v))?;
    }
    serde_json::from_value(tree).map_err(|e| Error::Override(overrides.join(" "), e.to_string()))
}
