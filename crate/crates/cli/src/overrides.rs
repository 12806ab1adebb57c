//! `--set key.path=value` overrides applied to a config's JSON tree.

use serde_json::Value;

/// Apply one `dotted.key=value` override. The key must already exist in
/// `root` (defaults are filled in first), so typos are rejected instead of
/// silently ignored. Values are parsed as JSON, falling back to a string.
pub fn apply(root: &mut Value, assignment: &str) -> Result<(), String> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| format!("override `{assignment}` is not key=value"))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(format!("override `{assignment}` has an empty key"));
    }
    let mut node = root;
    for part in key.split('.') {
        node = match node {
            Value::Object(map) => map.get_mut(part),
            Value::Array(items) => part.parse::<usize>().ok().and_then(|i| items.get_mut(i)),
            _ => None,
        }
        .ok_or_else(|| format!("unknown config key `{key}`"))?;
    }
    *node = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    Ok(())
}
