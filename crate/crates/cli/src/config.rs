//! Parameter resolution: command-line flags over a JSON config file over
//! defaults. The config is either a flat object keyed like the flags or a
//! run manifest, whose `parameters` object is used.

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{usage, CliError, CliResult};

pub fn load(path: &str) -> CliResult<Map<String, Value>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{path}: {e}")))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{path}: {e}")))?;
    let obj = match value {
        Value::Object(mut m) => match m.remove("parameters") {
            Some(Value::Object(p)) => p,
            Some(_) => return usage(format!("{path}: 'parameters' must be an object")),
            None => m,
        },
        _ => return usage(format!("{path}: config must be a JSON object")),
    };
    Ok(obj.into_iter().map(|(k, v)| (k.replace('-', "_"), v)).collect())
}

fn as_object(v: &impl Serialize) -> Map<String, Value> {
    match serde_json::to_value(v).expect("flags serialize") {
        Value::Object(m) => m,
        _ => unreachable!("flag structs serialize to objects"),
    }
}

/// Overlays the non-null fields of `flags` on `file` and deserializes the
/// result, letting serde defaults fill whatever neither provides. File keys
/// must name a flag; the key set is that of `F::default()`.
pub fn resolve<F, T>(flags: &F, file: Option<Map<String, Value>>) -> CliResult<T>
where
    F: Serialize + Default,
    T: DeserializeOwned,
{
    let known = as_object(&F::default());
    let mut merged = file.unwrap_or_default();
    if let Some(k) = merged.keys().find(|k| !known.contains_key(*k)) {
        return usage(format!("unknown config key '{k}'"));
    }
    merged.retain(|_, v| !v.is_null());
    for (k, v) in as_object(flags) {
        if !v.is_null() {
            merged.insert(k, v);
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::Usage(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Serialize, Default)]
    struct Flags {
        a: Option<f64>,
        b: Option<String>,
    }

    #[derive(Deserialize, Debug, PartialEq)]
    struct Resolved {
        a: f64,
        #[serde(default = "default_b")]
        b: String,
    }

    fn default_b() -> String {
        "dflt".into()
    }

    #[test]
    fn flags_override_file_over_defaults() {
        let mut file = Map::new();
        file.insert("a".into(), Value::from(1.0));
        let r: Resolved = resolve(&Flags { a: Some(2.0), b: None }, Some(file.clone())).unwrap();
        assert_eq!(r, Resolved { a: 2.0, b: "dflt".into() });
        let r: Resolved = resolve(&Flags { a: None, b: Some("x".into()) }, Some(file)).unwrap();
        assert_eq!(r, Resolved { a: 1.0, b: "x".into() });
    }

    #[test]
    fn missing_and_unknown_keys_are_usage_errors() {
        let e = resolve::<Flags, Resolved>(&Flags { a: None, b: None }, None).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        let mut file = Map::new();
        file.insert("zzz".into(), Value::from(1));
        let e = resolve::<Flags, Resolved>(&Flags { a: Some(1.0), b: None }, Some(file)).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }
}
