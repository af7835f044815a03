//! Run configuration: defaults, overlaid by a config file, overlaid by flags.
//!
//! A config file is either a JSON object, a report written by this tool
//! (its embedded `config` is used), or `key=value` lines whose values are
//! JSON or bare strings. Blank lines and lines starting with `#` are skipped.

use std::path::Path;

use acfkit::estimator::ConstantKind;
use acfkit::NormedSpaceSpec;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::CliError;

pub type Overrides = Map<String, Value>;

pub fn read_config_file(path: &Path, command: &str) -> Result<Overrides, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let value: Value =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))?;
        let Value::Object(mut map) = value else { unreachable!() };
        if let (Some(Value::String(cmd)), Some(Value::Object(inner))) = (map.get("command"), map.get("config")) {
            if cmd != command {
                return Err(CliError::Config(format!("config {} belongs to `{cmd}`, not `{command}`", path.display())));
            }
            map = inner.clone();
        }
        return Ok(map);
    }
    let mut map = Map::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, raw) = line.split_once('=').ok_or_else(|| {
            CliError::Config(format!("config {} line {}: expected key=value", path.display(), lineno + 1))
        })?;
        let raw = raw.trim();
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        map.insert(key.trim().replace('-', "_"), value);
    }
    Ok(map)
}

/// Accepts the flag grammar for structured keys given as strings.
fn normalize(key: &str, value: Value) -> Result<Value, CliError> {
    match (key, value) {
        ("space", Value::String(s)) => {
            let spec: NormedSpaceSpec = s.parse().map_err(|e| CliError::Config(format!("space: {e}")))?;
            Ok(serde_json::to_value(spec).expect("space serializes"))
        }
        ("constant", Value::String(s)) => {
            let kind: ConstantKind = s.parse().map_err(|e| CliError::Config(format!("constant: {e}")))?;
            Ok(serde_json::to_value(kind).expect("kind serializes"))
        }
        (_, v) => Ok(v),
    }
}

/// `defaults <- file <- flags`, rejecting unknown keys and ill-typed values.
pub fn resolve<C: Serialize + DeserializeOwned + Default>(
    file: Option<Overrides>,
    flags: Overrides,
) -> Result<C, CliError> {
    let Value::Object(mut merged) = serde_json::to_value(C::default()).expect("defaults serialize") else {
        unreachable!("configs are structs")
    };
    for layer in file.into_iter().chain(std::iter::once(flags)) {
        for (key, value) in layer {
            if !merged.contains_key(&key) {
                return Err(CliError::Config(format!("unknown config key `{key}`")));
            }
            let value = normalize(&key, value)?;
            merged.insert(key, value);
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::Config(e.to_string()))
}

/// Collects `Some` flag values under their config keys.
#[derive(Default)]
pub struct FlagSet(Overrides);

impl FlagSet {
    pub fn set<T: Serialize>(&mut self, key: &str, value: &Option<T>) -> &mut Self {
        if let Some(v) = value {
            self.0.insert(key.to_string(), serde_json::to_value(v).expect("flag values serialize"));
        }
        self
    }

    pub fn flag(&mut self, key: &str, on: bool) -> &mut Self {
        if on {
            self.0.insert(key.to_string(), Value::Bool(true));
        }
        self
    }

    pub fn into_map(self) -> Overrides {
        self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Serialize, Deserialize, Default, Debug, PartialEq)]
    #[serde(deny_unknown_fields, default)]
    struct Demo {
        seed: u64,
        space: Option<NormedSpaceSpec>,
        tol: Option<f64>,
    }

    fn write(text: &str) -> tempfile::NamedTempFile {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        std::io::Write::write_all(&mut file, text.as_bytes()).unwrap();
        file
    }

    #[test]
    fn flags_override_file() {
        let file = write("seed=4\nspace=d=2,q=inf\n# comment\n");
        let map = read_config_file(file.path(), "verify").unwrap();
        let mut flags = FlagSet::default();
        flags.set("seed", &Some(9u64));
        let c: Demo = resolve(Some(map), flags.into_map()).unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.space, Some(NormedSpaceSpec::new(2, f64::INFINITY).unwrap()));
    }

    #[test]
    fn report_config_is_unwrapped() {
        let file = write(r#"{"command":"verify","config":{"seed":7,"tol":null},"result":{}}"#);
        let c: Demo = resolve(Some(read_config_file(file.path(), "verify").unwrap()), Map::new()).unwrap();
        assert_eq!(c.seed, 7);
        assert!(read_config_file(file.path(), "mds").is_err());
    }

    #[test]
    fn bad_configs_are_rejected() {
        for text in ["seed=4\nnonsense", "colour=3", "seed=\"x\"", "{\"seed\": -1}", "{not json"] {
            let file = write(text);
            let res = read_config_file(file.path(), "verify").and_then(|m| resolve::<Demo>(Some(m), Map::new()));
            assert!(matches!(res, Err(CliError::Config(_))), "{text}");
        }
    }
}
