//! JSON config files layered between built-in defaults and command-line flags.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};
use stressgraph::{Error, Result};

const SECTIONS: [&str; 5] = ["graph", "model", "train", "synth", "ablation"];

/// Parsed config file: one optional object per section.
#[derive(Debug, Default)]
pub struct ConfigFile {
    sections: Map<String, Value>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        if !path.is_file() {
            return Err(Error::Config(format!("config file {} does not exist", path.display())));
        }
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("reading {}: {e}", path.display())))?;
        let parse_err = |reason: String| Error::Parse {
            path: path.to_path_buf(),
            reason,
        };
        let value: Value = serde_json::from_str(&text).map_err(|e| parse_err(e.to_string()))?;
        let Value::Object(sections) = value else {
            return Err(parse_err("config must be a JSON object".into()));
        };
        if let Some(bad) = sections.keys().find(|k| !SECTIONS.contains(&k.as_str())) {
            return Err(parse_err(format!(
                "unknown section `{bad}` (expected one of {SECTIONS:?})"
            )));
        }
        Ok(Self { sections })
    }

    /// `default` with the named section's keys laid over it.
    pub fn layer<T: Serialize + DeserializeOwned>(&self, section: &str, default: T) -> Result<T> {
        let Some(overrides) = self.sections.get(section) else {
            return Ok(default);
        };
        let mut base = serde_json::to_value(default)?;
        merge(&mut base, overrides, section)?;
        serde_json::from_value(base).map_err(|e| Error::Config(format!("config section `{section}`: {e}")))
    }
}

fn merge(base: &mut Value, overrides: &Value, at: &str) -> Result<()> {
    let (Value::Object(b), Value::Object(o)) = (&mut *base, overrides) else {
        *base = overrides.clone();
        return Ok(());
    };
    for (key, value) in o {
        let slot = b
            .get_mut(key)
            .ok_or_else(|| Error::Config(format!("unknown config key `{at}.{key}`")))?;
        merge(slot, value, &format!("{at}.{key}"))?;
    }
    Ok(())
}

/// Overwrite `target` when the flag was given.
pub fn set<T>(target: &mut T, flag: Option<T>) {
    if let Some(v) = flag {
        *target = v;
    }
}
