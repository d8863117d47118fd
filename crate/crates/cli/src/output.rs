use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use vibrophone::{Error, Result};

use crate::config::RunConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Output directory plus the run metadata stamped into every artifact.
pub struct Outputs {
    dir: PathBuf,
    command: &'static str,
    config: RunConfig,
    written: Vec<String>,
}

impl Outputs {
    pub fn new(dir: &Path, command: &'static str, config: &RunConfig) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.to_path_buf(), source })?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            command,
            config: config.clone(),
            written: Vec::new(),
        })
    }

    pub fn path(&mut self, name: &str) -> PathBuf {
        self.written.push(name.to_string());
        self.dir.join(name)
    }

    /// The worker count is left out: it must not change any artifact.
    fn header(&self) -> Value {
        let mut config = serde_json::to_value(&self.config).unwrap_or(Value::Null);
        if let Value::Object(map) = &mut config {
            map.remove("workers");
        }
        json!({"tool": "vibrophone", "version": VERSION, "command": self.command, "config": config})
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.path(name);
        fs::write(&path, bytes).map_err(|source| Error::Io { path: path.clone(), source })?;
        Ok(path)
    }

    /// CSV with a leading `#` comment line holding the effective config.
    pub fn csv(&mut self, name: &str, body: &str) -> Result<PathBuf> {
        let text = format!("# {}\n{body}", self.header());
        self.write(name, text.as_bytes())
    }

    /// JSON object with `tool`, `version`, `command` and `config` merged in.
    pub fn json(&mut self, name: &str, mut body: Value) -> Result<PathBuf> {
        if let (Value::Object(map), Value::Object(head)) = (&mut body, self.header()) {
            for (k, v) in head {
                map.insert(k, v);
            }
        }
        let text = serde_json::to_string_pretty(&body)?;
        self.write(name, text.as_bytes())
    }

    /// `manifest.json`: run metadata, the artifacts written and `extra`.
    pub fn finish(mut self, extra: Value) -> Result<()> {
        let mut body = json!({"artifacts": self.written.clone()});
        if let (Value::Object(map), Value::Object(more)) = (&mut body, extra) {
            map.extend(more);
        }
        self.json("manifest.json", body)?;
        Ok(())
    }
}
