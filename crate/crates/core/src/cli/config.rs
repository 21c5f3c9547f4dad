use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Echo of the command and every setting that affects its output.
///
/// Thread count is deliberately absent: outputs do not depend on it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunConfig {
    pub entries: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn new(command: &str) -> Self {
        let mut c = Self::default();
        c.set("command", command);
        c
    }

    pub fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.entries.insert(key.to_string(), value.to_string());
        self
    }

    pub fn set_path(&mut self, key: &str, value: &Path) -> &mut Self {
        self.set(key, value.display())
    }

    pub fn set_opt_path(&mut self, key: &str, value: Option<&Path>) -> &mut Self {
        match value {
            Some(p) => self.set_path(key, p),
            None => self.set(key, "none"),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }

    /// Writes the echo next to an artifact that cannot embed it.
    pub fn write_sidecar(&self, artifact: &Path) -> Result<()> {
        let path = sidecar_path(artifact);
        std::fs::write(&path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

/// `<artifact>.run`, appended to the full file name.
pub fn sidecar_path(artifact: &Path) -> std::path::PathBuf {
    let mut name = artifact.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".run");
    artifact.with_file_name(name)
}
