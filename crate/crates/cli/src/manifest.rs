//! Run manifests: a `key = value` snapshot written alongside every command's
//! outputs, sufficient to reproduce the run.

use std::fs;
use std::path::Path;

use pftrack_core::Result;

pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        let mut m = Self { entries: Vec::new() };
        m.push("toolkit", format!("pftrack {}", env!("CARGO_PKG_VERSION")));
        m.push("command", command);
        m
    }

    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn extend(&mut self, entries: impl IntoIterator<Item = (String, String)>) {
        self.entries.extend(entries);
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        let mut text = String::new();
        for (key, value) in &self.entries {
            text.push_str(key);
            text.push_str(" = ");
            text.push_str(value);
            text.push('\n');
        }
        fs::write(path, text)?;
        Ok(())
    }
}
