use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::capsolve::SolveOptions;
use crate::error::{Error, Result};
use crate::numfmt::json_num;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Record of one invocation: inputs, settings and every file written.
pub struct RunManifest {
    command: Vec<String>,
    started: Instant,
    inputs: Vec<(String, String)>,
    solver: Option<Value>,
    outputs: Vec<(String, String)>,
}

impl RunManifest {
    pub fn new(command: Vec<String>) -> Self {
        RunManifest { command, started: Instant::now(), inputs: Vec::new(), solver: None, outputs: Vec::new() }
    }

    /// Read an input file and record its hash.
    pub fn read_input(&mut self, path: &Path) -> Result<String> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.inputs.push((path.display().to_string(), sha256_hex(text.as_bytes())));
        Ok(text)
    }

    /// Record a built-in input that has no file.
    pub fn builtin_input(&mut self, name: &str, text: &str) {
        self.inputs.push((name.to_string(), sha256_hex(text.as_bytes())));
    }

    pub fn solver(&mut self, opts: &SolveOptions, h_max: f64) {
        self.solver = Some(json!({
            "mode": opts.mode,
            "p": opts.order,
            "mac_ratio": json_num(opts.mac_ratio),
            "tol": json_num(opts.krylov_tol),
            "leaf_size": opts.leaf_size,
            "epsilon_r": json_num(opts.epsilon_r),
            "h_max_nm": json_num(h_max),
            "jobs": opts.jobs,
        }));
    }

    /// Write an output file, creating parent directories, and record it.
    pub fn write(&mut self, path: &Path, contents: &str) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        std::fs::write(path, contents).map_err(|e| Error::io(path, e))?;
        self.outputs.push((path.display().to_string(), sha256_hex(contents.as_bytes())));
        Ok(())
    }

    pub fn outputs(&self) -> impl Iterator<Item = &str> {
        self.outputs.iter().map(|(p, _)| p.as_str())
    }

    fn to_json(&self) -> Value {
        let pairs = |v: &[(String, String)]| {
            v.iter()
                .map(|(p, h)| json!({ "path": p, "sha256": h }))
                .collect::<Vec<_>>()
        };
        let mut m = Map::new();
        m.insert("command".into(), json!(self.command));
        m.insert("tool_version".into(), json!(concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"))));
        m.insert("inputs".into(), json!(pairs(&self.inputs)));
        m.insert("solver".into(), self.solver.clone().unwrap_or(Value::Null));
        m.insert("wall_time_s".into(), json_num(self.started.elapsed().as_secs_f64()));
        m.insert("outputs".into(), json!(pairs(&self.outputs)));
        Value::Object(m)
    }

    /// Write the manifest itself. Call after every other output.
    pub fn finish(self, path: &Path) -> Result<PathBuf> {
        let text = serde_json::to_string_pretty(&self.to_json()).map_err(|e| Error::Parse(e.to_string()))? + "\n";
        std::fs::write(path, text).map_err(|e| Error::io(path, e))?;
        Ok(path.to_path_buf())
    }
}

/// `dir/stem.manifest.json` next to the primary output.
pub fn manifest_path(primary: &Path) -> PathBuf {
    let stem = primary.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
    primary.with_file_name(format!("{stem}.manifest.json"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn manifest_sits_next_to_output() {
        assert_eq!(manifest_path(Path::new("out/caps.json")), PathBuf::from("out/caps.manifest.json"));
        assert_eq!(manifest_path(Path::new("sweep.csv")), PathBuf::from("sweep.manifest.json"));
    }
}
