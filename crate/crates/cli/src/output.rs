use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{hex, RunConfig};
use crate::CliError;

/// Where a file goes under the output root.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Area {
    Raw,
    Reports,
    Figures,
}

impl Area {
    fn dir(self) -> &'static str {
        match self {
            Area::Raw => "raw",
            Area::Reports => "reports",
            Area::Figures => "figures_data",
        }
    }
}

/// Writes outputs and a `<file>.meta.json` sidecar next to each one.
pub struct Output {
    root: PathBuf,
    meta: Value,
}

impl Output {
    pub fn new(root: &Path, command: &str, seed: Option<u64>, cfg: &RunConfig, inputs: &[&Path]) -> Result<Self, CliError> {
        let mut listed = Vec::new();
        for p in inputs {
            let bytes = fs::read(p).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", p.display())))?;
            listed.push(json!({
                "name": p.file_name().map(|n| n.to_string_lossy().into_owned()),
                "sha256": hex(&Sha256::digest(&bytes)),
            }));
        }
        let meta = json!({
            "tool": "agentnet",
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "seed": seed,
            "config_hash": cfg.hash(),
            "inputs": listed,
            "config": cfg,
        });
        for area in [Area::Raw, Area::Reports, Area::Figures] {
            fs::create_dir_all(root.join(area.dir())).map_err(runtime)?;
        }
        Ok(Self { root: root.to_path_buf(), meta })
    }

    pub fn path(&self, area: Area, name: &str) -> PathBuf {
        self.root.join(area.dir()).join(name)
    }

    pub fn bytes(&self, area: Area, name: &str, data: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.path(area, name);
        fs::write(&path, data).map_err(runtime)?;
        let mut meta = self.meta.clone();
        meta["file"] = json!(name);
        meta["sha256"] = json!(hex(&Sha256::digest(data)));
        let sidecar = path.with_file_name(format!("{name}.meta.json"));
        fs::write(sidecar, to_pretty(&meta)?).map_err(runtime)?;
        Ok(path)
    }

    pub fn json<T: Serialize + ?Sized>(&self, area: Area, name: &str, value: &T) -> Result<PathBuf, CliError> {
        self.bytes(area, name, &to_pretty(value)?)
    }

    /// `header` then one record per row.
    pub fn csv<I, R>(&self, area: Area, name: &str, header: &[&str], rows: I) -> Result<PathBuf, CliError>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator,
        R::Item: AsRef<[u8]>,
    {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header).map_err(runtime)?;
        for r in rows {
            w.write_record(r).map_err(runtime)?;
        }
        let data = w.into_inner().map_err(|e| CliError::Runtime(e.to_string()))?;
        self.bytes(area, name, &data)
    }
}

fn to_pretty<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut v = serde_json::to_vec_pretty(value).map_err(runtime)?;
    v.push(b'\n');
    Ok(v)
}

pub fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}
