//! Pipeline configuration: CLI flags plus an optional TOML config file.
//!
//! When `--config` is given, values present in the file override the
//! corresponding flags.

use std::path::{Path, PathBuf};

use mcp_risk_core::findings::DedupMode;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::errors::{CliError, CliResult};

#[derive(Debug, Clone, Serialize)]
pub struct PipelineConfig {
    pub cwe_xml: PathBuf,
    pub capec_xml: PathBuf,
    pub overrides: Option<PathBuf>,
    pub surface_map: Option<PathBuf>,
    pub joern_manifest: Option<PathBuf>,
    pub scanner_map: Option<PathBuf>,
    pub findings_dir: PathBuf,
    pub out: PathBuf,
    pub dedup: DedupMode,
    pub render: bool,
}

/// Subset of fields a `--config` file may override.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub cwe_xml: Option<PathBuf>,
    pub capec_xml: Option<PathBuf>,
    pub overrides: Option<PathBuf>,
    pub surface_map: Option<PathBuf>,
    pub joern_manifest: Option<PathBuf>,
    pub scanner_map: Option<PathBuf>,
    pub findings_dir: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub dedup: Option<DedupMode>,
    pub render: Option<bool>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::config(format!("bad config {}: {e}", path.display())))
    }
}

impl PipelineConfig {
    /// Applies config-file values on top of flag values.
    pub fn overlay(&mut self, file: ConfigFile) {
        macro_rules! take {
            ($field:ident) => {
                if let Some(value) = file.$field {
                    self.$field = value;
                }
            };
        }
        take!(cwe_xml);
        take!(capec_xml);
        take!(findings_dir);
        take!(out);
        take!(dedup);
        take!(render);
        if file.overrides.is_some() {
            self.overrides = file.overrides;
        }
        if file.surface_map.is_some() {
            self.surface_map = file.surface_map;
        }
        if file.joern_manifest.is_some() {
            self.joern_manifest = file.joern_manifest;
        }
        if file.scanner_map.is_some() {
            self.scanner_map = file.scanner_map;
        }
    }

    /// Checks that every referenced input exists and the output directory
    /// is creatable.
    pub fn validate(&self) -> CliResult<()> {
        let mut required: Vec<(&str, &Path)> = vec![
            ("--cwe-xml", &self.cwe_xml),
            ("--capec-xml", &self.capec_xml),
        ];
        for (flag, path) in [
            ("--overrides", &self.overrides),
            ("--surface-map", &self.surface_map),
            ("--joern-manifest", &self.joern_manifest),
            ("--scanner-map", &self.scanner_map),
        ] {
            if let Some(path) = path {
                required.push((flag, path));
            }
        }
        for (flag, path) in required {
            if !path.is_file() {
                return Err(CliError::config(format!(
                    "{flag}: `{}` does not exist or is not a file",
                    path.display()
                )));
            }
        }
        if !self.findings_dir.is_dir() {
            return Err(CliError::config(format!(
                "--findings-dir: `{}` is not a directory",
                self.findings_dir.display()
            )));
        }
        std::fs::create_dir_all(&self.out).map_err(|e| {
            CliError::config(format!("cannot create --out `{}`: {e}", self.out.display()))
        })?;
        Ok(())
    }

    /// Stable hash of the effective configuration, recorded in the run
    /// manifest. Covers the content of every configuration input plus the
    /// semantic options, never filesystem paths, so identical inputs hash
    /// identically wherever they live.
    pub fn digest(&self) -> CliResult<String> {
        let file_digest = |path: &Option<PathBuf>| -> CliResult<String> {
            match path {
                Some(path) => {
                    let bytes = std::fs::read(path).map_err(|e| {
                        CliError::config(format!("cannot read {}: {e}", path.display()))
                    })?;
                    Ok(hex_string(&Sha256::digest(&bytes)))
                }
                None => Ok("builtin".to_string()),
            }
        };
        let canonical = serde_json::json!({
            "cwe_xml": file_digest(&Some(self.cwe_xml.clone()))?,
            "capec_xml": file_digest(&Some(self.capec_xml.clone()))?,
            "overrides": file_digest(&self.overrides)?,
            "surface_map": file_digest(&self.surface_map)?,
            "joern_manifest": file_digest(&self.joern_manifest)?,
            "scanner_map": file_digest(&self.scanner_map)?,
            "dedup": self.dedup,
            "render": self.render,
        });
        let text = serde_json::to_string(&canonical).expect("config digest serializes");
        Ok(hex_string(&Sha256::digest(text.as_bytes())))
    }
}

pub fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
