//! Effective run configuration: built-in defaults, then the `--config`
//! file, then command-line flags.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use selfsim_core::quadrature::QuadConfig;
use selfsim_core::stability::EigenShotConfig;
use selfsim_core::{IntegratorConfig, ShooterConfig};

use crate::args::{parse_values, CommonArgs};
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub integrator: IntegratorConfig,
    pub shooter: ShooterConfig,
    pub eigen: EigenShotConfig,
    pub quadrature: QuadConfig,
}

impl RunConfig {
    pub fn validate(&self) -> CliResult<()> {
        self.integrator.validate()?;
        self.shooter.validate()?;
        self.eigen.validate()?;
        Ok(())
    }
}

/// Everything a configuration file may set.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FileLayer {
    pub m: Option<u32>,
    pub l: Option<u32>,
    pub config: RunConfig,
}

fn parse_document(path: &Path, text: &str) -> CliResult<Value> {
    let invalid = |e: String| CliError::Usage(format!("{}: {e}", path.display()));
    let from_toml = |t: &str| -> Result<Value, String> {
        let v: toml::Value = toml::from_str(t).map_err(|e| e.to_string())?;
        serde_json::to_value(v).map_err(|e| e.to_string())
    };
    match path.extension().and_then(|e| e.to_str()) {
        Some("toml") => from_toml(text).map_err(invalid),
        Some("json") => serde_json::from_str(text).map_err(|e| invalid(e.to_string())),
        _ => serde_json::from_str(text).or_else(|_| from_toml(text)).map_err(invalid),
    }
}

fn read_u32(v: &Value, key: &str) -> Option<u32> {
    v.get(key).and_then(Value::as_u64).and_then(|x| u32::try_from(x).ok())
}

/// Reads a configuration file. A manifest written by `solve` is recognised
/// by its `config` block; its `params` then supply `m` and `l`.
pub fn load_file(path: &Path) -> CliResult<FileLayer> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let doc = parse_document(path, &text)?;
    let (block, params) = match doc.get("config") {
        Some(block) => (block.clone(), doc.get("params").cloned().unwrap_or(Value::Null)),
        None => (doc.clone(), doc.clone()),
    };
    let config: RunConfig = serde_json::from_value(block)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    Ok(FileLayer { m: read_u32(&params, "m"), l: read_u32(&params, "l"), config })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub m: Vec<u32>,
    pub l: Vec<u32>,
    pub config: RunConfig,
}

impl Resolved {
    /// The single `(m, l)` pair required by every command except `check`.
    pub fn single(&self) -> CliResult<(u32, u32)> {
        match (self.m.as_slice(), self.l.as_slice()) {
            ([m], [l]) => Ok((*m, *l)),
            _ => Err(CliError::Usage("this command takes a single value for --m and --l".into())),
        }
    }
}

pub fn resolve(args: &CommonArgs) -> CliResult<Resolved> {
    let file = match &args.config {
        Some(path) => load_file(path)?,
        None => FileLayer::default(),
    };
    let values = |flag: &Option<String>, from_file: Option<u32>, default: u32| -> CliResult<Vec<u32>> {
        match flag {
            Some(text) => parse_values(text).map_err(CliError::Usage),
            None => Ok(vec![from_file.unwrap_or(default)]),
        }
    };
    let m = values(&args.m, file.m, 3)?;
    let l = values(&args.l, file.l, 1)?;

    let mut config = file.config;
    if let Some(n) = args.nmax {
        config.shooter.n_max = n;
    }
    if let Some(t) = args.rel_tol {
        config.integrator.rel_tol = t;
    }
    if let Some(t) = args.abs_tol {
        config.integrator.abs_tol = t;
    }
    if let Some(x) = args.xmax {
        config.integrator.x_max = x;
    }
    if let Some(p) = args.fit_point {
        config.shooter.fit_point = p;
    }
    config.validate()?;
    Ok(Resolved { m, l, config })
}
