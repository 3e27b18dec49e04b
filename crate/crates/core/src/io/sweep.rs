use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use super::artifacts::write_atomic;
use super::config::{parse_config_value, RunConfig, SweepAxis};
use super::presets::set_path;
use super::run::{execute, write_outputs, Summary};
use super::ErrorReport;
use crate::error::{Error, Result};

/// One grid point: its overrides and the config they produce.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub index: usize,
    pub parameters: BTreeMap<String, Value>,
    pub config: std::result::Result<RunConfig, ErrorReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ManifestRow {
    pub index: usize,
    pub parameters: BTreeMap<String, Value>,
    pub directory: String,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config_sha256: Option<String>,
    /// Summary without the echoed config.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub config_sha256: String,
    pub axes: Vec<SweepAxis>,
    pub points: Vec<ManifestRow>,
}

/// Cartesian product of the axes, first axis varying slowest.
fn grid(axes: &[SweepAxis]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for axis in axes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..axis.values.len()).map(move |i| {
                    let mut p = prefix.clone();
                    p.push(i);
                    p
                })
            })
            .collect();
    }
    out
}

/// Validates the sweep document and builds the config of every grid point.
/// Invalid points are reported per point rather than failing the sweep.
pub fn expand_sweep(document: &Value) -> Result<(RunConfig, Vec<SweepPoint>)> {
    let base = parse_config_value(document.clone())?;
    let sweep = base
        .sweep
        .clone()
        .ok_or_else(|| Error::config("sweep", "a sweep needs sweep axes"))?;
    if base.scenario != super::config::Scenario::Sweep {
        return Err(Error::config("scenario", "must be \"sweep\" for a sweep run"));
    }
    let mut point_doc = document.clone();
    if let Some(obj) = point_doc.as_object_mut() {
        obj.remove("sweep");
    }
    set_path(&mut point_doc, "scenario", serde_json::to_value(sweep.scenario)?)?;

    let points = grid(&sweep.axes)
        .into_iter()
        .enumerate()
        .map(|(index, choice)| {
            let mut doc = point_doc.clone();
            let mut parameters = BTreeMap::new();
            let config = (|| {
                for (axis, &i) in sweep.axes.iter().zip(&choice) {
                    parameters.insert(axis.path.clone(), axis.values[i].clone());
                    set_path(&mut doc, &axis.path, axis.values[i].clone())?;
                }
                parse_config_value(doc)
            })()
            .map_err(|e| ErrorReport::from(&e));
            SweepPoint {
                index,
                parameters,
                config,
            }
        })
        .collect();
    Ok((base, points))
}

/// In-memory sweep: the summary of every point, in index order.
pub fn execute_sweep(document: &Value) -> Result<Vec<(SweepPoint, std::result::Result<Summary, ErrorReport>)>> {
    let (_, points) = expand_sweep(document)?;
    Ok(points
        .into_par_iter()
        .map(|p| {
            let res = match &p.config {
                Ok(cfg) => execute(cfg).map(|o| o.summary).map_err(|e| ErrorReport::from(&e)),
                Err(e) => Err(e.clone()),
            };
            (p, res)
        })
        .collect())
}

/// Runs every grid point concurrently into `point_NNNN` subdirectories and
/// writes `manifest.json`.
pub fn run_sweep(document: &Value, out_dir: Option<&Path>) -> Result<(PathBuf, Manifest)> {
    let (base, points) = expand_sweep(document)?;
    let dir = out_dir
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from(&base.output.directory));
    std::fs::create_dir_all(&dir)?;
    let rows: Vec<ManifestRow> = points
        .into_par_iter()
        .map(|p| {
            let name = format!("point_{:04}", p.index);
            let mut row = ManifestRow {
                index: p.index,
                parameters: p.parameters,
                directory: name.clone(),
                status: "error",
                config_sha256: None,
                summary: None,
                error: None,
            };
            let cfg = match p.config {
                Ok(cfg) => cfg,
                Err(e) => {
                    row.error = Some(e);
                    return row;
                }
            };
            row.config_sha256 = Some(cfg.hash());
            let outcome = execute(&cfg).and_then(|out| {
                write_outputs(&dir.join(&name), &cfg, &out)?;
                let mut v = serde_json::to_value(&out.summary)?;
                if let Some(obj) = v.as_object_mut() {
                    obj.remove("config");
                }
                Ok(v)
            });
            match outcome {
                Ok(v) => {
                    row.status = "ok";
                    row.summary = Some(v);
                }
                Err(e) => row.error = Some(ErrorReport::from(&e)),
            }
            row
        })
        .collect();
    let manifest = Manifest {
        config_sha256: base.hash(),
        axes: base.sweep.clone().map(|s| s.axes).unwrap_or_default(),
        points: rows,
    };
    write_atomic(&dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?.as_bytes())?;
    Ok((dir, manifest))
}
