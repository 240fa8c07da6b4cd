//! Experiment manifests and the four commands that consume them.
//!
//! Every CSV starts with `# ddf-dmt <version> manifest sha256:<hex>`, where
//! the hash covers the effective manifest (after command-line overrides,
//! without the output directory). Outputs depend only on that manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analytic::{breakpoints_json, write_curve_csv, CurveId};
use crate::error::{Error, Result};
use crate::lab::{run_arq_lab, write_lab_csv, LabConfig, LabResult};
use crate::outage::verify::{default_cases, verify_closed_forms, VerifyOptions, VerifyReport};
use crate::sim::{run_trials, slope_of, write_sim_csv, write_slope_csv, PointEstimate, SimConfig, SlopeRow};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub name: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curves: Option<CurvesBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyBlock>,
    /// Campaigns; each runs with the manifest seed.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub simulate: Vec<SimConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lab: Vec<LabConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvesBlock {
    #[serde(default = "default_step")]
    pub step: f64,
    pub items: Vec<CurveItem>,
    /// Also write `breakpoints.json`.
    #[serde(default = "yes")]
    pub breakpoints: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveItem {
    pub id: String,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub l: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyBlock {
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_exclusion")]
    pub exclusion: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_grid: Option<Vec<f64>>,
    /// Restricts the run to these curve ids.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curves: Option<Vec<String>>,
}

impl Default for VerifyBlock {
    fn default() -> Self {
        VerifyBlock {
            points: default_points(),
            tolerance: default_tolerance(),
            exclusion: default_exclusion(),
            r_grid: None,
            curves: None,
        }
    }
}

fn default_step() -> f64 {
    0.01
}
fn yes() -> bool {
    true
}
fn default_points() -> usize {
    50
}
fn default_tolerance() -> f64 {
    1e-4
}
fn default_exclusion() -> f64 {
    1e-3
}

/// Built-in curve manifests.
pub const PRESETS: [&str; 2] = ["fig-mar-ddf", "fig-cvma-ddf"];

impl Manifest {
    /// Parses TOML, or JSON when the text starts with `{`.
    pub fn parse(text: &str) -> Result<Self> {
        let value: serde_json::Value = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| Error::config("<root>", e.to_string()))?
        } else {
            toml::from_str(text).map_err(|e| Error::config("<root>", e.to_string()))?
        };
        let m: Manifest = serde_path_to_error::deserialize(value).map_err(|e| {
            let path = e.path().to_string();
            Error::config(path, e.into_inner().to_string())
        })?;
        m.validate()?;
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn preset(name: &str) -> Result<Self> {
        let items = |list: &[(&str, u32)]| {
            list.iter()
                .map(|&(id, l)| CurveItem {
                    id: id.to_string(),
                    l: Some(l),
                })
                .collect()
        };
        let curves = match name {
            "fig-mar-ddf" => items(&[("mar_upper", 1), ("mar_ddf_lower", 1)]),
            "fig-cvma-ddf" => items(&[("cvma_upper", 2), ("cvma_ddf_lower", 2)]),
            _ => {
                return Err(Error::config(
                    "--preset",
                    format!("unknown preset `{name}`; expected one of {}", PRESETS.join(", ")),
                ))
            }
        };
        Ok(Manifest {
            name: name.to_string(),
            seed: 0,
            output_dir: None,
            curves: Some(CurvesBlock {
                step: 0.01,
                items: curves,
                breakpoints: true,
            }),
            verify: None,
            simulate: Vec::new(),
            lab: Vec::new(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        let safe = |c: char| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.');
        if self.name.is_empty() || !self.name.chars().all(safe) || self.name.starts_with('.') {
            return Err(Error::config("name", format!("`{}` is not a safe file name", self.name)));
        }
        if let Some(c) = &self.curves {
            if c.items.is_empty() {
                return Err(Error::config("curves.items", "empty curve list"));
            }
            if !(c.step > 0.0 && c.step.is_finite()) {
                return Err(Error::config("curves.step", "must be positive"));
            }
            for (i, item) in c.items.iter().enumerate() {
                CurveId::parse(&item.id).map_err(|e| Error::config(format!("curves.items[{i}].id"), e.to_string()))?;
            }
        }
        if let Some(v) = &self.verify {
            if v.points == 0 || !(v.tolerance > 0.0) || !(v.exclusion >= 0.0) {
                return Err(Error::config("verify", "points, tolerance and exclusion must be positive"));
            }
        }
        for (i, s) in self.simulate.iter().enumerate() {
            s.validate().map_err(|e| Error::config(format!("simulate[{i}]"), e.to_string()))?;
        }
        for (i, l) in self.lab.iter().enumerate() {
            l.validate().map_err(|e| Error::config(format!("lab[{i}]"), e.to_string()))?;
        }
        Ok(())
    }

    /// Applies a seed override; campaign seeds always follow the manifest.
    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        if let Some(s) = seed {
            self.seed = s;
        }
        for s in &mut self.simulate {
            s.seed = self.seed;
        }
        for l in &mut self.lab {
            l.seed = self.seed;
        }
        self
    }

    /// SHA-256 of the canonical JSON form, ignoring `output_dir`.
    pub fn hash(&self) -> String {
        let mut m = self.clone();
        m.output_dir = None;
        let bytes = serde_json::to_vec(&m).expect("manifest serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn header(&self) -> String {
        format!("# ddf-dmt {VERSION} manifest sha256:{}\n", self.hash())
    }

    /// `--out`, else `output_dir`, else `out/<name>`.
    pub fn resolve_out(&self, out: Option<&Path>) -> PathBuf {
        out.map(Path::to_path_buf)
            .or_else(|| self.output_dir.clone())
            .unwrap_or_else(|| Path::new("out").join(&self.name))
    }
}

fn write_with_header(dir: &Path, file: &str, header: &str, body: &[u8]) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(file);
    let mut bytes = header.as_bytes().to_vec();
    bytes.extend_from_slice(body);
    fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
    info!("wrote {}", path.display());
    Ok(path)
}

pub fn cmd_curves(m: &Manifest, dir: &Path) -> Result<Vec<PathBuf>> {
    let block = m
        .curves
        .as_ref()
        .ok_or_else(|| Error::config("curves", "manifest has no [curves] block"))?;
    let mut curves = Vec::new();
    for (i, item) in block.items.iter().enumerate() {
        let id = CurveId::parse(&item.id)?;
        let l = item.l.unwrap_or(id.default_rounds());
        let curve = id
            .curve(l)
            .map_err(|e| Error::config(format!("curves.items[{i}]"), e.to_string()))?;
        curves.push((id, l, curve));
    }
    let mut buf = Vec::new();
    write_curve_csv(&mut buf, &curves, block.step)?;
    let mut written = vec![write_with_header(dir, "curves.csv", &m.header(), &buf)?];
    if block.breakpoints {
        let doc = serde_json::json!({
            "tool": format!("ddf-dmt {VERSION}"),
            "manifest_sha256": m.hash(),
            "curves": curves.iter().map(|(id, l, c)| breakpoints_json(*id, *l, c)).collect::<Vec<_>>(),
        });
        let mut text = serde_json::to_string_pretty(&doc)?;
        text.push('\n');
        written.push(write_with_header(dir, "breakpoints.json", "", text.as_bytes())?);
    }
    Ok(written)
}

/// Per-curve summary of a verification run.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveDiff {
    pub curve_id: String,
    pub route: String,
    pub checked: usize,
    pub failed: usize,
    pub max_error: f64,
    pub worst_r: f64,
}

pub fn summarize(report: &VerifyReport) -> Vec<CurveDiff> {
    let mut by: BTreeMap<(&str, &str), CurveDiff> = BTreeMap::new();
    for row in &report.rows {
        let d = by.entry((&row.curve_id, &row.route)).or_insert_with(|| CurveDiff {
            curve_id: row.curve_id.clone(),
            route: row.route.clone(),
            checked: 0,
            failed: 0,
            max_error: 0.0,
            worst_r: row.r,
        });
        d.checked += 1;
        d.failed += (row.abs_err > report.tolerance) as usize;
        if row.abs_err > d.max_error {
            d.max_error = row.abs_err;
            d.worst_r = row.r;
        }
    }
    by.into_values().collect()
}

pub fn verify_options(block: &VerifyBlock) -> Result<VerifyOptions> {
    let mut cases = default_cases();
    if let Some(keep) = &block.curves {
        for k in keep {
            if !cases.iter().any(|c| &c.curve_id == k) {
                return Err(Error::config("verify.curves", format!("no verification case for `{k}`")));
            }
        }
        cases.retain(|c| keep.contains(&c.curve_id));
    }
    Ok(VerifyOptions {
        points: block.points,
        r_grid: block.r_grid.clone(),
        tolerance: block.tolerance,
        exclusion: block.exclusion,
        cases,
    })
}

pub fn cmd_verify(m: &Manifest, dir: &Path) -> Result<(VerifyReport, PathBuf)> {
    let block = m.verify.clone().unwrap_or_default();
    run_verify(m, &verify_options(&block)?, dir)
}

/// Runs `opts` and writes `verify.csv`.
pub fn run_verify(m: &Manifest, opts: &VerifyOptions, dir: &Path) -> Result<(VerifyReport, PathBuf)> {
    let report = verify_closed_forms(opts)?;
    let mut buf = Vec::new();
    report.write_csv(&mut buf)?;
    let path = write_with_header(dir, "verify.csv", &m.header(), &buf)?;
    Ok((report, path))
}

pub struct SimulateOutput {
    pub points: Vec<Vec<PointEstimate>>,
    pub slopes: Vec<SlopeRow>,
    pub files: Vec<PathBuf>,
}

pub fn sim_file_name(i: usize, cfg: &SimConfig) -> String {
    format!("sim_{i:02}_{}_L{}_r{}.csv", cfg.scenario.name(), cfg.l, cfg.r1)
}

pub fn cmd_simulate(m: &Manifest, dir: &Path) -> Result<SimulateOutput> {
    if m.simulate.is_empty() {
        return Err(Error::config("simulate", "manifest has no [[simulate]] entries"));
    }
    let header = m.header();
    let mut out = SimulateOutput {
        points: Vec::new(),
        slopes: Vec::new(),
        files: Vec::new(),
    };
    for (i, cfg) in m.simulate.iter().enumerate() {
        let points = run_trials(cfg)?;
        let mut buf = Vec::new();
        write_sim_csv(&mut buf, cfg.l, &points)?;
        out.files.push(write_with_header(dir, &sim_file_name(i, cfg), &header, &buf)?);
        if points.len() >= 3 {
            match slope_of(&points, cfg.min_events) {
                Ok(s) => out.slopes.push(SlopeRow {
                    scenario: cfg.scenario.name().to_string(),
                    l: cfg.l,
                    r1: cfg.r1,
                    slope: s.slope,
                    ci95: s.ci95,
                    analytic_d: cfg.analytic_d(),
                }),
                Err(e) => warn!("simulate[{i}]: no slope: {e}"),
            }
        }
        out.points.push(points);
    }
    let mut buf = Vec::new();
    write_slope_csv(&mut buf, &out.slopes)?;
    out.files.push(write_with_header(dir, "slopes.csv", &header, &buf)?);
    Ok(out)
}

pub fn cmd_lab(m: &Manifest, dir: &Path) -> Result<(Vec<LabResult>, PathBuf)> {
    if m.lab.is_empty() {
        return Err(Error::config("lab", "manifest has no [[lab]] entries"));
    }
    let results = m.lab.iter().map(run_arq_lab).collect::<Result<Vec<_>>>()?;
    let mut buf = Vec::new();
    write_lab_csv(&mut buf, &results)?;
    let path = write_with_header(dir, "lab.csv", &m.header(), &buf)?;
    Ok((results, path))
}

/// Process exit status for an error: 2 for usage and configuration
/// problems, 1 for everything raised while running.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. }
        | Error::InvalidArgument(_)
        | Error::Domain { .. }
        | Error::UnknownCurve(_)
        | Error::ResourceGuard(_) => 2,
        _ => 1,
    }
}
