//! Subcommand implementations, independent of argument parsing.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use chrono::{SecondsFormat, Utc};
use ssml_core::certificates::{fisher_matching_curve, Certificate, FisherRow};
use ssml_core::experiments::{run_global_aliasing, run_local_fixed_depth, run_multiscale};
use ssml_core::scaling::{global_scaling, local_scaling, multiscale_scaling};
use ssml_core::sensing::NoonProbe;
use ssml_core::stats::{ols_loglog, FitResult};

use crate::manifest::{digest, ExperimentConfig, RunManifest, MANIFEST_FILE};
use crate::output::{self, SCHEMA_VERSION};

/// Rendered output files of one experiment, in write order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rendered {
    pub files: Vec<(String, String)>,
}

impl Rendered {
    pub fn get(&self, name: &str) -> Option<&str> {
        self.files
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, c)| c.as_str())
    }
}

/// Run `f` on a pool of `threads` workers (0 = one per core).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .context("building thread pool")?;
    Ok(pool.install(f))
}

/// Simulate an experiment and render its CSV and JSON outputs.
pub fn render_experiment(config: &ExperimentConfig) -> Result<Rendered> {
    let files = match config {
        ExperimentConfig::Local(c) => {
            let cells = run_local_fixed_depth(c)?;
            let fits = local_scaling(&cells)?;
            let summary = output::LocalSummary {
                schema_version: SCHEMA_VERSION,
                dataset: "local",
                fits: &fits,
            };
            vec![
                ("cells.csv".to_string(), output::cells_csv(&cells)),
                ("summary.json".to_string(), output::to_json(&summary)?),
            ]
        }
        ExperimentConfig::Global(c) => {
            let cells = run_global_aliasing(c)?;
            let fits = global_scaling(&cells)?;
            let summary = output::GlobalSummary {
                schema_version: SCHEMA_VERSION,
                dataset: "global",
                fits: &fits,
            };
            vec![
                ("cells.csv".to_string(), output::cells_csv(&cells)),
                ("summary.json".to_string(), output::to_json(&summary)?),
            ]
        }
        ExperimentConfig::Multiscale(c) => {
            let results = run_multiscale(c)?;
            let fit = multiscale_scaling(&results)?;
            let summary = output::MultiscaleSummary {
                schema_version: SCHEMA_VERSION,
                dataset: "multiscale",
                rmse_vs_r_tot: &fit,
                results: &results,
            };
            vec![
                (
                    "multiscale.csv".to_string(),
                    output::multiscale_csv(&results),
                ),
                ("stages.csv".to_string(), output::stages_csv(&results)),
                ("summary.json".to_string(), output::to_json(&summary)?),
            ]
        }
    };
    Ok(Rendered { files })
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

/// Run, then write outputs plus a manifest into `out_dir`.
pub fn run_experiment(
    config: &ExperimentConfig,
    out_dir: &Path,
    threads: usize,
) -> Result<RunManifest> {
    let started_at = now();
    let rendered = with_threads(threads, || render_experiment(config))??;
    let finished_at = now();
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        schema_version: SCHEMA_VERSION,
        experiment: config.clone(),
        master_seed: config.master_seed(),
        threads: if threads == 0 {
            rayon::current_num_threads()
        } else {
            threads
        },
        started_at,
        finished_at,
        outputs: rendered.files.iter().map(|(n, c)| digest(n, c)).collect(),
    };
    let manifest_json = output::to_json(&manifest)?;
    let mut files: Vec<(&str, &str)> = rendered
        .files
        .iter()
        .map(|(n, c)| (n.as_str(), c.as_str()))
        .collect();
    files.push((MANIFEST_FILE, &manifest_json));
    output::write_all(out_dir, &files)?;
    Ok(manifest)
}

pub fn certify(m_halts: &[u32], eta: f64, qfi: Option<f64>) -> Result<Vec<Certificate>> {
    if m_halts.is_empty() {
        bail!("at least one m_halt is required");
    }
    m_halts
        .iter()
        .map(|&m| Certificate::new(m, eta, qfi).map_err(Into::into))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Log,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub spacing: Spacing,
    pub include_zero: bool,
}

impl GridSpec {
    pub fn build(&self) -> Result<Vec<f64>> {
        if self.points == 0 {
            bail!("grid needs at least one point");
        }
        if self.min.is_nan() || self.max.is_nan() || self.min > self.max {
            bail!("grid bounds are reversed");
        }
        if self.spacing == Spacing::Log && self.min <= 0.0 {
            bail!("log grid needs a positive lower bound");
        }
        let mut grid = Vec::with_capacity(self.points + 1);
        if self.include_zero {
            grid.push(0.0);
        }
        let n = self.points;
        for k in 0..n {
            let t = if n == 1 {
                0.0
            } else {
                k as f64 / (n - 1) as f64
            };
            let v = match self.spacing {
                _ if k == 0 => self.min,
                _ if k == n - 1 => self.max,
                Spacing::Linear => self.min + t * (self.max - self.min),
                Spacing::Log => (self.min.ln() + t * (self.max.ln() - self.min.ln())).exp(),
            };
            grid.push(v);
        }
        Ok(grid)
    }
}

pub fn fisher(m: u32, grid: &GridSpec) -> Result<Vec<FisherRow>> {
    let probe = NoonProbe::new(m)?;
    Ok(fisher_matching_curve(&probe, &grid.build()?))
}

/// Refit `y` against `x` from any emitted CSV. `filters` are `column=value`
/// pairs compared as strings, or numerically when both sides parse.
pub fn fit_csv(
    path: &Path,
    x_col: &str,
    y_col: &str,
    filters: &[(String, String)],
) -> Result<FitResult> {
    let mut reader =
        csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let index = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| anyhow!("column `{name}` not found in {}", path.display()))
    };
    let (xi, yi) = (index(x_col)?, index(y_col)?);
    let filters = filters
        .iter()
        .map(|(c, v)| Ok((index(c)?, v.as_str())))
        .collect::<Result<Vec<_>>>()?;
    let same = |a: &str, b: &str| match (a.parse::<f64>(), b.parse::<f64>()) {
        (Ok(x), Ok(y)) => x == y,
        _ => a == b,
    };
    let mut points = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        if !filters.iter().all(|&(i, v)| same(&record[i], v)) {
            continue;
        }
        let parse = |i: usize| -> Result<f64> {
            record[i]
                .parse()
                .with_context(|| format!("row {}: `{}` is not a number", line + 1, &record[i]))
        };
        points.push((parse(xi)?, parse(yi)?));
    }
    Ok(ols_loglog(&points)?)
}

/// Rerun a manifest's config into `out_dir` and report files whose digests
/// changed.
pub fn replay(
    manifest_path: &Path,
    out_dir: &Path,
    threads: usize,
) -> Result<(RunManifest, Vec<String>)> {
    let expected = crate::manifest::read_manifest(manifest_path)?;
    let actual = run_experiment(&expected.experiment, out_dir, threads)?;
    let bad = crate::manifest::digest_mismatches(&expected, &actual);
    Ok((actual, bad))
}

pub fn default_replay_dir(manifest_path: &Path) -> PathBuf {
    manifest_path
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .join("replay")
}
