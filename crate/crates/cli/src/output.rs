//! CSV and JSON renderers.
//!
//! Floating-point fields are written in scientific notation with 17
//! significant digits (`{:.16e}`), which round-trips every `f64` and keeps
//! reruns byte-identical. Integer fields are written plainly.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use ssml_core::certificates::{Certificate, FisherRow};
use ssml_core::experiments::{CellResult, MultiscaleResult};
use ssml_core::scaling::{GlobalScaling, LocalScaling};
use ssml_core::stats::FitResult;

/// Version of the CSV and JSON layouts below.
pub const SCHEMA_VERSION: u32 = 1;

pub const CELLS_HEADER: &str = "dataset,m,m_halt,trials,nu_mean,nu_stderr,r_total,eps_mean,eps_stderr,rmse_theta,rmse_stderr,exhausted";
pub const MULTISCALE_HEADER: &str =
    "dataset,stage_max,m_final,m_halt,trials,r_tot_mean,r_tot_stderr,rmse_final,rmse_stderr,exhausted";
pub const STAGES_HEADER: &str = "stage_max,stage,depth,t_mean,r_mean";
pub const FISHER_HEADER: &str = "delta,i_cl,f_q,limit";
pub const CERTIFY_HEADER: &str = "m_halt,eta,eps_cert,eps_cert_asymptotic,param_cert";

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn cells_csv(cells: &[CellResult]) -> String {
    let mut out = String::from(CELLS_HEADER);
    out.push('\n');
    for c in cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            c.dataset,
            c.m,
            c.m_halt,
            c.trials,
            fmt_f64(c.nu),
            fmt_f64(c.nu_stderr),
            fmt_f64(c.r_total),
            fmt_f64(c.mean_eps),
            fmt_f64(c.eps_stderr),
            fmt_f64(c.rmse_theta),
            fmt_f64(c.rmse_stderr),
            c.exhausted
        );
    }
    out
}

pub fn multiscale_csv(results: &[MultiscaleResult]) -> String {
    let mut out = String::from(MULTISCALE_HEADER);
    out.push('\n');
    for r in results {
        let _ = writeln!(
            out,
            "multiscale,{},{},{},{},{},{},{},{},{}",
            r.stage_max,
            1u64 << r.stage_max,
            r.m_halt,
            r.trials,
            fmt_f64(r.r_tot_mean),
            fmt_f64(r.r_tot_stderr),
            fmt_f64(r.rmse_final),
            fmt_f64(r.rmse_stderr),
            r.exhausted
        );
    }
    out
}

pub fn stages_csv(results: &[MultiscaleResult]) -> String {
    let mut out = String::from(STAGES_HEADER);
    out.push('\n');
    for r in results {
        for s in &r.stages {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.stage_max,
                s.stage,
                s.depth,
                fmt_f64(s.t_mean),
                fmt_f64(s.r_mean)
            );
        }
    }
    out
}

pub fn fisher_csv(rows: &[FisherRow]) -> String {
    let mut out = String::from(FISHER_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(r.delta),
            fmt_f64(r.i_cl),
            fmt_f64(r.f_q),
            r.limit
        );
    }
    out
}

pub fn certify_csv(certs: &[Certificate]) -> String {
    let mut out = String::from(CERTIFY_HEADER);
    out.push('\n');
    for c in certs {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            c.m_halt,
            fmt_f64(c.significance),
            fmt_f64(c.eps_cert),
            fmt_f64(c.eps_cert_asymptotic),
            fmt_opt(c.param_cert)
        );
    }
    out
}

/// Human-readable certificate table.
pub fn certify_table(certs: &[Certificate]) -> String {
    let mut out = format!(
        "{:>8}  {:>8}  {:>22}  {:>22}  {:>22}\n",
        "m_halt", "eta", "eps_cert", "eps_cert_asymptotic", "param_cert"
    );
    for c in certs {
        let param = c
            .param_cert
            .map(|p| format!("{p:.15e}"))
            .unwrap_or_else(|| "-".into());
        let _ = writeln!(
            out,
            "{:>8}  {:>8}  {:>22.15e}  {:>22.15e}  {:>22}",
            c.m_halt, c.significance, c.eps_cert, c.eps_cert_asymptotic, param
        );
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalSummary<'a> {
    pub schema_version: u32,
    pub dataset: &'static str,
    pub fits: &'a LocalScaling,
}

#[derive(Debug, Clone, Serialize)]
pub struct GlobalSummary<'a> {
    pub schema_version: u32,
    pub dataset: &'static str,
    pub fits: &'a GlobalScaling,
}

#[derive(Debug, Clone, Serialize)]
pub struct MultiscaleSummary<'a> {
    pub schema_version: u32,
    pub dataset: &'static str,
    pub rmse_vs_r_tot: &'a FitResult,
    pub results: &'a [MultiscaleResult],
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).context("serializing JSON")?;
    s.push('\n');
    Ok(s)
}

/// Write every file or none of the final names: contents go to a temporary
/// sibling first and are renamed once all writes succeeded.
pub fn write_all(dir: &Path, files: &[(&str, &str)]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut staged = Vec::with_capacity(files.len());
    for (name, contents) in files {
        let tmp = dir.join(format!(".{name}.tmp"));
        if let Err(e) = std::fs::write(&tmp, contents) {
            for (t, _) in &staged {
                let _ = std::fs::remove_file(t);
            }
            return Err(e).with_context(|| format!("writing {}", tmp.display()));
        }
        staged.push((tmp, dir.join(name)));
    }
    let mut written = Vec::with_capacity(staged.len());
    for (tmp, dest) in staged {
        std::fs::rename(&tmp, &dest).with_context(|| format!("renaming to {}", dest.display()))?;
        written.push(dest);
    }
    Ok(written)
}
