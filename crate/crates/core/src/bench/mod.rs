//! Reference problems, error norms and report files for the verification
//! and convergence studies.

pub mod eshelby;
pub mod examples;
pub mod inclusion;
pub mod patch;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::model::{Analysis, Model, TractionRecord};
use crate::output::{csv_err, fmt_float, write_solution_vtk, write_traction_csv};

pub use eshelby::{EshelbyConstants, EshelbyParams};

/// Relative discrete L2 error `|f - g| / |g|` over sample points.
pub fn error_norm(field: &[f64], reference: &[f64]) -> Result<f64> {
    if field.is_empty() {
        return Err(Error::InvalidArgument(
            "error norm over an empty node set".into(),
        ));
    }
    if field.len() != reference.len() {
        return Err(Error::InvalidArgument(format!(
            "{} samples against {} reference values",
            field.len(),
            reference.len()
        )));
    }
    let den = reference.iter().map(|g| g * g).sum::<f64>().sqrt();
    if den == 0.0 {
        return Err(Error::InvalidArgument(
            "reference field vanishes at every sample".into(),
        ));
    }
    let num = field
        .iter()
        .zip(reference)
        .map(|(f, g)| (f - g).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(num / den)
}

/// Largest absolute difference between consecutive samples.
pub fn max_jump(values: &[f64]) -> f64 {
    values
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0, f64::max)
}

/// Interface profile with optional extra columns.
#[derive(Debug, Clone)]
pub struct Profile {
    pub name: String,
    pub records: Vec<TractionRecord>,
    pub extra: Vec<(String, Vec<f64>)>,
}

#[derive(Debug, Clone, Default)]
pub struct BenchReport {
    pub name: String,
    pub config: Vec<(String, String)>,
    pub metrics: Vec<(String, f64)>,
    pub profiles: Vec<Profile>,
    /// Wall time in seconds; kept out of the CSV files so they stay reproducible.
    pub runtime: f64,
}

impl BenchReport {
    pub fn new(name: impl Into<String>) -> Self {
        BenchReport {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn config(&mut self, key: &str, value: impl ToString) {
        self.config.push((key.into(), value.to_string()));
    }

    pub fn metric(&mut self, key: &str, value: f64) {
        self.metrics.push((key.into(), value));
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.metrics.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    pub fn config_string(&self) -> String {
        self.config
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";")
    }

    /// Writes `<name>_metrics.csv` and one `<name>_<profile>.csv` per profile.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut paths = Vec::new();
        let p = dir.join(format!("{}_metrics.csv", self.name));
        write_metric_rows(&p, std::slice::from_ref(self))?;
        paths.push(p);
        for prof in &self.profiles {
            let p = dir.join(format!("{}_{}.csv", self.name, prof.name));
            write_traction_csv(
                BufWriter::new(File::create(&p)?),
                &prof.records,
                &prof.extra,
            )?;
            paths.push(p);
        }
        Ok(paths)
    }
}

/// One row per (report, metric): `report,config,metric,value`.
pub fn write_metric_rows(path: &Path, reports: &[BenchReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    w.write_record(["report", "config", "metric", "value"])
        .map_err(csv_err)?;
    for r in reports {
        let cfg = r.config_string();
        for (k, v) in &r.metrics {
            w.write_record([
                r.name.as_str(),
                cfg.as_str(),
                k.as_str(),
                fmt_float(*v).as_str(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// A solved benchmark with its report.
#[derive(Debug, Clone)]
pub struct Run {
    pub report: BenchReport,
    pub model: Model,
    pub analysis: Analysis,
}

impl Run {
    /// Report CSVs plus one VTK file per domain.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let mut paths = self.report.write(dir)?;
        paths.extend(write_domains_vtk(
            dir,
            &self.report.name,
            &self.model,
            &self.analysis,
        )?);
        Ok(paths)
    }
}

pub fn write_domains_vtk(
    dir: &Path,
    stem: &str,
    model: &Model,
    analysis: &Analysis,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for (d, dom) in model.domains.iter().enumerate() {
        let p = dir.join(format!("{stem}_{}.vtk", dom.name));
        write_solution_vtk(
            BufWriter::new(File::create(&p)?),
            &format!("{stem} {}", dom.name),
            &dom.mesh,
            &analysis.solution.displacement[d],
            &analysis.solution.stress[d],
        )?;
        paths.push(p);
    }
    Ok(paths)
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 || x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidArgument(
            "slope needs at least two positive samples".into(),
        ));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    Ok(sxy / sxx)
}
