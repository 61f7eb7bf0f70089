//! Command-line front end of the mortex toolkit.

pub mod config;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use mortex::bench::examples::{
    build_multi_level_model, build_plate_model, run_multi_level, run_plate_with_hole, ExampleName, MultiLevelConfig,
    PlateConfig,
};
use mortex::bench::inclusion::{
    build_eshelby_model, convergence, convergence_slope, kappa_sweep, run_eshelby, write_convergence_csv,
};
use mortex::bench::patch::{build_patch_model, build_uniform_compression, run_patch_test, run_table, run_uniform_compression};
use mortex::bench::{write_domains_vtk, BenchReport, Profile};
use mortex::model::{analyze, prepare, DualScheme, Kappa, Model, Prepared};
use mortex::xfem::write_cuts_vtk;
use mortex::{Error, Vec2};

pub use config::{load_config, parse_config, Benchmark, RunConfig};

/// Environment variable overriding the output directory of configurations.
pub const OUT_ENV: &str = "MORTEX_OUT";
pub const DEFAULT_OUT: &str = "mortex-out";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Config { path: String, source: Error },
    #[error(transparent)]
    Run(#[from] Error),
}

impl CliError {
    /// 2 for bad input, 3 for geometric failures, 4 for solver failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Run(e) if e.is_geometric() => 3,
            CliError::Run(e) if e.is_solver() => 4,
            CliError::Run(Error::Io(_)) => 1,
            CliError::Run(_) => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Command-line flag, then the environment, then the configuration.
pub fn output_dir(flag: Option<&Path>, config: Option<&Path>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Some(p) = std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()) {
        return PathBuf::from(p);
    }
    config.map_or_else(|| PathBuf::from(DEFAULT_OUT), Path::to_path_buf)
}

/// Prints the metrics of a report, one per line.
pub fn print_report(r: &BenchReport) {
    println!("{}", r.name);
    for (k, v) in &r.metrics {
        println!("  {k} = {v:.6e}");
    }
}

fn written(paths: &[PathBuf]) {
    for p in paths {
        log::info!("wrote {}", p.display());
    }
}

/// Centroid of the mortar nodes of a tying.
fn chain_center(prepared: &Prepared, tying: usize) -> Vec2 {
    let c = &prepared.tyings[tying].interface.chain.coords;
    c.iter().sum::<Vec2>() / c.len() as f64
}

fn stem_of(path: &Path) -> String {
    path.file_stem().map_or_else(|| "run".into(), |s| s.to_string_lossy().into_owned())
}

/// Solves a model configuration and writes the interface profiles, the
/// metrics and one VTK file per domain.
pub fn run_model(name: &str, cfg: &RunConfig, out: &Path, dump_cuts: bool) -> CliResult<BenchReport> {
    let model = cfg.build_model()?;
    let analysis = analyze(&model)?;
    let mut report = BenchReport::new(name);
    report.config("triangulate", model.triangulate);
    for t in &cfg.tyings {
        report.config(&format!("{}_dual", t.name), t.dual);
        report.config(&format!("{}_kappa", t.name), t.kappa);
    }
    let (f, r) = analysis.resultants();
    report.metric("unknowns", analysis.solution.n_unknowns as f64);
    report.metric("residual", analysis.solution.residual);
    report.metric("load_x", f.x);
    report.metric("load_y", f.y);
    report.metric("reaction_x", r.x);
    report.metric("reaction_y", r.y);
    for (k, t) in cfg.tyings.iter().enumerate() {
        let ts = &analysis.prepared.tyings[k];
        report.metric(&format!("{}_segments", t.name), ts.n_segments() as f64);
        if let Some(c) = &ts.contrast {
            report.metric(&format!("{}_m_c", t.name), c.global);
        }
        if let Some(kappa) = ts.kappa {
            report.metric(&format!("{}_kappa", t.name), kappa as f64);
        }
        let records = analysis.traction_profile(&model, k, chain_center(&analysis.prepared, k))?;
        report.profiles.push(Profile { name: t.name.clone(), records, extra: Vec::new() });
    }
    let mut paths = report.write(out)?;
    paths.extend(write_domains_vtk(out, name, &model, &analysis)?);
    if dump_cuts {
        paths.extend(write_cuts(out, name, &model, &analysis.prepared)?);
    }
    written(&paths);
    Ok(report)
}

/// One legacy-VTK polygon file per domain hosting a tying.
pub fn write_cuts(out: &Path, stem: &str, model: &Model, prepared: &Prepared) -> CliResult<Vec<PathBuf>> {
    std::fs::create_dir_all(out).map_err(Error::from)?;
    let mut paths = Vec::new();
    for (d, dom) in model.domains.iter().enumerate() {
        if !model.tyings.iter().any(|t| t.host == d) {
            continue;
        }
        let p = out.join(format!("{stem}_{}_cuts.vtk", dom.name));
        let dc = &prepared.cuts[d];
        write_cuts_vtk(BufWriter::new(File::create(&p).map_err(Error::from)?), &dc.mesh, &dc.cut)?;
        paths.push(p);
    }
    Ok(paths)
}

fn example_configs(kappa: Option<usize>, triangulate: bool) -> (PlateConfig, MultiLevelConfig) {
    let mut plate = PlateConfig { triangulate, ..Default::default() };
    let mut multi = MultiLevelConfig { triangulate, ..Default::default() };
    if let Some(k) = kappa {
        plate.cgi_kappa = k;
        multi.cgi_kappa = k;
    }
    (plate, multi)
}

/// Runs a built-in benchmark and writes its artifacts.
pub fn run_benchmark(b: &Benchmark, out: &Path) -> CliResult<Vec<BenchReport>> {
    let mut reports = Vec::new();
    match b {
        Benchmark::PatchTest(c) => {
            let run = run_patch_test(c)?;
            written(&run.write(out)?);
            reports.push(run.report);
        }
        Benchmark::UniformCompression(c) => {
            let run = run_uniform_compression(c)?;
            written(&run.write(out)?);
            reports.push(run.report);
        }
        Benchmark::Eshelby(c) => {
            let run = run_eshelby(c)?;
            written(&run.write(out)?);
            reports.push(run.report);
        }
        Benchmark::Table { case, contrasts } => {
            for &contrast in contrasts {
                let rows = run_table(*case, contrast)?;
                let mut r = BenchReport::new(format!("table_case{case}_contrast{contrast:e}"));
                r.config("case", case);
                r.config("contrast", contrast);
                for row in &rows {
                    let label = format!(
                        "{}{}_{}",
                        row.host,
                        if row.triangulate { "_tri" } else { "" },
                        if row.scheme == DualScheme::Cgi { format!("cgi_k{}", row.kappa) } else { row.scheme.to_string() }
                    );
                    r.metric(&format!("{label}_bending"), row.bending);
                    r.metric(&format!("{label}_compression"), row.compression);
                }
                written(&r.write(out)?);
                reports.push(r);
            }
        }
        Benchmark::Convergence { base, n_ms } => {
            let points = convergence(base, n_ms)?;
            let name = format!("eshelby_convergence_{}{}", base.scheme, kappa_tag(base.scheme, base.kappa));
            std::fs::create_dir_all(out).map_err(Error::from)?;
            let csv = out.join(format!("{name}.csv"));
            write_convergence_csv(&csv, &points)?;
            let mut r = BenchReport::new(name);
            for p in &points {
                r.metric(&format!("E_r_nm{}", p.n_m), p.e_r);
            }
            r.metric("slope", convergence_slope(&points)?);
            let mut paths = r.write(out)?;
            paths.push(csv);
            written(&paths);
            reports.push(r);
        }
        Benchmark::KappaSweep { base, kappas } => {
            let points = kappa_sweep(base, kappas)?;
            let name = format!("eshelby_kappa_sweep_nm{}", base.n_m);
            std::fs::create_dir_all(out).map_err(Error::from)?;
            let csv = out.join(format!("{name}.csv"));
            write_convergence_csv(&csv, &points)?;
            let mut r = BenchReport::new(name);
            for (k, p) in kappas.iter().zip(&points) {
                r.metric(&format!("E_r_k{k}"), p.e_r);
            }
            let mut paths = r.write(out)?;
            paths.push(csv);
            written(&paths);
            reports.push(r);
        }
        Benchmark::Example { name, kappa, triangulate } => {
            let (plate, multi) = example_configs(*kappa, *triangulate);
            let r = match name {
                ExampleName::PlateWithHole => run_plate_with_hole(&plate)?,
                ExampleName::MultiLevel => run_multi_level(&multi)?,
            };
            written(&r.write(out)?);
            reports.push(r);
        }
    }
    Ok(reports)
}

fn kappa_tag(scheme: DualScheme, kappa: Kappa) -> String {
    if scheme == DualScheme::Cgi {
        format!("_k{kappa}")
    } else {
        String::new()
    }
}

/// Model of a benchmark for geometry inspection; sweeps and tables have none.
pub fn benchmark_model(b: &Benchmark) -> CliResult<(String, Model)> {
    Ok(match b {
        Benchmark::PatchTest(c) => (c.label(), build_patch_model(c)?),
        Benchmark::UniformCompression(c) => ("uniform_compression".into(), build_uniform_compression(c)?),
        Benchmark::Eshelby(c) => (c.label(), build_eshelby_model(c)?.0),
        Benchmark::Example { name, kappa, triangulate } => {
            let (plate, multi) = example_configs(*kappa, *triangulate);
            let model = match name {
                ExampleName::PlateWithHole => build_plate_model(&plate, DualScheme::Cgi, Kappa::Fixed(plate.cgi_kappa))?,
                ExampleName::MultiLevel => build_multi_level_model(&multi, DualScheme::Cgi, Kappa::Fixed(multi.cgi_kappa))?,
            };
            (name.to_string(), model)
        }
        Benchmark::Table { .. } | Benchmark::Convergence { .. } | Benchmark::KappaSweep { .. } => {
            return Err(Error::InvalidArgument("cut geometry is only available for single-model configurations".into()).into())
        }
    })
}

/// Cuts the host domains of a configuration and writes the cut geometry
/// without solving.
pub fn dump_cuts(config: &Path, cfg: &RunConfig, out: &Path) -> CliResult<Vec<PathBuf>> {
    let (name, model) = match &cfg.benchmark {
        Some(b) => benchmark_model(b)?,
        None => (stem_of(config), cfg.build_model()?),
    };
    let prepared = prepare(&model)?;
    let paths = write_cuts(out, &name, &model, &prepared)?;
    written(&paths);
    Ok(paths)
}

/// Loads a configuration, attributing parse failures to the file.
pub fn read_config(path: &Path) -> CliResult<RunConfig> {
    load_config(path).map_err(|source| CliError::Config { path: path.display().to_string(), source })
}

/// Runs a configuration file: a model or a built-in benchmark.
pub fn run_config(path: &Path, cfg: &RunConfig, out: &Path, dump: bool) -> CliResult<Vec<BenchReport>> {
    match &cfg.benchmark {
        Some(b) => {
            let reports = run_benchmark(b, out)?;
            if dump && !matches!(b, Benchmark::Table { .. } | Benchmark::Convergence { .. } | Benchmark::KappaSweep { .. }) {
                dump_cuts(path, cfg, out)?;
            }
            Ok(reports)
        }
        None => Ok(vec![run_model(&stem_of(path), cfg, out, dump)?]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_error_kind() {
        let cfg = CliError::Config { path: "a.cfg".into(), source: Error::Parse { line: 3, msg: "x".into() } };
        assert_eq!(cfg.exit_code(), 2);
        assert_eq!(CliError::from(Error::InvalidGeometry("x".into())).exit_code(), 3);
        assert_eq!(CliError::from(Error::OutsideElement { element: 0, x: 0.0, y: 0.0 }).exit_code(), 3);
        assert_eq!(CliError::from(Error::SingularSystem("x".into())).exit_code(), 4);
        assert_eq!(CliError::from(Error::KappaOutOfRange { kappa: 9, max: 3 }).exit_code(), 2);
        assert!(cfg.to_string().starts_with("a.cfg: parse error at line 3"));
    }

    #[test]
    fn flag_wins_over_config_directory() {
        let flag = PathBuf::from("flag");
        assert_eq!(output_dir(Some(&flag), Some(Path::new("cfg"))), flag);
    }
}
