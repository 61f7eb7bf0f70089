//! Circular inclusion in a large plate under uniaxial tension: the inclusion
//! is a boundary-fitted disk mesh tied into a graded square host grid.

use std::f64::consts::PI;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;
use std::time::Instant;

use crate::bench::eshelby::EshelbyParams;
use crate::bench::{error_norm, loglog_slope, BenchReport, Profile, Run};
use crate::cgi::compute_mesh_contrast;
use crate::elasticity::Material;
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::mesh::{generate_disk_mesh, generate_tensor_mesh, geometric_spacing, ElementKind, Mesh};
use crate::model::{analyze, cut_domain, Bc, Domain, DualScheme, Kappa, Model, Tying};
use crate::mortar::{build_segments, element_index, MortarChain};
use crate::output::{csv_err, fmt_float};

#[derive(Debug, Clone, PartialEq)]
pub struct EshelbyConfig {
    /// Mortar edges on the inclusion boundary.
    pub n_m: usize,
    /// Targeted segments per blending host element.
    pub mc_target: f64,
    pub scheme: DualScheme,
    pub kappa: Kappa,
    pub triangulate: bool,
    pub radius: f64,
    /// Side of the square host.
    pub length: f64,
    pub e_inclusion: f64,
    /// Inclusion over matrix Young's modulus.
    pub contrast: f64,
    pub nu: f64,
    pub sigma0: f64,
    /// Growth factor of the host grid away from the inclusion.
    pub growth: f64,
    pub h_max: f64,
}

impl EshelbyConfig {
    pub fn new(n_m: usize) -> Self {
        EshelbyConfig {
            n_m,
            mc_target: 6.0,
            scheme: DualScheme::SliP1,
            kappa: Kappa::Auto,
            triangulate: false,
            radius: 0.1,
            length: 10.0,
            e_inclusion: 1000.0,
            contrast: 1000.0,
            nu: 0.3,
            sigma0: 0.1,
            growth: 1.15,
            h_max: 0.5,
        }
    }

    pub fn with_scheme(mut self, scheme: DualScheme, kappa: Kappa) -> Self {
        self.scheme = scheme;
        self.kappa = kappa;
        self
    }

    pub fn params(&self) -> EshelbyParams {
        EshelbyParams {
            radius: self.radius,
            sigma0: self.sigma0,
            inclusion: Material::plane_strain(self.e_inclusion, self.nu),
            matrix: Material::plane_strain(self.e_inclusion / self.contrast, self.nu),
        }
    }

    pub fn label(&self) -> String {
        format!(
            "eshelby_nm{}_{}{}{}",
            self.n_m,
            self.scheme,
            if self.scheme == DualScheme::Cgi {
                format!("_k{}", self.kappa)
            } else {
                String::new()
            },
            if self.triangulate { "_tri" } else { "" }
        )
    }
}

/// Square grid over `[-L/2, L/2]^2`, uniform with spacing `h` around the
/// inclusion and graded outwards.
pub fn graded_host(cfg: &EshelbyConfig, h: f64) -> Result<Mesh> {
    let half = 0.5 * cfg.length;
    let n = ((2.6 * cfg.radius) / h).ceil() as usize + 1;
    // off-centre so that no grid line runs through the inclusion centre
    let fa = -1.3 * cfg.radius - 0.371 * h;
    let fb = fa + n as f64 * h;
    if fb >= half || fa <= -half {
        return Err(Error::InvalidGeometry(
            "refinement zone exceeds the host".into(),
        ));
    }
    let lines = geometric_spacing(-half, half, fa, fb, h, cfg.growth, cfg.h_max);
    generate_tensor_mesh(&lines, &lines, ElementKind::Q4)
}

/// Global mesh contrast of a patch chain over a host.
pub fn mesh_contrast(host: &Mesh, patch: &Mesh, chain: &str, triangulate: bool) -> Result<f64> {
    let p = patch.polyline(chain)?;
    let dc = cut_domain(host, vec![patch.polyline_coords(p)], triangulate)?;
    let chain = MortarChain::from_polyline(patch, p);
    let segs = build_segments(
        &chain,
        &dc.mesh,
        &dc.cut.classes,
        &dc.indicator,
        &element_index(&dc.mesh),
    )?;
    Ok(compute_mesh_contrast(&segs, &dc.cut.classes)?.global)
}

/// Host grid whose contrast with the disk is within 5 % of the target
/// (10 % if the iteration stalls); returns the mesh, spacing and contrast.
pub fn calibrated_host(cfg: &EshelbyConfig, disk: &Mesh) -> Result<(Mesh, f64, f64)> {
    if !(cfg.mc_target > 1.0) {
        return Err(Error::InvalidArgument(format!(
            "contrast target must exceed 1, got {}",
            cfg.mc_target
        )));
    }
    // a circle of radius R crosses about 8 R / h grid cells
    let mut h = 8.0 * cfg.radius * (cfg.mc_target - 1.0) / cfg.n_m as f64;
    let mut best: Option<(Mesh, f64, f64)> = None;
    for _ in 0..8 {
        let host = graded_host(cfg, h)?;
        let mc = mesh_contrast(&host, disk, "boundary", false)?;
        let dev = (mc / cfg.mc_target - 1.0).abs();
        let better = best
            .as_ref()
            .map_or(true, |b| dev < (b.2 / cfg.mc_target - 1.0).abs());
        if better {
            best = Some((host, h, mc));
        }
        if dev < 0.05 {
            break;
        }
        h *= (cfg.mc_target - 1.0) / (mc - 1.0);
    }
    let best = best.expect("at least one host");
    if (best.2 / cfg.mc_target - 1.0).abs() > 0.1 {
        return Err(Error::InvalidGeometry(format!(
            "could not reach mesh contrast {} (got {:.3})",
            cfg.mc_target, best.2
        )));
    }
    Ok(best)
}

pub fn build_eshelby_model(cfg: &EshelbyConfig) -> Result<(Model, f64)> {
    let disk = generate_disk_mesh(cfg.radius, cfg.n_m)?;
    let (host, h, _) = calibrated_host(cfg, &disk)?;
    let p = cfg.params();
    let model = Model {
        domains: vec![
            Domain::new("matrix", host, p.matrix),
            Domain::new("inclusion", disk, p.inclusion),
        ],
        tyings: vec![Tying {
            patch: 1,
            host: 0,
            chain: "boundary".into(),
            footprint: None,
            scheme: cfg.scheme,
            kappa: cfg.kappa,
        }],
        bcs: vec![
            Bc::Pressure {
                domain: 0,
                polyline: "right".into(),
                p: -cfg.sigma0,
            },
            Bc::Displacement {
                domain: 0,
                target: "left".into(),
                component: 0,
                value: 0.0,
            },
            Bc::Displacement {
                domain: 0,
                target: "corner_ll".into(),
                component: 1,
                value: 0.0,
            },
        ],
        triangulate: cfg.triangulate,
    };
    Ok((model, h))
}

pub fn run_eshelby(cfg: &EshelbyConfig) -> Result<Run> {
    let start = Instant::now();
    let (model, h) = build_eshelby_model(cfg)?;
    let analysis = analyze(&model)?;
    let records = analysis.traction_profile(&model, 0, Vec2::zeros())?;
    let params = cfg.params();
    let theta: Vec<f64> = records.iter().map(|r| r.x.y.atan2(r.x.x)).collect();
    let srr: Vec<f64> = theta.iter().map(|&t| params.interior_stress(t).0).collect();
    // right half of the interface, theta in [-pi/2, pi/2]
    let half: Vec<usize> = (0..records.len())
        .filter(|&i| theta[i].abs() <= 0.5 * PI + 1e-12)
        .collect();
    let lam: Vec<f64> = half.iter().map(|&i| records[i].radial).collect();
    let reference: Vec<f64> = half.iter().map(|&i| srr[i]).collect();

    let ts = &analysis.prepared.tyings[0];
    let mut report = BenchReport::new(cfg.label());
    report.config("n_m", cfg.n_m);
    report.config("mc_target", cfg.mc_target);
    report.config("scheme", cfg.scheme);
    report.config("kappa", cfg.kappa);
    report.config("triangulate", cfg.triangulate);
    report.config("contrast", cfg.contrast);
    report.metric("E_r", error_norm(&lam, &reference)?);
    report.metric("h_norm", 1.0 / cfg.n_m as f64);
    report.metric("h_host", h);
    report.metric("segments", ts.n_segments() as f64);
    if let Some(c) = &ts.contrast {
        report.metric("m_c", c.global);
    }
    if let Some(k) = ts.kappa {
        report.metric("kappa_used", k as f64);
    }
    report.metric("unknowns", analysis.solution.n_unknowns as f64);
    report.metric("residual", analysis.solution.residual);
    report.profiles.push(Profile {
        name: "interface".into(),
        records,
        extra: vec![("theta".into(), theta), ("srr_ref".into(), srr)],
    });
    report.runtime = start.elapsed().as_secs_f64();
    Ok(Run {
        report,
        model,
        analysis,
    })
}

/// One point of a convergence or coarse-graining sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub n_m: usize,
    pub e_r: f64,
    pub m_c: f64,
    pub scheme: DualScheme,
    pub kappa: Option<usize>,
    pub triangulate: bool,
}

fn sweep_point(cfg: &EshelbyConfig) -> Result<SweepPoint> {
    let run = run_eshelby(cfg)?;
    let r = &run.report;
    Ok(SweepPoint {
        n_m: cfg.n_m,
        e_r: r.get("E_r").expect("E_r reported"),
        m_c: r.get("m_c").unwrap_or(f64::NAN),
        scheme: cfg.scheme,
        kappa: r.get("kappa_used").map(|k| k as usize),
        triangulate: cfg.triangulate,
    })
}

/// Error against interface resolution for a fixed scheme.
pub fn convergence(base: &EshelbyConfig, n_ms: &[usize]) -> Result<Vec<SweepPoint>> {
    use rayon::prelude::*;
    n_ms.par_iter()
        .map(|&n_m| {
            sweep_point(&EshelbyConfig {
                n_m,
                ..base.clone()
            })
        })
        .collect()
}

/// Error against the coarse-graining parameter at fixed resolution.
pub fn kappa_sweep(base: &EshelbyConfig, kappas: &[usize]) -> Result<Vec<SweepPoint>> {
    use rayon::prelude::*;
    kappas
        .par_iter()
        .map(|&k| sweep_point(&base.clone().with_scheme(DualScheme::Cgi, Kappa::Fixed(k))))
        .collect()
}

/// Fitted slope of `log E_r` against `log(1/N_m)`.
pub fn convergence_slope(points: &[SweepPoint]) -> Result<f64> {
    let h: Vec<f64> = points.iter().map(|p| 1.0 / p.n_m as f64).collect();
    let e: Vec<f64> = points.iter().map(|p| p.e_r).collect();
    loglog_slope(&h, &e)
}

/// Columns `N_m,h_norm,E_r,scheme,kappa,triangulated` (`kappa` empty for SLI).
pub fn write_convergence_csv(path: &Path, points: &[SweepPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    w.write_record(["N_m", "h_norm", "E_r", "scheme", "kappa", "triangulated"])
        .map_err(csv_err)?;
    for p in points {
        w.write_record([
            p.n_m.to_string(),
            fmt_float(1.0 / p.n_m as f64),
            fmt_float(p.e_r),
            p.scheme.to_string(),
            p.kappa.map_or(String::new(), |k| k.to_string()),
            p.triangulate.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
