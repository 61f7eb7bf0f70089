//! Overlapping-block patch tests: a stiff patch tied on top of a host block,
//! under uniform compression or linear bending pressure, and the small
//! uniform-compression setup that exposes host interpolation along the
//! embedded interface.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::bench::{error_norm, BenchReport, Profile, Run};
use crate::elasticity::Material;
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::mesh::{generate_structured_mesh, Distortion, ElementKind, Mesh, Rect};
use crate::model::{analyze, Bc, Domain, DualScheme, Kappa, Model, Tying};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PatchCase {
    /// Case 1: patch finer than the host.
    FinerPatch,
    /// Case 2: patch coarser than the host.
    CoarserPatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PatchLoad {
    Compression,
    Bending,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HostMesh {
    Triangles,
    AlignedQuads,
    DistortedQuads,
}

impl fmt::Display for PatchCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PatchCase::FinerPatch => "1",
            PatchCase::CoarserPatch => "2",
        })
    }
}

impl FromStr for PatchCase {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" => Ok(PatchCase::FinerPatch),
            "2" => Ok(PatchCase::CoarserPatch),
            _ => Err(Error::InvalidArgument(format!(
                "patch-test case must be 1 or 2, got '{s}'"
            ))),
        }
    }
}

impl fmt::Display for PatchLoad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PatchLoad::Compression => "compression",
            PatchLoad::Bending => "bending",
        })
    }
}

impl FromStr for PatchLoad {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "compression" => Ok(PatchLoad::Compression),
            "bending" => Ok(PatchLoad::Bending),
            _ => Err(Error::InvalidArgument(format!(
                "load must be compression or bending, got '{s}'"
            ))),
        }
    }
}

impl fmt::Display for HostMesh {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HostMesh::Triangles => "triangles",
            HostMesh::AlignedQuads => "aligned",
            HostMesh::DistortedQuads => "distorted",
        })
    }
}

impl FromStr for HostMesh {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "triangles" => Ok(HostMesh::Triangles),
            "aligned" => Ok(HostMesh::AlignedQuads),
            "distorted" => Ok(HostMesh::DistortedQuads),
            _ => Err(Error::InvalidArgument(format!(
                "host mesh must be triangles, aligned or distorted, got '{s}'"
            ))),
        }
    }
}

/// Block dimensions: patch height `h1`, host height `h2`, overlap `h_star`,
/// common width `l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchGeometry {
    pub h1: f64,
    pub h2: f64,
    pub h_star: f64,
    pub l: f64,
}

impl Default for PatchGeometry {
    fn default() -> Self {
        PatchGeometry {
            h1: 1.0,
            h2: 1.25,
            h_star: 0.25,
            l: 5.0,
        }
    }
}

impl PatchGeometry {
    /// Height of the tying line.
    pub fn interface_y(&self) -> f64 {
        self.h2 - self.h_star
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatchTestConfig {
    pub case: PatchCase,
    pub load: PatchLoad,
    pub host: HostMesh,
    pub scheme: DualScheme,
    pub kappa: Kappa,
    pub triangulate: bool,
    /// Patch over host Young's modulus.
    pub contrast: f64,
    /// Patch Young's modulus (MPa).
    pub e_patch: f64,
    pub nu: f64,
    pub sigma0: f64,
    pub seed: u64,
    /// Jitter of interior host nodes relative to the host element size.
    pub jitter: f64,
    pub geometry: PatchGeometry,
}

impl PatchTestConfig {
    pub fn new(case: PatchCase, load: PatchLoad) -> Self {
        PatchTestConfig {
            case,
            load,
            host: HostMesh::DistortedQuads,
            scheme: DualScheme::SliP1,
            kappa: Kappa::Auto,
            triangulate: false,
            contrast: 1000.0,
            e_patch: 1000.0,
            nu: 0.3,
            sigma0: 1.0,
            seed: 7,
            jitter: 0.2,
            geometry: PatchGeometry::default(),
        }
    }

    pub fn with_scheme(mut self, scheme: DualScheme, kappa: Kappa) -> Self {
        self.scheme = scheme;
        self.kappa = kappa;
        self
    }

    /// Element counts `(patch nx, patch ny, host nx, host ny)`.
    pub fn divisions(&self) -> (usize, usize, usize, usize) {
        match self.case {
            PatchCase::FinerPatch => (191, 38, 17, 4),
            PatchCase::CoarserPatch => (35, 7, 350, 88),
        }
    }

    pub fn label(&self) -> String {
        format!(
            "patch_case{}_{}_{}_{}{}{}",
            self.case,
            self.load,
            self.host,
            self.scheme,
            if self.scheme == DualScheme::Cgi {
                format!("_k{}", self.kappa)
            } else {
                String::new()
            },
            if self.triangulate { "_tri" } else { "" }
        )
    }

    /// Reference vertical stress on the tying line.
    pub fn reference_syy(&self, x: f64) -> f64 {
        match self.load {
            PatchLoad::Compression => -self.sigma0,
            PatchLoad::Bending => 2.0 * self.sigma0 * (x / self.geometry.l - 0.5),
        }
    }
}

const HOST: usize = 0;
const PATCH: usize = 1;

pub fn build_patch_model(cfg: &PatchTestConfig) -> Result<Model> {
    let g = cfg.geometry;
    if !(g.h1 > 0.0 && g.h2 > g.h_star && g.h_star > 0.0 && g.l > 0.0) {
        return Err(Error::InvalidGeometry(format!(
            "invalid patch-test geometry {g:?}"
        )));
    }
    if !(cfg.contrast > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "material contrast must be positive, got {}",
            cfg.contrast
        )));
    }
    let (pnx, pny, hnx, hny) = cfg.divisions();
    let y0 = g.interface_y();
    let patch = generate_structured_mesh(
        Rect::new(0.0, y0, g.l, y0 + g.h1),
        pnx,
        pny,
        ElementKind::Q4,
        None,
    )?;
    let host_rect = Rect::new(0.0, 0.0, g.l, g.h2);
    let host = match cfg.host {
        HostMesh::Triangles => {
            generate_structured_mesh(host_rect, hnx, hny, ElementKind::T3, None)?
        }
        HostMesh::AlignedQuads => {
            generate_structured_mesh(host_rect, hnx, hny, ElementKind::Q4, None)?
        }
        HostMesh::DistortedQuads => {
            let h = (g.l / hnx as f64).min(g.h2 / hny as f64);
            let d = Distortion {
                seed: cfg.seed,
                amplitude: cfg.jitter * h,
            };
            generate_structured_mesh(host_rect, hnx, hny, ElementKind::Q4, Some(d))?
        }
    };
    let e_host = cfg.e_patch / cfg.contrast;
    let mut model = Model {
        domains: vec![
            Domain::new("host", host, Material::plane_strain(e_host, cfg.nu)),
            Domain::new("patch", patch, Material::plane_strain(cfg.e_patch, cfg.nu)),
        ],
        tyings: vec![Tying {
            patch: PATCH,
            host: HOST,
            chain: "bottom".into(),
            footprint: Some("boundary".into()),
            scheme: cfg.scheme,
            kappa: cfg.kappa,
        }],
        bcs: Vec::new(),
        triangulate: cfg.triangulate,
    };
    let disp = |domain: usize, target: &str, component: usize| Bc::Displacement {
        domain,
        target: target.into(),
        component,
        value: 0.0,
    };
    match cfg.load {
        PatchLoad::Compression => {
            model.bcs.extend([
                disp(HOST, "bottom", 0),
                disp(HOST, "bottom", 1),
                disp(HOST, "left", 0),
                disp(HOST, "right", 0),
                disp(PATCH, "left", 0),
                disp(PATCH, "right", 0),
            ]);
            model.bcs.push(Bc::Pressure {
                domain: PATCH,
                polyline: "top".into(),
                p: cfg.sigma0,
            });
        }
        PatchLoad::Bending => {
            model
                .bcs
                .extend([disp(PATCH, "top", 1), disp(PATCH, "corner_ul", 0)]);
            // traction p on the bottom face gives syy = -p there
            model.bcs.push(Bc::LinearPressure {
                domain: HOST,
                polyline: "bottom".into(),
                a: cfg.sigma0,
                bx: -2.0 * cfg.sigma0 / g.l,
                by: 0.0,
            });
        }
    }
    Ok(model)
}

/// Interface profile of the single tying of a two-domain model together with
/// the reference `syy` column.
fn interface_profile(
    model: &Model,
    run: &crate::model::Analysis,
    center: Vec2,
    reference: impl Fn(&Vec2) -> f64,
) -> Result<Profile> {
    let records = run.traction_profile(model, 0, center)?;
    let refs = records.iter().map(|r| reference(&r.x)).collect();
    Ok(Profile {
        name: "interface".into(),
        records,
        extra: vec![("syy_ref".into(), refs)],
    })
}

pub fn run_patch_test(cfg: &PatchTestConfig) -> Result<Run> {
    let start = Instant::now();
    let model = build_patch_model(cfg)?;
    let analysis = analyze(&model)?;
    let g = cfg.geometry;
    let profile = interface_profile(&model, &analysis, Vec2::new(0.5 * g.l, -g.h2), |x| {
        cfg.reference_syy(x.x)
    })?;
    let syy: Vec<f64> = profile.records.iter().map(|r| r.sigma[1]).collect();
    let refs = &profile.extra[0].1;
    // multiplier traction acting on the patch bottom is -syy
    let ty: Vec<f64> = profile.records.iter().map(|r| -r.traction.y).collect();

    let mut report = BenchReport::new(cfg.label());
    report.config("case", cfg.case);
    report.config("load", cfg.load);
    report.config("host", cfg.host);
    report.config("scheme", cfg.scheme);
    report.config("kappa", cfg.kappa);
    report.config("triangulate", cfg.triangulate);
    report.config("contrast", cfg.contrast);
    report.config("seed", cfg.seed);
    let ts = &analysis.prepared.tyings[0];
    report.metric("E_r", error_norm(&syy, refs)?);
    report.metric("E_r_lambda", error_norm(&ty, refs)?);
    let max_dev = syy
        .iter()
        .zip(refs)
        .map(|(s, r)| (s - r).abs())
        .fold(0.0, f64::max)
        / cfg.sigma0;
    report.metric("max_rel_dev", max_dev);
    report.metric("N_m", ts.interface.chain.n_edges() as f64);
    report.metric("segments", ts.n_segments() as f64);
    if let Some(c) = &ts.contrast {
        report.metric("m_c", c.global);
        report.metric("blending", c.local.len() as f64);
    }
    if let Some(k) = ts.kappa {
        report.metric("kappa_used", k as f64);
    }
    report.metric("unknowns", analysis.solution.n_unknowns as f64);
    report.metric("residual", analysis.solution.residual);
    report.profiles.push(profile);
    report.runtime = start.elapsed().as_secs_f64();
    Ok(Run {
        report,
        model,
        analysis,
    })
}

/// Uniform compression of a patch block tied to a three-element host whose
/// quadrilaterals are arranged so that one of them (the right one) is crossed
/// by the tying line with both parent coordinates varying.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformCompressionConfig {
    pub triangulate: bool,
    pub scheme: DualScheme,
    pub e: f64,
    pub nu: f64,
    pub sigma0: f64,
    /// Patch elements along x and y.
    pub patch_nx: usize,
    pub patch_ny: usize,
}

impl Default for UniformCompressionConfig {
    fn default() -> Self {
        UniformCompressionConfig {
            triangulate: false,
            scheme: DualScheme::SliP1,
            e: 1000.0,
            nu: 0.0,
            sigma0: 1.0,
            patch_nx: 6,
            patch_ny: 4,
        }
    }
}

/// Host of one triangle and two quadrilaterals over `[0, 1.5] x [0, 1.25..1.75]`.
pub fn three_element_host() -> Result<Mesh> {
    let p = |x: f64, y: f64| Vec2::new(x, y);
    // A B C D E G H
    let coords = vec![
        p(0.0, 0.0),
        p(0.5, 0.0),
        p(1.0, 0.0),
        p(1.5, 0.0),
        p(0.0, 1.25),
        p(1.0, 1.25),
        p(1.5, 1.75),
    ];
    let elements = vec![
        (ElementKind::T3, vec![0, 1, 4]),
        (ElementKind::Q4, vec![1, 2, 5, 4]),
        (ElementKind::Q4, vec![2, 3, 6, 5]),
    ];
    let mut mesh = Mesh::from_parts(coords, elements)?;
    mesh.node_sets.insert("bottom".into(), vec![0, 1, 2, 3]);
    mesh.polylines.insert(
        "bottom".into(),
        crate::mesh::Polyline::open(vec![0, 1, 2, 3]),
    );
    Ok(mesh)
}

pub fn build_uniform_compression(cfg: &UniformCompressionConfig) -> Result<Model> {
    let patch = generate_structured_mesh(
        Rect::new(0.0, 1.0, 1.5, 2.0),
        cfg.patch_nx,
        cfg.patch_ny,
        ElementKind::Q4,
        None,
    )?;
    let material = Material::plane_strain(cfg.e, cfg.nu);
    let zero = |target: &str, component: usize| Bc::Displacement {
        domain: 0,
        target: target.into(),
        component,
        value: 0.0,
    };
    Ok(Model {
        domains: vec![
            Domain::new("host", three_element_host()?, material),
            Domain::new("patch", patch, material),
        ],
        tyings: vec![Tying {
            patch: 1,
            host: 0,
            chain: "bottom".into(),
            footprint: Some("boundary".into()),
            scheme: cfg.scheme,
            kappa: Kappa::Fixed(1),
        }],
        bcs: vec![
            zero("bottom", 0),
            zero("bottom", 1),
            Bc::Pressure {
                domain: 1,
                polyline: "top".into(),
                p: cfg.sigma0,
            },
        ],
        triangulate: cfg.triangulate,
    })
}

/// Reports the deviation of the interface displacement from `-sigma0 h / E`.
pub fn run_uniform_compression(cfg: &UniformCompressionConfig) -> Result<Run> {
    let start = Instant::now();
    let model = build_uniform_compression(cfg)?;
    let analysis = analyze(&model)?;
    // uniaxial strain in a host column of height 1 below the tying line
    let c = Material::plane_strain(cfg.e, cfg.nu).constitutive_matrix();
    let expected = -cfg.sigma0 * 1.0 / c[(1, 1)];
    let records = analysis.traction_profile(&model, 0, Vec2::new(0.75, -1.0))?;
    let uy: Vec<f64> = records
        .iter()
        .map(|r| analysis.solution.displacement[1][r.node].y)
        .collect();
    let dev = uy
        .iter()
        .map(|u| ((u - expected) / expected).abs())
        .fold(0.0, f64::max);
    let mut report = BenchReport::new(format!(
        "uniform_compression{}",
        if cfg.triangulate { "_tri" } else { "" }
    ));
    report.config("triangulate", cfg.triangulate);
    report.config("scheme", cfg.scheme);
    report.metric("uy_expected", expected);
    report.metric("uy_max_rel_dev", dev);
    report.metric("uy_min", uy.iter().copied().fold(f64::INFINITY, f64::min));
    report.metric(
        "uy_max",
        uy.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    );
    let n = records.len();
    report.profiles.push(Profile {
        name: "interface".into(),
        records,
        extra: vec![("uy".into(), uy), ("uy_ref".into(), vec![expected; n])],
    });
    report.runtime = start.elapsed().as_secs_f64();
    Ok(Run {
        report,
        model,
        analysis,
    })
}

/// Host variants of the summary tables: `(mesh, triangulate blending elements)`.
pub const TABLE_HOSTS: [(HostMesh, bool); 4] = [
    (HostMesh::Triangles, false),
    (HostMesh::AlignedQuads, false),
    (HostMesh::DistortedQuads, false),
    (HostMesh::DistortedQuads, true),
];

/// Multiplier schemes of the summary tables; coarse-graining spans the whole chain.
pub fn table_schemes(case: PatchCase) -> [(DualScheme, Kappa); 3] {
    let n_m = PatchTestConfig::new(case, PatchLoad::Compression)
        .divisions()
        .0;
    [
        (DualScheme::SliP0, Kappa::Auto),
        (DualScheme::SliP1, Kappa::Auto),
        (DualScheme::Cgi, Kappa::Fixed(n_m)),
    ]
}

/// One summary-table row: both load cases for a scheme and host variant.
#[derive(Debug, Clone)]
pub struct TableRow {
    pub case: PatchCase,
    pub contrast: f64,
    pub host: HostMesh,
    pub triangulate: bool,
    pub scheme: DualScheme,
    pub kappa: Kappa,
    pub bending: f64,
    pub compression: f64,
}

/// All scheme and host combinations for one case and material contrast.
pub fn run_table(case: PatchCase, contrast: f64) -> Result<Vec<TableRow>> {
    use rayon::prelude::*;
    let mut jobs = Vec::new();
    for (scheme, kappa) in table_schemes(case) {
        for (host, triangulate) in TABLE_HOSTS {
            jobs.push((scheme, kappa, host, triangulate));
        }
    }
    jobs.par_iter()
        .map(|&(scheme, kappa, host, triangulate)| {
            let err = |load| -> Result<f64> {
                let mut cfg = PatchTestConfig::new(case, load).with_scheme(scheme, kappa);
                cfg.host = host;
                cfg.triangulate = triangulate;
                cfg.contrast = contrast;
                let run = run_patch_test(&cfg)?;
                Ok(run.report.get("E_r").expect("patch test reports E_r"))
            };
            Ok(TableRow {
                case,
                contrast,
                host,
                triangulate,
                scheme,
                kappa,
                bending: err(PatchLoad::Bending)?,
                compression: err(PatchLoad::Compression)?,
            })
        })
        .collect()
}
