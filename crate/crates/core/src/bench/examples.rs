//! Larger demonstration problems: a perforated patch in a plate, and a patch
//! that itself hosts two stiff inclusions.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::bench::{max_jump, BenchReport, Profile};
use crate::elasticity::{full_integration_points, recover_nodal_stress, Material};
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::mesh::{
    generate_disk_mesh, generate_ring_mesh, generate_structured_mesh, square_loop, ElementKind,
    Mesh, Polyline, Rect,
};
use crate::model::{analyze, Analysis, Bc, Domain, DualScheme, Kappa, Model, Tying};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExampleName {
    PlateWithHole,
    MultiLevel,
}

impl fmt::Display for ExampleName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExampleName::PlateWithHole => "plate_with_hole",
            ExampleName::MultiLevel => "multi_level",
        })
    }
}

impl FromStr for ExampleName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plate_with_hole" | "plate-with-hole" => Ok(ExampleName::PlateWithHole),
            "multi_level" | "multi-level" => Ok(ExampleName::MultiLevel),
            _ => Err(Error::InvalidArgument(format!(
                "unknown example '{s}' (expected plate_with_hole or multi_level)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlateConfig {
    /// Side of the host plate.
    pub length: f64,
    /// Side of the square patch around the hole.
    pub patch_length: f64,
    pub radius: f64,
    pub host_divisions: usize,
    /// Patch boundary edges per side.
    pub patch_side: usize,
    /// Element rows between hole and patch boundary.
    pub patch_layers: usize,
    /// Element rows between patch boundary and plate edge (reference mesh).
    pub outer_layers: usize,
    pub e: f64,
    pub nu: f64,
    pub sigma0: f64,
    pub cgi_kappa: usize,
    pub triangulate: bool,
}

impl Default for PlateConfig {
    fn default() -> Self {
        PlateConfig {
            length: 12.0,
            patch_length: 4.5,
            radius: 0.75,
            host_divisions: 12,
            patch_side: 16,
            patch_layers: 10,
            outer_layers: 8,
            e: 1000.0,
            nu: 0.3,
            sigma0: 1.0,
            cgi_kappa: 3,
            triangulate: false,
        }
    }
}

/// Rings of the perforated patch and, optionally, the plate edge. The hole
/// nodes sit on the rays through the square nodes.
fn plate_rings(cfg: &PlateConfig, with_edge: bool) -> Vec<Vec<Vec2>> {
    let sq = square_loop(0.5 * cfg.patch_length, cfg.patch_side);
    let hole = sq.iter().map(|p| p * (cfg.radius / p.norm())).collect();
    let mut rings = vec![hole, sq];
    if with_edge {
        rings.push(square_loop(0.5 * cfg.length, cfg.patch_side));
    }
    rings
}

/// Boundary names of the square `ring` of a ring mesh: `left`, `right`
/// polylines and the `corner_ll` node.
fn name_square_sides(mesh: &mut Mesh, ring: &str, n_side: usize) -> Result<()> {
    let nodes = mesh.polyline(ring)?.nodes.clone();
    let right: Vec<usize> = (0..=n_side).map(|i| nodes[i]).collect();
    let left: Vec<usize> = (2 * n_side..=3 * n_side).map(|i| nodes[i]).collect();
    mesh.node_sets
        .insert("corner_ll".into(), vec![nodes[3 * n_side]]);
    mesh.node_sets.insert("left".into(), left.clone());
    mesh.node_sets.insert("right".into(), right.clone());
    mesh.polylines.insert("left".into(), Polyline::open(left));
    mesh.polylines.insert("right".into(), Polyline::open(right));
    Ok(())
}

/// Row thickening from the hole outwards.
const PATCH_GROWTH: f64 = 1.12;

pub fn plate_patch_mesh(cfg: &PlateConfig) -> Result<Mesh> {
    let mut m = generate_ring_mesh(
        &plate_rings(cfg, false),
        &[cfg.patch_layers],
        &[PATCH_GROWTH],
    )?;
    rename(&mut m, "ring0", "hole");
    rename(&mut m, "ring1", "boundary");
    Ok(m)
}

/// Single boundary-fitted mesh of the whole plate whose inner part is the
/// patch mesh, node for node.
pub fn plate_reference_mesh(cfg: &PlateConfig) -> Result<Mesh> {
    let mut m = generate_ring_mesh(
        &plate_rings(cfg, true),
        &[cfg.patch_layers, cfg.outer_layers],
        &[PATCH_GROWTH, 1.15],
    )?;
    rename(&mut m, "ring0", "hole");
    rename(&mut m, "ring1", "patch_boundary");
    rename(&mut m, "ring2", "boundary");
    name_square_sides(&mut m, "boundary", cfg.patch_side)?;
    Ok(m)
}

fn rename(mesh: &mut Mesh, from: &str, to: &str) {
    if let Some(p) = mesh.polylines.remove(from) {
        mesh.polylines.insert(to.into(), p);
    }
    if let Some(s) = mesh.node_sets.remove(from) {
        mesh.node_sets.insert(to.into(), s);
    }
}

fn plate_bcs(domain: usize, sigma0: f64) -> Vec<Bc> {
    vec![
        Bc::Pressure {
            domain,
            polyline: "right".into(),
            p: -sigma0,
        },
        Bc::Displacement {
            domain,
            target: "left".into(),
            component: 0,
            value: 0.0,
        },
        Bc::Displacement {
            domain,
            target: "corner_ll".into(),
            component: 1,
            value: 0.0,
        },
    ]
}

pub fn build_plate_model(cfg: &PlateConfig, scheme: DualScheme, kappa: Kappa) -> Result<Model> {
    let half = 0.5 * cfg.length;
    let n = cfg.host_divisions;
    let host = generate_structured_mesh(
        Rect::new(-half, -half, half, half),
        n,
        n,
        ElementKind::Q4,
        None,
    )?;
    let mat = Material::plane_strain(cfg.e, cfg.nu);
    Ok(Model {
        domains: vec![
            Domain::new("plate", host, mat),
            Domain::new("patch", plate_patch_mesh(cfg)?, mat),
        ],
        tyings: vec![Tying {
            patch: 1,
            host: 0,
            chain: "boundary".into(),
            footprint: None,
            scheme,
            kappa,
        }],
        bcs: plate_bcs(0, cfg.sigma0),
        triangulate: cfg.triangulate,
    })
}

pub fn build_plate_reference(cfg: &PlateConfig) -> Result<Model> {
    let mat = Material::plane_strain(cfg.e, cfg.nu);
    Ok(Model {
        domains: vec![Domain::new("plate", plate_reference_mesh(cfg)?, mat)],
        tyings: vec![],
        bcs: plate_bcs(0, cfg.sigma0),
        triangulate: false,
    })
}

/// Nodal `sigma_xx` of the reference solution on the patch boundary nodes,
/// recovered from the elements of the patch zone only so that it is
/// extrapolated the same way as in the tied patch.
fn reference_boundary_sxx(
    cfg: &PlateConfig,
    patch: &Mesh,
    reference: &Analysis,
) -> Result<Vec<f64>> {
    let u = &reference.solution.displacement[0][..patch.n_nodes()];
    let points = (0..patch.n_elements())
        .map(|e| {
            full_integration_points(patch.elements[e].kind, &patch.element_coords(e), e).map(Some)
        })
        .collect::<Result<Vec<_>>>()?;
    let s = recover_nodal_stress(patch, u, &Material::plane_strain(cfg.e, cfg.nu), &points)?;
    Ok(patch
        .polyline("boundary")?
        .nodes
        .iter()
        .map(|&n| s.nodal_or_zero(n)[0])
        .collect())
}

fn tied_profile(
    model: &Model,
    analysis: &Analysis,
    tying: usize,
    name: &str,
    component: usize,
) -> Result<(Profile, Vec<f64>)> {
    let records = analysis.traction_profile(model, tying, chain_centroid(model, tying)?)?;
    let s: Vec<f64> = records.iter().map(|r| r.sigma[component]).collect();
    Ok((
        Profile {
            name: name.into(),
            records,
            extra: vec![],
        },
        s,
    ))
}

fn chain_centroid(model: &Model, tying: usize) -> Result<Vec2> {
    let t = &model.tyings[tying];
    let mesh = &model.domains[t.patch].mesh;
    let p = mesh.polyline(&t.chain)?;
    let c = mesh.polyline_coords(p);
    Ok(c.iter().fold(Vec2::zeros(), |a, x| a + x) / c.len() as f64)
}

/// Largest node-to-node change around a closed profile.
fn closed_max_jump(values: &[f64]) -> f64 {
    let wrap = match (values.first(), values.last()) {
        (Some(a), Some(b)) => (a - b).abs(),
        _ => 0.0,
    };
    max_jump(values).max(wrap)
}

pub fn run_plate_with_hole(cfg: &PlateConfig) -> Result<BenchReport> {
    let start = Instant::now();
    let reference_model = build_plate_reference(cfg)?;
    let reference = analyze(&reference_model)?;
    let patch = plate_patch_mesh(cfg)?;
    let s_ref = reference_boundary_sxx(cfg, &patch, &reference)?;

    let mut report = BenchReport::new(ExampleName::PlateWithHole.to_string());
    report.config("host_divisions", cfg.host_divisions);
    report.config("patch_side", cfg.patch_side);
    report.config("cgi_kappa", cfg.cgi_kappa);
    report.config("triangulate", cfg.triangulate);
    let far = reference.solution.stress[0]
        .nodal_or_zero(reference_model.domains[0].mesh.node_set("right")?[cfg.patch_side / 2]);
    report.metric("reference_edge_sxx", far[0]);
    for (tag, scheme, kappa) in [
        ("sli", DualScheme::SliP1, Kappa::Fixed(1)),
        ("cgi", DualScheme::Cgi, Kappa::Fixed(cfg.cgi_kappa)),
    ] {
        let model = build_plate_model(cfg, scheme, kappa)?;
        let analysis = analyze(&model)?;
        let (mut profile, sxx) = tied_profile(&model, &analysis, 0, &format!("{tag}_boundary"), 0)?;
        let dev = sxx
            .iter()
            .zip(&s_ref)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
            / cfg.sigma0;
        report.metric(&format!("{tag}_max_dev"), dev);
        report.metric(
            &format!("{tag}_max_jump"),
            closed_max_jump(&sxx) / cfg.sigma0,
        );
        if let Some(c) = &analysis.prepared.tyings[0].contrast {
            report.metric("m_c", c.global);
        }
        profile.extra.push(("sxx_reference".into(), s_ref.clone()));
        report.profiles.push(profile);
    }
    report.runtime = start.elapsed().as_secs_f64();
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiLevelConfig {
    /// Side of the host square.
    pub length: f64,
    /// Side of the square patch.
    pub patch_length: f64,
    /// Lower left corner of the patch.
    pub patch_origin: Vec2,
    pub host_divisions: usize,
    pub patch_divisions: usize,
    /// (centre, radius, Young's modulus, boundary edges) per inclusion.
    pub inclusions: Vec<(Vec2, f64, f64, usize)>,
    pub e: f64,
    pub nu: f64,
    /// Prescribed vertical displacement of the top edge.
    pub u_top: f64,
    pub cgi_kappa: usize,
    pub triangulate: bool,
}

impl Default for MultiLevelConfig {
    fn default() -> Self {
        MultiLevelConfig {
            length: 5.0,
            patch_length: 3.0,
            patch_origin: Vec2::new(1.0, 1.0),
            host_divisions: 9,
            patch_divisions: 40,
            inclusions: vec![
                (Vec2::new(2.03, 3.07), 0.2, 100.0, 64),
                (Vec2::new(2.96, 1.94), 0.4, 1000.0, 128),
            ],
            e: 1.0,
            nu: 0.3,
            u_top: 0.1,
            cgi_kappa: 4,
            triangulate: false,
        }
    }
}

/// Host (domain 0), patch tied into the host (domain 1) and one disk per
/// inclusion tied into the patch (domains 2, 3, ...). Every tying uses the
/// same multiplier scheme.
pub fn build_multi_level_model(
    cfg: &MultiLevelConfig,
    scheme: DualScheme,
    kappa: Kappa,
) -> Result<Model> {
    let host = generate_structured_mesh(
        Rect::new(0.0, 0.0, cfg.length, cfg.length),
        cfg.host_divisions,
        cfg.host_divisions,
        ElementKind::Q4,
        None,
    )?;
    let o = cfg.patch_origin;
    let patch = generate_structured_mesh(
        Rect::new(o.x, o.y, o.x + cfg.patch_length, o.y + cfg.patch_length),
        cfg.patch_divisions,
        cfg.patch_divisions,
        ElementKind::Q4,
        None,
    )?;
    let mat = Material::plane_strain(cfg.e, cfg.nu);
    let mut domains = vec![
        Domain::new("host", host, mat),
        Domain::new("patch", patch, mat),
    ];
    let mut tyings = vec![Tying {
        patch: 1,
        host: 0,
        chain: "boundary".into(),
        footprint: None,
        scheme,
        kappa,
    }];
    for (i, &(c, r, e, n)) in cfg.inclusions.iter().enumerate() {
        let mut disk = generate_disk_mesh(r, n)?;
        disk.translate(c);
        domains.push(Domain::new(
            format!("inclusion{}", i + 1),
            disk,
            Material::plane_strain(e, cfg.nu),
        ));
        tyings.push(Tying {
            patch: domains.len() - 1,
            host: 1,
            chain: "boundary".into(),
            footprint: None,
            scheme,
            kappa,
        });
    }
    Ok(Model {
        domains,
        tyings,
        bcs: vec![
            Bc::Displacement {
                domain: 0,
                target: "top".into(),
                component: 1,
                value: cfg.u_top,
            },
            Bc::Displacement {
                domain: 0,
                target: "bottom".into(),
                component: 1,
                value: 0.0,
            },
            Bc::Displacement {
                domain: 0,
                target: "left".into(),
                component: 0,
                value: 0.0,
            },
        ],
        triangulate: cfg.triangulate,
    })
}

pub fn run_multi_level(cfg: &MultiLevelConfig) -> Result<BenchReport> {
    let start = Instant::now();
    let mut report = BenchReport::new(ExampleName::MultiLevel.to_string());
    report.config("host_divisions", cfg.host_divisions);
    report.config("patch_divisions", cfg.patch_divisions);
    report.config("cgi_kappa", cfg.cgi_kappa);
    report.config("triangulate", cfg.triangulate);
    for (tag, scheme, kappa) in [
        ("sli", DualScheme::SliP1, Kappa::Fixed(1)),
        ("cgi", DualScheme::Cgi, Kappa::Fixed(cfg.cgi_kappa)),
    ] {
        let model = build_multi_level_model(cfg, scheme, kappa)?;
        let analysis = analyze(&model)?;
        let order = model.order()?;
        report.metric("levels", nesting_depth(&model)? as f64);
        report.metric("domains", order.len() as f64);
        for t in 0..model.tyings.len() {
            let name = if t == 0 {
                "patch".to_string()
            } else {
                format!("inclusion{t}")
            };
            let (profile, syy) = tied_profile(&model, &analysis, t, &format!("{tag}_{name}"), 1)?;
            report.metric(&format!("{tag}_{name}_max_jump"), closed_max_jump(&syy));
            if let Some(c) = &analysis.prepared.tyings[t].contrast {
                report.metric(&format!("{name}_m_c"), c.global);
            }
            report.profiles.push(profile);
        }
    }
    report.runtime = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Number of tying levels below the root domain.
pub fn nesting_depth(model: &Model) -> Result<usize> {
    let parents = model.parents()?;
    let depth = |mut d: usize| {
        let mut k = 0;
        while let Some(p) = parents[d] {
            d = p;
            k += 1;
        }
        k
    };
    Ok((0..parents.len()).map(depth).max().unwrap_or(0))
}

pub fn run_example(name: ExampleName) -> Result<BenchReport> {
    match name {
        ExampleName::PlateWithHole => run_plate_with_hole(&PlateConfig::default()),
        ExampleName::MultiLevel => run_multi_level(&MultiLevelConfig::default()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_roundtrip() {
        for n in [ExampleName::PlateWithHole, ExampleName::MultiLevel] {
            assert_eq!(n.to_string().parse::<ExampleName>().unwrap(), n);
        }
        assert!("blade_disk".parse::<ExampleName>().is_err());
    }

    #[test]
    fn reference_mesh_extends_patch_mesh() {
        let cfg = PlateConfig::default();
        let p = plate_patch_mesh(&cfg).unwrap();
        let r = plate_reference_mesh(&cfg).unwrap();
        for n in 0..p.n_nodes() {
            assert_eq!(p.x(n), r.x(n));
        }
        assert_eq!(
            p.polyline("boundary").unwrap(),
            r.polyline("patch_boundary").unwrap()
        );
        let hole = std::f64::consts::PI * cfg.radius * cfg.radius;
        assert!((r.total_area() - (144.0 - hole)).abs() < 0.02 * hole);
        let right = r.node_set("right").unwrap();
        assert!(right.iter().all(|&n| (r.x(n).x - 6.0).abs() < 1e-12));
        assert_eq!(
            r.x(r.node_set("corner_ll").unwrap()[0]),
            Vec2::new(-6.0, -6.0)
        );
    }

    #[test]
    fn closed_jump_includes_wraparound() {
        assert_eq!(closed_max_jump(&[0.0, 0.5, 1.0, 1.5]), 1.5);
        assert_eq!(closed_max_jump(&[]), 0.0);
    }
}
