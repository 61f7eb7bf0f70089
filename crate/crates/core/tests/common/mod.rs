//! Randomized invariant checks shared by the property tests and the
//! acceptance run. Each returns a short summary or the first violation.
#![allow(dead_code)]

use mortex::bench::EshelbyParams;
use mortex::elasticity::Material;
use mortex::geom::orient;
use mortex::mesh::{
    generate_disk_mesh, generate_structured_mesh, shape_gradients, shape_values, Distortion, ElementKind, Mesh, Rect,
};
use mortex::model::{analyze, cut_domain, prepare, Bc, Domain, DualScheme, Kappa, Model, Tying};
use mortex::mortar::{DualBasis, MortarChain, MortarInterface};
use mortex::xfem::{ear_clip, split_element, ClipPolygon, Indicator};
use mortex::Vec2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = Result<String, String>;

pub const DRAWS: usize = 1000;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

pub fn random_parent_point(kind: ElementKind, rng: &mut ChaCha8Rng) -> [f64; 2] {
    loop {
        let xi = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        if kind.parent_contains(xi, 0.0) {
            return xi;
        }
    }
}

pub fn shape_function_identities(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for kind in [ElementKind::T3, ElementKind::Q4] {
        let n = kind.n_nodes();
        for (a, xi) in kind.parent_nodes().iter().enumerate() {
            let v = shape_values(kind, *xi);
            for b in 0..n {
                let expect = if a == b { 1.0 } else { 0.0 };
                ensure((v[b] - expect).abs() < 1e-15, || format!("{kind:?}: N{b}(node {a}) = {}", v[b]))?;
            }
        }
        for _ in 0..DRAWS {
            let xi = random_parent_point(kind, &mut rng);
            let s: f64 = shape_values(kind, xi)[..n].iter().sum();
            let g = shape_gradients(kind, xi);
            let (gx, gy) = g[..n].iter().fold((0.0, 0.0), |(x, y), d| (x + d[0], y + d[1]));
            ensure((s - 1.0).abs() < 1e-14 && gx.abs() < 1e-14 && gy.abs() < 1e-14, || {
                format!("{kind:?} at {xi:?}: sum {s}, gradient sum ({gx}, {gy})")
            })?;
        }
    }
    Ok(format!("{DRAWS} points per element type"))
}

/// Jittered unit-ish quadrilateral cut by a random star-shaped ring.
pub fn random_cut(rng: &mut ChaCha8Rng) -> (Mesh, Indicator) {
    let mut j = || rng.gen_range(-0.15..0.15);
    let x = vec![Vec2::new(j(), j()), Vec2::new(1.0 + j(), j()), Vec2::new(1.0 + j(), 1.0 + j()), Vec2::new(j(), 1.0 + j())];
    let m = Mesh::from_parts(x, vec![(ElementKind::Q4, vec![0, 1, 2, 3])]).unwrap();
    let (cx, cy) = (rng.gen_range(-0.5..1.5), rng.gen_range(-0.5..1.5));
    let r = rng.gen_range(0.05..1.2);
    let n = rng.gen_range(5..40);
    let phase = rng.gen_range(0.0..std::f64::consts::TAU);
    let ring = (0..n)
        .map(|i| {
            let t = phase + std::f64::consts::TAU * i as f64 / n as f64;
            let rr = r * (1.0 + 0.3 * (3.0 * t).sin());
            Vec2::new(cx + rr * t.cos(), cy + rr * t.sin())
        })
        .collect();
    (m, Indicator::new(vec![ring], true).unwrap())
}

pub fn clip_area_conservation(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cut = 0;
    for k in 0..DRAWS {
        let (m, ind) = random_cut(&mut rng);
        let a = m.element_area(0);
        let s = split_element(&m, 0, &ind);
        let kept: f64 = s.retained.iter().map(ClipPolygon::area).sum();
        let lost: f64 = s.discarded.iter().map(ClipPolygon::area).sum();
        ensure((kept + lost - a).abs() <= 1e-12 * a, || format!("draw {k}: pieces {} vs element {a}", kept + lost))?;
        if !s.retained.is_empty() && !s.discarded.is_empty() {
            cut += 1;
        }
        for p in s.retained.iter().chain(&s.discarded) {
            let tris = ear_clip(&p.vertices).map_err(|e| format!("draw {k}: {e}"))?;
            let ta: f64 = tris.iter().map(|t| 0.5 * orient(&p.vertices[t[0]], &p.vertices[t[1]], &p.vertices[t[2]])).sum();
            ensure((ta - p.area()).abs() <= 1e-12 * a, || format!("draw {k}: triangles {ta} vs polygon {}", p.area()))?;
        }
    }
    Ok(format!("{DRAWS} draws, {cut} genuinely cut"))
}

/// Random disk footprints over jittered host grids; every mortar element
/// must satisfy sum_j M_aj = sum_k D_ak.
pub fn mortar_row_sums(seed: u64, configurations: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = 0;
    for k in 0..configurations {
        let host = generate_structured_mesh(
            Rect::new(0.0, 0.0, 1.0, 1.0),
            6,
            6,
            if k % 3 == 0 { ElementKind::T3 } else { ElementKind::Q4 },
            Some(Distortion { seed: rng.gen(), amplitude: 0.04 }),
        )
        .unwrap();
        let mut disk = generate_disk_mesh(rng.gen_range(0.1..0.3), rng.gen_range(8..60)).unwrap();
        disk.translate(Vec2::new(rng.gen_range(0.35..0.65), rng.gen_range(0.35..0.65)));
        let p = disk.polyline("boundary").unwrap();
        let dc = cut_domain(&host, vec![disk.polyline_coords(p)], false).map_err(|e| e.to_string())?;
        let dual = if k % 2 == 0 { DualBasis::P1 } else { DualBasis::P0 };
        let mi = MortarInterface::build(MortarChain::from_polyline(&disk, p), &dc.mesh, &dc.cut.classes, &dc.indicator, dual)
            .map_err(|e| e.to_string())?;
        for el in &mi.elements {
            for a in 0..el.d.nrows() {
                let (sm, sd) = (el.m.row(a).sum(), el.d.row(a).sum());
                ensure((sm - sd).abs() <= 1e-12 * sd.abs().max(1e-300), || format!("configuration {k}: row {a} M {sm} vs D {sd}"))?;
                rows += 1;
            }
        }
    }
    Ok(format!("{rows} rows over {configurations} interfaces"))
}

pub fn grid(x0: f64, y0: f64, x1: f64, y1: f64, nx: usize, ny: usize) -> Mesh {
    generate_structured_mesh(Rect::new(x0, y0, x1, y1), nx, ny, ElementKind::Q4, None).unwrap()
}

pub fn block_loads(domain: usize) -> Vec<Bc> {
    vec![
        Bc::Displacement { domain, target: "bottom".into(), component: 0, value: 0.0 },
        Bc::Displacement { domain, target: "bottom".into(), component: 1, value: 0.0 },
        Bc::LinearPressure { domain, polyline: "top".into(), a: 2.0, bx: 0.5, by: 0.0 },
        Bc::Pressure { domain, polyline: "right".into(), p: -0.7 },
    ]
}

pub fn tied_block(host: Mesh, patch: Mesh, scheme: DualScheme, kappa: Kappa, mat: Material) -> Model {
    Model {
        domains: vec![Domain::new("host", host, mat), Domain::new("patch", patch, mat)],
        tyings: vec![Tying { patch: 1, host: 0, chain: "boundary".into(), footprint: None, scheme, kappa }],
        bcs: block_loads(0),
        triangulate: false,
    }
}

/// A patch whose mesh matches the host grid it replaces, tied with linear
/// multipliers, against the plain host mesh.
pub fn conforming_matches_monolithic() -> Check {
    let mat = Material::plane_strain(210.0, 0.3);
    let mono = Model { domains: vec![Domain::new("block", grid(0., 0., 4., 4., 4, 4), mat)], tyings: vec![], bcs: block_loads(0), triangulate: false };
    let reference = analyze(&mono).map_err(|e| e.to_string())?;
    let u_ref = &reference.solution.displacement[0];
    let scale = u_ref.iter().map(|u| u.norm()).fold(0.0, f64::max);
    let mut worst: f64 = 0.0;
    for scheme in [DualScheme::SliP1, DualScheme::Cgi] {
        let model = tied_block(grid(0., 0., 4., 4., 4, 4), grid(1., 1., 3., 3., 2, 2), scheme, Kappa::Fixed(1), mat);
        let a = analyze(&model).map_err(|e| e.to_string())?;
        let host = &model.domains[0].mesh;
        for n in 0..host.n_nodes() {
            if a.prepared.dofs.node(0, n, 0).is_some() {
                worst = worst.max((a.solution.displacement[0][n] - u_ref[n]).norm() / scale);
            }
        }
        let patch = &model.domains[1].mesh;
        for n in 0..patch.n_nodes() {
            let m = host.nodes_near(patch.x(n), 1e-12)[0];
            worst = worst.max((a.solution.displacement[1][n] - u_ref[m]).norm() / scale);
        }
    }
    ensure(worst <= 1e-10, || format!("relative deviation {worst:.2e}"))?;
    Ok(format!("max relative deviation {worst:.1e}"))
}

fn nonconforming_block(scheme: DualScheme, kappa: Kappa) -> Model {
    tied_block(grid(0., 0., 4., 4., 5, 5), grid(1.1, 1.3, 2.9, 2.7, 9, 7), scheme, kappa, Material::plane_strain(100.0, 0.25))
}

pub fn kappa_one_is_sli() -> Check {
    let a = analyze(&nonconforming_block(DualScheme::SliP1, Kappa::Fixed(1))).map_err(|e| e.to_string())?;
    let b = analyze(&nonconforming_block(DualScheme::Cgi, Kappa::Fixed(1))).map_err(|e| e.to_string())?;
    ensure(a.solution.displacement == b.solution.displacement && a.solution.multipliers == b.solution.multipliers, || {
        "kappa = 1 differs from linear SLI".into()
    })?;
    Ok("identical displacements and multipliers".into())
}

pub fn saddle_structure_and_equilibrium() -> Check {
    let mut worst: f64 = 0.0;
    for (scheme, kappa) in [(DualScheme::SliP0, Kappa::Fixed(1)), (DualScheme::SliP1, Kappa::Fixed(1)), (DualScheme::Cgi, Kappa::Fixed(3))] {
        let model = nonconforming_block(scheme, kappa);
        let prep = prepare(&model).map_err(|e| e.to_string())?;
        let sys = &prep.system;
        ensure(sys.is_symmetric(1e-12), || format!("{scheme}: tangent not symmetric"))?;
        ensure(sys.dual_block_max() == 0.0, || format!("{scheme}: nonzero multiplier block"))?;
        let patch_first = prep.dofs.primal[1].iter().flatten().min().copied().unwrap();
        for ((i, j), v) in sys.compressed() {
            if i < sys.n_primal && j < sys.n_primal && v != 0.0 {
                ensure((i < patch_first) == (j < patch_first), || format!("{scheme}: primal coupling {i}-{j}"))?;
            }
        }
        let a = analyze(&model).map_err(|e| e.to_string())?;
        let (f, r) = a.resultants();
        let scale = a.prepared.loads.iter().flatten().map(|v| v.norm()).sum::<f64>();
        let rel = (f + r).norm() / scale;
        ensure(rel <= 1e-9, || format!("{scheme}: load {f} vs reactions {r}"))?;
        worst = worst.max(rel);
    }
    Ok(format!("symmetric, zero blocks, equilibrium residual {worst:.1e}"))
}

pub fn eshelby_continuity(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for k in 0..DRAWS {
        let nu = rng.gen_range(0.0..0.49);
        let p = EshelbyParams {
            radius: rng.gen_range(0.01..10.0),
            sigma0: rng.gen_range(0.01..10.0),
            inclusion: Material::plane_strain(10f64.powf(rng.gen_range(-3.0..3.0)), nu),
            matrix: Material::plane_strain(10f64.powf(rng.gen_range(-3.0..3.0)), rng.gen_range(0.0..0.49)),
        };
        let t = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        let (a, _, b) = p.interior_stress(t);
        let (c, _, d) = p.exterior_stress(p.radius, t);
        let dev = (a - c).abs().max((b - d).abs()) / p.sigma0;
        ensure(dev <= 1e-12, || format!("draw {k}: srr {a} vs {c}, srt {b} vs {d}"))?;
        worst = worst.max(dev);
    }
    Ok(format!("{DRAWS} draws, max jump {worst:.1e} sigma0"))
}

pub fn eshelby_homogeneous_limit() -> Check {
    let m = Material::plane_strain(7.0, 0.25);
    let p = EshelbyParams { radius: 0.1, sigma0: 0.1, inclusion: m, matrix: m };
    for k in 0..64 {
        let t = 0.1 * k as f64;
        for r in [0.02, 0.1, 0.3, 5.0] {
            let (rr, tt, rt) = p.stress(r, t);
            let (s, c) = (2.0 * t).sin_cos();
            let h = 0.05;
            ensure((rr - h * (1.0 + c)).abs() < 1e-15 && (tt - h * (1.0 - c)).abs() < 1e-15 && (rt + h * s).abs() < 1e-15, || {
                format!("r {r}, theta {t}: ({rr}, {tt}, {rt})")
            })?;
        }
    }
    Ok("uniaxial field reproduced".into())
}
