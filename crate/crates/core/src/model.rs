//! Multi-domain tied models and the analysis pipeline:
//! cut hosts, build mortar interfaces, assemble, condense, solve, recover.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::Vector3;

use crate::cgi::{
    closed_start, compute_mesh_contrast, corner_positions, corner_run_sizes, local_sizes,
    partition_sizes, partition_with_corners, split_runs, CgiLayout, MeshContrast,
};
use crate::elasticity::{
    average_to_nodes, element_stiffness, fit_nodal_values, stress_at, Material, StressField,
    StressSample,
};
use crate::error::{Error, Result};
use crate::geom::{polygon_centroid, Vec2};
use crate::mesh::mapping::{forward_map, inverse_map_unchecked};
use crate::mesh::quadrature::line_rule;
use crate::mesh::{ElementKind, Mesh};
use crate::mortar::{DualBasis, MortarChain, MortarInterface};
use crate::solver::{apply_mpc, solve_system, Reduction, SaddleSystem, ScalarMpc};
use crate::xfem::{cut_mesh, CutState, ElementClass, Indicator};

#[derive(Debug, Clone)]
pub struct Domain {
    pub name: String,
    pub mesh: Mesh,
    pub material: Material,
}

impl Domain {
    pub fn new(name: impl Into<String>, mesh: Mesh, material: Material) -> Self {
        Domain {
            name: name.into(),
            mesh,
            material,
        }
    }
}

/// Multiplier interpolation scheme of a tying.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DualScheme {
    SliP0,
    SliP1,
    /// Coarse-grained linear multipliers.
    Cgi,
}

impl DualScheme {
    pub fn basis(self) -> DualBasis {
        match self {
            DualScheme::SliP0 => DualBasis::P0,
            DualScheme::SliP1 | DualScheme::Cgi => DualBasis::P1,
        }
    }
}

impl fmt::Display for DualScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DualScheme::SliP0 => "sli-p0",
            DualScheme::SliP1 => "sli-p1",
            DualScheme::Cgi => "cgi",
        })
    }
}

impl FromStr for DualScheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sli-p0" => Ok(DualScheme::SliP0),
            "sli-p1" => Ok(DualScheme::SliP1),
            "cgi" => Ok(DualScheme::Cgi),
            _ => Err(Error::InvalidArgument(format!(
                "unknown dual scheme '{s}' (expected sli-p0, sli-p1 or cgi)"
            ))),
        }
    }
}

/// Coarse-graining parameter rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kappa {
    Fixed(usize),
    /// `round(global mesh contrast)`.
    Auto,
    /// Per super-segment from the local contrast of the host elements crossed.
    Local,
}

impl fmt::Display for Kappa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kappa::Fixed(k) => write!(f, "{k}"),
            Kappa::Auto => f.write_str("auto"),
            Kappa::Local => f.write_str("local"),
        }
    }
}

impl FromStr for Kappa {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Kappa::Auto),
            "local" => Ok(Kappa::Local),
            _ => match s.parse::<usize>() {
                Ok(k) if k >= 1 => Ok(Kappa::Fixed(k)),
                _ => Err(Error::InvalidArgument(format!(
                    "kappa must be a positive integer, 'auto' or 'local', got '{s}'"
                ))),
            },
        }
    }
}

/// Weak tying of a patch boundary chain to the volume of a host domain.
#[derive(Debug, Clone)]
pub struct Tying {
    pub patch: usize,
    pub host: usize,
    /// Patch polyline carrying the multipliers.
    pub chain: String,
    /// Closed patch polyline bounding the region removed from the host.
    /// Defaults to `chain`, which then has to be closed.
    pub footprint: Option<String>,
    pub scheme: DualScheme,
    pub kappa: Kappa,
}

#[derive(Debug, Clone)]
pub enum Bc {
    /// Prescribed displacement component (0 = x, 1 = y) on a node set or polyline.
    Displacement {
        domain: usize,
        target: String,
        component: usize,
        value: f64,
    },
    /// Uniform pressure on a boundary polyline, traction `-p n`.
    Pressure {
        domain: usize,
        polyline: String,
        p: f64,
    },
    /// Pressure `a + bx x + by y` on a boundary polyline.
    LinearPressure {
        domain: usize,
        polyline: String,
        a: f64,
        bx: f64,
        by: f64,
    },
}

#[derive(Debug, Clone, Default)]
pub struct Model {
    pub domains: Vec<Domain>,
    pub tyings: Vec<Tying>,
    pub bcs: Vec<Bc>,
    /// Split blending Q4 elements into two T3 before integration.
    pub triangulate: bool,
}

/// Node ids of a node set or, failing that, a polyline.
pub fn resolve_nodes(mesh: &Mesh, target: &str) -> Result<Vec<usize>> {
    if let Ok(s) = mesh.node_set(target) {
        return Ok(s.to_vec());
    }
    if let Ok(p) = mesh.polyline(target) {
        return Ok(p.nodes.clone());
    }
    Err(Error::InvalidArgument(format!(
        "no node set or polyline named '{target}'"
    )))
}

impl Model {
    /// Host of every domain (`None` for roots), checking the tying graph is a forest.
    pub fn parents(&self) -> Result<Vec<Option<usize>>> {
        let n = self.domains.len();
        let mut parent = vec![None; n];
        for (k, t) in self.tyings.iter().enumerate() {
            if t.patch >= n || t.host >= n || t.patch == t.host {
                return Err(Error::InvalidArgument(format!(
                    "tying {k} references invalid domains"
                )));
            }
            match parent[t.patch] {
                Some(h) if h != t.host => {
                    return Err(Error::InvalidArgument(format!(
                        "domain '{}' is tied to two hosts",
                        self.domains[t.patch].name
                    )))
                }
                _ => parent[t.patch] = Some(t.host),
            }
        }
        for d in 0..n {
            let mut seen = 0;
            let mut cur = d;
            while let Some(p) = parent[cur] {
                cur = p;
                seen += 1;
                if seen > n {
                    return Err(Error::InvalidArgument("tyings form a cycle".into()));
                }
            }
        }
        Ok(parent)
    }

    /// Domains ordered hosts first.
    pub fn order(&self) -> Result<Vec<usize>> {
        let parent = self.parents()?;
        let depth = |mut d: usize| {
            let mut k = 0;
            while let Some(p) = parent[d] {
                d = p;
                k += 1;
            }
            k
        };
        let mut order: Vec<usize> = (0..self.domains.len()).collect();
        order.sort_by_key(|&d| (depth(d), d));
        Ok(order)
    }

    pub fn validate(&self) -> Result<()> {
        self.parents()?;
        for d in &self.domains {
            d.mesh.validate()?;
        }
        for t in &self.tyings {
            let patch = &self.domains[t.patch].mesh;
            patch.polyline(&t.chain)?;
            let fp = patch.polyline(t.footprint.as_deref().unwrap_or(&t.chain))?;
            if !fp.closed {
                return Err(Error::InvalidArgument(format!(
                    "tying footprint '{}' must be a closed polyline",
                    t.footprint.as_deref().unwrap_or(&t.chain)
                )));
            }
        }
        for bc in &self.bcs {
            let (d, name) = match bc {
                Bc::Displacement {
                    domain,
                    target,
                    component,
                    ..
                } => {
                    if *component > 1 {
                        return Err(Error::InvalidArgument(format!(
                            "displacement component {component} is not 0 or 1"
                        )));
                    }
                    (*domain, target)
                }
                Bc::Pressure {
                    domain, polyline, ..
                }
                | Bc::LinearPressure {
                    domain, polyline, ..
                } => (*domain, polyline),
            };
            let dom = self.domains.get(d).ok_or_else(|| {
                Error::InvalidArgument(format!("boundary condition references domain {d}"))
            })?;
            match bc {
                Bc::Displacement { .. } => {
                    resolve_nodes(&dom.mesh, name)?;
                }
                _ => {
                    dom.mesh.polyline(name)?;
                }
            }
        }
        Ok(())
    }
}

/// Integration state of one domain.
#[derive(Debug, Clone)]
pub struct DomainCut {
    /// Mesh used for integration (blending quads split when triangulating).
    pub mesh: Mesh,
    /// Source element in the domain mesh for every integration-mesh element.
    pub origin: Vec<usize>,
    pub indicator: Indicator,
    pub cut: CutState,
}

/// Cuts a mesh by footprint rings (patch regions are discarded) and
/// optionally triangulates the blending quads.
pub fn cut_domain(mesh: &Mesh, rings: Vec<Vec<Vec2>>, triangulate: bool) -> Result<DomainCut> {
    let identity: Vec<usize> = (0..mesh.n_elements()).collect();
    if rings.is_empty() {
        return Ok(DomainCut {
            mesh: mesh.clone(),
            origin: identity,
            indicator: Indicator::empty(),
            cut: CutState::uncut(mesh),
        });
    }
    let indicator = Indicator::new(rings, true)?;
    let cut = cut_mesh(mesh, &indicator)?;
    let split: Vec<bool> = mesh
        .elements
        .iter()
        .zip(&cut.classes)
        .map(|(el, c)| *c == ElementClass::Blending && el.kind == ElementKind::Q4)
        .collect();
    if triangulate && split.iter().any(|&s| s) {
        let (tri, origin) = mesh.split_quads(&split);
        let cut = cut_mesh(&tri, &indicator)?;
        log::info!(
            "triangulated {} blending quads",
            split.iter().filter(|&&s| s).count()
        );
        return Ok(DomainCut {
            mesh: tri,
            origin,
            indicator,
            cut,
        });
    }
    Ok(DomainCut {
        mesh: mesh.clone(),
        origin: identity,
        indicator,
        cut,
    })
}

/// Interface state of one tying.
#[derive(Debug, Clone)]
pub struct TyingState {
    /// Patch domain index.
    pub patch: usize,
    pub interface: MortarInterface,
    /// `None` when no host element is blending.
    pub contrast: Option<MeshContrast>,
    /// Uniform coarse-graining parameter actually used.
    pub kappa: Option<usize>,
    pub layout: Option<CgiLayout>,
}

impl TyingState {
    pub fn n_segments(&self) -> usize {
        self.interface.segments.len()
    }
}

/// Turn angle (radians) above which a chain node is a corner.
const CORNER_TURN: f64 = 0.5;

fn build_layout(
    t: &Tying,
    chain: &MortarChain,
    contrast: Option<&MeshContrast>,
    segs: &MortarInterface,
) -> Result<(Option<usize>, CgiLayout)> {
    let n_edges = chain.n_edges();
    let max = if chain.closed { n_edges - 1 } else { n_edges };
    // super-segments never straddle a corner of the chain
    let corners = corner_positions(&chain.coords, chain.closed, CORNER_TURN);
    let start = if !chain.closed {
        0
    } else if corners.is_empty() {
        closed_start(&chain.nodes)
    } else {
        *corners.iter().min_by_key(|&&i| chain.nodes[i]).unwrap()
    };
    let uniform = |k: usize| -> Result<(Option<usize>, CgiLayout)> {
        let k = if k > max {
            log::warn!(
                "kappa {k} exceeds the {max} mortar edges of chain '{}'; using {max}",
                t.chain
            );
            max
        } else {
            k
        };
        Ok((
            Some(k),
            CgiLayout::new(partition_with_corners(
                &chain.coords,
                k,
                chain.closed,
                start,
                &corners,
            )?)?,
        ))
    };
    match t.kappa {
        Kappa::Fixed(k) => uniform(k),
        Kappa::Auto => {
            let c = contrast.ok_or(Error::UndefinedContrast)?;
            uniform((c.global.round() as usize).max(1))
        }
        Kappa::Local => {
            let c = contrast.ok_or(Error::UndefinedContrast)?;
            let mut edge_kappa = vec![1usize; n_edges];
            for s in &segs.segments {
                if let Some(&m) = c.local.get(&s.host) {
                    edge_kappa[s.edge] = edge_kappa[s.edge].max(m.ceil() as usize);
                }
            }
            // walk from the chain start so closed chains begin at their first master
            let rotated: Vec<usize> = (0..n_edges)
                .map(|i| edge_kappa[(start + i) % n_edges])
                .collect();
            let breaks: Vec<usize> = corners
                .iter()
                .map(|&c| (c + n_edges - start) % n_edges)
                .collect();
            let mut sizes: Vec<usize> = split_runs(n_edges, &breaks)
                .into_iter()
                .flat_map(|(o, l)| {
                    if corners.is_empty() {
                        local_sizes(l, &rotated[o..o + l], false)
                    } else {
                        corner_run_sizes(l, |m| local_sizes(m, &rotated[o + 1..o + 1 + m], false))
                    }
                })
                .collect();
            if chain.closed && sizes.len() < 2 {
                sizes = local_sizes(n_edges, &rotated, true);
            }
            Ok((
                None,
                CgiLayout::new(partition_sizes(&chain.coords, &sizes, chain.closed, start)?)?,
            ))
        }
    }
}

/// Unknown numbering.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    /// Per domain and node: first of two consecutive unknowns, `None` for orphans.
    pub primal: Vec<Vec<Option<usize>>>,
    /// Per tying: first multiplier unknown; slot `s`, component `c` sits at `base + 2 s + c`.
    pub dual: Vec<usize>,
    pub n_primal: usize,
    pub n: usize,
}

impl DofMap {
    pub fn new(n_nodes: &[usize], orphans: &[Vec<usize>], n_slots: &[usize]) -> Self {
        let mut k = 0;
        let mut primal = Vec::with_capacity(n_nodes.len());
        for (d, &nn) in n_nodes.iter().enumerate() {
            let mut dead = vec![false; nn];
            for &o in &orphans[d] {
                dead[o] = true;
            }
            primal.push(
                (0..nn)
                    .map(|i| {
                        (!dead[i]).then(|| {
                            k += 2;
                            k - 2
                        })
                    })
                    .collect(),
            );
        }
        let n_primal = k;
        let dual = n_slots
            .iter()
            .map(|&s| {
                k += 2 * s;
                k - 2 * s
            })
            .collect();
        DofMap {
            primal,
            dual,
            n_primal,
            n: k,
        }
    }

    #[inline]
    pub fn node(&self, domain: usize, node: usize, c: usize) -> Option<usize> {
        self.primal[domain][node].map(|b| b + c)
    }

    #[inline]
    pub fn lambda(&self, tying: usize, slot: usize, c: usize) -> usize {
        self.dual[tying] + 2 * slot + c
    }
}

/// Outward unit normal of boundary edge `(a, b)`, from the element holding it.
fn outward_normal(mesh: &Mesh, node_elements: &[Vec<usize>], a: usize, b: usize) -> Result<Vec2> {
    let e = node_elements[a]
        .iter()
        .copied()
        .find(|e| {
            let nodes = &mesh.elements[*e].nodes;
            let k = nodes.len();
            (0..k).any(|i| {
                let (p, q) = (nodes[i], nodes[(i + 1) % k]);
                (p == a && q == b) || (p == b && q == a)
            })
        })
        .ok_or_else(|| {
            Error::InvalidGeometry(format!("nodes {a}-{b} do not form an element edge"))
        })?;
    let (xa, xb) = (mesh.x(a), mesh.x(b));
    let d = xb - xa;
    let mut n = Vec2::new(d.y, -d.x) / d.norm();
    let c = polygon_centroid(&mesh.element_coords(e));
    if (c - 0.5 * (xa + xb)).dot(&n) > 0.0 {
        n = -n;
    }
    Ok(n)
}

/// Consistent nodal forces of a pressure field on a boundary polyline.
pub fn pressure_loads(
    mesh: &Mesh,
    polyline: &str,
    pressure: impl Fn(&Vec2) -> f64,
) -> Result<Vec<(usize, Vec2)>> {
    let p = mesh.polyline(polyline)?;
    let ne = mesh.node_elements();
    let rule = line_rule(3);
    let mut out = Vec::with_capacity(2 * p.n_edges());
    for k in 0..p.n_edges() {
        let (a, b) = p.edge(k);
        let n = outward_normal(mesh, &ne, a, b)?;
        let (xa, xb) = (mesh.x(a), mesh.x(b));
        let half = 0.5 * (xb - xa).norm();
        let (mut fa, mut fb) = (Vec2::zeros(), Vec2::zeros());
        for (g, w) in rule.iter() {
            let (na, nb) = (0.5 * (1.0 - g[0]), 0.5 * (1.0 + g[0]));
            let x = xa * na + xb * nb;
            let t = -pressure(&x) * n;
            fa += t * (w * na * half);
            fb += t * (w * nb * half);
        }
        out.push((a, fa));
        out.push((b, fb));
    }
    Ok(out)
}

/// Everything needed to solve, before any elimination.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub cuts: Vec<DomainCut>,
    pub tyings: Vec<TyingState>,
    pub dofs: DofMap,
    /// Full system over active unknowns, prescribed ones included.
    pub system: SaddleSystem,
    pub fixed: BTreeMap<usize, f64>,
    /// External nodal forces per domain.
    pub loads: Vec<Vec<Vec2>>,
}

fn footprint_ring(model: &Model, t: &Tying) -> Result<Vec<Vec2>> {
    let patch = &model.domains[t.patch].mesh;
    let name = t.footprint.as_deref().unwrap_or(&t.chain);
    let p = patch.polyline(name)?;
    if !p.closed {
        return Err(Error::InvalidArgument(format!(
            "tying footprint '{name}' must be a closed polyline"
        )));
    }
    Ok(patch.polyline_coords(p))
}

/// Geometry, interfaces and assembly.
pub fn prepare(model: &Model) -> Result<Prepared> {
    model.validate()?;
    let nd = model.domains.len();
    let mut rings: Vec<Vec<Vec<Vec2>>> = vec![Vec::new(); nd];
    for t in &model.tyings {
        rings[t.host].push(footprint_ring(model, t)?);
    }
    let mut cuts: Vec<Option<DomainCut>> = vec![None; nd];
    for d in model.order()? {
        let dc = cut_domain(
            &model.domains[d].mesh,
            std::mem::take(&mut rings[d]),
            model.triangulate,
        )?;
        log::info!(
            "domain '{}': {} standard, {} blending, {} discarded, {} orphan nodes",
            model.domains[d].name,
            dc.cut.count(ElementClass::Standard),
            dc.cut.count(ElementClass::Blending),
            dc.cut.count(ElementClass::Discarded),
            dc.cut.orphans.len()
        );
        cuts[d] = Some(dc);
    }
    let cuts: Vec<DomainCut> = cuts
        .into_iter()
        .map(|c| c.expect("every domain cut"))
        .collect();

    let mut tyings = Vec::with_capacity(model.tyings.len());
    for t in &model.tyings {
        let patch = &model.domains[t.patch].mesh;
        let chain = MortarChain::from_polyline(patch, patch.polyline(&t.chain)?);
        let host = &cuts[t.host];
        let interface = MortarInterface::build(
            chain,
            &host.mesh,
            &host.cut.classes,
            &host.indicator,
            t.scheme.basis(),
        )?;
        let contrast = match compute_mesh_contrast(&interface.segments, &host.cut.classes) {
            Ok(c) => Some(c),
            Err(Error::UndefinedContrast) => None,
            Err(e) => return Err(e),
        };
        let (kappa, layout) = if t.scheme == DualScheme::Cgi {
            let (k, l) = build_layout(t, &interface.chain, contrast.as_ref(), &interface)?;
            (k, Some(l))
        } else {
            (None, None)
        };
        log::info!(
            "tying '{}' -> '{}': {} mortar edges, {} segments, contrast {}, kappa {:?}",
            model.domains[t.patch].name,
            model.domains[t.host].name,
            interface.chain.n_edges(),
            interface.segments.len(),
            contrast
                .as_ref()
                .map_or("undefined".to_string(), |c| format!("{:.3}", c.global)),
            kappa
        );
        tyings.push(TyingState {
            patch: t.patch,
            interface,
            contrast,
            kappa,
            layout,
        });
    }

    let n_nodes: Vec<usize> = model.domains.iter().map(|d| d.mesh.n_nodes()).collect();
    let orphans: Vec<Vec<usize>> = cuts.iter().map(|c| c.cut.orphans.clone()).collect();
    let slots: Vec<usize> = tyings.iter().map(|t| t.interface.n_slots()).collect();
    let dofs = DofMap::new(&n_nodes, &orphans, &slots);
    let mut system = SaddleSystem::new(dofs.n, dofs.n_primal);

    for (d, dc) in cuts.iter().enumerate() {
        let material = &model.domains[d].material;
        for e in 0..dc.mesh.n_elements() {
            let Some(pts) = dc.cut.quadrature(&dc.mesh, e)? else {
                continue;
            };
            let el = &dc.mesh.elements[e];
            let k =
                element_stiffness(el.kind, &dc.mesh.element_coords(e), material, Some(&pts), e)?;
            let idx: Vec<Option<usize>> = el
                .nodes
                .iter()
                .flat_map(|&n| [dofs.node(d, n, 0), dofs.node(d, n, 1)])
                .collect();
            system.add_block(&idx, &k);
        }
    }
    for (ti, (t, ts)) in model.tyings.iter().zip(&tyings).enumerate() {
        for me in &ts.interface.elements {
            let mut idx = Vec::with_capacity(me.n_dofs());
            for &n in &me.edge_nodes {
                idx.extend([dofs.node(t.patch, n, 0), dofs.node(t.patch, n, 1)]);
            }
            for &n in &me.host_nodes {
                idx.extend([dofs.node(t.host, n, 0), dofs.node(t.host, n, 1)]);
            }
            for &s in &me.slots {
                idx.extend([Some(dofs.lambda(ti, s, 0)), Some(dofs.lambda(ti, s, 1))]);
            }
            system.add_block(&idx, &me.tangent());
        }
    }

    let mut loads: Vec<Vec<Vec2>> = n_nodes.iter().map(|&n| vec![Vec2::zeros(); n]).collect();
    let mut fixed = BTreeMap::new();
    for bc in &model.bcs {
        match bc {
            Bc::Displacement {
                domain,
                target,
                component,
                value,
            } => {
                let mesh = &model.domains[*domain].mesh;
                let nodes = resolve_nodes(mesh, target)?;
                let mut any = false;
                for n in nodes {
                    let Some(i) = dofs.node(*domain, n, *component) else {
                        continue;
                    };
                    any = true;
                    if let Some(old) = fixed.insert(i, *value) {
                        if old != *value {
                            return Err(Error::InvalidArgument(format!(
                                "node {n} of domain '{}' has conflicting prescribed values",
                                model.domains[*domain].name
                            )));
                        }
                    }
                }
                if !any {
                    return Err(Error::InvalidArgument(format!(
                        "'{target}' has no active node to constrain"
                    )));
                }
            }
            Bc::Pressure {
                domain,
                polyline,
                p,
            } => {
                let p = *p;
                for (n, f) in pressure_loads(&model.domains[*domain].mesh, polyline, |_| p)? {
                    loads[*domain][n] += f;
                }
            }
            Bc::LinearPressure {
                domain,
                polyline,
                a,
                bx,
                by,
            } => {
                let (a, bx, by) = (*a, *bx, *by);
                for (n, f) in pressure_loads(&model.domains[*domain].mesh, polyline, |x| {
                    a + bx * x.x + by * x.y
                })? {
                    loads[*domain][n] += f;
                }
            }
        }
    }
    for (d, l) in loads.iter().enumerate() {
        for (n, f) in l.iter().enumerate() {
            if f.x == 0.0 && f.y == 0.0 {
                continue;
            }
            match dofs.primal[d][n] {
                Some(b) => {
                    system.rhs[b] += f.x;
                    system.rhs[b + 1] += f.y;
                }
                None => log::warn!(
                    "load on orphan node {n} of domain '{}' ignored",
                    model.domains[d].name
                ),
            }
        }
    }
    Ok(Prepared {
        cuts,
        tyings,
        dofs,
        system,
        fixed,
        loads,
    })
}

/// Solved fields.
#[derive(Debug, Clone)]
pub struct Solution {
    /// Per domain and node (orphans hold zero).
    pub displacement: Vec<Vec<Vec2>>,
    /// Per tying and multiplier slot, as solved.
    pub multipliers: Vec<Vec<Vec2>>,
    /// Per domain, on the domain mesh.
    pub stress: Vec<StressField>,
    /// `K u - f` at prescribed unknowns, per domain and node.
    pub reactions: Vec<Vec<Vec2>>,
    /// Unknowns in the system actually factorized.
    pub n_unknowns: usize,
    /// `|K x - f|_inf` of the system actually factorized. Coarse-grained
    /// multiplier rows only hold in combination, so the full system is not used.
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub prepared: Prepared,
    pub solution: Solution,
}

/// Per-component multiplier constraints: coarse-graining slaves, plus
/// linear multipliers at mortar nodes whose patch displacement component is
/// prescribed. Those have no equilibrium row of their own and would only be
/// fixed through the host coupling, so they copy the neighbouring multiplier.
pub fn mpc_constraints(prep: &Prepared, dirichlet: &Reduction) -> Vec<ScalarMpc> {
    let mut out = Vec::new();
    for (ti, ts) in prep.tyings.iter().enumerate() {
        let map = |s: usize, comp: usize| {
            dirichlet
                .kept(prep.dofs.lambda(ti, s, comp))
                .expect("multipliers are never prescribed")
        };
        let mut slave = vec![false; ts.interface.n_slots()];
        if let Some(layout) = &ts.layout {
            for c in &layout.constraints {
                slave[c.slave] = true;
                for comp in 0..2 {
                    out.push(ScalarMpc {
                        slave: map(c.slave, comp),
                        masters: c.masters.iter().map(|&(m, w)| (map(m, comp), w)).collect(),
                    });
                }
            }
        }
        if ts.interface.dual != DualBasis::P1 {
            continue;
        }
        let chain = &ts.interface.chain;
        let n = chain.nodes.len();
        let fixed = |i: usize, comp: usize| {
            prep.dofs
                .node(ts.patch, chain.nodes[i], comp)
                .is_some_and(|d| prep.fixed.contains_key(&d))
        };
        for comp in 0..2 {
            let mut copied = vec![false; n];
            for i in 0..n {
                if slave[i] || !fixed(i, comp) {
                    continue;
                }
                let neighbours = if chain.closed {
                    [Some((i + 1) % n), Some((i + n - 1) % n)]
                } else {
                    [(i + 1 < n).then_some(i + 1), i.checked_sub(1)]
                };
                let pick = neighbours
                    .into_iter()
                    .flatten()
                    .find(|&j| !slave[j] && !copied[j] && !fixed(j, comp));
                if let Some(j) = pick {
                    copied[i] = true;
                    out.push(ScalarMpc {
                        slave: map(i, comp),
                        masters: vec![(map(j, comp), 1.0)],
                    });
                }
            }
        }
    }
    out
}

impl Prepared {
    /// System after Dirichlet elimination and multiplier condensation, with
    /// both substitutions.
    pub fn reduce(&self) -> Result<(SaddleSystem, Reduction, Reduction)> {
        let r1 = Reduction::dirichlet(self.system.n, self.system.n_primal, &self.fixed);
        let s1 = r1.reduce(&self.system);
        let (s2, r2) = apply_mpc(&s1, &mpc_constraints(self, &r1))?;
        Ok((s2, r1, r2))
    }

    pub fn solve(self, model: &Model) -> Result<Analysis> {
        let (sys, r1, r2) = self.reduce()?;
        let y = solve_system(&sys)?;
        let x = r1.expand(&r2.expand(&y));
        let residual = sys.residual_norm(&y);
        let kx = self.system.matvec(&x);
        let mut reactions: Vec<Vec<Vec2>> = self
            .loads
            .iter()
            .map(|l| vec![Vec2::zeros(); l.len()])
            .collect();
        let mut displacement = Vec::with_capacity(model.domains.len());
        for (d, dom) in model.domains.iter().enumerate() {
            let mut u = vec![Vec2::zeros(); dom.mesh.n_nodes()];
            for (n, b) in self.dofs.primal[d].iter().enumerate() {
                if let Some(b) = *b {
                    u[n] = Vec2::new(x[b], x[b + 1]);
                    for c in 0..2 {
                        if self.fixed.contains_key(&(b + c)) {
                            reactions[d][n][c] = kx[b + c] - self.system.rhs[b + c];
                        }
                    }
                }
            }
            displacement.push(u);
        }
        let multipliers = self
            .tyings
            .iter()
            .enumerate()
            .map(|(ti, ts)| {
                (0..ts.interface.n_slots())
                    .map(|s| {
                        Vec2::new(x[self.dofs.lambda(ti, s, 0)], x[self.dofs.lambda(ti, s, 1)])
                    })
                    .collect()
            })
            .collect();
        let stress = model
            .domains
            .iter()
            .enumerate()
            .map(|(d, dom)| {
                pooled_stress(&dom.mesh, &self.cuts[d], &displacement[d], &dom.material)
            })
            .collect::<Result<Vec<_>>>()?;
        let solution = Solution {
            displacement,
            multipliers,
            stress,
            reactions,
            n_unknowns: sys.n,
            residual,
        };
        Ok(Analysis {
            prepared: self,
            solution,
        })
    }
}

/// Full pipeline.
pub fn analyze(model: &Model) -> Result<Analysis> {
    prepare(model)?.solve(model)
}

/// Gauss stresses of the integration mesh fitted on the domain mesh;
/// samples of split quads are pooled back into their source element.
pub fn pooled_stress(
    mesh: &Mesh,
    dc: &DomainCut,
    u: &[Vec2],
    material: &Material,
) -> Result<StressField> {
    let n = mesh.n_elements();
    let mut samples: Vec<Vec<StressSample>> = vec![Vec::new(); n];
    let mut gauss: Vec<Vec<(Vec2, Vector3<f64>)>> = vec![Vec::new(); n];
    for e in 0..dc.mesh.n_elements() {
        let Some(pts) = dc.cut.quadrature(&dc.mesh, e)? else {
            continue;
        };
        let el = &dc.mesh.elements[e];
        let x = dc.mesh.element_coords(e);
        let ue: Vec<Vec2> = el.nodes.iter().map(|&k| u[k]).collect();
        let o = dc.origin[e];
        let src = &mesh.elements[o];
        let xo = mesh.element_coords(o);
        for ip in &pts {
            let s = stress_at(el.kind, &x, &ue, material, ip.xi, e)?;
            let p = forward_map(el.kind, &x, ip.xi);
            let xi = if src.kind == el.kind {
                ip.xi
            } else {
                inverse_map_unchecked(src.kind, &xo, &p, o)?
            };
            samples[o].push(StressSample { xi, sigma: s });
            gauss[o].push((p, s));
        }
    }
    let fits: Vec<Option<Vec<Vector3<f64>>>> = samples
        .iter()
        .enumerate()
        .map(|(e, s)| (!s.is_empty()).then(|| fit_nodal_values(mesh.elements[e].kind, s)))
        .collect();
    Ok(StressField {
        gauss,
        nodal: average_to_nodes(mesh, &fits),
    })
}

/// Interface record at one mortar node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TractionRecord {
    pub node: usize,
    pub x: Vec2,
    pub arc_length: f64,
    /// Traction exerted by the host on the patch.
    pub traction: Vec2,
    /// Radial component about the projection center.
    pub radial: f64,
    /// Recovered patch stress at the node.
    pub sigma: Vector3<f64>,
}

impl Analysis {
    /// Nodal interface tractions of a tying. Linear multipliers are nodal
    /// values already; piecewise constant ones are averaged over the two
    /// adjacent edges weighted by length.
    pub fn nodal_tractions(&self, tying: usize) -> Vec<Vec2> {
        let ts = &self.prepared.tyings[tying];
        let chain = &ts.interface.chain;
        let lam = &self.solution.multipliers[tying];
        match ts.interface.dual {
            DualBasis::P1 => lam.iter().map(|l| -l).collect(),
            DualBasis::P0 => {
                let np = chain.nodes.len();
                let mut sum = vec![Vec2::zeros(); np];
                let mut w = vec![0.0; np];
                for e in 0..chain.n_edges() {
                    let h = chain.edge_length(e);
                    let (i, j) = chain.edge(e);
                    for p in [i, j] {
                        sum[p] -= lam[e] * h;
                        w[p] += h;
                    }
                }
                sum.into_iter().zip(w).map(|(s, w)| s / w).collect()
            }
        }
    }

    pub fn traction_profile(
        &self,
        model: &Model,
        tying: usize,
        center: Vec2,
    ) -> Result<Vec<TractionRecord>> {
        let t = &model.tyings[tying];
        let chain = &self.prepared.tyings[tying].interface.chain;
        let s = chain.arc_lengths();
        let tr = self.nodal_tractions(tying);
        let scale = chain.length();
        let stress = &self.solution.stress[t.patch];
        chain
            .nodes
            .iter()
            .enumerate()
            .map(|(i, &n)| {
                let x = chain.coords[i];
                let r = x - center;
                if r.norm() <= 1e-14 * scale {
                    return Err(Error::InvalidGeometry(format!(
                        "mortar node {n} sits on the projection center"
                    )));
                }
                let er = r / r.norm();
                Ok(TractionRecord {
                    node: n,
                    x,
                    arc_length: s[i],
                    traction: tr[i],
                    radial: tr[i].dot(&er),
                    sigma: stress.nodal_or_zero(n),
                })
            })
            .collect()
    }

    /// Patch stress at the mortar nodes of a tying.
    pub fn interface_stress(&self, model: &Model, tying: usize) -> Vec<Vector3<f64>> {
        let t = &model.tyings[tying];
        let chain = &self.prepared.tyings[tying].interface.chain;
        chain
            .nodes
            .iter()
            .map(|&n| self.solution.stress[t.patch].nodal_or_zero(n))
            .collect()
    }

    /// Total applied load and total reaction per component.
    pub fn resultants(&self) -> (Vec2, Vec2) {
        let f = self
            .prepared
            .loads
            .iter()
            .flatten()
            .fold(Vec2::zeros(), |a, v| a + v);
        let r = self
            .solution
            .reactions
            .iter()
            .flatten()
            .fold(Vec2::zeros(), |a, v| a + v);
        (f, r)
    }
}
