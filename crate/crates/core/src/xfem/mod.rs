//! Selective integration of host elements cut by embedded patch footprints.

mod cells;
mod clip;
pub mod earclip;

use std::io::Write;

pub use cells::{build_integration_cells, IntegrationCell};
pub use earclip::ear_clip;

use crate::elasticity::{full_integration_points, IntegrationPoint};
use crate::error::{Error, Result};
use crate::geom::{
    cross, point_in_polygon, polygon_area, ring_self_intersects, BBox, BoxGrid, Vec2,
};
use crate::mesh::Mesh;

/// Snap length relative to the element diameter.
pub const SNAP_REL: f64 = 1e-10;
/// Polygon area threshold relative to the element area. Well above the
/// slivers a nudged footprint vertex can cut off a conforming element.
pub const AREA_REL: f64 = 1e-7;
/// Nudge of footprint vertices sitting on host nodes, relative to the local edge length.
pub const NUDGE_REL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Ring {
    /// Counter-clockwise vertices, first not repeated.
    pub pts: Vec<Vec2>,
    pub bbox: BBox,
}

/// 0/1 field over the host built from closed footprint rings.
#[derive(Debug, Clone)]
pub struct Indicator {
    pub rings: Vec<Ring>,
    /// Host keeps the outside of the rings when true (overlap removed),
    /// the inside otherwise.
    pub discard_inside: bool,
    edges: Vec<(usize, usize)>,
    grid: BoxGrid,
}

impl Indicator {
    pub fn new(rings: Vec<Vec<Vec2>>, discard_inside: bool) -> Result<Self> {
        let mut out = Vec::with_capacity(rings.len());
        for mut pts in rings {
            if pts.len() > 1 && pts.first() == pts.last() {
                pts.pop();
            }
            if pts.len() < 3 {
                return Err(Error::InvalidGeometry(
                    "footprint ring needs at least 3 vertices".into(),
                ));
            }
            if ring_self_intersects(&pts) {
                return Err(Error::InvalidGeometry(
                    "self-intersecting footprint ring".into(),
                ));
            }
            let a = polygon_area(&pts);
            if a == 0.0 {
                return Err(Error::InvalidGeometry(
                    "footprint ring has zero area".into(),
                ));
            }
            if a < 0.0 {
                pts.reverse();
            }
            let bbox = BBox::from_points(pts.iter());
            out.push(Ring { pts, bbox });
        }
        let mut edges = Vec::new();
        let mut boxes = Vec::new();
        let mut total = 0.0;
        for (r, ring) in out.iter().enumerate() {
            let n = ring.pts.len();
            for i in 0..n {
                let (a, b) = (ring.pts[i], ring.pts[(i + 1) % n]);
                total += (b - a).norm();
                edges.push((r, i));
                boxes.push(BBox::from_points([&a, &b]));
            }
        }
        let cell = if edges.is_empty() {
            1.0
        } else {
            2.0 * total / edges.len() as f64
        };
        let grid = BoxGrid::new(boxes, cell);
        Ok(Indicator {
            rings: out,
            discard_inside,
            edges,
            grid,
        })
    }

    /// Indicator that keeps the whole host.
    pub fn empty() -> Self {
        Self::new(Vec::new(), true).expect("empty indicator")
    }

    /// Moves ring vertices that coincide with host nodes a tiny step along
    /// the ring tangent.
    pub fn nudged(&self, host: &Mesh) -> Result<Self> {
        if self.rings.is_empty() {
            return Ok(self.clone());
        }
        let node_boxes: Vec<BBox> = host
            .nodes
            .iter()
            .map(|n| BBox { min: n.x, max: n.x })
            .collect();
        let h = host.bbox().diagonal() / (host.n_nodes() as f64).sqrt().max(1.0);
        let grid = BoxGrid::new(node_boxes, h);
        let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); host.n_nodes()];
        for el in &host.elements {
            let m = el.nodes.len();
            for i in 0..m {
                let (a, b) = (el.nodes[i], el.nodes[(i + 1) % m]);
                adjacency[a].push(b);
                adjacency[b].push(a);
            }
        }
        let mut rings = Vec::with_capacity(self.rings.len());
        for ring in &self.rings {
            let n = ring.pts.len();
            let mut pts = ring.pts.clone();
            for i in 0..n {
                let prev = ring.pts[(i + n - 1) % n];
                let next = ring.pts[(i + 1) % n];
                let p = ring.pts[i];
                let edge = (next - p).norm().min((p - prev).norm());
                let tol = 1e-10 * edge;
                let near = grid.query(&BBox { min: p, max: p }.inflate(tol));
                if let Some(&k) = near.iter().find(|&&k| (host.x(k) - p).norm() <= tol) {
                    // Sliding along a ring edge that lies on a host edge keeps that edge conforming.
                    let along = |q: Vec2| {
                        let d = q - p;
                        adjacency[k].iter().any(|&j| {
                            let e = host.x(j) - p;
                            cross(&d, &e).abs() <= 1e-10 * d.norm() * e.norm() && d.dot(&e) > 0.0
                        })
                    };
                    let t = if along(next) {
                        (next - p).normalize()
                    } else if along(prev) {
                        (prev - p).normalize()
                    } else {
                        (next - prev).normalize()
                    };
                    pts[i] = p + t * (NUDGE_REL * edge);
                    log::debug!(
                        "nudged footprint vertex ({:.6}, {:.6}) off a host node",
                        p.x,
                        p.y
                    );
                }
            }
            rings.push(pts);
        }
        Self::new(rings, self.discard_inside)
    }

    pub fn inside_any(&self, p: &Vec2) -> bool {
        self.rings
            .iter()
            .any(|r| r.bbox.contains(p) && point_in_polygon(p, &r.pts))
    }

    /// Indicator value: 1 on the retained side.
    pub fn value(&self, p: &Vec2) -> f64 {
        if self.inside_any(p) != self.discard_inside {
            1.0
        } else {
            0.0
        }
    }

    pub(crate) fn candidate_edges(&self, q: &BBox) -> Vec<(usize, usize)> {
        self.grid
            .query(q)
            .into_iter()
            .map(|k| self.edges[k])
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementClass {
    Standard,
    Blending,
    Discarded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexTag {
    HostNode,
    ClipIntersection,
    KinkPoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClipPolygon {
    /// Counter-clockwise vertices.
    pub vertices: Vec<Vec2>,
    pub tags: Vec<VertexTag>,
}

impl ClipPolygon {
    pub fn area(&self) -> f64 {
        polygon_area(&self.vertices)
    }
}

/// Retained and discarded parts of one element.
#[derive(Debug, Clone, Default)]
pub struct ElementSplit {
    pub retained: Vec<ClipPolygon>,
    pub discarded: Vec<ClipPolygon>,
}

fn whole(mesh: &Mesh, e: usize) -> ClipPolygon {
    let v = mesh.element_coords(e);
    ClipPolygon {
        tags: vec![VertexTag::HostNode; v.len()],
        vertices: v,
    }
}

/// Splits element `e` into its retained and discarded parts.
pub fn split_element(mesh: &Mesh, e: usize, ind: &Indicator) -> ElementSplit {
    let x = mesh.element_coords(e);
    let tol = SNAP_REL * mesh.element_diameter(e);
    let faces = clip::clip_faces(&x, ind, tol);
    if faces.is_empty() {
        let c = x.iter().sum::<Vec2>() / x.len() as f64;
        let mut s = ElementSplit::default();
        if ind.value(&c) > 0.5 {
            s.retained.push(whole(mesh, e));
        } else {
            s.discarded.push(whole(mesh, e));
        }
        return s;
    }
    let mut s = ElementSplit::default();
    for f in faces {
        let p = ClipPolygon {
            vertices: f.vertices,
            tags: f.tags,
        };
        if f.retained {
            s.retained.push(p);
        } else {
            s.discarded.push(p);
        }
    }
    s
}

/// Retained polygons of element `e`.
pub fn clip_element(mesh: &Mesh, e: usize, ind: &Indicator) -> Vec<ClipPolygon> {
    let a = mesh.element_area(e);
    split_element(mesh, e, ind)
        .retained
        .into_iter()
        .filter(|p| p.area() > AREA_REL * a)
        .collect()
}

fn classify_split(mesh: &Mesh, e: usize, s: &ElementSplit) -> ElementClass {
    let a = mesh.element_area(e);
    let kept: f64 = s.retained.iter().map(ClipPolygon::area).sum();
    let lost: f64 = s.discarded.iter().map(ClipPolygon::area).sum();
    if kept <= AREA_REL * a {
        ElementClass::Discarded
    } else if lost <= AREA_REL * a {
        ElementClass::Standard
    } else {
        ElementClass::Blending
    }
}

pub fn classify_elements(mesh: &Mesh, ind: &Indicator) -> Vec<ElementClass> {
    (0..mesh.n_elements())
        .map(|e| classify_split(mesh, e, &split_element(mesh, e, ind)))
        .collect()
}

/// Nodes all of whose elements are discarded.
pub fn orphan_nodes(mesh: &Mesh, classes: &[ElementClass]) -> Vec<usize> {
    let mut live = vec![false; mesh.n_nodes()];
    for el in &mesh.elements {
        if classes[el.id] != ElementClass::Discarded {
            for &n in &el.nodes {
                live[n] = true;
            }
        }
    }
    (0..mesh.n_nodes()).filter(|&n| !live[n]).collect()
}

/// Everything the assembly needs to know about a cut host mesh.
#[derive(Debug, Clone)]
pub struct CutState {
    pub classes: Vec<ElementClass>,
    /// Retained polygons per blending element (empty otherwise).
    pub polygons: Vec<Vec<ClipPolygon>>,
    pub cells: Vec<Vec<IntegrationCell>>,
    pub orphans: Vec<usize>,
}

impl CutState {
    pub fn uncut(mesh: &Mesh) -> Self {
        let n = mesh.n_elements();
        CutState {
            classes: vec![ElementClass::Standard; n],
            polygons: vec![Vec::new(); n],
            cells: vec![Vec::new(); n],
            orphans: orphan_nodes(mesh, &vec![ElementClass::Standard; n]),
        }
    }

    pub fn count(&self, class: ElementClass) -> usize {
        self.classes.iter().filter(|c| **c == class).count()
    }

    /// Quadrature of element `e`: full rule, cell points, or `None` if discarded.
    pub fn quadrature(&self, mesh: &Mesh, e: usize) -> Result<Option<Vec<IntegrationPoint>>> {
        Ok(match self.classes[e] {
            ElementClass::Standard => Some(full_integration_points(
                mesh.elements[e].kind,
                &mesh.element_coords(e),
                e,
            )?),
            ElementClass::Blending => Some(
                self.cells[e]
                    .iter()
                    .flat_map(|c| c.points.iter().copied())
                    .collect(),
            ),
            ElementClass::Discarded => None,
        })
    }

    pub fn retained_area(&self, mesh: &Mesh) -> f64 {
        (0..mesh.n_elements())
            .map(|e| match self.classes[e] {
                ElementClass::Standard => mesh.element_area(e),
                ElementClass::Blending => self.polygons[e].iter().map(ClipPolygon::area).sum(),
                ElementClass::Discarded => 0.0,
            })
            .sum()
    }
}

/// Classifies, clips and builds integration cells for every host element.
pub fn cut_mesh(mesh: &Mesh, ind: &Indicator) -> Result<CutState> {
    let ind = ind.nudged(mesh)?;
    let n = mesh.n_elements();
    let mut classes = Vec::with_capacity(n);
    let mut polygons = Vec::with_capacity(n);
    let mut cells = Vec::with_capacity(n);
    for e in 0..n {
        let s = split_element(mesh, e, &ind);
        let c = classify_split(mesh, e, &s);
        classes.push(c);
        if c == ElementClass::Blending {
            let a = mesh.element_area(e);
            let polys: Vec<ClipPolygon> = s
                .retained
                .into_iter()
                .filter(|p| p.area() > AREA_REL * a)
                .collect();
            cells.push(build_integration_cells(mesh, e, &polys)?);
            polygons.push(polys);
        } else {
            cells.push(Vec::new());
            polygons.push(Vec::new());
        }
    }
    let orphans = orphan_nodes(mesh, &classes);
    Ok(CutState {
        classes,
        polygons,
        cells,
        orphans,
    })
}

/// Host copy with blending Q4 split into two T3 along the local 0-2 diagonal,
/// plus the source element of each new element.
pub fn triangulate_blending_elements(mesh: &Mesh, classes: &[ElementClass]) -> (Mesh, Vec<usize>) {
    let mask: Vec<bool> = classes
        .iter()
        .map(|c| *c == ElementClass::Blending)
        .collect();
    mesh.split_quads(&mask)
}

/// Legacy-VTK polygon dump of the cut: whole standard and discarded elements
/// plus the retained polygons of blending elements.
pub fn write_cuts_vtk(mut w: impl Write, mesh: &Mesh, cut: &CutState) -> Result<()> {
    let mut polys: Vec<(usize, ElementClass, Vec<Vec2>)> = Vec::new();
    for e in 0..mesh.n_elements() {
        match cut.classes[e] {
            ElementClass::Blending => {
                for p in &cut.polygons[e] {
                    polys.push((e, ElementClass::Blending, p.vertices.clone()));
                }
            }
            c => polys.push((e, c, mesh.element_coords(e))),
        }
    }
    let npts: usize = polys.iter().map(|p| p.2.len()).sum();
    writeln!(
        w,
        "# vtk DataFile Version 3.0\ncut geometry\nASCII\nDATASET POLYDATA"
    )?;
    writeln!(w, "POINTS {npts} double")?;
    for (_, _, v) in &polys {
        for p in v {
            writeln!(w, "{:.12e} {:.12e} 0", p.x, p.y)?;
        }
    }
    writeln!(w, "POLYGONS {} {}", polys.len(), npts + polys.len())?;
    let mut k = 0;
    for (_, _, v) in &polys {
        let ids: Vec<String> = (k..k + v.len()).map(|i| i.to_string()).collect();
        writeln!(w, "{} {}", v.len(), ids.join(" "))?;
        k += v.len();
    }
    writeln!(
        w,
        "CELL_DATA {}\nSCALARS element int 1\nLOOKUP_TABLE default",
        polys.len()
    )?;
    for (e, _, _) in &polys {
        writeln!(w, "{e}")?;
    }
    writeln!(w, "SCALARS class int 1\nLOOKUP_TABLE default")?;
    for (_, c, _) in &polys {
        let code = match c {
            ElementClass::Standard => 0,
            ElementClass::Blending => 1,
            ElementClass::Discarded => 2,
        };
        writeln!(w, "{code}")?;
    }
    Ok(())
}
