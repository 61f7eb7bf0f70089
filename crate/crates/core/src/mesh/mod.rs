//! Mesh data, shape functions, quadrature and structured generators.

mod generate;
pub mod io;
pub mod mapping;
pub mod quadrature;
pub mod shape;

use std::collections::BTreeMap;

pub use generate::{
    generate_disk_mesh, generate_ring_mesh, generate_structured_mesh, generate_tensor_mesh,
    geometric_spacing, square_loop, Distortion, Rect,
};
pub use mapping::{forward_map, inverse_map, jacobian};
pub use quadrature::GaussRule;
pub use shape::{shape_gradients, shape_values, ElementKind};

use crate::error::{Error, Result};
use crate::geom::{polygon_area, BBox, Vec2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub id: usize,
    pub x: Vec2,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Element {
    pub id: usize,
    pub kind: ElementKind,
    /// Counter-clockwise node ids.
    pub nodes: Vec<usize>,
}

/// Ordered node chain. Closed chains do not repeat the first node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polyline {
    pub nodes: Vec<usize>,
    pub closed: bool,
}

impl Polyline {
    pub fn open(nodes: Vec<usize>) -> Self {
        Polyline {
            nodes,
            closed: false,
        }
    }

    pub fn closed(nodes: Vec<usize>) -> Self {
        Polyline {
            nodes,
            closed: true,
        }
    }

    pub fn n_edges(&self) -> usize {
        if self.closed {
            self.nodes.len()
        } else {
            self.nodes.len().saturating_sub(1)
        }
    }

    /// Node pair of edge `e`.
    pub fn edge(&self, e: usize) -> (usize, usize) {
        (self.nodes[e], self.nodes[(e + 1) % self.nodes.len()])
    }

    pub fn reversed(&self) -> Self {
        let mut nodes = self.nodes.clone();
        nodes.reverse();
        if self.closed {
            nodes.rotate_right(1);
        }
        Polyline {
            nodes,
            closed: self.closed,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Mesh {
    pub nodes: Vec<Node>,
    pub elements: Vec<Element>,
    pub node_sets: BTreeMap<String, Vec<usize>>,
    pub polylines: BTreeMap<String, Polyline>,
}

impl Mesh {
    pub fn from_parts(coords: Vec<Vec2>, elements: Vec<(ElementKind, Vec<usize>)>) -> Result<Mesh> {
        let mesh = Mesh {
            nodes: coords
                .into_iter()
                .enumerate()
                .map(|(id, x)| Node { id, x })
                .collect(),
            elements: elements
                .into_iter()
                .enumerate()
                .map(|(id, (kind, nodes))| Element { id, kind, nodes })
                .collect(),
            ..Default::default()
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    #[inline]
    pub fn x(&self, node: usize) -> Vec2 {
        self.nodes[node].x
    }

    /// Nodal coordinates of element `e` in local order.
    pub fn element_coords(&self, e: usize) -> Vec<Vec2> {
        self.elements[e]
            .nodes
            .iter()
            .map(|&n| self.nodes[n].x)
            .collect()
    }

    pub fn element_area(&self, e: usize) -> f64 {
        polygon_area(&self.element_coords(e))
    }

    pub fn element_bbox(&self, e: usize) -> BBox {
        BBox::from_points(self.elements[e].nodes.iter().map(|&n| &self.nodes[n].x))
    }

    /// Longest distance between two nodes of the element.
    pub fn element_diameter(&self, e: usize) -> f64 {
        let x = self.element_coords(e);
        let mut d: f64 = 0.0;
        for i in 0..x.len() {
            for j in i + 1..x.len() {
                d = d.max((x[i] - x[j]).norm());
            }
        }
        d
    }

    pub fn bbox(&self) -> BBox {
        BBox::from_points(self.nodes.iter().map(|n| &n.x))
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_elements()).map(|e| self.element_area(e)).sum()
    }

    /// For every node, the elements that reference it (ascending).
    pub fn node_elements(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_nodes()];
        for el in &self.elements {
            for &n in &el.nodes {
                adj[n].push(el.id);
            }
        }
        adj
    }

    pub fn polyline(&self, name: &str) -> Result<&Polyline> {
        self.polylines
            .get(name)
            .ok_or_else(|| Error::InvalidArgument(format!("mesh has no polyline '{name}'")))
    }

    pub fn node_set(&self, name: &str) -> Result<&[usize]> {
        self.node_sets
            .get(name)
            .map(|v| v.as_slice())
            .ok_or_else(|| Error::InvalidArgument(format!("mesh has no node set '{name}'")))
    }

    pub fn polyline_coords(&self, p: &Polyline) -> Vec<Vec2> {
        p.nodes.iter().map(|&n| self.nodes[n].x).collect()
    }

    pub fn translate(&mut self, d: Vec2) {
        for n in &mut self.nodes {
            n.x += d;
        }
    }

    /// Check id contiguity, node references, node counts and orientation.
    pub fn validate(&self) -> Result<()> {
        for (i, n) in self.nodes.iter().enumerate() {
            if n.id != i {
                return Err(Error::InvalidGeometry(format!(
                    "node ids not contiguous at {i}"
                )));
            }
        }
        for (i, el) in self.elements.iter().enumerate() {
            if el.id != i {
                return Err(Error::InvalidGeometry(format!(
                    "element ids not contiguous at {i}"
                )));
            }
            if el.kind == ElementKind::Line2 || el.nodes.len() != el.kind.n_nodes() {
                return Err(Error::InvalidGeometry(format!(
                    "element {i}: bad node count for {}",
                    el.kind
                )));
            }
            if let Some(&bad) = el.nodes.iter().find(|&&n| n >= self.n_nodes()) {
                return Err(Error::InvalidGeometry(format!(
                    "element {i} references missing node {bad}"
                )));
            }
            let a = self.element_area(i);
            if a <= 0.0 {
                return Err(Error::DegenerateElement { element: i, det: a });
            }
        }
        for (name, ids) in &self.node_sets {
            if ids.iter().any(|&n| n >= self.n_nodes()) {
                return Err(Error::InvalidGeometry(format!(
                    "node set '{name}' references a missing node"
                )));
            }
        }
        for (name, p) in &self.polylines {
            if p.nodes.iter().any(|&n| n >= self.n_nodes()) {
                return Err(Error::InvalidGeometry(format!(
                    "polyline '{name}' references a missing node"
                )));
            }
            let mut seen = p.nodes.clone();
            seen.sort_unstable();
            seen.dedup();
            if seen.len() != p.nodes.len() || p.nodes.len() < 2 {
                return Err(Error::InvalidGeometry(format!(
                    "polyline '{name}' repeats nodes or is too short"
                )));
            }
        }
        Ok(())
    }

    /// Copy of the mesh where the listed Q4 elements are each split into two
    /// T3 along their local 0-2 diagonal. Node ids are preserved; element ids
    /// are renumbered. Returns the mesh and, for each new element, its source.
    pub fn split_quads(&self, which: &[bool]) -> (Mesh, Vec<usize>) {
        let mut elements = Vec::with_capacity(self.n_elements());
        let mut origin = Vec::with_capacity(self.n_elements());
        for el in &self.elements {
            if el.kind == ElementKind::Q4 && which[el.id] {
                let n = &el.nodes;
                for tri in [[n[0], n[1], n[2]], [n[0], n[2], n[3]]] {
                    elements.push(Element {
                        id: elements.len(),
                        kind: ElementKind::T3,
                        nodes: tri.to_vec(),
                    });
                    origin.push(el.id);
                }
            } else {
                elements.push(Element {
                    id: elements.len(),
                    kind: el.kind,
                    nodes: el.nodes.clone(),
                });
                origin.push(el.id);
            }
        }
        let mesh = Mesh {
            elements,
            ..self.clone()
        };
        (mesh, origin)
    }

    /// Nodes within `tol` of the given point.
    pub fn nodes_near(&self, p: Vec2, tol: f64) -> Vec<usize> {
        self.nodes
            .iter()
            .filter(|n| (n.x - p).norm() <= tol)
            .map(|n| n.id)
            .collect()
    }

    /// Nodes satisfying a coordinate predicate.
    pub fn nodes_where(&self, f: impl Fn(&Vec2) -> bool) -> Vec<usize> {
        self.nodes
            .iter()
            .filter(|n| f(&n.x))
            .map(|n| n.id)
            .collect()
    }
}
