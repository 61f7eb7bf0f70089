//! Mortar tying of a patch boundary chain to the volume interpolation of a
//! host mesh. The patch side carries the multipliers.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geom::{clip_segment_convex, BBox, BoxGrid, Vec2};
use crate::mesh::mapping::inverse_map_unchecked;
use crate::mesh::quadrature::line_rule;
use crate::mesh::{shape_values, ElementKind, Mesh, Polyline};
use crate::xfem::{ElementClass, Indicator};

/// Multiplier interpolation along each mortar edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DualBasis {
    /// One constant multiplier per edge.
    P0,
    /// Linear multipliers at the edge nodes.
    P1,
}

impl DualBasis {
    pub fn slots_per_edge(self) -> usize {
        match self {
            DualBasis::P0 => 1,
            DualBasis::P1 => 2,
        }
    }

    #[inline]
    pub fn values(self, xi: f64) -> [f64; 2] {
        match self {
            DualBasis::P0 => [1.0, 0.0],
            DualBasis::P1 => [0.5 * (1.0 - xi), 0.5 * (1.0 + xi)],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndTag {
    ClipIntersection,
    KinkPoint,
}

/// Straight piece of a mortar edge lying inside one host element.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    /// Mortar edge index along the chain.
    pub edge: usize,
    pub xi_a: f64,
    pub xi_b: f64,
    pub host: usize,
    pub a: Vec2,
    pub b: Vec2,
    pub tags: [EndTag; 2],
}

impl Segment {
    pub fn length(&self) -> f64 {
        (self.b - self.a).norm()
    }
}

/// Chain of patch nodes forming the mortar surface.
#[derive(Debug, Clone, PartialEq)]
pub struct MortarChain {
    /// Patch node ids in chain order.
    pub nodes: Vec<usize>,
    pub closed: bool,
    pub coords: Vec<Vec2>,
}

impl MortarChain {
    pub fn from_polyline(patch: &Mesh, p: &Polyline) -> Self {
        MortarChain {
            nodes: p.nodes.clone(),
            closed: p.closed,
            coords: patch.polyline_coords(p),
        }
    }

    pub fn n_edges(&self) -> usize {
        if self.closed {
            self.nodes.len()
        } else {
            self.nodes.len() - 1
        }
    }

    /// Chain positions of the ends of edge `e`.
    pub fn edge(&self, e: usize) -> (usize, usize) {
        (e, (e + 1) % self.nodes.len())
    }

    pub fn edge_coords(&self, e: usize) -> [Vec2; 2] {
        let (i, j) = self.edge(e);
        [self.coords[i], self.coords[j]]
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edge_coords(e);
        (b - a).norm()
    }

    /// Arc length at each chain position.
    pub fn arc_lengths(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.nodes.len()];
        for i in 1..self.nodes.len() {
            s[i] = s[i - 1] + (self.coords[i] - self.coords[i - 1]).norm();
        }
        s
    }

    pub fn length(&self) -> f64 {
        (0..self.n_edges()).map(|e| self.edge_length(e)).sum()
    }

    /// Multiplier slots of edge `e` for the given basis.
    pub fn slots(&self, e: usize, dual: DualBasis) -> Vec<usize> {
        match dual {
            DualBasis::P0 => vec![e],
            DualBasis::P1 => {
                let (i, j) = self.edge(e);
                vec![i, j]
            }
        }
    }

    pub fn n_slots(&self, dual: DualBasis) -> usize {
        match dual {
            DualBasis::P0 => self.n_edges(),
            DualBasis::P1 => self.nodes.len(),
        }
    }
}

/// Bucket grid over host element boxes.
pub fn element_index(host: &Mesh) -> BoxGrid {
    let boxes: Vec<BBox> = (0..host.n_elements())
        .map(|e| host.element_bbox(e))
        .collect();
    let mean = boxes.iter().map(|b| b.diagonal()).sum::<f64>() / boxes.len().max(1) as f64;
    BoxGrid::new(boxes, mean.max(f64::MIN_POSITIVE))
}

fn contains(host: &Mesh, e: usize, p: &Vec2, tol: f64) -> bool {
    let el = &host.elements[e];
    match inverse_map_unchecked(el.kind, &host.element_coords(e), p, e) {
        Ok(xi) => el.kind.parent_contains(xi, tol),
        Err(_) => false,
    }
}

/// Splits every mortar edge at host element boundaries. Each piece is owned by
/// the non-discarded element containing it; pieces running along element
/// edges go to the element on the retained side of the indicator.
pub fn build_segments(
    chain: &MortarChain,
    host: &Mesh,
    classes: &[ElementClass],
    indicator: &Indicator,
    index: &BoxGrid,
) -> Result<Vec<Segment>> {
    let mut out = Vec::new();
    for e in 0..chain.n_edges() {
        let [a, b] = chain.edge_coords(e);
        let len = (b - a).norm();
        if len == 0.0 {
            return Err(Error::InvalidGeometry(format!(
                "zero-length mortar edge {e}"
            )));
        }
        let ebox = BBox::from_points([&a, &b]).inflate(1e-9 * len);
        let cands: Vec<usize> = index
            .query(&ebox)
            .into_iter()
            .filter(|&h| classes[h] != ElementClass::Discarded)
            .collect();
        let mut ts = vec![0.0, 1.0];
        for &h in &cands {
            let x = host.element_coords(h);
            let tol = 1e-10 * host.element_diameter(h);
            if let Some((t0, t1)) = clip_segment_convex(&a, &b, &x, tol) {
                ts.push(t0.clamp(0.0, 1.0));
                ts.push(t1.clamp(0.0, 1.0));
            }
        }
        ts.sort_by(f64::total_cmp);
        let mut merged: Vec<f64> = Vec::with_capacity(ts.len());
        for t in ts {
            if merged.last().map_or(true, |&l| (t - l) * len > 1e-10 * len) {
                merged.push(t);
            } else if t == 1.0 {
                *merged.last_mut().unwrap() = 1.0;
            }
        }
        let normal = Vec2::new(b.y - a.y, a.x - b.x) / len; // right-hand side
        let before = out.len();
        for w in merged.windows(2) {
            let (t0, t1) = (w[0], w[1]);
            let mid = a + (b - a) * (0.5 * (t0 + t1));
            let hold: Vec<usize> = cands
                .iter()
                .copied()
                .filter(|&h| contains(host, h, &mid, 1e-9))
                .collect();
            if hold.is_empty() {
                continue;
            }
            let delta = 1e-6 * (t1 - t0) * len;
            let side = if indicator.value(&(mid + normal * delta)) > 0.5 {
                normal
            } else if indicator.value(&(mid - normal * delta)) > 0.5 {
                -normal
            } else {
                normal
            };
            let probe = mid + side * delta;
            let owner = hold
                .iter()
                .copied()
                .find(|&h| contains(host, h, &probe, 0.0))
                .unwrap_or(hold[0]);
            let tag = |t: f64| {
                if t == 0.0 || t == 1.0 {
                    EndTag::KinkPoint
                } else {
                    EndTag::ClipIntersection
                }
            };
            out.push(Segment {
                edge: e,
                xi_a: 2.0 * t0 - 1.0,
                xi_b: 2.0 * t1 - 1.0,
                host: owner,
                a: a + (b - a) * t0,
                b: a + (b - a) * t1,
                tags: [tag(t0), tag(t1)],
            });
        }
        if out.len() == before {
            return Err(Error::InvalidGeometry(format!(
                "mortar edge {e} ({:.6},{:.6})-({:.6},{:.6}) lies in no host element",
                a.x, a.y, b.x, b.y
            )));
        }
    }
    Ok(out)
}

/// Interface quadrature point seen from both sides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussMapping {
    pub gamma: f64,
    pub xi1: f64,
    pub host_xi: [f64; 2],
    pub x: Vec2,
    pub weight: f64,
    pub jseg: f64,
}

/// `xi1(gamma) = (1-gamma)/2 xi_a + (1+gamma)/2 xi_b`.
#[inline]
pub fn mortar_coordinate(xi_a: f64, xi_b: f64, gamma: f64) -> f64 {
    0.5 * (1.0 - gamma) * xi_a + 0.5 * (1.0 + gamma) * xi_b
}

/// Jacobian from the segment parent coordinate to arc length on a straight edge.
pub fn segment_jacobian(edge_length: f64, xi_a: f64, xi_b: f64) -> Result<f64> {
    if !(edge_length > 0.0) {
        return Err(Error::InvalidGeometry("zero-length mortar edge".into()));
    }
    Ok(0.5 * edge_length * 0.5 * (xi_b - xi_a))
}

pub fn map_gauss_points(
    seg: &Segment,
    chain: &MortarChain,
    host: &Mesh,
) -> Result<Vec<GaussMapping>> {
    let edge = chain.edge_coords(seg.edge);
    let el = &host.elements[seg.host];
    let xh = host.element_coords(seg.host);
    let jseg = segment_jacobian((edge[1] - edge[0]).norm(), seg.xi_a, seg.xi_b)?;
    line_rule(3)
        .iter()
        .map(|(g, w)| {
            let xi1 = mortar_coordinate(seg.xi_a, seg.xi_b, g[0]);
            let n = shape_values(ElementKind::Line2, [xi1, 0.0]);
            let x = edge[0] * n[0] + edge[1] * n[1];
            let host_xi = inverse_map_unchecked(el.kind, &xh, &x, seg.host)?;
            if el.kind.parent_excess(host_xi) > 1e-6 {
                return Err(Error::OutsideElement {
                    element: seg.host,
                    x: x.x,
                    y: x.y,
                });
            }
            Ok(GaussMapping {
                gamma: g[0],
                xi1,
                host_xi,
                x,
                weight: w,
                jseg,
            })
        })
        .collect()
}

/// One segment's coupling blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct MortarElement {
    /// Patch node ids of the mortar edge.
    pub edge_nodes: [usize; 2],
    /// Host (computation mesh) node ids.
    pub host_nodes: Vec<usize>,
    /// Multiplier slots (chain positions for P1, edge index for P0).
    pub slots: Vec<usize>,
    pub segment: Segment,
    /// L x 2
    pub d: DMatrix<f64>,
    /// L x N
    pub m: DMatrix<f64>,
}

pub fn compute_d(gauss: &[GaussMapping], dual: DualBasis) -> DMatrix<f64> {
    let l = dual.slots_per_edge();
    let mut d = DMatrix::zeros(l, 2);
    for g in gauss {
        let phi = dual.values(g.xi1);
        let n = shape_values(ElementKind::Line2, [g.xi1, 0.0]);
        for a in 0..l {
            for m in 0..2 {
                d[(a, m)] += g.weight * phi[a] * n[m] * g.jseg;
            }
        }
    }
    d
}

pub fn compute_m(gauss: &[GaussMapping], dual: DualBasis, host_kind: ElementKind) -> DMatrix<f64> {
    let l = dual.slots_per_edge();
    let nn = host_kind.n_nodes();
    let mut m = DMatrix::zeros(l, nn);
    for g in gauss {
        let phi = dual.values(g.xi1);
        let n = shape_values(host_kind, g.host_xi);
        for a in 0..l {
            for i in 0..nn {
                m[(a, i)] += g.weight * phi[a] * n[i] * g.jseg;
            }
        }
    }
    m
}

impl MortarElement {
    pub fn build(
        seg: &Segment,
        chain: &MortarChain,
        patch_nodes: [usize; 2],
        host: &Mesh,
        dual: DualBasis,
    ) -> Result<Self> {
        let gauss = map_gauss_points(seg, chain, host)?;
        let kind = host.elements[seg.host].kind;
        Ok(MortarElement {
            edge_nodes: patch_nodes,
            host_nodes: host.elements[seg.host].nodes.clone(),
            slots: chain.slots(seg.edge, dual),
            segment: seg.clone(),
            d: compute_d(&gauss, dual),
            m: compute_m(&gauss, dual, kind),
        })
    }

    pub fn n_slots(&self) -> usize {
        self.d.nrows()
    }

    /// Local dof count: 2 per patch node, host node and multiplier slot.
    pub fn n_dofs(&self) -> usize {
        2 * (2 + self.host_nodes.len() + self.n_slots())
    }

    /// Residual `[D^T L; -M^T L; D U1 - M U2]`, components interleaved per node.
    pub fn residual(&self, u1: &[Vec2], u2: &[Vec2], lam: &[Vec2]) -> Vec<f64> {
        let (l, nn) = (self.n_slots(), self.host_nodes.len());
        let mut r = vec![0.0; self.n_dofs()];
        for c in 0..2 {
            for m in 0..2 {
                r[2 * m + c] = (0..l).map(|a| self.d[(a, m)] * lam[a][c]).sum();
            }
            for i in 0..nn {
                r[4 + 2 * i + c] = -(0..l).map(|a| self.m[(a, i)] * lam[a][c]).sum::<f64>();
            }
            for a in 0..l {
                let du1: f64 = (0..2).map(|m| self.d[(a, m)] * u1[m][c]).sum();
                let du2: f64 = (0..nn).map(|i| self.m[(a, i)] * u2[i][c]).sum();
                r[4 + 2 * nn + 2 * a + c] = du1 - du2;
            }
        }
        r
    }

    /// Saddle tangent `[[0, 0, D^T], [0, 0, -M^T], [D, -M, 0]]`.
    pub fn tangent(&self) -> DMatrix<f64> {
        let (l, nn) = (self.n_slots(), self.host_nodes.len());
        let n = self.n_dofs();
        let mut k = DMatrix::zeros(n, n);
        let lam0 = 4 + 2 * nn;
        for a in 0..l {
            for c in 0..2 {
                let ra = lam0 + 2 * a + c;
                for m in 0..2 {
                    k[(ra, 2 * m + c)] = self.d[(a, m)];
                    k[(2 * m + c, ra)] = self.d[(a, m)];
                }
                for i in 0..nn {
                    k[(ra, 4 + 2 * i + c)] = -self.m[(a, i)];
                    k[(4 + 2 * i + c, ra)] = -self.m[(a, i)];
                }
            }
        }
        k
    }
}

/// Segments and mortar elements of one tied chain.
#[derive(Debug, Clone)]
pub struct MortarInterface {
    pub chain: MortarChain,
    pub dual: DualBasis,
    pub segments: Vec<Segment>,
    pub elements: Vec<MortarElement>,
}

impl MortarInterface {
    pub fn build(
        chain: MortarChain,
        host: &Mesh,
        classes: &[ElementClass],
        indicator: &Indicator,
        dual: DualBasis,
    ) -> Result<Self> {
        let index = element_index(host);
        let segments = build_segments(&chain, host, classes, indicator, &index)?;
        let elements = segments
            .iter()
            .map(|s| {
                let (i, j) = chain.edge(s.edge);
                MortarElement::build(s, &chain, [chain.nodes[i], chain.nodes[j]], host, dual)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MortarInterface {
            chain,
            dual,
            segments,
            elements,
        })
    }

    pub fn n_slots(&self) -> usize {
        self.chain.n_slots(self.dual)
    }

    /// Lumped `D` per slot: the integral of each multiplier basis function.
    pub fn lumped_d(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.n_slots()];
        for el in &self.elements {
            for (a, &s) in el.slots.iter().enumerate() {
                w[s] += el.d.row(a).sum();
            }
        }
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::quadrature::gauss_legendre;
    use crate::mesh::{generate_structured_mesh, Rect};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn chain(pts: &[Vec2]) -> MortarChain {
        MortarChain {
            nodes: (0..pts.len()).collect(),
            closed: false,
            coords: pts.to_vec(),
        }
    }

    fn no_cut() -> Indicator {
        Indicator::empty()
    }

    #[test]
    fn edge_inside_one_element() {
        let host = generate_structured_mesh(Rect::new(0., 0., 1., 1.), 1, 1, ElementKind::Q4, None)
            .unwrap();
        let c = chain(&[Vec2::new(0.2, 0.5), Vec2::new(0.8, 0.5)]);
        let s = build_segments(
            &c,
            &host,
            &[ElementClass::Blending],
            &no_cut(),
            &element_index(&host),
        )
        .unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!((s[0].xi_a, s[0].xi_b), (-1.0, 1.0));
        assert_eq!(s[0].tags, [EndTag::KinkPoint; 2]);
    }

    #[test]
    fn edge_crossing_one_border() {
        let host = generate_structured_mesh(Rect::new(0., 0., 2., 1.), 2, 1, ElementKind::Q4, None)
            .unwrap();
        let (a, b) = (Vec2::new(0.3, 0.2), Vec2::new(1.5, 0.8));
        let c = chain(&[a, b]);
        let cls = [ElementClass::Blending; 2];
        let s = build_segments(&c, &host, &cls, &no_cut(), &element_index(&host)).unwrap();
        assert_eq!(s.len(), 2);
        // exact crossing with x = 1
        let t = (1.0 - a.x) / (b.x - a.x);
        assert!((s[0].xi_b - (2.0 * t - 1.0)).abs() < 1e-14);
        assert_eq!(s[0].xi_b, s[1].xi_a);
        assert_eq!((s[0].host, s[1].host), (0, 1));
        assert_eq!(s[0].tags[1], EndTag::ClipIntersection);
        let total: f64 = s.iter().map(Segment::length).sum();
        assert!((total - (b - a).norm()).abs() < 1e-14);
    }

    #[test]
    fn eighteen_segments_over_three_elements() {
        // 16 mortar edges across 3 host elements -> 2 extra splits
        let host = generate_structured_mesh(Rect::new(0., 0., 3., 1.), 3, 1, ElementKind::Q4, None)
            .unwrap();
        let pts: Vec<Vec2> = (0..=16)
            .map(|i| Vec2::new(3.0 * i as f64 / 16.0, 0.4))
            .collect();
        let s = build_segments(
            &chain(&pts),
            &host,
            &[ElementClass::Blending; 3],
            &no_cut(),
            &element_index(&host),
        )
        .unwrap();
        assert_eq!(s.len(), 18);
        let mc = s.len() as f64 / 3.0;
        assert_eq!(mc, 6.0);
    }

    #[test]
    fn gauss_mapping_endpoints_and_jacobian() {
        assert_eq!(mortar_coordinate(-1.0, 1.0, 0.0), 0.0);
        assert_eq!(mortar_coordinate(0.0, 1.0, -1.0), 0.0);
        assert_eq!(mortar_coordinate(0.0, 1.0, 1.0), 1.0);
        assert_eq!(segment_jacobian(1.0, -1.0, 1.0).unwrap(), 0.5);
        assert_eq!(segment_jacobian(1.0, 0.0, 1.0).unwrap(), 0.25);
        assert!(segment_jacobian(0.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn aligned_edge_maps_onto_host_face() {
        let host = generate_structured_mesh(Rect::new(0., 0., 1., 1.), 1, 1, ElementKind::Q4, None)
            .unwrap();
        let c = chain(&[Vec2::new(0.0, 1.0), Vec2::new(1.0, 1.0)]);
        let s = build_segments(
            &c,
            &host,
            &[ElementClass::Standard],
            &no_cut(),
            &element_index(&host),
        )
        .unwrap();
        let g = map_gauss_points(&s[0], &c, &host).unwrap();
        let lsum: f64 = g.iter().map(|p| p.weight * p.jseg).sum();
        assert!((lsum - 1.0).abs() < 1e-15);
        for p in &g {
            assert!((p.host_xi[1] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn d_blocks_for_full_straight_edge() {
        let h = 1.7;
        let host = generate_structured_mesh(Rect::new(0., 0., 2., 1.), 1, 1, ElementKind::Q4, None)
            .unwrap();
        let c = chain(&[Vec2::new(0.1, 0.5), Vec2::new(0.1 + h, 0.5)]);
        let s = build_segments(
            &c,
            &host,
            &[ElementClass::Blending],
            &no_cut(),
            &element_index(&host),
        )
        .unwrap();
        let g = map_gauss_points(&s[0], &c, &host).unwrap();
        let d1 = compute_d(&g, DualBasis::P1);
        let exact = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]) * (h / 6.0);
        assert!((&d1 - exact).amax() < 1e-14);
        assert!((d1.row(0).sum() - h / 2.0).abs() < 1e-14);
        let d0 = compute_d(&g, DualBasis::P0);
        assert!((d0 - DMatrix::from_row_slice(1, 2, &[h / 2.0, h / 2.0])).amax() < 1e-14);
    }

    #[test]
    fn m_matches_refined_quadrature_on_distorted_quad() {
        let x = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 0.2),
            Vec2::new(1.9, 1.8),
            Vec2::new(-0.1, 1.0),
        ];
        let host = Mesh::from_parts(x.clone(), vec![(ElementKind::Q4, vec![0, 1, 2, 3])]).unwrap();
        let c = chain(&[Vec2::new(0.1, 0.6), Vec2::new(1.7, 1.1)]);
        let s = build_segments(
            &c,
            &host,
            &[ElementClass::Blending],
            &no_cut(),
            &element_index(&host),
        )
        .unwrap();
        let g = map_gauss_points(&s[0], &c, &host).unwrap();
        let m = compute_m(&g, DualBasis::P1, ElementKind::Q4);
        // oracle: 20-point rule along the physical edge
        let (gx, gw) = gauss_legendre(20);
        let h = (c.coords[1] - c.coords[0]).norm();
        let mut o = DMatrix::zeros(2, 4);
        for (z, w) in gx.iter().zip(&gw) {
            let phi = [0.5 * (1.0 - z), 0.5 * (1.0 + z)];
            let p = c.coords[0] * phi[0] + c.coords[1] * phi[1];
            let xi = crate::mesh::inverse_map(ElementKind::Q4, &x, &p, 0).unwrap();
            let n = shape_values(ElementKind::Q4, xi);
            for a in 0..2 {
                for i in 0..4 {
                    o[(a, i)] += w * phi[a] * n[i] * h / 2.0;
                }
            }
        }
        // the host shape restricted to a straight physical line is not
        // polynomial for a non-parallelogram, so the 3-point rule is close
        // but not exact; the row sums are exact
        assert!((&m - &o).amax() < 1e-3 * o.amax());
        let d = compute_d(&g, DualBasis::P1);
        for a in 0..2 {
            assert!((m.row(a).sum() - d.row(a).sum()).abs() < 1e-13 * d.row(a).sum());
        }
    }

    #[test]
    fn m_exact_on_parallelogram() {
        let x = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 0.3),
            Vec2::new(2.5, 1.8),
            Vec2::new(0.5, 1.5),
        ];
        let host = Mesh::from_parts(x.clone(), vec![(ElementKind::Q4, vec![0, 1, 2, 3])]).unwrap();
        let c = chain(&[Vec2::new(0.4, 0.5), Vec2::new(2.0, 1.2)]);
        let s = build_segments(
            &c,
            &host,
            &[ElementClass::Blending],
            &no_cut(),
            &element_index(&host),
        )
        .unwrap();
        let g = map_gauss_points(&s[0], &c, &host).unwrap();
        let m = compute_m(&g, DualBasis::P1, ElementKind::Q4);
        let (gx, gw) = gauss_legendre(20);
        let h = (c.coords[1] - c.coords[0]).norm();
        let mut o = DMatrix::zeros(2, 4);
        for (z, w) in gx.iter().zip(&gw) {
            let phi = [0.5 * (1.0 - z), 0.5 * (1.0 + z)];
            let p = c.coords[0] * phi[0] + c.coords[1] * phi[1];
            let xi = crate::mesh::inverse_map(ElementKind::Q4, &x, &p, 0).unwrap();
            let n = shape_values(ElementKind::Q4, xi);
            for a in 0..2 {
                for i in 0..4 {
                    o[(a, i)] += w * phi[a] * n[i] * h / 2.0;
                }
            }
        }
        assert!((m - o).amax() < 1e-10);
    }

    fn random_element(rng: &mut ChaCha8Rng, dual: DualBasis) -> (MortarElement, Mesh) {
        let j = |r: &mut ChaCha8Rng| r.gen_range(-0.15..0.15);
        let x = vec![
            Vec2::new(j(rng), j(rng)),
            Vec2::new(1.0 + j(rng), j(rng)),
            Vec2::new(1.0 + j(rng), 1.0 + j(rng)),
            Vec2::new(j(rng), 1.0 + j(rng)),
        ];
        let host = Mesh::from_parts(x, vec![(ElementKind::Q4, vec![0, 1, 2, 3])]).unwrap();
        let a = Vec2::new(rng.gen_range(0.25..0.4), rng.gen_range(0.25..0.75));
        let b = Vec2::new(rng.gen_range(0.6..0.75), rng.gen_range(0.25..0.75));
        let c = chain(&[a, b]);
        let s = build_segments(
            &c,
            &host,
            &[ElementClass::Blending],
            &no_cut(),
            &element_index(&host),
        )
        .unwrap();
        (
            MortarElement::build(&s[0], &c, [0, 1], &host, dual).unwrap(),
            host,
        )
    }

    #[test]
    fn row_sums_match_on_random_configurations() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for k in 0..200 {
            let dual = if k % 2 == 0 {
                DualBasis::P1
            } else {
                DualBasis::P0
            };
            let (el, _) = random_element(&mut rng, dual);
            for a in 0..el.n_slots() {
                let (sm, sd) = (el.m.row(a).sum(), el.d.row(a).sum());
                assert!((sm - sd).abs() <= 1e-13 * sd.abs());
            }
        }
    }

    #[test]
    fn residual_tangent_and_lagrangian_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (el, _) = random_element(&mut rng, DualBasis::P1);
        let n = el.n_dofs();
        let k = el.tangent();
        assert_eq!(k, k.transpose());
        // zero primal-primal and dual-dual blocks
        let lam0 = 4 + 2 * el.host_nodes.len();
        for i in 0..n {
            for j in 0..n {
                if (i < lam0) == (j < lam0) {
                    assert_eq!(k[(i, j)], 0.0);
                }
            }
        }
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let split = |x: &[f64]| {
            let v = |s: &[f64]| {
                s.chunks(2)
                    .map(|c| Vec2::new(c[0], c[1]))
                    .collect::<Vec<_>>()
            };
            (v(&x[..4]), v(&x[4..lam0]), v(&x[lam0..]))
        };
        let (u1, u2, l) = split(&x);
        let r = el.residual(&u1, &u2, &l);
        let kx = &k * nalgebra::DVector::from_column_slice(&x);
        for i in 0..n {
            assert!((r[i] - kx[i]).abs() < 1e-14);
        }
        // central differences of the bilinear Lagrangian L = lam . (D U1 - M U2)
        let lag = |x: &[f64]| {
            let (u1, u2, l) = split(x);
            let r = el.residual(&u1, &u2, &l);
            (0..l.len() * 2)
                .map(|i| x[lam0 + i] * r[lam0 + i])
                .sum::<f64>()
        };
        let h = 1e-6;
        for i in 0..n {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let fd = (lag(&xp) - lag(&xm)) / (2.0 * h);
            assert!((fd - r[i]).abs() < 1e-8, "dof {i}: {fd} vs {}", r[i]);
        }
        // rigid translation satisfies the constraint rows
        let t = Vec2::new(0.3, -0.7);
        let r = el.residual(&[t; 2], &vec![t; el.host_nodes.len()], &[Vec2::zeros(); 2]);
        assert!(r.iter().all(|v| v.abs() < 1e-15));
        assert!(r[..lam0].iter().all(|v| *v == 0.0));
    }
}
