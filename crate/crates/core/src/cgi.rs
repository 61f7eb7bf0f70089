//! Coarse-grained interpolation of interface multipliers.
//!
//! The chain is cut into super-segments of `kappa` mortar edges. Multipliers
//! at super-segment ends (masters) stay independent; interior ones (slaves)
//! follow the linear interpolant of their two masters in arc length.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::mortar::Segment;
use crate::xfem::ElementClass;

#[derive(Debug, Clone, PartialEq)]
pub struct SuperSegment {
    /// Chain positions from master to master (the last may wrap to 0).
    pub nodes: Vec<usize>,
    /// Arc-length coordinate in [-1, 1] per node.
    pub xi_cg: Vec<f64>,
}

impl SuperSegment {
    pub fn kappa(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn masters(&self) -> (usize, usize) {
        (self.nodes[0], *self.nodes.last().unwrap())
    }
}

/// Slave multiplier expressed through two masters; weights sum to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MpcConstraint {
    pub slave: usize,
    pub masters: [(usize, f64); 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshContrast {
    pub global: f64,
    /// Segments per blending host element.
    pub local: BTreeMap<usize, f64>,
}

pub fn compute_mesh_contrast(
    segments: &[Segment],
    classes: &[ElementClass],
) -> Result<MeshContrast> {
    let n_blend = classes
        .iter()
        .filter(|c| **c == ElementClass::Blending)
        .count();
    if n_blend == 0 {
        return Err(Error::UndefinedContrast);
    }
    let mut local: BTreeMap<usize, f64> = BTreeMap::new();
    for s in segments {
        if classes[s.host] == ElementClass::Blending {
            *local.entry(s.host).or_insert(0.0) += 1.0;
        }
    }
    Ok(MeshContrast {
        global: segments.len() as f64 / n_blend as f64,
        local,
    })
}

fn arc_xi(coords: &[Vec2], nodes: &[usize]) -> Vec<f64> {
    let mut s = vec![0.0; nodes.len()];
    for k in 1..nodes.len() {
        s[k] = s[k - 1] + (coords[nodes[k]] - coords[nodes[k - 1]]).norm();
    }
    let total = *s.last().unwrap();
    let mut xi: Vec<f64> = s.iter().map(|v| -1.0 + 2.0 * v / total).collect();
    *xi.last_mut().unwrap() = 1.0;
    xi
}

/// Chain start for closed chains: position of the lowest node id.
pub fn closed_start(node_ids: &[usize]) -> usize {
    (0..node_ids.len())
        .min_by_key(|&i| node_ids[i])
        .unwrap_or(0)
}

/// Partition with uniform `kappa`. Open chains have `n_edges + 1` positions,
/// closed chains `n_edges` (edge `i` joins `i` and `i+1 mod n`). The last
/// super-segment of an open chain takes the remainder; closed chains start
/// at `start` and wrap.
pub fn partition_supersegments(
    coords: &[Vec2],
    kappa: usize,
    closed: bool,
    start: usize,
) -> Result<Vec<SuperSegment>> {
    let n_edges = if closed {
        coords.len()
    } else {
        coords.len().saturating_sub(1)
    };
    let max = if closed {
        n_edges.saturating_sub(1)
    } else {
        n_edges
    };
    if kappa < 1 || kappa > max {
        return Err(Error::KappaOutOfRange { kappa, max });
    }
    partition_sizes(coords, &uniform_sizes(n_edges, kappa), closed, start)
}

/// Uniform partition restarted at every corner of the chain, so that no
/// slave interpolates across a kink. The edges touching a corner stay single
/// super-segments: a continuous multiplier cannot follow the traction jump
/// there, and spreading the corner value over `kappa` edges on both sides
/// pollutes the profile. Closed chains with corners start at `start`, which
/// should then be a corner.
pub fn partition_with_corners(
    coords: &[Vec2],
    kappa: usize,
    closed: bool,
    start: usize,
    corners: &[usize],
) -> Result<Vec<SuperSegment>> {
    let n = coords.len();
    let n_edges = if closed { n } else { n.saturating_sub(1) };
    let max = if closed {
        n_edges.saturating_sub(1)
    } else {
        n_edges
    };
    if kappa < 1 || kappa > max {
        return Err(Error::KappaOutOfRange { kappa, max });
    }
    let start = if closed { start } else { 0 };
    let breaks: Vec<usize> = corners.iter().map(|&c| (c + n - start) % n).collect();
    let corner_runs = !breaks.is_empty();
    let mut sizes: Vec<usize> = split_runs(n_edges, &breaks)
        .into_iter()
        .flat_map(|(_, len)| {
            if corner_runs {
                corner_run_sizes(len, |l| uniform_sizes(l, kappa))
            } else {
                uniform_sizes(len, kappa)
            }
        })
        .collect();
    if closed && sizes.len() < 2 {
        sizes = uniform_sizes(n_edges, kappa.min(n_edges - 1));
    }
    partition_sizes(coords, &sizes, closed, start)
}

/// Partition with explicit super-segment sizes (in edges) along the chain.
pub fn partition_sizes(
    coords: &[Vec2],
    sizes: &[usize],
    closed: bool,
    start: usize,
) -> Result<Vec<SuperSegment>> {
    let n = coords.len();
    let n_edges = if closed { n } else { n - 1 };
    if sizes.iter().sum::<usize>() != n_edges || sizes.iter().any(|&s| s == 0) {
        return Err(Error::InvalidArgument(
            "super-segment sizes must tile the chain".into(),
        ));
    }
    if closed && sizes.len() < 2 {
        return Err(Error::InvalidArgument(
            "a closed chain needs at least two super-segments".into(),
        ));
    }
    let start = if closed { start } else { 0 };
    let mut out = Vec::with_capacity(sizes.len());
    let mut pos = 0;
    for &k in sizes {
        let nodes: Vec<usize> = (pos..=pos + k).map(|p| (start + p) % n).collect();
        let xi_cg = arc_xi(coords, &nodes);
        out.push(SuperSegment { nodes, xi_cg });
        pos += k;
    }
    Ok(out)
}

/// MPC for the slave at local index `k` of `ss` (0 < k < kappa).
pub fn slave_weights(ss: &SuperSegment, node: usize) -> Result<MpcConstraint> {
    let k = ss.nodes[1..ss.nodes.len() - 1]
        .iter()
        .position(|&p| p == node)
        .ok_or_else(|| {
            Error::InvalidArgument(format!("node {node} is not a slave of this super-segment"))
        })?
        + 1;
    let xi = ss.xi_cg[k];
    let (m0, m1) = ss.masters();
    Ok(MpcConstraint {
        slave: node,
        masters: [(m0, 0.5 * (1.0 - xi)), (m1, 0.5 * (1.0 + xi))],
    })
}

/// Super-segments and the resulting constraints on chain-position slots.
#[derive(Debug, Clone, PartialEq)]
pub struct CgiLayout {
    pub supersegments: Vec<SuperSegment>,
    pub constraints: Vec<MpcConstraint>,
}

impl CgiLayout {
    pub fn new(supersegments: Vec<SuperSegment>) -> Result<Self> {
        let mut constraints = Vec::new();
        let mut seen = std::collections::BTreeSet::new();
        for ss in &supersegments {
            for &p in &ss.nodes[1..ss.nodes.len() - 1] {
                if !seen.insert(p) {
                    return Err(Error::InvalidArgument(format!(
                        "slave {p} constrained twice"
                    )));
                }
                constraints.push(slave_weights(ss, p)?);
            }
        }
        Ok(CgiLayout {
            supersegments,
            constraints,
        })
    }

    pub fn n_masters(&self, n_slots: usize) -> usize {
        n_slots - self.constraints.len()
    }
}

/// Super-segment sizes for the local mode: walking the chain, each
/// super-segment grows until it holds `ceil(local contrast)` edges of the
/// host elements it starts in.
pub fn local_sizes(n_edges: usize, edge_kappa: &[usize], closed: bool) -> Vec<usize> {
    let mut sizes = Vec::new();
    let mut pos = 0;
    while pos < n_edges {
        let k = edge_kappa[pos].max(1).min(n_edges - pos);
        sizes.push(k);
        pos += k;
    }
    if closed && sizes.len() < 2 {
        let k = sizes[0];
        sizes = vec![k - k / 2, k / 2];
    }
    sizes
}

/// Chain positions where the chain turns by more than `min_turn` radians.
/// Open chain ends are not reported.
pub fn corner_positions(coords: &[Vec2], closed: bool, min_turn: f64) -> Vec<usize> {
    let n = coords.len();
    let range = if closed { 0..n } else { 1..n.saturating_sub(1) };
    range
        .filter(|&i| {
            let a = coords[i] - coords[(i + n - 1) % n];
            let b = coords[(i + 1) % n] - coords[i];
            a.perp(&b).atan2(a.dot(&b)).abs() > min_turn
        })
        .collect()
}

/// Edge runs `(offset, length)` between break offsets along a chain of
/// `n_edges` edges counted from its start.
pub fn split_runs(n_edges: usize, breaks: &[usize]) -> Vec<(usize, usize)> {
    let mut cuts: Vec<usize> = breaks
        .iter()
        .copied()
        .filter(|&b| b > 0 && b < n_edges)
        .collect();
    cuts.sort_unstable();
    cuts.dedup();
    cuts.push(n_edges);
    let mut prev = 0;
    cuts.into_iter()
        .map(|c| {
            let r = (prev, c - prev);
            prev = c;
            r
        })
        .collect()
}

/// Sizes for a run between two corners: one edge at each end, `inner` for
/// the edges in between.
pub fn corner_run_sizes(len: usize, inner: impl FnOnce(usize) -> Vec<usize>) -> Vec<usize> {
    if len <= 2 {
        return vec![1; len];
    }
    let mut v = vec![1];
    v.extend(inner(len - 2));
    v.push(1);
    v
}

/// Sizes of `kappa` edges covering `len` edges, remainder last.
pub fn uniform_sizes(len: usize, kappa: usize) -> Vec<usize> {
    let mut v = vec![kappa; len / kappa];
    if len % kappa != 0 {
        v.push(len % kappa);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize) -> Vec<Vec2> {
        (0..=n).map(|i| Vec2::new(i as f64, 0.0)).collect()
    }

    #[test]
    fn twelve_by_four() {
        let s = partition_supersegments(&line(12), 4, false, 0).unwrap();
        let masters: Vec<usize> = std::iter::once(0)
            .chain(s.iter().map(|x| x.masters().1))
            .collect();
        assert_eq!(masters, vec![0, 4, 8, 12]);
    }

    #[test]
    fn remainder_goes_last() {
        let s = partition_supersegments(&line(10), 4, false, 0).unwrap();
        let sizes: Vec<usize> = s.iter().map(|x| x.kappa()).collect();
        assert_eq!(sizes, vec![4, 4, 2]);
        assert_eq!(sizes.iter().sum::<usize>(), 10);
    }

    #[test]
    fn kappa_one_has_no_slaves() {
        let s = partition_supersegments(&line(7), 1, false, 0).unwrap();
        assert!(CgiLayout::new(s).unwrap().constraints.is_empty());
    }

    #[test]
    fn kappa_range() {
        assert!(matches!(
            partition_supersegments(&line(5), 6, false, 0),
            Err(Error::KappaOutOfRange { .. })
        ));
        assert!(partition_supersegments(&line(5), 0, false, 0).is_err());
        let ring: Vec<Vec2> = line(5)[..5].to_vec();
        assert!(partition_supersegments(&ring, 5, true, 0).is_err());
        assert!(partition_supersegments(&ring, 4, true, 0).is_ok());
    }

    #[test]
    fn weights() {
        let s = partition_supersegments(&line(4), 4, false, 0).unwrap();
        let c = slave_weights(&s[0], 1).unwrap();
        assert_eq!(c.masters, [(0, 0.75), (4, 0.25)]);
        let mid = slave_weights(&s[0], 2).unwrap();
        assert_eq!(mid.masters, [(0, 0.5), (4, 0.5)]);
        assert!(slave_weights(&s[0], 4).is_err());
        // edge lengths 1 and 3
        let pts = [Vec2::new(0., 0.), Vec2::new(1., 0.), Vec2::new(4., 0.)];
        let s = partition_supersegments(&pts, 2, false, 0).unwrap();
        let c = slave_weights(&s[0], 1).unwrap();
        assert!((c.masters[0].1 - 0.75).abs() < 1e-15 && (c.masters[1].1 - 0.25).abs() < 1e-15);
    }

    #[test]
    fn closed_chain_wraps_to_first_master() {
        let ring: Vec<Vec2> = (0..8)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / 8.0;
                Vec2::new(t.cos(), t.sin())
            })
            .collect();
        let ids = [12, 13, 14, 3, 4, 5, 6, 7];
        let start = closed_start(&ids);
        assert_eq!(start, 3);
        let s = partition_supersegments(&ring, 3, true, start).unwrap();
        assert_eq!(
            s.iter().map(|x| x.kappa()).collect::<Vec<_>>(),
            vec![3, 3, 2]
        );
        assert_eq!(s[0].nodes[0], 3);
        assert_eq!(*s.last().unwrap().nodes.last().unwrap(), 3);
        let lay = CgiLayout::new(s).unwrap();
        assert_eq!(lay.n_masters(8), 3);
    }

    #[test]
    fn masters_decrease_with_kappa() {
        let mut prev = usize::MAX;
        for k in 1..=12 {
            let lay =
                CgiLayout::new(partition_supersegments(&line(12), k, false, 0).unwrap()).unwrap();
            let m = lay.n_masters(13);
            assert!(m <= prev);
            prev = m;
            for c in &lay.constraints {
                let s = c.masters[0].1 + c.masters[1].1;
                assert!((s - 1.0).abs() < 1e-15);
                assert!(c.masters.iter().all(|(_, w)| (0.0..=1.0).contains(w)));
            }
        }
    }

    #[test]
    fn contrast() {
        let seg = |host| Segment {
            edge: 0,
            xi_a: -1.0,
            xi_b: 1.0,
            host,
            a: Vec2::zeros(),
            b: Vec2::zeros(),
            tags: [crate::mortar::EndTag::KinkPoint; 2],
        };
        let segs: Vec<Segment> = (0..18).map(|i| seg(i / 6)).collect();
        let c = compute_mesh_contrast(&segs, &[ElementClass::Blending; 3]).unwrap();
        assert_eq!(c.global, 6.0);
        assert!(c.local.values().all(|v| *v == 6.0));
        assert!(matches!(
            compute_mesh_contrast(&segs, &[ElementClass::Standard; 3]),
            Err(Error::UndefinedContrast)
        ));
    }

    #[test]
    fn corners_of_a_square_loop() {
        let sq = crate::mesh::square_loop(1.0, 3);
        assert_eq!(corner_positions(&sq, true, 0.5), vec![0, 3, 6, 9]);
        assert_eq!(corner_positions(&sq[..5], false, 0.5), vec![3]);
        assert!(corner_positions(&line(6), false, 1e-9).is_empty());
    }

    #[test]
    fn partition_restarts_at_corners() {
        let sq = crate::mesh::square_loop(1.0, 5);
        let c = corner_positions(&sq, true, 0.5);
        let s = partition_with_corners(&sq, 3, true, 0, &c).unwrap();
        let sizes: Vec<usize> = s.iter().map(|x| x.kappa()).collect();
        assert_eq!(sizes, [1, 3, 1].repeat(4));
        let masters: Vec<usize> = s.iter().map(|x| x.masters().0).collect();
        for k in c {
            assert!(masters.contains(&k));
        }
        // no corners: plain uniform partition
        let a = partition_with_corners(&line(10), 4, false, 0, &[]).unwrap();
        assert_eq!(a, partition_supersegments(&line(10), 4, false, 0).unwrap());
    }

    #[test]
    fn runs_cover_the_chain() {
        assert_eq!(
            split_runs(10, &[0, 4, 4, 12, 7]),
            vec![(0, 4), (4, 3), (7, 3)]
        );
        assert_eq!(split_runs(5, &[]), vec![(0, 5)]);
    }
}
