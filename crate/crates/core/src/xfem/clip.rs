//! Clipping of a convex element by footprint rings.
//!
//! The element boundary, the ring pieces inside it and (for rings lying
//! wholly inside the element) two bridge segments are split at all mutual
//! intersections and snapped into a planar graph. Bounded faces of that graph
//! are traced with the face on the left; each face is then kept or dropped
//! according to the side of the ring it borders.

use std::collections::BTreeMap;

use super::{Indicator, VertexTag};
use crate::geom::{
    clip_segment_convex, orient, point_segment_distance, polygon_area, segment_intersection, BBox,
    Vec2,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Origin {
    Element,
    Ring { ring: usize },
    Bridge,
}

#[derive(Debug, Clone, Copy)]
struct Seg {
    a: Vec2,
    b: Vec2,
    origin: Origin,
    /// Whether `a`/`b` are ring vertices (kink points).
    kink: [bool; 2],
}

/// A traced face of the arrangement.
#[derive(Debug, Clone)]
pub(crate) struct Face {
    pub vertices: Vec<Vec2>,
    pub tags: Vec<VertexTag>,
    pub retained: bool,
}

struct Graph {
    pts: Vec<Vec2>,
    tags: Vec<VertexTag>,
    snap: f64,
    /// (lo, hi) -> ring id and whether the ring runs lo -> hi
    edges: BTreeMap<(usize, usize), Option<(usize, bool)>>,
}

impl Graph {
    fn node(&mut self, p: Vec2, tag: VertexTag) -> usize {
        if let Some(i) = self.pts.iter().position(|q| (q - p).norm() <= self.snap) {
            if rank(tag) > rank(self.tags[i]) {
                self.tags[i] = tag;
            }
            return i;
        }
        self.pts.push(p);
        self.tags.push(tag);
        self.pts.len() - 1
    }

    fn edge(&mut self, u: usize, v: usize, ring: Option<(usize, bool)>) {
        if u == v {
            return;
        }
        let key = (u.min(v), u.max(v));
        let dir = ring.map(|(r, fwd)| (r, if u < v { fwd } else { !fwd }));
        let slot = self.edges.entry(key).or_insert(None);
        if slot.is_none() {
            *slot = dir;
        }
    }
}

fn rank(t: VertexTag) -> u8 {
    match t {
        VertexTag::ClipIntersection => 0,
        VertexTag::KinkPoint => 1,
        VertexTag::HostNode => 2,
    }
}

/// Faces of element `x` (convex, counter-clockwise) cut by the indicator
/// rings. `tol` is the snapping length.
pub(crate) fn clip_faces(x: &[Vec2], ind: &Indicator, tol: f64) -> Vec<Face> {
    let n = x.len();
    let ebox = BBox::from_points(x.iter()).inflate(4.0 * tol);
    let mut segs: Vec<Seg> = (0..n)
        .map(|i| Seg {
            a: x[i],
            b: x[(i + 1) % n],
            origin: Origin::Element,
            kink: [false, false],
        })
        .collect();
    let mut touched = false;
    for (r, i) in ind.candidate_edges(&ebox) {
        let ring = &ind.rings[r];
        let (a, b) = (ring.pts[i], ring.pts[(i + 1) % ring.pts.len()]);
        if let Some((t0, t1)) = clip_segment_convex(&a, &b, x, tol) {
            let d = b - a;
            if (t1 - t0) * d.norm() <= tol {
                continue;
            }
            touched = true;
            segs.push(Seg {
                a: a + d * t0,
                b: a + d * t1,
                origin: Origin::Ring { ring: r },
                kink: [t0 == 0.0, t1 == 1.0],
            });
        }
    }
    if !touched {
        return Vec::new();
    }
    // rings wholly inside the element get two bridges to keep faces simple
    for ring in &ind.rings {
        if !ebox.overlaps(&ring.bbox) {
            continue;
        }
        let inside = ring.pts.iter().all(|p| {
            (0..n).all(|i| orient(&x[i], &x[(i + 1) % n], p) > tol * (x[(i + 1) % n] - x[i]).norm())
        });
        if !inside {
            continue;
        }
        let lo = ring
            .pts
            .iter()
            .copied()
            .min_by(|p, q| p.x.total_cmp(&q.x).then(p.y.total_cmp(&q.y)))
            .unwrap();
        let hi = ring
            .pts
            .iter()
            .copied()
            .max_by(|p, q| p.x.total_cmp(&q.x).then(p.y.total_cmp(&q.y)))
            .unwrap();
        for (p, dir) in [(lo, -1.0), (hi, 1.0)] {
            let far = p + Vec2::new(dir * 2.0 * ebox.diagonal(), 0.0);
            if let Some((t, _)) =
                (0..n).find_map(|i| segment_intersection(&p, &far, &x[i], &x[(i + 1) % n]))
            {
                segs.push(Seg {
                    a: p,
                    b: p + (far - p) * t,
                    origin: Origin::Bridge,
                    kink: [true, false],
                });
            }
        }
    }

    // split parameters
    let m = segs.len();
    let mut params: Vec<Vec<f64>> = vec![vec![0.0, 1.0]; m];
    for i in 0..m {
        for j in i + 1..m {
            let (s, t) = (&segs[i], &segs[j]);
            if let Some((u, v)) = segment_intersection(&s.a, &s.b, &t.a, &t.b) {
                params[i].push(u);
                params[j].push(v);
            }
            for (k, l) in [(i, j), (j, i)] {
                let (p, q) = (&segs[k], &segs[l]);
                for e in [p.a, p.b] {
                    let (d, tt) = point_segment_distance(&e, &q.a, &q.b);
                    if d <= tol {
                        params[l].push(tt);
                    }
                }
            }
        }
    }

    let mut g = Graph {
        pts: Vec::new(),
        tags: Vec::new(),
        snap: 2.0 * tol,
        edges: BTreeMap::new(),
    };
    // host vertices first so they win snapping
    for p in x {
        g.node(*p, VertexTag::HostNode);
    }
    for (k, s) in segs.iter().enumerate() {
        let ps = &mut params[k];
        ps.sort_by(f64::total_cmp);
        ps.dedup();
        let mut prev: Option<usize> = None;
        for &t in ps.iter() {
            let p = s.a + (s.b - s.a) * t;
            let tag = if (t == 0.0 && s.kink[0]) || (t == 1.0 && s.kink[1]) {
                VertexTag::KinkPoint
            } else {
                VertexTag::ClipIntersection
            };
            let id = g.node(p, tag);
            if let Some(u) = prev {
                let ring = match s.origin {
                    Origin::Ring { ring } => Some((ring, true)),
                    _ => None,
                };
                g.edge(u, id, ring);
            }
            prev = Some(id);
        }
    }
    trace(&g, x, ind)
}

fn trace(g: &Graph, x: &[Vec2], ind: &Indicator) -> Vec<Face> {
    let nn = g.pts.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nn];
    for &(u, v) in g.edges.keys() {
        adj[u].push(v);
        adj[v].push(u);
    }
    for (u, list) in adj.iter_mut().enumerate() {
        let pu = g.pts[u];
        list.sort_by(|&a, &b| {
            let da = g.pts[a] - pu;
            let db = g.pts[b] - pu;
            da.y.atan2(da.x).total_cmp(&db.y.atan2(db.x))
        });
    }
    let mut used: BTreeMap<(usize, usize), bool> = BTreeMap::new();
    let area_e = polygon_area(x);
    let mut faces = Vec::new();
    for &(a, b) in g.edges.keys() {
        for (u0, v0) in [(a, b), (b, a)] {
            if used.contains_key(&(u0, v0)) {
                continue;
            }
            let mut cycle = Vec::new();
            let (mut u, mut v) = (u0, v0);
            loop {
                used.insert((u, v), true);
                cycle.push(u);
                let list = &adj[v];
                let k = list
                    .iter()
                    .position(|&w| w == u)
                    .expect("reverse half-edge");
                let w = list[(k + list.len() - 1) % list.len()];
                u = v;
                v = w;
                if (u, v) == (u0, v0) {
                    break;
                }
                if cycle.len() > 4 * g.edges.len() + 8 {
                    break;
                }
            }
            let cycle = remove_spikes(cycle);
            if cycle.len() < 3 {
                continue;
            }
            let ring_dirs: Vec<(usize, bool)> = (0..cycle.len())
                .filter_map(|i| {
                    let (p, q) = (cycle[i], cycle[(i + 1) % cycle.len()]);
                    g.edges
                        .get(&(p.min(q), p.max(q)))
                        .copied()
                        .flatten()
                        .map(|(r, fwd)| (r, if p < q { fwd } else { !fwd }))
                })
                .collect();
            let verts: Vec<Vec2> = cycle.iter().map(|&i| g.pts[i]).collect();
            let area = polygon_area(&verts);
            if area <= 1e-12 * area_e {
                continue;
            }
            let inside = if ring_dirs.is_empty() {
                let c = interior_point(&verts);
                ind.inside_any(&c)
            } else {
                ring_dirs.iter().any(|&(_, fwd)| fwd)
            };
            let retained = inside != ind.discard_inside;
            faces.push(Face {
                tags: cycle.iter().map(|&i| g.tags[i]).collect(),
                vertices: verts,
                retained,
            });
        }
    }
    faces
}

/// Drops back-and-forth excursions `a b a` along dangling edges.
fn remove_spikes(mut c: Vec<usize>) -> Vec<usize> {
    loop {
        let n = c.len();
        if n < 3 {
            return c;
        }
        let hit = (0..n).find(|&i| c[(i + n - 1) % n] == c[(i + 1) % n]);
        match hit {
            Some(i) => {
                // remove the tip and one copy of the base
                let next = (i + 1) % n;
                let (a, b) = if i < next { (i, next) } else { (next, i) };
                c.remove(b);
                c.remove(a);
            }
            None => return c,
        }
    }
}

/// A point strictly inside a simple polygon (centroid of an ear).
pub(crate) fn interior_point(poly: &[Vec2]) -> Vec2 {
    if let Ok(t) = super::earclip::ear_clip(poly) {
        if let Some(best) = t.iter().max_by(|a, b| {
            let aa = orient(&poly[a[0]], &poly[a[1]], &poly[a[2]]);
            let bb = orient(&poly[b[0]], &poly[b[1]], &poly[b[2]]);
            aa.total_cmp(&bb)
        }) {
            return (poly[best[0]] + poly[best[1]] + poly[best[2]]) / 3.0;
        }
    }
    poly.iter().sum::<Vec2>() / poly.len() as f64
}
