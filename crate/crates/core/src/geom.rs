//! Planar geometry primitives shared by the cutting and mortar stages.

use nalgebra::Vector2;

pub type Vec2 = Vector2<f64>;

#[inline]
pub fn cross(a: &Vec2, b: &Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Twice the signed area of triangle (a, b, c); positive when counter-clockwise.
#[inline]
pub fn orient(a: &Vec2, b: &Vec2, c: &Vec2) -> f64 {
    cross(&(b - a), &(c - a))
}

/// Signed area by the shoelace formula.
pub fn polygon_area(pts: &[Vec2]) -> f64 {
    let n = pts.len();
    if n < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..n {
        s += cross(&pts[i], &pts[(i + 1) % n]);
    }
    0.5 * s
}

pub fn polygon_centroid(pts: &[Vec2]) -> Vec2 {
    let n = pts.len();
    let a = polygon_area(pts);
    if a.abs() < f64::MIN_POSITIVE {
        return pts.iter().sum::<Vec2>() / n as f64;
    }
    let mut c = Vec2::zeros();
    for i in 0..n {
        let p = pts[i];
        let q = pts[(i + 1) % n];
        c += (p + q) * cross(&p, &q);
    }
    c / (6.0 * a)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub min: Vec2,
    pub max: Vec2,
}

impl BBox {
    pub fn empty() -> Self {
        BBox {
            min: Vec2::new(f64::INFINITY, f64::INFINITY),
            max: Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    pub fn from_points<'a>(pts: impl IntoIterator<Item = &'a Vec2>) -> Self {
        let mut b = Self::empty();
        for p in pts {
            b.include(p);
        }
        b
    }

    pub fn include(&mut self, p: &Vec2) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn inflate(mut self, d: f64) -> Self {
        self.min -= Vec2::new(d, d);
        self.max += Vec2::new(d, d);
        self
    }

    pub fn contains(&self, p: &Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn overlaps(&self, o: &BBox) -> bool {
        self.min.x <= o.max.x
            && o.min.x <= self.max.x
            && self.min.y <= o.max.y
            && o.min.y <= self.max.y
    }

    pub fn diagonal(&self) -> f64 {
        (self.max - self.min).norm()
    }
}

/// Even-odd point-in-polygon test for a closed ring.
pub fn point_in_polygon(p: &Vec2, ring: &[Vec2]) -> bool {
    let n = ring.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let a = ring[i];
        let b = ring[j];
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Parameter interval `[t0, t1]` of segment `a + t (b - a)`, `t in [0, 1]`,
/// lying inside a convex counter-clockwise polygon (Cyrus-Beck).
pub fn clip_segment_convex(a: &Vec2, b: &Vec2, poly: &[Vec2], tol: f64) -> Option<(f64, f64)> {
    // `tol` only decides acceptance; the returned parameters are exact where possible
    let d = b - a;
    let (mut t0, mut t1) = (0.0_f64, 1.0_f64);
    let (mut e0, mut e1) = (0.0_f64, 1.0_f64);
    let n = poly.len();
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let e = q - p;
        let len = e.norm();
        // inward distance: cross(e, x - p) / |e| >= -tol
        let dist = cross(&e, &(a - p)) / len;
        let num = dist + tol;
        let den = cross(&e, &d) / len;
        if den.abs() < 1e-300 {
            if num < 0.0 {
                return None;
            }
            continue;
        }
        let t = -num / den;
        let te = -dist / den;
        if den > 0.0 {
            t0 = t0.max(t);
            e0 = e0.max(te);
        } else {
            t1 = t1.min(t);
            e1 = e1.min(te);
        }
        if t0 > t1 {
            return None;
        }
    }
    if e0 <= e1 {
        Some((e0, e1))
    } else {
        Some((t0, t1))
    }
}

/// Intersection of segments `p + s (q - p)` and `a + t (b - a)`; returns `(s, t)`
/// for properly intersecting, non-parallel segments.
pub fn segment_intersection(p: &Vec2, q: &Vec2, a: &Vec2, b: &Vec2) -> Option<(f64, f64)> {
    let r = q - p;
    let s = b - a;
    let den = cross(&r, &s);
    if den.abs() <= 1e-14 * r.norm() * s.norm() {
        return None;
    }
    let w = a - p;
    let t_pq = cross(&w, &s) / den;
    let t_ab = cross(&w, &r) / den;
    if (0.0..=1.0).contains(&t_pq) && (0.0..=1.0).contains(&t_ab) {
        Some((t_pq, t_ab))
    } else {
        None
    }
}

/// Distance from point `p` to the segment `[a, b]` and the clamped parameter.
pub fn point_segment_distance(p: &Vec2, a: &Vec2, b: &Vec2) -> (f64, f64) {
    let d = b - a;
    let l2 = d.norm_squared();
    if l2 == 0.0 {
        return ((p - a).norm(), 0.0);
    }
    let t = ((p - a).dot(&d) / l2).clamp(0.0, 1.0);
    ((a + d * t - p).norm(), t)
}

/// Whether the closed ring has two non-adjacent edges that intersect.
pub fn ring_self_intersects(ring: &[Vec2]) -> bool {
    let n = ring.len();
    if n < 4 {
        return false;
    }
    let bbs: Vec<BBox> = (0..n)
        .map(|i| BBox::from_points([&ring[i], &ring[(i + 1) % n]]))
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| bbs[i].min.x.total_cmp(&bbs[j].min.x));
    for (k, &i) in order.iter().enumerate() {
        for &j in &order[k + 1..] {
            if bbs[j].min.x > bbs[i].max.x {
                break;
            }
            if i.abs_diff(j) <= 1 || i.abs_diff(j) == n - 1 || !bbs[i].overlaps(&bbs[j]) {
                continue;
            }
            if segment_intersection(&ring[i], &ring[(i + 1) % n], &ring[j], &ring[(j + 1) % n])
                .is_some()
            {
                return true;
            }
        }
    }
    false
}


/// Uniform bucket grid over axis-aligned boxes, for candidate queries.
#[derive(Debug, Clone)]
pub struct BoxGrid {
    origin: Vec2,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
    boxes: Vec<BBox>,
}

impl BoxGrid {
    /// `cell` is the bucket size; pick it near the typical box extent.
    pub fn new(boxes: Vec<BBox>, cell: f64) -> Self {
        let mut all = BBox::empty();
        for b in &boxes {
            all.include(&b.min);
            all.include(&b.max);
        }
        if boxes.is_empty() {
            all = BBox {
                min: Vec2::zeros(),
                max: Vec2::zeros(),
            };
        }
        let span = all.max - all.min;
        let mut cell = cell.max(1e-300);
        // cap the bucket count
        while (span.x / cell).ceil() * (span.y / cell).ceil() > 4.0e6 {
            cell *= 2.0;
        }
        let nx = ((span.x / cell).floor() as usize + 1).max(1);
        let ny = ((span.y / cell).floor() as usize + 1).max(1);
        let mut g = BoxGrid {
            origin: all.min,
            cell,
            nx,
            ny,
            buckets: vec![Vec::new(); nx * ny],
            boxes: Vec::new(),
        };
        for (i, b) in boxes.iter().enumerate() {
            let (i0, j0, i1, j1) = g.range(b);
            for j in j0..=j1 {
                for k in i0..=i1 {
                    g.buckets[j * nx + k].push(i);
                }
            }
        }
        g.boxes = boxes;
        g
    }

    fn range(&self, b: &BBox) -> (usize, usize, usize, usize) {
        let f = |v: f64, n: usize| -> usize {
            (v / self.cell).floor().clamp(0.0, (n - 1) as f64) as usize
        };
        let lo = b.min - self.origin;
        let hi = b.max - self.origin;
        (
            f(lo.x, self.nx),
            f(lo.y, self.ny),
            f(hi.x, self.nx),
            f(hi.y, self.ny),
        )
    }

    /// Ids of boxes overlapping `q`, ascending.
    pub fn query(&self, q: &BBox) -> Vec<usize> {
        let mut out = Vec::new();
        if self.boxes.is_empty() {
            return out;
        }
        let (i0, j0, i1, j1) = self.range(q);
        for j in j0..=j1 {
            for k in i0..=i1 {
                for &id in &self.buckets[j * self.nx + k] {
                    if self.boxes[id].overlaps(q) {
                        out.push(id);
                    }
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn query_point(&self, p: &Vec2) -> Vec<usize> {
        self.query(&BBox { min: *p, max: *p })
    }
}
