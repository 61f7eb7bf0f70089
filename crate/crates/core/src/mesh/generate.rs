use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ElementKind, Mesh, Polyline};
use crate::error::{Error, Result};
use crate::geom::Vec2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Rect { x0, y0, x1, y1 }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }
}

/// Seeded jitter of interior nodes, `amplitude` in length units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distortion {
    pub seed: u64,
    pub amplitude: f64,
}

/// Uniform `nx x ny` grid over `rect`. T3 meshes split every cell along its
/// lower-left to upper-right diagonal.
///
/// Registered polylines run counter-clockwise around the rectangle:
/// `bottom` (left to right), `right` (bottom to top), `top` (right to left),
/// `left` (top to bottom) and the closed `boundary`. Node sets carry the same
/// names plus `corner_ll`, `corner_lr`, `corner_ur`, `corner_ul`.
pub fn generate_structured_mesh(
    rect: Rect,
    nx: usize,
    ny: usize,
    kind: ElementKind,
    distortion: Option<Distortion>,
) -> Result<Mesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidArgument(
            "structured mesh needs nx, ny >= 1".into(),
        ));
    }
    if rect.width().partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater)
        || rect.height().partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater)
    {
        return Err(Error::InvalidGeometry(format!(
            "degenerate rectangle {rect:?}"
        )));
    }
    let xs: Vec<f64> = (0..=nx)
        .map(|i| rect.x0 + rect.width() * i as f64 / nx as f64)
        .collect();
    let ys: Vec<f64> = (0..=ny)
        .map(|j| rect.y0 + rect.height() * j as f64 / ny as f64)
        .collect();
    let mut mesh = generate_tensor_mesh(&xs, &ys, kind)?;
    if let Some(d) = distortion {
        let hmin = (rect.width() / nx as f64).min(rect.height() / ny as f64);
        if !(0.0..0.5 * hmin).contains(&d.amplitude) {
            return Err(Error::InvalidArgument(format!(
                "distortion amplitude {} must be below half the element size {}",
                d.amplitude,
                0.5 * hmin
            )));
        }
        if d.amplitude > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(d.seed);
            for j in 1..ny {
                for i in 1..nx {
                    let dx = rng.gen_range(-d.amplitude..=d.amplitude);
                    let dy = rng.gen_range(-d.amplitude..=d.amplitude);
                    mesh.nodes[j * (nx + 1) + i].x += Vec2::new(dx, dy);
                }
            }
        }
        mesh.validate()?;
    }
    Ok(mesh)
}

/// Tensor-product grid on the given (strictly increasing) coordinate lines.
pub fn generate_tensor_mesh(xs: &[f64], ys: &[f64], kind: ElementKind) -> Result<Mesh> {
    let (nx, ny) = (xs.len().saturating_sub(1), ys.len().saturating_sub(1));
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidArgument(
            "tensor mesh needs at least two lines per direction".into(),
        ));
    }
    if xs.windows(2).any(|w| w[1] <= w[0]) || ys.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGeometry(
            "grid lines must be strictly increasing".into(),
        ));
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut coords = Vec::with_capacity((nx + 1) * (ny + 1));
    for y in ys {
        for x in xs {
            coords.push(Vec2::new(*x, *y));
        }
    }
    let mut elements = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let q = [id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)];
            match kind {
                ElementKind::Q4 => elements.push((kind, q.to_vec())),
                ElementKind::T3 => {
                    elements.push((kind, vec![q[0], q[1], q[2]]));
                    elements.push((kind, vec![q[0], q[2], q[3]]));
                }
                ElementKind::Line2 => {
                    return Err(Error::InvalidArgument(
                        "cannot generate a 2D grid of line elements".into(),
                    ))
                }
            }
        }
    }
    let mut mesh = Mesh::from_parts(coords, elements)?;
    let bottom: Vec<usize> = (0..=nx).map(|i| id(i, 0)).collect();
    let right: Vec<usize> = (0..=ny).map(|j| id(nx, j)).collect();
    let top: Vec<usize> = (0..=nx).rev().map(|i| id(i, ny)).collect();
    let left: Vec<usize> = (0..=ny).rev().map(|j| id(0, j)).collect();
    let mut ring = bottom[..nx].to_vec();
    ring.extend_from_slice(&right[..ny]);
    ring.extend_from_slice(&top[..nx]);
    ring.extend_from_slice(&left[..ny]);
    for (name, ids) in [
        ("bottom", &bottom),
        ("right", &right),
        ("top", &top),
        ("left", &left),
    ] {
        mesh.node_sets.insert(name.into(), ids.clone());
        mesh.polylines
            .insert(name.into(), Polyline::open(ids.clone()));
    }
    mesh.node_sets.insert("boundary".into(), ring.clone());
    mesh.polylines
        .insert("boundary".into(), Polyline::closed(ring));
    mesh.node_sets.insert("corner_ll".into(), vec![id(0, 0)]);
    mesh.node_sets.insert("corner_lr".into(), vec![id(nx, 0)]);
    mesh.node_sets.insert("corner_ur".into(), vec![id(nx, ny)]);
    mesh.node_sets.insert("corner_ul".into(), vec![id(0, ny)]);
    mesh.validate()?;
    Ok(mesh)
}

/// Grid lines on `[a, b]`: uniform spacing `h_fine` over `[fa, fb]`, growing
/// geometrically by `growth` (capped at `h_max`) towards both ends.
pub fn geometric_spacing(
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    h_fine: f64,
    growth: f64,
    h_max: f64,
) -> Vec<f64> {
    assert!(a <= fa && fa < fb && fb <= b && h_fine > 0.0 && growth >= 1.0);
    let n_fine = ((fb - fa) / h_fine).round().max(1.0) as usize;
    let steps = |len: f64| -> Vec<f64> {
        if len <= 1e-12 * (b - a) {
            return Vec::new();
        }
        let mut s = Vec::new();
        let mut h = h_fine;
        let mut sum = 0.0;
        while sum < len {
            h = (h * growth).min(h_max.max(h_fine));
            s.push(h);
            sum += h;
        }
        let last = *s.last().unwrap();
        if s.len() > 1 && sum - len > 0.5 * last {
            s.pop();
            sum -= last;
        }
        let scale = len / sum;
        s.iter().map(|v| v * scale).collect()
    };
    let mut lines = Vec::new();
    let left = steps(fa - a);
    let mut x = fa;
    lines.push(x);
    for h in &left {
        x -= h;
        lines.push(x);
    }
    lines.reverse();
    *lines.first_mut().unwrap() = a;
    for k in 1..=n_fine {
        lines.push(fa + (fb - fa) * k as f64 / n_fine as f64);
    }
    let mut x = fb;
    for h in steps(b - fb) {
        x += h;
        lines.push(x);
    }
    *lines.last_mut().unwrap() = b;
    lines
}

/// Triangulated disk of radius `r` centred at the origin, built from
/// concentric rings whose node count shrinks towards the centre. Boundary
/// nodes are `0..n_boundary`, counter-clockwise from angle 0, registered as
/// the closed polyline `boundary`; the centre node is node set `center`.
pub fn generate_disk_mesh(r: f64, n_boundary: usize) -> Result<Mesh> {
    if n_boundary < 8 {
        return Err(Error::InvalidArgument(
            "disk mesh needs at least 8 boundary segments".into(),
        ));
    }
    if r.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::InvalidGeometry(
            "disk radius must be positive".into(),
        ));
    }
    const GROWTH: f64 = 1.3;
    // (radius, count, angular offset)
    let mut rings: Vec<(f64, usize, f64)> = vec![(r, n_boundary, 0.0)];
    loop {
        let (rk, nk, _) = *rings.last().unwrap();
        let s = 2.0 * PI * rk / nk as f64;
        let r_next = rk - 0.9 * s;
        let s_next = s * GROWTH;
        let n_next = ((2.0 * PI * r_next / s_next).round() as usize).min(nk);
        if r_next <= 0.0 || n_next < 8 {
            break;
        }
        let offset = if n_next == nk {
            rings.last().unwrap().2 + PI / nk as f64
        } else {
            0.0
        };
        rings.push((r_next, n_next, offset % (2.0 * PI / n_next as f64)));
    }
    let mut coords = Vec::new();
    let mut starts = Vec::new();
    for &(rk, nk, off) in &rings {
        starts.push(coords.len());
        for i in 0..nk {
            let t = if starts.len() == 1 {
                2.0 * PI * i as f64 / nk as f64
            } else {
                off + 2.0 * PI * i as f64 / nk as f64
            };
            let (s, c) = t.sin_cos();
            coords.push(Vec2::new(rk * c, rk * s));
        }
    }
    // exact boundary radius
    for p in coords.iter_mut().take(n_boundary) {
        *p *= r / p.norm();
    }
    let center = coords.len();
    coords.push(Vec2::zeros());

    let mut tris: Vec<[usize; 3]> = Vec::new();
    for k in 0..rings.len() - 1 {
        let (_, na, offa) = rings[k];
        let (_, nb, offb) = rings[k + 1];
        let offa = if k == 0 { 0.0 } else { offa };
        let (sa, sb) = (starts[k], starts[k + 1]);
        let ang_a = |i: usize| offa + 2.0 * PI * i as f64 / na as f64;
        let ang_b = |j: usize| offb + 2.0 * PI * j as f64 / nb as f64;
        let (mut i, mut j) = (0usize, 0usize);
        while i < na || j < nb {
            let adv_a = if i == na {
                false
            } else if j == nb {
                true
            } else {
                ang_a(i + 1) <= ang_b(j + 1)
            };
            let a0 = sa + i % na;
            let b0 = sb + j % nb;
            if adv_a {
                tris.push([b0, a0, sa + (i + 1) % na]);
                i += 1;
            } else {
                tris.push([b0, a0, sb + (j + 1) % nb]);
                j += 1;
            }
        }
    }
    let (_, nl, _) = *rings.last().unwrap();
    let sl = *starts.last().unwrap();
    for j in 0..nl {
        tris.push([center, sl + j, sl + (j + 1) % nl]);
    }
    let elements = tris
        .into_iter()
        .map(|mut t| {
            let o = crate::geom::orient(&coords[t[0]], &coords[t[1]], &coords[t[2]]);
            if o < 0.0 {
                t.swap(1, 2);
            }
            (ElementKind::T3, t.to_vec())
        })
        .collect();
    let mut mesh = Mesh::from_parts(coords, elements)?;
    let ring: Vec<usize> = (0..n_boundary).collect();
    mesh.node_sets.insert("boundary".into(), ring.clone());
    mesh.node_sets.insert("center".into(), vec![center]);
    mesh.polylines
        .insert("boundary".into(), Polyline::closed(ring));
    Ok(mesh)
}

/// Structured quadrilateral mesh between nested closed curves of equal node
/// count, each listed counter-clockwise with corresponding nodes on matching
/// rays. Band `b` between `curves[b]` and `curves[b + 1]` gets `layers[b]`
/// element rows whose thickness changes by `growth[b]` from row to row.
///
/// Nodes are numbered curve by curve, interior rows of a band following the
/// curve they start from, so a mesh built on a prefix of the curves has the
/// same numbering as a prefix of this one. Curves are registered as closed
/// polylines `ring0`, `ring1`, ...
pub fn generate_ring_mesh(curves: &[Vec<Vec2>], layers: &[usize], growth: &[f64]) -> Result<Mesh> {
    if curves.len() < 2 || layers.len() != curves.len() - 1 || growth.len() != layers.len() {
        return Err(Error::InvalidArgument(
            "ring mesh needs n curves, n - 1 layer counts and growth factors".into(),
        ));
    }
    let n = curves[0].len();
    if n < 3 || curves.iter().any(|c| c.len() != n) {
        return Err(Error::InvalidArgument(
            "ring curves need the same number (>= 3) of nodes".into(),
        ));
    }
    if layers.contains(&0) || growth.iter().any(|g| !(*g > 0.0)) {
        return Err(Error::InvalidArgument(
            "ring bands need at least one layer and a positive growth".into(),
        ));
    }
    let mut coords: Vec<Vec2> = curves[0].clone();
    let mut rows = vec![0usize];
    let mut ring_rows = vec![0usize];
    for (b, (&nl, &g)) in layers.iter().zip(growth).enumerate() {
        let total: f64 = (0..nl).map(|i| g.powi(i as i32)).sum();
        let mut t = 0.0;
        for j in 1..=nl {
            t += g.powi(j as i32 - 1) / total;
            rows.push(coords.len());
            if j == nl {
                ring_rows.push(coords.len());
                coords.extend_from_slice(&curves[b + 1]);
            } else {
                coords.extend(
                    curves[b]
                        .iter()
                        .zip(&curves[b + 1])
                        .map(|(a, c)| a + (c - a) * t),
                );
            }
        }
    }
    let mut elements = Vec::new();
    for w in rows.windows(2) {
        for k in 0..n {
            let k1 = (k + 1) % n;
            elements.push((
                ElementKind::Q4,
                vec![w[0] + k, w[1] + k, w[1] + k1, w[0] + k1],
            ));
        }
    }
    let mut mesh = Mesh::from_parts(coords, elements)?;
    for (i, &r) in ring_rows.iter().enumerate() {
        let nodes: Vec<usize> = (r..r + n).collect();
        mesh.node_sets.insert(format!("ring{i}"), nodes.clone());
        mesh.polylines
            .insert(format!("ring{i}"), Polyline::closed(nodes));
    }
    Ok(mesh)
}

/// `4 n_side` points on the boundary of the square `[-half, half]^2`,
/// counter-clockwise from the lower right corner and evenly spaced per side.
pub fn square_loop(half: f64, n_side: usize) -> Vec<Vec2> {
    let corners = [
        Vec2::new(half, -half),
        Vec2::new(half, half),
        Vec2::new(-half, half),
        Vec2::new(-half, -half),
    ];
    (0..4)
        .flat_map(|s| {
            let (a, b) = (corners[s], corners[(s + 1) % 4]);
            (0..n_side).map(move |i| a + (b - a) * (i as f64 / n_side as f64))
        })
        .collect()
}
