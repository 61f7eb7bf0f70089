//! Ear-clipping triangulation of simple polygons.

use crate::error::{Error, Result};
use crate::geom::{orient, polygon_area, ring_self_intersects, Vec2};

/// Triangulates a simple polygon given in either orientation. Returns vertex
/// index triples, counter-clockwise. Collinear vertices are clipped without
/// emitting a (zero-area) triangle, so `n - 2` triangles result for polygons
/// without collinear runs.
pub fn ear_clip(poly: &[Vec2]) -> Result<Vec<[usize; 3]>> {
    let n = poly.len();
    if n < 3 {
        return Err(Error::InvalidGeometry(format!("polygon with {n} vertices")));
    }
    if ring_self_intersects(poly) {
        return Err(Error::InvalidGeometry("self-intersecting polygon".into()));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    if polygon_area(poly) < 0.0 {
        idx.reverse();
    }
    let scale = poly
        .iter()
        .map(|p| p.norm_squared())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let eps = 1e-14 * scale;
    let mut tris = Vec::with_capacity(n - 2);
    let mut start = 0;
    while idx.len() > 3 {
        let m = idx.len();
        let mut clipped = false;
        for k in 0..m {
            let i = (start + k) % m;
            let (a, b, c) = (idx[(i + m - 1) % m], idx[i], idx[(i + 1) % m]);
            let o = orient(&poly[a], &poly[b], &poly[c]);
            if o <= eps {
                continue;
            }
            let blocked = idx.iter().any(|&p| {
                if p == a
                    || p == b
                    || p == c
                    || poly[p] == poly[a]
                    || poly[p] == poly[b]
                    || poly[p] == poly[c]
                {
                    return false;
                }
                let q = &poly[p];
                orient(&poly[a], &poly[b], q) >= -eps
                    && orient(&poly[b], &poly[c], q) >= -eps
                    && orient(&poly[c], &poly[a], q) >= -eps
            });
            if !blocked {
                tris.push([a, b, c]);
                idx.remove(i);
                start = i % idx.len();
                clipped = true;
                break;
            }
        }
        if !clipped {
            // only flat or reflex corners left: drop a flat one
            let flat = (0..m).find(|&i| {
                let (a, b, c) = (idx[(i + m - 1) % m], idx[i], idx[(i + 1) % m]);
                orient(&poly[a], &poly[b], &poly[c]).abs() <= eps
            });
            match flat {
                Some(i) => {
                    idx.remove(i);
                    start = 0;
                }
                None => return Err(Error::InvalidGeometry("ear clipping found no ear".into())),
            }
        }
    }
    if orient(&poly[idx[0]], &poly[idx[1]], &poly[idx[2]]) > eps {
        tris.push([idx[0], idx[1], idx[2]]);
    }
    Ok(tris)
}
