//! Parent <-> physical maps for isoparametric elements.

use nalgebra::Matrix2;

use super::shape::{shape_gradients, shape_values, ElementKind};
use crate::error::{Error, Result};
use crate::geom::Vec2;

pub const INVERSE_TOL: f64 = 1e-13;
pub const INVERSE_MAX_ITER: usize = 30;
/// Parent-domain slack accepted by [`inverse_map`].
pub const CONTAINMENT_TOL: f64 = 1e-9;

#[inline]
pub fn forward_map(kind: ElementKind, x: &[Vec2], xi: [f64; 2]) -> Vec2 {
    let n = shape_values(kind, xi);
    let mut p = Vec2::zeros();
    for (a, xa) in x.iter().enumerate() {
        p += xa * n[a];
    }
    p
}

/// Jacobian `dX/dxi` (columns are the parent derivatives).
#[inline]
pub fn jacobian(kind: ElementKind, x: &[Vec2], xi: [f64; 2]) -> Matrix2<f64> {
    let g = shape_gradients(kind, xi);
    let mut j = Matrix2::zeros();
    for (a, xa) in x.iter().enumerate() {
        j[(0, 0)] += xa.x * g[a][0];
        j[(0, 1)] += xa.x * g[a][1];
        j[(1, 0)] += xa.y * g[a][0];
        j[(1, 1)] += xa.y * g[a][1];
    }
    j
}

/// Parent coordinates of the physical point `p` in the element with nodal
/// coordinates `x`. `element` is only used for error reporting.
pub fn inverse_map(kind: ElementKind, x: &[Vec2], p: &Vec2, element: usize) -> Result<[f64; 2]> {
    let xi = match kind {
        ElementKind::T3 => {
            let j = Matrix2::new(
                x[1].x - x[0].x,
                x[2].x - x[0].x,
                x[1].y - x[0].y,
                x[2].y - x[0].y,
            );
            let inv = j
                .try_inverse()
                .ok_or(Error::DegenerateElement { element, det: 0.0 })?;
            let r = inv * (p - x[0]);
            [r.x, r.y]
        }
        ElementKind::Q4 => newton_inverse(kind, x, p, element)?,
        ElementKind::Line2 => {
            return Err(Error::InvalidArgument(
                "inverse_map is defined for area elements".into(),
            ))
        }
    };
    if !kind.parent_contains(xi, CONTAINMENT_TOL) {
        return Err(Error::OutsideElement {
            element,
            x: p.x,
            y: p.y,
        });
    }
    Ok(xi)
}

/// Same as [`inverse_map`] but without the containment check.
pub fn inverse_map_unchecked(
    kind: ElementKind,
    x: &[Vec2],
    p: &Vec2,
    element: usize,
) -> Result<[f64; 2]> {
    match kind {
        ElementKind::Q4 => newton_inverse(kind, x, p, element),
        _ => {
            let j = Matrix2::new(
                x[1].x - x[0].x,
                x[2].x - x[0].x,
                x[1].y - x[0].y,
                x[2].y - x[0].y,
            );
            let inv = j
                .try_inverse()
                .ok_or(Error::DegenerateElement { element, det: 0.0 })?;
            let r = inv * (p - x[0]);
            Ok([r.x, r.y])
        }
    }
}

fn newton_inverse(kind: ElementKind, x: &[Vec2], p: &Vec2, element: usize) -> Result<[f64; 2]> {
    let mut xi = kind.parent_center();
    let mut step = f64::INFINITY;
    // residual attainable in floating point for coordinates of this magnitude
    let floor = 8.0
        * f64::EPSILON
        * x.iter()
            .chain(std::iter::once(p))
            .map(|v| v.x.abs().max(v.y.abs()))
            .fold(0.0, f64::max);
    for it in 0..INVERSE_MAX_ITER {
        let r = forward_map(kind, x, xi) - p;
        if it > 0 && r.x.abs().max(r.y.abs()) <= floor {
            return Ok(xi);
        }
        let j = jacobian(kind, x, xi);
        let det = j.determinant();
        if det.abs() < 1e-300 {
            return Err(Error::DegenerateElement { element, det });
        }
        let d = j.try_inverse().expect("nonzero determinant") * r;
        xi[0] -= d.x;
        xi[1] -= d.y;
        step = d.x.abs().max(d.y.abs());
        if step < INVERSE_TOL {
            return Ok(xi);
        }
        // Far outside the element the bilinear map can fold; bail out early.
        if xi[0].abs() > 1e3 || xi[1].abs() > 1e3 {
            return Err(Error::OutsideElement {
                element,
                x: p.x,
                y: p.y,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: INVERSE_MAX_ITER,
        residual: step,
    })
}
