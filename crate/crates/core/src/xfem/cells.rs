use super::{ear_clip, ClipPolygon};
use crate::elasticity::IntegrationPoint;
use crate::error::{Error, Result};
use crate::geom::{orient, Vec2};
use crate::mesh::mapping::inverse_map_unchecked;
use crate::mesh::quadrature::tri3_rule;
use crate::mesh::Mesh;

/// Sub-triangle of a clipped element with its quadrature.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationCell {
    /// Triangle vertices in the host parent domain.
    pub parent: [[f64; 2]; 3],
    pub physical: [Vec2; 3],
    /// Gauss points in host parent coordinates, physical weights.
    pub points: Vec<IntegrationPoint>,
}

/// Ear-clips each polygon and places a 3-point rule on every physical
/// sub-triangle; the Gauss points are pulled back into the host parent domain.
pub fn build_integration_cells(
    mesh: &Mesh,
    e: usize,
    polygons: &[ClipPolygon],
) -> Result<Vec<IntegrationCell>> {
    let kind = mesh.elements[e].kind;
    let x = mesh.element_coords(e);
    let rule = tri3_rule();
    let pull = |p: &Vec2| -> Result<[f64; 2]> {
        let xi = inverse_map_unchecked(kind, &x, p, e)?;
        if kind.parent_excess(xi) > 1e-6 {
            return Err(Error::OutsideElement {
                element: e,
                x: p.x,
                y: p.y,
            });
        }
        Ok(xi)
    };
    let mut cells = Vec::new();
    for poly in polygons {
        for t in ear_clip(&poly.vertices)? {
            let tri = [
                poly.vertices[t[0]],
                poly.vertices[t[1]],
                poly.vertices[t[2]],
            ];
            let two_a = orient(&tri[0], &tri[1], &tri[2]);
            let mut points = Vec::with_capacity(rule.len());
            for (r, w) in rule.iter() {
                let p = tri[0] + (tri[1] - tri[0]) * r[0] + (tri[2] - tri[0]) * r[1];
                points.push(IntegrationPoint {
                    xi: pull(&p)?,
                    weight: w * two_a,
                });
            }
            cells.push(IntegrationCell {
                parent: [pull(&tri[0])?, pull(&tri[1])?, pull(&tri[2])?],
                physical: tri,
                points,
            });
        }
    }
    Ok(cells)
}
