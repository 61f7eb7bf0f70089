//! First-order shape functions on the reference domains.
//!
//! Parent domains: `Line2` on `[-1, 1]`, `T3` on the unit simplex with nodes
//! (0,0), (1,0), (0,1), `Q4` on `[-1, 1]^2` with nodes numbered
//! counter-clockwise from (-1,-1).

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementKind {
    Line2,
    T3,
    Q4,
}

pub const Q4_PARENT_NODES: [[f64; 2]; 4] = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];
pub const T3_PARENT_NODES: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

impl ElementKind {
    pub fn n_nodes(self) -> usize {
        match self {
            ElementKind::Line2 => 2,
            ElementKind::T3 => 3,
            ElementKind::Q4 => 4,
        }
    }

    /// Measure of the parent domain.
    pub fn parent_measure(self) -> f64 {
        match self {
            ElementKind::Line2 => 2.0,
            ElementKind::T3 => 0.5,
            ElementKind::Q4 => 4.0,
        }
    }

    pub fn parent_nodes(self) -> &'static [[f64; 2]] {
        const LINE: [[f64; 2]; 2] = [[-1.0, 0.0], [1.0, 0.0]];
        match self {
            ElementKind::Line2 => &LINE,
            ElementKind::T3 => &T3_PARENT_NODES,
            ElementKind::Q4 => &Q4_PARENT_NODES,
        }
    }

    pub fn parent_center(self) -> [f64; 2] {
        match self {
            ElementKind::Line2 | ElementKind::Q4 => [0.0, 0.0],
            ElementKind::T3 => [1.0 / 3.0, 1.0 / 3.0],
        }
    }

    /// Whether `xi` lies in the parent domain, up to `tol`.
    pub fn parent_contains(self, xi: [f64; 2], tol: f64) -> bool {
        match self {
            ElementKind::Line2 => xi[0].abs() <= 1.0 + tol,
            ElementKind::T3 => xi[0] >= -tol && xi[1] >= -tol && xi[0] + xi[1] <= 1.0 + tol,
            ElementKind::Q4 => xi[0].abs() <= 1.0 + tol && xi[1].abs() <= 1.0 + tol,
        }
    }

    /// How far `xi` lies outside the parent domain (0 inside).
    pub fn parent_excess(self, xi: [f64; 2]) -> f64 {
        match self {
            ElementKind::Line2 => (xi[0].abs() - 1.0).max(0.0),
            ElementKind::T3 => (-xi[0]).max(-xi[1]).max(xi[0] + xi[1] - 1.0).max(0.0),
            ElementKind::Q4 => (xi[0].abs() - 1.0).max(xi[1].abs() - 1.0).max(0.0),
        }
    }
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ElementKind::Line2 => "L2",
            ElementKind::T3 => "T3",
            ElementKind::Q4 => "Q4",
        })
    }
}

impl FromStr for ElementKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_uppercase().as_str() {
            "L2" | "LINE2" => Ok(ElementKind::Line2),
            "T3" | "TRI3" => Ok(ElementKind::T3),
            "Q4" | "QUAD4" => Ok(ElementKind::Q4),
            _ => Err(Error::InvalidArgument(format!(
                "unknown element kind '{s}'"
            ))),
        }
    }
}

/// Shape-function values; entries past `kind.n_nodes()` are zero.
#[inline]
pub fn shape_values(kind: ElementKind, xi: [f64; 2]) -> [f64; 4] {
    let [r, s] = xi;
    match kind {
        ElementKind::Line2 => [0.5 * (1.0 - r), 0.5 * (1.0 + r), 0.0, 0.0],
        ElementKind::T3 => [1.0 - r - s, r, s, 0.0],
        ElementKind::Q4 => [
            0.25 * (1.0 - r) * (1.0 - s),
            0.25 * (1.0 + r) * (1.0 - s),
            0.25 * (1.0 + r) * (1.0 + s),
            0.25 * (1.0 - r) * (1.0 + s),
        ],
    }
}

/// Parent-space gradients `[dN/dxi, dN/deta]` per node.
#[inline]
pub fn shape_gradients(kind: ElementKind, xi: [f64; 2]) -> [[f64; 2]; 4] {
    let [r, s] = xi;
    match kind {
        ElementKind::Line2 => [[-0.5, 0.0], [0.5, 0.0], [0.0; 2], [0.0; 2]],
        ElementKind::T3 => [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0], [0.0; 2]],
        ElementKind::Q4 => [
            [-0.25 * (1.0 - s), -0.25 * (1.0 - r)],
            [0.25 * (1.0 - s), -0.25 * (1.0 + r)],
            [0.25 * (1.0 + s), 0.25 * (1.0 + r)],
            [-0.25 * (1.0 + s), 0.25 * (1.0 - r)],
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const KINDS: [ElementKind; 3] = [ElementKind::Line2, ElementKind::T3, ElementKind::Q4];

    #[test]
    fn q4_center_and_gradient() {
        assert_eq!(shape_values(ElementKind::Q4, [0.0, 0.0]), [0.25; 4]);
        let g = shape_gradients(ElementKind::Q4, [0.0, 0.0]);
        let dmu: Vec<f64> = g.iter().map(|r| r[0]).collect();
        assert_eq!(dmu, vec![-0.25, 0.25, 0.25, -0.25]);
    }

    #[test]
    fn t3_centroid() {
        let n = shape_values(ElementKind::T3, [1.0 / 3.0, 1.0 / 3.0]);
        for v in &n[..3] {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn kronecker_at_parent_nodes() {
        for kind in KINDS {
            for (j, p) in kind.parent_nodes().iter().enumerate() {
                let n = shape_values(kind, *p);
                for (i, v) in n[..kind.n_nodes()].iter().enumerate() {
                    assert_eq!(*v, if i == j { 1.0 } else { 0.0 }, "{kind} node {j}");
                }
            }
        }
    }

    #[test]
    fn parse_kind() {
        assert_eq!("q4".parse::<ElementKind>().unwrap(), ElementKind::Q4);
        assert!(matches!(
            "hex8".parse::<ElementKind>(),
            Err(Error::InvalidArgument(_))
        ));
    }

    proptest! {
        #[test]
        fn partition_of_unity(a in 0.0f64..1.0, b in 0.0f64..1.0, k in 0usize..3) {
            let kind = KINDS[k];
            let xi = match kind {
                ElementKind::T3 => if a + b <= 1.0 { [a, b] } else { [1.0 - a, 1.0 - b] },
                _ => [2.0 * a - 1.0, 2.0 * b - 1.0],
            };
            let n = shape_values(kind, xi);
            prop_assert!((n.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            let g = shape_gradients(kind, xi);
            let gs = g.iter().fold([0.0, 0.0], |acc, r| [acc[0] + r[0], acc[1] + r[1]]);
            prop_assert!(gs[0].abs() < 1e-15 && gs[1].abs() < 1e-15);
        }
    }
}
