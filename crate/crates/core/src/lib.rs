//! Mortar mesh tying of boundary-fitted patches embedded in a host mesh.
//!
//! The host is cut by the patch footprint and integrated only over its
//! retained part; the patch boundary carries Lagrange multipliers that tie
//! it weakly to the host volume interpolation. Multipliers can be
//! coarse-grained over super-segments to suppress interface oscillations.

pub mod bench;
pub mod cgi;
pub mod elasticity;
pub mod error;
pub mod geom;
pub mod mesh;
pub mod model;
pub mod mortar;
pub mod output;
pub mod solver;
pub mod xfem;

pub use error::{Error, Result};
pub use geom::Vec2;
