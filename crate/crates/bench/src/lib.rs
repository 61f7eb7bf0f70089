//! Fixtures shared by the kernel benchmarks.

use mortex::bench::inclusion::{build_eshelby_model, EshelbyConfig};
use mortex::elasticity::Material;
use mortex::mesh::{generate_disk_mesh, generate_structured_mesh, Distortion, ElementKind, Mesh, Rect};
use mortex::model::{cut_domain, Bc, Domain, DomainCut, DualScheme, Kappa, Model, Tying};
use mortex::mortar::MortarChain;
use mortex::Vec2;

/// Jittered unit-square host with a disk patch of `n_boundary` edges
/// centred in it.
pub struct DiskOverGrid {
    pub host: Mesh,
    pub disk: Mesh,
}

impl DiskOverGrid {
    pub fn new(host_divisions: usize, n_boundary: usize) -> Self {
        let host = generate_structured_mesh(
            Rect::new(0.0, 0.0, 1.0, 1.0),
            host_divisions,
            host_divisions,
            ElementKind::Q4,
            Some(Distortion { seed: 3, amplitude: 0.15 / host_divisions as f64 }),
        )
        .expect("valid host");
        let mut disk = generate_disk_mesh(0.3, n_boundary).expect("valid disk");
        disk.translate(Vec2::new(0.5, 0.5));
        DiskOverGrid { host, disk }
    }

    pub fn ring(&self) -> Vec<Vec2> {
        let p = self.disk.polyline("boundary").expect("disk boundary");
        self.disk.polyline_coords(p)
    }

    pub fn chain(&self) -> MortarChain {
        MortarChain::from_polyline(&self.disk, self.disk.polyline("boundary").expect("disk boundary"))
    }

    pub fn cut(&self, triangulate: bool) -> DomainCut {
        cut_domain(&self.host, vec![self.ring()], triangulate).expect("disk inside host")
    }

    pub fn model(&self, scheme: DualScheme, kappa: Kappa) -> Model {
        let m = Material::plane_strain(1.0, 0.3);
        Model {
            domains: vec![Domain::new("host", self.host.clone(), m), Domain::new("disk", self.disk.clone(), m)],
            tyings: vec![Tying { patch: 1, host: 0, chain: "boundary".into(), footprint: None, scheme, kappa }],
            bcs: vec![
                Bc::Displacement { domain: 0, target: "bottom".into(), component: 0, value: 0.0 },
                Bc::Displacement { domain: 0, target: "bottom".into(), component: 1, value: 0.0 },
                Bc::Pressure { domain: 0, polyline: "top".into(), p: -1.0 },
            ],
            triangulate: false,
        }
    }
}

/// Inclusion model at interface resolution `n_m`.
pub fn eshelby_model(n_m: usize, scheme: DualScheme, kappa: Kappa) -> Model {
    build_eshelby_model(&EshelbyConfig::new(n_m).with_scheme(scheme, kappa))
        .expect("inclusion model")
        .0
}
