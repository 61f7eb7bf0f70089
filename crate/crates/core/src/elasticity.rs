//! Small-strain isotropic elasticity in 2D.
//!
//! Voigt order is (xx, yy, xy) with engineering shear strain
//! `gamma_xy = du_x/dy + du_y/dx`. Element dofs are interleaved
//! `[u0x, u0y, u1x, u1y, ...]`; thickness is 1.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::mesh::mapping::jacobian;
use crate::mesh::quadrature::default_rule;
use crate::mesh::{forward_map, shape_gradients, shape_values, ElementKind, Mesh};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formulation {
    PlaneStrain,
    PlaneStress,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    pub e: f64,
    pub nu: f64,
    pub formulation: Formulation,
}

impl Material {
    pub fn new(e: f64, nu: f64, formulation: Formulation) -> Result<Self> {
        if !(e > 0.0) || !(nu > -1.0 && nu < 0.5) {
            return Err(Error::InvalidArgument(format!(
                "invalid material E={e}, nu={nu}"
            )));
        }
        Ok(Material { e, nu, formulation })
    }

    pub fn plane_strain(e: f64, nu: f64) -> Self {
        Self::new(e, nu, Formulation::PlaneStrain).expect("valid material constants")
    }

    pub fn plane_stress(e: f64, nu: f64) -> Self {
        Self::new(e, nu, Formulation::PlaneStress).expect("valid material constants")
    }

    pub fn shear_modulus(&self) -> f64 {
        self.e / (2.0 * (1.0 + self.nu))
    }

    /// Kolosov constant: 3-4nu (plane strain) or (3-nu)/(1+nu) (plane stress).
    pub fn kolosov(&self) -> f64 {
        match self.formulation {
            Formulation::PlaneStrain => 3.0 - 4.0 * self.nu,
            Formulation::PlaneStress => (3.0 - self.nu) / (1.0 + self.nu),
        }
    }

    pub fn constitutive_matrix(&self) -> Matrix3<f64> {
        let (e, nu) = (self.e, self.nu);
        match self.formulation {
            Formulation::PlaneStrain => {
                let f = e / ((1.0 + nu) * (1.0 - 2.0 * nu));
                Matrix3::new(
                    f * (1.0 - nu),
                    f * nu,
                    0.0,
                    f * nu,
                    f * (1.0 - nu),
                    0.0,
                    0.0,
                    0.0,
                    f * (1.0 - 2.0 * nu) / 2.0,
                )
            }
            Formulation::PlaneStress => {
                let f = e / (1.0 - nu * nu);
                Matrix3::new(
                    f,
                    f * nu,
                    0.0,
                    f * nu,
                    f,
                    0.0,
                    0.0,
                    0.0,
                    f * (1.0 - nu) / 2.0,
                )
            }
        }
    }
}

/// Quadrature point in element parent coordinates; `weight` already includes
/// the physical Jacobian, so `sum(weight)` is the integrated area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationPoint {
    pub xi: [f64; 2],
    pub weight: f64,
}

/// Standard rule for the whole element, with physical weights.
pub fn full_integration_points(
    kind: ElementKind,
    x: &[Vec2],
    element: usize,
) -> Result<Vec<IntegrationPoint>> {
    default_rule(kind)
        .iter()
        .map(|(xi, w)| {
            let det = jacobian(kind, x, xi).determinant();
            if det <= 0.0 {
                return Err(Error::DegenerateElement { element, det });
            }
            Ok(IntegrationPoint {
                xi,
                weight: w * det,
            })
        })
        .collect()
}

/// Physical shape gradients `[dN/dx, dN/dy]` and det J at `xi`.
pub fn physical_gradients(
    kind: ElementKind,
    x: &[Vec2],
    xi: [f64; 2],
    element: usize,
) -> Result<([[f64; 2]; 4], f64)> {
    let j = jacobian(kind, x, xi);
    let det = j.determinant();
    if det <= 0.0 {
        return Err(Error::DegenerateElement { element, det });
    }
    let g = shape_gradients(kind, xi);
    let inv = j.try_inverse().expect("positive determinant");
    let mut out = [[0.0; 2]; 4];
    for a in 0..kind.n_nodes() {
        // dN/dX = J^-T dN/dxi
        out[a][0] = inv[(0, 0)] * g[a][0] + inv[(1, 0)] * g[a][1];
        out[a][1] = inv[(0, 1)] * g[a][0] + inv[(1, 1)] * g[a][1];
    }
    Ok((out, det))
}

/// Stiffness of one element integrated on `points` (or the full rule).
pub fn element_stiffness(
    kind: ElementKind,
    x: &[Vec2],
    material: &Material,
    points: Option<&[IntegrationPoint]>,
    element: usize,
) -> Result<DMatrix<f64>> {
    let owned;
    let points = match points {
        Some(p) => p,
        None => {
            owned = full_integration_points(kind, x, element)?;
            &owned
        }
    };
    let c = material.constitutive_matrix();
    let n = kind.n_nodes();
    let mut k = DMatrix::zeros(2 * n, 2 * n);
    for ip in points {
        let (g, _) = physical_gradients(kind, x, ip.xi, element)?;
        for a in 0..n {
            let (ax, ay) = (g[a][0], g[a][1]);
            // C * B_a, columns for (u_ax, u_ay)
            let cb_x = Vector3::new(
                c[(0, 0)] * ax + c[(0, 2)] * ay,
                c[(1, 0)] * ax + c[(1, 2)] * ay,
                c[(2, 0)] * ax + c[(2, 2)] * ay,
            );
            let cb_y = Vector3::new(
                c[(0, 1)] * ay + c[(0, 2)] * ax,
                c[(1, 1)] * ay + c[(1, 2)] * ax,
                c[(2, 1)] * ay + c[(2, 2)] * ax,
            );
            for b in 0..n {
                let (bx, by) = (g[b][0], g[b][1]);
                // B_b^T rows: ux -> (bx, 0, by), uy -> (0, by, bx)
                k[(2 * b, 2 * a)] += ip.weight * (bx * cb_x[0] + by * cb_x[2]);
                k[(2 * b, 2 * a + 1)] += ip.weight * (bx * cb_y[0] + by * cb_y[2]);
                k[(2 * b + 1, 2 * a)] += ip.weight * (by * cb_x[1] + bx * cb_x[2]);
                k[(2 * b + 1, 2 * a + 1)] += ip.weight * (by * cb_y[1] + bx * cb_y[2]);
            }
        }
    }
    Ok(k)
}

/// Convenience wrapper taking the element from a mesh.
pub fn mesh_element_stiffness(
    mesh: &Mesh,
    e: usize,
    material: &Material,
    points: Option<&[IntegrationPoint]>,
) -> Result<DMatrix<f64>> {
    element_stiffness(
        mesh.elements[e].kind,
        &mesh.element_coords(e),
        material,
        points,
        e,
    )
}

/// Strain (Voigt) at `xi` for element displacements `u` (one 2-vector per node).
pub fn strain_at(
    kind: ElementKind,
    x: &[Vec2],
    u: &[Vec2],
    xi: [f64; 2],
    element: usize,
) -> Result<Vector3<f64>> {
    let (g, _) = physical_gradients(kind, x, xi, element)?;
    let mut eps = Vector3::zeros();
    for a in 0..kind.n_nodes() {
        eps[0] += g[a][0] * u[a].x;
        eps[1] += g[a][1] * u[a].y;
        eps[2] += g[a][1] * u[a].x + g[a][0] * u[a].y;
    }
    Ok(eps)
}

pub fn stress_at(
    kind: ElementKind,
    x: &[Vec2],
    u: &[Vec2],
    material: &Material,
    xi: [f64; 2],
    element: usize,
) -> Result<Vector3<f64>> {
    Ok(material.constitutive_matrix() * strain_at(kind, x, u, xi, element)?)
}

/// Stress sample at a point given in the parent coordinates of the element
/// it is fitted on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StressSample {
    pub xi: [f64; 2],
    pub sigma: Vector3<f64>,
}

/// Nodal values of the element shape basis fitted to samples by least squares.
/// Falls back to the sample mean when the fit is under-determined or
/// badly conditioned.
pub fn fit_nodal_values(kind: ElementKind, samples: &[StressSample]) -> Vec<Vector3<f64>> {
    let n = kind.n_nodes();
    let mean = samples.iter().map(|s| s.sigma).sum::<Vector3<f64>>() / samples.len().max(1) as f64;
    if samples.len() < n {
        return vec![mean; n];
    }
    let mut ata = DMatrix::<f64>::zeros(n, n);
    let mut atb = DMatrix::<f64>::zeros(n, 3);
    for s in samples {
        let sv = shape_values(kind, s.xi);
        for a in 0..n {
            for b in 0..n {
                ata[(a, b)] += sv[a] * sv[b];
            }
            for c in 0..3 {
                atb[(a, c)] += sv[a] * s.sigma[c];
            }
        }
    }
    let eig = ata.clone().symmetric_eigenvalues();
    let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), v| {
        (lo.min(*v), hi.max(v.abs()))
    });
    if !(lo > 1e-8 * hi) {
        return vec![mean; n];
    }
    match ata.cholesky() {
        Some(ch) => {
            let sol = ch.solve(&atb);
            (0..n)
                .map(|a| Vector3::new(sol[(a, 0)], sol[(a, 1)], sol[(a, 2)]))
                .collect()
        }
        None => vec![mean; n],
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StressField {
    /// Per element: physical Gauss points and stresses (empty if inactive).
    pub gauss: Vec<Vec<(Vec2, Vector3<f64>)>>,
    /// Arithmetic average of the element fits; `None` for nodes of no active element.
    pub nodal: Vec<Option<Vector3<f64>>>,
}

impl StressField {
    pub fn nodal_or_zero(&self, n: usize) -> Vector3<f64> {
        self.nodal[n].unwrap_or_else(Vector3::zeros)
    }
}

/// Averages per-element nodal fits (local node order) onto mesh nodes.
pub fn average_to_nodes(
    mesh: &Mesh,
    fits: &[Option<Vec<Vector3<f64>>>],
) -> Vec<Option<Vector3<f64>>> {
    let mut sum = vec![Vector3::zeros(); mesh.n_nodes()];
    let mut cnt = vec![0usize; mesh.n_nodes()];
    for (e, fit) in fits.iter().enumerate() {
        if let Some(v) = fit {
            for (a, &n) in mesh.elements[e].nodes.iter().enumerate() {
                sum[n] += v[a];
                cnt[n] += 1;
            }
        }
    }
    sum.into_iter()
        .zip(cnt)
        .map(|(s, c)| (c > 0).then(|| s / c as f64))
        .collect()
}

/// Gauss stresses and averaged nodal stresses for one mesh. `points[e]` is the
/// quadrature of element `e`, `None` for inactive elements.
pub fn recover_nodal_stress(
    mesh: &Mesh,
    displacement: &[Vec2],
    material: &Material,
    points: &[Option<Vec<IntegrationPoint>>],
) -> Result<StressField> {
    let mut gauss = Vec::with_capacity(mesh.n_elements());
    let mut fits = Vec::with_capacity(mesh.n_elements());
    for (e, el) in mesh.elements.iter().enumerate() {
        let Some(pts) = &points[e] else {
            gauss.push(Vec::new());
            fits.push(None);
            continue;
        };
        let x = mesh.element_coords(e);
        let u: Vec<Vec2> = el.nodes.iter().map(|&n| displacement[n]).collect();
        let mut g = Vec::with_capacity(pts.len());
        let mut samples = Vec::with_capacity(pts.len());
        for ip in pts {
            let s = stress_at(el.kind, &x, &u, material, ip.xi, e)?;
            g.push((forward_map(el.kind, &x, ip.xi), s));
            samples.push(StressSample {
                xi: ip.xi,
                sigma: s,
            });
        }
        fits.push(if samples.is_empty() {
            None
        } else {
            Some(fit_nodal_values(el.kind, &samples))
        });
        gauss.push(g);
    }
    Ok(StressField {
        gauss,
        nodal: average_to_nodes(mesh, &fits),
    })
}

/// Global stiffness contribution check helper: `K u` for element displacements.
pub fn apply(k: &DMatrix<f64>, u: &[Vec2]) -> DVector<f64> {
    let v = DVector::from_iterator(2 * u.len(), u.iter().flat_map(|p| [p.x, p.y]));
    k * v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::quadrature::quad_rule;
    use crate::mesh::{generate_structured_mesh, Rect};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_square() -> Vec<Vec2> {
        vec![
            Vec2::new(0., 0.),
            Vec2::new(1., 0.),
            Vec2::new(1., 1.),
            Vec2::new(0., 1.),
        ]
    }

    #[test]
    fn plane_strain_c11() {
        let c = Material::plane_strain(1000.0, 0.3).constitutive_matrix();
        assert!((c[(0, 0)] - 1346.153846153846).abs() < 1e-9);
        let c0 = Material::plane_strain(1000.0, 0.0).constitutive_matrix();
        assert_eq!(c0[(0, 1)], 0.0);
        let cs = Material::plane_stress(1.0, 0.0).constitutive_matrix();
        assert_eq!(
            cs,
            Matrix3::new(1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.5)
        );
    }

    #[test]
    fn rejects_bad_material() {
        assert!(Material::new(-1.0, 0.3, Formulation::PlaneStrain).is_err());
        assert!(Material::new(1.0, 0.5, Formulation::PlaneStrain).is_err());
    }

    /// Independent dense oracle: explicit B matrix, 5x5 Gauss.
    fn oracle_q4(x: &[Vec2], c: &Matrix3<f64>) -> DMatrix<f64> {
        let mut k = DMatrix::zeros(8, 8);
        for (xi, w) in quad_rule(5).iter() {
            let j = jacobian(ElementKind::Q4, x, xi);
            let g = shape_gradients(ElementKind::Q4, xi);
            let ji = j.try_inverse().unwrap();
            let mut b = nalgebra::SMatrix::<f64, 3, 8>::zeros();
            for a in 0..4 {
                let dn = ji.transpose() * nalgebra::Vector2::new(g[a][0], g[a][1]);
                b[(0, 2 * a)] = dn.x;
                b[(1, 2 * a + 1)] = dn.y;
                b[(2, 2 * a)] = dn.y;
                b[(2, 2 * a + 1)] = dn.x;
            }
            k += b.transpose() * c * b * (w * j.determinant());
        }
        k
    }

    #[test]
    fn unit_square_matches_oracle() {
        let m = Material::plane_stress(1.0, 0.0);
        let k = element_stiffness(ElementKind::Q4, &unit_square(), &m, None, 0).unwrap();
        let o = oracle_q4(&unit_square(), &m.constitutive_matrix());
        assert!((k - o).amax() < 1e-14);
    }

    #[test]
    fn rigid_modes_and_symmetry_random_distorted() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = Material::plane_strain(210.0, 0.29);
        for _ in 0..100 {
            let x: Vec<Vec2> = unit_square()
                .iter()
                .map(|p| p + Vec2::new(rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2)))
                .collect();
            let k = element_stiffness(ElementKind::Q4, &x, &m, None, 0).unwrap();
            let kinf = k.amax();
            assert!((&k - k.transpose()).amax() < 1e-12 * kinf);
            let rot: Vec<Vec2> = x.iter().map(|p| Vec2::new(-p.y, p.x)).collect();
            for u in [
                vec![Vec2::new(1.0, 0.0); 4],
                vec![Vec2::new(0.0, 1.0); 4],
                rot,
            ] {
                assert!(apply(&k, &u).amax() < 1e-12 * kinf);
            }
            let eig = k.symmetric_eigenvalues();
            let zero = eig.iter().filter(|v| v.abs() < 1e-10 * kinf).count();
            assert_eq!(zero, 3);
            assert!(eig.iter().all(|v| *v > -1e-10 * kinf));
        }
    }

    #[test]
    fn whole_domain_cells_match_full_integration() {
        let x = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 0.2),
            Vec2::new(1.9, 1.8),
            Vec2::new(-0.1, 1.0),
        ];
        let m = Material::plane_strain(1.0, 0.25);
        let full = element_stiffness(ElementKind::Q4, &x, &m, None, 0).unwrap();
        let pts = full_integration_points(ElementKind::Q4, &x, 0).unwrap();
        let again = element_stiffness(ElementKind::Q4, &x, &m, Some(&pts), 0).unwrap();
        assert!((full - again).amax() < 1e-12);
    }

    #[test]
    fn inverted_element_detected() {
        let x = vec![
            Vec2::new(0., 0.),
            Vec2::new(0., 1.),
            Vec2::new(1., 1.),
            Vec2::new(1., 0.),
        ];
        let err = element_stiffness(
            ElementKind::Q4,
            &x,
            &Material::plane_strain(1.0, 0.0),
            None,
            9,
        )
        .unwrap_err();
        assert!(matches!(err, Error::DegenerateElement { element: 9, .. }));
    }

    #[test]
    fn uniform_stretch_recovers_constant_and_linear_fields() {
        let mesh = generate_structured_mesh(Rect::new(0., 0., 2., 1.), 4, 3, ElementKind::Q4, None)
            .unwrap();
        let mat = Material::plane_stress(100.0, 0.0);
        let pts: Vec<_> = (0..mesh.n_elements())
            .map(|e| {
                Some(full_integration_points(ElementKind::Q4, &mesh.element_coords(e), e).unwrap())
            })
            .collect();
        let u: Vec<Vec2> = mesh
            .nodes
            .iter()
            .map(|n| Vec2::new(0.0, 0.01 * n.x.y))
            .collect();
        let f = recover_nodal_stress(&mesh, &u, &mat, &pts).unwrap();
        for s in f.nodal.iter().flatten() {
            assert!((s[1] - 1.0).abs() < 1e-12 && s[0].abs() < 1e-12);
        }
        // bending-like: u_y = x y gives eps_yy = x, linear in x
        let u: Vec<Vec2> = mesh
            .nodes
            .iter()
            .map(|n| Vec2::new(-0.5 * n.x.y * n.x.y, n.x.x * n.x.y))
            .collect();
        let f = recover_nodal_stress(&mesh, &u, &mat, &pts).unwrap();
        for (n, s) in mesh.nodes.iter().zip(&f.nodal) {
            assert!((s.unwrap()[1] - 100.0 * n.x.x).abs() < 1e-10);
        }
    }
}
