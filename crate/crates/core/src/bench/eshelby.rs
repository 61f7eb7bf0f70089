//! Circular elastic inclusion in an infinite plate under remote uniaxial
//! tension along x. Plane strain or plane stress enters through the
//! Kolosov constants of the two materials.

use crate::elasticity::Material;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EshelbyParams {
    pub radius: f64,
    pub sigma0: f64,
    pub inclusion: Material,
    pub matrix: Material,
}

/// Stress constants; index 1 is the inclusion, 2 the matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EshelbyConstants {
    pub beta1: f64,
    pub delta1: f64,
    pub beta2: f64,
    pub delta2: f64,
    pub gamma2: f64,
}

impl EshelbyParams {
    pub fn constants(&self) -> EshelbyConstants {
        let (m1, m2) = (self.inclusion.shear_modulus(), self.matrix.shear_modulus());
        let (k1, k2) = (self.inclusion.kolosov(), self.matrix.kolosov());
        EshelbyConstants {
            beta1: m1 * (k2 + 1.0) / (2.0 * m1 + m2 * (k1 - 1.0)),
            delta1: m1 * (k2 + 1.0) / (m2 + m1 * k2),
            beta2: -2.0 * (m1 - m2) / (m2 + m1 * k2),
            delta2: (m1 - m2) / (m2 + m1 * k2),
            gamma2: (m2 * (k1 - 1.0) - m1 * (k2 - 1.0)) / (2.0 * m1 + m2 * (k1 - 1.0)),
        }
    }

    /// Polar stresses `(srr, stt, srt)` at radius `r` and angle `theta` from
    /// the load axis. `r <= R` gets the uniform inclusion field.
    pub fn stress(&self, r: f64, theta: f64) -> (f64, f64, f64) {
        if r <= self.radius {
            self.interior_stress(theta)
        } else {
            self.exterior_stress(r, theta)
        }
    }

    pub fn interior_stress(&self, theta: f64) -> (f64, f64, f64) {
        let c = self.constants();
        let h = 0.5 * self.sigma0;
        let (s2, c2) = (2.0 * theta).sin_cos();
        (
            h * (c.beta1 + c.delta1 * c2),
            h * (c.beta1 - c.delta1 * c2),
            -h * c.delta1 * s2,
        )
    }

    /// Matrix field, evaluated at any `r > 0`.
    pub fn exterior_stress(&self, r: f64, theta: f64) -> (f64, f64, f64) {
        let c = self.constants();
        let h = 0.5 * self.sigma0;
        let (s2, c2) = (2.0 * theta).sin_cos();
        let a = (self.radius / r).powi(2);
        let a2 = a * a;
        (
            h * (1.0 - c.gamma2 * a + (1.0 - 2.0 * c.beta2 * a - 3.0 * c.delta2 * a2) * c2),
            h * (1.0 + c.gamma2 * a - (1.0 - 3.0 * c.delta2 * a2) * c2),
            -h * (1.0 + c.beta2 * a + 3.0 * c.delta2 * a2) * s2,
        )
    }
}
