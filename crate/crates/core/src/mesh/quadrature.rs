//! Gauss rules on the parent domains.

use super::shape::ElementKind;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ([f64; 2], f64)> + '_ {
        self.points
            .iter()
            .copied()
            .zip(self.weights.iter().copied())
    }
}

/// Gauss-Legendre abscissae and weights on `[-1, 1]` by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "gauss_legendre needs at least one point");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            if dz.abs() < 1e-16 {
                break;
            }
            z -= dz;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// `n`-point rule on the segment `[-1, 1]` (second coordinate unused).
pub fn line_rule(n: usize) -> GaussRule {
    let (x, w) = gauss_legendre(n);
    GaussRule {
        points: x.iter().map(|&v| [v, 0.0]).collect(),
        weights: w,
    }
}

/// Tensor `n x n` rule on `[-1, 1]^2`.
pub fn quad_rule(n: usize) -> GaussRule {
    let (x, w) = gauss_legendre(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            points.push([x[i], x[j]]);
            weights.push(w[i] * w[j]);
        }
    }
    GaussRule { points, weights }
}

/// Symmetric 3-point rule on the unit triangle, exact for quadratics.
pub fn tri3_rule() -> GaussRule {
    GaussRule {
        points: vec![
            [1.0 / 6.0, 1.0 / 6.0],
            [2.0 / 3.0, 1.0 / 6.0],
            [1.0 / 6.0, 2.0 / 3.0],
        ],
        weights: vec![1.0 / 6.0; 3],
    }
}

/// Collapsed (Duffy) `n x n` rule on the unit triangle, exact to degree 2n-2.
pub fn tri_collapsed_rule(n: usize) -> GaussRule {
    let (x, w) = gauss_legendre(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let u = 0.5 * (1.0 + x[i]);
            let v = 0.5 * (1.0 + x[j]);
            points.push([u * (1.0 - v), v]);
            weights.push(0.25 * w[i] * w[j] * (1.0 - v));
        }
    }
    GaussRule { points, weights }
}

/// Default stiffness rule: 3 points on T3, 2x2 on Q4, 3 points on edges.
pub fn default_rule(kind: ElementKind) -> GaussRule {
    match kind {
        ElementKind::Line2 => line_rule(3),
        ElementKind::T3 => tri3_rule(),
        ElementKind::Q4 => quad_rule(2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mono_tri(p: u32, q: u32) -> f64 {
        // int_T x^p y^q = p! q! / (p+q+2)!
        let f = |n: u32| (1..=n).map(f64::from).product::<f64>();
        f(p) * f(q) / f(p + q + 2)
    }

    #[test]
    fn weights_sum_to_parent_measure() {
        for kind in [ElementKind::Line2, ElementKind::T3, ElementKind::Q4] {
            let s: f64 = default_rule(kind).weights.iter().sum();
            assert!((s - kind.parent_measure()).abs() < 1e-14, "{kind}");
        }
    }

    #[test]
    fn legendre_exactness() {
        for n in 1..=20 {
            let (x, w) = gauss_legendre(n);
            for deg in 0..(2 * n) {
                let num: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(xi, wi)| wi * xi.powi(deg as i32))
                    .sum();
                let exact = if deg % 2 == 1 {
                    0.0
                } else {
                    2.0 / (deg as f64 + 1.0)
                };
                assert!((num - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn triangle_rules_exact_on_monomials() {
        let r3 = tri3_rule();
        let rc = tri_collapsed_rule(6);
        for p in 0..=4u32 {
            for q in 0..=(4 - p) {
                let exact = mono_tri(p, q);
                let f = |pt: [f64; 2]| pt[0].powi(p as i32) * pt[1].powi(q as i32);
                let hi: f64 = rc.iter().map(|(pt, w)| w * f(pt)).sum();
                assert!((hi - exact).abs() < 1e-15);
                if p + q <= 2 {
                    let lo: f64 = r3.iter().map(|(pt, w)| w * f(pt)).sum();
                    assert!((lo - exact).abs() < 1e-15, "x^{p} y^{q}");
                }
            }
        }
    }

    #[test]
    fn quad_2x2_exact_to_bicubic() {
        let r = quad_rule(2);
        for p in 0..=3 {
            for q in 0..=3 {
                let num: f64 = r.iter().map(|(x, w)| w * x[0].powi(p) * x[1].powi(q)).sum();
                let one = |k: i32| {
                    if k % 2 == 1 {
                        0.0
                    } else {
                        2.0 / (k as f64 + 1.0)
                    }
                };
                assert!((num - one(p) * one(q)).abs() < 1e-14);
            }
        }
    }
}
