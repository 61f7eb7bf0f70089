mod common;

use mortex::bench::EshelbyParams;
use mortex::elasticity::Material;
use mortex::geom::{orient, polygon_area};
use mortex::mesh::{shape_values, ElementKind};
use mortex::xfem::{ear_clip, split_element, ClipPolygon};
use mortex::Vec2;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ok(c: common::Check) {
    match c {
        Ok(s) => println!("{s}"),
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn shape_functions_partition_unity() {
    ok(common::shape_function_identities(1));
}

#[test]
fn clipping_conserves_area() {
    ok(common::clip_area_conservation(2));
}

#[test]
fn mortar_rows_balance() {
    ok(common::mortar_row_sums(3, 40));
}

#[test]
fn eshelby_interface_continuity() {
    ok(common::eshelby_continuity(4));
}

#[test]
fn eshelby_homogeneous_limit() {
    ok(common::eshelby_homogeneous_limit());
}

/// Star-shaped polygon around the origin with `n` jittered radii.
fn star(radii: &[f64], phase: f64) -> Vec<Vec2> {
    let n = radii.len() as f64;
    radii
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let t = phase + std::f64::consts::TAU * i as f64 / n;
            Vec2::new(r * t.cos(), r * t.sin())
        })
        .collect()
}

proptest! {
    #[test]
    fn ear_clip_tiles_star_polygons(radii in prop::collection::vec(0.2f64..2.0, 3..40), phase in 0.0f64..6.3) {
        let p = star(&radii, phase);
        let tris = ear_clip(&p).unwrap();
        prop_assert_eq!(tris.len(), p.len() - 2);
        let mut sum = 0.0;
        for t in &tris {
            let a = 0.5 * orient(&p[t[0]], &p[t[1]], &p[t[2]]);
            prop_assert!(a > 0.0);
            sum += a;
        }
        let area = polygon_area(&p);
        prop_assert!((sum - area).abs() <= 1e-12 * area);
    }

    #[test]
    fn q4_shape_values_sum_to_one(x in -1.0f64..=1.0, y in -1.0f64..=1.0) {
        let s: f64 = shape_values(ElementKind::Q4, [x, y]).iter().sum();
        prop_assert!((s - 1.0).abs() < 1e-14);
    }

    #[test]
    fn cut_pieces_cover_the_element(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (m, ind) = common::random_cut(&mut rng);
        let s = split_element(&m, 0, &ind);
        let pieces: f64 = s.retained.iter().chain(&s.discarded).map(ClipPolygon::area).sum();
        let a = m.element_area(0);
        prop_assert!((pieces - a).abs() <= 1e-12 * a);
        for p in s.retained.iter().chain(&s.discarded) {
            prop_assert!(p.area() > 0.0);
        }
    }

    #[test]
    fn eshelby_traction_is_continuous(
        e1 in -3.0f64..3.0, e2 in -3.0f64..3.0, nu1 in 0.0f64..0.49, nu2 in 0.0f64..0.49,
        radius in 0.01f64..10.0, theta in -3.2f64..3.2,
    ) {
        let p = EshelbyParams {
            radius,
            sigma0: 1.0,
            inclusion: Material::plane_strain(10f64.powf(e1), nu1),
            matrix: Material::plane_strain(10f64.powf(e2), nu2),
        };
        let (a, _, b) = p.interior_stress(theta);
        let (c, _, d) = p.exterior_stress(radius, theta);
        prop_assert!((a - c).abs() < 1e-12 && (b - d).abs() < 1e-12);
    }

    #[test]
    fn eshelby_far_field_is_uniaxial(e1 in -3.0f64..3.0, nu in 0.0f64..0.49, theta in -3.2f64..3.2) {
        let p = EshelbyParams {
            radius: 0.1,
            sigma0: 2.0,
            inclusion: Material::plane_strain(10f64.powf(e1), nu),
            matrix: Material::plane_strain(1.0, 0.3),
        };
        let (rr, tt, rt) = p.exterior_stress(1e5, theta);
        let (s, c) = theta.sin_cos();
        prop_assert!((rr - 2.0 * c * c).abs() < 1e-8);
        prop_assert!((tt - 2.0 * s * s).abs() < 1e-8);
        prop_assert!((rt + 2.0 * s * c).abs() < 1e-8);
    }
}
