use proptest::prelude::*;

use rumkit_core::multigrid::{check_regularity, dualize, MultigridSpec};
use rumkit_core::symbol::sigma_min;
use rumkit_core::{fixtures, math, ProjLine};

fn crystal() -> impl Strategy<Value = usize> {
    0..fixtures::all_crystals().len()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sigma_min_is_torus_periodic(i in crystal(), g1 in 0.0..1.0f64, g2 in 0.0..1.0f64, s1 in -3i32..3, s2 in -3i32..3) {
        let c = &fixtures::all_crystals()[i];
        let a = sigma_min(c, [g1, g2]);
        let b = sigma_min(c, [g1 + s1 as f64, g2 + s2 as f64]);
        prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a));
    }

    #[test]
    fn sigma_min_is_even(i in crystal(), g1 in 0.0..1.0f64, g2 in 0.0..1.0f64) {
        let c = &fixtures::all_crystals()[i];
        let a = sigma_min(c, [g1, g2]);
        let b = sigma_min(c, [-g1, -g2]);
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a));
    }

    #[test]
    fn sigma_min_is_nonnegative(i in crystal(), g1 in 0.0..1.0f64, g2 in 0.0..1.0f64) {
        let c = &fixtures::all_crystals()[i];
        prop_assert!(sigma_min(c, [g1, g2]) >= 0.0);
    }

    #[test]
    fn cis_lies_on_unit_circle(t in -100.0..100.0f64) {
        let z = math::cis(t);
        prop_assert!((math::modulus(z) - 1.0).abs() < 1e-15);
        prop_assert!((math::atan2(z.im, z.re) - libm::remainder(t, 2.0 * core::f64::consts::PI)).abs() < 1e-9);
    }

    #[test]
    fn projective_angle_ignores_sign(t in -10.0..10.0f64) {
        let a = ProjLine::from_angle(t);
        let b = ProjLine::from_angle(t + core::f64::consts::PI);
        prop_assert!(a.approx_eq(&b, 1e-9));
        prop_assert!((0.0..core::f64::consts::PI).contains(&a.angle()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn regular_pentagrids_dualize_to_valid_tilings(offsets in proptest::array::uniform5(0.01..0.99f64)) {
        let spec = MultigridSpec::symmetric(&offsets, 5.0).unwrap();
        prop_assume!(check_regularity(&spec).is_regular());
        let t = dualize(&spec).unwrap();
        t.validate().unwrap();
        for v in &t.vertices {
            prop_assert!(v.pos.dist(spec.vertex_position(&v.k)) < 1e-9);
        }
        for tile in &t.tiles {
            let [j, l] = tile.families;
            let p = |i: usize| t.vertices[tile.verts[i]].pos;
            let vj = spec.families()[j].edge;
            let vl = spec.families()[l].edge;
            prop_assert!(((p(1) - p(0)) - vj).norm() < 1e-9);
            prop_assert!(((p(3) - p(0)) - vl).norm() < 1e-9);
            prop_assert!(((p(2) - p(1)) - vl).norm() < 1e-9);
        }
        let mut seen = vec![0usize; t.tiles.len()];
        for ((j, k), tiles) in t.ribbon_index() {
            for &i in &tiles {
                let tile = &t.tiles[i];
                let pos = tile.families.iter().position(|&f| f == j);
                prop_assert!(pos.is_some());
                prop_assert_eq!(tile.indices[pos.unwrap()], k);
                seen[i] += 1;
            }
        }
        prop_assert!(seen.iter().all(|&n| n == 2));
    }
}
