use magbend_core::field::{calibrate_remanence, hz_closed_form, hz_quadrature, AxialPoint, CuboidMagnet};
use magbend_core::MU0;
use proptest::prelude::*;

const SIDE: f64 = 0.055;

proptest! {
    #[test]
    fn field_is_linear_in_remanence(br in 0.01f64..2.0, d in 0.01f64..0.3) {
        let m = CuboidMagnet::cube(SIDE, br).unwrap();
        let p = AxialPoint::from_pole_face(&m, d);
        let one = hz_quadrature(&m, p, 16).unwrap();
        let two = hz_quadrature(&m.with_br(2.0 * br), p, 16).unwrap();
        prop_assert_eq!(two.h(), 2.0 * one.h());
    }

    #[test]
    fn quadrature_agrees_with_closed_form(scale in 0.5f64..5.0, order in 16usize..40) {
        let m = CuboidMagnet::cube(SIDE, 1.3).unwrap();
        let d = scale * SIDE;
        let q = hz_quadrature(&m, AxialPoint::from_pole_face(&m, d), order).unwrap().b();
        let c = hz_closed_form(&m, d).unwrap().b();
        prop_assert!(((q - c) / c).abs() < 1e-4, "d = {d}, q = {q}, c = {c}");
    }

    #[test]
    fn field_decays_with_distance(d in 0.001f64..0.5, step in 1e-4f64..0.05) {
        let m = CuboidMagnet::new(0.03, 0.04, 0.05, 1.2).unwrap();
        let near = hz_quadrature(&m, AxialPoint::from_pole_face(&m, d), 32).unwrap().h();
        let far = hz_quadrature(&m, AxialPoint::from_pole_face(&m, d + step), 32).unwrap().h();
        prop_assert!(near > far);
        let near_c = hz_closed_form(&m, d).unwrap().h();
        let far_c = hz_closed_form(&m, d + step).unwrap().h();
        prop_assert!(near_c > far_c);
    }

    #[test]
    fn calibration_round_trips(d in 0.005f64..0.3, b in 1e-4f64..0.5) {
        let m = CuboidMagnet::cube(SIDE, 1.0).unwrap();
        let br = calibrate_remanence(&m, d, b).unwrap();
        let back = hz_quadrature(&m.with_br(br), AxialPoint::from_pole_face(&m, d), 32).unwrap().b();
        prop_assert!(((back - b) / b).abs() < 1e-12);
    }

    #[test]
    fn field_values_are_paired(br in 0.0f64..2.0, d in 0.01f64..0.2) {
        let m = CuboidMagnet::cube(SIDE, br).unwrap();
        for f in [
            hz_quadrature(&m, AxialPoint::from_pole_face(&m, d), 8).unwrap(),
            hz_closed_form(&m, d).unwrap(),
        ] {
            prop_assert!((f.b() - MU0 * f.h()).abs() <= 1e-15 * f.b().abs().max(1e-300));
        }
    }
}

#[test]
fn near_axis_point_is_close_to_on_axis() {
    let m = CuboidMagnet::cube(SIDE, 1.3).unwrap();
    let on = hz_quadrature(&m, AxialPoint::from_pole_face(&m, 0.06), 32).unwrap().b();
    let off = hz_quadrature(
        &m,
        AxialPoint {
            x0: 1e-3,
            y0: -1e-3,
            z0: SIDE / 2.0 + 0.06,
        },
        32,
    )
    .unwrap()
    .b();
    assert!(((on - off) / on).abs() < 1e-3);
}
