use magbend_core::curve::{curvature_profile, fit_quadratic, Curve2D};
use magbend_core::rod::*;
use magbend_core::MU0;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::FRAC_PI_2;

fn total(rod: &DiscreteRod, angles: &[f64], field: [f64; 2]) -> f64 {
    bending_energy(rod, angles).unwrap() + zeeman_energy(rod, angles, field).unwrap()
}

fn no2() -> RodSpec {
    bundled("no2").unwrap()
}

fn solve(spec: &RodSpec, field: f64) -> Equilibrium {
    let rod = build_rod(spec, DEFAULT_RESOLUTION).unwrap();
    let eq = solve_equilibrium(&rod, field, DEFAULT_FIELD_ANGLE, &SolverOptions::default()).unwrap();
    assert!(
        eq.converged,
        "{} at {field} T: gradient {}",
        spec.name, eq.gradient_norm
    );
    eq
}

fn coefficient(spec: &RodSpec, field: f64) -> f64 {
    fit_quadratic(&Curve2D::from_equilibrium(&solve(spec, field)))
        .unwrap()
        .a
}

#[test]
fn gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let spec = RodSpec::new("fd", [0.01; 3], [20e6, 15e6, 10e6], 1e-3, 0.02).unwrap();
    let rod = build_rod(&spec, 1.0).unwrap();
    assert_eq!(rod.len(), 30);
    let h = 1e-7;
    for _ in 0..20 {
        let angles: Vec<f64> = (0..30).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b = rng.gen_range(0.01..0.12);
        let field = magbend_core::uniform_field(b, rng.gen_range(0.0..std::f64::consts::TAU));
        let g = energy_gradient(&rod, &angles, field).unwrap();
        for i in 0..30 {
            let mut p = angles.clone();
            let mut m = angles.clone();
            p[i] += h;
            m[i] -= h;
            let fd = (total(&rod, &p, field) - total(&rod, &m, field)) / (2.0 * h);
            let scale = g.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            assert!((fd - g[i]).abs() <= 1e-6 * scale, "joint {i}: fd {fd} vs {}", g[i]);
        }
    }
}

#[test]
fn small_perpendicular_field_matches_linear_cantilever() {
    let ei_mod = 10e6;
    let side = 1e-3;
    let flux = 0.02;
    let b = 1e-3;
    let spec = RodSpec::new("uniform", [0.01; 3], [ei_mod; 3], side, flux).unwrap();
    let rod = build_rod(&spec, 10.0).unwrap();
    // the default absolute tolerance is of the order of the whole load here
    let opts = SolverOptions {
        tol: 1e-18,
        ..SolverOptions::default()
    };
    let eq = solve_equilibrium(&rod, b, FRAC_PI_2, &opts).unwrap();
    assert!(eq.converged, "gradient {}", eq.gradient_norm);
    let tau = flux / MU0 * side * side * b;
    let ei = ei_mod * side.powi(4) / 12.0;
    let want = tau * 0.03f64.powi(2) / (2.0 * ei);
    let tip = *eq.joint_angles.last().unwrap();
    assert!(((tip - want) / want).abs() < 0.01, "tip {tip} vs {want}");
}

#[test]
fn pure_tip_moment_gives_constant_curvature() {
    let spec = RodSpec::new("uniform", [0.01; 3], [10e6; 3], 1e-3, 0.02).unwrap();
    let rod = build_rod(&spec, 2.0).unwrap();
    let ei = rod.stiffness[0];
    let opts = SolverOptions {
        tip_moment: 0.5 * ei / 0.03,
        ..SolverOptions::default()
    };
    let eq = solve_equilibrium(&rod, 0.0, FRAC_PI_2, &opts).unwrap();
    assert!(eq.converged);
    let k = curvature_profile(&eq).unwrap();
    let (lo, hi) = k
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let mean = k.iter().sum::<f64>() / k.len() as f64;
    assert!((hi - lo) / mean < 1e-3);
    assert!((mean - opts.tip_moment / ei).abs() / mean < 1e-6);
}

#[test]
fn zero_field_is_a_fixed_point() {
    for spec in all_bundled() {
        let eq = solve(&spec, 0.0);
        assert!(eq.joint_angles.iter().all(|&a| a == 0.0));
        assert!(eq.gradient_norm < SolverOptions::default().tol);
    }
}

#[test]
fn equilibrium_invariants() {
    let eq = solve(&no2(), 0.066);
    assert_eq!(eq.centerline[0], [0.0, 0.0]);
    for w in eq.centerline.windows(2) {
        let d = (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]);
        assert!((d - eq.segment_length).abs() < 1e-12);
    }
    assert!(eq.gradient_norm < 1e-10);
    assert!(eq.bending_energy > 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn field_and_clamp_rotation_rotate_the_centerline(delta in -3.0f64..3.0, b in 0.0f64..0.12) {
        let rod = build_rod(&no2(), 2.0).unwrap();
        let base = solve_equilibrium(&rod, b, FRAC_PI_2, &SolverOptions::default()).unwrap();
        let opts = SolverOptions { base_angle: delta, ..SolverOptions::default() };
        let rotated = solve_equilibrium(&rod, b, FRAC_PI_2 + delta, &opts).unwrap();
        prop_assert!(base.converged && rotated.converged);
        let (s, c) = delta.sin_cos();
        for (p, q) in base.centerline.iter().zip(&rotated.centerline) {
            let r = [c * p[0] - s * p[1], s * p[0] + c * p[1]];
            prop_assert!((r[0] - q[0]).abs() < 1e-9 && (r[1] - q[1]).abs() < 1e-9);
        }
    }

    #[test]
    fn equilibrium_does_not_exceed_straight_energy(b in 0.0f64..0.15, angle in 0.0f64..std::f64::consts::PI, idx in 0usize..7) {
        let spec = &all_bundled()[idx];
        let rod = build_rod(spec, 2.0).unwrap();
        let eq = solve_equilibrium(&rod, b, angle, &SolverOptions::default()).unwrap();
        let field = magbend_core::uniform_field(b, angle);
        let straight = total(&rod, &vec![0.0; rod.len()], field);
        prop_assert!(eq.total_energy() <= straight + 1e-18);
    }
}

#[test]
fn mesh_refinement_moves_the_tip_less_than_one_percent() {
    for spec in all_bundled() {
        for field in [0.05, 0.12] {
            let coarse = solve_equilibrium(
                &build_rod(&spec, 2.0).unwrap(),
                field,
                FRAC_PI_2,
                &SolverOptions::default(),
            )
            .unwrap();
            let fine = solve_equilibrium(
                &build_rod(&spec, 4.0).unwrap(),
                field,
                FRAC_PI_2,
                &SolverOptions::default(),
            )
            .unwrap();
            let (a, b) = (coarse.tip(), fine.tip());
            let shift = (a[0] - b[0]).hypot(a[1] - b[1]) / b[0].hypot(b[1]);
            assert!(shift < 0.01, "{} at {field} T: {shift}", spec.name);
        }
    }
}

#[test]
fn bending_grows_with_field() {
    let spec = no2();
    let a: Vec<f64> = [0.038, 0.05, 0.066, 0.1]
        .iter()
        .map(|&b| coefficient(&spec, b).abs())
        .collect();
    assert!(a.windows(2).all(|w| w[1] > w[0]), "{a:?}");
}

#[test]
fn softer_sections_bend_more() {
    let stiff = no2();
    let soft = RodSpec::new(
        "soft",
        stiff.lengths(),
        stiff.moduli().map(|e| 0.8 * e),
        stiff.cross_section_side,
        stiff.residual_flux,
    )
    .unwrap();
    assert!(coefficient(&soft, 0.05).abs() > coefficient(&stiff, 0.05).abs());
}

#[test]
fn thinner_rods_bend_more() {
    let base = no2();
    let mut thin = base.clone();
    thin.cross_section_side *= 0.8;
    assert!(coefficient(&thin, 0.05).abs() > coefficient(&base, 0.05).abs());
}

#[test]
fn longer_top_section_bends_more() {
    let base = no2();
    let long_top = RodSpec::new(
        "top",
        [0.008, 0.008, 0.014],
        base.moduli(),
        base.cross_section_side,
        base.residual_flux,
    )
    .unwrap();
    assert!(coefficient(&long_top, 0.05).abs() > coefficient(&base, 0.05).abs());
}

fn bottom_max_curvature(eq: &Equilibrium, rod: &DiscreteRod) -> f64 {
    curvature_profile(eq)
        .unwrap()
        .iter()
        .zip(&rod.section)
        .filter(|(_, &s)| s == 0)
        .map(|(k, _)| k.abs())
        .fold(0.0, f64::max)
}

#[test]
fn graded_rod_bends_less_sharply_at_the_base_for_equal_tip_angle() {
    let graded_spec = no2();
    let soft_spec = graded_spec.uniform(10e6).unwrap();
    let graded = build_rod(&graded_spec, 2.0).unwrap();
    let soft = build_rod(&soft_spec, 2.0).unwrap();
    let opts = SolverOptions::default();
    let g = solve_equilibrium(&graded, 0.066, FRAC_PI_2, &opts).unwrap();
    let target = *g.joint_angles.last().unwrap();

    // bisect the field on the soft rod until its tip angle matches
    let (mut lo, mut hi) = (0.0, 0.066);
    let mut s = solve_equilibrium(&soft, hi, FRAC_PI_2, &opts).unwrap();
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        s = solve_equilibrium(&soft, mid, FRAC_PI_2, &opts).unwrap();
        if *s.joint_angles.last().unwrap() > target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    assert!((s.joint_angles.last().unwrap() - target).abs() < 1e-9 * target.abs().max(1.0));
    assert!(bottom_max_curvature(&g, &graded) < bottom_max_curvature(&s, &soft));
}
