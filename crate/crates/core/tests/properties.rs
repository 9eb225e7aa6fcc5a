use bentring_core::oracle::{trace_ray, OdeOptions};
use bentring_core::{
    chi_crystal, mean_reflection_rough, ode_deflection, quad_deflection, ray_trace,
    reflection_condition, scale, sweep, BeamSpec, Mode, RingPotentialSpec, ScaledGeometry,
};
use proptest::prelude::*;

/// Random valid geometry with a signed potential.
fn geometry() -> impl Strategy<Value = ScaledGeometry> {
    (
        1e-4..0.02f64,
        1.2..5.0f64,
        1usize..=5,
        1e-6..0.03f64,
        any::<bool>(),
    )
        .prop_map(|(a, ratio, n, strength, negative)| {
            let phi0 = if negative { -strength } else { strength };
            ScaledGeometry::new(a, a * ratio, n, phi0).unwrap()
        })
}

/// Critical impact parameters at which `chi` jumps: the ray grazes a wall
/// from its lower-index side.
fn jump_points(g: &ScaledGeometry) -> Vec<f64> {
    let root = g.big_phi().sqrt();
    (0..g.plane_count())
        .map(|i| {
            if g.phi0() > 0.0 {
                root * g.inner_wall(i)
            } else {
                g.outer_wall(i)
            }
        })
        .collect()
}

fn far_from_breakpoints(g: &ScaledGeometry, b: f64, gap: f64) -> bool {
    g.critical_impact_parameters()
        .iter()
        .all(|c| (b - c).abs() >= gap)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scaling_all_lengths_leaves_geometry_unchanged(
        radius in 0.1..20.0f64,
        d in 1e-10..5e-10f64,
        ratio in 0.1..0.9f64,
        phi0 in -1e-7..1e-7f64,
        k in 1e-3..1e3f64,
        m in -20i32..20,
    ) {
        let base = RingPotentialSpec::new(radius, 3, d, ratio * d, 0.0).unwrap();
        let beam = BeamSpec::with_phi0(phi0).unwrap();
        let g = scale(&base, &beam).unwrap();

        let exact = 2f64.powi(m);
        let scaled = RingPotentialSpec::new(exact * radius, 3, exact * d, exact * ratio * d, 0.0).unwrap();
        prop_assert_eq!(scale(&scaled, &beam).unwrap(), g);

        let scaled = RingPotentialSpec::new(k * radius, 3, k * d, k * ratio * d, 0.0).unwrap();
        let h = scale(&scaled, &beam).unwrap();
        prop_assert!((h.a_hat() - g.a_hat()).abs() <= 4.0 * f64::EPSILON * g.a_hat());
        prop_assert!((h.d_hat() - g.d_hat()).abs() <= 4.0 * f64::EPSILON * g.d_hat());
        prop_assert_eq!(h.phi0(), g.phi0());
    }

    #[test]
    fn potential_strengths_sum_to_one(phi0 in -0.99..0.99f64) {
        let g = ScaledGeometry::new(0.01, 0.02, 2, phi0).unwrap();
        prop_assert!((g.big_phi() + g.phi0() - 1.0).abs() <= f64::EPSILON);
    }

    #[test]
    fn reflection_condition_is_monotone(g in geometry(), bump in 0.0..0.05f64) {
        if reflection_condition(&g) {
            let stronger = g.with_phi0(g.phi0() + bump).unwrap();
            prop_assert!(reflection_condition(&stronger));
        }
    }

    #[test]
    fn chi_is_twice_alpha(g in geometry(), b in 0.0..1.2f64) {
        for mode in [Mode::Exact, Mode::SmallAngle, Mode::Reduced] {
            let s = chi_crystal(&g, b, mode);
            prop_assert_eq!(s.chi, 2.0 * s.alpha);
        }
    }

    #[test]
    fn outside_the_crystal_is_undeflected(g in geometry(), b in 1.0..3.0f64) {
        prop_assert_eq!(chi_crystal(&g, b, Mode::Exact).chi, 0.0);
        prop_assert_eq!(ray_trace(&g, b).chi, 0.0);
    }

    #[test]
    fn closed_form_matches_ray_trace(g in geometry(), b in 0.0..1.1f64) {
        prop_assume!(far_from_breakpoints(&g, b, 1e-12));
        let closed = chi_crystal(&g, b, Mode::Exact).chi;
        let traced = ray_trace(&g, b).chi;
        prop_assert!((closed - traced).abs() <= 1e-9, "closed {closed:e} traced {traced:e}");
    }

    #[test]
    fn closed_form_matches_ray_trace_inside_rings(g in geometry(), t in 0.0..1.0f64) {
        let lo = g.big_phi().sqrt().min(1.0) * g.core_radius();
        let b = lo + t * (1.0 - lo);
        prop_assume!(far_from_breakpoints(&g, b, 1e-12));
        let closed = chi_crystal(&g, b, Mode::Exact).chi;
        let traced = ray_trace(&g, b).chi;
        prop_assert!((closed - traced).abs() <= 1e-9, "closed {closed:e} traced {traced:e}");
    }

    #[test]
    fn bouguer_invariant_is_conserved(g in geometry(), b in 0.0..1.05f64) {
        for c in ray_trace(&g, b).crossings {
            let before = c.index_before * c.radius * c.incidence.sin();
            let after = c.index_after * c.radius * c.transmitted.sin();
            prop_assert!((before - b).abs() <= 1e-12);
            prop_assert!((after - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn reversed_ray_has_same_deflection(g in geometry(), b in 0.0..1.05f64) {
        let forward = ray_trace(&g, b);
        let d = forward.exit_direction;
        let back = trace_ray(&g, forward.exit_point, [-d[0], -d[1]]);
        prop_assert!((back.chi.abs() - forward.chi.abs()).abs() <= 1e-12);
    }

    #[test]
    fn empty_core_attracts_positive_charge(g in geometry(), t in 0.0..1.0f64) {
        let b = t * g.big_phi().sqrt().min(1.0) * g.core_radius();
        let chi = chi_crystal(&g, b, Mode::Exact).chi;
        prop_assert!(chi * g.phi0().signum() <= 0.0, "chi {chi:e}");
    }

    #[test]
    fn quadrature_matches_ray_trace_in_core(g in geometry(), t in 0.0..0.99f64) {
        let b = t * g.big_phi().sqrt().min(1.0) * (1.0 - g.plane_count() as f64 * g.d_hat());
        let q = quad_deflection(&g, b, 1e-12).unwrap();
        prop_assert!((q - ray_trace(&g, b).chi).abs() <= 1e-10);
    }

    #[test]
    fn rough_average_is_the_mean_of_the_outer_tail(phi0 in 1e-12..1e-6f64) {
        let g = ScaledGeometry::new(2e-10, 8e-10, 1, phi0).unwrap();
        let curve = sweep(&g, g.big_phi().sqrt(), 1.0, 20_001, Mode::SmallAngle).unwrap();
        let s = &curve.samples;
        let area: f64 = s
            .windows(2)
            .map(|w| 0.5 * (w[0].alpha + w[1].alpha) * (w[1].b_hat - w[0].b_hat))
            .sum();
        let mean_chi = 2.0 * area / (s[s.len() - 1].b_hat - s[0].b_hat);
        let rough = mean_reflection_rough(&g).unwrap();
        prop_assert!(((mean_chi - rough) / rough).abs() <= 5e-3);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn sweep_is_bit_identical_to_pointwise(g in geometry(), lo in 0.0..0.9f64, count in 2usize..2000) {
        let a = sweep(&g, lo, 1.05, count, Mode::Exact).unwrap();
        let b = sweep(&g, lo, 1.05, count, Mode::Exact).unwrap();
        prop_assert_eq!(&a, &b);
        for s in &a.samples {
            prop_assert_eq!(*s, chi_crystal(&g, s.b_hat, Mode::Exact));
        }
        prop_assert!(a.samples.windows(2).all(|w| w[0].b_hat < w[1].b_hat));
    }
}

#[test]
fn orbit_integration_converges_monotonically() {
    for (phi0, b) in [(0.02, 0.5), (0.02, 0.975), (-0.02, 0.5), (-0.02, 0.97)] {
        let g = ScaledGeometry::new(0.04, 0.05, 1, phi0).unwrap();
        let traced = ray_trace(&g, b).chi;
        let errors: Vec<f64> = (2..8)
            .map(|k| {
                let eps = g.a_hat() / 2f64.powi(k);
                (ode_deflection(&g, b, eps, OdeOptions::default()).unwrap() - traced).abs()
            })
            .collect();
        assert!(
            errors.windows(2).all(|w| w[1] < w[0]),
            "phi0 {phi0} b {b}: {errors:?}"
        );
    }
}

/// Away from the grazing jumps the deflection function is continuous; its
/// square-root branch points make the neighbour differences shrink like the
/// square root of the grid step.
#[test]
fn deflection_is_continuous_between_jumps() {
    for (a, phi0) in [(0.04, 0.02), (0.005, 0.02), (0.04, -0.02), (0.005, -0.02)] {
        let g = ScaledGeometry::new(a, 0.05, 3, phi0).unwrap();
        let jumps = jump_points(&g);
        let max_step = |n: usize| {
            let h = 1.1 / n as f64;
            (0..n)
                .filter(|&k| {
                    !jumps
                        .iter()
                        .any(|&c| c >= k as f64 * h && c <= (k + 1) as f64 * h)
                })
                .map(|k| {
                    let x = chi_crystal(&g, k as f64 * h, Mode::Exact).chi;
                    let y = chi_crystal(&g, (k + 1) as f64 * h, Mode::Exact).chi;
                    (y - x).abs()
                })
                .fold(0.0, f64::max)
        };
        let coarse = max_step(250_000);
        let fine = max_step(1_000_000);
        assert!(
            fine <= 0.6 * coarse,
            "a {a} phi0 {phi0}: {coarse:e} -> {fine:e}"
        );
        assert!(
            fine <= 4.0 * (1.1e-6f64).sqrt(),
            "a {a} phi0 {phi0}: {fine:e}"
        );
    }
}

#[test]
fn grazing_jumps_are_finite() {
    let g = ScaledGeometry::new(0.04, 0.05, 1, 0.02).unwrap();
    let c = jump_points(&g)[0];
    let left = chi_crystal(&g, c - 1e-12, Mode::Exact).chi;
    let right = chi_crystal(&g, c + 1e-12, Mode::Exact).chi;
    // a ray grazing the wall from the plane side leaves it at arccos(sqrt(Phi))
    let expected = 2.0 * 0.02f64.sqrt().asin();
    assert!(
        (right - left - expected).abs() < 1e-2 * expected,
        "{}",
        right - left
    );
    assert!((left - ray_trace(&g, c - 1e-12).chi).abs() < 1e-9);
    assert!((right - ray_trace(&g, c + 1e-12).chi).abs() < 1e-9);
}
