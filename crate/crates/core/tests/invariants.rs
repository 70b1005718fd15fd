//! Property-based invariants over randomized scenarios.
mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use abphase::em::{GaugeFunction, GaugeState, Profile};
use abphase::geometry::Vec2;
use abphase::phase::{
    gauge_invariance_audit, phase_decomposition, phase_diff_potentials, phase_field_line, phase_surface,
};
use abphase::surface::build_surface;
use abphase::{DeformationStrategy, PhysicalConstants, QuadratureSpec};
use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn quad() -> QuadratureSpec {
    QuadratureSpec { n: 16, m: 17, ..Default::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn decomposition_matches_field_line(phi_a in -PI..PI, delta in 0.4..2.6f64, dphi in -4.0 * PI..4.0 * PI) {
        let s = cage_family(phi_a, delta, dphi);
        let k = PhysicalConstants::default();
        let d = phase_decomposition(&s.interf, &s.config, &GaugeState::base(), &k, &quad()).unwrap();
        let f = phase_field_line(&s.interf, &s.config, &k, &quad(), None).unwrap();
        prop_assert!((d.total - f.total).abs() <= 1e-6);
        prop_assert!((d.total - s.oracle).abs() <= 1e-6);
    }

    #[test]
    fn phase_is_linear_in_flux_change_and_coupling(phi_a in -PI..PI, delta in 0.4..2.6f64, dphi in 0.1..6.0f64, q in -3.0..3.0f64) {
        let k = PhysicalConstants { q_over_hbar: q };
        let one = cage_family(phi_a, delta, dphi);
        let two = cage_family(phi_a, delta, 2.0 * dphi);
        let p1 = phase_diff_potentials(&one.interf, &one.config, &GaugeState::base(), &k, &quad()).unwrap().total;
        let p2 = phase_diff_potentials(&two.interf, &two.config, &GaugeState::base(), &k, &quad()).unwrap().total;
        prop_assert!((p2 - 2.0 * p1).abs() <= 1e-8);
        prop_assert!((p1 - q * one.oracle).abs() <= 1e-8);
    }

    #[test]
    fn swapping_arms_negates_the_surface_phase(phi_a in -PI..PI, delta in 0.4..2.6f64, dphi in -6.0..6.0f64) {
        let s = cage_family(phi_a, delta, dphi);
        let k = PhysicalConstants::default();
        let fwd = build_surface(&s.interf, &s.around, &s.config, 12, 9).unwrap();
        let rev = build_surface(&s.interf.swapped(), &s.around.reversed(), &s.config, 12, 9).unwrap();
        let a = phase_surface(&fwd, &s.config, &k, &quad()).unwrap();
        let b = phase_surface(&rev, &s.config, &k, &quad()).unwrap();
        prop_assert!((a.total + b.total).abs() <= 1e-10);
        prop_assert!((a.term("magnetic") + b.term("magnetic")).abs() <= 1e-10);
    }

    #[test]
    fn non_enclosing_detours_leave_the_surface_phase_unchanged(
        phi_a in -PI..PI, delta in 0.6..2.4f64, dphi in -6.0..6.0f64,
        push in 0.2..1.2f64, along in 0.2..0.8f64,
    ) {
        // a waypoint pushed outward from the chord, away from the solenoid
        let s = cage_family(phi_a, delta, dphi);
        let (ra, rb) = (Vec2::new(3.0 * phi_a.cos(), 3.0 * phi_a.sin()), {
            let b = phi_a + delta;
            Vec2::new(3.0 * b.cos(), 3.0 * b.sin())
        });
        let on_chord = ra + (rb - ra) * along;
        let wp = on_chord + on_chord.normalize() * push;
        let k = PhysicalConstants::default();
        let direct = build_surface(&s.interf, &DeformationStrategy::Direct, &s.config, 16, 17).unwrap();
        let detour = build_surface(&s.interf, &DeformationStrategy::ViaWaypoints(vec![wp]), &s.config, 16, 17).unwrap();
        let a = phase_surface(&direct, &s.config, &k, &quad()).unwrap();
        let b = phase_surface(&detour, &s.config, &k, &quad()).unwrap();
        prop_assert!((a.total - b.total).abs() <= 1e-6, "{} vs {}", a.total, b.total);
    }

    #[test]
    fn random_gauges_leave_the_difference_invariant(seed in any::<u64>(), phi_a in -PI..PI, dphi in -6.0..6.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = cage_family(phi_a, 1.3, dphi);
        let chis: Vec<Arc<dyn GaugeFunction>> = (0..3).map(|_| Arc::new(random_chi(&mut rng)) as Arc<dyn GaugeFunction>).collect();
        let a = gauge_invariance_audit(&s.interf, &s.config, &chis, &PhysicalConstants::default(), &quad()).unwrap();
        prop_assert!(a.max_deviation <= 1e-8, "{:?}", a.deviations);
    }

    #[test]
    fn winding_sets_the_static_phase(n in -3i32..=3, phi0 in -7.0..7.0f64) {
        let cfg = solenoid_at(0.0, 0.0, 0.5, Profile::constant(phi0));
        let p = phase_diff_potentials(&winding_interferometer(n), &cfg, &GaugeState::base(), &PhysicalConstants::default(), &quad()).unwrap();
        prop_assert!((p.total - n as f64 * phi0).abs() <= 1e-9);
    }

    #[test]
    fn mesh_boundaries_follow_the_arms(phi_a in -PI..PI, delta in 0.4..2.6f64, n in 2usize..20, m in 2usize..20) {
        let s = cage_family(phi_a, delta, 1.0);
        let mesh = build_surface(&s.interf, &s.around, &s.config, n, m).unwrap();
        for (k, &t) in mesh.times().iter().enumerate() {
            let c = mesh.curve(k);
            prop_assert!((c[0] - s.interf.arm_a().position(t).unwrap()).norm() <= 1e-12);
            prop_assert!((c[c.len() - 1] - s.interf.arm_b().position(t).unwrap()).norm() <= 1e-12);
        }
    }
}
