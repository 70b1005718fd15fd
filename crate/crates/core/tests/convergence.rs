mod common;

use abphase::em::{GaugeState, Profile};
use abphase::phase::{phase_diff_potentials, phase_surface};
use abphase::surface::build_surface;
use abphase::{DeformationStrategy, PhysicalConstants, QuadratureSpec};
use common::*;

/// Flux ramps while the arms move and the solenoid stays outside the swept
/// region: the integrand is smooth, so the surface quadrature is genuinely
/// second order.
#[test]
fn moving_arms_converge_at_second_order() {
    let (interf, _) = &enclosing_loops()[0];
    let cfg = solenoid_at(4.0, 3.0, 0.5, Profile::new(vec![(0.0, 0.0), (3.0, 6.0)]).unwrap());
    let k = PhysicalConstants::default();
    let q = QuadratureSpec::default();
    let exact = phase_diff_potentials(interf, &cfg, &GaugeState::base(), &k, &QuadratureSpec { n: 256, ..q })
        .unwrap()
        .total;
    let mesh = build_surface(interf, &DeformationStrategy::Direct, &cfg, 8, 9).unwrap();
    let reports: Vec<_> = [1, 2, 4, 8]
        .iter()
        .map(|&f| {
            let m = if f == 1 { mesh.clone() } else { mesh.refine(f).unwrap() };
            phase_surface(&m, &cfg, &k, &q).unwrap()
        })
        .collect();
    for w in reports.windows(2) {
        let (coarse, fine) = (&w[0], &w[1]);
        let ratio = coarse.error_estimate / fine.error_estimate;
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
        assert!((fine.total - coarse.total).abs() < coarse.error_estimate);
        let true_err = (coarse.total - exact).abs();
        assert!((coarse.error_estimate - true_err).abs() < 0.05 * true_err, "{coarse:?} vs {exact}");
    }
}

#[test]
fn refinement_keeps_degenerate_curves_and_node_counts() {
    let s = cage_family(0.2, 1.0, 1.0);
    let mesh = build_surface(&s.interf, &s.around, &s.config, 12, 9).unwrap();
    let fine = mesh.refine(2).unwrap();
    assert_eq!(fine.nodes_per_curve(), 2 * 9 - 1);
    assert_eq!(fine.time_intervals(), 2 * mesh.time_intervals());
    assert_eq!(fine.curve_length(0), 0.0);
    assert_eq!(fine.curve_length(fine.times().len() - 1), 0.0);
    let k = PhysicalConstants::default();
    let q = QuadratureSpec::default();
    let coarse = phase_surface(&mesh, &s.config, &k, &q).unwrap();
    let refined = phase_surface(&fine, &s.config, &k, &q).unwrap();
    assert!((coarse.total - refined.total).abs() <= coarse.error_estimate.max(1e-11));
}
