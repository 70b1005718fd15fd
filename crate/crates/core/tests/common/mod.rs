//! Scenario builders shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use abphase::em::{ChiSpec, FieldConfig, Monomial, PotentialCage, Profile, ShieldedCage, SolenoidSource};
use abphase::geometry::{Vec2, Vec3};
use abphase::{DeformationStrategy, Interferometer, Worldline};
use rand::Rng;

pub fn interf(a: &[[f64; 4]], b: &[[f64; 4]]) -> Interferometer {
    Interferometer::new(Worldline::from_knots(a).unwrap(), Worldline::from_knots(b).unwrap()).unwrap()
}

pub fn solenoid_at(x: f64, y: f64, radius: f64, flux: Profile) -> FieldConfig {
    FieldConfig::new(vec![SolenoidSource::new("s", Vec2::new(x, y), radius, flux)], vec![], vec![]).unwrap()
}

/// Three loop geometries that enclose a solenoid at the returned axis, each
/// traversed counter-clockwise (arm a, then arm b backwards).
pub fn enclosing_loops() -> Vec<(Interferometer, Vec2)> {
    vec![
        (
            interf(
                &[[-3.0, 0.0, 0.0, 0.0], [0.0, -2.0, 0.0, 1.0], [3.0, 0.0, 0.0, 2.0]],
                &[[-3.0, 0.0, 0.0, 0.0], [0.0, 2.0, 0.0, 1.0], [3.0, 0.0, 0.0, 2.0]],
            ),
            Vec2::new(0.0, 0.0),
        ),
        (
            interf(
                &[[-2.0, -2.0, 0.0, 0.0], [2.0, -2.0, 0.5, 1.0], [2.0, 2.0, 0.0, 2.0]],
                &[[-2.0, -2.0, 0.0, 0.0], [-2.0, 2.0, -0.3, 1.5], [2.0, 2.0, 0.0, 2.0]],
            ),
            Vec2::new(0.3, -0.4),
        ),
        (
            interf(
                &[
                    [0.0, -3.0, 0.0, 0.0],
                    [3.0, -1.0, 0.0, 0.7],
                    [3.0, -1.0, 0.0, 1.2],
                    [2.5, 2.0, 0.2, 2.0],
                    [0.0, 3.0, 0.0, 3.0],
                ],
                &[[0.0, -3.0, 0.0, 0.0], [-2.0, -1.0, 0.0, 1.0], [-3.0, 1.0, 0.0, 2.5], [0.0, 3.0, 0.0, 3.0]],
            ),
            Vec2::new(0.2, 0.1),
        ),
    ]
}

/// Arms from (−3, 0) to (3, 0): arm b over the top, arm a sweeping
/// `(2n − 1)π` counter-clockwise from the left, so the loop winds `n` times
/// about the origin.
pub fn winding_interferometer(n: i32) -> Interferometer {
    let sweep = (2 * n - 1) as f64 * PI;
    let steps = ((sweep.abs() / (PI / 6.0)).ceil() as usize).max(2);
    let t_end = 4.0;
    let mut a = vec![[-3.0, 0.0, 0.0, 0.0]];
    for i in 1..steps {
        let f = i as f64 / steps as f64;
        let ang = PI + sweep * f;
        let r = 2.0 + 0.3 * (3.0 * ang).sin();
        a.push([r * ang.cos(), r * ang.sin(), 0.0, t_end * f]);
    }
    a.push([3.0, 0.0, 0.0, t_end]);
    let b: Vec<[f64; 4]> = (0..=6)
        .map(|i| {
            let f = i as f64 / 6.0;
            let ang = PI * (1.0 - f);
            [3.0 * ang.cos(), 3.0 * ang.sin(), 0.0, t_end * f]
        })
        .collect();
    interf(&a, &b)
}

/// Trapezoidal pulse from `t0` to `t1` with ramps of `rise`; its integral is
/// `height·(t1 − t0 − rise)`.
pub fn trapezoid(t0: f64, t1: f64, rise: f64, height: f64) -> Profile {
    Profile::new(vec![(t0, 0.0), (t0 + rise, height), (t1 - rise, height), (t1, 0.0)]).unwrap()
}

/// Potential cages at (0, ∓2) holding the arms over [1, 3] of a [0, 4] run.
pub fn pulse_pair(va: Profile, vb: Profile) -> (Interferometer, FieldConfig) {
    let i = interf(
        &[[-3.0, 0.0, 0.0, 0.0], [0.0, -2.0, 0.0, 1.0], [0.0, -2.0, 0.0, 3.0], [3.0, 0.0, 0.0, 4.0]],
        &[[-3.0, 0.0, 0.0, 0.0], [0.0, 2.0, 0.0, 1.0], [0.0, 2.0, 0.0, 3.0], [3.0, 0.0, 0.0, 4.0]],
    );
    let cfg = FieldConfig::new(
        vec![],
        vec![],
        vec![
            PotentialCage::new("a", Vec3::new(0.0, -2.0, 0.0), 0.3, 0.5, va),
            PotentialCage::new("b", Vec3::new(0.0, 2.0, 0.0), 0.3, 0.5, vb),
        ],
    )
    .unwrap();
    (i, cfg)
}

pub struct CageScenario {
    pub interf: Interferometer,
    pub config: FieldConfig,
    pub around: DeformationStrategy,
    /// `(ΔΦ/2π)·Δφ` for unit `q/ħ`.
    pub oracle: f64,
}

/// Shielded cages on a circle of radius 3 about a solenoid at the origin, at
/// azimuths `phi_a` and `phi_a + delta` (`0 < delta < π`). The arms meet
/// outside the chord, dwell over [1, 3] while the flux grows by `dphi` over
/// [1.5, 2.5], and leave through a common end point further out.
pub fn cage_family(phi_a: f64, delta: f64, dphi: f64) -> CageScenario {
    let rc = 3.0;
    let phi_b = phi_a + delta;
    let mid = phi_a + 0.5 * delta;
    let polar = |r: f64, ang: f64| [r * ang.cos(), r * ang.sin()];
    let x0 = polar(rc * (0.5 * delta).cos() + 0.5, mid);
    let end = polar(rc + 1.5, mid);
    let (ca, cb) = (polar(rc, phi_a), polar(rc, phi_b));
    let arm = |c: [f64; 2]| {
        vec![[x0[0], x0[1], 0.0, 0.0], [c[0], c[1], 0.0, 1.0], [c[0], c[1], 0.0, 3.0], [end[0], end[1], 0.0, 4.0]]
    };
    let config = FieldConfig::new(
        vec![SolenoidSource::new("s", Vec2::zeros(), 0.5, Profile::ramp(1.5, 0.5, 2.5, 0.5 + dphi).unwrap())],
        vec![
            ShieldedCage::new("a", Vec3::new(ca[0], ca[1], 0.0), 0.5),
            ShieldedCage::new("b", Vec3::new(cb[0], cb[1], 0.0), 0.5),
        ],
        vec![],
    )
    .unwrap();
    let (from, to) = (phi_a - 0.3, phi_b - 2.0 * PI + 0.3);
    let around = DeformationStrategy::ViaWaypoints(
        (0..=10)
            .map(|j| {
                let ang = from + (to - from) * j as f64 / 10.0;
                Vec2::new(1.5 * ang.cos(), 1.5 * ang.sin())
            })
            .collect(),
    );
    CageScenario { interf: interf(&arm(ca), &arm(cb)), config, around, oracle: dphi / (2.0 * PI) * delta }
}

/// Smooth random gauge function: a low-degree polynomial, a Gaussian bump,
/// or their sum.
pub fn random_chi(rng: &mut impl Rng) -> ChiSpec {
    let poly = |rng: &mut dyn rand::RngCore| {
        let n = rng.random_range(1..=3);
        let terms = (0..n)
            .map(|_| {
                let mut powers = [0u32; 4];
                for _ in 0..rng.random_range(1..=4) {
                    powers[rng.random_range(0..4)] += 1;
                }
                Monomial { coef: rng.random_range(-0.5..0.5), powers }
            })
            .collect();
        ChiSpec::Polynomial { terms }
    };
    let gaussian = |rng: &mut dyn rand::RngCore| ChiSpec::Gaussian {
        amplitude: rng.random_range(-2.0..2.0),
        center: [
            rng.random_range(-3.0..3.0),
            rng.random_range(-3.0..3.0),
            rng.random_range(-0.5..0.5),
            rng.random_range(0.0..4.0),
        ],
        sigma: rng.random_range(0.7..2.0),
        tau: rng.random_range(0.4..1.5),
    };
    match rng.random_range(0..3) {
        0 => poly(rng),
        1 => gaussian(rng),
        _ => ChiSpec::Sum { parts: vec![poly(rng), gaussian(rng)] },
    }
}
