//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs without the libtest harness so the lines always print.

mod common;

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use abphase::em::{Event, FieldConfig, GaugeFunction, GaugeState, Profile};
use abphase::geometry::{xy, Vec2, Vec3};
use abphase::phase::{
    gauge_invariance_audit, phase_decomposition, phase_diff_potentials, phase_field_line, phase_surface,
    surface_difference_audit, vector_line_integral,
};
use abphase::scenario::{load_preset, preset_names};
use abphase::surface::{build_surface, winding_number};
use abphase::{DeformationStrategy, PhysicalConstants, QuadratureSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

const MAGNETIC_REL_TOL: f64 = 1e-6;
const NON_ENCLOSING_TOL: f64 = 1e-8;
const ELECTRIC_TOL: f64 = 1e-6;
const PAIRWISE_TOL: f64 = 1e-5;
const ORACLE_TOL: f64 = 1e-4;
const SURFACE_DIFF_TOL: f64 = 1e-6;
const GAUGE_TOL: f64 = 1e-8;
const GAUGES_PER_PRESET: usize = 20;
const WINDING_TOL: f64 = 1e-6;
const FD_TOL: f64 = 1e-5;
const FD_STEP: f64 = 1e-3;
const FD_EVENTS: usize = 200;
/// Events closer than this to a field discontinuity (in space or time) are
/// outside the smooth region probed by the finite-difference check.
const FD_MARGIN: f64 = 10.0 * FD_STEP;
const CIRCULATION_TOL: f64 = 1e-8;
/// Below this, error estimates are rounding noise and no convergence rate is
/// measurable.
const ROUNDING_FLOOR: f64 = 1e-11;
const SHRINK_FACTOR: f64 = 4.0;

/// Tracks the worst deviation seen and the first few violations.
#[derive(Default)]
struct Check {
    worst: f64,
    failures: Vec<String>,
}

impl Check {
    fn within(&mut self, what: impl FnOnce() -> String, deviation: f64, tol: f64) {
        self.worst = self.worst.max(deviation);
        if deviation.is_nan() || deviation > tol {
            self.failures.push(format!("{}: deviation {deviation:.3e} > {tol:.0e}", what()));
        }
    }

    fn holds(&mut self, what: impl FnOnce() -> String, ok: bool) {
        if !ok {
            self.failures.push(what());
        }
    }

    fn finish(self, summary: String) -> Result<String, String> {
        if self.failures.is_empty() {
            Ok(summary)
        } else {
            Err(format!("{summary}; {}", self.failures.join("; ")))
        }
    }
}

fn unit() -> PhysicalConstants {
    PhysicalConstants::default()
}

fn magnetic_ab() -> Result<String, String> {
    let mut c = Check::default();
    let q = QuadratureSpec::default();
    let base = GaugeState::base();
    for phi0 in [PI, 2.0 * PI, 5.3] {
        for (g, (interf, axis)) in enclosing_loops().into_iter().enumerate() {
            let cfg = solenoid_at(axis.x, axis.y, 0.5, Profile::constant(phi0));
            let p = phase_diff_potentials(&interf, &cfg, &base, &unit(), &q).map_err(|e| e.to_string())?;
            c.within(|| format!("Φ0={phi0} loop {g}"), (p.total - phi0).abs() / phi0, MAGNETIC_REL_TOL);
        }
        let (interf, _) = &enclosing_loops()[1];
        let cfg = solenoid_at(5.0, 5.0, 0.5, Profile::constant(phi0));
        let p = phase_diff_potentials(interf, &cfg, &base, &unit(), &q).map_err(|e| e.to_string())?;
        c.within(|| format!("Φ0={phi0} non-enclosing"), p.total.abs(), NON_ENCLOSING_TOL);
    }
    let worst = c.worst;
    c.finish(format!("9 enclosing + 3 non-enclosing runs, worst deviation {worst:.2e}"))
}

fn electric_ab() -> Result<String, String> {
    let mut c = Check::default();
    let q = QuadratureSpec::default();
    let pairs = [
        (trapezoid(1.5, 2.75, 0.25, 1.0), Profile::constant(0.0), 1.0),
        (trapezoid(1.2, 2.2, 0.2, 0.5), trapezoid(1.4, 2.9, 0.3, 0.75), -0.5),
        (trapezoid(1.1, 2.9, 0.4, 2.0), trapezoid(1.5, 2.3, 0.3, 0.2), 2.7),
    ];
    for (va, vb, integral) in pairs {
        let (interf, cfg) = pulse_pair(va, vb);
        let p = phase_diff_potentials(&interf, &cfg, &GaugeState::base(), &unit(), &q).map_err(|e| e.to_string())?;
        c.within(|| format!("∫ΔV={integral} potentials"), (p.total + integral).abs(), ELECTRIC_TOL);
        let mesh = build_surface(&interf, &DeformationStrategy::Direct, &cfg, q.n, q.m).map_err(|e| e.to_string())?;
        let s = phase_surface(&mesh, &cfg, &unit(), &q).map_err(|e| e.to_string())?;
        c.within(|| format!("∫ΔV={integral} surface"), (s.total - p.total).abs(), ELECTRIC_TOL);
    }
    let worst = c.worst;
    c.finish(format!("3 pulse pairs, worst deviation {worst:.2e}"))
}

fn electrodynamic_ab() -> Result<String, String> {
    let mut c = Check::default();
    let q = QuadratureSpec::default();
    let mut worst_pair: f64 = 0.0;
    for (phi_a, delta) in [(0.0, PI / 2.0), (0.4, 1.1), (-1.0, 2.2)] {
        for dphi in [2.0 * PI, -PI, 0.7] {
            let s = cage_family(phi_a, delta, dphi);
            let run = || -> abphase::Result<[f64; 4]> {
                let d = phase_decomposition(&s.interf, &s.config, &GaugeState::base(), &unit(), &q)?;
                let direct = build_surface(&s.interf, &DeformationStrategy::Direct, &s.config, q.n, q.m)?;
                let around = build_surface(&s.interf, &s.around, &s.config, q.n, q.m)?;
                let sd = phase_surface(&direct, &s.config, &unit(), &q)?;
                let sa = phase_surface(&around, &s.config, &unit(), &q)?;
                let f = phase_field_line(&s.interf, &s.config, &unit(), &q, None)?;
                Ok([d.total, sd.total, sa.total, f.total])
            };
            let values = run().map_err(|e| format!("φa={phi_a} Δ={delta} ΔΦ={dphi}: {e}"))?;
            for i in 0..4 {
                for j in i + 1..4 {
                    let dev = (values[i] - values[j]).abs();
                    worst_pair = worst_pair.max(dev);
                    c.within(|| format!("φa={phi_a} ΔΦ={dphi} pair {i}-{j}"), dev, PAIRWISE_TOL);
                }
                c.within(|| format!("φa={phi_a} ΔΦ={dphi} formula {i} vs oracle"), (values[i] - s.oracle).abs(), ORACLE_TOL);
            }
        }
    }
    let worst = c.worst;
    c.finish(format!("9 scenarios × 4 formulas, worst pairwise {worst_pair:.2e}, worst overall {worst:.2e}"))
}

fn surface_difference() -> Result<String, String> {
    let mut c = Check::default();
    let scn = load_preset("fig3_electrodynamic").map_err(|e| e.to_string())?;
    let (direct, around) = (scn.mesh("direct").map_err(|e| e.to_string())?, scn.mesh("around").map_err(|e| e.to_string())?);
    let a = surface_difference_audit(&direct, &around, &scn.config, &scn.constants, &scn.quadrature)
        .map_err(|e| e.to_string())?;
    let s = &scn.config.solenoids[0];
    let (t0, t1) = scn.interferometer.time_range();
    let q_dphi = scn.constants.q_over_hbar * (s.flux.value(t1) - s.flux.value(t0));
    c.within(|| "ΔE-term".into(), (a.delta_electric + q_dphi).abs(), SURFACE_DIFF_TOL);
    c.within(|| "ΔB-term".into(), (a.delta_magnetic - q_dphi).abs(), SURFACE_DIFF_TOL);
    c.within(|| "Δtotal".into(), a.delta_total.abs(), SURFACE_DIFF_TOL);
    let worst = c.worst;
    c.finish(format!(
        "ΔE={:.9} ΔB={:.9} Δtotal={:.1e}, worst deviation {worst:.2e}",
        a.delta_electric, a.delta_magnetic, a.delta_total
    ))
}

fn gauge_invariance() -> Result<String, String> {
    let mut c = Check::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for name in preset_names() {
        let scn = load_preset(name).map_err(|e| e.to_string())?;
        let chis: Vec<Arc<dyn GaugeFunction>> =
            (0..GAUGES_PER_PRESET).map(|_| Arc::new(random_chi(&mut rng)) as Arc<dyn GaugeFunction>).collect();
        let audit = gauge_invariance_audit(&scn.interferometer, &scn.config, &chis, &scn.constants, &scn.quadrature)
            .map_err(|e| format!("{name}: {e}"))?;
        c.within(|| name.to_string(), audit.max_deviation, GAUGE_TOL);
    }
    let worst = c.worst;
    c.finish(format!("3 presets × {GAUGES_PER_PRESET} gauge functions, worst deviation {worst:.2e}"))
}

fn topological_quantization() -> Result<String, String> {
    let mut c = Check::default();
    let q = QuadratureSpec::default();
    let phi0 = 2.0 * PI;
    let cfg = solenoid_at(0.0, 0.0, 0.5, Profile::constant(phi0));
    for n in -2..=2 {
        let interf = winding_interferometer(n);
        let lp: Vec<Vec2> = interf.spatial_loop().iter().map(xy).collect();
        let w = winding_number(&lp, &Vec2::zeros()).map_err(|e| e.to_string())?;
        c.holds(|| format!("loop for n={n} winds {w} times"), w == n as i64);
        let p = phase_diff_potentials(&interf, &cfg, &GaugeState::base(), &unit(), &q).map_err(|e| e.to_string())?;
        c.within(|| format!("n={n}"), (p.total - n as f64 * phi0).abs(), WINDING_TOL);
    }
    let worst = c.worst;
    c.finish(format!("n = −2..2, worst deviation {worst:.2e}"))
}

fn field_self_consistency() -> Result<String, String> {
    let mut c = Check::default();
    let mut configs: Vec<(String, FieldConfig)> = preset_names()
        .map(|n| (n.to_string(), load_preset(n).unwrap().config))
        .collect();
    let mut mixed = cage_family(0.3, 1.4, 2.0).config;
    mixed.potential_cages = pulse_pair(trapezoid(0.5, 3.5, 1.0, 1.5), Profile::constant(0.0)).1.potential_cages;
    for p in &mut mixed.potential_cages {
        p.center += Vec3::new(-1.5, 0.0, 0.0);
        p.name = format!("pot_{}", p.name);
    }
    if !mixed.validate().is_empty() {
        return Err(format!("mixed configuration invalid: {:?}", mixed.validate()));
    }
    configs.push(("mixed".into(), mixed));

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let gauge = GaugeState::base();
    let per_config = FD_EVENTS / configs.len();
    let mut accepted = 0;
    for (name, cfg) in &configs {
        let mut taken = 0;
        while taken < per_config {
            let ev = Event::new(
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(0.0..4.0),
            );
            if cfg.boundary_distance(&ev).0 < FD_MARGIN || cfg.in_transition_layer(&ev.pos) {
                continue;
            }
            let fd = cfg.fd_consistency(&gauge, &ev, FD_STEP).map_err(|e| e.to_string())?;
            c.within(|| format!("{name} at {:?}", ev.to_array()), fd.curl_residual.max(fd.faraday_residual), FD_TOL);
            taken += 1;
        }
        accepted += taken;
    }
    let fd_worst = c.worst;

    let q = QuadratureSpec::default();
    let mut circ_worst: f64 = 0.0;
    for (name, cfg) in &configs {
        for s in &cfg.solenoids {
            let r = 2.0 * s.radius;
            let ring: Vec<Vec3> = (0..=96)
                .map(|i| {
                    let a = 2.0 * PI * i as f64 / 96.0;
                    Vec3::new(s.axis.x + r * a.cos(), s.axis.y + r * a.sin(), 0.0)
                })
                .collect();
            for t in [0.0, 1.2, 1.9, 2.4, 3.7] {
                let circ = vector_line_integral(cfg, &gauge, &ring, t, &q).map_err(|e| e.to_string())?;
                let dev = (circ - s.flux.value(t)).abs();
                circ_worst = circ_worst.max(dev);
                c.within(|| format!("{name}/{} circulation at t={t}", s.name), dev, CIRCULATION_TOL);
            }
        }
    }
    c.finish(format!(
        "{accepted} events, worst FD residual {fd_worst:.2e}; circulation at 5 times, worst {circ_worst:.2e}"
    ))
}

fn convergence() -> Result<String, String> {
    let mut c = Check::default();
    let mut lines = Vec::new();
    for name in preset_names() {
        let scn = load_preset(name).map_err(|e| e.to_string())?;
        for (strategy, _) in &scn.strategies {
            let run = || -> abphase::Result<[abphase::PhaseReport; 3]> {
                let mesh = scn.mesh(strategy)?;
                Ok([
                    phase_surface(&mesh, &scn.config, &scn.constants, &scn.quadrature)?,
                    phase_surface(&mesh.refine(2)?, &scn.config, &scn.constants, &scn.quadrature)?,
                    phase_surface(&mesh.refine(4)?, &scn.config, &scn.constants, &scn.quadrature)?,
                ])
            };
            let [coarse, fine, finer] = run().map_err(|e| format!("{name}/{strategy}: {e}"))?;
            let change = (fine.total - coarse.total).abs();
            let bound = coarse.error_estimate.max(ROUNDING_FLOOR);
            c.holds(
                || format!("{name}/{strategy}: change {change:.2e} not below estimate {:.2e}", coarse.error_estimate),
                change < bound,
            );
            for (a, b) in [(&coarse, &fine), (&fine, &finer)] {
                let shrinks = b.error_estimate * SHRINK_FACTOR <= a.error_estimate;
                let at_floor = a.error_estimate <= ROUNDING_FLOOR;
                c.holds(
                    || {
                        format!(
                            "{name}/{strategy}: estimate {:.2e} → {:.2e} shrinks less than {SHRINK_FACTOR}×",
                            a.error_estimate, b.error_estimate
                        )
                    },
                    shrinks || at_floor,
                );
            }
            let floor = if coarse.error_estimate <= ROUNDING_FLOOR { " (rounding floor)" } else { "" };
            lines.push(format!(
                "{name}/{strategy} est {:.1e}→{:.1e}→{:.1e}{floor}",
                coarse.error_estimate, fine.error_estimate, finer.error_estimate
            ));
        }
    }
    c.finish(lines.join(", "))
}

type Criterion = fn() -> Result<String, String>;

fn main() {
    let criteria: [(&str, Criterion); 8] = [
        ("magnetic AB phase", magnetic_ab),
        ("electric AB phase", electric_ab),
        ("electrodynamic AB phase", electrodynamic_ab),
        ("surface-difference cancellation", surface_difference),
        ("gauge invariance", gauge_invariance),
        ("topological quantization", topological_quantization),
        ("field self-consistency", field_self_consistency),
        ("surface convergence", convergence),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        let (status, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {}: {status} {name} [{secs:.1}s] {detail}", i + 1);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
