//! Aharonov-Bohm phases by every available route, and their audits.
//!
//! * [`phase_potential_path`] / [`phase_diff_potentials`]: `(q/ħ)∫(A·dx − V dt)`
//!   along worldlines, composite Gauss-Legendre per smooth piece.
//! * [`phase_loop_static`] / [`phase_electric`]: the flux form of the
//!   static magnetic phase and the potential-difference form of the electric
//!   phase.
//! * [`phase_surface`]: magnetic flux minus electric "flux" through a ruled
//!   spacetime surface bounded by the two arms.
//! * [`phase_decomposition`]: scalar-potential, initial-circulation and
//!   vector-potential-change terms for scenarios where every source varies
//!   only while both arms sit still inside cages.
//! * [`phase_field_line`]: time integral of the total-electric-field line
//!   integral between the two dwell positions.
//!
//! Results are reduced in a fixed order, so they are bit-identical for every
//! [`Execution`] mode.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::em::{Ball, Event, FieldConfig, GaugeFunction, GaugeState};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::{
    polygon_disk_area, segment_cylinder_crossings, segment_point_distance2d, segment_sphere_crossings, xy, Vec2,
    Vec3,
};
use crate::quadrature::GaussLegendre;
use crate::surface::{fixed_time_winding, winding_number, SurfaceMesh};
use crate::worldline::{Interferometer, Worldline};

/// Tolerance of the surface-difference contract.
pub const SURFACE_AUDIT_TOL: f64 = 1e-6;
/// Tolerance of the gauge-invariance contract.
pub const GAUGE_AUDIT_TOL: f64 = 1e-8;

/// Coupling constants; only the ratio `q/ħ` enters any phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub q_over_hbar: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self { q_over_hbar: 1.0 }
    }
}

/// Discretization parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Time intervals of a surface, and subintervals per smooth piece of a
    /// path integral.
    pub n: usize,
    /// Nodes per surface curve.
    pub m: usize,
    /// Gauss-Legendre order.
    pub order: usize,
    /// Gauss-Legendre subintervals per smooth piece of a spatial line
    /// integral.
    pub line_pieces: usize,
    #[serde(default)]
    pub execution: Execution,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { n: 32, m: 33, order: 5, line_pieces: 4, execution: Execution::default() }
    }
}

impl QuadratureSpec {
    fn rule(&self) -> GaussLegendre {
        GaussLegendre::new(self.order.max(1))
    }

    fn doubled(&self) -> Self {
        Self { n: 2 * self.n, line_pieces: 2 * self.line_pieces, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: Option<usize>,
}

/// Phase with its term breakdown; `total` is the sum of `terms`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseReport {
    pub formula: String,
    pub total: f64,
    pub terms: BTreeMap<String, f64>,
    /// Raw integrals behind the terms, before the `q/ħ` factor and signs.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub integrals: BTreeMap<String, f64>,
    pub error_estimate: f64,
    pub grid: Grid,
}

impl PhaseReport {
    fn new(formula: &str, terms: &[(&str, f64)], error_estimate: f64, grid: Grid) -> Self {
        let total = terms.iter().map(|t| t.1).sum();
        Self {
            formula: formula.to_string(),
            total,
            terms: terms.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
            integrals: BTreeMap::new(),
            error_estimate: error_estimate.abs(),
            grid,
        }
    }

    pub fn term(&self, name: &str) -> f64 {
        self.terms.get(name).copied().unwrap_or(0.0)
    }
}

// ---------------------------------------------------------------------------
// Path integrals
// ---------------------------------------------------------------------------

/// `(∫V dt, ∫A·dx)` along a worldline.
fn worldline_integrals(
    wl: &Worldline,
    config: &FieldConfig,
    gauge: &GaugeState,
    quad: &QuadratureSpec,
) -> Result<(f64, f64)> {
    let gl = quad.rule();
    let (t0, t1) = wl.time_range();
    let mut cuts: Vec<f64> = wl.knot_times().collect();
    cuts.extend(config.knot_times().into_iter().filter(|&t| t > t0 && t < t1));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let knots = wl.knots();
    let (mut scalar, mut vector) = (0.0, 0.0);
    let mut seg = 0;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        while knots[seg + 1].t <= lo {
            seg += 1;
        }
        let base = knots[seg];
        let v = wl.segment_velocity(seg);
        let at = |t: f64| Event::at(base.pos + v * (t - base.t), t);
        scalar += gl.try_integrate(lo, hi, quad.n, |t| Ok::<_, Error>(config.scalar_potential(gauge, &at(t))))?;
        if v != Vec3::zeros() {
            vector += gl.try_integrate(lo, hi, quad.n, |t| Ok::<_, Error>(config.vector_potential(gauge, &at(t))?.dot(&v)))?;
        }
    }
    Ok((scalar, vector))
}

/// Phase accumulated along one worldline: `−(q/ħ)∫V dt + (q/ħ)∫A·dx`.
///
/// Gauge dependent on its own; only two-arm differences with shared
/// endpoints are gauge invariant.
pub fn phase_potential_path(
    wl: &Worldline,
    config: &FieldConfig,
    gauge: &GaugeState,
    constants: &PhysicalConstants,
    quad: &QuadratureSpec,
) -> Result<PhaseReport> {
    let k = constants.q_over_hbar;
    let (s, v) = worldline_integrals(wl, config, gauge, quad)?;
    let (s2, v2) = worldline_integrals(wl, config, gauge, &quad.doubled())?;
    let err = k * ((s - s2).abs() + (v - v2).abs());
    Ok(PhaseReport::new(
        "potential_path",
        &[("scalar_potential", -k * s), ("vector_potential", k * v)],
        err,
        Grid { n: quad.n, m: None },
    ))
}

/// `φ_a − φ_b` from potentials along both arms.
pub fn phase_diff_potentials(
    interf: &Interferometer,
    config: &FieldConfig,
    gauge: &GaugeState,
    constants: &PhysicalConstants,
    quad: &QuadratureSpec,
) -> Result<PhaseReport> {
    let a = phase_potential_path(interf.arm_a(), config, gauge, constants, quad)?;
    let b = phase_potential_path(interf.arm_b(), config, gauge, constants, quad)?;
    Ok(PhaseReport::new(
        "potential_difference",
        &[
            ("scalar_potential", a.term("scalar_potential") - b.term("scalar_potential")),
            ("vector_potential", a.term("vector_potential") - b.term("vector_potential")),
        ],
        a.error_estimate + b.error_estimate,
        Grid { n: quad.n, m: None },
    ))
}

/// Static magnetic phase in flux form: `(q/ħ) Σ_s n_s Φ_s`, with `n_s` the
/// winding of the arm loop about solenoid `s`.
///
/// Requires constant fluxes, inactive potential cages and a loop that stays
/// outside every solenoid.
pub fn phase_loop_static(
    interf: &Interferometer,
    config: &FieldConfig,
    constants: &PhysicalConstants,
) -> Result<PhaseReport> {
    if let Some(c) = config.potential_cages.iter().find(|c| c.potential.support_window().is_some()) {
        return Err(Error::StructureViolation(format!("potential cage `{}` is active", c.name)));
    }
    let lp: Vec<Vec2> = interf.spatial_loop().iter().map(xy).collect();
    let mut flux = 0.0;
    for s in &config.solenoids {
        if s.flux.variation_window().is_some() {
            return Err(Error::StructureViolation(format!("flux of solenoid `{}` is not static", s.name)));
        }
        if lp.windows(2).any(|w| segment_point_distance2d(&w[0], &w[1], &s.axis) < s.radius) {
            return Err(Error::StructureViolation(format!("arm loop enters solenoid `{}`", s.name)));
        }
        flux += winding_number(&lp, &s.axis)? as f64 * s.flux.value(interf.time_range().0);
    }
    let k = constants.q_over_hbar;
    let mut report = PhaseReport::new("loop_static", &[("magnetic", k * flux)], 0.0, Grid { n: 0, m: None });
    report.integrals.insert("magnetic_flux".into(), flux);
    Ok(report)
}

/// Electric phase `−(q/ħ)∫(V_a − V_b) dt` in the base gauge, for scenarios
/// whose arm loop encloses no (static) flux.
pub fn phase_electric(
    interf: &Interferometer,
    config: &FieldConfig,
    constants: &PhysicalConstants,
    quad: &QuadratureSpec,
) -> Result<PhaseReport> {
    let lp: Vec<Vec2> = interf.spatial_loop().iter().map(xy).collect();
    for s in &config.solenoids {
        if s.flux.variation_window().is_some() {
            return Err(Error::StructureViolation(format!("flux of solenoid `{}` is not static", s.name)));
        }
        let touches = lp.windows(2).any(|w| segment_point_distance2d(&w[0], &w[1], &s.axis) < s.radius);
        if touches || winding_number(&lp, &s.axis)? != 0 {
            return Err(Error::StructureViolation(format!("arm loop encloses flux of solenoid `{}`", s.name)));
        }
    }
    let gauge = GaugeState::base();
    let k = constants.q_over_hbar;
    let run = |q: &QuadratureSpec| -> Result<f64> {
        let (va, _) = worldline_integrals(interf.arm_a(), config, &gauge, q)?;
        let (vb, _) = worldline_integrals(interf.arm_b(), config, &gauge, q)?;
        Ok(va - vb)
    };
    let dv = run(quad)?;
    let err = (dv - run(&quad.doubled())?).abs();
    let mut report =
        PhaseReport::new("electric", &[("scalar_potential", -k * dv)], k.abs() * err, Grid { n: quad.n, m: None });
    report.integrals.insert("potential_time".into(), dv);
    Ok(report)
}

// ---------------------------------------------------------------------------
// Spatial line integrals at fixed time
// ---------------------------------------------------------------------------

/// Parameters in `[0, 1]` splitting `[p, q]` at every surface where the
/// fields lose smoothness.
fn smooth_pieces(config: &FieldConfig, p: &Vec3, q: &Vec3, out: &mut Vec<f64>) {
    out.clear();
    out.push(0.0);
    for c in &config.shielded_cages {
        segment_sphere_crossings(p, q, &c.center, c.radius, out);
        segment_sphere_crossings(p, q, &c.center, c.shell_radius(), out);
    }
    for c in &config.potential_cages {
        segment_sphere_crossings(p, q, &c.center, c.inner_radius, out);
        segment_sphere_crossings(p, q, &c.center, c.outer_radius, out);
    }
    for s in &config.solenoids {
        segment_cylinder_crossings(p, q, &s.axis, s.radius, out);
    }
    out.push(1.0);
    out.sort_by(f64::total_cmp);
    out.dedup();
}

/// `∫ F·dr` along a polyline, with `F` piecewise smooth across the source
/// boundaries of `config`.
fn polyline_integral<F>(
    config: &FieldConfig,
    path: &[Vec3],
    gl: &GaussLegendre,
    pieces: usize,
    mut field: F,
) -> Result<f64>
where
    F: FnMut(&Vec3) -> Result<Vec3>,
{
    let mut cuts = Vec::new();
    let mut total = 0.0;
    for w in path.windows(2) {
        let (p, q) = (w[0], w[1]);
        let d = q - p;
        if d == Vec3::zeros() {
            continue;
        }
        smooth_pieces(config, &p, &q, &mut cuts);
        for c in cuts.windows(2) {
            total += gl.try_integrate(c[0], c[1], pieces, |tau| Ok::<_, Error>(field(&(p + d * tau))?.dot(&d)))?;
        }
    }
    Ok(total)
}

/// `∫ E(r, t)·dr` along a polyline at fixed `t`.
pub fn electric_line_integral(
    config: &FieldConfig,
    path: &[Vec3],
    t: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    if config.electric_field_vanishes(t) {
        return Ok(0.0);
    }
    polyline_integral(config, path, &quad.rule(), quad.line_pieces, |p| {
        config.electric_field(&Event::at(*p, t))
    })
}

/// `∫ A(r, t)·dr` along a polyline at fixed `t`; a closed polyline gives the
/// circulation.
pub fn vector_line_integral(
    config: &FieldConfig,
    gauge: &GaugeState,
    path: &[Vec3],
    t: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    polyline_integral(config, path, &quad.rule(), quad.line_pieces, |p| {
        config.vector_potential(gauge, &Event::at(*p, t))
    })
}

// ---------------------------------------------------------------------------
// Spacetime surface
// ---------------------------------------------------------------------------

/// `(Σ B·da, Σ dt ∫E·dr)` over the mesh.
///
/// The magnetic part integrates the piecewise-uniform solenoid field exactly
/// over each flat triangle (triangle ∩ disk area); the electric part takes
/// the line integral along the mid-time curve of each time interval. Both are
/// midpoint rules in time.
fn surface_integrals(mesh: &SurfaceMesh, config: &FieldConfig, quad: &QuadratureSpec) -> Result<(f64, f64)> {
    let times = mesh.times();
    let m = mesh.nodes_per_curve();
    let slices = quad.execution.map_range(mesh.time_intervals(), |k| -> Result<(f64, f64)> {
        let (t0, t1) = (times[k], times[k + 1]);
        let (tm, dt) = (0.5 * (t0 + t1), t1 - t0);
        let mut flux = 0.0;
        for s in &config.solenoids {
            let bz = s.flux.value(tm) / (std::f64::consts::PI * s.radius * s.radius);
            if bz == 0.0 {
                continue;
            }
            let mut area = 0.0;
            for j in 0..m - 1 {
                for tri in mesh.patch_triangles(k, j) {
                    let poly: [Vec2; 3] = tri.map(|p| xy(&p));
                    if !triangle_near_disk(&poly, &s.axis, s.radius) {
                        continue;
                    }
                    area += polygon_disk_area(&poly, &s.axis, s.radius);
                }
            }
            flux += bz * area;
        }
        let electric = dt * electric_line_integral(config, &mesh.mid_curve(k), tm, quad)?;
        Ok((flux, electric))
    });
    let mut flux = 0.0;
    let mut electric = 0.0;
    for s in slices {
        let (f, e) = s?;
        flux += f;
        electric += e;
    }
    Ok((flux, electric))
}

fn triangle_near_disk(tri: &[Vec2; 3], c: &Vec2, r: f64) -> bool {
    let (mut lo, mut hi) = (tri[0], tri[0]);
    for p in &tri[1..] {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    lo.x <= c.x + r && hi.x >= c.x - r && lo.y <= c.y + r && hi.y >= c.y - r
}

/// `(q/ħ)[∫ B·da − ∫∫ dt dr·E]` over a spacetime surface.
///
/// The reported value is the one on `mesh`; the error estimate is the
/// Richardson estimate `4/3·|I(h) − I(h/2)|` from one 2× refinement.
pub fn phase_surface(
    mesh: &SurfaceMesh,
    config: &FieldConfig,
    constants: &PhysicalConstants,
    quad: &QuadratureSpec,
) -> Result<PhaseReport> {
    let (flux, electric) = surface_integrals(mesh, config, quad)?;
    let (flux2, electric2) = surface_integrals(&mesh.refine(2)?, config, quad)?;
    let k = constants.q_over_hbar;
    let err = 4.0 / 3.0 * k.abs() * ((flux - electric) - (flux2 - electric2)).abs();
    let mut report = PhaseReport::new(
        "surface",
        &[("magnetic", k * flux), ("electric", -k * electric)],
        err,
        Grid { n: mesh.time_intervals(), m: Some(mesh.nodes_per_curve()) },
    );
    report.integrals.insert("magnetic_flux".into(), flux);
    report.integrals.insert("electric_flux".into(), electric);
    Ok(report)
}

// ---------------------------------------------------------------------------
// Cage-dwell structure
// ---------------------------------------------------------------------------

/// Where and when the sources act in a cage-dwell scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct DwellStructure {
    /// Hull of all source activity inside the interferometer interval.
    pub window: Option<(f64, f64)>,
    /// Arm positions during the window (the final positions if there is
    /// none).
    pub r_a: Vec3,
    pub r_b: Vec3,
    /// Times at which the initial and final vector potentials are frozen.
    pub t_initial: f64,
    pub t_final: f64,
}

/// Check that every source varies only while both arms are stationary inside
/// cages.
pub fn dwell_structure(interf: &Interferometer, config: &FieldConfig) -> Result<DwellStructure> {
    let (t0, t1) = interf.time_range();
    let mut window: Option<(f64, f64)> = None;
    let mut merge = |w: Option<(f64, f64)>| {
        if let Some((lo, hi)) = w {
            let (lo, hi) = (lo.max(t0), hi.min(t1));
            if lo < hi {
                window = Some(match window {
                    None => (lo, hi),
                    Some((a, b)) => (a.min(lo), b.max(hi)),
                });
            }
        }
    };
    for s in &config.solenoids {
        merge(s.flux.variation_window());
    }
    for c in &config.potential_cages {
        merge(c.potential.support_window());
    }
    let Some((w0, w1)) = window else {
        return Ok(DwellStructure {
            window: None,
            r_a: interf.arm_a().end().pos,
            r_b: interf.arm_b().end().pos,
            t_initial: t0,
            t_final: t0,
        });
    };
    let cages: Vec<&dyn Ball> = config
        .shielded_cages
        .iter()
        .map(|c| c as &dyn Ball)
        .chain(config.potential_cages.iter().map(|c| c as &dyn Ball))
        .collect();
    let mut positions = [Vec3::zeros(); 2];
    for (slot, (label, arm)) in [("a", interf.arm_a()), ("b", interf.arm_b())].into_iter().enumerate() {
        let knots = arm.knots();
        for i in 0..knots.len() - 1 {
            let overlap = knots[i + 1].t.min(w1) - knots[i].t.max(w0);
            if overlap > 0.0 && arm.segment_velocity(i).norm() > 1e-12 {
                return Err(Error::StructureViolation(format!(
                    "arm {label} moves during the source activity window [{w0}, {w1}]"
                )));
            }
        }
        let pos = arm.position(w0)?;
        let inside = cages.iter().any(|c| {
            arm.dwell_windows(*c).iter().any(|&(lo, hi)| lo <= w0 && hi >= w1)
        });
        if !inside {
            return Err(Error::StructureViolation(format!(
                "arm {label} is not inside a cage for the whole activity window [{w0}, {w1}]"
            )));
        }
        positions[slot] = pos;
    }
    Ok(DwellStructure { window: Some((w0, w1)), r_a: positions[0], r_b: positions[1], t_initial: w0, t_final: w1 })
}

/// Spatial path from `R_a` through the end position to `R_b`: arm a after
/// `t`, then arm b after `t` backwards.
pub fn end_path(interf: &Interferometer, t: f64) -> Result<Vec<Vec3>> {
    let (_, t1) = interf.time_range();
    let mut path = interf.arm_a().spatial_path_between(t, t1)?;
    let mut back = interf.arm_b().spatial_path_between(t, t1)?;
    back.reverse();
    path.extend(back.into_iter().skip(1));
    if path.len() == 1 {
        path.push(path[0]);
    }
    Ok(path)
}

fn decomposition_terms(
    interf: &Interferometer,
    config: &FieldConfig,
    gauge: &GaugeState,
    st: &DwellStructure,
    quad: &QuadratureSpec,
) -> Result<[f64; 3]> {
    let (va, _) = worldline_integrals(interf.arm_a(), config, gauge, quad)?;
    let (vb, _) = worldline_integrals(interf.arm_b(), config, gauge, quad)?;
    let circulation = vector_line_integral(config, gauge, &interf.spatial_loop(), st.t_initial, quad)?;
    let path = end_path(interf, st.t_final)?;
    let after = vector_line_integral(config, gauge, &path, st.t_final, quad)?;
    let before = vector_line_integral(config, gauge, &path, st.t_initial, quad)?;
    Ok([vb - va, circulation, after - before])
}

/// Three-term decomposition `(q/ħ)∫(V_b − V_a)dt + (q/ħ)∮A_i·dx +
/// (q/ħ)[∫ ΔA·dx]_end` of the two-arm phase.
///
/// `A_i` and `A_f` are frozen at the start and end of the source activity
/// window; the last integral runs from `R_a` through the end position to
/// `R_b`.
pub fn phase_decomposition(
    interf: &Interferometer,
    config: &FieldConfig,
    gauge: &GaugeState,
    constants: &PhysicalConstants,
    quad: &QuadratureSpec,
) -> Result<PhaseReport> {
    let st = dwell_structure(interf, config)?;
    let k = constants.q_over_hbar;
    let fine = decomposition_terms(interf, config, gauge, &st, quad)?;
    let finer = decomposition_terms(interf, config, gauge, &st, &quad.doubled())?;
    let err = k.abs() * fine.iter().zip(&finer).map(|(a, b)| (a - b).abs()).sum::<f64>();
    Ok(PhaseReport::new(
        "decomposition",
        &[
            ("scalar_potential", k * fine[0]),
            ("initial_circulation", k * fine[1]),
            ("vector_potential_change", k * fine[2]),
        ],
        err,
        Grid { n: quad.n, m: None },
    ))
}

fn field_line_value(
    config: &FieldConfig,
    path: &[Vec3],
    window: (f64, f64),
    quad: &QuadratureSpec,
) -> Result<f64> {
    let gl = quad.rule();
    let mut cuts = vec![window.0];
    cuts.extend(config.knot_times().into_iter().filter(|&t| t > window.0 && t < window.1));
    cuts.push(window.1);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += gl.try_integrate(w[0], w[1], quad.n, |t| electric_line_integral(config, path, t, quad))?;
    }
    Ok(total)
}

/// `−(q/ħ)∫dt ∫_{R_a}^{R_b} E·dr` along `path` (default: the end path).
///
/// Requires the cage-dwell structure and a flux-free arm loop; a custom path
/// must join the dwell positions without winding around any solenoid
/// relative to the end path.
pub fn phase_field_line(
    interf: &Interferometer,
    config: &FieldConfig,
    constants: &PhysicalConstants,
    quad: &QuadratureSpec,
    path: Option<&[Vec3]>,
) -> Result<PhaseReport> {
    let st = dwell_structure(interf, config)?;
    let arm_loop: Vec<Vec2> = interf.spatial_loop().iter().map(xy).collect();
    for s in &config.solenoids {
        let n = winding_number(&arm_loop, &s.axis)?;
        if n != 0 {
            return Err(Error::StructureViolation(format!(
                "arms wind {n} time(s) around solenoid `{}`; the field-line form needs a loop enclosing no flux",
                s.name
            )));
        }
    }
    let default_path = end_path(interf, st.t_final)?;
    let path: Vec<Vec3> = match path {
        None => default_path,
        Some(p) => {
            if p.len() < 2
                || (p[0] - st.r_a).norm() > 1e-12
                || (p[p.len() - 1] - st.r_b).norm() > 1e-12
            {
                return Err(Error::InvalidArgument("field-line path must run from R_a to R_b".into()));
            }
            let mut lp: Vec<Vec2> = p.iter().map(xy).collect();
            lp.extend(default_path.iter().rev().skip(1).map(xy));
            for s in &config.solenoids {
                if winding_number(&lp, &s.axis)? != 0 {
                    return Err(Error::InvalidArgument(format!(
                        "field-line path is not homotopic to the end path around solenoid `{}`",
                        s.name
                    )));
                }
            }
            p.to_vec()
        }
    };
    let k = constants.q_over_hbar;
    let (value, err) = match st.window {
        None => (0.0, 0.0),
        Some(w) => {
            let v = field_line_value(config, &path, w, quad)?;
            let v2 = field_line_value(config, &path, w, &quad.doubled())?;
            (v, (v - v2).abs())
        }
    };
    let mut report = PhaseReport::new("field_line", &[("electric", -k * value)], k.abs() * err, Grid { n: quad.n, m: None });
    report.integrals.insert("electric_flux".into(), value);
    Ok(report)
}

// ---------------------------------------------------------------------------
// Audits
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolenoidWinding {
    pub solenoid: String,
    pub winding: i64,
    pub flux_change: f64,
}

/// Differences between two surfaces bounding the same interferometer
/// (second minus first), in phase units.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurfaceDifferenceAudit {
    pub delta_electric: f64,
    pub delta_magnetic: f64,
    pub delta_total: f64,
    pub expected_delta_electric: f64,
    pub expected_delta_magnetic: f64,
    pub windings: Vec<SolenoidWinding>,
    pub tolerance: f64,
    pub passed: bool,
    pub first: PhaseReport,
    pub second: PhaseReport,
}

/// Compare `phase_surface` on two meshes.
///
/// With `w_s` the winding of (first curve, then second curve reversed) about
/// solenoid `s` during the activity window, the electric terms differ by
/// `−(q/ħ)Σ w_s ΔΦ_s` and the magnetic terms by `+(q/ħ)Σ w_s ΔΦ_s`, so the
/// totals agree.
pub fn surface_difference_audit(
    first: &SurfaceMesh,
    second: &SurfaceMesh,
    config: &FieldConfig,
    constants: &PhysicalConstants,
    quad: &QuadratureSpec,
) -> Result<SurfaceDifferenceAudit> {
    if first.times().len() != second.times().len()
        || first.times().iter().zip(second.times()).any(|(a, b)| (a - b).abs() > 1e-12)
    {
        return Err(Error::MismatchedBoundary("time grids differ".into()));
    }
    for k in 0..first.times().len() {
        let (c1, c2) = (first.curve(k), second.curve(k));
        if (c1[0] - c2[0]).norm() > 1e-12 || (c1[c1.len() - 1] - c2[c2.len() - 1]).norm() > 1e-12 {
            return Err(Error::MismatchedBoundary(format!("boundary nodes differ at t = {}", first.times()[k])));
        }
    }
    let interf = first.interferometer();
    let st = dwell_structure(interf, config).ok();
    let (t0, t1) = interf.time_range();
    let probe = match st.as_ref().and_then(|s| s.window) {
        Some((a, b)) => 0.5 * (a + b),
        None => 0.5 * (t0 + t1),
    };
    let k_probe = first
        .times()
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - probe).abs().total_cmp(&(b.1 - probe).abs()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let mut windings = Vec::new();
    let mut weighted = 0.0;
    for s in &config.solenoids {
        let w = fixed_time_winding(first, second, k_probe, &s.axis)?;
        let dphi = s.flux.value(t1) - s.flux.value(t0);
        weighted += w as f64 * dphi;
        windings.push(SolenoidWinding { solenoid: s.name.clone(), winding: w, flux_change: dphi });
    }
    let q = constants.q_over_hbar;
    let a = phase_surface(first, config, constants, quad)?;
    let b = phase_surface(second, config, constants, quad)?;
    let delta_electric = b.term("electric") - a.term("electric");
    let delta_magnetic = b.term("magnetic") - a.term("magnetic");
    let delta_total = b.total - a.total;
    let expected_delta_electric = -q * weighted;
    let expected_delta_magnetic = q * weighted;
    let tolerance = SURFACE_AUDIT_TOL;
    let passed = (delta_electric - expected_delta_electric).abs() <= tolerance
        && (delta_magnetic - expected_delta_magnetic).abs() <= tolerance
        && delta_total.abs() <= tolerance;
    Ok(SurfaceDifferenceAudit {
        delta_electric,
        delta_magnetic,
        delta_total,
        expected_delta_electric,
        expected_delta_magnetic,
        windings,
        tolerance,
        passed,
        first: a,
        second: b,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaugeAudit {
    pub base_phase: f64,
    pub gauges: Vec<String>,
    pub deviations: Vec<f64>,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Recompute the two-arm phase under each gauge function and report the
/// deviation from the base gauge.
pub fn gauge_invariance_audit(
    interf: &Interferometer,
    config: &FieldConfig,
    chis: &[Arc<dyn GaugeFunction>],
    constants: &PhysicalConstants,
    quad: &QuadratureSpec,
) -> Result<GaugeAudit> {
    let base = phase_diff_potentials(interf, config, &GaugeState::base(), constants, quad)?.total;
    let results = quad.execution.map_slice(chis, |chi| -> Result<f64> {
        let gauge = GaugeState::with_chi(chi.clone())?;
        let p = phase_diff_potentials(interf, config, &gauge, constants, &QuadratureSpec { execution: Execution::Sequential, ..*quad })?;
        Ok((p.total - base).abs())
    });
    let deviations = results.into_iter().collect::<Result<Vec<_>>>()?;
    let max_deviation = deviations.iter().copied().fold(0.0, f64::max);
    Ok(GaugeAudit {
        base_phase: base,
        gauges: chis.iter().map(|c| c.name()).collect(),
        deviations,
        max_deviation,
        tolerance: GAUGE_AUDIT_TOL,
        passed: max_deviation <= GAUGE_AUDIT_TOL,
    })
}
