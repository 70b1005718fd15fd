//! Quasi-static potentials and fields of ideal solenoids and Faraday cages.
//!
//! Sources respond instantaneously to their time profiles. The base gauge is
//! the symmetric solenoid gauge: each infinite solenoid contributes an
//! azimuthal vector potential and no scalar potential; scalar potentials come
//! from cages only. An optional gauge function `χ(r, t)` shifts the potentials
//! by `A → A + ∇χ`, `V → V − ∂χ/∂t`; fields never see it.
//!
//! A [`ShieldedCage`] carries the potential of its induced surface charges,
//! `V = −Σ Φ'(t)·(φ(r) − φ(c)) / 2π` summed over solenoids, where `φ` is the
//! azimuth about each solenoid axis measured on the branch continuous inside
//! the cage. Its gradient cancels `−∂A/∂t` identically inside the cage, the
//! cage center sits at zero potential, and the potential is blended to zero
//! across a shell of width `0.1·radius` with a septic smoothstep.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{signed_angle, xy, Vec2, Vec3};

/// Minimum admissible distance from a solenoid axis.
pub const AXIS_EPS: f64 = 1e-9;
/// Shell width of a shielded cage, as a fraction of its radius.
pub const SHELL_FRACTION: f64 = 0.1;
/// Finite-difference step used by the gauge-function self-check.
pub const CHI_CHECK_STEP: f64 = 1e-4;
/// Tolerance of the gauge-function self-check.
pub const CHI_CHECK_TOL: f64 = 1e-6;

/// A spacetime point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub pos: Vec3,
    pub t: f64,
}

impl Event {
    pub fn new(x: f64, y: f64, z: f64, t: f64) -> Self {
        Self { pos: Vec3::new(x, y, z), t }
    }

    pub fn at(pos: Vec3, t: f64) -> Self {
        Self { pos, t }
    }

    pub fn is_finite(&self) -> bool {
        self.pos.iter().all(|c| c.is_finite()) && self.t.is_finite()
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.pos.x, self.pos.y, self.pos.z, self.t]
    }
}

/// Piecewise-linear time profile with constant extrapolation.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    knots: Vec<(f64, f64)>,
}

impl Profile {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::InvalidProfile("profile needs at least one knot".into()));
        }
        if knots.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err(Error::InvalidProfile("profile knots must be finite".into()));
        }
        if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidProfile("profile knot times must be strictly increasing".into()));
        }
        Ok(Self { knots })
    }

    pub fn constant(value: f64) -> Self {
        Self { knots: vec![(0.0, value)] }
    }

    /// Linear ramp from `from` at `t0` to `to` at `t1`.
    pub fn ramp(t0: f64, from: f64, t1: f64, to: f64) -> Result<Self> {
        Self::new(vec![(t0, from), (t1, to)])
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn knot_times(&self) -> impl Iterator<Item = f64> + '_ {
        self.knots.iter().map(|k| k.0)
    }

    pub fn value(&self, t: f64) -> f64 {
        let k = &self.knots;
        if t <= k[0].0 {
            return k[0].1;
        }
        if t >= k[k.len() - 1].0 {
            return k[k.len() - 1].1;
        }
        let i = k.partition_point(|p| p.0 <= t) - 1;
        let (t0, v0) = k[i];
        let (t1, v1) = k[i + 1];
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    /// Slope of the segment containing `t`; knot times resolve to the
    /// right-hand segment.
    pub fn slope(&self, t: f64) -> f64 {
        let k = &self.knots;
        if t < k[0].0 || t >= k[k.len() - 1].0 {
            return 0.0;
        }
        let i = k.partition_point(|p| p.0 <= t) - 1;
        (k[i + 1].1 - k[i].1) / (k[i + 1].0 - k[i].0)
    }

    /// Integral over `[a, b]`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        if b < a {
            return -self.integral(b, a);
        }
        let mut cuts = vec![a];
        cuts.extend(self.knot_times().filter(|&t| t > a && t < b));
        cuts.push(b);
        cuts.windows(2)
            .map(|w| 0.5 * (w[1] - w[0]) * (self.value(w[0]) + self.value(w[1])))
            .sum()
    }

    /// Hull of the segments on which `pred(v0, v1)` holds, clipped to the
    /// knot range.
    fn hull_where(&self, pred: impl Fn(f64, f64) -> bool) -> Option<(f64, f64)> {
        let mut out: Option<(f64, f64)> = None;
        for w in self.knots.windows(2) {
            if pred(w[0].1, w[1].1) {
                out = Some(match out {
                    None => (w[0].0, w[1].0),
                    Some((lo, _)) => (lo, w[1].0),
                });
            }
        }
        out
    }

    /// Hull of the times where the profile changes.
    pub fn variation_window(&self) -> Option<(f64, f64)> {
        self.hull_where(|a, b| a != b)
    }

    /// Hull of the times where the profile is nonzero (for profiles that
    /// start and end at zero).
    pub fn support_window(&self) -> Option<(f64, f64)> {
        self.hull_where(|a, b| a != 0.0 || b != 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolenoidSource {
    pub name: String,
    pub axis: Vec2,
    pub radius: f64,
    pub flux: Profile,
}

impl SolenoidSource {
    pub fn new(name: impl Into<String>, axis: Vec2, radius: f64, flux: Profile) -> Self {
        Self { name: name.into(), axis, radius, flux }
    }

    /// `A / Φ` in the symmetric gauge; regular inside, `∇φ / 2π` outside.
    fn unit_potential(&self, p: &Vec3) -> Result<Vec3> {
        let d = xy(p) - self.axis;
        let rho2 = d.norm_squared();
        if rho2 < AXIS_EPS * AXIS_EPS {
            return Err(Error::AxisProximity { solenoid: self.name.clone(), distance: rho2.sqrt() });
        }
        let perp = Vec3::new(-d.y, d.x, 0.0);
        let r2 = self.radius * self.radius;
        Ok(if rho2 <= r2 { perp / (2.0 * PI * r2) } else { perp / (2.0 * PI * rho2) })
    }

    fn field_z(&self, p: &Vec3, t: f64) -> f64 {
        if (xy(p) - self.axis).norm_squared() <= self.radius * self.radius {
            self.flux.value(t) / (PI * self.radius * self.radius)
        } else {
            0.0
        }
    }

    pub fn distance_to_axis(&self, p: &Vec3) -> f64 {
        (xy(p) - self.axis).norm()
    }
}

/// Ball-shaped region used for dwell-window queries.
pub trait Ball {
    fn center(&self) -> Vec3;
    fn radius(&self) -> f64;
    fn label(&self) -> &str;
}

/// Idealized Faraday cage: the total electric field vanishes inside.
#[derive(Debug, Clone, PartialEq)]
pub struct ShieldedCage {
    pub name: String,
    pub center: Vec3,
    pub radius: f64,
}

impl ShieldedCage {
    pub fn new(name: impl Into<String>, center: Vec3, radius: f64) -> Self {
        Self { name: name.into(), center, radius }
    }

    pub fn shell_radius(&self) -> f64 {
        self.radius * (1.0 + SHELL_FRACTION)
    }
}

impl Ball for ShieldedCage {
    fn center(&self) -> Vec3 {
        self.center
    }
    fn radius(&self) -> f64 {
        self.radius
    }
    fn label(&self) -> &str {
        &self.name
    }
}

/// Cage held at a prescribed potential `V(t)`, smoothly weighted in space.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialCage {
    pub name: String,
    pub center: Vec3,
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub potential: Profile,
}

impl PotentialCage {
    pub fn new(
        name: impl Into<String>,
        center: Vec3,
        inner_radius: f64,
        outer_radius: f64,
        potential: Profile,
    ) -> Self {
        Self { name: name.into(), center, inner_radius, outer_radius, potential }
    }

    /// Weight `w(d)` and `dw/dd`: 1 inside the inner radius, 0 beyond the
    /// outer radius, quintic smoothstep between.
    pub fn weight(&self, d: f64) -> (f64, f64) {
        let width = self.outer_radius - self.inner_radius;
        let x = (d - self.inner_radius) / width;
        if x <= 0.0 {
            (1.0, 0.0)
        } else if x >= 1.0 {
            (0.0, 0.0)
        } else {
            (1.0 - smoothstep5(x), -smoothstep5_prime(x) / width)
        }
    }
}

impl Ball for PotentialCage {
    fn center(&self) -> Vec3 {
        self.center
    }
    fn radius(&self) -> f64 {
        self.inner_radius
    }
    fn label(&self) -> &str {
        &self.name
    }
}

fn smoothstep5(x: f64) -> f64 {
    x * x * x * (10.0 + x * (-15.0 + 6.0 * x))
}

fn smoothstep5_prime(x: f64) -> f64 {
    let y = x * (1.0 - x);
    30.0 * y * y
}

fn smoothstep7(x: f64) -> f64 {
    let x2 = x * x;
    x2 * x2 * (35.0 + x * (-84.0 + x * (70.0 - 20.0 * x)))
}

fn smoothstep7_prime(x: f64) -> f64 {
    let y = x * (1.0 - x);
    140.0 * y * y * y
}

/// Complete source description.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FieldConfig {
    pub solenoids: Vec<SolenoidSource>,
    pub shielded_cages: Vec<ShieldedCage>,
    pub potential_cages: Vec<PotentialCage>,
}

/// Potentials and fields at one event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub a: Vec3,
    pub v: f64,
    pub e: Vec3,
    pub b: Vec3,
}

/// Residuals of the finite-difference self-check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FdReport {
    pub step: f64,
    /// `|∇×A − B|`
    pub curl_residual: f64,
    /// `|−∇V − ∂A/∂t − E|`
    pub faraday_residual: f64,
    /// `max(residuals) / step²`
    pub constant: f64,
}

impl FieldConfig {
    /// Validated configuration.
    pub fn new(
        solenoids: Vec<SolenoidSource>,
        shielded_cages: Vec<ShieldedCage>,
        potential_cages: Vec<PotentialCage>,
    ) -> Result<Self> {
        let cfg = Self { solenoids, shielded_cages, potential_cages };
        let issues = cfg.validate();
        if issues.is_empty() {
            Ok(cfg)
        } else {
            Err(Error::InvalidConfig(issues))
        }
    }

    /// Every geometric invariant violation, one message each.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        for s in &self.solenoids {
            if !(s.radius > 0.0 && s.radius.is_finite()) {
                out.push(format!("solenoid `{}`: radius must be positive", s.name));
            }
            if !(s.axis.x.is_finite() && s.axis.y.is_finite()) {
                out.push(format!("solenoid `{}`: axis must be finite", s.name));
            }
        }
        for c in &self.shielded_cages {
            if !(c.radius > 0.0 && c.radius.is_finite()) {
                out.push(format!("cage `{}`: radius must be positive", c.name));
            }
        }
        for c in &self.potential_cages {
            if !(c.inner_radius > 0.0 && c.outer_radius > c.inner_radius && c.outer_radius.is_finite()) {
                out.push(format!("cage `{}`: requires 0 < inner_radius < outer_radius", c.name));
            }
            let k = c.potential.knots();
            if k[0].1 != 0.0 || k[k.len() - 1].1 != 0.0 {
                out.push(format!(
                    "cage `{}`: potential must return to zero outside its active window",
                    c.name
                ));
            }
        }
        let names = self.solenoids.iter().map(|s| &s.name)
            .chain(self.shielded_cages.iter().map(|c| &c.name))
            .chain(self.potential_cages.iter().map(|c| &c.name));
        let mut seen = std::collections::BTreeSet::new();
        for n in names {
            if !seen.insert(n) {
                out.push(format!("duplicate source name `{n}`"));
            }
        }
        let balls: Vec<(&str, Vec3, f64)> = self
            .shielded_cages
            .iter()
            .map(|c| (c.name.as_str(), c.center, c.shell_radius()))
            .chain(self.potential_cages.iter().map(|c| (c.name.as_str(), c.center, c.outer_radius)))
            .collect();
        for (i, (n1, c1, r1)) in balls.iter().enumerate() {
            for (n2, c2, r2) in &balls[i + 1..] {
                if (c1 - c2).norm() < r1 + r2 {
                    out.push(format!("cages `{n1}` and `{n2}` overlap"));
                }
            }
            for s in &self.solenoids {
                if s.distance_to_axis(c1) < s.radius + r1 {
                    out.push(format!("cage `{n1}` intersects solenoid `{}`", s.name));
                }
            }
        }
        out
    }

    /// All knot times of every source profile, sorted and deduplicated.
    pub fn knot_times(&self) -> Vec<f64> {
        let mut ts: Vec<f64> = self
            .solenoids
            .iter()
            .flat_map(|s| s.flux.knot_times())
            .chain(self.potential_cages.iter().flat_map(|c| c.potential.knot_times()))
            .collect();
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        ts
    }

    /// Whether `E` vanishes identically at time `t`: no flux is changing and
    /// no potential cage is charged.
    pub fn electric_field_vanishes(&self, t: f64) -> bool {
        self.solenoids.iter().all(|s| s.flux.slope(t) == 0.0)
            && self.potential_cages.iter().all(|c| c.potential.value(t) == 0.0)
    }

    fn check_axes(&self, p: &Vec3) -> Result<()> {
        for s in &self.solenoids {
            let d = s.distance_to_axis(p);
            if d < AXIS_EPS {
                return Err(Error::AxisProximity { solenoid: s.name.clone(), distance: d });
            }
        }
        Ok(())
    }

    fn base_vector_potential(&self, ev: &Event) -> Result<Vec3> {
        let mut a = Vec3::zeros();
        for s in &self.solenoids {
            a += s.unit_potential(&ev.pos)? * s.flux.value(ev.t);
        }
        Ok(a)
    }

    fn vector_potential_rate(&self, ev: &Event) -> Result<Vec3> {
        let mut a = Vec3::zeros();
        for s in &self.solenoids {
            let rate = s.flux.slope(ev.t);
            if rate != 0.0 {
                a += s.unit_potential(&ev.pos)? * rate;
            }
        }
        Ok(a)
    }

    /// Unblended shield potential of `cage` and its gradient.
    fn shield_core(&self, cage: &ShieldedCage, p: &Vec3, t: f64) -> (f64, Vec3) {
        let mut v = 0.0;
        let mut grad = Vec3::zeros();
        for s in &self.solenoids {
            let rate = s.flux.slope(t);
            if rate == 0.0 {
                continue;
            }
            let dc = xy(&cage.center) - s.axis;
            let dp = xy(p) - s.axis;
            let k = -rate / (2.0 * PI);
            v += k * signed_angle(&dc, &dp);
            grad += Vec3::new(-dp.y, dp.x, 0.0) * (k / dp.norm_squared());
        }
        (v, grad)
    }

    /// Blended shield potential and gradient; `None` outside the shell.
    fn shield_potential(&self, cage: &ShieldedCage, p: &Vec3, t: f64) -> Option<(f64, Vec3)> {
        let rel = p - cage.center;
        let d = rel.norm();
        if d >= cage.shell_radius() {
            return None;
        }
        let (s, grad_s) = self.shield_core(cage, p, t);
        if d <= cage.radius {
            return Some((s, grad_s));
        }
        let width = cage.radius * SHELL_FRACTION;
        let x = (d - cage.radius) / width;
        let g = 1.0 - smoothstep7(x);
        let dg = -smoothstep7_prime(x) / width;
        Some((g * s, grad_s * g + rel * (dg * s / d)))
    }

    fn inside_shield(&self, p: &Vec3) -> bool {
        self.shielded_cages.iter().any(|c| (p - c.center).norm() <= c.radius)
    }

    /// Vector potential `A` in the given gauge.
    pub fn vector_potential(&self, gauge: &GaugeState, ev: &Event) -> Result<Vec3> {
        let mut a = self.base_vector_potential(ev)?;
        if let Some(chi) = gauge.chi() {
            a += chi.gradient(ev);
        }
        Ok(a)
    }

    /// Scalar potential `V` in the given gauge.
    pub fn scalar_potential(&self, gauge: &GaugeState, ev: &Event) -> f64 {
        let mut v = 0.0;
        for c in &self.potential_cages {
            let (w, _) = c.weight((ev.pos - c.center).norm());
            if w != 0.0 {
                v += c.potential.value(ev.t) * w;
            }
        }
        for c in &self.shielded_cages {
            if let Some((vs, _)) = self.shield_potential(c, &ev.pos, ev.t) {
                v += vs;
            }
        }
        if let Some(chi) = gauge.chi() {
            v -= chi.time_derivative(ev);
        }
        v
    }

    /// Total electric field `E = −∇V − ∂A/∂t`; exactly zero inside shielded
    /// cages.
    pub fn electric_field(&self, ev: &Event) -> Result<Vec3> {
        self.check_axes(&ev.pos)?;
        if self.inside_shield(&ev.pos) {
            return Ok(Vec3::zeros());
        }
        let mut e = -self.vector_potential_rate(ev)?;
        for c in &self.potential_cages {
            let rel = ev.pos - c.center;
            let d = rel.norm();
            let (_, dw) = c.weight(d);
            if dw != 0.0 {
                e -= rel * (c.potential.value(ev.t) * dw / d);
            }
        }
        for c in &self.shielded_cages {
            if let Some((_, grad)) = self.shield_potential(c, &ev.pos, ev.t) {
                e -= grad;
            }
        }
        Ok(e)
    }

    /// Magnetic field: uniform `Φ/(πR²) ẑ` inside each solenoid, zero outside.
    pub fn magnetic_field(&self, ev: &Event) -> Result<Vec3> {
        self.check_axes(&ev.pos)?;
        let bz: f64 = self.solenoids.iter().map(|s| s.field_z(&ev.pos, ev.t)).sum();
        Ok(Vec3::new(0.0, 0.0, bz))
    }

    pub fn sample(&self, gauge: &GaugeState, ev: &Event) -> Result<FieldSample> {
        Ok(FieldSample {
            a: self.vector_potential(gauge, ev)?,
            v: self.scalar_potential(gauge, ev),
            e: self.electric_field(ev)?,
            b: self.magnetic_field(ev)?,
        })
    }

    /// Distance (in space or time) from `ev` to the nearest place where the
    /// fields are not smooth, with a description of that boundary.
    pub fn boundary_distance(&self, ev: &Event) -> (f64, String) {
        let mut best = (f64::INFINITY, String::from("none"));
        let mut consider = |d: f64, what: String| {
            if d < best.0 {
                best = (d, what);
            }
        };
        for s in &self.solenoids {
            let rho = s.distance_to_axis(&ev.pos);
            consider((rho - s.radius).abs(), format!("wall of solenoid `{}`", s.name));
            consider(rho, format!("axis of solenoid `{}`", s.name));
            for t in s.flux.knot_times() {
                consider((ev.t - t).abs(), format!("flux knot t={t} of `{}`", s.name));
            }
        }
        for c in &self.shielded_cages {
            let d = (ev.pos - c.center).norm();
            consider((d - c.radius).abs(), format!("surface of cage `{}`", c.name));
            consider((d - c.shell_radius()).abs(), format!("shell of cage `{}`", c.name));
        }
        for c in &self.potential_cages {
            let d = (ev.pos - c.center).norm();
            consider((d - c.inner_radius).abs(), format!("inner radius of cage `{}`", c.name));
            consider((d - c.outer_radius).abs(), format!("outer radius of cage `{}`", c.name));
            for t in c.potential.knot_times() {
                consider((ev.t - t).abs(), format!("potential knot t={t} of `{}`", c.name));
            }
        }
        best
    }

    /// Whether `p` lies in a transition layer (shield shell or potential-cage
    /// weight annulus), where gradients are set by the layer width.
    pub fn in_transition_layer(&self, p: &Vec3) -> bool {
        self.shielded_cages.iter().any(|c| {
            let d = (p - c.center).norm();
            d > c.radius && d < c.shell_radius()
        }) || self.potential_cages.iter().any(|c| {
            let d = (p - c.center).norm();
            d > c.inner_radius && d < c.outer_radius
        })
    }

    /// Central-difference check of `∇×A = B` and `−∇V − ∂A/∂t = E`.
    pub fn fd_consistency(&self, gauge: &GaugeState, ev: &Event, step: f64) -> Result<FdReport> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
        }
        let (dist, what) = self.boundary_distance(ev);
        if dist < 2.0 * step {
            return Err(Error::BoundaryProximity { boundary: what, min_distance: dist });
        }
        let shifted = |axis: usize, h: f64| {
            let mut e = *ev;
            if axis == 3 {
                e.t += h;
            } else {
                e.pos[axis] += h;
            }
            e
        };
        let mut da = [Vec3::zeros(); 4];
        let mut dv = [0.0; 4];
        for (axis, (da_i, dv_i)) in da.iter_mut().zip(dv.iter_mut()).enumerate() {
            let (p, m) = (shifted(axis, step), shifted(axis, -step));
            *da_i = (self.vector_potential(gauge, &p)? - self.vector_potential(gauge, &m)?) / (2.0 * step);
            *dv_i = (self.scalar_potential(gauge, &p) - self.scalar_potential(gauge, &m)) / (2.0 * step);
        }
        // da[j][i] = ∂A_i/∂x_j
        let curl = Vec3::new(da[1].z - da[2].y, da[2].x - da[0].z, da[0].y - da[1].x);
        let e_fd = -Vec3::new(dv[0], dv[1], dv[2]) - da[3];
        let curl_residual = (curl - self.magnetic_field(ev)?).norm();
        let faraday_residual = (e_fd - self.electric_field(ev)?).norm();
        Ok(FdReport {
            step,
            curl_residual,
            faraday_residual,
            constant: curl_residual.max(faraday_residual) / (step * step),
        })
    }
}

/// Smooth scalar gauge function with analytic derivatives.
pub trait GaugeFunction: Send + Sync + fmt::Debug {
    fn name(&self) -> String;
    fn value(&self, ev: &Event) -> f64;
    fn gradient(&self, ev: &Event) -> Vec3;
    fn time_derivative(&self, ev: &Event) -> f64;
}

/// Monomial `coef · x^px · y^py · z^pz · t^pt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coef: f64,
    pub powers: [u32; 4],
}

/// Serializable gauge functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ChiSpec {
    Polynomial { terms: Vec<Monomial> },
    /// `amplitude · exp(−|r − r₀|²/(2σ²) − (t − t₀)²/(2τ²))`
    Gaussian { amplitude: f64, center: [f64; 4], sigma: f64, tau: f64 },
    Sum { parts: Vec<ChiSpec> },
}

fn powi(x: f64, n: u32) -> f64 {
    x.powi(n as i32)
}

impl ChiSpec {
    /// Value, spatial gradient and time derivative.
    fn eval(&self, ev: &Event) -> (f64, Vec3, f64) {
        match self {
            ChiSpec::Polynomial { terms } => {
                let c = [ev.pos.x, ev.pos.y, ev.pos.z, ev.t];
                let mut v = 0.0;
                let mut d = [0.0; 4];
                for m in terms {
                    let f: [f64; 4] = std::array::from_fn(|i| powi(c[i], m.powers[i]));
                    v += m.coef * f.iter().product::<f64>();
                    for (i, di) in d.iter_mut().enumerate() {
                        if m.powers[i] == 0 {
                            continue;
                        }
                        let mut prod = m.coef * m.powers[i] as f64 * powi(c[i], m.powers[i] - 1);
                        for (j, fj) in f.iter().enumerate() {
                            if j != i {
                                prod *= fj;
                            }
                        }
                        *di += prod;
                    }
                }
                (v, Vec3::new(d[0], d[1], d[2]), d[3])
            }
            ChiSpec::Gaussian { amplitude, center, sigma, tau } => {
                let r = ev.pos - Vec3::new(center[0], center[1], center[2]);
                let dt = ev.t - center[3];
                let v = amplitude
                    * (-r.norm_squared() / (2.0 * sigma * sigma) - dt * dt / (2.0 * tau * tau)).exp();
                (v, r * (-v / (sigma * sigma)), -v * dt / (tau * tau))
            }
            ChiSpec::Sum { parts } => parts.iter().fold((0.0, Vec3::zeros(), 0.0), |acc, p| {
                let (v, g, d) = p.eval(ev);
                (acc.0 + v, acc.1 + g, acc.2 + d)
            }),
        }
    }
}

impl GaugeFunction for ChiSpec {
    fn name(&self) -> String {
        match self {
            ChiSpec::Polynomial { terms } => format!("polynomial({} terms)", terms.len()),
            ChiSpec::Gaussian { .. } => "gaussian".into(),
            ChiSpec::Sum { parts } => format!("sum({} parts)", parts.len()),
        }
    }
    fn value(&self, ev: &Event) -> f64 {
        self.eval(ev).0
    }
    fn gradient(&self, ev: &Event) -> Vec3 {
        self.eval(ev).1
    }
    fn time_derivative(&self, ev: &Event) -> f64 {
        self.eval(ev).2
    }
}

/// Base gauge plus an optional gauge function.
#[derive(Debug, Clone, Default)]
pub struct GaugeState {
    chi: Option<Arc<dyn GaugeFunction>>,
}

impl GaugeState {
    /// The symmetric solenoid gauge.
    pub fn base() -> Self {
        Self { chi: None }
    }

    /// Gauge shifted by `chi`, after checking its derivatives against central
    /// differences at a fixed set of sample events.
    pub fn with_chi(chi: Arc<dyn GaugeFunction>) -> Result<Self> {
        check_gauge_function(chi.as_ref())?;
        Ok(Self { chi: Some(chi) })
    }

    pub fn from_spec(spec: ChiSpec) -> Result<Self> {
        Self::with_chi(Arc::new(spec))
    }

    pub fn chi(&self) -> Option<&dyn GaugeFunction> {
        self.chi.as_deref()
    }
}

fn check_gauge_function(chi: &dyn GaugeFunction) -> Result<()> {
    const XS: [f64; 3] = [-2.3, 0.7, 2.9];
    const TS: [f64; 3] = [0.4, 1.9, 3.3];
    let h = CHI_CHECK_STEP;
    for &x in &XS {
        for &y in &XS {
            for &z in &[-0.6, 0.45] {
                for &t in &TS {
                    let ev = Event::new(x, y, z, t);
                    let grad = chi.gradient(&ev);
                    let dt = chi.time_derivative(&ev);
                    let analytic = [grad.x, grad.y, grad.z, dt];
                    for (axis, &an) in analytic.iter().enumerate() {
                        let mut p = ev;
                        let mut m = ev;
                        if axis == 3 {
                            p.t += h;
                            m.t -= h;
                        } else {
                            p.pos[axis] += h;
                            m.pos[axis] -= h;
                        }
                        let fd = (chi.value(&p) - chi.value(&m)) / (2.0 * h);
                        if !fd.is_finite() || !an.is_finite() || (fd - an).abs() > CHI_CHECK_TOL * an.abs().max(1.0) {
                            return Err(Error::GaugeInconsistent {
                                name: chi.name(),
                                detail: format!(
                                    "derivative along axis {axis} at {:?}: analytic {an}, central difference {fd}",
                                    ev.to_array()
                                ),
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(())
}
