//! Ruled spacetime surfaces bounded by the two interferometer worldlines.
//!
//! For every time `t_k` of a time grid, a spatial curve `C_k` runs from
//! `x_a(t_k)` to `x_b(t_k)`; consecutive curves are joined into quads, each
//! split into two flat triangles. Curves are sampled at `M` nodes uniformly in
//! arc length. The first and last curves are degenerate because the arms share
//! their endpoints.
//!
//! A waypoint strategy routes `C_t` through fixed points (for instance around a
//! solenoid). It is blended with the direct segment by a weight that is 0 at
//! the shared endpoints and 1 between the first and last interior arm knots,
//! so the surface closes at both ends.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::em::FieldConfig;
use crate::error::{Error, Result};
use crate::geometry::{cumulative_lengths, polyline_at, segment_point_distance2d, signed_angle, xy, Vec2, Vec3};
use crate::worldline::Interferometer;

/// Minimum distance of a waypoint route from a solenoid axis.
pub const ROUTE_AXIS_EPS: f64 = 1e-6;
const TIME_MERGE_EPS: f64 = 1e-12;

/// How the curve from `x_a(t)` to `x_b(t)` is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum DeformationStrategy {
    /// Straight segment.
    Direct,
    /// Polyline through the given xy points; `z` is interpolated between the
    /// endpoints.
    ViaWaypoints(Vec<Vec2>),
}

impl DeformationStrategy {
    /// Strategy for the interferometer with swapped arm labels.
    pub fn reversed(&self) -> Self {
        match self {
            Self::Direct => Self::Direct,
            Self::ViaWaypoints(w) => Self::ViaWaypoints(w.iter().rev().cloned().collect()),
        }
    }
}

#[derive(Debug)]
struct MeshSource {
    interf: Interferometer,
    strategy: DeformationStrategy,
    blend: Vec<(f64, f64)>,
}

impl MeshSource {
    fn blend_weight(&self, t: f64) -> f64 {
        let k = &self.blend;
        if t <= k[0].0 || t >= k[k.len() - 1].0 {
            return 0.0;
        }
        let i = k.partition_point(|p| p.0 <= t) - 1;
        let (t0, w0) = k[i];
        let (t1, w1) = k[i + 1];
        w0 + (w1 - w0) * (t - t0) / (t1 - t0)
    }

    fn curve(&self, t: f64, nodes: usize) -> Result<Vec<Vec3>> {
        let xa = self.interf.arm_a().position(t)?;
        let xb = self.interf.arm_b().position(t)?;
        let mut out = Vec::with_capacity(nodes);
        let last = nodes - 1;
        match &self.strategy {
            DeformationStrategy::Direct => {
                for j in 0..nodes {
                    out.push(xa + (xb - xa) * (j as f64 / last as f64));
                }
            }
            DeformationStrategy::ViaWaypoints(wps) => {
                let route = waypoint_route(&xa, &xb, wps);
                let cum = cumulative_lengths(&route);
                let lam = self.blend_weight(t);
                for j in 0..nodes {
                    let s = j as f64 / last as f64;
                    let direct = xa + (xb - xa) * s;
                    out.push(direct * (1.0 - lam) + polyline_at(&route, &cum, s) * lam);
                }
            }
        }
        out[0] = xa;
        out[last] = xb;
        Ok(out)
    }
}

fn waypoint_route(xa: &Vec3, xb: &Vec3, wps: &[Vec2]) -> Vec<Vec3> {
    let n = wps.len();
    let mut route = Vec::with_capacity(n + 2);
    route.push(*xa);
    for (i, w) in wps.iter().enumerate() {
        let z = xa.z + (xb.z - xa.z) * (i + 1) as f64 / (n + 1) as f64;
        route.push(Vec3::new(w.x, w.y, z));
    }
    route.push(*xb);
    route
}

/// Discretized spacetime surface.
#[derive(Debug, Clone)]
pub struct SurfaceMesh {
    times: Vec<f64>,
    curves: Vec<Vec<Vec3>>,
    source: Arc<MeshSource>,
}

/// Build the ruled surface for `interf` with `n` (at least) time intervals
/// and `m` nodes per curve.
///
/// The time grid contains every arm knot, every source-profile knot inside
/// the interferometer interval and the blend knots; the remaining intervals
/// are distributed proportionally to duration.
pub fn build_surface(
    interf: &Interferometer,
    strategy: &DeformationStrategy,
    config: &FieldConfig,
    n: usize,
    m: usize,
) -> Result<SurfaceMesh> {
    if n < 2 || m < 2 {
        return Err(Error::InvalidArgument(format!("surface grid needs N ≥ 2 and M ≥ 2, got N={n}, M={m}")));
    }
    let (t0, t1) = interf.time_range();
    if t1 - t0 <= 0.0 {
        return Err(Error::DegenerateInterferometer("empty time interval".into()));
    }
    let arm_knots = interf.knot_times();
    let interior: Vec<f64> = arm_knots.iter().copied().filter(|&t| t > t0 && t < t1).collect();
    let blend = match (interior.first(), interior.last()) {
        (Some(&lo), Some(&hi)) if lo < hi => vec![(t0, 0.0), (lo, 1.0), (hi, 1.0), (t1, 0.0)],
        (Some(&lo), _) => vec![(t0, 0.0), (lo, 1.0), (t1, 0.0)],
        _ => vec![(t0, 0.0), (0.5 * (t0 + t1), 1.0), (t1, 0.0)],
    };

    let mut base: Vec<f64> = arm_knots
        .iter()
        .copied()
        .chain(config.knot_times().into_iter().filter(|&t| t > t0 && t < t1))
        .chain(blend.iter().map(|b| b.0))
        .collect();
    base.sort_by(f64::total_cmp);
    base.dedup_by(|b, a| (*b - *a).abs() <= TIME_MERGE_EPS);
    *base.last_mut().unwrap() = t1;

    let total = t1 - t0;
    let mut times = vec![base[0]];
    for w in base.windows(2) {
        let pieces = ((n as f64 * (w[1] - w[0]) / total) - 1e-9).ceil().max(1.0) as usize;
        for p in 1..pieces {
            times.push(w[0] + (w[1] - w[0]) * p as f64 / pieces as f64);
        }
        times.push(w[1]);
    }

    let source = Arc::new(MeshSource { interf: interf.clone(), strategy: strategy.clone(), blend });
    if let DeformationStrategy::ViaWaypoints(wps) = strategy {
        validate_waypoints(&source, wps, config, &times)?;
    }
    SurfaceMesh::from_source(source, times, m)
}

fn validate_waypoints(source: &MeshSource, wps: &[Vec2], config: &FieldConfig, times: &[f64]) -> Result<()> {
    if wps.is_empty() {
        return Err(Error::InvalidStrategy("waypoint strategy needs at least one waypoint".into()));
    }
    if wps.iter().any(|w| !(w.x.is_finite() && w.y.is_finite())) {
        return Err(Error::InvalidStrategy("waypoints must be finite".into()));
    }
    let check = |p: &Vec2, q: &Vec2, what: &str| -> Result<()> {
        for s in &config.solenoids {
            let d = segment_point_distance2d(p, q, &s.axis);
            if d <= s.radius || d < ROUTE_AXIS_EPS {
                return Err(Error::InvalidStrategy(format!(
                    "{what} from ({}, {}) to ({}, {}) enters solenoid `{}`",
                    p.x, p.y, q.x, q.y, s.name
                )));
            }
        }
        Ok(())
    };
    for w in wps.windows(2) {
        check(&w[0], &w[1], "waypoint leg")?;
    }
    for &t in times.iter().filter(|&&t| source.blend_weight(t) == 1.0) {
        let xa = xy(&source.interf.arm_a().position(t)?);
        let xb = xy(&source.interf.arm_b().position(t)?);
        check(&xa, &wps[0], "route start")?;
        check(&wps[wps.len() - 1], &xb, "route end")?;
    }
    Ok(())
}

impl SurfaceMesh {
    fn from_source(source: Arc<MeshSource>, times: Vec<f64>, m: usize) -> Result<Self> {
        let curves = times.iter().map(|&t| source.curve(t, m)).collect::<Result<Vec<_>>>()?;
        Ok(Self { times, curves, source })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn curves(&self) -> &[Vec<Vec3>] {
        &self.curves
    }

    pub fn curve(&self, k: usize) -> &[Vec3] {
        &self.curves[k]
    }

    /// Number of time intervals (`N`).
    pub fn time_intervals(&self) -> usize {
        self.times.len() - 1
    }

    /// Nodes per curve (`M`).
    pub fn nodes_per_curve(&self) -> usize {
        self.curves[0].len()
    }

    pub fn interferometer(&self) -> &Interferometer {
        &self.source.interf
    }

    pub fn strategy(&self) -> &DeformationStrategy {
        &self.source.strategy
    }

    /// Subdivide every time interval and every curve segment by `factor`.
    pub fn refine(&self, factor: usize) -> Result<Self> {
        if factor < 2 {
            return Err(Error::InvalidArgument(format!("refinement factor must be ≥ 2, got {factor}")));
        }
        let mut times = vec![self.times[0]];
        for w in self.times.windows(2) {
            for p in 1..factor {
                times.push(w[0] + (w[1] - w[0]) * p as f64 / factor as f64);
            }
            times.push(w[1]);
        }
        let m = factor * (self.nodes_per_curve() - 1) + 1;
        Self::from_source(self.source.clone(), times, m)
    }

    /// The two triangles of patch `(k, j)`, oriented so that their normal is
    /// `∂x/∂t × ∂x/∂s`.
    pub fn patch_triangles(&self, k: usize, j: usize) -> [[Vec3; 3]; 2] {
        let p00 = self.curves[k][j];
        let p01 = self.curves[k][j + 1];
        let p10 = self.curves[k + 1][j];
        let p11 = self.curves[k + 1][j + 1];
        [[p00, p10, p01], [p11, p01, p10]]
    }

    /// Spatial area bivector of patch `(k, j)` (time direction × curve
    /// direction).
    pub fn patch_area(&self, k: usize, j: usize) -> Vec3 {
        self.patch_triangles(k, j)
            .iter()
            .map(|[a, b, c]| (b - a).cross(&(c - a)) * 0.5)
            .sum()
    }

    /// Curve element of patch `(k, j)` at the interval midpoint.
    pub fn patch_dr(&self, k: usize, j: usize) -> Vec3 {
        let c0 = &self.curves[k];
        let c1 = &self.curves[k + 1];
        ((c0[j + 1] - c0[j]) + (c1[j + 1] - c1[j])) * 0.5
    }

    /// Curve at the midpoint of time interval `k`, averaging the bounding
    /// curves node by node.
    pub fn mid_curve(&self, k: usize) -> Vec<Vec3> {
        self.curves[k].iter().zip(&self.curves[k + 1]).map(|(a, b)| (a + b) * 0.5).collect()
    }

    /// Sum of all patch area bivectors.
    pub fn total_area(&self) -> Vec3 {
        let mut acc = Vec3::zeros();
        for k in 0..self.time_intervals() {
            for j in 0..self.nodes_per_curve() - 1 {
                acc += self.patch_area(k, j);
            }
        }
        acc
    }

    pub fn curve_length(&self, k: usize) -> f64 {
        self.curves[k].windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }

    /// Node dump with header `t,s,x,y,z`; zero-length curves contribute
    /// their two endpoints only.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["t", "s", "x", "y", "z"]).expect("in-memory write");
        let last = self.nodes_per_curve() - 1;
        for (k, curve) in self.curves.iter().enumerate() {
            let degenerate = self.curve_length(k) == 0.0;
            for (j, p) in curve.iter().enumerate() {
                if degenerate && j != 0 && j != last {
                    continue;
                }
                let s = j as f64 / last as f64;
                w.write_record([self.times[k], s, p.x, p.y, p.z].map(|v| v.to_string()))
                    .expect("in-memory write");
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
    }
}

/// Signed number of turns of a closed xy polyline about `axis`.
pub fn winding_number(polyline: &[Vec2], axis: &Vec2) -> Result<i64> {
    if polyline.len() < 2 {
        return Err(Error::InvalidPolyline("need at least two vertices".into()));
    }
    let first = polyline[0];
    let last = polyline[polyline.len() - 1];
    if (first - last).norm() > 1e-12 {
        return Err(Error::InvalidPolyline("polyline is not closed".into()));
    }
    if let Some(p) = polyline.iter().find(|p| (*p - axis).norm() < 1e-9) {
        return Err(Error::InvalidPolyline(format!("vertex ({}, {}) lies on the axis", p.x, p.y)));
    }
    let total: f64 = polyline
        .windows(2)
        .map(|w| signed_angle(&(w[0] - axis), &(w[1] - axis)))
        .sum();
    let turns = total / (2.0 * PI);
    let n = turns.round();
    if (turns - n).abs() > 1e-6 {
        return Err(Error::InvalidPolyline(format!("non-integer winding {turns}")));
    }
    Ok(n as i64)
}

/// Winding about `axis` of curve `k` of `first` followed by curve `k` of
/// `second` traversed backwards.
pub fn fixed_time_winding(first: &SurfaceMesh, second: &SurfaceMesh, k: usize, axis: &Vec2) -> Result<i64> {
    let mut loop_: Vec<Vec2> = first.curve(k).iter().map(xy).collect();
    loop_.extend(second.curve(k).iter().rev().skip(1).map(xy));
    winding_number(&loop_, axis)
}
