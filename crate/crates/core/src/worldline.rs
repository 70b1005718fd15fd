//! Piecewise-linear particle worldlines and two-arm interferometers.

use crate::em::{Ball, Event};
use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// Endpoint coincidence tolerance for interferometer arms.
pub const ENDPOINT_TOL: f64 = 1e-12;

/// Trajectory `x(t)` sampled at knots with strictly increasing time and
/// linear interpolation between them.
#[derive(Debug, Clone, PartialEq)]
pub struct Worldline {
    knots: Vec<Event>,
}

impl Worldline {
    pub fn new(knots: Vec<Event>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidWorldline("at least two knots are required".into()));
        }
        if let Some(k) = knots.iter().find(|k| !k.is_finite()) {
            return Err(Error::InvalidWorldline(format!("non-finite knot {:?}", k.to_array())));
        }
        if let Some(w) = knots.windows(2).find(|w| w[1].t <= w[0].t) {
            return Err(Error::InvalidWorldline(format!(
                "knot times must strictly increase ({} then {})",
                w[0].t, w[1].t
            )));
        }
        Ok(Self { knots })
    }

    /// From `[x, y, z, t]` rows, the scenario file representation.
    pub fn from_knots(rows: &[[f64; 4]]) -> Result<Self> {
        Self::new(rows.iter().map(|r| Event::new(r[0], r[1], r[2], r[3])).collect())
    }

    pub fn to_knots(&self) -> Vec<[f64; 4]> {
        self.knots.iter().map(Event::to_array).collect()
    }

    pub fn knots(&self) -> &[Event] {
        &self.knots
    }

    pub fn start(&self) -> &Event {
        &self.knots[0]
    }

    pub fn end(&self) -> &Event {
        &self.knots[self.knots.len() - 1]
    }

    pub fn time_range(&self) -> (f64, f64) {
        (self.start().t, self.end().t)
    }

    pub fn knot_times(&self) -> impl Iterator<Item = f64> + '_ {
        self.knots.iter().map(|k| k.t)
    }

    fn check_range(&self, t: f64) -> Result<()> {
        let (start, end) = self.time_range();
        if t < start || t > end || !t.is_finite() {
            return Err(Error::TimeOutOfRange { t, start, end });
        }
        Ok(())
    }

    /// Index of the segment containing `t`, right-hand at knots; the last
    /// knot maps to the last segment.
    fn segment_index(&self, t: f64) -> usize {
        let i = self.knots.partition_point(|k| k.t <= t);
        i.saturating_sub(1).min(self.knots.len() - 2)
    }

    pub fn position(&self, t: f64) -> Result<Vec3> {
        self.check_range(t)?;
        let i = self.segment_index(t);
        let (a, b) = (&self.knots[i], &self.knots[i + 1]);
        if t == a.t {
            return Ok(a.pos);
        }
        if t == b.t {
            return Ok(b.pos);
        }
        Ok(a.pos + (b.pos - a.pos) * ((t - a.t) / (b.t - a.t)))
    }

    /// Constant velocity of the segment containing `t`.
    pub fn velocity(&self, t: f64) -> Result<Vec3> {
        self.check_range(t)?;
        let i = self.segment_index(t);
        Ok(self.segment_velocity(i))
    }

    pub(crate) fn segment_velocity(&self, i: usize) -> Vec3 {
        let (a, b) = (&self.knots[i], &self.knots[i + 1]);
        (b.pos - a.pos) / (b.t - a.t)
    }

    /// Every maximal closed interval during which the worldline is inside
    /// `region`, in time order.
    pub fn dwell_windows(&self, region: &dyn Ball) -> Vec<(f64, f64)> {
        let c = region.center();
        let r2 = region.radius() * region.radius();
        let mut spans: Vec<(f64, f64)> = Vec::new();
        for w in self.knots.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let dt = b.t - a.t;
            let v = (b.pos - a.pos) / dt;
            let m = a.pos - c;
            // |m + v τ|² ≤ r² for τ ∈ [0, dt]
            let qa = v.norm_squared();
            let qb = m.dot(&v);
            let qc = m.norm_squared() - r2;
            let span = if qa == 0.0 {
                (qc <= 0.0).then_some((0.0, dt))
            } else {
                let mut disc = qb * qb - qa * qc;
                if disc < 0.0 && disc > -1e-12 * qb * qb {
                    disc = 0.0;
                }
                if disc < 0.0 {
                    None
                } else {
                    let s = disc.sqrt();
                    let lo = ((-qb - s) / qa).max(0.0);
                    let hi = ((-qb + s) / qa).min(dt);
                    (lo <= hi).then_some((lo, hi))
                }
            };
            if let Some((lo, hi)) = span {
                let (lo, hi) = (a.t + lo, if hi == dt { b.t } else { a.t + hi });
                match spans.last_mut() {
                    Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                    _ => spans.push((lo, hi)),
                }
            }
        }
        spans
    }

    /// The first maximal interval inside `region`, if any.
    pub fn dwell_window(&self, region: &dyn Ball) -> Option<(f64, f64)> {
        self.dwell_windows(region).into_iter().next()
    }

    /// Spatial polyline of the knots, dropping zero-length (dwell) segments.
    pub fn spatial_path(&self) -> Vec<Vec3> {
        let mut pts: Vec<Vec3> = Vec::with_capacity(self.knots.len());
        for k in &self.knots {
            if pts.last() != Some(&k.pos) {
                pts.push(k.pos);
            }
        }
        pts
    }

    /// Spatial polyline traversed during `[t0, t1]`.
    pub fn spatial_path_between(&self, t0: f64, t1: f64) -> Result<Vec<Vec3>> {
        let mut pts = vec![self.position(t0)?];
        for k in self.knots.iter().filter(|k| k.t > t0 && k.t < t1) {
            pts.push(k.pos);
        }
        pts.push(self.position(t1)?);
        pts.dedup();
        Ok(pts)
    }
}

/// Two arms with a shared start event and a shared end event.
#[derive(Debug, Clone, PartialEq)]
pub struct Interferometer {
    a: Worldline,
    b: Worldline,
}

impl Interferometer {
    pub fn new(a: Worldline, b: Worldline) -> Result<Self> {
        let close = |x: &Event, y: &Event| (x.pos - y.pos).norm() <= ENDPOINT_TOL && (x.t - y.t).abs() <= ENDPOINT_TOL;
        if !close(a.start(), b.start()) {
            return Err(Error::InvalidInterferometer("arms do not share their start event".into()));
        }
        if !close(a.end(), b.end()) {
            return Err(Error::InvalidInterferometer("arms do not share their end event".into()));
        }
        Ok(Self { a, b })
    }

    pub fn arm_a(&self) -> &Worldline {
        &self.a
    }

    pub fn arm_b(&self) -> &Worldline {
        &self.b
    }

    pub fn time_range(&self) -> (f64, f64) {
        self.a.time_range()
    }

    /// The same interferometer with arm labels exchanged.
    pub fn swapped(&self) -> Self {
        Self { a: self.b.clone(), b: self.a.clone() }
    }

    /// Closed spatial loop: arm a forward, then arm b backward.
    pub fn spatial_loop(&self) -> Vec<Vec3> {
        let mut pts = self.a.spatial_path();
        let mut back = self.b.spatial_path();
        back.reverse();
        pts.extend(back.into_iter().skip(1));
        pts
    }

    /// Union of both arms' knot times.
    pub fn knot_times(&self) -> Vec<f64> {
        let mut ts: Vec<f64> = self.a.knot_times().chain(self.b.knot_times()).collect();
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        ts
    }
}
