//! Small geometric kernels shared by the field, surface and phase modules.

use std::f64::consts::PI;

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Vec2 = nalgebra::Vector2<f64>;

#[inline]
pub fn xy(v: &Vec3) -> Vec2 {
    Vec2::new(v.x, v.y)
}

#[inline]
pub fn cross2(a: &Vec2, b: &Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Signed shoelace area of a closed polygon (the closing edge is implicit).
pub fn shoelace_area(poly: &[Vec2]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        acc += cross2(&poly[i], &poly[(i + 1) % n]);
    }
    0.5 * acc
}

/// Signed area of the intersection of a polygon with a disk.
///
/// The sign follows the polygon orientation (counter-clockwise positive).
/// Each edge contributes the signed area of the intersection of the disk with
/// the triangle spanned by the disk center and the edge: straight triangles
/// where the edge is inside the disk, circular sectors where it is outside.
pub fn polygon_disk_area(poly: &[Vec2], center: &Vec2, radius: f64) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        let p = poly[i] - center;
        let q = poly[(i + 1) % n] - center;
        acc += edge_disk_area(&p, &q, radius);
    }
    acc
}

fn edge_disk_area(p: &Vec2, q: &Vec2, r: f64) -> f64 {
    let d = q - p;
    let a = d.norm_squared();
    let mut cuts = [0.0, 1.0, 1.0, 1.0];
    let mut ncut = 1;
    if a > 0.0 {
        let b = p.dot(&d);
        let c = p.norm_squared() - r * r;
        let disc = b * b - a * c;
        if disc > 0.0 {
            let s = disc.sqrt();
            for tau in [(-b - s) / a, (-b + s) / a] {
                if tau > 0.0 && tau < 1.0 {
                    cuts[ncut] = tau;
                    ncut += 1;
                }
            }
        }
    }
    cuts[ncut] = 1.0;
    let mut acc = 0.0;
    for w in cuts[..=ncut].windows(2) {
        let u = p + d * w[0];
        let v = p + d * w[1];
        let mid = (u + v) * 0.5;
        if mid.norm_squared() <= r * r {
            acc += 0.5 * cross2(&u, &v);
        } else {
            acc += 0.5 * r * r * cross2(&u, &v).atan2(u.dot(&v));
        }
    }
    acc
}

/// Parameters in (0, 1) where the segment `p + τ (q - p)` crosses the sphere
/// `|x - c| = r`.
pub fn segment_sphere_crossings(p: &Vec3, q: &Vec3, c: &Vec3, r: f64, out: &mut Vec<f64>) {
    let d = q - p;
    let m = p - c;
    quadratic_crossings(d.norm_squared(), m.dot(&d), m.norm_squared() - r * r, out);
}

/// Parameters in (0, 1) where the segment crosses the infinite z-aligned
/// cylinder of radius `r` around `axis`.
pub fn segment_cylinder_crossings(p: &Vec3, q: &Vec3, axis: &Vec2, r: f64, out: &mut Vec<f64>) {
    let d = xy(&(q - p));
    let m = xy(p) - axis;
    quadratic_crossings(d.norm_squared(), m.dot(&d), m.norm_squared() - r * r, out);
}

fn quadratic_crossings(a: f64, half_b: f64, c: f64, out: &mut Vec<f64>) {
    if a <= 0.0 {
        return;
    }
    let disc = half_b * half_b - a * c;
    if disc < 0.0 {
        return;
    }
    let s = disc.sqrt();
    for tau in [(-half_b - s) / a, (-half_b + s) / a] {
        if tau > 0.0 && tau < 1.0 {
            out.push(tau);
        }
    }
}

/// Distance from `point` to the segment `[p, q]` in the xy-plane.
pub fn segment_point_distance2d(p: &Vec2, q: &Vec2, point: &Vec2) -> f64 {
    let d = q - p;
    let len2 = d.norm_squared();
    if len2 == 0.0 {
        return (point - p).norm();
    }
    let tau = ((point - p).dot(&d) / len2).clamp(0.0, 1.0);
    (p + d * tau - point).norm()
}

/// Point at arc-length fraction `s ∈ [0, 1]` along a polyline.
pub fn polyline_at(points: &[Vec3], cumulative: &[f64], s: f64) -> Vec3 {
    let total = *cumulative.last().unwrap_or(&0.0);
    if total == 0.0 || points.len() == 1 {
        return points[0];
    }
    let target = s.clamp(0.0, 1.0) * total;
    let idx = match cumulative.partition_point(|&c| c <= target) {
        0 => 0,
        i => (i - 1).min(points.len() - 2),
    };
    let seg = cumulative[idx + 1] - cumulative[idx];
    if seg == 0.0 {
        return points[idx];
    }
    let frac = (target - cumulative[idx]) / seg;
    points[idx] + (points[idx + 1] - points[idx]) * frac
}

/// Cumulative arc lengths, starting at 0.
pub fn cumulative_lengths(points: &[Vec3]) -> Vec<f64> {
    let mut out = Vec::with_capacity(points.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in points.windows(2) {
        acc += (w[1] - w[0]).norm();
        out.push(acc);
    }
    out
}

/// Signed angle from `u` to `v` in (-π, π].
#[inline]
pub fn signed_angle(u: &Vec2, v: &Vec2) -> f64 {
    let a = cross2(u, v).atan2(u.dot(v));
    if a == -PI {
        PI
    } else {
        a
    }
}
