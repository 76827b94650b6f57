//! Planar slices of unit spheres `{N = 1}` as CSV and SVG.

use std::fmt::Write as _;
use std::io::Write;

use nilhom_core::metric::{HomogeneousDistance, MetricError};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpherePoint {
    pub angle: f64,
    pub x: f64,
    pub y: f64,
    /// `|N(p) − 1|` at the rendered point.
    pub gauge_residual: f64,
}

/// Largest `r` with `N(r u) ≤ 1`, by doubling and bisection.
fn radius(d: &HomogeneousDistance, u: &[f64], iterations: usize) -> Result<f64, MetricError> {
    let at = |r: f64| -> Result<f64, MetricError> {
        let p: Vec<f64> = u.iter().map(|c| r * c).collect();
        d.gauge(&p)
    };
    let mut lo = 0.0;
    let mut hi = 1.0;
    while at(hi)? <= 1.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e150 {
            return Err(MetricError::GaugeRange(hi));
        }
    }
    for _ in 0..iterations {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if at(mid)? <= 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Polar sweep of `resolution` angles in the plane of basis vectors
/// `plane.0, plane.1` (0-based).
pub fn sphere_slice(
    d: &HomogeneousDistance,
    plane: (usize, usize),
    resolution: usize,
) -> Result<Vec<SpherePoint>, MetricError> {
    let n = d.ball().dimension();
    let mut points = Vec::with_capacity(resolution);
    for i in 0..resolution {
        let angle = std::f64::consts::TAU * i as f64 / resolution as f64;
        let (s, c) = angle.sin_cos();
        let mut u = vec![0.0; n];
        u[plane.0] = c;
        u[plane.1] = s;
        let r = radius(d, &u, 200)?;
        let p: Vec<f64> = u.iter().map(|v| r * v).collect();
        let gauge_residual = (d.gauge(&p)? - 1.0).abs();
        points.push(SpherePoint { angle, x: r * c, y: r * s, gauge_residual });
    }
    Ok(points)
}

pub fn write_csv<W: Write>(points: &[SpherePoint], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for p in points {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

/// One closed polyline; the `viewBox` is the data's bounding box plus a 5% margin.
pub fn svg(points: &[SpherePoint]) -> String {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in points {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(-p.y);
        y1 = y1.max(-p.y);
    }
    if points.is_empty() {
        (x0, x1, y0, y1) = (-1.0, 1.0, -1.0, 1.0);
    }
    let pad = 0.05 * (x1 - x0).max(y1 - y0).max(1e-12);
    let mut coords = String::new();
    for (i, p) in points.iter().chain(points.first()).enumerate() {
        if i > 0 {
            coords.push(' ');
        }
        let _ = write!(coords, "{:.6},{:.6}", p.x, -p.y);
    }
    let stroke = (x1 - x0).max(y1 - y0) / 400.0;
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{:.6} {:.6} {:.6} {:.6}\">\n\
         <polyline fill=\"none\" stroke=\"black\" stroke-width=\"{:.6}\" points=\"{}\"/>\n</svg>\n",
        x0 - pad,
        y0 - pad,
        x1 - x0 + 2.0 * pad,
        y1 - y0 + 2.0 * pad,
        stroke,
        coords
    )
}
