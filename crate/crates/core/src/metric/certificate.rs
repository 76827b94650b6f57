//! Scalar inequalities the ball constructions rely on.

#[allow(unused_imports)]
use num_traits::Float;

use super::MetricError;

/// Outcome of the sup-norm ball computation for `A = [[2,−1],[1,2]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxCertificate {
    pub grid_points: usize,
    /// `max f` over the grid.
    pub max_f: f64,
    pub argmax: f64,
    /// `max |f(t) − f(1−t)|` over the grid.
    pub symmetry_residual: f64,
    pub h_half: f64,
    pub h_one: f64,
    /// Smallest value of the closed-form `h″` on `[1/2, 1)`.
    pub min_h_second: f64,
    /// Largest gap between the closed form and a central difference of `h`.
    pub h_second_check: f64,
    pub passed: bool,
}

fn rot_norm(t: f64) -> f64 {
    let l = t.ln();
    l.cos().abs() + l.sin().abs()
}

/// `f(t) = t²(|cos log t| + |sin log t|) + (1−t)²(|cos log(1−t)| + |sin log(1−t)|)`.
pub fn box_f(t: f64) -> f64 {
    let s = 1.0 - t;
    t * t * rot_norm(t) + s * s * rot_norm(s)
}

/// `h(t) = t²(cos log t − sin log t) + 2(1−t)²`.
pub fn box_h(t: f64) -> f64 {
    let l = t.ln();
    t * t * (l.cos() - l.sin()) + 2.0 * (1.0 - t) * (1.0 - t)
}

/// `h″(t) = −2 cos log t − 4 sin log t + 4`.
pub fn box_h_second(t: f64) -> f64 {
    let l = t.ln();
    // d²/dt² [t² cos log t] = cos log t − 3 sin log t
    // d²/dt² [t² sin log t] = 3 cos log t + sin log t
    (l.cos() - 3.0 * l.sin()) - (3.0 * l.cos() + l.sin()) + 4.0
}

/// Evaluates the sup-norm ball inequality `f ≤ 1` on `(0, 1)` together with
/// the convexity argument for `h`.
pub fn box_ball_certificate(grid_points: usize) -> BoxCertificate {
    let mut max_f = f64::NEG_INFINITY;
    let mut argmax = 0.0;
    let mut symmetry_residual: f64 = 0.0;
    for i in 1..grid_points {
        let t = i as f64 / grid_points as f64;
        let f = box_f(t);
        if f > max_f {
            max_f = f;
            argmax = t;
        }
        symmetry_residual = symmetry_residual.max((f - box_f(1.0 - t)).abs());
    }
    let mut min_h_second = f64::INFINITY;
    let mut h_second_check: f64 = 0.0;
    let step = 1e-4;
    let n = grid_points.max(2);
    for i in 0..n {
        let t = 0.5 + 0.5 * i as f64 / n as f64;
        let closed = box_h_second(t);
        min_h_second = min_h_second.min(closed);
        if t + step < 1.0 {
            let fd = (box_h(t + step) - 2.0 * box_h(t) + box_h(t - step)) / (step * step);
            h_second_check = h_second_check.max((fd - closed).abs());
        }
    }
    let h_half = box_h(0.5);
    let h_one = box_h(1.0);
    let passed = max_f <= 1.0 + 1e-12
        && symmetry_residual <= 1e-12
        && h_half <= 1.0
        && h_one <= 1.0 + 1e-15
        && min_h_second >= 2.0 - 1e-12
        && h_second_check <= 1e-5;
    BoxCertificate {
        grid_points,
        max_f,
        argmax,
        symmetry_residual,
        h_half,
        h_one,
        min_h_second,
        h_second_check,
        passed,
    }
}

fn log_max(t: f64, n: u32) -> f64 {
    let l = t.ln().abs();
    l.max(l.powi(n as i32))
}

/// `χ_C(t) = t² max(|log t|, |log t|ⁿ) + (1−t)² max(|log(1−t)|, |log(1−t)|ⁿ) − C t(1−t)`.
pub fn chi(c: f64, n: u32, t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    let s = 1.0 - t;
    t * t * log_max(t, n) + s * s * log_max(s, n) - c * t * s
}

/// Largest value of `χ_C` over the interior points of a uniform grid.
pub fn chi_grid_max(c: f64, n: u32, grid_points: usize) -> f64 {
    (1..grid_points).map(|i| chi(c, n, i as f64 / grid_points as f64)).fold(f64::NEG_INFINITY, f64::max)
}

/// Doubles `C` from 1 until `χ_C ≤ −10⁻⁹` on the interior of a 10⁴-point grid.
pub fn find_chi_constant(n: u32) -> Result<f64, MetricError> {
    assert!(n >= 1, "exponent must be positive");
    let mut c = 1.0;
    for _ in 0..60 {
        if chi_grid_max(c, n, 10_000) <= -1e-9 {
            return Ok(c);
        }
        c *= 2.0;
    }
    Err(MetricError::BudgetExhausted("chi constant"))
}
