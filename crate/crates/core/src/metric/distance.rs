use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use super::{check_dimension, sample_rng, Distance, HomogeneousBall, MetricError};
use crate::group::NilpotentGroup;
use crate::matrix::RealMatrix;
use crate::spectral::{DilationFlow, SpectralTolerance};

/// Bound on `|log μ|` searched by the gauge.
const LOG_RANGE: f64 = 700.0;

/// `d(p, q) = N(p⁻¹q)` with `N(x) = inf{μ > 0 : μ^{−A} x ∈ B}`.
#[derive(Debug, Clone)]
pub struct HomogeneousDistance {
    group: NilpotentGroup,
    generator: RealMatrix,
    ball: HomogeneousBall,
    flow: DilationFlow,
}

impl HomogeneousDistance {
    /// `ball` must be `A`-convex for the result to be a distance; this is not
    /// checked here.
    pub fn new(group: NilpotentGroup, generator: RealMatrix, ball: HomogeneousBall) -> Result<Self, MetricError> {
        check_dimension(group.dimension(), generator.rows())?;
        check_dimension(group.dimension(), ball.dimension())?;
        group.algebra().check_derivation(&generator, 1e-9).map_err(|_| MetricError::NotDerivation)?;
        let flow = DilationFlow::new(&generator, SpectralTolerance::default())?;
        Ok(Self { group, generator, ball, flow })
    }

    pub fn ball(&self) -> &HomogeneousBall {
        &self.ball
    }

    pub fn generator(&self) -> &RealMatrix {
        &self.generator
    }

    pub fn flow(&self) -> &DilationFlow {
        &self.flow
    }

    /// The gauge `N(x)`, solved in `u = log μ` to about `10⁻¹²`.
    pub fn gauge(&self, x: &[f64]) -> Result<f64, MetricError> {
        check_dimension(self.group.dimension(), x.len())?;
        if x.iter().all(|v| *v == 0.0) {
            return Ok(0.0);
        }
        let y = self.flow.coordinates(x);
        let g = |u: f64| self.ball.excess(&self.flow.apply_coordinates(-u, &y));

        // invariant: g(a) > 0 ≥ g(b), a < b
        let (mut a, mut fa, mut b, mut fb);
        let g0 = g(0.0);
        if g0 > 0.0 {
            a = 0.0;
            fa = g0;
            let mut step = 1.0;
            loop {
                let u = a + step;
                let f = g(u);
                if f <= 0.0 {
                    b = u;
                    fb = f;
                    break;
                }
                if u > LOG_RANGE {
                    return Err(MetricError::GaugeRange(LOG_RANGE));
                }
                a = u;
                fa = f;
                step *= 2.0;
            }
        } else {
            b = 0.0;
            fb = g0;
            let mut step = 1.0;
            loop {
                let u = b - step;
                let f = g(u);
                if f > 0.0 {
                    a = u;
                    fa = f;
                    break;
                }
                if u < -LOG_RANGE {
                    return Err(MetricError::GaugeRange(LOG_RANGE));
                }
                b = u;
                fb = f;
                step *= 2.0;
            }
        }

        let mut side = 0i8;
        let mut bisect = false;
        for _ in 0..200 {
            let width = b - a;
            if width <= 1e-12 * a.abs().max(b.abs()).max(1.0) {
                break;
            }
            let mut c = if bisect { 0.5 * (a + b) } else { b - fb * (b - a) / (fb - fa) };
            if !(c > a && c < b) {
                c = 0.5 * (a + b);
            }
            let fc = g(c);
            if fc > 0.0 {
                a = c;
                fa = fc;
                if side == 1 {
                    fb *= 0.5;
                }
                side = 1;
            } else {
                b = c;
                fb = fc;
                if side == -1 {
                    fa *= 0.5;
                }
                side = -1;
            }
            bisect = b - a > 0.5 * width;
        }
        Ok((0.5 * (a + b)).exp())
    }
}

impl Distance for HomogeneousDistance {
    fn group(&self) -> &NilpotentGroup {
        &self.group
    }

    fn distance(&self, p: &[f64], q: &[f64]) -> Result<f64, MetricError> {
        check_dimension(self.group.dimension(), p.len())?;
        check_dimension(self.group.dimension(), q.len())?;
        self.gauge(&self.group.difference(p, q))
    }
}

/// `d'(x, y) = max_k d(kx, ky)` over a finite set of automorphisms.
#[derive(Debug, Clone)]
pub struct Averaged<D> {
    base: D,
    samples: Vec<RealMatrix>,
}

impl<D: Distance> Averaged<D> {
    pub fn new(base: D, samples: Vec<RealMatrix>) -> Self {
        assert!(!samples.is_empty(), "at least one automorphism is needed");
        Self { base, samples }
    }

    pub fn base(&self) -> &D {
        &self.base
    }

    pub fn samples(&self) -> &[RealMatrix] {
        &self.samples
    }
}

impl<D: Distance> Distance for Averaged<D> {
    fn group(&self) -> &NilpotentGroup {
        self.base.group()
    }

    fn distance(&self, p: &[f64], q: &[f64]) -> Result<f64, MetricError> {
        let mut best: f64 = 0.0;
        for k in &self.samples {
            best = best.max(self.base.distance(&k.mul_vec(p), &k.mul_vec(q))?);
        }
        Ok(best)
    }
}

/// `d″(x, y) = sup_{μ ∈ [1, λ]} d(μ^{A'} x, μ^{A'} y) / μ` on a geometric grid.
#[derive(Debug, Clone)]
pub struct SupDistance<D> {
    base: D,
    flow: DilationFlow,
    lambda: f64,
    grid: Vec<f64>,
}

impl<D: Distance> SupDistance<D> {
    pub fn new(base: D, generator: &RealMatrix, lambda: f64, points: usize) -> Result<Self, MetricError> {
        if !(lambda > 0.0) || lambda == 1.0 {
            return Err(MetricError::InvalidScale(lambda));
        }
        check_dimension(base.dimension(), generator.rows())?;
        let flow = DilationFlow::new(generator, SpectralTolerance::default())?;
        let mut s = Self { base, flow, lambda, grid: Vec::new() };
        s.set_grid(points);
        Ok(s)
    }

    fn set_grid(&mut self, points: usize) {
        let top = if self.lambda > 1.0 { self.lambda } else { 1.0 / self.lambda };
        let points = points.max(2);
        self.grid = (0..points).map(|i| top.powf(i as f64 / (points - 1) as f64)).collect();
    }

    /// The same distance on a grid with `points` nodes.
    pub fn with_grid(&self, points: usize) -> Self
    where
        D: Clone,
    {
        let mut s = self.clone();
        s.set_grid(points);
        s
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn base(&self) -> &D {
        &self.base
    }

    pub fn flow(&self) -> &DilationFlow {
        &self.flow
    }
}

impl<D: Distance> Distance for SupDistance<D> {
    fn group(&self) -> &NilpotentGroup {
        self.base.group()
    }

    fn distance(&self, p: &[f64], q: &[f64]) -> Result<f64, MetricError> {
        let yp = self.flow.coordinates(p);
        let yq = self.flow.coordinates(q);
        let mut best: f64 = 0.0;
        for &mu in &self.grid {
            let s = mu.ln();
            let d = self.base.distance(&self.flow.apply_coordinates(s, &yp), &self.flow.apply_coordinates(s, &yq))?;
            best = best.max(d / mu);
        }
        Ok(best)
    }
}

/// `d′(x, y) = max_k d(kx, ky)`.
pub fn averaged_distance<D: Distance>(d: D, samples: Vec<RealMatrix>) -> Averaged<D> {
    Averaged::new(d, samples)
}

/// `d″` on a geometric grid of `points` nodes in `[1, λ]`.
pub fn sup_distance<D: Distance>(
    d: D,
    a: &RealMatrix,
    lambda: f64,
    points: usize,
) -> Result<SupDistance<D>, MetricError> {
    SupDistance::new(d, a, lambda, points)
}

/// Constants with `lower·d₁ ≤ d₂ ≤ upper·d₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bilipschitz {
    pub lower: f64,
    pub upper: f64,
    /// Smallest and largest `d₂/d₁` seen during validation.
    pub observed: (f64, f64),
    pub samples: usize,
    pub validated: bool,
}

fn max_over_annulus<D1: Distance, D2: Distance>(
    d1: &D1,
    d2: &D2,
    delta: &RealMatrix,
    delta_inv: &RealMatrix,
    lambda: f64,
    points: &[Vec<f64>],
) -> Result<f64, MetricError> {
    let zero = vec![0.0; d1.dimension()];
    let mut best: f64 = 0.0;
    for p in points {
        let mut x = p.clone();
        let mut r = d1.distance(&zero, &x)?;
        if r == 0.0 {
            continue;
        }
        let mut guard = 0;
        while r > 1.0 && guard < 4000 {
            x = delta_inv.mul_vec(&x);
            r /= lambda;
            guard += 1;
        }
        while r <= 1.0 / lambda && guard < 4000 {
            x = delta.mul_vec(&x);
            r *= lambda;
            guard += 1;
        }
        best = best.max(d2.distance(&zero, &x)?);
    }
    Ok(best)
}

/// Bi-Lipschitz constants between two distances sharing the dilation `δ` of
/// factor `λ`: finds `k` with `δᵏ B₁ ⊆ B₂` on sampled points of the unit
/// annulus, then validates on `samples` random pairs.
pub fn bilipschitz_constants<D1: Distance, D2: Distance>(
    d1: &D1,
    d2: &D2,
    delta: &RealMatrix,
    lambda: f64,
    samples: usize,
    seed: u64,
    radius: f64,
) -> Result<Bilipschitz, MetricError> {
    if !(lambda > 0.0) || lambda == 1.0 {
        return Err(MetricError::InvalidScale(lambda));
    }
    let n = d1.dimension();
    check_dimension(n, d2.dimension())?;
    check_dimension(n, delta.rows())?;
    let inv = delta.inverse().ok_or(MetricError::InvalidScale(lambda))?;
    let (delta, delta_inv, lambda) =
        if lambda > 1.0 { (delta.clone(), inv, lambda) } else { (inv, delta.clone(), 1.0 / lambda) };
    let search = samples.clamp(1, 1000);
    let points: Vec<Vec<f64>> = (0..search)
        .map(|i| {
            let mut rng = sample_rng(seed ^ 0x5eed, i as u64);
            (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect()
        })
        .collect();
    let s2 = max_over_annulus(d1, d2, &delta, &delta_inv, lambda, &points)?;
    let s1 = max_over_annulus(d2, d1, &delta, &delta_inv, lambda, &points)?;
    let k2 = (-s2.ln() / lambda.ln()).floor();
    let k1 = (-s1.ln() / lambda.ln()).floor();
    let upper = lambda.powf(1.0 - k2);
    let lower = lambda.powf(k1 - 1.0);
    let mut observed = (f64::INFINITY, 0.0f64);
    let mut validated = true;
    for i in 0..samples {
        let mut rng = sample_rng(seed, i as u64);
        let p: Vec<f64> = (0..n).map(|_| rng.gen_range(-radius..=radius)).collect();
        let q: Vec<f64> = (0..n).map(|_| rng.gen_range(-radius..=radius)).collect();
        let a = d1.distance(&p, &q)?;
        let b = d2.distance(&p, &q)?;
        if a == 0.0 {
            continue;
        }
        let ratio = b / a;
        observed = (observed.0.min(ratio), observed.1.max(ratio));
        if ratio < lower * (1.0 - 1e-9) || ratio > upper * (1.0 + 1e-9) {
            validated = false;
        }
    }
    Ok(Bilipschitz { lower, upper, observed, samples, validated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::LieAlgebra;
    use crate::matrix::Matrix;
    use proptest::prelude::*;

    fn plane(a: &[f64]) -> HomogeneousDistance {
        let g = NilpotentGroup::new(LieAlgebra::abelian(2)).unwrap();
        HomogeneousDistance::new(g, Matrix::from_row_slice(2, 2, a), HomogeneousBall::euclidean(2)).unwrap()
    }

    #[test]
    fn scalar_gauge() {
        let d = plane(&[2.0, 0.0, 0.0, 2.0]);
        assert!((d.gauge(&[4.0, 0.0]).unwrap() - 2.0).abs() < 1e-11);
        assert!((d.gauge(&[0.0, 1e-200]).unwrap() - 1e-100).abs() < 1e-110);
        assert_eq!(d.gauge(&[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn gauge_out_of_range() {
        let d = plane(&[1.0, 0.0, 0.0, 1.0]);
        assert!(matches!(d.gauge(&[f64::INFINITY, 0.0]), Err(MetricError::GaugeRange(_))));
    }

    #[test]
    fn sup_distance_of_homogeneous_distance_is_itself() {
        let d = plane(&[1.0, -1.0, 1.0, 1.0]);
        let a = Matrix::from_row_slice(2, 2, &[1.0, -1.0, 1.0, 1.0]);
        let s = SupDistance::new(d.clone(), &a, 2.0, 9).unwrap();
        for (p, q) in [([0.3, -1.0], [2.0, 0.5]), ([1.0, 1.0], [-1.0, 0.0])] {
            let x = d.distance(&p, &q).unwrap();
            let y = s.distance(&p, &q).unwrap();
            assert!((x - y).abs() < 1e-10 * x.max(1.0));
        }
    }

    #[test]
    fn bilipschitz_scaled_copy() {
        let d1 = plane(&[1.0, 0.0, 0.0, 1.0]);
        let g = d1.group().clone();
        let d2 = HomogeneousDistance::new(g, RealMatrix::identity(2), {
            HomogeneousBall::Norm { gram: Matrix::diagonal(&[4.0, 4.0]) }
        })
        .unwrap();
        let delta = Matrix::diagonal(&[2.0, 2.0]);
        let b = bilipschitz_constants(&d1, &d2, &delta, 2.0, 500, 3, 2.0).unwrap();
        assert!(b.validated);
        assert!(b.upper == 2.0 || b.upper == 4.0, "{b:?}");
        let same = bilipschitz_constants(&d1, &d1, &delta, 2.0, 200, 3, 2.0).unwrap();
        assert!(same.validated && same.upper <= 2.0 + 1e-12 && same.lower >= 0.5 - 1e-12, "{same:?}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn gauge_is_homogeneous(x in prop::array::uniform2(-5.0f64..5.0), l in 0.05f64..20.0) {
            let d = plane(&[1.5, 1.0, 0.0, 1.5]);
            prop_assume!(x[0].abs() + x[1].abs() > 1e-6);
            let n = d.gauge(&x).unwrap();
            let nl = d.gauge(&d.flow().dilate(l, &x)).unwrap();
            prop_assert!((nl - l * n).abs() <= 1e-9 * (l * n).max(1.0));
        }

        #[test]
        fn gauge_is_monotone_along_orbits(x in prop::array::uniform2(-5.0f64..5.0), s in 0.0f64..3.0) {
            let d = plane(&[2.0, -1.0, 1.0, 2.0]);
            prop_assume!(x[0].abs() + x[1].abs() > 1e-6);
            let a = d.gauge(&x).unwrap();
            let b = d.gauge(&d.flow().apply(s, &x)).unwrap();
            prop_assert!(b >= a * (1.0 - 1e-12));
        }
    }
}
