//! Splitting a dilating automorphism as `φ = K λ^A` with `K` compact and
//! `σ(A)` real, and the distances this produces.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{CheckFailure, LieAlgebra};
use crate::grading::{classify_automorphism, GradingError, Reason};
use crate::matrix::{Matrix, RealMatrix};
use crate::metric::{
    bilipschitz_constants, sample_rng, Averaged, Bilipschitz, Distance, HomogeneousDistance, MetricError, SupDistance,
};
use crate::spectral::{self, SpectralData, SpectralError, SpectralTolerance};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecomposeError {
    #[error("scale factor must be positive and different from 1, got {0}")]
    InvalidScale(f64),
    #[error("not an automorphism: {0}")]
    NotAutomorphism(CheckFailure),
    #[error("not a derivation: {0}")]
    NotDerivation(CheckFailure),
    #[error("unipotent part is not unipotent ((N - I)^{power} does not vanish); eigenvalues were probably clustered wrongly, try a different tolerance")]
    NotUnipotent { power: usize },
    #[error("{what} residual {residual:e} exceeds tolerance")]
    Invariant { what: &'static str, residual: f64 },
    #[error("hypothesis violated: {0}")]
    Hypothesis(&'static str),
    #[error("no distance admits this dilation: {0:?}")]
    NoDistance(Vec<Reason>),
    #[error("not a dilation of factor {lambda} for the distance (residual {residual:e})")]
    NotDilation { lambda: f64, residual: f64 },
    #[error("sample {0} of the compact closure is not an automorphism")]
    ClosureSample(usize),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Grading(#[from] GradingError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionResiduals {
    /// `‖φ − K λ^A‖ / max(1, ‖φ‖)`.
    pub product: f64,
    /// `max |Im σ(A)|`.
    pub imaginary: f64,
    /// `max ||β| − 1|` over `β ∈ σ(K)`.
    pub unit_circle: f64,
    /// `‖[K, A]‖`.
    pub commutator: f64,
}

/// `φ = K λ^A` with `K` diagonalizable, `σ(K) ⊂ S¹`, `σ(A) ⊂ ℝ`, `[K, A] = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DilationDecomposition {
    #[serde(rename = "K")]
    pub k: RealMatrix,
    #[serde(rename = "A")]
    pub a: RealMatrix,
    pub lambda: f64,
    pub residuals: DecompositionResiduals,
}

fn check_scale(lambda: f64) -> Result<(), DecomposeError> {
    if lambda > 0.0 && lambda != 1.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(DecomposeError::InvalidScale(lambda))
    }
}

/// `K = φ_k`, `Ã = φ_{log r}`, `N = φ_n φ`, `A = (Ã + log N) / log λ` for
/// `k(α) = α/|α|`, `r(α) = |α|`, `n(α) = 1/α`.
pub fn decompose_automorphism(
    g: &LieAlgebra,
    phi: &RealMatrix,
    lambda: f64,
) -> Result<DilationDecomposition, DecomposeError> {
    check_scale(lambda)?;
    g.check_automorphism(phi, 1e-9).map_err(DecomposeError::NotAutomorphism)?;
    let spec = spectral::generalized_eigenspaces(phi, SpectralTolerance::default())?;
    let k = spectral::spectral_map(phi, &spec, |z| z / z.norm())?;
    let a_tilde = spectral::spectral_map(phi, &spec, |z| Complex64::new(z.norm().ln(), 0.0))?;
    let n_inv = spectral::spectral_map(phi, &spec, |z| Complex64::new(1.0, 0.0) / z)?;
    let unipotent = n_inv.mul(phi);
    let d = spectral::log_unipotent(&unipotent, 1e-8).map_err(|e| match e {
        SpectralError::NotUnipotent { power } => DecomposeError::NotUnipotent { power },
        other => other.into(),
    })?;
    let a = a_tilde.add(&d).scale(&(1.0 / lambda.ln()));

    let scale = phi.frobenius_norm().max(1.0);
    let product = phi.distance_to(&k.mul(&spectral::lambda_pow(&a, lambda)?)) / scale;
    let imaginary = spectral::eigenvalues(&a)?.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let k_spec = spectral::generalized_eigenspaces(&k, SpectralTolerance::default())?;
    let unit_circle = k_spec.eigenvalues().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max);
    let commutator = k.commutator(&a).frobenius_norm();
    let residuals = DecompositionResiduals { product, imaginary, unit_circle, commutator };
    for (what, r, tol) in [
        ("product", product, 1e-9),
        ("imaginary spectrum", imaginary, 1e-8),
        ("unit circle", unit_circle, 1e-9),
        ("commutator", commutator, 1e-9 * scale),
    ] {
        if !(r <= tol) {
            return Err(DecomposeError::Invariant { what, residual: r });
        }
    }
    if !k_spec.is_diagonalizable() {
        return Err(DecomposeError::Invariant { what: "diagonalizability of K", residual: f64::NAN });
    }
    g.check_automorphism(&k, 1e-8).map_err(DecomposeError::NotAutomorphism)?;
    g.check_derivation(&a, 1e-8).map_err(DecomposeError::NotDerivation)?;
    Ok(DilationDecomposition { k, a, lambda, residuals })
}

/// How the closure of a cyclic or one-parameter group was sampled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ClosureKind {
    /// `K` has finite order.
    Finite { order: usize },
    /// A product grid over a torus of the given dimension, times a cyclic
    /// factor of order `cycles`.
    Torus { dimension: usize, cycles: usize },
}

#[derive(Debug, Clone)]
pub struct CompactClosure {
    pub kind: ClosureKind,
    pub samples: Vec<RealMatrix>,
}

/// Phase assigned to one upper-half-plane cluster: `Σ_b m_b s_b + j·step`.
struct Phase {
    eigenvalue: Complex64,
    coefficients: Vec<i64>,
    step: f64,
}

const MAX_RELATION: i64 = 12;
const MAX_SAMPLES: usize = 4096;

fn near_integer(x: f64) -> Option<i64> {
    let r = x.round();
    ((x - r).abs() < 1e-9).then_some(r as i64)
}

/// Small rational `p/q` with `q ≤ MAX_RELATION` close to `x`.
fn small_rational(x: f64) -> Option<(i64, i64)> {
    (1..=MAX_RELATION).find_map(|q| near_integer(x * q as f64).map(|p| (p, q)))
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn phase_samples(
    m: &RealMatrix,
    spec: &SpectralData,
    g: &LieAlgebra,
    phases: &[Phase],
    bases: usize,
    cycles: usize,
    per_angle: usize,
) -> Result<Vec<RealMatrix>, DecomposeError> {
    let mut per = per_angle.max(1);
    while bases > 0 && cycles * per.pow(bases as u32) > MAX_SAMPLES && per > 1 {
        per -= 1;
    }
    let total = per.pow(bases as u32);
    let mut out = Vec::with_capacity(total * cycles);
    for j in 0..cycles {
        for idx in 0..total {
            let mut s = vec![0.0; bases];
            let mut r = idx;
            for sb in s.iter_mut() {
                *sb = core::f64::consts::TAU * (r % per) as f64 / per as f64;
                r /= per;
            }
            let phase_of = |z: Complex64| -> Complex64 {
                let (w, conj) = if z.im >= 0.0 { (z, false) } else { (z.conj(), true) };
                let p = phases.iter().min_by(|a, b| (a.eigenvalue - w).norm().total_cmp(&(b.eigenvalue - w).norm()));
                let theta = p.map_or(0.0, |p| {
                    p.coefficients.iter().zip(&s).map(|(c, sb)| *c as f64 * sb).sum::<f64>() + j as f64 * p.step
                });
                let e = Complex64::from_polar(1.0, theta);
                if conj {
                    e.conj()
                } else {
                    e
                }
            };
            let sample = spectral::spectral_map(m, spec, phase_of)?;
            if g.check_automorphism(&sample, 1e-8).is_err() {
                return Err(DecomposeError::ClosureSample(out.len()));
            }
            out.push(sample);
        }
    }
    Ok(out)
}

/// Finite sample of the closure of `{Kⁿ : n ∈ ℤ}` for a compact automorphism.
pub fn compact_closure(g: &LieAlgebra, k: &RealMatrix, per_angle: usize) -> Result<CompactClosure, DecomposeError> {
    g.check_automorphism(k, 1e-8).map_err(DecomposeError::NotAutomorphism)?;
    let n = k.rows();
    let id = RealMatrix::identity(n);
    let mut power = k.clone();
    let mut samples = vec![id.clone()];
    for order in 1..=10_000usize {
        if power.distance_to(&id) <= 1e-6 {
            return Ok(CompactClosure { kind: ClosureKind::Finite { order }, samples });
        }
        samples.push(power.clone());
        power = power.mul(k);
    }
    let spec = spectral::generalized_eigenspaces(k, SpectralTolerance::default())?;
    let tau = core::f64::consts::TAU;
    let mut basis_angles: Vec<f64> = Vec::new();
    let mut phases = Vec::new();
    let mut cycles = 1i64;
    for c in spec.clusters.iter().filter(|c| c.eigenvalue.im >= 0.0) {
        let angle = c.eigenvalue.arg();
        if let Some((p, q)) = small_rational(angle / tau) {
            cycles = cycles / gcd(cycles, q) * q;
            phases.push(Phase { eigenvalue: c.eigenvalue, coefficients: Vec::new(), step: tau * p as f64 / q as f64 });
            continue;
        }
        let relation = basis_angles.iter().enumerate().find_map(|(b, &base)| {
            (-MAX_RELATION..=MAX_RELATION)
                .filter(|m| *m != 0)
                .find(|&m| near_integer((angle - m as f64 * base) / tau).is_some())
                .map(|m| (b, m))
        });
        let (b, m) = relation.unwrap_or_else(|| {
            basis_angles.push(angle);
            (basis_angles.len() - 1, 1)
        });
        let mut coefficients = vec![0; b + 1];
        coefficients[b] = m;
        phases.push(Phase { eigenvalue: c.eigenvalue, coefficients, step: 0.0 });
    }
    for p in &mut phases {
        p.coefficients.resize(basis_angles.len(), 0);
    }
    let cycles = cycles as usize;
    let samples = phase_samples(k, &spec, g, &phases, basis_angles.len(), cycles, per_angle)?;
    Ok(CompactClosure { kind: ClosureKind::Torus { dimension: basis_angles.len(), cycles }, samples })
}

/// Finite sample of the closure of `{exp(tK) : t ∈ ℝ}` for a derivation with
/// imaginary, semisimple spectrum.
pub fn flow_closure(g: &LieAlgebra, k: &RealMatrix, per_angle: usize) -> Result<CompactClosure, DecomposeError> {
    let spec = spectral::generalized_eigenspaces(k, SpectralTolerance::default())?;
    let mut bases: Vec<(f64, i64)> = Vec::new();
    let mut raw: Vec<(Complex64, usize, i64, i64)> = Vec::new();
    for c in spec.clusters.iter().filter(|c| c.eigenvalue.im >= 0.0) {
        let w = c.eigenvalue.im;
        if w <= spec.tolerance {
            continue;
        }
        let found =
            bases.iter().enumerate().find_map(|(b, &(base, _))| small_rational(w / base).map(|(p, q)| (b, p, q)));
        let (b, p, q) = found.unwrap_or_else(|| {
            bases.push((w, 1));
            (bases.len() - 1, 1, 1)
        });
        bases[b].1 = bases[b].1 / gcd(bases[b].1, q) * q;
        raw.push((c.eigenvalue, b, p, q));
    }
    let phases: Vec<Phase> = raw
        .into_iter()
        .map(|(eigenvalue, b, p, q)| {
            let mut coefficients = vec![0; bases.len()];
            coefficients[b] = p * (bases[b].1 / q);
            Phase { eigenvalue, coefficients, step: 0.0 }
        })
        .collect();
    let samples = phase_samples(k, &spec, g, &phases, bases.len(), 1, per_angle)?;
    Ok(CompactClosure { kind: ClosureKind::Torus { dimension: bases.len(), cycles: 1 }, samples })
}

/// The `λ^K`-invariant, `(A + K)`-homogeneous distance obtained by
/// averaging `d` over the closure of `{λ^K}`.
pub fn add_compact_part(
    d: &HomogeneousDistance,
    k: &RealMatrix,
    per_angle: usize,
) -> Result<Averaged<HomogeneousDistance>, DecomposeError> {
    let g = d.group().algebra();
    g.check_derivation(k, 1e-9).map_err(DecomposeError::NotDerivation)?;
    let a = d.generator();
    let scale = a.frobenius_norm().max(k.frobenius_norm()).max(1.0);
    if a.commutator(k).frobenius_norm() > 1e-9 * scale * scale {
        return Err(DecomposeError::Hypothesis("[A, K] != 0"));
    }
    let spec = spectral::generalized_eigenspaces(k, SpectralTolerance::default())?;
    if !spec.is_diagonalizable() {
        return Err(DecomposeError::Hypothesis("K is not diagonalizable"));
    }
    if spec.eigenvalues().any(|z| z.re.abs() > 1e-8 * scale) {
        return Err(DecomposeError::Hypothesis("spectrum of K is not imaginary"));
    }
    let closure = flow_closure(g, k, per_angle)?;
    Ok(Averaged::new(d.clone(), closure.samples))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealifyOptions {
    pub per_angle: usize,
    pub grid: usize,
    /// Pairs used for the dilation and grid-error checks.
    pub check_samples: usize,
    pub bilipschitz_samples: usize,
    pub seed: u64,
    pub radius: f64,
}

impl Default for RealifyOptions {
    fn default() -> Self {
        Self { per_angle: 64, grid: 16, check_samples: 200, bilipschitz_samples: 10_000, seed: 1, radius: 1.0 }
    }
}

pub type RealDistance = SupDistance<Averaged<HomogeneousDistance>>;

#[derive(Debug, Clone)]
pub struct Realification {
    pub decomposition: DilationDecomposition,
    pub closure: ClosureKind,
    pub distance: RealDistance,
    /// `min Re σ(A′)`.
    pub spectrum_min: f64,
    /// `max |d″(δx, δy) − λ d″(x, y)| / max(1, λ d″(x, y))` on samples.
    pub dilation_residual: f64,
    /// Same-sample change of `d″` when the `μ`-grid is doubled, relative.
    pub grid_error: f64,
    pub bilipschitz: Bilipschitz,
}

fn dilation_residual<D: Distance>(
    d: &D,
    delta: &RealMatrix,
    lambda: f64,
    samples: usize,
    seed: u64,
    radius: f64,
) -> Result<f64, MetricError> {
    use rand::Rng;
    let n = d.dimension();
    let mut worst: f64 = 0.0;
    for i in 0..samples {
        let mut rng = sample_rng(seed, i as u64);
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-radius..=radius)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-radius..=radius)).collect();
        let base = lambda * d.distance(&x, &y)?;
        let scaled = d.distance(&delta.mul_vec(&x), &delta.mul_vec(&y))?;
        worst = worst.max((scaled - base).abs() / base.max(1.0));
    }
    Ok(worst)
}

/// Replaces the self-similar structure `(d, δ, λ)` by a distance `d″`
/// homogeneous for a derivation with real spectrum, bi-Lipschitz to `d`.
pub fn realify(
    d: &HomogeneousDistance,
    delta: &RealMatrix,
    lambda: f64,
    options: &RealifyOptions,
) -> Result<Realification, DecomposeError> {
    check_scale(lambda)?;
    let g = d.group().algebra();
    let verdict = classify_automorphism(g, delta, lambda)?;
    if !verdict.answer {
        return Err(DecomposeError::NoDistance(verdict.reasons));
    }
    let given = dilation_residual(d, delta, lambda, options.check_samples, options.seed ^ 0xd1, options.radius)?;
    if given > 1e-6 {
        return Err(DecomposeError::NotDilation { lambda, residual: given });
    }
    let decomposition = decompose_automorphism(g, delta, lambda)?;
    let closure = compact_closure(g, &decomposition.k, options.per_angle)?;
    let averaged = Averaged::new(d.clone(), closure.samples);
    let distance = SupDistance::new(averaged, &decomposition.a, lambda, options.grid)?;
    let spectrum_min = spectral::eigenvalues(&decomposition.a)?.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    let dilation_residual =
        dilation_residual(&distance, delta, lambda, options.check_samples, options.seed ^ 0xd2, options.radius)?;
    let fine = distance.with_grid(2 * options.grid);
    let mut grid_error: f64 = 0.0;
    {
        use rand::Rng;
        let n = d.dimension();
        for i in 0..options.check_samples {
            let mut rng = sample_rng(options.seed ^ 0xd3, i as u64);
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-options.radius..=options.radius)).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-options.radius..=options.radius)).collect();
            let coarse = distance.distance(&x, &y)?;
            let refined = fine.distance(&x, &y)?;
            grid_error = grid_error.max((refined - coarse).abs() / coarse.max(1.0));
        }
    }
    let bilipschitz =
        bilipschitz_constants(d, &distance, delta, lambda, options.bilipschitz_samples, options.seed, options.radius)?;
    Ok(Realification {
        decomposition,
        closure: closure.kind,
        distance,
        spectrum_min,
        dilation_residual,
        grid_error,
        bilipschitz,
    })
}

/// `Rot(θ)` on `ℝ²`.
pub fn rotation(theta: f64) -> RealMatrix {
    let (s, c) = theta.sin_cos();
    Matrix::from_row_slice(2, 2, &[c, -s, s, c])
}
