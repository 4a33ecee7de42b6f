//! Random fields restricted to one irreducible module: samplers, rotation of
//! coefficient vectors, synthesis and analysis.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bases::{basis_rep_matrix, Point, SelfConjBasis, SpaceTag};
use crate::error::{Error, Result};
use crate::group::{GroupElement, SU2Element};
use crate::irrep::{rep_matrix, CMatrix};
use crate::rng::RngStream;
use crate::sphere::QuadratureGrid;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Fourier coefficients of a field on one module, stored by basis position.
#[derive(Debug, Clone)]
pub struct CoefficientVector {
    pub basis: Arc<SelfConjBasis>,
    pub values: Vec<C64>,
}

impl CoefficientVector {
    pub fn zeros(basis: Arc<SelfConjBasis>) -> Self {
        let d = basis.dim();
        Self {
            basis,
            values: vec![ZERO; d],
        }
    }

    pub fn new(basis: Arc<SelfConjBasis>, values: Vec<C64>) -> Result<Self> {
        if values.len() != basis.dim() {
            return Err(Error::DegreeMismatch(basis.dim(), values.len()));
        }
        Ok(Self { basis, values })
    }

    /// Coefficient with torus label `k`.
    pub fn get(&self, label: i64) -> Option<C64> {
        self.basis.position(label).map(|p| self.values[p])
    }

    /// Largest violation of `a_{−k} = conj(a_k)` (and `a_0` real).
    pub fn reality_defect(&self) -> f64 {
        let d = self.values.len();
        (0..d)
            .map(|p| (self.values[d - 1 - p] - self.values[p].conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    fn same_basis(&self, basis: &SelfConjBasis) -> Result<()> {
        if std::ptr::eq(self.basis.as_ref(), basis) || *self.basis == *basis {
            Ok(())
        } else {
            Err(Error::SpaceMismatch("coefficients belong to a different basis".into()))
        }
    }
}

/// `X + iY` with `X, Y ~ N(0, variance/2)` independent.
pub fn complex_gaussian(rng: &mut RngStream, variance: f64) -> Result<C64> {
    if !(variance >= 0.0) {
        return Err(Error::InvalidArgument(format!("variance {variance} must be >= 0")));
    }
    let s = (variance / 2.0).sqrt();
    Ok(C64::new(s * rng.normal(), s * rng.normal()))
}

/// Marginal law of each independent coefficient `a_k`, `k ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "kebab-case")]
pub enum Marginal {
    /// Complex Gaussian with `E|a_k|² = c`; `a_0 ~ N(0, c)`.
    Gaussian { c: f64 },
    /// Uniform on the disc of radius `r`; `a_0` uniform on `[−r, r]`.
    UniformDisc { r: f64 },
    /// `ρ e^{iθ}` with uniform phase; `a_0 = ±ρ`.
    TwoPoint { rho: f64 },
}

impl Marginal {
    fn validate(&self) -> Result<()> {
        let (name, v) = match *self {
            Marginal::Gaussian { c } => ("c", c),
            Marginal::UniformDisc { r } => ("r", r),
            Marginal::TwoPoint { rho } => ("rho", rho),
        };
        if v >= 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("{name} = {v} must be finite and >= 0")))
        }
    }

    fn draw_complex(&self, rng: &mut RngStream) -> C64 {
        match *self {
            Marginal::Gaussian { c } => {
                let s = (c / 2.0).sqrt();
                C64::new(s * rng.normal(), s * rng.normal())
            }
            Marginal::UniformDisc { r } => {
                let rad = r * rng.uniform().sqrt();
                C64::from_polar(rad, 2.0 * PI * rng.uniform())
            }
            Marginal::TwoPoint { rho } => C64::from_polar(rho, 2.0 * PI * rng.uniform()),
        }
    }

    fn draw_real(&self, rng: &mut RngStream) -> f64 {
        match *self {
            Marginal::Gaussian { c } => c.sqrt() * rng.normal(),
            Marginal::UniformDisc { r } => r * (2.0 * rng.uniform() - 1.0),
            Marginal::TwoPoint { rho } => {
                if rng.bernoulli_half() {
                    rho
                } else {
                    -rho
                }
            }
        }
    }
}

/// Independent coefficients with `a_{−k} = conj(a_k)`, so the field is real.
pub fn sample_independent(
    basis: &Arc<SelfConjBasis>,
    marginal: Marginal,
    rng: &mut RngStream,
) -> Result<CoefficientVector> {
    marginal.validate()?;
    let d = basis.dim();
    let mut values = vec![ZERO; d];
    for p in 0..d / 2 {
        let z = marginal.draw_complex(rng);
        values[p] = z;
        values[d - 1 - p] = z.conj();
    }
    if d % 2 == 1 {
        values[d / 2] = C64::new(marginal.draw_real(rng), 0.0);
    }
    Ok(CoefficientVector {
        basis: Arc::clone(basis),
        values,
    })
}

/// The invariant Gaussian field: `a_0 ~ N(0, c)`, `a_k` complex Gaussian with
/// `E|a_k|² = c` for `k > 0`, `a_{−k} = conj(a_k)`.
pub fn sample_invariant_gaussian(
    basis: &Arc<SelfConjBasis>,
    c: f64,
    rng: &mut RngStream,
) -> Result<CoefficientVector> {
    if !(c >= 0.0) {
        return Err(Error::InvalidArgument(format!("c = {c} must be >= 0")));
    }
    sample_independent(basis, Marginal::Gaussian { c }, rng)
}

/// `n` draws, draw `i` from the child stream `rng.split(i)`; order and values
/// do not depend on the thread count.
pub fn sample_batch<T, F>(n: usize, rng: &RngStream, draw: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut RngStream) -> Result<T> + Sync,
{
    (0..n)
        .into_par_iter()
        .map(|i| draw(&mut rng.split(i as u64)))
        .collect()
}

/// Coefficients of the rotated field: `a^g = D(g⁻¹) a`.
pub fn rotate_coeffs(
    basis: &SelfConjBasis,
    g: &GroupElement,
    a: &CoefficientVector,
) -> Result<CoefficientVector> {
    a.same_basis(basis)?;
    let d = basis_rep_matrix(basis, &g.inverse())?;
    Ok(CoefficientVector {
        basis: Arc::clone(&a.basis),
        values: apply(&d, &a.values),
    })
}

pub(crate) fn apply(m: &CMatrix, v: &[C64]) -> Vec<C64> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| m[(r, c)] * v[c]).sum())
        .collect()
}

/// Coefficient matrix `B_ij = α_i Z_j` of the invariant field
/// `T(g) = √d tr(B D(g))` on SU(2).
#[derive(Debug, Clone)]
pub struct BijouxSample {
    pub alpha: Vec<C64>,
    pub b: CMatrix,
}

impl BijouxSample {
    pub fn ell(&self) -> usize {
        self.alpha.len() - 1
    }

    /// Numerical rank of `B`.
    pub fn rank(&self, tol: f64) -> usize {
        self.b.clone().svd(false, false).rank(tol)
    }
}

pub fn bijoux_sample(ell: usize, alpha: &[C64], rng: &mut RngStream) -> Result<BijouxSample> {
    let d = ell + 1;
    if d < 2 {
        return Err(Error::InvalidArgument("bijoux field needs dimension >= 2".into()));
    }
    if alpha.len() != d {
        return Err(Error::DegreeMismatch(d, alpha.len()));
    }
    let z: Vec<C64> = (0..d)
        .map(|_| complex_gaussian(rng, 1.0))
        .collect::<Result<_>>()?;
    let b = CMatrix::from_fn(d, d, |i, j| alpha[i] * z[j]);
    Ok(BijouxSample {
        alpha: alpha.to_vec(),
        b,
    })
}

/// `√d · tr(B · D(g))`.
pub fn bijoux_eval(sample: &BijouxSample, g: &SU2Element) -> C64 {
    let d = sample.alpha.len();
    let rep = rep_matrix(sample.ell(), g);
    let prod = &sample.b * &rep.entries;
    prod.trace() * (d as f64).sqrt()
}

/// `Σ_p a_p v_p(x)`.
pub fn synthesize(basis: &SelfConjBasis, a: &CoefficientVector, point: &Point) -> Result<C64> {
    a.same_basis(basis)?;
    let d = basis.dim();
    let reference: Vec<C64> = (0..d)
        .map(|r| basis.space.reference_function(r, point))
        .collect::<Result<_>>()?;
    let mut total = ZERO;
    for (p, ap) in a.values.iter().enumerate() {
        if *ap == ZERO {
            continue;
        }
        let v: C64 = (0..d).map(|r| basis.change[(r, p)] * reference[r]).sum();
        total += ap * v;
    }
    Ok(total)
}

/// `a_p = ∫ T conj(v_p) dΩ` by product quadrature on a grid of band limit
/// `lmax`. Exact when `T` has degree at most `lmax` and `lmax` is at least the
/// module degree.
pub fn project_s2<F>(basis: &Arc<SelfConjBasis>, field: F, lmax: usize) -> Result<CoefficientVector>
where
    F: Fn(f64, f64) -> C64,
{
    let SpaceTag::S2 { ell } = basis.space else {
        return Err(Error::SpaceMismatch("quadrature analysis is only available on S2".into()));
    };
    let lmax = lmax.max(ell / 2);
    let grid = QuadratureGrid::new(lmax);
    let d = basis.dim();
    let mut values = vec![ZERO; d];
    for (theta, w) in grid.thetas.iter().zip(&grid.weights) {
        for &phi in &grid.phis {
            let pt = Point::S2 { theta: *theta, phi };
            let t = field(*theta, phi);
            if t == ZERO {
                continue;
            }
            let reference: Vec<C64> = (0..d)
                .map(|r| basis.space.reference_function(r, &pt))
                .collect::<Result<_>>()?;
            for (p, out) in values.iter_mut().enumerate() {
                let v: C64 = (0..d).map(|r| basis.change[(r, p)] * reference[r]).sum();
                *out += t * v.conj() * *w;
            }
        }
    }
    Ok(CoefficientVector {
        basis: Arc::clone(basis),
        values,
    })
}

/// Monte-Carlo estimate of `a_p = E_x[T(x) conj(v_p(x))]` over Haar-random
/// points of S³, with standard errors.
pub fn project_s3_monte_carlo<F>(
    basis: &Arc<SelfConjBasis>,
    field: F,
    n: usize,
    rng: &RngStream,
) -> Result<(CoefficientVector, Vec<f64>)>
where
    F: Fn(&SU2Element) -> C64 + Sync,
{
    if !matches!(basis.space, SpaceTag::S3 { .. }) {
        return Err(Error::SpaceMismatch("Monte-Carlo analysis here is for S3".into()));
    }
    if n < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: n });
    }
    let d = basis.dim();
    let draws: Vec<Vec<C64>> = sample_batch(n, rng, |r| {
        let x = SU2Element::haar(r);
        let pt = Point::S3(x);
        let t = field(&x);
        (0..d).map(|p| Ok(t * basis.eval(p, &pt)?.conj())).collect()
    })?;
    let mut mean = vec![ZERO; d];
    for row in &draws {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let se = (0..d)
        .map(|p| {
            let var = draws.iter().map(|r| (r[p] - mean[p]).norm_sqr()).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        })
        .collect();
    Ok((
        CoefficientVector {
            basis: Arc::clone(basis),
            values: mean,
        },
        se,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::{random_selfconj_basis, torus_adapted_selfconj_basis};
    use crate::sphere::eval_s2;

    fn basis(ell: usize) -> Arc<SelfConjBasis> {
        Arc::new(torus_adapted_selfconj_basis(SpaceTag::S2 { ell }).unwrap())
    }

    fn mean_and_se(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, (v / n).sqrt())
    }

    #[test]
    fn complex_gaussian_moments() {
        let mut rng = RngStream::new(1, 0);
        assert_eq!(complex_gaussian(&mut rng, 0.0).unwrap(), ZERO);
        assert!(complex_gaussian(&mut rng, -1.0).is_err());
        let n = 100_000;
        let zs: Vec<C64> = (0..n).map(|_| complex_gaussian(&mut rng, 1.0).unwrap()).collect();
        let (m, se) = mean_and_se(&zs.iter().map(|z| z.norm_sqr()).collect::<Vec<_>>());
        assert!((m - 1.0).abs() < 3.0 * se);
        let sq: C64 = zs.iter().map(|z| z * z).sum::<C64>() / n as f64;
        assert!(sq.norm() < 3.0 / (n as f64).sqrt());
    }

    #[test]
    fn invariant_gaussian_moments() {
        let b = basis(4);
        let mut rng = RngStream::new(2, 0);
        let zero = sample_invariant_gaussian(&b, 0.0, &mut rng).unwrap();
        assert!(zero.values.iter().all(|z| *z == ZERO));
        assert!(sample_invariant_gaussian(&b, -0.5, &mut rng).is_err());
        let draws = sample_batch(100_000, &rng, |r| sample_invariant_gaussian(&b, 1.0, r)).unwrap();
        for p in 0..5 {
            let xs: Vec<f64> = draws.iter().map(|a| a.values[p].norm_sqr()).collect();
            let (m, se) = mean_and_se(&xs);
            assert!((m - 1.0).abs() < 3.0 * se, "p={p} m={m}");
        }
        for a in draws.iter().take(100) {
            assert!(a.reality_defect() < 1e-14);
            assert_eq!(a.values[2].im, 0.0);
        }
    }

    #[test]
    fn independent_marginals() {
        let b = basis(4);
        let rng = RngStream::new(3, 0);
        let disc = sample_batch(100_000, &rng, |r| sample_independent(&b, Marginal::UniformDisc { r: 2.0 }, r)).unwrap();
        let xs: Vec<f64> = disc.iter().map(|a| a.values[0].norm_sqr()).collect();
        let (m, se) = mean_and_se(&xs);
        assert!((m - 2.0).abs() < 3.0 * se);
        assert!(disc.iter().all(|a| a.values.iter().all(|z| z.norm() <= 2.0)));
        let two = sample_batch(1000, &rng, |r| sample_independent(&b, Marginal::TwoPoint { rho: 0.5 }, r)).unwrap();
        for a in &two {
            for z in &a.values {
                assert!((z.norm() - 0.5).abs() < 1e-15);
            }
        }
        assert!(sample_independent(&b, Marginal::UniformDisc { r: -1.0 }, &mut rng.split(9)).is_err());
        // the Gaussian marginal is the same construction as the invariant sampler
        let x = sample_independent(&b, Marginal::Gaussian { c: 1.0 }, &mut rng.split(5)).unwrap();
        let y = sample_invariant_gaussian(&b, 1.0, &mut rng.split(5)).unwrap();
        assert_eq!(x.values, y.values);
    }

    #[test]
    fn rotation_properties() {
        let b = basis(6);
        let mut rng = RngStream::new(4, 0);
        let a = sample_invariant_gaussian(&b, 1.0, &mut rng).unwrap();
        let id = b.space.identity();
        let same = rotate_coeffs(&b, &id, &a).unwrap();
        for (x, y) in same.values.iter().zip(&a.values) {
            assert!((x - y).norm() < 1e-14);
        }
        for _ in 0..50 {
            let g = b.space.haar(&mut rng);
            let h = b.space.haar(&mut rng);
            let gh = g.compose(&h).unwrap();
            let lhs = rotate_coeffs(&b, &gh, &a).unwrap();
            let rhs = rotate_coeffs(&b, &h, &rotate_coeffs(&b, &g, &a).unwrap()).unwrap();
            let err = lhs.values.iter().zip(&rhs.values).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            assert!(err < 1e-12);
            assert!((lhs.norm() - a.norm()).abs() < 1e-12);
            assert!(lhs.reality_defect() < 1e-12);
        }
        let other = Arc::new(random_selfconj_basis(&b, &mut rng).unwrap());
        assert!(rotate_coeffs(&other, &id, &a).is_err());
    }

    #[test]
    fn rotation_matches_rotated_field() {
        // x ↦ T(g⁻¹x) has coefficients D(g)a
        let b = basis(4);
        let mut rng = RngStream::new(5, 0);
        let a = sample_invariant_gaussian(&b, 1.0, &mut rng).unwrap();
        let g = b.space.haar(&mut rng);
        let rotated = rotate_coeffs(&b, &g.inverse(), &a).unwrap();
        for _ in 0..20 {
            let pt = Point::S2 {
                theta: PI * rng.uniform(),
                phi: 2.0 * PI * rng.uniform(),
            };
            let moved = b.space.act_inverse_on_point(&g, &pt).unwrap();
            let lhs = synthesize(&b, &a, &moved).unwrap();
            let rhs = synthesize(&b, &rotated, &pt).unwrap();
            assert!((lhs - rhs).norm() < 1e-11);
        }
    }

    #[test]
    fn bijoux_examples() {
        let mut rng = RngStream::new(6, 0);
        let s = bijoux_sample(2, &[ZERO; 3], &mut rng).unwrap();
        assert!(s.b.iter().all(|z| *z == ZERO));
        assert_eq!(bijoux_eval(&s, &SU2Element::haar(&mut rng)), ZERO);
        assert!(bijoux_sample(0, &[C64::new(1.0, 0.0)], &mut rng).is_err());
        assert!(bijoux_sample(2, &[ZERO; 2], &mut rng).is_err());

        let alpha = [C64::new(0.6, 0.0), C64::new(0.0, 0.8), C64::new(0.0, 0.0)];
        let mut z_rng = RngStream::new(6, 1);
        let s = bijoux_sample(2, &alpha, &mut z_rng).unwrap();
        assert!(s.rank(1e-12) <= 1);
        let mut replay = RngStream::new(6, 1);
        let z: Vec<C64> = (0..3).map(|_| complex_gaussian(&mut replay, 1.0).unwrap()).collect();
        let want: C64 = alpha.iter().zip(&z).map(|(a, z)| a * z).sum::<C64>() * 3f64.sqrt();
        assert!((bijoux_eval(&s, &SU2Element::identity()) - want).norm() < 1e-14);
    }

    #[test]
    fn bijoux_second_moment() {
        let alpha = [C64::new(1.0, 0.0), C64::new(0.0, 1.0)].map(|z| z / 2f64.sqrt());
        let rng = RngStream::new(7, 0);
        let n = 100_000;
        let draws = sample_batch(n, &rng, |r| bijoux_sample(1, &alpha, r)).unwrap();
        for i in 0..2 {
            for k in 0..2 {
                let xs: Vec<C64> = draws.iter().map(|s| (&s.b * s.b.adjoint())[(i, k)]).collect();
                let want = alpha[i] * alpha[k].conj() * 2.0;
                let (mr, sr) = mean_and_se(&xs.iter().map(|z| z.re).collect::<Vec<_>>());
                let (mi, si) = mean_and_se(&xs.iter().map(|z| z.im).collect::<Vec<_>>());
                assert!((mr - want.re).abs() < 3.0 * sr.max(1e-15));
                assert!((mi - want.im).abs() < 3.0 * si.max(1e-15));
            }
        }
    }

    #[test]
    fn synthesis_examples() {
        let b = basis(4);
        let mut rng = RngStream::new(8, 0);
        let pt = Point::S2 { theta: 0.7, phi: 1.9 };
        assert_eq!(synthesize(&b, &CoefficientVector::zeros(Arc::clone(&b)), &pt).unwrap(), ZERO);
        for p in 0..5 {
            let mut a = CoefficientVector::zeros(Arc::clone(&b));
            a.values[p] = C64::new(1.0, 0.0);
            assert!((synthesize(&b, &a, &pt).unwrap() - b.eval(p, &pt).unwrap()).norm() < 1e-14);
        }
        let a = sample_invariant_gaussian(&b, 1.0, &mut rng).unwrap();
        for _ in 0..100 {
            let pt = Point::S2 {
                theta: PI * rng.uniform(),
                phi: 2.0 * PI * rng.uniform(),
            };
            assert!(synthesize(&b, &a, &pt).unwrap().im.abs() < 1e-11);
        }
        let s3 = Arc::new(torus_adapted_selfconj_basis(SpaceTag::S3 { ell: 2 }).unwrap());
        let a3 = sample_invariant_gaussian(&s3, 1.0, &mut rng).unwrap();
        for _ in 0..100 {
            let pt = Point::S3(SU2Element::haar(&mut rng));
            assert!(synthesize(&s3, &a3, &pt).unwrap().im.abs() < 1e-11);
        }
        assert!(synthesize(&b, &a, &Point::S3(SU2Element::identity())).is_err());
    }

    #[test]
    fn projection_round_trip() {
        let mut rng = RngStream::new(9, 0);
        for ell in [2usize, 4, 8, 12, 16] {
            let b = basis(ell);
            let b = Arc::new(random_selfconj_basis(&b, &mut rng).unwrap());
            let a = sample_invariant_gaussian(&b, 1.0, &mut rng).unwrap();
            let field = |t: f64, p: f64| synthesize(&b, &a, &Point::S2 { theta: t, phi: p }).unwrap();
            let back = project_s2(&b, field, ell / 2).unwrap();
            let err = back.values.iter().zip(&a.values).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            assert!(err < 1e-10, "ell={ell} err={err}");
        }
        // a degree-1 harmonic has no component in the degree-2 module
        let b = basis(4);
        let other = project_s2(&b, |t, p| eval_s2(1, 1, t, p).unwrap(), 2).unwrap();
        assert!(other.norm() < 1e-12);
    }

    #[test]
    fn s3_monte_carlo_projection() {
        let b = Arc::new(torus_adapted_selfconj_basis(SpaceTag::S3 { ell: 1 }).unwrap());
        let mut rng = RngStream::new(10, 0);
        let a = sample_invariant_gaussian(&b, 1.0, &mut rng).unwrap();
        let field = |x: &SU2Element| synthesize(&b, &a, &Point::S3(*x)).unwrap();
        let (est, se) = project_s3_monte_carlo(&b, field, 20_000, &rng).unwrap();
        for p in 0..4 {
            assert!((est.values[p] - a.values[p]).norm() < 4.0 * se[p], "p={p}");
        }
    }
}
