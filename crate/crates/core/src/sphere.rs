//! Spherical harmonics on S² and an exact product quadrature for
//! band-limited fields.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Normalized associated Legendre values `P̄_l^m(x)` for `l = m..=lmax`,
/// Condon–Shortley phase included, so that `Y_lm = P̄_l^m(cos θ) e^{imφ}`.
fn legendre_column(lmax: usize, m: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; lmax + 1];
    if m > lmax {
        return out;
    }
    let sin2 = (1.0 - x * x).max(0.0);
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for k in 1..=m {
        pmm *= -((2 * k + 1) as f64 / (2 * k) as f64 * sin2).sqrt();
    }
    out[m] = pmm;
    if m == lmax {
        return out;
    }
    out[m + 1] = x * ((2 * m + 3) as f64).sqrt() * pmm;
    let mf = m as f64;
    for l in (m + 2)..=lmax {
        let lf = l as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
        out[l] = a * (x * out[l - 1] - b * out[l - 2]);
    }
    out
}

/// `Y_{L,m}(θ, φ)` with the Condon–Shortley phase.
pub fn eval_s2(l: usize, m: i64, theta: f64, phi: f64) -> Result<C64> {
    if m.unsigned_abs() as usize > l {
        return Err(Error::IndexOutOfRange(format!("|m|={} > L={l}", m.abs())));
    }
    let am = m.unsigned_abs() as usize;
    let p = legendre_column(l, am, theta.cos())[l];
    let y = C64::from_polar(p, am as f64 * phi);
    if m >= 0 {
        Ok(y)
    } else if am % 2 == 0 {
        Ok(y.conj())
    } else {
        Ok(-y.conj())
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            if n == 1 {
                p1 = x;
                p0 = 1.0;
            } else {
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Product grid: Gauss–Legendre in `cos θ` times uniform `φ`.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    pub thetas: Vec<f64>,
    pub phis: Vec<f64>,
    /// Weight of every node in row `i` (θ index).
    pub weights: Vec<f64>,
}

impl QuadratureGrid {
    /// `L + 1` Legendre nodes and `2L + 2` longitudes: exact for products of
    /// two spherical polynomials of degree `≤ L`.
    pub fn new(l: usize) -> Self {
        let (x, w) = gauss_legendre(l + 1);
        let nphi = 2 * l + 2;
        let dphi = 2.0 * PI / nphi as f64;
        Self {
            thetas: x.iter().map(|v| v.acos()).collect(),
            phis: (0..nphi).map(|k| k as f64 * dphi).collect(),
            weights: w.iter().map(|v| v * dphi).collect(),
        }
    }

    /// `∫ f dΩ` over the unit sphere.
    pub fn integrate<F: Fn(f64, f64) -> C64>(&self, f: F) -> C64 {
        let mut total = C64::new(0.0, 0.0);
        for (theta, w) in self.thetas.iter().zip(&self.weights) {
            let row: C64 = self.phis.iter().map(|&phi| f(*theta, phi)).sum();
            total += row * *w;
        }
        total
    }
}

/// Coefficients in the spherical-harmonic basis, degree by degree:
/// `values[l][m + l]` multiplies `Y_{l,m}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalCoefficients {
    pub lmax: usize,
    pub values: Vec<Vec<C64>>,
}

impl SphericalCoefficients {
    pub fn zeros(lmax: usize) -> Self {
        Self {
            lmax,
            values: (0..=lmax).map(|l| vec![C64::new(0.0, 0.0); 2 * l + 1]).collect(),
        }
    }

    pub fn get(&self, l: usize, m: i64) -> C64 {
        self.values[l][(m + l as i64) as usize]
    }

    pub fn set(&mut self, l: usize, m: i64, v: C64) {
        self.values[l][(m + l as i64) as usize] = v;
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .flatten()
            .zip(other.values.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `Σ a_{lm} Y_{lm}(θ, φ)`.
    pub fn synthesize(&self, theta: f64, phi: f64) -> C64 {
        let x = theta.cos();
        let mut total = C64::new(0.0, 0.0);
        for m in 0..=self.lmax {
            let col = legendre_column(self.lmax, m, x);
            let e = C64::from_polar(1.0, m as f64 * phi);
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            for (l, p) in col.iter().enumerate().skip(m) {
                let y = e * *p;
                total += self.get(l, m as i64) * y;
                if m > 0 {
                    total += self.get(l, -(m as i64)) * y.conj() * sign;
                }
            }
        }
        total
    }
}

/// Coefficients `a_{lm} = ∫ T conj(Y_{lm}) dΩ` for `l ≤ lmax` by product
/// quadrature. Exact when `field` is band-limited to degree `≤ lmax`.
pub fn analyze_s2<F: Fn(f64, f64) -> C64>(field: F, lmax: usize) -> SphericalCoefficients {
    let grid = QuadratureGrid::new(lmax);
    let mut out = SphericalCoefficients::zeros(lmax);
    for (theta, w) in grid.thetas.iter().zip(&grid.weights) {
        let x = theta.cos();
        let samples: Vec<C64> = grid.phis.iter().map(|&phi| field(*theta, phi)).collect();
        for m in 0..=lmax as i64 {
            // Fourier component Σ_k f(φ_k) e^{∓imφ_k}
            let (mut fp, mut fm) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
            for (phi, f) in grid.phis.iter().zip(&samples) {
                let e = C64::from_polar(1.0, m as f64 * phi);
                fp += f * e.conj();
                fm += f * e;
            }
            let col = legendre_column(lmax, m as usize, x);
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            for (l, p) in col.iter().enumerate().skip(m as usize) {
                let cur = out.get(l, m);
                out.set(l, m, cur + fp * *p * *w);
                if m > 0 {
                    // conj(Y_{l,-m}) = (-1)^m P̄ e^{imφ}
                    let cur = out.get(l, -m);
                    out.set(l, -m, cur + fm * *p * *w * sign);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn closed_forms() {
        let y00 = eval_s2(0, 0, 0.3, 1.0).unwrap();
        assert!((y00.re - 1.0 / (4.0 * PI).sqrt()).abs() < 1e-15);
        for &theta in &[0.0, 0.4, 1.3, PI] {
            let y10 = eval_s2(1, 0, theta, 0.7).unwrap();
            assert!((y10.re - (3.0 / (4.0 * PI)).sqrt() * theta.cos()).abs() < 1e-14);
            let y11 = eval_s2(1, 1, theta, 0.7).unwrap();
            let want = C64::from_polar(-(3.0 / (8.0 * PI)).sqrt() * theta.sin(), 0.7);
            assert!((y11 - want).norm() < 1e-14);
            let y22 = eval_s2(2, 2, theta, 0.7).unwrap();
            let want = C64::from_polar(0.25 * (15.0 / (2.0 * PI)).sqrt() * theta.sin().powi(2), 1.4);
            assert!((y22 - want).norm() < 1e-14);
        }
        assert!(eval_s2(2, 3, 0.1, 0.1).is_err());
    }

    #[test]
    fn conjugation_symmetry() {
        for l in 0..7usize {
            for m in 0..=l as i64 {
                let y = eval_s2(l, m, 0.9, 2.1).unwrap();
                let ym = eval_s2(l, -m, 0.9, 2.1).unwrap();
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                assert!((ym - y.conj() * sign).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn gauss_legendre_exactness() {
        for n in 1..12 {
            let (x, w) = gauss_legendre(n);
            for deg in 0..(2 * n) {
                let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let want = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((got - want).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn quadrature_normalization() {
        let grid = QuadratureGrid::new(4);
        let v = grid.integrate(|t, p| {
            let y = eval_s2(2, 1, t, p).unwrap();
            y * y.conj()
        });
        assert!((v - 1.0).norm() < 1e-12);
        let v = grid.integrate(|t, p| eval_s2(1, 0, t, p).unwrap().powi(2));
        assert!((v - 1.0).norm() < 1e-12);
    }

    #[test]
    fn analysis_examples() {
        let a = analyze_s2(|t, p| eval_s2(2, 1, t, p).unwrap(), 3);
        let mut want = SphericalCoefficients::zeros(3);
        want.set(2, 1, C64::new(1.0, 0.0));
        assert!(a.max_abs_diff(&want) < 1e-10);

        let a = analyze_s2(|_, _| C64::new(1.0, 0.0), 2);
        let mut want = SphericalCoefficients::zeros(2);
        want.set(0, 0, C64::new((4.0 * PI).sqrt(), 0.0));
        assert!(a.max_abs_diff(&want) < 1e-10);
    }

    #[test]
    fn round_trip() {
        let mut rng = RngStream::new(8, 0);
        for lmax in 0..=8 {
            let mut coeffs = SphericalCoefficients::zeros(lmax);
            for l in 0..=lmax {
                for m in -(l as i64)..=l as i64 {
                    coeffs.set(l, m, C64::new(rng.normal(), rng.normal()));
                }
            }
            let back = analyze_s2(|t, p| coeffs.synthesize(t, p), lmax);
            assert!(back.max_abs_diff(&coeffs) < 1e-10, "lmax={lmax}");
        }
    }
}
