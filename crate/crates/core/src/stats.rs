//! Monte-Carlo estimators and hypothesis tests for coefficient distributions.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::bases::{basis_rep_matrix, SelfConjBasis};
use crate::error::{Error, Result};
use crate::fields::{apply, sample_batch, CoefficientVector};
use crate::group::GroupElement;
use crate::irrep::CMatrix;
use crate::rng::RngStream;

pub const ALPHAS: [f64; 3] = [0.05, 0.01, 0.001];
/// Below this many samples a covariance entry is reported without a
/// significance claim.
pub const MIN_SIGNIFICANCE_N: usize = 100;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestReport {
    pub test: String,
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
    #[serde(rename = "alpha_decisions")]
    pub reject_at: BTreeMap<String, bool>,
    pub seed: Option<u64>,
}

impl TestReport {
    pub fn new(test: &str, statistic: f64, p_value: f64, n: usize) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        let reject_at = ALPHAS
            .iter()
            .map(|a| (a.to_string(), p_value < *a))
            .collect();
        Self {
            test: test.to_string(),
            statistic,
            p_value,
            n,
            reject_at,
            seed: None,
        }
    }

    pub fn rejects(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CovarianceEstimate {
    pub c_hat: CMatrix,
    pub std_err: nalgebra::DMatrix<f64>,
    pub n: usize,
}

/// Centered second moments `C[i][k] = mean((x_i − x̄_i) conj(x_k − x̄_k))` with
/// plug-in standard errors.
pub fn estimate_cov(samples: &[Vec<C64>]) -> Result<CovarianceEstimate> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: n });
    }
    let d = samples[0].len();
    if samples.iter().any(|s| s.len() != d) {
        return Err(Error::InvalidArgument("samples have unequal lengths".into()));
    }
    let nf = n as f64;
    let mut mean = vec![C64::new(0.0, 0.0); d];
    for s in samples {
        for (m, x) in mean.iter_mut().zip(s) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= nf);
    let centered: Vec<Vec<C64>> = samples
        .iter()
        .map(|s| s.iter().zip(&mean).map(|(x, m)| x - m).collect())
        .collect();
    let mut c = CMatrix::zeros(d, d);
    for s in &centered {
        for i in 0..d {
            for k in i..d {
                c[(i, k)] += s[i] * s[k].conj();
            }
        }
    }
    for i in 0..d {
        for k in i..d {
            c[(i, k)] /= nf;
            c[(k, i)] = c[(i, k)].conj();
        }
        c[(i, i)].im = 0.0;
    }
    let mut var = nalgebra::DMatrix::<f64>::zeros(d, d);
    for s in &centered {
        for i in 0..d {
            for k in i..d {
                var[(i, k)] += (s[i] * s[k].conj() - c[(i, k)]).norm_sqr();
            }
        }
    }
    let mut se = nalgebra::DMatrix::<f64>::zeros(d, d);
    for i in 0..d {
        for k in i..d {
            se[(i, k)] = (var[(i, k)] / (nf - 1.0) / nf).sqrt();
            se[(k, i)] = se[(i, k)];
        }
    }
    Ok(CovarianceEstimate {
        c_hat: c,
        std_err: se,
        n,
    })
}

/// `|x − target| / se`, with `0/0 = 0`.
fn z_score(dev: f64, se: f64) -> f64 {
    if dev == 0.0 {
        0.0
    } else if se == 0.0 {
        f64::INFINITY
    } else {
        dev / se
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ColumnStructureReport {
    /// Largest `|Cov(T̂_ij, T̂_kl)| / se` over `j ≠ l`.
    pub max_cross_column_z: f64,
    /// Largest deviation of a within-column covariance from the pooled one,
    /// in standard errors.
    pub max_column_deviation_z: f64,
    /// Within-column covariance averaged over columns.
    pub pooled: CovarianceEstimate,
    pub pass: bool,
    pub threshold: f64,
}

/// Checks that entries in different columns are uncorrelated and that the
/// within-column covariance does not depend on the column.
pub fn check_column_structure(matrices: &[CMatrix]) -> Result<ColumnStructureReport> {
    let n = matrices.len();
    if n < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: n });
    }
    let d = matrices[0].nrows();
    let cols = matrices[0].ncols();
    // flat index i + d·j for entry (i, j)
    let flat: Vec<Vec<C64>> = matrices.iter().map(|m| m.iter().copied().collect()).collect();
    let full = estimate_cov(&flat)?;
    let at = |i: usize, j: usize| i + d * j;

    let mut pooled = CMatrix::zeros(d, d);
    let mut pooled_var = nalgebra::DMatrix::<f64>::zeros(d, d);
    for j in 0..cols {
        for i in 0..d {
            for k in 0..d {
                pooled[(i, k)] += full.c_hat[(at(i, j), at(k, j))];
                pooled_var[(i, k)] += full.std_err[(at(i, j), at(k, j))].powi(2);
            }
        }
    }
    let cf = cols as f64;
    pooled /= C64::new(cf, 0.0);
    let pooled_se = pooled_var.map(|v| v.sqrt() / cf);

    let mut cross: f64 = 0.0;
    let mut deviation: f64 = 0.0;
    for j in 0..cols {
        for l in 0..cols {
            for i in 0..d {
                for k in 0..d {
                    let (a, b) = (at(i, j), at(k, l));
                    if j != l {
                        cross = cross.max(z_score(full.c_hat[(a, b)].norm(), full.std_err[(a, b)]));
                    } else {
                        let dev = (full.c_hat[(a, b)] - pooled[(i, k)]).norm();
                        let se = (full.std_err[(a, b)].powi(2) + pooled_se[(i, k)].powi(2)).sqrt();
                        deviation = deviation.max(z_score(dev, se));
                    }
                }
            }
        }
    }
    let threshold = 4.0;
    Ok(ColumnStructureReport {
        max_cross_column_z: cross,
        max_column_deviation_z: deviation,
        pooled: CovarianceEstimate {
            c_hat: pooled,
            std_err: pooled_se,
            n,
        },
        pass: cross < threshold && deviation < threshold,
        threshold,
    })
}

/// Asymptotic Kolmogorov distribution tail `Q(λ) = 2 Σ (−1)^{k−1} e^{−2k²λ²}`.
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-17 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov–Smirnov test with the asymptotic p-value.
pub fn ks_two_sample(x: &[f64], y: &[f64]) -> Result<TestReport> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::InsufficientSamples {
            needed: 1,
            got: x.len().min(y.len()),
        });
    }
    let mut xs = x.to_vec();
    let mut ys = y.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (n, m) = (xs.len(), ys.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let v = xs[i].min(ys[j]);
        while i < n && xs[i] <= v {
            i += 1;
        }
        while j < m && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    let sq = ne.sqrt();
    let p = if d == 0.0 {
        1.0
    } else {
        kolmogorov_q((sq + 0.12 + 0.11 / sq) * d)
    };
    Ok(TestReport::new("ks_two_sample", d, p, n.min(m)))
}

/// Anderson–Darling test of normality with estimated mean and variance.
pub fn gaussianity_test(samples: &[f64]) -> Result<TestReport> {
    let n = samples.len();
    if n < 100 {
        return Err(Error::InsufficientSamples { needed: 100, got: n });
    }
    let nf = n as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    if !(var > 0.0) || var.sqrt() <= 1e-300 {
        return Err(Error::DegenerateVariance);
    }
    let sd = var.sqrt();
    let mut z: Vec<f64> = samples.iter().map(|x| (x - mean) / sd).collect();
    z.sort_by(f64::total_cmp);
    let std_normal = Normal::new(0.0, 1.0).expect("valid normal");
    let tiny = 1e-300;
    let mut s = 0.0;
    for i in 0..n {
        let lo = std_normal.cdf(z[i]).max(tiny).ln();
        let hi = std_normal.sf(z[n - 1 - i]).max(tiny).ln();
        s += (2 * i + 1) as f64 * (lo + hi);
    }
    let a2 = -nf - s / nf;
    let a = a2 * (1.0 + 0.75 / nf + 2.25 / (nf * nf));
    let p = if a >= 0.6 {
        (1.2937 - 5.709 * a + 0.0186 * a * a).exp()
    } else if a >= 0.34 {
        (0.9177 - 4.279 * a - 1.38 * a * a).exp()
    } else if a >= 0.2 {
        1.0 - (-8.318 + 42.796 * a - 59.938 * a * a).exp()
    } else {
        1.0 - (-13.436 + 101.14 * a - 223.73 * a * a).exp()
    };
    Ok(TestReport::new("gaussianity_anderson_darling", a, p, n))
}

/// Combines p-values by Bonferroni: `min(1, m · min p)`. Reports the
/// statistic belonging to the smallest p-value.
pub fn bonferroni(test: &str, reports: &[TestReport], n: usize) -> TestReport {
    let m = reports.len() as f64;
    let Some(best) = reports.iter().min_by(|a, b| a.p_value.total_cmp(&b.p_value)) else {
        return TestReport::new(test, 0.0, 1.0, n);
    };
    TestReport::new(test, best.statistic, (best.p_value * m).min(1.0), n)
}

/// Compares `samples[..h]` against `e^{iφ} · samples[h..]`, `h = len/2`, on
/// real and imaginary parts.
pub fn phase_invariance_test(samples: &[C64], phi: f64) -> Result<TestReport> {
    if samples.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: samples.len(),
        });
    }
    let h = samples.len() / 2;
    let rot = C64::from_polar(1.0, phi);
    let (first, second) = samples.split_at(h);
    let turned: Vec<C64> = second.iter().map(|z| z * rot).collect();
    let re = ks_two_sample(
        &first.iter().map(|z| z.re).collect::<Vec<_>>(),
        &turned.iter().map(|z| z.re).collect::<Vec<_>>(),
    )?;
    let im = ks_two_sample(
        &first.iter().map(|z| z.im).collect::<Vec<_>>(),
        &turned.iter().map(|z| z.im).collect::<Vec<_>>(),
    )?;
    Ok(bonferroni("phase_invariance", &[re, im], h))
}

fn coordinate_tests(a: &[Vec<C64>], b: &[Vec<C64>]) -> Result<Vec<TestReport>> {
    let d = a[0].len();
    let mut out = Vec::with_capacity(3 * d);
    for k in 0..d {
        let parts: [fn(&C64) -> f64; 3] = [|z| z.re, |z| z.im, |z| z.norm()];
        let scale = a.iter().chain(b).map(|v| v[k].norm()).fold(0.0, f64::max);
        for f in parts {
            let x: Vec<f64> = a.iter().map(|v| f(&v[k])).collect();
            let y: Vec<f64> = b.iter().map(|v| f(&v[k])).collect();
            // a part that vanishes up to rounding (Im of a real coordinate) carries no information
            let negligible = |xs: &[f64]| xs.iter().all(|t| t.abs() <= 1e-12 * scale);
            if negligible(&x) && negligible(&y) {
                continue;
            }
            out.push(ks_two_sample(&x, &y)?);
        }
    }
    Ok(out)
}

/// Generic two-group invariance test: group A is drawn as is, group B is drawn
/// independently and transformed by `transform(g, ·)` for every `g`.
/// Re, Im and modulus of every coordinate are compared by KS; the smallest
/// Bonferroni-adjusted p-value over coordinates and group elements is
/// reported.
pub fn invariance_test_with<S, T>(
    sampler: S,
    transform: T,
    g_list: &[GroupElement],
    n: usize,
    rng: &RngStream,
) -> Result<TestReport>
where
    S: Fn(&mut RngStream) -> Result<Vec<C64>> + Sync,
    T: Fn(&GroupElement, &[C64]) -> Result<Vec<C64>>,
{
    if g_list.is_empty() {
        return Err(Error::InvalidArgument("g_list must not be empty".into()));
    }
    if n < 1000 {
        return Err(Error::InsufficientSamples { needed: 1000, got: n });
    }
    let a = sample_batch(n, &rng.split(0), &sampler)?;
    let b = sample_batch(n, &rng.split(1), &sampler)?;
    Ok(invariance_test_on(&a, &b, transform, g_list)?.with_seed(rng.seed()))
}

/// Invariance test on two given independent groups of draws; `b` is
/// transformed by every `g` and compared with `a`.
pub fn invariance_test_on<T>(
    a: &[Vec<C64>],
    b: &[Vec<C64>],
    transform: T,
    g_list: &[GroupElement],
) -> Result<TestReport>
where
    T: Fn(&GroupElement, &[C64]) -> Result<Vec<C64>>,
{
    if g_list.is_empty() {
        return Err(Error::InvalidArgument("g_list must not be empty".into()));
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let mut reports = vec![];
    for g in g_list {
        let moved: Vec<Vec<C64>> = b.iter().map(|v| transform(g, v)).collect::<Result<_>>()?;
        reports.extend(coordinate_tests(a, &moved)?);
    }
    Ok(bonferroni("invariance", &reports, a.len().min(b.len())))
}

/// `v ↦ D(g⁻¹) v` on coordinates of `basis`.
pub fn rotation_transform(basis: &SelfConjBasis) -> impl Fn(&GroupElement, &[C64]) -> Result<Vec<C64>> + '_ {
    move |g, v| Ok(apply(&basis_rep_matrix(basis, &g.inverse())?, v))
}

/// Invariance test for coefficient vectors on `basis`: the second group is
/// rotated by `D(g⁻¹)`.
pub fn invariance_test<S>(
    sampler: S,
    basis: &SelfConjBasis,
    g_list: &[GroupElement],
    n: usize,
    rng: &RngStream,
) -> Result<TestReport>
where
    S: Fn(&mut RngStream) -> Result<CoefficientVector> + Sync,
{
    let mats: Vec<CMatrix> = g_list
        .iter()
        .map(|g| basis_rep_matrix(basis, &g.inverse()))
        .collect::<Result<_>>()?;
    let index = |g: &GroupElement| g_list.iter().position(|h| h == g);
    invariance_test_with(
        |r| sampler(r).map(|a| a.values),
        |g, v| {
            let m = match index(g) {
                Some(i) => mats[i].clone(),
                None => basis_rep_matrix(basis, &g.inverse())?,
            };
            Ok(apply(&m, v))
        },
        g_list,
        n,
        rng,
    )
}
