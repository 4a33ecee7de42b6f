//! The mixing condition: for some group element `g` and two row labels
//! `0 ≤ m₁ < m₂`, every positive column label `m` has
//! `|D_{mᵢ,m}(g)| ≠ |D_{mᵢ,−m}(g)|`.
//!
//! Three routes are provided: a Haar witness search ([`check_mixing`]), the
//! orbit-span orthogonality criterion in the exterior square
//! ([`orbit_orthogonality`]) and, for torus bases on S³, an exact comparison of
//! squared matrix-coefficient polynomials ([`s3_exact_mixing`]).

use std::cmp::Ordering;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bases::{basis_rep_matrix, SelfConjBasis};
use crate::error::{Error, Result};
use crate::exact::{leading_a_exponent, p_poly, p_poly_homogeneous};
use crate::group::GroupElement;
use crate::irrep::CMatrix;
use crate::rng::RngStream;

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_SAMPLES: usize = 1000;
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Mixing,
    NotMixing,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MixingReport {
    pub dim: usize,
    pub verdict: Verdict,
    pub witness_g: Option<GroupElement>,
    /// Row labels `(m₁, m₂)` of the witness.
    pub pair: Option<(i64, i64)>,
    /// Best second-largest row gap seen over all samples.
    pub margin: f64,
    pub samples_used: usize,
    pub tol: f64,
    /// Largest gap seen on the self-paired (real) row, if the module has one.
    pub real_row_max_gap: Option<f64>,
    pub proof: Option<String>,
}

fn lookup(basis: &SelfConjBasis, label: i64) -> Result<usize> {
    basis
        .position(label)
        .ok_or_else(|| Error::IndexOutOfRange(format!("label {label} not in module of dim {}", basis.dim())))
}

/// `|D_{mᵢ,m}(g)| − |D_{mᵢ,−m}(g)|` for row label `mᵢ` and nonzero column
/// label `m`.
pub fn moduli_gap(basis: &SelfConjBasis, g: &GroupElement, m_i: i64, m: i64) -> Result<f64> {
    if m == 0 {
        return Err(Error::IndexOutOfRange("column label must be nonzero".into()));
    }
    let row = lookup(basis, m_i)?;
    let (cp, cm) = (lookup(basis, m)?, lookup(basis, -m)?);
    let d = basis_rep_matrix(basis, g)?;
    Ok(d[(row, cp)].norm() - d[(row, cm)].norm())
}

/// `min_m ||D_{row,m}| − |D_{row,−m}||` over the positive columns.
fn row_gap(d: &CMatrix, row: usize) -> f64 {
    let n = d.nrows();
    (0..n / 2)
        .map(|p| (d[(row, p)].norm() - d[(row, n - 1 - p)].norm()).abs())
        .fold(f64::INFINITY, f64::min)
}

struct SampleOutcome {
    index: usize,
    margin: f64,
    rows: (usize, usize),
    g: GroupElement,
    real_gap: Option<f64>,
}

fn evaluate_sample(basis: &SelfConjBasis, index: usize, g: GroupElement) -> Result<SampleOutcome> {
    let d = basis_rep_matrix(basis, &g)?;
    let n = basis.dim();
    let mut gaps: Vec<(usize, f64)> = (0..n / 2).map(|r| (r, row_gap(&d, r))).collect();
    gaps.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal));
    let (margin, rows) = if gaps.len() >= 2 {
        (gaps[1].1, (gaps[0].0, gaps[1].0))
    } else {
        (0.0, (0, 0))
    };
    let real_gap = basis.has_zero().then(|| row_gap(&d, n / 2));
    Ok(SampleOutcome {
        index,
        margin,
        rows,
        g,
        real_gap,
    })
}

/// Margin and row pair of one given group element: the second-largest row
/// gap and the labels of the two best rows.
pub fn witness_margin(basis: &SelfConjBasis, g: &GroupElement) -> Result<(f64, Option<(i64, i64)>)> {
    let o = evaluate_sample(basis, 0, *g)?;
    if basis.half() < 2 {
        return Ok((0.0, None));
    }
    let (a, b) = (basis.label(o.rows.0), basis.label(o.rows.1));
    Ok((o.margin, Some((a.min(b), a.max(b)))))
}

/// Haar witness search. Sample `i` uses the child stream `rng.split(i)`, so
/// the result does not depend on the number of worker threads.
pub fn check_mixing(
    basis: &SelfConjBasis,
    n_samples: usize,
    tol: f64,
    rng: &RngStream,
) -> Result<MixingReport> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be positive".into()));
    }
    let dim = basis.dim();
    if dim < 2 {
        return Err(Error::InvalidArgument("mixing needs dim >= 2".into()));
    }
    let outcomes: Vec<SampleOutcome> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut stream = rng.split(i as u64);
            let g = basis.space.haar(&mut stream);
            evaluate_sample(basis, i, g)
        })
        .collect::<Result<_>>()?;
    let best = outcomes
        .iter()
        .max_by(|a, b| {
            a.margin
                .partial_cmp(&b.margin)
                .unwrap_or(Ordering::Equal)
                .then(b.index.cmp(&a.index))
        })
        .expect("n_samples > 0");
    let real_row_max_gap = basis
        .has_zero()
        .then(|| outcomes.iter().filter_map(|o| o.real_gap).fold(0.0, f64::max));

    let half = dim / 2;
    let mut report = MixingReport {
        dim,
        verdict: Verdict::Inconclusive,
        witness_g: None,
        pair: None,
        margin: best.margin,
        samples_used: n_samples,
        tol,
        real_row_max_gap,
        proof: None,
    };
    if half >= 2 && best.margin > tol {
        let (a, b) = (basis.label(best.rows.0), basis.label(best.rows.1));
        report.verdict = Verdict::Mixing;
        report.witness_g = Some(best.g);
        report.pair = Some((a.min(b), a.max(b)));
    } else if half < 2 {
        report.verdict = Verdict::NotMixing;
        report.proof = Some(if basis.has_zero() {
            "the label-0 basis vector is a real function, so |D_{0,m}(g)| = |D_{0,-m}(g)| for every g; \
             only one other row label remains"
                .into()
        } else {
            "only one row label m >= 0 exists".into()
        });
    }
    Ok(report)
}

/// `⟨v₁∧w₁, v₂∧w₂⟩₂`, computed in the coordinates `e_i ∧ e_j`, `i < j`.
pub fn wedge_inner(v1: &[C64], w1: &[C64], v2: &[C64], w2: &[C64]) -> C64 {
    let x = wedge_coords(v1, w1);
    let y = wedge_coords(v2, w2);
    x.iter().zip(&y).map(|(a, b)| a * b.conj()).sum()
}

fn wedge_coords(v: &[C64], w: &[C64]) -> Vec<C64> {
    let n = v.len();
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            out.push(v[i] * w[j] - v[j] * w[i]);
        }
    }
    out
}

/// `⟨g(h_s ∧ h_{−s}), h_m ∧ h_{−m}⟩₂` for positive labels `s`, `m`, computed
/// in the exterior square. Returned as a complex number; it is real for
/// self-conjugated bases.
pub fn wedge_pairing_complex(basis: &SelfConjBasis, g: &GroupElement, s: i64, m: i64) -> Result<C64> {
    if s <= 0 || m <= 0 {
        return Err(Error::IndexOutOfRange("wedge labels must be positive".into()));
    }
    let (ps, pms) = (lookup(basis, s)?, lookup(basis, -s)?);
    let (pm, pmm) = (lookup(basis, m)?, lookup(basis, -m)?);
    let d = basis_rep_matrix(basis, g)?;
    let n = basis.dim();
    let col = |c: usize| -> Vec<C64> { (0..n).map(|r| d[(r, c)]).collect() };
    let unit = |p: usize| -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); n];
        v[p] = C64::new(1.0, 0.0);
        v
    };
    Ok(wedge_inner(&col(ps), &col(pms), &unit(pm), &unit(pmm)))
}

pub fn wedge_pairing(basis: &SelfConjBasis, g: &GroupElement, s: i64, m: i64) -> Result<f64> {
    Ok(wedge_pairing_complex(basis, g, s, m)?.re)
}

/// Orthonormal basis of a growing subspace.
struct SpanBuilder {
    basis: Vec<Vec<C64>>,
    tol: f64,
}

impl SpanBuilder {
    fn new(tol: f64) -> Self {
        Self { basis: vec![], tol }
    }

    fn push(&mut self, v: &[C64]) {
        let norm0 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm0 == 0.0 {
            return;
        }
        let mut r: Vec<C64> = v.iter().map(|z| z / norm0).collect();
        // two passes of modified Gram–Schmidt
        for _ in 0..2 {
            for q in &self.basis {
                let c: C64 = r.iter().zip(q).map(|(a, b)| a * b.conj()).sum();
                for (a, b) in r.iter_mut().zip(q) {
                    *a -= c * b;
                }
            }
        }
        let norm = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > self.tol.sqrt() {
            self.basis.push(r.iter().map(|z| z / norm).collect());
        }
    }

    fn rank(&self) -> usize {
        self.basis.len()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrbitReport {
    /// Numerical dimension of each orbit span `W_m`, by positive label.
    pub ranks: Vec<(i64, usize)>,
    /// Pairs `(i, j)` with `W_i ⊥ W_j`.
    pub s_pairs: Vec<(i64, i64)>,
    /// Labels `i` occurring as the first entry of a pair in `S`.
    pub s_tilde: Vec<i64>,
    pub verdict: Verdict,
    pub samples_used: usize,
    pub exterior_dim: usize,
    /// Verdict of [`check_mixing`] on the same basis, for cross-checking.
    pub sampling_verdict: Verdict,
    pub consistent: bool,
}

/// Estimates the orbit spans `W_m = span{g·(h_m ∧ h_{−m})}` and decides
/// mixing by the orthogonality pattern between them: mixing holds iff at
/// least two labels are orthogonal to no other span.
///
/// Batches of `4·dim(∧²)` Haar samples are added until the ranks are
/// unchanged over three consecutive batches or `max_samples` is reached.
pub fn orbit_orthogonality(
    basis: &SelfConjBasis,
    max_samples: usize,
    rank_tol: f64,
    rng: &RngStream,
) -> Result<OrbitReport> {
    let n = basis.dim();
    let half = n / 2;
    if half == 0 {
        return Err(Error::InvalidArgument("orbit spans need dim >= 2".into()));
    }
    let ext_dim = n * (n - 1) / 2;
    let batch = 4 * ext_dim;
    let labels: Vec<i64> = (0..half).map(|p| basis.label(p)).collect();
    let mut spans: Vec<SpanBuilder> = (0..half).map(|_| SpanBuilder::new(rank_tol)).collect();
    let mut stable_batches = 0;
    let mut used = 0usize;
    let mut sample_idx = 0u64;
    let stream = rng.split(0);
    while used < max_samples.max(batch) && stable_batches < 3 {
        let before: Vec<usize> = spans.iter().map(|s| s.rank()).collect();
        for _ in 0..batch {
            let mut child = stream.split(sample_idx);
            sample_idx += 1;
            let g = basis.space.haar(&mut child);
            let d = basis_rep_matrix(basis, &g)?;
            for (p, span) in spans.iter_mut().enumerate() {
                let u: Vec<C64> = (0..n).map(|r| d[(r, p)]).collect();
                let w: Vec<C64> = (0..n).map(|r| d[(r, n - 1 - p)]).collect();
                span.push(&wedge_coords(&u, &w));
            }
        }
        used += batch;
        let after: Vec<usize> = spans.iter().map(|s| s.rank()).collect();
        if after == before {
            stable_batches += 1;
        } else {
            stable_batches = 0;
        }
    }

    let mut s_pairs = vec![];
    for i in 0..half {
        for j in 0..half {
            let orthogonal = spans[i].basis.iter().all(|x| {
                spans[j].basis.iter().all(|y| {
                    let c: C64 = x.iter().zip(y).map(|(a, b)| a * b.conj()).sum();
                    c.norm() < rank_tol
                })
            });
            if orthogonal {
                s_pairs.push((labels[i], labels[j]));
            }
        }
    }
    let mut s_tilde: Vec<i64> = s_pairs.iter().map(|&(i, _)| i).collect();
    s_tilde.sort_unstable_by(|a, b| b.cmp(a));
    s_tilde.dedup();
    let complement = half - s_tilde.len();
    let verdict = if complement >= 2 {
        Verdict::Mixing
    } else {
        Verdict::NotMixing
    };
    let sampling = check_mixing(basis, DEFAULT_SAMPLES, DEFAULT_TOL, &rng.split(1))?;
    let consistent = match sampling.verdict {
        Verdict::Inconclusive => true,
        v => v == verdict,
    };
    Ok(OrbitReport {
        ranks: labels.iter().copied().zip(spans.iter().map(|s| s.rank())).collect(),
        s_pairs,
        s_tilde,
        verdict,
        samples_used: used,
        exterior_dim: ext_dim,
        sampling_verdict: sampling.verdict,
        consistent,
    })
}

/// One exact comparison of `𝒫^ℓ_{s, j₊}` against `𝒫^ℓ_{s, j₋}`, with
/// `j± = ℓ/2 ± r`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ColumnComparison {
    /// Which of the two row labels (1 or 2).
    pub row: usize,
    pub s: usize,
    pub j_plus: usize,
    pub j_minus: usize,
    /// Highest `|a|²` exponents of the two polynomials.
    pub leading_plus: usize,
    pub leading_minus: usize,
    /// `min(s, j₊)` and `min(s, j₋)`: the top of each summation range.
    pub h1: usize,
    pub h2: usize,
    pub polynomials_differ: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct S3Certificate {
    pub ell: usize,
    pub m1: usize,
    pub m2: usize,
    pub verdict: Verdict,
    pub comparisons: Vec<ColumnComparison>,
}

/// Compares the squared moduli of `⟨g e_s, e_{j₊}⟩` and `⟨g e_s, e_{j₋}⟩` as
/// exact polynomials in `|a|²`.
pub fn compare_columns(ell: usize, s: usize, j_plus: usize, j_minus: usize) -> Result<ColumnComparison> {
    let plus = p_poly(ell, s, j_plus)?;
    let minus = p_poly(ell, s, j_minus)?;
    let lp = leading_a_exponent(&p_poly_homogeneous(ell, s, j_plus)?).unwrap_or(0);
    let lm = leading_a_exponent(&p_poly_homogeneous(ell, s, j_minus)?).unwrap_or(0);
    Ok(ColumnComparison {
        row: 0,
        s,
        j_plus,
        j_minus,
        leading_plus: lp,
        leading_minus: lm,
        h1: s.min(j_plus),
        h2: s.min(j_minus),
        polynomials_differ: plus != minus,
    })
}

/// `(min(m+mᵢ, m+r), min(m+mᵢ, m−r))` for `ℓ = 2m`.
pub fn highest_index_pair(m: usize, m_i: usize, r: i64) -> (i64, i64) {
    let (m, mi) = (m as i64, m_i as i64);
    ((m + mi).min(m + r), (m + mi).min(m - r))
}

/// Exact mixing certificate for the torus basis of `H_ℓ ⊗ H_ℓ` on S³.
///
/// For even `ℓ = 2m` the row `f_{m₁} ⊗ f_{m₂}` has positive torus labels
/// `0 < m₁, m₂ ≤ m`. For odd `ℓ` the labels are half-integers and `mᵢ`
/// stands for `mᵢ − ½`, so `1 ≤ mᵢ ≤ (ℓ+1)/2`. Every column label `r ≠ 0` is
/// compared against `−r` for both tensor factors.
pub fn s3_exact_mixing(ell: usize, m1: usize, m2: usize) -> Result<S3Certificate> {
    if ell == 0 {
        return Err(Error::InvalidArgument("S3 module of degree 0 is the constants".into()));
    }
    let max_label = ell.div_ceil(2);
    for m_i in [m1, m2] {
        if m_i == 0 || m_i > max_label {
            return Err(Error::IndexOutOfRange(format!(
                "row label {m_i} outside 1..={max_label}"
            )));
        }
    }
    let mut comparisons = vec![];
    for (idx, m_i) in [(1usize, m1), (2usize, m2)] {
        // e-index of the row; odd degrees shift the half-integer label
        let s = if ell % 2 == 0 { ell / 2 + m_i } else { (ell - 1) / 2 + m_i };
        // j₊ > j₋ is r > 0; the mirrored comparison covers r < 0
        for j_plus in (ell / 2 + 1)..=ell {
            let j_minus = ell - j_plus;
            let mut c = compare_columns(ell, s, j_plus, j_minus)?;
            c.row = idx;
            comparisons.push(c);
            let mut mirrored = compare_columns(ell, s, j_minus, j_plus)?;
            mirrored.row = idx;
            comparisons.push(mirrored);
        }
    }
    let all = comparisons
        .iter()
        .all(|c| c.polynomials_differ && c.leading_plus != c.leading_minus && c.h1 != c.h2);
    Ok(S3Certificate {
        ell,
        m1,
        m2,
        verdict: if all { Verdict::Mixing } else { Verdict::Inconclusive },
        comparisons,
    })
}
