//! The irreducible SU(2)-modules H_ℓ of homogeneous polynomials of degree ℓ
//! in two complex variables.
//!
//! Coefficients are stored in the monomial basis `p_s = z₁ˢ z₂^(ℓ−s)`. The
//! invariant inner product makes `e_s = c_s p_s` orthonormal with
//! `c_s = sqrt(binom(ℓ, s))`. Matrices are indexed `(j, s)` with entry
//! `⟨g·e_s, e_j⟩`, so `rep_matrix(gh) = rep_matrix(g) · rep_matrix(h)`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::group::{SO4Element, SU2Element};

pub type CMatrix = DMatrix<C64>;

pub(crate) fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// `sqrt(binom(ℓ, s))`.
pub fn norm_const(ell: usize, s: usize) -> f64 {
    binom(ell, s).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousPoly {
    ell: usize,
    coeffs: Vec<C64>,
}

impl HomogeneousPoly {
    pub fn new(ell: usize, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != ell + 1 {
            return Err(Error::InvalidArgument(format!(
                "degree {ell} needs {} coefficients, got {}",
                ell + 1,
                coeffs.len()
            )));
        }
        Ok(Self { ell, coeffs })
    }

    pub fn zero(ell: usize) -> Self {
        Self {
            ell,
            coeffs: vec![C64::new(0.0, 0.0); ell + 1],
        }
    }

    /// `p_s = z₁ˢ z₂^(ℓ−s)`.
    pub fn monomial(ell: usize, s: usize) -> Self {
        let mut p = Self::zero(ell);
        p.coeffs[s] = C64::new(1.0, 0.0);
        p
    }

    /// Orthonormal basis vector `e_s = c_s p_s`.
    pub fn basis(ell: usize, s: usize) -> Self {
        let mut p = Self::zero(ell);
        p.coeffs[s] = C64::new(norm_const(ell, s), 0.0);
        p
    }

    /// Polynomial with the given coordinates in the orthonormal basis `e_s`.
    pub fn from_orthonormal(ell: usize, coords: &[C64]) -> Result<Self> {
        if coords.len() != ell + 1 {
            return Err(Error::InvalidArgument("coordinate length".into()));
        }
        let coeffs = coords
            .iter()
            .enumerate()
            .map(|(s, z)| z * norm_const(ell, s))
            .collect();
        Ok(Self { ell, coeffs })
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// Coordinates in the orthonormal basis `e_s`.
    pub fn orthonormal_coords(&self) -> Vec<C64> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(s, z)| z / norm_const(self.ell, s))
            .collect()
    }

    pub fn eval(&self, z1: C64, z2: C64) -> C64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(s, c)| c * z1.powu(s as u32) * z2.powu((self.ell - s) as u32))
            .sum()
    }

    pub fn scale(&self, lambda: C64) -> Self {
        Self {
            ell: self.ell,
            coeffs: self.coeffs.iter().map(|c| c * lambda).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.ell != other.ell {
            return Err(Error::DegreeMismatch(self.ell, other.ell));
        }
        Ok(Self {
            ell: self.ell,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    fn mul(&self, other: &Self) -> Self {
        let mut coeffs = vec![C64::new(0.0, 0.0); self.ell + other.ell + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Self {
            ell: self.ell + other.ell,
            coeffs,
        }
    }

    fn d_z1(&self) -> Self {
        let coeffs = (1..=self.ell)
            .map(|s| self.coeffs[s] * s as f64)
            .collect();
        Self {
            ell: self.ell - 1,
            coeffs,
        }
    }

    fn d_z2(&self) -> Self {
        let coeffs = (0..self.ell)
            .map(|s| self.coeffs[s] * (self.ell - s) as f64)
            .collect();
        Self {
            ell: self.ell - 1,
            coeffs,
        }
    }
}

/// `(g·p)(z₁, z₂) = p(a z₁ − b̄ z₂, b z₁ + ā z₂)`, expanded by direct
/// multiplication of the substituted linear forms.
pub fn act(g: &SU2Element, p: &HomogeneousPoly) -> HomogeneousPoly {
    let ell = p.ell;
    let (a, b) = (g.a(), g.b());
    // linear forms as degree-1 polynomials: index 1 ↔ z₁, index 0 ↔ z₂
    let u = HomogeneousPoly {
        ell: 1,
        coeffs: vec![-b.conj(), a],
    };
    let v = HomogeneousPoly {
        ell: 1,
        coeffs: vec![a.conj(), b],
    };
    let one = HomogeneousPoly {
        ell: 0,
        coeffs: vec![C64::new(1.0, 0.0)],
    };
    let mut u_pows = vec![one.clone()];
    let mut v_pows = vec![one];
    for k in 1..=ell {
        u_pows.push(u_pows[k - 1].mul(&u));
        v_pows.push(v_pows[k - 1].mul(&v));
    }
    let mut out = HomogeneousPoly::zero(ell);
    for (s, c) in p.coeffs.iter().enumerate() {
        if *c == C64::new(0.0, 0.0) {
            continue;
        }
        let term = u_pows[s].mul(&v_pows[ell - s]);
        for (r, t) in term.coeffs.iter().enumerate() {
            out.coeffs[r] += c * t;
        }
    }
    out
}

/// Invariant inner product, linear in `p` and antilinear in `q`, with
/// `⟨p_s, p_r⟩ = s!(ℓ−s)!/ℓ! · δ_{sr}`.
pub fn inner(p: &HomogeneousPoly, q: &HomogeneousPoly) -> Result<C64> {
    if p.ell != q.ell {
        return Err(Error::DegreeMismatch(p.ell, q.ell));
    }
    let ell = p.ell;
    Ok(p.coeffs
        .iter()
        .zip(&q.coeffs)
        .enumerate()
        .map(|(s, (x, y))| x * y.conj() / binom(ell, s))
        .sum())
}

fn check_index(ell: usize, idx: usize, name: &str) -> Result<()> {
    if idx > ell {
        return Err(Error::IndexOutOfRange(format!("{name}={idx} > ell={ell}")));
    }
    Ok(())
}

/// `⟨g·e_s, e_j⟩ = (c_s / c_j) H_{j,s}` with
/// `H_{j,s} = Σ_{h+k=j} binom(s,h) binom(ℓ−s,k) aʰ ā^(ℓ−s−k) bᵏ (−b̄)^(s−h)`.
pub fn matrix_coeff(ell: usize, g: &SU2Element, s: usize, j: usize) -> Result<C64> {
    check_index(ell, s, "s")?;
    check_index(ell, j, "j")?;
    Ok(matrix_coeff_unchecked(ell, g, s, j))
}

fn matrix_coeff_unchecked(ell: usize, g: &SU2Element, s: usize, j: usize) -> C64 {
    let (a, b) = (g.a(), g.b());
    let (ac, mbc) = (a.conj(), -b.conj());
    let h_lo = j.saturating_sub(ell - s);
    let h_hi = s.min(j);
    let mut total = C64::new(0.0, 0.0);
    for h in h_lo..=h_hi {
        let k = j - h;
        let w = binom(s, h) * binom(ell - s, k);
        total += a.powu(h as u32)
            * ac.powu((ell - s - k) as u32)
            * b.powu(k as u32)
            * mbc.powu((s - h) as u32)
            * w;
    }
    total * (norm_const(ell, s) / norm_const(ell, j))
}

/// Unitary matrix of `g` on `H_ℓ` in the basis `e_0..e_ℓ`.
#[derive(Debug, Clone, PartialEq)]
pub struct RepMatrix {
    pub ell: usize,
    pub entries: CMatrix,
}

impl RepMatrix {
    pub fn dim(&self) -> usize {
        self.ell + 1
    }

    pub fn mul(&self, other: &RepMatrix) -> RepMatrix {
        RepMatrix {
            ell: self.ell,
            entries: &self.entries * &other.entries,
        }
    }

    /// Largest entry of `M·M* − I`.
    pub fn unitarity_defect(&self) -> f64 {
        unitarity_defect(&self.entries)
    }
}

pub fn unitarity_defect(m: &CMatrix) -> f64 {
    let prod = m * m.adjoint();
    let id = CMatrix::identity(m.nrows(), m.ncols());
    (prod - id).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_entry_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn rep_matrix(ell: usize, g: &SU2Element) -> RepMatrix {
    let entries = CMatrix::from_fn(ell + 1, ell + 1, |j, s| matrix_coeff_unchecked(ell, g, s, j));
    RepMatrix { ell, entries }
}

/// Kronecker product `rep_matrix(ℓ, g1) ⊗ rep_matrix(ℓ, g2)` on `H_ℓ ⊗ H_ℓ`,
/// indexed by `s1·(ℓ+1) + s2`.
pub fn tensor_rep_matrix(ell: usize, g: &SO4Element) -> CMatrix {
    let d1 = rep_matrix(ell, &g.g1).entries;
    let d2 = rep_matrix(ell, &g.g2).entries;
    d1.kronecker(&d2)
}

/// Antilinear equivariant conjugation `(Jp)(z) = conj(p(−z̄₂, z̄₁))`; on
/// monomials `J p_s = (−1)ˢ p_{ℓ−s}`. `J² = (−1)^ℓ`.
pub fn conjugation_j(p: &HomogeneousPoly) -> HomogeneousPoly {
    let ell = p.ell;
    let mut out = HomogeneousPoly::zero(ell);
    for (s, c) in p.coeffs.iter().enumerate() {
        let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
        out.coeffs[ell - s] = c.conj() * sign;
    }
    out
}

/// Highest weights in the decomposition of `H_ℓ ⊗ H_k`.
pub fn clebsch_gordan_components(ell: usize, k: usize) -> Vec<usize> {
    (0..=ell.min(k)).map(|j| ell + k - 2 * j).collect()
}

/// `D(P, Q) = ∂₁P ∂₂Q − ∂₂P ∂₁Q`, a polynomial of degree `2ℓ − 2`.
pub fn jacobian_pair(p: &HomogeneousPoly, q: &HomogeneousPoly) -> Result<HomogeneousPoly> {
    if p.ell != q.ell {
        return Err(Error::DegreeMismatch(p.ell, q.ell));
    }
    if p.ell == 0 {
        return Err(Error::InvalidArgument(
            "jacobian pairing needs degree >= 1".into(),
        ));
    }
    let lhs = p.d_z1().mul(&q.d_z2());
    let rhs = p.d_z2().mul(&q.d_z1());
    Ok(HomogeneousPoly {
        ell: lhs.ell,
        coeffs: lhs
            .coeffs
            .iter()
            .zip(&rhs.coeffs)
            .map(|(x, y)| x - y)
            .collect(),
    })
}
