//! Exact rational polynomials for squared matrix-coefficient moduli.
//!
//! `|⟨g e_s, e_j⟩|²` depends only on `x = |a|²` (with `|b|² = 1 − x`). It is
//! a homogeneous polynomial of degree ℓ in `(|a|², |b|²)`; [`p_poly_homogeneous`]
//! keeps that form, [`p_poly`] substitutes `|b|² = 1 − x`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Univariate polynomial with rational coefficients, lowest degree first.
/// Trailing zeros are trimmed, so the zero polynomial has no coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactPoly {
    coeffs: Vec<BigRational>,
}

impl ExactPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![] }
    }

    pub fn one() -> Self {
        Self::new(vec![BigRational::one()])
    }

    pub fn from_integers(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigRational::from_integer(c.into())).collect())
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &ExactPoly) -> ExactPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = BigRational::zero();
        let coeffs = (0..n)
            .map(|i| self.coeffs.get(i).unwrap_or(&zero) + other.coeffs.get(i).unwrap_or(&zero))
            .collect();
        ExactPoly::new(coeffs)
    }

    pub fn sub(&self, other: &ExactPoly) -> ExactPoly {
        self.add(&other.scale(&-BigRational::one()))
    }

    pub fn mul(&self, other: &ExactPoly) -> ExactPoly {
        if self.is_zero() || other.is_zero() {
            return ExactPoly::zero();
        }
        let mut coeffs = vec![BigRational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        ExactPoly::new(coeffs)
    }

    pub fn scale(&self, k: &BigRational) -> ExactPoly {
        ExactPoly::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn pow(&self, n: usize) -> ExactPoly {
        (0..n).fold(ExactPoly::one(), |acc, _| acc.mul(self))
    }

    pub fn eval_exact(&self, x: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    /// Value at a double, evaluated exactly and rounded once. The monomial
    /// coefficients alternate in sign and grow like binomials, so plain
    /// floating-point Horner loses digits for larger degrees.
    pub fn eval(&self, x: f64) -> f64 {
        match BigRational::from_float(x) {
            Some(xr) => self.eval_exact(&xr).to_f64().unwrap_or(f64::NAN),
            None => f64::NAN,
        }
    }
}

impl fmt::Display for ExactPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let mag = c.abs();
            match i {
                0 => write!(f, "{mag}")?,
                1 if mag.is_one() => write!(f, "x")?,
                1 => write!(f, "{mag}*x")?,
                _ if mag.is_one() => write!(f, "x^{i}")?,
                _ => write!(f, "{mag}*x^{i}")?,
            }
        }
        Ok(())
    }
}

fn binom_big(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

fn check(ell: usize, s: usize, j: usize) -> Result<()> {
    if s > ell || j > ell {
        return Err(Error::IndexOutOfRange(format!(
            "(s, j) = ({s}, {j}) outside 0..={ell}"
        )));
    }
    Ok(())
}

/// Coefficients `h[i]` of `|⟨g e_s, e_j⟩|² = Σ_i h[i] |a|^{2i} |b|^{2(ℓ−i)}`.
///
/// The inner sum runs over `max(0, s+j−ℓ) ≤ h ≤ min(s, j)`.
pub fn p_poly_homogeneous(ell: usize, s: usize, j: usize) -> Result<Vec<BigRational>> {
    check(ell, s, j)?;
    let h_lo = (s + j).saturating_sub(ell);
    let h_hi = s.min(j);
    // inner sum term h has |a|^(ℓ−s−j+2h) |b|^(s+j−2h); the square pairs h, h'
    let weights: Vec<(usize, BigInt)> = (h_lo..=h_hi)
        .map(|h| {
            let w = binom_big(s, h) * binom_big(ell - s, j - h);
            let w = if (s - h) % 2 == 0 { w } else { -w };
            (h, w)
        })
        .collect();
    let mut out = vec![BigRational::zero(); ell + 1];
    let scale = BigRational::new(binom_big(ell, s), binom_big(ell, j));
    for (h1, w1) in &weights {
        for (h2, w2) in &weights {
            // exponent of |a|² is ℓ − s − j + h1 + h2 (always ≥ 0 by the range)
            let idx = ell + h1 + h2 - s - j;
            out[idx] += BigRational::from_integer(w1 * w2) * &scale;
        }
    }
    Ok(out)
}

/// Highest power of `|a|²` with a nonzero coefficient in the homogeneous form.
pub fn leading_a_exponent(hom: &[BigRational]) -> Option<usize> {
    hom.iter().rposition(|c| !c.is_zero())
}

/// `𝒫^ℓ_{s,j}` as a polynomial in `x = |a|²`.
pub fn p_poly(ell: usize, s: usize, j: usize) -> Result<ExactPoly> {
    let hom = p_poly_homogeneous(ell, s, j)?;
    Ok(from_homogeneous(&hom))
}

/// Substitutes `|b|² = 1 − x` into a homogeneous form of degree `hom.len() − 1`.
pub fn from_homogeneous(hom: &[BigRational]) -> ExactPoly {
    let deg = hom.len().saturating_sub(1);
    let x = ExactPoly::from_integers(&[0, 1]);
    let one_minus_x = ExactPoly::from_integers(&[1, -1]);
    hom.iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .fold(ExactPoly::zero(), |acc, (i, c)| {
            acc.add(&x.pow(i).mul(&one_minus_x.pow(deg - i)).scale(c))
        })
}
