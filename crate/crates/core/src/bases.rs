//! Self-conjugated orthonormal bases of the irreducible modules of L²(S²)
//! and L²(S³).
//!
//! Each module is realized on a reference basis `f` built from the SU(2)
//! polynomial modules:
//!
//! * S², SU(2)-degree ℓ = 2m: `H_ℓ` with `f_k = e_{m+k}`, identified with the
//!   functions `i^m · Y_{m,k}`; SU(2) acts on S² through its rotation image.
//! * S³, degree ℓ: `H_ℓ ⊗ H_ℓ` with basis `e_{s1} ⊗ e_{s2}`, acted on by
//!   SO(4) and identified with matrix coefficients on S³ ≅ SU(2).
//!
//! Coordinates use *positions* `0..d`: position `p` pairs with `d − 1 − p`
//! under conjugation, positions below `d/2` carry positive labels in
//! descending order and the middle position of an odd module carries label 0.
//! A basis is stored as the unitary `change` whose column `p` holds the
//! coordinates of basis vector `p` in the reference basis.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{GroupElement, SO4Element, SU2Element};
use crate::irrep::{matrix_coeff, rep_matrix, tensor_rep_matrix, unitarity_defect, CMatrix};
use crate::rng::RngStream;
use crate::sphere::eval_s2;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Which module a basis lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "space", rename_all = "lowercase")]
pub enum SpaceTag {
    /// S² module of SU(2)-degree `ell` (must be even; dimension `ell + 1`).
    S2 { ell: usize },
    /// S³ module `H_ell ⊗ H_ell` (dimension `(ell + 1)²`).
    S3 { ell: usize },
}

/// A point of the underlying sphere.
#[derive(Debug, Clone, Copy)]
pub enum Point {
    S2 { theta: f64, phi: f64 },
    S3(SU2Element),
}

impl SpaceTag {
    pub fn ell(&self) -> usize {
        match *self {
            SpaceTag::S2 { ell } | SpaceTag::S3 { ell } => ell,
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            SpaceTag::S2 { ell } => ell + 1,
            SpaceTag::S3 { ell } => (ell + 1) * (ell + 1),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            SpaceTag::S2 { ell } if ell % 2 == 1 => Err(Error::Quaternionic(ell)),
            _ => Ok(()),
        }
    }

    pub fn identity(&self) -> GroupElement {
        match self {
            SpaceTag::S2 { .. } => GroupElement::Su2(SU2Element::identity()),
            SpaceTag::S3 { .. } => GroupElement::So4(SO4Element::identity()),
        }
    }

    /// Haar sample of the acting group.
    pub fn haar(&self, rng: &mut RngStream) -> GroupElement {
        match self {
            SpaceTag::S2 { .. } => GroupElement::Su2(SU2Element::haar(rng)),
            SpaceTag::S3 { .. } => GroupElement::So4(SO4Element::haar(rng)),
        }
    }

    /// Sign `ε_p` in `J f_p = ε_p f_{d−1−p}` for the reference basis.
    pub fn conjugation_sign(&self, p: usize) -> f64 {
        let parity = match *self {
            SpaceTag::S2 { ell } => ell - p,
            SpaceTag::S3 { ell } => {
                let q = self.dim() - 1 - p;
                q / (ell + 1) + q % (ell + 1)
            }
        };
        if parity % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Integer label of position `p`: `(d−1)/2 − p` for odd `d`; for even `d`
    /// labels run `d/2, …, 1, −1, …, −d/2`.
    pub fn label(&self, p: usize) -> i64 {
        position_label(self.dim(), p)
    }

    /// Doubled torus weights of reference vector `p`: `(2k)` on S² and
    /// `(2k₁, 2k₂)` on S³, so the torus acts by `exp(i Σ weight·θ)`.
    pub fn torus_weights(&self, p: usize) -> Vec<i64> {
        let q = self.dim() - 1 - p;
        match *self {
            SpaceTag::S2 { ell } => vec![2 * q as i64 - ell as i64],
            SpaceTag::S3 { ell } => {
                let (s1, s2) = (q / (ell + 1), q % (ell + 1));
                vec![2 * s1 as i64 - ell as i64, 2 * s2 as i64 - ell as i64]
            }
        }
    }

    /// Matrix of `g` on the reference basis, in position order.
    pub fn reference_rep(&self, g: &GroupElement) -> Result<CMatrix> {
        let raw = match (self, g) {
            (SpaceTag::S2 { ell }, GroupElement::Su2(g)) => rep_matrix(*ell, g).entries,
            (SpaceTag::S3 { ell }, GroupElement::So4(g)) => tensor_rep_matrix(*ell, g),
            (SpaceTag::S2 { .. }, _) => {
                return Err(Error::SpaceMismatch("S2 modules need an SU(2) element".into()))
            }
            (SpaceTag::S3 { .. }, _) => {
                return Err(Error::SpaceMismatch("S3 modules need an SO(4) element".into()))
            }
        };
        let d = raw.nrows();
        Ok(CMatrix::from_fn(d, d, |r, c| raw[(d - 1 - r, d - 1 - c)]))
    }

    /// Value of reference basis function `p` at a point.
    pub fn reference_function(&self, p: usize, point: &Point) -> Result<C64> {
        let q = self.dim() - 1 - p;
        match (*self, point) {
            (SpaceTag::S2 { ell }, Point::S2 { theta, phi }) => {
                let m = ell / 2;
                let k = q as i64 - m as i64;
                let phase = I.powu(m as u32);
                Ok(phase * eval_s2(m, k, *theta, *phi)?)
            }
            (SpaceTag::S3 { ell }, Point::S3(x)) => {
                let (s1, s2) = (q / (ell + 1), q % (ell + 1));
                let sign = if s2 % 2 == 0 { 1.0 } else { -1.0 };
                Ok(eval_s3(ell, s1, ell - s2, x)?.conj() * sign)
            }
            _ => Err(Error::SpaceMismatch("point does not lie on this space".into())),
        }
    }

    /// Image of a point under the inverse action, `g⁻¹·x`.
    pub fn act_inverse_on_point(&self, g: &GroupElement, point: &Point) -> Result<Point> {
        match (g, point) {
            (GroupElement::Su2(g), Point::S2 { theta, phi }) => {
                let r = g.rotation();
                let v = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
                // R⁻¹ = Rᵀ
                let w: Vec<f64> = (0..3)
                    .map(|i| (0..3).map(|k| r[k][i] * v[k]).sum())
                    .collect();
                Ok(Point::S2 {
                    theta: w[2].clamp(-1.0, 1.0).acos(),
                    phi: w[1].atan2(w[0]),
                })
            }
            (GroupElement::So4(g), Point::S3(x)) => Ok(Point::S3(g.inverse().act_on_point(x))),
            _ => Err(Error::SpaceMismatch("group element and point disagree".into())),
        }
    }
}

fn position_label(d: usize, p: usize) -> i64 {
    let half = (d / 2) as i64;
    let p = p as i64;
    if d % 2 == 1 {
        half - p
    } else if p < half {
        half - p
    } else {
        half - p - 1
    }
}

/// Normalized matrix coefficient `√(ℓ+1) · ⟨x e_j, e_i⟩` on S³ ≅ SU(2).
pub fn eval_s3(ell: usize, i: usize, j: usize, x: &SU2Element) -> Result<C64> {
    Ok(matrix_coeff(ell, x, j, i)? * ((ell + 1) as f64).sqrt())
}

/// The unitary realifying change of coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct RealifyMatrix {
    pub dim: usize,
    pub entries: CMatrix,
}

impl RealifyMatrix {
    /// Inverse (= adjoint).
    pub fn inverse(&self) -> CMatrix {
        self.entries.adjoint()
    }

    pub fn apply(&self, z: &[C64]) -> Vec<C64> {
        let v = DVector::from_column_slice(z);
        (&self.entries * v).iter().copied().collect()
    }
}

/// Rows `(z_k + z_{−k})/√2` for `k = ℓ..1`, then `z_0` (odd dimension only),
/// then `(z_k − z_{−k})/(i√2)` for `k = 1..ℓ`, in position coordinates.
pub fn realify_matrix(dim: usize) -> Result<RealifyMatrix> {
    if dim < 2 {
        return Err(Error::InvalidArgument(format!("realify needs dim >= 2, got {dim}")));
    }
    let half = dim / 2;
    let mut a = CMatrix::from_element(dim, dim, ZERO);
    let s = C64::new(FRAC_1_SQRT_2, 0.0);
    let t = s / I;
    for p in 0..half {
        a[(p, p)] = s;
        a[(p, dim - 1 - p)] = s;
    }
    if dim % 2 == 1 {
        a[(half, half)] = ONE;
    }
    let offset = dim - half;
    for k in 1..=half {
        let p = half - k;
        let row = offset + k - 1;
        a[(row, p)] = t;
        a[(row, dim - 1 - p)] = -t;
    }
    Ok(RealifyMatrix { dim, entries: a })
}

/// Orthonormal basis with `J v_p = v_{d−1−p}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfConjBasis {
    pub space: SpaceTag,
    pub change: CMatrix,
}

impl SelfConjBasis {
    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn pair(&self, p: usize) -> usize {
        self.dim() - 1 - p
    }

    pub fn label(&self, p: usize) -> i64 {
        self.space.label(p)
    }

    /// Position of a label, if it exists in this module.
    pub fn position(&self, label: i64) -> Option<usize> {
        (0..self.dim()).find(|&p| self.label(p) == label)
    }

    /// Number of positive labels.
    pub fn half(&self) -> usize {
        self.dim() / 2
    }

    pub fn has_zero(&self) -> bool {
        self.dim() % 2 == 1
    }

    /// Coordinates of `J v` given coordinates of `v` in the reference basis.
    pub fn conjugate_reference_coords(&self, v: &[C64]) -> Vec<C64> {
        let d = self.dim();
        let mut out = vec![ZERO; d];
        for (r, z) in v.iter().enumerate() {
            out[d - 1 - r] = z.conj() * self.space.conjugation_sign(r);
        }
        out
    }

    /// Largest deviation from `J v_p = v_{pair(p)}`.
    pub fn pairing_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for p in 0..d {
            let col: Vec<C64> = self.change.column(p).iter().copied().collect();
            let jc = self.conjugate_reference_coords(&col);
            let target = self.change.column(self.pair(p));
            for (x, y) in jc.iter().zip(target.iter()) {
                worst = worst.max((x - y).norm());
            }
        }
        worst
    }

    pub fn unitarity_defect(&self) -> f64 {
        unitarity_defect(&self.change)
    }

    /// Left translate `w_k = L_{g0} v_k`.
    pub fn translated(&self, g0: &GroupElement) -> Result<SelfConjBasis> {
        let d = self.space.reference_rep(g0)?;
        Ok(SelfConjBasis {
            space: self.space,
            change: d * &self.change,
        })
    }

    /// Value of basis function `p` at a point.
    pub fn eval(&self, p: usize, point: &Point) -> Result<C64> {
        let mut total = ZERO;
        for r in 0..self.dim() {
            let u = self.change[(r, p)];
            if u != ZERO {
                total += u * self.space.reference_function(r, point)?;
            }
        }
        Ok(total)
    }
}

/// The torus-adapted self-conjugated basis `h_p = γ_p f_p`.
///
/// Phases: `γ = 1` on positive labels, `γ = ε_p` on their partners, and on the
/// self-paired vector `γ = 1` or `i` according to its conjugation sign.
pub fn torus_adapted_selfconj_basis(space: SpaceTag) -> Result<SelfConjBasis> {
    space.validate()?;
    let d = space.dim();
    let mut change = CMatrix::from_element(d, d, ZERO);
    for p in 0..d / 2 {
        change[(p, p)] = ONE;
        change[(d - 1 - p, d - 1 - p)] = C64::new(space.conjugation_sign(p), 0.0);
    }
    if d % 2 == 1 {
        let mid = d / 2;
        change[(mid, mid)] = if space.conjugation_sign(mid) > 0.0 { ONE } else { I };
    }
    Ok(SelfConjBasis { space, change })
}

/// Haar-distributed real orthogonal matrix (QR of a Gaussian matrix with the
/// sign of `R`'s diagonal absorbed into `Q`).
pub fn haar_orthogonal(d: usize, rng: &mut RngStream) -> DMatrix<f64> {
    let g = DMatrix::<f64>::from_fn(d, d, |_, _| rng.normal());
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for c in 0..d {
        if r[(c, c)] < 0.0 {
            for row in 0..d {
                q[(row, c)] = -q[(row, c)];
            }
        }
    }
    q
}

/// Self-conjugated basis obtained from `reference` by the unitary
/// `A⁻¹ · O · A` for a real orthogonal `O`.
pub fn selfconj_basis_from_orthogonal(
    reference: &SelfConjBasis,
    o: &DMatrix<f64>,
) -> Result<SelfConjBasis> {
    let d = reference.dim();
    if o.nrows() != d || o.ncols() != d {
        return Err(Error::InvalidArgument("orthogonal matrix has wrong size".into()));
    }
    let a = realify_matrix(d)?;
    let oc = o.map(|x| C64::new(x, 0.0));
    let w = a.inverse() * oc * &a.entries;
    Ok(SelfConjBasis {
        space: reference.space,
        change: &reference.change * w,
    })
}

pub fn random_selfconj_basis(reference: &SelfConjBasis, rng: &mut RngStream) -> Result<SelfConjBasis> {
    let o = haar_orthogonal(reference.dim(), rng);
    selfconj_basis_from_orthogonal(reference, &o)
}

/// `change* · D_ref(g) · change`: entry `(m, s)` is `⟨g v_s, v_m⟩`.
pub fn basis_rep_matrix(basis: &SelfConjBasis, g: &GroupElement) -> Result<CMatrix> {
    let d = basis.space.reference_rep(g)?;
    Ok(basis.change.adjoint() * d * &basis.change)
}

/// `A · D(g) · A⁻¹`, returned as its real part together with the largest
/// discarded imaginary part.
#[derive(Debug, Clone)]
pub struct RealifiedRep {
    pub matrix: DMatrix<f64>,
    pub max_imag: f64,
}

impl RealifiedRep {
    pub fn orthogonality_defect(&self) -> f64 {
        let n = self.matrix.nrows();
        let prod = &self.matrix * self.matrix.transpose();
        (prod - DMatrix::<f64>::identity(n, n))
            .iter()
            .map(|x| x.abs())
            .fold(0.0, f64::max)
    }

    pub fn determinant(&self) -> f64 {
        self.matrix.determinant()
    }
}

pub fn realified_rep(basis: &SelfConjBasis, g: &GroupElement) -> Result<RealifiedRep> {
    let a = realify_matrix(basis.dim())?;
    let d = basis_rep_matrix(basis, g)?;
    let m = &a.entries * d * a.inverse();
    let max_imag = m.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    Ok(RealifiedRep {
        matrix: m.map(|z| z.re),
        max_imag,
    })
}

/// Whether `z_{−k} = conj(z_k)` (and `z_0` real) holds within `tol`.
pub fn has_real_symmetry(z: &[C64], tol: f64) -> bool {
    let d = z.len();
    (0..d).all(|p| (z[d - 1 - p] - z[p].conj()).norm() <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::irrep::max_entry_diff;
    use std::f64::consts::{PI, SQRT_2};

    fn s2(ell: usize) -> SpaceTag {
        SpaceTag::S2 { ell }
    }

    #[test]
    fn realify_dim3() {
        let a = realify_matrix(3).unwrap().entries;
        let r = FRAC_1_SQRT_2;
        let t = C64::new(r, 0.0) / I;
        let want = CMatrix::from_row_slice(
            3,
            3,
            &[
                C64::new(r, 0.0),
                ZERO,
                C64::new(r, 0.0),
                ZERO,
                ONE,
                ZERO,
                t,
                ZERO,
                -t,
            ],
        );
        assert!(max_entry_diff(&a, &want) < 1e-15);
        let z = [C64::new(1.0, 1.0), ZERO, C64::new(1.0, -1.0)];
        let out = realify_matrix(3).unwrap().apply(&z);
        assert!((out[0] - SQRT_2).norm() < 1e-14);
        assert!(out[1].norm() < 1e-15);
        assert!((out[2] - SQRT_2).norm() < 1e-14);
        assert!(realify_matrix(1).is_err());
    }

    #[test]
    fn realify_unitary_all_dims() {
        for d in 2..12 {
            let a = realify_matrix(d).unwrap();
            assert!(unitarity_defect(&a.entries) < 1e-14);
            let round = a.inverse() * &a.entries;
            assert!(max_entry_diff(&round, &CMatrix::identity(d, d)) < 1e-13);
        }
    }

    #[test]
    fn realify_reality_criterion() {
        let mut rng = RngStream::new(2, 0);
        for d in 2..10 {
            let a = realify_matrix(d).unwrap();
            let mut z: Vec<C64> = (0..d).map(|_| C64::new(rng.normal(), rng.normal())).collect();
            for p in 0..d / 2 {
                z[d - 1 - p] = z[p].conj();
            }
            if d % 2 == 1 {
                z[d / 2].im = 0.0;
            }
            assert!(has_real_symmetry(&z, 1e-15));
            assert!(a.apply(&z).iter().all(|w| w.im.abs() < 1e-12));
            z[0] += C64::new(0.0, 0.1);
            assert!(!has_real_symmetry(&z, 1e-12));
            assert!(a.apply(&z).iter().any(|w| w.im.abs() > 1e-12));
        }
    }

    #[test]
    fn torus_basis_s2() {
        let b = torus_adapted_selfconj_basis(s2(2)).unwrap();
        assert!(b.pairing_defect() < 1e-13);
        assert_eq!(
            torus_adapted_selfconj_basis(s2(3)),
            Err(Error::Quaternionic(3))
        );
        let b = torus_adapted_selfconj_basis(s2(4)).unwrap();
        let theta = 0.61;
        let d = basis_rep_matrix(&b, &GroupElement::Su2(SU2Element::torus(theta))).unwrap();
        for p in 0..5 {
            let k = b.label(p) as f64;
            for q in 0..5 {
                let want = if p == q {
                    C64::from_polar(1.0, 2.0 * k * theta)
                } else {
                    ZERO
                };
                assert!((d[(q, p)] - want).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn torus_basis_s3() {
        for ell in 1..=3 {
            let b = torus_adapted_selfconj_basis(SpaceTag::S3 { ell }).unwrap();
            assert!(b.pairing_defect() < 1e-13);
            let (t1, t2) = (0.3, -1.2);
            let g = GroupElement::So4(SO4Element::torus(t1, t2));
            let d = basis_rep_matrix(&b, &g).unwrap();
            for p in 0..b.dim() {
                let w = b.space.torus_weights(p);
                let want = C64::from_polar(1.0, w[0] as f64 * t1 + w[1] as f64 * t2);
                assert!((d[(p, p)] - want).norm() < 1e-13);
                for q in 0..b.dim() {
                    if q != p {
                        assert!(d[(q, p)].norm() < 1e-13);
                    }
                }
                let wp = b.space.torus_weights(b.pair(p));
                assert_eq!(wp, vec![-w[0], -w[1]]);
            }
        }
    }

    #[test]
    fn labels() {
        let b = torus_adapted_selfconj_basis(s2(4)).unwrap();
        let labels: Vec<i64> = (0..5).map(|p| b.label(p)).collect();
        assert_eq!(labels, vec![2, 1, 0, -1, -2]);
        let b = torus_adapted_selfconj_basis(SpaceTag::S3 { ell: 1 }).unwrap();
        let labels: Vec<i64> = (0..4).map(|p| b.label(p)).collect();
        assert_eq!(labels, vec![2, 1, -1, -2]);
    }

    #[test]
    fn random_bases_are_selfconjugate() {
        let mut rng = RngStream::new(31, 0);
        for ell in [2usize, 4, 6, 8] {
            let reference = torus_adapted_selfconj_basis(s2(ell)).unwrap();
            let same = selfconj_basis_from_orthogonal(
                &reference,
                &DMatrix::<f64>::identity(ell + 1, ell + 1),
            )
            .unwrap();
            assert!(max_entry_diff(&same.change, &reference.change) < 1e-14);
            for _ in 0..5 {
                let b = random_selfconj_basis(&reference, &mut rng).unwrap();
                assert!(b.pairing_defect() < 1e-12);
                assert!(b.unitarity_defect() < 1e-12);
                let g = s2(ell).haar(&mut rng);
                let d = basis_rep_matrix(&b, &g).unwrap();
                assert!(unitarity_defect(&d) < 1e-12);
            }
        }
        let reference = torus_adapted_selfconj_basis(SpaceTag::S3 { ell: 2 }).unwrap();
        let b = random_selfconj_basis(&reference, &mut rng).unwrap();
        assert!(b.pairing_defect() < 1e-12);
    }

    #[test]
    fn basis_rep_homomorphism_and_real_rows() {
        let mut rng = RngStream::new(32, 0);
        let reference = torus_adapted_selfconj_basis(s2(6)).unwrap();
        let b = random_selfconj_basis(&reference, &mut rng).unwrap();
        let id = basis_rep_matrix(&b, &s2(6).identity()).unwrap();
        assert!(max_entry_diff(&id, &CMatrix::identity(7, 7)) < 1e-13);
        let mid = 3;
        for _ in 0..50 {
            let g = s2(6).haar(&mut rng);
            let h = s2(6).haar(&mut rng);
            let gh = g.compose(&h).unwrap();
            let lhs = basis_rep_matrix(&b, &gh).unwrap();
            let rhs = basis_rep_matrix(&b, &g).unwrap() * basis_rep_matrix(&b, &h).unwrap();
            assert!(max_entry_diff(&lhs, &rhs) < 1e-12);
            // the middle basis vector is a real function: D_{0,-s} = conj D_{0,s}
            for s in 0..7 {
                let x = lhs[(mid, s)];
                let y = lhs[(mid, 6 - s)];
                assert!((x - y.conj()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn realified_is_real_orthogonal() {
        let mut rng = RngStream::new(33, 0);
        for ell in [2usize, 4, 6, 8] {
            let reference = torus_adapted_selfconj_basis(s2(ell)).unwrap();
            let b = random_selfconj_basis(&reference, &mut rng).unwrap();
            let id = realified_rep(&b, &s2(ell).identity()).unwrap();
            assert!(id.orthogonality_defect() < 1e-13);
            assert!((id.matrix.clone() - DMatrix::<f64>::identity(ell + 1, ell + 1)).amax() < 1e-13);
            for _ in 0..20 {
                let g = s2(ell).haar(&mut rng);
                let r = realified_rep(&b, &g).unwrap();
                assert!(r.max_imag < 1e-12);
                assert!(r.orthogonality_defect() < 1e-12);
                assert!((r.determinant() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn s2_functions_transform_by_rep_matrix() {
        // v_p(g⁻¹x) = Σ_r D_{rp}(g) v_r(x)
        let mut rng = RngStream::new(34, 0);
        for ell in [0usize, 2, 4, 6] {
            let space = s2(ell);
            let reference = torus_adapted_selfconj_basis(space).unwrap();
            let b = if ell > 0 {
                random_selfconj_basis(&reference, &mut rng).unwrap()
            } else {
                reference
            };
            let g = space.haar(&mut rng);
            let d = basis_rep_matrix(&b, &g).unwrap();
            for _ in 0..5 {
                let x = Point::S2 {
                    theta: rng.uniform() * PI,
                    phi: rng.uniform() * 2.0 * PI,
                };
                let y = space.act_inverse_on_point(&g, &x).unwrap();
                for p in 0..b.dim() {
                    let lhs = b.eval(p, &y).unwrap();
                    let rhs: C64 = (0..b.dim()).map(|r| d[(r, p)] * b.eval(r, &x).unwrap()).sum();
                    assert!((lhs - rhs).norm() < 1e-12, "ell={ell} p={p}");
                }
                // conjugation pairing at the level of functions
                for p in 0..b.dim() {
                    let v = b.eval(p, &x).unwrap();
                    let w = b.eval(b.pair(p), &x).unwrap();
                    assert!((v.conj() - w).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn s3_functions_transform_by_rep_matrix() {
        let mut rng = RngStream::new(35, 0);
        for ell in 0..=3usize {
            let space = SpaceTag::S3 { ell };
            let reference = torus_adapted_selfconj_basis(space).unwrap();
            let b = if ell > 0 {
                random_selfconj_basis(&reference, &mut rng).unwrap()
            } else {
                reference
            };
            let g = space.haar(&mut rng);
            let d = basis_rep_matrix(&b, &g).unwrap();
            for _ in 0..3 {
                let x = Point::S3(SU2Element::haar(&mut rng));
                let y = space.act_inverse_on_point(&g, &x).unwrap();
                for p in 0..b.dim() {
                    let lhs = b.eval(p, &y).unwrap();
                    let rhs: C64 = (0..b.dim()).map(|r| d[(r, p)] * b.eval(r, &x).unwrap()).sum();
                    assert!((lhs - rhs).norm() < 1e-11, "ell={ell} p={p}");
                    let w = b.eval(b.pair(p), &x).unwrap();
                    assert!((b.eval(p, &x).unwrap().conj() - w).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn eval_s3_examples() {
        let mut rng = RngStream::new(36, 0);
        let x = SU2Element::haar(&mut rng);
        assert!((eval_s3(0, 0, 0, &x).unwrap() - ONE).norm() < 1e-15);
        assert!(eval_s3(2, 3, 0, &x).is_err());
    }

    #[test]
    fn mismatched_group_is_rejected() {
        let b = torus_adapted_selfconj_basis(s2(2)).unwrap();
        let g = GroupElement::So4(SO4Element::identity());
        assert!(matches!(basis_rep_matrix(&b, &g), Err(Error::SpaceMismatch(_))));
    }
}
