//! Points of SU(2), SO(4) = SU(2)×SU(2)/±1, and their Haar measures.
//!
//! An SU(2) element is stored in the chart `(a, b)` of the matrix
//!
//! ```text
//!     [  a    b  ]
//!     [ -b̄    ā  ]      |a|² + |b|² = 1
//! ```
//!
//! and is renormalized after every construction and composition.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SU2Element {
    a: C64,
    b: C64,
}

impl SU2Element {
    /// Renormalizes `(a, b)` onto the unit 3-sphere.
    pub fn new(a: C64, b: C64) -> Result<Self> {
        let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::DegenerateElement);
        }
        Ok(Self {
            a: a / norm,
            b: b / norm,
        })
    }

    pub fn identity() -> Self {
        Self {
            a: C64::new(1.0, 0.0),
            b: C64::new(0.0, 0.0),
        }
    }

    pub fn a(&self) -> C64 {
        self.a
    }

    pub fn b(&self) -> C64 {
        self.b
    }

    /// Diagonal torus element `diag(e^{iθ}, e^{-iθ})`.
    pub fn torus(theta: f64) -> Self {
        Self {
            a: C64::from_polar(1.0, theta),
            b: C64::new(0.0, 0.0),
        }
    }

    /// Matrix product `self · other`.
    pub fn compose(&self, other: &SU2Element) -> SU2Element {
        let a = self.a * other.a - self.b * other.b.conj();
        let b = self.a * other.b + self.b * other.a.conj();
        // renormalize to control drift
        let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
        SU2Element { a: a / n, b: b / n }
    }

    pub fn inverse(&self) -> SU2Element {
        SU2Element {
            a: self.a.conj(),
            b: -self.b,
        }
    }

    pub fn neg(&self) -> SU2Element {
        SU2Element {
            a: -self.a,
            b: -self.b,
        }
    }

    /// Row-major 2×2 matrix.
    pub fn matrix(&self) -> [[C64; 2]; 2] {
        [[self.a, self.b], [-self.b.conj(), self.a.conj()]]
    }

    pub fn det(&self) -> C64 {
        let m = self.matrix();
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    /// Haar-distributed element: a normalized standard Gaussian vector of R⁴.
    pub fn haar(rng: &mut RngStream) -> SU2Element {
        loop {
            let x = [rng.normal(), rng.normal(), rng.normal(), rng.normal()];
            if let Ok(g) = SU2Element::new(C64::new(x[0], x[1]), C64::new(x[2], x[3])) {
                return g;
            }
        }
    }

    /// ZYZ Euler angles: `exp(-iα σz/2) · exp(-iβ σy/2) · exp(-iγ σz/2)`.
    pub fn from_euler(alpha: f64, beta: f64, gamma: f64) -> SU2Element {
        let rz = |t: f64| SU2Element {
            a: C64::from_polar(1.0, -t / 2.0),
            b: C64::new(0.0, 0.0),
        };
        let ry = SU2Element {
            a: C64::new((beta / 2.0).cos(), 0.0),
            b: C64::new(-(beta / 2.0).sin(), 0.0),
        };
        rz(alpha).compose(&ry).compose(&rz(gamma))
    }

    /// Rotation of R³ covered by this element: `R_ij = ½ tr(σ_i g σ_j g†)`.
    pub fn rotation(&self) -> [[f64; 3]; 3] {
        let zero = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        let pauli = [
            [[zero, one], [one, zero]],
            [[zero, -i], [i, zero]],
            [[one, zero], [zero, -one]],
        ];
        let mul = |x: &[[C64; 2]; 2], y: &[[C64; 2]; 2]| {
            let mut out = [[zero; 2]; 2];
            for r in 0..2 {
                for c in 0..2 {
                    out[r][c] = x[r][0] * y[0][c] + x[r][1] * y[1][c];
                }
            }
            out
        };
        let u = self.matrix();
        let u_dag = self.inverse().matrix();
        let mut rot = [[0.0; 3]; 3];
        for (r, row) in rot.iter_mut().enumerate() {
            for (c, entry) in row.iter_mut().enumerate() {
                let m = mul(&mul(&pauli[r], &u), &mul(&pauli[c], &u_dag));
                *entry = 0.5 * (m[0][0] + m[1][1]).re;
            }
        }
        rot
    }

    pub fn max_abs_diff(&self, other: &SU2Element) -> f64 {
        (self.a - other.a).norm().max((self.b - other.b).norm())
    }
}

/// Element of SO(4) as a pair of SU(2) elements; `(g1, g2)` and `(-g1, -g2)`
/// are the same point. It acts on S³ ≅ SU(2) by `x ↦ g1 · x · g2⁻¹`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SO4Element {
    pub g1: SU2Element,
    pub g2: SU2Element,
}

impl SO4Element {
    pub fn new(g1: SU2Element, g2: SU2Element) -> Self {
        Self { g1, g2 }
    }

    pub fn identity() -> Self {
        Self::new(SU2Element::identity(), SU2Element::identity())
    }

    pub fn compose(&self, other: &SO4Element) -> SO4Element {
        SO4Element::new(self.g1.compose(&other.g1), self.g2.compose(&other.g2))
    }

    pub fn inverse(&self) -> SO4Element {
        SO4Element::new(self.g1.inverse(), self.g2.inverse())
    }

    pub fn neg(&self) -> SO4Element {
        SO4Element::new(self.g1.neg(), self.g2.neg())
    }

    pub fn haar(rng: &mut RngStream) -> SO4Element {
        let g1 = SU2Element::haar(rng);
        let g2 = SU2Element::haar(rng);
        SO4Element::new(g1, g2)
    }

    pub fn torus(theta1: f64, theta2: f64) -> SO4Element {
        SO4Element::new(SU2Element::torus(theta1), SU2Element::torus(theta2))
    }

    /// Image of a point of S³ under the action.
    pub fn act_on_point(&self, x: &SU2Element) -> SU2Element {
        self.g1.compose(x).compose(&self.g2.inverse())
    }

    fn dist(&self, other: &SO4Element) -> f64 {
        self.g1.max_abs_diff(&other.g1).max(self.g2.max_abs_diff(&other.g2))
    }

    /// Equality modulo the simultaneous sign flip, within `tol`.
    pub fn approx_eq(&self, other: &SO4Element, tol: f64) -> bool {
        self.dist(other) <= tol || self.dist(&other.neg()) <= tol
    }
}

impl PartialEq for SO4Element {
    fn eq(&self, other: &Self) -> bool {
        (self.g1 == other.g1 && self.g2 == other.g2)
            || (self.g1 == other.g1.neg() && self.g2 == other.g2.neg())
    }
}

/// A point of the acting group: SU(2) (covering SO(3) on S²) or SO(4) (on S³).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "group", rename_all = "lowercase")]
pub enum GroupElement {
    Su2(SU2Element),
    So4(SO4Element),
}

impl GroupElement {
    pub fn inverse(&self) -> GroupElement {
        match self {
            GroupElement::Su2(g) => GroupElement::Su2(g.inverse()),
            GroupElement::So4(g) => GroupElement::So4(g.inverse()),
        }
    }

    pub fn compose(&self, other: &GroupElement) -> Result<GroupElement> {
        match (self, other) {
            (GroupElement::Su2(g), GroupElement::Su2(h)) => Ok(GroupElement::Su2(g.compose(h))),
            (GroupElement::So4(g), GroupElement::So4(h)) => Ok(GroupElement::So4(g.compose(h))),
            _ => Err(Error::SpaceMismatch(
                "cannot compose SU(2) and SO(4) elements".into(),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn construction_examples() {
        let g = SU2Element::new(c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        assert_eq!(g, SU2Element::identity());
        let g = SU2Element::new(c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        assert_eq!(g.a(), c(0.0, 0.0));
        let g = SU2Element::new(c(3.0, 0.0), c(0.0, 4.0)).unwrap();
        assert!((g.a() - c(0.6, 0.0)).norm() < 1e-15);
        assert!((g.b() - c(0.0, 0.8)).norm() < 1e-15);
        assert_eq!(
            SU2Element::new(c(0.0, 0.0), c(0.0, 0.0)),
            Err(Error::DegenerateElement)
        );
        assert_eq!(
            Error::DegenerateElement.to_string(),
            "degenerate group element"
        );
    }

    #[test]
    fn inverse_and_torus() {
        let g = SU2Element::new(c(0.3, -0.2), c(0.5, 0.7)).unwrap();
        let inv = g.inverse();
        assert_eq!(inv.a(), g.a().conj());
        assert_eq!(inv.b(), -g.b());
        assert!(g.compose(&inv).max_abs_diff(&SU2Element::identity()) < 1e-14);
        assert!(SU2Element::identity().compose(&g).max_abs_diff(&g) < 1e-15);

        let t = SU2Element::torus(0.4).compose(&SU2Element::torus(1.1));
        assert!(t.max_abs_diff(&SU2Element::torus(1.5)) < 1e-15);
        assert_eq!(SU2Element::torus(0.0), SU2Element::identity());
        assert!((SU2Element::torus(std::f64::consts::PI).a() - c(-1.0, 0.0)).norm() < 1e-15);
        assert!((SU2Element::torus(std::f64::consts::FRAC_PI_2).a() - c(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn haar_group_laws() {
        let mut rng = RngStream::new(11, 0);
        for _ in 0..200 {
            let g = SU2Element::haar(&mut rng);
            let h = SU2Element::haar(&mut rng);
            let k = SU2Element::haar(&mut rng);
            assert!((g.compose(&h).det() - 1.0).norm() < 1e-13);
            let lhs = g.compose(&h).compose(&k);
            let rhs = g.compose(&h.compose(&k));
            assert!(lhs.max_abs_diff(&rhs) < 1e-14);
            assert!(g.inverse().inverse().max_abs_diff(&g) < 1e-14);
        }
    }

    #[test]
    fn so4_sign_flip_equality() {
        let mut rng = RngStream::new(5, 1);
        let g = SO4Element::haar(&mut rng);
        assert_eq!(g, g.neg());
        assert!(g.approx_eq(&g.neg(), 0.0));
        let h = SO4Element::new(g.g1, g.g2.neg());
        assert!(!g.approx_eq(&h, 1e-6));
    }

    #[test]
    fn rotation_is_orthogonal_homomorphism() {
        let mut rng = RngStream::new(9, 0);
        let g = SU2Element::haar(&mut rng);
        let h = SU2Element::haar(&mut rng);
        let (rg, rh, rgh) = (g.rotation(), h.rotation(), g.compose(&h).rotation());
        for i in 0..3 {
            for j in 0..3 {
                let prod: f64 = (0..3).map(|k| rg[i][k] * rh[k][j]).sum();
                assert!((prod - rgh[i][j]).abs() < 1e-13);
                let gram: f64 = (0..3).map(|k| rg[i][k] * rg[j][k]).sum();
                assert!((gram - if i == j { 1.0 } else { 0.0 }).abs() < 1e-13);
            }
        }
    }
}
