use std::sync::Arc;

use num_complex::Complex64 as C64;
use proptest::prelude::*;

use invfield::bases::{
    has_real_symmetry, random_selfconj_basis, realify_matrix, torus_adapted_selfconj_basis, SelfConjBasis, SpaceTag,
};
use invfield::fields::{bijoux_sample, rotate_coeffs, sample_batch, sample_independent, sample_invariant_gaussian, Marginal};
use invfield::irrep::CMatrix;
use invfield::mixing::moduli_gap;
use invfield::stats::{check_column_structure, estimate_cov, invariance_test, TestReport};
use invfield::RngStream;

fn space(which: u8, ell: usize) -> SpaceTag {
    if which == 0 {
        SpaceTag::S2 { ell: 2 * ell }
    } else {
        SpaceTag::S3 { ell }
    }
}

fn random_basis(tag: SpaceTag, rng: &mut RngStream) -> SelfConjBasis {
    let torus = torus_adapted_selfconj_basis(tag).unwrap();
    random_selfconj_basis(&torus, rng).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reject_decisions_are_monotone(p in 0.0f64..=1.0, stat in 0.0f64..10.0) {
        let r = TestReport::new("t", stat, p, 100);
        prop_assert!(r.rejects(0.05) || !r.rejects(0.01));
        prop_assert!(r.rejects(0.01) || !r.rejects(0.001));
        prop_assert_eq!(r.reject_at["0.05"], p < 0.05);
        prop_assert_eq!(r.reject_at["0.001"], p < 0.001);
    }

    #[test]
    fn rotation_keeps_fields_real(seed in 0u64..5000, which in 0u8..2, ell in 1usize..=3) {
        let mut rng = RngStream::new(seed, 0);
        let tag = space(which, ell);
        let b = Arc::new(random_basis(tag, &mut rng));
        let g = tag.haar(&mut rng);
        for marginal in [Marginal::Gaussian { c: 1.0 }, Marginal::UniformDisc { r: 2.0 }, Marginal::TwoPoint { rho: 1.0 }] {
            let a = sample_independent(&b, marginal, &mut rng).unwrap();
            let moved = rotate_coeffs(&b, &g, &a).unwrap();
            prop_assert!(moved.reality_defect() < 1e-12 * (1.0 + a.norm()));
            prop_assert!((moved.norm() - a.norm()).abs() < 1e-12 * (1.0 + a.norm()));
        }
    }

    #[test]
    fn gap_sign_symmetry(seed in 0u64..5000, ell in 1usize..=4) {
        let mut rng = RngStream::new(seed, 1);
        let tag = SpaceTag::S2 { ell: 2 * ell };
        let b = random_basis(tag, &mut rng);
        let g = tag.haar(&mut rng);
        for m_i in 1..=ell as i64 {
            for m in 1..=ell as i64 {
                let plus = moduli_gap(&b, &g, m_i, m).unwrap();
                let minus = moduli_gap(&b, &g, m_i, -m).unwrap();
                prop_assert_eq!(plus, -minus);
            }
        }
    }

    #[test]
    fn realify_round_trip_and_reality(seed in 0u64..5000, dim in 2usize..=12) {
        let mut rng = RngStream::new(seed, 2);
        let a = realify_matrix(dim).unwrap();
        let prod = a.inverse() * &a.entries;
        let id = CMatrix::identity(dim, dim);
        prop_assert!((prod - id).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-13);
        let mut z: Vec<C64> = (0..dim).map(|_| C64::new(rng.normal(), rng.normal())).collect();
        for p in 0..dim / 2 {
            z[dim - 1 - p] = z[p].conj();
        }
        if dim % 2 == 1 {
            z[dim / 2].im = 0.0;
        }
        prop_assert!(has_real_symmetry(&z, 1e-12));
        prop_assert!(a.apply(&z).iter().all(|w| w.im.abs() < 1e-12));
        z[0] += C64::new(0.0, 0.5);
        prop_assert!(!has_real_symmetry(&z, 1e-12));
        prop_assert!(a.apply(&z).iter().any(|w| w.im.abs() > 1e-12));
    }
}

#[test]
fn real_row_has_no_gap() {
    let mut rng = RngStream::new(3, 0);
    for ell in [2usize, 4, 6] {
        let b = random_basis(SpaceTag::S2 { ell }, &mut rng);
        for _ in 0..10_000 {
            let g = b.space.haar(&mut rng);
            for m in 1..=(ell / 2) as i64 {
                assert!(moduli_gap(&b, &g, 0, m).unwrap().abs() < 1e-12);
            }
        }
    }
}

#[test]
fn column_structure_ignores_column_order() {
    let alpha = [C64::new(0.6, 0.0), C64::new(0.0, 0.8), C64::new(0.0, 0.0)];
    let draws = sample_batch(4000, &RngStream::new(4, 0), |r| bijoux_sample(2, &alpha, r)).unwrap();
    let scaled: Vec<CMatrix> = draws
        .iter()
        .map(|s| CMatrix::from_fn(3, 3, |i, j| s.b[(i, j)] * if j == 2 { 1.5 } else { 1.0 }))
        .collect();
    for mats in [draws.iter().map(|s| s.b.clone()).collect::<Vec<_>>(), scaled] {
        let base = check_column_structure(&mats).unwrap();
        for perm in [[1, 0, 2], [2, 0, 1], [0, 2, 1]] {
            let permuted: Vec<CMatrix> = mats
                .iter()
                .map(|m| CMatrix::from_fn(3, 3, |i, j| m[(i, perm[j])]))
                .collect();
            assert_eq!(check_column_structure(&permuted).unwrap().pass, base.pass);
        }
    }
}

#[test]
fn rotated_covariance_agrees() {
    let mut rng = RngStream::new(5, 0);
    for tag in [SpaceTag::S2 { ell: 4 }, SpaceTag::S3 { ell: 1 }] {
        let b = Arc::new(random_basis(tag, &mut rng));
        let draws = sample_batch(20_000, &rng.split(1), |r| sample_invariant_gaussian(&b, 2.0, r)).unwrap();
        let base: Vec<Vec<C64>> = draws.iter().map(|a| a.values.clone()).collect();
        let before = estimate_cov(&base).unwrap();
        for _ in 0..3 {
            let g = tag.haar(&mut rng);
            let moved: Vec<Vec<C64>> = draws.iter().map(|a| rotate_coeffs(&b, &g, a).unwrap().values).collect();
            let after = estimate_cov(&moved).unwrap();
            for (i, (x, y)) in before.c_hat.iter().zip(after.c_hat.iter()).enumerate() {
                let se = before.std_err.as_slice()[i].hypot(after.std_err.as_slice()[i]);
                assert!((x - y).norm() < 4.0 * se, "entry {i}: {x} vs {y}, se {se}");
            }
        }
    }
}

#[test]
fn gaussian_moments() {
    let b = Arc::new(torus_adapted_selfconj_basis(SpaceTag::S2 { ell: 6 }).unwrap());
    let n = 20_000;
    let draws = sample_batch(n, &RngStream::new(6, 0), |r| sample_invariant_gaussian(&b, 1.0, r)).unwrap();
    for p in 0..b.dim() {
        let xs: Vec<C64> = draws.iter().map(|a| a.values[p]).collect();
        let mean: C64 = xs.iter().sum::<C64>() / n as f64;
        assert!(mean.norm() < 3.0 * (2.0 / n as f64).sqrt(), "mean of position {p}: {mean}");
        if b.label(p) != 0 {
            // phase invariance forces E[a_k^2] = 0
            let sq: C64 = xs.iter().map(|z| z * z).sum::<C64>() / n as f64;
            let se = (xs.iter().map(|z| z.norm_sqr().powi(2)).sum::<f64>() / n as f64 / n as f64).sqrt();
            assert!(sq.norm() < 3.0 * se, "E[a^2] at position {p}: {sq}, se {se}");
        }
    }
}

#[test]
fn tests_are_deterministic() {
    let b = Arc::new(torus_adapted_selfconj_basis(SpaceTag::S2 { ell: 4 }).unwrap());
    let mut grng = RngStream::new(7, 0);
    let gs: Vec<_> = (0..3).map(|_| b.space.haar(&mut grng)).collect();
    let run = || {
        invariance_test(|r| sample_independent(&b, Marginal::UniformDisc { r: 1.0 }, r), &b, &gs, 1000, &RngStream::new(8, 0))
            .unwrap()
    };
    let (x, y) = (run(), run());
    assert_eq!(x.p_value, y.p_value);
    assert_eq!(x.statistic, y.statistic);
}
