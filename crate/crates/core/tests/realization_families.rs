use approx::assert_abs_diff_eq;
use cfent_core::linalg::{c64, random_special_unitary, random_unitary, svd, CMatrix};
use cfent_core::realization::{
    canonicalize, check_conditions, deformed_linear_system, refine, residual, DeformationSpec, FamilyTag,
    SolutionFamily,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn every_family_passes_its_conditions() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for tag in FamilyTag::ALL {
        let mut worst: f64 = 0.0;
        for _ in 0..200 {
            let pair = SolutionFamily::random(tag, &mut rng).sample(&mut rng).unwrap();
            let report = check_conditions(&pair.phis(), pair.spec).unwrap();
            assert!(report.pass, "{tag}: {report:?}");
            worst = worst.max(report.max_residual());
        }
        assert!(worst < 1e-10, "{tag}: worst residual {worst}");
    }
}

#[test]
fn declared_mode2_coefficients_match_svd() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for tag in FamilyTag::ALL {
        for _ in 0..50 {
            let pair = SolutionFamily::random(tag, &mut rng).sample(&mut rng).unwrap();
            let s1 = svd(&pair.phi1).singular_values;
            let s2 = svd(&pair.phi2).singular_values;
            for (a, b) in s1.iter().zip(&pair.d1) {
                assert_abs_diff_eq!(*a, *b, epsilon = 1e-12);
            }
            for (a, b) in s2.iter().zip(&pair.declared_lambda2) {
                assert_abs_diff_eq!(*a, *b, epsilon = 1e-12);
            }
        }
    }
}

#[test]
fn canonical_frame_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for tag in FamilyTag::ALL {
        for _ in 0..30 {
            let pair = SolutionFamily::random(tag, &mut rng).sample(&mut rng).unwrap();
            let c = canonicalize(&pair.phi1, &pair.phi2).unwrap();
            assert!((c.phi1() - &pair.phi1).norm() < 1e-12, "{tag}");
            assert!((c.phi2() - &pair.phi2).norm() < 1e-12, "{tag}");
            let back = &c.u1 * &c.phi2_tilde * c.v1.adjoint();
            assert!((back - &pair.phi2).norm() < 1e-12, "{tag}");
        }
    }
}

/// Cofactor expansion of the 3×3 system, built from its stated rows.
fn determinant_oracle(l1: f64, l2: f64, a: f64, b: f64, chi2: f64) -> f64 {
    let d = chi2 - 2.0;
    let s = l1 * l1 - l2 * l2;
    let c = chi2 * l1 * l2 * (l2 * l2 - l1 * l1);
    let m = [
        [2.0 * d * a * a * b * b, -d * a * b * (a * a - b * b), 0.0],
        [
            -d * a * b * (a * a - b * b),
            0.5 * (chi2 * s * s + d * (a * a - b * b).powi(2)),
            c,
        ],
        [0.0, c, -0.5 * (chi2 * s * s - d)],
    ];
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

#[test]
fn determinant_identity_over_random_draws() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for _ in 0..1000 {
        let theta: f64 = rng.random_range(0.0..std::f64::consts::FRAC_PI_2);
        let (l2, l1) = theta.sin_cos();
        let u1 = random_special_unitary(2, &mut rng);
        let (u, v) = (u1[(0, 0)], u1[(0, 1)]);
        let chi2 = rng.random_range(0.0..4.0);
        let sys = deformed_linear_system([l1, l2], u, v, chi2).unwrap();
        let closed = -chi2 * (chi2 - 2.0) * u.norm_sqr() * v.norm_sqr() * (l1 * l1 - l2 * l2).powi(2);
        assert_abs_diff_eq!(sys.determinant, closed, epsilon = 1e-12);
        assert_abs_diff_eq!(sys.determinant, determinant_oracle(l1, l2, u.norm(), v.norm(), chi2), epsilon = 1e-12);
    }
}

#[test]
fn refinement_recovers_a_solution() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    let pair = SolutionFamily::random(FamilyTag::ThreeModeDistinct, &mut rng).sample(&mut rng).unwrap();
    let mut phis = pair.phis().to_vec();
    phis[1][(0, 1)] += c64(1e-3, -1e-3);
    let before = residual(&phis, pair.spec).unwrap();
    let out = refine(&phis, pair.spec).unwrap();
    assert!(before > 1e-4);
    assert!(out.converged && out.residual < 1e-10, "{out:?}");
}

fn frame_strategy() -> impl Strategy<Value = (u64, usize)> {
    (any::<u64>(), 0usize..FamilyTag::ALL.len())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn conditions_are_frame_covariant((seed, which) in frame_strategy()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tag = FamilyTag::ALL[which];
        let pair = SolutionFamily::random(tag, &mut rng).sample(&mut rng).unwrap();
        let n = pair.d1.len();
        let u = random_unitary(n, &mut rng);
        let v = random_unitary(n, &mut rng);
        // a common outer frame preserves solutions of the undeformed conditions
        if !tag.is_deformed() {
            let moved: Vec<CMatrix> = pair.phis().iter().map(|p| &u * p * v.adjoint()).collect();
            prop_assert!(residual(&moved, pair.spec).unwrap() < 1e-10);
        }
        // a global phase on one mode always does
        let mut phased = pair.phis().to_vec();
        phased[1] *= Complex64::from_polar(1.0, seed as f64 * 1e-3);
        prop_assert!(residual(&phased, pair.spec).unwrap() < 1e-10);
    }

    #[test]
    fn determinant_vanishes_on_special_lines(chi_choice in 0usize..2, theta in 0.0f64..1.5, a in 0.0f64..std::f64::consts::TAU) {
        let chi2 = [0.0, 2.0][chi_choice];
        let (l2, l1) = theta.sin_cos();
        let (s, c) = a.sin_cos();
        let sys = deformed_linear_system([l1, l2], c64(c, 0.0), c64(s, 0.0), chi2).unwrap();
        prop_assert!(sys.determinant.abs() < 1e-14);
        let spec = DeformationSpec::new(chi2).unwrap();
        prop_assert!((spec.delta() - (chi2 - 2.0)).abs() < 1e-15);
    }
}
