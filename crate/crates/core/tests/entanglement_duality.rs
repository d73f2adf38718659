use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, LN_2, TAU};

use approx::assert_abs_diff_eq;
use cfent_core::entanglement::{
    entropy_from_weights, entropy_k, entropy_pair_3mode, entropy_s2_threeangle, entropy_tr_w,
    entropy_two_equal_s1, entropy_two_equal_s2, purity_theta, quasiboson_phi_matrix, s2, schmidt,
};
use cfent_core::linalg::{random_unit_vector, random_unitary, CMatrix};
use cfent_core::realization::{
    all_equal_diagonal_from_k, check_nondeformed, three_mode_distinct_from_angles, FamilyTag, Frame, Params,
    SolutionFamily, SolutionPair,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LN_3: f64 = 1.098_612_288_668_109_8;

fn svd_entropies(pair: &SolutionPair) -> (f64, f64) {
    (
        schmidt(&pair.phi1).unwrap().entropy(),
        schmidt(&pair.phi2).unwrap().entropy(),
    )
}

fn in_ln2_ln3(s: f64) -> bool {
    (LN_2 - 1e-10..=LN_3 + 1e-10).contains(&s)
}

#[test]
fn distinct_pair_closed_forms_match_svd() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..150 {
        let t11 = rng.random_range(0.05..FRAC_PI_2 - 0.05);
        let t21 = rng.random_range(0.0..FRAC_PI_2);
        let t22 = rng.random_range(0.0..FRAC_PI_2);
        let g = rng.random_range(0.0..TAU);
        let closed = entropy_pair_3mode(t11, t21, t22, g).unwrap();
        let pair = three_mode_distinct_from_angles(t11, t21, t22, g, &Frame::random(3, &mut rng)).unwrap();
        assert!(check_nondeformed(&pair.phis()).unwrap().max_residual() < 1e-10);
        let (s1, s2v) = svd_entropies(&pair);
        assert_abs_diff_eq!(closed.s1, s1, epsilon = 1e-10);
        assert_abs_diff_eq!(closed.s2, s2v, epsilon = 1e-10);
        assert!((s1 - s2v).abs() <= LN_2 + 1e-12);
    }
}

fn two_equal_pairs(branch: f64, count: usize, rng: &mut ChaCha8Rng) -> Vec<SolutionPair> {
    (0..count)
        .map(|_| {
            let family = SolutionFamily::random(FamilyTag::ThreeModeTwoEqual, rng);
            let mut params = family.sample_params(rng);
            params.insert("branch".into(), branch);
            family.generate(&params, &Frame::random(3, rng)).unwrap()
        })
        .collect()
}

fn single_coefficient_angle(pair: &SolutionPair) -> f64 {
    let d = &pair.d1;
    let single = if (d[0] - d[1]).abs() < 1e-10 { d[2] } else { d[0] };
    single.asin()
}

#[test]
fn two_equal_unitary_block_closed_forms_match_svd() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for pair in two_equal_pairs(0.0, 120, &mut rng) {
        let theta1 = single_coefficient_angle(&pair);
        let (s1, s2v) = svd_entropies(&pair);
        assert_abs_diff_eq!(entropy_two_equal_s1(theta1).unwrap(), s1, epsilon = 1e-10);
        assert_abs_diff_eq!(entropy_two_equal_s2(theta1, pair.params["tr_u"]).unwrap(), s2v, epsilon = 1e-10);
        assert!((s1 - s2v).abs() <= LN_2 + 1e-12);
    }
}

#[test]
fn two_equal_diagonal_closed_forms_match_svd() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for pair in two_equal_pairs(1.0, 120, &mut rng) {
        let theta1 = single_coefficient_angle(&pair);
        let (s1, s2v) = svd_entropies(&pair);
        let closed = entropy_s2_threeangle(theta1, pair.params["theta3"], pair.params["gamma"]);
        assert_abs_diff_eq!(entropy_two_equal_s1(theta1).unwrap(), s1, epsilon = 1e-10);
        assert_abs_diff_eq!(closed, s2v, epsilon = 1e-10);
        assert!((s1 - s2v).abs() <= LN_2 + 1e-12);
    }
}

#[test]
fn all_equal_k_form_matches_svd() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    let mut checked = 0;
    while checked < 120 {
        let theta = rng.random_range(0.0..FRAC_PI_2);
        let g = rng.random_range(0.0..TAU);
        let Ok(closed) = entropy_k(theta, g) else { continue };
        let pair = all_equal_diagonal_from_k(theta, g, &Frame::random(3, &mut rng)).unwrap();
        assert!(check_nondeformed(&pair.phis()).unwrap().max_residual() < 1e-10);
        let (s1, s2v) = svd_entropies(&pair);
        assert_abs_diff_eq!(s1, LN_3, epsilon = 1e-12);
        assert_abs_diff_eq!(closed, s2v, epsilon = 1e-10);
        assert!(in_ln2_ln3(closed), "{closed}");
        checked += 1;
    }
}

#[test]
fn all_equal_trace_form_matches_svd() {
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    let family = SolutionFamily::random(FamilyTag::ThreeModeAllEqual, &mut rng);
    for _ in 0..120 {
        let mut params = family.sample_params(&mut rng);
        params.insert("branch".into(), 1.0);
        let pair = family.generate(&params, &Frame::random(3, &mut rng)).unwrap();
        let (s1, s2v) = svd_entropies(&pair);
        let closed = entropy_tr_w(params["tr_w"]).unwrap();
        assert_abs_diff_eq!(s1, LN_3, epsilon = 1e-12);
        assert_abs_diff_eq!(closed, s2v, epsilon = 1e-10);
        assert!(in_ln2_ln3(closed), "{closed}");
    }
}

#[test]
fn every_family_respects_the_entropy_gap() {
    let mut rng = ChaCha8Rng::seed_from_u64(36);
    for tag in FamilyTag::ALL {
        for _ in 0..100 {
            let pair = SolutionFamily::random(tag, &mut rng).sample(&mut rng).unwrap();
            let (s1, s2v) = svd_entropies(&pair);
            assert!((s1 - s2v).abs() <= LN_2 + 1e-12, "{tag}: {s1} {s2v}");
        }
    }
}

#[test]
fn cyclic_all_equal_branch_is_maximally_entangled() {
    let family = SolutionFamily::random(FamilyTag::ThreeModeAllEqual, &mut ChaCha8Rng::seed_from_u64(0));
    let mut params = Params::new();
    params.insert("branch".into(), 2.0);
    let pair = family.generate(&params, &Frame::identity(3)).unwrap();
    let (s1, s2v) = svd_entropies(&pair);
    assert_abs_diff_eq!(s1, LN_3, epsilon = 1e-12);
    assert_abs_diff_eq!(s2v, LN_3, epsilon = 1e-12);
}

#[test]
fn quasiboson_blocks_have_log_m_entropy() {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    for m in 1..=6 {
        let phi = quasiboson_phi_matrix(m, 7, 8, 7 - m, &mut rng).unwrap();
        let s = schmidt(&phi).unwrap();
        assert_abs_diff_eq!(s.entropy(), (m as f64).ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(s.purity(), 1.0 / m as f64, epsilon = 1e-12);
    }
}

fn random_state(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_column_slice(rows, cols, &random_unit_vector(rows * cols, rng))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn entropy_is_unitarily_invariant(seed in any::<u64>(), rows in 1usize..5, cols in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phi = random_state(rows, cols, &mut rng);
        let moved = random_unitary(rows, &mut rng) * &phi * random_unitary(cols, &mut rng);
        let a = schmidt(&phi).unwrap();
        let b = schmidt(&moved).unwrap();
        prop_assert!((a.entropy() - b.entropy()).abs() < 1e-12);
        prop_assert!((a.purity() - b.purity()).abs() < 1e-12);
        let rank = rows.min(cols) as f64;
        prop_assert!(a.entropy() >= -1e-15 && a.entropy() <= rank.ln() + 1e-12);
        prop_assert!(a.purity() >= 1.0 / rank - 1e-12 && a.purity() <= 1.0 + 1e-12);
    }

    #[test]
    fn two_mode_curves_agree_with_weights(theta in 0.0f64..FRAC_PI_2) {
        let (s, c) = theta.sin_cos();
        let w = [c * c, s * s];
        prop_assert!((s2(theta) - entropy_from_weights(&w)).abs() < 1e-14);
        prop_assert!((s2(theta) - s2(FRAC_PI_2 - theta)).abs() < 1e-14);
        prop_assert!((purity_theta(theta) - (w[0] * w[0] + w[1] * w[1])).abs() < 1e-14);
        prop_assert!(s2(theta) <= s2(FRAC_PI_4) + 1e-15);
    }

    #[test]
    fn trace_form_stays_in_band(tr in 0.0f64..=2.0) {
        let s = entropy_tr_w(tr).unwrap();
        let t2 = tr * tr;
        let direct = entropy_from_weights(&[1.0 / (2.0 + t2), 1.0 / (2.0 + t2), t2 / (2.0 + t2)]);
        prop_assert!((s - direct).abs() < 1e-13);
        prop_assert!(in_ln2_ln3(s));
    }
}
