//! Oracle-backed integration checks at moderate sizes. The full-size runs
//! of the same checks form the acceptance suite in the CLI crate.

use stpp_core::validation as v;

fn assert_check(outcome: v::CheckOutcome) {
    assert!(
        outcome.passed,
        "{} failed: {} (criterion: {})",
        outcome.name, outcome.observed, outcome.criterion
    );
}

#[test]
fn edge_correction_exactness() {
    assert_check(v::check_edge_correction_exactness());
}

#[test]
fn edge_weight_arc_oracle() {
    assert_check(v::check_edge_weight_oracle(11));
}

#[test]
fn origin_identity() {
    assert_check(v::check_origin_identity());
}

#[test]
fn brute_force_equivalence_small() {
    assert_check(v::check_oracle_equivalence(15, 80, 5));
}

#[test]
fn csr_k_unbiasedness_small() {
    assert_check(v::check_csr_k_unbiasedness(120, 150, 7));
}

#[test]
fn st_benchmark_small() {
    assert_check(v::check_st_benchmark(60, 250, 13));
}

#[test]
fn p_value_mechanics() {
    assert_check(v::check_p_value_mechanics(17));
}

#[test]
fn library_determinism() {
    assert_check(v::check_library_determinism(19));
}

#[test]
fn thinning_equals_poisson_count() {
    assert_check(v::check_thinning_equivalence(300, 23));
}

#[test]
fn histogram_multinomial() {
    assert_check(v::check_histogram_multinomial(29));
}

#[test]
fn rl_envelope_calibration_small() {
    assert_check(v::check_rl_calibration(25, 1));
}

#[test]
fn csr_envelope_calibration_small() {
    assert_check(v::check_csr_l_calibration(25, 37));
}

#[test]
fn uniform_time_band_calibration_small() {
    assert_check(v::check_uniform_time_calibration(25, 41));
}

#[test]
fn independent_d_near_zero_small() {
    assert_check(v::check_independent_d_near_zero(60, 43));
}

#[test]
fn residual_null_moments_small() {
    assert_check(v::check_residual_null_moments(200, 7));
}

#[test]
fn thomas_cluster_excess() {
    assert_check(v::check_thomas_clustering(53));
}

#[test]
fn intensity_normalized_mass() {
    assert_check(v::check_intensity_mass(59));
}

#[test]
fn identical_classes_zero_d() {
    assert_check(v::check_identical_classes_zero_d());
}

#[test]
fn gaussian_null_calibration_small() {
    assert_check(v::check_gaussian_null_calibration(150, 80, 99, 99, 61));
}

#[test]
fn index_ordering_invariance() {
    assert_check(v::check_permutation_invariance(67));
}
