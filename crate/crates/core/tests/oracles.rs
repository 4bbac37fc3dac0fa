//! Closed-form and brute-force references for the reference systems.

use approx::assert_abs_diff_eq;
use gibbslab_core::clt::{center, green_kubo_variance, ks_normal};
use gibbslab_core::config_space::{mixing_exponent, CylinderSet, WordSpace};
use gibbslab_core::diagnostics::{bowen_scan, correlation, decay_fit, Representative};
use gibbslab_core::fixtures;
use gibbslab_core::transfer::{
    default_probes, ergodic_sum, leading_eigendata, normalize, spectral_gap_estimate, DepthKFunction,
    TransferOperator,
};
use gibbslab_core::transport::solver::{LpSolver, NetworkSimplex, SolverRegistry};
use gibbslab_core::transport::{
    dual_apply, solve_gibbs, wasserstein, GibbsOptions, GibbsSolution, GroundMetric, WordMeasure,
};
use gibbslab_core::GibbsError;

const GOLDEN_LAMBDA: f64 = 0.809_016_994_374_947_5;
const GOLDEN_RATE: f64 = 0.381_966_011_250_105_2;
const GOLDEN_SIGMA2: f64 = 0.089_442_719_099_991_59;
const GOLDEN_PI1: f64 = 0.276_393_202_250_021;

fn solved(space: &WordSpace, phi: DepthKFunction, depth: usize) -> (DepthKFunction, GibbsSolution) {
    let op = TransferOperator::new(space, phi).unwrap();
    let (phi_bar, data) = normalize(&op, 1e-14, 10_000).unwrap();
    let op = TransferOperator::new(space, phi_bar.clone()).unwrap();
    let mu0 = WordMeasure::uniform(space, depth).unwrap();
    let opts = GibbsOptions { tol: 1e-13, skip_certificate: true, ..GibbsOptions::default() };
    let sol = solve_gibbs(&op, data, &mu0, &opts, &NetworkSimplex::default()).unwrap();
    (phi_bar, sol)
}

fn brute_force_words(n: u32, k: usize, allowed: impl Fn(u32, u32) -> bool) -> Vec<Vec<u32>> {
    let total = (n as usize).pow(k as u32);
    let mut out = Vec::new();
    for code in 0..total {
        let mut c = code;
        let mut w = vec![0u32; k];
        for slot in w.iter_mut().rev() {
            *slot = (c % n as usize) as u32;
            c /= n as usize;
        }
        if w.windows(2).all(|p| allowed(p[0], p[1])) {
            out.push(w);
        }
    }
    out
}

#[test]
fn word_tables_match_brute_force() {
    let golden = fixtures::golden_mean_space(7);
    let periodic = fixtures::period_two_space(5);
    for k in 1..=7 {
        let expect = brute_force_words(2, k, |a, b| a * b == 0);
        let got: Vec<Vec<u32>> = golden.table(k).words().map(|w| w.to_vec()).collect();
        assert_eq!(got, expect, "golden depth {k}");
    }
    let counts: Vec<usize> = (1..=7).map(|k| golden.table(k).len()).collect();
    assert_eq!(counts, vec![2, 3, 5, 8, 13, 21, 34]);
    for k in 1..=5 {
        assert_eq!(periodic.table(k).len(), 2);
    }
}

#[test]
fn mixing_exponents() {
    let (_, golden) = fixtures::golden_mean_system();
    let (_, periodic) = fixtures::period_two_system();
    let (_, full) = fixtures::full_shift_system(3);
    assert_eq!(mixing_exponent(&golden, 10), Some(2));
    assert_eq!(mixing_exponent(&periodic, 10), None);
    assert_eq!(mixing_exponent(&full, 10), Some(1));
}

#[test]
fn golden_eigendata() {
    let space = fixtures::golden_mean_space(4);
    let op = TransferOperator::new(&space, DepthKFunction::zero(&space)).unwrap();
    let data = leading_eigendata(&op, 1e-14, 10_000).unwrap();
    assert_abs_diff_eq!(data.lambda, GOLDEN_LAMBDA, epsilon = 1e-12);
    // the eigenfunction is the right Perron vector of [[1/2, 1/2], [1/2, 0]]
    let h = data.h.values();
    assert_abs_diff_eq!(h[0] / h[1], 2.0 * GOLDEN_LAMBDA, epsilon = 1e-10);
}

#[test]
fn parry_cylinders_and_shift_invariance() {
    let space = fixtures::golden_mean_space(6);
    let (_, sol) = solved(&space, DepthKFunction::zero(&space), 6);
    let mu = &sol.measure;
    let one = mu.cylinder_mass(&space, &CylinderSet::of_word(&[1])).unwrap();
    let zero_zero = mu.cylinder_mass(&space, &CylinderSet::of_word(&[0, 0])).unwrap();
    assert_abs_diff_eq!(one, GOLDEN_PI1, epsilon = 1e-12);
    assert_abs_diff_eq!(zero_zero, (1.0 - GOLDEN_PI1) / GOLDEN_LAMBDA / 2.0, epsilon = 1e-12);
    assert!(mu.shift_invariance_residual(&space).unwrap() < 1e-12);
}

#[test]
fn bernoulli_product_law() {
    let p = [0.3, 0.7];
    let space = fixtures::full_shift_space(2, 4);
    let phi = fixtures::bernoulli_potential(&space, &p);
    let op = TransferOperator::new(&space, phi).unwrap();
    assert!(op.normalization_defect().unwrap() < 1e-15);
    let mu = WordMeasure::product(&space, 4, &p).unwrap();
    let image = dual_apply(&op, &mu).unwrap();
    for (a, b) in image.masses().iter().zip(mu.masses()) {
        assert_abs_diff_eq!(a, b, epsilon = 1e-15);
    }
    let (_, sol) = solved(&space, fixtures::bernoulli_potential(&space, &p), 4);
    let mass = sol.measure.cylinder_mass(&space, &CylinderSet::of_word(&[1, 0, 1])).unwrap();
    assert_abs_diff_eq!(mass, 0.147, epsilon = 1e-12);
}

#[test]
fn ergodic_sums_of_indicator_count_letters() {
    let space = fixtures::golden_mean_space(6);
    let ind = DepthKFunction::indicator(&space, &[1]).unwrap();
    let s = ergodic_sum(&space, &ind, &[1, 0, 1, 0, 0, 1], 5).unwrap();
    assert_eq!(s, 2.0);
}

#[test]
fn one_dimensional_transport() {
    // on a line, W equals the integral of |F - G| and the cost is d_M / 2 at depth 1
    let space = fixtures::full_shift_space(4, 1);
    let p = [0.1, 0.4, 0.2, 0.3];
    let q = [0.5, 0.0, 0.25, 0.25];
    let mu = WordMeasure::new(&space, 1, p.to_vec()).unwrap();
    let eta = WordMeasure::new(&space, 1, q.to_vec()).unwrap();
    let (mut f, mut g, mut expect) = (0.0, 0.0, 0.0);
    for i in 0..3 {
        f += p[i];
        g += q[i];
        expect += (f - g as f64).abs() / 3.0 / 2.0;
    }
    let registry = SolverRegistry::with_defaults();
    for name in ["network-simplex", "lp"] {
        let solver = registry.get(name).unwrap();
        let w = wasserstein(&space, &mu, &eta, GroundMetric::Raw, solver.as_ref()).unwrap();
        assert_abs_diff_eq!(w.value, expect, epsilon = 1e-12);
    }
    let w = wasserstein(&space, &mu, &eta, GroundMetric::Raw, &LpSolver).unwrap();
    assert_abs_diff_eq!(w.upper - w.value, 0.5, epsilon = 1e-15);
}

#[test]
fn golden_correlations_follow_the_second_eigenvalue() {
    let space = fixtures::golden_mean_space(8);
    let (phi_bar, sol) = solved(&space, DepthKFunction::zero(&space), 8);
    let op = TransferOperator::new(&space, phi_bar).unwrap();
    let ind = DepthKFunction::indicator(&space, &[1]).unwrap();
    let c0 = GOLDEN_PI1 * (1.0 - GOLDEN_PI1);
    for m in 0..=10 {
        let v = correlation(&sol, &op, &ind, &ind, m).unwrap();
        let expect = c0 * (-GOLDEN_RATE).powi(m as i32);
        assert_abs_diff_eq!(v.operator, expect, epsilon = 1e-12);
        if let Some(d) = v.direct {
            assert_abs_diff_eq!(d, expect, epsilon = 1e-12);
        }
    }
    assert!(correlation(&sol, &op, &ind, &ind, 10).unwrap().direct.is_none());
    let curve = decay_fit(&sol, &op, &ind, &ind, 10).unwrap();
    assert_abs_diff_eq!(curve.lambda_fit, GOLDEN_RATE, epsilon = 1e-9);
    assert!(curve.envelope_violations.is_empty());
}

#[test]
fn constant_observable_has_no_correlation() {
    let space = fixtures::golden_mean_space(6);
    let (phi_bar, sol) = solved(&space, DepthKFunction::zero(&space), 6);
    let op = TransferOperator::new(&space, phi_bar).unwrap();
    let ind = DepthKFunction::indicator(&space, &[0, 1]).unwrap();
    let constant = DepthKFunction::constant(&space, 3.0);
    for m in 0..5 {
        assert!(correlation(&sol, &op, &constant, &ind, m).unwrap().operator.abs() < 1e-14);
    }
}

#[test]
fn bernoulli_decay_data_is_insufficient() {
    let space = fixtures::full_shift_space(2, 6);
    let (phi_bar, sol) = solved(&space, fixtures::bernoulli_potential(&space, &[0.5, 0.5]), 6);
    let op = TransferOperator::new(&space, phi_bar).unwrap();
    let ind = DepthKFunction::indicator(&space, &[1]).unwrap();
    let err = decay_fit(&sol, &op, &ind, &ind, 8).unwrap_err();
    assert!(matches!(err, GibbsError::InsufficientDecayData(_)));
    let gap = spectral_gap_estimate(&op, &sol.measure, &default_probes(&space), 1).unwrap();
    assert!(gap.rate < 1e-15);
}

#[test]
fn variance_oracles() {
    let space = fixtures::golden_mean_space(8);
    let (phi_bar, sol) = solved(&space, DepthKFunction::zero(&space), 8);
    let op = TransferOperator::new(&space, phi_bar).unwrap();
    let ind = DepthKFunction::indicator(&space, &[1]).unwrap();
    let gap = spectral_gap_estimate(&op, &sol.measure, &default_probes(&space), 6).unwrap();
    let (report, _) = green_kubo_variance(&op, &sol, &ind, &gap, 200, 1e-12).unwrap();
    assert_abs_diff_eq!(report.sigma2_green_kubo, GOLDEN_SIGMA2, epsilon = 1e-12);
    let tilde = center(&op, &sol, &ind).unwrap();
    assert!(sol.measure.integrate(&space, &tilde).unwrap().abs() < 1e-14);
}

#[test]
fn bowen_ratios_for_product_measures_are_one() {
    let space = fixtures::full_shift_space(3, 5);
    let (phi_bar, sol) = solved(&space, fixtures::bernoulli_potential(&space, &[0.2, 0.5, 0.3]), 5);
    let op = TransferOperator::new(&space, phi_bar).unwrap();
    for rep in [Representative::Least, Representative::Greatest] {
        let report = bowen_scan(&sol, &op, 4, rep).unwrap();
        assert!(report.ratios.iter().all(|r| (r.ratio - 1.0).abs() < 1e-12));
        assert_abs_diff_eq!(report.c_empirical, 1.0, epsilon = 1e-12);
    }
}

#[test]
fn golden_bowen_constant() {
    // with h = (θ, 1) and least extensions ending in 0 the ratio is θ² h(w_m) / (θ² + 1),
    // so the smaller value θ² / (θ² + 1) sets C = 1 + θ^-2
    let space = fixtures::golden_mean_space(9);
    let (phi_bar, sol) = solved(&space, DepthKFunction::zero(&space), 9);
    let op = TransferOperator::new(&space, phi_bar).unwrap();
    let report = bowen_scan(&sol, &op, 8, Representative::Least).unwrap();
    assert_abs_diff_eq!(report.c_empirical, 1.0 + GOLDEN_RATE, epsilon = 1e-9);
    assert_abs_diff_eq!(report.c_spread, 1.0, epsilon = 1e-9);
}

#[test]
fn ks_matches_hand_computation() {
    // three points against N(0, 1): the worst gap sits just below 0
    let ks = ks_normal(&[-1.0, 0.0, 2.0], 1.0).unwrap();
    let phi0: f64 = 0.5;
    let phim1: f64 = 0.158_655_253_931_457_05;
    let phi2 = 0.977_249_868_051_820_8;
    let expect = (phim1 - 0.0).max(1.0 / 3.0 - phim1).max(phi0 - 1.0 / 3.0).max(2.0 / 3.0 - phi0).max(phi2 - 2.0 / 3.0).max(1.0 - phi2);
    assert_abs_diff_eq!(ks.statistic, expect, epsilon = 1e-9);
}
