//! Algebraic identities between the efficiency metrics, and CI coverage.

use lntail::metrics::{confidence_interval, lemma2_spread, lemma_diagnostics, EfficiencyRow};
use lntail::montecarlo::RngStream;
use lntail::shift::mean_shift_dominant;
use lntail::{check_assumption_a, fixtures, is_cv, is_mean_shift, BetaMode, Threshold};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn same_batch_identities() {
    let p = fixtures::paper_problem::<f64>();
    let r = check_assumption_a(&p);
    for (k, lg) in [3.0, 1.0, -1.0, -2.0].into_iter().enumerate() {
        let th = Threshold::from_log(lg).unwrap();
        let plan = mean_shift_dominant(&p, &r, th).unwrap();
        let stream = RngStream::new(5, k as u64);
        let star = is_cv(&p, &plan, &r, 50_000, stream, BetaMode::Estimated).unwrap();
        let fixed = is_cv(&p, &plan, &r, 50_000, stream, BetaMode::FixedMinusOne).unwrap();
        let is = is_mean_shift(&p, &plan, 50_000, stream).unwrap();
        let s = star.paired.unwrap();
        let rho = star.rho_hat.unwrap();
        assert!(rho.abs() <= 1.0);

        let beta = star.beta_used.unwrap();
        let implied = -rho * (s.var_t / s.var_z).sqrt();
        assert!(
            (beta - implied).abs() <= 1e-12 * beta.abs(),
            "β̂ identity at {lg}"
        );

        assert!(star.variance <= s.var_t * (1.0 - rho * rho) + 1e-10 * s.var_t);

        // same stream, same batch: plain IS sees the identical T samples
        assert_eq!(is.value, s.mean_t);
        assert_eq!(is.variance, s.var_t);

        let row = EfficiencyRow::from_estimates(th, Some(&is), Some(&fixed), Some(&star), None);
        let xi = row.xi_star.unwrap();
        assert!((xi - s.var_t / star.variance).abs() <= 1e-12 * xi);
        let xi = row.xi_fixed.unwrap();
        assert!((xi - s.var_t / fixed.variance).abs() <= 1e-12 * xi);
        assert!(row.cv2_is.unwrap() >= 0.0);
        let d = row.p1_minus_p2_hat.unwrap();
        assert!((-1e-12..=0.5 + 0.01).contains(&d));
    }
}

#[test]
fn bernoulli_interval_coverage() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let (q, m) = (0.3, 1000u64);
    let covered = (0..1000)
        .filter(|_| {
            let hits = (0..m).filter(|_| rng.random::<f64>() < q).count() as f64;
            let mean = hits / m as f64;
            let var = mean * (1.0 - mean) * m as f64 / (m - 1) as f64;
            let (lo, hi) = confidence_interval(mean, var, m, 0.95, true);
            lo <= q && q <= hi
        })
        .count();
    assert!((920..=980).contains(&covered), "covered {covered}");
}

#[test]
fn lemma_probes_on_the_benchmark() {
    let p = fixtures::paper_problem::<f64>();
    let r = check_assumption_a(&p);
    let diags: Vec<_> = [1.0, 0.0, -1.0, -2.0]
        .into_iter()
        .enumerate()
        .map(|(k, lg)| {
            let plan = mean_shift_dominant(&p, &r, Threshold::from_log(lg).unwrap()).unwrap();
            lemma_diagnostics(&p, &plan, &r, 200_000, RngStream::new(8, k as u64)).unwrap()
        })
        .collect();
    for d in &diags {
        assert!(d.p1_within_3se, "P̂₁ = {}", d.p1_hat);
        assert_eq!(d.a_i0, Some(1.0));
        assert!(d.quad_identity_error < 1e-10);
        assert_eq!(d.order_violations, 0);
        assert!(d.z2_empirical >= d.t2_empirical);
        assert!(!d.low_count);
    }
    let spread = lemma2_spread(&diags).unwrap();
    assert!(spread <= 50.0, "spread {spread}");

    // far in the tail with few samples the discrepancy count collapses
    let plan = mean_shift_dominant(&p, &r, Threshold::from_log(-12.0).unwrap()).unwrap();
    let d = lemma_diagnostics(&p, &plan, &r, 2_000, RngStream::new(8, 9)).unwrap();
    assert!(d.low_count);
}
