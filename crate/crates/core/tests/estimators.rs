//! Statistical checks of the samplers and estimators against closed forms.

use lntail::montecarlo::{
    is_second_moment_oracle, l4_indicator_closed_form, sample_mvn, simulate_paired,
    z_second_moment_closed_form, RngStream,
};
use lntail::numerics::std_normal_cdf;
use lntail::shift::mean_shift_dominant;
use lntail::{
    check_assumption_a, fixtures, is_cv, is_mean_shift, naive_mc, BetaMode, DominanceReport,
    Problem, ShiftPlan, Threshold,
};

fn setup(lg: f64) -> (Problem<f64>, DominanceReport<f64>, ShiftPlan<f64>) {
    let p = fixtures::paper_problem();
    let r = check_assumption_a(&p);
    let plan = mean_shift_dominant(&p, &r, Threshold::from_log(lg).unwrap()).unwrap();
    (p, r, plan)
}

#[test]
fn sampler_reproduces_mean_and_covariance() {
    let p = fixtures::paper_problem::<f64>();
    let m = 200_000u64;
    let ys = sample_mvn(p.mu(), p.chol(), m, RngStream::new(3, 1)).unwrap();
    assert_eq!(ys.len() as u64, m);
    let n = p.dim();
    let mf = m as f64;
    let mean: Vec<f64> = (0..n)
        .map(|k| ys.iter().map(|y| y[k]).sum::<f64>() / mf)
        .collect();
    for k in 0..n {
        let se = (p.sigma()[(k, k)] / mf).sqrt();
        assert!((mean[k] - 4.0).abs() < 4.0 * se, "mean[{k}] = {}", mean[k]);
        for l in 0..n {
            let c = ys
                .iter()
                .map(|y| (y[k] - mean[k]) * (y[l] - mean[l]))
                .sum::<f64>()
                / (mf - 1.0);
            let want = p.sigma()[(k, l)];
            let scale = (p.sigma()[(k, k)] * p.sigma()[(l, l)]).sqrt();
            assert!((c - want).abs() <= 0.02 * scale, "cov[{k},{l}] = {c}");
        }
    }
}

#[test]
fn control_variable_is_unbiased() {
    for lg in [2.0, 1.0, 0.0] {
        let (p, _, plan) = setup(lg);
        let s = simulate_paired(&p, &plan, Some(0), 1_000_000, RngStream::new(11, 2)).unwrap();
        let want = std_normal_cdf(lg - 4.0);
        let se = (s.tz.var_y() / 1e6).sqrt();
        assert!(
            (s.tz.mean_y - want).abs() <= 3.0 * se,
            "log γ = {lg}: {} vs {want}",
            s.tz.mean_y
        );
        assert!(s.z_sq.mean >= s.t_sq.mean);
        assert_eq!(s.order_violations, 0);
    }
}

#[test]
fn control_variable_moments_match_closed_forms() {
    let (p, r, plan) = setup(2.0);
    let s = simulate_paired(&p, &plan, Some(0), 1_000_000, RngStream::new(12, 3)).unwrap();
    let z2 = z_second_moment_closed_form(&p, &plan, &r).unwrap().value;
    assert!((s.z_sq.mean - z2).abs() <= 3.0 * s.z_sq.std_error());
    let l4 = l4_indicator_closed_form(&p, &plan, &r).unwrap().value;
    assert!((s.l4.mean - l4).abs() <= 5.0 * s.l4.std_error());
    // the dominant tilt puts the marginal threshold at the median
    let p1 = s.marginal_events as f64 / 1e6;
    assert!((p1 - 0.5).abs() <= 3.0 * (0.25f64 / 1e6).sqrt());
}

#[test]
fn is_second_moment_matches_untilted_oracle() {
    for lg in [2.0, 1.0] {
        let (p, _, plan) = setup(lg);
        let e = is_mean_shift(&p, &plan, 400_000, RngStream::new(13, 4)).unwrap();
        let (oracle, se) =
            is_second_moment_oracle(&p, &plan, 400_000, RngStream::new(13, 5)).unwrap();
        let s = simulate_paired(&p, &plan, Some(0), 400_000, RngStream::new(13, 4)).unwrap();
        let se_emp = s.t_sq.std_error();
        let tol = 4.0 * (se * se + se_emp * se_emp).sqrt();
        assert!(
            (e.second_moment - oracle).abs() <= tol,
            "log γ = {lg}: {} vs {oracle} (tol {tol:e}, {} vs {})",
            e.second_moment,
            s.t_sq.mean,
            e.value * e.value
        );
    }
}

#[test]
fn estimators_agree_at_moderate_threshold() {
    let (p, r, plan) = setup(1.67);
    let th = plan.threshold;
    let naive = naive_mc(&p, th, 400_000, RngStream::new(14, 1)).unwrap();
    let is = is_mean_shift(&p, &plan, 20_000, RngStream::new(14, 2)).unwrap();
    let cv = is_cv(
        &p,
        &plan,
        &r,
        20_000,
        RngStream::new(14, 3),
        BetaMode::FixedMinusOne,
    )
    .unwrap();
    let star = is_cv(
        &p,
        &plan,
        &r,
        20_000,
        RngStream::new(14, 4),
        BetaMode::Estimated,
    )
    .unwrap();
    let all = [&naive, &is, &cv, &star];
    for a in all {
        assert!(
            a.value > 2e-3 && a.value < 2e-2,
            "{:?} = {}",
            a.tag,
            a.value
        );
        for b in all {
            assert!(
                a.ci95.0 <= b.ci95.1 && b.ci95.0 <= a.ci95.1,
                "{:?} vs {:?}",
                a.tag,
                b.tag
            );
        }
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let (p, r, plan) = setup(0.0);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                let stream = RngStream::new(99, 7);
                (
                    is_cv(&p, &plan, &r, 300_000, stream, BetaMode::Estimated).unwrap(),
                    naive_mc(&p, plan.threshold, 300_000, stream).unwrap(),
                )
            })
    };
    let (a1, b1) = run(1);
    let (a4, b4) = run(4);
    assert_eq!(a1, a4);
    assert_eq!(b1, b4);
    assert_eq!(a1.value.to_bits(), a4.value.to_bits());
}
