//! Normal CDF kernels against high-precision reference values.

#![allow(clippy::excessive_precision)]

use lntail::numerics::{log_std_normal_cdf, std_normal_cdf, std_normal_pdf, std_normal_quantile};

// (x, Φ(x)) computed with 40-digit arithmetic
const CDF: &[(f64, f64)] = &[
    (-8.0, 6.2209605742717841e-16),
    (-6.0, 9.865876450376981e-10),
    (-4.0, 3.1671241833119921e-5),
    (-3.3, 4.834241423837775e-4),
    (-2.0, 0.022750131948179207),
    (-1.96, 0.024997895148220436),
    (-0.5, 0.30853753872598690),
    (0.0, 0.5),
    (0.3, 0.61791142218895263),
    (1.0, 0.84134474606854295),
    (3.0, 0.99865010196836991),
];

// (x, log Φ(x))
const LOG_CDF: &[(f64, f64)] = &[
    (7.5, -3.1908916729109471e-14),
    (3.0, -0.0013508099647481938),
    (-1.96, -3.6889636517296386),
    (-2.0, -3.7831843336820319),
    (-4.0, -10.360101486527291),
    (-6.0, -20.736768949974706),
    (-7.9, -34.206228170981716),
    (-8.0, -35.013437159914550),
    (-8.1, -35.830502890801472),
    (-12.0, -75.410673001568795939),
    (-20.0, -203.91715537109726),
    (-38.0, -726.55721601882013),
    (-40.0, -804.60844201375379),
    (-54.0, -1462.9082652217813),
    (-100.0, -5005.5242086942051),
    (-1000.0, -500007.82669481218),
];

#[test]
fn cdf_matches_reference() {
    for &(x, want) in CDF {
        let got = std_normal_cdf(x);
        assert!(
            (got - want).abs() <= 1e-14,
            "Φ({x}) = {got:e}, want {want:e}"
        );
        if want < 1e-3 {
            assert!((got - want).abs() <= 1e-13 * want, "relative Φ({x})");
        }
    }
}

#[test]
fn log_cdf_matches_reference() {
    for &(x, want) in LOG_CDF {
        let got = log_std_normal_cdf(x);
        assert!(
            (got - want).abs() <= 1e-10 * want.abs(),
            "log Φ({x}) = {got:e}, want {want:e}"
        );
    }
}

#[test]
fn log_cdf_agrees_with_cdf() {
    let mut x: f64 = -37.0;
    while x <= 8.0 {
        let phi = std_normal_cdf(x);
        let via_log = log_std_normal_cdf(x).exp();
        assert!((via_log - phi).abs() <= 1e-12 * phi, "x = {x}");
        x += 0.0625;
    }
}

#[test]
fn symmetry_and_monotonicity() {
    let n = 10_000;
    let mut prev = 0.0;
    let mut prev_log = f64::NEG_INFINITY;
    for k in 0..=n {
        let x = -40.0 + 80.0 * k as f64 / n as f64;
        let p = std_normal_cdf(x);
        let lp = log_std_normal_cdf(x);
        assert!(p >= prev, "Φ not monotone at {x}");
        assert!(lp >= prev_log, "log Φ not monotone at {x}");
        assert!(
            (p + std_normal_cdf(-x) - 1.0).abs() <= 1e-15,
            "symmetry at {x}"
        );
        prev = p;
        prev_log = lp;
    }
}

#[test]
fn pdf_and_quantile() {
    assert!((std_normal_pdf(0.0f64) - 0.3989422804014327).abs() < 1e-16);
    for &(x, p) in CDF.iter().filter(|(x, _)| x.abs() <= 4.0) {
        let q = std_normal_quantile(p);
        assert!(
            (q - x).abs() < 1e-9 * (1.0 + x.abs()),
            "quantile({p}) = {q}"
        );
    }
}

#[test]
fn single_precision_is_usable() {
    assert!((std_normal_cdf(-1.96f32) - 0.024997895).abs() < 1e-6);
    assert!((log_std_normal_cdf(-12.0f32) + 75.410675).abs() < 1e-3);
}
