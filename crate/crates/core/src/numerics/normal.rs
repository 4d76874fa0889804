#![allow(clippy::excessive_precision)]
//! Standard normal distribution: CDF, log-CDF and quantile.
//!
//! `erfc` is a port of the FreeBSD msun rational approximations
//! (s_erf.c, Copyright (C) 1993 Sun Microsystems, freely redistributable),
//! written over a generic scalar. The log-CDF has a dedicated tail path for
//! `x ≤ -8` that never forms the underflowing linear value.

use crate::scalar::Real;

const ERX: f64 = 8.45062911510467529297e-01;

const EFX8: f64 = 1.02703333676410069053e+00;
const PP: [f64; 5] = [
    1.28379167095512558561e-01,
    -3.25042107247001499370e-01,
    -2.84817495755985104766e-02,
    -5.77027029648944159157e-03,
    -2.37630166566501626084e-05,
];
const QQ: [f64; 6] = [
    1.0,
    3.97917223959155352819e-01,
    6.50222499887672944485e-02,
    5.08130628187576562776e-03,
    1.32494738004321644526e-04,
    -3.96022827877536812320e-06,
];

const PA: [f64; 7] = [
    -2.36211856075265944077e-03,
    4.14856118683748331666e-01,
    -3.72207876035701323847e-01,
    3.18346619901161753674e-01,
    -1.10894694282396677476e-01,
    3.54783043256182359371e-02,
    -2.16637559486879084300e-03,
];
const QA: [f64; 7] = [
    1.0,
    1.06420880400844228286e-01,
    5.40397917702171048937e-01,
    7.18286544141962662868e-02,
    1.26171219808761642112e-01,
    1.36370839120290507362e-02,
    1.19844998467991074170e-02,
];

const RA: [f64; 8] = [
    -9.86494403484714822705e-03,
    -6.93858572707181764372e-01,
    -1.05586262253232909814e+01,
    -6.23753324503260060396e+01,
    -1.62396669462573470355e+02,
    -1.84605092906711035994e+02,
    -8.12874355063065934246e+01,
    -9.81432934416914548592e+00,
];
const SA: [f64; 9] = [
    1.0,
    1.96512716674392571292e+01,
    1.37657754143519042600e+02,
    4.34565877475229228821e+02,
    6.45387271733267880336e+02,
    4.29008140027567833386e+02,
    1.08635005541779435134e+02,
    6.57024977031928170135e+00,
    -6.04244152148580987438e-02,
];

const RB: [f64; 7] = [
    -9.86494292470009928597e-03,
    -7.99283237680523006574e-01,
    -1.77579549177547519889e+01,
    -1.60636384855821916062e+02,
    -6.37566443368389627722e+02,
    -1.02509513161107724954e+03,
    -4.83519191608651397019e+02,
];
const SB: [f64; 8] = [
    1.0,
    3.03380607434824582924e+01,
    3.25792512996573918826e+02,
    1.53672958608443695994e+03,
    3.19985821950859553908e+03,
    2.55305040643316442583e+03,
    4.74528541206955367215e+02,
    -2.24409524465858183362e+01,
];

/// Switch point for the log-space tail of the CDF.
pub const LOG_TAIL_SWITCH: f64 = -8.0;

#[inline]
fn horner<T: Real>(coeffs: &[f64], x: T) -> T {
    coeffs
        .iter()
        .rev()
        .fold(T::zero(), |acc, &c| acc * x + T::lit(c))
}

/// Value of `x` truncated to 12 fractional bits so that `z*z` is exact for
/// the magnitudes handled here.
#[inline]
fn split<T: Real>(x: T) -> T {
    let scale = T::lit(4096.0);
    (x * scale).floor() / scale
}

/// `log(x · erfc(x)) + x²` for `x ≥ 1.25`, following the msun
/// decomposition. Only valid up to `x ≈ 28`.
fn log_erfc_scaled_mid<T: Real>(x: T) -> T {
    let s = T::one() / (x * x);
    let (r, q) = if x < T::lit(1.0 / 0.35) {
        (horner(&RA, s), horner(&SA, s))
    } else {
        (horner(&RB, s), horner(&SB, s))
    };
    T::lit(-0.5625) + r / q
}

/// `log erfc(x)` for `x ≥ 1.25` without forming `erfc(x)`.
fn log_erfc_large<T: Real>(x: T) -> T {
    if x <= T::lit(28.0) {
        let z = split(x);
        -z * z + (z - x) * (z + x) + log_erfc_scaled_mid(x) - x.ln()
    } else {
        // erfc(x) = 2 Φ(-√2 x)
        let t = x * T::SQRT_2();
        T::LN_2() + log_normal_tail_mills(t)
    }
}

/// `log(1 - Φ(t)) = log Φ(-t)` for large positive `t`, via the continued
/// fraction for the Mills ratio `R(t) = 1/(t + 1/(t + 2/(t + 3/(t + …))))`.
fn log_normal_tail_mills<T: Real>(t: T) -> T {
    // Modified Lentz.
    let tiny = T::min_positive_value() / T::epsilon();
    let mut f = t;
    let mut c = t;
    let mut d = T::zero();
    let eps = T::epsilon();
    for k in 1..500 {
        let a = T::from_count(k);
        d = t + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = t + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = d.recip();
        let delta = c * d;
        f = f * delta;
        if (delta - T::one()).abs() < eps {
            break;
        }
    }
    // Φ(-t) = φ(t) / f
    -t * t / T::lit(2.0) - T::lit(0.5) * (T::TAU()).ln() - f.ln()
}

/// Complementary error function.
pub fn erfc<T: Real>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    let ax = x.abs();
    let one = T::one();
    let two = T::lit(2.0);
    if ax < T::lit(0.84375) {
        if ax < T::lit(3.725290298461914e-9) {
            return one - x;
        }
        let z = x * x;
        let y = horner(&PP, z) / horner(&QQ, z);
        return if x < T::lit(0.25) {
            one - (x + x * y)
        } else {
            T::lit(0.5) - (x - T::lit(0.5) + x * y)
        };
    }
    if ax < T::lit(1.25) {
        let s = ax - one;
        let p = horner(&PA, s) / horner(&QA, s);
        return if x >= T::zero() {
            one - T::lit(ERX) - p
        } else {
            one + T::lit(ERX) + p
        };
    }
    if ax < T::lit(28.0) {
        let z = split(ax);
        let r = (-z * z).exp() * ((z - ax) * (z + ax) + log_erfc_scaled_mid(ax)).exp() / ax;
        return if x > T::zero() { r } else { two - r };
    }
    if x > T::zero() {
        T::zero()
    } else {
        two
    }
}

/// Error function.
pub fn erf<T: Real>(x: T) -> T {
    let ax = x.abs();
    if ax < T::lit(0.84375) {
        if ax < T::lit(3.725290298461914e-9) {
            return T::lit(0.125) * (T::lit(8.0) * x + T::lit(EFX8) * x);
        }
        let z = x * x;
        return x + x * (horner(&PP, z) / horner(&QQ, z));
    }
    let r = T::one() - erfc(ax);
    if x < T::zero() {
        -r
    } else {
        r
    }
}

/// Standard normal CDF `Φ(x)`.
pub fn std_normal_cdf<T: Real>(x: T) -> T {
    T::lit(0.5) * erfc(-x * T::FRAC_1_SQRT_2())
}

/// `log Φ(x)`, accurate in the far left tail.
pub fn log_std_normal_cdf<T: Real>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    if x <= T::lit(LOG_TAIL_SWITCH) {
        let u = -x * T::FRAC_1_SQRT_2();
        return log_erfc_large(u) - T::LN_2();
    }
    if x > T::zero() {
        // log(1 - Φ(-x)) keeps precision when Φ(x) is close to one.
        return (-std_normal_cdf(-x)).ln_1p();
    }
    std_normal_cdf(x).ln()
}

/// Standard normal density.
pub fn std_normal_pdf<T: Real>(x: T) -> T {
    (-x * x / T::lit(2.0)).exp() / T::TAU().sqrt()
}

/// Standard normal quantile `Φ⁻¹(p)` for `p ∈ (0, 1)`.
///
/// Acklam's rational initial guess followed by two Halley steps on the
/// CDF above.
pub fn std_normal_quantile<T: Real>(p: T) -> T {
    if p <= T::zero() {
        return T::neg_infinity();
    }
    if p >= T::one() {
        return T::infinity();
    }
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    let pf = p.to_f64().unwrap_or(0.5);
    let p_low = 0.02425;
    let guess = if pf < p_low {
        let q = (-2.0 * pf.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if pf <= 1.0 - p_low {
        let q = pf - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - pf).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let mut x = T::lit(guess);
    for _ in 0..2 {
        let e = std_normal_cdf(x) - p;
        let u = e / std_normal_pdf(x);
        x = x - u / (T::one() + x * u / T::lit(2.0));
    }
    x
}
