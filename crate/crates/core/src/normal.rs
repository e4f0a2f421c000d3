//! Standard normal distribution functions built on a complementary error
//! function port of the FreeBSD `s_erf.c` rational approximations
//! (Copyright (C) 1993 by Sun Microsystems, Inc. Permission to use, copy,
//! modify, and distribute this software is freely granted, provided that
//! this notice is preserved.)
//!
//! The coefficients are evaluated in the caller's scalar type; in `f64` the
//! absolute error of [`std_normal_cdf`] is far below `1e-15`.

use crate::scalar::Scalar;

const ERX: f64 = 8.45062911510467529297e-01;

const PP0: f64 = 1.28379167095512558561e-01;
const PP1: f64 = -3.25042107247001499370e-01;
const PP2: f64 = -2.84817495755985104766e-02;
const PP3: f64 = -5.77027029648944159157e-03;
const PP4: f64 = -2.37630166566501626084e-05;
const QQ1: f64 = 3.97917223959155352819e-01;
const QQ2: f64 = 6.50222499887672944485e-02;
const QQ3: f64 = 5.08130628187576562776e-03;
const QQ4: f64 = 1.32494738004321644526e-04;
const QQ5: f64 = -3.96022827877536812320e-06;

const PA0: f64 = -2.36211856075265944077e-03;
const PA1: f64 = 4.14856118683748331666e-01;
const PA2: f64 = -3.72207876035701323847e-01;
const PA3: f64 = 3.18346619901161753674e-01;
const PA4: f64 = -1.10894694282396677476e-01;
const PA5: f64 = 3.54783043256182359371e-02;
const PA6: f64 = -2.16637559486879084300e-03;
const QA1: f64 = 1.06420880400844228286e-01;
const QA2: f64 = 5.40397917702171048937e-01;
const QA3: f64 = 7.18286544141962662868e-02;
const QA4: f64 = 1.26171219808761642112e-01;
const QA5: f64 = 1.36370839120290507362e-02;
const QA6: f64 = 1.19844998467991074170e-02;

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

// 2^-56
const TINY: f64 = 1.387_778_780_781_445_7e-17;

/// Horner evaluation with `f64` coefficients in scalar type `T`.
fn horner<T: Scalar>(x: T, coeffs: &[f64]) -> T {
    coeffs
        .iter()
        .rev()
        .fold(T::zero(), |acc, &c| acc * x + T::lit(c))
}

/// Keeps the high 32 bits of the `f64` representation of `x`, so that
/// `z * z` is exact when splitting `exp(-x*x)`.
fn truncate_low_word<T: Scalar>(x: T) -> T {
    let bits = x.to_f64_lossy().to_bits() & 0xffff_ffff_0000_0000;
    T::lit(f64::from_bits(bits))
}

/// Complementary error function `erfc(x) = 1 - erf(x)`.
pub fn erfc<T: Scalar>(x: T) -> T {
    let one = T::one();
    let two = T::lit(2.0);
    if x.is_nan() {
        return x;
    }
    if x == T::infinity() {
        return T::zero();
    }
    if x == T::neg_infinity() {
        return two;
    }
    let negative = x < T::zero();
    let ax = x.abs();

    if ax < T::lit(0.84375) {
        let tail = if ax < T::lit(TINY) {
            ax
        } else {
            let z = ax * ax;
            let r = horner(z, &[PP0, PP1, PP2, PP3, PP4]);
            let s = horner(z, &[1.0, QQ1, QQ2, QQ3, QQ4, QQ5]);
            let y = r / s;
            if ax < T::lit(0.25) {
                ax + ax * y
            } else {
                T::lit(0.5) + (ax * y + (ax - T::lit(0.5)))
            }
        };
        return if negative { one + tail } else { one - tail };
    }

    if ax < T::lit(1.25) {
        let s = ax - one;
        let p = horner(s, &[PA0, PA1, PA2, PA3, PA4, PA5, PA6]);
        let q = horner(s, &[1.0, QA1, QA2, QA3, QA4, QA5, QA6]);
        return if negative {
            one + T::lit(ERX) + p / q
        } else {
            one - T::lit(ERX) - p / q
        };
    }

    if ax < T::lit(28.0) {
        let s = one / (ax * ax);
        let (r, q) = if ax < T::lit(1.0 / 0.35) {
            (horner(s, &RA), horner(s, &SA))
        } else {
            if negative && ax > T::lit(6.0) {
                return two;
            }
            (horner(s, &RB), horner(s, &SB))
        };
        let z = truncate_low_word(ax);
        let e = (-z * z - T::lit(0.5625)).exp() * ((z - ax) * (z + ax) + r / q).exp();
        return if negative { two - e / ax } else { e / ax };
    }

    if negative {
        two
    } else {
        T::zero()
    }
}

/// Error function.
pub fn erf<T: Scalar>(x: T) -> T {
    T::one() - erfc(x)
}

/// Standard normal CDF `Φ(x)`.
pub fn std_normal_cdf<T: Scalar>(x: T) -> T {
    T::lit(0.5) * erfc(-x / T::SQRT_2())
}

/// Standard normal survival function `1 - Φ(x)`, accurate in the upper tail.
pub fn std_normal_sf<T: Scalar>(x: T) -> T {
    T::lit(0.5) * erfc(x / T::SQRT_2())
}

/// Standard normal density.
pub fn std_normal_pdf<T: Scalar>(x: T) -> T {
    (-(x * x) / T::lit(2.0)).exp() / (T::lit(2.0) * T::PI()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Simpson integration of the density from 0 to `x`.
    fn cdf_by_quadrature(x: f64) -> f64 {
        let n = 20_000;
        let h = x / n as f64;
        let mut acc = std_normal_pdf(0.0) + std_normal_pdf(x);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * std_normal_pdf(i as f64 * h);
        }
        0.5 + acc * h / 3.0
    }

    #[test]
    fn table_values() {
        assert_eq!(std_normal_cdf(0.0_f64), 0.5);
        assert!((std_normal_cdf(-1.959964_f64) - 0.025).abs() < 1e-6);
        assert!((std_normal_cdf(2.0_f64) - 0.977250).abs() < 1e-6);
        assert!((std_normal_cdf(-1.0_f64) - 0.158_655_253_931_457_05).abs() < 1e-15);
    }

    #[test]
    fn matches_quadrature_across_branches() {
        // covers each rational-approximation interval of erfc(x / sqrt 2)
        for &x in &[0.1, 0.3, 0.7, 1.0, 1.5, 2.0, 2.5, 3.0, 4.2, 5.5, 7.0, 9.0] {
            let oracle = cdf_by_quadrature(x);
            assert!((std_normal_cdf(x) - oracle).abs() < 1e-12, "x={x}");
            assert!((std_normal_cdf(-x) - (1.0 - oracle)).abs() < 1e-12, "x=-{x}");
        }
    }

    #[test]
    fn symmetry_and_tails() {
        for i in -400..=400 {
            let x = i as f64 * 0.025;
            let s = std_normal_cdf(x) + std_normal_cdf(-x);
            assert!((s - 1.0).abs() < 2e-16, "x={x}");
            assert_eq!(std_normal_sf(x), std_normal_cdf(-x));
        }
        assert_eq!(std_normal_cdf(f64::NEG_INFINITY), 0.0);
        assert_eq!(std_normal_cdf(f64::INFINITY), 1.0);
        // deep upper tail keeps relative accuracy
        let sf = std_normal_sf(8.0_f64);
        assert!((sf / 6.220_960_574_271_785e-16 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn erf_known_values() {
        assert_eq!(erf(0.0_f64), 0.0);
        assert!((erf(1.0_f64) - 0.842_700_792_949_714_9).abs() < 1e-15);
        assert!((erf(-0.5_f64) + 0.520_499_877_813_046_5).abs() < 1e-15);
    }

    #[test]
    fn single_precision_is_usable() {
        assert_eq!(std_normal_cdf(0.0_f32), 0.5);
        assert!((std_normal_cdf(2.0_f32) - 0.977_249_9).abs() < 1e-6);
    }
}
