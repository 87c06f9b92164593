//! Sine and cosine integrals.
//!
//! Si(x) = ∫₀ˣ sin t/t dt, Ci(x) = γ + ln x − Cin(x) and the entire function
//! Cin(x) = ∫₀ˣ (1 − cos t)/t dt. Power series below 3, a Lentz continued
//! fraction for E₁(ix) up to 40 and the auxiliary-function asymptotic series
//! beyond.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::quadrature::gl10;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const SERIES_MAX: f64 = 3.0;
const ASYMPTOTIC_MIN: f64 = 40.0;

/// Si(x) for any real x, odd extension; Si(±∞) = ±π/2.
pub fn si(x: f64) -> f64 {
    if x < 0.0 {
        return -si(-x);
    }
    if x == f64::INFINITY {
        return FRAC_PI_2;
    }
    if x <= SERIES_MAX {
        si_series(x)
    } else if x < ASYMPTOTIC_MIN {
        si_ci_fraction(x).0
    } else {
        let (f, g) = auxiliary(x);
        let (s, c) = x.sin_cos();
        FRAC_PI_2 - f * c - g * s
    }
}

/// Ci(x) for x > 0.
pub fn ci(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x == f64::INFINITY {
        return 0.0;
    }
    if x <= SERIES_MAX {
        EULER_GAMMA + x.ln() - cin_series(x)
    } else if x < ASYMPTOTIC_MIN {
        si_ci_fraction(x).1
    } else {
        let (f, g) = auxiliary(x);
        let (s, c) = x.sin_cos();
        f * s - g * c
    }
}

/// Cin(x) = ∫₀ˣ (1 − cos t)/t dt, even in x.
pub fn cin(x: f64) -> f64 {
    let x = x.abs();
    if x <= SERIES_MAX {
        cin_series(x)
    } else {
        EULER_GAMMA + x.ln() - ci(x)
    }
}

/// Si(v) − Si(u) without cancellation when u and v are close.
pub fn si_diff(u: f64, v: f64) -> f64 {
    if (v - u).abs() <= 1.0 {
        gl10().integrate(&sinc_unnormalized, u, v)
    } else {
        si(v) - si(u)
    }
}

/// sin(t)/t with the removable singularity filled.
pub fn sinc_unnormalized(t: f64) -> f64 {
    if t.abs() < 1e-4 {
        let t2 = t * t;
        1.0 - t2 / 6.0 + t2 * t2 / 120.0
    } else {
        t.sin() / t
    }
}

/// ∫_a^b e^{ikx}/x dx for an interval not containing 0.
pub fn exp_over_x(k: f64, a: f64, b: f64) -> Complex64 {
    debug_assert!(a < b && (a > 0.0 || b < 0.0));
    if b < 0.0 {
        return -exp_over_x(-k, -b, -a);
    }
    if k == 0.0 {
        return Complex64::new((b / a).ln(), 0.0);
    }
    let kk = k.abs();
    let s = k.signum() * si_diff(kk * a, kk * b);
    let c = if kk * a >= 1.0 {
        ci(kk * b) - ci(kk * a)
    } else {
        (b / a).ln() - (cin(kk * b) - cin(kk * a))
    };
    Complex64::new(c, s)
}

fn si_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = 0usize;
    loop {
        n += 1;
        let k = (2 * n) as f64;
        term *= -x2 / (k * (k + 1.0));
        let add = term / (k + 1.0);
        sum += add;
        if add.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

fn cin_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = 1.0;
    let mut sum = 0.0;
    let mut n = 0usize;
    loop {
        n += 1;
        let k = (2 * n) as f64;
        term *= -x2 / ((k - 1.0) * k);
        let add = -term / k;
        sum += add;
        if add.abs() <= 1e-17 * sum.abs() || sum == 0.0 {
            break;
        }
    }
    sum
}

/// Modified Lentz evaluation of E₁(ix); returns (Si, Ci).
fn si_ci_fraction(t: f64) -> (f64, f64) {
    let one = Complex64::new(1.0, 0.0);
    let fpmin = 1e-300;
    let mut b = Complex64::new(1.0, t);
    let mut c = Complex64::new(1.0 / fpmin, 0.0);
    let mut d = one / b;
    let mut h = d;
    for i in 2..500 {
        let a = -((i - 1) * (i - 1)) as f64;
        b += 2.0;
        d = one / (d * a + b);
        c = b + Complex64::new(a, 0.0) / c;
        let del = c * d;
        h *= del;
        if (del.re - 1.0).abs() + del.im.abs() < 1e-16 {
            break;
        }
    }
    let (s, co) = t.sin_cos();
    let h = Complex64::new(co, -s) * h;
    (FRAC_PI_2 + h.im, -h.re)
}

/// Asymptotic series for the auxiliary functions f and g.
fn auxiliary(x: f64) -> (f64, f64) {
    let inv2 = 1.0 / (x * x);
    let mut f = 0.0;
    let mut g = 0.0;
    let mut tf = 1.0;
    let mut tg = 1.0;
    let mut prev = f64::INFINITY;
    for k in 0..40 {
        if k > 0 {
            let kf = k as f64;
            tf *= -(2.0 * kf - 1.0) * (2.0 * kf) * inv2;
            tg *= -(2.0 * kf) * (2.0 * kf + 1.0) * inv2;
        }
        let size = tf.abs().max(tg.abs());
        if size > prev {
            break;
        }
        f += tf;
        g += tg;
        if size < 1e-17 {
            break;
        }
        prev = size;
    }
    (f / x, g * inv2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn reference_values() {
        assert_eq!(si(0.0), 0.0);
        assert!(close(si(1.0), 0.946_083_070_367_183, 1e-15));
        assert!(close(si(std::f64::consts::PI), 1.851_937_051_982_466_2, 4e-15));
        assert!(close(si(5.0), 1.549_931_244_944_674, 1e-14));
        assert!(close(si(10.0), 1.658_347_594_218_874, 1e-14));
        assert!(close(si(100.0), 1.562_225_466_889_056_3, 1e-14));
        assert!(close(ci(1.0), 0.337_403_922_900_968_1, 1e-15));
        assert!(close(ci(10.0), -0.045_456_433_004_455_4, 1e-14));
        assert!(close(ci(100.0), -0.005_148_825_142_610_49, 1e-14));
        assert!(close(si(f64::INFINITY), FRAC_PI_2, 0.0));
    }

    #[test]
    fn branches_agree_at_switch_points() {
        // reference values at the branch boundaries
        let refs = [
            (SERIES_MAX, 1.848_652_527_999_468_3, 0.119_629_786_008_000_3),
            (ASYMPTOTIC_MIN, 1.586_985_119_354_784_6, 0.019_020_007_896_208_8),
        ];
        for (x, s, c) in refs {
            for y in [x * (1.0 - 1e-15), x, x * (1.0 + 1e-15)] {
                assert!(close(si(y), s, 1e-14), "si at {y}");
                assert!(close(ci(y), c, 1e-14), "ci at {y}");
            }
        }
    }

    #[test]
    fn si_matches_quadrature() {
        let rule = crate::quadrature::gl15();
        for x in [0.3f64, 2.9, 3.1, 7.0, 20.0, 39.0, 41.0, 60.0] {
            let n = (x * 4.0).ceil() as usize;
            let mut acc = 0.0;
            for i in 0..n {
                let a = x * i as f64 / n as f64;
                let b = x * (i + 1) as f64 / n as f64;
                acc += rule.integrate(&sinc_unnormalized, a, b);
            }
            assert!(close(si(x), acc, 2e-14), "x={x}: {} vs {acc}", si(x));
        }
    }

    #[test]
    fn cin_is_consistent() {
        for x in [0.5, 2.0, 3.5, 12.0, 55.0] {
            let lhs = ci(x);
            let rhs = EULER_GAMMA + f64::ln(x) - cin(x);
            assert!(close(lhs, rhs, 1e-14));
        }
        assert!(close(cin(1e-3), 2.5e-7 - 1e-12 / 96.0, 1e-20));
    }

    #[test]
    fn exp_over_x_matches_quadrature() {
        let rule = crate::quadrature::gl15();
        for &(k, a, b) in &[(3.0, 0.1, 2.0), (-7.5, 0.05, 1.0), (1e-6, 0.2, 3.0), (40.0, -3.0, -0.4), (0.0, 1.0, 2.0)] {
            let n = 400;
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..n {
                let lo = a + (b - a) * i as f64 / n as f64;
                let hi = a + (b - a) * (i + 1) as f64 / n as f64;
                acc += rule.integrate(&|x: f64| Complex64::from_polar(1.0 / x, k * x), lo, hi);
            }
            let got = exp_over_x(k, a, b);
            assert!((got - acc).norm() < 1e-12, "k={k}: {got} vs {acc}");
        }
    }

    #[test]
    fn si_diff_short_intervals() {
        let u: f64 = 1234.5;
        let v = u + 1e-9;
        let d = si_diff(u, v);
        let m = 0.5 * (u + v);
        assert!(close(d, (v - u) * m.sin() / m, 1e-24));
    }
}
