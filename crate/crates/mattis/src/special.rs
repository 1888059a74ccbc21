//! Exponential integral and related functions.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_6;
pub const ZETA3: f64 = 1.202_056_903_159_594_285_4;

/// Which expansion produced an E1 value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum E1Method {
    Series,
    ContinuedFraction,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaEval {
    pub z: Complex64,
    pub value: Complex64,
    pub method: E1Method,
}

const SWITCH: f64 = 4.0;

fn e1_series(z: Complex64) -> Complex64 {
    // E1(z) = -γ - ln z - Σ_{n>=1} (-z)^n / (n·n!)
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for n in 1..200 {
        term *= -z / n as f64;
        let add = term / n as f64;
        sum += add;
        if add.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    -EULER_GAMMA - z.ln() - sum
}

fn e1_continued_fraction(z: Complex64) -> Result<Complex64> {
    // E1(z) = e^{-z} / (z + 1 - 1²/(z + 3 - 2²/(z + 5 - ...))), modified Lentz
    let tiny = 1e-300;
    let mut b = z + 1.0;
    let mut f = b;
    let mut c = f;
    let mut d = Complex64::new(0.0, 0.0);
    for n in 1..100_000 {
        let an = -(n as f64).powi(2);
        b += 2.0;
        d = b + an * d;
        if d.norm() < tiny {
            d = Complex64::new(tiny, 0.0);
        }
        c = b + an / c;
        if c.norm() < tiny {
            c = Complex64::new(tiny, 0.0);
        }
        d = d.inv();
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).norm() < 4.0 * f64::EPSILON {
            return Ok((-z).exp() / f);
        }
    }
    Err(Error::no_convergence("E1 continued fraction", f64::NAN))
}

fn check_domain(z: Complex64) -> Result<()> {
    if z.norm() == 0.0 {
        return Err(Error::input("E1 is singular at z = 0"));
    }
    if z.im == 0.0 && z.re < 0.0 {
        return Err(Error::input("E1 argument on the branch cut"));
    }
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::input("E1 argument not finite"));
    }
    Ok(())
}

/// `E1(z) = ∫_1^∞ e^{-zt}/t dt` with the method used.
pub fn exp_integral_e1_with_method(z: Complex64) -> Result<(Complex64, E1Method)> {
    check_domain(z)?;
    if z.norm() <= SWITCH {
        Ok((e1_series(z), E1Method::Series))
    } else {
        Ok((e1_continued_fraction(z)?, E1Method::ContinuedFraction))
    }
}

pub fn exp_integral_e1(z: Complex64) -> Result<Complex64> {
    exp_integral_e1_with_method(z).map(|v| v.0)
}

/// `σ(z) = exp(-E1(z))`.
pub fn sigma(z: Complex64) -> Result<SigmaEval> {
    let (e1, method) = exp_integral_e1_with_method(z)?;
    Ok(SigmaEval {
        z,
        value: (-e1).exp(),
        method,
    })
}

/// `α1(z) = e^{-z}(1+z)/z²`.
pub fn alpha1(z: Complex64) -> Complex64 {
    (-z).exp() * (1.0 + z) / (z * z)
}

/// `B_{2n}/(2n)!` from `2(-1)^{n+1} ζ(2n)/(2π)^{2n}`.
fn bernoulli_ratio(n: usize) -> f64 {
    let two_n = 2 * n as i32;
    let exact = [PI.powi(2) / 6.0, PI.powi(4) / 90.0, PI.powi(6) / 945.0, PI.powi(8) / 9450.0];
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    if n <= exact.len() {
        return sign * 2.0 * exact[n - 1] / (2.0 * PI).powi(two_n);
    }
    let n_terms = 60;
    let mut zeta = 0.0;
    for k in (1..=n_terms).rev() {
        zeta += (k as f64).powi(-two_n);
    }
    // Euler-Maclaurin tail
    let (nf, sf) = (n_terms as f64, two_n as f64);
    zeta += nf.powf(1.0 - sf) / (sf - 1.0) - 0.5 * nf.powf(-sf) + sf * nf.powf(-sf - 1.0) / 12.0;
    sign * 2.0 * zeta / (2.0 * PI).powi(two_n)
}

/// `F1(X) = ∫_0^X ln(1 - e^{-x}) dx` for `X >= 0`.
pub fn f1(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < 2.0 {
        let mut s = x * x.ln() - x - 0.25 * x * x;
        let x2 = x * x;
        let mut xp = x * x2;
        for n in 1..40 {
            let nn = n as f64;
            let add = bernoulli_ratio(n) * xp / (2.0 * nn * (2.0 * nn + 1.0));
            s += add;
            if add.abs() < 1e-18 * s.abs() {
                break;
            }
            xp *= x2;
        }
        s
    } else {
        let mut s = 0.0;
        for k in (1..=60).rev() {
            let kf = k as f64;
            s += (-kf * x).exp() / (kf * kf);
        }
        s - PI * PI / 6.0
    }
}

/// `F2(X) = ∫_0^X u ln(1 - e^{-u}) du` for `X >= 0`.
pub fn f2(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < 2.0 {
        let x2 = x * x;
        let mut s = 0.5 * x2 * x.ln() - 0.25 * x2 - x2 * x / 6.0;
        let mut xp = x2 * x2;
        for n in 1..40 {
            let nn = n as f64;
            let add = bernoulli_ratio(n) * xp / (2.0 * nn * (2.0 * nn + 2.0));
            s += add;
            if add.abs() < 1e-18 * s.abs() {
                break;
            }
            xp *= x2;
        }
        s
    } else {
        let mut s = 0.0;
        for k in (1..=60).rev() {
            let kf = k as f64;
            s += (-kf * x).exp() * (x / (kf * kf) + 1.0 / (kf * kf * kf));
        }
        s - ZETA3
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::adaptive;

    #[test]
    fn e1_reference_value() {
        let v = exp_integral_e1(Complex64::new(1.0, 0.0)).unwrap();
        assert!((v.re - 0.21938393439552).abs() < 1e-13);
        assert!(v.im.abs() < 1e-16);
    }

    #[test]
    fn switchover_continuity() {
        for k in 0..64 {
            let th = -3.0 + 6.0 * k as f64 / 63.0;
            let z = Complex64::from_polar(SWITCH, th);
            let a = e1_series(z);
            let b = e1_continued_fraction(z).unwrap();
            assert!((a - b).norm() <= 1e-12 * (1.0 + a.norm()), "{z} {a} {b}");
        }
    }

    #[test]
    fn domain_errors() {
        assert!(exp_integral_e1(Complex64::new(0.0, 0.0)).is_err());
        assert!(exp_integral_e1(Complex64::new(-1.0, 0.0)).is_err());
        assert!(exp_integral_e1(Complex64::new(-1.0, 1e-9)).is_ok());
    }

    #[test]
    fn f1_f2_against_quadrature() {
        for &x in &[0.01, 0.3, 1.0, 1.999, 2.0, 3.5, 10.0, 40.0] {
            let q1 = adaptive(|u: f64| (-(-u).exp_m1()).ln(), 0.0, x, 1e-15, 1e-14, 4, 4000).unwrap();
            let q2 = adaptive(|u: f64| u * (-(-u).exp_m1()).ln(), 0.0, x, 1e-15, 1e-14, 4, 4000).unwrap();
            assert!((f1(x) - q1.value).abs() < 1e-12, "f1 {x} {} {}", f1(x), q1.value);
            assert!((f2(x) - q2.value).abs() < 1e-12, "f2 {x} {} {}", f2(x), q2.value);
        }
        assert!((f1(1e3) + PI * PI / 6.0).abs() < 1e-15);
        assert!((f2(1e3) + ZETA3).abs() < 1e-15);
    }

    #[test]
    fn alpha1_decays() {
        let a = alpha1(Complex64::new(50.0, 3.0));
        assert!(a.norm() < 1e-20);
        let z = Complex64::new(0.7, -0.2);
        assert!((alpha1(z) - (-z).exp() * (1.0 + z) / (z * z)).norm() < 1e-15);
    }
}
