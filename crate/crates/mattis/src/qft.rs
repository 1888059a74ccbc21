//! Closed-form zero temperature correlators in the IR and QFT limits.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::g_angular;
use crate::params::{derived, validate_couplings, Beta, ModelParams, Sign};
use crate::quad::{adaptive, tanh_sinh};
use crate::special::{alpha1, exp_integral_e1, EULER_GAMMA};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Distributional factor in the chain coordinate `x_{-s}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainDelta {
    /// Kronecker `δ_{x_{-s},0}` on the ã-lattice.
    Kronecker,
    /// Dirac `δ(x_{-s})` of the continuum limit.
    Dirac,
}

/// Factors that multiply a closed-form value but are never folded into it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Distributional {
    /// The result carries `δ_{q1,-q2} δ_{r1,r2} δ_{s1,s2}`.
    pub flavor_diagonal: bool,
    /// The result carries `δ_{s1,s2}` only.
    pub direction_diagonal: bool,
    pub chain: ChainDelta,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForm {
    pub value: Complex64,
    pub delta: Distributional,
}

fn require_g2_zero(params: &ModelParams) -> Result<()> {
    params.validate()?;
    if params.gamma2 != 0.0 {
        return Err(Error::input("closed form needs γ2 = 0"));
    }
    require_zero_temperature(params.beta)
}

fn require_zero_temperature(beta: Beta) -> Result<()> {
    if !beta.is_infinite() {
        return Err(Error::input("closed form holds at zero temperature only"));
    }
    Ok(())
}

fn check_regulator(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::input("ε must be positive"));
    }
    Ok(())
}

fn check_time(t: Complex64) -> Result<()> {
    if t.im > 0.0 || (t.im != 0.0 && t.re != 0.0) || !(t.re.is_finite() && t.im.is_finite()) {
        return Err(Error::input("time must be real or -iτ with τ >= 0"));
    }
    Ok(())
}

/// Principal logarithm that refuses arguments on the branch cut.
fn principal_ln(z: Complex64, what: &str) -> Result<Complex64> {
    if z.im == 0.0 && z.re <= 0.0 {
        return Err(Error::input(format!("{what} lies on the branch cut")));
    }
    Ok(z.ln())
}

/// `ln G_{r,s,r,s}(x e_s, t; ε)` in the IR limit at γ2 = 0, β = ∞, up to `O(1/L)`.
pub fn ln_green_ir_g2zero(params: &ModelParams, r: Sign, x: f64, t: Complex64, eps: f64) -> Result<Complex64> {
    require_g2_zero(params)?;
    check_regulator(eps)?;
    check_time(t)?;
    let dc = params.derived();
    let k = dc.k_exp;
    let (vt, vf) = (dc.v_tilde, params.v_f);
    let rf = r.f();
    let cut = PI / params.a_tilde;
    let lead = Complex64::new(eps, 0.0) - I * (rf * x - vt * t);
    let sq = (eps + I * vt * t).powi(2) + x * x;
    let z1 = cut * lead;
    let z2 = cut * (eps + I * (rf * x + vt * t));
    let z3 = cut * (eps - I * (rf * x - vf * t));
    let mut v = k * (params.length() / (2.0 * PI)).ln() - principal_ln(lead, "ε - i(rx - ṽt)")?;
    v -= 0.5 * (k - 1.0) * principal_ln(sq, "(ε + iṽt)² + x²")?;
    v -= 0.5 * (k + 1.0) * exp_integral_e1(z1)?;
    v -= 0.5 * (k - 1.0) * exp_integral_e1(z2)?;
    v += exp_integral_e1(z3)?;
    Ok(v)
}

/// IR-limit fermion two-point function at γ2 = 0 with the regulator used by
/// the lattice sums: `(1/(2πãε)) G(x, t; ε)/G(0, 0; ε)`.
///
/// The value includes the `1/ã` of the chain Kronecker delta.
pub fn fermion2pt_ir_g2zero(params: &ModelParams, r: Sign, x: f64, t: Complex64, eps: f64) -> Result<ClosedForm> {
    let g = ln_green_ir_g2zero(params, r, x, t, eps)?;
    let g0 = ln_green_ir_g2zero(params, r, 0.0, Complex64::new(0.0, 0.0), eps)?;
    Ok(ClosedForm {
        value: (g - g0).exp() / (2.0 * PI * params.a_tilde * eps),
        delta: Distributional {
            flavor_diagonal: true,
            direction_diagonal: true,
            chain: ChainDelta::Kronecker,
        },
    })
}

/// Same correlator in the `ε ≪ ã` form where `G(0, 0; ε)` is replaced by its
/// leading asymptote; `ε` stands for the `0⁺` shifts.
pub fn fermion2pt_ir_g2zero_limit(params: &ModelParams, r: Sign, x: f64, t: Complex64, eps: f64) -> Result<ClosedForm> {
    require_g2_zero(params)?;
    check_regulator(eps)?;
    check_time(t)?;
    let dc = params.derived();
    let k = dc.k_exp;
    let (vt, vf) = (dc.v_tilde, params.v_f);
    let rf = r.f();
    let a = params.a_tilde;
    let cut = PI / a;
    let lead = Complex64::new(eps, 0.0) - I * (rf * x - vt * t);
    let sq = (eps + I * vt * t).powi(2) + x * x;
    let ln_f = -0.5 * (k + 1.0) * exp_integral_e1(cut * lead)?
        - 0.5 * (k - 1.0) * exp_integral_e1(cut * (eps + I * (rf * x + vt * t)))?
        + exp_integral_e1(cut * (eps - I * (rf * x - vf * t)))?;
    let ln_v = (1.0 - k) * (EULER_GAMMA + PI.ln()) + ln_f - principal_ln(lead, "ε - i(rx - ṽt)")?
        + 0.5 * (k - 1.0) * (2.0 * a.ln() - principal_ln(sq, "(ε + iṽt)² + x²")?);
    Ok(ClosedForm {
        value: ln_v.exp() / (2.0 * PI * a),
        delta: Distributional {
            flavor_diagonal: true,
            direction_diagonal: true,
            chain: ChainDelta::Kronecker,
        },
    })
}

/// `ã⟨J_{r1,s}(x e_s, t) J_{r2,s}(0, 0)⟩` in the IR limit at γ2 = 0, β = ∞.
///
/// The value includes the `1/ã` of the chain Kronecker delta.
pub fn density2pt_ir_g2zero(
    params: &ModelParams,
    r1: Sign,
    r2: Sign,
    x: f64,
    t: Complex64,
    eps: f64,
) -> Result<ClosedForm> {
    require_g2_zero(params)?;
    check_regulator(eps)?;
    check_time(t)?;
    let dc = params.derived();
    let (b, vt, vf) = (dc.b_exp, dc.v_tilde, params.v_f);
    let (r1f, r2f) = (r1.f(), r2.f());
    let cut = PI / params.a_tilde;
    let even = b + r1f * r2f / b;
    let odd = r1f + r2f;
    let zm = Complex64::new(eps, 0.0) - I * (x - vt * t);
    let zp = Complex64::new(eps, 0.0) + I * (x + vt * t);
    let mut e = Complex64::new(0.0, 0.0);
    if r1 == r2 {
        e += 4.0 * alpha1(cut * (eps - I * (r1f * x - vf * t)));
    }
    for rt in [1.0, -1.0] {
        e -= (even + rt * odd) * alpha1(cut * (eps - I * (rt * x - vt * t)));
    }
    e *= cut * cut;
    let v = (even + odd) / (zm * zm) + (even - odd) / (zp * zp) + e;
    Ok(ClosedForm {
        value: v / (4.0 * (2.0 * PI).powi(2) * params.a_tilde),
        delta: Distributional {
            flavor_diagonal: false,
            direction_diagonal: true,
            chain: ChainDelta::Kronecker,
        },
    })
}

/// Quadrature family used for the constant `C(γ1, γ2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CScheme {
    /// Adaptive Gauss–Kronrod away from the endpoints, Gauss–Legendre on the
    /// slivers next to them.
    GaussKronrod,
    /// Tanh-sinh on the open intervals.
    TanhSinh,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CEstimate {
    pub value: f64,
    /// Error estimate on `value`.
    pub error: f64,
}

/// Width of the endpoint slivers in the Gauss–Kronrod scheme.
const SLIVER: f64 = 1e-4;

fn c_integrand(theta: f64, a: f64, b: f64, k: f64) -> f64 {
    let (sn, cs) = theta.sin_cos();
    let c2 = (2.0 * theta).cos();
    let s2 = (2.0 * theta).sin();
    let (small, big) = if a == 1.0 {
        (0.0, 1.0)
    } else {
        let root = (1.0 - a * s2 * s2).max(0.0).sqrt();
        // ½(1 ± cos2θ/root), each written without cancellation
        (0.5 * s2 * s2 * (1.0 - a) / (root * (root + c2.abs())), 0.5 * (1.0 + c2.abs() / root))
    };
    let (hp, hm) = if c2 >= 0.0 { (big, small) } else { (small, big) };
    let mut sum = 0.0;
    for (s, h) in [(Sign::Plus, hp), (Sign::Minus, hm)] {
        if h == 0.0 {
            continue;
        }
        let g = g_angular(s, theta, a);
        sum += 0.5 * h * (b * cs * cs / g + g / b);
    }
    let w = if theta < FRAC_PI_4 { 1.0 / cs } else { 1.0 / sn };
    w / (cs * cs) * (sum - k * cs.abs())
}

fn gauss2(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let d = h / 3f64.sqrt();
    h * (f(c - d) + f(c + d))
}

/// `ln E = -ln C` with the given scheme.
pub fn c_log_integral(gamma1: f64, gamma2: f64, scheme: CScheme, tol: f64) -> Result<CEstimate> {
    validate_couplings(gamma1, gamma2)?;
    if !(tol >= 1e-10) {
        return Err(Error::input("tolerance must be >= 1e-10"));
    }
    let dc = derived(gamma1, gamma2, 1.0);
    let f = |th: f64| c_integrand(th, dc.a, dc.b_exp, dc.k_exp);
    let inner_tol = tol * 1e-2;
    match scheme {
        CScheme::GaussKronrod => {
            let lo = adaptive(f, SLIVER, FRAC_PI_4, inner_tol, inner_tol, 4, 4000)?;
            let hi = adaptive(f, FRAC_PI_4, FRAC_PI_2 - SLIVER, inner_tol, inner_tol, 4, 4000)?;
            let ends = gauss2(&f, 0.0, SLIVER) + gauss2(&f, FRAC_PI_2 - SLIVER, FRAC_PI_2);
            Ok(CEstimate {
                value: lo.value + hi.value + ends,
                error: lo.error + hi.error,
            })
        }
        CScheme::TanhSinh => {
            let lo = tanh_sinh(f, 0.0, FRAC_PI_4, inner_tol, inner_tol)?;
            let hi = tanh_sinh(f, FRAC_PI_4, FRAC_PI_2, inner_tol, inner_tol)?;
            Ok(CEstimate {
                value: lo.value + hi.value,
                error: lo.error + hi.error,
            })
        }
    }
}

/// The constant `C(γ1, γ2)` of the QFT-limit fermion two-point function.
pub fn c_constant_with(gamma1: f64, gamma2: f64, scheme: CScheme, tol: f64) -> Result<CEstimate> {
    let ln_e = c_log_integral(gamma1, gamma2, scheme, tol)?;
    let value = (-ln_e.value).exp();
    Ok(CEstimate {
        value,
        error: value * ln_e.error,
    })
}

pub fn c_constant(gamma1: f64, gamma2: f64, tol: f64) -> Result<CEstimate> {
    c_constant_with(gamma1, gamma2, CScheme::GaussKronrod, tol)
}

/// Renormalized QFT-limit fermion two-point function; caches `C` and `K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QftTwoPoint {
    pub c: f64,
    pub k: f64,
    /// Effective velocity `ṽ_F √A`.
    pub velocity: f64,
}

impl QftTwoPoint {
    pub fn new(params: &ModelParams) -> Result<Self> {
        params.validate()?;
        let dc = params.derived();
        let c = c_constant(params.gamma1, params.gamma2, 1e-10)?.value;
        Ok(QftTwoPoint {
            c,
            k: dc.k_exp,
            velocity: dc.v_tilde * dc.a.sqrt(),
        })
    }

    pub fn eval(&self, r: Sign, x: f64, t: Complex64, l0: f64, eps: f64) -> Result<ClosedForm> {
        check_regulator(eps)?;
        check_time(t)?;
        if !(l0 > 0.0 && l0.is_finite()) {
            return Err(Error::input("L0 must be positive"));
        }
        let v = self.velocity;
        let lead = Complex64::new(eps, 0.0) - I * (r.f() * x - v * t);
        let sq = (eps + I * v * t).powi(2) + x * x;
        let ln_v = -principal_ln(lead, "ε - i(rx - ṽ√A t)")?
            + 0.5 * (self.k - 1.0) * (2.0 * l0.ln() - principal_ln(sq, "(ε + iṽ√A t)² + x²")?);
        Ok(ClosedForm {
            value: self.c / (2.0 * PI) * ln_v.exp(),
            delta: Distributional {
                flavor_diagonal: true,
                direction_diagonal: true,
                chain: ChainDelta::Dirac,
            },
        })
    }
}

/// One-shot evaluation of [`QftTwoPoint::eval`].
pub fn fermion2pt_qft(params: &ModelParams, r: Sign, x: f64, t: Complex64, l0: f64, eps: f64) -> Result<ClosedForm> {
    require_zero_temperature(params.beta)?;
    QftTwoPoint::new(params)?.eval(r, x, t, l0, eps)
}

/// Renormalization factor `(e^γ π L0/ã)^{K-1}`.
pub fn renormalization_factor(params: &ModelParams, l0: f64) -> f64 {
    let k = params.derived().k_exp;
    (EULER_GAMMA.exp() * PI * l0 / params.a_tilde).powf(k - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_limits() {
        let p = ModelParams::new(0.0, 0.0).with_size(0.5, 101);
        let (x, eps) = (0.8, 1e-3);
        let want = 1.0 / (0.5 * 2.0 * PI) / Complex64::new(eps, -x);
        let lim = fermion2pt_ir_g2zero_limit(&p, Sign::Plus, x, Complex64::new(0.0, 0.0), eps).unwrap();
        assert!((lim.value - want).norm() < 1e-12 * want.norm());
        let q = fermion2pt_qft(&p, Sign::Plus, x, Complex64::new(0.0, 0.0), 1.0, eps).unwrap();
        assert!((q.value - want * 0.5).norm() < 1e-9 * want.norm());
        assert_eq!(q.delta.chain, ChainDelta::Dirac);
    }

    #[test]
    fn luttinger_exponents() {
        let k = derived(0.5, 0.0, 1.0).k_exp;
        assert!((k - 1.1547005383792515).abs() < 1e-12);
        let k = derived(0.5, 0.5, 1.0).k_exp;
        assert!((k - 1.1226828).abs() < 1e-6);
    }

    #[test]
    fn c_is_one_without_inter_chain_coupling() {
        for g1 in [-0.9, 0.0, 0.5] {
            let c = c_constant(g1, 0.0, 1e-10).unwrap();
            assert!((c.value - 1.0).abs() < 1e-12, "{g1} {}", c.value);
        }
    }

    #[test]
    fn c_schemes_agree() {
        for (g1, g2) in [(0.5, 0.5), (-0.3, 0.6), (0.2, -0.7)] {
            let a = c_constant_with(g1, g2, CScheme::GaussKronrod, 1e-10).unwrap();
            let b = c_constant_with(g1, g2, CScheme::TanhSinh, 1e-10).unwrap();
            assert!((a.value - b.value).abs() < 1e-9, "{g1} {g2} {} {}", a.value, b.value);
        }
    }

    #[test]
    fn rejects_g2_and_temperature() {
        let p = ModelParams::new(0.2, 0.1);
        assert!(ln_green_ir_g2zero(&p, Sign::Plus, 1.0, Complex64::new(0.0, 0.0), 0.1).is_err());
        let p = ModelParams::new(0.2, 0.0).with_beta(Beta::Finite(1.0));
        assert!(density2pt_ir_g2zero(&p, Sign::Plus, Sign::Plus, 1.0, Complex64::new(0.0, 0.0), 0.1).is_err());
    }

    #[test]
    fn short_distance_is_free() {
        let p = ModelParams::new(0.6, 0.0).with_size(1.0, 1001);
        let eps = 1e-4;
        let x = 1e-3;
        let v = fermion2pt_ir_g2zero(&p, Sign::Minus, x, Complex64::new(0.0, 0.0), eps).unwrap();
        let free = 1.0 / (2.0 * PI) / Complex64::new(eps, x);
        assert!((v.value / free - 1.0).norm() < 1e-2);
    }
}
