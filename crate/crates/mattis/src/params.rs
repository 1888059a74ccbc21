//! Couplings, cutoffs and derived constants.

use std::fmt;

use thiserror::Error;

/// A label taking the values `+1` or `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn from_i32(v: i32) -> Option<Sign> {
        match v {
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            _ => None,
        }
    }

    pub fn i(self) -> i32 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn f(self) -> f64 {
        self.i() as f64
    }

    /// Array slot: `+` is 0, `-` is 1.
    pub fn idx(self) -> usize {
        match self {
            Sign::Plus => 0,
            Sign::Minus => 1,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl std::ops::Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        self.flip()
    }
}

impl std::ops::Mul for Sign {
    type Output = Sign;
    fn mul(self, o: Sign) -> Sign {
        if self == o {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

impl std::str::FromStr for Sign {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "+" | "+1" | "1" | "plus" => Ok(Sign::Plus),
            "-" | "-1" | "minus" => Ok(Sign::Minus),
            t => Err(format!("cannot parse sign {t:?}")),
        }
    }
}

/// Chirality `r` and chain direction `s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FlavorIndex {
    pub r: Sign,
    pub s: Sign,
}

impl FlavorIndex {
    pub fn new(r: Sign, s: Sign) -> Self {
        FlavorIndex { r, s }
    }

    pub fn all() -> [FlavorIndex; 4] {
        [
            FlavorIndex::new(Sign::Plus, Sign::Plus),
            FlavorIndex::new(Sign::Plus, Sign::Minus),
            FlavorIndex::new(Sign::Minus, Sign::Plus),
            FlavorIndex::new(Sign::Minus, Sign::Minus),
        ]
    }
}

/// Inverse temperature; zero temperature is `Infinite`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Beta {
    Finite(f64),
    Infinite,
}

impl Beta {
    pub fn is_infinite(self) -> bool {
        matches!(self, Beta::Infinite)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Beta::Finite(b) => Some(b),
            Beta::Infinite => None,
        }
    }

    /// Bose factor `1/(e^{βω}-1)`, zero at β=∞.
    pub fn bose(self, omega: f64) -> f64 {
        match self {
            Beta::Finite(b) => 1.0 / (b * omega).exp_m1(),
            Beta::Infinite => 0.0,
        }
    }

    /// `1/(1-e^{-βω})`, one at β=∞.
    pub fn bose_plus_one(self, omega: f64) -> f64 {
        match self {
            Beta::Finite(b) => -1.0 / (-b * omega).exp_m1(),
            Beta::Infinite => 1.0,
        }
    }
}

impl fmt::Display for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Beta::Finite(b) => write!(f, "{b}"),
            Beta::Infinite => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for Beta {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
            return Ok(Beta::Infinite);
        }
        t.parse::<f64>()
            .map(Beta::Finite)
            .map_err(|e| format!("cannot parse beta {t:?}: {e}"))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamViolation {
    #[error("|γ1|<1 violated (γ1 = {0})")]
    Gamma1(f64),
    #[error("|γ2|<|1+γ1| violated (γ2 = {gamma2}, γ1 = {gamma1})")]
    Gamma2 { gamma1: f64, gamma2: f64 },
    #[error("v_F > 0 violated (v_F = {0})")]
    FermiVelocity(f64),
    #[error("ã > 0 violated (ã = {0})")]
    Cutoff(f64),
    #[error("L/ã must be an odd integer >= 1 (got {0})")]
    SystemSize(usize),
    #[error("β > 0 violated (β = {0})")]
    Beta(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub v_f: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub a_tilde: f64,
    pub l_over_a: usize,
    pub beta: Beta,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            v_f: 1.0,
            gamma1: 0.0,
            gamma2: 0.0,
            a_tilde: 1.0,
            l_over_a: 11,
            beta: Beta::Infinite,
        }
    }
}

/// Checks only the coupling constraints.
pub fn validate_couplings(gamma1: f64, gamma2: f64) -> Result<(), ParamViolation> {
    if !(gamma1.abs() < 1.0) {
        return Err(ParamViolation::Gamma1(gamma1));
    }
    if !(gamma2.abs() < (1.0 + gamma1).abs()) {
        return Err(ParamViolation::Gamma2 { gamma1, gamma2 });
    }
    Ok(())
}

pub fn validate_params(p: &ModelParams) -> Result<(), ParamViolation> {
    validate_couplings(p.gamma1, p.gamma2)?;
    if !(p.v_f > 0.0 && p.v_f.is_finite()) {
        return Err(ParamViolation::FermiVelocity(p.v_f));
    }
    if !(p.a_tilde > 0.0 && p.a_tilde.is_finite()) {
        return Err(ParamViolation::Cutoff(p.a_tilde));
    }
    if p.l_over_a % 2 == 0 {
        return Err(ParamViolation::SystemSize(p.l_over_a));
    }
    if let Beta::Finite(b) = p.beta {
        if !(b > 0.0) {
            return Err(ParamViolation::Beta(b));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    pub a: f64,
    pub v_tilde: f64,
    pub b_exp: f64,
    pub k_exp: f64,
}

pub fn a_const(gamma1: f64, gamma2: f64) -> f64 {
    let q = gamma2 / (1.0 + gamma1);
    1.0 - q * q
}

pub fn b_exp(gamma1: f64) -> f64 {
    ((1.0 - gamma1) / (1.0 + gamma1)).sqrt()
}

/// Luttinger exponent; reduces to `(B + 1/B)/2` at γ2 = 0.
pub fn k_exp(gamma1: f64, gamma2: f64) -> f64 {
    let b = b_exp(gamma1);
    let sa = a_const(gamma1, gamma2).sqrt();
    0.5 * (sa / b + b / sa)
}

pub fn derived(gamma1: f64, gamma2: f64, v_f: f64) -> DerivedConstants {
    DerivedConstants {
        a: a_const(gamma1, gamma2),
        v_tilde: v_f * (1.0 - gamma1 * gamma1).sqrt(),
        b_exp: b_exp(gamma1),
        k_exp: k_exp(gamma1, gamma2),
    }
}

impl ModelParams {
    pub fn new(gamma1: f64, gamma2: f64) -> Self {
        ModelParams {
            gamma1,
            gamma2,
            ..Default::default()
        }
    }

    pub fn with_size(mut self, a_tilde: f64, l_over_a: usize) -> Self {
        self.a_tilde = a_tilde;
        self.l_over_a = l_over_a;
        self
    }

    pub fn with_beta(mut self, beta: Beta) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_vf(mut self, v_f: f64) -> Self {
        self.v_f = v_f;
        self
    }

    pub fn validate(&self) -> Result<(), ParamViolation> {
        validate_params(self)
    }

    /// System length `L = l·ã`.
    pub fn length(&self) -> f64 {
        self.l_over_a as f64 * self.a_tilde
    }

    pub fn derived(&self) -> DerivedConstants {
        derived(self.gamma1, self.gamma2, self.v_f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_examples() {
        assert!(ModelParams::new(0.5, 0.5).with_size(1.0, 11).validate().is_ok());
        assert_eq!(
            ModelParams::new(1.0, 0.0).validate(),
            Err(ParamViolation::Gamma1(1.0))
        );
        let e = ModelParams::new(-0.5, 0.6).validate().unwrap_err();
        assert!(matches!(e, ParamViolation::Gamma2 { .. }));
        assert!(e.to_string().contains("|γ2|<|1+γ1|"));
        assert!(ModelParams::new(0.0, 0.0).with_size(1.0, 10).validate().is_err());
        assert!(ModelParams::new(0.0, 0.0)
            .with_beta(Beta::Finite(0.0))
            .validate()
            .is_err());
    }

    #[test]
    fn constants() {
        let k = k_exp(0.5, 0.0);
        assert!((k - 1.1547005383792515).abs() < 1e-12);
        let k2 = k_exp(0.5, 0.5);
        let b = 1.0 / 3f64.sqrt();
        let sa = (8.0f64 / 9.0).sqrt();
        assert!((k2 - 0.5 * (sa / b + b / sa)).abs() < 1e-14);
        assert!((k2 - 1.12268).abs() < 1e-5);
        assert_eq!(a_const(0.3, 0.0), 1.0);
        assert_eq!(k_exp(0.0, 0.0), 1.0);
    }

    #[test]
    fn beta_parsing_and_weights() {
        assert_eq!("inf".parse::<Beta>().unwrap(), Beta::Infinite);
        assert_eq!("2.5".parse::<Beta>().unwrap(), Beta::Finite(2.5));
        assert!("x".parse::<Beta>().is_err());
        assert_eq!(Beta::Infinite.bose(1.0), 0.0);
        assert_eq!(Beta::Infinite.bose_plus_one(1.0), 1.0);
        let b = Beta::Finite(2.0);
        assert!((b.bose_plus_one(0.3) - b.bose(0.3) - 1.0).abs() < 1e-14);
    }
}
