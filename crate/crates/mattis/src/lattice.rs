//! Momentum and position lattices.
//!
//! Lattice momenta are stored through "doubled" integer indices `m` with
//! `p = π m / L`: boson momenta have even `m`, fermion momenta odd `m`.
//! The cutoff window `-π/ã <= p < π/ã` then reads `-l <= m < l` and every
//! membership test is exact.

use std::f64::consts::PI;

use crate::params::{ModelParams, Sign};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Momentum2 {
    pub p_plus: f64,
    pub p_minus: f64,
    /// Doubled indices `(m_+, m_-)` when the point lies on a lattice.
    pub twice: Option<[i64; 2]>,
}

impl Momentum2 {
    pub fn new(p_plus: f64, p_minus: f64) -> Self {
        Momentum2 {
            p_plus,
            p_minus,
            twice: None,
        }
    }

    /// Point with doubled indices `(m_+, m_-)` on a system of length `length`.
    pub fn from_twice(m_plus: i64, m_minus: i64, length: f64) -> Self {
        let c = PI / length;
        Momentum2 {
            p_plus: c * m_plus as f64,
            p_minus: c * m_minus as f64,
            twice: Some([m_plus, m_minus]),
        }
    }

    /// Boson lattice point `p = (2π/L)(n_+, n_-)`.
    pub fn boson(n_plus: i64, n_minus: i64, length: f64) -> Self {
        Self::from_twice(2 * n_plus, 2 * n_minus, length)
    }

    /// Fermion lattice point `k = (2π/L)(j_+ + 1/2, j_- + 1/2)`.
    pub fn fermion(j_plus: i64, j_minus: i64, length: f64) -> Self {
        Self::from_twice(2 * j_plus + 1, 2 * j_minus + 1, length)
    }

    pub fn comp(&self, s: Sign) -> f64 {
        match s {
            Sign::Plus => self.p_plus,
            Sign::Minus => self.p_minus,
        }
    }

    pub fn twice_comp(&self, s: Sign) -> Option<i64> {
        self.twice.map(|t| t[s.idx()])
    }

    pub fn norm2(&self) -> f64 {
        self.p_plus * self.p_plus + self.p_minus * self.p_minus
    }

    pub fn neg(&self) -> Self {
        Momentum2 {
            p_plus: -self.p_plus,
            p_minus: -self.p_minus,
            twice: self.twice.map(|[a, b]| [-a, -b]),
        }
    }

    /// Polar form `p = |p|(cos θ, sin θ)` in the `(e_+, e_-)` basis.
    pub fn polar(mag: f64, theta: f64) -> Self {
        Momentum2::new(mag * theta.cos(), mag * theta.sin())
    }
}

fn in_window(m: i64, l: usize) -> bool {
    let l = l as i64;
    -l <= m && m < l
}

/// Real-valued cutoff test `-π/ã <= p < π/ã`.
pub fn in_cutoff(p: f64, a_tilde: f64) -> bool {
    let c = PI / a_tilde;
    -c <= p && p < c
}

/// Cutoff function χ(p).
pub fn chi(p: &Momentum2, params: &ModelParams) -> u8 {
    let inside = match p.twice {
        Some([a, b]) => in_window(a, params.l_over_a) && in_window(b, params.l_over_a),
        None => in_cutoff(p.p_plus, params.a_tilde) && in_cutoff(p.p_minus, params.a_tilde),
    };
    inside as u8
}

/// χ as a real number.
pub fn chi_f(p: &Momentum2, params: &ModelParams) -> f64 {
    chi(p, params) as f64
}

/// Fermion momenta Λ*_s: half-odd multiples of 2π/L, `k_{-s}` inside the window.
pub fn in_fermion_set(s: Sign, p: &Momentum2, l: usize) -> bool {
    match p.twice {
        Some(t) => {
            t[0].rem_euclid(2) == 1 && t[1].rem_euclid(2) == 1 && in_window(t[(-s).idx()], l)
        }
        None => false,
    }
}

/// Boson momenta Λ̃*_s.
pub fn in_boson_set(s: Sign, p: &Momentum2, l: usize) -> bool {
    match p.twice {
        Some(t) => t[0] % 2 == 0 && t[1] % 2 == 0 && in_window(t[(-s).idx()], l),
        None => false,
    }
}

/// Boson momenta with `p_s != 0`, Λ̂*_s.
pub fn in_boson_hat_set(s: Sign, p: &Momentum2, l: usize) -> bool {
    in_boson_set(s, p, l) && p.twice.map(|t| t[s.idx()] != 0).unwrap_or(false)
}

/// 1D positions `x = ã n`, `-L/2 <= x < L/2`.
pub fn in_lambda_1d(n: i64, l: usize) -> bool {
    in_window(2 * n, l)
}

/// 1D boson momenta `p = 2πn/L` in the window.
pub fn in_lambda_1d_tilde(n: i64, l: usize) -> bool {
    in_window(2 * n, l)
}

pub fn in_lambda_1d_hat(n: i64, l: usize) -> bool {
    n != 0 && in_lambda_1d_tilde(n, l)
}

/// Integer range of the symmetric window for odd `l`: `n` with `-l <= 2n < l`.
pub fn window(l: usize) -> std::ops::RangeInclusive<i64> {
    let h = (l as i64 - 1) / 2;
    -h..=h
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(l: usize) -> ModelParams {
        ModelParams::new(0.0, 0.0).with_size(1.0, l)
    }

    #[test]
    fn chi_examples() {
        let p = params(11);
        assert_eq!(chi(&Momentum2::new(0.0, 0.0), &p), 1);
        assert_eq!(chi(&Momentum2::new(PI, 0.0), &p), 0);
        assert_eq!(chi(&Momentum2::new(-PI, 0.0), &p), 1);
        // doubled index -l is the left boundary
        assert_eq!(chi(&Momentum2::from_twice(-11, 0, 11.0), &p), 1);
        assert_eq!(chi(&Momentum2::from_twice(11, 0, 11.0), &p), 0);
    }

    #[test]
    fn sets() {
        let l = 5;
        let len = 5.0;
        assert!(in_fermion_set(Sign::Plus, &Momentum2::fermion(7, -3, len), l));
        assert!(!in_fermion_set(Sign::Plus, &Momentum2::fermion(7, 2, len), l));
        assert!(in_boson_set(Sign::Minus, &Momentum2::boson(2, 100, len), l));
        assert!(!in_boson_set(Sign::Minus, &Momentum2::boson(3, 0, len), l));
        assert!(!in_boson_hat_set(Sign::Plus, &Momentum2::boson(0, 1, len), l));
        assert!(in_boson_hat_set(Sign::Minus, &Momentum2::boson(0, 1, len), l));
        assert_eq!(window(5).collect::<Vec<_>>(), vec![-2, -1, 0, 1, 2]);
        for n in -10..=10 {
            assert_eq!(in_lambda_1d(n, l), window(l).contains(&n));
            assert_eq!(in_lambda_1d_hat(n, l), n != 0 && window(l).contains(&n));
        }
    }
}
