//! Closed-form boson dispersion, Bogoliubov rotation and coefficients.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{chi_f, window, Momentum2};
use crate::params::{ModelParams, Sign};

/// Pieces shared by ω and U in the coupled region.
struct Mixing {
    q2: f64,
    root: f64,
    d: f64,
    cross: f64,
}

fn mixing(p: &Momentum2, a: f64) -> Mixing {
    let (pp, pm) = (p.p_plus, p.p_minus);
    let q2 = pp * pp + pm * pm;
    let prod = 2.0 * pp * pm;
    let disc = q2 * q2 - a * prod * prod;
    // non-negative analytically since A <= 1; clamp roundoff undershoot
    let root = if disc > 0.0 { disc.sqrt() } else { 0.0 };
    Mixing {
        q2,
        root,
        d: pp * pp - pm * pm,
        cross: prod * prod * (1.0 - a),
    }
}

fn coupled(p: &Momentum2, params: &ModelParams) -> bool {
    params.gamma2 * chi_f(p, params) * p.p_plus * p.p_minus != 0.0
}

/// Both branches `[ω_+, ω_-]`.
pub fn omega_pair(p: &Momentum2, params: &ModelParams) -> [f64; 2] {
    if coupled(p, params) {
        let dc = params.derived();
        let m = mixing(p, dc.a);
        let prod = 2.0 * p.p_plus * p.p_minus;
        let plus = dc.v_tilde * (0.5 * (m.q2 + m.root)).sqrt();
        // ω_-² = ṽ² A (2p₊p₋)² / (2(|p|² + root)) avoids cancellation
        let minus = dc.v_tilde * dc.a.sqrt() * prod.abs() / (2.0 * (m.q2 + m.root)).sqrt();
        [plus, minus]
    } else {
        let c = params.v_f * (1.0 - params.gamma1 * params.gamma1 * chi_f(p, params)).sqrt();
        [c * p.p_plus.abs(), c * p.p_minus.abs()]
    }
}

pub fn omega(s: Sign, p: &Momentum2, params: &ModelParams) -> f64 {
    omega_pair(p, params)[s.idx()]
}

/// Effective dispersion `ṽ_F √A |p_s|`.
pub fn omega_tilde(s: Sign, p: &Momentum2, params: &ModelParams) -> f64 {
    let dc = params.derived();
    dc.v_tilde * dc.a.sqrt() * p.comp(s).abs()
}

/// Orthogonal matrix `U[s][s']`; column `s'` belongs to branch `ω_{s'}`.
pub fn u_matrix(p: &Momentum2, params: &ModelParams) -> [[f64; 2]; 2] {
    if !coupled(p, params) {
        return [[1.0, 0.0], [0.0, 1.0]];
    }
    let m = mixing(p, params.derived().a);
    let (hp, hm) = if m.root == 0.0 {
        (0.5, 0.5)
    } else if m.d >= 0.0 {
        (
            0.5 * (1.0 + m.d / m.root),
            0.5 * m.cross / (m.root * (m.root + m.d)),
        )
    } else {
        (
            0.5 * m.cross / (m.root * (m.root - m.d)),
            0.5 * (1.0 - m.d / m.root),
        )
    };
    let sigma = (params.gamma2 * p.p_plus * p.p_minus).signum();
    let n = hp.sqrt().hypot(hm.sqrt());
    let (a, b) = (hp.sqrt() / n, hm.sqrt() / n);
    [[a, -sigma * b], [sigma * b, a]]
}

/// Coefficient `v^{s'}_{r,s}(p)` relating densities to bosons.
pub fn v_coeff(s_prime: Sign, r: Sign, s: Sign, p: &Momentum2, params: &ModelParams) -> Result<Complex64> {
    let ps = p.comp(s);
    if ps == 0.0 {
        return Err(Error::input("v_coeff needs p_s != 0"));
    }
    Ok(v_coeff_unchecked(s_prime, r, s, p, params))
}

pub(crate) fn v_coeff_unchecked(s_prime: Sign, r: Sign, s: Sign, p: &Momentum2, params: &ModelParams) -> Complex64 {
    let u = u_matrix(p, params)[s.idx()][s_prime.idx()];
    if u == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let w = omega(s_prime, p, params);
    let c = params.v_f * (1.0 - params.gamma1 * chi_f(p, params));
    let val = (1.0 / (8.0 * PI)).sqrt() * u * (p.comp(s) * (c / w).sqrt() + r.f() * (w / c).sqrt());
    Complex64::new(0.0, val)
}

/// Ground state energy; only momenta inside the cutoff window contribute.
pub fn ground_state_energy(params: &ModelParams) -> f64 {
    let len = params.length();
    let l = params.l_over_a;
    let mut total = 0.0;
    for s in Sign::BOTH {
        for a in window(l) {
            for b in window(l) {
                let p = Momentum2::boson(a, b, len);
                if p.comp(s) == 0.0 {
                    continue;
                }
                total += omega(s, &p, params) - params.v_f * p.comp(s).abs();
            }
        }
    }
    0.5 * total
}

/// Angular factor `g_±(θ)` with `ω_± = ṽ_F |p| g_±(θ)` inside the window.
pub fn g_angular(s: Sign, theta: f64, a: f64) -> f64 {
    let s2 = (2.0 * theta).sin();
    let root = (1.0 - a * s2 * s2).max(0.0).sqrt();
    match s {
        Sign::Plus => (0.5 * (1.0 + root)).sqrt(),
        // ½(1 - root) = ½ A sin²2θ / (1 + root)
        Sign::Minus => (0.5 * a * s2 * s2 / (1.0 + root)).sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    fn big(g1: f64, g2: f64) -> ModelParams {
        ModelParams::new(g1, g2).with_size(1.0, 11)
    }

    #[test]
    fn omega_free_and_axis() {
        let p = big(0.0, 0.0);
        let q = Momentum2::new(0.7, -1.3);
        assert_eq!(omega(Sign::Plus, &q, &p), 0.7);
        assert_eq!(omega(Sign::Minus, &q, &p), 1.3);
        let p = big(0.9, 0.0);
        let w = omega(Sign::Plus, &q, &p);
        assert!(close(w, (1.0f64 - 0.81).sqrt() * 0.7, 1e-15));
    }

    #[test]
    fn omega_example_point() {
        let p = big(0.5, 0.5);
        let q = Momentum2::new(1.0, 1.0);
        let [wp, wm] = omega_pair(&q, &p);
        assert!(close(wp, 1.0, 1e-14));
        assert!(close(wm, 0.5f64.sqrt(), 1e-14));
    }

    #[test]
    fn omega_tilde_example() {
        let p = big(0.5, 0.5);
        let q = Momentum2::new(2.0, 0.3);
        let want = 0.75f64.sqrt() * (8.0f64 / 9.0).sqrt() * 2.0;
        assert!(close(omega_tilde(Sign::Plus, &q, &p), want, 1e-15));
        assert!((want - 1.63299).abs() < 1e-5);
        assert_eq!(omega_tilde(Sign::Minus, &Momentum2::new(2.0, 0.0), &p), 0.0);
    }

    #[test]
    fn u_examples() {
        let p = big(0.5, 0.5);
        assert_eq!(u_matrix(&Momentum2::new(1.0, 0.0), &p), [[1.0, 0.0], [0.0, 1.0]]);
        let u = u_matrix(&Momentum2::new(0.8, 0.8), &p);
        assert!(close(u[0][0], 0.5f64.sqrt(), 1e-15));
        assert!(close(u[1][1], 0.5f64.sqrt(), 1e-15));
        for q in [(0.3, -2.0), (1.5, 0.2), (-0.4, -0.9)] {
            let u = u_matrix(&Momentum2::new(q.0, q.1), &p);
            for i in 0..2 {
                for j in 0..2 {
                    let d: f64 = (0..2).map(|k| u[i][k] * u[j][k]).sum();
                    assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn v_free_values() {
        let p = big(0.0, 0.0);
        for &ps in &[0.6, -1.1] {
            let q = Momentum2::new(ps, 0.4);
            for r in Sign::BOTH {
                let v = v_coeff(Sign::Plus, r, Sign::Plus, &q, &p).unwrap();
                let sg = if ps > 0.0 { 1.0 } else { -1.0 };
                let want = ps.abs() * (1.0 + r.f() * sg).powi(2) / (8.0 * PI);
                assert!(close(v.norm_sqr(), want, 1e-14));
                let off = v_coeff(Sign::Minus, r, Sign::Plus, &q, &p).unwrap();
                assert_eq!(off.norm_sqr(), 0.0);
            }
        }
        assert!(v_coeff(Sign::Plus, Sign::Plus, Sign::Plus, &Momentum2::new(0.0, 1.0), &p).is_err());
    }

    #[test]
    fn v_outside_cutoff_is_free() {
        let p = big(0.6, -0.4);
        let q = Momentum2::new(5.0, 0.3);
        for r in Sign::BOTH {
            let v = v_coeff(Sign::Plus, r, Sign::Plus, &q, &p).unwrap();
            let want = 5.0 * (1.0 + r.f()).powi(2) / (8.0 * PI);
            assert!(close(v.norm_sqr(), want, 1e-14));
        }
    }

    #[test]
    fn ground_energy_small_grid() {
        assert_eq!(ground_state_energy(&ModelParams::new(0.0, 0.0).with_size(1.0, 3)), 0.0);
        let p = ModelParams::new(0.5, 0.0).with_size(1.0, 3);
        // brute force over the 3x3 grid
        let mut want = 0.0;
        for s in 0..2 {
            for a in -1i64..=1 {
                for b in -1i64..=1 {
                    let ps = if s == 0 { a } else { b } as f64 * 2.0 * PI / 3.0;
                    if ps != 0.0 {
                        want += 0.5 * (0.75f64.sqrt() - 1.0) * ps.abs();
                    }
                }
            }
        }
        assert!(close(ground_state_energy(&p), want, 1e-14));
    }

    #[test]
    fn g_identities() {
        assert_eq!(g_angular(Sign::Plus, 0.0, 0.7), 1.0);
        assert_eq!(g_angular(Sign::Minus, 0.0, 0.7), 0.0);
        assert!(close(g_angular(Sign::Plus, PI / 4.0, 1.0), 0.5f64.sqrt(), 1e-15));
        assert!(close(g_angular(Sign::Minus, PI / 4.0, 1.0), 0.5f64.sqrt(), 1e-15));
        for i in 0..50 {
            let th = i as f64 * 0.031;
            for a in [0.1, 0.5, 1.0] {
                let gp = g_angular(Sign::Plus, th, a);
                let gm = g_angular(Sign::Minus, th, a);
                assert!((gp * gp + gm * gm - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn polar_form_matches() {
        let p = big(0.4, 0.3);
        let dc = p.derived();
        for i in 1..20 {
            let th = i as f64 * 0.077;
            let q = Momentum2::polar(0.9, th);
            for s in Sign::BOTH {
                let want = dc.v_tilde * 0.9 * g_angular(s, th, dc.a);
                assert!(close(omega(s, &q, &p), want, 1e-13));
            }
        }
    }
}
