use std::f64::consts::PI;

use mattis::bogoliubov::{diagonalize, mattis_block, QuadraticForm};
use mattis::correlators::{fermion_npoint, klein_vev, ln_g, CorrelatorQuery, Insertion, KleinLabel, SumMode};
use mattis::ed::{check_boson_ccr, check_density_commutator, LowSector, TruncatedChiralSpace};
use mattis::model::{ground_state_energy, omega_pair, u_matrix, v_coeff};
use mattis::qft::{c_constant_with, CScheme};
use mattis::special::{exp_integral_e1, sigma, EULER_GAMMA};
use mattis::thermo::{boson_free_energy, theta_sum, ThetaMode, ThetaSumSpec};
use mattis::verify::{klein_operator_oracle, klein_pairing_oracle};
use mattis::{Beta, FlavorIndex, ModelParams, Momentum2, Sign};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;

fn couplings() -> impl Strategy<Value = (f64, f64)> {
    (-0.95f64..0.95, -0.97f64..0.97).prop_map(|(g1, f)| (g1, f * (1.0 + g1)))
}

fn sign() -> impl Strategy<Value = Sign> {
    prop_oneof![Just(Sign::Plus), Just(Sign::Minus)]
}

fn inside_cutoff() -> impl Strategy<Value = Momentum2> {
    (0.01f64..3.1, 0.01f64..3.1, sign(), sign())
        .prop_map(|(a, b, s1, s2)| Momentum2::new(s1.f() * a, s2.f() * b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn dispersion_sum_and_product((g1, g2) in couplings(), p in inside_cutoff()) {
        let params = ModelParams::new(g1, g2);
        let dc = params.derived();
        let [wp, wm] = omega_pair(&p, &params);
        let v2 = dc.v_tilde * dc.v_tilde;
        let sum = v2 * p.norm2();
        let prod = v2 * dc.a.sqrt() * (p.p_plus * p.p_minus).abs();
        prop_assert!(((wp * wp + wm * wm) - sum).abs() <= 1e-12 * sum);
        prop_assert!((wp * wm - prod).abs() <= 1e-12 * prod);
    }

    #[test]
    fn dispersion_angular_symmetry((g1, g2) in couplings(), mag in 0.1f64..3.0, theta in 0.01f64..1.5) {
        let params = ModelParams::new(g1, g2).with_size(1e-3, 11);
        let base = omega_pair(&Momentum2::polar(mag, theta), &params);
        for t in [theta + PI / 2.0, -theta, PI - theta] {
            let w = omega_pair(&Momentum2::polar(mag, t), &params);
            for s in 0..2 {
                prop_assert!((w[s] - base[s]).abs() <= 1e-12 * mag, "{t}: {w:?} vs {base:?}");
            }
        }
    }

    #[test]
    fn lower_branch_vanishes_linearly((g1, g2) in couplings(), mag in 0.1f64..3.0, theta in 1e-5f64..1e-3) {
        prop_assume!(g2.abs() > 1e-3);
        let params = ModelParams::new(g1, g2);
        let dc = params.derived();
        let w = omega_pair(&Momentum2::polar(mag, theta), &params)[1] / (params.v_f * mag);
        let slope = dc.v_tilde * dc.a.sqrt() / params.v_f;
        // the cubic correction carries a 1/A factor
        prop_assert!((w - slope * theta).abs() <= 10.0 * theta.powi(3) / dc.a, "{w} vs {}", slope * theta);
    }

    #[test]
    fn u_is_orthogonal((g1, g2) in couplings(), p in inside_cutoff()) {
        let u = u_matrix(&p, &ModelParams::new(g1, g2));
        for i in 0..2 {
            for j in 0..2 {
                let dot: f64 = (0..2).map(|k| u[k][i] * u[k][j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((dot - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn free_v_coeff_norm(p in inside_cutoff(), r in sign(), s in sign()) {
        // at zero coupling only the s' = s column survives, with |v|² = (|p_s| + r p_s)²/(8π|p_s|)
        let params = ModelParams::new(0.0, 0.0);
        let ps = p.comp(s);
        let v = v_coeff(s, r, s, &p, &params).unwrap();
        let want = (ps.abs() + r.f() * ps).powi(2) / (8.0 * PI * ps.abs());
        prop_assert!((v.norm_sqr() - want).abs() < 1e-13 * (1.0 + want));
        prop_assert_eq!(v_coeff(s.flip(), r, s, &p, &params).unwrap().norm(), 0.0);
    }

    #[test]
    fn ground_energy_monotone_in_gamma1(a in 0.0f64..0.9, b in 0.0f64..0.9, l in 1usize..8) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let e = |g: f64| ground_state_energy(&ModelParams::new(g, 0.0).with_size(1.0, 2 * l + 1));
        prop_assert!(e(hi) <= e(lo) + 1e-12);
        prop_assert!(e(-hi) <= e(-lo) + 1e-12);
    }

    #[test]
    fn numeric_bogoliubov_matches_closed_form((g1, g2) in couplings(), p in inside_cutoff(), vf in 0.3f64..3.0) {
        let params = ModelParams::new(g1, g2).with_vf(vf);
        let blk = mattis_block(&p, &params).unwrap();
        let d = diagonalize(&blk.form, &blk.lambda0).unwrap();
        let w = omega_pair(&p, &params);
        let u = u_matrix(&p, &params);
        let scale = vf * p.norm2().sqrt();
        for j in 0..2 {
            prop_assert!((d.lambda[j] - w[j]).abs() <= 1e-10 * scale);
            let dot: f64 = (0..2).map(|i| d.u[(i, j)] * u[i][j]).sum();
            let sg = dot.signum();
            for i in 0..2 {
                prop_assert!((sg * d.u[(i, j)] - u[i][j]).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn axis_ground_shift((g1, g2) in couplings(), mag in 0.05f64..3.0, s in sign(), vf in 0.3f64..3.0) {
        let params = ModelParams::new(g1, g2).with_vf(vf);
        let p = if s == Sign::Plus { Momentum2::new(mag, 0.0) } else { Momentum2::new(0.0, mag) };
        let blk = mattis_block(&p, &params).unwrap();
        let d = diagonalize(&blk.form, &blk.lambda0).unwrap();
        let want = -vf * g2 * g2 / (1.0 + g1);
        prop_assert!((d.ground_shift - want).abs() <= 1e-12 * (1.0 + want.abs()));
    }

    #[test]
    fn diagonalize_relabeling(a in 0.2f64..3.0, b in 0.2f64..3.0, cf in -0.9f64..0.9, k1 in -1.0f64..1.0, k2 in -1.0f64..1.0) {
        let c = cf * a.min(b);
        let am = DMatrix::from_row_slice(2, 2, &[a, 0.0, 0.0, b]);
        let bm = DMatrix::from_row_slice(2, 2, &[b, c, c, a]);
        let q1 = QuadraticForm::new(am.clone(), bm.clone(), DVector::from_vec(vec![k1, k2])).unwrap();
        let swap = |m: &DMatrix<f64>| DMatrix::from_fn(2, 2, |i, j| m[(1 - i, 1 - j)]);
        let q2 = QuadraticForm::new(swap(&am), swap(&bm), DVector::from_vec(vec![k2, k1])).unwrap();
        let d1 = diagonalize(&q1, &[1.0, 1.0]).unwrap();
        let d2 = diagonalize(&q2, &[1.0, 1.0]).unwrap();
        let (mut l1, mut l2) = (d1.lambda.clone(), d2.lambda.clone());
        l1.sort_by(f64::total_cmp);
        l2.sort_by(f64::total_cmp);
        for i in 0..2 {
            prop_assert!((l1[i] - l2[i]).abs() < 1e-12 * (1.0 + l1[i]));
        }
        prop_assert!((d1.ground_shift - d2.ground_shift).abs() < 1e-12 * (1.0 + d1.ground_shift.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn theta_ratio_within_bound(d in 0.25f64..1.5, e in 0.25f64..1.5, off in -0.2f64..0.2) {
        let h = DMatrix::from_row_slice(2, 2, &[d, off * d.min(e), off * d.min(e), e]);
        let spec = ThetaSumSpec::new(h, DVector::zeros(2)).unwrap();
        let r = theta_sum(&spec, ThetaMode::Exact).unwrap();
        if let Some(bound) = r.bound {
            prop_assert!(spec.lambda > 2.0 / (PI * PI));
            prop_assert!(r.ln_z - r.ln_j >= -1e-12);
            prop_assert!(r.ratio() <= 1.0 + bound + 1e-12);
        }
    }

    #[test]
    fn boson_free_energy_sign_and_growth((g1, g2) in couplings(), beta in 0.2f64..5.0, l in 1usize..4) {
        let p = |b: f64| ModelParams::new(g1, g2).with_size(1.0, 2 * l + 1).with_beta(Beta::Finite(b));
        let lo = boson_free_energy(&p(beta)).unwrap();
        let hi = boson_free_energy(&p(1.5 * beta)).unwrap();
        prop_assert!(lo < 0.0 && hi < 0.0);
        prop_assert!(hi >= lo);
    }

    #[test]
    fn klein_matches_oracles(codes in proptest::collection::vec((0usize..2, 0usize..2, 0usize..2, 0i64..3), 0..=8)) {
        let pick = |b: usize| if b == 0 { Sign::Plus } else { Sign::Minus };
        let seq: Vec<KleinLabel> = codes.iter().map(|&(q, r, s, x)| KleinLabel::new(pick(q), pick(r), pick(s), x)).collect();
        let got = klein_vev(&seq) as i64;
        prop_assert_eq!(got, klein_operator_oracle(&seq));
        let mut count = std::collections::HashMap::new();
        for k in &seq {
            *count.entry((k.r, k.s, k.x)).or_insert(0) += 1;
        }
        if count.values().all(|&c| c <= 2) {
            prop_assert_eq!(got, klein_pairing_oracle(&seq));
        }
    }

    #[test]
    fn two_point_is_flavor_and_chain_local(r1 in sign(), s1 in sign(), r2 in sign(), s2 in sign(), xi in 0i64..3, dy in 0i64..3) {
        let x = xi as f64;
        let params = ModelParams::new(0.3, 0.2).with_size(1.0, 7);
        let t = Complex64::new(0.0, 0.0);
        let q = CorrelatorQuery {
            insertions: vec![
                Insertion::new(Sign::Plus, r1, s1, [x, 0.0], t),
                Insertion::new(Sign::Minus, r2, s2, [0.0, dy as f64], t),
            ],
            epsilon: 0.1,
            mode: SumMode::FiniteL,
        };
        // the chain label is x_{-s}; with s = + it is the second coordinate
        let same_chain = if s1 == Sign::Plus { dy == 0 } else { x == 0.0 };
        let v = fermion_npoint(&q, &params).unwrap();
        if (r1, s1) != (r2, s2) || !same_chain {
            prop_assert_eq!(v, Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn ln_g_origin_is_real_positive((g1, g2) in couplings(), r in sign(), s in sign(), eps in 0.05f64..0.5) {
        let params = ModelParams::new(g1, g2).with_size(1.0, 9);
        let f = FlavorIndex::new(r, s);
        let v = ln_g(&params, f, f, [0.0, 0.0], Complex64::new(0.0, 0.0), eps, SumMode::FiniteL).unwrap();
        prop_assert!(v.re > 0.0);
        prop_assert!(v.im.abs() < 1e-12 * v.re);
    }

    #[test]
    fn c_constant_schemes_agree((g1, g2) in couplings()) {
        let a = c_constant_with(g1, g2, CScheme::GaussKronrod, 1e-10).unwrap().value;
        let b = c_constant_with(g1, g2, CScheme::TanhSinh, 1e-10).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-8, "{a} vs {b}");
    }

    #[test]
    fn ed_identities_on_low_sector(modes in prop_oneof![Just(12usize), Just(14), Just(16)], r in sign(), n in -3i64..=3, m in -3i64..=3) {
        let space = TruncatedChiralSpace::new(r, modes, 2.0 * PI).unwrap();
        let e_low = (space.k_cut() / 3.0).floor();
        let low = LowSector::new(&space, e_low).unwrap();
        let (p, q) = (n as f64, m as f64);
        let half = 0.5 * space.k_cut();
        prop_assume!(p.abs() <= half && q.abs() <= half && (p + q).abs() <= half);
        prop_assume!(p.abs() + q.abs() <= space.k_cut() - e_low);
        prop_assert!(check_density_commutator(&space, &low, p, q).unwrap() <= 1e-12);
        if r.f() * p > 0.0 && r.f() * q > 0.0 {
            prop_assert!(check_boson_ccr(&space, &low, p, q).unwrap() <= 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn sigma_inverts_exp_e1(mag in 1e-6f64..12.0, arg in -3.1f64..3.1) {
        let z = Complex64::from_polar(mag, arg);
        let e1 = exp_integral_e1(z).unwrap();
        // σ under- or overflows beyond this
        prop_assume!(e1.re.abs() < 700.0);
        let s = sigma(z).unwrap().value;
        prop_assert!((s * e1.exp() - 1.0).norm() <= 1e-12);
    }

    #[test]
    fn sigma_small_argument(mag in 1e-10f64..0.01, arg in -3.1f64..3.1) {
        let z = Complex64::from_polar(mag, arg);
        let dev = (sigma(z).unwrap().value / (EULER_GAMMA.exp() * z) - 1.0).norm();
        prop_assert!(dev <= 2.0 * mag);
    }

    #[test]
    fn sigma_large_argument(mag in 20.0f64..300.0, arg in -PI / 2.0..=PI / 2.0) {
        let z = Complex64::from_polar(mag, arg);
        let w = -exp_integral_e1(z).unwrap();
        let half = (0.5 * w.im).sin();
        let sigma_m1 = Complex64::new(w.re.exp_m1() * w.im.cos() - 2.0 * half * half, w.re.exp() * w.im.sin());
        let dev = (sigma_m1 + (-z).exp() / z).norm();
        prop_assert!(dev <= 4.0 * (-z).exp().norm() / (mag * mag));
    }
}
