//! Acceptance checks with their reference oracles.
//!
//! Each criterion returns a [`CriterionReport`] holding a verdict and one
//! line per measured quantity. The oracles here are written independently of
//! the production code paths they check.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::bogoliubov::{diagonalize, mattis_block};
use crate::correlators::{
    density_two_point, fermion_npoint, klein_vev, CorrelatorQuery, DensityPoint, Insertion, KleinLabel, SumMode,
};
use crate::ed::{check_boson_ccr, check_density_commutator, check_kronig, LowSector, TruncatedChiralSpace};
use crate::error::Result;
use crate::lattice::{chi, Momentum2};
use crate::model::{omega_pair, u_matrix};
use crate::params::{Beta, FlavorIndex, ModelParams, Sign};
use crate::qft::{c_constant, c_constant_with, density2pt_ir_g2zero, fermion2pt_ir_g2zero, CScheme, QftTwoPoint};
use crate::quad::{richardson, richardson_c};
use crate::special::{exp_integral_e1, sigma, E1Method, EULER_GAMMA};
use crate::thermo::{free_energy, free_energy_split, qft_free_energy_density, zero_mode_check, zero_mode_free_energy, ZeroModeMode};

pub const CRITERIA: usize = 11;

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub id: usize,
    pub title: &'static str,
    pub passed: bool,
    pub details: Vec<String>,
}

impl CriterionReport {
    fn new(id: usize, title: &'static str) -> Self {
        CriterionReport {
            id,
            title,
            passed: true,
            details: Vec::new(),
        }
    }

    /// Records one check; the criterion fails if any check fails.
    fn check(&mut self, ok: bool, line: String) {
        self.passed &= ok;
        let tag = if ok { "ok  " } else { "FAIL" };
        self.details.push(format!("{tag} {line}"));
    }

    fn note(&mut self, line: String) {
        self.details.push(format!("note {line}"));
    }

    fn error(id: usize, title: &'static str, e: crate::Error) -> Self {
        CriterionReport {
            id,
            title,
            passed: false,
            details: vec![format!("FAIL error: {e}")],
        }
    }

    pub fn summary_line(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        format!("{verdict} criterion {:>2}: {}", self.id, self.title)
    }

    pub fn render(&self) -> String {
        let mut out = self.summary_line();
        for d in &self.details {
            let _ = write!(out, "\n    {d}");
        }
        out
    }
}

pub fn title(id: usize) -> &'static str {
    match id {
        1 => "closed-form vs numeric Bogoliubov",
        2 => "dispersion identities",
        3 => "QFT free energy",
        4 => "zero-mode theta sum vs Gaussian",
        5 => "bosonization on truncated Fock spaces",
        6 => "Klein factor combinatorics",
        7 => "fermion two-point cross validation",
        8 => "Luttinger exponent",
        9 => "C constant",
        10 => "special functions",
        11 => "density two-point closed form",
        _ => "unknown",
    }
}

/// Runs criterion `id` (1 to 11).
pub fn run_criterion(id: usize) -> CriterionReport {
    let f: fn(&mut CriterionReport) -> Result<()> = match id {
        1 => bogoliubov_closed_form,
        2 => dispersion_identities,
        3 => qft_free_energy,
        4 => zero_mode_sector,
        5 => bosonization,
        6 => klein,
        7 => two_point,
        8 => luttinger_exponent,
        9 => c_const,
        10 => special_functions,
        11 => density_closed_form,
        _ => {
            let mut r = CriterionReport::new(id, "unknown");
            r.check(false, format!("no criterion {id}"));
            return r;
        }
    };
    let mut rep = CriterionReport::new(id, title(id));
    match f(&mut rep) {
        Ok(()) => rep,
        Err(e) => CriterionReport::error(id, title(id), e),
    }
}

pub fn run_all() -> Vec<CriterionReport> {
    (1..=CRITERIA).map(run_criterion).collect()
}

fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        ((a - b) / b).abs()
    }
}

fn rel_c(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

fn bogoliubov_closed_form(rep: &mut CriterionReport) -> Result<()> {
    let mut rng = StdRng::seed_from_u64(0x5eed_0001);
    let (mut worst_w, mut worst_u) = (0.0f64, 0.0f64);
    for _ in 0..500 {
        let g1 = rng.random_range(-0.95..0.95);
        let g2 = rng.random_range(-0.98..0.98) * (1.0 + g1);
        let vf = rng.random_range(0.5..2.0);
        let params = ModelParams::new(g1, g2).with_vf(vf).with_size(1.0, 11);
        let p = loop {
            let p = Momentum2::new(rng.random_range(-0.99 * PI..0.99 * PI), rng.random_range(-0.99 * PI..0.99 * PI));
            if p.p_plus.abs() > 1e-3 && p.p_minus.abs() > 1e-3 {
                break p;
            }
        };
        debug_assert_eq!(chi(&p, &params), 1);
        let blk = mattis_block(&p, &params)?;
        let d = diagonalize(&blk.form, &blk.lambda0)?;
        let w = omega_pair(&p, &params);
        let u = u_matrix(&p, &params);
        let scale = vf * p.norm2().sqrt();
        for j in 0..2 {
            worst_w = worst_w.max((d.lambda[j] - w[j]).abs() / scale);
            let dot: f64 = (0..2).map(|i| d.u[(i, j)] * u[i][j]).sum();
            let sign = if dot < 0.0 { -1.0 } else { 1.0 };
            for i in 0..2 {
                worst_u = worst_u.max((sign * d.u[(i, j)] - u[i][j]).abs());
            }
        }
    }
    rep.check(worst_w <= 1e-10, format!("max |λ - ω|/(v_F|p|) = {worst_w:.3e} (tol 1e-10, 500 samples)"));
    rep.check(worst_u <= 1e-10, format!("max |U_num - U| up to column sign = {worst_u:.3e} (tol 1e-10)"));
    Ok(())
}

fn dispersion_identities(rep: &mut CriterionReport) -> Result<()> {
    let mut worst_sum = 0.0f64;
    let mut worst_prod = 0.0f64;
    for &g1 in &[-0.5, 0.0, 0.5] {
        for &g2 in &[-0.45, 0.2, 0.45] {
            let params = ModelParams::new(g1, g2).with_size(1.0, 11);
            let dc = params.derived();
            for i in 0..10 {
                let mag = 0.05 + 0.3 * i as f64;
                for k in 0..100 {
                    let theta = 2.0 * PI * (k as f64 + 0.37) / 100.0;
                    let p = Momentum2::polar(mag, theta);
                    let [wp, wm] = omega_pair(&p, &params);
                    let v2 = dc.v_tilde * dc.v_tilde;
                    worst_sum = worst_sum.max(rel(wp * wp + wm * wm, v2 * p.norm2()));
                    worst_prod = worst_prod.max(rel(wp * wm, v2 * dc.a.sqrt() * (p.p_plus * p.p_minus).abs()));
                }
            }
        }
    }
    rep.check(worst_sum <= 1e-12, format!("ω₊²+ω₋² vs ṽ²|p|²: max rel {worst_sum:.3e} (tol 1e-12)"));
    rep.check(worst_prod <= 1e-12, format!("ω₊ω₋ vs ṽ²√A|p₊p₋|: max rel {worst_prod:.3e} (tol 1e-12)"));
    Ok(())
}

fn qft_free_energy(rep: &mut CriterionReport) -> Result<()> {
    for &g1 in &[0.0, 0.5] {
        let run = |l: usize| -> Result<(f64, f64)> {
            let p = ModelParams::new(g1, 0.0).with_size(1.0, l).with_beta(Beta::Finite(20.0));
            Ok((free_energy(&p, ZeroModeMode::ClosedForm)?.scaled(&p), qft_free_energy_density(&p)?))
        };
        let (v201, target) = run(201)?;
        let err = rel(v201, target);
        rep.check(
            err <= 1e-4,
            format!("γ1={g1}, βv_F/ã=20, l=201: ã(Ω-E0)/L² = {v201:.10e}, target {target:.10e}, rel {err:.3e} (tol 1e-4)"),
        );
        let v_t = ModelParams::new(g1, 0.0).derived().v_tilde;
        rep.note(format!("finite-ring term (βṽ/L)² at l=201: {:.3e}", (20.0 * v_t / 201.0).powi(2)));
        let (v603, _) = run(603)?;
        let hs = [1.0 / (201.0f64 * 201.0), 1.0 / (603.0f64 * 603.0)];
        let extrap = richardson(&hs, &[v201, v603]);
        rep.note(format!(
            "γ1={g1}: l=603 rel {:.3e}; extrapolated in 1/L² from l=201,603: rel {:.3e}",
            rel(v603, target),
            rel(extrap, target)
        ));
    }
    let mut errs = Vec::new();
    for &a in &[1.0, 0.5, 0.25] {
        let p = ModelParams::new(0.5, 0.5).with_size(a, 11).with_beta(Beta::Finite(1.0));
        let (lo, hi) = free_energy_split(&p)?;
        let err = rel((lo + hi) * a, qft_free_energy_density(&p)?);
        rep.note(format!("split integral γ1=γ2=0.5, β=1, ã={a}: rel error {err:.3e}"));
        errs.push(err);
    }
    let monotone = errs.windows(2).all(|w| w[1] < w[0]);
    rep.check(monotone, "split-integral error decreases monotonically with ã".into());
    rep.check(errs[2] <= 1e-2, format!("split-integral error at ã=1/4: {:.3e} (tol 1e-2)", errs[2]));
    Ok(())
}

fn zero_mode_sector(rep: &mut CriterionReport) -> Result<()> {
    let mut applicable = 0;
    let mut skipped = 0;
    let (mut worst_ratio, mut worst_omega, mut worst_allowed) = (0.0f64, 0.0f64, 0.0f64);
    let mut ok = true;
    for &l in &[3usize, 5, 7] {
        for &beta in &[0.3, 1.0, 3.0, 10.0] {
            let p = ModelParams::new(0.4, -0.3).with_size(1.0, l).with_beta(Beta::Finite(beta));
            let c = zero_mode_check(&p)?;
            let Some(bound) = c.bound.filter(|_| c.lambda > 2.0 / (PI * PI)) else {
                skipped += 1;
                continue;
            };
            applicable += 1;
            let ln_ratio = c.ln_z - c.ln_j;
            let in_band = ln_ratio >= -1e-12 && ln_ratio <= (1.0 + bound).ln() + 1e-12;
            let exact = zero_mode_free_energy(&p, ZeroModeMode::ThetaExact)?;
            let closed = zero_mode_free_energy(&p, ZeroModeMode::ClosedForm)?;
            let allowed = (1.0 + bound).ln() / beta;
            let d_omega = (exact - closed).abs();
            let close = d_omega <= allowed + 1e-12 * closed.abs().max(1.0);
            ok &= in_band && close;
            worst_ratio = worst_ratio.max(ln_ratio.exp() - 1.0);
            if d_omega >= worst_omega {
                (worst_omega, worst_allowed) = (d_omega, allowed);
            }
            if !(in_band && close) {
                rep.check(false, format!("l={l} β={beta}: Z/J-1 = {:.3e}, bound {bound:.3e}, |ΔΩ_Q| = {d_omega:.3e}", ln_ratio.exp() - 1.0));
            }
        }
    }
    rep.check(applicable > 0, format!("{applicable} (l, β) points with λ > 2/π², {skipped} outside the bound's domain"));
    rep.check(ok, format!("max Z/J - 1 = {worst_ratio:.3e}; max |Ω_Q - closed form| = {worst_omega:.3e} (allowed there {worst_allowed:.3e})"));
    Ok(())
}

fn bosonization(rep: &mut CriterionReport) -> Result<()> {
    for &modes in &[12usize, 16, 20] {
        for r in Sign::BOTH {
            let space = TruncatedChiralSpace::new(r, modes, 2.0 * PI)?;
            let k_cut = space.k_cut();
            let e_low = (k_cut / 3.0).floor();
            let low = LowSector::new(&space, e_low)?;
            let reach = k_cut - e_low;
            let nmax = (0.5 * k_cut).floor() as i64;
            let (mut dc, mut ccr) = (0.0f64, 0.0f64);
            let mut pairs = 0;
            for n in -nmax..=nmax {
                for m in -nmax..=nmax {
                    let (p, q) = (n as f64, m as f64);
                    if p.abs() + q.abs() > reach || (p + q).abs() > 0.5 * k_cut {
                        continue;
                    }
                    dc = dc.max(check_density_commutator(&space, &low, p, q)?);
                    if r.f() * p > 0.0 && r.f() * q > 0.0 {
                        ccr = ccr.max(check_boson_ccr(&space, &low, p, q)?);
                    }
                    pairs += 1;
                }
            }
            let kr = check_kronig(&space, &low)?;
            let line = format!(
                "{modes} modes, r={r}, {} sector states, {pairs} momentum pairs: [ĵ,ĵ] {dc:.1e}, Kronig {kr:.1e}, CCR {ccr:.1e}",
                low.states.len()
            );
            rep.check(dc <= 1e-12 && kr <= 1e-12 && ccr <= 1e-12, line);
        }
    }
    Ok(())
}

/// `Σ` over perfect matchings of positions with equal `(r, s, x)` and
/// opposite `q`, weighted by the matching's crossing sign.
pub fn klein_pairing_oracle(seq: &[KleinLabel]) -> i64 {
    fn go(rest: &[KleinLabel]) -> i64 {
        let Some((first, tail)) = rest.split_first() else {
            return 1;
        };
        let mut total = 0;
        for (j, other) in tail.iter().enumerate() {
            if (other.r, other.s, other.x) == (first.r, first.s, first.x) && other.q != first.q {
                let mut remaining = tail.to_vec();
                remaining.remove(j);
                let sign = if j % 2 == 0 { 1 } else { -1 };
                total += sign * go(&remaining);
            }
        }
        total
    }
    if seq.len() % 2 == 1 {
        return 0;
    }
    go(seq)
}

/// The explicit two- and four-factor formulas; `None` for other lengths.
pub fn klein_formula(seq: &[KleinLabel]) -> Option<i64> {
    let d = |a: &KleinLabel, b: &KleinLabel| -> i64 { ((a.r, a.s, a.x) == (b.r, b.s, b.x) && a.q != b.q) as i64 };
    match seq {
        [] => Some(1),
        [_] | [_, _, _] => Some(0),
        [a, b] => Some(d(a, b)),
        [a, b, c, e] => Some(d(a, b) * d(c, e) - d(a, c) * d(b, e) + d(a, e) * d(b, c)),
        _ => None,
    }
}

/// Vacuum expectation computed by acting with explicit operators.
///
/// Distinct labels are numbered; on occupation states `|n_1, …, n_m⟩` the
/// factor of label `j` acts as `R_j^{±1}|n⟩ = (-1)^{n_1+…+n_{j-1}}|n ± e_j⟩`,
/// which realizes anticommutation between different labels.
pub fn klein_operator_oracle(seq: &[KleinLabel]) -> i64 {
    let mut ids: HashMap<(Sign, Sign, i64), usize> = HashMap::new();
    for k in seq {
        let next = ids.len();
        ids.entry((k.r, k.s, k.x)).or_insert(next);
    }
    let mut occ = vec![0i64; ids.len()];
    let mut sign = 1i64;
    for k in seq.iter().rev() {
        let j = ids[&(k.r, k.s, k.x)];
        let below: i64 = occ[..j].iter().sum();
        if below % 2 != 0 {
            sign = -sign;
        }
        occ[j] += (k.r * k.q).i() as i64;
    }
    if occ.iter().all(|&n| n == 0) {
        sign
    } else {
        0
    }
}

fn max_multiplicity(seq: &[KleinLabel]) -> usize {
    let mut count: HashMap<(Sign, Sign, i64), usize> = HashMap::new();
    for k in seq {
        *count.entry((k.r, k.s, k.x)).or_default() += 1;
    }
    count.values().copied().max().unwrap_or(0)
}

fn label_from(code: usize, positions: i64) -> KleinLabel {
    let pick = |b: usize| if b == 0 { Sign::Plus } else { Sign::Minus };
    KleinLabel::new(pick(code & 1), pick((code >> 1) & 1), pick((code >> 2) & 1), (code >> 3) as i64 % positions)
}

fn klein(rep: &mut CriterionReport) -> Result<()> {
    let positions = 2;
    let alphabet = 8 * positions as usize;
    let (mut total, mut mism_formula, mut mism_op) = (0usize, 0usize, 0usize);
    let mut first_mismatch = None;
    for n in 0..=4u32 {
        for mut code in 0..alphabet.pow(n) {
            let seq: Vec<KleinLabel> = (0..n)
                .map(|_| {
                    let c = code % alphabet;
                    code /= alphabet;
                    label_from(c, positions)
                })
                .collect();
            let got = klein_vev(&seq) as i64;
            let want = klein_formula(&seq).expect("N ≤ 4");
            total += 1;
            if got != want {
                mism_formula += 1;
                first_mismatch.get_or_insert_with(|| (seq.clone(), got, want));
            }
            if got != klein_operator_oracle(&seq) {
                mism_op += 1;
            }
        }
    }
    rep.check(
        mism_formula == 0,
        format!("exhaustive N ≤ 4 ({total} sequences) vs two/four-factor formulas: {mism_formula} mismatches"),
    );
    if let Some((seq, got, want)) = first_mismatch {
        let labels: Vec<String> = seq.iter().map(|k| format!("({},{},{},{})", k.q, k.r, k.s, k.x)).collect();
        rep.note(format!("first mismatch {}: klein_vev {got}, formula {want}", labels.join(" ")));
        rep.note("all mismatches repeat one (r,s,x) label four times; the formula then counts two pairings, while the product of a unitary and its inverse is 1".into());
    }
    rep.check(mism_op == 0, format!("exhaustive N ≤ 4 vs explicit operator action: {mism_op} mismatches"));

    let mut rng = StdRng::seed_from_u64(0x5eed_0006);
    let (mut mism_pair, mut mism_pair_simple, mut simple, mut nonzero, mut mism_op) = (0, 0, 0, 0, 0);
    let positions = 3;
    for i in 0..10_000 {
        let n = rng.random_range(0..=8usize);
        let seq: Vec<KleinLabel> = if i % 2 == 0 {
            (0..n).map(|_| label_from(rng.random_range(0..24), positions)).collect()
        } else {
            // neutral sequences: opposite-charge pairs, shuffled
            let mut v = Vec::new();
            for _ in 0..n / 2 {
                let l = label_from(rng.random_range(0..24), positions);
                v.push(l);
                v.push(KleinLabel { q: l.q.flip(), ..l });
            }
            for k in (1..v.len()).rev() {
                v.swap(k, rng.random_range(0..=k));
            }
            v
        };
        let got = klein_vev(&seq) as i64;
        let pairing = klein_pairing_oracle(&seq);
        nonzero += (got != 0) as usize;
        if got != pairing {
            mism_pair += 1;
        }
        if max_multiplicity(&seq) <= 2 {
            simple += 1;
            mism_pair_simple += (got != pairing) as usize;
        }
        mism_op += (got != klein_operator_oracle(&seq)) as usize;
    }
    rep.check(mism_pair == 0, format!("10⁴ random N ≤ 8 sequences ({nonzero} nonzero) vs signed pairing: {mism_pair} mismatches"));
    rep.note(format!("{simple} of them have no (r,s,x) label more than twice: {mism_pair_simple} pairing mismatches there"));
    rep.check(mism_op == 0, format!("10⁴ random sequences vs explicit operator action: {mism_op} mismatches"));
    Ok(())
}

fn two_point_fl(params: &ModelParams, r: Sign, x: f64, eps: f64, mode: SumMode) -> Result<Complex64> {
    let t = Complex64::new(0.0, 0.0);
    let q = CorrelatorQuery {
        insertions: vec![
            Insertion::new(Sign::Plus, r, Sign::Plus, [x, 0.0], t),
            Insertion::new(Sign::Minus, r, Sign::Plus, [0.0, 0.0], t),
        ],
        epsilon: eps,
        mode,
    };
    fermion_npoint(&q, params)
}

fn two_point(rep: &mut CriterionReport) -> Result<()> {
    let eps = 0.01;
    let zero = Complex64::new(0.0, 0.0);
    for r in Sign::BOTH {
        for &x in &[0.5, 1.0, 1.5] {
            let sizes = [51usize, 101, 201];
            let mut vals = Vec::new();
            for &l in &sizes {
                vals.push(two_point_fl(&ModelParams::new(0.5, 0.0).with_size(1.0, l), r, x, eps, SumMode::FiniteL)?);
            }
            let p = ModelParams::new(0.5, 0.0).with_size(1.0, 101);
            let cf = fermion2pt_ir_g2zero(&p, r, x, zero, eps)?.value;
            let hs: Vec<f64> = sizes.iter().map(|&l| 1.0 / l as f64).collect();
            let e101 = rel_c(vals[1], cf);
            let erich = rel_c(richardson_c(&hs, &vals), cf);
            rep.check(
                e101 <= 0.05 && erich < e101,
                format!("γ1=0.5 r={r} x={x}ã: l=101 rel {e101:.3e} (tol 5e-2), Richardson l=51,101,201 rel {erich:.3e}"),
            );
        }
    }
    let (mut worst_ir, mut worst_fl) = (0.0f64, 0.0f64);
    let free = ModelParams::new(0.0, 0.0).with_size(1.0, 21);
    let eps = 0.3;
    let len = free.length();
    for r in Sign::BOTH {
        for &x in &[0.0, 1.0, 2.0, 3.0, 5.0, 8.0] {
            let want = 1.0 / (2.0 * PI * Complex64::new(eps, -r.f() * x));
            worst_ir = worst_ir.max(rel_c(two_point_fl(&free, r, x, eps, SumMode::IrLimit)?, want));
            // direct sum over occupied modes k = 2πn/L, n ≥ 0, damped by e^{-εk}
            let mut sum = Complex64::new(0.0, 0.0);
            for n in 0..20_000 {
                let k = 2.0 * PI * n as f64 / len;
                let term = Complex64::new(-eps * k, r.f() * k * x).exp();
                sum += term;
                if term.norm() < 1e-18 {
                    break;
                }
            }
            let want_fl = sum * (1.0 - (-2.0 * PI * eps / len).exp()) / (2.0 * PI * eps);
            worst_fl = worst_fl.max(rel_c(two_point_fl(&free, r, x, eps, SumMode::FiniteL)?, want_fl));
        }
    }
    rep.check(worst_ir <= 1e-8, format!("γ=0 IR limit vs 1/(2πã(ε - irx)): max rel {worst_ir:.3e} (tol 1e-8)"));
    rep.check(worst_fl <= 1e-8, format!("γ=0 finite L vs direct mode sum: max rel {worst_fl:.3e} (tol 1e-8)"));
    Ok(())
}

fn luttinger_exponent(rep: &mut CriterionReport) -> Result<()> {
    let l0 = 1.0;
    let eps = 1e-6 * l0;
    for &(g1, g2) in &[(0.3, 0.0), (0.5, 0.5), (0.7, -0.3)] {
        let params = ModelParams::new(g1, g2);
        let g = QftTwoPoint::new(&params)?;
        let n = 41;
        let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..n {
            let x = l0 * 10f64.powf(1.0 + 2.0 * i as f64 / (n - 1) as f64);
            let v = g.eval(Sign::Plus, x, Complex64::new(0.0, 0.0), l0, eps)?.value.norm();
            let (lx, ly) = (x.ln(), v.ln());
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
        }
        let nf = n as f64;
        let slope = (nf * sxy - sx * sy) / (nf * sxx - sx * sx);
        let k = params.derived().k_exp;
        let dev = (slope + k).abs();
        rep.check(dev <= 1e-3, format!("(γ1,γ2)=({g1},{g2}): slope {slope:.8}, -K = {:.8}, |Δ| {dev:.2e} (tol 1e-3)", -k));
    }
    Ok(())
}

fn c_const(rep: &mut CriterionReport) -> Result<()> {
    let mut worst = 0.0f64;
    for &g1 in &[-0.9, -0.5, 0.0, 0.5, 0.9] {
        worst = worst.max((c_constant(g1, 0.0, 1e-10)?.value - 1.0).abs());
    }
    rep.check(worst <= 1e-8, format!("max |C(γ1,0) - 1| = {worst:.3e} (tol 1e-8)"));

    let mut worst = 0.0f64;
    let mut count = 0;
    for &g1 in &[-0.8, -0.4, 0.0, 0.4, 0.8] {
        for &frac in &[-0.9, -0.3, 0.5, 0.95] {
            let g2 = frac * (1.0 + g1);
            let a = c_constant_with(g1, g2, CScheme::GaussKronrod, 1e-10)?.value;
            let b = c_constant_with(g1, g2, CScheme::TanhSinh, 1e-10)?.value;
            worst = worst.max((a - b).abs());
            count += 1;
        }
    }
    rep.check(worst <= 1e-8, format!("{count} pairs, Gauss-Kronrod vs tanh-sinh: max |Δ| {worst:.3e} (tol 1e-8)"));

    let h = 0.05;
    let gs: Vec<f64> = (0..=28).map(|i| -0.45 + h * i as f64).collect();
    let mut cs = Vec::new();
    for &g in &gs {
        cs.push(c_constant(g, g, 1e-10)?.value);
    }
    let at_zero = c_constant(0.0, 0.0, 1e-10)?.value;
    rep.check((at_zero - 1.0).abs() <= 1e-12, format!("C(0,0) = {at_zero:.15}"));
    let positive = cs.iter().all(|c| c.is_finite() && *c > 0.0);
    rep.check(positive, "γ1=γ2 sweep over [-0.45, 0.95]: finite and positive".into());
    // smoothness: at fixed centers m, the cubic prediction from m ± h/2, m ± 3h/2
    // must improve like h⁴ when h is halved
    let cc = |x: f64| c_constant(x, x, 1e-10).map(|e| e.value);
    let predict = |m: f64, h: f64| -> Result<f64> {
        let v = [cc(m - 1.5 * h)?, cc(m - 0.5 * h)?, cc(m + 0.5 * h)?, cc(m + 1.5 * h)?];
        Ok((-v[0] + 9.0 * v[1] + 9.0 * v[2] - v[3]) / 16.0)
    };
    let (mut worst_ratio, mut worst_coarse) = (f64::INFINITY, 0.0f64);
    let mut smooth = true;
    for k in 0..=25 {
        let m = -0.375 + h * k as f64;
        let exact = cc(m)?;
        let (ec, ef) = (rel(predict(m, h)?, exact), rel(predict(m, 0.5 * h)?, exact));
        worst_coarse = worst_coarse.max(ec);
        if ef > 1e-8 {
            worst_ratio = worst_ratio.min(ec / ef);
            smooth &= ec >= 8.0 * ef;
        }
    }
    rep.check(
        smooth,
        format!("cubic prediction at 26 centers in [-0.375, 0.875]: max rel {worst_coarse:.3e} at step {h}, min improvement under halving {worst_ratio:.1} (need ≥ 8)"),
    );
    rep.note(format!("C grows without bound toward γ = -1/2: C(-0.49) = {:.4}", cc(-0.49)?));
    let shown: Vec<String> = gs.iter().zip(&cs).step_by(4).map(|(g, c)| format!("C({g:.2})={c:.6}")).collect();
    rep.note(shown.join(" "));
    Ok(())
}

fn special_functions(rep: &mut CriterionReport) -> Result<()> {
    let mut rng = StdRng::seed_from_u64(0x5eed_0010);
    let (mut worst, mut n_series, mut n_cf) = (0.0f64, 0, 0);
    for i in 0..10_000 {
        let z: Complex64 = if i % 2 == 0 {
            Complex64::from_polar(rng.random_range(1e-6f64..4.0), rng.random_range(-3.1..3.1))
        } else if i % 4 == 1 {
            Complex64::from_polar(rng.random_range(4.0f64..8.0), rng.random_range(-3.1..3.1))
        } else {
            Complex64::from_polar(rng.random_range(4.0f64..60.0), rng.random_range(-1.5..1.5))
        };
        let s = sigma(z)?;
        match s.method {
            E1Method::Series => n_series += 1,
            E1Method::ContinuedFraction => n_cf += 1,
        }
        let e1 = exp_integral_e1(z)?;
        worst = worst.max((s.value * e1.exp() - 1.0).norm());
    }
    rep.check(
        worst <= 1e-12 && n_series > 0 && n_cf > 0,
        format!("σ·exp(E1) on 10⁴ points ({n_series} series, {n_cf} continued fraction): max |Δ| {worst:.3e} (tol 1e-12)"),
    );

    let mut small_ok = true;
    let mut large_ok = true;
    let (mut small_ratio, mut large_ratio) = (0.0f64, 0.0f64);
    for _ in 0..2000 {
        let z = Complex64::from_polar(rng.random_range(1e-8f64..0.01), rng.random_range(-3.1..3.1));
        let dev = (sigma(z)?.value / (EULER_GAMMA.exp() * z) - 1.0).norm();
        small_ratio = small_ratio.max(dev / (2.0 * z.norm()));
        small_ok &= dev <= 2.0 * z.norm();
        let z = Complex64::from_polar(rng.random_range(20.0f64..200.0), rng.random_range(-PI / 2.0..=PI / 2.0));
        // σ - 1 = expm1(-E1), evaluated without cancellation
        let w = -exp_integral_e1(z)?;
        let half = (0.5 * w.im).sin();
        let sigma_m1 = Complex64::new(w.re.exp_m1() * w.im.cos() - 2.0 * half * half, w.re.exp() * w.im.sin());
        let dev = (sigma_m1 + (-z).exp() / z).norm();
        let bound = 4.0 * (-z).exp().norm() / z.norm_sqr();
        large_ratio = large_ratio.max(dev / bound);
        large_ok &= dev <= bound;
    }
    rep.check(small_ok, format!("|σ/(e^γ z) - 1| ≤ 2|z| for |z| ≤ 0.01: max ratio to bound {small_ratio:.3}"));
    rep.check(large_ok, format!("|σ - 1 + e^(-z)/z| ≤ 4|e^(-z)|/|z|² for |z| ≥ 20, |arg z| ≤ π/2: max ratio to bound {large_ratio:.3}"));
    Ok(())
}

fn density_closed_form(rep: &mut CriterionReport) -> Result<()> {
    let p = ModelParams::new(0.5, 0.0).with_size(1.0, 101);
    let eps = 0.05;
    let t = Complex64::new(0.0, 0.0);
    for (r1, r2) in [(Sign::Plus, Sign::Plus), (Sign::Plus, Sign::Minus), (Sign::Minus, Sign::Minus), (Sign::Minus, Sign::Plus)] {
        let mut worst = 0.0f64;
        for &x in &[0.5, 1.5, 3.0, 7.0] {
            let a = DensityPoint { flavor: FlavorIndex::new(r1, Sign::Plus), x: [x, 0.0], t };
            let b = DensityPoint { flavor: FlavorIndex::new(r2, Sign::Plus), x: [0.0, 0.0], t };
            let d = density_two_point(&p, a, b, eps, SumMode::FiniteL)? * p.a_tilde;
            let cf = density2pt_ir_g2zero(&p, r1, r2, x, t, eps)?.value;
            worst = worst.max(rel_c(d, cf));
        }
        rep.check(worst <= 0.05, format!("(r1,r2)=({r1},{r2}), l=101, x ∈ {{0.5,1.5,3,7}}ã: max rel {worst:.3e} (tol 5e-2)"));
    }
    Ok(())
}
