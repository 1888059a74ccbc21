//! Thermal density and fermion correlation functions at finite cutoff.
//!
//! Momentum sums run over `Λ̂*_{s1} ∩ Λ̂*_{s2}`. Inside the cutoff window the
//! sum is done term by term; beyond it the modes are free and the remaining
//! series are summed in closed form (zero temperature part) plus an explicit
//! Bose series.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Mutex;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{window, Momentum2};
use crate::model::{omega_pair, v_coeff_unchecked};
use crate::params::{Beta, FlavorIndex, ModelParams, Sign};
use crate::quad::{adaptive, richardson_c};
use crate::special::{alpha1, exp_integral_e1};
use crate::thermo::{zero_mode_index, zero_mode_theta_exact};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Infrared cutoff `μ = IR_CUTOFF·π/ã` on `|p_s|` used by IR-mode `ln G` for
/// equal chain directions, where the integral is logarithmically divergent.
/// Charge-neutral products of `G`s do not depend on it.
pub const IR_CUTOFF: f64 = 1e-12;

/// Same at finite β, where the cut-off piece grows like `1/(βμ)` and a
/// smaller `μ` costs digits in neutral products.
pub const IR_CUTOFF_THERMAL: f64 = 1e-8;

/// Lower end of the log-scaled axes for integrable endpoint behaviour.
const INTEGRABLE_CUTOFF: f64 = 1e-15;

/// Klein factor label: charge `q`, flavor `(r, s)` and chain index `x_{-s}/ã`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KleinLabel {
    pub q: Sign,
    pub r: Sign,
    pub s: Sign,
    pub x: i64,
}

impl KleinLabel {
    pub fn new(q: Sign, r: Sign, s: Sign, x: i64) -> Self {
        KleinLabel { q, r, s, x }
    }

    fn key(&self) -> (Sign, Sign, i64) {
        (self.r, self.s, self.x)
    }
}

/// Vacuum expectation of `R_1^{r_1 q_1} ⋯ R_N^{r_N q_N}`.
///
/// Klein factors with different labels anticommute, powers of the same
/// unitary commute, so the product is brought to label-grouped order by a
/// stable sort; the value is the sign of that permutation if every label has
/// zero net charge and 0 otherwise.
pub fn klein_vev(seq: &[KleinLabel]) -> i8 {
    if seq.len() % 2 == 1 {
        return 0;
    }
    let mut net: HashMap<(Sign, Sign, i64), i64> = HashMap::new();
    for k in seq {
        *net.entry(k.key()).or_default() += (k.r * k.q).i() as i64;
    }
    if net.values().any(|&c| c != 0) {
        return 0;
    }
    let mut inversions = 0usize;
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            if seq[i].key() > seq[j].key() {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumMode {
    FiniteL,
    IrLimit,
}

impl std::str::FromStr for SumMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "finite" | "finite-l" => Ok(SumMode::FiniteL),
            "ir" | "ir-limit" => Ok(SumMode::IrLimit),
            _ => Err(format!("unknown sum mode {s:?}")),
        }
    }
}

/// Field insertion `ψ^q_{r,s}(x, t)`; `x = [x_+, x_-]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Insertion {
    pub q: Sign,
    pub flavor: FlavorIndex,
    pub x: [f64; 2],
    pub t: Complex64,
}

impl Insertion {
    pub fn new(q: Sign, r: Sign, s: Sign, x: [f64; 2], t: Complex64) -> Self {
        Insertion {
            q,
            flavor: FlavorIndex::new(r, s),
            x,
            t,
        }
    }

    /// Chain index `x_{-s}/ã`.
    pub fn chain(&self, params: &ModelParams) -> Result<i64> {
        let xm = self.x[self.flavor.s.flip().idx()] / params.a_tilde;
        let k = xm.round();
        if (xm - k).abs() > 1e-9 {
            return Err(Error::input("x_{-s} must lie on the ã-lattice"));
        }
        Ok(k as i64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelatorQuery {
    pub insertions: Vec<Insertion>,
    pub epsilon: f64,
    pub mode: SumMode,
}

fn check_epsilon(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::input("ε must be positive"));
    }
    Ok(())
}

/// Times are real or `-iτ` with `0 <= τ <= β`.
pub fn check_insertion_time(t: Complex64, beta: Beta) -> Result<()> {
    if !(t.re.is_finite() && t.im.is_finite()) {
        return Err(Error::input("time must be finite"));
    }
    if t.im == 0.0 {
        return Ok(());
    }
    if t.re != 0.0 || t.im > 0.0 {
        return Err(Error::input("time must be real or -iτ with τ >= 0"));
    }
    if let Beta::Finite(b) = beta {
        if -t.im > b {
            return Err(Error::input("imaginary time exceeds β"));
        }
    }
    Ok(())
}

/// Time differences entering `G` need `-β <= Im t <= 0`.
fn check_pair_time(t: Complex64, beta: Beta) -> Result<()> {
    if !(t.re.is_finite() && t.im.is_finite()) || t.im > 0.0 {
        return Err(Error::input(
            "time difference must have -β <= Im t <= 0 (order Euclidean times decreasingly)",
        ));
    }
    if let Beta::Finite(b) = beta {
        if -t.im > b {
            return Err(Error::input("imaginary time difference exceeds β"));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kernel {
    LnG,
    Density,
}

struct Pair<'a> {
    params: &'a ModelParams,
    f1: FlavorIndex,
    f2: FlavorIndex,
    x: [f64; 2],
    t: Complex64,
    eps: f64,
    kernel: Kernel,
}

/// `e^{iωt}/(e^{βω}-1)` and `e^{-iωt}/(1-e^{-βω})`.
fn thermal_weights(omega: f64, t: Complex64, beta: Beta) -> (Complex64, Complex64) {
    match beta {
        Beta::Infinite => (Complex64::new(0.0, 0.0), (-I * omega * t).exp()),
        Beta::Finite(b) => {
            let denom = -(-b * omega).exp_m1();
            ((I * omega * t - b * omega).exp() / denom, (-I * omega * t).exp() / denom)
        }
    }
}

impl<'a> Pair<'a> {
    /// Summand at `p` without the overall lattice prefactor.
    fn term(&self, p: &Momentum2) -> Complex64 {
        let params = self.params;
        let w = omega_pair(p, params);
        let mp = p.neg();
        let (f1, f2) = (self.f1, self.f2);
        let mut acc = Complex64::new(0.0, 0.0);
        for sp in Sign::BOTH {
            let om = w[sp.idx()];
            if om == 0.0 {
                continue;
            }
            let v1 = v_coeff_unchecked(sp, f1.r, f1.s, p, params);
            let v2 = v_coeff_unchecked(sp, f2.r, f2.s, p, params);
            let v1m = v_coeff_unchecked(sp, f1.r, f1.s, &mp, params);
            let v2m = v_coeff_unchecked(sp, f2.r, f2.s, &mp, params);
            let (wt, wv) = thermal_weights(om, self.t, params.beta);
            acc += v1.conj() * v2 * wt + v1m * v2m.conj() * wv;
        }
        let phase = (-I * (p.p_plus * self.x[0] + p.p_minus * self.x[1])).exp();
        let damp = (-self.eps * 0.5 * (p.comp(f1.s).abs() + p.comp(f2.s).abs())).exp();
        let k = match self.kernel {
            Kernel::LnG => (f1.r * f2.r).f() / (p.comp(f1.s) * p.comp(f2.s)),
            Kernel::Density => 1.0,
        };
        acc * phase * (damp * k)
    }

    fn same_direction(&self) -> bool {
        self.f1.s == self.f2.s
    }

    fn finite_sum(&self) -> Complex64 {
        let params = self.params;
        let len = params.length();
        let l = params.l_over_a;
        let s = self.f1.s;
        let rows: Vec<i64> = window(l).collect();
        let inner: Complex64 = rows
            .par_iter()
            .map(|&a| {
                let mut acc = Complex64::new(0.0, 0.0);
                for b in window(l) {
                    let (np, nm) = (a, b);
                    let p = Momentum2::boson(np, nm, len);
                    if p.comp(self.f1.s) == 0.0 || p.comp(self.f2.s) == 0.0 {
                        continue;
                    }
                    acc += self.term(&p);
                }
                acc
            })
            .sum();
        let tail = if self.same_direction() && self.f1.r == self.f2.r {
            self.finite_tail(s)
        } else {
            Complex64::new(0.0, 0.0)
        };
        let pref = match self.kernel {
            Kernel::LnG => params.a_tilde * (2.0 * PI / len).powi(2),
            Kernel::Density => 1.0 / (params.a_tilde * len * len),
        };
        inner * pref + tail
    }

    /// Modes with `|p_s| > π/ã`, already multiplied by the lattice prefactor.
    fn finite_tail(&self, s: Sign) -> Complex64 {
        let params = self.params;
        let len = params.length();
        let l = params.l_over_a;
        let h = (l as i64 - 1) / 2;
        let r = self.f1.r.f();
        let step = 2.0 * PI / len;
        let xs = self.x[s.idx()];
        let xm = self.x[s.flip().idx()];
        let chain: Complex64 = window(l).map(|m| (-I * step * m as f64 * xm).exp()).sum();
        let u = r * xs - params.v_f * self.t;
        let z_vac = step * (self.eps - I * u);
        let z_th = step * (self.eps + I * u);
        let q = (-z_vac).exp();
        let (hf, hp1) = (h as f64, (h + 1) as f64);
        let mut sum = match self.kernel {
            Kernel::LnG => {
                let mut partial = Complex64::new(0.0, 0.0);
                for n in 1..=h {
                    partial += (-(n as f64) * z_vac).exp() / n as f64;
                }
                -(1.0 - q).ln() - partial
            }
            Kernel::Density => (-hp1 * z_vac).exp() * (hp1 - hf * q) / ((1.0 - q) * (1.0 - q)),
        };
        if let Beta::Finite(b) = params.beta {
            let mut n = h + 1;
            loop {
                let nf = n as f64;
                let w = -1.0 / (b * params.v_f * step * nf).exp_m1();
                let e = (-b * params.v_f * step * nf).exp() * w;
                let weight = match self.kernel {
                    Kernel::LnG => 1.0 / nf,
                    Kernel::Density => nf,
                };
                let add = weight * e * ((-nf * z_vac).exp() + (-nf * z_th).exp());
                sum += add;
                if add.norm() <= 1e-17 * sum.norm() || n > h + 10_000_000 {
                    break;
                }
                n += 1;
            }
        }
        match self.kernel {
            Kernel::LnG => sum * chain * (params.a_tilde / len),
            Kernel::Density => sum * chain / (params.a_tilde * len * len * len),
        }
    }

    fn ir_integral(&self) -> Result<Complex64> {
        let params = self.params;
        let cut = PI / params.a_tilde;
        let s1 = self.f1.s;
        let mu = if self.kernel == Kernel::LnG && self.same_direction() {
            match params.beta {
                Beta::Infinite => IR_CUTOFF,
                Beta::Finite(_) => IR_CUTOFF_THERMAL,
            }
        } else {
            INTEGRABLE_CUTOFF
        } * cut;
        let floor = INTEGRABLE_CUTOFF * cut;
        // y is the outer coordinate, x the inner one; both run on log scales
        let (outer_s, inner_s) = if self.same_direction() { (s1.flip(), s1) } else { (Sign::Minus, Sign::Plus) };
        let point = |inner: f64, outer: f64| -> Momentum2 {
            let mut c = [0.0; 2];
            c[inner_s.idx()] = inner;
            c[outer_s.idx()] = outer;
            Momentum2::new(c[0], c[1])
        };
        let quadrant = |(sy, sx): (f64, f64)| -> Result<Complex64> {
            let err: Mutex<Option<Error>> = Mutex::new(None);
            let inner_fn = |v: f64| -> Complex64 {
                let y = sy * v.exp();
                let r = adaptive(
                    |u: f64| {
                        let px = sx * u.exp();
                        self.term(&point(px, y)) * px.abs()
                    },
                    mu.ln(),
                    cut.ln(),
                    1e-16,
                    1e-11,
                    16,
                    20_000,
                );
                match r {
                    Ok(q) => q.value * y.abs(),
                    Err(e) => {
                        err.lock().unwrap().get_or_insert(e);
                        Complex64::new(0.0, 0.0)
                    }
                }
            };
            let r = adaptive(inner_fn, floor.ln(), cut.ln(), 1e-15, 1e-9, 16, 20_000)?;
            if let Some(e) = err.into_inner().unwrap() {
                return Err(e);
            }
            Ok(r.value)
        };
        let quads = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];
        let parts = quads.par_iter().map(|&q| quadrant(q)).collect::<Result<Vec<_>>>()?;
        let total: Complex64 = parts.into_iter().sum();
        let pref = match self.kernel {
            Kernel::LnG => params.a_tilde,
            Kernel::Density => 1.0 / (params.a_tilde * 4.0 * PI * PI),
        };
        let tail = if self.same_direction() && self.f1.r == self.f2.r {
            self.ir_tail(s1)?
        } else {
            Complex64::new(0.0, 0.0)
        };
        Ok(total * pref + tail)
    }

    /// `|p_s| > π/ã` part of the IR integral in closed form.
    fn ir_tail(&self, s: Sign) -> Result<Complex64> {
        let params = self.params;
        let cut = PI / params.a_tilde;
        let r = self.f1.r.f();
        let xs = self.x[s.idx()];
        let xm = self.x[s.flip().idx()];
        // ∫_{-π/ã}^{π/ã} dp e^{-ipx}
        let k = xm / params.a_tilde;
        let chain = if xm == 0.0 {
            2.0 * cut
        } else if k == k.round() {
            0.0
        } else {
            2.0 * (cut * xm).sin() / xm
        };
        let u = r * xs - params.v_f * self.t;
        let z_vac = self.eps - I * u;
        let z_th = self.eps + I * u;
        let f = |z: Complex64| -> Result<Complex64> {
            match self.kernel {
                Kernel::LnG => exp_integral_e1(cut * z),
                Kernel::Density => Ok(alpha1(cut * z) * cut * cut),
            }
        };
        let mut sum = f(z_vac)?;
        if let Beta::Finite(b) = params.beta {
            let bv = b * params.v_f;
            for k in 1..100_000 {
                let kf = k as f64;
                let add = f(z_vac + kf * bv)? + f(z_th + kf * bv)?;
                sum += add;
                if add.norm() <= 1e-17 * sum.norm() {
                    break;
                }
            }
        }
        Ok(match self.kernel {
            Kernel::LnG => sum * chain * params.a_tilde / (2.0 * PI),
            Kernel::Density => sum * chain / (params.a_tilde * 8.0 * PI * PI * PI),
        })
    }

    fn evaluate(&self, mode: SumMode) -> Result<Complex64> {
        match mode {
            SumMode::FiniteL => Ok(self.finite_sum()),
            SumMode::IrLimit => self.ir_integral(),
        }
    }
}

/// `ln G_{f1,f2}(x, t; ε)`.
///
/// In IR mode with `s1 = s2` the `p_s` integral is cut at `|p_s| >= μ`, see
/// [`IR_CUTOFF`].
pub fn ln_g(
    params: &ModelParams,
    f1: FlavorIndex,
    f2: FlavorIndex,
    x: [f64; 2],
    t: Complex64,
    epsilon: f64,
    mode: SumMode,
) -> Result<Complex64> {
    params.validate()?;
    check_epsilon(epsilon)?;
    check_pair_time(t, params.beta)?;
    Pair {
        params,
        f1,
        f2,
        x,
        t,
        eps: epsilon,
        kernel: Kernel::LnG,
    }
    .evaluate(mode)
}

/// `g_{r,s}(ε) = 2πãε G_{r,s,r,s}(0, 0; ε)`, returned as `ln g`.
pub fn ln_g_norm(params: &ModelParams, f: FlavorIndex, epsilon: f64, mode: SumMode) -> Result<Complex64> {
    let lg = ln_g(params, f, f, [0.0, 0.0], Complex64::new(0.0, 0.0), epsilon, mode)?;
    Ok(lg + (2.0 * PI * params.a_tilde * epsilon).ln())
}

/// Fermion `N`-point function without the `1 + O(1/L)` zero-mode factors.
pub fn fermion_npoint(query: &CorrelatorQuery, params: &ModelParams) -> Result<Complex64> {
    params.validate()?;
    check_epsilon(query.epsilon)?;
    let ins = &query.insertions;
    if ins.is_empty() {
        return Err(Error::input("at least one insertion is required"));
    }
    let mut labels = Vec::with_capacity(ins.len());
    for j in ins {
        check_insertion_time(j.t, params.beta)?;
        labels.push(KleinLabel::new(j.q, j.flavor.r, j.flavor.s, j.chain(params)?));
    }
    let klein = klein_vev(&labels);
    if klein == 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut norms: HashMap<FlavorIndex, Complex64> = HashMap::new();
    let mut total = Complex64::new(0.0, 0.0);
    for j in ins {
        let lg = match norms.get(&j.flavor) {
            Some(v) => *v,
            None => {
                let v = ln_g_norm(params, j.flavor, query.epsilon, query.mode)?;
                norms.insert(j.flavor, v);
                v
            }
        };
        total -= 0.5 * lg;
    }
    for a in 0..ins.len() {
        for b in a + 1..ins.len() {
            let (ja, jb) = (&ins[a], &ins[b]);
            let x = [ja.x[0] - jb.x[0], ja.x[1] - jb.x[1]];
            let lg = ln_g(params, ja.flavor, jb.flavor, x, ja.t - jb.t, query.epsilon, query.mode)?;
            total += -(ja.q * jb.q).f() * lg;
        }
    }
    Ok(klein as f64 * total.exp())
}

/// One density insertion `J_{r,s}(x, t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityPoint {
    pub flavor: FlavorIndex,
    pub x: [f64; 2],
    pub t: Complex64,
}

/// `⟨J_{r1,s1}(x1,t1) J_{r2,s2}(x2,t2)⟩` without the `O(1/L)` zero-mode part.
pub fn density_two_point(
    params: &ModelParams,
    a: DensityPoint,
    b: DensityPoint,
    epsilon: f64,
    mode: SumMode,
) -> Result<Complex64> {
    params.validate()?;
    check_epsilon(epsilon)?;
    let t = a.t - b.t;
    check_pair_time(t, params.beta)?;
    Pair {
        params,
        f1: a.flavor,
        f2: b.flavor,
        x: [a.x[0] - b.x[0], a.x[1] - b.x[1]],
        t,
        eps: epsilon,
        kernel: Kernel::Density,
    }
    .evaluate(mode)
}

/// Leading zero-mode charge correlator `L⁻²⟨N_{r1,s1}(x1) N_{r2,s2}(x2)⟩`.
pub fn zero_mode_nn(params: &ModelParams, a: (Sign, Sign, i64), b: (Sign, Sign, i64)) -> Result<f64> {
    params.validate()?;
    let beta = params
        .beta
        .finite()
        .ok_or_else(|| Error::input("zero-mode correlators need a finite β"))?;
    let (g1, g2) = (params.gamma1, params.gamma2);
    let am = params.derived().a;
    let len = params.length();
    let pref = 1.0 / (4.0 * PI * beta * params.v_f * len);
    let (r1, s1, x1) = a;
    let (r2, s2, x2) = b;
    let mut v = 0.0;
    if s1 == s2 && x1 == x2 {
        v += 1.0 / (am * (1.0 + g1)) + (r1 * r2).f() / (1.0 - g1);
    }
    if s1 != s2 {
        v -= params.a_tilde / len * g2 / (am * (1.0 + g1).powi(2));
    }
    Ok(pref * v)
}

/// Sources `m_{r,s}(x)` for the zero-mode generating function.
pub type ZeroModeSources = HashMap<(Sign, Sign, i64), f64>;

fn chain_slot(x: i64, l: usize) -> Result<usize> {
    let h = (l as i64 - 1) / 2;
    if x < -h || x > h {
        return Err(Error::input(format!("chain index {x} outside [-{h}, {h}]")));
    }
    Ok((x + h) as usize)
}

/// Gaussian closed form of `⟨exp((i/L) Σ m_{r,s}(x) N_{r,s}(x))⟩`.
///
/// The inter-chain term pairs `m_{r,s}(x)` with `m_{r',-s}(x')` for all `r, r'`.
pub fn zero_mode_generating(params: &ModelParams, m: &ZeroModeSources) -> Result<f64> {
    params.validate()?;
    let beta = params
        .beta
        .finite()
        .ok_or_else(|| Error::input("zero-mode correlators need a finite β"))?;
    for &(_, _, x) in m.keys() {
        chain_slot(x, params.l_over_a)?;
    }
    let (g1, g2) = (params.gamma1, params.gamma2);
    let am = params.derived().a;
    let len = params.length();
    let pref = 1.0 / (8.0 * PI * beta * params.v_f * len);
    let get = |r: Sign, s: Sign, x: i64| m.get(&(r, s, x)).copied().unwrap_or(0.0);
    let mut chains: Vec<(Sign, i64)> = m.keys().map(|&(_, s, x)| (s, x)).collect();
    chains.sort();
    chains.dedup();
    let mut local = 0.0;
    for &(s, x) in &chains {
        let (mp, mm) = (get(Sign::Plus, s, x), get(Sign::Minus, s, x));
        let sum = mp + mm;
        let diff = mp - mm;
        local += sum * sum / (am * (1.0 + g1)) + diff * diff / (1.0 - g1);
    }
    let tot = |s: Sign| -> f64 { m.iter().filter(|(k, _)| k.1 == s).map(|(_, v)| *v).sum() };
    let cross = 2.0 * tot(Sign::Plus) * tot(Sign::Minus);
    let inter = params.a_tilde / len * g2 / (am * (1.0 + g1).powi(2)) * cross;
    Ok((-pref * local + pref * inter).exp())
}

/// Same expectation from the exact lattice sum over charges.
pub fn zero_mode_generating_exact(params: &ModelParams, m: &ZeroModeSources) -> Result<f64> {
    let l = params.l_over_a;
    let len = params.length();
    let mut phase = vec![0.0; 4 * l];
    for (&(r, s, x), &v) in m {
        phase[zero_mode_index(r, s, chain_slot(x, l)?, l)] = v / len;
    }
    let ln_m = zero_mode_theta_exact(params, Some(&phase))?;
    let ln_0 = zero_mode_theta_exact(params, None)?;
    Ok((ln_m - ln_0).exp())
}

/// Richardson extrapolation of `f(ε)` to `ε → 0⁺` over the given sequence.
pub fn epsilon_extrapolate(eps: &[f64], f: impl Fn(f64) -> Result<Complex64>) -> Result<Complex64> {
    if eps.is_empty() {
        return Err(Error::input("empty ε sequence"));
    }
    let vals = eps.iter().map(|&e| f(e)).collect::<Result<Vec<_>>>()?;
    Ok(richardson_c(eps, &vals))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lab(q: i32, r: i32, s: i32, x: i64) -> KleinLabel {
        KleinLabel::new(
            Sign::from_i32(q).unwrap(),
            Sign::from_i32(r).unwrap(),
            Sign::from_i32(s).unwrap(),
            x,
        )
    }

    #[test]
    fn klein_small_cases() {
        assert_eq!(klein_vev(&[lab(1, 1, 1, 0), lab(-1, 1, 1, 0)]), 1);
        assert_eq!(klein_vev(&[lab(1, 1, 1, 0), lab(1, 1, 1, 0)]), 0);
        assert_eq!(klein_vev(&[lab(1, 1, 1, 0), lab(-1, 1, 1, 1)]), 0);
        assert_eq!(klein_vev(&[lab(1, 1, 1, 0)]), 0);
        let (a, b) = ((1, 1, 0), (-1, 1, 2));
        let p = |q: i32, f: (i32, i32, i64)| lab(q, f.0, f.1, f.2);
        assert_eq!(klein_vev(&[p(1, a), p(-1, a), p(1, b), p(-1, b)]), 1);
        assert_eq!(klein_vev(&[p(1, a), p(1, b), p(-1, a), p(-1, b)]), -1);
        assert_eq!(klein_vev(&[p(1, a), p(1, b), p(-1, b), p(-1, a)]), 1);
    }

    #[test]
    fn free_two_point_finite_l() {
        // γ=0: ln G(x) = -ln(1 - e^{-2π(ε - irx)/L}) exactly
        let p = ModelParams::new(0.0, 0.0).with_size(1.0, 21);
        let f = FlavorIndex::new(Sign::Minus, Sign::Plus);
        let eps = 0.05;
        for &x in &[0.0, 0.7, -2.3] {
            let v = ln_g(&p, f, f, [x, 0.0], Complex64::new(0.0, 0.0), eps, SumMode::FiniteL).unwrap();
            let z = 2.0 * PI / 21.0 * (eps - I * (-x));
            let want = -(1.0 - (-z).exp()).ln();
            assert!((v - want).norm() < 1e-12, "{x}: {v} {want}");
        }
        // other chain, other direction
        let off = ln_g(&p, f, f, [0.3, 2.0], Complex64::new(0.0, 0.0), eps, SumMode::FiniteL).unwrap();
        assert!(off.norm() < 1e-13);
        let g = FlavorIndex::new(Sign::Plus, Sign::Minus);
        let cross = ln_g(&p, f, g, [0.3, 0.2], Complex64::new(0.0, 0.0), eps, SumMode::FiniteL).unwrap();
        assert!(cross.norm() < 1e-15);
    }

    #[test]
    fn hermiticity_of_density() {
        let p = ModelParams::new(0.3, 0.4).with_size(1.0, 9);
        let f1 = FlavorIndex::new(Sign::Plus, Sign::Plus);
        let f2 = FlavorIndex::new(Sign::Minus, Sign::Minus);
        let pa = DensityPoint { flavor: f1, x: [0.4, 1.0], t: Complex64::new(0.7, 0.0) };
        let pb = DensityPoint { flavor: f2, x: [-0.5, 0.3], t: Complex64::new(0.1, 0.0) };
        let ab = density_two_point(&p, pa, pb, 0.2, SumMode::FiniteL).unwrap();
        let rev = density_two_point(
            &p,
            DensityPoint { flavor: f2, x: pb.x, t: pb.t },
            DensityPoint { flavor: f1, x: pa.x, t: pa.t },
            0.2,
            SumMode::FiniteL,
        )
        .unwrap();
        assert!((rev - ab.conj()).norm() < 1e-13 * ab.norm().max(1e-3));
    }

    #[test]
    fn zero_temperature_real_at_origin() {
        let p = ModelParams::new(0.4, -0.3).with_size(1.0, 11);
        for f in FlavorIndex::all() {
            let v = ln_g(&p, f, f, [0.0, 0.0], Complex64::new(0.0, 0.0), 0.1, SumMode::FiniteL).unwrap();
            assert!(v.im.abs() < 1e-13 && v.re > 0.0);
        }
    }

    #[test]
    fn nn_matches_inverse_form() {
        use crate::thermo::zero_mode_quadratic_form;
        let p = ModelParams::new(0.3, -0.45).with_size(1.0, 3).with_beta(Beta::Finite(0.9));
        let spec = zero_mode_quadratic_form(&p).unwrap();
        let inv = spec.h.clone().try_inverse().unwrap();
        let len = p.length();
        for (ra, sa, xa) in [(Sign::Plus, Sign::Plus, 0usize), (Sign::Minus, Sign::Minus, 2)] {
            for rb in Sign::BOTH {
                for sb in Sign::BOTH {
                    for xb in 0..3 {
                        let i = zero_mode_index(ra, sa, xa, 3);
                        let j = zero_mode_index(rb, sb, xb, 3);
                        let want = 0.5 * inv[(i, j)] / (len * len);
                        let got = zero_mode_nn(&p, (ra, sa, xa as i64 - 1), (rb, sb, xb as i64 - 1)).unwrap();
                        assert!((got - want).abs() < 1e-14, "{i} {j} {got} {want}");
                    }
                }
            }
        }
    }

    #[test]
    fn generating_function_second_derivative() {
        let p = ModelParams::new(0.2, 0.5).with_size(1.0, 5).with_beta(Beta::Finite(1.2));
        let a = (Sign::Plus, Sign::Plus, 1i64);
        let b = (Sign::Minus, Sign::Minus, -2i64);
        let h = 1e-2;
        let f = |ma: f64, mb: f64| {
            let mut m = ZeroModeSources::new();
            m.insert(a, ma);
            *m.entry(b).or_insert(0.0) += mb;
            zero_mode_generating(&p, &m).unwrap().ln()
        };
        let d2 = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4.0 * h * h);
        let nn = zero_mode_nn(&p, a, b).unwrap();
        assert!((d2 + nn).abs() < 1e-9 * nn.abs().max(1e-6), "{d2} {nn}");
        assert_eq!(zero_mode_generating(&p, &ZeroModeSources::new()).unwrap(), 1.0);
    }

    #[test]
    fn generating_function_exact_vs_gaussian() {
        // large λ regime: the two agree up to the theta correction
        let p = ModelParams::new(0.3, 0.4).with_size(1.0, 3).with_beta(Beta::Finite(0.4));
        let mut m = ZeroModeSources::new();
        m.insert((Sign::Plus, Sign::Plus, 0), 0.8);
        m.insert((Sign::Minus, Sign::Minus, 1), -0.5);
        m.insert((Sign::Plus, Sign::Minus, -1), 0.3);
        let g = zero_mode_generating(&p, &m).unwrap();
        let e = zero_mode_generating_exact(&p, &m).unwrap();
        assert!((g - e).abs() < 1e-10, "{g} {e}");
    }
}
