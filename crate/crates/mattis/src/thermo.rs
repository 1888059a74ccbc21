//! Free energy: boson sum, zero-mode theta sum, QFT limit.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{window, Momentum2};
use crate::model::{g_angular, ground_state_energy, omega_pair};
use crate::params::{Beta, ModelParams, Sign};
use crate::quad::adaptive;
use crate::special::{f1, f2};

fn finite_beta(params: &ModelParams) -> Result<f64> {
    params.validate()?;
    match params.beta {
        Beta::Finite(b) => Ok(b),
        Beta::Infinite => Err(Error::input("a finite β is required")),
    }
}

/// `(1/β) ln(1 - e^{-βω})`.
fn log_weight(beta: f64, w: f64) -> f64 {
    (-(-beta * w).exp_m1()).ln() / beta
}

/// Boson contribution `Σ_s Σ_{p∈Λ̂*_s} (1/β) ln(1 - e^{-βω_s(p)})`.
pub fn boson_free_energy(params: &ModelParams) -> Result<f64> {
    let beta = finite_beta(params)?;
    let l = params.l_over_a;
    let len = params.length();
    let h = (l as i64 - 1) / 2;

    // inside the window both branches come from the same ω pair
    let inner: f64 = window(l)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&a| {
            let mut acc = 0.0;
            for b in window(l) {
                let p = Momentum2::boson(a, b, len);
                let w = omega_pair(&p, params);
                if a != 0 {
                    acc += log_weight(beta, w[Sign::Plus.idx()]);
                }
                if b != 0 {
                    acc += log_weight(beta, w[Sign::Minus.idx()]);
                }
            }
            acc
        })
        .sum();

    // outside the window ω_s = v_F|p_s| independent of p_{-s}
    let step = 2.0 * PI / len;
    let mut tail = 0.0;
    let mut n = h + 1;
    loop {
        let term = log_weight(beta, params.v_f * step * n as f64);
        tail += term;
        if term.abs() <= 1e-17 * (tail.abs() + inner.abs()) || term == 0.0 {
            break;
        }
        n += 1;
    }
    // two branches, two signs of p_s, l values of p_{-s}
    Ok(inner + 4.0 * l as f64 * tail)
}

/// Mode used for the zero-mode partition function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroModeMode {
    ThetaExact,
    Gaussian,
    ClosedForm,
}

impl std::str::FromStr for ZeroModeMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "theta" | "exact" | "theta-exact" => Ok(ZeroModeMode::ThetaExact),
            "gaussian" => Ok(ZeroModeMode::Gaussian),
            "closed" | "closed-form" => Ok(ZeroModeMode::ClosedForm),
            _ => Err(format!("unknown zero-mode mode {s:?}")),
        }
    }
}

impl std::fmt::Display for ZeroModeMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ZeroModeMode::ThetaExact => "theta-exact",
            ZeroModeMode::Gaussian => "gaussian",
            ZeroModeMode::ClosedForm => "closed-form",
        })
    }
}

/// Quadratic form `νᵀHν` with phase `m` for `Σ_ν exp(-νᵀHν + i mᵀν)`.
#[derive(Debug, Clone)]
pub struct ThetaSumSpec {
    pub h: DMatrix<f64>,
    pub m: DVector<f64>,
    /// Smallest eigenvalue of `H⁻¹`.
    pub lambda: f64,
}

impl ThetaSumSpec {
    pub fn new(h: DMatrix<f64>, m: DVector<f64>) -> Result<Self> {
        if !h.is_square() || h.nrows() != m.len() {
            return Err(Error::input("H must be square and match m"));
        }
        if (&h - h.transpose()).amax() > 1e-12 * h.amax().max(1.0) {
            return Err(Error::input("H is not symmetric"));
        }
        let eig = SymmetricEigen::new(h.clone());
        let (min, max) = (eig.eigenvalues.min(), eig.eigenvalues.max());
        if !(min > 0.0) {
            return Err(Error::input("H is not positive definite"));
        }
        Ok(ThetaSumSpec { h, m, lambda: 1.0 / max })
    }

    pub fn dim(&self) -> usize {
        self.m.len()
    }

    /// `μ = max_k |(H⁻¹ m)_k|`.
    pub fn mu(&self) -> f64 {
        let chol = self.h.clone().cholesky().expect("positive definite");
        chol.solve(&self.m).amax()
    }

    /// `ln J` with `J = sqrt(π^M/det H) exp(-¼ mᵀH⁻¹m)`.
    pub fn ln_gaussian(&self) -> f64 {
        let chol = self.h.clone().cholesky().expect("positive definite");
        let ln_det: f64 = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        let quad = self.m.dot(&chol.solve(&self.m));
        0.5 * (self.dim() as f64 * PI.ln() - ln_det) - 0.25 * quad
    }
}

/// Upper envelope `b` with `1 <= Z/J <= 1 + b`, valid when `λ > 2/π²` and `μ <= 2πλ`.
pub fn gaussian_bound(dim: usize, lambda: f64, mu: f64) -> Result<f64> {
    if !(lambda > 2.0 / (PI * PI)) {
        return Err(Error::precondition(format!(
            "λ = {lambda:.6} must exceed 2/π² for the Gaussian bound"
        )));
    }
    if !(mu <= 2.0 * PI * lambda) {
        return Err(Error::precondition(format!("μ = {mu:.6} exceeds 2πλ")));
    }
    let mut tail = 0.0;
    for n in 1..10_000 {
        let t = (-lambda * PI * PI * (n * n) as f64).exp();
        tail += t;
        if t < 1e-30 * tail {
            break;
        }
    }
    let single = 2.0 * ((-lambda * PI * PI + mu * PI).exp() + (mu * mu / (4.0 * lambda)).exp() * tail);
    Ok((dim as f64 * single.ln_1p()).exp_m1())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaResult {
    /// `ln Z`; `Z` is real for real `H` and `m`.
    pub ln_z: f64,
    pub ln_j: f64,
    /// `None` when the Gaussian preconditions fail.
    pub bound: Option<f64>,
}

impl ThetaResult {
    pub fn ratio(&self) -> f64 {
        (self.ln_z - self.ln_j).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaMode {
    Exact,
    Gaussian,
}

const MAX_VISITS: usize = 50_000_000;

/// Sum of `exp(-νᵀHν + i mᵀν)` over the ellipsoid `νᵀHν <= t` (Fincke–Pohst).
fn ellipsoid_sum(r: &DMatrix<f64>, m: &DVector<f64>, t: f64, visits: &mut usize) -> Result<Complex64> {
    let n = m.len();
    let mut nu = vec![0i64; n];
    let mut total = Complex64::new(0.0, 0.0);
    // partial[i] = contribution of coordinates i..n
    fn rec(
        i: usize,
        r: &DMatrix<f64>,
        m: &DVector<f64>,
        t: f64,
        partial: f64,
        nu: &mut [i64],
        total: &mut Complex64,
        visits: &mut usize,
    ) -> Result<()> {
        let n = nu.len();
        let rii = r[(i, i)];
        let mut centre = 0.0;
        for j in i + 1..n {
            centre -= r[(i, j)] * nu[j] as f64;
        }
        centre /= rii;
        let room = t - partial;
        if room < 0.0 {
            return Ok(());
        }
        let half = room.sqrt() / rii;
        let lo = (centre - half).ceil() as i64;
        let hi = (centre + half).floor() as i64;
        for v in lo..=hi {
            *visits += 1;
            if *visits > MAX_VISITS {
                return Err(Error::precondition("theta sum too large for exact enumeration"));
            }
            nu[i] = v;
            let dv = rii * (v as f64 - centre);
            let q = partial + dv * dv;
            if q > t {
                continue;
            }
            if i == 0 {
                let phase: f64 = nu.iter().zip(m.iter()).map(|(&a, &b)| a as f64 * b).sum();
                *total += Complex64::from_polar((-q).exp(), phase);
            } else {
                rec(i - 1, r, m, t, q, nu, total, visits)?;
            }
        }
        Ok(())
    }
    if n == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    rec(n - 1, r, m, t, 0.0, &mut nu, &mut total, visits)?;
    Ok(total)
}

/// Exact lattice sum by enumeration, or its Gaussian replacement.
pub fn theta_sum(spec: &ThetaSumSpec, mode: ThetaMode) -> Result<ThetaResult> {
    let ln_j = spec.ln_gaussian();
    let bound = gaussian_bound(spec.dim(), spec.lambda, spec.mu()).ok();
    match mode {
        ThetaMode::Gaussian => {
            let b = bound.ok_or_else(|| {
                Error::precondition("Gaussian replacement needs λ > 2/π² and μ <= 2πλ")
            })?;
            Ok(ThetaResult {
                ln_z: ln_j,
                ln_j,
                bound: Some(b),
            })
        }
        ThetaMode::Exact => {
            let chol = spec
                .h
                .clone()
                .cholesky()
                .ok_or_else(|| Error::LinAlg("H is not positive definite".into()))?;
            let r = chol.l().transpose();
            // start from the diagonal decay radius and enlarge until the shell is negligible
            let hmin = spec.h.diagonal().min();
            let mut t = 32.0f64.max(hmin);
            let mut visits = 0;
            let mut z = ellipsoid_sum(&r, &spec.m, t, &mut visits)?;
            loop {
                let t2 = 2.0 * t;
                let z2 = ellipsoid_sum(&r, &spec.m, t2, &mut visits)?;
                let shell = (z2 - z).norm();
                z = z2;
                t = t2;
                if shell <= 1e-14 * z.norm() {
                    break;
                }
                if t > 1e4 {
                    return Err(Error::no_convergence("exact theta sum", shell / z.norm()));
                }
            }
            if z.re <= 0.0 {
                return Err(Error::no_convergence("exact theta sum (non-positive value)", z.norm()));
            }
            Ok(ThetaResult {
                ln_z: z.re.ln(),
                ln_j,
                bound,
            })
        }
    }
}

/// Index of `ν_{r,s}(x)` in the zero-mode vector: `((s·l + x)·2 + r)`.
pub fn zero_mode_index(r: Sign, s: Sign, x_idx: usize, l: usize) -> usize {
    (s.idx() * l + x_idx) * 2 + r.idx()
}

/// `βH̃_Q` as a quadratic form in the integer charges `ν_{r,s}(x)`.
pub fn zero_mode_quadratic_form(params: &ModelParams) -> Result<ThetaSumSpec> {
    let beta = finite_beta(params)?;
    let l = params.l_over_a;
    let (g1, g2) = (params.gamma1, params.gamma2);
    let a = params.derived().a;
    let c = beta * params.v_f * PI / params.length();
    let m = 4 * l;
    let diag = 0.5 * c * ((1.0 + g1) * a + (1.0 - g1));
    let off = 0.5 * c * ((1.0 + g1) * a - (1.0 - g1));
    let inv_l = 1.0 / l as f64;
    let same = 0.5 * c * inv_l * g2 * g2 / (1.0 + g1);
    let cross = 0.5 * c * inv_l * g2;
    let mut h = DMatrix::zeros(m, m);
    for s in Sign::BOTH {
        for x in 0..l {
            let ip = zero_mode_index(Sign::Plus, s, x, l);
            let im = zero_mode_index(Sign::Minus, s, x, l);
            h[(ip, ip)] += diag;
            h[(im, im)] += diag;
            h[(ip, im)] += off;
            h[(im, ip)] += off;
        }
    }
    for i in 0..m {
        let si = i / (2 * l);
        for j in 0..m {
            let sj = j / (2 * l);
            h[(i, j)] += if si == sj { same } else { cross };
        }
    }
    ThetaSumSpec::new(h, DVector::zeros(m))
}

/// Exact `ln Σ_ν exp(-βH̃_Q(ν) + i mᵀν)` using the charge structure of the form.
///
/// Per site the weight depends on `a = ν₊ + ν₋` and `d = ν₊ - ν₋` (same
/// parity); the inter-chain coupling only sees `Σ_x a_s(x)`, so the sum is a
/// convolution over sites followed by a double sum over the two totals.
pub fn zero_mode_theta_exact(params: &ModelParams, phase: Option<&[f64]>) -> Result<f64> {
    let beta = finite_beta(params)?;
    let l = params.l_over_a;
    if l > 201 {
        return Err(Error::precondition("exact zero-mode sum limited to L/ã <= 201"));
    }
    if let Some(ph) = phase {
        if ph.len() != 4 * l {
            return Err(Error::input("phase vector must have 4·L/ã entries"));
        }
    }
    let (g1, g2) = (params.gamma1, params.gamma2);
    let a_c = params.derived().a;
    let c = beta * params.v_f * PI / params.length();
    let ca = 0.5 * c * (1.0 + g1) * a_c;
    let cd = 0.5 * c * (1.0 - g1);
    let k_same = 0.5 * c * g2 * g2 / ((1.0 + g1) * l as f64);
    let k_cross = c * g2 / l as f64;

    let mut radius = ((40.0 / ca.min(cd)).sqrt().ceil() as i64).max(4);
    let mut prev: Option<f64> = None;
    loop {
        let ln_z = structured_sum(l, radius, ca, cd, k_same, k_cross, phase)?;
        if let Some(p) = prev {
            if (ln_z - p).abs() < 1e-14 {
                return Ok(ln_z);
            }
        }
        if radius > 1 << 14 {
            return Err(Error::no_convergence("structured theta sum", f64::NAN));
        }
        prev = Some(ln_z);
        radius *= 2;
    }
}

/// Scaled vector: values times `exp(log_scale)`, support starting at `offset`.
struct Scaled {
    offset: i64,
    vals: Vec<Complex64>,
    log_scale: f64,
}

fn site_weight(radius: i64, ca: f64, cd: f64, mp: f64, mm: f64) -> Scaled {
    let mut vals = Vec::with_capacity((2 * radius + 1) as usize);
    for a in -radius..=radius {
        let mut sd = Complex64::new(0.0, 0.0);
        let start = if a.rem_euclid(2) == 0 { -radius - radius % 2 } else { -radius - (radius + 1) % 2 };
        let mut d = start;
        while d <= radius + 1 {
            if (d - a).rem_euclid(2) == 0 {
                let df = d as f64;
                sd += Complex64::from_polar((-cd * df * df).exp(), 0.5 * (mp - mm) * df);
            }
            d += 1;
        }
        let af = a as f64;
        vals.push(sd * Complex64::from_polar((-ca * af * af).exp(), 0.5 * (mp + mm) * af));
    }
    Scaled {
        offset: -radius,
        vals,
        log_scale: 0.0,
    }
}

fn convolve(x: &Scaled, y: &Scaled) -> Scaled {
    let mut out = vec![Complex64::new(0.0, 0.0); x.vals.len() + y.vals.len() - 1];
    for (i, &a) in x.vals.iter().enumerate() {
        if a.norm() == 0.0 {
            continue;
        }
        for (j, &b) in y.vals.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    let peak = out.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut log_scale = x.log_scale + y.log_scale;
    if peak > 0.0 {
        for v in out.iter_mut() {
            *v /= peak;
        }
        log_scale += peak.ln();
    }
    // drop negligible edges
    let keep = |v: &Complex64| v.norm() > 1e-300;
    let first = out.iter().position(keep).unwrap_or(0);
    let last = out.iter().rposition(keep).unwrap_or(out.len() - 1);
    Scaled {
        offset: x.offset + y.offset + first as i64,
        vals: out[first..=last].to_vec(),
        log_scale,
    }
}

fn structured_sum(
    l: usize,
    radius: i64,
    ca: f64,
    cd: f64,
    k_same: f64,
    k_cross: f64,
    phase: Option<&[f64]>,
) -> Result<f64> {
    let mut totals = Vec::with_capacity(2);
    for s in Sign::BOTH {
        let mut acc: Option<Scaled> = None;
        for x in 0..l {
            let (mp, mm) = match phase {
                Some(ph) => (
                    ph[zero_mode_index(Sign::Plus, s, x, l)],
                    ph[zero_mode_index(Sign::Minus, s, x, l)],
                ),
                None => (0.0, 0.0),
            };
            let w = site_weight(radius, ca, cd, mp, mm);
            acc = Some(match acc {
                None => convolve(&w, &Scaled { offset: 0, vals: vec![Complex64::new(1.0, 0.0)], log_scale: 0.0 }),
                Some(prev) => convolve(&prev, &w),
            });
        }
        totals.push(acc.expect("l >= 1"));
    }
    let (wp, wm) = (&totals[0], &totals[1]);
    let mut z = Complex64::new(0.0, 0.0);
    for (i, &u) in wp.vals.iter().enumerate() {
        let ap = (wp.offset + i as i64) as f64;
        for (j, &v) in wm.vals.iter().enumerate() {
            let am = (wm.offset + j as i64) as f64;
            let e = k_same * (ap * ap + am * am) + k_cross * ap * am;
            z += u * v * (-e).exp();
        }
    }
    if !(z.re > 0.0) {
        return Err(Error::no_convergence("structured theta sum (non-positive value)", z.norm()));
    }
    Ok(z.re.ln() + wp.log_scale + wm.log_scale)
}

/// `ln J` of the zero-mode form from its closed-form determinant
/// `det H = c^{4l} (1-γ1²)^{2l} A^{2l-1}`, `c = βv_Fπ/L`.
pub fn zero_mode_ln_gaussian(params: &ModelParams) -> Result<f64> {
    let beta = finite_beta(params)?;
    let l = params.l_over_a as f64;
    let a = params.derived().a;
    let c = beta * params.v_f * PI / params.length();
    let g1 = params.gamma1;
    let ln_det = 4.0 * l * c.ln() + 2.0 * l * (1.0 - g1 * g1).ln() + (2.0 * l - 1.0) * a.ln();
    Ok(0.5 * (4.0 * l * PI.ln() - ln_det))
}

/// Zero-mode free energy `-ln Z_Q / β`.
pub fn zero_mode_free_energy(params: &ModelParams, mode: ZeroModeMode) -> Result<f64> {
    let beta = finite_beta(params)?;
    match mode {
        ZeroModeMode::ClosedForm => {
            let dc = params.derived();
            let len = params.length();
            Ok(-(2.0 * len / (params.a_tilde * beta)) * (len / (beta * dc.v_tilde * dc.a.sqrt())).ln()
                - dc.a.ln() / (2.0 * beta))
        }
        ZeroModeMode::Gaussian => Ok(-zero_mode_ln_gaussian(params)? / beta),
        ZeroModeMode::ThetaExact => Ok(-zero_mode_theta_exact(params, None)? / beta),
    }
}

/// Certified comparison of the exact zero-mode sum with its Gaussian value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroModeCheck {
    pub ln_z: f64,
    pub ln_j: f64,
    pub lambda: f64,
    pub bound: Option<f64>,
}

pub fn zero_mode_check(params: &ModelParams) -> Result<ZeroModeCheck> {
    let spec = zero_mode_quadratic_form(params)?;
    let ln_z = zero_mode_theta_exact(params, None)?;
    let ln_j = zero_mode_ln_gaussian(params)?;
    Ok(ZeroModeCheck {
        ln_z,
        ln_j,
        lambda: spec.lambda,
        bound: gaussian_bound(spec.dim(), spec.lambda, 0.0).ok(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeEnergyBreakdown {
    pub omega_b: f64,
    pub omega_q: f64,
    pub e0: f64,
    pub total: f64,
    pub mode: ZeroModeMode,
}

impl FreeEnergyBreakdown {
    /// `ã(Ω - E0)/L²`.
    pub fn scaled(&self, params: &ModelParams) -> f64 {
        let len = params.length();
        params.a_tilde * (self.omega_b + self.omega_q) / (len * len)
    }
}

pub fn free_energy(params: &ModelParams, mode: ZeroModeMode) -> Result<FreeEnergyBreakdown> {
    let omega_b = boson_free_energy(params)?;
    let omega_q = zero_mode_free_energy(params, mode)?;
    let e0 = ground_state_energy(params);
    Ok(FreeEnergyBreakdown {
        omega_b,
        omega_q,
        e0,
        total: omega_b + omega_q + e0,
        mode,
    })
}

/// QFT limit of `ã(Ω - E0)/L²`: `-π/(3ṽ_F√A β²)`.
pub fn qft_free_energy_density(params: &ModelParams) -> Result<f64> {
    let beta = finite_beta(params)?;
    let dc = params.derived();
    Ok(-PI / (3.0 * dc.v_tilde * dc.a.sqrt() * beta * beta))
}

/// IR-limit free energy density split at the cutoff: `(Ω<, Ω>)` per unit area.
///
/// `Ω<` integrates over the cutoff square in polar coordinates; the radial
/// integral is done in closed form through `F2`, leaving a θ-integral over
/// `(0, π/4)` that is evaluated by open adaptive quadrature.
pub fn free_energy_split(params: &ModelParams) -> Result<(f64, f64)> {
    let beta = finite_beta(params)?;
    let dc = params.derived();
    let cut = PI / params.a_tilde;
    let integrand = |theta: f64| -> f64 {
        let rmax = cut / theta.cos();
        let mut acc = 0.0;
        for s in Sign::BOTH {
            let k = beta * dc.v_tilde * g_angular(s, theta, dc.a);
            if k == 0.0 {
                continue;
            }
            acc += f2(k * rmax) / (k * k);
        }
        acc
    };
    let r = adaptive(integrand, 0.0, PI / 4.0, 0.0, 1e-12, 8, 20_000)?;
    let less = 8.0 * r.value / (4.0 * PI * PI * beta);
    let x = beta * params.v_f * cut;
    let tail = (-PI * PI / 6.0 - f1(x)) / (beta * params.v_f);
    let greater = 4.0 / params.a_tilde * tail / (2.0 * PI * beta);
    Ok((less, greater))
}
