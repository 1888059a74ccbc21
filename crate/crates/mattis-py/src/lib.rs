//! Python bindings. Positions are in units of ã unless a cutoff is passed.

use std::collections::BTreeMap;

use mattis::correlators::{density_two_point as density_2pt, fermion_npoint, CorrelatorQuery, DensityPoint, Insertion, SumMode};
use mattis::qft::{c_constant_with, CScheme, QftTwoPoint};
use mattis::thermo::{self, ZeroModeMode};
use mattis::{model, Beta, FlavorIndex, ModelParams, Momentum2, Sign};
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: mattis::Error) -> PyErr {
    match e {
        mattis::Error::NoConvergence { .. } | mattis::Error::LinAlg(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse<T: std::str::FromStr<Err = String>>(s: &str) -> PyResult<T> {
    s.parse().map_err(PyValueError::new_err)
}

fn sign(v: i32) -> PyResult<Sign> {
    Sign::from_i32(v).ok_or_else(|| PyValueError::new_err(format!("sign must be +1 or -1, got {v}")))
}

fn params(gamma1: f64, gamma2: f64, vf: f64, a_tilde: f64, l_over_a: usize, beta: Option<f64>) -> PyResult<ModelParams> {
    let p = ModelParams {
        gamma1,
        gamma2,
        v_f: vf,
        a_tilde,
        l_over_a,
        beta: beta.map_or(Beta::Infinite, Beta::Finite),
    };
    p.validate().map_err(|e| py_err(e.into()))?;
    Ok(p)
}

/// A, ṽ_F, B and K for the given couplings.
#[pyfunction]
#[pyo3(signature = (gamma1, gamma2, vf = 1.0))]
fn derived_constants(gamma1: f64, gamma2: f64, vf: f64) -> PyResult<BTreeMap<&'static str, f64>> {
    mattis::params::validate_couplings(gamma1, gamma2).map_err(|e| py_err(e.into()))?;
    let d = mattis::params::derived(gamma1, gamma2, vf);
    Ok(BTreeMap::from([("a", d.a), ("v_tilde", d.v_tilde), ("b", d.b_exp), ("k", d.k_exp)]))
}

/// (ω₊, ω₋) at momentum (p₊, p₋).
#[pyfunction]
#[pyo3(signature = (gamma1, gamma2, p_plus, p_minus, vf = 1.0))]
fn dispersion(gamma1: f64, gamma2: f64, p_plus: f64, p_minus: f64, vf: f64) -> PyResult<(f64, f64)> {
    let p = params(gamma1, gamma2, vf, 1.0, 1, None)?;
    let [a, b] = model::omega_pair(&Momentum2::new(p_plus, p_minus), &p);
    Ok((a, b))
}

/// Free energy of the finite system, plus its QFT-limit target.
#[pyfunction]
#[pyo3(signature = (gamma1, gamma2, beta, l_over_a, a_tilde = 1.0, vf = 1.0, zero_mode = "theta"))]
fn free_energy(
    gamma1: f64,
    gamma2: f64,
    beta: f64,
    l_over_a: usize,
    a_tilde: f64,
    vf: f64,
    zero_mode: &str,
) -> PyResult<BTreeMap<&'static str, f64>> {
    let p = params(gamma1, gamma2, vf, a_tilde, l_over_a, Some(beta))?;
    let zm: ZeroModeMode = parse(zero_mode)?;
    let fe = thermo::free_energy(&p, zm).map_err(py_err)?;
    let target = thermo::qft_free_energy_density(&p).map_err(py_err)?;
    Ok(BTreeMap::from([
        ("omega_b", fe.omega_b),
        ("omega_q", fe.omega_q),
        ("e0", fe.e0),
        ("total", fe.total),
        ("scaled", fe.scaled(&p)),
        ("qft_target", target),
    ]))
}

/// The constant C(γ1, γ2) and its error estimate.
#[pyfunction]
#[pyo3(signature = (gamma1, gamma2, tol = 1e-10, scheme = "gauss-kronrod"))]
fn c_constant(gamma1: f64, gamma2: f64, tol: f64, scheme: &str) -> PyResult<(f64, f64)> {
    let scheme = match scheme {
        "gauss-kronrod" | "gk" => CScheme::GaussKronrod,
        "tanh-sinh" | "ts" => CScheme::TanhSinh,
        s => return Err(PyValueError::new_err(format!("unknown scheme {s:?}"))),
    };
    let c = c_constant_with(gamma1, gamma2, scheme, tol).map_err(py_err)?;
    Ok((c.value, c.error))
}

/// ⟨ψ_{r,s}(x e_s + chain·ã e_{-s}, t) ψ†_{r,s}(0, 0)⟩ on the lattice.
#[pyfunction]
#[pyo3(signature = (gamma1, gamma2, r, s, x, l_over_a, epsilon, t = Complex64::new(0.0, 0.0), chain = 0, beta = None, a_tilde = 1.0, vf = 1.0, sum = "finite"))]
#[allow(clippy::too_many_arguments)]
fn fermion_two_point(
    gamma1: f64,
    gamma2: f64,
    r: i32,
    s: i32,
    x: f64,
    l_over_a: usize,
    epsilon: f64,
    t: Complex64,
    chain: i64,
    beta: Option<f64>,
    a_tilde: f64,
    vf: f64,
    sum: &str,
) -> PyResult<Complex64> {
    let p = params(gamma1, gamma2, vf, a_tilde, l_over_a, beta)?;
    let (r, s) = (sign(r)?, sign(s)?);
    let mut pos = [0.0; 2];
    pos[s.idx()] = x;
    pos[s.flip().idx()] = chain as f64 * a_tilde;
    let q = CorrelatorQuery {
        insertions: vec![
            Insertion::new(Sign::Plus, r, s, pos, t),
            Insertion::new(Sign::Minus, r, s, [0.0; 2], Complex64::new(0.0, 0.0)),
        ],
        epsilon,
        mode: parse::<SumMode>(sum)?,
    };
    fermion_npoint(&q, &p).map_err(py_err)
}

/// ⟨J_{r1,s}(x e_s, t) J_{r2,s}(0, 0)⟩ without the zero-mode part.
#[pyfunction]
#[pyo3(signature = (gamma1, gamma2, r1, r2, s, x, l_over_a, epsilon, t = Complex64::new(0.0, 0.0), beta = None, a_tilde = 1.0, vf = 1.0, sum = "finite"))]
#[allow(clippy::too_many_arguments)]
fn density_two_point(
    gamma1: f64,
    gamma2: f64,
    r1: i32,
    r2: i32,
    s: i32,
    x: f64,
    l_over_a: usize,
    epsilon: f64,
    t: Complex64,
    beta: Option<f64>,
    a_tilde: f64,
    vf: f64,
    sum: &str,
) -> PyResult<Complex64> {
    let p = params(gamma1, gamma2, vf, a_tilde, l_over_a, beta)?;
    let s = sign(s)?;
    let mut pos = [0.0; 2];
    pos[s.idx()] = x;
    let a = DensityPoint {
        flavor: FlavorIndex::new(sign(r1)?, s),
        x: pos,
        t,
    };
    let b = DensityPoint {
        flavor: FlavorIndex::new(sign(r2)?, s),
        x: [0.0; 2],
        t: Complex64::new(0.0, 0.0),
    };
    density_2pt(&p, a, b, epsilon, parse::<SumMode>(sum)?).map_err(py_err)
}

/// Renormalized QFT-limit two-point function at zero temperature, with its
/// flavour and chain delta factors stripped.
#[pyfunction]
#[pyo3(signature = (gamma1, gamma2, r, x, t = Complex64::new(0.0, 0.0), l0 = 1.0, epsilon = 1e-6, vf = 1.0))]
#[allow(clippy::too_many_arguments)]
fn qft_two_point(gamma1: f64, gamma2: f64, r: i32, x: f64, t: Complex64, l0: f64, epsilon: f64, vf: f64) -> PyResult<Complex64> {
    let p = params(gamma1, gamma2, vf, 1.0, 1, None)?;
    let two = QftTwoPoint::new(&p).map_err(py_err)?;
    two.eval(sign(r)?, x, t, l0, epsilon).map(|c| c.value).map_err(py_err)
}

/// Runs one acceptance criterion; returns (passed, detail lines).
#[pyfunction]
fn run_criterion(id: usize) -> (bool, Vec<String>) {
    let rep = mattis::verify::run_criterion(id);
    (rep.passed, rep.details)
}

#[pymodule]
fn mattis_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(derived_constants, m)?)?;
    m.add_function(wrap_pyfunction!(dispersion, m)?)?;
    m.add_function(wrap_pyfunction!(free_energy, m)?)?;
    m.add_function(wrap_pyfunction!(c_constant, m)?)?;
    m.add_function(wrap_pyfunction!(fermion_two_point, m)?)?;
    m.add_function(wrap_pyfunction!(density_two_point, m)?)?;
    m.add_function(wrap_pyfunction!(qft_two_point, m)?)?;
    m.add_function(wrap_pyfunction!(run_criterion, m)?)?;
    Ok(())
}
