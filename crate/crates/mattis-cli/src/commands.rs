use std::f64::consts::FRAC_PI_2;

use mattis::correlators::{density_two_point, epsilon_extrapolate, fermion_npoint, CorrelatorQuery, DensityPoint, Insertion, SumMode};
use mattis::model::{omega, omega_tilde};
use mattis::qft::{c_constant_with, density2pt_ir_g2zero, fermion2pt_ir_g2zero, CScheme, ChainDelta, ClosedForm, QftTwoPoint};
use mattis::thermo::{self, free_energy_split, qft_free_energy_density, ZeroModeMode};
use mattis::verify;
use mattis::{Beta, FlavorIndex, ModelParams, Momentum2, Sign};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::config::Settings;
use crate::table::{Cell, Table};
use crate::CliError;

type Result<T> = std::result::Result<T, CliError>;

fn params(s: &mut Settings) -> Result<ModelParams> {
    let p = ModelParams {
        gamma1: s.get("gamma1", 0.0)?,
        gamma2: s.get("gamma2", 0.0)?,
        v_f: s.get("vf", 1.0)?,
        a_tilde: s.get("a-tilde", 1.0)?,
        l_over_a: s.get("l-over-a", 11)?,
        beta: s.get("beta", Beta::Infinite)?,
    };
    p.validate()?;
    Ok(p)
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Input(format!("--{name} must be positive (got {v})")))
    }
}

pub fn dispersion(s: &mut Settings) -> Result<Table> {
    let p = params(s)?;
    let pmag = positive("pmag", s.get("pmag", 1.0)?)?;
    let n: usize = s.get("ntheta", 90)?;
    if n == 0 {
        return Err(CliError::Input("--ntheta must be at least 1".into()));
    }
    let mut t = Table::new(
        &[
            "theta",
            "omega_plus_over_vF_p",
            "omega_minus_over_vF_p",
            "omega_tilde_plus_over_vF_p",
            "omega_tilde_minus_over_vF_p",
        ],
        "theta in radians; frequencies divided by v_F |p|",
    );
    let scale = p.v_f * pmag;
    for i in 0..=n {
        let theta = FRAC_PI_2 * i as f64 / n as f64;
        let q = Momentum2::polar(pmag, theta);
        let [wp, wm] = [omega(Sign::Plus, &q, &p), omega(Sign::Minus, &q, &p)];
        let [tp, tm] = [
            omega_tilde(Sign::Plus, &q, &p),
            omega_tilde(Sign::Minus, &q, &p),
        ];
        t.push(vec![theta.into(), (wp / scale).into(), (wm / scale).into(), (tp / scale).into(), (tm / scale).into()]);
    }
    Ok(t)
}

pub fn free_energy(s: &mut Settings) -> Result<Table> {
    let p = params(s)?;
    let mode: String = s.get("mode", "lattice-sum".to_string())?;
    let units = "energies in units of v_F/ã; scaled = ã(Ω - E0)/L²";
    match mode.as_str() {
        "lattice-sum" => {
            let zm: ZeroModeMode = s.get("zero-mode", ZeroModeMode::ThetaExact)?;
            let fe = thermo::free_energy(&p, zm)?;
            let scaled = fe.scaled(&p);
            let target = qft_free_energy_density(&p)?;
            let mut t = Table::new(
                &["omega_b", "omega_q", "e0", "total", "scaled", "qft_target", "rel_error"],
                units,
            );
            t.push(vec![
                fe.omega_b.into(),
                fe.omega_q.into(),
                fe.e0.into(),
                fe.total.into(),
                scaled.into(),
                target.into(),
                ((scaled - target) / target).abs().into(),
            ]);
            Ok(t)
        }
        "split-integral" => {
            let (lo, hi) = free_energy_split(&p)?;
            let scaled = (lo + hi) * p.a_tilde;
            let target = qft_free_energy_density(&p)?;
            let mut t = Table::new(&["omega_less", "omega_greater", "scaled", "qft_target", "rel_error"], units);
            t.push(vec![lo.into(), hi.into(), scaled.into(), target.into(), ((scaled - target) / target).abs().into()]);
            Ok(t)
        }
        "qft" => {
            let mut t = Table::new(&["qft_target"], units);
            t.push(vec![qft_free_energy_density(&p)?.into()]);
            Ok(t)
        }
        m => Err(CliError::Input(format!("unknown --mode {m:?} (lattice-sum, split-integral or qft)"))),
    }
}

fn chain_name(c: Option<ChainDelta>) -> &'static str {
    match c {
        None => "none",
        Some(ChainDelta::Kronecker) => "kronecker",
        Some(ChainDelta::Dirac) => "dirac",
    }
}

fn parse_sign(field: &str) -> Result<Sign> {
    field.parse::<Sign>().map_err(CliError::Input)
}

fn parse_num(field: &str) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|e| CliError::Input(format!("--ops: {field:?}: {e}")))
}

/// Parses `q,r,s,x+,x-[,t[,tau]]` entries separated by `;`.
fn parse_ops(spec: &str) -> Result<Vec<Insertion>> {
    let mut out = Vec::new();
    for item in spec.split(';').map(str::trim).filter(|i| !i.is_empty()) {
        let f: Vec<&str> = item.split(',').map(str::trim).collect();
        if !(5..=7).contains(&f.len()) {
            return Err(CliError::Input(format!("--ops entry {item:?}: expected q,r,s,x+,x-[,t[,tau]]")));
        }
        let t = f.get(5).map(|v| parse_num(v)).transpose()?.unwrap_or(0.0);
        let tau = f.get(6).map(|v| parse_num(v)).transpose()?.unwrap_or(0.0);
        out.push(Insertion::new(
            parse_sign(f[0])?,
            parse_sign(f[1])?,
            parse_sign(f[2])?,
            [parse_num(f[3])?, parse_num(f[4])?],
            Complex64::new(t, -tau),
        ));
    }
    if out.is_empty() {
        return Err(CliError::Input("--ops is empty".into()));
    }
    Ok(out)
}

struct Geometry {
    f1: FlavorIndex,
    f2: FlavorIndex,
    chain: i64,
    t: Complex64,
}

impl Geometry {
    /// Position of the first insertion; the second sits at the origin.
    fn point(&self, x: f64, p: &ModelParams) -> [f64; 2] {
        let mut pos = [0.0; 2];
        pos[self.f1.s.idx()] = x;
        pos[self.f1.s.flip().idx()] = self.chain as f64 * p.a_tilde;
        pos
    }

    fn closed_eligible(&self, p: &ModelParams) -> bool {
        p.gamma2 == 0.0 && p.beta.is_infinite() && self.f1.s == self.f2.s && self.chain == 0
    }
}

pub fn correlator(s: &mut Settings) -> Result<Table> {
    let p = params(s)?;
    let kind: String = s.get("kind", "fermion2".to_string())?;
    let eps = positive("epsilon", s.get("epsilon", 0.01)?)?;
    if kind == "fermionN" {
        let mode: SumMode = s.get::<String>("sum", "finite".into())?.parse().map_err(CliError::Input)?;
        let spec: String = s
            .get_opt("ops")?
            .ok_or_else(|| CliError::Input("fermionN needs --ops".into()))?;
        let ins = parse_ops(&spec)?;
        let v = fermion_npoint(
            &CorrelatorQuery {
                insertions: ins.clone(),
                epsilon: eps,
                mode,
            },
            &p,
        )?;
        let mut t = Table::new(&["n", "re", "im"], "positions in units of ã; ⟨ψ…ψ⟩ without zero-mode factors");
        t.push(vec![ins.len().into(), v.re.into(), v.im.into()]);
        return Ok(t);
    }
    let r1: Sign = s.get("r1", Sign::Plus)?;
    let s1: Sign = s.get("s1", Sign::Plus)?;
    let r2: Sign = s.get("r2", r1)?;
    let s2: Sign = s.get("s2", s1)?;
    let xs: Vec<f64> = s.get_list("xs", &[0.5, 1.0, 2.0])?;
    let chain: i64 = s.get("chain", 0)?;
    let time: f64 = s.get("time", 0.0)?;
    let tau: f64 = s.get("tau", 0.0)?;
    let eps_seq: Vec<f64> = s.get_list("eps-seq", &[])?;
    let g = Geometry {
        f1: FlavorIndex::new(r1, s1),
        f2: FlavorIndex::new(r2, s2),
        chain,
        t: Complex64::new(time, -tau),
    };

    type Eval<'a> = Box<dyn Fn(f64, f64) -> mattis::Result<Complex64> + Sync + 'a>;
    let (eval, closed, delta): (Eval, Option<Eval>, (bool, Option<ChainDelta>)) = match kind.as_str() {
        "density" | "fermion2" => {
            let mode: SumMode = s.get::<String>("sum", "finite".into())?.parse().map_err(CliError::Input)?;
            let (g, p) = (&g, &p);
            if kind == "density" {
                let eval: Eval = Box::new(move |x, e| {
                    let a = DensityPoint { flavor: g.f1, x: g.point(x, p), t: g.t };
                    let b = DensityPoint { flavor: g.f2, x: [0.0; 2], t: Complex64::new(0.0, 0.0) };
                    density_two_point(p, a, b, e, mode)
                });
                let closed: Option<Eval> = g.closed_eligible(p).then(|| -> Eval {
                    Box::new(move |x, e| density2pt_ir_g2zero(p, r1, r2, x, g.t, e).map(|c| c.value))
                });
                (eval, closed, (false, None))
            } else {
                let eval: Eval = Box::new(move |x, e| {
                    let q = CorrelatorQuery {
                        insertions: vec![
                            Insertion::new(Sign::Plus, r1, s1, g.point(x, p), g.t),
                            Insertion::new(Sign::Minus, r2, s2, [0.0; 2], Complex64::new(0.0, 0.0)),
                        ],
                        epsilon: e,
                        mode,
                    };
                    fermion_npoint(&q, p)
                });
                let closed: Option<Eval> = (g.closed_eligible(p) && r1 == r2).then(|| -> Eval {
                    Box::new(move |x, e| fermion2pt_ir_g2zero(p, r1, x, g.t, e).map(|c| c.value))
                });
                (eval, closed, (false, None))
            }
        }
        "qft2" => {
            if !p.beta.is_infinite() {
                return Err(CliError::Input("qft2 holds at zero temperature only".into()));
            }
            let l0 = positive("l0", s.get("l0", 1.0)?)?;
            let two = QftTwoPoint::new(&p)?;
            let t = g.t;
            let probe: ClosedForm = two.eval(r1, 1.0, t, l0, eps)?;
            let eval: Eval = Box::new(move |x, e| two.eval(r1, x, t, l0, e).map(|c| c.value));
            (eval, None, (probe.delta.flavor_diagonal, Some(probe.delta.chain)))
        }
        k => {
            return Err(CliError::Input(format!("unknown --kind {k:?} (density, fermion2, fermionN or qft2)")));
        }
    };

    let rows: Vec<Vec<Cell>> = xs
        .par_iter()
        .map(|&x| -> Result<Vec<Cell>> {
            let v = eval(x, eps)?;
            let ex = if eps_seq.is_empty() {
                Complex64::new(f64::NAN, f64::NAN)
            } else {
                epsilon_extrapolate(&eps_seq, |e| eval(x, e))?
            };
            let cf = match &closed {
                Some(c) => c(x, eps)?,
                None => Complex64::new(f64::NAN, f64::NAN),
            };
            Ok(vec![
                x.into(),
                v.re.into(),
                v.im.into(),
                ex.re.into(),
                ex.im.into(),
                cf.re.into(),
                cf.im.into(),
                delta.0.into(),
                chain_name(delta.1).into(),
            ])
        })
        .collect::<Result<_>>()?;
    let mut t = Table::new(
        &["x", "re", "im", "extrap_re", "extrap_im", "closed_re", "closed_im", "flavor_delta", "chain_delta"],
        "x in units of ã; extrap_* is the ε→0 extrapolation over eps-seq; closed_* is the IR closed form at γ2=0, β=∞; \
         the delta columns name distributional factors the value carries",
    );
    for r in rows {
        t.push(r);
    }
    Ok(t)
}

pub fn cconst(s: &mut Settings) -> Result<Table> {
    let tol = positive("tol", s.get("tol", 1e-10)?)?;
    let sweep: bool = s.get("sweep", false)?;
    let pairs: Vec<(f64, f64)> = if sweep {
        let lo: f64 = s.get("gamma-min", -0.45)?;
        let hi: f64 = s.get("gamma-max", 0.95)?;
        let n: usize = s.get("ngamma", 29)?;
        if n < 2 || !(lo < hi) {
            return Err(CliError::Input("sweep needs gamma-min < gamma-max and ngamma >= 2".into()));
        }
        (0..n)
            .map(|i| {
                let g = lo + (hi - lo) * i as f64 / (n - 1) as f64;
                (g, g)
            })
            .collect()
    } else {
        vec![(s.get("gamma1", 0.5)?, s.get("gamma2", 0.5)?)]
    };
    let rows: Vec<Vec<Cell>> = pairs
        .par_iter()
        .map(|&(g1, g2)| -> Result<Vec<Cell>> {
            let gk = c_constant_with(g1, g2, CScheme::GaussKronrod, tol)?;
            let ts = c_constant_with(g1, g2, CScheme::TanhSinh, tol)?;
            Ok(vec![
                g1.into(),
                g2.into(),
                gk.value.into(),
                gk.error.into(),
                ts.value.into(),
                (gk.value - ts.value).abs().into(),
            ])
        })
        .collect::<Result<_>>()?;
    let mut t = Table::new(
        &["gamma1", "gamma2", "c", "c_error", "c_tanh_sinh", "scheme_diff"],
        "dimensionless",
    );
    for r in rows {
        t.push(r);
    }
    Ok(t)
}

pub fn verify(s: &mut Settings) -> Result<(Table, Vec<usize>)> {
    let all: Vec<usize> = (1..=verify::CRITERIA).collect();
    let ids: Vec<usize> = s.get_list("criteria", &all)?;
    if let Some(bad) = ids.iter().find(|&&i| i == 0 || i > verify::CRITERIA) {
        return Err(CliError::Input(format!("no criterion {bad} (1..={})", verify::CRITERIA)));
    }
    let mut t = Table::new(&["id", "title", "passed", "details"], "details are separated by ' | '");
    let mut failed = Vec::new();
    for &id in &ids {
        let rep = verify::run_criterion(id);
        eprintln!("{}", rep.render());
        if !rep.passed {
            failed.push(id);
        }
        t.push(vec![id.into(), rep.title.into(), rep.passed.into(), rep.details.join(" | ").into()]);
    }
    Ok((t, failed))
}
