//! Quadrature and extrapolation helpers.

use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Values that can be integrated: reals and complex numbers.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One Gauss–Kronrod 7/15 panel: `(kronrod value, |kronrod - gauss|)`.
/// Never evaluates the endpoints.
pub fn gk15<T: QuadValue>(f: &impl Fn(f64) -> T, a: f64, b: f64) -> (T, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k = k + s * WGK[j];
        if j % 2 == 1 {
            g = g + s * WG[j / 2];
        }
    }
    (k * h, (k - g).magnitude() * h.abs())
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: f64,
    pub evals: usize,
}

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    err: f64,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// Globally adaptive Gauss–Kronrod integration on `[a, b]`.
///
/// Starts from `init` equal panels and bisects the worst panel until the
/// summed error estimate is below `max(abs_tol, rel_tol·|I|)`.
pub fn adaptive<T: QuadValue>(
    f: impl Fn(f64) -> T,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    init: usize,
    max_panels: usize,
) -> Result<QuadResult<T>> {
    let init = init.max(1);
    let mut heap = BinaryHeap::new();
    let mut total = T::zero();
    let mut err = 0.0;
    let w = (b - a) / init as f64;
    for i in 0..init {
        let (pa, pb) = (a + w * i as f64, if i + 1 == init { b } else { a + w * (i + 1) as f64 });
        let (v, e) = gk15(&f, pa, pb);
        total = total + v;
        err += e;
        heap.push(Panel { a: pa, b: pb, value: v, err: e });
    }
    let mut evals = 15 * init;
    loop {
        let tol = abs_tol.max(rel_tol * total.magnitude());
        if err <= tol {
            return Ok(QuadResult { value: total, error: err, evals });
        }
        if heap.len() >= max_panels {
            return Err(Error::no_convergence("adaptive Gauss-Kronrod", err));
        }
        let worst = heap.pop().expect("non-empty");
        let m = 0.5 * (worst.a + worst.b);
        if !(worst.a < m && m < worst.b) {
            return Err(Error::no_convergence("adaptive Gauss-Kronrod (panel underflow)", err));
        }
        let (v1, e1) = gk15(&f, worst.a, m);
        let (v2, e2) = gk15(&f, m, worst.b);
        evals += 30;
        total = total - worst.value + v1 + v2;
        err += e1 + e2 - worst.err;
        heap.push(Panel { a: worst.a, b: m, value: v1, err: e1 });
        heap.push(Panel { a: m, b: worst.b, value: v2, err: e2 });
        if heap.len() % 64 == 0 {
            // refresh sums to limit drift
            total = heap.iter().fold(T::zero(), |acc, p| acc + p.value);
            err = heap.iter().map(|p| p.err).sum();
        }
    }
}

/// Integral over `[a, ∞)` through `x = a + t/(1-t)`.
pub fn adaptive_semi_infinite<T: QuadValue>(
    f: impl Fn(f64) -> T,
    a: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Result<QuadResult<T>> {
    adaptive(
        |t: f64| {
            let u = 1.0 - t;
            f(a + t / u) * (1.0 / (u * u))
        },
        0.0,
        1.0,
        abs_tol,
        rel_tol,
        8,
        max_panels,
    )
}

/// Tanh-sinh (double exponential) quadrature on `[a, b]`.
///
/// Nodes are generated as distances from the endpoints, so the endpoints are
/// never evaluated and endpoint singularities are tolerated. Refinement stops
/// once successive levels differ by less than `max(abs_tol, rel_tol·|I|)`.
pub fn tanh_sinh(f: impl Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<QuadResult<f64>> {
    let half = 0.5 * (b - a);
    let tmax = 4.0;
    let weight_at = |t: f64| -> Option<(f64, f64)> {
        let u = 0.5 * PI * t.sinh();
        // distance of the node from the nearer endpoint, (1 - tanh u)/2
        let delta = 1.0 / (1.0 + (2.0 * u).exp());
        let w = 0.5 * PI * t.cosh() / (u.cosh() * u.cosh());
        if delta * (b - a) <= f64::MIN_POSITIVE * 1e3 || !w.is_finite() {
            None
        } else {
            Some((delta, w))
        }
    };
    let eval_pair = |t: f64| -> f64 {
        match weight_at(t) {
            Some((delta, w)) => {
                let off = 2.0 * half * delta;
                (f(a + off) + f(b - off)) * w
            }
            None => 0.0,
        }
    };
    let mut h = 0.5;
    let mut sum = f(a + half) * 0.5 * PI;
    let mut k = 1;
    while (k as f64) * h <= tmax {
        sum += eval_pair(k as f64 * h);
        k += 1;
    }
    let mut evals = 2 * k;
    let mut prev = sum * h * half;
    for _level in 0..12 {
        h *= 0.5;
        let mut k = 1;
        while (k as f64) * h <= tmax {
            sum += eval_pair(k as f64 * h);
            k += 2;
        }
        evals += k;
        let cur = sum * h * half;
        let err = (cur - prev).abs();
        if err <= abs_tol.max(rel_tol * cur.abs()) {
            return Ok(QuadResult { value: cur, error: err, evals });
        }
        prev = cur;
    }
    Err(Error::no_convergence("tanh-sinh", prev.abs() * rel_tol))
}

/// Polynomial (Neville) extrapolation of `values[i] ≈ f(hs[i])` to `h = 0`.
pub fn richardson(hs: &[f64], values: &[f64]) -> f64 {
    assert_eq!(hs.len(), values.len());
    let n = hs.len();
    let mut p = values.to_vec();
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (hs[i + m] * p[i] - hs[i] * p[i + 1]) / (hs[i + m] - hs[i]);
        }
    }
    p[0]
}

/// Complex version of [`richardson`].
pub fn richardson_c(hs: &[f64], values: &[Complex64]) -> Complex64 {
    let re: Vec<f64> = values.iter().map(|v| v.re).collect();
    let im: Vec<f64> = values.iter().map(|v| v.im).collect();
    Complex64::new(richardson(hs, &re), richardson(hs, &im))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk_polynomial_exact() {
        let (v, _) = gk15(&|x: f64| x.powi(20), -1.0, 1.0);
        assert!((v - 2.0 / 21.0).abs() < 1e-15);
    }

    #[test]
    fn adaptive_log_singularity() {
        let r = adaptive(|x: f64| x.ln(), 0.0, 1.0, 1e-13, 1e-13, 1, 2000).unwrap();
        assert!((r.value + 1.0).abs() < 1e-12);
    }

    #[test]
    fn adaptive_complex() {
        let r = adaptive(|x: f64| Complex64::new(0.0, x).exp(), 0.0, PI, 1e-14, 1e-14, 4, 1000).unwrap();
        assert!((r.value - Complex64::new(0.0, 2.0)).norm() < 1e-13);
    }

    #[test]
    fn semi_infinite() {
        let r = adaptive_semi_infinite(|x: f64| (-x).exp(), 1.0, 1e-14, 1e-14, 1000).unwrap();
        assert!((r.value - (-1f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn tanh_sinh_endpoint_singularity() {
        let r = tanh_sinh(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, 0.0, 1e-12).unwrap();
        assert!((r.value - 2.0).abs() < 1e-10);
        let r = tanh_sinh(|x: f64| x.cos(), 0.0, 1.0, 0.0, 1e-14).unwrap();
        assert!((r.value - 1f64.sin()).abs() < 1e-14);
    }

    #[test]
    fn neville() {
        let f = |h: f64| 3.0 + 2.0 * h + 0.5 * h * h;
        let hs = [0.4, 0.2, 0.1];
        let v: Vec<f64> = hs.iter().map(|&h| f(h)).collect();
        assert!((richardson(&hs, &v) - 3.0).abs() < 1e-14);
    }
}
