//! Brute-force checks of the 1D bosonization identities on truncated chiral
//! fermion Fock spaces.
//!
//! Momenta are `k = (2π/L)(j + ½)` for `j = -M/2, …, M/2 - 1`; states are
//! occupation bitstrings with bit `i` for `j = i - M/2`. Densities are
//! applied to sparse vectors on the fly, no operator matrix is stored.

use std::collections::{HashMap, HashSet};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::params::Sign;

pub const MAX_MODES: usize = 24;

pub type SparseVec = HashMap<u32, f64>;

#[derive(Debug, Clone)]
pub struct TruncatedChiralSpace {
    pub r: Sign,
    pub length: f64,
    pub modes: usize,
    sea: u32,
}

impl TruncatedChiralSpace {
    pub fn new(r: Sign, modes: usize, length: f64) -> Result<Self> {
        if modes < 2 || modes % 2 == 1 || modes > MAX_MODES {
            return Err(Error::input(format!("window size must be even and in [2, {MAX_MODES}]")));
        }
        if !(length > 0.0) {
            return Err(Error::input("L must be positive"));
        }
        let mut sea = 0u32;
        for i in 0..modes {
            if r.f() * Self::half_index(modes, i) < 0.0 {
                sea |= 1 << i;
            }
        }
        Ok(TruncatedChiralSpace { r, length, modes, sea })
    }

    fn half_index(modes: usize, i: usize) -> f64 {
        i as f64 - (modes / 2) as f64 + 0.5
    }

    /// Momentum of mode `i`.
    pub fn k(&self, i: usize) -> f64 {
        2.0 * PI / self.length * Self::half_index(self.modes, i)
    }

    /// Largest `|k|` in the window.
    pub fn k_cut(&self) -> f64 {
        self.k(self.modes - 1)
    }

    pub fn sea(&self) -> u32 {
        self.sea
    }

    pub fn sea_vec(&self) -> SparseVec {
        HashMap::from([(self.sea, 1.0)])
    }

    /// Boson momentum index `n` with `p = 2πn/L`.
    fn momentum_index(&self, p: f64) -> Result<i64> {
        let n = p * self.length / (2.0 * PI);
        let k = n.round();
        if (n - k).abs() > 1e-9 {
            return Err(Error::input("momentum is not on the 2π/L lattice"));
        }
        Ok(k as i64)
    }

    /// `Σ_k r k :c†(k)c(k):`, diagonal in the occupation basis.
    pub fn kinetic(&self, state: u32) -> f64 {
        let mut e = 0.0;
        for i in 0..self.modes {
            let occ = (state >> i) & 1;
            let sea = (self.sea >> i) & 1;
            if occ != sea {
                let sign = if occ == 1 { 1.0 } else { -1.0 };
                e += sign * self.r.f() * self.k(i);
            }
        }
        e
    }

    /// Net charge relative to the sea.
    pub fn charge(&self, state: u32) -> i64 {
        state.count_ones() as i64 - self.sea.count_ones() as i64
    }
}

/// `c†_to c_from` on a basis state with the usual ordering sign.
fn hop(state: u32, from: usize, to: usize) -> Option<(u32, f64)> {
    if (state >> from) & 1 == 0 {
        return None;
    }
    let mut s = state;
    let below = |st: u32, i: usize| (st & ((1u32 << i) - 1)).count_ones();
    let mut sign = if below(s, from) % 2 == 0 { 1.0 } else { -1.0 };
    s &= !(1 << from);
    if (s >> to) & 1 == 1 {
        return None;
    }
    if below(s, to) % 2 == 1 {
        sign = -sign;
    }
    s |= 1 << to;
    Some((s, sign))
}

/// Density `ĵ(p) = Σ_k :c†(k - p) c(k):` restricted to the window.
#[derive(Debug, Clone)]
pub struct DensityOp<'a> {
    pub space: &'a TruncatedChiralSpace,
    /// `p = 2πn/L`.
    pub n: i64,
}

impl DensityOp<'_> {
    pub fn apply(&self, v: &SparseVec) -> SparseVec {
        let sp = self.space;
        let m = sp.modes as i64;
        let mut out = SparseVec::new();
        for (&state, &amp) in v {
            if amp == 0.0 {
                continue;
            }
            if self.n == 0 {
                let c = sp.charge(state) as f64;
                if c != 0.0 {
                    *out.entry(state).or_default() += c * amp;
                }
                continue;
            }
            for from in 0..m {
                let to = from - self.n;
                if to < 0 || to >= m {
                    continue;
                }
                if let Some((s, sign)) = hop(state, from as usize, to as usize) {
                    *out.entry(s).or_default() += sign * amp;
                }
            }
        }
        out.retain(|_, a| *a != 0.0);
        out
    }
}

pub fn build_density(space: &TruncatedChiralSpace, p: f64) -> Result<DensityOp<'_>> {
    let n = space.momentum_index(p)?;
    if p.abs() > 0.5 * space.k_cut() + 1e-12 {
        return Err(Error::input("|p| must not exceed K_cut/2"));
    }
    Ok(DensityOp { space, n })
}

fn axpy(acc: &mut SparseVec, a: f64, v: &SparseVec) {
    for (&s, &x) in v {
        *acc.entry(s).or_default() += a * x;
    }
}

/// Basis states whose excitations relative to the sea lie in
/// `|k| <= K_cut/2` with kinetic energy at most `e_low`.
#[derive(Debug, Clone)]
pub struct LowSector {
    pub e_low: f64,
    pub states: Vec<u32>,
    index: HashSet<u32>,
}

impl LowSector {
    pub fn new(space: &TruncatedChiralSpace, e_low: f64) -> Result<Self> {
        if !(e_low >= 0.0 && e_low <= 0.5 * space.k_cut() + 1e-12) {
            return Err(Error::input("E_low must lie in [0, K_cut/2]"));
        }
        let inner: Vec<usize> = (0..space.modes).filter(|&i| space.k(i).abs() <= 0.5 * space.k_cut() + 1e-12).collect();
        let mut states = Vec::new();
        for mask in 0u32..(1u32 << inner.len()) {
            let mut s = space.sea;
            for (b, &i) in inner.iter().enumerate() {
                if (mask >> b) & 1 == 1 {
                    s ^= 1 << i;
                }
            }
            if space.kinetic(s) <= e_low + 1e-12 {
                states.push(s);
            }
        }
        states.sort_unstable();
        let index = states.iter().copied().collect();
        Ok(LowSector { e_low, states, index })
    }

    pub fn contains(&self, s: u32) -> bool {
        self.index.contains(&s)
    }

    /// Largest `|v_a|` over sector states `a`.
    fn max_on(&self, v: &SparseVec) -> f64 {
        v.iter().filter(|(s, _)| self.contains(**s)).map(|(_, a)| a.abs()).fold(0.0, f64::max)
    }
}

fn check_reach(space: &TruncatedChiralSpace, low: &LowSector, shift: f64) -> Result<()> {
    // every excitation moves by at most `shift` and must stay inside the window
    if low.e_low + shift > space.k_cut() + 1e-12 {
        return Err(Error::input("window too small for the requested momenta"));
    }
    Ok(())
}

/// Deviation of `[ĵ(p), ĵ(p')] = r(Lp/2π)δ_{p+p',0}` on `low`, without the
/// window-size precondition.
pub fn commutator_deviation(space: &TruncatedChiralSpace, low: &LowSector, p: f64, p_prime: f64) -> Result<f64> {
    let a = DensityOp { space, n: space.momentum_index(p)? };
    let b = DensityOp { space, n: space.momentum_index(p_prime)? };
    let central = if a.n + b.n == 0 { space.r.f() * a.n as f64 } else { 0.0 };
    let mut dev: f64 = 0.0;
    for &s in &low.states {
        let v = HashMap::from([(s, 1.0)]);
        let mut c = a.apply(&b.apply(&v));
        axpy(&mut c, -1.0, &b.apply(&a.apply(&v)));
        *c.entry(s).or_default() -= central;
        dev = dev.max(low.max_on(&c));
    }
    Ok(dev)
}

pub fn check_density_commutator(space: &TruncatedChiralSpace, low: &LowSector, p: f64, p_prime: f64) -> Result<f64> {
    for q in [p, p_prime, p + p_prime] {
        if q.abs() > 0.5 * space.k_cut() + 1e-12 {
            return Err(Error::input("momenta must not exceed K_cut/2"));
        }
    }
    check_reach(space, low, p.abs() + p_prime.abs())?;
    commutator_deviation(space, low, p, p_prime)
}

/// Largest deviation between `Σ r k :c†c:` and `(π/L)[ĵ(0)² + 2Σ_{rp>0} ĵ(-p)ĵ(p)]`
/// on `low`, relative to `max(1, ‖H‖)` on the sector.
pub fn check_kronig(space: &TruncatedChiralSpace, low: &LowSector) -> Result<f64> {
    check_reach(space, low, 0.0)?;
    let nmax = (space.k_cut() * space.length / (2.0 * PI)).floor() as i64;
    let rs = space.r.i() as i64;
    let zero = DensityOp { space, n: 0 };
    let mut dev: f64 = 0.0;
    let mut scale: f64 = 1.0;
    for &s in &low.states {
        let v = HashMap::from([(s, 1.0)]);
        let mut rhs = zero.apply(&zero.apply(&v));
        for n in 1..=nmax {
            let up = DensityOp { space, n: rs * n };
            let down = DensityOp { space, n: -rs * n };
            axpy(&mut rhs, 2.0, &down.apply(&up.apply(&v)));
        }
        let pre = PI / space.length;
        let mut diff: SparseVec = rhs.into_iter().map(|(k, a)| (k, pre * a)).collect();
        let e = space.kinetic(s);
        scale = scale.max(e.abs());
        *diff.entry(s).or_default() -= e;
        dev = dev.max(low.max_on(&diff));
    }
    Ok(dev / scale)
}

/// Rescaled densities: `b(p) = -i√(2π/(L|p|)) ĵ(p)` for `rp > 0`.
///
/// The phase drops out of every commutator checked here, so only the real
/// scale factor is applied.
fn boson_scale(n: i64) -> f64 {
    (1.0 / n.unsigned_abs() as f64).sqrt()
}

/// Deviation of `[b(p), b†(p')] = δ_{p,p'}`, `[b(p), b(p')] = 0` and `b(p)Ω = 0`.
pub fn check_boson_ccr(space: &TruncatedChiralSpace, low: &LowSector, p: f64, p_prime: f64) -> Result<f64> {
    let (n1, n2) = (space.momentum_index(p)?, space.momentum_index(p_prime)?);
    let rs = space.r.i() as i64;
    if n1 * rs <= 0 || n2 * rs <= 0 {
        return Err(Error::input("boson momenta need r·p > 0"));
    }
    for q in [p, p_prime] {
        if q.abs() > 0.5 * space.k_cut() + 1e-12 {
            return Err(Error::input("momenta must not exceed K_cut/2"));
        }
    }
    check_reach(space, low, p.abs() + p_prime.abs())?;
    let (c1, c2) = (boson_scale(n1), boson_scale(n2));
    let b1 = DensityOp { space, n: n1 };
    let b2 = DensityOp { space, n: n2 };
    let b2d = DensityOp { space, n: -n2 };
    let mut dev: f64 = 0.0;
    for &s in &low.states {
        let v = HashMap::from([(s, 1.0)]);
        let mut c = b1.apply(&b2d.apply(&v));
        axpy(&mut c, -1.0, &b2d.apply(&b1.apply(&v)));
        let mut c: SparseVec = c.into_iter().map(|(k, a)| (k, a * c1 * c2)).collect();
        if n1 == n2 {
            *c.entry(s).or_default() -= 1.0;
        }
        dev = dev.max(low.max_on(&c));
        let mut d = b1.apply(&b2.apply(&v));
        axpy(&mut d, -1.0, &b2.apply(&b1.apply(&v)));
        dev = dev.max(c1 * c2 * low.max_on(&d));
    }
    let sea = b1.apply(&space.sea_vec());
    dev = dev.max(c1 * sea.values().map(|a| a.abs()).fold(0.0, f64::max));
    Ok(dev)
}

#[cfg(test)]
mod tests {
    use super::*;

    const L: f64 = 2.0 * PI;

    #[test]
    fn hop_signs() {
        // c†_0 c_2 on |1,1,1⟩ (bits 0..2): c_2 passes two occupied modes, c†_0 none
        assert_eq!(hop(0b110, 2, 0), Some((0b011, -1.0)));
        assert_eq!(hop(0b111, 2, 0), None);
        assert_eq!(hop(0b100, 2, 0), Some((0b001, 1.0)));
    }

    #[test]
    fn density_basics() {
        let sp = TruncatedChiralSpace::new(Sign::Plus, 12, L).unwrap();
        let j0 = build_density(&sp, 0.0).unwrap();
        assert!(j0.apply(&sp.sea_vec()).is_empty());
        for n in 1..=2 {
            let j = build_density(&sp, n as f64).unwrap();
            assert!(j.apply(&sp.sea_vec()).is_empty());
            assert!(!build_density(&sp, -(n as f64)).unwrap().apply(&sp.sea_vec()).is_empty());
        }
        assert!(build_density(&sp, 0.5).is_err());
    }

    #[test]
    fn adjoint() {
        let sp = TruncatedChiralSpace::new(Sign::Minus, 10, L).unwrap();
        let low = LowSector::new(&sp, 2.0).unwrap();
        let jp = build_density(&sp, 2.0).unwrap();
        let jm = build_density(&sp, -2.0).unwrap();
        for &a in &low.states {
            let va = jp.apply(&HashMap::from([(a, 1.0)]));
            for &b in &low.states {
                let vb = jm.apply(&HashMap::from([(b, 1.0)]));
                // ⟨b|ĵ(p)|a⟩ = ⟨a|ĵ(-p)|b⟩
                let x = va.get(&b).copied().unwrap_or(0.0);
                let y = vb.get(&a).copied().unwrap_or(0.0);
                assert_eq!(x, y);
            }
        }
    }

    #[test]
    fn one_boson_energy() {
        for r in Sign::BOTH {
            let sp = TruncatedChiralSpace::new(r, 12, L).unwrap();
            let v = build_density(&sp, -r.f()).unwrap().apply(&sp.sea_vec());
            for (&s, _) in &v {
                assert!((sp.kinetic(s) - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn sea_anomaly() {
        let sp = TruncatedChiralSpace::new(Sign::Plus, 12, L).unwrap();
        let low = LowSector::new(&sp, 1.0).unwrap();
        assert!(check_density_commutator(&sp, &low, 1.0, -1.0).unwrap() < 1e-13);
        assert!(check_density_commutator(&sp, &low, 2.0, -1.0).unwrap() < 1e-13);
        assert!(check_density_commutator(&sp, &low, 5.0, -5.0).is_err());
    }

    #[test]
    fn kronig_and_ccr() {
        for r in Sign::BOTH {
            let sp = TruncatedChiralSpace::new(r, 16, L).unwrap();
            let low = LowSector::new(&sp, 3.0).unwrap();
            assert!(low.states.len() > 5);
            assert!(check_kronig(&sp, &low).unwrap() < 1e-12);
            let p = r.f();
            assert!(check_boson_ccr(&sp, &low, p, p).unwrap() < 1e-13);
            assert!(check_boson_ccr(&sp, &low, 2.0 * p, p).unwrap() < 1e-13);
            assert!(check_boson_ccr(&sp, &low, -p, p).is_err());
        }
    }

    #[test]
    fn leakage_grows_toward_the_edge() {
        let sp = TruncatedChiralSpace::new(Sign::Plus, 12, L).unwrap();
        let low = LowSector::new(&sp, 0.5 * sp.k_cut()).unwrap();
        let devs: Vec<f64> = (1..=5)
            .map(|n| commutator_deviation(&sp, &low, n as f64, -(n as f64)).unwrap())
            .collect();
        assert!(devs.windows(2).all(|w| w[1] >= w[0]), "{devs:?}");
        assert!(devs[4] > 0.5);
    }
}
