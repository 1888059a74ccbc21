//! Numeric diagonalization of quadratic boson Hamiltonians
//! `h = P†AP + Z†BZ + Z†K + K†Z`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::lattice::{chi_f, Momentum2};
use crate::params::{ModelParams, Sign};

const SYM_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct QuadraticForm {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub k: DVector<f64>,
}

fn check_spd(m: &DMatrix<f64>, name: &str) -> Result<()> {
    if !m.is_square() {
        return Err(Error::input(format!("{name} is not square")));
    }
    let scale = m.amax().max(1.0);
    if (m - m.transpose()).amax() > SYM_TOL * scale {
        return Err(Error::input(format!("{name} is not symmetric")));
    }
    let eig = SymmetricEigen::new(m.clone());
    let min = eig.eigenvalues.min();
    if !(min > 0.0) {
        return Err(Error::input(format!(
            "{name} is not positive definite (smallest eigenvalue {min:e})"
        )));
    }
    Ok(())
}

impl QuadraticForm {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, k: DVector<f64>) -> Result<Self> {
        check_spd(&a, "A")?;
        check_spd(&b, "B")?;
        if a.nrows() != b.nrows() || k.len() != a.nrows() {
            return Err(Error::input("A, B and K dimensions differ"));
        }
        Ok(QuadraticForm { a, b, k })
    }

    pub fn dim(&self) -> usize {
        self.k.len()
    }
}

#[derive(Debug, Clone)]
pub struct DiagResult {
    /// Normal-mode frequencies, square roots of the eigenvalues of `C`.
    pub lambda: Vec<f64>,
    /// Orthogonal eigenvector matrix of `C` (columns are modes).
    pub u: DMatrix<f64>,
    pub shift: DVector<f64>,
    pub ground_shift: f64,
    /// Squeezing parameters, `tanh μ = (λ - λ⁰)/(λ + λ⁰)`.
    pub mu: Vec<f64>,
}

fn sym_sqrt(a: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(a.clone());
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}

fn is_diagonal(m: &DMatrix<f64>) -> bool {
    (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| i == j || m[(i, j)] == 0.0))
}

pub fn diagonalize(q: &QuadraticForm, lambda0: &[f64]) -> Result<DiagResult> {
    let n = q.dim();
    if lambda0.len() != n || lambda0.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::input("lambda0 must hold one positive entry per mode"));
    }
    let sa = sym_sqrt(&q.a);
    let c = &sa * &q.b * &sa;
    let c = (&c + c.transpose()) * 0.5;

    let (vals, vecs) = if is_diagonal(&c) {
        // exact eigenvectors; keep the mode order
        (c.diagonal(), DMatrix::identity(n, n))
    } else {
        let eig = SymmetricEigen::new(c.clone());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
        let vals = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
        let vecs = DMatrix::from_fn(n, n, |r, col| eig.eigenvectors[(r, order[col])]);
        (vals, vecs)
    };
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::LinAlg("eigensolver returned non-finite values".into()));
    }
    if vals.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::LinAlg("C has a non-positive eigenvalue".into()));
    }

    let mut u = vecs;
    for col in 0..n {
        let mut best = 0;
        for r in 0..n {
            if u[(r, col)].abs() > u[(best, col)].abs() {
                best = r;
            }
        }
        if u[(best, col)] < 0.0 {
            u.column_mut(col).neg_mut();
        }
    }

    let lambda: Vec<f64> = vals.iter().map(|v| v.sqrt()).collect();
    let chol = q
        .b
        .clone()
        .cholesky()
        .ok_or_else(|| Error::LinAlg("B is not positive definite".into()))?;
    let shift = chol.solve(&q.k);
    let ground_shift = -q.k.dot(&shift);
    let mu = lambda
        .iter()
        .zip(lambda0)
        .map(|(&l, &l0)| ((l - l0) / (l + l0)).atanh())
        .collect();
    Ok(DiagResult {
        lambda,
        u,
        shift,
        ground_shift,
        mu,
    })
}

/// Per-momentum block of the Mattis Hamiltonian, scaled by `v_F`.
#[derive(Debug, Clone)]
pub struct MattisBlock {
    pub form: QuadraticForm,
    pub lambda0: Vec<f64>,
    /// Branch label `s` of each row.
    pub branches: Vec<Sign>,
}

pub fn mattis_block(p: &Momentum2, params: &ModelParams) -> Result<MattisBlock> {
    let (g1, g2, vf) = (params.gamma1, params.gamma2, params.v_f);
    let chi = chi_f(p, params);
    let branches: Vec<Sign> = Sign::BOTH.into_iter().filter(|&s| p.comp(s) != 0.0).collect();
    if branches.is_empty() {
        return Err(Error::input("mattis_block needs p != 0"));
    }
    let n = branches.len();
    let a = DMatrix::from_diagonal_element(n, n, vf * (1.0 - g1 * chi));
    let b = DMatrix::from_fn(n, n, |i, j| {
        let (s, t) = (branches[i], branches[j]);
        let coef = if s == t { 1.0 + g1 * chi } else { g2 * chi };
        vf * coef * p.comp(s) * p.comp(t)
    });
    let k = if n == 1 {
        DVector::from_element(1, vf * g2 * chi * p.comp(branches[0]).abs())
    } else {
        DVector::zeros(2)
    };
    let lambda0 = branches.iter().map(|&s| vf * p.comp(s).abs()).collect();
    Ok(MattisBlock {
        form: QuadraticForm::new(a, b, k)?,
        lambda0,
        branches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{omega_pair, u_matrix};

    #[test]
    fn identity_form() {
        let q = QuadraticForm::new(DMatrix::identity(3, 3), DMatrix::identity(3, 3), DVector::zeros(3)).unwrap();
        let d = diagonalize(&q, &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(d.lambda, vec![1.0, 1.0, 1.0]);
        assert_eq!(d.ground_shift, 0.0);
        assert!(d.mu.iter().all(|&m| m == 0.0));
    }

    #[test]
    fn commuting_diagonals() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 0.5]));
        let b = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 8.0]));
        let q = QuadraticForm::new(a, b, DVector::from_vec(vec![1.0, 2.0])).unwrap();
        let d = diagonalize(&q, &[1.0, 1.0]).unwrap();
        assert!((d.lambda[0] - 6f64.sqrt()).abs() < 1e-14);
        assert!((d.lambda[1] - 2.0).abs() < 1e-14);
        assert!((d.ground_shift + (1.0 / 3.0 + 4.0 / 8.0)).abs() < 1e-14);
    }

    #[test]
    fn rejects_indefinite() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(QuadraticForm::new(a, DMatrix::identity(2, 2), DVector::zeros(2)).is_err());
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        assert!(QuadraticForm::new(a, DMatrix::identity(2, 2), DVector::zeros(2)).is_err());
    }

    #[test]
    fn example_block() {
        let params = ModelParams::new(0.5, 0.5).with_size(1.0, 11);
        let p = Momentum2::new(1.0, 1.0);
        let blk = mattis_block(&p, &params).unwrap();
        let d = diagonalize(&blk.form, &blk.lambda0).unwrap();
        assert!((d.lambda[0] - 1.0).abs() < 1e-14);
        assert!((d.lambda[1] - 0.5f64.sqrt()).abs() < 1e-14);
        let w = omega_pair(&p, &params);
        let u = u_matrix(&p, &params);
        for j in 0..2 {
            assert!((d.lambda[j] - w[j]).abs() < 1e-13);
            let sign = if (0..2).map(|i| d.u[(i, j)] * u[i][j]).sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
            for i in 0..2 {
                assert!((sign * d.u[(i, j)] - u[i][j]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn axis_block_shift() {
        let params = ModelParams::new(0.3, -0.4).with_size(1.0, 11);
        let p = Momentum2::new(0.0, 1.7);
        let blk = mattis_block(&p, &params).unwrap();
        assert_eq!(blk.branches, vec![Sign::Minus]);
        let d = diagonalize(&blk.form, &blk.lambda0).unwrap();
        let want = -0.4 * 0.4 / 1.3;
        assert!((d.ground_shift - want).abs() < 1e-14);
        assert!((d.shift[0] + 0.4 / (1.3 * 1.7)).abs() < 1e-14);
        assert!((d.lambda[0] - (1.0f64 - 0.09).sqrt() * 1.7).abs() < 1e-14);
    }

    #[test]
    fn outside_cutoff_is_free() {
        let params = ModelParams::new(0.3, -0.4).with_size(1.0, 11);
        let p = Momentum2::new(4.0, 0.5);
        let blk = mattis_block(&p, &params).unwrap();
        let d = diagonalize(&blk.form, &blk.lambda0).unwrap();
        assert!((d.lambda[0] - 4.0).abs() < 1e-14);
        assert!((d.lambda[1] - 0.5).abs() < 1e-14);
        assert!(d.mu.iter().all(|m| m.abs() < 1e-14));
    }
}
