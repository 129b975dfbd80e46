//! Birkhoff–von Neumann decomposition by greedy extraction of permutations
//! supported on the positive entries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::numeric::{Real, TAU_ABS};

/// `S = Σ weights[m] · P_{permutations[m]}` with `P_σ[i][σ(i)] = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BirkhoffCertificate {
    pub weights: Vec<Real>,
    pub permutations: Vec<Vec<usize>>,
}

impl BirkhoffCertificate {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total_weight(&self) -> Real {
        self.weights.iter().cloned().sum()
    }

    pub fn reconstruct(&self, n: usize) -> Matrix<Real> {
        let mut m = Matrix::filled(n, Real::zero());
        for (w, sigma) in self.weights.iter().zip(&self.permutations) {
            for (i, &j) in sigma.iter().enumerate() {
                m[(i, j)] = &m[(i, j)] + w;
            }
        }
        m
    }

    /// `Σ λ_σ · (a_{σ(1)}, …, a_{σ(N)})`.
    pub fn apply(&self, a: &[Real]) -> Vec<Real> {
        let mut out = vec![Real::zero(); a.len()];
        for (w, sigma) in self.weights.iter().zip(&self.permutations) {
            for (i, &j) in sigma.iter().enumerate() {
                out[i] = &out[i] + &(w * &a[j]);
            }
        }
        out
    }
}

/// Perfect matching of rows to columns using only `allowed` entries (Kuhn's algorithm).
pub fn perfect_matching(n: usize, allowed: impl Fn(usize, usize) -> bool) -> Option<Vec<usize>> {
    fn augment(
        row: usize,
        n: usize,
        allowed: &dyn Fn(usize, usize) -> bool,
        seen: &mut [bool],
        col_owner: &mut [Option<usize>],
    ) -> bool {
        for col in 0..n {
            if !allowed(row, col) || seen[col] {
                continue;
            }
            seen[col] = true;
            let free = match col_owner[col] {
                None => true,
                Some(other) => augment(other, n, allowed, seen, col_owner),
            };
            if free {
                col_owner[col] = Some(row);
                return true;
            }
        }
        false
    }
    let mut col_owner = vec![None; n];
    for row in 0..n {
        let mut seen = vec![false; n];
        if !augment(row, n, &allowed, &mut seen, &mut col_owner) {
            return None;
        }
    }
    let mut sigma = vec![0; n];
    for (col, owner) in col_owner.into_iter().enumerate() {
        sigma[owner.expect("perfect matching covers every column")] = col;
    }
    Some(sigma)
}

fn is_positive(x: &Real) -> bool {
    match x {
        Real::Exact(r) => *r > num_traits::Zero::zero(),
        Real::Approx(v) => *v > TAU_ABS,
    }
}

/// Greedy decomposition; at most `(N−1)² + 1` terms because each extraction
/// shrinks the support and hence the face of the Birkhoff polytope holding the residual.
pub fn birkhoff(s: &Matrix<Real>) -> Result<BirkhoffCertificate> {
    let n = s.n();
    for i in 0..n {
        let row: Real = s.row(i).iter().cloned().sum();
        let col: Real = (0..n).map(|k| s[(k, i)].clone()).sum();
        if !row.eq_tol(&Real::one()) || !col.eq_tol(&Real::one()) {
            return Err(Error::NotDoublyStochastic(format!("line {i} sums to {row} / {col}")));
        }
        if let Some(j) = (0..n).find(|&j| !s[(i, j)].ge_tol(&Real::zero())) {
            return Err(Error::NotDoublyStochastic(format!("negative entry at ({i}, {j})")));
        }
    }
    let mut residual = s.clone();
    let mut support: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| is_positive(&residual[(i, j)])).collect()).collect();
    let mut cert = BirkhoffCertificate { weights: Vec::new(), permutations: Vec::new() };
    let max_terms = n * n + 1;
    while cert.len() < max_terms {
        if support.iter().flatten().all(|x| !x) {
            break;
        }
        let Some(sigma) = perfect_matching(n, |i, j| support[i][j]) else {
            return Err(Error::NotDoublyStochastic("positive support admits no perfect matching".into()));
        };
        let (argmin, weight) = sigma
            .iter()
            .enumerate()
            .map(|(i, &j)| ((i, j), residual[(i, j)].clone()))
            .min_by(|a, b| a.1.cmp(&b.1))
            .expect("n > 0");
        for (i, &j) in sigma.iter().enumerate() {
            residual[(i, j)] = &residual[(i, j)] - &weight;
        }
        residual[argmin] = Real::zero();
        for (i, &j) in sigma.iter().enumerate() {
            support[i][j] = is_positive(&residual[(i, j)]);
        }
        cert.weights.push(weight);
        cert.permutations.push(sigma);
    }
    Ok(cert)
}
