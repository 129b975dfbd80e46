//! Robin-Hood chains of T-transforms realizing classical majorization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::numeric::{int, slack, Real};

/// `λ I + (1 − λ) Q_{jk}`, `Q_{jk}` the transposition of coordinates `j < k` (0-based).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TTransform {
    pub j: usize,
    pub k: usize,
    pub lambda: Real,
}

impl TTransform {
    pub fn apply(&self, x: &mut [Real]) {
        let (xj, xk) = (x[self.j].clone(), x[self.k].clone());
        let mu = &Real::one() - &self.lambda;
        x[self.j] = &(&self.lambda * &xj) + &(&mu * &xk);
        x[self.k] = &(&self.lambda * &xk) + &(&mu * &xj);
    }
}

fn strictly_greater(x: &Real, y: &Real) -> bool {
    match (x, y) {
        (Real::Exact(a), Real::Exact(b)) => a > b,
        _ => {
            let (a, b) = (x.to_f64(), y.to_f64());
            a - b > slack(a.abs().max(b.abs()))
        }
    }
}

/// Validates `a ≻ b` for finite non-increasing vectors of equal sum.
pub fn check_majorization(a: &[Real], b: &[Real]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!("lengths {} and {}", a.len(), b.len())));
    }
    let sorted = |v: &[Real]| v.windows(2).all(|w| w[0] >= w[1]);
    if !sorted(a) || !sorted(b) {
        return Err(Error::NotMonotone);
    }
    let (mut sa, mut sb) = (Real::zero(), Real::zero());
    for (i, (x, y)) in a.iter().zip(b).enumerate() {
        sa = &sa + x;
        sb = &sb + y;
        if i + 1 < a.len() && !sa.ge_tol(&sb) {
            return Err(Error::NotMajorized { witness: Some(int(i as i64 + 1)) });
        }
    }
    if !sa.eq_tol(&sb) {
        return Err(Error::UnequalSums);
    }
    Ok(())
}

/// At most `N − 1` T-transforms mapping `a` to `b`.
pub fn tchain(a: &[Real], b: &[Real]) -> Result<Vec<TTransform>> {
    check_majorization(a, b)?;
    let n = a.len();
    let mut x = a.to_vec();
    let mut chain = Vec::new();
    while chain.len() < n.saturating_sub(1) {
        let Some(j) = (0..n).rev().find(|&i| strictly_greater(&x[i], &b[i])) else {
            break;
        };
        let Some(k) = (j + 1..n).find(|&i| strictly_greater(&b[i], &x[i])) else {
            break;
        };
        let give = &x[j] - &b[j];
        let take = &b[k] - &x[k];
        let delta = give.clone().min(take.clone());
        let lambda = &Real::one() - &(&delta / &(&x[j] - &x[k]));
        if give <= take {
            x[k] = &x[k] + &give;
            x[j] = b[j].clone();
        } else {
            x[j] = &x[j] - &take;
            x[k] = b[k].clone();
        }
        chain.push(TTransform { j, k, lambda });
    }
    Ok(chain)
}

/// `T_m ⋯ T_1` as an `n × n` matrix.
pub fn compose(n: usize, chain: &[TTransform]) -> Matrix<Real> {
    let mut s = Matrix::identity(n);
    for t in chain {
        let mu = &Real::one() - &t.lambda;
        for c in 0..n {
            let (rj, rk) = (s[(t.j, c)].clone(), s[(t.k, c)].clone());
            if rj.is_zero() && rk.is_zero() {
                continue;
            }
            s[(t.j, c)] = &(&t.lambda * &rj) + &(&mu * &rk);
            s[(t.k, c)] = &(&t.lambda * &rk) + &(&mu * &rj);
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[i64]) -> Vec<Real> {
        xs.iter().map(|&x| Real::int(x)).collect()
    }

    #[test]
    fn examples() {
        assert!(tchain(&v(&[3, 1]), &v(&[3, 1])).unwrap().is_empty());
        let c = tchain(&v(&[3, 1]), &v(&[2, 2])).unwrap();
        assert_eq!(c, vec![TTransform { j: 0, k: 1, lambda: Real::ratio(1, 2) }]);
        let a = v(&[4, 0, 0]);
        let b = v(&[2, 1, 1]);
        let c = tchain(&a, &b).unwrap();
        assert_eq!(c.len(), 2);
        let mut x = a.clone();
        for t in &c {
            t.apply(&mut x);
        }
        assert_eq!(x, b);
        assert_eq!(compose(3, &c).apply(&a), b);
    }

    #[test]
    fn errors() {
        assert_eq!(tchain(&v(&[2, 2]), &v(&[3, 1])), Err(Error::NotMajorized { witness: Some(int(1)) }));
        assert_eq!(tchain(&v(&[3, 1]), &v(&[2, 1])), Err(Error::UnequalSums));
        assert_eq!(tchain(&v(&[1, 3]), &v(&[2, 2])), Err(Error::NotMonotone));
    }
}
