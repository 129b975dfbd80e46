//! Real symmetric matrices with prescribed spectrum and diagonal, and a cyclic
//! Jacobi eigensolver to read spectra back.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::numeric::{slack, Real};
use crate::schurhorn::tchain::check_majorization;

pub type SymMatrix = Matrix<f64>;

/// Off-diagonal Frobenius threshold, relative to `max(1, ‖M‖_F)`.
pub const JACOBI_TOLERANCE: f64 = 1e-14;
pub const JACOBI_MAX_SWEEPS: usize = 100;

fn check_inputs(a: &[f64], b: &[f64]) -> Result<()> {
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("entries must be finite".into()));
    }
    let ar: Vec<Real> = a.iter().map(|&x| Real::Approx(x)).collect();
    let br: Vec<Real> = b.iter().map(|&x| Real::Approx(x)).collect();
    check_majorization(&ar, &br)
}

/// Symmetric `M` with eigenvalues `a` and diagonal `b`, built by adjacent Givens
/// rotations that fix one diagonal entry at a time.
pub fn schur_horn_matrix(a: &[f64], b: &[f64]) -> Result<SymMatrix> {
    check_inputs(a, b)?;
    let n = a.len();
    let mut m = Matrix::filled(n, 0.0);
    for (i, &x) in a.iter().enumerate() {
        m[(i, i)] = x;
    }
    // Free positions carry no coupling among themselves; fixed ones never move again.
    let mut free: Vec<usize> = (0..n).collect();
    let mut order = Vec::with_capacity(n);
    for (step, &target) in b.iter().enumerate() {
        if step + 1 == n {
            let last = free.pop().expect("one free position remains");
            m[(last, last)] = target;
            order.push(last);
            break;
        }
        free.sort_by(|&x, &y| m[(y, y)].total_cmp(&m[(x, x)]).then(x.cmp(&y)));
        let r = free
            .iter()
            .rposition(|&i| m[(i, i)] >= target - slack(target))
            .unwrap_or(0)
            .min(free.len() - 2);
        let (i, j) = (free[r], free[r + 1]);
        let (hi, lo) = (m[(i, i)], m[(j, j)]);
        if hi - lo <= 0.0 || hi <= target {
            m[(i, i)] = target;
            m[(j, j)] = hi + lo - target;
        } else {
            let t = target.clamp(lo, hi);
            let c = ((t - lo) / (hi - lo)).sqrt();
            let s = -((hi - t) / (hi - lo)).sqrt();
            for x in 0..n {
                if x == i || x == j {
                    continue;
                }
                let (mi, mj) = (m[(i, x)], m[(j, x)]);
                let ni = c * mi + s * mj;
                let nj = -s * mi + c * mj;
                m[(i, x)] = ni;
                m[(x, i)] = ni;
                m[(j, x)] = nj;
                m[(x, j)] = nj;
            }
            let off = ((t - lo) * (hi - t)).sqrt();
            m[(i, i)] = target;
            m[(j, j)] = hi + lo - target;
            m[(i, j)] = off;
            m[(j, i)] = off;
        }
        free.retain(|&x| x != i);
        order.push(i);
    }
    Ok(Matrix::from_fn(n, |r, c| m[(order[r], order[c])]))
}

/// Eigenvalues of a symmetric matrix in non-increasing order.
pub fn symmetric_eigenvalues(m: &SymMatrix) -> Vec<f64> {
    let n = m.n();
    let mut a = m.clone();
    let threshold = JACOBI_TOLERANCE * m.frobenius().max(1.0);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|ij| a[ij] * a[ij]).sum::<f64>().sqrt();
        if off < threshold {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
            }
        }
    }
    let mut eig = a.diagonal();
    eig.sort_by(|x, y| y.total_cmp(x));
    eig
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(m: &SymMatrix, rows: &[&[f64]]) -> bool {
        rows.iter().enumerate().all(|(i, r)| r.iter().enumerate().all(|(j, x)| (m[(i, j)] - x).abs() < 1e-12))
    }

    #[test]
    fn examples() {
        let m = schur_horn_matrix(&[2.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!(close(&m, &[&[1.0, 1.0], &[1.0, 1.0]]), "{m:?}");
        let d = schur_horn_matrix(&[3.0, 2.0, 1.0], &[3.0, 2.0, 1.0]).unwrap();
        assert!(close(&d, &[&[3.0, 0.0, 0.0], &[0.0, 2.0, 0.0], &[0.0, 0.0, 1.0]]));
        let m = schur_horn_matrix(&[3.0, 1.0], &[2.0, 2.0]).unwrap();
        assert!(close(&m, &[&[2.0, 1.0], &[1.0, 2.0]]));
        assert!(m.is_symmetric());
    }

    #[test]
    fn spectrum_and_diagonal() {
        let a = [10.0, 6.0, 3.0, 1.0, 0.0];
        let b = [7.0, 5.0, 4.0, 2.5, 1.5];
        let m = schur_horn_matrix(&a, &b).unwrap();
        assert_eq!(m.diagonal(), b.to_vec());
        let eig = symmetric_eigenvalues(&m);
        for (x, y) in eig.iter().zip(a) {
            assert!((x - y).abs() < 1e-9, "{eig:?}");
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(schur_horn_matrix(&[1.0, 1.0], &[2.0, 0.0]), Err(Error::NotMajorized { .. })));
        assert_eq!(schur_horn_matrix(&[2.0, 0.0], &[1.0, 0.5]), Err(Error::UnequalSums));
    }

    #[test]
    fn jacobi_known_spectrum() {
        let m = Matrix::from_rows(vec![vec![2.0, -1.0, 0.0], vec![-1.0, 2.0, -1.0], vec![0.0, -1.0, 2.0]]).unwrap();
        let eig = symmetric_eigenvalues(&m);
        let s = 2f64.sqrt();
        for (x, y) in eig.iter().zip([2.0 + s, 2.0, 2.0 - s]) {
            assert!((x - y).abs() < 1e-13);
        }
    }
}
