//! Matrix-level witness: a symmetric `M` whose spectrum carries `f²` and whose
//! diagonal carries `g²` cell by cell on a dyadic grid.

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::majorize::left_majorizes;
use crate::matrix::Matrix;
use crate::numeric::{Rational, Real};
use crate::schurhorn::synth::{schur_horn_matrix, symmetric_eigenvalues};
use crate::stepfn::{dyadic_cell, StepFunction};

/// Eigenvalues below this fraction of `‖M‖_F` are read as zero.
pub const SPECTRAL_ZERO: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub matrix: Matrix<f64>,
    pub f_recovered: StepFunction,
    pub g_recovered: StepFunction,
    pub spectral_error: f64,
    pub diagonal_error: f64,
}

/// Values of `f` on the cells `[k 2^{-n}, (k+1) 2^{-n})`, `k < cells`.
fn cell_values(f: &StepFunction, n: u32, cells: usize) -> Vec<f64> {
    let h = dyadic_cell(n);
    (0..cells).map(|k| f.eval(&(&h * Rational::from_integer(k.into()))).to_f64()).collect()
}

fn on_grid(values: &[f64], n: u32, f: &StepFunction) -> StepFunction {
    let h = dyadic_cell(n);
    let pieces = values.iter().enumerate().map(|(k, &v)| (&h * Rational::from_integer((k + 1).into()), Real::Approx(v)));
    StepFunction::from_ends(f.alpha().clone(), pieces)
}

pub fn khintchine_witness(f: &StepFunction, g: &StepFunction, n: u32) -> Result<WitnessReport> {
    if !f.is_on_dyadic_grid(n) || !g.is_on_dyadic_grid(n) {
        return Err(Error::GridMismatch(n));
    }
    if !f.is_non_increasing() || !g.is_non_increasing() {
        return Err(Error::NotMonotone);
    }
    let (nf, ng) = (f.power(2.0).integral(), g.power(2.0).integral());
    if !nf.eq_tol(&ng) {
        return Err(Error::NormMismatch(format!("‖f‖₂² = {nf}, ‖g‖₂² = {ng}")));
    }
    let pre = left_majorizes(f, g, 2.0);
    if !pre.holds {
        return Err(Error::NotMajorized { witness: pre.witness_t });
    }
    let scale = Rational::from_integer(num_bigint::BigInt::from(1u8) << n);
    let cells = (f.support_end().max(g.support_end()) * scale).ceil().to_integer().to_usize().unwrap_or(0).max(1);
    let a2: Vec<f64> = cell_values(f, n, cells).iter().map(|x| x * x).collect();
    let b2: Vec<f64> = cell_values(g, n, cells).iter().map(|x| x * x).collect();
    let m = schur_horn_matrix(&a2, &b2)?;
    let zero_below = SPECTRAL_ZERO * m.frobenius();
    let spectrum: Vec<f64> =
        symmetric_eigenvalues(&m).into_iter().map(|x| if x.abs() < zero_below { 0.0 } else { x.max(0.0) }).collect();
    let diag = m.diagonal();
    let max_err = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
    let spectral_error = max_err(&spectrum, &a2);
    let diagonal_error = max_err(&diag, &b2);
    let f_rec: Vec<f64> = spectrum.iter().map(|x| x.sqrt()).collect();
    let g_rec: Vec<f64> = diag.iter().map(|x| x.max(0.0).sqrt()).collect();
    Ok(WitnessReport {
        f_recovered: on_grid(&f_rec, n, f),
        g_recovered: on_grid(&g_rec, n, g),
        matrix: m,
        spectral_error,
        diagonal_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{int, rat, Bound};

    #[test]
    fn two_cells() {
        let f = StepFunction::constant(rat(1, 2), Real::int(2));
        let g = StepFunction::constant(int(1), Real::Approx(2f64.sqrt()));
        let w = khintchine_witness(&f, &g, 1).unwrap();
        for x in w.matrix.rows().iter().flatten() {
            assert!((x - 2.0).abs() < 1e-12);
        }
        assert_eq!(w.g_recovered, g);
        assert_eq!(w.f_recovered.breakpoints(), f.breakpoints());
        assert!((w.f_recovered.values_f64()[0] - 2.0).abs() < 1e-8);
    }

    #[test]
    fn equal_inputs_give_diagonal() {
        let f = StepFunction::new(vec![rat(1, 2), int(1)], vec![Real::int(2), Real::one()], Bound::Infinite).unwrap();
        let w = khintchine_witness(&f, &f, 1).unwrap();
        assert_eq!(w.matrix, Matrix::from_rows(vec![vec![4.0, 0.0], vec![0.0, 1.0]]).unwrap());
        assert_eq!(w.f_recovered, f);
        assert_eq!(w.g_recovered, f);
    }

    #[test]
    fn four_cells() {
        let f = StepFunction::constant(rat(1, 4), Real::int(2));
        let g = StepFunction::constant(int(1), Real::one());
        let w = khintchine_witness(&f, &g, 2).unwrap();
        assert_eq!(w.matrix.n(), 4);
        assert_eq!(w.g_recovered, g);
        assert!(w.spectral_error < 1e-9);
        let vals = w.f_recovered.values_f64();
        assert!((vals[0] - 2.0).abs() < 1e-8);
        assert!(w.f_recovered.support_end() <= rat(1, 4) || vals.iter().skip(1).all(|v| *v < 1e-8));
    }

    #[test]
    fn errors() {
        let f = StepFunction::constant(rat(1, 3), Real::int(2));
        assert_eq!(khintchine_witness(&f, &f, 2), Err(Error::GridMismatch(2)));
        let a = StepFunction::constant(int(1), Real::int(2));
        let b = StepFunction::constant(int(1), Real::one());
        assert!(matches!(khintchine_witness(&a, &b, 0), Err(Error::NormMismatch(_))));
        let wide = StepFunction::constant(int(4), Real::one());
        let tall = StepFunction::constant(int(1), Real::int(2));
        assert!(matches!(khintchine_witness(&wide, &tall, 0), Err(Error::NotMajorized { .. })));
    }
}
