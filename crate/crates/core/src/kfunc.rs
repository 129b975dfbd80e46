//! K-functionals of the couples `(L_p, L_∞)` and `(L_p, L_q)`: closed-form
//! expressions plus a truncation-family upper bound used as an independent check.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{rat_from_f64, Bound, Rational, Real};
use crate::stepfn::StepFunction;

/// Subdivisions of each gap between consecutive values of `f*` in the oracle grid.
pub const ORACLE_SUBDIVISIONS: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KEstimate {
    pub t: f64,
    #[serde(rename = "formula")]
    pub formula_value: f64,
    #[serde(rename = "oracle")]
    pub oracle_value: Option<f64>,
    pub ratio: Option<f64>,
}

fn exact_exponent(x: f64) -> Result<Rational> {
    rat_from_f64(x).map_err(|_| Error::InvalidArgument(format!("exponent {x} is not finite")))
}

/// `t^e` as an exact rational window length.
fn window(t: f64, e: &Rational) -> Result<Rational> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("t must be positive and finite, got {t}")));
    }
    Ok(Real::Exact(rat_from_f64(t)?).pow(e).to_rational())
}

/// `(∫_0^{t^p} (f*)^p)^{1/p}`.
pub fn k_p_inf(f: &StepFunction, p: f64, t: f64) -> Result<Real> {
    let w = window(t, &exact_exponent(p)?)?;
    let head = f.rearrange().integral_power(p, &Rational::zero(), &Bound::Finite(w));
    Ok(head.root(p))
}

/// `(1/p − 1/q)^{-1}`.
pub fn holmstedt_exponent(p: f64, q: f64) -> Result<Rational> {
    if !(p > 0.0) || !(q > p) || !q.is_finite() {
        return Err(Error::BadExponents { p, q });
    }
    let (p, q) = (exact_exponent(p)?, exact_exponent(q)?);
    Ok((p.recip() - q.recip()).recip())
}

/// `(∫_0^{t^r} (f*)^p)^{1/p} + t (∫_{t^r}^∞ (f*)^q)^{1/q}` with `r = (1/p − 1/q)^{-1}`.
pub fn k_holmstedt(f: &StepFunction, p: f64, q: f64, t: f64) -> Result<Real> {
    let r = holmstedt_exponent(p, q)?;
    let w = window(t, &r)?;
    let fs = f.rearrange();
    let head = fs.integral_power(p, &Rational::zero(), &Bound::Finite(w.clone())).root(p);
    let tail = fs.integral_power(q, &w, &Bound::Infinite).root(q);
    Ok(head + Real::Exact(rat_from_f64(t)?) * tail)
}

/// Precomputed truncation costs `(‖(f* − c)₊‖_p, ‖min(f*, c)‖_q)` over the level grid.
struct TruncationCosts {
    costs: Vec<(f64, f64)>,
}

impl TruncationCosts {
    fn new(f: &StepFunction, p: f64, q: f64) -> Self {
        let pieces: Vec<(f64, f64)> = f
            .rearrange()
            .pieces()
            .map(|pc| (crate::numeric::rat_to_f64(&pc.length()), pc.value.to_f64()))
            .collect();
        let mut levels: Vec<f64> = pieces.iter().map(|&(_, v)| v).collect();
        levels.push(0.0);
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        let mut grid = Vec::with_capacity(levels.len() * ORACLE_SUBDIVISIONS + 1);
        for w in levels.windows(2) {
            for k in 0..ORACLE_SUBDIVISIONS {
                grid.push(w[0] + (w[1] - w[0]) * k as f64 / ORACLE_SUBDIVISIONS as f64);
            }
        }
        grid.push(*levels.last().expect("contains 0"));
        let top = levels.last().copied().unwrap_or(0.0);
        let costs = grid
            .into_iter()
            .map(|c| {
                let excess: f64 = pieces.iter().map(|&(len, v)| len * (v - c).max(0.0).powf(p)).sum();
                let capped = if q.is_infinite() {
                    c.min(top)
                } else {
                    pieces.iter().map(|&(len, v)| len * v.min(c).powf(q)).sum::<f64>().powf(1.0 / q)
                };
                (excess.powf(1.0 / p), capped)
            })
            .collect();
        TruncationCosts { costs }
    }

    fn at(&self, t: f64) -> f64 {
        self.costs.iter().map(|&(a, b)| a + t * b).fold(f64::INFINITY, f64::min)
    }
}

/// Minimum of `‖(f* − c)₊‖_p + t‖min(f*, c)‖_q` over the truncation grid; an upper
/// bound for the K-functional. `q` may be `f64::INFINITY`.
pub fn k_oracle(f: &StepFunction, p: f64, q: f64, t: f64) -> Result<f64> {
    if !(p > 0.0) || !(q > p) {
        return Err(Error::BadExponents { p, q });
    }
    Ok(TruncationCosts::new(f, p, q).at(t))
}

/// Closed form (Holmstedt for finite `q`, the `(L_p, L_∞)` formula otherwise)
/// against the oracle on every grid point.
pub fn k_curve(f: &StepFunction, p: f64, q: f64, t_grid: &[f64]) -> Result<Vec<KEstimate>> {
    if !(p > 0.0) || !(q > p) {
        return Err(Error::BadExponents { p, q });
    }
    if t_grid.windows(2).any(|w| !(w[0] < w[1])) || t_grid.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::InvalidArgument("t grid must be positive and increasing".into()));
    }
    let costs = TruncationCosts::new(f, p, q);
    t_grid
        .iter()
        .map(|&t| {
            let formula = if q.is_infinite() { k_p_inf(f, p, t)? } else { k_holmstedt(f, p, q, t)? }.to_f64();
            let oracle = costs.at(t);
            let ratio = (oracle > 0.0).then(|| formula / oracle);
            Ok(KEstimate { t, formula_value: formula, oracle_value: Some(oracle), ratio })
        })
        .collect()
}

/// CSV with columns `t,formula,oracle,ratio`.
pub fn to_csv(estimates: &[KEstimate]) -> String {
    let mut out = String::from("t,formula,oracle,ratio\n");
    let opt = |x: Option<f64>| x.map(|v| format!("{v:?}")).unwrap_or_default();
    for e in estimates {
        out.push_str(&format!("{:?},{:?},{},{}\n", e.t, e.formula_value, opt(e.oracle_value), opt(e.ratio)));
    }
    out
}

/// Logarithmic grid `2^{lo}, 2^{lo+1}, …, 2^{hi}`.
pub fn dyadic_t_grid(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|k| 2f64.powi(k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{int, rat};

    fn ind() -> StepFunction {
        StepFunction::constant(int(1), Real::one())
    }

    #[test]
    fn k_p_inf_examples() {
        assert_eq!(k_p_inf(&ind(), 1.0, 0.5).unwrap(), Real::ratio(1, 2));
        for t in [1.0, 2.0, 100.0] {
            assert_eq!(k_p_inf(&ind(), 1.0, t).unwrap(), Real::one());
        }
        let two = StepFunction::constant(int(1), Real::int(2));
        let v = k_p_inf(&two, 2.0, 1.0).unwrap();
        assert_eq!(v, Real::int(2));
        assert!(v.is_exact());
    }

    #[test]
    fn holmstedt_examples() {
        assert_eq!(k_holmstedt(&ind(), 1.0, 2.0, 1.0).unwrap(), Real::one());
        let v = k_holmstedt(&ind(), 1.0, 2.0, 0.5).unwrap().to_f64();
        assert!((v - (0.25 + 0.5 * 0.75f64.sqrt())).abs() < 1e-15);
        assert!((v - 0.6830).abs() < 1e-4);
        let z = StepFunction::zero(Bound::Infinite);
        assert!(k_holmstedt(&z, 1.0, 2.0, 3.0).unwrap().is_zero());
        assert_eq!(k_holmstedt(&ind(), 2.0, 2.0, 1.0), Err(Error::BadExponents { p: 2.0, q: 2.0 }));
        assert!(matches!(k_holmstedt(&ind(), 3.0, f64::INFINITY, 1.0), Err(Error::BadExponents { .. })));
    }

    #[test]
    fn oracle_examples() {
        let two = StepFunction::constant(int(1), Real::int(2));
        assert!((k_oracle(&two, 1.0, f64::INFINITY, 0.5).unwrap() - 1.0).abs() < 1e-15);
        for (p, q) in [(1.0, 2.0), (2.0, 4.0), (1.0, f64::INFINITY)] {
            let v = k_oracle(&ind(), p, q, 1e6).unwrap();
            assert!((v - 1.0).abs() < 1e-12);
        }
        assert!((k_oracle(&ind(), 1.0, 2.0, 0.5).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn curve_examples() {
        let f = StepFunction::constant(rat(3, 2), Real::ratio(5, 4));
        let est = k_curve(&f, 1.0, 2.0, &[0.25, 1.0, 4.0]).unwrap();
        assert_eq!(est.len(), 3);
        for e in &est {
            let r = e.ratio.unwrap();
            assert!((1.0 / 8.0..=8.0).contains(&r), "ratio {r}");
        }
        assert!(k_curve(&f, 1.0, 2.0, &[]).unwrap().is_empty());
        let z = StepFunction::zero(Bound::Infinite);
        for e in k_curve(&z, 1.0, f64::INFINITY, &[0.5, 1.0]).unwrap() {
            assert_eq!(e.formula_value, 0.0);
            assert_eq!(e.oracle_value, Some(0.0));
            assert_eq!(e.ratio, None);
        }
        assert!(to_csv(&est).starts_with("t,formula,oracle,ratio\n0.25,"));
    }

    #[test]
    fn holmstedt_sum_is_not_concave() {
        // For f = 1_{(0,1)}, p = 1, q = 2 the sum equals t² + t(1 − t²)^{1/2} on (0, 1):
        // convex near 0 and not monotone just below t = 1.
        let k = |t: f64| k_holmstedt(&ind(), 1.0, 2.0, t).unwrap().to_f64();
        assert!(k(0.99) > k(1.0));
        let (a, b, c) = (k(0.01), k(0.02), k(0.03));
        assert!(a + c - 2.0 * b > 0.0);
    }

    #[test]
    fn p_inf_is_not_concave_for_p_above_one() {
        let f = StepFunction::new(vec![int(1), int(2)], vec![Real::int(2), Real::one()], Bound::Infinite).unwrap();
        let k = |t: f64| k_p_inf(&f, 2.0, t).unwrap().to_f64();
        let (a, b, c) = (k(1.05), k(1.2), k(1.35));
        assert!(a + c - 2.0 * b > 0.0);
    }
}
