//! Head (left) and tail (right) majorization at an exponent, and the
//! norm-equalizing lifts.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{opt_rational_str, Rational, Real};
use crate::stepfn::{Cumulative, StepFunction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MajorizationReport {
    pub holds: bool,
    pub exponent: f64,
    pub side: Side,
    /// Minimum over checkpoints of the signed integral gap.
    pub margin: Real,
    #[serde(with = "opt_rational_str")]
    pub witness_t: Option<Rational>,
}

/// `(f*)^p` as a step function.
pub fn power_profile(f: &StepFunction, p: f64) -> StepFunction {
    f.rearrange().power(p)
}

/// Whether `gap ≥ 0`, exactly for exact gaps and up to the float slack relative
/// to the magnitude of the compared integrals otherwise.
pub(crate) fn nonnegative_gap(gap: &Real, scale: &Real) -> bool {
    match gap {
        Real::Exact(g) => !g.is_negative(),
        Real::Approx(g) => *g >= -crate::numeric::slack(scale.to_f64()),
    }
}

fn merged_knots(a: &Cumulative, b: &Cumulative) -> Vec<Rational> {
    let mut knots: Vec<Rational> = a.knots().iter().chain(b.knots()).cloned().collect();
    knots.sort();
    knots.dedup();
    knots
}

fn report(side: Side, exponent: f64, gaps: Vec<(Rational, Real)>, scale: Real) -> MajorizationReport {
    let worst = gaps.into_iter().reduce(|best, cur| if cur.1 < best.1 { cur } else { best });
    match worst {
        Some((t, margin)) => MajorizationReport {
            holds: nonnegative_gap(&margin, &scale),
            exponent,
            side,
            margin,
            witness_t: Some(t),
        },
        None => MajorizationReport { holds: true, exponent, side, margin: Real::zero(), witness_t: None },
    }
}

/// `f^p ≻ g^p`: `∫_0^t (f*)^p ≥ ∫_0^t (g*)^p` for all `t > 0`.
pub fn left_majorizes(f: &StepFunction, g: &StepFunction, p: f64) -> MajorizationReport {
    let fc = power_profile(f, p).antiderivative();
    let gc = power_profile(g, p).antiderivative();
    let scale = fc.total().clone().max(gc.total().clone());
    let gaps = merged_knots(&fc, &gc)
        .into_iter()
        .filter(|t| t.is_positive())
        .map(|t| {
            let gap = fc.at(&t) - gc.at(&t);
            (t, gap)
        })
        .collect();
    report(Side::Left, p, gaps, scale)
}

/// `f^q ▷ g^q`: `∫_t^∞ (f*)^q ≥ ∫_t^∞ (g*)^q` for all `t > 0`.
pub fn right_majorizes(f: &StepFunction, g: &StepFunction, q: f64) -> MajorizationReport {
    let fc = power_profile(f, q).antiderivative();
    let gc = power_profile(g, q).antiderivative();
    let (ftot, gtot) = (fc.total().clone(), gc.total().clone());
    let scale = ftot.clone().max(gtot.clone());
    let mut knots = merged_knots(&fc, &gc);
    if knots.len() > 1 {
        knots.pop();
    }
    let gaps = knots
        .into_iter()
        .map(|t| {
            let gap = (&ftot - &fc.at(&t)) - (&gtot - &gc.at(&t));
            (t, gap)
        })
        .collect();
    let mut r = report(Side::Right, q, gaps, scale);
    if ftot.is_zero() && gtot.is_zero() {
        r.witness_t = None;
    }
    r
}

fn require_non_increasing(fs: &[&StepFunction]) -> Result<()> {
    if fs.iter().all(|f| f.is_non_increasing()) {
        Ok(())
    } else {
        Err(Error::NotMonotone)
    }
}

fn verified(h: StepFunction, check: MajorizationReport, what: &str) -> Result<StepFunction> {
    if check.holds {
        Ok(h)
    } else {
        Err(Error::PostconditionViolated(format!("{what} fails with margin {}", check.margin)))
    }
}

/// Raises `g` to `max(g, s)` on `(0, a)`, `a` the end of the joint support, with
/// the level `s` chosen so that `‖h‖_p = ‖f‖_p`; then `h ≥ g` and `f^p ≻ h^p`.
pub fn lift_left(f: &StepFunction, g: &StepFunction, p: f64) -> Result<StepFunction> {
    require_non_increasing(&[f, g])?;
    let target = f.power(p).integral();
    let gp = g.power(p);
    if !target.ge_tol(&gp.integral()) {
        return Err(Error::NoFeasibleLevel);
    }
    let pre = left_majorizes(f, g, p);
    if !pre.holds {
        return Err(Error::NotMajorized { witness: pre.witness_t });
    }
    let a = f.support_end().max(g.support_end());
    if a.is_zero() {
        return Ok(g.clone());
    }
    // Φ(σ) = ∫_0^a max(g^p, σ) is piecewise linear in σ with kinks at the values of g^p.
    let mut levels: Vec<(Real, Rational)> = gp.pieces().map(|pc| (pc.value.clone(), pc.length())).collect();
    let tail = &a - gp.support_end();
    if tail.is_positive() {
        levels.push((Real::zero(), tail));
    }
    levels.sort_by(|x, y| x.0.cmp(&y.0));
    let mut below = Rational::zero();
    let mut above = gp.integral();
    let mut sigma = None;
    for (k, (v, len)) in levels.iter().enumerate() {
        below += len;
        above = &above - &v.mul_rat(len);
        let next = levels.get(k + 1).map(|x| &x.0);
        // On [v, next): Φ(σ) = σ·below + above.
        let phi_next = next.map(|n| &n.mul_rat(&below) + &above);
        if phi_next.as_ref().is_none_or(|phi| *phi >= target) {
            let s = &(&target - &above) / &Real::Exact(below.clone());
            sigma = Some(s.max(v.clone()));
            break;
        }
    }
    let sigma = sigma.expect("last level always brackets the target");
    let level = sigma.root(p);
    let floor = StepFunction::from_ends(g.alpha().clone(), [(a, level)]);
    let h = g.max(&floor)?;
    let check = left_majorizes(f, &h, p);
    verified(h, check, "left majorization of the lifted function")
}

/// Adds `s·1_{(0,a)}` to `g`, where `f` and `g` are both constant on `(0, a)`,
/// with `s` chosen so that `‖h‖_q = ‖f‖_q`; then `f^q ▷ h^q`.
pub fn lift_right(f: &StepFunction, g: &StepFunction, q: f64) -> Result<StepFunction> {
    require_non_increasing(&[f, g])?;
    let target = f.power(q).integral();
    let gq = g.power(q);
    if !target.ge_tol(&gq.integral()) {
        return Err(Error::NoFeasibleLevel);
    }
    let pre = right_majorizes(f, g, q);
    if !pre.holds {
        return Err(Error::NotMajorized { witness: pre.witness_t });
    }
    let a = match (f.breakpoints().first(), g.breakpoints().first()) {
        (None, _) => return Ok(g.clone()),
        (Some(x), None) => x.clone(),
        (Some(x), Some(y)) => x.clone().min(y.clone()),
    };
    let g0 = g.values().first().cloned().unwrap_or_else(Real::zero);
    let tail = gq.integral_over(&a, &crate::numeric::Bound::Infinite);
    let head_level = (&(&target - &tail) / &Real::Exact(a.clone())).max(Real::zero());
    let s = (&head_level.root(q) - &g0).max(Real::zero());
    let bump = StepFunction::from_ends(g.alpha().clone(), [(a, s)]);
    let h = g.add(&bump)?;
    let check = right_majorizes(f, &h, q);
    verified(h, check, "right majorization of the lifted function")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{int, rat, Bound};

    fn c(len: Rational, v: Real) -> StepFunction {
        StepFunction::constant(len, v)
    }

    #[test]
    fn left_examples() {
        let f = c(int(1), Real::one());
        let g = c(int(2), Real::ratio(1, 2));
        let r = left_majorizes(&f, &g, 1.0);
        assert!(r.holds);
        assert_eq!(r.margin, Real::zero());
        assert_eq!(r.witness_t, Some(int(2)));
        let same = left_majorizes(&f, &f, 1.0);
        assert!(same.holds && same.margin == Real::zero());
        let bad = left_majorizes(&g, &f, 1.0);
        assert!(!bad.holds);
        assert_eq!(bad.margin, Real::ratio(-1, 2));
        assert_eq!(bad.witness_t, Some(int(1)));
    }

    #[test]
    fn right_examples() {
        let f = c(int(1), Real::one());
        let g = c(rat(1, 4), Real::int(2));
        let r = right_majorizes(&f, &g, 2.0);
        assert!(r.holds);
        assert_eq!(r.margin, Real::zero());
        assert!(right_majorizes(&f, &f, 2.0).holds);
        let spread = c(int(2), Real::ratio(1, 2));
        let bad = right_majorizes(&f, &spread, 1.0);
        assert!(!bad.holds);
        // The tail gap at t = 1/2 is 1/2 − 3/4.
        let tail = |h: &StepFunction, t| h.integral_over(&t, &Bound::Infinite);
        assert_eq!(tail(&f, rat(1, 2)) - tail(&spread, rat(1, 2)), Real::ratio(-1, 4));
        assert_eq!(bad.margin, Real::ratio(-1, 2));
    }

    #[test]
    fn zero_functions() {
        let z = StepFunction::zero(Bound::Infinite);
        for r in [left_majorizes(&z, &z, 2.0), right_majorizes(&z, &z, 2.0)] {
            assert!(r.holds);
            assert_eq!(r.witness_t, None);
        }
    }

    #[test]
    fn lift_left_examples() {
        let f = c(int(1), Real::one());
        let g = c(int(1), Real::ratio(1, 2));
        assert_eq!(lift_left(&f, &g, 1.0).unwrap(), f);
        assert_eq!(lift_left(&f, &f, 1.0).unwrap(), f);
        let f2 = c(int(1), Real::int(2));
        assert_eq!(lift_left(&f2, &f, 1.0).unwrap(), f2);
        assert_eq!(lift_left(&g, &f, 1.0), Err(Error::NoFeasibleLevel));
    }

    #[test]
    fn lift_left_fills_gap_in_support() {
        // g vanishes on [1/2, 2) inside the support of f.
        let f = c(int(2), Real::one());
        let g = c(rat(1, 2), Real::one());
        let h = lift_left(&f, &g, 2.0).unwrap();
        assert!(h.ge_pointwise(&g));
        assert!(h.power(2.0).integral().eq_tol(&Real::int(2)));
        assert_eq!(h, f);
    }

    #[test]
    fn lift_right_examples() {
        let f = c(int(1), Real::one());
        let g = c(int(1), Real::ratio(1, 2));
        assert_eq!(lift_right(&f, &g, 1.0).unwrap(), f);
        assert_eq!(lift_right(&f, &f, 3.0).unwrap(), f);
        let f2 = c(rat(1, 2), Real::int(2));
        let g2 = c(rat(1, 2), Real::one());
        let h = lift_right(&f2, &g2, 2.0).unwrap();
        assert_eq!(h, f2);
        assert!(h.is_exact());
    }

    #[test]
    fn lift_right_uses_joint_plateau() {
        // g is constant on (0,2) but f only on (0,1); the bump must stop at 1.
        let f = StepFunction::new(vec![int(1), int(2)], vec![Real::int(2), Real::one()], Bound::Infinite).unwrap();
        let g = c(int(2), Real::one());
        let h = lift_right(&f, &g, 1.0).unwrap();
        assert_eq!(h, f);
    }

    #[test]
    fn lift_rejects_non_majorized() {
        let f = c(int(2), Real::ratio(1, 2));
        let g = c(int(1), Real::ratio(3, 4));
        assert!(matches!(lift_left(&f, &g, 1.0), Err(Error::NotMajorized { .. })));
    }
}
