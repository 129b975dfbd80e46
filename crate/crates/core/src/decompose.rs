//! The splitting `g = h + l` with `f^p ≻ h^p` and `f^q ▷ l^q`, and its
//! sequence-space companion.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::majorize::{left_majorizes, nonnegative_gap};
use crate::numeric::{rat_from_f64, slack, Bound, Rational, Real};
use crate::stepfn::{Cumulative, Interval, IntervalSet, SeqView, StepFunction};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub h: StepFunction,
    pub l: StepFunction,
    /// `{t ≥ 0 : ∫_0^t f^p ≥ ∫_0^t g^p}`.
    #[serde(rename = "A")]
    pub a_set: IntervalSet,
    /// `{t ≥ 0 : ∫_t^∞ f^q ≥ ∫_t^∞ g^q}`.
    #[serde(rename = "B")]
    pub b_set: IntervalSet,
}

impl Decomposition {
    /// `a(t) = min A ∩ [t, ∞)`, `None` when the intersection is empty.
    pub fn a_of(&self, t: &Rational) -> Option<Rational> {
        self.a_set.iter().find(|iv| iv.end.admits(t)).map(|iv| iv.start.clone().max(t.clone()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceDecomposition {
    pub hbar: SeqView,
    pub lbar: SeqView,
    /// `a_p · a_{1/p}` with `a_r = max(1, 2^{r−1})`.
    pub bound_constant: f64,
}

/// `max(1, 2^{r−1})`, the best constant in `(a + b)^r ≤ a_r (a^r + b^r)`.
pub fn quasi_triangle_constant(r: f64) -> f64 {
    2f64.powf(r - 1.0).max(1.0)
}

fn check_exponents(p: f64, q: f64) -> Result<()> {
    if !(p > 0.0) || !(q >= p) || !q.is_finite() {
        return Err(Error::BadExponents { p, q });
    }
    Ok(())
}

/// Exact `t ↦ ∫_0^t (F − G)` sampled on the merged knots, as rationals.
fn difference_curve(f: &Cumulative, g: &Cumulative) -> (Vec<Rational>, Vec<Rational>) {
    let mut knots: Vec<Rational> = f.knots().iter().chain(g.knots()).cloned().collect();
    knots.sort();
    knots.dedup();
    let levels = knots.iter().map(|t| (f.at(t) - g.at(t)).to_rational()).collect();
    (knots, levels)
}

/// `{t ≥ 0 : y(t) ≥ 0}` for the continuous piecewise affine `y` through
/// `(knots[i], levels[i])`, held constant after the last knot.
fn nonnegative_set(knots: &[Rational], levels: &[Rational]) -> IntervalSet {
    let mut pieces: Vec<Interval> = Vec::new();
    let mut push = |start: Rational, end: Bound| match pieces.last_mut() {
        Some(last) if last.end.admits(&start) => {
            if end > last.end {
                last.end = end;
            }
        }
        _ => pieces.push(Interval::new(start, end)),
    };
    if !levels[0].is_negative() {
        push(knots[0].clone(), Bound::Finite(knots[0].clone()));
    }
    for i in 1..knots.len() {
        let (x0, x1) = (&knots[i - 1], &knots[i]);
        let (y0, y1) = (&levels[i - 1], &levels[i]);
        let crossing = || x0 + y0 * (x1 - x0) / (y0 - y1);
        match (y0.is_negative(), y1.is_negative()) {
            (false, false) => push(x0.clone(), Bound::Finite(x1.clone())),
            (false, true) => push(x0.clone(), Bound::Finite(crossing())),
            (true, false) => push(crossing(), Bound::Finite(x1.clone())),
            (true, true) => {}
        }
    }
    let (last_knot, last_level) = (knots.last().expect("origin knot"), levels.last().expect("origin level"));
    if !last_level.is_negative() {
        push(last_knot.clone(), Bound::Infinite);
    }
    pieces
}

/// First point of `(0, ∞)` outside `A ∪ B`: the midpoint of the first gap.
fn first_uncovered(a: &[Interval], b: &[Interval]) -> Option<Rational> {
    let mut all: Vec<&Interval> = a.iter().chain(b).collect();
    all.sort_by(|x, y| x.start.cmp(&y.start));
    let mut covered = Bound::Finite(Rational::zero());
    for iv in all {
        let Bound::Finite(reach) = &covered else {
            return None;
        };
        if iv.start > *reach {
            return Some((reach + &iv.start) / Rational::from_integer(BigInt::from(2)));
        }
        if iv.end > covered {
            covered = iv.end.clone();
        }
    }
    covered.finite().map(|reach| reach + Rational::from_integer(BigInt::from(1)))
}

/// `h = g ∘ a` with `a(t) = min A ∩ [t, ∞)` and `g(∞) = 0`.
fn compose_with_a(g: &StepFunction, a_set: &[Interval]) -> StepFunction {
    // Gaps of A as (start, end) with end = None for an unbounded gap.
    let mut gaps: Vec<(Rational, Option<Rational>)> = a_set
        .windows(2)
        .filter_map(|w| w[0].end.finite().map(|e| (e.clone(), Some(w[1].start.clone()))))
        .collect();
    if let Some(e) = a_set.last().and_then(|iv| iv.end.finite()) {
        gaps.push((e.clone(), None));
    }
    let mut cuts: Vec<Rational> = g.breakpoints().to_vec();
    for (s, e) in &gaps {
        cuts.push(s.clone());
        cuts.extend(e.clone());
    }
    cuts.retain(|t| t.is_positive());
    cuts.sort();
    cuts.dedup();
    let mut start = Rational::zero();
    let mut ends = Vec::with_capacity(cuts.len());
    for end in cuts {
        let gap = gaps.iter().find(|(s, e)| *s <= start && e.as_ref().is_none_or(|e| end <= *e));
        let value = match gap {
            Some((_, Some(e))) => g.eval(e),
            Some((_, None)) => Real::zero(),
            None => g.eval(&start),
        };
        ends.push((end.clone(), value));
        start = end;
    }
    StepFunction::from_ends(g.alpha().clone(), ends)
}

/// `∫_t^∞ f^q ≥ ∫_t^∞ l^q` at every knot of either tail curve, without rearranging `l`.
pub fn tail_dominates(f: &StepFunction, l: &StepFunction, q: f64) -> bool {
    let (fc, lc) = (f.power(q).antiderivative(), l.power(q).antiderivative());
    let (ft, lt) = (fc.total().clone(), lc.total().clone());
    let scale = ft.clone().max(lt.clone());
    let mut knots: Vec<Rational> = fc.knots().iter().chain(lc.knots()).cloned().collect();
    knots.sort();
    knots.dedup();
    knots.iter().all(|t| nonnegative_gap(&((&ft - &fc.at(t)) - (&lt - &lc.at(t))), &scale))
}

pub fn decompose_k(f: &StepFunction, g: &StepFunction, p: f64, q: f64) -> Result<Decomposition> {
    check_exponents(p, q)?;
    if !f.is_non_increasing() || !g.is_non_increasing() {
        return Err(Error::NotMonotone);
    }
    if f.alpha() != g.alpha() {
        return Err(Error::AlphaMismatch);
    }
    let powers = [f.power(p), g.power(p), f.power(q), g.power(q)];
    let exact = powers.iter().all(StepFunction::is_exact);
    let [fp, gp, fq, gq] = powers.map(|u| u.map_values(Real::rationalized).antiderivative());
    // Approximate powers put the zeros of the curves only within round-off of their
    // true position, so coverage is judged on levels raised by the float slack.
    let level_sets = |knots: &[Rational], levels: Vec<Rational>, scale: &Real| {
        let exact_set = nonnegative_set(knots, &levels);
        if exact {
            return Ok::<_, Error>((exact_set.clone(), exact_set));
        }
        let tol = rat_from_f64(slack(scale.to_f64()))?;
        let raised: Vec<Rational> = levels.into_iter().map(|y| y + &tol).collect();
        Ok((exact_set, nonnegative_set(knots, &raised)))
    };
    let (knots, d) = difference_curve(&fp, &gp);
    let (a_set, a_cover) = level_sets(&knots, d, &fp.total().clone().max(gp.total().clone()))?;
    let (knots, e) = difference_curve(&fq, &gq);
    let total = e.last().expect("origin level").clone();
    let tails: Vec<Rational> = e.iter().map(|x| &total - x).collect();
    let (b_set, b_cover) = level_sets(&knots, tails, &fq.total().clone().max(gq.total().clone()))?;
    if let Some(witness) = first_uncovered(&a_cover, &b_cover) {
        return Err(Error::HypothesisFailed { witness });
    }
    let h = compose_with_a(g, &a_set);
    let l = g.sub_clamped(&h)?;
    let sum = h.add(&l)?;
    if !sum.ge_pointwise(g) || !g.ge_pointwise(&sum) || !h.is_non_increasing() {
        return Err(Error::PostconditionViolated("h + l = g with h non-increasing".into()));
    }
    let head = left_majorizes(f, &h, p);
    if !head.holds {
        return Err(Error::PostconditionViolated(format!("f^p ≻ h^p fails with margin {}", head.margin)));
    }
    if !tail_dominates(f, &l, q) {
        return Err(Error::PostconditionViolated("tail integrals of l^q exceed those of f^q".into()));
    }
    Ok(Decomposition { h, l, a_set, b_set })
}

pub fn decompose_sequence(u: &SeqView, v: &SeqView, p: f64, q: f64) -> Result<SequenceDecomposition> {
    check_exponents(p, q)?;
    if !u.is_non_increasing() || !v.is_non_increasing() {
        return Err(Error::NotMonotone);
    }
    let (f, g) = (u.to_step(), v.to_step());
    let d = decompose_k(&f, &g, p, q)?;
    let (hbar, lbar) = (d.h.condexp_unit(p), d.l.condexp_unit(q));
    let bound_constant = quasi_triangle_constant(p) * quasi_triangle_constant(1.0 / p);
    let (hs, ls) = (hbar.to_step(), lbar.to_step());
    if !left_majorizes(&f, &hs, p).holds || !tail_dominates(&f, &ls, q) {
        return Err(Error::PostconditionViolated("averaged parts lose their majorization".into()));
    }
    let c = Real::Approx(bound_constant);
    let bounded = (0..v.len()).all(|i| (&c * &(hbar.get(i) + lbar.get(i))).ge_tol(&v.get(i)));
    if !bounded {
        return Err(Error::PostconditionViolated(format!("v exceeds {bound_constant}·(hbar + lbar)")));
    }
    Ok(SequenceDecomposition { hbar, lbar, bound_constant })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{int, rat};

    fn steps(ends: &[(Rational, Real)]) -> StepFunction {
        let (b, v): (Vec<_>, Vec<_>) = ends.iter().cloned().unzip();
        StepFunction::new(b, v, Bound::Infinite).unwrap()
    }

    fn iv(a: Rational, b: Option<Rational>) -> Interval {
        Interval::new(a, b.map_or(Bound::Infinite, Bound::Finite))
    }

    #[test]
    fn identity_pair() {
        let f = steps(&[(int(1), Real::int(2)), (int(3), Real::one())]);
        let d = decompose_k(&f, &f, 1.0, 2.0).unwrap();
        assert_eq!(d.a_set, vec![iv(int(0), None)]);
        assert_eq!(d.h, f);
        assert!(d.l.is_zero());
        assert_eq!(d.a_of(&rat(5, 2)), Some(rat(5, 2)));
    }

    #[test]
    fn concentrated_target() {
        let f = StepFunction::constant(int(1), Real::one());
        let g = StepFunction::constant(rat(1, 4), Real::int(2));
        let d = decompose_k(&f, &g, 1.0, 2.0).unwrap();
        assert_eq!(d.a_set, vec![iv(int(0), Some(int(0))), iv(rat(1, 2), None)]);
        assert!(d.h.is_zero());
        assert_eq!(d.l, g);
        for t in [rat(0, 1), rat(1, 8), rat(1, 4), rat(1, 2)] {
            let lt = d.l.integral_power(2.0, &t, &Bound::Infinite);
            let ft = f.integral_power(2.0, &t, &Bound::Infinite);
            assert_eq!(lt, Real::Exact((int(1) - int(4) * &t).max(Rational::zero())));
            assert!(lt <= ft);
        }
    }

    #[test]
    fn zero_target() {
        let f = StepFunction::constant(int(1), Real::one());
        let d = decompose_k(&f, &StepFunction::zero(Bound::Infinite), 1.0, 2.0).unwrap();
        assert!(d.h.is_zero() && d.l.is_zero());
    }

    #[test]
    fn isolated_point_of_a() {
        let f = steps(&[(int(2), Real::one()), (int(10), Real::ratio(1, 4))]);
        let g = steps(&[(int(1), Real::ratio(3, 2)), (int(3), Real::ratio(1, 2))]);
        let d = decompose_k(&f, &g, 1.0, 1.0).unwrap();
        assert_eq!(d.a_set, vec![iv(int(0), Some(int(0))), iv(int(2), Some(int(2))), iv(int(4), None)]);
        assert_eq!(d.h, StepFunction::constant(int(2), Real::ratio(1, 2)));
        // Right-continuous values at a(t) = 2 disagree with the left-continuous reading.
        assert!(f.eval(&int(2)) < g.eval(&int(2)));
        assert!(d.h.ge_pointwise(&StepFunction::zero(Bound::Infinite)) && f.ge_pointwise(&d.h));
    }

    #[test]
    fn hypothesis_failure_has_finite_witness() {
        let f = steps(&[(int(1), Real::int(2)), (int(3), Real::one())]);
        let g = f.scale(&Real::ratio(101, 100));
        match decompose_k(&f, &g, 1.0, 2.0) {
            Err(Error::HypothesisFailed { witness }) => assert!(witness.is_positive() && witness < int(3)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn exponent_checks() {
        let f = StepFunction::constant(int(1), Real::one());
        assert!(matches!(decompose_k(&f, &f, 2.0, 1.0), Err(Error::BadExponents { .. })));
        assert!(matches!(decompose_k(&f, &f, 1.0, f64::INFINITY), Err(Error::BadExponents { .. })));
    }

    #[test]
    fn irrational_exponents() {
        let f = steps(&[(int(1), Real::int(3)), (int(4), Real::one())]);
        let g = steps(&[(int(2), Real::int(2)), (int(3), Real::one())]);
        let d = decompose_k(&f, &g, 0.5, 1.5).unwrap();
        assert_eq!(d.h.add(&d.l).unwrap(), g);
    }

    #[test]
    fn sequences() {
        let seq = |xs: &[Real]| SeqView::new(xs.to_vec()).unwrap();
        let u = seq(&[Real::int(3), Real::one()]);
        let s = decompose_sequence(&u, &u, 1.0, 2.0).unwrap();
        assert_eq!(s.hbar, u);
        assert!(s.lbar.entries().iter().all(Real::is_zero));
        assert_eq!(s.bound_constant, 1.0);

        let u = seq(&[Real::one()]);
        let v = seq(&[Real::ratio(1, 2), Real::ratio(1, 2)]);
        let s = decompose_sequence(&u, &v, 1.0, 2.0).unwrap();
        let d = decompose_k(&u.to_step(), &v.to_step(), 1.0, 2.0).unwrap();
        assert_eq!(s.hbar, d.h.condexp_unit(1.0));
        assert_eq!(s.lbar, d.l.condexp_unit(2.0));
        assert_eq!(s.bound_constant, 1.0);

        let zero = decompose_sequence(&u, &seq(&[]), 2.0, 3.0).unwrap();
        assert!(zero.hbar.is_empty() && zero.lbar.is_empty());
        assert_eq!(zero.bound_constant, 2.0);

        let averaged = decompose_sequence(&seq(&[Real::int(2), Real::one()]), &seq(&[Real::ratio(3, 2), Real::ratio(3, 2)]), 1.0, 2.0);
        assert!(averaged.is_ok());
    }

    #[test]
    fn json_names_the_sets() {
        let f = StepFunction::constant(int(1), Real::one());
        let d = decompose_k(&f, &f, 1.0, 2.0).unwrap();
        let json = serde_json::to_value(&d).unwrap();
        assert!(json.get("A").is_some() && json.get("B").is_some());
        let back: Decomposition = serde_json::from_value(json).unwrap();
        assert_eq!(back, d);
    }
}
