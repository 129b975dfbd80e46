//! Finitely supported right-continuous step functions on `(0, α)`.
//!
//! Value `values[i]` is held on `[breakpoints[i-1], breakpoints[i])` with an
//! implicit leading breakpoint at 0; the function vanishes past the last
//! breakpoint. Every value of this type is canonical: adjacent pieces differ
//! and the last piece is nonzero, so structural equality is a.e. equality.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{rat_from_f64, rat_to_f64, rational_vec, Bound, Rational, Real};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "StepFunctionRepr", into = "StepFunctionRepr")]
pub struct StepFunction {
    alpha: Bound,
    breakpoints: Vec<Rational>,
    values: Vec<Real>,
}

#[derive(Serialize, Deserialize)]
struct StepFunctionRepr {
    alpha: Bound,
    #[serde(with = "rational_vec")]
    breakpoints: Vec<Rational>,
    values: Vec<Real>,
}

impl TryFrom<StepFunctionRepr> for StepFunction {
    type Error = Error;
    fn try_from(r: StepFunctionRepr) -> Result<Self> {
        StepFunction::new(r.breakpoints, r.values, r.alpha)
    }
}

impl From<StepFunction> for StepFunctionRepr {
    fn from(f: StepFunction) -> Self {
        StepFunctionRepr { alpha: f.alpha, breakpoints: f.breakpoints, values: f.values }
    }
}

/// One constant piece `[start, end)` of a step function.
#[derive(Clone, Debug)]
pub struct Piece<'a> {
    pub start: &'a Rational,
    pub end: &'a Rational,
    pub value: &'a Real,
}

impl Piece<'_> {
    pub fn length(&self) -> Rational {
        self.end - self.start
    }
}

/// Closed interval `[start, end]`, with `end` possibly infinite.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    #[serde(with = "crate::numeric::rational_str")]
    pub start: Rational,
    pub end: Bound,
}

impl Interval {
    pub fn new(start: Rational, end: Bound) -> Self {
        Interval { start, end }
    }

    pub fn contains(&self, t: &Rational) -> bool {
        &self.start <= t && self.end.admits(t)
    }
}

/// Sorted, disjoint union of closed intervals.
pub type IntervalSet = Vec<Interval>;

/// Continuous piecewise affine antiderivative `t ↦ ∫_0^t f` of a step function.
#[derive(Clone, Debug)]
pub struct Cumulative {
    // knots[0] = 0; slope[i] is held on [knots[i], knots[i+1]); zero slope afterwards.
    knots: Vec<Rational>,
    levels: Vec<Real>,
    slopes: Vec<Real>,
}

impl Cumulative {
    pub fn knots(&self) -> &[Rational] {
        &self.knots
    }

    pub fn levels(&self) -> &[Real] {
        &self.levels
    }

    pub fn slopes(&self) -> &[Real] {
        &self.slopes
    }

    pub fn total(&self) -> &Real {
        self.levels.last().expect("at least the origin knot")
    }

    pub fn at(&self, t: &Rational) -> Real {
        if !t.is_positive() {
            return Real::zero();
        }
        let i = match self.knots.binary_search(t) {
            Ok(i) => return self.levels[i].clone(),
            Err(i) => i - 1,
        };
        match self.slopes.get(i) {
            Some(s) => &self.levels[i] + &s.mul_rat(&(t - &self.knots[i])),
            None => self.total().clone(),
        }
    }
}

/// Rounding direction for [`StepFunction::discretize_geometric`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rounding {
    Up,
    Down,
}

fn check_value(v: &Real) -> Result<()> {
    if !v.is_finite() || v.is_negative() {
        return Err(Error::NonCanonicalInput(format!("value {v} is not finite and nonnegative")));
    }
    Ok(())
}

impl StepFunction {
    /// Builds the canonical form of the described function.
    pub fn new(breakpoints: Vec<Rational>, values: Vec<Real>, alpha: Bound) -> Result<Self> {
        if breakpoints.len() != values.len() {
            return Err(Error::NonCanonicalInput(format!(
                "{} breakpoints but {} values",
                breakpoints.len(),
                values.len()
            )));
        }
        let mut prev = Rational::zero();
        for t in &breakpoints {
            if *t <= prev {
                return Err(Error::NonCanonicalInput("breakpoints must be positive and strictly increasing".into()));
            }
            prev = t.clone();
        }
        if let Some(last) = breakpoints.last() {
            if !alpha.admits(last) {
                return Err(Error::NonCanonicalInput(format!("breakpoint {last} exceeds alpha {alpha}")));
            }
        }
        if let Bound::Finite(a) = &alpha {
            if !a.is_positive() {
                return Err(Error::NonCanonicalInput("alpha must be positive".into()));
            }
        }
        for v in &values {
            check_value(v)?;
        }
        Ok(Self::from_ends(alpha, breakpoints.into_iter().zip(values)))
    }

    /// Canonicalizing constructor over `(end, value)` pairs; pieces that do not
    /// extend past the previous end are dropped and ends are clipped to `alpha`.
    pub(crate) fn from_ends(alpha: Bound, pieces: impl IntoIterator<Item = (Rational, Real)>) -> Self {
        let mut breakpoints: Vec<Rational> = Vec::new();
        let mut values: Vec<Real> = Vec::new();
        for (end, value) in pieces {
            let end = alpha.min_with(&end);
            let start = breakpoints.last().cloned().unwrap_or_else(Rational::zero);
            if end <= start {
                continue;
            }
            debug_assert!(value.is_finite() && !value.is_negative(), "bad value {value}");
            match values.last() {
                Some(v) if *v == value => *breakpoints.last_mut().expect("paired") = end,
                _ => {
                    breakpoints.push(end);
                    values.push(value);
                }
            }
        }
        while values.last().is_some_and(Real::is_zero) {
            values.pop();
            breakpoints.pop();
        }
        StepFunction { alpha, breakpoints, values }
    }

    pub fn zero(alpha: Bound) -> Self {
        StepFunction { alpha, breakpoints: Vec::new(), values: Vec::new() }
    }

    /// `value · 1_{(0, len)}` on `(0, ∞)`.
    pub fn constant(len: Rational, value: Real) -> Self {
        Self::from_ends(Bound::Infinite, [(len, value)])
    }

    /// Unit-length pieces with the given values, on `(0, ∞)`.
    pub fn from_unit_values(values: impl IntoIterator<Item = Real>) -> Self {
        let pieces = values.into_iter().enumerate().map(|(i, v)| (Rational::from_integer(BigInt::from(i + 1)), v));
        Self::from_ends(Bound::Infinite, pieces)
    }

    pub fn alpha(&self) -> &Bound {
        &self.alpha
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[Real] {
        &self.values
    }

    pub fn num_pieces(&self) -> usize {
        self.values.len()
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    /// Whether every value is held exactly.
    pub fn is_exact(&self) -> bool {
        self.values.iter().all(Real::is_exact)
    }

    /// Right end of the support (0 for the zero function).
    pub fn support_end(&self) -> Rational {
        self.breakpoints.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn pieces(&self) -> impl Iterator<Item = Piece<'_>> + '_ {
        static ZERO: std::sync::OnceLock<Rational> = std::sync::OnceLock::new();
        let zero = ZERO.get_or_init(Rational::zero);
        self.breakpoints.iter().zip(&self.values).enumerate().map(move |(i, (end, value))| Piece {
            start: if i == 0 { zero } else { &self.breakpoints[i - 1] },
            end,
            value,
        })
    }

    /// Value at `t` under the right-continuous convention.
    pub fn eval(&self, t: &Rational) -> Real {
        if t.is_negative() {
            return Real::zero();
        }
        match self.breakpoints.binary_search(t) {
            Ok(i) => self.values.get(i + 1).cloned().unwrap_or_else(Real::zero),
            Err(i) => self.values.get(i).cloned().unwrap_or_else(Real::zero),
        }
    }

    pub fn sup(&self) -> Real {
        self.values.iter().cloned().max().unwrap_or_else(Real::zero)
    }

    pub fn is_non_increasing(&self) -> bool {
        self.values.windows(2).all(|w| w[0] >= w[1])
    }

    /// Non-increasing rearrangement `f*`.
    pub fn rearrange(&self) -> StepFunction {
        if self.is_non_increasing() && self.values.iter().all(|v| !v.is_zero()) {
            return self.clone();
        }
        let mut pieces: Vec<(Rational, &Real)> =
            self.pieces().filter(|p| !p.value.is_zero()).map(|p| (p.length(), p.value)).collect();
        pieces.sort_by(|a, b| b.1.cmp(a.1));
        let mut end = Rational::zero();
        let ends: Vec<(Rational, Real)> = pieces
            .into_iter()
            .map(|(len, v)| {
                end += len;
                (end.clone(), v.clone())
            })
            .collect();
        Self::from_ends(self.alpha.clone(), ends)
    }

    /// `|{f > s}|`.
    pub fn distribution(&self, s: &Real) -> Rational {
        self.pieces().filter(|p| p.value > s).map(|p| p.length()).sum()
    }

    /// `∫_a^b f^p`; exact whenever the powers of the values are.
    pub fn integral_power(&self, p: f64, a: &Rational, b: &Bound) -> Real {
        if p == 1.0 {
            return self.integral_over(a, b);
        }
        self.power(p).integral_over(a, b)
    }

    /// `∫_a^b f`.
    pub fn integral_over(&self, a: &Rational, b: &Bound) -> Real {
        let mut total = Real::zero();
        for piece in self.pieces() {
            let lo = piece.start.max(a);
            let hi = b.min_with(piece.end);
            if hi > *lo {
                total = total + piece.value.mul_rat(&(hi - lo));
            }
        }
        total
    }

    pub fn integral(&self) -> Real {
        self.integral_over(&Rational::zero(), &Bound::Infinite)
    }

    /// `t ↦ ∫_0^t f` as an exact piecewise affine curve.
    pub fn antiderivative(&self) -> Cumulative {
        let mut knots = vec![Rational::zero()];
        let mut levels = vec![Real::zero()];
        let mut slopes = Vec::with_capacity(self.values.len());
        for piece in self.pieces() {
            let next = levels.last().expect("nonempty") + &piece.value.mul_rat(&piece.length());
            knots.push(piece.end.clone());
            levels.push(next);
            slopes.push(piece.value.clone());
        }
        Cumulative { knots, levels, slopes }
    }

    /// `‖f‖_p = (∫ f^p)^{1/p}`.
    pub fn lp_norm(&self, p: f64) -> Real {
        self.integral_power(p, &Rational::zero(), &Bound::Infinite).root(p)
    }

    pub fn map_values(&self, op: impl Fn(&Real) -> Real) -> StepFunction {
        Self::from_ends(self.alpha.clone(), self.pieces().map(|p| (p.end.clone(), op(p.value))))
    }

    /// Pointwise `f^r`.
    pub fn power(&self, r: f64) -> StepFunction {
        if r == 1.0 {
            return self.clone();
        }
        let e = Rational::from_float(r);
        self.map_values(|v| match &e {
            Some(e) => v.pow(e),
            None => v.powf(r),
        })
    }

    /// Pointwise `f^{1/r}`.
    pub fn root(&self, r: f64) -> StepFunction {
        if r == 1.0 {
            return self.clone();
        }
        self.map_values(|v| v.root(r))
    }

    /// Pointwise `c·f` for `c ≥ 0`.
    pub fn scale(&self, c: &Real) -> StepFunction {
        self.map_values(|v| v * c)
    }

    /// Sorted union of the breakpoints of all operands.
    pub fn merged_grid(fs: &[&StepFunction]) -> Vec<Rational> {
        let mut grid: Vec<Rational> = fs.iter().flat_map(|f| f.breakpoints.iter().cloned()).collect();
        grid.sort();
        grid.dedup();
        grid
    }

    /// Applies `op` cellwise on the merged grid of `self` and `other`.
    pub fn zip_with(&self, other: &StepFunction, op: impl Fn(&Real, &Real) -> Real) -> Result<StepFunction> {
        if self.alpha != other.alpha {
            return Err(Error::AlphaMismatch);
        }
        let grid = Self::merged_grid(&[self, other]);
        let (mut i, mut j) = (0, 0);
        let zero = Real::zero();
        let pieces: Vec<(Rational, Real)> = grid
            .into_iter()
            .map(|t| {
                let a = self.values.get(i).unwrap_or(&zero);
                let b = other.values.get(j).unwrap_or(&zero);
                let v = op(a, b);
                if self.breakpoints.get(i) == Some(&t) {
                    i += 1;
                }
                if other.breakpoints.get(j) == Some(&t) {
                    j += 1;
                }
                (t, v)
            })
            .collect();
        Ok(Self::from_ends(self.alpha.clone(), pieces))
    }

    pub fn add(&self, other: &StepFunction) -> Result<StepFunction> {
        self.zip_with(other, |a, b| a + b)
    }

    /// `(f − g)₊`; float round-off below zero is clipped.
    pub fn sub_clamped(&self, other: &StepFunction) -> Result<StepFunction> {
        self.zip_with(other, |a, b| (a - b).max(Real::zero()))
    }

    pub fn max(&self, other: &StepFunction) -> Result<StepFunction> {
        self.zip_with(other, |a, b| a.clone().max(b.clone()))
    }

    pub fn min(&self, other: &StepFunction) -> Result<StepFunction> {
        self.zip_with(other, |a, b| a.clone().min(b.clone()))
    }

    /// `self ≥ other` on every cell of the merged grid, up to the float slack.
    pub fn ge_pointwise(&self, other: &StepFunction) -> bool {
        self.zip_with(other, |a, b| if a.ge_tol(b) { Real::zero() } else { Real::one() })
            .is_ok_and(|d| d.is_zero())
    }

    /// `f · 1_S` for a finite union of intervals `S`.
    pub fn restrict(&self, set: &[Interval]) -> StepFunction {
        let mut cuts: Vec<Rational> = self.breakpoints.clone();
        for iv in set {
            if iv.start.is_positive() {
                cuts.push(iv.start.clone());
            }
            if let Bound::Finite(e) = &iv.end {
                if e.is_positive() {
                    cuts.push(e.clone());
                }
            }
        }
        cuts.retain(|t| *t <= self.support_end());
        cuts.sort();
        cuts.dedup();
        let mut start = Rational::zero();
        let pieces: Vec<(Rational, Real)> = cuts
            .into_iter()
            .map(|end| {
                let mid = (&start + &end) / Rational::from_integer(2.into());
                let inside = set.iter().any(|iv| iv.contains(&mid));
                let v = if inside { self.eval(&mid) } else { Real::zero() };
                start = end.clone();
                (end, v)
            })
            .collect();
        Self::from_ends(self.alpha.clone(), pieces)
    }

    /// Dilation `D_t f : s ↦ f(s/t)`, zero from `α` on.
    pub fn dilate(&self, t: &Rational) -> Result<StepFunction> {
        if !t.is_positive() {
            return Err(Error::InvalidArgument("dilation factor must be positive".into()));
        }
        Ok(Self::from_ends(self.alpha.clone(), self.pieces().map(|p| (p.end * t, p.value.clone()))))
    }

    /// Dyadic approximation from below: on the cell `[k/2^n, (k+1)/2^n)` take the
    /// value at the right extremity of the cell; zero past `2^n`.
    pub fn dyadic_approx(&self, n: u32) -> Result<StepFunction> {
        if !self.is_non_increasing() {
            return Err(Error::NotMonotone);
        }
        let cell = Rational::new(BigInt::one(), BigInt::one() << n);
        let horizon = Rational::from_integer(BigInt::one() << n);
        let pieces = self.pieces().map(|p| {
            let k = (p.end / &cell).ceil() - Rational::one();
            let end = (k * &cell).min(horizon.clone());
            (end, p.value.clone())
        });
        Ok(Self::from_ends(self.alpha.clone(), pieces))
    }

    /// Rounds `f*` to powers of `d`: `d^{⌊log_d f*⌋+1}` (up) or `d^{⌊log_d f*⌋}` (down).
    pub fn discretize_geometric(&self, d: f64, mode: Rounding) -> Result<StepFunction> {
        if !(d > 1.0) || !d.is_finite() {
            return Err(Error::BadBase(d));
        }
        let base = rat_from_f64(d)?;
        Ok(self.rearrange().map_values(|v| {
            if v.is_zero() {
                return Real::zero();
            }
            let k = floor_log(&v.to_rational(), &base, d);
            Real::Exact(int_pow(&base, if mode == Rounding::Up { k + 1 } else { k }))
        }))
    }

    /// `(∫_{i-1}^{i} h^p)^{1/p}` for each unit cell meeting the support.
    pub fn condexp_unit(&self, p: f64) -> SeqView {
        let n = self.support_end().ceil().to_integer().to_usize().unwrap_or(0);
        let hp = self.power(p);
        let entries = (0..n)
            .map(|i| {
                let a = Rational::from_integer(BigInt::from(i));
                let b = Bound::Finite(Rational::from_integer(BigInt::from(i + 1)));
                hp.integral_over(&a, &b).root(p)
            })
            .collect();
        SeqView { entries }
    }

    /// Whether the function is constant on every cell of width `2^{-n}`.
    pub fn is_on_dyadic_grid(&self, n: u32) -> bool {
        let scale = BigInt::one() << n;
        self.breakpoints.iter().all(|t| (t * Rational::from_integer(scale.clone())).is_integer())
    }

    /// Approximate values as `f64`, for diagnostics and float-only consumers.
    pub fn values_f64(&self) -> Vec<f64> {
        self.values.iter().map(Real::to_f64).collect()
    }

    pub fn breakpoints_f64(&self) -> Vec<f64> {
        self.breakpoints.iter().map(rat_to_f64).collect()
    }
}

fn int_pow(base: &Rational, k: i64) -> Rational {
    let e = k.unsigned_abs() as usize;
    let r = num_traits::pow(base.clone(), e);
    if k < 0 {
        r.recip()
    } else {
        r
    }
}

/// Exact `⌊log_d v⌋` for `v > 0`.
fn floor_log(v: &Rational, base: &Rational, d: f64) -> i64 {
    let guess = (rat_to_f64(v).ln() / d.ln()).floor();
    let mut k = if guess.is_finite() { guess as i64 } else { 0 };
    while int_pow(base, k) > *v {
        k -= 1;
    }
    while int_pow(base, k + 1) <= *v {
        k += 1;
    }
    k
}

/// A finite nonnegative sequence viewed as `Σ u_i 1_{[i-1, i)}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SeqView {
    entries: Vec<Real>,
}

impl SeqView {
    pub fn new(entries: Vec<Real>) -> Result<Self> {
        for v in &entries {
            check_value(v)?;
        }
        Ok(SeqView { entries })
    }

    pub fn entries(&self) -> &[Real] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_non_increasing(&self) -> bool {
        self.entries.windows(2).all(|w| w[0] >= w[1])
    }

    pub fn to_step(&self) -> StepFunction {
        StepFunction::from_unit_values(self.entries.iter().cloned())
    }

    /// Entry `i` (zero past the end).
    pub fn get(&self, i: usize) -> Real {
        self.entries.get(i).cloned().unwrap_or_else(Real::zero)
    }
}

/// Sorted values in non-increasing order, used by callers comparing finite vectors.
pub fn sort_desc(v: &mut [Real]) {
    v.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
}

/// `2^{-n}` as a rational.
pub fn dyadic_cell(n: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << n)
}

/// `⌈x⌉` of a nonnegative rational as a `usize`.
pub fn ceil_usize(x: &Rational) -> usize {
    x.ceil().to_integer().to_usize().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{int, rat};

    fn sf(bps: &[(i64, i64)], vals: &[Real]) -> StepFunction {
        StepFunction::new(bps.iter().map(|&(n, d)| rat(n, d)).collect(), vals.to_vec(), Bound::Infinite).unwrap()
    }

    fn r(n: i64, d: i64) -> Real {
        Real::ratio(n, d)
    }

    #[test]
    fn make_examples() {
        let f = sf(&[(1, 1)], &[r(1, 1)]);
        assert_eq!(f.breakpoints(), &[int(1)]);
        let merged = sf(&[(1, 1), (2, 1)], &[r(3, 1), r(3, 1)]);
        assert_eq!(merged, StepFunction::constant(int(2), Real::int(3)));
        let shifted = sf(&[(1, 1), (2, 1)], &[r(0, 1), r(1, 1)]);
        assert_eq!(shifted.breakpoints(), &[int(1), int(2)]);
        assert_eq!(shifted.eval(&rat(1, 2)), Real::zero());
        assert_eq!(shifted.eval(&int(1)), Real::one());
        assert_eq!(shifted.eval(&int(2)), Real::zero());
    }

    #[test]
    fn make_rejects_bad_input() {
        let bad = |b: Vec<Rational>, v: Vec<Real>, a: Bound| StepFunction::new(b, v, a).is_err();
        assert!(bad(vec![int(2), int(1)], vec![r(1, 1), r(1, 1)], Bound::Infinite));
        assert!(bad(vec![int(1)], vec![r(-1, 1)], Bound::Infinite));
        assert!(bad(vec![int(0)], vec![r(1, 1)], Bound::Infinite));
        assert!(bad(vec![int(2)], vec![r(1, 1)], Bound::Finite(int(1))));
        assert!(bad(vec![int(1)], vec![], Bound::Infinite));
        assert!(bad(vec![int(1)], vec![Real::Approx(f64::NAN)], Bound::Infinite));
    }

    #[test]
    fn rearrange_examples() {
        let f = sf(&[(1, 1), (2, 1), (3, 1)], &[r(1, 1), r(3, 1), r(2, 1)]);
        assert_eq!(f.rearrange(), sf(&[(1, 1), (2, 1), (3, 1)], &[r(3, 1), r(2, 1), r(1, 1)]));
        let dec = sf(&[(1, 1), (3, 1)], &[r(2, 1), r(1, 1)]);
        assert_eq!(dec.rearrange(), dec);
        let shifted = sf(&[(5, 1), (6, 1)], &[r(0, 1), r(2, 1)]);
        assert_eq!(shifted.rearrange(), StepFunction::constant(int(1), Real::int(2)));
    }

    #[test]
    fn integral_power_examples() {
        let ind = StepFunction::constant(int(1), Real::one());
        assert_eq!(ind.integral_power(2.0, &int(0), &Bound::Finite(rat(1, 2))), r(1, 2));
        let two = StepFunction::constant(int(1), Real::int(2));
        assert_eq!(two.integral_power(3.0, &int(0), &Bound::Finite(int(1))), Real::int(8));
        let f = sf(&[(1, 1), (2, 1)], &[r(3, 1), r(1, 1)]);
        let v = f.integral_power(1.0, &rat(1, 2), &Bound::Finite(int(2)));
        assert_eq!(v, r(5, 2));
        assert!(v.is_exact());
    }

    #[test]
    fn distribution_examples() {
        let ind = StepFunction::constant(int(1), Real::one());
        assert_eq!(ind.distribution(&r(1, 2)), int(1));
        assert_eq!(ind.distribution(&r(1, 1)), int(0));
        let f = sf(&[(1, 1), (2, 1)], &[r(3, 1), r(1, 1)]);
        assert_eq!(f.distribution(&r(2, 1)), int(1));
    }

    #[test]
    fn pointwise_examples() {
        let ind = StepFunction::constant(int(1), Real::one());
        let half2 = StepFunction::constant(int(2), r(1, 2));
        assert_eq!(ind.max(&half2).unwrap(), sf(&[(1, 1), (2, 1)], &[r(1, 1), r(1, 2)]));
        let four = StepFunction::constant(int(1), Real::int(4));
        assert_eq!(four.power(0.5), StepFunction::constant(int(1), Real::int(2)));
        let ind2 = StepFunction::constant(int(2), Real::one());
        assert_eq!(ind.add(&ind2).unwrap(), sf(&[(1, 1), (2, 1)], &[r(2, 1), r(1, 1)]));
        assert_eq!(ind.min(&half2).unwrap(), StepFunction::constant(int(1), r(1, 2)));
        let other = StepFunction::new(vec![int(1)], vec![Real::one()], Bound::Finite(int(3))).unwrap();
        assert_eq!(ind.add(&other), Err(Error::AlphaMismatch));
    }

    #[test]
    fn restrict_to_set() {
        let f = StepFunction::constant(int(4), Real::one());
        let set = vec![Interval::new(int(0), Bound::Finite(int(1))), Interval::new(int(3), Bound::Infinite)];
        assert_eq!(f.restrict(&set), sf(&[(1, 1), (3, 1), (4, 1)], &[r(1, 1), r(0, 1), r(1, 1)]));
    }

    #[test]
    fn dilate_examples() {
        let ind = StepFunction::constant(int(1), Real::one());
        assert_eq!(ind.dilate(&int(2)).unwrap(), StepFunction::constant(int(2), Real::one()));
        assert_eq!(ind.dilate(&int(1)).unwrap(), ind);
        let on_unit = StepFunction::new(vec![int(1)], vec![Real::one()], Bound::Finite(int(1))).unwrap();
        assert_eq!(on_unit.dilate(&int(2)).unwrap(), on_unit);
    }

    #[test]
    fn dyadic_approx_examples() {
        let ind = StepFunction::constant(int(1), Real::one());
        assert_eq!(ind.dyadic_approx(1).unwrap(), StepFunction::constant(rat(1, 2), Real::one()));
        assert!(StepFunction::zero(Bound::Infinite).dyadic_approx(3).unwrap().is_zero());
        // Dyadic input: only the cell meeting each jump changes.
        let g = sf(&[(1, 2), (3, 2)], &[r(2, 1), r(1, 1)]);
        assert_eq!(g.dyadic_approx(1).unwrap(), sf(&[(1, 2), (1, 1)], &[r(1, 1), r(1, 1)]));
        assert_eq!(g.dyadic_approx(1).unwrap(), StepFunction::constant(int(1), Real::one()));
        // Support beyond 2^n is cut.
        let long = StepFunction::constant(int(10), Real::one());
        assert_eq!(long.dyadic_approx(2).unwrap(), StepFunction::constant(int(4), Real::one()));
        let up = sf(&[(1, 1), (2, 1)], &[r(1, 1), r(2, 1)]);
        assert_eq!(up.dyadic_approx(1), Err(Error::NotMonotone));
    }

    #[test]
    fn discretize_examples() {
        let f = StepFunction::constant(int(1), r(3, 2));
        assert_eq!(f.discretize_geometric(2.0, Rounding::Up).unwrap(), StepFunction::constant(int(1), Real::int(2)));
        assert_eq!(f.discretize_geometric(2.0, Rounding::Down).unwrap(), StepFunction::constant(int(1), Real::one()));
        let ind = StepFunction::constant(int(1), Real::one());
        assert_eq!(ind.discretize_geometric(2.0, Rounding::Down).unwrap(), ind);
        assert_eq!(ind.discretize_geometric(2.0, Rounding::Up).unwrap(), StepFunction::constant(int(1), Real::int(2)));
        let small = StepFunction::constant(int(1), r(3, 16));
        assert_eq!(small.discretize_geometric(2.0, Rounding::Down).unwrap(), StepFunction::constant(int(1), r(1, 8)));
        assert_eq!(ind.discretize_geometric(1.0, Rounding::Up), Err(Error::BadBase(1.0)));
    }

    #[test]
    fn condexp_examples() {
        let h = StepFunction::constant(rat(1, 2), Real::one());
        assert_eq!(h.condexp_unit(1.0).entries(), &[r(1, 2)]);
        let e = h.condexp_unit(2.0);
        assert!((e.entries()[0].to_f64() - 0.5f64.sqrt()).abs() < 1e-15);
        let c = StepFunction::constant(int(1), r(3, 4));
        for p in [0.5, 1.0, 2.0, 3.0] {
            assert!(c.condexp_unit(p).entries()[0].eq_tol(&r(3, 4)));
        }
    }

    #[test]
    fn json_round_trip() {
        let f = sf(&[(1, 2), (3, 1)], &[r(5, 3), Real::Approx(0.1)]);
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"alpha":"inf","breakpoints":["1/2","3"],"values":["5/3",0.1]}"#);
        let back: StepFunction = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
        assert!(serde_json::from_str::<StepFunction>(r#"{"alpha":"1","breakpoints":["2"],"values":[1]}"#).is_err());
    }

    #[test]
    fn cumulative_curve() {
        let f = sf(&[(1, 1), (3, 1)], &[r(2, 1), r(1, 1)]);
        let c = f.antiderivative();
        assert_eq!(c.at(&rat(1, 2)), r(1, 1));
        assert_eq!(c.at(&int(2)), r(3, 1));
        assert_eq!(c.at(&int(10)), r(4, 1));
        assert_eq!(c.total(), &r(4, 1));
    }
}
