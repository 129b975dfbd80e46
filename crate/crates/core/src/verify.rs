//! Named property suites. Each suite runs the invariants of one module over
//! seeded random inputs and reports, per check, the number of cases, the number
//! of failures and the extreme value of the measured quantity.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{concentrate, corpus_element, k_dominated, random_corpus, spread, standard_corpus, trial_rng};
use crate::decompose::{decompose_k, decompose_sequence, tail_dominates};
use crate::error::{Error, Result};
use crate::kfunc::{dyadic_t_grid, k_curve, k_holmstedt, k_oracle, k_p_inf};
use crate::majorize::{left_majorizes, lift_left, lift_right, right_majorizes, Side};
use crate::numeric::{int, rat, slack, Bound, Rational, Real, TAU_REL};
use crate::schurhorn::{birkhoff, compose, khintchine_witness, schur_horn_matrix, symmetric_eigenvalues, tchain};
use crate::spaces::{concavity_witness, monotonicity_probe, norm, weak_l1_stack, SpaceKind, SpaceSpec, Verdict};
use crate::stepfn::{Rounding, SeqView, StepFunction};
use crate::transfer::{apply_transfer, build_transfer, h_bounded, reproduces, slopes_bounded};

/// Frozen band for `k_holmstedt / k_oracle` (and the `(L_p, L_∞)` formula) over the standard corpus.
pub const K_BAND: f64 = 2.0;
/// Ceiling the frozen band may never exceed.
pub const K_BAND_LIMIT: f64 = 8.0;
/// Bound on probe ratios for `L_s` with `s` between the monotonicity exponents.
pub const SANITY_BOUND: f64 = 2.0;
/// Ratio the injected failure families must exceed.
pub const DIVERGENCE_TARGET: f64 = 10.0;
/// Frozen bound on the right-2 probe for weak `L_1`.
pub const WEAK_RIGHT_BOUND: f64 = 1.0 + TAU_REL;
/// Stack sizes whose concavity factor exceeds [`DIVERGENCE_TARGET`], per `q`.
pub const WEAK_STACKS: [(f64, usize); 2] = [(1.0, 32), (2.0, 512)];
/// Largest matrix dimension of the Schur–Horn and witness suites.
pub const MAX_DIMENSION: usize = 32;
/// Random test functions per pair in the transfer suite.
pub const TEST_FUNCTIONS: usize = 100;
pub const TEST_FUNCTION_PIECES: usize = 16;
pub const DIAGONAL_TOLERANCE: f64 = 1e-12;
pub const SPECTRUM_TOLERANCE: f64 = 1e-9;
pub const RECOVERY_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Rearrange,
    Hardy,
    KfuncBand,
    Transfer,
    Decompose,
    Majorize,
    SchurHorn,
    Witness,
    Sanity,
    WeakL1,
}

impl Suite {
    pub const ALL: [Suite; 10] = [
        Suite::Rearrange,
        Suite::Hardy,
        Suite::KfuncBand,
        Suite::Transfer,
        Suite::Decompose,
        Suite::Majorize,
        Suite::SchurHorn,
        Suite::Witness,
        Suite::Sanity,
        Suite::WeakL1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Rearrange => "rearrange",
            Suite::Hardy => "hardy",
            Suite::KfuncBand => "kfunc-band",
            Suite::Transfer => "prop3.2",
            Suite::Decompose => "lemma4.3",
            Suite::Majorize => "lemma5.3",
            Suite::SchurHorn => "schur-horn",
            Suite::Witness => "witness",
            Suite::Sanity => "thm4.1-sanity",
            Suite::WeakL1 => "weak-l1",
        }
    }

    pub fn default_trials(self) -> usize {
        match self {
            Suite::Rearrange | Suite::Hardy => 1000,
            Suite::Transfer | Suite::Decompose => 500,
            Suite::KfuncBand | Suite::Majorize | Suite::SchurHorn | Suite::Sanity | Suite::WeakL1 => 200,
            Suite::Witness => 100,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown suite {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub cases: usize,
    pub failures: usize,
    /// Extreme value of the measured quantity, for checks that measure one.
    pub worst: Option<f64>,
    pub limit: Option<f64>,
    pub first_failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub trials: usize,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Clone, Copy)]
enum Extreme {
    Max,
    Min,
}

struct Tally {
    name: &'static str,
    cases: usize,
    failures: usize,
    worst: Option<f64>,
    extreme: Extreme,
    limit: Option<f64>,
    first_failure: Option<String>,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally { name, cases: 0, failures: 0, worst: None, extreme: Extreme::Max, limit: None, first_failure: None }
    }

    fn at_most(name: &'static str, limit: f64) -> Self {
        Tally { limit: Some(limit), ..Tally::new(name) }
    }

    fn at_least(name: &'static str, limit: f64) -> Self {
        Tally { limit: Some(limit), extreme: Extreme::Min, ..Tally::new(name) }
    }

    fn record(&mut self, ok: bool, context: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(context());
            }
        }
    }

    /// Records `value` against the limit; NaN always fails.
    fn measure(&mut self, value: f64, context: impl FnOnce() -> String) {
        let ok = match (self.extreme, self.limit) {
            (_, None) => !value.is_nan(),
            (Extreme::Max, Some(l)) => value <= l,
            (Extreme::Min, Some(l)) => value >= l,
        };
        self.worst = Some(match (self.worst, self.extreme) {
            (None, _) => value,
            (Some(w), Extreme::Max) => w.max(value),
            (Some(w), Extreme::Min) => w.min(value),
        });
        self.record(ok, || format!("{} (value {value:e})", context()));
    }

    fn error(&mut self, e: &Error, context: impl FnOnce() -> String) {
        self.record(false, || format!("{}: {e}", context()));
    }

    fn finish(self) -> Check {
        Check {
            name: self.name.to_string(),
            passed: self.failures == 0,
            cases: self.cases,
            failures: self.failures,
            worst: self.worst,
            limit: self.limit,
            first_failure: self.first_failure,
        }
    }
}

/// Runs `suite` with `trials` cases (the suite default when `None`).
pub fn run_suite(suite: Suite, trials: Option<usize>, seed: u64) -> Result<SuiteReport> {
    let trials = trials.unwrap_or(suite.default_trials());
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let checks = match suite {
        Suite::Rearrange => rearrange_suite(trials, seed),
        Suite::Hardy => hardy_suite(trials, seed),
        Suite::KfuncBand => kfunc_band_suite(trials),
        Suite::Transfer => transfer_suite(trials, seed),
        Suite::Decompose => decompose_suite(trials, seed),
        Suite::Majorize => majorize_suite(trials, seed),
        Suite::SchurHorn => schur_horn_suite(trials, seed),
        Suite::Witness => witness_suite(trials, seed),
        Suite::Sanity => sanity_suite(trials, seed)?,
        Suite::WeakL1 => weak_l1_suite(trials, seed)?,
    };
    let passed = checks.iter().all(|c| c.passed);
    Ok(SuiteReport { suite: suite.name().to_string(), seed, trials, passed, checks })
}

fn finish(tallies: Vec<Tally>) -> Vec<Check> {
    tallies.into_iter().map(Tally::finish).collect()
}

fn pow2(k: i32) -> Rational {
    let two = int(2);
    if k >= 0 {
        num_traits::pow(two, k as usize)
    } else {
        num_traits::pow(two, k.unsigned_abs() as usize).recip()
    }
}

/// Sorted distinct integers drawn from `1..=range`, at most `count` of them, always including `range`.
fn random_ticks(rng: &mut impl Rng, count: usize, range: u64) -> Vec<u64> {
    let mut ticks: Vec<u64> = (0..count.saturating_sub(1)).map(|_| rng.gen_range(1..=range)).collect();
    ticks.push(range);
    ticks.sort_unstable();
    ticks.dedup();
    ticks
}

fn relative_gap(x: f64, y: f64) -> f64 {
    (x - y).abs() / x.abs().max(y.abs()).max(f64::MIN_POSITIVE)
}

/// `x ≤ y` for reals, exact when both are exact.
fn le(x: &Real, y: &Real) -> bool {
    y.ge_tol(x)
}

fn rearrange_suite(trials: usize, seed: u64) -> Vec<Check> {
    let mut equi = Tally::new("equimeasurable");
    let mut idem = Tally::new("idempotent");
    let mut additive = Tally::new("integral_power additive");
    let mut monotone = Tally::new("integral_power monotone");
    let mut dilation = Tally::at_most("dilation identity", TAU_REL);
    let mut dyadic = Tally::new("dyadic_approx below and increasing");
    let mut discretize = Tally::new("discretize_geometric bounds");
    for (i, f) in random_corpus(trials, seed).iter().enumerate() {
        let ctx = || format!("function {i}");
        let fs = f.rearrange();
        let mut levels: Vec<Real> = f.values().to_vec();
        levels.push(Real::zero());
        levels.sort();
        levels.dedup();
        let mids: Vec<Real> = levels.windows(2).map(|w| (&w[0] + &w[1]).mul_rat(&rat(1, 2))).collect();
        let equal = levels.iter().chain(&mids).all(|s| f.distribution(s) == fs.distribution(s));
        equi.record(equal, ctx);
        idem.record(fs.rearrange() == fs, ctx);

        let mut rng = trial_rng(seed, i as u64);
        let grid = f.breakpoints();
        let mut picks: Vec<Rational> = (0..3).map(|_| grid[rng.gen_range(0..grid.len())].clone()).collect();
        picks.sort();
        let (b, c) = (Bound::Finite(picks[1].clone()), Bound::Finite(picks[2].clone()));
        let other = &random_corpus(1, seed ^ i as u64)[0];
        let lower = f.min(other).expect("same domain");
        for p in [0.5, 1.0, 2.0] {
            let whole = f.integral_power(p, &picks[0], &c);
            let parts = &f.integral_power(p, &picks[0], &b) + &f.integral_power(p, &picks[1], &c);
            additive.record(whole.eq_tol(&parts), ctx);
            let below = lower.integral_power(p, &Rational::zero(), &Bound::Infinite);
            monotone.record(le(&below, &f.integral_power(p, &Rational::zero(), &Bound::Infinite)), ctx);
        }

        let t = pow2(rng.gen_range(-3..=3));
        let dilated = f.dilate(&t).expect("positive factor");
        for p in [0.5, 1.0, 2.0, 3.0] {
            let lhs = dilated.power(p).integral();
            let rhs = f.power(p).integral().mul_rat(&t);
            let gap = if lhs.is_exact() && rhs.is_exact() {
                if lhs == rhs { 0.0 } else { f64::INFINITY }
            } else {
                relative_gap(lhs.to_f64(), rhs.to_f64())
            };
            dilation.measure(gap, || format!("function {i}, p = {p}"));
        }

        let mut previous: Option<StepFunction> = None;
        for n in 0..=5 {
            let Ok(approx) = fs.dyadic_approx(n) else {
                dyadic.record(false, ctx);
                continue;
            };
            let ok = fs.ge_pointwise(&approx) && previous.as_ref().is_none_or(|prev| approx.ge_pointwise(prev));
            dyadic.record(ok, || format!("function {i}, n = {n}"));
            previous = Some(approx);
        }

        for d in [rat(3, 2), int(2), int(3)] {
            let dr = Real::Exact(d.clone());
            let df = crate::numeric::rat_to_f64(&d);
            for mode in [Rounding::Up, Rounding::Down] {
                let Ok(r) = fs.discretize_geometric(df, mode) else {
                    discretize.record(false, ctx);
                    continue;
                };
                let points: Vec<Rational> =
                    std::iter::once(Rational::zero()).chain(StepFunction::merged_grid(&[&fs, &r])).collect();
                let ok = points.iter().all(|t| {
                    let (x, y) = (fs.eval(t), r.eval(t));
                    if x.is_zero() {
                        return y.is_zero();
                    }
                    match mode {
                        Rounding::Up => x < y && y <= &dr * &x,
                        Rounding::Down => y <= x && x < &dr * &y,
                    }
                });
                discretize.record(ok, || format!("function {i}, d = {d}, {mode:?}"));
            }
        }
    }
    finish(vec![equi, idem, additive, monotone, dilation, dyadic, discretize])
}

fn hardy_suite(trials: usize, seed: u64) -> Vec<Check> {
    let mut hardy = Tally::new("set integral below head integral");
    let mut margin = Tally::new("relative margin");
    margin.extreme = Extreme::Min;
    for (i, f) in random_corpus(trials, seed).iter().enumerate() {
        let mut rng = trial_rng(seed, i as u64);
        let fs = f.rearrange();
        let reach = f.support_end() * int(2);
        let count = 2 * rng.gen_range(1..=4);
        let ticks = random_ticks(&mut rng, count, 1 << 12);
        let mut ends: Vec<Rational> =
            ticks.iter().map(|&k| &reach * Rational::new(BigInt::from(k), BigInt::from(1u64 << 12))).collect();
        if ends.len() % 2 == 1 {
            ends.insert(0, Rational::zero());
        }
        let mut on_set = Real::zero();
        let mut measure = Rational::zero();
        for w in ends.chunks(2) {
            on_set = &on_set + &f.integral_over(&w[0], &Bound::Finite(w[1].clone()));
            measure += &w[1] - &w[0];
        }
        let head = fs.integral_over(&Rational::zero(), &Bound::Finite(measure));
        let ok = match (&on_set, &head) {
            (Real::Exact(a), Real::Exact(b)) => a <= b,
            _ => false,
        };
        hardy.record(ok, || format!("function {i}"));
        let h = head.to_f64();
        margin.measure(if h > 0.0 { (h - on_set.to_f64()) / h } else { 0.0 }, || format!("function {i}"));
    }
    finish(vec![hardy, margin])
}

/// Twenty dyadic points `2^{-10}, …, 2^9`.
pub fn band_grid() -> Vec<f64> {
    dyadic_t_grid(-10, 9)
}

pub const BAND_COUPLES: [(f64, f64); 4] = [(1.0, 2.0), (2.0, 4.0), (1.0, f64::INFINITY), (2.0, f64::INFINITY)];

fn kfunc_band_suite(trials: usize) -> Vec<Check> {
    let mut band = Tally::at_most("formula within oracle band", K_BAND);
    let mut frozen = Tally::at_most("frozen band below ceiling", K_BAND_LIMIT);
    let mut oracle_shape = Tally::new("oracle concave and non-decreasing");
    let mut formula_monotone = Tally::new("(L_p, L_inf) formula non-decreasing");
    let mut invariant = Tally::new("rearrangement invariant");
    let mut scaling = Tally::at_most("homogeneous", TAU_REL);
    frozen.measure(K_BAND, String::new);
    let grid = band_grid();
    let lambda = Real::int(3);
    for (i, f) in standard_corpus().iter().cycle().take(trials).enumerate() {
        let fs = f.rearrange();
        let scaled = f.scale(&lambda);
        for (p, q) in BAND_COUPLES {
            let ctx = || format!("function {i}, (p, q) = ({p}, {q})");
            let curve = match k_curve(f, p, q, &grid) {
                Ok(c) => c,
                Err(e) => {
                    band.error(&e, ctx);
                    continue;
                }
            };
            for e in &curve {
                if let Some(r) = e.ratio {
                    band.measure(r.max(1.0 / r), || format!("{}, t = {}", ctx(), e.t));
                }
            }
            let oracle: Vec<f64> = curve.iter().map(|e| e.oracle_value.unwrap_or(0.0)).collect();
            let formula: Vec<f64> = curve.iter().map(|e| e.formula_value).collect();
            let non_decreasing = |v: &[f64]| v.windows(2).all(|w| w[1] >= w[0] - slack(w[0]));
            let concave = (1..grid.len() - 1).all(|k| {
                let (t0, t1, t2) = (grid[k - 1], grid[k], grid[k + 1]);
                let chord = oracle[k - 1] + (oracle[k + 1] - oracle[k - 1]) * (t1 - t0) / (t2 - t0);
                oracle[k] >= chord - slack(oracle[k + 1])
            });
            oracle_shape.record(concave && non_decreasing(&oracle), ctx);
            if q.is_infinite() {
                formula_monotone.record(non_decreasing(&formula), ctx);
            }
            for &t in [grid[0], grid[10], grid[19]].iter() {
                let eval = |u: &StepFunction| {
                    if q.is_infinite() { k_p_inf(u, p, t) } else { k_holmstedt(u, p, q, t) }
                };
                match (eval(f), eval(&fs), eval(&scaled), k_oracle(f, p, q, t), k_oracle(&fs, p, q, t)) {
                    (Ok(a), Ok(b), Ok(c), Ok(o1), Ok(o2)) => {
                        invariant.record(a.eq_tol(&b) && (o1 - o2).abs() <= slack(o1), ctx);
                        scaling.measure(relative_gap(c.to_f64(), 3.0 * a.to_f64()), ctx);
                    }
                    _ => invariant.record(false, ctx),
                }
            }
        }
    }
    finish(vec![band, frozen, oracle_shape, formula_monotone, invariant, scaling])
}

/// Non-monotone test function with at most [`TEST_FUNCTION_PIECES`] pieces on `(0, end)`.
fn test_function(end: &Rational, rng: &mut impl Rng) -> StepFunction {
    let count = rng.gen_range(1..=TEST_FUNCTION_PIECES);
    let ticks = random_ticks(rng, count, 256);
    let pieces = ticks.iter().map(|&k| {
        let v = if rng.gen_bool(0.1) { Real::zero() } else { Real::Exact(pow2(rng.gen_range(-4..=4))) };
        (end * Rational::new(BigInt::from(k), BigInt::from(256)), v)
    });
    StepFunction::from_ends(Bound::Infinite, pieces)
}

/// `‖u‖_p` in floating point.
fn lp_f64(u: &StepFunction, p: f64) -> f64 {
    let sum: f64 = u.pieces().map(|pc| crate::numeric::rat_to_f64(&pc.length()) * pc.value.to_f64().powf(p)).sum();
    sum.powf(1.0 / p)
}

pub const TRANSFER_EXPONENTS: [f64; 3] = [0.5, 1.0, 2.0];

fn transfer_suite(trials: usize, seed: u64) -> Vec<Check> {
    let mut built = Tally::new("construction succeeds");
    let mut bounded = Tally::new("h below 2^{1/p} f");
    let mut reproduced = Tally::new("T h* = g");
    let mut slopes = Tally::at_most("slopes at most 1", 1.0 + crate::numeric::TAU_ABS);
    let mut image = Tally::new("image measure at most beta");
    let mut lp = Tally::at_most("p-norm contraction", 1.0 + TAU_REL);
    let mut sup = Tally::at_most("sup-norm contraction", 1.0 + TAU_REL);
    for i in 0..trials {
        let p = TRANSFER_EXPONENTS[i % TRANSFER_EXPONENTS.len()];
        let f = corpus_element(i).rearrange();
        let mut rng = trial_rng(seed, i as u64);
        let g = spread(&f, p, &mut rng);
        let ctx = || format!("pair {i}, p = {p}");
        let c = match build_transfer(&f, &g, p) {
            Ok(c) => c,
            Err(e) => {
                built.error(&e, ctx);
                continue;
            }
        };
        built.record(c.map.is_well_formed(), ctx);
        bounded.record(h_bounded(&c, &f, p), ctx);
        reproduced.record(reproduces(&c, &g), ctx);
        if let Some(s) = c.map.max_slope() {
            slopes.measure(crate::numeric::rat_to_f64(s), ctx);
        }
        slopes.record(slopes_bounded(&c.map), ctx);
        image.record(c.map.image_measure() <= c.map.beta, ctx);
        let end = c.map.image_measure();
        if end.is_zero() {
            continue;
        }
        for k in 0..TEST_FUNCTIONS {
            let u = test_function(&end, &mut rng);
            let tu = apply_transfer(&c.map, &u);
            let ratio = |a: f64, b: f64| {
                if b > 0.0 { a / b } else if a > 0.0 { f64::INFINITY } else { 0.0 }
            };
            lp.measure(ratio(lp_f64(&tu, p), lp_f64(&u, p)), || format!("{}, u {k}", ctx()));
            sup.measure(ratio(tu.sup().to_f64(), u.sup().to_f64()), || format!("{}, u {k}", ctx()));
        }
    }
    finish(vec![built, bounded, reproduced, slopes, image, lp, sup])
}

pub const DECOMPOSE_COUPLES: [(f64, f64); 2] = [(1.0, 2.0), (2.0, 3.0)];
/// Factor by which `f*` is scaled to break the decomposition hypothesis.
pub fn violation_factor() -> Rational {
    rat(101, 100)
}

/// `u` with its first `j` entries replaced by their exponent-`p` mean.
fn head_average(u: &[Real], j: usize, p: f64) -> Vec<Real> {
    let mut out = u.to_vec();
    if j > 0 {
        let mass = u[..j].iter().fold(Real::zero(), |acc, x| &acc + &x.powf(p));
        let mean = mass.mul_rat(&Rational::from_integer(BigInt::from(j)).recip()).root(p);
        out[..j].iter_mut().for_each(|x| *x = mean.clone());
    }
    out
}

fn decompose_suite(trials: usize, seed: u64) -> Vec<Check> {
    let mut accepted = Tally::new("hypothesis-satisfying pair accepted");
    let mut sum = Tally::new("h + l = g");
    let mut head = Tally::new("f^p left-majorizes h^p");
    let mut tail = Tally::new("tail inequality for l");
    let mut monotone = Tally::new("h non-increasing");
    let mut violation = Tally::new("scaled target raises HypothesisFailed");
    let mut witness = Tally::new("witness outside both sets");
    let mut sequence = Tally::new("sequence pipeline consistent");
    let mut exact_cases = 0usize;
    for i in 0..trials {
        let (p, q) = DECOMPOSE_COUPLES[i % DECOMPOSE_COUPLES.len()];
        let f = corpus_element(i).rearrange();
        let mut rng = trial_rng(seed, i as u64);
        let g = k_dominated(&f, p, q, &mut rng);
        let ctx = || format!("pair {i}, (p, q) = ({p}, {q})");
        match decompose_k(&f, &g, p, q) {
            Ok(d) => {
                accepted.record(true, ctx);
                let total = d.h.add(&d.l).expect("same domain");
                let same = if g.is_exact() && total.is_exact() {
                    exact_cases += 1;
                    total == g
                } else {
                    total.ge_pointwise(&g) && g.ge_pointwise(&total)
                };
                sum.record(same, ctx);
                head.record(left_majorizes(&f, &d.h, p).holds, ctx);
                tail.record(tail_dominates(&f, &d.l, q), ctx);
                monotone.record(d.h.is_non_increasing(), ctx);
            }
            Err(e) => accepted.error(&e, ctx),
        }

        if !f.is_zero() {
            let scaled = f.map_values(|v| v.mul_rat(&violation_factor()));
            match decompose_k(&f, &scaled, p, q) {
                Err(Error::HypothesisFailed { witness: t }) => {
                    violation.record(true, ctx);
                    let upto = Bound::Finite(t.clone());
                    let head_short = f.integral_power(p, &Rational::zero(), &upto)
                        < scaled.integral_power(p, &Rational::zero(), &upto);
                    let tail_short = f.integral_power(q, &t, &Bound::Infinite) < scaled.integral_power(q, &t, &Bound::Infinite);
                    witness.record(head_short && tail_short, ctx);
                }
                other => violation.record(false, || format!("{}: {other:?}", ctx())),
            }
        }

        let mut values: Vec<Real> = f.values().iter().take(12).cloned().collect();
        values.retain(|v| !v.is_zero());
        if values.is_empty() {
            continue;
        }
        let j = rng.gen_range(0..=values.len());
        let (Ok(u), Ok(v)) = (SeqView::new(values.clone()), SeqView::new(head_average(&values, j, p))) else {
            sequence.record(false, ctx);
            continue;
        };
        let direct = decompose_k(&u.to_step(), &v.to_step(), p, q);
        match (decompose_sequence(&u, &v, p, q), direct) {
            (Ok(s), Ok(d)) => {
                let (hbar, lbar) = (d.h.condexp_unit(p), d.l.condexp_unit(q));
                let n = s.hbar.len().max(hbar.len()).max(s.lbar.len()).max(lbar.len());
                let ok = (0..n).all(|k| s.hbar.get(k).eq_tol(&hbar.get(k)) && s.lbar.get(k).eq_tol(&lbar.get(k)));
                sequence.record(ok, ctx);
            }
            (Err(e), _) | (_, Err(e)) => sequence.error(&e, ctx),
        }
    }
    let mut checks = finish(vec![accepted, sum, head, tail, monotone, violation, witness, sequence]);
    checks[1].worst = Some(exact_cases as f64);
    checks
}

fn scaled_by(g: &StepFunction, c: Rational) -> StepFunction {
    g.map_values(|v| v.mul_rat(&c))
}

/// Head (`Left`) or tail (`Right`) integrals of `(f*)^p` and `(g*)^p` compared on a
/// grid refining the merged breakpoints four times.
fn brute_force(f: &StepFunction, g: &StepFunction, p: f64, side: Side) -> bool {
    let (fs, gs) = (f.rearrange().power(p), g.rearrange().power(p));
    let merged: Vec<Rational> = std::iter::once(Rational::zero()).chain(StepFunction::merged_grid(&[&fs, &gs])).collect();
    let mut grid = Vec::new();
    for w in merged.windows(2) {
        let step = (&w[1] - &w[0]) / int(4);
        grid.extend((0..4).map(|k| &w[0] + &step * int(k)));
    }
    grid.extend(merged.last().cloned());
    let (ft, gt) = (fs.integral(), gs.integral());
    grid.iter().all(|t| {
        let upto = Bound::Finite(t.clone());
        let (a, b) = (fs.integral_over(&Rational::zero(), &upto), gs.integral_over(&Rational::zero(), &upto));
        match side {
            Side::Left => a.ge_tol(&b),
            Side::Right => (&ft - &a).ge_tol(&(&gt - &b)),
        }
    })
}

fn majorize_suite(trials: usize, seed: u64) -> Vec<Check> {
    let mut duality = Tally::new("equal-norm duality");
    let mut convex = Tally::new("convexification compatible");
    let mut oracle = Tally::new("agrees with brute force");
    let mut lift_floor = Tally::new("lift at least g");
    let mut lift_norm = Tally::at_most("lift norm equality", TAU_REL);
    let mut holds_count = [0usize; 2];
    for i in 0..trials {
        let f = corpus_element(i).rearrange();
        let mut rng = trial_rng(seed, i as u64);
        let ctx = || format!("function {i}");
        for e in [1.0, 2.0] {
            for g in [spread(&f, e, &mut rng), concentrate(&f, e, &mut rng)] {
                let (nf, ng) = (f.power(e).integral(), g.power(e).integral());
                if nf.eq_tol(&ng) {
                    let left = left_majorizes(&f, &g, e).holds;
                    holds_count[usize::from(left)] += 1;
                    duality.record(left == right_majorizes(&g, &f, e).holds, ctx);
                }
            }
        }
        let g = spread(&f, 1.0, &mut rng);
        let c = concentrate(&f, 1.0, &mut rng);
        for (p, r) in [(1.0, 2.0), (0.5, 2.0), (1.0, 0.5)] {
            let (fr, gr, cr) = (f.power(r), g.power(r), c.power(r));
            let agree = left_majorizes(&f, &g, r * p).holds == left_majorizes(&fr, &gr, p).holds
                && right_majorizes(&f, &c, r * p).holds == right_majorizes(&fr, &cr, p).holds;
            convex.record(agree, || format!("function {i}, p = {p}, r = {r}"));
        }
        for p in [1.0, 2.0] {
            let agree = left_majorizes(&f, &g, p).holds == brute_force(&f, &g, p, Side::Left)
                && right_majorizes(&f, &c, p).holds == brute_force(&f, &c, p, Side::Right);
            oracle.record(agree, || format!("function {i}, p = {p}"));
        }
        if f.is_zero() {
            continue;
        }
        for (p, side) in [(1.0, Side::Left), (2.0, Side::Left), (1.0, Side::Right), (2.0, Side::Right)] {
            let base = match side {
                Side::Left => spread(&f, p, &mut rng),
                Side::Right => concentrate(&f, p, &mut rng),
            };
            let low = scaled_by(&base, rat(1, 2));
            let lifted = match side {
                Side::Left => lift_left(&f, &low, p),
                Side::Right => lift_right(&f, &low, p),
            };
            let ctx = || format!("function {i}, p = {p}, {side:?}");
            match lifted {
                Ok(h) => {
                    lift_floor.record(h.ge_pointwise(&low), ctx);
                    let (nh, nf) = (h.power(p).integral().to_f64(), f.power(p).integral().to_f64());
                    lift_norm.measure(relative_gap(nh, nf), ctx);
                }
                Err(e) => lift_floor.error(&e, ctx),
            }
        }
    }
    let mut checks = finish(vec![duality, convex, oracle, lift_floor, lift_norm]);
    checks[0].worst = Some(holds_count[1] as f64);
    checks
}

/// A random majorization pair `a ≻ b` of dimension `n`: dyadic `a`, and `b` obtained
/// by averaging `a` over random blocks and applying a few T-transforms with weights `k/4`.
fn majorization_pair(n: usize, rng: &mut impl Rng) -> (Vec<Real>, Vec<Real>) {
    let mut a: Vec<Real> = (0..n).map(|_| Real::Exact(pow2(rng.gen_range(-3..=4)) * int(rng.gen_range(1..=3)))).collect();
    a.sort_by(|x, y| y.cmp(x));
    let mut b = Vec::with_capacity(n);
    for block in a.chunk_by(|_, _| rng.gen_bool(0.6)) {
        let mean = block.iter().cloned().sum::<Real>().mul_rat(&rat(1, block.len() as i64));
        b.extend(std::iter::repeat_n(mean, block.len()));
    }
    for _ in 0..rng.gen_range(0..=3) {
        let (j, k) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if j == k {
            continue;
        }
        let lambda = Real::Exact(rat(rng.gen_range(0..=4), 4));
        let (bj, bk) = (b[j].clone(), b[k].clone());
        let mu = &Real::one() - &lambda;
        b[j] = &(&lambda * &bj) + &(&mu * &bk);
        b[k] = &(&lambda * &bk) + &(&mu * &bj);
    }
    b.sort_by(|x, y| y.cmp(x));
    (a, b)
}

fn schur_horn_suite(trials: usize, seed: u64) -> Vec<Check> {
    let mut chain = Tally::new("T-chain maps a to b");
    let mut chain_len = Tally::new("T-chain length at most N - 1");
    let mut cert = Tally::new("Birkhoff certificate reconstructs b");
    let mut cert_len = Tally::new("Birkhoff terms at most (N - 1)^2 + 1");
    let mut diagonal = Tally::at_most("diagonal error", DIAGONAL_TOLERANCE);
    let mut spectrum = Tally::at_most("spectrum error", SPECTRUM_TOLERANCE);
    let mut norms = Tally::at_most("norm consequence", 1.0 + TAU_REL);
    for i in 0..trials {
        let n = 1 + i % MAX_DIMENSION;
        let mut rng = trial_rng(seed, i as u64);
        let (a, b) = majorization_pair(n, &mut rng);
        let ctx = || format!("pair {i}, N = {n}");
        match tchain(&a, &b) {
            Ok(tc) => {
                chain_len.record(tc.len() < n.max(1), ctx);
                let s = compose(n, &tc);
                chain.record(s.apply(&a) == b, ctx);
                match birkhoff(&s) {
                    Ok(c) => {
                        cert_len.record(c.len() <= (n - 1) * (n - 1) + 1, ctx);
                        let exact = c.total_weight() == Real::one() && c.apply(&a) == b && c.reconstruct(n) == s;
                        cert.record(exact, ctx);
                    }
                    Err(e) => cert.error(&e, ctx),
                }
            }
            Err(e) => chain.error(&e, ctx),
        }
        let (af, bf): (Vec<f64>, Vec<f64>) = (a.iter().map(Real::to_f64).collect(), b.iter().map(Real::to_f64).collect());
        match schur_horn_matrix(&af, &bf) {
            Ok(m) => {
                let scale = af.iter().fold(1.0f64, |s, x| s.max(x.abs()));
                let diag_err = m.diagonal().iter().zip(&bf).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                diagonal.measure(diag_err / scale, ctx);
                let mut eig = symmetric_eigenvalues(&m);
                eig.sort_by(|x, y| y.total_cmp(x));
                let spec_err = eig.iter().zip(&af).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                spectrum.measure(spec_err / scale, ctx);
            }
            Err(e) => diagonal.error(&e, ctx),
        }
        let (fa, fb) = (StepFunction::from_unit_values(a.clone()), StepFunction::from_unit_values(b.clone()));
        let (ra, rb) = (fa.root(2.0), fb.root(2.0));
        for (p, r) in [(1.0, 1.0), (1.0, 1.5), (1.0, 2.0), (1.0, 3.0), (2.0, 2.0), (2.0, 4.0)] {
            let (x, y) = if p == 1.0 { (&fa, &fb) } else { (&ra, &rb) };
            let space = SpaceSpec::lp(r);
            match (norm(&space, x), norm(&space, y)) {
                (Ok(nx), Ok(ny)) => {
                    let (nx, ny) = (nx.to_f64(), ny.to_f64());
                    norms.measure(if nx > 0.0 { ny / nx } else { 0.0 }, || format!("{}, p = {p}, r = {r}", ctx()));
                }
                (Err(e), _) | (_, Err(e)) => norms.error(&e, ctx),
            }
        }
    }
    finish(vec![chain, chain_len, cert, cert_len, diagonal, spectrum, norms])
}

/// A pair on the grid of level `n` with `f^2 ≻ g^2` at equal 2-norm, at most
/// [`MAX_DIMENSION`] cells wide.
fn witness_pair(n: u32, rng: &mut impl Rng) -> Result<(StepFunction, StepFunction)> {
    let cell = Rational::new(BigInt::one(), BigInt::one() << n);
    let width = rng.gen_range(1..=MAX_DIMENSION / 2) as u64;
    let mut values: Vec<Real> = (0..width).map(|_| Real::Exact(pow2(rng.gen_range(-3..=3)))).collect();
    values.sort_by(|x, y| y.cmp(x));
    let f = StepFunction::from_ends(Bound::Infinite, values.iter().enumerate().map(|(k, v)| (&cell * int(k as i64 + 1), v.clone())));
    let stretched = width + rng.gen_range(0..=width.min(MAX_DIMENSION as u64 - width));
    let count = rng.gen_range(1..=stretched as usize);
    let cuts = random_ticks(rng, count, stretched);
    let f2 = f.power(2.0);
    let mut start = Rational::zero();
    let mut pieces = Vec::new();
    for k in cuts {
        let end = &cell * int(k as i64);
        let avg = f2.integral_over(&start, &Bound::Finite(end.clone())).mul_rat(&(&end - &start).recip());
        pieces.push((end.clone(), avg.root(2.0)));
        start = end;
    }
    let g = StepFunction::from_ends(Bound::Infinite, pieces);
    let low = scaled_by(&g, rat(3, 4));
    Ok((f.clone(), lift_left(&f, &low, 2.0)?))
}

fn witness_suite(trials: usize, seed: u64) -> Vec<Check> {
    let mut built = Tally::new("witness built");
    let mut f_err = Tally::at_most("f recovered", RECOVERY_TOLERANCE);
    let mut g_err = Tally::at_most("g recovered", DIAGONAL_TOLERANCE);
    for i in 0..trials {
        let n = (i % 6) as u32;
        let mut rng = trial_rng(seed, i as u64);
        let ctx = || format!("pair {i}, n = {n}");
        let report = witness_pair(n, &mut rng).and_then(|(f, g)| Ok((khintchine_witness(&f, &g, n)?, f, g)));
        let (w, f, g) = match report {
            Ok(x) => x,
            Err(e) => {
                built.error(&e, ctx);
                continue;
            }
        };
        built.record(true, ctx);
        let cell = Rational::new(BigInt::one(), BigInt::one() << n);
        let cells = (w.matrix.n()) as i64;
        let worst = |u: &StepFunction, v: &StepFunction| {
            let scale = u.sup().to_f64().max(1.0);
            (0..cells)
                .map(|k| {
                    let t = &cell * int(k);
                    (u.eval(&t).to_f64() - v.eval(&t).to_f64()).abs() / scale
                })
                .fold(0.0, f64::max)
        };
        f_err.measure(worst(&f, &w.f_recovered.rearrange()), ctx);
        g_err.measure(worst(&g, &w.g_recovered), ctx);
    }
    finish(vec![built, f_err, g_err])
}

/// Spaces `L_s` probed between and outside the exponents `(1, 2)`.
pub const SANITY_COUPLE: (f64, f64) = (1.0, 2.0);
pub const SANITY_INSIDE: [f64; 3] = [1.0, 1.5, 2.0];
pub const SANITY_LEFT_OUTSIDE: f64 = 0.75;
pub const SANITY_RIGHT_OUTSIDE: f64 = 4.0;

fn sanity_suite(trials: usize, seed: u64) -> Result<Vec<Check>> {
    let (p, q) = SANITY_COUPLE;
    let mut inside = Tally::at_most("inside exponents bounded", SANITY_BOUND);
    let mut left = Tally::at_least("left failure family diverges", DIVERGENCE_TARGET);
    let mut right = Tally::at_least("right failure family diverges", DIVERGENCE_TARGET);
    let mut verdicts = Tally::new("verdicts match scaling law");
    for s in SANITY_INSIDE {
        let space = SpaceSpec::lp(s);
        for (side, e) in [(Side::Left, p), (Side::Right, q)] {
            let r = monotonicity_probe(&space, e, side, trials, seed)?;
            let ctx = || format!("L_{s}, {side:?}-{e}");
            inside.measure(r.worst_ratio, ctx);
            verdicts.record(r.verdict == Verdict::Bounded, ctx);
        }
    }
    for (s, side, e, tally) in
        [(SANITY_LEFT_OUTSIDE, Side::Left, p, &mut left), (SANITY_RIGHT_OUTSIDE, Side::Right, q, &mut right)]
    {
        let r = monotonicity_probe(&SpaceSpec::lp(s), e, side, trials, seed)?;
        let ctx = || format!("L_{s}, {side:?}-{e}, growth {:?}", r.growth_exponent);
        tally.measure(r.worst_ratio, ctx);
        verdicts.record(r.verdict == Verdict::Diverging, ctx);
    }
    Ok(finish(vec![inside, left, right, verdicts]))
}

fn weak_l1_suite(trials: usize, seed: u64) -> Result<Vec<Check>> {
    let space = SpaceSpec::new(SpaceKind::Weak(1.0))?;
    let mut probe = Tally::at_most("right-2 probe bounded", WEAK_RIGHT_BOUND);
    let r = monotonicity_probe(&space, 2.0, Side::Right, trials, seed)?;
    probe.measure(r.worst_ratio, || "weak L_1, right-2".into());
    let mut verdict = Tally::new("right-2 verdict bounded");
    verdict.record(r.verdict == Verdict::Bounded, || "weak L_1, right-2".into());
    let mut concavity = Tally::at_least("concavity violated", DIVERGENCE_TARGET);
    for (q, m) in WEAK_STACKS {
        let w = concavity_witness(&space, &weak_l1_stack(m), q)?;
        concavity.measure(w.factor, || format!("q = {q}, {m} blocks"));
    }
    Ok(finish(vec![probe, verdict, concavity]))
}
