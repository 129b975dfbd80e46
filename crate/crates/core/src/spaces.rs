//! Symmetric quasi-norms (`L_p`, Lorentz, weak-`L_p`, convexifications) and
//! empirical probes of monotonicity constants, dilation norms and Boyd indices.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::corpus::{concentrate, corpus_element, random_corpus, spread, trial_rng};
use crate::error::{Error, Result};
use crate::majorize::Side;
use crate::numeric::{parse_rational, rat_from_f64, rat_to_f64, Bound, Rational, Real};
use crate::stepfn::StepFunction;

/// Family sizes `n = 2^k`, `k ≤ FAMILY_MAX_LOG2`, injected by the probes.
pub const FAMILY_MAX_LOG2: u32 = 10;
/// Fitted growth exponent above which a probe reports divergence.
pub const GROWTH_THRESHOLD: f64 = 0.05;

#[derive(Clone, Debug, PartialEq)]
pub enum SpaceKind {
    Lp(f64),
    /// `L_{p,q}`; `q = ∞` is the weak space.
    Lorentz(f64, f64),
    Weak(f64),
    Convexified(Box<SpaceKind>, f64),
}

impl SpaceKind {
    /// `γ` with `‖1_{(0,m)}‖ ∝ m^{1/γ}`.
    pub fn scaling_exponent(&self) -> f64 {
        match self {
            SpaceKind::Lp(p) | SpaceKind::Lorentz(p, _) | SpaceKind::Weak(p) => *p,
            SpaceKind::Convexified(base, r) => r * base.scaling_exponent(),
        }
    }

    fn exponents(&self) -> Vec<f64> {
        match self {
            SpaceKind::Lp(p) | SpaceKind::Weak(p) => vec![*p],
            SpaceKind::Lorentz(p, q) => vec![*p, *q],
            SpaceKind::Convexified(base, r) => {
                let mut e = base.exponents();
                e.push(*r);
                e
            }
        }
    }
}

fn fmt_exp(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        format!("{x}")
    }
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceKind::Lp(p) => write!(f, "Lp:{}", fmt_exp(*p)),
            SpaceKind::Lorentz(p, q) => write!(f, "Lorentz:{}:{}", fmt_exp(*p), fmt_exp(*q)),
            SpaceKind::Weak(p) => write!(f, "Weak:{}", fmt_exp(*p)),
            SpaceKind::Convexified(base, r) => write!(f, "Convexified:{base}:r={}", fmt_exp(*r)),
        }
    }
}

/// A symmetric space on `(0, alpha)`; parses from strings such as `Lp:2`,
/// `Lorentz:2:1`, `Weak:1`, `Convexified:Lp:1:r=2`, with an optional `@alpha` suffix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SpaceSpec {
    pub kind: SpaceKind,
    pub alpha: Bound,
}

impl SpaceSpec {
    pub fn new(kind: SpaceKind) -> Result<Self> {
        if kind.exponents().iter().any(|e| !(*e > 0.0)) {
            return Err(Error::InvalidArgument(format!("exponents of {kind} must be positive")));
        }
        Ok(SpaceSpec { kind, alpha: Bound::Infinite })
    }

    pub fn lp(p: f64) -> Self {
        SpaceSpec { kind: SpaceKind::Lp(p), alpha: Bound::Infinite }
    }

    pub fn with_alpha(mut self, alpha: Bound) -> Self {
        self.alpha = alpha;
        self
    }
}

fn parse_exp(s: &str) -> Result<f64> {
    match s {
        "inf" | "infinity" | "∞" => Ok(f64::INFINITY),
        _ => Ok(rat_to_f64(&parse_rational(s)?)),
    }
}

fn parse_kind(tokens: &[&str]) -> Result<SpaceKind> {
    let bad = || Error::Parse(format!("unrecognized space '{}'", tokens.join(":")));
    match tokens {
        ["Lp", p] => Ok(SpaceKind::Lp(parse_exp(p)?)),
        ["Lorentz", p, q] => Ok(SpaceKind::Lorentz(parse_exp(p)?, parse_exp(q)?)),
        ["Weak", p] => Ok(SpaceKind::Weak(parse_exp(p)?)),
        ["Convexified", base @ .., last] => {
            let r = last.strip_prefix("r=").ok_or_else(bad)?;
            Ok(SpaceKind::Convexified(Box::new(parse_kind(base)?), parse_exp(r)?))
        }
        _ => Err(bad()),
    }
}

impl FromStr for SpaceSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (body, alpha) = match s.split_once('@') {
            Some((body, alpha)) => (body, alpha.parse()?),
            None => (s, Bound::Infinite),
        };
        let tokens: Vec<&str> = body.split(':').map(str::trim).collect();
        Ok(SpaceSpec::new(parse_kind(&tokens)?)?.with_alpha(alpha))
    }
}

impl fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.alpha {
            Bound::Infinite => write!(f, "{}", self.kind),
            a => write!(f, "{}@{a}", self.kind),
        }
    }
}

impl TryFrom<String> for SpaceSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<SpaceSpec> for String {
    fn from(s: SpaceSpec) -> String {
        s.to_string()
    }
}


fn kind_norm(kind: &SpaceKind, f: &StepFunction) -> Result<Real> {
    Ok(match kind {
        SpaceKind::Lp(p) => f.lp_norm(*p),
        SpaceKind::Lorentz(p, q) if q.is_infinite() => kind_norm(&SpaceKind::Weak(*p), f)?,
        SpaceKind::Lorentz(p, q) => {
            // ∫ (t^{1/p} f*)^q dt/t = Σ v^q (p/q) (t_i^{q/p} − t_{i−1}^{q/p}).
            let e = rat_from_f64(*q)? / rat_from_f64(*p)?;
            let mut sum = Real::zero();
            for piece in f.rearrange().pieces() {
                let grow = Real::Exact(piece.end.clone()).pow(&e) - Real::Exact(piece.start.clone()).pow(&e);
                sum = sum + piece.value.powf(*q) * grow;
            }
            sum.mul_rat(&e.recip()).root(*q)
        }
        SpaceKind::Weak(p) => {
            let e = rat_from_f64(*p)?.recip();
            let fs = f.rearrange();
            fs.pieces().map(|pc| pc.value * &Real::Exact(pc.end.clone()).pow(&e)).fold(Real::zero(), Real::max)
        }
        SpaceKind::Convexified(base, r) => kind_norm(base, &f.power(*r))?.root(*r),
    })
}

pub fn norm(space: &SpaceSpec, f: &StepFunction) -> Result<Real> {
    if *f.alpha() != space.alpha {
        return Err(Error::AlphaMismatch);
    }
    kind_norm(&space.kind, f)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Bounded,
    Diverging,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub side: Side,
    pub exponent: f64,
    pub trials: usize,
    pub worst_ratio: f64,
    pub witness_pair: Option<(StepFunction, StepFunction)>,
    pub verdict: Verdict,
    /// Fitted `γ` in `ratio ≈ n^γ` over the injected failure family, when one was injected.
    pub growth_exponent: Option<f64>,
}

fn ratio(space: &SpaceSpec, f: &StepFunction, g: &StepFunction) -> Result<f64> {
    let (nf, ng) = (norm(space, f)?.to_f64(), norm(space, g)?.to_f64());
    Ok(if nf > 0.0 { ng / nf } else if ng > 0.0 { f64::INFINITY } else { 1.0 })
}

/// Whether the scaling law of `space` predicts divergence of the failure family.
pub fn predicts_divergence(space: &SpaceSpec, exponent: f64, side: Side) -> bool {
    let s = space.kind.scaling_exponent();
    match side {
        Side::Left => s < exponent,
        Side::Right => s > exponent,
    }
}

/// Least-squares slope of `y` against `x` through the origin.
fn slope_through_origin(points: &[(f64, f64)]) -> f64 {
    let sxy: f64 = points.iter().map(|(x, y)| x * y).sum();
    let sxx: f64 = points.iter().map(|(x, _)| x * x).sum();
    sxy / sxx
}

pub fn monotonicity_probe(space: &SpaceSpec, exponent: f64, side: Side, budget: usize, seed: u64) -> Result<ProbeReport> {
    if budget == 0 {
        return Err(Error::InvalidArgument("budget must be at least 1".into()));
    }
    let mut worst = f64::NEG_INFINITY;
    let mut witness = None;
    let mut consider = |r: f64, f: &StepFunction, g: &StepFunction| {
        if r > worst {
            worst = r;
            witness = Some((f.clone(), g.clone()));
        }
    };
    for trial in 0..budget {
        let f = corpus_element(trial);
        let mut rng = trial_rng(seed, trial as u64);
        let g = match side {
            Side::Left => spread(f, exponent, &mut rng),
            Side::Right => concentrate(f, exponent, &mut rng),
        };
        consider(ratio(space, f, &g)?, f, &g);
    }
    let mut growth_exponent = None;
    if predicts_divergence(space, exponent, side) {
        let s = space.kind.scaling_exponent();
        let mut points = Vec::new();
        for k in 0..=FAMILY_MAX_LOG2 {
            let (f, g) = failure_family(side, s, exponent, 1 << k)?;
            let r = ratio(space, &f, &g)?;
            points.push((k as f64, r.log2()));
            consider(r, &f, &g);
        }
        growth_exponent = Some(slope_through_origin(&points));
    }
    let verdict = match growth_exponent {
        Some(g) if g > GROWTH_THRESHOLD => Verdict::Diverging,
        _ => Verdict::Bounded,
    };
    Ok(ProbeReport { side, exponent, trials: budget, worst_ratio: worst, witness_pair: witness, verdict, growth_exponent })
}

/// `n^x` as a real, exact when possible.
fn nth_power(n: u64, x: f64) -> Result<Real> {
    Ok(Real::Exact(Rational::from_integer(BigInt::from(n))).pow(&rat_from_f64(x)?))
}

/// Closed-form witnesses: left `g_n = n^{−1/e} 1_{(0,n)}`, right `g_n = n^{1/e} 1_{(0,1/n)}`,
/// both against `f = 1_{(0,1)}`.
pub fn failure_family(side: Side, space_exp: f64, mono_exp: f64, n: u64) -> Result<(StepFunction, StepFunction)> {
    if n == 0 {
        return Err(Error::InvalidArgument("family index must be positive".into()));
    }
    let nr = Rational::from_integer(BigInt::from(n));
    let f = StepFunction::constant(Rational::one(), Real::one());
    let g = match side {
        Side::Left if space_exp < mono_exp => StepFunction::constant(nr, nth_power(n, -1.0 / mono_exp)?),
        Side::Right if space_exp > mono_exp => StepFunction::constant(nr.recip(), nth_power(n, 1.0 / mono_exp)?),
        Side::Left => return Err(Error::BadRegime(format!("left family needs r < e, got r = {space_exp}, e = {mono_exp}"))),
        Side::Right => return Err(Error::BadRegime(format!("right family needs r > e, got r = {space_exp}, e = {mono_exp}"))),
    };
    Ok((f, g))
}

/// `‖D_t f‖_E / ‖f‖_E` for each nonzero `f`.
pub fn dilation_ratios(space: &SpaceSpec, t: &Rational, fs: &[StepFunction]) -> Result<Vec<f64>> {
    fs.iter().filter(|f| !f.is_zero()).map(|f| ratio(space, f, &f.dilate(t)?)).collect()
}

/// Empirical lower bound for `‖D_t‖_{E→E}` over a seeded random corpus.
pub fn dilation_norm_probe(space: &SpaceSpec, t: &Rational, corpus_size: usize, seed: u64) -> Result<f64> {
    let corpus = random_corpus(corpus_size, seed);
    Ok(dilation_ratios(space, t, &corpus)?.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoydEstimate {
    pub alpha_hat: f64,
    pub beta_hat: f64,
}

/// Log-log slopes of the dilation norms over `t < 1` and `t > 1`.
pub fn boyd_probe(space: &SpaceSpec, t_grid: &[Rational], corpus_size: usize, seed: u64) -> Result<BoydEstimate> {
    let corpus = random_corpus(corpus_size, seed);
    let (mut below, mut above) = (Vec::new(), Vec::new());
    for t in t_grid {
        if !(t > &Rational::zero()) || t.is_one() {
            continue;
        }
        let d = dilation_ratios(space, t, &corpus)?.into_iter().fold(f64::NEG_INFINITY, f64::max);
        let point = (rat_to_f64(t).ln(), d.ln());
        if t < &Rational::one() {
            below.push(point);
        } else {
            above.push(point);
        }
    }
    if below.is_empty() || above.is_empty() {
        return Err(Error::InvalidArgument("t grid must have points on both sides of 1".into()));
    }
    Ok(BoydEstimate { alpha_hat: slope_through_origin(&below), beta_hat: slope_through_origin(&above) })
}

/// Dyadic dilation grid `2^k`, `k ∈ [−m, m] \ {0}`.
pub fn dyadic_dilations(m: u32) -> Vec<Rational> {
    let two = Rational::from_integer(BigInt::from(2));
    (1..=m as usize).flat_map(|k| {
        let t = num_traits::pow(two.clone(), k);
        [t.recip(), t]
    })
    .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcavityWitness {
    pub q: f64,
    pub blocks: usize,
    /// `(Σ ‖f_i‖^q)^{1/q}`.
    pub lhs: f64,
    /// `‖(Σ |f_i|^q)^{1/q}‖`.
    pub rhs: f64,
    pub factor: f64,
}

/// Disjoint blocks `2^{−i} 1_{[2^i, 2^{i+1})}`, each of weak-`L_1` norm 1, whose sum
/// stays below `2/t`.
pub fn weak_l1_stack(blocks: usize) -> Vec<StepFunction> {
    let two = Rational::from_integer(BigInt::from(2));
    (0..blocks)
        .map(|i| {
            let lo = num_traits::pow(two.clone(), i);
            let hi = &lo * &two;
            let value = Real::Exact(lo.recip());
            StepFunction::new(vec![lo, hi], vec![Real::zero(), value], Bound::Infinite).expect("block is canonical")
        })
        .collect()
}

/// How far the `q`-concavity inequality `(Σ ‖f_i‖^q)^{1/q} ≤ C ‖(Σ |f_i|^q)^{1/q}‖` is from holding with `C = 1`.
pub fn concavity_witness(space: &SpaceSpec, blocks: &[StepFunction], q: f64) -> Result<ConcavityWitness> {
    let mut lhs_q = 0.0;
    let mut sum = StepFunction::zero(space.alpha.clone());
    for b in blocks {
        lhs_q += norm(space, b)?.to_f64().powf(q);
        sum = sum.add(&b.power(q))?;
    }
    let lhs = lhs_q.powf(1.0 / q);
    let rhs = norm(space, &sum.root(q))?.to_f64();
    Ok(ConcavityWitness { q, blocks: blocks.len(), lhs, rhs, factor: lhs / rhs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{int, rat};

    fn close(x: f64, y: f64, tol: f64) -> bool {
        (x - y).abs() <= tol * y.abs().max(1.0)
    }

    #[test]
    fn parsing_round_trips() {
        for s in ["Lp:2", "Lorentz:2:1", "Lorentz:2:inf", "Weak:1", "Convexified:Lp:1:r=2", "Lp:0.5@4"] {
            let e: SpaceSpec = s.parse().unwrap();
            assert_eq!(e.to_string(), s);
        }
        assert_eq!("Lp:1/2".parse::<SpaceSpec>().unwrap().kind, SpaceKind::Lp(0.5));
        assert!("Lp:0".parse::<SpaceSpec>().is_err());
        assert!("Orlicz:2".parse::<SpaceSpec>().is_err());
        assert!("Convexified:Lp:1:2".parse::<SpaceSpec>().is_err());
        let json = serde_json::to_string(&SpaceSpec::lp(2.0)).unwrap();
        assert_eq!(json, "\"Lp:2\"");
    }

    #[test]
    fn norm_examples() {
        let ind2 = StepFunction::constant(int(2), Real::one());
        assert_eq!(norm(&SpaceSpec::lp(1.0), &ind2).unwrap(), Real::int(2));
        assert!(close(norm(&SpaceSpec::lp(3.0), &ind2).unwrap().to_f64(), 2f64.powf(1.0 / 3.0), 1e-15));
        let ind4 = StepFunction::constant(int(4), Real::one());
        assert_eq!(norm(&"Lorentz:2:2".parse().unwrap(), &ind4).unwrap(), Real::int(2));
        let ind1 = StepFunction::constant(int(1), Real::one());
        assert_eq!(norm(&"Weak:1".parse().unwrap(), &ind1).unwrap(), Real::one());
        assert_eq!(norm(&"Lorentz:1:inf".parse().unwrap(), &ind1).unwrap(), Real::one());
        let f = StepFunction::new(vec![int(1), int(3)], vec![Real::int(2), Real::one()], Bound::Infinite).unwrap();
        let conv = norm(&"Convexified:Lp:1:r=2".parse().unwrap(), &f).unwrap();
        assert_eq!(conv, norm(&SpaceSpec::lp(2.0), &f).unwrap());
        let bounded = SpaceSpec::lp(1.0).with_alpha(Bound::Finite(int(5)));
        assert_eq!(norm(&bounded, &f), Err(Error::AlphaMismatch));
    }

    #[test]
    fn lorentz_norm_matches_quadrature() {
        let f = StepFunction::new(vec![rat(1, 2), int(2), int(5)], vec![Real::int(4), Real::one(), Real::ratio(1, 4)], Bound::Infinite)
            .unwrap();
        let (p, q) = (3.0, 1.5);
        let exact = norm(&SpaceSpec::new(SpaceKind::Lorentz(p, q)).unwrap(), &f).unwrap().to_f64();
        // Midpoint rule in log t on each piece of f* = f.
        let pieces = [(1e-18, 0.5, 4.0), (0.5, 2.0, 1.0), (2.0, 5.0, 0.25)];
        let n = 20_000;
        let mut sum = 0.0;
        for (a, b, v) in pieces {
            let (lo, hi) = (f64::ln(a), f64::ln(b));
            let h = (hi - lo) / n as f64;
            for i in 0..n {
                let t = (lo + (i as f64 + 0.5) * h).exp();
                sum += (t.powf(1.0 / p) * v).powf(q) * h;
            }
        }
        assert!(close(exact, sum.powf(1.0 / q), 1e-6), "{exact} vs {}", sum.powf(1.0 / q));
    }

    #[test]
    fn family_examples() {
        let (f, g) = failure_family(Side::Left, 1.0, 2.0, 4).unwrap();
        assert_eq!(g, StepFunction::constant(int(4), Real::ratio(1, 2)));
        assert_eq!(norm(&SpaceSpec::lp(1.0), &g).unwrap(), Real::int(2));
        assert_eq!(f, StepFunction::constant(int(1), Real::one()));
        let (_, g) = failure_family(Side::Right, 4.0, 2.0, 4).unwrap();
        assert_eq!(g, StepFunction::constant(rat(1, 4), Real::int(2)));
        assert!(close(norm(&SpaceSpec::lp(4.0), &g).unwrap().to_f64(), 2f64.sqrt(), 1e-15));
        for side in [Side::Left, Side::Right] {
            let (r, e) = if side == Side::Left { (1.0, 2.0) } else { (3.0, 2.0) };
            let (f, g) = failure_family(side, r, e, 1).unwrap();
            assert_eq!(f, g);
        }
        assert!(matches!(failure_family(Side::Left, 3.0, 2.0, 4), Err(Error::BadRegime(_))));
        assert!(matches!(failure_family(Side::Right, 1.0, 2.0, 4), Err(Error::BadRegime(_))));
    }

    #[test]
    fn probe_examples() {
        let r = monotonicity_probe(&SpaceSpec::lp(2.0), 2.0, Side::Left, 50, 1).unwrap();
        assert!(r.worst_ratio <= 1.0 + 1e-9 && r.verdict == Verdict::Bounded);
        let r = monotonicity_probe(&SpaceSpec::lp(1.0), 2.0, Side::Left, 20, 1).unwrap();
        assert_eq!(r.verdict, Verdict::Diverging);
        assert!(close(r.worst_ratio, 32.0, 1e-12));
        assert!(close(r.growth_exponent.unwrap(), 0.5, 1e-12));
        assert!(matches!(monotonicity_probe(&SpaceSpec::lp(1.0), 1.0, Side::Left, 0, 1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn dilation_examples() {
        assert_eq!(dilation_norm_probe(&SpaceSpec::lp(2.0), &int(4), 20, 3).unwrap(), 2.0);
        assert_eq!(dilation_norm_probe(&"Weak:1".parse().unwrap(), &int(1), 20, 3).unwrap(), 1.0);
        let d = dilation_norm_probe(&"Lorentz:2:1".parse().unwrap(), &int(4), 20, 3).unwrap();
        assert!(close(d, 2.0, 1e-9));
    }

    #[test]
    fn boyd_examples() {
        let grid = dyadic_dilations(4);
        for (space, idx, tol) in [("Lp:2", 0.5, 1e-6), ("Lp:1", 1.0, 1e-6), ("Lorentz:3:1", 1.0 / 3.0, 1e-3)] {
            let b = boyd_probe(&space.parse().unwrap(), &grid, 10, 5).unwrap();
            assert!(close(b.alpha_hat, idx, tol) && close(b.beta_hat, idx, tol), "{space}: {b:?}");
        }
        assert!(boyd_probe(&SpaceSpec::lp(1.0), &[int(2)], 5, 5).is_err());
    }

    #[test]
    fn weak_l1_is_not_concave() {
        let weak: SpaceSpec = "Weak:1".parse().unwrap();
        let stack = weak_l1_stack(4);
        for b in &stack {
            assert_eq!(norm(&weak, b).unwrap(), Real::one());
        }
        let w = concavity_witness(&weak, &stack, 1.0).unwrap();
        assert_eq!(w.lhs, 4.0);
        assert!(w.rhs < 2.0 && w.factor > 2.0);
    }
}
