//! Seeded random step functions, the frozen standard corpus, and generators of
//! majorized pairs.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::numeric::{Bound, Rational, Real};
use crate::stepfn::StepFunction;

pub const STANDARD_SEED: u64 = 0x6d61_6a6f;
pub const STANDARD_SIZE: usize = 200;
pub const MAX_PIECES: usize = 64;
/// Breakpoints are multiples of `2^{-GRID_LEVEL}`.
pub const GRID_LEVEL: u32 = 6;
/// Breakpoints stay below this horizon.
pub const HORIZON: i64 = 1024;
pub const MIN_EXPONENT: i32 = -8;
pub const MAX_EXPONENT: i32 = 8;

const STANDARD_JSON: &str = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/data/standard_corpus.json"));

/// Independent deterministic stream for trial `trial` under `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn power_of_two(k: i32) -> Real {
    let base = Rational::from_integer(BigInt::from(2));
    let r = if k >= 0 { num_traits::pow(base, k as usize) } else { num_traits::pow(base, k.unsigned_abs() as usize).recip() };
    Real::Exact(r)
}

/// At most [`MAX_PIECES`] pieces with breakpoints `k/2^GRID_LEVEL` in `(0, HORIZON)`
/// and values `2^k`, `k ∈ [MIN_EXPONENT, MAX_EXPONENT]`.
pub fn random_step(rng: &mut impl Rng) -> StepFunction {
    let ticks = HORIZON << GRID_LEVEL;
    let pieces = rng.gen_range(1..=MAX_PIECES);
    let mut ends = BTreeSet::new();
    while ends.len() < pieces {
        ends.insert(rng.gen_range(1..ticks));
    }
    let denom = BigInt::from(1) << GRID_LEVEL;
    let breakpoints = ends.into_iter().map(|k| Rational::new(BigInt::from(k), denom.clone())).collect();
    let values = (0..pieces).map(|_| power_of_two(rng.gen_range(MIN_EXPONENT..=MAX_EXPONENT))).collect();
    StepFunction::new(breakpoints, values, Bound::Infinite).expect("generated pieces are canonical")
}

pub fn random_corpus(size: usize, seed: u64) -> Vec<StepFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..size).map(|_| random_step(&mut rng)).collect()
}

/// The frozen corpus shipped with the crate; equal to `random_corpus(STANDARD_SIZE, STANDARD_SEED)`.
pub fn standard_corpus() -> &'static [StepFunction] {
    static CORPUS: OnceLock<Vec<StepFunction>> = OnceLock::new();
    CORPUS.get_or_init(|| serde_json::from_str(STANDARD_JSON).expect("bundled corpus parses"))
}

/// Corpus element `i`, cycling through the standard corpus.
pub fn corpus_element(i: usize) -> &'static StepFunction {
    let c = standard_corpus();
    &c[i % c.len()]
}

/// Drops the values to their running minimum, making the function non-increasing.
fn monotone_from(alpha: Bound, pieces: Vec<(Rational, Real)>) -> StepFunction {
    let mut floor: Option<Real> = None;
    let pieces = pieces.into_iter().map(|(end, v)| {
        let v = match floor.take() {
            Some(f) if f < v => f,
            _ => v,
        };
        floor = Some(v.clone());
        (end, v)
    });
    StepFunction::from_ends(alpha, pieces)
}

/// Averages of `u` over the cells `[cuts[k-1], cuts[k])`, starting from 0.
fn cell_averages(u: &StepFunction, cuts: &[Rational]) -> Vec<(Rational, Real)> {
    let mut start = Rational::zero();
    cuts.iter()
        .map(|end| {
            let mass = u.integral_over(&start, &Bound::Finite(end.clone()));
            let avg = mass.mul_rat(&(end - &start).recip());
            start = end.clone();
            (end.clone(), avg)
        })
        .collect()
}

fn random_cuts(candidates: &[Rational], last: Rational, rng: &mut impl Rng) -> Vec<Rational> {
    let mut cuts: Vec<Rational> = candidates.iter().filter(|t| **t < last && rng.gen_bool(0.5)).cloned().collect();
    cuts.push(last);
    cuts
}

/// `g` with `f^e ≻ g^e`: averages `(f*)^e` over a random coarsening of its
/// pieces, optionally spreading the last cell past the support.
pub fn spread(f: &StepFunction, e: f64, rng: &mut impl Rng) -> StepFunction {
    let fe = f.rearrange().power(e);
    if fe.is_zero() {
        return fe;
    }
    let stretch = Rational::new(BigInt::from(4 + rng.gen_range(0..=4)), BigInt::from(4));
    let cuts = random_cuts(fe.breakpoints(), fe.support_end() * stretch, rng);
    monotone_from(f.alpha().clone(), cell_averages(&fe, &cuts)).root(e)
}

/// Pieces of `u` on `[from, to)` squeezed by the factor `m` toward `from`, mass kept.
fn squeeze(u: &StepFunction, from: &Rational, to: &Rational, m: i64) -> Vec<(Rational, Real)> {
    let m = Rational::from_integer(BigInt::from(m));
    u.pieces()
        .filter(|pc| pc.end > from && pc.start < to)
        .map(|pc| (from + (pc.end.min(to) - from) / &m, pc.value.mul_rat(&m)))
        .collect()
}

/// `g` with `f^e ▷ g^e`: squeezes a random head `(0, K)` of `(f*)^e` into
/// `(0, K/m)` with the same mass and slides the rest of the tail left.
pub fn concentrate(f: &StepFunction, e: f64, rng: &mut impl Rng) -> StepFunction {
    let fe = f.rearrange().power(e);
    if fe.is_zero() {
        return fe;
    }
    let k = rng.gen_range(0..fe.num_pieces());
    let head_end = fe.breakpoints()[k].clone();
    let m = *[1, 2, 4, 8].choose(rng).expect("nonempty");
    let mut pieces = squeeze(&fe, &Rational::zero(), &head_end, m);
    let shift = &head_end - &head_end / Rational::from_integer(BigInt::from(m));
    pieces.extend(fe.pieces().skip(k + 1).map(|p| (p.end - &shift, p.value.clone())));
    monotone_from(f.alpha().clone(), pieces).root(e)
}

/// Non-increasing `g` whose exponent-`p` head integrals match those of `f*` up to
/// a split point `s` and whose exponent-`q` tail integrals from `s` on are dominated,
/// so that every `t` lies in the head set or the tail set.
pub fn k_dominated(f: &StepFunction, p: f64, q: f64, rng: &mut impl Rng) -> StepFunction {
    let fs = f.rearrange();
    let n = fs.num_pieces();
    if n == 0 {
        return fs;
    }
    let j = rng.gen_range(0..=n);
    let split = if j == 0 { Rational::zero() } else { fs.breakpoints()[j - 1].clone() };
    let mut pieces: Vec<(Rational, Real)> = Vec::new();
    if j > 0 {
        let cuts = random_cuts(fs.breakpoints(), split.clone(), rng);
        pieces.extend(cell_averages(&fs.power(p), &cuts).into_iter().map(|(t, v)| (t, v.root(p))));
    }
    if j < n {
        let k = rng.gen_range(j..n);
        let head_end = fs.breakpoints()[k].clone();
        let fq = fs.power(q);
        let ceiling = pieces.last().map(|(_, v)| v.powf(q));
        let lead = fq.eval(&split);
        let mut m = *[1, 2, 4, 8].choose(rng).expect("nonempty");
        while m > 1 && ceiling.as_ref().is_some_and(|c| lead.mul_rat(&Rational::from_integer(BigInt::from(m))) > *c) {
            m /= 2;
        }
        let squeezed = squeeze(&fq, &split, &head_end, m);
        let shift = (&head_end - &split) - (&head_end - &split) / Rational::from_integer(BigInt::from(m));
        pieces.extend(squeezed.into_iter().map(|(t, v)| (t, v.root(q))));
        pieces.extend(fs.pieces().skip(k + 1).map(|pc| (pc.end - &shift, pc.value.clone())));
    }
    monotone_from(f.alpha().clone(), pieces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::decompose_k;
    use crate::majorize::{left_majorizes, right_majorizes};

    #[test]
    fn standard_corpus_is_reproducible() {
        let fresh = random_corpus(STANDARD_SIZE, STANDARD_SEED);
        assert_eq!(standard_corpus(), fresh.as_slice());
    }

    #[test]
    #[ignore = "rewrites data/standard_corpus.json"]
    fn write_standard_corpus() {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/standard_corpus.json");
        let json = serde_json::to_string(&random_corpus(STANDARD_SIZE, STANDARD_SEED)).unwrap();
        std::fs::write(path, json + "\n").unwrap();
    }

    #[test]
    fn corpus_shape() {
        for f in standard_corpus() {
            assert!((1..=MAX_PIECES).contains(&f.num_pieces()));
            assert!(f.is_on_dyadic_grid(GRID_LEVEL));
            assert!(f.support_end() < Rational::from_integer(HORIZON.into()));
            assert!(f.is_exact());
        }
    }

    #[test]
    fn generators_respect_majorization() {
        for (i, f) in standard_corpus().iter().take(40).enumerate() {
            let mut rng = trial_rng(11, i as u64);
            for e in [0.5, 1.0, 2.0] {
                let g = spread(f, e, &mut rng);
                assert!(g.is_non_increasing());
                assert!(left_majorizes(f, &g, e).holds);
                let g = concentrate(f, e, &mut rng);
                assert!(g.is_non_increasing());
                let r = right_majorizes(f, &g, e);
                assert!(r.holds, "{e} {r:?}");
            }
            for (p, q) in [(1.0, 2.0), (2.0, 3.0)] {
                let g = k_dominated(f, p, q, &mut rng);
                let d = decompose_k(&f.rearrange(), &g, p, q);
                assert!(d.is_ok(), "{i} {p} {q} {d:?}");
            }
        }
    }
}
