//! The change-of-variables operator `T u = (φ')^{1/p} · u∘φ · 1_{(0,β)}` with
//! `φ = H_*^{-1} ∘ G`, its companion `h = 2^{1/p} f 1_{2f^p ≥ g^p}`, the geometric
//! discretization wrapper, the finite doubly stochastic transfer, and Hölder checks.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::majorize::left_majorizes;
use crate::matrix::Matrix;
use crate::numeric::{rational_str, slack, Rational, Real, TAU_ABS};
use crate::schurhorn::tchain::{compose, tchain};
use crate::stepfn::{Rounding, StepFunction};

/// One affine piece of `φ`: `φ(t) = offset + slope·(t − from)` on `[from, to)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferPiece {
    #[serde(with = "rational_str")]
    pub from: Rational,
    #[serde(with = "rational_str")]
    pub to: Rational,
    #[serde(with = "rational_str")]
    pub slope: Rational,
    #[serde(with = "rational_str")]
    pub offset: Rational,
}

impl TransferPiece {
    pub fn image_end(&self) -> Rational {
        &self.offset + &self.slope * (&self.to - &self.from)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferMap {
    #[serde(with = "rational_str")]
    pub beta: Rational,
    pub pieces: Vec<TransferPiece>,
    pub p: f64,
}

impl TransferMap {
    pub fn zero(p: f64) -> Self {
        TransferMap { beta: Rational::zero(), pieces: Vec::new(), p }
    }

    pub fn max_slope(&self) -> Option<&Rational> {
        self.pieces.iter().map(|pc| &pc.slope).max()
    }

    /// Continuity, strict monotonicity, `φ(0⁺) = 0` and coverage of `(0, β)`.
    pub fn is_well_formed(&self) -> bool {
        let mut t = Rational::zero();
        let mut y = Rational::zero();
        for pc in &self.pieces {
            if pc.from != t || pc.offset != y || !pc.slope.is_positive() || pc.to <= pc.from {
                return false;
            }
            t = pc.to.clone();
            y = pc.image_end();
        }
        t == self.beta
    }

    /// `|φ((0, β))|`.
    pub fn image_measure(&self) -> Rational {
        self.pieces.last().map(TransferPiece::image_end).unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, t: &Rational) -> Option<Rational> {
        self.pieces
            .iter()
            .find(|pc| &pc.from <= t && t < &pc.to)
            .map(|pc| &pc.offset + &pc.slope * (t - &pc.from))
    }
}

/// Output of [`build_transfer`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferConstruction {
    pub h: StepFunction,
    /// `h^p`, held exactly; `h` is its `p`-th root.
    pub h_power: StepFunction,
    pub map: TransferMap,
}

fn two() -> Rational {
    Rational::from_integer(BigInt::from(2))
}

/// Builds `h` and `T` with `T h* = g`, `h ≤ 2^{1/p} f` and slopes of `φ` at most 1.
pub fn build_transfer(f: &StepFunction, g: &StepFunction, p: f64) -> Result<TransferConstruction> {
    if !f.is_non_increasing() || !g.is_non_increasing() {
        return Err(Error::NotMonotone);
    }
    let pre = left_majorizes(f, g, p);
    if !pre.holds {
        return Err(Error::NotMajorized { witness: pre.witness_t });
    }
    let (fp, gp) = (f.power(p), g.power(p));
    let exact = fp.is_exact() && gp.is_exact();
    let fp = fp.map_values(Real::rationalized);
    let gp = gp.map_values(Real::rationalized);
    let doubled = Real::Exact(two());
    let h_power = fp.zip_with(&gp, |a, b| {
        let twice = &doubled * a;
        if twice >= *b {
            twice
        } else {
            Real::zero()
        }
    })?;
    let h = h_power.root(p);
    let h = if exact { h } else { h.map_values(|v| Real::Approx(v.to_f64())) };
    let big_h = h_power.antiderivative();
    let big_g = gp.antiderivative();
    for t in StepFunction::merged_grid(&[&h_power, &gp]) {
        if big_h.at(&t) < big_g.at(&t) {
            return Err(Error::NotMajorized { witness: Some(t) });
        }
    }
    let hs = h_power.rearrange();
    let map = invert_onto(&hs, &gp, p)?;
    Ok(TransferConstruction { h, h_power, map })
}

/// `φ = H_*^{-1} ∘ G` for exact step functions `hs = (h*)^p` and `gp = g^p`.
fn invert_onto(hs: &StepFunction, gp: &StepFunction, p: f64) -> Result<TransferMap> {
    let beta = gp.support_end();
    let g_pieces: Vec<(Rational, Rational)> = gp.pieces().map(|pc| (pc.end.clone(), pc.value.to_rational())).collect();
    let h_pieces: Vec<(Rational, Rational)> = hs.pieces().map(|pc| (pc.end.clone(), pc.value.to_rational())).collect();
    let mut pieces: Vec<TransferPiece> = Vec::new();
    let (mut t, mut s) = (Rational::zero(), Rational::zero());
    let (mut i, mut k) = (0, 0);
    while i < g_pieces.len() {
        let Some((s_end, b)) = h_pieces.get(k) else {
            return Err(Error::NotMajorized { witness: Some(t) });
        };
        let (t_end, a) = &g_pieces[i];
        // Remaining mass in the current pieces of G and H_*.
        let mass_g = a * (t_end - &t);
        let mass_h = b * (s_end - &s);
        let step = mass_g.clone().min(mass_h.clone());
        let t_next = &t + &step / a;
        let s_next = &s + &step / b;
        let slope = a / b;
        match pieces.last_mut() {
            Some(last) if last.slope == slope => last.to = t_next.clone(),
            _ => pieces.push(TransferPiece { from: t.clone(), to: t_next.clone(), slope, offset: s.clone() }),
        }
        if step == mass_g {
            i += 1;
        }
        if step == mass_h {
            k += 1;
        }
        t = t_next;
        s = s_next;
    }
    debug_assert!(t == beta);
    Ok(TransferMap { beta, pieces, p })
}

/// `T u = (φ')^{1/p} · u∘φ` on `(0, β)`, zero afterwards.
pub fn apply_transfer(map: &TransferMap, u: &StepFunction) -> StepFunction {
    let u_pieces: Vec<_> = u.pieces().collect();
    let mut first = 0;
    let mut out: Vec<(Rational, Real)> = Vec::new();
    for pc in &map.pieces {
        let weight = Real::Exact(pc.slope.clone()).root(map.p);
        let image_end = pc.image_end();
        let back = |x: &Rational| &pc.from + (x - &pc.offset) / &pc.slope;
        // Offsets increase along the map, so pieces of u ending before this one never matter again.
        while u_pieces.get(first).is_some_and(|up| up.end <= &pc.offset) {
            first += 1;
        }
        for up in &u_pieces[first..] {
            if up.start >= &image_end {
                break;
            }
            let end = if *up.end >= image_end { pc.to.clone() } else { back(up.end) };
            out.push((end, &weight * up.value));
        }
        // Zero on whatever part of the piece maps past the support of u.
        out.push((pc.to.clone(), Real::zero()));
    }
    StepFunction::from_ends(u.alpha().clone(), out)
}

/// Output of [`calderon_transfer`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalderonTransfer {
    pub f2: StepFunction,
    pub g2: StepFunction,
    pub construction: TransferConstruction,
    /// Symbolic norm-chain bound `‖g‖_E ≤ d²·C·2^{1/p}·‖f‖_E`.
    pub norm_chain: String,
    /// `d²·2^{1/p}`, the factor multiplying the monotonicity constant `C`.
    pub norm_chain_factor: f64,
}

/// Rounds `f*` up and `g*` down to powers of `d`, then builds the transfer.
pub fn calderon_transfer(f: &StepFunction, g: &StepFunction, p: f64, d: f64) -> Result<CalderonTransfer> {
    let pre = left_majorizes(f, g, p);
    if !pre.holds {
        return Err(Error::NotMajorized { witness: pre.witness_t });
    }
    let f2 = f.discretize_geometric(d, Rounding::Up)?;
    let g2 = g.discretize_geometric(d, Rounding::Down)?;
    let construction = build_transfer(&f2, &g2, p)?;
    Ok(CalderonTransfer {
        f2,
        g2,
        construction,
        norm_chain: format!("d^2 * C * 2^(1/p) with d = {d}, p = {p}"),
        norm_chain_factor: d * d * 2f64.powf(1.0 / p),
    })
}

/// Doubly stochastic `S` with `S a = b`, as a product of T-transforms.
pub fn hlp_transfer(a: &[Real], b: &[Real]) -> Result<Matrix<Real>> {
    let chain = tchain(a, b)?;
    Ok(compose(a.len(), &chain))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderReport {
    pub holds: bool,
    /// Largest positive excess of `T(ab)` over `T(a^s)^{1/s} T(b^{s'})^{1/s'}`.
    pub max_violation: f64,
    pub points_checked: usize,
}

fn conjugate(s: f64) -> Result<f64> {
    if !(s > 1.0) || !s.is_finite() {
        return Err(Error::InvalidArgument(format!("Hölder exponent must exceed 1, got {s}")));
    }
    Ok(s / (s - 1.0))
}

fn holder_report(triples: impl Iterator<Item = (f64, f64, f64)>, s: f64, s_dual: f64) -> HolderReport {
    let mut worst = 0.0f64;
    let mut holds = true;
    let mut count = 0;
    for (lhs, ta, tb) in triples {
        let rhs = ta.powf(1.0 / s) * tb.powf(1.0 / s_dual);
        let excess = lhs - rhs;
        worst = worst.max(excess);
        holds &= excess <= slack(rhs.max(lhs));
        count += 1;
    }
    HolderReport { holds, max_violation: worst.max(0.0), points_checked: count }
}

/// `T(ab) ≤ T(a^s)^{1/s} T(b^{s'})^{1/s'}` for a nonnegative matrix, entrywise.
pub fn holder_check_matrix(t: &Matrix<f64>, a: &[f64], b: &[f64], s: f64) -> Result<HolderReport> {
    let s_dual = conjugate(s)?;
    if a.len() != t.n() || b.len() != t.n() {
        return Err(Error::DimensionMismatch("vector length must match the matrix".into()));
    }
    if t.rows().iter().flatten().chain(a).chain(b).any(|x| *x < 0.0) {
        return Err(Error::InvalidArgument("operator and vectors must be nonnegative".into()));
    }
    let ab: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
    let as_: Vec<f64> = a.iter().map(|x| x.powf(s)).collect();
    let bs: Vec<f64> = b.iter().map(|x| x.powf(s_dual)).collect();
    let (l, ra, rb) = (t.apply_f64(&ab), t.apply_f64(&as_), t.apply_f64(&bs));
    Ok(holder_report((0..t.n()).map(|i| (l[i], ra[i], rb[i])), s, s_dual))
}

/// The same inequality for a transfer operator, checked on the merged output grid.
pub fn holder_check_transfer(map: &TransferMap, a: &StepFunction, b: &StepFunction, s: f64) -> Result<HolderReport> {
    let s_dual = conjugate(s)?;
    let ab = a.zip_with(b, |x, y| x * y)?;
    let l = apply_transfer(map, &ab);
    let ra = apply_transfer(map, &a.power(s));
    let rb = apply_transfer(map, &b.power(s_dual));
    let grid = StepFunction::merged_grid(&[&l, &ra, &rb]);
    let mut points: Vec<Rational> = Vec::with_capacity(grid.len());
    let mut prev = Rational::zero();
    for t in grid {
        points.push((&prev + &t) / two());
        prev = t;
    }
    let triples = points.iter().map(|t| (l.eval(t).to_f64(), ra.eval(t).to_f64(), rb.eval(t).to_f64()));
    Ok(holder_report(triples, s, s_dual))
}

/// Largest slope allowed by the contraction property.
pub fn slope_ceiling() -> Real {
    Real::Approx(1.0 + TAU_ABS)
}

/// Whether every slope is at most `1 + τ_abs`.
pub fn slopes_bounded(map: &TransferMap) -> bool {
    let ceiling = slope_ceiling();
    map.pieces.iter().all(|pc| Real::Exact(pc.slope.clone()) <= ceiling)
}

/// `Th* = g` up to the float slack at every cell of the merged grid.
pub fn reproduces(construction: &TransferConstruction, g: &StepFunction) -> bool {
    let image = apply_transfer(&construction.map, &construction.h.rearrange());
    image.ge_pointwise(g) && g.ge_pointwise(&image)
}

/// `h ≤ 2^{1/p} f`, checked exactly as `h^p ≤ 2 f^p`.
pub fn h_bounded(construction: &TransferConstruction, f: &StepFunction, p: f64) -> bool {
    let bound = f.power(p).map_values(|v| Real::Exact(two() * v.to_rational()));
    bound
        .zip_with(&construction.h_power, |b, h| if h <= b { Real::zero() } else { Real::one() })
        .is_ok_and(|d| d.is_zero())
}
