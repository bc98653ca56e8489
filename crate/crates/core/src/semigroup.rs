//! Slotted discretization of `L²([0,T], H)` and the evolution semigroups
//! acting on it.
//!
//! Slot `i` covers `(t_i, t_{i+1}]` with `t_i = i·h`, `h = T/N`. Every
//! operator here is a block shift: block `i` maps slot `i − k` to slot `i`.
//! Both multiplication blocks and evolution blocks are indexed by left
//! endpoints, so block `i` of `𝒯(τ)^n` is exactly `V_n(t_i, t_i − nτ)`.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::bounds::{n0_threshold, z_constant};
use crate::error::{Error, Result};
use crate::family::{c_gamma_on, holder_seminorm, TimeDependentFamily};
use crate::oracle::refine_to_tol;
use crate::rates::{least_squares, rate_fit, ConvergenceReport, ERROR_FLOOR};
use crate::spectral::{op_norm, SpectralOperator};
use crate::trotter::{trotter, Variant};

/// Relative slack allowed on explicit constants.
pub const CONSTANT_SLACK: f64 = 1e-6;

/// Number of sample times used to estimate sup-type constants in the checks.
pub const CONSTANT_GRID: usize = 2048;

/// Piecewise constant function on `N` slots.
#[derive(Debug, Clone, PartialEq)]
pub struct SlottedFunction {
    horizon: f64,
    slots: Vec<DVector<f64>>,
}

impl SlottedFunction {
    pub fn new(horizon: f64, slots: Vec<DVector<f64>>) -> Result<Self> {
        if slots.is_empty() {
            return Err(Error::DegenerateGrid { grid_n: 0, min: 1 });
        }
        let dim = slots[0].len();
        if let Some(bad) = slots.iter().find(|s| s.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: bad.len() });
        }
        Ok(Self { horizon, slots })
    }

    pub fn n_slots(&self) -> usize {
        self.slots.len()
    }

    pub fn slot_width(&self) -> f64 {
        self.horizon / self.slots.len() as f64
    }

    pub fn slots(&self) -> &[DVector<f64>] {
        &self.slots
    }

    /// `(h Σᵢ ‖fᵢ‖²)^{1/2}`.
    pub fn norm(&self) -> f64 {
        (self.slot_width() * self.slots.iter().map(|s| s.norm_squared()).sum::<f64>()).sqrt()
    }
}

/// Operator `(Gf)_i = M_i f_{i−k}` on slotted functions, zero for `i < k`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockShiftOperator {
    shift: usize,
    blocks: Vec<DMatrix<f64>>,
    dim: usize,
    horizon: f64,
}

impl BlockShiftOperator {
    /// Blocks with `i < shift` are replaced by zeros.
    pub fn new(shift: usize, mut blocks: Vec<DMatrix<f64>>, dim: usize, horizon: f64) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::DegenerateGrid { grid_n: 0, min: 1 });
        }
        if let Some(bad) = blocks.iter().find(|b| b.nrows() != dim || b.ncols() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: bad.nrows().max(bad.ncols()) });
        }
        for b in blocks.iter_mut().take(shift) {
            b.fill(0.0);
        }
        Ok(Self { shift, blocks, dim, horizon })
    }

    pub fn identity(n_slots: usize, dim: usize, horizon: f64) -> Self {
        Self { shift: 0, blocks: vec![DMatrix::identity(dim, dim); n_slots], dim, horizon }
    }

    pub fn zero(n_slots: usize, dim: usize, horizon: f64, shift: usize) -> Self {
        Self { shift, blocks: vec![DMatrix::zeros(dim, dim); n_slots], dim, horizon }
    }

    pub fn n_slots(&self) -> usize {
        self.blocks.len()
    }

    pub fn slot_width(&self) -> f64 {
        self.horizon / self.blocks.len() as f64
    }

    pub fn shift(&self) -> usize {
        self.shift
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> &[DMatrix<f64>] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &DMatrix<f64> {
        &self.blocks[i]
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.n_slots() != other.n_slots() {
            return Err(Error::DimensionMismatch { expected: self.n_slots(), found: other.n_slots() });
        }
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Ok(())
    }

    pub fn apply(&self, f: &SlottedFunction) -> Result<SlottedFunction> {
        if f.n_slots() != self.n_slots() {
            return Err(Error::DimensionMismatch { expected: self.n_slots(), found: f.n_slots() });
        }
        if f.slots[0].len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: f.slots[0].len() });
        }
        let slots = (0..self.n_slots())
            .map(|i| {
                if i < self.shift {
                    DVector::zeros(self.dim)
                } else {
                    &self.blocks[i] * &f.slots[i - self.shift]
                }
            })
            .collect();
        Ok(SlottedFunction { horizon: self.horizon, slots })
    }

    /// `self ∘ other`: block `i` is `G_i H_{i−k_G}`, shift `k_G + k_H`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let shift = self.shift + other.shift;
        let n = self.n_slots();
        let blocks = (0..n)
            .map(|i| {
                if i < shift {
                    DMatrix::zeros(self.dim, self.dim)
                } else {
                    &self.blocks[i] * &other.blocks[i - self.shift]
                }
            })
            .collect();
        Ok(Self { shift, blocks, dim: self.dim, horizon: self.horizon })
    }

    pub fn pow(&self, m: usize) -> Result<Self> {
        let mut acc = Self::identity(self.n_slots(), self.dim, self.horizon);
        for _ in 0..m {
            acc = self.compose(&acc)?;
        }
        Ok(acc)
    }

    /// Difference of two operators with the same shift.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        if self.shift != other.shift {
            return Err(Error::DomainError(format!("shift {} differs from {}", self.shift, other.shift)));
        }
        let blocks = self.blocks.iter().zip(&other.blocks).map(|(a, b)| a - b).collect();
        Ok(Self { shift: self.shift, blocks, dim: self.dim, horizon: self.horizon })
    }

    /// Blockwise `M·G_i`.
    pub fn left_mul(&self, m: &DMatrix<f64>) -> Self {
        Self { blocks: self.blocks.iter().map(|b| m * b).collect(), ..self.clone() }
    }

    /// Blockwise `G_i·M`.
    pub fn right_mul(&self, m: &DMatrix<f64>) -> Self {
        Self { blocks: self.blocks.iter().map(|b| b * m).collect(), ..self.clone() }
    }

    /// `max_i ‖M_i‖`, the operator norm on the slotted space.
    pub fn block_norm(&self) -> Result<f64> {
        let mut best = 0.0_f64;
        for b in self.blocks.iter().skip(self.shift) {
            best = best.max(op_norm(b)?);
        }
        Ok(best)
    }

    /// Dense `(N·dim) × (N·dim)` matrix of the operator.
    pub fn assemble(&self) -> DMatrix<f64> {
        let (n, d) = (self.n_slots(), self.dim);
        let mut out = DMatrix::zeros(n * d, n * d);
        for i in self.shift..n {
            let j = i - self.shift;
            out.view_mut((i * d, j * d), (d, d)).copy_from(&self.blocks[i]);
        }
        out
    }
}

fn slot_time(horizon: f64, n_slots: usize, i: usize) -> f64 {
    if i == n_slots {
        horizon
    } else {
        i as f64 * horizon / n_slots as f64
    }
}

fn check_slots(n_slots: usize) -> Result<()> {
    if n_slots == 0 {
        return Err(Error::DegenerateGrid { grid_n: 0, min: 1 });
    }
    Ok(())
}

/// `𝒰₀(τ)`, `τ = k·h`: shift by `k` slots with blocks `e^{-τA}`.
pub fn build_u0(a: &SpectralOperator, n_slots: usize, k: usize, horizon: f64) -> Result<BlockShiftOperator> {
    check_slots(n_slots)?;
    let dim = a.dim();
    if k >= n_slots {
        return Ok(BlockShiftOperator::zero(n_slots, dim, horizon, k));
    }
    let tau = k as f64 * horizon / n_slots as f64;
    let e = a.semigroup(tau)?.into_matrix();
    BlockShiftOperator::new(k, vec![e; n_slots], dim, horizon)
}

/// `e^{-τ𝔅}`: block `i` is `e^{-τB(t_i)}`.
pub fn build_exp_b(family: &TimeDependentFamily, n_slots: usize, tau: f64) -> Result<BlockShiftOperator> {
    check_slots(n_slots)?;
    let horizon = family.horizon();
    let blocks = (0..n_slots)
        .map(|i| Ok(family.exp_neg(tau, slot_time(horizon, n_slots, i))?.into_matrix()))
        .collect::<Result<Vec<_>>>()?;
    BlockShiftOperator::new(0, blocks, family.dim(), horizon)
}

fn check_dims(a: &SpectralOperator, family: &TimeDependentFamily) -> Result<()> {
    if a.dim() != family.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: family.dim() });
    }
    Ok(())
}

fn tau_of(family: &TimeDependentFamily, n_slots: usize, k: usize) -> f64 {
    k as f64 * family.horizon() / n_slots as f64
}

/// `𝒯(τ) = 𝒰₀(τ) e^{-τ𝔅}`: block `i` is `e^{-τA} e^{-τB(t_{i−k})}`.
pub fn build_t(a: &SpectralOperator, family: &TimeDependentFamily, n_slots: usize, k: usize) -> Result<BlockShiftOperator> {
    check_dims(a, family)?;
    let u0 = build_u0(a, n_slots, k, family.horizon())?;
    if k >= n_slots {
        return Ok(u0);
    }
    u0.compose(&build_exp_b(family, n_slots, tau_of(family, n_slots, k))?)
}

/// `𝒯̃(τ) = e^{-τ𝔅} 𝒰₀(τ)`: block `i` is `e^{-τB(t_i)} e^{-τA}`.
pub fn build_t_reversed(
    a: &SpectralOperator,
    family: &TimeDependentFamily,
    n_slots: usize,
    k: usize,
) -> Result<BlockShiftOperator> {
    check_dims(a, family)?;
    let u0 = build_u0(a, n_slots, k, family.horizon())?;
    if k >= n_slots {
        return Ok(u0);
    }
    build_exp_b(family, n_slots, tau_of(family, n_slots, k))?.compose(&u0)
}

fn build_t_variant(
    variant: Variant,
    a: &SpectralOperator,
    family: &TimeDependentFamily,
    n_slots: usize,
    k: usize,
) -> Result<BlockShiftOperator> {
    match variant {
        Variant::Left => build_t(a, family, n_slots, k),
        Variant::Right => build_t_reversed(a, family, n_slots, k),
    }
}

/// Reference propagators `U(t_i, t_j)` between slot times, computed on
/// demand and kept for reuse across checks.
pub struct SlotPropagators<'a> {
    a: &'a SpectralOperator,
    family: &'a TimeDependentFamily,
    n_slots: usize,
    tol: f64,
    cache: HashMap<(usize, usize), DMatrix<f64>>,
}

impl<'a> SlotPropagators<'a> {
    pub fn new(a: &'a SpectralOperator, family: &'a TimeDependentFamily, n_slots: usize, tol: f64) -> Self {
        Self { a, family, n_slots, tol, cache: HashMap::new() }
    }

    pub fn time(&self, i: usize) -> f64 {
        slot_time(self.family.horizon(), self.n_slots, i)
    }

    /// `U(t_to, t_from)`.
    pub fn get(&mut self, from: usize, to: usize) -> Result<&DMatrix<f64>> {
        if !self.cache.contains_key(&(from, to)) {
            let u = refine_to_tol(self.a, self.family, self.time(from), self.time(to), self.tol)?;
            self.cache.insert((from, to), u.matrix);
        }
        Ok(&self.cache[&(from, to)])
    }

    /// `𝒰(k·h)`.
    pub fn evolution(&mut self, k: usize) -> Result<BlockShiftOperator> {
        let (n, dim, horizon) = (self.n_slots, self.a.dim(), self.family.horizon());
        if k >= n {
            return Ok(BlockShiftOperator::zero(n, dim, horizon, k));
        }
        let mut blocks = vec![DMatrix::zeros(dim, dim); n];
        for (i, block) in blocks.iter_mut().enumerate().skip(k) {
            *block = self.get(i - k, i)?.clone();
        }
        BlockShiftOperator::new(k, blocks, dim, horizon)
    }
}

/// `𝒰(τ)`: block `i` is `U(t_i, t_i − τ)` from the reference oracle.
pub fn build_u_evo(
    a: &SpectralOperator,
    family: &TimeDependentFamily,
    n_slots: usize,
    k: usize,
    tol: f64,
) -> Result<BlockShiftOperator> {
    check_dims(a, family)?;
    check_slots(n_slots)?;
    SlotPropagators::new(a, family, n_slots, tol).evolution(k)
}

/// Errors of one correspondence run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Correspondence {
    pub n_slots: usize,
    pub n: usize,
    /// `max_τ ‖𝒰(τ) − 𝒯(τ/n)^n‖`.
    pub semigroup_error: f64,
    /// `max ‖U(t,s) − V_n(t,s)‖` over the matching pairs.
    pub propagator_error: f64,
    pub gap: f64,
    pub pairs: usize,
}

fn check_divisible(n_slots: usize, n: usize) -> Result<()> {
    if n == 0 || n_slots == 0 || !n_slots.is_multiple_of(n) {
        return Err(Error::IndivisibleGrid { n, slots: n_slots });
    }
    Ok(())
}

/// Compares the block-level error of `𝒯(τ/n)^n` against the pointwise sup
/// error of the product over all `τ = k·h`, `k ∈ {n, 2n, …, N}`.
pub fn correspondence_check(
    a: &SpectralOperator,
    family: &TimeDependentFamily,
    n_slots: usize,
    n: usize,
    tol: f64,
) -> Result<Correspondence> {
    correspondence_check_variant(Variant::Left, a, family, n_slots, n, tol)
}

pub fn correspondence_check_variant(
    variant: Variant,
    a: &SpectralOperator,
    family: &TimeDependentFamily,
    n_slots: usize,
    n: usize,
    tol: f64,
) -> Result<Correspondence> {
    check_dims(a, family)?;
    check_divisible(n_slots, n)?;
    correspondence_with(&mut SlotPropagators::new(a, family, n_slots, tol), variant, n)
}

/// [`correspondence_check_variant`] drawing reference propagators from a
/// shared cache.
pub fn correspondence_with(cache: &mut SlotPropagators<'_>, variant: Variant, n: usize) -> Result<Correspondence> {
    let (a, family, n_slots) = (cache.a, cache.family, cache.n_slots);
    check_dims(a, family)?;
    check_divisible(n_slots, n)?;
    let (mut semigroup_error, mut propagator_error, mut pairs) = (0.0_f64, 0.0_f64, 0);
    for k in (n..=n_slots).step_by(n) {
        let u = cache.evolution(k)?;
        let t = build_t_variant(variant, a, family, n_slots, k / n)?.pow(n)?;
        semigroup_error = semigroup_error.max(u.sub(&t)?.block_norm()?);
        for i in k..n_slots {
            let (s_time, t_time) = (cache.time(i - k), cache.time(i));
            let v = trotter(variant, a, family, s_time, t_time, n)?;
            let err = op_norm(&(&v.matrix - cache.get(i - k, i)?))?;
            propagator_error = propagator_error.max(err);
            pairs += 1;
        }
    }
    Ok(Correspondence {
        n_slots,
        n,
        semigroup_error,
        propagator_error,
        gap: (semigroup_error - propagator_error).abs(),
        pairs,
    })
}

/// Decay of `max_τ ‖𝒰(τ) − 𝒯(τ/n)^n‖` in `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SemigroupRate {
    pub variant: Variant,
    pub n_slots: usize,
    pub fit: ConvergenceReport,
    /// Fitted slope is at least `β − 0.2`.
    pub holds: bool,
}

/// Semigroup-level convergence over `n_list`, measured on the common set
/// of `τ` that are multiples of `max(n_list)` slots.
pub fn semigroup_rate(
    variant: Variant,
    a: &SpectralOperator,
    family: &TimeDependentFamily,
    n_slots: usize,
    n_list: &[usize],
    tol: f64,
) -> Result<SemigroupRate> {
    check_dims(a, family)?;
    let n_max = n_list.iter().copied().max().unwrap_or(0);
    for &n in n_list {
        check_divisible(n_slots, n)?;
        check_divisible(n_max, n)?;
    }
    let mut cache = SlotPropagators::new(a, family, n_slots, tol);
    let mut entries = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let mut worst = 0.0_f64;
        for k in (n_max..n_slots).step_by(n_max) {
            let u = cache.evolution(k)?;
            let t = build_t_variant(variant, a, family, n_slots, k / n)?.pow(n)?;
            worst = worst.max(u.sub(&t)?.block_norm()?);
        }
        entries.push((n, worst));
    }
    let beta = family.declared_beta();
    let fit = rate_fit(&entries, beta, family.declared_alpha())?;
    Ok(SemigroupRate { variant, n_slots, holds: fit.fitted_slope >= beta - 0.2, fit })
}

fn default_sources(horizon: f64, grid_n: usize) -> Vec<f64> {
    (0..=grid_n).map(|j| j as f64 * horizon / grid_n as f64).collect()
}

fn check_gamma(family: &TimeDependentFamily, gamma: f64) -> Result<()> {
    if !(gamma >= family.declared_alpha() && gamma < 1.0) {
        return Err(Error::DomainError(format!(
            "gamma {gamma} outside [{}, 1)",
            family.declared_alpha()
        )));
    }
    Ok(())
}

/// Fitted exponent `p` of `max LHS ≈ c·τ^p`, when at least two points
/// clear the floor.
fn order_slope(rows: &[LemmaRow]) -> Option<f64> {
    let mut by_tau: Vec<(f64, f64)> = Vec::new();
    for r in rows {
        match by_tau.iter_mut().find(|(t, _)| *t == r.tau) {
            Some(entry) => entry.1 = entry.1.max(r.lhs),
            None => by_tau.push((r.tau, r.lhs)),
        }
    }
    let points: Vec<(f64, f64)> = by_tau
        .into_iter()
        .filter(|&(_, l)| l > ERROR_FLOOR)
        .map(|(t, l)| (t.ln(), l.ln()))
        .collect();
    (points.len() >= 2).then(|| least_squares(&points).slope)
}

/// One evaluated bound: `lhs ≤ rhs` at source time `t` and step `τ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LemmaRow {
    pub tau: f64,
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// Differences at or below this size are rounding noise of contractions.
const ROUNDOFF: f64 = 64.0 * f64::EPSILON;

fn row(tau: f64, t: f64, lhs: f64, rhs: f64) -> LemmaRow {
    let ratio = if rhs > 0.0 {
        lhs / rhs
    } else if lhs <= ROUNDOFF {
        0.0
    } else {
        f64::INFINITY
    };
    LemmaRow { tau, t, lhs, rhs, ratio }
}

/// Result of the first-order one-step bound `‖A^{-γ}(𝒯(τ) − 𝒰(τ))‖ ≤ 2C_γτ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OneStepReport {
    pub gamma: f64,
    pub c_gamma: f64,
    pub max_ratio_left: f64,
    pub max_ratio_right: f64,
    /// Fitted power of `τ` in the left-multiplied difference.
    pub order_slope: Option<f64>,
    pub holds: bool,
    pub rows_left: Vec<LemmaRow>,
    pub rows_right: Vec<LemmaRow>,
}

/// Step sizes `{10⁻¹, …, 10⁻⁴}·T`.
pub fn decade_taus(horizon: f64) -> Vec<f64> {
    (1..=4).map(|p| horizon * 10f64.powi(-p)).collect()
}

/// Step sizes `{2⁻², …, 2⁻⁸}·T`.
pub fn dyadic_taus(horizon: f64) -> Vec<f64> {
    (2..=8).map(|p| horizon * 0.5f64.powi(p)).collect()
}

/// `e^{-τA}e^{-τB(t)} − U(t+τ, t)` for every step `τ` of a grid and every
/// source time `t = jT/grid_n` with `t + τ ≤ T`.
#[derive(Debug, Clone)]
pub struct StepDifferences {
    horizon: f64,
    rows: Vec<(f64, f64, DMatrix<f64>)>,
}

impl StepDifferences {
    pub fn compute(
        a: &SpectralOperator,
        family: &TimeDependentFamily,
        tau_grid: &[f64],
        grid_n: usize,
        tol: f64,
    ) -> Result<Self> {
        check_dims(a, family)?;
        let horizon = family.horizon();
        let mut rows = Vec::new();
        for &tau in tau_grid {
            let ea = a.semigroup(tau)?.into_matrix();
            for t in sources_for(horizon, grid_n, tau) {
                let split = &ea * family.exp_neg(tau, t)?.into_matrix();
                let u = refine_to_tol(a, family, t, (t + tau).min(horizon), tol)?;
                rows.push((tau, t, split - u.matrix));
            }
        }
        Ok(Self { horizon, rows })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

fn sources_for(horizon: f64, grid_n: usize, tau: f64) -> impl Iterator<Item = f64> {
    default_sources(horizon, grid_n)
        .into_iter()
        .filter(move |&t| t + tau <= horizon * (1.0 + 1e-12))
}

/// Checks both inequalities of the one-step bound pointwise: for every
/// `τ` and grid source time `t`, the block of `𝒯(τ) − 𝒰(τ)` leaving `t`.
pub fn check_onestep_36(
    a: &SpectralOperator,
    family: &TimeDependentFamily,
    gamma: f64,
    tau_grid: &[f64],
    grid_n: usize,
    tol: f64,
) -> Result<OneStepReport> {
    let diffs = StepDifferences::compute(a, family, tau_grid, grid_n, tol)?;
    check_onestep_36_on(a, family, gamma, &diffs)
}

pub fn check_onestep_36_on(
    a: &SpectralOperator,
    family: &TimeDependentFamily,
    gamma: f64,
    diffs: &StepDifferences,
) -> Result<OneStepReport> {
    check_dims(a, family)?;
    check_gamma(family, gamma)?;
    let c_gamma = c_gamma_on(family, a, gamma, &default_sources(diffs.horizon, CONSTANT_GRID))?;
    let inv = a.frac_power(-gamma)?.into_matrix();
    let (mut rows_left, mut rows_right) = (Vec::new(), Vec::new());
    for (tau, t, d) in &diffs.rows {
        let rhs = 2.0 * c_gamma * tau;
        rows_left.push(row(*tau, *t, op_norm(&(&inv * d))?, rhs));
        rows_right.push(row(*tau, *t, op_norm(&(d * &inv))?, rhs));
    }
    let max_ratio = |rows: &[LemmaRow]| rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let (max_ratio_left, max_ratio_right) = (max_ratio(&rows_left), max_ratio(&rows_right));
    Ok(OneStepReport {
        gamma,
        c_gamma,
        max_ratio_left,
        max_ratio_right,
        order_slope: order_slope(&rows_left),
        holds: max_ratio_left.max(max_ratio_right) <= 1.0 + CONSTANT_SLACK,
        rows_left,
        rows_right,
    })
}

/// Result of the sandwiched bound `‖A^{-γ}(𝒯(τ) − 𝒰(τ))A^{-γ}‖ ≤ Z τ^{1+κ}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichReport {
    pub gamma: f64,
    pub beta: f64,
    pub kappa: f64,
    pub c_gamma: f64,
    pub holder_l: f64,
    pub z: f64,
    pub max_ratio: f64,
    pub order_slope: Option<f64>,
    pub holds: bool,
    pub rows: Vec<LemmaRow>,
}

pub fn check_sandwich_37(
    a: &SpectralOperator,
    family: &TimeDependentFamily,
    gamma: f64,
    beta: f64,
    tau_grid: &[f64],
    grid_n: usize,
    tol: f64,
) -> Result<SandwichReport> {
    let diffs = StepDifferences::compute(a, family, tau_grid, grid_n, tol)?;
    check_sandwich_37_on(a, family, gamma, beta, &diffs)
}

pub fn check_sandwich_37_on(
    a: &SpectralOperator,
    family: &TimeDependentFamily,
    gamma: f64,
    beta: f64,
    diffs: &StepDifferences,
) -> Result<SandwichReport> {
    check_dims(a, family)?;
    check_gamma(family, gamma)?;
    let horizon = diffs.horizon;
    let c_gamma = c_gamma_on(family, a, gamma, &default_sources(horizon, CONSTANT_GRID))?;
    let holder_l = holder_seminorm(family, a, gamma, beta, CONSTANT_GRID)?;
    let z = z_constant(gamma, beta, c_gamma, holder_l, horizon)?;
    let kappa = gamma.min(beta);
    let inv = a.frac_power(-gamma)?.into_matrix();
    let mut rows = Vec::new();
    for (tau, t, d) in &diffs.rows {
        rows.push(row(*tau, *t, op_norm(&(&inv * d * &inv))?, z * tau.powf(1.0 + kappa)));
    }
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(SandwichReport {
        gamma,
        beta,
        kappa,
        c_gamma,
        holder_l,
        z,
        max_ratio,
        order_slope: order_slope(&rows),
        holds: max_ratio <= 1.0 + CONSTANT_SLACK,
        rows,
    })
}

/// Smoothing of the evolution semigroup, `τ^γ ‖𝒜^γ 𝒰(τ)‖` and
/// `τ^γ ‖𝒰(τ) 𝒜^γ‖`, over `τ = k·T/coarse` for `k = 1..coarse`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmoothingReport {
    pub gamma: f64,
    pub coarse: usize,
    /// `(τ, left, right)` on `coarse` slots.
    pub rows: Vec<(f64, f64, f64)>,
    pub lambda_left: f64,
    pub lambda_right: f64,
    pub lambda_left_refined: f64,
    pub lambda_right_refined: f64,
    /// Both constants change by at most 10% when the slot count doubles.
    pub stable: bool,
}

fn smoothing_sup(
    a: &SpectralOperator,
    family: &TimeDependentFamily,
    gamma: f64,
    coarse: usize,
    refine: usize,
    tol: f64,
) -> Result<Vec<(f64, f64, f64)>> {
    let n_slots = coarse * refine;
    let power = a.frac_power(gamma)?.into_matrix();
    let mut cache = SlotPropagators::new(a, family, n_slots, tol);
    (1..coarse)
        .map(|k| {
            let u = cache.evolution(k * refine)?;
            let tau = tau_of(family, n_slots, k * refine);
            let scale = tau.powf(gamma);
            Ok((tau, scale * u.left_mul(&power).block_norm()?, scale * u.right_mul(&power).block_norm()?))
        })
        .collect()
}

/// Smoothing constants on `coarse` and `2·coarse` slots.
pub fn check_smoothing_33(
    a: &SpectralOperator,
    family: &TimeDependentFamily,
    gamma: f64,
    coarse: usize,
    tol: f64,
) -> Result<SmoothingReport> {
    check_dims(a, family)?;
    check_gamma(family, gamma)?;
    if coarse < 2 {
        return Err(Error::DegenerateGrid { grid_n: coarse, min: 2 });
    }
    let max_of = |rows: &[(f64, f64, f64)]| {
        rows.iter().fold((0.0_f64, 0.0_f64), |(l, r), row| (l.max(row.1), r.max(row.2)))
    };
    let rows = smoothing_sup(a, family, gamma, coarse, 1, tol)?;
    let refined = smoothing_sup(a, family, gamma, coarse, 2, tol)?;
    let (lambda_left, lambda_right) = max_of(&rows);
    let (lambda_left_refined, lambda_right_refined) = max_of(&refined);
    let close = |x: f64, y: f64| (x - y).abs() <= 0.1 * x.max(y) || x.max(y) == 0.0;
    Ok(SmoothingReport {
        gamma,
        coarse,
        rows,
        lambda_left,
        lambda_right,
        lambda_left_refined,
        lambda_right_refined,
        stable: close(lambda_left, lambda_left_refined) && close(lambda_right, lambda_right_refined),
    })
}

/// Stability of the powers `𝒯(τ)^m`, `τ = T/n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub gamma: f64,
    pub n: usize,
    pub n_slots: usize,
    /// `S(m) = (mτ)^γ ‖𝒜^γ 𝒯(τ)^m‖`, `m = 1..n`.
    pub s_values: Vec<f64>,
    pub m_gamma: f64,
    /// Same maximum on `2N` slots.
    pub m_gamma_refined: f64,
    pub stable: bool,
    pub sigma: f64,
    /// `max_m (mτ)^σ ‖𝒜^σ 𝒯(τ)^m‖ / M_γ^{σ/γ}`.
    pub interpolation_ratio: f64,
    pub interpolation_holds: bool,
    /// Threshold computed with the supplied `Λ_γ`.
    pub n0: Option<usize>,
    pub above_n0: bool,
}

fn stability_profile(
    a: &SpectralOperator,
    family: &TimeDependentFamily,
    exponents: &[f64],
    n: usize,
    n_slots: usize,
) -> Result<Vec<Vec<f64>>> {
    let t1 = build_t(a, family, n_slots, n_slots / n)?;
    let tau = family.horizon() / n as f64;
    let powers = exponents
        .iter()
        .map(|&g| Ok(a.frac_power(g)?.into_matrix()))
        .collect::<Result<Vec<_>>>()?;
    let mut out = vec![Vec::with_capacity(n); exponents.len()];
    let mut acc = t1.clone();
    for m in 1..=n {
        for ((g, p), values) in exponents.iter().zip(&powers).zip(out.iter_mut()) {
            values.push((m as f64 * tau).powf(*g) * acc.left_mul(p).block_norm()?);
        }
        acc = t1.compose(&acc)?;
    }
    Ok(out)
}

pub fn check_stability_53(
    a: &SpectralOperator,
    family: &TimeDependentFamily,
    gamma: f64,
    n: usize,
    n_slots: usize,
    lambda: f64,
) -> Result<StabilityReport> {
    check_dims(a, family)?;
    check_divisible(n_slots, n)?;
    if !(gamma > family.declared_alpha() && gamma < 1.0) {
        return Err(Error::DomainError(format!("gamma {gamma} outside ({}, 1)", family.declared_alpha())));
    }
    let sigma = gamma / 2.0;
    let coarse = stability_profile(a, family, &[gamma, sigma], n, n_slots)?;
    let refined = stability_profile(a, family, &[gamma], n, 2 * n_slots)?;
    let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    let m_gamma = max(&coarse[0]);
    let m_gamma_refined = max(&refined[0]);
    let bound = m_gamma.powf(sigma / gamma);
    let interpolation_ratio = if bound > 0.0 { max(&coarse[1]) / bound } else { 0.0 };
    let c_gamma = c_gamma_on(family, a, gamma, &default_sources(family.horizon(), CONSTANT_GRID))?;
    let n0 = n0_threshold(gamma, c_gamma, lambda, family.horizon()).ok();
    Ok(StabilityReport {
        gamma,
        n,
        n_slots,
        s_values: coarse[0].clone(),
        m_gamma,
        m_gamma_refined,
        stable: m_gamma.is_finite() && (m_gamma - m_gamma_refined).abs() <= 0.2 * m_gamma.max(m_gamma_refined),
        sigma,
        interpolation_ratio,
        interpolation_holds: interpolation_ratio <= 1.0 + CONSTANT_SLACK,
        above_n0: n0.is_some_and(|n0| n >= n0),
        n0,
    })
}
