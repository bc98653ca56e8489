//! Sup-norm error of the split-step products over the time simplex and
//! empirical convergence rates.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::family::TimeDependentFamily;
use crate::oracle::refine_to_tol;
use crate::spectral::{op_norm, SpectralOperator};
use crate::trotter::{trotter, Variant};

/// Errors at or below this level carry no rate information.
pub const ERROR_FLOOR: f64 = 1e-13;

/// Minimum number of usable points for [`rate_fit`].
pub const MIN_FIT_POINTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Ordinary least squares `y ≈ intercept + slope·x`.
pub fn least_squares(points: &[(f64, f64)]) -> LineFit {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let sse: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r2 = if syy > 0.0 { (1.0 - sse / syy).clamp(0.0, 1.0) } else { 1.0 };
    LineFit { slope, intercept, r2 }
}

/// Fitted decay `sup_error ≈ C·n^{-p}` for a sweep over `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub entries: Vec<(usize, f64)>,
    /// Positive decay rate `p`.
    pub fitted_slope: f64,
    /// `ln C`.
    pub fitted_log_constant: f64,
    pub r2: f64,
    pub predicted_beta: f64,
    /// `β > 2α − 1`.
    pub condition_ok: bool,
}

/// Log-log least squares over the entries whose error exceeds
/// [`ERROR_FLOOR`].
pub fn rate_fit(entries: &[(usize, f64)], predicted_beta: f64, alpha: f64) -> Result<ConvergenceReport> {
    if entries.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(Error::DomainError("entries must be sorted by strictly increasing n".into()));
    }
    if entries.iter().any(|e| e.0 == 0 || e.1.is_nan() || e.1 < 0.0) {
        return Err(Error::DomainError("entries need n >= 1 and non-negative errors".into()));
    }
    let points: Vec<(f64, f64)> = entries
        .iter()
        .filter(|e| e.1 > ERROR_FLOOR)
        .map(|&(n, e)| ((n as f64).ln(), e.ln()))
        .collect();
    if points.is_empty() && !entries.is_empty() {
        return Err(Error::AllBelowFloor);
    }
    if points.len() < MIN_FIT_POINTS {
        return Err(Error::TooFewPoints { need: MIN_FIT_POINTS, got: points.len() });
    }
    let fit = least_squares(&points);
    Ok(ConvergenceReport {
        entries: entries.to_vec(),
        fitted_slope: -fit.slope,
        fitted_log_constant: fit.intercept,
        r2: fit.r2,
        predicted_beta,
        condition_ok: predicted_beta > 2.0 * alpha - 1.0,
    })
}

/// Reference propagators for every pair `s = iT/g < t = jT/g` of a uniform
/// grid, computed once and reused across an `n` sweep.
#[derive(Debug, Clone)]
pub struct ReferenceTable {
    grid_n: usize,
    horizon: f64,
    /// `(i, j, U(t_j, t_i))`, sorted by `i` then `j`.
    pairs: Vec<(usize, usize, DMatrix<f64>)>,
}

impl ReferenceTable {
    pub fn build(a: &SpectralOperator, family: &TimeDependentFamily, grid_n: usize, tol: f64) -> Result<Self> {
        if grid_n < 2 {
            return Err(Error::DegenerateGrid { grid_n, min: 2 });
        }
        let horizon = family.horizon();
        let time = |i: usize| i as f64 * horizon / grid_n as f64;
        let mut pairs = Vec::with_capacity(grid_n * (grid_n + 1) / 2);
        for i in 0..grid_n {
            for j in (i + 1)..=grid_n {
                let u = refine_to_tol(a, family, time(i), time(j), tol)?;
                pairs.push((i, j, u.matrix));
            }
        }
        Ok(Self { grid_n, horizon, pairs })
    }

    pub fn grid_n(&self) -> usize {
        self.grid_n
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.horizon / self.grid_n as f64
    }

    pub fn pairs(&self) -> impl Iterator<Item = (f64, f64, &DMatrix<f64>)> {
        self.pairs.iter().map(|(i, j, u)| (self.time(*i), self.time(*j), u))
    }

    /// `max ‖V_n(t,s) − U(t,s)‖` over the table's pairs.
    pub fn sup_error(&self, a: &SpectralOperator, family: &TimeDependentFamily, n: usize, variant: Variant) -> Result<f64> {
        let mut worst = 0.0_f64;
        for (s, t, u) in self.pairs() {
            let v = trotter(variant, a, family, s, t, n)?;
            worst = worst.max(op_norm(&(&v.matrix - u))?);
        }
        Ok(worst)
    }
}

/// Grid maximum of `‖V_n(t,s) − U(t,s)‖` over `0 ≤ s < t ≤ T`.
pub fn sup_error(
    a: &SpectralOperator,
    family: &TimeDependentFamily,
    n: usize,
    grid_n: usize,
    tol: f64,
    variant: Variant,
) -> Result<f64> {
    ReferenceTable::build(a, family, grid_n, tol)?.sup_error(a, family, n, variant)
}

/// One row of a convergence sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub sup_error_left: f64,
    pub sup_error_right: f64,
}

/// Sup errors of both product variants for each `n`, reusing one table of
/// reference propagators.
pub fn convergence_sweep(
    a: &SpectralOperator,
    family: &TimeDependentFamily,
    n_list: &[usize],
    grid_n: usize,
    tol: f64,
) -> Result<Vec<SweepRow>> {
    let table = ReferenceTable::build(a, family, grid_n, tol)?;
    n_list
        .iter()
        .map(|&n| {
            Ok(SweepRow {
                n,
                sup_error_left: table.sup_error(a, family, n, Variant::Left)?,
                sup_error_right: table.sup_error(a, family, n, Variant::Right)?,
            })
        })
        .collect()
}
