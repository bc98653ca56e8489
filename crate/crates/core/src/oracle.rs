//! Reference propagators `U(t,s)`: a closed form for scalar (commuting)
//! families and a step-halving midpoint-exponential integrator for the rest.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::family::TimeDependentFamily;
use crate::spectral::{op_norm, SpectralOperator, SymMatrix};
use crate::trotter::{check_interval, Method, Propagator};

/// Default a posteriori tolerance of [`refine_to_tol`].
pub const DEFAULT_TOL: f64 = 1e-10;

/// First step count tried by [`refine_to_tol`].
pub const INITIAL_STEPS: usize = 16;

/// Hard cap on the step count of [`refine_to_tol`].
pub const MAX_STEPS: usize = 1 << 20;

const SIMPSON_MAX_DEPTH: u32 = 48;

fn check_dims(a: &SpectralOperator, family: &TimeDependentFamily) -> Result<()> {
    if a.dim() != family.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: family.dim() });
    }
    Ok(())
}

fn identity(dim: usize, s: f64, t: f64, method: Method) -> Propagator {
    Propagator { matrix: DMatrix::identity(dim, dim), t, s, method, steps: 0, error_estimate: Some(0.0) }
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance
/// `tol`, starting from `panels` equal panels.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, panels: usize) -> f64 {
    if b <= a {
        return 0.0;
    }
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let eps = tol / panels as f64;
    (0..panels)
        .map(|p| {
            let lo = a + p as f64 * width;
            let hi = if p + 1 == panels { b } else { a + (p + 1) as f64 * width };
            let (flo, fhi) = (f(lo), f(hi));
            let mid = 0.5 * (lo + hi);
            let fmid = f(mid);
            let whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
            simpson_step(f, lo, hi, flo, fmid, fhi, whole, eps, SIMPSON_MAX_DEPTH)
        })
        .sum()
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1)
}

/// `U(t,s) = e^{-(t−s)A} · e^{-∫_s^t b(r) dr}` for a family `B(t) = b(t)·I`.
pub fn analytic_commuting(a: &SpectralOperator, family: &TimeDependentFamily, s: f64, t: f64) -> Result<Propagator> {
    check_dims(a, family)?;
    if !family.is_scalar() {
        return Err(Error::NonCommutingFamily(family.label().to_string()));
    }
    check_interval(family, s, t, 1)?;
    if t == s {
        return Ok(identity(a.dim(), s, t, Method::Analytic));
    }
    let profile = family.profile().clone();
    let horizon = family.horizon();
    let b = |r: f64| profile.eval(r.clamp(0.0, horizon), horizon);
    let panels = profile.min_panels(t - s, horizon);
    let integral = adaptive_simpson(&b, s, t, 1e-12, panels);
    let ea = a.semigroup(t - s)?;
    Ok(Propagator {
        matrix: ea.into_matrix() * (-integral).exp(),
        t,
        s,
        method: Method::Analytic,
        steps: 0,
        error_estimate: None,
    })
}

/// `∏_{i=m−1..0} exp(−h·C(s + (i+½)h))`, `h = (t−s)/m`, `C(r) = A + B(r)`.
pub fn midpoint_exponential(
    a: &SpectralOperator,
    family: &TimeDependentFamily,
    s: f64,
    t: f64,
    steps: usize,
) -> Result<Propagator> {
    check_dims(a, family)?;
    check_interval(family, s, t, steps)?;
    if t == s {
        return Ok(identity(a.dim(), s, t, Method::Reference));
    }
    let h = (t - s) / steps as f64;
    let midpoint = |i: usize| s + (i as f64 + 0.5) * h;

    let matrix = if family.is_scalar() {
        // all factors commute: the product collapses to one exponential
        let mut sum = 0.0;
        for i in 0..steps {
            sum += family.scalar_value(midpoint(i))?.unwrap_or(0.0);
        }
        a.semigroup(t - s)?.into_matrix() * (-h * sum).exp()
    } else {
        let dim = a.dim();
        let a_mat = a.reconstruct().into_matrix();
        let mut c = DMatrix::<f64>::zeros(dim, dim);
        let mut acc = DMatrix::<f64>::identity(dim, dim);
        let mut tmp = DMatrix::<f64>::zeros(dim, dim);
        for i in 0..steps {
            family.sample_into(midpoint(i), &mut c)?;
            c += &a_mat;
            // acc ← Q e^{-hΛ} Qᵀ acc
            let eig = SymmetricEigen::new(c.clone());
            eig.eigenvectors.tr_mul_to(&acc, &mut tmp);
            for (r, mut row) in tmp.row_iter_mut().enumerate() {
                row *= (-h * eig.eigenvalues[r]).exp();
            }
            eig.eigenvectors.mul_to(&tmp, &mut acc);
        }
        acc
    };
    Ok(Propagator { matrix, t, s, method: Method::Reference, steps, error_estimate: None })
}

/// Doubles the midpoint step count from 16 until two successive products
/// differ by at most `tol` in operator norm; returns the finer one.
pub fn refine_to_tol(
    a: &SpectralOperator,
    family: &TimeDependentFamily,
    s: f64,
    t: f64,
    tol: f64,
) -> Result<Propagator> {
    if tol.is_nan() || tol < 1e-12 {
        return Err(Error::DomainError(format!("oracle tolerance {tol} below 1e-12")));
    }
    check_dims(a, family)?;
    check_interval(family, s, t, 1)?;
    if t == s {
        return Ok(identity(a.dim(), s, t, Method::Reference));
    }
    let mut steps = INITIAL_STEPS;
    let mut coarse = midpoint_exponential(a, family, s, t, steps)?;
    loop {
        if steps * 2 > MAX_STEPS {
            let last_increment = coarse.error_estimate.unwrap_or(f64::INFINITY);
            return Err(Error::CapExceeded { cap: MAX_STEPS, last_increment, tol });
        }
        steps *= 2;
        let mut fine = midpoint_exponential(a, family, s, t, steps)?;
        let increment = op_norm(&(&fine.matrix - &coarse.matrix))?;
        fine.error_estimate = Some(increment);
        if increment <= tol {
            return Ok(fine);
        }
        coarse = fine;
    }
}

/// `max_k (t_k − s)^γ ‖A^γ U(t_k, s)‖` over the given spans `t_k − s`,
/// using reference propagators at tolerance `tol`.
pub fn propagator_smoothing(
    a: &SpectralOperator,
    family: &TimeDependentFamily,
    gamma: f64,
    s: f64,
    spans: &[f64],
    tol: f64,
) -> Result<Vec<f64>> {
    let power: SymMatrix = a.frac_power(gamma)?;
    spans
        .iter()
        .map(|&span| {
            let u = refine_to_tol(a, family, s, s + span, tol)?;
            Ok(span.powf(gamma) * op_norm(&(power.as_matrix() * &u.matrix))?)
        })
        .collect()
}
