//! Explicit constants and combinatorial bounds used by the convergence
//! proof: the Beta-function sum bound, the one-step sandwich constant `Z`,
//! the stability threshold `n₀` and the fixed-point constant `M_γ`.

use serde::Serialize;
use statrs::function::beta::ln_beta;

use crate::error::{Error, Result};

/// Outcome of `Σ_{k=1}^{n-1} (n-k)^{-γ} k^{-α} ≤ B(1-α, 1-γ) n^{1-γ-α}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BetaSumCheck {
    pub n: usize,
    pub alpha: f64,
    pub gamma: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Euler Beta function through log-Gamma, exact when one argument is 1.
pub fn euler_beta(a: f64, b: f64) -> f64 {
    if a == 1.0 {
        1.0 / b
    } else if b == 1.0 {
        1.0 / a
    } else {
        ln_beta(a, b).exp()
    }
}

pub fn beta_sum_bound(n: usize, alpha: f64, gamma: f64) -> Result<BetaSumCheck> {
    if n < 2 {
        return Err(Error::DomainError(format!("beta sum needs n >= 2, got {n}")));
    }
    if !((0.0..1.0).contains(&alpha) && (0.0..1.0).contains(&gamma)) {
        return Err(Error::DomainError(format!("alpha {alpha}, gamma {gamma} must lie in [0, 1)")));
    }
    let lhs: f64 = (1..n).map(|k| ((n - k) as f64).powf(-gamma) * (k as f64).powf(-alpha)).sum();
    let rhs = euler_beta(1.0 - alpha, 1.0 - gamma) * (n as f64).powf(1.0 - gamma - alpha);
    Ok(BetaSumCheck { n, alpha, gamma, lhs, rhs, holds: lhs <= rhs * (1.0 + 1e-12) })
}

/// [`beta_sum_bound`] for every `n ∈ 2..=n_max` and every pair of `grid`
/// with `γ ≥ α`, ordered by `α`, then `γ`, then `n`.
///
/// Powers are tabulated once per exponent, so the scan costs one
/// multiply-add per summand.
pub fn beta_sum_scan(n_max: usize, grid: &[f64]) -> Result<Vec<BetaSumCheck>> {
    if n_max < 2 {
        return Err(Error::DomainError(format!("beta sum needs n >= 2, got {n_max}")));
    }
    if let Some(bad) = grid.iter().find(|g| !(0.0..1.0).contains(*g)) {
        return Err(Error::DomainError(format!("exponent {bad} outside [0, 1)")));
    }
    let table = |e: f64| -> Vec<f64> { (0..n_max).map(|k| if k == 0 { 0.0 } else { (k as f64).powf(-e) }).collect() };
    let mut out = Vec::new();
    for &alpha in grid {
        let pa = table(alpha);
        for &gamma in grid.iter().filter(|&&g| g >= alpha) {
            let pg = table(gamma);
            let beta = euler_beta(1.0 - alpha, 1.0 - gamma);
            for n in 2..=n_max {
                let lhs: f64 = (1..n).map(|k| pg[n - k] * pa[k]).sum();
                let rhs = beta * (n as f64).powf(1.0 - gamma - alpha);
                out.push(BetaSumCheck { n, alpha, gamma, lhs, rhs, holds: lhs <= rhs * (1.0 + 1e-12) });
            }
        }
    }
    Ok(out)
}

/// Constant `Z_{γ,β}` of the sandwiched one-step bound
/// `‖A^{-γ}(T(τ) − U(τ))A^{-γ}‖ ≤ Z τ^{1+min(γ,β)}`.
pub fn z_constant(gamma: f64, beta: f64, c_gamma: f64, holder_l: f64, horizon: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::DomainError(format!("z constant needs gamma in (0, 1), got {gamma}")));
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::DomainError(format!("z constant needs beta in (0, 1], got {beta}")));
    }
    if c_gamma < 0.0 || holder_l < 0.0 || horizon <= 0.0 {
        return Err(Error::DomainError("constants must be non-negative and T positive".into()));
    }
    let c = c_gamma;
    let cubic = 2.0 * c.powi(3) / ((2.0 - gamma) * (3.0 - gamma));
    let quad = 2.0 * c * c;
    let lin = 2.0 * c / ((1.0 + gamma) * gamma);
    let hold = holder_l / (1.0 + beta);
    let t = horizon;
    let z = if gamma <= beta {
        cubic * t.powf(2.0 - 2.0 * gamma) + quad * t.powf(1.0 - gamma) + lin + hold * t.powf(beta - gamma)
    } else {
        cubic * t.powf(2.0 - gamma - beta) + quad * t.powf(1.0 - beta) + lin * t.powf(gamma - beta) + hold
    };
    Ok(z)
}

/// `n₀ = ⌊(2(Λ/(1-γ) + 1) C)^{1/(1-γ)} T⌋ + 1`, with `Λ` clamped below by 1.
pub fn n0_threshold(gamma: f64, c_gamma: f64, lambda: f64, horizon: f64) -> Result<usize> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::DomainError(format!("n0 needs gamma in (0, 1), got {gamma}")));
    }
    let lambda = lambda.max(1.0);
    let base = 2.0 * (lambda / (1.0 - gamma) + 1.0) * c_gamma;
    let x = base.powf(1.0 / (1.0 - gamma)) * horizon;
    if !x.is_finite() || x >= usize::MAX as f64 {
        return Err(Error::DomainError(format!("n0 overflows ({x})")));
    }
    Ok(x.floor() as usize + 1)
}

/// Upper end of the bisection bracket for [`m_gamma_solve`].
pub const M_BRACKET_MAX: f64 = 1e8;

/// Smallest `M` in `[c0, 10⁸]` with `c0 + c1 M / n^{1-γ} + c2 M^{α/γ} ≤ M`,
/// located by bisection to relative accuracy `1e-8`.
pub fn m_gamma_solve(c0: f64, c1: f64, c2: f64, n: usize, gamma: f64, alpha: f64) -> Result<f64> {
    if c0 < 0.0 || c1 < 0.0 || c2 < 0.0 {
        return Err(Error::DomainError("coefficients must be non-negative".into()));
    }
    if !(gamma > 0.0 && gamma < 1.0) || !(0.0..=gamma).contains(&alpha) {
        return Err(Error::DomainError(format!("need 0 <= alpha <= gamma < 1, got {alpha}, {gamma}")));
    }
    let threshold = c1.powf(1.0 / (1.0 - gamma));
    if (n as f64) <= threshold {
        return Err(Error::FeasibilityViolated { n, threshold });
    }
    let damping = c1 / (n as f64).powf(1.0 - gamma);
    let p = alpha / gamma;
    let residual = |m: f64| c0 + damping * m + c2 * m.powf(p) - m;

    let (mut lo, mut hi) = (c0, M_BRACKET_MAX);
    if residual(lo) <= 0.0 {
        return Ok(lo);
    }
    if residual(hi) > 0.0 {
        return Err(Error::Infeasible { lo, hi });
    }
    while hi - lo > 1e-8 * hi {
        let mid = 0.5 * (lo + hi);
        if residual(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Residual `c0 + c1 M / n^{1-γ} + c2 M^{α/γ} − M` of the fixed-point condition.
pub fn m_gamma_residual(m: f64, c0: f64, c1: f64, c2: f64, n: usize, gamma: f64, alpha: f64) -> f64 {
    c0 + c1 * m / (n as f64).powf(1.0 - gamma) + c2 * m.powf(alpha / gamma) - m
}

/// Coefficients `(c0, c1, c2)` of the fixed-point condition for `M_γ`.
pub fn m_gamma_coefficients(lambda: f64, c_gamma: f64, gamma: f64, alpha: f64, horizon: f64) -> (f64, f64, f64) {
    let lambda = lambda.max(1.0);
    let c0 = 5.0 * lambda;
    let c1 = 2.0 * (lambda / (1.0 - gamma) + 1.0) * c_gamma * horizon.powf(1.0 - gamma);
    let c2 = 4.0 * lambda * c_gamma * euler_beta(1.0 - alpha, 1.0 - gamma) * horizon.powf(1.0 - alpha);
    (c0, c1, c2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn beta_sum_small_cases() {
        let r = beta_sum_bound(2, 0.0, 0.0).unwrap();
        assert_eq!(r.lhs, 1.0);
        assert!((r.rhs - 2.0).abs() < 1e-12);
        assert!(r.holds);

        let r = beta_sum_bound(2, 0.5, 0.5).unwrap();
        assert_eq!(r.lhs, 1.0);
        assert!((r.rhs - PI).abs() < 1e-12);
        assert!(r.holds);
    }

    #[test]
    fn beta_sum_against_direct_evaluation() {
        let r = beta_sum_bound(10, 0.3, 0.4).unwrap();
        let mut lhs = 0.0;
        for k in 1..10 {
            lhs += 1.0 / ((10 - k) as f64).powf(0.4) / (k as f64).powf(0.3);
        }
        assert!((r.lhs - lhs).abs() < 1e-13);
        // B(0.7, 0.6) = Γ(0.7)Γ(0.6)/Γ(1.3)
        let b = 1.298_055_332_647_557_7 * 1.489_192_248_812_817 / 0.897_470_696_306_277_2;
        assert!((r.rhs - b * 10f64.powf(0.3)).abs() < 1e-10);
        assert!(r.holds);
    }

    #[test]
    fn scan_matches_direct_evaluation() {
        let grid = [0.0, 0.3, 0.6];
        let scan = beta_sum_scan(40, &grid).unwrap();
        assert_eq!(scan.len(), 6 * 39);
        for row in scan.iter().step_by(7) {
            let direct = beta_sum_bound(row.n, row.alpha, row.gamma).unwrap();
            assert!((row.lhs - direct.lhs).abs() <= 1e-12 * direct.lhs);
            assert_eq!(row.rhs, direct.rhs);
        }
    }

    #[test]
    fn z_constant_examples() {
        assert_eq!(z_constant(0.5, 0.5, 0.0, 0.0, 1.0).unwrap(), 0.0);
        let z = z_constant(0.5, 0.5, 1.0, 0.0, 1.0).unwrap();
        assert!((z - 5.2).abs() < 1e-12);
        assert!(z_constant(0.0, 0.5, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn z_constant_is_monotone() {
        for (g, b) in [(0.3, 0.6), (0.7, 0.4)] {
            let base = z_constant(g, b, 1.0, 1.0, 1.0).unwrap();
            assert!(z_constant(g, b, 1.5, 1.0, 1.0).unwrap() >= base);
            assert!(z_constant(g, b, 1.0, 2.0, 1.0).unwrap() >= base);
            assert!(z_constant(g, b, 1.0, 1.0, 2.0).unwrap() >= base);
        }
    }

    #[test]
    fn n0_examples() {
        assert_eq!(n0_threshold(0.5, 0.0, 1.0, 1.0).unwrap(), 1);
        assert_eq!(n0_threshold(0.5, 0.5, 1.0, 1.0).unwrap(), 10);
        assert!(n0_threshold(0.5, 0.6, 1.0, 1.0).unwrap() >= 10);
        assert!(n0_threshold(0.5, 0.5, 1.0, 2.0).unwrap() >= 10);
    }

    #[test]
    fn m_gamma_examples() {
        assert_eq!(m_gamma_solve(3.0, 0.0, 0.0, 10, 0.5, 0.25).unwrap(), 3.0);
        // 5 + √M/2 = M is a quadratic in √M: √M = (1/2 + √(1/4 + 20))/2
        let root = (0.5 + (0.25_f64 + 20.0).sqrt()) / 2.0;
        let m = m_gamma_solve(5.0, 0.0, 0.5, 10, 0.5, 0.25).unwrap();
        assert!((m - root * root).abs() < 1e-7 * m, "{m}");
        assert!((m - 6.25).abs() < 1e-6);
    }

    #[test]
    fn m_gamma_feasibility() {
        let err = m_gamma_solve(1.0, 4.0, 0.0, 16, 0.5, 0.25).unwrap_err();
        assert!(matches!(err, Error::FeasibilityViolated { .. }));
        // α = γ makes the condition linear; c2 ≥ 1 has no solution
        let err = m_gamma_solve(1.0, 0.0, 1.5, 16, 0.5, 0.5).unwrap_err();
        assert!(matches!(err, Error::Infeasible { .. }));
    }
}
