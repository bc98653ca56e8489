//! Time-dependent perturbation families `t ↦ B(t)` on `[0, T]` and the
//! estimators for their assumption constants.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{op_norm, sym_norm, Role, SpectralOperator, SymMatrix};

/// Eigenvalues of a sample may dip this far below zero before a family is
/// rejected as not positive semidefinite.
pub const PSD_TOL: f64 = 1e-10;

/// Differences at or below this level are treated as zero by the Hölder fit.
pub const HOLDER_FLOOR: f64 = 1e-14;

/// Nodes of the composite Simpson rule used to assemble the heat example.
pub const QUADRATURE_NODES: usize = 4097;

/// Non-negative scalar profile `w(t)` on `[0, T]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScalarProfile {
    /// `w(t) = c`.
    Constant { c: f64 },
    /// `w(t) = c·t^β`.
    Power { c: f64, beta: f64 },
    /// `w(t) = c·t`.
    Linear { c: f64 },
    /// `w(t) = c·Σ_{k=0}^{K} 2^{-βk}(1 + cos(2^k π t / T))`.
    Weierstrass { c: f64, beta: f64, terms: u32 },
}

impl ScalarProfile {
    pub fn zero() -> Self {
        ScalarProfile::Constant { c: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let (c, beta) = match *self {
            ScalarProfile::Constant { c } | ScalarProfile::Linear { c } => (c, 1.0),
            ScalarProfile::Power { c, beta } => (c, beta),
            ScalarProfile::Weierstrass { c, beta, terms } => {
                if terms > 52 {
                    return Err(Error::DomainError(format!("weierstrass terms {terms} > 52")));
                }
                (c, beta)
            }
        };
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::NegativeCoefficient(c));
        }
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::DomainError(format!("profile exponent {beta} outside (0, 1]")));
        }
        Ok(())
    }

    pub fn eval(&self, t: f64, horizon: f64) -> f64 {
        match *self {
            ScalarProfile::Constant { c } => c,
            ScalarProfile::Linear { c } => c * t,
            ScalarProfile::Power { c, beta } => c * t.max(0.0).powf(beta),
            ScalarProfile::Weierstrass { c, beta, terms } => {
                let mut sum = 0.0;
                for k in 0..=terms {
                    let freq = (1u64 << k) as f64;
                    sum += (-beta * k as f64).exp2() * (1.0 + (freq * PI * t / horizon).cos());
                }
                c * sum
            }
        }
    }

    /// Hölder exponent the profile is built with (1 for smooth profiles).
    pub fn beta(&self) -> f64 {
        match *self {
            ScalarProfile::Constant { .. } | ScalarProfile::Linear { .. } => 1.0,
            ScalarProfile::Power { beta, .. } | ScalarProfile::Weierstrass { beta, .. } => beta,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(*self,
            ScalarProfile::Constant { c }
            | ScalarProfile::Linear { c }
            | ScalarProfile::Power { c, .. }
            | ScalarProfile::Weierstrass { c, .. } if c == 0.0)
    }

    /// Number of quadrature panels needed to resolve the profile over an
    /// interval of length `span`.
    pub fn min_panels(&self, span: f64, horizon: f64) -> usize {
        match *self {
            ScalarProfile::Weierstrass { terms, .. } => {
                let per_horizon = (1u64 << (terms + 3).min(60)) as f64;
                ((span / horizon) * per_horizon).ceil().max(1.0) as usize
            }
            _ => 1,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            ScalarProfile::Constant { c } => format!("constant(c={c})"),
            ScalarProfile::Linear { c } => format!("linear(c={c})"),
            ScalarProfile::Power { c, beta } => format!("power(c={c},beta={beta})"),
            ScalarProfile::Weierstrass { c, beta, terms } => {
                format!("weierstrass(c={c},beta={beta},K={terms})")
            }
        }
    }
}

/// Non-negative potential `v(x)` on `[0, π]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Potential {
    Constant { value: f64 },
    /// `amplitude · sin(x)^power`.
    SinPower { amplitude: f64, power: u32 },
    /// `amplitude · exp(-((x - center)/width)²)`.
    Bump { amplitude: f64, center: f64, width: f64 },
}

impl Potential {
    pub fn sin_squared() -> Self {
        Potential::SinPower { amplitude: 1.0, power: 2 }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Potential::Constant { value } => value,
            Potential::SinPower { amplitude, power } => amplitude * x.sin().powi(power as i32),
            Potential::Bump { amplitude, center, width } => {
                let z = (x - center) / width;
                amplitude * (-z * z).exp()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    /// `B(t) = w(t)·I`; commutes with every generator.
    Scalar { profile: ScalarProfile },
    /// `B(t) = base + w(t)·direction`.
    Modulated {
        base: SymMatrix,
        direction: SymMatrix,
        /// Present when `base = 0`, so `e^{-τB(t)}` needs no fresh eigensolve.
        direction_eig: Option<SpectralOperator>,
        profile: ScalarProfile,
    },
}

/// Deterministic family of symmetric positive semidefinite matrices on `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeDependentFamily {
    horizon: f64,
    dim: usize,
    kind: Kind,
    declared_alpha: f64,
    declared_beta: f64,
    label: String,
}

fn check_horizon(horizon: f64) -> Result<()> {
    if horizon.is_finite() && horizon > 0.0 {
        Ok(())
    } else {
        Err(Error::DomainError(format!("horizon must be positive, got {horizon}")))
    }
}

fn check_psd(m: &SymMatrix) -> Result<()> {
    let min_eigenvalue = m.min_eigenvalue();
    if min_eigenvalue < -PSD_TOL {
        return Err(Error::NotPsd { min_eigenvalue });
    }
    Ok(())
}

/// Scalar family `b(t)` acting on a one-dimensional space.
pub fn make_scalar_family(profile: ScalarProfile, horizon: f64) -> Result<TimeDependentFamily> {
    scalar_family_with_dim(profile, horizon, 1)
}

/// Scalar family acting as `b(t)·I` on a `dim`-dimensional space.
pub fn scalar_family_with_dim(profile: ScalarProfile, horizon: f64, dim: usize) -> Result<TimeDependentFamily> {
    profile.validate()?;
    check_horizon(horizon)?;
    if dim == 0 {
        return Err(Error::DomainError("dimension must be positive".into()));
    }
    Ok(TimeDependentFamily {
        horizon,
        dim,
        declared_alpha: 0.0,
        declared_beta: profile.beta(),
        label: format!("scalar:{}", profile.label()),
        kind: Kind::Scalar { profile },
    })
}

/// `B(t) = B0 + w(t)·B1` with both matrices positive semidefinite.
pub fn make_synthetic_matrix_family(
    base: SymMatrix,
    direction: SymMatrix,
    profile: ScalarProfile,
    horizon: f64,
) -> Result<TimeDependentFamily> {
    profile.validate()?;
    check_horizon(horizon)?;
    if base.dim() != direction.dim() {
        return Err(Error::DimensionMismatch { expected: base.dim(), found: direction.dim() });
    }
    check_psd(&base)?;
    check_psd(&direction)?;
    let label = format!("synthetic:{}", profile.label());
    Ok(modulated(base, direction, profile, horizon, label))
}

fn modulated(
    base: SymMatrix,
    direction: SymMatrix,
    profile: ScalarProfile,
    horizon: f64,
    label: String,
) -> TimeDependentFamily {
    let direction_eig = if base.is_zero() {
        SpectralOperator::diagonalize(&direction, Role::Generic).ok()
    } else {
        None
    };
    TimeDependentFamily {
        horizon,
        dim: base.dim(),
        declared_alpha: 0.0,
        declared_beta: profile.beta(),
        label,
        kind: Kind::Modulated { base, direction, direction_eig, profile },
    }
}

/// Galerkin truncation of `-Δ + w(t)v(x)` on `[0, π]` with Dirichlet
/// conditions in the basis `φ_k(x) = √(2/π) sin(kx)`, `k = 1..=modes`.
///
/// The Laplacian is exactly `diag(1², …, d²)`; the potential matrix is
/// assembled once by composite Simpson quadrature.
pub fn make_heat1d_family(
    modes: usize,
    potential: &Potential,
    profile: ScalarProfile,
    horizon: f64,
) -> Result<(SpectralOperator, TimeDependentFamily)> {
    if modes == 0 {
        return Err(Error::DomainError("heat example needs at least one mode".into()));
    }
    profile.validate()?;
    check_horizon(horizon)?;

    let diag: Vec<f64> = (1..=modes).map(|k| (k * k) as f64).collect();
    let laplacian = SpectralOperator::from_diagonal(&diag, Role::Generator)?;

    let coupling = potential_matrix(modes, potential)?;
    let label = format!("heat1d:d={modes}:{}", profile.label());
    let family = modulated(SymMatrix::zeros(modes), coupling, profile, horizon, label);
    Ok((laplacian, family))
}

/// `∫₀^π v φ_k φ_l dx` by composite Simpson on [`QUADRATURE_NODES`] nodes,
/// symmetrized and clipped to be positive semidefinite.
pub fn potential_matrix(modes: usize, potential: &Potential) -> Result<SymMatrix> {
    let panels = QUADRATURE_NODES - 1;
    let h = PI / panels as f64;
    let norm = (2.0 / PI).sqrt();

    let mut weighted = Vec::with_capacity(QUADRATURE_NODES);
    for q in 0..QUADRATURE_NODES {
        let x = q as f64 * h;
        let v = potential.eval(x);
        if !v.is_finite() {
            return Err(Error::NonFinite);
        }
        if v < -1e-12 {
            return Err(Error::NegativePotential { x, value: v });
        }
        let w = if q == 0 || q == panels {
            1.0
        } else if q % 2 == 1 {
            4.0
        } else {
            2.0
        };
        weighted.push((x, w * h / 3.0 * v));
    }

    let mut m = nalgebra::DMatrix::zeros(modes, modes);
    let mut basis = vec![0.0; modes];
    for &(x, wv) in &weighted {
        if wv == 0.0 {
            continue;
        }
        for (k, b) in basis.iter_mut().enumerate() {
            *b = norm * ((k + 1) as f64 * x).sin();
        }
        for k in 0..modes {
            let bk = wv * basis[k];
            for l in k..modes {
                m[(k, l)] += bk * basis[l];
            }
        }
    }
    for k in 0..modes {
        for l in 0..k {
            m[(k, l)] = m[(l, k)];
        }
    }
    let sym = SymMatrix::symmetrized(m)?;
    clip_psd(sym)
}

fn clip_psd(m: SymMatrix) -> Result<SymMatrix> {
    let min = m.min_eigenvalue();
    if min >= 0.0 {
        return Ok(m);
    }
    if min < -PSD_TOL {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    let op = SpectralOperator::diagonalize(&m, Role::Generic)?;
    Ok(op.map_spectrum(|l| l.max(0.0)))
}

impl TimeDependentFamily {
    /// The zero family on a `dim`-dimensional space.
    pub fn zero(dim: usize, horizon: f64) -> Result<Self> {
        let mut f = scalar_family_with_dim(ScalarProfile::zero(), horizon, dim)?;
        f.label = "zero".into();
        Ok(f)
    }

    /// Constant family `B(t) ≡ b`.
    pub fn constant(b: SymMatrix, horizon: f64) -> Result<Self> {
        let dim = b.dim();
        let mut f = make_synthetic_matrix_family(b, SymMatrix::zeros(dim), ScalarProfile::zero(), horizon)?;
        f.label = "constant".into();
        Ok(f)
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::DomainError(format!("alpha {alpha} outside [0, 1)")));
        }
        self.declared_alpha = alpha;
        Ok(self)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn declared_alpha(&self) -> f64 {
        self.declared_alpha
    }

    pub fn declared_beta(&self) -> f64 {
        self.declared_beta
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// True when every sample is a multiple of the identity.
    pub fn is_scalar(&self) -> bool {
        matches!(self.kind, Kind::Scalar { .. })
    }

    pub fn profile(&self) -> &ScalarProfile {
        match &self.kind {
            Kind::Scalar { profile } | Kind::Modulated { profile, .. } => profile,
        }
    }

    /// True when `B(t) = 0` for every `t`.
    pub fn is_zero(&self) -> bool {
        match &self.kind {
            Kind::Scalar { profile } => profile.is_zero(),
            Kind::Modulated { base, direction, profile, .. } => {
                base.is_zero() && (direction.is_zero() || profile.is_zero())
            }
        }
    }

    fn clamp_time(&self, t: f64) -> Result<f64> {
        let slack = 1e-12 * self.horizon.max(1.0);
        if !t.is_finite() || t < -slack || t > self.horizon + slack {
            return Err(Error::TimeOutOfRange { t, horizon: self.horizon });
        }
        Ok(t.clamp(0.0, self.horizon))
    }

    /// Scalar coefficient `b(t)` of a scalar family, `None` otherwise.
    pub fn scalar_value(&self, t: f64) -> Result<Option<f64>> {
        let t = self.clamp_time(t)?;
        Ok(match &self.kind {
            Kind::Scalar { profile } => Some(profile.eval(t, self.horizon)),
            Kind::Modulated { .. } => None,
        })
    }

    pub fn sample(&self, t: f64) -> Result<SymMatrix> {
        let t = self.clamp_time(t)?;
        Ok(match &self.kind {
            Kind::Scalar { profile } => {
                SymMatrix::identity(self.dim).scaled(profile.eval(t, self.horizon))
            }
            Kind::Modulated { base, direction, profile, .. } => {
                let w = profile.eval(t, self.horizon);
                base.add_scaled(direction, w)?
            }
        })
    }

    /// Writes `B(t)` into `out` without allocating.
    pub(crate) fn sample_into(&self, t: f64, out: &mut DMatrix<f64>) -> Result<()> {
        let t = self.clamp_time(t)?;
        match &self.kind {
            Kind::Scalar { profile } => {
                out.fill(0.0);
                out.fill_diagonal(profile.eval(t, self.horizon));
            }
            Kind::Modulated { base, direction, profile, .. } => {
                let w = profile.eval(t, self.horizon);
                out.copy_from(base.as_matrix());
                out.zip_apply(direction.as_matrix(), |o, d| *o += w * d);
            }
        }
        Ok(())
    }

    /// `e^{-τB(t)}`.
    pub fn exp_neg(&self, tau: f64, t: f64) -> Result<SymMatrix> {
        if tau < 0.0 {
            return Err(Error::NegativeTime(tau));
        }
        let t = self.clamp_time(t)?;
        if tau == 0.0 {
            return Ok(SymMatrix::identity(self.dim));
        }
        match &self.kind {
            Kind::Scalar { profile } => {
                Ok(SymMatrix::identity(self.dim).scaled((-tau * profile.eval(t, self.horizon)).exp()))
            }
            Kind::Modulated { direction_eig: Some(eig), profile, .. } => {
                let w = profile.eval(t, self.horizon);
                Ok(eig.map_spectrum(|mu| (-tau * w * mu).exp()))
            }
            Kind::Modulated { .. } => {
                let op = SpectralOperator::diagonalize(&self.sample(t)?, Role::Generic)?;
                op.semigroup(tau)
            }
        }
    }
}

/// Regularity constants estimated on a uniform time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub c_alpha_hat: f64,
    pub holder_l_hat: f64,
    pub holder_beta_hat: f64,
    pub fit_r2: f64,
    pub grid_size: usize,
    pub alpha_used: f64,
    /// Raw slope was at or above one; `holder_beta_hat` is clipped to 1.
    pub slope_clipped: bool,
    /// False when the raw slope was not positive.
    pub holder_defined: bool,
}

fn uniform_grid(horizon: f64, grid_n: usize) -> Vec<f64> {
    (0..=grid_n).map(|i| i as f64 * horizon / grid_n as f64).collect()
}

fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::DomainError(format!("alpha {alpha} outside [0, 1)")))
    }
}

/// Grid maximum of `‖B(tᵢ) A^{-α}‖` over `tᵢ = iT/grid_n`, `i = 0..=grid_n`.
pub fn estimate_c_alpha(
    family: &TimeDependentFamily,
    a: &SpectralOperator,
    alpha: f64,
    grid_n: usize,
) -> Result<f64> {
    if grid_n < 2 {
        return Err(Error::DegenerateGrid { grid_n, min: 2 });
    }
    c_gamma_on(family, a, alpha, &uniform_grid(family.horizon(), grid_n))
}

/// Maximum of `‖B(t) A^{-γ}‖` over the given times.
pub fn c_gamma_on(family: &TimeDependentFamily, a: &SpectralOperator, gamma: f64, times: &[f64]) -> Result<f64> {
    check_alpha(gamma)?;
    let inv = a.frac_power(-gamma)?;
    let mut best = 0.0_f64;
    for &t in times {
        let b = family.sample(t)?;
        if b.is_zero() {
            continue;
        }
        best = best.max(op_norm(&(b.as_matrix() * inv.as_matrix()))?);
    }
    Ok(best)
}

/// Modulus of continuity of `t ↦ A^{-α}B(t)A^{-α}` on the grid: entry `g-1`
/// is the largest difference norm over pairs `g` grid steps apart.
pub fn sandwiched_modulus(
    family: &TimeDependentFamily,
    a: &SpectralOperator,
    alpha: f64,
    grid_n: usize,
) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    let inv = a.frac_power(-alpha)?;
    let grid = uniform_grid(family.horizon(), grid_n);
    let samples = grid
        .iter()
        .map(|&t| {
            let b = family.sample(t)?;
            Ok(inv.as_matrix() * b.as_matrix() * inv.as_matrix())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut modulus = vec![0.0_f64; grid_n];
    for i in 0..=grid_n {
        for j in (i + 1)..=grid_n {
            let diff = SymMatrix::symmetrized(&samples[j] - &samples[i])?;
            let d = sym_norm(&diff);
            let g = j - i;
            modulus[g - 1] = modulus[g - 1].max(d);
        }
    }
    Ok(modulus)
}

/// Smallest `L` with `‖A^{-α}(B(t)-B(s))A^{-α}‖ ≤ L|t-s|^β` over grid pairs.
pub fn holder_seminorm(
    family: &TimeDependentFamily,
    a: &SpectralOperator,
    alpha: f64,
    beta: f64,
    grid_n: usize,
) -> Result<f64> {
    if grid_n < 2 {
        return Err(Error::DegenerateGrid { grid_n, min: 2 });
    }
    let h = family.horizon() / grid_n as f64;
    let modulus = sandwiched_modulus(family, a, alpha, grid_n)?;
    Ok(modulus
        .iter()
        .enumerate()
        .map(|(g, &d)| d / ((g + 1) as f64 * h).powf(beta))
        .fold(0.0, f64::max))
}

/// Fits `log ω(δ) ≈ log L + β log δ` to the grid modulus of continuity of
/// the sandwiched family, and records `C_α` alongside.
pub fn estimate_holder(
    family: &TimeDependentFamily,
    a: &SpectralOperator,
    alpha: f64,
    grid_n: usize,
) -> Result<AssumptionReport> {
    if grid_n < 8 {
        return Err(Error::DegenerateGrid { grid_n, min: 8 });
    }
    let c_alpha_hat = estimate_c_alpha(family, a, alpha, grid_n)?;
    let h = family.horizon() / grid_n as f64;
    let modulus = sandwiched_modulus(family, a, alpha, grid_n)?;

    let points: Vec<(f64, f64)> = modulus
        .iter()
        .enumerate()
        .filter(|(_, &d)| d > HOLDER_FLOOR)
        .map(|(g, &d)| (((g + 1) as f64 * h).ln(), d.ln()))
        .collect();

    let mut report = AssumptionReport {
        c_alpha_hat,
        holder_l_hat: 0.0,
        holder_beta_hat: 1.0,
        fit_r2: 1.0,
        grid_size: grid_n,
        alpha_used: alpha,
        slope_clipped: false,
        holder_defined: true,
    };
    match points.len() {
        0 => return Ok(report),
        1 => {
            // one usable gap: no slope information, treat as Lipschitz
            report.holder_l_hat = points[0].1.exp() / points[0].0.exp();
            report.slope_clipped = true;
            return Ok(report);
        }
        _ => {}
    }
    let fit = crate::rates::least_squares(&points);
    report.fit_r2 = fit.r2;
    report.holder_l_hat = fit.intercept.exp();
    if fit.slope >= 1.0 - 1e-9 {
        report.holder_beta_hat = 1.0;
        report.slope_clipped = true;
    } else if fit.slope > 0.0 {
        report.holder_beta_hat = fit.slope;
    } else {
        report.holder_beta_hat = 0.0;
        report.holder_defined = false;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_generator() -> SpectralOperator {
        SpectralOperator::from_diagonal(&[1.0], Role::Generator).unwrap()
    }

    #[test]
    fn scalar_sampling() {
        let f = make_scalar_family(ScalarProfile::Linear { c: 1.0 }, 1.0).unwrap();
        assert_eq!(f.sample(0.5).unwrap(), SymMatrix::from_diagonal(&[0.5]));
        assert!(matches!(f.sample(1.5), Err(Error::TimeOutOfRange { .. })));
        assert!(matches!(f.sample(-0.1), Err(Error::TimeOutOfRange { .. })));
        let z = TimeDependentFamily::zero(3, 2.0).unwrap();
        assert!(z.sample(1.3).unwrap().is_zero());
    }

    #[test]
    fn profile_values() {
        let p = ScalarProfile::Power { c: 1.0, beta: 0.5 };
        assert_eq!(p.eval(0.25, 1.0), 0.5);
        let w0 = ScalarProfile::Weierstrass { c: 1.0, beta: 0.3, terms: 0 };
        for t in [0.0, 0.3, 0.5, 1.0] {
            assert!((w0.eval(t, 1.0) - (1.0 + (PI * t).cos())).abs() < 1e-15);
        }
        // 2·Σ_{k=0}^{12} 2^{-k/2}, a finite geometric sum
        let w = ScalarProfile::Weierstrass { c: 1.0, beta: 0.5, terms: 12 };
        let expected = 2.0 * (1.0 - 2f64.powf(-6.5)) / (1.0 - 2f64.powf(-0.5));
        assert!((w.eval(0.0, 1.0) - expected).abs() < 1e-12);
        assert!((w.eval(0.0, 1.0) - 6.752_982_950_922_031).abs() < 1e-12);
    }

    #[test]
    fn negative_coefficient_rejected() {
        let err = make_scalar_family(ScalarProfile::Linear { c: -1.0 }, 1.0).unwrap_err();
        assert_eq!(err, Error::NegativeCoefficient(-1.0));
    }

    #[test]
    fn synthetic_family_basics() {
        let b0 = SymMatrix::from_diagonal(&[1.0, 2.0]);
        let b1 = SymMatrix::identity(2);
        let f = make_synthetic_matrix_family(b0.clone(), b1.clone(), ScalarProfile::zero(), 1.0).unwrap();
        assert_eq!(f.sample(0.7).unwrap(), b0);

        let f = make_synthetic_matrix_family(SymMatrix::zeros(2), b1, ScalarProfile::Linear { c: 1.0 }, 1.0).unwrap();
        assert_eq!(f.sample(0.25).unwrap(), SymMatrix::identity(2).scaled(0.25));

        let p = ScalarProfile::Power { c: 1.0, beta: 0.5 };
        let f = make_synthetic_matrix_family(b0.clone(), SymMatrix::identity(2), p, 1.0).unwrap();
        assert_eq!(f.sample(0.0).unwrap(), b0);
        assert_eq!(f.declared_beta(), 0.5);

        let neg = SymMatrix::from_diagonal(&[1.0, -0.5]);
        let err = make_synthetic_matrix_family(neg, SymMatrix::zeros(2), ScalarProfile::zero(), 1.0).unwrap_err();
        assert!(matches!(err, Error::NotPsd { .. }));
    }

    #[test]
    fn heat_example_matrices() {
        let (a, f) = make_heat1d_family(4, &Potential::Constant { value: 0.0 }, ScalarProfile::Linear { c: 1.0 }, 1.0)
            .unwrap();
        assert_eq!(a.eigenvalues(), &[1.0, 4.0, 9.0, 16.0]);
        assert!(f.sample(0.5).unwrap().is_zero());

        let (_, f) = make_heat1d_family(5, &Potential::Constant { value: 1.0 }, ScalarProfile::Linear { c: 2.0 }, 1.0)
            .unwrap();
        let b = f.sample(0.5).unwrap();
        let expected = nalgebra::DMatrix::<f64>::identity(5, 5);
        assert!((b.as_matrix() - expected).amax() < 1e-12);

        // (2/π)∫ sin⁴ = 3/4
        let (_, f) =
            make_heat1d_family(2, &Potential::sin_squared(), ScalarProfile::Constant { c: 1.0 }, 1.0).unwrap();
        let b = f.sample(0.0).unwrap();
        assert!((b.as_matrix()[(0, 0)] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn negative_potential_rejected() {
        let err = make_heat1d_family(3, &Potential::Constant { value: -0.1 }, ScalarProfile::zero(), 1.0).unwrap_err();
        assert!(matches!(err, Error::NegativePotential { .. }));
    }

    #[test]
    fn c_alpha_examples() {
        let a = unit_generator();
        let z = TimeDependentFamily::zero(1, 1.0).unwrap();
        assert_eq!(estimate_c_alpha(&z, &a, 0.3, 16).unwrap(), 0.0);

        let f = make_scalar_family(ScalarProfile::Linear { c: 1.0 }, 1.0).unwrap();
        for alpha in [0.0, 0.5, 0.9] {
            assert!((estimate_c_alpha(&f, &a, alpha, 16).unwrap() - 1.0).abs() < 1e-14);
        }

        let a2 = SpectralOperator::from_diagonal(&[1.0, 4.0], Role::Generator).unwrap();
        let c = TimeDependentFamily::constant(SymMatrix::identity(2), 1.0).unwrap();
        assert!((estimate_c_alpha(&c, &a2, 0.5, 8).unwrap() - 1.0).abs() < 1e-14);
        assert!(matches!(estimate_c_alpha(&c, &a2, 0.5, 1), Err(Error::DegenerateGrid { .. })));
    }

    #[test]
    fn holder_of_constant_family() {
        let a = unit_generator();
        let c = TimeDependentFamily::constant(SymMatrix::from_diagonal(&[0.4]), 1.0).unwrap();
        let r = estimate_holder(&c, &a, 0.0, 16).unwrap();
        assert_eq!((r.holder_l_hat, r.holder_beta_hat, r.fit_r2), (0.0, 1.0, 1.0));
        assert!(matches!(estimate_holder(&c, &a, 0.0, 7), Err(Error::DegenerateGrid { .. })));
    }

    #[test]
    fn holder_of_square_root() {
        let a = unit_generator();
        let f = make_scalar_family(ScalarProfile::Power { c: 1.0, beta: 0.5 }, 1.0).unwrap();
        let r = estimate_holder(&f, &a, 0.0, 64).unwrap();
        assert!((0.45..=0.55).contains(&r.holder_beta_hat), "{r:?}");
        assert!((0.9..=1.1).contains(&r.holder_l_hat), "{r:?}");
        assert!(!r.slope_clipped);
    }

    #[test]
    fn holder_of_lipschitz_profile_is_clipped() {
        let a = SpectralOperator::from_diagonal(&[1.0, 3.0], Role::Generator).unwrap();
        let b1 = SymMatrix::from_row_slice(2, &[2.0, 1.0, 1.0, 2.0]).unwrap();
        let f = make_synthetic_matrix_family(SymMatrix::zeros(2), b1.clone(), ScalarProfile::Linear { c: 1.0 }, 1.0)
            .unwrap();
        let alpha = 0.5;
        let r = estimate_holder(&f, &a, alpha, 16).unwrap();
        assert_eq!(r.holder_beta_hat, 1.0);
        assert!(r.slope_clipped);
        // factorization: L = ‖A^{-α} B1 A^{-α}‖ · Lip(w)
        let inv = a.frac_power(-alpha).unwrap();
        let sandwich = inv.as_matrix() * b1.as_matrix() * inv.as_matrix();
        let expected = op_norm(&sandwich).unwrap();
        assert!((r.holder_l_hat - expected).abs() < 1e-10 * expected);
    }
}
