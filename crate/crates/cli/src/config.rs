//! Experiment configuration: one JSON document per run.

use std::path::Path;

use serde::Deserialize;
use trotter_core::family::{
    make_heat1d_family, make_synthetic_matrix_family, scalar_family_with_dim, Potential,
};
use trotter_core::{Role, ScalarProfile, SpectralOperator, SymMatrix, TimeDependentFamily};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: FamilySpec,
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(rename = "T", default = "default_horizon")]
    pub horizon: f64,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default = "default_n_list")]
    pub n_list: Vec<usize>,
    #[serde(default = "default_grid_n")]
    pub grid_n: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub command_options: CommandOptions,
}

/// Perturbation family together with its generator `A`.
///
/// `operator` lists the eigenvalues of a diagonal `A` and defaults to the
/// identity. The heat example fixes `A = diag(1², …, d²)` with `d = dim`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    Zero {
        #[serde(default)]
        operator: Option<Vec<f64>>,
    },
    Scalar {
        profile: ScalarProfile,
        #[serde(default)]
        operator: Option<Vec<f64>>,
    },
    Synthetic {
        base: Vec<Vec<f64>>,
        direction: Vec<Vec<f64>>,
        profile: ScalarProfile,
        #[serde(default)]
        operator: Option<Vec<f64>>,
    },
    Heat1d {
        #[serde(default = "Potential::sin_squared")]
        potential: Potential,
        profile: ScalarProfile,
    },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CommandOptions {
    /// `converge`: accepted shortfall of the fitted slope below `β`.
    pub slope_tolerance: f64,
    /// `check`: grid for the Hölder fit.
    pub holder_grid_n: Option<usize>,
    /// `semigroup`: number of time slots `N`.
    pub n_slots: usize,
    /// `semigroup`: step counts for the correspondence check.
    pub semigroup_n: Vec<usize>,
    /// `semigroup` and `bounds`: exponent `γ`, default `max(α, 0.5)`.
    pub gamma: Option<f64>,
    /// `semigroup` and `bounds`: Hölder exponent, default the profile's.
    pub beta: Option<f64>,
    /// `semigroup`: one-step sizes, default `{10⁻¹, …, 10⁻⁴}·T`.
    pub tau_grid: Option<Vec<f64>>,
    /// `semigroup`: coarse slot count of the smoothing check, 0 to skip.
    pub smoothing_slots: usize,
    /// `semigroup`: `n` of the stability check, 0 to skip.
    pub stability_n: usize,
    /// `bounds`: largest `n` of the Beta-sum scan.
    pub scan_n_max: usize,
    /// `bounds`: overrides for the constants fed to the closed forms.
    pub c_gamma: Option<f64>,
    pub holder_l: Option<f64>,
    pub lambda: Option<f64>,
    /// `bounds`: `n` passed to the `M_γ` solver.
    pub m_gamma_n: Option<usize>,
}

impl Default for CommandOptions {
    fn default() -> Self {
        Self {
            slope_tolerance: 0.2,
            holder_grid_n: None,
            n_slots: 16,
            semigroup_n: vec![2, 4, 8],
            gamma: None,
            beta: None,
            tau_grid: None,
            smoothing_slots: 8,
            stability_n: 8,
            scan_n_max: 2000,
            c_gamma: None,
            holder_l: None,
            lambda: None,
            m_gamma_n: None,
        }
    }
}

fn default_dim() -> usize {
    1
}

fn default_horizon() -> f64 {
    1.0
}

fn default_n_list() -> Vec<usize> {
    (1..=8).map(|k| 1 << k).collect()
}

fn default_grid_n() -> usize {
    8
}

fn default_tol() -> f64 {
    1e-10
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let config: Self = serde_json::from_str(text).map_err(|e| invalid(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.dim == 0 {
            return Err(invalid("dim must be positive"));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(invalid("T must be positive"));
        }
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(invalid("alpha must lie in [0, 1)"));
        }
        if !(1e-12..=1e-6).contains(&self.tol) {
            return Err(invalid("tol must lie in [1e-12, 1e-6]"));
        }
        if self.n_list.is_empty() || self.n_list[0] == 0 || self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("n_list must be positive and strictly increasing"));
        }
        if self.grid_n < 2 {
            return Err(invalid("grid_n must be at least 2"));
        }
        let opts = &self.command_options;
        if opts.n_slots == 0 {
            return Err(invalid("n_slots must be positive"));
        }
        if let Some(g) = opts.gamma {
            if !(g > 0.0 && g < 1.0) {
                return Err(invalid("gamma must lie in (0, 1)"));
            }
        }
        if let Some(b) = opts.beta {
            if !(b > 0.0 && b <= 1.0) {
                return Err(invalid("beta must lie in (0, 1]"));
            }
        }
        if let Some(taus) = &opts.tau_grid {
            if taus.iter().any(|&t| !(t > 0.0 && t <= self.horizon)) {
                return Err(invalid("tau_grid entries must lie in (0, T]"));
            }
        }
        match &self.family {
            FamilySpec::Zero { operator }
            | FamilySpec::Scalar { operator, .. }
            | FamilySpec::Synthetic { operator, .. } => {
                if let Some(op) = operator {
                    if op.len() != self.dim {
                        return Err(invalid(format!("operator has {} eigenvalues, dim is {}", op.len(), self.dim)));
                    }
                }
            }
            FamilySpec::Heat1d { .. } => {}
        }
        Ok(())
    }

    pub fn gamma(&self) -> f64 {
        self.command_options.gamma.unwrap_or(self.alpha.max(0.5))
    }

    /// Builds `A` and the family with the declared `α` attached.
    pub fn build(&self) -> Result<(SpectralOperator, TimeDependentFamily), CliError> {
        let generator = |op: &Option<Vec<f64>>| match op {
            Some(values) => SpectralOperator::from_diagonal(values, Role::Generator),
            None => SpectralOperator::from_diagonal(&vec![1.0; self.dim], Role::Generator),
        };
        let (a, family) = match &self.family {
            FamilySpec::Zero { operator } => {
                (generator(operator)?, TimeDependentFamily::zero(self.dim, self.horizon)?)
            }
            FamilySpec::Scalar { profile, operator } => (
                generator(operator)?,
                scalar_family_with_dim(profile.clone(), self.horizon, self.dim)?,
            ),
            FamilySpec::Synthetic { base, direction, profile, operator } => {
                let base = square(base, self.dim)?;
                let direction = square(direction, self.dim)?;
                (
                    generator(operator)?,
                    make_synthetic_matrix_family(base, direction, profile.clone(), self.horizon)?,
                )
            }
            FamilySpec::Heat1d { potential, profile } => {
                make_heat1d_family(self.dim, potential, profile.clone(), self.horizon)?
            }
        };
        Ok((a, family.with_alpha(self.alpha)?))
    }
}

fn square(rows: &[Vec<f64>], dim: usize) -> Result<SymMatrix, CliError> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(invalid(format!("matrix must be {dim}x{dim}")));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(SymMatrix::from_row_slice(dim, &flat)?)
}
