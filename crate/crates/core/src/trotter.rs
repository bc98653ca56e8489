//! Split-step products `V_n(t,s)` and `Ṽ_n(t,s)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::TimeDependentFamily;
use crate::spectral::SpectralOperator;

/// How a [`Propagator`] was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    TrotterLeft,
    TrotterRight,
    Reference,
    Analytic,
}

/// Approximation of the solution operator `U(t,s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagator {
    pub matrix: DMatrix<f64>,
    pub t: f64,
    pub s: f64,
    pub method: Method,
    /// Number of Trotter factors or oracle steps.
    pub steps: usize,
    /// A posteriori error estimate, for reference propagators.
    pub error_estimate: Option<f64>,
}

/// Uniform partition `t_j = s + j(t−s)/n` of `[s, t]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Partition {
    pub s: f64,
    pub t: f64,
    pub n: usize,
}

impl Partition {
    pub fn new(s: f64, t: f64, n: usize) -> Self {
        Self { s, t, n }
    }

    pub fn step(&self) -> f64 {
        (self.t - self.s) / self.n as f64
    }

    /// `t_j`, with `t_0 = s` and `t_n = t` exactly.
    pub fn node(&self, j: usize) -> f64 {
        if j == 0 {
            self.s
        } else if j == self.n {
            self.t
        } else {
            self.s + j as f64 * (self.t - self.s) / self.n as f64
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n).map(|j| self.node(j)).collect()
    }
}

pub(crate) fn check_interval(family: &TimeDependentFamily, s: f64, t: f64, n: usize) -> Result<()> {
    let horizon = family.horizon();
    let slack = 1e-12 * horizon.max(1.0);
    let ok = n >= 1 && s.is_finite() && t.is_finite() && s >= -slack && s <= t && t <= horizon + slack;
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidInterval { s, t, horizon, n })
    }
}

fn check_dims(a: &SpectralOperator, family: &TimeDependentFamily) -> Result<()> {
    if a.dim() != family.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: family.dim() });
    }
    Ok(())
}

/// `G_j = e^{-τA} e^{-τB(t_j)}`.
pub fn step_g(a: &SpectralOperator, family: &TimeDependentFamily, tau: f64, node: f64) -> Result<DMatrix<f64>> {
    check_dims(a, family)?;
    let ea = a.semigroup(tau)?;
    let eb = family.exp_neg(tau, node)?;
    Ok(ea.as_matrix() * eb.as_matrix())
}

/// `V_n(t,s) = G_{n−1} ⋯ G_1 G_0` with left-endpoint nodes.
pub fn trotter_left(a: &SpectralOperator, family: &TimeDependentFamily, s: f64, t: f64, n: usize) -> Result<Propagator> {
    check_dims(a, family)?;
    check_interval(family, s, t, n)?;
    let part = Partition::new(s, t, n);
    let tau = part.step();
    let ea = a.semigroup(tau)?;
    let mut acc = DMatrix::<f64>::identity(a.dim(), a.dim());
    if tau > 0.0 {
        for j in 0..n {
            let eb = family.exp_neg(tau, part.node(j))?;
            acc = ea.as_matrix() * (eb.as_matrix() * acc);
        }
    }
    Ok(Propagator { matrix: acc, t, s, method: Method::TrotterLeft, steps: n, error_estimate: None })
}

/// `Ṽ_n(t,s) = G̃_n ⋯ G̃_1` with `G̃_j = e^{-τB(t_j)} e^{-τA}` and
/// right-endpoint nodes.
pub fn trotter_right(a: &SpectralOperator, family: &TimeDependentFamily, s: f64, t: f64, n: usize) -> Result<Propagator> {
    check_dims(a, family)?;
    check_interval(family, s, t, n)?;
    let part = Partition::new(s, t, n);
    let tau = part.step();
    let ea = a.semigroup(tau)?;
    let mut acc = DMatrix::<f64>::identity(a.dim(), a.dim());
    if tau > 0.0 {
        for j in 1..=n {
            let eb = family.exp_neg(tau, part.node(j))?;
            acc = eb.as_matrix() * (ea.as_matrix() * acc);
        }
    }
    Ok(Propagator { matrix: acc, t, s, method: Method::TrotterRight, steps: n, error_estimate: None })
}

/// Which split-step product to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Left,
    Right,
}

pub fn trotter(
    variant: Variant,
    a: &SpectralOperator,
    family: &TimeDependentFamily,
    s: f64,
    t: f64,
    n: usize,
) -> Result<Propagator> {
    match variant {
        Variant::Left => trotter_left(a, family, s, t, n),
        Variant::Right => trotter_right(a, family, s, t, n),
    }
}
