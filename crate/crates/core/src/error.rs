use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not symmetric (max asymmetry {asymmetry:e}, allowed {allowed:e})")]
    NotSymmetric { asymmetry: f64, allowed: f64 },

    #[error("operator tagged as generator has minimum eigenvalue {min_eigenvalue} < 1")]
    SpectrumViolatesS1 { min_eigenvalue: f64 },

    #[error("fractional power requires a positive spectrum, found eigenvalue {min_eigenvalue}")]
    NonPositiveSpectrum { min_eigenvalue: f64 },

    #[error("semigroup time must be non-negative, got {0}")]
    NegativeTime(f64),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("time {t} outside of [0, {horizon}]")]
    TimeOutOfRange { t: f64, horizon: f64 },

    #[error("profile coefficient must be non-negative, got {0}")]
    NegativeCoefficient(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("potential is negative at x = {x} (value {value:e})")]
    NegativePotential { x: f64, value: f64 },

    #[error("grid of size {grid_n} is too coarse (need at least {min})")]
    DegenerateGrid { grid_n: usize, min: usize },

    #[error("invalid interval: s = {s}, t = {t}, horizon = {horizon}, n = {n}")]
    InvalidInterval { s: f64, t: f64, horizon: f64, n: usize },

    #[error("family `{0}` does not commute with the generator (scalar family required)")]
    NonCommutingFamily(String),

    #[error("step refinement exceeded the cap of {cap} steps (last increment {last_increment:e}, tol {tol:e})")]
    CapExceeded { cap: usize, last_increment: f64, tol: f64 },

    #[error("{n} does not divide the slot count {slots}")]
    IndivisibleGrid { n: usize, slots: usize },

    #[error("parameter out of domain: {0}")]
    DomainError(String),

    #[error("feasibility condition violated: n = {n} must exceed c1^(1/(1-gamma)) = {threshold}")]
    FeasibilityViolated { n: usize, threshold: f64 },

    #[error("no solution in the bisection bracket [{lo}, {hi}]")]
    Infeasible { lo: f64, hi: f64 },

    #[error("rate fit needs at least {need} usable points, got {got}")]
    TooFewPoints { need: usize, got: usize },

    #[error("all errors are at the numerical floor; the rate fit is degenerate")]
    AllBelowFloor,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
