//! Self-adjoint operator calculus on finite-dimensional truncations.
//!
//! Every operator is kept in diagonalized form, so fractional powers and
//! semigroups are evaluated exactly (up to rounding) as functions of the
//! spectrum rather than by time stepping.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance for the symmetry check of [`SymMatrix::new`].
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Tolerance on `QᵀQ = I`, per entry.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

/// Real symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    m: DMatrix<f64>,
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

fn check_square_finite(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

impl SymMatrix {
    /// Wraps `m` after checking `‖M − Mᵀ‖_max ≤ 1e-12·(1 + ‖M‖_max)`.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        check_square_finite(&m)?;
        let allowed = SYMMETRY_TOL * (1.0 + max_abs(&m));
        let asymmetry = max_abs(&(&m - m.transpose()));
        if asymmetry > allowed {
            return Err(Error::NotSymmetric { asymmetry, allowed });
        }
        Ok(Self { m })
    }

    /// Replaces `m` by `(M + Mᵀ)/2` without any tolerance check.
    pub fn symmetrized(m: DMatrix<f64>) -> Result<Self> {
        check_square_finite(&m)?;
        let sym = (&m + m.transpose()) * 0.5;
        Ok(Self { m: sym })
    }

    pub fn from_row_slice(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: entries.len() });
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn identity(dim: usize) -> Self {
        Self { m: DMatrix::identity(dim, dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { m: DMatrix::zeros(dim, dim) }
    }

    pub fn from_diagonal(values: &[f64]) -> Self {
        Self { m: DMatrix::from_diagonal(&DVector::from_column_slice(values)) }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { m: &self.m * c }
    }

    pub fn add_scaled(&self, other: &SymMatrix, c: f64) -> Result<Self> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(Self { m: &self.m + &other.m * c })
    }

    pub fn is_zero(&self) -> bool {
        self.m.iter().all(|&x| x == 0.0)
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.m.clone()).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }
}

/// Marks whether an operator plays the generator role (`A ≥ I` enforced).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    #[default]
    Generic,
    Generator,
}

/// Self-adjoint operator stored by its eigendecomposition `Q diag(λ) Qᵀ`,
/// eigenvalues ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralOperator {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
    role: Role,
}

impl SpectralOperator {
    pub fn diagonalize(m: &SymMatrix, role: Role) -> Result<Self> {
        let dim = m.dim();
        let eig = SymmetricEigen::new(m.as_matrix().clone());
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let eigenvalues = DVector::from_iterator(dim, order.iter().map(|&i| eig.eigenvalues[i]));
        let eigenvectors = DMatrix::from_fn(dim, dim, |r, c| eig.eigenvectors[(r, order[c])]);
        Self::from_parts(eigenvalues, eigenvectors, role)
    }

    /// Diagonal operator with the identity as eigenbasis.
    pub fn from_diagonal(values: &[f64], role: Role) -> Result<Self> {
        let dim = values.len();
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        let eigenvalues = DVector::from_iterator(dim, order.iter().map(|&i| values[i]));
        let eigenvectors = DMatrix::from_fn(dim, dim, |r, c| if r == order[c] { 1.0 } else { 0.0 });
        Self::from_parts(eigenvalues, eigenvectors, role)
    }

    pub fn from_parts(eigenvalues: DVector<f64>, eigenvectors: DMatrix<f64>, role: Role) -> Result<Self> {
        let dim = eigenvalues.len();
        if eigenvectors.nrows() != dim || eigenvectors.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: eigenvectors.ncols() });
        }
        if eigenvalues.iter().chain(eigenvectors.iter()).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        if eigenvalues.as_slice().windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::DomainError("eigenvalues must be nondecreasing".into()));
        }
        let gram = eigenvectors.transpose() * &eigenvectors;
        let defect = max_abs(&(gram - DMatrix::<f64>::identity(dim, dim)));
        if defect > ORTHONORMAL_TOL {
            return Err(Error::DomainError(format!("eigenvectors not orthonormal (defect {defect:e})")));
        }
        let op = Self { eigenvalues, eigenvectors, role };
        if role == Role::Generator && op.min_eigenvalue() < 1.0 {
            return Err(Error::SpectrumViolatesS1 { min_eigenvalue: op.min_eigenvalue() });
        }
        Ok(op)
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        self.eigenvalues.as_slice()
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `Q diag(f(λᵢ)) Qᵀ`, symmetrized.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let mut scaled = self.eigenvectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= f(self.eigenvalues[j]);
        }
        let m = scaled * self.eigenvectors.transpose();
        SymMatrix { m: (&m + m.transpose()) * 0.5 }
    }

    pub fn reconstruct(&self) -> SymMatrix {
        self.map_spectrum(|l| l)
    }

    /// `A^γ`; negative exponents give inverse powers.
    pub fn frac_power(&self, gamma: f64) -> Result<SymMatrix> {
        if !gamma.is_finite() {
            return Err(Error::NonFinite);
        }
        let min = self.min_eigenvalue();
        if self.dim() > 0 && min <= 0.0 {
            return Err(Error::NonPositiveSpectrum { min_eigenvalue: min });
        }
        if gamma == 0.0 {
            return Ok(SymMatrix::identity(self.dim()));
        }
        Ok(self.map_spectrum(|l| l.powf(gamma)))
    }

    /// `e^{-τA}`.
    pub fn semigroup(&self, tau: f64) -> Result<SymMatrix> {
        if tau.is_nan() {
            return Err(Error::NonFinite);
        }
        if tau < 0.0 {
            return Err(Error::NegativeTime(tau));
        }
        if tau == 0.0 {
            return Ok(SymMatrix::identity(self.dim()));
        }
        Ok(self.map_spectrum(|l| (-tau * l).exp()))
    }
}

/// Spectral norm (largest singular value) of a general square matrix.
pub fn op_norm(m: &DMatrix<f64>) -> Result<f64> {
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    if m.is_empty() {
        return Ok(0.0);
    }
    if m.nrows() == 1 || m.ncols() == 1 {
        return Ok(m.norm());
    }
    if m.iter().all(|&x| x == 0.0) {
        return Ok(0.0);
    }
    Ok(m.singular_values().max())
}

/// Spectral norm of a symmetric matrix via its eigenvalues.
pub fn sym_norm(m: &SymMatrix) -> f64 {
    m.eigenvalues().iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn diagonal_input_is_sorted() {
        let m = SymMatrix::from_diagonal(&[2.0, 1.0]);
        let op = SpectralOperator::diagonalize(&m, Role::Generic).unwrap();
        assert_eq!(op.eigenvalues(), &[1.0, 2.0]);
        let q = op.eigenvectors();
        // a permutation up to sign
        assert!(close(q[(0, 0)].abs(), 0.0, 1e-14) && close(q[(1, 0)].abs(), 1.0, 1e-14));
    }

    #[test]
    fn two_by_two_roots() {
        let m = SymMatrix::from_row_slice(2, &[2.0, 1.0, 1.0, 2.0]).unwrap();
        let op = SpectralOperator::diagonalize(&m, Role::Generator).unwrap();
        assert!(close(op.eigenvalues()[0], 1.0, 1e-14));
        assert!(close(op.eigenvalues()[1], 3.0, 1e-14));
        let err = (op.reconstruct().as_matrix() - m.as_matrix()).norm() / m.as_matrix().norm();
        assert!(err < 1e-10);
    }

    #[test]
    fn identity_spectrum() {
        for d in [1, 3, 7] {
            let op = SpectralOperator::diagonalize(&SymMatrix::identity(d), Role::Generator).unwrap();
            assert!(op.eigenvalues().iter().all(|&l| close(l, 1.0, 1e-14)));
        }
    }

    #[test]
    fn rejects_asymmetric() {
        let err = SymMatrix::from_row_slice(2, &[1.0, 2.0, 0.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::NotSymmetric { .. }));
    }

    #[test]
    fn generator_role_needs_spectrum_above_one() {
        let m = SymMatrix::from_diagonal(&[0.5, 2.0]);
        let err = SpectralOperator::diagonalize(&m, Role::Generator).unwrap_err();
        assert!(matches!(err, Error::SpectrumViolatesS1 { .. }));
        assert!(SpectralOperator::diagonalize(&m, Role::Generic).is_ok());
    }

    #[test]
    fn frac_power_examples() {
        let op = SpectralOperator::from_diagonal(&[1.0, 4.0], Role::Generator).unwrap();
        let half = op.frac_power(0.5).unwrap();
        assert_eq!(half.eigenvalues(), vec![1.0, 2.0]);
        let inv_half = op.frac_power(-0.5).unwrap();
        let ev = inv_half.eigenvalues();
        assert!(close(ev[0], 0.5, 1e-15) && close(ev[1], 1.0, 1e-15));
        assert_eq!(op.frac_power(0.0).unwrap(), SymMatrix::identity(2));
    }

    #[test]
    fn frac_power_rejects_nonpositive() {
        let op = SpectralOperator::from_diagonal(&[0.0, 4.0], Role::Generic).unwrap();
        assert!(matches!(op.frac_power(0.5), Err(Error::NonPositiveSpectrum { .. })));
    }

    #[test]
    fn semigroup_examples() {
        let op = SpectralOperator::from_diagonal(&[1.0], Role::Generator).unwrap();
        assert_eq!(op.semigroup(0.0).unwrap(), SymMatrix::identity(1));
        let half = op.semigroup(std::f64::consts::LN_2).unwrap();
        assert!(close(half.as_matrix()[(0, 0)], 0.5, 1e-15));
        assert!(matches!(op.semigroup(-1.0), Err(Error::NegativeTime(_))));

        // ‖A e^{-A/4}‖ for spectrum {1, 4}: max(e^{-1/4}, 4e^{-1}) = 4/e ≤ 4
        let op = SpectralOperator::from_diagonal(&[1.0, 4.0], Role::Generator).unwrap();
        let prod = op.frac_power(1.0).unwrap().into_matrix() * op.semigroup(0.25).unwrap().into_matrix();
        let n = op_norm(&prod).unwrap();
        assert!(close(n, 4.0 * (-1.0_f64).exp(), 1e-12));
        assert!(close(n, 1.471_517_764_685_769, 1e-12));
        assert!(n <= 4.0);
    }

    #[test]
    fn op_norm_examples() {
        assert!(close(op_norm(&DMatrix::identity(3, 3)).unwrap(), 1.0, 1e-14));
        let d = DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, -2.0]);
        assert!(close(op_norm(&d).unwrap(), 3.0, 1e-14));
        let shift = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(close(op_norm(&shift).unwrap(), 1.0, 1e-14));
        let bad = DMatrix::from_row_slice(1, 1, &[f64::NAN]);
        assert_eq!(op_norm(&bad), Err(Error::NonFinite));
    }
}
