//! Numerical study of split-step (Trotter) product approximations for
//! non-autonomous parabolic evolution equations `u' + (A + B(t))u = 0`.

pub mod bounds;
pub mod error;
pub mod family;
pub mod oracle;
pub mod rates;
pub mod semigroup;
pub mod spectral;
pub mod trotter;

pub use error::{Error, Result};
pub use family::{ScalarProfile, TimeDependentFamily};
pub use spectral::{Role, SpectralOperator, SymMatrix};
pub use trotter::{Propagator, Variant};
