//! Discrete phase-space toolkit for systems of `n` qudits of odd local
//! dimension `d`.
//!
//! The crate is organized in layers:
//!
//! - [`phase_space`]: exact arithmetic over `Z_d`, phase points, the
//!   symplectic form, generated submodules and outcome-induced linear forms.
//! - [`weyl`]: Heisenberg-Weyl operators with exact symbolic composition and
//!   dense matrix realizations.
//! - [`measurement`]: contexts of commuting Weyl operators, stabilizer
//!   projectors via character sums, coarse-grained measurements and their
//!   implementations.
//! - [`wigner`]: the discrete Wigner function of states and POVM elements,
//!   phase-point operators, negativity reports and a factorized fast
//!   symplectic transform.
//! - [`hvm`]: value assignments, deterministic hidden-variable models, the
//!   constructive equivalence between non-contextual models and Wigner
//!   non-negativity, and the operational non-contextuality audit.
//!
//! All algebraic phases are tracked as exponents in `Z_d`; floating point
//! enters only at the dense-matrix boundary.

pub mod dense;
pub mod error;
pub mod hvm;
pub mod json;
pub mod measurement;
pub mod phase_space;
pub mod random;
pub mod weyl;
pub mod wigner;

pub use dense::{DenseOperator, DEFAULT_SIZE_CAP};
pub use error::{Error, Result};
pub use phase_space::{Modulus, OutcomeForm, PhasePoint, Submodule};
pub use weyl::WeylOperator;
pub use wigner::{WignerFunction, WignerKind};
