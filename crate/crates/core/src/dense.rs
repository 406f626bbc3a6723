//! Dense complex matrices acting on the `d^n`-dimensional Hilbert space.
//!
//! Each operator carries its [`Modulus`] so that `d` and `n` are never
//! guessed from the matrix dimension (dimension 9 could be one 9-level
//! system or two qutrits).

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::phase_space::Modulus;

/// Default cap on the dense dimension `d^n`. Materializing larger operators
/// returns [`Error::CapacityExceeded`] unless a higher cap is passed
/// explicitly.
pub const DEFAULT_SIZE_CAP: usize = 4096;

/// Check `d^n` against a cap before allocating dense storage.
pub fn checked_dim(modulus: Modulus, cap: usize) -> Result<usize> {
    let dim = modulus.hilbert_dim();
    if dim > cap {
        return Err(Error::CapacityExceeded { required: dim, cap });
    }
    Ok(dim)
}

/// A `d^n x d^n` complex matrix tagged with its modulus.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    modulus: Modulus,
    mat: DMatrix<Complex64>,
}

impl DenseOperator {
    pub fn from_matrix(modulus: Modulus, mat: DMatrix<Complex64>) -> Result<Self> {
        let dim = modulus.hilbert_dim();
        if mat.nrows() != dim || mat.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: mat.nrows().max(mat.ncols()),
            });
        }
        Ok(Self { modulus, mat })
    }

    pub fn identity(modulus: Modulus) -> Self {
        let dim = modulus.hilbert_dim();
        Self {
            modulus,
            mat: DMatrix::identity(dim, dim),
        }
    }

    pub fn zero(modulus: Modulus) -> Self {
        let dim = modulus.hilbert_dim();
        Self {
            modulus,
            mat: DMatrix::zeros(dim, dim),
        }
    }

    /// The state `I / d^n`.
    pub fn maximally_mixed(modulus: Modulus) -> Self {
        let dim = modulus.hilbert_dim();
        Self::identity(modulus).scale(Complex64::new(1.0 / dim as f64, 0.0))
    }

    /// Outer product `|psi><psi|` of a (normalized) amplitude vector.
    pub fn from_pure_state(modulus: Modulus, amplitudes: &[Complex64]) -> Result<Self> {
        let dim = modulus.hilbert_dim();
        if amplitudes.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: amplitudes.len(),
            });
        }
        let mat = DMatrix::from_fn(dim, dim, |i, j| amplitudes[i] * amplitudes[j].conj());
        Ok(Self { modulus, mat })
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.mat
    }

    pub fn adjoint(&self) -> Self {
        Self {
            modulus: self.modulus,
            mat: self.mat.adjoint(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.trace()
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            modulus: self.modulus,
            mat: &self.mat * &other.mat,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            modulus: self.modulus,
            mat: &self.mat + &other.mat,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            modulus: self.modulus,
            mat: &self.mat - &other.mat,
        })
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            modulus: self.modulus,
            mat: &self.mat * factor,
        }
    }

    pub fn add_assign_scaled(&mut self, other: &Self, factor: Complex64) {
        self.mat.zip_apply(&other.mat, |a, b| *a += factor * b);
    }

    /// `Tr(self * other)` without materializing the product.
    pub fn product_trace(&self, other: &Self) -> Result<Complex64> {
        self.check_same(other)?;
        let dim = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..dim {
            for j in 0..dim {
                acc += self.mat[(i, j)] * other.mat[(j, i)];
            }
        }
        Ok(acc)
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.mat
            .iter()
            .zip(other.mat.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.mat.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    /// Eigenvalues of a Hermitian operator, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let mut eigs: Vec<f64> = self
            .mat
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect();
        eigs.sort_by(|a, b| a.partial_cmp(b).expect("eigenvalues are finite"));
        eigs
    }

    /// Validate as a density operator: Hermitian, unit trace, positive
    /// semidefinite within `tol`.
    pub fn validate_density(&self, tol: f64) -> Result<()> {
        let herm = self.hermiticity_deviation();
        if herm > tol {
            return Err(Error::StateValidation {
                reason: format!("not Hermitian: deviation {herm:.3e}"),
            });
        }
        let trace = self.trace();
        if (trace.re - 1.0).abs() > tol || trace.im.abs() > tol {
            return Err(Error::StateValidation {
                reason: format!("trace {trace} is not 1"),
            });
        }
        let min = self
            .hermitian_eigenvalues()
            .first()
            .copied()
            .unwrap_or(0.0);
        if min < -tol {
            return Err(Error::StateValidation {
                reason: format!("negative eigenvalue {min:.3e}"),
            });
        }
        Ok(())
    }

    /// Validate as a POVM element: Hermitian with spectrum in `[0, 1]`
    /// within `tol`.
    pub fn validate_effect(&self, tol: f64) -> Result<()> {
        let herm = self.hermiticity_deviation();
        if herm > tol {
            return Err(Error::EffectValidation {
                reason: format!("not Hermitian: deviation {herm:.3e}"),
            });
        }
        let eigs = self.hermitian_eigenvalues();
        let min = eigs.first().copied().unwrap_or(0.0);
        let max = eigs.last().copied().unwrap_or(0.0);
        if min < -tol || max > 1.0 + tol {
            return Err(Error::EffectValidation {
                reason: format!("spectrum [{min:.3e}, {max:.3e}] outside [0, 1]"),
            });
        }
        Ok(())
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch {
                d1: self.modulus.d(),
                n1: self.modulus.n(),
                d2: other.modulus.d(),
                n2: other.modulus.n(),
            });
        }
        Ok(())
    }
}
