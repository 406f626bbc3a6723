//! Heisenberg-Weyl operators: exact symbolic algebra plus dense
//! realizations.
//!
//! A [`WeylOperator`] is the pair `(phase, point)` standing for
//! `w^phase * T_point`, where `T_u` is the canonical phase-fixed operator
//! `w^{-(u_z|u_x)/2} Z^{u_z} X^{u_x}` and `w = exp(2 pi i / d)`. Products,
//! adjoints and powers stay in this exact form; matrices are materialized
//! only on demand, so long products accumulate no rounding in the phase.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::dense::{checked_dim, DenseOperator, DEFAULT_SIZE_CAP};
use crate::error::{Error, Result};
use crate::phase_space::{Modulus, PhasePoint};

/// `w^exp` for `w = exp(2 pi i / d)`.
pub fn root_of_unity(d: u64, exp: u64) -> Complex64 {
    let angle = std::f64::consts::TAU * (exp % d) as f64 / d as f64;
    Complex64::new(angle.cos(), angle.sin())
}

/// Mixed-radix rank of a basis label in `Z_d^n`, most significant qudit
/// first.
pub fn basis_index(modulus: Modulus, label: &[u64]) -> usize {
    let d = modulus.d() as u128;
    let mut acc: u128 = 0;
    for &c in label {
        acc = acc * d + (c as u64 % modulus.d()) as u128;
    }
    usize::try_from(acc).expect("basis index overflows usize")
}

/// Inverse of [`basis_index`].
pub fn basis_label(modulus: Modulus, mut index: usize) -> Vec<u64> {
    let d = modulus.d() as usize;
    let mut label = vec![0u64; modulus.n()];
    for slot in label.iter_mut().rev() {
        *slot = (index % d) as u64;
        index /= d;
    }
    label
}

/// `w^phase * T_point`, tracked exactly.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WeylOperator {
    phase: u64,
    point: PhasePoint,
}

impl WeylOperator {
    /// The canonical operator `T_u` (phase exponent zero).
    pub fn from_point(point: PhasePoint) -> Self {
        Self { phase: 0, point }
    }

    /// The identity, `T_0`.
    pub fn identity(modulus: Modulus) -> Self {
        Self::from_point(PhasePoint::zero(modulus))
    }

    pub fn with_phase(phase: u64, point: PhasePoint) -> Self {
        Self {
            phase: phase % point.modulus().d(),
            point,
        }
    }

    pub fn phase(&self) -> u64 {
        self.phase
    }

    pub fn point(&self) -> &PhasePoint {
        &self.point
    }

    pub fn modulus(&self) -> Modulus {
        self.point.modulus()
    }

    /// The exponent `p` in the monomial form `w^p Z^{u_z} X^{u_x}`; for the
    /// canonical `T_u` this is `-(u_z|u_x)/2`.
    pub fn monomial_phase(&self) -> u64 {
        let m = self.modulus();
        m.add(self.phase, m.neg(m.half(self.point.self_overlap())))
    }

    /// Group law: `(w^a T_u)(w^b T_v) = w^{a+b+[u,v]/2} T_{u+v}`.
    pub fn compose(&self, other: &WeylOperator) -> Result<WeylOperator> {
        let m = self.modulus();
        let bracket = self.point.symplectic(&other.point)?;
        let phase = m.add(m.add(self.phase, other.phase), m.half(bracket));
        Ok(WeylOperator {
            phase,
            point: self.point.add(&other.point)?,
        })
    }

    /// Adjoint: `(w^a T_u)^dagger = w^{-a} T_{-u}`.
    pub fn dagger(&self) -> WeylOperator {
        WeylOperator {
            phase: self.modulus().neg(self.phase),
            point: self.point.neg(),
        }
    }

    /// `k`-th power; `T_u^k = T_{ku}` because `[u, ju] = 0`.
    pub fn pow(&self, k: u64) -> WeylOperator {
        let m = self.modulus();
        WeylOperator {
            phase: m.mul(self.phase, k),
            point: self.point.scale(k),
        }
    }

    /// Dense realization under the default size cap.
    pub fn matrix(&self) -> Result<DenseOperator> {
        self.matrix_with_cap(DEFAULT_SIZE_CAP)
    }

    /// Dense realization of `w^phase Z^{u_z} X^{u_x}` (with the canonical
    /// phase folded in). Basis states are labelled by `Z_d^n`, most
    /// significant qudit first.
    pub fn matrix_with_cap(&self, cap: usize) -> Result<DenseOperator> {
        let m = self.modulus();
        let dim = checked_dim(m, cap)?;
        let d = m.d();
        let mono = self.monomial_phase();
        let z = self.point.z();
        let x = self.point.x();
        let mut mat = DMatrix::<Complex64>::zeros(dim, dim);
        for col in 0..dim {
            let b = basis_label(m, col);
            // X^{u_x}|b> = |b + u_x>, then Z^{u_z} contributes w^{(u_z|b+u_x)}.
            let shifted: Vec<u64> = b.iter().zip(x).map(|(&bi, &xi)| m.add(bi, xi)).collect();
            let row = basis_index(m, &shifted);
            let exp = m.add(mono, m.inner_product(z, &shifted)?);
            mat[(row, col)] = root_of_unity(d, exp);
        }
        DenseOperator::from_matrix(m, mat)
    }

    /// `Tr(self * rho)` using the one-nonzero-per-column structure of the
    /// Weyl matrix; `O(d^n)` instead of materializing the operator.
    pub fn trace_against(&self, rho: &DenseOperator) -> Result<Complex64> {
        let m = self.modulus();
        if rho.modulus() != m {
            return Err(Error::ModulusMismatch {
                d1: m.d(),
                n1: m.n(),
                d2: rho.modulus().d(),
                n2: rho.modulus().n(),
            });
        }
        let dim = rho.dim();
        let d = m.d();
        let mono = self.monomial_phase();
        let z = self.point.z();
        let x = self.point.x();
        let mut acc = Complex64::new(0.0, 0.0);
        for col in 0..dim {
            let b = basis_label(m, col);
            let shifted: Vec<u64> = b.iter().zip(x).map(|(&bi, &xi)| m.add(bi, xi)).collect();
            let row = basis_index(m, &shifted);
            let exp = m.add(mono, m.inner_product(z, &shifted)?);
            acc += root_of_unity(d, exp) * rho.matrix()[(col, row)];
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(d: u64, n: usize) -> Modulus {
        Modulus::new(d, n).unwrap()
    }

    fn pt(modulus: Modulus, z: &[u64], x: &[u64]) -> PhasePoint {
        PhasePoint::new(modulus, z.to_vec(), x.to_vec()).unwrap()
    }

    fn t(modulus: Modulus, z: &[u64], x: &[u64]) -> WeylOperator {
        WeylOperator::from_point(pt(modulus, z, x))
    }

    #[test]
    fn identity_is_the_zero_point_with_zero_phase() {
        let id = WeylOperator::identity(m(3, 1));
        assert_eq!(id.phase(), 0);
        assert!(id.point().is_zero());
        let mat = id.matrix().unwrap();
        assert!(mat.max_abs_diff(&DenseOperator::identity(m(3, 1))) < 1e-15);
    }

    #[test]
    fn canonical_monomial_phases_match_halving() {
        // -half(1) = 1 mod 3
        assert_eq!(t(m(3, 1), &[1], &[1]).monomial_phase(), 1);
        // (2|3) = 6 = 1 mod 5, -half(1) = -3 = 2 mod 5
        assert_eq!(t(m(5, 1), &[2], &[3]).monomial_phase(), 2);
        assert_eq!(t(m(3, 1), &[1], &[0]).monomial_phase(), 0);
    }

    #[test]
    fn compose_with_identity_is_identity_law() {
        let md = m(5, 1);
        let a = t(md, &[2], &[3]);
        let id = WeylOperator::identity(md);
        assert_eq!(a.compose(&id).unwrap(), a);
        assert_eq!(id.compose(&a).unwrap(), a);
    }

    #[test]
    fn commuting_points_compose_without_phase() {
        let md = m(9, 1);
        let a = t(md, &[3], &[0]);
        let b = t(md, &[6], &[0]);
        let ab = a.compose(&b).unwrap();
        assert_eq!(ab, WeylOperator::identity(md));

        let md2 = m(3, 2);
        let u = pt(md2, &[1, 2], &[0, 1]);
        let v = u.scale(2);
        let prod = WeylOperator::from_point(u.clone())
            .compose(&WeylOperator::from_point(v.clone()))
            .unwrap();
        assert_eq!(prod, WeylOperator::from_point(u.add(&v).unwrap()));
    }

    #[test]
    fn symbolic_commutation_exponent_is_the_symplectic_product() {
        let md = m(3, 1);
        for u in md.points() {
            for v in md.points() {
                let a = WeylOperator::from_point(u.clone());
                let b = WeylOperator::from_point(v.clone());
                let ab = a.compose(&b).unwrap();
                let ba = b.compose(&a).unwrap();
                assert_eq!(ab.point(), ba.point());
                let bracket = u.symplectic(&v).unwrap();
                assert_eq!(ab.phase(), md.add(ba.phase(), bracket));
            }
        }
    }

    #[test]
    fn matrix_is_a_homomorphism_exhaustively_at_d3_n1() {
        let md = m(3, 1);
        for u in md.points() {
            for v in md.points() {
                let a = WeylOperator::from_point(u.clone());
                let b = WeylOperator::from_point(v.clone());
                let lhs = a.compose(&b).unwrap().matrix().unwrap();
                let rhs = a.matrix().unwrap().mul(&b.matrix().unwrap()).unwrap();
                assert!(lhs.max_abs_diff(&rhs) < 1e-12, "u={u:?} v={v:?}");
            }
        }
    }

    #[test]
    fn z_matrix_is_the_clock_at_d3() {
        let md = m(3, 1);
        let z = t(md, &[1], &[0]).matrix().unwrap();
        let w = root_of_unity(3, 1);
        let mut expected = DMatrix::<Complex64>::zeros(3, 3);
        expected[(0, 0)] = Complex64::new(1.0, 0.0);
        expected[(1, 1)] = w;
        expected[(2, 2)] = w * w;
        assert!(z.max_abs_diff(&DenseOperator::from_matrix(md, expected).unwrap()) < 1e-15);
    }

    #[test]
    fn x_matrix_is_the_shift_at_d3() {
        let md = m(3, 1);
        let x = t(md, &[0], &[1]).matrix().unwrap();
        // X|a> = |a+1>
        let mut expected = DMatrix::<Complex64>::zeros(3, 3);
        expected[(1, 0)] = Complex64::new(1.0, 0.0);
        expected[(2, 1)] = Complex64::new(1.0, 0.0);
        expected[(0, 2)] = Complex64::new(1.0, 0.0);
        assert!(x.max_abs_diff(&DenseOperator::from_matrix(md, expected).unwrap()) < 1e-15);
    }

    #[test]
    fn dth_matrix_power_is_identity() {
        for (d, n) in [(3u64, 1usize), (5, 1), (3, 2)] {
            let md = m(d, n);
            let id = DenseOperator::identity(md);
            for u in md.points() {
                let mat = WeylOperator::from_point(u.clone()).matrix().unwrap();
                let mut acc = DenseOperator::identity(md);
                for _ in 0..d {
                    acc = acc.mul(&mat).unwrap();
                }
                assert!(acc.max_abs_diff(&id) < 1e-12, "T^d != I at {u:?}");
            }
        }
    }

    #[test]
    fn dagger_matches_matrix_adjoint_and_point_negation() {
        let md = m(3, 1);
        for u in md.points() {
            let a = WeylOperator::from_point(u.clone());
            assert_eq!(a.dagger(), WeylOperator::from_point(u.neg()));
            let lhs = a.dagger().matrix().unwrap();
            let rhs = a.matrix().unwrap().adjoint();
            assert!(lhs.max_abs_diff(&rhs) < 1e-12);
            assert_eq!(a.dagger().dagger(), a);
        }
    }

    #[test]
    fn matrix_eigenvalues_are_roots_of_unity() {
        for (d, n) in [(3u64, 1usize), (5, 1)] {
            let md = m(d, n);
            for u in md.points() {
                let mat = WeylOperator::from_point(u).matrix().unwrap();
                let eigs = mat
                    .matrix()
                    .clone()
                    .schur()
                    .eigenvalues()
                    .expect("complex Schur always triangularizes");
                for e in eigs.iter() {
                    let closest = (0..d)
                        .map(|k| (e - root_of_unity(d, k)).norm())
                        .fold(f64::INFINITY, f64::min);
                    assert!(closest < 1e-9, "eigenvalue {e} of T at d={d}");
                }
            }
        }
    }

    #[test]
    fn trace_against_matches_dense_product_trace() {
        let md = m(3, 2);
        let mut rho = DMatrix::<Complex64>::zeros(9, 9);
        for i in 0..9 {
            for j in 0..9 {
                rho[(i, j)] = Complex64::new((i * 9 + j) as f64 / 100.0, (i as f64 - j as f64) / 50.0);
            }
        }
        let rho = DenseOperator::from_matrix(md, rho).unwrap();
        for idx in [0usize, 1, 17, 40, 80] {
            let op = WeylOperator::from_point(PhasePoint::from_index(md, idx));
            let fast = op.trace_against(&rho).unwrap();
            let slow = op.matrix().unwrap().product_trace(&rho).unwrap();
            assert!((fast - slow).norm() < 1e-10);
        }
    }

    #[test]
    fn matrix_respects_size_cap() {
        let md = m(3, 2);
        let op = WeylOperator::identity(md);
        assert!(matches!(
            op.matrix_with_cap(8),
            Err(Error::CapacityExceeded { required: 9, cap: 8 })
        ));
        assert!(op.matrix_with_cap(9).is_ok());
    }

    proptest! {
        #[test]
        fn compose_is_associative(
            d in prop::sample::select(vec![3u64, 5, 9, 15]),
            idx in prop::array::uniform3(0usize..10_000),
            phases in prop::array::uniform3(0u64..15),
        ) {
            let md = m(d, 2);
            let count = md.point_count();
            let ops: Vec<WeylOperator> = idx
                .iter()
                .zip(phases)
                .map(|(&i, p)| WeylOperator::with_phase(p, PhasePoint::from_index(md, i % count)))
                .collect();
            let left = ops[0].compose(&ops[1]).unwrap().compose(&ops[2]).unwrap();
            let right = ops[0].compose(&ops[1].compose(&ops[2]).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn power_law_collapses_to_identity(
            d in prop::sample::select(vec![3u64, 5, 9, 15]),
            idx in 0usize..10_000,
        ) {
            let md = m(d, 2);
            let u = PhasePoint::from_index(md, idx % md.point_count());
            let op = WeylOperator::from_point(u);
            prop_assert_eq!(op.pow(d), WeylOperator::identity(md));
        }
    }
}
