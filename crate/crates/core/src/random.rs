//! Seeded random states and contexts for property suites and the
//! equivalence sweep.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dense::DenseOperator;
use crate::measurement::Context;
use crate::phase_space::{Modulus, PhasePoint};

/// The reproducible generator used throughout: ChaCha8 keyed by the seed.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn ginibre(dim: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    DMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Full-rank random density operator: `G G^dagger / Tr(G G^dagger)` for a
/// complex Gaussian `G`.
pub fn random_density(modulus: Modulus, rng: &mut impl Rng) -> DenseOperator {
    let dim = modulus.hilbert_dim();
    let g = ginibre(dim, rng);
    let gg = &g * g.adjoint();
    let trace = gg.trace();
    let mat = gg / trace;
    DenseOperator::from_matrix(modulus, mat).expect("square matrix of the right size")
}

/// Random pure state `|psi><psi|` with Gaussian amplitudes.
pub fn random_pure_density(modulus: Modulus, rng: &mut impl Rng) -> DenseOperator {
    let dim = modulus.hilbert_dim();
    let mut amps: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    DenseOperator::from_pure_state(modulus, &amps).expect("amplitude count matches")
}

/// Random mixed state interpolated toward the maximally mixed state:
/// `(1-t) I/d^n + t G`, `t` uniform. Small `t` lands in the non-negative
/// Wigner region, so a batch of these exercises both branches of the
/// extraction.
pub fn random_blended_density(modulus: Modulus, rng: &mut impl Rng) -> DenseOperator {
    let t: f64 = rng.gen();
    let g = random_density(modulus, rng);
    let mixed = DenseOperator::maximally_mixed(modulus);
    mixed
        .scale(Complex64::new(1.0 - t, 0.0))
        .add(&g.scale(Complex64::new(t, 0.0)))
        .expect("same modulus")
}

/// Random nonzero phase point.
pub fn random_point(modulus: Modulus, rng: &mut impl Rng) -> PhasePoint {
    loop {
        let idx = rng.gen_range(0..modulus.point_count());
        let p = PhasePoint::from_index(modulus, idx);
        if !p.is_zero() {
            return p;
        }
    }
}

/// Random context of up to `max_generators` pairwise commuting nonzero
/// points, grown by rejection.
pub fn random_isotropic_context(
    modulus: Modulus,
    max_generators: usize,
    rng: &mut impl Rng,
) -> Context {
    let target = rng.gen_range(1..=max_generators.max(1));
    let mut generators: Vec<PhasePoint> = Vec::new();
    let mut attempts = 0;
    while generators.len() < target && attempts < 200 {
        attempts += 1;
        let candidate = random_point(modulus, rng);
        let commutes = generators
            .iter()
            .all(|g| g.symplectic(&candidate).expect("same modulus") == 0);
        if commutes && !generators.contains(&candidate) {
            generators.push(candidate);
        }
    }
    Context::new(modulus, generators).expect("grown by commutation checks")
}
