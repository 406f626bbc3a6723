//! Contexts of commuting Weyl operators, stabilizer projectors via
//! character sums, projective measurements and their implementations with
//! classical postprocessing.
//!
//! A context `{T_a1, ..., T_am}` is jointly measurable exactly when the
//! points are pairwise isotropic. The projector onto the joint eigenspace
//! with eigenvalues `w^{s_i}` is the character sum
//!
//! ```text
//! P = (1/|M|) sum_{u in M} w^{-l_s(u)} T_u
//! ```
//!
//! over the generated submodule `M`, where `l_s` is the outcome-induced
//! linear form. The minus sign makes the single-operator case agree with
//! the eigenvalue convention `T_{a_i} P = w^{s_i} P`; the whole suite is
//! pinned to that convention by tests.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::dense::{DenseOperator, DEFAULT_SIZE_CAP};
use crate::error::{Error, Result};
use crate::phase_space::{Modulus, OutcomeForm, PhasePoint, Submodule};
use crate::weyl::{root_of_unity, WeylOperator};

/// Density-operator validation tolerance used by measurement statistics.
pub const STATE_TOL: f64 = 1e-8;

/// All outcome tuples in `Z_d^arity`, lexicographic.
pub fn outcome_tuples(d: u64, arity: usize) -> Vec<Vec<u64>> {
    let mut all = vec![vec![0u64; arity]];
    for slot in 0..arity {
        let mut next = Vec::with_capacity(all.len() * d as usize);
        for t in &all {
            for v in 0..d {
                let mut t2 = t.clone();
                t2[slot] = v;
                next.push(t2);
            }
        }
        all = next;
    }
    all
}

/// An ordered tuple of pairwise commuting Weyl operators, named by their
/// phase points.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Context {
    modulus: Modulus,
    generators: Vec<PhasePoint>,
}

impl Context {
    /// Fails with [`Error::NotIsotropic`] when two generators do not
    /// commute.
    pub fn new(modulus: Modulus, generators: Vec<PhasePoint>) -> Result<Self> {
        for (i, a) in generators.iter().enumerate() {
            for (jo, b) in generators[i + 1..].iter().enumerate() {
                let product = a.symplectic(b)?;
                if product != 0 {
                    return Err(Error::NotIsotropic {
                        i,
                        j: i + 1 + jo,
                        product,
                    });
                }
            }
        }
        Ok(Self { modulus, generators })
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn generators(&self) -> &[PhasePoint] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// The submodule generated by the context.
    pub fn module(&self) -> Submodule {
        Submodule::span(self.modulus, &self.generators).expect("generators share the modulus")
    }

    /// Canonical form for comparing contexts that generate the same
    /// measurement family: the sorted enumeration of the generated
    /// submodule.
    pub fn normal_form(&self) -> Vec<PhasePoint> {
        self.module().elements().to_vec()
    }

    /// Outcome tuples `s` for which the induced linear form is well
    /// defined; exactly these have nonzero projectors.
    pub fn consistent_outcomes(&self) -> Vec<Vec<u64>> {
        outcome_tuples(self.modulus.d(), self.generators.len())
            .into_iter()
            .filter(|s| OutcomeForm::new(self.modulus, &self.generators, s).is_ok())
            .collect()
    }
}

/// Strict projector: inconsistent outcomes are an error.
pub fn projector(context: &Context, outcomes: &[u64]) -> Result<DenseOperator> {
    projector_with_cap(context, outcomes, DEFAULT_SIZE_CAP, false)
}

/// Lenient projector: inconsistent outcomes give the zero operator, which
/// is the correct probability-zero statement for composite `d`.
pub fn projector_lenient(context: &Context, outcomes: &[u64]) -> Result<DenseOperator> {
    projector_with_cap(context, outcomes, DEFAULT_SIZE_CAP, true)
}

pub fn projector_with_cap(
    context: &Context,
    outcomes: &[u64],
    cap: usize,
    lenient: bool,
) -> Result<DenseOperator> {
    let m = context.modulus();
    let form = match OutcomeForm::new(m, context.generators(), outcomes) {
        Ok(form) => form,
        Err(err @ Error::InconsistentOutcome { .. }) => {
            if lenient {
                crate::dense::checked_dim(m, cap)?;
                return Ok(DenseOperator::zero(m));
            }
            return Err(err);
        }
        Err(err) => return Err(err),
    };
    crate::dense::checked_dim(m, cap)?;
    let module = form.base();
    let mut acc = DenseOperator::zero(m);
    for u in module.elements() {
        let coeff = root_of_unity(m.d(), m.neg(form.apply(u).expect("element of base")));
        let term = WeylOperator::from_point(u.clone()).matrix_with_cap(cap)?;
        acc.add_assign_scaled(&term, coeff);
    }
    Ok(acc.scale(Complex64::new(1.0 / module.len() as f64, 0.0)))
}

/// Outcome distribution of measuring a context on a state: probability
/// `Tr(P_s rho)` for every consistent outcome tuple.
pub fn measure_distribution(
    context: &Context,
    rho: &DenseOperator,
) -> Result<BTreeMap<Vec<u64>, f64>> {
    rho.validate_density(STATE_TOL)?;
    let mut out = BTreeMap::new();
    for s in context.consistent_outcomes() {
        let p = projector(context, &s)?;
        out.insert(s, p.product_trace(rho)?.re);
    }
    Ok(out)
}

/// A projective measurement: a family of orthogonal projectors summing to
/// the identity, indexed by outcome labels.
#[derive(Debug, Clone)]
pub struct ProjectiveMeasurement {
    modulus: Modulus,
    outcomes: Vec<Vec<u64>>,
    projectors: Vec<DenseOperator>,
}

impl ProjectiveMeasurement {
    pub fn new(modulus: Modulus, mut parts: Vec<(Vec<u64>, DenseOperator)>) -> Result<Self> {
        parts.sort_by(|a, b| a.0.cmp(&b.0));
        for pair in parts.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(Error::ImplementationInvalid {
                    reason: format!("duplicate outcome label {:?}", pair[0].0),
                });
            }
        }
        let dim = modulus.hilbert_dim();
        for (_, p) in &parts {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.dim(),
                });
            }
        }
        let (outcomes, projectors) = parts.into_iter().unzip();
        Ok(Self {
            modulus,
            outcomes,
            projectors,
        })
    }

    /// The fine-grained measurement of a context: one projector per
    /// consistent outcome tuple.
    pub fn fine_grained(context: &Context) -> Result<Self> {
        let mut parts = Vec::new();
        for s in context.consistent_outcomes() {
            parts.push((s.clone(), projector(context, &s)?));
        }
        Self::new(context.modulus(), parts)
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn outcomes(&self) -> &[Vec<u64>] {
        &self.outcomes
    }

    pub fn projectors(&self) -> &[DenseOperator] {
        &self.projectors
    }

    pub fn projector_for(&self, label: &[u64]) -> Option<&DenseOperator> {
        self.outcomes
            .binary_search_by(|o| o.as_slice().cmp(label))
            .ok()
            .map(|i| &self.projectors[i])
    }

    /// Check Hermiticity, idempotence, pairwise orthogonality and
    /// completeness within `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let mut sum = DenseOperator::zero(self.modulus);
        for (label, p) in self.outcomes.iter().zip(&self.projectors) {
            if !p.is_hermitian(tol) {
                return Err(Error::ImplementationInvalid {
                    reason: format!("projector {label:?} is not Hermitian"),
                });
            }
            let idem = p.mul(p)?.max_abs_diff(p);
            if idem > tol {
                return Err(Error::ImplementationInvalid {
                    reason: format!("projector {label:?} is not idempotent ({idem:.3e})"),
                });
            }
            sum.add_assign_scaled(p, Complex64::new(1.0, 0.0));
        }
        for (i, p) in self.projectors.iter().enumerate() {
            for (j, q) in self.projectors.iter().enumerate().skip(i + 1) {
                let cross = p.mul(q)?.max_abs_entry();
                if cross > tol {
                    return Err(Error::ImplementationInvalid {
                        reason: format!(
                            "projectors {:?} and {:?} are not orthogonal ({cross:.3e})",
                            self.outcomes[i], self.outcomes[j]
                        ),
                    });
                }
            }
        }
        let completeness = sum.max_abs_diff(&DenseOperator::identity(self.modulus));
        if completeness > tol {
            return Err(Error::ImplementationInvalid {
                reason: format!("projectors do not sum to identity ({completeness:.3e})"),
            });
        }
        Ok(())
    }
}

/// Label bijection between two measurements with entrywise-equal
/// projectors.
pub type LabelBijection = Vec<(Vec<u64>, Vec<u64>)>;

/// Decide whether two measurements are the same family of projectors up to
/// a relabeling; on success returns the bijection as `(label1, label2)`
/// pairs.
pub fn same_measurement(
    m1: &ProjectiveMeasurement,
    m2: &ProjectiveMeasurement,
    tol: f64,
) -> Result<Option<LabelBijection>> {
    if m1.modulus() != m2.modulus() {
        return Err(Error::ModulusMismatch {
            d1: m1.modulus().d(),
            n1: m1.modulus().n(),
            d2: m2.modulus().d(),
            n2: m2.modulus().n(),
        });
    }
    if m1.outcomes.len() != m2.outcomes.len() {
        return Ok(None);
    }
    let mut used = vec![false; m2.outcomes.len()];
    let mut pairs = Vec::with_capacity(m1.outcomes.len());
    for (label1, p1) in m1.outcomes.iter().zip(&m1.projectors) {
        let mut matched = None;
        for (j, p2) in m2.projectors.iter().enumerate() {
            if !used[j] && p1.max_abs_diff(p2) <= tol {
                matched = Some(j);
                break;
            }
        }
        match matched {
            Some(j) => {
                used[j] = true;
                pairs.push((label1.clone(), m2.outcomes[j].clone()));
            }
            None => return Ok(None),
        }
    }
    Ok(Some(pairs))
}

/// A total map from arity-length outcome tuples onto a declared label set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Postprocess {
    d: u64,
    arity: usize,
    outputs: Vec<Vec<u64>>,
    table: Vec<Vec<u64>>,
}

impl Postprocess {
    /// Build from a closure; the label set is the image, so the map is
    /// surjective by construction.
    pub fn from_fn(d: u64, arity: usize, f: impl Fn(&[u64]) -> Vec<u64>) -> Self {
        let inputs = outcome_tuples(d, arity);
        let table: Vec<Vec<u64>> = inputs.iter().map(|t| f(t)).collect();
        let mut outputs = table.clone();
        outputs.sort();
        outputs.dedup();
        Self {
            d,
            arity,
            outputs,
            table,
        }
    }

    /// Build from a closure with a declared label set; fails when the
    /// image does not equal the declared labels.
    pub fn with_declared_outputs(
        d: u64,
        arity: usize,
        declared: Vec<Vec<u64>>,
        f: impl Fn(&[u64]) -> Vec<u64>,
    ) -> Result<Self> {
        let built = Self::from_fn(d, arity, f);
        let mut declared_sorted = declared;
        declared_sorted.sort();
        declared_sorted.dedup();
        if built.outputs != declared_sorted {
            return Err(Error::ImplementationInvalid {
                reason: format!(
                    "postprocessing map is not surjective onto the declared labels: image {:?} vs declared {:?}",
                    built.outputs, declared_sorted
                ),
            });
        }
        Ok(built)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn outputs(&self) -> &[Vec<u64>] {
        &self.outputs
    }

    pub fn apply(&self, t: &[u64]) -> &[u64] {
        let mut rank = 0usize;
        for &v in t {
            rank = rank * self.d as usize + (v % self.d) as usize;
        }
        &self.table[rank]
    }

    pub fn preimage(&self, label: &[u64]) -> Vec<Vec<u64>> {
        outcome_tuples(self.d, self.arity)
            .into_iter()
            .filter(|t| self.apply(t) == label)
            .collect()
    }
}

/// A context plus a surjective postprocessing map, realizing a projective
/// measurement by coarse-graining.
#[derive(Debug, Clone)]
pub struct Implementation {
    context: Context,
    postprocess: Postprocess,
}

impl Implementation {
    pub fn new(context: Context, postprocess: Postprocess) -> Result<Self> {
        if postprocess.d != context.modulus().d() || postprocess.arity != context.len() {
            return Err(Error::ImplementationInvalid {
                reason: format!(
                    "postprocessing map over Z_{}^{} does not match a context of {} operators mod {}",
                    postprocess.d,
                    postprocess.arity,
                    context.len(),
                    context.modulus().d()
                ),
            });
        }
        Ok(Self {
            context,
            postprocess,
        })
    }

    pub fn context(&self) -> &Context {
        &self.context
    }

    pub fn postprocess(&self) -> &Postprocess {
        &self.postprocess
    }

    /// The realized measurement: the projector at label `s` is the sum of
    /// the fine-grained projectors over the preimage of `s`. Inconsistent
    /// tuples contribute the zero operator.
    pub fn coarse_grain(&self) -> Result<ProjectiveMeasurement> {
        let m = self.context.modulus();
        let mut parts = Vec::new();
        for label in self.postprocess.outputs() {
            let mut acc = DenseOperator::zero(m);
            for t in self.postprocess.preimage(label) {
                let p = projector_lenient(&self.context, &t)?;
                acc.add_assign_scaled(&p, Complex64::new(1.0, 0.0));
            }
            parts.push((label.clone(), acc));
        }
        ProjectiveMeasurement::new(m, parts)
    }
}
