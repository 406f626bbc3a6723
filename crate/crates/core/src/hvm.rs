//! Value assignments, deterministic hidden-variable models, the
//! constructive equivalence with Wigner non-negativity, and the
//! operational non-contextuality audit.
//!
//! A value assignment is a map `V -> Z_d` (exponent form) that is additive
//! on commuting pairs; for `n >= 2` every such map is a character
//! `u -> [u, w]` of phase space. A non-negative Wigner function is exactly
//! a probability distribution over the characters, and the two directions
//! of that correspondence are [`model_from_wigner`] and
//! [`wigner_from_model`]. From a model, [`build_deterministic_hvm`]
//! produces sharp per-context outcomes whose statistics reproduce the
//! quantum Born rule, and [`audit_noncontextuality`] checks the
//! operational notion: conditional outcome probabilities may depend only
//! on the realized projector, never on which context implements it.
//!
//! Everything here stores phases as exponents in `Z_d`; complex numbers
//! appear only when predictions are compared against traces.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dense::DenseOperator;
use crate::error::{Error, Result};
use crate::json;
use crate::measurement::{same_measurement, Context, Implementation, ProjectiveMeasurement};
use crate::phase_space::{is_character, Modulus, OutcomeForm, PhasePoint};
use crate::weyl::{root_of_unity, WeylOperator};
use crate::wigner::{WignerFunction, WignerKind, NEGATIVITY_EPSILON};

/// Above this many candidate pairs, additivity is checked on a seeded
/// pseudo-random sample instead of exhaustively.
const EXHAUSTIVE_PAIR_LIMIT: usize = 1 << 20;

/// A value assignment in exponent form: `values[u]` is the exponent of the
/// eigenvalue assigned to the Weyl operator at `u`, additive on commuting
/// pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueAssignment {
    modulus: Modulus,
    values: Vec<u64>,
}

impl ValueAssignment {
    /// The character `u -> [u, w]`.
    pub fn from_character_point(w: &PhasePoint) -> Self {
        let m = w.modulus();
        let values = m
            .points()
            .map(|u| u.symplectic(w).expect("same modulus"))
            .collect();
        Self { modulus: m, values }
    }

    /// Extend values on the canonical basis `e_1..e_n, f_1..f_n` to the
    /// unique character with those basis values: the first `n` entries are
    /// the values on the `e_i`, the last `n` on the `f_i`.
    pub fn from_basis_values(modulus: Modulus, basis_values: &[u64]) -> Result<Self> {
        let n = modulus.n();
        if basis_values.len() != 2 * n {
            return Err(Error::DimensionMismatch {
                expected: 2 * n,
                got: basis_values.len(),
            });
        }
        // [e_i, w] = w_x[i] and [f_i, w] = -w_z[i] pin the character point.
        let wx: Vec<u64> = basis_values[..n].iter().map(|&v| v % modulus.d()).collect();
        let wz: Vec<u64> = basis_values[n..].iter().map(|&v| modulus.neg(v)).collect();
        let w = PhasePoint::new(modulus, wz, wx)?;
        Ok(Self::from_character_point(&w))
    }

    fn from_table_unchecked(modulus: Modulus, values: Vec<u64>) -> Self {
        Self { modulus, values }
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn value(&self, u: &PhasePoint) -> u64 {
        self.values[u.index()]
    }

    /// The point `w` with `value(u) = [u, w]` everywhere, when the
    /// assignment is a character. For `n >= 2` this always succeeds.
    pub fn character_point(&self) -> Option<PhasePoint> {
        is_character(self.modulus, &self.values).expect("table has the right size")
    }
}

/// Outcome of checking a candidate table for isotropic additivity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AssignmentVerdict {
    Valid(ValueAssignment),
    /// A commuting pair with `candidate(u+v) != candidate(u) + candidate(v)`.
    Violation { u: PhasePoint, v: PhasePoint },
}

/// Check a full table `V -> Z_d` for additivity on commuting pairs:
/// exhaustively when the pair count is small, on a seeded sample above
/// [`EXHAUSTIVE_PAIR_LIMIT`]. For `n >= 2` an accepted table is asserted
/// to be a character (is equal to the character reconstructed from its
/// basis values); a non-character caught this way is hunted down to a
/// concrete violating pair.
pub fn verify_assignment(modulus: Modulus, table: &[u64]) -> Result<AssignmentVerdict> {
    let count = modulus.point_count();
    if table.len() != count {
        return Err(Error::DimensionMismatch {
            expected: count,
            got: table.len(),
        });
    }
    let d = modulus.d();
    let value = |i: usize| table[i] % d;

    let violated = |iu: usize, iv: usize| -> Result<Option<(PhasePoint, PhasePoint)>> {
        let u = PhasePoint::from_index(modulus, iu);
        let v = PhasePoint::from_index(modulus, iv);
        if u.symplectic(&v)? != 0 {
            return Ok(None);
        }
        let sum = u.add(&v)?;
        if value(sum.index()) != modulus.add(value(iu), value(iv)) {
            return Ok(Some((u, v)));
        }
        Ok(None)
    };

    let exhaustive = count.saturating_mul(count) <= EXHAUSTIVE_PAIR_LIMIT;
    if exhaustive {
        for iu in 0..count {
            for iv in 0..count {
                if let Some((u, v)) = violated(iu, iv)? {
                    return Ok(AssignmentVerdict::Violation { u, v });
                }
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_a551_6e);
        for _ in 0..EXHAUSTIVE_PAIR_LIMIT {
            let iu = rng.gen_range(0..count);
            let iv = rng.gen_range(0..count);
            if let Some((u, v)) = violated(iu, iv)? {
                return Ok(AssignmentVerdict::Violation { u, v });
            }
        }
    }

    let normalized: Vec<u64> = table.iter().map(|&v| v % d).collect();
    if modulus.n() >= 2 && is_character(modulus, &normalized)?.is_none() {
        if exhaustive {
            // Additivity held on every commuting pair, so by the character
            // lemma (n >= 2) the table must be a character.
            unreachable!("exhaustively additive value assignment that is not a character");
        }
        // The sample missed a violation but the character reconstruction
        // proves one exists; find the first in canonical order.
        for iu in 0..count {
            for iv in 0..count {
                if let Some((u, v)) = violated(iu, iv)? {
                    return Ok(AssignmentVerdict::Violation { u, v });
                }
            }
        }
        unreachable!("non-character table with no violating commuting pair");
    }

    Ok(AssignmentVerdict::Valid(ValueAssignment::from_table_unchecked(
        modulus, normalized,
    )))
}

/// A finite set of distinct value assignments with a probability
/// distribution; the phase-space form of a non-contextual hidden-variable
/// model.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueAssignmentModel {
    modulus: Modulus,
    states: Vec<ValueAssignment>,
    distribution: Vec<f64>,
}

impl ValueAssignmentModel {
    pub fn new(states: Vec<ValueAssignment>, distribution: Vec<f64>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::ModelInvalid {
                reason: "a model needs at least one state".into(),
            });
        }
        if states.len() != distribution.len() {
            return Err(Error::DimensionMismatch {
                expected: states.len(),
                got: distribution.len(),
            });
        }
        let modulus = states[0].modulus();
        for s in &states {
            if s.modulus() != modulus {
                return Err(Error::ModulusMismatch {
                    d1: modulus.d(),
                    n1: modulus.n(),
                    d2: s.modulus().d(),
                    n2: s.modulus().n(),
                });
            }
        }
        let mut sorted: Vec<&[u64]> = states.iter().map(|s| s.values()).collect();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::ModelInvalid {
                reason: "duplicate value assignments".into(),
            });
        }
        let mut total = 0.0;
        for &q in &distribution {
            if !(q >= 0.0) {
                return Err(Error::ModelInvalid {
                    reason: format!("negative probability {q}"),
                });
            }
            total += q;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::ModelInvalid {
                reason: format!("distribution sums to {total}, not 1"),
            });
        }
        Ok(Self {
            modulus,
            states,
            distribution,
        })
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn states(&self) -> &[ValueAssignment] {
        &self.states
    }

    pub fn distribution(&self) -> &[f64] {
        &self.distribution
    }

    /// Largest deviation, over all phase points, between the model average
    /// `sum_nu w^{lambda_nu(u)} q(nu)` and the trace `Tr(T_u rho)`.
    pub fn expectation_deviation(&self, rho: &DenseOperator) -> Result<f64> {
        let m = self.modulus;
        if rho.modulus() != m {
            return Err(Error::ModulusMismatch {
                d1: m.d(),
                n1: m.n(),
                d2: rho.modulus().d(),
                n2: rho.modulus().n(),
            });
        }
        let mut worst = 0.0f64;
        for u in m.points() {
            let mut avg = Complex64::new(0.0, 0.0);
            for (state, &q) in self.states.iter().zip(&self.distribution) {
                avg += root_of_unity(m.d(), state.value(&u)) * q;
            }
            let direct = WeylOperator::from_point(u).trace_against(rho)?;
            worst = worst.max((avg - direct).norm());
        }
        Ok(worst)
    }
}

/// The constructive direction "non-negative Wigner function gives a
/// model": one state per phase point `u`, carrying the character
/// `a -> [a, u]`, weighted by `W(u)`.
///
/// Values in `(-eps, 0)` are treated as numerical zeros and clamped; a
/// value below `-eps` aborts with [`Error::Negativity`] carrying the most
/// negative point as a contextuality witness.
pub fn model_from_wigner(w: &WignerFunction) -> Result<ValueAssignmentModel> {
    model_from_wigner_with_epsilon(w, NEGATIVITY_EPSILON)
}

pub fn model_from_wigner_with_epsilon(
    w: &WignerFunction,
    epsilon: f64,
) -> Result<ValueAssignmentModel> {
    if w.kind() != WignerKind::State {
        return Err(Error::StateValidation {
            reason: "model extraction needs a state-kind table".into(),
        });
    }
    let m = w.modulus();
    let mut min_value = f64::INFINITY;
    let mut min_index = 0usize;
    for (i, &v) in w.values().iter().enumerate() {
        if v < min_value {
            min_value = v;
            min_index = i;
        }
    }
    if min_value < -epsilon {
        return Err(Error::Negativity {
            point: PhasePoint::from_index(m, min_index).flat(),
            value: min_value,
        });
    }
    let mut clamped: Vec<f64> = w.values().to_vec();
    let mut clamp_happened = false;
    for v in &mut clamped {
        if *v < 0.0 {
            *v = 0.0;
            clamp_happened = true;
        }
    }
    let total: f64 = clamped.iter().sum();
    if clamp_happened || (total - 1.0).abs() > 1e-12 {
        for v in &mut clamped {
            *v /= total;
        }
    }
    let states: Vec<ValueAssignment> = m
        .points()
        .map(|u| ValueAssignment::from_character_point(&u))
        .collect();
    ValueAssignmentModel::new(states, clamped)
}

/// The inverse direction: a model whose states are characters determines
/// the Wigner function `W(u) = q(state with character point u)`, padding
/// the missing characters with probability zero.
pub fn wigner_from_model(model: &ValueAssignmentModel) -> Result<WignerFunction> {
    let m = model.modulus();
    let mut values = vec![0.0f64; m.point_count()];
    for (idx, (state, &q)) in model
        .states()
        .iter()
        .zip(model.distribution())
        .enumerate()
    {
        let w = state.character_point().ok_or_else(|| Error::ModelInvalid {
            reason: format!(
                "state {idx} is not a character of phase space; for n >= 2 every \
                 value assignment is one, and n = 1 models outside that regime are \
                 not invertible here"
            ),
        })?;
        values[w.index()] = q;
    }
    WignerFunction::new(m, WignerKind::State, values)
}

/// Sharp conditional probability of outcome `s` when a single hidden
/// state with assignment `lambda` answers the context: the character-sum
/// average `(1/|M|) sum_u w^{lambda(u) - l_s(u)}`, which is exactly 1 when
/// `lambda(a_i) = s_i` for every generator and exactly 0 otherwise.
pub fn conditional_from_assignment(
    assignment: &ValueAssignment,
    context: &Context,
    outcomes: &[u64],
) -> Result<f64> {
    let m = context.modulus();
    if assignment.modulus() != m {
        return Err(Error::ModulusMismatch {
            d1: assignment.modulus().d(),
            n1: assignment.modulus().n(),
            d2: m.d(),
            n2: m.n(),
        });
    }
    let form = OutcomeForm::new(m, context.generators(), outcomes)?;
    // lambda - l_s is additive on the isotropic module, so the character
    // sum is |M| exactly when it vanishes identically and 0 otherwise.
    let all_zero = form.base().elements().iter().all(|u| {
        m.sub(assignment.value(u), form.apply(u).expect("element of base")) == 0
    });
    Ok(if all_zero { 1.0 } else { 0.0 })
}

/// How a hidden state answers contexts: derived from a value assignment,
/// or an explicit per-context table (used to express contextual
/// counterexamples).
#[derive(Debug, Clone)]
pub enum OutcomeRule {
    Assignment(ValueAssignment),
    Table(BTreeMap<Context, Vec<u64>>),
}

/// A deterministic hidden-variable model: per state, a fixed outcome tuple
/// for every context.
#[derive(Debug, Clone)]
pub struct DeterministicHvm {
    modulus: Modulus,
    distribution: Vec<f64>,
    rules: Vec<OutcomeRule>,
}

impl DeterministicHvm {
    pub fn new(modulus: Modulus, rules: Vec<OutcomeRule>, distribution: Vec<f64>) -> Result<Self> {
        if rules.is_empty() || rules.len() != distribution.len() {
            return Err(Error::ModelInvalid {
                reason: "rules and distribution must be non-empty and of equal length".into(),
            });
        }
        let mut total = 0.0;
        for &q in &distribution {
            if !(q >= 0.0) {
                return Err(Error::ModelInvalid {
                    reason: format!("negative probability {q}"),
                });
            }
            total += q;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::ModelInvalid {
                reason: format!("distribution sums to {total}, not 1"),
            });
        }
        Ok(Self {
            modulus,
            distribution,
            rules,
        })
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn distribution(&self) -> &[f64] {
        &self.distribution
    }

    /// The outcome tuple state `state_index` assigns to a context.
    pub fn alpha(&self, state_index: usize, context: &Context) -> Result<Vec<u64>> {
        match &self.rules[state_index] {
            OutcomeRule::Assignment(lambda) => Ok(context
                .generators()
                .iter()
                .map(|a| lambda.value(a))
                .collect()),
            OutcomeRule::Table(table) => table.get(context).cloned().ok_or_else(|| {
                Error::ModelInvalid {
                    reason: format!(
                        "state {state_index} has no recorded outcome for context {:?}",
                        context.generators()
                    ),
                }
            }),
        }
    }

    /// `p_C(s | state)`, a delta function.
    pub fn conditional_probability(
        &self,
        state_index: usize,
        context: &Context,
        outcomes: &[u64],
    ) -> Result<f64> {
        let alpha = self.alpha(state_index, context)?;
        Ok(if alpha == outcomes { 1.0 } else { 0.0 })
    }

    /// The model's predicted probability of outcome `s` for a context.
    pub fn prediction(&self, context: &Context, outcomes: &[u64]) -> Result<f64> {
        let mut acc = 0.0;
        for (i, &q) in self.distribution.iter().enumerate() {
            acc += q * self.conditional_probability(i, context, outcomes)?;
        }
        Ok(acc)
    }
}

/// Sharp outcomes from a value-assignment model: state `nu` answers
/// context `{T_a1, ..., T_am}` with `(lambda_nu(a_1), ..., lambda_nu(a_m))`.
pub fn build_deterministic_hvm(model: &ValueAssignmentModel) -> Result<DeterministicHvm> {
    let rules = model
        .states()
        .iter()
        .map(|s| OutcomeRule::Assignment(s.clone()))
        .collect();
    DeterministicHvm::new(model.modulus(), rules, model.distribution().to_vec())
}

/// First operational-noncontextuality discrepancy found, if any: a hidden
/// state and a target outcome whose conditional probability depends on the
/// implementation.
#[derive(Debug, Clone)]
pub struct AuditWitness {
    pub state_index: usize,
    pub target_label: Vec<u64>,
    pub first_impl: usize,
    pub second_impl: usize,
    pub first_probability: f64,
    pub second_probability: f64,
}

#[derive(Debug, Clone)]
pub struct AuditReport {
    pub pass: bool,
    pub states_checked: usize,
    pub witness: Option<AuditWitness>,
}

/// Check that conditional probabilities depend only on the realized
/// projector: every implementation must coarse-grain to the target
/// measurement, and for every hidden state and every target label the
/// implementations must agree on `p(sigma^{-1}(label) | state)`.
///
/// States and labels are scanned in canonical order, so the first witness
/// is deterministic.
pub fn audit_noncontextuality(
    hvm: &DeterministicHvm,
    target: &ProjectiveMeasurement,
    implementations: &[Implementation],
    tol: f64,
) -> Result<AuditReport> {
    if implementations.len() < 2 {
        return Err(Error::ImplementationInvalid {
            reason: "an audit needs at least two implementations".into(),
        });
    }
    // Map each implementation's coarse labels onto the target's labels.
    let mut label_maps: Vec<BTreeMap<Vec<u64>, Vec<u64>>> = Vec::new();
    for (k, imp) in implementations.iter().enumerate() {
        let coarse = imp.coarse_grain()?;
        let bijection = same_measurement(&coarse, target, tol)?.ok_or_else(|| {
            Error::ImplementationInvalid {
                reason: format!("implementation {k} does not realize the target measurement"),
            }
        })?;
        label_maps.push(bijection.into_iter().collect());
    }

    for state_index in 0..hvm.len() {
        // Deterministic states map each implementation to a single target
        // label; disagreement at any label is the witness.
        let mut mapped: Vec<Vec<u64>> = Vec::with_capacity(implementations.len());
        for (imp, map) in implementations.iter().zip(&label_maps) {
            let alpha = hvm.alpha(state_index, imp.context())?;
            let coarse_label = imp.postprocess().apply(&alpha).to_vec();
            let target_label = map.get(&coarse_label).ok_or_else(|| {
                Error::ImplementationInvalid {
                    reason: format!("coarse label {coarse_label:?} missing from the bijection"),
                }
            })?;
            mapped.push(target_label.clone());
        }
        if mapped.iter().any(|l| l != &mapped[0]) {
            for label in target.outcomes() {
                let probs: Vec<f64> = mapped
                    .iter()
                    .map(|l| if l == label { 1.0 } else { 0.0 })
                    .collect();
                if let Some(j) = probs.iter().position(|&p| p != probs[0]) {
                    return Ok(AuditReport {
                        pass: false,
                        states_checked: state_index + 1,
                        witness: Some(AuditWitness {
                            state_index,
                            target_label: label.clone(),
                            first_impl: 0,
                            second_impl: j,
                            first_probability: probs[0],
                            second_probability: probs[j],
                        }),
                    });
                }
            }
        }
    }
    Ok(AuditReport {
        pass: true,
        states_checked: hvm.len(),
        witness: None,
    })
}

/// Outcome of the single-operator additivity check of a deterministic
/// HVM.
#[derive(Debug, Clone)]
pub enum AlphaAdditivity {
    /// Additivity holds; the per-point outcomes form value assignments and
    /// the model is recovered.
    Pass { recovered: ValueAssignmentModel },
    Violation {
        state_index: usize,
        u: PhasePoint,
        v: PhasePoint,
    },
}

/// Verify `alpha(u+v) = alpha(u) + alpha(v)` on commuting pairs for every
/// hidden state, reading `alpha(u)` as the answer to the single-operator
/// context `{T_u}`. On success the per-point tables are value assignments
/// and the recovered model is returned.
pub fn additivity_of_alpha(hvm: &DeterministicHvm) -> Result<AlphaAdditivity> {
    let m = hvm.modulus();
    let mut assignments = Vec::with_capacity(hvm.len());
    for state_index in 0..hvm.len() {
        let mut table = Vec::with_capacity(m.point_count());
        for u in m.points() {
            let ctx = Context::new(m, vec![u])?;
            let alpha = hvm.alpha(state_index, &ctx)?;
            table.push(alpha[0]);
        }
        match verify_assignment(m, &table)? {
            AssignmentVerdict::Valid(assignment) => assignments.push(assignment),
            AssignmentVerdict::Violation { u, v } => {
                return Ok(AlphaAdditivity::Violation { state_index, u, v })
            }
        }
    }
    let recovered = ValueAssignmentModel::new(assignments, hvm.distribution().to_vec())?;
    Ok(AlphaAdditivity::Pass { recovered })
}

/// Serialize a model of characters as a certificate: the support states
/// with their character points and probabilities, plus a caller-supplied
/// hash of the state the model was extracted from. Byte-identical across
/// reruns.
pub fn certificate_json(model: &ValueAssignmentModel, bound_state_hash: &str) -> Result<String> {
    let m = model.modulus();
    let mut support: Vec<(usize, f64)> = Vec::new();
    for (idx, (state, &q)) in model.states().iter().zip(model.distribution()).enumerate() {
        let w = state.character_point().ok_or_else(|| Error::ModelInvalid {
            reason: format!("state {idx} is not a character"),
        })?;
        if q > 0.0 {
            support.push((w.index(), q));
        }
    }
    support.sort_by_key(|&(i, _)| i);
    let states: Vec<String> = support
        .iter()
        .map(|&(i, q)| {
            format!(
                "{{\"character_point\":{},\"probability\":{}}}",
                json::uint_array(&PhasePoint::from_index(m, i).flat()),
                json::float17(q)
            )
        })
        .collect();
    Ok(format!(
        "{{\"d\":{},\"n\":{},\"states\":[{}],\"bound_state_hash\":\"{}\"}}\n",
        m.d(),
        m.n(),
        states.join(","),
        bound_state_hash
    ))
}

/// Random single-state deterministic HVM that is genuinely contextual:
/// per-point outcomes are drawn uniformly and redrawn until additivity
/// fails on the given commuting pair; multi-operator contexts are answered
/// componentwise from the per-point table.
pub fn random_contextual_hvm(
    modulus: Modulus,
    u: &PhasePoint,
    v: &PhasePoint,
    contexts: &[Context],
    rng: &mut impl Rng,
) -> Result<DeterministicHvm> {
    if u.symplectic(v)? != 0 {
        return Err(Error::NotIsotropic {
            i: 0,
            j: 1,
            product: u.symplectic(v)?,
        });
    }
    let d = modulus.d();
    let count = modulus.point_count();
    let sum = u.add(v)?;
    loop {
        let table: Vec<u64> = (0..count).map(|_| rng.gen_range(0..d)).collect();
        let lhs = table[sum.index()];
        let rhs = modulus.add(table[u.index()], table[v.index()]);
        if lhs == rhs {
            continue;
        }
        let mut entries: BTreeMap<Context, Vec<u64>> = BTreeMap::new();
        for p in modulus.points() {
            let value = table[p.index()];
            entries.insert(Context::new(modulus, vec![p])?, vec![value]);
        }
        for c in contexts {
            let answer: Vec<u64> = c.generators().iter().map(|g| table[g.index()]).collect();
            entries.insert(c.clone(), answer);
        }
        return DeterministicHvm::new(modulus, vec![OutcomeRule::Table(entries)], vec![1.0]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::DenseOperator;
    use crate::measurement::{measure_distribution, outcome_tuples, Postprocess};
    use crate::wigner::{negativity_report, wigner_of_state};

    fn m(d: u64, n: usize) -> Modulus {
        Modulus::new(d, n).unwrap()
    }

    fn pt(modulus: Modulus, z: &[u64], x: &[u64]) -> PhasePoint {
        PhasePoint::new(modulus, z.to_vec(), x.to_vec()).unwrap()
    }

    fn ket(modulus: Modulus, basis_state: usize) -> DenseOperator {
        let dim = modulus.hilbert_dim();
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[basis_state] = Complex64::new(1.0, 0.0);
        DenseOperator::from_pure_state(modulus, &amps).unwrap()
    }

    fn strange_state() -> DenseOperator {
        let md = m(3, 1);
        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        DenseOperator::from_pure_state(md, &[Complex64::new(0.0, 0.0), s, -s]).unwrap()
    }

    #[test]
    fn basis_extension_of_zero_is_the_zero_assignment() {
        let md = m(3, 2);
        let a = ValueAssignment::from_basis_values(md, &[0, 0, 0, 0]).unwrap();
        assert!(a.values().iter().all(|&v| v == 0));
        assert_eq!(a.character_point(), Some(PhasePoint::zero(md)));
    }

    #[test]
    fn basis_extension_recovers_every_character() {
        let md = m(3, 2);
        for w in md.points() {
            let full = ValueAssignment::from_character_point(&w);
            let mut basis_values = Vec::new();
            for i in 0..2 {
                basis_values.push(full.value(&md.basis_z(i)));
            }
            for i in 0..2 {
                basis_values.push(full.value(&md.basis_x(i)));
            }
            let rebuilt = ValueAssignment::from_basis_values(md, &basis_values).unwrap();
            assert_eq!(rebuilt, full);
        }
    }

    #[test]
    fn halving_identity_from_the_character_lemma_proof() {
        // lambda(u+v) = half(lambda(u+v+u'+v') + lambda(u+v-u'-v')) for
        // u = a e_i, v = b f_i, u' = b e_j, v' = a f_j, i != j.
        let md = m(3, 2);
        for w in md.points() {
            let lambda = ValueAssignment::from_character_point(&w);
            for (i, j) in [(0usize, 1usize), (1, 0)] {
                for a in 0..3u64 {
                    for b in 0..3u64 {
                        let u = md.basis_z(i).scale(a);
                        let v = md.basis_x(i).scale(b);
                        let up = md.basis_z(j).scale(b);
                        let vp = md.basis_x(j).scale(a);
                        let uv = u.add(&v).unwrap();
                        let plus = uv.add(&up).unwrap().add(&vp).unwrap();
                        let minus = uv.sub(&up).unwrap().sub(&vp).unwrap();
                        let rhs = md.half(md.add(lambda.value(&plus), lambda.value(&minus)));
                        assert_eq!(lambda.value(&uv), rhs);
                    }
                }
            }
        }
    }

    #[test]
    fn verify_accepts_characters_and_rejects_perturbations() {
        let md = m(3, 2);
        let w = pt(md, &[1, 0], &[2, 1]);
        let table: Vec<u64> = ValueAssignment::from_character_point(&w).values().to_vec();
        match verify_assignment(md, &table).unwrap() {
            AssignmentVerdict::Valid(a) => assert_eq!(a.character_point(), Some(w)),
            AssignmentVerdict::Violation { .. } => panic!("character rejected"),
        }

        let mut broken = table;
        broken[7] = md.add(broken[7], 1);
        match verify_assignment(md, &broken).unwrap() {
            AssignmentVerdict::Valid(_) => panic!("perturbed table accepted"),
            AssignmentVerdict::Violation { u, v } => {
                let sum = u.add(&v).unwrap();
                assert_eq!(u.symplectic(&v).unwrap(), 0);
                let value = |p: &PhasePoint| broken[p.index()];
                assert_ne!(value(&sum), md.add(value(&u), value(&v)));
            }
        }
    }

    /// A single-qudit table that is additive along every line of phase
    /// space but is not a character: at prime d the commuting pairs only
    /// tie together parallel points, so the four lines take independent
    /// values. The values 1, 1, 0 on (0,1), (1,0), (1,1) already clash
    /// with additivity across lines, which no commuting pair enforces.
    fn crooked_single_qudit_table(md: Modulus) -> Vec<u64> {
        let mut table = vec![0u64; 9];
        for (gen, val) in [
            (pt(md, &[0], &[1]), 1u64),
            (pt(md, &[1], &[0]), 1),
            (pt(md, &[1], &[1]), 0),
            (pt(md, &[1], &[2]), 0),
        ] {
            for k in 1..3u64 {
                table[gen.scale(k).index()] = md.mul(val, k);
            }
        }
        table
    }

    #[test]
    fn single_qudit_assignments_need_not_be_characters() {
        let md = m(3, 1);
        let table = crooked_single_qudit_table(md);
        match verify_assignment(md, &table).unwrap() {
            AssignmentVerdict::Valid(a) => assert_eq!(a.character_point(), None),
            AssignmentVerdict::Violation { .. } => panic!("valid n=1 assignment rejected"),
        }
    }

    #[test]
    fn model_from_mixed_state_is_uniform_over_characters() {
        let md = m(3, 1);
        let w = wigner_of_state(&DenseOperator::maximally_mixed(md)).unwrap();
        let model = model_from_wigner(&w).unwrap();
        assert_eq!(model.states().len(), 9);
        for &q in model.distribution() {
            assert!((q - 1.0 / 9.0).abs() < 1e-12);
        }
        assert!(model.expectation_deviation(&DenseOperator::maximally_mixed(md)).unwrap() < 1e-9);
    }

    #[test]
    fn model_from_ket_zero_is_supported_on_the_z_line() {
        let md = m(3, 1);
        let rho = ket(md, 0);
        let w = wigner_of_state(&rho).unwrap();
        let model = model_from_wigner(&w).unwrap();
        for (state, &q) in model.states().iter().zip(model.distribution()) {
            let point = state.character_point().unwrap();
            if point.x()[0] == 0 {
                assert!((q - 1.0 / 3.0).abs() < 1e-12, "{point:?}");
            } else {
                assert!(q.abs() < 1e-12, "{point:?}");
            }
        }
        assert!(model.expectation_deviation(&rho).unwrap() < 1e-9);
    }

    #[test]
    fn strange_state_extraction_fails_with_origin_witness() {
        let w = wigner_of_state(&strange_state()).unwrap();
        match model_from_wigner(&w) {
            Err(Error::Negativity { point, value }) => {
                assert_eq!(point, vec![0, 0]);
                assert!((value + 1.0 / 3.0).abs() < 1e-12);
            }
            other => panic!("expected a negativity witness, got {other:?}"),
        }
    }

    #[test]
    fn wigner_round_trips_through_the_model_exactly() {
        let md = m(3, 2);
        for rho in [
            DenseOperator::maximally_mixed(md),
            ket(md, 0),
            ket(md, 4),
        ] {
            let w = wigner_of_state(&rho).unwrap();
            let model = model_from_wigner(&w).unwrap();
            let back = wigner_from_model(&model).unwrap();
            assert_eq!(back.values(), model.distribution());
            let report = negativity_report(&w).unwrap();
            if report.min_value >= 0.0 && (w.sum() - 1.0).abs() <= 1e-12 {
                assert_eq!(back.values(), w.values());
            }
        }
    }

    #[test]
    fn single_state_models_place_delta_by_character_orientation() {
        let md = m(3, 2);
        let w = pt(md, &[1, 2], &[0, 1]);

        // The character a -> [a, w] sits at +w.
        let right = ValueAssignment::from_character_point(&w);
        let model = ValueAssignmentModel::new(vec![right], vec![1.0]).unwrap();
        let table = wigner_from_model(&model).unwrap();
        assert_eq!(table.value(&w), 1.0);

        // The character a -> [w, a] sits at -w.
        let left_table: Vec<u64> = md.points().map(|a| w.symplectic(&a).unwrap()).collect();
        let left = match verify_assignment(md, &left_table).unwrap() {
            AssignmentVerdict::Valid(a) => a,
            _ => panic!("a character must verify"),
        };
        let model = ValueAssignmentModel::new(vec![left], vec![1.0]).unwrap();
        let table = wigner_from_model(&model).unwrap();
        assert_eq!(table.value(&w.neg()), 1.0);
    }

    #[test]
    fn uniform_model_maps_to_uniform_wigner() {
        let md = m(3, 1);
        let states: Vec<ValueAssignment> = md
            .points()
            .map(|u| ValueAssignment::from_character_point(&u))
            .collect();
        let model = ValueAssignmentModel::new(states, vec![1.0 / 9.0; 9]).unwrap();
        let w = wigner_from_model(&model).unwrap();
        for &v in w.values() {
            assert!((v - 1.0 / 9.0).abs() < 1e-15);
        }
    }

    #[test]
    fn shuffled_models_recover_the_same_wigner_function() {
        let md = m(3, 2);
        let rho = ket(md, 3);
        let w = wigner_of_state(&rho).unwrap();
        let model = model_from_wigner(&w).unwrap();
        // Reverse the state list; the recovered table keys on character
        // points, so this relabeling must not matter.
        let states: Vec<ValueAssignment> = model.states().iter().rev().cloned().collect();
        let probs: Vec<f64> = model.distribution().iter().rev().copied().collect();
        let shuffled = ValueAssignmentModel::new(states, probs).unwrap();
        let recovered = wigner_from_model(&shuffled).unwrap();
        assert_eq!(recovered.values(), wigner_from_model(&model).unwrap().values());
    }

    #[test]
    fn duplicate_states_are_rejected() {
        let md = m(3, 1);
        let a = ValueAssignment::from_character_point(&PhasePoint::zero(md));
        let err = ValueAssignmentModel::new(vec![a.clone(), a], vec![0.5, 0.5]).unwrap_err();
        assert!(matches!(err, Error::ModelInvalid { .. }));
    }

    #[test]
    fn non_character_states_cannot_be_inverted() {
        let md = m(3, 1);
        let table = crooked_single_qudit_table(md);
        let assignment = match verify_assignment(md, &table).unwrap() {
            AssignmentVerdict::Valid(a) => a,
            _ => panic!(),
        };
        let model = ValueAssignmentModel::new(vec![assignment], vec![1.0]).unwrap();
        assert!(matches!(
            wigner_from_model(&model),
            Err(Error::ModelInvalid { .. })
        ));
    }

    #[test]
    fn conditional_probability_is_the_outcome_indicator() {
        let md = m(3, 1);
        let w = pt(md, &[2], &[1]);
        let lambda = ValueAssignment::from_character_point(&w);
        let u = pt(md, &[1], &[0]);
        let c = Context::new(md, vec![u.clone()]).unwrap();
        for s in 0..3u64 {
            let p = conditional_from_assignment(&lambda, &c, &[s]).unwrap();
            let expected = if lambda.value(&u) == s { 1.0 } else { 0.0 };
            assert_eq!(p, expected);
        }
    }

    #[test]
    fn conditional_factorizes_over_commuting_pairs() {
        let md = m(3, 2);
        let w = pt(md, &[0, 2], &[1, 1]);
        let lambda = ValueAssignment::from_character_point(&w);
        let u = pt(md, &[1, 0], &[0, 0]);
        let v = pt(md, &[0, 1], &[0, 0]);
        let pair = Context::new(md, vec![u.clone(), v.clone()]).unwrap();
        let cu = Context::new(md, vec![u]).unwrap();
        let cv = Context::new(md, vec![v]).unwrap();
        for s in outcome_tuples(3, 2) {
            let joint = conditional_from_assignment(&lambda, &pair, &s).unwrap();
            let left = conditional_from_assignment(&lambda, &cu, &[s[0]]).unwrap();
            let right = conditional_from_assignment(&lambda, &cv, &[s[1]]).unwrap();
            assert_eq!(joint, left * right);
        }
    }

    #[test]
    fn conditional_agrees_with_the_complex_character_sum() {
        let md = m(3, 1);
        let w = pt(md, &[1], &[1]);
        let lambda = ValueAssignment::from_character_point(&w);
        let u = pt(md, &[1], &[2]);
        let c = Context::new(md, vec![u.clone()]).unwrap();
        for s in 0..3u64 {
            let exact = conditional_from_assignment(&lambda, &c, &[s]).unwrap();
            let form = OutcomeForm::new(md, c.generators(), &[s]).unwrap();
            let mut acc = Complex64::new(0.0, 0.0);
            for e in form.base().elements() {
                let exp = md.sub(lambda.value(e), form.apply(e).unwrap());
                acc += root_of_unity(3, exp);
            }
            let numeric = acc.re / form.base().len() as f64;
            assert!((exact - numeric).abs() < 1e-12);
        }
    }

    #[test]
    fn conditional_is_independent_of_the_generating_set() {
        let md = m(3, 2);
        let u = pt(md, &[1, 0], &[0, 0]);
        let v = pt(md, &[0, 1], &[0, 0]);
        let sum = u.add(&v).unwrap();
        let c1 = Context::new(md, vec![u.clone(), v.clone()]).unwrap();
        let c2 = Context::new(md, vec![sum, v]).unwrap();
        assert_eq!(c1.normal_form(), c2.normal_form());
        for w in md.points() {
            let lambda = ValueAssignment::from_character_point(&w);
            for s in outcome_tuples(3, 2) {
                let p1 = conditional_from_assignment(&lambda, &c1, &s).unwrap();
                // Translate outcomes: (s_u, s_v) for c1 corresponds to
                // (s_u + s_v, s_v) for c2.
                let s2 = vec![md.add(s[0], s[1]), s[1]];
                let p2 = conditional_from_assignment(&lambda, &c2, &s2).unwrap();
                assert_eq!(p1, p2);
            }
        }
    }

    #[test]
    fn conditional_rejects_inconsistent_outcomes() {
        let md = m(9, 1);
        let lambda = ValueAssignment::from_character_point(&PhasePoint::zero(md));
        let c = Context::new(md, vec![pt(md, &[3], &[0])]).unwrap();
        assert!(matches!(
            conditional_from_assignment(&lambda, &c, &[1]),
            Err(Error::InconsistentOutcome { .. })
        ));
    }

    #[test]
    fn character_sum_collapse_behind_the_nonnegativity_proof() {
        // For every character lambda and point u the full phase-space sum
        // of w^{[u,v] + lambda(v)} is either 0 or |V|, checked exactly by
        // counting residues.
        let md = m(3, 1);
        for w in md.points() {
            let lambda = ValueAssignment::from_character_point(&w);
            for u in md.points() {
                let mut counts = [0usize; 3];
                for v in md.points() {
                    let exp = md.add(u.symplectic(&v).unwrap(), lambda.value(&v));
                    counts[exp as usize] += 1;
                }
                let uniform = counts.iter().all(|&c| c == counts[0]);
                let collapsed = counts[0] == md.point_count() && counts[1] == 0 && counts[2] == 0;
                assert!(
                    uniform || collapsed,
                    "sum neither vanishes nor collapses: {counts:?}"
                );
            }
        }
    }

    #[test]
    fn hvm_predictions_reproduce_born_probabilities() {
        let md = m(3, 1);
        let rho = ket(md, 0);
        let w = wigner_of_state(&rho).unwrap();
        let model = model_from_wigner(&w).unwrap();
        let hvm = build_deterministic_hvm(&model).unwrap();
        for gens in [vec![md.basis_z(0)], vec![md.basis_x(0)], vec![pt(md, &[1], &[1])]] {
            let c = Context::new(md, gens).unwrap();
            let quantum = measure_distribution(&c, &rho).unwrap();
            for (s, &p_quantum) in &quantum {
                let p_hvm = hvm.prediction(&c, s).unwrap();
                assert!(
                    (p_hvm - p_quantum).abs() < 1e-9,
                    "context {:?} outcome {s:?}: {p_hvm} vs {p_quantum}",
                    c.generators()
                );
            }
        }
    }

    #[test]
    fn mixed_model_gives_uniform_marginals_and_characters_are_deterministic() {
        let md = m(3, 1);
        let w = wigner_of_state(&DenseOperator::maximally_mixed(md)).unwrap();
        let model = model_from_wigner(&w).unwrap();
        let hvm = build_deterministic_hvm(&model).unwrap();
        let zc = Context::new(md, vec![md.basis_z(0)]).unwrap();
        for s in 0..3u64 {
            assert!((hvm.prediction(&zc, &[s]).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        }
        // Per state the outcome is sharp and equals the stored character
        // value on (1, 0).
        for (i, state) in model.states().iter().enumerate() {
            let alpha = hvm.alpha(i, &zc).unwrap();
            assert_eq!(alpha, vec![state.value(&md.basis_z(0))]);
        }
    }

    #[test]
    fn alpha_on_contexts_is_componentwise_single_operator_values() {
        let md = m(3, 2);
        let w = pt(md, &[1, 1], &[2, 0]);
        let model = ValueAssignmentModel::new(
            vec![ValueAssignment::from_character_point(&w)],
            vec![1.0],
        )
        .unwrap();
        let hvm = build_deterministic_hvm(&model).unwrap();
        let u = pt(md, &[1, 0], &[0, 0]);
        let v = pt(md, &[0, 2], &[0, 0]);
        let pair = Context::new(md, vec![u.clone(), v.clone()]).unwrap();
        let alpha = hvm.alpha(0, &pair).unwrap();
        let au = hvm.alpha(0, &Context::new(md, vec![u]).unwrap()).unwrap();
        let av = hvm.alpha(0, &Context::new(md, vec![v]).unwrap()).unwrap();
        assert_eq!(alpha, vec![au[0], av[0]]);
    }

    fn sum_implementation_pair(
        md: Modulus,
        u: &PhasePoint,
        v: &PhasePoint,
    ) -> (ProjectiveMeasurement, Vec<Implementation>) {
        let direct_ctx = Context::new(md, vec![u.add(v).unwrap()]).unwrap();
        let direct = Implementation::new(
            direct_ctx.clone(),
            Postprocess::from_fn(md.d(), 1, |t| t.to_vec()),
        )
        .unwrap();
        let d = md.d();
        let pair_ctx = Context::new(md, vec![u.clone(), v.clone()]).unwrap();
        let summed = Implementation::new(
            pair_ctx,
            Postprocess::from_fn(d, 2, move |t| vec![(t[0] + t[1]) % d]),
        )
        .unwrap();
        let target = direct.coarse_grain().unwrap();
        (target, vec![direct, summed])
    }

    #[test]
    fn audit_passes_for_model_built_hvms_on_the_sum_pair() {
        let md = m(3, 2);
        let rho = ket(md, 0);
        let model = model_from_wigner(&wigner_of_state(&rho).unwrap()).unwrap();
        let hvm = build_deterministic_hvm(&model).unwrap();
        let u = pt(md, &[1, 0], &[0, 0]);
        let v = pt(md, &[0, 1], &[0, 0]);
        let (target, impls) = sum_implementation_pair(md, &u, &v);
        let report = audit_noncontextuality(&hvm, &target, &impls, 1e-9).unwrap();
        assert!(report.pass, "witness: {:?}", report.witness);
        assert_eq!(report.states_checked, 81);
    }

    #[test]
    fn audit_fails_for_a_contextual_hvm_with_a_concrete_witness() {
        let md = m(3, 2);
        let u = pt(md, &[1, 0], &[0, 0]);
        let v = pt(md, &[0, 1], &[0, 0]);
        let (target, impls) = sum_implementation_pair(md, &u, &v);
        let contexts: Vec<Context> = impls.iter().map(|i| i.context().clone()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let hvm = random_contextual_hvm(md, &u, &v, &contexts, &mut rng).unwrap();
        let report = audit_noncontextuality(&hvm, &target, &impls, 1e-9).unwrap();
        assert!(!report.pass);
        let witness = report.witness.unwrap();
        assert_eq!(witness.state_index, 0);
        assert_ne!(witness.first_probability, witness.second_probability);
    }

    #[test]
    fn additivity_check_recovers_the_original_model() {
        let md = m(3, 1);
        let rho = ket(md, 1);
        let model = model_from_wigner(&wigner_of_state(&rho).unwrap()).unwrap();
        let hvm = build_deterministic_hvm(&model).unwrap();
        match additivity_of_alpha(&hvm).unwrap() {
            AlphaAdditivity::Pass { recovered } => assert_eq!(recovered, model),
            AlphaAdditivity::Violation { .. } => panic!("model-built HVM flagged as contextual"),
        }
    }

    #[test]
    fn additivity_check_catches_the_contextual_hvm() {
        let md = m(3, 2);
        let u = pt(md, &[1, 0], &[0, 0]);
        let v = pt(md, &[0, 1], &[0, 0]);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let hvm = random_contextual_hvm(md, &u, &v, &[], &mut rng).unwrap();
        match additivity_of_alpha(&hvm).unwrap() {
            AlphaAdditivity::Pass { .. } => panic!("contextual HVM passed additivity"),
            AlphaAdditivity::Violation { state_index, u, v } => {
                assert_eq!(state_index, 0);
                assert_eq!(u.symplectic(&v).unwrap(), 0);
            }
        }
    }

    #[test]
    fn alpha_scaling_follows_from_repeated_additivity() {
        let md = m(5, 1);
        let w = pt(md, &[2], &[3]);
        let model = ValueAssignmentModel::new(
            vec![ValueAssignment::from_character_point(&w)],
            vec![1.0],
        )
        .unwrap();
        let hvm = build_deterministic_hvm(&model).unwrap();
        for u in md.points() {
            let base = hvm.alpha(0, &Context::new(md, vec![u.clone()]).unwrap()).unwrap()[0];
            for k in 0..5u64 {
                let scaled = hvm
                    .alpha(0, &Context::new(md, vec![u.scale(k)]).unwrap())
                    .unwrap()[0];
                assert_eq!(scaled, md.mul(base, k));
            }
        }
    }

    #[test]
    fn certificate_lists_the_support_in_canonical_order() {
        let md = m(3, 1);
        let w = wigner_of_state(&ket(md, 0)).unwrap();
        let model = model_from_wigner(&w).unwrap();
        let text = certificate_json(&model, "deadbeef").unwrap();
        assert!(text.starts_with("{\"d\":3,\"n\":1,\"states\":["));
        assert!(text.contains("\"bound_state_hash\":\"deadbeef\""));
        // Support: the three characters with x = 0.
        assert_eq!(text.matches("character_point").count(), 3);
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        let states = parsed["states"].as_array().unwrap();
        assert_eq!(states[0]["character_point"], serde_json::json!([0, 0]));
        assert_eq!(states[1]["character_point"], serde_json::json!([1, 0]));
        assert_eq!(states[2]["character_point"], serde_json::json!([2, 0]));
    }
}
