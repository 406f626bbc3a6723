//! The discrete Wigner function of states and POVM elements, phase-point
//! operators, the phase-space Born rule, negativity reports, and a
//! factorized fast symplectic transform.
//!
//! The phase-point operator at `u` is
//!
//! ```text
//! A_u = d^{-n} sum_{v} w^{[u,v]} T_v
//! ```
//!
//! an orthogonal Hermitian basis of operator space, and the Wigner function
//! of a state is `W_rho(u) = d^{-n} Tr(A_u rho)`. Two evaluation paths are
//! provided: the definitional per-point trace against `A_u`, and a fast
//! path that collects all `Tr(T_v rho)` and applies one symplectic
//! transform. They cross-validate each other in the test suites.

use num_complex::Complex64;
use serde::Deserialize;

use crate::dense::{checked_dim, DenseOperator, DEFAULT_SIZE_CAP};
use crate::error::{Error, Result};
use crate::json;
use crate::phase_space::{Modulus, PhasePoint};
use crate::weyl::{root_of_unity, WeylOperator};

/// Density/effect validation tolerance at the Wigner boundary.
pub const STATE_TOL: f64 = 1e-8;

/// Values above `-NEGATIVITY_EPSILON` count as non-negative; genuine
/// negativity at desk scale is orders of magnitude larger than trace
/// rounding.
pub const NEGATIVITY_EPSILON: f64 = 1e-9;

/// Whether a table represents a state or a POVM element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WignerKind {
    State,
    Effect,
}

impl WignerKind {
    fn as_str(&self) -> &'static str {
        match self {
            WignerKind::State => "state",
            WignerKind::Effect => "effect",
        }
    }
}

/// A real table over all `d^{2n}` phase points in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerFunction {
    modulus: Modulus,
    kind: WignerKind,
    values: Vec<f64>,
}

impl WignerFunction {
    pub fn new(modulus: Modulus, kind: WignerKind, values: Vec<f64>) -> Result<Self> {
        let count = modulus.point_count();
        if values.len() != count {
            return Err(Error::DimensionMismatch {
                expected: count,
                got: values.len(),
            });
        }
        Ok(Self {
            modulus,
            kind,
            values,
        })
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn kind(&self) -> WignerKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, point: &PhasePoint) -> f64 {
        self.values[point.index()]
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Serialize as `{"d":..,"n":..,"kind":..,"values":[..]}` with
    /// 17-significant-digit floats; byte-identical across reruns.
    pub fn to_json_string(&self) -> String {
        format!(
            "{{\"d\":{},\"n\":{},\"kind\":\"{}\",\"values\":{}}}\n",
            self.modulus.d(),
            self.modulus.n(),
            self.kind.as_str(),
            json::float_array(&self.values),
        )
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            d: u64,
            n: usize,
            kind: String,
            values: Vec<f64>,
        }
        let raw: Raw = serde_json::from_str(text).map_err(|e| Error::Parse {
            reason: e.to_string(),
        })?;
        let kind = match raw.kind.as_str() {
            "state" => WignerKind::State,
            "effect" => WignerKind::Effect,
            other => {
                return Err(Error::Parse {
                    reason: format!("unknown kind {other:?}"),
                })
            }
        };
        Self::new(Modulus::new(raw.d, raw.n)?, kind, raw.values)
    }
}

/// The Hermitian, trace-one operator attached to a phase point.
#[derive(Debug, Clone)]
pub struct PhasePointOperator {
    point: PhasePoint,
    matrix: DenseOperator,
}

impl PhasePointOperator {
    pub fn point(&self) -> &PhasePoint {
        &self.point
    }

    pub fn matrix(&self) -> &DenseOperator {
        &self.matrix
    }
}

pub fn phase_point_operator(point: &PhasePoint) -> Result<PhasePointOperator> {
    phase_point_operator_with_cap(point, DEFAULT_SIZE_CAP)
}

pub fn phase_point_operator_with_cap(point: &PhasePoint, cap: usize) -> Result<PhasePointOperator> {
    let m = point.modulus();
    checked_dim(m, cap)?;
    let d = m.d();
    let mut acc = DenseOperator::zero(m);
    for v in m.points() {
        let coeff = root_of_unity(d, point.symplectic(&v)?);
        let term = WeylOperator::from_point(v).matrix_with_cap(cap)?;
        acc.add_assign_scaled(&term, coeff);
    }
    let scale = 1.0 / m.hilbert_dim() as f64;
    Ok(PhasePointOperator {
        point: point.clone(),
        matrix: acc.scale(Complex64::new(scale, 0.0)),
    })
}

/// Direction of the symplectic transform. The forward kernel is
/// `w^{[u,v]}`; the inverse uses the opposite kernel orientation together
/// with the normalizer `d^{-2n}`, so that `inverse . forward = identity`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformDirection {
    Forward,
    Inverse,
}

/// Factorized symplectic transform: `2n` one-dimensional character
/// transforms plus a block swap, `O(|V| * 2n * d)` work instead of the
/// naive `O(|V|^2)`.
pub fn symplectic_transform(
    modulus: Modulus,
    table: &[Complex64],
    direction: TransformDirection,
) -> Result<Vec<Complex64>> {
    let len = modulus.point_count();
    if table.len() != len {
        return Err(Error::DimensionMismatch {
            expected: len,
            got: table.len(),
        });
    }
    let d = modulus.d();
    let n = modulus.n();
    let du = d as usize;
    let mut data = table.to_vec();

    let plus: Vec<Vec<Complex64>> = (0..d)
        .map(|t| (0..d).map(|v| root_of_unity(d, t * v % d)).collect())
        .collect();
    let minus: Vec<Vec<Complex64>> = (0..d)
        .map(|t| {
            (0..d)
                .map(|v| root_of_unity(d, modulus.neg(t * v % d)))
                .collect()
        })
        .collect();

    // g(u_z, u_x) = sum_{v_z} w^{-(u_x|v_z)} sum_{v_x} w^{(u_z|v_x)} f(v_z, v_x).
    // First contract every X-block axis with the + kernel (the new digit
    // u_z,i stays in place), then every Z-block axis with the - kernel
    // (digit u_x,i stays in place); the result is laid out as (u_x, u_z)
    // and a final block swap restores the canonical (u_z, u_x) order.
    let stride_of = |axis: usize| du.pow((2 * n - 1 - axis) as u32);
    for axis in n..2 * n {
        contract_axis(&mut data, du, stride_of(axis), &plus);
    }
    for axis in 0..n {
        contract_axis(&mut data, du, stride_of(axis), &minus);
    }

    let block = du.pow(n as u32);
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    for a in 0..block {
        for b in 0..block {
            out[a * block + b] = data[b * block + a];
        }
    }

    if direction == TransformDirection::Inverse {
        let scale = 1.0 / len as f64;
        for v in &mut out {
            *v *= scale;
        }
    }
    Ok(out)
}

fn contract_axis(data: &mut [Complex64], d: usize, stride: usize, kernel: &[Vec<Complex64>]) {
    let len = data.len();
    let mut buf = vec![Complex64::new(0.0, 0.0); d];
    let chunk = stride * d;
    let mut base0 = 0;
    while base0 < len {
        for lo in 0..stride {
            let base = base0 + lo;
            for (t, slot) in buf.iter_mut().enumerate() {
                *slot = data[base + t * stride];
            }
            for (t, row) in kernel.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (v, k) in row.iter().enumerate() {
                    acc += k * buf[v];
                }
                data[base + t * stride] = acc;
            }
        }
        base0 += chunk;
    }
}

/// Reference double-loop transform; the independent oracle for the
/// factorized path and the baseline for the benchmark.
pub fn symplectic_transform_naive(
    modulus: Modulus,
    table: &[Complex64],
    direction: TransformDirection,
) -> Result<Vec<Complex64>> {
    let len = modulus.point_count();
    if table.len() != len {
        return Err(Error::DimensionMismatch {
            expected: len,
            got: table.len(),
        });
    }
    let d = modulus.d();
    let du = d as usize;
    let n = modulus.n();
    let two_n = 2 * n;

    // Digit decomposition of every index, most significant first.
    let mut digits = vec![0u8; len * two_n];
    for idx in 0..len {
        let mut rest = idx;
        for k in (0..two_n).rev() {
            digits[idx * two_n + k] = (rest % du) as u8;
            rest /= du;
        }
    }
    let omega: Vec<Complex64> = (0..d).map(|k| root_of_unity(d, k)).collect();

    let mut out = vec![Complex64::new(0.0, 0.0); len];
    let mut lut = vec![0u32; two_n * du];
    for (iu, slot) in out.iter_mut().enumerate() {
        // [u, v] as a function of the digits of v: digit k < n (the v_z
        // block) carries coefficient -u_x[k], digit n+i carries +u_z[i].
        // The inverse kernel w^{-[v,u]} equals w^{[u,v]} by antisymmetry,
        // so both directions share the table; only the normalizer differs.
        let u = &digits[iu * two_n..(iu + 1) * two_n];
        for k in 0..n {
            let coef = modulus.neg(u[n + k] as u64);
            for x in 0..du {
                lut[k * du + x] = (coef * x as u64 % d) as u32;
            }
            let coef = u[k] as u64 % d;
            for x in 0..du {
                lut[(n + k) * du + x] = (coef * x as u64 % d) as u32;
            }
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for iv in 0..len {
            let v = &digits[iv * two_n..(iv + 1) * two_n];
            let mut exp = 0u32;
            for k in 0..two_n {
                exp += lut[k * du + v[k] as usize];
            }
            acc += omega[(exp as u64 % d) as usize] * table[iv];
        }
        *slot = acc;
    }

    if direction == TransformDirection::Inverse {
        let scale = 1.0 / len as f64;
        for v in &mut out {
            *v *= scale;
        }
    }
    Ok(out)
}

/// Wigner function of a density operator via the transform path: collect
/// `Tr(T_v rho)` for all `v`, then one forward transform and the
/// `d^{-2n}` normalizer.
pub fn wigner_of_state(rho: &DenseOperator) -> Result<WignerFunction> {
    rho.validate_density(STATE_TOL)?;
    let m = rho.modulus();
    let traces: Vec<Complex64> = m
        .points()
        .map(|v| WeylOperator::from_point(v).trace_against(rho))
        .collect::<Result<_>>()?;
    let transformed = symplectic_transform(m, &traces, TransformDirection::Forward)?;
    let scale = 1.0 / m.point_count() as f64;
    let values = transformed.iter().map(|c| c.re * scale).collect();
    WignerFunction::new(m, WignerKind::State, values)
}

/// Definitional Wigner function: `d^{-n} Tr(A_u rho)` point by point.
pub fn wigner_of_state_by_traces(rho: &DenseOperator) -> Result<WignerFunction> {
    wigner_of_state_by_traces_with_cap(rho, DEFAULT_SIZE_CAP)
}

pub fn wigner_of_state_by_traces_with_cap(
    rho: &DenseOperator,
    cap: usize,
) -> Result<WignerFunction> {
    rho.validate_density(STATE_TOL)?;
    let m = rho.modulus();
    let scale = 1.0 / m.hilbert_dim() as f64;
    let mut values = Vec::with_capacity(m.point_count());
    for u in m.points() {
        let a = phase_point_operator_with_cap(&u, cap)?;
        values.push(a.matrix().product_trace(rho)?.re * scale);
    }
    WignerFunction::new(m, WignerKind::State, values)
}

/// Wigner function `Tr(E A_u)` of a POVM element, via the transform path.
pub fn wigner_of_effect(effect: &DenseOperator) -> Result<WignerFunction> {
    effect.validate_effect(STATE_TOL)?;
    let m = effect.modulus();
    let traces: Vec<Complex64> = m
        .points()
        .map(|v| WeylOperator::from_point(v).trace_against(effect))
        .collect::<Result<_>>()?;
    let transformed = symplectic_transform(m, &traces, TransformDirection::Forward)?;
    let scale = 1.0 / m.hilbert_dim() as f64;
    let values = transformed.iter().map(|c| c.re * scale).collect();
    WignerFunction::new(m, WignerKind::Effect, values)
}

/// Definitional effect table: `Tr(E A_u)` point by point.
pub fn wigner_of_effect_by_traces(effect: &DenseOperator) -> Result<WignerFunction> {
    effect.validate_effect(STATE_TOL)?;
    let m = effect.modulus();
    let mut values = Vec::with_capacity(m.point_count());
    for u in m.points() {
        let a = phase_point_operator(&u)?;
        values.push(a.matrix().product_trace(effect)?.re);
    }
    WignerFunction::new(m, WignerKind::Effect, values)
}

/// Phase-space Born rule: `Tr(E rho) = sum_u W_E(u) W_rho(u)`.
pub fn born_rule(effect: &WignerFunction, state: &WignerFunction) -> Result<f64> {
    if effect.modulus() != state.modulus() {
        return Err(Error::ModulusMismatch {
            d1: effect.modulus().d(),
            n1: effect.modulus().n(),
            d2: state.modulus().d(),
            n2: state.modulus().n(),
        });
    }
    if effect.kind() != WignerKind::Effect || state.kind() != WignerKind::State {
        return Err(Error::EffectValidation {
            reason: "born rule needs an effect-kind and a state-kind table".into(),
        });
    }
    Ok(effect
        .values()
        .iter()
        .zip(state.values())
        .map(|(e, s)| e * s)
        .sum())
}

/// Expectation of a Weyl operator from the Wigner table alone:
/// `Tr(T_a rho) = sum_u W_rho(u) w^{[a,u]}`.
pub fn expectation(point: &PhasePoint, state: &WignerFunction) -> Result<Complex64> {
    if state.kind() != WignerKind::State {
        return Err(Error::StateValidation {
            reason: "expectation needs a state-kind table".into(),
        });
    }
    let m = state.modulus();
    if point.modulus() != m {
        return Err(Error::ModulusMismatch {
            d1: point.modulus().d(),
            n1: point.modulus().n(),
            d2: m.d(),
            n2: m.n(),
        });
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (u, &w) in m.points().zip(state.values()) {
        acc += root_of_unity(m.d(), point.symplectic(&u)?) * w;
    }
    Ok(acc)
}

/// Summary of where and how much a state-kind table is negative.
#[derive(Debug, Clone)]
pub struct NegativityReport {
    pub min_value: f64,
    pub min_point: PhasePoint,
    /// Points with value strictly below `-epsilon`, canonical order.
    pub negative_points: Vec<(PhasePoint, f64)>,
    /// `sum_u |W(u)|`, the sum negativity; 1 for non-negative tables.
    pub sum_abs: f64,
    /// Natural logarithm of the sum negativity.
    pub mana: f64,
    pub non_negative: bool,
    pub epsilon: f64,
}

pub fn negativity_report(state: &WignerFunction) -> Result<NegativityReport> {
    negativity_report_with_epsilon(state, NEGATIVITY_EPSILON)
}

pub fn negativity_report_with_epsilon(
    state: &WignerFunction,
    epsilon: f64,
) -> Result<NegativityReport> {
    if state.kind() != WignerKind::State {
        return Err(Error::StateValidation {
            reason: "negativity report needs a state-kind table".into(),
        });
    }
    let m = state.modulus();
    let mut min_value = f64::INFINITY;
    let mut min_index = 0usize;
    let mut negative_points = Vec::new();
    let mut sum_abs = 0.0;
    for (i, &v) in state.values().iter().enumerate() {
        if v < min_value {
            min_value = v;
            min_index = i;
        }
        sum_abs += v.abs();
        if v < -epsilon {
            negative_points.push((PhasePoint::from_index(m, i), v));
        }
    }
    Ok(NegativityReport {
        min_value,
        min_point: PhasePoint::from_index(m, min_index),
        non_negative: negative_points.is_empty(),
        negative_points,
        sum_abs,
        mana: sum_abs.ln(),
        epsilon,
    })
}
