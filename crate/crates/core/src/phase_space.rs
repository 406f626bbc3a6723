//! Exact arithmetic over `Z_d` for odd `d`, phase points, the symplectic
//! form, generated submodules and outcome-induced linear forms.
//!
//! The phase space of `n` qudits with local dimension `d` is
//! `Z_d^n x Z_d^n`; a point `(z, x)` indexes the Weyl operator built from
//! `Z`-type exponents `z` and `X`-type exponents `x`. All residues are kept
//! reduced to `0..d`, and every operation here is exact integer arithmetic:
//! no floating point enters this layer.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// The pair `(d, n)`: local dimension and number of qudits.
///
/// `d` must be odd and at least 3 so that 2 is invertible mod `d`; `d` is
/// not required to be prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Modulus {
    d: u64,
    n: usize,
}

impl Modulus {
    pub fn new(d: u64, n: usize) -> Result<Self> {
        if d < 3 || d % 2 == 0 || n == 0 {
            return Err(Error::InvalidModulus { d, n });
        }
        Ok(Self { d, n })
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Reduce a signed value into `0..d`.
    pub fn reduce(&self, value: i64) -> u64 {
        value.rem_euclid(self.d as i64) as u64
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        (a % self.d + b % self.d) % self.d
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        (a % self.d + self.d - b % self.d) % self.d
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        (a % self.d) * (b % self.d) % self.d
    }

    pub fn neg(&self, a: u64) -> u64 {
        (self.d - a % self.d) % self.d
    }

    /// Half of `x` mod `d`, i.e. `x * (d+1)/2`. Total because `d` is odd;
    /// satisfies `2 * half(x) = x (mod d)`.
    pub fn half(&self, x: u64) -> u64 {
        self.mul(x, (self.d + 1) / 2)
    }

    /// Standard inner product of two length-`n` residue tuples.
    pub fn inner_product(&self, a: &[u64], b: &[u64]) -> Result<u64> {
        if a.len() != self.n || b.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: if a.len() != self.n { a.len() } else { b.len() },
            });
        }
        let mut acc = 0u64;
        for (&ai, &bi) in a.iter().zip(b) {
            acc = self.add(acc, self.mul(ai, bi));
        }
        Ok(acc)
    }

    /// Hilbert-space dimension `d^n`.
    ///
    /// # Panics
    /// Panics if `d^n` overflows `usize`.
    pub fn hilbert_dim(&self) -> usize {
        checked_pow(self.d, self.n as u32).expect("d^n overflows usize")
    }

    /// Number of phase points, `d^(2n)`.
    ///
    /// # Panics
    /// Panics if `d^(2n)` overflows `usize`.
    pub fn point_count(&self) -> usize {
        checked_pow(self.d, 2 * self.n as u32).expect("d^(2n) overflows usize")
    }

    /// All phase points in canonical (lexicographic by `(z, x)`) order.
    pub fn points(&self) -> impl Iterator<Item = PhasePoint> + '_ {
        let m = *self;
        (0..self.point_count()).map(move |i| PhasePoint::from_index(m, i))
    }

    /// Canonical basis point `e_i = (delta_i, 0)`.
    pub fn basis_z(&self, i: usize) -> PhasePoint {
        let mut z = vec![0; self.n];
        z[i] = 1;
        PhasePoint::new(*self, z, vec![0; self.n]).expect("basis point is valid")
    }

    /// Canonical basis point `f_i = (0, delta_i)`.
    pub fn basis_x(&self, i: usize) -> PhasePoint {
        let mut x = vec![0; self.n];
        x[i] = 1;
        PhasePoint::new(*self, vec![0; self.n], x).expect("basis point is valid")
    }

    fn check_same(&self, other: &Modulus) -> Result<()> {
        if self != other {
            return Err(Error::ModulusMismatch {
                d1: self.d,
                n1: self.n,
                d2: other.d,
                n2: other.n,
            });
        }
        Ok(())
    }
}

fn checked_pow(base: u64, exp: u32) -> Option<usize> {
    base.checked_pow(exp).and_then(|v| usize::try_from(v).ok())
}

/// A point `(z, x)` of the phase space `Z_d^n x Z_d^n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhasePoint {
    modulus: Modulus,
    z: Vec<u64>,
    x: Vec<u64>,
}

impl PhasePoint {
    /// Build a point from `Z`- and `X`-exponent tuples; components are
    /// reduced mod `d`.
    pub fn new(modulus: Modulus, z: Vec<u64>, x: Vec<u64>) -> Result<Self> {
        if z.len() != modulus.n() || x.len() != modulus.n() {
            return Err(Error::DimensionMismatch {
                expected: modulus.n(),
                got: if z.len() != modulus.n() { z.len() } else { x.len() },
            });
        }
        let d = modulus.d();
        Ok(Self {
            modulus,
            z: z.into_iter().map(|v| v % d).collect(),
            x: x.into_iter().map(|v| v % d).collect(),
        })
    }

    pub fn zero(modulus: Modulus) -> Self {
        Self {
            modulus,
            z: vec![0; modulus.n()],
            x: vec![0; modulus.n()],
        }
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn z(&self) -> &[u64] {
        &self.z
    }

    pub fn x(&self) -> &[u64] {
        &self.x
    }

    pub fn is_zero(&self) -> bool {
        self.z.iter().all(|&v| v == 0) && self.x.iter().all(|&v| v == 0)
    }

    /// The components as one flat `(z, x)` tuple, used in reports.
    pub fn flat(&self) -> Vec<u64> {
        self.z.iter().chain(self.x.iter()).copied().collect()
    }

    pub fn add(&self, other: &PhasePoint) -> Result<PhasePoint> {
        self.modulus.check_same(&other.modulus)?;
        let m = self.modulus;
        Ok(PhasePoint {
            modulus: m,
            z: self.z.iter().zip(&other.z).map(|(&a, &b)| m.add(a, b)).collect(),
            x: self.x.iter().zip(&other.x).map(|(&a, &b)| m.add(a, b)).collect(),
        })
    }

    pub fn sub(&self, other: &PhasePoint) -> Result<PhasePoint> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> PhasePoint {
        let m = self.modulus;
        PhasePoint {
            modulus: m,
            z: self.z.iter().map(|&a| m.neg(a)).collect(),
            x: self.x.iter().map(|&a| m.neg(a)).collect(),
        }
    }

    pub fn scale(&self, k: u64) -> PhasePoint {
        let m = self.modulus;
        PhasePoint {
            modulus: m,
            z: self.z.iter().map(|&a| m.mul(a, k)).collect(),
            x: self.x.iter().map(|&a| m.mul(a, k)).collect(),
        }
    }

    /// Symplectic product `[u, v] = (u_z|v_x) - (u_x|v_z) mod d`.
    ///
    /// Zero exactly when the Weyl operators at `u` and `v` commute.
    pub fn symplectic(&self, other: &PhasePoint) -> Result<u64> {
        self.modulus.check_same(&other.modulus)?;
        let m = self.modulus;
        let zx = m.inner_product(&self.z, &other.x)?;
        let xz = m.inner_product(&self.x, &other.z)?;
        Ok(m.sub(zx, xz))
    }

    /// Inner product `(u_z|u_x)` of the point's own halves; this is the
    /// exponent that fixes the canonical Weyl phase.
    pub fn self_overlap(&self) -> u64 {
        self.modulus
            .inner_product(&self.z, &self.x)
            .expect("halves have length n")
    }

    /// Canonical index: mixed-radix rank of the concatenated `(z, x)` tuple,
    /// most significant first.
    pub fn index(&self) -> usize {
        let d = self.modulus.d() as u128;
        let mut acc: u128 = 0;
        for &c in self.z.iter().chain(self.x.iter()) {
            acc = acc * d + c as u128;
        }
        usize::try_from(acc).expect("point index overflows usize")
    }

    /// Inverse of [`PhasePoint::index`].
    pub fn from_index(modulus: Modulus, mut index: usize) -> Self {
        let n = modulus.n();
        let d = modulus.d() as usize;
        let mut digits = vec![0u64; 2 * n];
        for slot in digits.iter_mut().rev() {
            *slot = (index % d) as u64;
            index /= d;
        }
        let x = digits.split_off(n);
        PhasePoint {
            modulus,
            z: digits,
            x,
        }
    }
}

/// The `Z_d`-submodule of phase space generated by a list of points.
///
/// Over composite `d` this is a module, not a vector space, so the elements
/// are enumerated by closure under addition rather than by a basis. The
/// enumeration is canonical (sorted by point index).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Submodule {
    modulus: Modulus,
    generators: Vec<PhasePoint>,
    elements: Vec<PhasePoint>,
}

impl Submodule {
    /// Closure of the generators under addition and scalar multiples.
    /// An empty generator list yields the zero submodule.
    pub fn span(modulus: Modulus, generators: &[PhasePoint]) -> Result<Self> {
        for g in generators {
            modulus.check_same(&g.modulus())?;
        }
        let mut seen: BTreeMap<usize, PhasePoint> = BTreeMap::new();
        let zero = PhasePoint::zero(modulus);
        seen.insert(zero.index(), zero.clone());
        let mut frontier = vec![zero];
        while let Some(p) = frontier.pop() {
            for g in generators {
                let q = p.add(g)?;
                let idx = q.index();
                if !seen.contains_key(&idx) {
                    seen.insert(idx, q.clone());
                    frontier.push(q);
                }
            }
        }
        Ok(Self {
            modulus,
            generators: generators.to_vec(),
            elements: seen.into_values().collect(),
        })
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn generators(&self) -> &[PhasePoint] {
        &self.generators
    }

    /// Elements in canonical order.
    pub fn elements(&self) -> &[PhasePoint] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        false // always contains zero
    }

    pub fn contains(&self, p: &PhasePoint) -> bool {
        self.elements
            .binary_search_by_key(&p.index(), |e| e.index())
            .is_ok()
    }

    /// True when all pairs of elements have zero symplectic product.
    pub fn is_isotropic(&self) -> bool {
        // Bilinearity makes checking the generators sufficient.
        for (i, a) in self.generators.iter().enumerate() {
            for b in &self.generators[i..] {
                if a.symplectic(b).expect("same modulus") != 0 {
                    return false;
                }
            }
        }
        true
    }
}

/// A `Z_d`-linear form on a generated submodule, induced by an outcome tuple
/// `s`: the generator `a_i` is sent to `s_i` and the assignment is extended
/// linearly.
///
/// Construction verifies well-definedness: two representations of the same
/// element must receive the same value, which can fail for composite `d` or
/// dependent generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeForm {
    base: Submodule,
    values: BTreeMap<PhasePoint, u64>,
}

impl OutcomeForm {
    /// Extend `a_i -> s_i` linearly over the span of the generators.
    ///
    /// Fails with [`Error::NotIsotropic`] if the generators do not commute
    /// pairwise, and with [`Error::InconsistentOutcome`] if the extension is
    /// not well defined.
    pub fn new(modulus: Modulus, generators: &[PhasePoint], outcomes: &[u64]) -> Result<Self> {
        if outcomes.len() != generators.len() {
            return Err(Error::DimensionMismatch {
                expected: generators.len(),
                got: outcomes.len(),
            });
        }
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
        let base = Submodule::span(modulus, generators)?;
        let mut values: BTreeMap<PhasePoint, u64> = BTreeMap::new();
        let zero = PhasePoint::zero(modulus);
        values.insert(zero.clone(), 0);
        let mut frontier = vec![zero];
        while let Some(p) = frontier.pop() {
            let vp = values[&p];
            for (g, &s) in generators.iter().zip(outcomes) {
                let q = p.add(g)?;
                let vq = modulus.add(vp, s);
                match values.get(&q) {
                    None => {
                        values.insert(q.clone(), vq);
                        frontier.push(q);
                    }
                    Some(&prev) if prev != vq => {
                        return Err(Error::InconsistentOutcome {
                            element: q.flat(),
                            first: prev,
                            second: vq,
                        });
                    }
                    Some(_) => {}
                }
            }
        }
        Ok(Self { base, values })
    }

    pub fn base(&self) -> &Submodule {
        &self.base
    }

    /// Value at an element of the base submodule, `None` outside it.
    pub fn apply(&self, p: &PhasePoint) -> Option<u64> {
        self.values.get(p).copied()
    }
}

/// Decide whether a full table `f: V -> Z_d` is additive, and if so return
/// the unique point `w` with `f(u) = [u, w]` for all `u`.
///
/// The table is indexed in canonical point order and entries are reduced
/// mod `d`. Returns `None` when `f` is not a character.
pub fn is_character(modulus: Modulus, table: &[u64]) -> Result<Option<PhasePoint>> {
    let count = modulus.point_count();
    if table.len() != count {
        return Err(Error::DimensionMismatch {
            expected: count,
            got: table.len(),
        });
    }
    // A character is determined by its values on the canonical basis:
    // [e_i, w] = w_x[i] and [f_i, w] = -w_z[i].
    let n = modulus.n();
    let mut wz = vec![0u64; n];
    let mut wx = vec![0u64; n];
    for i in 0..n {
        wx[i] = table[modulus.basis_z(i).index()] % modulus.d();
        wz[i] = modulus.neg(table[modulus.basis_x(i).index()]);
    }
    let w = PhasePoint::new(modulus, wz, wx)?;
    for (idx, &value) in table.iter().enumerate() {
        let u = PhasePoint::from_index(modulus, idx);
        if u.symplectic(&w)? != value % modulus.d() {
            return Ok(None);
        }
    }
    Ok(Some(w))
}
