//! Peres-Mermin operator algebra on a pair of qubits.
//!
//! The nine observables are two-qubit Pauli products arranged in a 3×3
//! square. Each row and column (a *context*) is a triple of commuting
//! observables; their joint eigenstates are built from projector products
//! rather than an eigensolver, because the triples are only jointly
//! nondegenerate.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for exact algebraic identities (commutators, products, idempotence).
pub const ALGEBRA_TOL: f64 = 1e-12;

/// Tolerance on the trace of a density matrix.
pub const TRACE_TOL: f64 = 1e-10;

/// Hilbert-space dimension of the two-qubit system.
pub const DIM: usize = 4;

/// Number of triple states (6 contexts × 4 admissible outcome triples).
pub const TRIPLE_STATES: usize = 24;

/// Product sign of each context, in canonical context order. Only the last
/// row (context 5) multiplies to −𝟙.
pub const CONTEXT_SIGNS: [i8; 6] = [1, 1, 1, 1, -1, 1];

/// Canonical ordering of the first two outcomes over the four slots.
pub const SLOT_OUTCOMES: [(i8, i8); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantumError {
    #[error("algebra violation: {0}")]
    AlgebraViolation(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("context index {0} outside 1..=6")]
    BadContext(usize),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
}

/// Dense square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for r in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|c| {
                    let z = self.get(r, c);
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        Self {
            dim,
            entries: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries; `entries.len()` must be a
    /// nonzero perfect square.
    pub fn from_entries(entries: Vec<Complex64>) -> Result<Self, QuantumError> {
        let dim = (entries.len() as f64).sqrt().round() as usize;
        if dim == 0 || dim * dim != entries.len() {
            return Err(QuantumError::DimensionMismatch {
                left: entries.len(),
                right: dim * dim,
            });
        }
        Ok(Self { dim, entries })
    }

    /// Rank-1 projector |v⟩⟨v|.
    pub fn outer(v: &[Complex64]) -> Self {
        let dim = v.len();
        let mut m = Self::zeros(dim);
        for r in 0..dim {
            for c in 0..dim {
                m.entries[r * dim + c] = v[r] * v[c].conj();
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.entries[row * self.dim + col] = value;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.dim);
        for r in 0..self.dim {
            for c in 0..self.dim {
                m.entries[c * self.dim + r] = self.get(r, c).conj();
            }
        }
        m
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let dim = self.dim * other.dim;
        let mut m = Self::zeros(dim);
        for ar in 0..self.dim {
            for ac in 0..self.dim {
                let a = self.get(ar, ac);
                for br in 0..other.dim {
                    for bc in 0..other.dim {
                        let r = ar * other.dim + br;
                        let c = ac * other.dim + bc;
                        m.entries[r * dim + c] = a * other.get(br, bc);
                    }
                }
            }
        }
        m
    }

    /// `[self, other] = self·other − other·self`.
    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Frobenius norm; an upper bound on the spectral norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise distance to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.dim == other.dim && self.max_abs_diff(other) < tol
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.approx_eq(&self.adjoint(), tol)
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim, "dimension mismatch");
        (0..self.dim)
            .map(|r| (0..self.dim).map(|c| self.get(r, c) * v[c]).sum())
            .collect()
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut m = ComplexMatrix::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.entries[r * n + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..n {
                    m.entries[r * n + c] += a * rhs.entries[k * n + c];
                }
            }
        }
        m
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
    Identity,
}

/// Standard 2×2 Pauli matrix, with σ_z = diag(1, −1).
pub fn pauli(axis: Axis) -> ComplexMatrix {
    let o = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let entries = match axis {
        Axis::X => vec![o, one, one, o],
        Axis::Y => vec![o, -i, i, o],
        Axis::Z => vec![one, o, o, -one],
        Axis::Identity => vec![one, o, o, one],
    };
    ComplexMatrix::from_entries(entries).expect("2x2")
}

pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}

/// One of the six measurement contexts, numbered 1..=6 in canonical order:
/// row 1, row 2, column 1, column 2, row 3, column 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct ContextId(u8);

impl TryFrom<u8> for ContextId {
    type Error = QuantumError;

    fn try_from(j: u8) -> Result<Self, QuantumError> {
        Self::new(j as usize)
    }
}

impl From<ContextId> for u8 {
    fn from(ctx: ContextId) -> u8 {
        ctx.0
    }
}

impl ContextId {
    pub fn new(j: usize) -> Result<Self, QuantumError> {
        if (1..=6).contains(&j) {
            Ok(Self(j as u8))
        } else {
            Err(QuantumError::BadContext(j))
        }
    }

    /// Context from a 0-based offset in 0..6.
    pub fn from_offset(offset: usize) -> Self {
        assert!(offset < 6, "context offset {offset} out of range");
        Self(offset as u8 + 1)
    }

    pub fn all() -> impl Iterator<Item = ContextId> {
        (0..6).map(Self::from_offset)
    }

    /// 1-based context number.
    pub fn get(self) -> usize {
        self.0 as usize
    }

    /// 0-based offset.
    pub fn offset(self) -> usize {
        self.0 as usize - 1
    }

    /// Expected product sign of the context's observables.
    pub fn sign(self) -> i8 {
        CONTEXT_SIGNS[self.offset()]
    }
}

impl fmt::Display for ContextId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Canonical contexts as 0-based observable indices (A₁ is index 0).
pub const CANONICAL_CONTEXTS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [3, 4, 5],
    [0, 3, 6],
    [1, 4, 7],
    [6, 7, 8],
    [2, 5, 8],
];

/// The nine observables A₁…A₉ (row-major over the square) and the six
/// contexts.
#[derive(Debug, Clone)]
pub struct SquareOperators {
    observables: Vec<ComplexMatrix>,
    contexts: [[usize; 3]; 6],
}

impl SquareOperators {
    /// Builds the Peres-Mermin square and checks every algebraic identity.
    pub fn peres_mermin() -> Result<Self, QuantumError> {
        use Axis::*;
        let p = |a, b| tensor(&pauli(a), &pauli(b));
        let observables = vec![
            p(X, Identity),
            p(Identity, Y),
            p(X, Y),
            p(Identity, X),
            p(Y, Identity),
            p(Y, X),
            p(X, X),
            p(Y, Y),
            p(Z, Z),
        ];
        Self::from_parts(observables, CANONICAL_CONTEXTS)
    }

    /// Validated construction from arbitrary observables.
    pub fn from_parts(
        observables: Vec<ComplexMatrix>,
        contexts: [[usize; 3]; 6],
    ) -> Result<Self, QuantumError> {
        let square = Self::from_parts_unchecked(observables, contexts);
        square.validate()?;
        Ok(square)
    }

    /// Construction without validation; lets the invariant suite be
    /// exercised against deliberately broken operator sets.
    pub fn from_parts_unchecked(observables: Vec<ComplexMatrix>, contexts: [[usize; 3]; 6]) -> Self {
        assert_eq!(observables.len(), 9, "the square has nine observables");
        Self {
            observables,
            contexts,
        }
    }

    pub fn observables(&self) -> &[ComplexMatrix] {
        &self.observables
    }

    /// Observable A_k for k in 1..=9.
    pub fn observable(&self, k: usize) -> &ComplexMatrix {
        &self.observables[k - 1]
    }

    /// 0-based observable indices of a context.
    pub fn context_members(&self, ctx: ContextId) -> [usize; 3] {
        self.contexts[ctx.offset()]
    }

    pub fn product(&self, ctx: ContextId) -> ComplexMatrix {
        let [a, b, c] = self.context_members(ctx);
        &(&self.observables[a] * &self.observables[b]) * &self.observables[c]
    }

    /// `[A_a, A_b]` for 1-based observable numbers.
    pub fn commutator(&self, a: usize, b: usize) -> ComplexMatrix {
        self.observable(a).commutator(self.observable(b))
    }

    /// Sign s such that the context product equals s·𝟙, if it is ±𝟙 at all.
    pub fn product_sign(&self, ctx: ContextId) -> Option<i8> {
        let prod = self.product(ctx);
        let id = ComplexMatrix::identity(DIM);
        if prod.approx_eq(&id, ALGEBRA_TOL) {
            Some(1)
        } else if prod.approx_eq(&id.scale_real(-1.0), ALGEBRA_TOL) {
            Some(-1)
        } else {
            None
        }
    }

    pub fn check_observables(&self) -> Result<(), QuantumError> {
        let id = ComplexMatrix::identity(DIM);
        for (k, a) in self.observables.iter().enumerate() {
            if a.dim() != DIM {
                return Err(QuantumError::AlgebraViolation(format!(
                    "A{} has dimension {}",
                    k + 1,
                    a.dim()
                )));
            }
            if !a.is_hermitian(ALGEBRA_TOL) {
                return Err(QuantumError::AlgebraViolation(format!("A{} is not Hermitian", k + 1)));
            }
            if !(a * a).approx_eq(&id, ALGEBRA_TOL) {
                return Err(QuantumError::AlgebraViolation(format!("A{} squared is not 1", k + 1)));
            }
        }
        Ok(())
    }

    pub fn check_commutation(&self) -> Result<(), QuantumError> {
        for ctx in ContextId::all() {
            let m = self.context_members(ctx);
            for (x, y) in [(0, 1), (0, 2), (1, 2)] {
                let norm = self.commutator(m[x] + 1, m[y] + 1).frobenius_norm();
                if norm >= ALGEBRA_TOL {
                    return Err(QuantumError::AlgebraViolation(format!(
                        "A{} and A{} in context {ctx} do not commute (norm {norm:e})",
                        m[x] + 1,
                        m[y] + 1
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn check_products(&self) -> Result<(), QuantumError> {
        for ctx in ContextId::all() {
            let expected = ComplexMatrix::identity(DIM).scale_real(ctx.sign() as f64);
            let err = self.product(ctx).max_abs_diff(&expected);
            if err >= ALGEBRA_TOL {
                return Err(QuantumError::AlgebraViolation(format!(
                    "context {ctx} product deviates from {}1 by {err:e}",
                    if ctx.sign() > 0 { "+" } else { "-" }
                )));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), QuantumError> {
        self.check_observables()?;
        self.check_commutation()?;
        self.check_products()
    }
}

/// Joint eigenstate |b_{j_i}⟩ of one context.
#[derive(Debug, Clone)]
pub struct TripleState {
    pub context: ContextId,
    /// Slot 1..=4.
    pub slot: usize,
    pub outcomes: [i8; 3],
    pub projector: ComplexMatrix,
    pub vector: [Complex64; DIM],
    /// 4(j−1) + (i−1).
    pub flat_index: usize,
}

impl TripleState {
    pub fn density_matrix(&self) -> ComplexMatrix {
        self.projector.clone()
    }
}

/// Flat chain index of (context, slot 1..=4).
pub fn flat_index(ctx: ContextId, slot: usize) -> usize {
    4 * ctx.offset() + (slot - 1)
}

/// Outcome triple of a slot given the context's product sign.
pub fn slot_outcomes(slot: usize, sign: i8) -> [i8; 3] {
    let (s1, s2) = SLOT_OUTCOMES[slot - 1];
    [s1, s2, sign * s1 * s2]
}

/// Slot (1..=4) whose first two outcomes are `(s1, s2)`.
pub fn slot_of(s1: i8, s2: i8) -> usize {
    SLOT_OUTCOMES
        .iter()
        .position(|&o| o == (s1, s2))
        .expect("outcomes are ±1")
        + 1
}

/// Π_k (𝟙 + s_k A_k)/2 over the context's observables.
pub fn outcome_projector(
    square: &SquareOperators,
    ctx: ContextId,
    outcomes: [i8; 3],
) -> ComplexMatrix {
    let id = ComplexMatrix::identity(DIM);
    square
        .context_members(ctx)
        .iter()
        .zip(outcomes)
        .fold(id.clone(), |acc, (&k, s)| {
            let factor = (&id + &square.observables[k].scale_real(s as f64)).scale_real(0.5);
            &acc * &factor
        })
}

/// The four joint eigenstates of context `ctx`, in canonical slot order.
pub fn triple_eigenbasis(
    square: &SquareOperators,
    ctx: ContextId,
) -> Result<Vec<TripleState>, QuantumError> {
    let sign = square.product_sign(ctx).ok_or_else(|| {
        QuantumError::AlgebraViolation(format!("context {ctx} product is not ±1"))
    })?;
    (1..=4)
        .map(|slot| {
            let outcomes = slot_outcomes(slot, sign);
            let projector = outcome_projector(square, ctx, outcomes);
            let tr = projector.trace();
            if (tr - Complex64::new(1.0, 0.0)).norm() > ALGEBRA_TOL {
                return Err(QuantumError::AlgebraViolation(format!(
                    "projector for context {ctx} outcomes {outcomes:?} has trace {tr}"
                )));
            }
            let vector = unit_vector_of(&projector);
            Ok(TripleState {
                context: ctx,
                slot,
                outcomes,
                projector: ComplexMatrix::outer(&vector),
                vector,
                flat_index: flat_index(ctx, slot),
            })
        })
        .collect()
}

/// All 24 triple states ordered by flat index.
pub fn all_triple_states(square: &SquareOperators) -> Result<Vec<TripleState>, QuantumError> {
    let mut states = Vec::with_capacity(TRIPLE_STATES);
    for ctx in ContextId::all() {
        states.extend(triple_eigenbasis(square, ctx)?);
    }
    Ok(states)
}

/// Range vector of a rank-1 projector with the global phase fixed so the
/// first nonzero component is real and positive.
fn unit_vector_of(projector: &ComplexMatrix) -> [Complex64; DIM] {
    let col = (0..DIM)
        .max_by(|&a, &b| {
            projector.get(a, a).re.partial_cmp(&projector.get(b, b).re).unwrap()
        })
        .unwrap();
    let mut v = [Complex64::new(0.0, 0.0); DIM];
    for (r, z) in v.iter_mut().enumerate() {
        *z = projector.get(r, col);
    }
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let lead = v
        .iter()
        .copied()
        .find(|z| z.norm() > 1e-9)
        .expect("nonzero column");
    let phase = lead.conj() / lead.norm();
    for z in v.iter_mut() {
        *z = *z * phase / norm;
        if z.im.abs() < 1e-15 {
            z.im = 0.0;
        }
        if z.re.abs() < 1e-15 {
            z.re = 0.0;
        }
    }
    v
}

/// Tr(ρ·P) for the target's projector, clamped against round-off.
pub fn born_probability(state: &ComplexMatrix, target: &TripleState) -> Result<f64, QuantumError> {
    if state.dim() != DIM {
        return Err(QuantumError::DimensionMismatch {
            left: state.dim(),
            right: DIM,
        });
    }
    let tr = state.trace();
    if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
        return Err(QuantumError::InvalidState(format!("trace {tr} is not 1")));
    }
    let p = (state * &target.projector).trace().re;
    if !(-ALGEBRA_TOL..=1.0 + ALGEBRA_TOL).contains(&p) {
        return Err(QuantumError::InvalidState(format!(
            "Born probability {p} outside [0, 1]; state is not positive"
        )));
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Reduced density matrix of the first qubit, Tr₂ |v⟩⟨v|.
pub fn reduced_first_qubit(v: &[Complex64; DIM]) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(2);
    for a in 0..2 {
        for b in 0..2 {
            let z: Complex64 = (0..2).map(|k| v[2 * a + k] * v[2 * b + k].conj()).sum();
            m.set(a, b, z);
        }
    }
    m
}

/// Purity Tr(ρ_A²) of the first qubit's reduced state: 1 for product
/// states, 1/2 for maximally entangled ones.
pub fn reduced_purity(v: &[Complex64; DIM]) -> f64 {
    let r = reduced_first_qubit(v);
    (&r * &r).trace().re
}

pub fn is_product_state(v: &[Complex64; DIM]) -> bool {
    (reduced_purity(v) - 1.0).abs() < ALGEBRA_TOL
}

pub fn is_maximally_entangled(v: &[Complex64; DIM]) -> bool {
    reduced_first_qubit(v).approx_eq(&ComplexMatrix::identity(2).scale_real(0.5), ALGEBRA_TOL)
}

/// |⟨a|b⟩|².
pub fn overlap(a: &[Complex64; DIM], b: &[Complex64; DIM]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>().norm_sqr()
}

/// 𝟙/4.
pub fn maximally_mixed() -> ComplexMatrix {
    ComplexMatrix::identity(DIM).scale_real(0.25)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn square() -> SquareOperators {
        SquareOperators::peres_mermin().unwrap()
    }

    #[test]
    fn pauli_conventions() {
        let x = pauli(Axis::X);
        assert_eq!(x.entries(), &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]);
        let y = pauli(Axis::Y);
        assert_eq!(y.entries(), &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]);
        assert_eq!(pauli(Axis::Identity), ComplexMatrix::identity(2));
        assert_eq!(pauli(Axis::Z).entries(), &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]);
    }

    #[test]
    fn tensor_examples() {
        let id = pauli(Axis::Identity);
        assert_eq!(tensor(&id, &id), ComplexMatrix::identity(4));

        let zz = tensor(&pauli(Axis::Z), &pauli(Axis::Z));
        let mut diag = ComplexMatrix::zeros(4);
        for (i, d) in [1.0, -1.0, -1.0, 1.0].into_iter().enumerate() {
            diag.set(i, i, c(d, 0.0));
        }
        assert_eq!(zz, diag);

        // σx ⊗ σy: antidiagonal (−i, i, −i, i) from the top row down.
        let xy = tensor(&pauli(Axis::X), &pauli(Axis::Y));
        let mut anti = ComplexMatrix::zeros(4);
        for (r, z) in [c(0., -1.), c(0., 1.), c(0., -1.), c(0., 1.)].into_iter().enumerate() {
            anti.set(r, 3 - r, z);
        }
        assert_eq!(xy, anti);
    }

    #[test]
    fn context_products_and_commutators() {
        let sq = square();
        let id = ComplexMatrix::identity(4);
        let five = ContextId::new(5).unwrap();
        assert!(sq.product(five).approx_eq(&id.scale_real(-1.0), ALGEBRA_TOL));
        assert!(sq.product(ContextId::new(1).unwrap()).approx_eq(&id, ALGEBRA_TOL));
        assert_eq!(sq.commutator(1, 2).max_abs(), 0.0);
        // A1 and A5 share no context and anticommute.
        assert!(sq.commutator(1, 5).max_abs() > 1.0);
        let signs: i8 = ContextId::all().map(|j| sq.product_sign(j).unwrap()).product();
        assert_eq!(signs, -1);
    }

    #[test]
    fn bad_context_rejected() {
        assert_eq!(ContextId::new(0), Err(QuantumError::BadContext(0)));
        assert_eq!(ContextId::new(7), Err(QuantumError::BadContext(7)));
    }

    #[test]
    fn corrupted_operator_fails_validation() {
        let sq = square();
        let mut obs = sq.observables().to_vec();
        obs[8] = obs[8].scale_real(-1.0);
        let err = SquareOperators::from_parts(obs, CANONICAL_CONTEXTS).unwrap_err();
        assert!(matches!(err, QuantumError::AlgebraViolation(m) if m.contains("product")));
    }

    #[test]
    fn column_one_plus_plus_is_uniform_product_state() {
        let sq = square();
        let basis = triple_eigenbasis(&sq, ContextId::new(3).unwrap()).unwrap();
        for z in basis[0].vector {
            assert!((z - c(0.5, 0.0)).norm() < ALGEBRA_TOL, "{z}");
        }
    }

    #[test]
    fn last_row_gives_bell_states() {
        let sq = square();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bells = [
            [c(s, 0.), c(0., 0.), c(0., 0.), c(s, 0.)],
            [c(s, 0.), c(0., 0.), c(0., 0.), c(-s, 0.)],
            [c(0., 0.), c(s, 0.), c(s, 0.), c(0., 0.)],
            [c(0., 0.), c(s, 0.), c(-s, 0.), c(0., 0.)],
        ];
        let basis = triple_eigenbasis(&sq, ContextId::new(5).unwrap()).unwrap();
        for state in &basis {
            assert!(is_maximally_entangled(&state.vector));
            let hits = bells.iter().filter(|b| (overlap(b, &state.vector) - 1.0).abs() < 1e-12).count();
            assert_eq!(hits, 1, "slot {} is not a Bell state", state.slot);
        }
    }

    #[test]
    fn eigen_relations_and_completeness() {
        let sq = square();
        for ctx in ContextId::all() {
            let basis = triple_eigenbasis(&sq, ctx).unwrap();
            let mut sum = ComplexMatrix::zeros(4);
            for st in &basis {
                let prod: i8 = st.outcomes.iter().product();
                assert_eq!(prod, ctx.sign());
                assert!((&st.projector * &st.projector).approx_eq(&st.projector, ALGEBRA_TOL));
                assert!((st.projector.trace().re - 1.0).abs() < ALGEBRA_TOL);
                for (k, &s) in sq.context_members(ctx).iter().zip(&st.outcomes) {
                    let av = sq.observables()[*k].apply(&st.vector);
                    for (x, y) in av.iter().zip(&st.vector) {
                        assert!((x - y * s as f64).norm() < ALGEBRA_TOL);
                    }
                }
                let lead = st.vector.iter().find(|z| z.norm() > 1e-9).unwrap();
                assert!(lead.im == 0.0 && lead.re > 0.0);
                sum = &sum + &st.projector;
            }
            assert!(sum.approx_eq(&ComplexMatrix::identity(4), ALGEBRA_TOL));
        }
    }

    #[test]
    fn inadmissible_outcome_triple_has_zero_trace() {
        let sq = square();
        let p = outcome_projector(&sq, ContextId::new(5).unwrap(), [1, 1, 1]);
        assert!(p.trace().norm() < ALGEBRA_TOL);
    }

    #[test]
    fn sixteen_local_eight_nonlocal() {
        let states = all_triple_states(&square()).unwrap();
        assert_eq!(states.len(), 24);
        let local = states.iter().filter(|s| is_product_state(&s.vector)).count();
        let bell = states.iter().filter(|s| is_maximally_entangled(&s.vector)).count();
        assert_eq!((local, bell), (16, 8));
        for s in &states[..16] {
            assert!(is_product_state(&s.vector));
        }
    }

    #[test]
    fn cross_context_overlaps_are_quantized() {
        let states = all_triple_states(&square()).unwrap();
        for a in &states {
            for b in &states {
                if a.context == b.context {
                    continue;
                }
                let o = overlap(&a.vector, &b.vector);
                assert!(
                    [0.0, 0.25, 0.5].iter().any(|t| (o - t).abs() < ALGEBRA_TOL),
                    "overlap {o}"
                );
            }
        }
    }

    #[test]
    fn born_probability_examples() {
        let states = all_triple_states(&square()).unwrap();
        let b11 = &states[0];
        assert!((born_probability(&b11.projector, b11).unwrap() - 1.0).abs() < ALGEBRA_TOL);
        for s in &states {
            assert!((born_probability(&maximally_mixed(), s).unwrap() - 0.25).abs() < ALGEBRA_TOL);
        }
        for s in &states[4..8] {
            assert!((born_probability(&b11.projector, s).unwrap() - 0.25).abs() < ALGEBRA_TOL);
        }
    }

    #[test]
    fn born_probability_rejects_unnormalized_state() {
        let states = all_triple_states(&square()).unwrap();
        let bad = ComplexMatrix::identity(4).scale_real(0.3);
        assert!(matches!(
            born_probability(&bad, &states[0]),
            Err(QuantumError::InvalidState(_))
        ));
    }
}
