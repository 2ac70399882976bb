//! Complex operator algebra on truncated Fock ⊗ two-level spaces.
//!
//! All operators are dense `DMatrix<Complex64>` behind the [`Operator`]
//! newtype. The composite index convention is fixed: for a cavity Fock state
//! |n⟩ and atomic level index s (0 = |g⟩, 1 = |e⟩), the composite index is
//! `n * 2 + s`, i.e. the atom index runs fastest.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type Matrix = DMatrix<C64>;
pub type Vector = DVector<C64>;

pub const ATOM_DIM: usize = 2;

/// Index bookkeeping for the cavity ⊗ atom product space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HilbertLayout {
    fock_dim: usize,
}

impl HilbertLayout {
    pub fn new(fock_dim: usize) -> Result<Self> {
        if fock_dim < 2 {
            return Err(Error::DimensionMismatch(format!(
                "fock_dim must be >= 2, got {fock_dim}"
            )));
        }
        Ok(Self { fock_dim })
    }

    pub fn fock_dim(&self) -> usize {
        self.fock_dim
    }

    pub fn atom_dim(&self) -> usize {
        ATOM_DIM
    }

    pub fn total_dim(&self) -> usize {
        ATOM_DIM * self.fock_dim
    }

    /// Composite index of |n⟩ ⊗ |s⟩ (atom fastest).
    pub fn compose(&self, fock: usize, atom: usize) -> usize {
        debug_assert!(fock < self.fock_dim && atom < ATOM_DIM);
        fock * ATOM_DIM + atom
    }

    pub fn decompose(&self, idx: usize) -> (usize, usize) {
        debug_assert!(idx < self.total_dim());
        (idx / ATOM_DIM, idx % ATOM_DIM)
    }
}

/// Atomic level labels: 0 = ground, 1 = excited.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    G,
    E,
}

impl Level {
    pub fn index(self) -> usize {
        match self {
            Level::G => 0,
            Level::E => 1,
        }
    }
}

/// Dense square complex matrix: the universal carrier for Hamiltonians,
/// collapse operators, and density operators.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    mat: Matrix,
}

impl Operator {
    pub fn from_matrix(mat: Matrix) -> Self {
        assert!(mat.is_square(), "Operator requires a square matrix");
        Self { mat }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { mat: Matrix::zeros(dim, dim) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { mat: Matrix::identity(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.mat
    }

    pub fn into_matrix(self) -> Matrix {
        self.mat
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.mat[(i, j)]
    }

    pub fn dagger(&self) -> Operator {
        Self { mat: self.mat.adjoint() }
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    pub fn scale(&self, z: C64) -> Operator {
        Self { mat: &self.mat * z }
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.mat.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// max |A - A†| over entries.
    pub fn herm_residual(&self) -> f64 {
        let d = &self.mat - self.mat.adjoint();
        d.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// (A + A†)/2
    pub fn hermitize(&self) -> Operator {
        Self { mat: (&self.mat + self.mat.adjoint()) * C64::new(0.5, 0.0) }
    }

    /// Eigenvalues assuming the operator is (numerically) Hermitian.
    pub fn eigenvalues_hermitian(&self) -> Vec<f64> {
        let eig = self.hermitize().mat.symmetric_eigen();
        let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues_hermitian()[0]
    }

    /// Tr(self · other)
    pub fn trace_product(&self, other: &Operator) -> C64 {
        assert_eq!(self.dim(), other.dim());
        let n = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for k in 0..n {
                acc += self.mat[(i, k)] * other.mat[(k, i)];
            }
        }
        acc
    }

    /// Tr(ρ²), real part.
    pub fn purity(&self) -> f64 {
        self.trace_product(self).re
    }

    /// ⟨O⟩ = Tr(ρ O) for a density operator ρ = self.
    pub fn expectation(&self, observable: &Operator) -> C64 {
        self.trace_product(observable)
    }

    /// Trace distance ½‖A − B‖₁ between two Hermitian operators.
    pub fn trace_distance(&self, other: &Operator) -> f64 {
        let d = Operator::from_matrix(&self.mat - &other.mat).hermitize();
        0.5 * d.eigenvalues_hermitian().iter().map(|e| e.abs()).sum::<f64>()
    }

    /// Density-operator diagnostics against the standard tolerances.
    pub fn density_diagnostics(&self) -> DensityDiagnostics {
        DensityDiagnostics {
            trace_error: (self.trace() - C64::new(1.0, 0.0)).norm(),
            herm_residual: self.herm_residual(),
            min_eigenvalue: self.min_eigenvalue(),
        }
    }
}

/// Tolerances fixed across the crate: eigenvalues above -POSITIVITY_TOL are
/// treated as numerical zeros. No projection back onto the positive cone is
/// ever performed; violations are diagnostics.
pub const POSITIVITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy)]
pub struct DensityDiagnostics {
    pub trace_error: f64,
    pub herm_residual: f64,
    pub min_eigenvalue: f64,
}

impl DensityDiagnostics {
    pub fn is_valid(&self) -> bool {
        self.trace_error < 1e-9 && self.herm_residual < 1e-10 && self.min_eigenvalue >= -POSITIVITY_TOL
    }
}

impl std::ops::Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator { mat: &self.mat + &rhs.mat }
    }
}

impl std::ops::Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator { mat: &self.mat - &rhs.mat }
    }
}

impl std::ops::Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        Operator { mat: &self.mat * &rhs.mat }
    }
}

/// Pure state on a truncated space.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amp: Vector,
}

impl StateVector {
    pub fn from_vector(amp: Vector) -> Self {
        Self { amp }
    }

    /// Unit basis ket |idx⟩.
    pub fn basis(dim: usize, idx: usize) -> Self {
        assert!(idx < dim);
        let mut amp = Vector::zeros(dim);
        amp[idx] = C64::new(1.0, 0.0);
        Self { amp }
    }

    pub fn dim(&self) -> usize {
        self.amp.len()
    }

    pub fn amplitudes(&self) -> &Vector {
        &self.amp
    }

    pub fn get(&self, i: usize) -> C64 {
        self.amp[i]
    }

    pub fn norm(&self) -> f64 {
        self.amp.norm()
    }

    pub fn normalized(&self) -> Self {
        Self { amp: &self.amp / C64::new(self.norm(), 0.0) }
    }

    /// ⟨self|other⟩
    pub fn dot(&self, other: &StateVector) -> C64 {
        self.amp.dotc(&other.amp)
    }

    /// |self⟩⟨other|
    pub fn outer(&self, other: &StateVector) -> Operator {
        Operator { mat: &self.amp * other.amp.adjoint() }
    }

    /// |self⟩⟨self|
    pub fn projector(&self) -> Operator {
        self.outer(self)
    }

    pub fn tensor(&self, other: &StateVector) -> StateVector {
        Self { amp: self.amp.kronecker(&other.amp) }
    }

    pub fn apply(&self, op: &Operator) -> StateVector {
        assert_eq!(self.dim(), op.dim());
        Self { amp: op.matrix() * &self.amp }
    }
}

/// Annihilation operator on an N-dimensional truncated Fock space:
/// a[n-1, n] = √n.
pub fn annihilation(fock_dim: usize) -> Result<Operator> {
    if fock_dim < 2 {
        return Err(Error::DimensionMismatch(format!(
            "annihilation requires fock_dim >= 2, got {fock_dim}"
        )));
    }
    let mut m = Matrix::zeros(fock_dim, fock_dim);
    for n in 1..fock_dim {
        m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    Ok(Operator::from_matrix(m))
}

/// Number operator a†a.
pub fn number_operator(fock_dim: usize) -> Result<Operator> {
    let a = annihilation(fock_dim)?;
    Ok(&a.dagger() * &a)
}

/// σ_rs = |r⟩⟨s| on the two-level space.
pub fn atomic_projector(r: Level, s: Level) -> Operator {
    let mut m = Matrix::zeros(ATOM_DIM, ATOM_DIM);
    m[(r.index(), s.index())] = C64::new(1.0, 0.0);
    Operator::from_matrix(m)
}

/// σ_z = σ_ee − σ_gg.
pub fn sigma_z() -> Operator {
    &atomic_projector(Level::E, Level::E) - &atomic_projector(Level::G, Level::G)
}

/// Kronecker product; the second factor's index runs fastest, consistent
/// with [`HilbertLayout::compose`] when called as tensor(cavity, atom).
pub fn tensor(a: &Operator, b: &Operator) -> Operator {
    Operator::from_matrix(a.matrix().kronecker(b.matrix()))
}

/// Partial trace over the first tensor factor of dimension `d_first`.
pub fn partial_trace_first(rho: &Operator, d_first: usize, d_second: usize) -> Result<Operator> {
    if rho.dim() != d_first * d_second {
        return Err(Error::DimensionMismatch(format!(
            "partial trace: operator dim {} != {d_first} x {d_second}",
            rho.dim()
        )));
    }
    let mut out = Matrix::zeros(d_second, d_second);
    for i in 0..d_second {
        for j in 0..d_second {
            let mut acc = C64::new(0.0, 0.0);
            for n in 0..d_first {
                acc += rho.get(n * d_second + i, n * d_second + j);
            }
            out[(i, j)] = acc;
        }
    }
    Ok(Operator::from_matrix(out))
}

/// Reduced atomic density matrix: ρ_at[i,j] = Σ_n ⟨n,i|ρ|n,j⟩.
pub fn partial_trace_field(rho: &Operator, layout: &HilbertLayout) -> Result<Operator> {
    partial_trace_first(rho, layout.fock_dim(), ATOM_DIM)
}

/// Dressed kets |±⟩ = ½(√(2±χ)|e⟩ ± e^{−iφ_c}√(2∓χ)|g⟩).
pub fn dressed_states(phi_c: f64, chi: f64) -> Result<(StateVector, StateVector)> {
    if chi.abs() > 2.0 {
        return Err(Error::Domain(format!("|chi| must be <= 2, got {chi}")));
    }
    let phase = C64::from_polar(1.0, -phi_c);
    let cp = 0.5 * (2.0 + chi).sqrt();
    let cm = 0.5 * (2.0 - chi).sqrt();
    let mut plus = Vector::zeros(ATOM_DIM);
    plus[Level::E.index()] = C64::new(cp, 0.0);
    plus[Level::G.index()] = phase * cm;
    let mut minus = Vector::zeros(ATOM_DIM);
    minus[Level::E.index()] = C64::new(cm, 0.0);
    minus[Level::G.index()] = -phase * cp;
    Ok((StateVector::from_vector(plus), StateVector::from_vector(minus)))
}

/// The protected ket |+(t)⟩ = ½(√(2+χ)|e⟩ + e^{−iΦ(t)}√(2−χ)|g⟩) with
/// Φ(t) = φ_c − Δ_c t.
pub fn protected_state(t: f64, phi_c: f64, delta_c: f64, chi: f64) -> StateVector {
    let phi = phi_c - delta_c * t;
    let mut amp = Vector::zeros(ATOM_DIM);
    amp[Level::E.index()] = C64::new(0.5 * (2.0 + chi).sqrt(), 0.0);
    amp[Level::G.index()] = C64::from_polar(0.5 * (2.0 - chi).sqrt(), -phi);
    StateVector::from_vector(amp)
}
