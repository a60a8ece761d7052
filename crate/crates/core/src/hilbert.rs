//! Truncated Fock⊗qubit Hilbert space and the elementary operators on it.
//!
//! The field mode is truncated at a maximum photon number `n_max`, giving a
//! total dimension of `2 * (n_max + 1)`. The basis ordering is fixed:
//!
//! ```text
//! index(atom, n) = 2 n + (atom == e ? 1 : 0),   atom ∈ {g, e},  n ∈ [0, n_max]
//! ```
//!
//! i.e. |g,0⟩, |e,0⟩, |g,1⟩, |e,1⟩, … All index arithmetic elsewhere in the
//! crate (matrix construction, file output, tests) relies on this ordering.
//!
//! Operators are dense complex matrices; at the dimensions used here
//! (≤ ~100) the eigendecompositions dominate the cost regardless, and dense
//! storage keeps every construction exact and bit-deterministic.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = Complex64;

/// Atomic level of the two-level atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Atom {
    Ground,
    Excited,
}

impl Atom {
    /// Eigenvalue of σ_z on this level: +1 for |e⟩, −1 for |g⟩.
    pub fn sigma_z(self) -> f64 {
        match self {
            Atom::Excited => 1.0,
            Atom::Ground => -1.0,
        }
    }

    pub fn label(self) -> char {
        match self {
            Atom::Ground => 'g',
            Atom::Excited => 'e',
        }
    }
}

/// Truncated Fock⊗qubit space: photon numbers 0..=n_max times a two-level atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HilbertSpace {
    n_max: usize,
}

impl HilbertSpace {
    /// Create a space keeping photon numbers up to `n_max` (≥ 1).
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::InvalidArgument(format!(
                "n_max must be >= 1, got {n_max}"
            )));
        }
        Ok(HilbertSpace { n_max })
    }

    pub fn n_max(self) -> usize {
        self.n_max
    }

    /// Total dimension, 2 (n_max + 1).
    pub fn dim(self) -> usize {
        2 * (self.n_max + 1)
    }

    /// Basis index of |atom, n⟩. Panics if `n > n_max`.
    pub fn index(self, atom: Atom, n: usize) -> usize {
        assert!(n <= self.n_max, "photon number {n} exceeds n_max {}", self.n_max);
        2 * n + match atom {
            Atom::Ground => 0,
            Atom::Excited => 1,
        }
    }

    /// Inverse of [`HilbertSpace::index`].
    pub fn basis_label(self, index: usize) -> (Atom, usize) {
        assert!(index < self.dim(), "index {index} out of range");
        let atom = if index % 2 == 0 { Atom::Ground } else { Atom::Excited };
        (atom, index / 2)
    }

    /// The unit basis vector |atom, n⟩.
    pub fn basis_state(self, atom: Atom, n: usize) -> StateVector {
        let mut amplitudes = DVector::zeros(self.dim());
        amplitudes[self.index(atom, n)] = C64::new(1.0, 0.0);
        StateVector {
            space: self,
            amplitudes,
        }
    }
}

/// Dense complex operator on a [`HilbertSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    space: HilbertSpace,
    matrix: DMatrix<C64>,
}

impl OperatorMatrix {
    pub fn zeros(space: HilbertSpace) -> Self {
        OperatorMatrix {
            space,
            matrix: DMatrix::zeros(space.dim(), space.dim()),
        }
    }

    pub fn identity(space: HilbertSpace) -> Self {
        OperatorMatrix {
            space,
            matrix: DMatrix::identity(space.dim(), space.dim()),
        }
    }

    /// Wrap an existing matrix. Panics on dimension mismatch.
    pub fn from_matrix(space: HilbertSpace, matrix: DMatrix<C64>) -> Self {
        assert_eq!(matrix.nrows(), space.dim(), "row count != space dim");
        assert_eq!(matrix.ncols(), space.dim(), "col count != space dim");
        OperatorMatrix { space, matrix }
    }

    /// Diagonal operator with entries given per basis label.
    pub fn from_diagonal_fn(space: HilbertSpace, f: impl Fn(Atom, usize) -> C64) -> Self {
        let mut m = DMatrix::zeros(space.dim(), space.dim());
        for i in 0..space.dim() {
            let (atom, n) = space.basis_label(i);
            m[(i, i)] = f(atom, n);
        }
        OperatorMatrix { space, matrix: m }
    }

    pub fn space(&self) -> HilbertSpace {
        self.space
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// Matrix element ⟨bra| M |ket⟩ for basis labels.
    pub fn element(&self, bra: (Atom, usize), ket: (Atom, usize)) -> C64 {
        self.matrix[(self.space.index(bra.0, bra.1), self.space.index(ket.0, ket.1))]
    }

    /// Hermitian adjoint M†.
    pub fn adjoint(&self) -> Self {
        OperatorMatrix {
            space: self.space,
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        OperatorMatrix {
            space: self.space,
            matrix: self.matrix.map(|z| z * c),
        }
    }

    /// Apply to a state: M|ψ⟩.
    pub fn apply(&self, state: &StateVector) -> StateVector {
        assert_eq!(self.space, state.space, "operator/state space mismatch");
        StateVector {
            space: self.space,
            amplitudes: &self.matrix * &state.amplitudes,
        }
    }

    /// Largest entry magnitude, max_{jk} |M_{jk}|.
    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// max |M − M†|; zero for Hermitian operators.
    pub fn hermiticity_error(&self) -> f64 {
        let adj = self.matrix.adjoint();
        (&self.matrix - adj).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// max |M†M − I|; zero for unitary operators.
    pub fn unitarity_error(&self) -> f64 {
        let dim = self.dim();
        let prod = self.matrix.adjoint() * &self.matrix;
        let mut err: f64 = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                let expected = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                err = err.max((prod[(i, j)] - expected).norm());
            }
        }
        err
    }

    /// max |A − B| entrywise.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.space, other.space, "space mismatch");
        (&self.matrix - &other.matrix)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(self.space, rhs.space, "space mismatch");
        OperatorMatrix {
            space: self.space,
            matrix: &self.matrix + &rhs.matrix,
        }
    }
}

impl std::ops::Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(self.space, rhs.space, "space mismatch");
        OperatorMatrix {
            space: self.space,
            matrix: &self.matrix - &rhs.matrix,
        }
    }
}

impl std::ops::Mul for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(self.space, rhs.space, "space mismatch");
        OperatorMatrix {
            space: self.space,
            matrix: &self.matrix * &rhs.matrix,
        }
    }
}

/// Pure state on a [`HilbertSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    space: HilbertSpace,
    amplitudes: DVector<C64>,
}

impl StateVector {
    pub fn from_amplitudes(space: HilbertSpace, amplitudes: DVector<C64>) -> Self {
        assert_eq!(amplitudes.len(), space.dim(), "amplitude count != space dim");
        StateVector { space, amplitudes }
    }

    pub fn space(&self) -> HilbertSpace {
        self.space
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, atom: Atom, n: usize) -> C64 {
        self.amplitudes[self.space.index(atom, n)]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        assert!(n > 0.0, "cannot normalize the zero vector");
        StateVector {
            space: self.space,
            amplitudes: self.amplitudes.map(|z| z / n),
        }
    }

    /// Inner product ⟨self|other⟩.
    pub fn overlap(&self, other: &StateVector) -> C64 {
        assert_eq!(self.space, other.space, "space mismatch");
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// Projection probability |⟨self|other⟩|².
    pub fn probability(&self, other: &StateVector) -> f64 {
        self.overlap(other).norm_sqr()
    }
}

/// Field-mode annihilation, creation and number operators, each acting as the
/// identity on the atom.
///
/// ⟨n−1| a |n⟩ = √n for 1 ≤ n ≤ n_max; the number operator is built directly
/// as diag(0..=n_max) so it is exact on the whole truncated space.
pub fn ladder_operators(space: HilbertSpace) -> (OperatorMatrix, OperatorMatrix, OperatorMatrix) {
    let mut a = DMatrix::zeros(space.dim(), space.dim());
    for n in 1..=space.n_max() {
        let amp = C64::new((n as f64).sqrt(), 0.0);
        for atom in [Atom::Ground, Atom::Excited] {
            a[(space.index(atom, n - 1), space.index(atom, n))] = amp;
        }
    }
    let a = OperatorMatrix {
        space,
        matrix: a,
    };
    let a_dag = a.adjoint();
    let number = OperatorMatrix::from_diagonal_fn(space, |_, n| C64::new(n as f64, 0.0));
    (a, a_dag, number)
}

/// Atomic operators σ_z = |e⟩⟨e| − |g⟩⟨g|, σ_+ = |e⟩⟨g| ⊗ I_field and σ_− = σ_+†.
pub fn qubit_operators(space: HilbertSpace) -> (OperatorMatrix, OperatorMatrix, OperatorMatrix) {
    let sigma_z = OperatorMatrix::from_diagonal_fn(space, |atom, _| C64::new(atom.sigma_z(), 0.0));
    let mut sp = DMatrix::zeros(space.dim(), space.dim());
    for n in 0..=space.n_max() {
        sp[(space.index(Atom::Excited, n), space.index(Atom::Ground, n))] = C64::new(1.0, 0.0);
    }
    let sigma_plus = OperatorMatrix { space, matrix: sp };
    let sigma_minus = sigma_plus.adjoint();
    (sigma_z, sigma_plus, sigma_minus)
}
