//! Quantum Rabi model operators and the analytic Jaynes–Cummings spectrum.
//!
//! The Rabi Hamiltonian splits as H_R = H_JC + H_V with
//!
//! ```text
//! H_JC = (ω₀/2) σ_z + ω_c a†a + λ₀ (a σ₊ + a† σ₋)
//! H_V  = λ₀ (a† σ₊ + a σ₋)
//! ```
//!
//! Units: ω_c ≡ 1 internally; all frequencies and times are expressed in
//! ω_c-units (frequencies in ω_c, times in 1/ω_c).
//!
//! The phase kick is the diagonal unitary P = exp[−iπ(a†a + σ_z/2)/2], whose
//! square is i times the parity operator Π = −σ_z(−1)^{a†a}. Conjugation by P
//! flips the sign of the counter-rotating part: P†H_RP = H_JC − H_V.
//!
//! The excited JC spectrum comes in doublets |n,±⟩ spanning
//! {|e,n−1⟩, |g,n⟩} with energies ε_{n,±} = (n−1/2)ω_c ± √(δ²/4 + nλ₀²),
//! δ = ω₀ − ω_c, and ground energy ε₀ = −ω₀/2.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{ladder_operators, qubit_operators, Atom, HilbertSpace, OperatorMatrix, StateVector, C64};

/// Physical frequencies and coupling defining the Rabi Hamiltonian.
///
/// `lambda_0` is half the vacuum Rabi frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSystemParams")]
pub struct SystemParams {
    omega_0: f64,
    omega_c: f64,
    lambda_0: f64,
}

#[derive(Deserialize)]
struct RawSystemParams {
    omega_0: f64,
    omega_c: f64,
    lambda_0: f64,
}

impl TryFrom<RawSystemParams> for SystemParams {
    type Error = Error;
    fn try_from(raw: RawSystemParams) -> Result<Self> {
        SystemParams::new(raw.omega_0, raw.omega_c, raw.lambda_0)
    }
}

impl SystemParams {
    pub fn new(omega_0: f64, omega_c: f64, lambda_0: f64) -> Result<Self> {
        if !(omega_c > 0.0) || !omega_c.is_finite() {
            return Err(Error::InvalidArgument(format!("omega_c must be > 0, got {omega_c}")));
        }
        if !(omega_0 > 0.0) || !omega_0.is_finite() {
            return Err(Error::InvalidArgument(format!("omega_0 must be > 0, got {omega_0}")));
        }
        if !(lambda_0 >= 0.0) || !lambda_0.is_finite() {
            return Err(Error::InvalidArgument(format!("lambda_0 must be >= 0, got {lambda_0}")));
        }
        Ok(SystemParams { omega_0, omega_c, lambda_0 })
    }

    /// Resonant system ω₀ = ω_c = 1 with the given coupling.
    pub fn resonant(lambda_0: f64) -> Result<Self> {
        SystemParams::new(1.0, 1.0, lambda_0)
    }

    pub fn omega_0(&self) -> f64 {
        self.omega_0
    }

    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }

    pub fn lambda_0(&self) -> f64 {
        self.lambda_0
    }

    /// Detuning δ = ω₀ − ω_c.
    pub fn detuning(&self) -> f64 {
        self.omega_0 - self.omega_c
    }

    /// Ground-state energy of H_JC, ε₀ = −ω₀/2.
    pub fn ground_energy(&self) -> f64 {
        -self.omega_0 / 2.0
    }
}

/// Doublet branch: `Plus` is the higher, `Minus` the lower level for λ₀ > 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn label(self) -> char {
        match self {
            Branch::Plus => '+',
            Branch::Minus => '-',
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// Label of a projector/initial state: a bare basis state like `g,0` or a
/// dressed doublet member like `2,-`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum StateLabel {
    Bare(Atom, usize),
    Dressed(usize, Branch),
}

impl StateLabel {
    /// CSV-safe column suffix: `g,0` → `g0`, `2,-` → `2-`.
    pub fn column_suffix(&self) -> String {
        match self {
            StateLabel::Bare(atom, n) => format!("{}{}", atom.label(), n),
            StateLabel::Dressed(n, s) => format!("{}{}", n, s.label()),
        }
    }

    /// Concrete state vector for this label.
    ///
    /// Dressed labels need the system parameters to fix the mixing angle.
    pub fn resolve(&self, params: &SystemParams, space: HilbertSpace) -> Result<StateVector> {
        match *self {
            StateLabel::Bare(atom, n) => {
                if n > space.n_max() {
                    return Err(Error::InvalidArgument(format!(
                        "state {self} outside truncation n_max = {}",
                        space.n_max()
                    )));
                }
                Ok(space.basis_state(atom, n))
            }
            StateLabel::Dressed(n, s) => {
                let doublet = dressed_doublet(params, space, n)?;
                Ok(doublet.vector(s).clone())
            }
        }
    }
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateLabel::Bare(atom, n) => write!(f, "{},{}", atom.label(), n),
            StateLabel::Dressed(n, s) => write!(f, "{},{}", n, s.label()),
        }
    }
}

impl FromStr for StateLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("cannot parse state label '{s}' (expected e.g. 'g,0', 'e,1', '2,-' or '2,+')"));
        let (head, tail) = s.split_once(',').ok_or_else(bad)?;
        let head = head.trim();
        let tail = tail.trim();
        match head {
            "g" => Ok(StateLabel::Bare(Atom::Ground, tail.parse().map_err(|_| bad())?)),
            "e" => Ok(StateLabel::Bare(Atom::Excited, tail.parse().map_err(|_| bad())?)),
            _ => {
                let n: usize = head.parse().map_err(|_| bad())?;
                let branch = match tail {
                    "+" => Branch::Plus,
                    "-" => Branch::Minus,
                    _ => return Err(bad()),
                };
                if n < 1 {
                    return Err(bad());
                }
                Ok(StateLabel::Dressed(n, branch))
            }
        }
    }
}

impl From<StateLabel> for String {
    fn from(l: StateLabel) -> String {
        l.to_string()
    }
}

impl TryFrom<String> for StateLabel {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// The Hamiltonians H_R = H_JC + H_V.
///
/// Returns `(h_rabi, h_jc, h_v)`, all Hermitian by construction.
pub fn build_hamiltonians(
    params: &SystemParams,
    space: HilbertSpace,
) -> (OperatorMatrix, OperatorMatrix, OperatorMatrix) {
    let (a, a_dag, number) = ladder_operators(space);
    let (sigma_z, sigma_plus, sigma_minus) = qubit_operators(space);
    let half_w0 = C64::new(params.omega_0 / 2.0, 0.0);
    let wc = C64::new(params.omega_c, 0.0);
    let l0 = C64::new(params.lambda_0, 0.0);

    let co_rotating = &(&a * &sigma_plus) + &(&a_dag * &sigma_minus);
    let h_jc = &(&sigma_z.scale(half_w0) + &number.scale(wc)) + &co_rotating.scale(l0);
    let counter_rotating = &(&a_dag * &sigma_plus) + &(&a * &sigma_minus);
    let h_v = counter_rotating.scale(l0);
    let h_rabi = &h_jc + &h_v;
    (h_rabi, h_jc, h_v)
}

/// Parity operator Π = −σ_z(−1)^{a†a}; diagonal, squares to the identity and
/// commutes with H_R.
pub fn parity_operator(space: HilbertSpace) -> OperatorMatrix {
    OperatorMatrix::from_diagonal_fn(space, |atom, n| {
        let sign = -atom.sigma_z() * if n % 2 == 0 { 1.0 } else { -1.0 };
        C64::new(sign, 0.0)
    })
}

/// Generator G = π(a†a + σ_z/2)/2 of the phase kick; P = exp(−iG).
///
/// Diagonal and Hermitian, so the partial kick exp(−iGξ) used for
/// dense-in-time plotting is a simple phase profile.
pub fn kick_generator(space: HilbertSpace) -> OperatorMatrix {
    OperatorMatrix::from_diagonal_fn(space, |atom, n| {
        C64::new(PI * (n as f64 + atom.sigma_z() / 2.0) / 2.0, 0.0)
    })
}

/// Phase-kick unitary P = exp[−iπ(a†a + σ_z/2)/2]; satisfies P² = iΠ.
pub fn kick_operator(space: HilbertSpace) -> OperatorMatrix {
    OperatorMatrix::from_diagonal_fn(space, |atom, n| {
        let phase = -PI * (n as f64 + atom.sigma_z() / 2.0) / 2.0;
        C64::new(0.0, phase).exp()
    })
}

/// Realize the kick as free evolution: exp[−i(ω₀σ_z/2 + ω_c a†a) τ_P] with
/// τ_P = (2m + 1/2)π/ω_c, which equals P up to a global phase.
///
/// Only the resonant case ω₀ = ω_c is supported (the free phases of the two
/// atomic levels must advance at the field rate for the identification to
/// close).
pub fn kick_from_free_evolution(
    params: &SystemParams,
    space: HilbertSpace,
    m: usize,
) -> Result<OperatorMatrix> {
    let rel = (params.omega_0 - params.omega_c).abs() / params.omega_c.max(params.omega_0);
    if rel > 1e-12 {
        return Err(Error::UnsupportedRegime(format!(
            "free-evolution kick requires resonance omega_0 = omega_c (got omega_0 = {}, omega_c = {})",
            params.omega_0, params.omega_c
        )));
    }
    let tau_p = (2.0 * m as f64 + 0.5) * PI / params.omega_c;
    Ok(OperatorMatrix::from_diagonal_fn(space, |atom, n| {
        let energy = params.omega_0 * atom.sigma_z() / 2.0 + params.omega_c * n as f64;
        C64::new(0.0, -energy * tau_p).exp()
    }))
}

/// Duration of the free-evolution kick realization, τ_P = (2m + 1/2)π/ω_c.
pub fn free_evolution_kick_duration(params: &SystemParams, m: usize) -> f64 {
    (2.0 * m as f64 + 0.5) * PI / params.omega_c
}

/// All model operators on one space.
#[derive(Debug, Clone)]
pub struct ModelOperators {
    pub params: SystemParams,
    pub space: HilbertSpace,
    pub h_rabi: OperatorMatrix,
    pub h_jc: OperatorMatrix,
    pub h_v: OperatorMatrix,
    pub parity: OperatorMatrix,
    pub kick: OperatorMatrix,
}

impl ModelOperators {
    pub fn new(params: SystemParams, space: HilbertSpace) -> Self {
        let (h_rabi, h_jc, h_v) = build_hamiltonians(&params, space);
        ModelOperators {
            params,
            space,
            h_rabi,
            h_jc,
            h_v,
            parity: parity_operator(space),
            kick: kick_operator(space),
        }
    }
}

/// Closed-form doublet energies ε_{n,±} = (n − 1/2)ω_c ± √(δ²/4 + nλ₀²).
pub fn dressed_energies(params: &SystemParams, n: usize) -> (f64, f64) {
    assert!(n >= 1, "doublets exist for n >= 1");
    let delta = params.detuning();
    let omega = (delta * delta / 4.0 + n as f64 * params.lambda_0 * params.lambda_0).sqrt();
    let center = (n as f64 - 0.5) * params.omega_c;
    (center + omega, center - omega)
}

/// Δ_s = ε_{2,s} − ε₀ from the closed form, independent of any truncation.
pub fn delta_s(params: &SystemParams, s: Branch) -> f64 {
    let (ep, em) = dressed_energies(params, 2);
    let e = match s {
        Branch::Plus => ep,
        Branch::Minus => em,
    };
    e - params.ground_energy()
}

/// JC eigen-doublet |n,±⟩ with fixed phase gauge.
///
/// Gauge: d_{n,+} = ⟨e,n−1|n,+⟩ ≥ 0 and ⟨g,n|n,−⟩ > 0, which makes
/// d_{n,−} ≤ 0 (at resonance d_{n,±} = ±1/√2). Predictions that need a
/// positive coupling use |d_{n,s}|.
#[derive(Debug, Clone)]
pub struct DressedDoublet {
    pub n: usize,
    pub energy_plus: f64,
    pub energy_minus: f64,
    pub vec_plus: StateVector,
    pub vec_minus: StateVector,
    pub d_plus: f64,
    pub d_minus: f64,
    pub ground_energy: f64,
}

impl DressedDoublet {
    pub fn energy(&self, s: Branch) -> f64 {
        match s {
            Branch::Plus => self.energy_plus,
            Branch::Minus => self.energy_minus,
        }
    }

    pub fn vector(&self, s: Branch) -> &StateVector {
        match s {
            Branch::Plus => &self.vec_plus,
            Branch::Minus => &self.vec_minus,
        }
    }

    /// Overlap d_{n,s} = ⟨e,n−1|n,s⟩ (signed, per the gauge above).
    pub fn overlap(&self, s: Branch) -> f64 {
        match s {
            Branch::Plus => self.d_plus,
            Branch::Minus => self.d_minus,
        }
    }

    /// Energy above the JC ground state, ε_{n,s} − ε₀ (Δ_s for n = 2).
    pub fn delta(&self, s: Branch) -> f64 {
        self.energy(s) - self.ground_energy
    }
}

/// Closed-form diagonalization of the n-excitation block {|e,n−1⟩, |g,n⟩}.
pub fn dressed_doublet(params: &SystemParams, space: HilbertSpace, n: usize) -> Result<DressedDoublet> {
    if n < 1 {
        return Err(Error::InvalidArgument(format!(
            "doublet index n must be >= 1, got {n}"
        )));
    }
    if n > space.n_max() {
        return Err(Error::InvalidArgument(format!(
            "doublet n = {n} needs |g,{n}⟩ but n_max = {}",
            space.n_max()
        )));
    }
    let (energy_plus, energy_minus) = dressed_energies(params, n);
    // mixing angle: tan(2χ) = 2λ₀√n / δ with χ ∈ [0, π/2]
    let chi = 0.5 * (2.0 * params.lambda_0 * (n as f64).sqrt()).atan2(params.detuning());
    let (sin_chi, cos_chi) = chi.sin_cos();

    let dim = space.dim();
    let ie = space.index(Atom::Excited, n - 1);
    let ig = space.index(Atom::Ground, n);

    let mut plus = nalgebra::DVector::zeros(dim);
    plus[ie] = C64::new(cos_chi, 0.0);
    plus[ig] = C64::new(sin_chi, 0.0);
    let mut minus = nalgebra::DVector::zeros(dim);
    minus[ie] = C64::new(-sin_chi, 0.0);
    minus[ig] = C64::new(cos_chi, 0.0);

    Ok(DressedDoublet {
        n,
        energy_plus,
        energy_minus,
        vec_plus: StateVector::from_amplitudes(space, plus),
        vec_minus: StateVector::from_amplitudes(space, minus),
        d_plus: cos_chi,
        d_minus: -sin_chi,
        ground_energy: params.ground_energy(),
    })
}
