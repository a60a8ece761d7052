//! Exact propagators and composition of the phase-kicked evolution.
//!
//! One period applies U_R = exp(−iH_Rτ_I) followed by the kick P, so after N
//! kicks U(NT) = (P e^{−iH_Rτ_I})^N with T = τ_I + τ_P. Propagators come from
//! a Hermitian eigendecomposition (exact for time-independent generators, no
//! product-formula error), and every trace records per-sample probabilities
//! together with the state norm.
//!
//! Numeric guards, enforced at every sample:
//! * norm within [`UNITARITY_TOL`] of 1 (unitarity of the composed evolution);
//! * combined population of the top two Fock levels below
//!   [`LEAKAGE_THRESHOLD`] (otherwise the truncation is too small and the
//!   trace aborts with [`Error::TruncationLeakage`]).
//!
//! Inside a kick the state is interpolated along the kick generator,
//! exp(−iGξ) with ξ = t′/τ_P; the endpoints are exact, the interior is
//! presentation-only.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{HilbertSpace, OperatorMatrix, StateVector, C64};
use crate::model::{kick_generator, ModelOperators, StateLabel};

/// Max allowed deviation of a state norm (or composed unitary) from 1.
pub const UNITARITY_TOL: f64 = 1e-10;

/// Max tolerated combined population of the top two Fock levels.
pub const LEAKAGE_THRESHOLD: f64 = 1e-8;

/// Hermiticity required of propagator generators.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Re-check the composed unitary every this many multiplications.
const UNITARITY_CHECK_STRIDE: usize = 64;

/// Timing of the kick sequence: free interval τ_I, kick duration τ_P and the
/// number of kicks N. The period is T = τ_I + τ_P.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawKickSchedule")]
pub struct KickSchedule {
    tau_i: f64,
    tau_p: f64,
    n_kicks: usize,
}

#[derive(Deserialize)]
struct RawKickSchedule {
    tau_i: f64,
    tau_p: f64,
    n_kicks: usize,
}

impl TryFrom<RawKickSchedule> for KickSchedule {
    type Error = Error;
    fn try_from(raw: RawKickSchedule) -> Result<Self> {
        KickSchedule::new(raw.tau_i, raw.tau_p, raw.n_kicks)
    }
}

impl KickSchedule {
    pub fn new(tau_i: f64, tau_p: f64, n_kicks: usize) -> Result<Self> {
        if !(tau_i > 0.0) || !tau_i.is_finite() {
            return Err(Error::InvalidArgument(format!("tau_i must be > 0, got {tau_i}")));
        }
        if !(tau_p >= 0.0) || !tau_p.is_finite() {
            return Err(Error::InvalidArgument(format!("tau_p must be >= 0, got {tau_p}")));
        }
        Ok(KickSchedule { tau_i, tau_p, n_kicks })
    }

    pub fn tau_i(&self) -> f64 {
        self.tau_i
    }

    pub fn tau_p(&self) -> f64 {
        self.tau_p
    }

    pub fn n_kicks(&self) -> usize {
        self.n_kicks
    }

    /// Period T = τ_I + τ_P.
    pub fn period(&self) -> f64 {
        self.tau_i + self.tau_p
    }

    /// Same timing with a different kick count.
    pub fn with_kicks(&self, n_kicks: usize) -> Self {
        KickSchedule { n_kicks, ..*self }
    }
}

/// Cached Hermitian eigendecomposition H = V diag(E) V†.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    space: HilbertSpace,
    energies: DVector<f64>,
    vectors: DMatrix<C64>,
}

impl HermitianEigen {
    /// Diagonalize a Hermitian operator. Rejects inputs with
    /// max|H − H†| > [`HERMITICITY_TOL`].
    pub fn new(h: &OperatorMatrix) -> Result<Self> {
        let herm = h.hermiticity_error();
        if herm > HERMITICITY_TOL {
            return Err(Error::InvalidArgument(format!(
                "propagator generator is not Hermitian (max|H - H\u{2020}| = {herm:.3e})"
            )));
        }
        let eig = h.matrix().clone().symmetric_eigen();
        Ok(HermitianEigen {
            space: h.space(),
            energies: eig.eigenvalues,
            vectors: eig.eigenvectors,
        })
    }

    pub fn space(&self) -> HilbertSpace {
        self.space
    }

    pub fn energies(&self) -> &DVector<f64> {
        &self.energies
    }

    pub fn vectors(&self) -> &DMatrix<C64> {
        &self.vectors
    }

    /// U(t) = V exp(−i diag(E) t) V†.
    pub fn propagator(&self, t: f64) -> OperatorMatrix {
        let mut scaled = self.vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            let phase = C64::new(0.0, -self.energies[j] * t).exp();
            for z in col.iter_mut() {
                *z *= phase;
            }
        }
        OperatorMatrix::from_matrix(self.space, scaled * self.vectors.adjoint())
    }

    /// V†ψ — state in the eigenbasis.
    pub fn to_eigenbasis(&self, amplitudes: &DVector<C64>) -> DVector<C64> {
        self.vectors.adjoint() * amplitudes
    }

    /// V (phases(t) ∘ c) — evolve an eigenbasis state back to the
    /// computational basis at time t.
    pub fn evolve_from_eigenbasis(&self, coeffs: &DVector<C64>, t: f64) -> DVector<C64> {
        let phased = DVector::from_fn(coeffs.len(), |j, _| {
            coeffs[j] * C64::new(0.0, -self.energies[j] * t).exp()
        });
        &self.vectors * phased
    }

    /// exp(−iHt)|ψ⟩ via two matrix-vector products.
    pub fn evolve(&self, state: &StateVector, t: f64) -> StateVector {
        let c = self.to_eigenbasis(state.amplitudes());
        StateVector::from_amplitudes(self.space, self.evolve_from_eigenbasis(&c, t))
    }
}

/// Exact unitary exp(−iHt) for a Hermitian H.
pub fn propagator(h: &OperatorMatrix, t: f64) -> Result<OperatorMatrix> {
    Ok(HermitianEigen::new(h)?.propagator(t))
}

/// One period of the kicked sequence, P·exp(−iH_Rτ_I). U(NT) is its N-th power.
pub fn kicked_step(model: &ModelOperators, schedule: &KickSchedule) -> Result<OperatorMatrix> {
    let free = propagator(&model.h_rabi, schedule.tau_i())?;
    Ok(&model.kick * &free)
}

/// U(NT) = (P e^{−iH_Rτ_I})^N by repeated multiplication.
///
/// Unitarity is re-checked every 64 multiplications (and at the end); drift
/// beyond [`UNITARITY_TOL`] aborts with a numerical-guard error rather than
/// being silently corrected.
pub fn kicked_unitary(model: &ModelOperators, schedule: &KickSchedule) -> Result<OperatorMatrix> {
    let step = kicked_step(model, schedule)?;
    let mut u = OperatorMatrix::identity(model.space);
    for k in 1..=schedule.n_kicks() {
        u = &step * &u;
        if k % UNITARITY_CHECK_STRIDE == 0 {
            check_unitary(&u, k)?;
        }
    }
    check_unitary(&u, schedule.n_kicks())?;
    Ok(u)
}

fn check_unitary(u: &OperatorMatrix, step: usize) -> Result<()> {
    let err = u.unitarity_error();
    if err > UNITARITY_TOL {
        return Err(Error::NumericalGuard(format!(
            "composed unitary drifted from unitarity after {step} steps (max|U\u{2020}U - I| = {err:.3e})"
        )));
    }
    Ok(())
}

/// Sampled projector probabilities and norms along an evolution.
///
/// `times` are strictly increasing; each sample row holds |⟨v_label|ψ(t)⟩|²
/// for the configured labels plus the state norm.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationTrace {
    labels: Vec<String>,
    times: Vec<f64>,
    probabilities: Vec<Vec<f64>>,
    norms: Vec<f64>,
}

impl PopulationTrace {
    pub(crate) fn with_labels(labels: Vec<String>) -> Self {
        PopulationTrace {
            labels,
            times: Vec::new(),
            probabilities: Vec::new(),
            norms: Vec::new(),
        }
    }

    pub(crate) fn push_sample(&mut self, time: f64, probabilities: Vec<f64>, norm: f64) {
        debug_assert_eq!(probabilities.len(), self.labels.len());
        debug_assert!(self.times.last().map_or(true, |last| time > *last));
        self.times.push(time);
        self.probabilities.push(probabilities);
        self.norms.push(norm);
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Probabilities of sample `i`, ordered like `labels`.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.probabilities[i]
    }

    pub fn column(&self, label: &str) -> Option<Vec<f64>> {
        let j = self.labels.iter().position(|l| l == label)?;
        Some(self.probabilities.iter().map(|row| row[j]).collect())
    }

    /// Time and value of the first global maximum of a column.
    pub fn max_probability(&self, label: &str) -> Option<(f64, f64)> {
        let col = self.column(label)?;
        let mut best = (self.times[0], col[0]);
        for (t, p) in self.times.iter().zip(col.iter()).skip(1) {
            if *p > best.1 {
                best = (*t, *p);
            }
        }
        Some(best)
    }

    /// Time and value of the first global minimum of a column.
    pub fn min_probability(&self, label: &str) -> Option<(f64, f64)> {
        let col = self.column(label)?;
        let mut best = (self.times[0], col[0]);
        for (t, p) in self.times.iter().zip(col.iter()).skip(1) {
            if *p < best.1 {
                best = (*t, *p);
            }
        }
        Some(best)
    }
}

/// Reusable kicked-evolution engine: one eigendecomposition of H_R shared by
/// any number of schedules (a τ_I scan re-uses it for every grid point).
pub struct KickedEvolver {
    space: HilbertSpace,
    eigen: HermitianEigen,
    /// Diagonal of the kick generator G = π(a†a + σ_z/2)/2.
    kick_phase: DVector<f64>,
    /// Full kick P expressed in the H_R eigenbasis, V†PV.
    kick_in_eigenbasis: DMatrix<C64>,
}

impl KickedEvolver {
    pub fn new(model: &ModelOperators) -> Result<Self> {
        let eigen = HermitianEigen::new(&model.h_rabi)?;
        let generator = kick_generator(model.space);
        let kick_phase = DVector::from_fn(model.space.dim(), |i, _| generator.matrix()[(i, i)].re);
        let kick_in_eigenbasis = eigen.vectors.adjoint() * model.kick.matrix() * &eigen.vectors;
        Ok(KickedEvolver {
            space: model.space,
            eigen,
            kick_phase,
            kick_in_eigenbasis,
        })
    }

    pub fn eigen(&self) -> &HermitianEigen {
        &self.eigen
    }

    fn apply_kick_fraction(&self, amplitudes: &mut DVector<C64>, xi: f64) {
        for (z, phase) in amplitudes.iter_mut().zip(self.kick_phase.iter()) {
            *z *= C64::new(0.0, -phase * xi).exp();
        }
    }

    /// Apply the full kick P (diagonal phases) to computational-basis amplitudes.
    pub fn apply_full_kick(&self, amplitudes: &mut DVector<C64>) {
        self.apply_kick_fraction(amplitudes, 1.0);
    }

    /// Norm and leakage guard for an externally driven state.
    pub fn guard_state(&self, time: f64, amplitudes: &DVector<C64>) -> Result<f64> {
        self.guard_sample(time, amplitudes)
    }

    /// Indices of the top two Fock levels (both atomic states).
    fn leak_indices(&self) -> [usize; 4] {
        let n_max = self.space.n_max();
        [
            2 * n_max,
            2 * n_max + 1,
            2 * (n_max - 1),
            2 * (n_max - 1) + 1,
        ]
    }

    fn guard_sample(&self, time: f64, amplitudes: &DVector<C64>) -> Result<f64> {
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > UNITARITY_TOL {
            return Err(Error::NumericalGuard(format!(
                "state norm drifted to {norm} at t = {time:.6}"
            )));
        }
        let leak: f64 = self
            .leak_indices()
            .iter()
            .map(|&i| amplitudes[i].norm_sqr())
            .sum();
        if leak > LEAKAGE_THRESHOLD {
            return Err(Error::TruncationLeakage {
                time,
                population: leak,
                n_max: self.space.n_max(),
            });
        }
        Ok(norm)
    }

    /// Dense-in-time kicked trace.
    ///
    /// Each free interval is sampled at `samples_per_interval` interior points
    /// (the last lands exactly on the interval end); each kick at half that
    /// density along the interpolated kick generator. With τ_P = 0 the kick is
    /// applied instantaneously and only the post-kick state is recorded.
    pub fn trace(
        &self,
        schedule: &KickSchedule,
        initial: &StateVector,
        samples_per_interval: usize,
        projectors: &[(String, StateVector)],
    ) -> Result<PopulationTrace> {
        if samples_per_interval < 1 {
            return Err(Error::InvalidArgument(
                "samples_per_interval must be >= 1".into(),
            ));
        }
        self.check_initial(initial)?;
        let s_free = samples_per_interval;
        let s_kick = (samples_per_interval / 2).max(1);
        let vectors: Vec<&StateVector> = projectors.iter().map(|(_, v)| v).collect();

        let mut trace =
            PopulationTrace::with_labels(projectors.iter().map(|(l, _)| l.clone()).collect());
        let mut psi = initial.amplitudes().clone();
        self.record(&mut trace, 0.0, &psi, &vectors)?;

        let tau_i = schedule.tau_i();
        let tau_p = schedule.tau_p();
        for k in 0..schedule.n_kicks() {
            let t0 = k as f64 * schedule.period();
            let coeffs = self.eigen.to_eigenbasis(&psi);
            for j in 1..=s_free {
                let tj = tau_i * j as f64 / s_free as f64;
                let sample = self.eigen.evolve_from_eigenbasis(&coeffs, tj);
                if j == s_free {
                    psi = sample;
                    if tau_p == 0.0 {
                        // instantaneous kick replaces the interval-end sample
                        self.apply_kick_fraction(&mut psi, 1.0);
                        self.record(&mut trace, t0 + tj, &psi, &vectors)?;
                    } else {
                        self.record(&mut trace, t0 + tj, &psi, &vectors)?;
                    }
                } else {
                    self.record(&mut trace, t0 + tj, &sample, &vectors)?;
                }
            }
            if tau_p > 0.0 {
                let pre_kick = psi.clone();
                for l in 1..=s_kick {
                    let xi = l as f64 / s_kick as f64;
                    let mut sample = pre_kick.clone();
                    self.apply_kick_fraction(&mut sample, xi);
                    if l == s_kick {
                        psi = sample;
                        self.record(&mut trace, t0 + tau_i + xi * tau_p, &psi, &vectors)?;
                    } else {
                        self.record(&mut trace, t0 + tau_i + xi * tau_p, &sample, &vectors)?;
                    }
                }
            }
        }
        Ok(trace)
    }

    /// Evolution under H_R alone (the no-kick reference), uniformly sampled.
    pub fn free_trace(
        &self,
        total_time: f64,
        n_samples: usize,
        initial: &StateVector,
        projectors: &[(String, StateVector)],
    ) -> Result<PopulationTrace> {
        if !(total_time > 0.0) {
            return Err(Error::InvalidArgument("total_time must be > 0".into()));
        }
        if n_samples < 1 {
            return Err(Error::InvalidArgument("n_samples must be >= 1".into()));
        }
        self.check_initial(initial)?;
        let vectors: Vec<&StateVector> = projectors.iter().map(|(_, v)| v).collect();
        let mut trace =
            PopulationTrace::with_labels(projectors.iter().map(|(l, _)| l.clone()).collect());
        let coeffs = self.eigen.to_eigenbasis(initial.amplitudes());
        for i in 0..=n_samples {
            let t = total_time * i as f64 / n_samples as f64;
            let psi = self.eigen.evolve_from_eigenbasis(&coeffs, t);
            self.record(&mut trace, t, &psi, &vectors)?;
        }
        Ok(trace)
    }

    /// Max |⟨v|ψ(t)⟩|² over the whole kicked evolution, per projector.
    ///
    /// Runs entirely in the H_R eigenbasis (phases + one dense kick per
    /// period), sampling `samples_per_interval` points inside each free
    /// interval. Projector probabilities are constant during a kick for any
    /// projector supported on a single excitation doublet, so kicks are not
    /// sampled internally.
    pub fn max_probabilities(
        &self,
        schedule: &KickSchedule,
        initial: &StateVector,
        samples_per_interval: usize,
        projectors: &[&StateVector],
    ) -> Result<Vec<f64>> {
        self.check_initial(initial)?;
        let s_free = samples_per_interval.max(1);
        let tau_i = schedule.tau_i();
        // projectors and leakage rows, all in the eigenbasis
        let proj: Vec<DVector<C64>> = projectors
            .iter()
            .map(|v| self.eigen.to_eigenbasis(v.amplitudes()))
            .collect();
        let leak_rows: Vec<DVector<C64>> = self
            .leak_indices()
            .iter()
            .map(|&i| {
                DVector::from_fn(self.space.dim(), |j, _| self.eigen.vectors[(i, j)])
            })
            .collect();

        let mut c = self.eigen.to_eigenbasis(initial.amplitudes());
        let mut maxima = vec![0.0_f64; proj.len()];
        let mut observe = |coeffs: &DVector<C64>, time: f64| -> Result<()> {
            for (m, w) in maxima.iter_mut().zip(proj.iter()) {
                let amp = w.dotc(coeffs);
                if amp.norm_sqr() > *m {
                    *m = amp.norm_sqr();
                }
            }
            let leak: f64 = leak_rows.iter().map(|r| r.dotc(coeffs).norm_sqr()).sum();
            if leak > LEAKAGE_THRESHOLD {
                return Err(Error::TruncationLeakage {
                    time,
                    population: leak,
                    n_max: self.space.n_max(),
                });
            }
            Ok(())
        };
        observe(&c, 0.0)?;
        let mut phased = DVector::zeros(c.len());
        for k in 0..schedule.n_kicks() {
            let t0 = k as f64 * schedule.period();
            for j in 1..=s_free {
                let tj = tau_i * j as f64 / s_free as f64;
                for (i, z) in phased.iter_mut().enumerate() {
                    *z = c[i] * C64::new(0.0, -self.eigen.energies[i] * tj).exp();
                }
                observe(&phased, t0 + tj)?;
            }
            c = &self.kick_in_eigenbasis * &phased;
            if (k + 1) % UNITARITY_CHECK_STRIDE == 0 {
                let norm = c.norm();
                if (norm - 1.0).abs() > UNITARITY_TOL {
                    return Err(Error::NumericalGuard(format!(
                        "state norm drifted to {norm} after {} kicks",
                        k + 1
                    )));
                }
            }
        }
        Ok(maxima)
    }

    fn check_initial(&self, initial: &StateVector) -> Result<()> {
        if initial.space() != self.space {
            return Err(Error::InvalidArgument("initial state lives on a different space".into()));
        }
        if (initial.norm() - 1.0).abs() > UNITARITY_TOL {
            return Err(Error::InvalidArgument(format!(
                "initial state is not normalized (norm = {})",
                initial.norm()
            )));
        }
        Ok(())
    }

    fn record(
        &self,
        trace: &mut PopulationTrace,
        time: f64,
        amplitudes: &DVector<C64>,
        projectors: &[&StateVector],
    ) -> Result<()> {
        let norm = self.guard_sample(time, amplitudes)?;
        let probs = projectors
            .iter()
            .map(|v| v.amplitudes().dotc(amplitudes).norm_sqr())
            .collect();
        trace.push_sample(time, probs, norm);
        Ok(())
    }
}

/// Resolve state labels against the model and return `(column label, vector)`
/// pairs for trace construction.
pub fn resolve_projectors(
    model: &ModelOperators,
    labels: &[StateLabel],
) -> Result<Vec<(String, StateVector)>> {
    labels
        .iter()
        .map(|l| Ok((l.column_suffix(), l.resolve(&model.params, model.space)?)))
        .collect()
}

/// Dense kicked trace of the projector probabilities for `labels`,
/// starting from `initial`.
pub fn evolve_trace(
    model: &ModelOperators,
    schedule: &KickSchedule,
    initial: &StateVector,
    samples_per_interval: usize,
    labels: &[StateLabel],
) -> Result<PopulationTrace> {
    let projectors = resolve_projectors(model, labels)?;
    KickedEvolver::new(model)?.trace(schedule, initial, samples_per_interval, &projectors)
}

/// Trace of the uninterrupted Rabi evolution (no kicks) over `total_time`.
pub fn free_trace(
    model: &ModelOperators,
    total_time: f64,
    n_samples: usize,
    initial: &StateVector,
    labels: &[StateLabel],
) -> Result<PopulationTrace> {
    let projectors = resolve_projectors(model, labels)?;
    KickedEvolver::new(model)?.free_trace(total_time, n_samples, initial, &projectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::Atom;
    use crate::model::{build_hamiltonians, Branch, SystemParams};
    use std::f64::consts::PI;

    fn fig2_setup() -> (ModelOperators, KickSchedule) {
        let params = SystemParams::resonant(0.06).unwrap();
        let space = HilbertSpace::new(20).unwrap();
        let model = ModelOperators::new(params, space);
        let delta_minus = crate::model::delta_s(&params, Branch::Minus);
        let schedule = KickSchedule::new(7.0 * PI / delta_minus, PI / 2.0, 54).unwrap();
        (model, schedule)
    }

    #[test]
    fn propagator_at_zero_is_identity() {
        let space = HilbertSpace::new(6).unwrap();
        let params = SystemParams::new(1.0, 1.0, 0.3).unwrap();
        let (h_rabi, _, _) = build_hamiltonians(&params, space);
        let u = propagator(&h_rabi, 0.0).unwrap();
        assert!(u.max_abs_diff(&OperatorMatrix::identity(space)) <= 1e-12);
    }

    #[test]
    fn propagator_diagonal_case_phases() {
        let space = HilbertSpace::new(4).unwrap();
        let params = SystemParams::new(1.0, 1.0, 0.0).unwrap();
        let (h_rabi, _, _) = build_hamiltonians(&params, space);
        let t = 0.731;
        let u = propagator(&h_rabi, t).unwrap();
        for i in 0..space.dim() {
            let (atom, n) = space.basis_label(i);
            let energy = 0.5 * atom.sigma_z() + n as f64;
            let expected = C64::new(0.0, -energy * t).exp();
            assert!((u.matrix()[(i, i)] - expected).norm() < 1e-12);
            for j in 0..space.dim() {
                if i != j {
                    assert!(u.matrix()[(i, j)].norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn propagator_group_property() {
        let space = HilbertSpace::new(8).unwrap();
        let params = SystemParams::new(1.1, 1.0, 0.45).unwrap();
        let (h_rabi, _, _) = build_hamiltonians(&params, space);
        let eig = HermitianEigen::new(&h_rabi).unwrap();
        for (t1, t2) in [(0.3, 1.7), (2.0, -0.5), (11.0, 4.2)] {
            let lhs = &eig.propagator(t1) * &eig.propagator(t2);
            let rhs = eig.propagator(t1 + t2);
            assert!(lhs.max_abs_diff(&rhs) <= 1e-10, "t1={t1} t2={t2}");
        }
        assert!(eig.propagator(3.3).unitarity_error() <= 1e-10);
    }

    #[test]
    fn propagator_rejects_non_hermitian() {
        let space = HilbertSpace::new(2).unwrap();
        let (a, _, _) = crate::hilbert::ladder_operators(space);
        assert!(matches!(propagator(&a, 1.0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn kicked_unitary_zero_kicks_is_identity() {
        let (model, schedule) = fig2_setup();
        let u = kicked_unitary(&model, &schedule.with_kicks(0)).unwrap();
        assert!(u.max_abs_diff(&OperatorMatrix::identity(model.space)) == 0.0);
    }

    #[test]
    fn one_kick_keeps_two_level_confinement() {
        // after a single kick the state stays essentially inside {|g,0⟩, |2,−⟩}
        let (model, schedule) = fig2_setup();
        let initial = model.space.basis_state(Atom::Ground, 0);
        let trace = evolve_trace(
            &model,
            &schedule.with_kicks(1),
            &initial,
            8,
            &["g,0".parse().unwrap(), "2,-".parse().unwrap()],
        )
        .unwrap();
        let last = trace.row(trace.len() - 1);
        assert!(last[0] + last[1] >= 0.999, "p_g0 + p_2m = {}", last[0] + last[1]);
    }

    #[test]
    fn two_kick_sign_flip_factorization() {
        // (P e^{−iH_Rτ})² = (iΠ) e^{−i(H_JC−H_V)τ} e^{−i(H_JC+H_V)τ}, checked by
        // building the flipped-sign exponential manually
        let space = HilbertSpace::new(16).unwrap();
        let params = SystemParams::new(1.0, 1.0, 0.5).unwrap();
        let model = ModelOperators::new(params, space);
        let schedule = KickSchedule::new(PI / 18.0, PI / 18.0, 2).unwrap();
        let two_steps = kicked_unitary(&model, &schedule).unwrap();
        let flipped = &model.h_jc - &model.h_v;
        let u_minus = propagator(&flipped, schedule.tau_i()).unwrap();
        let u_plus = propagator(&model.h_rabi, schedule.tau_i()).unwrap();
        let i_parity = model.parity.scale(C64::new(0.0, 1.0));
        let factorized = &i_parity * &(&u_minus * &u_plus);
        assert!(two_steps.max_abs_diff(&factorized) <= 1e-10);
    }

    #[test]
    fn fig2_trace_reaches_lower_doublet() {
        let (model, schedule) = fig2_setup();
        let initial = model.space.basis_state(Atom::Ground, 0);
        let trace = evolve_trace(
            &model,
            &schedule,
            &initial,
            8,
            &["g,0".parse().unwrap(), "2,-".parse().unwrap()],
        )
        .unwrap();
        let (t_max, p_max) = trace.max_probability("2-").unwrap();
        assert!(p_max >= 0.95, "max p_2- = {p_max}");
        assert!((t_max - 462.79).abs() / 462.79 < 0.10, "t_max = {t_max}");
        // norms stay pinned to 1
        for norm in trace.norms() {
            assert!((norm - 1.0).abs() <= UNITARITY_TOL);
        }
        // times strictly increasing
        for w in trace.times().windows(2) {
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn no_kick_background_stays_small() {
        let (model, schedule) = fig2_setup();
        let initial = model.space.basis_state(Atom::Ground, 0);
        let horizon = schedule.period() * schedule.n_kicks() as f64;
        let trace = free_trace(&model, horizon, 8000, &initial, &["2,-".parse().unwrap()]).unwrap();
        let (_, p_max) = trace.max_probability("2-").unwrap();
        assert!(p_max <= 0.01, "no-kick max p_2- = {p_max}");
    }

    #[test]
    fn zero_coupling_initial_state_is_stationary() {
        let params = SystemParams::new(1.0, 1.0, 0.0).unwrap();
        let space = HilbertSpace::new(6).unwrap();
        let model = ModelOperators::new(params, space);
        let schedule = KickSchedule::new(1.3, 0.4, 25).unwrap();
        let initial = space.basis_state(Atom::Ground, 0);
        let trace =
            evolve_trace(&model, &schedule, &initial, 4, &["g,0".parse().unwrap()]).unwrap();
        for i in 0..trace.len() {
            assert!((trace.row(i)[0] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn parity_expectation_is_conserved() {
        let (model, schedule) = fig2_setup();
        let eigen = HermitianEigen::new(&model.h_rabi).unwrap();
        let mut psi = model.space.basis_state(Atom::Ground, 0);
        let expectation = |s: &StateVector| {
            s.overlap(&model.parity.apply(s)).re
        };
        let mut lo = expectation(&psi);
        let mut hi = lo;
        let half = eigen.propagator(schedule.tau_i() / 2.0);
        for _ in 0..schedule.n_kicks() {
            for u in [&half, &half] {
                psi = u.apply(&psi);
                let e = expectation(&psi);
                lo = lo.min(e);
                hi = hi.max(e);
            }
            psi = model.kick.apply(&psi);
            let e = expectation(&psi);
            lo = lo.min(e);
            hi = hi.max(e);
        }
        assert!(hi - lo <= 1e-10, "parity drift {}", hi - lo);
    }

    #[test]
    fn leakage_guard_fires_for_tiny_truncation() {
        let params = SystemParams::new(1.0, 1.0, 0.5).unwrap();
        let space = HilbertSpace::new(3).unwrap();
        let model = ModelOperators::new(params, space);
        let schedule = KickSchedule::new(2.0, 0.5, 10).unwrap();
        let initial = space.basis_state(Atom::Ground, 0);
        let result = evolve_trace(&model, &schedule, &initial, 4, &["g,0".parse().unwrap()]);
        assert!(matches!(result, Err(Error::TruncationLeakage { .. })));
    }

    #[test]
    fn truncation_convergence_weak_coupling() {
        // fig2-style run: n_max 12 vs 20 changes nothing above 1e-6
        let params = SystemParams::resonant(0.06).unwrap();
        let delta_minus = crate::model::delta_s(&params, Branch::Minus);
        let schedule = KickSchedule::new(7.0 * PI / delta_minus, PI / 2.0, 20).unwrap();
        let run = |n_max: usize| {
            let space = HilbertSpace::new(n_max).unwrap();
            let model = ModelOperators::new(params, space);
            let initial = space.basis_state(Atom::Ground, 0);
            evolve_trace(
                &model,
                &schedule,
                &initial,
                8,
                &["g,0".parse().unwrap(), "2,-".parse().unwrap()],
            )
            .unwrap()
        };
        let coarse = run(12);
        let fine = run(20);
        let mut dev: f64 = 0.0;
        for i in 0..coarse.len() {
            for (a, b) in coarse.row(i).iter().zip(fine.row(i)) {
                dev = dev.max((a - b).abs());
            }
        }
        assert!(dev < 1e-6, "truncation deviation {dev}");
    }

    #[test]
    fn truncation_convergence_ultrastrong() {
        let params = SystemParams::resonant(0.5).unwrap();
        let schedule = KickSchedule::new(PI / 18.0, PI / 18.0, 80).unwrap();
        let run = |n_max: usize| {
            let space = HilbertSpace::new(n_max).unwrap();
            let model = ModelOperators::new(params, space);
            let initial = space.basis_state(Atom::Ground, 0);
            evolve_trace(&model, &schedule, &initial, 8, &["g,0".parse().unwrap()]).unwrap()
        };
        let coarse = run(24);
        let fine = run(36);
        let mut dev: f64 = 0.0;
        for i in 0..coarse.len() {
            dev = dev.max((coarse.row(i)[0] - fine.row(i)[0]).abs());
        }
        assert!(dev < 1e-4, "truncation deviation {dev}");
    }

    #[test]
    fn traces_are_bit_reproducible() {
        let (model, schedule) = fig2_setup();
        let initial = model.space.basis_state(Atom::Ground, 0);
        let labels: Vec<StateLabel> = vec!["g,0".parse().unwrap(), "2,-".parse().unwrap()];
        let a = evolve_trace(&model, &schedule.with_kicks(10), &initial, 8, &labels).unwrap();
        let b = evolve_trace(&model, &schedule.with_kicks(10), &initial, 8, &labels).unwrap();
        assert_eq!(a, b); // bit-identical, not approximately equal
    }

    #[test]
    fn max_probabilities_agrees_with_dense_trace() {
        let (model, schedule) = fig2_setup();
        let schedule = schedule.with_kicks(12);
        let initial = model.space.basis_state(Atom::Ground, 0);
        let labels: Vec<StateLabel> = vec!["2,+".parse().unwrap(), "2,-".parse().unwrap()];
        let trace = evolve_trace(&model, &schedule, &initial, 8, &labels).unwrap();
        let evolver = KickedEvolver::new(&model).unwrap();
        let projectors = resolve_projectors(&model, &labels).unwrap();
        let refs: Vec<&StateVector> = projectors.iter().map(|(_, v)| v).collect();
        let maxima = evolver
            .max_probabilities(&schedule, &initial, 8, &refs)
            .unwrap();
        let (_, dense_plus) = trace.max_probability("2+").unwrap();
        let (_, dense_minus) = trace.max_probability("2-").unwrap();
        assert!((maxima[0] - dense_plus).abs() < 1e-9);
        assert!((maxima[1] - dense_minus).abs() < 1e-9);
    }
}
