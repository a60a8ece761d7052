//! Closed-form predictions and their validation against exact dynamics.
//!
//! Enhancement side: choosing τ_I = [(2m+1)π + φ]/Δ_s phase-matches the kicks
//! to the counter-rotating oscillation of the |g,0⟩ ↔ |2,s⟩ transition. The
//! per-period operator is then e^{iθ}(I − iKT) with a two-level generator K
//! whose detuning is φ/T and whose Rabi coupling is 2g_s/T, g_s = λ₀d_{2,s}/Δ_s.
//! Full transfer happens at t = πT/(4|g_s|) and the τ_I-resonance peaks have
//! width 8ω_c|g_s|/Δ_s.
//!
//! Suppression side: for even N the kicked evolution factorizes exactly as
//! U(NT) = (iΠ)^{N/2}(e^{−i(H_JC−H_V)τ_I} e^{−i(H_JC+H_V)τ_I})^{N/2}, so two
//! successive kicks alternate the sign of H_V. The leading residual generator
//! is ε̂ = −iτ_I[H_JC, H_V]/2 = g₁a†σ₊ + g₂a†²σ_z + h.c., and the population
//! leaving the {|e,0⟩, |g,1⟩} pair, p_ε = 1 − p_{e,0} − p_{g,1}, scales as
//! τ_I²λ₀².

use std::f64::consts::{FRAC_PI_4, PI};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{
    kicked_step, propagator, HermitianEigen, KickSchedule, KickedEvolver, PopulationTrace,
};
use crate::error::{Error, Result};
use crate::hilbert::{ladder_operators, qubit_operators, Atom, HilbertSpace, OperatorMatrix, C64};
use crate::model::{
    delta_s, dressed_doublet, ModelOperators, Branch, SystemParams,
};

/// Detected resonance peaks below this height are ignored (rejects ripple;
/// the physical peaks approach 1).
pub const PEAK_MIN_HEIGHT: f64 = 0.2;

/// Hard cap on the per-branch kick budget of a scan.
pub const MAX_SCAN_KICKS: usize = 500;

/// Effective two-level description of the |g,0⟩ ↔ |2,s⟩ transition under the
/// kick sequence.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EffectiveTwoLevel {
    /// Branch label s.
    pub branch: char,
    /// Δ_s = ε_{2,s} − ε₀.
    pub delta_s: f64,
    /// Effective coupling g_s = λ₀d_{2,s}/Δ_s (signed; the gauge makes g_− < 0).
    pub g_s: f64,
    /// Phase offset φ ∈ (−π, π] of τ_I from the nearest resonance.
    pub phi: f64,
    /// Per-period phase θ = π/4 − ε₀τ_I.
    pub theta: f64,
    /// Resonance index m of the nearest resonance.
    pub m: usize,
    /// Time of complete transfer at resonance, πT/(4|g_s|).
    pub predicted_transfer_time: f64,
    /// Resonance peak width in ω_cτ_I, 8ω_c|g_s|/Δ_s.
    pub predicted_peak_width: f64,
    /// Perturbative validity measure N(g_s² + φ²); the description holds while ≪ 1.
    pub validity: f64,
}

/// Resonant free interval τ_I = [(2m+1)π + φ]/Δ_s.
///
/// Requires |φ| < π so the (m, φ) decomposition stays unique.
pub fn resonance_tau(params: &SystemParams, s: Branch, m: usize, phi: f64) -> f64 {
    assert!(phi.abs() < PI, "phase offset must satisfy |phi| < pi");
    ((2 * m + 1) as f64 * PI + phi) / delta_s(params, s)
}

/// Invert the phase-matching condition: the nearest resonance index m ≥ 0 and
/// the offset φ = τ_IΔ_s − (2m+1)π normalized into (−π, π].
pub fn phase_offset(params: &SystemParams, s: Branch, tau_i: f64) -> Result<(f64, usize)> {
    if !(tau_i > 0.0) {
        return Err(Error::OutOfRange(format!("tau_i must be > 0, got {tau_i}")));
    }
    let x = tau_i * delta_s(params, s);
    let mut m = ((x - PI) / (2.0 * PI)).round() as i64;
    let mut phi = x - (2 * m + 1) as f64 * PI;
    if phi <= -PI {
        m -= 1;
        phi += 2.0 * PI;
    } else if phi > PI {
        m += 1;
        phi -= 2.0 * PI;
    }
    if m < 0 {
        return Err(Error::OutOfRange(format!(
            "tau_i = {tau_i} is below the m = 0 resonance window for branch {s}"
        )));
    }
    Ok((phi, m as usize))
}

/// Fill the effective two-level description for the given schedule and branch.
pub fn effective_two_level(
    params: &SystemParams,
    schedule: &KickSchedule,
    s: Branch,
) -> Result<EffectiveTwoLevel> {
    if params.lambda_0() == 0.0 {
        return Err(Error::DegenerateCoupling(
            "lambda_0 = 0 admits no transfer prediction (g_s = 0)".into(),
        ));
    }
    let dsv = delta_s(params, s);
    // closed-form overlap d_{2,s}: χ from tan(2χ) = 2√2 λ₀/δ
    let chi = 0.5 * (2.0 * params.lambda_0() * 2.0_f64.sqrt()).atan2(params.detuning());
    let d = match s {
        Branch::Plus => chi.cos(),
        Branch::Minus => -chi.sin(),
    };
    let g_s = params.lambda_0() * d / dsv;
    let (phi, m) = phase_offset(params, s, schedule.tau_i())?;
    let theta = FRAC_PI_4 - params.ground_energy() * schedule.tau_i();
    Ok(EffectiveTwoLevel {
        branch: s.label(),
        delta_s: dsv,
        g_s,
        phi,
        theta,
        m,
        predicted_transfer_time: PI * schedule.period() / (4.0 * g_s.abs()),
        predicted_peak_width: 8.0 * params.omega_c() * g_s.abs() / dsv,
        validity: schedule.n_kicks() as f64 * (g_s * g_s + phi * phi),
    })
}

/// Deviation of the exact one-period operator from the first-order form
/// e^{iθ}(I − iKT), restricted to the {|g,0⟩, |2,s⟩} subspace.
///
/// Meaningful in the phase-matched regime; for |φ| ≳ 1 the first-order
/// expansion of exp(iφ) underlying K is invalid (a warning is logged).
pub fn effective_step_residual(
    model: &ModelOperators,
    schedule: &KickSchedule,
    s: Branch,
) -> Result<f64> {
    let params = &model.params;
    let (phi, _) = phase_offset(params, s, schedule.tau_i())?;
    if phi.abs() > 0.5 {
        log::warn!(
            "effective_step_residual called with phi = {phi:.3}; the first-order \
             comparison assumes |phi| << 1"
        );
    }
    let doublet = dressed_doublet(params, model.space, 2)?;
    let g_s = params.lambda_0() * doublet.overlap(s) / doublet.delta(s);
    let theta = FRAC_PI_4 - params.ground_energy() * schedule.tau_i();

    let step = kicked_step(model, schedule)?;
    let basis = [model.space.basis_state(Atom::Ground, 0), doublet.vector(s).clone()];
    let mut exact = [[C64::new(0.0, 0.0); 2]; 2];
    for (r, bra) in basis.iter().enumerate() {
        for (c, ket) in basis.iter().enumerate() {
            exact[r][c] = bra.overlap(&step.apply(ket));
        }
    }
    let phase = C64::new(0.0, theta).exp();
    let theory = [
        [phase, phase * C64::new(-2.0 * g_s, 0.0)],
        [phase * C64::new(2.0 * g_s, 0.0), phase * C64::new(1.0, -phi)],
    ];
    let mut residual: f64 = 0.0;
    for r in 0..2 {
        for c in 0..2 {
            residual = residual.max((exact[r][c] - theory[r][c]).norm());
        }
    }
    Ok(residual)
}

/// One detected resonance peak of a τ_I scan.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DetectedPeak {
    pub branch: char,
    /// Resonance index of the nearest phase-matching condition.
    pub m: usize,
    /// τ_I location of the maximum.
    pub location: f64,
    /// Peak height (max probability).
    pub height: f64,
    /// Width at half prominence, interpolated on the scan grid.
    pub width: f64,
}

/// Max-probability curves p_{2,±}^Max(τ_I) and the peaks detected on them.
#[derive(Debug, Clone)]
pub struct ScanResult {
    pub tau_grid: Vec<f64>,
    pub p_max_plus: Vec<f64>,
    pub p_max_minus: Vec<f64>,
    pub peaks: Vec<DetectedPeak>,
}

impl ScanResult {
    pub fn peaks_of(&self, branch: Branch) -> impl Iterator<Item = &DetectedPeak> {
        self.peaks.iter().filter(move |p| p.branch == branch.label())
    }
}

/// Recommended per-branch kick budget, ceil(1.5·π/(4|g_s|)) over both
/// branches, capped at [`MAX_SCAN_KICKS`]. Transfer needs ≈ π/(4|g_s|) kicks;
/// the 1.5× margin covers slight detuning.
pub fn recommended_kick_budget(params: &SystemParams) -> Result<usize> {
    if params.lambda_0() == 0.0 {
        return Err(Error::DegenerateCoupling(
            "lambda_0 = 0 has no transfer to budget for".into(),
        ));
    }
    let chi = 0.5 * (2.0 * params.lambda_0() * 2.0_f64.sqrt()).atan2(params.detuning());
    let budget = |d: f64, dsv: f64| -> usize {
        let g = params.lambda_0() * d / dsv;
        (1.5 * PI / (4.0 * g.abs())).ceil() as usize
    };
    let n_plus = budget(chi.cos(), delta_s(params, Branch::Plus));
    let n_minus = budget(chi.sin(), delta_s(params, Branch::Minus));
    Ok(n_plus.max(n_minus).min(MAX_SCAN_KICKS))
}

/// Scan the kicked evolution of |g,0⟩ over a τ_I grid, recording the maximum
/// probability reached in |2,+⟩ and |2,−⟩ at each grid point and detecting
/// the resonance peaks on both curves.
///
/// Grid points are evaluated in parallel; results are merged in grid order,
/// so the output is deterministic regardless of thread scheduling.
pub fn scan_resonances(
    params: &SystemParams,
    space: HilbertSpace,
    tau_grid: &[f64],
    tau_p: f64,
    max_kicks: usize,
) -> Result<ScanResult> {
    if tau_grid.is_empty() {
        return Err(Error::InvalidArgument("empty tau_i grid".into()));
    }
    if tau_grid.windows(2).any(|w| w[1] <= w[0]) || tau_grid[0] <= 0.0 {
        return Err(Error::InvalidArgument(
            "tau_i grid must be positive and strictly increasing".into(),
        ));
    }
    let model = ModelOperators::new(*params, space);
    let evolver = KickedEvolver::new(&model)?;
    let doublet = dressed_doublet(params, space, 2)?;
    let projectors = [doublet.vec_plus.clone(), doublet.vec_minus.clone()];
    let initial = space.basis_state(Atom::Ground, 0);

    let maxima: Vec<[f64; 2]> = tau_grid
        .par_iter()
        .map(|&tau_i| -> Result<[f64; 2]> {
            let schedule = KickSchedule::new(tau_i, tau_p, max_kicks)?;
            let refs = [&projectors[0], &projectors[1]];
            let m = evolver.max_probabilities(&schedule, &initial, 8, &refs)?;
            Ok([m[0], m[1]])
        })
        .collect::<Result<_>>()?;

    let p_max_plus: Vec<f64> = maxima.iter().map(|m| m[0]).collect();
    let p_max_minus: Vec<f64> = maxima.iter().map(|m| m[1]).collect();

    let mut peaks = detect_peaks(params, Branch::Plus, tau_grid, &p_max_plus)?;
    peaks.extend(detect_peaks(params, Branch::Minus, tau_grid, &p_max_minus)?);
    peaks.sort_by(|a, b| a.location.partial_cmp(&b.location).unwrap());

    Ok(ScanResult {
        tau_grid: tau_grid.to_vec(),
        p_max_plus,
        p_max_minus,
        peaks,
    })
}

/// Local maxima above [`PEAK_MIN_HEIGHT`] with width measured at half
/// prominence (linear interpolation between grid points).
fn detect_peaks(
    params: &SystemParams,
    branch: Branch,
    grid: &[f64],
    values: &[f64],
) -> Result<Vec<DetectedPeak>> {
    let mut peaks = Vec::new();
    for i in 1..grid.len().saturating_sub(1) {
        if !(values[i] >= values[i - 1] && values[i] > values[i + 1] && values[i] >= PEAK_MIN_HEIGHT)
        {
            continue;
        }
        // prominence: lowest point between the peak and the nearest higher
        // ground on each side
        let mut left_min = values[i];
        for j in (0..i).rev() {
            if values[j] > values[i] {
                break;
            }
            left_min = left_min.min(values[j]);
        }
        let mut right_min = values[i];
        for j in i + 1..grid.len() {
            if values[j] > values[i] {
                break;
            }
            right_min = right_min.min(values[j]);
        }
        let prominence = values[i] - left_min.max(right_min);
        let half = values[i] - prominence / 2.0;
        let cross = |j0: usize, j1: usize| -> f64 {
            // linear interpolation of the `half` crossing between two samples
            let (x0, y0) = (grid[j0], values[j0]);
            let (x1, y1) = (grid[j1], values[j1]);
            if (y1 - y0).abs() < f64::EPSILON {
                x1
            } else {
                x0 + (half - y0) * (x1 - x0) / (y1 - y0)
            }
        };
        let mut left_x = grid[0];
        for j in (0..i).rev() {
            if values[j] < half {
                left_x = cross(j, j + 1);
                break;
            }
        }
        let mut right_x = grid[grid.len() - 1];
        for j in i + 1..grid.len() {
            if values[j] < half {
                right_x = cross(j - 1, j);
                break;
            }
        }
        let (_, m) = phase_offset(params, branch, grid[i])?;
        peaks.push(DetectedPeak {
            branch: branch.label(),
            m,
            location: grid[i],
            height: values[i],
            width: right_x - left_x,
        });
    }
    Ok(peaks)
}

/// Residual of the even-N sign-flip factorization
/// ‖U(NT) − (iΠ)^{N/2}(e^{−i(H_JC−H_V)τ_I}e^{−i(H_JC+H_V)τ_I})^{N/2}‖_max.
///
/// This is an exact operator identity; the residual is pure roundoff for any
/// coupling strength. Odd N is rejected.
pub fn decoupling_factorization_residual(
    model: &ModelOperators,
    schedule: &KickSchedule,
    n_kicks: usize,
) -> Result<f64> {
    if n_kicks % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "the sign-flip factorization needs an even kick count, got {n_kicks}"
        )));
    }
    let exact = crate::dynamics::kicked_unitary(model, &schedule.with_kicks(n_kicks))?;

    let flipped = &model.h_jc - &model.h_v;
    let u_minus = propagator(&flipped, schedule.tau_i())?;
    let u_plus = propagator(&model.h_rabi, schedule.tau_i())?;
    let pair = &u_minus * &u_plus;
    let mut product = OperatorMatrix::identity(model.space);
    for _ in 0..n_kicks / 2 {
        product = &pair * &product;
    }
    // (iΠ)^{N/2} is diagonal with entries (i·π_k)^{N/2}
    let half = (n_kicks / 2) as i32;
    let parity_power = OperatorMatrix::from_diagonal_fn(model.space, |atom, n| {
        let pi_entry = -atom.sigma_z() * if n % 2 == 0 { 1.0 } else { -1.0 };
        C64::new(0.0, pi_entry).powi(half)
    });
    let factorized = &parity_power * &product;
    Ok(exact.max_abs_diff(&factorized))
}

/// Coefficients of ε̂ = g₁a†σ₊ + g₂a†²σ_z + h.c.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonCoefficients {
    /// g₁ = −iτ_I(ω₀+ω_c)λ₀/2.
    pub g1: C64,
    /// g₂ = iτ_Iλ₀²/2.
    pub g2: C64,
}

impl EpsilonCoefficients {
    pub fn new(params: &SystemParams, tau_i: f64) -> Self {
        EpsilonCoefficients {
            g1: C64::new(0.0, -tau_i * (params.omega_0() + params.omega_c()) * params.lambda_0() / 2.0),
            g2: C64::new(0.0, tau_i * params.lambda_0() * params.lambda_0() / 2.0),
        }
    }
}

/// ε̂ from the independent commutator route, −iτ_I[H_JC, H_V]/2.
pub fn epsilon_commutator(params: &SystemParams, tau_i: f64, space: HilbertSpace) -> OperatorMatrix {
    let (_, h_jc, h_v) = crate::model::build_hamiltonians(params, space);
    let comm = &(&h_jc * &h_v) - &(&h_v * &h_jc);
    comm.scale(C64::new(0.0, -tau_i / 2.0))
}

/// Build ε̂ = g₁a†σ₊ + g₂a†²σ_z + h.c. and cross-check it against the
/// commutator route −iτ_I[H_JC, H_V]/2 on the interior block n ≤ n_max − 2
/// (the two constructions coincide exactly away from the truncation edge).
pub fn epsilon_operator(
    params: &SystemParams,
    tau_i: f64,
    space: HilbertSpace,
) -> Result<(OperatorMatrix, EpsilonCoefficients)> {
    let coeffs = EpsilonCoefficients::new(params, tau_i);
    let (a, a_dag, _) = ladder_operators(space);
    let (sigma_z, sigma_plus, sigma_minus) = qubit_operators(space);
    let raise = (&a_dag * &sigma_plus).scale(coeffs.g1);
    let lower = (&a * &sigma_minus).scale(coeffs.g1.conj());
    let squeeze_up = (&(&a_dag * &a_dag) * &sigma_z).scale(coeffs.g2);
    let squeeze_down = (&(&a * &a) * &sigma_z).scale(coeffs.g2.conj());
    let eps = &(&raise + &lower) + &(&squeeze_up + &squeeze_down);

    let dev = epsilon_interior_deviation(&eps, &epsilon_commutator(params, tau_i, space), space);
    if dev > 1e-10 {
        return Err(Error::NumericalGuard(format!(
            "epsilon closed form deviates from the commutator construction by {dev:.3e} \
             on the interior block"
        )));
    }
    Ok((eps, coeffs))
}

/// Max entrywise deviation of two operators on the block n ≤ n_max − 2.
pub fn epsilon_interior_deviation(
    a: &OperatorMatrix,
    b: &OperatorMatrix,
    space: HilbertSpace,
) -> f64 {
    let cut = 2 * space.n_max().saturating_sub(1);
    let mut dev: f64 = 0.0;
    for i in 0..cut {
        for j in 0..cut {
            dev = dev.max((a.matrix()[(i, j)] - b.matrix()[(i, j)]).norm());
        }
    }
    dev
}

/// Which route computes the p_ε trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PEpsilonMode {
    /// Full kicked evolution U(NT) = (Pe^{−iH_Rτ_I})^N.
    Exact,
    /// First-order correction U(NT) ≈ U₀(1 − i∫₀^{Nτ_I} ε̂(t′)dt′) with
    /// U₀ = (iΠ)^{N/2}exp(−iH_JCNτ_I), the integral evaluated in closed form
    /// in the JC eigenbasis and the state normalized before projecting.
    Perturbative,
}

/// Excitation-number non-conservation p_ε = 1 − p_{e,0} − p_{g,1} for the
/// system started in |e,0⟩, sampled at the discrete times NT with N even.
///
/// The returned trace has the single column label `eps`.
pub fn p_epsilon_trace(
    model: &ModelOperators,
    schedule: &KickSchedule,
    total_kicks: usize,
    mode: PEpsilonMode,
) -> Result<PopulationTrace> {
    let space = model.space;
    let idx_e0 = space.index(Atom::Excited, 0);
    let idx_g1 = space.index(Atom::Ground, 1);
    let period = schedule.period();
    let mut trace = PopulationTrace::with_labels(vec!["eps".to_string()]);

    match mode {
        PEpsilonMode::Exact => {
            let evolver = KickedEvolver::new(model)?;
            let eigen = evolver.eigen();
            let mut psi = space.basis_state(Atom::Excited, 0).amplitudes().clone();
            trace.push_sample(0.0, vec![0.0], psi.norm());
            for n in 1..=total_kicks {
                let mut evolved = eigen.evolve_from_eigenbasis(&eigen.to_eigenbasis(&psi), schedule.tau_i());
                evolver.apply_full_kick(&mut evolved);
                psi = evolved;
                if n % 2 == 0 {
                    let time = n as f64 * period;
                    let norm = evolver.guard_state(time, &psi)?;
                    let p_eps = 1.0 - psi[idx_e0].norm_sqr() - psi[idx_g1].norm_sqr();
                    trace.push_sample(time, vec![p_eps], norm);
                }
            }
        }
        PEpsilonMode::Perturbative => {
            let (eps, _) = epsilon_operator(&model.params, schedule.tau_i(), space)?;
            let jc = HermitianEigen::new(&model.h_jc)?;
            let eps_eig = jc.vectors().adjoint() * eps.matrix() * jc.vectors();
            let dim = space.dim();
            let psi0 = jc.to_eigenbasis(space.basis_state(Atom::Excited, 0).amplitudes());
            // parity diagonal for (iΠ)^{N/2}
            let parity: Vec<f64> = (0..dim)
                .map(|i| {
                    let (atom, n) = space.basis_label(i);
                    -atom.sigma_z() * if n % 2 == 0 { 1.0 } else { -1.0 }
                })
                .collect();
            trace.push_sample(0.0, vec![0.0], 1.0);
            let energies = jc.energies();
            for n in (2..=total_kicks).step_by(2) {
                let t_free = n as f64 * schedule.tau_i();
                // ∫₀^{t} e^{iE_j t′} ε̂_{jk} e^{−iE_k t′} dt′ elementwise
                let mut integral = DMatrix::<C64>::zeros(dim, dim);
                for j in 0..dim {
                    for k in 0..dim {
                        let de = energies[j] - energies[k];
                        let factor = if de.abs() < 1e-12 {
                            C64::new(t_free, 0.0)
                        } else {
                            (C64::new(0.0, de * t_free).exp() - 1.0) / C64::new(0.0, de)
                        };
                        integral[(j, k)] = eps_eig[(j, k)] * factor;
                    }
                }
                // (1 − iM)|e,0⟩ in the JC eigenbasis, then U₀
                let corrected = &psi0 - (&integral * &psi0).map(|z| C64::new(0.0, 1.0) * z);
                let evolved = DVector::from_fn(dim, |j, _| {
                    corrected[j] * C64::new(0.0, -energies[j] * t_free).exp()
                });
                let mut psi = jc.vectors() * evolved;
                let half = (n / 2) as i32;
                for (i, z) in psi.iter_mut().enumerate() {
                    *z *= C64::new(0.0, parity[i]).powi(half);
                }
                // first-order states are normalized before projecting
                let norm = psi.norm();
                psi.unscale_mut(norm);
                let p_eps = 1.0 - psi[idx_e0].norm_sqr() - psi[idx_g1].norm_sqr();
                trace.push_sample(n as f64 * period, vec![p_eps], 1.0);
            }
        }
    }
    Ok(trace)
}

/// Effective JC parameters in the fast-kick limit: every frequency is scaled
/// by the duty factor τ_I/T, so λ′ = λ₀τ_I/T and ω′ = ωτ_I/T.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EffectiveJcParams {
    pub lambda: f64,
    pub omega_0: f64,
    pub omega_c: f64,
}

impl EffectiveJcParams {
    /// Period of a full |e,0⟩ ↔ |g,1⟩ exchange at resonance, π/λ′.
    pub fn exchange_period(&self) -> f64 {
        PI / self.lambda
    }

    /// Resonant prediction p_{e,0}(t) = cos²(λ′t) for the system started in
    /// |e,0⟩ (valid for ω₀′ = ω_c′).
    pub fn p_e0_resonant(&self, t: f64) -> f64 {
        (self.lambda * t).cos().powi(2)
    }
}

/// Scaled JC parameters for overlaying effective-JC predictions on kicked traces.
pub fn effective_jc_prediction(params: &SystemParams, schedule: &KickSchedule) -> EffectiveJcParams {
    let duty = schedule.tau_i() / schedule.period();
    EffectiveJcParams {
        lambda: params.lambda_0() * duty,
        omega_0: params.omega_0() * duty,
        omega_c: params.omega_c() * duty,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::HilbertSpace;
    use proptest::prelude::*;

    fn fig2_params() -> SystemParams {
        SystemParams::resonant(0.06).unwrap()
    }

    fn ultra_model() -> ModelOperators {
        let params = SystemParams::resonant(0.5).unwrap();
        ModelOperators::new(params, HilbertSpace::new(36).unwrap())
    }

    #[test]
    fn resonance_tau_values() {
        let params = fig2_params();
        let tau = resonance_tau(&params, Branch::Minus, 3, 0.0);
        assert!((tau - 11.4827459388).abs() < 1e-8);
        // λ₀ = 0 at resonance: Δ_± = 2ω_c, so the m = 0 interval is π/2
        let free = SystemParams::resonant(0.0).unwrap();
        assert!((resonance_tau(&free, Branch::Plus, 0, 0.0) - PI / 2.0).abs() < 1e-14);
        // branch difference at m = 1 is 3π(1/Δ_+ − 1/Δ_−)
        let dp = delta_s(&params, Branch::Plus);
        let dm = delta_s(&params, Branch::Minus);
        let diff = resonance_tau(&params, Branch::Plus, 1, 0.0)
            - resonance_tau(&params, Branch::Minus, 1, 0.0);
        assert!((diff - 3.0 * PI * (1.0 / dp - 1.0 / dm)).abs() < 1e-12);
    }

    #[test]
    fn phase_offset_at_exact_resonance() {
        let params = fig2_params();
        let tau = resonance_tau(&params, Branch::Minus, 3, 0.0);
        let (phi, m) = phase_offset(&params, Branch::Minus, tau).unwrap();
        assert!(phi.abs() < 1e-12);
        assert_eq!(m, 3);
    }

    #[test]
    fn phase_offset_cross_branch_values() {
        // τ_I at the − resonance read through the + branch picks up
        // φ = (2m+1)π(Δ_+−Δ_−)/Δ_−
        let params = fig2_params();
        let dm = delta_s(&params, Branch::Minus);
        let (phi, m) = phase_offset(&params, Branch::Plus, PI / dm).unwrap();
        assert_eq!(m, 0);
        assert!((phi - 0.278384).abs() < 1e-5, "phi = {phi}");
        let (phi, m) = phase_offset(&params, Branch::Plus, 3.0 * PI / dm).unwrap();
        assert_eq!(m, 1);
        assert!((phi - 0.835151).abs() < 1e-5, "phi = {phi}");
    }

    proptest! {
        // φ always lands in (−π, π] and reconstructs τ_I exactly
        #[test]
        fn phase_offset_normalization(tau in 0.05_f64..60.0, lambda in 0.0_f64..0.6, s in prop::bool::ANY) {
            let params = SystemParams::new(1.0, 1.0, lambda).unwrap();
            let branch = if s { Branch::Plus } else { Branch::Minus };
            let (phi, m) = phase_offset(&params, branch, tau).unwrap();
            prop_assert!(phi > -PI && phi <= PI);
            let rebuilt = ((2 * m + 1) as f64 * PI + phi) / delta_s(&params, branch);
            prop_assert!((rebuilt - tau).abs() < 1e-9 * tau.max(1.0));
        }
    }

    #[test]
    fn effective_two_level_fig2_numbers() {
        let params = fig2_params();
        let tau = resonance_tau(&params, Branch::Minus, 3, 0.0);
        let schedule = KickSchedule::new(tau, PI / 2.0, 36).unwrap();
        let eff = effective_two_level(&params, &schedule, Branch::Minus).unwrap();
        assert!((eff.g_s.abs() - 0.022153079).abs() < 1e-8);
        assert!(eff.g_s < 0.0); // gauge: d_{2,−} < 0
        assert!((eff.predicted_transfer_time - 462.790212).abs() < 1e-3);
        assert!((eff.predicted_peak_width - 0.09253839).abs() < 1e-7);
        assert!((eff.theta - 6.52677113).abs() < 1e-7);
        assert!(eff.phi.abs() < 1e-12);
        assert_eq!(eff.m, 3);
        assert!((eff.validity - 36.0 * eff.g_s * eff.g_s).abs() < 1e-12);
        // the + branch at the same τ_I sits far off resonance: φ ≫ g_+
        let eff_plus = effective_two_level(&params, &schedule, Branch::Plus).unwrap();
        assert!((eff_plus.g_s - 0.020349833).abs() < 1e-8);
        assert!(eff_plus.phi > 10.0 * eff_plus.g_s);
        // no prediction without coupling
        let free = SystemParams::resonant(0.0).unwrap();
        assert!(matches!(
            effective_two_level(&free, &schedule, Branch::Minus),
            Err(Error::DegenerateCoupling(_))
        ));
    }

    #[test]
    fn effective_step_residual_fig2_window() {
        let params = fig2_params();
        let space = HilbertSpace::new(20).unwrap();
        let model = ModelOperators::new(params, space);
        let tau = resonance_tau(&params, Branch::Minus, 3, 0.0);
        let schedule = KickSchedule::new(tau, PI / 2.0, 1).unwrap();
        let r = effective_step_residual(&model, &schedule, Branch::Minus).unwrap();
        // first-order theory error scale for these parameters
        assert!(r > 1e-3 && r < 3e-2, "residual = {r}");
    }

    #[test]
    fn effective_step_residual_vanishes_without_coupling() {
        let params = SystemParams::resonant(0.0).unwrap();
        let space = HilbertSpace::new(8).unwrap();
        let model = ModelOperators::new(params, space);
        // φ = 0 resonance of the decoupled system: τ_I = (2m+1)π/2
        let schedule = KickSchedule::new(3.0 * PI / 2.0, 0.5, 1).unwrap();
        let r = effective_step_residual(&model, &schedule, Branch::Minus).unwrap();
        assert!(r <= 1e-10, "residual = {r}");
    }

    #[test]
    fn effective_step_residual_grows_with_phi() {
        let params = fig2_params();
        let space = HilbertSpace::new(20).unwrap();
        let model = ModelOperators::new(params, space);
        let dm = delta_s(&params, Branch::Minus);
        let residual_at = |phi: f64| {
            let schedule = KickSchedule::new((7.0 * PI + phi) / dm, PI / 2.0, 1).unwrap();
            effective_step_residual(&model, &schedule, Branch::Minus).unwrap()
        };
        let r0 = residual_at(0.0);
        let r3 = residual_at(0.3);
        let r6 = residual_at(0.6);
        assert!(r0 < r3 && r3 < r6, "residuals {r0} {r3} {r6}");
    }

    #[test]
    fn decoupling_residual_is_roundoff() {
        let model = ultra_model();
        let schedule = KickSchedule::new(PI / 18.0, PI / 18.0, 0).unwrap();
        for n in [2usize, 10, 50] {
            let r = decoupling_factorization_residual(&model, &schedule, n).unwrap();
            assert!(r <= 1e-9, "N = {n}: residual = {r}");
        }
        assert!(matches!(
            decoupling_factorization_residual(&model, &schedule, 3),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn epsilon_coefficients_and_consistency() {
        let params = SystemParams::resonant(0.5).unwrap();
        let space = HilbertSpace::new(16).unwrap();
        let tau = PI / 18.0;
        let (eps, coeffs) = epsilon_operator(&params, tau, space).unwrap();
        assert!((coeffs.g1.norm() - 0.08726646).abs() < 1e-8);
        assert!((coeffs.g2.norm() - 0.02181662).abs() < 1e-8);
        // |g1| = τ_I(ω₀+ω_c)λ₀/2 and |g2| = τ_Iλ₀²/2 exactly
        assert!((coeffs.g1.norm() - tau * 2.0 * 0.5 / 2.0).abs() < 1e-15);
        assert!((coeffs.g2.norm() - tau * 0.25 / 2.0).abs() < 1e-15);
        let comm = epsilon_commutator(&params, tau, space);
        assert!(epsilon_interior_deviation(&eps, &comm, space) <= 1e-10);
        assert!(eps.hermiticity_error() <= 1e-12);
    }

    #[test]
    fn epsilon_vanishes_without_coupling() {
        let params = SystemParams::resonant(0.0).unwrap();
        let space = HilbertSpace::new(8).unwrap();
        let (eps, _) = epsilon_operator(&params, 1.0, space).unwrap();
        assert!(eps.max_abs() == 0.0);
    }

    #[test]
    fn epsilon_consistency_random_draws() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let space = HilbertSpace::new(14).unwrap();
        for _ in 0..10 {
            let lambda = rng.gen_range(0.0..=1.0);
            let w0 = rng.gen_range(0.7..=1.3);
            let tau = rng.gen_range(0.05..=2.0);
            let params = SystemParams::new(w0, 1.0, lambda).unwrap();
            let (eps, _) = epsilon_operator(&params, tau, space).unwrap();
            let comm = epsilon_commutator(&params, tau, space);
            assert!(epsilon_interior_deviation(&eps, &comm, space) <= 1e-10);
        }
    }

    #[test]
    fn p_epsilon_exact_vs_perturbative() {
        let model = ultra_model();
        let schedule = KickSchedule::new(PI / 18.0, PI / 18.0, 0).unwrap();
        let total = 172;
        let exact = p_epsilon_trace(&model, &schedule, total, PEpsilonMode::Exact).unwrap();
        let pert = p_epsilon_trace(&model, &schedule, total, PEpsilonMode::Perturbative).unwrap();
        assert_eq!(exact.len(), pert.len());
        let pe = exact.column("eps").unwrap();
        let pp = pert.column("eps").unwrap();
        let max_exact = pe.iter().cloned().fold(0.0, f64::max);
        assert!(max_exact > 1e-4 && max_exact < 1e-2, "max p_eps = {max_exact}");
        for (a, b) in pe.iter().zip(pp.iter()) {
            let tol = (0.2 * a.abs()).max(5e-4);
            assert!((a - b).abs() <= tol, "exact {a} vs pert {b}");
        }
    }

    #[test]
    fn p_epsilon_zero_coupling_is_zero() {
        let params = SystemParams::resonant(0.0).unwrap();
        let space = HilbertSpace::new(8).unwrap();
        let model = ModelOperators::new(params, space);
        let schedule = KickSchedule::new(PI / 18.0, PI / 18.0, 0).unwrap();
        for mode in [PEpsilonMode::Exact, PEpsilonMode::Perturbative] {
            let trace = p_epsilon_trace(&model, &schedule, 40, mode).unwrap();
            for p in trace.column("eps").unwrap() {
                assert!(p.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn p_epsilon_scales_quadratically_in_tau() {
        // fixed horizon, τ_I halved → max p_ε drops by ~4
        let model = ultra_model();
        let horizon = 60.0;
        let run = |tau: f64| {
            let schedule = KickSchedule::new(tau, tau, 0).unwrap();
            let total = (horizon / (2.0 * tau)).ceil() as usize;
            let trace = p_epsilon_trace(&model, &schedule, total, PEpsilonMode::Exact).unwrap();
            trace.column("eps").unwrap().iter().cloned().fold(0.0, f64::max)
        };
        let coarse = run(PI / 18.0);
        let fine = run(PI / 36.0);
        let ratio = coarse / fine;
        assert!((3.0..=5.0).contains(&ratio), "ratio = {ratio}");
    }

    #[test]
    fn effective_jc_scaling() {
        let params = SystemParams::resonant(0.5).unwrap();
        let equal = KickSchedule::new(PI / 18.0, PI / 18.0, 10).unwrap();
        let eff = effective_jc_prediction(&params, &equal);
        assert!((eff.lambda - 0.25).abs() < 1e-15);
        assert!((eff.exchange_period() - 4.0 * PI).abs() < 1e-12);
        let no_kick_time = KickSchedule::new(1.0, 0.0, 10).unwrap();
        let eff = effective_jc_prediction(&params, &no_kick_time);
        assert!((eff.lambda - 0.5).abs() < 1e-15);
    }

    #[test]
    fn narrow_scan_detects_m1_peak() {
        let params = fig2_params();
        let space = HilbertSpace::new(20).unwrap();
        let center = resonance_tau(&params, Branch::Minus, 1, 0.0);
        let grid: Vec<f64> = (0..=60).map(|i| center - 0.3 + 0.01 * i as f64).collect();
        let budget = recommended_kick_budget(&params).unwrap();
        assert_eq!(budget, 58);
        let scan = scan_resonances(&params, space, &grid, PI / 2.0, budget).unwrap();
        let peaks: Vec<_> = scan.peaks_of(Branch::Minus).collect();
        assert_eq!(peaks.len(), 1, "expected a single − peak, got {peaks:?}");
        let peak = peaks[0];
        assert_eq!(peak.m, 1);
        let width_pred = 8.0 * 0.022153079 / delta_s(&params, Branch::Minus);
        assert!((peak.location - center).abs() <= width_pred, "center {}", peak.location);
        assert!(peak.width >= width_pred / 2.0 && peak.width <= width_pred * 2.0);
        assert!(peak.height > 0.9);
        // off-peak suppression midway to the next resonance
        let mid = (center + resonance_tau(&params, Branch::Minus, 2, 0.0)) / 2.0;
        let quiet = scan_resonances(&params, space, &[mid], PI / 2.0, budget).unwrap();
        assert!(quiet.p_max_minus[0] <= 0.05, "off-peak {}", quiet.p_max_minus[0]);
    }
}
