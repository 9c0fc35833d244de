//! Perturbative model with a quantized mediating field, to first order in
//! the coupling.
//!
//! Tracing the field out of the joint evolution leaves the branch-basis
//! state `ρ = ρ₀ + δρ_c + δρ_l + δρ_q` with three structurally distinct
//! increments, each linear in `G`:
//!
//! * `δρ_c` — coherent phases. Entry `(p, q)` is `(iπG/2)(Δ_p − Δ_q)`: the
//!   first-order expansion of the same diagonal unitary the classical model
//!   applies exactly, built from the symmetric-propagator functionals Δ.
//! * `δρ_l` — vacuum-noise damping. Each coherence decays by the noise of
//!   every particle whose branch labels differ between the two sides:
//!   entry `(p, q)` is `−πG·Σ_j (L_V − L_I)_j·[p_j ≠ q_j]`, with the
//!   self/cross smeared integrals `L_V`, `L_I` per particle. Since
//!   `L_I ≤ L_V`, damping only ever shrinks coherences — the positive sign
//!   would push the state's largest eigenvalue above one at first order.
//! * `δρ_q` — the symmetrized cross-correlation of the fields sourced by
//!   the two particles: `(πG/2)·h·antidiag(1, −1, −1, 1)` with
//!   `h = H_LR + H_RL − H_LL − H_RR`. This term has no classical
//!   counterpart and survives spacelike windows, where every Δ vanishes
//!   identically but the Hadamard functionals do not.
//!
//! The closed forms for `δρ_l` and `δρ_q` assume each particle's two
//! branches are rigid translates of each other (so a single `L_V` per
//! particle describes both); [`perturbative_corrections`] enforces that and
//! refuses other geometries rather than silently misassembling.
//!
//! Negativity is extracted by eigenvalue perturbation theory rather than by
//! diagonalizing `ρ₀ + δρ`: at the physical coupling the increments sit
//! dozens of orders of magnitude below the roundoff floor of the unit
//! eigenvalue, so a direct eigensolve returns zero. The perturbative route
//! is linear in the increment and loses nothing — see
//! [`quantum_negativity`].

use crate::classical::{compute_phase_table, PhaseTable};
use crate::density::{add, hermitian_eigenvalues, partial_transpose, zero4, Mat4c};
use crate::error::{GmeError, GmeResult};
use crate::kernels::{
    branches_congruent, hadamard_pair_functional, vacuum_noise_terms, Functional, NumericsConfig,
    VacuumNoise,
};
use crate::worldline::{BranchConfig, BranchPair};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Maximally coherent branch state: every entry `¼`.
///
/// Both interferometers start in an even superposition of their branches,
/// so the joint state is the pure projector onto `½(1, 1, 1, 1)`.
pub fn initial_state() -> Mat4c {
    [[Complex64::new(0.25, 0.0); 4]; 4]
}

/// First-order state of the quantized-mediator model, with the functionals
/// it was assembled from.
#[derive(Debug, Clone)]
pub struct PerturbedState {
    /// Unperturbed state ([`initial_state`]).
    pub rho0: Mat4c,
    /// Coherent-phase increment.
    pub d_rho_c: Mat4c,
    /// Vacuum-noise damping increment.
    pub d_rho_l: Mat4c,
    /// Field cross-correlation increment.
    pub d_rho_q: Mat4c,
    /// Coupling the increments were assembled at.
    pub coupling: f64,
    /// Order in the coupling the expansion is carried to. Always 1; recorded
    /// so reports state it rather than imply it.
    pub order: usize,
    /// The Δ functionals behind `d_rho_c`, with their error estimates.
    pub phases: PhaseTable,
    /// The four Hadamard functionals behind `d_rho_q`, by pair index.
    pub hadamard: [Functional; 4],
    /// The smeared noise integrals behind `d_rho_l`.
    pub noise: VacuumNoise,
}

impl PerturbedState {
    /// Sum of the three increments, `ρ − ρ₀`.
    pub fn increment(&self) -> Mat4c {
        add(&add(&self.d_rho_c, &self.d_rho_l), &self.d_rho_q)
    }

    /// The assembled state `ρ₀ + δρ_c + δρ_l + δρ_q`.
    pub fn total(&self) -> Mat4c {
        add(&self.rho0, &self.increment())
    }

    /// `h = H_LR + H_RL − H_LL − H_RR`, the coefficient of `d_rho_q`.
    pub fn hadamard_combination(&self) -> f64 {
        hadamard_combination(&self.hadamard)
    }

    /// `|G_LL + G_RR − G_LR − G_RL|` for the Feynman combinations
    /// `G = (H − iΔ)/2`, i.e. `½·hypot(D, h)` with `D` the phase
    /// combination. This is the coherent part of the leading negativity.
    pub fn combination_magnitude(&self) -> f64 {
        f64::hypot(self.phases.combination(), self.hadamard_combination()) * 0.5
    }
}

/// Check the symmetry the damping and cross-correlation closed forms rest
/// on: each particle's branches must be rigid translates of each other over
/// the window, so a single self-noise integral describes both.
pub fn check_branch_symmetry(config: &BranchConfig) -> GmeResult<()> {
    for (label, a, b) in [
        ("particle 1", &config.left1, &config.right1),
        ("particle 2", &config.left2, &config.right2),
    ] {
        if !branches_congruent(a, b, config.window) {
            return Err(GmeError::Configuration(format!(
                "{label} branches are not rigid translates of each other over the window; \
                 the first-order increments assume congruent branch pairs"
            )));
        }
    }
    Ok(())
}

/// Evaluate the four Hadamard functionals of a configuration, by pair index.
pub fn compute_hadamard_table(
    config: &BranchConfig,
    numerics: &NumericsConfig,
) -> GmeResult<[Functional; 4]> {
    let entries: Vec<GmeResult<Functional>> = BranchPair::ALL
        .par_iter()
        .map(|&p| {
            let (w1, w2) = config.pair(p);
            hadamard_pair_functional(w1, w2, config.window, numerics)
        })
        .collect();
    let mut table = [Functional { value: 0.0, abs_error: 0.0, evaluations: 0 }; 4];
    for (slot, entry) in table.iter_mut().zip(entries) {
        *slot = entry?;
    }
    Ok(table)
}

/// Assemble the first-order state from already-evaluated functionals. The
/// coupling is the phase table's; callers that evaluated the parts
/// themselves (sweeps reusing functionals across diagnostics) go through
/// here so there is exactly one assembly convention.
pub fn assemble_state(
    phases: PhaseTable,
    hadamard: [Functional; 4],
    noise: VacuumNoise,
) -> PerturbedState {
    let coupling = phases.coupling;
    let d_rho_c = phase_increment(&phases);
    let d_rho_l = noise_increment(&noise, coupling);
    let d_rho_q = hadamard_increment(hadamard_combination(&hadamard), coupling);
    PerturbedState {
        rho0: initial_state(),
        d_rho_c,
        d_rho_l,
        d_rho_q,
        coupling,
        order: 1,
        phases,
        hadamard,
        noise,
    }
}

/// Evaluate all functionals of a configuration and assemble the first-order
/// state.
///
/// The underlying quadratures (four Δ, four H, the noise set) are
/// independent and run concurrently. Fails with a configuration error when
/// a particle's branches are not rigid translates of each other, since the
/// damping and cross-correlation closed forms assume they are.
pub fn perturbative_corrections(
    config: &BranchConfig,
    coupling: f64,
    numerics: &NumericsConfig,
) -> GmeResult<PerturbedState> {
    check_branch_symmetry(config)?;
    let (phases, (hadamard, noise)) = rayon::join(
        || compute_phase_table(config, coupling, numerics),
        || {
            rayon::join(
                || compute_hadamard_table(config, numerics),
                || vacuum_noise_terms(config, numerics),
            )
        },
    );
    Ok(assemble_state(phases?, hadamard?, noise?))
}

fn hadamard_combination(table: &[Functional; 4]) -> f64 {
    let h = |p: BranchPair| table[p.index()].value;
    h(BranchPair::LR) + h(BranchPair::RL) - h(BranchPair::LL) - h(BranchPair::RR)
}

/// `δρ_c[p][q] = (iπG/2)(Δ_p − Δ_q)` — the exact branch unitary
/// `diag(e^{2πiG·Δ_p})` conjugating ρ₀, truncated after the linear term.
fn phase_increment(phases: &PhaseTable) -> Mat4c {
    let mut out = zero4();
    for p in BranchPair::ALL {
        for q in BranchPair::ALL {
            let dd = phases.delta[p.index()].value - phases.delta[q.index()].value;
            out[p.index()][q.index()] = Complex64::new(0.0, 0.5 * PI * phases.coupling * dd);
        }
    }
    out
}

/// `δρ_l[p][q] = −πG·Σ_j (L_V − L_I)_j·[p_j ≠ q_j]`: every mismatched
/// particle contributes its own noise difference to the decay of that
/// coherence. Diagonal entries have no mismatch and stay untouched.
fn noise_increment(noise: &VacuumNoise, coupling: f64) -> Mat4c {
    let l1 = noise.particle1.l_v.value - noise.particle1.l_i.value;
    let l2 = noise.particle2.l_v.value - noise.particle2.l_i.value;
    let mut out = zero4();
    for p in BranchPair::ALL {
        for q in BranchPair::ALL {
            let mut damp = 0.0;
            if p.p1 != q.p1 {
                damp += l1;
            }
            if p.p2 != q.p2 {
                damp += l2;
            }
            out[p.index()][q.index()] = Complex64::new(-PI * coupling * damp, 0.0);
        }
    }
    out
}

/// `δρ_q = (πG/2)·h·antidiag(1, −1, −1, 1)`: the field cross-correlation
/// couples only the coherences in which both particles switch branch, with
/// opposite sign for aligned (LL↔RR) and anti-aligned (RL↔LR) switches.
fn hadamard_increment(h: f64, coupling: f64) -> Mat4c {
    let x = Complex64::new(0.5 * PI * coupling * h, 0.0);
    let mut out = zero4();
    out[0][3] = x;
    out[3][0] = x;
    out[1][2] = -x;
    out[2][1] = -x;
    out
}

/// Orthonormal basis of the zero eigenspace of the partially transposed
/// initial state. `ρ₀` is a real product state, so its partial transpose is
/// itself, with spectrum `{1, 0, 0, 0}`; these three vectors span the
/// degenerate kernel, in the branch basis `L₁L₂, R₁L₂, L₁R₂, R₁R₂`.
const NULL_BASIS: [[f64; 4]; 3] = [
    [0.5, -0.5, -0.5, 0.5],
    [0.5, -0.5, 0.5, -0.5],
    [0.5, 0.5, -0.5, -0.5],
];

/// Leading-order contribution of an increment to the negativity.
///
/// First-order perturbation of the partially transposed spectrum: the unit
/// eigenvalue of `PT(ρ₀)` shifts but stays positive; the triply degenerate
/// zero eigenvalue splits into the eigenvalues of the transposed increment
/// projected onto the kernel. Any that come out negative are negativity.
fn leading_negativity_of(increment: &Mat4c) -> f64 {
    let pt = partial_transpose(increment, 1);
    let mut block = [[Complex64::ZERO; 3]; 3];
    for (i, row) in NULL_BASIS.iter().enumerate() {
        for (j, col) in NULL_BASIS.iter().enumerate() {
            let mut acc = Complex64::ZERO;
            for p in 0..4 {
                for q in 0..4 {
                    acc += row[p] * pt[p][q] * col[q];
                }
            }
            block[i][j] = acc;
        }
    }
    hermitian_eigenvalues(block).into_iter().filter(|l| *l < 0.0).map(f64::abs).sum()
}

/// Negativity of the perturbed state, to first order in the coupling.
///
/// Computed by degenerate eigenvalue perturbation theory on the partial
/// transpose (see [`leading_negativity_of`]), never by diagonalizing the
/// assembled matrix: at the physical coupling the increments are smaller
/// than the roundoff of the unit eigenvalue by dozens of orders of
/// magnitude, so a direct eigensolve would return exactly zero. The
/// perturbative eigenvalues are linear in the increment and suffer no such
/// cancellation.
///
/// Damping enters the kernel block as a positive diagonal, so noise only
/// ever lifts eigenvalues towards zero: when it dominates the coherent
/// combination the spectrum is nonnegative and the negativity clamps to
/// zero on its own.
pub fn quantum_negativity(state: &PerturbedState) -> f64 {
    leading_negativity_of(&state.increment())
}

/// [`classical_limit_switch`] on an already-evaluated phase table.
pub fn classical_limit_from_table(phases: &PhaseTable) -> f64 {
    leading_negativity_of(&phase_increment(phases))
}

/// The perturbative pipeline with the quantum field kernels switched off.
///
/// Forcing the symmetrized two-point functions (Hadamard and noise) to zero
/// removes `δρ_l` and `δρ_q` outright and leaves only the coherent phases —
/// the mediator degenerates to a phase channel. The leading negativity of
/// that truncation is `(πG/2)|D|`, which is exactly the classical model's
/// leading order: the two models differ only through the vacuum terms.
///
/// No branch-congruence requirement here: the phase increment is the
/// expansion of an exact unitary and holds for any geometry.
pub fn classical_limit_switch(
    config: &BranchConfig,
    coupling: f64,
    numerics: &NumericsConfig,
) -> GmeResult<f64> {
    let phases = compute_phase_table(config, coupling, numerics)?;
    Ok(classical_limit_from_table(&phases))
}
