//! Quantum-controlled classical gravity: each branch pair sources a
//! classical retarded field, and the only quantum ingredient is which branch
//! the masses took.
//!
//! Over the window the pair on branches (p₁, p₂) accumulates the action
//! phase `2πG·Δ_{p₁p₂}` of its classical field configuration, where Δ is the
//! symmetric (retarded + advanced) propagator functional from [`kernels`].
//! The final state is therefore still pure — a diagonal unitary in the
//! branch basis acting on the maximally coherent initial state — and its
//! negativity depends on the phases only through the antisymmetric
//! combination `D = Δ_LL + Δ_RR − Δ_LR − Δ_RL`:
//!
//! ```text
//! N_c = ½ |sin(πG·D)|
//! ```
//!
//! The leading-order form `(πG/2)|D|` is kept alongside because the
//! perturbative quantum model is only ever computed to first order in G, and
//! comparing an exact sine against a truncated expansion would misattribute
//! the difference to the models rather than to the truncation.
//!
//! [`kernels`]: crate::kernels

use crate::density::{zero4, Mat4c};
use crate::error::GmeResult;
use crate::kernels::{phase_pair_functional, Functional, NumericsConfig};
use crate::worldline::{BranchConfig, BranchPair};
use num_complex::Complex64;
use rayon::prelude::*;

/// The four phase functionals of one configuration, with the coupling they
/// are to be exponentiated with.
#[derive(Debug, Clone)]
pub struct PhaseTable {
    /// Δ per branch pair, indexed by [`BranchPair::index`].
    pub delta: [Functional; 4],
    /// Newton's constant in internal units (dimensionless here).
    pub coupling: f64,
}

impl PhaseTable {
    /// Branch phase `2πG·Δ_{p₁p₂}` accumulated over the window.
    pub fn phase(&self, pair: BranchPair) -> f64 {
        2.0 * std::f64::consts::PI * self.coupling * self.delta[pair.index()].value
    }

    /// The entanglement-relevant combination `D = Δ_LL + Δ_RR − Δ_LR − Δ_RL`.
    ///
    /// Adding a constant to all four entries (a global phase) drops out.
    pub fn combination(&self) -> f64 {
        let d = |p: BranchPair| self.delta[p.index()].value;
        d(BranchPair::LL) + d(BranchPair::RR) - d(BranchPair::LR) - d(BranchPair::RL)
    }
}

/// Evaluate all four Δ functionals of a configuration.
///
/// The pairs are independent quadratures and run in parallel; results land
/// by pair index, so the table is identical regardless of scheduling.
pub fn compute_phase_table(
    config: &BranchConfig,
    coupling: f64,
    numerics: &NumericsConfig,
) -> GmeResult<PhaseTable> {
    let entries: Vec<GmeResult<Functional>> = BranchPair::ALL
        .par_iter()
        .map(|&p| {
            let (w1, w2) = config.pair(p);
            phase_pair_functional(w1, w2, config.window, numerics)
        })
        .collect();
    let mut delta = [Functional { value: 0.0, abs_error: 0.0, evaluations: 0 }; 4];
    for (slot, entry) in delta.iter_mut().zip(entries) {
        *slot = entry?;
    }
    Ok(PhaseTable { delta, coupling })
}

/// Final two-particle state: ρ_c entries `¼·exp(2πiG(Δ_p − Δ_q))`.
///
/// This is the diagonal unitary `diag(e^{2πiG·Δ_p})` conjugating the
/// maximally coherent initial state, so the result is pure for any table.
pub fn classical_final_state(table: &PhaseTable) -> Mat4c {
    let mut rho = zero4();
    for p in BranchPair::ALL {
        for q in BranchPair::ALL {
            let arg = table.phase(p) - table.phase(q);
            rho[p.index()][q.index()] = 0.25 * Complex64::new(arg.cos(), arg.sin());
        }
    }
    rho
}

/// Negativity of the classical-model final state.
///
/// `exact` selects `½|sin(πG·D)|`; otherwise the leading-order `(πG/2)|D|`
/// used for like-for-like comparison with the perturbative model. Large
/// couplings alias through the sine — no phase unwrapping is attempted,
/// negativity only ever sees `|sin|`.
pub fn classical_negativity(table: &PhaseTable, exact: bool) -> f64 {
    let arg = std::f64::consts::PI * table.coupling * table.combination();
    if exact {
        0.5 * arg.sin().abs()
    } else {
        0.5 * arg.abs()
    }
}
