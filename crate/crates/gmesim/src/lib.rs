//! Simulator for gravity-mediated entanglement between two masses, each put
//! into a spatial superposition of two worldlines (a BMV-type experiment).
//!
//! Two models of the gravitational interaction are implemented side by side:
//!
//! * **Quantum-controlled classical gravity** — on each branch pair the masses
//!   source a classical retarded field, and the branch picks up the phase
//!   `exp(2πi G Δ_{p1p2})` of the corresponding classical action. The final
//!   two-mass state is pure and its negativity is `½|sin(πG Σ± Δ)|`.
//! * **Perturbative quantum gravity** — the linearized field is integrated out
//!   to second order in `√G`. Besides the classical phases this produces a
//!   Hadamard-function contribution to the coherences and local vacuum-noise
//!   damping, assembled as first-order increments `δρ_c + δρ_l + δρ_q` on the
//!   maximally-coherent initial state.
//!
//! The crate quantifies when the predicted negativities diverge: the ratio of
//! the (classical) retarded-propagator combination to the (quantum) Hadamard
//! combination is the *dominance ratio*, which for laboratory-scale windows
//! (`T` ~ 1 s, separations ~ 1 µm) is astronomically large, and which collapses
//! toward unity for short, spacelike windows.
//!
//! Everything is computed in natural units `c = ħ = 1` with a configurable
//! length scale; see [`units`]. Worldlines are closed-form (static, uniform
//! drift, or a C² split–hold–recombine family, see [`worldline`]); all pair
//! functionals are evaluated by deterministic adaptive quadrature ([`quad`],
//! [`kernels`]) so that repeated runs are bit-identical.

pub mod classical;
pub mod config;
pub mod density;
pub mod error;
pub mod geom;
pub mod kernels;
pub mod output;
pub mod quad;
pub mod quantum;
pub mod reference;
pub mod scanner;
pub mod retarded;
pub mod units;
pub mod worldline;

pub use error::{GmeError, GmeResult};
