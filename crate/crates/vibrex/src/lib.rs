//! Quantum state transfer of a vibrational excitation between two end groups
//! grafted onto a molecular lattice, mediated by the lattice's one-exciton band
//! and perturbed by a single low-frequency phonon mode at temperature T.
//!
//! The transfer figure of merit is the thermally averaged effective propagator
//! G(t) from the source group to the target group; its maximum over a search
//! window gives the best transfer fidelity. The crate computes G(t) four ways:
//!
//! - [`exact`]: full diagonalization of the coupled exciton-phonon Hamiltonian
//!   on a truncated number-state space, thermal trace over the phonon.
//! - [`pt`]: quasi-degenerate second-order perturbation theory (dressed states,
//!   per-state phonon frequency shifts, full and diagonal propagators).
//! - [`threepath`]: closed-form three-level interference model with analytic
//!   decoherence factors, optimal-coupling and temperature-scaling formulas.
//!
//! Start with [`params::ModelParams::reference`] and the `examples/`
//! directory; the `vibrex` binary exposes the same pipelines as subcommands.

pub mod linalg;

pub use linalg::Mat;

pub mod cli;
pub mod exact;
pub mod exciton;
pub mod fockspace;
pub mod harness;
pub mod params;
pub mod pt;
pub mod threepath;
