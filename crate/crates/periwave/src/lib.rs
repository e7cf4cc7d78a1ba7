//! Solitary travelling waves of the one-dimensional bond-based peridynamic
//! equation
//!
//!   u_tt = ∫_{-δ}^{δ} f(u(x+ξ,t) - u(x,t), ξ) dξ,
//!
//! computed as constrained minimizers: minimize the kinetic energy
//! T(q) = ½∫ q'² over profiles with fixed bond potential energy E_ℓ(q) = K,
//! where short bonds ξ < ℓ are cut off and then removed by continuation
//! ℓ → 0. The Lagrange multiplier λ of a minimizer gives the wave speed
//! c = λ^{-1/2}; stationarity is verified against the travelling-wave
//! equation, and propagation at speed c is confirmed by symplectic time
//! integration of the equation of motion.
//!
//! Modules:
//! - [`model`]: micropotentials W(η,ξ) = V(η/m(ξ)) k(ξ), hypothesis checks,
//!   sound speed and dispersion;
//! - [`profile`]: grid profiles, test families, monotone rearrangement;
//! - [`functionals`]: discrete energies, exact gradients, constraint rescaling;
//! - [`solver`]: projected-gradient minimization and cutoff continuation;
//! - [`dynamics`]: velocity-Verlet propagation checks;
//! - [`probes`], [`config`], [`io`], [`cli`]: experiment front end.

// `!(x > 0.0)` guards are deliberate: they reject NaN, `x <= 0.0` does not.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// indexed loops carry coordinate arithmetic throughout; iterator forms obscure it
#![allow(clippy::needless_range_loop)]

pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod functionals;
pub mod io;
pub mod model;
pub mod probes;
pub mod profile;
pub mod quadrature;
pub mod solver;

pub use error::{PwError, Result};
pub use functionals::{kinetic, potential_energy, EnergyOp, EnergyReport};
pub use model::{HypothesisReport, MicroPotential, SuperquadraticSide, VKind};
pub use profile::{Grid, Profile};
pub use quadrature::QuadratureSpec;
pub use solver::{
    continue_in_ell, el_residual, lagrange_multiplier, minimize, InitKind, SolverConfig,
    WaveSolution,
};
