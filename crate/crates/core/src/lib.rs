//! # sdiv-core
//!
//! One-shot and asymptotic error probabilities for binary quantum hypothesis
//! testing between finite-dimensional states `rho` (null) and `sigma`
//! (alternative), and the divergences that govern their exponents.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`matrix`] | validated states and tests, eigensystems, fractional and tensor powers |
//! | [`divergences`] | `q(a) = Tr(rho^a sigma^(1-a))`, Petz-Renyi, Umegaki, `D_min`, Chernoff, `xi_s`, Hoeffding bound |
//! | [`oneshot`] | Neyman-Pearson boundary and the exact one-shot optima `beta_eps`, `Q_C^(s)`, `p_err` |
//! | [`oracles`] | classical and brute-force references for the one-shot solvers |
//! | [`channels`] | Kraus channels for data-processing checks |
//! | [`asymptotics`] | exponent traces over tensor powers and figure tables |
//!
//! The family `xi_s(rho||sigma) = sup_a log q(a) / (a (1 - s) - 1)` runs from
//! the Umegaki divergence (`s = 0`) through the Chernoff divergence
//! (`s = 1`), and is the exponent of
//! `Q_C^(s) = min { Tr(L sigma) : Tr((I - L) rho) <= C Tr(L sigma)^s }`
//! on i.i.d. copies.
//!
//! All logarithms are natural.

#![forbid(unsafe_code)]

pub mod asymptotics;
pub mod channels;
pub mod divergences;
mod error;
mod extended;
pub mod io;
pub mod matrix;
pub mod oneshot;
pub mod optimize;
pub mod oracles;
mod policy;
pub mod states;

pub use error::{Error, Result};
pub use extended::ExtendedReal;
pub use matrix::{ComplexSquareMatrix, DensityMatrix, EigenSystem, TestOperator};
pub use policy::NumericPolicy;
