//! Numerical laboratory for singular spherically symmetric Ricci solitons and
//! their evolution under the Ricci flow.
//!
//! The crate is organized around four stages:
//!
//! 1. [`soliton`] — construct singular soliton trajectories in phase space,
//!    reconstruct the metric profile `psi`, the potential gradient `omega`
//!    and verify asymptotics, curvature and the soliton identities.
//! 2. [`flow`] — evolve the soliton under the Ricci flow through its radial
//!    diffeomorphism flow, track the arc-length coordinate and check the
//!    domain "opening up" bounds.
//! 3. [`weights`] — evaluate the singular background coefficient fields, the
//!    space-time weight, weighted Sobolev norms and the energy functional.
//! 4. [`perturb`] — solve the transformed perturbation system by Picard
//!    iteration over implicit linear steps, monitor contraction and energies,
//!    and reconstruct the perturbed metric for direct residual validation.

pub mod error;
pub mod flow;
pub mod num;
pub mod perturb;
pub mod soliton;
pub mod weights;

pub use error::{Error, Result};
