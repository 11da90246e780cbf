//! Solver for the transformed perturbation system: Picard iteration over
//! implicit linear steps, with weighted-energy contraction monitoring and
//! direct validation of the reconstructed metric against the Ricci-flow
//! system.

mod linear;
mod mms;
mod picard;
mod reconstruct;
mod transform;

pub use linear::{
    assemble_linear_step, binom_tail, linear_step, LinearStepProblem, G_MIN_DEFAULT,
};
pub use mms::{
    fitted_order, local_step_order_probe, mms_spatial_study, mms_temporal_study, MmsPoint,
};
pub use picard::{
    energy_monitor, make_initial_data, picard_solve, series_to_csv, EnergyMonitorReport,
    InitialShape, PicardReport, SolverContext,
};
pub use reconstruct::{reconstruct_and_residual, ReconstructReport, ResidualSummary};
pub use transform::{
    eta_inverse, eta_transform, pde_rhs, pde_rhs_point, raw_rhs_point, CoeffPoint,
};

use crate::error::{Error, Result};
use serde::Serialize;

/// eta and xi samples on the spatial grid at one time.
#[derive(Debug, Clone, Serialize)]
pub struct PerturbationState {
    pub t: f64,
    pub eta: Vec<f64>,
    pub xi: Vec<f64>,
}

impl PerturbationState {
    pub fn zeros(t: f64, nx: usize) -> Self {
        Self { t, eta: vec![0.0; nx], xi: vec![0.0; nx] }
    }

    /// Positivity of the metric factors and the Dirichlet boundary values.
    pub fn validate(&self) -> Result<()> {
        if self.eta.len() != self.xi.len() || self.eta.is_empty() {
            return Err(Error::InvalidInput("state column mismatch".into()));
        }
        if self.eta.iter().any(|e| !(*e + 1.0 > 0.0)) || self.xi.iter().any(|x| !(*x + 1.0 > 0.0))
        {
            return Err(Error::DegenerateState(
                "eta + 1 and xi + 1 must stay positive".into(),
            ));
        }
        if self.xi[0] != 0.0 || *self.xi.last().unwrap() != 0.0 {
            return Err(Error::DegenerateState("xi must vanish at the domain ends".into()));
        }
        Ok(())
    }

    pub fn sup_norm(&self) -> f64 {
        self.eta.iter().chain(&self.xi).fold(0.0f64, |a, v| a.max(v.abs()))
    }
}

/// Borrowed previous-iterate fields used to assemble a linear step.
#[derive(Debug, Clone, Copy)]
pub struct PrevIterate<'a> {
    pub eta: &'a [f64],
    pub xi: &'a [f64],
}
