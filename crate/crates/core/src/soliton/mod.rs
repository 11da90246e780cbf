//! Singular spherically symmetric gradient Ricci solitons.
//!
//! A soliton metric `dx^2 + psi^2(x) g_{S^n}` with radial potential gradient
//! `omega` is encoded by the first-order phase variables
//!
//! ```text
//! W = 1 / (-omega + n psi'/psi),   X = sqrt(n) W psi'/psi,
//! Y = sqrt(n(n-1)) W / psi,        dy = dx / W,
//! ```
//!
//! whose dynamics has a source at (W, X, Y) = (0, 1, 0). Trajectories leaving
//! that source with W, Y > 0 reconstruct metrics singular at x = 0 with
//! `psi ~ a x^{1/sqrt(n)}` and `omega ~ (sqrt(n)-1)/x`. This module builds
//! those trajectories, reconstructs the metric profile and checks every
//! quantitative property used downstream (asymptotic exponents, curvature,
//! soliton identities, the critical slice of the potential).

mod dynamics;
mod eval;
mod integrate;
mod profile;

pub use eval::ProfileEval;

pub use dynamics::{
    equilibria_and_linearization, jacobian_eigenvalues, numerical_jacobian, ode_rhs,
    source_eigenvalues, steady_rhs,
};
pub use integrate::{integrate_trajectory, lyapunov_check, sample_steady_uniform, LyapunovReport};
pub use profile::{
    curvature, explicit_profile_n4, find_x_crit, fit_asymptotics, gradient_identities,
    profile_to_csv, reconstruct_profile, soliton_residual, trajectory_to_csv, AsymptoticsReport,
    GradientIdentityReport, IdentityStats,
};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Half-complete steady solitons live on (0, +inf); general local solitons
/// (any soliton constant) on (0, delta).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolitonCase {
    #[serde(rename = "HC")]
    HalfComplete,
    #[serde(rename = "G")]
    General,
}

impl std::fmt::Display for SolitonCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SolitonCase::HalfComplete => write!(f, "HC"),
            SolitonCase::General => write!(f, "G"),
        }
    }
}

/// Sphere dimension, soliton constant and phase-space starting point.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolitonParams {
    /// Sphere dimension n (total manifold dimension n+1).
    pub n: u32,
    /// Soliton constant: 0 steady, < 0 shrinking, > 0 expanding.
    pub lambda: f64,
    /// Initial W(0) > 0.
    pub w0: f64,
    /// Initial X(0).
    pub x0v: f64,
    /// Initial Y(0) > 0.
    pub y0: f64,
    /// Distance scale from the source equilibrium (0, 1, 0).
    pub eps_init: f64,
    pub case: SolitonCase,
}

impl SolitonParams {
    /// Start on the mixed unstable direction at distance `eps` from (0,1,0).
    pub fn near_source(n: u32, lambda: f64, eps: f64, case: SolitonCase) -> Self {
        let c = eps / 3f64.sqrt();
        Self { n, lambda, w0: c, x0v: 1.0 + c, y0: c, eps_init: eps, case }
    }

    /// Half-complete start just inside the unit disk of the steady (X, Y)
    /// plane, with W(0) scaled so the reconstructed amplitude of
    /// `psi ~ a x^(1/sqrt n)` lands near `a_target`.
    pub fn half_complete(n: u32, eps: f64, a_target: f64) -> Self {
        let nf = n as f64;
        let sq = nf.sqrt();
        let x0v = 1.0 - eps;
        let y0 = (2.0 * x0v * eps).sqrt();
        // Invert a = sqrt(n(n-1)) C1^(1-1/sqrt n) / C2 with C1 ~ W0, C2 ~ Y0.
        let w0 = (a_target * y0 / (nf * (nf - 1.0)).sqrt()).powf(sq / (sq - 1.0));
        Self { n, lambda: 0.0, w0, x0v, y0, eps_init: eps, case: SolitonCase::HalfComplete }
    }

    /// Start on the invariant curve Y^2 = 2X(1-X) of the n = 4 steady system,
    /// which carries the closed-form profile psi = a sqrt(x). W(0) is the
    /// exact curve value, so the run reproduces the scale-a family member.
    pub fn on_explicit_curve(a: f64, eps: f64) -> Self {
        let x0v = 1.0 - eps;
        Self {
            n: 4,
            lambda: 0.0,
            w0: a * a * eps / 6.0,
            x0v,
            y0: (2.0 * x0v * eps).sqrt(),
            eps_init: eps,
            case: SolitonCase::HalfComplete,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidInput(format!(
                "sphere dimension n = {} < 2: the source structure needs n > 1",
                self.n
            )));
        }
        if !(self.w0 > 0.0) || !(self.y0 > 0.0) {
            return Err(Error::InvalidInput("need W(0) > 0 and Y(0) > 0".into()));
        }
        if self.case == SolitonCase::HalfComplete && self.lambda != 0.0 {
            return Err(Error::InvalidInput(
                "half-complete solitons are steady: lambda must be 0".into(),
            ));
        }
        if ![self.lambda, self.w0, self.x0v, self.y0, self.eps_init].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("non-finite soliton parameters".into()));
        }
        Ok(())
    }

    pub fn sqrt_n(&self) -> f64 {
        (self.n as f64).sqrt()
    }
}

/// One phase-space sample (W, X, Y).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryState {
    pub w: f64,
    pub x: f64,
    pub y: f64,
}

impl TrajectoryState {
    pub fn new(w: f64, x: f64, y: f64) -> Self {
        Self { w, x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.w.is_finite() && self.x.is_finite() && self.y.is_finite()
    }

    pub fn norm(&self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y).sqrt()
    }
}

/// Phase-space trajectory sampled against the independent variable y.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub ys: Vec<f64>,
    pub states: Vec<TrajectoryState>,
    pub params: SolitonParams,
    /// y at which a general-case run left the phase box, if it did.
    pub exit_y: Option<f64>,
}

impl Trajectory {
    pub fn validate(&self) -> Result<()> {
        if self.ys.len() != self.states.len() {
            return Err(Error::InvalidInput("trajectory sample length mismatch".into()));
        }
        if self.ys.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidTrajectory("y grid not strictly increasing".into()));
        }
        if self.states[0].y == 0.0 {
            // Constant trajectory on the Y = 0 plane (equilibrium start).
            if self.states.iter().any(|s| s.y != 0.0) {
                return Err(Error::InvalidTrajectory("Y left the invariant plane".into()));
            }
        } else {
            let sign = self.states[0].y.signum();
            if self.states.iter().any(|s| s.y == 0.0 || s.y.signum() != sign) {
                return Err(Error::InvalidTrajectory("Y changed sign along the trajectory".into()));
            }
        }
        Ok(())
    }
}

/// Metric profile tables against the radial coordinate x > 0, together with
/// the fitted asymptotic constants.
#[derive(Debug, Clone, Serialize)]
pub struct SolitonProfile {
    pub xs: Vec<f64>,
    pub psi: Vec<f64>,
    pub psi1: Vec<f64>,
    pub psi2: Vec<f64>,
    pub omega: Vec<f64>,
    pub omega1: Vec<f64>,
    pub params: SolitonParams,
    pub a_fit: Option<f64>,
    pub c1_fit: Option<f64>,
    pub c2_fit: Option<f64>,
    pub mu_fit: Option<f64>,
    /// Set when the profile is the closed-form n = 4 family member with the
    /// given scale; evaluation then bypasses interpolation.
    pub explicit_a: Option<f64>,
}

impl SolitonProfile {
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.xs.len();
        if [self.psi.len(), self.psi1.len(), self.psi2.len(), self.omega.len(), self.omega1.len()]
            .iter()
            .any(|l| *l != n)
        {
            return Err(Error::InvalidProfile("column length mismatch".into()));
        }
        if self.xs.is_empty() || self.xs[0] <= 0.0 || self.xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidProfile("x grid must be strictly increasing, > 0".into()));
        }
        if self.psi.iter().any(|p| !(*p > 0.0)) {
            return Err(Error::InvalidProfile("psi must be positive".into()));
        }
        Ok(())
    }
}

/// Ricci tensor components and scalar curvature at one grid point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CurvatureSample {
    /// Coefficient of dx^2 in Ric.
    pub ric_radial: f64,
    /// Coefficient of g_{S^n} in Ric.
    pub ric_sphere: f64,
    /// Scalar curvature.
    pub scalar: f64,
}
