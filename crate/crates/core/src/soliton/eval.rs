//! Pointwise evaluation of the background profile at arbitrary radii.
//!
//! Tabulated profiles are interpolated through the scaled quantities
//! `ln psi`, `x psi'/psi` and `x omega` against `ln x` (all smooth across the
//! singular end), switching to the analytic leading terms plus a fitted
//! constant correction below the smallest stored radius. The closed-form
//! n = 4 family bypasses interpolation entirely.

use super::SolitonProfile;
use crate::error::{Error, Result};
use crate::num::pchip::Pchip;

#[derive(Debug, Clone)]
enum Backend {
    ExplicitN4 {
        a: f64,
    },
    Table {
        ln_psi: Pchip,
        x_ratio: Pchip,
        x_omega: Pchip,
        x_min: f64,
        x_max: f64,
        // Tail continuations below x_min.
        a_tail: f64,
        c_ratio: f64,
        c_omega: f64,
    },
}

/// Evaluator for psi, psi'/psi, psi''/psi and omega at arbitrary x > 0.
#[derive(Debug, Clone)]
pub struct ProfileEval {
    backend: Backend,
    pub n: u32,
    pub lambda: f64,
}

impl ProfileEval {
    pub fn new(profile: &SolitonProfile) -> Result<Self> {
        profile.validate()?;
        let n = profile.params.n;
        let lambda = profile.params.lambda;
        if let Some(a) = profile.explicit_a {
            if n != 4 || lambda != 0.0 {
                return Err(Error::InvalidProfile(
                    "closed-form profile is the steady n = 4 family".into(),
                ));
            }
            return Ok(Self { backend: Backend::ExplicitN4 { a }, n, lambda });
        }
        if profile.len() < 4 {
            return Err(Error::InvalidProfile("too few samples to interpolate".into()));
        }
        let sq = (n as f64).sqrt();
        let lx: Vec<f64> = profile.xs.iter().map(|x| x.ln()).collect();
        let ln_psi = Pchip::new(&lx, &profile.psi.iter().map(|p| p.ln()).collect::<Vec<_>>())?;
        let ratio_scaled: Vec<f64> = profile
            .xs
            .iter()
            .zip(profile.psi1.iter().zip(&profile.psi))
            .map(|(x, (p1, p))| x * p1 / p)
            .collect();
        let omega_scaled: Vec<f64> =
            profile.xs.iter().zip(&profile.omega).map(|(x, o)| x * o).collect();
        let x_ratio = Pchip::new(&lx, &ratio_scaled)?;
        let x_omega = Pchip::new(&lx, &omega_scaled)?;
        let x_min = profile.xs[0];
        let x_max = *profile.xs.last().unwrap();
        // Constant corrections fitted on the smallest stored radii.
        let k = profile.len().min(8);
        let mean = |f: &dyn Fn(usize) -> f64| (0..k).map(f).sum::<f64>() / k as f64;
        let c_ratio = mean(&|i| {
            profile.psi1[i] / profile.psi[i] - 1.0 / (sq * profile.xs[i])
        });
        let c_omega = mean(&|i| profile.omega[i] - (sq - 1.0) / profile.xs[i]);
        let a_tail = profile.psi[0] / profile.xs[0].powf(1.0 / sq);
        Ok(Self {
            backend: Backend::Table { ln_psi, x_ratio, x_omega, x_min, x_max, a_tail, c_ratio, c_omega },
            n,
            lambda,
        })
    }

    /// Largest admissible radius (unbounded for the closed form).
    pub fn x_max(&self) -> f64 {
        match &self.backend {
            Backend::ExplicitN4 { .. } => f64::INFINITY,
            Backend::Table { x_max, .. } => *x_max,
        }
    }

    pub fn psi(&self, x: f64) -> f64 {
        match &self.backend {
            Backend::ExplicitN4 { a } => a * x.sqrt(),
            Backend::Table { ln_psi, x_min, a_tail, .. } => {
                if x < *x_min {
                    a_tail * x.powf(1.0 / (self.n as f64).sqrt())
                } else {
                    ln_psi.eval(x.ln()).exp()
                }
            }
        }
    }

    /// psi'/psi.
    pub fn ratio(&self, x: f64) -> f64 {
        match &self.backend {
            Backend::ExplicitN4 { .. } => 0.5 / x,
            Backend::Table { x_ratio, x_min, c_ratio, .. } => {
                if x < *x_min {
                    1.0 / ((self.n as f64).sqrt() * x) + c_ratio
                } else {
                    x_ratio.eval(x.ln()) / x
                }
            }
        }
    }

    pub fn omega(&self, x: f64) -> f64 {
        match &self.backend {
            Backend::ExplicitN4 { a } => 1.0 / x - 6.0 / (a * a),
            Backend::Table { x_omega, x_min, c_omega, .. } => {
                if x < *x_min {
                    ((self.n as f64).sqrt() - 1.0) / x + c_omega
                } else {
                    x_omega.eval(x.ln()) / x
                }
            }
        }
    }

    /// psi''/psi through the soliton system (no differencing).
    pub fn psidd_over_psi(&self, x: f64) -> f64 {
        let nf = self.n as f64;
        let psi = self.psi(x);
        let ratio = self.ratio(x);
        self.lambda + (nf - 1.0) * (1.0 - (psi * ratio) * (psi * ratio)) / (psi * psi)
            + ratio * self.omega(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::soliton::integrate::integrate_trajectory;
    use crate::soliton::profile::{explicit_profile_n4, reconstruct_profile};
    use crate::soliton::SolitonParams;
    use approx::assert_relative_eq;

    #[test]
    fn explicit_backend_is_closed_form() {
        let xs: Vec<f64> = (1..50).map(|i| i as f64 * 0.1).collect();
        let profile = explicit_profile_n4(2.0, &xs).unwrap();
        let ev = ProfileEval::new(&profile).unwrap();
        assert_relative_eq!(ev.psi(0.37), 2.0 * 0.37f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(ev.omega(0.37), 1.0 / 0.37 - 1.5, epsilon = 1e-15);
        assert_relative_eq!(ev.psidd_over_psi(0.37), -0.25 / (0.37 * 0.37), epsilon = 1e-12);
    }

    #[test]
    fn table_backend_tracks_numeric_profile_and_tail() {
        let params = SolitonParams::on_explicit_curve(1.0, 1e-4);
        let traj = integrate_trajectory(&params, -2.0, 40.0, 1e-12).unwrap();
        let profile = reconstruct_profile(&traj).unwrap();
        let ev = ProfileEval::new(&profile).unwrap();
        for x in [1e-3, 0.05, 0.5, 3.0] {
            assert_relative_eq!(ev.psi(x), x.sqrt(), max_relative = 2e-3);
            assert_relative_eq!(ev.omega(x), 1.0 / x - 6.0, max_relative = 2e-2);
            assert_relative_eq!(ev.ratio(x), 0.5 / x, max_relative = 2e-3);
        }
        // Below the stored range the analytic asymptote takes over.
        let x = profile.xs[0] * 0.1;
        assert_relative_eq!(ev.omega(x), 1.0 / x - 6.0, max_relative = 1e-2);
    }
}
