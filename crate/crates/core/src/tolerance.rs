use serde::{Deserialize, Serialize};

use crate::ode::Dopri5;

/// Numerical tolerances shared by every operation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative local error tolerance of the null-curve integrator.
    pub ode_rel: f64,
    /// Absolute local error tolerance of the null-curve integrator.
    pub ode_abs: f64,
    /// Width of the final bracket when locating the crossing of t = 0.
    pub event: f64,
    /// Half-width of the band around the null cone inside which causal
    /// verdicts carry `boundary_flag`.
    pub causal: f64,
    /// Largest relative deviation from a pure conformal rescaling.
    pub conf: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            ode_rel: 1e-10,
            ode_abs: 1e-12,
            event: 1e-12,
            causal: 1e-7,
            conf: 1e-4,
            max_steps: 100_000,
        }
    }
}

impl Tolerances {
    pub fn integrator(&self) -> Dopri5 {
        Dopri5 {
            rtol: self.ode_rel,
            atol: self.ode_abs,
            max_steps: self.max_steps,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let named = [
            ("tol_ode", self.ode_rel),
            ("tol_ode_abs", self.ode_abs),
            ("tol_event", self.event),
            ("tol_causal", self.causal),
            ("tol_conf", self.conf),
        ];
        for (name, v) in named {
            if !(v.is_finite() && v > 0.0) {
                return Err(format!("{name} must be a positive number, got {v}"));
            }
        }
        if self.max_steps == 0 {
            return Err("max_steps must be positive".into());
        }
        Ok(())
    }
}
