//! Null directions and null curves traced to the slice `t = 0`.
//!
//! In two dimensions every null curve is a reparametrized null geodesic, so
//! the curves are obtained by integrating the null slope field
//! `dx/dt = lambda(t, x)` with `t` as the parameter.

use std::cell::Cell;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{Components, Metric2D};
use crate::ode::OdeFailure;
use crate::tolerance::Tolerances;

/// A spacetime point. On circle topology `x` is a universal-cover value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub x: f64,
}

impl Event {
    pub const fn new(t: f64, x: f64) -> Self {
        Self { t, x }
    }

    pub fn shifted_x(self, dx: f64) -> Self {
        Self::new(self.t, self.x + dx)
    }
}

/// Which root of `g_xx l^2 + 2 g_tx l + g_tt = 0`: `Plus` is the positive one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NullBranch {
    Plus,
    Minus,
}

impl NullBranch {
    pub const BOTH: [NullBranch; 2] = [NullBranch::Minus, NullBranch::Plus];

    pub fn pick(self, slopes: (f64, f64)) -> f64 {
        match self {
            NullBranch::Minus => slopes.0,
            NullBranch::Plus => slopes.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    TowardPast,
    TowardFuture,
}

impl Direction {
    /// The direction that reaches `t = 0` from time `t`.
    pub fn toward_slice(t: f64) -> Direction {
        if t >= 0.0 {
            Direction::TowardPast
        } else {
            Direction::TowardFuture
        }
    }

    fn name(self) -> &'static str {
        match self {
            Direction::TowardPast => "toward the past",
            Direction::TowardFuture => "toward the future",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NullPath {
    pub events: Vec<Event>,
    pub branch: NullBranch,
    pub direction: Direction,
}

impl NullPath {
    pub fn start(&self) -> Event {
        self.events[0]
    }

    /// Last recorded event, within `tol_event` of the slice.
    pub fn terminal(&self) -> Event {
        *self.events.last().expect("null path is never empty")
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "x"])?;
        for e in &self.events {
            w.write_record([crate::csvio::fmt_f64(e.t), crate::csvio::fmt_f64(e.x)])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Roots `(lambda_minus, lambda_plus)` of the null quadratic for the given
/// components, via the cancellation-free form of the quadratic formula.
pub fn slopes_from_components(c: Components) -> std::result::Result<(f64, f64), String> {
    let disc = c.null_discriminant();
    if !(disc > 0.0) || !c.g_xx.is_finite() || c.g_xx == 0.0 {
        return Err(format!(
            "null quadratic has no two real roots (g_tx^2 - g_tt*g_xx = {disc})"
        ));
    }
    let root = disc.sqrt();
    // q = -(g_tx + sign(g_tx) sqrt(disc)); roots are q / g_xx and g_tt / q.
    let q = -(c.g_tx + c.g_tx.signum() * root);
    let q = if q == 0.0 { -root } else { q };
    let r1 = q / c.g_xx;
    let r2 = c.g_tt / q;
    let (lo, hi) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
    if !(lo < 0.0 && hi > 0.0) {
        return Err(format!(
            "null slopes {lo} and {hi} do not have opposite signs"
        ));
    }
    Ok((lo, hi))
}

pub fn null_slopes(m: &Metric2D, p: Event) -> Result<(f64, f64)> {
    let c = m.eval(p)?;
    slopes_from_components(c).map_err(|reason| Error::InvalidMetricAt {
        t: p.t,
        x: p.x,
        reason,
    })
}

/// Trace the null curve of `branch` from `start` toward `t = 0`.
pub fn integrate_null(
    m: &Metric2D,
    start: Event,
    branch: NullBranch,
    direction: Direction,
    tol: &Tolerances,
) -> Result<NullPath> {
    m.eval(start)?;
    let wrong_way = match direction {
        Direction::TowardPast => start.t < 0.0,
        Direction::TowardFuture => start.t > 0.0,
    };
    if wrong_way {
        return Err(Error::WrongDirection {
            t: start.t,
            direction: direction.name(),
        });
    }
    if start.t == 0.0 {
        return Ok(NullPath {
            events: vec![start],
            branch,
            direction,
        });
    }

    let bad_point: Cell<Option<(f64, f64, String)>> = Cell::new(None);
    let rhs = |t: f64, x: f64| match slopes_from_components(m.components(t, x)) {
        Ok(s) => branch.pick(s),
        Err(reason) => {
            let seen = bad_point.take();
            bad_point.set(seen.or(Some((t, x, reason))));
            f64::NAN
        }
    };
    let dir = match direction {
        Direction::TowardPast => -1.0,
        Direction::TowardFuture => 1.0,
    };
    let traj = tol
        .integrator()
        .integrate_until(rhs, start.t, start.x, dir, start.t.abs(), |t, _| t, tol.event)
        .map_err(|failure| {
            if let Some((t, x, reason)) = bad_point.take() {
                return Error::InvalidMetricAt { t, x, reason };
            }
            match failure {
                OdeFailure::MaxSteps { t, .. } => Error::MaxSteps {
                    t0: start.t,
                    x0: start.x,
                    t,
                    steps: tol.max_steps,
                },
                OdeFailure::NonFinite { t, y } | OdeFailure::StepUnderflow { t, y } => {
                    Error::LeftDomain { t, x: y }
                }
            }
        })?;
    if let Some((t, x, reason)) = bad_point.take() {
        return Err(Error::InvalidMetricAt { t, x, reason });
    }

    let events = traj
        .ts
        .iter()
        .zip(&traj.ys)
        .map(|(&t, &x)| Event::new(t, x))
        .collect();
    Ok(NullPath {
        events,
        branch,
        direction,
    })
}

/// Cover coordinate where the `branch` null curve through `p` meets `t = 0`.
pub fn shadow_endpoint(m: &Metric2D, p: Event, branch: NullBranch, tol: &Tolerances) -> Result<f64> {
    if p.t == 0.0 {
        m.eval(p)?;
        return Ok(p.x);
    }
    let path = integrate_null(m, p, branch, Direction::toward_slice(p.t), tol)?;
    let end = path.terminal();
    if end.t == 0.0 {
        return Ok(end.x);
    }
    // The located crossing sits within tol_event of the slice; one Euler
    // step along the slope field puts it on t = 0.
    let slope = slopes_from_components(m.components(end.t, end.x))
        .map(|s| branch.pick(s))
        .unwrap_or(0.0);
    Ok(end.x - end.t * slope)
}
