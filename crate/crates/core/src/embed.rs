//! Imbeddings into 2D Minkowski space and the 2D Einstein cylinder.
//!
//! An event `p` to the future of `Σ` has past shadow `[x_l, x_r]`. With a
//! strictly increasing surface map `f`, the interval `[f(x_l), f(x_r)]` on
//! the Minkowski `X`-axis is the past shadow of exactly one Minkowski event,
//! and that event is the image of `p`. Events to the past of `Σ` use the
//! mirrored construction with future shadows.
//!
//! Circle-topology metrics are handled on the universal cover with the
//! equivariant map `f(x) = 2πx/L`, so deck translations `x -> x + L` become
//! `θ -> θ + 2π` and the image descends to the cylinder.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::metric::{Components, Metric2D, Topology};
use crate::nullflow::Event;
use crate::shadow::{compute_shadow, Shadow, Side};
use crate::tolerance::Tolerances;

pub const DEFAULT_FD_STEP: f64 = 1e-5;

const MONOTONE_SAMPLES: usize = 100;
const EQUIVARIANCE_TOL: f64 = 1e-9;

/// Map from the cover coordinate on `Σ` to the `X`-axis of Minkowski space.
#[derive(Debug, Clone, PartialEq)]
pub enum SurfaceMap {
    Identity,
    /// `x -> scale * x`.
    Linear(f64),
    Expr(Expr),
}

impl SurfaceMap {
    /// The default for a topology: identity on the line, `2πx/L` on the circle.
    pub fn default_for(topology: Topology) -> SurfaceMap {
        match topology {
            Topology::Line => SurfaceMap::Identity,
            Topology::Circle { period } => SurfaceMap::Linear(TAU / period),
        }
    }

    /// Parse an expression in `x`.
    pub fn parse(src: &str) -> Result<SurfaceMap> {
        let e = Expr::parse(src).map_err(|source| Error::Expr {
            field: "surface_map".into(),
            source,
        })?;
        Ok(SurfaceMap::Expr(e))
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            SurfaceMap::Identity => x,
            SurfaceMap::Linear(s) => s * x,
            SurfaceMap::Expr(e) => e.eval(0.0, x),
        }
    }

    /// Check strict monotonicity on `window` and, on the circle,
    /// equivariance `f(x + L) = f(x) + 2π`.
    pub fn validate(&self, window: [f64; 2], topology: Topology) -> Result<()> {
        let [a, b] = window;
        let n = MONOTONE_SAMPLES;
        let xs: Vec<f64> = (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect();
        for w in xs.windows(2) {
            let (fa, fb) = (self.eval(w[0]), self.eval(w[1]));
            if !(fb > fa) {
                return Err(Error::NotMonotone { x: w[0] });
            }
        }
        if let Topology::Circle { period } = topology {
            for &x in &xs {
                let shift = self.eval(x + period) - self.eval(x);
                if (shift - TAU).abs() > EQUIVARIANCE_TOL {
                    return Err(Error::NotEquivariant { x, shift });
                }
            }
        }
        Ok(())
    }
}

/// A point of Minkowski space with metric `-dτ² + dX²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinkowskiEvent {
    pub tau: f64,
    #[serde(rename = "X")]
    pub x: f64,
}

impl MinkowskiEvent {
    pub const fn new(tau: f64, x: f64) -> Self {
        Self { tau, x }
    }
}

/// A point of the Einstein cylinder `R × S¹` with metric `-dτ² + dθ²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylinderEvent {
    pub tau: f64,
    /// Angle reduced to `[0, 2π)`.
    pub theta: f64,
    /// Unreduced angle on the cover.
    pub cover_theta: f64,
}

impl CylinderEvent {
    pub fn from_cover(tau: f64, cover_theta: f64) -> Self {
        Self {
            tau,
            theta: reduce_angle(cover_theta),
            cover_theta,
        }
    }

    /// Angle in `(-π, π]`.
    pub fn signed_theta(&self) -> f64 {
        if self.theta > PI {
            self.theta - TAU
        } else {
            self.theta
        }
    }
}

pub fn reduce_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs.
    if r >= TAU {
        0.0
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Minkowski,
    Einstein,
}

/// The unique Minkowski event whose shadow of the same side is `f(shadow)`.
pub fn image_of_shadow(s: &Shadow, f: &SurfaceMap) -> Result<MinkowskiEvent> {
    let u = f.eval(s.x_left);
    let v = f.eval(s.x_right);
    if u > v {
        return Err(Error::NotMonotone { x: s.x_left });
    }
    let x = 0.5 * (u + v);
    let tau = match s.side {
        Side::PastShadow => 0.5 * (v - u),
        Side::FutureShadow => 0.5 * (u - v),
    };
    Ok(MinkowskiEvent::new(tau, x))
}

pub fn embed_minkowski(
    m: &Metric2D,
    f: &SurfaceMap,
    p: Event,
    tol: &Tolerances,
) -> Result<MinkowskiEvent> {
    if m.topology().is_circle() {
        return Err(Error::TopologyMismatch(
            "Minkowski target needs line topology; embed the cover or use the Einstein target"
                .into(),
        ));
    }
    let s = compute_shadow(m, p, tol)?;
    image_of_shadow(&s, f)
}

/// Compact case: the circle metric is imbedded through its cover.
pub fn embed_cylinder(m: &Metric2D, p: Event, tol: &Tolerances) -> Result<CylinderEvent> {
    let Topology::Circle { period } = m.topology() else {
        return Err(Error::TopologyMismatch(
            "cylinder imbedding needs circle topology".into(),
        ));
    };
    // Work from the fundamental domain; the winding is added back exactly.
    let reduced = p.x.rem_euclid(period);
    let winding = ((p.x - reduced) / period).round();
    let s = compute_shadow(m, Event::new(p.t, reduced), tol)?;
    let img = image_of_shadow(&s, &SurfaceMap::Linear(TAU / period))?;
    Ok(CylinderEvent {
        tau: img.tau,
        theta: reduce_angle(img.x),
        cover_theta: img.x + TAU * winding,
    })
}

/// Minkowski space into the cylinder through null coordinates
/// `u = τ - X`, `v = τ + X` and `P = 2 atan v`, `Q = 2 atan u`.
pub fn compactify(a: MinkowskiEvent) -> CylinderEvent {
    let u = a.tau - a.x;
    let v = a.tau + a.x;
    let p = 2.0 * v.atan();
    let q = 2.0 * u.atan();
    CylinderEvent::from_cover(0.5 * (p + q), 0.5 * (p - q))
}

pub fn embed_noncompact_to_cylinder(
    m: &Metric2D,
    f: &SurfaceMap,
    p: Event,
    tol: &Tolerances,
) -> Result<CylinderEvent> {
    Ok(compactify(embed_minkowski(m, f, p, tol)?))
}

/// Image coordinates on the flat cover of the target: `(τ, X)` for line
/// metrics, `(τ, cover_θ)` for circle metrics.
pub fn cover_image(m: &Metric2D, f: &SurfaceMap, p: Event, tol: &Tolerances) -> Result<[f64; 2]> {
    match m.topology() {
        Topology::Line => {
            let img = embed_minkowski(m, f, p, tol)?;
            Ok([img.tau, img.x])
        }
        Topology::Circle { .. } => {
            let img = embed_cylinder(m, p, tol)?;
            Ok([img.tau, img.cover_theta])
        }
    }
}

/// Row-major 2x2 matrix `[[dτ/dt, dτ/dx], [dX/dt, dX/dx]]`.
pub type Matrix2 = [[f64; 2]; 2];

#[derive(Debug, Clone, PartialEq)]
pub struct Jacobian {
    pub matrix: Matrix2,
    /// Set when the stencil straddles the slice, where the past and future
    /// constructions meet.
    pub warning: Option<String>,
}

/// Central-difference Jacobian of any planar map.
pub fn finite_difference_jacobian<F>(map: F, p: Event, h: f64) -> Result<Matrix2>
where
    F: Fn(Event) -> Result<[f64; 2]>,
{
    let ht = h * p.t.abs().max(1.0);
    let hx = h * p.x.abs().max(1.0);
    let tp = map(Event::new(p.t + ht, p.x))?;
    let tm = map(Event::new(p.t - ht, p.x))?;
    let xp = map(Event::new(p.t, p.x + hx))?;
    let xm = map(Event::new(p.t, p.x - hx))?;
    Ok([
        [(tp[0] - tm[0]) / (2.0 * ht), (xp[0] - xm[0]) / (2.0 * hx)],
        [(tp[1] - tm[1]) / (2.0 * ht), (xp[1] - xm[1]) / (2.0 * hx)],
    ])
}

pub fn jacobian(
    m: &Metric2D,
    f: &SurfaceMap,
    p: Event,
    h: f64,
    tol: &Tolerances,
) -> Result<Jacobian> {
    let ht = h * p.t.abs().max(1.0);
    let [t0, t1] = m.t_range();
    if p.t - 2.0 * ht < t0 || p.t + 2.0 * ht > t1 {
        return Err(Error::OutsideDomain {
            t: p.t,
            x: p.x,
            t_min: t0 + 2.0 * ht,
            t_max: t1 - 2.0 * ht,
        });
    }
    let matrix = finite_difference_jacobian(|q| cover_image(m, f, q, tol), p, h)?;
    let warning = (p.t.abs() <= ht).then(|| {
        format!(
            "stencil at t = {} straddles the slice t = 0; shadows are near-degenerate",
            p.t
        )
    });
    Ok(Jacobian { matrix, warning })
}

/// Pull `target` back through `j`: `G = Jᵀ g_target J`.
pub fn pullback(j: &Matrix2, target: Components) -> Components {
    let col = |k: usize| [j[0][k], j[1][k]];
    Components {
        g_tt: target.inner(col(0), col(0)),
        g_tx: target.inner(col(0), col(1)),
        g_xx: target.inner(col(1), col(1)),
    }
}

pub const FLAT: Components = Components {
    g_tt: -1.0,
    g_tx: 0.0,
    g_xx: 1.0,
};

/// Conformal factor with the convention `pulled_back = Ω² · source`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConformalFactor {
    pub omega2: f64,
    pub residual: f64,
}

/// Compare a pulled-back metric against the source metric at one point.
///
/// `Ω²` is the mean of the `tt` and `xx` ratios; the residual is the largest
/// relative deviation of any component ratio from `Ω²`. Where the source
/// has no `tx` term, the pulled-back `tx` term is measured against
/// `Ω² sqrt(|g_tt g_xx|)` instead.
pub fn compare_conformal(pulled: Components, source: Components) -> ConformalFactor {
    let r_tt = pulled.g_tt / source.g_tt;
    let r_xx = pulled.g_xx / source.g_xx;
    let omega2 = 0.5 * (r_tt + r_xx);
    let scale = omega2.abs().max(f64::MIN_POSITIVE);
    let mut residual = ((r_tt - omega2).abs() / scale).max((r_xx - omega2).abs() / scale);
    if source.g_tx.abs() > 1e-12 {
        let r_tx = pulled.g_tx / source.g_tx;
        residual = residual.max((r_tx - omega2).abs() / scale);
    } else {
        let norm = scale * (source.g_tt * source.g_xx).abs().sqrt();
        residual = residual.max(pulled.g_tx.abs() / norm);
    }
    ConformalFactor { omega2, residual }
}

pub fn conformal_factor(
    m: &Metric2D,
    f: &SurfaceMap,
    p: Event,
    h: f64,
    tol: &Tolerances,
) -> Result<ConformalFactor> {
    let jac = jacobian(m, f, p, h, tol)?;
    let g = m.eval(p)?;
    let cf = compare_conformal(pullback(&jac.matrix, FLAT), g);
    if !(cf.omega2 > 0.0) {
        return Err(Error::NonPositiveFactor(cf.omega2));
    }
    Ok(cf)
}

/// Embed `p` into the requested target.
pub fn embed_point(
    m: &Metric2D,
    f: &SurfaceMap,
    p: Event,
    target: Target,
    tol: &Tolerances,
) -> Result<EmbeddedPoint> {
    match (m.topology(), target) {
        (Topology::Line, Target::Minkowski) => {
            Ok(EmbeddedPoint::Minkowski(embed_minkowski(m, f, p, tol)?))
        }
        (Topology::Line, Target::Einstein) => Ok(EmbeddedPoint::Cylinder(
            embed_noncompact_to_cylinder(m, f, p, tol)?,
        )),
        (Topology::Circle { .. }, Target::Einstein) => {
            Ok(EmbeddedPoint::Cylinder(embed_cylinder(m, p, tol)?))
        }
        (Topology::Circle { .. }, Target::Minkowski) => Err(Error::TopologyMismatch(
            "a circle-topology metric cannot be imbedded in Minkowski space; use the einstein target"
                .into(),
        )),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EmbeddedPoint {
    Minkowski(MinkowskiEvent),
    Cylinder(CylinderEvent),
}
