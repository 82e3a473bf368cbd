//! Causal / anti-causal classification of conformal maps.
//!
//! A conformal diffeomorphism pushes the future time direction either to the
//! future everywhere or to the past everywhere. The check pushes `∂_t`
//! through a finite-difference Jacobian and reads off the time orientation
//! of the image in the target metric.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::embed::{compare_conformal, finite_difference_jacobian, pullback, DEFAULT_FD_STEP};
use crate::error::{Error, Result};
use crate::metric::Metric2D;
use crate::nullflow::Event;
use crate::tolerance::Tolerances;

pub const EXTRA_PROBES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MapVerdict {
    Causal,
    AntiCausal,
}

/// Verdict at a single probe.
pub fn classify_at<F>(
    map: &F,
    source: &Metric2D,
    target: &Metric2D,
    probe: Event,
    tol: &Tolerances,
) -> Result<MapVerdict>
where
    F: Fn(Event) -> Result<Event>,
{
    let j = finite_difference_jacobian(
        |q| {
            let r = map(q)?;
            Ok([r.t, r.x])
        },
        probe,
        DEFAULT_FD_STEP,
    )?;
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let size = j.iter().flatten().map(|v| v * v).sum::<f64>();
    if !(det.abs() > 1e-12 * size) {
        return Err(Error::DegenerateJacobian {
            t: probe.t,
            x: probe.x,
        });
    }
    let image = map(probe)?;
    let g_target = target.components(image.t, image.x);
    let g_source = source.components(probe.t, probe.x);
    let cf = compare_conformal(pullback(&j, g_target), g_source);
    if !(cf.omega2 > 0.0) || cf.residual > tol.conf {
        return Err(Error::NonConformal {
            t: probe.t,
            x: probe.x,
            residual: if cf.omega2 > 0.0 { cf.residual } else { f64::INFINITY },
            tol: tol.conf,
        });
    }
    // Image of the future time direction; ∂_t is future-directed in the
    // target's adapted coordinates, so w is future iff g(w, ∂_t) < 0.
    let w = [j[0][0], j[1][0]];
    if g_target.inner(w, [1.0, 0.0]) < 0.0 {
        Ok(MapVerdict::Causal)
    } else {
        Ok(MapVerdict::AntiCausal)
    }
}

/// Classify at `probe`, then re-check at ten seeded random probes inside the
/// source domain box; any disagreement is an error.
pub fn classify_conformal_map<F>(
    map: F,
    source: &Metric2D,
    target: &Metric2D,
    probe: Event,
    seed: u64,
    tol: &Tolerances,
) -> Result<MapVerdict>
where
    F: Fn(Event) -> Result<Event>,
{
    let verdict = classify_at(&map, source, target, probe, tol)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let [t0, t1] = source.t_range();
    let [x0, x1] = source.x_window();
    let pad = 0.05 * (t1 - t0);
    for _ in 0..EXTRA_PROBES {
        let p = Event::new(rng.gen_range(t0 + pad..t1 - pad), rng.gen_range(x0..x1));
        let v = classify_at(&map, source, target, p, tol)?;
        if v != verdict {
            return Err(Error::InconsistentClassification(format!(
                "{verdict:?} at ({}, {}) but {v:?} at ({}, {})",
                probe.t, probe.x, p.t, p.x
            )));
        }
    }
    Ok(verdict)
}
