//! Independent checks of the imbedding: order preservation against the flat
//! target orders, a discrete reachability oracle, null preservation,
//! conformality, deck equivariance and the causal/anti-causal dichotomy.

pub mod classify;
pub mod oracle;
pub mod order;

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::embed::{
    conformal_factor, cover_image, embed_cylinder, image_of_shadow, jacobian, SurfaceMap,
    DEFAULT_FD_STEP,
};
use crate::error::Result;
use crate::metric::{Metric2D, Topology};
use crate::nullflow::{null_slopes, Event, NullBranch};
use crate::shadow::{compute_shadow, cone_margin, relation_from_shadows, CausalRelation, Shadow};
use crate::tolerance::Tolerances;

pub use classify::{classify_at, classify_conformal_map, MapVerdict};
pub use oracle::{build_grid_oracle, GridOracle, Node};
pub use order::{cylinder_order, minkowski_order};

/// Largest fraction of sampled pairs that may fall in the boundary band.
pub const MAX_BOUNDARY_FRACTION: f64 = 0.03;
pub const NULL_RESIDUAL_LIMIT: f64 = 1e-5;
pub const EQUIVARIANCE_LIMIT: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub samples: usize,
    pub seed: u64,
    /// Oracle lattice `(n_t, n_x)`; `None` skips the oracle comparison.
    pub grid: Option<(usize, usize)>,
    /// Oracle slope margin; `None` means one lattice cell.
    pub margin: Option<f64>,
    pub fd_step: f64,
    pub tol: Tolerances,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            samples: 500,
            seed: 0,
            grid: Some((128, 128)),
            margin: None,
            fd_step: DEFAULT_FD_STEP,
            tol: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Disagreement {
    pub check: String,
    pub p: Event,
    pub q: Event,
    pub shadow_verdict: CausalRelation,
    pub other_verdict: String,
    /// Signed distance of the pair from the null cone in slice units.
    pub boundary_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSummary {
    pub n_t: usize,
    pub n_x: usize,
    pub margin: f64,
    pub pairs: usize,
    /// Related under the narrowed cone but not by shadows.
    pub under_violations: usize,
    /// Related by shadows but not under the widened cone.
    pub over_violations: usize,
    /// Pairs where the unwidened oracle and the shadows disagree.
    pub zero_margin_disagreements: usize,
    /// `n_x` times the largest cone distance of a zero-margin disagreement.
    pub convergence_constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub metric: String,
    pub samples: usize,
    pub agreements: usize,
    pub disagreements: Vec<Disagreement>,
    pub boundary_exclusions: usize,
    pub max_null_residual: Option<f64>,
    pub max_conformality_residual: Option<f64>,
    pub oracle: Option<OracleSummary>,
    pub properties: Vec<PropertyOutcome>,
}

impl VerificationReport {
    fn new(m: &Metric2D) -> Self {
        Self {
            metric: m.label().to_string(),
            samples: 0,
            agreements: 0,
            disagreements: Vec::new(),
            boundary_exclusions: 0,
            max_null_residual: None,
            max_conformality_residual: None,
            oracle: None,
            properties: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.properties.iter().all(|p| p.passed)
    }

    pub fn failed_properties(&self) -> Vec<&str> {
        self.properties
            .iter()
            .filter(|p| !p.passed)
            .map(|p| p.name.as_str())
            .collect()
    }

    fn record(&mut self, name: &str, passed: bool, detail: String) {
        self.properties.push(PropertyOutcome {
            name: name.to_string(),
            passed,
            detail,
        });
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Human-readable summary table.
    pub fn table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("metric: {}\n", self.metric));
        out.push_str(&format!(
            "pairs: {} sampled, {} agree, {} disagree, {} in boundary band\n",
            self.samples,
            self.agreements,
            self.disagreements.len(),
            self.boundary_exclusions
        ));
        if let Some(r) = self.max_null_residual {
            out.push_str(&format!("max null residual: {r:.3e}\n"));
        }
        if let Some(r) = self.max_conformality_residual {
            out.push_str(&format!("max conformality residual: {r:.3e}\n"));
        }
        let width = self
            .properties
            .iter()
            .map(|p| p.name.len())
            .max()
            .unwrap_or(8);
        out.push_str(&format!("{:<width$}  result  detail\n", "property"));
        for p in &self.properties {
            let mark = if p.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!("{:<width$}  {mark:<6}  {}\n", p.name, p.detail));
        }
        out
    }
}

fn sample_event(rng: &mut ChaCha8Rng, t: [f64; 2], x: [f64; 2]) -> Event {
    Event::new(rng.gen_range(t[0]..=t[1]), rng.gen_range(x[0]..=x[1]))
}

/// Order of two embedded images in the flat target.
fn image_relation(
    m: &Metric2D,
    f: &SurfaceMap,
    sp: &Shadow,
    sq: &Shadow,
    tol: &Tolerances,
) -> Result<CausalRelation> {
    match m.topology() {
        Topology::Line => {
            let a = image_of_shadow(sp, f)?;
            let b = image_of_shadow(sq, f)?;
            Ok(minkowski_order(a, b, tol))
        }
        Topology::Circle { .. } => {
            let a = embed_cylinder(m, sp.source, tol)?;
            let b = embed_cylinder(m, sq.source, tol)?;
            Ok(cylinder_order(a, b, tol))
        }
    }
}

/// Compare the shadow order with the order of the embedded images on
/// `n_samples` seeded random pairs, and (when configured) bracket the shadow
/// order between the narrowed and widened lattice oracles.
pub fn check_order_preservation(
    m: &Metric2D,
    f: &SurfaceMap,
    cfg: &VerifyConfig,
) -> Result<VerificationReport> {
    let mut report = VerificationReport::new(m);
    order_preservation_into(m, f, cfg, &mut report)?;
    if let Some((n_t, n_x)) = cfg.grid {
        oracle_bracket_into(m, n_t, n_x, cfg, &mut report)?;
    }
    Ok(report)
}

fn order_preservation_into(
    m: &Metric2D,
    f: &SurfaceMap,
    cfg: &VerifyConfig,
    report: &mut VerificationReport,
) -> Result<()> {
    let tol = &cfg.tol;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (tr, xr) = (m.t_range(), m.x_window());
    let pairs: Vec<(Event, Event)> = (0..cfg.samples)
        .map(|_| (sample_event(&mut rng, tr, xr), sample_event(&mut rng, tr, xr)))
        .collect();

    let verdicts: Vec<(CausalRelation, CausalRelation, f64)> = pairs
        .par_iter()
        .map(|&(p, q)| -> Result<_> {
            let sp = compute_shadow(m, p, tol)?;
            let sq = compute_shadow(m, q, tol)?;
            let shadow = relation_from_shadows(&sp, &sq, m.topology(), tol);
            let image = image_relation(m, f, &sp, &sq, tol)?;
            Ok((shadow, image, cone_margin(&sp, &sq, m.topology())))
        })
        .collect::<Result<_>>()?;

    report.samples += pairs.len();
    for (&(p, q), &(shadow, image, margin)) in pairs.iter().zip(&verdicts) {
        if shadow.boundary_flag || image.boundary_flag {
            report.boundary_exclusions += 1;
        } else if shadow.tag == image.tag {
            report.agreements += 1;
        } else {
            report.disagreements.push(Disagreement {
                check: "image_order".into(),
                p,
                q,
                shadow_verdict: shadow,
                other_verdict: image.to_string(),
                boundary_distance: margin,
            });
        }
    }
    let fraction = report.boundary_exclusions as f64 / report.samples.max(1) as f64;
    let disagreements = report.disagreements.len();
    report.record(
        "order_preservation",
        disagreements == 0 && fraction < MAX_BOUNDARY_FRACTION,
        format!(
            "{disagreements} disagreements in {} pairs, boundary band {:.2}%",
            report.samples,
            100.0 * fraction
        ),
    );
    Ok(())
}

/// Bracket the shadow order between oracles with margins `-m` and `+m` on
/// seeded random lattice pairs.
pub fn check_oracle_bracket(
    m: &Metric2D,
    n_t: usize,
    n_x: usize,
    cfg: &VerifyConfig,
) -> Result<VerificationReport> {
    let mut report = VerificationReport::new(m);
    oracle_bracket_into(m, n_t, n_x, cfg, &mut report)?;
    Ok(report)
}

fn oracle_bracket_into(
    m: &Metric2D,
    n_t: usize,
    n_x: usize,
    cfg: &VerifyConfig,
    report: &mut VerificationReport,
) -> Result<()> {
    let tol = &cfg.tol;
    let exact = build_grid_oracle(m, n_t, n_x, 0.0)?;
    let margin = cfg.margin.unwrap_or_else(|| exact.cell_slope()).abs();
    let under = build_grid_oracle(m, n_t, n_x, -margin)?;
    let over = build_grid_oracle(m, n_t, n_x, margin)?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9_7f4a_7c15);
    let pairs: Vec<(Node, Node)> = (0..cfg.samples)
        .map(|_| loop {
            let a = Node {
                i: rng.gen_range(0..n_t),
                j: rng.gen_range(0..n_x),
            };
            let b = Node {
                i: rng.gen_range(0..n_t),
                j: rng.gen_range(0..n_x),
            };
            if a.i != b.i {
                break if a.i < b.i { (a, b) } else { (b, a) };
            }
        })
        .collect();

    let results: Vec<(CausalRelation, f64)> = pairs
        .par_iter()
        .map(|&(a, b)| -> Result<_> {
            let sa = compute_shadow(m, exact.node_event(a), tol)?;
            let sb = compute_shadow(m, exact.node_event(b), tol)?;
            Ok((
                relation_from_shadows(&sa, &sb, m.topology(), tol),
                cone_margin(&sa, &sb, m.topology()),
            ))
        })
        .collect::<Result<_>>()?;

    let mut summary = OracleSummary {
        n_t,
        n_x,
        margin,
        pairs: pairs.len(),
        under_violations: 0,
        over_violations: 0,
        zero_margin_disagreements: 0,
        convergence_constant: 0.0,
    };
    let mut worst = 0.0f64;
    for (&(a, b), &(rel, cone)) in pairs.iter().zip(&results) {
        let shadow_related = rel.is_causal_before();
        let (pa, pb) = (exact.node_event(a), exact.node_event(b));
        let mut flag = |kind: &str, oracle_says: bool| {
            report.disagreements.push(Disagreement {
                check: kind.to_string(),
                p: pa,
                q: pb,
                shadow_verdict: rel,
                other_verdict: if oracle_says { "related" } else { "unrelated" }.to_string(),
                boundary_distance: cone,
            });
        };
        if under.related(a, b) && !shadow_related {
            summary.under_violations += 1;
            flag("oracle_under", true);
        }
        if shadow_related && !over.related(a, b) {
            summary.over_violations += 1;
            flag("oracle_over", false);
        }
        if exact.related(a, b) != shadow_related {
            summary.zero_margin_disagreements += 1;
            worst = worst.max(cone.abs());
        }
    }
    summary.convergence_constant = worst * n_x as f64;
    report.record(
        "oracle_bracket",
        summary.under_violations == 0 && summary.over_violations == 0,
        format!(
            "{}x{} lattice, margin ±{:.4}: {} pairs, {} under / {} over violations; \
             {} zero-margin disagreements (C = {:.3})",
            n_t,
            n_x,
            margin,
            summary.pairs,
            summary.under_violations,
            summary.over_violations,
            summary.zero_margin_disagreements,
            summary.convergence_constant
        ),
    );
    report.oracle = Some(summary);
    Ok(())
}

/// Events sampled away from the time edges of the box, so finite-difference
/// stencils stay inside it.
fn interior_events(m: &Metric2D, n: usize, seed: u64, pad: f64) -> Vec<Event> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let [t0, t1] = m.t_range();
    let t = [t0 + pad * (t1 - t0), t1 - pad * (t1 - t0)];
    (0..n)
        .map(|_| sample_event(&mut rng, t, m.x_window()))
        .collect()
}

/// `|η(w, w)| / |w|²` for `w` the pushed-forward null vector `(1, λ)`.
pub fn null_residual(j: &[[f64; 2]; 2], slope: f64) -> f64 {
    let w0 = j[0][0] + j[0][1] * slope;
    let w1 = j[1][0] + j[1][1] * slope;
    (w1 * w1 - w0 * w0).abs() / (w0 * w0 + w1 * w1)
}

/// Largest null residual over `n` events and both null branches.
pub fn check_null_preservation(
    m: &Metric2D,
    f: &SurfaceMap,
    n: usize,
    cfg: &VerifyConfig,
) -> Result<f64> {
    let events = interior_events(m, n, cfg.seed.wrapping_add(1), 0.01);
    let residuals: Vec<f64> = events
        .par_iter()
        .map(|&p| -> Result<f64> {
            let j = jacobian(m, f, p, cfg.fd_step, &cfg.tol)?;
            let slopes = null_slopes(m, p)?;
            Ok(NullBranch::BOTH
                .iter()
                .map(|b| null_residual(&j.matrix, b.pick(slopes)))
                .fold(0.0, f64::max))
        })
        .collect::<Result<_>>()?;
    Ok(residuals.into_iter().fold(0.0, f64::max))
}

/// Largest conformality residual and smallest conformal factor over `n`
/// events.
pub fn check_conformality(
    m: &Metric2D,
    f: &SurfaceMap,
    n: usize,
    cfg: &VerifyConfig,
) -> Result<(f64, f64)> {
    let events = interior_events(m, n, cfg.seed.wrapping_add(2), 0.01);
    let factors: Vec<_> = events
        .par_iter()
        .map(|&p| conformal_factor(m, f, p, cfg.fd_step, &cfg.tol))
        .collect::<Result<_>>()?;
    let worst = factors.iter().map(|c| c.residual).fold(0.0, f64::max);
    let smallest = factors.iter().map(|c| c.omega2).fold(f64::INFINITY, f64::min);
    Ok((worst, smallest))
}

/// `x` values whose deck translate `x + L` is computed without rounding.
fn exactly_translatable(rng: &mut ChaCha8Rng, window: [f64; 2], period: f64) -> f64 {
    loop {
        let x = rng.gen_range(window[0]..window[1]);
        let y = x + period;
        if y - period == x && y - x == period {
            return x;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquivarianceSummary {
    pub max_shift_error: f64,
    pub max_tau_error: f64,
    pub reduced_mismatches: usize,
}

/// `f̄(t, x + L) - f̄(t, x) = (0, 2π)` on the cover, and identical reduced
/// images downstairs.
pub fn check_equivariance(m: &Metric2D, n: usize, cfg: &VerifyConfig) -> Result<EquivarianceSummary> {
    let Topology::Circle { period } = m.topology() else {
        return Err(crate::error::Error::TopologyMismatch(
            "equivariance needs circle topology".into(),
        ));
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(3));
    let [t0, t1] = m.t_range();
    let events: Vec<Event> = (0..n)
        .map(|_| {
            let t = rng.gen_range(t0..=t1);
            Event::new(t, exactly_translatable(&mut rng, [-2.0 * period, 2.0 * period], period))
        })
        .collect();
    let pairs: Vec<_> = events
        .par_iter()
        .map(|&p| -> Result<_> {
            Ok((
                embed_cylinder(m, p, &cfg.tol)?,
                embed_cylinder(m, p.shifted_x(period), &cfg.tol)?,
            ))
        })
        .collect::<Result<_>>()?;
    let mut out = EquivarianceSummary {
        max_shift_error: 0.0,
        max_tau_error: 0.0,
        reduced_mismatches: 0,
    };
    for (a, b) in pairs {
        out.max_shift_error = out
            .max_shift_error
            .max((b.cover_theta - a.cover_theta - TAU).abs());
        out.max_tau_error = out.max_tau_error.max((b.tau - a.tau).abs());
        if a.tau != b.tau || a.theta != b.theta {
            out.reduced_mismatches += 1;
        }
    }
    Ok(out)
}

/// Run every property check on one metric.
pub fn run_verification(m: &Metric2D, f: &SurfaceMap, cfg: &VerifyConfig) -> Result<VerificationReport> {
    let mut report = check_order_preservation(m, f, cfg)?;

    let null = check_null_preservation(m, f, cfg.samples, cfg)?;
    report.max_null_residual = Some(null);
    report.record(
        "null_preservation",
        null <= NULL_RESIDUAL_LIMIT,
        format!("max residual {null:.3e} over {} events x 2 branches (limit {NULL_RESIDUAL_LIMIT:e})", cfg.samples),
    );

    let (conf, omega_min) = check_conformality(m, f, cfg.samples, cfg)?;
    report.max_conformality_residual = Some(conf);
    report.record(
        "conformality",
        conf <= cfg.tol.conf && omega_min > 0.0,
        format!("max residual {conf:.3e} (limit {:e}), min factor {omega_min:.4e}", cfg.tol.conf),
    );

    if m.topology().is_circle() {
        let eq = check_equivariance(m, cfg.samples.min(300), cfg)?;
        report.record(
            "deck_equivariance",
            eq.max_shift_error <= EQUIVARIANCE_LIMIT
                && eq.max_tau_error <= EQUIVARIANCE_LIMIT
                && eq.reduced_mismatches == 0,
            format!(
                "shift error {:.3e}, tau error {:.3e}, {} reduced mismatches",
                eq.max_shift_error, eq.max_tau_error, eq.reduced_mismatches
            ),
        );
    }

    let (ok, detail) = classification_self_check(m, f, cfg);
    report.record("classification", ok, detail);
    Ok(report)
}

/// The imbedding itself must classify as causal; on the flat plane the time
/// reversal must classify as anti-causal.
fn classification_self_check(m: &Metric2D, f: &SurfaceMap, cfg: &VerifyConfig) -> (bool, String) {
    let flat = Metric2D::minkowski();
    let [t0, t1] = m.t_range();
    let [x0, x1] = m.x_window();
    let probe = Event::new(t0 + 0.37 * (t1 - t0), x0 + 0.41 * (x1 - x0));
    let imbedding = |p: Event| cover_image(m, f, p, &cfg.tol).map(|v| Event::new(v[0], v[1]));
    let own = classify_conformal_map(imbedding, m, &flat, probe, cfg.seed, &cfg.tol);
    let reversal = classify_conformal_map(
        |p: Event| Ok(Event::new(-p.t, p.x)),
        &flat,
        &flat,
        Event::new(0.3, 0.2),
        cfg.seed,
        &cfg.tol,
    );
    let ok = matches!(own, Ok(MapVerdict::Causal)) && matches!(reversal, Ok(MapVerdict::AntiCausal));
    let show = |r: &Result<MapVerdict>| match r {
        Ok(v) => format!("{v:?}"),
        Err(e) => format!("error: {e}"),
    };
    (
        ok,
        format!(
            "imbedding: {}, flat time reversal: {}",
            show(&own),
            show(&reversal)
        ),
    )
}
