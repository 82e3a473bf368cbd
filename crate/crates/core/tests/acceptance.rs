//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::f64::consts::{PI, TAU};
use std::time::Instant;

use causal_atlas::embed::{compactify, conformal_factor, embed_cylinder, embed_minkowski};
use causal_atlas::metric::{MetricSpec, TopologyName};
use causal_atlas::verify::{
    build_grid_oracle, check_equivariance, check_null_preservation, check_order_preservation,
    classify_conformal_map, cylinder_order, minkowski_order, MapVerdict, Node, VerifyConfig,
};
use causal_atlas::{
    compute_shadow, shadow::relation_from_shadows, Error, Event, Metric2D, MinkowskiEvent,
    SurfaceMap, Tolerances,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const IDENTITY_TOL: f64 = 1e-8;
const IDENTITY_BUDGET_S: f64 = 10.0;
const DE_SITTER_TOL: f64 = 1e-7;
const DE_SITTER_BUDGET_S: f64 = 30.0;
const CONFORMAL_IDENTITY_TOL: f64 = 1e-7;
const FACTOR_REL_TOL: f64 = 1e-6;
const CONFORMAL_RESIDUAL_TOL: f64 = 1e-4;
const ORDER_PAIRS: usize = 1000;
const BAND_LIMIT: f64 = 0.03;
const ORACLE_GRID: usize = 128;
const ORACLE_BUDGET_S: f64 = 60.0;
const NULL_TOL: f64 = 1e-5;
const NULL_EVENTS: usize = 500;
const EQUIVARIANCE_TOL: f64 = 1e-8;
const EQUIVARIANCE_EVENTS: usize = 300;
const COMPACTIFY_PAIRS: usize = 1000;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn tol() -> Tolerances {
    Tolerances::default()
}

fn tilted() -> Metric2D {
    MetricSpec::expressions("-1", "0.3*sin(x)", "1", TopologyName::Circle)
        .with_field("name", "tilted")
        .with_t_range(-3.0, 3.0)
        .build()
        .unwrap()
}

fn conformal_flat(omega2: &str) -> Metric2D {
    MetricSpec::builtin("conformal_flat")
        .with_field("omega2", omega2)
        .with_field("name", &format!("conformal_flat[{omega2}]"))
        .build()
        .unwrap()
}

fn seconds(start: Instant) -> f64 {
    start.elapsed().as_secs_f64()
}

/// `∫_0^t sech s ds` by composite five-point Gauss-Legendre quadrature.
fn sech_integral(t: f64) -> f64 {
    const NODES: [f64; 5] = [
        0.0,
        -0.538_469_310_105_683_1,
        0.538_469_310_105_683_1,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    const WEIGHTS: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let panels = 200;
    let h = t / panels as f64;
    (0..panels)
        .map(|k| {
            let mid = (k as f64 + 0.5) * h;
            NODES
                .iter()
                .zip(WEIGHTS)
                .map(|(&s, w)| w / (mid + 0.5 * h * s).cosh())
                .sum::<f64>()
                * 0.5
                * h
        })
        .sum()
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

fn identity_on_flat() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mk = Metric2D::minkowski();
    let ein = Metric2D::einstein();
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let p = Event::new(rng.gen_range(-4.0..=4.0), rng.gen_range(-4.0..=4.0));
        let a = embed_minkowski(&mk, &SurfaceMap::Identity, p, &tol()).unwrap();
        worst = worst.max((a.tau - p.t).abs()).max((a.x - p.x).abs());
    }
    for _ in 0..1000 {
        let p = Event::new(rng.gen_range(-4.0..=4.0), rng.gen_range(-3.0 * PI..=3.0 * PI));
        let c = embed_cylinder(&ein, p, &tol()).unwrap();
        worst = worst
            .max((c.tau - p.t).abs())
            .max((c.cover_theta - p.x).abs())
            .max(angle_gap(c.theta, p.x));
    }
    let secs = seconds(start);
    outcome(
        worst <= IDENTITY_TOL && secs < IDENTITY_BUDGET_S,
        format!("max deviation {worst:.2e} (limit {IDENTITY_TOL:e}), {secs:.2} s"),
    )
}

fn de_sitter_closed_form() -> Outcome {
    let start = Instant::now();
    let m = Metric2D::de_sitter();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let events: Vec<Event> = (0..1000)
        .map(|_| Event::new(rng.gen_range(-4.0..=4.0), rng.gen_range(-TAU..2.0 * TAU)))
        .collect();
    let worst = events
        .par_iter()
        .map(|&p| {
            let c = embed_cylinder(&m, p, &tol()).unwrap();
            (c.tau - sech_integral(p.t))
                .abs()
                .max((c.cover_theta - p.x).abs())
        })
        .reduce(|| 0.0, f64::max);
    let secs = seconds(start);
    outcome(
        worst <= DE_SITTER_TOL && secs < DE_SITTER_BUDGET_S,
        format!("max deviation from quadrature {worst:.2e} (limit {DE_SITTER_TOL:e}), {secs:.2} s"),
    )
}

fn conformally_flat_identity() -> Outcome {
    type Closed = fn(f64, f64) -> f64;
    let cases: [(&str, Closed); 2] = [
        ("exp(t)", |t, _| (-t).exp()),
        ("1/(1+t^2+x^2)", |t, x| 1.0 + t * t + x * x),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut id_err, mut factor_err, mut residual) = (0.0f64, 0.0f64, 0.0f64);
    for (omega2, closed) in cases {
        let m = conformal_flat(omega2);
        for _ in 0..200 {
            let p = Event::new(rng.gen_range(-3.9..=3.9), rng.gen_range(-3.9..=3.9));
            let a = embed_minkowski(&m, &SurfaceMap::Identity, p, &tol()).unwrap();
            id_err = id_err.max((a.tau - p.t).abs()).max((a.x - p.x).abs());
            let cf = conformal_factor(&m, &SurfaceMap::Identity, p, 1e-5, &tol()).unwrap();
            let exact = closed(p.t, p.x);
            factor_err = factor_err.max((cf.omega2 - exact).abs() / exact);
            residual = residual.max(cf.residual);
        }
    }
    outcome(
        id_err <= CONFORMAL_IDENTITY_TOL
            && factor_err <= FACTOR_REL_TOL
            && residual <= CONFORMAL_RESIDUAL_TOL,
        format!(
            "identity error {id_err:.2e}, factor relative error {factor_err:.2e}, residual {residual:.2e}"
        ),
    )
}

fn order_isomorphism() -> Outcome {
    let metrics = [Metric2D::de_sitter(), conformal_flat("exp(t)"), tilted()];
    let mut passed = true;
    let mut parts = Vec::new();
    for m in &metrics {
        let cfg = VerifyConfig {
            samples: ORDER_PAIRS,
            seed: 4,
            grid: None,
            ..VerifyConfig::default()
        };
        let f = SurfaceMap::default_for(m.topology());
        let r = check_order_preservation(m, &f, &cfg).unwrap();
        let band = r.boundary_exclusions as f64 / r.samples as f64;
        let ok = r.samples >= 500
            && r.disagreements.is_empty()
            && r.agreements + r.boundary_exclusions == r.samples
            && band < BAND_LIMIT;
        passed &= ok;
        parts.push(format!(
            "{}: {}/{} agree, band {:.2}%",
            m.label(),
            r.agreements,
            r.samples,
            100.0 * band
        ));
    }
    outcome(passed, parts.join("; "))
}

/// Every pair of lattice nodes on distinct layers: the narrowed oracle must
/// imply the shadow order and the shadow order must imply the widened one.
fn oracle_bracket_exhaustive(m: &Metric2D) -> (bool, String) {
    let start = Instant::now();
    let n = ORACLE_GRID;
    let exact = build_grid_oracle(m, n, n, 0.0).unwrap();
    let margin = exact.cell_slope();
    let under = build_grid_oracle(m, n, n, -margin).unwrap();
    let over = build_grid_oracle(m, n, n, margin).unwrap();
    let nodes: Vec<Node> = (0..n)
        .flat_map(|i| (0..n).map(move |j| Node { i, j }))
        .collect();
    let shadows: Vec<_> = nodes
        .par_iter()
        .map(|&a| compute_shadow(m, exact.node_event(a), &tol()).unwrap())
        .collect();
    let topology = m.topology();
    let (violations, pairs) = (0..nodes.len())
        .into_par_iter()
        .map(|ka| {
            let a = nodes[ka];
            let mut bad = 0usize;
            let mut count = 0usize;
            for kb in (a.i + 1) * n..nodes.len() {
                let b = nodes[kb];
                let shadow = relation_from_shadows(&shadows[ka], &shadows[kb], topology, &tol())
                    .is_causal_before();
                if (under.related(a, b) && !shadow) || (shadow && !over.related(a, b)) {
                    bad += 1;
                }
                count += 1;
            }
            (bad, count)
        })
        .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1));
    let secs = seconds(start);
    (
        violations == 0 && secs < ORACLE_BUDGET_S,
        format!(
            "{}: {pairs} pairs, margin ±{margin:.3}, {violations} bracket violations, {secs:.1} s",
            m.label()
        ),
    )
}

fn oracle_cross_check() -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for m in [Metric2D::de_sitter(), tilted()] {
        let (ok, detail) = oracle_bracket_exhaustive(&m);
        passed &= ok;
        parts.push(detail);
    }
    outcome(passed, parts.join("; "))
}

fn null_preservation() -> Outcome {
    let metrics = [
        Metric2D::minkowski(),
        Metric2D::einstein(),
        Metric2D::de_sitter(),
        conformal_flat("exp(t)"),
        conformal_flat("1/(1+t^2+x^2)"),
        tilted(),
    ];
    let cfg = VerifyConfig {
        seed: 6,
        ..VerifyConfig::default()
    };
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for m in &metrics {
        let f = SurfaceMap::default_for(m.topology());
        let r = check_null_preservation(m, &f, NULL_EVENTS, &cfg).unwrap();
        worst = worst.max(r);
        parts.push(format!("{} {r:.1e}", m.label()));
    }
    outcome(
        worst <= NULL_TOL,
        format!("max residual {worst:.2e} (limit {NULL_TOL:e}): {}", parts.join(", ")),
    )
}

fn deck_equivariance() -> Outcome {
    let cfg = VerifyConfig {
        seed: 7,
        ..VerifyConfig::default()
    };
    let mut passed = true;
    let mut parts = Vec::new();
    for m in [Metric2D::einstein(), Metric2D::de_sitter(), tilted()] {
        let s = check_equivariance(&m, EQUIVARIANCE_EVENTS, &cfg).unwrap();
        passed &= s.max_shift_error <= EQUIVARIANCE_TOL
            && s.max_tau_error <= EQUIVARIANCE_TOL
            && s.reduced_mismatches == 0;
        parts.push(format!(
            "{}: shift error {:.1e}, {} reduced mismatches",
            m.label(),
            s.max_shift_error,
            s.reduced_mismatches
        ));
    }
    outcome(passed, parts.join("; "))
}

fn compactification() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut point = || MinkowskiEvent::new(rng.gen_range(-50.0..=50.0), rng.gen_range(-50.0..=50.0));
    let (mut agree, mut disagree, mut band) = (0, 0, 0);
    for _ in 0..COMPACTIFY_PAIRS {
        let (a, b) = (point(), point());
        let flat = minkowski_order(a, b, &tol());
        let cyl = cylinder_order(compactify(a), compactify(b), &tol());
        if flat.boundary_flag || cyl.boundary_flag {
            band += 1;
        } else if flat.tag == cyl.tag {
            agree += 1;
        } else {
            disagree += 1;
        }
    }
    let mut axis_rng = ChaCha8Rng::seed_from_u64(9);
    let inside = (0..1000).all(|_| {
        let x = axis_rng.gen_range(-1000.0..=1000.0);
        let th = compactify(MinkowskiEvent::new(0.0, x)).signed_theta();
        th > -PI && th < PI
    });
    let sup: Vec<f64> = [10.0, 100.0, 1000.0]
        .iter()
        .map(|&x| compactify(MinkowskiEvent::new(0.0, x)).signed_theta().abs())
        .collect();
    let monotone = sup.windows(2).all(|w| w[1] > w[0]) && sup[2] < PI;
    outcome(
        disagree == 0 && inside && monotone,
        format!(
            "{agree} agree, {disagree} disagree, {band} in band; axis strictly inside: {inside}; \
             |theta'| at X = 10, 100, 1000: {:.6}, {:.6}, {:.6}",
            sup[0], sup[1], sup[2]
        ),
    )
}

fn classification() -> Outcome {
    let m = Metric2D::minkowski();
    let probe = Event::new(0.3, 0.1);
    let run = |map: &dyn Fn(Event) -> Event| {
        classify_conformal_map(|p| Ok(map(p)), &m, &m, probe, 10, &tol())
    };
    let (g, v) = (1.0 / (1.0f64 - 0.36).sqrt(), 0.6);
    let identity = run(&|p| p);
    let dilation = run(&|p| Event::new(2.0 * p.t, 2.0 * p.x));
    let boost = run(&move |p| Event::new(g * (p.t + v * p.x), g * (p.x + v * p.t)));
    let reversal = run(&|p| Event::new(-p.t, p.x));
    let stretch = run(&|p| Event::new(p.t, 2.0 * p.x));
    let passed = matches!(identity, Ok(MapVerdict::Causal))
        && matches!(dilation, Ok(MapVerdict::Causal))
        && matches!(boost, Ok(MapVerdict::Causal))
        && matches!(reversal, Ok(MapVerdict::AntiCausal))
        && matches!(stretch, Err(Error::NonConformal { .. }));
    let show = |r: &causal_atlas::Result<MapVerdict>| match r {
        Ok(v) => format!("{v:?}"),
        Err(Error::NonConformal { .. }) => "rejected as non-conformal".to_string(),
        Err(e) => format!("error: {e}"),
    };
    outcome(
        passed,
        format!(
            "identity {}, dilation {}, boost {}, time reversal {}, (t, 2x) {}",
            show(&identity),
            show(&dilation),
            show(&boost),
            show(&reversal),
            show(&stretch)
        ),
    )
}

fn main() {
    type Criterion = fn() -> Outcome;
    let criteria: [(&str, Criterion); 9] = [
        ("identity on flat inputs", identity_on_flat),
        ("de Sitter closed form", de_sitter_closed_form),
        ("conformally flat identity and factor", conformally_flat_identity),
        ("order isomorphism", order_isomorphism),
        ("oracle bracket", oracle_cross_check),
        ("null preservation", null_preservation),
        ("deck equivariance", deck_equivariance),
        ("compactification order", compactification),
        ("causal/anti-causal classification", classification),
    ];
    let mut failures = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        let mark = if o.passed { "PASS" } else { "FAIL" };
        println!("[{mark}] criterion {}: {name}: {}", k + 1, o.detail);
        if !o.passed {
            failures += 1;
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
