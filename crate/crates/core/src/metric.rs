//! Two-dimensional Lorentzian metrics in coordinates adapted to the slice
//! `t = 0`.
//!
//! A metric is `g_tt dt^2 + 2 g_tx dt dx + g_xx dx^2` on either the line
//! (`x` in R) or the circle (`x` periodic with period `L`). Circle metrics
//! keep `x` as a universal-cover coordinate; periodicity is a checked
//! contract, not a representation.

use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{BinOp, Expr, Func};
use crate::nullflow::Event;

pub const DEFAULT_T_RANGE: [f64; 2] = [-4.0, 4.0];
pub const DEFAULT_LINE_X_RANGE: [f64; 2] = [-4.0, 4.0];
pub const DEFAULT_GRID: usize = 64;

const PERIODICITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Topology {
    Line,
    Circle { period: f64 },
}

impl Topology {
    pub fn period(&self) -> Option<f64> {
        match self {
            Topology::Line => None,
            Topology::Circle { period } => Some(*period),
        }
    }

    pub fn is_circle(&self) -> bool {
        matches!(self, Topology::Circle { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TopologyName {
    Line,
    Circle,
}

/// The JSON metric document.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_tt: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_tx: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_xx: Option<String>,
    /// Conformal factor for the `conformal_flat` builtin.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega2: Option<String>,
    /// Scale factor for the `flrw` builtin.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topology: Option<TopologyName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_range: Option<[f64; 2]>,
    /// Sampling window in `x` for line-topology metrics.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_range: Option<[f64; 2]>,
}

impl MetricSpec {
    pub fn builtin(name: &str) -> Self {
        MetricSpec {
            builtin: Some(name.to_string()),
            ..Default::default()
        }
    }

    pub fn expressions(g_tt: &str, g_tx: &str, g_xx: &str, topology: TopologyName) -> Self {
        MetricSpec {
            g_tt: Some(g_tt.to_string()),
            g_tx: Some(g_tx.to_string()),
            g_xx: Some(g_xx.to_string()),
            topology: Some(topology),
            t_range: Some(DEFAULT_T_RANGE),
            ..Default::default()
        }
    }

    pub fn with_t_range(mut self, a: f64, b: f64) -> Self {
        self.t_range = Some([a, b]);
        self
    }

    pub fn with_period(mut self, period: f64) -> Self {
        self.period = Some(period);
        self
    }

    pub fn with_x_range(mut self, a: f64, b: f64) -> Self {
        self.x_range = Some([a, b]);
        self
    }

    pub fn with_topology(mut self, topology: TopologyName) -> Self {
        self.topology = Some(topology);
        self
    }

    pub fn with_field(mut self, key: &str, value: &str) -> Self {
        match key {
            "omega2" => self.omega2 = Some(value.to_string()),
            "a" => self.a = Some(value.to_string()),
            "g_tt" => self.g_tt = Some(value.to_string()),
            "g_tx" => self.g_tx = Some(value.to_string()),
            "g_xx" => self.g_xx = Some(value.to_string()),
            "name" => self.name = Some(value.to_string()),
            _ => {}
        }
        self
    }

    pub fn build(&self) -> Result<Metric2D> {
        Metric2D::from_spec(self.clone())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metric spec serializes")
    }
}

/// Pointwise metric components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Components {
    pub g_tt: f64,
    pub g_tx: f64,
    pub g_xx: f64,
}

impl Components {
    pub fn det(&self) -> f64 {
        self.g_tt * self.g_xx - self.g_tx * self.g_tx
    }

    /// `g_tx^2 - g_tt g_xx`, positive for a Lorentzian metric.
    pub fn null_discriminant(&self) -> f64 {
        self.g_tx * self.g_tx - self.g_tt * self.g_xx
    }

    /// `g(v, w)` for coordinate vectors `(v_t, v_x)`.
    pub fn inner(&self, v: [f64; 2], w: [f64; 2]) -> f64 {
        self.g_tt * v[0] * w[0] + self.g_tx * (v[0] * w[1] + v[1] * w[0]) + self.g_xx * v[1] * w[1]
    }
}

#[derive(Debug, Clone)]
pub struct Metric2D {
    label: String,
    topology: Topology,
    t_range: [f64; 2],
    x_window: [f64; 2],
    g_tt: Expr,
    g_tx: Expr,
    g_xx: Expr,
    spec: MetricSpec,
}

fn parse_field(field: &str, src: &str) -> Result<Expr> {
    Expr::parse(src).map_err(|source| Error::Expr {
        field: field.to_string(),
        source,
    })
}

fn required<'a>(value: &'a Option<String>, field: &str) -> Result<&'a str> {
    value
        .as_deref()
        .ok_or_else(|| Error::MissingField(field.to_string()))
}

/// Parse a JSON metric document.
pub fn parse_metric_spec(text: &str) -> Result<Metric2D> {
    let spec: MetricSpec = serde_json::from_str(text).map_err(|e| Error::Json {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    Metric2D::from_spec(spec)
}

impl Metric2D {
    pub fn from_spec(spec: MetricSpec) -> Result<Metric2D> {
        let (default_label, default_topology, g_tt, g_tx, g_xx) = match spec.builtin.as_deref() {
            Some(name) => {
                if spec.g_tt.is_some() || spec.g_tx.is_some() || spec.g_xx.is_some() {
                    return Err(Error::InvalidSpec(
                        "a builtin metric cannot also give component expressions".into(),
                    ));
                }
                builtin_components(name, &spec)?
            }
            None => {
                let g_tt = parse_field("g_tt", required(&spec.g_tt, "g_tt")?)?;
                let g_tx = parse_field("g_tx", required(&spec.g_tx, "g_tx")?)?;
                let g_xx = parse_field("g_xx", required(&spec.g_xx, "g_xx")?)?;
                if spec.topology.is_none() {
                    return Err(Error::MissingField("topology".into()));
                }
                if spec.t_range.is_none() {
                    return Err(Error::MissingField("t_range".into()));
                }
                ("expression".to_string(), TopologyName::Line, g_tt, g_tx, g_xx)
            }
        };

        let topology = match spec.topology.unwrap_or(default_topology) {
            TopologyName::Line => {
                if spec.period.is_some() {
                    return Err(Error::InvalidSpec(
                        "'period' only applies to circle topology".into(),
                    ));
                }
                Topology::Line
            }
            TopologyName::Circle => {
                let period = spec.period.unwrap_or(TAU);
                if !(period.is_finite() && period > 0.0) {
                    return Err(Error::InvalidSpec(format!(
                        "period must be positive, got {period}"
                    )));
                }
                Topology::Circle { period }
            }
        };

        let t_range = spec.t_range.unwrap_or(DEFAULT_T_RANGE);
        if !(t_range[0].is_finite() && t_range[1].is_finite() && t_range[0] < t_range[1]) {
            return Err(Error::InvalidSpec(format!(
                "t_range must be an increasing pair, got {t_range:?}"
            )));
        }
        if !(t_range[0] < 0.0 && 0.0 < t_range[1]) {
            return Err(Error::InvalidSpec(format!(
                "t_range {t_range:?} must contain the slice t = 0 in its interior"
            )));
        }

        let x_window = match topology {
            Topology::Line => {
                let w = spec.x_range.unwrap_or(DEFAULT_LINE_X_RANGE);
                if !(w[0].is_finite() && w[1].is_finite() && w[0] < w[1]) {
                    return Err(Error::InvalidSpec(format!(
                        "x_range must be an increasing pair, got {w:?}"
                    )));
                }
                w
            }
            Topology::Circle { period } => {
                if spec.x_range.is_some() {
                    return Err(Error::InvalidSpec(
                        "'x_range' only applies to line topology".into(),
                    ));
                }
                [0.0, period]
            }
        };

        let label = spec.name.clone().unwrap_or(default_label);
        let metric = Metric2D {
            label,
            topology,
            t_range,
            x_window,
            g_tt,
            g_tx,
            g_xx,
            spec,
        };

        for t in t_range {
            for x in x_window {
                let c = metric.components(t, x);
                if !(c.g_tt.is_finite() && c.g_tx.is_finite() && c.g_xx.is_finite()) {
                    return Err(Error::InvalidSpec(format!(
                        "components do not evaluate to finite values at domain corner ({t}, {x})"
                    )));
                }
            }
        }
        Ok(metric)
    }

    pub fn builtin(name: &str) -> Result<Metric2D> {
        MetricSpec::builtin(name).build()
    }

    pub fn minkowski() -> Metric2D {
        Self::builtin("minkowski").expect("builtin")
    }

    pub fn einstein() -> Metric2D {
        Self::builtin("einstein").expect("builtin")
    }

    pub fn de_sitter() -> Metric2D {
        Self::builtin("de_sitter").expect("builtin")
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn t_range(&self) -> [f64; 2] {
        self.t_range
    }

    /// The x interval used for sampling: the spec's `x_range` on the line,
    /// one fundamental domain `[0, L]` on the circle.
    pub fn x_window(&self) -> [f64; 2] {
        self.x_window
    }

    pub fn spec(&self) -> &MetricSpec {
        &self.spec
    }

    /// Render back to the JSON document form.
    pub fn render(&self) -> String {
        self.spec.to_json()
    }

    /// Same component functions viewed on the universal cover (line topology).
    pub fn cover(&self) -> Metric2D {
        let mut m = self.clone();
        if let Topology::Circle { period } = self.topology {
            m.topology = Topology::Line;
            m.x_window = [0.0, period];
            m.spec.topology = Some(TopologyName::Line);
            m.spec.period = None;
            m.spec.x_range = Some(m.x_window);
        }
        m
    }

    pub fn contains_time(&self, t: f64) -> bool {
        t >= self.t_range[0] && t <= self.t_range[1]
    }

    /// Unchecked component evaluation.
    pub fn components(&self, t: f64, x: f64) -> Components {
        Components {
            g_tt: self.g_tt.eval(t, x),
            g_tx: self.g_tx.eval(t, x),
            g_xx: self.g_xx.eval(t, x),
        }
    }

    /// Component evaluation with a domain-box check.
    pub fn eval(&self, p: Event) -> Result<Components> {
        if !(p.t.is_finite() && p.x.is_finite()) || !self.contains_time(p.t) {
            return Err(Error::OutsideDomain {
                t: p.t,
                x: p.x,
                t_min: self.t_range[0],
                t_max: self.t_range[1],
            });
        }
        Ok(self.components(p.t, p.x))
    }
}

impl fmt::Display for Metric2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let topo = match self.topology {
            Topology::Line => "line".to_string(),
            Topology::Circle { period } => format!("circle L={period}"),
        };
        write!(
            f,
            "{} [{}; t in {:?}] g_tt={} g_tx={} g_xx={}",
            self.label, topo, self.t_range, self.g_tt, self.g_tx, self.g_xx
        )
    }
}

fn builtin_components(
    name: &str,
    spec: &MetricSpec,
) -> Result<(String, TopologyName, Expr, Expr, Expr)> {
    let minus_one = || Expr::Neg(Box::new(Expr::Num(1.0)));
    let zero = || Expr::Num(0.0);
    let one = || Expr::Num(1.0);
    match name {
        "minkowski" => Ok((
            name.into(),
            TopologyName::Line,
            minus_one(),
            zero(),
            one(),
        )),
        "einstein" => Ok((
            name.into(),
            TopologyName::Circle,
            minus_one(),
            zero(),
            one(),
        )),
        "de_sitter" => {
            let cosh_sq = Expr::bin(
                BinOp::Pow,
                Expr::Call(Func::Cosh, Box::new(Expr::T)),
                Expr::Num(2.0),
            );
            Ok((
                name.into(),
                TopologyName::Circle,
                minus_one(),
                zero(),
                cosh_sq,
            ))
        }
        "conformal_flat" => {
            let omega2 = parse_field("omega2", required(&spec.omega2, "omega2")?)?;
            Ok((
                name.into(),
                TopologyName::Line,
                Expr::Neg(Box::new(omega2.clone())),
                zero(),
                omega2,
            ))
        }
        "flrw" => {
            let a = parse_field("a", required(&spec.a, "a")?)?;
            Ok((
                name.into(),
                TopologyName::Line,
                minus_one(),
                zero(),
                Expr::bin(BinOp::Pow, a, Expr::Num(2.0)),
            ))
        }
        other => Err(Error::UnknownBuiltin(other.to_string())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    NonFinite,
    GttNotNegative,
    GxxNotPositive,
    NotLorentzian,
    NotPeriodic,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ViolationKind::NonFinite => "component not finite",
            ViolationKind::GttNotNegative => "g_tt not negative",
            ViolationKind::GxxNotPositive => "g_xx not positive",
            ViolationKind::NotLorentzian => "determinant not negative",
            ViolationKind::NotPeriodic => "component not periodic in x",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub t: f64,
    pub x: f64,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub samples: usize,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Sample the domain box on an `n_t x n_x` grid and list every violation of
/// the adapted-Lorentzian invariants.
pub fn check_lorentzian(m: &Metric2D, n_t: usize, n_x: usize) -> ValidationReport {
    let n_t = n_t.max(2);
    let n_x = n_x.max(2);
    let [t0, t1] = m.t_range();
    let [x0, x1] = m.x_window();
    let mut report = ValidationReport {
        samples: n_t * n_x,
        violations: Vec::new(),
    };
    for i in 0..n_t {
        let t = t0 + (t1 - t0) * i as f64 / (n_t - 1) as f64;
        for j in 0..n_x {
            let x = x0 + (x1 - x0) * j as f64 / (n_x - 1) as f64;
            let c = m.components(t, x);
            let mut flag = |kind| report.violations.push(Violation { t, x, kind });
            if !(c.g_tt.is_finite() && c.g_tx.is_finite() && c.g_xx.is_finite()) {
                flag(ViolationKind::NonFinite);
                continue;
            }
            if c.g_tt >= 0.0 {
                flag(ViolationKind::GttNotNegative);
            }
            if c.g_xx <= 0.0 {
                flag(ViolationKind::GxxNotPositive);
            }
            if c.det() >= 0.0 {
                flag(ViolationKind::NotLorentzian);
            }
            if let Topology::Circle { period } = m.topology() {
                let s = m.components(t, x + period);
                let off = |a: f64, b: f64| (a - b).abs() > PERIODICITY_TOL * a.abs().max(1.0);
                if off(c.g_tt, s.g_tt) || off(c.g_tx, s.g_tx) || off(c.g_xx, s.g_xx) {
                    flag(ViolationKind::NotPeriodic);
                }
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_resolve() {
        let m = Metric2D::minkowski();
        assert_eq!(m.topology(), Topology::Line);
        assert_eq!(
            m.eval(Event::new(0.3, -2.0)).unwrap(),
            Components {
                g_tt: -1.0,
                g_tx: 0.0,
                g_xx: 1.0
            }
        );

        let e = Metric2D::einstein();
        assert_eq!(e.topology(), Topology::Circle { period: TAU });
        assert_eq!(e.components(1.0, 2.0).g_tt, -1.0);

        let ds = Metric2D::de_sitter();
        assert_eq!(ds.eval(Event::new(0.0, 5.0)).unwrap().g_xx, 1.0);
        let c = ds.eval(Event::new(1f64.asinh(), 0.0)).unwrap();
        assert!((c.g_xx - 2.0).abs() < 1e-14);
        assert_eq!(c.g_tt, -1.0);
    }

    #[test]
    fn de_sitter_from_expressions_matches_builtin() {
        let doc = r#"{"g_tt": "-1", "g_tx": "0", "g_xx": "cosh(t)^2",
                      "topology": "circle", "period": 6.283185307179586, "t_range": [-3, 3]}"#;
        let m = parse_metric_spec(doc).unwrap();
        assert!(check_lorentzian(&m, 50, 50).is_valid());
        let b = Metric2D::de_sitter();
        for (t, x) in [(0.5, 1.0), (-2.0, 4.0), (2.9, -7.0)] {
            assert_eq!(m.components(t, x), b.components(t, x));
        }
    }

    #[test]
    fn flipped_signature_flags_every_point() {
        let m = MetricSpec::expressions("1", "0", "1", TopologyName::Line)
            .build()
            .unwrap();
        let report = check_lorentzian(&m, 10, 10);
        let gtt: Vec<_> = report
            .violations
            .iter()
            .filter(|v| v.kind == ViolationKind::GttNotNegative)
            .collect();
        assert_eq!(gtt.len(), 100);
        assert_eq!(ViolationKind::GttNotNegative.to_string(), "g_tt not negative");
    }

    #[test]
    fn minkowski_grid_is_clean() {
        assert!(check_lorentzian(&Metric2D::minkowski(), 10, 10).is_valid());
    }

    #[test]
    fn non_periodic_circle_metric_is_flagged() {
        let m = MetricSpec::expressions("-1", "0", "1 + 0.1*x^2", TopologyName::Circle)
            .build()
            .unwrap();
        let report = check_lorentzian(&m, 8, 8);
        assert!(report
            .violations
            .iter()
            .any(|v| v.kind == ViolationKind::NotPeriodic));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_metric_spec("{\"builtin\": \"kerr\"}"),
            Err(Error::UnknownBuiltin(_))
        ));
        assert!(matches!(
            parse_metric_spec("{\"g_tt\": \"-1\", \"g_xx\": \"1\", \"topology\": \"line\", \"t_range\": [-1, 1]}"),
            Err(Error::MissingField(f)) if f == "g_tx"
        ));
        assert!(matches!(
            parse_metric_spec("{\"builtin\": \"conformal_flat\"}"),
            Err(Error::MissingField(f)) if f == "omega2"
        ));
        match parse_metric_spec(
            "{\"g_tt\": \"-1\", \"g_tx\": \"q(t)\", \"g_xx\": \"1\", \"topology\": \"line\", \"t_range\": [-1, 1]}",
        ) {
            Err(Error::Expr { field, source }) => {
                assert_eq!(field, "g_tx");
                assert_eq!(source.position, 0);
                assert!(source.message.contains("unknown function"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_metric_spec("{\"builtin\": "),
            Err(Error::Json { line: 1, .. })
        ));
        assert!(matches!(
            parse_metric_spec("{\"builtin\": \"minkowski\", \"t_range\": [0.5, 1]}"),
            Err(Error::InvalidSpec(_))
        ));
    }

    #[test]
    fn eval_rejects_points_outside_box() {
        let m = Metric2D::minkowski();
        assert!(matches!(
            m.eval(Event::new(10.0, 0.0)),
            Err(Error::OutsideDomain { .. })
        ));
    }

    #[test]
    fn builtin_round_trip_is_exact() {
        use rand::{Rng, SeedableRng};
        let specs = [
            MetricSpec::builtin("minkowski"),
            MetricSpec::builtin("einstein"),
            MetricSpec::builtin("de_sitter"),
            MetricSpec::builtin("conformal_flat").with_field("omega2", "exp(t)"),
            MetricSpec::builtin("flrw").with_field("a", "1 + 0.5*t^2"),
        ];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for spec in specs {
            let m = spec.build().unwrap();
            let again = parse_metric_spec(&m.render()).unwrap();
            for _ in 0..100 {
                let t = rng.gen_range(-4.0..4.0);
                let x = rng.gen_range(-10.0..10.0);
                assert_eq!(m.components(t, x), again.components(t, x));
            }
        }
    }

    #[test]
    fn discriminant_positive_for_valid_metrics() {
        let m = MetricSpec::expressions("-1", "0.3*sin(x)", "1", TopologyName::Circle)
            .build()
            .unwrap();
        assert!(check_lorentzian(&m, 64, 64).is_valid());
        for i in 0..64 {
            let c = m.components(0.1 * i as f64 - 3.0, 0.2 * i as f64);
            assert!(c.null_discriminant() > 0.0);
        }
    }
}
