//! SVG line drawings of the imbedded region.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::embed::{embed_point, EmbeddedPoint, SurfaceMap, Target};
use crate::error::Result;
use crate::metric::Metric2D;
use crate::nullflow::{integrate_null, Direction, Event, NullBranch};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, PartialEq)]
pub struct DiagramConfig {
    /// Constant-t and constant-x curves drawn across the box.
    pub lattice: usize,
    /// Points per curve.
    pub resolution: usize,
    pub width: f64,
    pub height: f64,
    /// Events whose null lines are drawn.
    pub events: Vec<Event>,
}

impl Default for DiagramConfig {
    fn default() -> Self {
        Self {
            lattice: 9,
            resolution: 64,
            width: 720.0,
            height: 480.0,
            events: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layer {
    Frame,
    Lattice,
    Boundary,
    Slice,
    Null,
}

impl Layer {
    fn style(self) -> &'static str {
        match self {
            Layer::Frame => r##"stroke="#999999" stroke-width="1" stroke-dasharray="4 3""##,
            Layer::Lattice => r##"stroke="#b8c4d6" stroke-width="0.8""##,
            Layer::Boundary => r##"stroke="#1f2d3d" stroke-width="1.6""##,
            Layer::Slice => r##"stroke="#d0342c" stroke-width="2.2""##,
            Layer::Null => r##"stroke="#2c8a3f" stroke-width="1.2""##,
        }
    }
}

/// Plot-space polyline: x is `X` or `θ`, y is `τ`.
struct Polyline {
    layer: Layer,
    points: Vec<[f64; 2]>,
}

fn linspace(a: f64, b: f64, n: usize) -> impl DoubleEndedIterator<Item = f64> {
    let n = n.max(2);
    (0..n).map(move |k| a + (b - a) * k as f64 / (n - 1) as f64)
}

fn plot_coords(img: EmbeddedPoint) -> [f64; 2] {
    match img {
        EmbeddedPoint::Minkowski(a) => [a.x, a.tau],
        EmbeddedPoint::Cylinder(c) => [c.theta, c.tau],
    }
}

/// Embed a run of events and split it wherever the reduced angle wraps.
fn image_runs(
    m: &Metric2D,
    f: &SurfaceMap,
    target: Target,
    events: &[Event],
    layer: Layer,
    tol: &Tolerances,
) -> Result<Vec<Polyline>> {
    let pts: Vec<[f64; 2]> = events
        .par_iter()
        .map(|&p| embed_point(m, f, p, target, tol).map(plot_coords))
        .collect::<Result<_>>()?;
    let mut runs = Vec::new();
    let mut current: Vec<[f64; 2]> = Vec::new();
    for pt in pts {
        if let Some(last) = current.last() {
            if target == Target::Einstein && (pt[0] - last[0]).abs() > PI {
                runs.push(std::mem::take(&mut current));
            }
        }
        current.push(pt);
    }
    runs.push(current);
    Ok(runs
        .into_iter()
        .filter(|r| r.len() > 1)
        .map(|points| Polyline { layer, points })
        .collect())
}

fn null_lines(
    m: &Metric2D,
    p: Event,
    tol: &Tolerances,
) -> Result<Vec<Vec<Event>>> {
    if p.t == 0.0 {
        return Ok(Vec::new());
    }
    NullBranch::BOTH
        .iter()
        .map(|&b| {
            let path = integrate_null(m, p, b, Direction::toward_slice(p.t), tol)?;
            Ok(path.events)
        })
        .collect()
}

struct Frame {
    lo: [f64; 2],
    hi: [f64; 2],
    width: f64,
    height: f64,
    pad: f64,
}

impl Frame {
    fn map(&self, p: [f64; 2]) -> (f64, f64) {
        let sx = (self.width - 2.0 * self.pad) / (self.hi[0] - self.lo[0]);
        let sy = (self.height - 2.0 * self.pad) / (self.hi[1] - self.lo[1]);
        let s = sx.min(sy);
        let ox = 0.5 * (self.width - s * (self.hi[0] - self.lo[0]));
        let oy = 0.5 * (self.height - s * (self.hi[1] - self.lo[1]));
        (ox + s * (p[0] - self.lo[0]), self.height - oy - s * (p[1] - self.lo[1]))
    }
}

/// Render the image of the domain box under the imbedding into `target`.
pub fn render_diagram(
    m: &Metric2D,
    f: &SurfaceMap,
    target: Target,
    cfg: &DiagramConfig,
    tol: &Tolerances,
) -> Result<String> {
    let [t0, t1] = m.t_range();
    let [x0, x1] = m.x_window();
    let n = cfg.resolution;
    let mut lines = Vec::new();

    for x in linspace(x0, x1, cfg.lattice) {
        let ev: Vec<Event> = linspace(t0, t1, n).map(|t| Event::new(t, x)).collect();
        lines.extend(image_runs(m, f, target, &ev, Layer::Lattice, tol)?);
    }
    for t in linspace(t0, t1, cfg.lattice) {
        let ev: Vec<Event> = linspace(x0, x1, n).map(|x| Event::new(t, x)).collect();
        lines.extend(image_runs(m, f, target, &ev, Layer::Lattice, tol)?);
    }
    let edges: [Vec<Event>; 4] = [
        linspace(x0, x1, n).map(|x| Event::new(t0, x)).collect(),
        linspace(t0, t1, n).map(|t| Event::new(t, x1)).collect(),
        linspace(x0, x1, n).map(|x| Event::new(t1, x)).rev().collect(),
        linspace(t0, t1, n).map(|t| Event::new(t, x0)).rev().collect(),
    ];
    for (k, edge) in edges.iter().enumerate() {
        // On the circle the x edges are glued and carry no boundary.
        if m.topology().is_circle() && k % 2 == 1 {
            continue;
        }
        lines.extend(image_runs(m, f, target, edge, Layer::Boundary, tol)?);
    }
    let slice: Vec<Event> = linspace(x0, x1, 4 * n).map(|x| Event::new(0.0, x)).collect();
    lines.extend(image_runs(m, f, target, &slice, Layer::Slice, tol)?);

    let mut markers = Vec::new();
    for &p in &cfg.events {
        for path in null_lines(m, p, tol)? {
            lines.extend(image_runs(m, f, target, &path, Layer::Null, tol)?);
        }
        markers.push(plot_coords(embed_point(m, f, p, target, tol)?));
    }

    let compactified = target == Target::Einstein && !m.topology().is_circle();
    if target == Target::Einstein {
        lines.push(Polyline {
            layer: Layer::Frame,
            points: vec![[0.0, -PI], [0.0, PI]],
        });
        lines.push(Polyline {
            layer: Layer::Frame,
            points: vec![[TAU, -PI], [TAU, PI]],
        });
    }
    if compactified {
        lines.push(Polyline {
            layer: Layer::Frame,
            points: vec![[0.0, PI], [PI, 0.0], [0.0, -PI]],
        });
        lines.push(Polyline {
            layer: Layer::Frame,
            points: vec![[TAU, PI], [PI, 0.0], [TAU, -PI]],
        });
    }

    let frame = frame_for(&lines, target, compactified, cfg);
    Ok(to_svg(&lines, &markers, &frame, m.label(), target))
}

fn frame_for(lines: &[Polyline], target: Target, compactified: bool, cfg: &DiagramConfig) -> Frame {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for l in lines.iter().filter(|l| l.layer != Layer::Frame) {
        for p in &l.points {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
    }
    if target == Target::Einstein {
        lo[0] = 0.0;
        hi[0] = TAU;
    }
    if compactified {
        lo[1] = -PI;
        hi[1] = PI;
    }
    for k in 0..2 {
        if !(hi[k] > lo[k]) {
            lo[k] -= 1.0;
            hi[k] += 1.0;
        }
    }
    Frame {
        lo,
        hi,
        width: cfg.width,
        height: cfg.height,
        pad: 24.0,
    }
}

fn to_svg(
    lines: &[Polyline],
    markers: &[[f64; 2]],
    frame: &Frame,
    label: &str,
    target: Target,
) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">"#,
        w = frame.width,
        h = frame.height
    );
    let axes = match target {
        Target::Minkowski => "X horizontal, tau vertical",
        Target::Einstein => "theta in [0, 2pi) horizontal, tau vertical",
    };
    let _ = writeln!(s, "<title>{} ({axes})</title>", escape(label));
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for layer in [Layer::Frame, Layer::Lattice, Layer::Boundary, Layer::Slice, Layer::Null] {
        let _ = writeln!(s, r#"<g fill="none" {}>"#, layer.style());
        for l in lines.iter().filter(|l| l.layer == layer) {
            s.push_str("<polyline points=\"");
            for (k, &p) in l.points.iter().enumerate() {
                let (x, y) = frame.map(p);
                if k > 0 {
                    s.push(' ');
                }
                let _ = write!(s, "{x:.3},{y:.3}");
            }
            s.push_str("\"/>\n");
        }
        s.push_str("</g>\n");
    }
    s.push_str("<g fill=\"#2c8a3f\">\n");
    for &p in markers {
        let (x, y) = frame.map(p);
        let _ = writeln!(s, r#"<circle cx="{x:.3}" cy="{y:.3}" r="3"/>"#);
    }
    s.push_str("</g>\n</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_well_formed() {
        let m = Metric2D::de_sitter();
        let cfg = DiagramConfig {
            lattice: 3,
            resolution: 8,
            events: vec![Event::new(1.0, 2.0)],
            ..DiagramConfig::default()
        };
        let tol = Tolerances::default();
        let f = SurfaceMap::default_for(m.topology());
        let a = render_diagram(&m, &f, Target::Einstein, &cfg, &tol).unwrap();
        let b = render_diagram(&m, &f, Target::Einstein, &cfg, &tol).unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with("<svg") && a.trim_end().ends_with("</svg>"));
        assert!(a.contains("<circle"));
    }

    #[test]
    fn minkowski_compactified_has_diamond() {
        let m = Metric2D::minkowski();
        let cfg = DiagramConfig {
            lattice: 3,
            resolution: 8,
            ..DiagramConfig::default()
        };
        let svg = render_diagram(
            &m,
            &SurfaceMap::Identity,
            Target::Einstein,
            &cfg,
            &Tolerances::default(),
        )
        .unwrap();
        assert!(svg.contains("stroke-dasharray"));
    }
}
