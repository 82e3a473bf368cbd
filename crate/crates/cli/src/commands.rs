use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use causal_atlas::csvio::{read_points, write_images, ImageRow};
use causal_atlas::diagram::{render_diagram, DiagramConfig};
use causal_atlas::embed::DEFAULT_FD_STEP;
use causal_atlas::verify::run_verification;
use causal_atlas::{
    check_lorentzian, embed_point, EmbeddedPoint, Error, Event, Metric2D, Result, SurfaceMap,
    Target, Topology, VerifyConfig,
};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::{exit_code_for, EXIT_CONTRACT, EXIT_PROPERTY};

const CHECK_GRID: [usize; 2] = [64, 64];
const ORACLE_GRID: [usize; 2] = [128, 128];
const LISTED_VIOLATIONS: usize = 20;

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn default_target(m: &Metric2D) -> Target {
    match m.topology() {
        Topology::Line => Target::Minkowski,
        Topology::Circle { .. } => Target::Einstein,
    }
}

fn surface_map(cfg: &RunConfig, m: &Metric2D) -> Result<SurfaceMap> {
    match (&cfg.surface_map, m.topology()) {
        (None, t) => Ok(SurfaceMap::default_for(t)),
        (Some(_), Topology::Circle { .. }) => Err(Error::TopologyMismatch(
            "circle metrics use the fixed equivariant surface map 2*pi*x/L".into(),
        )),
        (Some(src), t) => {
            let f = SurfaceMap::parse(src)?;
            f.validate(m.x_window(), t)?;
            Ok(f)
        }
    }
}

fn read_events(cfg: &RunConfig) -> Result<Vec<Event>> {
    match &cfg.points {
        Some(p) => read_points(File::open(p)?),
        None => Err(Error::MissingField("--points".into())),
    }
}

pub fn check_metric(cfg: &RunConfig) -> Result<u8> {
    let m = cfg.load_metric()?;
    let [n_t, n_x] = cfg.grid.unwrap_or(CHECK_GRID);
    let report = check_lorentzian(&m, n_t, n_x);
    let mut out = output(cfg.out.as_deref())?;
    writeln!(
        out,
        "metric {}: {} samples, {} violations",
        m.label(),
        report.samples,
        report.violations.len()
    )?;
    for v in report.violations.iter().take(LISTED_VIOLATIONS) {
        writeln!(out, "  ({:.6}, {:.6}): {}", v.t, v.x, v.kind)?;
    }
    if report.violations.len() > LISTED_VIOLATIONS {
        writeln!(out, "  ... {} more", report.violations.len() - LISTED_VIOLATIONS)?;
    }
    out.flush()?;
    Ok(if report.is_valid() { 0 } else { EXIT_CONTRACT })
}

pub fn embed(cfg: &RunConfig) -> Result<u8> {
    let m = cfg.load_metric()?;
    let target = cfg.target.unwrap_or_else(|| default_target(&m));
    if m.topology().is_circle() && target == Target::Minkowski {
        return Err(Error::TopologyMismatch(
            "a circle-topology metric cannot be imbedded in Minkowski space; use --target einstein"
                .into(),
        ));
    }
    let f = surface_map(cfg, &m)?;
    let events = read_events(cfg)?;
    let results: Vec<Result<EmbeddedPoint>> = events
        .par_iter()
        .map(|&p| embed_point(&m, &f, p, target, &cfg.tolerances))
        .collect();

    let worst = results
        .iter()
        .filter_map(|r| r.as_ref().err())
        .map(exit_code_for)
        .max()
        .unwrap_or(0);
    let out = output(cfg.out.as_deref())?;
    match target {
        Target::Minkowski => {
            let rows: Vec<_> = events
                .iter()
                .zip(results)
                .map(|(&p, r)| match r {
                    Ok(EmbeddedPoint::Minkowski(a)) => ImageRow::Ok(p, a),
                    Ok(other) => ImageRow::Failed(p, format!("unexpected image {other:?}")),
                    Err(e) => ImageRow::Failed(p, e.to_string()),
                })
                .collect();
            write_images(out, &rows)?;
        }
        Target::Einstein => {
            let rows: Vec<_> = events
                .iter()
                .zip(results)
                .map(|(&p, r)| match r {
                    Ok(EmbeddedPoint::Cylinder(c)) => ImageRow::Ok(p, c),
                    Ok(other) => ImageRow::Failed(p, format!("unexpected image {other:?}")),
                    Err(e) => ImageRow::Failed(p, e.to_string()),
                })
                .collect();
            write_images(out, &rows)?;
        }
    }
    if worst != 0 {
        eprintln!("error: some events could not be imbedded; see the error column");
    }
    Ok(worst)
}

pub fn verify(cfg: &RunConfig) -> Result<u8> {
    let m = cfg.load_metric()?;
    let f = surface_map(cfg, &m)?;
    let [n_t, n_x] = cfg.grid.unwrap_or(ORACLE_GRID);
    let vcfg = VerifyConfig {
        samples: cfg.samples,
        seed: cfg.seed,
        grid: Some((n_t, n_x)),
        margin: cfg.margin,
        fd_step: DEFAULT_FD_STEP,
        tol: cfg.tolerances,
    };
    let report = run_verification(&m, &f, &vcfg)?;
    let mut out = output(cfg.out.as_deref())?;
    write!(out, "{}", report.table())?;
    out.flush()?;
    if let Some(path) = &cfg.report {
        std::fs::write(path, report.to_json() + "\n")?;
    }
    if report.passed() {
        Ok(0)
    } else {
        eprintln!("failed properties: {}", report.failed_properties().join(", "));
        Ok(EXIT_PROPERTY)
    }
}

pub fn diagram(cfg: &RunConfig) -> Result<u8> {
    let m = cfg.load_metric()?;
    let target = cfg.target.unwrap_or_else(|| default_target(&m));
    if m.topology().is_circle() && target == Target::Minkowski {
        return Err(Error::TopologyMismatch(
            "a circle-topology metric cannot be drawn in the Minkowski plane; use --target einstein"
                .into(),
        ));
    }
    let f = surface_map(cfg, &m)?;
    let events = match &cfg.points {
        Some(_) => read_events(cfg)?,
        None => Vec::new(),
    };
    let dcfg = DiagramConfig {
        events,
        ..DiagramConfig::default()
    };
    let svg = render_diagram(&m, &f, target, &dcfg, &cfg.tolerances)?;
    let mut out = output(cfg.out.as_deref())?;
    out.write_all(svg.as_bytes())?;
    out.flush()?;
    Ok(0)
}
