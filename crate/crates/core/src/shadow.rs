//! Shadows on the Cauchy slice and the causal order they encode.
//!
//! For `p` to the future of the slice, its past shadow is `J^-(p) ∩ Σ`; for
//! `q` to the past, its future shadow is `J^+(q) ∩ Σ`. Both are closed
//! intervals bounded by the two null curves through the event. Then
//!
//! * `q <= p` iff the past shadow of `p` meets the future shadow of `q`;
//! * for two events to the future of `Σ`, `p <= q` iff `S_p ⊆ S_q`
//!   (dually for the past side).
//!
//! On circle topology shadows stay in cover coordinates and only the
//! comparisons here know about deck translates `x -> x + kL`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{Metric2D, Topology};
use crate::nullflow::{shadow_endpoint, Event, NullBranch};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `J^-(p) ∩ Σ` for `p` on or to the future of the slice.
    PastShadow,
    /// `J^+(q) ∩ Σ` for `q` to the past of the slice.
    FutureShadow,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Shadow {
    pub x_left: f64,
    pub x_right: f64,
    pub side: Side,
    pub source: Event,
}

impl Shadow {
    pub fn width(&self) -> f64 {
        self.x_right - self.x_left
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.x_left + self.x_right)
    }

    pub fn is_degenerate(&self) -> bool {
        self.x_left == self.x_right
    }

    /// `self` shifted by a deck translation.
    pub fn translated(&self, dx: f64) -> Shadow {
        Shadow {
            x_left: self.x_left + dx,
            x_right: self.x_right + dx,
            side: self.side,
            source: self.source.shifted_x(dx),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationTag {
    StrictlyBefore,
    StrictlyAfter,
    Coincident,
    Spacelike,
}

/// Pairwise causal relation. `boundary_flag` marks verdicts that sit within
/// `tol_causal` of the null cone, i.e. where `≤` holds but `≪` may not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CausalRelation {
    pub tag: RelationTag,
    pub boundary_flag: bool,
}

impl CausalRelation {
    pub const fn new(tag: RelationTag, boundary_flag: bool) -> Self {
        Self { tag, boundary_flag }
    }

    pub const COINCIDENT: CausalRelation = CausalRelation::new(RelationTag::Coincident, false);

    pub fn mirror(self) -> Self {
        let tag = match self.tag {
            RelationTag::StrictlyBefore => RelationTag::StrictlyAfter,
            RelationTag::StrictlyAfter => RelationTag::StrictlyBefore,
            other => other,
        };
        Self { tag, ..self }
    }

    /// `p <= q` (including coincidence).
    pub fn is_causal_before(self) -> bool {
        matches!(self.tag, RelationTag::StrictlyBefore | RelationTag::Coincident)
    }

    pub fn is_related(self) -> bool {
        self.tag != RelationTag::Spacelike
    }
}

impl fmt::Display for CausalRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.tag {
            RelationTag::StrictlyBefore => "strictly_before",
            RelationTag::StrictlyAfter => "strictly_after",
            RelationTag::Coincident => "coincident",
            RelationTag::Spacelike => "spacelike",
        };
        if self.boundary_flag {
            write!(f, "{tag} (boundary)")
        } else {
            f.write_str(tag)
        }
    }
}

pub fn compute_shadow(m: &Metric2D, p: Event, tol: &Tolerances) -> Result<Shadow> {
    let side = if p.t >= 0.0 {
        Side::PastShadow
    } else {
        Side::FutureShadow
    };
    if p.t.abs() <= tol.event {
        m.eval(p)?;
        return Ok(Shadow {
            x_left: p.x,
            x_right: p.x,
            side,
            source: p,
        });
    }
    let a = shadow_endpoint(m, p, NullBranch::Plus, tol)?;
    let b = shadow_endpoint(m, p, NullBranch::Minus, tol)?;
    Ok(Shadow {
        x_left: a.min(b),
        x_right: a.max(b),
        side,
        source: p,
    })
}

/// Deck shifts worth trying when comparing `a` against translates of `b`.
fn deck_shifts(a: &Shadow, b: &Shadow, topology: Topology) -> impl Iterator<Item = f64> {
    let (period, k0, reach) = match topology {
        Topology::Line => (0.0, 0.0, 0),
        Topology::Circle { period } => (
            period,
            ((a.center() - b.center()) / period).round(),
            ((a.width() + b.width()) / period).ceil() as i64 + 1,
        ),
    };
    (-reach..=reach).map(move |j| (k0 + j as f64) * period)
}

/// Signed slack of the intersection of `a` with the best translate of `b`:
/// how far either interval could slide before they stop meeting. `>= 0` iff
/// they intersect.
pub fn overlap_margin(a: &Shadow, b: &Shadow, topology: Topology) -> f64 {
    deck_shifts(a, b, topology)
        .map(|s| (a.x_right - (b.x_left + s)).min((b.x_right + s) - a.x_left))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Signed slack of `inner ⊆ outer` for the best translate of `outer`; `>= 0`
/// iff contained.
pub fn containment_margin(inner: &Shadow, outer: &Shadow, topology: Topology) -> f64 {
    deck_shifts(inner, outer, topology)
        .map(|s| (inner.x_left - (outer.x_left + s)).min((outer.x_right + s) - inner.x_right))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Whether a past shadow meets a future shadow (order of arguments free).
pub fn shadows_intersect(a: &Shadow, b: &Shadow, topology: Topology) -> Result<bool> {
    let compatible = a.side != b.side || a.is_degenerate() || b.is_degenerate();
    if !compatible {
        return Err(Error::TopologyMismatch(
            "intersection criterion needs one past shadow and one future shadow".into(),
        ));
    }
    if let Topology::Circle { period } = topology {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::TopologyMismatch(format!("bad period {period}")));
        }
    }
    Ok(overlap_margin(a, b, topology) >= 0.0)
}

fn cover_distance(p: Event, q: Event, topology: Topology) -> f64 {
    let dx = q.x - p.x;
    match topology {
        Topology::Line => dx.abs(),
        Topology::Circle { period } => (dx - (dx / period).round() * period).abs(),
    }
}

/// Decide the relation of `p` to `q` from their shadows.
pub fn relation_from_shadows(
    sp: &Shadow,
    sq: &Shadow,
    topology: Topology,
    tol: &Tolerances,
) -> CausalRelation {
    let (p, q) = (sp.source, sq.source);
    if (p.t - q.t).abs() <= tol.causal && cover_distance(p, q, topology) <= tol.causal {
        return CausalRelation::COINCIDENT;
    }
    // Evaluate one canonical orientation so that mirroring is exact.
    if (p.t, p.x) > (q.t, q.x) {
        return relation_from_shadows(sq, sp, topology, tol).mirror();
    }
    let margin = cone_margin(sp, sq, topology);
    let boundary = margin.abs() <= tol.causal;
    if margin >= -tol.causal {
        CausalRelation::new(RelationTag::StrictlyBefore, boundary)
    } else {
        CausalRelation::new(RelationTag::Spacelike, false)
    }
}

/// Signed distance (in slice coordinates) of the pair from the null cone,
/// for the orientation with the earlier event first: `>= 0` iff the earlier
/// event causally precedes the later one.
pub fn cone_margin(sp: &Shadow, sq: &Shadow, topology: Topology) -> f64 {
    let (p, q) = (sp.source, sq.source);
    if (p.t, p.x) > (q.t, q.x) {
        return cone_margin(sq, sp, topology);
    }
    if p.t <= 0.0 && q.t >= 0.0 {
        overlap_margin(sq, sp, topology)
    } else if p.t > 0.0 {
        containment_margin(sp, sq, topology)
    } else {
        containment_margin(sq, sp, topology)
    }
}

pub fn causal_order(m: &Metric2D, p: Event, q: Event, tol: &Tolerances) -> Result<CausalRelation> {
    let sp = compute_shadow(m, p, tol)?;
    let sq = compute_shadow(m, q, tol)?;
    Ok(relation_from_shadows(&sp, &sq, m.topology(), tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, TAU};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn shadow(l: f64, r: f64, side: Side) -> Shadow {
        Shadow {
            x_left: l,
            x_right: r,
            side,
            source: Event::new(if side == Side::PastShadow { 1.0 } else { -1.0 }, 0.5 * (l + r)),
        }
    }

    #[test]
    fn minkowski_shadows() {
        let m = Metric2D::minkowski();
        let s = compute_shadow(&m, Event::new(2.0, 0.0), &tol()).unwrap();
        assert_eq!(s.side, Side::PastShadow);
        assert!((s.x_left + 2.0).abs() < 1e-11 && (s.x_right - 2.0).abs() < 1e-11);
        let s = compute_shadow(&m, Event::new(-1.0, 3.0), &tol()).unwrap();
        assert_eq!(s.side, Side::FutureShadow);
        assert!((s.x_left - 2.0).abs() < 1e-11 && (s.x_right - 4.0).abs() < 1e-11);
        let s = compute_shadow(&m, Event::new(0.0, 3.0), &tol()).unwrap();
        assert!(s.is_degenerate());
    }

    #[test]
    fn de_sitter_shadow() {
        let m = Metric2D::de_sitter();
        let s = compute_shadow(&m, Event::new(1f64.asinh(), 0.0), &tol()).unwrap();
        assert!((s.x_left + FRAC_PI_4).abs() < 1e-9);
        assert!((s.x_right - FRAC_PI_4).abs() < 1e-9);
    }

    #[test]
    fn interval_intersection() {
        let past = shadow(-2.0, 2.0, Side::PastShadow);
        assert!(shadows_intersect(&past, &shadow(1.0, 4.0, Side::FutureShadow), Topology::Line).unwrap());
        assert!(!shadows_intersect(&past, &shadow(3.0, 4.0, Side::FutureShadow), Topology::Line).unwrap());
        // Swapped arguments are fine.
        assert!(shadows_intersect(&shadow(1.0, 4.0, Side::FutureShadow), &past, Topology::Line).unwrap());
        assert!(shadows_intersect(&past, &past, Topology::Line).is_err());
    }

    #[test]
    fn circle_intersection_matches_brute_force() {
        let circle = Topology::Circle { period: TAU };
        let a = shadow(-0.5, 0.5, Side::PastShadow);
        let b = shadow(6.0, 6.5, Side::FutureShadow);
        let brute = (-3..=3).any(|k| {
            let s = k as f64 * TAU;
            a.x_left.max(b.x_left + s) <= a.x_right.min(b.x_right + s)
        });
        assert!(brute);
        assert!(shadows_intersect(&a, &b, circle).unwrap());
        // Same shadows on the line do not meet.
        assert!(!shadows_intersect(&a, &b, Topology::Line).unwrap());
    }

    #[test]
    fn minkowski_order_examples() {
        let m = Metric2D::minkowski();
        let o = Event::new(0.0, 0.0);
        let r = causal_order(&m, o, Event::new(1.0, 0.5), &tol()).unwrap();
        assert_eq!(r, CausalRelation::new(RelationTag::StrictlyBefore, false));
        let r = causal_order(&m, o, Event::new(1.0, 2.0), &tol()).unwrap();
        assert_eq!(r.tag, RelationTag::Spacelike);
        let r = causal_order(&m, Event::new(1.0, 0.5), o, &tol()).unwrap();
        assert_eq!(r.tag, RelationTag::StrictlyAfter);
        assert_eq!(causal_order(&m, o, o, &tol()).unwrap(), CausalRelation::COINCIDENT);
        // Same side, both to the future.
        let r = causal_order(&m, Event::new(1.0, 0.0), Event::new(2.5, 1.0), &tol()).unwrap();
        assert_eq!(r.tag, RelationTag::StrictlyBefore);
        // Both to the past.
        let r = causal_order(&m, Event::new(-2.5, 1.0), Event::new(-1.0, 0.0), &tol()).unwrap();
        assert_eq!(r.tag, RelationTag::StrictlyBefore);
        let r = causal_order(&m, Event::new(-2.5, 3.0), Event::new(-1.0, 0.0), &tol()).unwrap();
        assert_eq!(r.tag, RelationTag::Spacelike);
    }

    #[test]
    fn de_sitter_cone_boundary() {
        let m = Metric2D::de_sitter();
        let o = Event::new(0.0, 0.0);
        let t = 1f64.asinh();
        let inside = causal_order(&m, o, Event::new(t, FRAC_PI_4 - 0.01), &tol()).unwrap();
        assert_eq!(inside, CausalRelation::new(RelationTag::StrictlyBefore, false));
        let outside = causal_order(&m, o, Event::new(t, FRAC_PI_4 + 0.01), &tol()).unwrap();
        assert_eq!(outside, CausalRelation::new(RelationTag::Spacelike, false));
    }

    #[test]
    fn cylinder_wraps_around() {
        // On the Einstein cylinder, after time pi every point is reachable.
        let m = Metric2D::einstein();
        let r = causal_order(&m, Event::new(-1.6, 0.0), Event::new(1.6, 3.0), &tol()).unwrap();
        assert_eq!(r.tag, RelationTag::StrictlyBefore);
        let r = causal_order(&m, Event::new(-0.1, 0.0), Event::new(0.1, 6.2), &tol()).unwrap();
        assert_eq!(r.tag, RelationTag::StrictlyBefore);
        let r = causal_order(&m, Event::new(0.5, 0.0), Event::new(1.0, 3.0), &tol()).unwrap();
        assert_eq!(r.tag, RelationTag::Spacelike);
    }

    #[test]
    fn null_related_pairs_are_flagged() {
        let m = Metric2D::minkowski();
        let r = causal_order(&m, Event::new(0.5, 0.0), Event::new(1.5, 1.0), &tol()).unwrap();
        assert!(r.boundary_flag);
        assert_eq!(r.tag, RelationTag::StrictlyBefore);
    }
}
