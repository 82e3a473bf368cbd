//! Flat causal orders on the imbedding targets.

use std::f64::consts::TAU;

use crate::embed::{CylinderEvent, MinkowskiEvent};
use crate::shadow::{CausalRelation, RelationTag};
use crate::tolerance::Tolerances;

fn classify(dtau: f64, spacelike_gap: f64, coincident: bool, tol: f64) -> CausalRelation {
    if coincident {
        return CausalRelation::COINCIDENT;
    }
    // spacelike_gap = |Δτ| - |Δθ| for the best translate.
    if spacelike_gap < -tol {
        return CausalRelation::new(RelationTag::Spacelike, false);
    }
    let boundary = spacelike_gap <= tol;
    let tag = if dtau > 0.0 {
        RelationTag::StrictlyBefore
    } else {
        RelationTag::StrictlyAfter
    };
    CausalRelation::new(tag, boundary)
}

/// Order of `-dτ² + dX²`: `a` precedes `b` iff `Δτ >= |ΔX|`.
pub fn minkowski_order(a: MinkowskiEvent, b: MinkowskiEvent, tol: &Tolerances) -> CausalRelation {
    let dtau = b.tau - a.tau;
    let dx = b.x - a.x;
    let coincident = dtau.abs() <= tol.causal && dx.abs() <= tol.causal;
    classify(dtau, dtau.abs() - dx.abs(), coincident, tol.causal)
}

/// Order on the Einstein cylinder, computed on the cover against the deck
/// translates `θ + 2πk` of `b`.
pub fn cylinder_order(a: CylinderEvent, b: CylinderEvent, tol: &Tolerances) -> CausalRelation {
    let dtau = b.tau - a.tau;
    let dtheta = b.theta - a.theta;
    let reach = (dtau.abs() / TAU).ceil() as i64 + 1;
    let nearest = (-reach..=reach)
        .map(|k| (dtheta + TAU * k as f64).abs())
        .fold(f64::INFINITY, f64::min);
    let coincident = dtau.abs() <= tol.causal && nearest <= tol.causal;
    classify(dtau, dtau.abs() - nearest, coincident, tol.causal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn flat_examples() {
        let o = MinkowskiEvent::new(0.0, 0.0);
        let r = minkowski_order(o, MinkowskiEvent::new(1.0, 0.5), &tol());
        assert_eq!(r, CausalRelation::new(RelationTag::StrictlyBefore, false));
        let r = minkowski_order(o, MinkowskiEvent::new(1.0, 1.0), &tol());
        assert_eq!(r, CausalRelation::new(RelationTag::StrictlyBefore, true));
        let r = minkowski_order(o, MinkowskiEvent::new(0.5, 2.0), &tol());
        assert_eq!(r.tag, RelationTag::Spacelike);
        let r = minkowski_order(MinkowskiEvent::new(1.0, 0.5), o, &tol());
        assert_eq!(r.tag, RelationTag::StrictlyAfter);
        assert_eq!(minkowski_order(o, o, &tol()), CausalRelation::COINCIDENT);
    }

    #[test]
    fn cylinder_examples() {
        let o = CylinderEvent::from_cover(0.0, 0.0);
        assert_eq!(cylinder_order(o, o, &tol()), CausalRelation::COINCIDENT);
        let r = cylinder_order(o, CylinderEvent::from_cover(0.1, PI), &tol());
        assert_eq!(r.tag, RelationTag::Spacelike);
        // Short way round.
        let r = cylinder_order(o, CylinderEvent::from_cover(0.5, TAU - 0.2), &tol());
        assert_eq!(r.tag, RelationTag::StrictlyBefore);
    }

    #[test]
    fn cylinder_wraps_after_half_turn_brute_force() {
        let o = CylinderEvent::from_cover(0.0, 0.0);
        for i in 0..100 {
            let theta = TAU * i as f64 / 100.0;
            let b = CylinderEvent::from_cover(PI, theta);
            // Brute force over deck translates k in [-2, 2].
            let best = (-2..=2)
                .map(|k| PI - (theta + TAU * k as f64).abs())
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(best >= -1e-15);
            let r = cylinder_order(o, b, &tol());
            assert_eq!(r.tag, RelationTag::StrictlyBefore, "theta = {theta}");
        }
    }
}
