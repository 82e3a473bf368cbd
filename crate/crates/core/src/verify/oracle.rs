//! Discrete reachability oracle for the causal order.
//!
//! Nodes sit on an `n_t × n_x` lattice over the domain box. A node links to
//! the nodes of the next time layer whose connecting slope lies inside the
//! local null cone, widened (`margin > 0`) or narrowed (`margin < 0`) by
//! `|margin|`. Reachability is the transitive closure, built by a sweep from
//! the last layer back to the first. A positive margin over-approximates
//! the causal order and a negative one under-approximates it.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metric::{Metric2D, Topology};
use crate::nullflow::{slopes_from_components, Event};

const SLOPE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq)]
struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    fn new(bits: usize) -> Self {
        Self {
            words: vec![0; bits.div_ceil(64)],
        }
    }

    fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    fn contains(&self, i: usize) -> bool {
        self.words[i / 64] & (1 << (i % 64)) != 0
    }

    fn union_with(&mut self, other: &BitSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= *b;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Node {
    pub i: usize,
    pub j: usize,
}

#[derive(Debug, Clone)]
pub struct GridOracle {
    n_t: usize,
    n_x: usize,
    t0: f64,
    dt: f64,
    x0: f64,
    dx: f64,
    periodic: bool,
    margin: f64,
    slopes: Vec<(f64, f64)>,
    reach: Vec<BitSet>,
}

impl GridOracle {
    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    /// Slope difference between neighbouring lattice columns over one layer.
    pub fn cell_slope(&self) -> f64 {
        self.dx / self.dt
    }

    fn index(&self, n: Node) -> usize {
        n.i * self.n_x + n.j
    }

    pub fn node_event(&self, n: Node) -> Event {
        Event::new(self.t0 + n.i as f64 * self.dt, self.x0 + n.j as f64 * self.dx)
    }

    pub fn local_slopes(&self, n: Node) -> (f64, f64) {
        self.slopes[self.index(n)]
    }

    /// Nearest lattice node and the coordinate distance to it.
    pub fn snap(&self, p: Event) -> (Node, f64) {
        let fi = ((p.t - self.t0) / self.dt).round().clamp(0.0, (self.n_t - 1) as f64);
        let raw_j = ((p.x - self.x0) / self.dx).round();
        let j = if self.periodic {
            raw_j.rem_euclid(self.n_x as f64)
        } else {
            raw_j.clamp(0.0, (self.n_x - 1) as f64)
        };
        let node = Node {
            i: fi as usize,
            j: j as usize,
        };
        let e = self.node_event(node);
        let mut ddx = p.x - e.x;
        if self.periodic {
            let period = self.dx * self.n_x as f64;
            ddx -= (ddx / period).round() * period;
        }
        (node, (p.t - e.t).hypot(ddx))
    }

    /// Whether `b` is reachable from `a` (reflexive).
    pub fn related(&self, a: Node, b: Node) -> bool {
        if a == b {
            return true;
        }
        b.i > a.i && self.reach[self.index(a)].contains(self.index(b))
    }

    /// Relation in either direction: `Some(true)` if `a -> b`, `Some(false)`
    /// if `b -> a`, `None` if neither.
    pub fn order(&self, a: Node, b: Node) -> Option<bool> {
        if self.related(a, b) {
            Some(true)
        } else if self.related(b, a) {
            Some(false)
        } else {
            None
        }
    }
}

/// Build the oracle. `margin` is a signed slope margin; see the module docs.
pub fn build_grid_oracle(m: &Metric2D, n_t: usize, n_x: usize, margin: f64) -> Result<GridOracle> {
    if n_t < 2 || n_x < 2 {
        return Err(Error::InvalidSpec(format!(
            "oracle lattice must be at least 2x2, got {n_t}x{n_x}"
        )));
    }
    let [t_lo, t_hi] = m.t_range();
    let [x_lo, x_hi] = m.x_window();
    let periodic = m.topology().is_circle();
    let dt = (t_hi - t_lo) / (n_t - 1) as f64;
    let dx = match m.topology() {
        Topology::Line => (x_hi - x_lo) / (n_x - 1) as f64,
        Topology::Circle { period } => period / n_x as f64,
    };

    let mut slopes = Vec::with_capacity(n_t * n_x);
    for i in 0..n_t {
        let t = t_lo + i as f64 * dt;
        for j in 0..n_x {
            let x = x_lo + j as f64 * dx;
            let s = slopes_from_components(m.components(t, x))
                .map_err(|reason| Error::InvalidMetricAt { t, x, reason })?;
            slopes.push(s);
        }
    }

    let max_slope = slopes
        .iter()
        .map(|&(lo, hi)| lo.abs().max(hi.abs()))
        .fold(0.0, f64::max);
    let span = (((max_slope + margin.abs()) * dt / dx).ceil() as i64 + 1).max(1);
    let span = if periodic {
        span.min(n_x as i64 / 2 + 1)
    } else {
        span
    };

    let mut oracle = GridOracle {
        n_t,
        n_x,
        t0: t_lo,
        dt,
        x0: x_lo,
        dx,
        periodic,
        margin,
        slopes,
        reach: Vec::new(),
    };

    let total = n_t * n_x;
    let mut reach: Vec<BitSet> = vec![BitSet::new(0); total];
    let last = n_t - 1;
    for j in 0..n_x {
        let mut b = BitSet::new(total);
        b.insert(last * n_x + j);
        reach[last * n_x + j] = b;
    }

    for i in (0..last).rev() {
        let next_layer = &reach[(i + 1) * n_x..(i + 2) * n_x];
        let layer: Vec<BitSet> = (0..n_x)
            .into_par_iter()
            .map(|j| {
                let mut b = BitSet::new(total);
                b.insert(i * n_x + j);
                let here = oracle.slopes[i * n_x + j];
                let mut seen = vec![false; n_x];
                for d in -span..=span {
                    let jj = j as i64 + d;
                    let jj = if periodic {
                        jj.rem_euclid(n_x as i64)
                    } else if jj < 0 || jj >= n_x as i64 {
                        continue;
                    } else {
                        jj
                    } as usize;
                    if seen[jj] {
                        continue;
                    }
                    let there = oracle.slopes[(i + 1) * n_x + jj];
                    let (lo, hi) = if margin >= 0.0 {
                        (here.0.min(there.0) - margin, here.1.max(there.1) + margin)
                    } else {
                        (here.0.max(there.0) - margin, here.1.min(there.1) + margin)
                    };
                    let slope = d as f64 * dx / dt;
                    if slope >= lo - SLOPE_EPS && slope <= hi + SLOPE_EPS {
                        seen[jj] = true;
                        b.union_with(&next_layer[jj]);
                    }
                }
                b
            })
            .collect();
        for (j, b) in layer.into_iter().enumerate() {
            reach[i * n_x + j] = b;
        }
    }
    oracle.reach = reach;
    Ok(oracle)
}
