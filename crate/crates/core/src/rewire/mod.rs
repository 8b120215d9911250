//! Hierarchical rewiring of long edges into short ones on Z².
//!
//! Every pair (x, y) whose level-k boxes sit at ∞-distance 2..=7 gets a
//! path γ^k_{x,y} through the midpoint hierarchy. Loading each path with a
//! small weight and shifting the hierarchy at random yields short-range
//! conductances U = W + Σ_k U_k that dominate a long-range network with
//! c_{x,y} = ‖x − y‖∞^{−4}, while U(e) keeps a Cauchy tail.

mod compare;
mod loads;
mod paths;
mod tail;
mod weights;

pub use compare::{conductivity_comparison, long_range_network, ComparisonReport};
pub use loads::{
    edge_loads, edge_loads_from, load_bound_checks, shift_tail_checks, structured_load,
    structured_loads, uk_loads_over_shifts, EdgeLoadTable, LoadBoundCheck, LoadCounts,
    LoadSemantics, ShiftTailCheck,
};
pub use paths::{
    ascent, gamma_path, gamma_prime, route, route_box_steps, GammaPath, BOX_GAP, PARTNER_BOXES,
    SHORT_GAP,
};
pub use tail::{cauchy_tail_estimate, two_sample_tail_test, TailRow, TailTable, TwoSampleRow};
pub use weights::{
    build_u, build_w, draw_shift, rewired_weight, sample_uk, sample_uk_direct, short_weight,
    uk_unit, Provenance, ShiftVector, WeightField,
};

use crate::error::{Error, Result};
use crate::lattice::{Orientation, Point, Point2, ShortEdge};

/// Closed vertex rectangle [lo₁, hi₁] × [lo₂, hi₂]; its edges are the short
/// edges with both endpoints inside.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EdgeWindow {
    lo: [i64; 2],
    hi: [i64; 2],
}

impl EdgeWindow {
    pub fn new(lo: [i64; 2], hi: [i64; 2]) -> Result<Self> {
        if lo[0] > hi[0] || lo[1] > hi[1] {
            return Err(Error::invalid(format!("empty window {lo:?}..{hi:?}")));
        }
        Ok(EdgeWindow { lo, hi })
    }

    /// B_r = [−r, r]².
    pub fn centered(radius: i64) -> Result<Self> {
        EdgeWindow::new([-radius, -radius], [radius, radius])
    }

    pub fn lo(&self) -> [i64; 2] {
        self.lo
    }

    pub fn hi(&self) -> [i64; 2] {
        self.hi
    }

    pub fn width(&self, axis: usize) -> i64 {
        self.hi[axis] - self.lo[axis] + 1
    }

    pub fn contains(&self, p: &Point2) -> bool {
        (0..2).all(|i| self.lo[i] <= p.0[i] && p.0[i] <= self.hi[i])
    }

    pub fn contains_edge(&self, e: &ShortEdge) -> bool {
        self.contains(&e.anchor) && self.contains(&e.head())
    }

    /// Grows (or shrinks, for negative `by`) every side.
    pub fn grow(&self, by: i64) -> Option<EdgeWindow> {
        EdgeWindow::new(
            [self.lo[0] - by, self.lo[1] - by],
            [self.hi[0] + by, self.hi[1] + by],
        )
        .ok()
    }

    pub fn vertex_count(&self) -> usize {
        (self.width(0) * self.width(1)) as usize
    }

    /// Row-major index, first coordinate outermost.
    pub fn vertex_index(&self, p: &Point2) -> Option<usize> {
        self.contains(p).then(|| {
            ((p.0[0] - self.lo[0]) * self.width(1) + (p.0[1] - self.lo[1])) as usize
        })
    }

    pub fn vertex(&self, index: usize) -> Point2 {
        let w = self.width(1);
        Point([self.lo[0] + index as i64 / w, self.lo[1] + index as i64 % w])
    }

    pub fn vertices(&self) -> impl Iterator<Item = Point2> + '_ {
        (0..self.vertex_count()).map(|i| self.vertex(i))
    }

    /// Anchor rectangle of the edges of one orientation.
    fn anchor_range(&self, o: Orientation) -> ([i64; 2], [i64; 2]) {
        let off = o.offset();
        let lo = [self.lo[0] - off[0].min(0), self.lo[1] - off[1].min(0)];
        let hi = [self.hi[0] - off[0].max(0), self.hi[1] - off[1].max(0)];
        (lo, hi)
    }

    fn orientation_count(&self, o: Orientation) -> usize {
        let (lo, hi) = self.anchor_range(o);
        if lo[0] > hi[0] || lo[1] > hi[1] {
            0
        } else {
            ((hi[0] - lo[0] + 1) * (hi[1] - lo[1] + 1)) as usize
        }
    }

    pub fn edge_count(&self) -> usize {
        Orientation::ALL.iter().map(|&o| self.orientation_count(o)).sum()
    }

    /// Position of `e` in [`EdgeWindow::edges`] order.
    pub fn edge_index(&self, e: &ShortEdge) -> Option<usize> {
        let mut base = 0;
        for o in Orientation::ALL {
            if o == e.orientation {
                let (lo, hi) = self.anchor_range(o);
                let a = e.anchor.0;
                if a[0] < lo[0] || a[0] > hi[0] || a[1] < lo[1] || a[1] > hi[1] {
                    return None;
                }
                let w = hi[1] - lo[1] + 1;
                return Some(base + ((a[0] - lo[0]) * w + (a[1] - lo[1])) as usize);
            }
            base += self.orientation_count(o);
        }
        None
    }

    /// All edges, orientation by orientation, anchors row-major.
    pub fn edges(&self) -> impl Iterator<Item = ShortEdge> + '_ {
        Orientation::ALL.into_iter().flat_map(move |o| {
            let (lo, hi) = self.anchor_range(o);
            (lo[0]..=hi[0]).flat_map(move |x| {
                (lo[1]..=hi[1]).map(move |y| ShortEdge::new(Point([x, y]), o))
            })
        })
    }
}
