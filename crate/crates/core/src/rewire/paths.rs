//! The level-k paths γ^k_{x,y} and the short L-paths γ′_{x,y}.

use crate::error::{Error, Result};
use crate::lattice::{box_of, canonical_path, midpoint, pow3, Point, Point2, ShortEdge};

/// Box-index distances for which γ^k_{x,y} exists.
pub const BOX_GAP: std::ops::RangeInclusive<u64> = 2..=7;

/// ∞-distances for which γ′_{x,y} exists.
pub const SHORT_GAP: std::ops::RangeInclusive<u64> = 2..=8;

/// Number of box indices b with ‖a − b‖∞ ∈ [`BOX_GAP`] for a fixed a.
pub const PARTNER_BOXES: u64 = 15 * 15 - 3 * 3;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaPath {
    pub from: Point2,
    pub to: Point2,
    pub level: u32,
    /// Edges in traversal order; an edge may appear more than once.
    pub edges: Vec<ShortEdge>,
}

impl GammaPath {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Each distinct edge once, sorted.
    pub fn distinct_edges(&self) -> Vec<ShortEdge> {
        let mut out = self.edges.clone();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn traversals(&self, e: &ShortEdge) -> usize {
        self.edges.iter().filter(|f| *f == e).count()
    }

    /// Vertices visited, starting at `from`.
    pub fn vertices(&self) -> Vec<Point2> {
        let mut out = Vec::with_capacity(self.edges.len() + 1);
        let mut here = self.from;
        out.push(here);
        for e in &self.edges {
            let (p, q) = e.endpoints();
            here = if p == here { q } else { p };
            out.push(here);
        }
        out
    }
}

/// The ascent x = m_0(x) → m_1(x) → … → m_k(x) along canonical paths.
pub fn ascent(x: &Point2, k: u32) -> Result<Vec<ShortEdge>> {
    let mut out = Vec::new();
    let mut here = *x;
    for l in 0..k {
        let next = midpoint(x, l + 1)?;
        out.extend(canonical_path(&here, &next, l)?);
        here = next;
    }
    Ok(out)
}

/// Box-steps of the inter-midpoint route for the index difference `delta`:
/// min(|Δ₁|, |Δ₂|) diagonal steps, then axis steps.
pub fn route_box_steps(delta: [i64; 2]) -> Vec<[i64; 2]> {
    let diag = delta[0].abs().min(delta[1].abs());
    let dd = [delta[0].signum(), delta[1].signum()];
    let rest = [delta[0] - diag * dd[0], delta[1] - diag * dd[1]];
    let axis = rest[0].abs().max(rest[1].abs());
    let da = [rest[0].signum(), rest[1].signum()];
    let mut out = vec![dd; diag as usize];
    out.extend(std::iter::repeat_n(da, axis as usize));
    out
}

/// The legs of the route as (start offset in boxes, unit direction, box-steps).
pub(crate) fn route_legs(delta: [i64; 2]) -> impl Iterator<Item = ([i64; 2], [i64; 2], i64)> {
    let diag = delta[0].abs().min(delta[1].abs());
    let dd = [delta[0].signum(), delta[1].signum()];
    let rest = [delta[0] - diag * dd[0], delta[1] - diag * dd[1]];
    let axis = rest[0].abs().max(rest[1].abs());
    let da = [rest[0].signum(), rest[1].signum()];
    [([0, 0], dd, diag), ([diag * dd[0], diag * dd[1]], da, axis)]
        .into_iter()
        .filter(|leg| leg.2 > 0)
}

/// The route from the level-k midpoint `start` across the index difference `delta`.
pub fn route(start: &Point2, delta: [i64; 2], k: u32) -> Result<Vec<ShortEdge>> {
    let side = pow3(k)?;
    let mut out = Vec::new();
    let mut here = start.0;
    for step in route_box_steps(delta) {
        for _ in 0..side {
            let next = [here[0] + step[0], here[1] + step[1]];
            out.push(ShortEdge::between(Point(here), Point(next)).expect("unit step"));
            here = next;
        }
    }
    Ok(out)
}

/// γ^k_{x,y}, or `None` when the boxes of x and y are not at ∞-distance 2..=7.
/// Level 0 is rejected.
pub fn gamma_path(x: &Point2, y: &Point2, k: u32) -> Result<Option<GammaPath>> {
    if k == 0 {
        return Err(Error::invalid("level must be at least 1"));
    }
    let a = box_of(x, k)?.index;
    let b = box_of(y, k)?.index;
    let delta = [b.0[0] - a.0[0], b.0[1] - a.0[1]];
    let gap = delta[0].unsigned_abs().max(delta[1].unsigned_abs());
    if !BOX_GAP.contains(&gap) {
        return Ok(None);
    }
    let mut edges = ascent(x, k)?;
    edges.extend(route(&midpoint(x, k)?, delta, k)?);
    let mut down = ascent(y, k)?;
    down.reverse();
    edges.extend(down);
    Ok(Some(GammaPath {
        from: *x,
        to: *y,
        level: k,
        edges,
    }))
}

/// γ′_{x,y}: vertical leg to (x₁, y₂), then horizontal leg to y. Exists for
/// 2 ≤ ‖x − y‖∞ ≤ 8.
pub fn gamma_prime(x: &Point2, y: &Point2) -> Option<Vec<ShortEdge>> {
    let gap = (x.0[0] - y.0[0]).unsigned_abs().max((x.0[1] - y.0[1]).unsigned_abs());
    if !SHORT_GAP.contains(&gap) {
        return None;
    }
    let mut out = Vec::with_capacity(16);
    let mut here = x.0;
    let mut walk = |axis: usize, target: i64, out: &mut Vec<ShortEdge>| {
        while here[axis] != target {
            let mut next = here;
            next[axis] += (target - here[axis]).signum();
            out.push(ShortEdge::between(Point(here), Point(next)).expect("unit step"));
            here = next;
        }
    };
    walk(1, y.0[1], &mut out);
    walk(0, y.0[0], &mut out);
    Some(out)
}
