//! Edge loads N_e^k: how many ordered pairs route γ^k through an edge.
//!
//! Two independent evaluations: brute-force enumeration of every relevant
//! path, and a closed form that splits a path into ascent, route and descent
//! and counts each part by lattice arithmetic.

use std::sync::OnceLock;

use super::paths::{gamma_path, route, route_legs, GammaPath, BOX_GAP, PARTNER_BOXES};
use crate::error::{Error, Result};
use crate::lattice::{pow3, Orientation, Point, Point2, ShortEdge};

/// How repeated traversals of an edge by one path are counted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LoadSemantics {
    /// Each ordered pair counts once (set membership).
    PerPair,
    /// Each traversal counts.
    PerTraversal,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct LoadCounts {
    pub per_pair: u128,
    pub per_traversal: u128,
}

impl LoadCounts {
    pub fn get(&self, semantics: LoadSemantics) -> u128 {
        match semantics {
            LoadSemantics::PerPair => self.per_pair,
            LoadSemantics::PerTraversal => self.per_traversal,
        }
    }
}

/// N_e^k for the 4·9^k edges anchored in one box of side 3^k. Loads are
/// 3^k-periodic, so one box determines them everywhere.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeLoadTable {
    level: u32,
    side: i64,
    corner: [i64; 2],
    counts: Vec<LoadCounts>,
}

impl EdgeLoadTable {
    fn empty(level: u32, corner: [i64; 2]) -> Result<Self> {
        let side = pow3(level)?;
        Ok(EdgeLoadTable {
            level,
            side,
            corner,
            counts: vec![LoadCounts::default(); 4 * (side * side) as usize],
        })
    }

    fn slot(&self, o: Orientation, offset: [i64; 2]) -> usize {
        o.index() * (self.side * self.side) as usize + (offset[0] * self.side + offset[1]) as usize
    }

    fn local_slot(&self, e: &ShortEdge) -> Option<usize> {
        let d = [e.anchor.0[0] - self.corner[0], e.anchor.0[1] - self.corner[1]];
        ((0..self.side).contains(&d[0]) && (0..self.side).contains(&d[1]))
            .then(|| self.slot(e.orientation, d))
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn side(&self) -> i64 {
        self.side
    }

    /// Lowest anchor of the tabulated box.
    pub fn corner(&self) -> [i64; 2] {
        self.corner
    }

    /// Load of any edge, using periodicity.
    pub fn get(&self, e: &ShortEdge) -> LoadCounts {
        let d = [
            (e.anchor.0[0] - self.corner[0]).rem_euclid(self.side),
            (e.anchor.0[1] - self.corner[1]).rem_euclid(self.side),
        ];
        self.counts[self.slot(e.orientation, d)]
    }

    /// Tabulated edges with their loads.
    pub fn entries(&self) -> impl Iterator<Item = (ShortEdge, LoadCounts)> + '_ {
        Orientation::ALL.into_iter().flat_map(move |o| {
            (0..self.side).flat_map(move |i| {
                (0..self.side).map(move |j| {
                    let e = ShortEdge::new(Point([self.corner[0] + i, self.corner[1] + j]), o);
                    (e, self.counts[self.slot(o, [i, j])])
                })
            })
        })
    }

    pub fn loads(&self, o: Orientation, semantics: LoadSemantics) -> impl Iterator<Item = u128> + '_ {
        self.entries()
            .filter(move |(e, _)| e.orientation == o)
            .map(move |(_, c)| c.get(semantics))
    }

    /// X^{k,ν}_{≥r}: tabulated edges of orientation ν with load at least r.
    pub fn count_at_least(&self, o: Orientation, r: u128, semantics: LoadSemantics) -> u64 {
        self.loads(o, semantics).filter(|&n| n >= r).count() as u64
    }

    pub fn max_load(&self, o: Orientation, semantics: LoadSemantics) -> u128 {
        self.loads(o, semantics).max().unwrap_or(0)
    }

    /// Edges on which some path passes more than once.
    pub fn discrepancies(&self) -> Vec<(ShortEdge, LoadCounts)> {
        self.entries()
            .filter(|(_, c)| c.per_pair != c.per_traversal)
            .collect()
    }
}

fn box_range(lo: i64, hi: i64, side: i64) -> (i64, i64) {
    (lo.div_euclid(side), hi.div_euclid(side))
}

/// Calls `visit` on every γ^k path that may touch a vertex of the rectangle
/// [lo, hi], with box indices at most `reach` boxes from it. A path only
/// leaves its two end boxes along the route, so pairs whose boxes and route
/// both miss the rectangle are skipped.
fn for_each_nearby_path(
    k: u32,
    lo: [i64; 2],
    hi: [i64; 2],
    reach: i64,
    mut visit: impl FnMut(&GammaPath),
) -> Result<()> {
    let side = pow3(k)?;
    let bx = box_range(lo[0], hi[0], side);
    let by = box_range(lo[1], hi[1], side);
    let in_rect = |p: &Point2| (0..2).all(|i| lo[i] <= p.0[i] && p.0[i] <= hi[i]);
    let box_hits = |a: [i64; 2]| {
        (0..2).all(|i| a[i] * side <= hi[i] && lo[i] <= a[i] * side + side - 1)
    };
    let half = (side - 1) / 2;
    for a0 in bx.0 - reach..=bx.1 + reach {
        for a1 in by.0 - reach..=by.1 + reach {
            let a = [a0, a1];
            for b0 in (a0 - 7).max(bx.0 - reach)..=(a0 + 7).min(bx.1 + reach) {
                for b1 in (a1 - 7).max(by.0 - reach)..=(a1 + 7).min(by.1 + reach) {
                    let delta = [b0 - a0, b1 - a1];
                    let gap = delta[0].unsigned_abs().max(delta[1].unsigned_abs());
                    if !BOX_GAP.contains(&gap) {
                        continue;
                    }
                    let relevant = box_hits(a)
                        || box_hits([b0, b1])
                        || route(&Point([a0 * side + half, a1 * side + half]), delta, k)?
                            .iter()
                            .any(|e| in_rect(&e.anchor) || in_rect(&e.head()));
                    if !relevant {
                        continue;
                    }
                    for x0 in a0 * side..(a0 + 1) * side {
                        for x1 in a1 * side..(a1 + 1) * side {
                            for y0 in b0 * side..(b0 + 1) * side {
                                for y1 in b1 * side..(b1 + 1) * side {
                                    let path = gamma_path(&Point([x0, x1]), &Point([y0, y1]), k)?
                                        .expect("box gap checked");
                                    visit(&path);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

/// Exact N_e^k on E_ν(V_0^{3^k}) by enumerating every pair with both box
/// indices within `window_boxes` of the origin box (at least 7).
pub fn edge_loads(k: u32, window_boxes: u32) -> Result<EdgeLoadTable> {
    edge_loads_from(k, [0, 0], window_boxes)
}

/// Like [`edge_loads`] for the box of side 3^k with lowest anchor `corner`.
pub fn edge_loads_from(k: u32, corner: [i64; 2], window_boxes: u32) -> Result<EdgeLoadTable> {
    if k == 0 {
        return Err(Error::invalid("level must be at least 1"));
    }
    if window_boxes < 7 {
        return Err(Error::WindowTooSmall(format!(
            "enumeration needs box indices up to 7 boxes around the target, got {window_boxes}"
        )));
    }
    let mut table = EdgeLoadTable::empty(k, corner)?;
    let side = table.side;
    let lo = [corner[0] - 1, corner[1] - 1];
    let hi = [corner[0] + side, corner[1] + side];
    let mut stamp = vec![u64::MAX; table.counts.len()];
    let mut pair = 0u64;
    for_each_nearby_path(k, lo, hi, window_boxes as i64, |path| {
        for e in &path.edges {
            if let Some(s) = table.local_slot(e) {
                table.counts[s].per_traversal += 1;
                if stamp[s] != pair {
                    stamp[s] = pair;
                    table.counts[s].per_pair += 1;
                }
            }
        }
        pair += 1;
    })?;
    Ok(table)
}

/// Multiplicity of `e` in every γ^k path touching the rectangle, for callers
/// that accumulate shifted paths directly.
pub(crate) fn accumulate_traversals(
    k: u32,
    lo: [i64; 2],
    hi: [i64; 2],
    mut visit: impl FnMut(&ShortEdge),
) -> Result<()> {
    for_each_nearby_path(k, lo, hi, 7, |path| path.edges.iter().for_each(&mut visit))
}

// ---- closed form ----

#[derive(Clone, Copy)]
struct Leg {
    offset: [i64; 2],
    dir: [i64; 2],
    steps: i64,
}

/// (Δ, legs of the route for Δ) for the 216 admissible index differences.
fn partner_routes() -> &'static [([i64; 2], Vec<Leg>)] {
    static ROUTES: OnceLock<Vec<([i64; 2], Vec<Leg>)>> = OnceLock::new();
    ROUTES.get_or_init(|| {
        let mut out = Vec::with_capacity(PARTNER_BOXES as usize);
        for d0 in -7i64..=7 {
            for d1 in -7i64..=7 {
                if d0.abs().max(d1.abs()) < 2 {
                    continue;
                }
                let legs = route_legs([d0, d1])
                    .map(|(offset, dir, steps)| Leg { offset, dir, steps })
                    .collect();
                out.push(([d0, d1], legs));
            }
        }
        out
    })
}

/// Where a unit step along `dir` over `e` starts, if `e` is parallel to `dir`.
fn start_along(e: &ShortEdge, dir: [i64; 2]) -> Option<[i64; 2]> {
    let off = e.orientation.offset();
    if dir == off {
        Some(e.anchor.0)
    } else if dir == [-off[0], -off[1]] {
        Some(e.head().0)
    } else {
        None
    }
}

/// t with p − origin = t·dir, if p lies on that line.
fn ray_parameter(p: [i64; 2], origin: [i64; 2], dir: [i64; 2]) -> Option<i64> {
    let d = [p[0] - origin[0], p[1] - origin[1]];
    match (dir[0], dir[1]) {
        (0, s) => (d[0] == 0).then_some(d[1] * s),
        (s, 0) => (d[1] == 0).then_some(d[0] * s),
        (s, r) => (d[0] * s == d[1] * r).then_some(d[0] * s),
    }
}

fn mid(x: [i64; 2], side: i64) -> [i64; 2] {
    let h = (side - 1) / 2;
    [x[0].div_euclid(side) * side + h, x[1].div_euclid(side) * side + h]
}

fn box_index(x: [i64; 2], side: i64) -> [i64; 2] {
    [x[0].div_euclid(side), x[1].div_euclid(side)]
}

/// (α, Σ_l |X_l|): points whose ascent uses `e`, once and with multiplicity.
fn ascent_usage(e: &ShortEdge, k: u32) -> (u128, u128) {
    let (p, q) = (e.anchor.0, e.head().0);
    let side_k = 3i64.pow(k);
    if box_index(p, side_k) != box_index(q, side_k) {
        return (0, 0);
    }
    let u = e.orientation.offset();
    // (level l, centre of the level-l box whose points use e at level l)
    let mut used: Vec<(u32, [i64; 2])> = Vec::new();
    let mut with_multiplicity = 0u128;
    for l in 0..k {
        let len = 3i64.pow(l);
        let m = mid(p, 3 * len);
        if mid(q, 3 * len) != m {
            continue;
        }
        for dir in [u, [-u[0], -u[1]]] {
            let on = |x: [i64; 2]| ray_parameter(x, m, dir).is_some_and(|t| (0..=len).contains(&t));
            if on(p) && on(q) {
                used.push((l, [m[0] + len * dir[0], m[1] + len * dir[1]]));
                with_multiplicity += 9u128.pow(l);
                break;
            }
        }
    }
    // the level-l boxes are nested or disjoint; count the maximal ones
    let alpha = used
        .iter()
        .filter(|(l, c)| {
            !used.iter().any(|(l2, c2)| {
                let s = 3i64.pow(*l2);
                l2 > l && box_index(*c, s) == box_index(*c2, s)
            })
        })
        .map(|(l, _)| 9u128.pow(*l))
        .sum();
    (alpha, with_multiplicity)
}

/// Ordered box pairs (a, a + Δ) whose route uses `e`.
fn route_usage(e: &ShortEdge, side: i64) -> u128 {
    let h = (side - 1) / 2;
    let mut total = 0u128;
    for (_, legs) in partner_routes() {
        for leg in legs {
            let Some(s) = start_along(e, leg.dir) else {
                continue;
            };
            // the leg starts on a midpoint; solve t·dir ≡ s − h (mod side)
            let v = [s[0] - h, s[1] - h];
            let consistent = match (leg.dir[0], leg.dir[1]) {
                (0, _) => v[0].rem_euclid(side) == 0,
                (_, 0) => v[1].rem_euclid(side) == 0,
                (a, b) => (a * v[0] - b * v[1]).rem_euclid(side) == 0,
            };
            if consistent {
                total += leg.steps as u128;
            }
        }
    }
    total
}

/// Routes starting (or ending) in the box with index `home` that use `e`.
fn anchored_route_usage(e: &ShortEdge, side: i64, home: [i64; 2], outgoing: bool) -> u128 {
    let h = (side - 1) / 2;
    let mut total = 0u128;
    for (delta, legs) in partner_routes() {
        let a = if outgoing {
            home
        } else {
            [home[0] - delta[0], home[1] - delta[1]]
        };
        for leg in legs {
            let Some(s) = start_along(e, leg.dir) else {
                continue;
            };
            let origin = [
                (a[0] + leg.offset[0]) * side + h,
                (a[1] + leg.offset[1]) * side + h,
            ];
            if ray_parameter(s, origin, leg.dir).is_some_and(|t| (0..leg.steps * side).contains(&t)) {
                total += 1;
            }
        }
    }
    total
}

/// N_e^k in closed form. With α points whose ascent uses e, ρ box pairs
/// whose route uses it, and ρ_out/ρ_in of those routes leaving/entering e's
/// own box (n = 9^k points per box, 216 partner boxes):
///
/// per pair = 2·216·n·α + n²·ρ − n·α·(ρ_out + ρ_in)
/// per traversal = 2·216·n·Σ_l |X_l| + n²·ρ
pub fn structured_load(e: &ShortEdge, k: u32) -> Result<LoadCounts> {
    if k == 0 {
        return Err(Error::invalid("level must be at least 1"));
    }
    if k > 30 {
        return Err(Error::Overflow);
    }
    let side = pow3(k)?;
    let n = 9u128.pow(k);
    let (alpha, stacked) = ascent_usage(e, k);
    let rho = route_usage(e, side);
    let partners = PARTNER_BOXES as u128;
    let mut per_pair = 2 * partners * n * alpha + n * n * rho;
    if alpha > 0 {
        let home = box_index(e.anchor.0, side);
        let both = anchored_route_usage(e, side, home, true) + anchored_route_usage(e, side, home, false);
        per_pair -= n * alpha * both;
    }
    Ok(LoadCounts {
        per_pair,
        per_traversal: 2 * partners * n * stacked + n * n * rho,
    })
}

/// Closed-form table for the box V_0^{3^k}, k ≤ 7.
pub fn structured_loads(k: u32) -> Result<EdgeLoadTable> {
    if !(1..=7).contains(&k) {
        return Err(Error::invalid(format!("tabulated level {k} outside 1..=7")));
    }
    let mut table = EdgeLoadTable::empty(k, [0, 0])?;
    for o in Orientation::ALL {
        for i in 0..table.side {
            for j in 0..table.side {
                let s = table.slot(o, [i, j]);
                table.counts[s] = structured_load(&ShortEdge::new(Point([i, j]), o), k)?;
            }
        }
    }
    Ok(table)
}

/// N^k_{e+r} for every shift r ∈ {0,…,3^k−1}², row-major in r.
pub fn uk_loads_over_shifts(e: &ShortEdge, k: u32) -> Result<Vec<LoadCounts>> {
    let side = pow3(k)?;
    let mut out = Vec::with_capacity((side * side) as usize);
    for r0 in 0..side {
        for r1 in 0..side {
            out.push(structured_load(&e.translate([r0, r1]), k)?);
        }
    }
    Ok(out)
}

/// One histogram inequality: `count` edges reach `threshold`, at most `bound` may.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LoadBoundCheck {
    pub orientation: Orientation,
    /// The scale index l, or `None` for the absolute cap.
    pub scale: Option<u32>,
    pub threshold: u128,
    pub count: u64,
    pub bound: u64,
}

impl LoadBoundCheck {
    pub fn holds(&self) -> bool {
        self.count <= self.bound
    }
}

/// X^{k,ν}_{≥50·3^{2k+2l}} ≤ 3^{2k−l+1} for l < k, and X^{k,ν}_{≥2^17·3^{4k}} = 0.
pub fn load_bound_checks(table: &EdgeLoadTable, semantics: LoadSemantics) -> Vec<LoadBoundCheck> {
    let k = table.level;
    let mut out = Vec::new();
    for o in Orientation::ALL {
        for l in 0..k {
            let threshold = 50 * 3u128.pow(2 * k + 2 * l);
            out.push(LoadBoundCheck {
                orientation: o,
                scale: Some(l),
                threshold,
                count: table.count_at_least(o, threshold, semantics),
                bound: 3u64.pow(2 * k - l + 1),
            });
        }
        let cap = (1u128 << 17) * 3u128.pow(4 * k);
        out.push(LoadBoundCheck {
            orientation: o,
            scale: None,
            threshold: cap,
            count: table.count_at_least(o, cap, semantics),
            bound: 0,
        });
    }
    out
}

/// Over all 9^k shifts: P(U_k(e) ≥ 500·3^{2l−k}) ≤ 3^{1−l}, compared exactly as
/// `hits`·3^l ≤ 3·9^k (the threshold is N ≥ 50·3^{2k+2l} in load units).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShiftTailCheck {
    pub orientation: Orientation,
    pub scale: u32,
    pub hits: u64,
    pub shifts: u64,
    /// Largest load seen, for the deterministic cap N ≤ 2^17·3^{4k}.
    pub max_load: u128,
    pub level: u32,
}

impl ShiftTailCheck {
    pub fn probability(&self) -> f64 {
        self.hits as f64 / self.shifts as f64
    }

    pub fn bound(&self) -> f64 {
        3f64.powi(1 - self.scale as i32)
    }

    pub fn holds(&self) -> bool {
        let cap = (1u128 << 17) * 3u128.pow(4 * self.level);
        (self.hits as u128) * 3u128.pow(self.scale) <= 3 * self.shifts as u128 && self.max_load <= cap
    }
}

/// Tail checks for the edge of each orientation anchored at `anchor`.
pub fn shift_tail_checks(
    anchor: Point2,
    k: u32,
    semantics: LoadSemantics,
) -> Result<Vec<ShiftTailCheck>> {
    let mut out = Vec::new();
    for o in Orientation::ALL {
        let loads: Vec<u128> = uk_loads_over_shifts(&ShortEdge::new(anchor, o), k)?
            .iter()
            .map(|c| c.get(semantics))
            .collect();
        let max_load = loads.iter().copied().max().unwrap_or(0);
        for l in 0..k {
            let threshold = 50 * 3u128.pow(2 * k + 2 * l);
            out.push(ShiftTailCheck {
                orientation: o,
                scale: l,
                hits: loads.iter().filter(|&&n| n >= threshold).count() as u64,
                shifts: loads.len() as u64,
                max_load,
                level: k,
            });
        }
    }
    Ok(out)
}
