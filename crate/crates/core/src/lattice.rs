//! Integer lattice geometry: boxes of side 3^l, the ternary midpoint
//! hierarchy, the four short-edge orientations and straight segments
//! between consecutive midpoints.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of Z^D.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point<const D: usize>(pub [i64; D]);

pub type Point1 = Point<1>;
pub type Point2 = Point<2>;

impl<const D: usize> Point<D> {
    pub const fn new(coords: [i64; D]) -> Self {
        Point(coords)
    }

    pub const fn origin() -> Self {
        Point([0; D])
    }

    pub fn coords(&self) -> &[i64; D] {
        &self.0
    }

    pub fn is_origin(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// Maximum norm.
    pub fn norm_max(&self) -> u64 {
        self.0.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn norm_euclid(&self) -> f64 {
        self.0
            .iter()
            .map(|&c| (c as f64) * (c as f64))
            .sum::<f64>()
            .sqrt()
    }

    pub fn norm(&self, norm: Norm) -> f64 {
        match norm {
            Norm::Max => self.norm_max() as f64,
            Norm::Euclidean => self.norm_euclid(),
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        let mut out = [0; D];
        for i in 0..D {
            out[i] = self.0[i].checked_add(other.0[i]).ok_or(Error::Overflow)?;
        }
        Ok(Point(out))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        let mut out = [0; D];
        for i in 0..D {
            out[i] = self.0[i].checked_sub(other.0[i]).ok_or(Error::Overflow)?;
        }
        Ok(Point(out))
    }

    pub fn checked_scale(&self, factor: i64) -> Result<Self> {
        let mut out = [0; D];
        for i in 0..D {
            out[i] = self.0[i].checked_mul(factor).ok_or(Error::Overflow)?;
        }
        Ok(Point(out))
    }

    pub fn neg(&self) -> Self {
        Point(self.0.map(|c| -c))
    }
}

impl<const D: usize> fmt::Display for Point<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Norm used to measure step lengths.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    #[default]
    Max,
    Euclidean,
}

impl FromStr for Norm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" | "inf" | "infinity" => Ok(Norm::Max),
            "euclidean" | "l2" => Ok(Norm::Euclidean),
            _ => Err(Error::invalid(format!("unknown norm `{s}`"))),
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Norm::Max => "max",
            Norm::Euclidean => "euclidean",
        })
    }
}

/// 3^level, or an overflow error.
pub fn pow3(level: u32) -> Result<i64> {
    3i64.checked_pow(level).ok_or(Error::Overflow)
}

/// The box V_a^N = N·a + {0,…,N−1}^D.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BoxIndex<const D: usize> {
    pub index: Point<D>,
    pub side: i64,
}

impl<const D: usize> BoxIndex<D> {
    pub fn new(index: Point<D>, side: i64) -> Result<Self> {
        if side < 1 {
            return Err(Error::invalid("box side must be positive"));
        }
        index.checked_scale(side)?;
        Ok(BoxIndex { index, side })
    }

    /// Lowest corner N·a.
    pub fn corner(&self) -> Point<D> {
        Point(self.index.0.map(|c| c * self.side))
    }

    pub fn contains(&self, x: &Point<D>) -> bool {
        x.0.iter()
            .zip(self.index.0.iter())
            .all(|(&xi, &ai)| xi.div_euclid(self.side) == ai)
    }

    pub fn len(&self) -> u64 {
        (self.side as u64).pow(D as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// All points of the box, last coordinate varying fastest.
    pub fn points(&self) -> impl Iterator<Item = Point<D>> {
        let corner = self.corner();
        let side = self.side;
        let total = self.len();
        (0..total).map(move |mut i| {
            let mut out = corner.0;
            for k in (0..D).rev() {
                out[k] += (i % side as u64) as i64;
                i /= side as u64;
            }
            Point(out)
        })
    }
}

/// The box of side 3^level containing `x`.
pub fn box_of<const D: usize>(x: &Point<D>, level: u32) -> Result<BoxIndex<D>> {
    let side = pow3(level)?;
    Ok(BoxIndex {
        index: Point(x.0.map(|c| c.div_euclid(side))),
        side,
    })
}

/// The centre m_l(x) of the box of side 3^level containing `x`.
pub fn midpoint<const D: usize>(x: &Point<D>, level: u32) -> Result<Point<D>> {
    let side = pow3(level)?;
    let half = (side - 1) / 2;
    let mut out = [0; D];
    for i in 0..D {
        let a = x.0[i].div_euclid(side);
        out[i] = a
            .checked_mul(side)
            .and_then(|v| v.checked_add(half))
            .ok_or(Error::Overflow)?;
    }
    Ok(Point(out))
}

/// Orientation of a short edge of Z².
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// ↘, offset (1,−1)
    Falling,
    /// ↗, offset (1,1)
    Rising,
    /// |, offset (0,1)
    Vertical,
    /// —, offset (1,0)
    Horizontal,
}

impl Orientation {
    pub const ALL: [Orientation; 4] = [
        Orientation::Falling,
        Orientation::Rising,
        Orientation::Vertical,
        Orientation::Horizontal,
    ];

    pub const fn offset(self) -> [i64; 2] {
        match self {
            Orientation::Falling => [1, -1],
            Orientation::Rising => [1, 1],
            Orientation::Vertical => [0, 1],
            Orientation::Horizontal => [1, 0],
        }
    }

    pub const fn index(self) -> usize {
        match self {
            Orientation::Falling => 0,
            Orientation::Rising => 1,
            Orientation::Vertical => 2,
            Orientation::Horizontal => 3,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Orientation::Falling => "↘",
            Orientation::Rising => "↗",
            Orientation::Vertical => "|",
            Orientation::Horizontal => "—",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Orientation::Falling => "falling",
            Orientation::Rising => "rising",
            Orientation::Vertical => "vertical",
            Orientation::Horizontal => "horizontal",
        }
    }

    /// Orientation and sign of a unit step `d` (each coordinate in {−1,0,1}, not both 0).
    /// The sign is +1 when `d` equals the orientation offset and −1 when it is its negation.
    pub fn of_step(d: [i64; 2]) -> Option<(Orientation, i64)> {
        Orientation::ALL.into_iter().find_map(|o| {
            let off = o.offset();
            if d == off {
                Some((o, 1))
            } else if d == [-off[0], -off[1]] {
                Some((o, -1))
            } else {
                None
            }
        })
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Orientation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "falling" | "↘" | "se" => Ok(Orientation::Falling),
            "rising" | "↗" | "ne" => Ok(Orientation::Rising),
            "vertical" | "|" | "v" => Ok(Orientation::Vertical),
            "horizontal" | "—" | "-" | "h" => Ok(Orientation::Horizontal),
            _ => Err(Error::invalid(format!("unknown orientation `{s}`"))),
        }
    }
}

/// An unordered edge {u, v} of Z^D with u ≠ v, stored with u < v.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeEdge<const D: usize> {
    u: Point<D>,
    v: Point<D>,
}

impl<const D: usize> LatticeEdge<D> {
    pub fn new(a: Point<D>, b: Point<D>) -> Result<Self> {
        if a == b {
            return Err(Error::invalid("edge endpoints must differ"));
        }
        a.checked_sub(&b)?;
        Ok(if a < b {
            LatticeEdge { u: a, v: b }
        } else {
            LatticeEdge { u: b, v: a }
        })
    }

    pub fn endpoints(&self) -> (Point<D>, Point<D>) {
        (self.u, self.v)
    }

    pub fn length_max(&self) -> u64 {
        Point(std::array::from_fn::<i64, D, _>(|i| self.u.0[i] - self.v.0[i])).norm_max()
    }

    pub fn is_short(&self) -> bool {
        self.length_max() == 1
    }
}

/// A short edge {x, x + offset(ν)} of Z², identified by its anchor x.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ShortEdge {
    pub anchor: Point2,
    pub orientation: Orientation,
}

impl ShortEdge {
    pub const fn new(anchor: Point2, orientation: Orientation) -> Self {
        ShortEdge {
            anchor,
            orientation,
        }
    }

    pub fn head(&self) -> Point2 {
        let o = self.orientation.offset();
        Point([self.anchor.0[0] + o[0], self.anchor.0[1] + o[1]])
    }

    pub fn endpoints(&self) -> (Point2, Point2) {
        (self.anchor, self.head())
    }

    /// The short edge joining `a` and `b`, if ‖a−b‖∞ = 1.
    pub fn between(a: Point2, b: Point2) -> Option<ShortEdge> {
        let d = [b.0[0] - a.0[0], b.0[1] - a.0[1]];
        let (orientation, sign) = Orientation::of_step(d)?;
        Some(ShortEdge {
            anchor: if sign > 0 { a } else { b },
            orientation,
        })
    }

    pub fn translate(&self, by: [i64; 2]) -> ShortEdge {
        ShortEdge {
            anchor: Point([self.anchor.0[0] + by[0], self.anchor.0[1] + by[1]]),
            orientation: self.orientation,
        }
    }

    pub fn to_lattice_edge(&self) -> LatticeEdge<2> {
        let (a, b) = self.endpoints();
        if a < b {
            LatticeEdge { u: a, v: b }
        } else {
            LatticeEdge { u: b, v: a }
        }
    }
}

impl TryFrom<LatticeEdge<2>> for ShortEdge {
    type Error = Error;
    fn try_from(e: LatticeEdge<2>) -> Result<Self> {
        ShortEdge::between(e.u, e.v).ok_or_else(|| Error::invalid("edge is not short"))
    }
}

impl fmt::Display for ShortEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.anchor, self.orientation.symbol())
    }
}

/// Unit direction and length of a straight segment from `p` to `q`, if the
/// difference is a multiple of one of the eight unit steps.
pub(crate) fn straight_direction(p: &Point2, q: &Point2) -> Option<([i64; 2], i64)> {
    let dx = q.0[0].checked_sub(p.0[0])?;
    let dy = q.0[1].checked_sub(p.0[1])?;
    let len = dx.unsigned_abs().max(dy.unsigned_abs()) as i64;
    if len == 0 {
        return Some(([0, 0], 0));
    }
    if (dx != 0 && dx.abs() != len) || (dy != 0 && dy.abs() != len) {
        return None;
    }
    Some(([dx.signum(), dy.signum()], len))
}

/// The straight single-orientation path from the level-`level` midpoint `p`
/// to the level-`level+1` midpoint `q`, in traversal order.
pub fn canonical_path(p: &Point2, q: &Point2, level: u32) -> Result<Vec<ShortEdge>> {
    let side = pow3(level)?;
    let reject = || Error::NotCanonical {
        from: p.0.to_vec(),
        to: q.0.to_vec(),
        level,
    };
    let (dir, len) = straight_direction(p, q).ok_or_else(reject)?;
    if len == 0 {
        return Ok(Vec::new());
    }
    if len != side {
        return Err(reject());
    }
    let mut out = Vec::with_capacity(len as usize);
    let mut cur = *p;
    for _ in 0..len {
        let next = Point([cur.0[0] + dir[0], cur.0[1] + dir[1]]);
        out.push(ShortEdge::between(cur, next).expect("unit step"));
        cur = next;
    }
    Ok(out)
}

/// E_ν(V_a^N): the N² edges of orientation ν anchored in the box.
pub fn orientation_edges(b: &BoxIndex<2>, orientation: Orientation) -> Vec<ShortEdge> {
    b.points()
        .map(|anchor| ShortEdge {
            anchor,
            orientation,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_of_examples() {
        assert_eq!(box_of(&Point([0, 0]), 1).unwrap().index, Point([0, 0]));
        assert_eq!(box_of(&Point([5, 3]), 1).unwrap().index, Point([1, 1]));
        assert_eq!(box_of(&Point([-1, -1]), 2).unwrap().index, Point([-1, -1]));
    }

    #[test]
    fn midpoint_examples() {
        assert_eq!(midpoint(&Point([7, 2]), 0).unwrap(), Point([7, 2]));
        assert_eq!(midpoint(&Point([5, 3]), 1).unwrap(), Point([4, 4]));
        assert_eq!(midpoint(&Point([0, 0]), 2).unwrap(), Point([4, 4]));
        assert_eq!(midpoint(&Point([-1, -5]), 1).unwrap(), Point([-2, -5]));
    }

    #[test]
    fn midpoint_overflow_is_reported() {
        assert!(matches!(
            midpoint(&Point([i64::MAX, 0]), 39),
            Err(Error::Overflow)
        ));
        assert!(matches!(pow3(40), Err(Error::Overflow)));
    }

    #[test]
    fn canonical_path_examples() {
        let p = Point([4, 4]);
        assert!(canonical_path(&p, &p, 3).unwrap().is_empty());

        let path = canonical_path(&Point([1, 1]), &Point([4, 4]), 1).unwrap();
        assert_eq!(path.len(), 3);
        assert!(path.iter().all(|e| e.orientation == Orientation::Rising));
        assert_eq!(path[0].anchor, Point([1, 1]));

        let path = canonical_path(&Point([4, 4]), &Point([4, 1]), 1).unwrap();
        assert_eq!(path.len(), 3);
        assert!(path.iter().all(|e| e.orientation == Orientation::Vertical));
        assert_eq!(path[0].anchor, Point([4, 3]));
    }

    #[test]
    fn canonical_path_rejects_bad_pairs() {
        assert!(canonical_path(&Point([0, 0]), &Point([2, 2]), 1).is_err());
        assert!(canonical_path(&Point([0, 0]), &Point([3, 1]), 1).is_err());
        assert!(canonical_path(&Point([0, 0]), &Point([3, 3]), 2).is_err());
    }

    #[test]
    fn orientation_edges_examples() {
        let b = BoxIndex::new(Point([0, 0]), 1).unwrap();
        let e = orientation_edges(&b, Orientation::Horizontal);
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].endpoints(), (Point([0, 0]), Point([1, 0])));

        let b = BoxIndex::new(Point([0, 0]), 3).unwrap();
        let e = orientation_edges(&b, Orientation::Vertical);
        assert_eq!(e.len(), 9);
        assert!(e
            .iter()
            .all(|e| e.head().0[1] - e.anchor.0[1] == 1 && e.head().0[0] == e.anchor.0[0]));
    }

    #[test]
    fn orientation_edge_sets_of_distinct_boxes_are_disjoint() {
        use std::collections::HashSet;
        for o in Orientation::ALL {
            let mut seen = HashSet::new();
            for a in -2..=2 {
                for b in -2..=2 {
                    let bx = BoxIndex::new(Point([a, b]), 3).unwrap();
                    for e in orientation_edges(&bx, o) {
                        assert!(seen.insert(e));
                    }
                }
            }
        }
    }

    #[test]
    fn every_short_edge_has_one_orientation() {
        let a = Point([3, -2]);
        let mut found = 0;
        for dx in -1..=1 {
            for dy in -1..=1 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let b = Point([3 + dx, -2 + dy]);
                let e = ShortEdge::between(a, b).unwrap();
                let back = ShortEdge::between(b, a).unwrap();
                assert_eq!(e, back);
                let (u, v) = e.endpoints();
                assert!((u == a && v == b) || (u == b && v == a));
                found += 1;
            }
        }
        assert_eq!(found, 8);
        assert!(ShortEdge::between(a, Point([5, -2])).is_none());
    }

    #[test]
    fn lattice_edge_is_unordered() {
        let e = LatticeEdge::new(Point([2, 0]), Point([0, 1])).unwrap();
        let f = LatticeEdge::new(Point([0, 1]), Point([2, 0])).unwrap();
        assert_eq!(e, f);
        assert_eq!(e.length_max(), 2);
        assert!(!e.is_short());
        assert!(LatticeEdge::new(Point([1, 1]), Point([1, 1])).is_err());
    }

    #[test]
    fn box_points_enumerates_side_squared() {
        let b = BoxIndex::new(Point([-1, 2]), 3).unwrap();
        let pts: Vec<_> = b.points().collect();
        assert_eq!(pts.len(), 9);
        assert!(pts.iter().all(|p| b.contains(p)));
        assert_eq!(pts[0], Point([-3, 6]));
    }
}
