//! Weight fields on the short edges of a window: W from the L-paths, U_k from
//! the shifted level-k paths, and their sum U.

use std::collections::HashMap;
use std::sync::OnceLock;

use rand::Rng;

use super::loads::{accumulate_traversals, structured_load};
use super::paths::{gamma_prime, SHORT_GAP};
use super::EdgeWindow;
use crate::error::{Error, Result};
use crate::lattice::{pow3, Orientation, Point, ShortEdge};
use crate::network::{NetworkDocument, WeightedNetwork};

/// Weight added to each edge of γ′_{x,y}.
pub const SHORT_INCREMENT: f64 = 16.0;

/// 10·3^{−3k}, the weight a level-k path adds to each traversed edge.
pub fn uk_unit(k: u32) -> f64 {
    10.0 / 27f64.powi(k as i32)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    W,
    Uk { level: u32, shift: [i64; 2] },
    /// W + Σ_{k ≤ shifts.len()} U_k.
    Combined { shifts: Vec<[i64; 2]> },
}

/// Shifts r_1, …, r_{k_max} with r_k ∈ {0,…,3^k−1}².
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftVector(Vec<[i64; 2]>);

impl ShiftVector {
    pub fn new(shifts: Vec<[i64; 2]>) -> Result<Self> {
        if shifts.is_empty() {
            return Err(Error::invalid("at least one level is needed"));
        }
        for (i, r) in shifts.iter().enumerate() {
            check_shift(i as u32 + 1, *r)?;
        }
        Ok(ShiftVector(shifts))
    }

    pub fn random<R: Rng + ?Sized>(k_max: u32, rng: &mut R) -> Result<Self> {
        let shifts = (1..=k_max).map(|k| draw_shift(k, rng)).collect::<Result<_>>()?;
        ShiftVector::new(shifts)
    }

    pub fn levels(&self) -> u32 {
        self.0.len() as u32
    }

    /// r_k for 1 ≤ k ≤ levels.
    pub fn level(&self, k: u32) -> [i64; 2] {
        self.0[k as usize - 1]
    }

    pub fn as_slice(&self) -> &[[i64; 2]] {
        &self.0
    }
}

fn check_shift(k: u32, r: [i64; 2]) -> Result<()> {
    let side = pow3(k)?;
    if r.iter().any(|c| !(0..side).contains(c)) {
        return Err(Error::invalid(format!("shift {r:?} outside {{0,…,{}}}² at level {k}", side - 1)));
    }
    Ok(())
}

/// Uniform r_k ∈ {0,…,3^k−1}².
pub fn draw_shift<R: Rng + ?Sized>(k: u32, rng: &mut R) -> Result<[i64; 2]> {
    let side = pow3(k)?;
    Ok([rng.random_range(0..side), rng.random_range(0..side)])
}

/// Nonnegative weights on the edges of a window, in [`EdgeWindow::edges`] order.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightField {
    window: EdgeWindow,
    values: Vec<f64>,
    provenance: Provenance,
}

impl WeightField {
    pub fn window(&self) -> &EdgeWindow {
        &self.window
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, e: &ShortEdge) -> Option<f64> {
        self.window.edge_index(e).map(|i| self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (ShortEdge, f64)> + '_ {
        self.window.edges().zip(self.values.iter().copied())
    }

    /// Vertices of the window (with positions) joined by every window edge.
    pub fn to_network(&self) -> WeightedNetwork {
        let w = &self.window;
        let mut net = WeightedNetwork::new(w.vertex_count());
        for (e, c) in self.iter() {
            let u = w.vertex_index(&e.anchor).expect("edge in window");
            let v = w.vertex_index(&e.head()).expect("edge in window");
            net.add_edge(u, v, c).expect("nonnegative weight");
        }
        net.set_positions(2, w.vertices().map(|p| p.0.to_vec()).collect())
            .expect("one position per vertex");
        net
    }

    /// Network text form with the window and shifts in the header.
    pub fn to_document(&self) -> NetworkDocument {
        let (lo, hi) = (self.window.lo(), self.window.hi());
        let mut doc = NetworkDocument::new(self.to_network())
            .with_meta("window", format!("{},{},{},{}", lo[0], lo[1], hi[0], hi[1]));
        match &self.provenance {
            Provenance::W => doc = doc.with_meta("field", "W"),
            Provenance::Uk { level, shift } => {
                doc = doc
                    .with_meta("field", "U_k")
                    .with_meta("level", level)
                    .with_meta(format!("shift_{level}"), format!("{},{}", shift[0], shift[1]));
            }
            Provenance::Combined { shifts } => {
                doc = doc.with_meta("field", "U").with_meta("k_max", shifts.len());
                for (i, r) in shifts.iter().enumerate() {
                    doc = doc.with_meta(format!("shift_{}", i + 1), format!("{},{}", r[0], r[1]));
                }
            }
        }
        doc
    }

    pub fn from_document(doc: &NetworkDocument) -> Result<Self> {
        let ints = |key: &str| -> Result<Vec<i64>> {
            let text = doc
                .meta(key)
                .ok_or_else(|| Error::parse(0, format!("missing header `{key}`")))?;
            text.split(',')
                .map(|t| t.trim().parse().map_err(|_| Error::parse(0, format!("bad header `{key}`"))))
                .collect()
        };
        let pair = |key: &str| -> Result<[i64; 2]> {
            let v = ints(key)?;
            <[i64; 2]>::try_from(v).map_err(|_| Error::parse(0, format!("header `{key}` needs two values")))
        };
        let bounds = ints("window")?;
        if bounds.len() != 4 {
            return Err(Error::parse(0, "window header needs four values"));
        }
        let window = EdgeWindow::new([bounds[0], bounds[1]], [bounds[2], bounds[3]])?;
        let provenance = match doc.meta("field") {
            Some("W") => Provenance::W,
            Some("U_k") => {
                let level = ints("level")?
                    .first()
                    .copied()
                    .ok_or_else(|| Error::parse(0, "empty level header"))? as u32;
                let shift = pair(&format!("shift_{level}"))?;
                check_shift(level, shift)?;
                Provenance::Uk { level, shift }
            }
            Some("U") => {
                let k_max = ints("k_max")?.first().copied().unwrap_or(0);
                let shifts = (1..=k_max)
                    .map(|k| pair(&format!("shift_{k}")))
                    .collect::<Result<Vec<_>>>()?;
                ShiftVector::new(shifts.clone())?;
                Provenance::Combined { shifts }
            }
            other => return Err(Error::parse(0, format!("unknown field kind {other:?}"))),
        };
        let net = &doc.network;
        if net.vertex_count() != window.vertex_count() {
            return Err(Error::parse(0, "vertex count does not match the window"));
        }
        let mut values = vec![f64::NAN; window.edge_count()];
        for edge in net.edges() {
            let e = ShortEdge::between(window.vertex(edge.u), window.vertex(edge.v))
                .and_then(|e| window.edge_index(&e))
                .ok_or_else(|| Error::parse(0, format!("({}, {}) is not a window edge", edge.u, edge.v)))?;
            values[e] = edge.conductance;
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::parse(0, "some window edges carry no weight"));
        }
        Ok(WeightField {
            window,
            values,
            provenance,
        })
    }
}

/// W: 16 for every pair 2 ≤ ‖x − y‖∞ ≤ 8 whose L-path uses the edge.
pub fn build_w(window: &EdgeWindow) -> WeightField {
    let reach = *SHORT_GAP.end() as i64;
    let outer = window.grow(reach).expect("growing never empties");
    let mut values = vec![0.0; window.edge_count()];
    for x in outer.vertices() {
        for d0 in -reach..=reach {
            for d1 in -reach..=reach {
                let y = Point([x.0[0] + d0, x.0[1] + d1]);
                let Some(path) = gamma_prime(&x, &y) else {
                    continue;
                };
                for e in &path {
                    if let Some(i) = window.edge_index(e) {
                        values[i] += SHORT_INCREMENT;
                    }
                }
            }
        }
    }
    WeightField {
        window: *window,
        values,
        provenance: Provenance::W,
    }
}

/// W(e) for an edge of orientation `o` (W is translation invariant).
pub fn short_weight(o: Orientation) -> f64 {
    static TABLE: OnceLock<[f64; 4]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let w = EdgeWindow::new([0, 0], [1, 1]).expect("nonempty");
        let field = build_w(&w);
        Orientation::ALL.map(|o| {
            let anchor = if o == Orientation::Falling { Point([0, 1]) } else { Point([0, 0]) };
            field.get(&ShortEdge::new(anchor, o)).expect("edge in window")
        })
    })[o.index()]
}

/// U_k(e) = N^k_{e+r}·10·3^{−3k}, loads counted per traversal.
pub fn sample_uk(k: u32, shift: [i64; 2], window: &EdgeWindow) -> Result<WeightField> {
    check_shift(k, shift)?;
    let side = pow3(k)?;
    let unit = uk_unit(k);
    let mut cache: HashMap<(usize, i64, i64), u128> = HashMap::new();
    let values = window
        .edges()
        .map(|e| {
            let moved = e.translate(shift);
            let key = (
                e.orientation.index(),
                moved.anchor.0[0].rem_euclid(side),
                moved.anchor.0[1].rem_euclid(side),
            );
            let load = match cache.get(&key) {
                Some(&n) => n,
                None => {
                    let n = structured_load(&moved, k)?.per_traversal;
                    cache.insert(key, n);
                    n
                }
            };
            Ok(load as f64 * unit)
        })
        .collect::<Result<_>>()?;
    Ok(WeightField {
        window: *window,
        values,
        provenance: Provenance::Uk { level: k, shift },
    })
}

/// U_k by walking every shifted path r + γ^k − r through the window. Only
/// practical for small windows and levels.
pub fn sample_uk_direct(k: u32, shift: [i64; 2], window: &EdgeWindow) -> Result<WeightField> {
    check_shift(k, shift)?;
    let (lo, hi) = (window.lo(), window.hi());
    let mut counts = vec![0u64; window.edge_count()];
    accumulate_traversals(
        k,
        [lo[0] + shift[0], lo[1] + shift[1]],
        [hi[0] + shift[0], hi[1] + shift[1]],
        |e| {
            if let Some(i) = window.edge_index(&e.translate([-shift[0], -shift[1]])) {
                counts[i] += 1;
            }
        },
    )?;
    let unit = uk_unit(k);
    Ok(WeightField {
        window: *window,
        values: counts.iter().map(|&n| n as f64 * unit).collect(),
        provenance: Provenance::Uk { level: k, shift },
    })
}

/// U = W + Σ_{k ≤ k_max} U_k with the given shifts.
pub fn build_u(window: &EdgeWindow, shifts: &ShiftVector) -> Result<WeightField> {
    let mut values = build_w(window).values;
    for k in 1..=shifts.levels() {
        let uk = sample_uk(k, shifts.level(k), window)?;
        for (v, u) in values.iter_mut().zip(&uk.values) {
            *v += u;
        }
    }
    Ok(WeightField {
        window: *window,
        values,
        provenance: Provenance::Combined {
            shifts: shifts.as_slice().to_vec(),
        },
    })
}

/// U(e) for one edge without building a window.
pub fn rewired_weight(e: &ShortEdge, shifts: &ShiftVector) -> Result<f64> {
    let mut total = short_weight(e.orientation);
    for k in 1..=shifts.levels() {
        let load = structured_load(&e.translate(shifts.level(k)), k)?.per_traversal;
        total += load as f64 * uk_unit(k);
    }
    Ok(total)
}
