//! Finite-scale check that the rewired short-range network conducts at least
//! as well as the long-range network c_{x,y} = ‖x − y‖∞^{−4}.

use super::weights::{build_u, ShiftVector};
use super::EdgeWindow;
use crate::error::{Error, Result};
use crate::lattice::{pow3, Point2};
use crate::network::{effective_conductance, WeightedNetwork};

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonReport {
    /// C_eff(A ↔ B) in the rewired network on the padded window.
    pub rewired: f64,
    /// C_eff(A ↔ B) in the long-range network on the core.
    pub long_range: f64,
    pub core: EdgeWindow,
    pub padding: i64,
    pub max_length: i64,
    pub shifts: ShiftVector,
}

impl ComparisonReport {
    pub fn ratio(&self) -> f64 {
        self.rewired / self.long_range
    }

    pub fn holds(&self) -> bool {
        self.rewired >= self.long_range
    }
}

/// Vertices of `core`, with c = L^{−4} between every pair at ∞-distance
/// 2 ≤ L ≤ `max_length`.
pub fn long_range_network(core: &EdgeWindow, max_length: i64) -> WeightedNetwork {
    let mut net = WeightedNetwork::new(core.vertex_count());
    for (u, p) in core.vertices().enumerate() {
        for d0 in -max_length..=max_length {
            for d1 in -max_length..=max_length {
                let len = d0.abs().max(d1.abs());
                if len < 2 {
                    continue;
                }
                let q = crate::lattice::Point([p.0[0] + d0, p.0[1] + d1]);
                if let Some(v) = core.vertex_index(&q) {
                    if u < v {
                        net.add_edge(u, v, (len as f64).powi(-4)).expect("positive");
                    }
                }
            }
        }
    }
    net.set_positions(2, core.vertices().map(|p| p.0.to_vec()).collect())
        .expect("one position per vertex");
    net
}

fn indices(window: &EdgeWindow, set: &[Point2], name: &str) -> Result<Vec<usize>> {
    set.iter()
        .map(|p| {
            window.vertex_index(p).ok_or_else(|| {
                Error::WindowTooSmall(format!("{name} contains {p}, outside the core {window:?}"))
            })
        })
        .collect()
}

/// Compares C_eff(A ↔ B) of U = W + Σ_{k ≤ k_max} U_k on `window` against the
/// long-range network on the core, i.e. `window` shrunk by 8·3^{k_max}, using
/// only lengths 2..=2·3^{k_max}. A and B must lie in the core.
pub fn conductivity_comparison(
    window: &EdgeWindow,
    shifts: &ShiftVector,
    a: &[Point2],
    b: &[Point2],
) -> Result<ComparisonReport> {
    let k_max = shifts.levels();
    let scale = pow3(k_max)?;
    let padding = 8 * scale;
    let core = window.grow(-padding).ok_or_else(|| {
        Error::WindowTooSmall(format!("padding 8·3^{k_max} = {padding} leaves no core"))
    })?;
    let (core_a, core_b) = (indices(&core, a, "A")?, indices(&core, b, "B")?);
    let max_length = 2 * scale;

    let long_range = effective_conductance(&long_range_network(&core, max_length), &core_a, &core_b)?.value;

    let rewired_net = build_u(window, shifts)?.to_network();
    let to_window = |set: &[Point2]| -> Vec<usize> {
        set.iter().map(|p| window.vertex_index(p).expect("core lies in window")).collect()
    };
    let rewired = effective_conductance(&rewired_net, &to_window(a), &to_window(b))?.value;
    Ok(ComparisonReport {
        rewired,
        long_range,
        core,
        padding,
        max_length,
        shifts: shifts.clone(),
    })
}
