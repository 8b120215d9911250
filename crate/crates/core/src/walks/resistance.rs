//! R_eff(0 ↔ Z²∖B_n) for the conductances c_{x,y} = P(x − y), with the
//! complement of B_n shorted into one sink.
//!
//! Every vertex has total conductance 1, so with the origin held at 1 and
//! the sink at 0 the interior system is (I − K)f = K·1_0, where K is the
//! step kernel restricted to B_n∖{0}. K is applied by FFT.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::lattice::Point;
use crate::network::{conjugate_gradient, SpdOperator};
use crate::numerics::CompensatedSum;
use crate::stepdist::StepDistribution;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthRow {
    pub n: u64,
    pub resistance: f64,
    /// R(n) − R(previous n).
    pub increment: Option<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResistanceGrowth {
    pub rows: Vec<GrowthRow>,
}

impl ResistanceGrowth {
    pub fn increments(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.increment).collect()
    }

    /// Successive increment ratios Δ_{i+1}/Δ_i.
    pub fn increment_ratios(&self) -> Vec<f64> {
        self.increments().windows(2).map(|w| w[1] / w[0]).collect()
    }

    pub fn is_monotone(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].resistance >= w[0].resistance)
    }
}

/// Dense square grid of side `len` transformed in place by 2-D FFT.
struct Fft2 {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    column: Vec<Complex<f64>>,
}

impl Fft2 {
    fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft2 {
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
            column: vec![Complex::new(0.0, 0.0); len],
        }
    }

    fn run(&mut self, grid: &mut [Complex<f64>], forward: bool) {
        let plan = if forward { &self.forward } else { &self.inverse };
        let n = self.len;
        for row in grid.chunks_mut(n) {
            plan.process(row);
        }
        for c in 0..n {
            for r in 0..n {
                self.column[r] = grid[r * n + c];
            }
            plan.process(&mut self.column);
            for r in 0..n {
                grid[r * n + c] = self.column[r];
            }
        }
    }
}

/// I − K on B_n∖{0}, unknowns in row-major order of the box with the origin
/// skipped.
struct BoxOperator {
    side: usize,
    origin: usize,
    grid_len: usize,
    kernel_spectrum: Vec<Complex<f64>>,
    fft: std::sync::Mutex<(Fft2, Vec<Complex<f64>>)>,
}

impl BoxOperator {
    fn new(dist: &StepDistribution<2>, n: u64) -> Self {
        let side = 2 * n as usize + 1;
        // offsets inside the box never exceed side − 1, so a grid of
        // 2·side − 1 avoids wrap-around
        let grid_len = (2 * side - 1).next_power_of_two();
        let reach = (side - 1) as i64;
        let mut kernel = vec![Complex::new(0.0, 0.0); grid_len * grid_len];
        let g = grid_len as i64;
        for dx in -reach..=reach {
            for dy in -reach..=reach {
                let p = dist.pmf(&Point([dx, dy]));
                if p != 0.0 {
                    let idx = dx.rem_euclid(g) as usize * grid_len + dy.rem_euclid(g) as usize;
                    kernel[idx].re = p;
                }
            }
        }
        let mut fft = Fft2::new(grid_len);
        fft.run(&mut kernel, true);
        BoxOperator {
            side,
            origin: side * side / 2,
            grid_len,
            kernel_spectrum: kernel,
            fft: std::sync::Mutex::new((fft, vec![Complex::new(0.0, 0.0); grid_len * grid_len])),
        }
    }

    fn box_index(&self, unknown: usize) -> usize {
        if unknown < self.origin {
            unknown
        } else {
            unknown + 1
        }
    }

    /// (K·f) on box cells, for f given on box cells.
    fn convolve(&self, f_box: &[f64]) -> Vec<f64> {
        let mut guard = self.fft.lock().expect("fft state");
        let (fft, grid) = &mut *guard;
        grid.fill(Complex::new(0.0, 0.0));
        for (cell, &v) in f_box.iter().enumerate() {
            let (i, j) = (cell / self.side, cell % self.side);
            grid[i * self.grid_len + j].re = v;
        }
        fft.run(grid, true);
        for (g, k) in grid.iter_mut().zip(&self.kernel_spectrum) {
            *g *= *k;
        }
        fft.run(grid, false);
        let scale = 1.0 / (self.grid_len * self.grid_len) as f64;
        (0..f_box.len())
            .map(|cell| {
                let (i, j) = (cell / self.side, cell % self.side);
                grid[i * self.grid_len + j].re * scale
            })
            .collect()
    }
}

impl SpdOperator for BoxOperator {
    fn dim(&self) -> usize {
        self.side * self.side - 1
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let mut f_box = vec![0.0; self.side * self.side];
        for (u, &v) in x.iter().enumerate() {
            f_box[self.box_index(u)] = v;
        }
        let kf = self.convolve(&f_box);
        for (u, yu) in y.iter_mut().enumerate() {
            *yu = x[u] - kf[self.box_index(u)];
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        vec![1.0; self.dim()]
    }
}

/// Effective resistance between the origin and the complement of each box
/// B_n = {‖x‖∞ ≤ n}, for increasing n.
pub fn resistance_growth_diagnostic(
    dist: &StepDistribution<2>,
    sizes: &[u64],
    tolerance: f64,
) -> Result<ResistanceGrowth> {
    if sizes.is_empty() || sizes[0] == 0 || sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("window sizes must be positive and strictly increasing"));
    }
    let mut rows: Vec<GrowthRow> = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let op = BoxOperator::new(dist, n);
        let side = op.side as i64;
        let half = n as i64;
        let cell_point = |cell: usize| Point([cell as i64 / side - half, cell as i64 % side - half]);
        let b: Vec<f64> = (0..op.dim())
            .map(|u| dist.pmf(&cell_point(op.box_index(u))))
            .collect();
        let out = conjugate_gradient(&op, &b, tolerance, 20 * op.dim() + 1000)?;
        // C = Σ_y c(0,y)(1 − f(y)) = 1 − Σ_{y ∈ B_n∖0} P(y) f(y)
        let mut absorbed = CompensatedSum::new();
        for (u, &f) in out.solution.iter().enumerate() {
            absorbed.add(b[u] * f);
        }
        let conductance = 1.0 - absorbed.value();
        let resistance = 1.0 / conductance;
        let increment = rows.last().map(|r| resistance - r.resistance);
        rows.push(GrowthRow {
            n,
            resistance,
            increment,
            iterations: out.iterations,
            relative_residual: out.relative_residual,
        });
    }
    Ok(ResistanceGrowth { rows })
}
