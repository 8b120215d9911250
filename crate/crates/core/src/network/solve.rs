use nalgebra::{DMatrix, DVector};

use super::WeightedNetwork;
use crate::error::{Error, Result};
use crate::numerics::CompensatedSum;

/// Symmetric positive definite linear operator.
pub trait SpdOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
    fn diagonal(&self) -> Vec<f64>;
}

/// Compressed sparse row matrix.
#[derive(Clone, Debug)]
pub struct CsrMatrix {
    n: usize,
    offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Builds an n×n matrix, summing duplicate entries.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut offsets = vec![0; n + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *vals.last_mut().expect("entry") += v;
            } else {
                cols.push(c);
                vals.push(v);
                offsets[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        CsrMatrix {
            n,
            offsets,
            cols,
            vals,
        }
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }
}

impl SpdOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let mut s = 0.0;
            for k in self.offsets[i]..self.offsets[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            *yi = s;
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for (i, di) in d.iter_mut().enumerate() {
            for k in self.offsets[i]..self.offsets[i + 1] {
                if self.cols[k] == i {
                    *di += self.vals[k];
                }
            }
        }
        d
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Outcome of an iterative solve.
#[derive(Clone, Debug)]
pub struct CgOutcome {
    pub solution: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Jacobi-preconditioned conjugate gradient from a zero start. Convergence
/// is declared on the recomputed true residual.
pub fn conjugate_gradient<O: SpdOperator + ?Sized>(
    op: &O,
    b: &[f64],
    tolerance: f64,
    max_iterations: usize,
) -> Result<CgOutcome> {
    let n = op.dim();
    assert_eq!(b.len(), n);
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(CgOutcome {
            solution: x,
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let inv_diag: Vec<f64> = op
        .diagonal()
        .into_iter()
        .map(|d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, m)| a * m).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut iterations = 0;
    let mut rel = 1.0;
    while iterations < max_iterations {
        op.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        iterations += 1;
        rel = norm(&r) / bnorm;
        if rel <= tolerance {
            // confirm against the true residual and restart if it drifted
            op.apply(&x, &mut ap);
            for i in 0..n {
                r[i] = b[i] - ap[i];
            }
            rel = norm(&r) / bnorm;
            if rel <= tolerance {
                return Ok(CgOutcome {
                    solution: x,
                    iterations,
                    relative_residual: rel,
                });
            }
            for i in 0..n {
                z[i] = r[i] * inv_diag[i];
            }
            p.copy_from_slice(&z);
            rz = dot(&r, &z);
            continue;
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NoConvergence {
        residual: rel,
        iterations,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveMethod {
    /// Nothing to solve (no interior unknowns, or A and B disconnected).
    Trivial,
    Dense,
    ConjugateGradient,
}

#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    pub tolerance: f64,
    pub max_iterations: Option<usize>,
    /// Interior sizes below this use a dense Cholesky factorization.
    pub dense_threshold: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tolerance: 1e-12,
            max_iterations: None,
            dense_threshold: 2000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConductanceSolution {
    /// C_eff(A ↔ B), the Dirichlet energy of `potential`.
    pub value: f64,
    /// Harmonic potential: 1 on A, 0 on B.
    pub potential: Vec<f64>,
    /// True when no positive-conductance path joins A and B.
    pub disconnected: bool,
    pub method: SolveMethod,
    pub iterations: usize,
    pub relative_residual: f64,
}

impl ConductanceSolution {
    pub fn resistance(&self) -> f64 {
        1.0 / self.value
    }
}

pub fn effective_conductance(
    net: &WeightedNetwork,
    a: &[usize],
    b: &[usize],
) -> Result<ConductanceSolution> {
    effective_conductance_with(net, a, b, &SolverOptions::default())
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Role {
    Source,
    Sink,
    Free,
}

pub fn effective_conductance_with(
    net: &WeightedNetwork,
    a: &[usize],
    b: &[usize],
    opts: &SolverOptions,
) -> Result<ConductanceSolution> {
    let n = net.vertex_count();
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("terminal sets must be nonempty"));
    }
    let mut role = vec![Role::Free; n];
    for &v in a {
        if v >= n {
            return Err(Error::invalid(format!("vertex {v} out of range")));
        }
        role[v] = Role::Source;
    }
    for &v in b {
        if v >= n {
            return Err(Error::invalid(format!("vertex {v} out of range")));
        }
        if role[v] == Role::Source {
            return Err(Error::invalid(format!("vertex {v} lies in both A and B")));
        }
        role[v] = Role::Sink;
    }

    let labels = net.component_labels();
    let ncomp = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut has_a = vec![false; ncomp];
    let mut has_b = vec![false; ncomp];
    for v in 0..n {
        match role[v] {
            Role::Source => has_a[labels[v]] = true,
            Role::Sink => has_b[labels[v]] = true,
            Role::Free => {}
        }
    }

    let mut potential = vec![0.0; n];
    let mut unknown = vec![usize::MAX; n];
    let mut free = Vec::new();
    for v in 0..n {
        match role[v] {
            Role::Source => potential[v] = 1.0,
            Role::Sink => {}
            Role::Free => {
                let c = labels[v];
                if has_a[c] && has_b[c] {
                    unknown[v] = free.len();
                    free.push(v);
                } else if has_a[c] {
                    potential[v] = 1.0;
                }
            }
        }
    }
    let connected = (0..ncomp).any(|c| has_a[c] && has_b[c]);
    if !connected {
        return Ok(ConductanceSolution {
            value: 0.0,
            potential,
            disconnected: true,
            method: SolveMethod::Trivial,
            iterations: 0,
            relative_residual: 0.0,
        });
    }

    let m = free.len();
    let mut rhs = vec![0.0; m];
    let mut method = SolveMethod::Trivial;
    let mut iterations = 0;
    let mut relative_residual = 0.0;
    if m > 0 {
        let mut triplets = Vec::new();
        for e in net.edges().iter().filter(|e| e.conductance > 0.0) {
            let (iu, iv) = (unknown[e.u], unknown[e.v]);
            let c = e.conductance;
            match (iu != usize::MAX, iv != usize::MAX) {
                (true, true) => {
                    triplets.push((iu, iu, c));
                    triplets.push((iv, iv, c));
                    triplets.push((iu, iv, -c));
                    triplets.push((iv, iu, -c));
                }
                (true, false) => {
                    triplets.push((iu, iu, c));
                    rhs[iu] += c * potential[e.v];
                }
                (false, true) => {
                    triplets.push((iv, iv, c));
                    rhs[iv] += c * potential[e.u];
                }
                (false, false) => {}
            }
        }
        let solution = if m < opts.dense_threshold {
            method = SolveMethod::Dense;
            let mut mat = DMatrix::<f64>::zeros(m, m);
            for (r, c, v) in triplets {
                mat[(r, c)] += v;
            }
            let rhs_vec = DVector::from_vec(rhs.clone());
            let sol = match mat.clone().cholesky() {
                Some(ch) => ch.solve(&rhs_vec),
                None => mat
                    .lu()
                    .solve(&rhs_vec)
                    .ok_or(Error::NoConvergence {
                        residual: f64::INFINITY,
                        iterations: 0,
                    })?,
            };
            sol.iter().copied().collect::<Vec<f64>>()
        } else {
            method = SolveMethod::ConjugateGradient;
            let mat = CsrMatrix::from_triplets(m, triplets);
            let max_it = opts.max_iterations.unwrap_or(10 * m + 1000);
            let out = conjugate_gradient(&mat, &rhs, opts.tolerance, max_it)?;
            iterations = out.iterations;
            relative_residual = out.relative_residual;
            out.solution
        };
        for (k, &v) in free.iter().enumerate() {
            potential[v] = solution[k];
        }
    }
    let value = dirichlet_energy(net, &potential)?;
    Ok(ConductanceSolution {
        value,
        potential,
        disconnected: false,
        method,
        iterations,
        relative_residual,
    })
}

/// Σ_e c_e (f(u) − f(v))².
pub fn dirichlet_energy(net: &WeightedNetwork, f: &[f64]) -> Result<f64> {
    if f.len() != net.vertex_count() {
        return Err(Error::invalid(format!(
            "potential has {} entries for {} vertices",
            f.len(),
            net.vertex_count()
        )));
    }
    let sum: CompensatedSum = net
        .edges()
        .iter()
        .map(|e| {
            let d = f[e.u] - f[e.v];
            e.conductance * d * d
        })
        .collect();
    Ok(sum.value())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn net(n: usize, edges: &[(usize, usize, f64)]) -> WeightedNetwork {
        WeightedNetwork::from_edges(n, edges.iter().copied()).unwrap()
    }

    #[test]
    fn series_and_parallel() {
        let s = net(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
        let c = effective_conductance(&s, &[0], &[2]).unwrap();
        assert!((c.value - 0.5).abs() < 1e-14);
        assert!((c.potential[1] - 0.5).abs() < 1e-14);

        let p = net(2, &[(0, 1, 1.0), (0, 1, 1.0)]);
        let c = effective_conductance(&p, &[0], &[1]).unwrap();
        assert!((c.value - 2.0).abs() < 1e-14);
        assert_eq!(c.method, SolveMethod::Trivial);
    }

    #[test]
    fn four_cycle_opposite_corners() {
        let sq = net(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]);
        let c = effective_conductance(&sq, &[0], &[2]).unwrap();
        assert!((c.value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn disconnected_terminals_give_zero() {
        let g = net(4, &[(0, 1, 1.0), (2, 3, 1.0)]);
        let c = effective_conductance(&g, &[0], &[3]).unwrap();
        assert_eq!(c.value, 0.0);
        assert!(c.disconnected);
    }

    #[test]
    fn rejects_overlapping_terminals() {
        let g = net(2, &[(0, 1, 1.0)]);
        assert!(effective_conductance(&g, &[0], &[0]).is_err());
        assert!(effective_conductance(&g, &[], &[1]).is_err());
    }

    #[test]
    fn dense_and_iterative_agree_on_a_grid() {
        let side = 12;
        let id = |x: usize, y: usize| x * side + y;
        let mut edges = Vec::new();
        for x in 0..side {
            for y in 0..side {
                let c = 1.0 + ((x * 7 + y * 3) % 5) as f64;
                if x + 1 < side {
                    edges.push((id(x, y), id(x + 1, y), c));
                }
                if y + 1 < side {
                    edges.push((id(x, y), id(x, y + 1), 1.0 / c));
                }
            }
        }
        let g = net(side * side, &edges);
        let dense = effective_conductance(&g, &[0], &[side * side - 1]).unwrap();
        let opts = SolverOptions {
            dense_threshold: 0,
            ..SolverOptions::default()
        };
        let cg = effective_conductance_with(&g, &[0], &[side * side - 1], &opts).unwrap();
        assert_eq!(cg.method, SolveMethod::ConjugateGradient);
        assert!((dense.value - cg.value).abs() < 1e-10 * dense.value);
    }

    #[test]
    fn constant_potential_has_zero_energy() {
        let g = net(3, &[(0, 1, 2.0), (1, 2, 3.0)]);
        assert_eq!(dirichlet_energy(&g, &[0.7, 0.7, 0.7]).unwrap(), 0.0);
        assert!(dirichlet_energy(&g, &[0.0]).is_err());
    }

    #[test]
    fn csr_sums_duplicates() {
        let m = CsrMatrix::from_triplets(2, vec![(0, 0, 1.0), (0, 0, 2.0), (1, 1, 4.0), (0, 1, -1.0), (1, 0, -1.0)]);
        assert_eq!(m.nnz(), 4);
        assert_eq!(m.diagonal(), vec![3.0, 4.0]);
        let mut y = vec![0.0; 2];
        m.apply(&[1.0, 1.0], &mut y);
        assert_eq!(y, vec![2.0, 3.0]);
    }
}
