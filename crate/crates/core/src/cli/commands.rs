//! One function per subcommand, each turning a validated config into a table.

use std::fs::File;
use std::io::{BufReader, BufWriter};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::ExperimentConfig;
use super::table::{Cell, Table};
use crate::error::{Error, Result};
use crate::lattice::{Norm, Orientation, Point, Point2, ShortEdge};
use crate::network::{
    domination_exact, domination_test, effective_conductance, read_network, theorem1_flow,
    TwoPointWeights, WeightedNetwork,
};
use crate::rcm::{
    components_and_walk, delta_eff, discretize, sample_rcm, tail_certificate, write_sample,
    Kernel, PowerProfile,
};
use crate::rewire::{
    build_u, cauchy_tail_estimate, conductivity_comparison, edge_loads, load_bound_checks,
    rewired_weight, structured_loads, EdgeWindow, LoadSemantics, ShiftVector,
};
use crate::stepdist::StepDistribution;
use crate::walks::{convolve_pmf, convolve_pmf_with, halfmass_check, simulate, trial_rng, ConvolutionOptions};

pub struct Outcome {
    pub table: Table,
    /// Rendered rows (or messages) that break a checked bound.
    pub violations: Vec<String>,
}

impl Outcome {
    fn new(table: Table) -> Self {
        Outcome { table, violations: Vec::new() }
    }

    /// Flags every row whose `column` holds `false`.
    fn flag_rows(mut self, column: &str) -> Self {
        let idx = self.table.columns.iter().position(|c| c == column).expect("known column");
        for row in &self.table.rows {
            if row[idx] == Cell::Bool(false) {
                let cells: Vec<String> = row.iter().map(Cell::render).collect();
                self.violations.push(cells.join(","));
            }
        }
        self
    }
}

pub fn execute(cfg: &ExperimentConfig) -> Result<Outcome> {
    match cfg.command {
        "walk" => walk(cfg),
        "conductance" => conductance(cfg),
        "flow" => flow(cfg),
        "loads" => loads(cfg),
        "rewire" => rewire(cfg),
        "rcm" => rcm(cfg),
        "domination" => domination(cfg),
        other => Err(Error::invalid(format!("unknown command '{other}'"))),
    }
}

fn norm(cfg: &ExperimentConfig) -> Result<Norm> {
    cfg.text("norm").parse()
}

fn walk(cfg: &ExperimentConfig) -> Result<Outcome> {
    let n = cfg.count("n", 1..=1_000_000_000)?;
    let mode = if cfg.text("check") == "halfmass" { "halfmass" } else { cfg.text("mode") };
    let cauchy = cfg.text("dist") == "cauchy";
    let dim = cfg.count("dim", 1..=2)?;
    let radius = cfg.count("radius", 1..=1 << 26)?;
    if cauchy && dim != 1 {
        return Err(Error::invalid("the Cauchy step law is one-dimensional"));
    }
    match mode {
        "simulate" => {
            let trials = cfg.count("trials", 1..=100_000_000)?;
            let stats = if cauchy {
                simulate(&StepDistribution::<1>::discretized_cauchy(), n, trials, &[n], cfg.seed)?
            } else {
                let (s, r) = (cfg.real("s"), cfg.count("step-radius", 1..=1 << 40)?);
                if dim == 1 {
                    simulate(&StepDistribution::<1>::power_law(s, r, norm(cfg)?)?, n, trials, &[n], cfg.seed)?
                } else {
                    simulate(&StepDistribution::<2>::power_law(s, r, norm(cfg)?)?, n, trials, &[n], cfg.seed)?
                }
            };
            let mut t = Table::new(&[
                "steps", "trials", "mean_visits", "visits_se", "mean_distinct", "distinct_se",
                "max_displacement", "return_probability", "return_se",
            ]);
            let (v, vse) = stats.mean_visits();
            let (d, dse) = stats.mean_distinct_sites();
            let ret = stats.checkpoints[0];
            t.push(vec![
                n.into(), trials.into(), v.into(), vse.into(), d.into(), dse.into(),
                stats.max_displacement().into(), ret.probability.into(), ret.std_error.into(),
            ]);
            Ok(Outcome::new(t))
        }
        "pmf" => {
            let pmf = if cauchy {
                let dist = StepDistribution::<1>::discretized_cauchy();
                convolve_pmf_with(&dist, n as usize, &ConvolutionOptions::cauchy(radius), |_| {})?
            } else {
                if dim != 1 {
                    return Err(Error::invalid("exact convolution is one-dimensional"));
                }
                let r = cfg.count("step-radius", 1..=1 << 40)?;
                convolve_pmf(&StepDistribution::<1>::power_law(cfg.real("s"), r, norm(cfg)?)?, n as usize, radius)?
            };
            let span = cfg.count("span", 0..=radius)? as i64;
            let mut t = Table::new(&["x", "probability"]);
            t.meta("truncated_mass", format!("{:.16e}", pmf.truncated_mass));
            t.meta("argmax", pmf.argmax());
            for x in -span..=span {
                t.push(vec![x.into(), pmf.at(x).into()]);
            }
            Ok(Outcome::new(t))
        }
        _ => {
            if !cauchy {
                return Err(Error::invalid("the half-mass check is for the Cauchy step law"));
            }
            let h = halfmass_check(n as usize, &ConvolutionOptions::cauchy(radius))?;
            let mut t = Table::new(&["n", "band", "probability", "truncated_mass", "upper_bound", "holds"]);
            t.push(vec![
                n.into(), (3 * n).into(), h.probability.into(), h.truncated_mass.into(),
                h.upper_bound().into(), h.holds().into(),
            ]);
            Ok(Outcome::new(t).flag_rows("holds"))
        }
    }
}

fn vertex_list(cfg: &ExperimentConfig, key: &str, n: usize) -> Result<Vec<usize>> {
    cfg.list(key)
        .iter()
        .map(|&v| {
            usize::try_from(v)
                .ok()
                .filter(|&v| v < n)
                .ok_or_else(|| Error::invalid(format!("--{key}: vertex {v} outside 0..{n}")))
        })
        .collect()
}

fn conductance(cfg: &ExperimentConfig) -> Result<Outcome> {
    let doc = read_network(BufReader::new(File::open(cfg.text("input"))?))?;
    let net = &doc.network;
    let a = vertex_list(cfg, "a", net.vertex_count())?;
    let b = vertex_list(cfg, "b", net.vertex_count())?;
    let sol = effective_conductance(net, &a, &b)?;
    let mut t = Table::new(&["vertices", "edges", "conductance", "resistance"]);
    t.push(vec![
        net.vertex_count().into(), net.edges().len().into(), sol.value.into(), sol.resistance().into(),
    ]);
    Ok(Outcome::new(t))
}

fn flow(cfg: &ExperimentConfig) -> Result<Outcome> {
    let dim = cfg.count("dim", 1..=2)? as usize;
    let start = cfg.count("start", 0..=40)? as u32;
    let stages = cfg.count("stages", start as u64..=40)? as u32;
    let f = theorem1_flow(dim, cfg.real("s"), start, stages)?;
    let check = f.block_flow().check();
    let mut t = Table::new(&["stage", "energy", "ratio", "cumulative"]);
    t.meta("entry_energy", format!("{:.16e}", f.entry_energy));
    t.meta("total_energy", format!("{:.16e}", f.total_energy()));
    t.meta("limiting_ratio", format!("{:.16e}", f.limiting_ratio()));
    t.meta("unit_flow", check.is_ok());
    let mut cumulative = f.entry_energy;
    let mut previous: Option<f64> = None;
    for &(k, e) in &f.stage_energies {
        cumulative += e;
        let ratio = previous.map_or(f64::NAN, |p| e / p);
        t.push(vec![k.into(), e.into(), ratio.into(), cumulative.into()]);
        previous = Some(e);
    }
    let mut out = Outcome::new(t);
    if !check.is_ok() {
        out.violations.push(format!("unit flow check failed: {check:?}"));
    }
    Ok(out)
}

fn semantics(cfg: &ExperimentConfig) -> LoadSemantics {
    if cfg.text("semantics") == "per-pair" {
        LoadSemantics::PerPair
    } else {
        LoadSemantics::PerTraversal
    }
}

fn loads(cfg: &ExperimentConfig) -> Result<Outcome> {
    let sem = semantics(cfg);
    let table = if cfg.text("method") == "structured" {
        structured_loads(cfg.count("k", 1..=7)? as u32)?
    } else {
        edge_loads(cfg.count("k", 1..=3)? as u32, 7)?
    };
    let mut t = Table::new(&["orientation", "scale", "threshold", "count", "bound", "max_load", "holds"]);
    t.meta("level", table.level());
    for c in load_bound_checks(&table, sem) {
        let scale = c.scale.map_or_else(|| Cell::from("cap"), Cell::from);
        t.push(vec![
            c.orientation.name().into(), scale, c.threshold.into(), c.count.into(), c.bound.into(),
            table.max_load(c.orientation, sem).into(), c.holds().into(),
        ]);
    }
    Ok(Outcome::new(t).flag_rows("holds"))
}

fn shifts_text(s: &ShiftVector) -> String {
    s.as_slice().iter().map(|[a, b]| format!("{a}:{b}")).collect::<Vec<_>>().join(";")
}

fn rewire(cfg: &ExperimentConfig) -> Result<Outcome> {
    match cfg.text("mode") {
        "compare" => {
            let k_max = cfg.count("k-max", 1..=3)? as u32;
            let core = cfg.count("core", 1..=1000)? as i64;
            let pad = 8 * 3i64.pow(k_max);
            let window = EdgeWindow::centered(core + pad)?;
            let boundary: Vec<Point2> = EdgeWindow::centered(core)?
                .vertices()
                .filter(|p| p.norm_max() == core as u64)
                .collect();
            let mut t = Table::new(&["realization", "shifts", "rewired", "long_range", "ratio", "holds"]);
            t.meta("core", core);
            t.meta("padding", pad);
            for r in 0..cfg.count("realizations", 1..=10_000)? {
                let shifts = ShiftVector::random(k_max, &mut trial_rng(cfg.seed, r))?;
                let rep = conductivity_comparison(&window, &shifts, &[Point([0, 0])], &boundary)?;
                t.push(vec![
                    r.into(), shifts_text(&shifts).into(), rep.rewired.into(), rep.long_range.into(),
                    rep.ratio().into(), rep.holds().into(),
                ]);
            }
            Ok(Outcome::new(t).flag_rows("holds"))
        }
        "tail" => {
            let k_max = cfg.count("k-max", 1..=12)? as u32;
            let samples = cfg.count("samples", 1..=100_000_000)?;
            let j_max = cfg.count("j-max", 0..=30)? as i32;
            let o: Orientation = cfg.text("orientation").parse()?;
            let e = ShortEdge::new(Point([0, 0]), o);
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let values = (0..samples)
                .map(|_| rewired_weight(&e, &ShiftVector::random(k_max, &mut rng)?))
                .collect::<Result<Vec<f64>>>()?;
            let thresholds: Vec<f64> = (0..=j_max).map(|j| 3f64.powi(j)).collect();
            let tail = cauchy_tail_estimate(&values, &thresholds)?;
            let mut t = Table::new(&["j", "threshold", "exceed", "probability", "scaled"]);
            t.meta("constant", format!("{:.16e}", tail.constant));
            for (j, row) in tail.rows.iter().enumerate() {
                t.push(vec![
                    j.into(), row.threshold.into(), row.exceed.into(), row.probability.into(), row.scaled.into(),
                ]);
            }
            Ok(Outcome::new(t))
        }
        _ => {
            let k_max = cfg.count("k-max", 1..=4)? as u32;
            let window = EdgeWindow::centered(cfg.count("radius", 1..=200)? as i64)?;
            let shifts = ShiftVector::random(k_max, &mut ChaCha8Rng::seed_from_u64(cfg.seed))?;
            let field = build_u(&window, &shifts)?;
            let mut t = Table::new(&["x", "y", "orientation", "weight"]);
            t.meta("shifts", shifts_text(&shifts));
            for (e, w) in field.iter() {
                t.push(vec![e.anchor.0[0].into(), e.anchor.0[1].into(), e.orientation.name().into(), w.into()]);
            }
            Ok(Outcome::new(t))
        }
    }
}

fn rcm(cfg: &ExperimentConfig) -> Result<Outcome> {
    let kernel = Kernel::new(cfg.text("kernel").parse()?, cfg.real("gamma"), cfg.real("beta"))?;
    let profile = PowerProfile::new(cfg.real("delta"))?;
    let distances = || -> Result<Vec<f64>> {
        let r_max = cfg.real("r-max");
        let r: Vec<f64> = (1..).map(|j| 2f64.powi(j)).take_while(|&r| r <= r_max).collect();
        if r.len() < 2 {
            return Err(Error::invalid("--r-max must be at least 4"));
        }
        Ok(r)
    };
    let side = cfg.real("side");
    if !(side > 0.0 && side <= 200.0) {
        return Err(Error::invalid(format!("--side {side} outside (0, 200]")));
    }
    match cfg.text("mode") {
        "certificate" => {
            let cert = tail_certificate(&kernel, &profile, &distances()?)?;
            let mut t = Table::new(&["r", "probability", "error", "scaled"]);
            t.meta("sup", format!("{:.16e}", cert.sup));
            t.meta("slope", format!("{:.16e}", cert.slope));
            t.meta("max_relative_error", format!("{:.16e}", cert.max_relative_error()));
            for r in &cert.rows {
                t.push(vec![r.distance.into(), r.probability.into(), r.error.into(), r.scaled.into()]);
            }
            Ok(Outcome::new(t))
        }
        "delta-eff" => {
            let d = delta_eff(&kernel, &profile, &distances()?)?;
            let mut t = Table::new(&["r", "probability", "estimate", "local"]);
            t.meta("extrapolated", format!("{:.16e}", d.extrapolated));
            t.meta("below_two", d.below_two());
            t.meta("predicted_below_two", d.predicted_below_two);
            t.meta("known_condition", "delta<2, or gamma>1/2 (prod), or gamma>(delta-1)/delta (others)");
            for r in &d.rows {
                t.push(vec![r.distance.into(), r.probability.into(), r.estimate.into(), r.local.into()]);
            }
            Ok(Outcome::new(t))
        }
        mode => {
            let sample = sample_rcm(side, kernel, profile, cfg.seed)?;
            let out_path = cfg.text("sample-out");
            if !out_path.is_empty() {
                write_sample(&mut BufWriter::new(File::create(out_path)?), &sample)?;
            }
            let mut t;
            match mode {
                "sample" => {
                    let mut degree = vec![0usize; sample.points.len()];
                    for &(i, j) in &sample.edges {
                        degree[i] += 1;
                        degree[j] += 1;
                    }
                    t = Table::new(&["index", "x", "y", "weight", "degree"]);
                    for (i, p) in sample.points.iter().enumerate() {
                        t.push(vec![
                            i.into(), p.position[0].into(), p.position[1].into(), p.weight.into(), degree[i].into(),
                        ]);
                    }
                }
                "discretize" => {
                    let d = discretize(&sample)?;
                    t = Table::new(&["u", "v", "weight"]);
                    t.meta("cells_per_side", d.cells_per_side);
                    t.meta("inter_cell_edges", d.inter_cell_edges);
                    t.meta("internal_edges", d.internal_edges);
                    t.meta("isolated_cells", d.isolated.len());
                    for e in d.network.edges() {
                        t.push(vec![e.u.into(), e.v.into(), e.conductance.into()]);
                    }
                }
                _ => {
                    let d = discretize(&sample)?;
                    let steps = cfg.count("steps", 1..=100_000_000)?;
                    let trials = cfg.count("trials", 1..=100_000)? as usize;
                    let mut rng = trial_rng(cfg.seed, 1);
                    let w = components_and_walk(&d.network, steps, trials, &mut rng)?;
                    t = Table::new(&["trial", "visits", "distinct_sites", "max_displacement"]);
                    t.meta("start_cell", format!("{:?}", d.cell(w.start)));
                    t.meta("component_size", w.component_size);
                    t.meta("components", w.sizes.len());
                    t.meta("largest_component", w.largest_component());
                    for (i, tr) in w.stats.trials.iter().enumerate() {
                        t.push(vec![
                            i.into(), tr.visits_to_origin.into(), tr.distinct_sites.into(), tr.max_displacement.into(),
                        ]);
                    }
                }
            }
            t.meta("points", sample.points.len());
            t.meta("edges", sample.edges.len());
            Ok(Outcome::new(t))
        }
    }
}

/// A path 0 – 1 – … – (n−1) plus random extra edges, conductances in [0.25, 4].
fn random_network<R: Rng>(vertices: usize, edges: usize, rng: &mut R) -> Result<WeightedNetwork> {
    let mut net = WeightedNetwork::new(vertices);
    for i in 1..vertices {
        net.add_edge(i - 1, i, 4f64.powf(rng.random_range(-1.0..=1.0)))?;
    }
    for _ in vertices - 1..edges {
        let u = rng.random_range(0..vertices);
        let v = (u + rng.random_range(1..vertices)) % vertices;
        net.add_edge(u, v, 4f64.powf(rng.random_range(-1.0..=1.0)))?;
    }
    Ok(net)
}

fn domination(cfg: &ExperimentConfig) -> Result<Outcome> {
    let exact = cfg.text("mode") == "exact";
    let vertices = cfg.count("vertices", 2..=2000)? as usize;
    let edges = cfg.count("edges", vertices as u64 - 1..=if exact { 20 } else { 100_000 })? as usize;
    let sampler = TwoPointWeights::new(cfg.real("p"))?;
    let trials = cfg.count("trials", 2..=1_000_000)? as usize;
    let mut t = Table::new(&["network", "baseline", "expectation", "std_error", "holds"]);
    for i in 0..cfg.count("networks", 1..=100_000)? {
        let mut rng = trial_rng(cfg.seed, i);
        let net = random_network(vertices, edges, &mut rng)?;
        let (a, b) = ([0], [vertices - 1]);
        let row: Vec<Cell> = if exact {
            let r = domination_exact(&net, &sampler, &a, &b)?;
            vec![i.into(), r.baseline.into(), r.expectation.into(), 0.0.into(), r.holds().into()]
        } else {
            let r = domination_test(&net, &sampler, &a, &b, trials, &mut rng)?;
            vec![i.into(), r.baseline.into(), r.mean.into(), r.std_error.into(), r.holds().into()]
        };
        t.push(row);
    }
    Ok(Outcome::new(t).flag_rows("holds"))
}
