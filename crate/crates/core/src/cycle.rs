//! Negative-cycle arbitrage detection.
//!
//! With edge weights `w_ij = -ln r_ij`, a cycle's weight sum is minus the log
//! of its rate product, so arbitrage cycles are exactly negative cycles.

use crate::error::{Error, Result};
use crate::exchange::ExchangeNetwork;
use crate::lp::TradePlan;
use crate::tol;

/// Largest `n` accepted by the exhaustive cycle search.
pub const BRUTE_FORCE_MAX_N: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct LogGraph {
    n: usize,
    weights: Vec<f64>,
}

impl LogGraph {
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }

    pub fn cycle_weight(&self, nodes: &[usize]) -> f64 {
        cycle_edges(nodes).map(|(a, b)| self.weight(a, b)).sum()
    }
}

pub fn to_log_graph(net: &ExchangeNetwork) -> LogGraph {
    let n = net.n();
    let mut weights = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                weights[i * n + j] = -net.rate(i, j).ln();
            }
        }
    }
    LogGraph { n, weights }
}

fn cycle_edges(nodes: &[usize]) -> impl Iterator<Item = (usize, usize)> + '_ {
    let k = nodes.len();
    (0..k).map(move |t| (nodes[t], nodes[(t + 1) % k]))
}

/// A simple directed cycle `nodes[0] -> nodes[1] -> .. -> nodes[0]`.
///
/// Reports are rotated so `nodes[0]` is the start that minimizes the traded
/// volume of the cycle's circulation (see [`circulation_profit`]), which is
/// the most profitable place to hold the surplus.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleReport {
    pub nodes: Vec<usize>,
    pub product: f64,
    /// `product - 1`.
    pub yield_fraction: f64,
}

impl CycleReport {
    pub fn new(net: &ExchangeNetwork, nodes: &[usize]) -> Result<Self> {
        validate_cycle(net, nodes)?;
        let k = nodes.len();
        let volume = |start: usize| {
            let mut acc = 1.0;
            let mut total = 1.0;
            for t in 0..k - 1 {
                acc *= net.rate(nodes[(start + t) % k], nodes[(start + t + 1) % k]);
                total += acc;
            }
            total
        };
        let start = (0..k)
            .map(|s| (s, volume(s)))
            .min_by(|(sa, va), (sb, vb)| va.total_cmp(vb).then(nodes[*sa].cmp(&nodes[*sb])))
            .map(|(s, _)| s)
            .expect("k >= 2");
        let nodes: Vec<usize> = (0..k).map(|t| nodes[(start + t) % k]).collect();
        let product = cycle_edges(&nodes).map(|(a, b)| net.rate(a, b)).product::<f64>();
        Ok(Self {
            nodes,
            product,
            yield_fraction: product - 1.0,
        })
    }
}

fn validate_cycle(net: &ExchangeNetwork, nodes: &[usize]) -> Result<()> {
    let n = net.n();
    if nodes.len() < 2 || nodes.len() > n {
        return Err(Error::validation(
            "cycle",
            format!("length {} outside 2..={n}", nodes.len()),
        ));
    }
    for (t, &v) in nodes.iter().enumerate() {
        if v >= n {
            return Err(Error::validation(
                format!("cycle[{t}]"),
                format!("index {v} out of range for n = {n}"),
            ));
        }
        if nodes[..t].contains(&v) {
            return Err(Error::validation(format!("cycle[{t}]"), format!("node {v} repeats")));
        }
    }
    Ok(())
}

/// Finds some negative cycle, if any exists.
///
/// Runs `n` relaxation rounds from a virtual source joined to every node by a
/// zero-weight edge; if an edge is still relaxable afterwards, walking `n`
/// predecessor steps lands on a cycle of the predecessor graph, which is
/// extracted and returned. Relaxations must improve a distance by more than
/// a tiny margin so that rounding noise in consistent markets cannot sustain
/// a spurious cycle.
pub fn bellman_ford_negative_cycle(g: &LogGraph) -> Option<Vec<usize>> {
    const MARGIN: f64 = 1e-14;
    let n = g.n;
    let mut dist = vec![0.0; n];
    let mut pred: Vec<Option<usize>> = vec![None; n];

    let relax = |dist: &mut [f64], pred: &mut [Option<usize>]| -> Option<usize> {
        let mut last = None;
        for i in 0..n {
            for j in 0..n {
                if i != j && dist[i] + g.weight(i, j) < dist[j] - MARGIN {
                    dist[j] = dist[i] + g.weight(i, j);
                    pred[j] = Some(i);
                    last = Some(j);
                }
            }
        }
        last
    };

    for _ in 0..n {
        relax(&mut dist, &mut pred)?;
    }
    let mut v = relax(&mut dist, &mut pred)?;
    for _ in 0..n {
        v = pred[v].expect("relaxed nodes have predecessors");
    }
    let mut cycle = vec![v];
    let mut u = pred[v].expect("on cycle");
    while u != v {
        cycle.push(u);
        u = pred[u].expect("on cycle");
    }
    cycle.reverse();
    (g.cycle_weight(&cycle) < tol::NEGATIVE_CYCLE).then_some(cycle)
}

/// Bellman-Ford detection reported against the originating network.
pub fn detect_arbitrage(net: &ExchangeNetwork) -> Option<CycleReport> {
    let cycle = bellman_ford_negative_cycle(&to_log_graph(net))?;
    Some(CycleReport::new(net, &cycle).expect("extracted cycles are simple"))
}

/// Every simple cycle of length `2..=max_len`, each listed once starting at
/// its smallest node.
pub fn simple_cycles(n: usize, max_len: usize) -> Result<Vec<Vec<usize>>> {
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::TooLarge {
            size: n,
            limit: BRUTE_FORCE_MAX_N,
        });
    }
    fn extend(n: usize, max_len: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if path.len() >= 2 {
            out.push(path.clone());
        }
        if path.len() == max_len {
            return;
        }
        for v in path[0] + 1..n {
            if !path.contains(&v) {
                path.push(v);
                extend(n, max_len, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    for s in 0..n {
        extend(n, max_len.min(n), &mut vec![s], &mut out);
    }
    Ok(out)
}

/// The simple cycle with the largest rate product above `1 + 1e-12`; exact
/// ties go to the lexicographically smallest node sequence.
pub fn brute_force_best_cycle(net: &ExchangeNetwork, max_len: usize) -> Result<Option<CycleReport>> {
    let mut best: Option<CycleReport> = None;
    for nodes in simple_cycles(net.n(), max_len)? {
        let report = CycleReport::new(net, &nodes)?;
        if report.product <= 1.0 + 1e-12 {
            continue;
        }
        let better = match &best {
            None => true,
            Some(b) => report.product > b.product || (report.product == b.product && report.nodes < b.nodes),
        };
        if better {
            best = Some(report);
        }
    }
    Ok(best)
}

/// The most profitable single-cycle circulation over every simple cycle:
/// `(cycle, profit)`, or `None` when no cycle has product above `1 + 1e-12`.
pub fn brute_force_best_circulation(
    net: &ExchangeNetwork,
    max_len: usize,
    budget: f64,
) -> Result<Option<(CycleReport, f64)>> {
    let mut best: Option<(CycleReport, f64)> = None;
    for nodes in simple_cycles(net.n(), max_len)? {
        let report = CycleReport::new(net, &nodes)?;
        if report.product <= 1.0 + 1e-12 {
            continue;
        }
        let profit = circulation_profit(net, &report, budget)?;
        if best.as_ref().map_or(true, |(_, p)| profit > *p) {
            best = Some((report, profit));
        }
    }
    Ok(best)
}

/// Trade plan that runs `budget` units of total volume around `cycle`,
/// starting at `cycle.nodes[0]`.
///
/// Leg `t` trades `a * rho_1 * .. * rho_t`, so every intermediate currency is
/// passed on exactly as received and the whole surplus `a (P - 1)` lands back
/// on the start currency. `a` is chosen so the legs sum to `budget`.
pub fn circulation_plan(net: &ExchangeNetwork, cycle: &CycleReport, budget: f64) -> Result<TradePlan> {
    validate_cycle(net, &cycle.nodes)?;
    if !(budget.is_finite() && budget > 0.0) {
        return Err(Error::Config(format!("budget must be positive, got {budget}")));
    }
    let legs: Vec<(usize, usize)> = cycle_edges(&cycle.nodes).collect();
    let mut volumes = Vec::with_capacity(legs.len());
    let mut v = 1.0;
    for &(a, b) in &legs {
        volumes.push(v);
        v *= net.rate(a, b);
    }
    let scale = budget / volumes.iter().sum::<f64>();
    let mut plan = TradePlan::zeros(net.n());
    let mut amount = scale;
    for &(a, b) in &legs {
        plan.set(a, b, amount);
        // Next leg sells exactly what this leg delivers.
        amount *= net.rate(a, b);
    }
    Ok(plan)
}

/// Profit of [`circulation_plan`]: `a (P - 1)`.
pub fn circulation_profit(net: &ExchangeNetwork, cycle: &CycleReport, budget: f64) -> Result<f64> {
    let plan = circulation_plan(net, cycle, budget)?;
    let start = cycle.nodes[0];
    let product: f64 = cycle_edges(&cycle.nodes).map(|(a, b)| net.rate(a, b)).product();
    Ok(plan.outflow(start) * (product - 1.0))
}
