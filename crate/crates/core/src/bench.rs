//! Benchmark harness: runs each method over a dataset, records yield and
//! solve time per network, and summarizes the results as CSV and text tables.

use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::time::Instant;

use crate::cycle::{brute_force_best_circulation, circulation_profit, detect_arbitrage, BRUTE_FORCE_MAX_N};
use crate::error::{Error, Result};
use crate::exchange::ExchangeNetwork;
use crate::gnn::{infer, GnnConfig, GnnParams};
use crate::lp::{build_arbitrage_lp, simplex_solve, ArbLpConfig, InvestmentMode, LpStatus};
use crate::par::{self, Execution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Gnn,
    BellmanFord,
    LpSimplex,
    BruteForce,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Gnn, Method::BellmanFord, Method::LpSimplex, Method::BruteForce];

    pub fn id(self) -> &'static str {
        match self {
            Method::Gnn => "gnn",
            Method::BellmanFord => "bellman_ford",
            Method::LpSimplex => "lp_simplex",
            Method::BruteForce => "brute_force",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gnn" => Ok(Method::Gnn),
            "bellman_ford" | "bf" => Ok(Method::BellmanFord),
            "lp_simplex" | "lp" => Ok(Method::LpSimplex),
            "brute_force" | "brute" => Ok(Method::BruteForce),
            _ => Err(Error::Config(format!(
                "unknown method {s:?} (expected gnn, bellman_ford, lp_simplex or brute_force)"
            ))),
        }
    }
}

/// Outcome class of one method on one network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordStatus {
    /// The method's plan is executable as produced.
    Feasible,
    /// The LP has no feasible point (equality mode only); yield counts as 0.
    Infeasible,
    /// No profitable cycle was found; yield is 0.
    NoCycle,
    /// The GNN's raw plan violated a constraint and was repaired.
    Repaired,
}

impl RecordStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RecordStatus::Feasible => "feasible",
            RecordStatus::Infeasible => "infeasible",
            RecordStatus::NoCycle => "no_cycle",
            RecordStatus::Repaired => "repaired",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkRecord {
    pub index: usize,
    /// Profit divided by the budget.
    pub yield_fraction: f64,
    /// Median wall time over the configured repetitions.
    pub time_ms: f64,
    pub status: RecordStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodResult {
    pub method: Method,
    pub records: Vec<NetworkRecord>,
}

impl MethodResult {
    pub fn mean_yield_percent(&self) -> f64 {
        mean(self.records.iter().map(|r| r.yield_fraction)) * 100.0
    }

    pub fn mean_time_ms(&self) -> f64 {
        mean(self.records.iter().map(|r| r.time_ms))
    }

    pub fn count(&self, status: RecordStatus) -> usize {
        self.records.iter().filter(|r| r.status == status).count()
    }
}

fn mean(values: impl ExactSizeIterator<Item = f64>) -> f64 {
    let len = values.len();
    if len == 0 {
        return 0.0;
    }
    values.sum::<f64>() / len as f64
}

/// A trained model ready for inference.
#[derive(Debug, Clone, PartialEq)]
pub struct GnnModel {
    pub config: GnnConfig,
    pub params: GnnParams,
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub budget: f64,
    pub methods: Vec<Method>,
    /// Timed runs per network; the median is reported.
    pub repetitions: usize,
    /// Sequential by default so each timing sees an otherwise idle machine.
    pub execution: Execution,
    /// Investment mode of the LP baseline.
    pub mode: InvestmentMode,
    pub model: Option<GnnModel>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            budget: 1.0,
            methods: Method::ALL.to_vec(),
            repetitions: 3,
            execution: Execution::Sequential,
            mode: InvestmentMode::BudgetCap,
            model: None,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.budget.is_finite() && self.budget > 0.0) {
            return Err(Error::validation(
                "budget",
                format!("must be positive, got {}", self.budget),
            ));
        }
        if self.repetitions == 0 {
            return Err(Error::validation("repetitions", "must be at least 1"));
        }
        if self.methods.is_empty() {
            return Err(Error::validation("methods", "must name at least one method"));
        }
        Ok(())
    }
}

/// Median of a nonempty sample. Even-sized samples average the middle pair.
pub fn median(samples: &mut [f64]) -> f64 {
    assert!(!samples.is_empty(), "median of an empty sample");
    samples.sort_by(f64::total_cmp);
    let mid = samples.len() / 2;
    if samples.len() % 2 == 1 {
        samples[mid]
    } else {
        0.5 * (samples[mid - 1] + samples[mid])
    }
}

/// Runs one method on `net`, returning `(yield, status)`.
fn solve_once(method: Method, net: &ExchangeNetwork, cfg: &BenchConfig) -> Result<(f64, RecordStatus)> {
    let b = cfg.budget;
    match method {
        Method::LpSimplex => {
            let lp = build_arbitrage_lp(
                net,
                &ArbLpConfig {
                    budget: b,
                    mode: cfg.mode,
                },
            )?;
            let sol = simplex_solve(&lp)?;
            match (sol.status, sol.objective) {
                (LpStatus::Optimal, Some(obj)) => Ok((obj / b, RecordStatus::Feasible)),
                (LpStatus::Infeasible, _) => Ok((0.0, RecordStatus::Infeasible)),
                (status, _) => Err(Error::Solver {
                    iterations: sol.iterations,
                    basis: Vec::new(),
                    reason: format!("unexpected {status:?} on a budgeted arbitrage LP"),
                }),
            }
        }
        Method::BellmanFord => match detect_arbitrage(net) {
            Some(cycle) => Ok((circulation_profit(net, &cycle, b)? / b, RecordStatus::Feasible)),
            None => Ok((0.0, RecordStatus::NoCycle)),
        },
        Method::BruteForce => match brute_force_best_circulation(net, net.n(), b)? {
            Some((_, profit)) => Ok((profit / b, RecordStatus::Feasible)),
            None => Ok((0.0, RecordStatus::NoCycle)),
        },
        Method::Gnn => {
            let model = cfg
                .model
                .as_ref()
                .ok_or_else(|| Error::MissingModel("the gnn method needs a trained model".into()))?;
            let out = infer(&model.params, net, &model.config, b)?;
            let status = if out.raw_feasible {
                RecordStatus::Feasible
            } else {
                RecordStatus::Repaired
            };
            Ok((out.feasible_yield, status))
        }
    }
}

/// Runs `method` over every network. Only the solve itself is timed: the
/// dataset is already in memory and GNN training happened beforehand.
pub fn run_method(method: Method, networks: &[ExchangeNetwork], cfg: &BenchConfig) -> Result<MethodResult> {
    cfg.validate()?;
    if networks.is_empty() {
        return Err(Error::EmptyDataset);
    }
    match method {
        Method::Gnn if cfg.model.is_none() => {
            return Err(Error::MissingModel("the gnn method needs a trained model".into()));
        }
        Method::BruteForce => {
            if let Some(big) = networks.iter().find(|net| net.n() > BRUTE_FORCE_MAX_N) {
                return Err(Error::TooLarge {
                    size: big.n(),
                    limit: BRUTE_FORCE_MAX_N,
                });
            }
        }
        _ => {}
    }
    let records = par::try_map_indexed(cfg.execution, networks.len(), |index| {
        let net = &networks[index];
        let mut times = Vec::with_capacity(cfg.repetitions);
        let mut outcome = None;
        for _ in 0..cfg.repetitions {
            let start = Instant::now();
            let result = std::hint::black_box(solve_once(method, net, cfg)?);
            times.push(start.elapsed().as_secs_f64() * 1e3);
            outcome = Some(result);
        }
        let (yield_fraction, status) = outcome.expect("at least one repetition");
        Ok::<_, Error>(NetworkRecord {
            index,
            yield_fraction,
            time_ms: median(&mut times),
            status,
        })
    })?;
    Ok(MethodResult { method, records })
}

/// Runs every configured method in declared order.
pub fn run_benchmark(networks: &[ExchangeNetwork], cfg: &BenchConfig) -> Result<Vec<MethodResult>> {
    cfg.methods.iter().map(|&m| run_method(m, networks, cfg)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub method: Method,
    pub networks: usize,
    pub mean_yield_percent: f64,
    pub mean_time_ms: f64,
    pub feasible: usize,
    pub infeasible: usize,
    pub no_cycle: usize,
    pub repaired: usize,
}

/// One row per method, in the order the results were given.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub rows: Vec<SummaryRow>,
}

pub const SUMMARY_CSV_HEADER: &str =
    "method,networks,mean_yield_pct,mean_time_ms,feasible,infeasible,no_cycle,repaired";
pub const RECORDS_CSV_HEADER: &str = "method,index,yield,time_ms,status";

pub fn summarize(results: &[MethodResult]) -> Report {
    let rows = results
        .iter()
        .map(|r| SummaryRow {
            method: r.method,
            networks: r.records.len(),
            mean_yield_percent: r.mean_yield_percent(),
            mean_time_ms: r.mean_time_ms(),
            feasible: r.count(RecordStatus::Feasible),
            infeasible: r.count(RecordStatus::Infeasible),
            no_cycle: r.count(RecordStatus::NoCycle),
            repaired: r.count(RecordStatus::Repaired),
        })
        .collect();
    Report { rows }
}

impl Report {
    /// Comma-separated summary with a [`SUMMARY_CSV_HEADER`] first line.
    pub fn to_csv(&self) -> String {
        let mut out = format!("{SUMMARY_CSV_HEADER}\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.method,
                r.networks,
                r.mean_yield_percent,
                r.mean_time_ms,
                r.feasible,
                r.infeasible,
                r.no_cycle,
                r.repaired
            );
        }
        out
    }

    /// Aligned table for terminals.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<14} {:>10} {:>12} {:>9} {:>11} {:>9} {:>9}",
            "Method", "Yield (%)", "Time (ms)", "Feasible", "Infeasible", "NoCycle", "Repaired"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<14} {:>10.3} {:>12.4} {:>9} {:>11} {:>9} {:>9}",
                r.method.id(),
                r.mean_yield_percent,
                r.mean_time_ms,
                r.feasible,
                r.infeasible,
                r.no_cycle,
                r.repaired
            );
        }
        out
    }
}

/// Per-network records of every method with a [`RECORDS_CSV_HEADER`] first line.
pub fn records_to_csv(results: &[MethodResult]) -> String {
    let mut out = format!("{RECORDS_CSV_HEADER}\n");
    for r in results {
        for rec in &r.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.method,
                rec.index,
                rec.yield_fraction,
                rec.time_ms,
                rec.status.as_str()
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exchange::{generate_dataset, GeneratorConfig};
    use crate::gnn::init_params;

    fn dataset(delta: f64, count: usize) -> Vec<ExchangeNetwork> {
        generate_dataset(&GeneratorConfig {
            count,
            noise: delta,
            seed: 5,
            ..Default::default()
        })
        .unwrap()
        .networks
    }

    fn model() -> GnnModel {
        let config = GnnConfig {
            hidden: 8,
            layers: 2,
            ..Default::default()
        };
        let params = init_params(&config, 4, 1).unwrap();
        GnnModel { config, params }
    }

    #[test]
    fn lp_on_consistent_markets_yields_nothing() {
        let nets = dataset(0.0, 20);
        let r = run_method(Method::LpSimplex, &nets, &BenchConfig::default()).unwrap();
        assert_eq!(r.records.len(), 20);
        assert!(r.mean_yield_percent().abs() < 1e-7);
    }

    #[test]
    fn record_invariants_hold_for_every_method() {
        let nets = dataset(0.05, 30);
        let cfg = BenchConfig {
            model: Some(model()),
            ..Default::default()
        };
        for result in run_benchmark(&nets, &cfg).unwrap() {
            assert_eq!(result.records.len(), nets.len());
            for (k, rec) in result.records.iter().enumerate() {
                assert_eq!(rec.index, k);
                assert!(rec.yield_fraction.is_finite());
                assert!(rec.time_ms.is_finite() && rec.time_ms >= 0.0);
            }
        }
    }

    #[test]
    fn yields_do_not_depend_on_execution() {
        let nets = dataset(0.05, 30);
        let seq = BenchConfig {
            model: Some(model()),
            ..Default::default()
        };
        let par = BenchConfig {
            execution: Execution::Parallel,
            ..seq.clone()
        };
        let a = run_benchmark(&nets, &seq).unwrap();
        let b = run_benchmark(&nets, &par).unwrap();
        for (x, y) in a.iter().zip(&b) {
            let yx: Vec<_> = x.records.iter().map(|r| (r.yield_fraction, r.status)).collect();
            let yy: Vec<_> = y.records.iter().map(|r| (r.yield_fraction, r.status)).collect();
            assert_eq!(yx, yy);
        }
    }

    #[test]
    fn gnn_without_model_is_an_error() {
        let nets = dataset(0.05, 2);
        let err = run_method(Method::Gnn, &nets, &BenchConfig::default()).unwrap_err();
        assert!(matches!(err, Error::MissingModel(_)));
        let err = run_method(Method::LpSimplex, &[], &BenchConfig::default()).unwrap_err();
        assert!(matches!(err, Error::EmptyDataset));
    }

    #[test]
    fn median_of_repetitions() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0]), 2.5);
        assert_eq!(median(&mut [7.0]), 7.0);
    }

    fn fixed(method: Method, yields: &[f64]) -> MethodResult {
        MethodResult {
            method,
            records: yields
                .iter()
                .enumerate()
                .map(|(index, &y)| NetworkRecord {
                    index,
                    yield_fraction: y,
                    time_ms: 1.0,
                    status: if y > 0.0 {
                        RecordStatus::Feasible
                    } else {
                        RecordStatus::NoCycle
                    },
                })
                .collect(),
        }
    }

    #[test]
    fn summary_rows_follow_declared_order() {
        let report = summarize(&[
            fixed(Method::LpSimplex, &[0.05, 0.07]),
            fixed(Method::BellmanFord, &[0.0, 0.0]),
        ]);
        assert_eq!(report.rows.len(), 2);
        assert_eq!(report.rows[0].method, Method::LpSimplex);
        assert!((report.rows[0].mean_yield_percent - 6.0).abs() < 1e-12);
        assert_eq!(report.rows[1].mean_yield_percent, 0.0);
        assert_eq!(report.rows[1].no_cycle, 2);
        let csv = report.to_csv();
        assert!(csv.starts_with(SUMMARY_CSV_HEADER));
        assert_eq!(csv.lines().count(), 3);
        assert!(report.to_text().lines().nth(2).unwrap().contains("0.000"));
    }

    #[test]
    fn method_ids_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.id().parse::<Method>().unwrap(), m);
        }
        assert_eq!("lp".parse::<Method>().unwrap(), Method::LpSimplex);
        assert!("simplex".parse::<Method>().is_err());
    }
}
