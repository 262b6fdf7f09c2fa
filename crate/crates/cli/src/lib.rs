//! The `arb` command line: dataset generation, GNN training, single-network
//! solves and the full method comparison.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use arb_core::bench::{records_to_csv, run_benchmark, summarize, BenchConfig, GnnModel, Method};
use arb_core::cycle::{brute_force_best_circulation, circulation_plan, circulation_profit, detect_arbitrage};
use arb_core::exchange::generate_dataset_with;
use arb_core::format::{load_dataset, load_network, save_dataset};
use arb_core::gnn::{infer, load_checkpoint, save_checkpoint, train_with, GnnConfig};
use arb_core::lp::{build_arbitrage_lp, simplex_solve, ArbLpConfig, LpStatus};
use arb_core::par::Execution;
use arb_core::{Error, ExchangeNetwork, GeneratorConfig, InvestmentMode, TradePlan};
use clap::{Args, Parser, Subcommand, ValueEnum};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "arb", version, about = "Currency arbitrage detection and benchmarking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a seeded synthetic dataset of exchange networks.
    Generate(GenerateArgs),
    /// Train the GNN on the first 80% of a dataset and save a checkpoint.
    Train(TrainArgs),
    /// Solve one network with one method and print the plan and its yield.
    Solve(SolveArgs),
    /// Run every method over a dataset and write the comparison report.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long, default_value_t = 4)]
    n: usize,
    #[arg(long, default_value_t = 1000)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Half-width of the log-rate perturbation.
    #[arg(long, default_value_t = 0.05)]
    noise: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 100)]
    epochs: usize,
    #[arg(long, default_value_t = 0.001)]
    lr: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value_t = 3)]
    layers: usize,
    #[arg(long, default_value_t = 64)]
    hidden: usize,
    #[arg(long, default_value_t = 32)]
    batch_size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    budget: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::BudgetCap)]
    mode: ModeArg,
    /// Accumulate batch gradients on a thread pool.
    #[arg(long)]
    parallel: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Single-network file.
    #[arg(long)]
    network: PathBuf,
    /// Checkpoint for `--method gnn`.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    budget: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::BudgetCap)]
    mode: ModeArg,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long)]
    data: PathBuf,
    /// Checkpoint; required when the gnn method is selected.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    budget: f64,
    /// Output directory for summary.csv, summary.txt and records.csv.
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated subset of gnn, bellman_ford, lp_simplex, brute_force.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<MethodArg>>,
    #[arg(long, default_value_t = 3)]
    repetitions: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::BudgetCap)]
    mode: ModeArg,
    /// Only benchmark the last 20% of the dataset.
    #[arg(long)]
    held_out: bool,
    /// Process networks concurrently. Timings then include contention.
    #[arg(long)]
    parallel: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum MethodArg {
    #[value(alias = "gnn")]
    Gnn,
    #[value(name = "bf", alias = "bellman_ford")]
    BellmanFord,
    #[value(name = "lp", alias = "lp_simplex")]
    Lp,
    #[value(name = "brute", alias = "brute_force")]
    Brute,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Gnn => Method::Gnn,
            MethodArg::BellmanFord => Method::BellmanFord,
            MethodArg::Lp => Method::LpSimplex,
            MethodArg::Brute => Method::BruteForce,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ModeArg {
    BudgetCap,
    Equality,
}

impl From<ModeArg> for InvestmentMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::BudgetCap => InvestmentMode::BudgetCap,
            ModeArg::Equality => InvestmentMode::EqualityInvestment,
        }
    }
}

fn execution(parallel: bool) -> Execution {
    if parallel {
        Execution::Parallel
    } else {
        Execution::Sequential
    }
}

/// Parses `argv` (program name first) and runs the command. Returns the exit
/// code: 0 on success, 1 on usage errors, 2 on runtime errors.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    let result = match cli.command {
        Command::Generate(a) => generate(a, out),
        Command::Train(a) => train(a, out),
        Command::Solve(a) => solve(a, out),
        Command::Bench(a) => bench(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_RUNTIME
        }
    }
}

type CmdResult = Result<(), Error>;

fn generate(a: GenerateArgs, out: &mut dyn Write) -> CmdResult {
    let config = GeneratorConfig {
        n: a.n,
        count: a.count,
        seed: a.seed,
        noise: a.noise,
        ..Default::default()
    };
    let ds = generate_dataset_with(&config, Execution::Parallel)?;
    save_dataset(&ds, &a.out)?;
    writeln!(
        out,
        "wrote {} networks of {} currencies to {}",
        ds.len(),
        a.n,
        a.out.display()
    )?;
    Ok(())
}

fn train(a: TrainArgs, out: &mut dyn Write) -> CmdResult {
    let ds = load_dataset(&a.data)?;
    let (training, _) = ds.split();
    let cfg = GnnConfig {
        layers: a.layers,
        hidden: a.hidden,
        lambda: a.lambda,
        learning_rate: a.lr,
        epochs: a.epochs,
        batch_size: a.batch_size,
        seed: a.seed,
        budget: a.budget,
        mode: a.mode.into(),
        ..Default::default()
    };
    let report = train_with(training, &cfg, execution(a.parallel))?;
    save_checkpoint(&cfg, &report.params, &a.out)?;
    let first = report.epoch_losses.first().copied().unwrap_or(f64::NAN);
    let last = report.epoch_losses.last().copied().unwrap_or(f64::NAN);
    writeln!(
        out,
        "trained on {} networks for {} epochs in {:.2} s; relaxed objective {first:.6} -> {last:.6}",
        training.len(),
        cfg.epochs,
        report.wall_time.as_secs_f64()
    )?;
    writeln!(out, "saved checkpoint to {}", a.out.display())?;
    Ok(())
}

fn solve(a: SolveArgs, out: &mut dyn Write) -> CmdResult {
    let net = load_network(&a.network)?;
    let b = a.budget;
    let method: Method = a.method.into();
    let (plan, profit, note) = match method {
        Method::LpSimplex => {
            let lp = build_arbitrage_lp(
                &net,
                &ArbLpConfig {
                    budget: b,
                    mode: a.mode.into(),
                },
            )?;
            let sol = simplex_solve(&lp)?;
            match (sol.status, sol.x) {
                (LpStatus::Optimal, Some(x)) => {
                    let objective = sol.objective.unwrap_or(0.0);
                    (
                        TradePlan::from_lp_vector(net.n(), &x)?,
                        objective,
                        format!("optimal after {} pivots", sol.iterations),
                    )
                }
                (status, _) => (TradePlan::zeros(net.n()), 0.0, format!("{status:?}").to_lowercase()),
            }
        }
        Method::BellmanFord => match detect_arbitrage(&net) {
            Some(cycle) => {
                let note = format!("cycle {} (product {})", cycle_label(&net, &cycle.nodes), cycle.product);
                (
                    circulation_plan(&net, &cycle, b)?,
                    circulation_profit(&net, &cycle, b)?,
                    note,
                )
            }
            None => (TradePlan::zeros(net.n()), 0.0, "no negative cycle".into()),
        },
        Method::BruteForce => match brute_force_best_circulation(&net, net.n(), b)? {
            Some((cycle, profit)) => {
                let note = format!("cycle {} (product {})", cycle_label(&net, &cycle.nodes), cycle.product);
                (circulation_plan(&net, &cycle, b)?, profit, note)
            }
            None => (TradePlan::zeros(net.n()), 0.0, "no profitable cycle".into()),
        },
        Method::Gnn => {
            let path = a
                .model
                .as_ref()
                .ok_or_else(|| Error::MissingModel("--model is required for --method gnn".into()))?;
            let (cfg, params) = load_checkpoint(path)?;
            let res = infer(&params, &net, &cfg, b)?;
            let note = format!(
                "raw plan {}, relaxed objective {:.6}",
                if res.raw_feasible { "feasible" } else { "repaired" },
                res.raw_loss
            );
            (res.repaired, res.feasible_yield * b, note)
        }
    };
    writeln!(out, "method: {method}")?;
    writeln!(out, "status: {note}")?;
    write_plan(out, &net, &plan)?;
    writeln!(out, "profit: {profit}")?;
    writeln!(out, "yield: {:.4}%", 100.0 * profit / b)?;
    Ok(())
}

fn cycle_label(net: &ExchangeNetwork, nodes: &[usize]) -> String {
    let mut names: Vec<&str> = nodes.iter().map(|&i| net.currencies()[i].as_str()).collect();
    names.push(&net.currencies()[nodes[0]]);
    names.join(" -> ")
}

fn write_plan(out: &mut dyn Write, net: &ExchangeNetwork, plan: &TradePlan) -> std::io::Result<()> {
    writeln!(out, "plan (row sells, column buys):")?;
    write!(out, "{:>6}", "")?;
    for c in net.currencies() {
        write!(out, " {c:>12}")?;
    }
    writeln!(out)?;
    for (i, c) in net.currencies().iter().enumerate() {
        write!(out, "{c:>6}")?;
        for j in 0..net.n() {
            write!(out, " {:>12.8}", plan.get(i, j))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

fn bench(a: BenchArgs, out: &mut dyn Write) -> CmdResult {
    let ds = load_dataset(&a.data)?;
    let networks = if a.held_out { ds.split().1 } else { &ds.networks[..] };
    let methods: Vec<Method> = match &a.methods {
        Some(list) => list.iter().map(|&m| m.into()).collect(),
        None if a.model.is_some() => Method::ALL.to_vec(),
        None => Method::ALL.iter().copied().filter(|&m| m != Method::Gnn).collect(),
    };
    let model = match &a.model {
        Some(path) => {
            let (config, params) = load_checkpoint(path)?;
            Some(GnnModel { config, params })
        }
        None => None,
    };
    let cfg = BenchConfig {
        budget: a.budget,
        methods,
        repetitions: a.repetitions,
        execution: execution(a.parallel),
        mode: a.mode.into(),
        model,
    };
    let results = run_benchmark(networks, &cfg)?;
    let report = summarize(&results);
    fs::create_dir_all(&a.out)?;
    fs::write(a.out.join("summary.csv"), report.to_csv())?;
    fs::write(a.out.join("summary.txt"), report.to_text())?;
    fs::write(a.out.join("records.csv"), records_to_csv(&results))?;
    write!(out, "{}", report.to_text())?;
    writeln!(out, "report written to {}", a.out.display())?;
    Ok(())
}
