//! Trains the GNN once per penalty weight and compares held-out feasible
//! yield with the LP optimum.
//!
//! ```text
//! cargo run --release -p arb-core --example lambda_sweep -- 1 10 100
//! cargo run --release -p arb-core --example lambda_sweep -- --equality 1 10
//! ```

use arb_core::exchange::generate_dataset;
use arb_core::gnn::{infer, train, GnnConfig};
use arb_core::lp::{build_arbitrage_lp, simplex_solve, ArbLpConfig};
use arb_core::{GeneratorConfig, InvestmentMode};

fn main() {
    let mut mode = InvestmentMode::BudgetCap;
    let mut lambdas = Vec::new();
    for arg in std::env::args().skip(1) {
        if arg == "--equality" {
            mode = InvestmentMode::EqualityInvestment;
        } else {
            lambdas.push(arg.parse::<f64>().expect("lambda values must be numbers"));
        }
    }
    if lambdas.is_empty() {
        lambdas = vec![1.0, 10.0, 100.0];
    }

    let ds = generate_dataset(&GeneratorConfig {
        count: 1000,
        seed: 20_240_601,
        ..Default::default()
    })
    .unwrap();
    let (training, held_out) = ds.split();
    let lp: f64 = held_out
        .iter()
        .map(|net| {
            simplex_solve(&build_arbitrage_lp(net, &ArbLpConfig::default()).unwrap())
                .unwrap()
                .objective
                .unwrap()
        })
        .sum::<f64>()
        / held_out.len() as f64;

    println!(
        "{:>8} {:>12} {:>12} {:>10} {:>8}",
        "lambda", "first", "last", "gnn %", "ratio"
    );
    for lambda in lambdas {
        let cfg = GnnConfig {
            lambda,
            mode,
            ..Default::default()
        };
        let report = train(training, &cfg).unwrap();
        let gnn: f64 = held_out
            .iter()
            .map(|net| infer(&report.params, net, &cfg, 1.0).unwrap().feasible_yield)
            .sum::<f64>()
            / held_out.len() as f64;
        println!(
            "{lambda:>8} {:>12.6} {:>12.6} {:>10.4} {:>8.3}",
            report.epoch_losses[0],
            report.epoch_losses.last().unwrap(),
            100.0 * gnn,
            gnn / lp
        );
    }
    println!("LP mean yield {:.4}%", 100.0 * lp);
}
