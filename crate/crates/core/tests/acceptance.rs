//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use arb_core::bench::{run_method, BenchConfig, GnnModel, Method};
use arb_core::cycle::{
    bellman_ford_negative_cycle, brute_force_best_circulation, brute_force_best_cycle, circulation_profit,
    detect_arbitrage, to_log_graph,
};
use arb_core::exchange::{generate_dataset, generate_network};
use arb_core::gnn::{
    build_node_features, default_holdings, infer, init_params, loss_and_gradient, repair_feasibility, train, GnnConfig,
    GnnParams,
};
use arb_core::lp::{
    build_arbitrage_lp, check_feasible, enumerate_vertices_oracle, simplex_solve, ArbLpConfig, LpStatus,
};
use arb_core::par::Execution;
use arb_core::{ExchangeNetwork, GeneratorConfig, InvestmentMode, NetworkDataset};

const BUDGET: f64 = 1.0;
const BOUND_TOL: f64 = 1e-6;
const DATASET_SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    detail: String,
    /// Bit patterns of every number the criterion produced, wall times excluded.
    fingerprint: Vec<u64>,
}

fn bits(values: impl IntoIterator<Item = f64>) -> Vec<u64> {
    values.into_iter().map(f64::to_bits).collect()
}

fn lp_yield(net: &ExchangeNetwork) -> f64 {
    let lp = build_arbitrage_lp(
        net,
        &ArbLpConfig {
            budget: BUDGET,
            mode: InvestmentMode::BudgetCap,
        },
    )
    .unwrap();
    let sol = simplex_solve(&lp).unwrap();
    assert_eq!(sol.status, LpStatus::Optimal);
    sol.objective.unwrap() / BUDGET
}

fn dataset(noise: f64, count: usize, seed: u64) -> NetworkDataset {
    generate_dataset(&GeneratorConfig {
        n: 4,
        count,
        seed,
        noise,
        ..Default::default()
    })
    .unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let deltas = [0.0, 0.05, 0.2];
    let modes = [InvestmentMode::BudgetCap, InvestmentMode::EqualityInvestment];
    let mut mismatches = 0;
    let mut worst = 0.0f64;
    let mut fp = Vec::new();
    for k in 0..200u64 {
        let noise = deltas[k as usize % 3];
        let mode = modes[(k as usize / 3) % 2];
        let cfg = GeneratorConfig {
            n: 3,
            count: 1,
            seed: 1000 + k,
            noise,
            ..Default::default()
        };
        let net = generate_network(&cfg, 0).unwrap();
        let lp = build_arbitrage_lp(&net, &ArbLpConfig { budget: BUDGET, mode }).unwrap();
        let s = simplex_solve(&lp).unwrap();
        let o = enumerate_vertices_oracle(&lp).unwrap();
        fp.push(s.status as u64);
        if s.status != o.status {
            mismatches += 1;
            continue;
        }
        if s.status == LpStatus::Optimal {
            let (a, b) = (s.objective.unwrap(), o.objective.unwrap());
            worst = worst.max((a - b).abs());
            fp.extend(bits([a]));
            fp.extend(bits(s.x.unwrap()));
        }
    }
    let elapsed = start.elapsed();
    Outcome {
        pass: mismatches == 0 && worst <= 1e-8 && elapsed < Duration::from_secs(10),
        detail: format!(
            "simplex vs vertex oracle on 200 n=3 LPs: {mismatches} status mismatches, max |dobj| {worst:.2e}, {:.2} s",
            elapsed.as_secs_f64()
        ),
        fingerprint: fp,
    }
}

fn criterion_2(model: &GnnModel) -> Outcome {
    let ds = dataset(0.0, 200, DATASET_SEED + 1);
    let (mut lp_worst, mut bf_found, mut brute_found, mut gnn_worst) = (0.0f64, 0, 0, f64::NEG_INFINITY);
    let mut fp = Vec::new();
    for net in &ds.networks {
        let y = lp_yield(net);
        lp_worst = lp_worst.max(y.abs());
        bf_found += detect_arbitrage(net).is_some() as usize;
        brute_found += brute_force_best_cycle(net, 4).unwrap().is_some() as usize;
        let g = infer(&model.params, net, &model.config, BUDGET).unwrap().feasible_yield;
        gnn_worst = gnn_worst.max(g);
        fp.extend(bits([y, g]));
    }
    Outcome {
        pass: lp_worst <= 1e-9 && bf_found == 0 && brute_found == 0 && gnn_worst <= 1e-6,
        detail: format!(
            "200 consistent n=4 markets: max |LP| {lp_worst:.2e}, BF cycles {bf_found}, brute cycles {brute_found}, max GNN yield {gnn_worst:.2e}"
        ),
        fingerprint: fp,
    }
}

fn criterion_3(nets: &[ExchangeNetwork]) -> Outcome {
    let (mut disagree, mut bad_product, mut found) = (0, 0, 0);
    let mut fp = Vec::new();
    for net in nets {
        let bf = bellman_ford_negative_cycle(&to_log_graph(net));
        let brute = brute_force_best_cycle(net, 4).unwrap();
        if bf.is_some() != brute.is_some() {
            disagree += 1;
        }
        if let Some(nodes) = &bf {
            found += 1;
            let product: f64 = (0..nodes.len())
                .map(|t| net.rate(nodes[t], nodes[(t + 1) % nodes.len()]))
                .product();
            bad_product += (product <= 1.0) as usize;
            fp.extend(bits([product]));
        }
        if let Some(c) = &brute {
            bad_product += (c.product <= 1.0) as usize;
            fp.extend(bits([c.product]));
        }
    }
    Outcome {
        pass: disagree == 0 && bad_product == 0,
        detail: format!(
            "1000 n=4 networks: {found} with cycles, {disagree} BF/brute disagreements, {bad_product} cycles with product <= 1"
        ),
        fingerprint: fp,
    }
}

fn criterion_4(nets: &[ExchangeNetwork], model: &GnnModel) -> Outcome {
    let mut violations = [0usize; 3];
    let mut fp = Vec::new();
    for net in nets {
        let bf = detect_arbitrage(net).map_or(0.0, |c| circulation_profit(net, &c, BUDGET).unwrap() / BUDGET);
        let brute = brute_force_best_circulation(net, 4, BUDGET)
            .unwrap()
            .map_or(0.0, |(_, p)| p / BUDGET);
        let lp = lp_yield(net);
        let gnn = infer(&model.params, net, &model.config, BUDGET).unwrap().feasible_yield;
        violations[0] += (bf > brute) as usize;
        violations[1] += (brute > lp + BOUND_TOL) as usize;
        violations[2] += (gnn > lp + BOUND_TOL) as usize;
        fp.extend(bits([bf, brute, lp, gnn]));
    }
    Outcome {
        pass: violations == [0, 0, 0],
        detail: format!(
            "bound chain on 1000 networks: BF > brute {}, brute > LP {}, GNN > LP {}",
            violations[0], violations[1], violations[2]
        ),
        fingerprint: fp,
    }
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let step = 1e-5;
    let mut worst = 0.0f64;
    let mut fp = Vec::new();
    for k in 0..20u64 {
        let cfg = GnnConfig {
            layers: 2,
            hidden: 8,
            seed: k,
            ..Default::default()
        };
        let params = init_params(&cfg, 3, 500 + k).unwrap();
        let gen = GeneratorConfig {
            n: 3,
            count: 1,
            seed: 900 + k,
            noise: 0.05,
            ..Default::default()
        };
        let net = generate_network(&gen, 0).unwrap();
        let feats = build_node_features(&net, &default_holdings(3, cfg.budget)).unwrap();
        let (_, grads) = loss_and_gradient(&params, &net, &feats, &cfg).unwrap();
        let loss_at = |p: &GnnParams| loss_and_gradient(p, &net, &feats, &cfg).unwrap().0;
        for (l, g) in grads.iter().enumerate() {
            for ((r, c), &analytic) in g.indexed_iter() {
                let mut plus = params.clone();
                plus.weights[l][[r, c]] += step;
                let mut minus = params.clone();
                minus.weights[l][[r, c]] -= step;
                let numeric = (loss_at(&plus) - loss_at(&minus)) / (2.0 * step);
                let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6);
                worst = worst.max(rel);
                fp.extend(bits([analytic]));
            }
        }
    }
    let elapsed = start.elapsed();
    Outcome {
        pass: worst < 1e-4 && elapsed < Duration::from_secs(30),
        detail: format!(
            "gradient check on 20 instances (n=3, H=8, L=2): max relative error {worst:.2e}, {:.2} s",
            elapsed.as_secs_f64()
        ),
        fingerprint: fp,
    }
}

struct Trained {
    model: GnnModel,
    outcome: Outcome,
}

fn criterion_6(ds: &NetworkDataset) -> Trained {
    let (training, held_out) = ds.split();
    let cfg = GnnConfig {
        layers: 3,
        hidden: 64,
        learning_rate: 0.001,
        epochs: 100,
        ..Default::default()
    };
    let report = train(training, &cfg).unwrap();
    let first = report.epoch_losses[0];
    let last = *report.epoch_losses.last().unwrap();
    let model = GnnModel {
        config: cfg,
        params: report.params,
    };
    let gnn: Vec<f64> = held_out
        .iter()
        .map(|net| infer(&model.params, net, &model.config, BUDGET).unwrap().feasible_yield)
        .collect();
    let lp: Vec<f64> = held_out.iter().map(lp_yield).collect();
    let gnn_mean = gnn.iter().sum::<f64>() / gnn.len() as f64;
    let lp_mean = lp.iter().sum::<f64>() / lp.len() as f64;
    let mut fp = bits(report.epoch_losses.iter().copied());
    fp.extend(bits(gnn));
    fp.extend(model.params.weights.iter().flat_map(|w| bits(w.iter().copied())));
    Trained {
        outcome: Outcome {
            pass: last >= first && gnn_mean >= 0.5 * lp_mean,
            detail: format!(
                "training (lambda {}): objective {first:.6} -> {last:.6}; held-out GNN yield {:.4}% vs LP {:.4}% (ratio {:.3}, need >= 0.5); {:.1} s",
                model.config.lambda,
                100.0 * gnn_mean,
                100.0 * lp_mean,
                gnn_mean / lp_mean,
                report.wall_time.as_secs_f64()
            ),
            fingerprint: fp,
        },
        model,
    }
}

fn criterion_7(nets: &[ExchangeNetwork], model: &GnnModel) -> Outcome {
    let cfg = BenchConfig {
        model: Some(model.clone()),
        execution: Execution::Sequential,
        ..Default::default()
    };
    let gnn = run_method(Method::Gnn, nets, &cfg).unwrap();
    let lp = run_method(Method::LpSimplex, nets, &cfg).unwrap();
    let (g, s) = (gnn.mean_time_ms(), lp.mean_time_ms());
    Outcome {
        pass: g < s,
        detail: format!(
            "mean time on 1000 networks: GNN inference {:.2} us, simplex {:.2} us",
            g * 1e3,
            s * 1e3
        ),
        fingerprint: Vec::new(),
    }
}

fn criterion_9() -> Outcome {
    let mut failures = 0;
    let mut fp = Vec::new();
    for k in 0..1000u64 {
        let n = 3 + (k % 4) as usize;
        let cfg = GnnConfig {
            layers: 1 + (k % 3) as usize,
            hidden: 8,
            ..Default::default()
        };
        let params = init_params(&cfg, n, 7000 + k).unwrap();
        let gen = GeneratorConfig {
            n,
            count: 1,
            seed: 3000 + k,
            noise: [0.0, 0.05, 0.2][k as usize % 3],
            ..Default::default()
        };
        let net = generate_network(&gen, 0).unwrap();
        let raw = infer(&params, &net, &cfg, BUDGET).unwrap().raw;
        let repaired = repair_feasibility(&net, &raw, BUDGET, 1e-9, 100);
        let lp = build_arbitrage_lp(
            &net,
            &ArbLpConfig {
                budget: BUDGET,
                mode: InvestmentMode::BudgetCap,
            },
        )
        .unwrap();
        if !check_feasible(&lp, &repaired.to_lp_vector(), 1e-9).unwrap() {
            failures += 1;
        }
        fp.extend(bits(repaired.as_slice().iter().copied()));
    }
    Outcome {
        pass: failures == 0,
        detail: format!("repair on 1000 random raw plans: {failures} fail check_feasible at 1e-9"),
        fingerprint: fp,
    }
}

struct Run {
    outcomes: Vec<Outcome>,
    model: GnnModel,
}

fn criteria_1_to_6(bench_set: &NetworkDataset) -> Run {
    let c1 = criterion_1();
    let c3 = criterion_3(&bench_set.networks);
    let c5 = criterion_5();
    let trained = criterion_6(bench_set);
    let c2 = criterion_2(&trained.model);
    let c4 = criterion_4(&bench_set.networks, &trained.model);
    Run {
        outcomes: vec![c1, c2, c3, c4, c5, trained.outcome],
        model: trained.model,
    }
}

fn main() -> ExitCode {
    let bench_set = dataset(0.05, 1000, DATASET_SEED);
    let first = criteria_1_to_6(&bench_set);
    let c7 = criterion_7(&bench_set.networks, &first.model);
    let second = criteria_1_to_6(&bench_set);
    let differing: Vec<usize> = first
        .outcomes
        .iter()
        .zip(&second.outcomes)
        .enumerate()
        .filter(|(_, (a, b))| a.fingerprint != b.fingerprint)
        .map(|(k, _)| k + 1)
        .collect();
    let c8 = Outcome {
        pass: differing.is_empty(),
        detail: format!("rerun of criteria 1-6 with identical seeds: differing criteria {differing:?}"),
        fingerprint: Vec::new(),
    };
    let c9 = criterion_9();

    let mut all = first.outcomes;
    all.extend([c7, c8, c9]);
    let mut failed = 0;
    for (k, o) in all.iter().enumerate() {
        println!(
            "[{}] criterion {}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            k + 1,
            o.detail
        );
        failed += !o.pass as usize;
    }
    println!("acceptance: {} of {} criteria passed", all.len() - failed, all.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
