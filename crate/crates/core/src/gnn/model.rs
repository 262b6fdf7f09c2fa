use ndarray::{Array2, Zip};

use super::{Activation, GnnConfig, GnnParams};
use crate::error::{Error, Result};
use crate::exchange::ExchangeNetwork;
use crate::lp::{InvestmentMode, TradePlan};

/// Per-node inputs: `[holding, mean outgoing rate, mean incoming rate]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeFeatures(pub Array2<f64>);

/// The whole budget held in currency 0.
pub fn default_holdings(n: usize, budget: f64) -> Vec<f64> {
    let mut h = vec![0.0; n];
    h[0] = budget;
    h
}

pub fn build_node_features(net: &ExchangeNetwork, holdings: &[f64]) -> Result<NodeFeatures> {
    let n = net.n();
    if holdings.len() != n {
        return Err(Error::Dimension {
            expected: n,
            actual: holdings.len(),
        });
    }
    if let Some(i) = holdings.iter().position(|h| !(h.is_finite() && *h >= 0.0)) {
        return Err(Error::validation(
            format!("holdings[{i}]"),
            "must be finite and nonnegative",
        ));
    }
    let denom = (n - 1) as f64;
    let mut f = Array2::zeros((n, super::INPUT_DIM));
    for i in 0..n {
        let out: f64 = (0..n).filter(|&j| j != i).map(|j| net.rate(i, j)).sum();
        let inc: f64 = (0..n).filter(|&k| k != i).map(|k| net.rate(k, i)).sum();
        f[[i, 0]] = holdings[i];
        f[[i, 1]] = out / denom;
        f[[i, 2]] = inc / denom;
    }
    Ok(NodeFeatures(f))
}

fn propagation_matrix(net: &ExchangeNetwork) -> Array2<f64> {
    // Unit diagonal carries the self term; off-diagonal entries are e_ij = r_ij.
    Array2::from_shape_vec((net.n(), net.n()), net.rates().to_vec()).expect("square")
}

fn finite(a: &Array2<f64>, layer: impl FnOnce() -> String) -> Result<()> {
    if a.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numeric { layer: layer() })
    }
}

#[inline]
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Intermediate values of one forward pass, kept for backpropagation.
#[derive(Debug, Clone)]
pub struct Forward {
    /// `R H_l` for each message-passing layer.
    aggregated: Vec<Array2<f64>>,
    /// Pre-activations `R H_l W_l^T`.
    pre: Vec<Array2<f64>>,
    /// `H_0` (features) through `H_L`.
    hidden: Vec<Array2<f64>>,
    /// `z_ij = (W_out h_i)_j`.
    pub logits: Array2<f64>,
}

impl Forward {
    /// Final node embeddings `H_L`, one row per currency.
    pub fn embeddings(&self) -> &Array2<f64> {
        self.hidden.last().expect("at least the input layer")
    }
}

fn check_inputs(params: &GnnParams, features: &NodeFeatures, net: &ExchangeNetwork) -> Result<()> {
    let n = net.n();
    if features.0.dim() != (n, super::INPUT_DIM) {
        return Err(Error::Dimension {
            expected: n * super::INPUT_DIM,
            actual: features.0.len(),
        });
    }
    if params.weights.len() < 2 || params.currencies() != n {
        return Err(Error::Dimension {
            expected: n,
            actual: params.currencies(),
        });
    }
    let mut width = super::INPUT_DIM;
    for w in &params.weights {
        if w.ncols() != width {
            return Err(Error::Dimension {
                expected: width,
                actual: w.ncols(),
            });
        }
        width = w.nrows();
    }
    Ok(())
}

/// Runs every message-passing layer and the output head.
pub fn message_pass(
    params: &GnnParams,
    features: &NodeFeatures,
    net: &ExchangeNetwork,
    activation: Activation,
) -> Result<Forward> {
    check_inputs(params, features, net)?;
    let prop = propagation_matrix(net);
    let layers = params.layers();
    let mut aggregated = Vec::with_capacity(layers);
    let mut pre = Vec::with_capacity(layers);
    let mut hidden = Vec::with_capacity(layers + 1);
    hidden.push(features.0.clone());

    for (l, w) in params.weights[..layers].iter().enumerate() {
        let agg = prop.dot(&hidden[l]);
        let z = agg.dot(&w.t());
        finite(&z, || format!("message-passing layer {l}"))?;
        hidden.push(z.mapv(|v| activation.apply(v)));
        aggregated.push(agg);
        pre.push(z);
    }
    let logits = hidden[layers].dot(&params.weights[layers].t());
    finite(&logits, || "output layer".to_string())?;
    Ok(Forward {
        aggregated,
        pre,
        hidden,
        logits,
    })
}

/// Plan before budget scaling (`softplus(z)`, zero diagonal) and the scale
/// factor applied to it.
fn allocations(logits: &Array2<f64>, budget: f64, mode: InvestmentMode) -> (Array2<f64>, f64) {
    let mut y = logits.mapv(softplus);
    y.diag_mut().fill(0.0);
    let total = y.sum();
    let scale = match mode {
        _ if total <= 0.0 => 1.0,
        InvestmentMode::EqualityInvestment => budget / total,
        InvestmentMode::BudgetCap if total > budget => budget / total,
        InvestmentMode::BudgetCap => 1.0,
    };
    (y, scale)
}

/// Decodes logits into a nonnegative plan. `EqualityInvestment` rescales the
/// total to exactly `budget`; `BudgetCap` only shrinks plans above it.
pub fn decode_trades(forward: &Forward, budget: f64, mode: InvestmentMode) -> Result<TradePlan> {
    let (y, scale) = allocations(&forward.logits, budget, mode);
    let n = y.nrows();
    TradePlan::from_matrix(n, y.mapv(|v| v * scale).into_raw_vec_and_offset().0)
}

/// Per-currency imbalance `out_i - in_i`.
fn imbalance(net: &ExchangeNetwork, x: &[f64]) -> Vec<f64> {
    let n = net.n();
    (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i)
                .map(|j| x[i * n + j] - net.rate(j, i) * x[j * n + i])
                .sum()
        })
        .collect()
}

/// `sum (r_ij - 1) x_ij - lambda * sum_i (out_i - in_i)^2`.
pub fn relaxed_loss(net: &ExchangeNetwork, plan: &TradePlan, lambda: f64) -> Result<f64> {
    if plan.n() != net.n() {
        return Err(Error::Dimension {
            expected: net.n(),
            actual: plan.n(),
        });
    }
    Ok(loss_and_plan_gradient(net, plan.as_slice(), lambda, false).0)
}

fn loss_and_plan_gradient(net: &ExchangeNetwork, x: &[f64], lambda: f64, want_grad: bool) -> (f64, Vec<f64>) {
    let n = net.n();
    let d = imbalance(net, x);
    let mut profit = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                profit += (net.rate(i, j) - 1.0) * x[i * n + j];
            }
        }
    }
    let penalty: f64 = d.iter().map(|v| v * v).sum();
    let loss = profit - lambda * penalty;
    if !want_grad {
        return (loss, Vec::new());
    }
    // x_ij enters d_i with +1 and d_j with -r_ij.
    let mut g = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let r = net.rate(i, j);
                g[i * n + j] = (r - 1.0) - 2.0 * lambda * (d[i] - r * d[j]);
            }
        }
    }
    (loss, g)
}

/// Relaxed loss of the decoded plan and its gradient with respect to every
/// weight matrix. Features are inputs, not parameters.
pub fn loss_and_gradient(
    params: &GnnParams,
    net: &ExchangeNetwork,
    features: &NodeFeatures,
    cfg: &GnnConfig,
) -> Result<(f64, Vec<Array2<f64>>)> {
    let fwd = message_pass(params, features, net, cfg.activation)?;
    let n = net.n();
    let (y, scale) = allocations(&fwd.logits, cfg.budget, cfg.mode);
    let x: Vec<f64> = y.iter().map(|v| v * scale).collect();
    let (loss, gx) = loss_and_plan_gradient(net, &x, cfg.lambda, true);
    if !loss.is_finite() {
        return Err(Error::Numeric { layer: "loss".into() });
    }

    // Through the budget scaling x = s * y, with s = B / sum(y) when active.
    let mut g_logits = Array2::from_shape_vec((n, n), gx).expect("n x n");
    if scale != 1.0 {
        let gx_dot_x: f64 = g_logits.iter().zip(&x).map(|(g, v)| g * v).sum();
        let shift = gx_dot_x / cfg.budget;
        g_logits.mapv_inplace(|g| scale * (g - shift));
    }
    // Through softplus; the diagonal never reaches the plan.
    Zip::from(&mut g_logits)
        .and(&fwd.logits)
        .for_each(|g, &z| *g *= sigmoid(z));
    g_logits.diag_mut().fill(0.0);

    let layers = params.layers();
    let mut grads = vec![Array2::zeros((0, 0)); layers + 1];
    grads[layers] = g_logits.t().dot(&fwd.hidden[layers]);
    let mut g_hidden = g_logits.dot(&params.weights[layers]);

    let prop = propagation_matrix(net);
    for l in (0..layers).rev() {
        let mut g_pre = g_hidden;
        Zip::from(&mut g_pre)
            .and(&fwd.pre[l])
            .and(&fwd.hidden[l + 1])
            .for_each(|g, &z, &a| *g *= cfg.activation.derivative(z, a));
        grads[l] = g_pre.t().dot(&fwd.aggregated[l]);
        finite(&grads[l], || format!("gradient of message-passing layer {l}"))?;
        g_hidden = if l > 0 {
            prop.t().dot(&g_pre.dot(&params.weights[l]))
        } else {
            Array2::zeros((0, 0))
        };
    }
    finite(&grads[layers], || "gradient of output layer".to_string())?;
    Ok((loss, grads))
}

#[derive(Debug, Clone)]
pub struct Inference {
    /// Decoded plan before repair.
    pub raw: TradePlan,
    /// Executable plan after [`super::repair_feasibility`].
    pub repaired: TradePlan,
    /// Relaxed loss of the raw plan.
    pub raw_loss: f64,
    /// Profit of the repaired plan divided by the budget.
    pub feasible_yield: f64,
    /// Whether the raw plan already satisfied every constraint.
    pub raw_feasible: bool,
}

/// Forward pass, decode, repair and yield accounting for one network.
pub fn infer(params: &GnnParams, net: &ExchangeNetwork, cfg: &GnnConfig, budget: f64) -> Result<Inference> {
    if !(budget.is_finite() && budget > 0.0) {
        return Err(Error::Config(format!("budget must be positive, got {budget}")));
    }
    let features = build_node_features(net, &default_holdings(net.n(), budget))?;
    let fwd = message_pass(params, &features, net, cfg.activation)?;
    let raw = decode_trades(&fwd, budget, cfg.mode)?;
    let raw_loss = relaxed_loss(net, &raw, cfg.lambda)?;
    let raw_feasible = super::repair::plan_is_feasible(net, &raw, budget, crate::tol::FEASIBILITY);
    let repaired = super::repair_feasibility(
        net,
        &raw,
        budget,
        crate::tol::FEASIBILITY,
        super::DEFAULT_REPAIR_ITERATIONS,
    );
    let feasible_yield = plan_profit(net, &repaired) / budget;
    Ok(Inference {
        raw,
        repaired,
        raw_loss,
        feasible_yield,
        raw_feasible,
    })
}

/// `sum (r_ij - 1) x_ij`, the arbitrage LP objective of a plan.
pub(crate) fn plan_profit(net: &ExchangeNetwork, plan: &TradePlan) -> f64 {
    loss_and_plan_gradient(net, plan.as_slice(), 0.0, false).0
}
