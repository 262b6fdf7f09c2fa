use crate::exchange::ExchangeNetwork;
use crate::lp::TradePlan;

pub const DEFAULT_REPAIR_ITERATIONS: usize = 100;

/// Whether `plan` satisfies the budget-capped arbitrage LP within `tol`.
pub(crate) fn plan_is_feasible(net: &ExchangeNetwork, plan: &TradePlan, budget: f64, tol: f64) -> bool {
    let n = net.n();
    plan.as_slice().iter().all(|v| v.is_finite() && *v >= -tol)
        && plan.total() <= budget + tol
        && (0..n).all(|i| plan.outflow(i) - plan.inflow(net, i) <= tol)
}

/// Shrinks `plan` until it is executable under the budget-capped LP.
///
/// Each sweep visits currencies in order and scales the outgoing row of any
/// currency that sells more than it receives down to its inflow. Row scaling
/// preserves each row's shape, and the sweeps are monotone, so they converge
/// to the largest feasible row scaling of the input. A final global rescale
/// enforces the budget. If the flow rows are still violated after `max_iter`
/// sweeps the zero plan is returned, since no global factor can fix them.
pub fn repair_feasibility(
    net: &ExchangeNetwork,
    plan: &TradePlan,
    budget: f64,
    tol: f64,
    max_iter: usize,
) -> TradePlan {
    let n = net.n();
    let mut x = plan.clone();
    // Rows are balanced well inside `tol` so the result certifies at `tol`
    // however the check orders its sums.
    let trigger = tol * 1e-3;
    for _ in 0..max_iter {
        let mut touched = false;
        for i in 0..n {
            let out = x.outflow(i);
            let inflow = x.inflow(net, i);
            if out > inflow + trigger {
                let f = inflow / out;
                for j in 0..n {
                    let v = x.get(i, j);
                    x.set(i, j, v * f);
                }
                touched = true;
            }
        }
        if !touched {
            break;
        }
    }
    let total = x.total();
    if total > budget {
        x.scale(budget / total);
    }
    if plan_is_feasible(net, &x, budget, tol) {
        x
    } else {
        TradePlan::zeros(n)
    }
}
