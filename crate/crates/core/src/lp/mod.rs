//! Linear programs of the form
//!
//! ```text
//! maximize    c^T x
//! subject to  A x <= b
//!             l <= x <= u
//! ```
//!
//! and the arbitrage instance built from an exchange network.
//!
//! # Arbitrage LP
//!
//! Decision variables are the off-diagonal trade amounts `x_ij` (currency
//! `i` sold for currency `j`), flattened row-major with the diagonal skipped:
//! for `n = 3` the order is `x01 x02 x10 x12 x20 x21`. The objective is
//! `sum (r_ij - 1) x_ij`. Row `i < n` is the flow constraint
//! `sum_j x_ij - sum_k r_ki x_ki <= 0`; row `n` caps total volume at the
//! budget. [`InvestmentMode::EqualityInvestment`] adds row `n + 1`,
//! `-sum x_ij <= -B`, forcing total volume to equal the budget.

mod oracle;
mod simplex;

pub use oracle::{enumerate_vertices_oracle, ORACLE_MAX_VARIABLES};
pub use simplex::{simplex_solve, SimplexOptions};

use crate::error::{Error, Result};
use crate::exchange::ExchangeNetwork;

#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    c: Vec<f64>,
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl LpProblem {
    pub fn new(c: Vec<f64>, a: Vec<Vec<f64>>, b: Vec<f64>, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let nv = c.len();
        if a.len() != b.len() {
            return Err(Error::Dimension {
                expected: a.len(),
                actual: b.len(),
            });
        }
        for row in &a {
            if row.len() != nv {
                return Err(Error::Dimension {
                    expected: nv,
                    actual: row.len(),
                });
            }
        }
        for v in [&lower, &upper] {
            if v.len() != nv {
                return Err(Error::Dimension {
                    expected: nv,
                    actual: v.len(),
                });
            }
        }
        let finite = |name: &str, v: &[f64]| -> Result<()> {
            match v.iter().position(|x| !x.is_finite()) {
                Some(i) => Err(Error::validation(format!("{name}[{i}]"), "must be finite")),
                None => Ok(()),
            }
        };
        finite("c", &c)?;
        finite("b", &b)?;
        finite("l", &lower)?;
        for (i, row) in a.iter().enumerate() {
            finite(&format!("A[{i}]"), row)?;
        }
        for j in 0..nv {
            if upper[j].is_nan() || upper[j] == f64::NEG_INFINITY || lower[j] > upper[j] {
                return Err(Error::validation(
                    format!("u[{j}]"),
                    "need l <= u with u finite or +inf",
                ));
            }
        }
        Ok(Self { c, a, b, lower, upper })
    }

    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn num_rows(&self) -> usize {
        self.a.len()
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn a(&self) -> &[Vec<f64>] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Present iff `status == Optimal`.
    pub x: Option<Vec<f64>>,
    pub objective: Option<f64>,
    pub iterations: usize,
}

impl LpSolution {
    pub(crate) fn optimal(lp: &LpProblem, x: Vec<f64>, iterations: usize) -> Self {
        let objective = evaluate_objective(lp, &x).expect("dimensions checked");
        Self {
            status: LpStatus::Optimal,
            x: Some(x),
            objective: Some(objective),
            iterations,
        }
    }

    pub(crate) fn without_point(status: LpStatus, iterations: usize) -> Self {
        Self {
            status,
            x: None,
            objective: None,
            iterations,
        }
    }
}

/// How the budget row of the arbitrage LP is encoded.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum InvestmentMode {
    /// `sum x <= B`: always feasible (x = 0), so yields are defined everywhere.
    #[default]
    BudgetCap,
    /// `sum x = B`: infeasible whenever no cycle product reaches 1.
    EqualityInvestment,
}

impl InvestmentMode {
    pub fn as_str(self) -> &'static str {
        match self {
            InvestmentMode::BudgetCap => "budget-cap",
            InvestmentMode::EqualityInvestment => "equality",
        }
    }
}

impl std::str::FromStr for InvestmentMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "budget-cap" => Ok(InvestmentMode::BudgetCap),
            "equality" => Ok(InvestmentMode::EqualityInvestment),
            other => Err(Error::Config(format!("unknown investment mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArbLpConfig {
    pub budget: f64,
    pub mode: InvestmentMode,
}

impl Default for ArbLpConfig {
    fn default() -> Self {
        Self {
            budget: 1.0,
            mode: InvestmentMode::BudgetCap,
        }
    }
}

impl ArbLpConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.budget.is_finite() && self.budget > 0.0) {
            return Err(Error::Config(format!("budget must be positive, got {}", self.budget)));
        }
        Ok(())
    }
}

/// Position of `x_ij` in the flattened variable vector.
#[inline]
pub fn var_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i != j && i < n && j < n);
    i * (n - 1) + if j < i { j } else { j - 1 }
}

/// Inverse of [`var_index`].
pub fn var_pair(n: usize, k: usize) -> (usize, usize) {
    let i = k / (n - 1);
    let r = k % (n - 1);
    (i, if r < i { r } else { r + 1 })
}

pub fn build_arbitrage_lp(net: &ExchangeNetwork, cfg: &ArbLpConfig) -> Result<LpProblem> {
    cfg.validate()?;
    let n = net.n();
    let nv = n * (n - 1);

    let mut c = vec![0.0; nv];
    let mut a = vec![vec![0.0; nv]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let k = var_index(n, i, j);
            let r = net.rate(i, j);
            c[k] = r - 1.0;
            a[i][k] += 1.0;
            a[j][k] -= r;
        }
    }
    let mut b = vec![0.0; n];
    a.push(vec![1.0; nv]);
    b.push(cfg.budget);
    if cfg.mode == InvestmentMode::EqualityInvestment {
        a.push(vec![-1.0; nv]);
        b.push(-cfg.budget);
    }
    LpProblem::new(c, a, b, vec![0.0; nv], vec![f64::INFINITY; nv])
}

pub fn evaluate_objective(lp: &LpProblem, x: &[f64]) -> Result<f64> {
    if x.len() != lp.num_vars() {
        return Err(Error::Dimension {
            expected: lp.num_vars(),
            actual: x.len(),
        });
    }
    Ok(dot(&lp.c, x))
}

/// Whether `x` satisfies every row and bound within absolute tolerance `tol`.
pub fn check_feasible(lp: &LpProblem, x: &[f64], tol: f64) -> Result<bool> {
    if x.len() != lp.num_vars() {
        return Err(Error::Dimension {
            expected: lp.num_vars(),
            actual: x.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Ok(false);
    }
    let rows_ok = lp.a.iter().zip(&lp.b).all(|(row, &bi)| dot(row, x) <= bi + tol);
    let bounds_ok = x
        .iter()
        .zip(lp.lower.iter().zip(&lp.upper))
        .all(|(&v, (&l, &u))| v >= l - tol && v <= u + tol);
    Ok(rows_ok && bounds_ok)
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A trade plan: `x[i][j]` units of currency `i` sold for currency `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct TradePlan {
    n: usize,
    x: Vec<f64>,
}

impl TradePlan {
    pub fn zeros(n: usize) -> Self {
        Self { n, x: vec![0.0; n * n] }
    }

    /// Validates a row-major `n * n` matrix.
    pub fn from_matrix(n: usize, x: Vec<f64>) -> Result<Self> {
        if x.len() != n * n {
            return Err(Error::Dimension {
                expected: n * n,
                actual: x.len(),
            });
        }
        for i in 0..n {
            for j in 0..n {
                let v = x[i * n + j];
                if !v.is_finite() || v < 0.0 || (i == j && v != 0.0) {
                    return Err(Error::validation(
                        format!("x[{i}][{j}]"),
                        format!("must be finite, nonnegative and zero on the diagonal, got {v}"),
                    ));
                }
            }
        }
        Ok(Self { n, x })
    }

    /// Plan from an LP variable vector in [`var_index`] order. Tiny negative
    /// values left by the solver are clamped to zero.
    pub fn from_lp_vector(n: usize, v: &[f64]) -> Result<Self> {
        if v.len() != n * (n - 1) {
            return Err(Error::Dimension {
                expected: n * (n - 1),
                actual: v.len(),
            });
        }
        let mut plan = Self::zeros(n);
        for (k, &val) in v.iter().enumerate() {
            let (i, j) = var_pair(n, k);
            plan.x[i * n + j] = val.max(0.0);
        }
        Self::from_matrix(n, plan.x)
    }

    pub fn to_lp_vector(&self) -> Vec<f64> {
        let n = self.n;
        (0..n * (n - 1))
            .map(|k| {
                let (i, j) = var_pair(n, k);
                self.x[i * n + j]
            })
            .collect()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.x[i * self.n + j]
    }

    pub(crate) fn set(&mut self, i: usize, j: usize, v: f64) {
        self.x[i * self.n + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.x
    }

    pub fn total(&self) -> f64 {
        self.x.iter().sum()
    }

    pub fn outflow(&self, i: usize) -> f64 {
        self.x[i * self.n..(i + 1) * self.n].iter().sum()
    }

    pub fn inflow(&self, net: &ExchangeNetwork, i: usize) -> f64 {
        (0..self.n)
            .filter(|&k| k != i)
            .map(|k| net.rate(k, i) * self.get(k, i))
            .sum()
    }

    pub fn scale(&mut self, factor: f64) {
        self.x.iter_mut().for_each(|v| *v *= factor);
    }
}
