//! Dense two-phase tableau simplex.
//!
//! Variables are shifted to `y = x - l >= 0`, finite upper bounds become
//! extra rows, and every row gets a slack. Rows whose shifted right-hand side
//! is negative are negated and receive an artificial variable; phase 1
//! maximizes minus the sum of artificials, phase 2 the real objective with
//! artificial columns barred from entering.
//!
//! Pricing is Dantzig (largest positive reduced cost) until `2 (M + N)`
//! consecutive pivots fail to improve the objective; from then on Bland's
//! rule is used for the rest of the solve, which guarantees termination.

use super::{LpProblem, LpSolution, LpStatus};
use crate::error::{Error, Result};
use crate::tol;

#[derive(Debug, Clone)]
pub struct SimplexOptions {
    pub pivot_tol: f64,
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    /// Stalled pivots before switching to Bland's rule; `None` means
    /// `2 * (rows + variables)`.
    pub bland_after: Option<usize>,
    /// Hard pivot limit; `None` means `50 * (rows + columns) + 1000`.
    pub max_iterations: Option<usize>,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            pivot_tol: tol::PIVOT,
            feasibility_tol: tol::FEASIBILITY,
            optimality_tol: tol::OPTIMALITY,
            bland_after: None,
            max_iterations: None,
        }
    }
}

pub fn simplex_solve(lp: &LpProblem) -> Result<LpSolution> {
    simplex_solve_with(lp, &SimplexOptions::default())
}

pub fn simplex_solve_with(lp: &LpProblem, opts: &SimplexOptions) -> Result<LpSolution> {
    let mut tab = Tableau::standard_form(lp);
    let bland_after = opts.bland_after.unwrap_or(2 * (lp.num_rows() + lp.num_vars()));
    let max_iter = opts.max_iterations.unwrap_or(50 * (tab.rows + tab.cols) + 1000);
    let mut pivots = Pivots {
        opts,
        bland_after,
        max_iter,
        count: 0,
    };

    if tab.num_artificial > 0 {
        let costs: Vec<f64> = (0..tab.cols)
            .map(|j| if tab.is_artificial(j) { -1.0 } else { 0.0 })
            .collect();
        tab.set_objective(&costs);
        match pivots.run(&mut tab, false)? {
            Outcome::Optimal => {}
            // Phase 1 is bounded above by 0; an unbounded ray means breakdown.
            Outcome::Unbounded => return Err(tab.breakdown(pivots.count, "phase 1 reported an unbounded ray")),
        }
        if tab.objective_value() < -opts.feasibility_tol {
            return Ok(LpSolution::without_point(LpStatus::Infeasible, pivots.count));
        }
        tab.drive_out_artificials(opts.pivot_tol);
    }

    let mut costs = vec![0.0; tab.cols];
    costs[..lp.num_vars()].copy_from_slice(lp.c());
    tab.set_objective(&costs);
    match pivots.run(&mut tab, true)? {
        Outcome::Unbounded => Ok(LpSolution::without_point(LpStatus::Unbounded, pivots.count)),
        Outcome::Optimal => {
            let mut x = lp.lower().to_vec();
            for (row, &var) in tab.basis.iter().enumerate() {
                if var < lp.num_vars() {
                    x[var] += tab.rhs(row).max(0.0);
                }
            }
            Ok(LpSolution::optimal(lp, x, pivots.count))
        }
    }
}

enum Outcome {
    Optimal,
    Unbounded,
}

struct Tableau {
    rows: usize,
    /// Structural + slack + artificial columns (rhs excluded).
    cols: usize,
    num_structural: usize,
    num_artificial: usize,
    /// `rows x (cols + 1)`, rhs last.
    data: Vec<f64>,
    /// Reduced costs followed by minus the current objective.
    obj: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn standard_form(lp: &LpProblem) -> Self {
        let nv = lp.num_vars();
        let mut rows_a: Vec<Vec<f64>> = Vec::new();
        let mut rhs: Vec<f64> = Vec::new();
        for (row, &b) in lp.a().iter().zip(lp.b()) {
            let shift: f64 = row.iter().zip(lp.lower()).map(|(a, l)| a * l).sum();
            rows_a.push(row.clone());
            rhs.push(b - shift);
        }
        for j in 0..nv {
            if lp.upper()[j].is_finite() {
                let mut row = vec![0.0; nv];
                row[j] = 1.0;
                rows_a.push(row);
                rhs.push(lp.upper()[j] - lp.lower()[j]);
            }
        }

        let rows = rows_a.len();
        let negative: Vec<bool> = rhs.iter().map(|&b| b < 0.0).collect();
        let num_artificial = negative.iter().filter(|&&n| n).count();
        let cols = nv + rows + num_artificial;
        let width = cols + 1;
        let mut data = vec![0.0; rows * width];
        let mut basis = Vec::with_capacity(rows);
        let mut next_art = nv + rows;
        for i in 0..rows {
            let sign = if negative[i] { -1.0 } else { 1.0 };
            let line = &mut data[i * width..(i + 1) * width];
            for j in 0..nv {
                line[j] = sign * rows_a[i][j];
            }
            line[nv + i] = sign;
            line[cols] = sign * rhs[i];
            if negative[i] {
                line[next_art] = 1.0;
                basis.push(next_art);
                next_art += 1;
            } else {
                basis.push(nv + i);
            }
        }
        Self {
            rows,
            cols,
            num_structural: nv,
            num_artificial,
            data,
            obj: vec![0.0; width],
            basis,
        }
    }

    #[inline]
    fn width(&self) -> usize {
        self.cols + 1
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width() + j]
    }

    #[inline]
    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.cols)
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.num_structural + self.rows
    }

    fn objective_value(&self) -> f64 {
        -self.obj[self.cols]
    }

    /// Prices out the current basis for cost vector `costs`.
    fn set_objective(&mut self, costs: &[f64]) {
        let width = self.width();
        self.obj[..self.cols].copy_from_slice(costs);
        self.obj[self.cols] = 0.0;
        for i in 0..self.rows {
            let cb = costs[self.basis[i]];
            if cb != 0.0 {
                for j in 0..width {
                    self.obj[j] -= cb * self.data[i * width + j];
                }
            }
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let width = self.width();
        let p = self.at(row, col);
        let (before, rest) = self.data.split_at_mut(row * width);
        let (prow, after) = rest.split_at_mut(width);
        prow.iter_mut().for_each(|v| *v /= p);
        prow[col] = 1.0;
        let eliminate = |line: &mut [f64]| {
            let f = line[col];
            if f != 0.0 {
                for (v, &pv) in line.iter_mut().zip(prow.iter()) {
                    *v -= f * pv;
                }
                line[col] = 0.0;
            }
        };
        before.chunks_exact_mut(width).for_each(eliminate);
        after.chunks_exact_mut(width).for_each(eliminate);
        eliminate(&mut self.obj);
        self.basis[row] = col;
    }

    fn drive_out_artificials(&mut self, pivot_tol: f64) {
        for i in 0..self.rows {
            if !self.is_artificial(self.basis[i]) {
                continue;
            }
            let real_cols = self.num_structural + self.rows;
            if let Some(j) = (0..real_cols).find(|&j| self.at(i, j).abs() > pivot_tol) {
                self.pivot(i, j);
            }
            // Otherwise the row is redundant; its artificial stays basic at 0
            // and can never leave since every admissible column is zero there.
        }
    }

    fn breakdown(&self, iterations: usize, reason: &str) -> Error {
        Error::Solver {
            iterations,
            basis: self.basis.clone(),
            reason: reason.to_string(),
        }
    }
}

struct Pivots<'a> {
    opts: &'a SimplexOptions,
    bland_after: usize,
    max_iter: usize,
    count: usize,
}

impl Pivots<'_> {
    fn run(&mut self, tab: &mut Tableau, bar_artificials: bool) -> Result<Outcome> {
        let mut stalled = 0usize;
        let mut bland = false;
        loop {
            if self.count >= self.max_iter {
                return Err(tab.breakdown(self.count, "iteration limit reached"));
            }
            if tab.obj.iter().any(|v| !v.is_finite()) {
                return Err(tab.breakdown(self.count, "non-finite reduced cost"));
            }
            let admissible = |j: usize| !(bar_artificials && tab.is_artificial(j));
            let candidates = (0..tab.cols).filter(|&j| admissible(j) && tab.obj[j] > self.opts.optimality_tol);
            let entering = if bland {
                candidates.min()
            } else {
                candidates.fold(None, |best: Option<usize>, j| match best {
                    Some(b) if tab.obj[b] >= tab.obj[j] => Some(b),
                    _ => Some(j),
                })
            };
            let Some(col) = entering else {
                return Ok(Outcome::Optimal);
            };

            let Some(row) = self.ratio_test(tab, col, bland) else {
                return Ok(Outcome::Unbounded);
            };
            let before = tab.objective_value();
            tab.pivot(row, col);
            self.count += 1;

            if tab.objective_value() > before + self.opts.optimality_tol * (1.0 + before.abs()) {
                stalled = 0;
            } else {
                stalled += 1;
                if stalled >= self.bland_after {
                    bland = true;
                }
            }
        }
    }

    /// Leaving row by minimum ratio. Near-ties go to the smallest basic index
    /// under Bland's rule and to the largest pivot otherwise.
    fn ratio_test(&self, tab: &Tableau, col: usize, bland: bool) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..tab.rows {
            let a = tab.at(i, col);
            if a <= self.opts.pivot_tol {
                continue;
            }
            let ratio = tab.rhs(i).max(0.0) / a;
            best = match best {
                None => Some((i, ratio)),
                Some((b, br)) => {
                    let tie = (ratio - br).abs() <= 1e-12 * (1.0 + br.abs());
                    let better = if tie {
                        if bland {
                            tab.basis[i] < tab.basis[b]
                        } else {
                            a > tab.at(b, col)
                        }
                    } else {
                        ratio < br
                    };
                    if better {
                        Some((i, ratio))
                    } else {
                        Some((b, br))
                    }
                }
            };
        }
        best.map(|(i, _)| i)
    }
}
