//! Exhaustive vertex enumeration for tiny LPs.
//!
//! Every variable has a finite lower bound, so a nonempty feasible region is
//! pointed and the optimum (when finite) sits at a vertex: the solution of
//! some `N` linearly independent active constraints. The oracle solves every
//! such subset, keeps the feasible points and returns the best. Unboundedness
//! is decided separately by maximizing `c . d` over recession directions
//! normalized to `sum d = 1`.

use super::{LpProblem, LpSolution, LpStatus};
use crate::error::{Error, Result};
use crate::tol;

/// Largest variable count the oracle accepts.
pub const ORACLE_MAX_VARIABLES: usize = 8;

struct Halfspace {
    a: Vec<f64>,
    b: f64,
}

pub fn enumerate_vertices_oracle(lp: &LpProblem) -> Result<LpSolution> {
    let nv = lp.num_vars();
    if nv > ORACLE_MAX_VARIABLES {
        return Err(Error::TooLarge {
            size: nv,
            limit: ORACLE_MAX_VARIABLES,
        });
    }
    let unit = |j: usize, s: f64| {
        let mut a = vec![0.0; nv];
        a[j] = s;
        a
    };

    let mut region: Vec<Halfspace> = lp
        .a()
        .iter()
        .zip(lp.b())
        .map(|(a, &b)| Halfspace { a: a.clone(), b })
        .collect();
    for j in 0..nv {
        region.push(Halfspace {
            a: unit(j, -1.0),
            b: -lp.lower()[j],
        });
        if lp.upper()[j].is_finite() {
            region.push(Halfspace {
                a: unit(j, 1.0),
                b: lp.upper()[j],
            });
        }
    }

    let Some((x, _)) = best_vertex(&region, &[], lp.c(), nv) else {
        return Ok(LpSolution::without_point(LpStatus::Infeasible, 0));
    };

    // Recession cone: A d <= 0, d >= 0, d_j = 0 where u_j is finite.
    let mut cone: Vec<Halfspace> = lp.a().iter().map(|a| Halfspace { a: a.clone(), b: 0.0 }).collect();
    for j in 0..nv {
        cone.push(Halfspace {
            a: unit(j, -1.0),
            b: 0.0,
        });
        if lp.upper()[j].is_finite() {
            cone.push(Halfspace {
                a: unit(j, 1.0),
                b: 0.0,
            });
        }
    }
    let normalize = Halfspace {
        a: vec![1.0; nv],
        b: 1.0,
    };
    if let Some((_, gain)) = best_vertex(&cone, &[normalize], lp.c(), nv) {
        if gain > tol::OPTIMALITY {
            return Ok(LpSolution::without_point(LpStatus::Unbounded, 0));
        }
    }
    Ok(LpSolution::optimal(lp, x, 0))
}

/// Best feasible point among all vertices defined by `equalities` plus a
/// subset of `inequalities` made active.
fn best_vertex(inequalities: &[Halfspace], equalities: &[Halfspace], c: &[f64], nv: usize) -> Option<(Vec<f64>, f64)> {
    let pick = nv.checked_sub(equalities.len())?;
    let mut best: Option<(Vec<f64>, f64)> = None;
    for_each_combination(inequalities.len(), pick, |subset| {
        let active = equalities.iter().chain(subset.iter().map(|&k| &inequalities[k]));
        let (mut m, mut rhs): (Vec<Vec<f64>>, Vec<f64>) = active.map(|h| (h.a.clone(), h.b)).unzip();
        let Some(x) = solve_square(&mut m, &mut rhs) else {
            return;
        };
        let feasible = inequalities
            .iter()
            .all(|h| super::dot(&h.a, &x) <= h.b + tol::FEASIBILITY)
            && equalities
                .iter()
                .all(|h| (super::dot(&h.a, &x) - h.b).abs() <= tol::FEASIBILITY);
        if !feasible {
            return;
        }
        let value = super::dot(c, &x);
        if best.as_ref().map_or(true, |(_, v)| value > *v) {
            best = Some((x, value));
        }
    });
    best
}

/// Visits every `k`-subset of `0..n` in lexicographic order.
fn for_each_combination(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        visit(&idx);
        let Some(pos) = (0..k).rev().find(|&p| idx[p] < n - k + p) else {
            return;
        };
        idx[pos] += 1;
        for p in pos + 1..k {
            idx[p] = idx[p - 1] + 1;
        }
    }
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve_square(m: &mut [Vec<f64>], rhs: &mut [f64]) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            if f != 0.0 {
                for j in col..n {
                    m[r][j] -= f * m[col][j];
                }
                rhs[r] -= f * rhs[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m[i][j] * x[j]).sum();
        x[i] = (rhs[i] - s) / m[i][i];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::super::{build_arbitrage_lp, ArbLpConfig, InvestmentMode};
    use super::*;
    use crate::exchange::{generate_network, ExchangeNetwork, GeneratorConfig};

    #[test]
    fn combinations_are_complete() {
        let mut seen = Vec::new();
        for_each_combination(5, 3, |s| seen.push(s.to_vec()));
        assert_eq!(seen.len(), 10);
        assert_eq!(seen[0], [0, 1, 2]);
        assert_eq!(seen[9], [2, 3, 4]);
        let mut empty = 0;
        for_each_combination(3, 0, |_| empty += 1);
        assert_eq!(empty, 1);
    }

    #[test]
    fn one_variable() {
        let lp = LpProblem::new(vec![1.0], vec![vec![1.0]], vec![1.0], vec![0.0], vec![f64::INFINITY]).unwrap();
        let s = enumerate_vertices_oracle(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.objective, Some(1.0));
    }

    #[test]
    fn detects_unbounded_and_infeasible() {
        let lp = LpProblem::new(
            vec![1.0, 0.0],
            vec![vec![-1.0, 1.0]],
            vec![1.0],
            vec![0.0; 2],
            vec![f64::INFINITY; 2],
        )
        .unwrap();
        assert_eq!(enumerate_vertices_oracle(&lp).unwrap().status, LpStatus::Unbounded);
        let lp = LpProblem::new(
            vec![1.0],
            vec![vec![1.0], vec![-1.0]],
            vec![1.0, -2.0],
            vec![0.0],
            vec![f64::INFINITY],
        )
        .unwrap();
        assert_eq!(enumerate_vertices_oracle(&lp).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn consistent_three_currency_market() {
        let net = generate_network(
            &GeneratorConfig {
                n: 3,
                noise: 0.0,
                ..Default::default()
            },
            4,
        )
        .unwrap();
        let lp = build_arbitrage_lp(&net, &ArbLpConfig::default()).unwrap();
        let s = enumerate_vertices_oracle(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!(s.objective.unwrap().abs() < 1e-12);

        let eq = build_arbitrage_lp(
            &net,
            &ArbLpConfig {
                mode: InvestmentMode::EqualityInvestment,
                ..Default::default()
            },
        )
        .unwrap();
        let s = enumerate_vertices_oracle(&eq).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!(s.objective.unwrap().abs() < 1e-12);

        let rows: Vec<Vec<f64>> = (0..3)
            .map(|i| {
                (0..3)
                    .map(|j| if i == j { 1.0 } else { 0.99 * net.rate(i, j) })
                    .collect()
            })
            .collect();
        let lossy = ExchangeNetwork::from_rows(&rows).unwrap();
        let eq = build_arbitrage_lp(
            &lossy,
            &ArbLpConfig {
                mode: InvestmentMode::EqualityInvestment,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(enumerate_vertices_oracle(&eq).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn single_cycle_instance() {
        let net = ExchangeNetwork::from_rows(&[
            vec![1.0, 0.9, 1.0 / 1.5],
            vec![1.0 / 0.9, 1.0, 0.8],
            vec![1.5, 1.0 / 0.8, 1.0],
        ])
        .unwrap();
        let lp = build_arbitrage_lp(&net, &ArbLpConfig::default()).unwrap();
        let s = enumerate_vertices_oracle(&lp).unwrap();
        assert!((s.objective.unwrap() - 0.08 / 2.62).abs() < 1e-12);
    }

    #[test]
    fn rejects_large_instances() {
        let net = generate_network(&GeneratorConfig::default(), 0).unwrap();
        let lp = build_arbitrage_lp(&net, &ArbLpConfig::default()).unwrap();
        assert!(matches!(
            enumerate_vertices_oracle(&lp),
            Err(Error::TooLarge { size: 12, limit: 8 })
        ));
    }
}
