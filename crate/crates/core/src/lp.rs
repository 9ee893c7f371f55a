//! Small dense linear programs.
//!
//! Two-phase tableau simplex with Bland's anti-cycling rule. Sized for the
//! equilibrium programs (a few dozen variables and rows at most).

use crate::error::{invalid, Result};

const PIVOT_EPS: f64 = 1e-12;
/// Phase-one objective above this means the program is infeasible.
pub const FEASIBILITY_TOL: f64 = 1e-9;
const MAX_PIVOTS: usize = 50_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
struct Row {
    coeffs: Vec<f64>,
    relation: Relation,
    rhs: f64,
}

/// `min` (or `max`) `c^T x` subject to linear rows and finite lower bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    maximize: bool,
    lower: Vec<f64>,
    upper: Vec<f64>,
    rows: Vec<Row>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(self) -> Option<LpSolution> {
        match self {
            LpOutcome::Optimal(s) => Some(s),
            _ => None,
        }
    }
}

impl LinearProgram {
    /// Variables default to `0 <= x < inf`.
    pub fn minimize(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            objective,
            maximize: false,
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
            rows: Vec::new(),
        }
    }

    pub fn maximize(objective: Vec<f64>) -> Self {
        Self {
            maximize: true,
            ..Self::minimize(objective)
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) -> &mut Self {
        self.lower[var] = lower;
        self.upper[var] = upper;
        self
    }

    pub fn add_constraint(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> &mut Self {
        self.rows.push(Row {
            coeffs,
            relation,
            rhs,
        });
        self
    }

    /// Sparse convenience form of [`add_constraint`](Self::add_constraint).
    pub fn add_sparse(&mut self, terms: &[(usize, f64)], relation: Relation, rhs: f64) -> &mut Self {
        let mut coeffs = vec![0.0; self.num_vars()];
        for &(j, a) in terms {
            coeffs[j] += a;
        }
        self.add_constraint(coeffs, relation, rhs)
    }

    pub fn solve(&self) -> Result<LpOutcome> {
        let n = self.num_vars();
        for (j, (&lo, &hi)) in self.lower.iter().zip(&self.upper).enumerate() {
            if !lo.is_finite() {
                return Err(invalid(format!("variable {j} needs a finite lower bound")));
            }
            if hi.is_nan() {
                return Err(invalid(format!("variable {j} has a NaN upper bound")));
            }
            if hi < lo {
                return Ok(LpOutcome::Infeasible);
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.coeffs.len() != n {
                return Err(invalid(format!(
                    "row {i} has {} coefficients for {n} variables",
                    row.coeffs.len()
                )));
            }
            if !row.rhs.is_finite() || row.coeffs.iter().any(|a| !a.is_finite()) {
                return Err(invalid(format!("row {i} is not finite")));
            }
        }

        // Shift x = lower + y, y >= 0; finite upper bounds become rows.
        let mut rows: Vec<Row> = self
            .rows
            .iter()
            .map(|r| Row {
                coeffs: r.coeffs.clone(),
                relation: r.relation,
                rhs: r.rhs - dot(&r.coeffs, &self.lower),
            })
            .collect();
        for j in 0..n {
            if self.upper[j].is_finite() {
                let mut coeffs = vec![0.0; n];
                coeffs[j] = 1.0;
                rows.push(Row {
                    coeffs,
                    relation: Relation::Le,
                    rhs: self.upper[j] - self.lower[j],
                });
            }
        }
        let sign = if self.maximize { -1.0 } else { 1.0 };
        let cost: Vec<f64> = self.objective.iter().map(|c| sign * c).collect();

        let Some(y) = Tableau::build(n, &rows).run(&cost)? else {
            return Ok(LpOutcome::Infeasible);
        };
        let Some(y) = y else {
            return Ok(LpOutcome::Unbounded);
        };
        let x: Vec<f64> = y.iter().zip(&self.lower).map(|(y, lo)| y + lo).collect();
        let objective = dot(&self.objective, &x);
        Ok(LpOutcome::Optimal(LpSolution { x, objective }))
    }
}

/// Free-function entry point.
pub fn solve_lp(program: &LinearProgram) -> Result<LpOutcome> {
    program.solve()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Tableau {
    /// `m` rows of `cols + 1` entries; the last entry is the right-hand side.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    structural: usize,
    /// Columns at or beyond this index are artificial.
    first_artificial: usize,
}

impl Tableau {
    fn build(structural: usize, rows: &[Row]) -> Self {
        let m = rows.len();
        let slack_count = rows.iter().filter(|r| r.relation != Relation::Eq).count();
        let first_artificial = structural + slack_count;
        // Normalize to nonnegative right-hand sides.
        let normalized: Vec<(Vec<f64>, Relation, f64)> = rows
            .iter()
            .map(|r| {
                if r.rhs < 0.0 {
                    let flipped = match r.relation {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (r.coeffs.iter().map(|a| -a).collect(), flipped, -r.rhs)
                } else {
                    (r.coeffs.clone(), r.relation, r.rhs)
                }
            })
            .collect();
        let artificial_count = normalized
            .iter()
            .filter(|(_, rel, _)| *rel != Relation::Le)
            .count();
        let cols = first_artificial + artificial_count;
        let mut t = vec![vec![0.0; cols + 1]; m];
        let mut basis = vec![0; m];
        let mut slack = structural;
        let mut artificial = first_artificial;
        // Slack columns keep the original row order so that indices are stable.
        for (i, (orig, (coeffs, rel, rhs))) in rows.iter().zip(&normalized).enumerate() {
            t[i][..structural].copy_from_slice(coeffs);
            t[i][cols] = *rhs;
            if orig.relation != Relation::Eq {
                t[i][slack] = match rel {
                    Relation::Le => 1.0,
                    _ => -1.0,
                };
                if *rel == Relation::Le {
                    basis[i] = slack;
                }
                slack += 1;
            }
            if *rel != Relation::Le {
                t[i][artificial] = 1.0;
                basis[i] = artificial;
                artificial += 1;
            }
        }
        Self {
            t,
            basis,
            structural,
            first_artificial,
        }
    }

    fn cols(&self) -> usize {
        self.t.first().map_or(self.first_artificial, |r| r.len() - 1)
    }

    /// Returns `None` when infeasible, `Some(None)` when unbounded.
    fn run(mut self, cost: &[f64]) -> Result<Option<Option<Vec<f64>>>> {
        let cols = self.cols();
        let mut phase_one = vec![0.0; cols];
        for c in phase_one.iter_mut().skip(self.first_artificial) {
            *c = 1.0;
        }
        if cols > self.first_artificial {
            self.optimize(&phase_one, cols)?;
            let infeasibility: f64 = self
                .basis
                .iter()
                .zip(&self.t)
                .filter(|(&b, _)| b >= self.first_artificial)
                .map(|(_, row)| row[cols])
                .sum();
            if infeasibility > FEASIBILITY_TOL {
                return Ok(None);
            }
            self.drive_out_artificials();
        }
        let mut phase_two = vec![0.0; cols];
        phase_two[..self.structural].copy_from_slice(cost);
        if !self.optimize(&phase_two, self.first_artificial)? {
            return Ok(Some(None));
        }
        let mut y = vec![0.0; self.structural];
        for (row, &b) in self.t.iter().zip(&self.basis) {
            if b < self.structural {
                y[b] = row[cols].max(0.0);
            }
        }
        Ok(Some(Some(y)))
    }

    /// Minimizes `cost` over columns `< allowed`. Returns false if unbounded.
    fn optimize(&mut self, cost: &[f64], allowed: usize) -> Result<bool> {
        let cols = self.cols();
        for _ in 0..MAX_PIVOTS {
            // Bland: first column with negative reduced cost.
            let entering = (0..allowed).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let reduced = cost[j]
                    - self
                        .t
                        .iter()
                        .zip(&self.basis)
                        .map(|(row, &b)| cost[b] * row[j])
                        .sum::<f64>();
                reduced < -PIVOT_EPS
            });
            let Some(j) = entering else {
                return Ok(true);
            };
            let mut leaving: Option<(usize, f64)> = None;
            for (i, row) in self.t.iter().enumerate() {
                if row[j] > PIVOT_EPS {
                    let ratio = row[cols] / row[j];
                    leaving = match leaving {
                        None => Some((i, ratio)),
                        Some((k, best)) => {
                            if ratio < best - PIVOT_EPS
                                || (ratio <= best + PIVOT_EPS && self.basis[i] < self.basis[k])
                            {
                                Some((i, ratio))
                            } else {
                                Some((k, best))
                            }
                        }
                    };
                }
            }
            let Some((i, _)) = leaving else {
                return Ok(false);
            };
            self.pivot(i, j);
        }
        Err(invalid("simplex pivot limit reached"))
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c];
        for v in self.t[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let factor = row[c];
            if factor != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= factor * pv;
                }
                row[c] = 0.0;
            }
        }
        self.basis[r] = c;
    }

    fn drive_out_artificials(&mut self) {
        let mut i = 0;
        while i < self.t.len() {
            if self.basis[i] >= self.first_artificial {
                let replacement =
                    (0..self.first_artificial).find(|&j| self.t[i][j].abs() > 1e-9);
                match replacement {
                    Some(j) => self.pivot(i, j),
                    None => {
                        // Redundant row.
                        self.t.remove(i);
                        self.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solution(lp: &LinearProgram) -> LpSolution {
        lp.solve().unwrap().optimal().expect("optimal")
    }

    #[test]
    fn equality_within_bounds() {
        let mut lp = LinearProgram::maximize(vec![0.0]);
        lp.set_bounds(0, 0.0, 2.0);
        lp.add_constraint(vec![1.0], Relation::Eq, 1.0);
        assert!((solution(&lp).x[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn equality_outside_bounds_is_infeasible() {
        let mut lp = LinearProgram::maximize(vec![0.0]);
        lp.set_bounds(0, 0.0, 2.0);
        lp.add_constraint(vec![1.0], Relation::Eq, 3.0);
        assert_eq!(lp.solve().unwrap(), LpOutcome::Infeasible);
    }

    #[test]
    fn lower_bound_row() {
        let mut lp = LinearProgram::minimize(vec![1.0]);
        lp.add_constraint(vec![1.0], Relation::Ge, 0.5);
        let s = solution(&lp);
        assert!((s.x[0] - 0.5).abs() < 1e-12);
        assert!((s.objective - 0.5).abs() < 1e-12);
    }

    #[test]
    fn unbounded_detected() {
        let mut lp = LinearProgram::maximize(vec![1.0, 1.0]);
        lp.add_constraint(vec![1.0, -1.0], Relation::Le, 1.0);
        assert_eq!(lp.solve().unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn textbook_two_variable() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let mut lp = LinearProgram::maximize(vec![3.0, 5.0]);
        lp.add_constraint(vec![1.0, 0.0], Relation::Le, 4.0);
        lp.add_constraint(vec![0.0, 2.0], Relation::Le, 12.0);
        lp.add_constraint(vec![3.0, 2.0], Relation::Le, 18.0);
        let s = solution(&lp);
        assert!((s.x[0] - 2.0).abs() < 1e-9 && (s.x[1] - 6.0).abs() < 1e-9);
        assert!((s.objective - 36.0).abs() < 1e-9);
    }

    #[test]
    fn mixed_relations_and_shifted_bounds() {
        // min x + y s.t. x + y >= 2, x - y = 0.5, x in [1, 3], y in [-1, 5]
        let mut lp = LinearProgram::minimize(vec![1.0, 1.0]);
        lp.set_bounds(0, 1.0, 3.0).set_bounds(1, -1.0, 5.0);
        lp.add_constraint(vec![1.0, 1.0], Relation::Ge, 2.0);
        lp.add_constraint(vec![1.0, -1.0], Relation::Eq, 0.5);
        let s = solution(&lp);
        assert!((s.x[0] - 1.25).abs() < 1e-9 && (s.x[1] - 0.75).abs() < 1e-9);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::minimize(vec![1.0, 2.0]);
        lp.add_constraint(vec![1.0, 1.0], Relation::Eq, 1.0);
        lp.add_constraint(vec![2.0, 2.0], Relation::Eq, 2.0);
        let s = solution(&lp);
        assert!((s.x[0] - 1.0).abs() < 1e-9 && s.x[1].abs() < 1e-9);
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example cycles under the largest-coefficient rule.
        let mut lp = LinearProgram::minimize(vec![-0.75, 150.0, -0.02, 6.0]);
        lp.add_constraint(vec![0.25, -60.0, -0.04, 9.0], Relation::Le, 0.0);
        lp.add_constraint(vec![0.5, -90.0, -0.02, 3.0], Relation::Le, 0.0);
        lp.add_constraint(vec![0.0, 0.0, 1.0, 0.0], Relation::Le, 1.0);
        let s = solution(&lp);
        assert!((s.objective + 0.05).abs() < 1e-9);
    }

    #[test]
    fn negative_rhs_rows() {
        // -x <= -2 means x >= 2
        let mut lp = LinearProgram::minimize(vec![1.0]);
        lp.add_constraint(vec![-1.0], Relation::Le, -2.0);
        assert!((solution(&lp).x[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn crossed_bounds_infeasible() {
        let mut lp = LinearProgram::minimize(vec![1.0]);
        lp.set_bounds(0, 2.0, 1.0);
        assert_eq!(lp.solve().unwrap(), LpOutcome::Infeasible);
    }
}
