//! Dense two-phase simplex for small linear programs.
//!
//! Minimizes `c·x` subject to `A x {≤,=,≥} b` and `x ≥ 0`. Entering columns
//! follow Bland's rule (lowest eligible index, ties in the ratio test broken
//! by lowest basis index), which rules out cycling on the degenerate bases
//! the power-flow programs produce. Instances here are tens of variables, so
//! a dense tableau is the right tool.

use crate::math;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Feasibility / pivot tolerance.
const TOL: f64 = 1e-9;
/// Phase-1 objective above this is reported as infeasible.
const FEAS_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<f64>, relation: Relation, rhs: f64) -> Self {
        Self { coeffs, relation, rhs }
    }
}

/// `min objective · x` over `x ≥ 0` under the listed constraints.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimplexError {
    Infeasible,
    Unbounded,
    DimensionMismatch { row: usize, expected: usize, got: usize },
    IterationLimit,
}

impl fmt::Display for SimplexError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Infeasible => write!(f, "linear program is infeasible"),
            Self::Unbounded => write!(f, "linear program is unbounded"),
            Self::DimensionMismatch { row, expected, got } => {
                write!(f, "constraint {row} has {got} coefficients, expected {expected}")
            }
            Self::IterationLimit => write!(f, "simplex iteration limit reached"),
        }
    }
}

impl core::error::Error for SimplexError {}

struct Tableau {
    /// Row-major coefficient matrix, `cols + 1` wide (last column is rhs).
    data: Vec<f64>,
    rows: usize,
    cols: usize,
    basis: Vec<usize>,
    /// Columns barred from entering (artificials in phase 2).
    banned: Vec<bool>,
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * (self.cols + 1) + c]
    }

    #[inline]
    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.cols)
    }

    #[inline]
    fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * (self.cols + 1) + c] = v;
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let width = self.cols + 1;
        let inv = 1.0 / self.at(pr, pc);
        for c in 0..width {
            self.data[pr * width + c] *= inv;
        }
        self.set(pr, pc, 1.0);
        for r in 0..self.rows {
            if r == pr {
                continue;
            }
            let factor = self.at(r, pc);
            if factor == 0.0 {
                continue;
            }
            for c in 0..width {
                let v = self.data[pr * width + c];
                self.data[r * width + c] -= factor * v;
            }
            self.set(r, pc, 0.0);
        }
        self.basis[pr] = pc;
    }

    /// Runs simplex on the given reduced-cost row in place; `cost` has one
    /// entry per column. Returns Err(Unbounded) when an improving column has
    /// no blocking row.
    fn optimize(&mut self, cost: &mut [f64]) -> Result<(), SimplexError> {
        let limit = 50_000 + 200 * (self.rows + self.cols);
        for _ in 0..limit {
            // Bland: lowest-index column with negative reduced cost.
            let mut entering = None;
            for (c, &d) in cost.iter().enumerate() {
                if !self.banned[c] && d < -TOL {
                    entering = Some(c);
                    break;
                }
            }
            let Some(pc) = entering else {
                return Ok(());
            };
            // Ratio test; ties go to the row with the smallest basis index.
            let mut pivot_row: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.at(r, pc);
                if a > TOL {
                    let ratio = self.rhs(r) / a;
                    match pivot_row {
                        None => pivot_row = Some((r, ratio)),
                        Some((br, best)) => {
                            if ratio < best - TOL
                                || (ratio < best + TOL && self.basis[r] < self.basis[br])
                            {
                                pivot_row = Some((r, ratio));
                            }
                        }
                    }
                }
            }
            let Some((pr, _)) = pivot_row else {
                return Err(SimplexError::Unbounded);
            };
            let factor = cost[pc];
            self.pivot(pr, pc);
            // Update the reduced-cost row against the new unit pivot row.
            let width = self.cols + 1;
            for (c, slot) in cost.iter_mut().enumerate() {
                *slot -= factor * self.data[pr * width + c];
            }
        }
        Err(SimplexError::IterationLimit)
    }
}

/// Solves the program, returning a basic optimal solution.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution, SimplexError> {
    let n = lp.objective.len();
    for (row, c) in lp.constraints.iter().enumerate() {
        if c.coeffs.len() != n {
            return Err(SimplexError::DimensionMismatch { row, expected: n, got: c.coeffs.len() });
        }
    }
    let m = lp.constraints.len();

    // Column layout: structural | slack/surplus (one per row) | artificials.
    let mut needs_artificial = vec![false; m];
    for (r, c) in lp.constraints.iter().enumerate() {
        let flipped = c.rhs < 0.0;
        let rel = effective_relation(c.relation, flipped);
        needs_artificial[r] = !matches!(rel, Relation::Le);
    }
    let n_art = needs_artificial.iter().filter(|&&b| b).count();
    let cols = n + m + n_art;
    let width = cols + 1;

    let mut tab = Tableau {
        data: vec![0.0; m * width],
        rows: m,
        cols,
        basis: vec![0; m],
        banned: vec![false; cols],
    };

    let mut art_idx = n + m;
    for (r, c) in lp.constraints.iter().enumerate() {
        let flipped = c.rhs < 0.0;
        let sign = if flipped { -1.0 } else { 1.0 };
        for (j, &a) in c.coeffs.iter().enumerate() {
            tab.set(r, j, sign * a);
        }
        tab.set(r, cols, sign * c.rhs);
        let rel = effective_relation(c.relation, flipped);
        match rel {
            Relation::Le => {
                tab.set(r, n + r, 1.0);
                tab.basis[r] = n + r;
            }
            Relation::Ge => {
                tab.set(r, n + r, -1.0);
                tab.set(r, art_idx, 1.0);
                tab.basis[r] = art_idx;
                art_idx += 1;
            }
            Relation::Eq => {
                tab.set(r, art_idx, 1.0);
                tab.basis[r] = art_idx;
                art_idx += 1;
            }
        }
    }

    // Phase 1: minimize the artificial sum.
    if n_art > 0 {
        let mut cost = vec![0.0; cols];
        for slot in &mut cost[n + m..cols] {
            *slot = 1.0;
        }
        for r in 0..m {
            if tab.basis[r] >= n + m {
                for (c, slot) in cost.iter_mut().enumerate() {
                    *slot -= tab.at(r, c);
                }
            }
        }
        tab.optimize(&mut cost)?;
        let infeas: f64 = (0..m)
            .filter(|&r| tab.basis[r] >= n + m)
            .map(|r| tab.rhs(r))
            .sum();
        if infeas > FEAS_TOL {
            return Err(SimplexError::Infeasible);
        }
        // Pivot remaining artificials out of the basis; rows that offer no
        // pivot are redundant and dropped.
        let mut r = 0;
        while r < tab.rows {
            if tab.basis[r] >= n + m {
                let mut pivot_col = None;
                for c in 0..n + m {
                    if math::abs(tab.at(r, c)) > TOL {
                        pivot_col = Some(c);
                        break;
                    }
                }
                match pivot_col {
                    Some(pc) => tab.pivot(r, pc),
                    None => {
                        remove_row(&mut tab, r);
                        continue;
                    }
                }
            }
            r += 1;
        }
        for j in n + m..cols {
            tab.banned[j] = true;
        }
    }

    // Phase 2: original objective over the feasible tableau.
    let mut cost = vec![0.0; cols];
    cost[..n].copy_from_slice(&lp.objective);
    for r in 0..tab.rows {
        let b = tab.basis[r];
        let cb = cost[b];
        if cb != 0.0 {
            for (c, slot) in cost.iter_mut().enumerate() {
                *slot -= cb * tab.at(r, c);
            }
            cost[b] = 0.0;
        }
    }
    tab.optimize(&mut cost)?;

    let mut x = vec![0.0; n];
    for r in 0..tab.rows {
        if tab.basis[r] < n {
            x[tab.basis[r]] = tab.rhs(r).max(0.0);
        }
    }
    let objective = lp
        .objective
        .iter()
        .zip(x.iter())
        .map(|(c, v)| c * v)
        .sum();
    Ok(LpSolution { x, objective })
}

fn effective_relation(rel: Relation, flipped: bool) -> Relation {
    if !flipped {
        return rel;
    }
    match rel {
        Relation::Le => Relation::Ge,
        Relation::Ge => Relation::Le,
        Relation::Eq => Relation::Eq,
    }
}

fn remove_row(tab: &mut Tableau, row: usize) {
    let width = tab.cols + 1;
    let start = row * width;
    tab.data.drain(start..start + width);
    tab.basis.remove(row);
    tab.rows -= 1;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(objective: &[f64], rows: &[(&[f64], Relation, f64)]) -> LinearProgram {
        LinearProgram {
            objective: objective.to_vec(),
            constraints: rows
                .iter()
                .map(|(c, rel, b)| Constraint::new(c.to_vec(), *rel, *b))
                .collect(),
        }
    }

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y s.t. x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → (2, 6), value 36.
        let p = lp(
            &[-3.0, -5.0],
            &[
                (&[1.0, 0.0], Relation::Le, 4.0),
                (&[0.0, 2.0], Relation::Le, 12.0),
                (&[3.0, 2.0], Relation::Le, 18.0),
            ],
        );
        let s = solve(&p).unwrap();
        assert!((s.objective + 36.0).abs() < 1e-9);
        assert!((s.x[0] - 2.0).abs() < 1e-9);
        assert!((s.x[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn equality_and_ge_rows() {
        // min 2x + 3y s.t. x + y = 10, x ≥ 3 → x=10, y=0, cost 20.
        let p = lp(
            &[2.0, 3.0],
            &[
                (&[1.0, 1.0], Relation::Eq, 10.0),
                (&[1.0, 0.0], Relation::Ge, 3.0),
            ],
        );
        let s = solve(&p).unwrap();
        assert!((s.objective - 20.0).abs() < 1e-9);
        assert!((s.x[0] - 10.0).abs() < 1e-9);
    }

    #[test]
    fn negative_rhs_normalization() {
        // min x + y s.t. −x − y ≤ −4  (i.e. x + y ≥ 4)
        let p = lp(&[1.0, 1.0], &[(&[-1.0, -1.0], Relation::Le, -4.0)]);
        let s = solve(&p).unwrap();
        assert!((s.objective - 4.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_detected() {
        let p = lp(
            &[1.0],
            &[
                (&[1.0], Relation::Ge, 5.0),
                (&[1.0], Relation::Le, 2.0),
            ],
        );
        assert_eq!(solve(&p), Err(SimplexError::Infeasible));
    }

    #[test]
    fn unbounded_detected() {
        // min −x with x ≥ 0 free to grow.
        let p = lp(&[-1.0], &[(&[0.0], Relation::Le, 1.0)]);
        assert_eq!(solve(&p), Err(SimplexError::Unbounded));
    }

    #[test]
    fn zero_cost_ray_is_not_unbounded() {
        // y can grow for free (cost 0) but never improves the objective.
        let p = lp(
            &[1.0, 0.0],
            &[(&[1.0, -1.0], Relation::Ge, 1.0)],
        );
        let s = solve(&p).unwrap();
        assert!((s.objective - 1.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_instance_terminates() {
        // Multiple redundant constraints through the same vertex.
        let p = lp(
            &[-1.0, -1.0],
            &[
                (&[1.0, 0.0], Relation::Le, 1.0),
                (&[1.0, 0.0], Relation::Le, 1.0),
                (&[0.0, 1.0], Relation::Le, 1.0),
                (&[1.0, 1.0], Relation::Le, 2.0),
                (&[1.0, 1.0], Relation::Eq, 2.0),
            ],
        );
        let s = solve(&p).unwrap();
        assert!((s.objective + 2.0).abs() < 1e-9);
    }

    #[test]
    fn dimension_mismatch() {
        let p = lp(&[1.0, 2.0], &[(&[1.0], Relation::Le, 1.0)]);
        assert!(matches!(solve(&p), Err(SimplexError::DimensionMismatch { .. })));
    }
}
