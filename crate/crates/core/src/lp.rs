//! Exact two-phase simplex over [`Rational`].
//!
//! Problems are stated as
//!
//! ```text
//! maximize   c·x
//! subject to E x  = e
//!            A x <= b
//!            x   >= 0
//! ```
//!
//! Phase one introduces one artificial variable per row that lacks an
//! obvious starting basic variable and minimizes their sum. Phase two
//! optimizes the real objective from the resulting basis. Both phases use
//! Bland's smallest-index rule, so degenerate problems (the Hardy systems are
//! full of zero conditions) cannot cycle. There is no floating-point path.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{self, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LpError {
    #[error("objective has {got} coefficients, expected {expected}")]
    ObjectiveLength { expected: usize, got: usize },
    #[error("{kind} constraint {index} has {got} coefficients, expected {expected}")]
    RowLength {
        kind: &'static str,
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("free variables are not supported; every variable must be nonnegative")]
    FreeVariables,
}

/// A single row `row·x (= or <=) rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    #[serde(with = "rational::serde_vec")]
    pub row: Vec<Rational>,
    #[serde(with = "rational::serde_str")]
    pub rhs: Rational,
}

impl Constraint {
    pub fn new(row: Vec<Rational>, rhs: Rational) -> Self {
        Self { row, rhs }
    }

    pub fn lhs(&self, x: &[Rational]) -> Rational {
        dot(&self.row, x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub num_vars: usize,
    #[serde(with = "rational::serde_vec")]
    pub objective: Vec<Rational>,
    pub eq_constraints: Vec<Constraint>,
    /// Rows read as `row·x <= rhs`.
    pub ineq_constraints: Vec<Constraint>,
    pub nonneg: bool,
}

impl LinearProgram {
    /// An empty program over `num_vars` nonnegative variables with a zero objective.
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            objective: vec![Rational::zero(); num_vars],
            eq_constraints: Vec::new(),
            ineq_constraints: Vec::new(),
            nonneg: true,
        }
    }

    pub fn with_objective(mut self, objective: Vec<Rational>) -> Self {
        self.objective = objective;
        self
    }

    pub fn add_eq(&mut self, row: Vec<Rational>, rhs: Rational) {
        self.eq_constraints.push(Constraint::new(row, rhs));
    }

    pub fn add_le(&mut self, row: Vec<Rational>, rhs: Rational) {
        self.ineq_constraints.push(Constraint::new(row, rhs));
    }

    /// Adds `row·x >= rhs`, stored as `-row·x <= -rhs`.
    pub fn add_ge(&mut self, row: Vec<Rational>, rhs: Rational) {
        let row = row.into_iter().map(|v| -v).collect();
        self.ineq_constraints.push(Constraint::new(row, -rhs));
    }

    pub fn validate(&self) -> Result<(), LpError> {
        if !self.nonneg {
            return Err(LpError::FreeVariables);
        }
        if self.objective.len() != self.num_vars {
            return Err(LpError::ObjectiveLength {
                expected: self.num_vars,
                got: self.objective.len(),
            });
        }
        let groups = [
            ("equality", &self.eq_constraints),
            ("inequality", &self.ineq_constraints),
        ];
        for (kind, rows) in groups {
            for (index, c) in rows.iter().enumerate() {
                if c.row.len() != self.num_vars {
                    return Err(LpError::RowLength {
                        kind,
                        index,
                        expected: self.num_vars,
                        got: c.row.len(),
                    });
                }
            }
        }
        Ok(())
    }

    /// True iff `x` satisfies every constraint exactly, nonnegativity included.
    pub fn is_feasible_point(&self, x: &[Rational]) -> bool {
        x.len() == self.num_vars
            && x.iter().all(|v| !v.is_negative())
            && self.eq_constraints.iter().all(|c| c.lhs(x) == c.rhs)
            && self.ineq_constraints.iter().all(|c| c.lhs(x) <= c.rhs)
    }

    /// Number of constraints (inequalities and nonnegativity bounds) that hold
    /// with equality at `x`.
    pub fn tight_count(&self, x: &[Rational]) -> usize {
        let ineq = self
            .ineq_constraints
            .iter()
            .filter(|c| c.lhs(x) == c.rhs)
            .count();
        ineq + x.iter().filter(|v| v.is_zero()).count()
    }

    pub fn objective_value(&self, x: &[Rational]) -> Rational {
        dot(&self.objective, x)
    }

    /// Debug dump with every number as a `"num/den"` string.
    pub fn to_diagnostic_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("rationals serialize as strings")
    }

    pub fn from_diagnostic_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpResult {
    /// `solution` is a basic feasible solution attaining `value`.
    Optimal {
        value: Rational,
        solution: Vec<Rational>,
    },
    Infeasible,
    Unbounded,
}

impl LpResult {
    pub fn status(&self) -> LpStatus {
        match self {
            LpResult::Optimal { .. } => LpStatus::Optimal,
            LpResult::Infeasible => LpStatus::Infeasible,
            LpResult::Unbounded => LpStatus::Unbounded,
        }
    }

    pub fn value(&self) -> Option<&Rational> {
        match self {
            LpResult::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }

    pub fn solution(&self) -> Option<&[Rational]> {
        match self {
            LpResult::Optimal { solution, .. } => Some(solution),
            _ => None,
        }
    }
}

pub fn solve_max(lp: &LinearProgram) -> Result<LpResult, LpError> {
    lp.validate()?;
    let mut t = match Tableau::phase_one(lp) {
        Some(t) => t,
        None => return Ok(LpResult::Infeasible),
    };
    let mut cost = vec![Rational::zero(); t.cols];
    cost[..lp.num_vars].clone_from_slice(&lp.objective);
    t.set_objective(&cost);
    if !t.run_simplex() {
        return Ok(LpResult::Unbounded);
    }
    let solution = t.primal(lp.num_vars);
    let value = lp.objective_value(&solution);
    debug_assert_eq!(value, -t.obj_rhs.clone());
    Ok(LpResult::Optimal { value, solution })
}

/// Phase one of [`solve_max`] on its own.
pub fn check_feasible(lp: &LinearProgram) -> Result<bool, LpError> {
    lp.validate()?;
    Ok(Tableau::phase_one(lp).is_some())
}

/// A point satisfying every constraint, if one exists.
pub fn find_feasible_point(lp: &LinearProgram) -> Result<Option<Vec<Rational>>, LpError> {
    lp.validate()?;
    Ok(Tableau::phase_one(lp).map(|t| t.primal(lp.num_vars)))
}

/// Dense simplex tableau. The objective row stores reduced costs `c_j - z_j`
/// and `obj_rhs` holds the negated objective value of the current basis.
struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    obj: Vec<Rational>,
    obj_rhs: Rational,
    cols: usize,
}

impl Tableau {
    /// Builds the standard-form tableau and drives out the artificial
    /// variables. Returns `None` when the program is infeasible.
    fn phase_one(lp: &LinearProgram) -> Option<Tableau> {
        let n = lp.num_vars;
        let n_slack = lp.ineq_constraints.len();
        let m = lp.eq_constraints.len() + n_slack;

        let mut rows = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        // Row i either starts with its slack in the basis or needs an artificial.
        let mut start: Vec<Option<usize>> = Vec::with_capacity(m);

        for c in &lp.eq_constraints {
            let mut row = c.row.clone();
            row.resize(n + n_slack, Rational::zero());
            rows.push(row);
            rhs.push(c.rhs.clone());
            start.push(None);
        }
        for (k, c) in lp.ineq_constraints.iter().enumerate() {
            let mut row = c.row.clone();
            row.resize(n + n_slack, Rational::zero());
            row[n + k] = Rational::one();
            rows.push(row);
            rhs.push(c.rhs.clone());
            start.push(Some(n + k));
        }
        for i in 0..m {
            if rhs[i].is_negative() {
                for v in rows[i].iter_mut() {
                    *v = -std::mem::take(v);
                }
                rhs[i] = -std::mem::take(&mut rhs[i]);
                // slack coefficient is now -1 and cannot start basic
                start[i] = None;
            }
        }

        let art_rows: Vec<usize> = (0..m).filter(|&i| start[i].is_none()).collect();
        let first_art = n + n_slack;
        let cols = first_art + art_rows.len();
        for row in rows.iter_mut() {
            row.resize(cols, Rational::zero());
        }
        let mut basis = vec![0; m];
        for (i, s) in start.iter().enumerate() {
            if let Some(j) = s {
                basis[i] = *j;
            }
        }
        for (k, &i) in art_rows.iter().enumerate() {
            rows[i][first_art + k] = Rational::one();
            basis[i] = first_art + k;
        }

        let mut t = Tableau {
            rows,
            rhs,
            basis,
            obj: vec![Rational::zero(); cols],
            obj_rhs: Rational::zero(),
            cols,
        };
        if art_rows.is_empty() {
            return Some(t.truncate_cols(first_art));
        }

        // maximize -(sum of artificials)
        let mut cost = vec![Rational::zero(); cols];
        for c in cost.iter_mut().skip(first_art) {
            *c = -Rational::one();
        }
        t.set_objective(&cost);
        let bounded = t.run_simplex();
        debug_assert!(bounded, "phase one objective is bounded above by zero");
        if !t.obj_rhs.is_zero() {
            return None;
        }

        // Pivot remaining zero-level artificials out, dropping rows that are
        // linear combinations of the others.
        let mut i = 0;
        while i < t.rows.len() {
            if t.basis[i] >= first_art {
                match (0..first_art).find(|&j| !t.rows[i][j].is_zero()) {
                    Some(j) => {
                        t.pivot(i, j);
                        i += 1;
                    }
                    None => {
                        t.rows.remove(i);
                        t.rhs.remove(i);
                        t.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
        Some(t.truncate_cols(first_art))
    }

    fn truncate_cols(mut self, cols: usize) -> Tableau {
        for row in self.rows.iter_mut() {
            row.truncate(cols);
        }
        self.obj.truncate(cols);
        self.cols = cols;
        self
    }

    /// Installs `cost` as the objective, expressed in reduced form against the
    /// current basis.
    fn set_objective(&mut self, cost: &[Rational]) {
        self.obj = cost.to_vec();
        self.obj_rhs = Rational::zero();
        for i in 0..self.rows.len() {
            let cb = &cost[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for (o, a) in self.obj.iter_mut().zip(&self.rows[i]) {
                if !a.is_zero() {
                    *o -= cb * a;
                }
            }
            self.obj_rhs -= cb * &self.rhs[i];
        }
    }

    /// Runs Bland-rule pivots to optimality. Returns `false` if unbounded.
    fn run_simplex(&mut self) -> bool {
        loop {
            let Some(enter) = (0..self.cols).find(|&j| self.obj[j].is_positive()) else {
                return true;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][enter];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => {
                        ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                Some((i, _)) => self.pivot(i, enter),
                None => return false,
            }
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.rows[r][c].recip();
        if !inv.is_one() {
            for v in self.rows[r].iter_mut() {
                if !v.is_zero() {
                    *v *= &inv;
                }
            }
            self.rhs[r] *= &inv;
        }
        let nz: Vec<usize> = (0..self.cols)
            .filter(|&j| !self.rows[r][j].is_zero())
            .collect();
        let prow = std::mem::take(&mut self.rows[r]);
        let prhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][c].is_zero() {
                continue;
            }
            let f = self.rows[i][c].clone();
            for &j in &nz {
                let delta = &f * &prow[j];
                self.rows[i][j] -= delta;
            }
            let delta = &f * &prhs;
            self.rhs[i] -= delta;
        }
        if !self.obj[c].is_zero() {
            let f = self.obj[c].clone();
            for &j in &nz {
                let delta = &f * &prow[j];
                self.obj[j] -= delta;
            }
            self.obj_rhs -= &f * &prhs;
        }
        self.rows[r] = prow;
        self.basis[r] = c;
    }

    fn primal(&self, n: usize) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); n];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < n {
                x[b] = self.rhs[i].clone();
            }
        }
        x
    }
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .filter(|(x, y)| !x.is_zero() && !y.is_zero())
        .map(|(x, y)| x * y)
        .sum()
}

/// Exact rank by fraction-preserving Gaussian elimination.
pub fn rank(matrix: &[Vec<Rational>]) -> usize {
    let mut m: Vec<Vec<Rational>> = matrix.to_vec();
    let cols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for i in (r + 1)..m.len() {
            if m[i][c].is_zero() {
                continue;
            }
            let f = &m[i][c] * &inv;
            let (top, rest) = m.split_at_mut(i);
            for (dst, src) in rest[0][c..cols].iter_mut().zip(&top[r][c..cols]) {
                *dst -= &f * src;
            }
        }
        r += 1;
        if r == m.len() {
            break;
        }
    }
    r
}
