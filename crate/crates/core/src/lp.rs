//! Exact rational linear programming.
//!
//! Programs are lists of rows `a·x (= | >=) b` over unrestricted variables.
//! Rows of the form `x_j >= 0` are recognized and treated as variable bounds
//! inside the solver, but they remain ordinary rows for certificate purposes:
//! every answer is returned as a point or a row-multiplier vector that the
//! independent checkers in this module verify without consulting the solver.
//!
//! The solver is a dense two-phase tableau simplex with Bland's rule.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Eq,
    Ge,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpRow {
    pub label: String,
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl LpRow {
    pub fn new(
        label: impl Into<String>,
        coeffs: Vec<Rational>,
        relation: Relation,
        rhs: Rational,
    ) -> Self {
        Self {
            label: label.into(),
            coeffs,
            relation,
            rhs,
        }
    }

    pub fn lhs(&self, x: &[Rational]) -> Rational {
        self.coeffs.iter().zip(x).map(|(a, v)| a * v).sum()
    }

    pub fn holds(&self, x: &[Rational]) -> bool {
        let lhs = self.lhs(x);
        match self.relation {
            Relation::Eq => lhs == self.rhs,
            Relation::Ge => lhs >= self.rhs,
        }
    }

    /// Single positive coefficient, zero right-hand side, `>=`.
    fn bound_var(&self) -> Option<usize> {
        if self.relation != Relation::Ge || !self.rhs.is_zero() {
            return None;
        }
        let mut nz = self.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero());
        match (nz.next(), nz.next()) {
            (Some((j, c)), None) if c.is_positive() => Some(j),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub rows: Vec<LpRow>,
}

/// Row multipliers `λ` with `λ_i >= 0` on `>=` rows, `Σ λ_i a_i = 0` and
/// `Σ λ_i b_i > 0`: summing the rows gives `0 >= positive`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FarkasCertificate {
    pub multipliers: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FeasibilityOutcome {
    Feasible { point: Vec<Rational> },
    Infeasible { farkas: FarkasCertificate },
}

impl FeasibilityOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, FeasibilityOutcome::Feasible { .. })
    }
}

/// Optimum of `min c·x` together with row multipliers `λ` (sign-feasible,
/// `Σ λ_i a_i = c`) whose value `Σ λ_i b_i` equals the optimum, proving that
/// no feasible point does better.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Optimum {
    pub value: Rational,
    pub point: Vec<Rational>,
    pub dual: Vec<Rational>,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: LpRow) -> usize {
        self.rows.push(row);
        self.rows.len() - 1
    }

    pub fn validate(&self) -> Result<()> {
        for (i, row) in self.rows.iter().enumerate() {
            if row.coeffs.len() != self.num_vars {
                return Err(Error::MalformedLp(format!(
                    "row {i} ({}) has {} coefficients, expected {}",
                    row.label,
                    row.coeffs.len(),
                    self.num_vars
                )));
            }
        }
        Ok(())
    }

    /// Labels of the rows `x` violates.
    pub fn violated_rows(&self, x: &[Rational]) -> Vec<String> {
        self.rows
            .iter()
            .filter(|r| x.len() != self.num_vars || !r.holds(x))
            .map(|r| r.label.clone())
            .collect()
    }

    pub fn check_point(&self, x: &[Rational]) -> bool {
        x.len() == self.num_vars && self.rows.iter().all(|r| r.holds(x))
    }

    /// `Σ λ_i a_i` over all rows.
    pub fn combine(&self, multipliers: &[Rational]) -> Vec<Rational> {
        let mut acc = vec![Rational::zero(); self.num_vars];
        for (row, l) in self.rows.iter().zip(multipliers) {
            if l.is_zero() {
                continue;
            }
            for (a, c) in acc.iter_mut().zip(&row.coeffs) {
                *a += l * c;
            }
        }
        acc
    }

    fn check_signs(&self, multipliers: &[Rational]) -> std::result::Result<(), String> {
        if multipliers.len() != self.rows.len() {
            return Err(format!(
                "{} multipliers for {} rows",
                multipliers.len(),
                self.rows.len()
            ));
        }
        for (row, l) in self.rows.iter().zip(multipliers) {
            if row.relation == Relation::Ge && l.is_negative() {
                return Err(format!(
                    "negative multiplier on inequality row {}",
                    row.label
                ));
            }
        }
        Ok(())
    }

    /// Verifies a Farkas certificate and returns the positive constant
    /// `Σ λ_i b_i` it derives `0 >=` from.
    pub fn check_farkas(&self, cert: &FarkasCertificate) -> std::result::Result<Rational, String> {
        self.check_signs(&cert.multipliers)?;
        if let Some(j) = self
            .combine(&cert.multipliers)
            .iter()
            .position(|c| !c.is_zero())
        {
            return Err(format!(
                "combination has nonzero coefficient on variable {j}"
            ));
        }
        let value: Rational = self
            .rows
            .iter()
            .zip(&cert.multipliers)
            .map(|(r, l)| l * &r.rhs)
            .sum();
        if value.is_positive() {
            Ok(value)
        } else {
            Err(format!("combined right-hand side {value} is not positive"))
        }
    }

    /// Verifies that `λ` proves `c·x >= Σ λ_i b_i` for every feasible `x`, and
    /// returns that bound.
    pub fn check_dual(
        &self,
        objective: &[Rational],
        dual: &[Rational],
    ) -> std::result::Result<Rational, String> {
        self.check_signs(dual)?;
        if self.combine(dual).as_slice() != objective {
            return Err("multipliers do not reproduce the objective".into());
        }
        Ok(self.rows.iter().zip(dual).map(|(r, l)| l * &r.rhs).sum())
    }
}

/// Decides feasibility with a phase-1 simplex.
pub fn solve(lp: &LinearProgram) -> Result<FeasibilityOutcome> {
    lp.validate()?;
    let mut t = Tableau::new(lp);
    let infeasibility = t.phase_one();
    if infeasibility.is_positive() {
        let y = t.row_duals(true);
        let multipliers = t.row_multipliers(lp, &y, &vec![Rational::zero(); lp.num_vars])?;
        let farkas = FarkasCertificate { multipliers };
        debug_assert!(lp.check_farkas(&farkas).is_ok());
        Ok(FeasibilityOutcome::Infeasible { farkas })
    } else {
        Ok(FeasibilityOutcome::Feasible { point: t.point() })
    }
}

/// Minimizes `objective·x`. `Ok(None)` when the program is infeasible.
pub fn minimize(lp: &LinearProgram, objective: &[Rational]) -> Result<Option<Optimum>> {
    lp.validate()?;
    if objective.len() != lp.num_vars {
        return Err(Error::MalformedLp("objective length mismatch".into()));
    }
    let mut t = Tableau::new(lp);
    if t.phase_one().is_positive() {
        return Ok(None);
    }
    t.phase_two(objective)?;
    let y = t.row_duals(false);
    let dual = t.row_multipliers(lp, &y, objective)?;
    let point = t.point();
    let value: Rational = objective.iter().zip(&point).map(|(c, x)| c * x).sum();
    debug_assert_eq!(lp.check_dual(objective, &dual).as_ref(), Ok(&value));
    Ok(Some(Optimum { value, point, dual }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Column {
    Pos(usize),
    Neg(usize),
    Slack(usize),
    Artificial(usize),
}

struct Tableau {
    columns: Vec<Column>,
    /// Tableau row -> (LP row index, sign applied so the rhs is nonnegative).
    row_map: Vec<(usize, Rational)>,
    a: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    reduced: Vec<Rational>,
    basis: Vec<usize>,
    costs: Vec<Rational>,
    /// Variable -> LP row acting as its `>= 0` bound.
    bound_row: Vec<Option<usize>>,
    first_artificial: usize,
}

impl Tableau {
    fn new(lp: &LinearProgram) -> Self {
        let mut bound_row = vec![None; lp.num_vars];
        let mut structural = Vec::new();
        for (i, row) in lp.rows.iter().enumerate() {
            match row.bound_var() {
                Some(j) if bound_row[j].is_none() => bound_row[j] = Some(i),
                _ => structural.push(i),
            }
        }
        let mut columns = Vec::new();
        for (j, b) in bound_row.iter().enumerate() {
            columns.push(Column::Pos(j));
            if b.is_none() {
                columns.push(Column::Neg(j));
            }
        }
        for (ti, &i) in structural.iter().enumerate() {
            if lp.rows[i].relation == Relation::Ge {
                columns.push(Column::Slack(ti));
            }
        }
        let first_artificial = columns.len();
        columns.extend((0..structural.len()).map(Column::Artificial));

        let mut a = Vec::with_capacity(structural.len());
        let mut rhs = Vec::with_capacity(structural.len());
        let mut row_map = Vec::with_capacity(structural.len());
        for (ti, &i) in structural.iter().enumerate() {
            let row = &lp.rows[i];
            let sign = if row.rhs.is_negative() {
                -Rational::one()
            } else {
                Rational::one()
            };
            let entries = columns
                .iter()
                .map(|col| match *col {
                    Column::Pos(j) => &sign * &row.coeffs[j],
                    Column::Neg(j) => -(&sign * &row.coeffs[j]),
                    Column::Slack(s) if s == ti => -sign.clone(),
                    Column::Artificial(s) if s == ti => Rational::one(),
                    _ => Rational::zero(),
                })
                .collect();
            a.push(entries);
            rhs.push(&sign * &row.rhs);
            row_map.push((i, sign));
        }
        let basis = (0..structural.len())
            .map(|ti| first_artificial + ti)
            .collect();
        let n = columns.len();
        Self {
            columns,
            row_map,
            a,
            rhs,
            reduced: vec![Rational::zero(); n],
            basis,
            costs: vec![Rational::zero(); n],
            bound_row,
            first_artificial,
        }
    }

    fn set_costs(&mut self, costs: Vec<Rational>) {
        self.reduced = costs.clone();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = &costs[b];
            if cb.is_zero() {
                continue;
            }
            for (r, v) in self.reduced.iter_mut().zip(&self.a[i]) {
                *r -= cb * v;
            }
        }
        self.costs = costs;
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.a[row][col].clone();
        for v in self.a[row].iter_mut() {
            *v /= &p;
        }
        self.rhs[row] /= &p;
        let pivot_row = self.a[row].clone();
        let pivot_rhs = self.rhs[row].clone();
        for i in 0..self.a.len() {
            if i == row || self.a[i][col].is_zero() {
                continue;
            }
            let factor = self.a[i][col].clone();
            for (v, pv) in self.a[i].iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &factor * pv;
                }
            }
            self.rhs[i] -= &factor * &pivot_rhs;
        }
        let factor = self.reduced[col].clone();
        if !factor.is_zero() {
            for (v, pv) in self.reduced.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &factor * pv;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Bland's rule iterations over the columns `< allowed`.
    fn iterate(&mut self, allowed: usize) -> Result<()> {
        loop {
            let Some(col) = (0..allowed).find(|&j| self.reduced[j].is_negative()) else {
                return Ok(());
            };
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.a.len() {
                let v = &self.a[i][col];
                if !v.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / v;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => {
                        ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi])
                    }
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((row, _)) => self.pivot(row, col),
                None => return Err(Error::Unbounded),
            }
        }
    }

    /// Minimizes the sum of artificials; returns the optimum (0 iff feasible).
    fn phase_one(&mut self) -> Rational {
        let n = self.columns.len();
        let costs = (0..n)
            .map(|j| {
                if j >= self.first_artificial {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            })
            .collect();
        self.set_costs(costs);
        self.iterate(n).expect("phase one is bounded below by zero");
        self.basis
            .iter()
            .zip(&self.rhs)
            .filter(|(&b, _)| b >= self.first_artificial)
            .map(|(_, v)| v.clone())
            .sum()
    }

    fn phase_two(&mut self, objective: &[Rational]) -> Result<()> {
        // Degenerate artificials are pivoted out where possible; rows where
        // that fails are redundant and stay inert.
        for i in 0..self.a.len() {
            if self.basis[i] < self.first_artificial {
                continue;
            }
            if let Some(col) = (0..self.first_artificial).find(|&j| !self.a[i][j].is_zero()) {
                self.pivot(i, col);
            }
        }
        let costs = self
            .columns
            .iter()
            .map(|col| match *col {
                Column::Pos(j) => objective[j].clone(),
                Column::Neg(j) => -objective[j].clone(),
                _ => Rational::zero(),
            })
            .collect();
        self.set_costs(costs);
        self.iterate(self.first_artificial)
    }

    /// Simplex multipliers of the standardized rows, read off the artificial
    /// columns (which carry `B^-1`).
    fn row_duals(&self, artificial_cost_one: bool) -> Vec<Rational> {
        (0..self.a.len())
            .map(|i| {
                let c = if artificial_cost_one {
                    Rational::one()
                } else {
                    Rational::zero()
                };
                c - &self.reduced[self.first_artificial + i]
            })
            .collect()
    }

    /// Maps standardized duals back to LP rows, charging the remaining slack
    /// on each bounded variable to its `x_j >= 0` row so that
    /// `Σ λ_i a_i = target` exactly.
    fn row_multipliers(
        &self,
        lp: &LinearProgram,
        y: &[Rational],
        target: &[Rational],
    ) -> Result<Vec<Rational>> {
        let mut multipliers = vec![Rational::zero(); lp.rows.len()];
        for ((row, sign), yi) in self.row_map.iter().zip(y) {
            multipliers[*row] = sign * yi;
        }
        let combined = lp.combine(&multipliers);
        for j in 0..lp.num_vars {
            let deficit = &target[j] - &combined[j];
            match self.bound_row[j] {
                Some(r) if !deficit.is_negative() => {
                    multipliers[r] = deficit / &lp.rows[r].coeffs[j]
                }
                None if deficit.is_zero() => {}
                _ => {
                    return Err(Error::MalformedLp(format!(
                        "internal: dual infeasible on variable {j}"
                    )))
                }
            }
        }
        Ok(multipliers)
    }

    fn point(&self) -> Vec<Rational> {
        let n = self.bound_row.len();
        let mut x = vec![Rational::zero(); n];
        for (i, &b) in self.basis.iter().enumerate() {
            match self.columns[b] {
                Column::Pos(j) => x[j] += &self.rhs[i],
                Column::Neg(j) => x[j] -= &self.rhs[i],
                _ => {}
            }
        }
        x
    }
}
