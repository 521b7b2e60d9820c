//! Small dense linear programs: minimize `c·x` subject to linear rows and
//! `x ≥ 0`, solved by a two-phase tableau simplex.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Feasibility tolerance applied when re-checking a returned solution.
pub const FEAS_TOL: f64 = 1e-7;
const PIVOT_TOL: f64 = 1e-9;
/// Consecutive degenerate pivots before switching to Bland's rule.
const DEGENERATE_STREAK: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub terms: Vec<(usize, f64)>,
    pub rel: Relation,
    pub rhs: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinearProgram {
    names: Vec<String>,
    constraints: Vec<Constraint>,
    objective: Vec<(usize, f64)>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>) -> usize {
        self.names.push(name.into());
        self.names.len() - 1
    }

    pub fn add_constraint(&mut self, terms: Vec<(usize, f64)>, rel: Relation, rhs: f64) -> Result<()> {
        if let Some(&(v, _)) = terms.iter().find(|(v, _)| *v >= self.names.len()) {
            return Err(Error::Lp(format!("constraint references undeclared variable {v}")));
        }
        self.constraints.push(Constraint { terms, rel, rhs });
        Ok(())
    }

    pub fn set_objective(&mut self, terms: Vec<(usize, f64)>) -> Result<()> {
        if let Some(&(v, _)) = terms.iter().find(|(v, _)| *v >= self.names.len()) {
            return Err(Error::Lp(format!("objective references undeclared variable {v}")));
        }
        self.objective = terms;
        Ok(())
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &[(usize, f64)] {
        &self.objective
    }

    pub fn var_name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn evaluate(&self, terms: &[(usize, f64)], x: &[f64]) -> f64 {
        terms.iter().map(|&(v, c)| c * x[v]).sum()
    }

    /// Largest constraint violation of `x` (including `x ≥ 0`).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = x.iter().fold(0.0f64, |w, &v| w.max(-v));
        for c in &self.constraints {
            let lhs = self.evaluate(&c.terms, x);
            let viol = match c.rel {
                Relation::Le => lhs - c.rhs,
                Relation::Ge => c.rhs - lhs,
                Relation::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }

    /// CPLEX-style text rendering.
    pub fn dump(&self) -> String {
        let expr = |terms: &[(usize, f64)]| {
            if terms.is_empty() {
                return "0".to_string();
            }
            let mut s = String::new();
            for (i, &(v, c)) in terms.iter().enumerate() {
                let sign = if c < 0.0 { "-" } else { "+" };
                if i > 0 {
                    write!(s, " {sign} ").unwrap();
                } else if c < 0.0 {
                    s.push('-');
                }
                write!(s, "{} {}", c.abs(), self.names[v]).unwrap();
            }
            s
        };
        let mut out = format!("minimize\n obj: {}\nsubject to\n", expr(&self.objective));
        for (i, c) in self.constraints.iter().enumerate() {
            let rel = match c.rel {
                Relation::Le => "<=",
                Relation::Eq => "=",
                Relation::Ge => ">=",
            };
            writeln!(out, " c{i}: {} {rel} {}", expr(&c.terms), c.rhs).unwrap();
        }
        out.push_str("end\n");
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub values: Vec<f64>,
    pub objective: f64,
}

/// Solver seam so an external LP code can stand in for the built-in simplex.
pub trait LpBackend: Send + Sync {
    fn solve(&self, lp: &LinearProgram) -> Result<LpSolution>;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct DenseSimplex;

impl LpBackend for DenseSimplex {
    fn solve(&self, lp: &LinearProgram) -> Result<LpSolution> {
        solve(lp)
    }
}

struct Tableau {
    rows: usize,
    /// Number of columns excluding the right-hand side.
    cols: usize,
    a: Vec<f64>,
    basis: Vec<usize>,
    /// Reduced costs; `obj[cols]` holds minus the objective value.
    obj: Vec<f64>,
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.a[r * (self.cols + 1) + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.cols)
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.cols + 1;
        let p = self.a[pr * w + pc];
        for c in 0..w {
            self.a[pr * w + c] /= p;
        }
        self.a[pr * w + pc] = 1.0;
        let (before, rest) = self.a.split_at_mut(pr * w);
        let (prow, after) = rest.split_at_mut(w);
        for row in before.chunks_mut(w).chain(after.chunks_mut(w)).chain(std::iter::once(&mut self.obj[..])) {
            let f = row[pc];
            if f != 0.0 {
                for c in 0..w {
                    row[c] -= f * prow[c];
                }
                row[pc] = 0.0;
            }
        }
        self.basis[pr] = pc;
    }

    fn set_costs(&mut self, cost: &[f64]) {
        self.obj = cost.to_vec();
        self.obj.push(0.0);
        for r in 0..self.rows {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                let w = self.cols + 1;
                for c in 0..w {
                    self.obj[c] -= cb * self.a[r * w + c];
                }
            }
        }
    }

    /// Runs simplex iterations over the allowed columns. Returns false if
    /// the objective is unbounded below.
    fn optimize(&mut self, allowed: &[bool]) -> Result<bool> {
        let mut degenerate = 0usize;
        let mut bland = false;
        let limit = 50_000 + 200 * (self.rows + self.cols);
        for _ in 0..limit {
            let entering = if bland {
                (0..self.cols).find(|&c| allowed[c] && self.obj[c] < -PIVOT_TOL)
            } else {
                (0..self.cols)
                    .filter(|&c| allowed[c] && self.obj[c] < -PIVOT_TOL)
                    .min_by(|&x, &y| self.obj[x].total_cmp(&self.obj[y]))
            };
            let Some(pc) = entering else {
                return Ok(true);
            };
            let mut best: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.at(r, pc);
                if a > PIVOT_TOL {
                    let ratio = self.rhs(r) / a;
                    let better = match best {
                        None => true,
                        Some((br, bv)) => {
                            ratio < bv - PIVOT_TOL || (ratio <= bv + PIVOT_TOL && self.basis[r] < self.basis[br])
                        }
                    };
                    if better {
                        best = Some((r, ratio));
                    }
                }
            }
            let Some((pr, ratio)) = best else {
                return Ok(false);
            };
            if ratio <= PIVOT_TOL {
                degenerate += 1;
                if degenerate >= DEGENERATE_STREAK {
                    bland = true;
                }
            } else {
                degenerate = 0;
            }
            self.pivot(pr, pc);
        }
        Err(Error::Lp("simplex iteration limit reached".into()))
    }
}

/// Solves `lp` with the dense two-phase simplex. Infeasible and unbounded
/// programs are reported through [`LpStatus`]; `Err` means a numerical failure.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution> {
    let n = lp.num_vars();
    let m = lp.constraints.len();
    // Rows normalized to a nonnegative right-hand side.
    let mut rows: Vec<(Vec<(usize, f64)>, Relation, f64)> = Vec::with_capacity(m);
    for c in &lp.constraints {
        if c.rhs < 0.0 {
            let rel = match c.rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
            rows.push((c.terms.iter().map(|&(v, a)| (v, -a)).collect(), rel, -c.rhs));
        } else {
            rows.push((c.terms.clone(), c.rel, c.rhs));
        }
    }
    let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let cols = n + n_slack + n_art;
    let w = cols + 1;
    let mut t = Tableau { rows: m, cols, a: vec![0.0; m * w], basis: vec![0; m], obj: Vec::new() };
    let (mut s, mut art) = (n, n + n_slack);
    for (r, (terms, rel, rhs)) in rows.iter().enumerate() {
        for &(v, a) in terms {
            t.a[r * w + v] += a;
        }
        t.a[r * w + cols] = *rhs;
        match rel {
            Relation::Le => {
                t.a[r * w + s] = 1.0;
                t.basis[r] = s;
                s += 1;
            }
            Relation::Ge => {
                t.a[r * w + s] = -1.0;
                s += 1;
                t.a[r * w + art] = 1.0;
                t.basis[r] = art;
                art += 1;
            }
            Relation::Eq => {
                t.a[r * w + art] = 1.0;
                t.basis[r] = art;
                art += 1;
            }
        }
    }

    let is_art = |c: usize| c >= n + n_slack;
    if n_art > 0 {
        let mut cost = vec![0.0; cols];
        for c in cost.iter_mut().skip(n + n_slack) {
            *c = 1.0;
        }
        t.set_costs(&cost);
        let all = vec![true; cols];
        t.optimize(&all)?;
        let infeas = -t.obj[cols];
        let scale = 1.0 + rows.iter().map(|r| r.2).fold(0.0, f64::max);
        if infeas > FEAS_TOL * scale {
            return Ok(LpSolution { status: LpStatus::Infeasible, values: vec![0.0; n], objective: f64::NAN });
        }
        // Drive remaining (zero-level) artificials out of the basis.
        let mut r = 0;
        while r < t.rows {
            if is_art(t.basis[r]) {
                let pc = (0..n + n_slack)
                    .filter(|&c| t.at(r, c).abs() > PIVOT_TOL)
                    .max_by(|&x, &y| t.at(r, x).abs().total_cmp(&t.at(r, y).abs()));
                match pc {
                    Some(pc) => t.pivot(r, pc),
                    None => {
                        // Redundant row.
                        t.a.drain(r * w..(r + 1) * w);
                        t.basis.remove(r);
                        t.rows -= 1;
                        continue;
                    }
                }
            }
            r += 1;
        }
    }

    let mut cost = vec![0.0; cols];
    for &(v, c) in &lp.objective {
        cost[v] += c;
    }
    t.set_costs(&cost);
    let allowed: Vec<bool> = (0..cols).map(|c| !is_art(c)).collect();
    if !t.optimize(&allowed)? {
        return Ok(LpSolution { status: LpStatus::Unbounded, values: vec![0.0; n], objective: f64::NEG_INFINITY });
    }
    let mut values = vec![0.0; n];
    for r in 0..t.rows {
        if t.basis[r] < n {
            values[t.basis[r]] = t.rhs(r).max(0.0);
        }
    }
    let scale = 1.0 + lp.constraints.iter().map(|c| c.rhs.abs()).fold(0.0, f64::max);
    let viol = lp.max_violation(&values);
    if viol > FEAS_TOL * scale {
        return Err(Error::Lp(format!("returned point violates a constraint by {viol:e}")));
    }
    let objective = lp.evaluate(&lp.objective, &values);
    Ok(LpSolution { status: LpStatus::Optimal, values, objective })
}
