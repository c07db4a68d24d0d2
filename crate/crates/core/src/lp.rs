//! Exact bounded-variable simplex over rationals.
//!
//! Each row `i` gets a logical variable `s_i = a_i x` carrying the row's
//! bounds, so the tableau is homogeneous: every basic variable is a linear
//! combination of the nonbasic ones, and nonbasic variables sit at a bound
//! (or at zero when free). Primal simplex uses a sum-of-infeasibilities
//! phase 1; the dual simplex is used for warm restarts after bound changes.
//! Pricing is Dantzig's largest-coefficient rule for a bounded number of
//! pivots, then Bland's smallest-index rule, so every solve terminates.

use serde::Serialize;

use crate::model::{LinearRow, MblpModel, ObjSense, Sense, Side};
use crate::rational::Rational;

type SparseRow = Vec<(usize, Rational)>;

/// A linear program `min cost·x` s.t. `row_lo <= A x <= row_hi`,
/// `col_lo <= x <= col_hi`.
#[derive(Debug, Clone)]
pub struct LpProblem {
    pub n: usize,
    pub rows: Vec<SparseRow>,
    pub row_lo: Vec<Option<Rational>>,
    pub row_hi: Vec<Option<Rational>>,
    pub col_lo: Vec<Option<Rational>>,
    pub col_hi: Vec<Option<Rational>>,
    pub cost: Vec<Rational>,
}

impl LpProblem {
    /// The continuous relaxation of `model` (binaries relaxed to `[0, 1]`)
    /// in minimisation form. The objective is negated for maximisation.
    pub fn from_model(model: &MblpModel) -> LpProblem {
        let n = model.num_vars();
        let mut p = LpProblem {
            n,
            rows: Vec::with_capacity(model.rows().len()),
            row_lo: Vec::new(),
            row_hi: Vec::new(),
            col_lo: Vec::with_capacity(n),
            col_hi: Vec::with_capacity(n),
            cost: vec![Rational::zero(); n],
        };
        for v in model.vars() {
            let (mut lo, mut hi) = (v.lower.clone(), v.upper.clone());
            if v.is_binary() {
                lo = Some(lo.map_or(Rational::zero(), |l| l.max(Rational::zero())));
                hi = Some(hi.map_or(Rational::one(), |u| u.min(Rational::one())));
            }
            p.col_lo.push(lo);
            p.col_hi.push(hi);
        }
        for r in model.rows() {
            p.push_row(r);
        }
        let sign = match model.objective().sense {
            ObjSense::Minimize => Rational::one(),
            ObjSense::Maximize => -Rational::one(),
        };
        for (j, a) in &model.objective().coeffs {
            p.cost[*j] = &sign * a;
        }
        p
    }

    pub fn push_row(&mut self, r: &LinearRow) {
        let mut coeffs = r.coeffs.clone();
        coeffs.sort_by_key(|(j, _)| *j);
        coeffs.retain(|(_, a)| !a.is_zero());
        self.rows.push(coeffs);
        let (lo, hi) = match r.sense {
            Sense::Le => (None, Some(r.rhs.clone())),
            Sense::Ge => (Some(r.rhs.clone()), None),
            Sense::Eq => (Some(r.rhs.clone()), Some(r.rhs.clone())),
        };
        self.row_lo.push(lo);
        self.row_hi.push(hi);
    }

    pub fn m(&self) -> usize {
        self.rows.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Serialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub point: Vec<Rational>,
    /// Objective in the model's own sense.
    pub objective: Rational,
    pub tight_rows: Vec<usize>,
    /// Variable bounds met with equality, reported as implicit rows.
    pub tight_bounds: Vec<(usize, Side)>,
    /// Row multipliers of the minimisation form.
    pub duals: Vec<Rational>,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Basic(usize),
    Lower,
    Upper,
    /// Nonbasic away from its bounds (free variables, warm starts).
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Outcome {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

/// Simplex state. Variables `0..n` are structural, `n..n+m` logical.
#[derive(Debug, Clone)]
pub struct Simplex {
    n: usize,
    lo: Vec<Option<Rational>>,
    hi: Vec<Option<Rational>>,
    cost: Vec<Rational>,
    status: Vec<Status>,
    basis: Vec<usize>,
    /// Row `r` reads `x[basis[r]] = Σ t_rj x_j` over nonbasic `j`.
    rows: Vec<SparseRow>,
    x: Vec<Rational>,
    pub iterations: usize,
    /// Pivots per call priced by largest reduced cost (or largest
    /// infeasibility) before switching to Bland's rule.
    pub dantzig_budget: usize,
}

fn lookup(row: &SparseRow, j: usize) -> Option<&Rational> {
    row.binary_search_by_key(&j, |(k, _)| *k).ok().map(|p| &row[p].1)
}

/// `a + f * b` for sorted sparse rows, skipping column `skip`.
fn axpy(a: &SparseRow, f: &Rational, b: &SparseRow) -> SparseRow {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut p, mut q) = (0, 0);
    while p < a.len() || q < b.len() {
        let ja = a.get(p).map_or(usize::MAX, |e| e.0);
        let jb = b.get(q).map_or(usize::MAX, |e| e.0);
        if ja < jb {
            out.push(a[p].clone());
            p += 1;
        } else if jb < ja {
            out.push((jb, f * &b[q].1));
            q += 1;
        } else {
            let v = &a[p].1 + f * &b[q].1;
            if !v.is_zero() {
                out.push((ja, v));
            }
            p += 1;
            q += 1;
        }
    }
    out
}

impl Simplex {
    pub fn new(p: &LpProblem) -> Simplex {
        let (n, m) = (p.n, p.m());
        let mut lo = p.col_lo.clone();
        lo.extend(p.row_lo.iter().cloned());
        let mut hi = p.col_hi.clone();
        hi.extend(p.row_hi.iter().cloned());
        let mut cost = p.cost.clone();
        cost.resize(n + m, Rational::zero());
        let mut status = Vec::with_capacity(n + m);
        let mut x = Vec::with_capacity(n + m);
        for j in 0..n {
            let (st, v) = match (&lo[j], &hi[j]) {
                (Some(l), _) => (Status::Lower, l.clone()),
                (None, Some(u)) => (Status::Upper, u.clone()),
                (None, None) => (Status::Zero, Rational::zero()),
            };
            status.push(st);
            x.push(v);
        }
        for (r, row) in p.rows.iter().enumerate() {
            status.push(Status::Basic(r));
            x.push(row.iter().fold(Rational::zero(), |acc, (j, a)| acc + a * &x[*j]));
        }
        Simplex { n, lo, hi, cost, status, basis: (n..n + m).collect(), rows: p.rows.clone(), x, iterations: 0, dantzig_budget: 20 * (n + 2 * m) }
    }

    /// Start with every structural nonbasic at the value given by `x0`;
    /// values strictly inside their bounds are held as superbasic.
    pub fn with_start(p: &LpProblem, x0: &[Rational]) -> Simplex {
        let mut s = Simplex::new(p);
        for j in 0..p.n {
            let v = x0[j].clone();
            let st = if s.lo[j].as_ref() == Some(&v) {
                Status::Lower
            } else if s.hi[j].as_ref() == Some(&v) {
                Status::Upper
            } else {
                Status::Zero
            };
            let delta = &v - &s.x[j];
            s.shift(j, &delta);
            s.status[j] = st;
        }
        s
    }

    fn total(&self) -> usize {
        self.lo.len()
    }

    fn below(&self, j: usize) -> bool {
        self.lo[j].as_ref().is_some_and(|l| &self.x[j] < l)
    }

    fn above(&self, j: usize) -> bool {
        self.hi[j].as_ref().is_some_and(|u| &self.x[j] > u)
    }

    fn violation(&self, j: usize) -> Rational {
        if self.below(j) {
            self.lo[j].as_ref().unwrap() - &self.x[j]
        } else if self.above(j) {
            &self.x[j] - self.hi[j].as_ref().unwrap()
        } else {
            Rational::zero()
        }
    }

    fn can_increase(&self, j: usize) -> bool {
        match self.status[j] {
            Status::Lower | Status::Zero => self.hi[j].as_ref().map_or(true, |u| &self.x[j] < u),
            _ => false,
        }
    }

    fn can_decrease(&self, j: usize) -> bool {
        match self.status[j] {
            Status::Upper | Status::Zero => self.lo[j].as_ref().map_or(true, |l| &self.x[j] > l),
            // a variable at lower bound with lo == hi cannot move at all
            _ => false,
        }
    }

    /// Reduced costs of all nonbasic variables for the cost vector `w`
    /// given on basic rows (`wb[r]`) plus direct costs `direct`.
    fn reduced(&self, direct: Option<&[Rational]>, wb: &[Rational]) -> Vec<Rational> {
        let mut d = match direct {
            Some(c) => c.to_vec(),
            None => vec![Rational::zero(); self.total()],
        };
        for (r, w) in wb.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            for (j, t) in &self.rows[r] {
                d[*j] += w * t;
            }
        }
        for &b in &self.basis {
            d[b] = Rational::zero();
        }
        d
    }

    fn phase2_reduced(&self) -> Vec<Rational> {
        let wb: Vec<Rational> = self.basis.iter().map(|&b| self.cost[b].clone()).collect();
        self.reduced(Some(&self.cost), &wb)
    }

    /// Make `q` basic in row `r`; the leaving variable takes status `leave`.
    fn pivot(&mut self, r: usize, q: usize, leave: Status) {
        let out = self.basis[r];
        let row = std::mem::take(&mut self.rows[r]);
        let t = lookup(&row, q).expect("pivot element").clone();
        let inv = t.recip();
        // x_q = inv * x_out - Σ_{j≠q} (t_rj / t_rq) x_j
        let mut new_row: SparseRow = Vec::with_capacity(row.len());
        let mut placed = false;
        for (j, a) in row.into_iter() {
            if j == q {
                continue;
            }
            if !placed && j > out {
                new_row.push((out, inv.clone()));
                placed = true;
            }
            new_row.push((j, -(a * &inv)));
        }
        if !placed {
            new_row.push((out, inv));
        }
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let Some(f) = lookup(&self.rows[i], q).cloned() else { continue };
            let without: SparseRow = self.rows[i].iter().filter(|(j, _)| *j != q).cloned().collect();
            self.rows[i] = axpy(&without, &f, &new_row);
        }
        self.rows[r] = new_row;
        self.basis[r] = q;
        self.status[q] = Status::Basic(r);
        self.status[out] = leave;
        self.iterations += 1;
    }

    /// Shift nonbasic `q` by `delta`, updating basic values.
    fn shift(&mut self, q: usize, delta: &Rational) {
        if delta.is_zero() {
            return;
        }
        self.x[q] += delta;
        for r in 0..self.rows.len() {
            if let Some(t) = lookup(&self.rows[r], q) {
                let b = self.basis[r];
                let inc = t * delta;
                self.x[b] += inc;
            }
        }
    }

    fn primal_infeasible(&self) -> bool {
        self.basis.iter().any(|&b| self.below(b) || self.above(b))
    }

    /// Primal simplex from the current basis.
    pub(crate) fn primal(&mut self, max_iter: usize) -> Outcome {
        let start = self.iterations;
        loop {
            if self.iterations - start > max_iter {
                return Outcome::IterationLimit;
            }
            let phase1 = self.primal_infeasible();
            let d = if phase1 {
                let wb: Vec<Rational> = self
                    .basis
                    .iter()
                    .map(|&b| {
                        if self.below(b) {
                            -Rational::one()
                        } else if self.above(b) {
                            Rational::one()
                        } else {
                            Rational::zero()
                        }
                    })
                    .collect();
                self.reduced(None, &wb)
            } else {
                self.phase2_reduced()
            };
            let eligible = |j: &usize| {
                let j = *j;
                !matches!(self.status[j], Status::Basic(_))
                    && ((d[j].is_negative() && self.can_increase(j)) || (d[j].is_positive() && self.can_decrease(j)))
            };
            let entering = if self.iterations - start < self.dantzig_budget {
                (0..self.total()).filter(eligible).max_by(|&a, &b| d[a].abs().cmp(&d[b].abs()).then(b.cmp(&a)))
            } else {
                (0..self.total()).find(eligible)
            };
            let Some(q) = entering else {
                return if phase1 { Outcome::Infeasible } else { Outcome::Optimal };
            };
            let up = d[q].is_negative();
            // ratio test: step length theta >= 0 along direction sigma
            let mut best: Option<(Rational, usize, Option<usize>)> = None; // (theta, leaving var, row)
            let flip = match (&self.lo[q], &self.hi[q]) {
                (Some(l), Some(u)) => Some(if up { u - &self.x[q] } else { &self.x[q] - l }),
                _ => None,
            };
            if let Some(f) = flip {
                best = Some((f, q, None));
            }
            for r in 0..self.rows.len() {
                let Some(t) = lookup(&self.rows[r], q) else { continue };
                let b = self.basis[r];
                let rate = if up { t.clone() } else { -t };
                let xb = &self.x[b];
                let limit = if rate.is_positive() {
                    if self.below(b) {
                        self.lo[b].as_ref().map(|l| (l - xb) / &rate)
                    } else if self.above(b) {
                        None
                    } else {
                        self.hi[b].as_ref().map(|u| (u - xb) / &rate)
                    }
                } else if self.above(b) {
                    self.hi[b].as_ref().map(|u| (u - xb) / &rate)
                } else if self.below(b) {
                    None
                } else {
                    self.lo[b].as_ref().map(|l| (l - xb) / &rate)
                };
                let Some(theta) = limit else { continue };
                let better = match &best {
                    None => true,
                    Some((bt, bv, _)) => theta < *bt || (theta == *bt && b < *bv),
                };
                if better {
                    best = Some((theta, b, Some(r)));
                }
            }
            let Some((theta, leave, row)) = best else {
                return if phase1 { Outcome::Infeasible } else { Outcome::Unbounded };
            };
            let delta = if up { theta } else { -theta };
            self.shift(q, &delta);
            match row {
                None => {
                    self.status[q] = if up { Status::Upper } else { Status::Lower };
                    self.iterations += 1;
                }
                Some(r) => {
                    let st = self.settle(leave);
                    self.pivot(r, q, st);
                }
            }
        }
    }

    /// Snap a leaving basic variable onto the bound it reached.
    fn settle(&mut self, b: usize) -> Status {
        let at_lo = self.lo[b].as_ref().is_some_and(|l| &self.x[b] == l);
        if at_lo {
            Status::Lower
        } else {
            let u = self.hi[b].clone().expect("leaving variable sits on a bound");
            debug_assert_eq!(self.x[b], u);
            self.x[b] = u;
            Status::Upper
        }
    }

    fn dual_feasible(&self, d: &[Rational]) -> bool {
        (0..self.total()).all(|j| match self.status[j] {
            Status::Basic(_) => true,
            _ if self.lo[j].is_some() && self.lo[j] == self.hi[j] => true,
            Status::Lower => !d[j].is_negative(),
            Status::Upper => !d[j].is_positive(),
            Status::Zero => d[j].is_zero(),
        })
    }

    /// Dual simplex; requires a dual feasible basis.
    pub(crate) fn dual(&mut self, max_iter: usize) -> Outcome {
        let start = self.iterations;
        loop {
            if self.iterations - start > max_iter {
                return Outcome::IterationLimit;
            }
            let infeasible = (0..self.rows.len()).filter(|&r| {
                let b = self.basis[r];
                self.below(b) || self.above(b)
            });
            let leaving = if self.iterations - start < self.dantzig_budget {
                infeasible.max_by(|&a, &b| self.violation(self.basis[a]).cmp(&self.violation(self.basis[b])).then(self.basis[b].cmp(&self.basis[a])))
            } else {
                infeasible.min_by_key(|&r| self.basis[r])
            };
            let Some(r) = leaving else { return Outcome::Optimal };
            let d = self.phase2_reduced();
            let b = self.basis[r];
            let raise = self.below(b);
            let mut best: Option<(Rational, usize)> = None;
            for (j, t) in &self.rows[r] {
                let j = *j;
                // moving x_j in direction sign(t) (raise) or -sign(t) raises/lowers x_b as needed
                let up = t.is_positive() == raise;
                let ok = if up { self.can_increase(j) } else { self.can_decrease(j) };
                if !ok {
                    continue;
                }
                let ratio = (d[j].abs()) / t.abs();
                if best.as_ref().map_or(true, |(br, bj)| ratio < *br || (ratio == *br && j < *bj)) {
                    best = Some((ratio, j));
                }
            }
            let Some((_, q)) = best else { return Outcome::Infeasible };
            let target = if raise { self.lo[b].clone().unwrap() } else { self.hi[b].clone().unwrap() };
            let t = lookup(&self.rows[r], q).unwrap().clone();
            let delta = (&target - &self.x[b]) / &t;
            self.shift(q, &delta);
            self.x[b] = target;
            self.pivot(r, q, if raise { Status::Lower } else { Status::Upper });
        }
    }

    /// Solve from the current basis: dual simplex if it is dual feasible,
    /// primal otherwise, falling back to primal if the dual stalls.
    pub(crate) fn optimize(&mut self) -> Outcome {
        let budget = 50 * (self.total() + 10);
        if self.dual_feasible(&self.phase2_reduced()) {
            match self.dual(budget) {
                Outcome::IterationLimit => {}
                Outcome::Optimal => {
                    self.crossover();
                    return Outcome::Optimal;
                }
                out => return out,
            }
        }
        let out = match self.primal(usize::MAX) {
            Outcome::IterationLimit => unreachable!("Bland's rule terminates"),
            out => out,
        };
        if out == Outcome::Optimal {
            self.crossover();
        }
        out
    }

    /// Move superbasic variables with zero reduced cost onto a bound or
    /// into the basis so the final point is a vertex. Objective unchanged.
    pub(crate) fn crossover(&mut self) {
        loop {
            let d = self.phase2_reduced();
            let Some(q) = (0..self.total()).find(|&j| self.status[j] == Status::Zero && d[j].is_zero() && self.blocked(j).is_some())
            else {
                return;
            };
            let (up, theta, row) = self.blocked(q).unwrap();
            let delta = if up { theta } else { -theta };
            self.shift(q, &delta);
            match row {
                None => self.status[q] = if up { Status::Upper } else { Status::Lower },
                Some(r) => {
                    let st = self.settle(self.basis[r]);
                    self.pivot(r, q, st);
                }
            }
        }
    }

    /// The first blocking step for superbasic `q`, trying upward first.
    fn blocked(&self, q: usize) -> Option<(bool, Rational, Option<usize>)> {
        for up in [true, false] {
            let mut best: Option<(Rational, usize, Option<usize>)> = match (up, &self.lo[q], &self.hi[q]) {
                (true, _, Some(u)) => Some((u - &self.x[q], q, None)),
                (false, Some(l), _) => Some((&self.x[q] - l, q, None)),
                _ => None,
            };
            for r in 0..self.rows.len() {
                let Some(t) = lookup(&self.rows[r], q) else { continue };
                let b = self.basis[r];
                let rate = if up { t.clone() } else { -t };
                let bound = if rate.is_positive() { &self.hi[b] } else { &self.lo[b] };
                let Some(bd) = bound else { continue };
                let theta = (bd - &self.x[b]) / &rate;
                if best.as_ref().map_or(true, |(bt, bv, _)| theta < *bt || (theta == *bt && b < *bv)) {
                    best = Some((theta, b, Some(r)));
                }
            }
            if let Some((theta, _, row)) = best {
                return Some((up, theta, row));
            }
        }
        None
    }

    /// Change the bounds of structural `j` keeping the basis.
    pub(crate) fn set_bounds(&mut self, j: usize, lo: Option<Rational>, hi: Option<Rational>) {
        self.lo[j] = lo;
        self.hi[j] = hi;
        if matches!(self.status[j], Status::Basic(_)) {
            return;
        }
        let inside = self.lo[j].as_ref().map_or(true, |l| &self.x[j] > l) && self.hi[j].as_ref().map_or(true, |u| &self.x[j] < u);
        let (st, target) = match (&self.lo[j], &self.hi[j], self.status[j]) {
            (_, _, Status::Zero) if inside => (Status::Zero, self.x[j].clone()),
            (Some(l), Some(u), Status::Upper) if l != u => (Status::Upper, u.clone()),
            (Some(l), _, _) => (Status::Lower, l.clone()),
            (None, Some(u), _) => (Status::Upper, u.clone()),
            (None, None, _) => (Status::Zero, self.x[j].clone()),
        };
        let delta = &target - &self.x[j];
        self.shift(j, &delta);
        self.status[j] = st;
    }

    pub fn values(&self) -> &[Rational] {
        &self.x[..self.n]
    }

    pub(crate) fn objective_value(&self) -> Rational {
        (0..self.n).fold(Rational::zero(), |acc, j| acc + &self.cost[j] * &self.x[j])
    }

    /// Row multipliers `y_i` from the reduced costs of nonbasic logicals.
    pub(crate) fn duals(&self) -> Vec<Rational> {
        let d = self.phase2_reduced();
        (0..self.rows.len())
            .map(|i| match self.status[self.n + i] {
                Status::Basic(_) => Rational::zero(),
                _ => d[self.n + i].clone(),
            })
            .collect()
    }

    pub(crate) fn solution(&self, out: Outcome, p: &LpProblem, maximize: bool) -> LpSolution {
        let status = match out {
            Outcome::Optimal => LpStatus::Optimal,
            Outcome::Infeasible => LpStatus::Infeasible,
            Outcome::Unbounded => LpStatus::Unbounded,
            Outcome::IterationLimit => unreachable!(),
        };
        let point = self.values().to_vec();
        let mut objective = self.objective_value();
        if maximize {
            objective = -objective;
        }
        let (mut tight_rows, mut tight_bounds, mut duals) = (Vec::new(), Vec::new(), Vec::new());
        if status == LpStatus::Optimal {
            for i in 0..p.m() {
                let s = &self.x[self.n + i];
                if p.row_lo[i].as_ref() == Some(s) || p.row_hi[i].as_ref() == Some(s) {
                    tight_rows.push(i);
                }
            }
            for j in 0..self.n {
                if p.col_lo[j].as_ref() == Some(&point[j]) {
                    tight_bounds.push((j, Side::Lower));
                }
                if p.col_hi[j].as_ref() == Some(&point[j]) {
                    tight_bounds.push((j, Side::Upper));
                }
            }
            duals = self.duals();
        }
        LpSolution { status, point, objective, tight_rows, tight_bounds, duals, iterations: self.iterations }
    }
}

/// Solve an explicit LP.
pub fn solve_problem(p: &LpProblem) -> LpSolution {
    let mut s = Simplex::new(p);
    let out = s.optimize();
    s.solution(out, p, false)
}

/// Solve the continuous relaxation of `model`.
pub fn solve_lp(model: &MblpModel) -> LpSolution {
    let p = LpProblem::from_model(model);
    let mut s = Simplex::new(&p);
    let out = s.optimize();
    s.solution(out, &p, model.objective().sense == ObjSense::Maximize)
}

/// Check an optimal solution against an independent dual certificate:
/// `c - Aᵀy` must be a valid set of bound multipliers and the dual
/// objective must equal the primal objective.
pub fn verify_certificate(p: &LpProblem, sol: &LpSolution) -> bool {
    if sol.status != LpStatus::Optimal {
        return false;
    }
    let x = &sol.point;
    let y = &sol.duals;
    let mut dual_obj = Rational::zero();
    let mut red = p.cost.clone();
    for (i, row) in p.rows.iter().enumerate() {
        let yi = &y[i];
        if yi.is_zero() {
            continue;
        }
        let act = row.iter().fold(Rational::zero(), |acc, (j, a)| acc + a * &x[*j]);
        // y_i > 0 needs an active lower bound, y_i < 0 an active upper bound
        let bound = if yi.is_positive() { &p.row_lo[i] } else { &p.row_hi[i] };
        match bound {
            Some(b) if *b == act => dual_obj += yi * b,
            _ => return false,
        }
        for (j, a) in row {
            red[*j] -= yi * a;
        }
    }
    for j in 0..p.n {
        let r = &red[j];
        if r.is_zero() {
            continue;
        }
        let bound = if r.is_positive() { &p.col_lo[j] } else { &p.col_hi[j] };
        match bound {
            Some(b) if *b == x[j] => dual_obj += r * b,
            _ => return false,
        }
    }
    let primal = (0..p.n).fold(Rational::zero(), |acc, j| acc + &p.cost[j] * &x[j]);
    primal == dual_obj && (0..p.m()).all(|i| {
        let act = p.rows[i].iter().fold(Rational::zero(), |acc, (j, a)| acc + a * &x[*j]);
        p.row_lo[i].as_ref().map_or(true, |l| &act >= l) && p.row_hi[i].as_ref().map_or(true, |u| &act <= u)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LinExpr, ModelMeta, RowTag, Var, VariableDescriptor};
    use crate::rational::{q, qi};

    fn meta() -> ModelMeta {
        ModelMeta {
            name: "t".into(),
            formulation: None,
            options: Default::default(),
            binary_upper_implied: false,
        }
    }

    #[test]
    fn infeasible_toy() {
        let mut m = MblpModel::new(meta());
        let c = m.add_var(VariableDescriptor::free(Var::Named("c".into())));
        m.add_constraint(LinExpr::var(c), Sense::Ge, LinExpr::constant(qi(2)), RowTag::Named("a".into()));
        m.add_constraint(LinExpr::var(c), Sense::Le, LinExpr::constant(qi(1)), RowTag::Named("b".into()));
        assert_eq!(solve_lp(&m).status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_toy() {
        let mut m = MblpModel::new(meta());
        let c = m.add_var(VariableDescriptor::free(Var::Named("c".into())));
        m.add_constraint(LinExpr::var(c), Sense::Ge, LinExpr::constant(qi(2)), RowTag::Named("a".into()));
        m.set_objective(ObjSense::Maximize, LinExpr::var(c));
        assert_eq!(solve_lp(&m).status, LpStatus::Unbounded);
    }

    #[test]
    fn small_lp_with_certificate() {
        // max 3x + 2y, x + y <= 4, x + 3y <= 6, x <= 3
        let mut m = MblpModel::new(meta());
        let x = m.add_var(VariableDescriptor::continuous(Var::Named("x".into()), Some(qi(0)), Some(qi(3))));
        let y = m.add_var(VariableDescriptor::continuous(Var::Named("y".into()), Some(qi(0)), None));
        m.add_constraint(LinExpr::var(x) + LinExpr::var(y), Sense::Le, LinExpr::constant(qi(4)), RowTag::Named("r1".into()));
        m.add_constraint(
            LinExpr::var(x) + LinExpr::term(y, qi(3)),
            Sense::Le,
            LinExpr::constant(qi(6)),
            RowTag::Named("r2".into()),
        );
        m.set_objective(ObjSense::Maximize, LinExpr::term(x, qi(3)) + LinExpr::term(y, qi(2)));
        let sol = solve_lp(&m);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.point, vec![qi(3), qi(1)]);
        assert_eq!(sol.objective, qi(11));
        assert_eq!(sol.tight_rows, vec![0, 1]);
        assert!(verify_certificate(&LpProblem::from_model(&m), &sol));
    }

    #[test]
    fn fractional_optimum() {
        // min x + y, 2x + y >= 1, x + 2y >= 1 → (1/3, 1/3)
        let mut m = MblpModel::new(meta());
        let x = m.add_var(VariableDescriptor::free(Var::Named("x".into())));
        let y = m.add_var(VariableDescriptor::free(Var::Named("y".into())));
        m.add_constraint(LinExpr::term(x, qi(2)) + LinExpr::var(y), Sense::Ge, LinExpr::constant(qi(1)), RowTag::Named("a".into()));
        m.add_constraint(LinExpr::var(x) + LinExpr::term(y, qi(2)), Sense::Ge, LinExpr::constant(qi(1)), RowTag::Named("b".into()));
        m.set_objective(ObjSense::Minimize, LinExpr::var(x) + LinExpr::var(y));
        let sol = solve_lp(&m);
        assert_eq!(sol.point, vec![q(1, 3), q(1, 3)]);
        assert!(verify_certificate(&LpProblem::from_model(&m), &sol));
    }

    #[test]
    fn warm_restart_after_bound_change() {
        let mut m = MblpModel::new(meta());
        let x = m.add_var(VariableDescriptor::continuous(Var::Named("x".into()), Some(qi(0)), Some(qi(1))));
        let y = m.add_var(VariableDescriptor::continuous(Var::Named("y".into()), Some(qi(0)), Some(qi(1))));
        m.add_constraint(LinExpr::var(x) + LinExpr::var(y), Sense::Ge, LinExpr::constant(q(3, 2)), RowTag::Named("a".into()));
        m.set_objective(ObjSense::Minimize, LinExpr::term(x, qi(2)) + LinExpr::var(y));
        let p = LpProblem::from_model(&m);
        let mut s = Simplex::new(&p);
        assert_eq!(s.optimize(), Outcome::Optimal);
        assert_eq!(s.values(), &[q(1, 2), qi(1)]);
        s.set_bounds(y, Some(qi(0)), Some(q(1, 2)));
        assert_eq!(s.optimize(), Outcome::Optimal);
        assert_eq!(s.values(), &[qi(1), q(1, 2)]);
        s.set_bounds(x, Some(qi(0)), Some(q(1, 2)));
        assert_eq!(s.optimize(), Outcome::Infeasible);
    }
}
