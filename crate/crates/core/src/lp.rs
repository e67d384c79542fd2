//! Relaxed fair set cover LP and a dense two-phase primal simplex.
//!
//! The model is
//!
//! ```text
//! min  Σ c_i x_i
//! s.t. Σ_{i : s ∈ W_i} x_i ≥ 1     for every task skill s
//!      Σ k_i x_i = 0               (k_i = -1 for class 1, +1 for class 2)
//!      0 ≤ x_i ≤ 1
//! ```
//!
//! Anti-cycling is Bland's rule throughout: lowest-index entering column,
//! lowest-index leaving variable among ratio ties.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{Instance, SkillId, Task};

pub const FEASIBILITY_TOL: f64 = 1e-7;
pub const PIVOT_TOL: f64 = 1e-9;
pub const OPTIMALITY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct CoverageRow {
    pub skill: SkillId,
    /// Workers (columns) with coefficient 1; everything else is 0.
    pub workers: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpModel {
    pub costs: Vec<f64>,
    pub coverage_rows: Vec<CoverageRow>,
    /// `k_i` per worker; `None` drops the fairness equality.
    pub fairness: Option<Vec<f64>>,
    pub upper: Vec<f64>,
}

impl LpModel {
    pub fn num_vars(&self) -> usize {
        self.costs.len()
    }

    pub fn num_rows(&self) -> usize {
        self.coverage_rows.len() + usize::from(self.fairness.is_some())
    }

    pub fn without_fairness(&self) -> Self {
        LpModel {
            fairness: None,
            ..self.clone()
        }
    }

    /// Same constraints with every cost multiplied by `factor`.
    pub fn scaled_costs(&self, factor: f64) -> Self {
        LpModel {
            costs: self.costs.iter().map(|c| c * factor).collect(),
            ..self.clone()
        }
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.costs.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest violation of any row or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for row in &self.coverage_rows {
            let lhs: f64 = row.workers.iter().map(|&i| x[i]).sum();
            worst = worst.max(1.0 - lhs);
        }
        if let Some(k) = &self.fairness {
            let lhs: f64 = k.iter().zip(x).map(|(k, v)| k * v).sum();
            worst = worst.max(lhs.abs());
        }
        for (v, u) in x.iter().zip(&self.upper) {
            worst = worst.max(-v).max(v - u);
        }
        worst
    }

    fn check(&self) -> Result<()> {
        let n = self.costs.len();
        if self.upper.len() != n {
            return Err(Error::MalformedModel(format!(
                "{} upper bounds for {n} variables",
                self.upper.len()
            )));
        }
        if let Some(k) = &self.fairness {
            if k.len() != n {
                return Err(Error::MalformedModel(format!(
                    "fairness row has {} coefficients for {n} variables",
                    k.len()
                )));
            }
        }
        for row in &self.coverage_rows {
            if let Some(&bad) = row.workers.iter().find(|&&i| i >= n) {
                return Err(Error::MalformedModel(format!(
                    "coverage row for {} references column {bad}",
                    row.skill
                )));
            }
        }
        if self
            .costs
            .iter()
            .chain(&self.upper)
            .any(|v| !v.is_finite())
        {
            return Err(Error::MalformedModel("non-finite cost or bound".into()));
        }
        Ok(())
    }

    /// Plain-text listing for cross-checking against other solvers.
    pub fn to_listing(&self) -> String {
        fn term(out: &mut String, coef: f64, j: usize) {
            let sign = if coef < 0.0 { '-' } else { '+' };
            let _ = write!(out, " {sign} {} x{j}", coef.abs());
        }
        let mut out = String::from("min:");
        for (j, &c) in self.costs.iter().enumerate() {
            term(&mut out, c, j);
        }
        out.push('\n');
        for (k, row) in self.coverage_rows.iter().enumerate() {
            let _ = write!(out, "row_{k}:");
            for &j in &row.workers {
                term(&mut out, 1.0, j);
            }
            let _ = writeln!(out, " >= 1  \\ skill {}", row.skill);
        }
        if let Some(k) = &self.fairness {
            out.push_str("fair:");
            for (j, &kj) in k.iter().enumerate() {
                term(&mut out, kj, j);
            }
            out.push_str(" = 0\n");
        }
        out.push_str("bounds:\n");
        for (j, u) in self.upper.iter().enumerate() {
            let _ = writeln!(out, "0 <= x{j} <= {u}");
        }
        out
    }
}

pub fn build_fair_lp(instance: &Instance, task: &Task) -> Result<LpModel> {
    instance.ensure_coverable(task)?;
    let coverage_rows = task
        .skill_ids()
        .map(|s| CoverageRow {
            skill: s,
            workers: instance.pool(s).to_vec(),
        })
        .collect();
    Ok(LpModel {
        costs: instance.workers().iter().map(|w| w.cost).collect(),
        coverage_rows,
        fairness: Some(instance.workers().iter().map(|w| w.class.sign()).collect()),
        upper: vec![1.0; instance.len()],
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    IterationLimit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FractionalSolution {
    pub x: Vec<f64>,
    pub objective_value: f64,
    pub status: SolveStatus,
    /// Pivots and bound flips over both phases.
    pub iterations: usize,
}

/// How the `x ≤ 1` bounds reach the simplex.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BoundHandling {
    /// Bounded-variable simplex: upper bounds are handled in the ratio test.
    #[default]
    Implicit,
    /// One extra `x_j + t_j = 1` row per variable.
    ExplicitRows,
}

pub fn solve_lp(model: &LpModel) -> Result<FractionalSolution> {
    solve_lp_with(model, BoundHandling::Implicit)
}

pub fn solve_lp_with(model: &LpModel, bounds: BoundHandling) -> Result<FractionalSolution> {
    model.check()?;
    let sf = StandardForm::from_model(model, bounds);
    let n = model.num_vars();
    let (status, values, iterations) = Tableau::new(&sf).run();
    // Round-off can leave values a hair outside their bounds.
    let x: Vec<f64> = values[..n]
        .iter()
        .zip(&model.upper)
        .map(|(v, u)| v.clamp(0.0, *u))
        .collect();
    Ok(FractionalSolution {
        objective_value: model.objective(&x),
        x,
        status,
        iterations,
    })
}

pub fn lp_lower_bound(solution: &FractionalSolution) -> Result<f64> {
    match solution.status {
        SolveStatus::Optimal => Ok(solution.objective_value),
        other => Err(Error::NotOptimal(other)),
    }
}

/// `min c·x, A x = b (b ≥ 0), 0 ≤ x ≤ upper`.
struct StandardForm {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    c: Vec<f64>,
    upper: Vec<f64>,
}

impl StandardForm {
    fn from_model(model: &LpModel, bounds: BoundHandling) -> Self {
        let n = model.num_vars();
        let n_cov = model.coverage_rows.len();
        let n_bound_rows = match bounds {
            BoundHandling::Implicit => 0,
            BoundHandling::ExplicitRows => n,
        };
        let cols = n + n_cov + n_bound_rows;
        let mut a = Vec::new();
        let mut b = Vec::new();

        for (k, row) in model.coverage_rows.iter().enumerate() {
            let mut r = vec![0.0; cols];
            for &j in &row.workers {
                r[j] += 1.0;
            }
            r[n + k] = -1.0;
            a.push(r);
            b.push(1.0);
        }
        if let Some(k) = &model.fairness {
            let mut r = vec![0.0; cols];
            r[..n].copy_from_slice(k);
            a.push(r);
            b.push(0.0);
        }
        let mut upper = vec![f64::INFINITY; cols];
        match bounds {
            BoundHandling::Implicit => upper[..n].copy_from_slice(&model.upper),
            BoundHandling::ExplicitRows => {
                for j in 0..n {
                    let mut r = vec![0.0; cols];
                    r[j] = 1.0;
                    r[n + n_cov + j] = 1.0;
                    a.push(r);
                    b.push(model.upper[j]);
                }
            }
        }
        for (row, rhs) in a.iter_mut().zip(b.iter_mut()) {
            if *rhs < 0.0 {
                row.iter_mut().for_each(|v| *v = -*v);
                *rhs = -*rhs;
            }
        }
        let mut c = vec![0.0; cols];
        c[..n].copy_from_slice(&model.costs);
        StandardForm { a, b, c, upper }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum VarState {
    Basic,
    AtLower,
    AtUpper,
}

/// Dense tableau over the standard form plus one artificial column per row.
struct Tableau<'a> {
    sf: &'a StandardForm,
    rows: usize,
    /// Structural plus slack columns; artificials follow at `cols..cols + rows`.
    cols: usize,
    width: usize,
    t: Vec<f64>,
    d: Vec<f64>,
    basis: Vec<usize>,
    state: Vec<VarState>,
    value: Vec<f64>,
    upper: Vec<f64>,
    iterations: usize,
    limit: usize,
}

enum Phase {
    Optimal,
    IterationLimit,
    Unbounded,
}

impl<'a> Tableau<'a> {
    fn new(sf: &'a StandardForm) -> Self {
        let rows = sf.a.len();
        let cols = sf.c.len();
        let width = cols + rows;
        let mut t = vec![0.0; rows * width];
        for i in 0..rows {
            t[i * width..i * width + cols].copy_from_slice(&sf.a[i]);
            t[i * width + cols + i] = 1.0;
        }
        let mut state = vec![VarState::AtLower; width];
        let mut value = vec![0.0; width];
        let mut upper = sf.upper.clone();
        upper.extend(std::iter::repeat_n(f64::INFINITY, rows));
        let basis: Vec<usize> = (cols..width).collect();
        for (i, &j) in basis.iter().enumerate() {
            state[j] = VarState::Basic;
            value[j] = sf.b[i];
        }
        Tableau {
            sf,
            rows,
            cols,
            width,
            t,
            d: vec![0.0; width],
            basis,
            state,
            value,
            upper,
            iterations: 0,
            limit: 50 * (rows + cols),
        }
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.width + j]
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.cols
    }

    fn run(mut self) -> (SolveStatus, Vec<f64>, usize) {
        // Phase 1: minimise the sum of artificials.
        let phase1_cost: Vec<f64> = (0..self.width)
            .map(|j| if self.is_artificial(j) { 1.0 } else { 0.0 })
            .collect();
        self.price(&phase1_cost);
        match self.iterate(true) {
            Phase::Optimal => {}
            Phase::IterationLimit => return self.finish(SolveStatus::IterationLimit),
            Phase::Unbounded => unreachable!("phase 1 objective is bounded below by 0"),
        }
        self.refresh_basic_values();
        let infeasibility: f64 = (self.cols..self.width).map(|j| self.value[j]).sum();
        if infeasibility > FEASIBILITY_TOL {
            return self.finish(SolveStatus::Infeasible);
        }

        self.drive_out_artificials();
        for j in self.cols..self.width {
            self.upper[j] = 0.0;
            self.value[j] = 0.0;
        }
        let mut phase2_cost = self.sf.c.clone();
        phase2_cost.extend(std::iter::repeat_n(0.0, self.rows));
        self.price(&phase2_cost);
        let status = match self.iterate(false) {
            Phase::Optimal => SolveStatus::Optimal,
            Phase::IterationLimit => SolveStatus::IterationLimit,
            // x and slacks are bounded or cost-free; a ray cannot improve the objective.
            Phase::Unbounded => unreachable!("fair LP objective is bounded"),
        };
        self.refresh_basic_values();
        self.finish(status)
    }

    fn finish(self, status: SolveStatus) -> (SolveStatus, Vec<f64>, usize) {
        (status, self.value[..self.cols].to_vec(), self.iterations)
    }

    /// Reduced costs `d_j = c_j − c_B · T_j`.
    fn price(&mut self, cost: &[f64]) {
        self.d.copy_from_slice(cost);
        for i in 0..self.rows {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.t[i * self.width..(i + 1) * self.width];
                for (dj, tij) in self.d.iter_mut().zip(row) {
                    *dj -= cb * tij;
                }
            }
        }
    }

    fn iterate(&mut self, allow_artificials: bool) -> Phase {
        loop {
            let entering = (0..self.width).find(|&j| {
                if !allow_artificials && self.is_artificial(j) {
                    return false;
                }
                match self.state[j] {
                    VarState::Basic => false,
                    VarState::AtLower => self.d[j] < -OPTIMALITY_TOL && self.upper[j] > 0.0,
                    VarState::AtUpper => self.d[j] > OPTIMALITY_TOL,
                }
            });
            let Some(j) = entering else {
                return Phase::Optimal;
            };
            if self.iterations >= self.limit {
                return Phase::IterationLimit;
            }
            self.iterations += 1;

            let sigma = if self.state[j] == VarState::AtLower { 1.0 } else { -1.0 };
            let flip = self.upper[j];
            let mut best: Option<(usize, f64, VarState)> = None;
            for i in 0..self.rows {
                let alpha = sigma * self.at(i, j);
                let bv = self.basis[i];
                let (limit, to) = if alpha > PIVOT_TOL {
                    (self.value[bv] / alpha, VarState::AtLower)
                } else if alpha < -PIVOT_TOL && self.upper[bv].is_finite() {
                    ((self.upper[bv] - self.value[bv]) / -alpha, VarState::AtUpper)
                } else {
                    continue;
                };
                let limit = limit.max(0.0);
                let replace = match best {
                    None => true,
                    Some((bi, bl, _)) => {
                        limit < bl - 1e-12 || (limit <= bl + 1e-12 && bv < self.basis[bi])
                    }
                };
                if replace {
                    best = Some((i, limit, to));
                }
            }

            match best {
                Some((_, limit, _)) if flip <= limit => self.flip(j, sigma),
                None if flip.is_finite() => self.flip(j, sigma),
                None => return Phase::Unbounded,
                Some((r, limit, to)) => {
                    self.shift(j, sigma * limit);
                    self.pivot(r, j, to);
                }
            }
        }
    }

    /// Moves nonbasic `j` by `delta`, updating basic values along column `j`.
    fn shift(&mut self, j: usize, delta: f64) {
        if delta == 0.0 {
            return;
        }
        self.value[j] += delta;
        for i in 0..self.rows {
            let bv = self.basis[i];
            self.value[bv] -= delta * self.at(i, j);
        }
    }

    fn flip(&mut self, j: usize, sigma: f64) {
        self.shift(j, sigma * self.upper[j]);
        if sigma > 0.0 {
            self.state[j] = VarState::AtUpper;
            self.value[j] = self.upper[j];
        } else {
            self.state[j] = VarState::AtLower;
            self.value[j] = 0.0;
        }
    }

    fn pivot(&mut self, r: usize, j: usize, leaving_to: VarState) {
        let w = self.width;
        let p = self.t[r * w + j];
        for v in &mut self.t[r * w..(r + 1) * w] {
            *v /= p;
        }
        let (before, rest) = self.t.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        for row in before.chunks_exact_mut(w).chain(after.chunks_exact_mut(w)) {
            let f = row[j];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * pv;
                }
                row[j] = 0.0;
            }
        }
        let f = self.d[j];
        if f != 0.0 {
            for (v, pv) in self.d.iter_mut().zip(prow.iter()) {
                *v -= f * pv;
            }
            self.d[j] = 0.0;
        }

        let leaving = self.basis[r];
        self.state[leaving] = leaving_to;
        self.value[leaving] = match leaving_to {
            VarState::AtUpper => self.upper[leaving],
            _ => 0.0,
        };
        self.basis[r] = j;
        self.state[j] = VarState::Basic;
    }

    /// Replaces zero-level basic artificials by structural columns where possible.
    /// A row with no usable column is redundant; its artificial stays basic, pinned at 0.
    fn drive_out_artificials(&mut self) {
        for r in 0..self.rows {
            if !self.is_artificial(self.basis[r]) {
                continue;
            }
            let candidate = (0..self.cols)
                .find(|&j| self.state[j] != VarState::Basic && self.at(r, j).abs() > PIVOT_TOL);
            if let Some(j) = candidate {
                self.iterations += 1;
                self.pivot(r, j, VarState::AtLower);
            }
        }
    }

    /// Recomputes basic values from the original data: `x_B = B⁻¹ (b − N x_N)`.
    /// `B⁻¹` is read off the artificial columns.
    fn refresh_basic_values(&mut self) {
        let mut rhs = self.sf.b.clone();
        for j in 0..self.cols {
            if self.state[j] != VarState::Basic && self.value[j] != 0.0 {
                for (i, r) in rhs.iter_mut().enumerate() {
                    *r -= self.sf.a[i][j] * self.value[j];
                }
            }
        }
        for i in 0..self.rows {
            let row = &self.t[i * self.width + self.cols..(i + 1) * self.width];
            let v: f64 = row.iter().zip(&rhs).map(|(a, b)| a * b).sum();
            self.value[self.basis[i]] = v;
        }
    }
}
