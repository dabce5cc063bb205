//! Two-phase bounded-variable primal simplex on a dense tableau.
//!
//! Every row `a·x` gets a logical variable `r = a·x` whose bounds encode the
//! relation, so the initial basis consists of the logicals and the structural
//! variables start nonbasic at a finite bound. The tableau holds only the
//! nonbasic columns (`m x n`), which suits the shapes built by this crate:
//! either few structural columns and many rows, or few rows and many columns.
//!
//! Phase 1 minimizes the sum of bound violations of the basic variables; an
//! infeasible basic variable blocks when it reaches the bound it violates.
//! Pricing is Dantzig's rule; after a run of degenerate pivots the solver
//! switches to Bland's smallest-index rule until it makes progress again.
//! All arithmetic happens in a fixed order, so results are bit-reproducible.

use super::{LinearProgram, LpError, LpSolution, LpStatus, Relation, FEAS_TOL, OPT_TOL, PIVOT_TOL};

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    /// Iteration cap; `None` picks one from the problem size.
    pub max_iterations: Option<usize>,
    /// Consecutive degenerate pivots tolerated before switching to Bland's rule.
    pub degenerate_switch: usize,
    /// Use Bland's rule for every pivot.
    pub bland_only: bool,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            max_iterations: None,
            degenerate_switch: 50,
            bland_only: false,
        }
    }
}

pub fn solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    solve_with(lp, &SimplexOptions::default())
}

pub fn solve_with(lp: &LinearProgram, opts: &SimplexOptions) -> Result<LpSolution, LpError> {
    lp.check()?;
    let mut s = Simplex::new(lp, opts);
    let status = s.run()?;
    let n = lp.num_variables();
    let values: Vec<f64> = (0..n)
        .map(|j| s.x[j].clamp(lp.lower()[j], lp.upper()[j]))
        .collect();
    if status == LpStatus::Optimal {
        let worst = lp.max_violation(&values);
        if worst > 1e3 * FEAS_TOL {
            return Err(LpError::NumericalBreakdown(format!(
                "final residual {worst:e} after {} iterations",
                s.iterations
            )));
        }
    }
    Ok(LpSolution {
        status,
        objective: lp.evaluate(&values),
        values,
        iterations: s.iterations,
    })
}

enum Step {
    Flip,
    Pivot { row: usize, leave_value: f64 },
    Unbounded,
}

struct Simplex {
    m: usize,
    n: usize,
    /// Row-major `m x n`: d(basic_i) / d(nonbasic_k).
    t: Vec<f64>,
    basic: Vec<usize>,
    nonbasic: Vec<usize>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    cost: Vec<f64>,
    x: Vec<f64>,
    bland_only: bool,
    bland: bool,
    degenerate_run: usize,
    degenerate_switch: usize,
    iterations: usize,
    max_iterations: usize,
}

impl Simplex {
    fn new(lp: &LinearProgram, opts: &SimplexOptions) -> Self {
        let n = lp.num_variables();
        let m = lp.num_constraints();
        let mut lo = lp.lower().to_vec();
        let mut hi = lp.upper().to_vec();
        let mut cost = lp.objective().to_vec();
        let mut x: Vec<f64> = (0..n)
            .map(|j| {
                if lo[j].is_finite() {
                    lo[j]
                } else if hi[j].is_finite() {
                    hi[j]
                } else {
                    0.0
                }
            })
            .collect();
        let mut t = vec![0.0; m * n];
        for (i, row) in lp.constraints().iter().enumerate() {
            let mut act = 0.0;
            for &(j, a) in &row.coeffs {
                t[i * n + j] += a;
                act += a * x[j];
            }
            let (l, h) = match row.relation {
                Relation::Le => (f64::NEG_INFINITY, row.rhs),
                Relation::Ge => (row.rhs, f64::INFINITY),
                Relation::Eq => (row.rhs, row.rhs),
            };
            lo.push(l);
            hi.push(h);
            cost.push(0.0);
            x.push(act);
        }
        let max_iterations = opts.max_iterations.unwrap_or(20 * (m + n) + 10_000);
        Self {
            m,
            n,
            t,
            basic: (n..n + m).collect(),
            nonbasic: (0..n).collect(),
            lo,
            hi,
            cost,
            x,
            bland_only: opts.bland_only,
            bland: opts.bland_only,
            degenerate_run: 0,
            degenerate_switch: opts.degenerate_switch.max(1),
            iterations: 0,
            max_iterations,
        }
    }

    fn run(&mut self) -> Result<LpStatus, LpError> {
        if !self.optimize(true)? {
            return Ok(LpStatus::Infeasible);
        }
        if !self.optimize(false)? {
            return Ok(LpStatus::Unbounded);
        }
        Ok(LpStatus::Optimal)
    }

    /// Phase-1 weight of basic row `i`: -1 below its lower bound, +1 above its upper.
    fn infeasibility_weight(&self, i: usize) -> f64 {
        let b = self.basic[i];
        if self.x[b] < self.lo[b] - FEAS_TOL {
            -1.0
        } else if self.x[b] > self.hi[b] + FEAS_TOL {
            1.0
        } else {
            0.0
        }
    }

    /// Runs one phase. Phase 1 returns whether a feasible basis was found,
    /// phase 2 whether the objective is bounded.
    fn optimize(&mut self, phase_one: bool) -> Result<bool, LpError> {
        let n = self.n;
        let mut d = vec![0.0; n];
        loop {
            // reduced costs
            let mut any_weight = false;
            if phase_one {
                d.iter_mut().for_each(|v| *v = 0.0);
            } else {
                for (k, v) in d.iter_mut().enumerate() {
                    *v = self.cost[self.nonbasic[k]];
                }
            }
            for i in 0..self.m {
                let w = if phase_one {
                    self.infeasibility_weight(i)
                } else {
                    self.cost[self.basic[i]]
                };
                if w == 0.0 {
                    continue;
                }
                any_weight = true;
                let row = &self.t[i * n..(i + 1) * n];
                for (dk, &a) in d.iter_mut().zip(row) {
                    *dk += w * a;
                }
            }
            if phase_one && !any_weight {
                return Ok(true);
            }

            let Some((q, dir)) = self.choose_entering(&d) else {
                return Ok(!phase_one);
            };

            if self.iterations >= self.max_iterations {
                return Err(LpError::IterationLimit(self.max_iterations));
            }
            self.iterations += 1;

            let (step, t) = self.ratio_test(q, dir, phase_one);
            if let Step::Unbounded = step {
                if phase_one {
                    return Err(LpError::NumericalBreakdown(
                        "phase-1 direction without a blocking variable".into(),
                    ));
                }
                return Ok(false);
            }
            if t <= 1e-11 {
                self.degenerate_run += 1;
                if self.degenerate_run >= self.degenerate_switch {
                    self.bland = true;
                }
            } else {
                self.degenerate_run = 0;
                self.bland = self.bland_only;
            }
            self.apply(q, dir, t, step);
        }
    }

    fn choose_entering(&self, d: &[f64]) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for (k, &dk) in d.iter().enumerate() {
            let j = self.nonbasic[k];
            if self.lo[j] == self.hi[j] {
                continue;
            }
            let dir = if dk < -OPT_TOL && self.x[j] < self.hi[j] {
                1.0
            } else if dk > OPT_TOL && self.x[j] > self.lo[j] {
                -1.0
            } else {
                continue;
            };
            if self.bland {
                match best {
                    Some((bk, _)) if self.nonbasic[bk] <= j => {}
                    _ => best = Some((k, dir)),
                }
            } else if dk.abs() > best_score {
                best_score = dk.abs();
                best = Some((k, dir));
            }
        }
        best
    }

    /// Step length along the entering column and what blocks it.
    fn ratio_test(&self, q: usize, dir: f64, phase_one: bool) -> (Step, f64) {
        let n = self.n;
        let j = self.nonbasic[q];
        let mut best_t = f64::INFINITY;
        let mut best: Option<(usize, f64, f64)> = None; // (row, |alpha|, leave value)
        for i in 0..self.m {
            let a = self.t[i * n + q];
            if a.abs() < PIVOT_TOL {
                continue;
            }
            let rate = a * dir;
            let b = self.basic[i];
            let (val, lo, hi) = (self.x[b], self.lo[b], self.hi[b]);
            let target = if phase_one && val < lo - FEAS_TOL {
                if rate > 0.0 {
                    lo
                } else {
                    continue;
                }
            } else if phase_one && val > hi + FEAS_TOL {
                if rate < 0.0 {
                    hi
                } else {
                    continue;
                }
            } else if rate > 0.0 {
                hi
            } else {
                lo
            };
            if !target.is_finite() {
                continue;
            }
            let limit = ((target - val) / rate).max(0.0);
            let better = match best {
                None => true,
                Some((bi, balpha, _)) => {
                    if limit < best_t - 1e-12 {
                        true
                    } else if limit <= best_t + 1e-12 {
                        if self.bland {
                            b < self.basic[bi]
                        } else {
                            a.abs() > balpha
                        }
                    } else {
                        false
                    }
                }
            };
            if better {
                best_t = limit.min(best_t);
                best = Some((i, a.abs(), target));
            }
        }
        let range = self.hi[j] - self.lo[j];
        if range.is_finite() && range <= best_t {
            return (Step::Flip, range);
        }
        match best {
            Some((row, _, leave_value)) => (Step::Pivot { row, leave_value }, best_t),
            None => (Step::Unbounded, f64::INFINITY),
        }
    }

    fn apply(&mut self, q: usize, dir: f64, t: f64, step: Step) {
        let n = self.n;
        let j = self.nonbasic[q];
        let delta = dir * t;
        if delta != 0.0 {
            for i in 0..self.m {
                let a = self.t[i * n + q];
                if a != 0.0 {
                    self.x[self.basic[i]] += a * delta;
                }
            }
        }
        match step {
            Step::Flip => {
                self.x[j] = if dir > 0.0 { self.hi[j] } else { self.lo[j] };
            }
            Step::Pivot { row, leave_value } => {
                self.x[j] += delta;
                let leaving = self.basic[row];
                self.x[leaving] = leave_value;
                self.pivot(row, q);
                self.basic[row] = j;
                self.nonbasic[q] = leaving;
            }
            Step::Unbounded => unreachable!("unbounded step is never applied"),
        }
    }

    fn pivot(&mut self, p: usize, q: usize) {
        let n = self.n;
        let piv = self.t[p * n + q];
        {
            let row = &mut self.t[p * n..(p + 1) * n];
            for v in row.iter_mut() {
                *v = -*v / piv;
            }
            row[q] = 1.0 / piv;
        }
        let pivot_row = self.t[p * n..(p + 1) * n].to_vec();
        for i in 0..self.m {
            if i == p {
                continue;
            }
            let a = self.t[i * n + q];
            if a == 0.0 {
                continue;
            }
            let row = &mut self.t[i * n..(i + 1) * n];
            for (v, &r) in row.iter_mut().zip(&pivot_row) {
                *v += a * r;
            }
            row[q] = a * pivot_row[q];
        }
    }
}
