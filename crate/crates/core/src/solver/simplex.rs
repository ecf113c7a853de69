//! Bounded-variable primal revised simplex on `A x + s = b`.
//!
//! Phase one starts from a slack/artificial basis and minimizes the sum of
//! artificials; phase two prices with the true costs. Degenerate stalls
//! switch pricing and the ratio test to Bland's rule until progress resumes.

use crate::scalar::Scalar;
use crate::solver::lu::LuFactor;
use crate::solver::{PivotRule, SolverError, SolverOptions};

/// Minimization problem over structural columns; row slacks are implicit.
#[derive(Debug, Clone)]
pub(crate) struct StdProblem<T> {
    pub m: usize,
    /// Structural columns as `(row, value)` lists.
    pub cols: Vec<Vec<(usize, T)>>,
    pub cost: Vec<T>,
    pub lower: Vec<T>,
    pub upper: Vec<T>,
    /// Bounds of the slack of each row: `a x + s = b`.
    pub slack_lower: Vec<T>,
    pub slack_upper: Vec<T>,
    pub b: Vec<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum VarState {
    Basic(usize),
    Lower,
    Upper,
    /// Nonbasic free variable held at zero.
    Zero,
}

#[derive(Debug, Clone)]
pub(crate) enum Outcome<T> {
    Optimal {
        x: Vec<T>,
        y: Vec<T>,
        d: Vec<T>,
        states: Vec<VarState>,
    },
    Infeasible {
        farkas: Vec<T>,
    },
    Unbounded {
        ray: Vec<T>,
    },
}

pub(crate) struct SimplexRun<T> {
    pub outcome: Outcome<T>,
    pub iterations: usize,
}

const REFACTOR_EVERY: usize = 32;
const DEGENERATE_STREAK: usize = 40;

struct Engine<'o, T> {
    m: usize,
    n_struct: usize,
    /// Columns of every variable: structural, slack, artificial.
    cols: Vec<Vec<(usize, T)>>,
    lower: Vec<T>,
    upper: Vec<T>,
    b: Vec<T>,
    x: Vec<T>,
    state: Vec<VarState>,
    basis: Vec<usize>,
    lu: LuFactor<T>,
    opts: &'o SolverOptions<T>,
    iterations: usize,
    bland: bool,
    degenerate_streak: usize,
    /// Reduced costs of the current phase.
    reduced: Vec<T>,
    /// Devex reference weights.
    weights: Vec<T>,
}

enum Step<T> {
    Optimal,
    Unbounded { q: usize, dir: T, alpha: Vec<T> },
}

pub(crate) fn solve_std<T: Scalar>(
    p: &StdProblem<T>,
    opts: &SolverOptions<T>,
) -> Result<SimplexRun<T>, SolverError> {
    let m = p.m;
    let n = p.cols.len();
    let mut cols = p.cols.clone();
    let mut lower = p.lower.clone();
    let mut upper = p.upper.clone();
    let mut x = vec![T::zero(); n];
    let mut state = vec![VarState::Lower; n];
    for j in 0..n {
        let (l, u) = (lower[j], upper[j]);
        if l.is_finite() {
            x[j] = l;
            state[j] = VarState::Lower;
        } else if u.is_finite() {
            x[j] = u;
            state[j] = VarState::Upper;
        } else {
            state[j] = VarState::Zero;
        }
    }
    let mut resid = p.b.clone();
    for (j, col) in p.cols.iter().enumerate() {
        if x[j] != T::zero() {
            for &(r, v) in col {
                resid[r] -= v * x[j];
            }
        }
    }

    let mut basis = vec![0; m];
    let mut artificials = Vec::new();
    for i in 0..m {
        let s = n + i;
        cols.push(vec![(i, T::one())]);
        lower.push(p.slack_lower[i]);
        upper.push(p.slack_upper[i]);
        x.push(T::zero());
        state.push(VarState::Lower);
        let r = resid[i];
        if r >= p.slack_lower[i] && r <= p.slack_upper[i] {
            x[s] = r;
            state[s] = VarState::Basic(i);
            basis[i] = s;
        } else {
            let (v, st) = if r < p.slack_lower[i] {
                (p.slack_lower[i], VarState::Lower)
            } else {
                (p.slack_upper[i], VarState::Upper)
            };
            x[s] = v;
            state[s] = st;
            artificials.push((i, r - v));
        }
    }
    let n_total_slack = n + m;
    for (k, &(i, gap)) in artificials.iter().enumerate() {
        let a = n_total_slack + k;
        let sign = if gap > T::zero() { T::one() } else { -T::one() };
        cols.push(vec![(i, sign)]);
        lower.push(T::zero());
        upper.push(T::infinity());
        x.push(gap.abs());
        state.push(VarState::Basic(i));
        basis[i] = a;
    }

    let lu = LuFactor::factorize(m, |pos| cols[basis[pos]].as_slice(), opts.pivot_tol)
        .map_err(|_| SolverError::NumericalBreakdown { diagnostics: "initial basis singular".into() })?;

    let mut eng = Engine {
        m,
        n_struct: n,
        cols,
        lower,
        upper,
        b: p.b.clone(),
        x,
        state,
        basis,
        lu,
        opts,
        iterations: 0,
        bland: opts.pivot == PivotRule::Bland,
        degenerate_streak: 0,
        reduced: Vec::new(),
        weights: Vec::new(),
    };

    let n_all = eng.cols.len();
    if !artificials.is_empty() {
        let mut c1 = vec![T::zero(); n_all];
        for c in c1.iter_mut().skip(n_total_slack) {
            *c = T::one();
        }
        match eng.run(&c1)? {
            Step::Optimal => {}
            Step::Unbounded { .. } => {
                return Err(SolverError::NumericalBreakdown {
                    diagnostics: "phase one reported an unbounded direction".into(),
                })
            }
        }
        let infeas: T = (n_total_slack..n_all).map(|j| eng.x[j]).sum();
        let bscale = T::one() + eng.b.iter().fold(T::zero(), |a, v| a.max(v.abs()));
        if infeas > opts.tol_feas * bscale {
            let y = eng.duals(&c1);
            return Ok(SimplexRun { outcome: Outcome::Infeasible { farkas: y }, iterations: eng.iterations });
        }
        for j in n_total_slack..n_all {
            eng.upper[j] = T::zero();
            if !matches!(eng.state[j], VarState::Basic(_)) {
                eng.x[j] = T::zero();
                eng.state[j] = VarState::Lower;
            }
        }
        eng.bland = opts.pivot == PivotRule::Bland;
        eng.degenerate_streak = 0;
    }

    let mut c2 = vec![T::zero(); n_all];
    c2[..n].copy_from_slice(&p.cost);
    let step = eng.run(&c2)?;
    let iterations = eng.iterations;
    match step {
        Step::Optimal => {
            eng.refactor()?;
            let y = eng.duals(&c2);
            let mut d = vec![T::zero(); n + m];
            for (j, dj) in d.iter_mut().enumerate() {
                *dj = if matches!(eng.state[j], VarState::Basic(_)) {
                    T::zero()
                } else {
                    c2[j] - eng.dot_col(j, &y)
                };
            }
            eng.x.truncate(n + m);
            eng.state.truncate(n + m);
            Ok(SimplexRun {
                outcome: Outcome::Optimal { x: eng.x, y, d, states: eng.state },
                iterations,
            })
        }
        Step::Unbounded { q, dir, alpha } => {
            let mut ray = vec![T::zero(); n];
            if q < n {
                ray[q] = dir;
            }
            for (pos, &v) in eng.basis.iter().enumerate() {
                if v < n {
                    ray[v] = -dir * alpha[pos];
                }
            }
            Ok(SimplexRun { outcome: Outcome::Unbounded { ray }, iterations })
        }
    }
}

impl<T: Scalar> Engine<'_, T> {
    fn dot_col(&self, j: usize, y: &[T]) -> T {
        self.cols[j].iter().fold(T::zero(), |acc, &(r, v)| acc + v * y[r])
    }

    fn duals(&self, c: &[T]) -> Vec<T> {
        let cb: Vec<T> = self.basis.iter().map(|&j| c[j]).collect();
        self.lu.btran(&cb)
    }

    fn refactor(&mut self) -> Result<(), SolverError> {
        loop {
            let cols = &self.cols;
            let basis = &self.basis;
            match LuFactor::factorize(self.m, |pos| cols[basis[pos]].as_slice(), self.opts.pivot_tol) {
                Ok(lu) => {
                    self.lu = lu;
                    break;
                }
                Err(sing) => {
                    // Swap dependent columns for the slacks of unpivoted rows.
                    for (&pos, &row) in sing.positions.iter().zip(&sing.rows) {
                        let out = self.basis[pos];
                        let slack = self.n_struct + row;
                        if matches!(self.state[slack], VarState::Basic(_)) {
                            return Err(SolverError::NumericalBreakdown {
                                diagnostics: format!("cannot repair singular basis at row {row}"),
                            });
                        }
                        self.set_nonbasic_nearest(out);
                        self.basis[pos] = slack;
                        self.state[slack] = VarState::Basic(pos);
                    }
                }
            }
        }
        self.recompute_basics();
        Ok(())
    }

    fn set_nonbasic_nearest(&mut self, j: usize) {
        let (l, u, v) = (self.lower[j], self.upper[j], self.x[j]);
        if l.is_finite() && (!u.is_finite() || (v - l).abs() <= (u - v).abs()) {
            self.x[j] = l;
            self.state[j] = VarState::Lower;
        } else if u.is_finite() {
            self.x[j] = u;
            self.state[j] = VarState::Upper;
        } else {
            self.x[j] = T::zero();
            self.state[j] = VarState::Zero;
        }
    }

    fn recompute_basics(&mut self) {
        let mut rhs = self.b.clone();
        for j in 0..self.cols.len() {
            if matches!(self.state[j], VarState::Basic(_)) || self.x[j] == T::zero() {
                continue;
            }
            for &(r, v) in &self.cols[j] {
                rhs[r] -= v * self.x[j];
            }
        }
        let xb = self.lu.ftran(&rhs);
        for (pos, &j) in self.basis.iter().enumerate() {
            self.x[j] = xb[pos];
        }
    }

    fn refresh_reduced(&mut self, c: &[T]) {
        let y = self.duals(c);
        for j in 0..self.cols.len() {
            self.reduced[j] =
                if matches!(self.state[j], VarState::Basic(_)) { T::zero() } else { c[j] - self.dot_col(j, &y) };
        }
    }

    fn run(&mut self, c: &[T]) -> Result<Step<T>, SolverError> {
        let tol_opt = self.opts.tol_opt;
        let tol_feas = self.opts.tol_feas;
        let devex = self.opts.pivot == PivotRule::Devex;
        let n_all = self.cols.len();
        self.weights = vec![T::one(); n_all];
        self.reduced = vec![T::zero(); n_all];
        self.refresh_reduced(c);
        // Reduced costs are updated per pivot and recomputed on refactor;
        // optimality is only declared on freshly recomputed values.
        let mut fresh = true;
        loop {
            if self.iterations >= self.opts.max_iters {
                return Err(SolverError::IterationLimit { iterations: self.iterations });
            }
            if self.lu.num_updates() >= REFACTOR_EVERY {
                self.refactor()?;
                self.refresh_reduced(c);
                fresh = true;
            }

            // Pricing.
            let mut entering: Option<(usize, T, T)> = None;
            for j in 0..n_all {
                let st = self.state[j];
                if matches!(st, VarState::Basic(_)) || self.lower[j] == self.upper[j] {
                    continue;
                }
                let d = self.reduced[j];
                let dir = match st {
                    VarState::Lower if d < -tol_opt => T::one(),
                    VarState::Upper if d > tol_opt => -T::one(),
                    VarState::Zero if d.abs() > tol_opt => {
                        if d < T::zero() {
                            T::one()
                        } else {
                            -T::one()
                        }
                    }
                    _ => continue,
                };
                if self.bland {
                    entering = Some((j, dir, d.abs()));
                    break;
                }
                let score = if devex { d * d / self.weights[j] } else { d.abs() };
                match entering {
                    Some((_, _, best)) if score <= best => {}
                    _ => entering = Some((j, dir, score)),
                }
            }
            let Some((q, dir, _)) = entering else {
                if fresh {
                    return Ok(Step::Optimal);
                }
                self.refactor()?;
                self.refresh_reduced(c);
                fresh = true;
                continue;
            };

            let mut aq = vec![T::zero(); self.m];
            for &(r, v) in &self.cols[q] {
                aq[r] = v;
            }
            let alpha = self.lu.ftran(&aq);

            // Ratio test.
            let (leave, t_max) = self.ratio_test(q, dir, &alpha);
            if leave.is_none() && !t_max.is_finite() {
                if !fresh {
                    self.refactor()?;
                    self.refresh_reduced(c);
                    fresh = true;
                    continue;
                }
                return Ok(Step::Unbounded { q, dir, alpha });
            }
            self.iterations += 1;

            let t = t_max;
            if t <= tol_feas {
                self.degenerate_streak += 1;
                if self.degenerate_streak >= DEGENERATE_STREAK {
                    self.bland = true;
                }
            } else {
                self.degenerate_streak = 0;
                self.bland = self.opts.pivot == PivotRule::Bland;
            }

            if t != T::zero() {
                self.x[q] += dir * t;
                for (pos, &a) in alpha.iter().enumerate() {
                    if a != T::zero() {
                        let j = self.basis[pos];
                        self.x[j] -= dir * t * a;
                    }
                }
            }

            match leave {
                None => {
                    // Bound flip.
                    if dir > T::zero() {
                        self.x[q] = self.upper[q];
                        self.state[q] = VarState::Upper;
                    } else {
                        self.x[q] = self.lower[q];
                        self.state[q] = VarState::Lower;
                    }
                }
                Some(pos) => {
                    let out = self.basis[pos];
                    if dir * alpha[pos] > T::zero() {
                        self.x[out] = self.lower[out];
                        self.state[out] = VarState::Lower;
                    } else {
                        self.x[out] = self.upper[out];
                        self.state[out] = VarState::Upper;
                    }
                    if self.lower[out] == self.upper[out] {
                        self.state[out] = VarState::Lower;
                    }
                    self.update_pricing(q, out, pos, alpha[pos], devex);
                    self.basis[pos] = q;
                    self.state[q] = VarState::Basic(pos);
                    self.lu.update(pos, &alpha);
                    fresh = false;
                }
            }
        }
    }
    /// Distance each blocking basic variable allows, or `None` when the
    /// entry does not block.
    fn block_limit(&self, pos: usize, da: T, slack: T) -> Option<T> {
        let j = self.basis[pos];
        if da > T::zero() {
            self.lower[j].is_finite().then(|| (self.x[j] - self.lower[j] + slack) / da)
        } else {
            self.upper[j].is_finite().then(|| (self.upper[j] - self.x[j] + slack) / (-da))
        }
    }

    /// Chooses the leaving position and the step length. Outside Bland mode
    /// this is a two-pass Harris test: bounds are relaxed by the feasibility
    /// tolerance to find the admissible step, then the largest pivot within
    /// it leaves. `None` with a finite step is a bound flip.
    fn ratio_test(&self, q: usize, dir: T, alpha: &[T]) -> (Option<usize>, T) {
        let flip = self.upper[q] - self.lower[q];
        let biggest = alpha.iter().fold(T::zero(), |acc, a| acc.max(a.abs()));
        let piv_tol = self.opts.pivot_tol.max(T::lit(1e-9)).max(T::lit(1e-9) * biggest);
        let eligible = || {
            alpha.iter().enumerate().map(move |(pos, &a)| (pos, dir * a)).filter(move |&(_, da)| da.abs() > piv_tol)
        };

        if self.bland {
            let mut t_max = flip;
            let mut leave: Option<usize> = None;
            for (pos, da) in eligible() {
                let Some(limit) = self.block_limit(pos, da, T::zero()) else { continue };
                let limit = limit.max(T::zero());
                let better = match leave {
                    None => limit < t_max || !t_max.is_finite(),
                    Some(bpos) => {
                        let tie_eps = T::lit(1e-12) * T::one().max(t_max.abs());
                        limit < t_max - tie_eps || (limit <= t_max + tie_eps && self.basis[pos] < self.basis[bpos])
                    }
                };
                if better {
                    t_max = if leave.is_none() { limit } else { limit.min(t_max) };
                    leave = Some(pos);
                }
            }
            return (leave, t_max);
        }

        let tol = self.opts.tol_feas;
        let mut relaxed = T::infinity();
        let mut blocking: Vec<(usize, T, T)> = Vec::new();
        for (pos, da) in eligible() {
            let Some(limit) = self.block_limit(pos, da, T::zero()) else { continue };
            relaxed = relaxed.min(limit + tol / da.abs());
            blocking.push((pos, limit, da.abs()));
        }
        if flip <= relaxed {
            return (None, flip);
        }
        if !relaxed.is_finite() {
            return (None, T::infinity());
        }
        let mut best: Option<(usize, T, T)> = None;
        for &(pos, limit, size) in &blocking {
            if limit <= relaxed && best.map_or(true, |(_, _, m)| size > m) {
                best = Some((pos, limit.max(T::zero()), size));
            }
        }
        match best {
            Some((pos, t, _)) => (Some(pos), t),
            None => (None, flip),
        }
    }

    /// Updates reduced costs and Devex reference weights for a pivot that
    /// brings `q` into basis position `pos`, replacing `out`.
    fn update_pricing(&mut self, q: usize, out: usize, pos: usize, pivot: T, devex: bool) {
        let mut unit = vec![T::zero(); self.m];
        unit[pos] = T::one();
        let row = self.lu.btran(&unit);
        let step = self.reduced[q] / pivot;
        let wq = self.weights[q];
        let mut reset = false;
        for j in 0..self.cols.len() {
            if j == q || matches!(self.state[j], VarState::Basic(_)) || self.lower[j] == self.upper[j] {
                continue;
            }
            let arj = self.dot_col(j, &row);
            if arj == T::zero() {
                continue;
            }
            self.reduced[j] -= step * arj;
            if devex {
                let ratio = arj / pivot;
                let w = self.weights[j].max(ratio * ratio * wq);
                reset |= w > T::lit(1e8);
                self.weights[j] = w;
            }
        }
        self.reduced[q] = T::zero();
        self.reduced[out] = -step;
        self.weights[out] = (wq / (pivot * pivot)).max(T::one());
        if reset {
            self.weights.iter_mut().for_each(|w| *w = T::one());
        }
    }
}
