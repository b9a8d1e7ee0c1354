//! Dense bounded-variable primal simplex.
//!
//! Every row gets a slack column whose bounds encode the row sense, so all
//! rows become equalities `A x + s = b`. Nonbasic columns sit at a finite
//! bound (or at zero when free). Rows whose slack cannot absorb the initial
//! residual get an artificial column, and phase one drives the artificials
//! to zero. The tableau `B^-1 [A | I | art]` is kept explicitly and rebuilt
//! from the original matrix every `REFACTOR_EVERY` pivots.

use super::ConstraintSense;

const PIVOT_TOL: f64 = 1e-9;
const HARRIS_TOL: f64 = 1e-9;
const DEGENERATE_STEP: f64 = 1e-12;
const REFACTOR_EVERY: usize = 100;

#[derive(Debug, Clone)]
pub(crate) struct LpRow {
    pub terms: Vec<(usize, f64)>,
    pub sense: ConstraintSense,
    pub rhs: f64,
}

/// A linear program in minimization form. Bounds are supplied per solve.
#[derive(Debug, Clone)]
pub(crate) struct LpData {
    pub n: usize,
    pub rows: Vec<LpRow>,
    pub cost: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct LpParams {
    pub feasibility_tolerance: f64,
    pub pivot_limit: usize,
    pub bland_threshold: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub(crate) struct LpSolution {
    pub status: LpStatus,
    /// Structural values; meaningful only when optimal.
    pub x: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
    /// Final basis, for restarting after bound changes. Absent when an
    /// artificial column stayed basic.
    pub warm: Option<WarmStart>,
}

/// A basis over the structural and slack columns.
#[derive(Debug, Clone)]
pub(crate) struct WarmStart {
    basis: Vec<usize>,
    state: Vec<NonBasic>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NonBasic {
    Lower,
    Upper,
    Free,
}

const NONBASIC: usize = usize::MAX;

enum PhaseEnd {
    Optimal,
    Unbounded,
    Limit,
    Singular,
}

enum DualEnd {
    Optimal,
    Infeasible,
    Limit,
    Singular,
}

#[derive(Clone)]
struct Tableau<'p> {
    m: usize,
    ncols: usize,
    /// Original `[A | I | art]`, row-major.
    a: Vec<f64>,
    b: Vec<f64>,
    /// Current `B^-1 [A | I | art]`, row-major.
    t: Vec<f64>,
    /// Reduced costs for the current phase.
    d: Vec<f64>,
    cost: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    x: Vec<f64>,
    basis: Vec<usize>,
    /// Row of each basic column; `NONBASIC` otherwise.
    row_of: Vec<usize>,
    state: Vec<NonBasic>,
    pivots: usize,
    since_refactor: usize,
    /// Row of each artificial column, in column order.
    art_row: Vec<usize>,
    params: &'p LpParams,
}

fn infeasible(pivots: usize) -> LpSolution {
    LpSolution {
        status: LpStatus::Infeasible,
        x: Vec::new(),
        objective: f64::NAN,
        pivots,
        warm: None,
    }
}

pub(crate) fn solve_dense(lp: &LpData, lower: &[f64], upper: &[f64], params: &LpParams) -> LpSolution {
    LpEngine::start(lp, lower, upper, params, None).0
}

/// A solved LP kept in memory so it can be re-solved after bound changes
/// without refactoring.
#[derive(Clone)]
pub(crate) struct LpEngine<'a> {
    lp: &'a LpData,
    tab: Tableau<'a>,
}

impl<'a> LpEngine<'a> {
    /// Solves from scratch, or from `warm` when given. The engine is returned
    /// only for an optimal solve.
    pub fn start(
        lp: &'a LpData,
        lower: &[f64],
        upper: &[f64],
        params: &'a LpParams,
        warm: Option<&WarmStart>,
    ) -> (LpSolution, Option<Self>) {
        if lower.iter().zip(upper).any(|(l, u)| l > u) {
            return (infeasible(0), None);
        }
        let mut spent = 0;
        if let Some(ws) = warm {
            if let Some(mut tab) = Tableau::from_basis(lp, lower, upper, params, ws) {
                match finish_dual(lp, &mut tab) {
                    Some(sol) => return Self::wrap(lp, tab, sol),
                    None => spent = tab.pivots,
                }
            }
        }
        let mut tab = Tableau::build(lp, lower, upper, params);
        let mut sol = run_cold(lp, &mut tab);
        sol.pivots += spent;
        Self::wrap(lp, tab, sol)
    }

    fn wrap(lp: &'a LpData, tab: Tableau<'a>, sol: LpSolution) -> (LpSolution, Option<Self>) {
        let engine = (sol.status == LpStatus::Optimal).then_some(LpEngine { lp, tab });
        (sol, engine)
    }

    /// Re-solves under new structural bounds, starting from the current
    /// basis. Falls back to a cold solve if the restart fails.
    pub fn resolve(mut self, lower: &[f64], upper: &[f64]) -> (LpSolution, Option<Self>) {
        if lower.iter().zip(upper).any(|(l, u)| l > u) {
            return (infeasible(0), None);
        }
        // The pivot limit applies per solve, not per engine lifetime.
        self.tab.pivots = 0;
        self.tab.set_bounds(lower, upper);
        let lp = self.lp;
        match finish_dual(lp, &mut self.tab) {
            Some(sol) => Self::wrap(lp, self.tab, sol),
            None => {
                let spent = self.tab.pivots;
                let params = self.tab.params;
                let mut tab = Tableau::build(lp, lower, upper, params);
                let mut sol = run_cold(lp, &mut tab);
                sol.pivots += spent;
                Self::wrap(lp, tab, sol)
            }
        }
    }
}

/// Dual simplex to primal feasibility, then primal cleanup. `None` when the
/// restart cannot be completed.
fn finish_dual(lp: &LpData, tab: &mut Tableau<'_>) -> Option<LpSolution> {
    if !tab.make_dual_feasible() {
        return None;
    }
    match tab.run_dual() {
        DualEnd::Optimal => {}
        DualEnd::Infeasible => return Some(infeasible(tab.pivots)),
        DualEnd::Limit | DualEnd::Singular => return None,
    }
    let status = match tab.run_phase() {
        PhaseEnd::Optimal => LpStatus::Optimal,
        PhaseEnd::Unbounded => LpStatus::Unbounded,
        PhaseEnd::Limit | PhaseEnd::Singular => return None,
    };
    Some(tab.solution(lp, status))
}

fn run_cold(lp: &LpData, tab: &mut Tableau<'_>) -> LpSolution {
    let n = lp.n;
    let params = tab.params;

    // Phase one: minimize the sum of artificials.
    let art_start = n + tab.m;
    if tab.ncols > art_start {
        for j in art_start..tab.ncols {
            tab.cost[j] = 1.0;
        }
        tab.recompute_reduced_costs();
        match tab.run_phase() {
            PhaseEnd::Optimal => {}
            PhaseEnd::Unbounded | PhaseEnd::Singular | PhaseEnd::Limit => {
                return LpSolution {
                    status: LpStatus::IterationLimit,
                    x: Vec::new(),
                    objective: f64::NAN,
                    pivots: tab.pivots,
                    warm: None,
                }
            }
        }
        // Each row is judged on its own scale; a single large right-hand side
        // must not loosen the others.
        let violated = tab.art_row.iter().enumerate().any(|(kk, &i)| {
            tab.x[art_start + kk] > params.feasibility_tolerance * lp.rows[i].rhs.abs().max(1.0)
        });
        if violated {
            return infeasible(tab.pivots);
        }
        for j in art_start..tab.ncols {
            tab.lo[j] = 0.0;
            tab.hi[j] = 0.0;
            tab.cost[j] = 0.0;
            if tab.row_of[j] == NONBASIC {
                tab.x[j] = 0.0;
                tab.state[j] = NonBasic::Lower;
            }
        }
    }

    tab.cost[..n].copy_from_slice(&lp.cost);
    tab.recompute_reduced_costs();
    let end = tab.run_phase();
    let status = match end {
        PhaseEnd::Optimal => LpStatus::Optimal,
        PhaseEnd::Unbounded => LpStatus::Unbounded,
        PhaseEnd::Limit | PhaseEnd::Singular => LpStatus::IterationLimit,
    };
    tab.solution(lp, status)
}

impl<'p> Tableau<'p> {
    fn build(lp: &LpData, lower: &[f64], upper: &[f64], params: &'p LpParams) -> Self {
        let n = lp.n;
        let m = lp.rows.len();

        let mut x0 = vec![0.0; n];
        let mut state0 = vec![NonBasic::Free; n];
        for j in 0..n {
            if lower[j].is_finite() {
                x0[j] = lower[j];
                state0[j] = NonBasic::Lower;
            } else if upper[j].is_finite() {
                x0[j] = upper[j];
                state0[j] = NonBasic::Upper;
            }
        }

        // Decide per row whether the slack can start basic or an artificial is needed.
        let mut art_rows: Vec<(usize, f64, f64)> = Vec::new(); // (row, sign, slack value)
        let mut slack_vals = vec![0.0; m];
        for (i, row) in lp.rows.iter().enumerate() {
            let act: f64 = row.terms.iter().map(|&(j, c)| c * x0[j]).sum();
            let r = row.rhs - act;
            let (slo, shi) = slack_bounds(row.sense);
            let tol = HARRIS_TOL * (1.0 + r.abs());
            if r >= slo - tol && r <= shi + tol {
                slack_vals[i] = r;
            } else {
                let s = r.clamp(slo, shi);
                slack_vals[i] = s;
                art_rows.push((i, (r - s).signum(), s));
            }
        }

        let k = art_rows.len();
        let ncols = n + m + k;
        let mut a = vec![0.0; m * ncols];
        for (i, row) in lp.rows.iter().enumerate() {
            for &(j, c) in &row.terms {
                a[i * ncols + j] += c;
            }
            a[i * ncols + n + i] = 1.0;
        }
        let mut lo = Vec::with_capacity(ncols);
        let mut hi = Vec::with_capacity(ncols);
        lo.extend_from_slice(lower);
        hi.extend_from_slice(upper);
        for row in &lp.rows {
            let (slo, shi) = slack_bounds(row.sense);
            lo.push(slo);
            hi.push(shi);
        }
        lo.extend(std::iter::repeat_n(0.0, k));
        hi.extend(std::iter::repeat_n(f64::INFINITY, k));

        let mut x = vec![0.0; ncols];
        x[..n].copy_from_slice(&x0);
        let mut state = state0;
        state.extend(std::iter::repeat_n(NonBasic::Lower, m + k));
        let mut basis: Vec<usize> = (n..n + m).collect();
        let mut row_of = vec![NONBASIC; ncols];
        for i in 0..m {
            x[n + i] = slack_vals[i];
            row_of[n + i] = i;
        }
        for (kk, &(i, sign, s)) in art_rows.iter().enumerate() {
            let col = n + m + kk;
            a[i * ncols + col] = sign;
            let act: f64 = lp.rows[i].terms.iter().map(|&(j, c)| c * x0[j]).sum();
            x[col] = (lp.rows[i].rhs - act - s).abs();
            // The slack leaves the basis at the bound nearest the residual.
            let slack = n + i;
            row_of[slack] = NONBASIC;
            state[slack] = if s == lo[slack] && lo[slack].is_finite() {
                NonBasic::Lower
            } else {
                NonBasic::Upper
            };
            x[slack] = s;
            basis[i] = col;
            row_of[col] = i;
        }

        // With a diagonal +-1 starting basis, B^-1 A is a sign flip of each row.
        let mut t = a.clone();
        for &(i, sign, _) in &art_rows {
            if sign < 0.0 {
                for v in &mut t[i * ncols..(i + 1) * ncols] {
                    *v = -*v;
                }
            }
        }

        let b = lp.rows.iter().map(|r| r.rhs).collect();
        Tableau {
            m,
            ncols,
            a,
            b,
            t,
            d: vec![0.0; ncols],
            cost: vec![0.0; ncols],
            lo,
            hi,
            x,
            basis,
            row_of,
            state,
            pivots: 0,
            since_refactor: 0,
            art_row: art_rows.iter().map(|&(i, _, _)| i).collect(),
            params,
        }
    }

    /// Tableau over `[A | I]` with the given basis, factored, with phase-two
    /// costs. `None` if the basis does not fit or is singular.
    fn from_basis(lp: &LpData, lower: &[f64], upper: &[f64], params: &'p LpParams, ws: &WarmStart) -> Option<Self> {
        let (n, m) = (lp.n, lp.rows.len());
        let ncols = n + m;
        if ws.basis.len() != m || ws.state.len() != ncols {
            return None;
        }
        let mut a = vec![0.0; m * ncols];
        for (i, row) in lp.rows.iter().enumerate() {
            for &(j, c) in &row.terms {
                a[i * ncols + j] += c;
            }
            a[i * ncols + n + i] = 1.0;
        }
        let mut lo = lower.to_vec();
        let mut hi = upper.to_vec();
        for row in &lp.rows {
            let (slo, shi) = slack_bounds(row.sense);
            lo.push(slo);
            hi.push(shi);
        }
        let mut row_of = vec![NONBASIC; ncols];
        for (i, &c) in ws.basis.iter().enumerate() {
            if c >= ncols || row_of[c] != NONBASIC {
                return None;
            }
            row_of[c] = i;
        }
        let mut state = ws.state.clone();
        let mut x = vec![0.0; ncols];
        for j in 0..ncols {
            if row_of[j] != NONBASIC {
                continue;
            }
            let want = state[j];
            state[j] = match want {
                NonBasic::Upper if hi[j].is_finite() => NonBasic::Upper,
                _ if lo[j].is_finite() => NonBasic::Lower,
                _ if hi[j].is_finite() => NonBasic::Upper,
                _ => NonBasic::Free,
            };
            x[j] = match state[j] {
                NonBasic::Lower => lo[j],
                NonBasic::Upper => hi[j],
                NonBasic::Free => 0.0,
            };
        }
        let mut cost = vec![0.0; ncols];
        cost[..n].copy_from_slice(&lp.cost);
        let mut tab = Tableau {
            m,
            ncols,
            t: a.clone(),
            a,
            b: lp.rows.iter().map(|r| r.rhs).collect(),
            d: vec![0.0; ncols],
            cost,
            lo,
            hi,
            x,
            basis: ws.basis.clone(),
            row_of,
            state,
            pivots: 0,
            since_refactor: 0,
            art_row: Vec::new(),
            params,
        };
        tab.refactor().then_some(tab)
    }

    fn solution(&self, lp: &LpData, status: LpStatus) -> LpSolution {
        let n = lp.n;
        let x = self.x[..n].to_vec();
        let objective = lp.cost.iter().zip(&x).map(|(c, v)| c * v).sum();
        let clean = self.basis.iter().all(|&c| c < n + self.m);
        let warm = (status == LpStatus::Optimal && clean).then(|| WarmStart {
            basis: self.basis.clone(),
            state: self.state[..n + self.m].to_vec(),
        });
        LpSolution {
            status,
            x,
            objective,
            pivots: self.pivots,
            warm,
        }
    }

    fn opt_tol(&self) -> f64 {
        1e-9 * self.cost.iter().fold(1.0_f64, |a, c| a.max(c.abs()))
    }

    /// Moves boxed nonbasic columns to the bound their reduced cost favours.
    /// Returns false if some unboxed column has the wrong sign.
    fn make_dual_feasible(&mut self) -> bool {
        let tol = self.opt_tol();
        for j in 0..self.ncols {
            if self.row_of[j] != NONBASIC || self.lo[j] == self.hi[j] {
                continue;
            }
            let dj = self.d[j];
            let boxed = self.lo[j].is_finite() && self.hi[j].is_finite();
            let wrong = match self.state[j] {
                NonBasic::Lower => dj < -tol,
                NonBasic::Upper => dj > tol,
                NonBasic::Free => dj.abs() > tol,
            };
            if !wrong {
                continue;
            }
            if !boxed {
                return false;
            }
            let (state, value) = if dj < 0.0 {
                (NonBasic::Upper, self.hi[j])
            } else {
                (NonBasic::Lower, self.lo[j])
            };
            self.state[j] = state;
            self.shift_nonbasic(j, value);
        }
        true
    }

    /// Moves nonbasic column `j` to `value`, updating the basic values.
    fn shift_nonbasic(&mut self, j: usize, value: f64) {
        let delta = value - self.x[j];
        if delta != 0.0 {
            let nc = self.ncols;
            for i in 0..self.m {
                let a = self.t[i * nc + j];
                if a != 0.0 {
                    self.x[self.basis[i]] -= a * delta;
                }
            }
        }
        self.x[j] = value;
    }

    /// Replaces the structural bounds, keeping the basis. Nonbasic columns
    /// follow their bound; basic ones may end up out of bounds for the dual.
    fn set_bounds(&mut self, lower: &[f64], upper: &[f64]) {
        for j in 0..lower.len() {
            if self.lo[j] == lower[j] && self.hi[j] == upper[j] {
                continue;
            }
            self.lo[j] = lower[j];
            self.hi[j] = upper[j];
            if self.row_of[j] != NONBASIC {
                continue;
            }
            self.state[j] = match self.state[j] {
                NonBasic::Upper if upper[j].is_finite() => NonBasic::Upper,
                _ if lower[j].is_finite() => NonBasic::Lower,
                _ if upper[j].is_finite() => NonBasic::Upper,
                _ => NonBasic::Free,
            };
            let value = match self.state[j] {
                NonBasic::Lower => lower[j],
                NonBasic::Upper => upper[j],
                NonBasic::Free => 0.0,
            };
            self.shift_nonbasic(j, value);
        }
    }

    /// Tolerance on the bounds of column `j` when it is basic.
    fn primal_tol(&self, j: usize) -> f64 {
        let n = self.ncols - self.m - self.art_row.len();
        let scale = if j >= n + self.m {
            self.b[self.art_row[j - n - self.m]].abs()
        } else if j >= n {
            self.b[j - n].abs()
        } else {
            let (l, h) = (self.lo[j], self.hi[j]);
            [l, h].iter().filter(|v| v.is_finite()).fold(0.0_f64, |a, v| a.max(v.abs()))
        };
        self.params.feasibility_tolerance * scale.max(1.0)
    }

    /// Dual simplex from a dual-feasible basis: repeatedly moves the most
    /// out-of-bounds basic column to its violated bound.
    fn run_dual(&mut self) -> DualEnd {
        let nc = self.ncols;
        loop {
            if self.pivots >= self.params.pivot_limit {
                return DualEnd::Limit;
            }
            if self.since_refactor >= REFACTOR_EVERY && !self.refactor() {
                return DualEnd::Singular;
            }
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let b = self.basis[i];
                let tol = self.primal_tol(b);
                let excess = if self.x[b] < self.lo[b] - tol {
                    (self.lo[b] - self.x[b]) / tol
                } else if self.x[b] > self.hi[b] + tol {
                    (self.x[b] - self.hi[b]) / tol
                } else {
                    continue;
                };
                if leave.is_none_or(|(_, e)| excess > e) {
                    leave = Some((i, excess));
                }
            }
            let Some((r, _)) = leave else {
                return DualEnd::Optimal;
            };
            let out = self.basis[r];
            let below = self.x[out] < self.lo[out];
            let target = if below { self.lo[out] } else { self.hi[out] };

            // Harris two-pass dual ratio test over columns that can push the
            // leaving value toward its bound.
            let dtol = self.opt_tol();
            let mut cands: Vec<(usize, f64, f64)> = Vec::new();
            for j in 0..nc {
                if self.row_of[j] != NONBASIC || self.lo[j] == self.hi[j] {
                    continue;
                }
                let alpha = self.t[r * nc + j];
                if alpha.abs() < PIVOT_TOL {
                    continue;
                }
                // The leaving value moves by -alpha per unit increase of x_j.
                let ok = match self.state[j] {
                    NonBasic::Lower => (alpha < 0.0) == below,
                    NonBasic::Upper => (alpha > 0.0) == below,
                    NonBasic::Free => true,
                };
                if ok {
                    let dj = match self.state[j] {
                        NonBasic::Lower => self.d[j].max(0.0),
                        NonBasic::Upper => (-self.d[j]).max(0.0),
                        NonBasic::Free => self.d[j].abs(),
                    };
                    cands.push((j, dj, alpha.abs()));
                }
            }
            if cands.is_empty() {
                return DualEnd::Infeasible;
            }
            let bound = cands
                .iter()
                .map(|&(_, dj, a)| (dj + dtol) / a)
                .fold(f64::INFINITY, f64::min);
            let (q, _, _) = cands
                .iter()
                .filter(|&&(_, dj, a)| dj / a <= bound)
                .fold(None, |best: Option<(usize, f64, f64)>, &c| match best {
                    Some(b) if b.2 >= c.2 => Some(b),
                    _ => Some(c),
                })
                .expect("bound is attained");

            let alpha = self.t[r * nc + q];
            let delta = (self.x[out] - target) / alpha;
            for i in 0..self.m {
                let a = self.t[i * nc + q];
                if a != 0.0 {
                    self.x[self.basis[i]] -= a * delta;
                }
            }
            self.x[q] += delta;
            self.x[out] = target;
            self.state[out] = if below { NonBasic::Lower } else { NonBasic::Upper };
            self.row_of[out] = NONBASIC;
            self.pivot(r, q);
            self.basis[r] = q;
            self.row_of[q] = r;
            self.since_refactor += 1;
            self.pivots += 1;
        }
    }

    fn recompute_reduced_costs(&mut self) {
        let nc = self.ncols;
        self.d.copy_from_slice(&self.cost);
        for i in 0..self.m {
            let cb = self.cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.t[i * nc..(i + 1) * nc];
                for (dj, tij) in self.d.iter_mut().zip(row) {
                    *dj -= cb * tij;
                }
            }
        }
        for &bcol in &self.basis {
            self.d[bcol] = 0.0;
        }
    }

    fn run_phase(&mut self) -> PhaseEnd {
        let opt_tol = self.opt_tol();
        let mut bland = false;
        let mut degenerate_run = 0usize;
        let start = self.pivots;
        loop {
            if self.pivots >= self.params.pivot_limit {
                return PhaseEnd::Limit;
            }
            if self.since_refactor >= REFACTOR_EVERY && !self.refactor() {
                return PhaseEnd::Singular;
            }

            let Some((j, dir)) = self.choose_entering(opt_tol, bland) else {
                // Confirm optimality against a freshly factored tableau.
                if self.since_refactor > 0 && self.pivots > start {
                    if !self.refactor() {
                        return PhaseEnd::Singular;
                    }
                    if self.choose_entering(opt_tol, bland).is_some() {
                        continue;
                    }
                }
                return PhaseEnd::Optimal;
            };

            let step = self.ratio_test(j, dir, bland);
            let (theta, leave) = match step {
                Step::Unbounded => return PhaseEnd::Unbounded,
                Step::Flip(theta) => (theta, None),
                Step::Pivot(theta, r, to_upper) => (theta, Some((r, to_upper))),
            };

            let nc = self.ncols;
            if theta != 0.0 {
                for i in 0..self.m {
                    let alpha = self.t[i * nc + j];
                    if alpha != 0.0 {
                        self.x[self.basis[i]] -= dir * alpha * theta;
                    }
                }
                self.x[j] += dir * theta;
            }
            match leave {
                None => {
                    self.state[j] = if dir > 0.0 { NonBasic::Upper } else { NonBasic::Lower };
                    self.x[j] = if dir > 0.0 { self.hi[j] } else { self.lo[j] };
                }
                Some((r, to_upper)) => {
                    let out = self.basis[r];
                    self.x[out] = if to_upper { self.hi[out] } else { self.lo[out] };
                    self.state[out] = if to_upper { NonBasic::Upper } else { NonBasic::Lower };
                    self.row_of[out] = NONBASIC;
                    self.pivot(r, j);
                    self.basis[r] = j;
                    self.row_of[j] = r;
                    self.since_refactor += 1;
                }
            }
            self.pivots += 1;
            if theta < DEGENERATE_STEP {
                degenerate_run += 1;
                if degenerate_run > self.params.bland_threshold {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
            }
        }
    }

    /// Dantzig pricing, or lowest-index eligible column under Bland's rule.
    fn choose_entering(&self, opt_tol: f64, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        let mut best_mag = 0.0;
        for j in 0..self.ncols {
            if self.row_of[j] != NONBASIC || self.lo[j] == self.hi[j] {
                continue;
            }
            let dj = self.d[j];
            let dir = match self.state[j] {
                NonBasic::Lower if dj < -opt_tol => 1.0,
                NonBasic::Upper if dj > opt_tol => -1.0,
                NonBasic::Free if dj < -opt_tol => 1.0,
                NonBasic::Free if dj > opt_tol => -1.0,
                _ => continue,
            };
            if bland {
                return Some((j, dir));
            }
            if dj.abs() > best_mag {
                best_mag = dj.abs();
                best = Some((j, dir));
            }
        }
        best
    }

    fn ratio_test(&self, j: usize, dir: f64, bland: bool) -> Step {
        let nc = self.ncols;
        let range = self.hi[j] - self.lo[j];

        // (row, rate magnitude, slack to the blocking bound, hits upper)
        let mut cands: Vec<(usize, f64, f64, bool)> = Vec::new();
        for i in 0..self.m {
            let alpha = self.t[i * nc + j];
            if alpha.abs() < PIVOT_TOL {
                continue;
            }
            let b = self.basis[i];
            let rate = -dir * alpha;
            if rate < 0.0 && self.lo[b].is_finite() {
                cands.push((i, -rate, (self.x[b] - self.lo[b]).max(0.0), false));
            } else if rate > 0.0 && self.hi[b].is_finite() {
                cands.push((i, rate, (self.hi[b] - self.x[b]).max(0.0), true));
            }
        }

        if bland {
            let mut best: Option<(usize, f64, bool)> = None;
            let mut best_theta = f64::INFINITY;
            for &(i, rate, slack, up) in &cands {
                let th = slack / rate;
                let better = match best {
                    None => true,
                    Some((bi, _, _)) => {
                        th < best_theta - DEGENERATE_STEP
                            || (th <= best_theta + DEGENERATE_STEP && self.basis[i] < self.basis[bi])
                    }
                };
                if better {
                    best = Some((i, th, up));
                    best_theta = th.min(best_theta);
                }
            }
            return match best {
                Some((_, th, _)) if range <= th => Step::Flip(range),
                Some((i, th, up)) => Step::Pivot(th, i, up),
                None if range.is_finite() => Step::Flip(range),
                None => Step::Unbounded,
            };
        }

        // Harris two-pass: bound the step with relaxed bounds, then pick the
        // largest pivot among rows that block within it.
        let mut theta_max = f64::INFINITY;
        for &(_, rate, slack, _) in &cands {
            theta_max = theta_max.min((slack + HARRIS_TOL) / rate);
        }
        if range.is_finite() && range <= theta_max {
            return Step::Flip(range);
        }
        if theta_max == f64::INFINITY {
            return Step::Unbounded;
        }
        let mut best: Option<(usize, f64, f64, bool)> = None;
        for &(i, rate, slack, up) in &cands {
            let th = slack / rate;
            if th <= theta_max {
                let alpha = self.t[i * nc + j].abs();
                if best.is_none_or(|(_, a, _, _)| alpha > a) {
                    best = Some((i, alpha, th, up));
                }
            }
        }
        let (i, _, th, up) = best.expect("theta_max is attained by some row");
        Step::Pivot(th, i, up)
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let nc = self.ncols;
        let p = self.t[r * nc + j];
        let inv = 1.0 / p;
        for v in &mut self.t[r * nc..(r + 1) * nc] {
            *v *= inv;
        }
        self.t[r * nc + j] = 1.0;
        let (before, rest) = self.t.split_at_mut(r * nc);
        let (prow, after) = rest.split_at_mut(nc);
        for row in before.chunks_exact_mut(nc).chain(after.chunks_exact_mut(nc)) {
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
        }
        self.d[j] = 0.0;
    }

    /// Rebuilds the tableau, basic values and reduced costs from the original
    /// matrix by Gauss-Jordan elimination on the basis columns. Returns false
    /// when the basis is numerically singular.
    fn refactor(&mut self) -> bool {
        let (m, nc) = (self.m, self.ncols);
        self.since_refactor = 0;
        if m == 0 {
            self.recompute_reduced_costs();
            return true;
        }
        let mut t = self.a.clone();
        let mut rhs = self.b.clone();
        for j in 0..nc {
            if self.row_of[j] == NONBASIC && self.x[j] != 0.0 {
                let xj = self.x[j];
                for (i, r) in rhs.iter_mut().enumerate() {
                    *r -= self.a[i * nc + j] * xj;
                }
            }
        }

        let cols = self.basis.clone();
        let mut assigned = vec![false; m];
        let mut new_basis = vec![usize::MAX; m];
        for &c in &cols {
            let mut piv_row = usize::MAX;
            let mut piv_mag = 1e-11;
            for i in 0..m {
                if !assigned[i] && t[i * nc + c].abs() > piv_mag {
                    piv_mag = t[i * nc + c].abs();
                    piv_row = i;
                }
            }
            if piv_row == usize::MAX {
                return false;
            }
            assigned[piv_row] = true;
            new_basis[piv_row] = c;
            let inv = 1.0 / t[piv_row * nc + c];
            for v in &mut t[piv_row * nc..(piv_row + 1) * nc] {
                *v *= inv;
            }
            rhs[piv_row] *= inv;
            t[piv_row * nc + c] = 1.0;
            let prow: Vec<f64> = t[piv_row * nc..(piv_row + 1) * nc].to_vec();
            let prhs = rhs[piv_row];
            for i in 0..m {
                if i == piv_row {
                    continue;
                }
                let f = t[i * nc + c];
                if f != 0.0 {
                    for (v, pv) in t[i * nc..(i + 1) * nc].iter_mut().zip(&prow) {
                        *v -= f * pv;
                    }
                    t[i * nc + c] = 0.0;
                    rhs[i] -= f * prhs;
                }
            }
        }
        self.t = t;
        self.basis = new_basis;
        for (i, &c) in self.basis.iter().enumerate() {
            self.row_of[c] = i;
            self.x[c] = rhs[i];
        }
        self.recompute_reduced_costs();
        true
    }
}

enum Step {
    Unbounded,
    Flip(f64),
    Pivot(f64, usize, bool),
}

fn slack_bounds(sense: ConstraintSense) -> (f64, f64) {
    match sense {
        ConstraintSense::Le => (0.0, f64::INFINITY),
        ConstraintSense::Ge => (f64::NEG_INFINITY, 0.0),
        ConstraintSense::Eq => (0.0, 0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PARAMS: LpParams = LpParams {
        feasibility_tolerance: 1e-7,
        pivot_limit: 10_000,
        bland_threshold: 60,
    };

    fn row(terms: &[(usize, f64)], sense: ConstraintSense, rhs: f64) -> LpRow {
        LpRow {
            terms: terms.to_vec(),
            sense,
            rhs,
        }
    }

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y ; x <= 4 ; 2y <= 12 ; 3x + 2y <= 18  => (2, 6), 36
        let lp = LpData {
            n: 2,
            rows: vec![
                row(&[(0, 1.0)], ConstraintSense::Le, 4.0),
                row(&[(1, 2.0)], ConstraintSense::Le, 12.0),
                row(&[(0, 3.0), (1, 2.0)], ConstraintSense::Le, 18.0),
            ],
            cost: vec![-3.0, -5.0],
        };
        let s = solve_dense(&lp, &[0.0, 0.0], &[f64::INFINITY; 2], &PARAMS);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective + 36.0).abs() < 1e-9);
        assert!((s.x[0] - 2.0).abs() < 1e-9 && (s.x[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn needs_phase_one() {
        // min x + y ; x + y >= 2 ; x - y = 1 ; => x = 1.5, y = 0.5
        let lp = LpData {
            n: 2,
            rows: vec![
                row(&[(0, 1.0), (1, 1.0)], ConstraintSense::Ge, 2.0),
                row(&[(0, 1.0), (1, -1.0)], ConstraintSense::Eq, 1.0),
            ],
            cost: vec![1.0, 1.0],
        };
        let s = solve_dense(&lp, &[0.0, 0.0], &[10.0, 10.0], &PARAMS);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 2.0).abs() < 1e-9);
        assert!((s.x[0] - 1.5).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let lp = LpData {
            n: 1,
            rows: vec![row(&[(0, 1.0)], ConstraintSense::Ge, 5.0)],
            cost: vec![1.0],
        };
        let s = solve_dense(&lp, &[0.0], &[3.0], &PARAMS);
        assert_eq!(s.status, LpStatus::Infeasible);

        let lp = LpData {
            n: 2,
            rows: vec![row(&[(0, 1.0), (1, -1.0)], ConstraintSense::Le, 1.0)],
            cost: vec![-1.0, 0.0],
        };
        let s = solve_dense(&lp, &[0.0, 0.0], &[f64::INFINITY; 2], &PARAMS);
        assert_eq!(s.status, LpStatus::Unbounded);
    }

    #[test]
    fn free_and_negative_bounded_variables() {
        // min x ; x >= -3 via row ; x free  => -3
        let lp = LpData {
            n: 1,
            rows: vec![row(&[(0, 1.0)], ConstraintSense::Ge, -3.0)],
            cost: vec![1.0],
        };
        let s = solve_dense(&lp, &[f64::NEG_INFINITY], &[f64::INFINITY], &PARAMS);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.x[0] + 3.0).abs() < 1e-9);

        // max x with x in (-inf, 7]
        let lp = LpData {
            n: 1,
            rows: vec![],
            cost: vec![-1.0],
        };
        let s = solve_dense(&lp, &[f64::NEG_INFINITY], &[7.0], &PARAMS);
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.x[0], 7.0);
    }

    #[test]
    fn bland_mode_still_solves() {
        let params = LpParams {
            bland_threshold: 0,
            ..PARAMS
        };
        let lp = LpData {
            n: 2,
            rows: vec![
                row(&[(0, 1.0)], ConstraintSense::Le, 4.0),
                row(&[(1, 2.0)], ConstraintSense::Le, 12.0),
                row(&[(0, 3.0), (1, 2.0)], ConstraintSense::Le, 18.0),
            ],
            cost: vec![-3.0, -5.0],
        };
        let s = solve_dense(&lp, &[0.0, 0.0], &[f64::INFINITY; 2], &params);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective + 36.0).abs() < 1e-9);
    }
}
