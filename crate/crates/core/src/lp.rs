//! Exact rational linear programming and the cutting-plane solver for the
//! threshold-rounding relaxation.
//!
//! [`solve_lp`] is a dense tableau simplex with Bland's rule, so it
//! terminates on degenerate problems without any tolerance. The relaxation
//!
//! ```text
//! min Σ_v w_v x_v + Σ_u π_u y_u
//!     Σ_{v∈Γ(S)} x_v + y_u ≥ 1     for S ⊆ V∖{r}, u ∈ S
//! ```
//!
//! is solved by separating violated rows with a minimum vertex cut between
//! each terminal and the root. Non-terminals have π_u = 0, so their `y_u` is
//! fixed at 1 and their rows never bind.

use crate::graph::{Graph, VertexSet};
use crate::instance::TreeInstance;
use crate::rational::{self, Rational};
use num_traits::{One, Signed, Zero};
use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    /// Sparse coefficients `(column, value)`.
    pub coeffs: Vec<(usize, Rational)>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl Row {
    pub fn lhs(&self, point: &[Rational]) -> Rational {
        self.coeffs
            .iter()
            .fold(Rational::zero(), |acc, (j, a)| acc + a * &point[*j])
    }

    pub fn holds(&self, point: &[Rational]) -> bool {
        let lhs = self.lhs(point);
        match self.relation {
            Relation::Le => lhs <= self.rhs,
            Relation::Ge => lhs >= self.rhs,
            Relation::Eq => lhs == self.rhs,
        }
    }
}

/// `min c·x` subject to explicit rows and `x ≥ 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalLp {
    pub objective: Vec<Rational>,
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { point: Vec<Rational>, value: Rational },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn value(&self) -> Option<&Rational> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }
}

impl RationalLp {
    pub fn new(num_vars: usize) -> Self {
        Self {
            objective: vec![Rational::zero(); num_vars],
            rows: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, Rational)>, relation: Relation, rhs: Rational) {
        assert!(
            coeffs.iter().all(|(j, _)| *j < self.num_vars()),
            "row refers to a column outside the LP"
        );
        self.rows.push(Row { coeffs, relation, rhs });
    }

    pub fn objective_value(&self, point: &[Rational]) -> Rational {
        self.objective
            .iter()
            .zip(point)
            .fold(Rational::zero(), |acc, (c, x)| acc + c * x)
    }

    /// Index of the first row the point violates, or of a negative entry
    /// (reported as `rows.len() + column`).
    pub fn first_violation(&self, point: &[Rational]) -> Option<usize> {
        if let Some(j) = point.iter().position(|x| x.is_negative()) {
            return Some(self.rows.len() + j);
        }
        self.rows.iter().position(|r| !r.holds(point))
    }

    /// CPLEX-style LP text, for cross-checking with external solvers.
    pub fn to_lp_format(&self) -> String {
        let term = |j: usize, a: &Rational| format!("{} x{j}", rational::format(a));
        let mut out = String::from("Minimize\n obj:");
        let obj: Vec<String> = self
            .objective
            .iter()
            .enumerate()
            .filter(|(_, a)| !a.is_zero())
            .map(|(j, a)| term(j, a))
            .collect();
        if obj.is_empty() {
            out.push_str(" 0 x0");
        } else {
            out.push(' ');
            out.push_str(&obj.join(" + "));
        }
        out.push_str("\nSubject To\n");
        for (i, row) in self.rows.iter().enumerate() {
            let lhs: Vec<String> = row.coeffs.iter().map(|(j, a)| term(*j, a)).collect();
            let rel = match row.relation {
                Relation::Le => "<=",
                Relation::Ge => ">=",
                Relation::Eq => "=",
            };
            let lhs = if lhs.is_empty() { "0 x0".to_string() } else { lhs.join(" + ") };
            let _ = writeln!(out, " c{i}: {lhs} {rel} {}", rational::format(&row.rhs));
        }
        out.push_str("End\n");
        out.replace("+ -", "- ")
    }
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    /// Reduced costs; the last entry is minus the objective value.
    cost: Vec<Rational>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.rows[r][c].recip();
        for a in self.rows[r].iter_mut() {
            if !a.is_zero() {
                *a *= &inv;
            }
        }
        let support: Vec<usize> = (0..=self.cols).filter(|&j| !self.rows[r][j].is_zero()).collect();
        let pivot_row = std::mem::take(&mut self.rows[r]);
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for &j in &support {
                row[j] -= &f * &pivot_row[j];
            }
        }
        if !self.cost[c].is_zero() {
            let f = self.cost[c].clone();
            for &j in &support {
                self.cost[j] -= &f * &pivot_row[j];
            }
        }
        self.rows[r] = pivot_row;
        self.basis[r] = c;
    }

    /// Runs Bland's rule over the allowed columns; false means unbounded.
    fn optimize(&mut self, allowed: &[bool]) -> bool {
        loop {
            let Some(c) = (0..self.cols).find(|&j| allowed[j] && self.cost[j].is_negative()) else {
                return true;
            };
            let mut best: Option<(Rational, usize, usize)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[c].is_positive() {
                    let ratio = &row[self.cols] / &row[c];
                    let better = match &best {
                        None => true,
                        Some((b, _, var)) => ratio < *b || (ratio == *b && self.basis[i] < *var),
                    };
                    if better {
                        best = Some((ratio, i, self.basis[i]));
                    }
                }
            }
            match best {
                Some((_, r, _)) => self.pivot(r, c),
                None => return false,
            }
        }
    }

    fn reset_cost(&mut self, c: &[Rational]) {
        self.cost = c.to_vec();
        self.cost.push(Rational::zero());
        for (i, row) in self.rows.iter().enumerate() {
            let cb = &c[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for (j, a) in row.iter().enumerate() {
                if !a.is_zero() {
                    self.cost[j] -= cb * a;
                }
            }
        }
    }
}

/// Exact optimum of `lp`. Covering problems (no equality rows, objective
/// nonnegative) are solved through their dual, which starts from a feasible
/// slack basis and skips phase 1; everything else goes through
/// [`solve_lp_two_phase`]. Either way the point is re-checked against every
/// row before it is handed back.
pub fn solve_lp(lp: &RationalLp) -> LpOutcome {
    solve_covering_dual(lp).unwrap_or_else(|| solve_lp_two_phase(lp))
}

/// Simplex on `max Σ b_i u_i` s.t. `Σ_i a_ij u_i ≤ c_j`, `u ≥ 0`, the dual of
/// `min c·x` s.t. `a_i·x ≥ b_i`, `x ≥ 0` (`≤` rows are negated). The primal
/// optimum is read off the reduced costs of the dual slacks. `None` when the
/// problem is not of that shape.
fn solve_covering_dual(lp: &RationalLp) -> Option<LpOutcome> {
    if lp.objective.iter().any(|c| c.is_negative()) || lp.rows.iter().any(|r| r.relation == Relation::Eq) {
        return None;
    }
    let n = lp.num_vars();
    let m = lp.rows.len();
    let cols = m + n;
    let mut rows = vec![vec![Rational::zero(); cols + 1]; n];
    for (i, row) in lp.rows.iter().enumerate() {
        let flip = row.relation == Relation::Le;
        for (j, a) in &row.coeffs {
            rows[*j][i] += if flip { -a } else { a.clone() };
        }
    }
    for (j, t) in rows.iter_mut().enumerate() {
        t[m + j] = Rational::one();
        t[cols] = lp.objective[j].clone();
    }
    let mut tab = Tableau {
        rows,
        basis: (m..cols).collect(),
        cost: Vec::new(),
        cols,
    };
    let neg_b: Vec<Rational> = lp
        .rows
        .iter()
        .map(|r| if r.relation == Relation::Le { r.rhs.clone() } else { -&r.rhs })
        .chain(std::iter::repeat_with(Rational::zero).take(n))
        .collect();
    tab.reset_cost(&neg_b);
    if !tab.optimize(&vec![true; cols]) {
        return Some(LpOutcome::Infeasible);
    }
    let point: Vec<Rational> = (0..n).map(|j| tab.cost[m + j].clone()).collect();
    let value = lp.objective_value(&point);
    assert_eq!(value, tab.cost[cols], "dual simplex bookkeeping diverged");
    assert_eq!(lp.first_violation(&point), None, "dual simplex returned an infeasible point");
    Some(LpOutcome::Optimal { point, value })
}

/// Two-phase simplex with Bland's rule. The returned optimum is re-checked
/// against every row of `lp` before it is handed back.
pub fn solve_lp_two_phase(lp: &RationalLp) -> LpOutcome {
    let n = lp.num_vars();
    let m = lp.rows.len();
    let slack_count = lp.rows.iter().filter(|r| r.relation != Relation::Eq).count();
    let mut relations = Vec::with_capacity(m);
    let mut art_count = 0;
    for row in &lp.rows {
        let flip = row.rhs.is_negative();
        let rel = match (row.relation, flip) {
            (Relation::Le, true) => Relation::Ge,
            (Relation::Ge, true) => Relation::Le,
            (r, _) => r,
        };
        if rel != Relation::Le {
            art_count += 1;
        }
        relations.push((rel, flip));
    }
    let cols = n + slack_count + art_count;
    let first_art = n + slack_count;
    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let (mut slack, mut art) = (n, first_art);
    for (row, &(rel, flip)) in lp.rows.iter().zip(&relations) {
        let mut t = vec![Rational::zero(); cols + 1];
        for (j, a) in &row.coeffs {
            t[*j] += if flip { -a } else { a.clone() };
        }
        t[cols] = if flip { -&row.rhs } else { row.rhs.clone() };
        match rel {
            Relation::Le => {
                t[slack] = Rational::one();
                basis.push(slack);
                slack += 1;
            }
            Relation::Ge => {
                t[slack] = -Rational::one();
                slack += 1;
                t[art] = Rational::one();
                basis.push(art);
                art += 1;
            }
            Relation::Eq => {
                t[art] = Rational::one();
                basis.push(art);
                art += 1;
            }
        }
        rows.push(t);
    }
    let mut tab = Tableau {
        rows,
        basis,
        cost: Vec::new(),
        cols,
    };

    // Phase 1: minimize the sum of artificials.
    let phase1: Vec<Rational> = (0..cols)
        .map(|j| if j >= first_art { Rational::one() } else { Rational::zero() })
        .collect();
    tab.reset_cost(&phase1);
    let everything = vec![true; cols];
    tab.optimize(&everything);
    if !tab.cost[cols].is_zero() {
        return LpOutcome::Infeasible;
    }
    // Drive zero-level artificials out of the basis; drop redundant rows.
    let mut i = 0;
    while i < tab.rows.len() {
        if tab.basis[i] >= first_art {
            match (0..first_art).find(|&j| !tab.rows[i][j].is_zero()) {
                Some(j) => tab.pivot(i, j),
                None => {
                    tab.rows.remove(i);
                    tab.basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }

    // Phase 2.
    let mut phase2 = lp.objective.clone();
    phase2.resize(cols, Rational::zero());
    tab.reset_cost(&phase2);
    let allowed: Vec<bool> = (0..cols).map(|j| j < first_art).collect();
    if !tab.optimize(&allowed) {
        return LpOutcome::Unbounded;
    }
    let mut point = vec![Rational::zero(); n];
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < n {
            point[b] = tab.rows[i][cols].clone();
        }
    }
    let value = lp.objective_value(&point);
    assert_eq!(value, -&tab.cost[cols], "simplex objective bookkeeping diverged");
    assert_eq!(lp.first_violation(&point), None, "simplex returned an infeasible point");
    LpOutcome::Optimal { point, value }
}

#[derive(Debug, Clone)]
struct Arc {
    to: usize,
    /// `None` is an uncapacitated arc.
    cap: Option<Rational>,
    flow: Rational,
}

impl Arc {
    fn residual(&self) -> Option<Rational> {
        self.cap.as_ref().map(|c| c - &self.flow)
    }

    fn open(&self) -> bool {
        self.residual().map_or(true, |r| r.is_positive())
    }
}

/// Minimum over `S ∋ source`, `sink ∉ S` of `Σ_{v∈Γ(S)} cap_v`, computed by
/// Edmonds–Karp on the node-split graph. `None` capacities are infinite; the
/// source is always uncapacitated and the sink's own capacity counts when it
/// is finite. Returns `None` when every separating set has infinite value,
/// otherwise the value and a minimizing `S` (the residual-reachable side).
pub fn min_vertex_cut(
    g: &Graph,
    source: usize,
    sink: usize,
    caps: &[Option<Rational>],
) -> Option<(Rational, VertexSet)> {
    assert_ne!(source, sink, "source and sink must differ");
    let n = g.vertex_count();
    let mut arcs: Vec<Arc> = Vec::new();
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); 2 * n];
    let mut add = |arcs: &mut Vec<Arc>, a: usize, b: usize, cap: Option<Rational>| {
        out[a].push(arcs.len());
        arcs.push(Arc { to: b, cap, flow: Rational::zero() });
        out[b].push(arcs.len());
        arcs.push(Arc { to: a, cap: Some(Rational::zero()), flow: Rational::zero() });
    };
    for v in 0..n {
        let cap = if v == source { None } else { caps[v].clone() };
        add(&mut arcs, 2 * v, 2 * v + 1, cap);
    }
    for (a, b) in g.edges() {
        add(&mut arcs, 2 * a + 1, 2 * b, None);
        add(&mut arcs, 2 * b + 1, 2 * a, None);
    }
    let (s, t) = (2 * source, 2 * sink + 1);
    let bfs = |arcs: &[Arc]| {
        let mut parent: Vec<Option<usize>> = vec![None; 2 * n];
        let mut seen = vec![false; 2 * n];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(x) = queue.pop_front() {
            for &e in &out[x] {
                let y = arcs[e].to;
                if !seen[y] && arcs[e].open() {
                    seen[y] = true;
                    parent[y] = Some(e);
                    queue.push_back(y);
                }
            }
        }
        (seen, parent)
    };
    let mut total = Rational::zero();
    loop {
        let (seen, parent) = bfs(&arcs);
        if !seen[t] {
            let inside: VertexSet = (0..n).filter(|&v| v != sink && seen[2 * v + 1]).collect();
            debug_assert_eq!(
                total,
                g.neighbors(&inside)
                    .iter()
                    .map(|v| caps[v].clone().expect("cut vertices are finite"))
                    .sum::<Rational>()
            );
            return Some((total, inside));
        }
        let mut path = Vec::new();
        let mut x = t;
        while let Some(e) = parent[x] {
            path.push(e);
            x = arcs[e ^ 1].to;
        }
        let bottleneck = path.iter().filter_map(|&e| arcs[e].residual()).min()?;
        for &e in &path {
            arcs[e].flow += &bottleneck;
            arcs[e ^ 1].flow -= &bottleneck;
        }
        total += bottleneck;
    }
}

/// Brute-force minimum vertex cut over every `S` (test oracle; n ≤ 20).
pub fn min_vertex_cut_brute(
    g: &Graph,
    source: usize,
    sink: usize,
    caps: &[Option<Rational>],
) -> Option<Rational> {
    let n = g.vertex_count();
    let others: Vec<usize> = (0..n).filter(|&v| v != source && v != sink).collect();
    let mut best: Option<Rational> = None;
    for bits in 0u64..(1u64 << others.len()) {
        let mut s = VertexSet::singleton(source);
        for (i, &v) in others.iter().enumerate() {
            if bits >> i & 1 == 1 {
                s.insert(v);
            }
        }
        let value: Option<Rational> = g.neighbors(&s).iter().map(|v| caps[v].clone()).sum();
        if let Some(val) = value {
            if best.as_ref().map_or(true, |b| val < *b) {
                best = Some(val);
            }
        }
    }
    best
}

/// Restriction on `Σ_v w_v x_v` used to guess the connection cost of an
/// optimal fractional solution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Window {
    Unbounded,
    Zero,
    /// Closed interval `[lo, hi]`.
    Between(Rational, Rational),
}

impl Window {
    /// `[(1+ε)^k, (1+ε)^{k+1}]`.
    pub fn power(k: i64, eps: &Rational) -> Window {
        let base = Rational::one() + eps;
        let lo = pow(&base, k);
        let hi = &lo * &base;
        Window::Between(lo, hi)
    }
}

fn pow(base: &Rational, k: i64) -> Rational {
    let p = num_traits::pow(base.clone(), k.unsigned_abs() as usize);
    if k < 0 {
        p.recip()
    } else {
        p
    }
}

/// Every `k` whose window intersects `[w_min, w_total]`, plus the window
/// above the one containing `w_total`, with `None` standing for the
/// zero-cost window.
pub fn window_range(inst: &TreeInstance, eps: &Rational) -> Vec<Option<i64>> {
    let mut out = vec![None];
    let positive: Vec<&Rational> = inst.weight.iter().filter(|w| w.is_positive()).collect();
    let Some(&w_min) = positive.iter().min() else {
        return out;
    };
    let total = rational::sum(positive.iter().copied());
    let base = Rational::one() + eps;
    let mut k = 0i64;
    let mut lo = Rational::one();
    while lo > *w_min {
        lo /= &base;
        k -= 1;
    }
    while &lo * &base <= *w_min {
        lo *= &base;
        k += 1;
    }
    while lo <= total {
        out.push(Some(k));
        lo *= &base;
        k += 1;
    }
    out.push(Some(k));
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpbSolution {
    /// One entry per vertex.
    pub x: Vec<Rational>,
    /// One entry per vertex; 1 for non-terminals, 0 for the root.
    pub y: Vec<Rational>,
    pub connection_value: Rational,
    pub penalty_value: Rational,
    /// Number of LP solves the separation loop needed.
    pub rounds: usize,
}

impl LpbSolution {
    pub fn objective(&self) -> Rational {
        &self.connection_value + &self.penalty_value
    }
}

/// Cutting-plane solver that keeps its cut pool across calls, so solving
/// many windows of one instance reuses earlier separations.
#[derive(Debug, Clone)]
pub struct LpbSolver<'a> {
    inst: &'a TreeInstance,
    terminals: Vec<usize>,
    /// `(u, Γ(S))` pairs; the row is `Σ_{v∈Γ(S)} x_v + y_u ≥ 1`.
    cuts: BTreeSet<(usize, VertexSet)>,
    /// `false` fixes every `y_u` at 0 (the Steiner-tree relaxation on the
    /// terminal set).
    with_penalties: bool,
}

impl<'a> LpbSolver<'a> {
    pub fn new(inst: &'a TreeInstance) -> Self {
        Self::build(inst, inst.terminals().iter().collect(), true)
    }

    /// Relaxation of the Steiner tree problem that must connect `q`.
    pub fn steiner(inst: &'a TreeInstance, q: &VertexSet) -> Self {
        Self::build(inst, q.iter().filter(|&u| u != inst.root).collect(), false)
    }

    fn build(inst: &'a TreeInstance, terminals: Vec<usize>, with_penalties: bool) -> Self {
        let cuts = terminals
            .iter()
            .map(|&u| (u, inst.graph.neighbors(&VertexSet::singleton(u))))
            .collect();
        Self {
            inst,
            terminals,
            cuts,
            with_penalties,
        }
    }

    pub fn cut_count(&self) -> usize {
        self.cuts.len()
    }

    fn y_column(&self, u: usize) -> Option<usize> {
        if !self.with_penalties {
            return None;
        }
        let n = self.inst.vertex_count();
        self.terminals.iter().position(|&t| t == u).map(|i| n + i)
    }

    pub fn build_lp(&self, window: &Window) -> RationalLp {
        let n = self.inst.vertex_count();
        let ys = if self.with_penalties { self.terminals.len() } else { 0 };
        let mut lp = RationalLp::new(n + ys);
        lp.objective[..n].clone_from_slice(&self.inst.weight);
        if self.with_penalties {
            for (i, &u) in self.terminals.iter().enumerate() {
                lp.objective[n + i] = self.inst.penalty[u].clone();
            }
        }
        for (u, gamma) in &self.cuts {
            let mut coeffs: Vec<(usize, Rational)> = gamma.iter().map(|v| (v, Rational::one())).collect();
            if let Some(c) = self.y_column(*u) {
                coeffs.push((c, Rational::one()));
            }
            lp.add_row(coeffs, Relation::Ge, Rational::one());
        }
        let cost_row = || -> Vec<(usize, Rational)> {
            (0..n)
                .filter(|&v| !self.inst.weight[v].is_zero())
                .map(|v| (v, self.inst.weight[v].clone()))
                .collect()
        };
        match window {
            Window::Unbounded => {}
            Window::Zero => lp.add_row(cost_row(), Relation::Le, Rational::zero()),
            Window::Between(lo, hi) => {
                lp.add_row(cost_row(), Relation::Ge, lo.clone());
                lp.add_row(cost_row(), Relation::Le, hi.clone());
            }
        }
        lp
    }

    /// Solves to optimality over all cut rows; `None` when the window makes
    /// the relaxation infeasible.
    pub fn solve(&mut self, window: &Window) -> Option<LpbSolution> {
        let n = self.inst.vertex_count();
        let mut rounds = 0;
        loop {
            let lp = self.build_lp(window);
            rounds += 1;
            let point = match solve_lp(&lp) {
                LpOutcome::Optimal { point, .. } => point,
                LpOutcome::Infeasible => return None,
                LpOutcome::Unbounded => unreachable!("nonnegative objective is bounded below"),
            };
            let x = point[..n].to_vec();
            let mut y = vec![Rational::one(); n];
            y[self.inst.root] = Rational::zero();
            for &u in &self.terminals {
                y[u] = self.y_column(u).map_or_else(Rational::zero, |c| point[c].clone());
            }
            let mut added = false;
            for &u in &self.terminals {
                if let Some(gamma) = violated_cut(&self.inst.graph, self.inst.root, &x, &y, u) {
                    added |= self.cuts.insert((u, gamma));
                }
            }
            if !added {
                let connection_value: Rational = x.iter().zip(&self.inst.weight).map(|(a, w)| a * w).sum();
                let penalty_value: Rational = self.terminals.iter().map(|&u| &y[u] * &self.inst.penalty[u]).sum();
                return Some(LpbSolution {
                    x,
                    y,
                    connection_value,
                    penalty_value,
                    rounds,
                });
            }
        }
    }
}

/// Γ(S) of a most violated row for terminal `u`, if any row is violated.
fn violated_cut(g: &Graph, root: usize, x: &[Rational], y: &[Rational], u: usize) -> Option<VertexSet> {
    let caps: Vec<Option<Rational>> = x.iter().cloned().map(Some).collect();
    let (value, s) = min_vertex_cut(g, u, root, &caps)?;
    (value + &y[u] < Rational::one()).then(|| g.neighbors(&s))
}

/// First `(u, S)` whose row `Σ_{v∈Γ(S)} x_v + y_u ≥ 1` fails, checked for
/// every `u ≠ r` with exact separation.
pub fn lpb_violation(inst: &TreeInstance, x: &[Rational], y: &[Rational]) -> Option<(usize, VertexSet)> {
    if x.iter().chain(y).any(|a| a.is_negative()) {
        return Some((usize::MAX, VertexSet::new()));
    }
    let caps: Vec<Option<Rational>> = x.iter().cloned().map(Some).collect();
    (0..inst.vertex_count())
        .filter(|&u| u != inst.root)
        .find_map(|u| {
            let (value, s) = min_vertex_cut(&inst.graph, u, inst.root, &caps)?;
            (value + &y[u] < Rational::one()).then_some((u, s))
        })
}

pub fn solve_lpb(inst: &TreeInstance) -> LpbSolution {
    LpbSolver::new(inst)
        .solve(&Window::Unbounded)
        .expect("the unrestricted relaxation is always feasible")
}

pub fn solve_lpb_k(inst: &TreeInstance, k: i64, eps: &Rational) -> Option<LpbSolution> {
    LpbSolver::new(inst).solve(&Window::power(k, eps))
}

/// Optimum of the Steiner-tree relaxation that must connect `q`: the
/// lower bound the moat grower's factor is measured against.
pub fn solve_lp_nwst(inst: &TreeInstance, q: &VertexSet) -> Option<LpbSolution> {
    LpbSolver::steiner(inst, q).solve(&Window::Unbounded)
}

/// Maps a solution of the set-penalty relaxation (variables `z_X` over
/// subsets of `V∖{r}`) to per-vertex penalties `y_u = Σ_{X∋u} z_X`.
pub fn lift_lpa_to_lpb(
    n: usize,
    x: &[Rational],
    z: &[(VertexSet, Rational)],
) -> (Vec<Rational>, Vec<Rational>) {
    let mut y = vec![Rational::zero(); n];
    for (set, value) in z {
        for u in set.iter() {
            y[u] += value;
        }
    }
    (x.to_vec(), y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::rats;
    use crate::rational::{int, ratio};

    fn path(n: usize) -> Graph {
        Graph::new(n, (1..n).map(|i| (i - 1, i))).unwrap()
    }

    fn path3(pi: &str) -> TreeInstance {
        TreeInstance::new(path(3), 0, rats(&["0", "5", "0"]), rats(&["0", "0", pi])).unwrap()
    }

    #[test]
    fn lp_examples() {
        let mut lp = RationalLp::new(1);
        lp.objective[0] = int(1);
        lp.add_row(vec![(0, int(1))], Relation::Ge, int(3));
        assert_eq!(solve_lp(&lp), LpOutcome::Optimal { point: vec![int(3)], value: int(3) });

        let mut lp = RationalLp::new(1);
        lp.add_row(vec![(0, int(1))], Relation::Ge, int(1));
        lp.add_row(vec![(0, int(1))], Relation::Le, int(0));
        assert_eq!(solve_lp(&lp), LpOutcome::Infeasible);

        let mut lp = RationalLp::new(2);
        lp.objective = vec![int(2), int(1)];
        lp.add_row(vec![(0, int(1)), (1, int(1))], Relation::Ge, int(1));
        assert_eq!(
            solve_lp(&lp),
            LpOutcome::Optimal { point: vec![int(0), int(1)], value: int(1) }
        );
    }

    proptest::proptest! {
        #[test]
        fn dual_path_matches_two_phase(
            cost in proptest::collection::vec(0i64..5, 3),
            rows in proptest::collection::vec((proptest::collection::vec(-2i64..4, 3), 0usize..2, -3i64..6), 1..6),
        ) {
            let mut lp = RationalLp::new(3);
            lp.objective = cost.iter().map(|&c| int(c)).collect();
            for (coeffs, rel, rhs) in &rows {
                let rel = if *rel == 0 { Relation::Ge } else { Relation::Le };
                lp.add_row(coeffs.iter().enumerate().map(|(j, &a)| (j, int(a))).collect(), rel, int(*rhs));
            }
            let fast = solve_lp(&lp);
            let slow = solve_lp_two_phase(&lp);
            proptest::prop_assert_eq!(fast.value(), slow.value());
            proptest::prop_assert_eq!(fast == LpOutcome::Infeasible, slow == LpOutcome::Infeasible);
        }
    }

    #[test]
    fn unbounded_and_equalities() {
        let mut lp = RationalLp::new(2);
        lp.objective = vec![int(-1), int(0)];
        lp.add_row(vec![(0, int(1)), (1, int(-1))], Relation::Le, int(1));
        assert_eq!(solve_lp(&lp), LpOutcome::Unbounded);

        // x + y = 2, x - y = 1/2, redundant copy of the first row.
        let mut lp = RationalLp::new(2);
        lp.objective = vec![int(1), int(3)];
        lp.add_row(vec![(0, int(1)), (1, int(1))], Relation::Eq, int(2));
        lp.add_row(vec![(0, int(1)), (1, int(-1))], Relation::Eq, ratio(1, 2));
        lp.add_row(vec![(0, int(2)), (1, int(2))], Relation::Eq, int(4));
        assert_eq!(
            solve_lp(&lp),
            LpOutcome::Optimal { point: vec![ratio(5, 4), ratio(3, 4)], value: ratio(7, 2) }
        );
    }

    #[test]
    fn negative_rhs_rows() {
        // -x ≤ -2  ⇔  x ≥ 2
        let mut lp = RationalLp::new(1);
        lp.objective[0] = int(1);
        lp.add_row(vec![(0, int(-1))], Relation::Le, int(-2));
        assert_eq!(lp_value(&lp), Some(int(2)));
    }

    fn lp_value(lp: &RationalLp) -> Option<Rational> {
        solve_lp(lp).value().cloned()
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example cycles under the textbook rule; Bland terminates.
        let mut lp = RationalLp::new(4);
        lp.objective = vec![ratio(-3, 4), int(150), ratio(-1, 50), int(6)];
        lp.add_row(vec![(0, ratio(1, 4)), (1, int(-60)), (2, ratio(-1, 25)), (3, int(9))], Relation::Le, int(0));
        lp.add_row(vec![(0, ratio(1, 2)), (1, int(-90)), (2, ratio(-1, 50)), (3, int(3))], Relation::Le, int(0));
        lp.add_row(vec![(2, int(1))], Relation::Le, int(1));
        assert_eq!(lp_value(&lp), Some(ratio(-1, 20)));
    }

    #[test]
    fn lp_format_dump() {
        let mut lp = RationalLp::new(2);
        lp.objective = vec![int(2), int(1)];
        lp.add_row(vec![(0, int(1)), (1, int(-1))], Relation::Ge, ratio(1, 2));
        let text = lp.to_lp_format();
        assert_eq!(text, "Minimize\n obj: 2 x0 + 1 x1\nSubject To\n c0: 1 x0 - 1 x1 >= 1/2\nEnd\n");
    }

    #[test]
    fn cut_examples() {
        let caps = vec![None, Some(ratio(2, 5)), None];
        assert_eq!(min_vertex_cut(&path(3), 2, 0, &caps), Some((ratio(2, 5), VertexSet::from([2]))));
        // r=0, a=1, b=2, u=3
        let g = Graph::new(4, [(0, 1), (1, 3), (0, 2), (2, 3)]).unwrap();
        let caps = vec![None, Some(ratio(1, 2)), Some(ratio(1, 3)), None];
        assert_eq!(min_vertex_cut(&g, 3, 0, &caps), Some((ratio(5, 6), VertexSet::from([3]))));
        // Adjacent source and uncapacitated sink: no finite cut.
        assert_eq!(min_vertex_cut(&path(2), 1, 0, &[None, None]), None);
        assert_eq!(min_vertex_cut(&path(2), 1, 0, &[Some(int(1)), None]), Some((int(1), VertexSet::from([1]))));
    }

    #[test]
    fn cut_prefers_cheaper_far_side() {
        // r - a - b - u with cap_a = 1 < cap_b = 3: S = {b, u}.
        let caps = vec![None, Some(int(1)), Some(int(3)), None];
        assert_eq!(min_vertex_cut(&path(4), 3, 0, &caps), Some((int(1), VertexSet::from([2, 3]))));
        assert_eq!(min_vertex_cut_brute(&path(4), 3, 0, &caps), Some(int(1)));
    }

    #[test]
    fn lpb_examples() {
        let s = solve_lpb(&path3("3"));
        assert_eq!(s.objective(), int(3));
        assert_eq!(s.x[1], int(0));
        assert_eq!(s.y[2], int(1));
        let s = solve_lpb(&path3("7"));
        assert_eq!(s.objective(), int(5));
        assert_eq!((s.x[1].clone(), s.y[2].clone()), (int(1), int(0)));
        let zero = TreeInstance::new(path(3), 0, rats(&["0", "5", "2"]), vec![int(0); 3]).unwrap();
        let s = solve_lpb(&zero);
        assert_eq!(s.objective(), int(0));
        assert!(s.x.iter().zip(&zero.weight).all(|(x, w)| (x * w).is_zero()));
    }

    #[test]
    fn lpb_window_examples() {
        let inst = path3("3");
        let s = solve_lpb_k(&inst, 2, &int(1)).unwrap();
        assert_eq!(s.objective(), ratio(23, 5));
        assert_eq!(s.x[1], ratio(4, 5));
        // x has no upper bound, so a window above the total weight is met by
        // scaling x_a up: [16, 32] gives x_a = 16/5.
        let s = solve_lpb_k(&inst, 4, &int(1)).unwrap();
        assert_eq!((s.x[1].clone(), s.objective()), (ratio(16, 5), int(16)));
        // Without any weighted vertex no positive window is reachable.
        let free = TreeInstance::new(path(3), 0, vec![int(0); 3], rats(&["0", "0", "3"])).unwrap();
        assert_eq!(solve_lpb_k(&free, 0, &int(1)), None);
        let mut solver = LpbSolver::new(&inst);
        assert_eq!(solver.solve(&Window::Unbounded).unwrap().objective(), int(3));
        assert_eq!(solver.solve(&Window::Zero).unwrap().objective(), int(3));
    }

    #[test]
    fn window_range_covers_weights() {
        let inst = path3("3");
        let ks = window_range(&inst, &ratio(1, 10));
        assert_eq!(ks[0], None);
        let ks: Vec<i64> = ks.into_iter().flatten().collect();
        let first = Window::power(ks[0], &ratio(1, 10));
        let Window::Between(lo, hi) = first else { panic!() };
        assert!(lo <= int(5) && int(5) < hi);
        let last = Window::power(*ks.last().unwrap(), &ratio(1, 10));
        let Window::Between(lo, _) = last else { panic!() };
        assert!(lo > int(5));
    }

    #[test]
    fn steiner_relaxation() {
        let inst = path3("3");
        let s = solve_lp_nwst(&inst, &VertexSet::from([2])).unwrap();
        assert_eq!(s.connection_value, int(5));
        assert_eq!(solve_lp_nwst(&inst, &VertexSet::new()).unwrap().connection_value, int(0));
    }

    #[test]
    fn lift_examples() {
        let x = vec![int(0); 3];
        let (_, y) = lift_lpa_to_lpb(3, &x, &[]);
        assert_eq!(y, vec![int(0); 3]);
        let (_, y) = lift_lpa_to_lpb(3, &x, &[(VertexSet::from([1, 2]), int(1))]);
        assert_eq!(y, vec![int(0), int(1), int(1)]);
        let inst = path3("3");
        assert_eq!(lpb_violation(&inst, &x, &y), None);
        let y0 = vec![int(0); 3];
        assert!(lpb_violation(&inst, &x, &y0).is_some());
    }
}
