//! Lagrangian-multiplier-preserving primal-dual algorithm for rooted
//! node-weighted prize-collecting Steiner tree.
//!
//! Growth starts with the root and all terminals bought. Each active moat
//! pays for its growth out of its potential P(X) = Π(X) − Σ_{S⊆X} y_S; a
//! moat whose potential reaches 0 is deactivated and its unmarked terminals
//! are marked with the current iteration. Pruning then walks the root
//! component in reverse purchase order and deletes a vertex bought at time
//! t unless that would cut off a terminal that was still unmarked at t.
//!
//! On planar inputs the output satisfies
//! `w(F') + 3·Π(V∖F') ≤ 3·Σ y_S`; [`audit_lmp`] re-derives the pieces of
//! that argument from the recorded run.

use crate::audit::AuditReport;
use crate::graph::{Graph, VertexSet};
use crate::instance::TreeInstance;
use crate::moats::{DualLedger, EventKind, IterationRecord, MoatError, MoatState, Potential};
use crate::rational::{self, Rational};
use num_traits::{Signed, Zero};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LmpError {
    #[error("instance is not normalized (some vertex has both weight and penalty, or the root is not free)")]
    Unnormalized,
    #[error("vertex {0} cannot reach the root")]
    Unreachable(usize),
    #[error(transparent)]
    Moat(#[from] MoatError),
}

/// A primal solution with its cost breakdown.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PcSolution {
    pub bought: VertexSet,
    pub connection_cost: Rational,
    pub penalty_cost: Rational,
}

impl PcSolution {
    pub fn evaluate(inst: &TreeInstance, bought: VertexSet) -> Self {
        let (connection_cost, penalty_cost) = inst.cost_of(&bought);
        Self {
            bought,
            connection_cost,
            penalty_cost,
        }
    }

    pub fn total(&self) -> Rational {
        &self.connection_cost + &self.penalty_cost
    }
}

/// Output of [`solve_lmp`]: the pruned solution plus the dual certificate
/// and the per-iteration history the auditor needs.
#[derive(Debug, Clone)]
pub struct LmpSolution {
    pub solution: PcSolution,
    pub ledger: DualLedger,
    pub dual_total: Rational,
    pub history: Vec<IterationRecord>,
    pub purchase_time: Vec<Option<usize>>,
    pub mark_time: Vec<Option<usize>>,
    /// Everything bought during growth, before pruning.
    pub grown: VertexSet,
}

impl LmpSolution {
    pub fn trace(&self) -> Vec<String> {
        self.history.iter().map(ToString::to_string).collect()
    }
}

pub fn solve_lmp(inst: &TreeInstance) -> Result<LmpSolution, LmpError> {
    if !inst.is_normalized() {
        return Err(LmpError::Unnormalized);
    }
    let terminals = inst.terminals();
    let penalty = inst.penalty.clone();
    run(inst, &terminals, |v| Potential::Finite(penalty[v].clone()))
}

/// Connects the root to every vertex of `terminals` by running the same
/// moat grower with penalties switched off: terminals get an infinite
/// potential so their moats only stop when they reach the root.
pub fn solve_nwst(inst: &TreeInstance, terminals: &VertexSet) -> Result<VertexSet, LmpError> {
    Ok(solve_nwst_full(inst, terminals)?.solution.bought)
}

/// [`solve_nwst`] with the dual ledger and event history kept.
pub fn solve_nwst_full(inst: &TreeInstance, terminals: &VertexSet) -> Result<LmpSolution, LmpError> {
    let reach = inst.graph.reachable_within(inst.root, |_| true);
    if let Some(u) = terminals.iter().find(|&u| !reach[u]) {
        return Err(LmpError::Unreachable(u));
    }
    let q: VertexSet = terminals.iter().filter(|&u| u != inst.root).collect();
    run(inst, &q, |v| {
        if q.contains(v) {
            Potential::Infinite
        } else {
            Potential::Finite(Rational::zero())
        }
    })
}

fn run(
    inst: &TreeInstance,
    terminals: &VertexSet,
    potential: impl Fn(usize) -> Potential,
) -> Result<LmpSolution, LmpError> {
    let n = inst.vertex_count();
    let root = inst.root;
    let mut initial = terminals.clone();
    initial.insert(root);
    let set_potential = |s: &VertexSet| {
        s.iter().fold(Potential::Finite(Rational::zero()), |acc, v| match (acc, potential(v)) {
            (Potential::Finite(a), Potential::Finite(b)) => Potential::Finite(a + b),
            _ => Potential::Infinite,
        })
    };
    let not_root = |s: &VertexSet| !s.contains(root);
    let mut state = MoatState::new(
        inst.graph.clone(),
        inst.weight.clone(),
        &initial,
        set_potential,
        not_root,
    );
    let mut mark_time: Vec<Option<usize>> = vec![None; n];

    while state.has_active() {
        let event = state.next_event(state.potential_event())?;
        match &event.kind {
            EventKind::VertexTight(v) => {
                state.begin_iteration(&event.epsilon, "vertex-tight", format!("v={v}"));
                state.apply_growth(&event.epsilon)?;
                state.buy_vertex(*v, potential(*v), not_root)?;
            }
            EventKind::SetTight(set) => {
                state.begin_iteration(&event.epsilon, "set-tight", format!("set={set}"));
                state.apply_growth(&event.epsilon)?;
                let members = state.deactivate(set.first().expect("moats are nonempty"), true)?;
                let now = state.iteration();
                for u in members.iter().filter(|&u| terminals.contains(u)) {
                    mark_time[u].get_or_insert(now);
                }
            }
        }
        if state.iteration() > 2 * n + 1 {
            return Err(MoatError::Stalled.into());
        }
    }

    let grown = state.bought();
    let purchase_time = state.purchase_time().to_vec();
    let bought = prune(&inst.graph, root, &grown, &purchase_time, terminals, &mark_time);
    let ledger = state.ledger().clone();
    Ok(LmpSolution {
        solution: PcSolution::evaluate(inst, bought),
        dual_total: ledger.total(),
        ledger,
        history: state.history().to_vec(),
        purchase_time,
        mark_time,
        grown,
    })
}

/// Reverse-delete pruning restricted to the root component of `bought`.
///
/// Vertices are visited by descending purchase time (then descending id).
/// Deleting `v` bought at time `t` also drops everything it disconnects from
/// the root; it is allowed only if no terminal among the dropped vertices
/// was unmarked at time `t` (unmarked, or marked strictly later).
pub fn prune(
    graph: &Graph,
    root: usize,
    bought: &VertexSet,
    purchase_time: &[Option<usize>],
    terminals: &VertexSet,
    mark_time: &[Option<usize>],
) -> VertexSet {
    let seen = graph.reachable_within(root, |v| bought.contains(v));
    let mut current: VertexSet = bought.iter().filter(|&v| seen[v]).collect();
    let mut order: Vec<usize> = current.iter().filter(|&v| v != root).collect();
    order.sort_by_key(|&v| std::cmp::Reverse((purchase_time[v].unwrap_or(0), v)));
    for v in order {
        if !current.contains(v) {
            continue;
        }
        let t = purchase_time[v].unwrap_or(0);
        let reach = graph.reachable_within(root, |u| u != v && current.contains(u));
        let needed = current
            .iter()
            .filter(|&u| !reach[u])
            .any(|u| terminals.contains(u) && mark_time[u].map_or(true, |m| m > t));
        if !needed {
            current = current.iter().filter(|&u| reach[u]).collect();
        }
    }
    current
}

/// CC: ledger sets that contain or touch a vertex of the solution.
pub fn is_connection_set(graph: &Graph, set: &VertexSet, solution: &VertexSet) -> bool {
    set.intersects(solution) || graph.neighbors(set).intersects(solution)
}

/// Largest vertex count for which every X ⊆ V∖{r} is enumerated when
/// checking the penalty constraints.
pub const FULL_ENUMERATION_LIMIT: usize = 16;

/// Re-derives the LMP guarantee from a finished run: dual feasibility,
/// the CC/PC split of the duals, the penalty identity, the connection-cost
/// bound, and the per-iteration neighbor counts.
pub fn audit_lmp(inst: &TreeInstance, sol: &LmpSolution) -> AuditReport {
    let mut report = AuditReport::default();
    let g = &inst.graph;
    let n = inst.vertex_count();
    let fp = &sol.solution.bought;
    let three = rational::int(3);

    report.check(
        "feasible",
        inst.is_feasible(fp),
        None,
        format!("F'={fp} connected and contains root {}", inst.root),
    );
    let recomputed = PcSolution::evaluate(inst, fp.clone());
    report.check(
        "cost-recompute",
        recomputed == sol.solution,
        None,
        format!(
            "connection={} penalty={}",
            rational::format(&recomputed.connection_cost),
            rational::format(&recomputed.penalty_cost)
        ),
    );

    // Constraint (1): Σ_{S: v∈Γ(S)} y_S ≤ w_v, and equality on bought vertices.
    let absorbed = sol.ledger.recompute_absorbed(g);
    for v in 0..n {
        report.require("vertex-dual", absorbed[v] <= inst.weight[v], None, || {
            format!(
                "vertex {v}: absorbed {} > weight {}",
                rational::format(&absorbed[v]),
                rational::format(&inst.weight[v])
            )
        });
        if fp.contains(v) && !inst.weight[v].is_zero() {
            report.require("tight-purchase", absorbed[v] == inst.weight[v], None, || {
                format!("bought vertex {v} is not tight")
            });
        }
    }
    report.summarize("vertex-dual", format!("{n} vertices within weight"));

    // Constraint (2): Σ_{S⊆X} y_S ≤ Π(X).
    for (x, _) in sol.ledger.iter() {
        let inside = sol.ledger.inside(x);
        let cap = inst.penalty_of(x.iter());
        report.require("penalty-dual", inside <= cap, None, || {
            format!("set {x}: Σy={} > Π={}", rational::format(&inside), rational::format(&cap))
        });
    }
    if n <= FULL_ENUMERATION_LIMIT {
        let others: Vec<usize> = (0..n).filter(|&v| v != inst.root).collect();
        let sets: Vec<(u64, &Rational)> = sol.ledger.iter().map(|(s, y)| (s.mask(), y)).collect();
        for bits in 1u64..(1u64 << others.len()) {
            let x: u64 = others
                .iter()
                .enumerate()
                .filter(|(i, _)| bits >> i & 1 == 1)
                .fold(0, |m, (_, &v)| m | 1 << v);
            let inside = sets
                .iter()
                .filter(|(s, _)| s & !x == 0)
                .fold(Rational::zero(), |acc, (_, y)| acc + *y);
            if inside.is_zero() {
                continue;
            }
            let cap = inst.penalty_of(VertexSet::from_mask(x).iter());
            report.require("penalty-dual", inside <= cap, None, || {
                format!("set {}: Σy={} > Π", VertexSet::from_mask(x), rational::format(&inside))
            });
        }
    }
    report.summarize("penalty-dual", "every penalty constraint holds");

    // CC / PC split.
    let mut cc_total = Rational::zero();
    let mut pc_total = Rational::zero();
    let mut weighted_cc = Rational::zero();
    for (s, y) in sol.ledger.iter() {
        if is_connection_set(g, s, fp) {
            cc_total += y;
            let touches = g.neighbors(s).intersection(fp).len() as i64;
            weighted_cc += y * rational::int(touches);
        } else {
            pc_total += y;
        }
    }
    let penalty = &sol.solution.penalty_cost;
    report.check(
        "penalty-identity",
        *penalty == pc_total,
        None,
        format!("Π(V∖F')={} Σ_PC y={}", rational::format(penalty), rational::format(&pc_total)),
    );
    let connection = &sol.solution.connection_cost;
    report.check(
        "connection-charge",
        *connection == weighted_cc,
        None,
        format!(
            "w(F')={} Σ_CC |F'∩Γ(S)|·y_S={}",
            rational::format(connection),
            rational::format(&weighted_cc)
        ),
    );
    report.check(
        "connection-bound",
        weighted_cc <= &three * &cc_total,
        None,
        format!("{} ≤ 3·{}", rational::format(&weighted_cc), rational::format(&cc_total)),
    );

    // Per-iteration checks: moats disjoint from F' do not touch it, and the
    // active moats meeting F' see at most three times as many F' neighbors.
    for rec in &sol.history {
        let mut touches = 0usize;
        let mut cc_count = 0usize;
        for s in &rec.active {
            let gamma = g.neighbors(s);
            if !s.intersects(fp) {
                report.require("outside-moat-isolated", !gamma.intersects(fp), Some(rec.iteration), || {
                    format!("moat {s} outside F' touches {}", gamma.intersection(fp))
                });
            }
            if is_connection_set(g, s, fp) {
                cc_count += 1;
                touches += gamma.intersection(fp).len();
            }
        }
        report.require("neighbor-count", touches <= 3 * cc_count, Some(rec.iteration), || {
            format!("Σ|F'∩Γ(S)|={touches} > 3·|A_i∩CC|={}", 3 * cc_count)
        });
    }
    report.summarize("outside-moat-isolated", format!("{} iterations", sol.history.len()));
    report.summarize("neighbor-count", format!("{} iterations", sol.history.len()));

    let lhs = connection + &three * penalty;
    let rhs = &three * &sol.dual_total;
    report.check(
        "lmp-bound",
        lhs <= rhs,
        None,
        format!("w(F')+3Π(V∖F')={} ≤ 3Σy={}", rational::format(&lhs), rational::format(&rhs)),
    );
    report.check(
        "dual-total",
        sol.dual_total == sol.ledger.total() && !sol.dual_total.is_negative(),
        None,
        rational::format(&sol.dual_total),
    );
    report
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

    /// r - a - t1 - b - t2 with w_a = 3, w_b = 1, π_t1 = 10, π_t2 = 3/10.
    pub(crate) fn five_path() -> TreeInstance {
        TreeInstance::new(
            path(5),
            0,
            rats(&["0", "3", "0", "1", "0"]),
            rats(&["0", "0", "10", "0", "3/10"]),
        )
        .unwrap()
    }

    #[test]
    fn cheap_penalty_is_paid() {
        let sol = solve_lmp(&path3("3")).unwrap();
        assert_eq!(sol.solution.bought, VertexSet::from([0]));
        assert_eq!(sol.solution.connection_cost, int(0));
        assert_eq!(sol.solution.penalty_cost, int(3));
        assert_eq!(sol.dual_total, int(3));
    }

    #[test]
    fn expensive_penalty_connects() {
        let sol = solve_lmp(&path3("7")).unwrap();
        assert_eq!(sol.solution.bought, VertexSet::from([0, 1, 2]));
        assert_eq!(sol.solution.connection_cost, int(5));
        assert_eq!(sol.solution.penalty_cost, int(0));
        assert_eq!(sol.dual_total, int(5));
    }

    #[test]
    fn five_path_hand_simulation() {
        let inst = five_path();
        let sol = solve_lmp(&inst).unwrap();
        let trace = sol.trace();
        assert_eq!(
            trace,
            vec![
                "i=1 ε=3/10 kind=set-tight detail=set={4}",
                "i=2 ε=2/5 kind=vertex-tight detail=v=3",
                "i=3 ε=23/10 kind=vertex-tight detail=v=1",
            ]
        );
        assert_eq!(sol.mark_time[4], Some(1));
        assert_eq!(sol.purchase_time[3], Some(2));
        assert_eq!(sol.ledger.get(&VertexSet::from([2])), ratio(7, 10));
        assert_eq!(sol.ledger.get(&VertexSet::from([4])), ratio(3, 10));
        assert_eq!(sol.ledger.get(&VertexSet::from([2, 3, 4])), ratio(23, 10));
        assert_eq!(sol.solution.bought, VertexSet::from([0, 1, 2]));
        assert_eq!(sol.solution.connection_cost, int(3));
        assert_eq!(sol.solution.penalty_cost, ratio(3, 10));
        assert_eq!(sol.dual_total, ratio(33, 10));
        // 3 + 9/10 ≤ 99/10
        let report = audit_lmp(&inst, &sol);
        assert!(report.is_ok(), "{report}");
    }

    #[test]
    fn five_path_pc_partition() {
        let inst = five_path();
        let sol = solve_lmp(&inst).unwrap();
        let pc: Vec<&VertexSet> = sol
            .ledger
            .iter()
            .filter(|(s, _)| !is_connection_set(&inst.graph, s, &sol.solution.bought))
            .map(|(s, _)| s)
            .collect();
        assert_eq!(pc, vec![&VertexSet::from([4])]);
    }

    #[test]
    fn merged_potential_matches_identity() {
        // After iteration 2 the merged moat {t1, b, t2} has P = Π − Σy = 103/10 − 1.
        let inst = five_path();
        let sol = solve_lmp(&inst).unwrap();
        let merged = VertexSet::from([2, 3, 4]);
        let before_last = ratio(7, 10) + ratio(3, 10);
        assert_eq!(inst.penalty_of(merged.iter()) - before_last, ratio(93, 10));
        // Final potential: 93/10 − 23/10.
        assert_eq!(inst.penalty_of(merged.iter()) - sol.ledger.inside(&merged), int(7));
    }

    #[test]
    fn rejects_unnormalized() {
        let inst = TreeInstance::new(path(2), 0, rats(&["0", "2"]), rats(&["0", "1"])).unwrap();
        assert_eq!(solve_lmp(&inst).unwrap_err(), LmpError::Unnormalized);
    }

    #[test]
    fn no_penalty_instance() {
        let inst = TreeInstance::new(path(3), 0, rats(&["0", "5", "2"]), vec![int(0); 3]).unwrap();
        let sol = solve_lmp(&inst).unwrap();
        assert_eq!(sol.solution.bought, VertexSet::from([0]));
        assert!(sol.history.is_empty());
        assert!(audit_lmp(&inst, &sol).is_ok());
    }

    #[test]
    fn everything_penalized() {
        // Terminals far behind expensive vertices: F' = {r}, CC empty.
        let inst = TreeInstance::new(path(3), 0, rats(&["0", "50", "0"]), rats(&["0", "0", "1"])).unwrap();
        let sol = solve_lmp(&inst).unwrap();
        assert_eq!(sol.solution.bought, VertexSet::from([0]));
        let report = audit_lmp(&inst, &sol);
        assert!(report.is_ok(), "{report}");
    }

    #[test]
    fn prune_edge_cases() {
        let g = path(3);
        let none = VertexSet::from([0]);
        assert_eq!(prune(&g, 0, &none, &[Some(0), None, None], &VertexSet::new(), &[None; 3]), none);
        // All terminals unmarked: only non-root components disappear.
        let g = Graph::new(5, [(0, 1), (1, 2), (3, 4)]).unwrap();
        let bought = VertexSet::from([0, 1, 2, 3, 4]);
        let times = [Some(0), Some(1), Some(0), Some(0), Some(2)];
        let terms = VertexSet::from([2, 3]);
        assert_eq!(prune(&g, 0, &bought, &times, &terms, &[None; 5]), VertexSet::from([0, 1, 2]));
    }

    #[test]
    fn prune_is_idempotent_on_worked_example() {
        let inst = five_path();
        let sol = solve_lmp(&inst).unwrap();
        let terms = inst.terminals();
        let again = prune(&inst.graph, 0, &sol.solution.bought, &sol.purchase_time, &terms, &sol.mark_time);
        assert_eq!(again, sol.solution.bought);
    }

    #[test]
    fn nwst_examples() {
        let inst = path3("3");
        assert_eq!(solve_nwst(&inst, &VertexSet::new()).unwrap(), VertexSet::from([0]));
        assert_eq!(solve_nwst(&inst, &VertexSet::from([2])).unwrap(), VertexSet::from([0, 1, 2]));
        // Cycle r-a-t, r-b-t: r=0, a=1, t=2, b=3.
        let g = Graph::new(4, [(0, 1), (1, 2), (0, 3), (3, 2)]).unwrap();
        let inst = TreeInstance::new(g, 0, rats(&["0", "2", "0", "3"]), vec![int(0); 4]).unwrap();
        assert_eq!(solve_nwst(&inst, &VertexSet::from([2])).unwrap(), VertexSet::from([0, 1, 2]));
    }

    #[test]
    fn nwst_unreachable() {
        let g = Graph::new(3, [(0, 1)]).unwrap();
        let inst = TreeInstance::new(g, 0, vec![int(0); 3], vec![int(0); 3]).unwrap();
        assert_eq!(solve_nwst(&inst, &VertexSet::from([2])).unwrap_err(), LmpError::Unreachable(2));
    }

    #[test]
    fn audit_catches_corrupted_dual() {
        let inst = five_path();
        let mut sol = solve_lmp(&inst).unwrap();
        let s = VertexSet::from([4]);
        sol.ledger.set(&s, int(1));
        let report = audit_lmp(&inst, &sol);
        assert!(report.failed("penalty-dual"));
        assert!(report.failed("penalty-identity"));
    }
}
