//! Primal-dual algorithm for node-weighted prize-collecting Steiner forest.
//!
//! Duals live on vertex sets; the penalty side of the dual is the family
//! constraint `Σ_{S∈𝕊} y_S ≤ f(𝕊)` for every family 𝕊 of sets, where `f(𝕊)`
//! is the total penalty of demands separated by at least one member. Growth
//! stops at the first tight vertex or tight family; a tight family marks
//! every demand it separates. Moats stay active while they separate an
//! unmarked demand.
//!
//! Two exact oracles find the next tight family. [`PatternOracle`] groups
//! families by the set of demands they separate and is fast while there are
//! few demands; [`ExhaustiveOracle`] enumerates families outright and is
//! kept as an independent cross-check.

use crate::audit::AuditReport;
use crate::graph::VertexSet;
use crate::instance::{Demand, ForestInstance};
use crate::moats::{DualLedger, EventKind, IterationRecord, MoatError, MoatState, Potential};
use crate::rational::{self, Rational};
use num_traits::{Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PcsfError {
    #[error("instance is not gadgetized (some demand endpoint has weight or is shared)")]
    NotGadgetized,
    #[error("family oracle refused: {count} candidate members exceed the cap of {cap}")]
    MemberCap { count: usize, cap: usize },
    #[error("family oracle refused: {count} demands exceed the cap of {cap}")]
    DemandCap { count: usize, cap: usize },
    #[error(transparent)]
    Moat(#[from] MoatError),
}

/// True iff exactly one endpoint of `d` lies in `s`.
pub fn separates(s: &VertexSet, d: &Demand) -> bool {
    d.separated_by(s)
}

/// Σ π over demands separated by at least one member of `family`.
pub fn f_value(family: &[VertexSet], demands: &[Demand]) -> Rational {
    demands
        .iter()
        .filter(|d| family.iter().any(|s| d.separated_by(s)))
        .fold(Rational::zero(), |acc, d| acc + &d.penalty)
}

/// A set the oracle may put in a family, with its current dual.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyCandidate {
    pub set: VertexSet,
    pub y: Rational,
    pub active: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TightFamily {
    /// Smallest uniform growth of the active moats that makes a family tight.
    pub epsilon: Rational,
    /// Union of every family that is tight after that growth.
    pub family: Vec<VertexSet>,
}

pub trait FamilyOracle {
    /// `None` when no family contains an active member.
    fn find(
        &self,
        n: usize,
        candidates: &[FamilyCandidate],
        demands: &[Demand],
    ) -> Result<Option<TightFamily>, PcsfError>;
}

fn separation_mask(set: &VertexSet, demands: &[Demand]) -> u64 {
    demands
        .iter()
        .enumerate()
        .filter(|(_, d)| d.separated_by(set))
        .fold(0, |m, (i, _)| m | 1 << i)
}

fn mask_penalty(mask: u64, demands: &[Demand]) -> Rational {
    demands
        .iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .fold(Rational::zero(), |acc, (_, d)| acc + &d.penalty)
}

/// Groups families by the exact set `U` of demands they separate. For a
/// fixed `U` the best family holds every inactive candidate separating only
/// demands of `U` plus the `a` active ones with largest dual, so the next
/// event is a minimum over `2^|D|` patterns and `a`. The tight union is the
/// union of the maximal families `M(U)` that are tight after growth.
#[derive(Debug, Clone, Copy)]
pub struct PatternOracle {
    pub demand_cap: usize,
}

impl Default for PatternOracle {
    fn default() -> Self {
        Self { demand_cap: 20 }
    }
}

impl FamilyOracle for PatternOracle {
    fn find(
        &self,
        _n: usize,
        candidates: &[FamilyCandidate],
        demands: &[Demand],
    ) -> Result<Option<TightFamily>, PcsfError> {
        if demands.len() > self.demand_cap.min(63) {
            return Err(PcsfError::DemandCap {
                count: demands.len(),
                cap: self.demand_cap,
            });
        }
        let seps: Vec<u64> = candidates.iter().map(|c| separation_mask(&c.set, demands)).collect();
        let mut patterns: BTreeMap<u64, (Rational, Vec<usize>)> = BTreeMap::new();
        for u in 1u64..(1u64 << demands.len()) {
            let members: Vec<usize> = (0..candidates.len()).filter(|&i| seps[i] & !u == 0).collect();
            let union = members.iter().fold(0u64, |m, &i| m | seps[i]);
            if union != u {
                continue;
            }
            patterns.insert(u, (mask_penalty(u, demands), members));
        }
        let mut best: Option<Rational> = None;
        for (f, members) in patterns.values() {
            let mut inactive = Rational::zero();
            let mut active: Vec<&Rational> = Vec::new();
            for &i in members {
                if candidates[i].active {
                    active.push(&candidates[i].y);
                } else {
                    inactive += &candidates[i].y;
                }
            }
            active.sort_by(|a, b| b.cmp(a));
            let mut y = inactive;
            for (a, ya) in active.iter().enumerate() {
                y += *ya;
                let eps = (f - &y) / rational::int(a as i64 + 1);
                if best.as_ref().map_or(true, |b| eps < *b) {
                    best = Some(eps);
                }
            }
        }
        let Some(epsilon) = best else {
            return Ok(None);
        };
        let mut family: BTreeSet<VertexSet> = BTreeSet::new();
        for (f, members) in patterns.values() {
            let grown = members.iter().fold(Rational::zero(), |acc, &i| {
                let c = &candidates[i];
                if c.active {
                    acc + &c.y + &epsilon
                } else {
                    acc + &c.y
                }
            });
            if grown == *f {
                family.extend(members.iter().map(|&i| candidates[i].set.clone()));
            }
        }
        Ok(Some(TightFamily {
            epsilon,
            family: family.into_iter().collect(),
        }))
    }
}

/// Enumerates every nonempty family of candidates (optionally padded with
/// all singletons `{v}` at zero dual). Refuses above `member_cap` members.
#[derive(Debug, Clone, Copy)]
pub struct ExhaustiveOracle {
    pub member_cap: usize,
    pub with_singletons: bool,
}

impl Default for ExhaustiveOracle {
    fn default() -> Self {
        Self {
            member_cap: 20,
            with_singletons: false,
        }
    }
}

impl FamilyOracle for ExhaustiveOracle {
    fn find(
        &self,
        n: usize,
        candidates: &[FamilyCandidate],
        demands: &[Demand],
    ) -> Result<Option<TightFamily>, PcsfError> {
        let mut pool: Vec<FamilyCandidate> = candidates.to_vec();
        if self.with_singletons {
            for v in 0..n {
                let s = VertexSet::singleton(v);
                if !pool.iter().any(|c| c.set == s) {
                    pool.push(FamilyCandidate {
                        set: s,
                        y: Rational::zero(),
                        active: false,
                    });
                }
            }
        }
        let m = pool.len();
        if m > self.member_cap || m > 30 {
            return Err(PcsfError::MemberCap {
                count: m,
                cap: self.member_cap,
            });
        }
        let seps: Vec<u64> = pool.iter().map(|c| separation_mask(&c.set, demands)).collect();
        let penalties: Vec<Rational> = demands.iter().map(|d| d.penalty.clone()).collect();

        // Gray-code walk keeping y(𝕊), the active count and per-demand
        // separation counts up to date.
        let walk = |visit: &mut dyn FnMut(u64, &Rational, usize, &Rational)| {
            let mut y = Rational::zero();
            let mut a = 0usize;
            let mut count = vec![0usize; demands.len()];
            let mut f = Rational::zero();
            let mut family = 0u64;
            for step in 1u64..(1u64 << m) {
                let i = step.trailing_zeros() as usize;
                let adding = family >> i & 1 == 0;
                family ^= 1 << i;
                let c = &pool[i];
                if adding {
                    y += &c.y;
                    a += usize::from(c.active);
                } else {
                    y -= &c.y;
                    a -= usize::from(c.active);
                }
                for (d, cnt) in count.iter_mut().enumerate() {
                    if seps[i] >> d & 1 == 1 {
                        if adding {
                            *cnt += 1;
                            if *cnt == 1 {
                                f += &penalties[d];
                            }
                        } else {
                            *cnt -= 1;
                            if *cnt == 0 {
                                f -= &penalties[d];
                            }
                        }
                    }
                }
                visit(family, &y, a, &f);
            }
        };

        let mut best: Option<Rational> = None;
        walk(&mut |_, y, a, f| {
            if a > 0 {
                let eps = (f - y) / rational::int(a as i64);
                if best.as_ref().map_or(true, |b| eps < *b) {
                    best = Some(eps);
                }
            }
        });
        let Some(epsilon) = best else {
            return Ok(None);
        };
        let mut union = 0u64;
        walk(&mut |family, y, a, f| {
            if y + &epsilon * rational::int(a as i64) == *f {
                union |= family;
            }
        });
        let family: BTreeSet<VertexSet> = (0..m)
            .filter(|i| union >> i & 1 == 1)
            .map(|i| pool[i].set.clone())
            .collect();
        Ok(Some(TightFamily {
            epsilon,
            family: family.into_iter().collect(),
        }))
    }
}

#[derive(Debug, Clone)]
pub struct ForestSolution {
    pub bought: VertexSet,
    /// Indices of demands not connected in `G[F']`.
    pub unserved: Vec<usize>,
    pub connection_cost: Rational,
    pub penalty_cost: Rational,
    pub ledger: DualLedger,
    pub dual_total: Rational,
    pub history: Vec<IterationRecord>,
    pub purchase_time: Vec<Option<usize>>,
    /// Iteration at which each demand was marked.
    pub marked: Vec<Option<usize>>,
    /// Every family that went tight, in order.
    pub tight_families: Vec<Vec<VertexSet>>,
    pub grown: VertexSet,
}

impl ForestSolution {
    pub fn total(&self) -> Rational {
        &self.connection_cost + &self.penalty_cost
    }

    pub fn trace(&self) -> Vec<String> {
        self.history.iter().map(ToString::to_string).collect()
    }
}

fn separates_unmarked(demands: &[Demand], marked: &[Option<usize>], s: &VertexSet) -> bool {
    demands
        .iter()
        .zip(marked)
        .any(|(d, m)| m.is_none() && d.separated_by(s))
}

fn family_label(family: &[VertexSet]) -> String {
    let parts: Vec<String> = family.iter().map(ToString::to_string).collect();
    format!("family=[{}]", parts.join(","))
}

pub fn solve_pcsf(inst: &ForestInstance, oracle: &dyn FamilyOracle) -> Result<ForestSolution, PcsfError> {
    if !inst.is_gadgetized() {
        return Err(PcsfError::NotGadgetized);
    }
    let n = inst.vertex_count();
    let demands = &inst.demands;
    let mut marked: Vec<Option<usize>> = vec![None; demands.len()];
    let free: VertexSet = (0..n).filter(|&v| inst.weight[v].is_zero()).collect();
    let mut state = {
        let marked = &marked;
        MoatState::new(
            inst.graph.clone(),
            inst.weight.clone(),
            &free,
            |_| Potential::Infinite,
            |s| separates_unmarked(demands, marked, s),
        )
    };
    let mut tight_families = Vec::new();

    while state.has_active() {
        let mut candidates: Vec<FamilyCandidate> = Vec::new();
        let active: BTreeSet<VertexSet> = state.active_moats().into_iter().map(|m| m.members.clone()).collect();
        for (set, y) in state.ledger().iter() {
            candidates.push(FamilyCandidate {
                set: set.clone(),
                y: y.clone(),
                active: active.contains(set),
            });
        }
        for set in &active {
            if state.ledger().get(set).is_zero() {
                candidates.push(FamilyCandidate {
                    set: set.clone(),
                    y: Rational::zero(),
                    active: true,
                });
            }
        }
        let tight = oracle.find(n, &candidates, demands)?;
        let event = state.next_event(tight.map(|t| (t.epsilon, t.family)))?;
        match event.kind {
            EventKind::VertexTight(v) => {
                state.begin_iteration(&event.epsilon, "vertex-tight", format!("v={v}"));
                state.apply_growth(&event.epsilon)?;
                let marked = &marked;
                state.buy_vertex(v, Potential::Infinite, |s| separates_unmarked(demands, marked, s))?;
            }
            EventKind::SetTight(family) => {
                state.begin_iteration(&event.epsilon, "family-tight", family_label(&family));
                state.apply_growth(&event.epsilon)?;
                let now = state.iteration();
                for (d, m) in demands.iter().zip(marked.iter_mut()) {
                    if m.is_none() && family.iter().any(|s| d.separated_by(s)) {
                        *m = Some(now);
                    }
                }
                tight_families.push(family);
                let marked = &marked;
                state.refresh_activity(|s| separates_unmarked(demands, marked, s));
            }
        }
        if state.iteration() > 4 * n + 4 {
            return Err(MoatError::Stalled.into());
        }
    }

    let grown = state.bought();
    let purchase_time = state.purchase_time().to_vec();
    let unmarked: Vec<&Demand> = demands.iter().zip(&marked).filter(|(_, m)| m.is_none()).map(|(d, _)| d).collect();
    let bought = prune_forest(inst, &grown, &purchase_time, &unmarked);
    let (connection_cost, penalty_cost) = inst.cost_of(&bought);
    let label = inst.graph.components_within(|v| bought.contains(v));
    let unserved = demands
        .iter()
        .enumerate()
        .filter(|(_, d)| label[d.a].is_none() || label[d.a] != label[d.b])
        .map(|(i, _)| i)
        .collect();
    let ledger = state.ledger().clone();
    Ok(ForestSolution {
        bought,
        unserved,
        connection_cost,
        penalty_cost,
        dual_total: ledger.total(),
        ledger,
        history: state.history().to_vec(),
        purchase_time,
        marked,
        tight_families,
        grown,
    })
}

fn all_connected(inst: &ForestInstance, set: &VertexSet, demands: &[&Demand]) -> bool {
    let label = inst.graph.components_within(|v| set.contains(v));
    demands
        .iter()
        .all(|d| label[d.a].is_some() && label[d.a] == label[d.b])
}

/// Visits vertices bought during growth in reverse purchase order (latest
/// first, ties by larger id) and drops each one whose removal keeps every
/// demand of `keep` connected. Zero-weight vertices bought at the start are
/// never removed, so demands that happen to be connected stay connected.
pub fn prune_forest(
    inst: &ForestInstance,
    bought: &VertexSet,
    purchase_time: &[Option<usize>],
    keep: &[&Demand],
) -> VertexSet {
    let mut current = bought.clone();
    let mut order: Vec<usize> = bought
        .iter()
        .filter(|&v| purchase_time[v].map_or(false, |t| t > 0))
        .collect();
    order.sort_by_key(|&v| std::cmp::Reverse((purchase_time[v], v)));
    for v in order {
        current.remove(v);
        if !all_connected(inst, &current, keep) {
            current.insert(v);
        }
    }
    current
}

/// Largest number of positive-dual sets for which every family is
/// enumerated when checking the family constraints; above it the check
/// groups families by the demands they separate.
pub const FAMILY_ENUMERATION_LIMIT: usize = 22;

pub fn audit_pcsf(inst: &ForestInstance, sol: &ForestSolution) -> AuditReport {
    let mut report = AuditReport::default();
    let g = &inst.graph;
    let n = inst.vertex_count();
    let demands = &inst.demands;
    let fp = &sol.bought;
    let three = rational::int(3);

    let (conn, pen) = inst.cost_of(fp);
    report.check(
        "cost-recompute",
        conn == sol.connection_cost && pen == sol.penalty_cost,
        None,
        format!("connection={} penalty={}", rational::format(&conn), rational::format(&pen)),
    );
    let label = g.components_within(|v| fp.contains(v));
    let unserved: Vec<usize> = (0..demands.len())
        .filter(|&i| label[demands[i].a].is_none() || label[demands[i].a] != label[demands[i].b])
        .collect();
    report.check("unserved-recompute", unserved == sol.unserved, None, format!("Q'={unserved:?}"));

    // Vertex constraints.
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

    // Family constraints over every family of positive-dual sets.
    let sets: Vec<(&VertexSet, &Rational)> = sol.ledger.iter().collect();
    let m = sets.len();
    let seps: Vec<u64> = sets.iter().map(|(s, _)| separation_mask(s, demands)).collect();
    if m <= FAMILY_ENUMERATION_LIMIT {
        let mut y = Rational::zero();
        let mut family = 0u64;
        let mut count = vec![0usize; demands.len()];
        let mut f = Rational::zero();
        for step in 1u64..(1u64 << m) {
            let i = step.trailing_zeros() as usize;
            let adding = family >> i & 1 == 0;
            family ^= 1 << i;
            if adding {
                y += sets[i].1;
            } else {
                y -= sets[i].1;
            }
            for (d, cnt) in count.iter_mut().enumerate() {
                if seps[i] >> d & 1 == 1 {
                    if adding {
                        *cnt += 1;
                        if *cnt == 1 {
                            f += &demands[d].penalty;
                        }
                    } else {
                        *cnt -= 1;
                        if *cnt == 0 {
                            f -= &demands[d].penalty;
                        }
                    }
                }
            }
            if y > f {
                let members: Vec<String> = (0..m).filter(|j| family >> j & 1 == 1).map(|j| sets[j].0.to_string()).collect();
                report.check(
                    "family-dual",
                    false,
                    None,
                    format!(
                        "family [{}]: Σy={} > f={}",
                        members.join(","),
                        rational::format(&y),
                        rational::format(&f)
                    ),
                );
                break;
            }
        }
        report.summarize("family-dual", format!("{} families enumerated", (1u64 << m) - 1));
    } else {
        for u in 1u64..(1u64 << demands.len()) {
            let y: Rational = (0..m).filter(|&i| seps[i] & !u == 0).map(|i| sets[i].1).sum();
            let f = mask_penalty(u, demands);
            report.require("family-dual", y <= f, None, || {
                format!("demand pattern {u:#b}: Σy={} > f={}", rational::format(&y), rational::format(&f))
            });
        }
        report.summarize("family-dual", format!("{m} sets grouped by separated demands"));
    }

    // Penalty side: unserved demands are marked, and the union of tight
    // families pays for all marked demands.
    let q_prime_marked = sol.unserved.iter().all(|&i| sol.marked[i].is_some());
    report.check("unserved-marked", q_prime_marked, None, format!("Q'={:?} ⊆ marked", sol.unserved));
    let all: BTreeSet<VertexSet> = sol.tight_families.iter().flatten().cloned().collect();
    let all: Vec<VertexSet> = all.into_iter().collect();
    let f_all = f_value(&all, demands);
    let y_all: Rational = all.iter().map(|s| sol.ledger.get(s)).sum();
    let marked_penalty: Rational = demands
        .iter()
        .zip(&sol.marked)
        .filter(|(_, m)| m.is_some())
        .map(|(d, _)| d.penalty.clone())
        .sum();
    report.check(
        "tight-union",
        y_all == f_all && marked_penalty <= f_all,
        None,
        format!(
            "π(Q)={} ≤ f(∪𝕊)={} = y(∪𝕊)={}",
            rational::format(&marked_penalty),
            rational::format(&f_all),
            rational::format(&y_all)
        ),
    );
    report.check(
        "penalty-bound",
        sol.penalty_cost <= sol.dual_total,
        None,
        format!("π(Q')={} ≤ Σy={}", rational::format(&sol.penalty_cost), rational::format(&sol.dual_total)),
    );

    // Connection side.
    let charged: Rational = sol
        .ledger
        .iter()
        .map(|(s, y)| y * rational::int(g.neighbors(s).intersection(fp).len() as i64))
        .sum();
    report.check(
        "connection-charge",
        charged == sol.connection_cost,
        None,
        format!("w(F')={} Σ|F'∩Γ(S)|·y_S={}", rational::format(&sol.connection_cost), rational::format(&charged)),
    );
    report.check(
        "connection-bound",
        sol.connection_cost <= &three * &sol.dual_total,
        None,
        format!("w(F')={} ≤ 3Σy={}", rational::format(&sol.connection_cost), rational::format(&(&three * &sol.dual_total))),
    );
    for rec in &sol.history {
        let aug = rec.bought_before.union(fp);
        let touches: usize = rec.active.iter().map(|s| g.neighbors(s).intersection(&aug).len()).sum();
        report.require("neighbor-count", touches <= 3 * rec.active.len(), Some(rec.iteration), || {
            format!("Σ|(F_j∪F')∩Γ(S)|={touches} > 3·|A_j|={}", 3 * rec.active.len())
        });
    }
    report.summarize("neighbor-count", format!("{} iterations", sol.history.len()));

    let lhs = &sol.connection_cost + &sol.penalty_cost;
    let rhs = rational::int(4) * &sol.dual_total;
    report.check(
        "forest-bound",
        lhs <= rhs,
        None,
        format!("w(F')+π(Q')={} ≤ 4Σy={}", rational::format(&lhs), rational::format(&rhs)),
    );
    report.check(
        "dual-total",
        !sol.dual_total.is_negative() && sol.dual_total == sol.ledger.total(),
        None,
        rational::format(&sol.dual_total),
    );
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::instance::rats;
    use crate::rational::{int, ratio};

    fn umv(w: &str) -> ForestInstance {
        ForestInstance::new(
            Graph::new(3, [(0, 1), (1, 2)]).unwrap(),
            rats(&["0", w, "0"]),
            vec![(0, 2, int(4))],
        )
        .unwrap()
    }

    fn demand(a: usize, b: usize, p: i64) -> Demand {
        Demand { a, b, penalty: int(p) }
    }

    #[test]
    fn separates_examples() {
        let d = demand(1, 2, 1);
        assert!(separates(&VertexSet::from([1]), &d));
        assert!(!separates(&VertexSet::from([1, 2]), &d));
        assert!(!separates(&VertexSet::new(), &d));
    }

    #[test]
    fn f_value_examples() {
        let ds = [demand(0, 1, 4)];
        assert_eq!(f_value(&[VertexSet::from([0])], &ds), int(4));
        assert_eq!(f_value(&[VertexSet::from([0]), VertexSet::from([1])], &ds), int(4));
        assert_eq!(f_value(&[], &ds), int(0));
    }

    fn singletons_active() -> Vec<FamilyCandidate> {
        [0, 2]
            .into_iter()
            .map(|v| FamilyCandidate {
                set: VertexSet::singleton(v),
                y: int(0),
                active: true,
            })
            .collect()
    }

    #[test]
    fn oracle_examples() {
        let ds = [demand(0, 2, 4)];
        let expected = TightFamily {
            epsilon: int(2),
            family: vec![VertexSet::from([0]), VertexSet::from([2])],
        };
        assert_eq!(PatternOracle::default().find(3, &singletons_active(), &ds).unwrap(), Some(expected.clone()));
        assert_eq!(ExhaustiveOracle::default().find(3, &singletons_active(), &ds).unwrap(), Some(expected));

        // Already tight single moat.
        let c = [FamilyCandidate { set: VertexSet::from([0]), y: int(4), active: true }];
        let t = PatternOracle::default().find(3, &c, &ds).unwrap().unwrap();
        assert_eq!((t.epsilon, t.family), (int(0), vec![VertexSet::from([0])]));

        assert_eq!(PatternOracle::default().find(3, &[], &[]).unwrap(), None);
        assert_eq!(ExhaustiveOracle::default().find(3, &[], &[]).unwrap(), None);
    }

    #[test]
    fn exhaustive_oracle_cap() {
        let many: Vec<FamilyCandidate> = (0..5)
            .map(|v| FamilyCandidate { set: VertexSet::singleton(v), y: int(0), active: true })
            .collect();
        let oracle = ExhaustiveOracle { member_cap: 4, with_singletons: false };
        assert_eq!(
            oracle.find(5, &many, &[demand(0, 1, 1)]),
            Err(PcsfError::MemberCap { count: 5, cap: 4 })
        );
    }

    #[test]
    fn cheap_middle_vertex_is_bought() {
        let inst = umv("3");
        let sol = solve_pcsf(&inst, &PatternOracle::default()).unwrap();
        assert_eq!(sol.trace(), vec!["i=1 ε=3/2 kind=vertex-tight detail=v=1"]);
        assert_eq!(sol.bought, VertexSet::from([0, 1, 2]));
        assert!(sol.unserved.is_empty());
        assert_eq!(sol.dual_total, int(3));
        assert_eq!(sol.total(), int(3));
        let report = audit_pcsf(&inst, &sol);
        assert!(report.is_ok(), "{report}");
    }

    #[test]
    fn expensive_middle_vertex_pays_penalty() {
        let inst = umv("5");
        let sol = solve_pcsf(&inst, &PatternOracle::default()).unwrap();
        assert_eq!(sol.trace(), vec!["i=1 ε=2 kind=family-tight detail=family=[{0},{2}]"]);
        assert_eq!(sol.bought, VertexSet::from([0, 2]));
        assert_eq!(sol.unserved, vec![0]);
        assert_eq!(sol.marked, vec![Some(1)]);
        assert_eq!(sol.dual_total, int(4));
        assert_eq!(sol.penalty_cost, int(4));
        let report = audit_pcsf(&inst, &sol);
        assert!(report.is_ok(), "{report}");
    }

    #[test]
    fn independent_paths_solve_separately() {
        // Two copies of u-m-v side by side, w_m = 3 and 5.
        let g = Graph::new(6, [(0, 1), (1, 2), (3, 4), (4, 5)]).unwrap();
        let inst = ForestInstance::new(g, rats(&["0", "3", "0", "0", "5", "0"]), vec![(0, 2, int(4)), (3, 5, int(4))]).unwrap();
        let sol = solve_pcsf(&inst, &PatternOracle::default()).unwrap();
        assert_eq!(sol.bought, VertexSet::from([0, 1, 2, 3, 5]));
        assert_eq!(sol.unserved, vec![1]);
        assert_eq!(sol.total(), int(7));
        assert!(audit_pcsf(&inst, &sol).is_ok());
    }

    #[test]
    fn no_demands() {
        let inst = ForestInstance::new(Graph::new(3, [(0, 1), (1, 2)]).unwrap(), rats(&["1", "0", "2"]), vec![]).unwrap();
        let sol = solve_pcsf(&inst, &PatternOracle::default()).unwrap();
        assert_eq!(sol.total(), int(0));
        assert!(sol.history.is_empty());
        assert!(audit_pcsf(&inst, &sol).is_ok());
    }

    #[test]
    fn rejects_ungadgetized() {
        let inst = ForestInstance::new(Graph::new(2, [(0, 1)]).unwrap(), rats(&["1", "0"]), vec![(0, 1, int(1))]).unwrap();
        assert!(matches!(solve_pcsf(&inst, &PatternOracle::default()), Err(PcsfError::NotGadgetized)));
    }

    #[test]
    fn pruning_examples() {
        let inst = umv("5");
        let bought = VertexSet::from([0, 1, 2]);
        let times = [Some(0), Some(1), Some(0)];
        // Demand marked: the middle vertex goes.
        assert_eq!(prune_forest(&inst, &bought, &times, &[]), VertexSet::from([0, 2]));
        // Demand unmarked: nothing can go.
        let keep: Vec<&Demand> = inst.demands.iter().collect();
        assert_eq!(prune_forest(&inst, &bought, &times, &keep), bought);
    }

    #[test]
    fn corrupted_dual_breaks_family_constraint() {
        let inst = umv("5");
        let mut sol = solve_pcsf(&inst, &PatternOracle::default()).unwrap();
        let s = VertexSet::from([0]);
        let y = sol.ledger.get(&s) + int(1);
        sol.ledger.set(&s, y);
        let report = audit_pcsf(&inst, &sol);
        assert!(report.failed("family-dual"), "{report}");
    }

    #[test]
    fn pattern_matches_exhaustive_with_inactive_members() {
        let ds = [demand(0, 3, 5), demand(1, 4, 2)];
        let c = vec![
            FamilyCandidate { set: VertexSet::from([0]), y: ratio(1, 2), active: false },
            FamilyCandidate { set: VertexSet::from([1]), y: int(1), active: true },
            FamilyCandidate { set: VertexSet::from([0, 1]), y: int(1), active: true },
            FamilyCandidate { set: VertexSet::from([3]), y: int(0), active: true },
        ];
        let p = PatternOracle::default().find(5, &c, &ds).unwrap();
        let e = ExhaustiveOracle::default().find(5, &c, &ds).unwrap();
        assert_eq!(p, e);
        let s = ExhaustiveOracle { member_cap: 20, with_singletons: true }.find(5, &c, &ds).unwrap();
        assert_eq!(p.unwrap().epsilon, s.unwrap().epsilon);
    }
}
