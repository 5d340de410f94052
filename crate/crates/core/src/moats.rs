//! Moat-growing engine shared by the tree and forest primal-dual solvers.
//!
//! A moat is a connected component of the subgraph induced by the bought
//! vertices. Every iteration grows the dual variable of *all* active moats
//! by the same amount ε, chosen so that the first constraint to become tight
//! is exactly tight: either a vertex whose absorbed dual reaches its weight
//! (it is then bought and moats merge) or a set/family constraint supplied
//! by the caller. Time is the iteration index, so the growth speed is not
//! uniform across iterations.

use crate::graph::{Graph, VertexSet};
use crate::rational::{self, Rational};
use crate::union_find::UnionFind;
use num_traits::{Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MoatError {
    #[error("no active moat")]
    NoActiveMoat,
    #[error("negative growth {0}")]
    NegativeGrowth(String),
    #[error("growth drives the potential of {0} negative")]
    NegativePotential(VertexSet),
    #[error("growth overshoots the weight of vertex {0}")]
    Overshoot(usize),
    #[error("vertex {0} is not tight")]
    NotTight(usize),
    #[error("vertex {0} is already bought")]
    AlreadyBought(usize),
    #[error("moat {0} has nonzero potential")]
    PotentialNonzero(VertexSet),
    #[error("moat {0} is already inactive")]
    AlreadyInactive(VertexSet),
    #[error("no growth event is reachable: an active moat can never become tight")]
    Stalled,
}

/// Remaining penalty budget of a moat. `Infinite` marks moats that must be
/// connected no matter what; they never go tight on their own.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Potential {
    Finite(Rational),
    Infinite,
}

impl Potential {
    fn add(&self, other: &Potential) -> Potential {
        match (self, other) {
            (Potential::Finite(a), Potential::Finite(b)) => Potential::Finite(a + b),
            _ => Potential::Infinite,
        }
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Potential::Finite(p) => Some(p),
            Potential::Infinite => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Moat {
    pub members: VertexSet,
    pub active: bool,
    pub potential: Potential,
}

/// Accumulated dual values y_S, keyed by the moat snapshot they were grown on.
#[derive(Debug, Clone, Default)]
pub struct DualLedger {
    entries: BTreeMap<VertexSet, Rational>,
    absorbed: Vec<Rational>,
}

impl DualLedger {
    pub fn new(n: usize) -> Self {
        Self {
            entries: BTreeMap::new(),
            absorbed: vec![Rational::zero(); n],
        }
    }

    pub fn add(&mut self, set: &VertexSet, amount: &Rational) {
        *self
            .entries
            .entry(set.clone())
            .or_insert_with(Rational::zero) += amount;
    }

    pub fn get(&self, set: &VertexSet) -> Rational {
        self.entries.get(set).cloned().unwrap_or_default()
    }

    /// Sets with positive dual, in sorted order.
    pub fn iter(&self) -> impl Iterator<Item = (&VertexSet, &Rational)> {
        self.entries.iter().filter(|(_, y)| y.is_positive())
    }

    pub fn len(&self) -> usize {
        self.iter().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn total(&self) -> Rational {
        rational::sum(self.entries.values())
    }

    /// Running tally of Σ_{S: v ∈ Γ(S)} y_S for vertices that were unbought
    /// while the duals grew.
    pub fn absorbed(&self, v: usize) -> &Rational {
        &self.absorbed[v]
    }

    /// Σ_{S: v ∈ Γ(S)} y_S recomputed from the entries.
    pub fn recompute_absorbed(&self, graph: &Graph) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); graph.vertex_count()];
        for (set, y) in self.iter() {
            for v in graph.neighbors(set).iter() {
                out[v] += y;
            }
        }
        out
    }

    /// Σ_{S ⊆ X} y_S.
    pub fn inside(&self, x: &VertexSet) -> Rational {
        self.iter()
            .filter(|(s, _)| s.is_subset(x))
            .fold(Rational::zero(), |acc, (_, y)| acc + y)
    }

    /// Test and fault-injection hook.
    pub fn set(&mut self, set: &VertexSet, value: Rational) {
        self.entries.insert(set.clone(), value);
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventKind<S> {
    VertexTight(usize),
    SetTight(S),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event<S> {
    pub epsilon: Rational,
    pub kind: EventKind<S>,
}

/// Snapshot taken at the start of each growth iteration, kept for audits.
#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub iteration: usize,
    pub epsilon: Rational,
    /// A_i: the active moats grown in this iteration.
    pub active: Vec<VertexSet>,
    /// F_i: everything bought before this iteration.
    pub bought_before: VertexSet,
    pub kind: String,
    pub detail: String,
}

impl fmt::Display for IterationRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "i={} ε={} kind={} detail={}",
            self.iteration,
            rational::format(&self.epsilon),
            self.kind,
            self.detail
        )
    }
}

#[derive(Debug, Clone)]
pub struct MoatState {
    graph: Graph,
    weights: Vec<Rational>,
    uf: UnionFind,
    moats: BTreeMap<usize, Moat>,
    purchase_time: Vec<Option<usize>>,
    iteration: usize,
    ledger: DualLedger,
    history: Vec<IterationRecord>,
}

impl MoatState {
    /// Buys `initial` at time 0 and forms one moat per component of the
    /// induced subgraph.
    pub fn new(
        graph: Graph,
        weights: Vec<Rational>,
        initial: &VertexSet,
        potential_of: impl Fn(&VertexSet) -> Potential,
        active_of: impl Fn(&VertexSet) -> bool,
    ) -> Self {
        let n = graph.vertex_count();
        let mut uf = UnionFind::new(n);
        let mut purchase_time = vec![None; n];
        for v in initial.iter() {
            purchase_time[v] = Some(0);
            for &u in graph.neighbors_of(v) {
                if initial.contains(u) {
                    uf.union(u, v);
                }
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for v in initial.iter() {
            groups.entry(uf.find(v)).or_default().push(v);
        }
        let moats = groups
            .into_iter()
            .map(|(rep, members)| {
                let members = VertexSet::from(members);
                let moat = Moat {
                    potential: potential_of(&members),
                    active: active_of(&members),
                    members,
                };
                (rep, moat)
            })
            .collect();
        Self {
            ledger: DualLedger::new(n),
            graph,
            weights,
            uf,
            moats,
            purchase_time,
            iteration: 0,
            history: Vec::new(),
        }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn ledger(&self) -> &DualLedger {
        &self.ledger
    }

    pub fn ledger_mut(&mut self) -> &mut DualLedger {
        &mut self.ledger
    }

    pub fn history(&self) -> &[IterationRecord] {
        &self.history
    }

    pub fn purchase_time(&self) -> &[Option<usize>] {
        &self.purchase_time
    }

    pub fn is_bought(&self, v: usize) -> bool {
        self.purchase_time[v].is_some()
    }

    pub fn bought(&self) -> VertexSet {
        (0..self.graph.vertex_count())
            .filter(|&v| self.is_bought(v))
            .collect()
    }

    /// Moats ordered by smallest member.
    pub fn moats(&self) -> Vec<&Moat> {
        let mut out: Vec<&Moat> = self.moats.values().collect();
        out.sort_by_key(|m| m.members.first());
        out
    }

    pub fn active_moats(&self) -> Vec<&Moat> {
        self.moats().into_iter().filter(|m| m.active).collect()
    }

    pub fn has_active(&self) -> bool {
        self.moats.values().any(|m| m.active)
    }

    pub fn moat_of(&mut self, v: usize) -> Option<&Moat> {
        if !self.is_bought(v) {
            return None;
        }
        let rep = self.uf.find(v);
        self.moats.get(&rep)
    }

    /// Number of distinct active moats each unbought vertex is adjacent to.
    fn active_degree(&self) -> Vec<usize> {
        let mut degree = vec![0usize; self.graph.vertex_count()];
        for moat in self.moats.values().filter(|m| m.active) {
            for v in self.graph.neighbors(&moat.members).iter() {
                if !self.is_bought(v) {
                    degree[v] += 1;
                }
            }
        }
        degree
    }

    /// Smallest ε making some unbought vertex tight under uniform growth of
    /// all active moats; ties go to the smallest vertex id.
    pub fn vertex_event(&self) -> Option<(Rational, usize)> {
        let degree = self.active_degree();
        let mut best: Option<(Rational, usize)> = None;
        for (v, &k) in degree.iter().enumerate() {
            if k == 0 {
                continue;
            }
            let slack = &self.weights[v] - self.ledger.absorbed(v);
            let eps = slack / rational::int(k as i64);
            if best.as_ref().map_or(true, |(b, _)| eps < *b) {
                best = Some((eps, v));
            }
        }
        best
    }

    /// Smallest active-moat potential (the tree set event); ties go to the
    /// moat with the smallest member.
    pub fn potential_event(&self) -> Option<(Rational, VertexSet)> {
        let mut best: Option<(Rational, VertexSet)> = None;
        for m in self.active_moats() {
            if let Potential::Finite(p) = &m.potential {
                if best.as_ref().map_or(true, |(b, _)| p < b) {
                    best = Some((p.clone(), m.members.clone()));
                }
            }
        }
        best
    }

    /// Combines the vertex event with a caller-supplied set event; a set
    /// event wins ties.
    pub fn next_event<S>(&self, set_event: Option<(Rational, S)>) -> Result<Event<S>, MoatError> {
        if !self.has_active() {
            return Err(MoatError::NoActiveMoat);
        }
        let vertex = self.vertex_event();
        match (vertex, set_event) {
            (None, None) => Err(MoatError::Stalled),
            (Some((e1, v)), Some((e2, s))) => Ok(if e2 <= e1 {
                Event { epsilon: e2, kind: EventKind::SetTight(s) }
            } else {
                Event { epsilon: e1, kind: EventKind::VertexTight(v) }
            }),
            (Some((e1, v)), None) => Ok(Event { epsilon: e1, kind: EventKind::VertexTight(v) }),
            (None, Some((e2, s))) => Ok(Event { epsilon: e2, kind: EventKind::SetTight(s) }),
        }
    }

    /// Opens iteration i+1: records A_i and F_i.
    pub fn begin_iteration(&mut self, epsilon: &Rational, kind: &str, detail: String) {
        self.iteration += 1;
        let record = IterationRecord {
            iteration: self.iteration,
            epsilon: epsilon.clone(),
            active: self.active_moats().into_iter().map(|m| m.members.clone()).collect(),
            bought_before: self.bought(),
            kind: kind.to_string(),
            detail,
        };
        self.history.push(record);
    }

    /// Grows every active moat by ε: its ledger entry gains ε, its potential
    /// drops by ε, and each unbought vertex absorbs ε per adjacent active moat.
    pub fn apply_growth(&mut self, epsilon: &Rational) -> Result<(), MoatError> {
        if epsilon.is_negative() {
            return Err(MoatError::NegativeGrowth(rational::format(epsilon)));
        }
        if epsilon.is_zero() {
            return Ok(());
        }
        let degree = self.active_degree();
        for (v, &k) in degree.iter().enumerate() {
            if k > 0 && &(self.ledger.absorbed[v].clone() + epsilon * rational::int(k as i64)) > &self.weights[v] {
                return Err(MoatError::Overshoot(v));
            }
        }
        for m in self.moats.values().filter(|m| m.active) {
            if let Potential::Finite(p) = &m.potential {
                if p < epsilon {
                    return Err(MoatError::NegativePotential(m.members.clone()));
                }
            }
        }
        for (v, &k) in degree.iter().enumerate() {
            if k > 0 {
                self.ledger.absorbed[v] += epsilon * rational::int(k as i64);
            }
        }
        let active: Vec<usize> = self
            .moats
            .iter()
            .filter(|(_, m)| m.active)
            .map(|(&k, _)| k)
            .collect();
        for key in active {
            let moat = self.moats.get_mut(&key).expect("listed above");
            self.ledger.add(&moat.members, epsilon);
            if let Potential::Finite(p) = &mut moat.potential {
                *p -= epsilon;
            }
        }
        Ok(())
    }

    /// Buys a tight vertex at the current iteration and merges it with every
    /// adjacent moat. The merged potential is the sum of the old ones plus
    /// `own_potential`; `active_of` decides the merged moat's status.
    pub fn buy_vertex(
        &mut self,
        v: usize,
        own_potential: Potential,
        active_of: impl Fn(&VertexSet) -> bool,
    ) -> Result<VertexSet, MoatError> {
        if self.is_bought(v) {
            return Err(MoatError::AlreadyBought(v));
        }
        if self.ledger.absorbed(v) != &self.weights[v] {
            return Err(MoatError::NotTight(v));
        }
        self.purchase_time[v] = Some(self.iteration);
        let bought: Vec<usize> = self
            .graph
            .neighbors_of(v)
            .iter()
            .copied()
            .filter(|&u| self.is_bought(u))
            .collect();
        let mut reps: Vec<usize> = bought.into_iter().map(|u| self.uf.find(u)).collect();
        reps.sort_unstable();
        reps.dedup();
        let mut members = VertexSet::singleton(v);
        let mut potential = own_potential;
        for rep in &reps {
            let old = self.moats.remove(rep).expect("bought vertex has a moat");
            members = members.union(&old.members);
            potential = potential.add(&old.potential);
            self.uf.union(*rep, v);
        }
        let rep = self.uf.find(v);
        let active = active_of(&members);
        self.moats.insert(
            rep,
            Moat {
                members: members.clone(),
                active,
                potential,
            },
        );
        Ok(members)
    }

    /// Deactivates the moat containing `member`; with `require_zero` the
    /// moat's potential must be exactly 0. Returns the moat's members.
    pub fn deactivate(&mut self, member: usize, require_zero: bool) -> Result<VertexSet, MoatError> {
        let rep = self.uf.find(member);
        let moat = self.moats.get_mut(&rep).ok_or(MoatError::NoActiveMoat)?;
        if !moat.active {
            return Err(MoatError::AlreadyInactive(moat.members.clone()));
        }
        if require_zero && moat.potential != Potential::Finite(Rational::zero()) {
            return Err(MoatError::PotentialNonzero(moat.members.clone()));
        }
        moat.active = false;
        Ok(moat.members.clone())
    }

    /// Re-evaluates every moat's activity, e.g. after demands were marked.
    pub fn refresh_activity(&mut self, active_of: impl Fn(&VertexSet) -> bool) {
        for moat in self.moats.values_mut() {
            moat.active = active_of(&moat.members);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn path(n: usize) -> Graph {
        Graph::new(n, (1..n).map(|i| (i - 1, i))).unwrap()
    }

    // r - a - t with w_a = 5 and π_t as given.
    fn path3(pi: i64) -> MoatState {
        let penalty = [0, 0, pi];
        MoatState::new(
            path(3),
            vec![int(0), int(5), int(0)],
            &VertexSet::from([0, 2]),
            |s| Potential::Finite(s.iter().map(|v| int(penalty[v])).sum()),
            |s| !s.contains(0),
        )
    }

    #[test]
    fn penalty_event_beats_vertex() {
        let st = path3(3);
        let ev = st.next_event(st.potential_event()).unwrap();
        assert_eq!(ev, Event { epsilon: int(3), kind: EventKind::SetTight(VertexSet::from([2])) });
    }

    #[test]
    fn vertex_event_beats_penalty() {
        let st = path3(7);
        let ev = st.next_event(st.potential_event()).unwrap();
        assert_eq!(ev, Event { epsilon: int(5), kind: EventKind::VertexTight(1) });
    }

    #[test]
    fn tie_goes_to_set_event() {
        let st = path3(5);
        let ev = st.next_event(st.potential_event()).unwrap();
        assert_eq!(ev.kind, EventKind::SetTight(VertexSet::from([2])));
    }

    #[test]
    fn growth_is_additive_over_moats() {
        // t1 - v - t2, both terminals active.
        let mut st = MoatState::new(
            path(3),
            vec![int(0), int(4), int(0)],
            &VertexSet::from([0, 2]),
            |_| Potential::Finite(int(9)),
            |_| true,
        );
        st.apply_growth(&int(1)).unwrap();
        assert_eq!(st.ledger().absorbed(1), &int(2));
        st.apply_growth(&int(0)).unwrap();
        assert_eq!(st.ledger().absorbed(1), &int(2));
        assert!(matches!(st.apply_growth(&int(2)), Err(MoatError::Overshoot(1))));
        assert!(st.apply_growth(&int(-1)).is_err());
    }

    #[test]
    fn potential_drains_to_zero_then_deactivates() {
        let mut st = path3(3);
        st.apply_growth(&int(3)).unwrap();
        assert_eq!(st.moats()[1].potential, Potential::Finite(int(0)));
        st.deactivate(2, true).unwrap();
        assert!(!st.has_active());
        assert!(matches!(st.deactivate(2, true), Err(MoatError::AlreadyInactive(_))));
        assert!(matches!(st.next_event::<()>(None), Err(MoatError::NoActiveMoat)));
    }

    #[test]
    fn deactivate_requires_zero_potential() {
        let mut st = path3(3);
        assert!(matches!(st.deactivate(2, true), Err(MoatError::PotentialNonzero(_))));
    }

    #[test]
    fn buying_into_root_component_deactivates() {
        let mut st = path3(7);
        assert!(matches!(st.buy_vertex(1, Potential::Finite(int(0)), |s| !s.contains(0)), Err(MoatError::NotTight(1))));
        st.apply_growth(&int(5)).unwrap();
        let merged = st.buy_vertex(1, Potential::Finite(int(0)), |s| !s.contains(0)).unwrap();
        assert_eq!(merged, VertexSet::from([0, 1, 2]));
        assert!(!st.has_active());
        assert_eq!(st.ledger().get(&VertexSet::from([2])), int(5));
    }

    #[test]
    fn steiner_vertex_between_two_moats_merges_active() {
        // t1 - s - t2 with no root in sight.
        let mut st = MoatState::new(
            Graph::new(4, [(1, 2), (2, 3)]).unwrap(),
            vec![int(0), int(0), int(1), int(0)],
            &VertexSet::from([0, 1, 3]),
            |_| Potential::Finite(int(4)),
            |s| !s.contains(0),
        );
        let (eps, v) = st.vertex_event().unwrap();
        assert_eq!((eps.clone(), v), (ratio(1, 2), 2));
        st.apply_growth(&eps).unwrap();
        st.buy_vertex(2, Potential::Finite(int(0)), |s| !s.contains(0)).unwrap();
        let active = st.active_moats();
        assert_eq!(active.len(), 1);
        assert_eq!(active[0].members, VertexSet::from([1, 2, 3]));
        // Merged potential = Π - Σ y = 8 - 1.
        assert_eq!(active[0].potential, Potential::Finite(int(7)));
    }
}
