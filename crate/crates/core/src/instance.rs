//! Problem instances and the cost-preserving rewrites the solvers assume.

use crate::graph::{Graph, VertexSet};
use crate::rational::{self, Rational};
use num_traits::{Signed, Zero};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InstanceError {
    #[error("vertex {0} out of range (n = {1})")]
    VertexOutOfRange(usize, usize),
    #[error("negative {what} at vertex {vertex}")]
    Negative { what: &'static str, vertex: usize },
    #[error("demand ({0}, {1}) has identical endpoints")]
    DegenerateDemand(usize, usize),
    #[error("demand ({0}, {1}) has non-positive penalty")]
    NonPositiveDemand(usize, usize),
    #[error("vector length {got} does not match vertex count {n}")]
    Length { got: usize, n: usize },
}

/// Rooted prize-collecting instance with vertex weights and penalties.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeInstance {
    pub graph: Graph,
    pub root: usize,
    pub weight: Vec<Rational>,
    pub penalty: Vec<Rational>,
}

impl TreeInstance {
    pub fn new(
        graph: Graph,
        root: usize,
        weight: Vec<Rational>,
        penalty: Vec<Rational>,
    ) -> Result<Self, InstanceError> {
        let n = graph.vertex_count();
        if root >= n {
            return Err(InstanceError::VertexOutOfRange(root, n));
        }
        for got in [weight.len(), penalty.len()] {
            if got != n {
                return Err(InstanceError::Length { got, n });
            }
        }
        check_nonnegative("weight", &weight)?;
        check_nonnegative("penalty", &penalty)?;
        Ok(Self {
            graph,
            root,
            weight,
            penalty,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn is_terminal(&self, v: usize) -> bool {
        v != self.root && self.penalty[v].is_positive()
    }

    pub fn terminals(&self) -> VertexSet {
        (0..self.vertex_count()).filter(|&v| self.is_terminal(v)).collect()
    }

    /// Normalized: the root is free, and no vertex carries both a positive
    /// weight and a positive penalty.
    pub fn is_normalized(&self) -> bool {
        self.weight[self.root].is_zero()
            && self.penalty[self.root].is_zero()
            && (0..self.vertex_count())
                .all(|v| self.weight[v].is_zero() || self.penalty[v].is_zero())
    }

    /// Π(X).
    pub fn penalty_of(&self, set: impl IntoIterator<Item = usize>) -> Rational {
        set.into_iter()
            .fold(Rational::zero(), |acc, v| acc + &self.penalty[v])
    }

    pub fn weight_of(&self, set: impl IntoIterator<Item = usize>) -> Rational {
        set.into_iter()
            .fold(Rational::zero(), |acc, v| acc + &self.weight[v])
    }

    /// Objective of buying exactly `bought`: w(F) + Π(V \ F). Connectivity
    /// is not checked here.
    pub fn cost_of(&self, bought: &VertexSet) -> (Rational, Rational) {
        let connection = self.weight_of(bought.iter());
        let penalty = self.penalty_of((0..self.vertex_count()).filter(|&v| !bought.contains(v)));
        (connection, penalty)
    }

    /// True if `bought` contains the root and induces a connected subgraph.
    pub fn is_feasible(&self, bought: &VertexSet) -> bool {
        if !bought.contains(self.root) {
            return false;
        }
        let seen = self.graph.reachable_within(self.root, |v| bought.contains(v));
        bought.iter().all(|v| seen[v])
    }

    pub fn with_penalties(&self, penalty: Vec<Rational>) -> Self {
        Self {
            penalty,
            ..self.clone()
        }
    }
}

/// Result of [`normalize_tree`]: the rewritten instance plus the map back to
/// the original vertex ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedTree {
    pub instance: TreeInstance,
    /// `origin[v]` is the original vertex that `v` stands for.
    pub origin: Vec<usize>,
    /// Weight of the original root, which every solution pays.
    pub fixed_cost: Rational,
}

impl NormalizedTree {
    pub fn to_original(&self, bought: &VertexSet) -> VertexSet {
        bought.iter().map(|v| self.origin[v]).collect()
    }
}

/// Splits every vertex with both positive weight and positive penalty into
/// a weighted vertex and a zero-weight pendant carrying the penalty. The
/// root's weight is moved into `fixed_cost` and its penalty dropped.
pub fn normalize_tree(inst: &TreeInstance) -> NormalizedTree {
    let n = inst.vertex_count();
    let mut graph = inst.graph.clone();
    let mut weight = inst.weight.clone();
    let mut penalty = inst.penalty.clone();
    let mut origin: Vec<usize> = (0..n).collect();
    let fixed_cost = std::mem::take(&mut weight[inst.root]);
    penalty[inst.root] = Rational::zero();
    for v in 0..n {
        if weight[v].is_positive() && penalty[v].is_positive() {
            let copy = graph.add_vertex();
            graph.add_edge(v, copy).expect("fresh vertex");
            weight.push(Rational::zero());
            let moved = std::mem::take(&mut penalty[v]);
            penalty.push(moved);
            origin.push(v);
        }
    }
    NormalizedTree {
        instance: TreeInstance {
            graph,
            root: inst.root,
            weight,
            penalty,
        },
        origin,
        fixed_cost,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Demand {
    pub a: usize,
    pub b: usize,
    pub penalty: Rational,
}

impl Demand {
    pub fn separated_by(&self, set: &VertexSet) -> bool {
        set.contains(self.a) != set.contains(self.b)
    }
}

/// Node-weighted prize-collecting forest instance. Demands are stored with
/// `a < b`, sorted, one entry per unordered pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForestInstance {
    pub graph: Graph,
    pub weight: Vec<Rational>,
    pub demands: Vec<Demand>,
}

impl ForestInstance {
    /// Builds an instance, merging repeated pairs by summing penalties.
    pub fn new(
        graph: Graph,
        weight: Vec<Rational>,
        demands: impl IntoIterator<Item = (usize, usize, Rational)>,
    ) -> Result<Self, InstanceError> {
        let n = graph.vertex_count();
        if weight.len() != n {
            return Err(InstanceError::Length {
                got: weight.len(),
                n,
            });
        }
        check_nonnegative("weight", &weight)?;
        let mut merged: BTreeMap<(usize, usize), Rational> = BTreeMap::new();
        for (i, j, p) in demands {
            for v in [i, j] {
                if v >= n {
                    return Err(InstanceError::VertexOutOfRange(v, n));
                }
            }
            if i == j {
                return Err(InstanceError::DegenerateDemand(i, j));
            }
            if !p.is_positive() {
                return Err(InstanceError::NonPositiveDemand(i, j));
            }
            *merged.entry((i.min(j), i.max(j))).or_insert_with(Rational::zero) += p;
        }
        Ok(Self {
            graph,
            weight,
            demands: merged
                .into_iter()
                .map(|((a, b), penalty)| Demand { a, b, penalty })
                .collect(),
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    /// True when every demand endpoint has weight 0 and lies in exactly one demand.
    pub fn is_gadgetized(&self) -> bool {
        let mut count = vec![0usize; self.vertex_count()];
        for d in &self.demands {
            count[d.a] += 1;
            count[d.b] += 1;
        }
        self.demands
            .iter()
            .flat_map(|d| [d.a, d.b])
            .all(|v| count[v] == 1 && self.weight[v].is_zero())
    }

    /// w(F) plus the penalties of demands not connected inside G[F].
    pub fn cost_of(&self, bought: &VertexSet) -> (Rational, Rational) {
        let connection = bought
            .iter()
            .fold(Rational::zero(), |acc, v| acc + &self.weight[v]);
        let label = self.graph.components_within(|v| bought.contains(v));
        let penalty = self
            .unconnected(&label)
            .fold(Rational::zero(), |acc, d| acc + &d.penalty);
        (connection, penalty)
    }

    pub fn unconnected<'a>(
        &'a self,
        label: &'a [Option<usize>],
    ) -> impl Iterator<Item = &'a Demand> + 'a {
        self.demands
            .iter()
            .filter(move |d| label[d.a].is_none() || label[d.a] != label[d.b])
    }
}

/// Result of [`gadgetize_demands`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GadgetForest {
    pub instance: ForestInstance,
    pub origin: Vec<usize>,
    /// `demand_origin[k]` is the index of the original demand that
    /// gadgetized demand `k` replaces.
    pub demand_origin: Vec<usize>,
}

impl GadgetForest {
    /// Drops the pendant vertices. A served gadget demand runs through both
    /// original endpoints, so they are already in `bought`.
    pub fn to_original(&self, bought: &VertexSet) -> VertexSet {
        bought.iter().filter(|&v| self.origin[v] == v).collect()
    }
}

/// Moves every demand onto fresh zero-weight pendant vertices. A demand
/// whose endpoints already have weight 0 and appear in no other demand is
/// kept as is.
pub fn gadgetize_demands(inst: &ForestInstance) -> GadgetForest {
    let n = inst.vertex_count();
    let mut count = vec![0usize; n];
    for d in &inst.demands {
        count[d.a] += 1;
        count[d.b] += 1;
    }
    let mut graph = inst.graph.clone();
    let mut weight = inst.weight.clone();
    let mut origin: Vec<usize> = (0..n).collect();
    let mut demands = Vec::with_capacity(inst.demands.len());
    for d in &inst.demands {
        let keep = [d.a, d.b]
            .iter()
            .all(|&v| count[v] == 1 && inst.weight[v].is_zero());
        if keep {
            demands.push((d.a, d.b, d.penalty.clone()));
            continue;
        }
        let mut attach = |v: usize| {
            let g = graph.add_vertex();
            graph.add_edge(v, g).expect("fresh vertex");
            weight.push(Rational::zero());
            origin.push(v);
            g
        };
        let ga = attach(d.a);
        let gb = attach(d.b);
        demands.push((ga, gb, d.penalty.clone()));
    }
    let instance = ForestInstance::new(graph, weight, demands).expect("gadget rewrite is valid");
    // ForestInstance::new re-sorts demands; recover which original each came from.
    let demand_origin = instance
        .demands
        .iter()
        .map(|d| {
            inst.demands
                .iter()
                .position(|o| {
                    let (x, y) = (origin[d.a], origin[d.b]);
                    (o.a, o.b) == (x.min(y), x.max(y)) && o.penalty == d.penalty
                })
                .expect("every gadget demand has an origin")
        })
        .collect();
    GadgetForest {
        instance,
        origin,
        demand_origin,
    }
}

fn check_nonnegative(what: &'static str, values: &[Rational]) -> Result<(), InstanceError> {
    match values.iter().position(|v| v.is_negative()) {
        Some(vertex) => Err(InstanceError::Negative { what, vertex }),
        None => Ok(()),
    }
}

/// Convenience for tests and examples: integer-or-fraction literals.
pub fn rats(values: &[&str]) -> Vec<Rational> {
    values
        .iter()
        .map(|s| rational::parse(s).expect("valid rational literal"))
        .collect()
}
