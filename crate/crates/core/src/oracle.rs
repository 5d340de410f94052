//! Exhaustive solvers and independent checkers for small instances.

use crate::generate::{planar_graph, GraphKind};
use crate::graph::{mask_connected, mask_reach, Graph, VertexSet};
use crate::instance::{ForestInstance, TreeInstance};
use crate::lp::{Relation, RationalLp};
use crate::rational::Rational;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("instance has {n} vertices, above the oracle cap of {cap}")]
    TooLarge { n: usize, cap: usize },
}

pub const DEFAULT_TREE_CAP: usize = 18;
pub const DEFAULT_FOREST_CAP: usize = 16;
pub const DEFAULT_LPA_CAP: usize = 7;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exact {
    pub value: Rational,
    pub witness: VertexSet,
}

/// Values over a common denominator so subset sums stay in integers.
struct Scaled {
    denominator: BigInt,
}

impl Scaled {
    fn new<'a>(values: impl IntoIterator<Item = &'a Rational>) -> Self {
        let denominator = values
            .into_iter()
            .fold(BigInt::one(), |l, v| l.lcm(v.denom()));
        Self { denominator }
    }

    fn scale(&self, v: &Rational) -> BigInt {
        v.numer() * (&self.denominator / v.denom())
    }

    fn unscale(&self, v: BigInt) -> Rational {
        Rational::new(v, self.denominator.clone())
    }
}

fn check_cap(n: usize, cap: usize) -> Result<(), OracleError> {
    if n > cap || n > 63 {
        Err(OracleError::TooLarge { n, cap })
    } else {
        Ok(())
    }
}

/// Keeps the cheapest candidate; ties go to fewer vertices, then to the
/// lexicographically smaller vertex list.
fn better(cost: &BigInt, mask: u64, best: &Option<(BigInt, u64)>) -> bool {
    match best {
        None => true,
        Some((c, m)) => {
            cost < c
                || (cost == c
                    && (mask.count_ones(), VertexSet::from_mask(mask))
                        < (m.count_ones(), VertexSet::from_mask(*m)))
        }
    }
}

/// Minimum of `w(F) + Π(V∖F)` over connected `F ∋ r`, by enumeration.
pub fn exact_pcst(inst: &TreeInstance, cap: usize) -> Result<Exact, OracleError> {
    let n = inst.vertex_count();
    check_cap(n, cap)?;
    let sc = Scaled::new(inst.weight.iter().chain(&inst.penalty));
    let w: Vec<BigInt> = inst.weight.iter().map(|v| sc.scale(v)).collect();
    let p: Vec<BigInt> = inst.penalty.iter().map(|v| sc.scale(v)).collect();
    let adj = inst.graph.adjacency_masks();
    let full: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let root_bit = 1u64 << inst.root;
    let mut best: Option<(BigInt, u64)> = None;
    for mask in 0..=full {
        if mask & root_bit == 0 || !mask_connected(&adj, mask) {
            continue;
        }
        let mut cost = BigInt::zero();
        for v in 0..n {
            if mask >> v & 1 == 1 {
                cost += &w[v];
            } else {
                cost += &p[v];
            }
        }
        if better(&cost, mask, &best) {
            best = Some((cost, mask));
        }
    }
    let (cost, mask) = best.expect("{r} is always feasible");
    Ok(Exact {
        value: sc.unscale(cost),
        witness: VertexSet::from_mask(mask),
    })
}

/// Minimum of `w(F)` plus the penalties of demands not connected in `G[F]`.
pub fn exact_pcsf(inst: &ForestInstance, cap: usize) -> Result<Exact, OracleError> {
    let n = inst.vertex_count();
    check_cap(n, cap)?;
    let sc = Scaled::new(inst.weight.iter().chain(inst.demands.iter().map(|d| &d.penalty)));
    let w: Vec<BigInt> = inst.weight.iter().map(|v| sc.scale(v)).collect();
    let pi: Vec<BigInt> = inst.demands.iter().map(|d| sc.scale(&d.penalty)).collect();
    let adj = inst.graph.adjacency_masks();
    let mut best: Option<(BigInt, u64)> = None;
    for mask in 0..(1u64 << n) {
        let mut cost: BigInt = (0..n).filter(|v| mask >> v & 1 == 1).map(|v| &w[v]).sum();
        for (d, p) in inst.demands.iter().zip(&pi) {
            let served = mask >> d.a & 1 == 1 && mask_reach(&adj, mask, d.a) >> d.b & 1 == 1;
            if !served {
                cost += p;
            }
        }
        if better(&cost, mask, &best) {
            best = Some((cost, mask));
        }
    }
    let (cost, mask) = best.expect("at least the empty set is considered");
    Ok(Exact {
        value: sc.unscale(cost),
        witness: VertexSet::from_mask(mask),
    })
}

fn non_root_subsets(n: usize, root: usize) -> impl Iterator<Item = u64> {
    let others: Vec<usize> = (0..n).filter(|&v| v != root).collect();
    (1u64..(1u64 << others.len())).map(move |bits| {
        others
            .iter()
            .enumerate()
            .filter(|(i, _)| bits >> i & 1 == 1)
            .fold(0u64, |m, (_, &v)| m | 1 << v)
    })
}

fn gamma_mask(adj: &[u64], s: u64) -> u64 {
    let mut out = 0u64;
    let mut rest = s;
    while rest != 0 {
        let v = rest.trailing_zeros() as usize;
        out |= adj[v];
        rest &= rest - 1;
    }
    out & !s
}

/// The set-penalty relaxation written out in full: columns `x_v` for every
/// vertex followed by `z_X` for every nonempty `X ⊆ V∖{r}` (in the order of
/// the returned list), one covering row per nonempty `S ⊆ V∖{r}`.
pub fn enumerate_lpa(inst: &TreeInstance, cap: usize) -> Result<(RationalLp, Vec<VertexSet>), OracleError> {
    let n = inst.vertex_count();
    check_cap(n, cap)?;
    let adj = inst.graph.adjacency_masks();
    let sets: Vec<u64> = non_root_subsets(n, inst.root).collect();
    let mut lp = RationalLp::new(n + sets.len());
    lp.objective[..n].clone_from_slice(&inst.weight);
    for (i, &x) in sets.iter().enumerate() {
        lp.objective[n + i] = inst.penalty_of(VertexSet::from_mask(x).iter());
    }
    for &s in &sets {
        let mut coeffs: Vec<(usize, Rational)> = VertexSet::from_mask(gamma_mask(&adj, s))
            .iter()
            .map(|v| (v, Rational::one()))
            .collect();
        for (i, &x) in sets.iter().enumerate() {
            if s & !x == 0 {
                coeffs.push((n + i, Rational::one()));
            }
        }
        lp.add_row(coeffs, Relation::Ge, Rational::one());
    }
    Ok((lp, sets.into_iter().map(VertexSet::from_mask).collect()))
}

/// The per-vertex relaxation with every row listed (subset-minimal `Γ(S)`
/// per terminal): columns `x_v` for every vertex, then `y_u` for each
/// terminal in increasing order.
pub fn enumerate_lpb(inst: &TreeInstance, cap: usize) -> Result<RationalLp, OracleError> {
    let n = inst.vertex_count();
    check_cap(n, cap)?;
    let adj = inst.graph.adjacency_masks();
    let terminals: Vec<usize> = inst.terminals().iter().collect();
    let mut lp = RationalLp::new(n + terminals.len());
    lp.objective[..n].clone_from_slice(&inst.weight);
    for (i, &u) in terminals.iter().enumerate() {
        lp.objective[n + i] = inst.penalty[u].clone();
    }
    for (i, &u) in terminals.iter().enumerate() {
        let gammas: BTreeSet<u64> = non_root_subsets(n, inst.root)
            .filter(|s| s >> u & 1 == 1)
            .map(|s| gamma_mask(&adj, s))
            .collect();
        for &g in &gammas {
            if gammas.iter().any(|&h| h != g && h & !g == 0) {
                continue;
            }
            let mut coeffs: Vec<(usize, Rational)> =
                VertexSet::from_mask(g).iter().map(|v| (v, Rational::one())).collect();
            coeffs.push((n + i, Rational::one()));
            lp.add_row(coeffs, Relation::Ge, Rational::one());
        }
    }
    Ok(lp)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Color {
    White,
    Black,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WhiteBlackOutcome {
    Pass {
        whites: usize,
        white_black_edges: usize,
        /// Black vertices left after the delete/contract normal form.
        reduced_blacks: usize,
    },
    Fail(String),
    PreconditionUnmet(String),
}

fn is_cut_vertex(g: &Graph, v: usize) -> bool {
    let n = g.vertex_count();
    let Some(start) = (0..n).find(|&u| u != v) else {
        return false;
    };
    let seen = g.reachable_within(start, |u| u != v);
    (0..n).any(|u| u != v && !seen[u])
}

/// Checks the white/black counting bound on a planar graph in which no two
/// whites are adjacent and every black vertex is a cut vertex: at most
/// `3(|W|−1)` white–black edges, and at most `|W|−1` blacks once black–black
/// edges are deleted (common white neighbor) or contracted (otherwise).
pub fn check_white_black_bound(g: &Graph, colors: &[Color]) -> WhiteBlackOutcome {
    use WhiteBlackOutcome::*;
    let n = g.vertex_count();
    if colors.len() != n {
        return PreconditionUnmet(format!("{} colors for {n} vertices", colors.len()));
    }
    if !g.is_connected() || n == 0 {
        return PreconditionUnmet("graph is not connected".into());
    }
    if !g.planarity_screen() {
        return PreconditionUnmet("edge count exceeds 3n-6".into());
    }
    let whites = colors.iter().filter(|&&c| c == Color::White).count();
    if whites == 0 {
        return PreconditionUnmet("no white vertex".into());
    }
    if let Some((u, v)) = g
        .edges()
        .into_iter()
        .find(|&(u, v)| colors[u] == Color::White && colors[v] == Color::White)
    {
        return PreconditionUnmet(format!("white-white edge {u}-{v}"));
    }
    if let Some(b) = (0..n).find(|&b| colors[b] == Color::Black && !is_cut_vertex(g, b)) {
        return PreconditionUnmet(format!("black vertex {b} is not a cut vertex"));
    }
    let white_black_edges = g
        .edges()
        .into_iter()
        .filter(|&(u, v)| colors[u] != colors[v])
        .count();
    if white_black_edges > 3 * (whites - 1) {
        return Fail(format!("{white_black_edges} white-black edges > 3·({whites}-1)"));
    }

    let mut adj: Vec<BTreeSet<usize>> = (0..n).map(|v| g.neighbors_of(v).iter().copied().collect()).collect();
    let mut alive = vec![true; n];
    loop {
        let edge = (0..n)
            .filter(|&u| alive[u] && colors[u] == Color::Black)
            .find_map(|u| {
                adj[u]
                    .iter()
                    .find(|&&v| v > u && colors[v] == Color::Black)
                    .map(|&v| (u, v))
            });
        let Some((u, v)) = edge else { break };
        let common_white = adj[u]
            .iter()
            .any(|x| colors[*x] == Color::White && adj[v].contains(x));
        adj[u].remove(&v);
        adj[v].remove(&u);
        if !common_white {
            let moved: Vec<usize> = std::mem::take(&mut adj[v]).into_iter().collect();
            for x in moved {
                adj[x].remove(&v);
                adj[x].insert(u);
                adj[u].insert(x);
            }
            alive[v] = false;
        }
    }
    let ids: Vec<usize> = (0..n).filter(|&v| alive[v]).collect();
    let mut reduced = Graph::empty(ids.len());
    for (i, &u) in ids.iter().enumerate() {
        for &x in &adj[u] {
            let j = ids.binary_search(&x).expect("neighbors are alive");
            if i < j {
                reduced.add_edge(i, j).expect("simple by construction");
            }
        }
    }
    let reduced_colors: Vec<Color> = ids.iter().map(|&v| colors[v]).collect();
    let reduced_edges = reduced
        .edges()
        .into_iter()
        .filter(|&(a, b)| reduced_colors[a] != reduced_colors[b])
        .count();
    if reduced_edges != white_black_edges {
        return Fail(format!("normal form changed white-black edges {white_black_edges} -> {reduced_edges}"));
    }
    if let Some(b) = (0..ids.len()).find(|&b| reduced_colors[b] == Color::Black && !is_cut_vertex(&reduced, b)) {
        return Fail(format!("normal form vertex {} is no longer a cut vertex", ids[b]));
    }
    let reduced_blacks = ids.len() - whites;
    if reduced_blacks + 1 > whites {
        return Fail(format!("{reduced_blacks} blacks after normal form > {whites}-1"));
    }
    Pass {
        whites,
        white_black_edges,
        reduced_blacks,
    }
}

/// Random colored planar graph satisfying the white/black hypotheses:
/// white–white edges are dropped, the component of a white vertex is kept,
/// and a fresh white leaf is hung on every black that is not a cut vertex.
/// The flag reports whether any repair leaf was needed.
pub fn random_white_black(rng: &mut impl Rng, n: usize) -> (Graph, Vec<Color>, bool) {
    let kind = GraphKind::ALL[rng.gen_range(0..GraphKind::ALL.len())];
    let g = planar_graph(kind, n.max(2), rng).expect("n >= 2");
    let n = g.vertex_count();
    let mut colors: Vec<Color> = (0..n)
        .map(|_| if rng.gen_bool(0.5) { Color::White } else { Color::Black })
        .collect();
    let start = rng.gen_range(0..n);
    colors[start] = Color::White;
    let kept = g.reachable_within(start, |_| true);
    let mut stripped = Graph::empty(n);
    for (u, v) in g.edges() {
        if !(colors[u] == Color::White && colors[v] == Color::White) {
            stripped.add_edge(u, v).unwrap();
        }
    }
    let reach = stripped.reachable_within(start, |v| kept[v]);
    let ids: Vec<usize> = (0..n).filter(|&v| reach[v]).collect();
    let mut h = Graph::empty(ids.len());
    for (u, v) in stripped.edges() {
        if reach[u] && reach[v] {
            let (i, j) = (ids.binary_search(&u).unwrap(), ids.binary_search(&v).unwrap());
            h.add_edge(i, j).unwrap();
        }
    }
    let mut hc: Vec<Color> = ids.iter().map(|&v| colors[v]).collect();
    let mut repaired = false;
    for b in 0..hc.len() {
        if hc[b] == Color::Black && !is_cut_vertex(&h, b) {
            let leaf = h.add_vertex();
            h.add_edge(b, leaf).unwrap();
            hc.push(Color::White);
            repaired = true;
        }
    }
    (h, hc, repaired)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::rats;
    use crate::lp::solve_lp;
    use crate::rational::int;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn path(n: usize) -> Graph {
        Graph::new(n, (1..n).map(|i| (i - 1, i))).unwrap()
    }

    #[test]
    fn pcst_examples() {
        let inst = TreeInstance::new(path(3), 0, rats(&["0", "5", "0"]), rats(&["0", "0", "3"])).unwrap();
        let e = exact_pcst(&inst, DEFAULT_TREE_CAP).unwrap();
        assert_eq!((e.value, e.witness), (int(3), VertexSet::from([0])));
        let zero = TreeInstance::new(path(3), 0, rats(&["0", "5", "1"]), vec![int(0); 3]).unwrap();
        assert_eq!(exact_pcst(&zero, 18).unwrap().witness, VertexSet::from([0]));
        let g = Graph::new(3, [(0, 1)]).unwrap();
        let cut_off = TreeInstance::new(g, 0, vec![int(0); 3], rats(&["0", "0", "1000"])).unwrap();
        assert_eq!(exact_pcst(&cut_off, 18).unwrap().value, int(1000));
        assert!(matches!(exact_pcst(&inst, 2), Err(OracleError::TooLarge { n: 3, cap: 2 })));
    }

    #[test]
    fn pcsf_examples() {
        let inst = ForestInstance::new(path(3), rats(&["0", "3", "0"]), vec![(0, 2, int(4))]).unwrap();
        let e = exact_pcsf(&inst, DEFAULT_FOREST_CAP).unwrap();
        assert_eq!(e.value, int(3));
        assert_eq!(e.witness, VertexSet::from([0, 1, 2]));
        let none = ForestInstance::new(path(3), rats(&["1", "3", "1"]), vec![]).unwrap();
        assert_eq!(exact_pcsf(&none, 16).unwrap().value, int(0));
        let free = ForestInstance::new(path(3), vec![int(0); 3], vec![(0, 2, int(4))]).unwrap();
        assert_eq!(exact_pcsf(&free, 16).unwrap().value, int(0));
    }

    #[test]
    fn lpa_shape_and_value() {
        let inst = TreeInstance::new(path(3), 0, rats(&["0", "5", "0"]), rats(&["0", "0", "3"])).unwrap();
        let (lp, sets) = enumerate_lpa(&inst, DEFAULT_LPA_CAP).unwrap();
        assert_eq!(sets.len(), 3);
        assert_eq!(lp.rows.len(), 3);
        let value = solve_lp(&lp).value().cloned().unwrap();
        assert!(value <= exact_pcst(&inst, 18).unwrap().value);
        assert_eq!(value, int(3));
    }

    #[test]
    fn lpb_enumeration_keeps_minimal_rows() {
        let inst = TreeInstance::new(path(3), 0, rats(&["0", "5", "0"]), rats(&["0", "0", "7"])).unwrap();
        let lp = enumerate_lpb(&inst, 12).unwrap();
        // S={t}: x_a + y_t ≥ 1; S={a,t}: x_r + y_t ≥ 1.
        assert_eq!(lp.rows.len(), 2);
        assert_eq!(solve_lp(&lp).value().cloned(), Some(int(5)));
    }

    #[test]
    fn white_black_examples() {
        let star = Graph::new(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let colors = [Color::Black, Color::White, Color::White, Color::White];
        assert_eq!(
            check_white_black_bound(&star, &colors),
            WhiteBlackOutcome::Pass { whites: 3, white_black_edges: 3, reduced_blacks: 1 }
        );
        let ww = Graph::new(2, [(0, 1)]).unwrap();
        assert!(matches!(
            check_white_black_bound(&ww, &[Color::White, Color::White]),
            WhiteBlackOutcome::PreconditionUnmet(_)
        ));
        // W - B - B - W: the black edge has no common white, so it contracts.
        let p = path(4);
        let colors = [Color::White, Color::Black, Color::Black, Color::White];
        assert_eq!(
            check_white_black_bound(&p, &colors),
            WhiteBlackOutcome::Pass { whites: 2, white_black_edges: 2, reduced_blacks: 1 }
        );
    }

    #[test]
    fn random_white_black_satisfies_hypotheses() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..300 {
            let n = rng.gen_range(3..12);
            let (g, colors, _) = random_white_black(&mut rng, n);
            let outcome = check_white_black_bound(&g, &colors);
            assert!(matches!(outcome, WhiteBlackOutcome::Pass { .. }), "{outcome:?}");
        }
    }
}
