//! Seeded generators for planar-by-construction benchmark instances.

use crate::graph::Graph;
use crate::instance::{ForestInstance, TreeInstance};
use crate::rational::{ratio, Rational};
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenerateError {
    #[error("unknown graph kind `{0}` (expected grid, triangulated-grid or outerplanar-cycle)")]
    InvalidKind(String),
    #[error("need at least 2 vertices, got {0}")]
    TooSmall(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKind {
    Grid,
    TriangulatedGrid,
    OuterplanarCycle,
}

impl GraphKind {
    pub const ALL: [GraphKind; 3] = [
        GraphKind::Grid,
        GraphKind::TriangulatedGrid,
        GraphKind::OuterplanarCycle,
    ];
}

impl FromStr for GraphKind {
    type Err = GenerateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "grid" => Ok(Self::Grid),
            "triangulated-grid" => Ok(Self::TriangulatedGrid),
            "outerplanar-cycle" => Ok(Self::OuterplanarCycle),
            other => Err(GenerateError::InvalidKind(other.to_string())),
        }
    }
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Grid => "grid",
            Self::TriangulatedGrid => "triangulated-grid",
            Self::OuterplanarCycle => "outerplanar-cycle",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub kind: GraphKind,
    pub n: usize,
    pub seed: u64,
    /// Weights and penalties are drawn as `k/2` with `k` in `1..=2*weight_max`.
    pub weight_max: u32,
    /// Probability that a non-root vertex carries a penalty (tree instances).
    pub penalty_density: f64,
    /// Number of demands (forest instances).
    pub demands: usize,
}

impl GeneratorConfig {
    pub fn new(kind: GraphKind, n: usize, seed: u64) -> Self {
        Self {
            kind,
            n,
            seed,
            weight_max: 6,
            penalty_density: 0.5,
            demands: 3,
        }
    }
}

/// Builds the bare planar graph. Grids are laid out row-major with
/// `ceil(sqrt(n))` columns; the last row may be partial.
pub fn planar_graph(kind: GraphKind, n: usize, rng: &mut impl Rng) -> Result<Graph, GenerateError> {
    if n < 2 {
        return Err(GenerateError::TooSmall(n));
    }
    let mut g = Graph::empty(n);
    match kind {
        GraphKind::Grid | GraphKind::TriangulatedGrid => {
            let cols = (1..=n).find(|c| c * c >= n).unwrap();
            for v in 0..n {
                let c = v % cols;
                if c + 1 < cols && v + 1 < n {
                    g.add_edge(v, v + 1).unwrap();
                }
                if v + cols < n {
                    g.add_edge(v, v + cols).unwrap();
                }
                if kind == GraphKind::TriangulatedGrid && c + 1 < cols && v + cols + 1 < n {
                    // One diagonal per cell keeps every face a triangle.
                    g.add_edge(v, v + cols + 1).unwrap();
                }
            }
        }
        GraphKind::OuterplanarCycle => {
            for v in 0..n {
                let u = (v + 1) % n;
                if !g.has_edge(v, u) && v != u {
                    g.add_edge(v, u).unwrap();
                }
            }
            // Non-crossing chords: recursively split polygons along a chord.
            let mut polygons = vec![(0..n).collect::<Vec<_>>()];
            while let Some(poly) = polygons.pop() {
                if poly.len() < 4 || !rng.gen_bool(0.6) {
                    continue;
                }
                let i = rng.gen_range(0..poly.len());
                let span = rng.gen_range(2..=poly.len() - 2);
                let j = (i + span) % poly.len();
                let (a, b) = (i.min(j), i.max(j));
                g.add_edge(poly[a], poly[b]).unwrap();
                polygons.push(poly[a..=b].to_vec());
                let mut rest = poly[b..].to_vec();
                rest.extend_from_slice(&poly[..=a]);
                polygons.push(rest);
            }
        }
    }
    Ok(g)
}

fn draw(rng: &mut impl Rng, max: u32) -> Rational {
    ratio(rng.gen_range(1..=2 * max.max(1) as i64), 2)
}

/// Random rooted instance; vertex 0 is the root. Some terminals also carry a
/// weight, so callers normalize before solving.
pub fn generate_tree(cfg: &GeneratorConfig) -> Result<TreeInstance, GenerateError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let graph = planar_graph(cfg.kind, cfg.n, &mut rng)?;
    let mut weight = vec![Rational::zero(); cfg.n];
    let mut penalty = vec![Rational::zero(); cfg.n];
    for v in 1..cfg.n {
        if rng.gen_bool(cfg.penalty_density) {
            penalty[v] = draw(&mut rng, cfg.weight_max);
            if rng.gen_bool(0.25) {
                weight[v] = draw(&mut rng, cfg.weight_max);
            }
        } else if !rng.gen_bool(0.1) {
            weight[v] = draw(&mut rng, cfg.weight_max);
        }
    }
    Ok(TreeInstance::new(graph, 0, weight, penalty).expect("generated values are valid"))
}

pub fn generate_forest(cfg: &GeneratorConfig) -> Result<ForestInstance, GenerateError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let graph = planar_graph(cfg.kind, cfg.n, &mut rng)?;
    let weight: Vec<Rational> = (0..cfg.n)
        .map(|_| {
            if rng.gen_bool(0.2) {
                Rational::zero()
            } else {
                draw(&mut rng, cfg.weight_max)
            }
        })
        .collect();
    let mut pairs: Vec<(usize, usize)> = (0..cfg.n)
        .flat_map(|a| (a + 1..cfg.n).map(move |b| (a, b)))
        .collect();
    pairs.shuffle(&mut rng);
    let demands: Vec<_> = pairs
        .into_iter()
        .take(cfg.demands)
        .map(|(a, b)| (a, b, draw(&mut rng, 2 * cfg.weight_max)))
        .collect();
    Ok(ForestInstance::new(graph, weight, demands).expect("generated values are valid"))
}
