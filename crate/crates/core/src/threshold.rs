//! Threshold rounding of the per-vertex relaxation and its combination with
//! the LMP algorithm run on penalties scaled by 1/3.
//!
//! For every cost window and every threshold α ≤ β among the LP penalty
//! values, the terminals with `y_u ≤ α` are connected by the Steiner-tree
//! grower and the rest pay their penalty. The LMP solution on π/3 is one more
//! candidate; the cheapest candidate wins. Picking the best is a
//! derandomization of choosing α uniformly in `[0, β]` and mixing the two
//! algorithms with probability `p`, which bounds the cost by
//! `max{3p + (1−p)(c/β)ln(1/(1−β)), p + (1−p)/β}·(1+ε)²·OPT` when the
//! Steiner subroutine has factor `c`.

use crate::graph::VertexSet;
use crate::instance::TreeInstance;
use crate::lmp::{solve_lmp, solve_nwst, LmpError, PcSolution};
use crate::lp::{window_range, LpbSolution, LpbSolver, Window};
use crate::rational::{self, Rational};
use num_traits::Zero;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CombineConfig {
    pub epsilon: Rational,
    /// Approximation factor of the Steiner-tree subroutine.
    pub subroutine_factor: Rational,
    /// Largest threshold tried.
    pub beta: Rational,
    /// Mixing probability of the analysis; not used by the algorithm itself.
    pub p: Rational,
}

impl CombineConfig {
    /// Constants optimized for a subroutine of factor `c`, rounded to six
    /// decimals (β down, p to nearest) and kept inside `(0,1)` / `[0,1]`.
    pub fn for_factor(c: &Rational, epsilon: Rational) -> Self {
        let k = optimize_constants(c);
        let scale = 1_000_000i64;
        let beta_units = ((k.beta * scale as f64).floor() as i64).clamp(1, scale - 1);
        let p_units = ((k.p * scale as f64).round() as i64).clamp(0, scale);
        Self {
            epsilon,
            subroutine_factor: c.clone(),
            beta: rational::ratio(beta_units, scale),
            p: rational::ratio(p_units, scale),
        }
    }
}

impl Default for CombineConfig {
    fn default() -> Self {
        Self::for_factor(&rational::int(3), rational::ratio(1, 10))
    }
}

/// Connects every terminal with `y_u ≤ α` using the Steiner grower and pays
/// the penalty of everything left out.
pub fn threshold_round(inst: &TreeInstance, lpb: &LpbSolution, alpha: &Rational) -> Result<PcSolution, LmpError> {
    let q = threshold_set(inst, lpb, alpha);
    let bought = solve_nwst(inst, &q)?;
    Ok(PcSolution::evaluate(inst, bought))
}

fn threshold_set(inst: &TreeInstance, lpb: &LpbSolution, alpha: &Rational) -> VertexSet {
    inst.terminals().iter().filter(|&u| lpb.y[u] <= *alpha).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CandidateSource {
    /// LMP on penalties scaled by 1/3.
    Lmp,
    /// Threshold rounding of the relaxation restricted to a cost window
    /// (`None` is the zero-cost window).
    Threshold { window: Option<i64>, alpha: Rational },
}

impl fmt::Display for CandidateSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CandidateSource::Lmp => f.write_str("lmp"),
            CandidateSource::Threshold { window, alpha } => {
                let k = window.map_or_else(|| "zero".to_string(), |k| k.to_string());
                write!(f, "threshold k={k} alpha={}", rational::format(alpha))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub source: CandidateSource,
    pub solution: PcSolution,
}

#[derive(Debug, Clone)]
pub struct CombineReport {
    pub candidates: Vec<Candidate>,
    /// Index of the first cheapest candidate.
    pub winner: usize,
    /// Dual total of the LMP run on the scaled penalties.
    pub scaled_dual: Rational,
    /// Windows whose relaxation was infeasible.
    pub infeasible_windows: Vec<Option<i64>>,
}

impl CombineReport {
    pub fn best(&self) -> &PcSolution {
        &self.candidates[self.winner].solution
    }
}

/// Best of the LMP solution on π/3 and every threshold-rounded candidate.
/// Candidates are listed LMP first, then by window and increasing α, so
/// the winner is deterministic.
pub fn combine(inst: &TreeInstance, cfg: &CombineConfig) -> Result<CombineReport, LmpError> {
    let third = rational::ratio(1, 3);
    let scaled = inst.with_penalties(inst.penalty.iter().map(|p| p * &third).collect());
    let lmp = solve_lmp(&scaled)?;
    let mut candidates = vec![Candidate {
        source: CandidateSource::Lmp,
        solution: PcSolution::evaluate(inst, lmp.solution.bought.clone()),
    }];
    let mut infeasible_windows = Vec::new();
    let mut rounded: BTreeMap<VertexSet, PcSolution> = BTreeMap::new();
    let mut solver = LpbSolver::new(inst);
    for k in window_range(inst, &cfg.epsilon) {
        let window = k.map_or(Window::Zero, |k| Window::power(k, &cfg.epsilon));
        let Some(lpb) = solver.solve(&window) else {
            infeasible_windows.push(k);
            continue;
        };
        let mut alphas: Vec<Rational> = inst
            .terminals()
            .iter()
            .map(|u| lpb.y[u].clone())
            .filter(|y| *y <= cfg.beta)
            .collect();
        alphas.push(Rational::zero());
        alphas.sort();
        alphas.dedup();
        for alpha in alphas {
            let q = threshold_set(inst, &lpb, &alpha);
            let solution = match rounded.get(&q) {
                Some(s) => s.clone(),
                None => {
                    let s = PcSolution::evaluate(inst, solve_nwst(inst, &q)?);
                    rounded.insert(q, s.clone());
                    s
                }
            };
            candidates.push(Candidate {
                source: CandidateSource::Threshold { window: k, alpha },
                solution,
            });
        }
    }
    let winner = (0..candidates.len())
        .min_by(|&a, &b| candidates[a].solution.total().cmp(&candidates[b].solution.total()).then(a.cmp(&b)))
        .expect("the LMP candidate is always present");
    Ok(CombineReport {
        candidates,
        winner,
        scaled_dual: lmp.dual_total,
        infeasible_windows,
    })
}

/// Constants of the combination and the resulting guarantee.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    pub beta: f64,
    pub p: f64,
    /// Certified upper bound on the bound's value at `(beta, p)`.
    pub ratio: f64,
}

/// The two coefficients `(3p + (1−p)(c/β)ln(1/(1−β)), p + (1−p)/β)` of
/// `w(x*)` and `π(z*)` in the expected-cost bound.
pub fn mixture_coefficients(c: f64, beta: f64, p: f64) -> (f64, f64) {
    let a = c / beta * -(-beta).ln_1p();
    (3.0 * p + (1.0 - p) * a, p + (1.0 - p) / beta)
}

/// Best `p ∈ [0,1]` for a fixed β and the bound it gives. Both coefficients
/// are linear in `p`, so the optimum sits at an end point or where they
/// cross.
fn best_mix(c: f64, beta: f64) -> (f64, f64) {
    let (a0, b0) = mixture_coefficients(c, beta, 0.0);
    let mut candidates = vec![0.0, 1.0];
    let denom = (3.0 - a0) - (1.0 - b0);
    if denom != 0.0 {
        let cross = (b0 - a0) / denom;
        if (0.0..=1.0).contains(&cross) {
            candidates.push(cross);
        }
    }
    candidates
        .into_iter()
        .map(|p| {
            let (x, y) = mixture_coefficients(c, beta, p);
            (x.max(y), p)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(v, p)| (p, v))
        .expect("nonempty")
}

fn up(x: f64, ulps: u32) -> f64 {
    (0..ulps).fold(x, |v, _| v.next_up())
}

/// Upper bound on `max` of the two coefficients at exactly `(beta, p)`,
/// rounding every operation outward.
pub fn certified_bound(c: &Rational, beta: f64, p: f64) -> f64 {
    if p == 1.0 {
        // Both coefficients collapse to 3 and 1 exactly.
        return 3.0;
    }
    let c_hi = up(rational::to_f64(c), 1);
    let log_hi = up(-(-beta).ln_1p(), 4);
    let a_hi = up(up(c_hi / beta, 1) * log_hi, 1);
    // 1 − p is exact for p ∈ [1/2, 1] (Sterbenz).
    let q_hi = if p >= 0.5 { 1.0 - p } else { up(1.0 - p, 1) };
    let conn = up(up(3.0 * p, 1) + up(q_hi * a_hi, 1), 1);
    let pen = up(p + up(q_hi * up(1.0 / beta, 1), 1), 1);
    conn.max(pen)
}

/// Minimizes the expected-cost bound over β ∈ (0,1) and p ∈ [0,1]: a grid
/// scan over β followed by golden-section refinement around the best grid
/// point. Among equal grid values the largest β is kept, since a larger β
/// only adds threshold candidates.
pub fn optimize_constants(c: &Rational) -> Constants {
    let cf = rational::to_f64(c);
    let n = 20_000;
    let mut best = (f64::INFINITY, 0usize);
    for i in 1..n {
        let (_, v) = best_mix(cf, i as f64 / n as f64);
        if v <= best.0 {
            best = (v, i);
        }
    }
    let (mut lo, mut hi) = ((best.1 - 1) as f64 / n as f64, (best.1 + 1) as f64 / n as f64);
    let value = |b: f64| best_mix(cf, b).1;
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    let (mut x1, mut x2) = (hi - golden * (hi - lo), lo + golden * (hi - lo));
    let (mut f1, mut f2) = (value(x1), value(x2));
    for _ in 0..200 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - golden * (hi - lo);
            f1 = value(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + golden * (hi - lo);
            f2 = value(x2);
        }
    }
    let grid_beta = best.1 as f64 / n as f64;
    let refined = (lo + hi) / 2.0;
    let beta = if value(refined) < best.0 { refined } else { grid_beta };
    let (p, _) = best_mix(cf, beta);
    Constants {
        beta,
        p,
        ratio: certified_bound(c, beta, p),
    }
}

/// The balanced constants for a factor-2.4 subroutine: β = 1 − e^{−5/36},
/// p = 1/(4 − 3e^{−5/36}), where both coefficients equal 4/(4 − 3e^{−5/36}).
pub fn balanced_constants_2_4() -> Constants {
    let e = (-5.0f64 / 36.0).exp();
    let beta = 1.0 - e;
    let p = 1.0 / (4.0 - 3.0 * e);
    Constants {
        beta,
        p,
        ratio: 4.0 / (4.0 - 3.0 * e),
    }
}
