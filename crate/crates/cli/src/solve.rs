use crate::report::{audit_table, rat_cells, set_cell, Table};
use crate::Failure;
use anyhow::Context;
use nwpc_core::audit::AuditReport;
use nwpc_core::graph::VertexSet;
use nwpc_core::instance::{gadgetize_demands, normalize_tree, ForestInstance, TreeInstance};
use nwpc_core::io::{parse_instance, Instance};
use nwpc_core::lmp::{audit_lmp, solve_lmp, solve_nwst_full, PcSolution};
use nwpc_core::oracle::{exact_pcsf, exact_pcst, DEFAULT_FOREST_CAP, DEFAULT_TREE_CAP};
use nwpc_core::pcsf::{audit_pcsf, solve_pcsf, PatternOracle};
use nwpc_core::rational::{self, Rational};
use nwpc_core::threshold::{combine, CombineConfig};
use num_traits::Zero;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Algo {
    Lmp,
    Combine,
    Pcsf,
    Nwst,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Lmp => "lmp",
            Algo::Combine => "combine",
            Algo::Pcsf => "pcsf",
            Algo::Nwst => "nwst",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Options {
    pub epsilon: Rational,
    /// `None` uses the oracle's default cap; `Some(0)` disables it.
    pub oracle_cap: Option<usize>,
}

/// Everything one solver run produces, in the original instance's terms.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub bought: VertexSet,
    pub connection: Rational,
    pub penalty: Rational,
    /// Lower bound on OPT certified by the dual (plus any fixed root cost).
    pub dual: Option<Rational>,
    pub opt: Option<Rational>,
    pub audit: AuditReport,
    pub trace: Vec<String>,
    pub extra: Vec<Table>,
}

impl Outcome {
    pub fn total(&self) -> Rational {
        &self.connection + &self.penalty
    }

    /// `total / opt`, taken as 1 when both are zero.
    pub fn ratio(&self) -> Option<Rational> {
        let opt = self.opt.as_ref()?;
        let total = self.total();
        if opt.is_zero() {
            return total.is_zero().then(|| rational::int(1));
        }
        Some(total / opt)
    }
}

pub fn load(path: &Path) -> Result<Instance, Failure> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(Failure::Input)?;
    parse_instance(&text)
        .with_context(|| format!("cannot parse {}", path.display()))
        .map_err(Failure::Input)
}

fn tree(inst: Instance, algo: Algo) -> Result<TreeInstance, Failure> {
    match inst {
        Instance::Tree(t) => Ok(t),
        Instance::Forest(_) => Err(Failure::Input(anyhow::anyhow!("`{}` needs a tree instance", algo.name()))),
    }
}

fn forest(inst: Instance) -> Result<ForestInstance, Failure> {
    match inst {
        Instance::Forest(f) => Ok(f),
        Instance::Tree(_) => Err(Failure::Input(anyhow::anyhow!("`pcsf` needs a forest instance"))),
    }
}

fn cap(opts: &Options, default: usize) -> Option<usize> {
    match opts.oracle_cap {
        Some(0) => None,
        Some(c) => Some(c),
        None => Some(default),
    }
}

fn tree_opt(inst: &TreeInstance, opts: &Options) -> Option<Rational> {
    let cap = cap(opts, DEFAULT_TREE_CAP)?;
    exact_pcst(inst, cap).ok().map(|e| e.value)
}

pub fn run(algo: Algo, inst: Instance, opts: &Options) -> Result<Outcome, Failure> {
    match algo {
        Algo::Lmp => run_lmp(&tree(inst, algo)?, opts),
        Algo::Combine => run_combine(&tree(inst, algo)?, opts),
        Algo::Pcsf => run_pcsf(&forest(inst)?, opts),
        Algo::Nwst => run_nwst(&tree(inst, algo)?),
    }
}

fn other(e: impl std::error::Error + Send + Sync + 'static) -> Failure {
    Failure::Other(anyhow::Error::new(e))
}

pub fn run_lmp(inst: &TreeInstance, opts: &Options) -> Result<Outcome, Failure> {
    let norm = normalize_tree(inst);
    let sol = solve_lmp(&norm.instance).map_err(other)?;
    let mut audit = audit_lmp(&norm.instance, &sol);
    let result = PcSolution::evaluate(inst, norm.to_original(&sol.solution.bought));
    let dual = &norm.fixed_cost + &sol.dual_total;
    let opt = tree_opt(inst, opts);
    if let Some(opt) = &opt {
        audit.check(
            "dual-vs-opt",
            dual <= *opt,
            None,
            format!("Σy+w(r)={} ≤ OPT={}", rational::format(&dual), rational::format(opt)),
        );
        let three = rational::int(3);
        let lhs = &result.connection_cost + &three * &result.penalty_cost;
        audit.check(
            "lmp-vs-opt",
            lhs <= &three * opt,
            None,
            format!("w(F')+3π={} ≤ 3·OPT={}", rational::format(&lhs), rational::format(&(&three * opt))),
        );
    }
    Ok(Outcome {
        bought: result.bought,
        connection: result.connection_cost,
        penalty: result.penalty_cost,
        dual: Some(dual),
        opt,
        audit,
        trace: sol.trace(),
        extra: Vec::new(),
    })
}

pub fn run_combine(inst: &TreeInstance, opts: &Options) -> Result<Outcome, Failure> {
    let norm = normalize_tree(inst);
    let cfg = CombineConfig::for_factor(&rational::int(3), opts.epsilon.clone());
    let report = combine(&norm.instance, &cfg).map_err(other)?;
    let mut table = Table::new("candidates", &["index", "source", "bought", "total", "total~", "winner"]);
    let mut trace = Vec::new();
    for (i, c) in report.candidates.iter().enumerate() {
        let bought = norm.to_original(&c.solution.bought);
        let total = &norm.fixed_cost + c.solution.total();
        let [t, td] = rat_cells(&total);
        table.push(vec![
            i.to_string(),
            c.source.to_string(),
            set_cell(&bought),
            t,
            td,
            if i == report.winner { "*" } else { "" }.to_string(),
        ]);
        trace.push(format!("candidate={i} source={} total={}", c.source, rational::format(&total)));
    }
    let result = PcSolution::evaluate(inst, norm.to_original(&report.best().bought));
    let opt = tree_opt(inst, opts);
    let mut audit = AuditReport::default();
    let growth = (rational::int(1) + &opts.epsilon) * (rational::int(1) + &opts.epsilon);
    if let Some(opt) = &opt {
        let bound = &cfg.subroutine_factor * &growth * opt;
        audit.check(
            "combine-bound",
            result.total() <= bound,
            None,
            format!("cost={} ≤ c(1+ε)²·OPT={}", rational::format(&result.total()), rational::format(&bound)),
        );
    }
    let lmp_total = report.candidates[0].solution.total() + &norm.fixed_cost;
    audit.check(
        "winner-not-worse-than-lmp",
        result.total() <= lmp_total,
        None,
        format!("{} ≤ {}", rational::format(&result.total()), rational::format(&lmp_total)),
    );
    Ok(Outcome {
        bought: result.bought,
        connection: result.connection_cost,
        penalty: result.penalty_cost,
        dual: None,
        opt,
        audit,
        trace,
        extra: vec![table],
    })
}

pub fn run_pcsf(inst: &ForestInstance, opts: &Options) -> Result<Outcome, Failure> {
    let gadget = gadgetize_demands(inst);
    let sol = solve_pcsf(&gadget.instance, &PatternOracle::default()).map_err(other)?;
    let mut audit = audit_pcsf(&gadget.instance, &sol);
    let bought = gadget.to_original(&sol.bought);
    let (connection, penalty) = inst.cost_of(&bought);
    let opt = cap(opts, DEFAULT_FOREST_CAP).and_then(|c| exact_pcsf(inst, c).ok().map(|e| e.value));
    if let Some(opt) = &opt {
        let total = &connection + &penalty;
        let four = rational::int(4);
        audit.check(
            "dual-vs-opt",
            sol.dual_total <= *opt,
            None,
            format!("Σy={} ≤ OPT={}", rational::format(&sol.dual_total), rational::format(opt)),
        );
        audit.check(
            "forest-vs-opt",
            total <= &four * opt,
            None,
            format!("cost={} ≤ 4·OPT={}", rational::format(&total), rational::format(&(&four * opt))),
        );
    }
    let mut served = Table::new("demands", &["a", "b", "penalty", "penalty~", "served"]);
    let label = inst.graph.components_within(|v| bought.contains(v));
    for d in &inst.demands {
        let [p, pd] = rat_cells(&d.penalty);
        let ok = label[d.a].is_some() && label[d.a] == label[d.b];
        served.push(vec![d.a.to_string(), d.b.to_string(), p, pd, ok.to_string()]);
    }
    Ok(Outcome {
        bought,
        connection,
        penalty,
        dual: Some(sol.dual_total.clone()),
        opt,
        audit,
        trace: sol.trace(),
        extra: vec![served],
    })
}

/// Steiner tree on the root and every vertex with positive penalty.
pub fn run_nwst(inst: &TreeInstance) -> Result<Outcome, Failure> {
    let mut terminals = inst.terminals();
    terminals.insert(inst.root);
    let sol = solve_nwst_full(inst, &terminals).map_err(other)?;
    let bought = sol.solution.bought.clone();
    let connection = inst.weight_of(bought.iter());
    let reach = inst.graph.reachable_within(inst.root, |v| bought.contains(v));
    let mut audit = AuditReport::default();
    let missing: Vec<usize> = terminals.iter().filter(|&u| !reach[u]).collect();
    audit.check("terminals-connected", missing.is_empty(), None, format!("unreached={missing:?}"));
    let three = rational::int(3);
    // Terminals start inside their own moats, so their weight is never
    // charged to y; every feasible solution pays it anyway.
    let fixed = inst.weight_of(terminals.iter());
    let dual = &sol.dual_total + &fixed;
    audit.check(
        "steiner-bound",
        &connection - &fixed <= &three * &sol.dual_total,
        None,
        format!(
            "w(F)-w(Q)={} ≤ 3·Σy={}",
            rational::format(&(&connection - &fixed)),
            rational::format(&(&three * &sol.dual_total))
        ),
    );
    Ok(Outcome {
        bought,
        connection,
        penalty: Rational::zero(),
        dual: Some(dual),
        opt: None,
        audit,
        trace: sol.trace(),
        extra: Vec::new(),
    })
}

fn opt_cells(value: Option<&Rational>) -> [String; 2] {
    value.map_or_else(|| ["-".to_string(), "-".to_string()], rat_cells)
}

pub fn solution_table(algo: Algo, out: &Outcome) -> Table {
    let mut t = Table::new(
        "solution",
        &[
            "algo", "bought", "connection", "connection~", "penalty", "penalty~", "total", "total~", "dual", "dual~",
            "opt", "opt~", "ratio", "ratio~",
        ],
    );
    let mut row = vec![algo.name().to_string(), set_cell(&out.bought)];
    row.extend(rat_cells(&out.connection));
    row.extend(rat_cells(&out.penalty));
    row.extend(rat_cells(&out.total()));
    row.extend(opt_cells(out.dual.as_ref()));
    row.extend(opt_cells(out.opt.as_ref()));
    match (&out.opt, out.ratio()) {
        (Some(_), None) => row.extend(["inf".to_string(), "inf".to_string()]),
        (_, r) => row.extend(opt_cells(r.as_ref())),
    }
    t.push(row);
    t
}

pub fn tables(algo: Algo, out: &Outcome, with_audit: bool) -> Vec<Table> {
    let mut tables = vec![solution_table(algo, out)];
    tables.extend(out.extra.iter().cloned());
    if with_audit {
        tables.push(audit_table(&out.audit));
    }
    tables
}

