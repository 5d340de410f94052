use crate::report::{rat_cells, Table};
use crate::solve::{self, Algo, Options, Outcome};
use crate::Failure;
use nwpc_core::generate::{generate_forest, generate_tree, GeneratorConfig, GraphKind};
use nwpc_core::io::{write_forest, write_tree};
use nwpc_core::rational::{self, Rational};
use num_traits::Zero;
use std::path::{Path, PathBuf};

pub struct BenchArgs {
    pub kind: GraphKind,
    pub n: usize,
    pub count: usize,
    pub algo: Algo,
    pub seed: u64,
    pub demands: usize,
    pub witness_dir: PathBuf,
}

/// Factor every instance must meet against the exact optimum.
fn bound(algo: Algo, opts: &Options) -> Rational {
    match algo {
        Algo::Lmp | Algo::Nwst => rational::int(3),
        Algo::Pcsf => rational::int(4),
        Algo::Combine => {
            let g = rational::int(1) + &opts.epsilon;
            rational::int(3) * &g * &g
        }
    }
}

fn check(algo: Algo, out: &Outcome, factor: &Rational) -> Result<(), String> {
    if let Some(v) = out.audit.violations().next() {
        return Err(format!("audit {}: {}", v.name, v.detail));
    }
    let Some(opt) = &out.opt else {
        return Err("exact optimum unavailable (raise --oracle-cap)".into());
    };
    if let (Algo::Lmp | Algo::Pcsf, Some(dual)) = (algo, &out.dual) {
        if dual > opt {
            return Err(format!("dual {} exceeds OPT {}", rational::format(dual), rational::format(opt)));
        }
    }
    if out.total() > factor * opt {
        return Err(format!(
            "cost {} exceeds {}·OPT = {}",
            rational::format(&out.total()),
            rational::format(factor),
            rational::format(&(factor * opt))
        ));
    }
    Ok(())
}

fn witness_path(dir: &Path, args: &BenchArgs, seed: u64) -> PathBuf {
    dir.join(format!("witness-{}-{}-n{}-seed{}.nwpc", args.algo.name(), args.kind, args.n, seed))
}

/// Runs `count` seeded instances (seeds `seed..seed+count`) in order and
/// stops at the first bound violation, dumping that instance.
pub fn run(args: &BenchArgs, opts: &Options) -> Result<Vec<Table>, Failure> {
    if args.algo == Algo::Nwst {
        return Err(Failure::Input(anyhow::anyhow!("bench supports lmp, combine and pcsf")));
    }
    let factor = bound(args.algo, opts);
    let mut rows = Table::new("instances", &["id", "seed", "total", "total~", "opt", "opt~", "ratio", "ratio~"]);
    let mut ratio_sum = Rational::zero();
    let mut ratio_max: Option<Rational> = None;
    for id in 0..args.count {
        let seed = args.seed + id as u64;
        let mut cfg = GeneratorConfig::new(args.kind, args.n, seed);
        cfg.demands = args.demands;
        let (text, out) = if args.algo == Algo::Pcsf {
            let inst = generate_forest(&cfg).map_err(|e| Failure::Input(e.into()))?;
            (write_forest(&inst), solve::run_pcsf(&inst, opts)?)
        } else {
            let inst = generate_tree(&cfg).map_err(|e| Failure::Input(e.into()))?;
            let out = if args.algo == Algo::Lmp {
                solve::run_lmp(&inst, opts)?
            } else {
                solve::run_combine(&inst, opts)?
            };
            (write_tree(&inst), out)
        };
        if let Err(why) = check(args.algo, &out, &factor) {
            let path = witness_path(&args.witness_dir, args, seed);
            std::fs::write(&path, text).map_err(|e| Failure::Other(e.into()))?;
            return Err(Failure::Violation(format!(
                "instance {id} (seed {seed}): {why}; witness written to {}",
                path.display()
            )));
        }
        let ratio = out.ratio().expect("checked above");
        let mut row = vec![id.to_string(), seed.to_string()];
        row.extend(rat_cells(&out.total()));
        row.extend(rat_cells(out.opt.as_ref().expect("checked above")));
        row.extend(rat_cells(&ratio));
        rows.push(row);
        ratio_sum += &ratio;
        if ratio_max.as_ref().map_or(true, |m| ratio > *m) {
            ratio_max = Some(ratio);
        }
    }
    let mut summary = Table::new(
        "summary",
        &["algo", "kind", "n", "count", "bound", "max_ratio", "max_ratio~", "mean_ratio", "mean_ratio~"],
    );
    if let Some(max) = ratio_max {
        let mean = ratio_sum / rational::int(args.count as i64);
        let mut row = vec![
            args.algo.name().to_string(),
            args.kind.to_string(),
            args.n.to_string(),
            args.count.to_string(),
            rational::format(&factor),
        ];
        row.extend(rat_cells(&max));
        row.extend(rat_cells(&mean));
        summary.push(row);
    }
    Ok(vec![summary, rows])
}
