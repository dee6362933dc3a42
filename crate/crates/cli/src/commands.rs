//! Subcommand implementations. Each returns the process exit code on success
//! (0, or 2 when a solve did not converge) and a [`CliError`] otherwise.

use std::path::{Path, PathBuf};

use aptdefense::experiments::{
    derive_seed, run_baseline_compare, run_sweep, NetworkSource, Scenario, SweepPoint, SweepSpec,
    NETWORK_STREAM,
};
use aptdefense::netgraph::write_edge_list;

use crate::config::{NetworkModel, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

fn prepare_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn load_config(path: &Path, out: Option<PathBuf>) -> CliResult<RunConfig> {
    let mut cfg = RunConfig::load(path)?;
    if let Some(dir) = out {
        cfg.output_dir = dir;
    }
    Ok(cfg)
}

#[derive(Debug, Clone)]
pub struct GenerateArgs {
    pub model: NetworkModel,
    pub n: usize,
    pub m: usize,
    pub gamma: f64,
    pub k: usize,
    pub p: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

/// Writes the generated network as an edge list. The generator seed is
/// derived from `seed` exactly as for a run config with the same seed.
pub fn generate(args: &GenerateArgs) -> CliResult<i32> {
    let source = match args.model {
        NetworkModel::ScaleFree => NetworkSource::ScaleFree {
            n: args.n,
            m: args.m,
        },
        NetworkModel::ScaleFreeExponent => NetworkSource::ScaleFreeExponent {
            n: args.n,
            m: args.m,
            gamma: args.gamma,
        },
        NetworkModel::SmallWorld => NetworkSource::SmallWorld {
            n: args.n,
            k: args.k,
            p: args.p,
        },
        NetworkModel::EdgeList => {
            return Err(CliError::Usage("edge-list is not a generator model".into()))
        }
    };
    let net = source.build(derive_seed(args.seed, &[NETWORK_STREAM]))?;
    let text = write_edge_list(&net);
    let summary = format!("nodes {} edges {}", net.n(), net.edge_count());
    match &args.out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError::Io {
                path: path.clone(),
                source: e,
            })?;
            println!("{summary}");
        }
        None => {
            print!("{text}");
            eprintln!("{summary}");
        }
    }
    Ok(EXIT_OK)
}

/// Solves the configured instance and writes `solution.csv`, `curves.csv`
/// and `summary.csv`.
pub fn solve(config: &Path, out: Option<PathBuf>) -> CliResult<i32> {
    let cfg = load_config(config, out)?;
    let source = cfg.network_source()?;
    let inst = cfg
        .template()?
        .instantiate(source.build(cfg.network_seed())?)?;
    let report = inst.solve()?;
    prepare_dir(&cfg.output_dir)?;
    output::write_solution(&cfg.output_dir.join("solution.csv"), &report, &inst.params)?;
    output::write_curves(
        &cfg.output_dir.join("curves.csv"),
        &report.curves,
        &inst.params,
    )?;
    output::write_summary(&cfg.output_dir.join("summary.csv"), &report)?;
    println!(
        "{}: J {} (loss {}, cost {}) after {} sweeps, converged {}",
        source.label(),
        output::fmt_num(report.j_star),
        output::fmt_num(report.loss_star),
        output::fmt_num(report.cost_star),
        report.iterations,
        report.converged
    );
    Ok(if report.converged {
        EXIT_OK
    } else {
        EXIT_NOT_CONVERGED
    })
}

/// Optimal strategy against the three static baselines: `compare.csv` and
/// `compare_curves.csv`.
pub fn compare(config: &Path, out: Option<PathBuf>) -> CliResult<i32> {
    let cfg = load_config(config, out)?;
    run_compare(&cfg)
}

fn run_compare(cfg: &RunConfig) -> CliResult<i32> {
    let source = cfg.network_source()?;
    let inst = cfg
        .template()?
        .instantiate(source.build(cfg.network_seed())?)?;
    let rows = run_baseline_compare(&inst)?;
    prepare_dir(&cfg.output_dir)?;
    output::write_compare(&cfg.output_dir.join("compare.csv"), &rows)?;
    output::write_compare_curves(
        &cfg.output_dir.join("compare_curves.csv"),
        &rows,
        &inst.params,
    )?;
    for r in &rows {
        println!("{:<14} J {}", r.label, output::fmt_num(r.objective.j));
    }
    let converged = rows.iter().all(|r| r.converged != Some(false));
    Ok(if converged {
        EXIT_OK
    } else {
        EXIT_NOT_CONVERGED
    })
}

/// Parses `--points`: comma-separated numbers for topology sweeps,
/// comma-separated `lower:upper` pairs for bound sweeps.
pub fn parse_points(scenario: Scenario, text: &str) -> CliResult<Vec<SweepPoint<f64>>> {
    let bad = |tok: &str| CliError::Usage(format!("invalid sweep point '{tok}'"));
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|tok| {
            if scenario.is_bound_sweep() {
                let (lo, hi) = tok.split_once(':').ok_or_else(|| bad(tok))?;
                let lo = lo.trim().parse().map_err(|_| bad(tok))?;
                let hi = hi.trim().parse().map_err(|_| bad(tok))?;
                Ok(SweepPoint::Bounds(lo, hi))
            } else {
                tok.parse().map(SweepPoint::Value).map_err(|_| bad(tok))
            }
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct SweepArgs {
    pub config: PathBuf,
    pub scenario: String,
    pub points: Option<String>,
    pub replicates: Option<usize>,
    pub out: Option<PathBuf>,
}

/// Runs a sweep scenario and writes `sweep.csv`; `baseline-compare` runs
/// [`compare`] instead.
pub fn sweep(args: &SweepArgs) -> CliResult<i32> {
    let scenario = Scenario::parse(&args.scenario).ok_or_else(|| {
        let names: Vec<&str> = Scenario::ALL.iter().map(|s| s.name()).collect();
        CliError::Usage(format!(
            "unknown scenario '{}' (expected one of {})",
            args.scenario,
            names.join(", ")
        ))
    })?;
    let cfg = load_config(&args.config, args.out.clone())?;
    if scenario == Scenario::BaselineCompare {
        return run_compare(&cfg);
    }
    let grid = match &args.points {
        Some(text) => parse_points(scenario, text)?,
        None => scenario.default_grid(),
    };
    let network = match scenario {
        Scenario::ScaleFreeGamma => NetworkSource::ScaleFree {
            n: cfg.nodes,
            m: cfg.edges_per_node,
        },
        Scenario::SmallWorldP => NetworkSource::SmallWorld {
            n: cfg.nodes,
            k: cfg.base_degree,
            p: cfg.rewire,
        },
        _ => cfg.network_source()?,
    };
    let spec = SweepSpec {
        scenario,
        grid,
        network,
        template: cfg.template()?,
        replicates: args.replicates.unwrap_or(cfg.replicates),
        seed: cfg.seed,
    };
    let rows = run_sweep(&spec)?;
    prepare_dir(&cfg.output_dir)?;
    output::write_sweep(&cfg.output_dir.join("sweep.csv"), scenario.name(), &rows)?;
    println!("{}: {} rows", scenario.name(), rows.len());
    let converged = rows
        .iter()
        .all(|r| r.replicates() == 0 || r.converged_fraction == 1.0);
    Ok(if converged {
        EXIT_OK
    } else {
        EXIT_NOT_CONVERGED
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_parse_per_scenario() {
        assert_eq!(
            parse_points(Scenario::SmallWorldP, "0.1, 0.2,0.3").unwrap(),
            vec![
                SweepPoint::Value(0.1),
                SweepPoint::Value(0.2),
                SweepPoint::Value(0.3)
            ]
        );
        assert_eq!(
            parse_points(Scenario::BoundsX, "0.1:0.7,0.2:0.5").unwrap(),
            vec![SweepPoint::Bounds(0.1, 0.7), SweepPoint::Bounds(0.2, 0.5)]
        );
        assert!(parse_points(Scenario::BoundsY, "0.1").is_err());
        assert!(parse_points(Scenario::ScaleFreeGamma, "x").is_err());
    }
}
