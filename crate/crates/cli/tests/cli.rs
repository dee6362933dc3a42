use std::path::Path;
use std::process::{Command, Output};

use aptdefense::netgraph::load_edge_list;
use aptdefense_cli::config::{NetworkModel, RunConfig, ValueSource};
use proptest::prelude::*;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_aptdefense"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// A small, fast instance on a 20-node scale-free network.
fn write_small_config(dir: &Path, extra: &str) -> std::path::PathBuf {
    let path = dir.join("run.cfg");
    let text = format!(
        "nodes = 20\nhorizon = 5\nsteps = 250\nseed = 3\noutput_dir = {}\n{extra}",
        dir.join("out").display()
    );
    std::fs::write(&path, text).unwrap();
    path
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn generate_small_world_writes_directed_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("net.txt");
    let o = run(&[
        "generate",
        "--model",
        "small-world",
        "--n",
        "100",
        "--k",
        "4",
        "--p",
        "0.2",
        "--seed",
        "7",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    let edge_lines = text.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(edge_lines, 400);
    assert_eq!(
        String::from_utf8_lossy(&o.stdout).trim(),
        "nodes 100 edges 400"
    );
}

#[test]
fn generated_scale_free_round_trips() {
    let o = run(&[
        "generate",
        "--model",
        "scale-free",
        "--n",
        "100",
        "--m",
        "2",
        "--seed",
        "7",
    ]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let net = load_edge_list(&text).unwrap();
    assert_eq!(net.n(), 100);
    assert_eq!(aptdefense::netgraph::write_edge_list(&net), text);
    assert!(net.is_weakly_connected());
}

#[test]
fn generate_rejects_odd_degree() {
    let o = run(&[
        "generate",
        "--model",
        "small-world",
        "--n",
        "10",
        "--k",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("error"));
}

#[test]
fn bad_arguments_are_input_errors() {
    assert_eq!(
        run(&["generate", "--model", "lattice"]).status.code(),
        Some(1)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn solve_without_attack_on_isolated_nodes_costs_lower_bounds() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("empty.txt"), "# nodes: 4\n").unwrap();
    let cfg = write_small_config(
        dir.path(),
        "network = edge-list\nedge_list = empty.txt\nattack = 0\n",
    );
    let o = run(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = csv_rows(&dir.path().join("out/summary.csv"));
    assert_eq!(rows[0], ["j", "loss", "cost", "iterations", "converged"]);
    let j: f64 = rows[1][0].parse().unwrap();
    // T·N·(x_lo + y_lo) = 5·4·0.2; the sweep approaches the lower bounds
    // geometrically, so allow the convergence tolerance.
    assert!((j - 4.0).abs() <= 4.0 * 1e-3, "J = {j}");
    assert_eq!(rows[1][4], "true");

    let sol = csv_rows(&dir.path().join("out/solution.csv"));
    assert_eq!(sol.len(), 252);
    assert_eq!(sol[0].len(), 1 + 4 * 4);
    assert_eq!(sol[0][1], "c_0");
    assert_eq!(sol[0][16], "lambda_3");
    let curves = csv_rows(&dir.path().join("out/curves.csv"));
    assert_eq!(curves[0], ["t", "ce", "sc"]);
    assert_eq!(curves.len(), 252);
}

#[test]
fn truncated_network_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("net.txt"), "0 1\n1 2\n2\n").unwrap();
    let cfg = write_small_config(dir.path(), "network = edge-list\nedge_list = net.txt\n");
    let o = run(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn missing_or_invalid_config_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "solve",
        "--config",
        dir.path().join("nope.cfg").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let cfg = write_small_config(dir.path(), "colour = blue\n");
    let o = run(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown key"));
    let cfg = write_small_config(dir.path(), "x_lo = 0.8\n");
    assert_eq!(
        run(&["solve", "--config", cfg.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn non_convergence_exits_two_and_still_writes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_small_config(dir.path(), "max_iters = 2\n");
    let o = run(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let rows = csv_rows(&dir.path().join("out/summary.csv"));
    assert_eq!(rows[1][4], "false");
}

#[test]
fn compare_writes_four_sorted_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_small_config(dir.path(), "network = small-world\nbase_degree = 4\n");
    let o = run(&["compare", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = csv_rows(&dir.path().join("out/compare.csv"));
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[1][0], "optimal");
    let js: Vec<f64> = rows[1..].iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(js.windows(2).all(|w| w[0] <= w[1]));
    let curves = csv_rows(&dir.path().join("out/compare_curves.csv"));
    assert_eq!(curves[0].len(), 1 + 2 * 4);
}

#[test]
fn sweep_points_and_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_small_config(dir.path(), "base_degree = 4\n");
    let o = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--scenario",
        "small-world-p",
        "--points",
        "0.1,0.2,0.3,0.4,0.5",
        "--replicates",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = csv_rows(&dir.path().join("out/sweep.csv"));
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[1][3], "0.1");

    let o = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--scenario",
        "bounds-x",
        "--points",
        "0.3:0.2,0.1:0.7",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = csv_rows(&dir.path().join("out/sweep.csv"));
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1][8], "0");
    assert!(!rows[1][10].is_empty());
    assert_eq!(rows[2][8], "1");

    let o = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--scenario",
        "everything",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown scenario"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_small_config(dir.path(), "");
    let mut outputs = Vec::new();
    for run_dir in ["a", "b"] {
        let out = dir.path().join(run_dir);
        let o = run(&[
            "solve",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        outputs.push(
            ["solution.csv", "curves.csv", "summary.csv"]
                .map(|f| std::fs::read(out.join(f)).unwrap()),
        );
    }
    assert_eq!(outputs[0], outputs[1]);
}

fn arb_config() -> impl Strategy<Value = RunConfig> {
    (
        prop_oneof![
            Just(NetworkModel::ScaleFree),
            Just(NetworkModel::ScaleFreeExponent),
            Just(NetworkModel::SmallWorld),
            Just(NetworkModel::EdgeList)
        ],
        1usize..500,
        any::<u64>(),
        1e-6f64..1.0,
        0.1f64..100.0,
        prop_oneof![
            (0.0f64..1.0).prop_map(ValueSource::Scalar),
            "[a-z]{1,8}\\.txt".prop_map(|s| ValueSource::File(s.into()))
        ],
        (0.01f64..0.5, 0.5f64..1.0),
        2.0001f64..4.0,
    )
        .prop_map(
            |(network, nodes, seed, beta, horizon, attack, (lo, hi), gamma)| RunConfig {
                network,
                edge_list: (network == NetworkModel::EdgeList).then(|| "graphs/net.txt".into()),
                nodes,
                seed,
                beta,
                horizon,
                attack,
                x_lo: lo,
                x_hi: hi,
                gamma,
                ..RunConfig::default()
            },
        )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn config_round_trips(cfg in arb_config()) {
        prop_assert_eq!(RunConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }
}
