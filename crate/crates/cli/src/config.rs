//! Run configuration: flat `key = value` text with `#` comments.
//!
//! Every key is optional and defaults to the standard 100-node scale-free
//! setup. Unknown and repeated keys are rejected. `attack` and
//! `initial_state` take either one number (applied to every node) or a path
//! to a file of per-node values. Relative input paths are resolved against
//! the directory of the config file by [`RunConfig::load`].

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use aptdefense::control::Bounds;
use aptdefense::dynamics::ModelParams;
use aptdefense::experiments::{NetworkSource, NodeValues, ProblemTemplate, NETWORK_STREAM};
use aptdefense::fbsm::SolverConfig;
use aptdefense::netgraph::load_edge_list;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetworkModel {
    ScaleFree,
    ScaleFreeExponent,
    SmallWorld,
    EdgeList,
}

impl NetworkModel {
    const ALL: [NetworkModel; 4] = [
        NetworkModel::ScaleFree,
        NetworkModel::ScaleFreeExponent,
        NetworkModel::SmallWorld,
        NetworkModel::EdgeList,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NetworkModel::ScaleFree => "scale-free",
            NetworkModel::ScaleFreeExponent => "scale-free-exponent",
            NetworkModel::SmallWorld => "small-world",
            NetworkModel::EdgeList => "edge-list",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == s)
    }
}

/// A per-node quantity: one broadcast number or a file of values.
#[derive(Debug, Clone, PartialEq)]
pub enum ValueSource {
    Scalar(f64),
    File(PathBuf),
}

impl ValueSource {
    fn parse(v: &str) -> Self {
        match v.parse::<f64>() {
            Ok(x) => ValueSource::Scalar(x),
            Err(_) => ValueSource::File(PathBuf::from(v)),
        }
    }

    fn render(&self) -> String {
        match self {
            ValueSource::Scalar(x) => format!("{x:?}"),
            ValueSource::File(p) => p.display().to_string(),
        }
    }

    fn resolve(&self, base: &Path) -> Self {
        match self {
            ValueSource::File(p) if p.is_relative() => ValueSource::File(base.join(p)),
            other => other.clone(),
        }
    }

    pub fn load(&self) -> CliResult<NodeValues<f64>> {
        match self {
            ValueSource::Scalar(x) => Ok(NodeValues::Uniform(*x)),
            ValueSource::File(p) => {
                let text = read(p)?;
                let mut values = Vec::new();
                for (i, line) in text.lines().enumerate() {
                    let line = line.split('#').next().unwrap_or("");
                    for tok in line.split_whitespace() {
                        let v = tok.parse::<f64>().map_err(|_| CliError::Input {
                            path: p.clone(),
                            message: format!("line {}: '{tok}' is not a number", i + 1),
                        })?;
                        values.push(v);
                    }
                }
                Ok(NodeValues::PerNode(values))
            }
        }
    }
}

pub(crate) fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub network: NetworkModel,
    /// Required when `network = edge-list`.
    pub edge_list: Option<PathBuf>,
    pub nodes: usize,
    pub edges_per_node: usize,
    pub gamma: f64,
    pub base_degree: usize,
    pub rewire: f64,
    pub seed: u64,
    pub beta: f64,
    pub horizon: f64,
    pub steps: usize,
    pub attack: ValueSource,
    pub initial_state: ValueSource,
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
    pub relaxation: f64,
    pub tolerance: f64,
    pub max_iters: usize,
    pub stall_patience: usize,
    pub polish_iters: usize,
    pub replicates: usize,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let solver = SolverConfig::<f64>::default();
        Self {
            network: NetworkModel::ScaleFree,
            edge_list: None,
            nodes: 100,
            edges_per_node: 2,
            gamma: 3.0,
            base_degree: 4,
            rewire: 0.1,
            seed: 1,
            beta: 0.001,
            horizon: 20.0,
            steps: 2000,
            attack: ValueSource::Scalar(0.1),
            initial_state: ValueSource::Scalar(0.1),
            x_lo: 0.1,
            x_hi: 0.7,
            y_lo: 0.1,
            y_hi: 0.7,
            relaxation: solver.relaxation,
            tolerance: solver.tol,
            max_iters: solver.max_iters,
            stall_patience: solver.stall_patience,
            polish_iters: solver.polish_iters,
            replicates: 5,
            output_dir: PathBuf::from("."),
        }
    }
}

fn bad(line: usize, message: impl Into<String>) -> CliError {
    CliError::Config {
        line,
        message: message.into(),
    }
}

fn num<V: std::str::FromStr>(line: usize, key: &str, v: &str) -> CliResult<V> {
    v.parse()
        .map_err(|_| bad(line, format!("invalid value '{v}' for {key}")))
}

impl RunConfig {
    /// Parses config text. Paths are kept as written.
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut cfg = Self::default();
        let mut seen = std::collections::HashSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| bad(line, format!("expected 'key = value', got '{content}'")))?;
            let (key, v) = (key.trim(), value.trim());
            if v.is_empty() {
                return Err(bad(line, format!("missing value for {key}")));
            }
            match key {
                "network" => {
                    cfg.network = NetworkModel::parse(v)
                        .ok_or_else(|| bad(line, format!("unknown network model '{v}'")))?
                }
                "edge_list" => cfg.edge_list = Some(PathBuf::from(v)),
                "nodes" => cfg.nodes = num(line, key, v)?,
                "edges_per_node" => cfg.edges_per_node = num(line, key, v)?,
                "gamma" => cfg.gamma = num(line, key, v)?,
                "base_degree" => cfg.base_degree = num(line, key, v)?,
                "rewire" => cfg.rewire = num(line, key, v)?,
                "seed" => cfg.seed = num(line, key, v)?,
                "beta" => cfg.beta = num(line, key, v)?,
                "horizon" => cfg.horizon = num(line, key, v)?,
                "steps" => cfg.steps = num(line, key, v)?,
                "attack" => cfg.attack = ValueSource::parse(v),
                "initial_state" => cfg.initial_state = ValueSource::parse(v),
                "x_lo" => cfg.x_lo = num(line, key, v)?,
                "x_hi" => cfg.x_hi = num(line, key, v)?,
                "y_lo" => cfg.y_lo = num(line, key, v)?,
                "y_hi" => cfg.y_hi = num(line, key, v)?,
                "relaxation" => cfg.relaxation = num(line, key, v)?,
                "tolerance" => cfg.tolerance = num(line, key, v)?,
                "max_iters" => cfg.max_iters = num(line, key, v)?,
                "stall_patience" => cfg.stall_patience = num(line, key, v)?,
                "polish_iters" => cfg.polish_iters = num(line, key, v)?,
                "replicates" => cfg.replicates = num(line, key, v)?,
                "output_dir" => cfg.output_dir = PathBuf::from(v),
                _ => return Err(bad(line, format!("unknown key '{key}'"))),
            }
            if !seen.insert(key.to_string()) {
                return Err(bad(line, format!("duplicate key '{key}'")));
            }
        }
        if cfg.network == NetworkModel::EdgeList && cfg.edge_list.is_none() {
            return Err(bad(0, "network = edge-list requires an edge_list path"));
        }
        Ok(cfg)
    }

    /// Reads and parses a config file, resolving relative input paths
    /// against the file's directory.
    pub fn load(path: &Path) -> CliResult<Self> {
        let mut cfg = Self::parse(&read(path)?).map_err(|e| match e {
            CliError::Config { line, message } => CliError::Input {
                path: path.to_path_buf(),
                message: if line > 0 {
                    format!("line {line}: {message}")
                } else {
                    message
                },
            },
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.edge_list = cfg
            .edge_list
            .map(|p| if p.is_relative() { base.join(p) } else { p });
        cfg.attack = cfg.attack.resolve(base);
        cfg.initial_state = cfg.initial_state.resolve(base);
        Ok(cfg)
    }

    /// Serializes every key; `parse(to_text())` reproduces `self`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("network", self.network.name().to_string());
        if let Some(p) = &self.edge_list {
            put("edge_list", p.display().to_string());
        }
        put("nodes", self.nodes.to_string());
        put("edges_per_node", self.edges_per_node.to_string());
        put("gamma", format!("{:?}", self.gamma));
        put("base_degree", self.base_degree.to_string());
        put("rewire", format!("{:?}", self.rewire));
        put("seed", self.seed.to_string());
        put("beta", format!("{:?}", self.beta));
        put("horizon", format!("{:?}", self.horizon));
        put("steps", self.steps.to_string());
        put("attack", self.attack.render());
        put("initial_state", self.initial_state.render());
        put("x_lo", format!("{:?}", self.x_lo));
        put("x_hi", format!("{:?}", self.x_hi));
        put("y_lo", format!("{:?}", self.y_lo));
        put("y_hi", format!("{:?}", self.y_hi));
        put("relaxation", format!("{:?}", self.relaxation));
        put("tolerance", format!("{:?}", self.tolerance));
        put("max_iters", self.max_iters.to_string());
        put("stall_patience", self.stall_patience.to_string());
        put("polish_iters", self.polish_iters.to_string());
        put("replicates", self.replicates.to_string());
        put("output_dir", self.output_dir.display().to_string());
        s
    }

    pub fn params(&self) -> CliResult<ModelParams<f64>> {
        Ok(ModelParams::new(self.beta, self.horizon, self.steps)?)
    }

    pub fn bounds(&self) -> CliResult<Bounds<f64>> {
        Ok(Bounds::new(self.x_lo, self.x_hi, self.y_lo, self.y_hi)?)
    }

    pub fn solver(&self) -> SolverConfig<f64> {
        SolverConfig {
            relaxation: self.relaxation,
            tol: self.tolerance,
            max_iters: self.max_iters,
            stall_patience: self.stall_patience,
            polish_iters: self.polish_iters,
        }
    }

    pub fn template(&self) -> CliResult<ProblemTemplate<f64>> {
        let t = ProblemTemplate {
            attack: self.attack.load()?,
            initial_state: self.initial_state.load()?,
            params: self.params()?,
            bounds: self.bounds()?,
            solver: self.solver(),
        };
        t.solver.validate()?;
        Ok(t)
    }

    /// The network source named by `network`, loading edge lists eagerly.
    pub fn network_source(&self) -> CliResult<NetworkSource> {
        Ok(match self.network {
            NetworkModel::ScaleFree => NetworkSource::ScaleFree {
                n: self.nodes,
                m: self.edges_per_node,
            },
            NetworkModel::ScaleFreeExponent => NetworkSource::ScaleFreeExponent {
                n: self.nodes,
                m: self.edges_per_node,
                gamma: self.gamma,
            },
            NetworkModel::SmallWorld => NetworkSource::SmallWorld {
                n: self.nodes,
                k: self.base_degree,
                p: self.rewire,
            },
            NetworkModel::EdgeList => {
                let path = self.edge_list.clone().expect("checked at parse time");
                let network = load_edge_list(&read(&path)?).map_err(|e| CliError::Input {
                    path: path.clone(),
                    message: e.to_string(),
                })?;
                let label = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| path.display().to_string());
                NetworkSource::Given { label, network }
            }
        })
    }

    /// Seed of the single network used by `solve`, `compare` and bound sweeps.
    pub fn network_seed(&self) -> u64 {
        aptdefense::experiments::derive_seed(self.seed, &[NETWORK_STREAM])
    }
}
