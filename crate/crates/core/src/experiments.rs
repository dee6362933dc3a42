//! Reproduction harness: optimal-versus-static comparisons, admissible-bound
//! sweeps and network-topology sweeps.
//!
//! All randomness is derived from one base seed with [`derive_seed`]. Grid
//! points and replicates are solved in parallel; results are assembled in
//! grid order, so output does not depend on scheduling.

use rayon::prelude::*;

use crate::control::{static_control, Bounds};
use crate::dynamics::{forward_integrate, loss_weights, AttackStrategy, ModelParams};
use crate::error::{Error, Result};
use crate::fbsm::{solve, SolverConfig};
use crate::metrics::{curves, objective, DiagnosticCurves, ObjectiveBreakdown};
use crate::netgraph::{
    generate_scale_free, generate_scale_free_exponent, generate_small_world, Network,
};
use crate::scalar::Scalar;

/// Seed stream used for the network of a single-instance run.
pub const NETWORK_STREAM: u64 = 1;
/// Seed stream used for topology-sweep replicates.
pub const REPLICATE_STREAM: u64 = 2;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent child seed from `base` and a path of stream tags.
pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    tags.iter()
        .fold(splitmix64(base), |acc, &t| splitmix64(acc ^ splitmix64(t)))
}

/// Where the access network of an instance comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum NetworkSource {
    /// Preferential attachment with `m` edges per new node.
    ScaleFree {
        n: usize,
        m: usize,
    },
    /// Static fitness model with degree exponent `gamma`.
    ScaleFreeExponent {
        n: usize,
        m: usize,
        gamma: f64,
    },
    SmallWorld {
        n: usize,
        k: usize,
        p: f64,
    },
    /// A fixed network, e.g. loaded from an edge list.
    Given {
        label: String,
        network: Network,
    },
}

impl NetworkSource {
    pub fn build(&self, seed: u64) -> Result<Network> {
        match self {
            NetworkSource::ScaleFree { n, m } => generate_scale_free(*n, *m, seed),
            NetworkSource::ScaleFreeExponent { n, m, gamma } => {
                generate_scale_free_exponent(*n, *m, *gamma, seed)
            }
            NetworkSource::SmallWorld { n, k, p } => generate_small_world(*n, *k, *p, seed),
            NetworkSource::Given { network, .. } => Ok(network.clone()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            NetworkSource::ScaleFree { n, m } => format!("scale-free(n={n},m={m})"),
            NetworkSource::ScaleFreeExponent { n, m, gamma } => {
                format!("scale-free-exponent(n={n},m={m},gamma={gamma})")
            }
            NetworkSource::SmallWorld { n, k, p } => format!("small-world(n={n},k={k},p={p})"),
            NetworkSource::Given { label, .. } => label.clone(),
        }
    }

    /// Whether [`build`](Self::build) depends on the seed.
    pub fn is_random(&self) -> bool {
        !matches!(self, NetworkSource::Given { .. })
    }
}

/// A per-node quantity given either as one broadcast value or node by node.
#[derive(Debug, Clone, PartialEq)]
pub enum NodeValues<T> {
    Uniform(T),
    PerNode(Vec<T>),
}

impl<T: Scalar> NodeValues<T> {
    pub fn resolve(&self, n: usize) -> Result<Vec<T>> {
        match self {
            NodeValues::Uniform(v) => Ok(vec![*v; n]),
            NodeValues::PerNode(v) if v.len() == n => Ok(v.clone()),
            NodeValues::PerNode(v) => Err(Error::Dimension {
                what: "per-node values",
                expected: n,
                found: v.len(),
            }),
        }
    }
}

/// Everything except the network needed to pose one problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemTemplate<T> {
    pub attack: NodeValues<T>,
    pub initial_state: NodeValues<T>,
    pub params: ModelParams<T>,
    pub bounds: Bounds<T>,
    pub solver: SolverConfig<T>,
}

impl<T: Scalar> ProblemTemplate<T> {
    pub fn instantiate(&self, network: Network) -> Result<Instance<T>> {
        let n = network.n();
        let inst = Instance {
            atk: AttackStrategy::new(self.attack.resolve(n)?)?,
            c0: self.initial_state.resolve(n)?,
            params: self.params,
            bounds: self.bounds,
            solver: self.solver,
            network,
        };
        inst.validate()?;
        Ok(inst)
    }
}

/// One fully specified optimal control problem.
#[derive(Debug, Clone)]
pub struct Instance<T> {
    pub network: Network,
    pub atk: AttackStrategy<T>,
    pub params: ModelParams<T>,
    pub bounds: Bounds<T>,
    pub c0: Vec<T>,
    pub solver: SolverConfig<T>,
}

impl<T: Scalar> Instance<T> {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.bounds.validate()?;
        self.solver.validate()?;
        let n = self.network.n();
        crate::error::check_len("attack strategy", n, self.atk.len())?;
        crate::error::check_len("initial state", n, self.c0.len())?;
        if let Some(i) = self
            .c0
            .iter()
            .position(|c| !(*c >= T::zero() && *c <= T::one()))
        {
            return Err(Error::InvalidParameter(format!(
                "initial state of node {i} must lie in [0, 1]"
            )));
        }
        Ok(())
    }

    pub fn solve(&self) -> Result<crate::fbsm::SolveReport<T>> {
        solve(
            &self.network,
            &self.atk,
            &self.params,
            &self.bounds,
            &self.c0,
            &self.solver,
        )
    }

    /// Objective and curves of a static strategy at the given levels.
    pub fn evaluate_static(
        &self,
        x: T,
        y: T,
    ) -> Result<(ObjectiveBreakdown<T>, DiagnosticCurves<T>)> {
        let n = self.network.n();
        let u = static_control(x, y, &self.bounds, &self.params, n)?;
        let c = forward_integrate(&self.c0, &u, &self.network, &self.atk, &self.params)?;
        let w = loss_weights(&self.network);
        Ok((
            objective(&c, &u, &w, &self.params)?,
            curves(&c, &u, &w, &self.params)?,
        ))
    }

    fn with_bounds(&self, bounds: Bounds<T>) -> Self {
        Self {
            bounds,
            ..self.clone()
        }
    }
}

/// One row of a comparison table.
#[derive(Debug, Clone)]
pub struct CompareRow<T> {
    pub label: String,
    pub objective: ObjectiveBreakdown<T>,
    pub curves: DiagnosticCurves<T>,
    /// `Some` for the optimal strategy, `None` for static ones.
    pub converged: Option<bool>,
    pub iterations: usize,
}

pub const OPTIMAL_LABEL: &str = "optimal";

/// Solves `inst` and evaluates the three static strategies on it. Rows are
/// sorted by `J` ascending; ties keep the optimal strategy first.
pub fn run_baseline_compare<T: Scalar>(inst: &Instance<T>) -> Result<Vec<CompareRow<T>>> {
    inst.validate()?;
    let report = inst.solve()?;
    let mut rows = vec![CompareRow {
        label: OPTIMAL_LABEL.to_string(),
        objective: report.objective(),
        curves: report.curves.clone(),
        converged: Some(report.converged),
        iterations: report.iterations,
    }];
    for level in inst.bounds.static_levels() {
        let (objective, curves) = inst.evaluate_static(level.x, level.y)?;
        rows.push(CompareRow {
            label: level.label.to_string(),
            objective,
            curves,
            converged: None,
            iterations: 0,
        });
    }
    rows.sort_by(|a, b| {
        a.objective
            .j
            .partial_cmp(&b.objective.j)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    BoundsX,
    BoundsY,
    ScaleFreeGamma,
    SmallWorldP,
    BaselineCompare,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::BoundsX,
        Scenario::BoundsY,
        Scenario::ScaleFreeGamma,
        Scenario::SmallWorldP,
        Scenario::BaselineCompare,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::BoundsX => "bounds-x",
            Scenario::BoundsY => "bounds-y",
            Scenario::ScaleFreeGamma => "scale-free-gamma",
            Scenario::SmallWorldP => "small-world-p",
            Scenario::BaselineCompare => "baseline-compare",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|sc| sc.name() == s)
    }

    pub fn is_bound_sweep(self) -> bool {
        matches!(self, Scenario::BoundsX | Scenario::BoundsY)
    }

    pub fn is_topology_sweep(self) -> bool {
        matches!(self, Scenario::ScaleFreeGamma | Scenario::SmallWorldP)
    }

    /// The grid used when none is given: a 7×7 lower/upper grid over
    /// `[0.1, 0.7]²` for bound sweeps, `γ ∈ {2.8, …, 3.4}` and
    /// `p ∈ {0.1, …, 0.5}` for the topology sweeps.
    pub fn default_grid<T: Scalar>(self) -> Vec<SweepPoint<T>> {
        let tenth = |i: usize| (i as f64) / 10.0;
        match self {
            Scenario::BoundsX | Scenario::BoundsY => (1..=7)
                .flat_map(|lo| {
                    (1..=7).map(move |hi| SweepPoint::Bounds(T::lit(tenth(lo)), T::lit(tenth(hi))))
                })
                .collect(),
            Scenario::ScaleFreeGamma => (28..=34).map(|i| SweepPoint::Value(tenth(i))).collect(),
            Scenario::SmallWorldP => (1..=5).map(|i| SweepPoint::Value(tenth(i))).collect(),
            Scenario::BaselineCompare => Vec::new(),
        }
    }
}

/// A point of a sweep grid: a `(lower, upper)` bound pair or a scalar
/// generator parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepPoint<T> {
    Bounds(T, T),
    Value(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec<T> {
    pub scenario: Scenario,
    pub grid: Vec<SweepPoint<T>>,
    pub network: NetworkSource,
    pub template: ProblemTemplate<T>,
    pub replicates: usize,
    pub seed: u64,
}

impl<T: Scalar> SweepSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::InvalidParameter("sweep grid is empty".into()));
        }
        if self.replicates < 1 {
            return Err(Error::InvalidParameter(
                "need at least one replicate".into(),
            ));
        }
        let bound_points = self
            .grid
            .iter()
            .all(|p| matches!(p, SweepPoint::Bounds(..)));
        let value_points = self.grid.iter().all(|p| matches!(p, SweepPoint::Value(_)));
        match self.scenario {
            s if s.is_bound_sweep() && !bound_points => Err(Error::InvalidParameter(format!(
                "{} needs (lower, upper) grid points",
                s.name()
            ))),
            s if s.is_topology_sweep() && !value_points => Err(Error::InvalidParameter(format!(
                "{} needs scalar grid points",
                s.name()
            ))),
            Scenario::BaselineCompare => Err(Error::InvalidParameter(
                "baseline-compare is not a sweep; use run_baseline_compare".into(),
            )),
            _ => Ok(()),
        }
    }
}

/// Aggregated optimal loss, cost and effectiveness at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow<T> {
    pub point: SweepPoint<T>,
    pub ol: T,
    pub oc: T,
    pub oj: T,
    pub converged_fraction: f64,
    /// Seeds of the replicates that produced a solution.
    pub seeds: Vec<u64>,
    /// Reasons for skipped replicates (or for skipping the whole point).
    pub skipped: Vec<String>,
}

impl<T> SweepRow<T> {
    /// Number of replicates that contributed to the means.
    pub fn replicates(&self) -> usize {
        self.seeds.len()
    }
}

struct Outcome<T> {
    seed: u64,
    result: std::result::Result<(ObjectiveBreakdown<T>, bool), String>,
}

fn aggregate<T: Scalar>(point: SweepPoint<T>, outcomes: Vec<Outcome<T>>) -> SweepRow<T> {
    let mut seeds = Vec::new();
    let mut skipped = Vec::new();
    let (mut ol, mut oc, mut oj) = (T::zero(), T::zero(), T::zero());
    let mut converged = 0usize;
    for o in outcomes {
        match o.result {
            Ok((obj, conv)) => {
                seeds.push(o.seed);
                ol = ol + obj.loss;
                oc = oc + obj.cost;
                oj = oj + obj.j;
                converged += conv as usize;
            }
            Err(reason) => skipped.push(format!("seed {}: {reason}", o.seed)),
        }
    }
    let count = seeds.len();
    let mean = |s: T| {
        if count == 0 {
            T::nan()
        } else {
            s / T::from_count(count)
        }
    };
    SweepRow {
        point,
        ol: mean(ol),
        oc: mean(oc),
        oj: mean(oj),
        converged_fraction: if count == 0 {
            0.0
        } else {
            converged as f64 / count as f64
        },
        seeds,
        skipped,
    }
}

fn solve_outcome<T: Scalar>(inst: Result<Instance<T>>, seed: u64) -> Outcome<T> {
    let result = inst
        .and_then(|i| i.solve())
        .map(|r| (r.objective(), r.converged))
        .map_err(|e| e.to_string());
    Outcome { seed, result }
}

/// Re-solves the base instance for every `(lower, upper)` pair of the grid,
/// replacing the prevention (`bounds-x`) or recovery (`bounds-y`) bounds.
/// The network is built once from `spec.seed`; invalid pairs (`lower > upper`)
/// yield a row with no replicates and the reason in `skipped`.
pub fn run_bound_sweep<T: Scalar>(spec: &SweepSpec<T>) -> Result<Vec<SweepRow<T>>> {
    spec.validate()?;
    if !spec.scenario.is_bound_sweep() {
        return Err(Error::InvalidParameter(format!(
            "{} is not a bound sweep",
            spec.scenario.name()
        )));
    }
    let net_seed = derive_seed(spec.seed, &[NETWORK_STREAM]);
    let base = spec.template.instantiate(spec.network.build(net_seed)?)?;
    let rows = spec
        .grid
        .par_iter()
        .map(|&point| {
            let SweepPoint::Bounds(lo, hi) = point else {
                unreachable!("validated above")
            };
            let mut b = base.bounds;
            match spec.scenario {
                Scenario::BoundsX => (b.x_lo, b.x_hi) = (lo, hi),
                _ => (b.y_lo, b.y_hi) = (lo, hi),
            }
            match b.validate() {
                Ok(()) => aggregate(
                    point,
                    vec![solve_outcome(Ok(base.with_bounds(b)), net_seed)],
                ),
                Err(e) => SweepRow {
                    point,
                    ol: T::nan(),
                    oc: T::nan(),
                    oj: T::nan(),
                    converged_fraction: 0.0,
                    seeds: Vec::new(),
                    skipped: vec![e.to_string()],
                },
            }
        })
        .collect();
    Ok(rows)
}

/// For every grid value, generates `replicates` networks (scale-free with
/// exponent `γ`, or small-world with rewiring probability `p`), solves each
/// and averages `OL*`, `OC*`, `OJ*`.
///
/// Node count and `m` (resp. `k`) come from `spec.network`. Replicate `r`
/// uses seed `derive_seed(spec.seed, [REPLICATE_STREAM, r])` at every grid
/// point, so points are compared on common random numbers.
pub fn run_topology_sweep<T: Scalar>(spec: &SweepSpec<T>) -> Result<Vec<SweepRow<T>>> {
    spec.validate()?;
    let (n, degree_param) = match (&spec.scenario, &spec.network) {
        (Scenario::ScaleFreeGamma, NetworkSource::ScaleFree { n, m })
        | (Scenario::ScaleFreeGamma, NetworkSource::ScaleFreeExponent { n, m, .. }) => (*n, *m),
        (Scenario::SmallWorldP, NetworkSource::SmallWorld { n, k, .. }) => (*n, *k),
        (s, src) => {
            return Err(Error::InvalidParameter(format!(
                "{} cannot vary network source {}",
                s.name(),
                src.label()
            )))
        }
    };
    let jobs: Vec<(usize, u64)> = (0..spec.grid.len())
        .flat_map(|p| {
            (0..spec.replicates)
                .map(move |r| (p, derive_seed(spec.seed, &[REPLICATE_STREAM, r as u64])))
        })
        .collect();
    let outcomes: Vec<(usize, Outcome<T>)> = jobs
        .par_iter()
        .map(|&(p, seed)| {
            let SweepPoint::Value(v) = spec.grid[p] else {
                unreachable!("validated above")
            };
            let net = match spec.scenario {
                Scenario::ScaleFreeGamma => generate_scale_free_exponent(n, degree_param, v, seed),
                _ => generate_small_world(n, degree_param, v, seed),
            };
            (
                p,
                solve_outcome(net.and_then(|net| spec.template.instantiate(net)), seed),
            )
        })
        .collect();
    let mut per_point: Vec<Vec<Outcome<T>>> = (0..spec.grid.len()).map(|_| Vec::new()).collect();
    for (p, o) in outcomes {
        per_point[p].push(o);
    }
    Ok(spec
        .grid
        .iter()
        .zip(per_point)
        .map(|(&point, outs)| aggregate(point, outs))
        .collect())
}

/// Dispatches to the bound or topology sweep.
pub fn run_sweep<T: Scalar>(spec: &SweepSpec<T>) -> Result<Vec<SweepRow<T>>> {
    if spec.scenario.is_bound_sweep() {
        run_bound_sweep(spec)
    } else {
        run_topology_sweep(spec)
    }
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap_or(std::cmp::Ordering::Equal));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation with average ranks for ties. Returns `NaN` when
/// either input is constant or the lengths differ.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    if xs.len() != ys.len() || xs.len() < 2 {
        return f64::NAN;
    }
    let (rx, ry) = (ranks(xs), ranks(ys));
    let mean = (xs.len() as f64 + 1.0) / 2.0;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mean) * (b - mean);
        sxx += (a - mean) * (a - mean);
        syy += (b - mean) * (b - mean);
    }
    sxy / (sxx * syy).sqrt()
}
