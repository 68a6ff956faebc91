//! TOML scenario files.
//!
//! ```toml
//! schema_version = 1
//!
//! [network]
//! kind = "small-world"   # ring-lattice | small-world | random | scale-free | edge-list
//! n = 300
//! mean_degree = 4
//! rewire_prob = 0.1
//! seed = 1
//!
//! [planner]
//! lambda = 0.05
//! horizon = 150.0
//! dt = 0.25
//! ```
//!
//! Every table is optional; defaults are the desk-scale small-world setup.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::calibrate::{params_from_state_inputs, LambdaSearch, SeriesKind};
use crate::control::{PlannerProblem, SolverConfig, SolverMethod};
use crate::economy::{AgentEconomy, DiscountRate, Economy};
use crate::epidemic::{EpidemicParams, HealthState, TimeGrid};
use crate::netgen::{
    generate_random, generate_ring_lattice, generate_scale_free, generate_small_world,
    header_agent_count, parse_edge_list, Network, RngSeed,
};

use super::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub network: NetworkSpec,
    #[serde(default)]
    pub epidemic: EpidemicSpec,
    #[serde(default)]
    pub economy: EconomySpec,
    #[serde(default)]
    pub planner: PlannerSpec,
    #[serde(default)]
    pub initial: InitialSpec,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub simulate: SimulateSpec,
    #[serde(default)]
    pub sweep: SweepSpec,
    #[serde(default)]
    pub calibration: CalibrationSpec,
    #[serde(default)]
    pub outputs: OutputSpec,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            network: NetworkSpec::default(),
            epidemic: EpidemicSpec::default(),
            economy: EconomySpec::default(),
            planner: PlannerSpec::default(),
            initial: InitialSpec::default(),
            solver: SolverConfig::default(),
            simulate: SimulateSpec::default(),
            sweep: SweepSpec::default(),
            calibration: CalibrationSpec::default(),
            outputs: OutputSpec::default(),
        }
    }
}

/// Where the contact network comes from: one generator or one file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NetworkSpec {
    RingLattice {
        n: usize,
        mean_degree: usize,
    },
    SmallWorld {
        n: usize,
        mean_degree: usize,
        #[serde(default = "default_rewire")]
        rewire_prob: f64,
        #[serde(default)]
        seed: u64,
    },
    Random {
        n: usize,
        edge_count: usize,
        #[serde(default)]
        seed: u64,
    },
    ScaleFree {
        n: usize,
        attach_count: usize,
        #[serde(default)]
        seed: u64,
    },
    /// `i j [weight]` lines; relative paths resolve against the config file.
    EdgeList {
        path: PathBuf,
        #[serde(default)]
        n: Option<usize>,
    },
}

fn default_rewire() -> f64 {
    0.1
}

impl Default for NetworkSpec {
    fn default() -> Self {
        NetworkSpec::SmallWorld {
            n: 300,
            mean_degree: 4,
            rewire_prob: 0.1,
            seed: 0,
        }
    }
}

impl NetworkSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            NetworkSpec::RingLattice { .. } => "ring-lattice",
            NetworkSpec::SmallWorld { .. } => "small-world",
            NetworkSpec::Random { .. } => "random",
            NetworkSpec::ScaleFree { .. } => "scale-free",
            NetworkSpec::EdgeList { .. } => "edge-list",
        }
    }

    pub fn agent_count(&self) -> Option<usize> {
        match *self {
            NetworkSpec::RingLattice { n, .. }
            | NetworkSpec::SmallWorld { n, .. }
            | NetworkSpec::Random { n, .. }
            | NetworkSpec::ScaleFree { n, .. } => Some(n),
            NetworkSpec::EdgeList { n, .. } => n,
        }
    }

    /// Replaces the generator seed; edge lists and lattices are unaffected.
    pub fn set_seed(&mut self, value: u64) {
        match self {
            NetworkSpec::SmallWorld { seed, .. }
            | NetworkSpec::Random { seed, .. }
            | NetworkSpec::ScaleFree { seed, .. } => *seed = value,
            NetworkSpec::RingLattice { .. } | NetworkSpec::EdgeList { .. } => {}
        }
    }

    pub fn build(&self, base_dir: &Path) -> Result<Network, CliError> {
        let net = match self {
            &NetworkSpec::RingLattice { n, mean_degree } => generate_ring_lattice(n, mean_degree),
            &NetworkSpec::SmallWorld {
                n,
                mean_degree,
                rewire_prob,
                seed,
            } => generate_small_world(n, mean_degree, rewire_prob, RngSeed(seed)),
            &NetworkSpec::Random {
                n,
                edge_count,
                seed,
            } => generate_random(n, edge_count, RngSeed(seed)),
            &NetworkSpec::ScaleFree {
                n,
                attach_count,
                seed,
            } => generate_scale_free(n, attach_count, RngSeed(seed)),
            NetworkSpec::EdgeList { path, n } => {
                let path = resolve(base_dir, path);
                let text = std::fs::read_to_string(&path).map_err(|e| {
                    CliError::Config(format!("network.path: cannot read {}: {e}", path.display()))
                })?;
                return parse_edge_list(&text, n.or_else(|| header_agent_count(&text))).map_err(
                    |e| CliError::Config(format!("network.path {}: {e}", path.display())),
                );
            }
        };
        net.map_err(|e| CliError::Config(format!("network ({}): {e}", self.kind_name())))
    }
}

pub(crate) fn resolve(base_dir: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base_dir.join(path)
    }
}

/// Either explicit rates or state-level inputs mapped by
/// [`params_from_state_inputs`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpidemicSpec {
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub kappa: Option<f64>,
    pub state: Option<StateInputs>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateInputs {
    pub r0: f64,
    pub death_per_case: f64,
    pub price: f64,
    pub wage: f64,
    pub alpha: f64,
    pub beds: f64,
}

/// Per-agent defaults; unset fields fall back to the state inputs or the
/// base economy (p = 1.2, w = 0.4, k = 1, α = 1/3, φ = 0, ψ = 1).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EconomySpec {
    pub p: Option<f64>,
    pub w: Option<f64>,
    pub k: Option<f64>,
    pub alpha: Option<f64>,
    pub phi: Option<f64>,
    pub psi: Option<f64>,
    /// Daily discount rate δ.
    pub delta: Option<f64>,
    /// CSV `agent,p,w,k,alpha,phi,psi` of per-agent overrides.
    pub overrides: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerSpec {
    pub lambda: f64,
    pub horizon: f64,
    pub dt: f64,
}

impl Default for PlannerSpec {
    fn default() -> Self {
        Self {
            lambda: 0.05,
            horizon: 150.0,
            dt: 0.25,
        }
    }
}

/// Initial infection: `x0` everywhere, or only on `agents` when listed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialSpec {
    pub x0: f64,
    pub agents: Option<Vec<usize>>,
}

impl Default for InitialSpec {
    fn default() -> Self {
        Self {
            x0: 0.01,
            agents: None,
        }
    }
}

/// Policy for `simulate`: a constant level or a `t,agent,l` CSV.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSpec {
    pub lockdown: f64,
    pub policy: Option<PathBuf>,
}

/// Scenario list for `sweep`; exactly one list may be given.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub lambdas: Option<Vec<f64>>,
    /// Density parameter k of a network with k·n edges (mean degree 2k).
    pub densities: Option<Vec<usize>>,
    pub topologies: Option<Vec<Topology>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Topology {
    RingLattice,
    SmallWorld,
    Random,
    ScaleFree,
}

impl Topology {
    pub fn name(self) -> &'static str {
        match self {
            Topology::RingLattice => "ring-lattice",
            Topology::SmallWorld => "small-world",
            Topology::Random => "random",
            Topology::ScaleFree => "scale-free",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationSpec {
    /// `day,deaths` CSV; `calibrate --target` overrides it.
    pub target: Option<PathBuf>,
    pub kind: SeriesKind,
    pub population_scale: f64,
    /// Share of reported deaths attributed to the modeled population.
    pub death_multiplier: f64,
    pub search: LambdaSearch,
    /// Solver used at every candidate λ; defaults to a few feasible-direction
    /// steps from l = 0, which already sit on the cap where it binds.
    pub solver: Option<SolverConfig>,
}

impl Default for CalibrationSpec {
    fn default() -> Self {
        Self {
            target: None,
            kind: SeriesKind::Cumulative,
            population_scale: 1.0,
            death_multiplier: 0.8,
            search: LambdaSearch::default(),
            solver: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
        }
    }
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "schema_version: expected {SCHEMA_VERSION}, got {}",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario config serializes")
    }

    pub fn epidemic_params(&self) -> Result<EpidemicParams, CliError> {
        let e = &self.epidemic;
        let base = match &e.state {
            Some(s) => {
                if e.beta.is_some() || e.gamma.is_some() || e.kappa.is_some() {
                    return Err(CliError::Config(
                        "epidemic: give either beta/gamma/kappa or a state block, not both".into(),
                    ));
                }
                self.state_params(s)?.0
            }
            None => EpidemicParams::baseline(),
        };
        let params = EpidemicParams {
            beta: e.beta.unwrap_or(base.beta),
            gamma: e.gamma.unwrap_or(base.gamma),
            kappa: e.kappa.unwrap_or(base.kappa),
        };
        params
            .validate()
            .map_err(|err| CliError::Config(format!("epidemic: {err}")))?;
        Ok(params)
    }

    fn state_params(&self, s: &StateInputs) -> Result<(EpidemicParams, AgentEconomy), CliError> {
        params_from_state_inputs(s.r0, s.death_per_case, s.price, s.wage, s.alpha, s.beds)
            .map_err(|e| CliError::Config(format!("epidemic.state: {e}")))
    }

    pub fn agent_economy(&self) -> Result<AgentEconomy, CliError> {
        let base = match &self.epidemic.state {
            Some(s) => self.state_params(s)?.1,
            None => AgentEconomy::default(),
        };
        let e = &self.economy;
        let agent = AgentEconomy {
            p: e.p.unwrap_or(base.p),
            w: e.w.unwrap_or(base.w),
            k: e.k.unwrap_or(base.k),
            alpha: e.alpha.unwrap_or(base.alpha),
            phi: e.phi.unwrap_or(base.phi),
            psi: e.psi.unwrap_or(base.psi),
        };
        agent
            .validate()
            .map_err(|err| CliError::Config(format!("economy: {err}")))?;
        Ok(agent)
    }

    pub fn grid(&self) -> Result<TimeGrid, CliError> {
        TimeGrid::new(self.planner.horizon, self.planner.dt)
            .map_err(|e| CliError::Config(format!("planner: {e}")))
    }

    pub fn initial_state(&self, n: usize) -> Result<HealthState, CliError> {
        let init = match &self.initial.agents {
            Some(agents) => HealthState::seeded(n, agents, self.initial.x0),
            None => HealthState::uniform(n, self.initial.x0),
        };
        init.map_err(|e| CliError::Config(format!("initial: {e}")))
    }

    pub fn economy(&self, n: usize, base_dir: &Path) -> Result<Economy, CliError> {
        let mut econ = Economy::homogeneous(n, self.agent_economy()?)
            .map_err(|e| CliError::Config(format!("economy: {e}")))?;
        if let Some(path) = &self.economy.overrides {
            let path = resolve(base_dir, path);
            econ.apply_overrides_file(&path).map_err(|e| {
                CliError::Config(format!("economy.overrides {}: {e}", path.display()))
            })?;
        }
        Ok(econ)
    }

    pub fn discount_rate(&self) -> Result<DiscountRate, CliError> {
        match self.economy.delta {
            Some(d) => DiscountRate::new(d).map_err(|e| CliError::Config(format!("economy: {e}"))),
            None => Ok(DiscountRate::default()),
        }
    }

    /// The planner problem on `net` at the configured λ.
    pub fn problem(&self, net: Network, base_dir: &Path) -> Result<PlannerProblem, CliError> {
        let n = net.n();
        let problem = PlannerProblem {
            epi: self.epidemic_params()?,
            econ: self.economy(n, base_dir)?,
            rate: self.discount_rate()?,
            lambda: self.planner.lambda,
            initial: self.initial_state(n)?,
            grid: self.grid()?,
            net,
        };
        problem
            .validate()
            .map_err(|e| CliError::Config(format!("planner: {e}")))?;
        Ok(problem)
    }

    pub fn calibration_solver(&self) -> Result<SolverConfig, CliError> {
        let solver = self
            .calibration
            .solver
            .clone()
            .unwrap_or_else(|| SolverConfig {
                method: SolverMethod::ActiveSet,
                max_iters: 3,
                ..SolverConfig::default().single_start()
            });
        solver
            .validate()
            .map_err(|e| CliError::Config(format!("calibration.solver: {e}")))?;
        Ok(solver)
    }

    pub fn solver_config(&self) -> Result<SolverConfig, CliError> {
        self.solver
            .validate()
            .map_err(|e| CliError::Config(format!("solver: {e}")))?;
        Ok(self.solver.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg = ScenarioConfig::parse("schema_version = 1\n").unwrap();
        assert_eq!(cfg, ScenarioConfig::default());
        assert_eq!(cfg.epidemic_params().unwrap(), EpidemicParams::baseline());
    }

    #[test]
    fn round_trips_through_toml() {
        let mut cfg = ScenarioConfig::default();
        cfg.sweep.lambdas = Some(vec![0.01, 0.1]);
        cfg.network = NetworkSpec::EdgeList {
            path: "net.txt".into(),
            n: Some(5),
        };
        assert_eq!(ScenarioConfig::parse(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn rejects_bad_schema_and_mixed_epidemic() {
        assert!(ScenarioConfig::parse("schema_version = 2\n").is_err());
        assert!(ScenarioConfig::parse("").is_err());
        let cfg = ScenarioConfig::parse(
            "schema_version = 1\n[epidemic]\nbeta = 0.1\n[epidemic.state]\nr0 = 3.6\ndeath_per_case = 0.2\nprice = 1\nwage = 1\nalpha = 0.3\nbeds = 1\n",
        )
        .unwrap();
        assert!(cfg.epidemic_params().is_err());
    }

    #[test]
    fn odd_mean_degree_names_the_field() {
        let cfg = ScenarioConfig::parse(
            "schema_version = 1\n[network]\nkind = \"ring-lattice\"\nn = 10\nmean_degree = 3\n",
        )
        .unwrap();
        let err = cfg.network.build(Path::new(".")).unwrap_err().to_string();
        assert!(err.contains("mean_degree"), "{err}");
    }
}
