use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibrate::{estimate_lambda, CalibrateError, CalibrationTarget};
use crate::control::{
    lockdown_centrality_correlation, parse_policy_csv, policy_csv, solve_optimal_lockdown,
    ControlError, PlannerProblem, Solution, SolutionSummary,
};
use crate::economy::{cumulative_loss_pct_series, surplus_loss_pct};
use crate::epidemic::io::{aggregate_csv, parse_numeric_csv, trajectory_csv};
use crate::epidemic::{integrate, EpidemicError, LockdownPolicy};
use crate::netgen::{centrality, density, format_edge_list, CentralityKind, Network};
use crate::stats::StatsError;

use super::config::resolve;
use super::{Cli, CliError, NetworkSpec, ScenarioConfig, Topology, EXIT_NUMERICAL, EXIT_OK};

pub const SWEEP_HEADER: &str = "scenario,t,mean_x,mean_l,mean_d,loss_pct";
pub const CENTRALITY_HEADER: &str = "metric,pearson_r,p_value";
/// Written in place of r and p when a series is constant.
pub const ZERO_VARIANCE: &str = "zero-variance";
const FAILED: &str = "error";

/// Resolved configuration of one invocation.
#[derive(Debug, Clone)]
pub struct Context {
    pub config: ScenarioConfig,
    /// Relative paths inside the config resolve against this directory.
    pub base_dir: PathBuf,
    pub out_dir: PathBuf,
}

impl Context {
    pub fn new(config: ScenarioConfig, base_dir: PathBuf, out_dir: PathBuf) -> Self {
        Self {
            config,
            base_dir,
            out_dir,
        }
    }

    pub fn from_cli(cli: &Cli) -> Result<Self, CliError> {
        let (mut config, base_dir) = match &cli.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::Config(format!("cannot read config {}: {e}", path.display()))
                })?;
                let cfg = ScenarioConfig::parse(&text)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
                (cfg, base)
            }
            None => (ScenarioConfig::default(), PathBuf::new()),
        };
        if let Some(seed) = cli.seed {
            config.network.set_seed(seed);
        }
        if let Some(dt) = cli.dt {
            config.planner.dt = dt;
        }
        if let Some(horizon) = cli.horizon {
            config.planner.horizon = horizon;
        }
        let out_dir = match &cli.out {
            Some(dir) => dir.clone(),
            None => resolve(&base_dir, &config.outputs.dir),
        };
        Ok(Self::new(config, base_dir, out_dir))
    }

    fn network(&self) -> Result<Network, CliError> {
        self.config.network.build(&self.base_dir)
    }

    fn write(&self, name: &str, contents: &str, outcome: &mut Outcome) -> Result<(), CliError> {
        std::fs::create_dir_all(&self.out_dir).map_err(|e| CliError::Io {
            path: self.out_dir.display().to_string(),
            reason: e.to_string(),
        })?;
        let path = self.out_dir.join(name);
        std::fs::write(&path, contents).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        outcome.files.push(path);
        Ok(())
    }
}

/// What a command produced. `success` is false when a solve did not
/// converge, λ was not identified or a correlation was undefined; the files
/// are written either way.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub success: bool,
    pub files: Vec<PathBuf>,
    pub messages: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self {
            success: true,
            ..Self::default()
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.success {
            EXIT_OK
        } else {
            EXIT_NUMERICAL
        }
    }
}

fn control_error(e: ControlError) -> CliError {
    if e.is_numerical() {
        CliError::Numerical(e.to_string())
    } else {
        CliError::Config(e.to_string())
    }
}

fn epidemic_error(e: EpidemicError) -> CliError {
    control_error(ControlError::Epidemic(e))
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkStats {
    pub kind: String,
    pub n: usize,
    pub edges: usize,
    pub density: f64,
    pub min_degree: usize,
    pub mean_degree: f64,
    pub max_degree: usize,
}

impl NetworkStats {
    pub fn of(net: &Network, kind: &str) -> Self {
        let n = net.n();
        let degrees: Vec<usize> = (0..n).map(|i| net.degree(i)).collect();
        Self {
            kind: kind.to_string(),
            n,
            edges: net.edge_count(),
            density: density(net).unwrap_or(0.0),
            min_degree: degrees.iter().copied().min().unwrap_or(0),
            mean_degree: degrees.iter().sum::<usize>() as f64 / n as f64,
            max_degree: degrees.iter().copied().max().unwrap_or(0),
        }
    }
}

/// `network.edges` and `network_stats.json`.
pub fn cmd_generate_network(ctx: &Context) -> Result<Outcome, CliError> {
    let net = ctx.network()?;
    let stats = NetworkStats::of(&net, ctx.config.network.kind_name());
    let mut out = Outcome::new();
    ctx.write("network.edges", &format_edge_list(&net), &mut out)?;
    ctx.write("network_stats.json", &json(&stats), &mut out)?;
    out.messages.push(format!(
        "{} network: n = {}, {} edges, density {:.6}",
        stats.kind, stats.n, stats.edges, stats.density
    ));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub loss_pct: f64,
    pub mean_lockdown: f64,
    pub peak_mean_infection: f64,
    pub peak_time: f64,
    pub final_mean_deaths: f64,
    pub max_conservation_error: f64,
}

/// `trajectory.csv`, `aggregate.csv` and `simulation.json` under the policy
/// of the `[simulate]` table.
pub fn cmd_simulate(ctx: &Context) -> Result<Outcome, CliError> {
    let cfg = &ctx.config;
    let problem = cfg.problem(ctx.network()?, &ctx.base_dir)?;
    let (len, n) = (problem.grid.len(), problem.n());
    let policy = match &cfg.simulate.policy {
        Some(path) => {
            let path = resolve(&ctx.base_dir, path);
            let text = std::fs::read_to_string(&path).map_err(|e| {
                CliError::Config(format!(
                    "simulate.policy: cannot read {}: {e}",
                    path.display()
                ))
            })?;
            parse_policy_csv(&text, problem.grid, n)
                .map_err(|e| CliError::Config(format!("simulate.policy {}: {e}", path.display())))?
        }
        None => LockdownPolicy::constant(len, n, cfg.simulate.lockdown)
            .map_err(|e| CliError::Config(format!("simulate.lockdown: {e}")))?,
    };
    let traj = integrate(
        &problem.net,
        &problem.epi,
        &policy,
        &problem.initial,
        problem.grid,
    )
    .map_err(epidemic_error)?;
    let infection = traj.mean_infection_series();
    let peak = (0..infection.len()).fold(0, |b, k| if infection[k] > infection[b] { k } else { b });
    let summary = SimulationSummary {
        loss_pct: surplus_loss_pct(&traj, &problem.econ, problem.rate)
            .map_err(|e| control_error(ControlError::Economy(e)))?,
        mean_lockdown: policy.mean(),
        peak_mean_infection: infection[peak],
        peak_time: problem.grid.time(peak),
        final_mean_deaths: traj.means_at(traj.len() - 1)[3],
        max_conservation_error: traj.max_conservation_error(),
    };
    let mut out = Outcome::new();
    ctx.write("trajectory.csv", &trajectory_csv(&traj), &mut out)?;
    ctx.write("aggregate.csv", &aggregate_csv(&traj), &mut out)?;
    ctx.write("simulation.json", &json(&summary), &mut out)?;
    out.messages.push(format!(
        "peak mean infection {:.4} at t = {}, final mean deaths {:.4}, surplus loss {:.3}%",
        summary.peak_mean_infection, summary.peak_time, summary.final_mean_deaths, summary.loss_pct
    ));
    Ok(out)
}

fn solve(problem: &PlannerProblem, ctx: &Context) -> Result<Solution, CliError> {
    let config = ctx.config.solver_config()?;
    solve_optimal_lockdown(problem, &config).map_err(control_error)
}

/// `policy.csv`, `aggregate.csv` and `summary.json`; succeeds iff the solve
/// converged.
pub fn cmd_optimize(ctx: &Context) -> Result<Outcome, CliError> {
    let problem = ctx.config.problem(ctx.network()?, &ctx.base_dir)?;
    let sol = solve(&problem, ctx)?;
    let summary = SolutionSummary::new(&sol, problem.lambda);
    let mut out = Outcome::new();
    ctx.write(
        "policy.csv",
        &policy_csv(&sol.policy, problem.grid),
        &mut out,
    )?;
    ctx.write("aggregate.csv", &aggregate_csv(&sol.trajectory), &mut out)?;
    ctx.write("summary.json", &json(&summary), &mut out)?;
    out.success = sol.converged;
    out.messages.push(format!(
        "lambda {}: mean lockdown {:.3}%, surplus loss {:.3}%, converged {}",
        problem.lambda,
        100.0 * summary.mean_lockdown,
        summary.loss_pct,
        summary.converged
    ));
    Ok(out)
}

/// One labelled problem of a sweep.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub label: String,
    pub problem: PlannerProblem,
}

fn base_mean_degree(spec: &NetworkSpec) -> Result<(usize, usize, u64, f64), CliError> {
    match *spec {
        NetworkSpec::SmallWorld {
            n,
            mean_degree,
            rewire_prob,
            seed,
        } => Ok((n, mean_degree, seed, rewire_prob)),
        NetworkSpec::RingLattice { n, mean_degree } => Ok((n, mean_degree, 0, 0.1)),
        NetworkSpec::Random {
            n,
            edge_count,
            seed,
        } => Ok((n, 2 * edge_count / n.max(1), seed, 0.1)),
        NetworkSpec::ScaleFree {
            n,
            attach_count,
            seed,
        } => Ok((n, 2 * attach_count, seed, 0.1)),
        NetworkSpec::EdgeList { .. } => Err(CliError::Config(
            "sweep: densities and topologies need a generated network, not an edge list".into(),
        )),
    }
}

fn with_density(spec: &NetworkSpec, k: usize) -> Result<NetworkSpec, CliError> {
    Ok(match *spec {
        NetworkSpec::SmallWorld {
            n,
            rewire_prob,
            seed,
            ..
        } => NetworkSpec::SmallWorld {
            n,
            mean_degree: 2 * k,
            rewire_prob,
            seed,
        },
        NetworkSpec::RingLattice { n, .. } => NetworkSpec::RingLattice {
            n,
            mean_degree: 2 * k,
        },
        NetworkSpec::Random { n, seed, .. } => NetworkSpec::Random {
            n,
            edge_count: k * n,
            seed,
        },
        NetworkSpec::ScaleFree { n, seed, .. } => NetworkSpec::ScaleFree {
            n,
            attach_count: k,
            seed,
        },
        NetworkSpec::EdgeList { .. } => return Err(base_mean_degree(spec).unwrap_err()),
    })
}

fn with_topology(spec: &NetworkSpec, topology: Topology) -> Result<NetworkSpec, CliError> {
    let (n, mean_degree, seed, rewire_prob) = base_mean_degree(spec)?;
    Ok(match topology {
        Topology::RingLattice => NetworkSpec::RingLattice { n, mean_degree },
        Topology::SmallWorld => NetworkSpec::SmallWorld {
            n,
            mean_degree,
            rewire_prob,
            seed,
        },
        Topology::Random => NetworkSpec::Random {
            n,
            edge_count: n * mean_degree / 2,
            seed,
        },
        Topology::ScaleFree => NetworkSpec::ScaleFree {
            n,
            attach_count: (mean_degree / 2).max(1),
            seed,
        },
    })
}

/// The scenarios of the `[sweep]` table, in list order.
///
/// Densities k give networks with k·n edges (mean degree 2k); topologies
/// keep the base network's size, mean degree and seed.
pub fn sweep_scenarios(ctx: &Context) -> Result<Vec<Scenario>, CliError> {
    let cfg = &ctx.config;
    let sweep = &cfg.sweep;
    let given = [
        sweep.lambdas.is_some(),
        sweep.densities.is_some(),
        sweep.topologies.is_some(),
    ];
    if given.iter().filter(|&&g| g).count() != 1 {
        return Err(CliError::Config(
            "sweep: give exactly one of lambdas, densities or topologies".into(),
        ));
    }
    let len = sweep
        .lambdas
        .as_ref()
        .map(Vec::len)
        .or(sweep.densities.as_ref().map(Vec::len))
        .or(sweep.topologies.as_ref().map(Vec::len))
        .unwrap_or(0);
    if len < 2 {
        return Err(CliError::Config(format!(
            "sweep: need at least 2 scenarios, got {len}"
        )));
    }
    let problem_on = |spec: &NetworkSpec| -> Result<PlannerProblem, CliError> {
        cfg.problem(spec.build(&ctx.base_dir)?, &ctx.base_dir)
    };
    let mut scenarios = Vec::with_capacity(len);
    if let Some(lambdas) = &sweep.lambdas {
        let base = problem_on(&cfg.network)?;
        for &lambda in lambdas {
            if !(lambda.is_finite() && lambda >= 0.0) {
                return Err(CliError::Config(format!(
                    "sweep.lambdas: {lambda} is not a valid cap"
                )));
            }
            scenarios.push(Scenario {
                label: format!("lambda={lambda}"),
                problem: base.with_lambda(lambda),
            });
        }
    } else if let Some(densities) = &sweep.densities {
        for &k in densities {
            scenarios.push(Scenario {
                label: format!("k={k}"),
                problem: problem_on(&with_density(&cfg.network, k)?)?,
            });
        }
    } else if let Some(topologies) = &sweep.topologies {
        for &t in topologies {
            scenarios.push(Scenario {
                label: t.name().to_string(),
                problem: problem_on(&with_topology(&cfg.network, t)?)?,
            });
        }
    }
    Ok(scenarios)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct LabelledSummary {
    scenario: String,
    #[serde(flatten)]
    summary: SolutionSummary,
}

/// One row of the sweep CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scenario: String,
    pub t: f64,
    pub mean_x: f64,
    pub mean_l: f64,
    pub mean_d: f64,
    pub loss_pct: f64,
}

pub fn parse_sweep_csv(text: &str) -> Result<Vec<SweepRow>, EpidemicError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == SWEEP_HEADER => {}
        _ => {
            return Err(EpidemicError::Parse {
                line: 1,
                reason: format!("expected header `{SWEEP_HEADER}`"),
            })
        }
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let (label, rest) = line.split_once(',').ok_or_else(|| EpidemicError::Parse {
            line: idx + 1,
            reason: "missing fields".into(),
        })?;
        let values = parse_numeric_csv(&format!("t,x,l,d,loss\n{rest}"), "t,x,l,d,loss").map_err(
            |e| match e {
                EpidemicError::Parse { reason, .. } => EpidemicError::Parse {
                    line: idx + 1,
                    reason,
                },
                other => other,
            },
        )?;
        let v = &values[0];
        rows.push(SweepRow {
            scenario: label.to_string(),
            t: v[0],
            mean_x: v[1],
            mean_l: v[2],
            mean_d: v[3],
            loss_pct: v[4],
        });
    }
    Ok(rows)
}

/// `sweep.csv` (one block per scenario, then by time) and
/// `sweep_summary.json`; succeeds iff every solve converged.
pub fn cmd_sweep(ctx: &Context) -> Result<Outcome, CliError> {
    let scenarios = sweep_scenarios(ctx)?;
    let config = ctx.config.solver_config()?;
    let solved: Vec<Result<Solution, CliError>> = scenarios
        .par_iter()
        .map(|s| {
            info!("sweep: solving {}", s.label);
            solve_optimal_lockdown(&s.problem, &config).map_err(|e| match control_error(e) {
                CliError::Numerical(m) => CliError::Numerical(format!("{}: {m}", s.label)),
                CliError::Config(m) => CliError::Config(format!("{}: {m}", s.label)),
                other => other,
            })
        })
        .collect();

    let mut csv = String::from(SWEEP_HEADER);
    csv.push('\n');
    let mut summaries = Vec::with_capacity(scenarios.len());
    let mut out = Outcome::new();
    for (s, sol) in scenarios.iter().zip(solved) {
        let sol = sol?;
        let p = &s.problem;
        let loss = cumulative_loss_pct_series(&sol.trajectory, &p.econ, p.rate)
            .map_err(|e| control_error(ControlError::Economy(e)))?;
        for k in 0..sol.trajectory.len() {
            let [_, x, _, d, l] = sol.trajectory.means_at(k);
            let _ = writeln!(
                csv,
                "{},{},{x},{l},{d},{}",
                s.label,
                p.grid.time(k),
                loss[k]
            );
        }
        let summary = SolutionSummary::new(&sol, p.lambda);
        out.success &= sol.converged;
        out.messages.push(format!(
            "{}: mean lockdown {:.3}%, surplus loss {:.3}%, converged {}",
            s.label,
            100.0 * summary.mean_lockdown,
            summary.loss_pct,
            summary.converged
        ));
        summaries.push(LabelledSummary {
            scenario: s.label.clone(),
            summary,
        });
    }
    ctx.write("sweep.csv", &csv, &mut out)?;
    ctx.write("sweep_summary.json", &json(&summaries), &mut out)?;
    Ok(out)
}

/// One metric's correlation, or the reason it is undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralityRow {
    pub metric: CentralityKind,
    /// `(pearson_r, p_value)`, or the marker written instead.
    pub value: Result<(f64, f64), String>,
}

fn centrality_csv(rows: &[CentralityRow]) -> String {
    let mut out = String::from(CENTRALITY_HEADER);
    out.push('\n');
    for row in rows {
        let _ = match &row.value {
            Ok((r, p)) => writeln!(out, "{},{r},{p:e}", row.metric.name()),
            Err(marker) => writeln!(out, "{},{marker},{marker}", row.metric.name()),
        };
    }
    out
}

pub fn parse_centrality_csv(text: &str) -> Result<Vec<CentralityRow>, EpidemicError> {
    let fail = |line: usize, reason: String| EpidemicError::Parse { line, reason };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CENTRALITY_HEADER => {}
        _ => return Err(fail(1, format!("expected header `{CENTRALITY_HEADER}`"))),
    }
    let mut rows = Vec::new();
    for (idx, line) in lines.filter(|(_, l)| !l.trim().is_empty()) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(fail(
                idx + 1,
                format!("expected 3 fields, got {}", fields.len()),
            ));
        }
        let metric = CentralityKind::ALL
            .into_iter()
            .find(|k| k.name() == fields[0])
            .ok_or_else(|| fail(idx + 1, format!("unknown metric `{}`", fields[0])))?;
        let value = match (fields[1].parse::<f64>(), fields[2].parse::<f64>()) {
            (Ok(r), Ok(p)) => Ok((r, p)),
            _ if fields[1] == fields[2] && (fields[1] == ZERO_VARIANCE || fields[1] == FAILED) => {
                Err(fields[1].to_string())
            }
            _ => {
                return Err(fail(
                    idx + 1,
                    format!("bad values `{},{}`", fields[1], fields[2]),
                ))
            }
        };
        rows.push(CentralityRow { metric, value });
    }
    Ok(rows)
}

/// `centrality.csv` from the `policy.csv` in `solution` (default: the
/// output directory); succeeds iff all four correlations are defined.
pub fn cmd_report_centrality(ctx: &Context, solution: Option<&Path>) -> Result<Outcome, CliError> {
    let net = ctx.network()?;
    let grid = ctx.config.grid()?;
    let dir = solution.map_or_else(|| ctx.out_dir.clone(), Path::to_path_buf);
    let path = dir.join("policy.csv");
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Config(format!("solution: cannot read {}: {e}", path.display())))?;
    let policy = parse_policy_csv(&text, grid, net.n())
        .map_err(|e| CliError::Config(format!("solution {}: {e}", path.display())))?;
    let rows: Vec<CentralityRow> = CentralityKind::ALL
        .into_iter()
        .map(|metric| {
            let value = match centrality(&net, metric) {
                Ok(c) => match lockdown_centrality_correlation(&policy, &c) {
                    Ok(corr) => Ok((corr.r, corr.p_value)),
                    Err(StatsError::ZeroVariance(_)) => Err(ZERO_VARIANCE.to_string()),
                    Err(_) => Err(FAILED.to_string()),
                },
                Err(_) => Err(FAILED.to_string()),
            };
            CentralityRow { metric, value }
        })
        .collect();
    let mut out = Outcome::new();
    for row in &rows {
        match &row.value {
            Ok((r, p)) => out
                .messages
                .push(format!("{}: r = {r:.4}, p = {p:.3e}", row.metric.name())),
            Err(m) => {
                out.success = false;
                out.messages.push(format!("{}: {m}", row.metric.name()));
            }
        }
    }
    ctx.write("centrality.csv", &centrality_csv(&rows), &mut out)?;
    Ok(out)
}

fn calibrate_error(e: CalibrateError) -> CliError {
    if e.is_numerical() {
        CliError::Numerical(e.to_string())
    } else {
        CliError::Config(e.to_string())
    }
}

/// `calibration.json`; succeeds iff λ is identified.
pub fn cmd_calibrate(ctx: &Context, target: Option<&Path>) -> Result<Outcome, CliError> {
    let cfg = &ctx.config;
    let spec = &cfg.calibration;
    let path = match (target, &spec.target) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(p)) => resolve(&ctx.base_dir, p),
        (None, None) => {
            return Err(CliError::Config(
                "calibration.target: no target series (set it or pass --target)".into(),
            ))
        }
    };
    let target = CalibrationTarget::read_csv(
        &path,
        spec.kind,
        spec.population_scale,
        spec.death_multiplier,
    )
    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let problem = cfg.problem(ctx.network()?, &ctx.base_dir)?;
    let solver = cfg.calibration_solver()?;
    let result =
        estimate_lambda(&target, &problem, &spec.search, &solver).map_err(calibrate_error)?;
    let mut out = Outcome::new();
    let mut report = result.to_json();
    report.push('\n');
    ctx.write("calibration.json", &report, &mut out)?;
    out.success = result.identified;
    out.messages.push(format!(
        "lambda_hat {} (distance {:.6e}, identified {})",
        result.lambda_hat, result.objective, result.identified
    ));
    Ok(out)
}
