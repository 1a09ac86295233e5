//! Random instance generation and the experiment harness.

use std::io;
use std::time::Duration;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::cbs::{solve, SolverConfig};
use crate::model::{Agent, Elevator, FloorGrid, Instance, ModelError, MultiFloorGraph, Time, Vertex};
use crate::sipp::Planner;

const RETRIES: usize = 200;

/// Parameters of one random instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstanceSpec {
    pub width: u16,
    pub height: u16,
    pub obstacle_rate: f64,
    pub floors: u16,
    pub elevators: usize,
    pub t_floor: Time,
    pub agents: usize,
}

#[derive(Debug, Error)]
pub enum GenError {
    #[error("{agents} agents need {agents} distinct starts and goals but only {cells} cells are usable")]
    TooManyAgents { agents: usize, cells: usize },
    #[error("no valid instance after {0} attempts")]
    RetriesExhausted(usize),
    #[error("invalid parameters: {0}")]
    Parameters(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Deterministic random instance: obstacles first (the same layout on every
/// floor), then elevators on free cells, then starts and goals on free
/// non-door cells of random floors. Every agent can reach its goal when
/// alone; otherwise the draw is repeated.
pub fn gen_instance(spec: &InstanceSpec, seed: u64) -> Result<Instance, GenError> {
    if spec.width == 0 || spec.height == 0 || spec.floors == 0 || spec.t_floor == 0 {
        return Err(GenError::Parameters("sizes and t_floor must be positive".into()));
    }
    if !(0.0..1.0).contains(&spec.obstacle_rate) {
        return Err(GenError::Parameters(format!("obstacle rate {} not in [0, 1)", spec.obstacle_rate)));
    }
    let cells = spec.width as usize * spec.height as usize;
    let usable = (cells.saturating_sub(spec.elevators)) * spec.floors as usize;
    if spec.agents > usable {
        return Err(GenError::TooManyAgents { agents: spec.agents, cells: usable });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((spec.agents as u64) << 16) | spec.floors as u64);

    for _ in 0..RETRIES {
        let blocked: Vec<(u16, u16)> = (0..spec.height)
            .flat_map(|y| (0..spec.width).map(move |x| (x, y)))
            .filter(|_| rng.gen_bool(spec.obstacle_rate))
            .collect();
        let grid = FloorGrid::new(spec.width, spec.height, blocked)?;
        let mut free: Vec<(u16, u16)> = (0..spec.height)
            .flat_map(|y| (0..spec.width).map(move |x| (x, y)))
            .filter(|&(x, y)| !grid.is_blocked(x, y))
            .collect();
        if free.len() < spec.elevators {
            continue;
        }
        free.shuffle(&mut rng);
        let elevators: Vec<Elevator> = free[..spec.elevators]
            .iter()
            .enumerate()
            .map(|(id, &(x, y))| Elevator { id, x, y, t_floor: spec.t_floor })
            .collect();
        let graph = MultiFloorGraph::uniform(spec.floors, grid, elevators)?;
        let mut spots: Vec<Vertex> = (1..=spec.floors)
            .flat_map(|f| graph.free_cells(f).collect::<Vec<_>>())
            .filter(|v| !graph.is_door(*v))
            .collect();
        if spots.len() < spec.agents {
            continue;
        }
        spots.shuffle(&mut rng);
        let starts: Vec<Vertex> = spots[..spec.agents].to_vec();
        spots.shuffle(&mut rng);
        let goals: Vec<Vertex> = spots[..spec.agents].to_vec();
        let agents: Vec<Agent> =
            starts.into_iter().zip(goals).enumerate().map(|(id, (start, goal))| Agent { id, start, goal }).collect();
        if agents.iter().any(|a| a.needs_elevator() && graph.elevators().is_empty()) {
            continue;
        }
        if agents.iter().all(|a| Planner::new(&graph, *a).free_cost().is_some()) {
            return Ok(Instance::new(graph, agents)?);
        }
    }
    Err(GenError::RetriesExhausted(RETRIES))
}

/// A grid of experiments: every combination of floors, t_floor and agent
/// count, `instances` seeds each, run with every variant.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub width: u16,
    pub height: u16,
    pub obstacle_rate: f64,
    pub floors: Vec<u16>,
    pub elevators: usize,
    pub t_floor: Vec<Time>,
    pub agents: Vec<usize>,
    pub instances: u64,
    pub seed: u64,
    pub time_limit: Duration,
    pub variants: Vec<String>,
    pub mdd_node_cap: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: "exp".into(),
            width: 8,
            height: 8,
            obstacle_rate: 0.1,
            floors: vec![2],
            elevators: 3,
            t_floor: vec![3],
            agents: vec![2],
            instances: 1,
            seed: 0,
            time_limit: Duration::from_secs(60),
            variants: SolverConfig::VARIANTS.iter().map(|s| s.to_string()).collect(),
            mdd_node_cap: SolverConfig::default().mdd_node_cap,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: bad value for `{key}`: {value}")]
    BadValue { line: usize, key: String, value: String },
    #[error("{0}")]
    Invalid(String),
}

fn parse_list<T: std::str::FromStr>(value: &str) -> Option<Vec<T>> {
    value.split(',').map(|s| s.trim().parse().ok()).collect()
}

/// Parses `key = value` lines; `#` starts a comment, lists are
/// comma-separated.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = ExperimentConfig::default();
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or(ConfigError::Syntax { line: line_no })?;
        let (key, value) = (key.trim(), value.trim());
        let bad = || ConfigError::BadValue { line: line_no, key: key.into(), value: value.into() };
        match key {
            "experiment" => cfg.experiment = value.to_string(),
            "width" => cfg.width = value.parse().map_err(|_| bad())?,
            "height" => cfg.height = value.parse().map_err(|_| bad())?,
            "obstacle_rate" => cfg.obstacle_rate = value.parse().map_err(|_| bad())?,
            "floors" => cfg.floors = parse_list(value).ok_or_else(bad)?,
            "elevators" => cfg.elevators = value.parse().map_err(|_| bad())?,
            "tfloor" => cfg.t_floor = parse_list(value).ok_or_else(bad)?,
            "agents" => cfg.agents = parse_list(value).ok_or_else(bad)?,
            "instances" => cfg.instances = value.parse().map_err(|_| bad())?,
            "seed" => cfg.seed = value.parse().map_err(|_| bad())?,
            "time_limit" => {
                let secs: f64 = value.parse().map_err(|_| bad())?;
                if !(secs > 0.0 && secs.is_finite()) {
                    return Err(bad());
                }
                cfg.time_limit = Duration::from_secs_f64(secs);
            }
            "variants" => {
                cfg.variants = if value.is_empty() {
                    Vec::new()
                } else {
                    value.split(',').map(|s| s.trim().to_string()).collect()
                };
                if let Some(v) = cfg.variants.iter().find(|v| SolverConfig::variant(v).is_none()) {
                    return Err(ConfigError::BadValue { line: line_no, key: key.into(), value: v.clone() });
                }
            }
            "mdd_node_cap" => cfg.mdd_node_cap = value.parse().map_err(|_| bad())?,
            _ => return Err(ConfigError::UnknownKey { line: line_no, key: key.into() }),
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = self.width > 0
            && self.height > 0
            && self.instances > 0
            && self.mdd_node_cap > 0
            && !self.floors.is_empty()
            && !self.t_floor.is_empty()
            && !self.agents.is_empty()
            && self.floors.iter().all(|&f| f > 0)
            && self.t_floor.iter().all(|&t| t > 0)
            && self.agents.iter().all(|&n| n > 0);
        if !positive {
            return Err(ConfigError::Invalid("all counts must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.obstacle_rate) {
            return Err(ConfigError::Invalid("obstacle_rate must be in [0, 1)".into()));
        }
        Ok(())
    }

    fn spec(&self, floors: u16, t_floor: Time, agents: usize) -> InstanceSpec {
        InstanceSpec {
            width: self.width,
            height: self.height,
            obstacle_rate: self.obstacle_rate,
            floors,
            elevators: self.elevators,
            t_floor,
            agents,
        }
    }

    /// Instance cells in run order: (floors, t_floor, agents, seed).
    pub fn cells(&self) -> Vec<(u16, Time, usize, u64)> {
        let mut out = Vec::new();
        for &floors in &self.floors {
            for &tf in &self.t_floor {
                for &n in &self.agents {
                    for i in 0..self.instances {
                        out.push((floors, tf, n, self.seed + i));
                    }
                }
            }
        }
        out
    }
}

/// One solver run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRecord {
    pub experiment: String,
    pub variant: String,
    #[serde(rename = "N")]
    pub agents: usize,
    pub floors: u16,
    pub tfloor: Time,
    pub seed: u64,
    pub solved: bool,
    pub soc: Option<u64>,
    pub runtime_ms: f64,
    pub expanded: u64,
    pub generated: u64,
    pub mdde_time_fraction: f64,
}

/// Runs every cell with every variant, in config order. `progress` is
/// called after each run.
pub fn run_suite_with(
    cfg: &ExperimentConfig,
    mut progress: impl FnMut(&ResultRecord),
) -> Result<Vec<ResultRecord>, GenError> {
    let mut out = Vec::new();
    if cfg.variants.is_empty() {
        return Ok(out);
    }
    for (floors, tf, n, seed) in cfg.cells() {
        let instance = gen_instance(&cfg.spec(floors, tf, n), seed)?;
        for name in &cfg.variants {
            let mut config = SolverConfig::variant(name)
                .ok_or_else(|| GenError::Parameters(format!("unknown variant {name}")))?;
            config.time_limit = cfg.time_limit;
            config.mdd_node_cap = cfg.mdd_node_cap;
            config.seed = seed;
            let (solved, soc, stats) = match solve(&instance, config) {
                Ok(s) => (true, Some(s.soc), s.stats),
                Err(e) => (false, None, e.stats().clone()),
            };
            let record = ResultRecord {
                experiment: cfg.experiment.clone(),
                variant: name.clone(),
                agents: n,
                floors,
                tfloor: tf,
                seed,
                solved,
                soc,
                runtime_ms: stats.runtime.as_secs_f64() * 1000.0,
                expanded: stats.expanded,
                generated: stats.generated,
                mdde_time_fraction: stats.mdde_time_fraction,
            };
            progress(&record);
            out.push(record);
        }
    }
    Ok(out)
}

pub fn run_suite(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>, GenError> {
    run_suite_with(cfg, |_| {})
}

/// Writes records as CSV with the standard header.
pub fn write_csv<W: io::Write>(records: &[ResultRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if records.is_empty() {
        w.write_record([
            "experiment", "variant", "N", "floors", "tfloor", "seed", "solved", "soc", "runtime_ms", "expanded",
            "generated", "mdde_time_fraction",
        ])?;
    }
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Success rate and expansion statistics of one (variant, N, floors,
/// t_floor) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub experiment: String,
    pub variant: String,
    pub agents: usize,
    pub floors: u16,
    pub tfloor: Time,
    pub runs: usize,
    pub solved: usize,
    /// min, mean, max expansions over solved runs
    pub expanded: Option<(u64, f64, u64)>,
    pub mean_mdde_fraction: f64,
}

impl CellSummary {
    pub fn success_rate(&self) -> f64 {
        if self.runs == 0 {
            0.0
        } else {
            self.solved as f64 / self.runs as f64
        }
    }
}

/// Groups records by cell, keeping first-appearance order.
pub fn summarize(records: &[ResultRecord]) -> Vec<CellSummary> {
    let mut out: Vec<CellSummary> = Vec::new();
    let mut sums: Vec<(u64, f64)> = Vec::new();
    for r in records {
        let pos = out.iter().position(|c| {
            c.experiment == r.experiment
                && c.variant == r.variant
                && c.agents == r.agents
                && c.floors == r.floors
                && c.tfloor == r.tfloor
        });
        let i = pos.unwrap_or_else(|| {
            out.push(CellSummary {
                experiment: r.experiment.clone(),
                variant: r.variant.clone(),
                agents: r.agents,
                floors: r.floors,
                tfloor: r.tfloor,
                runs: 0,
                solved: 0,
                expanded: None,
                mean_mdde_fraction: 0.0,
            });
            sums.push((0, 0.0));
            out.len() - 1
        });
        let cell = &mut out[i];
        cell.runs += 1;
        sums[i].1 += r.mdde_time_fraction;
        if r.solved {
            cell.solved += 1;
            sums[i].0 += r.expanded;
            cell.expanded = Some(match cell.expanded {
                None => (r.expanded, 0.0, r.expanded),
                Some((lo, _, hi)) => (lo.min(r.expanded), 0.0, hi.max(r.expanded)),
            });
        }
    }
    for (cell, (total, frac)) in out.iter_mut().zip(sums) {
        if let Some((lo, _, hi)) = cell.expanded {
            cell.expanded = Some((lo, total as f64 / cell.solved as f64, hi));
        }
        cell.mean_mdde_fraction = frac / cell.runs as f64;
    }
    out
}

/// Plain-text table of [`summarize`] output.
pub fn format_summary(cells: &[CellSummary]) -> String {
    let mut s = format!(
        "{:<12} {:<12} {:>3} {:>6} {:>6} {:>8} {:>8} {:>10} {:>8} {:>6}\n",
        "experiment", "variant", "N", "floors", "tfloor", "success", "min_exp", "mean_exp", "max_exp", "mdde"
    );
    for c in cells {
        let (lo, mean, hi) = match c.expanded {
            Some((lo, mean, hi)) => (lo.to_string(), format!("{mean:.1}"), hi.to_string()),
            None => ("-".into(), "-".into(), "-".into()),
        };
        s.push_str(&format!(
            "{:<12} {:<12} {:>3} {:>6} {:>6} {:>8.2} {:>8} {:>10} {:>8} {:>6.3}\n",
            c.experiment,
            c.variant,
            c.agents,
            c.floors,
            c.tfloor,
            c.success_rate(),
            lo,
            mean,
            hi,
            c.mean_mdde_fraction
        ));
    }
    s
}
