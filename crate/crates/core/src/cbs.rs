//! Conflict-based search over the constraint tree, with elevator conflicts,
//! range branching and MDD-E based conflict selection and bypassing.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap};
use std::fmt;
use std::sync::Arc;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::constraint::{Constraint, ConstraintSet};
use crate::elevator::{
    detect_elevator_conflicts, ec_constraints, occupancy_constraints, point_boarding_constraints, ElevatorConflict,
};
use crate::mdd::{JointMdd, JointMode, MddE};
use crate::model::{Agent, Instance, MultiFloorGraph, Time, Vertex};
use crate::path::Path;
use crate::sipp::Planner;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Conflict {
    /// Both agents at `vertex` at `time`.
    Vertex { agents: (usize, usize), vertex: Vertex, time: Time },
    /// The first agent moves `from -> to` while the second moves `to -> from`,
    /// leaving at `time`.
    Edge { agents: (usize, usize), from: Vertex, to: Vertex, time: Time },
    Elevator(ElevatorConflict),
}

impl Conflict {
    pub fn time(&self) -> Time {
        match self {
            Conflict::Vertex { time, .. } | Conflict::Edge { time, .. } => *time,
            Conflict::Elevator(c) => c.time(),
        }
    }

    /// The two agents, smaller id first.
    pub fn agents(&self) -> (usize, usize) {
        match self {
            Conflict::Vertex { agents, .. } | Conflict::Edge { agents, .. } => *agents,
            Conflict::Elevator(c) => c.agents(),
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Conflict::Elevator(ElevatorConflict::Boarding { .. }) => 0,
            Conflict::Elevator(ElevatorConflict::DoorOccupancy { .. }) => 1,
            Conflict::Vertex { .. } => 2,
            Conflict::Edge { .. } => 3,
        }
    }

    pub fn is_boarding(&self) -> bool {
        matches!(self, Conflict::Elevator(ElevatorConflict::Boarding { .. }))
    }
}

impl Ord for Conflict {
    fn cmp(&self, other: &Self) -> Ordering {
        let key = |c: &Conflict| (c.time(), c.rank(), c.agents());
        key(self).cmp(&key(other)).then_with(|| match (self, other) {
            (Conflict::Vertex { vertex: a, .. }, Conflict::Vertex { vertex: b, .. }) => a.cmp(b),
            (Conflict::Edge { from: a, to: x, .. }, Conflict::Edge { from: b, to: y, .. }) => (a, x).cmp(&(b, y)),
            (Conflict::Elevator(a), Conflict::Elevator(b)) => a.cmp(b),
            _ => Ordering::Equal,
        })
    }
}

impl PartialOrd for Conflict {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Conflict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Conflict::Vertex { agents: (a, b), vertex, time } => write!(f, "vertex {a} {b} {vertex} t={time}"),
            Conflict::Edge { agents: (a, b), from, to, time } => write!(f, "edge {a} {b} {from}-{to} t={time}"),
            Conflict::Elevator(ElevatorConflict::Boarding { first, second }) => write!(
                f,
                "boarding {} {} elevator {} t={} (boards at {} and {})",
                first.agent,
                second.agent,
                first.elevator,
                self.time(),
                first.board_time,
                second.board_time
            ),
            Conflict::Elevator(ElevatorConflict::DoorOccupancy { rider, occupier, door, time }) => write!(
                f,
                "occupancy {} {} elevator {} {door} t={time}",
                rider.agent, occupier, rider.elevator
            ),
        }
    }
}

/// Vertex and edge conflicts (with goal parking) plus elevator conflicts,
/// sorted by time, then kind, then agent pair.
pub fn find_all_conflicts(paths: &[Path], graph: &MultiFloorGraph) -> Vec<Conflict> {
    let horizon = paths.iter().map(Path::cost).max().unwrap_or(0);
    let timelines: Vec<Vec<Option<Vertex>>> = paths.iter().map(|p| p.timeline(horizon + 1)).collect();
    let mut out = Vec::new();
    let mut at: Vec<(Vertex, usize)> = Vec::with_capacity(paths.len());
    let mut moves: HashMap<(Vertex, Vertex), usize> = HashMap::new();
    for t in 0..=horizon {
        at.clear();
        at.extend(timelines.iter().enumerate().filter_map(|(i, tl)| tl[t as usize].map(|v| (v, i))));
        at.sort();
        for (n, &(v, i)) in at.iter().enumerate() {
            for &(u, j) in &at[n + 1..] {
                if u != v {
                    break;
                }
                out.push(Conflict::Vertex { agents: (i.min(j), i.max(j)), vertex: v, time: t });
            }
        }
        if t == horizon {
            break;
        }
        moves.clear();
        for (i, tl) in timelines.iter().enumerate() {
            if let (Some(x), Some(y)) = (tl[t as usize], tl[t as usize + 1]) {
                if x != y && x.floor == y.floor {
                    if let Some(&j) = moves.get(&(y, x)) {
                        let (from, to) = if j < i { (y, x) } else { (x, y) };
                        out.push(Conflict::Edge { agents: (i.min(j), i.max(j)), from, to, time: t });
                    }
                    moves.insert((x, y), i);
                }
            }
        }
    }
    out.extend(detect_elevator_conflicts(paths, graph).into_iter().map(Conflict::Elevator));
    out.sort();
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum PathError {
    #[error("agent {agent}: path is empty")]
    Empty { agent: usize },
    #[error("agent {agent}: path does not start at its start vertex at time 0")]
    WrongStart { agent: usize },
    #[error("agent {agent}: path does not end at its goal")]
    WrongGoal { agent: usize },
    #[error("agent {agent}: illegal move at step {step}")]
    IllegalMove { agent: usize, step: usize },
    #[error("agent {agent}: elevator use does not match the one-ride rule")]
    BadRide { agent: usize },
    #[error("expected {expected} paths, got {got}")]
    AgentCount { expected: usize, got: usize },
}

/// Checks that `path` is a legal single-agent path for `agent`.
pub fn check_path(agent: &Agent, path: &Path, graph: &MultiFloorGraph) -> Result<(), PathError> {
    let id = agent.id;
    let first = path.steps.first().ok_or(PathError::Empty { agent: id })?;
    if first.vertex != agent.start || first.time != 0 {
        return Err(PathError::WrongStart { agent: id });
    }
    if path.goal() != agent.goal {
        return Err(PathError::WrongGoal { agent: id });
    }
    let mut ride_runs = 0;
    let mut riding = false;
    let mut ride_elevator = None;
    for (n, w) in path.steps.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        let illegal = PathError::IllegalMove { agent: id, step: n + 1 };
        if !graph.contains(b.vertex) || !graph.is_free(b.vertex) {
            return Err(illegal);
        }
        if a.vertex.floor == b.vertex.floor {
            riding = false;
            let adjacent = a.vertex == b.vertex || graph.floor_neighbors(a.vertex).any(|u| u == b.vertex);
            if b.time != a.time + 1 || !adjacent {
                return Err(illegal);
            }
            continue;
        }
        let (Some(k), Some(k2)) = (graph.elevator_at(a.vertex), graph.elevator_at(b.vertex)) else {
            return Err(illegal);
        };
        if k != k2 || a.vertex.floor.abs_diff(b.vertex.floor) != 1 || b.time != a.time + graph.elevator(k).t_floor {
            return Err(illegal);
        }
        if !riding {
            ride_runs += 1;
            riding = true;
        }
        if ride_elevator.is_some_and(|e| e != k) {
            return Err(PathError::BadRide { agent: id });
        }
        ride_elevator = Some(k);
        let upward = agent.goal_floor() > agent.start_floor();
        if (b.vertex.floor > a.vertex.floor) != upward {
            return Err(PathError::BadRide { agent: id });
        }
    }
    let rides = ride_runs > 0;
    if ride_runs > 1 || rides != agent.needs_elevator() {
        return Err(PathError::BadRide { agent: id });
    }
    Ok(())
}

/// Every conflict of a joint path, after checking each path is legal.
pub fn validate(instance: &Instance, paths: &[Path]) -> Result<Vec<Conflict>, PathError> {
    if paths.len() != instance.agents.len() {
        return Err(PathError::AgentCount { expected: instance.agents.len(), got: paths.len() });
    }
    for (a, p) in instance.agents.iter().zip(paths) {
        check_path(a, p, &instance.graph)?;
    }
    Ok(find_all_conflicts(paths, &instance.graph))
}

/// Solver variant and limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Range boarding bans instead of single-timestep bans.
    pub ec_enabled: bool,
    /// MDD-E conflict selection and bypassing.
    pub mdde_enabled: bool,
    pub time_limit: Duration,
    pub mdd_node_cap: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            ec_enabled: true,
            mdde_enabled: true,
            time_limit: Duration::from_secs(60),
            mdd_node_cap: 200_000,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub const VARIANTS: [&'static str; 4] = ["cbs", "cbs+ec", "cbs+mdde", "cbs+ec+mdde"];

    /// Parses one of [`Self::VARIANTS`].
    pub fn variant(name: &str) -> Option<Self> {
        let (ec_enabled, mdde_enabled) = match name {
            "cbs" => (false, false),
            "cbs+ec" => (true, false),
            "cbs+mdde" => (false, true),
            "cbs+ec+mdde" => (true, true),
            _ => return None,
        };
        Some(SolverConfig { ec_enabled, mdde_enabled, ..Self::default() })
    }

    pub fn variant_name(&self) -> &'static str {
        match (self.ec_enabled, self.mdde_enabled) {
            (false, false) => "cbs",
            (true, false) => "cbs+ec",
            (false, true) => "cbs+mdde",
            (true, true) => "cbs+ec+mdde",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveStats {
    /// Constraint-tree nodes popped and expanded (branched or bypassed).
    pub expanded: u64,
    /// Constraint-tree nodes pushed, including the root and re-queued nodes.
    pub generated: u64,
    /// Share of the run spent building and querying decision diagrams.
    pub mdde_time_fraction: f64,
    pub runtime: Duration,
    pub solved: bool,
    /// Expansions that branched on an overlapping-ride conflict.
    pub boarding_branchings: u64,
    pub occupancy_branchings: u64,
    pub bypasses: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub paths: Vec<Path>,
    pub soc: u64,
    pub stats: SolveStats,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("time limit reached")]
    Timeout(SolveStats),
    #[error("no solution exists")]
    Infeasible(SolveStats),
}

impl SolveError {
    pub fn stats(&self) -> &SolveStats {
        match self {
            SolveError::Timeout(s) | SolveError::Infeasible(s) => s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cardinality {
    Cardinal,
    SemiCardinal,
    NonCardinal,
}

/// The constraints each side of a branch on `c` receives.
pub fn new_constraints(c: &Conflict, config: &SolverConfig) -> [(usize, Constraint); 2] {
    match *c {
        Conflict::Vertex { agents: (a, b), vertex, time } => {
            [(a, Constraint::Vertex { vertex, time }), (b, Constraint::Vertex { vertex, time })]
        }
        Conflict::Edge { agents: (a, b), from, to, time } => [
            (a, Constraint::Edge { from, to, time }),
            (b, Constraint::Edge { from: to, to: from, time }),
        ],
        Conflict::Elevator(ref e @ ElevatorConflict::Boarding { .. }) => {
            if config.ec_enabled {
                ec_constraints(e)
            } else {
                point_boarding_constraints(e)
            }
        }
        Conflict::Elevator(ref e @ ElevatorConflict::DoorOccupancy { .. }) => occupancy_constraints(e),
    }
}

#[derive(Debug, Clone)]
struct CtNode {
    paths: Vec<Arc<Path>>,
    constraints: Vec<Arc<ConstraintSet>>,
    g: u64,
    conflicts: Vec<Conflict>,
    seq: u64,
}

impl CtNode {
    fn key(&self) -> (u64, usize, u64) {
        (self.g, self.conflicts.len(), self.seq)
    }
}

struct Open(CtNode);

impl PartialEq for Open {
    fn eq(&self, other: &Self) -> bool {
        self.0.key() == other.0.key()
    }
}

impl Eq for Open {}

impl Ord for Open {
    fn cmp(&self, other: &Self) -> Ordering {
        Reverse(self.0.key()).cmp(&Reverse(other.0.key()))
    }
}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// One branching decision, recorded when branch logging is on.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchRecord {
    pub conflict: Conflict,
    pub children: Vec<(usize, Constraint)>,
}

/// High-level search state for one instance.
pub struct Solver<'a> {
    instance: &'a Instance,
    config: SolverConfig,
    planners: Vec<Planner<'a>>,
    stats: SolveStats,
    mdd_time: Duration,
    seq: u64,
    log: Option<Vec<BranchRecord>>,
}

impl<'a> Solver<'a> {
    pub fn new(instance: &'a Instance, config: SolverConfig) -> Self {
        let planners = instance.agents.iter().map(|a| Planner::new(&instance.graph, *a)).collect();
        Solver {
            instance,
            config,
            planners,
            stats: SolveStats::default(),
            mdd_time: Duration::ZERO,
            seq: 0,
            log: None,
        }
    }

    /// Records every branching in [`Solver::branch_log`].
    pub fn with_branch_log(mut self) -> Self {
        self.log = Some(Vec::new());
        self
    }

    pub fn branch_log(&self) -> &[BranchRecord] {
        self.log.as_deref().unwrap_or(&[])
    }

    fn graph(&self) -> &'a MultiFloorGraph {
        &self.instance.graph
    }

    fn make_node(&mut self, paths: Vec<Arc<Path>>, constraints: Vec<Arc<ConstraintSet>>) -> CtNode {
        let plain: Vec<Path> = paths.iter().map(|p| (**p).clone()).collect();
        let conflicts = find_all_conflicts(&plain, self.graph());
        let g = paths.iter().map(|p| p.cost() as u64).sum();
        self.seq += 1;
        CtNode { paths, constraints, g, conflicts, seq: self.seq }
    }

    pub fn solve(&mut self) -> Result<Solution, SolveError> {
        let started = Instant::now();
        let result = self.search(started);
        self.stats.runtime = started.elapsed();
        let total = self.stats.runtime.as_secs_f64();
        self.stats.mdde_time_fraction =
            if total > 0.0 { (self.mdd_time.as_secs_f64() / total).clamp(0.0, 1.0) } else { 0.0 };
        tracing::debug!(
            variant = self.config.variant_name(),
            expanded = self.stats.expanded,
            generated = self.stats.generated,
            solved = result.is_ok(),
            "search finished"
        );
        match result {
            Ok(node) => {
                self.stats.solved = true;
                Ok(Solution {
                    paths: node.paths.iter().map(|p| (**p).clone()).collect(),
                    soc: node.g,
                    stats: self.stats.clone(),
                })
            }
            Err(timeout) => {
                if timeout {
                    Err(SolveError::Timeout(self.stats.clone()))
                } else {
                    Err(SolveError::Infeasible(self.stats.clone()))
                }
            }
        }
    }

    /// `Err(true)` on timeout, `Err(false)` when the tree is exhausted.
    fn search(&mut self, started: Instant) -> Result<CtNode, bool> {
        let empty = Arc::new(ConstraintSet::new());
        let mut paths = Vec::with_capacity(self.planners.len());
        for p in &self.planners {
            paths.push(Arc::new(p.plan(&empty).ok_or(false)?));
        }
        let root = self.make_node(paths, vec![empty; self.planners.len()]);
        let mut open = BinaryHeap::new();
        open.push(Open(root));
        self.stats.generated = 1;

        while let Some(Open(mut node)) = open.pop() {
            if started.elapsed() > self.config.time_limit {
                return Err(true);
            }
            if node.conflicts.is_empty() {
                return Ok(node);
            }
            self.stats.expanded += 1;

            let conflict = if self.config.mdde_enabled {
                let clock = Instant::now();
                let picked = self.select_and_bypass(&mut node, started);
                self.mdd_time += clock.elapsed();
                match picked {
                    Selection::Bypassed => {
                        self.stats.bypasses += 1;
                        self.stats.generated += 1;
                        open.push(Open(node));
                        continue;
                    }
                    Selection::Branch(c) => c,
                    Selection::Timeout => return Err(true),
                }
            } else {
                node.conflicts[0]
            };

            match conflict {
                Conflict::Elevator(ElevatorConflict::Boarding { .. }) => self.stats.boarding_branchings += 1,
                Conflict::Elevator(ElevatorConflict::DoorOccupancy { .. }) => self.stats.occupancy_branchings += 1,
                _ => {}
            }
            let sides = new_constraints(&conflict, &self.config);
            if let Some(log) = &mut self.log {
                log.push(BranchRecord { conflict, children: sides.to_vec() });
            }
            for (agent, c) in sides {
                let mut omega = (*node.constraints[agent]).clone();
                if !omega.add(c) {
                    continue;
                }
                let Some(path) = self.planners[agent].plan(&omega) else { continue };
                let mut paths = node.paths.clone();
                let mut constraints = node.constraints.clone();
                paths[agent] = Arc::new(path);
                constraints[agent] = Arc::new(omega);
                let child = self.make_node(paths, constraints);
                self.stats.generated += 1;
                open.push(Open(child));
            }
        }
        Err(false)
    }

    fn select_and_bypass(&mut self, node: &mut CtNode, started: Instant) -> Selection {
        let mut mdds: HashMap<usize, Option<MddE>> = HashMap::new();
        let mut semi = None;
        let mut non = None;
        let mut chosen = None;
        for &c in &node.conflicts {
            if started.elapsed() > self.config.time_limit {
                return Selection::Timeout;
            }
            let kind = self.classify_with(node, &c, &mut mdds);
            match kind {
                Cardinality::Cardinal => {
                    chosen = Some(c);
                    break;
                }
                Cardinality::SemiCardinal => {
                    semi.get_or_insert(c);
                }
                Cardinality::NonCardinal => {
                    non.get_or_insert(c);
                }
            }
        }
        let Some(c) = chosen.or(semi).or(non) else { return Selection::Branch(node.conflicts[0]) };
        if chosen.is_none() {
            let (i, j) = c.agents();
            for (a, b) in [(i, j), (j, i)] {
                let Some(Some(mdd)) = mdds.get(&a) else { continue };
                if let Some(path) = self.bypass_with(node, mdd, b) {
                    let mut paths = node.paths.clone();
                    paths[a] = Arc::new(path);
                    let plain: Vec<Path> = paths.iter().map(|p| (**p).clone()).collect();
                    let conflicts = find_all_conflicts(&plain, self.graph());
                    if conflicts.len() < node.conflicts.len() {
                        node.paths = paths;
                        node.conflicts = conflicts;
                        self.seq += 1;
                        node.seq = self.seq;
                        return Selection::Bypassed;
                    }
                }
            }
        }
        Selection::Branch(c)
    }

    fn mdd_for<'m>(&self, node: &CtNode, agent: usize, cache: &'m mut HashMap<usize, Option<MddE>>) -> Option<&'m MddE> {
        cache
            .entry(agent)
            .or_insert_with(|| {
                let cost = node.paths[agent].cost();
                // too large counts as unavoidable
                MddE::build(&self.planners[agent], cost, &node.constraints[agent], self.config.mdd_node_cap).ok()
            })
            .as_ref()
    }

    fn classify_with(&self, node: &CtNode, c: &Conflict, cache: &mut HashMap<usize, Option<MddE>>) -> Cardinality {
        let mut avoidable = 0;
        for (agent, constraint) in new_constraints(c, &self.config) {
            let Some(mdd) = self.mdd_for(node, agent, cache) else { continue };
            if mdd.has_path_satisfying(&ConstraintSet::new().with([constraint])) {
                avoidable += 1;
            }
        }
        match avoidable {
            0 => Cardinality::Cardinal,
            1 => Cardinality::SemiCardinal,
            _ => Cardinality::NonCardinal,
        }
    }

    /// A same-cost path for the owner of `mdd` that has no conflict with
    /// agent `other`, preferring fewer clashes with everybody else.
    fn bypass_with(&self, node: &CtNode, mdd: &MddE, other: usize) -> Option<Path> {
        let graph = self.graph();
        let me = mdd.agent().id;
        let chain = MddE::from_path(&self.instance.agents[other], &node.paths[other], graph);
        let joint = JointMdd::build(mdd, &chain, graph, JointMode::Elevator, self.config.mdd_node_cap).ok()?;
        let rest: Vec<&Arc<Path>> =
            node.paths.iter().enumerate().filter(|&(k, _)| k != me && k != other).map(|(_, p)| p).collect();
        let path = joint.extract_first(mdd, |t, pos| {
            let Some(v) = pos else { return 0 };
            rest.iter().filter(|p| p.position_at(t) == Some(v)).count() as u32
        })?;
        (path != *node.paths[me]).then_some(path)
    }

    /// Classification of `c` at the given node state, for inspection.
    pub fn classify(&self, paths: &[Path], constraints: &[ConstraintSet], c: &Conflict) -> Cardinality {
        let node = CtNode {
            paths: paths.iter().cloned().map(Arc::new).collect(),
            constraints: constraints.iter().cloned().map(Arc::new).collect(),
            g: 0,
            conflicts: Vec::new(),
            seq: 0,
        };
        self.classify_with(&node, c, &mut HashMap::new())
    }

    /// A bypass for conflict `c`, if one side can take an equal-cost path
    /// that has no conflict with the other side.
    pub fn find_bypass(&self, paths: &[Path], constraints: &[ConstraintSet], c: &Conflict) -> Option<(usize, Path)> {
        let node = CtNode {
            paths: paths.iter().cloned().map(Arc::new).collect(),
            constraints: constraints.iter().cloned().map(Arc::new).collect(),
            g: 0,
            conflicts: Vec::new(),
            seq: 0,
        };
        let mut cache = HashMap::new();
        let (i, j) = c.agents();
        for (a, b) in [(i, j), (j, i)] {
            let Some(mdd) = self.mdd_for(&node, a, &mut cache) else { continue };
            let mdd = mdd.clone();
            if let Some(p) = self.bypass_with(&node, &mdd, b) {
                return Some((a, p));
            }
        }
        None
    }
}

enum Selection {
    Branch(Conflict),
    Bypassed,
    Timeout,
}

/// Solves `instance` with the given variant.
pub fn solve(instance: &Instance, config: SolverConfig) -> Result<Solution, SolveError> {
    Solver::new(instance, config).solve()
}
