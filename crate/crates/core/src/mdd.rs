//! Multi-valued decision diagrams over timed states that remember which
//! elevator ride (if any) led there, joint diagrams for agent pairs, and the
//! queries the high-level search makes on them.

use std::collections::HashMap;

use thiserror::Error;

use crate::constraint::ConstraintSet;
use crate::elevator::{ride_duration, usages_overlap, ElevatorUsage};
use crate::model::{Agent, MultiFloorGraph, Time, Vertex};
use crate::path::{Path, TimedVertex};
use crate::sipp::Planner;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum MddError {
    #[error("decision diagram exceeds {cap} nodes")]
    TooLarge { cap: usize },
}

/// A ride label: elevator and boarding time.
pub type RideLabel = Option<(usize, Time)>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MddNode {
    /// Current vertex; while inside the cabin, the last door passed.
    pub vertex: Vertex,
    pub time: Time,
    /// Ride taken so far (set from the step after boarding onwards).
    pub ride: RideLabel,
    pub in_cabin: bool,
}

impl MddNode {
    pub fn position(&self) -> Option<Vertex> {
        (!self.in_cabin).then_some(self.vertex)
    }
}

/// All paths of one agent with cost exactly `cost`, layered by time.
#[derive(Debug, Clone)]
pub struct MddE {
    agent: Agent,
    cost: Time,
    levels: Vec<Vec<MddNode>>,
    /// `succ[t][n]`: indices into level `t + 1`.
    succ: Vec<Vec<Vec<u32>>>,
}

fn usage_of(agent: &Agent, graph: &MultiFloorGraph, ride: RideLabel) -> Option<ElevatorUsage> {
    ride.map(|(k, ts)| ElevatorUsage {
        agent: agent.id,
        elevator: k,
        board_time: ts,
        board_floor: agent.start_floor(),
        exit_floor: agent.goal_floor(),
        t_floor: graph.elevator(k).t_floor,
    })
}

/// Where a rider is `t` steps into the ride: the last door passed and
/// whether it is between doors.
fn ride_position(graph: &MultiFloorGraph, agent: &Agent, k: usize, ts: Time, t: Time) -> (Vertex, bool) {
    let tf = graph.elevator(k).t_floor;
    let passed = ((t - ts) / tf) as u16;
    let floor = if agent.goal_floor() > agent.start_floor() {
        agent.start_floor() + passed
    } else {
        agent.start_floor() - passed
    };
    (graph.door(k, floor), !(t - ts).is_multiple_of(tf))
}

impl MddE {
    /// Builds the diagram of all cost-`cost` paths satisfying `constraints`.
    /// An empty diagram (no levels) means there is no such path.
    pub fn build(planner: &Planner<'_>, cost: Time, constraints: &ConstraintSet, node_cap: usize) -> Result<Self, MddError> {
        let graph = planner.graph();
        let agent = *planner.agent();
        let exit_time = |ride: RideLabel| {
            ride.map(|(k, ts)| ts + ride_duration(graph, k, agent.start_floor(), agent.goal_floor()))
        };
        let remaining = |n: &MddNode| -> Option<Time> {
            match exit_time(n.ride) {
                Some(exit) if n.time < exit => {
                    let (k, _) = n.ride.unwrap();
                    let door = graph.door(k, agent.goal_floor());
                    planner.heuristic(door, true).map(|h| h + exit - n.time)
                }
                _ => planner.heuristic(n.vertex, n.ride.is_some()),
            }
        };

        let root = MddNode { vertex: agent.start, time: 0, ride: None, in_cabin: false };
        if constraints.vertex_banned(agent.start, 0) || remaining(&root).is_none_or(|h| h > cost) {
            return Ok(Self::empty(agent, cost));
        }
        let mut levels = vec![vec![root]];
        let mut succ: Vec<Vec<Vec<u32>>> = Vec::new();
        let mut total = 1usize;

        for t in 0..cost {
            let mut next: Vec<MddNode> = Vec::new();
            let mut index: HashMap<MddNode, u32> = HashMap::new();
            let mut edges = Vec::with_capacity(levels[t as usize].len());
            for node in &levels[t as usize] {
                let mut out = Vec::new();
                let mut candidates = Vec::new();
                match exit_time(node.ride) {
                    Some(exit) if t < exit => {
                        let (k, ts) = node.ride.unwrap();
                        let (vertex, in_cabin) = ride_position(graph, &agent, k, ts, t + 1);
                        candidates.push(MddNode { vertex, time: t + 1, ride: node.ride, in_cabin });
                    }
                    _ => {
                        let v = node.vertex;
                        if !constraints.vertex_banned(v, t + 1) {
                            candidates.push(MddNode { vertex: v, time: t + 1, ride: node.ride, in_cabin: false });
                        }
                        for u in graph.floor_neighbors(v) {
                            if !constraints.vertex_banned(u, t + 1) && !constraints.edge_banned(v, u, t) {
                                candidates.push(MddNode { vertex: u, time: t + 1, ride: node.ride, in_cabin: false });
                            }
                        }
                        let boardable = node.ride.is_none() && agent.needs_elevator() && v.floor == agent.start_floor();
                        if let (true, Some(k)) = (boardable, graph.elevator_at(v)) {
                            let visits = crate::elevator::ride_steps(graph, k, v.floor, agent.goal_floor(), t);
                            if !constraints.boarding_banned(k, v.floor, t)
                                && visits.iter().all(|s| !constraints.vertex_banned(s.vertex, s.time))
                            {
                                let (vertex, in_cabin) = ride_position(graph, &agent, k, t, t + 1);
                                candidates.push(MddNode { vertex, time: t + 1, ride: Some((k, t)), in_cabin });
                            }
                        }
                    }
                }
                for cand in candidates {
                    if remaining(&cand).is_none_or(|h| t + 1 + h > cost) {
                        continue;
                    }
                    let idx = *index.entry(cand).or_insert_with(|| {
                        next.push(cand);
                        (next.len() - 1) as u32
                    });
                    out.push(idx);
                }
                edges.push(out);
            }
            total += next.len();
            if total > node_cap {
                return Err(MddError::TooLarge { cap: node_cap });
            }
            succ.push(edges);
            levels.push(next);
        }

        // keep only nodes that reach a valid goal node
        let goal_ok = |n: &MddNode| {
            n.vertex == agent.goal
                && !n.in_cabin
                && exit_time(n.ride).is_none_or(|e| e <= cost)
                && n.ride.is_some() == agent.needs_elevator()
                && !constraints.vertex_banned_from(agent.goal, cost)
        };
        let mut alive: Vec<bool> = levels[cost as usize].iter().map(goal_ok).collect();
        let mut mdd = MddE { agent, cost, levels, succ };
        for t in (0..cost as usize).rev() {
            let keep: Vec<bool> =
                mdd.succ[t].iter().map(|out| out.iter().any(|&s| alive[s as usize])).collect();
            mdd.retain_level(t + 1, &alive);
            alive = keep;
        }
        if !alive[0] {
            return Ok(Self::empty(agent, cost));
        }
        Ok(mdd)
    }

    fn empty(agent: Agent, cost: Time) -> Self {
        MddE { agent, cost, levels: Vec::new(), succ: Vec::new() }
    }

    /// Drops the nodes of level `t` not marked in `keep`, fixing up edges.
    fn retain_level(&mut self, t: usize, keep: &[bool]) {
        let mut remap = vec![u32::MAX; keep.len()];
        let mut kept = Vec::new();
        for (i, n) in self.levels[t].iter().enumerate() {
            if keep[i] {
                remap[i] = kept.len() as u32;
                kept.push(*n);
            }
        }
        self.levels[t] = kept;
        for out in &mut self.succ[t - 1] {
            out.retain(|&s| keep[s as usize]);
            for s in out.iter_mut() {
                *s = remap[*s as usize];
            }
        }
        if t < self.succ.len() {
            let old = std::mem::take(&mut self.succ[t]);
            self.succ[t] = old.into_iter().zip(keep).filter(|(_, &k)| k).map(|(o, _)| o).collect();
        }
    }

    /// A single-path diagram following `path`.
    pub fn from_path(agent: &Agent, path: &Path, graph: &MultiFloorGraph) -> Self {
        let ride = path.usage(graph, agent.id).map(|u| (u.elevator, u.board_time));
        let mut levels = Vec::new();
        let mut last_door = agent.start;
        for t in 0..=path.cost() {
            let pos = path.position_at(t);
            if let Some(v) = pos {
                last_door = v;
            }
            let label = ride.filter(|&(_, ts)| t > ts);
            levels.push(vec![MddNode { vertex: last_door, time: t, ride: label, in_cabin: pos.is_none() }]);
        }
        let succ = (0..path.cost()).map(|_| vec![vec![0]]).collect();
        MddE { agent: *agent, cost: path.cost(), levels, succ }
    }

    pub fn agent(&self) -> &Agent {
        &self.agent
    }

    pub fn cost(&self) -> Time {
        self.cost
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn level(&self, t: Time) -> &[MddNode] {
        self.levels.get(t as usize).map_or(&[], Vec::as_slice)
    }

    pub fn node_count(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    /// Successors of node `n` at level `t`. Past the last level the agent
    /// rests on its goal node.
    fn successors<'a>(&'a self, t: Time, n: &'a u32) -> &'a [u32] {
        if t >= self.cost {
            std::slice::from_ref(n)
        } else {
            &self.succ[t as usize][*n as usize]
        }
    }

    /// Node `n` seen at time `t`, parking at the goal after the last level.
    fn node_at(&self, t: Time, n: u32) -> MddNode {
        let mut node = self.levels[t.min(self.cost) as usize][n as usize];
        node.time = t;
        node
    }

    /// Whether some path in the diagram also satisfies `extra`.
    pub fn has_path_satisfying(&self, extra: &ConstraintSet) -> bool {
        if self.is_empty() || extra.vertex_banned(self.agent.start, 0) {
            return false;
        }
        let mut reach = vec![true];
        for t in 0..self.cost {
            let level = &self.levels[t as usize + 1];
            let mut next = vec![false; level.len()];
            for (i, node) in self.levels[t as usize].iter().enumerate() {
                if !reach[i] {
                    continue;
                }
                for &s in &self.succ[t as usize][i] {
                    let to = level[s as usize];
                    if to.position().is_some_and(|v| extra.vertex_banned(v, t + 1)) {
                        continue;
                    }
                    if !node.in_cabin && !to.in_cabin && node.vertex.floor == to.vertex.floor
                        && node.vertex != to.vertex && extra.edge_banned(node.vertex, to.vertex, t)
                    {
                        continue;
                    }
                    if let (None, Some((k, ts))) = (node.ride, to.ride) {
                        if extra.boarding_banned(k, node.vertex.floor, ts) {
                            continue;
                        }
                    }
                    next[s as usize] = true;
                }
            }
            reach = next;
        }
        reach.iter().any(|&r| r) && !extra.vertex_banned_from(self.agent.goal, self.cost)
    }

    /// Every root-to-goal path, for small diagrams.
    pub fn paths(&self) -> Vec<Path> {
        let mut out = Vec::new();
        if self.is_empty() {
            return out;
        }
        let mut stack = vec![(0 as Time, 0u32, vec![self.levels[0][0]])];
        while let Some((t, n, trail)) = stack.pop() {
            if t == self.cost {
                out.push(nodes_to_path(&trail));
                continue;
            }
            for &s in self.successors(t, &n) {
                let mut next = trail.clone();
                next.push(self.levels[t as usize + 1][s as usize]);
                stack.push((t + 1, s, next));
            }
        }
        out.sort();
        out
    }
}

fn nodes_to_path(nodes: &[MddNode]) -> Path {
    Path::new(nodes.iter().filter(|n| !n.in_cabin).map(|n| TimedVertex::new(n.vertex, n.time)).collect())
}

/// Which pairwise conflicts the joint construction prunes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JointMode {
    /// Vertex and swap conflicts only.
    Plain,
    /// Also overlapping rides and door occupancy during a busy window.
    Elevator,
}

/// Conflict-free pairs of nodes from two diagrams, layered by time up to
/// the larger cost. The agent with the smaller cost is parked at its goal.
#[derive(Debug, Clone)]
pub struct JointMdd {
    depth: Time,
    levels: Vec<Vec<(u32, u32)>>,
    succ: Vec<Vec<Vec<u32>>>,
}

#[allow(clippy::too_many_arguments)]
fn transition_ok(
    graph: &MultiFloorGraph,
    mode: JointMode,
    (a_agent, a0, a1): (&Agent, MddNode, MddNode),
    (b_agent, b0, b1): (&Agent, MddNode, MddNode),
    t: Time,
) -> bool {
    if let (Some(x), Some(y)) = (a1.position(), b1.position()) {
        if x == y {
            return false;
        }
    }
    if let (Some(a_from), Some(a_to), Some(b_from), Some(b_to)) =
        (a0.position(), a1.position(), b0.position(), b1.position())
    {
        if a_from != a_to && a_from.floor == a_to.floor && a_from == b_to && a_to == b_from {
            return false;
        }
    }
    if mode == JointMode::Plain {
        return true;
    }
    let ua = usage_of(a_agent, graph, a1.ride);
    let ub = usage_of(b_agent, graph, b1.ride);
    if let (Some(ua), Some(ub)) = (ua, ub) {
        if ua.elevator == ub.elevator && usages_overlap(&ua, &ub) {
            return false;
        }
    }
    let occupied = |rider: Option<ElevatorUsage>, own: Option<ElevatorUsage>, at: [(MddNode, Time); 2]| {
        let Some(u) = rider else { return false };
        at.iter().any(|&(node, time)| {
            let Some(v) = node.position() else { return false };
            if graph.elevator_at(v) != Some(u.elevator) {
                return false;
            }
            if own.is_some_and(|o| o.elevator == u.elevator && o.rides_at(time)) {
                return false;
            }
            let (lo, hi) = u.door_window(v.floor);
            lo <= time && time <= hi
        })
    };
    !(occupied(ua, ub, [(b0, t), (b1, t + 1)]) || occupied(ub, ua, [(a0, t), (a1, t + 1)]))
}

impl JointMdd {
    pub fn build(a: &MddE, b: &MddE, graph: &MultiFloorGraph, mode: JointMode, pair_cap: usize) -> Result<Self, MddError> {
        let depth = a.cost.max(b.cost);
        let mut joint = JointMdd { depth, levels: Vec::new(), succ: Vec::new() };
        if a.is_empty() || b.is_empty() {
            return Ok(joint);
        }
        joint.levels.push(vec![(0, 0)]);
        let mut total = 1usize;
        for t in 0..depth {
            let mut next = Vec::new();
            let mut index: HashMap<(u32, u32), u32> = HashMap::new();
            let mut edges = Vec::new();
            for &(na, nb) in &joint.levels[t as usize] {
                let (a0, b0) = (a.node_at(t, na), b.node_at(t, nb));
                let mut out = Vec::new();
                for &sa in a.successors(t, &na) {
                    let a1 = a.node_at(t + 1, sa);
                    for &sb in b.successors(t, &nb) {
                        let b1 = b.node_at(t + 1, sb);
                        if !transition_ok(graph, mode, (&a.agent, a0, a1), (&b.agent, b0, b1), t) {
                            continue;
                        }
                        let idx = *index.entry((sa, sb)).or_insert_with(|| {
                            next.push((sa, sb));
                            (next.len() - 1) as u32
                        });
                        out.push(idx);
                    }
                }
                edges.push(out);
            }
            total += next.len();
            if total > pair_cap {
                return Err(MddError::TooLarge { cap: pair_cap });
            }
            joint.succ.push(edges);
            joint.levels.push(next);
        }
        // backward pruning of dead ends
        let mut alive = vec![true; joint.levels[depth as usize].len()];
        for t in (0..depth as usize).rev() {
            let keep: Vec<bool> = joint.succ[t].iter().map(|out| out.iter().any(|&s| alive[s as usize])).collect();
            let mut remap = vec![u32::MAX; alive.len()];
            let mut kept = Vec::new();
            for (i, p) in joint.levels[t + 1].iter().enumerate() {
                if alive[i] {
                    remap[i] = kept.len() as u32;
                    kept.push(*p);
                }
            }
            joint.levels[t + 1] = kept;
            for out in &mut joint.succ[t] {
                out.retain(|&s| alive[s as usize]);
                for s in out.iter_mut() {
                    *s = remap[*s as usize];
                }
            }
            if t + 1 < joint.succ.len() {
                let old = std::mem::take(&mut joint.succ[t + 1]);
                joint.succ[t + 1] = old.into_iter().zip(&alive).filter(|(_, &k)| k).map(|(o, _)| o).collect();
            }
            alive = keep;
        }
        if !alive[0] {
            joint.levels.clear();
            joint.succ.clear();
        }
        Ok(joint)
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn depth(&self) -> Time {
        self.depth
    }

    /// Node pairs at time `t`.
    pub fn level(&self, a: &MddE, b: &MddE, t: Time) -> Vec<(MddNode, MddNode)> {
        self.levels
            .get(t as usize)
            .map(|l| l.iter().map(|&(x, y)| (a.node_at(t, x), b.node_at(t, y))).collect())
            .unwrap_or_default()
    }

    pub fn pair_count(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    /// A path for the first agent through the joint diagram, minimizing the
    /// summed `penalty` of its positions over time.
    pub fn extract_first(&self, a: &MddE, penalty: impl Fn(Time, Option<Vertex>) -> u32) -> Option<Path> {
        if self.is_empty() {
            return None;
        }
        let depth = self.depth as usize;
        let mut best: Vec<Vec<u32>> = vec![Vec::new(); depth + 1];
        best[depth] = self.levels[depth]
            .iter()
            .map(|&(x, _)| penalty(self.depth, a.node_at(self.depth, x).position()))
            .collect();
        for t in (0..depth).rev() {
            best[t] = self.levels[t]
                .iter()
                .enumerate()
                .map(|(i, &(x, _))| {
                    let here = penalty(t as Time, a.node_at(t as Time, x).position());
                    let after = self.succ[t][i].iter().map(|&s| best[t + 1][s as usize]).min().unwrap_or(u32::MAX);
                    here.saturating_add(after)
                })
                .collect();
        }
        let mut trail = Vec::with_capacity(a.cost as usize + 1);
        let mut at = 0usize;
        for t in 0..=depth {
            let (x, _) = self.levels[t][at];
            if t as Time <= a.cost {
                trail.push(a.node_at(t as Time, x));
            }
            if t < depth {
                at = *self.succ[t][at].iter().min_by_key(|&&s| (best[t + 1][s as usize], s)).expect("live pair has a successor")
                    as usize;
            }
        }
        Some(nodes_to_path(&trail))
    }
}
