//! Safe-interval path planning for one agent under a [`ConstraintSet`].

use std::borrow::Cow;
use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap, VecDeque};

use crate::constraint::{ConstraintSet, FOREVER};
use crate::elevator::{ride_duration, ride_steps};
use crate::model::{Agent, MultiFloorGraph, Time, Vertex};
use crate::path::{Path, TimedVertex};

const UNREACHABLE: Time = Time::MAX;

/// Breadth-first distances from `source` over its floor, indexed by cell.
fn floor_distances(graph: &MultiFloorGraph, source: Vertex) -> Vec<Time> {
    let cell = |v: Vertex| v.y as usize * graph.width() as usize + v.x as usize;
    let mut dist = vec![UNREACHABLE; graph.cells_per_floor()];
    let mut queue = VecDeque::from([source]);
    dist[cell(source)] = 0;
    while let Some(v) = queue.pop_front() {
        let d = dist[cell(v)];
        for u in graph.floor_neighbors(v) {
            if dist[cell(u)] == UNREACHABLE {
                dist[cell(u)] = d + 1;
                queue.push_back(u);
            }
        }
    }
    dist
}

/// Safe intervals of `v`; the common unconstrained case does not allocate.
pub fn safe_intervals<'a>(constraints: &'a ConstraintSet, v: Vertex) -> Cow<'a, [(Time, Time)]> {
    const ALWAYS: &[(Time, Time)] = &[(0, FOREVER)];
    if constraints.has_vertex_bans(v) {
        Cow::Owned(constraints.safe_intervals(v))
    } else {
        Cow::Borrowed(ALWAYS)
    }
}

/// Single-agent planner. Holds the constraint-free distance tables for one
/// agent so repeated replanning under different constraint sets is cheap.
#[derive(Debug, Clone)]
pub struct Planner<'g> {
    graph: &'g MultiFloorGraph,
    agent: Agent,
    /// distance to goal, goal floor
    to_goal: Vec<Time>,
    /// lower bound to goal via the best elevator, start floor
    via_elevator: Vec<Time>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct State {
    vertex: Vertex,
    interval: usize,
    rode: bool,
}

#[derive(Debug, Clone, Copy)]
struct Node {
    state: State,
    g: Time,
    parent: Option<usize>,
    /// time the move into this node left the parent vertex
    depart: Time,
}

#[derive(PartialEq, Eq)]
struct OpenEntry {
    f: Time,
    g: Time,
    vertex: Vertex,
    interval: usize,
    rode: bool,
    node: usize,
}

impl Ord for OpenEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap is a max-heap: reverse f, prefer larger g, then vertex order
        (Reverse(self.f), self.g, Reverse(self.vertex), Reverse(self.interval), Reverse(self.rode), Reverse(self.node))
            .cmp(&(
                Reverse(other.f),
                other.g,
                Reverse(other.vertex),
                Reverse(other.interval),
                Reverse(other.rode),
                Reverse(other.node),
            ))
    }
}

impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<'g> Planner<'g> {
    pub fn new(graph: &'g MultiFloorGraph, agent: Agent) -> Self {
        let to_goal = floor_distances(graph, agent.goal);
        let mut via_elevator = vec![UNREACHABLE; graph.cells_per_floor()];
        if agent.needs_elevator() {
            for k in 0..graph.elevators().len() {
                let exit = graph.door(k, agent.goal_floor());
                let after = to_goal[Self::cell_of(graph, exit)];
                if after == UNREACHABLE {
                    continue;
                }
                let ride = ride_duration(graph, k, agent.start_floor(), agent.goal_floor());
                let to_door = floor_distances(graph, graph.door(k, agent.start_floor()));
                for (best, d) in via_elevator.iter_mut().zip(to_door) {
                    if d != UNREACHABLE {
                        *best = (*best).min(d + ride + after);
                    }
                }
            }
        }
        Planner { graph, agent, to_goal, via_elevator }
    }

    fn cell_of(graph: &MultiFloorGraph, v: Vertex) -> usize {
        v.y as usize * graph.width() as usize + v.x as usize
    }

    pub fn agent(&self) -> &Agent {
        &self.agent
    }

    pub fn graph(&self) -> &'g MultiFloorGraph {
        self.graph
    }

    /// Admissible lower bound on the remaining time from `v`, or `None` if
    /// the goal cannot be reached from there at all.
    pub fn heuristic(&self, v: Vertex, rode: bool) -> Option<Time> {
        let cell = Self::cell_of(self.graph, v);
        let h = if !self.agent.needs_elevator() || rode {
            if v.floor != self.agent.goal_floor() {
                return None;
            }
            self.to_goal[cell]
        } else {
            if v.floor != self.agent.start_floor() {
                return None;
            }
            self.via_elevator[cell]
        };
        (h != UNREACHABLE).then_some(h)
    }

    /// Constraint-free optimal cost.
    pub fn free_cost(&self) -> Option<Time> {
        self.heuristic(self.agent.start, false)
    }

    /// Minimum-cost path satisfying `constraints`, or `None` if none exists.
    pub fn plan(&self, constraints: &ConstraintSet) -> Option<Path> {
        let graph = self.graph;
        let agent = self.agent;
        let start_intervals = safe_intervals(constraints, agent.start);
        if start_intervals.first().is_none_or(|&(lo, _)| lo > 0) {
            return None;
        }
        let horizon = constraints.max_time();

        let mut nodes: Vec<Node> = Vec::new();
        let mut best: HashMap<State, Time> = HashMap::new();
        let mut open = BinaryHeap::new();

        let push = |nodes: &mut Vec<Node>, open: &mut BinaryHeap<OpenEntry>, best: &mut HashMap<State, Time>, node: Node| {
            if best.get(&node.state).is_some_and(|&g| g <= node.g) {
                return;
            }
            let Some(h) = self.heuristic(node.state.vertex, node.state.rode) else { return };
            best.insert(node.state, node.g);
            nodes.push(node);
            open.push(OpenEntry {
                f: node.g + h,
                g: node.g,
                vertex: node.state.vertex,
                interval: node.state.interval,
                rode: node.state.rode,
                node: nodes.len() - 1,
            });
        };

        let root = Node { state: State { vertex: agent.start, interval: 0, rode: false }, g: 0, parent: None, depart: 0 };
        push(&mut nodes, &mut open, &mut best, root);

        while let Some(entry) = open.pop() {
            let node = nodes[entry.node];
            let State { vertex: v, interval, rode } = node.state;
            if best.get(&node.state).is_some_and(|&g| g < node.g) {
                continue;
            }
            let intervals = safe_intervals(constraints, v);
            let end = intervals[interval].1;

            if v == agent.goal && end == FOREVER && rode == agent.needs_elevator() {
                return Some(self.reconstruct(&nodes, entry.node));
            }

            for u in graph.floor_neighbors(v) {
                let targets = safe_intervals(constraints, u);
                let last_arrival = end.saturating_add(1);
                for (j, &(lo, hi)) in targets.iter().enumerate() {
                    let mut arrive = lo.max(node.g + 1);
                    if arrive > hi || arrive > last_arrival {
                        if lo > last_arrival {
                            break;
                        }
                        continue;
                    }
                    while arrive <= hi && arrive <= last_arrival && constraints.edge_banned(v, u, arrive - 1) {
                        arrive += 1;
                    }
                    if arrive > hi || arrive > last_arrival {
                        continue;
                    }
                    let next = Node {
                        state: State { vertex: u, interval: j, rode },
                        g: arrive,
                        parent: Some(entry.node),
                        depart: arrive - 1,
                    };
                    push(&mut nodes, &mut open, &mut best, next);
                }
            }

            if rode || !agent.needs_elevator() || v.floor != agent.start_floor() {
                continue;
            }
            let Some(k) = graph.elevator_at(v) else { continue };
            let to_floor = agent.goal_floor();
            let last_depart = end.min(node.g.max(horizon.saturating_add(1)));
            let mut reached = Vec::new();
            let bans = constraints.boarding_bans(k, v.floor);
            let mut next = Some(node.g);
            while let Some(candidate) = next {
                let Some(depart) = bans.map_or(Some(candidate), |b| b.next_free(candidate)) else { break };
                if depart > last_depart {
                    break;
                }
                next = depart.checked_add(1);
                let visits = ride_steps(graph, k, v.floor, to_floor, depart);
                if visits.iter().any(|s| constraints.vertex_banned(s.vertex, s.time)) {
                    continue;
                }
                let exit = *visits.last().expect("ride covers at least one floor");
                let exit_intervals = safe_intervals(constraints, exit.vertex);
                let j = exit_intervals.partition_point(|&(_, hi)| hi < exit.time);
                if reached.contains(&j) {
                    continue;
                }
                reached.push(j);
                let next = Node {
                    state: State { vertex: exit.vertex, interval: j, rode: true },
                    g: exit.time,
                    parent: Some(entry.node),
                    depart,
                };
                push(&mut nodes, &mut open, &mut best, next);
            }
        }
        None
    }

    fn reconstruct(&self, nodes: &[Node], goal: usize) -> Path {
        let mut chain = vec![goal];
        while let Some(p) = nodes[*chain.last().unwrap()].parent {
            chain.push(p);
        }
        chain.reverse();
        let mut steps = vec![TimedVertex::new(self.agent.start, 0)];
        for pair in chain.windows(2) {
            let (from, to) = (nodes[pair[0]], nodes[pair[1]]);
            let v = from.state.vertex;
            for t in from.g + 1..=to.depart {
                steps.push(TimedVertex::new(v, t));
            }
            if from.state.rode == to.state.rode {
                steps.push(TimedVertex::new(to.state.vertex, to.g));
            } else {
                let k = self.graph.elevator_at(v).expect("rides start at a door");
                steps.extend(ride_steps(self.graph, k, v.floor, to.state.vertex.floor, to.depart));
            }
        }
        Path::new(steps)
    }
}

/// Convenience wrapper building a fresh [`Planner`].
pub fn plan(agent: &Agent, graph: &MultiFloorGraph, constraints: &ConstraintSet) -> Option<Path> {
    Planner::new(graph, *agent).plan(constraints)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::Constraint;
    use crate::model::{Elevator, FloorGrid};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use std::collections::HashSet;

    fn agent(start: Vertex, goal: Vertex) -> Agent {
        Agent { id: 0, start, goal }
    }

    /// Time-expanded breadth-first search, one layer per time step.
    fn brute_force(agent: &Agent, g: &MultiFloorGraph, c: &ConstraintSet, horizon: Time) -> Option<Time> {
        // rides make some arrivals land several layers ahead
        let mut layers: Vec<HashSet<(Vertex, bool)>> = vec![HashSet::new(); horizon as usize + 1];
        if c.vertex_banned(agent.start, 0) {
            return None;
        }
        layers[0].insert((agent.start, false));
        for t in 0..=horizon {
            let mut here: Vec<_> = layers[t as usize].iter().copied().collect();
            here.sort();
            for (v, rode) in here {
                if v == agent.goal && rode == agent.needs_elevator() && !c.vertex_banned_from(v, t) {
                    return Some(t);
                }
                if t == horizon {
                    continue;
                }
                let mut step_to = vec![v];
                step_to.extend(g.floor_neighbors(v));
                for u in step_to {
                    if c.vertex_banned(u, t + 1) || (u != v && c.edge_banned(v, u, t)) {
                        continue;
                    }
                    layers[t as usize + 1].insert((u, rode));
                }
                if rode || !agent.needs_elevator() {
                    continue;
                }
                let Some(k) = g.elevator_at(v) else { continue };
                if c.boarding_banned(k, v.floor, t) {
                    continue;
                }
                let tf = g.elevator(k).t_floor;
                let (lo, hi) = (v.floor.min(agent.goal.floor), v.floor.max(agent.goal.floor));
                let mut ok = true;
                let mut when = t;
                for f in lo..=hi {
                    if f == v.floor {
                        continue;
                    }
                    let n = f.abs_diff(v.floor) as Time;
                    if c.vertex_banned(g.door(k, f), t + n * tf) {
                        ok = false;
                    }
                    when = when.max(t + n * tf);
                }
                if ok && when <= horizon {
                    layers[when as usize].insert((g.door(k, agent.goal.floor), true));
                }
            }
        }
        None
    }

    fn two_floor(tf: Time) -> MultiFloorGraph {
        let e = Elevator { id: 0, x: 1, y: 0, t_floor: tf };
        MultiFloorGraph::uniform(2, FloorGrid::open(3, 1).unwrap(), vec![e]).unwrap()
    }

    #[test]
    fn open_grid_manhattan() {
        let g = MultiFloorGraph::uniform(1, FloorGrid::open(8, 8).unwrap(), vec![]).unwrap();
        let a = agent(Vertex::new(1, 0, 0), Vertex::new(1, 3, 3));
        let p = plan(&a, &g, &ConstraintSet::new()).unwrap();
        assert_eq!(p.cost(), 6);
        assert_eq!(p.steps.len(), 7);
    }

    #[test]
    fn ride_next_to_door() {
        let g = two_floor(3);
        let a = agent(Vertex::new(1, 0, 0), Vertex::new(2, 2, 0));
        let p = plan(&a, &g, &ConstraintSet::new()).unwrap();
        assert_eq!(p.cost(), 5);
        assert_eq!(brute_force(&a, &g, &ConstraintSet::new(), 30), Some(5));
        assert_eq!(p.usage(&g, 0).unwrap().board_time, 1);

        let banned = ConstraintSet::new().with([Constraint::Boarding { elevator: 0, floor: 1, from: 1, to: 3 }]);
        let p = plan(&a, &g, &banned).unwrap();
        assert_eq!(p.cost(), 8);
        assert_eq!(p.usage(&g, 0).unwrap().board_time, 4);
        assert_eq!(brute_force(&a, &g, &banned, 30), Some(8));
        assert!(banned.satisfied_by(&p, &g));
    }

    #[test]
    fn goal_ban_forces_later_arrival() {
        let g = MultiFloorGraph::uniform(1, FloorGrid::open(3, 1).unwrap(), vec![]).unwrap();
        let a = agent(Vertex::new(1, 0, 0), Vertex::new(1, 2, 0));
        let c = ConstraintSet::new().with([Constraint::Vertex { vertex: a.goal, time: 5 }]);
        assert_eq!(plan(&a, &g, &c).unwrap().cost(), 6);
    }

    #[test]
    fn start_at_goal_but_goal_banned_later() {
        let g = MultiFloorGraph::uniform(1, FloorGrid::open(3, 1).unwrap(), vec![]).unwrap();
        let a = agent(Vertex::new(1, 1, 0), Vertex::new(1, 1, 0));
        assert_eq!(plan(&a, &g, &ConstraintSet::new()).unwrap().cost(), 0);
        let c = ConstraintSet::new().with([Constraint::Vertex { vertex: a.goal, time: 2 }]);
        let p = plan(&a, &g, &c).unwrap();
        assert_eq!(p.cost(), 3);
        assert!(c.satisfied_by(&p, &g));
    }

    #[test]
    fn infeasible_when_boarding_forever_banned() {
        let g = two_floor(1);
        let a = agent(Vertex::new(1, 0, 0), Vertex::new(2, 2, 0));
        let c = ConstraintSet::new().with([Constraint::Boarding { elevator: 0, floor: 1, from: 0, to: FOREVER }]);
        assert!(plan(&a, &g, &c).is_none());
        let blocked_start = ConstraintSet::new().with([Constraint::Vertex { vertex: a.start, time: 0 }]);
        assert!(plan(&a, &g, &blocked_start).is_none());
    }

    #[test]
    fn same_floor_agents_never_ride() {
        let e = Elevator { id: 0, x: 1, y: 0, t_floor: 1 };
        let g = MultiFloorGraph::uniform(2, FloorGrid::open(3, 2).unwrap(), vec![e]).unwrap();
        let a = agent(Vertex::new(1, 0, 0), Vertex::new(1, 2, 0));
        let p = plan(&a, &g, &ConstraintSet::new()).unwrap();
        assert_eq!(p.cost(), 2);
        assert!(p.usage(&g, 0).is_none());
    }

    fn random_case(seed: u64) -> (MultiFloorGraph, Agent, ConstraintSet) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let floors = rng.gen_range(1..=3u16);
        let (w, h) = (rng.gen_range(2..=4u16), rng.gen_range(1..=3u16));
        let cells: Vec<(u16, u16)> = (0..h).flat_map(|y| (0..w).map(move |x| (x, y))).collect();
        let elevators: Vec<Elevator> = if floors > 1 {
            let n = rng.gen_range(1..=2usize);
            let mut picked: Vec<(u16, u16)> = Vec::new();
            while picked.len() < n {
                let c = cells[rng.gen_range(0..cells.len())];
                if !picked.contains(&c) {
                    picked.push(c);
                }
            }
            picked
                .into_iter()
                .enumerate()
                .map(|(id, (x, y))| Elevator { id, x, y, t_floor: rng.gen_range(1..=3) })
                .collect()
        } else {
            vec![]
        };
        let mut blocked: Vec<(u16, u16)> = cells
            .iter()
            .copied()
            .filter(|c| !elevators.iter().any(|e| (e.x, e.y) == *c) && rng.gen_bool(0.2))
            .collect();
        if blocked.len() == cells.len() {
            blocked.pop();
        }
        let grid = FloorGrid::new(w, h, blocked).unwrap();
        let g = MultiFloorGraph::uniform(floors, grid, elevators).unwrap();
        let free: Vec<Vertex> = (1..=floors).flat_map(|f| g.free_cells(f).collect::<Vec<_>>()).collect();
        let start = free[rng.gen_range(0..free.len())];
        let goal = free[rng.gen_range(0..free.len())];
        let mut c = ConstraintSet::new();
        for _ in 0..rng.gen_range(0..12) {
            let v = free[rng.gen_range(0..free.len())];
            let t = rng.gen_range(0..14);
            match rng.gen_range(0..4) {
                0 | 1 => {
                    c.add(Constraint::Vertex { vertex: v, time: t });
                }
                2 => {
                    let ns: Vec<Vertex> = g.floor_neighbors(v).collect();
                    if !ns.is_empty() {
                        c.add(Constraint::Edge { from: v, to: ns[rng.gen_range(0..ns.len())], time: t });
                    }
                }
                _ => {
                    if !g.elevators().is_empty() {
                        let k = rng.gen_range(0..g.elevators().len());
                        let len = rng.gen_range(0..6);
                        c.add(Constraint::Boarding { elevator: k, floor: rng.gen_range(1..=floors), from: t, to: t + len });
                    }
                }
            }
        }
        (g, Agent { id: 0, start, goal }, c)
    }

    fn horizon(g: &MultiFloorGraph, c: &ConstraintSet) -> Time {
        let ride: Time = g.elevators().iter().map(|e| e.t_floor * g.floors() as Time).max().unwrap_or(0);
        g.num_vertices() as Time * 2 + c.max_time() + ride + 2
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(600))]

        #[test]
        fn matches_time_expanded_search(seed in any::<u64>()) {
            let (g, a, c) = random_case(seed);
            let got = plan(&a, &g, &c);
            let expect = brute_force(&a, &g, &c, horizon(&g, &c));
            prop_assert_eq!(got.as_ref().map(Path::cost), expect);
            if let Some(p) = got {
                prop_assert!(c.satisfied_by(&p, &g), "violations {:?}", c.violations(&p, &g));
                prop_assert_eq!(p.start(), a.start);
                prop_assert_eq!(p.goal(), a.goal);
                for w in p.steps.windows(2) {
                    prop_assert!(w[0].time < w[1].time);
                    if w[0].vertex.floor == w[1].vertex.floor {
                        prop_assert_eq!(w[1].time, w[0].time + 1);
                        prop_assert!(w[0].vertex == w[1].vertex || g.floor_neighbors(w[0].vertex).any(|u| u == w[1].vertex));
                    }
                }
            }
        }

        #[test]
        fn adding_a_constraint_never_helps(seed in any::<u64>(), t in 0u32..10, pick in any::<prop::sample::Index>()) {
            let (g, a, c) = random_case(seed);
            let Some(p) = plan(&a, &g, &c) else { return Ok(()) };
            let v = p.steps[pick.index(p.steps.len())].vertex;
            let tighter = c.clone().with([Constraint::Vertex { vertex: v, time: t }]);
            if let Some(q) = plan(&a, &g, &tighter) {
                prop_assert!(q.cost() >= p.cost());
            }
        }
    }
}
