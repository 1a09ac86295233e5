//! Exhaustive optimal search over joint states, for checking the solver on
//! small instances. Elevator bookkeeping is kept per elevator rather than
//! derived from paths, so it shares no conflict logic with the solver.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use crate::model::{Instance, MultiFloorGraph, Time, Vertex};
use crate::path::{Path, TimedVertex};
use crate::sipp::Planner;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct AgentState {
    /// Current vertex; the last door passed while in the cabin.
    at: Vertex,
    in_cabin: bool,
    done: bool,
    rode: bool,
    /// Elevator and time since boarding.
    riding: Option<(usize, Time)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct LastRide {
    rider: usize,
    exit_floor: u16,
    since_exit: Time,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct JointState {
    agents: Vec<AgentState>,
    elevators: Vec<Option<LastRide>>,
}

#[derive(Debug, Clone, Copy)]
enum Choice {
    Stay,
    Finish,
    Step(Vertex),
    Board(usize),
    Ride,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleSolution {
    pub soc: u64,
    pub paths: Vec<Path>,
}

struct Node {
    state: JointState,
    time: Time,
    parent: Option<usize>,
}

/// Minimal sum of costs (with paths), exploring joint states up to time
/// `horizon`. `None` when no joint plan exists within the horizon.
pub fn oracle_solve(instance: &Instance, horizon: Time) -> Option<OracleSolution> {
    let graph = &instance.graph;
    let n = instance.agents.len();
    let planners: Vec<Planner<'_>> = instance.agents.iter().map(|a| Planner::new(graph, *a)).collect();
    let max_reset: Vec<Time> =
        graph.elevators().iter().map(|e| (graph.floors() as Time - 1) * e.t_floor).collect();

    let lower_bound = |s: &AgentState, agent: usize| -> Option<Time> {
        if s.done {
            return Some(0);
        }
        let a = &instance.agents[agent];
        match s.riding {
            Some((k, elapsed)) => {
                let ride = a.start_floor().abs_diff(a.goal_floor()) as Time * graph.elevator(k).t_floor;
                planners[agent].heuristic(graph.door(k, a.goal_floor()), true).map(|h| h + ride - elapsed)
            }
            None => planners[agent].heuristic(s.at, s.rode),
        }
    };
    let estimate = |s: &JointState| -> Option<u64> {
        s.agents.iter().enumerate().try_fold(0u64, |acc, (i, a)| lower_bound(a, i).map(|h| acc + h as u64))
    };

    let start = JointState {
        agents: instance
            .agents
            .iter()
            .map(|a| AgentState { at: a.start, in_cabin: false, done: false, rode: false, riding: None })
            .collect(),
        elevators: vec![None; graph.elevators().len()],
    };
    let h0 = estimate(&start)?;
    let mut nodes = vec![Node { state: start.clone(), time: 0, parent: None }];
    let mut best: HashMap<JointState, u64> = HashMap::from([(start, 0)]);
    let mut open = BinaryHeap::from([Reverse((h0, 0u64, 0usize))]);

    while let Some(Reverse((_, g, id))) = open.pop() {
        let (state, time) = (nodes[id].state.clone(), nodes[id].time);
        if best.get(&state).is_some_and(|&b| b < g) {
            continue;
        }
        if state.agents.iter().all(|a| a.done) {
            return Some(OracleSolution { soc: g, paths: reconstruct(&nodes, id, n) });
        }
        if time >= horizon {
            continue;
        }
        let options: Vec<Vec<Choice>> =
            (0..n).map(|i| choices(instance, &state, i)).collect();
        let mut pick = vec![0usize; n];
        loop {
            let combo: Vec<Choice> = (0..n).map(|i| options[i][pick[i]]).collect();
            if let Some(next) = apply(graph, instance, &state, &combo, &max_reset) {
                let step_cost = next.agents.iter().filter(|a| !a.done).count() as u64;
                let g2 = g + step_cost;
                if best.get(&next).is_none_or(|&b| g2 < b) {
                    if let Some(h) = estimate(&next) {
                        best.insert(next.clone(), g2);
                        nodes.push(Node { state: next, time: time + 1, parent: Some(id) });
                        open.push(Reverse((g2 + h, g2, nodes.len() - 1)));
                    }
                }
            }
            // odometer over the per-agent choices
            let mut i = 0;
            while i < n {
                pick[i] += 1;
                if pick[i] < options[i].len() {
                    break;
                }
                pick[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
        }
    }
    None
}

fn choices(instance: &Instance, state: &JointState, i: usize) -> Vec<Choice> {
    let graph = &instance.graph;
    let s = state.agents[i];
    let a = &instance.agents[i];
    if s.done {
        return vec![Choice::Stay];
    }
    if s.riding.is_some() {
        return vec![Choice::Ride];
    }
    let mut out = vec![Choice::Stay];
    if s.at == a.goal && s.rode == a.needs_elevator() {
        out.push(Choice::Finish);
    }
    out.extend(graph.floor_neighbors(s.at).map(Choice::Step));
    if !s.rode && a.needs_elevator() {
        if let Some(k) = graph.elevator_at(s.at) {
            out.push(Choice::Board(k));
        }
    }
    out
}

/// Successor state one tick later, or `None` if the combined move is illegal.
fn apply(
    graph: &MultiFloorGraph,
    instance: &Instance,
    state: &JointState,
    combo: &[Choice],
    max_reset: &[Time],
) -> Option<JointState> {
    let mut next = state.clone();
    // boarding legality is judged against the elevator state before the tick
    let mut boarding: Vec<usize> = Vec::new();
    for (i, c) in combo.iter().enumerate() {
        if let Choice::Board(k) = *c {
            if boarding.contains(&k) {
                return None;
            }
            boarding.push(k);
            let f = state.agents[i].at.floor;
            if state.agents.iter().any(|o| o.riding.is_some_and(|(rk, _)| rk == k)) {
                return None;
            }
            if let Some(last) = state.elevators[k] {
                let reset = last.exit_floor.abs_diff(f) as Time * graph.elevator(k).t_floor;
                if last.since_exit <= reset {
                    return None;
                }
            }
        }
    }

    for e in next.elevators.iter_mut().enumerate() {
        let (k, slot) = e;
        if let Some(last) = slot {
            last.since_exit += 1;
            if last.since_exit > max_reset[k] {
                *slot = None;
            }
        }
    }

    for (i, c) in combo.iter().enumerate() {
        let a = &instance.agents[i];
        let s = &mut next.agents[i];
        match *c {
            Choice::Stay => {}
            Choice::Finish => s.done = true,
            Choice::Step(v) => s.at = v,
            Choice::Board(k) => {
                s.rode = true;
                s.riding = Some((k, 0));
            }
            Choice::Ride => {}
        }
        if let Some((k, elapsed)) = s.riding {
            let tf = graph.elevator(k).t_floor;
            let elapsed = elapsed + 1;
            let ride = a.start_floor().abs_diff(a.goal_floor()) as Time * tf;
            let passed = (elapsed / tf) as u16;
            let floor = if a.goal_floor() > a.start_floor() { a.start_floor() + passed } else { a.start_floor() - passed };
            s.at = graph.door(k, floor);
            s.in_cabin = elapsed % tf != 0;
            if elapsed == ride {
                s.riding = None;
                next.elevators[k] = Some(LastRide { rider: i, exit_floor: a.goal_floor(), since_exit: 0 });
            } else {
                s.riding = Some((k, elapsed));
            }
        }
    }

    let n = next.agents.len();
    for i in 0..n {
        let si = next.agents[i];
        if si.in_cabin {
            continue;
        }
        for j in i + 1..n {
            let sj = next.agents[j];
            if !sj.in_cabin && si.at == sj.at {
                return None;
            }
            let (pi, pj) = (state.agents[i], state.agents[j]);
            if !pi.in_cabin && !pj.in_cabin && pi.at != si.at && pi.at.floor == si.at.floor
                && pi.at == sj.at && pj.at == si.at
            {
                return None;
            }
        }
    }

    // door occupancy while an elevator is carrying someone or resetting
    for (i, s) in next.agents.iter().enumerate() {
        if s.in_cabin {
            continue;
        }
        let Some(k) = graph.elevator_at(s.at) else { continue };
        let own_ride = s.riding.is_some_and(|(rk, _)| rk == k)
            || next.elevators[k].is_some_and(|l| l.rider == i && l.since_exit == 0);
        if own_ride {
            continue;
        }
        let carrying = next.agents.iter().enumerate().any(|(j, o)| j != i && o.riding.is_some_and(|(rk, _)| rk == k));
        let resetting = next.elevators[k].is_some_and(|l| {
            l.rider != i && l.since_exit <= l.exit_floor.abs_diff(s.at.floor) as Time * graph.elevator(k).t_floor
        });
        if carrying || resetting {
            return None;
        }
    }
    // a fresh boarding is the rider standing at its door: check it against
    // the others' windows as of the tick it boards
    for (i, c) in combo.iter().enumerate() {
        if let Choice::Board(k) = *c {
            for (j, o) in state.agents.iter().enumerate() {
                if j != i && !o.in_cabin && graph.elevator_at(o.at) == Some(k) && o.riding.is_none_or(|(rk, _)| rk != k) {
                    let own_exit = state.elevators[k].is_some_and(|l| l.rider == j && l.since_exit == 0);
                    if !own_exit {
                        return None;
                    }
                }
            }
        }
    }
    Some(next)
}

fn reconstruct(nodes: &[Node], goal: usize, n: usize) -> Vec<Path> {
    let mut chain = vec![goal];
    while let Some(p) = nodes[*chain.last().unwrap()].parent {
        chain.push(p);
    }
    chain.reverse();
    (0..n)
        .map(|i| {
            let mut steps = Vec::new();
            for &id in &chain {
                let s = nodes[id].state.agents[i];
                if s.done {
                    break;
                }
                if !s.in_cabin {
                    steps.push(TimedVertex::new(s.at, nodes[id].time));
                }
            }
            // finishing happens one tick after the last counted state
            Path::new(steps)
        })
        .collect()
}
