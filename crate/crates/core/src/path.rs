use std::fmt;

use crate::elevator::ElevatorUsage;
use crate::model::{MultiFloorGraph, Time, Vertex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TimedVertex {
    pub vertex: Vertex,
    pub time: Time,
}

impl TimedVertex {
    pub fn new(vertex: Vertex, time: Time) -> Self {
        TimedVertex { vertex, time }
    }
}

impl fmt::Display for TimedVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.vertex, self.time)
    }
}

/// A timed single-agent path. Waits are explicit unit steps, a ride lists
/// every door it passes, and the agent rests at the last vertex afterwards.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path {
    pub steps: Vec<TimedVertex>,
}

impl Path {
    pub fn new(steps: Vec<TimedVertex>) -> Self {
        Path { steps }
    }

    /// Arrival time at the goal.
    pub fn cost(&self) -> Time {
        self.steps.last().map_or(0, |s| s.time)
    }

    pub fn start(&self) -> Vertex {
        self.steps[0].vertex
    }

    pub fn goal(&self) -> Vertex {
        self.steps.last().expect("path has at least one step").vertex
    }

    /// Where the agent is at `t`; `None` while it is inside an elevator
    /// between two door visits.
    pub fn position_at(&self, t: Time) -> Option<Vertex> {
        let i = self.steps.partition_point(|s| s.time <= t);
        if i == 0 {
            return None;
        }
        let here = self.steps[i - 1];
        if here.time == t || i == self.steps.len() {
            return Some(here.vertex);
        }
        // between two steps only happens mid-ride
        if self.steps[i].vertex.floor != here.vertex.floor {
            None
        } else {
            Some(here.vertex)
        }
    }

    /// The single elevator ride in this path, if any.
    pub fn usage(&self, graph: &MultiFloorGraph, agent: usize) -> Option<ElevatorUsage> {
        let board = self
            .steps
            .windows(2)
            .position(|w| w[0].vertex.floor != w[1].vertex.floor)?;
        let mut exit = board + 1;
        while exit + 1 < self.steps.len() && self.steps[exit + 1].vertex.floor != self.steps[exit].vertex.floor {
            exit += 1;
        }
        let from = self.steps[board];
        let to = self.steps[exit];
        let elevator = graph.elevator_at(from.vertex)?;
        Some(ElevatorUsage {
            agent,
            elevator,
            board_time: from.time,
            board_floor: from.vertex.floor,
            exit_floor: to.vertex.floor,
            t_floor: graph.elevator(elevator).t_floor,
        })
    }

    /// Timed positions `0..=horizon`, parking at the goal after arrival.
    pub fn timeline(&self, horizon: Time) -> Vec<Option<Vertex>> {
        let mut out = Vec::with_capacity(horizon as usize + 1);
        let mut i = 0;
        for t in 0..=horizon {
            while i + 1 < self.steps.len() && self.steps[i + 1].time <= t {
                i += 1;
            }
            let here = self.steps[i];
            let pos = if here.time == t || i + 1 == self.steps.len() {
                Some(here.vertex)
            } else if self.steps[i + 1].vertex.floor != here.vertex.floor {
                None
            } else {
                Some(here.vertex)
            };
            out.push(pos);
        }
        out
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.steps.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlanError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("agent {0} listed twice")]
    Duplicate(usize),
    #[error("agent {0} missing")]
    Missing(usize),
}

/// One line per agent: `agent i: (l,x,y)@t ...`.
pub fn write_plan(paths: &[Path]) -> String {
    paths.iter().enumerate().map(|(i, p)| format!("agent {i}: {p}\n")).collect()
}

fn parse_step(token: &str) -> Option<TimedVertex> {
    let (v, t) = token.split_once('@')?;
    let inner = v.strip_prefix('(')?.strip_suffix(')')?;
    let mut parts = inner.split(',').map(|s| s.trim().parse::<u16>());
    let (floor, x, y) = (parts.next()?.ok()?, parts.next()?.ok()?, parts.next()?.ok()?);
    if parts.next().is_some() {
        return None;
    }
    Some(TimedVertex::new(Vertex::new(floor, x, y), t.parse().ok()?))
}

/// Reads the format written by [`write_plan`]. Blank lines and `#`
/// comments are skipped; agents may appear in any order but each exactly once.
pub fn parse_plan(text: &str) -> Result<Vec<Path>, PlanError> {
    let mut found: Vec<Option<Path>> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let syntax = |reason: &str| PlanError::Syntax { line: n + 1, reason: reason.into() };
        let rest = line.strip_prefix("agent").ok_or_else(|| syntax("expected `agent i:`"))?;
        let (id, steps) = rest.split_once(':').ok_or_else(|| syntax("expected `:` after the agent id"))?;
        let id: usize = id.trim().parse().map_err(|_| syntax("bad agent id"))?;
        let steps: Vec<TimedVertex> = steps
            .split_whitespace()
            .map(|tok| parse_step(tok).ok_or_else(|| syntax(&format!("bad step `{tok}`"))))
            .collect::<Result<_, _>>()?;
        if steps.is_empty() {
            return Err(syntax("empty path"));
        }
        if steps.windows(2).any(|w| w[1].time <= w[0].time) {
            return Err(syntax("times must increase"));
        }
        if found.len() <= id {
            found.resize(id + 1, None);
        }
        if found[id].is_some() {
            return Err(PlanError::Duplicate(id));
        }
        found[id] = Some(Path::new(steps));
    }
    found.into_iter().enumerate().map(|(i, p)| p.ok_or(PlanError::Missing(i))).collect()
}
