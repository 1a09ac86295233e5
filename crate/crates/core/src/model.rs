//! Multi-floor workspace, agents and instances, plus the text formats used to
//! load them.
//!
//! A map is a stack of `floors` grids sharing one width and height. Each
//! elevator occupies the same cell on every floor; that cell on floor `l` is
//! the elevator's door vertex for `l`. Same-floor moves and waits cost one
//! time unit, a ride between adjacent floors of elevator `k` costs
//! `t_floor(k)`.

use std::fmt;

use thiserror::Error;

/// Discrete time step.
pub type Time = u32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("floor {floor}: {reason}")]
    GridShape { floor: u16, reason: String },
    #[error("elevator cell ({x}, {y}): {reason}")]
    ElevatorCell { x: u16, y: u16, reason: String },
    #[error("grid dimensions must be positive")]
    EmptyGrid,
    #[error("cell ({x}, {y}) outside the {width}x{height} grid")]
    OutOfBounds { x: u16, y: u16, width: u16, height: u16 },
    #[error("scenario line {line}: {reason}")]
    Scenario { line: usize, reason: String },
    #[error("agent {agent}: {reason}")]
    Agent { agent: usize, reason: String },
}

/// A location in the workspace. Floors are 1-based, cells 0-based.
///
/// The derived order (floor, x, y) is the tie-breaking order used by the
/// planners.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex {
    pub floor: u16,
    pub x: u16,
    pub y: u16,
}

impl Vertex {
    pub const fn new(floor: u16, x: u16, y: u16) -> Self {
        Vertex { floor, x, y }
    }

    pub fn same_cell(&self, other: &Vertex) -> bool {
        self.x == other.x && self.y == other.y
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.floor, self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FloorGrid {
    width: u16,
    height: u16,
    blocked: Vec<bool>,
}

impl FloorGrid {
    pub fn new(
        width: u16,
        height: u16,
        blocked: impl IntoIterator<Item = (u16, u16)>,
    ) -> Result<Self, ModelError> {
        if width == 0 || height == 0 {
            return Err(ModelError::EmptyGrid);
        }
        let mut cells = vec![false; width as usize * height as usize];
        for (x, y) in blocked {
            if x >= width || y >= height {
                return Err(ModelError::OutOfBounds { x, y, width, height });
            }
            cells[y as usize * width as usize + x as usize] = true;
        }
        Ok(FloorGrid { width, height, blocked: cells })
    }

    pub fn open(width: u16, height: u16) -> Result<Self, ModelError> {
        Self::new(width, height, std::iter::empty())
    }

    pub fn width(&self) -> u16 {
        self.width
    }

    pub fn height(&self) -> u16 {
        self.height
    }

    pub fn is_blocked(&self, x: u16, y: u16) -> bool {
        self.blocked[y as usize * self.width as usize + x as usize]
    }

    pub fn blocked_cells(&self) -> impl Iterator<Item = (u16, u16)> + '_ {
        let w = self.width as usize;
        self.blocked
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(move |(i, _)| ((i % w) as u16, (i / w) as u16))
    }

    pub fn free_count(&self) -> usize {
        self.blocked.iter().filter(|b| !**b).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Elevator {
    pub id: usize,
    pub x: u16,
    pub y: u16,
    /// Time to travel between two adjacent floors.
    pub t_floor: Time,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MoveKind {
    Wait,
    Step,
    /// Ride elevator `elevator` from the current door to its door on `to_floor`.
    Board { elevator: usize, to_floor: u16 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Move {
    pub to: Vertex,
    pub cost: Time,
    pub kind: MoveKind,
}

const DIRS: [(i32, i32); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiFloorGraph {
    width: u16,
    height: u16,
    grids: Vec<FloorGrid>,
    elevators: Vec<Elevator>,
    elevator_by_cell: Vec<Option<usize>>,
}

impl MultiFloorGraph {
    pub fn new(grids: Vec<FloorGrid>, elevators: Vec<Elevator>) -> Result<Self, ModelError> {
        let first = grids
            .first()
            .ok_or_else(|| ModelError::MalformedHeader("at least one floor is required".into()))?;
        let (width, height) = (first.width(), first.height());
        for (i, g) in grids.iter().enumerate() {
            if g.width() != width || g.height() != height {
                return Err(ModelError::GridShape {
                    floor: i as u16 + 1,
                    reason: format!(
                        "is {}x{}, expected {}x{}",
                        g.width(),
                        g.height(),
                        width,
                        height
                    ),
                });
            }
        }
        let mut elevator_by_cell = vec![None; width as usize * height as usize];
        for (k, e) in elevators.iter().enumerate() {
            if e.id != k {
                return Err(ModelError::ElevatorCell {
                    x: e.x,
                    y: e.y,
                    reason: format!("elevator id {} at position {}", e.id, k),
                });
            }
            if e.x >= width || e.y >= height {
                return Err(ModelError::OutOfBounds { x: e.x, y: e.y, width, height });
            }
            if e.t_floor == 0 {
                return Err(ModelError::ElevatorCell {
                    x: e.x,
                    y: e.y,
                    reason: "t_floor must be at least 1".into(),
                });
            }
            let slot = &mut elevator_by_cell[e.y as usize * width as usize + e.x as usize];
            if slot.is_some() {
                return Err(ModelError::ElevatorCell {
                    x: e.x,
                    y: e.y,
                    reason: "two elevators share this cell".into(),
                });
            }
            *slot = Some(k);
            for (f, g) in grids.iter().enumerate() {
                if g.is_blocked(e.x, e.y) {
                    return Err(ModelError::ElevatorCell {
                        x: e.x,
                        y: e.y,
                        reason: format!("blocked on floor {}", f + 1),
                    });
                }
            }
        }
        Ok(MultiFloorGraph { width, height, grids, elevators, elevator_by_cell })
    }

    /// Every floor uses the same grid.
    pub fn uniform(floors: u16, grid: FloorGrid, elevators: Vec<Elevator>) -> Result<Self, ModelError> {
        Self::new(vec![grid; floors as usize], elevators)
    }

    pub fn floors(&self) -> u16 {
        self.grids.len() as u16
    }

    pub fn width(&self) -> u16 {
        self.width
    }

    pub fn height(&self) -> u16 {
        self.height
    }

    pub fn grid(&self, floor: u16) -> &FloorGrid {
        &self.grids[floor as usize - 1]
    }

    pub fn elevators(&self) -> &[Elevator] {
        &self.elevators
    }

    pub fn elevator(&self, k: usize) -> &Elevator {
        &self.elevators[k]
    }

    pub fn cells_per_floor(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn num_vertices(&self) -> usize {
        self.cells_per_floor() * self.grids.len()
    }

    /// Dense index of `v`, floor-major then row-major.
    pub fn index(&self, v: Vertex) -> usize {
        (v.floor as usize - 1) * self.cells_per_floor()
            + v.y as usize * self.width as usize
            + v.x as usize
    }

    pub fn vertex(&self, index: usize) -> Vertex {
        let per = self.cells_per_floor();
        let floor = (index / per) as u16 + 1;
        let rest = index % per;
        Vertex::new(floor, (rest % self.width as usize) as u16, (rest / self.width as usize) as u16)
    }

    pub fn contains(&self, v: Vertex) -> bool {
        v.floor >= 1 && v.floor <= self.floors() && v.x < self.width && v.y < self.height
    }

    pub fn is_free(&self, v: Vertex) -> bool {
        self.contains(v) && !self.grid(v.floor).is_blocked(v.x, v.y)
    }

    /// The elevator whose door is `v`, if any.
    pub fn elevator_at(&self, v: Vertex) -> Option<usize> {
        if !self.contains(v) {
            return None;
        }
        self.elevator_by_cell[v.y as usize * self.width as usize + v.x as usize]
    }

    pub fn is_door(&self, v: Vertex) -> bool {
        self.elevator_at(v).is_some()
    }

    pub fn door(&self, k: usize, floor: u16) -> Vertex {
        let e = &self.elevators[k];
        Vertex::new(floor, e.x, e.y)
    }

    /// Unblocked 4-neighbors of `v` on its own floor.
    pub fn floor_neighbors(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        DIRS.iter().filter_map(move |&(dx, dy)| {
            let x = v.x as i32 + dx;
            let y = v.y as i32 + dy;
            if x < 0 || y < 0 || x >= self.width as i32 || y >= self.height as i32 {
                return None;
            }
            let u = Vertex::new(v.floor, x as u16, y as u16);
            self.is_free(u).then_some(u)
        })
    }

    /// Outgoing moves from `v`: a wait, same-floor steps and, at an elevator
    /// door when no ride has been taken yet, one ride per other floor.
    pub fn neighbors(&self, v: Vertex, rode_elevator: bool) -> Vec<Move> {
        let mut out = vec![Move { to: v, cost: 1, kind: MoveKind::Wait }];
        out.extend(self.floor_neighbors(v).map(|u| Move { to: u, cost: 1, kind: MoveKind::Step }));
        if let (false, Some(k)) = (rode_elevator, self.elevator_at(v)) {
            for f in 1..=self.floors() {
                if f != v.floor {
                    out.push(Move {
                        to: self.door(k, f),
                        cost: crate::elevator::ride_duration(self, k, v.floor, f),
                        kind: MoveKind::Board { elevator: k, to_floor: f },
                    });
                }
            }
        }
        out
    }

    pub fn free_cells(&self, floor: u16) -> impl Iterator<Item = Vertex> + '_ {
        let g = self.grid(floor);
        (0..self.height).flat_map(move |y| {
            (0..self.width).filter_map(move |x| (!g.is_blocked(x, y)).then_some(Vertex::new(floor, x, y)))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Agent {
    pub id: usize,
    pub start: Vertex,
    pub goal: Vertex,
}

impl Agent {
    pub fn start_floor(&self) -> u16 {
        self.start.floor
    }

    pub fn goal_floor(&self) -> u16 {
        self.goal.floor
    }

    pub fn needs_elevator(&self) -> bool {
        self.start.floor != self.goal.floor
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub graph: MultiFloorGraph,
    pub agents: Vec<Agent>,
}

impl Instance {
    /// Validates and assembles an instance. Agent ids are reassigned to
    /// their position in `agents`.
    pub fn new(graph: MultiFloorGraph, mut agents: Vec<Agent>) -> Result<Self, ModelError> {
        for (i, a) in agents.iter_mut().enumerate() {
            a.id = i;
            for (what, v) in [("start", a.start), ("goal", a.goal)] {
                if !graph.contains(v) {
                    return Err(ModelError::Agent { agent: i, reason: format!("{what} {v} is out of bounds") });
                }
                if !graph.is_free(v) {
                    return Err(ModelError::Agent { agent: i, reason: format!("{what} {v} is blocked") });
                }
                if graph.is_door(v) {
                    return Err(ModelError::Agent {
                        agent: i,
                        reason: format!("{what} {v} is an elevator door"),
                    });
                }
            }
            if a.needs_elevator() && graph.elevators().is_empty() {
                return Err(ModelError::Agent {
                    agent: i,
                    reason: "changes floor but the map has no elevator".into(),
                });
            }
        }
        for i in 0..agents.len() {
            for j in i + 1..agents.len() {
                if agents[i].start == agents[j].start {
                    return Err(ModelError::Agent { agent: j, reason: format!("shares start with agent {i}") });
                }
                if agents[i].goal == agents[j].goal {
                    return Err(ModelError::Agent { agent: j, reason: format!("shares goal with agent {i}") });
                }
            }
        }
        Ok(Instance { graph, agents })
    }
}

fn header_value<T: std::str::FromStr>(key: &str, value: Option<&str>) -> Result<T, ModelError> {
    value
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| ModelError::MalformedHeader(format!("bad value for `{key}`")))
}

/// Parses the `type mapf-e` map format.
pub fn parse_map(text: &str) -> Result<MultiFloorGraph, ModelError> {
    let mut lines = text.lines().map(str::trim_end).filter(|l| !l.trim().is_empty()).peekable();
    let (mut floors, mut height, mut width) = (None, None, None);
    let mut tfloor: Time = 1;
    let mut overrides: Vec<(usize, Time)> = Vec::new();
    let mut saw_type = false;

    while let Some(line) = lines.peek() {
        let mut parts = line.split_whitespace();
        let key = parts.next().unwrap_or_default();
        let value = parts.next();
        match key {
            "type" => {
                if value != Some("mapf-e") {
                    return Err(ModelError::MalformedHeader(format!("unsupported type line `{line}`")));
                }
                saw_type = true;
            }
            "floors" => floors = Some(header_value::<u16>(key, value)?),
            "height" => height = Some(header_value::<u16>(key, value)?),
            "width" => width = Some(header_value::<u16>(key, value)?),
            "tfloor" => tfloor = header_value(key, value)?,
            "tfloor_k" => {
                let k = header_value(key, value)?;
                let t = header_value(key, parts.next())?;
                overrides.push((k, t));
            }
            "map" => {}
            _ => break,
        }
        lines.next();
    }
    if !saw_type {
        return Err(ModelError::MalformedHeader("missing `type mapf-e`".into()));
    }
    let floors = floors.ok_or_else(|| ModelError::MalformedHeader("missing `floors`".into()))?;
    let height = height.ok_or_else(|| ModelError::MalformedHeader("missing `height`".into()))?;
    let width = width.ok_or_else(|| ModelError::MalformedHeader("missing `width`".into()))?;
    if floors == 0 || height == 0 || width == 0 {
        return Err(ModelError::EmptyGrid);
    }
    if tfloor == 0 {
        return Err(ModelError::MalformedHeader("tfloor must be at least 1".into()));
    }

    let mut grids = Vec::with_capacity(floors as usize);
    let mut door_cells: Option<Vec<(u16, u16)>> = None;
    for floor in 1..=floors {
        let mut blocked = Vec::new();
        let mut doors = Vec::new();
        for y in 0..height {
            let row = lines.next().ok_or_else(|| ModelError::GridShape {
                floor,
                reason: format!("expected {height} rows, found {y}"),
            })?;
            let row = row.trim();
            if row.chars().count() != width as usize {
                return Err(ModelError::GridShape {
                    floor,
                    reason: format!("row {y} has {} cells, expected {width}", row.chars().count()),
                });
            }
            for (x, c) in row.chars().enumerate() {
                let x = x as u16;
                match c {
                    '.' => {}
                    '@' | 'T' => blocked.push((x, y)),
                    'E' => doors.push((x, y)),
                    other => {
                        return Err(ModelError::GridShape {
                            floor,
                            reason: format!("unknown cell character `{other}` at ({x}, {y})"),
                        })
                    }
                }
            }
        }
        match &door_cells {
            None => door_cells = Some(doors),
            Some(expected) => {
                if let Some(&(x, y)) = expected.iter().find(|c| !doors.contains(c)) {
                    let reason = if blocked.contains(&(x, y)) {
                        format!("blocked on floor {floor}")
                    } else {
                        format!("missing on floor {floor}")
                    };
                    return Err(ModelError::ElevatorCell { x, y, reason });
                }
                if let Some(&(x, y)) = doors.iter().find(|c| !expected.contains(c)) {
                    return Err(ModelError::ElevatorCell {
                        x,
                        y,
                        reason: format!("appears on floor {floor} but not on floor 1"),
                    });
                }
            }
        }
        grids.push(FloorGrid::new(width, height, blocked)?);
    }
    if lines.next().is_some() {
        return Err(ModelError::GridShape { floor: floors, reason: "trailing rows after the last floor".into() });
    }

    let mut elevators: Vec<Elevator> = door_cells
        .unwrap_or_default()
        .into_iter()
        .enumerate()
        .map(|(id, (x, y))| Elevator { id, x, y, t_floor: tfloor })
        .collect();
    for (k, t) in overrides {
        if t == 0 {
            return Err(ModelError::MalformedHeader(format!("tfloor_k {k} must be at least 1")));
        }
        match elevators.get_mut(k) {
            Some(e) => e.t_floor = t,
            None => return Err(ModelError::MalformedHeader(format!("tfloor_k names unknown elevator {k}"))),
        }
    }
    MultiFloorGraph::new(grids, elevators)
}

/// Serializes a graph in the format read by [`parse_map`].
pub fn write_map(graph: &MultiFloorGraph) -> String {
    let default_t = graph.elevators().first().map_or(1, |e| e.t_floor);
    let mut out = format!(
        "type mapf-e\nfloors {}\nheight {}\nwidth {}\ntfloor {}\n",
        graph.floors(),
        graph.height(),
        graph.width(),
        default_t
    );
    for e in graph.elevators().iter().filter(|e| e.t_floor != default_t) {
        out.push_str(&format!("tfloor_k {} {}\n", e.id, e.t_floor));
    }
    for floor in 1..=graph.floors() {
        out.push('\n');
        let g = graph.grid(floor);
        for y in 0..graph.height() {
            for x in 0..graph.width() {
                let v = Vertex::new(floor, x, y);
                out.push(if graph.is_door(v) {
                    'E'
                } else if g.is_blocked(x, y) {
                    '@'
                } else {
                    '.'
                });
            }
            out.push('\n');
        }
    }
    out
}

/// Parses a scenario: one agent per line, `sf sx sy gf gx gy`. Blank lines
/// and lines starting with `#` are skipped.
pub fn parse_scenario(text: &str, graph: MultiFloorGraph) -> Result<Instance, ModelError> {
    let mut agents = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let nums: Vec<u16> = line
            .split_whitespace()
            .map(|t| t.parse::<u16>())
            .collect::<Result<_, _>>()
            .map_err(|e| ModelError::Scenario { line: n + 1, reason: e.to_string() })?;
        if nums.len() != 6 {
            return Err(ModelError::Scenario {
                line: n + 1,
                reason: format!("expected 6 fields, found {}", nums.len()),
            });
        }
        agents.push(Agent {
            id: agents.len(),
            start: Vertex::new(nums[0], nums[1], nums[2]),
            goal: Vertex::new(nums[3], nums[4], nums[5]),
        });
    }
    Instance::new(graph, agents)
}

pub fn write_scenario(instance: &Instance) -> String {
    instance
        .agents
        .iter()
        .map(|a| {
            format!(
                "{} {} {} {} {} {}\n",
                a.start.floor, a.start.x, a.start.y, a.goal.floor, a.goal.x, a.goal.y
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_floor_map() -> String {
        let mut s = String::from("type mapf-e\nfloors 2\nheight 8\nwidth 8\ntfloor 3\n");
        let grid = [
            "E.......", "..@.....", "....@...", ".@...E..", "........", "...@..@.", "E.......", ".....@..",
        ];
        for _ in 0..2 {
            for row in grid {
                s.push_str(row);
                s.push('\n');
            }
        }
        s
    }

    #[test]
    fn smallest_map() {
        let g = parse_map("type mapf-e\nfloors 1\nheight 2\nwidth 2\n..\n..\n").unwrap();
        assert_eq!(g.floors(), 1);
        assert_eq!(g.free_cells(1).count(), 4);
        assert!(g.elevators().is_empty());
    }

    #[test]
    fn two_floor_three_elevators() {
        let g = parse_map(&two_floor_map()).unwrap();
        assert_eq!(g.floors(), 2);
        assert_eq!(g.elevators().len(), 3);
        assert!(g.elevators().iter().all(|e| e.t_floor == 3));
        // ids follow row-major order on floor 1
        assert_eq!((g.elevator(0).x, g.elevator(0).y), (0, 0));
        assert_eq!((g.elevator(1).x, g.elevator(1).y), (5, 3));
        assert_eq!((g.elevator(2).x, g.elevator(2).y), (0, 6));
    }

    #[test]
    fn five_floors_sixteen_square() {
        let mut s = String::from("type mapf-e\nfloors 5\nheight 16\nwidth 16\ntfloor 2\ntfloor_k 1 4\n");
        for _ in 0..5 {
            for y in 0..16 {
                let row: String = (0..16)
                    .map(|x| match (x, y) {
                        (3, 3) | (12, 7) | (5, 14) => 'E',
                        (x, y) if (x * 7 + y * 3) % 10 == 0 => '@',
                        _ => '.',
                    })
                    .collect();
                s.push_str(&row);
                s.push('\n');
            }
        }
        let g = parse_map(&s).unwrap();
        assert_eq!(g.floors(), 5);
        assert_eq!(g.elevators().len(), 3);
        assert_eq!(g.elevator(1).t_floor, 4);
        assert_eq!(g.elevator(0).t_floor, 2);
    }

    #[test]
    fn header_errors() {
        assert!(matches!(
            parse_map("floors 1\nheight 1\nwidth 1\n.\n"),
            Err(ModelError::MalformedHeader(_))
        ));
        assert!(matches!(
            parse_map("type mapf-e\nfloors 1\nwidth 2\n..\n"),
            Err(ModelError::MalformedHeader(_))
        ));
        assert!(matches!(
            parse_map("type mapf-e\nfloors x\nheight 1\nwidth 1\n.\n"),
            Err(ModelError::MalformedHeader(_))
        ));
        assert!(matches!(
            parse_map("type mapf-e\nfloors 1\nheight 1\nwidth 1\ntfloor_k 0 2\n.\n"),
            Err(ModelError::MalformedHeader(_))
        ));
    }

    #[test]
    fn grid_shape_errors() {
        assert!(matches!(
            parse_map("type mapf-e\nfloors 1\nheight 2\nwidth 2\n..\n...\n"),
            Err(ModelError::GridShape { .. })
        ));
        assert!(matches!(
            parse_map("type mapf-e\nfloors 2\nheight 2\nwidth 2\n..\n..\n..\n"),
            Err(ModelError::GridShape { .. })
        ));
    }

    #[test]
    fn elevator_errors() {
        let blocked = "type mapf-e\nfloors 2\nheight 1\nwidth 2\nE.\n@.\n";
        assert!(matches!(parse_map(blocked), Err(ModelError::ElevatorCell { x: 0, y: 0, .. })));
        let moved = "type mapf-e\nfloors 2\nheight 1\nwidth 2\nE.\n.E\n";
        assert!(matches!(parse_map(moved), Err(ModelError::ElevatorCell { .. })));
    }

    #[test]
    fn per_floor_grids_may_differ() {
        let g = parse_map("type mapf-e\nfloors 2\nheight 1\nwidth 3\nE.@\nE@.\n").unwrap();
        assert!(g.grid(1).is_blocked(2, 0));
        assert!(g.grid(2).is_blocked(1, 0));
    }

    #[test]
    fn scenario_parsing() {
        let g = parse_map(&two_floor_map()).unwrap();
        let empty = parse_scenario("", g.clone()).unwrap();
        assert!(empty.agents.is_empty());

        let one = parse_scenario("1 1 0 1 3 3\n", g.clone()).unwrap();
        assert_eq!(one.agents[0].start_floor(), 1);
        assert_eq!(one.agents[0].goal_floor(), 1);

        let on_door = parse_scenario("1 0 0 2 3 3\n", g.clone());
        assert!(matches!(on_door, Err(ModelError::Agent { agent: 0, .. })));

        let dup = parse_scenario("1 1 0 2 3 3\n1 1 0 2 4 4\n", g.clone());
        assert!(matches!(dup, Err(ModelError::Agent { agent: 1, .. })));

        let oob = parse_scenario("1 9 0 2 3 3\n", g.clone());
        assert!(matches!(oob, Err(ModelError::Agent { .. })));

        let blocked = parse_scenario("1 2 1 2 3 3\n", g.clone());
        assert!(matches!(blocked, Err(ModelError::Agent { .. })));

        let short = parse_scenario("1 2 1 2 3\n", g);
        assert!(matches!(short, Err(ModelError::Scenario { line: 1, .. })));
    }

    #[test]
    fn floor_change_needs_an_elevator() {
        let g = parse_map("type mapf-e\nfloors 2\nheight 1\nwidth 2\n..\n..\n").unwrap();
        assert!(parse_scenario("1 0 0 2 1 0\n", g).is_err());
    }

    #[test]
    fn neighbor_counts() {
        let g = MultiFloorGraph::uniform(1, FloorGrid::open(5, 5).unwrap(), vec![]).unwrap();
        assert_eq!(g.neighbors(Vertex::new(1, 2, 2), false).len(), 5);
        let g = MultiFloorGraph::uniform(1, FloorGrid::new(5, 5, [(1, 0)]).unwrap(), vec![]).unwrap();
        // corner (0,0): wait + (0,1); (1,0) is blocked
        assert_eq!(g.neighbors(Vertex::new(1, 0, 0), false).len(), 2);
        // corner (4,4) beside blocked (3,4)
        let g = MultiFloorGraph::uniform(1, FloorGrid::new(5, 5, [(3, 4)]).unwrap(), vec![]).unwrap();
        let moves = g.neighbors(Vertex::new(1, 4, 4), false);
        assert_eq!(moves.len(), 2);
        let g = MultiFloorGraph::uniform(1, FloorGrid::new(5, 5, [(4, 2)]).unwrap(), vec![]).unwrap();
        assert_eq!(g.neighbors(Vertex::new(1, 4, 3), false).len(), 3);
    }

    #[test]
    fn door_neighbors_include_ride() {
        let e = Elevator { id: 0, x: 1, y: 1, t_floor: 3 };
        let g = MultiFloorGraph::uniform(2, FloorGrid::open(3, 3).unwrap(), vec![e]).unwrap();
        let door = Vertex::new(1, 1, 1);
        let moves = g.neighbors(door, false);
        assert_eq!(moves.len(), 6);
        let ride = moves.iter().find(|m| matches!(m.kind, MoveKind::Board { .. })).unwrap();
        assert_eq!(ride.to, Vertex::new(2, 1, 1));
        assert_eq!(ride.cost, 3);
        assert_eq!(g.neighbors(door, true).len(), 5);
    }

    proptest! {
        #[test]
        fn map_round_trip(
            w in 1u16..7, h in 1u16..7, floors in 1u16..4,
            seed in any::<u64>(), tf in 1u32..5,
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut cells: Vec<(u16, u16)> = (0..h).flat_map(|y| (0..w).map(move |x| (x, y))).collect();
            let n_elev = rng.gen_range(0..=cells.len().min(3));
            let mut elevators = Vec::new();
            for id in 0..n_elev {
                let (x, y) = cells.swap_remove(rng.gen_range(0..cells.len()));
                elevators.push(Elevator { id, x, y, t_floor: tf + id as u32 });
            }
            // ids must follow row-major order to survive the round trip
            elevators.sort_by_key(|e| (e.y, e.x));
            for (id, e) in elevators.iter_mut().enumerate() { e.id = id; }
            let grids = (0..floors).map(|_| {
                let blocked: Vec<_> = cells.iter().copied().filter(|_| rng.gen_bool(0.3)).collect();
                FloorGrid::new(w, h, blocked).unwrap()
            }).collect();
            let g = MultiFloorGraph::new(grids, elevators).unwrap();
            let back = parse_map(&write_map(&g)).unwrap();
            prop_assert_eq!(back, g);
        }

        #[test]
        fn same_floor_moves_are_symmetric(seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let blocked: Vec<_> = (0..6u16).flat_map(|y| (0..6u16).map(move |x| (x, y)))
                .filter(|_| rng.gen_bool(0.25)).collect();
            let g = MultiFloorGraph::uniform(1, FloorGrid::new(6, 6, blocked).unwrap(), vec![]).unwrap();
            for v in g.free_cells(1) {
                for u in g.floor_neighbors(v) {
                    prop_assert!(g.floor_neighbors(u).any(|w| w == v));
                }
            }
        }
    }

    #[test]
    fn elevator_vertex_partition() {
        let g = parse_map(&two_floor_map()).unwrap();
        let mut seen = std::collections::HashSet::new();
        for f in 1..=g.floors() {
            for v in g.free_cells(f) {
                if let Some(k) = g.elevator_at(v) {
                    assert_eq!(g.door(k, f), v);
                    assert!(seen.insert((k, f)));
                }
            }
        }
        assert_eq!(seen.len(), 3 * 2);
    }
}
