//! Elevator timing: ride and reset durations, busy windows, elevator
//! conflict detection and the constraints that resolve those conflicts.
//!
//! An elevator is *occupied* while it carries an agent and *resetting* while
//! it travels empty towards the floor of the next request. A usage that
//! boards at `t_s` on floor `l_s` and leaves on floor `l_g` keeps the
//! elevator busy for a door on floor `f` during the closed window
//! `[t_s, t_s + ride + |l_g - f| * t_floor]`. Elevators start out available.

use std::cmp::Ordering;

use crate::constraint::Constraint;
use crate::model::{MultiFloorGraph, Time, Vertex};
use crate::path::{Path, TimedVertex};

/// Time for elevator `k` to carry a passenger from floor `a` to floor `b`.
pub fn ride_duration(graph: &MultiFloorGraph, k: usize, a: u16, b: u16) -> Time {
    a.abs_diff(b) as Time * graph.elevator(k).t_floor
}

/// Time for elevator `k` to travel empty from `exit_floor` to
/// `next_board_floor`.
pub fn reset_duration(graph: &MultiFloorGraph, k: usize, exit_floor: u16, next_board_floor: u16) -> Time {
    ride_duration(graph, k, exit_floor, next_board_floor)
}

/// Timed door visits of a ride departing `from_floor` at `depart`, excluding
/// the departure door and including the exit door.
pub fn ride_steps(graph: &MultiFloorGraph, k: usize, from_floor: u16, to_floor: u16, depart: Time) -> Vec<TimedVertex> {
    let tf = graph.elevator(k).t_floor;
    let floors: Vec<u16> = if to_floor > from_floor {
        (from_floor + 1..=to_floor).collect()
    } else {
        (to_floor..from_floor).rev().collect()
    };
    floors
        .into_iter()
        .enumerate()
        .map(|(n, f)| TimedVertex::new(graph.door(k, f), depart + (n as Time + 1) * tf))
        .collect()
}

/// One agent's ride.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElevatorUsage {
    pub agent: usize,
    pub elevator: usize,
    pub board_time: Time,
    pub board_floor: u16,
    pub exit_floor: u16,
    pub t_floor: Time,
}

impl ElevatorUsage {
    pub fn ride_time(&self) -> Time {
        self.board_floor.abs_diff(self.exit_floor) as Time * self.t_floor
    }

    pub fn exit_time(&self) -> Time {
        self.board_time + self.ride_time()
    }

    /// Empty travel from the exit floor to `floor`.
    pub fn reset_to(&self, floor: u16) -> Time {
        self.exit_floor.abs_diff(floor) as Time * self.t_floor
    }

    /// Window during which the door on `floor` may not be used by anyone else.
    pub fn door_window(&self, floor: u16) -> (Time, Time) {
        (self.board_time, self.exit_time() + self.reset_to(floor))
    }

    /// Whether `t` falls on the ride itself (boarding, passing or exit).
    pub fn rides_at(&self, t: Time) -> bool {
        self.board_time <= t && t <= self.exit_time()
    }
}

/// `[t_s, t_s + ride + reset]` where the reset heads for `next_floor`.
pub fn busy_interval(u: &ElevatorUsage, next_floor: u16) -> (Time, Time) {
    u.door_window(next_floor)
}

/// Whether two rides of the same elevator collide: either boarding falls in
/// the other's busy interval, each reset measured towards the other's
/// boarding floor.
///
/// # Panics
/// If the usages concern different elevators.
pub fn usages_overlap(a: &ElevatorUsage, b: &ElevatorUsage) -> bool {
    assert_eq!(a.elevator, b.elevator, "usages of different elevators never overlap");
    let (a_lo, a_hi) = busy_interval(a, b.board_floor);
    let (b_lo, b_hi) = busy_interval(b, a.board_floor);
    (b_lo..=b_hi).contains(&a.board_time) || (a_lo..=a_hi).contains(&b.board_time)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElevatorConflict {
    /// Two rides of one elevator overlap. `first.agent < second.agent`.
    Boarding { first: ElevatorUsage, second: ElevatorUsage },
    /// `occupier` stands at `door` at `time` while `rider`'s usage keeps the
    /// elevator busy for that door.
    DoorOccupancy { rider: ElevatorUsage, occupier: usize, door: Vertex, time: Time },
}

impl ElevatorConflict {
    pub fn boarding(a: ElevatorUsage, b: ElevatorUsage) -> Self {
        if a.agent <= b.agent {
            ElevatorConflict::Boarding { first: a, second: b }
        } else {
            ElevatorConflict::Boarding { first: b, second: a }
        }
    }

    pub fn time(&self) -> Time {
        match self {
            ElevatorConflict::Boarding { first, second } => first.board_time.max(second.board_time),
            ElevatorConflict::DoorOccupancy { time, .. } => *time,
        }
    }

    pub fn agents(&self) -> (usize, usize) {
        let (a, b) = match self {
            ElevatorConflict::Boarding { first, second } => (first.agent, second.agent),
            ElevatorConflict::DoorOccupancy { rider, occupier, .. } => (rider.agent, *occupier),
        };
        (a.min(b), a.max(b))
    }

    pub fn elevator(&self) -> usize {
        match self {
            ElevatorConflict::Boarding { first, .. } => first.elevator,
            ElevatorConflict::DoorOccupancy { rider, .. } => rider.elevator,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            ElevatorConflict::Boarding { .. } => 0,
            ElevatorConflict::DoorOccupancy { .. } => 1,
        }
    }

    fn detail(&self) -> (Time, Time, Vertex) {
        match self {
            ElevatorConflict::Boarding { first, second } => {
                (first.board_time, second.board_time, Vertex::new(0, 0, 0))
            }
            ElevatorConflict::DoorOccupancy { rider, door, .. } => (rider.board_time, 0, *door),
        }
    }
}

impl Ord for ElevatorConflict {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.time(), self.agents(), self.rank(), self.elevator(), self.detail()).cmp(&(
            other.time(),
            other.agents(),
            other.rank(),
            other.elevator(),
            other.detail(),
        ))
    }
}

impl PartialOrd for ElevatorConflict {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All elevator conflicts of a joint path, ordered by time then agent pair.
///
/// Presences that belong to an agent's own ride of the elevator are not
/// counted as door occupancy; overlapping rides are reported as boarding
/// conflicts instead.
pub fn detect_elevator_conflicts(paths: &[Path], graph: &MultiFloorGraph) -> Vec<ElevatorConflict> {
    let usages: Vec<Option<ElevatorUsage>> =
        paths.iter().enumerate().map(|(i, p)| p.usage(graph, i)).collect();
    let mut out = Vec::new();

    for (i, ui) in usages.iter().enumerate() {
        let Some(ui) = ui else { continue };
        for uj in usages[i + 1..].iter().flatten() {
            if uj.elevator == ui.elevator && usages_overlap(ui, uj) {
                out.push(ElevatorConflict::boarding(*ui, *uj));
            }
        }
    }

    let last_floor = graph.floors();
    for ui in usages.iter().flatten() {
        let widest = ui.exit_time() + ui.reset_to(1).max(ui.reset_to(last_floor));
        for (j, pj) in paths.iter().enumerate() {
            if j == ui.agent {
                continue;
            }
            let own = usages[j].filter(|u| u.elevator == ui.elevator);
            for t in ui.board_time..=widest {
                let Some(v) = pj.position_at(t) else { continue };
                if graph.elevator_at(v) != Some(ui.elevator) {
                    continue;
                }
                if own.is_some_and(|u| u.rides_at(t)) {
                    continue;
                }
                if t <= ui.door_window(v.floor).1 {
                    out.push(ElevatorConflict::DoorOccupancy { rider: *ui, occupier: j, door: v, time: t });
                }
            }
        }
    }
    out.sort();
    out
}

/// Range constraints resolving a boarding conflict: each agent is barred
/// from boarding from its own boarding time until the other's busy interval
/// (reset measured towards this agent's floor) ends.
///
/// # Panics
/// If `c` is not a boarding conflict.
pub fn ec_constraints(c: &ElevatorConflict) -> [(usize, Constraint); 2] {
    let ElevatorConflict::Boarding { first, second } = c else {
        panic!("ec_constraints needs a boarding conflict");
    };
    let range = |me: &ElevatorUsage, other: &ElevatorUsage| Constraint::Boarding {
        elevator: me.elevator,
        floor: me.board_floor,
        from: me.board_time,
        to: busy_interval(other, me.board_floor).1,
    };
    [(first.agent, range(first, second)), (second.agent, range(second, first))]
}

/// Single-timestep boarding bans at the two conflicting boarding times.
///
/// # Panics
/// If `c` is not a boarding conflict.
pub fn point_boarding_constraints(c: &ElevatorConflict) -> [(usize, Constraint); 2] {
    let ElevatorConflict::Boarding { first, second } = c else {
        panic!("point_boarding_constraints needs a boarding conflict");
    };
    let point = |u: &ElevatorUsage| Constraint::Boarding {
        elevator: u.elevator,
        floor: u.board_floor,
        from: u.board_time,
        to: u.board_time,
    };
    [(first.agent, point(first)), (second.agent, point(second))]
}

/// Branches for a door occupancy conflict: the occupier may not stand at
/// the door at that time, or the rider may not board at any time whose
/// busy window would cover it.
///
/// # Panics
/// If `c` is not a door occupancy conflict.
pub fn occupancy_constraints(c: &ElevatorConflict) -> [(usize, Constraint); 2] {
    let ElevatorConflict::DoorOccupancy { rider, occupier, door, time } = *c else {
        panic!("occupancy_constraints needs a door occupancy conflict");
    };
    let span = rider.ride_time() + rider.reset_to(door.floor);
    [
        (occupier, Constraint::Vertex { vertex: door, time }),
        (
            rider.agent,
            Constraint::Boarding {
                elevator: rider.elevator,
                floor: rider.board_floor,
                from: time.saturating_sub(span),
                to: time,
            },
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Elevator, FloorGrid};
    use proptest::prelude::*;

    fn usage(agent: usize, t: Time, from: u16, to: u16, tf: Time) -> ElevatorUsage {
        ElevatorUsage { agent, elevator: 0, board_time: t, board_floor: from, exit_floor: to, t_floor: tf }
    }

    fn graph(floors: u16, tf: Time) -> MultiFloorGraph {
        let e = Elevator { id: 0, x: 0, y: 0, t_floor: tf };
        MultiFloorGraph::uniform(floors, FloorGrid::open(4, 2).unwrap(), vec![e]).unwrap()
    }

    #[test]
    fn ride_and_reset_durations() {
        let g3 = graph(5, 3);
        assert_eq!(ride_duration(&g3, 0, 1, 1), 0);
        assert_eq!(ride_duration(&g3, 0, 1, 2), 3);
        assert_eq!(ride_duration(&graph(2, 1), 0, 1, 2), 1);
        assert_eq!(reset_duration(&graph(2, 1), 0, 2, 1), 1);
        assert_eq!(reset_duration(&g3, 0, 5, 5), 0);
        assert_eq!(reset_duration(&g3, 0, 1, 5), 12);
    }

    #[test]
    fn busy_interval_examples() {
        // t_s=1, t_o=1, t_r=1
        assert_eq!(busy_interval(&usage(0, 1, 1, 2, 1), 1), (1, 3));
        assert_eq!(busy_interval(&usage(0, 5, 1, 3, 3), 3), (5, 11));
        assert_eq!(busy_interval(&usage(0, 0, 1, 2, 1), 1), (0, 2));
    }

    #[test]
    fn overlap_examples() {
        let i = usage(0, 1, 1, 2, 1);
        assert!(usages_overlap(&i, &usage(1, 3, 1, 2, 1)));
        assert!(!usages_overlap(&i, &usage(1, 4, 1, 2, 1)));
        assert!(usages_overlap(&i, &usage(1, 1, 2, 1, 1)));
    }

    #[test]
    #[should_panic]
    fn overlap_requires_same_elevator() {
        let mut other = usage(1, 1, 1, 2, 1);
        other.elevator = 1;
        usages_overlap(&usage(0, 1, 1, 2, 1), &other);
    }

    #[test]
    fn ec_examples() {
        let c = ElevatorConflict::boarding(usage(0, 1, 1, 2, 1), usage(1, 1, 1, 2, 1));
        let [(i, ci), (j, cj)] = ec_constraints(&c);
        assert_eq!((i, j), (0, 1));
        assert_eq!(ci, Constraint::Boarding { elevator: 0, floor: 1, from: 1, to: 3 });
        assert_eq!(cj, Constraint::Boarding { elevator: 0, floor: 1, from: 1, to: 3 });

        // i: floor 1 -> 2 boarding at 2, j: floor 1 -> 3 boarding at 4, t_floor 3
        let c = ElevatorConflict::boarding(usage(0, 2, 1, 2, 3), usage(1, 4, 1, 3, 3));
        assert!(usages_overlap(&usage(0, 2, 1, 2, 3), &usage(1, 4, 1, 3, 3)));
        let [(_, ci), (_, cj)] = ec_constraints(&c);
        // [2, 4 + 6 + 6] and [4, 2 + 3 + 3]
        assert_eq!(ci, Constraint::Boarding { elevator: 0, floor: 1, from: 2, to: 16 });
        assert_eq!(cj, Constraint::Boarding { elevator: 0, floor: 1, from: 4, to: 8 });
    }

    #[test]
    fn occupancy_examples() {
        let c = ElevatorConflict::DoorOccupancy {
            rider: usage(0, 1, 1, 2, 1),
            occupier: 1,
            door: Vertex::new(1, 0, 0),
            time: 3,
        };
        let [(a, ca), (b, cb)] = occupancy_constraints(&c);
        assert_eq!((a, ca), (1, Constraint::Vertex { vertex: Vertex::new(1, 0, 0), time: 3 }));
        assert_eq!((b, cb), (0, Constraint::Boarding { elevator: 0, floor: 1, from: 1, to: 3 }));

        let early = ElevatorConflict::DoorOccupancy {
            rider: usage(0, 0, 1, 3, 2),
            occupier: 1,
            door: Vertex::new(1, 0, 0),
            time: 2,
        };
        let [_, (_, cb)] = occupancy_constraints(&early);
        assert_eq!(cb, Constraint::Boarding { elevator: 0, floor: 1, from: 0, to: 2 });
    }

    fn tv(f: u16, x: u16, y: u16, t: Time) -> TimedVertex {
        TimedVertex::new(Vertex::new(f, x, y), t)
    }

    #[test]
    fn waiting_at_the_door_during_reset() {
        // i boards at 1 (1 -> 2), j reaches the floor-1 door at 3 and boards
        let g = graph(2, 1);
        let i = Path::new(vec![tv(1, 1, 0, 0), tv(1, 0, 0, 1), tv(2, 0, 0, 2), tv(2, 1, 0, 3)]);
        let j = Path::new(vec![tv(1, 3, 0, 0), tv(1, 2, 0, 1), tv(1, 1, 0, 2), tv(1, 0, 0, 3), tv(2, 0, 0, 4), tv(2, 0, 1, 5)]);
        let found = detect_elevator_conflicts(&[i.clone(), j], &g);
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].time(), 3);
        assert!(matches!(found[0], ElevatorConflict::Boarding { .. }));

        // j arrives at 3 and boards at 4: the wait at 3 is an occupancy conflict
        let late = Path::new(vec![
            tv(1, 3, 0, 0), tv(1, 2, 0, 1), tv(1, 1, 0, 2), tv(1, 0, 0, 3), tv(1, 0, 0, 4), tv(2, 0, 0, 5), tv(2, 0, 1, 6),
        ]);
        let found = detect_elevator_conflicts(&[i.clone(), late], &g);
        assert_eq!(found.len(), 1);
        assert!(matches!(found[0], ElevatorConflict::DoorOccupancy { occupier: 1, time: 3, .. }));

        // one tick past the window
        let later = Path::new(vec![
            tv(1, 3, 0, 0), tv(1, 2, 0, 1), tv(1, 1, 0, 2), tv(1, 1, 0, 3), tv(1, 0, 0, 4), tv(2, 0, 0, 5), tv(2, 0, 1, 6),
        ]);
        assert!(detect_elevator_conflicts(&[i, later], &g).is_empty());
    }

    #[test]
    fn different_elevators_do_not_conflict() {
        let e0 = Elevator { id: 0, x: 0, y: 0, t_floor: 1 };
        let e1 = Elevator { id: 1, x: 3, y: 0, t_floor: 1 };
        let g = MultiFloorGraph::uniform(2, FloorGrid::open(4, 2).unwrap(), vec![e0, e1]).unwrap();
        let i = Path::new(vec![tv(1, 0, 1, 0), tv(1, 0, 0, 1), tv(2, 0, 0, 2), tv(2, 0, 1, 3)]);
        let j = Path::new(vec![tv(1, 3, 1, 0), tv(1, 3, 0, 1), tv(2, 3, 0, 2), tv(2, 3, 1, 3)]);
        assert!(detect_elevator_conflicts(&[i, j], &g).is_empty());
    }

    /// Window closing exactly at `t_g + Δ`: every occupancy time is checked
    /// against a direct enumeration of the closed window.
    #[test]
    fn occupancy_window_is_closed() {
        let g = graph(3, 2);
        // rider boards floor 1 at 1, exits floor 3 at 5
        let rider = Path::new(vec![tv(1, 1, 0, 0), tv(1, 0, 0, 1), tv(2, 0, 0, 3), tv(3, 0, 0, 5), tv(3, 1, 0, 6)]);
        for floor in 1..=3u16 {
            for arrive in 0..14 {
                let mut steps: Vec<TimedVertex> = (0..arrive).map(|t| tv(floor, 1, 1, t)).collect();
                steps.push(tv(floor, 0, 1, arrive));
                steps.push(tv(floor, 0, 0, arrive + 1));
                steps.push(tv(floor, 0, 1, arrive + 2));
                let other = Path::new(steps);
                let found = detect_elevator_conflicts(&[rider.clone(), other], &g);
                let at = arrive + 1;
                let window_end = 5 + 2 * (3 - floor as Time);
                let expect = (1..=window_end).contains(&at);
                let occ = found.iter().any(|c| matches!(c, ElevatorConflict::DoorOccupancy { time, .. } if *time == at));
                assert_eq!(occ, expect, "floor {floor} at {at}");
            }
        }
    }

    /// Random valid paths built from the graph's own move list.
    fn random_path(g: &MultiFloorGraph, rng: &mut impl rand::Rng, start: Vertex, len: usize) -> Path {
        let mut steps = vec![TimedVertex::new(start, 0)];
        let mut rode = false;
        for _ in 0..len {
            let here = *steps.last().unwrap();
            let moves = g.neighbors(here.vertex, rode);
            let m = moves[rng.gen_range(0..moves.len())];
            match m.kind {
                crate::model::MoveKind::Board { elevator, to_floor } => {
                    rode = true;
                    steps.extend(ride_steps(g, elevator, here.vertex.floor, to_floor, here.time));
                }
                _ => steps.push(TimedVertex::new(m.to, here.time + 1)),
            }
        }
        Path::new(steps)
    }

    #[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
    enum Seen {
        Boarding(usize, usize),
        Occupancy(usize, usize, Vertex, Time),
    }

    /// (elevator, board time, board floor, exit time, exit floor)
    type Ride = (usize, Time, u16, Time, u16);

    /// Independent detector: simulate every elevator tick by tick in terms of
    /// its state relative to each usage.
    fn state_machine_conflicts(paths: &[Path], g: &MultiFloorGraph) -> std::collections::HashSet<Seen> {
        let mut seen = std::collections::HashSet::new();
        let horizon = paths.iter().map(Path::cost).max().unwrap_or(0) + 40;
        let rides: Vec<Option<Ride>> = paths
            .iter()
            .map(|p| {
                let mut board = None;
                let mut exit = None;
                for w in p.steps.windows(2) {
                    if w[0].vertex.floor != w[1].vertex.floor {
                        if board.is_none() {
                            board = Some(w[0]);
                        }
                        exit = Some(w[1]);
                    }
                }
                board.map(|b| {
                    let e = exit.unwrap();
                    (g.elevator_at(b.vertex).unwrap(), b.time, b.vertex.floor, e.time, e.vertex.floor)
                })
            })
            .collect();
        for (i, ri) in rides.iter().enumerate() {
            let Some((k, ts, _, tg, lg)) = *ri else { continue };
            let tf = g.elevator(k).t_floor;
            for t in 0..=horizon {
                // state of elevator k w.r.t. usage i, per floor
                let busy_for = |floor: u16| -> bool {
                    if t < ts {
                        return false;
                    }
                    if t <= tg {
                        return true; // occupied
                    }
                    t <= tg + lg.abs_diff(floor) as Time * tf // resetting
                };
                for (j, pj) in paths.iter().enumerate() {
                    if j == i {
                        continue;
                    }
                    if let Some((kj, tsj, lsj, _, _)) = rides[j] {
                        if kj == k && tsj == t && busy_for(lsj) {
                            seen.insert(Seen::Boarding(i.min(j), i.max(j)));
                        }
                    }
                    let Some(v) = pj.position_at(t) else { continue };
                    if g.elevator_at(v) != Some(k) {
                        continue;
                    }
                    let own_ride = rides[j].is_some_and(|(kj, tsj, _, tgj, _)| kj == k && tsj <= t && t <= tgj);
                    if !own_ride && busy_for(v.floor) {
                        seen.insert(Seen::Occupancy(i, j, v, t));
                    }
                }
            }
        }
        seen
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(400))]

        /// Any boarding inside the two EC ranges yields intersecting busy
        /// intervals.
        #[test]
        fn ec_ranges_are_disjunctive(
            tsi in 0u32..30, tsj in 0u32..30, toi in 0u32..12, toj in 0u32..12,
            tri in 0u32..12, trj in 0u32..12,
        ) {
            for x in tsi..=tsj + toj + trj {
                for y in tsj..=tsi + toi + tri {
                    let (ai, bi) = (x, x + toi + tri);
                    let (aj, bj) = (y, y + toj + trj);
                    prop_assert!(ai <= bj && aj <= bi);
                }
            }
        }

        #[test]
        fn overlap_is_symmetric(
            a in (0u32..20, 1u16..5, 1u16..5), b in (0u32..20, 1u16..5, 1u16..5), tf in 1u32..4,
        ) {
            let ua = usage(0, a.0, a.1, a.2, tf);
            let ub = usage(1, b.0, b.1, b.2, tf);
            prop_assert_eq!(usages_overlap(&ua, &ub), usages_overlap(&ub, &ua));
        }

        #[test]
        fn detection_matches_state_machine(seed in any::<u64>(), n in 2usize..5) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let e0 = Elevator { id: 0, x: 0, y: 0, t_floor: 1 };
            let e1 = Elevator { id: 1, x: 2, y: 1, t_floor: 2 };
            let g = MultiFloorGraph::uniform(3, FloorGrid::open(3, 2).unwrap(), vec![e0, e1]).unwrap();
            let starts: Vec<Vertex> = g.free_cells(1).chain(g.free_cells(2)).chain(g.free_cells(3)).collect();
            let paths: Vec<Path> = (0..n)
                .map(|_| {
                    let s = starts[rand::Rng::gen_range(&mut rng, 0..starts.len())];
                    random_path(&g, &mut rng, s, 10)
                })
                .collect();
            let found = detect_elevator_conflicts(&paths, &g);
            let mut ours = std::collections::HashSet::new();
            for c in &found {
                match *c {
                    ElevatorConflict::Boarding { first, second } => { ours.insert(Seen::Boarding(first.agent, second.agent)); }
                    ElevatorConflict::DoorOccupancy { rider, occupier, door, time } => {
                        ours.insert(Seen::Occupancy(rider.agent, occupier, door, time));
                    }
                }
            }
            prop_assert_eq!(ours, state_machine_conflicts(&paths, &g));
            for w in found.windows(2) {
                prop_assert!(w[0] <= w[1]);
            }

            if found.is_empty() {
                // no two agents ever share a cabin
                let rides: Vec<ElevatorUsage> = paths.iter().enumerate().filter_map(|(i, p)| p.usage(&g, i)).collect();
                for a in &rides {
                    for b in &rides {
                        if a.agent != b.agent && a.elevator == b.elevator {
                            prop_assert!(a.exit_time() < b.board_time || b.exit_time() < a.board_time);
                        }
                    }
                }
            }
        }
    }
}
