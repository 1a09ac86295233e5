//! Per-agent constraints and the interval bookkeeping behind them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::model::{MultiFloorGraph, Time, Vertex};
use crate::path::Path;

/// Open-ended upper bound of a safe interval.
pub const FOREVER: Time = Time::MAX;

/// Sorted, disjoint closed intervals. Adjacent intervals are merged.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct IntervalSet {
    spans: Vec<(Time, Time)>,
}

impl IntervalSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn spans(&self) -> &[(Time, Time)] {
        &self.spans
    }

    pub fn is_empty(&self) -> bool {
        self.spans.is_empty()
    }

    /// Inserts `[lo, hi]`; returns whether any new time became covered.
    pub fn insert(&mut self, lo: Time, hi: Time) -> bool {
        assert!(lo <= hi, "empty interval [{lo}, {hi}]");
        if self.covers(lo, hi) {
            return false;
        }
        // first span that could touch [lo, hi]
        let start = self.spans.partition_point(|&(_, e)| e.saturating_add(1) < lo);
        let mut end = start;
        let (mut new_lo, mut new_hi) = (lo, hi);
        while end < self.spans.len() && self.spans[end].0 <= hi.saturating_add(1) {
            new_lo = new_lo.min(self.spans[end].0);
            new_hi = new_hi.max(self.spans[end].1);
            end += 1;
        }
        self.spans.splice(start..end, [(new_lo, new_hi)]);
        true
    }

    pub fn contains(&self, t: Time) -> bool {
        let i = self.spans.partition_point(|&(_, e)| e < t);
        i < self.spans.len() && self.spans[i].0 <= t
    }

    /// Whether every time in `[lo, hi]` is covered.
    pub fn covers(&self, lo: Time, hi: Time) -> bool {
        let i = self.spans.partition_point(|&(_, e)| e < lo);
        i < self.spans.len() && self.spans[i].0 <= lo && self.spans[i].1 >= hi
    }

    /// First covered time at or after `t`.
    pub fn next_covered(&self, t: Time) -> Option<Time> {
        let i = self.spans.partition_point(|&(_, e)| e < t);
        self.spans.get(i).map(|&(s, _)| s.max(t))
    }

    /// Earliest time `>= t` that is not covered, if any.
    pub fn next_free(&self, t: Time) -> Option<Time> {
        let i = self.spans.partition_point(|&(_, e)| e < t);
        match self.spans.get(i) {
            Some(&(s, e)) if s <= t => e.checked_add(1),
            _ => Some(t),
        }
    }

    pub fn max_end(&self) -> Option<Time> {
        self.spans.last().map(|&(_, e)| e)
    }

    /// The complement over `[0, FOREVER]`, in order.
    pub fn complement(&self) -> Vec<(Time, Time)> {
        let mut out = Vec::with_capacity(self.spans.len() + 1);
        let mut next = 0;
        for &(s, e) in &self.spans {
            if s > next {
                out.push((next, s - 1));
            }
            if e == FOREVER {
                return out;
            }
            next = e + 1;
        }
        out.push((next, FOREVER));
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Constraint {
    /// The agent may not be at `vertex` at `time`.
    Vertex { vertex: Vertex, time: Time },
    /// The agent may not step from `from` to `to` departing at `time`.
    Edge { from: Vertex, to: Vertex, time: Time },
    /// The agent may not start a ride of `elevator` from its door on
    /// `floor` at any time in `[from, to]`.
    Boarding { elevator: usize, floor: u16, from: Time, to: Time },
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::Vertex { vertex, time } => write!(f, "vertex {vertex}@{time}"),
            Constraint::Edge { from, to, time } => write!(f, "edge {from}->{to}@{time}"),
            Constraint::Boarding { elevator, floor, from, to } => {
                write!(f, "board elevator {elevator} floor {floor} during [{from},{to}]")
            }
        }
    }
}

/// The constraints imposed on one agent.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConstraintSet {
    vertex_bans: BTreeMap<Vertex, IntervalSet>,
    edge_bans: BTreeSet<(Vertex, Vertex, Time)>,
    boarding_bans: BTreeMap<(usize, u16), IntervalSet>,
    max_time: Time,
}

impl ConstraintSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `c`; returns whether the set changed.
    pub fn add(&mut self, c: Constraint) -> bool {
        let changed = match c {
            Constraint::Vertex { vertex, time } => {
                self.vertex_bans.entry(vertex).or_default().insert(time, time)
            }
            Constraint::Edge { from, to, time } => self.edge_bans.insert((from, to, time)),
            Constraint::Boarding { elevator, floor, from, to } => {
                self.boarding_bans.entry((elevator, floor)).or_default().insert(from, to)
            }
        };
        if changed {
            let end = match c {
                Constraint::Vertex { time, .. } | Constraint::Edge { time, .. } => time,
                Constraint::Boarding { to, .. } => to,
            };
            self.max_time = self.max_time.max(end);
        }
        changed
    }

    pub fn with(mut self, constraints: impl IntoIterator<Item = Constraint>) -> Self {
        for c in constraints {
            self.add(c);
        }
        self
    }

    pub fn is_empty(&self) -> bool {
        self.vertex_bans.is_empty() && self.edge_bans.is_empty() && self.boarding_bans.is_empty()
    }

    /// Latest time mentioned by any constraint (0 when empty).
    pub fn max_time(&self) -> Time {
        self.max_time
    }

    pub fn vertex_banned(&self, v: Vertex, t: Time) -> bool {
        self.vertex_bans.get(&v).is_some_and(|s| s.contains(t))
    }

    /// Whether `v` is banned at any time at or after `t`.
    pub fn vertex_banned_from(&self, v: Vertex, t: Time) -> bool {
        self.vertex_bans.get(&v).and_then(|s| s.max_end()).is_some_and(|e| e >= t)
    }

    pub fn edge_banned(&self, from: Vertex, to: Vertex, t: Time) -> bool {
        self.edge_bans.contains(&(from, to, t))
    }

    pub fn boarding_banned(&self, elevator: usize, floor: u16, t: Time) -> bool {
        self.boarding_bans.get(&(elevator, floor)).is_some_and(|s| s.contains(t))
    }

    pub fn boarding_bans(&self, elevator: usize, floor: u16) -> Option<&IntervalSet> {
        self.boarding_bans.get(&(elevator, floor))
    }

    /// Maximal intervals during which `v` is not banned, in time order. The
    /// last one always ends at [`FOREVER`].
    pub fn safe_intervals(&self, v: Vertex) -> Vec<(Time, Time)> {
        match self.vertex_bans.get(&v) {
            Some(bans) => bans.complement(),
            None => vec![(0, FOREVER)],
        }
    }

    pub fn has_vertex_bans(&self, v: Vertex) -> bool {
        self.vertex_bans.contains_key(&v)
    }

    /// Whether every constraint of `other` is implied by `self`.
    pub fn is_superset_of(&self, other: &ConstraintSet) -> bool {
        other.vertex_bans.iter().all(|(v, set)| {
            set.spans().iter().all(|&(s, e)| self.vertex_bans.get(v).is_some_and(|m| m.covers(s, e)))
        }) && other.edge_bans.is_subset(&self.edge_bans)
            && other.boarding_bans.iter().all(|(key, set)| {
                set.spans().iter().all(|&(s, e)| self.boarding_bans.get(key).is_some_and(|m| m.covers(s, e)))
            })
    }

    /// All constraints, vertex bans expanded to single times.
    pub fn iter(&self) -> impl Iterator<Item = Constraint> + '_ {
        let vertex = self.vertex_bans.iter().flat_map(|(&vertex, set)| {
            set.spans().iter().flat_map(move |&(s, e)| (s..=e).map(move |time| Constraint::Vertex { vertex, time }))
        });
        let edge = self.edge_bans.iter().map(|&(from, to, time)| Constraint::Edge { from, to, time });
        let boarding = self.boarding_bans.iter().flat_map(|(&(elevator, floor), set)| {
            set.spans().iter().map(move |&(from, to)| Constraint::Boarding { elevator, floor, from, to })
        });
        vertex.chain(edge).chain(boarding)
    }

    /// Constraints of this set broken by `path` (the agent rests at its goal
    /// after the last step).
    pub fn violations(&self, path: &Path, graph: &MultiFloorGraph) -> Vec<Constraint> {
        let mut out = Vec::new();
        for s in &path.steps {
            if self.vertex_banned(s.vertex, s.time) {
                out.push(Constraint::Vertex { vertex: s.vertex, time: s.time });
            }
        }
        let (goal, end) = (path.goal(), path.cost());
        if let Some(bans) = self.vertex_bans.get(&goal) {
            for &(s, e) in bans.spans() {
                for time in s.max(end + 1)..=e {
                    out.push(Constraint::Vertex { vertex: goal, time });
                }
            }
        }
        for w in path.steps.windows(2) {
            if w[0].vertex != w[1].vertex
                && w[0].vertex.floor == w[1].vertex.floor
                && self.edge_banned(w[0].vertex, w[1].vertex, w[0].time)
            {
                out.push(Constraint::Edge { from: w[0].vertex, to: w[1].vertex, time: w[0].time });
            }
        }
        if let Some(u) = path.usage(graph, 0) {
            if self.boarding_banned(u.elevator, u.board_floor, u.board_time) {
                out.push(Constraint::Boarding {
                    elevator: u.elevator,
                    floor: u.board_floor,
                    from: u.board_time,
                    to: u.board_time,
                });
            }
        }
        out
    }

    pub fn satisfied_by(&self, path: &Path, graph: &MultiFloorGraph) -> bool {
        self.violations(path, graph).is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(spans: &[(Time, Time)]) -> IntervalSet {
        let mut s = IntervalSet::new();
        for &(a, b) in spans {
            s.insert(a, b);
        }
        s
    }

    #[test]
    fn next_free_skips_spans() {
        let s = set(&[(2, 4), (5, 6), (9, FOREVER)]);
        assert_eq!(s.next_free(0), Some(0));
        assert_eq!(s.next_free(2), Some(7));
        assert_eq!(s.next_free(8), Some(8));
        assert_eq!(s.next_free(10), None);
    }

    #[test]
    fn safe_interval_examples() {
        let v = Vertex::new(1, 0, 0);
        let mut cs = ConstraintSet::new();
        assert_eq!(cs.safe_intervals(v), vec![(0, FOREVER)]);

        cs.add(Constraint::Vertex { vertex: v, time: 1 });
        cs.add(Constraint::Vertex { vertex: v, time: 2 });
        cs.add(Constraint::Vertex { vertex: v, time: 3 });
        assert_eq!(cs.safe_intervals(v), vec![(0, 0), (4, FOREVER)]);

        let s = set(&[(2, 4), (5, 6)]);
        assert_eq!(s.spans(), &[(2, 6)]);
        assert_eq!(s.complement(), vec![(0, 1), (7, FOREVER)]);
    }

    #[test]
    fn ban_from_zero() {
        assert_eq!(set(&[(0, 2)]).complement(), vec![(3, FOREVER)]);
        assert_eq!(set(&[(0, FOREVER)]).complement(), vec![]);
    }

    #[test]
    fn insert_reports_change() {
        let mut s = IntervalSet::new();
        assert!(s.insert(3, 5));
        assert!(!s.insert(4, 4));
        assert!(s.insert(5, 7));
        assert_eq!(s.spans(), &[(3, 7)]);
        assert!(s.insert(0, 1));
        assert_eq!(s.spans(), &[(0, 1), (3, 7)]);
        assert!(s.insert(2, 2));
        assert_eq!(s.spans(), &[(0, 7)]);
        assert_eq!(s.next_covered(8), None);
        assert_eq!(s.next_covered(4), Some(4));
    }

    #[test]
    fn boarding_ranges() {
        let mut cs = ConstraintSet::new();
        assert!(cs.add(Constraint::Boarding { elevator: 0, floor: 1, from: 1, to: 3 }));
        assert!(cs.boarding_banned(0, 1, 1));
        assert!(cs.boarding_banned(0, 1, 3));
        assert!(!cs.boarding_banned(0, 1, 4));
        assert!(!cs.boarding_banned(0, 2, 2));
        assert_eq!(cs.max_time(), 3);
    }

    proptest! {
        #[test]
        fn interval_set_matches_bitmap(ops in proptest::collection::vec((0u32..40, 0u32..6), 0..12)) {
            let mut s = IntervalSet::new();
            let mut bits = [false; 50];
            for (lo, len) in ops {
                s.insert(lo, lo + len);
                for b in &mut bits[lo as usize..=(lo + len) as usize] { *b = true; }
            }
            for (t, &b) in bits.iter().enumerate() {
                prop_assert_eq!(s.contains(t as Time), b);
            }
            // normalized: sorted, disjoint, non-adjacent
            for w in s.spans().windows(2) {
                prop_assert!(w[0].1 + 1 < w[1].0);
            }
            let comp = s.complement();
            for (t, &b) in bits.iter().enumerate() {
                let t = t as Time;
                prop_assert_eq!(comp.iter().any(|&(a, e)| a <= t && t <= e), !b);
            }
        }
    }
}
