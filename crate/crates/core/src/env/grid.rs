//! Office gridworld maps.

use std::collections::VecDeque;

use super::{Nmdp, Outcome, Policy, RewardSource};
use crate::error::{Error, Result};
use crate::label::Label;
use crate::prm::Prm;

/// Action names, in index order.
pub const ACTIONS: [&str; 4] = ["N", "S", "E", "W"];
const DELTAS: [(isize, isize); 4] = [(-1, 0), (1, 0), (0, 1), (0, -1)];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cell {
    Empty,
    Wall,
    Coffee,
    Office,
    Decoration,
    Start,
}

impl Cell {
    fn from_char(c: char) -> Option<Cell> {
        Some(match c {
            '.' => Cell::Empty,
            '#' => Cell::Wall,
            'c' => Cell::Coffee,
            'o' => Cell::Office,
            '*' => Cell::Decoration,
            'A' => Cell::Start,
            _ => return None,
        })
    }

    /// Proposition true when entering the cell.
    pub fn proposition(self) -> Option<&'static str> {
        match self {
            Cell::Coffee => Some("c"),
            Cell::Office => Some("o"),
            Cell::Decoration => Some("*"),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMap {
    width: usize,
    height: usize,
    cells: Vec<Cell>,
    // row-major index of each non-wall cell's state, `usize::MAX` for walls
    state_of: Vec<usize>,
    cell_of: Vec<usize>,
}

impl GridMap {
    pub fn parse(text: &str) -> Result<Self> {
        let rows: Vec<&str> = text
            .lines()
            .map(str::trim_end)
            .filter(|l| !l.is_empty())
            .collect();
        if rows.is_empty() {
            return Err(Error::MapParse { row: 0, col: 0, msg: "empty map".into() });
        }
        let width = rows[0].chars().count();
        let mut cells = Vec::with_capacity(width * rows.len());
        for (r, row) in rows.iter().enumerate() {
            let n = row.chars().count();
            if n != width {
                return Err(Error::MapParse {
                    row: r + 1,
                    col: n.min(width) + 1,
                    msg: format!("row has {n} cells, expected {width}"),
                });
            }
            for (c, ch) in row.chars().enumerate() {
                let cell = Cell::from_char(ch).ok_or_else(|| Error::MapParse {
                    row: r + 1,
                    col: c + 1,
                    msg: format!("unexpected character `{ch}`"),
                })?;
                cells.push(cell);
            }
        }
        let starts = cells.iter().filter(|&&c| c == Cell::Start).count();
        if starts != 1 {
            return Err(Error::MapParse {
                row: 0,
                col: 0,
                msg: format!("expected exactly one start cell, found {starts}"),
            });
        }
        let mut state_of = vec![usize::MAX; cells.len()];
        let mut cell_of = Vec::new();
        for (i, c) in cells.iter().enumerate() {
            if *c != Cell::Wall {
                state_of[i] = cell_of.len();
                cell_of.push(i);
            }
        }
        Ok(Self {
            width,
            height: rows.len(),
            cells,
            state_of,
            cell_of,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cell(&self, row: usize, col: usize) -> Cell {
        self.cells[row * self.width + col]
    }

    pub fn num_states(&self) -> usize {
        self.cell_of.len()
    }

    pub fn state_at(&self, row: usize, col: usize) -> Option<usize> {
        (row < self.height && col < self.width)
            .then(|| self.state_of[row * self.width + col])
            .filter(|&s| s != usize::MAX)
    }

    pub fn position(&self, state: usize) -> (usize, usize) {
        let i = self.cell_of[state];
        (i / self.width, i % self.width)
    }

    pub fn state_cell(&self, state: usize) -> Cell {
        self.cells[self.cell_of[state]]
    }

    pub fn start(&self) -> usize {
        (0..self.num_states())
            .find(|&s| self.state_cell(s) == Cell::Start)
            .expect("validated on parse")
    }

    /// Deterministic successor; blocked moves stay put.
    pub fn move_from(&self, state: usize, action: usize) -> usize {
        let (r, c) = self.position(state);
        let (dr, dc) = DELTAS[action];
        let (nr, nc) = (r as isize + dr, c as isize + dc);
        if nr < 0 || nc < 0 {
            return state;
        }
        self.state_at(nr as usize, nc as usize).unwrap_or(state)
    }

    fn bfs_to(&self, target: Cell) -> Vec<Option<usize>> {
        // distance to the nearest `target` cell, by reverse search
        let n = self.num_states();
        let mut dist = vec![None; n];
        let mut queue = VecDeque::new();
        for s in 0..n {
            if self.state_cell(s) == target {
                dist[s] = Some(0);
                queue.push_back(s);
            }
        }
        while let Some(s) = queue.pop_front() {
            let d = dist[s].unwrap();
            for p in 0..n {
                if dist[p].is_none() && (0..4).any(|a| self.move_from(p, a) == s) {
                    dist[p] = Some(d + 1);
                    queue.push_back(p);
                }
            }
        }
        dist
    }

    /// First action (in `N,S,E,W` order) that gets one step closer to `target`.
    fn greedy_actions(&self, target: Cell) -> Vec<Option<usize>> {
        let dist = self.bfs_to(target);
        (0..self.num_states())
            .map(|s| {
                let d = dist[s]?;
                if d == 0 {
                    return None;
                }
                (0..4).find(|&a| dist[self.move_from(s, a)] == Some(d - 1))
            })
            .collect()
    }
}

/// Gridworld environment over the propositions of `truth`.
pub fn build_office_nmdp(map: &GridMap, truth: &Prm) -> Result<Nmdp> {
    let ap = truth.ap().clone();
    let mut labels = Vec::with_capacity(map.num_states());
    for s in 0..map.num_states() {
        let label = match map.state_cell(s).proposition() {
            Some(p) => ap.label([p]).map_err(|_| {
                Error::InvalidEnvironment(format!("map uses `{p}` but the reward machine has no such proposition"))
            })?,
            None => Label::EMPTY,
        };
        labels.push(label);
    }
    let states = (0..map.num_states())
        .map(|s| {
            let (r, c) = map.position(s);
            format!("r{r}c{c}")
        })
        .collect();
    let transitions = (0..map.num_states())
        .map(|s| {
            (0..ACTIONS.len())
                .map(|a| {
                    let next = map.move_from(s, a);
                    Some(vec![Outcome {
                        next,
                        prob: 1.0,
                        label: labels[next],
                    }])
                })
                .collect()
        })
        .collect();
    Nmdp::new(
        ap,
        states,
        ACTIONS.iter().map(|s| s.to_string()).collect(),
        map.start(),
        transitions,
        RewardSource::Prm(truth.clone()),
    )
}

/// Pure positional policy that walks a shortest path from the start through
/// the nearest cell of each waypoint in turn. Cells off the path head for the
/// first waypoint.
pub fn shortest_path_policy(map: &GridMap, waypoints: &[Cell]) -> Result<Policy> {
    let n = map.num_states();
    let first = waypoints
        .first()
        .ok_or_else(|| Error::InvalidEnvironment("no waypoints".into()))?;
    let default = map.greedy_actions(*first);
    let mut chosen: Vec<Option<usize>> = vec![None; n];
    let mut s = map.start();
    for &w in waypoints {
        let greedy = map.greedy_actions(w);
        while map.state_cell(s) != w {
            let a = greedy[s].ok_or_else(|| Error::InvalidEnvironment(format!("waypoint {w:?} unreachable")))?;
            match chosen[s] {
                Some(b) if b != a => {
                    return Err(Error::InvalidEnvironment(format!(
                        "path revisits cell {:?} with a different action",
                        map.position(s)
                    )))
                }
                _ => chosen[s] = Some(a),
            }
            s = map.move_from(s, a);
        }
    }
    let actions: Vec<usize> = (0..n).map(|s| chosen[s].or(default[s]).unwrap_or(0)).collect();
    Ok(Policy::deterministic(&actions))
}
