//! Four Rooms gridworld, the GridWalk-style behavior policy, and per-cell
//! residual maps.
//!
//! The grid is 11×11 with walls along row 5 and column 5, broken by four
//! doorways. Only open cells are states; moving into a wall or off the grid
//! leaves the agent in place.

use serde::{Deserialize, Serialize};

use crate::divergence::DivergencePair;
use crate::error::{AlgaeError, Result};
use crate::mdp::TabularMdp;
use crate::policy::SoftmaxPolicy;
use crate::tables::ValueTable;

pub const GRID_SIZE: usize = 11;
const WALL: usize = 5;
const DOORWAYS: [(usize, usize); 4] = [(5, 2), (5, 8), (2, 5), (8, 5)];

pub type Cell = (usize, usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Up,
    Down,
    Left,
    Right,
}

impl Action {
    pub const ALL: [Action; 4] = [Action::Up, Action::Down, Action::Left, Action::Right];

    fn delta(self) -> (isize, isize) {
        match self {
            Action::Up => (-1, 0),
            Action::Down => (1, 0),
            Action::Left => (0, -1),
            Action::Right => (0, 1),
        }
    }
}

/// Where the episode starts when building the MDP.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialCells {
    Start,
    UniformOpen,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourRoomsSpec {
    pub start: Cell,
    pub goal: Cell,
    /// Probability that the intended action is replaced by a uniformly random one.
    pub slip: f64,
    /// From the goal every action leads back to the start.
    pub goal_reset: bool,
}

impl Default for FourRoomsSpec {
    fn default() -> Self {
        Self {
            start: (10, 10),
            goal: (8, 9),
            slip: 0.0,
            goal_reset: true,
        }
    }
}

pub fn is_wall(cell: Cell) -> bool {
    (cell.0 == WALL || cell.1 == WALL) && !DOORWAYS.contains(&cell)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FourRooms {
    spec: FourRoomsSpec,
    cells: Vec<Cell>,
    index: Vec<Option<usize>>,
}

impl FourRooms {
    pub fn new(spec: FourRoomsSpec) -> Result<Self> {
        if !(0.0..=1.0).contains(&spec.slip) {
            return Err(AlgaeError::InvalidInput(format!("slip {} outside [0, 1]", spec.slip)));
        }
        let mut cells = Vec::new();
        let mut index = vec![None; GRID_SIZE * GRID_SIZE];
        for r in 0..GRID_SIZE {
            for c in 0..GRID_SIZE {
                if !is_wall((r, c)) {
                    index[r * GRID_SIZE + c] = Some(cells.len());
                    cells.push((r, c));
                }
            }
        }
        let rooms = Self { spec, cells, index };
        for (what, cell) in [("start", spec.start), ("goal", spec.goal)] {
            if rooms.state_of(cell).is_none() {
                return Err(AlgaeError::InvalidInput(format!(
                    "{what} cell {cell:?} is not an open cell"
                )));
            }
        }
        if spec.start == spec.goal {
            return Err(AlgaeError::InvalidInput("start and goal must differ".into()));
        }
        Ok(rooms)
    }

    pub fn spec(&self) -> &FourRoomsSpec {
        &self.spec
    }

    pub fn num_states(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn state_of(&self, cell: Cell) -> Option<usize> {
        if cell.0 >= GRID_SIZE || cell.1 >= GRID_SIZE {
            return None;
        }
        self.index[cell.0 * GRID_SIZE + cell.1]
    }

    pub fn cell_of(&self, s: usize) -> Cell {
        self.cells[s]
    }

    pub fn start_state(&self) -> usize {
        self.state_of(self.spec.start).expect("validated")
    }

    pub fn goal_state(&self) -> usize {
        self.state_of(self.spec.goal).expect("validated")
    }

    /// Deterministic successor of `s` under `action`, ignoring slip and reset.
    pub fn step_cell(&self, s: usize, action: Action) -> usize {
        let (r, c) = self.cells[s];
        let (dr, dc) = action.delta();
        let (nr, nc) = (r as isize + dr, c as isize + dc);
        if nr < 0 || nc < 0 {
            return s;
        }
        self.state_of((nr as usize, nc as usize)).unwrap_or(s)
    }

    pub fn manhattan(&self, s: usize, t: usize) -> usize {
        let (a, b) = (self.cells[s], self.cells[t]);
        a.0.abs_diff(b.0) + a.1.abs_diff(b.1)
    }

    /// Shortest path lengths to `target` through open cells.
    pub fn path_lengths_to(&self, target: usize) -> Vec<Option<usize>> {
        let n = self.num_states();
        let mut dist = vec![None; n];
        dist[target] = Some(0);
        let mut queue = std::collections::VecDeque::from([target]);
        while let Some(t) = queue.pop_front() {
            let dt = dist[t].expect("queued states have a distance");
            for s in 0..n {
                if dist[s].is_none() && Action::ALL.iter().any(|&a| self.step_cell(s, a) == t) {
                    dist[s] = Some(dt + 1);
                    queue.push_back(s);
                }
            }
        }
        dist
    }

    /// Builds the MDP. `r(s,a)` is the probability that the next state is
    /// the goal (0 from the goal itself).
    pub fn mdp(&self, discount: f64, initial: InitialCells) -> Result<TabularMdp> {
        let ns = self.num_states();
        let na = Action::ALL.len();
        let (start, goal) = (self.start_state(), self.goal_state());
        let slip = self.spec.slip;
        let mut transition = vec![0.0; ns * na * ns];
        let mut reward = vec![0.0; ns * na];
        for s in 0..ns {
            for (a, &action) in Action::ALL.iter().enumerate() {
                let row = &mut transition[(s * na + a) * ns..(s * na + a + 1) * ns];
                if s == goal && self.spec.goal_reset {
                    row[start] = 1.0;
                    continue;
                }
                row[self.step_cell(s, action)] += 1.0 - slip;
                if slip > 0.0 {
                    for &other in &Action::ALL {
                        row[self.step_cell(s, other)] += slip / na as f64;
                    }
                }
                if s != goal {
                    reward[s * na + a] = row[goal];
                }
            }
        }
        let initial_dist = match initial {
            InitialCells::Start => {
                let mut mu = vec![0.0; ns];
                mu[start] = 1.0;
                mu
            }
            InitialCells::UniformOpen => vec![1.0 / ns as f64; ns],
        };
        TabularMdp::new(ns, na, reward, transition, initial_dist, discount)
    }

    /// Stochastic policy mixing uniform with a uniform choice among the
    /// actions that move toward the goal: `(1-b)/4 + b/k` on the `k` goalward
    /// actions, `(1-b)/4` elsewhere.
    pub fn gridwalk_behavior(&self, bias: f64) -> Result<SoftmaxPolicy> {
        if !(0.0..1.0).contains(&bias) {
            return Err(AlgaeError::InvalidInput(format!("bias {bias} outside [0, 1)")));
        }
        let na = Action::ALL.len();
        let goal = self.spec.goal;
        let mut probs = Vec::with_capacity(self.num_states() * na);
        for &(r, c) in &self.cells {
            let toward: Vec<bool> = Action::ALL
                .iter()
                .map(|a| match a {
                    Action::Up => goal.0 < r,
                    Action::Down => goal.0 > r,
                    Action::Left => goal.1 < c,
                    Action::Right => goal.1 > c,
                })
                .collect();
            let k = toward.iter().filter(|&&t| t).count();
            for &t in &toward {
                let extra = if k == 0 {
                    bias / na as f64
                } else if t {
                    bias / k as f64
                } else {
                    0.0
                };
                probs.push((1.0 - bias) / na as f64 + extra);
            }
        }
        SoftmaxPolicy::from_probabilities(self.num_states(), na, &probs)
    }

    /// Scatters per-state values onto the 11×11 grid (walls are 0).
    pub fn to_grid(&self, values: &[f64]) -> Vec<Vec<f64>> {
        let mut grid = vec![vec![0.0; GRID_SIZE]; GRID_SIZE];
        for (s, &(r, c)) in self.cells.iter().enumerate() {
            grid[r][c] = values[s];
        }
        grid
    }
}

/// `four_rooms(slip, goal_reset)` with the default start and goal, `γ = 0.99`
/// and the episode starting at the start cell.
pub fn four_rooms(slip: f64, goal_reset: bool) -> Result<TabularMdp> {
    FourRooms::new(FourRoomsSpec {
        slip,
        goal_reset,
        ..FourRoomsSpec::default()
    })?
    .mdp(0.99, InitialCells::Start)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualMap {
    pub step: usize,
    pub grid: Vec<Vec<f64>>,
}

/// Per-state `m(s) = Σ_a f*'((B_π ν - ν)(s,a) / α)`.
pub fn residual_values(
    mdp: &TabularMdp,
    pi: &SoftmaxPolicy,
    nu: &ValueTable,
    alpha: f64,
    div: &DivergencePair,
) -> Result<Vec<f64>> {
    if alpha == 0.0 || !alpha.is_finite() {
        return Err(AlgaeError::Config(format!("residual maps need a finite nonzero alpha, got {alpha}")));
    }
    let bnu = mdp.bellman(pi, nu)?;
    let na = mdp.num_actions();
    let mut m = vec![0.0; mdp.num_states()];
    for (i, (b, v)) in bnu.as_slice().iter().zip(nu.as_slice()).enumerate() {
        m[i / na] += div.f_star_prime((b - v) / alpha);
    }
    Ok(m)
}

pub fn residual_map(
    rooms: &FourRooms,
    mdp: &TabularMdp,
    pi: &SoftmaxPolicy,
    nu: &ValueTable,
    alpha: f64,
    div: &DivergencePair,
    step: usize,
) -> Result<ResidualMap> {
    if mdp.num_states() != rooms.num_states() {
        return Err(AlgaeError::InvalidInput("MDP is not a Four Rooms MDP".into()));
    }
    let values = residual_values(mdp, pi, nu, alpha, div)?;
    Ok(ResidualMap {
        step,
        grid: rooms.to_grid(&values),
    })
}
