use serde::{Deserialize, Serialize};

use crate::gridworld::{argmax_grid, TileKind, CELLS, VIEW};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellChange {
    /// Row-major cell index in the 5x5 window.
    pub cell: usize,
    pub row: usize,
    pub col: usize,
    pub from: TileKind,
    pub to: TileKind,
}

/// Cells whose channel argmax differs between two states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub changes: Vec<CellChange>,
    /// Changed cells over 25. A proxy for the degree of analogy, not that quantity itself.
    pub fraction: f64,
}

impl DivergenceReport {
    pub fn is_empty(&self) -> bool {
        self.changes.is_empty()
    }

    /// Whether at least one cell changed and every change is at a cell
    /// whose source tile is in `kinds`.
    pub fn confined_to(&self, kinds: &[TileKind]) -> bool {
        !self.changes.is_empty() && self.changes.iter().all(|c| kinds.contains(&c.from))
    }
}

pub fn state_divergence<S: Scalar>(s_i: &[S], s_e: &[S]) -> DivergenceReport {
    assert_eq!(s_i.len(), s_e.len(), "divergence of states with different shapes");
    let (a, _) = argmax_grid(s_i);
    let (b, _) = argmax_grid(s_e);
    let changes: Vec<CellChange> = (0..CELLS)
        .filter(|&c| a[c] != b[c])
        .map(|cell| CellChange {
            cell,
            row: cell / VIEW,
            col: cell % VIEW,
            from: a[cell],
            to: b[cell],
        })
        .collect();
    let fraction = changes.len() as f64 / CELLS as f64;
    DivergenceReport { changes, fraction }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridState {
    pub grid: Vec<TileKind>,
    pub button: f64,
}

impl GridState {
    pub fn of<S: Scalar>(encoded: &[S]) -> Self {
        let (grid, button) = argmax_grid(encoded);
        Self {
            grid: grid.to_vec(),
            button: button.as_f64(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpatheticStateRecord {
    pub raw: Vec<f64>,
    pub grid: Vec<TileKind>,
    pub button: f64,
}

/// One line of an empathetic-state dump.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpatheticDump {
    pub episode: u64,
    pub t: u32,
    pub s_i: GridState,
    pub s_e: EmpatheticStateRecord,
    pub divergence: DivergenceReport,
}

impl EmpatheticDump {
    pub fn new<S: Scalar>(episode: u64, t: u32, s_i: &[S], s_e: &[S]) -> Self {
        let g = GridState::of(s_e);
        Self {
            episode,
            t,
            s_i: GridState::of(s_i),
            s_e: EmpatheticStateRecord {
                raw: s_e.iter().map(|v| v.as_f64()).collect(),
                grid: g.grid,
                button: g.button,
            },
            divergence: state_divergence(s_i, s_e),
        }
    }
}
