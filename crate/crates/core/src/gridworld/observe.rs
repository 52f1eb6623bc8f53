//! Egocentric 5x5 observations and their flat encoding.
//!
//! The window is compass-fixed: row 0 is north of the observer, column 0 west.
//! The encoding is cell-major one-hot (`cell * CHANNELS + channel`) followed
//! by the button-status scalar.

use serde::{Deserialize, Serialize};

use crate::gridworld::tile::{AgentId, Pos, TileKind};
use crate::gridworld::world::WorldState;
use crate::numerics::Tensor;
use crate::scalar::Scalar;

pub const VIEW: usize = 5;
pub const CELLS: usize = VIEW * VIEW;
pub const CHANNELS: usize = TileKind::COUNT;
/// Index of the button-status scalar in the encoding.
pub const BUTTON_INDEX: usize = CELLS * CHANNELS;
/// Length of an encoded observation.
pub const OBS_DIM: usize = BUTTON_INDEX + 1;
pub const CENTER: usize = CELLS / 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Observation {
    pub tiles: [TileKind; CELLS],
    /// Button status `b`.
    pub button: bool,
    pub observer: AgentId,
}

impl Observation {
    pub fn encode<S: Scalar>(&self) -> Vec<S> {
        let mut out = vec![S::zero(); OBS_DIM];
        self.encode_into(&mut out);
        out
    }

    /// Writes the encoding into a zeroed slice of length [`OBS_DIM`].
    pub fn encode_into<S: Scalar>(&self, out: &mut [S]) {
        assert_eq!(out.len(), OBS_DIM);
        for (cell, t) in self.tiles.iter().enumerate() {
            out[cell * CHANNELS + t.channel()] = S::one();
        }
        out[BUTTON_INDEX] = if self.button { S::one() } else { S::zero() };
    }

    /// The tile part as a `[5, 5, C]` tensor.
    pub fn grid_tensor<S: Scalar>(&self) -> Tensor<S> {
        let mut v = self.encode::<S>();
        v.truncate(BUTTON_INDEX);
        Tensor::new(vec![VIEW, VIEW, CHANNELS], v)
    }

    pub fn count(&self, kind: TileKind) -> usize {
        self.tiles.iter().filter(|&&t| t == kind).count()
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for r in 0..VIEW {
            for c in 0..VIEW {
                s.push(self.tiles[r * VIEW + c].glyph());
            }
            s.push('\n');
        }
        s.push_str(&format!("b={}\n", u8::from(self.button)));
        s
    }
}

/// 5x5 window centred on `actor`. Panics if `actor` is dead.
pub fn observe(world: &WorldState, actor: AgentId) -> Observation {
    assert!(world.is_alive(actor), "dead agent {actor:?} has no observation");
    let me = world.agent(actor).pos;
    let half = (VIEW / 2) as i32;
    let mut tiles = [TileKind::Wall; CELLS];
    for r in 0..VIEW {
        for c in 0..VIEW {
            let p = Pos::new(me.x + c as i32 - half, me.y + r as i32 - half);
            tiles[r * VIEW + c] = world.visible_tile(p);
        }
    }
    Observation {
        tiles,
        button: world.button_status(),
        observer: actor,
    }
}

/// Per-cell channel argmax of an encoded (possibly continuous) state, plus the
/// button scalar. Ties go to the lowest channel.
pub fn argmax_grid<S: Scalar>(encoded: &[S]) -> ([TileKind; CELLS], S) {
    assert_eq!(encoded.len(), OBS_DIM, "encoded state has the wrong width");
    let mut tiles = [TileKind::Floor; CELLS];
    for (cell, slot) in tiles.iter_mut().enumerate() {
        let ch = &encoded[cell * CHANNELS..(cell + 1) * CHANNELS];
        let mut best = 0;
        for (i, &v) in ch.iter().enumerate() {
            if v > ch[best] {
                best = i;
            }
        }
        *slot = TileKind::from_channel(best).unwrap();
    }
    (tiles, encoded[BUTTON_INDEX])
}

/// Whether every cell of an encoding is exactly one-hot.
pub fn is_one_hot<S: Scalar>(encoded: &[S]) -> bool {
    encoded.len() == OBS_DIM
        && (0..CELLS).all(|cell| {
            let ch = &encoded[cell * CHANNELS..(cell + 1) * CHANNELS];
            ch.iter().filter(|&&v| v == S::one()).count() == 1 && ch.iter().all(|&v| v == S::one() || v == S::zero())
        })
}
