use serde::{Deserialize, Serialize};

use crate::emote::imagination::ImaginationNetwork;
use crate::gridworld::{TileKind, CELLS, CHANNELS, OBS_DIM};
use crate::scalar::Scalar;

/// Rule-based oracle transforms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Benchmark {
    /// Swap the two agents' pellet channels.
    Visible,
    /// Pellet swap, and buttons drawn as floor; the status scalar is kept.
    Invisible,
}

fn check<S: Scalar>(s: &[S]) {
    assert_eq!(s.len(), OBS_DIM, "observation encoding has the wrong width");
}

pub fn bvis_transform<S: Scalar>(s_i: &[S]) -> Vec<S> {
    check(s_i);
    let mut out = s_i.to_vec();
    let (la, ia) = (TileKind::LaPellet.channel(), TileKind::IaPellet.channel());
    for cell in 0..CELLS {
        out.swap(cell * CHANNELS + la, cell * CHANNELS + ia);
    }
    out
}

pub fn binvis_transform<S: Scalar>(s_i: &[S]) -> Vec<S> {
    let mut out = bvis_transform(s_i);
    let (button, floor) = (TileKind::Button.channel(), TileKind::Floor.channel());
    for cell in 0..CELLS {
        let v = std::mem::replace(&mut out[cell * CHANNELS + button], S::zero());
        out[cell * CHANNELS + floor] += v;
    }
    out
}

impl Benchmark {
    pub fn apply<S: Scalar>(self, s_i: &[S]) -> Vec<S> {
        match self {
            Benchmark::Visible => bvis_transform(s_i),
            Benchmark::Invisible => binvis_transform(s_i),
        }
    }
}

/// Source of empathetic states: learned or rule based.
///
/// Every consumer goes through this type, so the learned and benchmark
/// baselines share all code except the transform itself.
#[derive(Clone, Debug, PartialEq)]
pub enum EmpathyModel<S> {
    Learned(ImaginationNetwork<S>),
    Fixed(Benchmark),
}

impl<S: Scalar> EmpathyModel<S> {
    pub fn empathetic_state(&self, s_i: &[S]) -> Vec<S> {
        match self {
            EmpathyModel::Learned(net) => net.imagine(s_i),
            EmpathyModel::Fixed(b) => b.apply(s_i),
        }
    }

    pub fn network(&self) -> Option<&ImaginationNetwork<S>> {
        match self {
            EmpathyModel::Learned(net) => Some(net),
            EmpathyModel::Fixed(_) => None,
        }
    }

    pub fn network_mut(&mut self) -> Option<&mut ImaginationNetwork<S>> {
        match self {
            EmpathyModel::Learned(net) => Some(net),
            EmpathyModel::Fixed(_) => None,
        }
    }
}
