//! Deterministic two-agent grid games with sequential turns and egocentric
//! 5x5 observations.

pub mod config;
pub mod episode;
pub mod layout;
pub mod log;
pub mod observe;
pub mod tile;
pub mod world;

pub use config::{GameConfig, GameId, RewardEvent, RewardTable};
pub use episode::{play_episode, EpisodeDriver, EpisodeOutcome};
pub use layout::Layout;
pub use log::TransitionRecord;
pub use observe::{
    argmax_grid, is_one_hot, observe, Observation, BUTTON_INDEX, CELLS, CENTER, CHANNELS, OBS_DIM, VIEW,
};
pub use tile::{Action, AgentId, Facing, Pos, TileKind};
pub use world::{AgentState, Event, EventSet, Game, StepOutcome, Termination, WorldState};
