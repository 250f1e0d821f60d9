//! The `(alpha, beta)`-game and the grid of games over `(eta, alpha, beta)`.

mod engine;
mod params;
mod player;
mod sequence;
mod team;

pub use engine::{
    play_game, segment_rows, Candidate, CandidateKey, Game, GameOutcome, GameTrace, MatchEvent, RoundEvent,
    SignatureProbe,
};
pub use params::{default_range, grid_cells, row_width, team_width, GameCell, GameConfig, GameParams};
pub use player::PlayerState;
pub use sequence::{
    play_sequence, sequence_params, sort_candidates, GameSequence, SequenceOutcome, SequenceScale,
};
pub use team::{TeamState, WinnerEncoding};
