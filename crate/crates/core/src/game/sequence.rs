use rayon::prelude::*;

use crate::error::Result;
use crate::game::{grid_cells, Candidate, Game, GameCell, GameConfig, GameParams};
use crate::hashkit::{derive_seed, SeedTag};
use crate::ledger::MemoryLedger;
use crate::Element;

/// Universe sizes and stream hints shared by the games of a sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SequenceScale {
    /// Universe size plugged into the parameter formulas.
    pub n: u64,
    /// Largest element id the hashes must accept.
    pub domain: u64,
    pub k: u32,
    pub m_hint: u64,
}

/// Output of a sequence of games.
#[derive(Debug, Clone, Default)]
pub struct SequenceOutcome {
    /// Per-game winners, highest counter first.
    pub candidates: Vec<Candidate>,
    pub ledger: MemoryLedger,
    pub games_played: usize,
    pub games_skipped: usize,
}

/// Orders candidates by counter, highest first; the sort is stable so ties
/// keep grid order.
pub fn sort_candidates(c: &mut [Candidate]) {
    c.sort_by_key(|a| std::cmp::Reverse(a.counter));
}

/// The live (non-inert) games of the grid, with their grid indices.
pub fn sequence_params(scale: &SequenceScale, cfg: &GameConfig) -> Result<(Vec<(usize, GameParams)>, usize)> {
    let cells: Vec<GameCell> = grid_cells(cfg.range_for(scale.n));
    let mut live = Vec::new();
    let mut skipped = 0;
    for (i, cell) in cells.into_iter().enumerate() {
        let p = GameParams::new(scale.n, scale.domain, scale.k, scale.m_hint, cell, cfg)?;
        if p.is_inert() {
            skipped += 1;
        } else {
            live.push((i, p));
        }
    }
    Ok((live, skipped))
}

/// All games of the grid fed from one stream, token by token.
pub struct GameSequence {
    games: Vec<Game>,
    skipped: usize,
}

impl GameSequence {
    pub fn new(scale: &SequenceScale, cfg: &GameConfig, seed: u64) -> Result<Self> {
        let (live, skipped) = sequence_params(scale, cfg)?;
        let games = live
            .into_iter()
            .map(|(i, p)| Game::new(p, derive_seed(seed, SeedTag::Cell, i as u64)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { games, skipped })
    }

    pub fn push(&mut self, x: Element) {
        for g in &mut self.games {
            g.push(x);
        }
    }

    pub fn games(&self) -> &[Game] {
        &self.games
    }

    pub fn finish(self) -> SequenceOutcome {
        let played = self.games.len();
        let mut ledger = MemoryLedger::default();
        let mut candidates = Vec::new();
        for g in self.games {
            let out = g.finish();
            ledger.merge(&out.ledger);
            candidates.extend(out.candidate);
        }
        sort_candidates(&mut candidates);
        SequenceOutcome {
            candidates,
            ledger,
            games_played: played,
            games_skipped: self.skipped,
        }
    }
}

/// Plays every grid cell over `stream`; games run in parallel.
pub fn play_sequence(
    stream: &[Element],
    scale: &SequenceScale,
    cfg: &GameConfig,
    seed: u64,
) -> Result<SequenceOutcome> {
    let (live, skipped) = sequence_params(scale, cfg)?;
    let played = live.len();
    let outcomes = live
        .into_par_iter()
        .map(|(i, p)| crate::game::play_game(stream, &p, derive_seed(seed, SeedTag::Cell, i as u64)))
        .collect::<Result<Vec<_>>>()?;
    let mut ledger = MemoryLedger::default();
    let mut candidates = Vec::new();
    for out in outcomes {
        ledger.merge(&out.ledger);
        candidates.extend(out.candidate);
    }
    sort_candidates(&mut candidates);
    Ok(SequenceOutcome {
        candidates,
        ledger,
        games_played: played,
        games_skipped: skipped,
    })
}
