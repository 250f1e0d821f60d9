use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SketchError};
use crate::game::team::best_index;
use crate::game::{GameCell, GameParams, PlayerState, TeamState};
use crate::hashkit::{derive_seed, rng_from_seed, PairwiseHash, SeedTag, Signature, SignatureMatrix};
use crate::ledger::MemoryLedger;
use crate::sampling::{PoolSlot, ReservoirState};
use crate::signature::{adopt_id, effective_counter, extend_signature, identity_matches, target_length};
use crate::Element;

/// What a pass-3 scan needs to resolve a signature-only winner.
#[derive(Debug, Clone)]
pub struct SignatureProbe {
    pub gate: PairwiseHash,
    pub slot: PoolSlot,
    pub signature: Signature,
    pub matrix: Arc<SignatureMatrix>,
}

impl SignatureProbe {
    pub fn matches(&self, x: Element) -> bool {
        crate::sampling::pool_membership(&self.gate, &self.slot, x)
            && self.matrix.prefix_unchecked(x, self.signature.len) == self.signature
    }

    /// A key that identifies the probe for deduplication.
    pub fn key(&self) -> (u64, u64, u64, u8) {
        (
            self.gate.seed(),
            self.slot.z,
            self.signature.bits,
            self.signature.len,
        )
    }
}

/// Identity carried by a candidate.
#[derive(Debug, Clone)]
pub enum CandidateKey {
    Id(Element),
    Unresolved(Box<SignatureProbe>),
}

impl CandidateKey {
    pub fn id(&self) -> Option<Element> {
        match self {
            CandidateKey::Id(x) => Some(*x),
            CandidateKey::Unresolved(_) => None,
        }
    }
}

/// A game's winner.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub key: CandidateKey,
    pub counter: u64,
    pub cell: GameCell,
}

/// A signature comparison that passed, recorded when tracing is on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchEvent {
    pub team_row: u64,
    pub slot: u64,
    pub round: u32,
    /// Element whose bits defined the player's signature before the match.
    pub shadow: Element,
    pub element: Element,
}

/// A surviving signature-tracked player right after a round, when tracing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundEvent {
    pub team_row: u64,
    pub slot: u64,
    pub round: u32,
    pub shadow: Element,
    pub resolved: bool,
}

/// Diagnostic trace of one game.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameTrace {
    pub matches: Vec<MatchEvent>,
    pub rounds: Vec<RoundEvent>,
}

/// Result of a finished game.
#[derive(Debug, Clone)]
pub struct GameOutcome {
    pub candidate: Option<Candidate>,
    pub ledger: MemoryLedger,
    pub rows: u64,
    pub trace: Option<GameTrace>,
}

struct OpenTeam {
    row: u64,
    row_seed: u64,
    g: PairwiseHash,
    players: BTreeMap<u64, PlayerState>,
}

/// One `(alpha, beta)`-game consuming a stream token by token.
pub struct Game {
    params: GameParams,
    seed: u64,
    sig: Option<Arc<SignatureMatrix>>,
    teams: Vec<TeamState>,
    open: OpenTeam,
    pos_in_row: u64,
    ledger: MemoryLedger,
    trace: Option<GameTrace>,
}

impl Game {
    pub fn new(params: GameParams, seed: u64) -> Result<Self> {
        let sig = if params.signatures {
            Some(Arc::new(SignatureMatrix::new(
                derive_seed(seed, SeedTag::Signature, 0),
                params.domain,
                params.signature_width,
            )?))
        } else {
            None
        };
        let open = Self::open_team(&params, seed, 0)?;
        let trace = params.trace.then(GameTrace::default);
        Ok(Self {
            params,
            seed,
            sig,
            teams: Vec::new(),
            open,
            pos_in_row: 0,
            ledger: MemoryLedger::default(),
            trace,
        })
    }

    fn open_team(params: &GameParams, seed: u64, row: u64) -> Result<OpenTeam> {
        let row_seed = derive_seed(seed, SeedTag::Row, row);
        Ok(OpenTeam {
            row,
            row_seed,
            g: PairwiseHash::new(row_seed, params.domain, params.hash_range)?,
            players: BTreeMap::new(),
        })
    }

    pub fn params(&self) -> &GameParams {
        &self.params
    }

    pub fn teams(&self) -> &[TeamState] {
        &self.teams
    }

    pub fn ledger(&self) -> &MemoryLedger {
        &self.ledger
    }

    /// Complete rows read so far.
    pub fn rows_done(&self) -> u64 {
        self.open.row
    }

    #[inline]
    fn slot_of(&self, v: u64) -> Option<u64> {
        let z = v / self.params.slot_width + 1;
        (z <= self.params.w).then_some(z)
    }

    /// Feeds one token.
    pub fn push(&mut self, x: Element) {
        let sig = self.sig.as_deref();
        for team in &mut self.teams {
            let v = team.g.eval(x);
            let z = v / self.params.slot_width + 1;
            if z > self.params.w {
                continue;
            }
            let round = team.round;
            let team_row = team.row;
            let Some(p) = team.find_mut(z) else { continue };
            if !p.active || !identity_matches(p, x, sig) {
                continue;
            }
            match p.resolved_id {
                Some(_) => p.pending_new += 1,
                None => {
                    if let Some(tr) = self.trace.as_mut() {
                        tr.matches.push(MatchEvent {
                            team_row,
                            slot: z,
                            round,
                            shadow: p.shadow,
                            element: x,
                        });
                    }
                    match p.phase {
                        1 => {
                            p.pending_old += 1;
                            if let Some(m) = sig {
                                let _ = extend_signature(p, x, m);
                            }
                        }
                        2 => {
                            let _ = adopt_id(p, x);
                            p.pending_old += 1;
                        }
                        _ => {
                            let _ = adopt_id(p, x);
                            p.pending_new += 1;
                        }
                    }
                }
            }
        }
        self.sample(x);
        self.pos_in_row += 1;
        if self.pos_in_row == self.params.t_alpha {
            self.end_row();
        }
    }

    fn sample(&mut self, x: Element) {
        let Some(z) = self.slot_of(self.open.g.eval(x)) else {
            return;
        };
        let params = &self.params;
        let sig = self.sig.as_deref();
        let row_seed = self.open.row_seed;
        let row = self.open.row;
        let p = self.open.players.entry(z).or_insert_with(|| {
            let mut p = PlayerState::bare(row, z);
            p.reservoir = ReservoirState::new(params.reservoir_cap);
            p.rng = Some(rng_from_seed(derive_seed(row_seed, SeedTag::Player, z)));
            let beta = params.cell.beta;
            if sig.is_some() && !params.immediate_adoption && params.phases.phase_of(beta) == 1 {
                p.tracks_phases = true;
                p.phase = 1;
                p.target_len = target_length(params.signature_width, params.varrho, beta);
            } else {
                p.phase = 3;
            }
            p
        });
        if !p.active {
            return;
        }
        let same = p.has_sample() && identity_matches(p, x, sig);
        let mut rng = p.rng.take().expect("open players own a coin source");
        let replaced = p.reservoir.step(x, &mut rng).unwrap_or(false);
        p.rng = Some(rng);
        if replaced && !same {
            p.shadow = x;
            match sig.filter(|_| p.tracks_phases) {
                Some(m) => p.signature = m.prefix_unchecked(x, p.target_len),
                None => p.resolved_id = Some(x),
            }
            p.old_counter = 0;
            p.new_counter = 0;
        }
        if replaced || same {
            if p.tracks_phases {
                p.old_counter += 1;
            } else {
                p.new_counter += 1;
            }
        }
        if !p.reservoir.is_active() {
            p.active = false;
        }
    }

    fn end_row(&mut self) {
        let row = self.open.row;
        let params = &self.params;
        for team in &mut self.teams {
            let cap = params.clamp.then(|| params.clamp_cap(team.round));
            for p in &mut team.players {
                p.settle_row(cap);
            }
            let age = row - team.row;
            let next = team.round + 1;
            if next <= params.max_round && age == params.round_age(next) {
                team.run_round(next, params);
                Self::trace_round(&mut self.trace, team);
            }
        }
        self.teams.retain(|t| !t.players.is_empty());

        let next_open =
            Self::open_team(params, self.seed, row + 1).expect("row hash parameters were validated");
        let open = std::mem::replace(&mut self.open, next_open);
        let players: Vec<PlayerState> = open
            .players
            .into_values()
            .map(|mut p| {
                p.rng = None;
                p
            })
            .collect();
        let mut team = TeamState::new(open.row, open.g, players);
        team.run_round(params.cell.beta, params);
        Self::trace_round(&mut self.trace, &team);
        if !team.players.is_empty() {
            self.teams.push(team);
        }
        self.pos_in_row = 0;
        let snap = self.snapshot();
        self.ledger.observe(&snap);
    }

    fn trace_round(trace: &mut Option<GameTrace>, team: &TeamState) {
        if let Some(tr) = trace.as_mut() {
            for p in team.players.iter().filter(|p| p.tracks_phases) {
                tr.rounds.push(RoundEvent {
                    team_row: team.row,
                    slot: p.slot,
                    round: team.round,
                    shadow: p.shadow,
                    resolved: p.resolved_id.is_some(),
                });
            }
        }
    }

    /// Bits held by the live state right now.
    pub fn snapshot(&self) -> MemoryLedger {
        let p = &self.params;
        let mut l = MemoryLedger::default();
        let live_teams = self.teams.len() as u64 + 1;
        l.hash_seeds = live_teams * PairwiseHash::seed_bits()
            + self.sig.as_ref().map_or(0, |m| m.width() as u64 * 4 * 61);
        l.row_ids = live_teams * p.row_id_bits();
        let mut bytes = 0usize;
        for team in &self.teams {
            l.winner_encodings += team.encoding.bit_len();
            let cb = p.counter_bits(team.round);
            for pl in &team.players {
                Self::charge_identity(p, pl, &mut l);
                let dual = pl.tracks_phases && pl.resolved_id.is_some() && pl.phase == 2;
                l.counters += cb * if dual { 2 } else { 1 };
            }
            bytes += std::mem::size_of::<TeamState>()
                + team.players.len() * std::mem::size_of::<PlayerState>()
                + team.encoding.bit_len().div_ceil(8) as usize;
        }
        for pl in self.open.players.values() {
            Self::charge_identity(p, pl, &mut l);
            l.counters += p.counter_bits(p.cell.beta);
            l.reservoir_counters += p.reservoir_counter_bits();
            bytes += std::mem::size_of::<PlayerState>();
        }
        l.machine_resident_bytes = bytes as u64;
        l
    }

    fn charge_identity(p: &GameParams, pl: &PlayerState, l: &mut MemoryLedger) {
        if pl.resolved_id.is_some() {
            l.sample_ids += p.sample_id_bits();
        } else {
            l.signatures += pl.signature.len as u64;
        }
    }

    /// Feeds one complete row.
    pub fn advance_row(&mut self, row: &[Element]) -> Result<()> {
        if self.pos_in_row != 0 || row.len() as u64 != self.params.t_alpha {
            return Err(SketchError::Contract(format!(
                "row of width {} fed to a game with t_alpha = {}",
                row.len(),
                self.params.t_alpha
            )));
        }
        for &x in row {
            self.push(x);
        }
        Ok(())
    }

    /// Ends the stream. An incomplete trailing row is ignored.
    pub fn finish(mut self) -> GameOutcome {
        if self.pos_in_row != 0 {
            for team in &mut self.teams {
                for p in &mut team.players {
                    p.clear_pending();
                }
            }
        }
        let mut best: Option<(&TeamState, &PlayerState, u64)> = None;
        for team in &self.teams {
            if let Some((i, c)) = best_index(team.players.iter()) {
                if best.is_none_or(|(_, _, bc)| c > bc) {
                    best = Some((team, &team.players[i], c));
                }
            }
        }
        let candidate = best.map(|(team, p, c)| Candidate {
            key: self.key_of(team, p),
            counter: c,
            cell: self.params.cell,
        });
        GameOutcome {
            candidate,
            ledger: self.ledger,
            rows: self.open.row,
            trace: self.trace,
        }
    }

    fn key_of(&self, team: &TeamState, p: &PlayerState) -> CandidateKey {
        match (p.resolved_id, &self.sig) {
            (Some(x), _) => CandidateKey::Id(x),
            (None, Some(m)) => CandidateKey::Unresolved(Box::new(SignatureProbe {
                gate: team.g.clone(),
                slot: PoolSlot {
                    row: team.row,
                    z: p.slot,
                    width: self.params.slot_width,
                },
                signature: p.signature,
                matrix: Arc::clone(m),
            })),
            (None, None) => unreachable!("players without signatures resolve at sampling"),
        }
    }

    /// The counter a player would report now.
    pub fn effective(p: &PlayerState) -> u64 {
        effective_counter(p)
    }
}

/// Splits a stream into complete rows of width `t_alpha`.
pub fn segment_rows(stream: &[Element], t_alpha: u64) -> std::slice::ChunksExact<'_, Element> {
    stream.chunks_exact(t_alpha.max(1) as usize)
}

/// Plays one game over a stream.
pub fn play_game(stream: &[Element], params: &GameParams, seed: u64) -> Result<GameOutcome> {
    let mut game = Game::new(params.clone(), seed)?;
    for &x in stream {
        game.push(x);
    }
    Ok(game.finish())
}
