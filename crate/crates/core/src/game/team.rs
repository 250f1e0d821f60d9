use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::game::{GameParams, PlayerState};
use crate::hashkit::PairwiseHash;
use crate::num::ceil_log2;
use crate::signature::{effective_counter, target_length};

/// Packed per-group winner offsets: for each group of `group_size` slots,
/// one presence bit followed by the winner's offset inside the group.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct WinnerEncoding {
    w: u64,
    group_size: u64,
    offset_bits: u32,
    words: Vec<u64>,
    bit_len: u64,
}

struct BitWriter {
    words: Vec<u64>,
    len: u64,
}

impl BitWriter {
    fn push(&mut self, value: u64, bits: u32) {
        for b in 0..bits {
            if self.len.is_multiple_of(64) {
                self.words.push(0);
            }
            if (value >> b) & 1 == 1 {
                *self.words.last_mut().unwrap() |= 1 << (self.len % 64);
            }
            self.len += 1;
        }
    }
}

impl WinnerEncoding {
    /// Encodes a sorted set of 1-based active slots, at most one per group.
    pub fn encode(active_slots: &[u64], w: u64, group_size: u64) -> Result<Self> {
        let group_size = group_size.max(1);
        let groups = w.div_ceil(group_size);
        let offset_bits = ceil_log2(group_size.min(w.max(1)));
        let mut writer = BitWriter {
            words: Vec::new(),
            len: 0,
        };
        let mut it = active_slots.iter().peekable();
        for gi in 0..groups {
            let lo = gi * group_size + 1;
            let hi = lo + group_size;
            match it.peek() {
                Some(&&s) if s < lo => return invalid("active slots must be sorted and within 1..=w"),
                Some(&&s) if s < hi => {
                    it.next();
                    if it.peek().is_some_and(|&&t| t < hi) {
                        return invalid("two active players in one group");
                    }
                    writer.push(1, 1);
                    writer.push(s - lo, offset_bits);
                }
                _ => {
                    writer.push(0, 1);
                    writer.push(0, offset_bits);
                }
            }
        }
        if it.next().is_some() {
            return invalid("active slot beyond team width");
        }
        Ok(Self {
            w,
            group_size,
            offset_bits,
            words: writer.words,
            bit_len: writer.len,
        })
    }

    pub fn decode(&self) -> Vec<u64> {
        let read = |pos: u64, bits: u32| -> u64 {
            let mut v = 0;
            for b in 0..bits as u64 {
                let p = pos + b;
                if (self.words[(p / 64) as usize] >> (p % 64)) & 1 == 1 {
                    v |= 1 << b;
                }
            }
            v
        };
        let stride = 1 + self.offset_bits as u64;
        let groups = self.bit_len.checked_div(stride).unwrap_or(0);
        let mut out = Vec::new();
        for gi in 0..groups {
            let pos = gi * stride;
            if read(pos, 1) == 1 {
                out.push(gi * self.group_size + 1 + read(pos + 1, self.offset_bits));
            }
        }
        out
    }

    pub fn bit_len(&self) -> u64 {
        self.bit_len
    }

    /// `3 w gamma / 3^gamma + 3 gamma`, the size bound for base-3 groups.
    pub fn size_bound(w: u64, gamma: u32) -> f64 {
        3.0 * w as f64 * gamma as f64 / 3f64.powi(gamma as i32) + 3.0 * gamma as f64
    }
}

/// A team after its own row: surviving players sorted by slot.
#[derive(Debug, Clone)]
pub struct TeamState {
    pub row: u64,
    /// Last round played.
    pub round: u32,
    pub players: Vec<PlayerState>,
    pub encoding: WinnerEncoding,
    pub(crate) g: PairwiseHash,
}

/// Index of the best player: highest effective counter, lowest slot on ties.
pub(crate) fn best_index<'a>(players: impl Iterator<Item = &'a PlayerState>) -> Option<(usize, u64)> {
    let mut best: Option<(usize, u64)> = None;
    for (i, p) in players.enumerate() {
        if !p.active || !p.has_sample() {
            continue;
        }
        let c = effective_counter(p);
        if best.is_none_or(|(_, bc)| c > bc) {
            best = Some((i, c));
        }
    }
    best
}

impl TeamState {
    pub fn new(row: u64, g: PairwiseHash, mut players: Vec<PlayerState>) -> Self {
        players.sort_by_key(|p| p.slot);
        Self {
            row,
            round: 0,
            players,
            encoding: WinnerEncoding::default(),
            g,
        }
    }

    pub fn hash(&self) -> &PairwiseHash {
        &self.g
    }

    /// Plays round `gamma`: threshold and initial-counter eliminations, then
    /// one survivor per group of `group_base^gamma` slots.
    pub fn run_round(&mut self, gamma: u32, params: &GameParams) {
        let tr = params.tr(gamma);
        let ic = if gamma == params.cell.beta { params.ic() } else { 0 };
        for p in &mut self.players {
            if p.tracks_phases {
                p.phase = params.phases.phase_of(gamma);
            }
            let c = effective_counter(p);
            if !p.has_sample() || c < tr || c < ic {
                p.active = false;
            }
        }
        let g = params.group_size(gamma);
        let mut survivors: Vec<PlayerState> = Vec::new();
        let players = std::mem::take(&mut self.players);
        let mut i = 0;
        while i < players.len() {
            let group = (players[i].slot - 1) / g;
            let mut j = i;
            while j < players.len() && (players[j].slot - 1) / g == group {
                j += 1;
            }
            if let Some((bi, _)) = best_index(players[i..j].iter()) {
                survivors.push(players[i + bi].clone());
            }
            i = j;
        }
        for p in &mut survivors {
            if p.tracks_phases {
                p.phase = params.phases.phase_of(gamma + 1);
                if p.phase == 1 && p.resolved_id.is_none() {
                    p.target_len = target_length(params.signature_width, params.varrho, gamma);
                }
            }
        }
        self.players = survivors;
        self.round = gamma;
        let slots: Vec<u64> = self.players.iter().map(|p| p.slot).collect();
        self.encoding = WinnerEncoding::encode(&slots, params.w, g)
            .expect("group elimination leaves at most one player per group");
    }

    pub fn active_slots(&self) -> Vec<u64> {
        self.players.iter().filter(|p| p.active).map(|p| p.slot).collect()
    }

    pub(crate) fn find_mut(&mut self, slot: u64) -> Option<&mut PlayerState> {
        match self.players.binary_search_by_key(&slot, |p| p.slot) {
            Ok(i) => Some(&mut self.players[i]),
            Err(_) => None,
        }
    }

    /// The team's winner.
    pub fn best(&self) -> Option<&PlayerState> {
        best_index(self.players.iter()).map(|(i, _)| &self.players[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{GameCell, GameConfig};

    fn params(beta: u32) -> GameParams {
        let cfg = GameConfig {
            signatures: false,
            ..GameConfig::default()
        };
        GameParams::new(1 << 12, 1 << 12, 4, 1 << 12, GameCell::new(0, 0, beta), &cfg).unwrap()
    }

    fn team_with(counters: &[(u64, u64)]) -> TeamState {
        let players = counters
            .iter()
            .map(|&(slot, c)| {
                let mut p = PlayerState::bare(0, slot);
                p.phase = 3;
                p.resolved_id = Some(100 + slot);
                p.new_counter = c;
                let mut rng = crate::hashkit::rng_from_seed(1);
                p.reservoir.step(100 + slot, &mut rng).unwrap();
                p
            })
            .collect();
        TeamState::new(0, PairwiseHash::new(1, 16, 4).unwrap(), players)
    }

    #[test]
    fn tie_goes_to_lowest_slot() {
        let p = params(1);
        assert_eq!(p.tr(1), 1);
        let mut t = team_with(&[(1, 5), (2, 9), (3, 9)]);
        t.run_round(1, &p);
        assert_eq!(t.active_slots(), vec![2]);
    }

    #[test]
    fn threshold_is_inclusive() {
        let p = params(1);
        let p2 = params(2);
        let mut t = team_with(&[(1, 1)]);
        t.run_round(1, &p);
        assert_eq!(t.active_slots(), vec![1]);
        // TR(3) = 4 for alpha = eta = 0
        let mut t = team_with(&[(1, 3), (10, 4)]);
        t.run_round(3, &p2);
        assert_eq!(t.active_slots(), vec![10]);
    }

    #[test]
    fn encoding_round_trip() {
        let slots = vec![2, 4, 9, 28, 29];
        assert!(WinnerEncoding::encode(&slots, 30, 3).is_err());
        let slots = vec![2, 4, 9, 27];
        let e = WinnerEncoding::encode(&slots, 30, 3).unwrap();
        assert_eq!(e.decode(), slots);
        assert_eq!(e.bit_len(), 10 * 3);
        let e = WinnerEncoding::encode(&[], 30, 81).unwrap();
        assert!(e.decode().is_empty());
    }
}
