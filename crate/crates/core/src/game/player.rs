use rand_chacha::ChaCha8Rng;

use crate::hashkit::Signature;
use crate::sampling::ReservoirState;
use crate::Element;

/// One sampled player of a team.
#[derive(Debug, Clone)]
pub struct PlayerState {
    pub row: u64,
    pub slot: u64,
    pub active: bool,
    pub phase: u8,
    pub signature: Signature,
    /// Length the signature grows to at its next match.
    pub target_len: u8,
    pub resolved_id: Option<Element>,
    pub old_counter: u64,
    pub new_counter: u64,
    pub reservoir: ReservoirState,
    pub pending_old: u64,
    pub pending_new: u64,
    /// The element whose bits define the current identity. Diagnostics only;
    /// matching never reads it.
    pub shadow: Element,
    /// Identity started as a signature, so phases apply.
    pub tracks_phases: bool,
    pub(crate) rng: Option<ChaCha8Rng>,
}

impl PlayerState {
    /// An empty active player in phase 1.
    pub fn bare(row: u64, slot: u64) -> Self {
        Self {
            row,
            slot,
            active: true,
            phase: 1,
            signature: Signature::EMPTY,
            target_len: 0,
            resolved_id: None,
            old_counter: 0,
            new_counter: 0,
            reservoir: ReservoirState::new(u64::MAX),
            pending_old: 0,
            pending_new: 0,
            shadow: 0,
            tracks_phases: false,
            rng: None,
        }
    }

    pub fn has_sample(&self) -> bool {
        self.reservoir.sample().is_some()
    }

    /// Moves the pending row increment into the counters, or drops it when it
    /// exceeds `cap`.
    pub fn settle_row(&mut self, cap: Option<u64>) {
        let inc = self.pending_old + self.pending_new;
        if cap.is_none_or(|c| inc <= c) {
            self.old_counter += self.pending_old;
            self.new_counter += self.pending_new;
        }
        self.pending_old = 0;
        self.pending_new = 0;
    }

    pub fn clear_pending(&mut self) {
        self.pending_old = 0;
        self.pending_new = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamp_drops_whole_row() {
        let mut p = PlayerState::bare(0, 1);
        p.new_counter = 3;
        p.pending_new = 17;
        p.settle_row(Some(16));
        assert_eq!(p.new_counter, 3);
        p.pending_new = 16;
        p.settle_row(Some(16));
        assert_eq!(p.new_counter, 19);
        p.pending_old = 40;
        p.settle_row(None);
        assert_eq!(p.old_counter, 40);
    }
}
