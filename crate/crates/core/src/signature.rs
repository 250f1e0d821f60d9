//! Three-phase player identities: signature prefixes, then an adopted ID with
//! an old and a new counter, then the ID alone.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SketchError};
use crate::game::PlayerState;
use crate::hashkit::{PairwiseHash, SignatureMatrix};
use crate::sampling::{pool_membership, PoolSlot};
use crate::Element;

/// Last round of phase 1 and of phase 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseBoundaries {
    pub phase1_end: u32,
    pub phase2_end: u32,
}

impl PhaseBoundaries {
    /// `ceil(log2 log2 n)` and `ceil(10 log2 log2 n)`.
    pub fn for_n(n: u64) -> Self {
        let ll = (n.max(4) as f64).log2().log2();
        let phase1_end = crate::num::ceil_formula(ll) as u32;
        let phase2_end = crate::num::ceil_formula(10.0 * ll) as u32;
        debug_assert!(phase1_end <= phase2_end);
        Self {
            phase1_end,
            phase2_end,
        }
    }

    pub fn phase_of(&self, gamma: u32) -> u8 {
        if gamma <= self.phase1_end {
            1
        } else if gamma <= self.phase2_end {
            2
        } else {
            3
        }
    }
}

/// Phase of round `gamma` for universe size `n`.
pub fn phase_of(gamma: u32, n: u64) -> u8 {
    PhaseBoundaries::for_n(n).phase_of(gamma)
}

/// Phase-dependent counter: old in phase 1, old + new in phase 2, new in
/// phase 3.
pub fn effective_counter(player: &PlayerState) -> u64 {
    match player.phase {
        1 => player.old_counter,
        2 => player.old_counter + player.new_counter,
        _ => player.new_counter,
    }
}

/// Whether `element` matches `player`: it must fall in the player's pool slot
/// under the row hash `g`, and then equal the resolved ID or, for an
/// unresolved player, share the stored signature prefix.
pub fn match_element(
    player: &PlayerState,
    element: Element,
    g: &PairwiseHash,
    slot_width: u64,
    sig: Option<&SignatureMatrix>,
) -> bool {
    let slot = PoolSlot {
        row: player.row,
        z: player.slot,
        width: slot_width,
    };
    if !pool_membership(g, &slot, element) {
        return false;
    }
    identity_matches(player, element, sig)
}

/// The identity test alone, for callers that already applied the slot gate.
#[inline]
pub(crate) fn identity_matches(
    player: &PlayerState,
    element: Element,
    sig: Option<&SignatureMatrix>,
) -> bool {
    match (player.resolved_id, sig) {
        (Some(id), _) => id == element,
        (None, Some(m)) => m.prefix_unchecked(element, player.signature.len) == player.signature,
        (None, None) => false,
    }
}

/// Grows the stored signature to the player's target length using the bits
/// of a matching element.
pub fn extend_signature(player: &mut PlayerState, element: Element, sig: &SignatureMatrix) -> Result<()> {
    if player.phase != 1 || player.resolved_id.is_some() {
        return Err(SketchError::Contract(
            "signature extension outside phase 1".into(),
        ));
    }
    if player.target_len > player.signature.len {
        player.signature = sig.extend(player.signature, element, player.target_len);
        player.shadow = element;
    }
    Ok(())
}

/// Target signature length in round `gamma`: `min(s, varrho gamma)`.
pub fn target_length(s: u32, varrho: u32, gamma: u32) -> u8 {
    (varrho as u64 * gamma as u64).min(s as u64) as u8
}

/// Gives the player the ID of a matching element. The old counter is frozen
/// and the new counter starts at zero.
pub fn adopt_id(player: &mut PlayerState, element: Element) -> Result<()> {
    if player.resolved_id.is_some() {
        return Err(SketchError::Contract("player already holds an ID".into()));
    }
    if player.phase < 2 {
        return Err(SketchError::Contract("ID adoption before phase 2".into()));
    }
    player.resolved_id = Some(element);
    player.new_counter = 0;
    player.shadow = element;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phases_for_2_pow_16() {
        let n = 1 << 16;
        assert_eq!(phase_of(4, n), 1);
        assert_eq!(phase_of(5, n), 2);
        assert_eq!(phase_of(40, n), 2);
        assert_eq!(phase_of(41, n), 3);
    }

    #[test]
    fn effective_by_phase() {
        let mut p = PlayerState::bare(0, 1);
        p.old_counter = 7;
        p.phase = 1;
        assert_eq!(effective_counter(&p), 7);
        p.new_counter = 4;
        p.phase = 2;
        assert_eq!(effective_counter(&p), 11);
        p.phase = 3;
        assert_eq!(effective_counter(&p), 4);
    }

    #[test]
    fn adoption_rules() {
        let mut p = PlayerState::bare(0, 1);
        p.phase = 2;
        p.old_counter = 12;
        adopt_id(&mut p, 9).unwrap();
        assert_eq!(p.resolved_id, Some(9));
        p.new_counter += 5;
        assert_eq!(effective_counter(&p), 17);
        p.phase = 3;
        assert_eq!(effective_counter(&p), 5);
        assert!(adopt_id(&mut p, 9).is_err());
        let mut q = PlayerState::bare(0, 1);
        q.phase = 1;
        assert!(adopt_id(&mut q, 3).is_err());
    }

    #[test]
    fn phase_three_matches_by_id() {
        let g = PairwiseHash::new(5, 1024, 1).unwrap();
        let mut p = PlayerState::bare(0, 1);
        p.phase = 3;
        p.resolved_id = Some(77);
        assert!(match_element(&p, 77, &g, 1, None));
        assert!(!match_element(&p, 78, &g, 1, None));
    }

    #[test]
    fn slot_gate_comes_first() {
        let m = SignatureMatrix::new(1, 1024, 16).unwrap();
        let g = PairwiseHash::new(5, 1024, 64).unwrap();
        let x = 10;
        let mut p = PlayerState::bare(0, g.eval(x) + 2);
        p.phase = 1;
        p.signature = m.prefix(x, 8).unwrap();
        assert!(!match_element(&p, x, &g, 1, Some(&m)));
        p.slot = g.eval(x) + 1;
        assert!(match_element(&p, x, &g, 1, Some(&m)));
    }

    #[test]
    fn extension_lengths() {
        let m = SignatureMatrix::new(1, 1024, 20).unwrap();
        let mut p = PlayerState::bare(0, 1);
        p.phase = 1;
        p.signature = m.prefix(5, 8).unwrap();
        p.target_len = 8;
        extend_signature(&mut p, 5, &m).unwrap();
        assert_eq!(p.signature.len, 8);
        p.target_len = target_length(20, 8, 2);
        extend_signature(&mut p, 5, &m).unwrap();
        assert_eq!(p.signature, m.prefix(5, 16).unwrap());
        p.target_len = target_length(20, 8, 3);
        extend_signature(&mut p, 5, &m).unwrap();
        assert_eq!(p.signature.len, 20);
    }
}
