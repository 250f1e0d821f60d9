//! Information-theoretic bit accounting for sketch state.

use serde::{Deserialize, Serialize};

/// Bits held by sketch state, by category.
///
/// A game reports its live state as a snapshot after each row; the ledger
/// keeps the per-category peak. Ledgers of concurrently running sketches
/// merge by summation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryLedger {
    pub sample_ids: u64,
    pub signatures: u64,
    pub counters: u64,
    pub winner_encodings: u64,
    pub row_ids: u64,
    pub hash_seeds: u64,
    pub reservoir_counters: u64,
    /// Approximate bytes of the in-memory representation; not part of `total`.
    pub machine_resident_bytes: u64,
}

impl MemoryLedger {
    pub fn total(&self) -> u64 {
        self.sample_ids
            + self.signatures
            + self.counters
            + self.winner_encodings
            + self.row_ids
            + self.hash_seeds
            + self.reservoir_counters
    }

    /// Raises every category to at least the snapshot's value.
    pub fn observe(&mut self, snap: &MemoryLedger) {
        self.sample_ids = self.sample_ids.max(snap.sample_ids);
        self.signatures = self.signatures.max(snap.signatures);
        self.counters = self.counters.max(snap.counters);
        self.winner_encodings = self.winner_encodings.max(snap.winner_encodings);
        self.row_ids = self.row_ids.max(snap.row_ids);
        self.hash_seeds = self.hash_seeds.max(snap.hash_seeds);
        self.reservoir_counters = self.reservoir_counters.max(snap.reservoir_counters);
        self.machine_resident_bytes = self.machine_resident_bytes.max(snap.machine_resident_bytes);
    }

    /// Category-wise sum.
    pub fn merge(&mut self, other: &MemoryLedger) {
        self.sample_ids += other.sample_ids;
        self.signatures += other.signatures;
        self.counters += other.counters;
        self.winner_encodings += other.winner_encodings;
        self.row_ids += other.row_ids;
        self.hash_seeds += other.hash_seeds;
        self.reservoir_counters += other.reservoir_counters;
        self.machine_resident_bytes += other.machine_resident_bytes;
    }

    pub fn merged<'a>(items: impl IntoIterator<Item = &'a MemoryLedger>) -> MemoryLedger {
        let mut out = MemoryLedger::default();
        for l in items {
            out.merge(l);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peak_and_merge() {
        let mut l = MemoryLedger::default();
        l.observe(&MemoryLedger {
            counters: 10,
            sample_ids: 3,
            ..Default::default()
        });
        l.observe(&MemoryLedger {
            counters: 4,
            sample_ids: 9,
            ..Default::default()
        });
        assert_eq!(l.counters, 10);
        assert_eq!(l.sample_ids, 9);
        assert_eq!(l.total(), 19);
        let m = MemoryLedger::merged([&l, &l]);
        assert_eq!(m.total(), 38);
    }
}
