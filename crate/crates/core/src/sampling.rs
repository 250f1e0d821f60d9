//! Reservoir sampling with a bounded pool counter, pool slots, and two-level
//! sampling (hash filter, then a uniform sample from the filtered pool).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SketchError};
use crate::hashkit::{derive_seed, rng_from_seed, BernoulliHash, PairwiseHash, SeedTag};
use crate::Element;

/// Single-item reservoir over a pool of arrivals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReservoirState {
    pool_count: u64,
    current_sample: Option<Element>,
    cap: u64,
}

impl ReservoirState {
    pub fn new(cap: u64) -> Self {
        Self {
            pool_count: 0,
            current_sample: None,
            cap: cap.max(1),
        }
    }

    pub fn pool_count(&self) -> u64 {
        self.pool_count
    }

    pub fn sample(&self) -> Option<Element> {
        self.current_sample
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    pub fn is_active(&self) -> bool {
        self.pool_count < self.cap
    }

    /// Feeds one pool arrival. Returns whether it replaced the sample.
    pub fn step<R: Rng + ?Sized>(&mut self, element: Element, rng: &mut R) -> Result<bool> {
        if !self.is_active() {
            return Err(SketchError::Contract(
                "reservoir stepped after reaching its cap".into(),
            ));
        }
        self.pool_count += 1;
        let replace = self.pool_count == 1 || rng.random_range(0..self.pool_count) == 0;
        if replace {
            self.current_sample = Some(element);
        }
        Ok(replace)
    }
}

/// Value-style wrapper around [`ReservoirState::step`].
pub fn reservoir_step<R: Rng + ?Sized>(
    mut state: ReservoirState,
    element: Element,
    rng: &mut R,
) -> Result<ReservoirState> {
    state.step(element, rng)?;
    Ok(state)
}

/// Player `z`'s slot in a row: hash values in `[width (z-1), width z)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoolSlot {
    pub row: u64,
    pub z: u64,
    pub width: u64,
}

impl PoolSlot {
    /// Slot index owning `hash_value`, for slots of the given width.
    #[inline]
    pub fn index_of(hash_value: u64, width: u64) -> u64 {
        hash_value / width + 1
    }
}

/// Whether `element` belongs to the pool of `slot` under row hash `g`.
#[inline]
pub fn pool_membership(g: &PairwiseHash, slot: &PoolSlot, element: Element) -> bool {
    debug_assert!(slot.width >= 1 && slot.z >= 1);
    let v = g.eval(element);
    slot.width * (slot.z - 1) <= v && v < slot.width * slot.z
}

/// Result of [`two_level_sample`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TwoLevelSample {
    pub pool_size: u64,
    pub sample: Option<Element>,
}

/// Two-level sampling of `stream` with filter probability `lambda`.
///
/// The filter hash and the reservoir coins use independent seeds derived from
/// `seed`.
pub fn two_level_sample(stream: &[Element], n: u64, lambda: f64, seed: u64) -> Result<TwoLevelSample> {
    let h = BernoulliHash::new(derive_seed(seed, SeedTag::Player, 0), n, lambda)?;
    let mut rng = rng_from_seed(derive_seed(seed, SeedTag::Player, 1));
    two_level_sample_with(&h, stream, &mut rng)
}

/// Two-level sampling with a caller-supplied filter and coin source.
pub fn two_level_sample_with<R: Rng + ?Sized>(
    h: &BernoulliHash,
    stream: &[Element],
    rng: &mut R,
) -> Result<TwoLevelSample> {
    let mut state = ReservoirState::new(u64::MAX);
    for &q in stream {
        if h.eval(q) {
            state.step(q, rng)?;
        }
    }
    Ok(TwoLevelSample {
        pool_size: state.pool_count(),
        sample: state.sample(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::proportion;

    #[test]
    fn slot_boundaries() {
        let g = PairwiseHash::new(1, 256, 64).unwrap();
        // find elements with hash 2 and 3
        let x2 = (1..=256).find(|&x| g.eval(x) == 2).unwrap();
        let x3 = (1..=256).find(|&x| g.eval(x) == 3).unwrap();
        let slot = PoolSlot {
            row: 0,
            z: 3,
            width: 1,
        };
        assert!(pool_membership(&g, &slot, x2));
        assert!(!pool_membership(&g, &slot, x3));
    }

    #[test]
    fn slots_are_disjoint() {
        for seed in 0..4 {
            let g = PairwiseHash::new(seed, 256, 64).unwrap();
            for width in [1u64, 2, 4] {
                for x in 1..=256 {
                    let owners = (1..=64 / width)
                        .filter(|&z| pool_membership(&g, &PoolSlot { row: 0, z, width }, x))
                        .count();
                    assert!(owners <= 1);
                    assert_eq!(owners, 1);
                }
            }
        }
    }

    #[test]
    fn first_arrival_is_sampled() {
        let mut rng = rng_from_seed(3);
        let s = reservoir_step(ReservoirState::new(10), 42, &mut rng).unwrap();
        assert_eq!(s.sample(), Some(42));
    }

    #[test]
    fn cap_deactivates() {
        let mut rng = rng_from_seed(3);
        let mut s = ReservoirState::new(2);
        s.step(1, &mut rng).unwrap();
        assert!(s.is_active());
        s.step(2, &mut rng).unwrap();
        assert!(!s.is_active());
        assert!(s.step(3, &mut rng).is_err());
    }

    #[test]
    fn three_arrivals_uniform() {
        let trials = 30_000u64;
        let mut counts = [0u64; 3];
        for seed in 0..trials {
            let mut rng = rng_from_seed(seed);
            let mut s = ReservoirState::new(100);
            for x in [1, 2, 3] {
                s.step(x, &mut rng).unwrap();
            }
            counts[(s.sample().unwrap() - 1) as usize] += 1;
        }
        for c in counts {
            let (p, _) = proportion(c, trials);
            let se = ((1.0 / 3.0) * (2.0 / 3.0) / trials as f64).sqrt();
            assert!((p - 1.0 / 3.0).abs() <= 3.0 * se, "{counts:?}");
        }
    }

    #[test]
    fn two_level_extremes() {
        let q = vec![5u64; 40];
        assert_eq!(
            two_level_sample(&q, 16, 0.0, 1).unwrap(),
            TwoLevelSample {
                pool_size: 0,
                sample: None
            }
        );
        assert_eq!(
            two_level_sample(&q, 16, 1.0, 1).unwrap(),
            TwoLevelSample {
                pool_size: 40,
                sample: Some(5)
            }
        );
    }
}
