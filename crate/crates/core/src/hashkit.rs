//! Seeded hash families over the Mersenne field `2^61 - 1`.
//!
//! All families are pure functions of their seed: two objects built from the
//! same arguments agree on every input.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::Element;

/// The Mersenne prime `2^61 - 1`.
pub const MERSENNE_61: u64 = (1u64 << 61) - 1;

const MASK_95: u128 = (1u128 << 95) - 1;

/// Largest supported universe size.
pub const MAX_DOMAIN: u64 = MERSENNE_61 - 1;

#[inline]
fn reduce(x: u128) -> u64 {
    let lo = (x as u64) & MERSENNE_61;
    let hi = (x >> 61) as u64;
    let mut s = lo + hi;
    s = (s & MERSENNE_61) + (s >> 61);
    if s >= MERSENNE_61 {
        s - MERSENNE_61
    } else {
        s
    }
}

#[inline]
pub(crate) fn mul_mod(a: u64, b: u64) -> u64 {
    reduce(a as u128 * b as u128)
}

#[inline]
pub(crate) fn add_mod(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= MERSENNE_61 {
        s - MERSENNE_61
    } else {
        s
    }
}

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A portable RNG seeded from a 64-bit seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn field_element<R: Rng>(rng: &mut R) -> u64 {
    rng.random_range(0..MERSENNE_61)
}

fn check_domain(n: u64) -> Result<()> {
    if n == 0 {
        return invalid("domain size must be positive");
    }
    if n > MAX_DOMAIN {
        return invalid(format!("domain size {n} exceeds {MAX_DOMAIN}"));
    }
    Ok(())
}

/// Category tags for seed derivation.
#[repr(u64)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedTag {
    Cell = 1,
    Row = 2,
    Player = 3,
    Signature = 4,
    Subsample = 5,
    Split = 6,
    Repetition = 7,
    Substream = 8,
    Epoch = 9,
    Matrix = 10,
    Level = 11,
    Trial = 12,
    Generator = 13,
    Pass = 14,
}

/// Derives a child seed from `(parent, tag, index)`.
///
/// The pair `(parent, tag)` selects a degree-1 polynomial over the Mersenne
/// field, which is evaluated at `index` and passed through a SplitMix64
/// finalizer. Any component can be replayed from the master seed and its path
/// of `(tag, index)` steps.
pub fn derive_seed(parent: u64, tag: SeedTag, index: u64) -> u64 {
    let t = tag as u64;
    let a = mix64(parent ^ t.wrapping_mul(0xD6E8_FEB8_6659_FD93)) % MERSENNE_61;
    let b = mix64(a ^ parent.rotate_left(29)) % MERSENNE_61;
    let v = add_mod(mul_mod(a, index % MERSENNE_61), b);
    mix64(v ^ (t << 58))
}

/// A pairwise-independent hash `[n] -> [0, t)`: `((a x + b) mod p) mod t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairwiseHash {
    seed: u64,
    n: u64,
    t: u64,
    a: u64,
    b: u64,
}

impl PairwiseHash {
    pub fn new(seed: u64, n: u64, t: u64) -> Result<Self> {
        check_domain(n)?;
        if t == 0 {
            return invalid("hash range must be positive");
        }
        let mut rng = rng_from_seed(seed);
        let a = field_element(&mut rng);
        let b = field_element(&mut rng);
        Ok(Self { seed, n, t, a, b })
    }

    #[inline]
    pub fn eval(&self, x: Element) -> u64 {
        add_mod(mul_mod(self.a, x), self.b) % self.t
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn domain(&self) -> u64 {
        self.n
    }

    pub fn range(&self) -> u64 {
        self.t
    }

    /// Bits needed to store the two field coefficients.
    pub fn seed_bits() -> u64 {
        122
    }
}

/// Same as [`PairwiseHash::new`].
pub fn make_pairwise(seed: u64, n: u64, t: u64) -> Result<PairwiseHash> {
    PairwiseHash::new(seed, n, t)
}

/// A bit string of at most 64 bits; bit `c` holds column `c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
pub struct Signature {
    pub bits: u64,
    pub len: u8,
}

impl Signature {
    pub const EMPTY: Signature = Signature { bits: 0, len: 0 };

    pub fn is_prefix_of(&self, other: &Signature) -> bool {
        if self.len > other.len {
            return false;
        }
        let mask = low_mask(self.len);
        self.bits & mask == other.bits & mask
    }

    pub fn truncate(&self, len: u8) -> Signature {
        let len = len.min(self.len);
        Signature {
            bits: self.bits & low_mask(len),
            len,
        }
    }

    pub fn bit(&self, c: u8) -> bool {
        c < self.len && (self.bits >> c) & 1 == 1
    }
}

fn low_mask(len: u8) -> u64 {
    if len >= 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

/// `s` independent columns, each a degree-3 polynomial over the Mersenne
/// field; the bit of element `x` in column `c` is the low bit of `poly_c(x)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignatureMatrix {
    seed: u64,
    n: u64,
    columns: Vec<[u64; 4]>,
}

/// Widest supported signature.
pub const MAX_SIGNATURE_WIDTH: u32 = 64;

impl SignatureMatrix {
    pub fn new(seed: u64, n: u64, s: u32) -> Result<Self> {
        check_domain(n)?;
        if s == 0 || s > MAX_SIGNATURE_WIDTH {
            return invalid(format!("signature width {s} outside 1..=64"));
        }
        let columns = (0..s as u64)
            .map(|c| {
                let mut rng = rng_from_seed(derive_seed(seed, SeedTag::Signature, c));
                [
                    field_element(&mut rng),
                    field_element(&mut rng),
                    field_element(&mut rng),
                    field_element(&mut rng),
                ]
            })
            .collect();
        Ok(Self { seed, n, columns })
    }

    pub fn width(&self) -> u32 {
        self.columns.len() as u32
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn domain(&self) -> u64 {
        self.n
    }

    #[inline]
    pub fn bit(&self, x: Element, c: usize) -> bool {
        let [c0, c1, c2, c3] = self.columns[c];
        let mut v = c3;
        v = add_mod(mul_mod(v, x), c2);
        v = add_mod(mul_mod(v, x), c1);
        v = add_mod(mul_mod(v, x), c0);
        v & 1 == 1
    }

    /// `R_j(x)`: the first `j` bits of row `x`.
    pub fn prefix(&self, x: Element, j: u32) -> Result<Signature> {
        if j > self.width() {
            return invalid(format!("prefix length {j} exceeds width {}", self.width()));
        }
        Ok(self.prefix_unchecked(x, j as u8))
    }

    pub(crate) fn prefix_unchecked(&self, x: Element, j: u8) -> Signature {
        let mut bits = 0u64;
        for c in 0..j as usize {
            if self.bit(x, c) {
                bits |= 1 << c;
            }
        }
        Signature { bits, len: j }
    }

    /// Extends `sig` (a prefix of `R(x)`) to length `j` using row `x`.
    pub(crate) fn extend(&self, sig: Signature, x: Element, j: u8) -> Signature {
        let mut bits = sig.bits;
        for c in sig.len as usize..j as usize {
            if self.bit(x, c) {
                bits |= 1 << c;
            }
        }
        Signature {
            bits,
            len: j.max(sig.len),
        }
    }
}

/// Operation-name alias for [`SignatureMatrix::prefix`].
pub fn signature_prefix(sig: &SignatureMatrix, x: Element, j: u32) -> Result<Signature> {
    sig.prefix(x, j)
}

/// Threshold resolution for [`BernoulliHash`].
pub const BERNOULLI_BITS: u32 = 32;
const BERNOULLI_ONE: u64 = 1 << BERNOULLI_BITS;

/// A pairwise-independent indicator with `P(h(x) = 1) = j / 2^32` exactly.
///
/// The 32-bit value is multiply-add-shift over `2^95`, which is exactly
/// uniform and pairwise independent for 64-bit keys.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BernoulliHash {
    seed: u64,
    n: u64,
    threshold: u64,
    a: u128,
    b: u128,
}

fn random_u95<R: Rng>(rng: &mut R) -> u128 {
    ((rng.random::<u64>() as u128) << 64 | rng.random::<u64>() as u128) & MASK_95
}

/// Quantizes `lambda` to the nearest multiple of `2^-32`.
pub fn quantize_lambda(lambda: f64) -> Result<u64> {
    if !(0.0..=1.0).contains(&lambda) || lambda.is_nan() {
        return invalid(format!("probability {lambda} outside [0, 1]"));
    }
    Ok((lambda * BERNOULLI_ONE as f64).round() as u64)
}

impl BernoulliHash {
    pub fn new(seed: u64, n: u64, lambda: f64) -> Result<Self> {
        check_domain(n)?;
        let threshold = quantize_lambda(lambda)?;
        let mut rng = rng_from_seed(seed);
        let a = random_u95(&mut rng);
        let b = random_u95(&mut rng);
        Ok(Self {
            seed,
            n,
            threshold,
            a,
            b,
        })
    }

    /// Draws from the family conditioned on `h(forced) = 1`.
    ///
    /// `a` stays uniform and `b` is solved from a uniform accepted output, so
    /// the result has exactly the conditional law.
    pub fn with_forced_member(seed: u64, n: u64, lambda: f64, forced: Element) -> Result<Self> {
        check_domain(n)?;
        let threshold = quantize_lambda(lambda)?;
        if threshold == 0 {
            return invalid("cannot force membership when lambda rounds to 0");
        }
        let mut rng = rng_from_seed(seed);
        let a = random_u95(&mut rng);
        let top = rng.random_range(0..threshold) as u128;
        let low = (rng.random::<u64>() >> 1) as u128;
        let y = top << 63 | low;
        let b = y.wrapping_sub(a.wrapping_mul(forced as u128)) & MASK_95;
        Ok(Self {
            seed,
            n,
            threshold,
            a,
            b,
        })
    }

    /// The raw 32-bit hash value.
    #[inline]
    pub fn value(&self, x: Element) -> u64 {
        ((self.a.wrapping_mul(x as u128).wrapping_add(self.b) & MASK_95) >> 63) as u64
    }

    #[inline]
    pub fn eval(&self, x: Element) -> bool {
        self.value(x) < self.threshold
    }

    pub fn lambda(&self) -> f64 {
        self.threshold as f64 / BERNOULLI_ONE as f64
    }

    pub fn threshold(&self) -> u64 {
        self.threshold
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn domain(&self) -> u64 {
        self.n
    }
}

/// Operation-name alias for [`BernoulliHash::new`].
pub fn make_bernoulli(seed: u64, n: u64, lambda: f64) -> Result<BernoulliHash> {
    BernoulliHash::new(seed, n, lambda)
}
