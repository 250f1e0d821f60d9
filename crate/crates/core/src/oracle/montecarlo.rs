use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, SketchError};
use crate::hashkit::{derive_seed, rng_from_seed, BernoulliHash, SeedTag};
use crate::num::{mean_se, proportion};
use crate::sampling::two_level_sample_with;
use crate::Element;

/// A Monte Carlo point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub se: f64,
    pub trials: u64,
}

impl McEstimate {
    fn from_hits(hits: u64, trials: u64) -> Self {
        let (estimate, se) = proportion(hits, trials);
        Self { estimate, se, trials }
    }

    /// `estimate <= bound + z se`.
    pub fn at_most(&self, bound: f64, z: f64) -> bool {
        self.estimate <= bound + z * self.se
    }

    /// `estimate >= bound - z se`.
    pub fn at_least(&self, bound: f64, z: f64) -> bool {
        self.estimate >= bound - z * self.se
    }
}

fn trial_rng(seed: u64, t: u64) -> rand_chacha::ChaCha8Rng {
    rng_from_seed(derive_seed(seed, SeedTag::Trial, t))
}

/// How the basic events `C_i` are coupled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventConstruction {
    /// Independent `C_i`, each with probability `a / N`.
    Independent,
    /// Mutually exclusive `C_i` carved from one uniform draw.
    Disjoint,
}

/// A synthetic event battery for the noisy-events union bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoisyConfig {
    /// `sum P(C_i)`.
    pub a: f64,
    /// `sum_j P(B_ij | C_i)` for every `i`.
    pub b: f64,
    pub events: u32,
    pub noise_per_event: u32,
    pub construction: EventConstruction,
}

/// The corollary floor `min(0.8 a, 0.04)`.
pub fn noisy_lemma_floor(a: f64) -> f64 {
    (0.8 * a).min(0.04)
}

/// Empirical `P(union A_i)` with `A_i = C_i and no B_ij`.
pub fn mc_noisy_lemma(cfg: &NoisyConfig, trials: u64, seed: u64) -> Result<McEstimate> {
    if cfg.events == 0 || cfg.noise_per_event == 0 {
        return invalid("noisy battery needs at least one event and one noise event");
    }
    if !(cfg.a >= 0.0) || !(cfg.b >= 0.0) || cfg.b > 1.0 {
        return invalid("noisy battery needs a >= 0 and b in [0, 1]");
    }
    let n = cfg.events as f64;
    let pc = cfg.a / n;
    if pc > 1.0 || (cfg.construction == EventConstruction::Disjoint && cfg.a > 1.0) {
        return invalid("event probabilities exceed 1");
    }
    let pb = cfg.b / cfg.noise_per_event as f64;
    let mut hits = 0;
    for t in 0..trials {
        let mut rng = trial_rng(seed, t);
        let noisy_ok =
            |rng: &mut rand_chacha::ChaCha8Rng| (0..cfg.noise_per_event).all(|_| !rng.random_bool(pb));
        let any = match cfg.construction {
            EventConstruction::Independent => {
                let mut any = false;
                for _ in 0..cfg.events {
                    if rng.random_bool(pc) && noisy_ok(&mut rng) {
                        any = true;
                    }
                }
                any
            }
            EventConstruction::Disjoint => {
                let u: f64 = rng.random();
                u < cfg.a && noisy_ok(&mut rng)
            }
        };
        if any {
            hits += 1;
        }
    }
    Ok(McEstimate::from_hits(hits, trials))
}

/// Bell numbers `B(1..=8)`.
pub fn bell(k: u32) -> Result<u64> {
    const BELL: [u64; 8] = [1, 2, 5, 15, 52, 203, 877, 4140];
    if k == 0 {
        return Ok(1);
    }
    BELL.get(k as usize - 1)
        .copied()
        .ok_or(SketchError::UnsupportedOrder(k))
}

/// `(k+1) Bell(k) (Np)^k` when `Np >= 1`, else `(k+1) Bell(k)`.
pub fn binomial_moment_bound(n: u64, p: f64, k: u32) -> Result<f64> {
    let beta = (k as f64 + 1.0) * bell(k)? as f64;
    let np = n as f64 * p;
    Ok(if np >= 1.0 { beta * np.powi(k as i32) } else { beta })
}

/// Empirical `E(X^k)` for `X ~ Binomial(N, p)`.
pub fn mc_binomial_moment(n: u64, p: f64, k: u32, trials: u64, seed: u64) -> Result<McEstimate> {
    bell(k)?;
    let dist = Binomial::new(n, p).map_err(|e| SketchError::InvalidParameter(e.to_string()))?;
    let mut rng = rng_from_seed(seed);
    let xs: Vec<f64> = (0..trials)
        .map(|_| (dist.sample(&mut rng) as f64).powi(k as i32))
        .collect();
    let (estimate, se) = mean_se(&xs);
    Ok(McEstimate { estimate, se, trials })
}

/// A two-level sampling instance: a stream of length `K` in which element 1
/// occurs `ceil(lambda T K)` times and every other token is distinct.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelInstance {
    pub stream_len: u64,
    pub t: f64,
    pub lambda: f64,
    pub n: u64,
}

impl TwoLevelInstance {
    pub fn heavy_count(&self) -> u64 {
        crate::num::ceil_formula(self.lambda * self.t * self.stream_len as f64)
    }

    pub fn stream(&self) -> Result<Vec<Element>> {
        let f1 = self.heavy_count();
        if f1 > self.stream_len || self.stream_len > self.n {
            return invalid("two-level instance does not fit its universe");
        }
        // Spread the heavy copies evenly; the reservoir law is order-free.
        let mut out = Vec::with_capacity(self.stream_len as usize);
        let mut next_other = 2;
        for pos in 0..self.stream_len {
            let placed = (pos + 1) * f1 / self.stream_len - pos * f1 / self.stream_len;
            if placed == 1 {
                out.push(1);
            } else {
                out.push(next_other);
                next_other += 1;
            }
        }
        Ok(out)
    }

    /// The lemma's bound `2 / sqrt(T)`.
    pub fn bound(&self) -> f64 {
        2.0 / self.t.sqrt()
    }
}

/// Empirical `P(sample != 1 | 1 in pool)`, drawing hashes from the family
/// conditioned on `h(1) = 1`.
pub fn mc_two_level(inst: &TwoLevelInstance, trials: u64, seed: u64) -> Result<McEstimate> {
    let stream = inst.stream()?;
    let mut misses = 0;
    for t in 0..trials {
        let s = derive_seed(seed, SeedTag::Trial, t);
        let h =
            BernoulliHash::with_forced_member(derive_seed(s, SeedTag::Player, 0), inst.n, inst.lambda, 1)?;
        let mut rng = rng_from_seed(derive_seed(s, SeedTag::Player, 1));
        let out = two_level_sample_with(&h, &stream, &mut rng)?;
        if out.sample != Some(1) {
            misses += 1;
        }
    }
    Ok(McEstimate::from_hits(misses, trials))
}

/// Costs `c_0 = (x d_0)^g`, `c_i = (d_i q^i)^g` with `d_i = 2^i F_0(D_i)` and
/// `F_0(D_i)` thinned binomially from `F_0(D_{i-1})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricCostConfig {
    pub universe: u64,
    pub q: f64,
    pub gamma: f64,
    pub levels: u32,
}

impl GeometricCostConfig {
    pub fn theta(&self) -> f64 {
        self.q.powf(self.gamma / (self.gamma + 1.0))
    }

    pub fn x(&self) -> f64 {
        10.0 / (1.0 - self.theta())
    }

    pub fn c0(&self) -> f64 {
        (self.x() * self.universe as f64).powf(self.gamma)
    }
}

/// Empirical `P(sum_{i>=1} c_i >= c_0 / (1 - theta))`.
pub fn mc_geometric_cost(cfg: &GeometricCostConfig, trials: u64, seed: u64) -> Result<McEstimate> {
    if !(cfg.q > 0.0 && cfg.q < 1.0) || !(cfg.gamma > 0.0) {
        return invalid("geometric cost needs q in (0,1) and gamma > 0");
    }
    let threshold = cfg.c0() / (1.0 - cfg.theta());
    let mut hits = 0;
    for t in 0..trials {
        let mut rng = trial_rng(seed, t);
        let mut f0 = cfg.universe;
        let mut total = 0.0;
        for i in 1..=cfg.levels {
            f0 = Binomial::new(f0, 0.5)
                .map_err(|e| SketchError::InvalidParameter(e.to_string()))?
                .sample(&mut rng);
            let d = 2f64.powi(i as i32) * f0 as f64;
            total += (d * cfg.q.powi(i as i32)).powf(cfg.gamma);
        }
        if total >= threshold {
            hits += 1;
        }
    }
    Ok(McEstimate::from_hits(hits, trials))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_table() {
        assert_eq!(bell(1).unwrap(), 1);
        assert_eq!(bell(8).unwrap(), 4140);
        assert!(bell(9).is_err());
    }

    #[test]
    fn binomial_zero_p() {
        let m = mc_binomial_moment(50, 0.0, 3, 1000, 1).unwrap();
        assert_eq!(m.estimate, 0.0);
    }

    #[test]
    fn two_level_stream_shape() {
        let inst = TwoLevelInstance {
            stream_len: 100,
            t: 4.0,
            lambda: 0.1,
            n: 1000,
        };
        let s = inst.stream().unwrap();
        assert_eq!(s.len(), 100);
        assert_eq!(s.iter().filter(|&&x| x == 1).count() as u64, inst.heavy_count());
        assert_eq!(inst.heavy_count(), 40);
    }

    #[test]
    fn geometric_constants() {
        let cfg = GeometricCostConfig {
            universe: 1024,
            q: 0.6,
            gamma: 5.0 / 7.0,
            levels: 10,
        };
        let theta = cfg.theta();
        let delta = theta.powf(1.0 / cfg.gamma);
        assert!((delta * theta - 0.6).abs() < 1e-12);
    }
}
