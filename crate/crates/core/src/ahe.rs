//! Heavy-element finder: a statistics pass, a subsampled pass of game
//! sequences over hash-split substreams, and an exact counting pass. A
//! one-pass variant halves its sampling rate as the stream grows.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::game::{
    play_sequence, sort_candidates, Candidate, CandidateKey, GameConfig, GameSequence, SequenceScale,
    SignatureProbe,
};
use crate::hashkit::{derive_seed, rng_from_seed, PairwiseHash, SeedTag};
use crate::ledger::MemoryLedger;
use crate::num::{bits_for, ceil_formula};
use crate::Element;

/// Configuration of the heavy-element finder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AheConfig {
    pub rho: f64,
    pub delta: f64,
    pub k: u32,
    pub seed: u64,
    /// Substream count is `ceil(c_z / rho^2)`.
    pub c_z: f64,
    /// Sampling rate scales with `c_p F0 / F1`.
    pub c_p: f64,
    /// Floor on the expected subsampled length.
    pub min_sample_len: u64,
    /// Candidate pool holds at most `ceil(c_pool / rho^2)` entries.
    pub c_pool: f64,
    /// Overrides the substream count.
    pub substreams: Option<u64>,
    /// Overrides `ceil(log2(1/delta))`.
    pub repetitions: Option<u32>,
    /// Budget constant `c_B` of the bits check.
    pub c_budget: f64,
    /// Exponent of `1/rho` in the bits budget.
    pub c_eff: f64,
    pub game: GameConfig,
}

impl Default for AheConfig {
    fn default() -> Self {
        Self {
            rho: 0.5,
            delta: 0.25,
            k: 4,
            seed: 0,
            c_z: 100.0,
            c_p: 1.0,
            min_sample_len: 256,
            c_pool: 4.0,
            substreams: None,
            repetitions: None,
            c_budget: 32768.0,
            c_eff: 2.0,
            game: GameConfig::default(),
        }
    }
}

impl AheConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return invalid("rho must lie in (0, 1]");
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return invalid("delta must lie in (0, 1)");
        }
        if self.k < 2 {
            return invalid("heavy elements need k >= 2");
        }
        if !(self.c_z > 0.0 && self.c_p > 0.0 && self.c_pool > 0.0 && self.c_budget > 0.0) {
            return invalid("c_z, c_p, c_pool and c_budget must be positive");
        }
        if self.substreams == Some(0) || self.repetitions == Some(0) {
            return invalid("substream and repetition counts must be positive");
        }
        self.game.validate()
    }

    /// `ceil(c_z / rho^2)` unless overridden.
    pub fn substream_count(&self) -> u64 {
        self.substreams
            .unwrap_or_else(|| ceil_formula(self.c_z / (self.rho * self.rho)).max(1))
    }

    /// `ceil(log2(1/delta))` unless overridden.
    pub fn repetition_count(&self) -> u32 {
        self.repetitions
            .unwrap_or_else(|| ceil_formula((1.0 / self.delta).log2()).max(1) as u32)
    }

    /// `min(1, max(c_p F0, min_sample_len) / F1)`.
    pub fn sampling_rate(&self, f1: u64, f0: u64) -> f64 {
        if f1 == 0 {
            return 1.0;
        }
        ((self.c_p * f0 as f64).max(self.min_sample_len as f64) / f1 as f64).min(1.0)
    }

    pub fn pool_cap(&self) -> usize {
        ceil_formula(self.c_pool / (self.rho * self.rho)).max(1) as usize
    }

    /// `ceil(c_B rho^-C_eff F0^(1-2/k) log2(1/delta))`.
    pub fn budget_bits(&self, f0: u64) -> u64 {
        let shape = (f0.max(1) as f64).powf(1.0 - 2.0 / self.k as f64);
        let logd = (1.0 / self.delta).log2().max(1.0);
        ceil_formula(self.c_budget * self.rho.powf(-self.c_eff) * shape * logd)
    }
}

/// Elements with frequencies, plus run bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeavyReport {
    /// `(element, frequency)`, highest frequency first.
    pub entries: Vec<(Element, u64)>,
    pub passes: u32,
    pub ledger: MemoryLedger,
    /// Final sampling rate.
    pub p: f64,
    pub z: u64,
    pub repetitions: u32,
    pub f0: u64,
    pub f1: u64,
    pub candidates_pooled: usize,
    pub pool_cap: usize,
    pub games_played: usize,
    pub games_skipped: usize,
    pub budget_bits: u64,
    pub c_eff: f64,
    /// Sampling-rate halvings (one-pass only).
    pub halvings: u32,
}

impl HeavyReport {
    pub fn frequency_of(&self, x: Element) -> Option<u64> {
        self.entries.iter().find(|e| e.0 == x).map(|e| e.1)
    }
}

/// Exact `(F1, F0)` with a presence bitmap.
pub fn stats_pass(stream: &[Element]) -> (u64, u64) {
    let max = stream.iter().copied().max().unwrap_or(0) as usize;
    let mut seen = vec![false; max + 1];
    let mut f0 = 0;
    for &x in stream {
        if !seen[x as usize] {
            seen[x as usize] = true;
            f0 += 1;
        }
    }
    (stream.len() as u64, f0)
}

/// Streaming Bernoulli(p) token filter.
#[derive(Debug, Clone)]
pub struct Subsampler {
    p: f64,
    rng: rand_chacha::ChaCha8Rng,
}

impl Subsampler {
    pub fn new(p: f64, seed: u64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return invalid("sampling rate must lie in (0, 1]");
        }
        Ok(Self {
            p,
            rng: rng_from_seed(seed),
        })
    }

    pub fn keep(&mut self) -> bool {
        self.p >= 1.0 || self.rng.random_bool(self.p)
    }
}

/// Keeps each token independently with probability `p`, in order.
pub fn subsample(stream: &[Element], p: f64, seed: u64) -> Result<Vec<Element>> {
    let mut s = Subsampler::new(p, seed)?;
    Ok(stream.iter().copied().filter(|_| s.keep()).collect())
}

/// Routes an element to one of `z` substreams by a pairwise hash of its id.
#[derive(Debug, Clone)]
pub struct Splitter {
    h: PairwiseHash,
}

impl Splitter {
    pub fn new(domain: u64, z: u64, seed: u64) -> Result<Self> {
        if z == 0 {
            return invalid("substream count must be positive");
        }
        Ok(Self {
            h: PairwiseHash::new(seed, domain.max(1), z)?,
        })
    }

    pub fn route(&self, x: Element) -> usize {
        self.h.eval(x) as usize
    }
}

/// Splits a stream over `[1, domain]` into `z` substreams.
pub fn split_substreams(stream: &[Element], domain: u64, z: u64, seed: u64) -> Result<Vec<Vec<Element>>> {
    let sp = Splitter::new(domain, z, seed)?;
    let mut out = vec![Vec::new(); z as usize];
    for &x in stream {
        out[sp.route(x)].push(x);
    }
    Ok(out)
}

/// Formula universe of one substream.
fn substream_universe(f0_hint: u64, z: u64) -> u64 {
    f0_hint.div_ceil(z).max(16)
}

fn rep_seed(seed: u64, r: u32) -> u64 {
    derive_seed(seed, SeedTag::Repetition, r as u64)
}

/// Pass-2 output: all game winners and the combined ledger.
#[derive(Debug, Clone, Default)]
pub struct Pass2Output {
    pub candidates: Vec<Candidate>,
    pub ledger: MemoryLedger,
    pub games_played: usize,
    pub games_skipped: usize,
}

impl Pass2Output {
    fn absorb(&mut self, other: Pass2Output) {
        self.candidates.extend(other.candidates);
        self.ledger.merge(&other.ledger);
        self.games_played += other.games_played;
        self.games_skipped += other.games_skipped;
    }
}

/// Runs repetitions of subsample, split and play over a materialized stream.
pub fn pass2(
    stream: &[Element],
    domain: u64,
    f0_hint: u64,
    p: f64,
    cfg: &AheConfig,
    seed: u64,
) -> Result<Pass2Output> {
    let z = cfg.substream_count();
    let reps = cfg.repetition_count();
    let n_x = substream_universe(f0_hint, z);
    let per_rep = (0..reps)
        .into_par_iter()
        .map(|r| -> Result<Pass2Output> {
            let rs = rep_seed(seed, r);
            let sampled = subsample(stream, p, derive_seed(rs, SeedTag::Subsample, 0))?;
            let parts = split_substreams(&sampled, domain, z, derive_seed(rs, SeedTag::Split, 0))?;
            let outs = parts
                .par_iter()
                .enumerate()
                .map(|(x, part)| {
                    let scale = SequenceScale {
                        n: n_x,
                        domain,
                        k: cfg.k,
                        m_hint: part.len() as u64,
                    };
                    play_sequence(
                        part,
                        &scale,
                        &cfg.game,
                        derive_seed(rs, SeedTag::Substream, x as u64),
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            let mut acc = Pass2Output::default();
            for o in outs {
                acc.absorb(Pass2Output {
                    candidates: o.candidates,
                    ledger: o.ledger,
                    games_played: o.games_played,
                    games_skipped: o.games_skipped,
                });
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = Pass2Output::default();
    for o in per_rep {
        out.absorb(o);
    }
    Ok(out)
}

/// Streaming pass-2 core: repetitions times substreams of game sequences.
pub struct Pass2Core {
    reps: Vec<(Subsampler, Splitter, Vec<GameSequence>)>,
}

impl Pass2Core {
    pub fn new(domain: u64, f0_hint: u64, p: f64, cfg: &AheConfig, seed: u64) -> Result<Self> {
        let z = cfg.substream_count();
        let n_x = substream_universe(f0_hint, z);
        let reps = (0..cfg.repetition_count())
            .map(|r| {
                let rs = rep_seed(seed, r);
                let games = (0..z)
                    .map(|x| {
                        let scale = SequenceScale {
                            n: n_x,
                            domain,
                            k: cfg.k,
                            m_hint: n_x,
                        };
                        GameSequence::new(&scale, &cfg.game, derive_seed(rs, SeedTag::Substream, x))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok((
                    Subsampler::new(p, derive_seed(rs, SeedTag::Subsample, 0))?,
                    Splitter::new(domain, z, derive_seed(rs, SeedTag::Split, 0))?,
                    games,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { reps })
    }

    pub fn push(&mut self, x: Element) {
        for (sub, split, games) in &mut self.reps {
            if sub.keep() {
                games[split.route(x)].push(x);
            }
        }
    }

    pub fn finish(self) -> Pass2Output {
        let mut out = Pass2Output::default();
        for (_, _, games) in self.reps {
            for g in games {
                let o = g.finish();
                out.absorb(Pass2Output {
                    candidates: o.candidates,
                    ledger: o.ledger,
                    games_played: o.games_played,
                    games_skipped: o.games_skipped,
                });
            }
        }
        out
    }
}

#[derive(PartialEq, Eq, PartialOrd, Ord, Hash, Clone, Copy, Debug)]
enum PoolKey {
    Id(Element),
    Probe(u64, u64, u64, u8),
}

fn pool_key(c: &Candidate) -> PoolKey {
    match &c.key {
        CandidateKey::Id(x) => PoolKey::Id(*x),
        CandidateKey::Unresolved(p) => {
            let (a, b, c, d) = p.key();
            PoolKey::Probe(a, b, c, d)
        }
    }
}

/// Deduplicates candidates, keeping the highest counter per identity, and
/// keeps the `cap` highest.
pub fn pool_candidates(mut candidates: Vec<Candidate>, cap: usize) -> Vec<Candidate> {
    sort_candidates(&mut candidates);
    let mut seen = std::collections::HashSet::new();
    candidates
        .into_iter()
        .filter(|c| seen.insert(pool_key(c)))
        .take(cap)
        .collect()
}

/// Exact frequencies of pooled candidates. A signature-only candidate takes
/// the id of its first matching token.
pub fn exact_pass(stream: &[Element], pool: &[Candidate]) -> BTreeMap<Element, u64> {
    let mut counts: HashMap<Element, u64> = HashMap::new();
    let mut probes: Vec<&SignatureProbe> = Vec::new();
    for c in pool {
        match &c.key {
            CandidateKey::Id(x) => {
                counts.insert(*x, 0);
            }
            CandidateKey::Unresolved(p) => probes.push(p),
        }
    }
    for &x in stream {
        if !probes.is_empty() {
            probes.retain(|p| {
                if p.matches(x) {
                    counts.entry(x).or_insert(0);
                    false
                } else {
                    true
                }
            });
        }
        if let Some(c) = counts.get_mut(&x) {
            *c += 1;
        }
    }
    counts.into_iter().collect()
}

fn sorted_entries(counts: impl IntoIterator<Item = (Element, u64)>) -> Vec<(Element, u64)> {
    let mut v: Vec<_> = counts.into_iter().filter(|e| e.1 > 0).collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    v
}

fn pool_ledger(pool_len: usize, domain: u64, m: u64) -> MemoryLedger {
    MemoryLedger {
        sample_ids: pool_len as u64 * bits_for(domain),
        counters: pool_len as u64 * bits_for(m.max(1)),
        ..Default::default()
    }
}

/// Three-pass heavy-element finder over a stream on `[1, n]`.
pub fn find_heavy(stream: &[Element], n: u64, cfg: &AheConfig) -> Result<HeavyReport> {
    cfg.validate()?;
    let (f1, f0) = stats_pass(stream);
    let z = cfg.substream_count();
    let reps = cfg.repetition_count();
    let cap = cfg.pool_cap();
    let budget_bits = cfg.budget_bits(f0);
    if f1 == 0 {
        return Ok(HeavyReport {
            entries: Vec::new(),
            passes: 3,
            ledger: MemoryLedger::default(),
            p: 1.0,
            z,
            repetitions: reps,
            f0,
            f1,
            candidates_pooled: 0,
            pool_cap: cap,
            games_played: 0,
            games_skipped: 0,
            budget_bits,
            c_eff: cfg.c_eff,
            halvings: 0,
        });
    }
    let p = cfg.sampling_rate(f1, f0);
    let out = pass2(stream, n, f0, p, cfg, derive_seed(cfg.seed, SeedTag::Pass, 2))?;
    let pool = pool_candidates(out.candidates, cap);
    let counts = exact_pass(stream, &pool);
    let mut ledger = out.ledger;
    ledger.merge(&pool_ledger(pool.len(), n, f1));
    Ok(HeavyReport {
        entries: sorted_entries(counts),
        passes: 3,
        ledger,
        p,
        z,
        repetitions: reps,
        f0,
        f1,
        candidates_pooled: pool.len(),
        pool_cap: cap,
        games_played: out.games_played,
        games_skipped: out.games_skipped,
        budget_bits,
        c_eff: cfg.c_eff,
        halvings: 0,
    })
}

/// One-pass variant for a stream on `[1, n]`. Starts at `p = 1`; whenever
/// the observed length reaches `2n 2^j` it halves `p` and starts a fresh
/// epoch, keeping the winners of finished epochs. Signature-only players
/// cannot be resolved without another pass, so players adopt their ID at
/// sampling. Epochs cover disjoint parts of the stream, so an id's reported
/// frequency sums its best `counter / p` over epochs.
pub fn find_heavy_one_pass(stream: &[Element], n: u64, cfg: &AheConfig) -> Result<HeavyReport> {
    cfg.validate()?;
    let mut cfg = cfg.clone();
    cfg.game.immediate_adoption = true;
    let seed = derive_seed(cfg.seed, SeedTag::Pass, 1);
    let mut p = 1.0;
    let mut epoch = 0u64;
    let mut next_halving = 2 * n.max(1);
    let mut core = Pass2Core::new(n, n, p, &cfg, derive_seed(seed, SeedTag::Epoch, 0))?;
    // Per id: estimates of finished epochs, plus the current epoch's best.
    let mut totals: BTreeMap<Element, u64> = BTreeMap::new();
    let mut ledger = MemoryLedger::default();
    let (mut played, mut skipped) = (0, 0);
    let mut close = |core: Pass2Core, p: f64, totals: &mut BTreeMap<Element, u64>| {
        let out = core.finish();
        ledger.merge(&out.ledger);
        played += out.games_played;
        skipped += out.games_skipped;
        let mut epoch_best: BTreeMap<Element, u64> = BTreeMap::new();
        for c in &out.candidates {
            if let Some(x) = c.key.id() {
                let e = epoch_best.entry(x).or_insert(0);
                *e = (*e).max((c.counter as f64 / p).round() as u64);
            }
        }
        for (x, f) in epoch_best {
            *totals.entry(x).or_insert(0) += f;
        }
    };
    let mut seen = 0u64;
    for &x in stream {
        core.push(x);
        seen += 1;
        if seen == next_halving {
            let done = std::mem::replace(
                &mut core,
                Pass2Core::new(n, n, p / 2.0, &cfg, derive_seed(seed, SeedTag::Epoch, epoch + 1))?,
            );
            close(done, p, &mut totals);
            p /= 2.0;
            epoch += 1;
            next_halving = next_halving.saturating_mul(2);
        }
    }
    close(core, p, &mut totals);
    let mut entries = sorted_entries(totals);
    let cap = cfg.pool_cap();
    entries.truncate(cap);
    ledger.merge(&pool_ledger(entries.len(), n, seen));
    Ok(HeavyReport {
        candidates_pooled: entries.len(),
        entries,
        passes: 1,
        ledger,
        p,
        z: cfg.substream_count(),
        repetitions: cfg.repetition_count(),
        f0: 0,
        f1: seen,
        pool_cap: cap,
        games_played: played,
        games_skipped: skipped,
        budget_bits: cfg.budget_bits(n),
        c_eff: cfg.c_eff,
        halvings: epoch as u32,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_examples() {
        assert_eq!(stats_pass(&[1, 1, 2]), (3, 2));
        assert_eq!(stats_pass(&[]), (0, 0));
        let d: Vec<u64> = (1..=50).collect();
        assert_eq!(stats_pass(&d), (50, 50));
    }

    #[test]
    fn subsample_identity_at_one() {
        let s: Vec<u64> = (1..=100).collect();
        assert_eq!(subsample(&s, 1.0, 3).unwrap(), s);
        assert!(subsample(&s, 0.0, 3).is_err());
    }

    #[test]
    fn split_single() {
        let s = vec![3, 1, 4, 1, 5];
        assert_eq!(split_substreams(&s, 10, 1, 9).unwrap(), vec![s]);
    }

    #[test]
    fn derived_counts() {
        let cfg = AheConfig {
            rho: 0.5,
            delta: 0.25,
            ..Default::default()
        };
        assert_eq!(cfg.substream_count(), 400);
        assert_eq!(cfg.repetition_count(), 2);
        assert_eq!(cfg.pool_cap(), 16);
    }

    #[test]
    fn single_element_stream() {
        let s = vec![7u64; 64];
        let cfg = AheConfig {
            rho: 1.0,
            c_z: 1.0,
            ..Default::default()
        };
        let r = find_heavy(&s, 16, &cfg).unwrap();
        assert_eq!(r.entries, vec![(7, 64)]);
        assert_eq!(r.passes, 3);
    }
}
