//! Validation suites: randomized batteries over the oracles and the Monte
//! Carlo validators, each reduced to named pass/fail checks.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ahe::{find_heavy, AheConfig};
use crate::error::{invalid, Result, SketchError};
use crate::game::GameConfig;
use crate::hashkit::{derive_seed, rng_from_seed, SeedTag};
use crate::martingale::{estimate_from_frequencies, EstimateOptions, HeavyProvider, Schedule};
use crate::num::mean_se;
use crate::oracle::{
    binomial_moment_bound, classify_rows, count_winning_pairs, histogram, mc_binomial_moment,
    mc_geometric_cost, mc_noisy_lemma, mc_two_level, noisy_lemma_floor, DenseRowSpec, EventConstruction,
    GeometricCostConfig, NoisyConfig, TwoLevelInstance,
};
use crate::stream::{gen_planted, gen_zipf};
use crate::Element;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    WinningPairs,
    Noisy,
    Fixing,
    Geometric,
    TwoLevel,
    BinomialMoment,
    DenseRows,
    Martingale,
    SpaceSlope,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::WinningPairs,
        Suite::Noisy,
        Suite::Fixing,
        Suite::Geometric,
        Suite::TwoLevel,
        Suite::BinomialMoment,
        Suite::DenseRows,
        Suite::Martingale,
        Suite::SpaceSlope,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::WinningPairs => "winning-pairs",
            Suite::Noisy => "noisy",
            Suite::Fixing => "fixing",
            Suite::Geometric => "geometric",
            Suite::TwoLevel => "two-level",
            Suite::BinomialMoment => "binomial-moment",
            Suite::DenseRows => "dense-rows",
            Suite::Martingale => "martingale",
            Suite::SpaceSlope => "space-slope",
        }
    }

    /// Trial count used when none is given.
    pub fn default_trials(&self) -> u64 {
        match self {
            Suite::WinningPairs => 10_000,
            Suite::Noisy | Suite::Geometric | Suite::TwoLevel | Suite::Martingale => 10_000,
            Suite::Fixing => 2000,
            Suite::BinomialMoment => 100_000,
            Suite::DenseRows => 50,
            Suite::SpaceSlope => 3,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = SketchError;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| SketchError::InvalidParameter(format!("unknown suite {s:?}")))
    }
}

/// One comparison of a measured value against a bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound,
            passed: value <= bound,
        }
    }

    fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound,
            passed: value >= bound,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub suite: Suite,
    pub trials: u64,
    pub seed: u64,
    pub passed: bool,
    /// Set by soft suites whose failure is not fatal.
    pub warning: Option<String>,
    pub checks: Vec<Check>,
}

impl SuiteResult {
    fn from_checks(suite: Suite, trials: u64, seed: u64, checks: Vec<Check>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        Self {
            suite,
            trials,
            seed,
            passed,
            warning: None,
            checks,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Z-score multiplier for Monte Carlo checks.
pub const Z: f64 = 3.0;

pub fn run_suite(suite: Suite, trials: Option<u64>, seed: u64) -> Result<SuiteResult> {
    let trials = trials.unwrap_or_else(|| suite.default_trials());
    if trials == 0 {
        return invalid("trials must be positive");
    }
    let checks = match suite {
        Suite::WinningPairs => winning_pairs(trials, seed)?,
        Suite::Noisy => noisy(trials, seed)?,
        Suite::Fixing => fixing(trials, seed)?,
        Suite::Geometric => geometric(trials, seed)?,
        Suite::TwoLevel => two_level(trials, seed)?,
        Suite::BinomialMoment => binomial_moment(trials, seed)?,
        Suite::DenseRows => dense_rows(trials, seed)?,
        Suite::Martingale => martingale_mean(trials, seed)?,
        Suite::SpaceSlope => {
            let slope = space_slope(4, trials, seed)?;
            let mut r = SuiteResult::from_checks(suite, trials, seed, vec![slope.check()]);
            if !r.passed {
                r.warning = Some(format!(
                    "ledger slope {:.3} above {:.3}",
                    slope.slope, slope.limit
                ));
                r.passed = true;
            }
            return Ok(r);
        }
    };
    Ok(SuiteResult::from_checks(suite, trials, seed, checks))
}

fn winning_pairs(trials: u64, seed: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for (u, w, want) in [
        (vec![1], vec![0], 1),
        (vec![3, 1], vec![1, 1], 2),
        (vec![2, 2], vec![3, 0], 2),
    ] {
        let got = count_winning_pairs(&u, &w)?;
        checks.push(Check {
            name: format!("fixture U={u:?} W={w:?}"),
            value: got as f64,
            bound: want as f64,
            passed: got == want,
        });
    }
    let mut rng = rng_from_seed(derive_seed(seed, SeedTag::Trial, 0));
    let mut violations = 0u64;
    let mut tested = 0u64;
    while tested < trials {
        let len = rng.random_range(1..=8);
        let u: Vec<u64> = (0..len).map(|_| rng.random_range(0..=8)).collect();
        let w: Vec<u64> = (0..len).map(|_| rng.random_range(0..=8)).collect();
        let net: i64 = u.iter().zip(&w).map(|(&a, &b)| a as i64 - b as i64).sum();
        if net <= 0 {
            continue;
        }
        tested += 1;
        if (count_winning_pairs(&u, &w)? as i64) < net {
            violations += 1;
        }
    }
    checks.push(Check::at_most(
        "violations of winning >= sum(u - w)",
        violations as f64,
        0.0,
    ));
    Ok(checks)
}

fn noisy(trials: u64, seed: u64) -> Result<Vec<Check>> {
    let mut cfgs = Vec::new();
    for construction in [EventConstruction::Independent, EventConstruction::Disjoint] {
        for a in [0.02, 0.05, 0.5] {
            for b in [0.0, 0.05, 0.09] {
                cfgs.push(NoisyConfig {
                    a,
                    b,
                    events: 10,
                    noise_per_event: 5,
                    construction,
                });
            }
        }
    }
    cfgs.push(NoisyConfig {
        a: 0.05,
        b: 0.0,
        events: 1,
        noise_per_event: 1,
        construction: EventConstruction::Independent,
    });
    cfgs.into_par_iter()
        .enumerate()
        .map(|(i, cfg)| {
            let est = mc_noisy_lemma(&cfg, trials, derive_seed(seed, SeedTag::Trial, i as u64))?;
            let floor = noisy_lemma_floor(cfg.a);
            Ok(Check::at_least(
                format!("{:?} a={} b={} N={}", cfg.construction, cfg.a, cfg.b, cfg.events),
                est.estimate + Z * est.se,
                floor,
            ))
        })
        .collect()
}

/// The 20 frequency vectors of the fixing battery.
pub fn fixing_vectors() -> Result<Vec<BTreeMap<Element, u64>>> {
    (0..20u64)
        .map(|i| {
            let s = 0.8 + 0.07 * i as f64;
            Ok(histogram(&gen_zipf(1 << 10, 1 << 12, s, 1000 + i)?.tokens))
        })
        .collect()
}

/// Outcome of one fixing-battery run.
#[derive(Debug, Clone, PartialEq)]
pub struct FixingRun {
    pub failed: bool,
    pub telescopes: bool,
    /// Per level: whether `|Z_{i+1} + b_{i+1} - b_i| >= epsilon_i b_i` on a
    /// non-empty level.
    pub level_misses: Vec<bool>,
}

/// Oracle-mode run with `u = 0.5`, `t = 8`, `epsilon = 0.2`, `k = 3`.
pub fn fixing_run(freqs: &BTreeMap<Element, u64>, seed: u64) -> Result<FixingRun> {
    let eps = 0.2;
    let opts = EstimateOptions {
        k: 3,
        schedule: Schedule::with_u(eps, 0.5)?,
        t: Some(8),
        dt_cap: 64,
        provider: HeavyProvider::Oracle,
        seed,
    };
    let r = estimate_from_frequencies(freqs, 1 << 10, &opts)?;
    let b0 = r.levels[0].b.expect("oracle level");
    let steps = r.martingale_steps().expect("oracle levels");
    let telescopes = r.estimate - b0 == steps.iter().sum::<i128>();
    let level_misses = steps
        .iter()
        .zip(&r.levels)
        .map(|(&s, l)| {
            let b = l.b.expect("oracle level");
            b > 0 && (s.abs() as f64) >= l.epsilon * b as f64
        })
        .collect();
    Ok(FixingRun {
        failed: ((r.estimate - b0).abs() as f64) >= eps * b0 as f64,
        telescopes,
        level_misses,
    })
}

fn fixing(trials: u64, seed: u64) -> Result<Vec<Check>> {
    let vectors = fixing_vectors()?;
    let runs = (0..trials)
        .into_par_iter()
        .map(|r| fixing_run(&vectors[(r % 20) as usize], derive_seed(seed, SeedTag::Trial, r)))
        .collect::<Result<Vec<_>>>()?;
    let failures = runs.iter().filter(|r| r.failed).count() as f64 / trials as f64;
    let broken = runs.iter().filter(|r| !r.telescopes).count();
    let mut checks = vec![
        Check::at_most("failure rate of |S - b_0| >= eps b_0", failures, 0.2),
        Check::at_most("runs breaking the telescoping identity", broken as f64, 0.0),
    ];
    let sched = Schedule::with_u(0.2, 0.5)?;
    for i in 0..8 {
        let hits = runs.iter().filter(|r| r.level_misses[i]).count() as u64;
        let (p, se) = crate::num::proportion(hits, trials);
        let u = sched.u;
        checks.push(Check::at_most(
            format!("level {i} fixing miss rate"),
            p - Z * se,
            0.1 * (1.0 - u) * u.powi(i as i32),
        ));
    }
    Ok(checks)
}

fn geometric(trials: u64, seed: u64) -> Result<Vec<Check>> {
    let cfg = GeometricCostConfig {
        universe: 1 << 12,
        q: 0.6,
        gamma: 5.0 / 7.0,
        levels: 12,
    };
    let est = mc_geometric_cost(&cfg, trials, seed)?;
    Ok(vec![Check::at_most(
        "P(sum c_i >= c_0 / (1 - theta))",
        est.estimate - Z * est.se,
        0.1,
    )])
}

/// Desk instance of the two-level lemma: `K = T = 10^4`, `lambda = 2^-14`.
pub fn two_level_instance() -> TwoLevelInstance {
    TwoLevelInstance {
        stream_len: 10_000,
        t: 10_000.0,
        lambda: 2f64.powi(-14),
        n: 1 << 20,
    }
}

fn two_level(trials: u64, seed: u64) -> Result<Vec<Check>> {
    let inst = two_level_instance();
    let est = mc_two_level(&inst, trials, seed)?;
    Ok(vec![Check::at_most(
        "P(sample misses | heavy in pool)",
        est.estimate - Z * est.se,
        inst.bound(),
    )])
}

fn binomial_moment(trials: u64, seed: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for k in [2, 3, 4] {
        for (n, p) in [(100, 0.1), (10, 0.05)] {
            let est = mc_binomial_moment(
                n,
                p,
                k,
                trials,
                derive_seed(seed, SeedTag::Trial, k as u64 * 1000 + n),
            )?;
            checks.push(Check::at_most(
                format!("E(X^{k}) for Binomial({n}, {p})"),
                est.estimate - Z * est.se,
                binomial_moment_bound(n, p, k)?,
            ));
        }
    }
    Ok(checks)
}

fn dense_rows(trials: u64, seed: u64) -> Result<Vec<Check>> {
    let mut violations = 0;
    let mut dense_total = 0;
    for i in 0..trials {
        let s = derive_seed(seed, SeedTag::Trial, i);
        let mut rng = rng_from_seed(s);
        let n = 1 << rng.random_range(8..=11);
        let stream = gen_zipf(n, 4 * n, rng.random_range(0.5..1.5), s)?.tokens;
        let h = histogram(&stream);
        let heavy = h
            .iter()
            .max_by_key(|e| (*e.1, std::cmp::Reverse(*e.0)))
            .map(|e| *e.0)
            .unwrap_or(1);
        let spec = DenseRowSpec {
            n,
            k: [2, 3, 4][rng.random_range(0..3)],
            alpha: rng.random_range(-2..=1),
            heavy,
            lambda: rng.random_range(0.5..8.0),
            phi: rng.random_range(0.001..0.2),
            tau: rng.random_range(1..=3),
        };
        let c = classify_rows(&stream, &spec)?;
        dense_total += c.dense_rows;
        if c.dense_rows as f64 > c.dense_bound {
            violations += 1;
        }
    }
    Ok(vec![
        Check::at_most("dense rows above the bound", violations as f64, 0.0),
        Check::at_least(
            "dense rows observed (battery is not vacuous)",
            dense_total as f64,
            1.0,
        ),
    ])
}

/// The fixed 64-entry vector of the martingale check.
pub fn martingale_vector() -> BTreeMap<Element, u64> {
    (1..=64u64).map(|j| (j, (j * 37) % 23 + 1)).collect()
}

/// Per-level mean of `Z_{i+1} + b_{i+1} - b_i` with `alpha = 0.02`, so each
/// `S_i` covers only part of the support.
pub fn martingale_means(trials: u64, seed: u64) -> Result<Vec<(f64, f64)>> {
    let v = martingale_vector();
    let mut opts = EstimateOptions {
        k: 3,
        schedule: Schedule::with_u(0.2, 0.5)?,
        t: Some(6),
        dt_cap: 64,
        provider: HeavyProvider::Oracle,
        seed: 0,
    };
    opts.schedule.alpha_override = Some(0.02);
    let steps = (0..trials)
        .into_par_iter()
        .map(|r| {
            let o = EstimateOptions {
                seed: derive_seed(seed, SeedTag::Trial, r),
                ..opts.clone()
            };
            Ok(estimate_from_frequencies(&v, 64, &o)?
                .martingale_steps()
                .expect("oracle levels"))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((0..6)
        .map(|i| {
            let xs: Vec<f64> = steps.iter().map(|s| s[i] as f64).collect();
            mean_se(&xs)
        })
        .collect())
}

fn martingale_mean(trials: u64, seed: u64) -> Result<Vec<Check>> {
    Ok(martingale_means(trials, seed)?
        .into_iter()
        .enumerate()
        .map(|(i, (m, se))| {
            Check::at_most(
                format!("level {i} |mean step| / se"),
                m.abs() / se.max(f64::MIN_POSITIVE),
                Z,
            )
        })
        .collect())
}

/// Practical settings for planted recovery and the space diagnostic.
pub fn practical_ahe(seed: u64) -> AheConfig {
    AheConfig {
        rho: 0.5,
        delta: 0.25,
        k: 4,
        seed,
        c_z: 1.0,
        repetitions: Some(2),
        game: GameConfig {
            signatures: false,
            psi_eff: 0,
            w_multiplier: 8.0,
            range: Some(2),
            ..GameConfig::default()
        },
        ..AheConfig::default()
    }
}

/// Least-squares slope of `log2(ledger bits)` against `log2 n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeReport {
    pub k: u32,
    pub points: Vec<(u64, f64)>,
    pub slope: f64,
    pub limit: f64,
}

impl SlopeReport {
    pub fn check(&self) -> Check {
        Check::at_most("log2(bits) vs log2(n) slope", self.slope, self.limit)
    }
}

pub fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Ledger totals of `find_heavy` on planted streams, `n = 2^10 .. 2^16`,
/// averaged over `seeds` seeds.
pub fn space_slope(k: u32, seeds: u64, seed: u64) -> Result<SlopeReport> {
    let ns = [1u64 << 10, 1 << 12, 1 << 14, 1 << 16];
    let points = ns
        .par_iter()
        .map(|&n| {
            let mut total = 0.0;
            for s in 0..seeds {
                let ss = derive_seed(seed, SeedTag::Trial, n * 1000 + s);
                let p = gen_planted(n, k, 4.0, ss)?;
                let cfg = AheConfig {
                    k,
                    ..practical_ahe(ss)
                };
                total += find_heavy(&p.stream.tokens, n, &cfg)?.ledger.total() as f64;
            }
            Ok((n, (total / seeds as f64).log2()))
        })
        .collect::<Result<Vec<_>>>()?;
    let xy: Vec<(f64, f64)> = points.iter().map(|&(n, b)| ((n as f64).log2(), b)).collect();
    Ok(SlopeReport {
        k,
        slope: least_squares_slope(&xy),
        limit: 1.0 - 2.0 / k as f64 + 0.2,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn slope_of_a_line() {
        let pts = [(1.0, 3.0), (2.0, 5.0), (3.0, 7.0)];
        assert!((least_squares_slope(&pts) - 2.0).abs() < 1e-12);
    }
}
