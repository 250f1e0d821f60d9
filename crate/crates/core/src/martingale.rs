//! `F_k` estimation by level sampling. Level `i` keeps the elements that
//! survive rows `1..=i` of a domain-sampling matrix and scales their
//! `f^k` by `2^i`. The level sums `b_i` form a martingale; the heavy
//! corrections `Z_i` keep `S = b_t + sum Z_i` close to `b_0 = F_k`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ahe::{find_heavy, find_heavy_one_pass, AheConfig, HeavyReport};
use crate::error::{invalid, Result, SketchError};
use crate::hashkit::{derive_seed, BernoulliHash, SeedTag};
use crate::num::{bits_for, ceil_log2};
use crate::oracle::histogram;
use crate::Element;

/// `t` independent rows of pairwise independent fair bits over `[1, n]`.
#[derive(Debug, Clone)]
pub struct DomainSamplingMatrix {
    n: u64,
    rows: Vec<BernoulliHash>,
}

impl DomainSamplingMatrix {
    pub fn new(seed: u64, n: u64, t: u32) -> Result<Self> {
        let rows = (0..t as u64)
            .map(|l| BernoulliHash::new(derive_seed(seed, SeedTag::Matrix, l), n, 0.5))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n, rows })
    }

    pub fn t(&self) -> u32 {
        self.rows.len() as u32
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Entry `h_{l,x}` for `1 <= l <= t`.
    pub fn h(&self, l: u32, x: Element) -> bool {
        self.rows[l as usize - 1].eval(x)
    }

    /// Whether `x` survives rows `1..=i`.
    pub fn level_membership(&self, i: u32, x: Element) -> Result<bool> {
        if i > self.t() {
            return invalid(format!("level {i} above t = {}", self.t()));
        }
        Ok((1..=i).all(|l| self.h(l, x)))
    }

    /// Deepest level containing `x`.
    pub fn level_of(&self, x: Element) -> u32 {
        (1..=self.t()).take_while(|&l| self.h(l, x)).count() as u32
    }
}

/// `f^k` as an exact integer.
pub fn kth_power(f: u64, k: u32) -> Result<i128> {
    (f as i128).checked_pow(k).ok_or(SketchError::Overflow("f^k"))
}

/// `v_{i,j} = 2^i f_j^k` for the frequencies of `D_i`.
pub fn level_values(freqs: &BTreeMap<Element, u64>, i: u32, k: u32) -> Result<BTreeMap<Element, i128>> {
    freqs
        .iter()
        .map(|(&x, &f)| {
            let v = kth_power(f, k)?
                .checked_mul(1i128 << i)
                .ok_or(SketchError::Overflow("level value"))?;
            Ok((x, v))
        })
        .collect()
}

/// `v_{i,j} = 2^i (prod_{l<=i} h_{l,j}) beta_j` from scratch.
pub fn level_values_direct(
    h: &DomainSamplingMatrix,
    beta: &BTreeMap<Element, i128>,
    i: u32,
) -> Result<BTreeMap<Element, i128>> {
    let mut out = BTreeMap::new();
    for (&x, &b) in beta {
        let v = if h.level_membership(i, x)? { b << i } else { 0 };
        out.insert(x, v);
    }
    Ok(out)
}

/// `Z_{i+1} = sum_{j in S_i} (1 - 2 h_{i+1,j}) v_{i,j}`.
pub fn compute_z<'a>(
    s: impl IntoIterator<Item = (&'a Element, &'a i128)>,
    h: &DomainSamplingMatrix,
    i: u32,
) -> i128 {
    s.into_iter()
        .map(|(&x, &v)| if h.h(i + 1, x) { -v } else { v })
        .sum()
}

/// Accuracy schedule of the levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub epsilon: f64,
    pub q: f64,
    pub u: f64,
    pub alpha_floor: f64,
    /// Replaces every `alpha_i` when set.
    pub alpha_override: Option<f64>,
}

/// `u = (1 / 2q)^((1 - 2/k) / 3C)`.
pub fn schedule_u(k: u32, c_eff: f64, q: f64) -> f64 {
    (1.0 / (2.0 * q)).powf((1.0 - 2.0 / k as f64) / (3.0 * c_eff))
}

pub fn build_schedule(epsilon: f64, k: u32, c_eff: f64, q: f64) -> Result<Schedule> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return invalid("epsilon must lie in (0, 1)");
    }
    if k <= 2 {
        return invalid("the schedule needs k > 2; set u explicitly for smaller k");
    }
    if !(q > 0.5 && q < 1.0) || !(c_eff > 0.0) {
        return invalid("schedule needs q in (0.5, 1) and C > 0");
    }
    Ok(Schedule {
        epsilon,
        q,
        u: schedule_u(k, c_eff, q),
        alpha_floor: 1e-9,
        alpha_override: None,
    })
}

impl Schedule {
    /// A schedule with a fixed `u`.
    pub fn with_u(epsilon: f64, u: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) || !(u > 0.0 && u < 1.0) {
            return invalid("schedule needs epsilon and u in (0, 1)");
        }
        Ok(Self {
            epsilon,
            q: 0.6,
            u,
            alpha_floor: 1e-9,
            alpha_override: None,
        })
    }

    /// `0.1 (1-u) u^i epsilon`.
    pub fn epsilon_i(&self, i: u32) -> f64 {
        0.1 * (1.0 - self.u) * self.u.powi(i as i32) * self.epsilon
    }

    /// `0.1 epsilon_i^2 u^i (1-u)`, floored.
    pub fn alpha_i(&self, i: u32) -> f64 {
        if let Some(a) = self.alpha_override {
            return a;
        }
        let e = self.epsilon_i(i);
        (0.1 * e * e * self.u.powi(i as i32) * (1.0 - self.u)).max(self.alpha_floor)
    }

    /// `1 / (10 2^i)`.
    pub fn delta_i(&self, i: u32) -> f64 {
        1.0 / (10.0 * 2f64.powi(i as i32))
    }
}

/// Where the heavy sets `S_i` come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeavyProvider {
    /// Exact heavy elements of each level.
    Oracle,
    /// The heavy-element finder at `rho = max(alpha_i, rho_floor)`. With
    /// `one_pass` the single-pass finder supplies approximate frequencies.
    Ahe {
        config: AheConfig,
        rho_floor: f64,
        #[serde(default)]
        one_pass: bool,
    },
}

/// Estimator settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateOptions {
    pub k: u32,
    pub schedule: Schedule,
    /// Level count; `None` means `ceil(log2 n)`.
    pub t: Option<u32>,
    /// Most distinct elements allowed in `D_t`.
    pub dt_cap: usize,
    pub provider: HeavyProvider,
    pub seed: u64,
}

impl EstimateOptions {
    /// Oracle provider with the default schedule.
    pub fn oracle(k: u32, epsilon: f64, seed: u64) -> Result<Self> {
        Ok(Self {
            k,
            schedule: build_schedule(epsilon, k, 10.0, 0.6)?,
            t: None,
            dt_cap: 64,
            provider: HeavyProvider::Oracle,
            seed,
        })
    }

    pub fn levels_for(&self, n: u64) -> u32 {
        self.t.unwrap_or_else(|| ceil_log2(n.max(2)))
    }
}

/// Per-level record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelReport {
    pub level: u32,
    /// `F_0(D_i)`.
    pub f0: u64,
    /// `b_i = |V_i|` (oracle provider only).
    pub b: Option<i128>,
    pub s_size: usize,
    /// `Z_{i+1}`; absent at the last level.
    pub z_next: Option<i128>,
    pub epsilon: f64,
    pub alpha: f64,
    pub delta: f64,
    pub cost_bits: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    /// `S = b_t + sum_i Z_i`.
    pub estimate: i128,
    pub b_t: i128,
    pub t: u32,
    pub u: f64,
    pub levels: Vec<LevelReport>,
    pub heavy_reports: Vec<HeavyReport>,
}

impl EstimateReport {
    pub fn sum_z(&self) -> i128 {
        self.levels.iter().filter_map(|l| l.z_next).sum()
    }

    /// `Z_{i+1} + b_{i+1} - b_i` for `i < t` (oracle provider only).
    pub fn martingale_steps(&self) -> Option<Vec<i128>> {
        self.levels
            .windows(2)
            .map(|w| Some(w[0].z_next? + w[1].b? - w[0].b?))
            .collect()
    }
}

fn check_dt(f0: u64, t: u32, cap: usize) -> Result<()> {
    if t > 0 && f0 > cap as u64 {
        return Err(SketchError::LevelCapExceeded {
            level: t as usize,
            distinct: f0 as usize,
            cap,
        });
    }
    Ok(())
}

/// Estimates `F_k` of a frequency vector over `[1, n]` with the oracle
/// provider. All sums are exact integers.
pub fn estimate_from_frequencies(
    freqs: &BTreeMap<Element, u64>,
    n: u64,
    opts: &EstimateOptions,
) -> Result<EstimateReport> {
    if opts.provider != HeavyProvider::Oracle {
        return invalid("frequency-vector estimation needs the oracle provider");
    }
    let t = opts.levels_for(n);
    let h = DomainSamplingMatrix::new(derive_seed(opts.seed, SeedTag::Matrix, 0), n, t)?;
    let mut values: Vec<(Element, i128)> = level_values(freqs, 0, opts.k)?
        .into_iter()
        .filter(|e| e.1 > 0)
        .collect();
    let id_bits = bits_for(n);
    let mut levels = Vec::with_capacity(t as usize + 1);
    for i in 0..=t {
        let b: i128 = values.iter().map(|e| e.1).sum();
        let alpha = opts.schedule.alpha_i(i);
        let mut s_size = 0;
        let mut z_next = None;
        let mut cost_bits = 0;
        if i < t {
            let bar = alpha * b as f64;
            let s: Vec<&(Element, i128)> = values.iter().filter(|e| e.1 as f64 >= bar).collect();
            s_size = s.len();
            let vmax = s.iter().map(|e| e.1).max().unwrap_or(0);
            cost_bits = s_size as u64 * (id_bits + 128 - vmax.leading_zeros() as u64);
            z_next = Some(compute_z(s.into_iter().map(|e| (&e.0, &e.1)), &h, i));
        }
        levels.push(LevelReport {
            level: i,
            f0: values.len() as u64,
            b: Some(b),
            s_size,
            z_next,
            epsilon: opts.schedule.epsilon_i(i),
            alpha,
            delta: opts.schedule.delta_i(i),
            cost_bits,
        });
        if i < t {
            values.retain(|e| h.h(i + 1, e.0));
            for e in &mut values {
                e.1 <<= 1;
            }
        }
    }
    let last = levels.last().expect("level 0 always present");
    check_dt(last.f0, t, opts.dt_cap)?;
    let b_t = last.b.expect("oracle levels carry b");
    let mut report = EstimateReport {
        estimate: 0,
        b_t,
        t,
        u: opts.schedule.u,
        levels,
        heavy_reports: Vec::new(),
    };
    report.estimate = b_t + report.sum_z();
    Ok(report)
}

/// Estimates `F_k` of a stream over `[1, n]`.
pub fn estimate_fk(stream: &[Element], n: u64, opts: &EstimateOptions) -> Result<EstimateReport> {
    if stream.iter().any(|&x| x == 0 || x > n) {
        return invalid(format!("stream tokens must lie in [1, {n}]"));
    }
    let (config, rho_floor, one_pass) = match &opts.provider {
        HeavyProvider::Oracle => return estimate_from_frequencies(&histogram(stream), n, opts),
        HeavyProvider::Ahe {
            config,
            rho_floor,
            one_pass,
        } => (config, *rho_floor, *one_pass),
    };
    let t = opts.levels_for(n);
    let h = DomainSamplingMatrix::new(derive_seed(opts.seed, SeedTag::Matrix, 0), n, t)?;
    let mut level_of: BTreeMap<Element, u32> = BTreeMap::new();
    let tagged: Vec<(Element, u32)> = stream
        .iter()
        .map(|&x| (x, *level_of.entry(x).or_insert_with(|| h.level_of(x))))
        .collect();
    let mut levels = Vec::with_capacity(t as usize + 1);
    let mut heavy_reports = Vec::new();
    let mut b_t = 0;
    for i in 0..=t {
        let d_i: Vec<Element> = tagged.iter().filter(|e| e.1 >= i).map(|e| e.0).collect();
        let f0 = level_of.values().filter(|&&l| l >= i).count() as u64;
        let alpha = opts.schedule.alpha_i(i);
        let delta = opts.schedule.delta_i(i);
        if i == t {
            check_dt(f0, t, opts.dt_cap)?;
            b_t = level_values(&histogram(&d_i), i, opts.k)?.values().sum();
            levels.push(LevelReport {
                level: i,
                f0,
                b: None,
                s_size: 0,
                z_next: None,
                epsilon: opts.schedule.epsilon_i(i),
                alpha,
                delta,
                cost_bits: 0,
            });
            break;
        }
        let cfg = AheConfig {
            rho: alpha.max(rho_floor).min(1.0),
            delta,
            k: opts.k,
            seed: derive_seed(opts.seed, SeedTag::Level, i as u64),
            ..config.clone()
        };
        let rep = if one_pass {
            find_heavy_one_pass(&d_i, n, &cfg)?
        } else {
            find_heavy(&d_i, n, &cfg)?
        };
        let s: BTreeMap<Element, u64> = rep.entries.iter().copied().collect();
        let vals = level_values(&s, i, opts.k)?;
        levels.push(LevelReport {
            level: i,
            f0,
            b: None,
            s_size: vals.len(),
            z_next: Some(compute_z(&vals, &h, i)),
            epsilon: opts.schedule.epsilon_i(i),
            alpha,
            delta,
            cost_bits: rep.ledger.total(),
        });
        heavy_reports.push(rep);
    }
    let mut report = EstimateReport {
        estimate: 0,
        b_t,
        t,
        u: opts.schedule.u,
        levels,
        heavy_reports,
    };
    report.estimate = b_t + report.sum_z();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::exact_moments;

    #[test]
    fn schedule_fixtures() {
        let s = build_schedule(0.1, 7, 10.0, 0.6).unwrap();
        assert!((s.u - 0.995668).abs() < 5e-7);
        let s = Schedule::with_u(0.1, 0.5).unwrap();
        assert!((s.epsilon_i(0) - 0.005).abs() < 1e-15);
        assert_eq!(s.delta_i(3), 1.0 / 80.0);
        assert!(build_schedule(0.1, 2, 10.0, 0.6).is_err());
    }

    #[test]
    fn z_examples() {
        let h = DomainSamplingMatrix::new(3, 100, 4).unwrap();
        let empty: BTreeMap<Element, i128> = BTreeMap::new();
        assert_eq!(compute_z(&empty, &h, 0), 0);
        let one = (1..=100).find(|&x| h.h(1, x)).unwrap();
        let zero = (1..=100).find(|&x| !h.h(1, x)).unwrap();
        assert_eq!(compute_z(&BTreeMap::from([(one, 9)]), &h, 0), -9);
        assert_eq!(compute_z(&BTreeMap::from([(zero, 9)]), &h, 0), 9);
    }

    #[test]
    fn value_examples() {
        let f = BTreeMap::from([(4u64, 3u64)]);
        assert_eq!(level_values(&f, 0, 2).unwrap()[&4], 9);
        let beta = BTreeMap::from([(1u64, 5i128)]);
        let h = DomainSamplingMatrix::new(1, 1 << 10, 3).unwrap();
        let x = (1..=1024).find(|&x| h.level_of(x) == 3).unwrap();
        let beta_x = BTreeMap::from([(x, 5i128)]);
        assert_eq!(level_values_direct(&h, &beta_x, 3).unwrap()[&x], 40);
        assert_eq!(level_values_direct(&h, &beta, 0).unwrap()[&1], 5);
    }

    #[test]
    fn t_zero_is_exact() {
        let s = vec![1, 1, 2, 3, 3, 3];
        let mut o = EstimateOptions::oracle(3, 0.2, 1).unwrap();
        o.t = Some(0);
        let r = estimate_fk(&s, 8, &o).unwrap();
        assert_eq!(r.estimate as u128, exact_moments(&s, 3).unwrap().fk);
    }

    #[test]
    fn full_coverage_is_exact() {
        let s: Vec<u64> = (0..500).map(|i| (i * i) % 97 + 1).collect();
        let mut o = EstimateOptions::oracle(3, 0.2, 4).unwrap();
        o.schedule.alpha_override = Some(0.0);
        let r = estimate_fk(&s, 128, &o).unwrap();
        assert_eq!(r.estimate as u128, exact_moments(&s, 3).unwrap().fk);
    }
}
