use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::hashkit::MAX_SIGNATURE_WIDTH;
use crate::num::{bits_for, ceil_formula, ceil_log2, floor_formula, pow2_threshold, pow_sat};
use crate::signature::PhaseBoundaries;

/// One `(eta, alpha, beta)` cell of the game grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GameCell {
    pub eta: u32,
    pub alpha: i32,
    pub beta: u32,
}

impl GameCell {
    pub fn new(eta: u32, alpha: i32, beta: u32) -> Self {
        Self { eta, alpha, beta }
    }
}

/// Tunable constants shared by every game of a sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    /// `mu` in the team-width exponent.
    pub mu: f64,
    /// Stand-in for `Psi` in the pool-slot width `2^(beta - Psi)`.
    pub psi_eff: u32,
    /// Signature growth per round.
    pub varrho: u32,
    /// Multiplier on the team width formula.
    pub w_multiplier: f64,
    /// Players per elimination group is `group_base^gamma`.
    pub group_base: u64,
    /// Round `gamma` fires at team age `row_base^gamma`.
    pub row_base: u64,
    /// Discard a row's increment above `2^(4 gamma)`.
    pub clamp: bool,
    /// Grid extent; `None` means `ceil(log2 log2 n) + 1`.
    pub range: Option<u32>,
    /// Track players by signatures while in phase 1.
    pub signatures: bool,
    /// With signatures on, resolve the ID at sampling time.
    pub immediate_adoption: bool,
    /// Signature width `s`; `None` means `2 ceil(log2 n)` capped at 64.
    pub signature_width: Option<u32>,
    /// Reservoir cap is `cap_multiplier * 2^beta`.
    pub cap_multiplier: u64,
    /// Record match events for diagnostics.
    pub trace: bool,
}

impl Default for GameConfig {
    fn default() -> Self {
        Self {
            mu: 1.0 / 1024.0,
            psi_eff: 8,
            varrho: 8,
            w_multiplier: 1.0,
            group_base: 3,
            row_base: 2,
            clamp: true,
            range: None,
            signatures: true,
            immediate_adoption: false,
            signature_width: None,
            cap_multiplier: 100,
            trace: false,
        }
    }
}

impl GameConfig {
    /// Grows signatures by 101 bits per round, so they reach full width
    /// almost at once.
    pub fn full_signatures(mut self) -> Self {
        self.varrho = 101;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu >= 0.0) {
            return invalid("mu must be non-negative");
        }
        if !(self.w_multiplier > 0.0) {
            return invalid("w multiplier must be positive");
        }
        if self.group_base < 2 || self.row_base < 2 {
            return invalid("group and row bases must be at least 2");
        }
        if self.cap_multiplier == 0 {
            return invalid("cap multiplier must be positive");
        }
        if self.varrho == 0 {
            return invalid("signature growth must be positive");
        }
        if self.psi_eff > 40 {
            return invalid("psi_eff above 40 overflows the slot hash range");
        }
        if let Some(s) = self.signature_width {
            if s == 0 || s > MAX_SIGNATURE_WIDTH {
                return invalid("signature width outside 1..=64");
            }
        }
        Ok(())
    }

    pub fn range_for(&self, n: u64) -> u32 {
        self.range.unwrap_or_else(|| default_range(n))
    }
}

/// `ceil(log2 log2 n) + 1`.
pub fn default_range(n: u64) -> u32 {
    ceil_log2(ceil_log2(n.max(4)) as u64) + 1
}

/// Row width `t_alpha = ceil(2^-alpha n^(1 - 1/k))`.
pub fn row_width(n: u64, k: u32, alpha: i32) -> u64 {
    let x = 2f64.powi(-alpha) * (n as f64).powf(1.0 - 1.0 / k as f64);
    ceil_formula(x).max(1)
}

/// Team width `w = ceil(mult 2^(-mu beta) n^(1 - 2/k))`.
pub fn team_width(n: u64, k: u32, beta: u32, mu: f64, mult: f64) -> u64 {
    let x = mult * 2f64.powf(-mu * beta as f64) * (n as f64).powf(1.0 - 2.0 / k as f64);
    ceil_formula(x).max(1)
}

/// Cells of the game grid, in loop order, with `beta >= 1` and duplicates
/// removed.
///
/// For each `eta` in `0..=range`: branch (a) has `alpha = -eta/2` truncated
/// toward zero and `beta` in `ceil(1.5 eta)..=20 eta`; branch (b) has, for
/// each `u` in `20 eta + 1..=range`, `alpha = floor(u/5)` and `beta` in
/// `ceil(0.8 u - 0.5 eta - 2)..=u`.
pub fn grid_cells(range: u32) -> Vec<GameCell> {
    let mut out: Vec<GameCell> = Vec::new();
    let mut push = |c: GameCell| {
        if !out.contains(&c) {
            out.push(c);
        }
    };
    for eta in 0..=range {
        let alpha_a = -((eta / 2) as i32);
        let lo = ceil_formula(1.5 * eta as f64);
        for b in lo..=(20 * eta as u64) {
            push(GameCell::new(eta, alpha_a, (b as u32).max(1)));
        }
        for u in (20 * eta + 1)..=range {
            let alpha_b = floor_formula(u as f64 / 5.0) as i32;
            let lo = -floor_formula(-(0.8 * u as f64 - 0.5 * eta as f64 - 2.0));
            for b in lo..=(u as i64) {
                push(GameCell::new(eta, alpha_b, b.max(1) as u32));
            }
        }
    }
    out
}

/// Fully resolved parameters of one game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameParams {
    /// Universe size used by the formulas.
    pub n: u64,
    /// Largest element id; hashes are defined over `[1, domain]`.
    pub domain: u64,
    pub k: u32,
    pub m_hint: u64,
    pub cell: GameCell,
    pub mu: f64,
    pub psi_eff: u32,
    pub varrho: u32,
    pub t_alpha: u64,
    pub w: u64,
    pub group_base: u64,
    pub row_base: u64,
    pub clamp: bool,
    pub signatures: bool,
    pub immediate_adoption: bool,
    pub signature_width: u32,
    pub reservoir_cap: u64,
    pub max_round: u32,
    /// Width of one pool slot in hash units.
    pub slot_width: u64,
    /// Range of the per-row slot hash.
    pub hash_range: u64,
    pub phases: PhaseBoundaries,
    pub trace: bool,
}

impl GameParams {
    pub fn new(n: u64, domain: u64, k: u32, m_hint: u64, cell: GameCell, cfg: &GameConfig) -> Result<Self> {
        cfg.validate()?;
        if n < 4 {
            return invalid("formula universe must be at least 4");
        }
        if k < 2 {
            return invalid("games need k >= 2");
        }
        if cell.beta == 0 {
            return invalid("beta must be at least 1");
        }
        let t_alpha = row_width(n, k, cell.alpha);
        let w = team_width(n, k, cell.beta, cfg.mu, cfg.w_multiplier);
        let mut max_round = 0u32;
        while pow_sat(cfg.group_base, max_round) < w {
            max_round += 1;
        }
        let max_round = max_round.max(cell.beta);
        let up = cfg.psi_eff.saturating_sub(cell.beta);
        let down = cell.beta.saturating_sub(cfg.psi_eff);
        let hash_range = t_alpha
            .checked_shl(up)
            .filter(|r| r >> up == t_alpha)
            .ok_or(crate::error::SketchError::Overflow("slot hash range"))?;
        let slot_width = pow2_threshold(down as i64);
        let signature_width = cfg
            .signature_width
            .unwrap_or_else(|| (2 * ceil_log2(n)).clamp(1, MAX_SIGNATURE_WIDTH));
        let reservoir_cap = cfg
            .cap_multiplier
            .saturating_mul(pow2_threshold(cell.beta as i64));
        Ok(Self {
            n,
            domain,
            k,
            m_hint,
            cell,
            mu: cfg.mu,
            psi_eff: cfg.psi_eff,
            varrho: cfg.varrho,
            t_alpha,
            w,
            group_base: cfg.group_base,
            row_base: cfg.row_base,
            clamp: cfg.clamp,
            signatures: cfg.signatures,
            immediate_adoption: cfg.immediate_adoption,
            signature_width,
            reservoir_cap,
            max_round,
            slot_width,
            hash_range,
            phases: PhaseBoundaries::for_n(n),
            trace: cfg.trace,
        })
    }

    /// `TR(gamma) = 2^(gamma - alpha + eta - 1)` as an integer threshold.
    pub fn tr(&self, gamma: u32) -> u64 {
        pow2_threshold(gamma as i64 - self.cell.alpha as i64 + self.cell.eta as i64 - 1)
    }

    /// `IC = max(1, 2^(beta - 7))`.
    pub fn ic(&self) -> u64 {
        pow2_threshold(self.cell.beta as i64 - 7)
    }

    /// `xi(gamma) = 3^-gamma 2^(-beta - mu gamma)`.
    pub fn xi(&self, gamma: u32) -> f64 {
        3f64.powi(-(gamma as i32)) * 2f64.powf(-(self.cell.beta as f64) - self.mu * gamma as f64)
    }

    /// Team age at which round `gamma` fires.
    pub fn round_age(&self, gamma: u32) -> u64 {
        pow_sat(self.row_base, gamma)
    }

    /// Players per elimination group in round `gamma`.
    pub fn group_size(&self, gamma: u32) -> u64 {
        pow_sat(self.group_base, gamma)
    }

    /// Largest single-row increment kept in round `gamma`: `2^(4 gamma)`.
    pub fn clamp_cap(&self, gamma: u32) -> u64 {
        pow2_threshold(4 * gamma as i64)
    }

    /// Number of complete rows in a stream of length `m`.
    pub fn complete_rows(&self, m: u64) -> u64 {
        m / self.t_alpha
    }

    /// `r_alpha = ceil(F_1 / t_alpha)`.
    pub fn r_alpha(&self, f1: u64) -> u64 {
        f1.div_ceil(self.t_alpha)
    }

    /// True when no player can pass the first round: its own-row counter is
    /// at most `t_alpha`.
    pub fn is_inert(&self) -> bool {
        self.ic().max(self.tr(self.cell.beta)) > self.t_alpha
    }

    /// Ledger width of one counter during round `gamma`.
    pub fn counter_bits(&self, gamma: u32) -> u64 {
        4 * gamma as u64 + 1
    }

    pub fn sample_id_bits(&self) -> u64 {
        bits_for(self.domain)
    }

    pub fn row_id_bits(&self) -> u64 {
        bits_for(self.r_alpha(self.m_hint.max(1)))
    }

    pub fn reservoir_counter_bits(&self) -> u64 {
        ceil_log2(self.reservoir_cap) as u64 + 1
    }
}
