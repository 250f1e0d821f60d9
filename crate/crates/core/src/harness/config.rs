//! Flat `key=value` parameter overrides, one per line. `#` starts a comment.

use std::collections::BTreeMap;
use std::path::Path;

use crate::ahe::AheConfig;
use crate::error::{invalid, Result, SketchError};
use crate::game::GameConfig;
use crate::martingale::EstimateOptions;

const GAME_KEYS: &[&str] = &[
    "mu",
    "psi_eff",
    "varrho",
    "w_multiplier",
    "group_base",
    "row_base",
    "clamp",
    "range",
    "signatures",
    "immediate_adoption",
    "signature_width",
    "cap_multiplier",
];
const AHE_KEYS: &[&str] = &[
    "c_z",
    "c_p",
    "min_sample_len",
    "c_pool",
    "substreams",
    "repetitions",
    "c_budget",
    "c_eff",
];
const ESTIMATE_KEYS: &[&str] = &[
    "u",
    "q",
    "schedule_c",
    "alpha_floor",
    "alpha",
    "dt_cap",
    "rho_floor",
    "one_pass",
];

/// Parsed overrides.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamOverrides {
    entries: BTreeMap<String, String>,
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| SketchError::InvalidParameter(format!("bad value {v:?} for {key}")))
}

impl ParamOverrides {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return invalid(format!("line {}: expected key=value", i + 1));
            };
            let (k, v) = (k.trim(), v.trim());
            if ![GAME_KEYS, AHE_KEYS, ESTIMATE_KEYS]
                .iter()
                .any(|ks| ks.contains(&k))
            {
                return invalid(format!("line {}: unknown key {k:?}", i + 1));
            }
            if entries.insert(k.to_string(), v.to_string()).is_some() {
                return invalid(format!("line {}: duplicate key {k:?}", i + 1));
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SketchError::InvalidParameter(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.entries
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.entries.get(key).map(|v| parse_value(key, v)).transpose()
    }

    pub fn apply_game(&self, g: &mut GameConfig) -> Result<()> {
        if let Some(v) = self.get("mu")? {
            g.mu = v;
        }
        if let Some(v) = self.get("psi_eff")? {
            g.psi_eff = v;
        }
        if let Some(v) = self.get("varrho")? {
            g.varrho = v;
        }
        if let Some(v) = self.get("w_multiplier")? {
            g.w_multiplier = v;
        }
        if let Some(v) = self.get("group_base")? {
            g.group_base = v;
        }
        if let Some(v) = self.get("row_base")? {
            g.row_base = v;
        }
        if let Some(v) = self.get("clamp")? {
            g.clamp = v;
        }
        if let Some(v) = self.get("range")? {
            g.range = Some(v);
        }
        if let Some(v) = self.get("signatures")? {
            g.signatures = v;
        }
        if let Some(v) = self.get("immediate_adoption")? {
            g.immediate_adoption = v;
        }
        if let Some(v) = self.get("signature_width")? {
            g.signature_width = Some(v);
        }
        if let Some(v) = self.get("cap_multiplier")? {
            g.cap_multiplier = v;
        }
        g.validate()
    }

    pub fn apply_ahe(&self, a: &mut AheConfig) -> Result<()> {
        if let Some(v) = self.get("c_z")? {
            a.c_z = v;
        }
        if let Some(v) = self.get("c_p")? {
            a.c_p = v;
        }
        if let Some(v) = self.get("min_sample_len")? {
            a.min_sample_len = v;
        }
        if let Some(v) = self.get("c_pool")? {
            a.c_pool = v;
        }
        if let Some(v) = self.get("substreams")? {
            a.substreams = Some(v);
        }
        if let Some(v) = self.get("repetitions")? {
            a.repetitions = Some(v);
        }
        if let Some(v) = self.get("c_budget")? {
            a.c_budget = v;
        }
        if let Some(v) = self.get("c_eff")? {
            a.c_eff = v;
        }
        self.apply_game(&mut a.game)?;
        a.validate()
    }

    /// Applies schedule keys. `schedule_c` and `q` rebuild `u` unless `u`
    /// is given.
    pub fn apply_estimate(&self, o: &mut EstimateOptions) -> Result<()> {
        let q: Option<f64> = self.get("q")?;
        let c: Option<f64> = self.get("schedule_c")?;
        if q.is_some() || c.is_some() {
            let rebuilt = crate::martingale::build_schedule(
                o.schedule.epsilon,
                o.k,
                c.unwrap_or(10.0),
                q.unwrap_or(o.schedule.q),
            )?;
            o.schedule.q = rebuilt.q;
            o.schedule.u = rebuilt.u;
        }
        if let Some(u) = self.get::<f64>("u")? {
            if !(u > 0.0 && u < 1.0) {
                return invalid("u must lie in (0, 1)");
            }
            o.schedule.u = u;
        }
        if let Some(v) = self.get("alpha_floor")? {
            o.schedule.alpha_floor = v;
        }
        if let Some(v) = self.get("alpha")? {
            o.schedule.alpha_override = Some(v);
        }
        if let Some(v) = self.get("dt_cap")? {
            o.dt_cap = v;
        }
        if let crate::martingale::HeavyProvider::Ahe {
            config,
            rho_floor,
            one_pass,
        } = &mut o.provider
        {
            if let Some(v) = self.get("rho_floor")? {
                *rho_floor = v;
            }
            if let Some(v) = self.get("one_pass")? {
                *one_pass = v;
            }
            self.apply_ahe(config)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_apply() {
        let o = ParamOverrides::parse("# practical\nsignatures = false\npsi_eff=0\nc_z=1\n\n").unwrap();
        let mut a = AheConfig::default();
        o.apply_ahe(&mut a).unwrap();
        assert!(!a.game.signatures);
        assert_eq!(a.game.psi_eff, 0);
        assert_eq!(a.c_z, 1.0);
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        assert!(ParamOverrides::parse("bogus=1").is_err());
        assert!(ParamOverrides::parse("c_z").is_err());
        let o = ParamOverrides::parse("c_z=abc").unwrap();
        assert!(o.apply_ahe(&mut AheConfig::default()).is_err());
    }
}
