use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Result, SketchError};
use crate::Element;

/// Exact histogram: element to positive count.
pub type FrequencyVector = BTreeMap<Element, u64>;

/// Exact frequency moments of a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Moments {
    pub fk: u128,
    pub f0: u64,
    pub f1: u64,
    pub f_inf: u64,
}

/// Single-pass hash-map histogram.
pub fn histogram(stream: &[Element]) -> FrequencyVector {
    let mut counts: HashMap<Element, u64> = HashMap::new();
    for &x in stream {
        *counts.entry(x).or_insert(0) += 1;
    }
    counts.into_iter().collect()
}

/// Histogram by sorting and run-length counting.
pub fn histogram_sorted(stream: &[Element]) -> FrequencyVector {
    let mut sorted = stream.to_vec();
    sorted.sort_unstable();
    let mut out = FrequencyVector::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        out.insert(sorted[i], (j - i) as u64);
        i = j;
    }
    out
}

/// `sum f^k` over a histogram, exact.
pub fn moment_of<'a>(freqs: impl IntoIterator<Item = &'a u64>, k: u32) -> Result<u128> {
    let mut total: u128 = 0;
    for &f in freqs {
        let p = (f as u128).checked_pow(k).ok_or(SketchError::Overflow("f^k"))?;
        total = total.checked_add(p).ok_or(SketchError::Overflow("F_k"))?;
    }
    Ok(total)
}

fn moments_from(h: &FrequencyVector, k: u32) -> Result<Moments> {
    Ok(Moments {
        fk: moment_of(h.values(), k)?,
        f0: h.len() as u64,
        f1: h.values().sum(),
        f_inf: h.values().copied().max().unwrap_or(0),
    })
}

/// `(F_k, F_0, F_1, F_inf)` from the streaming histogram.
pub fn exact_moments(stream: &[Element], k: u32) -> Result<Moments> {
    moments_from(&histogram(stream), k)
}

/// `(F_k, F_0, F_1, F_inf)` from the sort-based histogram.
pub fn exact_moments_sorted(stream: &[Element], k: u32) -> Result<Moments> {
    moments_from(&histogram_sorted(stream), k)
}

/// All `i` with `f_i^k >= rho F_k`.
pub fn exact_heavy(stream: &[Element], rho: f64, k: u32) -> Result<BTreeSet<Element>> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(SketchError::InvalidParameter(format!("rho {rho} outside (0, 1]")));
    }
    let h = histogram(stream);
    let fk = moment_of(h.values(), k)? as f64;
    let mut out = BTreeSet::new();
    for (&x, &f) in &h {
        let v = (f as u128).pow(k) as f64;
        if v >= rho * fk {
            out.insert(x);
        }
    }
    Ok(out)
}
