use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::game::row_width;
use crate::oracle::exact::{histogram, moment_of};
use crate::Element;

/// Parameters of a dense-row classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DenseRowSpec {
    pub n: u64,
    pub k: u32,
    pub alpha: i32,
    pub heavy: Element,
    pub lambda: f64,
    pub phi: f64,
    pub tau: u64,
}

/// Exact row statistics of the matrix view of a stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowClassification {
    pub t_alpha: u64,
    pub rows: u64,
    pub dense_rows: u64,
    /// `|S_u|` for each `u >= 1` with a non-empty set.
    pub s_u: BTreeMap<u32, u64>,
    /// `G_k / (lambda^(k-1) t_alpha phi tau)`.
    pub dense_bound: f64,
}

/// Counts dense rows and the `S_u` classes of the heavy element's row counts.
///
/// A row is dense when more than `t_alpha * phi` distinct non-heavy elements
/// with global frequency above `lambda` each occur more than `tau` times in it.
pub fn classify_rows(stream: &[Element], spec: &DenseRowSpec) -> Result<RowClassification> {
    if !(spec.lambda > 0.0) || !(spec.phi > 0.0) || spec.tau == 0 {
        return invalid("dense-row parameters must be positive");
    }
    let t = row_width(spec.n, spec.k, spec.alpha);
    let global = histogram(stream);
    let fk = moment_of(global.values(), spec.k)?;
    let fh = global.get(&spec.heavy).copied().unwrap_or(0) as u128;
    let gk = (fk - fh.pow(spec.k)) as f64;
    let rows = stream.len() as u64 / t;
    let mut dense = 0;
    let mut s_u: BTreeMap<u32, u64> = BTreeMap::new();
    for r in 0..rows as usize {
        let row = &stream[r * t as usize..(r + 1) * t as usize];
        let mut local: HashMap<Element, u64> = HashMap::new();
        for &x in row {
            *local.entry(x).or_insert(0) += 1;
        }
        let heavy_count = local.get(&spec.heavy).copied().unwrap_or(0);
        if heavy_count > 0 {
            let u = 64 - heavy_count.leading_zeros();
            *s_u.entry(u).or_insert(0) += 1;
        }
        let crowded = local
            .iter()
            .filter(|(&l, &c)| l != spec.heavy && c > spec.tau && global[&l] as f64 > spec.lambda)
            .count();
        if crowded as f64 > t as f64 * spec.phi {
            dense += 1;
        }
    }
    let dense_bound = gk / (spec.lambda.powi(spec.k as i32 - 1) * t as f64 * spec.phi * spec.tau as f64);
    Ok(RowClassification {
        t_alpha: t,
        rows,
        dense_rows: dense,
        s_u,
        dense_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_ones_has_no_dense_rows() {
        let stream: Vec<u64> = (1..=256).collect();
        let spec = DenseRowSpec {
            n: 256,
            k: 2,
            alpha: 0,
            heavy: 1,
            lambda: 0.5,
            phi: 0.01,
            tau: 2,
        };
        let c = classify_rows(&stream, &spec).unwrap();
        assert_eq!(c.dense_rows, 0);
        assert_eq!(c.s_u.values().sum::<u64>(), 1);
    }

    #[test]
    fn constructed_dense_row() {
        // n = 256, k = 2: t_alpha = 16; phi = 0.25 -> need > 4 crowded elements.
        let (phi, tau) = (0.25, 1u64);
        let t = row_width(256, 2, 0);
        assert_eq!(t, 16);
        let crowded = (t as f64 * phi).ceil() as u64 + 1; // 5 elements, 2 copies each
        let mut row0 = Vec::new();
        for e in 0..crowded {
            for _ in 0..=tau {
                row0.push(100 + e);
            }
        }
        while row0.len() < t as usize {
            row0.push(1);
        }
        let mut stream = row0;
        stream.extend(200..200 + t);
        let spec = DenseRowSpec {
            n: 256,
            k: 2,
            alpha: 0,
            heavy: 1,
            lambda: 1.0,
            phi,
            tau,
        };
        let c = classify_rows(&stream, &spec).unwrap();
        assert_eq!(c.rows, 2);
        assert_eq!(c.dense_rows, 1);
        assert!(c.dense_rows as f64 <= c.dense_bound);
    }
}
