use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Two equal-length sequences of non-negative integers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairSequences {
    pub u: Vec<u64>,
    pub w: Vec<u64>,
}

impl PairSequences {
    pub fn new(u: Vec<u64>, w: Vec<u64>) -> Result<Self> {
        if u.len() != w.len() {
            return invalid(format!("sequence lengths differ: {} vs {}", u.len(), w.len()));
        }
        Ok(Self { u, w })
    }

    /// `sum (u_s - w_s)`.
    pub fn net(&self) -> i64 {
        self.u
            .iter()
            .zip(&self.w)
            .map(|(&u, &w)| u as i64 - w as i64)
            .sum()
    }
}

/// `(i, j)` (1-based) loses if some suffix window `i..=h` has
/// `-j + sum (u_l - w_l) < 0`.
pub fn is_losing_pair(seq: &PairSequences, i: usize, j: u64) -> bool {
    let mut sum: i64 = 0;
    for l in (i - 1)..seq.u.len() {
        sum += seq.u[l] as i64 - seq.w[l] as i64;
        if sum - (j as i64) < 0 {
            return true;
        }
    }
    false
}

/// Number of winning pairs, by direct enumeration.
pub fn count_winning_pairs(u: &[u64], w: &[u64]) -> Result<u64> {
    let seq = PairSequences::new(u.to_vec(), w.to_vec())?;
    let mut wins = 0;
    for i in 1..=seq.u.len() {
        for j in 1..=seq.u[i - 1] {
            if !is_losing_pair(&seq, i, j) {
                wins += 1;
            }
        }
    }
    Ok(wins)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures() {
        assert_eq!(count_winning_pairs(&[1], &[0]).unwrap(), 1);
        assert_eq!(count_winning_pairs(&[3, 1], &[1, 1]).unwrap(), 2);
        assert_eq!(count_winning_pairs(&[2, 2], &[3, 0]).unwrap(), 2);
        assert!(count_winning_pairs(&[1], &[]).is_err());
    }

    #[test]
    fn losing_detail() {
        let s = PairSequences::new(vec![3, 1], vec![1, 1]).unwrap();
        assert!(!is_losing_pair(&s, 1, 1));
        assert!(!is_losing_pair(&s, 1, 2));
        assert!(is_losing_pair(&s, 1, 3));
        assert!(is_losing_pair(&s, 2, 1));
    }
}
