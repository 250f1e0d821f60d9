use fkmoments::hashkit::{make_pairwise, SignatureMatrix};
use fkmoments::martingale::DomainSamplingMatrix;
use fkmoments::num::{mean_se, proportion};
use fkmoments::oracle::{exact_moments, histogram};
use fkmoments::stream::{gen_planted, gen_zipf, zipf_mass};
use rayon::prelude::*;

/// Upper 0.999 quantile of chi-square with `df` degrees of freedom
/// (Wilson-Hilferty).
fn chi2_999(df: f64) -> f64 {
    let z = 3.090_232;
    let a = 2.0 / (9.0 * df);
    df * (1.0 - a + z * a.sqrt()).powi(3)
}

#[test]
fn pairwise_buckets_are_uniform() {
    let n = 1u64 << 10;
    for t in [2u64, 7, 64] {
        let ok = (0..100u64)
            .filter(|&seed| {
                let h = make_pairwise(seed, n, t).unwrap();
                let mut c = vec![0f64; t as usize];
                for x in 1..=n {
                    c[h.eval(x) as usize] += 1.0;
                }
                let e = n as f64 / t as f64;
                let chi: f64 = c.iter().map(|o| (o - e).powi(2) / e).sum();
                chi < chi2_999((t - 1) as f64)
            })
            .count();
        assert!(ok >= 95, "t={t}: {ok}/100 seeds under the quantile");
    }
}

#[test]
fn signature_column_is_four_wise() {
    let seeds = 100_000u64;
    let tuples: Vec<[u64; 4]> = (0..100u64)
        .map(|i| [4 * i + 1, 4 * i + 2, 7919 * i + 503, 31 * i + 9001])
        .collect();
    let counts = (0..seeds)
        .into_par_iter()
        .fold(
            || vec![[0u64; 16]; tuples.len()],
            |mut acc, seed| {
                let m = SignatureMatrix::new(seed, 1 << 16, 1).unwrap();
                for (a, t) in acc.iter_mut().zip(&tuples) {
                    let pat = t
                        .iter()
                        .enumerate()
                        .fold(0, |p, (j, &x)| p | (m.bit(x, 0) as usize) << j);
                    a[pat] += 1;
                }
                acc
            },
        )
        .reduce(
            || vec![[0u64; 16]; tuples.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    for i in 0..16 {
                        x[i] += y[i];
                    }
                }
                a
            },
        );
    for c in counts {
        for hits in c {
            let (p, se) = proportion(hits, seeds);
            assert!((p - 1.0 / 16.0).abs() <= 5.0 * se, "pattern share {p}");
        }
    }
}

#[test]
fn zipf_zero_is_flat() {
    // The 3m/n cap needs m/n well above log n; at m = 4n the max is about 14.
    let (n, m) = (1u64 << 10, 1u64 << 16);
    for seed in 0..100 {
        let h = histogram(&gen_zipf(n, m, 0.0, seed).unwrap().tokens);
        let top = h.values().copied().max().unwrap();
        assert!(
            top as f64 <= 3.0 * m as f64 / n as f64,
            "seed {seed}: max frequency {top}"
        );
    }
}

#[test]
fn zipf_two_top_share() {
    let (n, m) = (1u64 << 12, 1u64 << 14);
    let shares: Vec<f64> = (0..200)
        .map(|seed| {
            let s = gen_zipf(n, m, 2.0, seed).unwrap().tokens;
            s.iter().filter(|&&x| x == 1).count() as f64 / m as f64
        })
        .collect();
    let (mean, se) = mean_se(&shares);
    let want = zipf_mass(n, 2.0, 1);
    assert!((mean - want).abs() <= 3.0 * se, "top share {mean} vs mass {want}");
}

#[test]
fn planted_element_dominates() {
    for (n, k) in [(1u64 << 10, 2u32), (1 << 12, 3), (1 << 12, 4)] {
        for seed in 0..10 {
            let p = gen_planted(n, k, 4.0, seed).unwrap();
            let fk = exact_moments(&p.stream.tokens, k).unwrap().fk;
            assert!(fk >= (p.frequency as u128).pow(k));
        }
    }
}

#[test]
fn level_universe_halves() {
    let (n, t) = (1u64 << 12, 6u32);
    let sizes: Vec<Vec<f64>> = (0..400u64)
        .into_par_iter()
        .map(|seed| {
            let h = DomainSamplingMatrix::new(seed, n, t).unwrap();
            (0..=t)
                .map(|i| (1..=n).filter(|&x| h.level_membership(i, x).unwrap()).count() as f64)
                .collect()
        })
        .collect();
    for i in 0..=t as usize {
        let xs: Vec<f64> = sizes.iter().map(|s| s[i]).collect();
        let (mean, se) = mean_se(&xs);
        let want = n as f64 / 2f64.powi(i as i32);
        assert!(
            (mean - want).abs() <= 3.0 * se.max(1e-9),
            "level {i}: mean {mean} want {want}"
        );
    }
}
