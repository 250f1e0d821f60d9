use fkmoments::ahe::find_heavy_one_pass;
use fkmoments::harness::validate::practical_ahe;
use fkmoments::hashkit::{derive_seed, SeedTag};
use fkmoments::martingale::{estimate_fk, EstimateOptions, HeavyProvider};
use fkmoments::oracle::{exact_moments, histogram};
use fkmoments::stream::gen_zipf;
use rayon::prelude::*;

/// Fraction of 60 Zipf streams whose estimate lands within `0.2 F_4`.
fn hit_rate(one_pass: Option<bool>) -> f64 {
    let (n, m, k) = (1u64 << 12, 1u64 << 14, 4);
    let hits = (0..60u64)
        .into_par_iter()
        .filter(|&i| {
            let seed = derive_seed(42, SeedTag::Trial, i);
            let s = gen_zipf(n, m, 2.0, seed).unwrap().tokens;
            let fk = exact_moments(&s, k).unwrap().fk as f64;
            let mut opts = EstimateOptions::oracle(k, 0.2, seed).unwrap();
            if let Some(one_pass) = one_pass {
                opts.provider = HeavyProvider::Ahe {
                    config: practical_ahe(seed),
                    rho_floor: 0.5,
                    one_pass,
                };
            }
            let est = estimate_fk(&s, n, &opts).unwrap().estimate as f64;
            (est - fk).abs() <= 0.2 * fk
        })
        .count();
    hits as f64 / 60.0
}

#[test]
fn oracle_provider_accuracy() {
    assert!(hit_rate(None) >= 2.0 / 3.0);
}

#[test]
fn three_pass_provider_accuracy() {
    assert!(hit_rate(Some(false)) >= 2.0 / 3.0);
}

#[test]
fn one_pass_provider_accuracy() {
    let r = hit_rate(Some(true));
    assert!(r >= 2.0 / 3.0, "hit rate {r}");
}

#[test]
fn one_pass_top_frequency_is_close() {
    let n = 1u64 << 12;
    for seed in 0..20 {
        let s = gen_zipf(n, 1 << 15, 2.0, seed).unwrap().tokens;
        let f = histogram(&s)[&1] as f64;
        let r = find_heavy_one_pass(&s, n, &practical_ahe(seed)).unwrap();
        let got = r.frequency_of(1).expect("top element reported") as f64;
        assert!((got - f).abs() <= 0.1 * f, "seed {seed}: {got} vs {f}");
    }
}
