// F_k estimation from level sampling, first with exact heavy sets, then with
// the three-pass and one-pass finders supplying them.

use fkmoments::harness::validate::practical_ahe;
use fkmoments::martingale::{estimate_fk, EstimateOptions, HeavyProvider};
use fkmoments::oracle::exact_moments;
use fkmoments::stream::gen_zipf;

pub fn run_example() -> anyhow::Result<()> {
    let n = 1 << 12;
    let stream = gen_zipf(n, 1 << 14, 2.0, 4)?;
    let exact = exact_moments(&stream.tokens, 4)?.fk as f64;
    let opts = EstimateOptions::oracle(4, 0.2, 4)?;
    let r = estimate_fk(&stream.tokens, n, &opts)?;
    println!("t={} u={:.5}", r.t, r.u);
    for l in r.levels.iter().take(4) {
        println!(
            "  level {}: F0={} |S|={} Z_next={:?}",
            l.level, l.f0, l.s_size, l.z_next
        );
    }
    println!(
        "estimate {} vs exact {} (relative error {:.2e})",
        r.estimate,
        exact,
        (r.estimate as f64 - exact).abs() / exact
    );

    for one_pass in [false, true] {
        let opts = EstimateOptions {
            provider: HeavyProvider::Ahe {
                config: practical_ahe(4),
                rho_floor: 0.5,
                one_pass,
            },
            ..opts.clone()
        };
        let r = estimate_fk(&stream.tokens, n, &opts)?;
        let bits: u64 = r.heavy_reports.iter().map(|h| h.ledger.total()).sum();
        println!(
            "{} finder: estimate {} (relative error {:.2e}), {bits} ledger bits",
            if one_pass { "one-pass" } else { "three-pass" },
            r.estimate,
            (r.estimate as f64 - exact).abs() / exact
        );
    }
    Ok(())
}

fn main() -> anyhow::Result<()> {
    run_example()
}
