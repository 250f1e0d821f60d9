// The three-pass heavy-element finder on a planted stream, checked
// against the exact histogram.

use fkmoments::ahe::{find_heavy, AheConfig};
use fkmoments::game::GameConfig;
use fkmoments::oracle::histogram;
use fkmoments::stream::gen_planted;

pub fn run_example() -> anyhow::Result<()> {
    let n = 1 << 12;
    let planted = gen_planted(n, 4, 4.0, 21)?;
    let cfg = AheConfig {
        rho: 0.5,
        delta: 0.25,
        k: 4,
        seed: 21,
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
    };
    let report = find_heavy(&planted.stream.tokens, n, &cfg)?;
    let truth = histogram(&planted.stream.tokens);
    println!(
        "p={} z={} repetitions={} pooled={}",
        report.p, report.z, report.repetitions, report.candidates_pooled
    );
    for &(x, f) in report.entries.iter().take(5) {
        println!("  element {x}: frequency {f} (exact {})", truth[&x]);
    }
    println!(
        "planted {} found: {}; ledger {} bits, budget {} bits",
        planted.planted,
        report.frequency_of(planted.planted) == Some(planted.frequency),
        report.ledger.total(),
        report.budget_bits
    );
    Ok(())
}

fn main() -> anyhow::Result<()> {
    run_example()
}
