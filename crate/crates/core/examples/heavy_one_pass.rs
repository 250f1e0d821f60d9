// The one-pass finder on a stream four times longer than the universe,
// which forces two halvings of the sampling rate.

use fkmoments::ahe::{find_heavy_one_pass, AheConfig};
use fkmoments::game::GameConfig;
use fkmoments::stream::gen_planted_with;

pub fn run_example() -> anyhow::Result<()> {
    let n = 1 << 11;
    let planted = gen_planted_with(n, 4, 16.0, 4 * n, 8)?;
    let cfg = AheConfig {
        seed: 8,
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
    let report = find_heavy_one_pass(&planted.stream.tokens, n, &cfg)?;
    println!("halvings={} final p={}", report.halvings, report.p);
    println!(
        "planted {} (frequency {}) estimate {:?}",
        planted.planted,
        planted.frequency,
        report.frequency_of(planted.planted)
    );
    Ok(())
}

fn main() -> anyhow::Result<()> {
    run_example()
}
