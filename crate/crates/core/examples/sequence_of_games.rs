// The grid of (eta, alpha, beta) games fed by one stream.

use fkmoments::game::{grid_cells, play_sequence, GameConfig, SequenceScale};
use fkmoments::stream::gen_planted;

pub fn run_example() -> anyhow::Result<()> {
    let n = 1 << 12;
    let planted = gen_planted(n, 4, 4.0, 2)?;
    let cfg = GameConfig {
        signatures: false,
        psi_eff: 0,
        w_multiplier: 8.0,
        range: Some(2),
        ..GameConfig::default()
    };
    println!("grid with RANGE=2 has {} cells", grid_cells(2).len());

    let scale = SequenceScale {
        n,
        domain: n,
        k: 4,
        m_hint: n,
    };
    let out = play_sequence(&planted.stream.tokens, &scale, &cfg, 9)?;
    println!(
        "played {} games, skipped {} inert ones",
        out.games_played, out.games_skipped
    );
    for c in out.candidates.iter().take(5) {
        println!("  {:?} counter={} from cell {:?}", c.key.id(), c.counter, c.cell);
    }
    println!(
        "planted element is {}; ledger total {} bits",
        planted.planted,
        out.ledger.total()
    );
    Ok(())
}

fn main() -> anyhow::Result<()> {
    run_example()
}
