// One game on a planted stream, with the winner and the bit ledger.

use fkmoments::game::{play_game, CandidateKey, GameCell, GameConfig, GameParams};
use fkmoments::stream::gen_planted;

pub fn run_example() -> anyhow::Result<()> {
    let n = 1 << 12;
    let planted = gen_planted(n, 4, 4.0, 11)?;
    println!(
        "planted element {} occurs {} times",
        planted.planted, planted.frequency
    );

    let cfg = GameConfig {
        signatures: false,
        psi_eff: 0,
        w_multiplier: 8.0,
        ..GameConfig::default()
    };
    for beta in 1..=4 {
        let params = GameParams::new(n, n, 4, n, GameCell::new(0, 0, beta), &cfg)?;
        let out = play_game(&planted.stream.tokens, &params, 3)?;
        let winner = match out.candidate.as_ref().map(|c| &c.key) {
            Some(CandidateKey::Id(x)) => format!("{x}"),
            Some(CandidateKey::Unresolved(_)) => "unresolved".to_string(),
            None => "none".to_string(),
        };
        println!(
            "beta={beta} t_alpha={} w={} rows={} winner={winner} counter={} bits={}",
            params.t_alpha,
            params.w,
            out.rows,
            out.candidate.as_ref().map_or(0, |c| c.counter),
            out.ledger.total()
        );
    }
    Ok(())
}

fn main() -> anyhow::Result<()> {
    run_example()
}
