// Player identities across the three phases: signature prefixes, an
// adopted ID with old and new counters, then the ID alone.

use fkmoments::game::{GameCell, GameConfig, GameParams, PlayerState};
use fkmoments::hashkit::SignatureMatrix;
use fkmoments::signature::{adopt_id, effective_counter, extend_signature, target_length, PhaseBoundaries};

pub fn run_example() -> anyhow::Result<()> {
    let n = 1 << 16;
    let b = PhaseBoundaries::for_n(n);
    println!(
        "n=2^16: phase 1 ends at round {}, phase 2 at round {}",
        b.phase1_end, b.phase2_end
    );

    let params = GameParams::new(n, n, 4, n, GameCell::new(0, 0, 3), &GameConfig::default())?;
    let m = SignatureMatrix::new(5, n, params.signature_width)?;
    let mut p = PlayerState::bare(0, 1);
    p.phase = 1;
    p.signature = m.prefix(777, 8)?;
    p.old_counter = 3;
    for gamma in 1..=3 {
        p.target_len = target_length(params.signature_width, params.varrho, gamma);
        extend_signature(&mut p, 777, &m)?;
        println!("round {gamma}: signature length {}", p.signature.len);
    }

    p.phase = 2;
    adopt_id(&mut p, 777)?;
    p.new_counter = 4;
    println!(
        "phase 2 adopts {:?}; effective counter {}",
        p.resolved_id,
        effective_counter(&p)
    );
    p.phase = 3;
    println!("phase 3 effective counter {}", effective_counter(&p));
    Ok(())
}

fn main() -> anyhow::Result<()> {
    run_example()
}
