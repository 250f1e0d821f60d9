// Two-level sampling: a Bernoulli hash filters a row into a pool, then a
// reservoir picks one pool token uniformly.

use fkmoments::oracle::{mc_two_level, TwoLevelInstance};
use fkmoments::sampling::two_level_sample;

pub fn run_example() -> anyhow::Result<()> {
    let row: Vec<u64> = (0..512).map(|i| if i % 4 == 0 { 1 } else { i + 2 }).collect();
    let mut hits = 0;
    for seed in 0..200 {
        let out = two_level_sample(&row, 1 << 12, 1.0 / 16.0, seed)?;
        if out.sample == Some(1) {
            hits += 1;
        }
    }
    println!("element 1 fills a quarter of the row and was sampled in {hits}/200 runs");

    let inst = TwoLevelInstance {
        stream_len: 10_000,
        t: 10_000.0,
        lambda: 2f64.powi(-14),
        n: 1 << 20,
    };
    let est = mc_two_level(&inst, 2000, 5)?;
    println!(
        "P(miss | heavy in pool) = {:.5} +- {:.5} (bound {:.3})",
        est.estimate,
        est.se,
        inst.bound()
    );
    Ok(())
}

fn main() -> anyhow::Result<()> {
    run_example()
}
