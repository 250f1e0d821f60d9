// The hash families: pairwise range hashes, signature prefixes and
// Bernoulli membership hashes, all from derived seeds.

use fkmoments::hashkit::{derive_seed, BernoulliHash, PairwiseHash, SeedTag, SignatureMatrix};

pub fn run_example() -> anyhow::Result<()> {
    let master = 42;
    let n = 1 << 16;

    let g = PairwiseHash::new(derive_seed(master, SeedTag::Row, 0), n, 100)?;
    let mut buckets = [0u32; 100];
    for x in 1..=10_000 {
        buckets[g.eval(x) as usize] += 1;
    }
    let (lo, hi) = (buckets.iter().min().unwrap(), buckets.iter().max().unwrap());
    println!("pairwise hash into 100 buckets: loads in [{lo}, {hi}]");

    let sig = SignatureMatrix::new(derive_seed(master, SeedTag::Signature, 0), n, 32)?;
    let short = sig.prefix(1234, 8)?;
    let long = sig.prefix(1234, 24)?;
    println!(
        "signature of 1234: 8-bit {:08b}, 24-bit prefix extends it: {}",
        short.bits,
        short.is_prefix_of(&long)
    );

    let h = BernoulliHash::new(derive_seed(master, SeedTag::Subsample, 0), n, 0.25)?;
    let kept = (1..=n).filter(|&x| h.eval(x)).count();
    println!(
        "bernoulli(1/4) keeps {kept} of {n} ids ({:.4})",
        kept as f64 / n as f64
    );

    let forced = BernoulliHash::with_forced_member(7, n, 1.0 / 1024.0, 99)?;
    println!("forced member 99 kept: {}", forced.eval(99));
    Ok(())
}

fn main() -> anyhow::Result<()> {
    run_example()
}
