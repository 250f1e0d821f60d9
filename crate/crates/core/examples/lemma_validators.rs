// The validation suites at reduced trial counts.

use fkmoments::harness::{run_suite, Suite};

pub fn run_example() -> anyhow::Result<()> {
    for suite in [
        Suite::WinningPairs,
        Suite::Noisy,
        Suite::Geometric,
        Suite::TwoLevel,
        Suite::BinomialMoment,
        Suite::DenseRows,
    ] {
        let trials = suite.default_trials().min(2000);
        let r = run_suite(suite, Some(trials), 1)?;
        println!(
            "{suite}: {} ({} checks, {trials} trials)",
            if r.passed { "pass" } else { "FAIL" },
            r.checks.len()
        );
        for c in r.failures() {
            println!("  {}: {} vs {}", c.name, c.value, c.bound);
        }
    }
    Ok(())
}

fn main() -> anyhow::Result<()> {
    run_example()
}
