//! Brute-force ground truth and Monte Carlo validators.

mod exact;
mod montecarlo;
mod pairs;
mod rows;

pub use exact::{
    exact_heavy, exact_moments, exact_moments_sorted, histogram, histogram_sorted, moment_of,
    FrequencyVector, Moments,
};
pub use montecarlo::{
    bell, binomial_moment_bound, mc_binomial_moment, mc_geometric_cost, mc_noisy_lemma, mc_two_level,
    noisy_lemma_floor, EventConstruction, GeometricCostConfig, McEstimate, NoisyConfig, TwoLevelInstance,
};
pub use pairs::{count_winning_pairs, is_losing_pair, PairSequences};
pub use rows::{classify_rows, DenseRowSpec, RowClassification};
