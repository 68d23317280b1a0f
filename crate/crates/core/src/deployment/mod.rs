//! O-RU to EDU partitioning: genetic interleaving search and the clustered baseline.

mod cluster;
mod fitness;
mod ga;
mod partition;

use serde::{Deserialize, Serialize};

pub use cluster::clustered_baseline;
pub use fitness::{fitness, FitnessMode, MAX_EXACT_TUPLES};
pub use ga::{ga_optimize, random_balanced, GaOutcome};
pub use partition::Partition;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    /// Must be even.
    pub population_size: usize,
    pub generations: usize,
    /// `exact` enumerates every cross-EDU tuple and is only usable for small
    /// deployments; the surrogate scales to the full 100 O-RU grid.
    pub fitness_mode: FitnessMode,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            crossover_rate: 0.8,
            mutation_rate: 0.05,
            population_size: 50,
            generations: 200,
            fitness_mode: FitnessMode::PairwiseSurrogate,
        }
    }
}

impl GaConfig {
    pub fn issues(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            out.push(format!("ga.crossover_rate must lie in [0, 1], got {}", self.crossover_rate));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            out.push(format!("ga.mutation_rate must lie in [0, 1], got {}", self.mutation_rate));
        }
        if self.population_size < 2 || !self.population_size.is_multiple_of(2) {
            out.push(format!(
                "ga.population_size must be even and at least 2, got {}",
                self.population_size
            ));
        }
        if self.generations == 0 {
            out.push("ga.generations must be at least 1".into());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_valid() {
        assert!(GaConfig::default().issues().is_empty());
    }

    #[test]
    fn catches_each_violation() {
        let bad = GaConfig {
            crossover_rate: 1.5,
            mutation_rate: -0.1,
            population_size: 7,
            generations: 0,
            fitness_mode: FitnessMode::Exact,
        };
        assert_eq!(bad.issues().len(), 4);
    }
}
