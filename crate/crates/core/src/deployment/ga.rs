use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use super::fitness::fitness;
use super::partition::genome_is_balanced;
use super::{GaConfig, Partition};
use crate::error::{Error, Result};

/// Child attempts per population slot before a random balanced immigrant is used instead.
const ATTEMPTS_PER_CHILD: usize = 64;

#[derive(Debug, Clone, Serialize)]
pub struct GaOutcome {
    #[serde(skip)]
    pub partition: Partition,
    pub fitness: f64,
    /// Best fitness after each generation; entry 0 is the initial population.
    pub trajectory: Vec<f64>,
    /// Children replaced by random immigrants after repeated constraint violations.
    pub immigrants: usize,
}

#[derive(Clone)]
struct Individual {
    genome: Vec<usize>,
    score: f64,
}

/// Random genome with group sizes differing by at most one.
pub fn random_balanced<R: Rng + ?Sized>(num_oru: usize, num_edu: usize, rng: &mut R) -> Vec<usize> {
    let mut genome: Vec<usize> = (0..num_oru).map(|l| l % num_edu).collect();
    genome.shuffle(rng);
    genome
}

/// Genetic search for a balanced, interleaved O-RU to EDU partition.
pub fn ga_optimize<R: Rng + ?Sized>(
    oru_distance: &DMatrix<f64>,
    num_edu: usize,
    config: &GaConfig,
    rng: &mut R,
) -> Result<GaOutcome> {
    let num_oru = oru_distance.nrows();
    if num_edu == 0 || num_oru < num_edu {
        return Err(Error::Infeasible(format!(
            "cannot split {num_oru} O-RUs into {num_edu} non-empty EDUs"
        )));
    }
    let issues = config.issues();
    if !issues.is_empty() {
        return Err(Error::InvalidConfig(issues));
    }
    let score = |genome: &[usize]| -> Result<f64> {
        let p = Partition::from_genome(genome.to_vec(), num_edu)?;
        fitness(&p, oru_distance, config.fitness_mode)
    };

    if num_edu == 1 || num_edu == num_oru {
        // Only one balanced partition exists.
        let partition = if num_edu == 1 {
            Partition::single(num_oru)
        } else {
            Partition::singletons(num_oru)
        };
        let f = fitness(&partition, oru_distance, config.fitness_mode)?;
        return Ok(GaOutcome {
            partition,
            fitness: f,
            trajectory: vec![f],
            immigrants: 0,
        });
    }

    let n_p = config.population_size;
    let mut population = Vec::with_capacity(2 * n_p);
    for _ in 0..n_p {
        let genome = random_balanced(num_oru, num_edu, rng);
        let s = score(&genome)?;
        population.push(Individual { genome, score: s });
    }
    sort_population(&mut population);
    let mut trajectory = vec![population[0].score];
    let mut immigrants = 0;

    for _ in 0..config.generations {
        let mut children = Vec::with_capacity(n_p);
        while children.len() < n_p {
            let mut placed = false;
            for _ in 0..ATTEMPTS_PER_CHILD {
                let a = &population[roulette(&population, rng)].genome;
                let b = &population[roulette(&population, rng)].genome;
                let (mut c1, mut c2) = if rng.random::<f64>() < config.crossover_rate {
                    let cut = rng.random_range(1..num_oru);
                    let c1 = a[..cut].iter().chain(&b[cut..]).copied().collect::<Vec<_>>();
                    let c2 = b[..cut].iter().chain(&a[cut..]).copied().collect::<Vec<_>>();
                    (c1, c2)
                } else {
                    (a.clone(), b.clone())
                };
                mutate(&mut c1, num_edu, config.mutation_rate, rng);
                mutate(&mut c2, num_edu, config.mutation_rate, rng);
                for child in [c1, c2] {
                    if children.len() < n_p && genome_is_balanced(&child, num_edu) {
                        let s = score(&child)?;
                        children.push(Individual { genome: child, score: s });
                        placed = true;
                    }
                }
                if placed {
                    break;
                }
            }
            if !placed {
                let genome = random_balanced(num_oru, num_edu, rng);
                let s = score(&genome)?;
                children.push(Individual { genome, score: s });
                immigrants += 1;
            }
        }
        population.extend(children);
        sort_population(&mut population);
        population.truncate(n_p);
        trajectory.push(population[0].score);
    }

    let best = population.swap_remove(0);
    Ok(GaOutcome {
        partition: Partition::from_genome(best.genome, num_edu)?,
        fitness: best.score,
        trajectory,
        immigrants,
    })
}

fn mutate<R: Rng + ?Sized>(genome: &mut [usize], num_edu: usize, rate: f64, rng: &mut R) {
    for gene in genome.iter_mut() {
        if rng.random::<f64>() < rate {
            *gene = rng.random_range(0..num_edu);
        }
    }
}

/// Descending by score; ties broken by genome so the order is deterministic.
fn sort_population(pop: &mut [Individual]) {
    pop.sort_by(|x, y| y.score.total_cmp(&x.score).then_with(|| x.genome.cmp(&y.genome)));
}

/// Fitness-proportional selection. Infinite scores absorb all the probability mass.
fn roulette<R: Rng + ?Sized>(pop: &[Individual], rng: &mut R) -> usize {
    let infinite: Vec<usize> = (0..pop.len()).filter(|&i| pop[i].score.is_infinite()).collect();
    if !infinite.is_empty() {
        return infinite[rng.random_range(0..infinite.len())];
    }
    let total: f64 = pop.iter().map(|i| i.score).sum();
    if total <= 0.0 {
        return rng.random_range(0..pop.len());
    }
    let mut target = rng.random::<f64>() * total;
    for (i, ind) in pop.iter().enumerate() {
        target -= ind.score;
        if target < 0.0 {
            return i;
        }
    }
    pop.len() - 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deployment::FitnessMode;
    use crate::scenario::{stream_rng, Stream};
    use proptest::prelude::*;

    fn line(n: usize) -> DMatrix<f64> {
        DMatrix::from_fn(n, n, |p, q| (p as f64 - q as f64).abs())
    }

    #[test]
    fn four_on_a_line_reaches_interleaved_optimum() {
        let cfg = GaConfig {
            population_size: 8,
            generations: 50,
            fitness_mode: FitnessMode::Exact,
            ..GaConfig::default()
        };
        for seed in 0..5 {
            let mut rng = stream_rng(seed, 0, Stream::Genetic);
            let out = ga_optimize(&line(4), 2, &cfg, &mut rng).unwrap();
            assert!((out.fitness - 1.0 / 6.0).abs() < 1e-15);
            assert_eq!(out.partition.genome(), &[0, 1, 0, 1]);
        }
    }

    #[test]
    fn single_edu_returns_immediately() {
        let mut rng = stream_rng(0, 0, Stream::Genetic);
        let out = ga_optimize(&line(5), 1, &GaConfig::default(), &mut rng).unwrap();
        assert_eq!(out.partition, Partition::single(5));
        assert_eq!(out.trajectory.len(), 1);
    }

    #[test]
    fn too_few_orus_is_infeasible() {
        let mut rng = stream_rng(0, 0, Stream::Genetic);
        let err = ga_optimize(&line(2), 3, &GaConfig::default(), &mut rng).unwrap_err();
        assert_eq!(err.kind(), "infeasible");
    }

    #[test]
    fn same_stream_same_result() {
        let cfg = GaConfig {
            generations: 20,
            ..GaConfig::default()
        };
        let d = line(9);
        let a = ga_optimize(&d, 3, &cfg, &mut stream_rng(4, 0, Stream::Genetic)).unwrap();
        let b = ga_optimize(&d, 3, &cfg, &mut stream_rng(4, 0, Stream::Genetic)).unwrap();
        assert_eq!(a.partition, b.partition);
        assert_eq!(a.trajectory, b.trajectory);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn output_balanced_and_elitist(
            pts in prop::collection::vec((0.0..100.0f64, 0.0..100.0f64), 3..14),
            m in 2usize..4,
            seed in any::<u64>(),
        ) {
            prop_assume!(pts.len() >= m);
            let n = pts.len();
            let d = DMatrix::from_fn(n, n, |p, q| {
                ((pts[p].0 - pts[q].0).powi(2) + (pts[p].1 - pts[q].1).powi(2)).sqrt()
            });
            let cfg = GaConfig { population_size: 10, generations: 15, ..GaConfig::default() };
            let out = ga_optimize(&d, m, &cfg, &mut stream_rng(seed, 0, Stream::Genetic)).unwrap();
            prop_assert!(out.partition.satisfies_balance(m));
            prop_assert!(out.trajectory.windows(2).all(|w| w[1] >= w[0]));
            prop_assert_eq!(*out.trajectory.last().unwrap(), out.fitness);
        }
    }
}
