use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::Partition;
use crate::error::{Error, Result};

/// Above this many M-tuples the exact fitness refuses to run.
pub const MAX_EXACT_TUPLES: u128 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitnessMode {
    /// Reciprocal of the sum, over every tuple holding one O-RU per EDU, of the
    /// root of the tuple's summed squared pairwise distances.
    Exact,
    /// Reciprocal of the summed distance between O-RUs in different EDUs.
    #[default]
    PairwiseSurrogate,
}

/// Deployment fitness; larger is better and favours interleaved groups.
/// A zero denominator (co-located O-RUs, or a single EDU in exact mode) yields `+inf`.
pub fn fitness(partition: &Partition, oru_distance: &DMatrix<f64>, mode: FitnessMode) -> Result<f64> {
    let l = partition.num_oru();
    if oru_distance.shape() != (l, l) {
        return Err(Error::Domain(format!(
            "distance matrix is {:?}, partition has {l} O-RUs",
            oru_distance.shape()
        )));
    }
    let denom = match mode {
        FitnessMode::Exact => exact_denominator(partition, oru_distance)?,
        FitnessMode::PairwiseSurrogate => surrogate_denominator(partition.genome(), oru_distance),
    };
    Ok(if denom > 0.0 { 1.0 / denom } else { f64::INFINITY })
}

fn surrogate_denominator(genome: &[usize], d: &DMatrix<f64>) -> f64 {
    let mut sum = 0.0;
    for p in 0..genome.len() {
        for q in p + 1..genome.len() {
            if genome[p] != genome[q] {
                sum += d[(p, q)];
            }
        }
    }
    sum
}

fn exact_denominator(partition: &Partition, d: &DMatrix<f64>) -> Result<f64> {
    let groups = partition.groups();
    let count: u128 = groups.iter().map(|g| g.len() as u128).product();
    if count > MAX_EXACT_TUPLES {
        return Err(Error::TooLarge(format!(
            "exact fitness needs {count} tuples (limit {MAX_EXACT_TUPLES}); use fitness_mode = \"pairwise-surrogate\""
        )));
    }
    let m = groups.len();
    let mut idx = vec![0usize; m];
    let mut sum = 0.0;
    loop {
        let mut sq = 0.0;
        for a in 0..m {
            for b in a + 1..m {
                let x = d[(groups[a][idx[a]], groups[b][idx[b]])];
                sq += x * x;
            }
        }
        sum += sq.sqrt();
        // Odometer increment over the tuple indices.
        let mut pos = 0;
        loop {
            if pos == m {
                return Ok(sum);
            }
            idx[pos] += 1;
            if idx[pos] < groups[pos].len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}
