use serde::Serialize;

use crate::deployment::Partition;

/// Binary UE to O-RU service indicators `delta_{k,l}`.
///
/// The diagonal mask `D_k` is `diag(delta_{k,1..L}) (x) I_N`, so a UE's combiner
/// or precoder is non-zero only on the antennas of its serving O-RUs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Association {
    num_ue: usize,
    num_oru: usize,
    delta: Vec<bool>,
}

impl Association {
    pub fn all(num_ue: usize, num_oru: usize) -> Self {
        Self {
            num_ue,
            num_oru,
            delta: vec![true; num_ue * num_oru],
        }
    }

    pub fn none(num_ue: usize, num_oru: usize) -> Self {
        Self {
            num_ue,
            num_oru,
            delta: vec![false; num_ue * num_oru],
        }
    }

    pub fn from_fn(num_ue: usize, num_oru: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let delta = (0..num_ue * num_oru).map(|i| f(i / num_oru, i % num_oru)).collect();
        Self {
            num_ue,
            num_oru,
            delta,
        }
    }

    /// Expands a UE x EDU association to O-RU level: UE k is served by every
    /// O-RU of each EDU it is associated with.
    pub fn from_edu(edu_served: impl Fn(usize, usize) -> bool, num_ue: usize, partition: &Partition) -> Self {
        Self::from_fn(num_ue, partition.num_oru(), |k, l| edu_served(k, partition.edu_of(l)))
    }

    pub fn num_ue(&self) -> usize {
        self.num_ue
    }

    pub fn num_oru(&self) -> usize {
        self.num_oru
    }

    #[inline]
    pub fn serves(&self, ue: usize, oru: usize) -> bool {
        self.delta[ue * self.num_oru + oru]
    }

    pub fn set(&mut self, ue: usize, oru: usize, served: bool) {
        self.delta[ue * self.num_oru + oru] = served;
    }

    /// `M_k`: O-RUs serving UE `ue`.
    pub fn serving_orus(&self, ue: usize) -> Vec<usize> {
        (0..self.num_oru).filter(|&l| self.serves(ue, l)).collect()
    }

    /// `D_l`: UEs served by O-RU `oru`.
    pub fn served_ues(&self, oru: usize) -> Vec<usize> {
        (0..self.num_ue).filter(|&k| self.serves(k, oru)).collect()
    }

    /// Diagonal of `D_k` over `antennas` antennas per O-RU.
    pub fn mask_diagonal(&self, ue: usize, antennas: usize) -> Vec<f64> {
        (0..self.num_oru * antennas)
            .map(|i| if self.serves(ue, i / antennas) { 1.0 } else { 0.0 })
            .collect()
    }

    /// True when every UE's indicators are constant over each EDU group.
    pub fn is_edu_granular(&self, partition: &Partition) -> bool {
        (0..self.num_ue).all(|k| {
            partition.groups().iter().all(|g| {
                g.iter().all(|&l| self.serves(k, l) == self.serves(k, g[0]))
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edu_expansion_is_block_constant() {
        let p = Partition::from_genome(vec![0, 1, 0, 1], 2).unwrap();
        let a = Association::from_edu(|k, m| k == m, 2, &p);
        assert_eq!(a.serving_orus(0), vec![0, 2]);
        assert_eq!(a.serving_orus(1), vec![1, 3]);
        assert_eq!(a.served_ues(3), vec![1]);
        assert!(a.is_edu_granular(&p));
        assert_eq!(a.mask_diagonal(0, 2), vec![1.0, 1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0]);
        let mut b = a.clone();
        b.set(0, 0, false);
        assert!(!b.is_edu_granular(&p));
    }
}
