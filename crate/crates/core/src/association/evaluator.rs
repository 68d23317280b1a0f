use std::collections::HashMap;

use nalgebra::DMatrix;
use rand::Rng;

use super::EduAssociation;
use crate::channel::ChannelSet;
use crate::deployment::Partition;
use crate::error::{Error, Result};
use crate::linalg::dotc_range;
use crate::transceiver::{mmse_combiners, se_from_sinr, Association, MmseContext, ProcessingPlan, Scheme};
use crate::C64;

/// Scores a candidate UE to EDU association by its uplink sum SE.
pub trait SeEvaluator {
    fn sum_se(&mut self, association: &EduAssociation) -> Result<f64>;
}

impl<F: FnMut(&EduAssociation) -> Result<f64>> SeEvaluator for F {
    fn sum_se(&mut self, association: &EduAssociation) -> Result<f64> {
        self(association)
    }
}

/// Uplink EDU-PMMSE sum SE from channel statistics only.
///
/// Each EDU's combiner for UE `k` is the MMSE vector over the EDU's antennas
/// and does not depend on which other EDUs serve `k`, so the moments of the
/// per-EDU effective channels `g_{k,i,m} = v_{k,m}^H h_{i,m}` can be sampled
/// once from synthetic realizations drawn from the correlation model. Any
/// association is then scored from those moments, and since a UE's SINR only
/// depends on its own set of serving EDUs, per-UE results are cached by mask.
#[derive(Debug, Clone)]
pub struct MomentEvaluator {
    num_ue: usize,
    num_edu: usize,
    powers: Vec<f64>,
    noise: f64,
    /// `E[g_{k,k,m}]`, K x M.
    mean: DMatrix<C64>,
    /// `E[g_{k,i,m} conj(g_{k,i,m'})]` at `[(k * K + i) * M * M + m * M + m']`.
    second: Vec<C64>,
    /// `E ||v_{k,m}||^2`, K x M.
    norm: DMatrix<f64>,
    cache: HashMap<(usize, u64), f64>,
}

impl MomentEvaluator {
    pub fn new<R: Rng + ?Sized>(
        channels: &ChannelSet,
        partition: &Partition,
        powers: &[f64],
        noise: f64,
        realizations: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let k_total = channels.num_ue;
        let m_total = partition.num_edu();
        if m_total > 63 {
            return Err(Error::TooLarge(format!("{m_total} EDUs exceed the 63-EDU mask width")));
        }
        if realizations == 0 {
            return Err(Error::Domain("proxy needs at least one realization".into()));
        }
        let ctx = MmseContext::new(channels, powers, noise)?;
        let plan = ProcessingPlan::for_scheme(
            Scheme::EduPmmse,
            partition,
            &Association::all(k_total, channels.num_oru),
        );
        let groups = partition.groups();
        let n = channels.antennas;
        let mut mean = DMatrix::zeros(k_total, m_total);
        let mut second = vec![C64::new(0.0, 0.0); k_total * k_total * m_total * m_total];
        let mut norm = DMatrix::zeros(k_total, m_total);
        let mut g = vec![C64::new(0.0, 0.0); m_total];

        for _ in 0..realizations {
            let real = channels.draw(rng);
            let v = mmse_combiners(&plan, &ctx, &real.hhat);
            for k in 0..k_total {
                for (m, grp) in groups.iter().enumerate() {
                    norm[(k, m)] += grp
                        .iter()
                        .map(|&l| v[k].rows(l * n, n).norm_squared())
                        .sum::<f64>();
                }
                for i in 0..k_total {
                    for (m, grp) in groups.iter().enumerate() {
                        g[m] = grp.iter().map(|&l| dotc_range(&v[k], &real.h[i], l * n, n)).sum();
                    }
                    if i == k {
                        for m in 0..m_total {
                            mean[(k, m)] += g[m];
                        }
                    }
                    let base = (k * k_total + i) * m_total * m_total;
                    for a in 0..m_total {
                        for b in 0..m_total {
                            second[base + a * m_total + b] += g[a] * g[b].conj();
                        }
                    }
                }
            }
        }
        let r = realizations as f64;
        mean /= C64::new(r, 0.0);
        norm /= r;
        for x in &mut second {
            *x /= r;
        }
        Ok(Self {
            num_ue: k_total,
            num_edu: m_total,
            powers: powers.to_vec(),
            noise,
            mean,
            second,
            norm,
            cache: HashMap::new(),
        })
    }

    /// SE of UE `k` when served by the EDUs in bit mask `mask`.
    pub fn ue_se(&mut self, k: usize, mask: u64) -> f64 {
        if let Some(&se) = self.cache.get(&(k, mask)) {
            return se;
        }
        let se = self.compute(k, mask);
        self.cache.insert((k, mask), se);
        se
    }

    fn compute(&self, k: usize, mask: u64) -> f64 {
        let set: Vec<usize> = (0..self.num_edu).filter(|&m| mask >> m & 1 == 1).collect();
        if set.is_empty() {
            return 0.0;
        }
        let mm = self.num_edu;
        let signal = self.powers[k] * set.iter().map(|&m| self.mean[(k, m)]).sum::<C64>().norm_sqr();
        let mut interference = 0.0;
        for i in (0..self.num_ue).filter(|&i| i != k) {
            let base = (k * self.num_ue + i) * mm * mm;
            let e: f64 = set
                .iter()
                .flat_map(|&a| set.iter().map(move |&b| (a, b)))
                .map(|(a, b)| self.second[base + a * mm + b].re)
                .sum();
            interference += self.powers[i] * e.max(0.0);
        }
        let noise = self.noise * set.iter().map(|&m| self.norm[(k, m)]).sum::<f64>();
        let denom = interference + noise;
        if denom > 0.0 {
            se_from_sinr(signal / denom)
        } else {
            0.0
        }
    }
}

impl SeEvaluator for MomentEvaluator {
    fn sum_se(&mut self, association: &EduAssociation) -> Result<f64> {
        if association.num_ue() != self.num_ue || association.num_edu() != self.num_edu {
            return Err(Error::Domain(format!(
                "association is {}x{}, evaluator expects {}x{}",
                association.num_ue(),
                association.num_edu(),
                self.num_ue,
                self.num_edu
            )));
        }
        let mut total = 0.0;
        for k in 0..self.num_ue {
            let mask = (0..self.num_edu)
                .filter(|&m| association.serves(k, m))
                .fold(0u64, |acc, m| acc | 1 << m);
            total += self.ue_se(k, mask);
        }
        Ok(total)
    }
}
