//! Combining and precoding vectors.
//!
//! MMSE vectors for a processing unit (EDU) holding O-RU set `S` are
//!
//! `v_k = p_k (sum_i p_i D_k (hhat_i hhat_i^H + C_i) D_k + noise I)^-1 D_k hhat_k`
//!
//! The error covariances are block diagonal per O-RU, so the system matrix is
//! a block-diagonal part `A` plus the rank-K term `H P H^H`. Solving through
//! the Woodbury identity costs `O(|S| N K^2 + K^3)` instead of `O((|S| N)^3)`:
//!
//! `M^-1 H P = X P (I + G P)^-1`, with `X = A^-1 H` and `G = H^H X`.

use std::collections::BTreeMap;

use crate::channel::ChannelSet;
use crate::deployment::Partition;
use crate::error::{Error, Result};
use crate::linalg::{trace_re, CMatrix, CVector};
use crate::C64;

use super::scheme::{Grouping, Processing, Scheme};
use super::serving::Association;

/// Condition-number bound above which a solve is reported and regularised.
pub const CONDITION_LIMIT: f64 = 1e12;

/// How a scheme processes one drop: processing units, service mask and vector type.
#[derive(Debug, Clone)]
pub struct ProcessingPlan {
    pub scheme: Option<Scheme>,
    /// O-RU indices per processing unit; unit `m` is EDU `m`.
    pub groups: Vec<Vec<usize>>,
    pub association: Association,
    pub processing: Processing,
    pub form: SinrForm,
}

/// Which SINR expression evaluates a plan: the centralized one over stacked
/// vectors, or the per-EDU one that sums each unit's partial statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SinrForm {
    Centralized,
    PerUnit,
}

impl ProcessingPlan {
    pub fn new(groups: Vec<Vec<usize>>, association: Association, processing: Processing) -> Self {
        Self {
            scheme: None,
            groups,
            association,
            processing,
            form: SinrForm::PerUnit,
        }
    }

    /// Resolves a scheme against the deployment partition and the dynamic
    /// association (used only by schemes with partial service).
    pub fn for_scheme(scheme: Scheme, partition: &Partition, dcc: &Association) -> Self {
        let num_oru = partition.num_oru();
        let groups = match scheme.grouping() {
            Grouping::Central => vec![(0..num_oru).collect()],
            Grouping::PerOru => (0..num_oru).map(|l| vec![l]).collect(),
            Grouping::Edu => partition.groups(),
        };
        let association = if scheme.uses_dcc() {
            dcc.clone()
        } else {
            Association::all(dcc.num_ue(), num_oru)
        };
        Self {
            scheme: Some(scheme),
            groups,
            association,
            processing: scheme.processing(),
            form: if scheme.grouping() == Grouping::Central {
                SinrForm::Centralized
            } else {
                SinrForm::PerUnit
            },
        }
    }

    pub fn num_ue(&self) -> usize {
        self.association.num_ue()
    }
}

/// Per-drop quantities shared by every MMSE solve: inverses of the
/// block-diagonal part `sum_i p_i C_{i,l} + noise I` for each O-RU.
#[derive(Debug, Clone)]
pub struct MmseContext {
    pub antennas: usize,
    pub noise: f64,
    pub powers: Vec<f64>,
    block_inv: Vec<CMatrix>,
    block_trace: Vec<f64>,
}

impl MmseContext {
    pub fn new(channels: &ChannelSet, powers: &[f64], noise: f64) -> Result<Self> {
        if powers.len() != channels.num_ue {
            return Err(Error::Domain("one power per UE required".into()));
        }
        if !(noise > 0.0) {
            return Err(Error::Domain("noise power must be positive".into()));
        }
        let n = channels.antennas;
        let mut block_inv = Vec::with_capacity(channels.num_oru);
        let mut block_trace = Vec::with_capacity(channels.num_oru);
        for l in 0..channels.num_oru {
            let mut a = CMatrix::identity(n, n) * C64::new(noise, 0.0);
            if !channels.perfect_csi() {
                for (i, &p) in powers.iter().enumerate() {
                    a += channels.error_covariance(i, l) * C64::new(p, 0.0);
                }
            }
            block_trace.push(trace_re(&a));
            let inv = a
                .clone()
                .cholesky()
                .map(|c| c.inverse())
                .or_else(|| a.try_inverse())
                .ok_or_else(|| Error::Domain(format!("O-RU {l} covariance block is singular")))?;
            block_inv.push(inv);
        }
        Ok(Self {
            antennas: n,
            noise,
            powers: powers.to_vec(),
            block_inv,
            block_trace,
        })
    }
}

/// Maximum-ratio vectors `v_k = D_k hhat_k`.
pub fn mrc_combiners(association: &Association, hhat: &[CVector], antennas: usize) -> Vec<CVector> {
    hhat.iter()
        .enumerate()
        .map(|(k, h)| {
            let mut v = h.clone();
            for l in 0..association.num_oru() {
                if !association.serves(k, l) {
                    v.rows_mut(l * antennas, antennas).fill(C64::new(0.0, 0.0));
                }
            }
            v
        })
        .collect()
}

/// MMSE vectors for every UE, stacked over all O-RUs (zero where not served).
pub fn mmse_combiners(plan: &ProcessingPlan, ctx: &MmseContext, hhat: &[CVector]) -> Vec<CVector> {
    let k_total = hhat.len();
    let dim = hhat.first().map_or(0, |h| h.len());
    let n = ctx.antennas;
    let mut out = vec![CVector::zeros(dim); k_total];

    for group in &plan.groups {
        // UEs sharing the same served subset of this unit share one solve.
        let mut by_mask: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for k in 0..k_total {
            let served: Vec<usize> = group
                .iter()
                .copied()
                .filter(|&l| plan.association.serves(k, l))
                .collect();
            if !served.is_empty() {
                by_mask.entry(served).or_default().push(k);
            }
        }
        for (served, ues) in by_mask {
            let cols = woodbury_solve(&served, &ues, ctx, hhat);
            for (&k, v) in ues.iter().zip(cols) {
                for (j, &l) in served.iter().enumerate() {
                    out[k].rows_mut(l * n, n).copy_from(&v.rows(j * n, n));
                }
            }
        }
    }
    out
}

/// Solves the MMSE system on O-RU set `served` for the UEs in `ues`; returns
/// one length-`|served| N` vector per requested UE.
fn woodbury_solve(served: &[usize], ues: &[usize], ctx: &MmseContext, hhat: &[CVector]) -> Vec<CVector> {
    let n = ctx.antennas;
    let dim = served.len() * n;
    let k_total = hhat.len();

    let mut h = CMatrix::zeros(dim, k_total);
    for (i, hi) in hhat.iter().enumerate() {
        for (j, &l) in served.iter().enumerate() {
            h.view_mut((j * n, i), (n, 1)).copy_from(&hi.rows(l * n, n));
        }
    }
    let mut x = CMatrix::zeros(dim, k_total);
    for (j, &l) in served.iter().enumerate() {
        let blk = &ctx.block_inv[l] * h.rows(j * n, n);
        x.rows_mut(j * n, n).copy_from(&blk);
    }
    let g = h.adjoint() * &x;

    let mut t = g.clone();
    for (i, &p) in ctx.powers.iter().enumerate() {
        t.column_mut(i).scale_mut(p);
    }
    for i in 0..k_total {
        t[(i, i)] += C64::new(1.0, 0.0);
    }

    // Upper bound on the condition number: lambda_min >= noise, lambda_max <= trace.
    let bound = (served.iter().map(|&l| ctx.block_trace[l]).sum::<f64>()
        + (0..k_total)
            .map(|i| ctx.powers[i] * h.column(i).norm_squared())
            .sum::<f64>())
        / ctx.noise;
    if bound > CONDITION_LIMIT {
        log::warn!("MMSE system condition bound {bound:e} exceeds {CONDITION_LIMIT:e}");
    }

    let t_inv = t.clone().try_inverse().unwrap_or_else(|| {
        let jitter = 1e-12 * trace_re(&t).abs() / k_total as f64;
        log::warn!("MMSE system singular; adding diagonal jitter {jitter:e}");
        let mut tj = t;
        for i in 0..k_total {
            tj[(i, i)] += C64::new(jitter, 0.0);
        }
        tj.try_inverse().expect("jittered MMSE system must be invertible")
    });

    let mut xp = x;
    for (i, &p) in ctx.powers.iter().enumerate() {
        xp.column_mut(i).scale_mut(p);
    }
    ues.iter().map(|&k| &xp * t_inv.column(k)).collect()
}

/// Combiners (or unnormalised precoders) of `plan` for one realization's estimates.
pub fn combiners(plan: &ProcessingPlan, ctx: &MmseContext, hhat: &[CVector]) -> Vec<CVector> {
    match plan.processing {
        Processing::Mmse => mmse_combiners(plan, ctx, hhat),
        Processing::MaxRatio => mrc_combiners(&plan.association, hhat, ctx.antennas),
    }
}

/// Reference MMSE vector from an explicitly formed system on O-RU set
/// `served` (dense LU, no structure exploited). Length `|served| N`.
pub fn mmse_combiner_dense(
    channels: &ChannelSet,
    powers: &[f64],
    noise: f64,
    served: &[usize],
    ue: usize,
    hhat: &[CVector],
) -> CVector {
    let n = channels.antennas;
    let dim = served.len() * n;
    let slice = |v: &CVector| {
        CVector::from_fn(dim, |r, _| v[served[r / n] * n + r % n])
    };
    let mut m = CMatrix::identity(dim, dim) * C64::new(noise, 0.0);
    for (i, &p) in powers.iter().enumerate() {
        let hs = slice(&hhat[i]);
        m += (&hs * hs.adjoint()) * C64::new(p, 0.0);
        for (j, &l) in served.iter().enumerate() {
            let c = channels.error_covariance(i, l) * C64::new(p, 0.0);
            let mut view = m.view_mut((j * n, j * n), (n, n));
            view += c;
        }
    }
    let rhs = slice(&hhat[ue]) * C64::new(powers[ue], 0.0);
    m.lu().solve(&rhs).expect("noise-regularised system is invertible")
}

/// Normalises unnormalised precoders `w'` sampled over realizations
/// (`samples[r][k]`): `w_bar_k = w'_k / sqrt(E ||w'_k||^2)`.
///
/// Returns the normalised samples and, per UE, `omega_k = max_{l in M_k}
/// E ||w_bar_{k,l}||^2`. UEs whose precoder is identically zero get `None`.
pub fn normalize_precoders(
    samples: &[Vec<CVector>],
    association: &Association,
    antennas: usize,
) -> (Vec<Vec<CVector>>, Vec<Option<f64>>) {
    let num_ue = association.num_ue();
    let num_oru = association.num_oru();
    let r = samples.len().max(1) as f64;
    let mut total = vec![0.0; num_ue];
    let mut per_oru = vec![vec![0.0; num_oru]; num_ue];
    for real in samples {
        for (k, w) in real.iter().enumerate() {
            for l in 0..num_oru {
                let e = w.rows(l * antennas, antennas).norm_squared();
                per_oru[k][l] += e;
                total[k] += e;
            }
        }
    }
    let scale: Vec<f64> = total
        .iter()
        .map(|&t| if t > 0.0 { (r / t).sqrt() } else { 0.0 })
        .collect();
    let normalized = samples
        .iter()
        .map(|real| {
            real.iter()
                .enumerate()
                .map(|(k, w)| w * C64::new(scale[k], 0.0))
                .collect()
        })
        .collect();
    let omega = (0..num_ue)
        .map(|k| {
            (total[k] > 0.0).then(|| {
                association
                    .serving_orus(k)
                    .iter()
                    .map(|&l| per_oru[k][l] / total[k])
                    .fold(0.0, f64::max)
            })
        })
        .collect();
    (normalized, omega)
}
