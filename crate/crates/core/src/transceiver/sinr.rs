//! Use-and-then-forget SINR estimation by sample averaging over realizations.

use nalgebra::DMatrix;
use rand::Rng;
use serde::Serialize;

use crate::channel::Realization;
use crate::error::Result;
use crate::linalg::{complex_normal, dotc_range, CVector};
use crate::power::{downlink_power, radiated_power};
use crate::C64;

use super::combiner::{combiners, MmseContext, ProcessingPlan, SinrForm};
use super::quantizer::{quantize, QuantizerBits};
use super::scheme::Link;
use super::serving::Association;

/// Spectral efficiency `log2(1 + sinr)` in bit/s/Hz.
pub fn se_from_sinr(sinr: f64) -> f64 {
    (1.0 + sinr).log2()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UeSinr {
    /// Coherent (numerator) term.
    pub signal: f64,
    /// Multi-user interference (including beamforming-gain uncertainty on the downlink).
    pub interference: f64,
    /// Noise term after combining.
    pub noise: f64,
    /// Fronthaul quantization distortion (uplink only).
    pub distortion: f64,
    pub sinr: f64,
    pub se: f64,
    /// False when no O-RU serves the UE; all terms are then zero.
    pub served: bool,
}

impl UeSinr {
    fn unserved() -> Self {
        Self {
            signal: 0.0,
            interference: 0.0,
            noise: 0.0,
            distortion: 0.0,
            sinr: 0.0,
            se: 0.0,
            served: false,
        }
    }

    fn new(signal: f64, interference: f64, noise: f64, distortion: f64) -> Self {
        let denom = interference + noise + distortion;
        assert!(denom > 0.0, "SINR denominator must be positive");
        let sinr = signal / denom;
        assert!(sinr.is_finite() && sinr >= 0.0);
        Self {
            signal,
            interference,
            noise,
            distortion,
            sinr,
            se: se_from_sinr(sinr),
            served: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SinrReport {
    pub link: Link,
    pub ues: Vec<UeSinr>,
}

impl SinrReport {
    pub fn sum_se(&self) -> f64 {
        self.ues.iter().map(|u| u.se).sum()
    }

    pub fn sinr(&self) -> Vec<f64> {
        self.ues.iter().map(|u| u.sinr).collect()
    }
}

/// Inner products `a_k^H b_i` for all pairs, either directly over the stacked
/// vectors or as a sum of per-unit partial products.
fn pair_products(a: &[CVector], b: &[CVector], groups: &[Vec<usize>], antennas: usize, form: SinrForm) -> DMatrix<C64> {
    let k = a.len();
    DMatrix::from_fn(k, b.len(), |x, y| match form {
        SinrForm::Centralized => a[x].dotc(&b[y]),
        SinrForm::PerUnit => groups
            .iter()
            .map(|g| {
                g.iter()
                    .map(|&l| dotc_range(&a[x], &b[y], l * antennas, antennas))
                    .sum::<C64>()
            })
            .sum(),
    })
}

/// Running sums for the uplink SINR of one scheme.
#[derive(Debug, Clone)]
pub struct UplinkAccumulator {
    groups: Vec<Vec<usize>>,
    antennas: usize,
    form: SinrForm,
    signal: Vec<C64>,
    cross: DMatrix<f64>,
    norm: Vec<f64>,
    count: usize,
    /// Per-UE, per-unit detected symbols across realizations (quantized links only).
    detections: Option<Vec<Vec<Vec<C64>>>>,
}

impl UplinkAccumulator {
    pub fn new(plan: &ProcessingPlan, antennas: usize, quantized: bool) -> Self {
        let k = plan.num_ue();
        Self {
            groups: plan.groups.clone(),
            antennas,
            form: plan.form,
            signal: vec![C64::new(0.0, 0.0); k],
            cross: DMatrix::zeros(k, k),
            norm: vec![0.0; k],
            count: 0,
            detections: quantized.then(|| vec![vec![Vec::new(); plan.groups.len()]; k]),
        }
    }

    /// Adds one realization. When quantization is active, `symbols` supplies
    /// the RNG plus per-UE powers and noise level used to synthesise the
    /// received signal `y = sum_i sqrt(p_i) h_i s_i + z`.
    pub fn push<R: Rng + ?Sized>(
        &mut self,
        h: &[CVector],
        v: &[CVector],
        symbols: Option<(&mut R, &[f64], f64)>,
    ) {
        let prod = pair_products(v, h, &self.groups, self.antennas, self.form);
        for k in 0..v.len() {
            self.signal[k] += prod[(k, k)];
            for i in 0..h.len() {
                self.cross[(k, i)] += prod[(k, i)].norm_sqr();
            }
            self.norm[k] += v[k].norm_squared();
        }
        self.count += 1;

        if let (Some(det), Some((rng, powers, noise))) = (self.detections.as_mut(), symbols) {
            let dim = h[0].len();
            let mut y = complex_normal(rng, dim) * C64::new(noise.sqrt(), 0.0);
            for (i, hi) in h.iter().enumerate() {
                let s = qpsk(rng) * powers[i].sqrt();
                y.axpy(s, hi, C64::new(1.0, 0.0));
            }
            for (k, vk) in v.iter().enumerate() {
                for (m, g) in self.groups.iter().enumerate() {
                    let s: C64 = g
                        .iter()
                        .map(|&l| dotc_range(vk, &y, l * self.antennas, self.antennas))
                        .sum();
                    det[k][m].push(s);
                }
            }
        }
    }

    pub fn finish(&self, powers: &[f64], noise: f64, bits: QuantizerBits) -> SinrReport {
        let r = self.count.max(1) as f64;
        let ues = (0..self.signal.len())
            .map(|k| {
                let nrm = self.norm[k] / r;
                if nrm == 0.0 {
                    return UeSinr::unserved();
                }
                let signal = powers[k] * (self.signal[k] / r).norm_sqr();
                let interference: f64 = (0..self.signal.len())
                    .filter(|&i| i != k)
                    .map(|i| powers[i] * self.cross[(k, i)] / r)
                    .sum();
                let distortion = self
                    .detections
                    .as_ref()
                    .map_or(0.0, |det| quantization_distortion(&det[k], bits));
                UeSinr::new(signal, interference, noise * nrm, distortion)
            })
            .collect();
        SinrReport {
            link: Link::Uplink,
            ues,
        }
    }
}

fn qpsk<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let re = if rng.random::<bool>() { s } else { -s };
    let im = if rng.random::<bool>() { s } else { -s };
    C64::new(re, im)
}

/// Mean squared error added at the UCDU when every unit's detected stream is quantized.
fn quantization_distortion(per_unit: &[Vec<C64>], bits: QuantizerBits) -> f64 {
    let Some(first) = per_unit.first() else {
        return 0.0;
    };
    let mut err = vec![C64::new(0.0, 0.0); first.len()];
    for batch in per_unit {
        for (e, (q, x)) in err.iter_mut().zip(quantize(batch, bits).iter().zip(batch)) {
            *e += q - x;
        }
    }
    err.iter().map(|e| e.norm_sqr()).sum::<f64>() / err.len().max(1) as f64
}

/// Downlink evaluation result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DownlinkOutcome {
    pub report: SinrReport,
    pub powers_mw: Vec<f64>,
    /// Per UE `omega_k`; `None` for UEs with a vanishing precoder.
    pub omega: Vec<Option<f64>>,
    pub radiated_mw: Vec<f64>,
    pub excluded: Vec<usize>,
}

/// Running sums for the downlink SINR of one scheme.
#[derive(Debug, Clone)]
pub struct DownlinkAccumulator {
    groups: Vec<Vec<usize>>,
    antennas: usize,
    form: SinrForm,
    signal: Vec<C64>,
    cross: DMatrix<f64>,
    norm: Vec<f64>,
    oru_energy: DMatrix<f64>,
    count: usize,
}

impl DownlinkAccumulator {
    pub fn new(plan: &ProcessingPlan, antennas: usize) -> Self {
        let k = plan.num_ue();
        Self {
            groups: plan.groups.clone(),
            antennas,
            form: plan.form,
            signal: vec![C64::new(0.0, 0.0); k],
            cross: DMatrix::zeros(k, k),
            norm: vec![0.0; k],
            oru_energy: DMatrix::zeros(k, plan.association.num_oru()),
            count: 0,
        }
    }

    /// Adds one realization of downlink channels `h` and unnormalised precoders `w`.
    pub fn push(&mut self, h: &[CVector], w: &[CVector]) {
        // prod[(k, i)] = h_k^H w_i
        let prod = pair_products(h, w, &self.groups, self.antennas, self.form);
        let n = self.antennas;
        for k in 0..h.len() {
            self.signal[k] += prod[(k, k)];
            for i in 0..w.len() {
                self.cross[(k, i)] += prod[(k, i)].norm_sqr();
            }
            self.norm[k] += w[k].norm_squared();
            for l in 0..self.oru_energy.ncols() {
                self.oru_energy[(k, l)] += w[k].rows(l * n, n).norm_squared();
            }
        }
        self.count += 1;
    }

    /// Normalises the precoders, allocates power and evaluates the SINR.
    pub fn finish(
        &self,
        association: &Association,
        lambda: &DMatrix<f64>,
        p_max: f64,
        noise: f64,
    ) -> Result<DownlinkOutcome> {
        let r = self.count.max(1) as f64;
        let k_total = self.signal.len();
        let mean_norm: Vec<f64> = self.norm.iter().map(|x| x / r).collect();
        let energy = DMatrix::from_fn(k_total, self.oru_energy.ncols(), |k, l| {
            if mean_norm[k] > 0.0 {
                self.oru_energy[(k, l)] / r / mean_norm[k]
            } else {
                0.0
            }
        });
        let omega: Vec<Option<f64>> = (0..k_total)
            .map(|k| {
                (mean_norm[k] > 0.0).then(|| {
                    association
                        .serving_orus(k)
                        .iter()
                        .map(|&l| energy[(k, l)])
                        .fold(0.0, f64::max)
                })
            })
            .collect();
        let (powers, excluded) = downlink_power(lambda, &omega, association, p_max)?;
        // Scale factor from w' to w = sqrt(p) w' / sqrt(E||w'||^2), squared.
        let gain: Vec<f64> = (0..k_total)
            .map(|k| if mean_norm[k] > 0.0 { powers[k] / mean_norm[k] } else { 0.0 })
            .collect();

        let ues = (0..k_total)
            .map(|k| {
                if mean_norm[k] == 0.0 || powers[k] == 0.0 {
                    return UeSinr::unserved();
                }
                let signal = gain[k] * (self.signal[k] / r).norm_sqr();
                let total: f64 = (0..k_total).map(|i| gain[i] * self.cross[(k, i)] / r).sum();
                // E|h^H w|^2 >= |E h^H w|^2; clamp rounding.
                let interference = (total - signal).max(0.0);
                UeSinr::new(signal, interference, noise, 0.0)
            })
            .collect();
        let radiated_mw = radiated_power(&powers, &energy, association);
        Ok(DownlinkOutcome {
            report: SinrReport {
                link: Link::Downlink,
                ues,
            },
            powers_mw: powers,
            omega,
            radiated_mw,
            excluded,
        })
    }
}

/// Uplink SINR of `plan` over a batch of realizations; combiners are rebuilt
/// per realization from that realization's estimates.
pub fn uplink_sinr<R: Rng + ?Sized>(
    plan: &ProcessingPlan,
    ctx: &MmseContext,
    realizations: &[Realization],
    bits: QuantizerBits,
    rng: &mut R,
) -> SinrReport {
    let quantized = bits != QuantizerBits::Infinite;
    let mut acc = UplinkAccumulator::new(plan, ctx.antennas, quantized);
    for real in realizations {
        let v = combiners(plan, ctx, &real.hhat);
        let sym = quantized.then_some((&mut *rng, ctx.powers.as_slice(), ctx.noise));
        acc.push(&real.h, &v, sym);
    }
    acc.finish(&ctx.powers, ctx.noise, bits)
}

/// Downlink SINR of `plan`: precoders follow the uplink MMSE (or MR) design,
/// are normalised over the batch and scaled by the heuristic power allocation.
pub fn downlink_sinr(
    plan: &ProcessingPlan,
    ctx: &MmseContext,
    realizations: &[Realization],
    lambda: &DMatrix<f64>,
    p_max: f64,
    noise_dl: f64,
) -> Result<DownlinkOutcome> {
    let mut acc = DownlinkAccumulator::new(plan, ctx.antennas);
    for real in realizations {
        let w = combiners(plan, ctx, &real.hhat);
        acc.push(&real.h, &w);
    }
    acc.finish(&plan.association, lambda, p_max, noise_dl)
}
