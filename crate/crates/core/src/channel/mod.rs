//! Large-scale fading, spatial correlation, correlated Rayleigh realizations
//! and MMSE channel estimates.

mod correlation;
mod estimation;

pub use correlation::{spatial_correlation, GaussLegendre, TRUNCATION_SIGMAS};
pub use estimation::MmseEstimator;

use std::io::Write;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::linalg::{complex_normal, hermitian_sqrt, CMatrix, CVector};
use crate::scenario::{stream_rng, PathlossModel, ScenarioConfig, Stream, Topology};
use crate::C64;

/// Channel gain in dB at distance `d` metres.
pub fn pathloss_db(model: PathlossModel, d: f64) -> Result<f64> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::Domain(format!("pathloss distance must be > 0, got {d}")));
    }
    Ok(match model {
        PathlossModel::LogDistance { intercept_db, slope_db } => intercept_db - slope_db * d.log10(),
        PathlossModel::PowerLaw { exponent } => -10.0 * exponent * d.log10(),
    })
}

/// Linear gain of the urban log-distance model `-30.5 - 36.7 log10(d)` dB.
pub fn pathloss_linear(d: f64) -> Result<f64> {
    pathloss_db(PathlossModel::default(), d).map(db_to_linear)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Zero-mean Gaussian shadowing in dB.
pub fn sample_shadowing<R: Rng + ?Sized>(rng: &mut R, sigma_db: f64) -> f64 {
    if sigma_db == 0.0 {
        return 0.0;
    }
    Normal::new(0.0, sigma_db)
        .expect("shadowing sigma validated non-negative")
        .sample(rng)
}

/// Large-scale gains for every (UE, O-RU) pair.
#[derive(Debug, Clone)]
pub struct LargeScale {
    /// K x L linear gains including shadowing.
    pub beta: DMatrix<f64>,
    /// K x L shadowing realisation, dB.
    pub shadow_db: DMatrix<f64>,
}

impl LargeScale {
    pub fn build<R: Rng + ?Sized>(
        topology: &Topology,
        model: PathlossModel,
        shadow_sigma_db: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let (k, l) = topology.ue_oru_distance.shape();
        let mut beta = DMatrix::zeros(k, l);
        let mut shadow_db = DMatrix::zeros(k, l);
        for ue in 0..k {
            for oru in 0..l {
                let f = sample_shadowing(rng, shadow_sigma_db);
                shadow_db[(ue, oru)] = f;
                beta[(ue, oru)] =
                    db_to_linear(pathloss_db(model, topology.ue_oru_distance[(ue, oru)])? + f);
            }
        }
        Ok(Self { beta, shadow_db })
    }
}

/// One channel draw: true channels and their estimates, one `L*N` vector per UE.
#[derive(Debug, Clone)]
pub struct Realization {
    pub h: Vec<CVector>,
    pub hhat: Vec<CVector>,
}

/// Everything needed to draw channels for one drop.
#[derive(Debug, Clone)]
pub struct ChannelSet {
    pub num_ue: usize,
    pub num_oru: usize,
    pub antennas: usize,
    pub beta: DMatrix<f64>,
    correlation: Vec<CMatrix>,
    sqrt_correlation: Vec<CMatrix>,
    estimators: Vec<MmseEstimator>,
    perfect_csi: bool,
}

impl ChannelSet {
    /// Builds correlation blocks from geometry: nominal azimuth is the O-RU to UE
    /// bearing, nominal elevation the (negative) depression angle.
    pub fn build(config: &ScenarioConfig, topology: &Topology, drop_index: u64) -> Result<Self> {
        let mut shadow_rng = stream_rng(config.master_seed, drop_index, Stream::Shadowing);
        let large = LargeScale::build(topology, config.pathloss, config.shadow_sigma_db, &mut shadow_rng)?;
        let rule = GaussLegendre::new(config.quadrature_nodes);
        let (k, l) = large.beta.shape();
        let asd_az = config.asd_azimuth_deg.to_radians();
        let asd_el = config.asd_elevation_deg.to_radians();
        let mut blocks = Vec::with_capacity(k * l);
        for ue in 0..k {
            let u = topology.ue_positions[ue];
            for oru in 0..l {
                let o = topology.oru_positions[oru];
                let (dx, dy, dz) = (u[0] - o[0], u[1] - o[1], u[2] - o[2]);
                let az = dy.atan2(dx);
                let el = dz.atan2(dx.hypot(dy));
                blocks.push(spatial_correlation(
                    az,
                    el,
                    asd_az,
                    asd_el,
                    config.antennas_per_oru,
                    large.beta[(ue, oru)],
                    &rule,
                )?);
            }
        }
        Self::from_blocks(
            large.beta,
            blocks,
            config.antennas_per_oru,
            config.ul_power_mw,
            config.pilot_count,
            config.noise_power_mw(),
        )
    }

    /// Assembles a channel set from explicit correlation blocks, indexed `k * L + l`.
    pub fn from_blocks(
        beta: DMatrix<f64>,
        correlation: Vec<CMatrix>,
        antennas: usize,
        pilot_power: f64,
        pilot_len: usize,
        noise: f64,
    ) -> Result<Self> {
        let (num_ue, num_oru) = beta.shape();
        if correlation.len() != num_ue * num_oru {
            return Err(Error::Domain(format!(
                "expected {} correlation blocks, got {}",
                num_ue * num_oru,
                correlation.len()
            )));
        }
        let mut sqrt_correlation = Vec::with_capacity(correlation.len());
        let mut estimators = Vec::with_capacity(correlation.len());
        for (idx, r) in correlation.iter().enumerate() {
            let (ue, oru) = (idx / num_oru, idx % num_oru);
            if r.nrows() != antennas || r.ncols() != antennas {
                return Err(Error::Domain(format!("block ({ue}, {oru}) has wrong shape")));
            }
            let s = hermitian_sqrt(r, 1e-10).map_err(|reason| Error::Factorization { ue, oru, reason })?;
            sqrt_correlation.push(s);
            estimators.push(MmseEstimator::new(r, pilot_power, pilot_len, noise)?);
        }
        Ok(Self {
            num_ue,
            num_oru,
            antennas,
            beta,
            correlation,
            sqrt_correlation,
            estimators,
            perfect_csi: false,
        })
    }

    /// Estimates equal the true channels and error covariances vanish.
    pub fn with_perfect_csi(mut self) -> Self {
        self.perfect_csi = true;
        self
    }

    pub fn perfect_csi(&self) -> bool {
        self.perfect_csi
    }

    pub fn dim(&self) -> usize {
        self.num_oru * self.antennas
    }

    pub fn correlation(&self, ue: usize, oru: usize) -> &CMatrix {
        &self.correlation[ue * self.num_oru + oru]
    }

    /// Estimation error covariance `C_{k,l}`; zero under perfect CSI.
    pub fn error_covariance(&self, ue: usize, oru: usize) -> CMatrix {
        if self.perfect_csi {
            CMatrix::zeros(self.antennas, self.antennas)
        } else {
            self.estimators[ue * self.num_oru + oru].error_covariance().clone()
        }
    }

    /// Draws `h_k = R_k^{1/2} g_k` for every UE, then pilot observations and
    /// MMSE estimates, block by block.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Realization {
        let n = self.antennas;
        let dim = self.dim();
        let mut h = Vec::with_capacity(self.num_ue);
        let mut hhat = Vec::with_capacity(self.num_ue);
        for ue in 0..self.num_ue {
            let mut hk = CVector::zeros(dim);
            let mut ek = CVector::zeros(dim);
            for oru in 0..self.num_oru {
                let idx = ue * self.num_oru + oru;
                let block = &self.sqrt_correlation[idx] * complex_normal(rng, n);
                let est = if self.perfect_csi {
                    block.clone()
                } else {
                    self.estimators[idx].estimate(&block, rng)
                };
                hk.rows_mut(oru * n, n).copy_from(&block);
                ek.rows_mut(oru * n, n).copy_from(&est);
            }
            h.push(hk);
            hhat.push(ek);
        }
        Realization { h, hhat }
    }

    /// Writes the K x L gain matrix as CSV: header `ue,oru,beta_linear,beta_db`, row-major.
    pub fn write_beta_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["ue", "oru", "beta_linear", "beta_db"])?;
        for k in 0..self.num_ue {
            for l in 0..self.num_oru {
                let b = self.beta[(k, l)];
                w.write_record([
                    k.to_string(),
                    l.to_string(),
                    format!("{b:e}"),
                    format!("{:.6}", 10.0 * b.log10()),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Writes every correlation entry as CSV: header `ue,oru,row,col,re,im`, row-major per block.
    pub fn write_correlation_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["ue", "oru", "row", "col", "re", "im"])?;
        for k in 0..self.num_ue {
            for l in 0..self.num_oru {
                let r = self.correlation(k, l);
                for i in 0..self.antennas {
                    for j in 0..self.antennas {
                        w.write_record([
                            k.to_string(),
                            l.to_string(),
                            i.to_string(),
                            j.to_string(),
                            format!("{:e}", r[(i, j)].re),
                            format!("{:e}", r[(i, j)].im),
                        ])?;
                    }
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Rotates each O-RU's N-antenna block of every vector by a common random
/// phase `theta_l ~ U[-max_deg, max_deg]` (one draw per O-RU per call) and
/// returns the drawn angles in radians.
pub fn apply_phase_drift<R: Rng + ?Sized>(
    vectors: &mut [CVector],
    antennas: usize,
    max_deg: f64,
    rng: &mut R,
) -> Vec<f64> {
    let Some(first) = vectors.first() else {
        return Vec::new();
    };
    let num_oru = first.len() / antennas;
    let max = max_deg.to_radians();
    let angles: Vec<f64> = (0..num_oru)
        .map(|_| if max > 0.0 { rng.random_range(-max..=max) } else { 0.0 })
        .collect();
    if max > 0.0 {
        for v in vectors.iter_mut() {
            for (l, &theta) in angles.iter().enumerate() {
                let rot = C64::from_polar(1.0, theta);
                for i in l * antennas..(l + 1) * antennas {
                    v[i] *= rot;
                }
            }
        }
    }
    angles
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_defect, hermitian_eigenvalues, trace_re};
    use crate::scenario::build_topology;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pathloss_reference_values() {
        let db = |d: f64| 10.0 * pathloss_linear(d).unwrap().log10();
        assert!((db(1.0) + 30.5).abs() < 1e-10);
        assert!((db(100.0) + 103.9).abs() < 1e-10);
        assert!((db(10.0) + 67.2).abs() < 1e-10);
        assert!(pathloss_linear(0.0).is_err());
        assert!(pathloss_linear(-3.0).is_err());
        let pl = pathloss_db(PathlossModel::PowerLaw { exponent: 3.0 }, 10.0).unwrap();
        assert!((pl + 30.0).abs() < 1e-12);
    }

    #[test]
    fn shadowing_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        assert!((0..100).all(|_| sample_shadowing(&mut rng, 0.0) == 0.0));
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|_| sample_shadowing(&mut rng, 4.0)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let std = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        assert!(mean.abs() <= 0.05, "mean {mean}");
        assert!((3.9..=4.1).contains(&std), "std {std}");
    }

    #[test]
    fn identity_correlation_sample_variance() {
        let blocks = vec![CMatrix::identity(4, 4)];
        let set = ChannelSet::from_blocks(DMatrix::from_element(1, 1, 1.0), blocks, 4, 1.0, 1, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 100_000;
        let mut var = [0.0; 4];
        for _ in 0..n {
            let r = set.draw(&mut rng);
            for (i, v) in var.iter_mut().enumerate() {
                *v += r.h[0][i].norm_sqr();
            }
        }
        for v in var {
            let v = v / n as f64;
            assert!((0.98..=1.02).contains(&v), "variance {v}");
        }
    }

    #[test]
    fn rank_one_samples_follow_eigenvector() {
        let a = CVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-0.5, 0.5)]);
        let r = &a * a.adjoint();
        let set = ChannelSet::from_blocks(DMatrix::from_element(1, 1, 1.0), vec![r], 3, 1.0, 1, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let h = &set.draw(&mut rng).h[0];
            let proj = a.dotc(h) / a.dotc(&a);
            assert!((h - &a * proj).norm() < 1e-10 * h.norm().max(1e-300));
        }
    }

    #[test]
    fn sample_covariance_converges() {
        let cfg = ScenarioConfig::desk();
        let topo = build_topology(&cfg, 0).unwrap();
        let set = ChannelSet::build(&cfg, &topo, 0).unwrap();
        let r = set.correlation(0, 0).clone();
        let single = ChannelSet::from_blocks(DMatrix::from_element(1, 1, set.beta[(0, 0)]), vec![r.clone()], 2, 200.0, 24, cfg.noise_power_mw()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let n = 100_000;
        let mut acc = CMatrix::zeros(2, 2);
        for _ in 0..n {
            let h = &single.draw(&mut rng).h[0];
            acc += h * h.adjoint();
        }
        acc /= C64::new(n as f64, 0.0);
        let tol = 0.03 * trace_re(&r) / 2.0;
        assert!((&acc - &r).iter().all(|z| z.norm() <= tol));
    }

    #[test]
    fn desk_blocks_are_valid_correlations() {
        let cfg = ScenarioConfig::desk();
        let topo = build_topology(&cfg, 1).unwrap();
        let set = ChannelSet::build(&cfg, &topo, 1).unwrap();
        for k in 0..set.num_ue {
            for l in 0..set.num_oru {
                let r = set.correlation(k, l);
                let tr = trace_re(r);
                assert!(hermitian_defect(r) <= 1e-12 * tr);
                assert!((tr - 2.0 * set.beta[(k, l)]).abs() <= 1e-6 * tr);
                assert!(hermitian_eigenvalues(r).unwrap()[0] >= -1e-10 * tr);
            }
        }
    }

    #[test]
    fn build_is_deterministic() {
        let cfg = ScenarioConfig::desk();
        let topo = build_topology(&cfg, 2).unwrap();
        let a = ChannelSet::build(&cfg, &topo, 2).unwrap();
        let b = ChannelSet::build(&cfg, &topo, 2).unwrap();
        assert_eq!(a.beta, b.beta);
        let mut r1 = stream_rng(1, 2, Stream::SmallScale);
        let mut r2 = stream_rng(1, 2, Stream::SmallScale);
        assert_eq!(a.draw(&mut r1).hhat, b.draw(&mut r2).hhat);
    }

    #[test]
    fn phase_drift_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let base: Vec<CVector> = (0..3).map(|_| complex_normal(&mut rng, 8)).collect();

        let mut same = base.clone();
        apply_phase_drift(&mut same, 2, 0.0, &mut rng);
        assert_eq!(same, base);

        let mut drifted = base.clone();
        let angles = apply_phase_drift(&mut drifted, 2, 30.0, &mut rng);
        assert_eq!(angles.len(), 4);
        for (a, b) in base.iter().zip(&drifted) {
            for i in 0..8 {
                assert!((a[i].norm() - b[i].norm()).abs() < 1e-12);
            }
            // Both antennas of an O-RU share the rotation.
            let r0 = b[0] / a[0];
            let r1 = b[1] / a[1];
            assert!((r0 - r1).norm() < 1e-12);
        }
    }

    #[test]
    fn phase_drift_uniform_ks() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut v = vec![CVector::from_element(1, C64::new(1.0, 0.0))];
        let mut thetas: Vec<f64> = (0..10_000)
            .map(|_| apply_phase_drift(&mut v.clone(), 1, 30.0, &mut rng)[0].to_degrees())
            .collect();
        v.clear();
        thetas.sort_by(|a, b| a.total_cmp(b));
        let n = thetas.len() as f64;
        let d = thetas
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let f = (t + 30.0) / 60.0;
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max);
        // 1% critical value of the one-sample KS statistic.
        assert!(d < 1.63 / n.sqrt(), "KS statistic {d}");
        assert!(thetas.iter().all(|t| t.abs() <= 30.0));
    }
}
