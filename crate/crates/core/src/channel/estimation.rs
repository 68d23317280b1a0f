//! Per-(UE, O-RU) MMSE channel estimation from orthogonal pilots.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{complex_normal, CMatrix, CVector};
use crate::C64;

/// Precomputed MMSE estimator for one correlation block.
///
/// With pilot observation `y = sqrt(p tau) h + n`, `n ~ CN(0, noise I)`:
/// `hhat = sqrt(p tau) R Q^-1 y` and `C = R - p tau R Q^-1 R`, `Q = p tau R + noise I`.
#[derive(Debug, Clone)]
pub struct MmseEstimator {
    pilot_amplitude: f64,
    noise: f64,
    gain: CMatrix,
    error_covariance: CMatrix,
}

impl MmseEstimator {
    pub fn new(correlation: &CMatrix, pilot_power: f64, pilot_len: usize, noise: f64) -> Result<Self> {
        if !(noise > 0.0) || !(pilot_power > 0.0) || pilot_len == 0 {
            return Err(Error::Domain(format!(
                "estimator needs noise > 0, pilot power > 0, pilot length > 0 (got {noise}, {pilot_power}, {pilot_len})"
            )));
        }
        let n = correlation.nrows();
        let ptau = pilot_power * pilot_len as f64;
        let q = correlation * C64::new(ptau, 0.0) + CMatrix::identity(n, n) * C64::new(noise, 0.0);
        // R Q^-1 = (Q^-1 R)^H since both are Hermitian.
        let q_inv_r = q
            .lu()
            .solve(correlation)
            .ok_or_else(|| Error::Domain("pilot covariance is singular".into()))?;
        let r_q_inv = q_inv_r.adjoint();
        let amp = ptau.sqrt();
        let gain = &r_q_inv * C64::new(amp, 0.0);
        let mut error_covariance = correlation - (&r_q_inv * correlation) * C64::new(ptau, 0.0);
        // Symmetrise against rounding.
        error_covariance = (&error_covariance + error_covariance.adjoint()) * C64::new(0.5, 0.0);
        Ok(Self {
            pilot_amplitude: amp,
            noise,
            gain,
            error_covariance,
        })
    }

    /// Draws the pilot observation for channel `h` and returns the MMSE estimate.
    pub fn estimate<R: Rng + ?Sized>(&self, h: &CVector, rng: &mut R) -> CVector {
        let noise = complex_normal(rng, h.len()) * C64::new(self.noise.sqrt(), 0.0);
        let y = h * C64::new(self.pilot_amplitude, 0.0) + noise;
        &self.gain * y
    }

    /// Estimate from an explicit pilot observation.
    pub fn estimate_from_observation(&self, y: &CVector) -> CVector {
        &self.gain * y
    }

    pub fn error_covariance(&self) -> &CMatrix {
        &self.error_covariance
    }

    pub fn gain(&self) -> &CMatrix {
        &self.gain
    }
}
