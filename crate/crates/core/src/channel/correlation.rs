//! Spatial correlation of a uniform linear array under a Gaussian angular spread.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::C64;

/// Truncation of the angular Gaussians, in standard deviations.
pub const TRUNCATION_SIGMAS: f64 = 4.0;

/// Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Chebyshev initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Angle samples and normalised probability weights for a Gaussian truncated
/// at `TRUNCATION_SIGMAS`. A zero spread collapses to the nominal angle.
fn angular_rule(mean: f64, std: f64, rule: &GaussLegendre) -> Vec<(f64, f64)> {
    if std == 0.0 {
        return vec![(mean, 1.0)];
    }
    let half = TRUNCATION_SIGMAS;
    let mut pts: Vec<(f64, f64)> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&x, &w)| {
            let z = half * x;
            (mean + std * z, w * (-0.5 * z * z).exp())
        })
        .collect();
    let total: f64 = pts.iter().map(|p| p.1).sum();
    for p in &mut pts {
        p.1 /= total;
    }
    pts
}

/// Correlation matrix `R` (N x N) of the channel between a UE and an N-antenna
/// half-wavelength ULA:
///
/// `[R]_{m,n} = beta * E{ exp(j*pi*(m-n) sin(az) cos(el)) }`
///
/// with azimuth and elevation independent Gaussians around the nominal angles.
/// The result is Toeplitz and exactly Hermitian with trace `N * beta`.
pub fn spatial_correlation(
    nominal_azimuth: f64,
    nominal_elevation: f64,
    asd_azimuth: f64,
    asd_elevation: f64,
    antennas: usize,
    beta: f64,
    rule: &GaussLegendre,
) -> Result<CMatrix> {
    let inputs = [nominal_azimuth, nominal_elevation, asd_azimuth, asd_elevation, beta];
    if inputs.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain(format!(
            "non-finite correlation input {inputs:?}"
        )));
    }
    if antennas == 0 || asd_azimuth < 0.0 || asd_elevation < 0.0 {
        return Err(Error::Domain(
            "correlation needs N >= 1 and non-negative spreads".into(),
        ));
    }

    let az = angular_rule(nominal_azimuth, asd_azimuth, rule);
    let el = angular_rule(nominal_elevation, asd_elevation, rule);

    // First column of the Toeplitz matrix: r_d = E{exp(j pi d sin(az) cos(el))}.
    let mut first = vec![C64::new(0.0, 0.0); antennas];
    first[0] = C64::new(1.0, 0.0);
    if antennas > 1 {
        for &(a, wa) in &az {
            let sa = a.sin();
            for &(e, we) in &el {
                let u = PI * sa * e.cos();
                let w = wa * we;
                for (d, r) in first.iter_mut().enumerate().skip(1) {
                    *r += C64::from_polar(w, u * d as f64);
                }
            }
        }
    }

    Ok(CMatrix::from_fn(antennas, antennas, |m, n| {
        if m >= n {
            first[m - n] * beta
        } else {
            first[n - m].conj() * beta
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_defect, hermitian_eigenvalues, trace_re};

    const DEG: f64 = PI / 180.0;

    /// Dense midpoint-rule oracle on the same truncated Gaussian density.
    fn dense_oracle(az0: f64, el0: f64, sa: f64, se: f64, n: usize, beta: f64, grid: usize) -> CMatrix {
        let axis = |mean: f64, std: f64| -> Vec<(f64, f64)> {
            let h = 2.0 * TRUNCATION_SIGMAS / grid as f64;
            let pts: Vec<(f64, f64)> = (0..grid)
                .map(|i| {
                    let z = -TRUNCATION_SIGMAS + (i as f64 + 0.5) * h;
                    (mean + std * z, (-0.5 * z * z).exp())
                })
                .collect();
            let tot: f64 = pts.iter().map(|p| p.1).sum();
            pts.into_iter().map(|(x, w)| (x, w / tot)).collect()
        };
        let a = axis(az0, sa);
        let e = axis(el0, se);
        CMatrix::from_fn(n, n, |m, k| {
            let d = m as f64 - k as f64;
            let mut acc = C64::new(0.0, 0.0);
            for &(x, wx) in &a {
                for &(y, wy) in &e {
                    acc += C64::from_polar(wx * wy, PI * d * x.sin() * y.cos());
                }
            }
            acc * beta
        })
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let rule = GaussLegendre::new(10);
        let sum_w: f64 = rule.weights.iter().sum();
        assert!((sum_w - 2.0).abs() < 1e-13);
        // x^18 integrates to 2/19 exactly with 10 nodes.
        let int: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| w * x.powi(18))
            .sum();
        assert!((int - 2.0 / 19.0).abs() < 1e-13);
    }

    #[test]
    fn single_antenna_is_beta() {
        let r = spatial_correlation(0.3, -0.2, 0.26, 0.26, 1, 2.5e-9, &GaussLegendre::new(40)).unwrap();
        assert_eq!(r.nrows(), 1);
        assert_eq!(r[(0, 0)], C64::new(2.5e-9, 0.0));
    }

    #[test]
    fn zero_spread_is_rank_one_steering() {
        let (az, el) = (30.0 * DEG, -10.0 * DEG);
        let r = spatial_correlation(az, el, 0.0, 0.0, 4, 2.0, &GaussLegendre::new(40)).unwrap();
        let u = PI * az.sin() * el.cos();
        for m in 0..4 {
            for n in 0..4 {
                let expect = C64::from_polar(2.0, u * (m as f64 - n as f64));
                assert!((r[(m, n)] - expect).norm() < 1e-14);
            }
        }
        let ev = hermitian_eigenvalues(&r).unwrap();
        assert!(ev[..3].iter().all(|v| v.abs() < 1e-12));
        assert!((ev[3] - 8.0).abs() < 1e-12);
    }

    #[test]
    fn matches_dense_quadrature_oracle() {
        let (az, el, s) = (30.0 * DEG, -10.0 * DEG, 15.0 * DEG);
        let r = spatial_correlation(az, el, s, s, 4, 1.0, &GaussLegendre::new(40)).unwrap();
        let oracle = dense_oracle(az, el, s, s, 4, 1.0, 201);
        let worst = (&r - &oracle).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(worst < 1e-4, "max entry error {worst:e}");
    }

    #[test]
    fn hermitian_psd_and_trace_normalised() {
        let rule = GaussLegendre::new(40);
        for (i, &(az, el)) in [(0.1, -0.3), (2.0, -1.2), (-2.9, -0.05)].iter().enumerate() {
            let beta = 10f64.powi(-(i as i32) - 7);
            let r = spatial_correlation(az, el, 15.0 * DEG, 15.0 * DEG, 8, beta, &rule).unwrap();
            let tr = trace_re(&r);
            assert!(hermitian_defect(&r) <= 1e-12 * tr);
            assert!((tr - 8.0 * beta).abs() <= 1e-6 * 8.0 * beta);
            let ev = hermitian_eigenvalues(&r).unwrap();
            assert!(ev[0] >= -1e-10 * tr);
        }
    }

    #[test]
    fn non_finite_inputs_rejected() {
        let rule = GaussLegendre::new(8);
        assert!(spatial_correlation(f64::NAN, 0.0, 0.1, 0.1, 2, 1.0, &rule).is_err());
        assert!(spatial_correlation(0.0, 0.0, 0.1, f64::INFINITY, 2, 1.0, &rule).is_err());
    }
}
