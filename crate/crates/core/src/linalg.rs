//! Small dense complex linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::C64;

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Draws `n` i.i.d. CN(0, 1) samples.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CVector::from_fn(n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * s, im * s)
    })
}

/// Largest entrywise deviation from Hermitian symmetry.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Real trace of a (Hermitian) matrix.
pub fn trace_re(m: &CMatrix) -> f64 {
    (0..m.nrows()).map(|i| m[(i, i)].re).sum()
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Option<Vec<f64>> {
    let eig = nalgebra::SymmetricEigen::try_new(m.clone(), 1e-14, 10_000)?;
    let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| a.total_cmp(b));
    Some(v)
}

/// Principal square root of a Hermitian PSD matrix. Eigenvalues below
/// `-tol * trace` are rejected; small negative ones are clamped to zero.
pub fn hermitian_sqrt(m: &CMatrix, tol: f64) -> Result<CMatrix, String> {
    let n = m.nrows();
    let tr = trace_re(m).abs();
    let eig = nalgebra::SymmetricEigen::try_new(m.clone(), 1e-15, 10_000)
        .ok_or_else(|| "eigendecomposition did not converge".to_string())?;
    let mut scaled = eig.eigenvectors.clone();
    for (j, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda < -tol * tr.max(f64::MIN_POSITIVE) {
            return Err(format!("negative eigenvalue {lambda:e} (trace {tr:e})"));
        }
        let s = lambda.max(0.0).sqrt();
        for i in 0..n {
            scaled[(i, j)] *= s;
        }
    }
    Ok(&scaled * eig.eigenvectors.adjoint())
}

/// `a^H b` over a contiguous slice of two vectors.
#[inline]
pub fn dotc_range(a: &CVector, b: &CVector, start: usize, len: usize) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for i in start..start + len {
        acc += a[i].conj() * b[i];
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn sqrt_reproduces_matrix() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let a = CMatrix::from_fn(4, 4, |_, _| complex_normal(&mut rng, 1)[0]);
        let m = &a * a.adjoint();
        let s = hermitian_sqrt(&m, 1e-10).unwrap();
        assert!((&s * &s - &m).norm() < 1e-10 * m.norm());
        assert!(hermitian_defect(&s) < 1e-12 * s.norm());
    }

    #[test]
    fn sqrt_rejects_indefinite() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![
            C64::new(1.0, 0.0),
            C64::new(-0.5, 0.0),
        ]));
        assert!(hermitian_sqrt(&m, 1e-10).is_err());
    }
}
