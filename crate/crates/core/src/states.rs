//! Seeded random states.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{domain, Result};
use crate::matrix::{CMatrix, DensityMatrix};

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `rows x cols` matrix of i.i.d. standard complex Gaussians.
pub(crate) fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Normalized Wishart state `G G^dagger / Tr(G G^dagger)` with `G` of shape
/// `dim x rank`. Full rank (`rank = dim`) when `rank` is `None`.
pub fn random_state(dim: usize, rank: Option<usize>, seed: u64) -> Result<DensityMatrix> {
    random_state_from(dim, rank, &mut rng(seed))
}

pub fn random_state_from<R: Rng + ?Sized>(dim: usize, rank: Option<usize>, rng: &mut R) -> Result<DensityMatrix> {
    let rank = rank.unwrap_or(dim);
    if dim == 0 {
        return domain("dim", 0.0, "dimension must be at least 1");
    }
    if rank == 0 || rank > dim {
        return domain("rank", rank as f64, "rank must lie in 1..=dim");
    }
    let g = gaussian_matrix(dim, rank, rng);
    let w = &g * g.adjoint();
    let tr = w.trace().re;
    Ok(DensityMatrix::from_trusted(w / Complex64::from(tr)))
}

/// Random probability vector of length `k` (flat Dirichlet).
pub fn random_distribution<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| -rng.random::<f64>().max(f64::MIN_POSITIVE).ln()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// Qubit pure state on the Bloch sphere: `cos(t/2)|0> + e^{i p} sin(t/2)|1>`.
pub fn bloch_pure(theta: f64, phi: f64) -> Result<DensityMatrix> {
    DensityMatrix::pure(&[
        Complex64::new((theta / 2.0).cos(), 0.0),
        Complex64::from_polar((theta / 2.0).sin(), phi),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_states_are_valid_and_deterministic() {
        let a = random_state(3, None, 42).unwrap();
        let b = random_state(3, None, 42).unwrap();
        assert_eq!(a, b);
        assert!(DensityMatrix::new(a.matrix().clone()).is_ok());
        let eig = a.eigensystem().unwrap();
        assert!(eig.eigenvalues[0] > 1e-6);
        assert_ne!(a, random_state(3, None, 43).unwrap());
    }

    #[test]
    fn rank_deficient_states_have_kernel() {
        let rho = random_state(4, Some(2), 7).unwrap();
        let eig = rho.eigensystem().unwrap();
        assert!(eig.eigenvalues[1].abs() < 1e-13);
        assert!(eig.eigenvalues[2] > 1e-6);
        assert!(random_state(2, Some(3), 0).is_err());
    }

    #[test]
    fn bloch_zero_is_ground_state() {
        let rho = bloch_pure(0.0, 0.0).unwrap();
        assert_eq!(rho, DensityMatrix::basis(2, 0).unwrap());
    }
}
