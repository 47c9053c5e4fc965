//! Complex Hermitian linear algebra: validated states and tests, eigensystems,
//! fractional powers with support conventions, tensor powers.

use nalgebra::linalg::SymmetricEigen;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::policy::NumericPolicy;

pub type CMatrix = DMatrix<Complex64>;

const EIG_EPS: f64 = 1e-15;
const EIG_MAX_ITER: usize = 0;

/// A finite, non-empty square matrix of complex numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSquareMatrix(CMatrix);

impl ComplexSquareMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::Empty);
        }
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                let z = m[(i, j)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(Self(m))
    }

    /// Row-major construction.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::NotSquare {
                rows: n,
                cols: bad.len(),
            });
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        Self::new(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(diag[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn to_rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.0[(i, j)]).collect())
            .collect()
    }

    /// Largest `|m_ij - conj(m_ji)|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0f64, |m, z| m.max(z.norm()))
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// `(M + M^dagger) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self(hermitize(&self.0))
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self(self.0.kronecker(&other.0))
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self(self.0.map(|z| z * factor))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self(&self.0 + &other.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self(&self.0 - &other.0))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self(&self.0 * &other.0))
    }

    /// Largest entry-wise distance.
    pub fn max_distance(&self, other: &Self) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()))
    }
}

pub(crate) fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

pub(crate) fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).map(|z| z * 0.5)
}

/// Eigenvalues in ascending order with the matching orthonormal eigenvectors
/// as columns.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V f(Lambda) V^dagger`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            let w = f(lambda);
            scaled.column_mut(k).iter_mut().for_each(|z| *z *= w);
        }
        scaled * v.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.map_spectrum(|x| x)
    }

    /// `<v_k| m |v_k>` for every eigenvector (real part).
    pub fn diagonal_in_basis(&self, m: &CMatrix) -> Vec<f64> {
        let mv = m * &self.eigenvectors;
        (0..self.dim())
            .map(|k| {
                self.eigenvectors
                    .column(k)
                    .iter()
                    .zip(mv.column(k).iter())
                    .map(|(a, b)| (a.conj() * b).re)
                    .sum()
            })
            .collect()
    }
}

/// Eigendecomposition of a matrix assumed Hermitian; only the Hermitian part
/// is used.
pub(crate) fn eigh(m: &CMatrix) -> Result<EigenSystem> {
    let sym = SymmetricEigen::try_new(hermitize(m), EIG_EPS, EIG_MAX_ITER).ok_or(Error::NoConvergence)?;
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sym.eigenvalues[a].total_cmp(&sym.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&k| sym.eigenvalues[k]).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |i, j| sym.eigenvectors[(i, order[j])]);
    Ok(EigenSystem {
        eigenvalues,
        eigenvectors,
    })
}

pub fn hermitian_eigensystem(h: &ComplexSquareMatrix) -> Result<EigenSystem> {
    hermitian_eigensystem_with(h, &NumericPolicy::default())
}

pub fn hermitian_eigensystem_with(h: &ComplexSquareMatrix, policy: &NumericPolicy) -> Result<EigenSystem> {
    let dev = h.hermitian_deviation();
    if dev > policy.eig_hermitian_tol {
        return Err(Error::NotHermitian {
            max_asymmetry: dev,
            tolerance: policy.eig_hermitian_tol,
        });
    }
    eigh(h.as_matrix())
}

/// A validated density matrix: Hermitian, positive semi-definite, unit trace.
///
/// The stored matrix is the exact Hermitian part of the input.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexSquareMatrix,
}

impl DensityMatrix {
    pub fn new(m: ComplexSquareMatrix) -> Result<Self> {
        Self::new_with(m, &NumericPolicy::default())
    }

    pub fn new_with(m: ComplexSquareMatrix, policy: &NumericPolicy) -> Result<Self> {
        let dev = m.hermitian_deviation();
        if dev > policy.hermitian_tol {
            return Err(Error::NotHermitian {
                max_asymmetry: dev,
                tolerance: policy.hermitian_tol,
            });
        }
        let m = m.hermitian_part();
        let trace = m.trace().re;
        if (trace - 1.0).abs() > policy.trace_tol {
            return Err(Error::InvalidTrace { trace });
        }
        let eig = eigh(m.as_matrix())?;
        let min = eig.eigenvalues[0];
        if min < -policy.psd_tol {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
        Ok(Self { matrix: m })
    }

    /// Skips validation. Only for constructions that preserve validity
    /// exactly (Kronecker products, convex mixtures of valid states).
    pub(crate) fn from_trusted(m: CMatrix) -> Self {
        Self {
            matrix: ComplexSquareMatrix(hermitize(&m)),
        }
    }

    pub fn from_diagonal(probs: &[f64]) -> Result<Self> {
        Self::new(ComplexSquareMatrix::from_real_diagonal(probs)?)
    }

    /// `|psi><psi|` for the normalized vector `psi`.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if psi.is_empty() {
            return Err(Error::Empty);
        }
        if !(norm.is_finite() && norm > 0.0) {
            return domain("norm", norm, "state vector must be non-zero and finite");
        }
        let n = psi.len();
        let m = DMatrix::from_fn(n, n, |i, j| psi[i] * psi[j].conj() / (norm * norm));
        Self::new(ComplexSquareMatrix::new(m)?)
    }

    /// Computational basis state `|k><k|`.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        let mut probs = vec![0.0; dim];
        *probs.get_mut(k).ok_or(Error::DimensionMismatch { expected: dim, found: k })? = 1.0;
        Self::from_diagonal(&probs)
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        Self::from_diagonal(&vec![1.0 / dim as f64; dim])
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &ComplexSquareMatrix {
        &self.matrix
    }

    pub fn as_matrix(&self) -> &CMatrix {
        self.matrix.as_matrix()
    }

    /// `weight * self + (1 - weight) * other`.
    pub fn mix(&self, weight: f64, other: &Self) -> Result<Self> {
        if !(0.0..=1.0).contains(&weight) {
            return domain("weight", weight, "mixture weight must lie in [0, 1]");
        }
        check_dims(self.dim(), other.dim())?;
        Ok(Self::from_trusted(
            self.as_matrix() * Complex64::from(weight) + other.as_matrix() * Complex64::from(1.0 - weight),
        ))
    }

    pub fn max_distance(&self, other: &Self) -> f64 {
        self.matrix.max_distance(&other.matrix)
    }

    pub fn eigensystem(&self) -> Result<EigenSystem> {
        eigh(self.as_matrix())
    }
}

/// An effect `0 <= L <= I`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestOperator {
    matrix: ComplexSquareMatrix,
}

impl TestOperator {
    pub fn new(m: ComplexSquareMatrix) -> Result<Self> {
        Self::new_with(m, &NumericPolicy::default())
    }

    pub fn new_with(m: ComplexSquareMatrix, policy: &NumericPolicy) -> Result<Self> {
        let dev = m.hermitian_deviation();
        if dev > policy.hermitian_tol {
            return Err(Error::NotHermitian {
                max_asymmetry: dev,
                tolerance: policy.hermitian_tol,
            });
        }
        let m = m.hermitian_part();
        let eig = eigh(m.as_matrix())?;
        let (lo, hi) = (eig.eigenvalues[0], eig.eigenvalues[eig.dim() - 1]);
        if lo < -policy.psd_tol {
            return Err(Error::NotATest { eigenvalue: lo });
        }
        if hi > 1.0 + policy.psd_tol {
            return Err(Error::NotATest { eigenvalue: hi });
        }
        Ok(Self { matrix: m })
    }

    pub(crate) fn from_trusted(m: CMatrix) -> Self {
        Self {
            matrix: ComplexSquareMatrix(hermitize(&m)),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_trusted(DMatrix::identity(dim, dim))
    }

    pub fn zero(dim: usize) -> Self {
        Self::from_trusted(DMatrix::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &ComplexSquareMatrix {
        &self.matrix
    }

    pub fn as_matrix(&self) -> &CMatrix {
        self.matrix.as_matrix()
    }
}

/// `M^a` for positive semi-definite `M` and `0 <= a <= 1`. Eigenvalues at or
/// below the support threshold map to zero for every `a`, so `M^0` is the
/// support projector.
pub fn fractional_power(m: &ComplexSquareMatrix, a: f64) -> Result<ComplexSquareMatrix> {
    fractional_power_with(m, a, &NumericPolicy::default())
}

pub fn fractional_power_with(m: &ComplexSquareMatrix, a: f64, policy: &NumericPolicy) -> Result<ComplexSquareMatrix> {
    if !(0.0..=1.0).contains(&a) {
        return domain("a", a, "exponent must lie in [0, 1]");
    }
    let eig = hermitian_eigensystem_with(m, policy)?;
    if eig.eigenvalues[0] < -policy.negative_eig_limit {
        return Err(Error::NotPositive {
            min_eigenvalue: eig.eigenvalues[0],
        });
    }
    let threshold = policy.support_threshold;
    Ok(ComplexSquareMatrix(eig.map_spectrum(|lambda| {
        if lambda <= threshold {
            0.0
        } else {
            lambda.powf(a)
        }
    })))
}

/// `rho^{(x) n}`.
pub fn tensor_power(rho: &DensityMatrix, n: usize) -> Result<DensityMatrix> {
    tensor_power_with(rho, n, &NumericPolicy::default())
}

pub fn tensor_power_with(rho: &DensityMatrix, n: usize, policy: &NumericPolicy) -> Result<DensityMatrix> {
    if n == 0 {
        return domain("n", 0.0, "number of copies must be at least 1");
    }
    let required = u32::try_from(n)
        .ok()
        .and_then(|n| rho.dim().checked_pow(n))
        .unwrap_or(usize::MAX);
    if required > policy.dim_cap {
        return Err(Error::Resource {
            required,
            cap: policy.dim_cap,
        });
    }
    let mut out = rho.as_matrix().clone();
    for _ in 1..n {
        out = out.kronecker(rho.as_matrix());
    }
    Ok(DensityMatrix::from_trusted(out))
}

/// Sum of the positive eigenvalues, `max_{0<=L<=I} Tr(L A)`.
pub fn positive_part_trace(a: &ComplexSquareMatrix) -> Result<f64> {
    let eig = hermitian_eigensystem(a)?;
    Ok(eig.eigenvalues.iter().filter(|&&x| x > 0.0).sum())
}

pub(crate) fn positive_part_trace_unchecked(a: &CMatrix) -> Result<f64> {
    let eig = eigh(a)?;
    Ok(eig.eigenvalues.iter().filter(|&&x| x > 0.0).sum())
}

/// Real part of `Tr(A B)` without forming the product.
pub(crate) fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pauli_x() -> ComplexSquareMatrix {
        ComplexSquareMatrix::from_rows(&[vec![c(0., 0.), c(1., 0.)], vec![c(1., 0.), c(0., 0.)]]).unwrap()
    }

    #[test]
    fn eigensystem_of_identity_and_diagonal() {
        let e = hermitian_eigensystem(&ComplexSquareMatrix::identity(2)).unwrap();
        assert_eq!(e.eigenvalues.len(), 2);
        assert!(e.eigenvalues.iter().all(|v| (v - 1.0).abs() < 1e-15));

        let e = hermitian_eigensystem(&ComplexSquareMatrix::from_real_diagonal(&[0.9, 0.1]).unwrap()).unwrap();
        assert!((e.eigenvalues[0] - 0.1).abs() < 1e-15);
        assert!((e.eigenvalues[1] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn eigensystem_of_pauli_x() {
        let e = hermitian_eigensystem(&pauli_x()).unwrap();
        assert!((e.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-14);
        let back = e.reconstruct();
        assert!((&back - pauli_x().as_matrix()).iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn eigensystem_rejects_non_hermitian() {
        let m = ComplexSquareMatrix::from_rows(&[vec![c(0., 0.), c(1., 0.)], vec![c(0., 0.), c(0., 0.)]]).unwrap();
        match hermitian_eigensystem(&m) {
            Err(Error::NotHermitian { max_asymmetry, .. }) => assert!((max_asymmetry - 1.0).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn eigensystem_complex_hermitian_is_unitary_and_reconstructs() {
        let m = ComplexSquareMatrix::from_rows(&[
            vec![c(2., 0.), c(0.5, -1.0), c(0., 0.3)],
            vec![c(0.5, 1.0), c(-1., 0.), c(0.2, 0.)],
            vec![c(0., -0.3), c(0.2, 0.), c(0.7, 0.)],
        ])
        .unwrap();
        let e = hermitian_eigensystem(&m).unwrap();
        assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        let v = &e.eigenvectors;
        let gram = v.adjoint() * v;
        let id = CMatrix::identity(3, 3);
        assert!((&gram - &id).iter().all(|z| z.norm() < 1e-12));
        let scale = m.max_abs();
        assert!((e.reconstruct() - m.as_matrix()).iter().all(|z| z.norm() <= 1e-9 * scale));
    }

    #[test]
    fn fractional_power_examples() {
        let rho = DensityMatrix::from_diagonal(&[0.25, 0.75]).unwrap();
        let same = fractional_power(rho.matrix(), 1.0).unwrap();
        assert!(same.max_distance(rho.matrix()) < 1e-15);

        let sqrt = fractional_power(rho.matrix(), 0.5).unwrap();
        let expected = ComplexSquareMatrix::from_real_diagonal(&[0.5, 0.75f64.sqrt()]).unwrap();
        assert!(sqrt.max_distance(&expected) < 1e-15);
        assert!((0.75f64.sqrt() - 0.8660).abs() < 1e-4);

        let pure = DensityMatrix::basis(2, 0).unwrap();
        let half = fractional_power(pure.matrix(), 0.5).unwrap();
        assert!(half.max_distance(pure.matrix()) < 1e-15);
        let support = fractional_power(pure.matrix(), 0.0).unwrap();
        assert!(support.max_distance(pure.matrix()) < 1e-15);
    }

    #[test]
    fn fractional_power_rejects_negative_and_bad_exponent() {
        let m = ComplexSquareMatrix::from_real_diagonal(&[1.1, -0.1]).unwrap();
        assert!(matches!(fractional_power(&m, 0.5), Err(Error::NotPositive { .. })));
        let ok = ComplexSquareMatrix::from_real_diagonal(&[0.5, 0.5]).unwrap();
        assert!(matches!(fractional_power(&ok, 1.5), Err(Error::Domain { .. })));
    }

    #[test]
    fn tensor_power_examples() {
        let p = 0.3;
        let rho = DensityMatrix::from_diagonal(&[p, 1.0 - p]).unwrap();
        assert_eq!(tensor_power(&rho, 1).unwrap(), rho);
        let two = tensor_power(&rho, 2).unwrap();
        let expected = [p * p, p * (1.0 - p), (1.0 - p) * p, (1.0 - p) * (1.0 - p)];
        for (k, e) in expected.iter().enumerate() {
            assert!((two.as_matrix()[(k, k)].re - e).abs() < 1e-15);
        }
        let q = DensityMatrix::pure(&[c(0.6, 0.0), c(0.0, 0.8)]).unwrap().mix(0.7, &rho).unwrap();
        let three = tensor_power(&q, 3).unwrap();
        assert_eq!(three.dim(), 8);
        assert!((three.matrix().trace().re - 1.0).abs() < 1e-14);
        assert!(DensityMatrix::new(three.matrix().clone()).is_ok());
    }

    #[test]
    fn tensor_power_respects_cap() {
        let rho = DensityMatrix::maximally_mixed(2).unwrap();
        match tensor_power(&rho, 13) {
            Err(Error::Resource { required, cap }) => {
                assert_eq!(required, 8192);
                assert_eq!(cap, 4096);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn positive_part_examples() {
        assert_eq!(positive_part_trace(&ComplexSquareMatrix::zeros(3)).unwrap(), 0.0);
        let d = ComplexSquareMatrix::from_real_diagonal(&[0.4, -0.1]).unwrap();
        assert!((positive_part_trace(&d).unwrap() - 0.4).abs() < 1e-15);
        let rho = DensityMatrix::from_diagonal(&[0.9, 0.1]).unwrap();
        let sigma = DensityMatrix::from_diagonal(&[0.5, 0.5]).unwrap();
        let diff = rho.matrix().sub(sigma.matrix()).unwrap();
        assert!((positive_part_trace(&diff).unwrap() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn density_validation() {
        assert!(matches!(
            DensityMatrix::from_diagonal(&[0.5, 0.6]),
            Err(Error::InvalidTrace { .. })
        ));
        assert!(matches!(
            DensityMatrix::from_diagonal(&[1.2, -0.2]),
            Err(Error::NotPositive { .. })
        ));
        let skew = ComplexSquareMatrix::from_rows(&[vec![c(0.5, 0.), c(0.1, 0.)], vec![c(0.0, 0.), c(0.5, 0.)]]).unwrap();
        assert!(matches!(DensityMatrix::new(skew), Err(Error::NotHermitian { .. })));
        assert!(matches!(
            ComplexSquareMatrix::new(CMatrix::zeros(2, 3)),
            Err(Error::NotSquare { .. })
        ));
        let nan = CMatrix::from_element(1, 1, c(f64::NAN, 0.0));
        assert!(matches!(ComplexSquareMatrix::new(nan), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn test_operator_validation() {
        assert!(TestOperator::new(ComplexSquareMatrix::from_real_diagonal(&[1.0, 0.3]).unwrap()).is_ok());
        assert!(matches!(
            TestOperator::new(ComplexSquareMatrix::from_real_diagonal(&[1.1, 0.3]).unwrap()),
            Err(Error::NotATest { .. })
        ));
        assert!(matches!(
            TestOperator::new(ComplexSquareMatrix::from_real_diagonal(&[-0.1, 0.3]).unwrap()),
            Err(Error::NotATest { .. })
        ));
    }
}
