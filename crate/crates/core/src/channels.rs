//! CPTP maps in Kraus form.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::matrix::{check_dims, eigh, CMatrix, DensityMatrix};
use crate::policy::NumericPolicy;
use crate::states::{gaussian_matrix, rng};

const COMPLETENESS_TOL: f64 = 1e-10;

/// `N(X) = sum_k K_k X K_k^dagger` with `sum_k K_k^dagger K_k = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    d_in: usize,
    d_out: usize,
    kraus: Vec<CMatrix>,
}

impl KrausChannel {
    pub fn new(d_in: usize, d_out: usize, kraus: Vec<CMatrix>) -> Result<Self> {
        Self::new_with(d_in, d_out, kraus, &NumericPolicy::default())
    }

    pub fn new_with(d_in: usize, d_out: usize, kraus: Vec<CMatrix>, _policy: &NumericPolicy) -> Result<Self> {
        if d_in == 0 || d_out == 0 {
            return Err(Error::Empty);
        }
        if kraus.is_empty() {
            return domain("kraus_count", 0.0, "a channel needs at least one Kraus operator");
        }
        for k in &kraus {
            check_dims(d_out, k.nrows())?;
            check_dims(d_in, k.ncols())?;
            if k.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                return Err(Error::NonFinite { row: 0, col: 0 });
            }
        }
        let ch = Self { d_in, d_out, kraus };
        let residual = ch.completeness_residual();
        if residual > COMPLETENESS_TOL {
            return Err(Error::NotTracePreserving { residual });
        }
        Ok(ch)
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    /// Max-entry deviation of `sum_k K_k^dagger K_k` from the identity.
    pub fn completeness_residual(&self) -> f64 {
        let mut sum = CMatrix::zeros(self.d_in, self.d_in);
        for k in &self.kraus {
            sum += k.adjoint() * k;
        }
        let id = CMatrix::identity(self.d_in, self.d_in);
        (sum - id).iter().fold(0.0f64, |m, z| m.max(z.norm()))
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        check_dims(self.d_in, rho.dim())?;
        let mut out = CMatrix::zeros(self.d_out, self.d_out);
        for k in &self.kraus {
            out += k * rho.as_matrix() * k.adjoint();
        }
        Ok(DensityMatrix::from_trusted(out))
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            d_in: dim,
            d_out: dim,
            kraus: vec![CMatrix::identity(dim, dim)],
        }
    }

    /// `N(X) = Tr(X) tau`, with Kraus operators `sqrt(t_j) |t_j><i|`.
    pub fn replacement(d_in: usize, tau: &DensityMatrix) -> Result<Self> {
        let eig = tau.eigensystem()?;
        let d_out = tau.dim();
        let mut kraus = Vec::new();
        for (j, &t) in eig.eigenvalues.iter().enumerate() {
            if t <= 0.0 {
                continue;
            }
            let amp = t.sqrt();
            for i in 0..d_in {
                kraus.push(DMatrix::from_fn(d_out, d_in, |r, c| {
                    if c == i {
                        eig.eigenvectors[(r, j)] * amp
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                }));
            }
        }
        Self::new(d_in, d_out, kraus)
    }

    /// Complete dephasing in the computational basis.
    pub fn dephasing(dim: usize) -> Self {
        let kraus = (0..dim)
            .map(|i| {
                DMatrix::from_fn(dim, dim, |r, c| {
                    if r == i && c == i {
                        Complex64::new(1.0, 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
            })
            .collect();
        Self {
            d_in: dim,
            d_out: dim,
            kraus,
        }
    }
}

/// Random channel from a Gaussian Stinespring isometry `V = G (G^dagger G)^{-1/2}`
/// of shape `(kraus_count * d_out) x d_in`, cut into `kraus_count` blocks.
pub fn random_channel(d_in: usize, d_out: usize, kraus_count: usize, seed: u64) -> Result<KrausChannel> {
    if d_in == 0 || d_out == 0 {
        return Err(Error::Empty);
    }
    if kraus_count == 0 {
        return domain("kraus_count", 0.0, "a channel needs at least one Kraus operator");
    }
    if kraus_count * d_out < d_in {
        return Err(Error::Infeasible(format!(
            "isometry needs kraus_count * d_out = {} >= d_in = {d_in}",
            kraus_count * d_out
        )));
    }
    let mut rng = rng(seed);
    let g = gaussian_matrix(kraus_count * d_out, d_in, &mut rng);
    let gram = g.adjoint() * &g;
    let eig = eigh(&gram)?;
    let inv_sqrt = eig.map_spectrum(|x| 1.0 / x.sqrt());
    let v = &g * inv_sqrt;
    let kraus = (0..kraus_count)
        .map(|k| v.rows(k * d_out, d_out).into_owned())
        .collect();
    KrausChannel::new(d_in, d_out, kraus)
}
