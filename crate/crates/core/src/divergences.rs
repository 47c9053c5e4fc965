//! Scalar divergences built on the Renyi profile `q(a) = Tr(rho^a sigma^(1-a))`.
//!
//! Every quantity here is a one-dimensional optimization over `a` in `[0, 1]`
//! of an expression in `log q(a)`. The profile caches both eigensystems and
//! the overlap matrix `W_ij = |<u_i|v_j>|^2`, so each evaluation of `q` costs
//! `O(d^2)`:
//!
//! ```text
//! q(a) = sum_ij r_i^a s_j^(1-a) W_ij
//! ```
//!
//! with eigenvalues at or below the support threshold treated as exact zeros
//! for every exponent, which makes `q(0) = Tr(pi_rho sigma)` and
//! `q(1) = Tr(rho pi_sigma)`. All logarithms are natural.

use crate::error::{domain, Error, Result};
use crate::extended::ExtendedReal;
use crate::matrix::{check_dims, fractional_power_with, trace_product, DensityMatrix, EigenSystem};
use crate::optimize::{bisect_increasing, grid_maximum, maximize, minimize};
use crate::policy::NumericPolicy;

/// Cached spectral data for a pair of states.
#[derive(Debug, Clone)]
pub struct RenyiProfile {
    rho: DensityMatrix,
    sigma: DensityMatrix,
    rho_eig: EigenSystem,
    sigma_eig: EigenSystem,
    /// `ln r_i`, `None` outside the support.
    log_r: Vec<Option<f64>>,
    log_s: Vec<Option<f64>>,
    /// Row-major `W_ij`.
    overlaps: Vec<f64>,
    policy: NumericPolicy,
}

impl RenyiProfile {
    pub fn new(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<Self> {
        Self::with_policy(rho, sigma, NumericPolicy::default())
    }

    pub fn with_policy(rho: &DensityMatrix, sigma: &DensityMatrix, policy: NumericPolicy) -> Result<Self> {
        check_dims(rho.dim(), sigma.dim())?;
        let rho_eig = rho.eigensystem()?;
        let sigma_eig = sigma.eigensystem()?;
        let d = rho.dim();
        let cross = rho_eig.eigenvectors.adjoint() * &sigma_eig.eigenvectors;
        let mut overlaps = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                overlaps[i * d + j] = cross[(i, j)].norm_sqr();
            }
        }
        let support = |eig: &EigenSystem| {
            eig.eigenvalues
                .iter()
                .map(|&x| (x > policy.support_threshold).then(|| x.ln()))
                .collect::<Vec<_>>()
        };
        Ok(Self {
            log_r: support(&rho_eig),
            log_s: support(&sigma_eig),
            rho: rho.clone(),
            sigma: sigma.clone(),
            rho_eig,
            sigma_eig,
            overlaps,
            policy,
        })
    }

    pub fn rho(&self) -> &DensityMatrix {
        &self.rho
    }

    pub fn sigma(&self) -> &DensityMatrix {
        &self.sigma
    }

    pub fn policy(&self) -> &NumericPolicy {
        &self.policy
    }

    pub fn rho_eigensystem(&self) -> &EigenSystem {
        &self.rho_eig
    }

    pub fn sigma_eigensystem(&self) -> &EigenSystem {
        &self.sigma_eig
    }

    /// The same pair with the roles of the states exchanged.
    pub fn swapped(&self) -> Self {
        let d = self.rho.dim();
        let mut overlaps = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                overlaps[j * d + i] = self.overlaps[i * d + j];
            }
        }
        Self {
            rho: self.sigma.clone(),
            sigma: self.rho.clone(),
            rho_eig: self.sigma_eig.clone(),
            sigma_eig: self.rho_eig.clone(),
            log_r: self.log_s.clone(),
            log_s: self.log_r.clone(),
            overlaps,
            policy: self.policy,
        }
    }

    fn dim(&self) -> usize {
        self.log_r.len()
    }

    /// Unclamped `sum_ij r_i^a s_j^(1-a) W_ij`.
    fn raw_q(&self, a: f64) -> f64 {
        let d = self.dim();
        let b = 1.0 - a;
        let s_pow: Vec<f64> = self.log_s.iter().map(|l| l.map_or(0.0, |l| (b * l).exp())).collect();
        let mut total = 0.0;
        for (i, lr) in self.log_r.iter().enumerate() {
            let Some(lr) = lr else { continue };
            let row = &self.overlaps[i * d..(i + 1) * d];
            let inner: f64 = row.iter().zip(&s_pow).map(|(w, s)| w * s).sum();
            total += (a * lr).exp() * inner;
        }
        total
    }

    /// `q(a)` clamped to `[0, 1]`.
    pub fn q_alpha(&self, a: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&a) {
            return domain("a", a, "Renyi profile is defined on [0, 1]");
        }
        Ok(self.raw_q(a).clamp(0.0, 1.0))
    }

    fn q(&self, a: f64) -> f64 {
        self.raw_q(a).clamp(0.0, 1.0)
    }

    /// `Tr(pi_rho pi_sigma)`, zero exactly when the supports are orthogonal.
    pub fn support_overlap(&self) -> f64 {
        let d = self.dim();
        let mut total = 0.0;
        for i in 0..d {
            if self.log_r[i].is_none() {
                continue;
            }
            for j in 0..d {
                if self.log_s[j].is_some() {
                    total += self.overlaps[i * d + j];
                }
            }
        }
        total
    }

    pub fn orthogonal_supports(&self) -> bool {
        self.support_overlap() <= self.policy.support_threshold
    }

    /// Petz-Renyi divergence `log q(a) / (a - 1)` for `0 < a < 1`.
    pub fn petz_renyi(&self, a: f64) -> Result<ExtendedReal> {
        if !(a > 0.0 && a < 1.0) {
            return domain("a", a, "Petz-Renyi order must lie in (0, 1); use d_min or umegaki at the endpoints");
        }
        let q = self.q(a);
        if q <= 0.0 || self.orthogonal_supports() {
            return Ok(ExtendedReal::PosInf);
        }
        Ok(ExtendedReal::Finite((q.ln() / (a - 1.0)).max(0.0)))
    }

    /// `Tr((I - pi_sigma) rho)`.
    pub fn support_violation(&self) -> f64 {
        let d = self.dim();
        let mut total = 0.0;
        for (i, &r) in self.rho_eig.eigenvalues.iter().enumerate() {
            if self.log_r[i].is_none() {
                continue;
            }
            for j in 0..d {
                if self.log_s[j].is_none() {
                    total += r * self.overlaps[i * d + j];
                }
            }
        }
        total
    }

    /// Umegaki relative entropy `Tr(rho (log rho - log sigma))`.
    pub fn umegaki(&self) -> ExtendedReal {
        if self.support_violation() > self.policy.support_violation_tol {
            return ExtendedReal::PosInf;
        }
        let d = self.dim();
        let mut total = 0.0;
        for (i, &r) in self.rho_eig.eigenvalues.iter().enumerate() {
            let Some(lr) = self.log_r[i] else { continue };
            total += r * lr;
            for j in 0..d {
                if let Some(ls) = self.log_s[j] {
                    total -= r * self.overlaps[i * d + j] * ls;
                }
            }
        }
        ExtendedReal::Finite(total.max(0.0))
    }

    /// `-log Tr(pi_rho sigma)`.
    pub fn d_min(&self) -> ExtendedReal {
        let q0 = self.q(0.0);
        if q0 <= 0.0 || self.orthogonal_supports() {
            ExtendedReal::PosInf
        } else {
            ExtendedReal::Finite((-q0.ln()).max(0.0))
        }
    }

    /// Quantum Chernoff divergence `-log min_a q(a)`.
    pub fn chernoff(&self) -> ExtendedReal {
        if self.orthogonal_supports() {
            return ExtendedReal::PosInf;
        }
        let m = minimize(|a| self.q(a), 0.0, 1.0, self.policy.grid_points, self.policy.golden_tol);
        ExtendedReal::Finite((-m.value.ln()).max(0.0))
    }

    /// Minimizer of `q` over `[0, 1]`.
    pub fn chernoff_argmin(&self) -> f64 {
        minimize(|a| self.q(a), 0.0, 1.0, self.policy.grid_points, self.policy.golden_tol).arg
    }

    fn xi_objective(&self, s: f64) -> impl Fn(f64) -> f64 + '_ {
        move |a| self.q(a).ln() / (a * (1.0 - s) - 1.0)
    }

    /// `xi_s = sup_a log q(a) / (a (1 - s) - 1)`; `xi_0` is the Umegaki
    /// divergence.
    pub fn xi_s(&self, s: f64) -> Result<ExtendedReal> {
        if !(s >= 0.0) || s.is_infinite() {
            return domain("s", s, "xi_s requires finite s >= 0");
        }
        if s == 0.0 {
            return Ok(self.umegaki());
        }
        if self.orthogonal_supports() {
            return Ok(ExtendedReal::PosInf);
        }
        let m = maximize(self.xi_objective(s), 0.0, 1.0, self.policy.grid_points, self.policy.golden_tol);
        Ok(ExtendedReal::Finite(m.value.max(0.0)))
    }

    /// Maximizing `a` for `xi_s` (`s > 0`).
    pub fn xi_s_argmax(&self, s: f64) -> Result<f64> {
        if !(s > 0.0) || s.is_infinite() {
            return domain("s", s, "argmax requires finite s > 0");
        }
        Ok(maximize(self.xi_objective(s), 0.0, 1.0, self.policy.grid_points, self.policy.golden_tol).arg)
    }

    /// Plain grid supremum of the `xi_s` objective, excluding `a = 1` when the
    /// denominator vanishes there (`s = 0`).
    pub fn xi_s_grid_sup(&self, s: f64) -> Result<ExtendedReal> {
        if !(s >= 0.0) || s.is_infinite() {
            return domain("s", s, "xi_s requires finite s >= 0");
        }
        if self.orthogonal_supports() {
            return Ok(ExtendedReal::PosInf);
        }
        let n = self.policy.grid_points.max(3);
        let hi = if s == 0.0 { 1.0 - 1.0 / (n - 1) as f64 } else { 1.0 };
        let points = if s == 0.0 { n - 1 } else { n };
        let m = grid_maximum(self.xi_objective(s), 0.0, hi, points);
        Ok(ExtendedReal::Finite(m.value.max(0.0)))
    }

    /// Hoeffding bound `B(r) = sup_{0<a<=1} (a-1)/a (r - D_a)`.
    ///
    /// Infinite exactly when `r <= D_min`; that branch is decided from
    /// `d_min`, the finite branch numerically from `a = hoeffding_alpha_floor`.
    pub fn hoeffding_b(&self, r: f64) -> Result<ExtendedReal> {
        if !(r > 0.0) || r.is_infinite() {
            return domain("r", r, "Hoeffding bound requires finite r > 0");
        }
        match self.d_min() {
            ExtendedReal::PosInf => return Ok(ExtendedReal::PosInf),
            ExtendedReal::Finite(dmin) if r <= dmin => return Ok(ExtendedReal::PosInf),
            ExtendedReal::Finite(_) => {}
        }
        Ok(ExtendedReal::Finite(self.hoeffding_finite(r)))
    }

    fn hoeffding_finite(&self, r: f64) -> f64 {
        let f = |a: f64| -(self.q(a).ln() + (1.0 - a) * r) / a;
        let m = maximize(
            f,
            self.policy.hoeffding_alpha_floor,
            1.0,
            self.policy.grid_points,
            self.policy.golden_tol,
        );
        m.value.max(0.0)
    }

    /// Unique root of `B(r) = s r` by bisection on `r` above `D_min`.
    pub fn solve_fixed_point(&self, s: f64) -> Result<ExtendedReal> {
        if !(s > 0.0) || s.is_infinite() {
            return domain("s", s, "fixed point requires finite s > 0");
        }
        if self.rho.max_distance(&self.sigma) <= 1e-9 {
            return Err(Error::Degenerate(
                "rho = sigma: B(r) = s r has no unique solution".into(),
            ));
        }
        let dmin = match self.d_min() {
            ExtendedReal::PosInf => return Ok(ExtendedReal::PosInf),
            ExtendedReal::Finite(v) => v,
        };
        let g = |r: f64| self.hoeffding_finite(r) - s * r;
        let lo = dmin + 1e-12 * dmin.max(1.0);
        if g(lo) <= 0.0 {
            return Ok(ExtendedReal::Finite(lo));
        }
        let mut hi = match self.umegaki() {
            ExtendedReal::Finite(d) if d > lo => d,
            _ => 2.0 * lo.max(1.0),
        };
        let mut guard = 0;
        while g(hi) > 0.0 {
            hi *= 2.0;
            guard += 1;
            if guard > 200 {
                return Err(Error::Infeasible("no sign change of B(r) - s r".into()));
            }
        }
        // g is decreasing; bisect on -g.
        let (a, b) = bisect_increasing(|r| -g(r), lo, hi, 1e-13 * hi.max(1.0), 200);
        Ok(ExtendedReal::Finite(0.5 * (a + b)))
    }

    /// `sup_a |a log q(a)| / (a (1 - c) - 1)^2`, the Lipschitz constant of
    /// `s -> xi_s` on `s >= c`.
    pub fn lipschitz_constant(&self, c: f64) -> Result<ExtendedReal> {
        if !(c > 0.0) || c.is_infinite() {
            return domain("c", c, "Lipschitz constant requires finite c > 0");
        }
        if self.orthogonal_supports() {
            return Ok(ExtendedReal::PosInf);
        }
        let f = |a: f64| {
            let den = a * (1.0 - c) - 1.0;
            (a * self.q(a).ln()).abs() / (den * den)
        };
        let grid = (4 * self.policy.grid_points).max(4097);
        let m = maximize(f, 0.0, 1.0, grid, self.policy.golden_tol);
        Ok(ExtendedReal::Finite(m.value))
    }
}

/// `Tr(rho^a sigma^(1-a))` from explicit fractional powers. Independent of
/// the profile's overlap formula; errors if the trace has a non-negligible
/// imaginary part.
pub fn q_alpha_direct(rho: &DensityMatrix, sigma: &DensityMatrix, a: f64, policy: &NumericPolicy) -> Result<f64> {
    check_dims(rho.dim(), sigma.dim())?;
    let ra = fractional_power_with(rho.matrix(), a, policy)?;
    let sb = fractional_power_with(sigma.matrix(), 1.0 - a, policy)?;
    let t = trace_product(ra.as_matrix(), sb.as_matrix());
    if t.im.abs() > 1e-10 {
        return Err(Error::NotHermitian {
            max_asymmetry: t.im.abs(),
            tolerance: 1e-10,
        });
    }
    Ok(t.re.clamp(0.0, 1.0))
}

pub fn q_alpha(rho: &DensityMatrix, sigma: &DensityMatrix, a: f64) -> Result<f64> {
    RenyiProfile::new(rho, sigma)?.q_alpha(a)
}

pub fn petz_renyi(rho: &DensityMatrix, sigma: &DensityMatrix, a: f64) -> Result<ExtendedReal> {
    RenyiProfile::new(rho, sigma)?.petz_renyi(a)
}

pub fn umegaki(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<ExtendedReal> {
    Ok(RenyiProfile::new(rho, sigma)?.umegaki())
}

pub fn d_min(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<ExtendedReal> {
    Ok(RenyiProfile::new(rho, sigma)?.d_min())
}

pub fn chernoff(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<ExtendedReal> {
    Ok(RenyiProfile::new(rho, sigma)?.chernoff())
}

pub fn xi_s(rho: &DensityMatrix, sigma: &DensityMatrix, s: f64) -> Result<ExtendedReal> {
    RenyiProfile::new(rho, sigma)?.xi_s(s)
}

pub fn hoeffding_b(rho: &DensityMatrix, sigma: &DensityMatrix, r: f64) -> Result<ExtendedReal> {
    RenyiProfile::new(rho, sigma)?.hoeffding_b(r)
}

pub fn solve_fixed_point(rho: &DensityMatrix, sigma: &DensityMatrix, s: f64) -> Result<ExtendedReal> {
    RenyiProfile::new(rho, sigma)?.solve_fixed_point(s)
}

pub fn lipschitz_constant(rho: &DensityMatrix, sigma: &DensityMatrix, c: f64) -> Result<ExtendedReal> {
    RenyiProfile::new(rho, sigma)?.lipschitz_constant(c)
}
