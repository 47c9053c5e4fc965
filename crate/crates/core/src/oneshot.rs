//! Exact one-shot error probabilities by Neyman-Pearson boundary tracing.
//!
//! The achievable region of error pairs `(alpha, beta)` is convex. Its lower
//! boundary is swept by the extremal tests `L_mu = {rho - mu sigma > 0}`,
//! `mu` in `[0, inf]`. Each one minimizes the Lagrangian
//!
//! ```text
//! alpha + mu beta >= 1 - Tr(rho - mu sigma)_+
//! ```
//!
//! with equality. Where `rho - mu sigma` has a kernel the boundary contains a
//! flat face, realized by randomizing between the two adjacent extremal
//! tests. Every objective here is monotone along the boundary, so each
//! optimum is found by bisection on `log mu` followed by an exact solve on the
//! chord between the two bracketing extremal points.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::error::{domain, Result};
use crate::extended::ExtendedReal;
use crate::matrix::{check_dims, eigh, positive_part_trace_unchecked, CMatrix, DensityMatrix, TestOperator};
use crate::optimize::golden_maximum;
use crate::policy::NumericPolicy;

/// `mu` is swept over `[e^-LOG_MU_RANGE, e^LOG_MU_RANGE]`; beyond that the
/// analytic endpoints `mu = 0` and `mu = inf` take over.
const LOG_MU_RANGE: f64 = 31.0;
const BISECTION_ITERS: usize = 100;
/// Lagrangian tolerance used for the coarse boundary that seeds the
/// non-convex `p_err` search.
const COARSE_GAP_TOL: f64 = 1e-9;
const COARSE_MAX_VERTICES: usize = 4000;

/// A point `(alpha, beta)` of the error region, optionally certified by the
/// supporting multiplier `mu` and the randomization weight `mix` between the
/// two extremal tests it interpolates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorPoint {
    pub alpha: f64,
    pub beta: f64,
    pub mu: Option<ExtendedReal>,
    pub mix: f64,
}

impl ErrorPoint {
    fn certified(alpha: f64, beta: f64, mu: ExtendedReal) -> Self {
        Self {
            alpha: alpha.clamp(0.0, 1.0),
            beta: beta.clamp(0.0, 1.0),
            mu: Some(mu),
            mix: 0.0,
        }
    }

    fn mu_f64(&self) -> f64 {
        self.mu.map_or(f64::NAN, ExtendedReal::to_f64)
    }

    /// `alpha + mu beta - (1 - Tr(rho - mu sigma)_+)` for a finite multiplier:
    /// zero for points on the supporting line, positive above it.
    pub fn certificate_gap(&self, rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<Option<f64>> {
        let Some(ExtendedReal::Finite(mu)) = self.mu else {
            return Ok(None);
        };
        check_dims(rho.dim(), sigma.dim())?;
        let diff = rho.as_matrix() - sigma.as_matrix() * num_complex::Complex64::from(mu);
        let bound = 1.0 - positive_part_trace_unchecked(&diff)?;
        Ok(Some(self.alpha + mu * self.beta - bound))
    }
}

/// `(Tr((I - L) rho), Tr(L sigma))` for an explicit test.
pub fn error_pair(rho: &DensityMatrix, sigma: &DensityMatrix, test: &TestOperator) -> Result<ErrorPoint> {
    check_dims(rho.dim(), sigma.dim())?;
    check_dims(rho.dim(), test.dim())?;
    let l = test.as_matrix();
    let accept_rho = crate::matrix::trace_product(l, rho.as_matrix()).re;
    let beta = crate::matrix::trace_product(l, sigma.as_matrix()).re;
    Ok(ErrorPoint {
        alpha: (1.0 - accept_rho).clamp(0.0, 1.0),
        beta: beta.clamp(0.0, 1.0),
        mu: None,
        mix: 0.0,
    })
}

/// Optimal value together with the achieving boundary point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Optimum {
    pub value: f64,
    pub point: ErrorPoint,
}

/// Piecewise-linear lower boundary of the error region.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NPBoundary {
    vertices: Vec<ErrorPoint>,
}

impl NPBoundary {
    /// Builds the lower convex hull of the given points. Dominated and
    /// collinear points are dropped.
    pub fn from_points(mut points: Vec<ErrorPoint>) -> Self {
        points.sort_by(|a, b| a.alpha.total_cmp(&b.alpha).then(a.beta.total_cmp(&b.beta)));
        let mut hull: Vec<ErrorPoint> = Vec::with_capacity(points.len());
        for p in points {
            if let Some(last) = hull.last() {
                if p.beta >= last.beta {
                    continue;
                }
                if p.alpha <= last.alpha {
                    hull.pop();
                }
            }
            while hull.len() >= 2 {
                let o = hull[hull.len() - 2];
                let a = hull[hull.len() - 1];
                let cross = (a.alpha - o.alpha) * (p.beta - o.beta) - (a.beta - o.beta) * (p.alpha - o.alpha);
                if cross <= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        Self { vertices: hull }
    }

    pub fn vertices(&self) -> &[ErrorPoint] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Largest type-I error on the boundary (attained at `beta = 0`).
    pub fn alpha_max(&self) -> f64 {
        self.vertices.last().map_or(1.0, |v| v.alpha)
    }

    /// Boundary `beta` at type-I error `alpha` by linear interpolation;
    /// `alpha` beyond the last vertex gives that vertex's `beta`.
    pub fn beta_at(&self, alpha: f64) -> f64 {
        let v = &self.vertices;
        if alpha <= v[0].alpha {
            return v[0].beta;
        }
        for w in v.windows(2) {
            if alpha <= w[1].alpha {
                let t = (alpha - w[0].alpha) / (w[1].alpha - w[0].alpha);
                return w[0].beta + t * (w[1].beta - w[0].beta);
            }
        }
        v[v.len() - 1].beta
    }

    /// Minimum of `wa alpha + wb beta` over the vertices.
    pub fn min_linear(&self, wa: f64, wb: f64) -> f64 {
        self.vertices
            .iter()
            .map(|v| wa * v.alpha + wb * v.beta)
            .fold(f64::INFINITY, f64::min)
    }

    /// CSV with columns `mu, alpha, beta`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["mu", "alpha", "beta"]).expect("in-memory csv");
        for v in &self.vertices {
            let mu = v.mu.map_or_else(String::new, |m| m.to_string());
            w.write_record([mu, v.alpha.to_string(), v.beta.to_string()])
                .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8")
    }
}

/// Extremal point plus the Lagrangian value at its multiplier.
#[derive(Debug, Clone, Copy)]
struct Extremal {
    point: ErrorPoint,
    lagrangian: f64,
}

/// Oracle for the extremal tests of one state pair.
#[derive(Debug, Clone)]
pub struct Frontier {
    rho: CMatrix,
    sigma: CMatrix,
    policy: NumericPolicy,
    start: ErrorPoint,
    end: ErrorPoint,
}

#[derive(Clone, Copy)]
struct Candidate {
    gap: f64,
    left: usize,
    right: usize,
    point: ErrorPoint,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.gap == other.gap
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.gap.total_cmp(&other.gap)
    }
}

impl Frontier {
    pub fn new(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<Self> {
        Self::with_policy(rho, sigma, NumericPolicy::default())
    }

    pub fn with_policy(rho: &DensityMatrix, sigma: &DensityMatrix, policy: NumericPolicy) -> Result<Self> {
        check_dims(rho.dim(), sigma.dim())?;
        let (r, s) = (rho.as_matrix(), sigma.as_matrix());
        let thr = policy.support_threshold;

        // mu = 0: L = pi_rho.
        let er = eigh(r)?;
        let sigma_diag = er.diagonal_in_basis(s);
        // Errors are summed over the relevant eigenvectors directly rather
        // than as `1 - accepted`, so that an exact zero stays zero.
        let (mut alpha0, mut beta0) = (0.0, 0.0);
        for (k, &lambda) in er.eigenvalues.iter().enumerate() {
            if lambda > thr {
                beta0 += sigma_diag[k];
            } else {
                alpha0 += lambda.max(0.0);
            }
        }
        let start = ErrorPoint::certified(alpha0, beta0, ExtendedReal::Finite(0.0));

        // mu = inf: L = pi_ker(sigma).
        let es = eigh(s)?;
        let rho_diag = es.diagonal_in_basis(r);
        let (mut alpha1, mut beta1) = (0.0, 0.0);
        for (k, &lambda) in es.eigenvalues.iter().enumerate() {
            if lambda <= thr {
                beta1 += lambda.max(0.0);
            } else {
                alpha1 += rho_diag[k];
            }
        }
        let end = ErrorPoint::certified(alpha1, beta1, ExtendedReal::PosInf);

        Ok(Self {
            rho: r.clone(),
            sigma: s.clone(),
            policy,
            start,
            end,
        })
    }

    /// Boundary point at `mu = 0` (`alpha = 0`, `beta = Tr(pi_rho sigma)`).
    pub fn start(&self) -> ErrorPoint {
        self.start
    }

    /// Boundary point at `mu = inf` (`beta = 0`, `alpha = 1 - Tr(pi_ker(sigma) rho)`).
    pub fn end(&self) -> ErrorPoint {
        self.end
    }

    fn extremal_full(&self, mu: f64) -> Result<Extremal> {
        if mu <= 0.0 {
            return Ok(Extremal {
                point: self.start,
                lagrangian: 0.0,
            });
        }
        if mu.is_infinite() {
            return Ok(Extremal {
                point: self.end,
                lagrangian: f64::NAN,
            });
        }
        let m = &self.rho - &self.sigma * num_complex::Complex64::from(mu);
        let eig = eigh(&m)?;
        let cut = 1e-14 * (1.0 + mu);
        let (accepted, rejected): (Vec<usize>, Vec<usize>) = (0..eig.dim()).partition(|&k| eig.eigenvalues[k] > cut);
        let alpha = expectation_sum(&self.rho, &eig.eigenvectors, &rejected);
        let beta = expectation_sum(&self.sigma, &eig.eigenvectors, &accepted);
        let lagrangian = 1.0 - eig.eigenvalues.iter().filter(|&&x| x > 0.0).sum::<f64>();
        Ok(Extremal {
            point: ErrorPoint::certified(alpha, beta, ExtendedReal::Finite(mu)),
            lagrangian,
        })
    }

    /// Error pair of the extremal test `{rho - mu sigma > 0}`.
    pub fn extremal(&self, mu: f64) -> Result<ErrorPoint> {
        Ok(self.extremal_full(mu)?.point)
    }

    /// Traces the boundary with the policy's gap tolerance and vertex cap.
    pub fn trace(&self) -> Result<NPBoundary> {
        self.trace_with(
            self.policy.boundary_gap_tol,
            self.policy.boundary_slope_gap,
            self.policy.boundary_max_vertices,
        )
    }

    /// Supporting-line refinement: for each segment, the extremal test at the
    /// multiplier parallel to the chord either lies on the chord (a face, done)
    /// or strictly below it (a new vertex). Segments are refined largest gap
    /// first until every gap is below `gap_tol` or `max_vertices` is reached.
    pub fn trace_with(&self, gap_tol: f64, slope_gap: f64, max_vertices: usize) -> Result<NPBoundary> {
        let same = |a: &ErrorPoint, b: &ErrorPoint| (a.alpha - b.alpha).abs() <= 1e-15 && (a.beta - b.beta).abs() <= 1e-15;
        if same(&self.start, &self.end) {
            return Ok(NPBoundary::from_points(vec![self.start]));
        }
        let mut points = vec![self.start, self.end];
        let mut heap = BinaryHeap::new();
        if let Some(c) = self.split_candidate(&points, 0, 1, gap_tol, slope_gap)? {
            heap.push(c);
        }
        while let Some(c) = heap.pop() {
            if points.len() >= max_vertices.max(2) {
                break;
            }
            points.push(c.point);
            let mid = points.len() - 1;
            for (l, r) in [(c.left, mid), (mid, c.right)] {
                if let Some(next) = self.split_candidate(&points, l, r, gap_tol, slope_gap)? {
                    heap.push(next);
                }
            }
        }
        Ok(NPBoundary::from_points(points))
    }

    fn split_candidate(
        &self,
        points: &[ErrorPoint],
        left: usize,
        right: usize,
        gap_tol: f64,
        slope_gap: f64,
    ) -> Result<Option<Candidate>> {
        let (l, r) = (points[left], points[right]);
        let d_alpha = r.alpha - l.alpha;
        let d_beta = l.beta - r.beta;
        if d_alpha <= 1e-15 || d_beta <= 1e-15 {
            return Ok(None);
        }
        let mu = d_alpha / d_beta;
        let (mu_l, mu_r) = (l.mu_f64(), r.mu_f64());
        if mu_l.is_finite() && mu_r.is_finite() && (mu_r - mu_l).abs() <= slope_gap * mu.max(1.0) {
            return Ok(None);
        }
        let e = self.extremal_full(mu)?;
        let chord = l.alpha + mu * l.beta;
        let gap = chord - e.lagrangian;
        if gap <= gap_tol {
            return Ok(None);
        }
        Ok(Some(Candidate {
            gap,
            left,
            right,
            point: e.point,
        }))
    }

    /// Brackets the first boundary point where the non-decreasing predicate
    /// `g` turns positive. Requires `g(start) <= 0 < g(end)`.
    fn bracket<G: Fn(&ErrorPoint) -> f64>(&self, g: G) -> Result<(ErrorPoint, ErrorPoint)> {
        let low = self.extremal((-LOG_MU_RANGE).exp())?;
        if g(&low) > 0.0 {
            return Ok((self.start, low));
        }
        let high = self.extremal(LOG_MU_RANGE.exp())?;
        if g(&high) <= 0.0 {
            return Ok((high, self.end));
        }
        let (mut lo, mut hi) = (-LOG_MU_RANGE, LOG_MU_RANGE);
        let (mut lo_pt, mut hi_pt) = (low, high);
        for _ in 0..BISECTION_ITERS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= 1e-15 {
                break;
            }
            let p = self.extremal(mid.exp())?;
            if g(&p) > 0.0 {
                hi = mid;
                hi_pt = p;
            } else {
                lo = mid;
                lo_pt = p;
            }
        }
        Ok((lo_pt, hi_pt))
    }

    /// Point at weight `t` on the chord `lo -> hi`.
    fn chord_point(lo: &ErrorPoint, hi: &ErrorPoint, t: f64) -> ErrorPoint {
        let (ml, mh) = (lo.mu_f64(), hi.mu_f64());
        let mu = if ml <= 0.0 || !ml.is_finite() {
            mh
        } else if mh.is_infinite() || mh.is_nan() {
            ml
        } else {
            (ml * mh).sqrt()
        };
        ErrorPoint {
            alpha: (lo.alpha + t * (hi.alpha - lo.alpha)).clamp(0.0, 1.0),
            beta: (lo.beta + t * (hi.beta - lo.beta)).clamp(0.0, 1.0),
            mu: Some(ExtendedReal::from(mu)),
            mix: t,
        }
    }

    /// Zero of the non-decreasing `g` along the chord.
    fn chord_root<G: Fn(&ErrorPoint) -> f64>(lo: &ErrorPoint, hi: &ErrorPoint, g: G) -> ErrorPoint {
        let (mut a, mut b) = (0.0f64, 1.0f64);
        for _ in 0..BISECTION_ITERS {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if g(&Self::chord_point(lo, hi, m)) > 0.0 {
                b = m;
            } else {
                a = m;
            }
        }
        // Prefer the feasible side of the bracket.
        Self::chord_point(lo, hi, a)
    }

    /// `beta_eps = min { beta : alpha <= eps }`.
    pub fn beta_epsilon(&self, eps: f64) -> Result<Optimum> {
        if !(0.0..=1.0).contains(&eps) {
            return domain("eps", eps, "type-I threshold must lie in [0, 1]");
        }
        if eps >= self.end.alpha {
            return Ok(Optimum {
                value: self.end.beta,
                point: self.end,
            });
        }
        if self.start.alpha >= eps {
            return Ok(Optimum {
                value: self.start.beta,
                point: self.start,
            });
        }
        let (lo, hi) = self.bracket(|p| p.alpha - eps)?;
        let t = if hi.alpha > lo.alpha {
            ((eps - lo.alpha) / (hi.alpha - lo.alpha)).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let point = Self::chord_point(&lo, &hi, t);
        Ok(Optimum {
            value: point.beta,
            point,
        })
    }

    /// `Q_C^(s) = min { beta : alpha <= C beta^s }`, attained where
    /// `alpha = C beta^s` on the boundary.
    pub fn q_s_c(&self, s: f64, c: f64) -> Result<Optimum> {
        check_sc(s, c)?;
        let g = |p: &ErrorPoint| p.alpha - c * p.beta.powf(s);
        if g(&self.start) >= 0.0 {
            return Ok(Optimum {
                value: self.start.beta,
                point: self.start,
            });
        }
        if g(&self.end) <= 0.0 {
            return Ok(Optimum {
                value: self.end.beta,
                point: self.end,
            });
        }
        let (lo, hi) = self.bracket(g)?;
        let point = Self::chord_root(&lo, &hi, g);
        Ok(Optimum {
            value: point.beta,
            point,
        })
    }

    /// `p_err(p) = min p alpha + (1 - p) beta`, attained by the extremal test
    /// at `mu = (1 - p) / p`.
    pub fn p_err_bayes(&self, p: f64) -> Result<Optimum> {
        if !(p > 0.0 && p < 1.0) {
            return domain("p", p, "prior must lie in (0, 1)");
        }
        let objective = |e: &ErrorPoint| p * e.alpha + (1.0 - p) * e.beta;
        let mut best = self.extremal((1.0 - p) / p)?;
        for cand in [self.start, self.end] {
            if objective(&cand) < objective(&best) {
                best = cand;
            }
        }
        Ok(Optimum {
            value: objective(&best),
            point: best,
        })
    }

    /// `p_err^(s,C) = min alpha^(1/s) + C beta`.
    ///
    /// For `s <= 1` the objective is convex along the boundary and its
    /// stationarity condition `mu alpha^(1/s - 1) / s = C` is monotone in
    /// `mu`, so it is bracketed and finished in closed form on the chord.
    /// For `s > 1` the objective is concave on every flat face, so the
    /// minimum over a traced boundary's vertices is refined locally in `mu`.
    pub fn p_err_s_c(&self, s: f64, c: f64) -> Result<Optimum> {
        check_sc(s, c)?;
        let inv = 1.0 / s;
        let h = |p: &ErrorPoint| p.alpha.powf(inv) + c * p.beta;
        let best_of = |cands: &[ErrorPoint]| {
            let mut best = cands[0];
            for p in &cands[1..] {
                if h(p) < h(&best) {
                    best = *p;
                }
            }
            Optimum {
                value: h(&best),
                point: best,
            }
        };
        if s <= 1.0 {
            let phi = |p: &ErrorPoint| {
                let mu = p.mu_f64();
                if mu == 0.0 {
                    -c
                } else if mu.is_infinite() {
                    if p.alpha > 0.0 || inv == 1.0 {
                        f64::INFINITY
                    } else {
                        -c
                    }
                } else {
                    mu * p.alpha.powf(inv - 1.0) * inv - c
                }
            };
            if phi(&self.end) <= 0.0 {
                return Ok(best_of(&[self.start, self.end]));
            }
            let (lo, hi) = self.bracket(phi)?;
            let mut cands = vec![self.start, self.end, lo, hi];
            let d_alpha = hi.alpha - lo.alpha;
            let d_beta = hi.beta - lo.beta;
            if inv > 1.0 && d_alpha > 0.0 && d_beta < 0.0 {
                let a_star = (-c * d_beta * s / d_alpha).powf(s / (1.0 - s));
                let t = ((a_star - lo.alpha) / d_alpha).clamp(0.0, 1.0);
                cands.push(Self::chord_point(&lo, &hi, t));
            }
            return Ok(best_of(&cands));
        }

        let coarse = self.trace_with(
            self.policy.boundary_gap_tol.max(COARSE_GAP_TOL),
            self.policy.boundary_slope_gap,
            self.policy.boundary_max_vertices.min(COARSE_MAX_VERTICES),
        )?;
        let verts = coarse.vertices();
        let (idx, _) = verts
            .iter()
            .enumerate()
            .min_by(|a, b| h(a.1).total_cmp(&h(b.1)))
            .expect("boundary has at least one vertex");
        let mut best = best_of(&[verts[idx], self.start, self.end]);
        let log_mu = |p: &ErrorPoint| p.mu_f64().ln().clamp(-LOG_MU_RANGE, LOG_MU_RANGE);
        let lo = log_mu(&verts[idx.saturating_sub(1)]);
        let hi = log_mu(&verts[(idx + 1).min(verts.len() - 1)]);
        if hi > lo {
            let refined = golden_maximum(
                |x| self.extremal(x.exp()).map_or(f64::NEG_INFINITY, |p| -h(&p)),
                lo,
                hi,
                1e-12,
            );
            let p = self.extremal(refined.arg.exp())?;
            if h(&p) < best.value {
                best = Optimum { value: h(&p), point: p };
            }
        }
        Ok(best)
    }
}

/// `sum_k <v_k| m |v_k>` over the selected columns of `v`.
fn expectation_sum(m: &CMatrix, v: &CMatrix, cols: &[usize]) -> f64 {
    if cols.is_empty() {
        return 0.0;
    }
    let sub = v.select_columns(cols);
    let mv = m * &sub;
    sub.iter().zip(mv.iter()).map(|(a, b)| (a.conj() * b).re).sum()
}

fn check_sc(s: f64, c: f64) -> Result<()> {
    if !(s > 0.0) || s.is_infinite() {
        return domain("s", s, "s must be finite and > 0 (beta_epsilon covers s = 0)");
    }
    if !(c > 0.0) || c.is_infinite() {
        return domain("C", c, "C must be finite and > 0");
    }
    Ok(())
}

pub fn np_boundary(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<NPBoundary> {
    Frontier::new(rho, sigma)?.trace()
}

pub fn beta_epsilon(rho: &DensityMatrix, sigma: &DensityMatrix, eps: f64) -> Result<Optimum> {
    Frontier::new(rho, sigma)?.beta_epsilon(eps)
}

pub fn q_s_c(rho: &DensityMatrix, sigma: &DensityMatrix, s: f64, c: f64) -> Result<Optimum> {
    Frontier::new(rho, sigma)?.q_s_c(s, c)
}

/// `Q_min = Q_1^(1)`, symmetric in its arguments.
pub fn q_min(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<Optimum> {
    q_s_c(rho, sigma, 1.0, 1.0)
}

pub fn p_err_bayes(p: f64, rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<Optimum> {
    Frontier::new(rho, sigma)?.p_err_bayes(p)
}

pub fn p_err_s_c(rho: &DensityMatrix, sigma: &DensityMatrix, s: f64, c: f64) -> Result<Optimum> {
    Frontier::new(rho, sigma)?.p_err_s_c(s, c)
}
