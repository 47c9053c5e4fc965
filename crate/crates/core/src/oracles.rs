//! Independent references for the one-shot solvers.
//!
//! The classical routines work directly on probability vectors by sorting
//! likelihood ratios and never touch an eigensolver; the type-class solver
//! handles binary i.i.d. products of any size in the log domain.

use std::cmp::Ordering;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::extended::ExtendedReal;
use crate::matrix::{check_dims, eigh, positive_part_trace_unchecked, CMatrix, DensityMatrix, TestOperator};
use crate::oneshot::{error_pair, ErrorPoint, NPBoundary};
use crate::states::rng;

const PROB_TOL: f64 = 1e-12;
const RATIO_TIE_TOL: f64 = 1e-12;

/// Two probability vectors on a common alphabet, viewed as commuting states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalPair {
    p: Vec<f64>,
    q: Vec<f64>,
}

impl ClassicalPair {
    pub fn new(p: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::Empty);
        }
        check_dims(p.len(), q.len())?;
        for v in [&p, &q] {
            if let Some(&x) = v.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
                return domain("probability", x, "entries must be finite and >= 0");
            }
            let total: f64 = v.iter().sum();
            if (total - 1.0).abs() > PROB_TOL {
                return Err(Error::InvalidTrace { trace: total });
            }
        }
        Ok(Self { p, q })
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn swapped(&self) -> Self {
        Self {
            p: self.q.clone(),
            q: self.p.clone(),
        }
    }

    /// The pair as diagonal density matrices `(rho, sigma)`.
    pub fn to_states(&self) -> Result<(DensityMatrix, DensityMatrix)> {
        Ok((DensityMatrix::from_diagonal(&self.p)?, DensityMatrix::from_diagonal(&self.q)?))
    }
}

/// An atom group with a common likelihood ratio `p / q`.
#[derive(Debug, Clone, Copy)]
struct Atom {
    p: f64,
    q: f64,
}

impl Atom {
    fn ratio(&self) -> f64 {
        if self.q == 0.0 {
            f64::INFINITY
        } else {
            self.p / self.q
        }
    }
}

fn ratio_cmp(a: &Atom, b: &Atom) -> Ordering {
    // Compare p_a / q_a with p_b / q_b without dividing.
    (a.p * b.q).total_cmp(&(b.p * a.q))
}

fn same_ratio(a: &Atom, b: &Atom) -> bool {
    (a.p * b.q - b.p * a.q).abs() <= RATIO_TIE_TOL * (a.p * b.q).max(b.p * a.q).max(f64::MIN_POSITIVE)
}

/// Atoms with positive `p`, grouped by ratio and sorted by ascending ratio.
fn ascending_groups(pair: &ClassicalPair) -> Vec<Atom> {
    let mut atoms: Vec<Atom> = pair
        .p
        .iter()
        .zip(&pair.q)
        .filter(|(p, _)| **p > 0.0)
        .map(|(&p, &q)| Atom { p, q })
        .collect();
    atoms.sort_by(ratio_cmp);
    let mut groups: Vec<Atom> = Vec::with_capacity(atoms.len());
    for a in atoms {
        match groups.last_mut() {
            Some(g) if same_ratio(g, &a) => {
                g.p += a.p;
                g.q += a.q;
            }
            _ => groups.push(a),
        }
    }
    groups
}

/// Vertices of the likelihood-ratio boundary, from `alpha = 0` (accept every
/// atom with `p > 0`) to `beta = 0` (accept only the atoms with `q = 0`).
fn classical_vertices(pair: &ClassicalPair) -> Vec<ErrorPoint> {
    let groups = ascending_groups(pair);
    let mut alpha = 0.0;
    let mut beta: f64 = groups.iter().map(|g| g.q).sum();
    let mut out = vec![ErrorPoint {
        alpha,
        beta,
        mu: Some(ExtendedReal::Finite(0.0)),
        mix: 0.0,
    }];
    for g in groups.iter().filter(|g| g.q > 0.0) {
        alpha += g.p;
        beta -= g.q;
        out.push(ErrorPoint {
            alpha: alpha.min(1.0),
            beta: beta.max(0.0),
            mu: Some(ExtendedReal::Finite(g.ratio())),
            mix: 0.0,
        });
    }
    if let Some(last) = out.last_mut() {
        last.beta = 0.0;
        last.mu = Some(ExtendedReal::PosInf);
    }
    out
}

/// Exact boundary by the likelihood-ratio sort.
pub fn classical_boundary(pair: &ClassicalPair) -> NPBoundary {
    NPBoundary::from_points(classical_vertices(pair))
}

fn check_sc(s: f64, c: f64) -> Result<()> {
    if !(s > 0.0) || s.is_infinite() {
        return domain("s", s, "s must be finite and > 0");
    }
    if !(c > 0.0) || c.is_infinite() {
        return domain("C", c, "C must be finite and > 0");
    }
    Ok(())
}

/// Exact `Q_C^(s)` for a commuting pair.
pub fn classical_q_s(pair: &ClassicalPair, s: f64, c: f64) -> Result<f64> {
    check_sc(s, c)?;
    let v = classical_vertices(pair);
    let g = |a: f64, b: f64| a - c * b.powf(s);
    if g(v[0].alpha, v[0].beta) >= 0.0 {
        return Ok(v[0].beta);
    }
    for w in v.windows(2) {
        let (l, r) = (w[0], w[1]);
        if g(r.alpha, r.beta) <= 0.0 {
            continue;
        }
        let at = |t: f64| (l.alpha + t * (r.alpha - l.alpha), l.beta + t * (r.beta - l.beta));
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if m <= lo || m >= hi {
                break;
            }
            let (a, b) = at(m);
            if g(a, b) > 0.0 {
                hi = m;
            } else {
                lo = m;
            }
        }
        return Ok(at(lo).1);
    }
    Ok(v[v.len() - 1].beta)
}

/// Exact `beta_eps` for a commuting pair.
pub fn classical_beta_epsilon(pair: &ClassicalPair, eps: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eps) {
        return domain("eps", eps, "type-I threshold must lie in [0, 1]");
    }
    let v = classical_vertices(pair);
    if eps <= v[0].alpha {
        return Ok(v[0].beta);
    }
    for w in v.windows(2) {
        if eps <= w[1].alpha {
            let t = (eps - w[0].alpha) / (w[1].alpha - w[0].alpha);
            return Ok(w[0].beta + t * (w[1].beta - w[0].beta));
        }
    }
    Ok(0.0)
}

/// Bayes error `sum_i min(p p_i, (1 - p) q_i)`.
pub fn classical_p_err_bayes(pair: &ClassicalPair, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return domain("p", p, "prior must lie in (0, 1)");
    }
    Ok(pair
        .p
        .iter()
        .zip(&pair.q)
        .map(|(a, b)| (p * a).min((1.0 - p) * b))
        .sum())
}

/// Exact `min alpha^(1/s) + C beta` for a commuting pair: per-segment
/// stationary point for `s < 1`, vertex minimum otherwise.
pub fn classical_p_err_s_c(pair: &ClassicalPair, s: f64, c: f64) -> Result<f64> {
    check_sc(s, c)?;
    let v = classical_vertices(pair);
    let inv = 1.0 / s;
    let h = |a: f64, b: f64| a.powf(inv) + c * b;
    let mut best = v.iter().map(|p| h(p.alpha, p.beta)).fold(f64::INFINITY, f64::min);
    if s < 1.0 {
        for w in v.windows(2) {
            let (da, db) = (w[1].alpha - w[0].alpha, w[1].beta - w[0].beta);
            if da <= 0.0 || db >= 0.0 {
                continue;
            }
            // d/dt: inv a^(inv-1) da + c db = 0.
            let a_star = (-c * db / (inv * da)).powf(1.0 / (inv - 1.0));
            let t = (a_star - w[0].alpha) / da;
            if (0.0..=1.0).contains(&t) {
                best = best.min(h(a_star, w[0].beta + t * db));
            }
        }
    }
    Ok(best)
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

fn ln_choose(n: u64) -> Vec<f64> {
    // ln C(n, j) for j = 0..=n, by the multiplicative recurrence.
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for j in 1..=n {
        acc += ((n - j + 1) as f64).ln() - (j as f64).ln();
        out.push(acc);
    }
    out
}

fn ln_or_neg_inf(x: f64) -> f64 {
    if x > 0.0 {
        x.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// Log-domain atom of a type class: `(ln P, ln Q)`.
#[derive(Debug, Clone, Copy)]
struct LogAtom {
    lp: f64,
    lq: f64,
}

impl LogAtom {
    fn log_ratio(&self) -> f64 {
        match (self.lp == f64::NEG_INFINITY, self.lq == f64::NEG_INFINITY) {
            (_, true) => f64::INFINITY,
            (true, false) => f64::NEG_INFINITY,
            _ => self.lp - self.lq,
        }
    }
}

/// `ln Q_C^(s)(p^n || q^n)` for a binary pair, computed exactly over the
/// `n + 1` type classes.
pub fn iid_type_q_s(pair: &ClassicalPair, n: u64, s: f64, c: f64) -> Result<f64> {
    check_sc(s, c)?;
    if pair.len() != 2 {
        return domain("alphabet", pair.len() as f64, "type-class solver needs a binary pair");
    }
    if n == 0 || n > 100_000 {
        return domain("n", n as f64, "n must lie in 1..=100000");
    }
    let binom = ln_choose(n);
    let (lp1, lp2) = (ln_or_neg_inf(pair.p[0]), ln_or_neg_inf(pair.p[1]));
    let (lq1, lq2) = (ln_or_neg_inf(pair.q[0]), ln_or_neg_inf(pair.q[1]));
    let term = |b: f64, j: u64, l1: f64, l2: f64| {
        let (a, m) = (j as f64, (n - j) as f64);
        let x = if a > 0.0 { a * l1 } else { 0.0 };
        let y = if m > 0.0 { m * l2 } else { 0.0 };
        b + x + y
    };
    let mut atoms: Vec<LogAtom> = (0..=n)
        .map(|j| LogAtom {
            lp: term(binom[j as usize], j, lp1, lp2),
            lq: term(binom[j as usize], j, lq1, lq2),
        })
        .filter(|a| a.lp > f64::NEG_INFINITY)
        .collect();
    atoms.sort_by(|a, b| a.log_ratio().total_cmp(&b.log_ratio()));
    // Merge exact ties (only possible when every class has the same ratio).
    let mut groups: Vec<LogAtom> = Vec::with_capacity(atoms.len());
    for a in atoms {
        match groups.last_mut() {
            Some(g) if (g.log_ratio() - a.log_ratio()).abs() <= 1e-12 * a.log_ratio().abs().max(1.0) => {
                g.lp = log_add(g.lp, a.lp);
                g.lq = log_add(g.lq, a.lq);
            }
            _ => groups.push(a),
        }
    }

    // Vertex k: the first k groups rejected. ln alpha_k is a prefix sum of
    // P, ln beta_k a suffix sum of Q.
    let m = groups.len();
    let mut log_alpha = vec![f64::NEG_INFINITY; m + 1];
    for k in 0..m {
        log_alpha[k + 1] = log_add(log_alpha[k], groups[k].lp);
    }
    let mut log_beta = vec![f64::NEG_INFINITY; m + 1];
    for k in (0..m).rev() {
        let q = if groups[k].lq.is_finite() { groups[k].lq } else { f64::NEG_INFINITY };
        log_beta[k] = log_add(log_beta[k + 1], q);
    }
    let ln_c = c.ln();
    let g = |la: f64, lb: f64| {
        if la == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else if lb == f64::NEG_INFINITY {
            f64::INFINITY
        } else {
            la - ln_c - s * lb
        }
    };
    if g(log_alpha[0], log_beta[0]) >= 0.0 {
        return Ok(log_beta[0]);
    }
    let Some(k) = (1..=m).find(|&k| g(log_alpha[k], log_beta[k]) > 0.0) else {
        return Ok(log_beta[m]);
    };
    // Crossing on the segment that rejects group k - 1 with weight t.
    let grp = groups[k - 1];
    let (la0, lb0) = (log_alpha[k - 1], log_beta[k - 1]);
    let frac_q = if grp.lq == f64::NEG_INFINITY { 0.0 } else { (grp.lq - lb0).exp().min(1.0) };
    let at = |t: f64| {
        let la = log_add(la0, if t > 0.0 { t.ln() + grp.lp } else { f64::NEG_INFINITY });
        let lb = lb0 + (-t * frac_q).ln_1p();
        (la, lb)
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (la, lb) = at(mid);
        if g(la, lb) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(at(lo).1)
}

/// Upper envelope for `q_s_c`: the smallest `beta` among feasible random tests.
///
/// Tests are `U diag(clip(1/2 + lambda/4)) U^dagger` for Gaussian Hermitian
/// `H = U diag(lambda) U^dagger`; the trivial test `I` (`alpha = 0`) is always a
/// candidate so the result is well defined.
pub fn random_test_search(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    s: f64,
    c: f64,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    check_sc(s, c)?;
    check_dims(rho.dim(), sigma.dim())?;
    if trials == 0 {
        return domain("trials", 0.0, "at least one trial is required");
    }
    let d = rho.dim();
    let mut rng = rng(seed);
    let mut best = 1.0f64;
    for _ in 0..trials {
        let mut h: CMatrix = DMatrix::from_fn(d, d, |_, _| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im)
        });
        h = (&h + h.adjoint()) * Complex64::from(0.5);
        let eig = eigh(&h)?;
        let l = eig.map_spectrum(|x| (0.5 + x / 4.0).clamp(0.0, 1.0));
        let pt = error_pair(rho, sigma, &TestOperator::from_trusted(l))?;
        if pt.alpha <= c * pt.beta.powf(s) && pt.beta < best {
            best = pt.beta;
        }
    }
    Ok(best)
}

/// `p - Tr(p rho - (1 - p) sigma)_+`, the closed form of the Bayes error.
pub fn helstrom_check(p: f64, rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return domain("p", p, "prior must lie in (0, 1)");
    }
    check_dims(rho.dim(), sigma.dim())?;
    let m = rho.as_matrix() * Complex64::from(p) - sigma.as_matrix() * Complex64::from(1.0 - p);
    Ok(p - positive_part_trace_unchecked(&m)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oneshot::{p_err_bayes, q_s_c};
    use crate::states::random_state;

    fn reference() -> ClassicalPair {
        ClassicalPair::new(vec![0.9, 0.1], vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn pair_validation() {
        assert!(ClassicalPair::new(vec![0.5, 0.4], vec![0.5, 0.5]).is_err());
        assert!(ClassicalPair::new(vec![1.0], vec![0.5, 0.5]).is_err());
        assert!(ClassicalPair::new(vec![1.5, -0.5], vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn boundary_examples() {
        let same = ClassicalPair::new(vec![0.2, 0.3, 0.5], vec![0.2, 0.3, 0.5]).unwrap();
        let v: Vec<_> = classical_boundary(&same).vertices().iter().map(|p| (p.alpha, p.beta)).collect();
        assert_eq!(v.len(), 2);
        assert!(v[0].0.abs() < 1e-15 && (v[0].1 - 1.0).abs() < 1e-15);
        assert!((v[1].0 - 1.0).abs() < 1e-15 && v[1].1 == 0.0);

        let b = classical_boundary(&reference());
        let v: Vec<_> = b.vertices().iter().map(|p| (p.alpha, p.beta)).collect();
        let expected = [(0.0, 1.0), (0.1, 0.5), (1.0, 0.0)];
        assert_eq!(v.len(), 3);
        for (a, e) in v.iter().zip(expected) {
            assert!((a.0 - e.0).abs() < 1e-15 && (a.1 - e.1).abs() < 1e-15);
        }

        let orth = ClassicalPair::new(vec![1.0, 0.0], vec![0.0, 1.0]).unwrap();
        let b = classical_boundary(&orth);
        assert!(b.vertices().iter().any(|p| p.alpha == 0.0 && p.beta == 0.0));
    }

    #[test]
    fn q_s_examples() {
        let same = ClassicalPair::new(vec![0.5, 0.5], vec![0.5, 0.5]).unwrap();
        assert!((classical_q_s(&same, 1.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((classical_q_s(&reference(), 1.0, 1.0).unwrap() - 5.0 / 14.0).abs() < 1e-15);
        let (r, s) = reference().to_states().unwrap();
        let quantum = q_s_c(&r, &s, 2.0, 1.0).unwrap().value;
        assert!((classical_q_s(&reference(), 2.0, 1.0).unwrap() - quantum).abs() < 1e-12);
        assert!(classical_q_s(&reference(), 0.0, 1.0).is_err());
    }

    #[test]
    fn iid_examples() {
        let pair = reference();
        for (s, c) in [(1.0, 1.0), (0.5, 2.0), (2.0, 0.5)] {
            let one = iid_type_q_s(&pair, 1, s, c).unwrap().exp();
            assert!((one - classical_q_s(&pair, s, c).unwrap()).abs() < 1e-12);
        }
        let two = iid_type_q_s(&pair, 2, 1.0, 1.0).unwrap().exp();
        assert!((two - 25.0 / 106.0).abs() < 1e-12, "{two}");
        let xi1 = 0.112_377_446_352_836_84;
        let e = -iid_type_q_s(&pair, 2000, 1.0, 1.0).unwrap() / 2000.0;
        assert!(e >= xi1 && e <= xi1 * 1.03, "{e}");
        let three = ClassicalPair::new(vec![0.2, 0.3, 0.5], vec![0.5, 0.3, 0.2]).unwrap();
        assert!(iid_type_q_s(&three, 2, 1.0, 1.0).is_err());
    }

    #[test]
    fn iid_matches_explicit_product() {
        let pair = ClassicalPair::new(vec![0.7, 0.3], vec![0.2, 0.8]).unwrap();
        for n in 1..=5u32 {
            let mut p = vec![1.0];
            let mut q = vec![1.0];
            for _ in 0..n {
                p = p.iter().flat_map(|x| pair.p().iter().map(move |y| x * y)).collect();
                q = q.iter().flat_map(|x| pair.q().iter().map(move |y| x * y)).collect();
            }
            let product = ClassicalPair::new(p, q).unwrap();
            let direct = classical_q_s(&product, 1.5, 0.7).unwrap();
            let typed = iid_type_q_s(&pair, n as u64, 1.5, 0.7).unwrap().exp();
            assert!((direct - typed).abs() < 1e-12, "n={n}: {direct} vs {typed}");
        }
    }

    #[test]
    fn random_search_is_an_upper_bound() {
        let rho = random_state(2, None, 3).unwrap();
        assert!(random_test_search(&rho, &rho, 1.0, 1.0, 200, 0).unwrap() >= 0.5 - 1e-12);
        let (r, s) = reference().to_states().unwrap();
        let found = random_test_search(&r, &s, 1.0, 1.0, 10_000, 7).unwrap();
        assert!(found >= 5.0 / 14.0 - 1e-9);
        assert!(found - 5.0 / 14.0 < 1e-2, "{found}");
        assert!(random_test_search(&r, &s, 1.0, 1.0, 0, 0).is_err());
    }

    #[test]
    fn helstrom_examples() {
        let rho = random_state(3, None, 1).unwrap();
        for p in [0.3, 0.5, 0.8] {
            assert!((helstrom_check(p, &rho, &rho).unwrap() - p.min(1.0 - p)).abs() < 1e-12);
        }
        let (a, b) = (DensityMatrix::basis(2, 0).unwrap(), DensityMatrix::basis(2, 1).unwrap());
        assert!(helstrom_check(0.5, &a, &b).unwrap().abs() < 1e-15);
        let (r, s) = reference().to_states().unwrap();
        assert!((helstrom_check(0.5, &r, &s).unwrap() - 0.3).abs() < 1e-15);
        let sigma = random_state(3, None, 2).unwrap();
        let direct = p_err_bayes(0.4, &rho, &sigma).unwrap().value;
        assert!((helstrom_check(0.4, &rho, &sigma).unwrap() - direct).abs() < 1e-9);
    }
}
