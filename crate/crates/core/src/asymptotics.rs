//! Exponent traces over i.i.d. copies and the tables behind the two figures.

use rayon::prelude::*;
use serde::Serialize;

use crate::divergences::RenyiProfile;
use crate::error::{domain, Error, Result};
use crate::extended::ExtendedReal;
use crate::matrix::{tensor_power_with, DensityMatrix};
use crate::oneshot::Frontier;
use crate::oracles::{iid_type_q_s, ClassicalPair};
use crate::policy::NumericPolicy;

/// Largest tensor power computed for quantum traces.
pub const QUANTUM_N_MAX: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TracePoint {
    pub n: u64,
    /// `ln Q_C^(s)` on `n` copies; `-inf` only for orthogonal supports.
    pub log_q: f64,
    pub exponent: ExtendedReal,
}

impl TracePoint {
    fn new(n: u64, log_q: f64) -> Self {
        let exponent = if log_q == f64::NEG_INFINITY {
            ExtendedReal::PosInf
        } else {
            ExtendedReal::Finite((-log_q / n as f64).max(0.0))
        };
        Self { n, log_q, exponent }
    }
}

/// `-ln Q_C^(s)(rho^n || sigma^n) / n` for a list of `n`, with the limit `xi_s`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentTrace {
    pub s: f64,
    pub c: f64,
    pub points: Vec<TracePoint>,
    pub target: ExtendedReal,
}

impl ExponentTrace {
    /// Absolute distance between the exponent at `n` and the target.
    pub fn gap(&self, n: u64) -> Option<f64> {
        let p = self.points.iter().find(|p| p.n == n)?;
        match (p.exponent, self.target) {
            (ExtendedReal::Finite(e), ExtendedReal::Finite(t)) => Some((e - t).abs()),
            _ => None,
        }
    }

    /// CSV with columns `n, logQ, exponent, target`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["n", "logQ", "exponent", "target"]).expect("in-memory csv");
        for p in &self.points {
            w.write_record([
                p.n.to_string(),
                p.log_q.to_string(),
                p.exponent.to_string(),
                self.target.to_string(),
            ])
            .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8")
    }
}

pub fn quantum_exponent_trace(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    s: f64,
    c: f64,
    n_max: usize,
) -> Result<ExponentTrace> {
    quantum_exponent_trace_with(rho, sigma, s, c, n_max, &NumericPolicy::default())
}

/// Exact `Q_C^(s)` on the tensor powers `n = 1..=n_max`, computed in parallel.
pub fn quantum_exponent_trace_with(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    s: f64,
    c: f64,
    n_max: usize,
    policy: &NumericPolicy,
) -> Result<ExponentTrace> {
    if n_max == 0 || n_max > QUANTUM_N_MAX {
        return domain("n_max", n_max as f64, "quantum traces need 1 <= n_max <= 8");
    }
    let required = (rho.dim() as u128).checked_pow(n_max as u32).unwrap_or(u128::MAX);
    if required > policy.dim_cap as u128 {
        return Err(Error::Resource {
            required: required.min(usize::MAX as u128) as usize,
            cap: policy.dim_cap,
        });
    }
    let target = RenyiProfile::with_policy(rho, sigma, policy.clone())?.xi_s(s)?;
    let points = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let r = tensor_power_with(rho, n, policy)?;
            let t = tensor_power_with(sigma, n, policy)?;
            let q = Frontier::with_policy(&r, &t, policy.clone())?.q_s_c(s, c)?.value;
            Ok(TracePoint::new(n as u64, q.ln()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExponentTrace { s, c, points, target })
}

/// Type-class trace for a binary classical pair.
pub fn classical_exponent_trace(pair: &ClassicalPair, s: f64, c: f64, n_list: &[u64]) -> Result<ExponentTrace> {
    let mut ns = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let points = ns
        .par_iter()
        .map(|&n| Ok(TracePoint::new(n, iid_type_q_s(pair, n, s, c)?)))
        .collect::<Result<Vec<_>>>()?;
    let (rho, sigma) = pair.to_states()?;
    let target = RenyiProfile::new(&rho, &sigma)?.xi_s(s)?;
    Ok(ExponentTrace { s, c, points, target })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fig1Row {
    pub r: f64,
    pub b: ExtendedReal,
    pub line: f64,
    pub line_s: f64,
}

/// Hoeffding curve `B(r)` against the lines `r` and `s r`, with their
/// intersection abscissas.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig1Table {
    pub s: f64,
    pub rows: Vec<Fig1Row>,
    /// Solution of `B(r) = r`.
    pub crossing_line: f64,
    /// Solution of `B(r) = s r`.
    pub crossing_line_s: f64,
}

impl Fig1Table {
    /// CSV with columns `r, B, line1, line_s`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["r", "B", "line1", "line_s"]).expect("in-memory csv");
        for row in &self.rows {
            w.write_record([
                row.r.to_string(),
                row.b.to_string(),
                row.line.to_string(),
                row.line_s.to_string(),
            ])
            .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8")
    }
}

pub fn fig1_data(rho: &DensityMatrix, sigma: &DensityMatrix, s: f64, r_grid: &[f64]) -> Result<Fig1Table> {
    let profile = RenyiProfile::new(rho, sigma)?;
    if profile.orthogonal_supports() {
        return Err(Error::Degenerate("fig1 needs states with overlapping supports".into()));
    }
    if let Some(&r) = r_grid.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
        return domain("r", r, "grid rates must be finite and > 0");
    }
    let crossing = |k: f64| -> Result<f64> {
        profile
            .solve_fixed_point(k)?
            .finite()
            .ok_or_else(|| Error::Degenerate("B(r) never meets the line".into()))
    };
    let crossing_line = crossing(1.0)?;
    let crossing_line_s = crossing(s)?;
    let rows = r_grid
        .par_iter()
        .map(|&r| {
            Ok(Fig1Row {
                r,
                b: profile.hoeffding_b(r)?,
                line: r,
                line_s: s * r,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Fig1Table {
        s,
        rows,
        crossing_line,
        crossing_line_s,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig2Row {
    pub s: f64,
    pub xi_s: ExtendedReal,
    /// `"D"` for the `s = 0` row, `"chernoff"` for `s = 1`.
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig2Table {
    pub rows: Vec<Fig2Row>,
}

impl Fig2Table {
    /// CSV with columns `s, xi_s, label`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["s", "xi_s", "label"]).expect("in-memory csv");
        for row in &self.rows {
            w.write_record([
                row.s.to_string(),
                row.xi_s.to_string(),
                row.label.clone().unwrap_or_default(),
            ])
            .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8")
    }
}

/// `xi_s` over an ascending grid, framed by the endpoint rows `s = 0`
/// (Umegaki) and `s = 1` (Chernoff), which are added when missing.
pub fn fig2_data(rho: &DensityMatrix, sigma: &DensityMatrix, s_grid: &[f64]) -> Result<Fig2Table> {
    let profile = RenyiProfile::new(rho, sigma)?;
    if profile.orthogonal_supports() {
        return Err(Error::Degenerate("fig2 needs states with overlapping supports".into()));
    }
    if let Some(&s) = s_grid.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
        return domain("s", s, "grid values must be finite and > 0");
    }
    let mut grid: Vec<f64> = s_grid.iter().copied().filter(|s| (s - 1.0).abs() > 1e-12).collect();
    grid.push(0.0);
    grid.push(1.0);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let rows = grid
        .par_iter()
        .map(|&s| {
            let (xi, label) = if s == 0.0 {
                (profile.umegaki(), Some("D".to_string()))
            } else if s == 1.0 {
                (profile.chernoff(), Some("chernoff".to_string()))
            } else {
                (profile.xi_s(s)?, None)
            };
            Ok(Fig2Row { s, xi_s: xi, label })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Fig2Table { rows })
}

/// `start:stop:step` inclusive of `stop` up to rounding.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [a, b, h] = parts.as_slice() else {
        return Err(Error::Parse(format!("grid '{spec}' is not start:stop:step")));
    };
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| Error::Parse(format!("grid '{spec}': {e}")));
    let (a, b, h) = (num(a)?, num(b)?, num(h)?);
    if !(h > 0.0) || !(b >= a) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Parse(format!("grid '{spec}' needs start <= stop and step > 0")));
    }
    let count = ((b - a) / h + 1e-9).floor() as usize;
    if count > 1_000_000 {
        return Err(Error::Parse(format!("grid '{spec}' has too many points")));
    }
    Ok((0..=count).map(|k| a + k as f64 * h).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{bloch_pure, random_state};

    const CHERNOFF: f64 = 0.112_377_446_352_836_84;
    const UMEGAKI: f64 = 0.368_064_207_168_497_1;

    fn reference() -> ClassicalPair {
        ClassicalPair::new(vec![0.9, 0.1], vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn equal_states_have_flat_trace() {
        let rho = random_state(2, None, 1).unwrap();
        let t = quantum_exponent_trace(&rho, &rho, 1.0, 1.0, 3).unwrap();
        for p in &t.points {
            assert!((p.log_q - 0.5f64.ln()).abs() < 1e-10);
        }
        assert!(t.target.unwrap() < 1e-10);
    }

    #[test]
    fn diag_pair_quantum_trace() {
        let (r, s) = reference().to_states().unwrap();
        let t = quantum_exponent_trace(&r, &s, 1.0, 1.0, 2).unwrap();
        let e: Vec<f64> = t.points.iter().map(|p| p.exponent.unwrap()).collect();
        assert!((e[0] - (14.0f64 / 5.0).ln()).abs() < 1e-10);
        assert!((e[1] - (106.0f64 / 25.0).ln() / 2.0).abs() < 1e-10);
        assert!((e[0] - 1.02962).abs() < 1e-5 && (e[1] - 0.722281).abs() < 1e-6);
        assert!((t.target.unwrap() - CHERNOFF).abs() < 1e-9);
    }

    #[test]
    fn quantum_trace_respects_caps() {
        let rho = random_state(2, None, 1).unwrap();
        assert!(quantum_exponent_trace(&rho, &rho, 1.0, 1.0, 9).is_err());
        let big = random_state(5, None, 2).unwrap();
        let policy = NumericPolicy {
            dim_cap: 100,
            ..NumericPolicy::default()
        };
        assert!(matches!(
            quantum_exponent_trace_with(&big, &big, 1.0, 1.0, 3, &policy),
            Err(Error::Resource { .. })
        ));
    }

    #[test]
    fn classical_trace_converges() {
        let pair = reference();
        let t = classical_exponent_trace(&pair, 1.0, 1.0, &[2000, 1, 200]).unwrap();
        assert_eq!(t.points.iter().map(|p| p.n).collect::<Vec<_>>(), vec![1, 200, 2000]);
        let e2000 = t.points[2].exponent.unwrap();
        assert!((CHERNOFF..=CHERNOFF * 1.03).contains(&e2000), "{e2000}");
        assert!(t.gap(2000).unwrap() < t.gap(200).unwrap());
        let csv = t.to_csv();
        assert!(csv.starts_with("n,logQ,exponent,target\n"));
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn fig1_crossings() {
        let (r, s) = reference().to_states().unwrap();
        let grid = parse_grid("0.02:0.4:0.02").unwrap();
        let t = fig1_data(&r, &s, 0.5, &grid).unwrap();
        assert!((t.crossing_line - CHERNOFF).abs() < 1e-6);
        assert!((t.crossing_line_s - 0.149_752_891_961_311_8).abs() < 1e-6);
        let near_d = RenyiProfile::new(&r, &s).unwrap().hoeffding_b(UMEGAKI - 1e-6).unwrap();
        assert!(near_d.unwrap() < 1e-4);
        // Rank-deficient rho: rows at or below D_min are infinite.
        let rho = random_state(3, Some(1), 4).unwrap();
        let sigma = random_state(3, None, 5).unwrap();
        let dmin = RenyiProfile::new(&rho, &sigma).unwrap().d_min().unwrap();
        let t = fig1_data(&rho, &sigma, 2.0, &[dmin * 0.5, dmin + 0.5]).unwrap();
        assert!(t.rows[0].b.is_infinite());
        assert!(t.rows[1].b.is_finite());
        assert!(fig1_data(&r, &s, 1.0, &[0.0]).is_err());
    }

    #[test]
    fn fig2_endpoints_and_monotonicity() {
        let rho = bloch_pure(0.3, 0.0).unwrap().mix(0.7, &DensityMatrix::maximally_mixed(2).unwrap()).unwrap();
        let sigma = random_state(2, None, 9).unwrap();
        let t = fig2_data(&rho, &sigma, &parse_grid("0.05:2:0.05").unwrap()).unwrap();
        assert_eq!(t.rows[0].label.as_deref(), Some("D"));
        let p = RenyiProfile::new(&rho, &sigma).unwrap();
        assert_eq!(t.rows[0].xi_s, p.umegaki());
        let one = t.rows.iter().find(|r| r.s == 1.0).unwrap();
        assert_eq!(one.label.as_deref(), Some("chernoff"));
        assert_eq!(one.xi_s, p.chernoff());
        for w in t.rows.windows(2) {
            assert!(w[0].s < w[1].s);
            assert!(w[1].xi_s.to_f64() <= w[0].xi_s.to_f64() + 1e-9);
        }
        assert_eq!(t.rows.iter().filter(|r| (r.s - 1.0).abs() < 1e-9).count(), 1);
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("0:1:0.5").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("0.05:1:0.05").unwrap().len(), 20);
        assert!(parse_grid("1:0:0.1").is_err());
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("0:1:0").is_err());
    }
}
