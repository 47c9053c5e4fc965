//! JSON formats for states and channels.
//!
//! State: `{"dim": d, "matrix": [[[re, im], ...], ...]}`, row-major.
//! Channel: `{"d_in": a, "d_out": b, "kraus": [<matrix>, ...]}` with each
//! matrix in the same nested `[re, im]` layout (`d_out` rows, `d_in` columns).

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channels::KrausChannel;
use crate::error::{Error, Result};
use crate::matrix::{CMatrix, ComplexSquareMatrix, DensityMatrix};
use crate::policy::NumericPolicy;

type Rows = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateRecord {
    pub dim: usize,
    pub matrix: Rows,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRecord {
    pub d_in: usize,
    pub d_out: usize,
    pub kraus: Vec<Rows>,
}

fn to_rows(m: &CMatrix) -> Rows {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn from_rows(rows: &Rows, nrows: usize, ncols: usize) -> Result<CMatrix> {
    if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Parse(format!("expected a {nrows}x{ncols} matrix")));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])))
}

impl StateRecord {
    pub fn from_state(rho: &DensityMatrix) -> Self {
        Self {
            dim: rho.dim(),
            matrix: to_rows(rho.as_matrix()),
        }
    }

    pub fn to_state(&self, policy: &NumericPolicy) -> Result<DensityMatrix> {
        let m = from_rows(&self.matrix, self.dim, self.dim)?;
        DensityMatrix::new_with(ComplexSquareMatrix::new(m)?, policy)
    }
}

impl ChannelRecord {
    pub fn from_channel(ch: &KrausChannel) -> Self {
        Self {
            d_in: ch.d_in(),
            d_out: ch.d_out(),
            kraus: ch.kraus().iter().map(to_rows).collect(),
        }
    }

    pub fn to_channel(&self, policy: &NumericPolicy) -> Result<KrausChannel> {
        let ops = self
            .kraus
            .iter()
            .map(|k| from_rows(k, self.d_out, self.d_in))
            .collect::<Result<Vec<_>>>()?;
        KrausChannel::new_with(self.d_in, self.d_out, ops, policy)
    }
}

pub fn state_to_json(rho: &DensityMatrix) -> String {
    serde_json::to_string_pretty(&StateRecord::from_state(rho)).expect("state records always serialize")
}

pub fn state_from_json(text: &str, policy: &NumericPolicy) -> Result<DensityMatrix> {
    let record: StateRecord = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    record.to_state(policy)
}

pub fn channel_to_json(ch: &KrausChannel) -> String {
    serde_json::to_string_pretty(&ChannelRecord::from_channel(ch)).expect("channel records always serialize")
}

pub fn channel_from_json(text: &str, policy: &NumericPolicy) -> Result<KrausChannel> {
    let record: ChannelRecord = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    record.to_channel(policy)
}
