//! Text dumps of channel realizations and precoders for cross-checking against
//! other implementations.
//!
//! Matrices are written as `{"rows", "cols", "data"}` with `data` holding
//! `re, im` pairs of the entries in column-major order.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::arrays::ArrayGeometry;
use crate::channel::{MultiuserChannel, UserChannelParams};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::precoders::{BeamAssignment, PrecoderPair, Scheme};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl From<&CMatrix> for MatrixJson {
    fn from(m: &CMatrix) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            data: m.as_slice().iter().flat_map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<&MatrixJson> for CMatrix {
    type Error = Error;

    fn try_from(m: &MatrixJson) -> Result<Self> {
        if m.data.len() != 2 * m.rows * m.cols {
            return Err(Error::Dimension(format!(
                "{} numbers for a {}x{} complex matrix",
                m.data.len(),
                m.rows,
                m.cols
            )));
        }
        Ok(CMatrix::from_fn(m.rows, m.cols, |r, c| {
            let i = 2 * (c * m.rows + r);
            C64::new(m.data[i], m.data[i + 1])
        }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelDump {
    pub geometry: String,
    pub params: Vec<UserChannelParams>,
    pub spatial: MatrixJson,
    pub beamspace: MatrixJson,
}

impl From<&MultiuserChannel> for ChannelDump {
    fn from(c: &MultiuserChannel) -> Self {
        Self {
            geometry: c.geometry.to_string(),
            params: c.params.clone(),
            spatial: (&c.spatial).into(),
            beamspace: (&c.beamspace).into(),
        }
    }
}

impl TryFrom<&ChannelDump> for MultiuserChannel {
    type Error = Error;

    fn try_from(d: &ChannelDump) -> Result<Self> {
        let geometry: ArrayGeometry = d.geometry.parse()?;
        Ok(MultiuserChannel {
            geometry,
            params: d.params.clone(),
            spatial: (&d.spatial).try_into()?,
            beamspace: (&d.beamspace).try_into()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecoderDump {
    pub scheme: Scheme,
    pub assignment: Option<Vec<Vec<usize>>>,
    /// Dense `N × N_RF` analog precoder.
    pub rf: MatrixJson,
    pub bb: MatrixJson,
}

impl From<&PrecoderPair> for PrecoderDump {
    fn from(p: &PrecoderPair) -> Self {
        Self {
            scheme: p.scheme,
            assignment: p.assignment.as_ref().map(|a| a.per_user().to_vec()),
            rf: (&p.rf.to_dense()).into(),
            bb: (&p.bb).into(),
        }
    }
}

impl PrecoderDump {
    pub fn assignment(&self) -> Result<Option<BeamAssignment>> {
        self.assignment.clone().map(BeamAssignment::new).transpose()
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

pub fn write_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_json(value)? + "\n").map_err(|e| Error::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}
