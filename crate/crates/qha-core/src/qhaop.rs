//! QHAOP v1 container format.
//!
//! A QHAOP file is a single JSON object:
//! `{format:"qhaop", version:1, L, kind, layout:"row-major",
//! scalar:"complex-f64-interleaved", payload:"<base64>"}`.
//! The payload holds little-endian 8-byte floats, real/imaginary
//! interleaved, in row-major order. Measures carry no payload; their atoms
//! serialize as a JSON list of `{k, l, re, im}` records.

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{QhaError, Result};
use crate::operator::{DiscreteMeasure, OperatorMatrix};
use crate::phase::{PhasePoint, PhaseSpace};
use crate::signal::Signal;
use crate::tfa::PhaseGrid;

/// A value that can live in a QHAOP container.
#[derive(Debug, Clone, PartialEq)]
pub enum QhaopObject {
    Operator(OperatorMatrix),
    Signal(Signal),
    Measure(DiscreteMeasure),
    Grid(PhaseGrid),
}

impl QhaopObject {
    pub fn kind(&self) -> &'static str {
        match self {
            QhaopObject::Operator(_) => "operator",
            QhaopObject::Signal(_) => "signal",
            QhaopObject::Measure(_) => "measure",
            QhaopObject::Grid(_) => "grid",
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Container {
    format: String,
    version: u32,
    #[serde(rename = "L")]
    l: usize,
    kind: String,
    layout: String,
    scalar: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    payload: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    atoms: Option<Vec<AtomRecord>>,
}

#[derive(Serialize, Deserialize)]
struct AtomRecord {
    k: usize,
    l: usize,
    re: f64,
    im: f64,
}

fn encode_complex(values: impl Iterator<Item = C64>) -> String {
    let mut bytes = Vec::new();
    for c in values {
        bytes.extend_from_slice(&c.re.to_le_bytes());
        bytes.extend_from_slice(&c.im.to_le_bytes());
    }
    B64.encode(bytes)
}

fn decode_complex(payload: &str, expected: usize) -> Result<Vec<C64>> {
    let bytes = B64
        .decode(payload)
        .map_err(|e| QhaError::Format(format!("bad base64 payload: {e}")))?;
    if bytes.len() != expected * 16 {
        return Err(QhaError::Format(format!(
            "payload holds {} bytes, expected {}",
            bytes.len(),
            expected * 16
        )));
    }
    let mut out = Vec::with_capacity(expected);
    for chunk in bytes.chunks_exact(16) {
        let re = f64::from_le_bytes(chunk[..8].try_into().unwrap());
        let im = f64::from_le_bytes(chunk[8..].try_into().unwrap());
        out.push(C64::new(re, im));
    }
    Ok(out)
}

/// Serializes an object into a QHAOP v1 JSON string.
pub fn to_json(space: &PhaseSpace, obj: &QhaopObject) -> Result<String> {
    let l = space.len();
    let (payload, atoms) = match obj {
        QhaopObject::Operator(a) => {
            a.check_space(space)?;
            // row-major walk; nalgebra stores column-major internally
            let rows = (0..l).flat_map(|i| (0..l).map(move |j| (i, j)));
            (Some(encode_complex(rows.map(|(i, j)| a.mat[(i, j)]))), None)
        }
        QhaopObject::Grid(g) => {
            g.check_space(space)?;
            let rows = (0..l).flat_map(|i| (0..l).map(move |j| (i, j)));
            (
                Some(encode_complex(rows.map(|(i, j)| g.values[(i, j)]))),
                None,
            )
        }
        QhaopObject::Signal(s) => {
            if s.len() != l {
                return Err(QhaError::LengthMismatch(s.len(), l));
            }
            (Some(encode_complex(s.values.iter().copied())), None)
        }
        QhaopObject::Measure(m) => {
            let atoms = m
                .atoms
                .iter()
                .map(|(z, w)| AtomRecord {
                    k: z.k,
                    l: z.l,
                    re: w.re,
                    im: w.im,
                })
                .collect();
            (None, Some(atoms))
        }
    };
    let container = Container {
        format: "qhaop".to_string(),
        version: 1,
        l,
        kind: obj.kind().to_string(),
        layout: "row-major".to_string(),
        scalar: "complex-f64-interleaved".to_string(),
        payload,
        atoms,
    };
    serde_json::to_string_pretty(&container).map_err(|e| QhaError::Format(e.to_string()))
}

/// Parses a QHAOP v1 JSON string back into a phase space and object.
pub fn from_json(text: &str) -> Result<(PhaseSpace, QhaopObject)> {
    let c: Container =
        serde_json::from_str(text).map_err(|e| QhaError::Format(e.to_string()))?;
    if c.format != "qhaop" || c.version != 1 {
        return Err(QhaError::Format(format!(
            "unsupported container {}/{}",
            c.format, c.version
        )));
    }
    if c.layout != "row-major" || c.scalar != "complex-f64-interleaved" {
        return Err(QhaError::Format(format!(
            "unsupported layout {} / scalar {}",
            c.layout, c.scalar
        )));
    }
    if c.l == 0 {
        return Err(QhaError::Format("L must be positive".to_string()));
    }
    let space = PhaseSpace::new(c.l);
    let l = c.l;
    let need_payload = || {
        c.payload
            .as_deref()
            .ok_or_else(|| QhaError::Format(format!("kind {} requires a payload", c.kind)))
    };
    let obj = match c.kind.as_str() {
        "operator" => {
            let vals = decode_complex(need_payload()?, l * l)?;
            let mat = DMatrix::from_fn(l, l, |i, j| vals[i * l + j]);
            QhaopObject::Operator(OperatorMatrix::new(mat))
        }
        "grid" => {
            let vals = decode_complex(need_payload()?, l * l)?;
            let mat = DMatrix::from_fn(l, l, |i, j| vals[i * l + j]);
            QhaopObject::Grid(PhaseGrid::new(mat))
        }
        "signal" => {
            let vals = decode_complex(need_payload()?, l)?;
            QhaopObject::Signal(Signal::new(DVector::from_vec(vals)))
        }
        "measure" => {
            let atoms = c
                .atoms
                .ok_or_else(|| QhaError::Format("measure requires an atoms list".to_string()))?;
            QhaopObject::Measure(DiscreteMeasure::from_atoms(atoms.into_iter().map(|a| {
                (
                    PhasePoint::new(&space, a.k as i64, a.l as i64),
                    C64::new(a.re, a.im),
                )
            })))
        }
        other => {
            return Err(QhaError::Format(format!("unknown kind {other}")));
        }
    };
    Ok((space, obj))
}
