//! JSON file formats.
//!
//! Floats are written with the shortest representation that parses back to
//! the same double, so `parse(serialize(x)) == x` bit for bit.

use std::fs;
use std::path::Path;

use psd_schur::{ComplexMatrix, SchurParams, C64};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

/// `{"rows": n, "cols": m, "data": [[re, im], ...]}`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl MatrixFile {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            data: m.data().iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix, CliError> {
        if self.data.len() != self.rows * self.cols {
            return Err(CliError::Usage(format!(
                "matrix file declares {}x{} but holds {} entries",
                self.rows,
                self.cols,
                self.data.len()
            )));
        }
        let data = self.data.iter().map(|&[re, im]| C64::new(re, im)).collect();
        ComplexMatrix::new(self.rows, self.cols, data).map_err(|e| CliError::Usage(e.to_string()))
    }
}

/// One contraction; `k < j`, both 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaEntry {
    pub k: usize,
    pub j: usize,
    pub re: f64,
    pub im: f64,
    pub defined: bool,
}

/// `{"dim": d, "diag": [L_11, ...], "gamma": [...]}`.
///
/// `diag` holds the square roots of the matrix diagonal. Every pair `k < j`
/// appears exactly once, in row-major order of the upper triangle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    pub dim: usize,
    pub diag: Vec<f64>,
    pub gamma: Vec<GammaEntry>,
}

impl ParamsFile {
    pub fn from_params(p: &SchurParams) -> Self {
        Self {
            dim: p.dim(),
            diag: p.diag().to_vec(),
            gamma: p
                .entries()
                .map(|(k, j, g, defined)| GammaEntry {
                    k: k + 1,
                    j: j + 1,
                    re: g.re,
                    im: g.im,
                    defined,
                })
                .collect(),
        }
    }

    pub fn to_params(&self) -> Result<SchurParams, CliError> {
        let bad = |msg: String| CliError::Usage(format!("invalid params file: {msg}"));
        let d = self.dim;
        if self.diag.len() != d {
            return Err(bad(format!(
                "{} diagonal entries for dim {d}",
                self.diag.len()
            )));
        }
        let mut p = SchurParams::identity(d);
        p.set_diag(&self.diag).map_err(|e| bad(e.to_string()))?;
        let mut seen = vec![false; d * d];
        for e in &self.gamma {
            if !(1 <= e.k && e.k < e.j && e.j <= d) {
                return Err(bad(format!(
                    "index ({}, {}) outside 1 <= k < j <= {d}",
                    e.k, e.j
                )));
            }
            let (k, j) = (e.k - 1, e.j - 1);
            if std::mem::replace(&mut seen[k * d + j], true) {
                return Err(bad(format!("duplicate entry ({}, {})", e.k, e.j)));
            }
            let g = C64::new(e.re, e.im);
            if e.defined {
                p.set_gamma(k, j, g).map_err(|e| bad(e.to_string()))?;
            } else if g != C64::new(0.0, 0.0) {
                return Err(bad(format!("undefined entry ({}, {}) must be 0", e.k, e.j)));
            } else {
                p.mask(k, j);
            }
        }
        let expected = d * d.saturating_sub(1) / 2;
        if self.gamma.len() != expected {
            return Err(bad(format!(
                "{} contractions, expected {expected}",
                self.gamma.len()
            )));
        }
        p.validate().map_err(|e| bad(e.to_string()))?;
        Ok(p)
    }
}

/// A JSON number, or `"inf"` / `"-inf"` / `"nan"` where JSON has none.
pub fn number(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else if x.is_nan() {
        Value::from("nan")
    } else if x > 0.0 {
        Value::from("inf")
    } else {
        Value::from("-inf")
    }
}

pub fn complex(z: C64) -> Value {
    Value::from(vec![number(z.re), number(z.im)])
}

pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("cannot parse {}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    fs::write(path, to_json_string(value))
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

pub fn read_matrix(path: &Path) -> Result<ComplexMatrix, CliError> {
    read_json::<MatrixFile>(path)?.to_matrix()
}

pub fn write_matrix(path: &Path, m: &ComplexMatrix) -> Result<(), CliError> {
    write_json(path, &MatrixFile::from_matrix(m))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trip_is_bit_exact() {
        let vals = [
            0.1,
            1.0 / 3.0,
            -2.5e-300,
            6.02e23,
            f64::MIN_POSITIVE,
            5e-324,
            -0.0,
        ];
        let m = ComplexMatrix::from_fn(7, 1, |r, _| C64::new(vals[r], vals[6 - r]));
        let text = to_json_string(&MatrixFile::from_matrix(&m));
        let back: MatrixFile = serde_json::from_str(&text).unwrap();
        let m2 = back.to_matrix().unwrap();
        for (a, b) in m.data().iter().zip(m2.data()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn params_indices_are_one_based() {
        let mut p = SchurParams::identity(3);
        p.set_gamma(0, 2, C64::new(0.5, -0.25)).unwrap();
        p.mask(1, 2);
        let f = ParamsFile::from_params(&p);
        assert_eq!((f.gamma[1].k, f.gamma[1].j, f.gamma[1].re), (1, 3, 0.5));
        assert!(!f.gamma[2].defined);
        assert_eq!(f.to_params().unwrap(), p);
    }

    #[test]
    fn params_rejects_bad_entries() {
        let f = ParamsFile::from_params(&SchurParams::identity(2));
        let mut g = f.clone();
        g.gamma[0].re = 1.5;
        assert!(g.to_params().is_err());
        let mut g = f.clone();
        g.gamma[0].defined = false;
        g.gamma[0].re = 0.1;
        assert!(g.to_params().is_err());
        let mut g = f.clone();
        g.gamma.push(g.gamma[0].clone());
        assert!(g.to_params().is_err());
        let mut g = f;
        g.gamma[0].k = 0;
        assert!(g.to_params().is_err());
    }

    #[test]
    fn size_mismatch_is_rejected() {
        let f = MatrixFile {
            rows: 2,
            cols: 2,
            data: vec![[1.0, 0.0]; 3],
        };
        assert!(f.to_matrix().is_err());
    }

    #[test]
    fn infinities_become_strings() {
        assert_eq!(number(f64::NEG_INFINITY), Value::from("-inf"));
        assert_eq!(number(f64::INFINITY), Value::from("inf"));
        assert_eq!(number(0.5), Value::from(0.5));
    }
}
