//! The correlation tensor `T_{x₁…x_N} = Tr[ρ σ_{x₁} ⊗ … ⊗ σ_{x_N}]`.
//!
//! Entries are stored densely in base-4 row-major order with site 0 as the
//! most significant digit. Digit 0 is the identity, 1/2/3 are the x/y/z Pauli
//! directions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::state::{check_qubits, DensityMatrix, GhzParams};

/// Index order tag written into serialized tensors.
pub const TENSOR_ORDER: &str = "base4-rowmajor-site1-msb";

const IMAG_RESIDUE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTensor {
    n: usize,
    entries: Vec<f64>,
}

impl CorrelationTensor {
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        check_qubits(n)?;
        if entries.len() != 1 << (2 * n) {
            return param(format!("{} entries for a {n}-site tensor", entries.len()));
        }
        Ok(Self { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [f64] {
        &mut self.entries
    }

    /// Entry at per-site digits, e.g. `&[1, 2, 2]` for `T_{xyy}`.
    pub fn get(&self, digits: &[u8]) -> f64 {
        self.entries[index_of(digits)]
    }

    /// Entry addressed by a label such as `"xyy"` or `"z0z"`.
    pub fn get_label(&self, label: &str) -> Result<f64> {
        let digits = parse_label(label)?;
        if digits.len() != self.n {
            return param(format!("label {label:?} has wrong length for n = {}", self.n));
        }
        Ok(self.get(&digits))
    }

    /// The sub-table with every index restricted to x/y, as `2^n` values.
    /// Bit `n - 1 - j` of the sector index selects y (1) or x (0) on site `j`.
    pub fn xy_sector(&self) -> Vec<f64> {
        let n = self.n;
        (0..1usize << n)
            .map(|s| {
                let mut idx = 0;
                for j in 0..n {
                    let d = 1 + ((s >> (n - 1 - j)) & 1);
                    idx = idx * 4 + d;
                }
                self.entries[idx]
            })
            .collect()
    }

    /// Entries with every index in {x, y, z}, as `3^n` values in base-3 order
    /// (digit 0 = x, site 0 most significant).
    pub fn full_correlations(&self) -> Vec<f64> {
        let n = self.n;
        let count = 3usize.pow(n as u32);
        (0..count)
            .map(|mut t| {
                let mut digits = vec![0u8; n];
                for j in (0..n).rev() {
                    digits[j] = (t % 3) as u8 + 1;
                    t /= 3;
                }
                self.get(&digits)
            })
            .collect()
    }

    /// Entrywise absolute value.
    pub fn modulus(&self) -> CorrelationTensor {
        CorrelationTensor {
            n: self.n,
            entries: self.entries.iter().map(|v| v.abs()).collect(),
        }
    }

    /// Σ over all `4^n` entries squared; equals `2^n Tr ρ²`.
    pub fn frobenius_sq(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum()
    }

    pub fn max_abs_diff(&self, other: &CorrelationTensor) -> f64 {
        assert_eq!(self.n, other.n);
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_record(&self) -> TensorRecord {
        TensorRecord {
            n: self.n,
            order: TENSOR_ORDER.to_string(),
            entries: self.entries.clone(),
        }
    }

    pub fn from_record(rec: &TensorRecord) -> Result<Self> {
        if rec.order != TENSOR_ORDER {
            return param(format!("unsupported tensor order {:?}", rec.order));
        }
        Self::new(rec.n, rec.entries.clone())
    }
}

/// JSON shape of a serialized tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorRecord {
    pub n: usize,
    pub order: String,
    pub entries: Vec<f64>,
}

pub fn index_of(digits: &[u8]) -> usize {
    digits.iter().fold(0, |acc, &d| acc * 4 + d as usize)
}

pub fn digits_of(n: usize, mut index: usize) -> Vec<u8> {
    let mut d = vec![0u8; n];
    for j in (0..n).rev() {
        d[j] = (index & 3) as u8;
        index >>= 2;
    }
    d
}

/// Parses `0`/`1`/`2`/`3` or `i`/`x`/`y`/`z` characters into digits.
pub fn parse_label(label: &str) -> Result<Vec<u8>> {
    label
        .chars()
        .map(|c| match c {
            '0' | 'i' | 'I' => Ok(0),
            '1' | 'x' | 'X' => Ok(1),
            '2' | 'y' | 'Y' => Ok(2),
            '3' | 'z' | 'Z' => Ok(3),
            other => param(format!("bad tensor label character {other:?}")),
        })
        .collect()
}

/// Numerical correlation tensor of a density matrix.
///
/// Uses a per-site Pauli transform, `O(n 4^n)` in total. Fails if any entry
/// carries an imaginary residue above 1e-9.
pub fn correlation_tensor(rho: &DensityMatrix) -> Result<CorrelationTensor> {
    let n = rho.n();
    let dim = rho.dim();
    let mut buf = vec![Complex64::new(0.0, 0.0); dim * dim];
    // Interleave row/column bits so each site owns one base-4 digit 2r + c.
    for r in 0..dim {
        for c in 0..dim {
            let mut idx = 0usize;
            for j in 0..n {
                let shift = n - 1 - j;
                let d = 2 * ((r >> shift) & 1) + ((c >> shift) & 1);
                idx = idx * 4 + d;
            }
            buf[idx] = rho.get(r, c);
        }
    }
    let i = Complex64::new(0.0, 1.0);
    for j in 0..n {
        let stride = 1usize << (2 * (n - 1 - j));
        for base in 0..buf.len() {
            if !(base / stride).is_multiple_of(4) {
                continue;
            }
            let p00 = buf[base];
            let p01 = buf[base + stride];
            let p10 = buf[base + 2 * stride];
            let p11 = buf[base + 3 * stride];
            // Tr[ρ σ] = Σ_{rc} ρ_rc σ_cr
            buf[base] = p00 + p11;
            buf[base + stride] = p01 + p10;
            buf[base + 2 * stride] = i * (p01 - p10);
            buf[base + 3 * stride] = p00 - p11;
        }
    }
    let mut entries = Vec::with_capacity(buf.len());
    for (k, v) in buf.iter().enumerate() {
        if v.im.abs() > IMAG_RESIDUE_TOL {
            return Err(Error::NumericalIntegrity(format!(
                "tensor entry {k} has imaginary residue {:e}",
                v.im
            )));
        }
        entries.push(v.re);
    }
    Ok(CorrelationTensor { n, entries })
}

/// Closed-form correlation tensor of `cos α |0…0⟩ + sin α |1…1⟩`.
///
/// Nonzero entries: identity/z mixtures equal 1 for an even number of z's and
/// `cos 2α` for an odd number; pure x/y entries with `2k` y's equal
/// `(−1)^k sin 2α`. Everything else vanishes.
pub fn analytic_ghz_tensor(params: GhzParams) -> Result<CorrelationTensor> {
    params.validate()?;
    let n = params.n;
    let (s, c) = (params.sin2a(), params.cos2a());
    let entries = (0..1usize << (2 * n))
        .map(|idx| {
            let mut counts = [0usize; 4];
            let mut rest = idx;
            for _ in 0..n {
                counts[rest & 3] += 1;
                rest >>= 2;
            }
            let [_, nx, ny, nz] = counts;
            if nx + ny == n {
                if ny % 2 == 1 {
                    0.0
                } else if (ny / 2) % 2 == 0 {
                    s
                } else {
                    -s
                }
            } else if nx + ny == 0 {
                if nz % 2 == 0 {
                    1.0
                } else {
                    c
                }
            } else {
                0.0
            }
        })
        .collect();
    Ok(CorrelationTensor { n, entries })
}
