//! Pure states, density matrices, partial traces and primed-basis postselection.
//!
//! Basis index convention: bit `n - 1 - j` of a computational-basis index is the
//! state of site `j` (site 0 is the most significant bit). Sites are 0-based
//! throughout the library.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

/// Largest qubit count supported by dense storage.
pub const MAX_QUBITS: usize = 12;

const NORM_TOL: f64 = 1e-12;
const POSTSELECT_MIN_NORM: f64 = 1e-14;

/// Parameters of `cos α |0…0⟩ + sin α |1…1⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GhzParams {
    pub n: usize,
    pub alpha: f64,
}

impl GhzParams {
    pub fn new(n: usize, alpha: f64) -> Result<Self> {
        let p = Self { n, alpha };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.n > MAX_QUBITS {
            return param(format!("qubit count {} outside [2, {MAX_QUBITS}]", self.n));
        }
        let quarter = std::f64::consts::FRAC_PI_4;
        if !self.alpha.is_finite() || self.alpha < 0.0 || self.alpha > quarter + 1e-15 {
            return param(format!("alpha {} outside [0, pi/4]", self.alpha));
        }
        Ok(())
    }

    pub fn sin2a(&self) -> f64 {
        (2.0 * self.alpha).sin()
    }

    pub fn cos2a(&self) -> f64 {
        (2.0 * self.alpha).cos()
    }

    /// Mixing angle whose `sin 2α` equals `s` (for `0 ≤ s ≤ 1`).
    pub fn alpha_for_sin2a(s: f64) -> f64 {
        0.5 * s.clamp(0.0, 1.0).asin()
    }
}

/// A normalized pure state of `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Wraps amplitudes that are already normalized (within 1e-12).
    pub fn new(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        check_qubits(n)?;
        if amps.len() != 1 << n {
            return param(format!("{} amplitudes for {n} qubits", amps.len()));
        }
        let norm2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > NORM_TOL {
            return param(format!("state norm^2 {norm2} differs from 1"));
        }
        Ok(Self { n, amps })
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(n: usize, mut amps: Vec<Complex64>) -> Result<Self> {
        check_qubits(n)?;
        if amps.len() != 1 << n {
            return param(format!("{} amplitudes for {n} qubits", amps.len()));
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm <= 0.0 {
            return param("cannot normalize a zero or non-finite vector");
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Ok(Self { n, amps })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        check_qubits(n)?;
        if index >= 1 << n {
            return param(format!("basis index {index} out of range"));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.n != other.n {
            return param("inner product of states with different qubit counts");
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    pub fn to_record(&self) -> StateRecord {
        StateRecord {
            n: self.n,
            re: self.amps.iter().map(|a| a.re).collect(),
            im: self.amps.iter().map(|a| a.im).collect(),
        }
    }

    pub fn from_record(rec: &StateRecord) -> Result<Self> {
        if rec.re.len() != rec.im.len() {
            return param("re/im length mismatch");
        }
        let amps = rec
            .re
            .iter()
            .zip(&rec.im)
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect();
        Self::new(rec.n, amps)
    }
}

/// JSON shape of a serialized state: `{n, re: [...], im: [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateRecord {
    pub n: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

/// Dense `2^n × 2^n` density matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    entries: Vec<Complex64>,
}

impl DensityMatrix {
    /// Validates hermiticity, unit trace and positivity (all within 1e-12).
    pub fn new(n: usize, entries: Vec<Complex64>) -> Result<Self> {
        check_qubits(n)?;
        let dim = 1usize << n;
        if entries.len() != dim * dim {
            return param(format!("{} entries for a {dim}x{dim} matrix", entries.len()));
        }
        let rho = Self { n, entries };
        if rho.hermiticity_defect() > NORM_TOL {
            return param("matrix is not Hermitian");
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
            return param(format!("trace {tr} differs from 1"));
        }
        if n <= 6 && rho.min_eigenvalue() < -NORM_TOL {
            return param("matrix has a negative eigenvalue");
        }
        Ok(rho)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim() + col]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        // ρ is Hermitian, so Tr ρ² = Σ |ρ_ij|².
        self.entries.iter().map(|e| e.norm_sqr()).sum()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for r in 0..d {
            for c in r..d {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the (Hermitian) matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_min_eigenvalue(self.dim(), &self.entries)
    }

    /// Partial trace keeping the listed sites (ascending order in the output).
    pub fn reduce(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let keep = normalize_sites(self.n, keep)?;
        if keep.is_empty() || keep.len() == self.n {
            return param("keep-set must be a nonempty proper subset of the sites");
        }
        let traced: Vec<usize> = (0..self.n).filter(|s| !keep.contains(s)).collect();
        let m = keep.len();
        let kd = 1usize << m;
        let td = 1usize << traced.len();
        let mut out = vec![Complex64::new(0.0, 0.0); kd * kd];
        for r in 0..kd {
            for c in 0..kd {
                let mut acc = Complex64::new(0.0, 0.0);
                for t in 0..td {
                    let row = scatter(self.n, &keep, r, &traced, t);
                    let col = scatter(self.n, &keep, c, &traced, t);
                    acc += self.get(row, col);
                }
                out[r * kd + c] = acc;
            }
        }
        Ok(DensityMatrix { n: m, entries: out })
    }

    /// Transpose on the listed sites. The result is Hermitian with unit trace
    /// but need not be positive, so it is returned as raw entries.
    pub fn partial_transpose(&self, sites: &[usize]) -> Result<Vec<Complex64>> {
        let sites = normalize_sites(self.n, sites)?;
        let mask: usize = sites.iter().map(|&s| 1usize << (self.n - 1 - s)).sum();
        let d = self.dim();
        let mut out = vec![Complex64::new(0.0, 0.0); d * d];
        for r in 0..d {
            for c in 0..d {
                // swap the masked bits of row and column
                let r2 = (r & !mask) | (c & mask);
                let c2 = (c & !mask) | (r & mask);
                out[r2 * d + c2] = self.get(r, c);
            }
        }
        Ok(out)
    }

    /// Minimum eigenvalue of the partial transpose on `sites`.
    pub fn partial_transpose_min_eigenvalue(&self, sites: &[usize]) -> Result<f64> {
        let pt = self.partial_transpose(sites)?;
        Ok(hermitian_min_eigenvalue(self.dim(), &pt))
    }
}

/// Generalized GHZ state `cos α |0…0⟩ + sin α |1…1⟩`.
pub fn make_ghz(params: GhzParams) -> Result<StateVector> {
    params.validate()?;
    let dim = 1usize << params.n;
    let mut amps = vec![Complex64::new(0.0, 0.0); dim];
    amps[0] = Complex64::new(params.alpha.cos(), 0.0);
    amps[dim - 1] = Complex64::new(params.alpha.sin(), 0.0);
    Ok(StateVector { n: params.n, amps })
}

/// Projector `|ψ⟩⟨ψ|`.
pub fn density_of(state: &StateVector) -> DensityMatrix {
    let d = state.amps.len();
    let mut entries = Vec::with_capacity(d * d);
    for r in 0..d {
        for c in 0..d {
            entries.push(state.amps[r] * state.amps[c].conj());
        }
    }
    DensityMatrix { n: state.n, entries }
}

/// Outcome label in the primed basis `|0′⟩ = (|0⟩+|1⟩)/√2`, `|1′⟩ = (|0⟩−|1⟩)/√2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PrimedOutcome {
    Plus,
    Minus,
}

/// Result of conditioning on primed-basis outcomes.
#[derive(Debug, Clone)]
pub struct Postselection {
    /// Renormalized state of the unmeasured sites, in ascending site order.
    pub state: StateVector,
    /// Probability of the observed outcome string.
    pub probability: f64,
}

/// Measures `measured_sites` in the primed basis and conditions on `outcomes`.
pub fn postselect_primed(
    state: &StateVector,
    measured_sites: &[usize],
    outcomes: &[PrimedOutcome],
) -> Result<Postselection> {
    let n = state.n;
    if measured_sites.len() != outcomes.len() {
        return param("one outcome per measured site is required");
    }
    let mut pairs: Vec<(usize, PrimedOutcome)> = measured_sites.iter().copied().zip(outcomes.iter().copied()).collect();
    pairs.sort_by_key(|p| p.0);
    let measured: Vec<usize> = pairs.iter().map(|p| p.0).collect();
    let measured = normalize_sites(n, &measured)?;
    if measured.len() != pairs.len() {
        return param("duplicate measured site");
    }
    if measured.is_empty() || measured.len() >= n {
        return param("measured sites must be a nonempty proper subset");
    }
    let rest: Vec<usize> = (0..n).filter(|s| !measured.contains(s)).collect();
    let m = measured.len();
    let rd = 1usize << rest.len();
    let amp = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = vec![Complex64::new(0.0, 0.0); rd];
    for (r, slot) in out.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for t in 0..(1usize << m) {
            // ⟨0′|b⟩ = 1/√2, ⟨1′|b⟩ = (−1)^b/√2
            let mut coeff = 1.0;
            for (i, &(_, outcome)) in pairs.iter().enumerate() {
                let bit = (t >> (m - 1 - i)) & 1;
                coeff *= amp;
                if outcome == PrimedOutcome::Minus && bit == 1 {
                    coeff = -coeff;
                }
            }
            acc += state.amps[scatter(n, &rest, r, &measured, t)] * coeff;
        }
        *slot = acc;
    }
    let norm = out.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if norm < POSTSELECT_MIN_NORM {
        return Err(Error::PostselectionImpossible { norm });
    }
    out.iter_mut().for_each(|a| *a /= norm);
    Ok(Postselection {
        state: StateVector {
            n: rest.len(),
            amps: out,
        },
        probability: norm * norm,
    })
}

pub(crate) fn check_qubits(n: usize) -> Result<()> {
    if n == 0 {
        return param("qubit count must be positive");
    }
    if n > MAX_QUBITS {
        return Err(Error::Capacity(format!("{n} qubits exceeds dense limit {MAX_QUBITS}")));
    }
    Ok(())
}

fn normalize_sites(n: usize, sites: &[usize]) -> Result<Vec<usize>> {
    let mut v = sites.to_vec();
    v.sort_unstable();
    v.dedup();
    if v.len() != sites.len() {
        return param("duplicate site index");
    }
    if let Some(&bad) = v.iter().find(|&&s| s >= n) {
        return param(format!("site {bad} out of range for {n} qubits"));
    }
    Ok(v)
}

/// Builds a full basis index from the bits of `a` on sites `sa` and of `b` on `sb`.
fn scatter(n: usize, sa: &[usize], a: usize, sb: &[usize], b: usize) -> usize {
    let mut idx = 0;
    for (i, &s) in sa.iter().enumerate() {
        let bit = (a >> (sa.len() - 1 - i)) & 1;
        idx |= bit << (n - 1 - s);
    }
    for (i, &s) in sb.iter().enumerate() {
        let bit = (b >> (sb.len() - 1 - i)) & 1;
        idx |= bit << (n - 1 - s);
    }
    idx
}

fn hermitian_min_eigenvalue(dim: usize, entries: &[Complex64]) -> f64 {
    let m = nalgebra::DMatrix::from_row_slice(dim, dim, entries);
    let eig = nalgebra::SymmetricEigen::new(m);
    eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}
