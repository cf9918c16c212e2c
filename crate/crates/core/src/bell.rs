//! Two-setting full-correlation Bell functionals and settings optimization.
//!
//! Correlation tables are indexed like the xy sector of a tensor: bit
//! `n - 1 - j` of the table index is `k_j - 1`, site 0 most significant.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::optimize::{block_ascent, restart_rng, summarize, OptimizerConfig, SiteProjection, EXACT_MARGIN};
use crate::state::{density_of, StateVector};
use crate::tensor::{correlation_tensor, CorrelationTensor};

const UNIT_TOL: f64 = 1e-12;
const Z_AXIS: [f64; 3] = [0.0, 0.0, 1.0];

/// Unit vector from polar angle `theta` and azimuth `phi`.
pub fn unit_vector(theta: f64, phi: f64) -> [f64; 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [st * cp, st * sp, ct]
}

fn spherical(v: &[f64; 3]) -> (f64, f64) {
    (v[2].clamp(-1.0, 1.0).acos(), v[1].atan2(v[0]))
}

fn check_unit(v: &[f64; 3]) -> Result<()> {
    let norm2 = v.iter().map(|x| x * x).sum::<f64>();
    if (norm2 - 1.0).abs() > UNIT_TOL {
        return param(format!("direction {v:?} is not a unit vector"));
    }
    Ok(())
}

/// Two measurement directions per observer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSettings(Vec<[[f64; 3]; 2]>);

impl MeasurementSettings {
    pub fn new(sites: Vec<[[f64; 3]; 2]>) -> Result<Self> {
        if sites.is_empty() {
            return param("settings need at least one observer");
        }
        for pair in &sites {
            check_unit(&pair[0])?;
            check_unit(&pair[1])?;
        }
        Ok(Self(sites))
    }

    /// Settings from `(theta, phi)` pairs.
    pub fn from_angles(angles: &[[(f64, f64); 2]]) -> Self {
        Self(
            angles
                .iter()
                .map(|p| [unit_vector(p[0].0, p[0].1), unit_vector(p[1].0, p[1].1)])
                .collect(),
        )
    }

    pub fn angles(&self) -> Vec<[(f64, f64); 2]> {
        self.0.iter().map(|p| [spherical(&p[0]), spherical(&p[1])]).collect()
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn sites(&self) -> &[[[f64; 3]; 2]] {
        &self.0
    }

    /// Directions selected by the table index `k`.
    pub fn directions(&self, k: usize) -> Vec<[f64; 3]> {
        let n = self.n();
        (0..n).map(|j| self.0[j][(k >> (n - 1 - j)) & 1]).collect()
    }
}

/// `E(k₁…k_n)` for all `2^n` setting combinations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationTable {
    n: usize,
    values: Vec<f64>,
}

impl CorrelationTable {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 || n > 16 {
            return param(format!("unsupported observer count {n}"));
        }
        if values.len() != 1 << n {
            return param(format!("{} values for {n} observers", values.len()));
        }
        if values.iter().any(|v| !v.is_finite() || v.abs() > 1.0 + 1e-9) {
            return param("correlation values must lie in [-1, 1]");
        }
        Ok(Self { n, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value for 1-based settings `k`, e.g. `&[1, 2]` for `E(1, 2)`.
    pub fn get(&self, k: &[u8]) -> f64 {
        let idx = k.iter().fold(0, |acc, &kj| (acc << 1) | (kj as usize - 1));
        self.values[idx]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Functional {
    #[serde(rename = "CHSH")]
    Chsh,
    #[serde(rename = "MABK")]
    Mabk,
    #[serde(rename = "WWZB")]
    Wwzb,
    #[serde(rename = "COND-CHSH")]
    CondChsh,
}

impl Functional {
    pub fn local_bound(self) -> f64 {
        match self {
            Functional::Wwzb => 1.0,
            _ => 2.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Functional::Chsh => "CHSH",
            Functional::Mabk => "MABK",
            Functional::Wwzb => "WWZB",
            Functional::CondChsh => "COND-CHSH",
        }
    }
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Functional {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "CHSH" => Ok(Functional::Chsh),
            "MABK" => Ok(Functional::Mabk),
            "WWZB" => Ok(Functional::Wwzb),
            "COND-CHSH" | "COND_CHSH" => Ok(Functional::CondChsh),
            other => param(format!("unknown functional {other:?}")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BellResult {
    pub functional: Functional,
    pub value: f64,
    pub local_bound: f64,
    pub violated: bool,
    pub settings: MeasurementSettings,
    pub certified: bool,
    pub restarts_agreeing: usize,
}

/// JSON shape of a [`BellResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellRecord {
    pub functional: Functional,
    pub value: f64,
    pub local_bound: f64,
    pub violated: bool,
    pub settings: Vec<[(f64, f64); 2]>,
}

impl BellResult {
    pub fn to_record(&self) -> BellRecord {
        BellRecord {
            functional: self.functional,
            value: self.value,
            local_bound: self.local_bound,
            violated: self.violated,
            settings: self.settings.angles(),
        }
    }
}

/// `⟨⊗_j n̂_j·σ⟩` in a pure state.
pub fn expectation(state: &StateVector, directions: &[[f64; 3]]) -> Result<f64> {
    let n = state.n();
    if directions.len() != n {
        return param(format!("{} directions for {n} qubits", directions.len()));
    }
    directions.iter().try_for_each(check_unit)?;
    let mut phi = state.amplitudes().to_vec();
    for (j, d) in directions.iter().enumerate() {
        // n̂·σ = [[z, x − iy], [x + iy, −z]]
        let off_up = num_complex::Complex64::new(d[0], -d[1]);
        let off_dn = num_complex::Complex64::new(d[0], d[1]);
        let bit = 1usize << (n - 1 - j);
        for i in 0..phi.len() {
            if i & bit != 0 {
                continue;
            }
            let (a0, a1) = (phi[i], phi[i | bit]);
            phi[i] = a0 * d[2] + off_up * a1;
            phi[i | bit] = off_dn * a0 - a1 * d[2];
        }
    }
    let v: num_complex::Complex64 = state.amplitudes().iter().zip(&phi).map(|(a, b)| a.conj() * b).sum();
    Ok(v.re)
}

/// All `2^n` correlation functions for the given settings.
pub fn correlation_table(state: &StateVector, settings: &MeasurementSettings) -> Result<CorrelationTable> {
    let n = state.n();
    if settings.n() != n {
        return param(format!("settings for {} observers, state has {n}", settings.n()));
    }
    let values = (0..1usize << n)
        .map(|k| expectation(state, &settings.directions(k)))
        .collect::<Result<Vec<_>>>()?;
    CorrelationTable::new(n, values)
}

/// Correlation table by contracting a tensor with the setting directions.
pub fn correlation_table_from_tensor(
    t: &CorrelationTensor,
    settings: &MeasurementSettings,
) -> Result<CorrelationTable> {
    let n = t.n();
    if settings.n() != n {
        return param(format!("settings for {} observers, tensor has {n}", settings.n()));
    }
    let full = t.full_correlations();
    let values = (0..1usize << n)
        .map(|k| {
            let dirs = settings.directions(k);
            full.iter()
                .enumerate()
                .map(|(mut idx, v)| {
                    let mut w = *v;
                    for j in (0..n).rev() {
                        w *= dirs[j][idx % 3];
                        idx /= 3;
                    }
                    w
                })
                .sum()
        })
        .collect();
    CorrelationTable::new(n, values)
}

/// CHSH value: the best of the eight sign conventions of
/// `E₁₁ + E₁₂ + E₂₁ − E₂₂`. Local bound 2.
pub fn chsh(table: &CorrelationTable) -> Result<f64> {
    if table.n != 2 {
        return param(format!("CHSH needs two observers, table has {}", table.n));
    }
    Ok(chsh_unchecked(&table.values))
}

fn chsh_unchecked(e: &[f64]) -> f64 {
    let total: f64 = e.iter().sum();
    e.iter().map(|v| (total - 2.0 * v).abs()).fold(0.0, f64::max)
}

/// Coefficients `β(k)` of the MABK polynomial normalized to local bound 2,
/// built by the recursion
/// `M_n = ½ M_{n−1}(a_n + a′_n) + ½ M′_{n−1}(a_n − a′_n)`.
pub fn mabk_coefficients(n: usize) -> Vec<f64> {
    let mut m = vec![1.0, 0.0];
    let mut mp = vec![0.0, 1.0];
    for _ in 1..n {
        let mut next = Vec::with_capacity(2 * m.len());
        let mut next_p = Vec::with_capacity(2 * m.len());
        for (a, b) in m.iter().zip(&mp) {
            next.push(0.5 * (a + b));
            next.push(0.5 * (a - b));
            next_p.push(0.5 * (b - a));
            next_p.push(0.5 * (b + a));
        }
        m = next;
        mp = next_p;
    }
    m.iter().map(|c| 2.0 * c).collect()
}

/// Signed MABK value `Σ_k β(k) E(k)`; local bound 2 for every `n`.
pub fn mabk(table: &CorrelationTable) -> f64 {
    mabk_coefficients(table.n)
        .iter()
        .zip(&table.values)
        .map(|(c, e)| c * e)
        .sum()
}

/// `2^{−n} Σ_s |Σ_k Π_j s_j^{k_j−1} E(k)|`; at most 1 for local correlations.
pub fn wwzb(table: &CorrelationTable) -> f64 {
    wwzb_unchecked(&table.values)
}

fn wwzb_unchecked(e: &[f64]) -> f64 {
    let mut h = e.to_vec();
    walsh_hadamard(&mut h);
    h.iter().map(|v| v.abs()).sum::<f64>() / h.len() as f64
}

/// In-place unnormalized Walsh–Hadamard transform.
fn walsh_hadamard(v: &mut [f64]) {
    let mut len = 1;
    while len < v.len() {
        for block in v.chunks_mut(2 * len) {
            let (lo, hi) = block.split_at_mut(len);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        len *= 2;
    }
}

/// CHSH of `E(n̂_{k₁}, n̂_{k₂}, z, …, z)`: observers 0 and 1 choose between
/// their two settings, all other observers measure along z.
pub fn conditional_chsh(state: &StateVector, pair_settings: &[[[f64; 3]; 2]; 2]) -> Result<f64> {
    let n = state.n();
    if !n.is_multiple_of(2) {
        return param(format!("conditional CHSH needs an even qubit count, got {n}"));
    }
    let mut values = Vec::with_capacity(4);
    for k1 in 0..2 {
        for k2 in 0..2 {
            let mut dirs = vec![Z_AXIS; n];
            dirs[0] = pair_settings[0][k1];
            dirs[1] = pair_settings[1][k2];
            values.push(expectation(state, &dirs)?);
        }
    }
    chsh(&CorrelationTable::new(2, values)?)
}

/// Multi-start ascent over setting directions (two spherical angles per
/// vector), maximizing the chosen functional.
pub fn optimize_settings(state: &StateVector, functional: Functional, config: &OptimizerConfig) -> Result<BellResult> {
    config.validate()?;
    let n = state.n();
    match functional {
        Functional::Chsh if n != 2 => return param("CHSH needs two observers"),
        Functional::CondChsh if !n.is_multiple_of(2) => return param("conditional CHSH needs an even qubit count"),
        Functional::Mabk if n < 2 => return param("MABK needs at least two observers"),
        _ => {}
    }
    let tensor = correlation_tensor(&density_of(state))?;
    let mut full = tensor.full_correlations();
    let mut parties = n;
    if functional == Functional::CondChsh {
        // spectators fixed along z: keep only their z components
        let stride = 3usize.pow((n - 2) as u32);
        full = (0..9).map(|ab| full[ab * stride + stride - 1]).collect();
        parties = 2;
    }
    let coeffs = mabk_coefficients(parties);
    let score = |e: &[f64]| -> f64 {
        match functional {
            Functional::Chsh | Functional::CondChsh => chsh_unchecked(e),
            Functional::Mabk => coeffs.iter().zip(e).map(|(c, v)| c * v).sum::<f64>().abs(),
            Functional::Wwzb => wwzb_unchecked(e),
        }
    };
    let runs: Vec<(Vec<f64>, f64)> = (0..config.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = restart_rng(config.seed, r);
            let start: Vec<f64> = (0..parties * 2)
                .flat_map(|_| {
                    let theta = (1.0 - 2.0 * rng.gen::<f64>()).clamp(-1.0, 1.0).acos();
                    let phi = rng.gen::<f64>() * std::f64::consts::TAU;
                    [theta, phi]
                })
                .collect();
            let mut obj = SiteProjection::new(&full, parties, 4, settings_rows, &score);
            let out = block_ascent(&mut obj, start, config.max_iterations, config.tolerance);
            (out.params, out.value)
        })
        .collect();
    let summary = summarize(runs.iter().map(|r| r.1));
    let params = &runs[summary.best].0;
    let pairs: Vec<[(f64, f64); 2]> = params.chunks(4).map(|p| [(p[0], p[1]), (p[2], p[3])]).collect();

    let (settings, value) = if functional == Functional::CondChsh {
        let pair = MeasurementSettings::from_angles(&pairs);
        let ps = [pair.sites()[0], pair.sites()[1]];
        let value = conditional_chsh(state, &ps)?;
        let mut all = vec![[Z_AXIS, Z_AXIS]; n];
        all[0] = ps[0];
        all[1] = ps[1];
        (MeasurementSettings::new(all)?, value)
    } else {
        let settings = MeasurementSettings::from_angles(&pairs);
        let table = correlation_table(state, &settings)?;
        let value = match functional {
            Functional::Chsh => chsh(&table)?,
            Functional::Mabk => mabk(&table).abs(),
            _ => wwzb(&table),
        };
        (settings, value)
    };
    let local_bound = functional.local_bound();
    Ok(BellResult {
        functional,
        value,
        local_bound,
        violated: value > local_bound + EXACT_MARGIN,
        settings,
        certified: summary.certified,
        restarts_agreeing: summary.agreeing,
    })
}

fn settings_rows(p: &[f64]) -> [[f64; 3]; 2] {
    [unit_vector(p[0], p[1]), unit_vector(p[2], p[3])]
}
