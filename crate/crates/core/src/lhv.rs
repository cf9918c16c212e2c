//! Exact local-hidden-variable ground truth for two-setting full-correlation
//! tables at small `n`.
//!
//! Sign tensors and deterministic correlation tables are stored as bit masks:
//! bit `k` is set when the entry at table index `k` is −1. The contraction of
//! two such ±1 tables is then `2^n − 2·popcount(a ^ b)`.

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use serde::{Deserialize, Serialize};

use crate::bell::CorrelationTable;
use crate::error::{param, Error, Result};

pub const MAX_BOUND_SITES: usize = 6;
pub const MAX_ENUMERATION_SITES: usize = 4;
pub const MEMBER_TOL: f64 = 1e-9;

fn check_sites(n: usize, cap: usize) -> Result<()> {
    if n == 0 {
        return param("at least one observer is required");
    }
    if n > cap {
        return Err(Error::Capacity(format!("{n} observers exceeds the limit of {cap}")));
    }
    Ok(())
}

fn full_mask(n: usize) -> u64 {
    if n == MAX_BOUND_SITES {
        u64::MAX
    } else {
        (1u64 << (1 << n)) - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignTensor {
    n: usize,
    bits: u64,
}

impl SignTensor {
    pub fn from_bits(n: usize, bits: u64) -> Result<Self> {
        check_sites(n, MAX_BOUND_SITES)?;
        if bits & !full_mask(n) != 0 {
            return param(format!("sign bits {bits:#x} exceed 2^{n} entries"));
        }
        Ok(Self { n, bits })
    }

    pub fn from_signs(n: usize, signs: &[i8]) -> Result<Self> {
        check_sites(n, MAX_BOUND_SITES)?;
        if signs.len() != 1 << n {
            return param(format!("{} signs for {n} observers", signs.len()));
        }
        let mut bits = 0u64;
        for (k, &s) in signs.iter().enumerate() {
            match s {
                1 => {}
                -1 => bits |= 1 << k,
                other => return param(format!("sign entry {other} is not ±1")),
            }
        }
        Ok(Self { n, bits })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn sign(&self, k: usize) -> i32 {
        if (self.bits >> k) & 1 == 1 {
            -1
        } else {
            1
        }
    }

    pub fn signs(&self) -> Vec<i8> {
        (0..1 << self.n).map(|k| self.sign(k) as i8).collect()
    }

    /// `Σ_k s(k) E(k)`.
    pub fn contract(&self, table: &CorrelationTable) -> f64 {
        table
            .values()
            .iter()
            .enumerate()
            .map(|(k, e)| self.sign(k) as f64 * e)
            .sum()
    }
}

/// Predetermined outcomes `(a_j(1), a_j(2))` for every observer.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DeterministicStrategy(Vec<[i8; 2]>);

impl DeterministicStrategy {
    pub fn new(outcomes: Vec<[i8; 2]>) -> Result<Self> {
        if outcomes.iter().flatten().any(|a| a.abs() != 1) {
            return param("outcomes must be ±1");
        }
        check_sites(outcomes.len(), MAX_BOUND_SITES)?;
        Ok(Self(outcomes))
    }

    /// Strategy number `index` of `4^n`: bit `2j + (k−1)` flips `a_j(k)` to −1.
    pub fn from_index(n: usize, index: usize) -> Self {
        Self(
            (0..n)
                .map(|j| {
                    let a = |k: usize| if (index >> (2 * j + k)) & 1 == 1 { -1 } else { 1 };
                    [a(0), a(1)]
                })
                .collect(),
        )
    }

    /// All `4^n` strategies.
    pub fn all(n: usize) -> impl Iterator<Item = Self> {
        (0..1usize << (2 * n)).map(move |i| Self::from_index(n, i))
    }

    pub fn outcomes(&self) -> &[[i8; 2]] {
        &self.0
    }

    /// Bit mask of the product table `Π_j a_j(k_j)`.
    pub fn table_bits(&self) -> u64 {
        let n = self.0.len();
        (0..1usize << n).fold(0u64, |acc, k| {
            let negative = (0..n).filter(|&j| self.0[j][(k >> (n - 1 - j)) & 1] == -1).count() % 2 == 1;
            acc | ((negative as u64) << k)
        })
    }

    pub fn table(&self) -> CorrelationTable {
        let n = self.0.len();
        let bits = self.table_bits();
        let values = (0..1usize << n)
            .map(|k| if (bits >> k) & 1 == 1 { -1.0 } else { 1.0 })
            .collect();
        CorrelationTable::new(n, values).expect("deterministic table is valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InequalityRecord {
    pub sign_tensor: SignTensor,
    pub local_bound: u32,
}

impl InequalityRecord {
    pub fn sign_bits_hex(&self) -> String {
        let digits = (1usize << self.sign_tensor.n).div_ceil(4);
        format!("{:0width$x}", self.sign_tensor.bits, width = digits)
    }
}

/// Distinct deterministic tables for `n` observers.
fn vertex_masks(n: usize) -> Vec<u64> {
    let mut masks: Vec<u64> = DeterministicStrategy::all(n).map(|s| s.table_bits()).collect();
    masks.sort_unstable();
    masks.dedup();
    masks
}

fn bound_against(bits: u64, n: usize, vertices: &[u64]) -> u32 {
    let min_dist = vertices.iter().map(|v| (bits ^ v).count_ones()).min().unwrap_or(0);
    (1u32 << n) - 2 * min_dist
}

/// Largest value of `Σ_k s(k) Π_j a_j(k_j)` over deterministic strategies.
pub fn local_bound(s: &SignTensor) -> Result<u32> {
    check_sites(s.n, MAX_BOUND_SITES)?;
    Ok(bound_against(s.bits, s.n, &vertex_masks(s.n)))
}

/// Every `±1` coefficient tensor with its exact local bound, ordered by
/// sign bits.
pub fn enumerate_inequalities(n: usize) -> Result<Vec<InequalityRecord>> {
    check_sites(n, MAX_ENUMERATION_SITES)?;
    let vertices = vertex_masks(n);
    Ok((0..=full_mask(n))
        .map(|bits| InequalityRecord {
            sign_tensor: SignTensor { n, bits },
            local_bound: bound_against(bits, n, &vertices),
        })
        .collect())
}

/// Checks the table against every `±1` sign tensor and its local bound.
///
/// For `n = 2` this is the full set of CHSH facets. From `n = 3` on, the
/// facets of the correlation polytope also carry zero coefficients, so this
/// test is necessary for an LHV model but not sufficient; [`lhv_member`]
/// decides membership exactly.
pub fn satisfies_sign_catalog(table: &CorrelationTable) -> Result<bool> {
    let catalog = enumerate_inequalities(table.n())?;
    Ok(catalog
        .iter()
        .all(|r| r.sign_tensor.contract(table) <= r.local_bound as f64 + MEMBER_TOL))
}

/// Minkowski gauge of the table with respect to the convex hull of the
/// deterministic tables: the smallest `g ≥ 0` with `E / g` in the hull.
///
/// Solved as the linear program `max t` subject to `t·E = Σ_v λ_v v`,
/// `Σ λ_v = 1`, `λ ≥ 0`.
pub fn lhv_gauge(table: &CorrelationTable) -> Result<f64> {
    let n = table.n();
    check_sites(n, MAX_ENUMERATION_SITES)?;
    if table.values().iter().all(|v| *v == 0.0) {
        return Ok(0.0);
    }
    let vertices = vertex_masks(n);
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let t = lp.add_var(1.0, (0.0, f64::INFINITY));
    let lambdas: Vec<_> = vertices.iter().map(|_| lp.add_var(0.0, (0.0, 1.0))).collect();
    for (k, e) in table.values().iter().enumerate() {
        let mut row = vec![(t, -e)];
        row.extend(lambdas.iter().zip(&vertices).map(|(l, v)| {
            let sign = if (v >> k) & 1 == 1 { -1.0 } else { 1.0 };
            (*l, sign)
        }));
        lp.add_constraint(row, ComparisonOp::Eq, 0.0);
    }
    lp.add_constraint(lambdas.iter().map(|l| (*l, 1.0)), ComparisonOp::Eq, 1.0);
    let outcome = lp.solve().map_err(|e| Error::LinearProgram(e.to_string()))?;
    let solution = outcome
        .into_solution()
        .map_err(|_| Error::LinearProgram("solver interrupted".into()))?;
    Ok(1.0 / solution.objective())
}

/// Whether some mixture of deterministic strategies reproduces the table.
pub fn lhv_member(table: &CorrelationTable) -> Result<bool> {
    Ok(lhv_gauge(table)? <= 1.0 + MEMBER_TOL)
}
