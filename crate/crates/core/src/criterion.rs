//! Evaluators for the modulus criterion (`T^mod ≤ 1` in every frame) and the
//! sum-of-squares sufficient condition, plus the explicit even-N frame
//! construction that exceeds the bound.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::rotation::{FrameSet, Rotation3};
use crate::state::GhzParams;
use crate::tensor::{analytic_ghz_tensor, CorrelationTensor};

const UNIT_TOL: f64 = 1e-12;
const BEST_C_TOL: f64 = 1e-15;
const BEST_C_MAX_SWEEPS: usize = 10_000;

/// Per-site unit 2-vectors weighting the x and y directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CVectors(Vec<[f64; 2]>);

impl CVectors {
    pub fn new(c: Vec<[f64; 2]>) -> Result<Self> {
        for (j, v) in c.iter().enumerate() {
            let norm2 = v[0] * v[0] + v[1] * v[1];
            if (norm2 - 1.0).abs() > UNIT_TOL {
                return param(format!("c-vector {j} has squared norm {norm2}"));
            }
        }
        Ok(Self(c))
    }

    /// `(1/√2, 1/√2)` on every site.
    pub fn uniform(n: usize) -> Self {
        Self(vec![[FRAC_1_SQRT_2; 2]; n])
    }

    /// `(cos t_j, sin t_j)` per site.
    pub fn from_angles(angles: &[f64]) -> Self {
        Self(angles.iter().map(|t| [t.cos(), t.sin()]).collect())
    }

    pub fn as_slice(&self) -> &[[f64; 2]] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Re-expresses the tensor in new local frames. Identity components are
/// untouched; each site's x/y/z indices are contracted with its rotation.
pub fn rotate_tensor(t: &CorrelationTensor, frames: &FrameSet) -> Result<CorrelationTensor> {
    let n = t.n();
    if frames.len() != n {
        return param(format!("{} frames for a {n}-site tensor", frames.len()));
    }
    let mut data = t.entries().to_vec();
    for (j, r) in frames.rotations().iter().enumerate() {
        let stride = 1usize << (2 * (n - 1 - j));
        for base in 0..data.len() {
            if !(base / stride).is_multiple_of(4) {
                continue;
            }
            let v = [data[base + stride], data[base + 2 * stride], data[base + 3 * stride]];
            let w = r.apply(v);
            data[base + stride] = w[0];
            data[base + 2 * stride] = w[1];
            data[base + 3 * stride] = w[2];
        }
    }
    CorrelationTensor::new(n, data)
}

/// Σ of squared entries over the xy sector.
pub fn sector_sum_squares(t: &CorrelationTensor) -> f64 {
    t.xy_sector().iter().map(|v| v * v).sum()
}

/// Σ of squared entries with every index in {x, y, z}.
pub fn full_correlation_norm_sq(t: &CorrelationTensor) -> f64 {
    t.full_correlations().iter().map(|v| v * v).sum()
}

/// `Σ_{x ∈ {1,2}^n} Π_j c^j_{x_j} |T_x|`.
pub fn tmod_value(t: &CorrelationTensor, c: &CVectors) -> Result<f64> {
    let n = t.n();
    if c.len() != n {
        return param(format!("{} c-vectors for a {n}-site tensor", c.len()));
    }
    let sector = t.xy_sector();
    Ok(sector
        .iter()
        .enumerate()
        .map(|(s, v)| {
            let w: f64 = (0..n).map(|j| c.0[j][(s >> (n - 1 - j)) & 1]).product();
            w * v.abs()
        })
        .sum())
}

/// Maximizes [`tmod_value`] over nonnegative unit c-vectors.
///
/// Alternating closed-form updates: with the other sites fixed, the best c on
/// site `j` is the normalized contraction of the modulus sector. Starting from
/// the uniform (strictly positive) vectors the ascent is monotone.
pub fn best_c(t: &CorrelationTensor) -> (CVectors, f64) {
    let n = t.n();
    let moduli: Vec<f64> = t.xy_sector().iter().map(|v| v.abs()).collect();
    let mut c = vec![[FRAC_1_SQRT_2; 2]; n];
    let value = maximize_c_on_sector(&moduli, n, &mut c, BEST_C_TOL, BEST_C_MAX_SWEEPS);
    (CVectors(c), value)
}

/// Alternating maximization of the nonnegative multilinear form on `moduli`
/// (a `2^n` sector, site 0 most significant). Updates `c` in place and returns
/// the final value.
pub(crate) fn maximize_c_on_sector(moduli: &[f64], n: usize, c: &mut [[f64; 2]], tol: f64, max_sweeps: usize) -> f64 {
    let mut value = f64::NEG_INFINITY;
    let mut hi = Vec::with_capacity(moduli.len());
    let mut lo = Vec::with_capacity(moduli.len());
    for _ in 0..max_sweeps {
        let mut last = 0.0;
        for j in 0..n {
            site_weights(c, 0..j, &mut hi);
            site_weights(c, j + 1..n, &mut lo);
            let inner = lo.len();
            let mut v = [0.0f64; 2];
            for (h, wh) in hi.iter().enumerate() {
                for (a, va) in v.iter_mut().enumerate() {
                    let base = (2 * h + a) * inner;
                    let row = &moduli[base..base + inner];
                    *va += wh * row.iter().zip(lo.iter()).map(|(m, w)| m * w).sum::<f64>();
                }
            }
            let norm = v[0].hypot(v[1]);
            if norm > 0.0 {
                c[j] = [v[0] / norm, v[1] / norm];
            }
            last = norm;
        }
        let improved = last - value;
        value = last;
        if improved <= tol * value.max(1.0) {
            break;
        }
    }
    value
}

/// Products of `c[i][bit]` over the given sites, indexed with the first site
/// as the most significant bit.
fn site_weights(c: &[[f64; 2]], sites: std::ops::Range<usize>, out: &mut Vec<f64>) {
    out.clear();
    out.push(1.0);
    for i in sites {
        let len = out.len();
        out.resize(2 * len, 0.0);
        for h in (0..len).rev() {
            let w = out[h];
            out[2 * h] = w * c[i][0];
            out[2 * h + 1] = w * c[i][1];
        }
    }
}

/// The explicit even-N construction: 45° turns about y on all sites but the
/// last, replacement of entries by their moduli, then final frames in which a
/// single component reaches `√(1 + sin² 2α)`.
#[derive(Debug, Clone)]
pub struct Statement2Construction {
    pub params: GhzParams,
    /// 45° frame changes about y on sites `0..n-1`, identity on the last site.
    pub stage_one: FrameSet,
    /// Tensor after the first stage.
    pub stage_one_tensor: CorrelationTensor,
    /// Entrywise modulus of the stage-one tensor.
    pub modulus_tensor: CorrelationTensor,
    /// Frames whose new x axes lie along the summed directions
    /// (`x′+z′` on the first sites, `z′ + sin2α x′` on the last).
    pub final_frames: FrameSet,
    /// Component `(x, …, x)` of the modulus tensor in the final frames.
    pub achieved: f64,
    /// Stage one followed by a z→y relabeling, so the xz plane becomes the
    /// xy sector seen by [`tmod_value`].
    pub sector_frames: FrameSet,
    pub c: CVectors,
    /// [`tmod_value`] of the original tensor in `sector_frames` with `c`.
    pub tmod: f64,
    /// `√(1 + sin² 2α)`.
    pub exact: f64,
}

/// Builds the even-N construction for a generalized GHZ state.
pub fn statement2_frames(params: GhzParams) -> Result<Statement2Construction> {
    params.validate()?;
    let n = params.n;
    if !n.is_multiple_of(2) {
        return param(format!("construction requires an even qubit count, got {n}"));
    }
    let s = params.sin2a();
    let exact = (1.0 + s * s).sqrt();
    let tensor = analytic_ghz_tensor(params)?;

    let mut stage = vec![Rotation3::about_y(FRAC_PI_4); n];
    stage[n - 1] = Rotation3::IDENTITY;
    let stage_one = FrameSet::new(stage)?;
    let stage_one_tensor = rotate_tensor(&tensor, &stage_one)?;
    let modulus_tensor = stage_one_tensor.modulus();

    // new x axis (a, 0, b), y kept, z = x × y = (−b, 0, a)
    let in_plane = |a: f64, b: f64| Rotation3::from_axes([a, 0.0, b], [0.0, 1.0, 0.0], [-b, 0.0, a]);
    let mut finals = vec![in_plane(FRAC_1_SQRT_2, FRAC_1_SQRT_2)?; n];
    finals[n - 1] = in_plane(s / exact, 1.0 / exact)?;
    let final_frames = FrameSet::new(finals)?;
    let achieved = rotate_tensor(&modulus_tensor, &final_frames)?.get(&vec![1u8; n]);

    let relabel = FrameSet::new(vec![Rotation3::about_x(FRAC_PI_2); n])?;
    let sector_frames = stage_one.then(&relabel)?;
    let mut c = vec![[FRAC_1_SQRT_2; 2]; n];
    c[n - 1] = [s / exact, 1.0 / exact];
    let c = CVectors::new(c)?;
    let tmod = tmod_value(&rotate_tensor(&tensor, &sector_frames)?, &c)?;

    Ok(Statement2Construction {
        params,
        stage_one,
        stage_one_tensor,
        modulus_tensor,
        final_frames,
        achieved,
        sector_frames,
        c,
        tmod,
        exact,
    })
}
