//! Multi-start maximization over local frames.
//!
//! Each restart runs block-coordinate ascent: one block per site, and every
//! angle in the block is improved by a coarse scan of the circle followed by a
//! golden-section refinement. The engine is shared with settings optimization
//! in [`crate::bell`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criterion::{best_c, maximize_c_on_sector, rotate_tensor, sector_sum_squares, CVectors};
use crate::error::{param, Result};
use crate::rotation::{EulerAngles, FrameSet, Rotation3};
use crate::tensor::CorrelationTensor;

pub const DEFAULT_SEED: u64 = 0x5EED_B311;

/// Margin above the bound required before an optimizer output counts as a
/// violation.
pub const SEARCH_MARGIN: f64 = 1e-6;

/// Margin used for exact (analytic) constructions.
pub const EXACT_MARGIN: f64 = 1e-9;

/// Restarts within this distance of the best value count as agreeing.
pub const AGREEMENT_TOL: f64 = 1e-6;

const SCAN_POINTS: usize = 8;
const ANGLE_TOL: f64 = 1e-7;
const INNER_C_TOL: f64 = 1e-14;
const INNER_C_SWEEPS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub restarts: usize,
    /// Maximum number of ascent sweeps per restart.
    pub max_iterations: usize,
    /// A restart stops once a sweep improves the objective by less than this.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 64,
            max_iterations: 500,
            tolerance: 1e-9,
            seed: DEFAULT_SEED,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return param("restarts must be at least 1");
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return param("tolerance must be positive");
        }
        if self.max_iterations == 0 {
            return param("max_iterations must be at least 1");
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }
}

/// Which frame objective to maximize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CriterionMode {
    /// `max_c T^mod` (necessary and sufficient).
    Modulus,
    /// Sum of squares over the xy sector (sufficient).
    SumSquares,
}

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub mode: CriterionMode,
    pub value: f64,
    pub frames: FrameSet,
    /// Optimal c-vectors; absent in sum-of-squares mode.
    pub c: Option<CVectors>,
    pub violated: bool,
    /// At least 90% of restarts agree on the maximum.
    pub certified: bool,
    pub restarts_agreeing: usize,
    pub restarts: usize,
    /// The winning restart met the tolerance within `max_iterations` sweeps.
    pub converged: bool,
}

/// JSON shape of a [`CriterionResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionRecord {
    pub value: f64,
    pub violated: bool,
    pub certified: bool,
    pub frames: Vec<[f64; 3]>,
    pub c: Option<Vec<[f64; 2]>>,
    pub restarts_agreeing: usize,
}

impl CriterionResult {
    pub fn to_record(&self) -> CriterionRecord {
        CriterionRecord {
            value: self.value,
            violated: self.violated,
            certified: self.certified,
            frames: self.frames.euler_angles().iter().map(EulerAngles::as_array).collect(),
            c: self.c.as_ref().map(|c| c.as_slice().to_vec()),
            restarts_agreeing: self.restarts_agreeing,
        }
    }
}

/// Multi-start search for frames (and c-vectors) maximizing `T^mod`.
pub fn maximize_criterion(t: &CorrelationTensor, config: &OptimizerConfig) -> Result<CriterionResult> {
    maximize(t, config, CriterionMode::Modulus)
}

/// Multi-start search for frames maximizing the xy-sector sum of squares.
pub fn maximize_sum_squares(t: &CorrelationTensor, config: &OptimizerConfig) -> Result<CriterionResult> {
    maximize(t, config, CriterionMode::SumSquares)
}

/// Runs restarts in index order and stops at the first one whose value
/// exceeds `threshold`. The verdict does not depend on scheduling.
pub fn criterion_exceeds(
    t: &CorrelationTensor,
    config: &OptimizerConfig,
    mode: CriterionMode,
    threshold: f64,
) -> Result<bool> {
    config.validate()?;
    let full = t.full_correlations();
    for r in 0..config.restarts {
        let (_, v, _) = frame_restart(&full, t.n(), mode, config, r);
        if v > threshold {
            return Ok(true);
        }
    }
    Ok(false)
}

fn maximize(t: &CorrelationTensor, config: &OptimizerConfig, mode: CriterionMode) -> Result<CriterionResult> {
    config.validate()?;
    let n = t.n();
    let full = t.full_correlations();
    let runs: Vec<(Vec<f64>, f64, bool)> = (0..config.restarts)
        .into_par_iter()
        .map(|r| frame_restart(&full, n, mode, config, r))
        .collect();
    let summary = summarize(runs.iter().map(|r| r.1));
    let (params, _, converged) = &runs[summary.best];
    let angles: Vec<EulerAngles> = params
        .chunks(3)
        .map(|a| EulerAngles::new(a[0], a[1], a[2]))
        .collect::<Result<_>>()?;
    let frames = FrameSet::from_euler(&angles);
    let rotated = rotate_tensor(t, &frames)?;
    let (value, c) = match mode {
        CriterionMode::Modulus => {
            let (c, v) = best_c(&rotated);
            (v, Some(c))
        }
        CriterionMode::SumSquares => (sector_sum_squares(&rotated), None),
    };
    Ok(CriterionResult {
        mode,
        value,
        frames,
        c,
        violated: value > 1.0 + SEARCH_MARGIN,
        certified: summary.certified,
        restarts_agreeing: summary.agreeing,
        restarts: config.restarts,
        converged: *converged,
    })
}

fn frame_restart(
    full: &[f64],
    n: usize,
    mode: CriterionMode,
    config: &OptimizerConfig,
    restart: usize,
) -> (Vec<f64>, f64, bool) {
    let mut rng = restart_rng(config.seed, restart);
    let start: Vec<f64> = (0..n).flat_map(|_| random_euler(&mut rng)).collect();
    let mut c = vec![[std::f64::consts::FRAC_1_SQRT_2; 2]; n];
    let mut obj = SiteProjection::new(full, n, 3, euler_rows, |sector: &[f64]| match mode {
        CriterionMode::Modulus => {
            let moduli: Vec<f64> = sector.iter().map(|v| v.abs()).collect();
            c.iter_mut().for_each(|v| *v = [std::f64::consts::FRAC_1_SQRT_2; 2]);
            maximize_c_on_sector(&moduli, n, &mut c, INNER_C_TOL, INNER_C_SWEEPS)
        }
        CriterionMode::SumSquares => sector.iter().map(|v| v * v).sum(),
    });
    let out = block_ascent(&mut obj, start, config.max_iterations, config.tolerance);
    (out.params, out.value, out.converged)
}

fn euler_rows(p: &[f64]) -> [[f64; 3]; 2] {
    let r = Rotation3::from_euler(&EulerAngles {
        phi: p[0],
        theta: p[1],
        psi: p[2],
    });
    [r.row(0), r.row(1)]
}

/// Haar-distributed Euler angles.
fn random_euler<R: Rng>(rng: &mut R) -> [f64; 3] {
    let tau = std::f64::consts::TAU;
    let phi = rng.gen::<f64>() * tau;
    let theta = (1.0 - 2.0 * rng.gen::<f64>()).clamp(-1.0, 1.0).acos();
    let psi = rng.gen::<f64>() * tau;
    [phi, theta, psi]
}

/// Independent random stream for each restart index.
pub(crate) fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

pub(crate) struct RestartSummary {
    pub best: usize,
    pub agreeing: usize,
    pub certified: bool,
}

/// Best restart (lowest index on ties) and the agreement count.
pub(crate) fn summarize(values: impl Iterator<Item = f64> + Clone) -> RestartSummary {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    let mut total = 0;
    for (i, v) in values.clone().enumerate() {
        total += 1;
        if v > best_v {
            best_v = v;
            best = i;
        }
    }
    let agreeing = values.filter(|v| *v >= best_v - AGREEMENT_TOL).count();
    RestartSummary {
        best,
        agreeing,
        certified: agreeing * 10 >= total * 9,
    }
}

/// Objective over per-site parameter blocks. Each block maps to a 2×3 matrix
/// that contracts that site's {x, y, z} index of a full-correlation tensor;
/// the resulting `2^n` table is scored.
pub(crate) struct SiteProjection<'a, P, S> {
    full: &'a [f64],
    n: usize,
    block_len: usize,
    rows: P,
    score: S,
    params: Vec<f64>,
    focus_site: usize,
    focused: Vec<f64>,
    table: Vec<f64>,
}

impl<'a, P, S> SiteProjection<'a, P, S>
where
    P: Fn(&[f64]) -> [[f64; 3]; 2],
    S: FnMut(&[f64]) -> f64,
{
    pub fn new(full: &'a [f64], n: usize, block_len: usize, rows: P, score: S) -> Self {
        Self {
            full,
            n,
            block_len,
            rows,
            score,
            params: Vec::new(),
            focus_site: usize::MAX,
            focused: Vec::new(),
            table: vec![0.0; 1 << n],
        }
    }

    /// Contracts every site except `site` with its current matrix.
    fn focus(&mut self, params: &[f64], site: usize) {
        self.params.clear();
        self.params.extend_from_slice(params);
        self.focus_site = site;
        let n = self.n;
        let mut dims = vec![3usize; n];
        let mut data = self.full.to_vec();
        for i in 0..n {
            if i == site {
                continue;
            }
            let m = (self.rows)(&params[i * self.block_len..(i + 1) * self.block_len]);
            data = contract_site(&data, &mut dims, i, &m);
        }
        self.focused = data;
    }

    /// Score with the focused site's block replaced by `block`.
    fn eval(&mut self, block: &[f64]) -> f64 {
        let j = self.focus_site;
        let m = (self.rows)(block);
        let inner = 1usize << (self.n - 1 - j);
        let outer = 1usize << j;
        for h in 0..outer {
            for l in 0..inner {
                let src = |a: usize| self.focused[(h * 3 + a) * inner + l];
                let (v0, v1, v2) = (src(0), src(1), src(2));
                self.table[(h * 2) * inner + l] = m[0][0] * v0 + m[0][1] * v1 + m[0][2] * v2;
                self.table[(h * 2 + 1) * inner + l] = m[1][0] * v0 + m[1][1] * v1 + m[1][2] * v2;
            }
        }
        (self.score)(&self.table)
    }
}

/// Replaces the size-3 axis at `site` by a size-2 axis via `m`.
fn contract_site(data: &[f64], dims: &mut [usize], site: usize, m: &[[f64; 3]; 2]) -> Vec<f64> {
    let outer: usize = dims[..site].iter().product();
    let inner: usize = dims[site + 1..].iter().product();
    let mut out = vec![0.0; outer * 2 * inner];
    for o in 0..outer {
        for l in 0..inner {
            let v0 = data[(o * 3) * inner + l];
            let v1 = data[(o * 3 + 1) * inner + l];
            let v2 = data[(o * 3 + 2) * inner + l];
            for (r, row) in m.iter().enumerate() {
                out[(o * 2 + r) * inner + l] = row[0] * v0 + row[1] * v1 + row[2] * v2;
            }
        }
    }
    dims[site] = 2;
    out
}

pub(crate) struct AscentOutcome {
    pub params: Vec<f64>,
    pub value: f64,
    pub converged: bool,
}

/// Block-coordinate ascent with scan + golden-section line searches.
pub(crate) fn block_ascent<P, S>(
    obj: &mut SiteProjection<'_, P, S>,
    mut params: Vec<f64>,
    max_sweeps: usize,
    tol: f64,
) -> AscentOutcome
where
    P: Fn(&[f64]) -> [[f64; 3]; 2],
    S: FnMut(&[f64]) -> f64,
{
    let n = obj.n;
    let len = obj.block_len;
    obj.focus(&params, 0);
    let mut value = obj.eval(&params[..len]);
    let mut converged = false;
    for _ in 0..max_sweeps {
        let start = value;
        for site in 0..n {
            obj.focus(&params, site);
            let mut block = params[site * len..(site + 1) * len].to_vec();
            value = obj.eval(&block);
            for k in 0..len {
                let t0 = block[k];
                let (t, v) = line_search(
                    |t| {
                        let saved = block[k];
                        block[k] = t;
                        let v = obj.eval(&block);
                        block[k] = saved;
                        v
                    },
                    t0,
                    value,
                );
                if v > value {
                    block[k] = t;
                    value = v;
                }
            }
            params[site * len..(site + 1) * len].copy_from_slice(&block);
        }
        if value - start <= tol {
            converged = true;
            break;
        }
    }
    AscentOutcome {
        params,
        value,
        converged,
    }
}

/// Maximizes a periodic function of one angle near `t0` (current value `v0`).
fn line_search(mut f: impl FnMut(f64) -> f64, t0: f64, v0: f64) -> (f64, f64) {
    let step = std::f64::consts::TAU / SCAN_POINTS as f64;
    let (mut bt, mut bv) = (t0, v0);
    for m in 1..SCAN_POINTS {
        let t = t0 + step * m as f64;
        let v = f(t);
        if v > bv {
            bt = t;
            bv = v;
        }
    }
    let (gt, gv) = golden_max(&mut f, bt - step, bt + step, ANGLE_TOL);
    let out = if gv > bv { (gt, gv) } else { (bt, bv) };
    (out.0.rem_euclid(std::f64::consts::TAU), out.1)
}

pub(crate) fn golden_max(f: &mut impl FnMut(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}
