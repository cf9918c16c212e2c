//! The numbered acceptance criteria, each with its own oracle.

use std::f64::consts::{FRAC_PI_4, PI, TAU};

use belltensor::bell::{correlation_table, optimize_settings, wwzb, CorrelationTable, Functional, MeasurementSettings};
use belltensor::criterion::full_correlation_norm_sq;
use belltensor::lhv::{enumerate_inequalities, lhv_member};
use belltensor::state::PrimedOutcome;
use belltensor::{
    analytic_ghz_tensor, best_c, correlation_tensor, density_of, make_ghz, maximize_criterion, maximize_sum_squares,
    postselect_primed, rotate_tensor, sector_sum_squares, statement2_frames, CorrelationTensor, EulerAngles, FrameSet,
    GhzParams, OptimizerConfig, Rotation3, StateVector,
};
use belltensor_cli::bisect_threshold;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Outcome {
    pub passed: bool,
    pub detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn ghz(n: usize, alpha: f64) -> StateVector {
    make_ghz(GhzParams::new(n, alpha).unwrap()).unwrap()
}

fn tensor_of(state: &StateVector) -> CorrelationTensor {
    correlation_tensor(&density_of(state)).unwrap()
}

fn alpha_for(s: f64) -> f64 {
    GhzParams::alpha_for_sin2a(s)
}

fn config() -> OptimizerConfig {
    OptimizerConfig::default()
}

fn random_direction(rng: &mut impl Rng) -> [f64; 3] {
    let z: f64 = rng.gen_range(-1.0..=1.0);
    let phi: f64 = rng.gen_range(0.0..TAU);
    let r = (1.0 - z * z).sqrt();
    [r * phi.cos(), r * phi.sin(), z]
}

fn random_settings(rng: &mut impl Rng, n: usize) -> MeasurementSettings {
    MeasurementSettings::new((0..n).map(|_| [random_direction(rng), random_direction(rng)]).collect()).unwrap()
}

pub fn tensor_agreement() -> Outcome {
    let mut worst = 0.0f64;
    for n in 2..=6 {
        for i in 0..20 {
            let params = GhzParams::new(n, FRAC_PI_4 * i as f64 / 19.0).unwrap();
            let numeric = tensor_of(&make_ghz(params).unwrap());
            worst = worst.max(numeric.max_abs_diff(&analytic_ghz_tensor(params).unwrap()));
        }
    }
    outcome(worst <= 1e-12, format!("max entry difference {worst:.2e}"))
}

pub fn even_construction() -> Outcome {
    let mut worst_exact = 0.0f64;
    let mut worst_gap = f64::INFINITY;
    for n in [4, 6] {
        for d in [32.0, 16.0, 8.0, 4.0] {
            let params = GhzParams::new(n, PI / d).unwrap();
            let s = params.sin2a();
            let target = (1.0 + s * s).sqrt();
            let c = statement2_frames(params).unwrap();
            worst_exact = worst_exact
                .max((c.achieved - target).abs())
                .max((c.tmod - target).abs());
            let found = maximize_criterion(&tensor_of(&make_ghz(params).unwrap()), &config()).unwrap();
            worst_gap = worst_gap.min(found.value - target);
        }
    }
    outcome(
        worst_exact <= 1e-12 && worst_gap >= -1e-6,
        format!("construction error {worst_exact:.2e}, optimizer minus exact >= {worst_gap:.3e}"),
    )
}

pub fn odd_threshold() -> Outcome {
    let cfg = config();
    let s3 = (2.0 * bisect_threshold(3, &cfg).unwrap()).sin();
    let s5 = (2.0 * bisect_threshold(5, &cfg).unwrap()).sin();
    let mut below_max = 0.0f64;
    for (n, s) in [(3, 0.45), (3, 0.3), (5, 0.2), (5, 0.1)] {
        let t = tensor_of(&ghz(n, alpha_for(s)));
        below_max = below_max
            .max(maximize_criterion(&t, &cfg).unwrap().value)
            .max(maximize_sum_squares(&t, &cfg).unwrap().value);
    }
    let mut above_min = f64::INFINITY;
    for (n, s) in [(3, 0.6), (5, 0.3)] {
        above_min = above_min.min(
            maximize_criterion(&tensor_of(&ghz(n, alpha_for(s))), &cfg)
                .unwrap()
                .value,
        );
    }
    outcome(
        (s3 - 0.5).abs() <= 1e-3 && (s5 - 0.25).abs() <= 2e-3 && below_max <= 1.0 + 1e-6 && above_min > 1.0 + 1e-6,
        format!("sin2a* = {s3:.5} (n=3), {s5:.5} (n=5); below max {below_max:.9}; above min {above_min:.6}"),
    )
}

/// CHSH maximized with all settings in the xz plane: Alice's two angles on
/// a 0.01 rad grid, Bob's two directions snapped to the best grid angle.
/// For the generalized GHZ pair the correlation matrix is diag(s, −s, 1), so
/// the optimum lies in the plane of its two largest singular values.
fn chsh_grid_oracle(t: &CorrelationTensor) -> f64 {
    let step = 0.01;
    let m = |a: u8, b: u8| t.get(&[a, b]);
    let (xx, xz, zx, zz) = (m(1, 1), m(1, 3), m(3, 1), m(3, 3));
    let bob = |u: [f64; 2]| {
        let k = (u[1].atan2(u[0]) / step).round();
        [k - 1.0, k, k + 1.0]
            .iter()
            .map(|k| u[0] * (k * step).cos() + u[1] * (k * step).sin())
            .fold(f64::MIN, f64::max)
    };
    let grid: Vec<(f64, f64)> = (0..=(PI / step) as usize)
        .map(|i| (i as f64 * step).sin_cos())
        .collect();
    let mut best = 0.0f64;
    for &(s1, c1) in &grid {
        let r1 = [s1 * xx + c1 * zx, s1 * xz + c1 * zz];
        for &(s2, c2) in &grid {
            let r2 = [s2 * xx + c2 * zx, s2 * xz + c2 * zz];
            best = best.max(bob([r1[0] + r2[0], r1[1] + r2[1]]) + bob([r1[0] - r2[0], r1[1] - r2[1]]));
        }
    }
    best
}

pub fn gisin_case() -> Outcome {
    let mut worst_formula = 0.0f64;
    let mut worst_oracle = 0.0f64;
    for i in 0..20 {
        let alpha = FRAC_PI_4 * i as f64 / 19.0;
        let state = ghz(2, alpha);
        let s = (2.0 * alpha).sin();
        let v = optimize_settings(&state, Functional::Chsh, &config()).unwrap().value;
        let oracle = chsh_grid_oracle(&tensor_of(&state));
        worst_formula = worst_formula.max((v - 2.0 * (1.0 + s * s).sqrt()).abs());
        if oracle > v + 1e-9 {
            worst_oracle = f64::INFINITY;
        }
        worst_oracle = worst_oracle.max(v - oracle);
    }
    outcome(
        worst_formula <= 1e-6 && worst_oracle <= 1e-3,
        format!(
            "max |value - 2sqrt(1+s^2)| = {worst_formula:.2e}, optimizer above grid oracle by <= {worst_oracle:.2e}"
        ),
    )
}

pub fn mabk_behavior() -> Outcome {
    let cfg = config();
    let top = optimize_settings(&ghz(3, FRAC_PI_4), Functional::Mabk, &cfg)
        .unwrap()
        .value;
    let weak = ghz(3, alpha_for(0.45));
    let low = optimize_settings(&weak, Functional::Mabk, &cfg).unwrap().value;
    let w = optimize_settings(&weak, Functional::Wwzb, &cfg).unwrap().value;
    let crit = maximize_criterion(&tensor_of(&weak), &cfg).unwrap().value;
    outcome(
        (top - 4.0).abs() <= 1e-6 && low <= 2.0 + 1e-6 && w <= 1.0 + 1e-6 && crit <= 1.0 + 1e-6,
        format!("GHZ max {top:.9}; sin2a=0.45: MABK {low:.9}, WWZB {w:.9}, criterion {crit:.9}"),
    )
}

pub fn even_non_mabk() -> Outcome {
    let cfg = config();
    let state = ghz(4, alpha_for(0.1));
    let cond = optimize_settings(&state, Functional::CondChsh, &cfg).unwrap().value;
    let mabk = optimize_settings(&state, Functional::Mabk, &cfg).unwrap().value;
    let need = 2.0 + 2.0 * (1.01f64.sqrt() - 1.0) - 1e-6;
    let six = optimize_settings(&ghz(6, FRAC_PI_4), Functional::CondChsh, &cfg)
        .unwrap()
        .value;
    outcome(
        cond >= need && mabk <= 2.0 + 1e-6,
        format!("n=4 sin2a=0.1: cond-CHSH {cond:.9} (need >= {need:.9}), MABK {mabk:.9}; n=6 GHZ cond-CHSH {six:.9}"),
    )
}

pub fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0AC1E);
    let mut disagreements = 0;
    let mut members = 0;
    for i in 0..200 {
        let n = 2 + i % 2;
        let values = (0..1 << n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let table = CorrelationTable::new(n, values).unwrap();
        let member = lhv_member(&table).unwrap();
        members += member as usize;
        if member != (wwzb(&table) <= 1.0 + 1e-9) {
            disagreements += 1;
        }
    }
    let c2 = enumerate_inequalities(2).unwrap().len();
    let c3 = enumerate_inequalities(3).unwrap().len();
    outcome(
        disagreements == 0 && c2 == 16 && c3 == 256,
        format!("{disagreements} disagreements ({members}/200 members); catalog sizes {c2}, {c3}"),
    )
}

pub fn necessity_bridge() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xB1D6E);
    let mut violating = 0;
    let mut unmatched = 0;
    for s in [0.55, 0.7, 0.85, 1.0, 0.6] {
        let state = ghz(3, alpha_for(s));
        let criterion = maximize_criterion(&tensor_of(&state), &config()).unwrap().value;
        for _ in 0..10 {
            let table = correlation_table(&state, &random_settings(&mut rng, 3)).unwrap();
            if wwzb(&table) > 1.0 {
                violating += 1;
                if criterion <= 1.0 {
                    unmatched += 1;
                }
            }
        }
    }
    outcome(
        unmatched == 0,
        format!("{violating}/50 random settings violate WWZB; {unmatched} without criterion value > 1"),
    )
}

pub fn postselection() -> Outcome {
    let mut worst = 0.0f64;
    for n in [3, 4, 5] {
        for alpha in [0.05, 0.3, 0.6, FRAC_PI_4] {
            let sites: Vec<usize> = (2..n).collect();
            let post = postselect_primed(&ghz(n, alpha), &sites, &vec![PrimedOutcome::Plus; n - 2]).unwrap();
            worst = worst.max((post.state.fidelity(&ghz(2, alpha)).unwrap() - 1.0).abs());
        }
    }
    outcome(worst <= 1e-12, format!("max |fidelity - 1| = {worst:.2e}"))
}

fn random_state(rng: &mut impl Rng, n: usize) -> StateVector {
    let amps = (0..1 << n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    StateVector::normalized(n, amps).unwrap()
}

fn random_euler(rng: &mut impl Rng) -> EulerAngles {
    EulerAngles::new(
        rng.gen_range(0.0..TAU),
        rng.gen_range(0.0..TAU),
        rng.gen_range(0.0..TAU),
    )
    .unwrap()
}

pub fn invariance_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1A7);
    let (mut z_err, mut norm_err, mut cauchy_err) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..100 {
        let n = 2 + i % 3;
        let t = tensor_of(&random_state(&mut rng, n));
        let angles: Vec<EulerAngles> = (0..n).map(|_| random_euler(&mut rng)).collect();
        let rotated = rotate_tensor(&t, &FrameSet::from_euler(&angles)).unwrap();
        let sector = sector_sum_squares(&rotated);

        // z rotation applied after the frame (φ-type) and a shift of ψ
        let z = FrameSet::new((0..n).map(|_| Rotation3::about_z(rng.gen_range(0.0..TAU))).collect()).unwrap();
        z_err = z_err.max((sector_sum_squares(&rotate_tensor(&rotated, &z).unwrap()) - sector).abs());
        let shifted: Vec<EulerAngles> = angles
            .iter()
            .map(|a| EulerAngles::new(a.phi, a.theta, a.psi + rng.gen_range(0.0..TAU)).unwrap())
            .collect();
        let other = sector_sum_squares(&rotate_tensor(&t, &FrameSet::from_euler(&shifted)).unwrap());
        z_err = z_err.max((other - sector).abs());

        norm_err = norm_err.max((full_correlation_norm_sq(&rotated) - full_correlation_norm_sq(&t)).abs());
        let (_, c) = best_c(&rotated);
        cauchy_err = cauchy_err.max(c * c - sector);
    }
    outcome(
        z_err <= 1e-12 && norm_err <= 1e-9 && cauchy_err <= 1e-9,
        format!("z-invariance {z_err:.2e}, norm {norm_err:.2e}, best_c^2 - sector <= {cauchy_err:.2e}"),
    )
}

pub fn separability() -> Outcome {
    let mut worst = f64::INFINITY;
    for n in [3, 4] {
        for i in 0..10 {
            let rho = density_of(&ghz(n, FRAC_PI_4 * i as f64 / 9.0));
            for a in 0..n {
                for b in a + 1..n {
                    let pair = rho.reduce(&[a, b]).unwrap();
                    worst = worst.min(pair.partial_transpose_min_eigenvalue(&[1]).unwrap());
                }
            }
        }
    }
    outcome(worst >= -1e-12, format!("min partial-transpose eigenvalue {worst:.2e}"))
}
