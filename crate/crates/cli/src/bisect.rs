//! Threshold search for odd `n`.

use std::f64::consts::FRAC_PI_4;

use belltensor::optimize::{criterion_exceeds, CriterionMode, SEARCH_MARGIN};
use belltensor::{correlation_tensor, density_of, make_ghz, Error, GhzParams, OptimizerConfig};

use crate::error::{CliError, Result};

/// Bisection stops once the bracket is this narrow (radians).
pub const ALPHA_TOL: f64 = 1e-4;

fn exceeds(n: usize, alpha: f64, config: &OptimizerConfig) -> Result<bool> {
    let state = make_ghz(GhzParams::new(n, alpha)?)?;
    let t = correlation_tensor(&density_of(&state))?;
    Ok(criterion_exceeds(
        &t,
        config,
        CriterionMode::Modulus,
        1.0 + SEARCH_MARGIN,
    )?)
}

/// Smallest α in `[0, π/4]` at which the maximized `T^mod` criterion
/// exceeds 1, located to within [`ALPHA_TOL`].
pub fn bisect_threshold(n: usize, config: &OptimizerConfig) -> Result<f64> {
    if n.is_multiple_of(2) || !(3..=7).contains(&n) {
        return Err(CliError::Parameter(format!("bisection needs odd n in 3..=7, got {n}")));
    }
    config.validate()?;
    let (mut lo, mut hi) = (0.0, FRAC_PI_4);
    if exceeds(n, lo, config)? || !exceeds(n, hi, config)? {
        return Err(Error::Bisection(format!("no sign change of the criterion on [0, pi/4] for n={n}")).into());
    }
    while hi - lo > ALPHA_TOL {
        let mid = 0.5 * (lo + hi);
        if exceeds(n, mid, config)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
