//! Full-correlation Bell-inequality toolkit for multiqubit states.
//!
//! The central question is whether the `N`-qubit correlations of a state,
//! measured with two dichotomic settings per site, admit a local hidden
//! variable description. Three independent routes are provided:
//!
//! * the correlation-tensor criterion ([`criterion`], [`optimize`]): `T^mod`
//!   maximized over local frames, and its sum-of-squares relaxation;
//! * concrete Bell functionals evaluated at optimized settings ([`bell`]);
//! * exact polytope membership by vertex enumeration ([`lhv`]).

pub mod bell;
pub mod criterion;
pub mod error;
pub mod lhv;
pub mod optimize;
pub mod rotation;
pub mod state;
pub mod tensor;

pub use criterion::{best_c, rotate_tensor, sector_sum_squares, statement2_frames, tmod_value, CVectors};
pub use error::{Error, Result};
pub use optimize::{maximize_criterion, maximize_sum_squares, CriterionResult, OptimizerConfig};
pub use rotation::{EulerAngles, FrameSet, Rotation3};
pub use state::{density_of, make_ghz, postselect_primed, DensityMatrix, GhzParams, PrimedOutcome, StateVector};
pub use tensor::{analytic_ghz_tensor, correlation_tensor, CorrelationTensor};
