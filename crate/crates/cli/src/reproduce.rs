//! Named reproduction checks with an injectable table of expected values.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt::Write as _;

use belltensor::bell::{optimize_settings, wwzb, CorrelationTable, Functional};
use belltensor::lhv::{enumerate_inequalities, lhv_member};
use belltensor::state::PrimedOutcome;
use belltensor::{analytic_ghz_tensor, correlation_tensor, density_of, make_ghz, maximize_criterion};
use belltensor::{postselect_primed, statement2_frames, GhzParams, OptimizerConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bisect::bisect_threshold;
use crate::error::{CliError, Result};

pub const GROUPS: [&str; 9] = [
    "tensor",
    "statement2",
    "threshold",
    "gisin",
    "mabk",
    "even-n",
    "oracle",
    "postselection",
    "separability",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Comparison {
    /// `|achieved − expected| ≤ tol`
    Within(f64),
    /// `achieved ≥ expected − slack`
    AtLeast(f64),
    /// `achieved ≤ expected + slack`
    AtMost(f64),
}

impl Comparison {
    fn holds(self, expected: f64, achieved: f64) -> bool {
        match self {
            Comparison::Within(tol) => (achieved - expected).abs() <= tol,
            Comparison::AtLeast(slack) => achieved >= expected - slack,
            Comparison::AtMost(slack) => achieved <= expected + slack,
        }
    }

    fn symbol(self) -> String {
        match self {
            Comparison::Within(tol) => format!("±{tol:e}"),
            Comparison::AtLeast(_) => ">=".into(),
            Comparison::AtMost(_) => "<=".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub group: &'static str,
    pub expected: f64,
    pub achieved: f64,
    pub comparison: Comparison,
    pub passed: bool,
}

/// Expected value for every named check.
#[derive(Debug, Clone, PartialEq)]
pub struct Expectations(BTreeMap<String, f64>);

fn gisin(alpha: f64) -> f64 {
    let s = (2.0 * alpha).sin();
    2.0 * (1.0 + s * s).sqrt()
}

fn component(alpha: f64) -> f64 {
    let s = (2.0 * alpha).sin();
    (1.0 + s * s).sqrt()
}

fn alpha_for(sin2a: f64) -> f64 {
    0.5 * sin2a.asin()
}

const STATEMENT2_DIVISORS: [u32; 4] = [32, 16, 8, 4];
const GISIN_ALPHAS: [f64; 3] = [0.1, 0.4, FRAC_PI_4];

impl Default for Expectations {
    fn default() -> Self {
        let mut m = BTreeMap::new();
        m.insert("tensor.max_abs_diff".into(), 0.0);
        for n in [4, 6] {
            for d in STATEMENT2_DIVISORS {
                m.insert(format!("statement2.n{n}.pi_over_{d}"), component(PI / d as f64));
            }
        }
        m.insert("statement2.optimizer.n4.pi_over_8".into(), component(PI / 8.0));
        m.insert("threshold.n3.sin2alpha".into(), 0.5);
        m.insert("threshold.n5.sin2alpha".into(), 0.25);
        for a in GISIN_ALPHAS {
            m.insert(format!("gisin.alpha_{a:.4}"), gisin(a));
        }
        m.insert("mabk.n3.ghz".into(), 4.0);
        m.insert("mabk.n3.sin2alpha_0.45".into(), 2.0);
        m.insert("even-n.cond_chsh.n4".into(), gisin(alpha_for(0.1)));
        m.insert("even-n.mabk.n4".into(), 2.0);
        m.insert("oracle.count.n2".into(), 16.0);
        m.insert("oracle.count.n3".into(), 256.0);
        m.insert("oracle.disagreements".into(), 0.0);
        for n in [3, 4, 5] {
            m.insert(format!("postselection.fidelity.n{n}"), 1.0);
        }
        m.insert("separability.min_pt_eigenvalue".into(), 0.0);
        Self(m)
    }
}

impl Expectations {
    /// Replaces the expected value of an existing check.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        match self.0.get_mut(name) {
            Some(v) => {
                *v = value;
                Ok(())
            }
            None => Err(CliError::Parameter(format!("no check named {name:?}"))),
        }
    }

    pub fn get(&self, name: &str) -> f64 {
        self.0[name]
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub checks: Vec<Check>,
}

impl Summary {
    pub fn failed(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Plain-text table of expected against achieved values.
    pub fn render(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(5).max(5);
        let mut out = format!(
            "{:<width$}  {:>14}  {:>8}  {:>14}  result\n",
            "check", "expected", "", "achieved"
        );
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{:<width$}  {:>14.9}  {:>8}  {:>14.9}  {}",
                c.name,
                c.expected,
                c.comparison.symbol(),
                c.achieved,
                if c.passed { "PASS" } else { "FAIL" }
            );
        }
        let failed = self.failed().len();
        let _ = writeln!(out, "{} checks, {} failed", self.checks.len(), failed);
        out
    }
}

struct Runner<'a> {
    expect: &'a Expectations,
    checks: Vec<Check>,
}

impl Runner<'_> {
    fn record(&mut self, name: &str, group: &'static str, achieved: f64, comparison: Comparison) {
        let expected = self.expect.get(name);
        self.checks.push(Check {
            name: name.to_string(),
            group,
            expected,
            achieved,
            comparison,
            passed: comparison.holds(expected, achieved),
        });
    }
}

fn ghz(n: usize, alpha: f64) -> Result<belltensor::StateVector> {
    Ok(make_ghz(GhzParams::new(n, alpha)?)?)
}

/// Runs every check, or only those of group `only`.
pub fn run_checks(expect: &Expectations, only: Option<&str>, config: &OptimizerConfig) -> Result<Summary> {
    if let Some(g) = only {
        if !GROUPS.contains(&g) {
            return Err(CliError::Parameter(format!(
                "unknown check group {g:?}; known: {}",
                GROUPS.join(", ")
            )));
        }
    }
    let wanted = |g: &str| only.is_none_or(|o| o == g);
    let mut r = Runner {
        expect,
        checks: Vec::new(),
    };

    if wanted("tensor") {
        let mut worst = 0.0f64;
        for n in 2..=6 {
            for i in 0..20 {
                let alpha = FRAC_PI_4 * i as f64 / 19.0;
                let numeric = correlation_tensor(&density_of(&ghz(n, alpha)?))?;
                let analytic = analytic_ghz_tensor(GhzParams::new(n, alpha)?)?;
                worst = worst.max(numeric.max_abs_diff(&analytic));
            }
        }
        r.record("tensor.max_abs_diff", "tensor", worst, Comparison::AtMost(1e-12));
    }

    if wanted("statement2") {
        for n in [4, 6] {
            for d in STATEMENT2_DIVISORS {
                let c = statement2_frames(GhzParams::new(n, PI / d as f64)?)?;
                r.record(
                    &format!("statement2.n{n}.pi_over_{d}"),
                    "statement2",
                    c.achieved,
                    Comparison::Within(1e-12),
                );
            }
        }
        let t = correlation_tensor(&density_of(&ghz(4, PI / 8.0)?))?;
        let best = maximize_criterion(&t, config)?;
        r.record(
            "statement2.optimizer.n4.pi_over_8",
            "statement2",
            best.value,
            Comparison::AtLeast(1e-6),
        );
    }

    if wanted("threshold") {
        for (n, tol) in [(3, 1e-3), (5, 2e-3)] {
            let alpha = bisect_threshold(n, config)?;
            r.record(
                &format!("threshold.n{n}.sin2alpha"),
                "threshold",
                (2.0 * alpha).sin(),
                Comparison::Within(tol),
            );
        }
    }

    if wanted("gisin") {
        for a in GISIN_ALPHAS {
            let v = optimize_settings(&ghz(2, a)?, Functional::Chsh, config)?.value;
            r.record(&format!("gisin.alpha_{a:.4}"), "gisin", v, Comparison::Within(1e-6));
        }
    }

    if wanted("mabk") {
        let top = optimize_settings(&ghz(3, FRAC_PI_4)?, Functional::Mabk, config)?.value;
        r.record("mabk.n3.ghz", "mabk", top, Comparison::Within(1e-6));
        let low = optimize_settings(&ghz(3, alpha_for(0.45))?, Functional::Mabk, config)?.value;
        r.record("mabk.n3.sin2alpha_0.45", "mabk", low, Comparison::AtMost(1e-6));
    }

    if wanted("even-n") {
        let state = ghz(4, alpha_for(0.1))?;
        let cond = optimize_settings(&state, Functional::CondChsh, config)?.value;
        r.record("even-n.cond_chsh.n4", "even-n", cond, Comparison::AtLeast(1e-6));
        let mabk = optimize_settings(&state, Functional::Mabk, config)?.value;
        r.record("even-n.mabk.n4", "even-n", mabk, Comparison::AtMost(1e-6));
    }

    if wanted("oracle") {
        r.record(
            "oracle.count.n2",
            "oracle",
            enumerate_inequalities(2)?.len() as f64,
            Comparison::Within(0.0),
        );
        r.record(
            "oracle.count.n3",
            "oracle",
            enumerate_inequalities(3)?.len() as f64,
            Comparison::Within(0.0),
        );
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut disagreements = 0;
        for i in 0..200 {
            let n = 2 + i % 2;
            let values = (0..1 << n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let table = CorrelationTable::new(n, values)?;
            if lhv_member(&table)? != (wwzb(&table) <= 1.0 + 1e-9) {
                disagreements += 1;
            }
        }
        r.record(
            "oracle.disagreements",
            "oracle",
            disagreements as f64,
            Comparison::Within(0.0),
        );
    }

    if wanted("postselection") {
        let alpha = 0.3;
        let target = ghz(2, alpha)?;
        for n in [3, 4, 5] {
            let sites: Vec<usize> = (2..n).collect();
            let outcomes = vec![PrimedOutcome::Plus; n - 2];
            let post = postselect_primed(&ghz(n, alpha)?, &sites, &outcomes)?;
            r.record(
                &format!("postselection.fidelity.n{n}"),
                "postselection",
                post.state.fidelity(&target)?,
                Comparison::Within(1e-12),
            );
        }
    }

    if wanted("separability") {
        let mut worst = f64::INFINITY;
        for n in [3, 4] {
            for alpha in [0.1, 0.3, 0.6, FRAC_PI_4] {
                let rho = density_of(&ghz(n, alpha)?);
                for a in 0..n {
                    for b in a + 1..n {
                        let pair = rho.reduce(&[a, b])?;
                        worst = worst.min(pair.partial_transpose_min_eigenvalue(&[1])?);
                    }
                }
            }
        }
        r.record(
            "separability.min_pt_eigenvalue",
            "separability",
            worst,
            Comparison::AtLeast(1e-12),
        );
    }

    Ok(Summary { checks: r.checks })
}
