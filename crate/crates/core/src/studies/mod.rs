//! Measured tables for the singular limit: ε-sweeps against the limit
//! solution, convergence-rate fits, interior estimates, truncation and
//! resolvent studies. Every study returns plain data plus a list of
//! [`Check`]s that the CLI and the acceptance suite turn into verdicts.

pub mod csv;
pub mod interior;
pub mod properties;
pub mod rate;
pub mod resolvent;
pub mod summary;
pub mod sweep;
pub mod truncation;

pub use csv::{Cell, CsvTable};
pub use interior::{interior_scan, InteriorScan};
pub use properties::operator_checks;
pub use rate::{log_log_slope, rate_fit, RateFit};
pub use resolvent::{resolvent_study, ResolventSource, ResolventStudy};
pub use summary::{Check, Summary};
pub use sweep::{epsilon_sweep, ConvergenceReport, SweepRow};
pub use truncation::{truncation_study, TruncationStudy};

use rayon::prelude::*;
use serde::Serialize;

use crate::coefficients::CoefficientBlocks;
use crate::grid::{Interval, TensorGrid};
use crate::nonlinear_ops::{operator_constants, Kernel, Nonlinearity, OperatorConstants, OperatorSpec};
use crate::solver::SolverConfig;
use crate::{Error, Result};

/// Everything needed to pose the ε-family of problems on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub grid: TensorGrid,
    pub blocks: CoefficientBlocks,
    pub spec: OperatorSpec,
    /// `epsilon` is overridden per row.
    pub solver: SolverConfig,
    /// Strictly decreasing, inside `(0, 1]`.
    pub epsilons: Vec<f64>,
    /// Fractional margin of `ω₁′` (and `ω₂′`) used for interior norms.
    pub region_margin: f64,
}

/// `1, 1/2, …, 1/64`.
pub fn default_epsilons() -> Vec<f64> {
    (0..=6).map(|k| 0.5f64.powi(k)).collect()
}

impl Problem {
    /// Separable kernel `h = sin(πx̂₁)(2 + cos πx̂₁′)/3`, `a = tanh(· + 1)`,
    /// `A = I`, `β = 2` on a 128×128 unit-square grid. Here `K = M = 1`,
    /// `r = 4`, so `β` equals both `2K` and `2β_min`.
    pub fn default_sweep() -> Self {
        Self {
            grid: TensorGrid::unit_square(128).expect("valid grid"),
            blocks: CoefficientBlocks::identity(),
            spec: OperatorSpec::kernel_inner(
                Kernel::Separable,
                Nonlinearity::Tanh {
                    scale: 1.0,
                    shift: 1.0,
                },
            ),
            solver: SolverConfig::default(),
            epsilons: default_epsilons(),
            region_margin: 0.25,
        }
    }

    /// `A = I`, `X₁`-independent kernel `h ≡ 1`, `β = 2 > max(K, β₀)`. The
    /// limit solution does not vanish on `∂ω₁ × ω₂`, so `u_ε` carries
    /// boundary layers of width `ε`; the grid is refined in `X₁` to
    /// resolve them.
    pub fn rate_regime() -> Self {
        Self {
            grid: TensorGrid::new(Interval::unit(), Interval::unit(), 511, 31).expect("valid grid"),
            spec: OperatorSpec::kernel_inner(
                Kernel::One,
                Nonlinearity::Tanh {
                    scale: 1.0,
                    shift: 1.0,
                },
            ),
            ..Self::default_sweep()
        }
    }

    pub fn constants(&self) -> Result<OperatorConstants> {
        operator_constants(&self.spec, &self.grid)
    }

    pub fn validate(&self) -> Result<()> {
        check_epsilons(&self.epsilons)?;
        if !(self.region_margin > 0.0 && self.region_margin < 0.5) {
            return Err(Error::Parameter(format!(
                "region margin {} must lie in (0, 0.5)",
                self.region_margin
            )));
        }
        self.solver.check_admissible(&self.constants()?)
    }

    /// Bounds implied by the operator constants at this `β`.
    pub fn bounds(&self) -> Result<Bounds> {
        Bounds::new(&self.constants()?, self.solver.beta, self.blocks.lambda, self.grid.measure())
    }
}

/// Strictly decreasing values inside `(0, 1]`.
pub fn check_epsilons(epsilons: &[f64]) -> Result<()> {
    if epsilons.is_empty() {
        return Err(Error::Parameter("epsilon list is empty".into()));
    }
    for &e in epsilons {
        if !(e > 0.0 && e <= 1.0) {
            return Err(Error::Parameter(format!("epsilon = {e} must lie in (0, 1]")));
        }
    }
    if epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Parameter("epsilon list must be strictly decreasing".into()));
    }
    Ok(())
}

/// A-priori bounds for solutions of the ε-problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bounds {
    /// `‖u_ε‖_{L^r} ≤ M / (β − β_min)`.
    pub lr: f64,
    /// `‖u_ε‖_{L²} ≤ β_min / (β − β_min)`.
    pub l2: f64,
    /// `C / √λ`, bounding both `ε‖∇_{X₁}u_ε‖` and `‖∇_{X₂}u_ε‖`.
    pub grad: f64,
    /// `C² = M²|Ω|^{1−2/r}(1 + β_min/(β − β_min)) / (β − β_min)`.
    pub c_squared: f64,
}

impl Bounds {
    pub fn new(c: &OperatorConstants, beta: f64, lambda: f64, measure: f64) -> Result<Self> {
        let gap = beta - c.beta_min;
        if !(gap > 0.0) {
            return Err(Error::Parameter(format!(
                "beta = {beta} must exceed M|Ω|^(1/2-1/r) = {}",
                c.beta_min
            )));
        }
        let c_squared = c.m * c.m * measure.powf(1.0 - 2.0 / c.r) * (1.0 + c.beta_min / gap) / gap;
        Ok(Self {
            lr: c.m / gap,
            l2: c.beta_min / gap,
            grad: c_squared.sqrt() / lambda.sqrt(),
            c_squared,
        })
    }
}

/// `measured / bound`, with `0/0 = 0`.
pub(crate) fn ratio(measured: f64, bound: f64) -> f64 {
    if bound > 0.0 {
        measured / bound
    } else if measured == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// `max / min` of a nonnegative column; `1` for an all-zero column.
pub(crate) fn spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if values.is_empty() || max == 0.0 {
        1.0
    } else if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

/// Run independent jobs, sequentially for `threads ≤ 1`, otherwise on a
/// dedicated pool. Results keep the input order either way.
pub(crate) fn run_jobs<T, R, F>(items: &[T], threads: usize, job: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    if threads <= 1 {
        return Ok(items.iter().map(job).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {threads} worker threads: {e}")))?;
    Ok(pool.install(|| items.par_iter().map(job).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_problem_constants() {
        let p = Problem::default_sweep();
        let c = p.constants().unwrap();
        assert!((c.k - 1.0).abs() < 1e-15 && (c.m - 1.0).abs() < 1e-15);
        assert_eq!(c.r, 4.0);
        assert!((c.beta_min - 1.0).abs() < 1e-15);
        let b = p.bounds().unwrap();
        assert!((b.lr - 1.0).abs() < 1e-15);
        assert!((b.l2 - 1.0).abs() < 1e-15);
        assert!((b.c_squared - 2.0).abs() < 1e-14);
        p.validate().unwrap();
    }

    #[test]
    fn epsilon_lists_are_checked() {
        assert!(check_epsilons(&[1.0, 0.5, 0.25]).is_ok());
        assert!(check_epsilons(&[0.5, 1.0]).is_err());
        assert!(check_epsilons(&[1.0, 1.0]).is_err());
        assert!(check_epsilons(&[2.0]).is_err());
        assert!(check_epsilons(&[0.0]).is_err());
        assert!(check_epsilons(&[]).is_err());
    }

    #[test]
    fn spread_conventions() {
        assert_eq!(spread(&[0.0, 0.0]), 1.0);
        assert_eq!(spread(&[1.0, 4.0, 2.0]), 4.0);
        assert!(spread(&[0.0, 1.0]).is_infinite());
    }

    #[test]
    fn jobs_keep_their_order() {
        let items: Vec<u64> = (0..50).collect();
        let seq = run_jobs(&items, 1, |x| x * x).unwrap();
        let par = run_jobs(&items, 4, |x| x * x).unwrap();
        assert_eq!(seq, par);
    }
}
