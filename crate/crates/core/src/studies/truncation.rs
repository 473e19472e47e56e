//! Cut-off problems: replace `B(u_ε)` by `B(φₙ u_ε)` and measure how far the
//! resulting solution `w_εⁿ` moves in the `X₂`-gradient, relative to
//! `‖φₙ − 1‖_{L^{2r/(r−2)}}`.

use serde::Serialize;

use super::{run_jobs, spread, Check, CsvTable, Problem};
use crate::grid::{full_norm, GridField, Interval, NormKind, TensorGrid};
use crate::nonlinear_ops::apply_operator;
use crate::quadrature::GAUSS6;
use crate::solver::{picard, FullStage, LinearStage};
use crate::Result;
use std::f64::consts::PI;

/// Maximum allowed `max / min` over `n` of `sup_ε Rₙ,ε`.
pub const UNIFORMITY_FACTOR: f64 = 10.0;

pub fn default_ns() -> Vec<u32> {
    vec![2, 4, 8, 16]
}

pub fn default_epsilons() -> Vec<f64> {
    vec![1.0, 0.25, 1.0 / 16.0]
}

/// C¹ cubic ramp: 0 at `t ≤ 0`, 1 at `t ≥ 1`.
#[inline]
fn ramp(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

/// `ψ(n · dist(x, ∂I))` on one interval.
fn cutoff_1d(iv: Interval, n: u32, x: f64) -> f64 {
    let d = (x - iv.lo).min(iv.hi - x);
    ramp(n as f64 * d)
}

/// `φₙ(x₁, x₂)`: product of 1D ramps of width `1/n` at every side.
pub fn cutoff(grid: &TensorGrid, n: u32, x1: f64, x2: f64) -> f64 {
    cutoff_1d(grid.omega1(), n, x1) * cutoff_1d(grid.omega2(), n, x2)
}

/// Quadrature nodes on an interval, aligned with the ramp breakpoints.
fn nodes_1d(iv: Interval, n: u32) -> Vec<(f64, f64)> {
    let w = 1.0 / n as f64;
    let mut breaks = vec![iv.lo];
    if 2.0 * w < iv.length() {
        breaks.extend([iv.lo + w, iv.hi - w]);
    } else {
        breaks.push(0.5 * (iv.lo + iv.hi));
    }
    breaks.push(iv.hi);
    let mut out = Vec::new();
    for piece in breaks.windows(2) {
        let sub = 32;
        let h = (piece[1] - piece[0]) / sub as f64;
        for k in 0..sub {
            let a = piece[0] + k as f64 * h;
            out.extend(GAUSS6.mapped(a, a + h));
        }
    }
    out
}

/// `‖φₙ − 1‖_{L^p(Ω)}`.
pub fn cutoff_deviation_norm(grid: &TensorGrid, n: u32, p: f64) -> f64 {
    let q1 = nodes_1d(grid.omega1(), n);
    let q2 = nodes_1d(grid.omega2(), n);
    let mut acc = 0.0;
    for &(x2, w2) in &q2 {
        let c2 = cutoff_1d(grid.omega2(), n, x2);
        for &(x1, w1) in &q1 {
            acc += w1 * w2 * (1.0 - cutoff_1d(grid.omega1(), n, x1) * c2).abs().powf(p);
        }
    }
    acc.powf(1.0 / p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationRow {
    pub epsilon: f64,
    pub n: u32,
    /// `‖∇_{X₂}(w_εⁿ − u_ε)‖_{L²}`.
    pub numerator: f64,
    /// `‖φₙ − 1‖_{L^{2r/(r−2)}}`.
    pub denominator: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncationStudy {
    pub rows: Vec<TruncationRow>,
    pub ns: Vec<u32>,
    pub epsilons: Vec<f64>,
    /// `sup_ε Rₙ,ε` for each `n`.
    pub sup_ratio: Vec<f64>,
    pub variation: f64,
    pub numerators_decrease: bool,
    /// `C′ K M / (λ (β − β_min))` with `C′ = diam(ω₂)/π`; reported only.
    pub reference_constant: f64,
    pub beta: f64,
    pub grid: TensorGrid,
}

/// Numerator of the study for an arbitrary multiplier `φ`.
pub fn cutoff_numerator(
    stage: &FullStage,
    spec: &crate::nonlinear_ops::OperatorSpec,
    u: &GridField,
    phi: impl Fn(f64, f64) -> f64,
) -> Result<f64> {
    let source = apply_operator(spec, &u.multiply_by(phi))?;
    let (w, _) = stage.solve_source(&source, u.values())?;
    Ok(full_norm(&w.sub(u)?, NormKind::GradX2))
}

pub fn truncation_study(problem: &Problem, epsilons: &[f64], ns: &[u32], threads: usize) -> Result<TruncationStudy> {
    super::check_epsilons(epsilons)?;
    problem.solver.check_admissible(&problem.constants()?)?;
    if ns.is_empty() || ns.iter().any(|&n| n == 0) || ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(crate::Error::Parameter("n list must be positive and strictly increasing".into()));
    }
    let c = problem.constants()?;
    let grid = problem.grid;
    let p = 2.0 * c.r / (c.r - 2.0);
    let denominators: Vec<f64> = ns.iter().map(|&n| cutoff_deviation_norm(&grid, n, p)).collect();

    let per_eps = run_jobs(epsilons, threads, |&eps| -> Result<Vec<TruncationRow>> {
        let cfg = problem.solver.with_epsilon(eps);
        let stage = FullStage::new(&grid, &problem.blocks, &cfg)?;
        let (u, _) = picard(&stage, &problem.spec, &cfg)?;
        ns.iter()
            .zip(&denominators)
            .map(|(&n, &den)| {
                let num = cutoff_numerator(&stage, &problem.spec, &u, |x1, x2| cutoff(&grid, n, x1, x2))?;
                Ok(TruncationRow {
                    epsilon: eps,
                    n,
                    numerator: num,
                    denominator: den,
                    ratio: super::ratio(num, den),
                })
            })
            .collect()
    })?;
    let mut rows = Vec::new();
    for r in per_eps {
        rows.extend(r?);
    }

    let sup_ratio: Vec<f64> = ns
        .iter()
        .map(|&n| rows.iter().filter(|r| r.n == n).map(|r| r.ratio).fold(0.0, f64::max))
        .collect();
    let numerators_decrease = epsilons.iter().all(|&e| {
        let col: Vec<f64> = rows.iter().filter(|r| r.epsilon == e).map(|r| r.numerator).collect();
        let first = col[0];
        let last = *col.last().unwrap();
        super::sweep::is_monotone(&col, 0.0) && (last < first || first == 0.0)
    });
    let poincare = grid.omega2_measure() / PI;
    let reference_constant = poincare * c.k * c.m / (problem.blocks.lambda * (problem.solver.beta - c.beta_min));
    Ok(TruncationStudy {
        variation: spread(&sup_ratio),
        sup_ratio,
        rows,
        ns: ns.to_vec(),
        epsilons: epsilons.to_vec(),
        numerators_decrease,
        reference_constant,
        beta: problem.solver.beta,
        grid,
    })
}

impl TruncationStudy {
    pub fn pass(&self) -> bool {
        self.variation <= UNIFORMITY_FACTOR && self.numerators_decrease
    }

    pub fn checks(&self) -> Vec<Check> {
        let worst = self.sup_ratio.iter().copied().fold(0.0, f64::max);
        vec![
            Check::gated("sup_ratio_variation", self.variation <= UNIFORMITY_FACTOR, self.variation, UNIFORMITY_FACTOR),
            Check::gated(
                "numerators_decrease",
                self.numerators_decrease,
                self.rows.last().map_or(0.0, |r| r.numerator),
                0.0,
            ),
            Check::info(
                "ratio_below_reference_constant",
                worst <= self.reference_constant,
                worst,
                self.reference_constant,
            )
            .with_note("Poincare constant in X2 taken as diam(omega2)/pi"),
        ]
    }

    pub fn to_csv(&self) -> CsvTable {
        let mut t = CsvTable::new(
            "truncation",
            &["epsilon", "n", "n1", "n2", "beta", "numerator", "denominator", "ratio"],
        );
        for r in &self.rows {
            t.push(vec![
                r.epsilon.into(),
                u64::from(r.n).into(),
                self.grid.n1().into(),
                self.grid.n2().into(),
                self.beta.into(),
                r.numerator.into(),
                r.denominator.into(),
                r.ratio.into(),
            ]);
        }
        t
    }
}
