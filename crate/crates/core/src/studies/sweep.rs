//! ε-sweep: solve the ε-problem for each ε and compare with the limit
//! solution on the same grid.

use serde::Serialize;

use super::{ratio, run_jobs, Bounds, Cell, Check, CsvTable, Problem};
use crate::grid::{norm, squared_integrals, GridField, NormKind, Region, SubRegion, TensorGrid};
use crate::nonlinear_ops::OperatorConstants;
use crate::solver::{picard_full, picard_limit};
use crate::Result;

/// Measured/bound ratios may exceed one by this much (quadrature rounding).
pub const BOUND_SLACK: f64 = 1e-8;
/// Allowed relative growth between consecutive rows of an error column.
pub const MONOTONE_SLACK: f64 = 0.05;
/// Error at the smallest ε relative to ε = 1 in the default sweep.
pub const CONVERGENCE_FRACTION: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub ok: bool,
    pub failure: Option<String>,
    pub iterations: usize,
    /// Over `Ω`: `L²`, `∇_{X₂}`, `∇_{X₁}` and `W` norms of `u_ε − u₀`.
    pub l2_err: f64,
    pub gradx2_err: f64,
    pub gradx1_err: f64,
    pub w_err: f64,
    /// The same errors over the band `ω₁′ × ω₂`.
    pub band_l2_err: f64,
    pub band_gradx2_err: f64,
    pub band_gradx1_err: f64,
    pub l2: f64,
    pub lr: f64,
    pub gradx1: f64,
    pub gradx2: f64,
    pub eps_gradx1: f64,
    pub eps_l2: f64,
    /// `‖u_ε‖_{H¹(Ω′)}` with `Ω′ = ω₁′ × ω₂′`.
    pub interior_h1: f64,
    pub lr_ratio: f64,
    pub l2_ratio: f64,
    pub eps_gradx1_ratio: f64,
    pub gradx2_ratio: f64,
}

impl SweepRow {
    fn failed(epsilon: f64, message: String) -> Self {
        let nan = f64::NAN;
        Self {
            epsilon,
            ok: false,
            failure: Some(message),
            iterations: 0,
            l2_err: nan,
            gradx2_err: nan,
            gradx1_err: nan,
            w_err: nan,
            band_l2_err: nan,
            band_gradx2_err: nan,
            band_gradx1_err: nan,
            l2: nan,
            lr: nan,
            gradx1: nan,
            gradx2: nan,
            eps_gradx1: nan,
            eps_l2: nan,
            interior_h1: nan,
            lr_ratio: nan,
            l2_ratio: nan,
            eps_gradx1_ratio: nan,
            gradx2_ratio: nan,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub grid: TensorGrid,
    pub beta: f64,
    pub lambda: f64,
    pub constants: OperatorConstants,
    pub bounds: Bounds,
    pub limit_iterations: usize,
    pub limit_l2: f64,
    pub limit_gradx2: f64,
    pub interior: SubRegion,
    pub band: SubRegion,
    pub rows: Vec<SweepRow>,
}

/// Solve every ε of the problem plus the limit problem once.
pub fn epsilon_sweep(problem: &Problem, threads: usize) -> Result<ConvergenceReport> {
    problem.validate()?;
    let constants = problem.constants()?;
    let bounds = problem.bounds()?;
    let grid = problem.grid;
    let interior = SubRegion::interior(&grid, problem.region_margin)?;
    let band = SubRegion::x1_band(&grid, problem.region_margin)?;
    let (u0, limit_history) = picard_limit(&grid, &problem.blocks, &problem.spec, &problem.solver)?;

    let rows = run_jobs(&problem.epsilons, threads, |&eps| {
        let cfg = problem.solver.with_epsilon(eps);
        match picard_full(&grid, &problem.blocks, &problem.spec, &cfg) {
            Ok((u, history)) => measure(eps, &u, &u0, history.iterations(), &constants, &bounds, interior, band),
            Err(e) => Ok(SweepRow::failed(eps, e.to_string())),
        }
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let limit = squared_integrals(&u0, Region::Full);
    Ok(ConvergenceReport {
        grid,
        beta: problem.solver.beta,
        lambda: problem.blocks.lambda,
        constants,
        bounds,
        limit_iterations: limit_history.iterations(),
        limit_l2: limit.l2.sqrt(),
        limit_gradx2: limit.grad_x2.sqrt(),
        interior,
        band,
        rows,
    })
}

#[allow(clippy::too_many_arguments)]
fn measure(
    eps: f64,
    u: &GridField,
    u0: &GridField,
    iterations: usize,
    c: &OperatorConstants,
    b: &Bounds,
    interior: SubRegion,
    band: SubRegion,
) -> Result<SweepRow> {
    let diff = u.sub(u0)?;
    let e = squared_integrals(&diff, Region::Full);
    let eb = squared_integrals(&diff, band.into());
    let s = squared_integrals(u, Region::Full);
    let lr = norm(u, NormKind::Lr(c.r), Region::Full)?;
    let (l2, gradx1, gradx2) = (s.l2.sqrt(), s.grad_x1.sqrt(), s.grad_x2.sqrt());
    Ok(SweepRow {
        epsilon: eps,
        ok: true,
        failure: None,
        iterations,
        l2_err: e.l2.sqrt(),
        gradx2_err: e.grad_x2.sqrt(),
        gradx1_err: e.grad_x1.sqrt(),
        w_err: (e.l2 + e.grad_x2).sqrt(),
        band_l2_err: eb.l2.sqrt(),
        band_gradx2_err: eb.grad_x2.sqrt(),
        band_gradx1_err: eb.grad_x1.sqrt(),
        l2,
        lr,
        gradx1,
        gradx2,
        eps_gradx1: eps * gradx1,
        eps_l2: eps * l2,
        interior_h1: norm(u, NormKind::H1, interior.into())?,
        lr_ratio: ratio(lr, b.lr),
        l2_ratio: ratio(l2, b.l2),
        eps_gradx1_ratio: ratio(eps * gradx1, b.grad),
        gradx2_ratio: ratio(gradx2, b.grad),
    })
}

/// Non-increasing along the rows, up to `slack` relative growth per step.
pub fn is_monotone(column: &[f64], slack: f64) -> bool {
    column.windows(2).all(|w| w[1] <= w[0] * (1.0 + slack))
}

/// `last / first`, with `0/0 = 0`.
pub fn reduction(column: &[f64]) -> f64 {
    match (column.first(), column.last()) {
        (Some(&first), Some(&last)) => ratio(last, first),
        _ => f64::NAN,
    }
}

impl ConvergenceReport {
    pub fn ok_rows(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(|r| r.ok)
    }

    pub fn all_ok(&self) -> bool {
        self.rows.iter().all(|r| r.ok)
    }

    pub fn column(&self, f: impl Fn(&SweepRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }

    /// Largest `measured / bound` over the rows for `‖u_ε‖_{L^r}`.
    pub fn worst_lr_ratio(&self) -> f64 {
        self.ok_rows().map(|r| r.lr_ratio).fold(0.0, f64::max)
    }

    /// Largest ratio over the three energy-type bounds.
    pub fn worst_energy_ratio(&self) -> f64 {
        self.ok_rows()
            .map(|r| r.l2_ratio.max(r.eps_gradx1_ratio).max(r.gradx2_ratio))
            .fold(0.0, f64::max)
    }

    /// Bound, monotonicity and convergence checks for the sweep.
    pub fn checks(&self) -> Vec<Check> {
        let l2 = self.column(|r| r.l2_err);
        let g2 = self.column(|r| r.gradx2_err);
        let lr = self.worst_lr_ratio();
        let en = self.worst_energy_ratio();
        let (rl2, rg2) = (reduction(&l2), reduction(&g2));
        let eps_l2 = self.rows.last().map_or(f64::NAN, |r| r.eps_l2);
        let eps_g1 = self.rows.last().map_or(f64::NAN, |r| r.eps_gradx1);
        vec![
            Check::gated("all_rows_solved", self.all_ok(), self.ok_rows().count() as f64, self.rows.len() as f64),
            Check::gated("lr_bound", lr <= 1.0 + BOUND_SLACK, lr, 1.0 + BOUND_SLACK),
            Check::gated("energy_bounds", en <= 1.0 + BOUND_SLACK, en, 1.0 + BOUND_SLACK),
            Check::gated("l2_error_monotone", is_monotone(&l2, MONOTONE_SLACK), max_step(&l2), 1.0 + MONOTONE_SLACK),
            Check::gated("gradx2_error_monotone", is_monotone(&g2, MONOTONE_SLACK), max_step(&g2), 1.0 + MONOTONE_SLACK),
            Check::gated("l2_error_reduction", rl2 <= CONVERGENCE_FRACTION, rl2, CONVERGENCE_FRACTION),
            Check::gated("gradx2_error_reduction", rg2 <= CONVERGENCE_FRACTION, rg2, CONVERGENCE_FRACTION),
            Check::info("eps_l2_at_smallest_eps", eps_l2 < 1e-3, eps_l2, 1e-3)
                .with_note("epsilon times the L2 norm of u_eps"),
            Check::info("eps_gradx1_at_smallest_eps", eps_g1 < 1e-3, eps_g1, 1e-3)
                .with_note("epsilon times the X1-gradient norm of u_eps"),
        ]
    }

    pub fn to_csv(&self) -> CsvTable {
        let mut t = CsvTable::new(
            "sweep",
            &[
                "epsilon",
                "n",
                "n1",
                "n2",
                "beta",
                "status",
                "iterations",
                "l2_err",
                "gradx2_err",
                "gradx1_err",
                "w_err",
                "band_l2_err",
                "band_gradx2_err",
                "band_gradx1_err",
                "l2",
                "lr",
                "gradx1",
                "gradx2",
                "eps_gradx1",
                "eps_l2",
                "interior_h1",
                "lr_ratio",
                "l2_ratio",
                "eps_gradx1_ratio",
                "gradx2_ratio",
            ],
        );
        for r in &self.rows {
            t.push(vec![
                r.epsilon.into(),
                Cell::Na,
                self.grid.n1().into(),
                self.grid.n2().into(),
                self.beta.into(),
                if r.ok { "ok".into() } else { "failed".into() },
                r.iterations.into(),
                r.l2_err.into(),
                r.gradx2_err.into(),
                r.gradx1_err.into(),
                r.w_err.into(),
                r.band_l2_err.into(),
                r.band_gradx2_err.into(),
                r.band_gradx1_err.into(),
                r.l2.into(),
                r.lr.into(),
                r.gradx1.into(),
                r.gradx2.into(),
                r.eps_gradx1.into(),
                r.eps_l2.into(),
                r.interior_h1.into(),
                r.lr_ratio.into(),
                r.l2_ratio.into(),
                r.eps_gradx1_ratio.into(),
                r.gradx2_ratio.into(),
            ]);
        }
        t
    }
}

/// Largest `next / previous` along a column (0 when all entries vanish).
pub fn max_step(column: &[f64]) -> f64 {
    column.windows(2).map(|w| ratio(w[1], w[0])).fold(0.0, f64::max)
}
