//! Linear solves, the Picard iteration for the nonlinear problem and its
//! dimension-reduced limit, cut-off solves and the Laplacian resolvent.

use serde::Serialize;

use crate::assembly::{
    assemble_limit_slice, assemble_resolvent, assemble_scaled, mass_matrix, slice_mass_product, CsrMatrix,
    LinearSystem,
};
use crate::coefficients::CoefficientBlocks;
use crate::grid::{full_norm, GridField, NormKind, TensorGrid};
use crate::nonlinear_ops::{apply_operator, operator_constants, OperatorConstants, OperatorSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverConfig {
    pub beta: f64,
    pub epsilon: f64,
    /// Picard stops once `‖u^{k+1} − u^k‖_{L²}` drops to this value.
    pub picard_tol: f64,
    pub picard_max: usize,
    /// Relative residual `‖b − Ax‖ / ‖b‖` for CG.
    pub cg_tol: f64,
    pub cg_max: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            beta: 2.0,
            epsilon: 1.0,
            picard_tol: 1e-9,
            picard_max: 200,
            cg_tol: 1e-11,
            cg_max: 50_000,
        }
    }
}

impl SolverConfig {
    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(Error::Parameter(format!("beta = {} must be positive", self.beta)));
        }
        if !(self.picard_tol > 0.0) || !(self.cg_tol > 0.0) {
            return Err(Error::Parameter("tolerances must be positive".into()));
        }
        if self.picard_max == 0 || self.cg_max == 0 {
            return Err(Error::Parameter("iteration caps must be positive".into()));
        }
        Ok(())
    }

    /// `β` must exceed `M |Ω|^{1/2 − 1/r}` for a solution with the
    /// `L^r` bound to exist.
    pub fn check_admissible(&self, constants: &OperatorConstants) -> Result<()> {
        self.validate()?;
        if !(self.beta > constants.beta_min) {
            return Err(Error::Parameter(format!(
                "beta = {} is not admissible: it must exceed M|Ω|^(1/2-1/r) = {} (M = {}, r = {})",
                self.beta, constants.beta_min, constants.m, constants.r
            )));
        }
        Ok(())
    }
}

/// One Picard step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationRecord {
    /// `‖u^{k+1} − u^k‖_{L²}`.
    pub change: f64,
    /// Weak-form residual of `u^k`, measured in the norm dual to the energy
    /// norm of the linear operator. It equals `‖u^{k+1} − u^k‖` in that
    /// energy norm.
    pub residual: f64,
    /// `‖u^{k+1}‖_{L²}`.
    pub l2: f64,
    /// `‖u^{k+1}‖_{L^r}`.
    pub lr: f64,
    pub cg_iterations: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IterationHistory {
    pub records: Vec<IterationRecord>,
    /// False when `β ≤ K`: the iteration is then not known to contract.
    pub contraction_guaranteed: bool,
}

impl IterationHistory {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    /// `change_{k+1} / change_k` for consecutive steps.
    pub fn change_ratios(&self) -> Vec<f64> {
        self.records
            .windows(2)
            .map(|w| if w[0].change > 0.0 { w[1].change / w[0].change } else { 0.0 })
            .collect()
    }

    pub fn final_change(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.change)
    }
}

/// Result of a CG run.
#[derive(Debug, Clone, PartialEq)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Jacobi-preconditioned conjugate gradients from the initial guess `x0`.
pub fn conjugate_gradient(a: &CsrMatrix, b: &[f64], x0: Vec<f64>, tol: f64, max_iter: usize) -> Result<CgOutcome> {
    let n = a.dim();
    if b.len() != n || x0.len() != n {
        return Err(Error::Usage(format!(
            "CG dimension mismatch: matrix {n}, rhs {}, guess {}",
            b.len(),
            x0.len()
        )));
    }
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        return Ok(CgOutcome {
            x: vec![0.0; n],
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();

    let mut x = x0;
    let mut r = a.matvec(&x);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut res = dot(&r, &r).sqrt() / b_norm;
    if res <= tol {
        return Ok(CgOutcome {
            x,
            iterations: 0,
            relative_residual: res,
        });
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 1..=max_iter {
        a.matvec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::CgFailure {
                iterations: it,
                residual: res,
            });
        }
        let alpha = rz / pap;
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        res = dot(&r, &r).sqrt() / b_norm;
        if res <= tol {
            return Ok(CgOutcome {
                x,
                iterations: it,
                relative_residual: res,
            });
        }
        for k in 0..n {
            z[k] = r[k] * inv_diag[k];
        }
        let rz_new = dot(&r, &z);
        let gamma = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            p[k] = z[k] + gamma * p[k];
        }
    }
    Err(Error::CgFailure {
        iterations: max_iter,
        residual: res,
    })
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solve `system · u = rhs` for a field on `grid`.
pub fn cg_solve(system: &LinearSystem, grid: &TensorGrid, rhs: &[f64], cfg: &SolverConfig) -> Result<GridField> {
    if system.dim() != grid.len() {
        return Err(Error::Usage("system does not match grid".into()));
    }
    let out = conjugate_gradient(&system.matrix, rhs, vec![0.0; grid.len()], cfg.cg_tol, cfg.cg_max)?;
    GridField::from_values(grid, out.x)
}

/// Thomas algorithm for a tridiagonal system. `lower[0]` and
/// `upper[n-1]` are ignored.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if lower.len() != n || upper.len() != n || rhs.len() != n {
        return Err(Error::Usage("tridiagonal bands have inconsistent lengths".into()));
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = diag[0];
    for k in 0..n {
        if k > 0 {
            denom = diag[k] - lower[k] * c[k - 1];
        }
        if denom == 0.0 || !denom.is_finite() {
            return Err(Error::Validation(format!("zero pivot at row {k} of tridiagonal system")));
        }
        c[k] = if k + 1 < n { upper[k] / denom } else { 0.0 };
        d[k] = if k > 0 { (rhs[k] - lower[k] * d[k - 1]) / denom } else { rhs[k] / denom };
    }
    for k in (0..n.saturating_sub(1)).rev() {
        d[k] -= c[k] * d[k + 1];
    }
    Ok(d)
}

/// A linear solve `u = L⁻¹ F(source)` used by the Picard loop.
pub trait LinearStage {
    fn grid(&self) -> &TensorGrid;
    /// Solves with `source` as right-hand side, starting from `guess`.
    fn solve_source(&self, source: &GridField, guess: &[f64]) -> Result<(GridField, usize)>;
    /// Energy norm `√(dᵀ L d)` (summed over slices for the limit).
    fn energy_norm(&self, d: &[f64]) -> f64;
}

/// The `ε`-problem `a_ε(u, φ) + β(u, φ) = (f, φ)` on one grid.
#[derive(Debug, Clone)]
pub struct FullStage {
    grid: TensorGrid,
    system: LinearSystem,
    mass: LinearSystem,
    cg_tol: f64,
    cg_max: usize,
}

impl FullStage {
    /// `ε = 0` is accepted here and gives the degenerate global operator.
    pub fn new(grid: &TensorGrid, blocks: &CoefficientBlocks, cfg: &SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let system = assemble_scaled(grid, &blocks.scale(cfg.epsilon)?, cfg.beta)?;
        Ok(Self {
            grid: *grid,
            system,
            mass: mass_matrix(grid),
            cg_tol: cfg.cg_tol,
            cg_max: cfg.cg_max,
        })
    }

    pub fn system(&self) -> &LinearSystem {
        &self.system
    }

    pub fn mass(&self) -> &LinearSystem {
        &self.mass
    }

    /// `Su − M f` tested against `φ`, divided by the energy norm of `φ`.
    pub fn weak_residual(&self, u: &GridField, f: &GridField, phi: &GridField) -> f64 {
        let su = self.system.matrix.matvec(u.values());
        let mf = self.mass.matrix.matvec(f.values());
        let num: f64 = phi.values().iter().zip(su.iter().zip(&mf)).map(|(p, (a, b))| p * (a - b)).sum();
        num.abs() / self.energy_norm(phi.values())
    }
}

impl LinearStage for FullStage {
    fn grid(&self) -> &TensorGrid {
        &self.grid
    }

    fn solve_source(&self, source: &GridField, guess: &[f64]) -> Result<(GridField, usize)> {
        if source.grid() != &self.grid {
            return Err(Error::Usage("source lives on a different grid".into()));
        }
        let rhs = self.mass.matrix.matvec(source.values());
        let out = conjugate_gradient(&self.system.matrix, &rhs, guess.to_vec(), self.cg_tol, self.cg_max)?;
        Ok((GridField::from_values(&self.grid, out.x)?, out.iterations))
    }

    fn energy_norm(&self, d: &[f64]) -> f64 {
        dot(d, &self.system.matrix.matvec(d)).max(0.0).sqrt()
    }
}

/// The limit operator: one tridiagonal `ω₂` problem per node column.
#[derive(Debug, Clone)]
pub struct LimitStage {
    grid: TensorGrid,
    slices: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)>,
}

impl LimitStage {
    pub fn new(grid: &TensorGrid, blocks: &CoefficientBlocks, beta: f64) -> Result<Self> {
        let slices = (1..=grid.n1())
            .map(|i| {
                assemble_limit_slice(grid, blocks, beta, i)
                    .map(|s| s.tridiagonal_bands().expect("slice systems are tridiagonal"))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { grid: *grid, slices })
    }

    fn column(&self, values: &[f64], i: usize) -> Vec<f64> {
        (1..=self.grid.n2()).map(|j| values[self.grid.index(i, j)]).collect()
    }

    /// Per-slice weak residual of `u` against `φ`, scaled by the slice
    /// energy norm of `φ`; the maximum over slices.
    pub fn slice_residual(&self, u: &GridField, f: &GridField, phi: &[f64]) -> f64 {
        let h2 = self.grid.h2();
        let mut worst = 0.0f64;
        for i in 1..=self.grid.n1() {
            let (lo, d, up) = &self.slices[i - 1];
            let uc = self.column(u.values(), i);
            let fc = slice_mass_product(h2, &self.column(f.values(), i));
            let su = tri_matvec(lo, d, up, &uc);
            let num: f64 = phi.iter().zip(su.iter().zip(&fc)).map(|(p, (a, b))| p * (a - b)).sum();
            let en = dot(phi, &tri_matvec(lo, d, up, phi)).sqrt();
            if en > 0.0 {
                worst = worst.max(num.abs() / en);
            }
        }
        worst
    }
}

fn tri_matvec(lo: &[f64], d: &[f64], up: &[f64], x: &[f64]) -> Vec<f64> {
    let n = d.len();
    (0..n)
        .map(|k| {
            let mut s = d[k] * x[k];
            if k > 0 {
                s += lo[k] * x[k - 1];
            }
            if k + 1 < n {
                s += up[k] * x[k + 1];
            }
            s
        })
        .collect()
}

impl LinearStage for LimitStage {
    fn grid(&self) -> &TensorGrid {
        &self.grid
    }

    fn solve_source(&self, source: &GridField, _guess: &[f64]) -> Result<(GridField, usize)> {
        if source.grid() != &self.grid {
            return Err(Error::Usage("source lives on a different grid".into()));
        }
        let h2 = self.grid.h2();
        let mut out = vec![0.0; self.grid.len()];
        for i in 1..=self.grid.n1() {
            let (lo, d, up) = &self.slices[i - 1];
            let rhs = slice_mass_product(h2, &self.column(source.values(), i));
            let col = solve_tridiagonal(lo, d, up, &rhs)?;
            for (j, v) in col.into_iter().enumerate() {
                out[self.grid.index(i, j + 1)] = v;
            }
        }
        Ok((GridField::from_values(&self.grid, out)?, 0))
    }

    fn energy_norm(&self, d: &[f64]) -> f64 {
        // Σ_i h₁ · (slice energy) approximates the X₁ integral.
        let h1 = self.grid.h1();
        let mut acc = 0.0;
        for i in 1..=self.grid.n1() {
            let (lo, dg, up) = &self.slices[i - 1];
            let c = self.column(d, i);
            acc += h1 * dot(&c, &tri_matvec(lo, dg, up, &c));
        }
        acc.max(0.0).sqrt()
    }
}

/// Picard iteration `u^{k+1} = L⁻¹ B(u^k)` from `u⁰ = 0`.
pub fn picard<S: LinearStage>(
    stage: &S,
    spec: &OperatorSpec,
    cfg: &SolverConfig,
) -> Result<(GridField, IterationHistory)> {
    let grid = *stage.grid();
    let constants = operator_constants(spec, &grid)?;
    cfg.check_admissible(&constants)?;
    let mut history = IterationHistory {
        records: Vec::new(),
        contraction_guaranteed: cfg.beta > constants.k,
    };
    let mut u = GridField::zeros(&grid);
    for _ in 0..cfg.picard_max {
        let b = apply_operator(spec, &u)?;
        let (next, cg_iterations) = stage.solve_source(&b, u.values())?;
        let diff = next.sub(&u)?;
        let change = full_norm(&diff, NormKind::L2);
        let record = IterationRecord {
            change,
            residual: stage.energy_norm(diff.values()),
            l2: full_norm(&next, NormKind::L2),
            lr: full_norm(&next, NormKind::Lr(constants.r)),
            cg_iterations,
        };
        history.records.push(record);
        u = next;
        if !change.is_finite() {
            break;
        }
        if change <= cfg.picard_tol {
            return Ok((u, history));
        }
    }
    Err(Error::PicardNonConvergence {
        iterations: history.records.len(),
        last_change: history.final_change(),
        history: Box::new(history),
    })
}

/// Discrete solution of the `ε`-problem with nonlinear right-hand side `B`.
pub fn picard_full(
    grid: &TensorGrid,
    blocks: &CoefficientBlocks,
    spec: &OperatorSpec,
    cfg: &SolverConfig,
) -> Result<(GridField, IterationHistory)> {
    if !(cfg.epsilon > 0.0 && cfg.epsilon <= 1.0) {
        return Err(Error::Parameter(format!("epsilon = {} must lie in (0, 1]", cfg.epsilon)));
    }
    cfg.check_admissible(&operator_constants(spec, grid)?)?;
    picard(&FullStage::new(grid, blocks, cfg)?, spec, cfg)
}

/// Discrete solution of the limit problem, one `ω₂` line at a time.
pub fn picard_limit(
    grid: &TensorGrid,
    blocks: &CoefficientBlocks,
    spec: &OperatorSpec,
    cfg: &SolverConfig,
) -> Result<(GridField, IterationHistory)> {
    cfg.check_admissible(&operator_constants(spec, grid)?)?;
    picard(&LimitStage::new(grid, blocks, cfg.beta)?, spec, cfg)
}

/// One linear `ε`-solve with a prescribed right-hand side.
pub fn solve_with_source(
    grid: &TensorGrid,
    blocks: &CoefficientBlocks,
    cfg: &SolverConfig,
    source: &GridField,
) -> Result<GridField> {
    let stage = FullStage::new(grid, blocks, cfg)?;
    Ok(stage.solve_source(source, &vec![0.0; grid.len()])?.0)
}

/// `Δₙ f = (I − n⁻¹Δ)⁻¹ f` with homogeneous Dirichlet conditions.
pub fn resolvent_apply(grid: &TensorGrid, n: u64, f: &GridField) -> Result<GridField> {
    if f.grid() != grid {
        return Err(Error::Usage("field lives on a different grid".into()));
    }
    let system = assemble_resolvent(grid, n)?;
    let rhs = mass_matrix(grid).matrix.matvec(f.values());
    let out = conjugate_gradient(&system.matrix, &rhs, f.values().to_vec(), 1e-13, 100_000)?;
    GridField::from_values(grid, out.x)
}
