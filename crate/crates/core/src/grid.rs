//! Tensor-product grids on `Ω = ω₁ × ω₂`, nodal fields and quadrature norms.
//!
//! The first coordinate is the `X₁` direction (the one whose diffusion is
//! scaled by `ε²`), the second is `X₂`. Nodes carry indices `0..=n+1` in each
//! direction; indices `0` and `n+1` lie on `∂Ω`, where every [`GridField`]
//! vanishes. Norms are evaluated on the Q1 interpolant of the nodal values.

use serde::Serialize;

use crate::quadrature::GAUSS2;
use crate::{Error, Result};

/// Open interval `(lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn unit() -> Self {
        Self { lo: 0.0, hi: 1.0 }
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    fn is_valid(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite() && self.hi > self.lo
    }
}

/// Uniform tensor grid with `n1 × n2` interior nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TensorGrid {
    omega1: Interval,
    omega2: Interval,
    n1: usize,
    n2: usize,
    h1: f64,
    h2: f64,
}

impl TensorGrid {
    pub fn new(omega1: Interval, omega2: Interval, n1: usize, n2: usize) -> Result<Self> {
        if !omega1.is_valid() || !omega2.is_valid() {
            return Err(Error::Config(format!(
                "degenerate interval: omega1 = ({}, {}), omega2 = ({}, {})",
                omega1.lo, omega1.hi, omega2.lo, omega2.hi
            )));
        }
        if n1 == 0 || n2 == 0 {
            return Err(Error::Config(format!(
                "interior node counts must be positive, got n1 = {n1}, n2 = {n2}"
            )));
        }
        Ok(Self {
            omega1,
            omega2,
            n1,
            n2,
            h1: omega1.length() / (n1 + 1) as f64,
            h2: omega2.length() / (n2 + 1) as f64,
        })
    }

    /// Unit square with `n × n` interior nodes.
    pub fn unit_square(n: usize) -> Result<Self> {
        Self::new(Interval::unit(), Interval::unit(), n, n)
    }

    pub fn omega1(&self) -> Interval {
        self.omega1
    }

    pub fn omega2(&self) -> Interval {
        self.omega2
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn h1(&self) -> f64 {
        self.h1
    }

    pub fn h2(&self) -> f64 {
        self.h2
    }

    /// Number of interior (unknown) nodes.
    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `|Ω|`.
    pub fn measure(&self) -> f64 {
        self.omega1.length() * self.omega2.length()
    }

    /// `|ω₁|`.
    pub fn omega1_measure(&self) -> f64 {
        self.omega1.length()
    }

    /// `|ω₂|`.
    pub fn omega2_measure(&self) -> f64 {
        self.omega2.length()
    }

    /// Coordinate of node column `i ∈ 0..=n1+1`.
    pub fn x1(&self, i: usize) -> f64 {
        self.omega1.lo + i as f64 * self.h1
    }

    /// Coordinate of node row `j ∈ 0..=n2+1`.
    pub fn x2(&self, j: usize) -> f64 {
        self.omega2.lo + j as f64 * self.h2
    }

    /// Map physical coordinates to `[0, 1]²`.
    pub fn normalized(&self, x1: f64, x2: f64) -> (f64, f64) {
        (
            (x1 - self.omega1.lo) / self.omega1.length(),
            (x2 - self.omega2.lo) / self.omega2.length(),
        )
    }

    /// Linear index of interior node `(i, j)`, `1 ≤ i ≤ n1`, `1 ≤ j ≤ n2`.
    /// `X₁` runs fastest.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!((1..=self.n1).contains(&i) && (1..=self.n2).contains(&j));
        (i - 1) + self.n1 * (j - 1)
    }

    /// Like [`index`](Self::index) but `None` for boundary nodes.
    #[inline]
    pub fn interior_index(&self, i: usize, j: usize) -> Option<usize> {
        if i >= 1 && i <= self.n1 && j >= 1 && j <= self.n2 {
            Some(self.index(i, j))
        } else {
            None
        }
    }

    /// Inverse of [`index`](Self::index).
    pub fn node(&self, k: usize) -> (usize, usize) {
        (k % self.n1 + 1, k / self.n1 + 1)
    }
}

/// Nodal values at the interior nodes of a grid. The Q1 interpolant vanishes
/// on `∂Ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    grid: TensorGrid,
    values: Vec<f64>,
}

impl GridField {
    pub fn zeros(grid: &TensorGrid) -> Self {
        Self {
            grid: *grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: &TensorGrid, c: f64) -> Self {
        Self {
            grid: *grid,
            values: vec![c; grid.len()],
        }
    }

    pub fn from_values(grid: &TensorGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Usage(format!(
                "field has {} values, grid has {} interior nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!("non-finite value at node {k}")));
        }
        Ok(Self {
            grid: *grid,
            values,
        })
    }

    /// Samples `f(x1, x2)` at the interior nodes.
    pub fn from_fn(grid: &TensorGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|k| {
                let (i, j) = grid.node(k);
                f(grid.x1(i), grid.x2(j))
            })
            .collect();
        Self {
            grid: *grid,
            values,
        }
    }

    pub fn grid(&self) -> &TensorGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value at node `(i, j)` with `0 ≤ i ≤ n1+1`, `0 ≤ j ≤ n2+1`; zero on `∂Ω`.
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        match self.grid.interior_index(i, j) {
            Some(k) => self.values[k],
            None => 0.0,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn ensure_same_grid(&self, other: &GridField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::Usage("fields live on different grids".into()));
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridField {
        GridField {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scaled(&self, alpha: f64) -> GridField {
        self.map(|v| alpha * v)
    }

    /// `self - other`.
    pub fn sub(&self, other: &GridField) -> Result<GridField> {
        self.ensure_same_grid(other)?;
        Ok(GridField {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// `alpha * self + other`.
    pub fn axpy(&self, alpha: f64, other: &GridField) -> Result<GridField> {
        self.ensure_same_grid(other)?;
        Ok(GridField {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| alpha * a + b)
                .collect(),
        })
    }

    /// Pointwise product with a function of the node coordinates.
    pub fn multiply_by(&self, f: impl Fn(f64, f64) -> f64) -> GridField {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(k, v)| {
                let (i, j) = self.grid.node(k);
                v * f(self.grid.x1(i), self.grid.x2(j))
            })
            .collect();
        GridField {
            grid: self.grid,
            values,
        }
    }
}

/// Sub-rectangle of `Ω` spanned by node indices `i_lo..=i_hi`, `j_lo..=j_hi`
/// (it covers the elements between those node lines).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SubRegion {
    pub i_lo: usize,
    pub i_hi: usize,
    pub j_lo: usize,
    pub j_hi: usize,
}

impl SubRegion {
    /// The `X₁` range must keep at least one mesh layer away from `∂ω₁`. The
    /// `X₂` range either spans all of `ω₂` (a band `ω₁′ × ω₂`) or also keeps
    /// one layer of margin (`ω₁′ × ω₂′ ⊂⊂ Ω`).
    pub fn new(grid: &TensorGrid, i_lo: usize, i_hi: usize, j_lo: usize, j_hi: usize) -> Result<Self> {
        let x1_ok = i_lo >= 1 && i_hi <= grid.n1() && i_lo < i_hi;
        let full_x2 = j_lo == 0 && j_hi == grid.n2() + 1;
        let x2_ok = full_x2 || (j_lo >= 1 && j_hi <= grid.n2() && j_lo < j_hi);
        if !(x1_ok && x2_ok) {
            return Err(Error::Config(format!(
                "sub-region [{i_lo}, {i_hi}] x [{j_lo}, {j_hi}] is not strictly inside a {} x {} grid",
                grid.n1(),
                grid.n2()
            )));
        }
        Ok(Self { i_lo, i_hi, j_lo, j_hi })
    }

    /// `ω₁′ × ω₂′` with the given fractional margin on every side.
    pub fn interior(grid: &TensorGrid, margin: f64) -> Result<Self> {
        let (i_lo, i_hi) = margin_range(grid.n1(), margin)?;
        let (j_lo, j_hi) = margin_range(grid.n2(), margin)?;
        Self::new(grid, i_lo, i_hi, j_lo, j_hi)
    }

    /// `ω₁′ × ω₂` with the given fractional margin in `X₁` only.
    pub fn x1_band(grid: &TensorGrid, margin: f64) -> Result<Self> {
        let (i_lo, i_hi) = margin_range(grid.n1(), margin)?;
        Self::new(grid, i_lo, i_hi, 0, grid.n2() + 1)
    }

    pub fn is_compactly_inside(&self, grid: &TensorGrid) -> bool {
        self.j_lo >= 1 && self.j_hi <= grid.n2()
    }
}

fn margin_range(n: usize, margin: f64) -> Result<(usize, usize)> {
    if !(margin > 0.0 && margin < 0.5) {
        return Err(Error::Parameter(format!("region margin {margin} must lie in (0, 0.5)")));
    }
    let cells = (n + 1) as f64;
    let lo = ((margin * cells).round() as usize).max(1);
    let hi = (((1.0 - margin) * cells).round() as usize).min(n);
    if lo >= hi {
        return Err(Error::Config(format!(
            "grid with {n} interior nodes is too coarse for margin {margin}"
        )));
    }
    Ok((lo, hi))
}

/// Integration domain for a norm.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Region {
    #[default]
    Full,
    Sub(SubRegion),
}

impl From<SubRegion> for Region {
    fn from(r: SubRegion) -> Self {
        Region::Sub(r)
    }
}

impl Region {
    /// Element index ranges `(i_elems, j_elems)`; element `e` spans nodes `e, e+1`.
    fn element_ranges(&self, grid: &TensorGrid) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
        match self {
            Region::Full => (0..grid.n1() + 1, 0..grid.n2() + 1),
            Region::Sub(r) => (r.i_lo..r.i_hi, r.j_lo..r.j_hi),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormKind {
    L2,
    /// `L^r` with `r > 2`.
    Lr(f64),
    H1Seminorm,
    H1,
    /// `‖u‖²_W = ‖u‖²_{L²} + ‖∇_{X₂}u‖²_{L²}`.
    Wnorm,
    GradX1,
    GradX2,
}

/// Squared integrals of the Q1 interpolant over a region. All norms are
/// assembled from these so the Pythagorean identities hold exactly.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SquaredIntegrals {
    pub l2: f64,
    pub grad_x1: f64,
    pub grad_x2: f64,
}

/// Elementwise 2×2 Gauss integration of `u²`, `(∂₁u)²` and `(∂₂u)²`; exact
/// for the Q1 interpolant.
pub fn squared_integrals(field: &GridField, region: Region) -> SquaredIntegrals {
    let grid = field.grid();
    let (h1, h2) = (grid.h1(), grid.h2());
    let (ie_range, je_range) = region.element_ranges(grid);
    let mut acc = SquaredIntegrals::default();
    for je in je_range {
        for ie in ie_range.clone() {
            let c = [
                field.at(ie, je),
                field.at(ie + 1, je),
                field.at(ie, je + 1),
                field.at(ie + 1, je + 1),
            ];
            for (s, ws) in GAUSS2.mapped(0.0, 1.0) {
                for (t, wt) in GAUSS2.mapped(0.0, 1.0) {
                    let w = ws * wt * h1 * h2;
                    let u = c[0] * (1.0 - s) * (1.0 - t)
                        + c[1] * s * (1.0 - t)
                        + c[2] * (1.0 - s) * t
                        + c[3] * s * t;
                    let du1 = ((c[1] - c[0]) * (1.0 - t) + (c[3] - c[2]) * t) / h1;
                    let du2 = ((c[2] - c[0]) * (1.0 - s) + (c[3] - c[1]) * s) / h2;
                    acc.l2 += w * u * u;
                    acc.grad_x1 += w * du1 * du1;
                    acc.grad_x2 += w * du2 * du2;
                }
            }
        }
    }
    acc
}

fn lr_integral(field: &GridField, r: f64, region: Region) -> f64 {
    let grid = field.grid();
    let (h1, h2) = (grid.h1(), grid.h2());
    let (ie_range, je_range) = region.element_ranges(grid);
    let mut acc = 0.0;
    for je in je_range {
        for ie in ie_range.clone() {
            let c = [
                field.at(ie, je),
                field.at(ie + 1, je),
                field.at(ie, je + 1),
                field.at(ie + 1, je + 1),
            ];
            for (s, ws) in GAUSS2.mapped(0.0, 1.0) {
                for (t, wt) in GAUSS2.mapped(0.0, 1.0) {
                    let u = c[0] * (1.0 - s) * (1.0 - t)
                        + c[1] * s * (1.0 - t)
                        + c[2] * (1.0 - s) * t
                        + c[3] * s * t;
                    acc += ws * wt * h1 * h2 * u.abs().powf(r);
                }
            }
        }
    }
    acc
}

/// Norm of the Q1 interpolant of `field` over `region`.
pub fn norm(field: &GridField, kind: NormKind, region: Region) -> Result<f64> {
    if let Region::Sub(r) = region {
        let g = field.grid();
        if r.i_hi > g.n1() + 1 || r.j_hi > g.n2() + 1 {
            return Err(Error::Usage("region exceeds grid".into()));
        }
    }
    if let NormKind::Lr(r) = kind {
        if !(r > 2.0) || !r.is_finite() {
            return Err(Error::Parameter(format!("L^r norm needs finite r > 2, got {r}")));
        }
        return Ok(lr_integral(field, r, region).powf(1.0 / r));
    }
    let s = squared_integrals(field, region);
    let sq = match kind {
        NormKind::L2 => s.l2,
        NormKind::H1Seminorm => s.grad_x1 + s.grad_x2,
        NormKind::H1 => s.l2 + s.grad_x1 + s.grad_x2,
        NormKind::Wnorm => s.l2 + s.grad_x2,
        NormKind::GradX1 => s.grad_x1,
        NormKind::GradX2 => s.grad_x2,
        NormKind::Lr(_) => unreachable!(),
    };
    Ok(sq.sqrt())
}

/// Shorthand for full-domain norms that cannot fail.
pub fn full_norm(field: &GridField, kind: NormKind) -> f64 {
    norm(field, kind, Region::Full).expect("full-domain norm")
}
