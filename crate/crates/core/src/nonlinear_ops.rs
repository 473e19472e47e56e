//! Nonlocal nonlinear operators `B : L²(Ω) → L²(Ω)`.
//!
//! Three structural families are implemented, all built from a pointwise
//! nonlinearity `a` and an integral over `ω₁` at fixed `X₂`:
//!
//! * kernel-outer: `B(u) = a(∫ h(X₁,X₁′,X₂) u(X₁′,X₂) dX₁′)`
//! * kernel-inner: `B(u) = ∫ h(X₁,X₁′,X₂) a(u(X₁′,X₂)) dX₁′`
//! * projector-composite: `B(u) = a(l(X₁) P(u))` with `P` the `ω₁`-average.
//!
//! The `X₁′` integral is the composite trapezoid rule on the grid line,
//! boundary nodes included (where `u = 0`).

use std::f64::consts::PI;

use rand::Rng;
use serde::Serialize;

use crate::grid::{full_norm, GridField, NormKind, TensorGrid};
use crate::{Error, Result};

/// Pointwise nonlinearity `a : ℝ → ℝ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Nonlinearity {
    /// `scale · tanh(x + shift)`: bounded, Lipschitz constant `scale`.
    Tanh { scale: f64, shift: f64 },
    /// `scale · ((1 + (x + shift)²)^{q/2} − 1)`: growth of order `|x|^q`.
    Power { scale: f64, q: f64, shift: f64 },
}

impl Nonlinearity {
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Nonlinearity::Tanh { scale, shift } => scale * (x + shift).tanh(),
            Nonlinearity::Power { scale, q, shift } => {
                let y = x + shift;
                scale * ((1.0 + y * y).powf(0.5 * q) - 1.0)
            }
        }
    }

    /// Global Lipschitz constant `K_a`.
    pub fn lipschitz(&self) -> f64 {
        match *self {
            Nonlinearity::Tanh { scale, .. } => scale.abs(),
            Nonlinearity::Power { scale, q, .. } => {
                if q == 0.0 {
                    return 0.0;
                }
                // sup_y q·y(1+y²)^{q/2-1} is attained at y = (1-q)^{-1/2}
                let y = (1.0 - q).powf(-0.5);
                scale.abs() * q * y * (1.0 + y * y).powf(0.5 * q - 1.0)
            }
        }
    }

    /// `sup |a|` when finite.
    pub fn sup_bound(&self) -> Option<f64> {
        match *self {
            Nonlinearity::Tanh { scale, .. } => Some(scale.abs()),
            Nonlinearity::Power { q, .. } if q == 0.0 => Some(0.0),
            Nonlinearity::Power { .. } => None,
        }
    }

    /// `(M_a, q)` with `|a(x)| ≤ M_a (1 + |x|^q)`.
    pub fn growth(&self) -> (f64, f64) {
        match *self {
            Nonlinearity::Tanh { scale, .. } => (scale.abs(), 0.0),
            Nonlinearity::Power { scale, q, shift } => {
                // 0 ≤ (1+y²)^{q/2} − 1 ≤ |y|^q ≤ |x|^q + |shift|^q
                (scale.abs() * 1f64.max(shift.abs().powf(q)), q)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (scale, q, shift) = match *self {
            Nonlinearity::Tanh { scale, shift } => (scale, 0.0, shift),
            Nonlinearity::Power { scale, q, shift } => (scale, q, shift),
        };
        if !scale.is_finite() || !shift.is_finite() {
            return Err(Error::Parameter("nonlinearity parameters must be finite".into()));
        }
        if !(0.0..1.0).contains(&q) {
            return Err(Error::InvalidGrowth { q });
        }
        Ok(())
    }
}

/// Product-form kernels `h(X₁, X₁′, X₂) = outer(x̂₁) · inner(x̂₁′)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Kernel {
    /// `h ≡ 1`.
    One,
    /// `h = 1 + ½ cos(π x̂₁′)`.
    Cosine,
    /// `h = sin(π x̂₁) · (2 + cos(π x̂₁′)) / 3`.
    Separable,
}

impl Kernel {
    pub fn catalog(key: &str) -> Result<Self> {
        match key {
            "one" => Ok(Kernel::One),
            "cosine" => Ok(Kernel::Cosine),
            "separable" => Ok(Kernel::Separable),
            other => Err(Error::Config(format!(
                "unknown kernel '{other}' (expected one, cosine or separable)"
            ))),
        }
    }

    #[inline]
    pub fn outer(&self, xh1: f64) -> f64 {
        match self {
            Kernel::One | Kernel::Cosine => 1.0,
            Kernel::Separable => (PI * xh1).sin(),
        }
    }

    #[inline]
    pub fn inner(&self, xh1p: f64) -> f64 {
        match self {
            Kernel::One => 1.0,
            Kernel::Cosine => 1.0 + 0.5 * (PI * xh1p).cos(),
            Kernel::Separable => (2.0 + (PI * xh1p).cos()) / 3.0,
        }
    }

    pub fn eval(&self, xh1: f64, xh1p: f64, _xh2: f64) -> f64 {
        self.outer(xh1) * self.inner(xh1p)
    }

    pub fn max_abs(&self) -> f64 {
        match self {
            Kernel::One | Kernel::Separable => 1.0,
            Kernel::Cosine => 1.5,
        }
    }

    /// `max |∂_{X₁} h|` in physical units.
    pub fn max_abs_dx1(&self, omega1_len: f64) -> f64 {
        match self {
            Kernel::One | Kernel::Cosine => 0.0,
            Kernel::Separable => PI / omega1_len,
        }
    }

    pub fn is_x1_independent(&self) -> bool {
        matches!(self, Kernel::One | Kernel::Cosine)
    }
}

/// Multiplier of the projector-composite operator: `l = 1 + ½ cos(π x̂₁)`.
#[inline]
fn multiplier(xh1: f64) -> f64 {
    1.0 + 0.5 * (PI * xh1).cos()
}

const MULTIPLIER_MAX: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum OperatorVariant {
    KernelOuter { kernel: Kernel, a: Nonlinearity },
    KernelInner { kernel: Kernel, a: Nonlinearity },
    ProjectorComposite { a: Nonlinearity },
    Constant(f64),
    Zero,
}

/// An operator together with the cap on `r` used for bounded nonlinearities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatorSpec {
    pub variant: OperatorVariant,
    pub r_max: f64,
}

impl OperatorSpec {
    pub fn new(variant: OperatorVariant) -> Self {
        Self { variant, r_max: 4.0 }
    }

    pub fn zero() -> Self {
        Self::new(OperatorVariant::Zero)
    }

    pub fn constant(c: f64) -> Self {
        Self::new(OperatorVariant::Constant(c))
    }

    pub fn kernel_inner(kernel: Kernel, a: Nonlinearity) -> Self {
        Self::new(OperatorVariant::KernelInner { kernel, a })
    }

    pub fn kernel_outer(kernel: Kernel, a: Nonlinearity) -> Self {
        Self::new(OperatorVariant::KernelOuter { kernel, a })
    }

    pub fn projector(a: Nonlinearity) -> Self {
        Self::new(OperatorVariant::ProjectorComposite { a })
    }

    pub fn with_r_max(mut self, r_max: f64) -> Self {
        self.r_max = r_max;
        self
    }

    pub fn nonlinearity(&self) -> Option<Nonlinearity> {
        match self.variant {
            OperatorVariant::KernelOuter { a, .. }
            | OperatorVariant::KernelInner { a, .. }
            | OperatorVariant::ProjectorComposite { a } => Some(a),
            _ => None,
        }
    }

    pub fn kernel(&self) -> Option<Kernel> {
        match self.variant {
            OperatorVariant::KernelOuter { kernel, .. } | OperatorVariant::KernelInner { kernel, .. } => {
                Some(kernel)
            }
            _ => None,
        }
    }

    /// Whether `B(u)` never depends on `X₁` through the kernel.
    pub fn is_x1_independent(&self) -> bool {
        match self.variant {
            OperatorVariant::KernelOuter { kernel, .. } | OperatorVariant::KernelInner { kernel, .. } => {
                kernel.is_x1_independent()
            }
            OperatorVariant::ProjectorComposite { .. } => false,
            OperatorVariant::Constant(_) | OperatorVariant::Zero => true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(a) = self.nonlinearity() {
            a.validate()?;
        }
        if let OperatorVariant::Constant(c) = self.variant {
            if !c.is_finite() {
                return Err(Error::Parameter("constant source must be finite".into()));
            }
        }
        if !(self.r_max > 2.0) || !self.r_max.is_finite() {
            return Err(Error::Parameter(format!("r_max = {} must be finite and > 2", self.r_max)));
        }
        Ok(())
    }
}

/// Trapezoid weight of node column `k ∈ 0..=n1+1`.
#[inline]
fn trapezoid_weight(grid: &TensorGrid, k: usize) -> f64 {
    if k == 0 || k == grid.n1() + 1 {
        0.5 * grid.h1()
    } else {
        grid.h1()
    }
}

/// Nodal values of `B(u)`.
pub fn apply_operator(spec: &OperatorSpec, u: &GridField) -> Result<GridField> {
    spec.validate()?;
    let grid = u.grid();
    let (n1, n2) = (grid.n1(), grid.n2());
    let xh1: Vec<f64> = (0..=n1 + 1).map(|i| grid.normalized(grid.x1(i), 0.0).0).collect();
    let mut out = vec![0.0; grid.len()];
    match spec.variant {
        OperatorVariant::Zero => {}
        OperatorVariant::Constant(c) => out.fill(c),
        OperatorVariant::KernelInner { kernel, a } => {
            let wk: Vec<f64> = (0..=n1 + 1)
                .map(|k| trapezoid_weight(grid, k) * kernel.inner(xh1[k]))
                .collect();
            let outer: Vec<f64> = (1..=n1).map(|i| kernel.outer(xh1[i])).collect();
            for j in 1..=n2 {
                let s: f64 = (0..=n1 + 1).map(|k| wk[k] * a.eval(u.at(k, j))).sum();
                for i in 1..=n1 {
                    out[grid.index(i, j)] = outer[i - 1] * s;
                }
            }
        }
        OperatorVariant::KernelOuter { kernel, a } => {
            let wk: Vec<f64> = (0..=n1 + 1)
                .map(|k| trapezoid_weight(grid, k) * kernel.inner(xh1[k]))
                .collect();
            let outer: Vec<f64> = (1..=n1).map(|i| kernel.outer(xh1[i])).collect();
            for j in 1..=n2 {
                let t: f64 = (1..=n1).map(|k| wk[k] * u.at(k, j)).sum();
                for i in 1..=n1 {
                    out[grid.index(i, j)] = a.eval(outer[i - 1] * t);
                }
            }
        }
        OperatorVariant::ProjectorComposite { a } => {
            let inv_len = 1.0 / grid.omega1_measure();
            let l: Vec<f64> = (1..=n1).map(|i| multiplier(xh1[i])).collect();
            for j in 1..=n2 {
                let p = inv_len * (1..=n1).map(|k| trapezoid_weight(grid, k) * u.at(k, j)).sum::<f64>();
                for i in 1..=n1 {
                    out[grid.index(i, j)] = a.eval(l[i - 1] * p);
                }
            }
        }
    }
    GridField::from_values(grid, out)
}

/// Constants of `B` on a given domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatorConstants {
    /// `L² → L²` Lipschitz constant.
    pub k: f64,
    /// Growth constant: `‖B(u)‖_{L^r} ≤ M (1 + ‖u‖_{L²})`.
    pub m: f64,
    pub r: f64,
    /// `M |Ω|^{1/2 − 1/r}`; admissible `β` must exceed it.
    pub beta_min: f64,
    /// `‖∇_{X₁} B(u)‖_{L²} ≤ M″ (1 + ‖u‖_{L²})`.
    pub m_dx1: f64,
}

pub fn operator_constants(spec: &OperatorSpec, grid: &TensorGrid) -> Result<OperatorConstants> {
    spec.validate()?;
    let omega = grid.measure();
    let w1 = grid.omega1_measure();
    let w2 = grid.omega2_measure();

    let r = match spec.nonlinearity() {
        Some(a) => {
            let (_, q) = a.growth();
            if q > 0.0 {
                2.0 / q
            } else {
                spec.r_max
            }
        }
        None => spec.r_max,
    };
    let omega_r = omega.powf(1.0 / r);

    let (k, m, m_dx1) = match spec.variant {
        OperatorVariant::Zero => (0.0, 0.0, 0.0),
        OperatorVariant::Constant(c) => (0.0, c.abs() * omega_r, 0.0),
        OperatorVariant::KernelInner { kernel, a } => {
            let hmax = kernel.max_abs();
            let dh = kernel.max_abs_dx1(w1);
            let k = a.lipschitz() * hmax * w1;
            let (m, m_dx1) = match a.sup_bound() {
                Some(s) => (s * hmax * w1 * omega_r, s * dh * w1 * omega.sqrt()),
                None => {
                    let (ma, q) = a.growth();
                    // c₁ + c₂‖u‖^q ≤ (c₁ + c₂)(1 + ‖u‖)
                    (
                        hmax * ma * w1 * (omega_r + 1.0),
                        dh * ma * (w1 * omega.sqrt() + w1.powf(0.5 * (3.0 - q)) * w2.powf(0.5 * (1.0 - q))),
                    )
                }
            };
            (k, m, m_dx1)
        }
        OperatorVariant::KernelOuter { kernel, a } => {
            let hmax = kernel.max_abs();
            let dh = kernel.max_abs_dx1(w1);
            let ka = a.lipschitz();
            let m = match a.sup_bound() {
                Some(s) => s * omega_r,
                None => {
                    let (ma, q) = a.growth();
                    ma * (omega_r + (hmax * w1).powf(q))
                }
            };
            (ka * hmax * w1, m, ka * dh * w1)
        }
        OperatorVariant::ProjectorComposite { a } => {
            let ka = a.lipschitz();
            let m = match a.sup_bound() {
                Some(s) => s * omega_r,
                None => {
                    let (ma, q) = a.growth();
                    ma * (omega_r + MULTIPLIER_MAX.powf(q))
                }
            };
            // ‖P‖ = 1 for the average; max |l′| = π / (2|ω₁|)
            (ka * MULTIPLIER_MAX, m, ka * PI / (2.0 * w1))
        }
    };
    Ok(OperatorConstants {
        k,
        m,
        r,
        beta_min: m * omega.powf(0.5 - 1.0 / r),
        m_dx1,
    })
}

/// Outcome of a sampled inequality `lhs ≤ rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampledCheck {
    pub samples: usize,
    pub violations: usize,
    /// Largest `lhs / rhs` seen.
    pub worst_ratio: f64,
}

impl SampledCheck {
    fn new() -> Self {
        Self {
            samples: 0,
            violations: 0,
            worst_ratio: 0.0,
        }
    }

    fn record(&mut self, lhs: f64, rhs: f64, rel_tol: f64) {
        self.samples += 1;
        if lhs > rhs * (1.0 + rel_tol) + 1e-300 {
            self.violations += 1;
        }
        let ratio = if rhs > 0.0 {
            lhs / rhs
        } else if lhs > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        self.worst_ratio = self.worst_ratio.max(ratio);
    }

    pub fn pass(&self) -> bool {
        self.samples > 0 && self.violations == 0
    }
}

/// Random field mixing smooth modes and nodal noise, with amplitude
/// `10^U(log_lo, log_hi)`.
pub fn random_field<R: Rng>(grid: &TensorGrid, rng: &mut R, log_lo: f64, log_hi: f64) -> GridField {
    let amp = 10f64.powf(rng.gen_range(log_lo..=log_hi));
    let modes: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.gen_range(1..=4) as f64,
                rng.gen_range(1..=4) as f64,
                rng.gen_range(-1.0..1.0),
            )
        })
        .collect();
    let noise: f64 = rng.gen_range(0.0..1.0);
    let values = (0..grid.len())
        .map(|k| {
            let (i, j) = grid.node(k);
            let (x, y) = grid.normalized(grid.x1(i), grid.x2(j));
            let smooth: f64 = modes
                .iter()
                .map(|&(p, q, c)| c * (p * PI * x).sin() * (q * PI * y).sin())
                .sum();
            amp * (smooth + noise * rng.gen_range(-1.0..1.0))
        })
        .collect();
    GridField::from_values(grid, values).expect("finite random field")
}

/// `‖B(u) − B(v)‖ ≤ K ‖u − v‖` over random pairs.
pub fn sample_lipschitz<R: Rng>(
    spec: &OperatorSpec,
    grid: &TensorGrid,
    samples: usize,
    rng: &mut R,
) -> Result<SampledCheck> {
    let k = operator_constants(spec, grid)?.k;
    let mut check = SampledCheck::new();
    for _ in 0..samples {
        let u = random_field(grid, rng, -2.0, 1.0);
        // pairs range from nearby (local slope) to far apart
        let v = u.axpy(1.0, &random_field(grid, rng, -4.0, 1.0))?;
        let lhs = full_norm(&apply_operator(spec, &u)?.sub(&apply_operator(spec, &v)?)?, NormKind::L2);
        let rhs = k * full_norm(&u.sub(&v)?, NormKind::L2);
        check.record(lhs, rhs, 1e-12);
    }
    Ok(check)
}

/// `‖B(u)‖_{L^r} ≤ M (1 + ‖u‖_{L²})` over random fields of amplitude
/// `10⁻³ … 10³`.
pub fn sample_growth<R: Rng>(
    spec: &OperatorSpec,
    grid: &TensorGrid,
    samples: usize,
    rng: &mut R,
) -> Result<SampledCheck> {
    let c = operator_constants(spec, grid)?;
    let mut check = SampledCheck::new();
    for _ in 0..samples {
        let u = random_field(grid, rng, -3.0, 3.0);
        let b = apply_operator(spec, &u)?;
        let lhs = crate::grid::norm(&b, NormKind::Lr(c.r), crate::grid::Region::Full)?;
        let rhs = c.m * (1.0 + full_norm(&u, NormKind::L2));
        check.record(lhs, rhs, 1e-12);
    }
    Ok(check)
}

/// Discrete `X₁` difference quotient of `B(u)` between adjacent interior
/// columns, in `L²`, against `M″ (1 + ‖u‖_{L²})`.
pub fn sample_x1_regularity<R: Rng>(
    spec: &OperatorSpec,
    grid: &TensorGrid,
    samples: usize,
    rng: &mut R,
) -> Result<SampledCheck> {
    let c = operator_constants(spec, grid)?;
    let mut check = SampledCheck::new();
    for _ in 0..samples {
        let u = random_field(grid, rng, -2.0, 2.0);
        let lhs = x1_difference_quotient_norm(&apply_operator(spec, &u)?);
        let rhs = c.m_dx1 * (1.0 + full_norm(&u, NormKind::L2));
        check.record(lhs, rhs, 1e-12);
    }
    Ok(check)
}

/// `(Σ_{i<n1} Σ_j ((f_{i+1,j} − f_{i,j}) / h₁)² h₁ h₂)^{1/2}` over interior nodes.
pub fn x1_difference_quotient_norm(f: &GridField) -> f64 {
    let g = f.grid();
    let mut acc = 0.0;
    for j in 1..=g.n2() {
        for i in 1..g.n1() {
            let d = (f.at(i + 1, j) - f.at(i, j)) / g.h1();
            acc += d * d * g.h1() * g.h2();
        }
    }
    acc.sqrt()
}

/// C¹ cubic cut-off in `X₁`: zero outside `(center ± outer)`, one on
/// `(center ± inner)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct X1Cutoff {
    pub center: f64,
    pub inner: f64,
    pub outer: f64,
}

impl X1Cutoff {
    pub fn eval(&self, x1: f64) -> f64 {
        let d = (x1 - self.center).abs();
        if d <= self.inner {
            1.0
        } else if d >= self.outer {
            0.0
        } else {
            let t = (self.outer - d) / (self.outer - self.inner);
            t * t * (3.0 - 2.0 * t)
        }
    }

    pub fn random<R: Rng>(grid: &TensorGrid, rng: &mut R) -> Self {
        let w = grid.omega1();
        let len = w.length();
        let outer = rng.gen_range(0.1..0.45) * len;
        let inner = rng.gen_range(0.0..0.9) * outer;
        let center = rng.gen_range(w.lo + outer..w.hi - outer);
        Self { center, inner, outer }
    }
}

/// `‖ρB(u) − ρB(v)‖ ≤ ‖B(ρu) − B(ρv)‖` for random cut-offs `ρ(X₁)`.
pub fn sample_commutation<R: Rng>(
    spec: &OperatorSpec,
    grid: &TensorGrid,
    samples: usize,
    rng: &mut R,
) -> Result<SampledCheck> {
    let mut check = SampledCheck::new();
    for _ in 0..samples {
        let rho = X1Cutoff::random(grid, rng);
        let u = random_field(grid, rng, -2.0, 1.0);
        let v = random_field(grid, rng, -2.0, 1.0);
        let cut = |f: &GridField| f.multiply_by(|x1, _| rho.eval(x1));
        let lhs = full_norm(
            &cut(&apply_operator(spec, &u)?).sub(&cut(&apply_operator(spec, &v)?))?,
            NormKind::L2,
        );
        let rhs = full_norm(
            &apply_operator(spec, &cut(&u))?.sub(&apply_operator(spec, &cut(&v))?)?,
            NormKind::L2,
        );
        check.record(lhs, rhs, 1e-12);
    }
    Ok(check)
}
