//! The coefficient matrix `A(x)` for `p = 1, N = 2`, its ε-scaling and the
//! ellipticity check.
//!
//! Coefficient functions are written in normalized coordinates
//! `(x̂₁, x̂₂) ∈ [0, 1]²` so that catalog entries keep their bounds on any
//! rectangle.

use std::f64::consts::PI;

use serde::Serialize;

use crate::grid::TensorGrid;
use crate::quadrature::{GaussRule, GAUSS10, GAUSS2};
use crate::{Error, Result};

/// A scalar coefficient `a(x̂₁, x̂₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum CoefficientFn {
    Constant(f64),
    /// `base + amplitude · sin(π x̂₁) sin(π x̂₂)`.
    SinSin { base: f64, amplitude: f64 },
}

impl CoefficientFn {
    #[inline]
    pub fn eval(&self, xh1: f64, xh2: f64) -> f64 {
        match *self {
            CoefficientFn::Constant(c) => c,
            CoefficientFn::SinSin { base, amplitude } => {
                base + amplitude * (PI * xh1).sin() * (PI * xh2).sin()
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, CoefficientFn::Constant(_))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, CoefficientFn::Constant(c) if *c == 0.0)
    }
}

/// The blocks of `A`. With `p = 1` every block is scalar.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientBlocks {
    pub name: String,
    pub a11: CoefficientFn,
    pub a12: CoefficientFn,
    pub a21: CoefficientFn,
    pub a22: CoefficientFn,
    /// Declared ellipticity constant.
    pub lambda: f64,
    /// Bounds on `∂₁a₂₂`, `∂₁a₁₁`, `∂₂a₁₂` in physical units on the unit
    /// square (catalog metadata, not checked at runtime).
    pub derivative_bounds: [f64; 3],
}

impl CoefficientBlocks {
    /// `A = I`, `λ = 1`.
    pub fn identity() -> Self {
        Self::constant("identity", [[1.0, 0.0], [0.0, 1.0]], 1.0)
    }

    /// Constant matrix; `a21` is kept separately so asymmetric input can be
    /// rejected by [`check_ellipticity`].
    pub fn constant(name: &str, m: [[f64; 2]; 2], lambda: f64) -> Self {
        Self {
            name: name.to_string(),
            a11: CoefficientFn::Constant(m[0][0]),
            a12: CoefficientFn::Constant(m[0][1]),
            a21: CoefficientFn::Constant(m[1][0]),
            a22: CoefficientFn::Constant(m[1][1]),
            lambda,
            derivative_bounds: [0.0; 3],
        }
    }

    /// Built-in catalog: `identity`, `spd`, `variable`.
    pub fn catalog(key: &str) -> Result<Self> {
        match key {
            "identity" => Ok(Self::identity()),
            // eigenvalues (3 ± √2)/2, the smaller one ≈ 0.7929
            "spd" => Ok(Self::constant("spd", [[2.0, 0.5], [0.5, 1.0]], 0.75)),
            "variable" => Ok(Self {
                name: "variable".into(),
                a11: CoefficientFn::Constant(1.0),
                a12: CoefficientFn::Constant(0.0),
                a21: CoefficientFn::Constant(0.0),
                a22: CoefficientFn::SinSin {
                    base: 1.0,
                    amplitude: 0.5,
                },
                lambda: 1.0,
                derivative_bounds: [0.5 * PI, 0.0, 0.0],
            }),
            other => Err(Error::Config(format!(
                "unknown coefficient catalog entry '{other}' (expected identity, spd or variable)"
            ))),
        }
    }

    /// `[[a11, a12], [a21, a22]]` at normalized coordinates.
    #[inline]
    pub fn matrix_at(&self, xh1: f64, xh2: f64) -> [[f64; 2]; 2] {
        [
            [self.a11.eval(xh1, xh2), self.a12.eval(xh1, xh2)],
            [self.a21.eval(xh1, xh2), self.a22.eval(xh1, xh2)],
        ]
    }

    pub fn is_constant(&self) -> bool {
        [self.a11, self.a12, self.a21, self.a22]
            .iter()
            .all(CoefficientFn::is_constant)
    }

    pub fn has_cross_terms(&self) -> bool {
        !(self.a12.is_zero() && self.a21.is_zero())
    }

    /// Per-direction Gauss rule used for element integrals: two points are
    /// exact for constant coefficients, variable ones get ten.
    pub fn quadrature(&self) -> GaussRule {
        if self.is_constant() {
            GAUSS2
        } else {
            GAUSS10
        }
    }

    pub fn scale(&self, epsilon: f64) -> Result<ScaledBlocks> {
        scale_matrix(self, epsilon)
    }
}

/// `A_ε = [[ε² A₁₁, ε A₁₂], [ε A₂₁, A₂₂]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledBlocks {
    pub blocks: CoefficientBlocks,
    pub epsilon: f64,
}

impl ScaledBlocks {
    #[inline]
    pub fn matrix_at(&self, xh1: f64, xh2: f64) -> [[f64; 2]; 2] {
        let m = self.blocks.matrix_at(xh1, xh2);
        let e = self.epsilon;
        [[e * e * m[0][0], e * m[0][1]], [e * m[1][0], m[1][1]]]
    }

    /// Scaling an already scaled matrix by `ε′` equals scaling the raw blocks
    /// by `ε·ε′`.
    pub fn rescale(&self, epsilon: f64) -> Result<ScaledBlocks> {
        check_epsilon(epsilon)?;
        Ok(ScaledBlocks {
            blocks: self.blocks.clone(),
            epsilon: self.epsilon * epsilon,
        })
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::Parameter(format!("epsilon = {epsilon} must lie in [0, 1]")));
    }
    Ok(())
}

/// `ε = 0` is accepted; it yields the degenerate operator of the limit problem.
pub fn scale_matrix(blocks: &CoefficientBlocks, epsilon: f64) -> Result<ScaledBlocks> {
    check_epsilon(epsilon)?;
    Ok(ScaledBlocks {
        blocks: blocks.clone(),
        epsilon,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EllipticityReport {
    pub lambda_measured: f64,
    pub lambda_declared: f64,
    pub pass: bool,
}

#[inline]
pub(crate) fn min_eigenvalue(m: [[f64; 2]; 2]) -> f64 {
    if m[0][1] == 0.0 && m[1][0] == 0.0 {
        return m[0][0].min(m[1][1]);
    }
    let mean = 0.5 * (m[0][0] + m[1][1]);
    let half_diff = 0.5 * (m[0][0] - m[1][1]);
    let root = (half_diff * half_diff + m[0][1] * m[1][0]).sqrt();
    let upper = mean + root;
    if upper > 0.0 {
        // det / λ_max avoids cancellation in mean − root
        (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / upper
    } else {
        mean - root
    }
}

/// Smallest eigenvalue of `A` over every quadrature point used in assembly.
pub fn check_ellipticity(blocks: &CoefficientBlocks, grid: &TensorGrid) -> Result<EllipticityReport> {
    let rule = blocks.quadrature();
    let mut lambda_measured = f64::INFINITY;
    for je in 0..=grid.n2() {
        for ie in 0..=grid.n1() {
            for (x2, _) in rule.mapped(grid.x2(je), grid.x2(je + 1)) {
                for (x1, _) in rule.mapped(grid.x1(ie), grid.x1(ie + 1)) {
                    let (xh1, xh2) = grid.normalized(x1, x2);
                    let m = blocks.matrix_at(xh1, xh2);
                    let scale = m[0][1].abs().max(m[1][0].abs()).max(1.0);
                    if (m[0][1] - m[1][0]).abs() > 1e-14 * scale {
                        return Err(Error::Validation(format!(
                            "coefficient matrix '{}' is not symmetric at ({x1}, {x2}): a12 = {}, a21 = {}",
                            blocks.name, m[0][1], m[1][0]
                        )));
                    }
                    if m.iter().flatten().any(|v| !v.is_finite()) {
                        return Err(Error::Validation(format!(
                            "coefficient matrix '{}' is not finite at ({x1}, {x2})",
                            blocks.name
                        )));
                    }
                    lambda_measured = lambda_measured.min(min_eigenvalue(m));
                }
            }
        }
    }
    Ok(EllipticityReport {
        lambda_measured,
        lambda_declared: blocks.lambda,
        pass: blocks.lambda > 0.0 && lambda_measured >= blocks.lambda,
    })
}
