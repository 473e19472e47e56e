//! Approximation by the Dirichlet-Laplacian resolvent `Δₙ = (I − n⁻¹Δ)⁻¹`.
//!
//! For `f ∈ H¹₀` the error `‖Δₙ f − f‖_{L²}` is `O(n^{-1/4}) ‖f‖_{H¹}`, so
//! `Qₙ = ‖Δₙ f − f‖ n^{1/4} / ‖f‖_{H¹}` must stay bounded.

use serde::Serialize;

use super::{Cell, Check, CsvTable};
use crate::grid::{full_norm, GridField, NormKind, TensorGrid};
use crate::solver::resolvent_apply;
use crate::{Error, Result};
use std::f64::consts::PI;

/// `max Qₙ ≤ ENVELOPE · Q_{n₀}`.
pub const ENVELOPE: f64 = 1.05;
/// Minimum decay exponent of the error for the smooth eigenfunction.
pub const EIGEN_DECAY: f64 = 0.95;

pub fn default_ns() -> Vec<u64> {
    (2..=10).map(|k| 1u64 << k).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ResolventSource {
    Zero,
    /// `sin(πx̂₁) sin(πx̂₂)`, the first Dirichlet eigenfunction.
    Eigen,
    /// `1 − max(|2x̂₁ − 1|, |2x̂₂ − 1|)`, with gradient kinks.
    Pyramid,
}

impl ResolventSource {
    pub fn parse(key: &str) -> Result<Self> {
        match key {
            "zero" => Ok(Self::Zero),
            "eigen" => Ok(Self::Eigen),
            "pyramid" => Ok(Self::Pyramid),
            other => Err(Error::Config(format!(
                "unknown resolvent source '{other}' (expected eigen, pyramid or zero)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Zero => "zero",
            Self::Eigen => "eigen",
            Self::Pyramid => "pyramid",
        }
    }

    pub fn field(&self, grid: &TensorGrid) -> GridField {
        let g = *grid;
        match self {
            Self::Zero => GridField::zeros(grid),
            Self::Eigen => GridField::from_fn(grid, move |x1, x2| {
                let (a, b) = g.normalized(x1, x2);
                (PI * a).sin() * (PI * b).sin()
            }),
            Self::Pyramid => GridField::from_fn(grid, move |x1, x2| {
                let (a, b) = g.normalized(x1, x2);
                1.0 - (2.0 * a - 1.0).abs().max((2.0 * b - 1.0).abs())
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolventRow {
    pub n: u64,
    pub error: f64,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolventStudy {
    pub source: ResolventSource,
    pub grid: TensorGrid,
    pub rows: Vec<ResolventRow>,
    pub q_first: f64,
    pub q_max: f64,
    pub envelope_ok: bool,
    /// `−log(e_last / e_prev) / log(n_last / n_prev)` over the two largest `n`.
    pub decay_exponent: f64,
}

pub fn resolvent_study(grid: &TensorGrid, source: ResolventSource, ns: &[u64]) -> Result<ResolventStudy> {
    if ns.len() < 2 || ns[0] == 0 || ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Parameter(
            "resolvent n list needs at least two positive, strictly increasing values".into(),
        ));
    }
    let f = source.field(grid);
    let h1 = full_norm(&f, NormKind::H1);
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let u = resolvent_apply(grid, n, &f)?;
        let error = full_norm(&u.sub(&f)?, NormKind::L2);
        let q = if h1 > 0.0 { error * (n as f64).powf(0.25) / h1 } else { 0.0 };
        rows.push(ResolventRow { n, error, q });
    }
    let q_first = rows[0].q;
    let q_max = rows.iter().map(|r| r.q).fold(0.0, f64::max);
    let (a, b) = (rows[rows.len() - 2], rows[rows.len() - 1]);
    let decay_exponent = if a.error > 0.0 && b.error > 0.0 {
        -(b.error / a.error).ln() / (b.n as f64 / a.n as f64).ln()
    } else {
        f64::NAN
    };
    Ok(ResolventStudy {
        source,
        grid: *grid,
        envelope_ok: q_max <= ENVELOPE * q_first,
        q_first,
        q_max,
        rows,
        decay_exponent,
    })
}

impl ResolventStudy {
    pub fn pass(&self) -> bool {
        self.checks().iter().filter(|c| c.gated).all(|c| c.pass)
    }

    pub fn checks(&self) -> Vec<Check> {
        let name = self.source.name();
        let ratio = if self.q_first > 0.0 { self.q_max / self.q_first } else { 0.0 };
        let mut v = vec![Check::gated(&format!("{name}_envelope"), self.envelope_ok, ratio, ENVELOPE)];
        let decay = Check::gated(
            &format!("{name}_decay_exponent"),
            self.decay_exponent >= EIGEN_DECAY,
            self.decay_exponent,
            EIGEN_DECAY,
        );
        if self.source == ResolventSource::Eigen {
            v.push(decay);
        } else {
            v.push(Check {
                gated: false,
                pass: true,
                ..decay
            });
        }
        v
    }

    pub fn append_csv(&self, t: &mut CsvTable) {
        for r in &self.rows {
            t.push(vec![
                Cell::Na,
                r.n.into(),
                self.grid.n1().into(),
                self.grid.n2().into(),
                Cell::Na,
                self.source.name().into(),
                r.error.into(),
                r.q.into(),
            ]);
        }
    }

    pub fn csv_table() -> CsvTable {
        CsvTable::new("resolvent", &["epsilon", "n", "n1", "n2", "beta", "source", "error", "q"])
    }
}
