//! Interior `H¹` control versus global `X₁`-gradient growth.

use serde::Serialize;

use super::{spread, Cell, Check, ConvergenceReport, CsvTable};

/// Maximum allowed `max / min` of the interior column.
pub const UNIFORMITY_FACTOR: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InteriorRow {
    pub epsilon: f64,
    pub interior_h1: f64,
    pub global_gradx1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InteriorScan {
    pub rows: Vec<InteriorRow>,
    pub interior_ratio: f64,
    pub global_ratio: f64,
    /// Interior column within [`UNIFORMITY_FACTOR`] and the global column
    /// growing at least as much as the interior one.
    pub pass: bool,
    /// Global column varies by more than [`UNIFORMITY_FACTOR`].
    pub global_nonuniform: bool,
}

pub fn interior_scan(report: &ConvergenceReport) -> InteriorScan {
    let rows: Vec<InteriorRow> = report
        .ok_rows()
        .map(|r| InteriorRow {
            epsilon: r.epsilon,
            interior_h1: r.interior_h1,
            global_gradx1: r.gradx1,
        })
        .collect();
    let interior_ratio = spread(&rows.iter().map(|r| r.interior_h1).collect::<Vec<_>>());
    let global_ratio = spread(&rows.iter().map(|r| r.global_gradx1).collect::<Vec<_>>());
    InteriorScan {
        pass: !rows.is_empty() && interior_ratio <= UNIFORMITY_FACTOR && global_ratio >= interior_ratio,
        global_nonuniform: global_ratio > UNIFORMITY_FACTOR,
        rows,
        interior_ratio,
        global_ratio,
    }
}

impl InteriorScan {
    pub fn checks(&self) -> Vec<Check> {
        vec![
            Check::gated("interior_h1_uniform", self.pass, self.interior_ratio, UNIFORMITY_FACTOR),
            Check::info(
                "global_gradx1_nonuniform",
                self.global_nonuniform,
                self.global_ratio,
                UNIFORMITY_FACTOR,
            ),
        ]
    }

    pub fn to_csv(&self, report: &ConvergenceReport) -> CsvTable {
        let mut t = CsvTable::new(
            "interior",
            &["epsilon", "n", "n1", "n2", "beta", "interior_h1", "global_gradx1"],
        );
        for r in &self.rows {
            t.push(vec![
                r.epsilon.into(),
                Cell::Na,
                report.grid.n1().into(),
                report.grid.n2().into(),
                report.beta.into(),
                r.interior_h1.into(),
                r.global_gradx1.into(),
            ]);
        }
        t
    }
}
