//! Q1 finite-element assembly on tensor grids.
//!
//! Dirichlet nodes are eliminated, so every system acts on the interior
//! unknowns only and is symmetric positive definite. Each interior node
//! couples with at most nine neighbours.

use crate::coefficients::{check_ellipticity, CoefficientBlocks, ScaledBlocks};
use crate::grid::{GridField, TensorGrid};
use crate::quadrature::{GaussRule, GAUSS2};
use crate::{Error, Result};

/// Compressed sparse row matrix with sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Build from per-row `(column, value)` lists (columns sorted, unique).
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for row in rows {
            for (c, v) in row {
                col_idx.push(c);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn from_dense(a: &[Vec<f64>]) -> Self {
        Self::from_rows(
            a.iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .filter(|(_, v)| **v != 0.0)
                        .map(|(c, v)| (c, *v))
                        .collect()
                })
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[span.clone()].binary_search(&c) {
            Ok(k) => self.values[span.start + k],
            Err(_) => 0.0,
        }
    }

    /// `y = A x`.
    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        for (r, out) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            *out = s;
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|r| self.get(r, r)).collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut a = vec![vec![0.0; self.n]; self.n];
        for (r, row) in a.iter_mut().enumerate() {
            for (c, v) in self.row(r) {
                row[c] = v;
            }
        }
        a
    }

    /// `max |a_rc − a_cr| / max |a_rc|`.
    pub fn relative_asymmetry(&self) -> f64 {
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                worst = worst.max((v - self.get(c, r)).abs());
            }
        }
        worst / scale
    }

    /// `α A + β B` for matrices with identical sparsity.
    pub fn combine(&self, alpha: f64, other: &CsrMatrix, beta: f64) -> Result<CsrMatrix> {
        if self.row_ptr != other.row_ptr || self.col_idx != other.col_idx {
            return Err(Error::Usage("matrices have different sparsity patterns".into()));
        }
        Ok(CsrMatrix {
            n: self.n,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| alpha * a + beta * b)
                .collect(),
        })
    }
}

/// Symmetric positive definite system over interior unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub matrix: CsrMatrix,
}

impl LinearSystem {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn is_symmetric(&self) -> bool {
        self.matrix.relative_asymmetry() <= 1e-13
    }

    /// `(sub, diag, super)` bands when the matrix is tridiagonal.
    pub fn tridiagonal_bands(&self) -> Option<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let n = self.dim();
        let mut lower = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut upper = vec![0.0; n];
        for r in 0..n {
            for (c, v) in self.matrix.row(r) {
                match c as isize - r as isize {
                    -1 => lower[r] = v,
                    0 => diag[r] = v,
                    1 => upper[r] = v,
                    _ => return None,
                }
            }
        }
        Some((lower, diag, upper))
    }
}

/// Local Q1 basis on the reference cell `[0,1]²`, nodes ordered
/// `(0,0), (1,0), (0,1), (1,1)`.
#[inline]
fn q1_basis(s: f64, t: f64) -> ([f64; 4], [f64; 4], [f64; 4]) {
    (
        [(1.0 - s) * (1.0 - t), s * (1.0 - t), (1.0 - s) * t, s * t],
        [-(1.0 - t), 1.0 - t, -t, t],
        [-(1.0 - s), -s, 1.0 - s, s],
    )
}

const LOCAL_OFFSETS: [(usize, usize); 4] = [(0, 0), (1, 0), (0, 1), (1, 1)];

/// `stiffness_factor · ∫ A_ε∇u·∇v + mass_factor · ∫ uv` over all elements,
/// with the given per-direction Gauss rule. `coeff = None` means `A = I`.
fn assemble_q1(
    grid: &TensorGrid,
    coeff: Option<&ScaledBlocks>,
    stiffness_factor: f64,
    mass_factor: f64,
    rule: GaussRule,
) -> CsrMatrix {
    let (n1, n2) = (grid.n1(), grid.n2());
    // nine-point stencil per interior row, slot (dj+1)*3 + (di+1)
    let mut stencil = vec![[0.0f64; 9]; grid.len()];
    let mut local;

    let const_coeff = coeff.filter(|c| c.blocks.is_constant()).map(|c| c.matrix_at(0.5, 0.5));
    let mut reuse: Option<[[f64; 4]; 4]> = None;

    for je in 0..=n2 {
        for ie in 0..=n1 {
            if coeff.is_none() || const_coeff.is_some() {
                if let Some(m) = reuse {
                    local = m;
                } else {
                    local = element_matrix(grid, coeff, ie, je, stiffness_factor, mass_factor, rule);
                    reuse = Some(local);
                }
            } else {
                local = element_matrix(grid, coeff, ie, je, stiffness_factor, mass_factor, rule);
            }
            for (a, &(da_i, da_j)) in LOCAL_OFFSETS.iter().enumerate() {
                let (ia, ja) = (ie + da_i, je + da_j);
                let Some(row) = grid.interior_index(ia, ja) else { continue };
                for (b, &(db_i, db_j)) in LOCAL_OFFSETS.iter().enumerate() {
                    let (ib, jb) = (ie + db_i, je + db_j);
                    if grid.interior_index(ib, jb).is_none() {
                        continue;
                    }
                    let slot = (jb + 1 - ja) * 3 + (ib + 1 - ia);
                    stencil[row][slot] += local[a][b];
                }
            }
        }
    }
    let rows = stencil
        .iter()
        .enumerate()
        .map(|(row, st)| {
            let (i, j) = grid.node(row);
            let mut entries = Vec::with_capacity(9);
            for dj in 0..3usize {
                for di in 0..3usize {
                    let (ni, nj) = (i + di, j + dj);
                    if ni < 1 || nj < 1 {
                        continue;
                    }
                    if let Some(col) = grid.interior_index(ni - 1, nj - 1) {
                        entries.push((col, st[dj * 3 + di]));
                    }
                }
            }
            entries
        })
        .collect();
    CsrMatrix::from_rows(rows)
}

fn element_matrix(
    grid: &TensorGrid,
    coeff: Option<&ScaledBlocks>,
    ie: usize,
    je: usize,
    stiffness_factor: f64,
    mass_factor: f64,
    rule: GaussRule,
) -> [[f64; 4]; 4] {
    let (h1, h2) = (grid.h1(), grid.h2());
    let mut local = [[0.0f64; 4]; 4];
    for (s, ws) in rule.mapped(0.0, 1.0) {
        for (t, wt) in rule.mapped(0.0, 1.0) {
            let w = ws * wt * h1 * h2;
            let (n, ds, dt) = q1_basis(s, t);
            let a = match coeff {
                Some(c) => {
                    let x1 = grid.x1(ie) + s * h1;
                    let x2 = grid.x2(je) + t * h2;
                    let (xh1, xh2) = grid.normalized(x1, x2);
                    c.matrix_at(xh1, xh2)
                }
                None => [[1.0, 0.0], [0.0, 1.0]],
            };
            for p in 0..4 {
                let (gp1, gp2) = (ds[p] / h1, dt[p] / h2);
                for q in 0..4 {
                    let (gq1, gq2) = (ds[q] / h1, dt[q] / h2);
                    let k = gp1 * (a[0][0] * gq1 + a[0][1] * gq2) + gp2 * (a[1][0] * gq1 + a[1][1] * gq2);
                    local[p][q] += w * (stiffness_factor * k + mass_factor * n[p] * n[q]);
                }
            }
        }
    }
    local
}

/// Discrete form `∫ A_ε∇u·∇v + β ∫ uv` for an already scaled matrix; `ε = 0`
/// is accepted and gives the degenerate operator of the limit problem.
pub fn assemble_scaled(grid: &TensorGrid, scaled: &ScaledBlocks, beta: f64) -> Result<LinearSystem> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::Parameter(format!("beta = {beta} must be finite and nonnegative")));
    }
    let ell = check_ellipticity(&scaled.blocks, grid)?;
    if !ell.pass {
        return Err(Error::Validation(format!(
            "ellipticity check failed for '{}': measured {} < declared {}",
            scaled.blocks.name, ell.lambda_measured, ell.lambda_declared
        )));
    }
    let rule = scaled.blocks.quadrature();
    Ok(LinearSystem {
        matrix: assemble_q1(grid, Some(scaled), 1.0, beta, rule),
    })
}

/// Q1 system of `∫ A_ε∇u·∇φ + β ∫ uφ` for `ε ∈ (0, 1]`.
pub fn assemble_system(
    grid: &TensorGrid,
    blocks: &CoefficientBlocks,
    epsilon: f64,
    beta: f64,
) -> Result<LinearSystem> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::Parameter(format!("epsilon = {epsilon} must lie in (0, 1]")));
    }
    assemble_scaled(grid, &blocks.scale(epsilon)?, beta)
}

/// Consistent Q1 mass matrix.
pub fn mass_matrix(grid: &TensorGrid) -> LinearSystem {
    LinearSystem {
        matrix: assemble_q1(grid, None, 0.0, 1.0, GAUSS2),
    }
}

/// Q1 stiffness of the Dirichlet Laplacian (`A = I`).
pub fn laplacian_matrix(grid: &TensorGrid) -> LinearSystem {
    LinearSystem {
        matrix: assemble_q1(grid, None, 1.0, 0.0, GAUSS2),
    }
}

/// 1D linear-element system `∫ A₂₂ u′v′ + β ∫ uv` on the `ω₂` line through
/// node column `i`.
pub fn assemble_limit_slice(
    grid: &TensorGrid,
    blocks: &CoefficientBlocks,
    beta: f64,
    i: usize,
) -> Result<LinearSystem> {
    if i < 1 || i > grid.n1() {
        return Err(Error::Usage(format!(
            "slice index {i} out of range 1..={}",
            grid.n1()
        )));
    }
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::Parameter(format!("beta = {beta} must be finite and nonnegative")));
    }
    let n2 = grid.n2();
    let h2 = grid.h2();
    let x1 = grid.x1(i);
    let rule = blocks.quadrature();
    let mut diag = vec![0.0; n2];
    let mut off = vec![0.0; n2 + 1]; // off[je] couples nodes je and je+1
    for je in 0..=n2 {
        let mut k = 0.0;
        for (x2, w) in rule.mapped(grid.x2(je), grid.x2(je + 1)) {
            let (xh1, xh2) = grid.normalized(x1, x2);
            k += w * blocks.a22.eval(xh1, xh2);
        }
        k /= h2 * h2;
        let (m_d, m_o) = (beta * h2 / 3.0, beta * h2 / 6.0);
        // element nodes je, je+1 → unknown indices je-1, je
        if je >= 1 {
            diag[je - 1] += k + m_d;
        }
        if je < n2 {
            diag[je] += k + m_d;
        }
        off[je] = -k + m_o;
    }
    let rows = (0..n2)
        .map(|r| {
            let mut e = Vec::with_capacity(3);
            if r > 0 {
                e.push((r - 1, off[r]));
            }
            e.push((r, diag[r]));
            if r + 1 < n2 {
                e.push((r + 1, off[r + 1]));
            }
            e
        })
        .collect();
    Ok(LinearSystem {
        matrix: CsrMatrix::from_rows(rows),
    })
}

/// `mass + n⁻¹ · stiffness(A = I)`, the Q1 form of `I − n⁻¹Δ`.
pub fn assemble_resolvent(grid: &TensorGrid, n: u64) -> Result<LinearSystem> {
    if n == 0 {
        return Err(Error::Parameter("resolvent index n must be at least 1".into()));
    }
    Ok(LinearSystem {
        matrix: assemble_q1(grid, None, 1.0 / n as f64, 1.0, GAUSS2),
    })
}

/// Load vector `M f` for the Q1 interpolant of `f`.
pub fn project_rhs(f: &GridField, grid: &TensorGrid) -> Result<Vec<f64>> {
    if f.grid() != grid {
        return Err(Error::Usage("load field lives on a different grid".into()));
    }
    Ok(mass_matrix(grid).matrix.matvec(f.values()))
}

/// 1D consistent mass product on an `ω₂` line: `(M₂ f)_j`.
pub fn slice_mass_product(h2: f64, f: &[f64]) -> Vec<f64> {
    let n = f.len();
    (0..n)
        .map(|j| {
            let left = if j > 0 { f[j - 1] } else { 0.0 };
            let right = if j + 1 < n { f[j + 1] } else { 0.0 };
            h2 * (2.0 * f[j] / 3.0 + (left + right) / 6.0)
        })
        .collect()
}
