//! The linearized operator at the limiting profiles (rescaled coordinates),
//! its σ-eigenbasis diagonalization and translation-kernel diagnostics.

use serde::Serialize;
use thiserror::Error;

use crate::grid::{laplacian, Field2, Point, TensorGrid};
use crate::linalg::{self, gmres, LinearOp};
use crate::profiles::{CouplingParams, ProfilePair};
use crate::spectral::HelmholtzInverse;

#[derive(Debug, Error)]
pub enum LinearizedError {
    #[error("field grid does not match operator grid")]
    GridMismatch,
    #[error("eigen-solver did not converge: {0}")]
    EigenNonConvergence(String),
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
}

/// Coupled linearization at (w*, w⋆): acts on pairs as
///   L₁(u,v) = -Δu + u - (3μ₁(w*)² + β(w⋆)²)u - 2βw*w⋆ v
/// with the symmetric counterpart in the second slot.
pub struct LinearizedOperator {
    pub grid: TensorGrid,
    pub cp: CouplingParams,
    pub center: Point,
    c11: Vec<f64>,
    c12: Vec<f64>,
    c22: Vec<f64>,
}

impl LinearizedOperator {
    pub fn new(profiles: &ProfilePair, grid: TensorGrid, center: Point) -> Self {
        let cp = profiles.cp;
        let it = profiles.gs.interpolant();
        let total = grid.total();
        let mut c11 = vec![0.0; total];
        let mut c12 = vec![0.0; total];
        let mut c22 = vec![0.0; total];
        let s1 = cp.sigma1;
        let s2 = cp.sigma2;
        for idx in 0..total {
            let p = grid.point(grid.coords(idx));
            let r = dist(&p, &center, grid.dim);
            let w = it.eval(r);
            let ws = s1 * w;
            let wt = s2 * w;
            c11[idx] = 3.0 * cp.mu1 * ws * ws + cp.beta * wt * wt;
            c12[idx] = 2.0 * cp.beta * ws * wt;
            c22[idx] = 3.0 * cp.mu2 * wt * wt + cp.beta * ws * ws;
        }
        LinearizedOperator {
            grid,
            cp,
            center,
            c11,
            c12,
            c22,
        }
    }

    pub fn apply_pair(&self, pair: &Field2) -> Result<Field2, LinearizedError> {
        if pair.grid != self.grid {
            return Err(LinearizedError::GridMismatch);
        }
        let mut out = Field2::zeros(self.grid.clone());
        let mut lap = vec![0.0; self.grid.total()];
        laplacian(&self.grid, &pair.u, &mut lap);
        for i in 0..lap.len() {
            out.u[i] = -lap[i] + pair.u[i] - self.c11[i] * pair.u[i] - self.c12[i] * pair.v[i];
        }
        laplacian(&self.grid, &pair.v, &mut lap);
        for i in 0..lap.len() {
            out.v[i] = -lap[i] + pair.v[i] - self.c22[i] * pair.v[i] - self.c12[i] * pair.u[i];
        }
        Ok(out)
    }

    /// Translation modes (∂w*/∂x_j, ∂w⋆/∂x_j) sampled on the grid,
    /// j = 0..dim-1, as concatenated vectors, zero on the boundary sheet.
    pub fn translation_modes(&self, profiles: &ProfilePair) -> Vec<Vec<f64>> {
        let it = profiles.gs.derivative_interpolant();
        let total = self.grid.total();
        let mut modes = Vec::new();
        for j in 0..self.grid.dim {
            let mut m = vec![0.0; 2 * total];
            for idx in 0..total {
                let c = self.grid.coords(idx);
                if crate::grid::on_boundary(&self.grid, &c) {
                    continue;
                }
                let p = self.grid.point(c);
                let r = dist(&p, &self.center, self.grid.dim);
                if r > 1e-12 {
                    let dwdr = it.eval(r);
                    let dir = (p[j] - self.center[j]) / r;
                    m[idx] = self.cp.sigma1 * dwdr * dir;
                    m[total + idx] = self.cp.sigma2 * dwdr * dir;
                }
            }
            modes.push(m);
        }
        modes
    }
}

fn dist(a: &Point, b: &Point, dim: usize) -> f64 {
    (0..dim).map(|d| (a[d] - b[d]).powi(2)).sum::<f64>().sqrt()
}

impl LinearOp for LinearizedOperator {
    fn dim(&self) -> usize {
        2 * self.grid.total()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let total = self.grid.total();
        let mut lap = vec![0.0; total];
        laplacian(&self.grid, &x[..total], &mut lap);
        for i in 0..total {
            y[i] = -lap[i] + x[i] - self.c11[i] * x[i] - self.c12[i] * x[total + i];
        }
        laplacian(&self.grid, &x[total..], &mut lap);
        for i in 0..total {
            y[total + i] = -lap[i] + x[total + i] - self.c22[i] * x[total + i] - self.c12[i] * x[i];
        }
    }
}

/// Orthonormal eigenbasis of the 2x2 cubic-coefficient matrix
/// [[3μ₁σ₁²+βσ₂², 2βσ₁σ₂], [2βσ₁σ₂, 3μ₂σ₂²+βσ₁²]].
/// The (σ₁,σ₂) direction always has eigenvalue 3.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SigmaEigenBasis {
    pub e_par: [f64; 2],
    pub e_perp: [f64; 2],
    pub lambda_par: f64,
    pub lambda_perp: f64,
}

impl SigmaEigenBasis {
    pub fn matrix(cp: &CouplingParams) -> [[f64; 2]; 2] {
        let s1 = cp.sigma1;
        let s2 = cp.sigma2;
        [
            [
                3.0 * cp.mu1 * s1 * s1 + cp.beta * s2 * s2,
                2.0 * cp.beta * s1 * s2,
            ],
            [
                2.0 * cp.beta * s1 * s2,
                3.0 * cp.mu2 * s2 * s2 + cp.beta * s1 * s1,
            ],
        ]
    }

    pub fn reconstruct(&self) -> [[f64; 2]; 2] {
        let mut m = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                m[a][b] = self.lambda_par * self.e_par[a] * self.e_par[b]
                    + self.lambda_perp * self.e_perp[a] * self.e_perp[b];
            }
        }
        m
    }

    /// Couplings whose perpendicular eigenvalue is close to zero are flagged
    /// and excluded from quantitative sweeps.
    pub fn near_degenerate(&self) -> bool {
        self.lambda_perp.abs() < 0.05
    }
}

pub fn sigma_eigen_decomposition(cp: &CouplingParams) -> SigmaEigenBasis {
    let s = cp.sigma_sq_sum().sqrt();
    SigmaEigenBasis {
        e_par: [cp.sigma1 / s, cp.sigma2 / s],
        e_perp: [cp.sigma2 / s, -cp.sigma1 / s],
        lambda_par: 3.0,
        lambda_perp: 3.0 - 2.0 * cp.beta * cp.sigma_sq_sum(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumMode {
    pub index: usize,
    pub singular_value: f64,
    pub kernel_angle_deg: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub modes: Vec<SpectrumMode>,
    /// Self-calibrated discretization scale: twice the worst Rayleigh
    /// quotient of the analytic translation modes.
    pub grid_error_scale: f64,
    pub lambda_perp: f64,
    pub near_degenerate: bool,
}

impl SpectrumReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.modes).expect("serializable")
    }
}

struct ShiftedOp<'a> {
    op: &'a LinearizedOperator,
}

impl LinearOp for ShiftedOp<'_> {
    fn dim(&self) -> usize {
        self.op.dim()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.op.apply(x, y);
    }
}

/// Smallest singular values of the discretized operator by inverse subspace
/// iteration, with angles between the near-null vectors and the span of the
/// translation modes.
pub fn kernel_diagnostics(
    op: &LinearizedOperator,
    profiles: &ProfilePair,
    n_modes: usize,
) -> Result<SpectrumReport, LinearizedError> {
    let basis = sigma_eigen_decomposition(&op.cp);
    let t_modes = op.translation_modes(profiles);
    // Grid-error scale from the translation modes themselves.
    let mut scale = 0.0f64;
    let n = op.dim();
    let mut buf = vec![0.0; n];
    for t in &t_modes {
        op.apply(t, &mut buf);
        scale = scale.max(linalg::norm2(&buf) / linalg::norm2(t));
    }
    let report_scale = 2.0 * scale;
    if n_modes == 0 {
        return Ok(SpectrumReport {
            modes: Vec::new(),
            grid_error_scale: report_scale,
            lambda_perp: basis.lambda_perp,
            near_degenerate: basis.near_degenerate(),
        });
    }

    // Orthonormalize the translation span for angle computations.
    let t_basis = orthonormalize(&t_modes);

    let hinv = HelmholtzInverse::new(&op.grid, 1.0);
    let m = (n_modes + 2).min(n);
    // Deterministic pseudo-random start block.
    let mut x: Vec<Vec<f64>> = (0..m)
        .map(|k| {
            let mut state = 0x853c49e6748fea9bu64 ^ (k as u64).wrapping_mul(0x9e3779b9);
            (0..n)
                .map(|_| {
                    state ^= state << 13;
                    state ^= state >> 7;
                    state ^= state << 17;
                    (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
                })
                .collect()
        })
        .collect();
    zero_boundary_block(op, &mut x);
    x = orthonormalize(&x);
    let shifted = ShiftedOp { op };
    let mut prev: Vec<f64> = Vec::new();
    let mut ritz_values: Vec<f64> = Vec::new();
    let mut ritz_vectors: Vec<Vec<f64>> = Vec::new();
    for sweep in 0..40 {
        // X <- A^{-1} X, one GMRES solve per column.
        let mut next = Vec::with_capacity(m);
        for col in &x {
            let sol = gmres(&shifted, Some(&hinv), col, 1e-10, 400).map_err(|e| {
                LinearizedError::EigenNonConvergence(format!("inverse iteration: {e}"))
            })?;
            next.push(sol.x);
        }
        x = orthonormalize(&next);
        // Rayleigh-Ritz on the current block.
        let mut ax: Vec<Vec<f64>> = Vec::with_capacity(m);
        for col in &x {
            let mut y = vec![0.0; n];
            op.apply(col, &mut y);
            ax.push(y);
        }
        let mut proj = vec![vec![0.0; m]; m];
        for i in 0..m {
            for j in 0..m {
                proj[i][j] = linalg::dot(&x[i], &ax[j]);
            }
        }
        // Symmetrize against roundoff.
        for i in 0..m {
            for j in (i + 1)..m {
                let avg = 0.5 * (proj[i][j] + proj[j][i]);
                proj[i][j] = avg;
                proj[j][i] = avg;
            }
        }
        let (evals, evecs) = linalg::jacobi_eigh(&proj);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| evals[a].abs().partial_cmp(&evals[b].abs()).unwrap());
        ritz_values = order.iter().map(|&i| evals[i]).collect();
        ritz_vectors = order
            .iter()
            .map(|&k| {
                let mut v = vec![0.0; n];
                for (i, xi) in x.iter().enumerate() {
                    linalg::axpy(evecs[i][k], xi, &mut v);
                }
                v
            })
            .collect();
        let current: Vec<f64> = ritz_values.iter().take(n_modes).map(|v| v.abs()).collect();
        if !prev.is_empty() && sweep > 2 {
            let drift = current
                .iter()
                .zip(&prev)
                .map(|(a, b)| (a - b).abs() / (b.abs() + report_scale * 1e-3))
                .fold(0.0f64, f64::max);
            if drift < 1e-4 {
                break;
            }
        }
        prev = current;
    }
    let modes = ritz_values
        .iter()
        .zip(&ritz_vectors)
        .take(n_modes)
        .enumerate()
        .map(|(index, (val, vec))| {
            let vnorm = linalg::norm2(vec);
            let mut proj_norm2 = 0.0;
            for t in &t_basis {
                let c = linalg::dot(vec, t);
                proj_norm2 += c * c;
            }
            let cosine = (proj_norm2.sqrt() / vnorm).min(1.0);
            SpectrumMode {
                index,
                singular_value: val.abs(),
                kernel_angle_deg: cosine.acos().to_degrees(),
            }
        })
        .collect();
    Ok(SpectrumReport {
        modes,
        grid_error_scale: report_scale,
        lambda_perp: basis.lambda_perp,
        near_degenerate: basis.near_degenerate(),
    })
}

fn orthonormalize(cols: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(cols.len());
    for c in cols {
        let mut v = c.clone();
        for _ in 0..2 {
            for o in &out {
                let d = linalg::dot(&v, o);
                linalg::axpy(-d, o, &mut v);
            }
        }
        let nrm = linalg::norm2(&v);
        if nrm > 1e-300 {
            for x in v.iter_mut() {
                *x /= nrm;
            }
            out.push(v);
        }
    }
    out
}

fn zero_boundary_block(op: &LinearizedOperator, block: &mut [Vec<f64>]) {
    let total = op.grid.total();
    for col in block.iter_mut() {
        for idx in 0..total {
            let c = op.grid.coords(idx);
            if crate::grid::on_boundary(&op.grid, &c) {
                col[idx] = 0.0;
                col[total + idx] = 0.0;
            }
        }
    }
}
