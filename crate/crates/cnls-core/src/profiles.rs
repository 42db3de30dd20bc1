//! Scalar radial ground state of -Δw + w = w³ and the synchronized limiting
//! profiles (σ₁ w, σ₂ w) of the coupled system.

use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

use crate::grid::{unit_sphere_area, RadialGrid, RadialInterpolant};
use crate::linalg::BandedMatrix;

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("shooting bracket failed: {0}")]
    Bracket(String),
    #[error("ground-state Newton did not converge: residual {residual:.3e} after {iters} iterations")]
    NonConvergence { residual: f64, iters: usize },
    #[error("negative values on the grid near r = {0:.3}")]
    NegativeValues(f64),
    #[error("tail fit unstable: relative variation {0:.3e} over the fit window")]
    TailFit(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("linear solve failed: {0}")]
    Linalg(#[from] crate::linalg::LinalgError),
    #[error("parse error: {0}")]
    Parse(String),
}

#[derive(Debug, Error)]
pub enum CouplingError {
    #[error("mu1 and mu2 must be positive, got ({0}, {1})")]
    NonPositiveMu(f64, f64),
    #[error(
        "beta = {beta} is not admissible: needs beta in (-{sqrt_mu:.6}, {min_mu:.6}) u ({max_mu:.6}, inf) and beta != 0"
    )]
    Inadmissible {
        beta: f64,
        sqrt_mu: f64,
        min_mu: f64,
        max_mu: f64,
    },
}

/// Radial samples of the ground state together with its decay constant.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub dim: usize,
    pub grid: RadialGrid,
    pub values: Vec<f64>,
    pub tail_constant: f64,
    /// Interpolant accuracy order for off-node evaluation.
    pub interp_order: usize,
}

impl GroundState {
    pub fn interpolant(&self) -> RadialInterpolant {
        RadialInterpolant::new(self.grid.clone(), self.values.clone())
    }

    /// Odd interpolant of w'(r) built from fourth-order derivative samples;
    /// smoother than differentiating the value interpolant.
    pub fn derivative_interpolant(&self) -> RadialInterpolant {
        RadialInterpolant::new_odd(self.grid.clone(), self.derivative_samples())
    }

    pub fn w0(&self) -> f64 {
        self.values[0]
    }

    /// Discrete residual of -w'' - ((N-1)/r) w' + w - w³ at every interior node.
    pub fn residual(&self) -> Vec<f64> {
        radial_nls_residual(self.dim, &self.grid, &self.values)
    }

    pub fn residual_sup(&self) -> f64 {
        self.residual().iter().fold(0.0f64, |m, &x| m.max(x.abs()))
    }

    /// ∫_{R^dim} w² dx.
    pub fn mass(&self) -> f64 {
        let sq: Vec<f64> = self.values.iter().map(|w| w * w).collect();
        self.grid.integrate_radial(&sq, self.dim)
    }

    /// ∫_{R^dim} |x|² w² dx.
    pub fn second_moment(&self) -> f64 {
        let vals: Vec<f64> = self
            .values
            .iter()
            .zip(self.grid.nodes())
            .map(|(w, r)| r * r * w * w)
            .collect();
        self.grid.integrate_radial(&vals, self.dim)
    }

    /// ∫_{R^dim} w⁴ dx.
    pub fn quartic(&self) -> f64 {
        let vals: Vec<f64> = self.values.iter().map(|w| w.powi(4)).collect();
        self.grid.integrate_radial(&vals, self.dim)
    }

    /// ∫_{R^dim} |∇w|² dx with w' by fourth-order central differences
    /// (even reflection at the origin).
    pub fn dirichlet_energy(&self) -> f64 {
        let vals: Vec<f64> = self.derivative_samples().iter().map(|d| d * d).collect();
        self.grid.integrate_radial(&vals, self.dim)
    }

    /// w'(r) at every node, fourth-order, even reflection through r = 0.
    pub fn derivative_samples(&self) -> Vec<f64> {
        let n = self.grid.n;
        let h = self.grid.h();
        let w = &self.values;
        let sample = |i: i64| -> f64 {
            let j = i.unsigned_abs() as usize;
            if j > n {
                0.0
            } else {
                w[j]
            }
        };
        (0..=n as i64)
            .map(|i| {
                (sample(i - 2) - 8.0 * sample(i - 1) + 8.0 * sample(i + 1) - sample(i + 2))
                    / (12.0 * h)
            })
            .collect()
    }

    /// Two-column text table with a header carrying dim, r_max and the tail
    /// constant. Floats are printed in shortest round-trip form so the table
    /// re-reads bit-exactly.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        writeln!(
            s,
            "# dim={} rmax={} tail={}",
            self.dim, self.grid.r_max, self.tail_constant
        )
        .unwrap();
        for (r, w) in self.grid.nodes().zip(&self.values) {
            writeln!(s, "{r} {w}").unwrap();
        }
        s
    }

    pub fn from_table(text: &str) -> Result<GroundState, ProfileError> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| ProfileError::Parse("empty table".into()))?;
        let header = header
            .strip_prefix('#')
            .ok_or_else(|| ProfileError::Parse("missing header".into()))?;
        let mut dim = None;
        let mut rmax = None;
        let mut tail = None;
        for tok in header.split_whitespace() {
            if let Some(v) = tok.strip_prefix("dim=") {
                dim = Some(
                    v.parse::<usize>()
                        .map_err(|e| ProfileError::Parse(format!("dim: {e}")))?,
                );
            } else if let Some(v) = tok.strip_prefix("rmax=") {
                rmax = Some(
                    v.parse::<f64>()
                        .map_err(|e| ProfileError::Parse(format!("rmax: {e}")))?,
                );
            } else if let Some(v) = tok.strip_prefix("tail=") {
                tail = Some(
                    v.parse::<f64>()
                        .map_err(|e| ProfileError::Parse(format!("tail: {e}")))?,
                );
            }
        }
        let (dim, rmax, tail) = match (dim, rmax, tail) {
            (Some(d), Some(r), Some(t)) => (d, r, t),
            _ => return Err(ProfileError::Parse("header needs dim=, rmax=, tail=".into())),
        };
        let mut values = Vec::new();
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let _r: f64 = it
                .next()
                .ok_or_else(|| ProfileError::Parse("short row".into()))?
                .parse()
                .map_err(|e| ProfileError::Parse(format!("r: {e}")))?;
            let w: f64 = it
                .next()
                .ok_or_else(|| ProfileError::Parse("short row".into()))?
                .parse()
                .map_err(|e| ProfileError::Parse(format!("w: {e}")))?;
            values.push(w);
        }
        if values.len() < 9 {
            return Err(ProfileError::Parse("too few rows".into()));
        }
        Ok(GroundState {
            dim,
            grid: RadialGrid::new(rmax, values.len() - 1),
            values,
            tail_constant: tail,
            interp_order: 4,
        })
    }
}

/// Discrete radial residual with fourth-order interior stencils, even
/// reflection through r = 0 and the asymptotic Robin closure at r_max.
fn radial_nls_residual(dim: usize, grid: &RadialGrid, w: &[f64]) -> Vec<f64> {
    let n = grid.n;
    let h = grid.h();
    let nu = (dim - 1) as f64;
    let mut res = vec![0.0; n + 1];
    let sample = |i: i64| -> f64 { w[i.unsigned_abs() as usize] };
    for i in 0..n {
        let r = grid.node(i);
        if i == 0 {
            // Regularized origin: Δw(0) = dim * w''(0) by radial symmetry.
            let d2 = (-2.0 * sample(2) + 32.0 * sample(1) - 30.0 * w[0]) / (12.0 * h * h);
            res[0] = -(dim as f64) * d2 + w[0] - w[0].powi(3);
        } else if i >= n - 1 {
            let d2 = (w[i - 1] - 2.0 * w[i] + w[i + 1]) / (h * h);
            let d1 = (w[i + 1] - w[i - 1]) / (2.0 * h);
            res[i] = -d2 - nu / r * d1 + w[i] - w[i].powi(3);
        } else {
            let ii = i as i64;
            let d2 = (-sample(ii - 2) + 16.0 * sample(ii - 1) - 30.0 * w[i]
                + 16.0 * sample(ii + 1)
                - sample(ii + 2))
                / (12.0 * h * h);
            let d1 = (sample(ii - 2) - 8.0 * sample(ii - 1) + 8.0 * sample(ii + 1)
                - sample(ii + 2))
                / (12.0 * h);
            res[i] = -d2 - nu / r * d1 + w[i] - w[i].powi(3);
        }
    }
    // Robin closure: w' + w (1 + (N-1)/(2r)) = 0 at r_max.
    let d1 = (3.0 * w[n] - 4.0 * w[n - 1] + w[n - 2]) / (2.0 * h);
    res[n] = d1 + w[n] * (1.0 + nu / (2.0 * grid.r_max));
    res
}

/// Classify a shooting trajectory from w(0) = a: returns +1 for undershoot
/// (w turns back up), -1 for overshoot (w crosses zero).
fn shoot_sign(dim: usize, a: f64, r_end: f64, h: f64) -> f64 {
    let nu = (dim - 1) as f64;
    let f = |r: f64, w: f64, p: f64| -> (f64, f64) {
        // w' = p, p' = -(nu/r) p + w - w^3 (regularized at r = 0).
        let dp = if r < 1e-12 {
            (w - w * w * w) / dim as f64
        } else {
            -nu / r * p + w - w * w * w
        };
        (p, dp)
    };
    let mut r = 0.0;
    let mut w = a;
    let mut p = 0.0;
    while r < r_end {
        let (k1w, k1p) = f(r, w, p);
        let (k2w, k2p) = f(r + 0.5 * h, w + 0.5 * h * k1w, p + 0.5 * h * k1p);
        let (k3w, k3p) = f(r + 0.5 * h, w + 0.5 * h * k2w, p + 0.5 * h * k2p);
        let (k4w, k4p) = f(r + h, w + h * k3w, p + h * k3p);
        w += h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
        p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        r += h;
        if w <= 0.0 {
            return -1.0;
        }
        if p > 0.0 && w < a * 0.5 {
            return 1.0;
        }
    }
    // Still decaying at r_end; treat as undershoot-side (decays slower than needed).
    1.0
}

/// Ground-state solve: bisection shooting for the bracket, then Newton
/// refinement of the collocated radial system on a uniform grid.
pub fn solve_ground_state(
    dim: usize,
    r_max: f64,
    n_nodes: usize,
    tol: f64,
) -> Result<GroundState, ProfileError> {
    if !(1..=3).contains(&dim) {
        return Err(ProfileError::InvalidParameter(format!("dim {dim}")));
    }
    if r_max < 15.0 {
        return Err(ProfileError::InvalidParameter(format!(
            "r_max {r_max} < 15"
        )));
    }
    if n_nodes < 400 {
        return Err(ProfileError::InvalidParameter(format!(
            "n_nodes {n_nodes} < 400"
        )));
    }
    if tol <= 0.0 {
        return Err(ProfileError::InvalidParameter("tol <= 0".into()));
    }

    // Bracket w(0): small amplitudes undershoot, large ones overshoot.
    let h_shoot = 2e-3;
    let mut lo = 1.01;
    let mut hi = 6.0;
    if shoot_sign(dim, lo, r_max, h_shoot) < 0.0 || shoot_sign(dim, hi, r_max, h_shoot) > 0.0 {
        return Err(ProfileError::Bracket(format!(
            "no sign change for w(0) in [{lo}, {hi}]"
        )));
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if shoot_sign(dim, mid, r_max, h_shoot) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    let a = 0.5 * (lo + hi);

    // Initial grid samples by one more shooting pass, clamped to a decaying tail.
    let grid = RadialGrid::new(r_max, n_nodes);
    let h = grid.h();
    let nu = (dim - 1) as f64;
    let mut w = vec![0.0; n_nodes + 1];
    {
        let f = |r: f64, w: f64, p: f64| -> (f64, f64) {
            let dp = if r < 1e-12 {
                (w - w * w * w) / dim as f64
            } else {
                -nu / r * p + w - w * w * w
            };
            (p, dp)
        };
        let mut wv = a;
        let mut p = 0.0;
        let mut broke = false;
        w[0] = a;
        for i in 0..n_nodes {
            let sub = 4;
            let hs = h / sub as f64;
            let mut r = grid.node(i);
            if !broke {
                for _ in 0..sub {
                    let (k1w, k1p) = f(r, wv, p);
                    let (k2w, k2p) = f(r + 0.5 * hs, wv + 0.5 * hs * k1w, p + 0.5 * hs * k1p);
                    let (k3w, k3p) = f(r + 0.5 * hs, wv + 0.5 * hs * k2w, p + 0.5 * hs * k2p);
                    let (k4w, k4p) = f(r + hs, wv + hs * k3w, p + hs * k3p);
                    wv += hs / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
                    p += hs / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
                    r += hs;
                }
                if wv <= 0.0 || (p > 0.0 && wv < 0.5 * a) {
                    broke = true;
                }
            }
            let r_next = grid.node(i + 1);
            w[i + 1] = if broke {
                // Extend by the known e^{-r} r^{-(N-1)/2} decay law.
                w[i] * (-(r_next - grid.node(i))).exp()
                    * (grid.node(i).max(h) / r_next.max(h)).powf(nu / 2.0)
            } else {
                wv
            };
        }
    }

    // Newton refinement of the collocated system, with backtracking.
    let mut iters = 0;
    let sup_norm = |v: &[f64]| v.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    loop {
        let res = radial_nls_residual(dim, &grid, &w);
        let sup = sup_norm(&res);
        if sup < tol {
            break;
        }
        if iters >= 60 {
            return Err(ProfileError::NonConvergence {
                residual: sup,
                iters,
            });
        }
        let jac = radial_nls_jacobian(dim, &grid, &w);
        let lu = jac.factor()?;
        let neg: Vec<f64> = res.iter().map(|x| -x).collect();
        let delta = lu.solve(&neg);
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..10 {
            let trial: Vec<f64> = w.iter().zip(&delta).map(|(wi, di)| wi + alpha * di).collect();
            let tres = radial_nls_residual(dim, &grid, &trial);
            if sup_norm(&tres) < sup {
                w = trial;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            return Err(ProfileError::NonConvergence {
                residual: sup,
                iters,
            });
        }
        iters += 1;
    }

    for (i, &wi) in w.iter().enumerate() {
        if wi <= 0.0 && grid.node(i) < r_max {
            return Err(ProfileError::NegativeValues(grid.node(i)));
        }
    }

    // Tail constant from w e^r r^{(N-1)/2} over the last quarter of the grid.
    let fit_lo = (3 * n_nodes) / 4;
    let comp: Vec<f64> = (fit_lo..=n_nodes)
        .map(|i| {
            let r = grid.node(i);
            w[i] * r.exp() * r.powf(nu / 2.0)
        })
        .collect();
    let mean = comp.iter().sum::<f64>() / comp.len() as f64;
    let max_dev = comp
        .iter()
        .fold(0.0f64, |m, &c| m.max((c - mean).abs() / mean.abs()));
    if max_dev > 0.01 {
        return Err(ProfileError::TailFit(max_dev));
    }

    Ok(GroundState {
        dim,
        grid,
        values: w,
        tail_constant: mean,
        interp_order: 4,
    })
}

fn radial_nls_jacobian(dim: usize, grid: &RadialGrid, w: &[f64]) -> BandedMatrix {
    let n = grid.n;
    let h = grid.h();
    let nu = (dim - 1) as f64;
    let mut m = BandedMatrix::new(n + 1, 2, 2);
    for i in 0..n {
        let r = grid.node(i);
        if i == 0 {
            let s = -(dim as f64) / (12.0 * h * h);
            m.add(0, 0, s * -30.0 + 1.0 - 3.0 * w[0] * w[0]);
            m.add(0, 1, s * 32.0);
            m.add(0, 2, s * -2.0);
        } else if i >= n - 1 {
            let s2 = -1.0 / (h * h);
            let s1 = -nu / r / (2.0 * h);
            m.add(i, i - 1, s2 - s1);
            m.add(i, i, -2.0 * s2 + 1.0 - 3.0 * w[i] * w[i]);
            m.add(i, i + 1, s2 + s1);
        } else {
            let s2 = -1.0 / (12.0 * h * h);
            let s1 = -nu / r / (12.0 * h);
            // Columns with even reflection folded in for i = 1.
            let mut add = |j: i64, v: f64| {
                let col = j.unsigned_abs() as usize;
                m.add(i, col, v);
            };
            add(i as i64 - 2, s2 * -1.0 + s1 * 1.0);
            add(i as i64 - 1, s2 * 16.0 + s1 * -8.0);
            add(i as i64, s2 * -30.0 + 1.0 - 3.0 * w[i] * w[i]);
            add(i as i64 + 1, s2 * 16.0 + s1 * 8.0);
            add(i as i64 + 2, s2 * -1.0 - s1 * 1.0);
        }
    }
    let d = 1.0 / (2.0 * h);
    m.add(n, n - 2, d);
    m.add(n, n - 1, -4.0 * d);
    m.add(n, n, 3.0 * d + 1.0 + nu / (2.0 * grid.r_max));
    m
}

/// Coupling parameters with the closed-form profile amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CouplingParams {
    pub mu1: f64,
    pub mu2: f64,
    pub beta: f64,
    pub sigma1: f64,
    pub sigma2: f64,
}

impl CouplingParams {
    /// σ₁² = (β-μ₂)/(β²-μ₁μ₂), σ₂² = (β-μ₁)/(β²-μ₁μ₂); requires β in the
    /// admissible set (-√(μ₁μ₂), min{μ₁,μ₂}) ∪ (max{μ₁,μ₂}, ∞), β ≠ 0.
    pub fn new(mu1: f64, mu2: f64, beta: f64) -> Result<CouplingParams, CouplingError> {
        if mu1 <= 0.0 || mu2 <= 0.0 {
            return Err(CouplingError::NonPositiveMu(mu1, mu2));
        }
        let sqrt_mu = (mu1 * mu2).sqrt();
        let min_mu = mu1.min(mu2);
        let max_mu = mu1.max(mu2);
        let admissible =
            beta != 0.0 && ((beta > -sqrt_mu && beta < min_mu) || beta > max_mu);
        if !admissible {
            return Err(CouplingError::Inadmissible {
                beta,
                sqrt_mu,
                min_mu,
                max_mu,
            });
        }
        let denom = beta * beta - mu1 * mu2;
        let s1sq = (beta - mu2) / denom;
        let s2sq = (beta - mu1) / denom;
        debug_assert!(s1sq > 0.0 && s2sq > 0.0);
        Ok(CouplingParams {
            mu1,
            mu2,
            beta,
            sigma1: s1sq.sqrt(),
            sigma2: s2sq.sqrt(),
        })
    }

    pub fn sigma_sq_sum(&self) -> f64 {
        self.sigma1 * self.sigma1 + self.sigma2 * self.sigma2
    }

    /// Residuals of μ₁σ₁² + βσ₂² = 1 and μ₂σ₂² + βσ₁² = 1.
    pub fn identity_residuals(&self) -> (f64, f64) {
        let s1 = self.sigma1 * self.sigma1;
        let s2 = self.sigma2 * self.sigma2;
        (
            self.mu1 * s1 + self.beta * s2 - 1.0,
            self.mu2 * s2 + self.beta * s1 - 1.0,
        )
    }
}

/// The synchronized vector profile (w*, w⋆) = (σ₁ w, σ₂ w).
#[derive(Debug, Clone)]
pub struct ProfilePair {
    pub gs: Arc<GroundState>,
    pub cp: CouplingParams,
}

impl ProfilePair {
    pub fn new(gs: Arc<GroundState>, cp: CouplingParams) -> ProfilePair {
        ProfilePair { gs, cp }
    }

    pub fn w_star(&self, r: f64) -> f64 {
        self.cp.sigma1 * self.gs.interpolant().eval(r)
    }

    pub fn w_star2(&self, r: f64) -> f64 {
        self.cp.sigma2 * self.gs.interpolant().eval(r)
    }

    /// Sup over sample radii of the limiting-system residual
    /// (-Δu + u - μ₁u³ - βuv², symmetric in v).
    pub fn residual_sup(&self) -> f64 {
        let base = self.gs.residual();
        let s1 = self.cp.sigma1;
        let s2 = self.cp.sigma2;
        // For u = σ₁w: -Δu + u - μ₁u³ - βuv² = σ₁[(-Δw + w) - (μ₁σ₁² + βσ₂²) w³],
        // so the residual is σᵢ times the scalar one up to the identity defect.
        let (d1, d2) = self.cp.identity_residuals();
        let w3max = self.gs.values.iter().fold(0.0f64, |m, &w| m.max(w.powi(3)));
        let scalar = base.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        let r1 = s1 * scalar + s1 * d1.abs() * w3max;
        let r2 = s2 * scalar + s2 * d2.abs() * w3max;
        r1.max(r2)
    }

    /// ∫((w*)² + (w⋆)²) = (σ₁² + σ₂²) ∫w².
    pub fn mass(&self) -> f64 {
        self.cp.sigma_sq_sum() * self.gs.mass()
    }

    /// Radial area integral by grid quadrature of f(w(r), r).
    pub fn integrate<F: Fn(f64, f64) -> f64>(&self, f: F) -> f64 {
        let vals: Vec<f64> = self
            .gs
            .values
            .iter()
            .zip(self.gs.grid.nodes())
            .map(|(&w, r)| f(w, r))
            .collect();
        self.gs.grid.integrate_radial(&vals, self.gs.dim)
    }
}

/// Surface-weighted quadrature of arbitrary radial samples (helper shared by
/// the verification suites).
pub fn integrate_radial_fn<F: Fn(f64) -> f64>(grid: &RadialGrid, dim: usize, f: F) -> f64 {
    let vals: Vec<f64> = grid.nodes().map(f).collect();
    grid.integrate_radial(&vals, dim)
}

pub fn sphere_area(dim: usize) -> f64 {
    unit_sphere_area(dim)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coupling_symmetric_case() {
        let cp = CouplingParams::new(1.0, 1.0, 3.0).unwrap();
        assert!((cp.sigma1 - 0.5).abs() < 1e-15);
        assert!((cp.sigma2 - 0.5).abs() < 1e-15);
        let (r1, r2) = cp.identity_residuals();
        assert!(r1.abs() < 1e-15 && r2.abs() < 1e-15);
    }

    #[test]
    fn coupling_rejects_midrange_beta() {
        let err = CouplingParams::new(1.0, 4.0, 1.0).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("not admissible"), "{msg}");
        assert!(CouplingParams::new(1.0, 1.0, 0.0).is_err());
        assert!(CouplingParams::new(-1.0, 1.0, 3.0).is_err());
    }

    #[test]
    fn ground_state_1d_is_sech() {
        let gs = solve_ground_state(1, 20.0, 2000, 1e-9).unwrap();
        // w(r) = sqrt(2) sech(r)
        let w0 = 2.0f64.sqrt();
        assert!(
            (gs.w0() - w0).abs() < 1e-7,
            "w(0) = {}, expected {w0}",
            gs.w0()
        );
        let it = gs.interpolant();
        for &r in &[0.5f64, 1.0, 3.0, 7.0] {
            let exact = w0 / r.cosh();
            assert!((it.eval(r) - exact).abs() < 1e-7, "at r={r}");
        }
        assert!(gs.residual_sup() < 1e-9);
    }

    #[test]
    fn ground_state_monotone_and_positive() {
        let gs = solve_ground_state(2, 20.0, 2000, 1e-9).unwrap();
        assert!(gs.values.iter().all(|&w| w > 0.0));
        for i in 1..gs.values.len() {
            assert!(
                gs.values[i] < gs.values[i - 1],
                "not decreasing at node {i}"
            );
        }
        assert!(gs.tail_constant > 0.0);
    }

    #[test]
    fn table_roundtrip_bit_exact() {
        let gs = solve_ground_state(2, 20.0, 500, 1e-8).unwrap();
        let t = gs.to_table();
        let gs2 = GroundState::from_table(&t).unwrap();
        assert_eq!(gs.values, gs2.values);
        assert_eq!(gs.tail_constant, gs2.tail_constant);
        assert_eq!(gs.to_table(), t);
    }
}
