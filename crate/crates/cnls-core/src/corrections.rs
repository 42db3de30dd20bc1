//! Linear correction fields driven by the quadratic well coefficients:
//! the coupled pair (W*, W⋆) per well, the radial auxiliary z₀, and the
//! integrals feeding the mass expansions.
//!
//! The coupled system is rotated into the σ-eigenbasis, where it decouples
//! into scalar problems (-Δ + 1 - λ w²)ζ = -c(y) w; the quadratic forcing
//! c(y) = Σ c_i y_i² splits into a radial part and a second-harmonic part,
//! so each mode reduces to one or two radial ODE solves. The translation
//! kernel lives in the first harmonic and is never excited by the even
//! forcing, which fixes uniqueness without explicit projection.

use thiserror::Error;

use crate::grid::{Field2, Point, RadialGrid, RadialInterpolant, TensorGrid};
use crate::linalg::{self, BandedMatrix, LinearOp};
use crate::linearized::{sigma_eigen_decomposition, LinearizedOperator};
use crate::potentials::PotentialSpec;
use crate::profiles::{GroundState, ProfilePair};
use crate::spectral::HelmholtzInverse;

#[derive(Debug, Error)]
pub enum CorrectionError {
    #[error("radial operator singular or ill-conditioned: {0}")]
    SingularOperator(String),
    #[error("residual {residual:.3e} above tolerance {tol:.3e} for {label}")]
    ResidualTooLarge {
        label: String,
        residual: f64,
        tol: f64,
    },
    #[error("anisotropic wells are only supported in dimension 2, got dim {0}")]
    AnisotropyUnsupported(usize),
    #[error("dimension {0} not supported here")]
    BadDimension(usize),
    #[error("tail fit slope {0:.3} above the decay threshold")]
    TailTooSlow(f64),
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
}

/// Scalar radial Schrödinger-type operator
///   -f'' - ((N-1)/r) f' + cent/r² f + (1 - λ w²) f
/// discretized fourth-order on the ground-state grid.
pub struct RadialOperator {
    pub dim: usize,
    pub grid: RadialGrid,
    /// Centrifugal coefficient: m² for dim 2 Fourier mode m, l(l+1) for dim 3.
    pub centrifugal: f64,
    pub lambda: f64,
    w: Vec<f64>,
}

impl RadialOperator {
    pub fn new(gs: &GroundState, centrifugal: f64, lambda: f64) -> Self {
        RadialOperator {
            dim: gs.dim,
            grid: gs.grid.clone(),
            centrifugal,
            lambda,
            w: gs.values.clone(),
        }
    }

    fn assemble(&self, diag_shift: f64) -> BandedMatrix {
        let n = self.grid.n;
        let h = self.grid.h();
        let nu = (self.dim - 1) as f64;
        let mut m = BandedMatrix::new(n + 1, 2, 2);
        let pot = |i: usize| -> f64 {
            1.0 + diag_shift - self.lambda * self.w[i] * self.w[i]
        };
        if self.centrifugal == 0.0 {
            let s = -(self.dim as f64) / (12.0 * h * h);
            m.add(0, 0, s * -30.0 + pot(0));
            m.add(0, 1, s * 32.0);
            m.add(0, 2, s * -2.0);
        } else {
            // Regular singular point: modes with angular dependence vanish at 0.
            m.add(0, 0, 1.0);
        }
        for i in 1..n {
            let r = self.grid.node(i);
            let cent = self.centrifugal / (r * r);
            if i >= n - 1 {
                let s2 = -1.0 / (h * h);
                let s1 = -nu / r / (2.0 * h);
                m.add(i, i - 1, s2 - s1);
                m.add(i, i, -2.0 * s2 + pot(i) + cent);
                m.add(i, i + 1, s2 + s1);
            } else {
                let s2 = -1.0 / (12.0 * h * h);
                let s1 = -nu / r / (12.0 * h);
                let refl = if self.centrifugal == 0.0 { 1.0 } else { 1.0 };
                let mut add = |j: i64, v: f64| {
                    let col = j.unsigned_abs() as usize;
                    m.add(i, col, v);
                };
                // Even reflection through the origin for both harmonic types:
                // m = 0 modes are even, m = 2 modes behave like r² near 0.
                add(i as i64 - 2, refl * (s2 * -1.0 + s1 * 1.0));
                add(i as i64 - 1, refl * (s2 * 16.0 + s1 * -8.0));
                add(i as i64, s2 * -30.0 + pot(i) + cent);
                add(i as i64 + 1, s2 * 16.0 + s1 * 8.0);
                add(i as i64 + 2, s2 * -1.0 - s1 * 1.0);
            }
        }
        let d = 1.0 / (2.0 * h);
        m.add(n, n - 2, d);
        m.add(n, n - 1, -4.0 * d);
        m.add(n, n, 3.0 * d + 1.0 + nu / (2.0 * self.grid.r_max));
        m
    }

    /// Solve (op) f = rhs with the Robin decay closure at r_max.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>, CorrectionError> {
        assert_eq!(rhs.len(), self.grid.len());
        let mut b = rhs.to_vec();
        if self.centrifugal != 0.0 {
            b[0] = 0.0;
        }
        let n = self.grid.n;
        b[n] = 0.0;
        let lu = self
            .assemble(0.0)
            .factor()
            .map_err(|e| CorrectionError::SingularOperator(e.to_string()))?;
        Ok(lu.solve(&b))
    }

    /// Discrete residual of (op) f - rhs at interior nodes.
    pub fn residual_sup(&self, f: &[f64], rhs: &[f64]) -> f64 {
        let n = self.grid.n;
        let h = self.grid.h();
        let nu = (self.dim - 1) as f64;
        let mut worst = 0.0f64;
        let sample = |i: i64| -> f64 { f[i.unsigned_abs() as usize] };
        for i in 0..n {
            let res = if i == 0 {
                if self.centrifugal != 0.0 {
                    continue;
                }
                let d2 = (-2.0 * sample(2) + 32.0 * sample(1) - 30.0 * f[0]) / (12.0 * h * h);
                -(self.dim as f64) * d2 + (1.0 - self.lambda * self.w[0] * self.w[0]) * f[0]
                    - rhs[0]
            } else {
                let r = self.grid.node(i);
                let pot = 1.0 - self.lambda * self.w[i] * self.w[i] + self.centrifugal / (r * r);
                if i >= n - 1 {
                    let d2 = (f[i - 1] - 2.0 * f[i] + f[i + 1]) / (h * h);
                    let d1 = (f[i + 1] - f[i - 1]) / (2.0 * h);
                    -d2 - nu / r * d1 + pot * f[i] - rhs[i]
                } else {
                    let ii = i as i64;
                    let d2 = (-sample(ii - 2) + 16.0 * sample(ii - 1) - 30.0 * f[i]
                        + 16.0 * sample(ii + 1)
                        - sample(ii + 2))
                        / (12.0 * h * h);
                    let d1 = (sample(ii - 2) - 8.0 * sample(ii - 1) + 8.0 * sample(ii + 1)
                        - sample(ii + 2))
                        / (12.0 * h);
                    -d2 - nu / r * d1 + pot * f[i] - rhs[i]
                }
            };
            worst = worst.max(res.abs());
        }
        worst
    }
}

/// Radial auxiliary z₀ solving (-Δ + 1 - 3w²) z = -|x|² w in dimension 2,
/// with its signed pairing ∫ w z₀.
#[derive(Debug, Clone)]
pub struct RadialCorrection {
    pub z0: Vec<f64>,
    pub wz0_integral: f64,
    pub residual: f64,
}

pub fn solve_z0_radial(gs: &GroundState) -> Result<RadialCorrection, CorrectionError> {
    if gs.dim != 2 {
        return Err(CorrectionError::BadDimension(gs.dim));
    }
    let op = RadialOperator::new(gs, 0.0, 3.0);
    let rhs: Vec<f64> = gs
        .grid
        .nodes()
        .zip(&gs.values)
        .map(|(r, &w)| -r * r * w)
        .collect();
    let z0 = op.solve(&rhs)?;
    let residual = op.residual_sup(&z0, &rhs);
    if residual > 1e-7 {
        return Err(CorrectionError::ResidualTooLarge {
            label: "z0".into(),
            residual,
            tol: 1e-7,
        });
    }
    let integrand: Vec<f64> = gs.values.iter().zip(&z0).map(|(w, z)| w * z).collect();
    let wz0_integral = gs.grid.integrate_radial(&integrand, 2);
    Ok(RadialCorrection {
        z0,
        wz0_integral,
        residual,
    })
}

/// Coupled correction pair for one well, stored as σ-mode radial harmonics:
/// ζ_μ(y) = f_{μ,0}(r) + f_{μ,2}(r)·cos2θ for μ ∈ {par, perp} (dim 2);
/// pure radial profiles in the isotropic dim-3 case.
#[derive(Debug, Clone)]
pub struct CorrectionPair {
    pub well: usize,
    pub dim: usize,
    pub sigma1: f64,
    pub sigma2: f64,
    pub grid: RadialGrid,
    pub residual_norm: f64,
    pub tail_log_slope: f64,
    f_par0: Vec<f64>,
    f_par2: Vec<f64>,
    f_perp0: Vec<f64>,
    f_perp2: Vec<f64>,
    interp: [RadialInterpolant; 4],
}

impl CorrectionPair {
    /// Evaluate (W*, W⋆) at a displacement y from the well center.
    pub fn eval(&self, y: &Point) -> (f64, f64) {
        let (r, cos2t) = polar_factor(y, self.dim);
        let zp = self.interp[0].eval(r) + self.interp[1].eval(r) * cos2t;
        let zq = self.interp[2].eval(r) + self.interp[3].eval(r) * cos2t;
        let s = (self.sigma1 * self.sigma1 + self.sigma2 * self.sigma2).sqrt();
        (
            (self.sigma1 * zp + self.sigma2 * zq) / s,
            (self.sigma2 * zp - self.sigma1 * zq) / s,
        )
    }

    /// ∫ (w* W* + w⋆ W⋆) dy: only the parallel m=0 harmonic survives.
    pub fn ww_integral(&self, gs: &GroundState) -> f64 {
        let s = (self.sigma1 * self.sigma1 + self.sigma2 * self.sigma2).sqrt();
        let vals: Vec<f64> = gs
            .values
            .iter()
            .zip(&self.f_par0)
            .map(|(w, f)| w * f)
            .collect();
        s * gs.grid.integrate_radial(&vals, self.dim)
    }

    /// ∫ (∇w*·∇W* + ∇w⋆·∇W⋆) dy.
    pub fn grad_integral(&self, gs: &GroundState) -> f64 {
        let s = (self.sigma1 * self.sigma1 + self.sigma2 * self.sigma2).sqrt();
        let dw = gs.derivative_samples();
        let df = fourth_order_derivative(&self.grid, &self.f_par0, false);
        let vals: Vec<f64> = dw.iter().zip(&df).map(|(a, b)| a * b).collect();
        s * gs.grid.integrate_radial(&vals, self.dim)
    }

    /// I_l = ∫(∇w*·∇W* + ∇w⋆·∇W⋆ + w*W* + w⋆W⋆).
    pub fn energy_integral(&self, gs: &GroundState) -> f64 {
        self.ww_integral(gs) + self.grad_integral(gs)
    }

    /// Largest |W(y) - W(-y)| over a sample of directions; zero by
    /// construction of the even harmonics.
    pub fn evenness_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for k in 0..32 {
            let t = k as f64 * 0.19 + 0.07;
            let r = 0.3 + 0.25 * k as f64;
            let y = [r * t.cos(), r * t.sin(), 0.0];
            let ym = [-y[0], -y[1], 0.0];
            let (a1, b1) = self.eval(&y);
            let (a2, b2) = self.eval(&ym);
            worst = worst.max((a1 - a2).abs()).max((b1 - b2).abs());
        }
        worst
    }

    /// Parallel-mode radial profile σ₁W* + σ₂W⋆ (m=0 harmonic part),
    /// for cross-checks against the scalar equation.
    pub fn parallel_mode_m0(&self) -> Vec<f64> {
        let s = (self.sigma1 * self.sigma1 + self.sigma2 * self.sigma2).sqrt();
        self.f_par0.iter().map(|f| f * s).collect()
    }
}

fn polar_factor(y: &Point, dim: usize) -> (f64, f64) {
    match dim {
        2 => {
            let r2 = y[0] * y[0] + y[1] * y[1];
            let r = r2.sqrt();
            let c = if r2 > 1e-28 {
                (y[0] * y[0] - y[1] * y[1]) / r2
            } else {
                0.0
            };
            (r, c)
        }
        3 => {
            let r = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
            (r, 0.0)
        }
        _ => ((y[0]).abs(), 0.0),
    }
}

fn fourth_order_derivative(grid: &RadialGrid, f: &[f64], odd: bool) -> Vec<f64> {
    let n = grid.n;
    let h = grid.h();
    let sgn = if odd { -1.0 } else { 1.0 };
    let sample = |i: i64| -> f64 {
        let j = i.unsigned_abs() as usize;
        if j > n {
            0.0
        } else if i < 0 {
            sgn * f[j]
        } else {
            f[j]
        }
    };
    (0..=n as i64)
        .map(|i| {
            (sample(i - 2) - 8.0 * sample(i - 1) + 8.0 * sample(i + 1) - sample(i + 2))
                / (12.0 * h)
        })
        .collect()
}

/// Window over which correction tails behave like the advertised pure
/// exponential; the quadratic forcing carries an r^{5/2} prefactor that only
/// fades beyond r ≈ 20.
pub const TAIL_FIT_WINDOW: (f64, f64) = (24.0, 34.0);

/// Solve the correction system for well `l` by σ-rotation and harmonic
/// splitting. Requires isotropic coefficients when dim = 3.
pub fn solve_correction_pair(
    l: usize,
    spec: &PotentialSpec,
    profiles: &ProfilePair,
) -> Result<CorrectionPair, CorrectionError> {
    let gs = &profiles.gs;
    let cp = profiles.cp;
    let dim = gs.dim;
    let basis = sigma_eigen_decomposition(&cp);
    let s = cp.sigma_sq_sum().sqrt();
    let p = &spec.wells[l].p;
    let q = &spec.wells[l].q;
    // σ-rotated coefficient vectors of the forcing -Σ c_i y_i² w.
    let a_par: Vec<f64> = (0..dim)
        .map(|i| (cp.sigma1 * cp.sigma1 * p[i] + cp.sigma2 * cp.sigma2 * q[i]) / s)
        .collect();
    let a_perp: Vec<f64> = (0..dim)
        .map(|i| cp.sigma1 * cp.sigma2 * (p[i] - q[i]) / s)
        .collect();

    let n = gs.grid.len();
    let r2w: Vec<f64> = gs
        .grid
        .nodes()
        .zip(&gs.values)
        .map(|(r, &w)| r * r * w)
        .collect();

    let mut solve_mode = |lambda: f64,
                          coeffs: &[f64],
                          label: &str|
     -> Result<(Vec<f64>, Vec<f64>, f64), CorrectionError> {
        match dim {
            2 => {
                let mean = 0.5 * (coeffs[0] + coeffs[1]);
                let diff = coeffs[0] - coeffs[1];
                let mut f0 = vec![0.0; n];
                let mut f2 = vec![0.0; n];
                let mut res = 0.0f64;
                if mean != 0.0 {
                    let op = RadialOperator::new(gs, 0.0, lambda);
                    let rhs: Vec<f64> = r2w.iter().map(|v| -mean * v).collect();
                    f0 = op.solve(&rhs)?;
                    res = res.max(op.residual_sup(&f0, &rhs));
                }
                if diff != 0.0 {
                    let op = RadialOperator::new(gs, 4.0, lambda);
                    let rhs: Vec<f64> = r2w.iter().map(|v| -0.5 * diff * v).collect();
                    f2 = op.solve(&rhs)?;
                    res = res.max(op.residual_sup(&f2, &rhs));
                }
                let _ = label;
                Ok((f0, f2, res))
            }
            3 => {
                let iso = coeffs.iter().all(|c| (c - coeffs[0]).abs() < 1e-12);
                if !iso {
                    return Err(CorrectionError::AnisotropyUnsupported(dim));
                }
                let mut f0 = vec![0.0; n];
                let mut res = 0.0;
                if coeffs[0] != 0.0 {
                    let op = RadialOperator::new(gs, 0.0, lambda);
                    let rhs: Vec<f64> = r2w.iter().map(|v| -coeffs[0] * v).collect();
                    f0 = op.solve(&rhs)?;
                    res = op.residual_sup(&f0, &rhs);
                }
                Ok((f0, vec![0.0; n], res))
            }
            d => Err(CorrectionError::BadDimension(d)),
        }
    };

    let (f_par0, f_par2, res_par) = solve_mode(basis.lambda_par, &a_par, "parallel")?;
    let (f_perp0, f_perp2, res_perp) = solve_mode(basis.lambda_perp, &a_perp, "perpendicular")?;
    let residual_norm = res_par.max(res_perp);
    let tol = 1e-7 * (1.0 + a_par.iter().chain(&a_perp).fold(0.0f64, |m, &c| m.max(c.abs())));
    if residual_norm > tol {
        return Err(CorrectionError::ResidualTooLarge {
            label: format!("correction well {l}"),
            residual: residual_norm,
            tol,
        });
    }

    // Tail decay: least-squares slope of log(envelope) on the far window.
    let env: Vec<f64> = (0..n)
        .map(|i| {
            (f_par0[i].powi(2) + f_par2[i].powi(2) + f_perp0[i].powi(2) + f_perp2[i].powi(2))
                .sqrt()
        })
        .collect();
    let tail_log_slope = tail_slope(&gs.grid, &env, TAIL_FIT_WINDOW);

    let interp = [
        RadialInterpolant::new(gs.grid.clone(), f_par0.clone()),
        RadialInterpolant::new(gs.grid.clone(), f_par2.clone()),
        RadialInterpolant::new(gs.grid.clone(), f_perp0.clone()),
        RadialInterpolant::new(gs.grid.clone(), f_perp2.clone()),
    ];
    Ok(CorrectionPair {
        well: l,
        dim,
        sigma1: cp.sigma1,
        sigma2: cp.sigma2,
        grid: gs.grid.clone(),
        residual_norm,
        tail_log_slope,
        f_par0,
        f_par2,
        f_perp0,
        f_perp2,
        interp,
    })
}

/// Least-squares slope of log|env| against r over [lo, hi]; zero when the
/// envelope vanishes identically there.
pub fn tail_slope(grid: &RadialGrid, env: &[f64], window: (f64, f64)) -> f64 {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, r) in grid.nodes().enumerate() {
        if r >= window.0 && r <= window.1 && env[i] > 1e-280 {
            xs.push(r);
            ys.push(env[i].ln());
        }
    }
    if xs.len() < 4 {
        return 0.0;
    }
    let nn = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    (nn * sxy - sx * sy) / (nn * sxx - sx * sx)
}

/// Full-grid fallback: solve the coupled correction system on a tensor grid
/// by preconditioned GMRES with explicit projection against the translation
/// modes. Agreement with the radial path is a correctness check.
pub fn solve_correction_fullgrid(
    profiles: &ProfilePair,
    p: &[f64],
    q: &[f64],
    grid: &TensorGrid,
) -> Result<Field2, CorrectionError> {
    let cp = profiles.cp;
    let op = LinearizedOperator::new(profiles, grid.clone(), [0.0; 3]);
    let modes = op.translation_modes(profiles);
    let modes = orthonorm(&modes);
    let it = profiles.gs.interpolant();
    let total = grid.total();
    let mut rhs = vec![0.0; 2 * total];
    for idx in 0..total {
        let c = grid.coords(idx);
        if crate::grid::on_boundary(grid, &c) {
            continue;
        }
        let pt = grid.point(c);
        let r = (0..grid.dim).map(|d| pt[d] * pt[d]).sum::<f64>().sqrt();
        let w = it.eval(r);
        let cu: f64 = (0..grid.dim).map(|d| p[d] * pt[d] * pt[d]).sum();
        let cv: f64 = (0..grid.dim).map(|d| q[d] * pt[d] * pt[d]).sum();
        rhs[idx] = -cu * cp.sigma1 * w;
        rhs[total + idx] = -cv * cp.sigma2 * w;
    }
    project_out(&mut rhs, &modes);
    let hinv = HelmholtzInverse::new(grid, 1.0);
    let sol = linalg::gmres(&op, Some(&hinv), &rhs, 1e-10, 600)
        .map_err(|e| CorrectionError::SingularOperator(e.to_string()))?;
    let mut x = sol.x;
    project_out(&mut x, &modes);
    let mut out = Field2::zeros(grid.clone());
    out.u.copy_from_slice(&x[..total]);
    out.v.copy_from_slice(&x[total..]);
    Ok(out)
}

fn orthonorm(cols: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for c in cols {
        let mut v = c.clone();
        for o in &out {
            let d = linalg::dot(&v, o);
            linalg::axpy(-d, o, &mut v);
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

fn project_out(v: &mut [f64], basis: &[Vec<f64>]) {
    for b in basis {
        let d = linalg::dot(v, b);
        linalg::axpy(-d, b, v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{solve_ground_state, CouplingParams};
    use std::sync::Arc;

    fn gs2() -> Arc<GroundState> {
        Arc::new(solve_ground_state(2, 40.0, 4000, 1e-8).unwrap())
    }

    #[test]
    fn z0_negative_pairing_and_half_moment_identity() {
        let gs = gs2();
        let rc = solve_z0_radial(&gs).unwrap();
        assert!(rc.wz0_integral < 0.0, "∫w z0 = {}", rc.wz0_integral);
        assert!(rc.residual < 1e-7);
        // ∫ w z₀ = -½ ∫ |x|² w², from pairing the z₀ equation with the
        // dilation identity.
        let target = -0.5 * gs.second_moment();
        let rel = (rc.wz0_integral - target).abs() / target.abs();
        assert!(
            rel < 1e-6,
            "∫w z0 = {}, -½∫|x|²w² = {target}, rel {rel:.2e}",
            rc.wz0_integral
        );
    }

    #[test]
    fn z0_pairing_matches_dense_radial_oracle() {
        let gs = gs2();
        let rc = solve_z0_radial(&gs).unwrap();
        let oracle = dense_wf_integral(&gs, 3.0, 1.0);
        let rel = (rc.wz0_integral - oracle).abs() / oracle.abs();
        assert!(
            rel < 1e-6,
            "∫w z0 = {} vs dense oracle {oracle}, rel {rel:.2e}",
            rc.wz0_integral
        );
    }

    #[test]
    fn zero_coefficients_give_zero_correction() {
        let gs = gs2();
        let cp = CouplingParams::new(1.0, 1.0, 5.0).unwrap();
        let profiles = ProfilePair::new(gs, cp);
        let spec = PotentialSpec::new(
            2,
            vec![crate::potentials::CriticalPoint {
                xi: [0.0; 3],
                p: vec![0.0, 0.0],
                q: vec![0.0, 0.0],
            }],
            0.5,
        )
        .unwrap();
        let c = solve_correction_pair(0, &spec, &profiles).unwrap();
        let (a, b) = c.eval(&[0.7, -0.3, 0.0]);
        assert_eq!(a, 0.0);
        assert_eq!(b, 0.0);
        assert_eq!(c.energy_integral(&profiles.gs), 0.0);
    }

    #[test]
    fn parallel_mode_matches_independent_scalar_solve() {
        // For isotropic p = q wells with μ₁ = μ₂ the parallel projection
        // σ₁W* + σ₂W⋆ solves -Δz + z - 3w²z = -Σ(σ₁²p + σ₂²q) x_i² w.
        let gs = gs2();
        let cp = CouplingParams::new(1.0, 1.0, 5.0).unwrap();
        let profiles = ProfilePair::new(gs.clone(), cp);
        let pc = 0.8;
        let qc = 1.3;
        let spec = PotentialSpec::new(
            2,
            vec![crate::potentials::CriticalPoint {
                xi: [0.0; 3],
                p: vec![pc, pc],
                q: vec![qc, qc],
            }],
            0.5,
        )
        .unwrap();
        let c = solve_correction_pair(0, &spec, &profiles).unwrap();
        let par = c.parallel_mode_m0();
        // Independent dense scalar solve, staggered second-order.
        let coeff = cp.sigma1 * cp.sigma1 * pc + cp.sigma2 * cp.sigma2 * qc;
        let dense = dense_scalar_solve(&gs, 3.0, coeff, 3200);
        let it = RadialInterpolant::new(gs.grid.clone(), par);
        let mut worst = 0.0f64;
        for (i, &r) in dense.centers.iter().enumerate() {
            if r > 15.0 {
                break;
            }
            worst = worst.max((it.eval(r) - dense.values[i]).abs());
        }
        assert!(worst < 1e-4, "parallel mode mismatch {worst}");
    }

    struct DenseRadial {
        /// Cell centers r_i = (i + 1/2) h.
        centers: Vec<f64>,
        values: Vec<f64>,
    }

    /// Second-order staggered finite-volume dense solve of
    /// (-Δ + 1 - λw²) f = -c r² w in dimension 2 — cell-centered so that the
    /// axis flux vanishes by symmetry; independent of the banded
    /// fourth-order node-centered production path.
    fn dense_scalar_solve(gs: &GroundState, lambda: f64, c: f64, n: usize) -> DenseRadial {
        use crate::linalg::DenseMatrix;
        let rmax = 32.0;
        let h = rmax / n as f64;
        let it = gs.interpolant();
        let centers: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * h).collect();
        let mut m = DenseMatrix::zeros(n);
        let mut rhs = vec![0.0; n];
        for i in 0..n {
            let r = centers[i];
            let w = it.eval(r);
            let face_lo = i as f64 * h;
            let face_hi = (i + 1) as f64 * h;
            // -(1/r)(r f')' integrated over the cell, divided by its measure.
            let vol = r * h;
            if i > 0 {
                m.add(i, i - 1, -face_lo / (h * vol));
                m.add(i, i, face_lo / (h * vol));
            }
            if i + 1 < n {
                m.add(i, i + 1, -face_hi / (h * vol));
                m.add(i, i, face_hi / (h * vol));
            } else {
                // Dirichlet ghost beyond r_max.
                m.add(i, i, 2.0 * face_hi / (h * vol));
            }
            m.add(i, i, 1.0 - lambda * w * w);
            rhs[i] = -c * r * r * w;
        }
        let values = m.factor().unwrap().solve(&rhs);
        DenseRadial { centers, values }
    }

    /// Richardson-extrapolated ∫ w f from two staggered dense solves.
    fn dense_wf_integral(gs: &GroundState, lambda: f64, c: f64) -> f64 {
        let it = gs.interpolant();
        let integral = |d: &DenseRadial| -> f64 {
            let h = d.centers[1] - d.centers[0];
            2.0 * std::f64::consts::PI
                * h
                * d.centers
                    .iter()
                    .zip(&d.values)
                    .map(|(&r, &f)| it.eval(r) * f * r)
                    .sum::<f64>()
        };
        let coarse = integral(&dense_scalar_solve(gs, lambda, c, 800));
        let fine = integral(&dense_scalar_solve(gs, lambda, c, 1600));
        fine + (fine - coarse) / 3.0
    }

    #[test]
    fn ww_integral_matches_half_identity() {
        // ∫(w*W* + w⋆W⋆) = ½ Σ_i (σ₁²p_i + σ₂²q_i) ∫ w z₀.
        let gs = gs2();
        let rc = solve_z0_radial(&gs).unwrap();
        for (m1, m2, be, p, q) in [
            (1.0, 1.0, 3.0, [1.0, 1.0], [1.0, 1.0]),
            (1.0, 2.0, 6.0, [0.7, 1.4], [1.1, 0.4]),
            (1.0, 1.0, 5.0, [2.0, 0.5], [0.3, 1.8]),
        ] {
            let cp = CouplingParams::new(m1, m2, be).unwrap();
            let profiles = ProfilePair::new(gs.clone(), cp);
            let spec = PotentialSpec::new(
                2,
                vec![crate::potentials::CriticalPoint {
                    xi: [0.0; 3],
                    p: p.to_vec(),
                    q: q.to_vec(),
                }],
                0.5,
            )
            .unwrap();
            let c = solve_correction_pair(0, &spec, &profiles).unwrap();
            let coeff_sum: f64 = (0..2)
                .map(|i| cp.sigma1 * cp.sigma1 * p[i] + cp.sigma2 * cp.sigma2 * q[i])
                .sum();
            let target = 0.5 * coeff_sum * rc.wz0_integral;
            let got = c.ww_integral(&gs);
            let rel = (got - target).abs() / target.abs().max(1e-12);
            assert!(
                rel < 1e-5,
                "({m1},{m2},{be}) p={p:?} q={q:?}: ∫wW = {got}, ½Σc∫wz₀ = {target}, rel {rel:.2e}"
            );
        }
    }

    #[test]
    fn energy_integral_matches_quarter_moment_identity() {
        // I_l = ¼ Σ_i (σ₁²p_i + σ₂²q_i) ∫|x|²w².
        let gs = gs2();
        let moment = gs.second_moment();
        for (m1, m2, be, p, q) in [
            (1.0, 1.0, 3.0, [1.0, 1.0], [1.0, 1.0]),
            (1.0, 2.0, 6.0, [0.7, 1.4], [1.1, 0.4]),
            (2.0, 1.0, 4.5, [1.3, 0.2], [0.6, 0.9]),
        ] {
            let cp = CouplingParams::new(m1, m2, be).unwrap();
            let profiles = ProfilePair::new(gs.clone(), cp);
            let spec = PotentialSpec::new(
                2,
                vec![crate::potentials::CriticalPoint {
                    xi: [0.0; 3],
                    p: p.to_vec(),
                    q: q.to_vec(),
                }],
                0.5,
            )
            .unwrap();
            let c = solve_correction_pair(0, &spec, &profiles).unwrap();
            let coeff_sum: f64 = (0..2)
                .map(|i| cp.sigma1 * cp.sigma1 * p[i] + cp.sigma2 * cp.sigma2 * q[i])
                .sum();
            let target = 0.25 * coeff_sum * moment;
            let got = c.energy_integral(&gs);
            let rel = (got - target).abs() / target.abs().max(1e-12);
            assert!(
                rel < 1e-5,
                "({m1},{m2},{be}): I_l = {got}, ¼Σc∫|x|²w² = {target}, rel {rel:.2e}"
            );
        }
    }

    #[test]
    fn correction_tail_decays_fast_enough() {
        let gs = gs2();
        let cp = CouplingParams::new(1.0, 2.0, 5.0).unwrap();
        let profiles = ProfilePair::new(gs, cp);
        let spec = PotentialSpec::new(
            2,
            vec![crate::potentials::CriticalPoint {
                xi: [0.0; 3],
                p: vec![1.0, 0.5],
                q: vec![0.4, 1.2],
            }],
            0.5,
        )
        .unwrap();
        let c = solve_correction_pair(0, &spec, &profiles).unwrap();
        assert!(
            c.tail_log_slope <= -0.9,
            "tail slope {} too slow",
            c.tail_log_slope
        );
        assert!(c.evenness_defect() < 1e-10);
    }

    #[test]
    fn fullgrid_fallback_agrees_with_radial_path() {
        let gs = Arc::new(solve_ground_state(2, 20.0, 2000, 1e-8).unwrap());
        let cp = CouplingParams::new(1.0, 2.0, 5.0).unwrap();
        let profiles = ProfilePair::new(gs, cp);
        let p = [0.9, 0.4];
        let q = [0.3, 1.1];
        let spec = PotentialSpec::new(
            2,
            vec![crate::potentials::CriticalPoint {
                xi: [0.0; 3],
                p: p.to_vec(),
                q: q.to_vec(),
            }],
            0.5,
        )
        .unwrap();
        let radial = solve_correction_pair(0, &spec, &profiles).unwrap();
        let m = 193usize;
        let half = 12.0;
        let h = 2.0 * half / (m - 1) as f64;
        let grid = TensorGrid::new(2, [m, m, 1], [-half, -half, 0.0], h);
        let full = solve_correction_fullgrid(&profiles, &p, &q, &grid).unwrap();
        let mut worst = 0.0f64;
        for idx in 0..grid.total() {
            let pt = grid.point(grid.coords(idx));
            if pt[0].abs() > 8.0 || pt[1].abs() > 8.0 {
                continue;
            }
            let (ws, wt) = radial.eval(&pt);
            worst = worst.max((full.u[idx] - ws).abs()).max((full.v[idx] - wt).abs());
        }
        assert!(worst < 2e-3, "fallback disagreement {worst}");
    }
}
