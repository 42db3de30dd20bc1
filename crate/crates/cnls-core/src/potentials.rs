//! Trapping potentials: compactly supported blended quadratics around common
//! critical points, plus the non-degeneracy and coefficient-sum diagnostics.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{Point, MAX_DIM};
use crate::profiles::CouplingParams;

#[derive(Debug, Error)]
pub enum PotentialError {
    #[error("wells {0} and {1} closer than 4 x blend radius")]
    WellsTooClose(usize, usize),
    #[error("coefficient vector length {got} does not match dim {dim}")]
    BadCoefficients { dim: usize, got: usize },
    #[error("invalid parameter: {0}")]
    Invalid(String),
}

/// One common critical point of P and Q with its quadratic coefficients.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub xi: Point,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    P,
    Q,
}

/// Multi-well potential specification. Each well contributes
/// bump(|x-ξ|) · Σ c_i (x_i - ξ_i)² where the bump is identically 1 inside
/// `blend_radius` and vanishes beyond twice that radius.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub dim: usize,
    pub wells: Vec<CriticalPoint>,
    pub blend_radius: f64,
}

impl PotentialSpec {
    pub fn new(
        dim: usize,
        wells: Vec<CriticalPoint>,
        blend_radius: f64,
    ) -> Result<PotentialSpec, PotentialError> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(PotentialError::Invalid(format!("dim {dim}")));
        }
        if blend_radius <= 0.0 {
            return Err(PotentialError::Invalid("blend_radius <= 0".into()));
        }
        for w in &wells {
            if w.p.len() != dim || w.q.len() != dim {
                return Err(PotentialError::BadCoefficients {
                    dim,
                    got: w.p.len().max(w.q.len()),
                });
            }
        }
        for i in 0..wells.len() {
            for j in (i + 1)..wells.len() {
                let d2: f64 = (0..dim)
                    .map(|k| (wells[i].xi[k] - wells[j].xi[k]).powi(2))
                    .sum();
                if d2.sqrt() <= 4.0 * blend_radius {
                    return Err(PotentialError::WellsTooClose(i, j));
                }
            }
        }
        Ok(PotentialSpec {
            dim,
            wells,
            blend_radius,
        })
    }

    /// A flat (identically zero) potential with nominal wells at the given
    /// centers, used for the exact translation-invariant reference runs.
    pub fn flat(dim: usize, centers: &[Point]) -> PotentialSpec {
        PotentialSpec {
            dim,
            wells: centers
                .iter()
                .map(|&xi| CriticalPoint {
                    xi,
                    p: vec![0.0; dim],
                    q: vec![0.0; dim],
                })
                .collect(),
            blend_radius: 0.5,
        }
    }

    pub fn k(&self) -> usize {
        self.wells.len()
    }

    pub fn coeffs(&self, well: usize, which: Which) -> &[f64] {
        match which {
            Which::P => &self.wells[well].p,
            Which::Q => &self.wells[well].q,
        }
    }

    pub fn value(&self, which: Which, x: &Point) -> f64 {
        let mut total = 0.0;
        for (w, c) in self.well_coeff_iter(which) {
            let (s2, quad) = self.well_geometry(w, c, x);
            let r = s2.sqrt();
            total += bump(r / self.blend_radius) * quad;
        }
        total
    }

    pub fn gradient(&self, which: Which, x: &Point) -> Point {
        let mut g = [0.0; MAX_DIM];
        for (w, c) in self.well_coeff_iter(which) {
            let (s2, quad) = self.well_geometry(w, c, x);
            let r = s2.sqrt();
            let t = r / self.blend_radius;
            let b = bump(t);
            let db = bump_deriv(t) / self.blend_radius;
            for d in 0..self.dim {
                let dx = x[d] - w.xi[d];
                // ∂_d [b(r) quad] = b'(r) (dx/r) quad + b(r) 2 c_d dx
                let radial = if r > 1e-14 { db * dx / r * quad } else { 0.0 };
                g[d] += radial + b * 2.0 * c[d] * dx;
            }
        }
        g
    }

    pub fn hessian(&self, which: Which, x: &Point) -> [[f64; MAX_DIM]; MAX_DIM] {
        let mut hmat = [[0.0; MAX_DIM]; MAX_DIM];
        for (w, c) in self.well_coeff_iter(which) {
            let (s2, quad) = self.well_geometry(w, c, x);
            let r = s2.sqrt();
            let rb = self.blend_radius;
            let t = r / rb;
            let b = bump(t);
            let db = bump_deriv(t) / rb;
            let d2b = bump_second_deriv(t) / (rb * rb);
            for a in 0..self.dim {
                for e in 0..self.dim {
                    let dxa = x[a] - w.xi[a];
                    let dxe = x[e] - w.xi[e];
                    let kron = if a == e { 1.0 } else { 0.0 };
                    let mut hv = b * 2.0 * c[a] * kron;
                    if r > 1e-14 {
                        let quad_a = 2.0 * c[a] * dxa;
                        let quad_e = 2.0 * c[e] * dxe;
                        hv += db / r * (dxa * quad_e + dxe * quad_a);
                        hv += quad * (d2b * dxa * dxe / (r * r)
                            + db * (kron / r - dxa * dxe / (r * r * r)));
                    }
                    hmat[a][e] += hv;
                }
            }
        }
        hmat
    }

    fn well_coeff_iter(&self, which: Which) -> impl Iterator<Item = (&CriticalPoint, &[f64])> {
        self.wells.iter().map(move |w| {
            let c: &[f64] = match which {
                Which::P => &w.p,
                Which::Q => &w.q,
            };
            (w, c)
        })
    }

    fn well_geometry(&self, w: &CriticalPoint, c: &[f64], x: &Point) -> (f64, f64) {
        let mut s2 = 0.0;
        let mut quad = 0.0;
        for d in 0..self.dim {
            let dx = x[d] - w.xi[d];
            s2 += dx * dx;
            quad += c[d] * dx * dx;
        }
        (s2, quad)
    }
}

/// C² cutoff: identically 1 for t ≤ 1, 0 for t ≥ 2, quintic smoothstep
/// in between.
fn bump(t: f64) -> f64 {
    if t <= 1.0 {
        1.0
    } else if t >= 2.0 {
        0.0
    } else {
        let s = t - 1.0;
        1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
    }
}

fn bump_deriv(t: f64) -> f64 {
    if !(1.0..2.0).contains(&t) {
        0.0
    } else {
        let s = t - 1.0;
        -(30.0 * s * s - 60.0 * s * s * s + 30.0 * s * s * s * s)
    }
}

fn bump_second_deriv(t: f64) -> f64 {
    if !(1.0..2.0).contains(&t) {
        0.0
    } else {
        let s = t - 1.0;
        -(60.0 * s - 180.0 * s * s + 120.0 * s * s * s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MassSide {
    /// Coefficient sum positive: admissible masses lie below the threshold.
    BelowCritical,
    /// Coefficient sum negative: admissible masses lie above the threshold.
    AboveCritical,
}

/// Per-well non-degeneracy determinants and the global coefficient sum.
#[derive(Debug, Clone, Serialize)]
pub struct HypothesisReport {
    pub well_determinants: Vec<f64>,
    pub h2_pass: bool,
    /// Σ_l Σ_i (σ₁² p_li + σ₂² q_li); only meaningful for dim = 2.
    pub h3_sum: Option<f64>,
    pub h3_pass: Option<bool>,
    pub mass_side: Option<MassSide>,
}

/// Evaluate the (H2) determinant of (β-μ₂)P'' + (β-μ₁)Q'' at each well and,
/// in dimension two, the (H3) sum that selects the admissible mass side.
pub fn hypothesis_report(spec: &PotentialSpec, cp: &CouplingParams) -> HypothesisReport {
    let mut dets = Vec::with_capacity(spec.k());
    for w in &spec.wells {
        // Hessians at the critical point are diagonal: diag(2 c_i).
        let mut det = 1.0;
        for d in 0..spec.dim {
            det *= (cp.beta - cp.mu2) * 2.0 * w.p[d] + (cp.beta - cp.mu1) * 2.0 * w.q[d];
        }
        dets.push(det);
    }
    let h2_pass = dets.iter().all(|d| d.abs() > 1e-12);
    let (h3_sum, h3_pass, mass_side) = if spec.dim == 2 {
        let s1 = cp.sigma1 * cp.sigma1;
        let s2 = cp.sigma2 * cp.sigma2;
        let sum: f64 = spec
            .wells
            .iter()
            .flat_map(|w| w.p.iter().zip(&w.q).map(move |(p, q)| s1 * p + s2 * q))
            .sum();
        let pass = sum.abs() > 1e-12;
        let side = if !pass {
            None
        } else if sum > 0.0 {
            Some(MassSide::BelowCritical)
        } else {
            Some(MassSide::AboveCritical)
        };
        (Some(sum), Some(pass), side)
    } else {
        (None, None, None)
    };
    HypothesisReport {
        well_determinants: dets,
        h2_pass,
        h3_sum,
        h3_pass,
        mass_side,
    }
}

/// The (H3) sum for a single well: Σ_i (σ₁² p_li + σ₂² q_li).
pub fn well_coefficient_sum(spec: &PotentialSpec, cp: &CouplingParams, well: usize) -> f64 {
    let w = &spec.wells[well];
    let s1 = cp.sigma1 * cp.sigma1;
    let s2 = cp.sigma2 * cp.sigma2;
    w.p.iter().zip(&w.q).map(|(p, q)| s1 * p + s2 * q).sum()
}
