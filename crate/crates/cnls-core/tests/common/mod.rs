//! Shared test oracles, independent of the library's solve paths.
//!
//! The shooting oracle integrates the radial ground-state ODE with an
//! adaptive RKF45 scheme and bisects on w(0); mass-type integrals are
//! accumulated as extra ODE components along the trajectory.

#![allow(dead_code)]

/// Result of one oracle run.
pub struct ShootingOracle {
    pub w0: f64,
    /// ∫ w² dx over R^dim.
    pub mass: f64,
    /// ∫ |x|² w² dx.
    pub second_moment: f64,
    /// ∫ w⁴ dx.
    pub quartic: f64,
}

const DIVERGED: f64 = -1.0;
const DECAYING: f64 = 1.0;

struct Traj {
    sign: f64,
    mass: f64,
    moment: f64,
    quartic: f64,
}

fn rkf45_trajectory(dim: usize, a: f64, r_end: f64) -> Traj {
    let nu = (dim - 1) as f64;
    // State: [w, p, m2, m2r2, m4].
    let deriv = |r: f64, y: &[f64; 5]| -> [f64; 5] {
        let (w, p) = (y[0], y[1]);
        let dp = if r < 1e-9 {
            (w - w * w * w) / dim as f64
        } else {
            -nu / r * p + w - w * w * w
        };
        let rw = r.powi(dim as i32 - 1);
        [p, dp, w * w * rw, w * w * r * r * rw, w.powi(4) * rw]
    };
    let r0 = 1e-8;
    let wpp0 = (a - a * a * a) / dim as f64;
    // Accumulators start from their analytic [0, r0] contributions.
    let d = dim as f64;
    let mut y = [
        a + 0.5 * wpp0 * r0 * r0,
        wpp0 * r0,
        a * a * r0.powi(dim as i32) / d,
        a * a * r0.powi(dim as i32 + 2) / (d + 2.0),
        a.powi(4) * r0.powi(dim as i32) / d,
    ];
    let mut r = r0;
    let mut h = 1e-5;
    let tol = 1e-13;
    while r < r_end {
        if r + h > r_end {
            h = r_end - r;
        }
        let k1 = deriv(r, &y);
        let add = |y: &[f64; 5], terms: &[(f64, &[f64; 5])]| -> [f64; 5] {
            let mut out = *y;
            for (c, k) in terms {
                for i in 0..5 {
                    out[i] += h * c * k[i];
                }
            }
            out
        };
        let k2 = deriv(r + h / 4.0, &add(&y, &[(0.25, &k1)]));
        let k3 = deriv(
            r + 3.0 * h / 8.0,
            &add(&y, &[(3.0 / 32.0, &k1), (9.0 / 32.0, &k2)]),
        );
        let k4 = deriv(
            r + 12.0 * h / 13.0,
            &add(
                &y,
                &[
                    (1932.0 / 2197.0, &k1),
                    (-7200.0 / 2197.0, &k2),
                    (7296.0 / 2197.0, &k3),
                ],
            ),
        );
        let k5 = deriv(
            r + h,
            &add(
                &y,
                &[
                    (439.0 / 216.0, &k1),
                    (-8.0, &k2),
                    (3680.0 / 513.0, &k3),
                    (-845.0 / 4104.0, &k4),
                ],
            ),
        );
        let k6 = deriv(
            r + h / 2.0,
            &add(
                &y,
                &[
                    (-8.0 / 27.0, &k1),
                    (2.0, &k2),
                    (-3544.0 / 2565.0, &k3),
                    (1859.0 / 4104.0, &k4),
                    (-11.0 / 40.0, &k5),
                ],
            ),
        );
        let y4 = add(
            &y,
            &[
                (25.0 / 216.0, &k1),
                (1408.0 / 2565.0, &k3),
                (2197.0 / 4104.0, &k4),
                (-1.0 / 5.0, &k5),
            ],
        );
        let y5 = add(
            &y,
            &[
                (16.0 / 135.0, &k1),
                (6656.0 / 12825.0, &k3),
                (28561.0 / 56430.0, &k4),
                (-9.0 / 50.0, &k5),
                (2.0 / 55.0, &k6),
            ],
        );
        let err = (y4[0] - y5[0]).abs().max((y4[1] - y5[1]).abs());
        if err > tol && h > 1e-10 {
            h *= 0.5;
            continue;
        }
        y = y5;
        r += h;
        if err < tol / 64.0 {
            h = (h * 2.0).min(0.02);
        }
        if y[0] <= 0.0 {
            return Traj {
                sign: DIVERGED,
                mass: y[2],
                moment: y[3],
                quartic: y[4],
            };
        }
        if y[1] > 0.0 && y[0] < 0.5 * a {
            return Traj {
                sign: DECAYING,
                mass: y[2],
                moment: y[3],
                quartic: y[4],
            };
        }
    }
    Traj {
        sign: DECAYING,
        mass: y[2],
        moment: y[3],
        quartic: y[4],
    }
}

/// Bisection on w(0) with the adaptive integrator; returns w(0) and the
/// surface-weighted integrals accumulated along the converged trajectory.
pub fn shooting_oracle(dim: usize) -> ShootingOracle {
    let r_end = 30.0;
    let mut lo = 1.01;
    let mut hi = 6.0;
    assert!(rkf45_trajectory(dim, lo, r_end).sign > 0.0);
    assert!(rkf45_trajectory(dim, hi, r_end).sign < 0.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if rkf45_trajectory(dim, mid, r_end).sign > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let a = 0.5 * (lo + hi);
    let t = rkf45_trajectory(dim, a, r_end);
    let area = match dim {
        1 => 2.0,
        2 => 2.0 * std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI,
        _ => unreachable!(),
    };
    ShootingOracle {
        w0: a,
        mass: area * t.mass,
        second_moment: area * t.moment,
        quartic: area * t.quartic,
    }
}
