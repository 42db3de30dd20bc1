//! Uniform radial and tensor grids, finite-difference stencils, quadrature,
//! and the two-component field container with its binary format.

use std::io::{Read, Write};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("grid mismatch: {0}")]
    Mismatch(String),
    #[error("bad field file: {0}")]
    Format(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub const MAX_DIM: usize = 3;
pub type Point = [f64; MAX_DIM];

/// Surface area of the unit sphere in `dim` dimensions (|S^{dim-1}|).
pub fn unit_sphere_area(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => 2.0 * std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI,
        _ => panic!("unsupported dimension {dim}"),
    }
}

/// Uniform radial grid on [0, r_max] with n+1 nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    pub r_max: f64,
    pub n: usize,
}

impl RadialGrid {
    pub fn new(r_max: f64, n: usize) -> Self {
        assert!(n >= 8 && r_max > 0.0);
        RadialGrid { r_max, n }
    }

    #[inline]
    pub fn h(&self) -> f64 {
        self.r_max / self.n as f64
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        i as f64 * self.h()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n).map(|i| self.node(i))
    }

    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// ∫_{R^dim} f(|x|) dx by surface-weighted trapezoid on the radial samples.
    /// Decaying tails kill the Euler-Maclaurin terms at r_max; in dim 2 the
    /// weighted integrand r·f is odd at the origin, so the h² and h⁴ endpoint
    /// corrections there are applied explicitly (f must be even in r).
    pub fn integrate_radial(&self, values: &[f64], dim: usize) -> f64 {
        assert_eq!(values.len(), self.len());
        let h = self.h();
        let area = unit_sphere_area(dim);
        let mut s = 0.0;
        for i in 0..=self.n {
            let r = self.node(i);
            let w = if i == 0 || i == self.n { 0.5 } else { 1.0 };
            s += w * values[i] * r.powi(dim as i32 - 1);
        }
        let mut total = area * h * s;
        if dim == 2 {
            // G(r) = area·r·f(r): G'(0) = area·f(0), G'''(0) = 3·area·f''(0).
            let f0 = values[0];
            let fpp = (-30.0 * values[0] + 32.0 * values[1] - 2.0 * values[2]) / (12.0 * h * h);
            total += h * h / 12.0 * area * f0 - h.powi(4) / 720.0 * 3.0 * area * fpp;
        }
        total
    }
}

/// Sliding 4-point Lagrange cubic on a uniform radial grid with even or odd
/// reflection through r = 0. `eval` returns f(r); `eval_deriv` returns f'(r)
/// by analytic differentiation of the local cubic.
#[derive(Debug, Clone)]
pub struct RadialInterpolant {
    pub grid: RadialGrid,
    pub values: Vec<f64>,
    odd: bool,
}

impl RadialInterpolant {
    /// Interpolant of an even radial function (values, densities).
    pub fn new(grid: RadialGrid, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.len());
        RadialInterpolant {
            grid,
            values,
            odd: false,
        }
    }

    /// Interpolant of an odd radial function (radial derivatives); f(0) = 0.
    pub fn new_odd(grid: RadialGrid, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.len());
        RadialInterpolant {
            grid,
            values,
            odd: true,
        }
    }

    #[inline]
    fn sample(&self, i: i64) -> f64 {
        // Parity reflection at 0; zero beyond r_max (tails are exponentially small).
        let n = self.grid.n as i64;
        let j = i.abs();
        if j > n {
            0.0
        } else if self.odd && i < 0 {
            -self.values[j as usize]
        } else {
            self.values[j as usize]
        }
    }

    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        let r = r.abs();
        let h = self.grid.h();
        if r >= self.grid.r_max {
            return 0.0;
        }
        let t = r / h;
        let i0 = (t.floor() as i64 - 1).max(-1);
        let s = t - (i0 as f64); // in [1, 2) generically
        let f0 = self.sample(i0);
        let f1 = self.sample(i0 + 1);
        let f2 = self.sample(i0 + 2);
        let f3 = self.sample(i0 + 3);
        // Lagrange basis on nodes 0,1,2,3 evaluated at s.
        let a = s - 1.0;
        let b = s - 2.0;
        let c = s - 3.0;
        -a * b * c * f0 / 6.0 + s * b * c * f1 * 0.5 - s * a * c * f2 * 0.5 + s * a * b * f3 / 6.0
    }

    /// df/dr at radius r ≥ 0.
    pub fn eval_deriv(&self, r: f64) -> f64 {
        let r = r.abs();
        let h = self.grid.h();
        if r >= self.grid.r_max {
            return 0.0;
        }
        let t = r / h;
        let i0 = (t.floor() as i64 - 1).max(-1);
        let s = t - (i0 as f64);
        let f = [
            self.sample(i0),
            self.sample(i0 + 1),
            self.sample(i0 + 2),
            self.sample(i0 + 3),
        ];
        // d/ds of the cubic Lagrange basis at s, nodes 0..3.
        let d0 = ((s - 1.0) * (s - 2.0) + (s - 1.0) * (s - 3.0) + (s - 2.0) * (s - 3.0)) / -6.0;
        let d1 = (s * (s - 2.0) + s * (s - 3.0) + (s - 2.0) * (s - 3.0)) * 0.5;
        let d2 = (s * (s - 1.0) + s * (s - 3.0) + (s - 1.0) * (s - 3.0)) * -0.5;
        let d3 = (s * (s - 1.0) + s * (s - 2.0) + (s - 1.0) * (s - 2.0)) / 6.0;
        (f[0] * d0 + f[1] * d1 + f[2] * d2 + f[3] * d3) / h
    }
}

/// Tensor-product grid with uniform spacing `h` in every axis.
/// Index layout is row-major with x fastest: `idx = (iz*ny + iy)*nx + ix`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TensorGrid {
    pub dim: usize,
    pub n: [usize; MAX_DIM],
    pub x0: Point,
    pub h: f64,
}

impl TensorGrid {
    pub fn new(dim: usize, n: [usize; MAX_DIM], x0: Point, h: f64) -> Self {
        assert!((1..=MAX_DIM).contains(&dim));
        let mut nn = n;
        for d in dim..MAX_DIM {
            nn[d] = 1;
        }
        TensorGrid { dim, n: nn, x0, h }
    }

    pub fn total(&self) -> usize {
        self.n[..self.dim].iter().product::<usize>().max(1) * 1
    }

    #[inline]
    pub fn index(&self, c: [usize; MAX_DIM]) -> usize {
        match self.dim {
            1 => c[0],
            2 => c[1] * self.n[0] + c[0],
            _ => (c[2] * self.n[1] + c[1]) * self.n[0] + c[0],
        }
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; MAX_DIM] {
        match self.dim {
            1 => [idx, 0, 0],
            2 => [idx % self.n[0], idx / self.n[0], 0],
            _ => {
                let nx = self.n[0];
                let ny = self.n[1];
                [idx % nx, (idx / nx) % ny, idx / (nx * ny)]
            }
        }
    }

    #[inline]
    pub fn point(&self, c: [usize; MAX_DIM]) -> Point {
        let mut p = [0.0; MAX_DIM];
        for d in 0..self.dim {
            p[d] = self.x0[d] + c[d] as f64 * self.h;
        }
        p
    }

    pub fn upper(&self) -> Point {
        let mut p = [0.0; MAX_DIM];
        for d in 0..self.dim {
            p[d] = self.x0[d] + (self.n[d] - 1) as f64 * self.h;
        }
        p
    }

    pub fn contains(&self, p: &Point, margin: f64) -> bool {
        let hi = self.upper();
        (0..self.dim).all(|d| p[d] >= self.x0[d] + margin && p[d] <= hi[d] - margin)
    }

    /// Cell volume element h^dim.
    pub fn cell(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }
}

/// Discrete Laplacian: fourth-order five-point stencils per axis in the
/// interior with odd reflection through the Dirichlet boundary layer
/// (outermost node sheet is held at zero). Symmetric on fields vanishing at
/// the boundary layer.
pub fn laplacian(grid: &TensorGrid, f: &[f64], out: &mut [f64]) {
    assert_eq!(f.len(), grid.total());
    assert_eq!(out.len(), grid.total());
    let h2 = grid.h * grid.h;
    let c0 = -30.0 / (12.0 * h2);
    let c1 = 16.0 / (12.0 * h2);
    let c2 = -1.0 / (12.0 * h2);
    let dim = grid.dim;
    for i in out.iter_mut() {
        *i = 0.0;
    }
    for idx in 0..grid.total() {
        let c = grid.coords(idx);
        if on_boundary(grid, &c) {
            continue;
        }
        let mut acc = 0.0;
        for d in 0..dim {
            let n = grid.n[d];
            let i = c[d];
            // Samples at offsets -2..2 with odd reflection about the zero
            // boundary sheet (nodes 0 and n-1).
            let get = |off: i64| -> f64 {
                let j = i as i64 + off;
                let (j, sgn) = if j < 0 {
                    (-j, -1.0)
                } else if j as usize > n - 1 {
                    (2 * (n as i64 - 1) - j, -1.0)
                } else {
                    (j, 1.0)
                };
                let mut cc = c;
                cc[d] = j as usize;
                sgn * f[grid.index(cc)]
            };
            acc += c2 * get(-2) + c1 * get(-1) + c0 * f[idx] + c1 * get(1) + c2 * get(2);
        }
        out[idx] = acc;
    }
}

#[inline]
pub fn on_boundary(grid: &TensorGrid, c: &[usize; MAX_DIM]) -> bool {
    (0..grid.dim).any(|d| c[d] == 0 || c[d] == grid.n[d] - 1)
}

/// Fourth-order central gradient component along axis `d`, odd-reflected at
/// the boundary like the Laplacian. Boundary sheet entries are zero.
pub fn gradient_axis(grid: &TensorGrid, f: &[f64], d: usize, out: &mut [f64]) {
    let h = grid.h;
    let c1 = 8.0 / (12.0 * h);
    let c2 = -1.0 / (12.0 * h);
    for i in out.iter_mut() {
        *i = 0.0;
    }
    let n = grid.n[d];
    for idx in 0..grid.total() {
        let c = grid.coords(idx);
        if on_boundary(grid, &c) {
            continue;
        }
        let i = c[d];
        let get = |off: i64| -> f64 {
            let j = i as i64 + off;
            let (j, sgn) = if j < 0 {
                (-j, -1.0)
            } else if j as usize > n - 1 {
                (2 * (n as i64 - 1) - j, -1.0)
            } else {
                (j, 1.0)
            };
            let mut cc = c;
            cc[d] = j as usize;
            sgn * f[grid.index(cc)]
        };
        out[idx] = c2 * (get(2) - get(-2)) + c1 * (get(1) - get(-1));
    }
}

/// Bilinear (dim=2) / trilinear (dim=3) interpolation of a grid sample.
pub fn interp_linear(grid: &TensorGrid, f: &[f64], p: &Point) -> f64 {
    let mut base = [0usize; MAX_DIM];
    let mut frac = [0.0; MAX_DIM];
    for d in 0..grid.dim {
        let t = (p[d] - grid.x0[d]) / grid.h;
        let i = t.floor().max(0.0) as usize;
        let i = i.min(grid.n[d] - 2);
        base[d] = i;
        frac[d] = (t - i as f64).clamp(0.0, 1.0);
    }
    let mut acc = 0.0;
    let corners = 1usize << grid.dim;
    for k in 0..corners {
        let mut c = base;
        let mut w = 1.0;
        for d in 0..grid.dim {
            if (k >> d) & 1 == 1 {
                c[d] += 1;
                w *= frac[d];
            } else {
                w *= 1.0 - frac[d];
            }
        }
        acc += w * f[grid.index(c)];
    }
    acc
}

/// Two-component scalar field pair (u, v) on a tensor grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2 {
    pub grid: TensorGrid,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

const FIELD2_MAGIC: &[u8; 4] = b"CNF2";

impl Field2 {
    pub fn zeros(grid: TensorGrid) -> Self {
        let n = grid.total();
        Field2 {
            grid,
            u: vec![0.0; n],
            v: vec![0.0; n],
        }
    }

    pub fn same_grid(&self, other: &Field2) -> bool {
        self.grid == other.grid
    }

    pub fn scale_values(&mut self, factor: f64) {
        for x in self.u.iter_mut().chain(self.v.iter_mut()) {
            *x *= factor;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.u
            .iter()
            .chain(self.v.iter())
            .fold(0.0f64, |m, &x| m.max(x.abs()))
    }

    /// Binary layout: magic, dim (u32), nx[,ny[,nz]] (u32 each), x0 (dim f64),
    /// h (f64), then u and v row-major as little-endian f64.
    pub fn write_binary<W: Write>(&self, w: &mut W) -> Result<(), GridError> {
        w.write_all(FIELD2_MAGIC)?;
        w.write_all(&(self.grid.dim as u32).to_le_bytes())?;
        for d in 0..self.grid.dim {
            w.write_all(&(self.grid.n[d] as u32).to_le_bytes())?;
        }
        for d in 0..self.grid.dim {
            w.write_all(&self.grid.x0[d].to_le_bytes())?;
        }
        w.write_all(&self.grid.h.to_le_bytes())?;
        for x in self.u.iter().chain(self.v.iter()) {
            w.write_all(&x.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(r: &mut R) -> Result<Field2, GridError> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != FIELD2_MAGIC {
            return Err(GridError::Format("bad magic".into()));
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)?;
        let dim = u32::from_le_bytes(b4) as usize;
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(GridError::Format(format!("bad dim {dim}")));
        }
        let mut n = [1usize; MAX_DIM];
        for nd in n.iter_mut().take(dim) {
            r.read_exact(&mut b4)?;
            *nd = u32::from_le_bytes(b4) as usize;
        }
        let mut b8 = [0u8; 8];
        let mut x0 = [0.0; MAX_DIM];
        for x in x0.iter_mut().take(dim) {
            r.read_exact(&mut b8)?;
            *x = f64::from_le_bytes(b8);
        }
        r.read_exact(&mut b8)?;
        let h = f64::from_le_bytes(b8);
        let grid = TensorGrid::new(dim, n, x0, h);
        let total = grid.total();
        let mut read_vec = |len: usize| -> Result<Vec<f64>, GridError> {
            let mut v = Vec::with_capacity(len);
            for _ in 0..len {
                r.read_exact(&mut b8)?;
                v.push(f64::from_le_bytes(b8));
            }
            Ok(v)
        };
        let u = read_vec(total)?;
        let v = read_vec(total)?;
        Ok(Field2 { grid, u, v })
    }

    /// CSV rows `x[,y[,z]],u,v`, one per node.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<(), GridError> {
        let headers: &[&str] = match self.grid.dim {
            1 => &["x"],
            2 => &["x", "y"],
            _ => &["x", "y", "z"],
        };
        writeln!(w, "{},u,v", headers.join(","))?;
        for idx in 0..self.grid.total() {
            let p = self.grid.point(self.grid.coords(idx));
            for pd in p.iter().take(self.grid.dim) {
                write!(w, "{pd},")?;
            }
            writeln!(w, "{},{}", self.u[idx], self.v[idx])?;
        }
        Ok(())
    }
}
