//! Small dense/banded direct solvers and a matrix-free GMRES.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("singular matrix (pivot {pivot:.3e} at column {col})")]
    Singular { col: usize, pivot: f64 },
    #[error("GMRES stagnated: relative residual {residual:.3e} after {iters} iterations")]
    GmresStagnation { residual: f64, iters: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Banded matrix in column-major LAPACK-style band storage with room for
/// pivoting fill-in. Column `j` holds rows `j - ku_ext ..= j + kl` where
/// `ku_ext = kl + ku`.
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku_ext: usize,
    ldab: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        let ku_ext = kl + ku;
        let ldab = 2 * kl + ku + 1;
        BandedMatrix {
            n,
            kl,
            ku_ext,
            ldab,
            data: vec![0.0; n * ldab],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i + self.ku_ext >= j && i <= j + self.kl);
        j * self.ldab + (i + self.ku_ext - j)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[self.idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    /// In-place LU factorization with partial pivoting.
    pub fn factor(mut self) -> Result<BandedLu, LinalgError> {
        let n = self.n;
        let kl = self.kl;
        let kue = self.ku_ext;
        let mut ipiv = vec![0usize; n];
        for j in 0..n {
            let imax = (j + kl).min(n - 1);
            let mut p = j;
            let mut pv = self.get(j, j).abs();
            for i in (j + 1)..=imax {
                let v = self.get(i, j).abs();
                if v > pv {
                    pv = v;
                    p = i;
                }
            }
            if pv == 0.0 {
                return Err(LinalgError::Singular { col: j, pivot: 0.0 });
            }
            ipiv[j] = p;
            if p != j {
                let cmax = (j + kue).min(n - 1);
                for c in j..=cmax {
                    let a = self.get(j, c);
                    let b = self.get(p, c);
                    self.set(j, c, b);
                    self.set(p, c, a);
                }
            }
            let pivot = self.get(j, j);
            let cmax = (j + kue).min(n - 1);
            for i in (j + 1)..=imax {
                let l = self.get(i, j) / pivot;
                self.set(i, j, l);
                if l != 0.0 {
                    for c in (j + 1)..=cmax {
                        let v = self.get(i, c) - l * self.get(j, c);
                        self.set(i, c, v);
                    }
                }
            }
        }
        Ok(BandedLu { mat: self, ipiv })
    }
}

pub struct BandedLu {
    mat: BandedMatrix,
    ipiv: Vec<usize>,
}

impl BandedLu {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.mat.n;
        let kl = self.mat.kl;
        let kue = self.mat.ku_ext;
        let mut x = b.to_vec();
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                x.swap(j, p);
            }
            let xj = x[j];
            if xj != 0.0 {
                let imax = (j + kl).min(n - 1);
                for i in (j + 1)..=imax {
                    x[i] -= self.mat.get(i, j) * xj;
                }
            }
        }
        for j in (0..n).rev() {
            let cmax = (j + kue).min(n - 1);
            let mut s = x[j];
            for c in (j + 1)..=cmax {
                s -= self.mat.get(j, c) * x[c];
            }
            x[j] = s / self.mat.get(j, j);
        }
        x
    }
}

/// Dense column-major matrix with LU solve, for small systems and test oracles.
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.n + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[j * self.n + i] = v;
    }

    pub fn factor(mut self) -> Result<DenseLu, LinalgError> {
        let n = self.n;
        let mut ipiv = vec![0usize; n];
        for j in 0..n {
            let mut p = j;
            let mut pv = self.get(j, j).abs();
            for i in (j + 1)..n {
                let v = self.get(i, j).abs();
                if v > pv {
                    pv = v;
                    p = i;
                }
            }
            if pv == 0.0 {
                return Err(LinalgError::Singular { col: j, pivot: 0.0 });
            }
            ipiv[j] = p;
            if p != j {
                for c in 0..n {
                    let a = self.get(j, c);
                    let b = self.get(p, c);
                    self.set(j, c, b);
                    self.set(p, c, a);
                }
            }
            let pivot = self.get(j, j);
            for i in (j + 1)..n {
                let l = self.get(i, j) / pivot;
                self.set(i, j, l);
                if l != 0.0 {
                    for c in (j + 1)..n {
                        let v = self.get(i, c) - l * self.get(j, c);
                        self.set(i, c, v);
                    }
                }
            }
        }
        Ok(DenseLu { mat: self, ipiv })
    }
}

pub struct DenseLu {
    mat: DenseMatrix,
    ipiv: Vec<usize>,
}

impl DenseLu {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.mat.n;
        let mut x = b.to_vec();
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                x.swap(j, p);
            }
            let xj = x[j];
            if xj != 0.0 {
                for i in (j + 1)..n {
                    x[i] -= self.mat.get(i, j) * xj;
                }
            }
        }
        for j in (0..n).rev() {
            let mut s = x[j];
            for c in (j + 1)..n {
                s -= self.mat.get(j, c) * x[c];
            }
            x[j] = s / self.mat.get(j, j);
        }
        x
    }
}

/// Eigendecomposition of a small symmetric matrix by cyclic Jacobi rotations.
/// Returns (eigenvalues, eigenvectors as columns), unsorted.
pub fn jacobi_eigh(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[i][j] * m[i][j];
            }
        }
        if off.sqrt() < 1e-14 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p][q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let evals = (0..n).map(|i| m[i][i]).collect();
    (evals, v)
}

/// Matrix-free linear operator on flat vectors.
pub trait LinearOp {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
}

pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub struct GmresResult {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub rel_residual: f64,
}

/// Right-preconditioned GMRES without restart. Solves `A x = b` to relative
/// residual `tol`; `precond` applies an approximate inverse of A.
pub fn gmres<A: LinearOp + ?Sized, M: LinearOp + ?Sized>(
    a: &A,
    precond: Option<&M>,
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<GmresResult, LinalgError> {
    let n = a.dim();
    if b.len() != n {
        return Err(LinalgError::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok(GmresResult {
            x: vec![0.0; n],
            iterations: 0,
            rel_residual: 0.0,
        });
    }
    let m = max_iter.min(n);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    basis.push(b.iter().map(|x| x / bnorm).collect());
    // Hessenberg in packed columns, plus Givens rotation state.
    let mut h: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut cs: Vec<f64> = Vec::with_capacity(m);
    let mut sn: Vec<f64> = Vec::with_capacity(m);
    let mut g = vec![0.0; m + 1];
    g[0] = bnorm;
    let mut scratch = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut iters = 0;
    let mut rel = 1.0;
    for j in 0..m {
        iters = j + 1;
        match precond {
            Some(p) => {
                p.apply(&basis[j], &mut scratch);
                a.apply(&scratch, &mut w);
            }
            None => a.apply(&basis[j], &mut w),
        }
        let mut hj = vec![0.0; j + 2];
        for (i, vi) in basis.iter().enumerate().take(j + 1) {
            let hij = dot(&w, vi);
            hj[i] = hij;
            axpy(-hij, vi, &mut w);
        }
        let wn = norm2(&w);
        hj[j + 1] = wn;
        if wn > 1e-300 {
            basis.push(w.iter().map(|x| x / wn).collect());
        } else {
            basis.push(vec![0.0; n]);
        }
        // Apply accumulated Givens rotations, then generate a new one.
        for i in 0..j {
            let t = cs[i] * hj[i] + sn[i] * hj[i + 1];
            hj[i + 1] = -sn[i] * hj[i] + cs[i] * hj[i + 1];
            hj[i] = t;
        }
        let denom = (hj[j] * hj[j] + hj[j + 1] * hj[j + 1]).sqrt();
        let (c, s) = if denom == 0.0 {
            (1.0, 0.0)
        } else {
            (hj[j] / denom, hj[j + 1] / denom)
        };
        cs.push(c);
        sn.push(s);
        hj[j] = c * hj[j] + s * hj[j + 1];
        hj[j + 1] = 0.0;
        let gj = g[j];
        g[j] = c * gj;
        g[j + 1] = -s * gj;
        h.push(hj);
        rel = g[j + 1].abs() / bnorm;
        if rel < tol {
            break;
        }
    }
    // Back-substitute for the Krylov coefficients.
    let k = iters;
    let mut y = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = g[i];
        for c in (i + 1)..k {
            s -= h[c][i] * y[c];
        }
        y[i] = s / h[i][i];
    }
    let mut z = vec![0.0; n];
    for (i, yi) in y.iter().enumerate() {
        axpy(*yi, &basis[i], &mut z);
    }
    let x = match precond {
        Some(p) => {
            p.apply(&z, &mut scratch);
            scratch.clone()
        }
        None => z,
    };
    if rel >= tol && rel > 1e-8 {
        return Err(LinalgError::GmresStagnation {
            residual: rel,
            iters,
        });
    }
    Ok(GmresResult {
        x,
        iterations: iters,
        rel_residual: rel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct DenseOp(Vec<Vec<f64>>);
    impl LinearOp for DenseOp {
        fn dim(&self) -> usize {
            self.0.len()
        }
        fn apply(&self, x: &[f64], y: &mut [f64]) {
            for (i, row) in self.0.iter().enumerate() {
                y[i] = dot(row, x);
            }
        }
    }

    #[test]
    fn banded_lu_matches_dense() {
        let n = 12;
        let kl = 2;
        let ku = 2;
        let mut band = BandedMatrix::new(n, kl, ku);
        let mut dense = DenseMatrix::zeros(n);
        let mut seed = 1u64;
        let mut rnd = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 33) as f64) / (u32::MAX as f64) - 0.5
        };
        for i in 0..n {
            for j in 0..n {
                if j + kl >= i && i + ku >= j {
                    let v = rnd() + if i == j { 4.0 } else { 0.0 };
                    band.set(i, j, v);
                    dense.set(i, j, v);
                }
            }
        }
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let xb = band.factor().unwrap().solve(&b);
        let xd = dense.factor().unwrap().solve(&b);
        for (a, b) in xb.iter().zip(&xd) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn jacobi_eigh_small() {
        let a = vec![
            vec![2.0, 1.0, 0.0],
            vec![1.0, 3.0, 0.5],
            vec![0.0, 0.5, 1.0],
        ];
        let (evals, vecs) = jacobi_eigh(&a);
        // Check A v = λ v for each pair.
        for k in 0..3 {
            for i in 0..3 {
                let av: f64 = (0..3).map(|j| a[i][j] * vecs[j][k]).sum();
                assert!((av - evals[k] * vecs[i][k]).abs() < 1e-10);
            }
        }
        let trace: f64 = evals.iter().sum();
        assert!((trace - 6.0).abs() < 1e-12);
    }

    #[test]
    fn gmres_solves_spd_system() {
        let n = 30;
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            a[i][i] = 4.0;
            if i > 0 {
                a[i][i - 1] = -1.0;
                a[i - 1][i] = -1.0;
            }
        }
        let op = DenseOp(a.clone());
        let b: Vec<f64> = (0..n).map(|i| ((i * 7 % 5) as f64) - 2.0).collect();
        let res = gmres::<_, DenseOp>(&op, None, &b, 1e-12, 200).unwrap();
        let mut ax = vec![0.0; n];
        op.apply(&res.x, &mut ax);
        for (l, r) in ax.iter().zip(&b) {
            assert!((l - r).abs() < 1e-9);
        }
    }
}
