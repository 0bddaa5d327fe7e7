//! Dense complex linear algebra for the Liouvillian solver: Hessenberg
//! reduction with shifted O(n²) resolvent solves, inverse iteration for the
//! steady state, LU solves and a Jacobi Hermitian eigensolver for density
//! matrix positivity checks.

use crate::error::{Error, Result};
use crate::C64;
use rayon::prelude::*;

/// Row-major square complex matrix.
#[derive(Clone, Debug)]
pub struct CMatrix {
    pub n: usize,
    pub data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix { n, data: vec![C64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = C64::new(1.0, 0.0);
        }
        m
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Conjugate-transpose matvec `A† x`.
    pub fn matvec_adj(&self, x: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.n];
        for (i, &xi) in x.iter().enumerate() {
            for (j, o) in out.iter_mut().enumerate() {
                *o += self.at(i, j).conj() * xi;
            }
        }
        out
    }

    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        out.data.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            for k in 0..n {
                let a = self.at(i, k);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                for (o, b) in row.iter_mut().zip(orow) {
                    *o += a * b;
                }
            }
        });
        out
    }

    pub fn dagger(&self) -> CMatrix {
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                *out.at_mut(j, i) = self.at(i, j).conj();
            }
        }
        out
    }

    /// Max row sum of absolute values.
    pub fn inf_norm(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|x| x.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

pub fn vec_norm(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Hessenberg decomposition `A = Q H Q†` (Householder reflections).
pub struct Hessenberg {
    pub h: CMatrix,
    pub q: CMatrix,
}

pub fn hessenberg(a: &CMatrix) -> Hessenberg {
    let n = a.n;
    let mut h = a.clone();
    let mut q = CMatrix::identity(n);
    let mut v = vec![C64::new(0.0, 0.0); n];
    for k in 0..n.saturating_sub(2) {
        // Householder vector for column k below the subdiagonal
        let m = n - k - 1;
        let mut norm2 = 0.0f64;
        for (i, vi) in v[..m].iter_mut().enumerate() {
            *vi = h.at(k + 1 + i, k);
            norm2 += vi.norm_sqr();
        }
        let norm = norm2.sqrt();
        if norm <= 1e-300 {
            continue;
        }
        let alpha = v[0];
        let phase = if alpha.norm() > 0.0 { alpha / alpha.norm() } else { C64::new(1.0, 0.0) };
        v[0] += phase * norm;
        let vv: f64 = v[..m].iter().map(|x| x.norm_sqr()).sum();
        if vv <= 1e-300 {
            continue;
        }
        let tau = 2.0 / vv;

        // left: H <- P H on rows k+1.., columns k..
        let mut w = vec![C64::new(0.0, 0.0); n - k];
        for (i, vi) in v[..m].iter().enumerate() {
            let vi = vi.conj();
            let row = &h.data[(k + 1 + i) * n + k..(k + 1 + i) * n + n];
            for (wj, r) in w.iter_mut().zip(row) {
                *wj += vi * r;
            }
        }
        {
            let rows: Vec<&mut [C64]> = h.data[(k + 1) * n..].chunks_mut(n).take(m).collect();
            rows.into_par_iter().enumerate().for_each(|(i, row)| {
                let f = tau * v[i];
                for (j, wj) in w.iter().enumerate() {
                    row[k + j] -= f * wj;
                }
            });
        }
        // right: H <- H P on columns k+1.., all rows
        h.data.par_chunks_mut(n).for_each(|row| {
            let mut s = C64::new(0.0, 0.0);
            for (j, vj) in v[..m].iter().enumerate() {
                s += row[k + 1 + j] * vj;
            }
            let f = tau * s;
            for (j, vj) in v[..m].iter().enumerate() {
                row[k + 1 + j] -= f * vj.conj();
            }
        });
        // accumulate Q <- Q P
        q.data.par_chunks_mut(n).for_each(|row| {
            let mut s = C64::new(0.0, 0.0);
            for (j, vj) in v[..m].iter().enumerate() {
                s += row[k + 1 + j] * vj;
            }
            let f = tau * s;
            for (j, vj) in v[..m].iter().enumerate() {
                row[k + 1 + j] -= f * vj.conj();
            }
        });
        // clean the annihilated entries
        for i in 1..m {
            *h.at_mut(k + 1 + i, k) = C64::new(0.0, 0.0);
        }
    }
    Hessenberg { h, q }
}

impl Hessenberg {
    /// Solve `(A + shift·I) x = b` in O(n²) via the Hessenberg form.
    pub fn solve_shifted(&self, shift: C64, b: &[C64]) -> Result<Vec<C64>> {
        let y = self.q.matvec_adj(b);
        let z = hessenberg_shifted_solve(&self.h, shift, y)?;
        Ok(self.q.matvec(&z))
    }
}

/// Solve `(H + shift·I) x = y` for upper-Hessenberg `H` by Gaussian
/// elimination with adjacent-row pivoting.
pub fn hessenberg_shifted_solve(h: &CMatrix, shift: C64, mut y: Vec<C64>) -> Result<Vec<C64>> {
    let n = h.n;
    // band storage: row i holds columns i-1..n of (H + shift)
    let mut rows: Vec<Vec<C64>> = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(1);
            let mut r: Vec<C64> = h.row(i)[lo..].to_vec();
            r[i - lo] += shift;
            r
        })
        .collect();
    // forward elimination of the subdiagonal
    for i in 0..n - 1 {
        // rows[i] currently starts at column i; rows[i+1] starts at column i
        let piv = rows[i][0];
        let sub = rows[i + 1][0];
        if sub.norm() > piv.norm() {
            rows.swap(i, i + 1);
            y.swap(i, i + 1);
            // after swap both start at column i
        }
        let piv = rows[i][0];
        if piv.norm() <= 1e-300 {
            return Err(Error::SolverFailure("zero pivot in Hessenberg solve".into()));
        }
        let m = rows[i + 1][0] / piv;
        if m.norm() > 0.0 {
            let (head, tail) = rows.split_at_mut(i + 1);
            let ri = &head[i];
            let r1 = &mut tail[0];
            for j in 1..ri.len() {
                r1[j] -= m * ri[j];
            }
            let yi = y[i];
            y[i + 1] -= m * yi;
        }
        // the col-i entry is now eliminated; drop it so rows[i+1] starts at i+1
        rows[i + 1].remove(0);
    }
    // back substitution
    let mut x = vec![C64::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for (j, r) in rows[i].iter().enumerate().skip(1) {
            s -= r * x[i + j];
        }
        let piv = rows[i][0];
        if piv.norm() <= 1e-300 {
            return Err(Error::SolverFailure("singular Hessenberg system".into()));
        }
        x[i] = s / piv;
    }
    Ok(x)
}

/// Null vector of `A` (eigenvector of the eigenvalue nearest zero) via
/// shifted inverse iteration on the Hessenberg form. Returns the vector and
/// the residual `‖Ax‖/(‖A‖∞‖x‖)`.
pub fn null_vector(hess: &Hessenberg, a: &CMatrix, iters: usize) -> Result<(Vec<C64>, f64)> {
    let n = hess.h.n;
    let scale = a.inf_norm().max(1e-300);
    let shift = C64::new(1e-12 * scale, 0.0);
    let mut v: Vec<C64> = (0..n)
        .map(|i| C64::new(1.0 + (i as f64 * 0.32).sin() * 0.3, (i as f64 * 0.127).cos() * 0.2))
        .collect();
    let nv = vec_norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    // iterate in Hessenberg coordinates, map back once
    let mut y = hess.q.matvec_adj(&v);
    for _ in 0..iters.max(4) {
        let mut z = hessenberg_shifted_solve(&hess.h, -shift, y.clone())?;
        let nz = vec_norm(&z);
        if !nz.is_finite() || nz == 0.0 {
            return Err(Error::SolverFailure("inverse iteration broke down".into()));
        }
        // align phases before measuring the change
        let overlap: C64 = y.iter().zip(&z).map(|(a, b)| a.conj() * b / nz).sum();
        let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { C64::new(1.0, 0.0) };
        z.iter_mut().for_each(|x| *x /= nz * phase);
        let delta: f64 =
            y.iter().zip(&z).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        y = z;
        if delta < 1e-14 {
            break;
        }
    }
    let x = hess.q.matvec(&y);
    let res = vec_norm(&a.matvec(&x)) / (scale * vec_norm(&x));
    Ok((x, res))
}

/// Dense LU solve with partial pivoting (for tests and small oracles).
pub fn lu_solve(a: &CMatrix, b: &[C64]) -> Result<Vec<C64>> {
    let n = a.n;
    let mut m = a.data.clone();
    let mut x = b.to_vec();
    for k in 0..n {
        let (mut piv_i, mut piv) = (k, m[k * n + k].norm());
        for i in k + 1..n {
            let v = m[i * n + k].norm();
            if v > piv {
                piv = v;
                piv_i = i;
            }
        }
        if piv <= 1e-300 {
            return Err(Error::SolverFailure("singular matrix in LU".into()));
        }
        if piv_i != k {
            for j in 0..n {
                m.swap(k * n + j, piv_i * n + j);
            }
            x.swap(k, piv_i);
        }
        let pk = m[k * n + k];
        for i in k + 1..n {
            let f = m[i * n + k] / pk;
            if f.norm() == 0.0 {
                continue;
            }
            for j in k + 1..n {
                let v = m[k * n + j];
                m[i * n + j] -= f * v;
            }
            m[i * n + k] = C64::new(0.0, 0.0);
            let xk = x[k];
            x[i] -= f * xk;
        }
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for j in i + 1..n {
            s -= m[i * n + j] * x[j];
        }
        x[i] = s / m[i * n + i];
    }
    Ok(x)
}

/// Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    let n = a.n;
    let mut m = a.clone();
    for sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                off += m.at(p, q).norm_sqr();
            }
        }
        if off.sqrt() < 1e-13 * m.inf_norm().max(1e-300) || sweep == 59 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m.at(p, q);
                if apq.norm() < 1e-300 {
                    continue;
                }
                let app = m.at(p, p).re;
                let aqq = m.at(q, q).re;
                let phase = apq / apq.norm();
                let tau = (aqq - app) / (2.0 * apq.norm());
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // U = diag(1, phase*)·[[c, s], [-s, c]] zeroes the pivot
                for j in 0..n {
                    let mpj = m.at(p, j);
                    let mqj = m.at(q, j);
                    *m.at_mut(p, j) = c * mpj - s * phase * mqj;
                    *m.at_mut(q, j) = s * mpj + c * phase * mqj;
                }
                for i in 0..n {
                    let mip = m.at(i, p);
                    let miq = m.at(i, q);
                    *m.at_mut(i, p) = c * mip - s * phase.conj() * miq;
                    *m.at_mut(i, q) = s * mip + c * phase.conj() * miq;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m.at(i, i).re).collect();
    ev.sort_by(f64::total_cmp);
    ev
}
