//! Dense real linear algebra for the oracle: symmetric eigensolver
//! (Householder tridiagonalization + implicit QL) and singular values via
//! Householder bidiagonalization.

use crate::error::{Error, Result};

const MAX_QL_SWEEPS: usize = 60;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let src = other.row(k);
                for (o, &b) in out.row_mut(i).iter_mut().zip(src) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigenvalues in ascending order; row `i` of `vectors` is the eigenvector of `values[i]`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

impl SymmetricEigen {
    pub fn new(a: &DenseMatrix) -> Result<Self> {
        assert_eq!(a.rows, a.cols, "eigensolver needs a square matrix");
        let n = a.rows;
        if n == 0 {
            return Ok(Self {
                values: Vec::new(),
                vectors: DenseMatrix::zeros(0, 0),
            });
        }
        let mut v = a.clone();
        let mut d = vec![0.0; n];
        let mut e = vec![0.0; n];
        tred2(&mut v, &mut d, &mut e);
        // Work on Vᵀ so that QL rotations touch contiguous rows.
        let mut w = v.transpose();
        tql2(&mut d, &mut e, Some(&mut w))?;

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
        let values = order.iter().map(|&i| d[i]).collect();
        let mut vectors = DenseMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            vectors.row_mut(dst).copy_from_slice(w.row(src));
        }
        Ok(Self { values, vectors })
    }

    /// `max |A − V Λ Vᵀ|` and `max |V Vᵀ − I|`.
    pub fn residuals(&self, a: &DenseMatrix) -> (f64, f64) {
        let n = self.values.len();
        let mut recon: f64 = 0.0;
        let mut ortho: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let (mut r, mut o) = (0.0, 0.0);
                for k in 0..n {
                    let (vi, vj) = (self.vectors[(k, i)], self.vectors[(k, j)]);
                    r += vi * self.values[k] * vj;
                }
                for k in 0..n {
                    o += self.vectors[(i, k)] * self.vectors[(j, k)];
                }
                recon = recon.max((a[(i, j)] - r).abs());
                ortho = ortho.max((o - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        (recon, ortho)
    }
}

/// Householder reduction to tridiagonal form, accumulating the transform in `v`.
fn tred2(v: &mut DenseMatrix, d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
                v[(j, i)] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for j in 0..i {
                e[j] = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[(j, i)] = f;
                g = e[j] + v[(j, j)] * f;
                for k in j + 1..i {
                    g += v[(k, j)] * d[k];
                    e[k] += v[(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    for i in 0..n - 1 {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[(k, i + 1)] * v[(k, j)];
                }
                for k in 0..=i {
                    v[(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = 0.0;
    }
    v[(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL on the tridiagonal `(d, e)`, with `e[i]` the coupling of `i−1` and `i`.
///
/// If `w` is given, its rows are rotated along (eigenvectors end up as rows).
fn tql2(d: &mut [f64], e: &mut [f64], mut w: Option<&mut DenseMatrix>) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_QL_SWEEPS {
                    return Err(Error::NoConvergence(format!(
                        "QL iteration exceeded {MAX_QL_SWEEPS} sweeps at index {l} of {n} (|e| = {:e})",
                        e[l].abs()
                    )));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(w) = w.as_deref_mut() {
                        rotate_rows(w, i, c, s);
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

fn rotate_rows(w: &mut DenseMatrix, i: usize, c: f64, s: f64) {
    let cols = w.cols;
    let (head, tail) = w.data.split_at_mut((i + 1) * cols);
    let ri = &mut head[i * cols..];
    let rj = &mut tail[..cols];
    for (a, b) in ri.iter_mut().zip(rj.iter_mut()) {
        let h = *b;
        *b = s * *a + c * h;
        *a = c * *a - s * h;
    }
}

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `diag` and
/// off-diagonal `off` (`off.len() == diag.len() − 1`), unsorted.
pub fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[1..].copy_from_slice(off);
    tql2(&mut d, &mut e, None)?;
    Ok(d)
}

/// Upper bidiagonal form `(diag, superdiag)` of `a` (requires `rows ≥ cols`).
fn bidiagonalize(mut a: DenseMatrix) -> (Vec<f64>, Vec<f64>) {
    let (m, n) = (a.rows, a.cols);
    debug_assert!(m >= n);
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n.saturating_sub(1)];
    let mut v = vec![0.0; m];
    let mut s = vec![0.0; n];
    for k in 0..n {
        // Left reflector zeroing a[k+1.., k].
        let norm = (k..m).map(|i| a[(i, k)].powi(2)).sum::<f64>().sqrt();
        if norm == 0.0 {
            diag[k] = 0.0;
        } else {
            let x0 = a[(k, k)];
            let alpha = if x0 > 0.0 { -norm } else { norm };
            for i in k..m {
                v[i] = a[(i, k)];
            }
            v[k] -= alpha;
            let vtv: f64 = (k..m).map(|i| v[i] * v[i]).sum();
            if vtv > 0.0 {
                let tau = 2.0 / vtv;
                s[k + 1..n].iter_mut().for_each(|x| *x = 0.0);
                for i in k..m {
                    let vi = v[i];
                    for (sj, &aij) in s[k + 1..n].iter_mut().zip(&a.row(i)[k + 1..n]) {
                        *sj += vi * aij;
                    }
                }
                for i in k..m {
                    let f = tau * v[i];
                    for (aij, &sj) in a.row_mut(i)[k + 1..n].iter_mut().zip(&s[k + 1..n]) {
                        *aij -= f * sj;
                    }
                }
            }
            diag[k] = alpha;
        }

        if k + 1 < n {
            // Right reflector zeroing a[k, k+2..].
            let row: Vec<f64> = a.row(k)[k + 1..n].to_vec();
            let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                sup[k] = 0.0;
                continue;
            }
            let alpha = if row[0] > 0.0 { -norm } else { norm };
            let mut w = row;
            w[0] -= alpha;
            let wtw: f64 = w.iter().map(|x| x * x).sum();
            if wtw > 0.0 {
                let tau = 2.0 / wtw;
                for i in k + 1..m {
                    let r = &mut a.row_mut(i)[k + 1..n];
                    let t: f64 = r.iter().zip(&w).map(|(x, y)| x * y).sum();
                    let f = tau * t;
                    for (x, &wj) in r.iter_mut().zip(&w) {
                        *x -= f * wj;
                    }
                }
            }
            sup[k] = alpha;
        }
    }
    (diag, sup)
}

/// Singular values of `a` in descending order.
pub fn singular_values(a: &DenseMatrix) -> Result<Vec<f64>> {
    let a = if a.rows >= a.cols {
        a.clone()
    } else {
        a.transpose()
    };
    let n = a.cols;
    if n == 0 {
        return Ok(Vec::new());
    }
    let (diag, sup) = bidiagonalize(a);
    // The 2n×2n Golub–Kahan matrix [[0, B], [Bᵀ, 0]] permuted to tridiagonal
    // form has zero diagonal and off-diagonal (d₁, e₁, d₂, …, d_n); its
    // eigenvalues are ±σ.
    let mut off = Vec::with_capacity(2 * n - 1);
    for k in 0..n {
        off.push(diag[k]);
        if k + 1 < n {
            off.push(sup[k]);
        }
    }
    let zeros = vec![0.0; 2 * n];
    let mut ev = tridiagonal_eigenvalues(&zeros, &off)?;
    ev.sort_by(|x, y| y.total_cmp(x));
    ev.truncate(n);
    Ok(ev.into_iter().map(|x| x.max(0.0)).collect())
}

/// Sum of singular values.
pub fn nuclear_norm(a: &DenseMatrix) -> Result<f64> {
    Ok(singular_values(a)?.iter().sum())
}
