//! Dense complex linear algebra used throughout the crate.
//!
//! Matrices are stored column-major, which makes the two products the
//! solvers hammer on (`A x` as a sum of scaled columns and `Aᴴ y` as one
//! dot product per column) run over contiguous memory.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Upper bound on the number of entries in any assembled matrix unless the
/// caller raises it.
pub const DEFAULT_MAX_ENTRIES: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                what: "matrix storage",
                expected: rows * cols,
                got: data.len(),
            });
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("matrix entries"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i + i * n] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from equal-length columns.
    pub fn from_columns(rows: usize, columns: &[Vec<C64>]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * columns.len());
        for c in columns {
            if c.len() != rows {
                return Err(Error::DimensionMismatch {
                    what: "column length",
                    expected: rows,
                    got: c.len(),
                });
            }
            data.extend_from_slice(c);
        }
        Self::new(rows, columns.len(), data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i + j * self.rows]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i + j * self.rows] = v;
    }

    pub fn col(&self, j: usize) -> &[C64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [C64] {
        let r = self.rows;
        &mut self.data[j * r..(j + 1) * r]
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn select_columns(&self, idx: &[usize]) -> CMatrix {
        let mut data = Vec::with_capacity(self.rows * idx.len());
        for &j in idx {
            data.extend_from_slice(self.col(j));
        }
        CMatrix {
            rows: self.rows,
            cols: idx.len(),
            data,
        }
    }

    /// `A x`. Zero entries of `x` are skipped, which pays off for sparse iterates.
    pub fn mul_vec(&self, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                what: "A x operand",
                expected: self.cols,
                got: x.len(),
            });
        }
        let mut out = vec![C64::new(0.0, 0.0); self.rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj.re == 0.0 && xj.im == 0.0 {
                continue;
            }
            axpy(xj, self.col(j), &mut out);
        }
        Ok(out)
    }

    /// `Aᴴ y`.
    pub fn hermitian_product(&self, y: &[C64]) -> Result<Vec<C64>> {
        if y.len() != self.rows {
            return Err(Error::DimensionMismatch {
                what: "Aᴴ y operand",
                expected: self.rows,
                got: y.len(),
            });
        }
        Ok((0..self.cols).map(|j| cdot(self.col(j), y)).collect())
    }

    /// `AᴴA` (cols × cols).
    pub fn gram(&self) -> CMatrix {
        let p = self.cols;
        let mut g = CMatrix::zeros(p, p);
        for j in 0..p {
            for i in j..p {
                let v = cdot(self.col(i), self.col(j));
                g.data[i + j * p] = v;
                g.data[j + i * p] = v.conj();
            }
        }
        g
    }

    /// `AAᴴ` (rows × rows), accumulated as a sum of rank-one column updates.
    pub fn outer_gram(&self) -> CMatrix {
        let n = self.rows;
        let mut g = CMatrix::zeros(n, n);
        for j in 0..self.cols {
            let a = self.col(j);
            for k in 0..n {
                let c = a[k].conj();
                let dst = &mut g.data[k * n..(k + 1) * n];
                for i in k..n {
                    dst[i] += a[i] * c;
                }
            }
        }
        for k in 0..n {
            for i in (k + 1)..n {
                g.data[k + i * n] = g.data[i + k * n].conj();
            }
        }
        g
    }

    pub fn add_diagonal(&mut self, s: f64) {
        let n = self.rows.min(self.cols);
        for i in 0..n {
            self.data[i + i * self.rows] += s;
        }
    }

    pub fn mul(&self, other: &CMatrix) -> Result<CMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                what: "matrix product inner dimension",
                expected: self.cols,
                got: other.rows,
            });
        }
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let dst = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for (k, &b) in other.col(j).iter().enumerate() {
                axpy(b, self.col(k), dst);
            }
        }
        Ok(out)
    }

    pub fn conj_transpose(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }
}

/// `Σ conj(a_i) b_i`.
#[inline]
pub fn cdot(a: &[C64], b: &[C64]) -> C64 {
    let mut re = 0.0;
    let mut im = 0.0;
    for (x, y) in a.iter().zip(b) {
        re += x.re * y.re + x.im * y.im;
        im += x.re * y.im - x.im * y.re;
    }
    C64::new(re, im)
}

/// `y += alpha x`.
#[inline]
pub fn axpy(alpha: C64, x: &[C64], y: &mut [C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn norm2(v: &[C64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Cholesky factor `G = L Lᴴ` of a Hermitian positive definite matrix.
/// Only the lower triangle of the input is read.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    l: Vec<C64>,
}

impl Cholesky {
    pub fn factor(g: &CMatrix) -> Result<Self> {
        let n = g.rows();
        if g.cols() != n {
            return Err(Error::DimensionMismatch {
                what: "square matrix",
                expected: n,
                got: g.cols(),
            });
        }
        let mut l = g.as_slice().to_vec();
        for j in 0..n {
            // left-looking: subtract contributions of earlier columns
            for k in 0..j {
                let c = l[j + k * n].conj();
                if c.re == 0.0 && c.im == 0.0 {
                    continue;
                }
                let (head, tail) = l.split_at_mut(j * n);
                let src = &head[k * n + j..k * n + n];
                let dst = &mut tail[j..n];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d -= s * c;
                }
            }
            let d = l[j + j * n].re;
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite { pivot: j, value: d });
            }
            let s = d.sqrt();
            l[j + j * n] = C64::new(s, 0.0);
            let inv = 1.0 / s;
            for i in (j + 1)..n {
                l[i + j * n] *= inv;
            }
            for i in 0..j {
                l[i + j * n] = C64::new(0.0, 0.0);
            }
        }
        Ok(Self { n, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut [C64]) {
        let n = self.n;
        debug_assert_eq!(x.len(), n);
        for j in 0..n {
            let col = &self.l[j * n..(j + 1) * n];
            x[j] /= col[j].re;
            let xj = x[j];
            for i in (j + 1)..n {
                x[i] -= col[i] * xj;
            }
        }
        for j in (0..n).rev() {
            let col = &self.l[j * n..(j + 1) * n];
            let s = cdot(&col[j + 1..], &x[j + 1..]);
            x[j] = (x[j] - s) / col[j].re;
        }
    }

    /// Smallest and largest diagonal entries of `L`, a cheap conditioning probe.
    pub fn diag_range(&self) -> (f64, f64) {
        let d = (0..self.n).map(|i| self.l[i + i * self.n].re);
        d.fold((f64::INFINITY, 0.0f64), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        })
    }
}

/// Solves `G x = b` for Hermitian positive definite `G`, with one step of
/// iterative refinement.
pub fn hpd_solve(g: &CMatrix, b: &[C64]) -> Result<Vec<C64>> {
    if b.len() != g.rows() {
        return Err(Error::DimensionMismatch {
            what: "right-hand side",
            expected: g.rows(),
            got: b.len(),
        });
    }
    let chol = Cholesky::factor(g)?;
    let mut x = chol.solve(b);
    // refinement with the residual accumulated in twice the working precision
    for _ in 0..3 {
        let r = accurate_residual(g, &x, b);
        let dx = chol.solve(&r);
        for (xi, d) in x.iter_mut().zip(dx) {
            *xi += d;
        }
    }
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("hpd_solve result"));
    }
    Ok(x)
}

/// Error-free `a·b = p + e`.
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Error-free `a + b = s + e`.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let z = s - a;
    (s, (a - (s - z)) + (b - z))
}

#[derive(Default, Clone, Copy)]
struct Dot2 {
    sum: f64,
    err: f64,
}

impl Dot2 {
    #[inline]
    fn add_prod(&mut self, a: f64, b: f64) {
        let (p, e1) = two_prod(a, b);
        let (s, e2) = two_sum(self.sum, p);
        self.sum = s;
        self.err += e1 + e2;
    }

    #[inline]
    fn add(&mut self, a: f64) {
        let (s, e) = two_sum(self.sum, a);
        self.sum = s;
        self.err += e;
    }

    fn value(self) -> f64 {
        self.sum + self.err
    }
}

/// `b − G x` evaluated with compensated dot products.
fn accurate_residual(g: &CMatrix, x: &[C64], b: &[C64]) -> Vec<C64> {
    let n = g.rows;
    let mut re = vec![Dot2::default(); n];
    let mut im = vec![Dot2::default(); n];
    for i in 0..n {
        re[i].add(b[i].re);
        im[i].add(b[i].im);
    }
    for (j, xj) in x.iter().enumerate() {
        for (i, gij) in g.col(j).iter().enumerate() {
            re[i].add_prod(-gij.re, xj.re);
            re[i].add_prod(gij.im, xj.im);
            im[i].add_prod(-gij.re, xj.im);
            im[i].add_prod(-gij.im, xj.re);
        }
    }
    re.into_iter()
        .zip(im)
        .map(|(r, i)| C64::new(r.value(), i.value()))
        .collect()
}

/// Kronecker product with the default size ceiling.
pub fn kronecker(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    kronecker_with_limit(a, b, DEFAULT_MAX_ENTRIES)
}

/// `A ⊗ B` with the standard block layout: entry `(ia·rb + ib, ja·cb + jb)` is
/// `A[ia, ja]·B[ib, jb]`.
pub fn kronecker_with_limit(a: &CMatrix, b: &CMatrix, max_entries: usize) -> Result<CMatrix> {
    let rows = a.rows.checked_mul(b.rows);
    let cols = a.cols.checked_mul(b.cols);
    let total = rows.zip(cols).and_then(|(r, c)| r.checked_mul(c));
    let (rows, cols) = match total {
        Some(t) if t <= max_entries => (rows.unwrap(), cols.unwrap()),
        t => {
            return Err(Error::TooLarge {
                what: "Kronecker product",
                requested: t.unwrap_or(usize::MAX),
                limit: max_entries,
            })
        }
    };
    let mut data = Vec::with_capacity(rows * cols);
    for ja in 0..a.cols {
        for jb in 0..b.cols {
            let bcol = b.col(jb);
            for &av in a.col(ja) {
                data.extend(bcol.iter().map(|&bv| av * bv));
            }
        }
    }
    Ok(CMatrix { rows, cols, data })
}

/// Kronecker product of vectors given in dimension order `v₁, v₂, …`; the
/// first vector's index varies fastest, i.e. the result is `v_M ⊗ … ⊗ v₁`.
pub fn kron_vectors(parts: &[&[C64]]) -> Vec<C64> {
    let mut out = vec![C64::new(1.0, 0.0)];
    for part in parts {
        let mut next = Vec::with_capacity(out.len() * part.len());
        for &p in part.iter() {
            next.extend(out.iter().map(|&o| o * p));
        }
        out = next;
    }
    out
}

/// Seed for the deterministic ChaCha stream. Sub-streams are derived by
/// counter so parallel trials see the same numbers as sequential ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    pub fn derive(self, stream: u64) -> RngSeed {
        RngSeed(splitmix64(
            self.0 ^ splitmix64(stream.wrapping_add(0x9e37_79b9_7f4a_7c15)),
        ))
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
