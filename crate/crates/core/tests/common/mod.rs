//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use bandsparse::{CMatrix, C64};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn random_cvec<R: Rng>(rng: &mut R, n: usize) -> Vec<C64> {
    (0..n)
        .map(|_| {
            c(
                rng.random::<f64>() * 2.0 - 1.0,
                rng.random::<f64>() * 2.0 - 1.0,
            )
        })
        .collect()
}

pub fn random_cmatrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        c(
            rng.random::<f64>() * 2.0 - 1.0,
            rng.random::<f64>() * 2.0 - 1.0,
        )
    })
}

pub fn max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
    let m = 0.5 * (a + b);
    let fm = f(m);
    (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    m: f64,
    fm: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let (lm, flm, left) = simpson(f, a, fa, m, fm);
    let (rm, frm, right) = simpson(f, m, fm, b, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
        + simpson_rec(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
}

/// Adaptive Simpson quadrature of a real integrand.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    // a fixed pre-split keeps oscillatory integrands from fooling the first estimate
    let pieces = 64;
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|i| {
            let (lo, hi) = (a + i as f64 * h, a + (i + 1) as f64 * h);
            let (flo, fhi) = (f(lo), f(hi));
            let (m, fm, whole) = simpson(f, lo, flo, hi, fhi);
            simpson_rec(f, lo, flo, hi, fhi, m, fm, whole, tol / pieces as f64, 40)
        })
        .sum()
}

/// `∫_lo^hi exp(2iπ f t) df` by quadrature.
pub fn band_integral(lo: f64, hi: f64, t: f64) -> C64 {
    let w = 2.0 * std::f64::consts::PI * t;
    let re = adaptive_simpson(&|f| (w * f).cos(), lo, hi, 1e-14);
    let im = adaptive_simpson(&|f| (w * f).sin(), lo, hi, 1e-14);
    c(re, im)
}

/// Cyclic coordinate descent for `½‖y − A z‖² + λ‖z‖₁`.
pub fn cd_lasso(a: &CMatrix, y: &[C64], lambda: f64, tol: f64, max_sweeps: usize) -> Vec<C64> {
    let (n, p) = (a.rows(), a.cols());
    let mut z = vec![c(0.0, 0.0); p];
    let mut r = y.to_vec();
    let norms: Vec<f64> = (0..p)
        .map(|j| a.col(j).iter().map(|v| v.norm_sqr()).sum())
        .collect();
    for _ in 0..max_sweeps {
        let mut biggest = 0.0f64;
        for j in 0..p {
            let col = a.col(j);
            let mut g = c(0.0, 0.0);
            for i in 0..n {
                g += col[i].conj() * r[i];
            }
            let v = g + z[j] * norms[j];
            let mag = v.norm();
            let next = if mag <= lambda {
                c(0.0, 0.0)
            } else {
                v * ((mag - lambda) / mag / norms[j])
            };
            let step = next - z[j];
            if step.norm() > 0.0 {
                for i in 0..n {
                    r[i] -= col[i] * step;
                }
                biggest = biggest.max(step.norm());
                z[j] = next;
            }
        }
        if biggest < tol {
            break;
        }
    }
    z
}

pub fn lasso_value(a: &CMatrix, y: &[C64], z: &[C64], lambda: f64) -> f64 {
    let az = a.mul_vec(z).unwrap();
    let fit: f64 = y.iter().zip(&az).map(|(p, q)| (p - q).norm_sqr()).sum();
    0.5 * fit + lambda * z.iter().map(|v| v.norm()).sum::<f64>()
}

fn rat(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

/// Exact solution of `G x = b` by rational Gaussian elimination on the real
/// embedding `[[Re G, −Im G], [Im G, Re G]]`, rounded to f64 at the end.
pub fn exact_solve(g: &CMatrix, b: &[C64]) -> Vec<C64> {
    let n = g.rows();
    let m = 2 * n;
    let mut aug: Vec<Vec<BigRational>> = vec![vec![BigRational::zero(); m + 1]; m];
    for i in 0..n {
        for j in 0..n {
            let v = g.get(i, j);
            aug[i][j] = rat(v.re);
            aug[i][j + n] = rat(-v.im);
            aug[i + n][j] = rat(v.im);
            aug[i + n][j + n] = rat(v.re);
        }
        aug[i][m] = rat(b[i].re);
        aug[i + n][m] = rat(b[i].im);
    }
    for col in 0..m {
        let piv = (col..m)
            .find(|&r| !aug[r][col].is_zero())
            .expect("singular system");
        aug.swap(col, piv);
        let inv = BigRational::from_integer(BigInt::from(1)) / aug[col][col].clone();
        for k in col..=m {
            aug[col][k] = &aug[col][k] * &inv;
        }
        for r in 0..m {
            if r != col && !aug[r][col].is_zero() {
                let factor = aug[r][col].clone();
                for k in col..=m {
                    let delta = &factor * &aug[col][k];
                    aug[r][k] -= delta;
                }
            }
        }
    }
    (0..n)
        .map(|i| c(aug[i][m].to_f64().unwrap(), aug[i + n][m].to_f64().unwrap()))
        .collect()
}
