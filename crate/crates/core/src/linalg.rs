//! Dense complex linear algebra shared by the operator modules.

use nalgebra::{DMatrix, DVector, Matrix4};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;
pub type Mat4 = Matrix4<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Kronecker product `a ⊗ b` with `a` as the outer (slow) index.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMat::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Embeds a 4×4 spinor matrix as `m ⊗ I_n`.
pub fn spinor_on_grid(m: &Mat4, n: usize) -> CMat {
    let mut out = CMat::zeros(4 * n, 4 * n);
    for i in 0..4 {
        for j in 0..4 {
            let v = m[(i, j)];
            if v == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..n {
                out[(i * n + k, j * n + k)] = v;
            }
        }
    }
    out
}

/// Embeds an n×n grid operator as `I_4 ⊗ g`.
pub fn grid_on_spinor(g: &CMat) -> CMat {
    let n = g.nrows();
    let mut out = CMat::zeros(4 * n, 4 * n);
    for s in 0..4 {
        out.view_mut((s * n, s * n), (n, n)).copy_from(g);
    }
    out
}

/// `I_4 ⊗ diag(f)`.
pub fn diag_on_spinor(f: &[f64]) -> CMat {
    let n = f.len();
    let mut out = CMat::zeros(4 * n, 4 * n);
    for s in 0..4 {
        for (k, v) in f.iter().enumerate() {
            out[(s * n + k, s * n + k)] = re(*v);
        }
    }
    out
}

pub fn comm(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn anticomm(a: &CMat, b: &CMat) -> CMat {
    a * b + b * a
}

pub fn cross(a: &[CMat; 3], b: &[CMat; 3]) -> [CMat; 3] {
    [
        &a[1] * &b[2] - &a[2] * &b[1],
        &a[2] * &b[0] - &a[0] * &b[2],
        &a[0] * &b[1] - &a[1] * &b[0],
    ]
}

pub fn dot(a: &[CMat; 3], b: &[CMat; 3]) -> CMat {
    &a[0] * &b[0] + &a[1] * &b[1] + &a[2] * &b[2]
}

/// Largest singular value.
pub fn norm2(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs4(m: &Mat4) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Matrix exponential (Padé scaling and squaring).
pub fn expm(m: &CMat) -> CMat {
    m.clone().exp()
}

pub fn conj_mat(m: &CMat) -> CMat {
    m.map(|z| z.conj())
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    linear_slope(&lx, &ly)
}

pub fn linear_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    sxy / sxx
}
