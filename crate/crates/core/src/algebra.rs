//! Dirac matrices in the Dirac representation, the spin operator and the
//! parity / time-reversal spinor parts.

use crate::linalg::{c, max_abs4, re, Mat4, C64, I};

/// Pauli matrices with Gaussian-integer entries (re, im).
const PAULI: [[[(i8, i8); 2]; 2]; 3] = [
    [[(0, 0), (1, 0)], [(1, 0), (0, 0)]],
    [[(0, 0), (0, -1)], [(0, 1), (0, 0)]],
    [[(1, 0), (0, 0)], [(0, 0), (-1, 0)]],
];

fn block(ul: [[(i8, i8); 2]; 2], ur: [[(i8, i8); 2]; 2], ll: [[(i8, i8); 2]; 2], lr: [[(i8, i8); 2]; 2]) -> Mat4 {
    let mut m = Mat4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for (blk, (oi, oj)) in [(ul, (0, 0)), (ur, (0, 2)), (ll, (2, 0)), (lr, (2, 2))] {
                let (a, b) = blk[i][j];
                m[(oi + i, oj + j)] = c(a as f64, b as f64);
            }
        }
    }
    m
}

const Z2: [[(i8, i8); 2]; 2] = [[(0, 0), (0, 0)], [(0, 0), (0, 0)]];
const I2: [[(i8, i8); 2]; 2] = [[(1, 0), (0, 0)], [(0, 0), (1, 0)]];
const MI2: [[(i8, i8); 2]; 2] = [[(-1, 0), (0, 0)], [(0, 0), (-1, 0)]];

/// Antilinear-aware spinor operator: `matrix · K` when `conjugate` is set.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinorOp {
    pub matrix: Mat4,
    pub conjugate: bool,
}

impl SpinorOp {
    /// `U A U⁻¹`, with `A` conjugated first when the operator is antilinear.
    pub fn conjugate_matrix(&self, a: &Mat4) -> Mat4 {
        let inv = self.matrix.try_inverse().expect("spinor operator is invertible");
        let a = if self.conjugate { a.map(|z| z.conj()) } else { *a };
        self.matrix * a * inv
    }

    pub fn apply(&self, v: &[C64; 4]) -> [C64; 4] {
        let mut out = [C64::new(0.0, 0.0); 4];
        for (i, o) in out.iter_mut().enumerate() {
            for (j, x) in v.iter().enumerate() {
                let x = if self.conjugate { x.conj() } else { *x };
                *o += self.matrix[(i, j)] * x;
            }
        }
        out
    }

    pub fn compose(&self, other: &SpinorOp) -> SpinorOp {
        let rhs = if self.conjugate { other.matrix.map(|z| z.conj()) } else { other.matrix };
        SpinorOp { matrix: self.matrix * rhs, conjugate: self.conjugate != other.conjugate }
    }
}

#[derive(Clone, Debug)]
pub struct SpinorMatrixSet {
    pub alpha: [Mat4; 3],
    pub beta: Mat4,
    pub gamma5: Mat4,
    pub sigma: [Mat4; 3],
    pub parity_spinor: Mat4,
    pub timerev_spinor: Mat4,
}

pub fn build_matrix_set() -> SpinorMatrixSet {
    let alpha = [0, 1, 2].map(|i| block(Z2, PAULI[i], PAULI[i], Z2));
    let sigma = [0, 1, 2].map(|i| block(PAULI[i], Z2, Z2, PAULI[i]));
    let beta = block(I2, Z2, Z2, MI2);
    let g = [beta * alpha[0], beta * alpha[1], beta * alpha[2]];
    let gamma5 = beta * g[0] * g[1] * g[2] * I;
    SpinorMatrixSet {
        alpha,
        beta,
        gamma5,
        sigma,
        parity_spinor: beta,
        timerev_spinor: g[0] * g[2] * I,
    }
}

impl SpinorMatrixSet {
    /// γ^μ with γ⁰ = β and γⁱ = βαᵢ.
    pub fn gamma(&self, mu: usize) -> Mat4 {
        if mu == 0 {
            self.beta
        } else {
            self.beta * self.alpha[mu - 1]
        }
    }

    pub fn parity(&self) -> SpinorOp {
        SpinorOp { matrix: self.parity_spinor, conjugate: false }
    }

    pub fn time_reversal(&self) -> SpinorOp {
        SpinorOp { matrix: self.timerev_spinor, conjugate: true }
    }

    /// Spinor part of the combined PT operator (antilinear).
    pub fn pt(&self) -> SpinorOp {
        self.parity().compose(&self.time_reversal())
    }

    /// Global sign s in (PT)² = s·I.
    pub fn pt_square_sign(&self) -> f64 {
        let sq = self.pt().compose(&self.pt());
        assert!(!sq.conjugate);
        let s = sq.matrix[(0, 0)];
        assert!(max_abs4(&(sq.matrix - Mat4::identity() * s)) == 0.0);
        s.re
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct AlgebraReport {
    pub tol: f64,
    pub checks: Vec<Check>,
}

impl AlgebraReport {
    fn new(tol: f64) -> Self {
        assert!(tol > 0.0, "tolerance must be positive");
        AlgebraReport { tol, checks: Vec::new() }
    }

    fn push(&mut self, name: impl Into<String>, residual: f64) {
        self.checks.push(Check { name: name.into(), residual });
    }

    pub fn max_residual(&self) -> f64 {
        self.checks.iter().map(|c| c.residual).fold(0.0, f64::max)
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.residual < self.tol)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.checks.iter().find(|c| c.name == name).map(|c| c.residual)
    }

    pub fn failed(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| c.residual >= self.tol).map(|c| c.name.as_str()).collect()
    }
}

fn levi(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

pub fn verify_clifford_relations(set: &SpinorMatrixSet, tol: f64) -> AlgebraReport {
    let mut rep = AlgebraReport::new(tol);
    let id = Mat4::identity();
    let a = &set.alpha;
    for i in 0..3 {
        for j in i..3 {
            let target = if i == j { id * re(2.0) } else { Mat4::zeros() };
            rep.push(format!("anticomm_alpha{}{}", i + 1, j + 1), max_abs4(&(a[i] * a[j] + a[j] * a[i] - target)));
        }
        rep.push(format!("anticomm_alpha{}_beta", i + 1), max_abs4(&(a[i] * set.beta + set.beta * a[i])));
    }
    rep.push("beta_squared", max_abs4(&(set.beta * set.beta - id)));
    for k in 0..3 {
        // Σ_k = (1/2i) ε_kij α_i α_j
        let mut s = Mat4::zeros();
        for i in 0..3 {
            for j in 0..3 {
                s += a[i] * a[j] * re(levi(k, i, j));
            }
        }
        s *= c(0.0, -0.5);
        rep.push(format!("sigma{}_from_alpha", k + 1), max_abs4(&(s - set.sigma[k])));
        rep.push(format!("sigma{}_squared", k + 1), max_abs4(&(set.sigma[k] * set.sigma[k] - id)));
    }
    for mu in 0..4 {
        let g = set.gamma(mu);
        rep.push(format!("anticomm_gamma5_gamma{mu}"), max_abs4(&(set.gamma5 * g + g * set.gamma5)));
    }
    rep
}

/// Largest residual of [Σᵢ,Σⱼ] = 2iεᵢⱼₖΣₖ.
pub fn su2_residual(set: &SpinorMatrixSet) -> f64 {
    let s = &set.sigma;
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let mut rhs = Mat4::zeros();
            for k in 0..3 {
                rhs += s[k] * c(0.0, 2.0 * levi(i, j, k));
            }
            worst = worst.max(max_abs4(&(s[i] * s[j] - s[j] * s[i] - rhs)));
        }
    }
    worst
}

pub fn verify_pt_conjugation(set: &SpinorMatrixSet, tol: f64) -> AlgebraReport {
    verify_pt_conjugation_with(set, &set.parity(), &set.time_reversal(), tol)
}

/// Conjugation rules for arbitrary P and T operators (used to probe broken variants).
pub fn verify_pt_conjugation_with(set: &SpinorMatrixSet, p: &SpinorOp, t: &SpinorOp, tol: f64) -> AlgebraReport {
    let mut rep = AlgebraReport::new(tol);
    let g0 = set.gamma(0);
    rep.push("P_gamma0", max_abs4(&(p.conjugate_matrix(&g0) - g0)));
    for i in 1..4 {
        let g = set.gamma(i);
        rep.push(format!("P_gamma{i}"), max_abs4(&(p.conjugate_matrix(&g) + g)));
    }
    rep.push("T_gamma0", max_abs4(&(t.conjugate_matrix(&g0) - g0)));
    for i in 0..3 {
        let a = set.alpha[i];
        rep.push(format!("T_alpha{}", i + 1), max_abs4(&(t.conjugate_matrix(&a) + a)));
    }
    rep
}
