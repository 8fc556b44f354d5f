//! Dense Dirac Hamiltonians on spinor ⊗ grid space.

use crate::algebra::build_matrix_set;
use crate::fields::{FieldConfig, PhysicalParams};
use crate::grid::{DiscreteOperator, Grid};
use crate::linalg::{diag_on_spinor, kron, re, spinor_on_grid, CMat, Mat4, I};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// i(cα·(p̂+ieA) − eΦ + mc²β)
    PseudoPt,
    /// cα·(p̂−eA) + eΦ + mc²β
    Hermitian,
}

/// Hamiltonian split into its free part and its couplings to A and Φ.
#[derive(Clone, Debug)]
pub struct DiracHamiltonian {
    pub variant: Variant,
    pub free: CMat,
    pub vector: CMat,
    pub scalar: CMat,
    pub op: DiscreteOperator,
}

impl DiracHamiltonian {
    pub fn matrix(&self) -> &CMat {
        &self.op.matrix
    }
}

fn dense4(m: &Mat4) -> CMat {
    CMat::from_fn(4, 4, |i, j| m[(i, j)])
}

pub fn build_dirac_hamiltonian(
    grid: &Grid,
    field: &FieldConfig,
    t: f64,
    params: &PhysicalParams,
    variant: Variant,
) -> DiracHamiltonian {
    let s = build_matrix_set();
    let n = grid.n;
    let (c, e, m) = (params.c, params.e, params.m);
    let p = grid.momentum_matrix();
    let mut kinetic = kron(&dense4(&s.alpha[0]), &p) * re(c);
    for (j, pj) in params.p_perp.iter().enumerate() {
        if *pj != 0.0 {
            kinetic += spinor_on_grid(&s.alpha[j + 1], n) * re(c * pj);
        }
    }
    kinetic += spinor_on_grid(&s.beta, n) * re(m * c * c);

    let a = field.sample_a(grid, t);
    let phi = field.sample_phi(grid, t);
    // c α·(−eA) appears in both variants: i·cα·(ieA) = −c e α·A.
    let mut vector = CMat::zeros(4 * n, 4 * n);
    for j in 0..3 {
        if a[j].iter().any(|v| *v != 0.0) {
            vector += spinor_on_grid(&s.alpha[j], n) * diag_on_spinor(&a[j]) * re(-c * e);
        }
    }
    let phi_op = diag_on_spinor(&phi);

    let (free, scalar, label) = match variant {
        Variant::PseudoPt => (kinetic * I, phi_op * (-I * e), "H_D"),
        Variant::Hermitian => (kinetic, phi_op * re(e), "H_hD"),
    };
    let total = &free + &vector + &scalar;
    DiracHamiltonian { variant, free, vector, scalar, op: DiscreteOperator::new(total, label) }
}
