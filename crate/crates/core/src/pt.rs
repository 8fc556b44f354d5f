//! Antilinear PT operator on grid spinors, the PT inner product, pseudo-PT
//! symmetry residuals and Ehrenfest consistency.

use thiserror::Error;

use crate::algebra::build_matrix_set;
use crate::fields::{FieldConfig, PhysicalParams};
use crate::fw::free_hamiltonian;
use crate::hamiltonian::{DiracHamiltonian, Variant};
use crate::linalg::{conj_mat, kron, re, CMat, CVec, Mat4, C64, I};
use crate::propagate::QuantumTrajectory;

#[derive(Debug, Error, PartialEq)]
pub enum PtError {
    #[error("spinor fields live on different grids ({0} vs {1} points)")]
    GridMismatch(usize, usize),
    #[error("state is self-orthogonal under the PT product (|norm| = {0:.3e}); expectation undefined")]
    SelfOrthogonal(f64),
    #[error("need at least 3 stored times, got {0}")]
    TooFewTimes(usize),
}

/// Complex 4-spinor sampled on an n-point grid, component-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinorField {
    pub amps: CVec,
    pub n: usize,
    pub dx: f64,
    pub pt_norm: Option<C64>,
}

impl SpinorField {
    pub fn new(amps: CVec, n: usize, dx: f64) -> Self {
        assert_eq!(amps.len(), 4 * n, "spinor field needs 4n amplitudes");
        SpinorField { amps, n, dx, pt_norm: None }
    }

    pub fn with_amps(&self, amps: CVec) -> Self {
        SpinorField::new(amps, self.n, self.dx)
    }

    pub fn conv_norm(&self) -> f64 {
        (self.amps.norm_squared() * self.dx).sqrt()
    }

    pub fn scale(&self, s: C64) -> Self {
        self.with_amps(&self.amps * s)
    }
}

/// PT = γ⁰ · iγ¹γ³ · K with spatial reflection.
#[derive(Clone, Debug)]
pub struct PtOperator {
    pub spinor: Mat4,
    pub square_sign: f64,
}

impl Default for PtOperator {
    fn default() -> Self {
        let s = build_matrix_set();
        PtOperator { spinor: s.pt().matrix, square_sign: s.pt_square_sign() }
    }
}

fn reflection(n: usize) -> CMat {
    let mut r = CMat::zeros(n, n);
    for i in 0..n {
        r[(n - 1 - i, i)] = re(1.0);
    }
    r
}

fn dense4(m: &Mat4) -> CMat {
    CMat::from_fn(4, 4, |i, j| m[(i, j)])
}

impl PtOperator {
    pub fn apply(&self, psi: &SpinorField) -> SpinorField {
        let n = psi.n;
        let mut out = CVec::zeros(4 * n);
        for s in 0..4 {
            for t in 0..4 {
                let v = self.spinor[(s, t)];
                if v == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out[s * n + j] += v * psi.amps[t * n + (n - 1 - j)].conj();
                }
            }
        }
        psi.with_amps(out)
    }

    /// Matrix of the linear part on spinor ⊗ grid.
    pub fn full_matrix(&self, n: usize) -> CMat {
        kron(&dense4(&self.spinor), &reflection(n))
    }

    /// PT M (PT)⁻¹ = W conj(M) W⁻¹.
    pub fn conjugate_operator(&self, m: &CMat) -> CMat {
        let n = m.nrows() / 4;
        let w = self.full_matrix(n);
        let winv = kron(&dense4(&self.spinor.try_inverse().unwrap()), &reflection(n));
        w * conj_mat(m) * winv
    }

    /// Conjugation of a field multiplication operator: the spinor part is
    /// conjugated while the field keeps its argument and takes the rule sign.
    fn conjugate_field_operator(&self, m: &CMat, sign: f64) -> CMat {
        let n = m.nrows() / 4;
        let u = kron(&dense4(&self.spinor), &CMat::identity(n, n));
        let uinv = kron(&dense4(&self.spinor.try_inverse().unwrap()), &CMat::identity(n, n));
        u * conj_mat(m) * uinv * re(sign)
    }
}

pub fn pt_apply(psi: &SpinorField) -> SpinorField {
    PtOperator::default().apply(psi)
}

/// Σ [PTφ]ᵀψ · dx.
pub fn pt_inner(phi: &SpinorField, psi: &SpinorField) -> Result<C64, PtError> {
    if phi.n != psi.n {
        return Err(PtError::GridMismatch(phi.n, psi.n));
    }
    let ptphi = pt_apply(phi);
    Ok(ptphi.amps.iter().zip(psi.amps.iter()).map(|(a, b)| a * b).sum::<C64>() * psi.dx)
}

/// Rescales ψ so that its PT norm is ±1 and records the norm.
pub fn pt_normalize(psi: &SpinorField) -> Result<SpinorField, PtError> {
    let nrm = pt_inner(psi, psi)?;
    check_not_self_orthogonal(psi, nrm)?;
    let mut out = psi.scale(re(1.0 / nrm.norm().sqrt()));
    out.pt_norm = Some(pt_inner(&out, &out)?);
    Ok(out)
}

fn check_not_self_orthogonal(psi: &SpinorField, nrm: C64) -> Result<(), PtError> {
    // Relative to the conventional norm so the test is scale free.
    let scale = psi.conv_norm().powi(2);
    if nrm.norm() < 1e-10 * scale.max(f64::MIN_POSITIVE) {
        return Err(PtError::SelfOrthogonal(nrm.norm() / scale));
    }
    Ok(())
}

/// pt_inner(ψ, Oψ) / pt_inner(ψ, ψ).
pub fn pseudo_expectation(psi: &SpinorField, o: &CMat) -> Result<C64, PtError> {
    let den = pt_inner(psi, psi)?;
    check_not_self_orthogonal(psi, den)?;
    let opsi = psi.with_amps(o * &psi.amps);
    Ok(pt_inner(psi, &opsi)? / den)
}

/// Relative residuals ‖(PT)H(PT)⁻¹ − H†‖/‖H‖ (Frobenius).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PtSymmetryResidual {
    /// Fields transformed by the P⁰/T⁰ rules.
    pub rules: f64,
    /// Whole matrix conjugated with the grid reflection, fields included.
    pub literal: f64,
}

pub fn pseudo_pt_symmetry_residual(h: &DiracHamiltonian, field: &FieldConfig) -> PtSymmetryResidual {
    let pt = PtOperator::default();
    let (sa, sphi) = field.pt_rule_signs();
    let hm = h.matrix();
    let target = hm.adjoint();
    let scale = hm.norm();
    let by_rules = pt.conjugate_operator(&h.free)
        + pt.conjugate_field_operator(&h.vector, sa)
        + pt.conjugate_field_operator(&h.scalar, sphi);
    let literal = pt.conjugate_operator(hm);
    PtSymmetryResidual { rules: (by_rules - &target).norm() / scale, literal: (literal - &target).norm() / scale }
}

/// For the Hermitian variant the comparison target is H itself.
pub fn pt_residual_against_self(h: &DiracHamiltonian, field: &FieldConfig) -> PtSymmetryResidual {
    assert_eq!(h.variant, Variant::Hermitian);
    pseudo_pt_symmetry_residual(h, field)
}

/// Free quartet at fixed momentum along x: eigenpairs of the pseudo-PT
/// Hamiltonian and the Gram matrix a†(βΣ₂)b of the spinor-level PT product.
#[derive(Clone, Debug)]
pub struct FreeQuartet {
    pub eigenvalues: [C64; 4],
    pub vectors: [[C64; 4]; 4],
    pub gram: Mat4,
}

pub fn free_quartet(px: f64, params: &PhysicalParams) -> FreeQuartet {
    let s = build_matrix_set();
    let h = free_hamiltonian([px, 0.0, 0.0], params);
    // H = iK with K Hermitian; βΣ₂ commutes with K for momentum along x,
    // so a small admixture splits degeneracies into joint eigenvectors.
    let k = h * (-I);
    let metric = s.beta * s.sigma[1];
    let probe = k + metric * re(0.123_456_7 * (1.0 + k.norm()));
    let eig = nalgebra::SymmetricEigen::new(probe);
    let mut vectors = [[C64::new(0.0, 0.0); 4]; 4];
    let mut eigenvalues = [C64::new(0.0, 0.0); 4];
    for a in 0..4 {
        let v = eig.eigenvectors.column(a);
        let kv = k * v;
        eigenvalues[a] = I * v.dotc(&kv);
        for i in 0..4 {
            vectors[a][i] = v[i];
        }
    }
    let mut gram = Mat4::zeros();
    for a in 0..4 {
        for b in 0..4 {
            let va = nalgebra::Vector4::from_column_slice(&vectors[a]);
            let vb = nalgebra::Vector4::from_column_slice(&vectors[b]);
            gram[(a, b)] = va.dotc(&(metric * vb));
        }
    }
    FreeQuartet { eigenvalues, vectors, gram }
}

/// Centered-difference Ehrenfest residual along a stored trajectory:
/// |d/dt⟨O⟩ − ⟨i[H,O] + ∂ₜO⟩| at every interior time.
pub fn ehrenfest_residual<FO, FH>(traj: &QuantumTrajectory, mut o: FO, mut h: FH) -> Result<Vec<f64>, PtError>
where
    FO: FnMut(f64) -> CMat,
    FH: FnMut(f64) -> CMat,
{
    let nt = traj.states.len();
    if nt < 3 {
        return Err(PtError::TooFewTimes(nt));
    }
    let mut out = Vec::with_capacity(nt - 2);
    let mut ops: Vec<CMat> = traj.times.iter().map(|&t| o(t)).collect();
    let mut exps = Vec::with_capacity(nt);
    for (psi, op) in traj.states.iter().zip(&ops) {
        exps.push(pseudo_expectation(psi, op)?);
    }
    for i in 1..nt - 1 {
        let dt2 = traj.times[i + 1] - traj.times[i - 1];
        let lhs = (exps[i + 1] - exps[i - 1]) / dt2;
        let hi = h(traj.times[i]);
        let doi = (&ops[i + 1] - &ops[i - 1]) / re(dt2);
        let gen = (&hi * &ops[i] - &ops[i] * &hi) * I + doi;
        let rhs = pseudo_expectation(&traj.states[i], &gen)?;
        out.push((lhs - rhs).norm());
    }
    ops.clear();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::hamiltonian::build_dirac_hamiltonian;
    use crate::fields::FieldKind;

    fn random_field(n: usize, seed: u64) -> SpinorField {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let amps = CVec::from_fn(4 * n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        SpinorField::new(amps, n, 0.25)
    }

    #[test]
    fn double_application_gives_recorded_sign() {
        let pt = PtOperator::default();
        assert_eq!(pt.square_sign, -1.0);
        for seed in 0..20 {
            let psi = random_field(8, seed);
            let back = pt.apply(&pt.apply(&psi));
            assert!((back.amps - psi.amps * re(pt.square_sign)).iter().all(|z| z.norm() < 1e-15));
        }
    }

    #[test]
    fn antilinear() {
        let psi = random_field(8, 3);
        let z = C64::new(0.3, -1.7);
        let lhs = pt_apply(&psi.scale(z));
        let rhs = pt_apply(&psi).scale(z.conj());
        assert!((lhs.amps - rhs.amps).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn plane_wave_keeps_phase_gradient() {
        let g = make_grid(16, 8.0).unwrap();
        let k = g.k[2];
        let u = [C64::new(0.2, 0.1), C64::new(1.0, 0.0), C64::new(0.0, -0.4), C64::new(0.5, 0.5)];
        let amps = CVec::from_fn(64, |r, _| u[r / 16] * C64::from_polar(1.0, k * g.x[r % 16]));
        let out = pt_apply(&SpinorField::new(amps, 16, g.dx));
        let pt = PtOperator::default();
        let rotated: Vec<C64> = (0..4).map(|s| (0..4).map(|t| pt.spinor[(s, t)] * u[t].conj()).sum()).collect();
        for r in 0..64 {
            let want = rotated[r / 16] * C64::from_polar(1.0, k * g.x[r % 16]);
            assert!((out.amps[r] - want).norm() < 1e-14);
        }
    }

    #[test]
    fn inner_linear_in_second_argument() {
        let a = random_field(8, 1);
        let b = random_field(8, 2);
        let z = C64::new(-0.4, 2.0);
        let lhs = pt_inner(&a, &b.scale(z)).unwrap();
        assert!((lhs - z * pt_inner(&a, &b).unwrap()).norm() < 1e-13);
        assert_eq!(pt_inner(&a, &random_field(16, 0)), Err(PtError::GridMismatch(8, 16)));
    }

    #[test]
    fn pt_norm_is_real() {
        for seed in 0..10 {
            let a = random_field(8, seed);
            assert!(pt_inner(&a, &a).unwrap().im.abs() < 1e-13);
        }
    }

    #[test]
    fn normalized_state_has_unit_norm() {
        let psi = pt_normalize(&random_field(8, 5)).unwrap();
        assert!((psi.pt_norm.unwrap().norm() - 1.0).abs() < 1e-13);
        let o = CMat::identity(32, 32);
        assert!((pseudo_expectation(&psi, &o).unwrap() - re(1.0)).norm() < 1e-13);
    }

    #[test]
    fn spin_up_z_is_self_orthogonal() {
        let n = 8;
        let amps = CVec::from_fn(4 * n, |r, _| if r < n { re(1.0) } else { re(0.0) });
        let psi = SpinorField::new(amps, n, 0.5);
        assert!(matches!(pseudo_expectation(&psi, &CMat::identity(32, 32)), Err(PtError::SelfOrthogonal(_))));
    }

    #[test]
    fn free_quartet_biorthogonal_with_both_signs() {
        let p = PhysicalParams::new(1.0, 1.0, -1.0);
        for px in [0.0, 0.4, -1.3] {
            let q = free_quartet(px, &p);
            let mut signs = Vec::new();
            for a in 0..4 {
                for b in 0..4 {
                    if a != b {
                        assert!(q.gram[(a, b)].norm() < 1e-10);
                    }
                }
                signs.push(q.gram[(a, a)].re.signum());
                assert!((q.gram[(a, a)].norm() - 1.0).abs() < 1e-10);
                let en = (1.0 + px * px).sqrt();
                assert!((q.eigenvalues[a].im.abs() - en).abs() < 1e-10 && q.eigenvalues[a].re.abs() < 1e-12);
            }
            assert!(signs.contains(&1.0) && signs.contains(&-1.0));
        }
    }

    #[test]
    fn free_hamiltonian_is_pt_symmetric() {
        let g = make_grid(16, 10.0).unwrap();
        let h = build_dirac_hamiltonian(&g, &FieldConfig::zero(), 0.0, &PhysicalParams::new(1.0, 1.0, -1.0), Variant::PseudoPt);
        let r = pseudo_pt_symmetry_residual(&h, &FieldConfig::zero());
        assert!(r.rules < 1e-15 && r.literal < 1e-15);
    }

    #[test]
    fn odd_fields_break_literal_conjugation_only() {
        let g = make_grid(16, 20.0).unwrap();
        let p = PhysicalParams::default();
        for kind in [FieldKind::UniformB, FieldKind::UniformE] {
            let f = FieldConfig::for_grid(kind, &g);
            let h = build_dirac_hamiltonian(&g, &f, 0.0, &p, Variant::PseudoPt);
            let r = pseudo_pt_symmetry_residual(&h, &f);
            assert!(r.rules < 1e-12, "{kind}: {}", r.rules);
            assert!(r.literal > 1e-3, "{kind}: {}", r.literal);
        }
    }
}
