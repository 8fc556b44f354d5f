use meanspin::fields::{FieldConfig, FieldKind, PhysicalParams};
use meanspin::grid::make_grid;
use meanspin::hamiltonian::{build_dirac_hamiltonian, Variant};
use meanspin::linalg::{CVec, C64};
use meanspin::propagate::{propagate, upper_spinor, PropagateOptions, SeparableState};
use meanspin::pt::{pt_apply, pt_inner, pt_normalize, SpinorField};
use proptest::prelude::*;

const N: usize = 8;
const DX: f64 = 0.5;

fn field_from(v: &[(f64, f64)]) -> SpinorField {
    SpinorField::new(CVec::from_iterator(4 * N, v.iter().map(|&(a, b)| C64::new(a, b))), N, DX)
}

fn amps() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 4 * N)
}

fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pt_squares_to_minus_one(v in amps()) {
        let psi = field_from(&v);
        let back = pt_apply(&pt_apply(&psi));
        for (a, b) in back.amps.iter().zip(psi.amps.iter()) {
            prop_assert!(close(*a, -*b, 1e-14));
        }
    }

    #[test]
    fn pt_is_antilinear(v in amps(), w in amps(), a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let (x, y) = (field_from(&v), field_from(&w));
        let z = C64::new(a, b);
        let lhs = pt_apply(&x.with_amps(&x.amps * z + &y.amps));
        let rhs = &pt_apply(&x).amps * z.conj() + &pt_apply(&y).amps;
        for (p, q) in lhs.amps.iter().zip(rhs.iter()) {
            prop_assert!(close(*p, *q, 1e-13));
        }
    }

    #[test]
    fn pt_norm_is_real(v in amps()) {
        let psi = field_from(&v);
        let nrm = pt_inner(&psi, &psi).unwrap();
        prop_assert!(nrm.im.abs() <= 1e-13 * (1.0 + nrm.re.abs()));
    }

    #[test]
    fn pt_inner_is_hermitian_symmetric(v in amps(), w in amps()) {
        let (x, y) = (field_from(&v), field_from(&w));
        let a = pt_inner(&x, &y).unwrap();
        let b = pt_inner(&y, &x).unwrap();
        prop_assert!(close(a, b.conj(), 1e-13));
    }

    #[test]
    fn pt_inner_is_sesquilinear(v in amps(), w in amps(), a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let (x, y) = (field_from(&v), field_from(&w));
        let z = C64::new(a, b);
        let lin = pt_inner(&x, &y.scale(z)).unwrap();
        let anti = pt_inner(&x.scale(z), &y).unwrap();
        let base = pt_inner(&x, &y).unwrap();
        prop_assert!(close(lin, base * z, 1e-13));
        prop_assert!(close(anti, base * z.conj(), 1e-13));
    }

    #[test]
    fn normalized_state_has_unit_pt_norm(theta in 0.2..2.9f64, phi in 0.3..1.2f64) {
        let g = make_grid(16, 10.0).unwrap();
        let psi = SeparableState::default_packet(&g, upper_spinor(theta, phi)).to_field(g.dx);
        let p = pt_normalize(&psi).unwrap();
        let nrm = pt_inner(&p, &p).unwrap();
        prop_assert!((nrm.norm() - 1.0).abs() < 1e-12, "{nrm}");
    }
}

#[test]
fn grid_mismatch_is_reported() {
    let a = field_from(&[(1.0, 0.0); 4 * N]);
    let b = SpinorField::new(CVec::zeros(40), 10, DX);
    assert!(pt_inner(&a, &b).is_err());
}

#[test]
fn spin_up_z_is_self_orthogonal() {
    let g = make_grid(16, 10.0).unwrap();
    let psi = SeparableState::default_packet(&g, upper_spinor(0.0, 0.0)).to_field(g.dx);
    assert!(pt_normalize(&psi).is_err());
}

fn evolve_error(dt: f64) -> f64 {
    let g = make_grid(16, 10.0).unwrap();
    let params = PhysicalParams::new(2.0, 1.0, -1.0);
    let field = FieldConfig::for_grid(FieldKind::HarmonicB, &g);
    let psi = SeparableState::default_packet(&g, upper_spinor(1.0, 0.5)).to_field(g.dx);
    let opts = PropagateOptions::default();
    let h = |t: f64| build_dirac_hamiltonian(&g, &field, t, &params, Variant::Hermitian).matrix().clone();
    let coarse = propagate(h, &psi, 0.0, 1.0, dt, &opts).unwrap();
    let h = |t: f64| build_dirac_hamiltonian(&g, &field, t, &params, Variant::Hermitian).matrix().clone();
    let fine = propagate(h, &psi, 0.0, 1.0, dt / 16.0, &opts).unwrap();
    let a = &coarse.states.last().unwrap().amps;
    let b = &fine.states.last().unwrap().amps;
    (a - b).norm()
}

#[test]
fn midpoint_step_is_second_order() {
    let e1 = evolve_error(0.1);
    let e2 = evolve_error(0.05);
    let ratio = e1 / e2;
    assert!((ratio - 4.0).abs() < 1.2, "error ratio {ratio} ({e1:.3e} / {e2:.3e})");
}

#[test]
fn hermitian_evolution_keeps_conventional_norm() {
    let g = make_grid(16, 10.0).unwrap();
    let params = PhysicalParams::new(2.0, 1.0, -1.0);
    let field = FieldConfig::for_grid(FieldKind::UniformB, &g);
    let psi = SeparableState::default_packet(&g, upper_spinor(1.0, 0.5)).to_field(g.dx);
    let h = build_dirac_hamiltonian(&g, &field, 0.0, &params, Variant::Hermitian).matrix().clone();
    let opts = PropagateOptions { static_h: true, ..Default::default() };
    let tr = propagate(|_| h.clone(), &psi, 0.0, 1.0, 0.01, &opts).unwrap();
    let n0 = psi.conv_norm();
    for s in &tr.states {
        assert!((s.conv_norm() - n0).abs() < 1e-11 * n0);
    }
}
