use meanspin::fields::{FieldConfig, FieldKind, PhysicalParams};
use meanspin::fw::{fw_hamiltonian_scaling, mean_spin_scaling, HfwForm};
use meanspin::grid::make_grid;

const MASSES: [f64; 4] = [8.0, 16.0, 32.0, 64.0];

fn params() -> PhysicalParams {
    PhysicalParams::new(32.0, 4.0, -1.0)
}

#[test]
fn mean_spin_orders_scale_as_inverse_powers() {
    let g = make_grid(32, 20.0).unwrap();
    for kind in [FieldKind::Zero, FieldKind::UniformB, FieldKind::HarmonicB] {
        let f = FieldConfig::for_grid(kind, &g);
        for order in 0..=3 {
            let rep = mean_spin_scaling(&g, &f, 1.0, &params(), &MASSES, order).unwrap();
            let want = -((order + 1) as f64);
            println!("{kind} order {order}: slope {:.3}", rep.slope);
            assert!((rep.slope - want).abs() < 0.3, "{kind} order {order}: {}", rep.slope);
            assert!(rep.max_s_norm < 0.5);
        }
    }
}

#[test]
fn corrected_hfw_reaches_fifth_order() {
    let g = make_grid(32, 20.0).unwrap();
    for kind in [FieldKind::Zero, FieldKind::UniformB, FieldKind::HarmonicB] {
        let f = FieldConfig::for_grid(kind, &g);
        let corrected = fw_hamiltonian_scaling(&g, &f, 1.0, &params(), &MASSES, HfwForm::Corrected, 1e-3);
        let printed = fw_hamiltonian_scaling(&g, &f, 1.0, &params(), &MASSES, HfwForm::Printed, 1e-3);
        println!("{kind}: corrected {:.3} printed {:.3}", corrected.slope, printed.slope);
        assert!((corrected.slope + 5.0).abs() < 0.3, "{kind}: {}", corrected.slope);
    }
}

#[test]
fn printed_hfw_p4_sign_limits_zero_field_to_third_order() {
    let g = make_grid(32, 20.0).unwrap();
    let rep = fw_hamiltonian_scaling(&g, &FieldConfig::zero(), 0.0, &params(), &MASSES, HfwForm::Printed, 1e-3);
    assert!((rep.slope + 3.0).abs() < 0.3, "{}", rep.slope);
}
