use meanspin::classical::{component_bracket_residuals, hamilton_flow, rotate_about_field, POLE_LIMIT};
use meanspin::config::{parse_config, ConfigError, RunConfig};
use meanspin::fields::{FieldConfig, FieldKind, PhysicalParams};
use meanspin::llg::{gilbert_constant, llg_integrate, rotate, LlgError, LlgParams};
use meanspin::traj::{norm3, Vec3};
use proptest::prelude::*;

fn unit(theta: f64, phi: f64) -> Vec3 {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

fn uniform_params(alpha: f64) -> LlgParams {
    let mut p = LlgParams::new(FieldConfig::new(FieldKind::UniformB, 20.0), PhysicalParams::new(1.0, 1.0, -1.0), 2.0);
    p.alpha_g = alpha;
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn llg_preserves_magnitude(theta in 0.1..3.0f64, phi in 0.0..6.2f64, alpha in 0.0..0.5f64) {
        let p = uniform_params(alpha);
        let m0 = unit(theta, phi).map(|x| x * p.m_s);
        let tr = llg_integrate(&m0, &p, 0.0, 2.0, 0.01).unwrap();
        for m in &tr.m {
            prop_assert!((norm3(m) - p.m_s).abs() < 1e-12 * p.m_s);
        }
    }

    #[test]
    fn rotation_is_orthogonal(v in prop::array::uniform3(-2.0..2.0f64), w in prop::array::uniform3(-3.0..3.0f64)) {
        let r = rotate(&v, &w);
        prop_assert!((norm3(&r) - norm3(&v)).abs() < 1e-13 * (1.0 + norm3(&v)));
        let d = |a: &Vec3, b: &Vec3| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        prop_assert!((d(&r, &w) - d(&v, &w)).abs() < 1e-12 * (1.0 + norm3(&v) * norm3(&w)));
    }

    #[test]
    fn spin_brackets_close(theta in 0.2..2.9f64, phi in 0.0..6.2f64, s in 0.1..5.0f64) {
        let v = unit(theta, phi).map(|x| x * s);
        prop_assume!(v[2].abs() < POLE_LIMIT * s);
        let (a, fd) = component_bracket_residuals(&v, 1e-5).unwrap();
        prop_assert!(a < 1e-12 * (1.0 + s), "{a}");
        prop_assert!(fd < 1e-7 * (1.0 + s * s), "{fd}");
    }

    #[test]
    fn gilbert_constant_is_positive(e in prop_oneof![-3.0..-0.1f64, 0.1..3.0f64], chi in 0.1..10.0f64) {
        let a = gilbert_constant(&PhysicalParams::new(2.0, 1.5, e), 1.0, chi).unwrap();
        prop_assert!(a > 0.0);
    }
}

#[test]
fn undamped_llg_matches_rotation() {
    let p = uniform_params(0.0);
    let m0 = unit(1.0, 0.3).map(|x| x * p.m_s);
    let tr = llg_integrate(&m0, &p, 0.0, 3.0, 0.01).unwrap();
    let b = p.field.b(0.0, 0.0);
    let exact = rotate(&m0, &b.map(|x| x * p.gamma * 3.0));
    let got = tr.last();
    for k in 0..3 {
        assert!((got[k] - exact[k]).abs() < 1e-10, "{got:?} vs {exact:?}");
    }
}

#[test]
fn llg_rejects_bad_input() {
    let p = uniform_params(0.1);
    assert!(matches!(llg_integrate(&[1.0, 0.0, 0.0], &p, 0.0, 1.0, 0.01), Err(LlgError::NormMismatch { .. })));
    assert!(matches!(llg_integrate(&[2.0, 0.0, 0.0], &p, 0.0, 1.0, 0.3), Err(LlgError::BadStep(_))));
    let mut q = uniform_params(0.1);
    q.chi_m = 0.0;
    assert_eq!(q.validate(), Err(LlgError::ZeroPolarizability));
}

#[test]
fn classical_flow_tracks_rotation() {
    let b = [0.3, -0.2, 1.0];
    let s0 = [0.6, 0.1, 0.3];
    let tr = hamilton_flow(&s0, |_, _| b, 0.0, 2.0, 1e-3).unwrap();
    let exact = rotate_about_field(&s0, &b, 2.0);
    for k in 0..3 {
        assert!((tr.last()[k] - exact[k]).abs() < 1e-7, "{:?} vs {exact:?}", tr.last());
    }
}

#[test]
fn config_errors_are_typed() {
    assert!(matches!(parse_config("run.dt=0"), Err(ConfigError::OutOfRange { .. })));
    assert!(matches!(parse_config("run.dt=fast"), Err(ConfigError::BadType { .. })));
    assert!(matches!(parse_config("field.kind="), Err(ConfigError::MissingValue(_))));
    assert!(matches!(parse_config("llg.closure=magic"), Err(ConfigError::BadType { .. })));
    assert!(matches!(parse_config("sweep.m=8"), Err(ConfigError::OutOfRange { .. })));
}

#[test]
fn config_reads_every_section() {
    let text = "grid.n = 32\ngrid.length = 12\nphysical.m = 16, physical.c = 2\nfield.kind = harmonic_B\n\
                run.t1 = 2.5, run.dt = 0.01, run.seed = 7\nllg.alpha = 0.2, llg.closure = external_field\n\
                spin.theta = 1.1\nsweep.m = 8, 16\n";
    let c = parse_config(text).unwrap();
    assert_eq!((c.n, c.length, c.params.m, c.params.c), (32, 12.0, 16.0, 2.0));
    assert_eq!(c.field_kind, FieldKind::HarmonicB);
    assert_eq!((c.t1, c.dt, c.seed), (2.5, 0.01, 7));
    assert_eq!(c.alpha_g, 0.2);
    assert!(c.closure.is_some());
    assert_eq!(c.theta, 1.1);
    assert_eq!(c.sweep_masses, vec![8.0, 16.0]);
    assert_eq!(c.out_dir, RunConfig::default().out_dir);
}

proptest! {
    #[test]
    fn config_numbers_round_trip(dt in 1e-6..1.0f64, n in 4usize..200, seed in any::<u64>()) {
        let text = format!("run.dt = {dt:e}\ngrid.n = {}\nrun.seed = {seed}", 2 * n);
        let c = parse_config(&text).unwrap();
        prop_assert_eq!(c.dt, dt);
        prop_assert_eq!(c.n, 2 * n);
        prop_assert_eq!(c.seed, seed);
    }
}
