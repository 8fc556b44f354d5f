//! Classical magnetization dynamics: Landau-Lifshitz-Gilbert and the raw
//! mean-spin equation of motion, stepped by exact rotations so |M| is kept.

use thiserror::Error;

use crate::fields::{FieldConfig, PhysicalParams};
use crate::traj::{cross3, norm3, MagnetizationTrajectory, Vec3};

#[derive(Debug, Error, PartialEq)]
pub enum LlgError {
    #[error("invalid parameters: {0}")]
    BadParams(String),
    #[error("|M0| = {got} differs from M_s = {want}")]
    NormMismatch { got: f64, want: f64 },
    #[error("time step must be positive and divide t1 - t0 into whole steps (dt = {0})")]
    BadStep(f64),
    #[error("magnetic polarizability must be nonzero")]
    ZeroPolarizability,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LlgParams {
    pub gamma: f64,
    pub alpha_g: f64,
    /// Magnetic polarizability; infinite means no medium response.
    pub chi_m: f64,
    pub m_s: f64,
    pub v: Vec3,
    pub field: FieldConfig,
    pub params: PhysicalParams,
    /// Point at which the fields are evaluated.
    pub x0: f64,
}

impl LlgParams {
    /// Free electron gyromagnetic ratio γ = −e/m, no damping.
    pub fn new(field: FieldConfig, params: PhysicalParams, m_s: f64) -> Self {
        LlgParams {
            gamma: -params.e / params.m,
            alpha_g: 0.0,
            chi_m: f64::INFINITY,
            m_s,
            v: [0.0; 3],
            field,
            params,
            x0: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), LlgError> {
        if !(self.gamma > 0.0) {
            return Err(LlgError::BadParams(format!("gamma must be > 0, got {}", self.gamma)));
        }
        if !(self.m_s > 0.0) {
            return Err(LlgError::BadParams(format!("M_s must be > 0, got {}", self.m_s)));
        }
        if !(self.alpha_g >= 0.0) {
            return Err(LlgError::BadParams(format!("alpha_g must be >= 0, got {}", self.alpha_g)));
        }
        if self.chi_m == 0.0 {
            return Err(LlgError::ZeroPolarizability);
        }
        Ok(())
    }
}

/// B − (1/2c²) v∧E at the point x.
pub fn effective_field_at(field: &FieldConfig, v: &Vec3, x: f64, t: f64, params: &PhysicalParams) -> Vec3 {
    let b = field.b(x, t);
    let ve = cross3(v, &field.e(x, t));
    let k = 1.0 / (2.0 * params.c * params.c);
    [b[0] - k * ve[0], b[1] - k * ve[1], b[2] - k * ve[2]]
}

pub fn effective_field(field: &FieldConfig, v: &Vec3, t: f64, params: &PhysicalParams) -> Vec3 {
    effective_field_at(field, v, 0.0, t, params)
}

/// |e|M_s/(4m²c²χ_m).
pub fn gilbert_constant(params: &PhysicalParams, m_s: f64, chi_m: f64) -> Result<f64, LlgError> {
    if chi_m == 0.0 {
        return Err(LlgError::ZeroPolarizability);
    }
    let (m, c) = (params.m, params.c);
    Ok(params.e.abs() * m_s / (4.0 * m * m * c * c * chi_m))
}

/// Rodrigues rotation of v by the rotation vector w (angle |w|).
pub fn rotate(v: &Vec3, w: &Vec3) -> Vec3 {
    let th = norm3(w);
    if th == 0.0 {
        return *v;
    }
    let k = w.map(|x| x / th);
    let (s, c) = th.sin_cos();
    let kv = cross3(&k, v);
    let kd = k[0] * v[0] + k[1] * v[1] + k[2] * v[2];
    [0, 1, 2].map(|i| v[i] * c + kv[i] * s + k[i] * kd * (1.0 - c))
}

fn step_count(t0: f64, t1: f64, dt: f64) -> Result<usize, LlgError> {
    let span = t1 - t0;
    if !(dt > 0.0) || !(span > 0.0) {
        return Err(LlgError::BadStep(dt));
    }
    let n = (span / dt).round() as usize;
    if n == 0 || (n as f64 * dt - span).abs() > 1e-9 * span.max(1.0) {
        return Err(LlgError::BadStep(dt));
    }
    Ok(n)
}

/// Integrates dM/dt = ω(M, t)∧M with a midpoint rotation step.
fn rotation_integrate<W>(m0: &Vec3, t0: f64, t1: f64, dt: f64, omega: W) -> Result<MagnetizationTrajectory, LlgError>
where
    W: Fn(&Vec3, f64) -> Vec3,
{
    let steps = step_count(t0, t1, dt)?;
    let mut times = Vec::with_capacity(steps + 1);
    let mut ms = Vec::with_capacity(steps + 1);
    let mut m = *m0;
    let len0 = norm3(m0);
    times.push(t0);
    ms.push(m);
    for k in 0..steps {
        let t = t0 + k as f64 * dt;
        let th = t + 0.5 * dt;
        let half = rotate(&m, &omega(&m, th).map(|x| x * 0.5 * dt));
        m = rotate(&m, &omega(&half, th).map(|x| x * dt));
        // The rotation is exact; this only removes accumulated rounding.
        let len = norm3(&m);
        m = m.map(|x| x * len0 / len);
        times.push(t0 + (k + 1) as f64 * dt);
        ms.push(m);
    }
    MagnetizationTrajectory::new(times, ms).map_err(|e| LlgError::BadParams(e.to_string()))
}

fn check_norm(m0: &Vec3, m_s: f64) -> Result<(), LlgError> {
    let got = norm3(m0);
    if (got - m_s).abs() > 1e-12 * m_s {
        return Err(LlgError::NormMismatch { got, want: m_s });
    }
    Ok(())
}

/// Rotation vector of the Landau-Lifshitz form of the Gilbert equation:
/// γ/(1+α²)·(B + (α/M_s) M∧B).
fn gilbert_omega(m: &Vec3, b: &Vec3, gamma: f64, alpha: f64, m_s: f64) -> Vec3 {
    let g = gamma / (1.0 + alpha * alpha);
    let mb = cross3(m, b);
    [0, 1, 2].map(|i| g * (b[i] + alpha / m_s * mb[i]))
}

pub fn llg_integrate(m0: &Vec3, p: &LlgParams, t0: f64, t1: f64, dt: f64) -> Result<MagnetizationTrajectory, LlgError> {
    p.validate()?;
    check_norm(m0, p.m_s)?;
    rotation_integrate(m0, t0, t1, dt, |m, t| {
        let b = effective_field_at(&p.field, &p.v, p.x0, t, &p.params);
        gilbert_omega(m, &b, p.gamma, p.alpha_g, p.m_s)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Closure {
    /// ∂ₜB taken from the field model.
    ExternalField,
    /// ∂ₜB = (1/χ_m)∂ₜM.
    PolarizableMedium,
}

/// The raw equation's damping coefficient after the medium substitution,
/// e·M_s/(4m²c²χ_m) with the charge sign kept.
pub fn raw_medium_alpha(params: &PhysicalParams, m_s: f64, chi_m: f64) -> Result<f64, LlgError> {
    if chi_m == 0.0 {
        return Err(LlgError::ZeroPolarizability);
    }
    let (m, c) = (params.m, params.c);
    Ok(params.e * m_s / (4.0 * m * m * c * c * chi_m))
}

/// dM/dt = (e/m)M∧B − (e/4m²c²)M∧∂ₜB + (e/2mc²)M∧(E∧v).
pub fn raw_eom_integrate(
    m0: &Vec3,
    p: &LlgParams,
    t0: f64,
    t1: f64,
    dt: f64,
    closure: Closure,
) -> Result<MagnetizationTrajectory, LlgError> {
    p.validate()?;
    check_norm(m0, p.m_s)?;
    let PhysicalParams { m, c, e, .. } = p.params;
    let c2 = c * c;
    match closure {
        Closure::ExternalField => rotation_integrate(m0, t0, t1, dt, |_, t| {
            let b = p.field.b(p.x0, t);
            let db = p.field.dt_b(p.x0, t);
            let ev = cross3(&p.field.e(p.x0, t), &p.v);
            [0, 1, 2].map(|i| -(e / m * b[i] - e / (4.0 * m * m * c2) * db[i] + e / (2.0 * m * c2) * ev[i]))
        }),
        Closure::PolarizableMedium => {
            // (e/m)M∧B + (e/2mc²)M∧(E∧v) = −γ M∧B_eff with γ = −e/m, and the
            // ∂ₜM term is Gilbert damping with the signed coefficient below.
            let alpha = raw_medium_alpha(&p.params, p.m_s, p.chi_m)?;
            let gamma = -e / m;
            rotation_integrate(m0, t0, t1, dt, |mv, t| {
                let b = effective_field_at(&p.field, &p.v, p.x0, t, &p.params);
                gilbert_omega(mv, &b, gamma, alpha, p.m_s)
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::FieldKind;
    use crate::traj::{polar_decay_rate, precession_frequency};

    fn uniform_b(b0: f64) -> FieldConfig {
        let mut f = FieldConfig::new(FieldKind::UniformB, 20.0);
        f.b0 = b0;
        f
    }

    fn unit_params() -> PhysicalParams {
        PhysicalParams::new(1.0, 1.0, -1.0)
    }

    #[test]
    fn effective_field_cross_product() {
        let mut f = FieldConfig::new(FieldKind::UniformE, 20.0);
        f.e0 = 2.0;
        let p = unit_params();
        assert_eq!(effective_field(&f, &[0.0; 3], 0.0, &p), f.b(0.0, 0.0));
        let e = f.e(0.0, 0.0);
        assert_eq!(effective_field(&f, &e, 0.0, &p), [0.0; 3]);
    }

    #[test]
    fn gilbert_constant_scaling() {
        let p = unit_params();
        assert_eq!(gilbert_constant(&p, 1.0, 1.0).unwrap(), 0.25);
        let a2 = gilbert_constant(&p.with_mass(2.0), 1.0, 1.0).unwrap();
        assert_eq!(a2, 0.0625);
        assert_eq!(gilbert_constant(&p, 1.0, f64::INFINITY).unwrap(), 0.0);
        assert_eq!(gilbert_constant(&p, 1.0, 0.0), Err(LlgError::ZeroPolarizability));
    }

    #[test]
    fn rejects_wrong_initial_norm() {
        let p = LlgParams::new(uniform_b(1.0), unit_params(), 1.0);
        assert!(matches!(llg_integrate(&[0.5, 0.0, 0.0], &p, 0.0, 1.0, 0.1), Err(LlgError::NormMismatch { .. })));
        let mut bad = p.clone();
        bad.gamma = -1.0;
        assert!(matches!(llg_integrate(&[1.0, 0.0, 0.0], &bad, 0.0, 1.0, 0.1), Err(LlgError::BadParams(_))));
    }

    #[test]
    fn fixed_point_along_field() {
        let mut p = LlgParams::new(uniform_b(1.0), unit_params(), 1.0);
        p.alpha_g = 0.3;
        let tr = llg_integrate(&[0.0, 0.0, 1.0], &p, 0.0, 5.0, 0.01).unwrap();
        assert_eq!(tr.last(), [0.0, 0.0, 1.0]);
    }

    #[test]
    fn undamped_precession_frequency() {
        let p = LlgParams::new(uniform_b(1.0), unit_params(), 1.0);
        let tr = llg_integrate(&[1.0, 0.0, 0.0], &p, 0.0, 50.0, 0.005).unwrap();
        let w = precession_frequency(&tr, &[0.0, 0.0, 1.0]);
        assert!((w - 1.0).abs() < 1e-3, "{w}");
        assert!(tr.norm_drift() < 1e-12);
    }

    #[test]
    fn damped_polar_angle_law() {
        let mut p = LlgParams::new(uniform_b(1.0), unit_params(), 1.0);
        p.alpha_g = 0.1;
        let tr = llg_integrate(&[1.0, 0.0, 0.0], &p, 0.0, 10.0, 0.01).unwrap();
        let rate = polar_decay_rate(&tr, &[0.0, 0.0, 1.0]);
        assert!((rate + 0.1 / 1.01).abs() < 1e-6, "{rate}");
    }

    #[test]
    fn raw_external_field_matches_llg_without_damping() {
        let mut f = FieldConfig::new(FieldKind::UniformE, 20.0);
        f.b0 = 1.0;
        let mut p = LlgParams::new(f, unit_params(), 1.0);
        p.v = [0.0, 0.3, 0.1];
        let a = llg_integrate(&[1.0, 0.0, 0.0], &p, 0.0, 5.0, 0.01).unwrap();
        let b = raw_eom_integrate(&[1.0, 0.0, 0.0], &p, 0.0, 5.0, 0.01, Closure::ExternalField).unwrap();
        for (x, y) in a.m.iter().zip(&b.m) {
            assert!(norm3(&[x[0] - y[0], x[1] - y[1], x[2] - y[2]]) < 1e-12);
        }
    }

    #[test]
    fn medium_closure_is_gilbert_with_signed_coefficient() {
        let mut p = LlgParams::new(uniform_b(1.0), unit_params(), 1.0);
        p.chi_m = 2.5;
        let alpha = raw_medium_alpha(&p.params, 1.0, 2.5).unwrap();
        assert_eq!(alpha, -0.1);
        let raw = raw_eom_integrate(&[1.0, 0.0, 0.0], &p, 0.0, 5.0, 0.01, Closure::PolarizableMedium).unwrap();
        let mut q = p.clone();
        q.alpha_g = alpha;
        let m0 = [1.0, 0.0, 0.0];
        let direct = rotation_integrate(&m0, 0.0, 5.0, 0.01, |m, t| {
            gilbert_omega(m, &effective_field_at(&q.field, &q.v, 0.0, t, &q.params), q.gamma, alpha, 1.0)
        })
        .unwrap();
        assert_eq!(raw.m, direct.m);
    }
}
