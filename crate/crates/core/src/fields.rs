//! Analytic electromagnetic field families in one spatial dimension.
//!
//! Linear-in-x potentials are multiplied by a smooth window `w` that is 1 on
//! |x| < L/4 and falls to 0 at |x| = L/2, so that they fit the periodic grid.

use std::fmt;
use std::str::FromStr;

use crate::grid::Grid;
use crate::linalg::re;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalParams {
    pub m: f64,
    pub c: f64,
    pub e: f64,
    /// Constant transverse momenta (p_y, p_z).
    pub p_perp: [f64; 2],
}

impl Default for PhysicalParams {
    fn default() -> Self {
        PhysicalParams { m: 32.0, c: 4.0, e: -1.0, p_perp: [0.0, 0.0] }
    }
}

impl PhysicalParams {
    pub fn new(m: f64, c: f64, e: f64) -> Self {
        assert!(m > 0.0 && c > 0.0 && e != 0.0, "need m > 0, c > 0, e != 0");
        PhysicalParams { m, c, e, p_perp: [0.0, 0.0] }
    }

    pub fn with_mass(self, m: f64) -> Self {
        PhysicalParams { m, ..self }
    }

    pub fn bohr_magneton(&self) -> f64 {
        self.e / (2.0 * self.m)
    }

    pub fn compton_wavelength(&self) -> f64 {
        2.0 * std::f64::consts::PI / (self.m * self.c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldKind {
    Zero,
    UniformB,
    UniformE,
    HarmonicB,
    Custom1d,
}

impl FromStr for FieldKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "zero" => FieldKind::Zero,
            "uniform_B" => FieldKind::UniformB,
            "uniform_E" => FieldKind::UniformE,
            "harmonic_B" => FieldKind::HarmonicB,
            "custom_1d" => FieldKind::Custom1d,
            _ => return Err(format!("unknown field kind '{s}'")),
        })
    }
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FieldKind::Zero => "zero",
            FieldKind::UniformB => "uniform_B",
            FieldKind::UniformE => "uniform_E",
            FieldKind::HarmonicB => "harmonic_B",
            FieldKind::Custom1d => "custom_1d",
        })
    }
}

pub type Vec3 = [f64; 3];

/// Field family with amplitudes in reduced units.
///
/// `custom_1d` is the periodic family A_y = (B₀/κ) sin κx cos ωt,
/// Φ = −(E₀/κ) sin κx; it is not windowed.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldConfig {
    pub kind: FieldKind,
    pub b0: f64,
    pub e0: f64,
    pub omega: f64,
    pub kappa: f64,
    /// Window period L; `None` keeps the bare linear profiles.
    pub window: Option<f64>,
}

impl FieldConfig {
    pub fn new(kind: FieldKind, length: f64) -> Self {
        FieldConfig { kind, b0: 1.0, e0: 0.3, omega: 0.2, kappa: 2.0 * std::f64::consts::PI / length, window: Some(length) }
    }

    pub fn zero() -> Self {
        FieldConfig { kind: FieldKind::Zero, b0: 0.0, e0: 0.0, omega: 0.0, kappa: 1.0, window: None }
    }

    pub fn for_grid(kind: FieldKind, grid: &Grid) -> Self {
        Self::new(kind, grid.length)
    }

    pub fn unwindowed(mut self) -> Self {
        self.window = None;
        self
    }

    /// Spatial profile f(x) = x·w(x) and its derivative.
    fn profile(&self, x: f64) -> (f64, f64) {
        match self.window {
            None => (x, 1.0),
            Some(l) => {
                let (w, dw) = window(x, l);
                (x * w, w + x * dw)
            }
        }
    }

    /// Time factor of the vector potential and its first two derivatives.
    fn time_factor(&self, t: f64) -> (f64, f64, f64) {
        match self.kind {
            FieldKind::HarmonicB | FieldKind::Custom1d => {
                let (s, c) = (self.omega * t).sin_cos();
                (c, -self.omega * s, -self.omega * self.omega * c)
            }
            _ => (1.0, 0.0, 0.0),
        }
    }

    /// A_y spatial shape and derivative (vector potential only has a y part).
    fn a_shape(&self, x: f64) -> (f64, f64) {
        match self.kind {
            FieldKind::UniformB | FieldKind::HarmonicB => {
                let (f, df) = self.profile(x);
                (self.b0 * f, self.b0 * df)
            }
            FieldKind::Custom1d => {
                let (s, c) = (self.kappa * x).sin_cos();
                (self.b0 * s / self.kappa, self.b0 * c)
            }
            _ => (0.0, 0.0),
        }
    }

    /// Φ spatial shape and derivative.
    fn phi_shape(&self, x: f64) -> (f64, f64) {
        match self.kind {
            FieldKind::UniformE => {
                let (f, df) = self.profile(x);
                (-self.e0 * f, -self.e0 * df)
            }
            FieldKind::Custom1d => {
                let (s, c) = (self.kappa * x).sin_cos();
                (-self.e0 * s / self.kappa, -self.e0 * c)
            }
            _ => (0.0, 0.0),
        }
    }

    pub fn a(&self, x: f64, t: f64) -> Vec3 {
        [0.0, self.a_shape(x).0 * self.time_factor(t).0, 0.0]
    }

    pub fn dt_a(&self, x: f64, t: f64) -> Vec3 {
        [0.0, self.a_shape(x).0 * self.time_factor(t).1, 0.0]
    }

    pub fn dtt_a(&self, x: f64, t: f64) -> Vec3 {
        [0.0, self.a_shape(x).0 * self.time_factor(t).2, 0.0]
    }

    pub fn phi(&self, x: f64, _t: f64) -> f64 {
        self.phi_shape(x).0
    }

    /// E = −∇Φ − ∂ₜA.
    pub fn e(&self, x: f64, t: f64) -> Vec3 {
        let da = self.dt_a(x, t);
        [-self.phi_shape(x).1 - da[0], -da[1], -da[2]]
    }

    /// B = ∇∧A with only x dependence: (0, −∂ₓA_z, ∂ₓA_y).
    pub fn b(&self, x: f64, t: f64) -> Vec3 {
        [0.0, 0.0, self.a_shape(x).1 * self.time_factor(t).0]
    }

    /// ∂ₜE (Φ is static for every family).
    pub fn dt_e(&self, x: f64, t: f64) -> Vec3 {
        let d = self.dtt_a(x, t);
        [-d[0], -d[1], -d[2]]
    }

    pub fn dt_b(&self, x: f64, t: f64) -> Vec3 {
        [0.0, 0.0, self.a_shape(x).1 * self.time_factor(t).1]
    }

    /// ∇∧E = (0, −∂ₓE_z, ∂ₓE_y).
    pub fn curl_e(&self, x: f64, t: f64) -> Vec3 {
        [0.0, 0.0, -self.a_shape(x).1 * self.time_factor(t).1]
    }

    pub fn is_static(&self) -> bool {
        !matches!(self.kind, FieldKind::HarmonicB | FieldKind::Custom1d) || self.omega == 0.0
    }

    /// Whether the field is even under t → −t about `t`.
    pub fn time_even_at(&self, t: f64) -> bool {
        self.is_static() || (self.omega * t).sin().abs() < 1e-14
    }

    /// Signs picked up by (A, Φ) under P⁰T⁰: A is odd under each, Φ even.
    pub fn pt_rule_signs(&self) -> (f64, f64) {
        ((-1.0) * (-1.0), 1.0)
    }

    pub fn sample_a(&self, grid: &Grid, t: f64) -> [Vec<f64>; 3] {
        sample3(grid, |x| self.a(x, t))
    }

    pub fn sample_phi(&self, grid: &Grid, t: f64) -> Vec<f64> {
        grid.x.iter().map(|&x| self.phi(x, t)).collect()
    }
}

pub fn sample3<F: Fn(f64) -> Vec3>(grid: &Grid, f: F) -> [Vec<f64>; 3] {
    let vals: Vec<Vec3> = grid.x.iter().map(|&x| f(x)).collect();
    [0, 1, 2].map(|i| vals.iter().map(|v| v[i]).collect())
}

fn bump(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smooth window and its x-derivative: 1 for |x| ≤ L/4, 0 for |x| ≥ L/2.
pub fn window(x: f64, length: f64) -> (f64, f64) {
    let a = length / 4.0;
    let b = length / 2.0;
    let s = (x.abs() - a) / (b - a);
    if s <= 0.0 {
        return (1.0, 0.0);
    }
    if s >= 1.0 {
        return (0.0, 0.0);
    }
    let g = bump(1.0 - s);
    let h = bump(s);
    let w = g / (g + h);
    let dws = -(g * h) * (1.0 / ((1.0 - s) * (1.0 - s)) + 1.0 / (s * s)) / ((g + h) * (g + h));
    (w, dws * x.signum() / (b - a))
}

/// max over the interior of |εᵢⱼₖ[p̂ᵢ,Eⱼ]/(iħ) + ∂ₜB| with the spectral p̂.
///
/// With only x dependence the commutator acts as multiplication by
/// [p̂ₓ, Eⱼ]𝟙 = p̂ₓEⱼ.
pub fn maxwell_faraday_residual(field: &FieldConfig, grid: &Grid, t: f64) -> f64 {
    let p = grid.momentum_matrix();
    let e = sample3(grid, |x| field.e(x, t));
    let dtb = sample3(grid, |x| field.dt_b(x, t));
    let apply = |f: &Vec<f64>| {
        let v = crate::linalg::CVec::from_iterator(grid.n, f.iter().map(|&y| re(y)));
        let out = &p * v;
        out.iter().map(|z| (z / crate::linalg::I).re).collect::<Vec<f64>>()
    };
    let py = apply(&e[1]);
    let pz = apply(&e[2]);
    let interior = grid.interior();
    let mut worst: f64 = 0.0;
    for j in 0..grid.n {
        if !interior[j] {
            continue;
        }
        let r = [dtb[0][j], -pz[j] + dtb[1][j], py[j] + dtb[2][j]];
        worst = worst.max((r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn window_limits_and_derivative() {
        let l = 20.0;
        assert_eq!(window(0.0, l), (1.0, 0.0));
        assert_eq!(window(4.9, l).0, 1.0);
        assert_eq!(window(10.0, l).0, 0.0);
        for x in [5.5, 7.0, -8.3, 9.7] {
            let h = 1e-6;
            let fd = (window(x + h, l).0 - window(x - h, l).0) / (2.0 * h);
            assert!((fd - window(x, l).1).abs() < 1e-7, "x={x}");
        }
    }

    #[test]
    fn uniform_b_gauge_on_interior() {
        let f = FieldConfig::new(FieldKind::UniformB, 20.0);
        assert_eq!(f.a(2.0, 0.0), [0.0, 2.0, 0.0]);
        assert_eq!(f.b(-3.0, 0.0), [0.0, 0.0, 1.0]);
        assert_eq!(f.e(1.0, 0.0), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn uniform_e_gauge() {
        let f = FieldConfig::new(FieldKind::UniformE, 20.0);
        assert!((f.phi(2.0, 0.0) + 0.6).abs() < 1e-15);
        assert_eq!(f.e(2.0, 0.0), [0.3, 0.0, 0.0]);
    }

    #[test]
    fn static_fields_have_zero_faraday_residual() {
        let g = make_grid(64, 20.0).unwrap();
        for kind in [FieldKind::UniformB, FieldKind::UniformE, FieldKind::Zero] {
            let f = FieldConfig::for_grid(kind, &g);
            assert_eq!(maxwell_faraday_residual(&f, &g, 1.3), 0.0);
        }
    }

    #[test]
    fn harmonic_b_faraday_at_t0_vanishes() {
        let g = make_grid(64, 20.0).unwrap();
        let f = FieldConfig::for_grid(FieldKind::HarmonicB, &g);
        assert!(maxwell_faraday_residual(&f, &g, 0.0) < 1e-12);
    }

    #[test]
    fn harmonic_b_commutator_form_equals_twice_dtb() {
        // [p̂,f]/i = −f', so the commutator side is +∂ₜB and adds to it.
        let g = make_grid(64, 20.0).unwrap();
        let f = FieldConfig::for_grid(FieldKind::HarmonicB, &g);
        let t = 1.0;
        let r = maxwell_faraday_residual(&f, &g, t);
        let expected = 2.0 * f.dt_b(0.0, t)[2].abs();
        assert!((r - expected).abs() < 1e-2 * expected, "{r} vs {expected}");
    }

    #[test]
    fn kind_round_trip() {
        for k in ["zero", "uniform_B", "uniform_E", "harmonic_B", "custom_1d"] {
            assert_eq!(k.parse::<FieldKind>().unwrap().to_string(), k);
        }
        assert!("uniform_b".parse::<FieldKind>().is_err());
    }

    #[test]
    fn params_derived_quantities() {
        let p = PhysicalParams::new(1.0, 1.0, -1.0);
        assert_eq!(p.bohr_magneton(), -0.5);
        assert!((p.compton_wavelength() - 2.0 * std::f64::consts::PI).abs() < 1e-15);
    }
}
