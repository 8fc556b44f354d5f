//! Foldy-Wouthuysen generators, mean spin operator and FW Hamiltonian, both
//! as closed-form series in 1/m and by direct matrix exponentiation.
//!
//! Spatial derivatives of the fields that appear inside operator identities
//! (B, ∇∧E, ∇·E and the ∇Φ part of E) are taken as commutators i[p̂ₓ, f]
//! with the spectral momentum, so that the closed forms and the exponentials
//! see the same discrete calculus. ∂ₜE uses the analytic −∂²ₜA.

use crate::algebra::build_matrix_set;
use crate::fields::{sample3, FieldConfig, PhysicalParams};
use crate::grid::{DiscreteOperator, Grid};
use crate::linalg::{
    anticomm, comm, cross, diag_on_spinor, dot, expm, grid_on_spinor, loglog_slope, norm2, re, spinor_on_grid, CMat,
    Mat4, I,
};

/// Operators shared by every FW quantity at one time.
pub struct FwContext {
    pub n: usize,
    pub c: f64,
    pub e: f64,
    pub alpha: [CMat; 3],
    pub beta: CMat,
    pub sigma: [CMat; 3],
    pub pi: [CMat; 3],
    pub phi: CMat,
    pub e_field: [CMat; 3],
    pub dt_e: [CMat; 3],
    pub b: [CMat; 3],
    pub curl_e: [CMat; 3],
    pub div_e: CMat,
    /// α·π̂
    pub ap: CMat,
}

impl FwContext {
    pub fn new(grid: &Grid, field: &FieldConfig, t: f64, params: &PhysicalParams) -> Self {
        let s = build_matrix_set();
        let n = grid.n;
        let (c, e) = (params.c, params.e);
        let px = grid_on_spinor(&grid.momentum_matrix());
        let id = CMat::identity(4 * n, 4 * n);
        let dx = |f: &CMat| comm(&px, f) * I;

        let a = field.sample_a(grid, t).map(|v| diag_on_spinor(&v));
        let da = field.sample_a_derivative(grid, t).map(|v| diag_on_spinor(&v));
        let dde = sample3(grid, |x| field.dt_e(x, t)).map(|v| diag_on_spinor(&v));
        let phi = diag_on_spinor(&field.sample_phi(grid, t));

        let p = [px.clone(), &id * re(params.p_perp[0]), &id * re(params.p_perp[1])];
        let pi = [0, 1, 2].map(|j| &p[j] + &a[j] * (I * e));
        let grad_phi_x = dx(&phi);
        let e_field = [-grad_phi_x - &da[0], -&da[1], -&da[2]];
        let b = [CMat::zeros(4 * n, 4 * n), -dx(&a[2]), dx(&a[1])];
        let curl_e = [CMat::zeros(4 * n, 4 * n), -dx(&e_field[2]), dx(&e_field[1])];
        let div_e = dx(&e_field[0]);
        let alpha = s.alpha.map(|m| spinor_on_grid(&m, n));
        let ap = dot(&alpha, &pi);
        FwContext {
            n,
            c,
            e,
            alpha,
            beta: spinor_on_grid(&s.beta, n),
            sigma: s.sigma.map(|m| spinor_on_grid(&m, n)),
            pi,
            phi,
            e_field,
            dt_e: dde,
            b,
            curl_e,
            div_e,
            ap,
        }
    }

    fn dim(&self) -> usize {
        4 * self.n
    }

    /// Pseudo-PT Dirac Hamiltonian at mass m.
    pub fn dirac_hamiltonian(&self, m: f64) -> CMat {
        let c = self.c;
        (&self.ap * re(c) - &self.phi * re(self.e) + &self.beta * re(m * c * c)) * I
    }

    pub fn generators(&self) -> FwGenerators {
        let (c, e) = (self.c, self.e);
        let s1 = &self.beta * &self.ap * re(1.0 / (2.0 * c));
        let s2 = dot(&self.alpha, &self.e_field) * (-I * e / (4.0 * c * c * c));
        let ap3 = &self.ap * &self.ap * &self.ap;
        let inner = ap3 * re(4.0 * c.powi(3) / 3.0) + dot(&self.alpha, &self.dt_e) * (I * e * c);
        let s3 = &self.beta * inner * re(-1.0 / (8.0 * c.powi(6)));
        FwGenerators { s1, s2, s3 }
    }
}

impl FieldConfig {
    /// ∂ₜA sampled on the grid.
    pub fn sample_a_derivative(&self, grid: &Grid, t: f64) -> [Vec<f64>; 3] {
        sample3(grid, |x| self.dt_a(x, t))
    }
}

/// Coefficients of m⁻¹, m⁻², m⁻³ in S(m).
#[derive(Clone, Debug)]
pub struct FwGenerators {
    pub s1: CMat,
    pub s2: CMat,
    pub s3: CMat,
}

impl FwGenerators {
    pub fn assemble(&self, m: f64) -> CMat {
        &self.s1 / re(m) + &self.s2 / re(m * m) + &self.s3 / re(m * m * m)
    }
}

pub fn build_fw_generators(grid: &Grid, field: &FieldConfig, t: f64, params: &PhysicalParams) -> FwGenerators {
    FwContext::new(grid, field, t, params).generators()
}

/// Σ̄ coefficients of m⁰..m^-order, each a 3-vector of operators.
#[derive(Clone, Debug)]
pub struct MeanSpinTerms {
    pub terms: Vec<[CMat; 3]>,
}

impl MeanSpinTerms {
    pub fn order(&self) -> usize {
        self.terms.len() - 1
    }

    pub fn sum(&self, m: f64) -> [CMat; 3] {
        let mut out = self.terms[0].clone();
        for (q, t) in self.terms.iter().enumerate().skip(1) {
            let f = re(m.powi(-(q as i32)));
            for i in 0..3 {
                out[i] += &t[i] * f;
            }
        }
        out
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum FwError {
    #[error("closed-form mean spin is only available through order 3, got {0}")]
    OrderTooHigh(usize),
}

impl FwContext {
    pub fn mean_spin_terms(&self, order: usize) -> Result<MeanSpinTerms, FwError> {
        if order > 3 {
            return Err(FwError::OrderTooHigh(order));
        }
        let (c, e) = (self.c, self.e);
        let be = &self.beta;
        let sg = &self.sigma;
        let mut terms = vec![sg.clone()];
        if order >= 1 {
            let axp = cross(&self.alpha, &self.pi);
            terms.push(axp.map(|x| be * x * (-I / c)));
        }
        if order >= 2 {
            let sxb = cross(sg, &self.b);
            let sxp = cross(sg, &self.pi);
            let psp = cross(&self.pi, &sxp);
            let axe = cross(&self.alpha, &self.e_field);
            terms.push([0, 1, 2].map(|i| {
                (&self.b[i] * (-4.0 * I * e) + &sxb[i] * re(2.0 * e) - &psp[i] * re(4.0)) * re(1.0 / (8.0 * c * c))
                    - &axe[i] * re(e / (2.0 * c.powi(3)))
            }));
        }
        if order >= 3 {
            let ap = &self.ap;
            let ap3 = ap * ap * ap;
            let axde = cross(&self.alpha, &self.dt_e);
            terms.push([0, 1, 2].map(|i| {
                let nested = comm(ap, &comm(ap, &comm(ap, &sg[i])));
                be * nested * re(1.0 / (48.0 * c.powi(3))) + be * comm(&ap3, &sg[i]) * re(1.0 / (6.0 * c.powi(3)))
                    - be * &axde[i] * re(e / (4.0 * c.powi(5)))
            }));
        }
        Ok(MeanSpinTerms { terms })
    }
}

pub fn mean_spin_closed(
    grid: &Grid,
    field: &FieldConfig,
    t: f64,
    params: &PhysicalParams,
    order: usize,
) -> Result<MeanSpinTerms, FwError> {
    FwContext::new(grid, field, t, params).mean_spin_terms(order)
}

#[derive(Clone, Debug)]
pub struct MeanSpinNumeric {
    pub components: [CMat; 3],
    /// ‖S(m)‖₂
    pub s_norm: f64,
    pub warning: Option<String>,
}

impl FwContext {
    pub fn mean_spin_numeric(&self, m: f64) -> MeanSpinNumeric {
        let s = self.generators().assemble(m);
        let s_norm = norm2(&s);
        let ep = expm(&s);
        let em = expm(&(-&s));
        let components = [0, 1, 2].map(|i| &em * &self.sigma[i] * &ep);
        let warning = (s_norm >= 1.0).then(|| format!("|S(m)| = {s_norm:.3} >= 1 at m = {m}: expansion comparison unreliable"));
        MeanSpinNumeric { components, s_norm, warning }
    }
}

/// Σ̄ = e^{−S} Σ e^{S}.
pub fn mean_spin_numeric(grid: &Grid, field: &FieldConfig, t: f64, params: &PhysicalParams) -> MeanSpinNumeric {
    FwContext::new(grid, field, t, params).mean_spin_numeric(params.m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HfwForm {
    /// Every term exactly as printed.
    Printed,
    /// m⁻³ group with −iβπ⁴/8m³c² signs and the ∇∧E spin-orbit sign flipped.
    Corrected,
}

#[derive(Clone, Debug)]
pub struct FwHamiltonianTerms {
    pub terms: Vec<(&'static str, CMat)>,
    pub total: DiscreteOperator,
}

impl FwHamiltonianTerms {
    pub fn term(&self, name: &str) -> Option<&CMat> {
        self.terms.iter().find(|(k, _)| *k == name).map(|(_, v)| v)
    }
}

impl FwContext {
    pub fn fw_hamiltonian(&self, m: f64, form: HfwForm) -> FwHamiltonianTerms {
        let (c, e) = (self.c, self.e);
        let c2 = c * c;
        let be = &self.beta;
        let pi = &self.pi;
        let pi2 = dot(pi, pi);
        let sg = &self.sigma;
        let sb = dot(sg, &self.b);
        let (g3, curl) = match form {
            HfwForm::Printed => (1.0, 1.0),
            HfwForm::Corrected => (-1.0, -1.0),
        };
        let exp_ = cross(&self.e_field, pi);
        let dte_pi = cross(&self.dt_e, pi);
        let pi_dte = cross(pi, &self.dt_e);
        let dte_anti = (0..3).fold(CMat::zeros(self.dim(), self.dim()), |acc, j| acc + anticomm(&pi[j], &self.dt_e[j]));
        let terms: Vec<(&'static str, CMat)> = vec![
            ("rest", be * (I * (m * c2))),
            ("scalar", &self.phi * (-I * e)),
            ("kinetic", be * &pi2 * (I / (2.0 * m))),
            ("p4", be * &pi2 * &pi2 * (I * g3 / (8.0 * m.powi(3) * c2))),
            ("dte_anticomm", be * dte_anti * re(e / (16.0 * m.powi(3) * c2 * c2))),
            ("zeeman", be * &sb * re(-e / (2.0 * m))),
            ("spin_orbit_curl_e", dot(sg, &self.curl_e) * re(curl * e / (8.0 * m * m * c2))),
            ("spin_orbit_e_pi", dot(sg, &exp_) * (I * e / (4.0 * m * m * c2))),
            (
                "spin_dte_pi",
                be * (dot(sg, &dte_pi) + dot(sg, &pi_dte)) * (-I * e / (16.0 * m.powi(3) * c2 * c2)),
            ),
            ("pi2_sigma_b", be * anticomm(&pi2, &sb) * re(-g3 * e / (8.0 * m.powi(3) * c2))),
            ("b_squared", be * dot(&self.b, &self.b) * (-I * g3 * e * e / (8.0 * m.powi(3) * c2))),
            ("darwin", &self.div_e * (I * e / (8.0 * m * m * c2))),
        ];
        let total = terms.iter().fold(CMat::zeros(self.dim(), self.dim()), |acc, (_, t)| acc + t);
        FwHamiltonianTerms { terms, total: DiscreteOperator::new(total, "H_FW") }
    }

    /// (X + βXβ)/2
    pub fn even_part(&self, x: &CMat) -> CMat {
        (x + &self.beta * x * &self.beta) * re(0.5)
    }
}

pub fn fw_hamiltonian_closed(
    grid: &Grid,
    field: &FieldConfig,
    t: f64,
    params: &PhysicalParams,
    form: HfwForm,
) -> FwHamiltonianTerms {
    FwContext::new(grid, field, t, params).fw_hamiltonian(params.m, form)
}

#[derive(Clone, Debug)]
pub struct FwHamiltonianNumeric {
    pub matrix: CMat,
    /// Richardson estimate of the finite-difference error in the ∂ₜ part.
    pub fd_error: f64,
    pub warning: Option<String>,
}

fn fw_numeric_at(grid: &Grid, field: &FieldConfig, t: f64, params: &PhysicalParams, dt_fd: f64) -> CMat {
    let ctx = FwContext::new(grid, field, t, params);
    let m = params.m;
    let s = ctx.generators().assemble(m);
    let ep = expm(&s);
    let mut h = &ep * ctx.dirac_hamiltonian(m) * expm(&(-&s));
    if !field.is_static() {
        let sp = build_fw_generators(grid, field, t + dt_fd, params).assemble(m);
        let sm = build_fw_generators(grid, field, t - dt_fd, params).assemble(m);
        let d = (expm(&(-sp)) - expm(&(-sm))) / re(2.0 * dt_fd);
        h -= &ep * d * I;
    }
    h
}

/// e^{S}(H^D − i∂ₜ)e^{−S} with the time derivative by central differences.
pub fn fw_hamiltonian_numeric(
    grid: &Grid,
    field: &FieldConfig,
    t: f64,
    params: &PhysicalParams,
    dt_fd: f64,
) -> FwHamiltonianNumeric {
    assert!(dt_fd > 0.0, "dt_fd must be positive");
    let full = fw_numeric_at(grid, field, t, params, dt_fd);
    if field.is_static() {
        return FwHamiltonianNumeric { matrix: full, fd_error: 0.0, warning: None };
    }
    let half = fw_numeric_at(grid, field, t, params, dt_fd / 2.0);
    let fd_error = norm2(&(&full - &half)) * 4.0 / 3.0;
    let warning = (fd_error > 1e-3 * norm2(&full)).then(|| format!("finite-difference error {fd_error:.2e} dominates"));
    FwHamiltonianNumeric { matrix: full, fd_error, warning }
}

/// Free pseudo-PT Hamiltonian i(cα·p + mc²β) at fixed momentum.
pub fn free_hamiltonian(p: [f64; 3], params: &PhysicalParams) -> Mat4 {
    let s = build_matrix_set();
    let c = params.c;
    let mut h = s.beta * re(params.m * c * c);
    for j in 0..3 {
        h += s.alpha[j] * re(c * p[j]);
    }
    h * I
}

/// Σ̄ = Σ − iβ(α∧p)/E_p − p∧(Σ∧p)/(E_p(E_p+mc)), E_p = √(m²c²+p²).
pub fn free_particle_mean_spin(k: [f64; 3], params: &PhysicalParams) -> [Mat4; 3] {
    let s = build_matrix_set();
    let p = k;
    let p2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
    let mc = params.m * params.c;
    let ep = (mc * mc + p2).sqrt();
    let mut out = s.sigma;
    for i in 0..3 {
        let (j, l) = ((i + 1) % 3, (i + 2) % 3);
        let axp = s.alpha[j] * re(p[l]) - s.alpha[l] * re(p[j]);
        // p∧(Σ∧p) = Σp² − p(p·Σ)
        let pdots = s.sigma[0] * re(p[0]) + s.sigma[1] * re(p[1]) + s.sigma[2] * re(p[2]);
        let psp = s.sigma[i] * re(p2) - pdots * re(p[i]);
        out[i] = s.sigma[i] - s.beta * axp * (I / ep) - psp * re(1.0 / (ep * (ep + mc)));
    }
    out
}

/// One row of an order-scaling study.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingRow {
    pub m: f64,
    pub deviation: f64,
}

#[derive(Clone, Debug)]
pub struct ScalingReport {
    pub c: f64,
    pub order: usize,
    pub rows: Vec<ScalingRow>,
    pub slope: f64,
    pub max_s_norm: f64,
}

impl ScalingReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,c,order,deviation_norm,fitted_slope\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{:.6e},{:.4}\n", r.m, self.c, self.order, r.deviation, self.slope));
        }
        out
    }
}

fn finish(c: f64, order: usize, rows: Vec<ScalingRow>, max_s_norm: f64) -> ScalingReport {
    let ms: Vec<f64> = rows.iter().map(|r| r.m).collect();
    let ds: Vec<f64> = rows.iter().map(|r| r.deviation).collect();
    ScalingReport { c, order, slope: loglog_slope(&ms, &ds), rows, max_s_norm }
}

/// max over components of ‖Σ̄_numeric − Σ̄_closed(order)‖₂ against m.
pub fn mean_spin_scaling(
    grid: &Grid,
    field: &FieldConfig,
    t: f64,
    params: &PhysicalParams,
    masses: &[f64],
    order: usize,
) -> Result<ScalingReport, FwError> {
    let ctx = FwContext::new(grid, field, t, params);
    let terms = ctx.mean_spin_terms(order)?;
    let mut rows = Vec::new();
    let mut max_s: f64 = 0.0;
    for &m in masses {
        let num = ctx.mean_spin_numeric(m);
        max_s = max_s.max(num.s_norm);
        let closed = terms.sum(m);
        let dev = (0..3).map(|i| norm2(&(&num.components[i] - &closed[i]))).fold(0.0, f64::max);
        rows.push(ScalingRow { m, deviation: dev });
    }
    Ok(finish(params.c, order, rows, max_s))
}

/// ‖even(H_FW numeric) − H_FW closed‖₂ against m.
pub fn fw_hamiltonian_scaling(
    grid: &Grid,
    field: &FieldConfig,
    t: f64,
    params: &PhysicalParams,
    masses: &[f64],
    form: HfwForm,
    dt_fd: f64,
) -> ScalingReport {
    let ctx = FwContext::new(grid, field, t, params);
    let mut rows = Vec::new();
    let mut max_s: f64 = 0.0;
    for &m in masses {
        let pm = params.with_mass(m);
        max_s = max_s.max(norm2(&ctx.generators().assemble(m)));
        let num = fw_hamiltonian_numeric(grid, field, t, &pm, dt_fd);
        let closed = ctx.fw_hamiltonian(m, form);
        let dev = norm2(&(ctx.even_part(&num.matrix) - &closed.total.matrix));
        rows.push(ScalingRow { m, deviation: dev });
    }
    finish(params.c, 3, rows, max_s)
}
