//! Exponential-midpoint time stepping of grid spinors, spin trajectories and
//! the mean-spin equation of motion checks.

use std::fmt::Write as _;

use thiserror::Error;

use crate::fields::{sample3, FieldConfig, PhysicalParams};
use crate::fw::{FwContext, HfwForm};
use crate::grid::Grid;
use crate::linalg::{comm, diag_on_spinor, expm, re, CMat, CVec, C64, I};
use crate::pt::{pseudo_expectation, PtError, SpinorField};
use crate::traj::{MagnetizationTrajectory, TrajError};

#[derive(Debug, Error, PartialEq)]
pub enum PropagateError {
    #[error("time step must be positive and divide t1 - t0 into whole steps (dt = {0})")]
    BadStep(f64),
    #[error("conventional norm grew by {growth:.3e} (guard {guard:.1e}) at t = {t}")]
    Divergence { t: f64, growth: f64, guard: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropagateOptions {
    /// Store every `stride`-th state (the first and last are always kept).
    pub stride: usize,
    pub guard: f64,
    /// Rescale the conventional norm to 1 after each step.
    pub renormalize: bool,
    /// Evaluate the Hamiltonian once and reuse its exponential.
    pub static_h: bool,
}

impl Default for PropagateOptions {
    fn default() -> Self {
        PropagateOptions { stride: 1, guard: 1e6, renormalize: false, static_h: false }
    }
}

#[derive(Clone, Debug)]
pub struct QuantumTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<SpinorField>,
    /// ln of the factor removed by renormalization up to each stored time.
    pub log_scale: Vec<f64>,
    pub dt: f64,
    pub method: &'static str,
}

impl QuantumTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Spacing between stored states.
    pub fn stored_dt(&self) -> f64 {
        if self.times.len() < 2 {
            self.dt
        } else {
            self.times[1] - self.times[0]
        }
    }
}

/// ψ ← exp(−i·dt·H(t + dt/2))·ψ.
pub fn propagate<F>(
    mut h: F,
    psi0: &SpinorField,
    t0: f64,
    t1: f64,
    dt: f64,
    opts: &PropagateOptions,
) -> Result<QuantumTrajectory, PropagateError>
where
    F: FnMut(f64) -> CMat,
{
    let span = t1 - t0;
    if !(dt > 0.0) || !(span > 0.0) {
        return Err(PropagateError::BadStep(dt));
    }
    let steps = (span / dt).round() as usize;
    if steps == 0 || (steps as f64 * dt - span).abs() > 1e-9 * span.max(1.0) {
        return Err(PropagateError::BadStep(dt));
    }
    let stride = opts.stride.max(1);
    let n0 = psi0.conv_norm();
    let mut psi = psi0.amps.clone();
    let mut log_scale = 0.0;
    let mut out = QuantumTrajectory {
        times: vec![t0],
        states: vec![psi0.clone()],
        log_scale: vec![0.0],
        dt,
        method: "exponential-midpoint",
    };
    let mut cached: Option<CMat> = None;
    for k in 0..steps {
        let t = t0 + k as f64 * dt;
        let u = match (&cached, opts.static_h) {
            (Some(u), true) => u.clone(),
            _ => {
                let u = expm(&(h(t + 0.5 * dt) * (-I * dt)));
                if opts.static_h {
                    cached = Some(u.clone());
                }
                u
            }
        };
        let before = psi.norm();
        psi = &u * &psi;
        let after = psi.norm();
        let tn = t0 + (k + 1) as f64 * dt;
        if opts.renormalize {
            let growth = after / before;
            if !growth.is_finite() || growth > opts.guard {
                return Err(PropagateError::Divergence { t: tn, growth, guard: opts.guard });
            }
            psi /= re(after);
            log_scale += after.ln();
        } else {
            let growth = after * psi0.dx.sqrt() / n0;
            if !growth.is_finite() || growth > opts.guard {
                return Err(PropagateError::Divergence { t: tn, growth, guard: opts.guard });
            }
        }
        if (k + 1) % stride == 0 || k + 1 == steps {
            out.times.push(tn);
            out.states.push(psi0.with_amps(psi.clone()));
            out.log_scale.push(log_scale);
        }
    }
    Ok(out)
}

/// Pseudo-expectation trajectory of a 3-vector operator, scaled by `scale`.
#[derive(Clone, Debug)]
pub struct QuantumSpinTrajectory {
    pub times: Vec<f64>,
    pub re: Vec<[f64; 3]>,
    pub im: Vec<[f64; 3]>,
    pub pt_norm: Vec<C64>,
    pub conv_norm: Vec<f64>,
}

impl QuantumSpinTrajectory {
    pub fn magnetization(&self) -> Result<MagnetizationTrajectory, TrajError> {
        MagnetizationTrajectory::new(self.times.clone(), self.re.clone())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,Re Mx,Re My,Re Mz,Im Mx,Im My,Im Mz,pt_norm_re,pt_norm_im,conv_norm\n");
        for i in 0..self.times.len() {
            let (r, m) = (self.re[i], self.im[i]);
            let _ = writeln!(
                s,
                "{:.10e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e}",
                self.times[i], r[0], r[1], r[2], m[0], m[1], m[2], self.pt_norm[i].re, self.pt_norm[i].im, self.conv_norm[i]
            );
        }
        s
    }

    /// Spin directions recovered from upper-spinor PT expectations.
    pub fn decoded(&self, scale: f64) -> Option<MagnetizationTrajectory> {
        let m: Option<Vec<[f64; 3]>> = (0..self.times.len())
            .map(|i| {
                let w = [0, 1, 2].map(|k| C64::new(self.re[i][k], self.im[i][k]));
                decode_pt_spin(&w, scale)
            })
            .collect();
        MagnetizationTrajectory::new(self.times.clone(), m?).ok()
    }
}

pub fn spin_trajectory<FO>(traj: &QuantumTrajectory, mut ops: FO, scale: f64) -> Result<QuantumSpinTrajectory, PtError>
where
    FO: FnMut(f64) -> [CMat; 3],
{
    if traj.is_empty() {
        return Err(PtError::TooFewTimes(0));
    }
    let mut out = QuantumSpinTrajectory {
        times: traj.times.clone(),
        re: Vec::new(),
        im: Vec::new(),
        pt_norm: Vec::new(),
        conv_norm: Vec::new(),
    };
    for (t, psi) in traj.times.iter().zip(&traj.states) {
        let o = ops(*t);
        let mut r = [0.0; 3];
        let mut im = [0.0; 3];
        for k in 0..3 {
            let v = pseudo_expectation(psi, &o[k])? * scale;
            r[k] = v.re;
            im[k] = v.im;
        }
        out.re.push(r);
        out.im.push(im);
        out.pt_norm.push(crate::pt::pt_inner(psi, psi)?);
        out.conv_norm.push(psi.conv_norm());
    }
    Ok(out)
}

/// Unit spin direction n of an upper spinor from w = scale·⟨Σ⟩_PT, using
/// ⟨Σ⟩_PT = (−i n_z, 1, i n_x)/n_y.
pub fn decode_pt_spin(w: &[C64; 3], scale: f64) -> Option<[f64; 3]> {
    let ry = w[1].re;
    if ry.abs() < 1e-300 || !ry.is_finite() {
        return None;
    }
    let n = [w[2].im / ry, scale / ry, -w[0].im / ry];
    let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    Some(n.map(|v| v / len))
}

/// Two-component spinor along (θ, φ) placed in the upper components.
pub fn upper_spinor(theta: f64, phi: f64) -> [C64; 4] {
    [re((theta / 2.0).cos()), C64::from_polar((theta / 2.0).sin(), phi), re(0.0), re(0.0)]
}

/// Π(x)·χ with the product structure kept.
#[derive(Clone, Debug)]
pub struct SeparableState {
    pub profile: CVec,
    pub spinor: [C64; 4],
}

impl SeparableState {
    pub fn gaussian(grid: &Grid, width: f64, center: f64, k0: f64, spinor: [C64; 4]) -> Self {
        let profile = grid.sample(|x| C64::from_polar((-(x - center).powi(2) / (2.0 * width * width)).exp(), k0 * x));
        SeparableState { profile, spinor }
    }

    /// Default packet: Gaussian of width L/10 at the origin.
    pub fn default_packet(grid: &Grid, spinor: [C64; 4]) -> Self {
        Self::gaussian(grid, grid.length / 10.0, 0.0, 0.0, spinor)
    }

    pub fn to_field(&self, dx: f64) -> SpinorField {
        let n = self.profile.len();
        let amps = CVec::from_fn(4 * n, |r, _| self.spinor[r / n] * self.profile[r % n]);
        SpinorField::new(amps, n, dx)
    }
}

/// Default packet plus a lower-component packet of relative weight `w`
/// carrying momentum `k0`.
pub fn mixed_energy_state(grid: &Grid, upper: [C64; 4], w: f64, k0: f64) -> SpinorField {
    let pos = SeparableState::default_packet(grid, upper).to_field(grid.dx);
    let lower = [re(0.0), re(0.0), upper[0] * w, upper[1] * w];
    let neg = SeparableState::gaussian(grid, grid.length / 10.0, 0.0, k0, lower).to_field(grid.dx);
    pos.with_amps(&pos.amps + &neg.amps)
}

/// The odd block (1/4m²c)([(α·π)Σ(α·π), α·π] − [(α·π)³, Σ]).
pub fn odd_block(ctx: &FwContext, m: f64) -> [CMat; 3] {
    let ap = &ctx.ap;
    let ap3 = ap * ap * ap;
    let f = re(1.0 / (4.0 * m * m * ctx.c));
    [0, 1, 2].map(|i| (comm(&(ap * &ctx.sigma[i] * ap), ap) - comm(&ap3, &ctx.sigma[i])) * f)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZbwReport {
    /// |⟨odd block⟩_PT|
    pub odd: f64,
    /// |(e/m)⟨βΣ⟩∧⟨B⟩|
    pub precession: f64,
}

impl ZbwReport {
    pub fn relative(&self) -> f64 {
        self.odd / self.precession
    }
}

fn vec_norm(v: &[C64; 3]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn expect3(psi: &SpinorField, ops: &[CMat; 3]) -> Result<[C64; 3], PtError> {
    Ok([pseudo_expectation(psi, &ops[0])?, pseudo_expectation(psi, &ops[1])?, pseudo_expectation(psi, &ops[2])?])
}

fn cross_c(a: &[C64; 3], b: &[C64; 3]) -> [C64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn field_ops<F: Fn(f64) -> [f64; 3]>(grid: &Grid, f: F) -> [CMat; 3] {
    sample3(grid, f).map(|v| diag_on_spinor(&v))
}

pub fn zitterbewegung_check(
    psi: &SeparableState,
    grid: &Grid,
    field: &FieldConfig,
    t: f64,
    params: &PhysicalParams,
) -> Result<ZbwReport, PtError> {
    zitterbewegung_check_field(&psi.to_field(grid.dx), grid, field, t, params)
}

/// Same check for an arbitrary grid spinor.
pub fn zitterbewegung_check_field(
    state: &SpinorField,
    grid: &Grid,
    field: &FieldConfig,
    t: f64,
    params: &PhysicalParams,
) -> Result<ZbwReport, PtError> {
    let ctx = FwContext::new(grid, field, t, params);
    let odd = vec_norm(&expect3(state, &odd_block(&ctx, params.m))?);
    let bs = [0, 1, 2].map(|i| &ctx.beta * &ctx.sigma[i]);
    let b = expect3(state, &field_ops(grid, |x| field.b(x, t)))?;
    let prec = cross_c(&expect3(state, &bs)?, &b).map(|z| z * (params.e / params.m));
    Ok(ZbwReport { odd, precession: vec_norm(&prec) })
}

/// Which right-hand-side terms enter the mean-spin equation of motion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EomTerms {
    pub precession: bool,
    pub dt_b: bool,
    pub spin_orbit: bool,
}

impl Default for EomTerms {
    fn default() -> Self {
        EomTerms { precession: true, dt_b: true, spin_orbit: true }
    }
}

#[derive(Clone, Debug)]
pub struct EomResidual {
    pub times: Vec<f64>,
    pub lhs: Vec<[C64; 3]>,
    pub rhs: Vec<[C64; 3]>,
    /// |lhs − rhs| per interior time.
    pub residual: Vec<f64>,
    /// Same comparison in the FW representation: d/dt⟨Σ⟩ against ⟨i[H_FW, Σ]⟩.
    pub fw_residual: Vec<f64>,
    /// |e|·|⟨B⟩|·|⟨Σ⟩|/m³ averaged over the interior times.
    pub remainder_estimate: f64,
    /// |(e/4m²c²)⟨Σ⟩∧∂ₜB| per interior time.
    pub dt_b_term: Vec<f64>,
    /// Precession, ∂ₜB and spin-orbit contributions per interior time.
    pub parts: Vec<[[C64; 3]; 3]>,
}

impl EomResidual {
    pub fn max_residual(&self) -> f64 {
        self.residual.iter().cloned().fold(0.0, f64::max)
    }

    /// |lhs − rhs| with only the selected right-hand-side terms.
    pub fn residual_with(&self, terms: EomTerms) -> Vec<f64> {
        let on = [terms.precession, terms.dt_b, terms.spin_orbit];
        self.lhs
            .iter()
            .zip(&self.parts)
            .map(|(l, parts)| {
                let mut d = *l;
                for (part, used) in parts.iter().zip(on) {
                    if used {
                        for k in 0..3 {
                            d[k] -= part[k];
                        }
                    }
                }
                vec_norm(&d)
            })
            .collect()
    }
}

pub fn mean_spin_eom_residual(
    traj: &QuantumTrajectory,
    grid: &Grid,
    field: &FieldConfig,
    params: &PhysicalParams,
) -> Result<EomResidual, PtError> {
    let nt = traj.len();
    if nt < 3 {
        return Err(PtError::TooFewTimes(nt));
    }
    let (m, c, e) = (params.m, params.c, params.e);
    let c2 = c * c;
    let mut contexts: Vec<Option<FwContext>> = Vec::new();
    let static_field = field.is_static();
    let mut shared: Option<FwContext> = None;
    for &t in &traj.times {
        if static_field {
            if shared.is_none() {
                shared = Some(FwContext::new(grid, field, t, params));
            }
            contexts.push(None);
        } else {
            contexts.push(Some(FwContext::new(grid, field, t, params)));
        }
    }
    let ctx_at = |i: usize| -> &FwContext { contexts[i].as_ref().or(shared.as_ref()).unwrap() };

    // Σ̄ = e^{−S}Σe^{S}, ψ^FW = e^{S}ψ at every stored time.
    let mut sigma_bar = Vec::with_capacity(nt);
    let mut fw_states = Vec::with_capacity(nt);
    let mut cached: Option<([CMat; 3], CMat)> = None;
    for i in 0..nt {
        let ctx = ctx_at(i);
        let (sb, es) = match (&cached, static_field) {
            (Some(v), true) => v.clone(),
            _ => {
                let s = ctx.generators().assemble(m);
                let ep = expm(&s);
                let em = expm(&(-&s));
                let sb = [0, 1, 2].map(|k| &em * &ctx.sigma[k] * &ep);
                if static_field {
                    cached = Some((sb.clone(), ep.clone()));
                }
                (sb, ep)
            }
        };
        fw_states.push(traj.states[i].with_amps(&es * &traj.states[i].amps));
        sigma_bar.push(sb);
    }

    let mut bar_exp = Vec::with_capacity(nt);
    let mut fw_exp = Vec::with_capacity(nt);
    for i in 0..nt {
        bar_exp.push(expect3(&traj.states[i], &sigma_bar[i])?);
        fw_exp.push(expect3(&fw_states[i], &ctx_at(i).sigma)?);
    }

    let mut out = EomResidual {
        times: Vec::new(),
        lhs: Vec::new(),
        rhs: Vec::new(),
        residual: Vec::new(),
        fw_residual: Vec::new(),
        remainder_estimate: 0.0,
        dt_b_term: Vec::new(),
        parts: Vec::new(),
    };
    let mut remainder = 0.0;
    // i[H_FW, Σ], rebuilt per time only for time-dependent fields.
    let mut fw_gen: Option<[CMat; 3]> = None;
    for i in 1..nt - 1 {
        let t = traj.times[i];
        let h2 = traj.times[i + 1] - traj.times[i - 1];
        let ctx = ctx_at(i);
        let psi = &traj.states[i];
        let lhs = [0, 1, 2].map(|k| (bar_exp[i + 1][k] - bar_exp[i - 1][k]) / h2);

        let bs = [0, 1, 2].map(|k| &ctx.beta * &ctx.sigma[k]);
        let b = expect3(psi, &field_ops(grid, |x| field.b(x, t)))?;
        let dtb = expect3(psi, &field_ops(grid, |x| field.dt_b(x, t)))?;
        let ef = expect3(psi, &field_ops(grid, |x| field.e(x, t)))?;
        let sig = expect3(psi, &ctx.sigma)?;
        let vel = expect3(psi, &ctx.pi)?.map(|z| z * I / m);

        let prec = cross_c(&expect3(psi, &bs)?, &b).map(|z| z * (e / m));
        let dtb_term = cross_c(&sig, &dtb).map(|z| z * (-e / (4.0 * m * m * c2)));
        let so = cross_c(&sig, &cross_c(&ef, &vel)).map(|z| z * (-e / (2.0 * m * c2)));
        let rhs = [0, 1, 2].map(|k| prec[k] + dtb_term[k] + so[k]);
        let res = vec_norm(&[lhs[0] - rhs[0], lhs[1] - rhs[1], lhs[2] - rhs[2]]);

        if fw_gen.is_none() || !static_field {
            let hfw = ctx.fw_hamiltonian(m, HfwForm::Printed).total.matrix;
            fw_gen = Some([0, 1, 2].map(|k| comm(&hfw, &ctx.sigma[k]) * I));
        }
        let fw_rhs = expect3(&fw_states[i], fw_gen.as_ref().unwrap())?;
        let fw_lhs = [0, 1, 2].map(|k| (fw_exp[i + 1][k] - fw_exp[i - 1][k]) / h2);
        let fw_res = vec_norm(&[fw_lhs[0] - fw_rhs[0], fw_lhs[1] - fw_rhs[1], fw_lhs[2] - fw_rhs[2]]);

        remainder += e.abs() * vec_norm(&b) * vec_norm(&sig) / m.powi(3);
        out.times.push(t);
        out.lhs.push(lhs);
        out.rhs.push(rhs);
        out.residual.push(res);
        out.fw_residual.push(fw_res);
        out.dt_b_term.push(vec_norm(&dtb_term));
        out.parts.push([prec, dtb_term, so]);
    }
    out.remainder_estimate = remainder / (nt - 2) as f64;
    Ok(out)
}
