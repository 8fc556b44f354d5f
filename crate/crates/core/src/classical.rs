//! Classical spin as a canonical system: S = (r cos q, r sin q, p) with
//! r = √(S² − p²), Poisson brackets and Hamiltonian flow.

use thiserror::Error;

use crate::llg::rotate;
use crate::traj::{cross3, norm3, MagnetizationTrajectory, Vec3};

#[derive(Debug, Error, PartialEq)]
pub enum ClassicalError {
    #[error("spin within {0:.3e} of a pole; canonical chart is singular there")]
    NearPole(f64),
    #[error("time step must be positive and divide t1 - t0 into whole steps (dt = {0})")]
    BadStep(f64),
    #[error("implicit midpoint iteration did not converge at t = {0}")]
    NoConvergence(f64),
}

/// Fraction of |S| beyond which |p| counts as polar.
pub const POLE_LIMIT: f64 = 0.99;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Canonical {
    pub q: f64,
    pub p: f64,
    pub s: f64,
}

impl Canonical {
    pub fn from_spin(v: &Vec3) -> Self {
        Canonical { q: v[1].atan2(v[0]), p: v[2], s: norm3(v) }
    }

    pub fn spin(&self) -> Vec3 {
        let r = (self.s * self.s - self.p * self.p).max(0.0).sqrt();
        [r * self.q.cos(), r * self.q.sin(), self.p]
    }

    /// (∂S/∂q, ∂S/∂p)
    pub fn tangents(&self) -> (Vec3, Vec3) {
        let r = (self.s * self.s - self.p * self.p).sqrt();
        let (sn, cs) = self.q.sin_cos();
        ([-r * sn, r * cs, 0.0], [-self.p / r * cs, -self.p / r * sn, 1.0])
    }

    fn check_pole(&self) -> Result<(), ClassicalError> {
        if self.p.abs() > POLE_LIMIT * self.s {
            return Err(ClassicalError::NearPole(1.0 - self.p.abs() / self.s));
        }
        Ok(())
    }
}

fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// {f, g} from gradients in S, through the canonical chart.
pub fn poisson_bracket_grad(s: &Vec3, grad_f: &Vec3, grad_g: &Vec3) -> Result<f64, ClassicalError> {
    let c = Canonical::from_spin(s);
    c.check_pole()?;
    let (tq, tp) = c.tangents();
    Ok(dot(grad_f, &tq) * dot(grad_g, &tp) - dot(grad_f, &tp) * dot(grad_g, &tq))
}

/// {f, g} by central differences in (q, p).
pub fn poisson_bracket_fd<F, G>(s: &Vec3, f: F, g: G, h: f64) -> Result<f64, ClassicalError>
where
    F: Fn(&Vec3) -> f64,
    G: Fn(&Vec3) -> f64,
{
    let c = Canonical::from_spin(s);
    c.check_pole()?;
    let at = |dq: f64, dp: f64| Canonical { q: c.q + dq, p: c.p + dp, s: c.s }.spin();
    let d = |fun: &dyn Fn(&Vec3) -> f64, dq: f64, dp: f64| (fun(&at(dq, dp)) - fun(&at(-dq, -dp))) / (2.0 * h);
    let (fq, fp) = (d(&f, h, 0.0), d(&f, 0.0, h));
    let (gq, gp) = (d(&g, h, 0.0), d(&g, 0.0, h));
    Ok(fq * gp - fp * gq)
}

/// max over (i, j) of |{Sᵢ, Sⱼ} − εᵢⱼₖSₖ|, analytic and finite-difference.
pub fn component_bracket_residuals(s: &Vec3, h: f64) -> Result<(f64, f64), ClassicalError> {
    let e = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let mut analytic: f64 = 0.0;
    let mut fd: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let want = cross3(&e[i], &e[j]);
            let want = dot(&want, s);
            let a = poisson_bracket_grad(s, &e[i], &e[j])?;
            let b = poisson_bracket_fd(s, |v| v[i], |v| v[j], h)?;
            analytic = analytic.max((a - want).abs());
            fd = fd.max((b - want).abs());
        }
    }
    Ok((analytic, fd))
}

/// Flow of q̇ = ∂H/∂p, ṗ = −∂H/∂q by the implicit midpoint rule, with H
/// given through its gradient in S.
pub fn hamilton_flow<G>(s0: &Vec3, grad_h: G, t0: f64, t1: f64, dt: f64) -> Result<MagnetizationTrajectory, ClassicalError>
where
    G: Fn(&Vec3, f64) -> Vec3,
{
    let span = t1 - t0;
    if !(dt > 0.0) || !(span > 0.0) {
        return Err(ClassicalError::BadStep(dt));
    }
    let steps = (span / dt).round() as usize;
    if steps == 0 || (steps as f64 * dt - span).abs() > 1e-9 * span.max(1.0) {
        return Err(ClassicalError::BadStep(dt));
    }
    let mut c = Canonical::from_spin(s0);
    c.check_pole()?;
    let rhs = |c: &Canonical, t: f64| -> (f64, f64) {
        let gh = grad_h(&c.spin(), t);
        let (tq, tp) = c.tangents();
        (dot(&gh, &tp), -dot(&gh, &tq))
    };
    let mut times = vec![t0];
    let mut spins = vec![c.spin()];
    for k in 0..steps {
        let t = t0 + k as f64 * dt;
        let th = t + 0.5 * dt;
        let (dq0, dp0) = rhs(&c, th);
        let mut next = Canonical { q: c.q + dt * dq0, p: c.p + dt * dp0, s: c.s };
        let mut converged = false;
        for _ in 0..100 {
            let mid = Canonical { q: 0.5 * (c.q + next.q), p: 0.5 * (c.p + next.p), s: c.s };
            mid.check_pole()?;
            let (dq, dp) = rhs(&mid, th);
            let upd = Canonical { q: c.q + dt * dq, p: c.p + dt * dp, s: c.s };
            let change = (upd.q - next.q).abs() + (upd.p - next.p).abs();
            next = upd;
            if change < 1e-15 * (1.0 + c.s) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(ClassicalError::NoConvergence(t));
        }
        next.check_pole()?;
        c = next;
        times.push(t0 + (k + 1) as f64 * dt);
        spins.push(c.spin());
    }
    Ok(MagnetizationTrajectory { times, m: spins })
}

/// Exact solution of Ṡ = B∧S for constant B.
pub fn rotate_about_field(s0: &Vec3, b: &Vec3, t: f64) -> Vec3 {
    rotate(s0, &b.map(|x| x * t))
}
