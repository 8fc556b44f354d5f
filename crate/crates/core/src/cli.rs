//! Command dispatch, artifact files and the plain-text summary report.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::algebra::{build_matrix_set, su2_residual, verify_clifford_relations, verify_pt_conjugation};
use crate::config::{ConfigError, Representation, RunConfig};
use crate::fields::{maxwell_faraday_residual, FieldConfig};
use crate::fw::{
    free_hamiltonian, free_particle_mean_spin, fw_hamiltonian_scaling, mean_spin_scaling, FwContext, FwError, HfwForm,
    ScalingReport,
};
use crate::grid::{make_grid, Grid, GridError};
use crate::hamiltonian::{build_dirac_hamiltonian, Variant};
use crate::linalg::{max_abs4, CMat};
use crate::llg::{effective_field, gilbert_constant, llg_integrate, raw_eom_integrate, Closure, LlgError, LlgParams};

/// Maximum |M_closed − M_LLG| relative to M_s.
const CLOSURE_TOL: f64 = 1e-9;
use crate::propagate::{propagate, spin_trajectory, upper_spinor, PropagateError, PropagateOptions, QuantumSpinTrajectory, SeparableState};
use crate::pt::{free_quartet, pseudo_pt_symmetry_residual, pt_normalize, PtError, PtOperator};
use crate::traj::{norm3, phase_slope_frequency, precession_frequency, MagnetizationTrajectory, TrajError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    VerifyAlgebra,
    VerifyPt,
    VerifyFw,
    SimulateDirac,
    SimulateLlg,
    Compare,
    Sweep,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::VerifyAlgebra => "verify-algebra",
            Command::VerifyPt => "verify-pt",
            Command::VerifyFw => "verify-fw",
            Command::SimulateDirac => "simulate-dirac",
            Command::SimulateLlg => "simulate-llg",
            Command::Compare => "compare",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("{check}: {source}")]
    Divergence { check: String, source: PropagateError },
    #[error("{check}: {msg}")]
    Runtime { check: String, msg: String },
    #[error("writing {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Divergence { .. } => 3,
            _ => 1,
        }
    }

    fn runtime(check: &str, e: impl std::fmt::Display) -> Self {
        CliError::Runtime { check: check.into(), msg: e.to_string() }
    }
}

fn from_propagate(check: &str, e: PropagateError) -> CliError {
    match e {
        PropagateError::Divergence { .. } => CliError::Divergence { check: check.into(), source: e },
        other => CliError::runtime(check, other),
    }
}

macro_rules! runtime_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::runtime(stringify!($t), e)
            }
        }
    )*};
}
runtime_from!(GridError, FwError, LlgError, PtError, TrajError);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Info,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportLine {
    pub name: String,
    pub value: String,
    pub threshold: Option<String>,
    pub status: Status,
}

#[derive(Clone, Debug)]
pub struct SummaryReport {
    pub command: Command,
    pub seed: u64,
    pub lines: Vec<ReportLine>,
    pub wall_time: f64,
    pub incomplete: Option<String>,
}

impl SummaryReport {
    fn new(command: Command, seed: u64) -> Self {
        SummaryReport { command, seed, lines: Vec::new(), wall_time: 0.0, incomplete: None }
    }

    /// value < threshold
    pub fn below(&mut self, name: &str, value: f64, threshold: f64) {
        let ok = value < threshold;
        self.push(name, format!("{value:.6e}"), Some(format!("<{threshold:.1e}")), ok);
    }

    /// |value − target| ≤ tol
    pub fn near(&mut self, name: &str, value: f64, target: f64, tol: f64) {
        let ok = (value - target).abs() <= tol;
        self.push(name, format!("{value:.4}"), Some(format!("{target}±{tol}")), ok);
    }

    pub fn info(&mut self, name: &str, value: impl std::fmt::Display) {
        self.lines.push(ReportLine { name: name.into(), value: value.to_string(), threshold: None, status: Status::Info });
    }

    fn push(&mut self, name: &str, value: String, threshold: Option<String>, ok: bool) {
        let status = if ok { Status::Pass } else { Status::Fail };
        self.lines.push(ReportLine { name: name.into(), value, threshold, status });
    }

    pub fn get(&self, name: &str) -> Option<&ReportLine> {
        self.lines.iter().find(|l| l.name == name)
    }

    pub fn pass(&self) -> bool {
        self.incomplete.is_none() && self.lines.iter().all(|l| l.status != Status::Fail)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "command={}", self.command.name());
        for l in &self.lines {
            let _ = write!(s, "{}={}", l.name, l.value);
            if let Some(t) = &l.threshold {
                let _ = write!(s, " threshold={t}");
            }
            let st = match l.status {
                Status::Pass => "pass",
                Status::Fail => "fail",
                Status::Info => "info",
            };
            let _ = writeln!(s, " status={st}");
        }
        let _ = writeln!(s, "seed={}", self.seed);
        let _ = writeln!(s, "wall_time_s={:.3}", self.wall_time);
        if let Some(why) = &self.incomplete {
            let _ = writeln!(s, "artifacts=incomplete error={why}");
        }
        let _ = writeln!(s, "overall={}", if self.pass() { "pass" } else { "fail" });
        s
    }
}

fn write_file(dir: &Path, name: &str, body: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    fs::write(&path, body).map_err(|source| CliError::Io { path: path.clone(), source })?;
    Ok(path)
}

pub fn field_from_config(cfg: &RunConfig) -> FieldConfig {
    let mut f = FieldConfig::new(cfg.field_kind, cfg.length);
    f.b0 = cfg.b0;
    f.e0 = cfg.e0;
    f.omega = cfg.omega;
    f
}

/// Runs `command`, writing artifacts and `report.txt` into the output
/// directory. A failing run still leaves a report, flagged incomplete.
pub fn execute(command: Command, cfg: &RunConfig) -> Result<SummaryReport, CliError> {
    let dir = cfg.out_dir.clone();
    fs::create_dir_all(&dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
    let start = Instant::now();
    let mut rep = SummaryReport::new(command, cfg.seed);
    let result = match command {
        Command::VerifyAlgebra => verify_algebra(cfg, &mut rep),
        Command::VerifyPt => verify_pt(cfg, &mut rep),
        Command::VerifyFw => verify_fw(cfg, &mut rep),
        Command::SimulateDirac => simulate_dirac(cfg, &mut rep),
        Command::SimulateLlg => simulate_llg(cfg, &mut rep),
        Command::Compare => compare(cfg, &mut rep),
        Command::Sweep => sweep(cfg, &mut rep),
    };
    rep.wall_time = start.elapsed().as_secs_f64();
    if let Err(e) = &result {
        rep.incomplete = Some(e.to_string());
    }
    write_file(&dir, "report.txt", &rep.render())?;
    result.map(|_| rep)
}

fn verify_algebra(cfg: &RunConfig, rep: &mut SummaryReport) -> Result<(), CliError> {
    let set = build_matrix_set();
    let cl = verify_clifford_relations(&set, cfg.tol.clifford);
    for ch in &cl.checks {
        rep.below(&format!("clifford.{}", ch.name), ch.residual, cfg.tol.clifford);
    }
    rep.below("clifford.su2", su2_residual(&set), cfg.tol.clifford);
    let pt = verify_pt_conjugation(&set, cfg.tol.clifford);
    for ch in &pt.checks {
        // Exact: the matrices are small-integer valued.
        rep.push(&format!("conjugation.{}", ch.name), format!("{:.1e}", ch.residual), Some("=0".into()), ch.residual == 0.0);
    }
    rep.info("pt_square_sign", set.pt_square_sign());

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let p = &cfg.params;
    let pmax = p.m * p.c;
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let k = [0, 1, 2].map(|_| rng.random_range(-pmax..pmax));
        let h = free_hamiltonian(k, p);
        for s in free_particle_mean_spin(k, p) {
            worst = worst.max(max_abs4(&(h * s - s * h)));
        }
    }
    rep.below("free_mean_spin_commutator", worst, cfg.tol.free_commutator);
    Ok(())
}

fn verify_pt(cfg: &RunConfig, rep: &mut SummaryReport) -> Result<(), CliError> {
    let g = make_grid(cfg.n, cfg.length)?;
    let f = field_from_config(cfg);
    let h = build_dirac_hamiltonian(&g, &f, cfg.t0, &cfg.params, Variant::PseudoPt);
    let r = pseudo_pt_symmetry_residual(&h, &f);
    rep.below("pt_symmetry_residual", r.rules, cfg.tol.pt);
    rep.info("pt_symmetry_literal_reflection", format!("{:.6e}", r.literal));
    rep.info("pt_square_sign", PtOperator::default().square_sign);
    rep.info("field_time_even", f.time_even_at(cfg.t0));

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut off: f64 = 0.0;
    let mut mixed_signs = true;
    for _ in 0..10 {
        let px = rng.random_range(-1.0..1.0) * cfg.params.m * cfg.params.c;
        let q = free_quartet(px, &cfg.params);
        let mut signs = [0; 2];
        for a in 0..4 {
            for b in 0..4 {
                if a != b {
                    off = off.max(q.gram[(a, b)].norm());
                }
            }
            signs[usize::from(q.gram[(a, a)].re > 0.0)] += 1;
        }
        mixed_signs &= signs == [2, 2];
    }
    rep.below("quartet_biorthogonality", off, 1e-10);
    rep.push("quartet_norm_signs", if mixed_signs { "+1,+1,-1,-1" } else { "other" }.into(), Some("two of each".into()), mixed_signs);
    Ok(())
}

fn scaling_csv(reports: &[ScalingReport]) -> String {
    let mut out = String::new();
    for (i, r) in reports.iter().enumerate() {
        let csv = r.to_csv();
        let body = if i == 0 { csv.as_str() } else { csv.split_once('\n').map(|x| x.1).unwrap_or("") };
        out.push_str(body);
    }
    out
}

fn verify_fw(cfg: &RunConfig, rep: &mut SummaryReport) -> Result<(), CliError> {
    let g = make_grid(cfg.n, cfg.length)?;
    let f = field_from_config(cfg);
    let t = cfg.t0;
    let order = cfg.sweep_order;
    let ms = mean_spin_scaling(&g, &f, t, &cfg.params, &cfg.sweep_masses, order)?;
    rep.near(&format!("mean_spin_order{order}_slope"), ms.slope, -((order + 1) as f64), cfg.tol.slope);
    rep.info("max_generator_norm", format!("{:.4}", ms.max_s_norm));
    let printed = fw_hamiltonian_scaling(&g, &f, t, &cfg.params, &cfg.sweep_masses, HfwForm::Printed, 1e-3);
    rep.near("hfw_slope", printed.slope, -4.0, cfg.tol.slope);
    let corrected = fw_hamiltonian_scaling(&g, &f, t, &cfg.params, &cfg.sweep_masses, HfwForm::Corrected, 1e-3);
    rep.info("hfw_corrected_slope", format!("{:.4}", corrected.slope));
    if !f.is_static() {
        rep.below("maxwell_faraday_residual", maxwell_faraday_residual(&f, &g, t), 1e-10);
    }
    write_file(&cfg.out_dir, "scaling.csv", &scaling_csv(&[ms, printed]))?;
    Ok(())
}

fn sweep(cfg: &RunConfig, rep: &mut SummaryReport) -> Result<(), CliError> {
    let g = make_grid(cfg.n, cfg.length)?;
    let f = field_from_config(cfg);
    let mut reports = Vec::new();
    for order in 0..=cfg.sweep_order {
        let r = mean_spin_scaling(&g, &f, cfg.t0, &cfg.params, &cfg.sweep_masses, order)?;
        rep.near(&format!("order{order}_slope"), r.slope, -((order + 1) as f64), cfg.tol.slope);
        reports.push(r);
    }
    write_file(&cfg.out_dir, "scaling.csv", &scaling_csv(&reports))?;
    Ok(())
}

/// Initial state, Hamiltonian provider and spin operators for a quantum run.
pub struct QuantumRun {
    pub trajectory: QuantumSpinTrajectory,
    pub grid: Grid,
}

pub fn run_quantum(cfg: &RunConfig, representation: Representation, renormalize: bool) -> Result<QuantumRun, CliError> {
    let check = "propagate";
    let g = make_grid(cfg.n, cfg.length)?;
    let f = field_from_config(cfg);
    let p = cfg.params;
    let psi0 = pt_normalize(&SeparableState::default_packet(&g, upper_spinor(cfg.theta, cfg.phi)).to_field(g.dx))?;
    let opts = PropagateOptions { stride: cfg.stride, renormalize, static_h: f.is_static(), ..Default::default() };
    let traj = match representation {
        Representation::Fw => {
            let h = |t: f64| FwContext::new(&g, &f, t, &p).fw_hamiltonian(p.m, HfwForm::Printed).total.matrix;
            propagate(h, &psi0, cfg.t0, cfg.t1, cfg.dt, &opts).map_err(|e| from_propagate(check, e))?
        }
        Representation::Dirac => {
            let h = |t: f64| build_dirac_hamiltonian(&g, &f, t, &p, Variant::PseudoPt).matrix().clone();
            propagate(h, &psi0, cfg.t0, cfg.t1, cfg.dt, &opts).map_err(|e| from_propagate(check, e))?
        }
    };
    let mu_b = p.bohr_magneton();
    let trajectory = match representation {
        Representation::Fw => {
            let sigma = FwContext::new(&g, &FieldConfig::zero(), 0.0, &p).sigma;
            spin_trajectory(&traj, |_| sigma.clone(), mu_b)?
        }
        Representation::Dirac => {
            let mut cached: Option<[CMat; 3]> = None;
            spin_trajectory(
                &traj,
                |t| {
                    if let (true, Some(c)) = (f.is_static(), &cached) {
                        return c.clone();
                    }
                    let bar = FwContext::new(&g, &f, t, &p).mean_spin_numeric(p.m).components;
                    cached = Some(bar.clone());
                    bar
                },
                mu_b,
            )?
        }
    };
    Ok(QuantumRun { trajectory, grid: g })
}

fn simulate_dirac(cfg: &RunConfig, rep: &mut SummaryReport) -> Result<(), CliError> {
    let run = run_quantum(cfg, cfg.representation, cfg.renormalize)?;
    let st = &run.trajectory;
    write_file(&cfg.out_dir, "quantum.csv", &st.to_csv())?;
    let last = st.times.len() - 1;
    rep.info("stored_times", st.times.len());
    rep.info("final_re_m", format!("{:.6e},{:.6e},{:.6e}", st.re[last][0], st.re[last][1], st.re[last][2]));
    let max_im = st.im.iter().flat_map(|v| v.iter()).fold(0.0f64, |a, b| a.max(b.abs()));
    rep.info("max_abs_im_m", format!("{max_im:.6e}"));
    let rel = |i: usize| st.pt_norm[i] / (st.conv_norm[i] * st.conv_norm[i]);
    rep.info("pt_norm_ratio_change", format!("{:.6e}", (rel(last) - rel(0)).norm()));
    if let Some(d) = st.decoded(cfg.params.bohr_magneton()) {
        let n = d.last();
        rep.info("final_direction", format!("{:.6},{:.6},{:.6}", n[0], n[1], n[2]));
    }
    Ok(())
}

fn llg_params(cfg: &RunConfig) -> LlgParams {
    let mut p = LlgParams::new(field_from_config(cfg), cfg.params, cfg.m_s);
    p.alpha_g = cfg.alpha_g;
    p.chi_m = cfg.chi_m;
    p.v = cfg.v;
    p
}

fn initial_m(cfg: &RunConfig) -> [f64; 3] {
    let (th, ph) = (cfg.theta, cfg.phi);
    [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()].map(|x| x * cfg.m_s)
}

fn field_axis(cfg: &RunConfig) -> [f64; 3] {
    let b = effective_field(&field_from_config(cfg), &cfg.v, cfg.t0, &cfg.params);
    if norm3(&b) > 0.0 {
        b
    } else {
        [0.0, 0.0, 1.0]
    }
}

fn simulate_llg(cfg: &RunConfig, rep: &mut SummaryReport) -> Result<(), CliError> {
    let p = llg_params(cfg);
    let m0 = initial_m(cfg);
    let tr = match cfg.closure {
        None => llg_integrate(&m0, &p, cfg.t0, cfg.t1, cfg.dt)?,
        Some(c) => raw_eom_integrate(&m0, &p, cfg.t0, cfg.t1, cfg.dt, c)?,
    };
    write_file(&cfg.out_dir, "llg.csv", &tr.to_csv())?;
    rep.below("norm_drift", tr.norm_drift(), cfg.tol.llg_norm * cfg.m_s);
    if let Some(c) = cfg.closure {
        // Closed equation against the Gilbert form it should reduce to.
        let mut q = p.clone();
        q.alpha_g = match c {
            Closure::ExternalField => 0.0,
            Closure::PolarizableMedium => gilbert_constant(&cfg.params, cfg.m_s, cfg.chi_m)?,
        };
        let reference = llg_integrate(&m0, &q, cfg.t0, cfg.t1, cfg.dt)?;
        let dev = tr
            .m
            .iter()
            .zip(&reference.m)
            .map(|(a, b)| norm3(&[a[0] - b[0], a[1] - b[1], a[2] - b[2]]))
            .fold(0.0, f64::max);
        rep.below("closure_deviation", dev, CLOSURE_TOL * cfg.m_s);
    }
    rep.info("precession_frequency", format!("{:.8}", precession_frequency(&tr, &field_axis(cfg))));
    let m = tr.last();
    rep.info("final_m", format!("{:.8},{:.8},{:.8}", m[0], m[1], m[2]));
    Ok(())
}

/// FW quantum run against undamped LLG from the decoded initial direction.
pub fn bridge(cfg: &RunConfig) -> Result<(MagnetizationTrajectory, MagnetizationTrajectory), CliError> {
    let run = run_quantum(cfg, Representation::Fw, true)?;
    let q = run
        .trajectory
        .decoded(cfg.params.bohr_magneton())
        .ok_or_else(|| CliError::runtime("decode", "spin direction not recoverable (n_y = 0)"))?;
    let mut p = llg_params(cfg);
    p.alpha_g = 0.0;
    p.m_s = 1.0;
    let l = llg_integrate(&q.m[0], &p, cfg.t0, cfg.t1, cfg.dt)?;
    Ok((q, l))
}

fn compare(cfg: &RunConfig, rep: &mut SummaryReport) -> Result<(), CliError> {
    let (q, l) = bridge(cfg)?;
    let axis = field_axis(cfg);
    let wq = phase_slope_frequency(&q, &axis);
    let wl = phase_slope_frequency(&l, &axis);
    rep.info("quantum_frequency", format!("{wq:.8}"));
    rep.info("llg_frequency", format!("{wl:.8}"));
    rep.below("relative_frequency_error", ((wq - wl) / wl).abs(), cfg.tol.frequency);
    write_file(&cfg.out_dir, "quantum_direction.csv", &q.to_csv())?;
    write_file(&cfg.out_dir, "llg.csv", &l.to_csv())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp_cfg(name: &str) -> RunConfig {
        RunConfig { out_dir: std::env::temp_dir().join(format!("meanspin-{name}-{}", std::process::id())), ..Default::default() }
    }

    #[test]
    fn report_rendering() {
        let mut r = SummaryReport::new(Command::Sweep, 7);
        r.below("a", 1e-14, 1e-12);
        r.near("b", -3.9, -4.0, 0.3);
        r.info("c", 5);
        let s = r.render();
        assert!(s.contains("a=1.000000e-14 threshold=<1.0e-12 status=pass"));
        assert!(s.ends_with("overall=pass\n"));
        r.below("d", 1.0, 0.5);
        assert!(r.render().ends_with("overall=fail\n"));
    }

    #[test]
    fn verify_algebra_passes_by_default() {
        let cfg = tmp_cfg("alg");
        let rep = execute(Command::VerifyAlgebra, &cfg).unwrap();
        assert!(rep.pass(), "{}", rep.render());
        assert!(cfg.out_dir.join("report.txt").exists());
    }

    #[test]
    fn llg_csv_keeps_norm() {
        let mut cfg = tmp_cfg("llg");
        cfg.field_kind = crate::fields::FieldKind::UniformB;
        cfg.t1 = 10.0;
        cfg.dt = 0.01;
        let rep = execute(Command::SimulateLlg, &cfg).unwrap();
        assert!(rep.pass(), "{}", rep.render());
        let csv = fs::read_to_string(cfg.out_dir.join("llg.csv")).unwrap();
        for line in csv.lines().skip(1) {
            let norm: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn divergence_maps_to_exit_three() {
        let mut cfg = tmp_cfg("div");
        cfg.n = 8;
        cfg.t1 = 1.0;
        cfg.dt = 0.01;
        let err = execute(Command::SimulateDirac, &cfg).unwrap_err();
        assert_eq!(err.exit_code(), 3, "{err}");
        let rep = fs::read_to_string(cfg.out_dir.join("report.txt")).unwrap();
        assert!(rep.contains("artifacts=incomplete"));
    }
}
