//! Flat `key = value` run configuration.
//!
//! Entries are separated by newlines or commas; `#` starts a comment. A
//! comma-separated piece without `=` continues the previous value, so list
//! values such as `sweep.m = 8,16,32,64` read naturally.

use std::f64::consts::PI;
use std::path::PathBuf;

use thiserror::Error;

use crate::fields::{FieldKind, PhysicalParams};
use crate::llg::Closure;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("`{0}` has no value")]
    MissingValue(String),
    #[error("`{key}`: cannot parse `{value}` as {expected}")]
    BadType { key: String, value: String, expected: &'static str },
    #[error("`{key}`: {reason}")]
    OutOfRange { key: String, reason: String },
    #[error("line {0}: expected key=value")]
    Syntax(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Representation {
    Dirac,
    Fw,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tolerances {
    pub clifford: f64,
    pub pt: f64,
    pub free_commutator: f64,
    pub slope: f64,
    pub llg_norm: f64,
    pub frequency: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { clifford: 1e-13, pt: 1e-12, free_commutator: 1e-12, slope: 0.3, llg_norm: 1e-12, frequency: 0.01 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub length: f64,
    pub params: PhysicalParams,
    pub field_kind: FieldKind,
    pub b0: f64,
    pub e0: f64,
    pub omega: f64,
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
    pub seed: u64,
    pub stride: usize,
    pub renormalize: bool,
    pub representation: Representation,
    pub out_dir: PathBuf,
    pub tol: Tolerances,
    pub alpha_g: f64,
    pub chi_m: f64,
    pub m_s: f64,
    pub v: [f64; 3],
    pub closure: Option<Closure>,
    pub theta: f64,
    pub phi: f64,
    pub sweep_masses: Vec<f64>,
    pub sweep_order: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: 64,
            length: 20.0,
            params: PhysicalParams::default(),
            field_kind: FieldKind::Zero,
            b0: 1.0,
            e0: 0.3,
            omega: 0.2,
            t0: 0.0,
            t1: 1.0,
            dt: 1e-3,
            seed: 0,
            stride: 10,
            renormalize: false,
            representation: Representation::Dirac,
            out_dir: PathBuf::from("out"),
            tol: Tolerances::default(),
            alpha_g: 0.0,
            chi_m: f64::INFINITY,
            m_s: 1.0,
            v: [0.0; 3],
            closure: None,
            theta: PI / 2.0,
            phi: PI / 4.0,
            sweep_masses: vec![8.0, 16.0, 32.0, 64.0],
            sweep_order: 3,
        }
    }
}

fn num(key: &str, v: &str) -> Result<f64, ConfigError> {
    let x: f64 = v.parse().map_err(|_| ConfigError::BadType { key: key.into(), value: v.into(), expected: "a number" })?;
    if x.is_nan() {
        return Err(ConfigError::BadType { key: key.into(), value: v.into(), expected: "a number" });
    }
    Ok(x)
}

fn int(key: &str, v: &str) -> Result<u64, ConfigError> {
    v.parse().map_err(|_| ConfigError::BadType { key: key.into(), value: v.into(), expected: "a non-negative integer" })
}

fn boolean(key: &str, v: &str) -> Result<bool, ConfigError> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(ConfigError::BadType { key: key.into(), value: v.into(), expected: "true or false" }),
    }
}

fn range(key: &str, ok: bool, reason: &str) -> Result<(), ConfigError> {
    if ok {
        Ok(())
    } else {
        Err(ConfigError::OutOfRange { key: key.into(), reason: reason.into() })
    }
}

fn positive(key: &str, v: &str) -> Result<f64, ConfigError> {
    let x = num(key, v)?;
    range(key, x > 0.0 && x.is_finite(), "must be positive and finite")?;
    Ok(x)
}

/// Splits text into (line number, key, value) entries.
fn entries(text: &str) -> Result<Vec<(usize, String, String)>, ConfigError> {
    let mut out: Vec<(usize, String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        for piece in line.split(',') {
            let piece = piece.trim();
            if piece.is_empty() {
                continue;
            }
            match piece.split_once('=') {
                Some((k, v)) => out.push((i + 1, k.trim().to_string(), v.trim().to_string())),
                None => match out.last_mut() {
                    Some(last) if last.0 == i + 1 => {
                        last.2.push(',');
                        last.2.push_str(piece);
                    }
                    _ => return Err(ConfigError::Syntax(i + 1)),
                },
            }
        }
    }
    Ok(out)
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut c = RunConfig::default();
    let (mut m, mut cc, mut e) = (c.params.m, c.params.c, c.params.e);
    for (_, key, v) in entries(text)? {
        if v.is_empty() {
            return Err(ConfigError::MissingValue(key));
        }
        let k = key.as_str();
        let v = v.as_str();
        match k {
            "grid.n" => {
                let n = int(k, v)? as usize;
                range(k, n >= 8 && n.is_multiple_of(2), "must be even and at least 8")?;
                range(k, n <= 512, "must be at most 512")?;
                c.n = n;
            }
            "grid.length" => c.length = positive(k, v)?,
            "physical.m" => m = positive(k, v)?,
            "physical.c" => cc = positive(k, v)?,
            "physical.e" => {
                e = num(k, v)?;
                range(k, e != 0.0 && e.is_finite(), "must be nonzero")?;
            }
            "field.kind" => {
                c.field_kind = v.parse().map_err(|_| ConfigError::BadType {
                    key: key.clone(),
                    value: v.into(),
                    expected: "zero, uniform_B, uniform_E, harmonic_B or custom_1d",
                })?
            }
            "field.B0" => c.b0 = num(k, v)?,
            "field.E0" => c.e0 = num(k, v)?,
            "field.omega" => c.omega = num(k, v)?,
            "run.t0" => c.t0 = num(k, v)?,
            "run.t1" => c.t1 = num(k, v)?,
            "run.dt" => c.dt = positive(k, v)?,
            "run.seed" => c.seed = int(k, v)?,
            "run.stride" => {
                c.stride = int(k, v)? as usize;
                range(k, c.stride >= 1, "must be at least 1")?;
            }
            "run.renormalize" => c.renormalize = boolean(k, v)?,
            "run.representation" => {
                c.representation = match v {
                    "dirac" => Representation::Dirac,
                    "fw" => Representation::Fw,
                    _ => return Err(ConfigError::BadType { key, value: v.into(), expected: "dirac or fw" }),
                }
            }
            "output.dir" => c.out_dir = PathBuf::from(v),
            "tol.clifford" => c.tol.clifford = positive(k, v)?,
            "tol.pt" => c.tol.pt = positive(k, v)?,
            "tol.free_commutator" => c.tol.free_commutator = positive(k, v)?,
            "tol.slope" => c.tol.slope = positive(k, v)?,
            "tol.llg_norm" => c.tol.llg_norm = positive(k, v)?,
            "tol.frequency" => c.tol.frequency = positive(k, v)?,
            "llg.alpha" => {
                c.alpha_g = num(k, v)?;
                range(k, c.alpha_g >= 0.0, "must be >= 0")?;
            }
            "llg.chi_m" => {
                c.chi_m = num(k, v)?;
                range(k, c.chi_m != 0.0, "must be nonzero")?;
            }
            "llg.Ms" => c.m_s = positive(k, v)?,
            "llg.vx" => c.v[0] = num(k, v)?,
            "llg.vy" => c.v[1] = num(k, v)?,
            "llg.vz" => c.v[2] = num(k, v)?,
            "llg.closure" => {
                c.closure = match v {
                    "none" => None,
                    "external_field" => Some(Closure::ExternalField),
                    "polarizable_medium" => Some(Closure::PolarizableMedium),
                    _ => {
                        return Err(ConfigError::BadType {
                            key,
                            value: v.into(),
                            expected: "none, external_field or polarizable_medium",
                        })
                    }
                }
            }
            "spin.theta" => c.theta = num(k, v)?,
            "spin.phi" => c.phi = num(k, v)?,
            "sweep.m" => {
                let ms: Result<Vec<f64>, _> = v.split(',').map(|s| positive(k, s.trim())).collect();
                c.sweep_masses = ms?;
                range(k, c.sweep_masses.len() >= 2, "needs at least two masses")?;
            }
            "sweep.order" => {
                c.sweep_order = int(k, v)? as usize;
                range(k, c.sweep_order <= 3, "must be 0..=3")?;
            }
            _ => return Err(ConfigError::UnknownKey(key)),
        }
    }
    range("run.t1", c.t1 > c.t0, "must exceed run.t0")?;
    c.params = PhysicalParams::new(m, cc, e);
    Ok(c)
}
