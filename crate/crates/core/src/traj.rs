//! Magnetization trajectories and the metrics used to compare them.

use std::fmt::Write as _;

use thiserror::Error;

use crate::linalg::linear_slope;

pub type Vec3 = [f64; 3];

#[derive(Debug, Error, PartialEq)]
pub enum TrajError {
    #[error("trajectory is empty")]
    Empty,
    #[error("times and samples differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("times must be strictly increasing (index {0})")]
    NotIncreasing(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct MagnetizationTrajectory {
    pub times: Vec<f64>,
    pub m: Vec<Vec3>,
}

pub fn norm3(v: &Vec3) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

pub fn cross3(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn dot3(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl MagnetizationTrajectory {
    pub fn new(times: Vec<f64>, m: Vec<Vec3>) -> Result<Self, TrajError> {
        if times.is_empty() {
            return Err(TrajError::Empty);
        }
        if times.len() != m.len() {
            return Err(TrajError::LengthMismatch(times.len(), m.len()));
        }
        if let Some(i) = times.windows(2).position(|w| w[1] <= w[0]) {
            return Err(TrajError::NotIncreasing(i + 1));
        }
        Ok(MagnetizationTrajectory { times, m })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn norms(&self) -> Vec<f64> {
        self.m.iter().map(norm3).collect()
    }

    /// max |‖M(t)‖ − ‖M(t₀)‖|
    pub fn norm_drift(&self) -> f64 {
        let n = self.norms();
        n.iter().map(|v| (v - n[0]).abs()).fold(0.0, f64::max)
    }

    pub fn last(&self) -> Vec3 {
        *self.m.last().unwrap()
    }

    /// Linear interpolation; clamps outside the time range.
    pub fn at(&self, t: f64) -> Vec3 {
        let ts = &self.times;
        if t <= ts[0] {
            return self.m[0];
        }
        if t >= ts[ts.len() - 1] {
            return self.last();
        }
        let i = ts.partition_point(|&s| s <= t) - 1;
        let w = (t - ts[i]) / (ts[i + 1] - ts[i]);
        [0, 1, 2].map(|k| self.m[i][k] * (1.0 - w) + self.m[i + 1][k] * w)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,Mx,My,Mz,|M|\n");
        for (t, m) in self.times.iter().zip(&self.m) {
            let _ = writeln!(s, "{t:.10e},{:.15e},{:.15e},{:.15e},{:.15e}", m[0], m[1], m[2], norm3(m));
        }
        s
    }
}

/// Orthonormal (u, v) spanning the plane normal to `axis`.
fn plane_basis(axis: &Vec3) -> (Vec3, Vec3, Vec3) {
    let n = norm3(axis);
    let a = axis.map(|x| x / n);
    let trial = if a[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let u = cross3(&a, &trial);
    let un = norm3(&u);
    let u = u.map(|x| x / un);
    let v = cross3(&a, &u);
    (a, u, v)
}

/// Angular frequency from linearly interpolated zero crossings of a signal.
/// `None` with fewer than two crossings.
pub fn zero_crossing_frequency(times: &[f64], signal: &[f64]) -> Option<f64> {
    let mut cross = Vec::new();
    for i in 1..signal.len() {
        let (a, b) = (signal[i - 1], signal[i]);
        if a == 0.0 && i == 1 {
            cross.push(times[0]);
        } else if (a < 0.0 && b >= 0.0) || (a > 0.0 && b <= 0.0) {
            let w = a / (a - b);
            cross.push(times[i - 1] + w * (times[i] - times[i - 1]));
        }
    }
    if cross.len() < 2 {
        return None;
    }
    let span = cross[cross.len() - 1] - cross[0];
    Some(std::f64::consts::PI * (cross.len() - 1) as f64 / span)
}

/// Signed precession rate about `axis` from a least-squares fit of the
/// unwrapped azimuth.
pub fn phase_slope_frequency(traj: &MagnetizationTrajectory, axis: &Vec3) -> f64 {
    let (_, u, v) = plane_basis(axis);
    let mut phases = Vec::with_capacity(traj.len());
    let mut prev: Option<f64> = None;
    let mut offset = 0.0;
    for m in &traj.m {
        let raw = dot3(m, &v).atan2(dot3(m, &u));
        if let Some(p) = prev {
            let d = raw + offset - p;
            if d > std::f64::consts::PI {
                offset -= 2.0 * std::f64::consts::PI;
            } else if d < -std::f64::consts::PI {
                offset += 2.0 * std::f64::consts::PI;
            }
        }
        let ph = raw + offset;
        phases.push(ph);
        prev = Some(ph);
    }
    linear_slope(&traj.times, &phases)
}

/// Angular frequency of the transverse component along u, by zero
/// crossings when there are enough of them, otherwise by phase slope.
pub fn precession_frequency(traj: &MagnetizationTrajectory, axis: &Vec3) -> f64 {
    let (_, u, _) = plane_basis(axis);
    let sig: Vec<f64> = traj.m.iter().map(|m| dot3(m, &u)).collect();
    match zero_crossing_frequency(&traj.times, &sig) {
        Some(w) if sig.len() > 8 => w,
        _ => phase_slope_frequency(traj, axis).abs(),
    }
}

/// Slope of ln tan(θ/2) against t, θ measured from `axis`.
pub fn polar_decay_rate(traj: &MagnetizationTrajectory, axis: &Vec3) -> f64 {
    let (a, _, _) = plane_basis(axis);
    let y: Vec<f64> = traj
        .m
        .iter()
        .map(|m| {
            let th = (dot3(m, &a) / norm3(m)).clamp(-1.0, 1.0).acos();
            (th / 2.0).tan().ln()
        })
        .collect();
    linear_slope(&traj.times, &y)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub max_deviation: f64,
    pub freq_a: f64,
    pub freq_b: f64,
    pub rel_freq_error: f64,
    pub norm_drift_a: f64,
    pub norm_drift_b: f64,
}

/// Compares `b` against `a` on a's time grid, interpolating b.
pub fn compare_trajectories(a: &MagnetizationTrajectory, b: &MagnetizationTrajectory, axis: &Vec3) -> Comparison {
    let max_deviation = a
        .times
        .iter()
        .zip(&a.m)
        .map(|(&t, ma)| {
            let mb = b.at(t);
            norm3(&[ma[0] - mb[0], ma[1] - mb[1], ma[2] - mb[2]])
        })
        .fold(0.0, f64::max);
    let freq_a = precession_frequency(a, axis);
    let freq_b = precession_frequency(b, axis);
    Comparison {
        max_deviation,
        freq_a,
        freq_b,
        rel_freq_error: ((freq_b - freq_a) / freq_a).abs(),
        norm_drift_a: a.norm_drift(),
        norm_drift_b: b.norm_drift(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(w: f64, n: usize, dt: f64) -> MagnetizationTrajectory {
        let times: Vec<f64> = (0..n).map(|i| i as f64 * dt).collect();
        let m = times.iter().map(|t| [(w * t).cos(), (w * t).sin(), 0.3]).collect();
        MagnetizationTrajectory::new(times, m).unwrap()
    }

    #[test]
    fn rejects_bad_times() {
        assert_eq!(MagnetizationTrajectory::new(vec![], vec![]), Err(TrajError::Empty));
        assert_eq!(
            MagnetizationTrajectory::new(vec![0.0, 0.0], vec![[0.0; 3]; 2]),
            Err(TrajError::NotIncreasing(1))
        );
    }

    #[test]
    fn frequency_estimators_agree() {
        let tr = circle(1.7, 2001, 0.01);
        let z = precession_frequency(&tr, &[0.0, 0.0, 1.0]);
        let p = phase_slope_frequency(&tr, &[0.0, 0.0, 1.0]);
        assert!((z - 1.7).abs() < 1e-3, "{z}");
        assert!((p - 1.7).abs() < 1e-9, "{p}");
        let back = phase_slope_frequency(&tr, &[0.0, 0.0, -1.0]);
        assert!((back + 1.7).abs() < 1e-9);
    }

    #[test]
    fn decay_rate_of_known_law() {
        let times: Vec<f64> = (0..100).map(|i| i as f64 * 0.1).collect();
        let m = times
            .iter()
            .map(|t| {
                let th = 2.0 * (0.8f64.tan() * (-0.05 * t).exp()).atan();
                [th.sin(), 0.0, th.cos()]
            })
            .collect();
        let tr = MagnetizationTrajectory::new(times, m).unwrap();
        assert!((polar_decay_rate(&tr, &[0.0, 0.0, 1.0]) + 0.05).abs() < 1e-12);
    }

    #[test]
    fn interpolation_and_comparison() {
        let a = circle(1.0, 101, 0.1);
        let b = circle(1.0, 1001, 0.01);
        let cmp = compare_trajectories(&a, &b, &[0.0, 0.0, 1.0]);
        assert!(cmp.max_deviation < 1e-12);
        let mid = b.at(0.005);
        assert!((mid[0] - 0.5 * (1.0 + 0.01f64.cos())).abs() < 1e-15);
        assert!(b.to_csv().starts_with("t,Mx,My,Mz,|M|\n"));
    }
}
