//! Periodic spectral grid in x and dense operators on spinor ⊗ grid space.

use std::f64::consts::PI;

use rustfft::FftPlanner;
use thiserror::Error;

use crate::linalg::{grid_on_spinor, max_abs, re, CMat, CVec, C64};

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("grid needs an even number of points >= 8, got {0}")]
    BadPointCount(usize),
    #[error("grid length must be positive and finite, got {0}")]
    BadLength(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub n: usize,
    pub length: f64,
    pub dx: f64,
    pub x: Vec<f64>,
    /// Angular wavenumbers in FFT order, Nyquist entry zeroed.
    pub k: Vec<f64>,
}

pub fn make_grid(n: usize, length: f64) -> Result<Grid, GridError> {
    if n < 8 || !n.is_multiple_of(2) {
        return Err(GridError::BadPointCount(n));
    }
    if !(length > 0.0 && length.is_finite()) {
        return Err(GridError::BadLength(length));
    }
    let dx = length / n as f64;
    let x = (0..n).map(|j| (j as f64 - n as f64 / 2.0 + 0.5) * dx).collect();
    let k = (0..n)
        .map(|j| {
            let f = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
            if j == n / 2 {
                0.0
            } else {
                2.0 * PI * f / length
            }
        })
        .collect();
    Ok(Grid { n, length, dx, x, k })
}

impl Grid {
    /// Index of the point at −x_i.
    pub fn reflect(&self, i: usize) -> usize {
        self.n - 1 - i
    }

    pub fn max_wavenumber(&self) -> f64 {
        PI * self.n as f64 / self.length
    }

    /// Mask of the interior half of the grid, |x| < L/4.
    pub fn interior(&self) -> Vec<bool> {
        self.x.iter().map(|x| x.abs() < self.length / 4.0).collect()
    }

    /// Reflection permutation as an n×n matrix.
    pub fn reflection_matrix(&self) -> CMat {
        let mut r = CMat::zeros(self.n, self.n);
        for i in 0..self.n {
            r[(self.reflect(i), i)] = re(1.0);
        }
        r
    }

    /// Spectral p̂ = −i d/dx on the scalar grid (ħ = 1).
    pub fn momentum_matrix(&self) -> CMat {
        let n = self.n;
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let mut p = CMat::zeros(n, n);
        for j in 0..n {
            let mut col = vec![C64::new(0.0, 0.0); n];
            col[j] = re(1.0);
            fwd.process(&mut col);
            for (v, k) in col.iter_mut().zip(&self.k) {
                *v *= k / n as f64;
            }
            inv.process(&mut col);
            for i in 0..n {
                p[(i, j)] = col[i];
            }
        }
        // p̂ is real-antisymmetric times −i; drop round-off asymmetry.
        (&p + p.adjoint()) * re(0.5)
    }

    pub fn sample<F: Fn(f64) -> C64>(&self, f: F) -> CVec {
        CVec::from_iterator(self.n, self.x.iter().map(|&x| f(x)))
    }
}

#[derive(Clone, Debug)]
pub struct DiscreteOperator {
    pub matrix: CMat,
    pub hermitian: bool,
    pub label: String,
}

impl DiscreteOperator {
    pub fn new(matrix: CMat, label: impl Into<String>) -> Self {
        let hermitian = max_abs(&(&matrix - matrix.adjoint())) < 1e-12;
        DiscreteOperator { matrix, hermitian, label: label.into() }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// p̂ acting on spinor ⊗ grid (identity in spinor space).
pub fn momentum_operator(grid: &Grid) -> DiscreteOperator {
    DiscreteOperator::new(grid_on_spinor(&grid.momentum_matrix()), "p_x")
}
