//! Pseudo-PT-symmetric Dirac theory of the mean spin operator: Dirac algebra,
//! spectral grid operators, Foldy-Wouthuysen expansion, PT expectations,
//! propagation and the classical magnetization equations they lead to.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod algebra;
pub mod classical;
pub mod cli;
pub mod config;
pub mod fw;
pub mod fields;
pub mod grid;
pub mod hamiltonian;
pub mod linalg;
pub mod llg;
pub mod propagate;
pub mod pt;
pub mod traj;
