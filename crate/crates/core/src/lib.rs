//! Positive radial solutions of `-Δu + λu = g(u)` on `ℝᴺ`, their global
//! branch `λ ↦ u_λ`, and normalized solutions with prescribed mass
//! `‖u‖₂² = a`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod branch;
pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod ground_states;
pub mod nonlinearity;
pub mod normalized;
pub mod ode;
pub mod profile;
pub mod report;
pub mod shooting;
pub mod special;
pub mod verify;

pub use error::{Error, Result};
