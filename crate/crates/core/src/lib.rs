//! Tri-hybrid beamforming for integrated sensing and communications.
//!
//! A base station drives a dynamic metasurface antenna (DMA) through one RF
//! chain: a digital weight `w`, one analog phase shifter per waveguide `f`,
//! and Lorentzian-constrained radiators `m_j = q_j (i + ψ_j) / 2`. The
//! [`optimizer`] maximizes `δ_c·SNR + δ_s·(sensing power)` under a total
//! power budget; [`baselines`] provides fully-digital and phase-shifter
//! hybrid references; [`harness`] runs seeded Monte-Carlo comparisons.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod channel;
mod clock;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod model;
pub mod optimizer;
pub mod oracle;

pub use error::{Error, Result};
pub use num_complex::Complex64;
