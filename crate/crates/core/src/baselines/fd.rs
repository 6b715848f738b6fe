//! Fully-digital precoder: the dominant eigenvector of `R = δ_c hhᴴ + δ_s ggᴴ`.
//!
//! `R` has rank at most two and its range is `span{h, g}`. Writing
//! `x = a h + b g`, the eigenproblem `R x = λ x` reduces to the 2×2 system
//!
//! ```text
//!   [ δ_c ‖h‖²      δ_c hᴴg ] [a]     [a]
//!   [ δ_s gᴴh       δ_s ‖g‖²] [b] = λ [b]
//! ```
//!
//! whose largest eigenvalue is `(t + sqrt(t² − 4d)) / 2` with trace `t` and
//! determinant `d = δ_c δ_s (‖h‖²‖g‖² − |hᴴg|²) ≥ 0`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{energy, inner, IsacProblem};

#[derive(Debug, Clone, PartialEq)]
pub struct FdSolution {
    /// Transmit vector with `‖x‖² = P_t`.
    pub precoder: Vec<Complex64>,
    /// `λ_max(R)`.
    pub eigenvalue: f64,
    /// `xᴴ R x = P_t λ_max(R)`.
    pub objective: f64,
}

pub fn solve_fd(problem: &IsacProblem) -> Result<FdSolution> {
    let h = &problem.comm_channel;
    let g = &problem.sensing_steering;
    let (dc, ds) = (problem.weight_comm, problem.weight_sense);
    let hh = energy(h);
    let gg = energy(g);
    let hg = inner(h, g);

    let trace = dc * hh + ds * gg;
    let det = (dc * ds * (hh * gg - hg.norm_sqr())).max(0.0);
    let disc = (trace * trace - 4.0 * det).max(0.0).sqrt();
    let lambda = 0.5 * (trace + disc);
    if !(lambda > 0.0) {
        return Err(Error::DegenerateProblem(
            "weighted channel correlation is zero".into(),
        ));
    }

    // Two null vectors of (T − λI), one from each row; keep the better
    // conditioned one after mapping back to the antenna domain.
    let candidates = [
        (Complex64::from(dc) * hg, Complex64::from(lambda - dc * hh)),
        (
            Complex64::from(lambda - ds * gg),
            Complex64::from(ds) * hg.conj(),
        ),
    ];
    let combine = |(a, b): (Complex64, Complex64)| -> Vec<Complex64> {
        h.iter().zip(g).map(|(hj, gj)| hj * a + gj * b).collect()
    };
    let mut best = combine(candidates[0]);
    let mut best_norm = energy(&best);
    let other = combine(candidates[1]);
    let other_norm = energy(&other);
    if other_norm > best_norm {
        best = other;
        best_norm = other_norm;
    }
    if !(best_norm > 0.0) {
        return Err(Error::DegenerateProblem(
            "could not form a dominant eigenvector".into(),
        ));
    }

    let scale = (problem.power_budget / best_norm).sqrt();
    let precoder: Vec<Complex64> = best.into_iter().map(|x| x * scale).collect();
    let objective = problem.weighted_gain(&precoder);
    Ok(FdSolution {
        precoder,
        eigenvalue: lambda,
        objective,
    })
}
