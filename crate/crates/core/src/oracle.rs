//! Independent reference computations used by the tests and the `verify`
//! command: central finite differences, explicit dense matrices and
//! exhaustive search over quantized phases.
//!
//! Nothing here goes through the implicit block-structured code paths of
//! [`crate::model`] and [`crate::optimizer`] except where a residual compares
//! the two on purpose.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::geometry::BlockLayout;
use crate::model::{compose_effective, IsacProblem};
use crate::optimizer::QuadraticKernel;

type CMatrix = DMatrix<Complex64>;
type CVector = DVector<Complex64>;

/// Central-difference estimate of `2 ∂F/∂ψ* = ∂F/∂Re ψ + i ∂F/∂Im ψ`.
pub fn finite_difference_gradient<F>(objective: F, psi: &[Complex64], step: f64) -> Vec<Complex64>
where
    F: Fn(&[Complex64]) -> f64,
{
    let mut x = psi.to_vec();
    let mut out = Vec::with_capacity(psi.len());
    for j in 0..psi.len() {
        let mut partial = |delta: Complex64| {
            x[j] = psi[j] + delta;
            let plus = objective(&x);
            x[j] = psi[j] - delta;
            let minus = objective(&x);
            x[j] = psi[j];
            (plus - minus) / (2.0 * step)
        };
        let d_re = partial(Complex64::new(step, 0.0));
        let d_im = partial(Complex64::new(0.0, step));
        out.push(Complex64::new(d_re, d_im));
    }
    out
}

/// Assignment of DMA elements to waveguides used by the dense builders.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockMapping {
    /// Element `j` belongs to waveguide `j / N_u` (the actual layout).
    Contiguous,
    /// Element `j` belongs to waveguide `j % N_w`; a deliberately wrong map
    /// for negative-control checks.
    Interleaved,
}

impl BlockMapping {
    fn waveguide(&self, layout: BlockLayout, j: usize) -> usize {
        match self {
            BlockMapping::Contiguous => j / layout.elements_per_waveguide,
            BlockMapping::Interleaved => j % layout.n_waveguides,
        }
    }
}

/// Dense `N_r × N_w` block-diagonal matrix with column `i` holding the entries
/// of `x` that belong to waveguide `i`. With `x = m` this is `M`, with
/// `x = h` it is the lifted channel `H`.
pub fn dense_block_matrix(x: &[Complex64], layout: BlockLayout, mapping: BlockMapping) -> CMatrix {
    let mut out = CMatrix::zeros(x.len(), layout.n_waveguides);
    for (j, xj) in x.iter().enumerate() {
        out[(j, mapping.waveguide(layout, j))] = *xj;
    }
    out
}

fn column(x: &[Complex64]) -> CVector {
    CVector::from_column_slice(x)
}

/// Dense `A = δ_c (Hf*)(Hf*)ᴴ + δ_s (Gf*)(Gf*)ᴴ`.
pub fn dense_kernel(problem: &IsacProblem, f: &[Complex64], layout: BlockLayout) -> CMatrix {
    let fc = column(f).conjugate();
    let ah = dense_block_matrix(&problem.comm_channel, layout, BlockMapping::Contiguous) * &fc;
    let ag = dense_block_matrix(&problem.sensing_steering, layout, BlockMapping::Contiguous) * &fc;
    (&ah * ah.adjoint()).scale(problem.weight_comm)
        + (&ag * ag.adjoint()).scale(problem.weight_sense)
}

/// Dense form of a stored rank-2 kernel.
pub fn kernel_to_dense(kernel: &QuadraticKernel) -> CMatrix {
    let ah = column(&kernel.comm_factor);
    let ag = column(&kernel.sense_factor);
    (&ah * ah.adjoint()).scale(kernel.weight_comm) + (&ag * ag.adjoint()).scale(kernel.weight_sense)
}

/// Maximum discrepancies between algebraically equal quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelResiduals {
    /// `hᴴ(Mf)` vs `mᵀ(H* f)`, and likewise for `g`.
    pub lifting: f64,
    /// `‖Mf‖²` vs `tr(M Mᴴ)`.
    pub trace: f64,
    /// `mᴴ A m` vs `δ_c|hᴴMf|² + δ_s|gᴴMf|²`.
    pub kernel: f64,
    /// Dense `Mf` vs the implicit [`compose_effective`].
    pub implicit: f64,
}

impl ModelResiduals {
    pub fn max(&self) -> f64 {
        self.lifting
            .max(self.trace)
            .max(self.kernel)
            .max(self.implicit)
    }
}

pub fn dense_model_check(
    m: &[Complex64],
    f: &[Complex64],
    problem: &IsacProblem,
    layout: BlockLayout,
) -> Result<ModelResiduals> {
    dense_model_check_with(m, f, problem, layout, BlockMapping::Contiguous)
}

/// [`dense_model_check`] with the dense `M` built from `mapping`, while the
/// lifted channels and the implicit path keep the true layout.
pub fn dense_model_check_with(
    m: &[Complex64],
    f: &[Complex64],
    problem: &IsacProblem,
    layout: BlockLayout,
    mapping: BlockMapping,
) -> Result<ModelResiduals> {
    check_len("DMA weights", layout.n_elements(), m.len())?;
    check_len("analog weights", layout.n_waveguides, f.len())?;
    check_len("channel", layout.n_elements(), problem.n_elements())?;

    let dense_m = dense_block_matrix(m, layout, mapping);
    let fv = column(f);
    let mf = &dense_m * &fv;
    let h = column(&problem.comm_channel);
    let g = column(&problem.sensing_steering);
    let mv = column(m);

    let lifted = |x: &[Complex64]| {
        let big = dense_block_matrix(x, layout, BlockMapping::Contiguous).conjugate();
        (mv.transpose() * big * &fv)[(0, 0)]
    };
    let hmf = (h.adjoint() * &mf)[(0, 0)];
    let gmf = (g.adjoint() * &mf)[(0, 0)];
    let lifting = (hmf - lifted(&problem.comm_channel))
        .norm()
        .max((gmf - lifted(&problem.sensing_steering)).norm());

    let trace = (mf.norm_squared() - (&dense_m * dense_m.adjoint()).trace().re).abs();

    let a = dense_kernel(problem, f, layout);
    let quad = (mv.adjoint() * a * &mv)[(0, 0)].re;
    let weighted = problem.weight_comm * hmf.norm_sqr() + problem.weight_sense * gmf.norm_sqr();
    let kernel = (quad - weighted).abs();

    let v = compose_effective(m, f, layout)?;
    let implicit = v
        .iter()
        .zip(mf.iter())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);

    Ok(ModelResiduals {
        lifting,
        trace,
        kernel,
        implicit,
    })
}

fn diag(q: &[Complex64]) -> CMatrix {
    CMatrix::from_diagonal(&column(q))
}

/// `Qᴴ A Q − z QᴴQ + z I`, the Hessian expression stated for the ψ surrogate
/// up to the factor convention of the Wirtinger calculus.
pub fn hessian_unscaled(kernel: &QuadraticKernel, q: &[Complex64], z: f64) -> CMatrix {
    let qd = diag(q);
    let n = q.len();
    qd.adjoint() * kernel_to_dense(kernel) * &qd - (qd.adjoint() * &qd).scale(z)
        + CMatrix::identity(n, n).scale(z)
}

/// `∂²f/∂ψ∂ψ* = ¼ Qᴴ(A − zI)Q + zI` for `f(ψ) = mᴴAm − z mᴴm + z ψᴴψ`.
pub fn surrogate_hessian(kernel: &QuadraticKernel, q: &[Complex64], z: f64) -> CMatrix {
    let qd = diag(q);
    let n = q.len();
    let a = kernel_to_dense(kernel) - CMatrix::identity(n, n).scale(z);
    (qd.adjoint() * a * &qd).scale(0.25) + CMatrix::identity(n, n).scale(z)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(matrix: &CMatrix) -> f64 {
    let sym = (matrix + matrix.adjoint()).scale(0.5);
    sym.symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Largest eigenvalue of a Hermitian matrix.
pub fn max_eigenvalue(matrix: &CMatrix) -> f64 {
    let sym = (matrix + matrix.adjoint()).scale(0.5);
    sym.symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Dense `R = δ_c hhᴴ + δ_s ggᴴ`.
pub fn dense_correlation(problem: &IsacProblem) -> CMatrix {
    let h = column(&problem.comm_channel);
    let g = column(&problem.sensing_steering);
    (&h * h.adjoint()).scale(problem.weight_comm) + (&g * g.adjoint()).scale(problem.weight_sense)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSearchSpec {
    /// Phases per variable, `e^{i2πk/K}` for `k < K`.
    pub phase_levels: usize,
    pub max_total_variables: usize,
    pub max_evaluations: f64,
}

impl GridSearchSpec {
    pub fn new(phase_levels: usize) -> Self {
        Self {
            phase_levels,
            max_total_variables: 8,
            max_evaluations: 1e9,
        }
    }

    /// Grid points visited for an array layout. The first analog phase is
    /// pinned to 1 since the ratio is invariant to a common phase of `f`.
    pub fn evaluations(&self, layout: BlockLayout) -> f64 {
        let vars = layout.n_elements() + layout.n_waveguides - 1;
        (self.phase_levels as f64).powi(vars as i32)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridOptimum {
    pub psi: Vec<Complex64>,
    pub f: Vec<Complex64>,
    pub ratio: f64,
}

/// Per-waveguide partial sums `(hᴴm_blk, gᴴm_blk, ‖m_blk‖²)` for every
/// quantized phase assignment of one block, indexed in mixed radix `K`.
struct BlockTable {
    comm: Vec<Complex64>,
    sense: Vec<Complex64>,
    energy: Vec<f64>,
}

fn block_table(
    problem: &IsacProblem,
    q: &[Complex64],
    layout: BlockLayout,
    waveguide: usize,
    levels: &[Complex64],
) -> BlockTable {
    let k = levels.len();
    let range = layout.block(waveguide);
    let size = k.pow(range.len() as u32);
    let mut table = BlockTable {
        comm: Vec::with_capacity(size),
        sense: Vec::with_capacity(size),
        energy: Vec::with_capacity(size),
    };
    for code in 0..size {
        let (mut sh, mut sg, mut e) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), 0.0);
        let mut c = code;
        for j in range.clone() {
            let psi = levels[c % k];
            c /= k;
            let m = q[j] * (Complex64::i() + psi) * 0.5;
            sh += problem.comm_channel[j].conj() * m;
            sg += problem.sensing_steering[j].conj() * m;
            e += m.norm_sqr();
        }
        table.comm.push(sh);
        table.sense.push(sg);
        table.energy.push(e);
    }
    table
}

/// Joint exhaustive search over quantized `ψ` and `f` for the best ratio
/// `(δ_c|hᴴMf|² + δ_s|gᴴMf|²) / Σ|m_j|²`.
pub fn exhaustive_phase_search(
    problem: &IsacProblem,
    layout: BlockLayout,
    q: &[Complex64],
    spec: &GridSearchSpec,
) -> Result<GridOptimum> {
    check_len("channel", layout.n_elements(), problem.n_elements())?;
    check_len("propagation gains", layout.n_elements(), q.len())?;
    if spec.phase_levels == 0 {
        return Err(Error::InvalidConfig(
            "grid needs at least one phase level".into(),
        ));
    }
    let size = spec.evaluations(layout);
    let vars = layout.n_elements() + layout.n_waveguides;
    if vars > spec.max_total_variables || size > spec.max_evaluations {
        return Err(Error::GridTooLarge {
            size,
            cap: spec.max_evaluations,
        });
    }

    let k = spec.phase_levels;
    let levels: Vec<Complex64> = (0..k)
        .map(|i| Complex64::from_polar(1.0, std::f64::consts::TAU * i as f64 / k as f64))
        .collect();
    let tables: Vec<BlockTable> = (0..layout.n_waveguides)
        .map(|i| block_table(problem, q, layout, i, &levels))
        .collect();
    let block_size = tables[0].energy.len();
    let n_w = layout.n_waveguides;

    // Candidate index: first block code, then (block code, f level) per further waveguide.
    let inner_count = (block_size * k).pow((n_w - 1) as u32);
    let search = |first: usize| -> (f64, usize) {
        let mut best = (f64::NEG_INFINITY, 0usize);
        for rest in 0..inner_count {
            let mut sh = tables[0].comm[first];
            let mut sg = tables[0].sense[first];
            let mut e = tables[0].energy[first];
            let mut c = rest;
            for t in &tables[1..] {
                let code = c % block_size;
                c /= block_size;
                let fl = levels[c % k];
                c /= k;
                sh += t.comm[code] * fl;
                sg += t.sense[code] * fl;
                e += t.energy[code];
            }
            if e > 0.0 {
                let ratio = (problem.weight_comm * sh.norm_sqr()
                    + problem.weight_sense * sg.norm_sqr())
                    / e;
                if ratio > best.0 {
                    best = (ratio, rest);
                }
            }
        }
        best
    };

    #[cfg(feature = "parallel")]
    let per_first: Vec<(f64, usize)> = {
        use rayon::prelude::*;
        (0..block_size).into_par_iter().map(search).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let per_first: Vec<(f64, usize)> = (0..block_size).map(search).collect();

    // earliest index wins ties, independent of partitioning
    let (first, (ratio, rest)) =
        per_first
            .into_iter()
            .enumerate()
            .fold((0, (f64::NEG_INFINITY, 0)), |acc, (i, cand)| {
                if cand.0 > acc.1 .0 {
                    (i, cand)
                } else {
                    acc
                }
            });
    if !ratio.is_finite() {
        return Err(Error::DegenerateBeamformer);
    }

    let n_u = layout.elements_per_waveguide;
    let mut psi = Vec::with_capacity(layout.n_elements());
    let mut f = vec![Complex64::new(1.0, 0.0)];
    let decode = |mut code: usize, psi: &mut Vec<Complex64>| {
        for _ in 0..n_u {
            psi.push(levels[code % k]);
            code /= k;
        }
    };
    decode(first, &mut psi);
    let mut c = rest;
    for _ in 1..n_w {
        decode(c % block_size, &mut psi);
        c /= block_size;
        f.push(levels[c % k]);
        c /= k;
    }
    Ok(GridOptimum { psi, f, ratio })
}
