//! Reference architectures and solvers: fully digital, phase-shifter hybrid
//! and the Riemannian conjugate-gradient variant of the tri-hybrid design.

mod arch;
mod fd;
mod hbf;
mod manifold;

pub use arch::{build_architecture, ArchitectureDescriptor, ArchitectureKind};
pub use fd::{solve_fd, FdSolution};
pub use hbf::{solve_hbf, HbfSolution};
pub use manifold::{maximize_on_circles, project_tangent, solve_manifold, ManifoldOptions};
