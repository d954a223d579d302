//! Algebraic multigrid preconditioned conjugate gradients with polynomial
//! smoothers built on top of ℓ1-Jacobi.
//!
//! Three accelerations of the ℓ1-Jacobi smoother are provided: the
//! 4th-kind Chebyshev recurrence, its variant with optimized coefficients,
//! and a shifted-and-scaled 1st-kind Chebyshev recurrence whose interval
//! endpoint is obtained by an offline minimax optimization.  Dense oracles
//! for the smoothing factor and two-level convergence bounds live next to the
//! sparse runtime code so that the bounds can be checked on small problems.
//!
//! Module map:
//!
//! - [`sparse`]: CSR storage, SpMV, fused vector updates, dense oracle kernels,
//!   Matrix Market IO.
//! - [`cheb`]: Chebyshev families and the smoothing objective.
//! - [`minimax`]: optimal interval parameter, bounds, optimized 4th-kind
//!   coefficients, parameter tables.
//! - [`smoothers`]: runtime smoother kernels and the error-polynomial oracle.
//! - [`amg`]: aggregation, prolongators, Galerkin products, V-cycle and the
//!   two-level bound oracle.
//! - [`krylov`]: PCG and FCG.
//! - [`problems`]: benchmark generators.
//! - [`experiments`]: the reproducible experiment drivers behind the CLI.

pub mod amg;
pub mod cheb;
pub mod error;
pub mod experiments;
pub mod krylov;
pub mod minimax;
pub mod problems;
pub mod smoothers;
pub mod sparse;

pub use amg::{AmgHierarchy, CoarseSolver, CoarseningConfig, CoarseningKind, HierarchyLimits};
pub use error::{Error, Result};
pub use krylov::{KrylovConfig, KrylovVariant, Preconditioner, SolveReport};
pub use minimax::{BetaTable, OptimalParams};
pub use smoothers::{L1JacobiData, PolySmootherConfig, SmootherFamily};
pub use sparse::{CsrMatrix, DenseMatrix, LinearOperator};
