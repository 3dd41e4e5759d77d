//! Optimal orthogonal low-rank approximation of (symmetric) tensors.
//!
//! The crate computes best rank-`r` approximations `Σ σ_k v_{k1} ⊗ … ⊗ v_{kd}`
//! under four orthogonality notions between the terms (orthogonal, strongly
//! orthogonal, completely orthogonal and partially orthogonal), certifies
//! small cases with an exhaustive angle-grid oracle, and ships a library of
//! named tensors on which symmetric and unconstrained optima differ.
//!
//! Modes are 0-based throughout the library.
//!
//! ```
//! use symortho::{cases, solvers::{self, ApproxProblem, SolverConfig}, Notion};
//!
//! let t = cases::t_no_on();
//! let problem = ApproxProblem::new(t, Notion::Con, 2).with_config(SolverConfig {
//!     starts: 8,
//!     ..SolverConfig::default()
//! });
//! let result = solvers::solve(&problem).unwrap();
//! assert!((result.residual - 2f64.sqrt()).abs() < 1e-6);
//! ```

pub mod cases;
pub mod decomposition;
pub mod deflation;
pub mod error;
pub mod io;
pub mod linalg;
pub mod norms;
pub mod orthogonality;
pub mod scalar;
pub mod solvers;
pub mod tensor;

pub use decomposition::{Decomposition, RankOneTerm};
pub use error::{Error, Result};
pub use orthogonality::{Notion, ORTHO_TOL};
pub use scalar::{Field, Scalar};
pub use tensor::DenseTensor;
