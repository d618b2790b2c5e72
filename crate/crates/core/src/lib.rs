//! Young-type integrals `φ(f,g)` on self-similar subsets of an interval.
//!
//! An [`Ifs`] of ordered similitudes defines a self-similar set `K`. The
//! level sums `φ_n(f,g) = Σ_{|w|=n} (f(a_w) + f(b_w))(g(b_w) − g(a_w))` are
//! evaluated exactly over symbolic endpoint addresses, and [`integrate`]
//! decides whether they converge.

pub mod dsl;
pub mod error;
pub mod identities;
pub mod ifs;
pub mod integrator;
pub mod kfunc;
pub mod oracle;
pub mod scalar;
pub mod substitution;
pub mod verify;

pub use error::{Error, Result};
pub use ifs::{
    Contraction, Dimension, HolderData, Ifs, IfsSpec, Interval, LogRatio, MapSpec, PointAddress, Word,
    DEFAULT_WORD_CAP,
};
pub use integrator::{
    integrate, phi_n, psi_n, subdivision_defect, tail_bound, trace_term, vanishing_bound, ConvergenceConfig,
    IntegralResult, Status,
};
pub use kfunc::{CantorParams, DigitWeights, KFunction};
pub use scalar::{Mode, Scalar};
pub use substitution::{Permutation, SignClass, SubstitutionMap, Verdict};
