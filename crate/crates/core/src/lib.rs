//! Simultaneous Waring decompositions of polynomial vectors.
//!
//! Two pipelines share one polynomial core:
//!
//! * [`monodromy`] enumerates the decompositions of a generic polynomial vector
//!   in the perfect (square) case by tracking solutions of the decomposition
//!   system around random triangle loops in parameter space, then sorts them
//!   into real, self-conjugate and complex-paired classes.
//! * [`hessian`] certifies complex identifiability in sub-generic rank with the
//!   Hessian (contact-locus) criterion, computed exactly over a prime field.
//!
//! [`polyspace`] holds the rank-one forward map and its closed-form
//! derivatives, generic over the scalar ring in [`linalg`].

pub mod error;
pub mod hessian;
pub mod linalg;
pub mod monodromy;
pub mod polyspace;
pub mod serde_complex;
pub mod system;
pub mod tracker;

pub use error::{Error, Result};
pub use hessian::{
    certify_at_k, certify_descend, CertifierRun, CertifyOptions, CertifyVerdict, IdentCertificate,
};
pub use linalg::{ComplexRing, DenseMatrix, PrimeField, Ring};
pub use monodromy::{
    run_monodromy, MonodromyOptions, MonodromyReport, RealityTag, SolutionClass, Verdict,
};
pub use num_complex::Complex64;
pub use polyspace::{MonomialBasis, ProblemSpec, SummandParams};
pub use system::{rank_info, DecompositionPoint, RankInfo, WaringSystem};
pub use tracker::{track_segment, PathResult, PathStatus, TrackOptions};

/// Version stamped into every JSON document this crate produces.
pub const SCHEMA_VERSION: u32 = 1;
