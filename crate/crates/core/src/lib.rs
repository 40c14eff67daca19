//! Symbolic derivation of the quantum isometry group Q(Z^n, S) of the
//! word-length spectral triple on the group algebra of Z^n.
//!
//! The pipeline: [`grpalg`] supplies the group side and the coaction on
//! generators, [`ncalg`] the free *-algebra and rewriting, [`derive`]
//! saturates the relations of the fundamental unitary, [`models`] checks
//! the result against exact block Laurent models, [`spectral`] checks the
//! truncated Dirac operator at classical points, and [`cli`] ties it into
//! reproducible reports.

pub mod cli;
pub mod derive;
pub mod grpalg;
pub mod models;
pub mod ncalg;
pub mod spectral;
