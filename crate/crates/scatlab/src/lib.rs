//! 2D acoustic obstacle scattering laboratory.
//!
//! Forward exterior Helmholtz scattering by the method of fundamental
//! solutions, an analytic circular-cylinder series oracle, far-field
//! pattern containers with translation/rotation transform identities,
//! dictionary-based shape identification from a single far-field
//! measurement, and seeded Monte Carlo distinguishability experiments.
//!
//! Modules mirror the pipeline:
//! - [`specfun`]: real-argument cylinder functions (J, Y, H1) and their zeros
//! - [`geometry`]: parametric boundary curves, rigid motions, set distances
//! - [`scatter`]: the forward solver and the disk series oracle
//! - [`farfield`]: patterns, the L2(S1) metric, translation/rotation transforms
//! - [`identify`]: dictionary matching and pose recovery
//! - [`mc`]: Monte Carlo experiment harness

pub mod farfield;
pub mod geometry;
pub mod identify;
pub(crate) mod linalg;
pub mod mc;
pub(crate) mod optim;
pub mod scatter;
pub mod specfun;
