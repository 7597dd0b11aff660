#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

//! Localised ring patterns with dihedral symmetry near a Turing instability
//! of a planar two-component reaction–diffusion system.
//!
//! The numerical kernels are generic over the float type; the aliases below
//! fix them to `f64`.

pub mod continuum;
pub mod error;
pub mod galerkin;
pub mod glradial;
pub mod linalg;
pub mod matching;
pub mod ode;
pub mod profile;
pub mod rdsys;
pub mod scalar;
pub mod specfun;

pub use error::{Error, Result};
pub use scalar::{Real, Ring};

pub type System = rdsys::RDSystem<f64>;
pub type Turing = rdsys::TuringData<f64>;
pub type Coefficients = rdsys::BifCoefficients<f64>;
pub type Homoclinic = glradial::GLSolution<f64>;
pub type Profile = profile::ProfileContext<f64>;
pub type Field = profile::RingField<f64>;
pub type Grid = galerkin::GalerkinGrid<f64>;
pub type State = galerkin::GalerkinState<f64>;
pub type Continuum = continuum::ContinuumSolution<f64>;
