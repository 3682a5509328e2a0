//! CHSH and CGLMP Bell operators, their squares, and minimal-length (GUP)
//! deformations of the underlying spin and angular-momentum algebra.
//!
//! The numeric core is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix it to `f64`, which is what the CLI and reports use.

pub mod bounds;
pub mod cglmp;
pub mod chsh;
pub mod cli;
pub mod error;
pub mod fit;
pub mod gup;
pub mod matkernel;
pub mod observables;
pub mod optimize;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Complex = num_complex::Complex<f64>;
pub type Matrix = matkernel::ComplexMatrix<f64>;
pub type State = matkernel::StateVector<f64>;
pub type Direction = observables::Direction<f64>;
pub type QutritObservable = observables::QutritObservable<f64>;
pub type ChshSettings = chsh::ChshSettings<f64>;
pub type CglmpSettings = cglmp::CglmpSettings<f64>;
pub type GupParams = gup::GupParams<f64>;
pub type Kinematics = gup::Kinematics<f64>;

pub type Matrix32 = matkernel::ComplexMatrix<f32>;
pub type State32 = matkernel::StateVector<f32>;
