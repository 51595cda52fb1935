// `!(x > 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod gridfn;
pub mod inverse_solver;
pub mod linalg;
pub mod plot;
pub mod riccati;
pub mod scalar;
pub mod sl_solver;
pub mod spectral_data;

pub use error::{Error, Result};
pub use scalar::Real;

pub type GridFunctionF64 = gridfn::GridFunction<f64>;
pub type GridFunctionF32 = gridfn::GridFunction<f32>;
pub type SurfaceProfileF64 = geometry::SurfaceProfile<f64>;
pub type SurfaceProfileF32 = geometry::SurfaceProfile<f32>;
pub type SLProblemF64 = sl_solver::SLProblem<f64>;
pub type SLProblemF32 = sl_solver::SLProblem<f32>;
pub type SpectralDataF64 = spectral_data::SpectralData<f64>;
pub type SpectralDataF32 = spectral_data::SpectralData<f32>;
pub type InverseConfigF64 = inverse_solver::InverseConfig<f64>;
