//! Positive definite functions given on a difference set `Ω − Ω`:
//! definiteness checks, continuous extensions to the whole line, RKHS
//! diagnostics for uniqueness, spectral representations, Gaussian process
//! sampling and exponential bases on unions of intervals.
//!
//! All numerics are generic over [`Real`]; the aliases at the crate root fix
//! the scalar to `f64`, and [`quad`] fixes it to 128-bit floats.

pub mod error;
pub mod extend;
pub mod gauss;
pub mod kernel;
pub mod linalg;
pub mod measure;
pub mod operators;
pub mod quadrature;
pub mod represent;
pub mod rkhs;
pub mod scalar;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::Real;

pub type DomainSet = kernel::DomainSet<f64>;
pub type LocalKernel = kernel::LocalKernel<f64>;
pub type SampledTable = kernel::SampledTable<f64>;
pub type UniformGrid = measure::UniformGrid<f64>;
pub type Measure = measure::Measure<f64>;
pub type BumpFunction = quadrature::BumpFunction<f64>;
pub type TestFunction = quadrature::TestFunction<f64>;
pub type AnchorSet = rkhs::AnchorSet<f64>;
pub type RkhsElement = rkhs::RkhsElement<f64>;
pub type ExtensionCandidate = extend::ExtensionCandidate<f64>;
pub type GpPaths = gauss::GpPaths<f64>;
pub type ExponentialFamily = spectral::ExponentialFamily<f64>;

/// The same types over 128-bit binary floats.
#[cfg(feature = "quad")]
pub mod quad {
    pub type Scalar = f128::f128;
    pub type DomainSet = crate::kernel::DomainSet<Scalar>;
    pub type LocalKernel = crate::kernel::LocalKernel<Scalar>;
    pub type SampledTable = crate::kernel::SampledTable<Scalar>;
    pub type UniformGrid = crate::measure::UniformGrid<Scalar>;
    pub type Measure = crate::measure::Measure<Scalar>;
    pub type BumpFunction = crate::quadrature::BumpFunction<Scalar>;
    pub type TestFunction = crate::quadrature::TestFunction<Scalar>;
    pub type AnchorSet = crate::rkhs::AnchorSet<Scalar>;
    pub type RkhsElement = crate::rkhs::RkhsElement<Scalar>;
    pub type ExtensionCandidate = crate::extend::ExtensionCandidate<Scalar>;
    pub type GpPaths = crate::gauss::GpPaths<Scalar>;
    pub type ExponentialFamily = crate::spectral::ExponentialFamily<Scalar>;
}
