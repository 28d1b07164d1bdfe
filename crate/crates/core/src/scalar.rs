//! Scalar abstraction shared by every numerical routine in the crate.
//!
//! All algorithms are written against [`Real`], so the same code runs in
//! `f32`, `f64` and (with the `quad` feature) 128-bit binary floats. The
//! extended type matters for Gram matrices of band-limited kernels, whose
//! eigenvalues fall below binary64 resolution after a handful of modes.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real field used throughout the toolkit.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Relative eigenvalue cutoff applied when forming pseudoinverses of
    /// Gram matrices.
    fn gram_cutoff() -> Self;

    /// Converts an `f64` literal. Every `Real` can represent all finite
    /// binary64 values, possibly after rounding.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    /// Converts a count or index.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("representable count")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Relative residual above which a vector is treated as lying outside
    /// the numerical range of a Gram matrix.
    #[inline]
    fn range_tolerance() -> Self {
        Self::gram_cutoff().sqrt()
    }
}

impl Real for f32 {
    fn gram_cutoff() -> Self {
        1e-6
    }
}

impl Real for f64 {
    fn gram_cutoff() -> Self {
        1e-12
    }
}

#[cfg(feature = "quad")]
impl Real for f128::f128 {
    fn gram_cutoff() -> Self {
        Self::lit(1e-28)
    }
}

/// `e^{iθ}`.
#[inline]
pub fn cis<T: Real>(theta: T) -> Complex<T> {
    let (s, c) = theta.sin_cos();
    Complex::new(c, s)
}

#[inline]
pub(crate) fn re<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}
