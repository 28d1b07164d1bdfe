//! Smooth compactly supported test functions and the double trapezoid rule
//! for `∫∫ F(y − x) φ(x) conj ψ(y) dx dy`.

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::Evaluate;
use crate::scalar::{re, Real};

/// `φ(x) = exp(−1/(1 − u²))` with `u = (x − center)/width`, zero for `|u| ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BumpFunction<T> {
    pub center: T,
    pub width: T,
}

impl<T: Real> BumpFunction<T> {
    pub fn new(center: T, width: T) -> Result<Self> {
        if !(width > T::zero()) || !center.is_finite() || !width.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "bump needs a finite centre and positive width, got ({center}, {width})"
            )));
        }
        Ok(BumpFunction { center, width })
    }

    pub fn support(&self) -> (T, T) {
        (self.center - self.width, self.center + self.width)
    }

    pub fn value(&self, x: T) -> T {
        let u = (x - self.center) / self.width;
        let s = T::one() - u * u;
        if s <= T::zero() {
            T::zero()
        } else {
            (-s.recip()).exp()
        }
    }

    pub fn derivative(&self, x: T) -> T {
        let u = (x - self.center) / self.width;
        let s = T::one() - u * u;
        if s <= T::zero() {
            T::zero()
        } else {
            let two = T::lit(2.0);
            -(-s.recip()).exp() * two * u / (s * s * self.width)
        }
    }
}

/// Trapezoid resolution: nodes per bump support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QuadratureSpec {
    pub nodes_per_axis: usize,
}

impl QuadratureSpec {
    pub fn new(nodes_per_axis: usize) -> Result<Self> {
        if nodes_per_axis < 32 {
            return Err(Error::InvalidArgument(format!(
                "at least 32 nodes per axis are required, got {nodes_per_axis}"
            )));
        }
        Ok(QuadratureSpec { nodes_per_axis })
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { nodes_per_axis: 200 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Term<T> {
    coeff: Complex<T>,
    bump: BumpFunction<T>,
    derivative: bool,
}

/// Finite combination `Σ c_k φ_k` or `Σ c_k φ_k'` of bumps.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TestFunction<T> {
    terms: Vec<Term<T>>,
}

impl<T: Real> From<BumpFunction<T>> for TestFunction<T> {
    fn from(bump: BumpFunction<T>) -> Self {
        TestFunction {
            terms: vec![Term {
                coeff: re(T::one()),
                bump,
                derivative: false,
            }],
        }
    }
}

impl<T: Real> TestFunction<T> {
    pub fn zero() -> Self {
        TestFunction { terms: vec![] }
    }

    pub fn combination(parts: &[(Complex<T>, BumpFunction<T>)]) -> Self {
        TestFunction {
            terms: parts
                .iter()
                .map(|&(coeff, bump)| Term {
                    coeff,
                    bump,
                    derivative: false,
                })
                .collect(),
        }
    }

    pub fn scaled(&self, c: Complex<T>) -> Self {
        TestFunction {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coeff: t.coeff * c,
                    ..*t
                })
                .collect(),
        }
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        TestFunction { terms }
    }

    /// `d/dx`, available once.
    pub fn derivative(&self) -> Result<Self> {
        if self.terms.iter().any(|t| t.derivative) {
            return Err(Error::InvalidArgument(
                "only first derivatives of bumps are available".into(),
            ));
        }
        Ok(TestFunction {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    derivative: true,
                    ..*t
                })
                .collect(),
        })
    }

    /// `t ↦ conj φ(p + r − t)`.
    pub fn reflected(&self, p: T, r: T) -> Self {
        TestFunction {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coeff: if t.derivative {
                        -t.coeff.conj()
                    } else {
                        t.coeff.conj()
                    },
                    bump: BumpFunction {
                        center: p + r - t.bump.center,
                        width: t.bump.width,
                    },
                    derivative: t.derivative,
                })
                .collect(),
        }
    }

    pub fn bumps(&self) -> impl Iterator<Item = &BumpFunction<T>> {
        self.terms.iter().map(|t| &t.bump)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.coeff.re == T::zero() && t.coeff.im == T::zero())
    }

    pub fn value(&self, x: T) -> Complex<T> {
        self.terms.iter().fold(re(T::zero()), |acc, t| {
            let v = if t.derivative {
                t.bump.derivative(x)
            } else {
                t.bump.value(x)
            };
            acc + t.coeff * v
        })
    }

    /// Interior trapezoid nodes with `h·φ(x)` folded in. Support endpoints
    /// carry zero weight and are skipped.
    pub(crate) fn weighted_nodes(&self, q: QuadratureSpec) -> Vec<(T, Complex<T>)> {
        let n = q.nodes_per_axis;
        let mut out = Vec::with_capacity(self.terms.len() * n);
        for t in &self.terms {
            if t.coeff.re == T::zero() && t.coeff.im == T::zero() {
                continue;
            }
            let (lo, hi) = t.bump.support();
            let h = (hi - lo) / T::from_count(n - 1);
            for k in 1..n - 1 {
                let x = lo + h * T::from_count(k);
                let v = if t.derivative {
                    t.bump.derivative(x)
                } else {
                    t.bump.value(x)
                };
                out.push((x, t.coeff * (v * h)));
            }
        }
        out
    }
}

/// `∫ F(x − y) φ(y) dy`.
pub fn smoothed_value<T: Real, F: Evaluate<T> + ?Sized>(
    f: &F,
    phi: &TestFunction<T>,
    x: T,
    q: QuadratureSpec,
) -> Result<Complex<T>> {
    let mut acc = re(T::zero());
    for (y, w) in phi.weighted_nodes(q) {
        acc = acc + f.evaluate(x - y)? * w;
    }
    Ok(acc)
}

/// `∫∫ F(y − x) φ(x) conj ψ(y) dx dy` by the tensor trapezoid rule. Rows are
/// summed in parallel and reduced in node order.
pub fn double_integral<T: Real, F: Evaluate<T> + ?Sized>(
    f: &F,
    phi: &TestFunction<T>,
    psi: &TestFunction<T>,
    q: QuadratureSpec,
) -> Result<Complex<T>> {
    let xs = phi.weighted_nodes(q);
    let ys: Vec<(T, Complex<T>)> = psi
        .weighted_nodes(q)
        .into_iter()
        .map(|(y, w)| (y, w.conj()))
        .collect();
    let rows: Vec<Complex<T>> = xs
        .par_iter()
        .map(|&(x, a)| {
            let mut row = re(T::zero());
            for &(y, b) in &ys {
                row = row + f.evaluate(y - x)? * b;
            }
            Ok(row * a)
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().fold(re(T::zero()), |acc, z| acc + z))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_matches_finite_difference() {
        let b = BumpFunction::new(0.3, 0.2).unwrap();
        for x in [0.15f64, 0.22, 0.3, 0.41, 0.49] {
            let h = 1e-6;
            let fd = (b.value(x + h) - b.value(x - h)) / (2.0 * h);
            assert!((fd - b.derivative(x)).abs() < 1e-6, "x = {x}");
        }
        assert_eq!(b.value(0.1), 0.0);
        assert_eq!(b.derivative(0.55), 0.0);
        assert!((b.value(0.3) - (-1.0f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn derivative_integrates_to_zero() {
        let b = BumpFunction::new(0.0, 1.0).unwrap();
        let phi = TestFunction::from(b).derivative().unwrap();
        let s: Complex<f64> = phi
            .weighted_nodes(QuadratureSpec::default())
            .iter()
            .map(|&(_, w)| w)
            .sum();
        assert!(s.norm() < 1e-15);
        assert!(phi.derivative().is_err());
    }

    #[test]
    fn reflection_fixes_a_centred_bump() {
        let b = BumpFunction::new(0.5, 0.2).unwrap();
        let phi = TestFunction::from(b);
        let k = phi.reflected(0.0, 1.0);
        for x in [0.35, 0.5, 0.62] {
            assert!((k.value(x) - phi.value(x)).norm() < 1e-16);
        }
        // derivative of the reflection is minus the reflected derivative
        let d = phi.derivative().unwrap().reflected(0.0, 1.0);
        let h = 1e-6;
        let x = 0.57;
        let fd = (k.value(x + h) - k.value(x - h)) / (2.0 * h);
        assert!((fd + d.value(x)).norm() < 1e-6);
    }

    #[test]
    fn quadrature_spec_floor() {
        assert!(QuadratureSpec::new(31).is_err());
        assert_eq!(QuadratureSpec::new(32).unwrap().nodes_per_axis, 32);
    }
}
