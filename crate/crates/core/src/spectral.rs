//! Exponential families `E_λ(t) = |Ω|^{−1/2} e^{2πiλt}` on a finite union of
//! intervals: Gram matrices in closed form and Parseval defects.

use ndarray::Array2;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::DomainSet;
use crate::measure::UniformGrid;
use crate::scalar::{cis, re, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentialFamily<T> {
    omega: DomainSet<T>,
    lambdas: Vec<T>,
    measure: T,
}

impl<T: Real> ExponentialFamily<T> {
    pub fn new(omega: DomainSet<T>, lambdas: Vec<T>) -> Result<Self> {
        let measure = omega
            .intervals()
            .iter()
            .fold(T::zero(), |acc, &(a, b)| acc + (b - a));
        if !(measure > T::zero()) || !measure.is_finite() {
            return Err(Error::InvalidDomain(format!(
                "need a bounded domain of positive length, got length {measure}"
            )));
        }
        let mut sorted = lambdas.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        if sorted.windows(2).any(|w| w[0] == w[1]) || sorted.iter().any(|l| !l.is_finite()) {
            return Err(Error::InvalidArgument("frequencies must be finite and distinct".into()));
        }
        Ok(ExponentialFamily {
            omega,
            lambdas,
            measure,
        })
    }

    pub fn omega(&self) -> &DomainSet<T> {
        &self.omega
    }

    pub fn lambdas(&self) -> &[T] {
        &self.lambdas
    }

    /// `|Ω|`.
    pub fn measure(&self) -> T {
        self.measure
    }

    pub fn value(&self, k: usize, t: T) -> Complex<T> {
        cis(T::TAU() * self.lambdas[k] * t) / self.measure.sqrt()
    }
}

/// `∫_a^b e^{2πidt} dt`.
fn exp_integral<T: Real>(d: T, a: T, b: T) -> Complex<T> {
    if d == T::zero() {
        return re(b - a);
    }
    let w = T::TAU() * d;
    (cis(w * b) - cis(w * a)) / Complex::new(T::zero(), w)
}

/// `G[j][k] = ⟨E_{λ_k}, E_{λ_j}⟩ = |Ω|^{−1} Σ_i ∫ e^{2πi(λ_j − λ_k)t} dt`,
/// assembled from the lower triangle with unit diagonal.
pub fn exponential_gram<T: Real>(fam: &ExponentialFamily<T>) -> Array2<Complex<T>> {
    let n = fam.lambdas.len();
    let mut g = Array2::from_elem((n, n), re(T::zero()));
    for j in 0..n {
        for k in 0..j {
            let d = fam.lambdas[j] - fam.lambdas[k];
            let v = fam
                .omega
                .intervals()
                .iter()
                .fold(re(T::zero()), |acc, &(a, b)| acc + exp_integral(d, a, b))
                / fam.measure;
            g[[j, k]] = v;
            g[[k, j]] = v.conj();
        }
        g[[j, j]] = re(T::one());
    }
    g
}

pub fn max_offdiag<T: Real>(g: &Array2<Complex<T>>) -> T {
    let mut m = T::zero();
    for ((j, k), v) in g.indexed_iter() {
        if j != k {
            m = m.max(v.norm());
        }
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LambdaPattern {
    /// `{0, ¼} + ℤ`
    Quarter,
    /// `½ℤ`
    Half,
    /// `ℤ`
    Integer,
}

impl std::str::FromStr for LambdaPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quarter" => Ok(LambdaPattern::Quarter),
            "half" => Ok(LambdaPattern::Half),
            "integer" => Ok(LambdaPattern::Integer),
            other => Err(Error::Parse(format!("unknown frequency pattern {other:?}"))),
        }
    }
}

/// Frequencies of `pattern` in `[−range, range]`, ascending.
pub fn lambda_set<T: Real>(pattern: LambdaPattern, range: T) -> Vec<T> {
    let (offsets, period): (&[f64], f64) = match pattern {
        LambdaPattern::Quarter => (&[0.0, 0.25], 1.0),
        LambdaPattern::Half => (&[0.0], 0.5),
        LambdaPattern::Integer => (&[0.0], 1.0),
    };
    let p = T::lit(period);
    let top = (range / p).floor().to_i64().unwrap_or(0) + 1;
    let mut out = Vec::new();
    for n in -top..=top {
        for &o in offsets {
            let l = T::lit(n as f64) * p + T::lit(o);
            if l.abs() <= range {
                out.push(l);
            }
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    out
}

/// Complex samples on a uniform grid over each interval of `Ω`, read as the
/// piecewise linear interpolant.
#[derive(Debug, Clone, PartialEq)]
pub struct GriddedFunction<T> {
    pieces: Vec<(UniformGrid<T>, Vec<Complex<T>>)>,
}

impl<T: Real> GriddedFunction<T> {
    pub fn new(pieces: Vec<(UniformGrid<T>, Vec<Complex<T>>)>) -> Result<Self> {
        for (g, v) in &pieces {
            if g.count() != v.len() {
                return Err(Error::InvalidGrid(format!(
                    "{} samples on a grid of {} points",
                    v.len(),
                    g.count()
                )));
            }
        }
        Ok(GriddedFunction { pieces })
    }

    /// Samples `f` with `panels` panels on every interval of `omega`.
    pub fn sample(omega: &DomainSet<T>, panels: usize, f: impl Fn(T) -> Complex<T>) -> Result<Self> {
        let pieces = omega
            .intervals()
            .iter()
            .map(|&(a, b)| {
                let g = UniformGrid::linspace(a, b, panels + 1)?;
                let v = g.points().into_iter().map(&f).collect();
                Ok((g, v))
            })
            .collect::<Result<_>>()?;
        Ok(GriddedFunction { pieces })
    }

    /// `∫ |f|²`, exact for the interpolant.
    pub fn norm_sq(&self) -> T {
        let third = T::one() / T::lit(3.0);
        let mut acc = T::zero();
        for (g, v) in &self.pieces {
            let h = g.step();
            for w in v.windows(2) {
                let (a, b) = (w[0], w[1]);
                acc += h * third * (a.norm_sqr() + (a * b.conj()).re + b.norm_sqr());
            }
        }
        acc
    }

    /// `∫ f(t) e^{−iωt} dt`, exact for the interpolant.
    pub fn fourier_coefficient(&self, omega: T) -> Complex<T> {
        let mut acc = re(T::zero());
        for (g, v) in &self.pieces {
            let h = g.step();
            let (i0, i1) = panel_moments(omega, h);
            for (k, w) in v.windows(2).enumerate() {
                let t0 = g.point(k);
                let (a, b) = (w[0], w[1]);
                let slope = (b - a) / h;
                acc = acc + cis(-omega * t0) * (a * i0 + slope * i1);
            }
        }
        acc
    }
}

/// `(∫_0^h e^{−iωu} du, ∫_0^h u e^{−iωu} du)`.
fn panel_moments<T: Real>(omega: T, h: T) -> (Complex<T>, Complex<T>) {
    if (omega * h).abs() < T::one() {
        moments_series(omega, h)
    } else {
        moments_closed(omega, h)
    }
}

/// `Σ_k (−iωh)^k / k! · h^{n+1}/(n+k+1)` for `n = 0, 1`.
fn moments_series<T: Real>(omega: T, h: T) -> (Complex<T>, Complex<T>) {
    let mut i0 = re(T::zero());
    let mut i1 = re(T::zero());
    let mut term = re(T::one());
    let minus_ix = Complex::new(T::zero(), -omega * h);
    for k in 0..40 {
        let kk = T::from_count(k);
        i0 = i0 + term / (kk + T::one());
        i1 = i1 + term / (kk + T::lit(2.0));
        term = term * minus_ix / (kk + T::one());
    }
    (i0 * h, i1 * h * h)
}

fn moments_closed<T: Real>(omega: T, h: T) -> (Complex<T>, Complex<T>) {
    let iw = Complex::new(T::zero(), omega);
    let e = cis(-omega * h);
    let i0 = (re(T::one()) - e) / iw;
    let i1 = (i0 - e * h) / iw;
    (i0, i1)
}

/// `‖f‖² − Σ_λ |⟨f, E_λ⟩|²` over the family's frequencies.
pub fn parseval_defect<T: Real>(fam: &ExponentialFamily<T>, f: &GriddedFunction<T>) -> T {
    let scale = fam.measure.sqrt();
    let captured = fam.lambdas.iter().fold(T::zero(), |acc, &l| {
        acc + (f.fourier_coefficient(T::TAU() * l) / scale).norm_sqr()
    });
    f.norm_sq() - captured
}
