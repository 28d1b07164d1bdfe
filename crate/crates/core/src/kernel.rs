//! Locally defined kernels `F: Ω − Ω → ℂ` and definiteness checks.

use std::fmt;
use std::io::Read;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, symmetric_eigenvalues};
use crate::measure::{parse_rows, uniform_grid_from_samples, UniformGrid};
use crate::quadrature::{double_integral, QuadratureSpec, TestFunction};
use crate::scalar::{re, Real};

/// Finite union of disjoint open intervals. Bounds may be infinite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainSet<T> {
    intervals: Vec<(T, T)>,
}

impl<T: Real> DomainSet<T> {
    pub fn new(mut intervals: Vec<(T, T)>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::InvalidDomain("at least one interval is required".into()));
        }
        for &(a, b) in &intervals {
            if !(a < b) {
                return Err(Error::InvalidDomain(format!("({a}, {b}) is empty")));
            }
        }
        intervals.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("ordered bounds"));
        for w in intervals.windows(2) {
            if w[0].1 > w[1].0 {
                return Err(Error::InvalidDomain(format!(
                    "({}, {}) and ({}, {}) overlap",
                    w[0].0, w[0].1, w[1].0, w[1].1
                )));
            }
        }
        Ok(DomainSet { intervals })
    }

    pub fn interval(a: T, b: T) -> Result<Self> {
        Self::new(vec![(a, b)])
    }

    pub fn real_line() -> Self {
        DomainSet {
            intervals: vec![(T::neg_infinity(), T::infinity())],
        }
    }

    pub fn intervals(&self) -> &[(T, T)] {
        &self.intervals
    }

    pub fn connected(&self) -> bool {
        self.intervals.len() == 1
    }

    pub fn contains(&self, x: T) -> bool {
        self.intervals.iter().any(|&(a, b)| a < x && x < b)
    }

    /// `z ∈ ⋃_{i,j} (a_i − b_j, b_i − a_j)`.
    pub fn difference_contains(&self, z: T) -> bool {
        self.intervals.iter().any(|&(ai, bi)| {
            self.intervals
                .iter()
                .any(|&(aj, bj)| ai - bj < z && z < bi - aj)
        })
    }

    /// `sup (Ω − Ω)`.
    pub fn diameter(&self) -> T {
        let lo = self.intervals[0].0;
        let hi = self.intervals[self.intervals.len() - 1].1;
        hi - lo
    }

    /// `m` equispaced points inside each component, kept `margin·length`
    /// away from its ends.
    pub fn interior_grid(&self, m: usize, margin: T) -> Result<Vec<T>> {
        let mut out = Vec::new();
        for &(a, b) in &self.intervals {
            if !(a.is_finite() && b.is_finite()) {
                return Err(Error::InvalidDomain(
                    "interior grids need bounded intervals".into(),
                ));
            }
            let pad = margin * (b - a);
            let (lo, hi) = (a + pad, b - pad);
            if m == 1 {
                out.push((lo + hi) / T::lit(2.0));
            } else {
                let h = (hi - lo) / T::from_count(m - 1);
                out.extend((0..m).map(|k| lo + h * T::from_count(k)));
            }
        }
        Ok(out)
    }
}

/// Anything that can be evaluated as a kernel profile at a difference `z`.
pub trait Evaluate<T>: Sync {
    fn evaluate(&self, z: T) -> Result<Complex<T>>;
}

impl<T, F> Evaluate<T> for F
where
    F: Fn(T) -> Complex<T> + Sync,
{
    fn evaluate(&self, z: T) -> Result<Complex<T>> {
        Ok(self(z))
    }
}

/// User-supplied profile.
pub type UserFn<T> = Arc<dyn Fn(T) -> Complex<T> + Send + Sync>;

/// Closed-form profiles. All are even and real except [`Analytic::User`].
#[derive(Clone)]
pub enum Analytic<T> {
    /// `e^{−rate·|x|}`
    Exponential { rate: T },
    /// `max(0, 1 − |x|/width)`
    Triangle { width: T },
    /// `e^{−(x/scale)²}`
    Gaussian { scale: T },
    /// `sin(x)/x`
    Sinc,
    /// `value`
    Constant { value: T },
    /// `|x|^exponent + offset`; conditionally negative definite for
    /// `0 < exponent ≤ 2`.
    Power { exponent: T, offset: T },
    /// `1 − |x|` for `|x| < cutoff`, zero beyond.
    TruncatedTriangle { cutoff: T },
    /// `e^{−|x|}` on `|x| ≤ r`, then the tangent line `e^{−r}(1 + r − |x|)`
    /// down to zero at `r + 1`.
    PolyaExponential { r: T },
    User(UserFn<T>),
}

impl<T: fmt::Debug> fmt::Debug for Analytic<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Analytic::Exponential { rate } => write!(f, "Exponential {{ rate: {rate:?} }}"),
            Analytic::Triangle { width } => write!(f, "Triangle {{ width: {width:?} }}"),
            Analytic::Gaussian { scale } => write!(f, "Gaussian {{ scale: {scale:?} }}"),
            Analytic::Sinc => write!(f, "Sinc"),
            Analytic::Constant { value } => write!(f, "Constant {{ value: {value:?} }}"),
            Analytic::Power { exponent, offset } => {
                write!(f, "Power {{ exponent: {exponent:?}, offset: {offset:?} }}")
            }
            Analytic::TruncatedTriangle { cutoff } => {
                write!(f, "TruncatedTriangle {{ cutoff: {cutoff:?} }}")
            }
            Analytic::PolyaExponential { r } => write!(f, "PolyaExponential {{ r: {r:?} }}"),
            Analytic::User(_) => write!(f, "User(..)"),
        }
    }
}

impl<T: Real> Analytic<T> {
    pub fn eval(&self, z: T) -> Complex<T> {
        let a = z.abs();
        let one = T::one();
        let v = match self {
            Analytic::Exponential { rate } => (-*rate * a).exp(),
            Analytic::Triangle { width } => (one - a / *width).max(T::zero()),
            Analytic::Gaussian { scale } => {
                let u = z / *scale;
                (-u * u).exp()
            }
            Analytic::Sinc => {
                if a == T::zero() {
                    one
                } else {
                    z.sin() / z
                }
            }
            Analytic::Constant { value } => *value,
            Analytic::Power { exponent, offset } => a.powf(*exponent) + *offset,
            Analytic::TruncatedTriangle { cutoff } => {
                if a < *cutoff {
                    one - a
                } else {
                    T::zero()
                }
            }
            Analytic::PolyaExponential { r } => {
                if a <= *r {
                    (-a).exp()
                } else if a <= *r + one {
                    (-*r).exp() * (one + *r - a)
                } else {
                    T::zero()
                }
            }
            Analytic::User(f) => return f(z),
        };
        re(v)
    }

    /// One-sided derivative from the left at `x > 0`, where known in closed
    /// form.
    pub fn left_derivative(&self, x: T) -> Option<T> {
        let one = T::one();
        Some(match self {
            Analytic::Exponential { rate } => -*rate * (-*rate * x).exp(),
            Analytic::Triangle { width } => {
                if x <= *width {
                    -width.recip()
                } else {
                    T::zero()
                }
            }
            Analytic::Gaussian { scale } => {
                let u = x / *scale;
                -T::lit(2.0) * u / *scale * (-u * u).exp()
            }
            Analytic::Sinc => (x * x.cos() - x.sin()) / (x * x),
            Analytic::Constant { .. } => T::zero(),
            Analytic::Power { exponent, .. } => *exponent * x.powf(*exponent - one),
            Analytic::TruncatedTriangle { cutoff } => {
                if x <= *cutoff {
                    -one
                } else {
                    T::zero()
                }
            }
            Analytic::PolyaExponential { r } => {
                if x <= *r {
                    -(-x).exp()
                } else if x <= *r + one {
                    -(-*r).exp()
                } else {
                    T::zero()
                }
            }
            Analytic::User(_) => return None,
        })
    }
}

/// Complex samples on a uniform grid, linearly interpolated, never
/// extrapolated.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledTable<T> {
    grid: UniformGrid<T>,
    values: Vec<Complex<T>>,
}

/// Result of loading a sample table.
#[derive(Debug, Clone)]
pub struct LoadedTable<T> {
    pub table: SampledTable<T>,
    /// `max_z |F(−z) − conj F(z)|` before symmetrisation.
    pub symmetry_defect: T,
}

impl<T: Real> SampledTable<T> {
    /// Values are used as given; see [`SampledTable::from_rows`] for the
    /// symmetrising loader.
    pub fn new(grid: UniformGrid<T>, values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() != grid.count() {
            return Err(Error::InvalidGrid(format!(
                "grid has {} points but {} values",
                grid.count(),
                values.len()
            )));
        }
        Ok(SampledTable { grid, values })
    }

    pub fn grid(&self) -> &UniformGrid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    /// Builds a table from `(z, re, im)` rows in any order. The abscissae
    /// must be uniform and either symmetric about zero or start at zero (the
    /// negative half is then mirrored). The table is replaced by its
    /// Hermitian part `(F(z) + conj F(−z))/2`; a larger defect than
    /// `tolerance` is an error.
    pub fn from_rows(mut rows: Vec<[f64; 3]>, tolerance: T) -> Result<LoadedTable<T>> {
        rows.sort_by(|a, b| a[0].total_cmp(&b[0]));
        if rows.first().map(|r| r[0]) == Some(0.0) && rows.len() >= 2 {
            let mirrored: Vec<[f64; 3]> = rows[1..].iter().rev().map(|r| [-r[0], r[1], -r[2]]).collect();
            rows = mirrored.into_iter().chain(rows).collect();
        }
        let zs: Vec<f64> = rows.iter().map(|r| r[0]).collect();
        let grid = uniform_grid_from_samples::<T>(&zs)?;
        let n = rows.len();
        if (zs[0] + zs[n - 1]).abs() > 1e-9 * grid.step().as_f64().max(1.0) {
            return Err(Error::InvalidGrid(
                "sample abscissae must be symmetric about zero".into(),
            ));
        }
        let raw: Vec<Complex<T>> = rows
            .iter()
            .map(|r| Complex::new(T::lit(r[1]), T::lit(r[2])))
            .collect();
        let mut defect = T::zero();
        let half = T::lit(0.5);
        let values: Vec<Complex<T>> = (0..n)
            .map(|k| {
                let mirror = raw[n - 1 - k].conj();
                defect = defect.max((raw[k] - mirror).norm());
                (raw[k] + mirror) * half
            })
            .collect();
        if defect > tolerance {
            return Err(Error::AsymmetricData {
                defect: defect.as_f64(),
                tolerance: tolerance.as_f64(),
            });
        }
        // symmetric grids are centred exactly on zero
        let grid = UniformGrid::new(-grid.step() * T::from_count((n - 1) / 2), grid.step(), n)?;
        Ok(LoadedTable {
            table: SampledTable { grid, values },
            symmetry_defect: defect,
        })
    }

    /// Reads `z,re,im` rows.
    pub fn read_csv<R: Read>(input: R, tolerance: T) -> Result<LoadedTable<T>> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let rows = parse_rows(&mut r, 3)?;
        Self::from_rows(rows.into_iter().map(|r| [r[0], r[1], r[2]]).collect(), tolerance)
    }

    pub fn eval(&self, z: T) -> Result<Complex<T>> {
        let g = &self.grid;
        let pos = (z - g.start()) / g.step();
        let last = T::from_count(g.count() - 1);
        let slack = T::epsilon() * T::lit(16.0) * (T::one() + last);
        if !(pos >= -slack && pos <= last + slack) {
            return Err(Error::OutOfDomain(z.as_f64()));
        }
        let pos = pos.max(T::zero()).min(last);
        let k = pos.floor().to_usize().unwrap_or(0).min(g.count() - 2);
        let frac = pos - T::from_count(k);
        Ok(self.values[k] * (T::one() - frac) + self.values[k + 1] * frac)
    }
}

#[derive(Debug, Clone)]
pub enum Definition<T> {
    Analytic(Analytic<T>),
    Sampled(SampledTable<T>),
}

/// `F` on `Ω − Ω`.
#[derive(Debug, Clone)]
pub struct LocalKernel<T> {
    domain: DomainSet<T>,
    definition: Definition<T>,
}

impl<T: Real> LocalKernel<T> {
    pub fn new(domain: DomainSet<T>, definition: Definition<T>) -> Result<Self> {
        let k = LocalKernel { domain, definition };
        let f0 = k.evaluate(T::zero())?;
        let tol = T::lit(1e-12) * (T::one() + f0.re.abs());
        if f0.im.abs() > tol || f0.re < -tol || f0.re.is_nan() {
            return Err(Error::InvalidArgument(format!(
                "F(0) must be real and nonnegative, got {} + {}i",
                f0.re, f0.im
            )));
        }
        Ok(k)
    }

    pub fn analytic(domain: DomainSet<T>, profile: Analytic<T>) -> Result<Self> {
        Self::new(domain, Definition::Analytic(profile))
    }

    pub fn sampled(domain: DomainSet<T>, table: SampledTable<T>) -> Result<Self> {
        Self::new(domain, Definition::Sampled(table))
    }

    pub fn domain(&self) -> &DomainSet<T> {
        &self.domain
    }

    pub fn definition(&self) -> &Definition<T> {
        &self.definition
    }

    pub fn at_zero(&self) -> T {
        self.evaluate(T::zero()).map(|z| z.re).unwrap_or(T::zero())
    }

    /// Profile value without the domain check; `None` off a sample table.
    pub fn profile(&self, z: T) -> Option<Complex<T>> {
        match &self.definition {
            Definition::Analytic(a) => Some(a.eval(z)),
            Definition::Sampled(s) => s.eval(z).ok(),
        }
    }

    /// Same kernel restricted or enlarged to another domain.
    pub fn with_domain(&self, domain: DomainSet<T>) -> Result<Self> {
        Self::new(domain, self.definition.clone())
    }

    /// `F^e`: `F` on `Ω − Ω`, zero elsewhere.
    pub fn zero_padded(&self) -> ZeroPadded<'_, T> {
        ZeroPadded(self)
    }

    pub fn default_tolerance(&self) -> T {
        T::lit(1e-10) * T::one().max(self.at_zero())
    }
}

impl<T: Real> Evaluate<T> for LocalKernel<T> {
    fn evaluate(&self, z: T) -> Result<Complex<T>> {
        if !self.domain.difference_contains(z) {
            return Err(Error::OutOfDomain(z.as_f64()));
        }
        match &self.definition {
            Definition::Analytic(a) => Ok(a.eval(z)),
            Definition::Sampled(s) => s.eval(z),
        }
    }
}

/// See [`LocalKernel::zero_padded`].
#[derive(Debug, Clone, Copy)]
pub struct ZeroPadded<'a, T>(&'a LocalKernel<T>);

impl<T: Real> Evaluate<T> for ZeroPadded<'_, T> {
    fn evaluate(&self, z: T) -> Result<Complex<T>> {
        if self.0.domain.difference_contains(z) {
            self.0.evaluate(z)
        } else {
            Ok(re(T::zero()))
        }
    }
}

/// Outcome of a sign test on a spectrum: `pass` iff `value` is on the right
/// side of `tolerance`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Verdict<T> {
    pub value: T,
    pub tolerance: T,
    pub pass: bool,
}

/// `K[j][k] = F(x_j − x_k)`, assembled from the lower triangle so that the
/// result is exactly Hermitian.
pub fn gram_matrix<T: Real, F: Evaluate<T> + ?Sized>(f: &F, points: &[T]) -> Result<Array2<Complex<T>>> {
    let m = points.len();
    let mut k = Array2::from_elem((m, m), re(T::zero()));
    for j in 0..m {
        for l in 0..j {
            let v = f.evaluate(points[j] - points[l])?;
            k[[j, l]] = v;
            k[[l, j]] = v.conj();
        }
        k[[j, j]] = re(f.evaluate(T::zero())?.re);
    }
    Ok(k)
}

/// Pass iff the smallest Gram eigenvalue is at least `−tol`.
pub fn check_positive_definite<T: Real, F: Evaluate<T> + ?Sized>(
    f: &F,
    points: &[T],
    tol: T,
) -> Result<Verdict<T>> {
    let k = gram_matrix(f, points)?;
    let lmin = hermitian_eigenvalues(&k).first().copied().unwrap_or(T::zero());
    Ok(Verdict {
        value: lmin,
        tolerance: tol,
        pass: lmin >= -tol,
    })
}

/// `∫∫ F(y − x) φ(x) conj φ(y) dx dy` for every supplied test function.
#[derive(Debug, Clone, Serialize)]
pub struct IntegralVerdict<T> {
    pub values: Vec<T>,
    pub verdict: Verdict<T>,
}

pub fn check_pd_integral<T: Real, F: Evaluate<T> + ?Sized>(
    f: &F,
    tests: &[TestFunction<T>],
    q: QuadratureSpec,
    tol: T,
) -> Result<IntegralVerdict<T>> {
    let values = tests
        .iter()
        .map(|phi| double_integral(f, phi, phi, q).map(|z| z.re))
        .collect::<Result<Vec<T>>>()?;
    let min = values.iter().copied().fold(T::zero(), T::min);
    Ok(IntegralVerdict {
        verdict: Verdict {
            value: min,
            tolerance: tol,
            pass: min >= -tol,
        },
        values,
    })
}

/// Conditional negativity: the largest eigenvalue of `P M P` with
/// `M[j][k] = G(x_j − x_k)` and `P` the projection onto zero-sum vectors,
/// together with `G(0)`, which must vanish for an increment variogram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CndVerdict<T> {
    pub max_projected_eigenvalue: T,
    pub value_at_zero: T,
    pub tolerance: T,
    pub pass: bool,
}

pub fn check_conditionally_negative<T: Real, F: Evaluate<T> + ?Sized>(
    g: &F,
    points: &[T],
    tol: T,
) -> Result<CndVerdict<T>> {
    let m = points.len();
    let g0 = g.evaluate(T::zero())?;
    let mut mat = Array2::zeros((m, m));
    for j in 0..m {
        for l in 0..=j {
            let v = g.evaluate(points[j] - points[l])?;
            if v.im.abs() > tol {
                return Err(Error::InvalidArgument(format!(
                    "G must be real; imaginary part {} at {}",
                    v.im,
                    points[j] - points[l]
                )));
            }
            mat[[j, l]] = v.re;
            mat[[l, j]] = v.re;
        }
    }
    let lmax = if m == 0 {
        T::zero()
    } else {
        // P M P with P = I − 11ᵀ/m
        let mf = T::from_count(m);
        let row: Vec<T> = (0..m).map(|j| mat.row(j).sum() / mf).collect();
        let total = row.iter().copied().fold(T::zero(), |a, b| a + b) / mf;
        let mut proj = Array2::zeros((m, m));
        for j in 0..m {
            for l in 0..m {
                proj[[j, l]] = mat[[j, l]] - row[j] - row[l] + total;
            }
        }
        symmetric_eigenvalues(&proj).last().copied().unwrap_or(T::zero())
    };
    let pass = lmax <= tol && g0.norm() <= tol;
    Ok(CndVerdict {
        max_projected_eigenvalue: lmax,
        value_at_zero: g0.re,
        tolerance: tol,
        pass,
    })
}

/// Pass iff the matrix `F(x_i + x_j)` on points of `[0, ∞)` has smallest
/// eigenvalue at least `−tol`.
pub fn check_reflection_positive<T: Real, F: Evaluate<T> + ?Sized>(
    f: &F,
    points: &[T],
    tol: T,
) -> Result<Verdict<T>> {
    if let Some(x) = points.iter().find(|x| !(**x >= T::zero())) {
        return Err(Error::InvalidArgument(format!(
            "reflection positivity uses points in [0, ∞), got {x}"
        )));
    }
    let m = points.len();
    let mut mat = Array2::zeros((m, m));
    for j in 0..m {
        for l in 0..=j {
            let v = f.evaluate(points[j] + points[l])?;
            if v.im.abs() > tol {
                return Err(Error::InvalidArgument(
                    "reflection positivity is defined for real kernels".into(),
                ));
            }
            mat[[j, l]] = v.re;
            mat[[l, j]] = v.re;
        }
    }
    let lmin = symmetric_eigenvalues(&mat).first().copied().unwrap_or(T::zero());
    Ok(Verdict {
        value: lmin,
        tolerance: tol,
        pass: lmin >= -tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetryReport<T> {
    /// `max |F(−z) − conj F(z)|`.
    pub max_defect: T,
    /// `max (|F(z)| − F(0))`, clipped at zero.
    pub max_excess: T,
    /// Set when some `|F(z)|` exceeds `F(0) + tol`.
    pub bound_violated: bool,
}

pub fn hermitian_symmetry_check<T: Real, F: Evaluate<T> + ?Sized>(
    f: &F,
    samples: &[T],
    tol: T,
) -> Result<SymmetryReport<T>> {
    let f0 = f.evaluate(T::zero())?.re;
    let mut defect = T::zero();
    let mut excess = T::zero();
    for &z in samples {
        let plus = f.evaluate(z)?;
        let minus = f.evaluate(-z)?;
        defect = defect.max((minus - plus.conj()).norm());
        excess = excess.max(plus.norm().max(minus.norm()) - f0);
    }
    Ok(SymmetryReport {
        max_defect: defect,
        max_excess: excess,
        bound_violated: excess > tol,
    })
}
