//! Candidate extensions of a locally defined `F` to the whole line: Bochner
//! transforms of measures, Polya tangent continuations, and the zero-padded
//! kernel `F^e` together with a search for non-positive-definite witnesses.

use std::cmp::Ordering;
use std::fmt;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{check_positive_definite, Definition, Evaluate, LocalKernel, SampledTable};
use crate::measure::{polya_density, Measure, MeasureKind, PolyaQuadrature, Truncated, UniformGrid};
use crate::scalar::{re, Real};

type GlobalFn<T> = Arc<dyn Fn(T) -> Result<Complex<T>> + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Measure,
    Polya,
    ZeroPad,
    User,
    Combination,
}

/// A function on the whole line, optionally with a measure whose transform
/// it is.
#[derive(Clone)]
pub struct ExtensionCandidate<T> {
    function: GlobalFn<T>,
    backing: Option<Measure<T>>,
    provenance: Provenance,
    truncation_budget: T,
}

impl<T: fmt::Debug> fmt::Debug for ExtensionCandidate<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExtensionCandidate")
            .field("provenance", &self.provenance)
            .field("backing", &self.backing)
            .field("truncation_budget", &self.truncation_budget)
            .finish_non_exhaustive()
    }
}

impl<T: Real> Evaluate<T> for ExtensionCandidate<T> {
    fn evaluate(&self, z: T) -> Result<Complex<T>> {
        (self.function)(z)
    }
}

impl<T: Real> ExtensionCandidate<T> {
    pub fn user(function: impl Fn(T) -> Complex<T> + Send + Sync + 'static) -> Self {
        ExtensionCandidate {
            function: Arc::new(move |t| Ok(function(t))),
            backing: None,
            provenance: Provenance::User,
            truncation_budget: T::zero(),
        }
    }

    /// Interpolated table; evaluation outside the table is an error.
    pub fn tabulated(table: SampledTable<T>) -> Self {
        ExtensionCandidate {
            function: Arc::new(move |t| table.eval(t)),
            backing: None,
            provenance: Provenance::User,
            truncation_budget: T::zero(),
        }
    }

    pub fn backing_measure(&self) -> Option<&Measure<T>> {
        self.backing.as_ref()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Transform error attributable to truncating the backing measure.
    pub fn truncation_budget(&self) -> T {
        self.truncation_budget
    }

    pub fn with_truncation_budget(mut self, budget: T) -> Self {
        self.truncation_budget = budget;
        self
    }

    pub fn value(&self, t: T) -> Result<Complex<T>> {
        (self.function)(t)
    }

    /// `max |G(t) − μ̂(t)|` over `ts`.
    pub fn backing_defect(&self, ts: &[T]) -> Result<T> {
        let mu = self.backing.as_ref().ok_or(Error::NoBackingMeasure)?;
        let transform = mu.fourier_at(ts);
        let mut worst = T::zero();
        for (&t, m) in ts.iter().zip(transform) {
            worst = worst.max((self.value(t)? - m).norm());
        }
        Ok(worst)
    }

    /// Rows `t,re,im`.
    pub fn write_csv<W: Write>(&self, ts: &[T], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "re", "im"])?;
        for &t in ts {
            let v = self.value(t)?;
            w.write_record([t.to_string(), v.re.to_string(), v.im.to_string()])?;
        }
        w.flush().map_err(|e| Error::Parse(e.to_string()))?;
        Ok(())
    }
}

/// `t ↦ μ̂(t)`.
pub fn from_measure<T: Real>(mu: Measure<T>) -> ExtensionCandidate<T> {
    let m = mu.clone();
    ExtensionCandidate {
        function: Arc::new(move |t| Ok(m.fourier_transform(t))),
        backing: Some(mu),
        provenance: Provenance::Measure,
        truncation_budget: T::zero(),
    }
}

/// [`from_measure`] with the dropped tail mass as the truncation budget.
pub fn from_truncated<T: Real>(tr: Truncated<T>) -> ExtensionCandidate<T> {
    from_measure(tr.measure).with_truncation_budget(tr.tail_mass)
}

/// `max |G(z) − F(z)|` over `samples ⊂ Ω − Ω`.
pub fn restriction_residual<T: Real, G: Evaluate<T> + ?Sized>(
    candidate: &G,
    f: &LocalKernel<T>,
    samples: &[T],
) -> Result<T> {
    let diffs: Vec<T> = samples
        .par_iter()
        .map(|&z| Ok((candidate.evaluate(z)? - f.evaluate(z)?).norm()))
        .collect::<Result<_>>()?;
    Ok(diffs.into_iter().fold(T::zero(), T::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtensionCheck<T> {
    pub residual: T,
    pub budget: T,
    pub valid: bool,
}

/// Accepts `candidate` as an extension of `F` when the restriction residual
/// is within `1e−6` plus the candidate's truncation budget.
pub fn validate_extension<T: Real>(
    candidate: &ExtensionCandidate<T>,
    f: &LocalKernel<T>,
    samples: &[T],
) -> Result<ExtensionCheck<T>> {
    let residual = restriction_residual(candidate, f, samples)?;
    let budget = T::lit(1e-6) + candidate.truncation_budget;
    Ok(ExtensionCheck {
        residual,
        budget,
        valid: residual <= budget,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct PolyaOptions<T> {
    /// Rule for the density and the panel count of its dual grid.
    pub quadrature: PolyaQuadrature<T>,
    /// Finite-difference nodes on `[0, r)` for the shape checks.
    pub validation_points: usize,
    pub shape_tolerance: T,
}

impl<T: Real> Default for PolyaOptions<T> {
    fn default() -> Self {
        PolyaOptions {
            quadrature: PolyaQuadrature::default(),
            validation_points: 2048,
            shape_tolerance: T::lit(1e-9),
        }
    }
}

/// The straight continuation of `F` at `r⁻`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tangent<T> {
    pub r: T,
    pub value: T,
    pub slope: T,
    /// Where the tangent reaches zero.
    pub zero_at: T,
}

fn half_width<T: Real>(f: &LocalKernel<T>) -> Result<T> {
    match f.domain().intervals() {
        [(a, b)] if a.is_finite() && b.is_finite() => Ok(*b - *a),
        _ => Err(Error::DomainNotInterval),
    }
}

/// Tangent line of `F` at the right end of `Ω − Ω = (−r, r)`. The slope is
/// the closed-form left derivative when known, otherwise a three-point
/// backward difference with step `1e−5·r`.
pub fn boundary_tangent<T: Real>(f: &LocalKernel<T>) -> Result<Tangent<T>> {
    let r = half_width(f)?;
    let at = |z: T| {
        f.profile(z).map(|v| v.re).ok_or_else(|| {
            Error::InvalidArgument(format!("kernel has no value at {z} to continue from"))
        })
    };
    let value = at(r)?;
    let closed = match f.definition() {
        Definition::Analytic(a) => a.left_derivative(r),
        Definition::Sampled(_) => None,
    };
    let slope = match closed {
        Some(s) => s,
        None => {
            let d = T::lit(1e-5) * r;
            let two = T::lit(2.0);
            (T::lit(3.0) * value - T::lit(4.0) * at(r - d)? + at(r - two * d)?) / (two * d)
        }
    };
    if value <= T::zero() {
        return Ok(Tangent {
            r,
            value,
            slope,
            zero_at: r,
        });
    }
    if slope >= T::zero() {
        return Err(Error::TangentHorizontal {
            slope: slope.as_f64(),
            value: value.as_f64(),
        });
    }
    Ok(Tangent {
        r,
        value,
        slope,
        zero_at: r - value / slope,
    })
}

/// Finite-difference checks that `F` is even, real, nonincreasing and convex
/// on `[0, r)`.
pub fn check_polya_shape<T: Real>(f: &LocalKernel<T>, points: usize, tol: T) -> Result<()> {
    let r = half_width(f)?;
    if points < 3 {
        return Err(Error::InvalidArgument("need at least three validation points".into()));
    }
    let h = r / T::from_count(points);
    let xs: Vec<T> = (0..points).map(|k| h * T::from_count(k)).collect();
    let mut vals = Vec::with_capacity(points);
    for &x in &xs {
        let v = f.evaluate(x)?;
        let w = f.evaluate(-x)?;
        let defect = (v - w).norm().max(v.im.abs());
        if defect > tol {
            return Err(Error::NotEvenReal {
                x: x.as_f64(),
                defect: defect.as_f64(),
            });
        }
        vals.push(v.re);
    }
    for k in 1..points {
        let diff = vals[k] - vals[k - 1];
        if diff > tol {
            return Err(Error::NotDecreasing {
                x: [xs[k - 1].as_f64(), xs[k].as_f64()],
                difference: diff.as_f64(),
            });
        }
    }
    for k in 1..points - 1 {
        let second = vals[k - 1] - T::lit(2.0) * vals[k] + vals[k + 1];
        if second < -tol {
            return Err(Error::NotConvex {
                x: [xs[k - 1].as_f64(), xs[k].as_f64(), xs[k + 1].as_f64()],
                second_difference: second.as_f64(),
            });
        }
    }
    Ok(())
}

/// `F` on `(−r, r)`, its tangent at `r⁻` down to zero, then zero; backed by
/// the Polya density computed on `[−L, L]` and sampled on the dual grid.
pub fn polya_extension<T: Real>(
    f: &LocalKernel<T>,
    cutoff: T,
    options: PolyaOptions<T>,
) -> Result<ExtensionCandidate<T>> {
    check_polya_shape(f, options.validation_points, options.shape_tolerance)?;
    let tangent = boundary_tangent(f)?;
    let slack = T::lit(1e-12) * tangent.zero_at;
    if cutoff < tangent.zero_at - slack {
        return Err(Error::CutoffTooSmall {
            cutoff: cutoff.as_f64(),
            required: tangent.zero_at.as_f64(),
        });
    }
    let kernel = f.clone();
    let g = move |t: T| -> T {
        let a = t.abs();
        if a < tangent.r {
            kernel.profile(a).map(|v| v.re).unwrap_or(T::zero())
        } else if a < tangent.zero_at {
            tangent.value + tangent.slope * (a - tangent.r)
        } else {
            T::zero()
        }
    };
    let ts = UniformGrid::fourier_dual(cutoff, options.quadrature.intervals)?;
    let density = polya_density(&g, cutoff, &ts, options.quadrature)?;
    Ok(ExtensionCandidate {
        function: Arc::new(move |t| Ok(re(g(t)))),
        backing: Some(density),
        provenance: Provenance::Polya,
        truncation_budget: T::zero(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZeroPadVerdict {
    PositiveDefinite,
    WitnessFound,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroPadDiagnosis<T> {
    pub witness_points: Vec<T>,
    pub min_eig: T,
    pub verdict: ZeroPadVerdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroPadOptions<T> {
    pub seed: u64,
    /// Progression steps `D·j/steps`, `j = 1..=steps`, with `D = diam(Ω − Ω)`.
    pub steps: usize,
    pub sizes: Vec<usize>,
    pub random_sets: usize,
    pub tolerance: T,
}

impl<T: Real> Default for ZeroPadOptions<T> {
    fn default() -> Self {
        ZeroPadOptions {
            seed: 0,
            steps: 256,
            sizes: vec![8, 16, 32, 64],
            random_sets: 64,
            tolerance: T::lit(1e-10),
        }
    }
}

fn worse<T: Real>(a: &(T, Vec<T>), b: &(T, Vec<T>)) -> Ordering {
    a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal).then_with(|| {
        a.1.iter()
            .zip(&b.1)
            .map(|(x, y)| x.partial_cmp(y).unwrap_or(Ordering::Equal))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or_else(|| a.1.len().cmp(&b.1.len()))
    })
}

/// `F^e` (zero off `Ω − Ω`) and the most negative Gram eigenvalue found over
/// arithmetic progressions and seeded random point sets.
pub fn zero_pad<T: Real>(
    f: &LocalKernel<T>,
    options: &ZeroPadOptions<T>,
) -> Result<(ExtensionCandidate<T>, ZeroPadDiagnosis<T>)> {
    let max_size = options.sizes.iter().copied().max().unwrap_or(0);
    if max_size < 2 || options.steps == 0 {
        return Err(Error::InvalidArgument(
            "witness search needs a step count and a set size of at least 2".into(),
        ));
    }
    let (lo, hi) = match f.domain().intervals() {
        [] => return Err(Error::InvalidDomain("empty domain".into())),
        iv => (iv[0].0, iv[iv.len() - 1].1),
    };
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::InvalidArgument("zero padding needs a bounded domain".into()));
    }
    let diam = T::lit(2.0) * (hi - lo);

    let mut sets: Vec<Vec<T>> = Vec::new();
    for j in 1..=options.steps {
        let step = diam * T::from_count(j) / T::from_count(options.steps);
        for &n in &options.sizes {
            sets.push((0..n).map(|k| step * T::from_count(k)).collect());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let window = diam * T::lit(2.0);
    for _ in 0..options.random_sets {
        let n = rng.random_range(2..=max_size);
        let mut pts: Vec<T> = (0..n)
            .map(|_| window * T::lit(rng.random::<f64>()))
            .collect();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
        sets.push(pts);
    }

    let padded = f.zero_padded();
    let results: Vec<(T, Vec<T>)> = sets
        .into_par_iter()
        .map(|pts| {
            let v = check_positive_definite(&padded, &pts, options.tolerance)?;
            Ok((v.value, pts))
        })
        .collect::<Result<_>>()?;
    let (min_eig, witness_points) = results
        .into_iter()
        .min_by(worse)
        .expect("at least one point set");
    let verdict = if min_eig < -options.tolerance {
        ZeroPadVerdict::WitnessFound
    } else {
        ZeroPadVerdict::PositiveDefinite
    };
    let kernel = f.clone();
    let candidate = ExtensionCandidate {
        function: Arc::new(move |t| kernel.zero_padded().evaluate(t)),
        backing: None,
        provenance: Provenance::ZeroPad,
        truncation_budget: T::zero(),
    };
    Ok((
        candidate,
        ZeroPadDiagnosis {
            witness_points,
            min_eig,
            verdict,
        },
    ))
}

#[derive(Debug, Clone)]
pub enum CombinationError<T> {
    InvalidWeight(f64),
    /// Only one input has a backing measure; the combined function is
    /// returned without one.
    MeasureShapeMismatch(ExtensionCandidate<T>),
}

impl<T> fmt::Display for CombinationError<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CombinationError::InvalidWeight(l) => write!(f, "weight {l} is outside [0, 1]"),
            CombinationError::MeasureShapeMismatch(_) => {
                write!(f, "only one candidate has a backing measure")
            }
        }
    }
}

impl<T: fmt::Debug> std::error::Error for CombinationError<T> {}

/// `λ·G₁ + (1 − λ)·G₂`, backed by `λ·μ₁ + (1 − λ)·μ₂` when both are backed.
pub fn convex_combination<T: Real>(
    c1: &ExtensionCandidate<T>,
    c2: &ExtensionCandidate<T>,
    lambda: T,
) -> std::result::Result<ExtensionCandidate<T>, CombinationError<T>> {
    if !(lambda >= T::zero() && lambda <= T::one()) {
        return Err(CombinationError::InvalidWeight(lambda.as_f64()));
    }
    if lambda == T::one() {
        return Ok(c1.clone());
    }
    if lambda == T::zero() {
        return Ok(c2.clone());
    }
    let mu = T::one() - lambda;
    let (g1, g2) = (c1.function.clone(), c2.function.clone());
    let function: GlobalFn<T> = Arc::new(move |t| Ok(g1(t)? * lambda + g2(t)? * mu));
    let budget = lambda * c1.truncation_budget + mu * c2.truncation_budget;
    match (&c1.backing, &c2.backing) {
        (Some(m1), Some(m2)) => {
            let backing = Measure::mixture(vec![(lambda, m1.clone()), (mu, m2.clone())])
                .map_err(|_| CombinationError::InvalidWeight(lambda.as_f64()))?;
            Ok(ExtensionCandidate {
                function,
                backing: Some(backing),
                provenance: Provenance::Combination,
                truncation_budget: budget,
            })
        }
        (None, None) => Ok(ExtensionCandidate {
            function,
            backing: None,
            provenance: Provenance::Combination,
            truncation_budget: budget,
        }),
        _ => Err(CombinationError::MeasureShapeMismatch(ExtensionCandidate {
            function,
            backing: None,
            provenance: Provenance::Combination,
            truncation_budget: budget,
        })),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportReport<T> {
    pub bounded: bool,
    pub radius: T,
    /// A compactly supported representing measure makes the extension unique.
    pub singleton_implied: bool,
    pub caveat: Option<String>,
}

fn has_density<T: Real>(m: &Measure<T>) -> bool {
    match m.kind() {
        MeasureKind::Discrete { .. } => false,
        MeasureKind::GriddedDensity { .. } => true,
        MeasureKind::Mixture(parts) => parts.iter().any(|(_, p)| has_density(p)),
    }
}

pub fn compact_support_flag<T: Real>(candidate: &ExtensionCandidate<T>) -> Result<SupportReport<T>> {
    let mu = candidate.backing.as_ref().ok_or(Error::NoBackingMeasure)?;
    let gridded = has_density(mu);
    Ok(SupportReport {
        bounded: true,
        radius: mu.support_radius(),
        singleton_implied: !gridded,
        caveat: gridded.then(|| {
            "support is the truncation grid of a sampled density; the exact density may not be compactly supported"
                .to_string()
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{Analytic, DomainSet};
    use crate::measure::cauchy;
    use proptest::prelude::{prop, prop_assert, proptest, ProptestConfig};

    fn kernel(profile: Analytic<f64>, a: f64, b: f64) -> LocalKernel<f64> {
        LocalKernel::analytic(DomainSet::interval(a, b).unwrap(), profile).unwrap()
    }

    fn exp_unit() -> LocalKernel<f64> {
        kernel(Analytic::Exponential { rate: 1.0 }, -0.5, 0.5)
    }

    fn f2(t: f64) -> f64 {
        Analytic::PolyaExponential { r: 1.0 }.eval(t).re
    }

    fn interior(n: usize, r: f64) -> Vec<f64> {
        (0..n).map(|k| -r + 2.0 * r * (k as f64 + 0.5) / n as f64).collect()
    }

    #[test]
    fn measure_candidates() {
        let one = from_measure(Measure::point_mass(0.0, 1.0).unwrap());
        assert_eq!(one.value(3.7).unwrap(), re(1.0));
        assert_eq!(one.provenance(), Provenance::Measure);

        let grid = UniformGrid::linspace(-1.0, 1.0, 4001).unwrap();
        let uniform = from_measure(Measure::from_density(grid, |_| 0.5).unwrap());
        for t in [0.5, 1.0, 3.0] {
            assert!((uniform.value(t).unwrap().re - f64::sin(t) / t).abs() < 1e-6);
        }

        let c = from_truncated(cauchy(2000.0, 0.1).unwrap());
        let r = restriction_residual(&c, &exp_unit(), &interior(41, 1.0)).unwrap();
        assert!(r <= 1e-3, "{r}");
        assert!(validate_extension(&c, &exp_unit(), &interior(41, 1.0)).unwrap().valid);
    }

    #[test]
    fn own_formula_has_zero_residual() {
        let f = exp_unit();
        let g = ExtensionCandidate::user(|t: f64| re((-t.abs()).exp()));
        assert_eq!(restriction_residual(&g, &f, &interior(33, 1.0)).unwrap(), 0.0);
        assert!(restriction_residual(&g, &f, &[1.5]).is_err());
    }

    #[test]
    fn polya_reproduces_the_tangent_continuation() {
        let f = exp_unit();
        let c = polya_extension(&f, 2.0, PolyaOptions::default()).unwrap();
        let worst = (0..=2000)
            .map(|k| k as f64 * 1e-3)
            .map(|t| (c.value(t).unwrap().re - f2(t)).abs())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-12, "{worst}");
        assert_eq!(restriction_residual(&c, &f, &interior(41, 1.0)).unwrap(), 0.0);
        let t = boundary_tangent(&f).unwrap();
        assert!((t.zero_at - 2.0).abs() < 1e-15);
        assert!(matches!(
            polya_extension(&f, 1.9, PolyaOptions::default()),
            Err(Error::CutoffTooSmall { .. })
        ));
        let support = compact_support_flag(&c).unwrap();
        assert!(support.bounded && support.caveat.is_some() && !support.singleton_implied);
    }

    #[test]
    fn polya_density_transform_matches_on_the_lattice() {
        let f = exp_unit();
        let c = polya_extension(&f, 2.0, PolyaOptions::default()).unwrap();
        let zs: Vec<f64> = (0..=256).map(|k| -2.0 + k as f64 / 64.0).collect();
        assert!(c.backing_defect(&zs).unwrap() <= 1e-6);
    }

    #[test]
    fn triangle_continues_as_itself() {
        let f = kernel(Analytic::Triangle { width: 1.0 }, 0.0, 1.0);
        let t = boundary_tangent(&f).unwrap();
        assert_eq!(t.zero_at, 1.0);
        let c = polya_extension(&f, 1.0, PolyaOptions::default()).unwrap();
        for x in [-1.5, -0.3, 0.0, 0.7, 1.0, 2.0] {
            assert!((c.value(x).unwrap().re - (1.0 - f64::abs(x)).max(0.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn gaussian_tangent_and_shape_rejection() {
        let f = kernel(Analytic::Gaussian { scale: 1.0 }, 0.0, 1.0);
        let t = boundary_tangent(&f).unwrap();
        let e = (-1.0f64).exp();
        assert!((t.value - e).abs() < 1e-15);
        assert!((t.slope + 2.0 * e).abs() < 1e-15);
        assert!((t.zero_at - 1.5).abs() < 1e-15);
        // concave near the origin, so Polya does not apply
        assert!(matches!(
            polya_extension(&f, 2.0, PolyaOptions::default()),
            Err(Error::NotConvex { .. })
        ));
    }

    #[test]
    fn finite_difference_tangent_for_user_profiles() {
        let user = Analytic::User(Arc::new(|z: f64| re((-z.abs()).exp())));
        let f = kernel(user, 0.0, 1.0);
        let t = boundary_tangent(&f).unwrap();
        assert!((t.slope + (-1.0f64).exp()).abs() < 1e-9);
        assert!((t.zero_at - 2.0).abs() < 1e-8);
    }

    #[test]
    fn shape_violations() {
        let rising = kernel(Analytic::Power { exponent: 1.0, offset: 1.0 }, 0.0, 1.0);
        assert!(matches!(
            polya_extension(&rising, 4.0, PolyaOptions::default()),
            Err(Error::NotDecreasing { .. })
        ));
        let flat = kernel(Analytic::Constant { value: 1.0 }, 0.0, 1.0);
        assert!(matches!(
            polya_extension(&flat, 4.0, PolyaOptions::default()),
            Err(Error::TangentHorizontal { .. })
        ));
        let odd = Analytic::User(Arc::new(|z: f64| Complex::new((-z.abs()).exp(), 0.1 * z)));
        assert!(matches!(
            polya_extension(&kernel(odd, 0.0, 1.0), 4.0, PolyaOptions::default()),
            Err(Error::NotEvenReal { .. })
        ));
        let split = exp_unit()
            .with_domain(DomainSet::new(vec![(0.0, 1.0), (2.0, 3.0)]).unwrap())
            .unwrap();
        assert_eq!(
            polya_extension(&split, 4.0, PolyaOptions::default()).unwrap_err(),
            Error::DomainNotInterval
        );
    }

    #[test]
    fn zero_pad_of_exponential_fails() {
        let (c, d) = zero_pad(&exp_unit(), &ZeroPadOptions::default()).unwrap();
        assert_eq!(c.provenance(), Provenance::ZeroPad);
        assert_eq!(c.value(1.2).unwrap(), re(0.0));
        assert_eq!(d.verdict, ZeroPadVerdict::WitnessFound);
        assert!(d.min_eig < 0.0);
        let v = check_positive_definite(&c, &d.witness_points, 0.0).unwrap();
        assert_eq!(v.value, d.min_eig);
    }

    #[test]
    fn zero_pad_of_triangle_is_positive_definite() {
        let f = kernel(Analytic::Triangle { width: 1.0 }, -0.5, 0.5);
        let (_, d) = zero_pad(&f, &ZeroPadOptions::default()).unwrap();
        assert_eq!(d.verdict, ZeroPadVerdict::PositiveDefinite);
        assert!(d.min_eig >= -1e-10);
    }

    #[test]
    fn zero_pad_of_the_split_triangle_fails() {
        let f = LocalKernel::analytic(
            DomainSet::new(vec![(-0.25, 0.25), (0.75, 1.0)]).unwrap(),
            Analytic::TruncatedTriangle { cutoff: 0.5 },
        )
        .unwrap();
        let (_, d) = zero_pad(&f, &ZeroPadOptions::default()).unwrap();
        assert_eq!(d.verdict, ZeroPadVerdict::WitnessFound);
        assert!(d.min_eig <= -1e-3);
    }

    #[test]
    fn zero_pad_is_deterministic() {
        let opts = ZeroPadOptions {
            seed: 9,
            ..ZeroPadOptions::default()
        };
        let a = zero_pad(&exp_unit(), &opts).unwrap().1;
        let b = zero_pad(&exp_unit(), &opts).unwrap().1;
        assert_eq!(a, b);
    }

    #[test]
    fn combinations() {
        let f = exp_unit();
        let c1 = from_truncated(cauchy(2000.0, 0.1).unwrap());
        let c2 = polya_extension(&f, 2.0, PolyaOptions::default()).unwrap();
        let same = convex_combination(&c1, &c2, 1.0).unwrap();
        assert_eq!(same.value(0.7).unwrap(), c1.value(0.7).unwrap());

        let samples = interior(41, 1.0);
        let half = convex_combination(&c1, &c2, 0.5).unwrap();
        let r = restriction_residual(&half, &f, &samples).unwrap();
        let r1 = restriction_residual(&c1, &f, &samples).unwrap();
        let r2 = restriction_residual(&c2, &f, &samples).unwrap();
        assert!(r <= r1.max(r2));
        assert!(half.backing_measure().is_some());

        let mix = convex_combination(&c1, &c2, 0.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..5 {
            let pts: Vec<f64> = (0..30).map(|_| rng.random_range(-6.0..6.0)).collect();
            assert!(check_positive_definite(&mix, &pts, 1e-10).unwrap().pass);
        }

        let bare = ExtensionCandidate::user(|t: f64| re((-t.abs()).exp()));
        match convex_combination(&c1, &bare, 0.5) {
            Err(CombinationError::MeasureShapeMismatch(c)) => {
                assert!(c.backing_measure().is_none());
                assert!((c.value(0.0).unwrap().re - 1.0).abs() < 1e-3);
            }
            other => panic!("expected a mismatch, got {other:?}"),
        }
        assert!(matches!(
            convex_combination(&c1, &c2, 1.5),
            Err(CombinationError::InvalidWeight(_))
        ));
    }

    #[test]
    fn support_flags() {
        let two = from_measure(Measure::discrete(vec![-1.0, 1.0], vec![0.5, 0.5]).unwrap());
        let s = compact_support_flag(&two).unwrap();
        assert!(s.bounded && s.singleton_implied && s.caveat.is_none());
        assert_eq!(s.radius, 1.0);
        let bare = ExtensionCandidate::user(|_: f64| re(1.0));
        assert_eq!(compact_support_flag(&bare).unwrap_err(), Error::NoBackingMeasure);
    }

    #[test]
    fn candidate_csv() {
        let c = from_measure(Measure::point_mass(0.0, 1.0).unwrap());
        let mut out = Vec::new();
        c.write_csv(&[0.0, 0.5], &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "t,re,im\n0,1,0\n0.5,1,0\n");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn backed_candidates_are_positive_definite(
            pts in prop::collection::vec(-8.0f64..8.0, 2..24),
            lambda in 0.0f64..1.0,
        ) {
            let f = exp_unit();
            let c = polya_extension(&f, 2.0, PolyaOptions::default()).unwrap();
            let m = from_measure(Measure::discrete(vec![-2.0, 0.5, 3.0], vec![0.2, 0.5, 0.3]).unwrap());
            prop_assert!(check_positive_definite(&c, &pts, 1e-10).unwrap().pass);
            let mix = convex_combination(&c, &m, lambda).unwrap();
            prop_assert!(check_positive_definite(&mix, &pts, 1e-10).unwrap().pass);
        }
    }
}
