//! Finite positive Borel measures on the line and their Fourier transforms.
//!
//! Every measure is held as quadrature atoms: a discrete measure is its own
//! atom list, a gridded density carries trapezoid weights. The transform is
//! `μ̂(t) = ∫ e^{itx} dμ(x)`, evaluated as a finite sum over the atoms.

use std::io::{Read, Write};

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{cis, Real};

/// `start, start + step, …, start + (count − 1)·step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UniformGrid<T> {
    start: T,
    step: T,
    count: usize,
}

impl<T: Real> UniformGrid<T> {
    pub fn new(start: T, step: T, count: usize) -> Result<Self> {
        if !(step > T::zero()) || !step.is_finite() {
            return Err(Error::InvalidGrid(format!("step must be positive, got {step}")));
        }
        if !start.is_finite() {
            return Err(Error::InvalidGrid("start must be finite".into()));
        }
        if count < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 points, got {count}")));
        }
        Ok(UniformGrid { start, step, count })
    }

    /// `count` points spanning `[lo, hi]` inclusive.
    pub fn linspace(lo: T, hi: T, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 points, got {count}")));
        }
        Self::new(lo, (hi - lo) / T::from_count(count - 1), count)
    }

    /// Frequency grid paired with a trapezoid rule of `intervals` panels on
    /// `[−radius, radius]`: spacing `π/radius`, symmetric about zero, with one
    /// node per panel boundary. Transforming back on this grid reproduces
    /// the original samples at the spatial nodes.
    pub fn fourier_dual(radius: T, intervals: usize) -> Result<Self> {
        if !(radius > T::zero()) || intervals < 2 || !intervals.is_multiple_of(2) {
            return Err(Error::InvalidGrid(
                "dual grid needs a positive radius and an even panel count".into(),
            ));
        }
        let step = T::PI() / radius;
        let half = T::from_count(intervals / 2);
        Self::new(-half * step, step, intervals + 1)
    }

    pub fn start(&self) -> T {
        self.start
    }

    pub fn step(&self) -> T {
        self.step
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn end(&self) -> T {
        self.point(self.count - 1)
    }

    pub fn point(&self, k: usize) -> T {
        self.start + self.step * T::from_count(k)
    }

    pub fn points(&self) -> Vec<T> {
        (0..self.count).map(|k| self.point(k)).collect()
    }

    /// Composite trapezoid weights.
    pub fn trapezoid_weights(&self) -> Vec<T> {
        let half = self.step / T::lit(2.0);
        (0..self.count)
            .map(|k| {
                if k == 0 || k + 1 == self.count {
                    half
                } else {
                    self.step
                }
            })
            .collect()
    }
}

/// How a measure was specified.
#[derive(Debug, Clone, PartialEq)]
pub enum MeasureKind<T> {
    Discrete { positions: Vec<T>, weights: Vec<T> },
    GriddedDensity { grid: UniformGrid<T>, values: Vec<T> },
    /// Nonnegative combination `Σ c_i μ_i`.
    Mixture(Vec<(T, Measure<T>)>),
}

/// A finite positive measure on ℝ.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure<T> {
    kind: MeasureKind<T>,
    nodes: Vec<T>,
    weights: Vec<T>,
}

fn check_nonnegative<T: Real>(what: &str, xs: &[T]) -> Result<()> {
    for (k, &w) in xs.iter().enumerate() {
        if !(w >= T::zero()) || !w.is_finite() {
            return Err(Error::InvalidMeasure(format!(
                "{what}[{k}] = {w} is not a finite nonnegative number"
            )));
        }
    }
    Ok(())
}

impl<T: Real> Measure<T> {
    pub fn discrete(positions: Vec<T>, weights: Vec<T>) -> Result<Self> {
        if positions.is_empty() || positions.len() != weights.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} positions and {} weights",
                positions.len(),
                weights.len()
            )));
        }
        if positions.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidMeasure("positions must be finite".into()));
        }
        check_nonnegative("weight", &weights)?;
        let mut sorted = positions.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidMeasure("positions must be distinct".into()));
        }
        Ok(Measure {
            nodes: positions.clone(),
            weights: weights.clone(),
            kind: MeasureKind::Discrete { positions, weights },
        })
    }

    pub fn point_mass(at: T, weight: T) -> Result<Self> {
        Self::discrete(vec![at], vec![weight])
    }

    pub fn gridded(grid: UniformGrid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.count() {
            return Err(Error::InvalidMeasure(format!(
                "grid has {} points but {} density values",
                grid.count(),
                values.len()
            )));
        }
        check_nonnegative("density", &values)?;
        let weights = grid
            .trapezoid_weights()
            .into_iter()
            .zip(&values)
            .map(|(w, &v)| w * v)
            .collect();
        Ok(Measure {
            nodes: grid.points(),
            weights,
            kind: MeasureKind::GriddedDensity { grid, values },
        })
    }

    /// Samples a density on a grid.
    pub fn from_density(grid: UniformGrid<T>, density: impl Fn(T) -> T) -> Result<Self> {
        let values = grid.points().into_iter().map(density).collect();
        Self::gridded(grid, values)
    }

    /// `Σ c_i μ_i` with `c_i ≥ 0`.
    pub fn mixture(parts: Vec<(T, Measure<T>)>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidMeasure("empty mixture".into()));
        }
        let coeffs: Vec<T> = parts.iter().map(|(c, _)| *c).collect();
        check_nonnegative("mixture coefficient", &coeffs)?;
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for (c, m) in &parts {
            nodes.extend_from_slice(&m.nodes);
            weights.extend(m.weights.iter().map(|&w| *c * w));
        }
        Ok(Measure {
            kind: MeasureKind::Mixture(parts),
            nodes,
            weights,
        })
    }

    pub fn kind(&self) -> &MeasureKind<T> {
        &self.kind
    }

    /// Quadrature atoms `(x_k, W_k)` realising the measure.
    pub fn atoms(&self) -> (&[T], &[T]) {
        (&self.nodes, &self.weights)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `μ̂(t) = Σ W_k e^{i t x_k}`.
    pub fn fourier_transform(&self, t: T) -> Complex<T> {
        let mut acc = Complex::new(T::zero(), T::zero());
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + cis(t * x) * w;
        }
        acc
    }

    /// Transform at every grid point. Each entry is computed exactly as
    /// [`Measure::fourier_transform`] would.
    pub fn fourier_on_grid(&self, ts: &UniformGrid<T>) -> Vec<Complex<T>> {
        self.fourier_at(&ts.points())
    }

    pub fn fourier_at(&self, ts: &[T]) -> Vec<Complex<T>> {
        ts.par_iter().map(|&t| self.fourier_transform(t)).collect()
    }

    /// `μ(ℝ) = μ̂(0)`.
    pub fn total_mass(&self) -> T {
        self.fourier_transform(T::zero()).re
    }

    /// Smallest `R` with all positive mass inside `[−R, R]`.
    pub fn support_radius(&self) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .filter(|(_, &w)| w > T::zero())
            .fold(T::zero(), |r, (&x, _)| r.max(x.abs()))
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        match &self.kind {
            MeasureKind::GriddedDensity { grid, values } => {
                w.write_record(["t", "value"])?;
                for (t, v) in grid.points().iter().zip(values) {
                    w.write_record([t.as_f64().to_string(), v.as_f64().to_string()])?;
                }
            }
            _ => {
                w.write_record(["position", "weight"])?;
                for (x, v) in self.nodes.iter().zip(&self.weights) {
                    w.write_record([x.as_f64().to_string(), v.as_f64().to_string()])?;
                }
            }
        }
        w.flush().map_err(|e| Error::Parse(e.to_string()))
    }

    /// Reads `position,weight` (atoms) or `t,value` (uniform density) rows,
    /// selected by the header.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let header: Vec<String> = r.headers()?.iter().map(str::to_ascii_lowercase).collect();
        let rows = parse_rows(&mut r, 2)?;
        let (xs, vs): (Vec<f64>, Vec<f64>) = rows.into_iter().map(|r| (r[0], r[1])).unzip();
        match (header[0].as_str(), header[1].as_str()) {
            ("position", "weight") => Self::discrete(
                xs.into_iter().map(T::lit).collect(),
                vs.into_iter().map(T::lit).collect(),
            ),
            ("t", "value") => {
                let grid = uniform_grid_from_samples(&xs)?;
                Self::gridded(grid, vs.into_iter().map(T::lit).collect())
            }
            _ => Err(Error::Parse(format!(
                "expected header position,weight or t,value, got {}",
                header.join(",")
            ))),
        }
    }
}

pub(crate) fn parse_rows<R: Read>(r: &mut csv::Reader<R>, width: usize) -> Result<Vec<Vec<f64>>> {
    if r.headers()?.len() != width {
        return Err(Error::Parse(format!("expected {width} columns")));
    }
    let mut out = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.len() != width {
            return Err(Error::Parse(format!("row {}: expected {width} fields", line + 1)));
        }
        let row = rec
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("row {}: {s:?}: {e}", line + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(row);
    }
    Ok(out)
}

/// Recovers a uniform grid from sorted abscissae; spacing may deviate from
/// the mean by `1e−9` relative (decimal round-off in text files).
pub(crate) fn uniform_grid_from_samples<T: Real>(xs: &[f64]) -> Result<UniformGrid<T>> {
    if xs.len() < 2 {
        return Err(Error::InvalidGrid("need at least 2 rows".into()));
    }
    let n = xs.len();
    let first = xs[1] - xs[0];
    if !(first > 0.0) {
        return Err(Error::NonUniformGrid { index: 1 });
    }
    for k in 2..n {
        if ((xs[k] - xs[k - 1]) - first).abs() > 1e-9 * first.max(1.0) {
            return Err(Error::NonUniformGrid { index: k });
        }
    }
    let step = (xs[n - 1] - xs[0]) / (n - 1) as f64;
    UniformGrid::new(T::lit(xs[0]), T::lit(step), n)
}

/// A density truncated to `[−R, R]` together with the mass it drops.
#[derive(Debug, Clone)]
pub struct Truncated<T> {
    pub measure: Measure<T>,
    pub radius: T,
    pub tail_mass: T,
}

/// Cauchy density `1/(π(1+x²))` on `[−radius, radius]`; its transform is
/// `e^{−|t|}` up to the dropped tail mass `1 − (2/π)·atan(R) ≈ 2/(πR)`.
pub fn cauchy<T: Real>(radius: T, step: T) -> Result<Truncated<T>> {
    let count = (radius * T::lit(2.0) / step).round().to_usize().unwrap_or(0) + 1;
    let grid = UniformGrid::new(-radius, step, count)?;
    let measure = Measure::from_density(grid, |x| T::FRAC_1_PI() / (T::one() + x * x))?;
    let tail_mass = T::one() - T::lit(2.0) * T::FRAC_1_PI() * radius.atan();
    Ok(Truncated {
        measure,
        radius,
        tail_mass,
    })
}

/// Trapezoid settings for Polya densities.
#[derive(Debug, Clone, Copy)]
pub struct PolyaQuadrature<T> {
    /// Panels on `[−support_radius, support_radius]`; must be even.
    pub intervals: usize,
    /// Negative values down to `−tol_clamp` are rounded up to zero.
    pub tol_clamp: T,
}

impl<T: Real> Default for PolyaQuadrature<T> {
    fn default() -> Self {
        PolyaQuadrature {
            intervals: 4096,
            tol_clamp: T::lit(1e-9),
        }
    }
}

struct EvenSamples<T> {
    nodes: Vec<T>,
    weighted: Vec<T>,
}

fn even_samples<T: Real>(g: &(impl Fn(T) -> T + Sync), radius: T, intervals: usize) -> EvenSamples<T> {
    let h = (radius + radius) / T::from_count(intervals);
    let nodes: Vec<T> = (0..=intervals)
        .map(|k| -radius + h * T::from_count(k))
        .collect();
    let weighted = nodes
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            let w = if k == 0 || k == intervals {
                h / T::lit(2.0)
            } else {
                h
            };
            w * g(x)
        })
        .collect();
    EvenSamples { nodes, weighted }
}

fn polya_sum<T: Real>(s: &EvenSamples<T>, t: T) -> T {
    let mut acc = T::zero();
    for (&x, &w) in s.nodes.iter().zip(&s.weighted) {
        acc += w * (t * x).cos();
    }
    acc / T::TAU()
}

/// `A(t) = (1/2π) ∫ e^{itx} g(x) dx` for even `g` supported in
/// `[−support_radius, support_radius]`, by the trapezoid rule.
pub fn polya_density_value<T: Real>(
    g: impl Fn(T) -> T + Sync,
    support_radius: T,
    t: T,
    intervals: usize,
) -> T {
    polya_sum(&even_samples(&g, support_radius, intervals), t)
}

/// Density of the measure whose transform is the even function `g`,
/// sampled on `ts`.
pub fn polya_density<T: Real>(
    g: impl Fn(T) -> T + Sync,
    support_radius: T,
    ts: &UniformGrid<T>,
    quad: PolyaQuadrature<T>,
) -> Result<Measure<T>> {
    if !(support_radius > T::zero()) || quad.intervals < 2 {
        return Err(Error::InvalidArgument(
            "support radius must be positive and the rule needs at least two panels".into(),
        ));
    }
    let samples = even_samples(&g, support_radius, quad.intervals);
    let points = ts.points();
    let raw: Vec<T> = points.par_iter().map(|&t| polya_sum(&samples, t)).collect();
    let mut values = Vec::with_capacity(raw.len());
    for (&t, &a) in points.iter().zip(&raw) {
        if a < -quad.tol_clamp || a.is_nan() {
            return Err(Error::NegativeDensity {
                t: t.as_f64(),
                value: a.as_f64(),
            });
        }
        values.push(a.max(T::zero()));
    }
    Measure::gridded(*ts, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn two_atoms() -> Measure<f64> {
        Measure::discrete(vec![-1.0, 1.0], vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn point_mass_transform_is_one() {
        let m = Measure::point_mass(0.0, 1.0).unwrap();
        for t in [-3.0, 0.0, 0.7, 100.0] {
            assert_eq!(m.fourier_transform(t), Complex::new(1.0, 0.0));
        }
        let g = UniformGrid::linspace(-2.0, 2.0, 9).unwrap();
        assert!(m.fourier_on_grid(&g).iter().all(|z| *z == Complex::new(1.0, 0.0)));
        assert_eq!(m.total_mass(), 1.0);
    }

    #[test]
    fn two_atoms_give_cosine() {
        let m = two_atoms();
        let g = UniformGrid::linspace(0.0, PI, 3).unwrap();
        let got = m.fourier_on_grid(&g);
        for (z, want) in got.iter().zip([1.0, 0.0, -1.0]) {
            assert!((z - Complex::new(want, 0.0)).norm() < 1e-12);
        }
        assert_eq!(m.total_mass(), 1.0);
    }

    #[test]
    fn cauchy_transform_is_laplace() {
        let c = cauchy(2000.0, 0.1).unwrap();
        let z = c.measure.fourier_transform(1.0);
        assert!((z.re - (-1.0f64).exp()).abs() < 1e-3);
        assert!(z.im.abs() < 1e-12);
        let g = UniformGrid::linspace(-1.0, 1.0, 21).unwrap();
        for (t, z) in g.points().iter().zip(c.measure.fourier_on_grid(&g)) {
            assert!((z.re - (-t.abs()).exp()).abs() < 1e-3);
        }
    }

    #[test]
    fn truncated_cauchy_mass() {
        let c = cauchy(2000.0, 0.1).unwrap();
        let arctan = 1.0 - 2.0 / PI * 2000f64.atan();
        assert!((c.tail_mass - arctan).abs() < 1e-15);
        assert!((c.tail_mass - 2.0 / (PI * 2000.0)).abs() < 1e-9);
        // independent trapezoid sum of the density
        let h = 0.1;
        let n = 40001;
        let mut s = 0.0;
        for k in 0..n {
            let x = -2000.0 + h * k as f64;
            let w = if k == 0 || k == n - 1 { h / 2.0 } else { h };
            s += w / (PI * (1.0 + x * x));
        }
        assert!((c.measure.total_mass() - s).abs() < 1e-12);
        assert!((c.measure.total_mass() - (1.0 - c.tail_mass)).abs() < 1e-8);
    }

    #[test]
    fn cauchy_quadrature_converges_under_refinement() {
        let reference = cauchy(200.0, 0.0125).unwrap().measure.fourier_transform(0.5);
        let errs: Vec<f64> = [0.8, 0.4, 0.2, 0.1]
            .iter()
            .map(|&h| (cauchy(200.0, h).unwrap().measure.fourier_transform(0.5) - reference).norm())
            .collect();
        for w in errs.windows(2) {
            assert!(w[1] <= w[0], "{errs:?}");
        }
    }

    #[test]
    fn triangle_density_at_zero() {
        let tri = |x: f64| (1.0 - x.abs()).max(0.0);
        let a0 = polya_density_value(tri, 1.0, 0.0, 4096);
        assert!((a0 - 1.0 / (2.0 * PI)).abs() < 1e-12);
        // (1 − cos t)/(π t²)
        let t = 2.5f64;
        let closed = (1.0 - t.cos()) / (PI * t * t);
        assert!((polya_density_value(tri, 1.0, t, 4096) - closed).abs() < 1e-7);
    }

    #[test]
    fn polya_tilde_two_density_at_zero() {
        let f2 = |x: f64| {
            let a = x.abs();
            if a <= 1.0 {
                (-a).exp()
            } else if a <= 2.0 {
                (-1.0f64).exp() * (2.0 - a)
            } else {
                0.0
            }
        };
        let want = (2.0 - (-1.0f64).exp()) / (2.0 * PI);
        assert!((polya_density_value(f2, 2.0, 0.0, 65536) - want).abs() < 1e-9);
    }

    #[test]
    fn zero_function_gives_zero_density() {
        let ts = UniformGrid::fourier_dual(1.0, 64).unwrap();
        let m = polya_density(|_| 0.0, 1.0, &ts, PolyaQuadrature::default()).unwrap();
        assert_eq!(m.total_mass(), 0.0);
    }

    #[test]
    fn negative_density_is_rejected() {
        // a bump with a dip is not a transform of a positive measure
        let g = |x: f64| if x.abs() < 1.0 { x * x } else { 0.0 };
        let ts = UniformGrid::fourier_dual(1.0, 256).unwrap();
        assert!(matches!(
            polya_density(g, 1.0, &ts, PolyaQuadrature::default()),
            Err(Error::NegativeDensity { .. })
        ));
    }

    #[test]
    fn invalid_inputs() {
        assert!(UniformGrid::new(0.0, 0.0, 3).is_err());
        assert!(UniformGrid::new(0.0, 1.0, 1).is_err());
        assert!(Measure::discrete(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(Measure::discrete(vec![0.0], vec![-1.0]).is_err());
        let g = UniformGrid::new(0.0, 1.0, 3).unwrap();
        assert!(Measure::gridded(g, vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let m = two_atoms();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        assert_eq!(Measure::<f64>::read_csv(&buf[..]).unwrap(), m);

        let g = Measure::from_density(UniformGrid::linspace(-1.0, 1.0, 5).unwrap(), |x| 1.0 - x * x)
            .unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let back = Measure::<f64>::read_csv(&buf[..]).unwrap();
        assert!((back.total_mass() - g.total_mass()).abs() < 1e-15);

        let bad = "t,value\n0,1\n0.5,1\n1.5,1\n";
        assert!(matches!(
            Measure::<f64>::read_csv(bad.as_bytes()),
            Err(Error::NonUniformGrid { index: 2 })
        ));
    }

    #[test]
    fn mixture_transform_is_linear() {
        let a = two_atoms();
        let b = Measure::point_mass(0.3, 2.0).unwrap();
        let m = Measure::mixture(vec![(0.25, a.clone()), (0.75, b.clone())]).unwrap();
        let t = 1.3;
        let want = a.fourier_transform(t) * 0.25 + b.fourier_transform(t) * 0.75;
        assert!((m.fourier_transform(t) - want).norm() < 1e-15);
    }

    #[test]
    fn dual_grid_round_trip_is_exact_on_the_lattice() {
        let tri = |x: f64| (1.0 - x.abs()).max(0.0);
        let ts = UniformGrid::fourier_dual(2.0, 256).unwrap();
        let quad = PolyaQuadrature {
            intervals: 256,
            tol_clamp: 1e-9,
        };
        let m = polya_density(tri, 2.0, &ts, quad).unwrap();
        for k in 0..=16 {
            let z = -2.0 + 0.25 * k as f64;
            assert!((m.fourier_transform(z).re - tri(z)).abs() < 1e-12, "z = {z}");
        }
    }

    fn arb_measure() -> impl Strategy<Value = Measure<f64>> {
        prop::collection::vec((-10.0..10.0f64, 0.0..3.0f64), 1..12).prop_filter_map(
            "distinct positions",
            |atoms| {
                let (x, w): (Vec<_>, Vec<_>) = atoms.into_iter().unzip();
                Measure::discrete(x, w).ok()
            },
        )
    }

    proptest! {
        #[test]
        fn transform_is_hermitian_and_bounded(m in arb_measure(), t in -20.0..20.0f64) {
            let mass = m.total_mass();
            let plus = m.fourier_transform(t);
            let minus = m.fourier_transform(-t);
            prop_assert!((plus - minus.conj()).norm() <= 1e-12 * (1.0 + mass));
            prop_assert!(plus.norm() <= mass * (1.0 + 1e-12) + 1e-15);
            prop_assert_eq!(m.fourier_transform(0.0).im, 0.0);
        }

        #[test]
        fn grid_path_equals_scalar_path(m in arb_measure(), lo in -5.0..0.0f64, n in 2usize..40) {
            let g = UniformGrid::linspace(lo, lo + 7.0, n).unwrap();
            for (k, z) in m.fourier_on_grid(&g).iter().enumerate() {
                prop_assert!((z - m.fourier_transform(g.point(k))).norm() <= 1e-12);
            }
        }
    }
}
