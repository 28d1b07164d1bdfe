//! The multiplication model of the translation group on `L²(dμ)`: the
//! vectors `γ_a`, the unitary group `V_μ(t)`, recovery of the extension
//! `μ̂`, and a finite-rank comparison of two representing measures.

use ndarray::Array2;
use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::extend::{validate_extension, from_measure, ExtensionCheck};
use crate::kernel::LocalKernel;
use crate::linalg::PseudoInverse;
use crate::measure::Measure;
use crate::quadrature::{QuadratureSpec, TestFunction};
use crate::rkhs::AnchorSet;
use crate::scalar::{cis, re, Real};

/// An element of `L²(dμ)` given by its values at the atoms of `μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralVector<'m, T> {
    measure: &'m Measure<T>,
    values: Vec<Complex<T>>,
}

impl<'m, T: Real> SpectralVector<'m, T> {
    pub fn new(measure: &'m Measure<T>, values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() != measure.len() {
            return Err(Error::InvalidArgument(format!(
                "{} values for a measure with {} atoms",
                values.len(),
                measure.len()
            )));
        }
        Ok(SpectralVector { measure, values })
    }

    /// Samples `f` at the atoms.
    pub fn from_fn(measure: &'m Measure<T>, f: impl Fn(T) -> Complex<T>) -> Self {
        let values = measure.atoms().0.iter().map(|&s| f(s)).collect();
        SpectralVector { measure, values }
    }

    pub fn measure(&self) -> &'m Measure<T> {
        self.measure
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    /// `⟨f, g⟩ = Σ W_k f(s_k) conj g(s_k)`.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        if !std::ptr::eq(self.measure, other.measure) && self.measure != other.measure {
            return Err(Error::InvalidArgument(
                "vectors live on different measures".into(),
            ));
        }
        Ok(pairing(self.measure.atoms().1, &self.values, &other.values))
    }

    pub fn norm(&self) -> T {
        pairing(self.measure.atoms().1, &self.values, &self.values)
            .re
            .max(T::zero())
            .sqrt()
    }
}

fn pairing<T: Real>(weights: &[T], f: &[Complex<T>], g: &[Complex<T>]) -> Complex<T> {
    weights
        .iter()
        .zip(f.iter().zip(g))
        .fold(re(T::zero()), |acc, (&w, (a, b))| acc + *a * b.conj() * w)
}

fn weighted_norm<T: Real>(weights: &[T], f: &[Complex<T>]) -> T {
    weights
        .iter()
        .zip(f)
        .fold(T::zero(), |acc, (&w, z)| acc + w * z.norm_sqr())
        .sqrt()
}

/// `γ_a(s) = e^{−ias}`, so that `⟨γ_b, γ_a⟩ = μ̂(a − b)`.
pub fn embed_gamma<T: Real>(a: T, mu: &Measure<T>) -> SpectralVector<'_, T> {
    SpectralVector::from_fn(mu, |s| cis(-a * s))
}

/// `φ̂(s) = ∫ φ(x) e^{−isx} dx`, the image of `F_φ`.
pub fn embed_test_function<'m, T: Real>(
    phi: &TestFunction<T>,
    mu: &'m Measure<T>,
    q: QuadratureSpec,
) -> SpectralVector<'m, T> {
    let nodes = phi.weighted_nodes(q);
    let values = mu
        .atoms()
        .0
        .par_iter()
        .map(|&s| {
            nodes
                .iter()
                .fold(re(T::zero()), |acc, &(x, w)| acc + cis(-s * x) * w)
        })
        .collect();
    SpectralVector {
        measure: mu,
        values,
    }
}

/// `(V_μ(t) f)(s) = e^{−its} f(s)`.
pub fn v_translate<'m, T: Real>(t: T, f: &SpectralVector<'m, T>) -> SpectralVector<'m, T> {
    let (nodes, _) = f.measure.atoms();
    SpectralVector {
        measure: f.measure,
        values: nodes
            .iter()
            .zip(&f.values)
            .map(|(&s, &v)| cis(-t * s) * v)
            .collect(),
    }
}

/// `⟨γ_{x0}, V(t) γ_{x0}⟩`.
pub fn extension_via_representation<T: Real>(mu: &Measure<T>, x0: T, t: T) -> Complex<T> {
    let g = embed_gamma(x0, mu);
    let vg = v_translate(t, &g);
    pairing(mu.atoms().1, &g.values, &vg.values)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatterOptions<T> {
    pub translations: Vec<T>,
    /// Points `a` whose `γ_a` feed the multiplier estimate and the
    /// `T γ_a ≈ γ_a` residuals.
    pub gamma_points: Vec<T>,
    /// Every `multiplier_stride`-th atom of `ν` gets a multiplier sample.
    pub multiplier_stride: usize,
    /// Atoms of `ν` lighter than this fraction of the heaviest are gaps.
    pub min_relative_weight: T,
    pub mu_budget: T,
    pub nu_budget: T,
}

impl<T: Real> Default for ScatterOptions<T> {
    fn default() -> Self {
        ScatterOptions {
            translations: vec![T::lit(0.1), T::lit(0.5), T::lit(1.0)],
            gamma_points: vec![],
            multiplier_stride: 64,
            min_relative_weight: T::lit(1e-12),
            mu_budget: T::zero(),
            nu_budget: T::zero(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntertwiningDefect<T> {
    pub probe: usize,
    pub t: T,
    pub defect: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MultiplierSample<T> {
    pub t: T,
    /// `[re, im]`, or `None` where the measures give no information.
    pub value: Option<[T; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaResidual<T> {
    pub a: T,
    pub residual: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatterReport<T> {
    pub anchors: usize,
    pub rank: usize,
    pub defects: Vec<IntertwiningDefect<T>>,
    pub max_defect: T,
    pub gamma_residuals: Vec<GammaResidual<T>>,
    pub multiplier_samples: Vec<MultiplierSample<T>>,
    pub mu_restriction: ExtensionCheck<T>,
    pub nu_restriction: ExtensionCheck<T>,
    pub warnings: Vec<String>,
}

/// Anchor-span model of `W^ν (W^μ)^*`: least-squares coefficients of `f` in
/// `span{γ^μ_{a_j}}`, re-expanded in `L²(dν)`.
struct FiniteRank<'a, T> {
    anchors: &'a [T],
    mu: &'a Measure<T>,
    nu: &'a Measure<T>,
    gram: PseudoInverse<T>,
}

impl<T: Real> FiniteRank<'_, T> {
    fn coefficients(&self, f: &[Complex<T>]) -> Vec<Complex<T>> {
        let (nodes, weights) = self.mu.atoms();
        let b: Vec<Complex<T>> = self
            .anchors
            .par_iter()
            .map(|&a| {
                nodes
                    .iter()
                    .zip(weights.iter().zip(f))
                    .fold(re(T::zero()), |acc, (&s, (&w, v))| {
                        acc + *v * cis(a * s) * w
                    })
            })
            .collect();
        self.gram.solve(&b)
    }

    /// `Σ c_j e^{−i a_j s}` at the atoms of `ν`, times `e^{−its}`.
    fn expand(&self, c: &[Complex<T>], t: T) -> Vec<Complex<T>> {
        self.nu
            .atoms()
            .0
            .par_iter()
            .map(|&s| {
                let v = self
                    .anchors
                    .iter()
                    .zip(c)
                    .fold(re(T::zero()), |acc, (&a, &cj)| acc + cj * cis(-a * s));
                v * cis(-t * s)
            })
            .collect()
    }

    fn apply(&self, f: &[Complex<T>]) -> Vec<Complex<T>> {
        self.expand(&self.coefficients(f), T::zero())
    }
}

fn difference_samples<T: Real>(f: &LocalKernel<T>) -> Result<Vec<T>> {
    let xs = f.domain().interior_grid(24, T::lit(0.01))?;
    let mut zs: Vec<T> = xs
        .iter()
        .flat_map(|&x| xs.iter().map(move |&y| x - y))
        .collect();
    zs.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    zs.dedup();
    Ok(zs)
}

/// Compares the representations of `H_F` in `L²(dμ)` and `L²(dν)` through
/// the finite-rank operator `T = E_ν P E_μ^†` built on `anchors`.
///
/// Reports the intertwining defect `‖T V_μ(t) f − V_ν(t) T f‖ / ‖f‖` for
/// every probe and translation, how well `T γ_a^μ` matches `γ_a^ν`, and
/// samples of the multiplier `(T γ_a)(s)/γ_a(s)` averaged over the
/// `gamma_points`.
pub fn scattering_operator<T: Real>(
    f: &LocalKernel<T>,
    mu: &Measure<T>,
    nu: &Measure<T>,
    anchors: &AnchorSet<T>,
    probes: &[SpectralVector<'_, T>],
    options: &ScatterOptions<T>,
) -> Result<ScatterReport<T>> {
    let samples = difference_samples(f)?;
    let restriction = |m: &Measure<T>, budget: T| -> Result<ExtensionCheck<T>> {
        let c = from_measure(m.clone()).with_truncation_budget(budget);
        let check = validate_extension(&c, f, &samples)?;
        if !check.valid {
            return Err(Error::NotAnExtension {
                residual: check.residual.as_f64(),
                budget: check.budget.as_f64(),
            });
        }
        Ok(check)
    };
    let mu_restriction = restriction(mu, options.mu_budget)?;
    let nu_restriction = restriction(nu, options.nu_budget)?;
    if probes.iter().any(|p| p.measure != mu) {
        return Err(Error::InvalidArgument("probes must live on μ".into()));
    }

    let a = anchors.points();
    let n = a.len();
    let mut g = Array2::from_elem((n, n), re(T::zero()));
    for j in 0..n {
        for k in 0..=j {
            // ⟨γ_k, γ_j⟩ = μ̂(a_j − a_k)
            let v = mu.fourier_transform(a[j] - a[k]);
            g[[j, k]] = v;
            g[[k, j]] = v.conj();
        }
        g[[j, j]] = re(g[[j, j]].re);
    }
    let model = FiniteRank {
        anchors: a,
        mu,
        nu,
        gram: PseudoInverse::with_default_cutoff(&g),
    };
    let rank = model.gram.rank();
    let mut warnings = Vec::new();
    if rank < n {
        warnings.push(format!(
            "anchor Gram matrix is rank deficient at the cutoff: rank {rank} of {n}"
        ));
    }

    let nu_w = nu.atoms().1;
    let mut defects = Vec::with_capacity(probes.len() * options.translations.len());
    let mut max_defect = T::zero();
    for (p, probe) in probes.iter().enumerate() {
        let scale = probe.norm();
        let c = model.coefficients(&probe.values);
        for &t in &options.translations {
            let lhs = model.apply(&v_translate(t, probe).values);
            let rhs = model.expand(&c, t);
            let diff: Vec<Complex<T>> = lhs.iter().zip(&rhs).map(|(x, y)| *x - *y).collect();
            let defect = if scale > T::zero() {
                weighted_norm(nu_w, &diff) / scale
            } else {
                T::zero()
            };
            max_defect = max_defect.max(defect);
            defects.push(IntertwiningDefect { probe: p, t, defect });
        }
    }

    let nu_nodes = nu.atoms().0;
    let mut gamma_residuals = Vec::new();
    let mut images = Vec::new();
    for &x in &options.gamma_points {
        let image = model.apply(&embed_gamma(x, mu).values);
        let diff: Vec<Complex<T>> = image
            .iter()
            .zip(nu_nodes)
            .map(|(v, &s)| *v - cis(-x * s))
            .collect();
        // ‖γ_a‖ = √ν(ℝ)
        let scale = nu_w.iter().fold(T::zero(), |acc, &w| acc + w).sqrt();
        gamma_residuals.push(GammaResidual {
            a: x,
            residual: weighted_norm(nu_w, &diff) / scale,
        });
        images.push(image);
    }

    let heaviest = nu_w.iter().copied().fold(T::zero(), T::max);
    let mu_radius = mu.support_radius();
    let stride = options.multiplier_stride.max(1);
    let multiplier_samples = if images.is_empty() {
        vec![]
    } else {
        (0..nu_nodes.len())
            .step_by(stride)
            .map(|k| {
                let s = nu_nodes[k];
                let gap = nu_w[k] <= options.min_relative_weight * heaviest || s.abs() > mu_radius;
                let value = (!gap).then(|| {
                    let sum = options
                        .gamma_points
                        .iter()
                        .zip(&images)
                        .fold(re(T::zero()), |acc, (&x, img)| acc + img[k] * cis(x * s));
                    let m = sum / T::from_count(images.len());
                    [m.re, m.im]
                });
                MultiplierSample { t: s, value }
            })
            .collect()
    };

    Ok(ScatterReport {
        anchors: n,
        rank,
        defects,
        max_defect,
        gamma_residuals,
        multiplier_samples,
        mu_restriction,
        nu_restriction,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{Analytic, DomainSet};
    use crate::measure::{cauchy, UniformGrid};
    use crate::operators::wf_inner;
    use crate::quadrature::BumpFunction;
    use proptest::prelude::{prop, prop_assert, proptest, ProptestConfig};

    fn two_atoms() -> Measure<f64> {
        Measure::discrete(vec![-1.0, 1.0], vec![0.5, 0.5]).unwrap()
    }

    fn lumpy() -> Measure<f64> {
        Measure::discrete(vec![-2.0, -0.3, 0.4, 1.7, 3.1], vec![0.1, 0.3, 0.2, 0.25, 0.15]).unwrap()
    }

    #[test]
    fn gamma_pairings() {
        let mu = two_atoms();
        for a in [0.0, 0.4, 2.0] {
            let g0 = embed_gamma(0.0, &mu);
            let ga = embed_gamma(a, &mu);
            assert!((g0.inner(&ga).unwrap() - re(f64::cos(a))).norm() < 1e-15);
        }
        let g = embed_gamma(0.7, &mu);
        assert!((g.inner(&g).unwrap().re - mu.total_mass()).abs() < 1e-15);

        let c = cauchy(2000.0, 0.1).unwrap();
        let v = embed_gamma(0.0, &c.measure).inner(&embed_gamma(1.0, &c.measure)).unwrap();
        assert!((v.re - (-1.0f64).exp()).abs() < 1e-3);
    }

    #[test]
    fn translation_identities() {
        let mu = lumpy();
        let (a, b) = (0.9, -0.35);
        let moved = v_translate(a - b, &embed_gamma(b, &mu));
        let target = embed_gamma(a, &mu);
        for (x, y) in moved.values().iter().zip(target.values()) {
            assert!((x - y).norm() <= 1e-14);
        }
        let f = embed_gamma(0.3, &mu);
        assert_eq!(v_translate(0.0, &f), f);
        let st = v_translate(0.4, &v_translate(1.1, &f));
        let direct = v_translate(1.5, &f);
        for (x, y) in st.values().iter().zip(direct.values()) {
            assert!((x - y).norm() <= 1e-14);
        }
    }

    #[test]
    fn extension_recovery() {
        let mu = two_atoms();
        assert!((extension_via_representation(&mu, 0.3, 0.0) - re(1.0)).norm() < 1e-15);
        assert!((extension_via_representation(&mu, 0.3, std::f64::consts::PI) - re(-1.0)).norm() < 1e-15);
        let c = cauchy(2000.0, 0.1).unwrap().measure;
        let a = extension_via_representation(&c, 0.5, 1.0);
        let b = extension_via_representation(&c, 0.2, 1.0);
        assert!((a - b).norm() <= 1e-12);
        assert!((a.re - (-1.0f64).exp()).abs() < 1e-3);
    }

    #[test]
    fn parseval_against_the_smoothed_kernel() {
        let f = LocalKernel::analytic(
            DomainSet::interval(0.0, 1.0).unwrap(),
            Analytic::Exponential { rate: 1.0 },
        )
        .unwrap();
        let mu = cauchy(2000.0f64, 0.05).unwrap();
        let q = QuadratureSpec::default();
        let phi = TestFunction::from(BumpFunction::new(0.4, 0.25).unwrap());
        let lhs: f64 = wf_inner(&f, &phi, &phi, q).unwrap().re;
        let hat = embed_test_function(&phi, &mu.measure, q);
        let rhs = hat.norm().powi(2);
        assert!((lhs - rhs).abs() <= 2.0 * mu.tail_mass * 0.25 + 1e-6, "{lhs} vs {rhs}");
    }

    #[test]
    fn vectors_on_different_measures_do_not_pair() {
        let (m1, m2) = (two_atoms(), lumpy());
        assert!(embed_gamma(0.0, &m1).inner(&embed_gamma(0.0, &m2)).is_err());
        assert!(SpectralVector::new(&m1, vec![re(1.0)]).is_err());
    }

    fn exp_kernel() -> LocalKernel<f64> {
        LocalKernel::analytic(
            DomainSet::interval(0.0, 1.0).unwrap(),
            Analytic::Exponential { rate: 1.0 },
        )
        .unwrap()
    }

    #[test]
    fn same_measure_scatters_to_identity() {
        let f = exp_kernel();
        let mu = cauchy(400.0, 0.1).unwrap();
        let anchors = AnchorSet::uniform(f.domain(), 8, 0.05).unwrap();
        // probes inside the anchor span
        let probes: Vec<_> = anchors.points()[..3].iter().map(|&a| embed_gamma(a, &mu.measure)).collect();
        let opts = ScatterOptions {
            translations: vec![0.0],
            gamma_points: anchors.points().to_vec(),
            mu_budget: mu.tail_mass,
            nu_budget: mu.tail_mass,
            ..ScatterOptions::default()
        };
        let r = scattering_operator(&f, &mu.measure, &mu.measure, &anchors, &probes, &opts).unwrap();
        assert!(r.max_defect <= 1e-10, "{}", r.max_defect);
        assert!(r.gamma_residuals.iter().all(|g| g.residual <= 1e-6));
        let filled: Vec<_> = r.multiplier_samples.iter().filter_map(|m| m.value).collect();
        assert!(!filled.is_empty());
        for v in filled {
            assert!((v[0] - 1.0).abs() < 1e-6 && v[1].abs() < 1e-6);
        }
    }

    #[test]
    fn non_extensions_are_rejected() {
        let f = exp_kernel();
        let mu = two_atoms();
        let anchors = AnchorSet::uniform(f.domain(), 4, 0.05).unwrap();
        let err = scattering_operator(&f, &mu, &mu, &anchors, &[], &ScatterOptions::default());
        assert!(matches!(err, Err(Error::NotAnExtension { .. })));
    }

    #[test]
    fn gridded_vectors_use_trapezoid_weights() {
        let grid = UniformGrid::linspace(-1.0, 1.0, 201).unwrap();
        let mu = Measure::from_density(grid, |_| 0.5).unwrap();
        let one = SpectralVector::from_fn(&mu, |_| re(1.0));
        assert!((one.norm() - 1.0f64).abs() < 1e-14);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn translations_are_unitary(t in -20.0f64..20.0, a in -5.0f64..5.0) {
            let a: f64 = a;
            let mu = lumpy();
            let f = embed_gamma(a, &mu);
            prop_assert!((v_translate(t, &f).norm() - f.norm()).abs() <= 1e-14);
        }

        #[test]
        fn representation_is_independent_of_base_point(
            x0 in prop::collection::vec(-3.0f64..3.0, 5),
            t in -4.0f64..4.0,
        ) {
            let mu = lumpy();
            let target = mu.fourier_transform(t);
            for &x in &x0 {
                prop_assert!((extension_via_representation(&mu, x, t) - target).norm() <= 1e-12);
            }
        }
    }
}
