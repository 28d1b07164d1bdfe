//! The reproducing kernel Hilbert space `H_F` spanned by `k_a(x) = F(x − a)`.

use ndarray::Array2;
use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{gram_matrix, DomainSet, Evaluate, LocalKernel};
use crate::linalg::PseudoInverse;
use crate::scalar::{re, Real};

/// Distinct anchor points inside `Ω`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnchorSet<T> {
    points: Vec<T>,
}

impl<T: Real> AnchorSet<T> {
    pub fn new(points: Vec<T>, domain: &DomainSet<T>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("anchor set is empty".into()));
        }
        if let Some(x) = points.iter().find(|&&x| !domain.contains(x)) {
            return Err(Error::OutOfDomain(x.as_f64()));
        }
        let mut sorted = points.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite anchors"));
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("anchors must be distinct".into()));
        }
        Ok(AnchorSet { points })
    }

    /// `n` equispaced anchors per component with a relative edge margin.
    pub fn uniform(domain: &DomainSet<T>, n: usize, margin: T) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("anchor set is empty".into()));
        }
        Self::new(domain.interior_grid(n, margin)?, domain)
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `Σ_j c_j k_{a_j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct RkhsElement<T> {
    anchors: Vec<T>,
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> RkhsElement<T> {
    pub fn new(anchors: &AnchorSet<T>, coeffs: Vec<Complex<T>>) -> Result<Self> {
        if coeffs.len() != anchors.len() {
            return Err(Error::InvalidArgument(format!(
                "{} anchors but {} coefficients",
                anchors.len(),
                coeffs.len()
            )));
        }
        Ok(RkhsElement {
            anchors: anchors.points.clone(),
            coeffs,
        })
    }

    /// `k_a`.
    pub fn section(a: T, domain: &DomainSet<T>) -> Result<Self> {
        Self::new(&AnchorSet::new(vec![a], domain)?, vec![re(T::one())])
    }

    pub fn anchors(&self) -> &[T] {
        &self.anchors
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }
}

/// `⟨u, v⟩ = Σ_{j,k} F(b_k − a_j) c_j conj d_k` for `u = Σ c_j k_{a_j}`,
/// `v = Σ d_k k_{b_k}`.
pub fn rkhs_inner<T: Real, F: Evaluate<T> + ?Sized>(
    f: &F,
    u: &RkhsElement<T>,
    v: &RkhsElement<T>,
) -> Result<Complex<T>> {
    let mut acc = re(T::zero());
    for (&a, &c) in u.anchors.iter().zip(&u.coeffs) {
        for (&b, &d) in v.anchors.iter().zip(&v.coeffs) {
            acc = acc + f.evaluate(b - a)? * c * d.conj();
        }
    }
    Ok(acc)
}

pub fn rkhs_norm_sq<T: Real, F: Evaluate<T> + ?Sized>(f: &F, u: &RkhsElement<T>) -> Result<T> {
    Ok(rkhs_inner(f, u, u)?.re)
}

/// `u(x) = Σ c_j F(x − a_j)`.
pub fn rkhs_evaluate<T: Real, F: Evaluate<T> + ?Sized>(
    f: &F,
    u: &RkhsElement<T>,
    x: T,
) -> Result<Complex<T>> {
    let mut acc = re(T::zero());
    for (&a, &c) in u.anchors.iter().zip(&u.coeffs) {
        acc = acc + f.evaluate(x - a)? * c;
    }
    Ok(acc)
}

/// `|u(a) − ⟨u, k_a⟩|`.
pub fn reproducing_defect<T: Real, F: Evaluate<T> + ?Sized>(
    f: &F,
    u: &RkhsElement<T>,
    a: T,
) -> Result<T> {
    let ka = RkhsElement {
        anchors: vec![a],
        coeffs: vec![re(T::one())],
    };
    Ok((rkhs_evaluate(f, u, a)? - rkhs_inner(f, u, &ka)?).norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MembershipFlag {
    Ok,
    /// Gram condition number above `1e12`; the value is still reported.
    IllConditioned,
    /// The sample vector leaves the numerical range of the Gram matrix; the
    /// value is reported as infinite.
    OutsideRange,
}

/// One evaluation of `q_N(g) = g^H K^+ g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Membership<T> {
    pub anchors: usize,
    pub q_value: T,
    pub range_residual: T,
    pub condition: T,
    pub flag: MembershipFlag,
}

/// `q_N(g)`, the smallest `C` with `|Σ c_j g(a_j)|² ≤ C ‖Σ c_j k_{a_j}‖²`
/// over the anchors. The pseudoinverse drops eigenvalues below
/// `T::gram_cutoff()·λ_max`; when the dropped part of `g` exceeds
/// `T::range_tolerance()` in relative norm, `g` has no bounded
/// representation on these anchors and `q_N = ∞`.
pub fn membership_functional<T: Real, F, G>(
    f: &F,
    g: &G,
    anchors: &AnchorSet<T>,
) -> Result<Membership<T>>
where
    F: Evaluate<T> + ?Sized,
    G: Evaluate<T> + ?Sized,
{
    let k = gram_matrix(f, anchors.points())?;
    let values = anchors
        .points()
        .iter()
        .map(|&a| g.evaluate(a))
        .collect::<Result<Vec<_>>>()?;
    Ok(membership_from_gram(&k, &values))
}

pub(crate) fn membership_from_gram<T: Real>(k: &Array2<Complex<T>>, g: &[Complex<T>]) -> Membership<T> {
    let p = PseudoInverse::with_default_cutoff(k);
    let condition = p.condition_number();
    let residual = p.range_residual(g);
    let (q_value, flag) = if residual > T::range_tolerance() {
        (T::infinity(), MembershipFlag::OutsideRange)
    } else if condition > T::lit(1e12) {
        (p.quadratic_form(g), MembershipFlag::IllConditioned)
    } else {
        (p.quadratic_form(g), MembershipFlag::Ok)
    };
    Membership {
        anchors: g.len(),
        q_value,
        range_residual: residual,
        condition,
        flag,
    }
}

/// Anchor refinement used by the `Def(F)` diagnostic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefSchedule {
    pub anchor_counts: Vec<usize>,
    pub margin: f64,
    pub divergence_ratio: f64,
}

impl Default for DefSchedule {
    fn default() -> Self {
        DefSchedule {
            anchor_counts: vec![8, 16, 32, 64],
            margin: 0.01,
            divergence_ratio: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasisReport<T> {
    pub function: String,
    pub steps: Vec<Membership<T>>,
    /// `q` at the finest step over `q` at the coarsest.
    pub growth: T,
    pub member: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefReport<T> {
    pub dim: usize,
    pub basis: Vec<BasisReport<T>>,
    pub schedule: DefSchedule,
}

fn interval_of<T: Real>(domain: &DomainSet<T>) -> Result<(T, T)> {
    match domain.intervals() {
        [(p, r)] if p.is_finite() && r.is_finite() => Ok((*p, *r)),
        [_] => Err(Error::InvalidDomain("Def(F) needs a bounded interval".into())),
        _ => Err(Error::DomainNotInterval),
    }
}

/// Dimension of `Def(F) = {f ∈ H_F : f'' = f}` on an interval `(p, r)`.
///
/// The solutions of `f'' = f` are spanned by `e^{±(x − m)}` with `m` the
/// midpoint. Each is tested for membership by tracking `q_N` over the
/// schedule: it counts as a member when `q_N` stays finite and grows by less
/// than the divergence ratio.
pub fn def_space_dimension<T: Real>(f: &LocalKernel<T>, schedule: &DefSchedule) -> Result<DefReport<T>> {
    let (p, r) = interval_of(f.domain())?;
    if schedule.anchor_counts.len() < 2 {
        return Err(Error::InvalidArgument(
            "the schedule needs at least two anchor counts".into(),
        ));
    }
    let mid = (p + r) / T::lit(2.0);
    let margin = T::lit(schedule.margin);
    let grids = schedule
        .anchor_counts
        .iter()
        .map(|&n| AnchorSet::uniform(f.domain(), n, margin))
        .collect::<Result<Vec<_>>>()?;
    let grams = grids
        .iter()
        .map(|a| gram_matrix(f, a.points()))
        .collect::<Result<Vec<_>>>()?;

    let mut basis = Vec::new();
    for (label, sign) in [("exp(x - m)", T::one()), ("exp(-(x - m))", -T::one())] {
        let steps: Vec<Membership<T>> = grids
            .iter()
            .zip(&grams)
            .map(|(a, k)| {
                let g: Vec<Complex<T>> = a
                    .points()
                    .iter()
                    .map(|&x| re((sign * (x - mid)).exp()))
                    .collect();
                membership_from_gram(k, &g)
            })
            .collect();
        let first = steps[0].q_value;
        let last = steps[steps.len() - 1].q_value;
        let growth = if steps.iter().all(|s| s.q_value.is_finite()) && first > T::zero() {
            last / first
        } else {
            T::infinity()
        };
        basis.push(BasisReport {
            function: label.to_string(),
            member: growth < T::lit(schedule.divergence_ratio),
            steps,
            growth,
        });
    }
    Ok(DefReport {
        dim: basis.iter().filter(|b| b.member).count(),
        basis,
        schedule: schedule.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Uniqueness {
    Unique,
    NonUnique { def_dim: usize },
}

/// Unique extension iff `Def(F) = {0}`.
pub fn uniqueness_diagnostic<T: Real>(
    f: &LocalKernel<T>,
    schedule: &DefSchedule,
) -> Result<(Uniqueness, DefReport<T>)> {
    let report = def_space_dimension(f, schedule)?;
    let verdict = match report.dim {
        0 => Uniqueness::Unique,
        d => Uniqueness::NonUnique { def_dim: d },
    };
    Ok((verdict, report))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InterpolationVerdict<T> {
    pub x: T,
    pub membership: Membership<T>,
    /// `G̃(0)`: the squared `L²(μ)` norm of the translated point evaluation.
    pub bound: T,
    pub tolerance: T,
    pub pass: bool,
}

/// For an extension `G̃` of `F` and any `x ∈ ℝ`, the translate
/// `y ↦ G̃(y − x)` restricted to `Ω` lies in `H_F` with squared norm at most
/// `G̃(0)`; checks the finite-sample form `q_N ≤ G̃(0) + tol`.
pub fn interpolation_check<T: Real, F, G>(
    f: &F,
    candidate: &G,
    x: T,
    anchors: &AnchorSet<T>,
    tol: T,
) -> Result<InterpolationVerdict<T>>
where
    F: Evaluate<T> + ?Sized,
    G: Evaluate<T> + ?Sized,
{
    let shifted = |y: T| candidate.evaluate(y - x);
    let k = gram_matrix(f, anchors.points())?;
    let g = anchors
        .points()
        .iter()
        .map(|&y| shifted(y))
        .collect::<Result<Vec<_>>>()?;
    let membership = membership_from_gram(&k, &g);
    let bound = candidate.evaluate(T::zero())?.re;
    Ok(InterpolationVerdict {
        x,
        membership,
        bound,
        tolerance: tol,
        pass: membership.q_value <= bound + tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::Analytic;
    use proptest::prelude::*;

    fn exp_on(a: f64, b: f64) -> LocalKernel<f64> {
        LocalKernel::analytic(DomainSet::interval(a, b).unwrap(), Analytic::Exponential { rate: 1.0 })
            .unwrap()
    }

    #[test]
    fn inner_products_of_sections() {
        let f = exp_on(-0.5, 1.5);
        let d = f.domain().clone();
        let k0 = RkhsElement::section(0.0, &d).unwrap();
        let k1 = RkhsElement::section(1.0, &d).unwrap();
        assert_eq!(rkhs_inner(&f, &k0, &k0).unwrap().re, 1.0);
        assert!((rkhs_inner(&f, &k0, &k1).unwrap().re - (-1.0f64).exp()).abs() < 1e-16);
        let anchors = AnchorSet::new(vec![0.0, 1.0], &d).unwrap();
        let u = RkhsElement::new(&anchors, vec![re(1.0), re(-1.0)]).unwrap();
        let want = 2.0 - 2.0 * (-1.0f64).exp();
        assert!((rkhs_norm_sq(&f, &u).unwrap() - want).abs() < 1e-15);
        assert!(rkhs_evaluate(&f, &u, 0.5).unwrap().norm() < 1e-16);
    }

    #[test]
    fn membership_of_sections_and_zero() {
        let f = exp_on(0.0, 1.0);
        let anchors = AnchorSet::uniform(f.domain(), 16, 0.01).unwrap();
        let a = anchors.points()[5];
        let ka = |y: f64| f.evaluate(y - a).unwrap();
        let m = membership_functional(&f, &ka, &anchors).unwrap();
        assert!((m.q_value - 1.0).abs() < 1e-10);
        assert_eq!(m.flag, MembershipFlag::Ok);
        let zero = |_: f64| re(0.0);
        assert_eq!(membership_functional(&f, &zero, &anchors).unwrap().q_value, 0.0);
    }

    #[test]
    fn exponential_kernel_has_two_dimensional_defect_space() {
        let f = exp_on(0.0, 1.0);
        let (u, rep) = uniqueness_diagnostic(&f, &DefSchedule::default()).unwrap();
        assert_eq!(rep.dim, 2);
        assert_eq!(u, Uniqueness::NonUnique { def_dim: 2 });
        // q for e^{x−m} on the chain is constant: 2 sinh(1/2)... plus boundary terms
        for b in &rep.basis {
            assert!(b.growth < 1.01, "{}", b.growth);
        }
    }

    #[test]
    fn constant_kernel_is_unique() {
        let f = LocalKernel::analytic(
            DomainSet::interval(0.0, 1.0).unwrap(),
            Analytic::Constant { value: 1.0 },
        )
        .unwrap();
        let (u, rep) = uniqueness_diagnostic(&f, &DefSchedule::default()).unwrap();
        assert_eq!(u, Uniqueness::Unique);
        assert!(rep.basis[0].steps.iter().all(|s| s.flag == MembershipFlag::OutsideRange));
    }

    #[test]
    fn disconnected_domain_is_rejected() {
        let f = LocalKernel::analytic(
            DomainSet::new(vec![(0.0, 1.0), (2.0, 3.0)]).unwrap(),
            Analytic::Exponential { rate: 1.0 },
        )
        .unwrap();
        assert_eq!(
            def_space_dimension(&f, &DefSchedule::default()).unwrap_err(),
            Error::DomainNotInterval
        );
    }

    #[test]
    fn interpolation_at_the_origin_is_tight() {
        let f = exp_on(0.0, 1.0);
        let g = |z: f64| re((-z.abs()).exp());
        let anchors = AnchorSet::uniform(f.domain(), 32, 0.01).unwrap();
        let v = interpolation_check(&f, &g, 0.0, &anchors, 1e-9).unwrap();
        assert!(v.pass);
        let v = interpolation_check(&f, &g, 3.0, &anchors, 1e-9).unwrap();
        assert!(v.pass && v.membership.q_value <= 1.0);
    }

    proptest! {
        #[test]
        fn reproducing_property(
            pts in prop::collection::btree_set(1u32..999, 1..10),
            cs in prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 10),
            a in 0.001..0.999f64,
        ) {
            let f = exp_on(0.0, 1.0);
            let anchors: Vec<f64> = pts.iter().map(|&k| k as f64 / 1000.0).collect();
            let n = anchors.len();
            let set = AnchorSet::new(anchors, f.domain()).unwrap();
            let coeffs: Vec<_> = cs[..n].iter().map(|&(x, y)| Complex::new(x, y)).collect();
            let u = RkhsElement::new(&set, coeffs).unwrap();
            let scale = rkhs_norm_sq(&f, &u).unwrap().max(0.0).sqrt();
            prop_assert!(reproducing_defect(&f, &u, a).unwrap() <= 1e-12 * scale.max(1e-300) + 1e-15);
        }

        #[test]
        fn inner_product_is_hermitian_and_positive(
            cs in prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 6),
            ds in prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 6),
        ) {
            let f = exp_on(0.0, 1.0);
            let set = AnchorSet::uniform(f.domain(), 6, 0.05).unwrap();
            let u = RkhsElement::new(&set, cs.iter().map(|&(x, y)| Complex::new(x, y)).collect()).unwrap();
            let v = RkhsElement::new(&set, ds.iter().map(|&(x, y)| Complex::new(x, y)).collect()).unwrap();
            let uv = rkhs_inner(&f, &u, &v).unwrap();
            let vu = rkhs_inner(&f, &v, &u).unwrap();
            prop_assert!((uv - vu.conj()).norm() <= 1e-12 * (1.0 + uv.norm()));
            prop_assert!(rkhs_norm_sq(&f, &u).unwrap() >= -1e-12);
        }

        #[test]
        fn membership_grows_along_nested_anchors(b in 0.5..2.0f64) {
            let f = exp_on(0.0, 1.0);
            let g = move |x: f64| re((b * x).cos());
            let mut last = 0.0;
            for n in [3usize, 5, 9, 17, 33] {
                // each grid contains the previous one
                let set = AnchorSet::uniform(f.domain(), n, 0.05).unwrap();
                let q = membership_functional(&f, &g, &set).unwrap().q_value;
                prop_assert!(q >= last * (1.0 - 1e-10));
                last = q;
            }
        }
    }
}
