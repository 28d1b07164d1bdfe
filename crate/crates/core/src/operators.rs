//! The space `W_F = {F_φ}` of smoothed kernels, its inner product, and the
//! matrix elements of `S^F : F_φ ↦ −i F_{φ'}` on a bump basis.

use ndarray::Array2;
use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::LocalKernel;
use crate::linalg::{real_embedding, symmetric_eigen, symmetric_eigenvalues};
use crate::quadrature::{double_integral, smoothed_value, BumpFunction, QuadratureSpec, TestFunction};
use crate::scalar::{re, Real};

fn check_supports<T: Real>(f: &LocalKernel<T>, phi: &TestFunction<T>) -> Result<()> {
    for b in phi.bumps() {
        let (lo, hi) = b.support();
        let inside = f
            .domain()
            .intervals()
            .iter()
            .any(|&(a, c)| a < lo && hi < c);
        if !inside {
            return Err(Error::InvalidArgument(format!(
                "bump support [{lo}, {hi}] is not inside the domain"
            )));
        }
    }
    Ok(())
}

/// `F_φ(x) = ∫ F(x − y) φ(y) dy`.
pub fn wf_evaluate<T: Real>(
    f: &LocalKernel<T>,
    phi: &TestFunction<T>,
    x: T,
    q: QuadratureSpec,
) -> Result<Complex<T>> {
    check_supports(f, phi)?;
    smoothed_value(f, phi, x, q)
}

/// `⟨F_φ, F_ψ⟩ = ∫∫ F(y − x) φ(x) conj ψ(y) dx dy`.
pub fn wf_inner<T: Real>(
    f: &LocalKernel<T>,
    phi: &TestFunction<T>,
    psi: &TestFunction<T>,
    q: QuadratureSpec,
) -> Result<Complex<T>> {
    check_supports(f, phi)?;
    check_supports(f, psi)?;
    double_integral(f, phi, psi, q)
}

/// `D[i][k] = ⟨F_{φ_i'}, F_{φ_k}⟩` and `G[i][k] = ⟨F_{φ_i}, F_{φ_k}⟩`.
struct BasisForms<T> {
    derivative: Array2<Complex<T>>,
    gram: Array2<Complex<T>>,
}

fn basis_forms<T: Real>(
    f: &LocalKernel<T>,
    basis: &[TestFunction<T>],
    q: QuadratureSpec,
) -> Result<BasisForms<T>> {
    let n = basis.len();
    let zero = re(T::zero());
    let mut derivative = Array2::from_elem((n, n), zero);
    let mut gram = Array2::from_elem((n, n), zero);
    let primes = basis
        .iter()
        .map(TestFunction::derivative)
        .collect::<Result<Vec<_>>>()?;
    for i in 0..n {
        for k in 0..n {
            derivative[[i, k]] = wf_inner(f, &primes[i], &basis[k], q)?;
            if k >= i {
                let g = wf_inner(f, &basis[i], &basis[k], q)?;
                gram[[i, k]] = g;
                gram[[k, i]] = g.conj();
            }
        }
        gram[[i, i]] = re(gram[[i, i]].re);
    }
    Ok(BasisForms { derivative, gram })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairDefect<T> {
    pub pair: (usize, usize),
    pub defect: T,
    pub nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefectReport<T> {
    pub max_defect: T,
    pub pairs: Vec<PairDefect<T>>,
}

fn bump_basis<T: Real>(basis: &[BumpFunction<T>]) -> Vec<TestFunction<T>> {
    basis.iter().copied().map(TestFunction::from).collect()
}

fn collect_pairs<T: Real>(n: usize, nodes: usize, defect: impl Fn(usize, usize) -> T) -> DefectReport<T> {
    let mut pairs = Vec::with_capacity(n * n);
    let mut max_defect = T::zero();
    for i in 0..n {
        for k in 0..n {
            let d = defect(i, k);
            max_defect = max_defect.max(d);
            pairs.push(PairDefect {
                pair: (i, k),
                defect: d,
                nodes,
            });
        }
    }
    DefectReport { max_defect, pairs }
}

/// `max_{i,k} |⟨F_{φ_i'}, F_{φ_k}⟩ + ⟨F_{φ_i}, F_{φ_k'}⟩|`, which vanishes
/// exactly for positive definite `F`; what remains is quadrature error.
pub fn hermitian_defect<T: Real>(
    f: &LocalKernel<T>,
    basis: &[BumpFunction<T>],
    q: QuadratureSpec,
) -> Result<DefectReport<T>> {
    let forms = basis_forms(f, &bump_basis(basis), q)?;
    let d = &forms.derivative;
    // ⟨F_{φ_i}, F_{φ_k'}⟩ = conj ⟨F_{φ_k'}, F_{φ_i}⟩
    Ok(collect_pairs(basis.len(), q.nodes_per_axis, |i, k| {
        (d[[i, k]] + d[[k, i]].conj()).norm()
    }))
}

/// Bendixson enclosure of the spectrum of the pencil `(M, G)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PencilReport<T> {
    /// Eigenvalues of the Hermitian part of `G^{-1/2} M G^{-1/2}`; every
    /// generalized eigenvalue has real part between the extremes.
    pub hermitian_part_eigenvalues: Vec<T>,
    /// Spectral norm of the skew-Hermitian part: a bound on `|Im λ|`.
    pub imaginary_bound: T,
    /// Number of `G` eigen-directions kept after the relative cutoff.
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SjfMatrices<T> {
    /// `M[i][k] = ⟨S F_{φ_i}, F_{φ_k}⟩ = −i ⟨F_{φ_i'}, F_{φ_k}⟩`.
    pub m: Array2<Complex<T>>,
    /// `G[i][k] = ⟨F_{φ_i}, F_{φ_k}⟩`.
    pub g: Array2<Complex<T>>,
    /// `max |M − M^H|`.
    pub asymmetry: T,
    pub pencil: PencilReport<T>,
}

pub fn sjf_matrix<T: Real>(
    f: &LocalKernel<T>,
    basis: &[BumpFunction<T>],
    q: QuadratureSpec,
) -> Result<SjfMatrices<T>> {
    let forms = basis_forms(f, &bump_basis(basis), q)?;
    let minus_i = Complex::new(T::zero(), -T::one());
    let m = forms.derivative.mapv(|z| z * minus_i);
    let n = basis.len();
    let mut asymmetry = T::zero();
    for i in 0..n {
        for k in 0..n {
            asymmetry = asymmetry.max((m[[i, k]] - m[[k, i]].conj()).norm());
        }
    }
    let pencil = pencil_enclosure(&m, &forms.gram);
    Ok(SjfMatrices {
        m,
        g: forms.gram,
        asymmetry,
        pencil,
    })
}

/// Reduces `(M, G)` to `C = G^{-1/2} M G^{-1/2}` on the retained range of
/// `G` (in the real embedding) and bounds its spectrum.
pub fn pencil_enclosure<T: Real>(m: &Array2<Complex<T>>, g: &Array2<Complex<T>>) -> PencilReport<T> {
    let gr = symmetric_eigen(&real_embedding(g));
    let mr = real_embedding(m);
    let lmax = gr.values.last().copied().unwrap_or(T::zero());
    let kept: Vec<usize> = (0..gr.values.len())
        .filter(|&k| gr.values[k] > T::gram_cutoff() * lmax && gr.values[k] > T::zero())
        .collect();
    let dim = mr.nrows();
    let r = kept.len();
    // W = V_kept Λ^{-1/2}
    let mut w = Array2::zeros((dim, r));
    for (col, &k) in kept.iter().enumerate() {
        let s = gr.values[k].sqrt().recip();
        for row in 0..dim {
            w[[row, col]] = gr.vectors[[row, k]] * s;
        }
    }
    let c = w.t().dot(&mr).dot(&w);
    let half = T::lit(0.5);
    let sym = (&c + &c.t()).mapv(|x| x * half);
    let skew = (&c - &c.t()).mapv(|x| x * half);
    let sym_eigs = symmetric_eigenvalues(&sym);
    let kk = skew.t().dot(&skew);
    let imaginary_bound = symmetric_eigenvalues(&kk)
        .last()
        .copied()
        .unwrap_or(T::zero())
        .max(T::zero())
        .sqrt();
    PencilReport {
        // the embedding doubles every eigenvalue
        hermitian_part_eigenvalues: sym_eigs
            .chunks(2)
            .map(|p| if p.len() == 2 { (p[0] + p[1]) * half } else { p[0] })
            .collect(),
        imaginary_bound,
        rank: r / 2,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjugationReport<T> {
    /// `max |⟨S F_{φ_K}, F_{ψ_K}⟩ − conj ⟨S F_φ, F_ψ⟩|`.
    pub operator: DefectReport<T>,
    /// `max |⟨F_{φ_K}, F_{ψ_K}⟩ − conj ⟨F_φ, F_ψ⟩|`.
    pub gram: DefectReport<T>,
    pub max_defect: T,
}

/// Commutation of `S^F` with the conjugation `J F_φ = F_{φ_K}`, where
/// `φ_K(t) = conj φ(p + r − t)` on `Ω = (p, r)`, tested on matrix elements.
pub fn conjugation_check<T: Real>(
    f: &LocalKernel<T>,
    basis: &[BumpFunction<T>],
    q: QuadratureSpec,
) -> Result<ConjugationReport<T>> {
    let (p, r) = match f.domain().intervals() {
        [(p, r)] => (*p, *r),
        _ => return Err(Error::DomainNotInterval),
    };
    let plain = bump_basis(basis);
    let mirrored: Vec<TestFunction<T>> = plain.iter().map(|phi| phi.reflected(p, r)).collect();
    let a = basis_forms(f, &plain, q)?;
    let b = basis_forms(f, &mirrored, q)?;
    let minus_i = Complex::new(T::zero(), -T::one());
    let n = basis.len();
    let operator = collect_pairs(n, q.nodes_per_axis, |i, k| {
        (b.derivative[[i, k]] * minus_i - (a.derivative[[i, k]] * minus_i).conj()).norm()
    });
    let gram = collect_pairs(n, q.nodes_per_axis, |i, k| {
        (b.gram[[i, k]] - a.gram[[i, k]].conj()).norm()
    });
    let max_defect = operator.max_defect.max(gram.max_defect);
    Ok(ConjugationReport {
        operator,
        gram,
        max_defect,
    })
}

/// `n` evenly spaced bumps on `Ω = (p, r)` with a relative edge margin.
/// Widths alternate between the spacing and 0.7 of it, so neighbours overlap
/// and the quadrature nodes of neighbouring bumps are not aligned.
pub fn default_basis<T: Real>(f: &LocalKernel<T>, n: usize, margin: T) -> Result<Vec<BumpFunction<T>>> {
    let (p, r) = match f.domain().intervals() {
        [(p, r)] if p.is_finite() && r.is_finite() => (*p, *r),
        _ => return Err(Error::DomainNotInterval),
    };
    if n == 0 {
        return Err(Error::InvalidArgument("basis needs at least one bump".into()));
    }
    let pad = margin * (r - p);
    let (lo, hi) = (p + pad, r - pad);
    let s = (hi - lo) / T::from_count(n + 1);
    (0..n)
        .map(|k| {
            let w = if k % 2 == 0 { s } else { s * T::lit(0.7) };
            BumpFunction::new(lo + s * T::from_count(k + 1), w)
        })
        .collect()
}
