//! Dense symmetric and Hermitian eigensolvers over any [`Real`].
//!
//! Real symmetric matrices go through Householder tridiagonalisation and the
//! implicit QL iteration. Hermitian matrices `A + iB` are handled through the
//! real symmetric embedding `[[A, -B], [B, A]]`, whose spectrum is that of the
//! Hermitian matrix with every eigenvalue doubled. Quadratic forms and
//! pseudoinverse solves transfer verbatim through the embedding, so complex
//! eigenvectors are never needed.

use ndarray::Array2;
use num_complex::Complex;

use crate::scalar::Real;

/// Eigen-decomposition of a real symmetric matrix. Eigenvalues ascend;
/// column `k` of `vectors` belongs to `values[k]`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen<T> {
    pub values: Vec<T>,
    pub vectors: Array2<T>,
}

/// Eigen-decomposition of a symmetric matrix. Only the lower triangle is
/// read.
pub fn symmetric_eigen<T: Real>(a: &Array2<T>) -> SymmetricEigen<T> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "matrix must be square");
    if n == 0 {
        return SymmetricEigen {
            values: vec![],
            vectors: Array2::zeros((0, 0)),
        };
    }
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            v[i * n + j] = a[[i, j]];
            v[j * n + i] = a[[i, j]];
        }
    }
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tridiagonalize(n, &mut v, &mut d, &mut e);
    implicit_ql(n, &mut v, &mut d, &mut e);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&k| d[k]).collect();
    let mut vectors = Array2::zeros((n, n));
    for (col, &k) in order.iter().enumerate() {
        for row in 0..n {
            vectors[[row, col]] = v[row * n + k];
        }
    }
    SymmetricEigen { values, vectors }
}

/// Eigenvalues only, ascending.
pub fn symmetric_eigenvalues<T: Real>(a: &Array2<T>) -> Vec<T> {
    symmetric_eigen(a).values
}

// Householder reduction to tridiagonal form, accumulating the transform in v.
fn tridiagonalize<T: Real>(n: usize, v: &mut [T], d: &mut [T], e: &mut [T]) {
    let idx = |i: usize, j: usize| i * n + j;
    for j in 0..n {
        d[j] = v[idx(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = T::zero();
        let mut h = T::zero();
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == T::zero() {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[idx(i - 1, j)];
                v[idx(i, j)] = T::zero();
                v[idx(j, i)] = T::zero();
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > T::zero() {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = T::zero();
            }
            for j in 0..i {
                f = d[j];
                v[idx(j, i)] = f;
                g = e[j] + v[idx(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[idx(k, j)] * d[k];
                    e[k] += v[idx(k, j)] * f;
                }
                e[j] = g;
            }
            f = T::zero();
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[idx(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[idx(i - 1, j)];
                v[idx(i, j)] = T::zero();
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        v[idx(n - 1, i)] = v[idx(i, i)];
        v[idx(i, i)] = T::one();
        let h = d[i + 1];
        if h != T::zero() {
            for k in 0..=i {
                d[k] = v[idx(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = T::zero();
                for k in 0..=i {
                    g += v[idx(k, i + 1)] * v[idx(k, j)];
                }
                for k in 0..=i {
                    v[idx(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[idx(k, i + 1)] = T::zero();
        }
    }
    for j in 0..n {
        d[j] = v[idx(n - 1, j)];
        v[idx(n - 1, j)] = T::zero();
    }
    v[idx(n - 1, n - 1)] = T::one();
    e[0] = T::zero();
}

// Implicit QL iteration on the tridiagonal (d, e), rotating v alongside.
fn implicit_ql<T: Real>(n: usize, v: &mut [T], d: &mut [T], e: &mut [T]) {
    const MAX_ITER: usize = 64;
    let idx = |i: usize, j: usize| i * n + j;
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();
    let eps = T::epsilon();
    let two = T::lit(2.0);
    let mut f = T::zero();
    let mut tst1 = T::zero();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        let hk = v[idx(k, i + 1)];
                        v[idx(k, i + 1)] = s * v[idx(k, i)] + c * hk;
                        v[idx(k, i)] = c * v[idx(k, i)] - s * hk;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if !(e[l].abs() > eps * tst1) || iter >= MAX_ITER {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = T::zero();
    }
}

/// True when every entry has an exactly zero imaginary part.
pub fn is_real<T: Real>(a: &Array2<Complex<T>>) -> bool {
    a.iter().all(|z| z.im == T::zero())
}

/// Real symmetric embedding `[[A, -B], [B, A]]` of `A + iB`.
pub fn real_embedding<T: Real>(a: &Array2<Complex<T>>) -> Array2<T> {
    let n = a.nrows();
    let mut out = Array2::zeros((2 * n, 2 * n));
    for i in 0..n {
        for j in 0..n {
            let z = a[[i, j]];
            out[[i, j]] = z.re;
            out[[i + n, j + n]] = z.re;
            out[[i, j + n]] = -z.im;
            out[[i + n, j]] = z.im;
        }
    }
    out
}

fn real_part<T: Real>(a: &Array2<Complex<T>>) -> Array2<T> {
    a.mapv(|z| z.re)
}

/// Eigenvalues of a Hermitian matrix, ascending. Only the lower triangle of
/// the real form is read, so tiny non-Hermitian noise is ignored.
pub fn hermitian_eigenvalues<T: Real>(a: &Array2<Complex<T>>) -> Vec<T> {
    if is_real(a) {
        return symmetric_eigenvalues(&real_part(a));
    }
    let doubled = symmetric_eigenvalues(&real_embedding(a));
    doubled
        .chunks(2)
        .map(|pair| (pair[0] + pair[1]) / T::lit(2.0))
        .collect()
}

/// Hermitian positive semidefinite matrix prepared for pseudoinverse work.
///
/// Eigenvalues below `cutoff * λ_max` are discarded. Every query works in the
/// real form, so the complex case costs a factor of eight over the real one.
#[derive(Debug, Clone)]
pub struct PseudoInverse<T> {
    eigen: SymmetricEigen<T>,
    complex: bool,
    n: usize,
    threshold: T,
}

impl<T: Real> PseudoInverse<T> {
    pub fn new(a: &Array2<Complex<T>>, cutoff: T) -> Self {
        let n = a.nrows();
        let complex = !is_real(a);
        let eigen = if complex {
            symmetric_eigen(&real_embedding(a))
        } else {
            symmetric_eigen(&real_part(a))
        };
        let lmax = eigen.values.last().copied().unwrap_or(T::zero());
        let threshold = if lmax > T::zero() {
            cutoff * lmax
        } else {
            T::zero()
        };
        PseudoInverse {
            eigen,
            complex,
            n,
            threshold,
        }
    }

    pub fn with_default_cutoff(a: &Array2<Complex<T>>) -> Self {
        Self::new(a, T::gram_cutoff())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Eigenvalues of the original Hermitian matrix, ascending.
    pub fn eigenvalues(&self) -> Vec<T> {
        if self.complex {
            self.eigen
                .values
                .chunks(2)
                .map(|p| (p[0] + p[1]) / T::lit(2.0))
                .collect()
        } else {
            self.eigen.values.clone()
        }
    }

    pub fn max_eigenvalue(&self) -> T {
        self.eigen.values.last().copied().unwrap_or(T::zero())
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eigen.values.first().copied().unwrap_or(T::zero())
    }

    /// `λ_max / λ_min`, infinite when the smallest eigenvalue is not positive.
    pub fn condition_number(&self) -> T {
        let lmin = self.min_eigenvalue();
        if lmin <= T::zero() {
            T::infinity()
        } else {
            self.max_eigenvalue() / lmin
        }
    }

    /// Number of retained eigenvalues of the Hermitian matrix.
    pub fn rank(&self) -> usize {
        let kept = self.kept().count();
        if self.complex {
            kept / 2
        } else {
            kept
        }
    }

    fn kept(&self) -> impl Iterator<Item = usize> + '_ {
        self.eigen
            .values
            .iter()
            .enumerate()
            .filter(move |(_, &l)| l > self.threshold)
            .map(|(k, _)| k)
    }

    fn lift(&self, g: &[Complex<T>]) -> Vec<T> {
        assert_eq!(g.len(), self.n, "vector length must match matrix size");
        if self.complex {
            g.iter().map(|z| z.re).chain(g.iter().map(|z| z.im)).collect()
        } else {
            g.iter().map(|z| z.re).collect()
        }
    }

    fn coefficients(&self, lifted: &[T]) -> Vec<(usize, T)> {
        let v = &self.eigen.vectors;
        self.kept()
            .map(|k| {
                let mut c = T::zero();
                for (i, &x) in lifted.iter().enumerate() {
                    c += v[[i, k]] * x;
                }
                (k, c)
            })
            .collect()
    }

    /// `g^H A^+ g`.
    pub fn quadratic_form(&self, g: &[Complex<T>]) -> T {
        if !self.complex && g.iter().any(|z| z.im != T::zero()) {
            // real A: the form splits over real and imaginary parts.
            let re: Vec<_> = g.iter().map(|z| Complex::new(z.re, T::zero())).collect();
            let im: Vec<_> = g.iter().map(|z| Complex::new(z.im, T::zero())).collect();
            return self.quadratic_form(&re) + self.quadratic_form(&im);
        }
        let lifted = self.lift(g);
        let mut q = T::zero();
        for (k, c) in self.coefficients(&lifted) {
            q += c * c / self.eigen.values[k];
        }
        q
    }

    /// `A^+ b`.
    pub fn solve(&self, b: &[Complex<T>]) -> Vec<Complex<T>> {
        if !self.complex && b.iter().any(|z| z.im != T::zero()) {
            let re: Vec<_> = b.iter().map(|z| Complex::new(z.re, T::zero())).collect();
            let im: Vec<_> = b.iter().map(|z| Complex::new(z.im, T::zero())).collect();
            let xr = self.solve(&re);
            let xi = self.solve(&im);
            return xr
                .iter()
                .zip(&xi)
                .map(|(a, b)| Complex::new(a.re, b.re))
                .collect();
        }
        let lifted = self.lift(b);
        let m = lifted.len();
        let mut x = vec![T::zero(); m];
        for (k, c) in self.coefficients(&lifted) {
            let s = c / self.eigen.values[k];
            for (i, xi) in x.iter_mut().enumerate() {
                *xi += s * self.eigen.vectors[[i, k]];
            }
        }
        if self.complex {
            (0..self.n)
                .map(|i| Complex::new(x[i], x[i + self.n]))
                .collect()
        } else {
            x.into_iter().map(|r| Complex::new(r, T::zero())).collect()
        }
    }

    /// `‖g − P g‖ / ‖g‖` where `P` projects onto the retained eigenspace;
    /// zero for the zero vector.
    pub fn range_residual(&self, g: &[Complex<T>]) -> T {
        let norm2: T = g.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr());
        if norm2 == T::zero() {
            return T::zero();
        }
        let parts: Vec<Vec<T>> = if !self.complex && g.iter().any(|z| z.im != T::zero()) {
            vec![
                g.iter().map(|z| z.re).collect(),
                g.iter().map(|z| z.im).collect(),
            ]
        } else {
            vec![self.lift(g)]
        };
        let v = &self.eigen.vectors;
        let mut resid2 = T::zero();
        for lifted in parts {
            let mut r = lifted.clone();
            for (k, c) in self.coefficients(&lifted) {
                for (i, ri) in r.iter_mut().enumerate() {
                    *ri -= c * v[[i, k]];
                }
            }
            resid2 += r.iter().fold(T::zero(), |acc, &x| acc + x * x);
        }
        (resid2 / norm2).sqrt()
    }
}

/// `max_{ij} |a_ij − conj(a_ji)|`.
pub fn hermitian_asymmetry<T: Real>(a: &Array2<Complex<T>>) -> T {
    let n = a.nrows();
    let mut worst = T::zero();
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((a[[i, j]] - a[[j, i]].conj()).norm());
        }
    }
    worst
}

/// Spectral norm of a Hermitian matrix.
pub fn hermitian_spectral_norm<T: Real>(a: &Array2<Complex<T>>) -> T {
    let ev = hermitian_eigenvalues(a);
    match (ev.first(), ev.last()) {
        (Some(&lo), Some(&hi)) => lo.abs().max(hi.abs()),
        _ => T::zero(),
    }
}

/// Complex matrix product.
pub fn matmul<T: Real>(a: &Array2<Complex<T>>, b: &Array2<Complex<T>>) -> Array2<Complex<T>> {
    let (n, k) = a.dim();
    let (k2, m) = b.dim();
    assert_eq!(k, k2, "inner dimensions must agree");
    let mut out = Array2::from_elem((n, m), Complex::new(T::zero(), T::zero()));
    for i in 0..n {
        for l in 0..k {
            let ail = a[[i, l]];
            if ail.re == T::zero() && ail.im == T::zero() {
                continue;
            }
            for j in 0..m {
                out[[i, j]] = out[[i, j]] + ail * b[[l, j]];
            }
        }
    }
    out
}

/// Conjugate transpose.
pub fn adjoint<T: Real>(a: &Array2<Complex<T>>) -> Array2<Complex<T>> {
    a.t().mapv(|z| z.conj())
}
