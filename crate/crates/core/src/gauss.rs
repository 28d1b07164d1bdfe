//! Gaussian processes with covariance `F(s − t)` (stationary) or
//! `½(G(s) + G(t) − G(s − t))` (stationary increments, pinned at zero).
//!
//! Every path draws its normals from its own ChaCha stream keyed by
//! `(seed, path index)`, so output does not depend on the thread count.

use std::io::Write;

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{check_conditionally_negative, gram_matrix, Evaluate};
use crate::linalg::symmetric_eigen;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct GpPaths<T> {
    pub grid: Vec<T>,
    /// `n_paths × n_points`.
    pub paths: Array2<T>,
    pub seed: u64,
}

impl<T: Real> GpPaths<T> {
    pub fn n_paths(&self) -> usize {
        self.paths.nrows()
    }

    /// Header of grid times, then one row per path.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.grid.iter().map(|t| t.to_string()))?;
        for row in self.paths.rows() {
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
        w.flush().map_err(|e| Error::Parse(e.to_string()))?;
        Ok(())
    }
}

/// `X = V √Λ Z` with negative eigenvalues down to `−clip` set to zero.
struct Factor<T> {
    factor: Array2<T>,
}

impl<T: Real> Factor<T> {
    fn new(cov: &Array2<T>, clip: T) -> Result<Self> {
        let eig = symmetric_eigen(cov);
        let n = cov.nrows();
        let mut factor = eig.vectors;
        for (k, &l) in eig.values.iter().enumerate() {
            if l < -clip {
                return Err(Error::NotPsd {
                    min_eigenvalue: l.as_f64(),
                });
            }
            let s = l.max(T::zero()).sqrt();
            for row in 0..n {
                factor[[row, k]] *= s;
            }
        }
        Ok(Factor { factor })
    }

    fn sample(&self, n_paths: usize, seed: u64) -> Array2<T> {
        let n = self.factor.nrows();
        let rows: Vec<Vec<T>> = (0..n_paths)
            .into_par_iter()
            .map(|p| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(p as u64);
                let z: Vec<T> = (0..n)
                    .map(|_| T::lit(StandardNormal.sample(&mut rng)))
                    .collect();
                (0..n)
                    .map(|i| {
                        self.factor
                            .row(i)
                            .iter()
                            .zip(&z)
                            .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
                    })
                    .collect()
            })
            .collect();
        let mut out = Array2::zeros((n_paths, n));
        for (p, row) in rows.into_iter().enumerate() {
            for (i, v) in row.into_iter().enumerate() {
                out[[p, i]] = v;
            }
        }
        out
    }
}

fn real_covariance<T: Real, F: Evaluate<T> + ?Sized>(f: &F, grid: &[T]) -> Result<Array2<T>> {
    let k = gram_matrix(f, grid)?;
    let scale = k.iter().fold(T::zero(), |m, z| m.max(z.norm()));
    let worst_im = k.iter().fold(T::zero(), |m, z| m.max(z.im.abs()));
    if worst_im > T::lit(1e-12) * T::one().max(scale) {
        return Err(Error::ComplexKernel(worst_im.as_f64()));
    }
    Ok(k.mapv(|z| z.re))
}

fn check_grid<T: Real>(grid: &[T], n_paths: usize) -> Result<()> {
    if grid.is_empty() || grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidGrid("sampling grid must be nonempty and finite".into()));
    }
    if n_paths == 0 {
        return Err(Error::InvalidArgument("at least one path is required".into()));
    }
    Ok(())
}

/// Zero-mean paths with covariance `F(s − t) + jitter·δ_{st}`. The jitter
/// defaults to `1e−10·F(0)`; eigenvalues down to `−1e−10·max(1, F(0))` are
/// clipped, anything lower is [`Error::NotPsd`].
pub fn sample_stationary<T: Real, F: Evaluate<T> + ?Sized>(
    f: &F,
    grid: &[T],
    n_paths: usize,
    seed: u64,
    jitter: Option<T>,
) -> Result<GpPaths<T>> {
    check_grid(grid, n_paths)?;
    let mut cov = real_covariance(f, grid)?;
    let f0 = f.evaluate(T::zero())?.re;
    let jitter = jitter.unwrap_or(T::lit(1e-10) * f0.abs());
    for i in 0..grid.len() {
        cov[[i, i]] += jitter;
    }
    let factor = Factor::new(&cov, T::lit(1e-10) * T::one().max(f0.abs()))?;
    Ok(GpPaths {
        grid: grid.to_vec(),
        paths: factor.sample(n_paths, seed),
        seed,
    })
}

/// `K(s, t) = ½(G(s) + G(t) − G(s − t))`.
pub fn increment_covariance<T: Real, G: Evaluate<T> + ?Sized>(g: &G, grid: &[T]) -> Result<Array2<T>> {
    let n = grid.len();
    let half = T::lit(0.5);
    let gs: Vec<T> = grid
        .iter()
        .map(|&s| g.evaluate(s).map(|v| v.re))
        .collect::<Result<_>>()?;
    let mut k = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let v = half * (gs[i] + gs[j] - g.evaluate(grid[i] - grid[j])?.re);
            k[[i, j]] = v;
            k[[j, i]] = v;
        }
    }
    Ok(k)
}

/// Paths with `X_{t_0} = 0` (requires `t_0 = 0`) and
/// `E|X_s − X_t|² = G(s − t)` for a conditionally negative definite `G`.
pub fn sample_stationary_increment<T: Real, G: Evaluate<T> + ?Sized>(
    g: &G,
    grid: &[T],
    n_paths: usize,
    seed: u64,
) -> Result<GpPaths<T>> {
    check_grid(grid, n_paths)?;
    if grid[0] != T::zero() {
        return Err(Error::InvalidGrid(format!(
            "increment grid must start at 0, starts at {}",
            grid[0]
        )));
    }
    let scale = grid
        .iter()
        .map(|&t| g.evaluate(t).map(|v| v.norm()))
        .collect::<Result<Vec<T>>>()?
        .into_iter()
        .fold(T::one(), T::max);
    let tol = T::lit(1e-10) * scale;
    let verdict = check_conditionally_negative(g, grid, tol)?;
    if !verdict.pass {
        return Err(Error::NotCnd(format!(
            "largest projected eigenvalue {:e}, G(0) = {:e}",
            verdict.max_projected_eigenvalue.as_f64(),
            verdict.value_at_zero.as_f64()
        )));
    }
    let cov = increment_covariance(g, grid)?;
    let factor = Factor::new(&cov, tol)?;
    let mut paths = factor.sample(n_paths, seed);
    paths.column_mut(0).fill(T::zero());
    Ok(GpPaths {
        grid: grid.to_vec(),
        paths,
        seed,
    })
}

/// `C[s][t] = (1/n) Σ_p X_p(s) X_p(t)`.
pub fn empirical_covariance<T: Real>(paths: &GpPaths<T>) -> Result<Array2<T>> {
    let n = paths.n_paths();
    if n < 2 {
        return Err(Error::TooFewPaths(n));
    }
    let p = &paths.paths;
    Ok(p.t().dot(p).mapv(|v| v / T::from_count(n)))
}

/// `D[s][t] = (1/n) Σ_p |X_p(s) − X_p(t)|²`.
pub fn empirical_increment_moments<T: Real>(paths: &GpPaths<T>) -> Result<Array2<T>> {
    let c = empirical_covariance(paths)?;
    let m = c.nrows();
    Ok(Array2::from_shape_fn((m, m), |(i, j)| {
        c[[i, i]] + c[[j, j]] - T::lit(2.0) * c[[i, j]]
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CovarianceReport<T> {
    pub n_paths: usize,
    pub max_abs_error: T,
    pub rms_error: T,
    /// `max |C[i+1][j+1] − C[i][j]|`; meaningful for uniform grids and
    /// stationary processes.
    pub shift_defect: T,
}

pub fn covariance_report<T: Real>(paths: &GpPaths<T>, model: &Array2<T>) -> Result<CovarianceReport<T>> {
    let c = empirical_covariance(paths)?;
    if c.dim() != model.dim() {
        return Err(Error::InvalidArgument("model covariance has the wrong shape".into()));
    }
    let mut max_abs_error = T::zero();
    let mut sq = T::zero();
    for (a, b) in c.iter().zip(model) {
        let d = (*a - *b).abs();
        max_abs_error = max_abs_error.max(d);
        sq += d * d;
    }
    let m = c.nrows();
    let mut shift_defect = T::zero();
    for i in 0..m.saturating_sub(1) {
        for j in 0..m - 1 {
            shift_defect = shift_defect.max((c[[i + 1, j + 1]] - c[[i, j]]).abs());
        }
    }
    Ok(CovarianceReport {
        n_paths: paths.n_paths(),
        max_abs_error,
        rms_error: (sq / T::from_count(c.len())).sqrt(),
        shift_defect,
    })
}

/// `F(s − t)` on the grid, real part.
pub fn stationary_covariance<T: Real, F: Evaluate<T> + ?Sized>(f: &F, grid: &[T]) -> Result<Array2<T>> {
    real_covariance(f, grid)
}
