//! Seeded random measurement matrices, sparse signals and noise.

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, DenseVector, NormExponent};
use crate::rng::{RngSeed, SplitMix64};
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

/// Dimensions of a D-left regular bipartite graph: N left vertices each with
/// exactly D distinct right neighbors out of M.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GraphSpec {
    pub m: usize,
    pub n: usize,
    pub d: usize,
}

/// i.i.d. N(0, 1/M) entries.
pub fn gaussian_matrix(m: usize, n: usize, seed: RngSeed) -> Result<DenseMatrix> {
    if m == 0 || n == 0 {
        return Err(Error::Dimension("dimensions must be positive".into()));
    }
    let mut rng = SplitMix64::new(seed);
    let scale = 1.0 / (m as f64).sqrt();
    let entries: Vec<f64> = (0..m * n)
        .map(|_| {
            let g: f64 = StandardNormal.sample(&mut rng);
            scale * g
        })
        .collect();
    DenseMatrix::new(m, n, entries)
}

/// Picks `take` distinct values from 0..pool by partial Fisher-Yates.
fn sample_without_replacement(pool: usize, take: usize, rng: &mut SplitMix64) -> Vec<usize> {
    let mut items: Vec<usize> = (0..pool).collect();
    for i in 0..take {
        let j = i + rng.random_range(0..pool - i);
        items.swap(i, j);
    }
    items.truncate(take);
    items
}

/// Random walk matrix of a uniformly random D-left regular bipartite graph:
/// every column holds a uniform size-D subset of rows with entries 1/D.
pub fn lrbg_matrix(spec: GraphSpec, seed: RngSeed) -> Result<DenseMatrix> {
    let GraphSpec { m, n, d } = spec;
    if m == 0 || n == 0 {
        return Err(Error::Dimension("dimensions must be positive".into()));
    }
    if d == 0 || d > m {
        return Err(Error::Dimension(format!(
            "left degree {d} out of range [1, {m}]"
        )));
    }
    let mut rng = SplitMix64::new(seed);
    let mut a = DenseMatrix::zeros(m, n);
    let weight = 1.0 / d as f64;
    for col in 0..n {
        for row in sample_without_replacement(m, d, &mut rng) {
            a.set(row, col, weight);
        }
    }
    Ok(a)
}

/// Uniform direction on the lq unit sphere of R^dim: normalized Gaussians for
/// q = 2, Dirichlet(1,..,1) magnitudes with independent uniform signs for q = 1.
fn sphere_direction(dim: usize, q: NormExponent, rng: &mut SplitMix64) -> Result<Vec<f64>> {
    match q {
        NormExponent::Two => loop {
            let g: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
            let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                return Ok(g.into_iter().map(|x| x / norm).collect());
            }
        },
        NormExponent::One => loop {
            let mag: Vec<f64> = (0..dim).map(|_| Exp1.sample(rng)).collect();
            let signs: Vec<f64> = (0..dim)
                .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
                .collect();
            let total: f64 = mag.iter().sum();
            if total > 0.0 {
                return Ok(mag
                    .iter()
                    .zip(&signs)
                    .map(|(m, s)| s * m / total)
                    .collect());
            }
        },
        NormExponent::Inf => Err(Error::UnsupportedNorm("inf".into())),
    }
}

/// Uniform draw from the S-sparse vectors on the lq unit sphere: a uniform
/// size-S support carrying a uniform point of the lq sphere of R^S.
pub fn sparse_signal_on_sphere(
    n: usize,
    s: usize,
    q: NormExponent,
    seed: RngSeed,
) -> Result<DenseVector> {
    if s == 0 || s > n {
        return Err(Error::Dimension(format!(
            "sparsity {s} out of range [1, {n}]"
        )));
    }
    let mut rng = SplitMix64::new(seed);
    let support = sample_without_replacement(n, s, &mut rng);
    let values = sphere_direction(s, q, &mut rng)?;
    let mut out = vec![0.0; n];
    for (idx, val) in support.into_iter().zip(values) {
        out[idx] = val;
    }
    DenseVector::new(out)
}

/// Uniform draw from the lq sphere of radius `radius` in R^m.
pub fn noise_on_sphere(
    m: usize,
    q: NormExponent,
    radius: f64,
    seed: RngSeed,
) -> Result<DenseVector> {
    if radius < 0.0 {
        return Err(Error::Domain(format!("negative radius {radius}")));
    }
    if radius == 0.0 {
        return Ok(DenseVector::zeros(m));
    }
    let mut rng = SplitMix64::new(seed);
    let dir = sphere_direction(m, q, &mut rng)?;
    DenseVector::new(dir.into_iter().map(|x| radius * x).collect())
}
