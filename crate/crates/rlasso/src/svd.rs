//! One-sided Jacobi SVD, pseudoinverse of the transpose and operator norms.

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, DenseVector};
use crate::rng::{RngSeed, SplitMix64};
use rand::Rng;

/// Thin SVD A = U diag(sigma) V^T with positive singular values in
/// nonincreasing order; r is the numerical rank.
#[derive(Clone, Debug)]
pub struct SvdFactorization {
    pub u: DenseMatrix,
    pub singular_values: Vec<f64>,
    pub v: DenseMatrix,
    pub rank: usize,
}

const MAX_SWEEPS: usize = 64;

/// One-sided Jacobi on the taller orientation. Columns of the working matrix
/// are rotated pairwise until mutually orthogonal; their norms are the
/// singular values.
pub fn svd(a: &DenseMatrix) -> Result<SvdFactorization> {
    let transposed = a.rows() < a.cols();
    let b = if transposed { a.transpose() } else { a.clone() };
    let m = b.rows();
    let n = b.cols();

    // Column-major working copy of b.
    let mut cols: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..m).map(|i| b.get(i, j)).collect())
        .collect();
    // Accumulated right rotations, column-major n x n.
    let mut vcols: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    let tol = 1e-15;
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (alpha, beta, gamma) = {
                    let (cp, cq) = (&cols[p], &cols[q]);
                    let mut alpha = 0.0;
                    let mut beta = 0.0;
                    let mut gamma = 0.0;
                    for i in 0..m {
                        alpha += cp[i] * cp[i];
                        beta += cq[i] * cq[i];
                        gamma += cp[i] * cq[i];
                    }
                    (alpha, beta, gamma)
                };
                if gamma.abs() <= tol * (alpha * beta).sqrt() || alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (lo, hi) = cols.split_at_mut(q);
                let (cp, cq) = (&mut lo[p], &mut hi[0]);
                for i in 0..m {
                    let xp = cp[i];
                    let xq = cq[i];
                    cp[i] = c * xp - s * xq;
                    cq[i] = s * xp + c * xq;
                }
                let (lo, hi) = vcols.split_at_mut(q);
                let (vp, vq) = (&mut lo[p], &mut hi[0]);
                for i in 0..n {
                    let xp = vp[i];
                    let xq = vq[i];
                    vp[i] = c * xp - s * xq;
                    vq[i] = s * xp + c * xq;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numerical(format!(
            "one-sided Jacobi SVD did not converge in {MAX_SWEEPS} sweeps"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap());
    let sigma_max = norms[order[0]];
    let cutoff = (a.rows().max(a.cols())) as f64 * f64::EPSILON * sigma_max;
    let rank = order.iter().take_while(|&&j| norms[j] > cutoff).count();
    if rank == 0 {
        return Err(Error::Numerical("matrix is numerically zero".into()));
    }

    // Left factor of b: normalized columns; right factor: accumulated rotations.
    let mut ub = DenseMatrix::zeros(m, rank);
    let mut vb = DenseMatrix::zeros(n, rank);
    let mut singular_values = Vec::with_capacity(rank);
    for (k, &j) in order.iter().take(rank).enumerate() {
        let sigma = norms[j];
        singular_values.push(sigma);
        for i in 0..m {
            ub.set(i, k, cols[j][i] / sigma);
        }
        for i in 0..n {
            vb.set(i, k, vcols[j][i]);
        }
    }

    let (u, v) = if transposed { (vb, ub) } else { (ub, vb) };
    Ok(SvdFactorization {
        u,
        singular_values,
        v,
        rank,
    })
}

/// Moore-Penrose inverse of A^T for surjective A: (A^T)^+ = U Sigma^-1 V^T,
/// an M x N matrix with (A^T)^+ A^T = I_M.
pub fn pseudoinverse_of_transpose(a: &DenseMatrix) -> Result<DenseMatrix> {
    let m = a.rows();
    let f = svd(a)?;
    if f.rank < m {
        return Err(Error::RankDeficient {
            rank: f.rank,
            rows: m,
        });
    }
    let mut out = DenseMatrix::zeros(m, a.cols());
    for i in 0..m {
        for j in 0..a.cols() {
            let mut acc = 0.0;
            for k in 0..f.rank {
                acc += f.u.get(i, k) / f.singular_values[k] * f.v.get(j, k);
            }
            out.set(i, j, acc);
        }
    }
    Ok(out)
}

/// Maximum absolute row sum (the infinity-to-infinity operator norm).
pub fn inf_to_inf_norm(b: &DenseMatrix) -> f64 {
    (0..b.rows())
        .map(|i| b.row(i).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Largest singular value via power iteration on A^T A. The returned value
/// never exceeds sigma_max and reaches it to relative accuracy `tol` for
/// generic starts.
pub fn operator_norm_estimate(a: &DenseMatrix, tol: f64, max_iter: usize) -> f64 {
    let n = a.cols();
    let mut rng = SplitMix64::new(RngSeed(0x0B5E_55ED_0F_0001));
    let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let mut estimate = 0.0;
    for _ in 0..max_iter {
        let vd = DenseVector::new(v.clone()).unwrap();
        let av = a.matvec(&vd);
        let atav = a.matvec_transpose(&av);
        let norm = atav.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let new_estimate = {
            let vnorm = vd.iter().map(|x| x * x).sum::<f64>().sqrt();
            (av.iter().map(|x| x * x).sum::<f64>() / (vnorm * vnorm)).sqrt()
        };
        v = atav.iter().map(|x| x / norm).collect();
        if (new_estimate - estimate).abs() <= tol * new_estimate {
            return new_estimate;
        }
        estimate = new_estimate;
    }
    estimate
}
