//! Proximal maps and ball projections used by the primal-dual engine.

use crate::matrix::DenseVector;

/// Soft thresholding, the proximal map of t * ||.||_1.
pub fn prox_l1(v: &DenseVector, t: f64) -> DenseVector {
    debug_assert!(t >= 0.0);
    v.iter()
        .map(|&x| x.signum() * (x.abs() - t).max(0.0))
        .collect::<Vec<_>>()
        .into()
}

/// Euclidean projection onto the l2 ball of radius r around `center`.
pub fn project_l2_ball(v: &DenseVector, center: &DenseVector, r: f64) -> DenseVector {
    debug_assert!(r >= 0.0);
    let diff = v.sub(center);
    let norm = diff.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm <= r {
        v.clone()
    } else {
        center.add(&diff.scale(r / norm))
    }
}

/// Entrywise clamp of v - center to [-r, r], shifted back by center.
pub fn project_linf_ball(v: &DenseVector, center: &DenseVector, r: f64) -> DenseVector {
    debug_assert!(r >= 0.0);
    v.iter()
        .zip(center.iter())
        .map(|(&x, &c)| c + (x - c).clamp(-r, r))
        .collect::<Vec<_>>()
        .into()
}

/// Euclidean projection onto { ||z||_1 <= r } by sorted threshold search
/// (Duchi et al.).
pub fn project_l1_ball(v: &DenseVector, r: f64) -> DenseVector {
    debug_assert!(r >= 0.0);
    if r == 0.0 {
        return DenseVector::zeros(v.len());
    }
    let l1: f64 = v.iter().map(|x| x.abs()).sum();
    if l1 <= r {
        return v.clone();
    }
    let mut mags: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &mu) in mags.iter().enumerate() {
        cumsum += mu;
        let candidate = (cumsum - r) / (k + 1) as f64;
        if mu > candidate {
            theta = candidate;
        } else {
            break;
        }
    }
    prox_l1(v, theta)
}
