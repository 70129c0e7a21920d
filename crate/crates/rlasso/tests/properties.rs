//! Property-based invariants: Stechkin's bound, brute-force agreement of the
//! best S-term approximation, SVD/pseudoinverse identities, support
//! projections, tuning ranges and ensemble determinism.

use proptest::prelude::*;
use rlasso::ensembles::gaussian_matrix;
use rlasso::matrix::{best_s_term, lq_norm, project_support};
use rlasso::svd::{pseudoinverse_of_transpose, svd};
use rlasso::tuning::{lambda_threshold_eq1, rho_prime, NspConstants};
use rlasso::{DenseVector, NormExponent, RngSeed};

fn finite_vec(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-100.0f64..100.0, 1..=max_len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    // d_q(v, Sigma_S) <= S^(1/q - 1/p) ||v||_p for p <= q.
    #[test]
    fn stechkin_bound(entries in finite_vec(16), s_raw in 1usize..=16) {
        let v = DenseVector::new(entries).unwrap();
        let s = 1 + s_raw % v.len();
        for (p, q) in [
            (NormExponent::One, NormExponent::One),
            (NormExponent::One, NormExponent::Two),
            (NormExponent::One, NormExponent::Inf),
            (NormExponent::Two, NormExponent::Two),
            (NormExponent::Two, NormExponent::Inf),
        ] {
            let (_, d) = best_s_term(&v, s, q).unwrap();
            let bound = (s as f64).powf(q.inverse() - p.inverse()) * lq_norm(&v, p);
            prop_assert!(d <= bound * (1.0 + 1e-12) + 1e-12, "d={d} bound={bound}");
        }
    }
}

fn combinations(n: usize, s: usize) -> Vec<Vec<usize>> {
    if s == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in 0..n {
        for mut rest in combinations_from(first + 1, n, s - 1) {
            let mut c = vec![first];
            c.append(&mut rest);
            out.push(c);
        }
    }
    out
}

fn combinations_from(start: usize, n: usize, s: usize) -> Vec<Vec<usize>> {
    if s == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in start..n {
        for mut rest in combinations_from(first + 1, n, s - 1) {
            let mut c = vec![first];
            c.append(&mut rest);
            out.push(c);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    // The greedy S-term pick matches a support enumeration.
    #[test]
    fn best_s_term_matches_brute_force(entries in finite_vec(10), s_raw in 1usize..=10) {
        let v = DenseVector::new(entries).unwrap();
        let n = v.len();
        let s = 1 + s_raw % n;
        for q in [NormExponent::One, NormExponent::Two, NormExponent::Inf] {
            let (_, d) = best_s_term(&v, s, q).unwrap();
            let brute = combinations(n, s)
                .into_iter()
                .map(|support| {
                    let kept: Vec<f64> = (0..n)
                        .map(|i| if support.contains(&i) { v[i] } else { 0.0 })
                        .collect();
                    lq_norm(&v.sub(&DenseVector::new(kept).unwrap()), q)
                })
                .fold(f64::INFINITY, f64::min);
            prop_assert!((d - brute).abs() <= 1e-12 * (1.0 + brute), "d={d} brute={brute}");
        }
    }

    // Keeping T and its complement partitions the vector exactly.
    #[test]
    fn support_projection_partitions(entries in finite_vec(12), mask in 0u32..4096) {
        let v = DenseVector::new(entries).unwrap();
        let n = v.len();
        let indices: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect();
        let t = rlasso::SupportSet::new(indices, n).unwrap();
        let tc = t.complement(n);
        let sum = project_support(&v, &t).unwrap().add(&project_support(&v, &tc).unwrap());
        prop_assert_eq!(sum, v);
    }

    // rho' stays in [rho, 1) above the threshold and equals rho exactly on
    // and above the EQ1 value.
    #[test]
    fn rho_prime_range(
        q_pick in 0usize..3,
        s in 1usize..=32,
        rho in 0.0f64..0.95,
        tau in 0.1f64..10.0,
        factor in 1.000_001f64..100.0,
    ) {
        let q = [NormExponent::One, NormExponent::Two, NormExponent::Inf][q_pick];
        let c = NspConstants::new(q, s, rho, tau).unwrap();
        let lambda = c.lambda_floor() * factor;
        let r = rho_prime(lambda, &c).unwrap();
        prop_assert!(r >= rho - 1e-12 && r < 1.0);
        if lambda >= lambda_threshold_eq1(&c) * (1.0 + 1e-9) {
            prop_assert!((r - rho).abs() <= 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    // U Sigma V^T reproduces A and the factors are orthonormal.
    #[test]
    fn svd_roundtrip(rows in 1usize..=10, cols in 1usize..=12, seed in any::<u64>()) {
        let a = gaussian_matrix(rows, cols, RngSeed(seed)).unwrap();
        let f = svd(&a).unwrap();
        let sigma_max = f.singular_values.first().copied().unwrap_or(0.0);
        let mut max_err = 0.0f64;
        for i in 0..rows {
            for j in 0..cols {
                let mut rebuilt = 0.0;
                for k in 0..f.rank {
                    rebuilt += f.u.get(i, k) * f.singular_values[k] * f.v.get(j, k);
                }
                max_err = max_err.max((rebuilt - a.get(i, j)).abs());
            }
        }
        prop_assert!(max_err <= 1e-9 * sigma_max.max(1.0), "err {max_err}");
    }

    // (A^T)^+ is a left inverse of A^T when A is surjective.
    #[test]
    fn pseudoinverse_left_identity(m in 1usize..=6, extra in 0usize..=10, seed in any::<u64>()) {
        let n = m + extra;
        let a = gaussian_matrix(m, n, RngSeed(seed)).unwrap();
        let pinv_t = pseudoinverse_of_transpose(&a); // M x N
        prop_assume!(pinv_t.is_ok());
        let prod = pinv_t.unwrap().matmul(&a.transpose()); // (M x N)(N x M)
        for i in 0..m {
            for j in 0..m {
                let expected = if i == j { 1.0 } else { 0.0 };
                prop_assert!((prod.get(i, j) - expected).abs() <= 1e-8);
            }
        }
    }

    // Fixed seed, fixed draw.
    #[test]
    fn ensembles_are_deterministic(seed in any::<u64>()) {
        let a = gaussian_matrix(3, 5, RngSeed(seed)).unwrap();
        let b = gaussian_matrix(3, 5, RngSeed(seed)).unwrap();
        prop_assert_eq!(a, b);
        let x = rlasso::ensembles::sparse_signal_on_sphere(9, 3, NormExponent::Two, RngSeed(seed)).unwrap();
        let y = rlasso::ensembles::sparse_signal_on_sphere(9, 3, NormExponent::Two, RngSeed(seed)).unwrap();
        prop_assert_eq!(x, y);
    }
}

// One larger shape: a fat 64 x 256 draw reconstructs to working accuracy.
#[test]
fn svd_roundtrip_fat_matrix() {
    let a = gaussian_matrix(64, 256, RngSeed(99)).unwrap();
    let f = svd(&a).unwrap();
    let sigma_max = f.singular_values[0];
    let mut max_err = 0.0f64;
    for i in 0..64 {
        for j in 0..256 {
            let mut rebuilt = 0.0;
            for k in 0..f.rank {
                rebuilt += f.u.get(i, k) * f.singular_values[k] * f.v.get(j, k);
            }
            max_err = max_err.max((rebuilt - a.get(i, j)).abs());
        }
    }
    assert!(max_err <= 1e-9 * sigma_max, "err {max_err}");
}
