//! Dense matrices, vectors, norms and support operations.

use crate::error::{Error, Result};
use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

/// Norm exponent restricted to the values the library exercises.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NormExponent {
    One,
    Two,
    Inf,
}

impl NormExponent {
    /// 1/q with the convention 1/inf = 0.
    pub fn inverse(self) -> f64 {
        match self {
            NormExponent::One => 1.0,
            NormExponent::Two => 0.5,
            NormExponent::Inf => 0.0,
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            NormExponent::One => 1.0,
            NormExponent::Two => 2.0,
            NormExponent::Inf => f64::INFINITY,
        }
    }

    pub fn from_f64(q: f64) -> Result<Self> {
        if q == 1.0 {
            Ok(NormExponent::One)
        } else if q == 2.0 {
            Ok(NormExponent::Two)
        } else if q.is_infinite() && q > 0.0 {
            Ok(NormExponent::Inf)
        } else {
            Err(Error::UnsupportedNorm(format!("{q}")))
        }
    }
}

impl std::fmt::Display for NormExponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NormExponent::One => write!(f, "1"),
            NormExponent::Two => write!(f, "2"),
            NormExponent::Inf => write!(f, "inf"),
        }
    }
}

impl Serialize for NormExponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            NormExponent::One => s.serialize_u64(1),
            NormExponent::Two => s.serialize_u64(2),
            NormExponent::Inf => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for NormExponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = NormExponent;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                write!(f, "1, 2 or \"inf\"")
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<NormExponent, E> {
                match v {
                    1 => Ok(NormExponent::One),
                    2 => Ok(NormExponent::Two),
                    _ => Err(E::custom(format!("unsupported norm exponent {v}"))),
                }
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<NormExponent, E> {
                self.visit_u64(v as u64)
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<NormExponent, E> {
                match v {
                    "1" => Ok(NormExponent::One),
                    "2" => Ok(NormExponent::Two),
                    "inf" => Ok(NormExponent::Inf),
                    _ => Err(E::custom(format!("unsupported norm exponent {v}"))),
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// A real vector with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseVector {
    entries: Vec<f64>,
}

impl DenseVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if let Some(x) = entries.iter().find(|x| !x.is_finite()) {
            return Err(Error::Domain(format!("non-finite vector entry {x}")));
        }
        Ok(DenseVector { entries })
    }

    pub fn zeros(n: usize) -> Self {
        DenseVector {
            entries: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.entries.iter()
    }

    pub fn dot(&self, other: &DenseVector) -> f64 {
        debug_assert_eq!(self.len(), other.len());
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn scale(&self, c: f64) -> DenseVector {
        DenseVector {
            entries: self.entries.iter().map(|x| c * x).collect(),
        }
    }

    pub fn add(&self, other: &DenseVector) -> DenseVector {
        debug_assert_eq!(self.len(), other.len());
        DenseVector {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &DenseVector) -> DenseVector {
        debug_assert_eq!(self.len(), other.len());
        DenseVector {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn num_nonzeros(&self) -> usize {
        self.entries.iter().filter(|x| **x != 0.0).count()
    }
}

impl Serialize for DenseVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.entries.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DenseVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let entries = Vec::<f64>::deserialize(d)?;
        DenseVector::new(entries).map_err(de::Error::custom)
    }
}

impl Default for DenseVector {
    fn default() -> Self {
        DenseVector { entries: vec![] }
    }
}

impl std::ops::Index<usize> for DenseVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.entries[i]
    }
}

impl From<Vec<f64>> for DenseVector {
    fn from(entries: Vec<f64>) -> Self {
        DenseVector::new(entries).expect("finite entries")
    }
}

/// An M x N matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!(
                "matrix dimensions must be positive, got {rows} x {cols}"
            )));
        }
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "expected {} entries for a {rows} x {cols} matrix, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if let Some(x) = entries.iter().find(|x| !x.is_finite()) {
            return Err(Error::Domain(format!("non-finite matrix entry {x}")));
        }
        Ok(DenseMatrix {
            rows,
            cols,
            entries,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            entries: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = DenseMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.entries[j * self.rows + i] = self.entries[i * self.cols + j];
            }
        }
        t
    }

    /// A * v.
    pub fn matvec(&self, v: &DenseVector) -> DenseVector {
        debug_assert_eq!(self.cols, v.len());
        let mut out = vec![0.0; self.rows];
        for (i, o) in out.iter_mut().enumerate() {
            let row = self.row(i);
            *o = row.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
        }
        DenseVector { entries: out }
    }

    /// A^T * v.
    pub fn matvec_transpose(&self, v: &DenseVector) -> DenseVector {
        debug_assert_eq!(self.rows, v.len());
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let row = self.row(i);
            let vi = v[i];
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * vi;
            }
        }
        DenseVector { entries: out }
    }

    /// A * B.
    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.entries[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn scale(&self, c: f64) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|x| c * x).collect(),
        }
    }
}

/// A sorted set of 1-based indices in [1, N].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportSet {
    indices: Vec<usize>,
}

impl SupportSet {
    /// Builds a support set; indices may arrive in any order but must be
    /// distinct, 1-based and bounded by `n`.
    pub fn new(mut indices: Vec<usize>, n: usize) -> Result<Self> {
        indices.sort_unstable();
        for w in indices.windows(2) {
            if w[0] == w[1] {
                return Err(Error::Index(format!("duplicate index {}", w[0])));
            }
        }
        if let Some(&i) = indices.first() {
            if i == 0 {
                return Err(Error::Index("indices are 1-based".into()));
            }
        }
        if let Some(&i) = indices.last() {
            if i > n {
                return Err(Error::Index(format!("index {i} exceeds length {n}")));
            }
        }
        Ok(SupportSet { indices })
    }

    pub fn empty() -> Self {
        SupportSet { indices: vec![] }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    /// Complement within [1, n].
    pub fn complement(&self, n: usize) -> SupportSet {
        let indices = (1..=n).filter(|i| !self.contains(*i)).collect();
        SupportSet { indices }
    }
}

/// (sum |v_n|^q)^(1/q), or max |v_n| for q = inf.
pub fn lq_norm(v: &DenseVector, q: NormExponent) -> f64 {
    match q {
        NormExponent::One => v.iter().map(|x| x.abs()).sum(),
        NormExponent::Two => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
        NormExponent::Inf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
    }
}

/// Keeps v on T, zeroes the complement.
pub fn project_support(v: &DenseVector, t: &SupportSet) -> Result<DenseVector> {
    if let Some(&i) = t.indices().last() {
        if i > v.len() {
            return Err(Error::Index(format!(
                "support index {i} exceeds vector length {}",
                v.len()
            )));
        }
    }
    let mut out = vec![0.0; v.len()];
    for &i in t.indices() {
        out[i - 1] = v[i - 1];
    }
    Ok(DenseVector { entries: out })
}

/// Best S-term approximation: keeps the S largest-magnitude entries (ties
/// broken by lowest index) and reports the lq distance to the input.
pub fn best_s_term(
    v: &DenseVector,
    s: usize,
    q: NormExponent,
) -> Result<(DenseVector, f64)> {
    let n = v.len();
    if s == 0 || s > n {
        return Err(Error::Dimension(format!(
            "sparsity {s} out of range [1, {n}]"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        v[b].abs()
            .partial_cmp(&v[a].abs())
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut approx = vec![0.0; n];
    for &i in order.iter().take(s) {
        approx[i] = v[i];
    }
    let approx = DenseVector { entries: approx };
    let distance = lq_norm(&v.sub(&approx), q);
    Ok((approx, distance))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vec_of(xs: &[f64]) -> DenseVector {
        DenseVector::new(xs.to_vec()).unwrap()
    }

    #[test]
    fn lq_norm_examples() {
        assert_eq!(lq_norm(&vec_of(&[3.0, 4.0]), NormExponent::Two), 5.0);
        assert_eq!(lq_norm(&vec_of(&[1.0, -1.0, 1.0]), NormExponent::One), 3.0);
        assert_eq!(lq_norm(&vec_of(&[1.0, -2.0]), NormExponent::Inf), 2.0);
    }

    #[test]
    fn project_support_examples() {
        let v = vec_of(&[1.0, 2.0, 3.0]);
        let t = SupportSet::new(vec![2], 3).unwrap();
        assert_eq!(project_support(&v, &t).unwrap(), vec_of(&[0.0, 2.0, 0.0]));

        let v = vec_of(&[1.0, 2.0]);
        let t = SupportSet::new(vec![1, 2], 2).unwrap();
        assert_eq!(project_support(&v, &t).unwrap(), v);

        let v = vec_of(&[5.0, -5.0]);
        assert_eq!(
            project_support(&v, &SupportSet::empty()).unwrap(),
            vec_of(&[0.0, 0.0])
        );
    }

    #[test]
    fn project_support_out_of_range() {
        let v = vec_of(&[1.0]);
        let t = SupportSet::new(vec![2], 2).unwrap();
        assert!(project_support(&v, &t).is_err());
    }

    #[test]
    fn support_complement_partitions() {
        let t = SupportSet::new(vec![3, 1], 4).unwrap();
        let tc = t.complement(4);
        assert_eq!(tc.indices(), &[2, 4]);
        let v = vec_of(&[1.0, -2.0, 3.5, 0.25]);
        let sum = project_support(&v, &t)
            .unwrap()
            .add(&project_support(&v, &tc).unwrap());
        assert_eq!(sum, v);
    }

    #[test]
    fn best_s_term_examples() {
        let (a, d) = best_s_term(&vec_of(&[3.0, -1.0, 2.0]), 1, NormExponent::Inf).unwrap();
        assert_eq!(a, vec_of(&[3.0, 0.0, 0.0]));
        assert_eq!(d, 2.0);

        let (a, d) = best_s_term(&vec_of(&[1.0, 1.0]), 2, NormExponent::One).unwrap();
        assert_eq!(a, vec_of(&[1.0, 1.0]));
        assert_eq!(d, 0.0);

        let (a, d) = best_s_term(&vec_of(&[4.0, 2.0, 1.0, 1.0]), 2, NormExponent::One).unwrap();
        assert_eq!(a, vec_of(&[4.0, 2.0, 0.0, 0.0]));
        assert_eq!(d, 2.0);
        // Stechkin with p = q = 1: d <= S^0 * ||v||_1 = 8.
        assert!(d <= 8.0);
    }

    #[test]
    fn best_s_term_tie_breaks_by_lowest_index() {
        let (a, _) = best_s_term(&vec_of(&[1.0, -1.0, 1.0]), 1, NormExponent::One).unwrap();
        assert_eq!(a, vec_of(&[1.0, 0.0, 0.0]));
    }

    #[test]
    fn best_s_term_rejects_bad_order() {
        assert!(best_s_term(&vec_of(&[1.0]), 0, NormExponent::One).is_err());
        assert!(best_s_term(&vec_of(&[1.0]), 2, NormExponent::One).is_err());
    }

    #[test]
    fn matvec_and_transpose_agree_with_matmul() {
        let a = DenseMatrix::new(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let v = vec_of(&[1.0, 0.0, -1.0]);
        assert_eq!(a.matvec(&v), vec_of(&[-2.0, -2.0]));
        let w = vec_of(&[1.0, 1.0]);
        assert_eq!(a.matvec_transpose(&w), vec_of(&[5.0, 7.0, 9.0]));
        let at = a.transpose();
        assert_eq!(at.matvec(&w), a.matvec_transpose(&w));
    }

    #[test]
    fn matrix_rejects_non_finite() {
        assert!(DenseMatrix::new(1, 1, vec![f64::NAN]).is_err());
        assert!(DenseVector::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn norm_exponent_serde() {
        let q: NormExponent = serde_json::from_str("2").unwrap();
        assert_eq!(q, NormExponent::Two);
        let q: NormExponent = serde_json::from_str("\"inf\"").unwrap();
        assert_eq!(q, NormExponent::Inf);
        assert_eq!(serde_json::to_string(&NormExponent::One).unwrap(), "1");
    }
}
