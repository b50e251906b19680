//! Exact rational linear algebra: RREF, kernels, subspaces and their intersections.
//!
//! Everything downstream (layer spaces, vanishing ideals, membership verdicts)
//! is decided by zero/nonzero tests, so nothing in here touches floats.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat_frac(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Parses `"p/q"` or `"p"`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p = BigInt::from_str(p.trim()).ok()?;
            let q = BigInt::from_str(q.trim()).ok()?;
            if q.is_zero() {
                return None;
            }
            Some(Rational::new(p, q))
        }
        None => BigInt::from_str(s).ok().map(Rational::from_integer),
    }
}

pub fn rational_to_f64(q: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap_or(f64::NAN)
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

/// Dense row-major matrix of rationals.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rational>,
}

impl fmt::Debug for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RationalMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(|q| q.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix { rows, cols, entries: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    pub fn from_entries(rows: usize, cols: usize, entries: Vec<Rational>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, found: entries.len() });
        }
        Ok(RationalMatrix { rows, cols, entries })
    }

    /// Builds a matrix from row vectors; `cols` is needed when `rows` is empty.
    pub fn from_rows(rows: Vec<Vec<Rational>>, cols: usize) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch { expected: cols, found: r.len() });
            }
            entries.extend(r);
        }
        Ok(RationalMatrix { rows: n, cols, entries })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let data = rows.iter().map(|r| r.iter().map(|&x| rat(x)).collect()).collect();
        Self::from_rows(data, cols).expect("ragged integer matrix")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rational) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Rational] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &RationalMatrix) -> Result<RationalMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, found: other.rows });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = other.get(k, c);
                    if !b.is_zero() {
                        out.entries[r * other.cols + c] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Result<Vec<Rational>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, found: v.len() });
        }
        Ok((0..self.rows).map(|r| dot(self.row(r), v)).collect())
    }

    pub fn scale(&self, s: &Rational) -> RationalMatrix {
        RationalMatrix { rows: self.rows, cols: self.cols, entries: self.entries.iter().map(|x| x * s).collect() }
    }

    pub fn add(&self, other: &RationalMatrix) -> Result<RationalMatrix> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::DimensionMismatch { expected: self.rows * self.cols, found: other.rows * other.cols });
        }
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect();
        Ok(RationalMatrix { rows: self.rows, cols: self.cols, entries })
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.reduce_in_place().len()
    }

    /// Row-reduces in place to RREF and returns the pivot columns.
    fn reduce_in_place(&mut self) -> Vec<usize> {
        let (rows, cols) = (self.rows, self.cols);
        let mut pivots = Vec::new();
        let mut pr = 0;
        for c in 0..cols {
            if pr == rows {
                break;
            }
            let Some(found) = (pr..rows).find(|&r| !self.get(r, c).is_zero()) else {
                continue;
            };
            if found != pr {
                for k in 0..cols {
                    self.entries.swap(found * cols + k, pr * cols + k);
                }
            }
            let inv = self.get(pr, c).recip();
            for k in c..cols {
                let v = &self.entries[pr * cols + k] * &inv;
                self.entries[pr * cols + k] = v;
            }
            for r in 0..rows {
                if r == pr || self.get(r, c).is_zero() {
                    continue;
                }
                let factor = self.get(r, c).clone();
                for k in c..cols {
                    let p = &self.entries[pr * cols + k];
                    if p.is_zero() {
                        continue;
                    }
                    let delta = &factor * p;
                    self.entries[r * cols + k] -= delta;
                }
            }
            pivots.push(c);
            pr += 1;
        }
        pivots
    }

    /// Null-space basis, one vector per free column, in increasing free-column order.
    pub fn kernel_vectors(&self) -> Vec<Vec<Rational>> {
        let mut m = self.clone();
        let pivots = m.reduce_in_place();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        (0..self.cols)
            .filter(|&c| !is_pivot[c])
            .map(|free| {
                let mut v = vec![Rational::zero(); self.cols];
                v[free] = Rational::one();
                for (r, &p) in pivots.iter().enumerate() {
                    v[p] = -m.get(r, free).clone();
                }
                v
            })
            .collect()
    }
}

/// Canonical reduced row echelon form (zero rows kept at the bottom).
pub fn rref(m: &RationalMatrix) -> RationalMatrix {
    let mut out = m.clone();
    out.reduce_in_place();
    out
}

pub fn kernel(m: &RationalMatrix) -> Subspace {
    Subspace::from_vectors(m.cols(), m.kernel_vectors()).expect("kernel vectors have ambient length")
}

/// A linear subspace of `Q^n`, stored as the nonzero rows of its RREF basis.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Subspace {
    ambient_dim: usize,
    basis: RationalMatrix,
}

impl Subspace {
    pub fn zero(ambient_dim: usize) -> Self {
        Subspace { ambient_dim, basis: RationalMatrix::zeros(0, ambient_dim) }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Subspace { ambient_dim, basis: RationalMatrix::identity(ambient_dim) }
    }

    /// Span of arbitrary (possibly dependent) vectors.
    pub fn from_vectors(ambient_dim: usize, vectors: Vec<Vec<Rational>>) -> Result<Self> {
        let m = RationalMatrix::from_rows(vectors, ambient_dim)?;
        Ok(Self::row_space(&m))
    }

    pub fn row_space(m: &RationalMatrix) -> Self {
        let mut r = m.clone();
        let rank = r.reduce_in_place().len();
        let entries = r.entries[..rank * m.cols()].to_vec();
        Subspace { ambient_dim: m.cols(), basis: RationalMatrix { rows: rank, cols: m.cols(), entries } }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn basis(&self) -> &RationalMatrix {
        &self.basis
    }

    pub fn basis_vectors(&self) -> Vec<Vec<Rational>> {
        self.basis.row_vecs()
    }

    pub fn contains(&self, v: &[Rational]) -> Result<bool> {
        if v.len() != self.ambient_dim {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim, found: v.len() });
        }
        let mut rows = self.basis_vectors();
        rows.push(v.to_vec());
        Ok(RationalMatrix::from_rows(rows, self.ambient_dim)?.rank() == self.dim())
    }

    /// Orthogonal complement under the standard bilinear form.
    pub fn complement(&self) -> Subspace {
        kernel(&self.basis)
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        self.check_same_ambient(other)?;
        let mut rows = self.basis_vectors();
        rows.extend(other.basis_vectors());
        Subspace::from_vectors(self.ambient_dim, rows)
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> Result<bool> {
        Ok(self.sum(other)?.dim() == other.dim())
    }

    fn check_same_ambient(&self, other: &Subspace) -> Result<()> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim, found: other.ambient_dim });
        }
        Ok(())
    }
}

/// `A ∩ B`, computed as the complement of `A^⊥ + B^⊥`.
pub fn subspace_intersection(a: &Subspace, b: &Subspace) -> Result<Subspace> {
    a.check_same_ambient(b)?;
    let mut constraints = a.complement().basis_vectors();
    constraints.extend(b.complement().basis_vectors());
    let m = RationalMatrix::from_rows(constraints, a.ambient_dim)?;
    Ok(kernel(&m))
}

/// Solves `M x = b` for an exact solution. Among all solutions this returns the
/// one of least Euclidean norm, i.e. the solution lying in the row space of `M`.
pub fn solve_least_norm(m: &RationalMatrix, b: &[Rational]) -> Result<Vec<Rational>> {
    if b.len() != m.rows() {
        return Err(Error::DimensionMismatch { expected: m.rows(), found: b.len() });
    }
    let row_basis = Subspace::row_space(m).basis;
    // x = R^T y with M R^T of full column rank
    let mrt = m.mul(&row_basis.transpose())?;
    let r = row_basis.rows();
    let mut aug = RationalMatrix::zeros(m.rows(), r + 1);
    for i in 0..m.rows() {
        for j in 0..r {
            aug.set(i, j, mrt.get(i, j).clone());
        }
        aug.set(i, r, b[i].clone());
    }
    let pivots = aug.reduce_in_place();
    if pivots.last() == Some(&r) {
        return Err(Error::NoSolution);
    }
    let mut y = vec![Rational::zero(); r];
    for (row, &p) in pivots.iter().enumerate() {
        y[p] = aug.get(row, r).clone();
    }
    row_basis.transpose().mul_vec(&y)
}

pub fn is_zero_vector(v: &[Rational]) -> bool {
    v.iter().all(Zero::is_zero)
}

/// Scales a nonzero vector so its first nonzero entry is positive and the entries are coprime integers.
pub fn primitive_integer_vector(v: &[Rational]) -> Vec<Rational> {
    use num_integer::Integer;
    let lcm = v.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let ints: Vec<BigInt> = v.iter().map(|q| (q * Rational::from_integer(lcm.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return v.to_vec();
    }
    let sign = if ints.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative()) { -1 } else { 1 };
    ints.into_iter().map(|x| Rational::from_integer(x / &g * BigInt::from(sign))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| rat(x)).collect()
    }

    #[test]
    fn rref_examples() {
        let id = RationalMatrix::identity(3);
        assert_eq!(rref(&id), id);
        let m = RationalMatrix::from_i64(&[&[2, 4], &[1, 2]]);
        assert_eq!(rref(&m), RationalMatrix::from_i64(&[&[1, 2], &[0, 0]]));
        let z = RationalMatrix::zeros(2, 3);
        assert_eq!(rref(&z), z);
    }

    #[test]
    fn kernel_of_pointnet_basis_map() {
        // rows e_0 and the all-ones vector in Q^5
        let phi = RationalMatrix::from_i64(&[&[1, 0, 0, 0, 0], &[1, 1, 1, 1, 1]]);
        let k = kernel(&phi);
        assert_eq!(k.dim(), 3);
        let expected = Subspace::from_vectors(5, vec![v(&[0, 1, -1, 0, 0]), v(&[0, 0, 1, -1, 0]), v(&[0, 0, 0, 1, -1])]).unwrap();
        assert_eq!(k, expected);
    }

    #[test]
    fn kernel_of_unit_row() {
        let phi = RationalMatrix::from_i64(&[&[0, 1, 0, 0]]);
        let k = kernel(&phi);
        assert_eq!(k.dim(), 3);
        let expected = Subspace::from_vectors(4, vec![v(&[1, 0, 0, 0]), v(&[0, 0, 1, 0]), v(&[0, 0, 0, 1])]).unwrap();
        assert_eq!(k, expected);
        assert_eq!(kernel(&RationalMatrix::identity(3)).dim(), 0);
    }

    #[test]
    fn intersection_examples() {
        let e = |i: usize| {
            let mut x = vec![Rational::zero(); 3];
            x[i] = Rational::one();
            x
        };
        let a = Subspace::from_vectors(3, vec![e(0), e(1)]).unwrap();
        let b = Subspace::from_vectors(3, vec![e(1), e(2)]).unwrap();
        assert_eq!(subspace_intersection(&a, &b).unwrap(), Subspace::from_vectors(3, vec![e(1)]).unwrap());
        assert_eq!(subspace_intersection(&a, &a).unwrap(), a);
        let c = Subspace::from_vectors(3, vec![e(0)]).unwrap();
        let d = Subspace::from_vectors(3, vec![e(1)]).unwrap();
        assert_eq!(subspace_intersection(&c, &d).unwrap(), Subspace::zero(3));
        assert!(matches!(subspace_intersection(&a, &Subspace::full(2)), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn solve_examples() {
        let b = v(&[3, -1, 2]);
        assert_eq!(solve_least_norm(&RationalMatrix::identity(3), &b).unwrap(), b);
        assert_eq!(solve_least_norm(&RationalMatrix::zeros(2, 2), &v(&[1, 0])), Err(Error::NoSolution));
        let m = RationalMatrix::from_i64(&[&[1, 1]]);
        let x = solve_least_norm(&m, &v(&[2])).unwrap();
        assert_eq!(x, v(&[1, 1]));
        let inconsistent = RationalMatrix::from_i64(&[&[1, 1], &[2, 2]]);
        assert_eq!(solve_least_norm(&inconsistent, &v(&[1, 3])), Err(Error::NoSolution));
    }

    #[test]
    fn parse_rationals() {
        assert_eq!(parse_rational("3/6"), Some(rat_frac(1, 2)));
        assert_eq!(parse_rational("-7"), Some(rat(-7)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("0.5"), None);
    }

    fn small_matrix() -> impl Strategy<Value = RationalMatrix> {
        (1usize..5, 1usize..6).prop_flat_map(|(r, c)| {
            proptest::collection::vec(-3i64..4, r * c)
                .prop_map(move |xs| RationalMatrix::from_entries(r, c, xs.into_iter().map(rat).collect()).unwrap())
        })
    }

    fn subspace_of(n: usize) -> impl Strategy<Value = Subspace> {
        proptest::collection::vec(proptest::collection::vec(-2i64..3, n), 0..n + 1)
            .prop_map(move |rows| Subspace::from_vectors(n, rows.into_iter().map(|r| v(&r)).collect()).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn rank_nullity_and_kernel_soundness(m in small_matrix()) {
            let r = rref(&m);
            prop_assert_eq!(rref(&r), r.clone());
            let k = kernel(&m);
            prop_assert_eq!(m.rank() + k.dim(), m.cols());
            for vec in k.basis_vectors() {
                prop_assert!(is_zero_vector(&m.mul_vec(&vec).unwrap()));
            }
        }

        #[test]
        fn intersection_laws(a in subspace_of(4), b in subspace_of(4), c in subspace_of(4)) {
            let ab = subspace_intersection(&a, &b).unwrap();
            prop_assert_eq!(&ab, &subspace_intersection(&b, &a).unwrap());
            let left = subspace_intersection(&ab, &c).unwrap();
            let right = subspace_intersection(&a, &subspace_intersection(&b, &c).unwrap()).unwrap();
            prop_assert_eq!(&left, &right);
            prop_assert_eq!(ab.dim() + a.sum(&b).unwrap().dim(), a.dim() + b.dim());
        }

        #[test]
        fn least_norm_solution_solves_consistent_systems(m in small_matrix(), seed in proptest::collection::vec(-3i64..4, 6)) {
            let x0: Vec<Rational> = (0..m.cols()).map(|i| rat(seed[i])).collect();
            let b = m.mul_vec(&x0).unwrap();
            let x = solve_least_norm(&m, &b).unwrap();
            prop_assert_eq!(m.mul_vec(&x).unwrap(), b);
            // least norm: orthogonal to the kernel
            for k in kernel(&m).basis_vectors() {
                prop_assert!(dot(&k, &x).is_zero());
            }
        }
    }
}
