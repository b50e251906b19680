//! Exact multivariate polynomials, constant-coefficient differential operators
//! and graded slices of vanishing ideals of unions of linear subspaces.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::groups::{symmetric_group, PermGroup, Permutation};
use crate::linalg::{kernel, Rational, RationalMatrix, Subspace};

/// Exponent vector, ordered graded-lexicographically.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    pub fn one(num_vars: usize) -> Self {
        Monomial(vec![0; num_vars])
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `β!` as an integer.
    pub fn factorial(&self) -> BigInt {
        self.0.iter().map(|&e| factorial(e)).product()
    }

    fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub fn factorial(n: u32) -> BigInt {
    (1..=n).map(BigInt::from).product()
}

/// `b! / (b - a)!`, zero when `a > b`.
pub fn falling_factorial(b: u32, a: u32) -> BigInt {
    if a > b {
        return BigInt::zero();
    }
    ((b - a + 1)..=b).map(BigInt::from).product()
}

/// All monomials of total degree `d` in `n` variables, ascending.
pub fn monomials_of_degree(n: usize, d: u32) -> Vec<Monomial> {
    fn go(n: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if prefix.len() + 1 == n {
            prefix.push(d);
            out.push(Monomial(prefix.clone()));
            prefix.pop();
            return;
        }
        for e in 0..=d {
            prefix.push(e);
            go(n, d - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        if d == 0 {
            out.push(Monomial(Vec::new()));
        }
        return out;
    }
    go(n, d, &mut Vec::with_capacity(n), &mut out);
    out.sort();
    out
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MultiPoly {
    num_vars: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl MultiPoly {
    pub fn zero(num_vars: usize) -> Self {
        MultiPoly { num_vars, terms: BTreeMap::new() }
    }

    pub fn constant(num_vars: usize, c: Rational) -> Self {
        let mut p = MultiPoly::zero(num_vars);
        p.add_term(Monomial::one(num_vars), c);
        p
    }

    /// The coordinate function `x_{i+1}` (0-based `i`).
    pub fn var(num_vars: usize, i: usize) -> Self {
        let mut e = vec![0; num_vars];
        e[i] = 1;
        MultiPoly::monomial(Monomial(e), Rational::one())
    }

    pub fn monomial(m: Monomial, c: Rational) -> Self {
        let mut p = MultiPoly::zero(m.0.len());
        p.add_term(m, c);
        p
    }

    /// The linear form `c · x`.
    pub fn linear_form(c: &[Rational]) -> Self {
        let n = c.len();
        let mut p = MultiPoly::zero(n);
        for (i, ci) in c.iter().enumerate() {
            let mut e = vec![0; n];
            e[i] = 1;
            p.add_term(Monomial(e), ci.clone());
        }
        p
    }

    pub fn from_terms(num_vars: usize, terms: Vec<(Rational, Vec<u32>)>) -> Result<Self> {
        let mut p = MultiPoly::zero(num_vars);
        for (c, e) in terms {
            if e.len() != num_vars {
                return Err(Error::DimensionMismatch { expected: num_vars, found: e.len() });
            }
            p.add_term(Monomial(e), c);
        }
        Ok(p)
    }

    /// Builds `Σ coeffs[k] · monomials[k]`.
    pub fn from_coefficients(num_vars: usize, monomials: &[Monomial], coeffs: &[Rational]) -> Self {
        let mut p = MultiPoly::zero(num_vars);
        for (m, c) in monomials.iter().zip(coeffs) {
            p.add_term(m.clone(), c.clone());
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(Monomial::degree)
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, exponents: &[u32]) -> Rational {
        self.terms.get(&Monomial(exponents.to_vec())).cloned().unwrap_or_else(Rational::zero)
    }

    /// Constant term, for polynomials that are known to be constants.
    pub fn constant_value(&self) -> Option<Rational> {
        match self.degree() {
            None => Some(Rational::zero()),
            Some(0) => Some(self.coefficient(&vec![0; self.num_vars])),
            Some(_) => None,
        }
    }

    pub fn homogeneous_component(&self, d: u32) -> MultiPoly {
        MultiPoly {
            num_vars: self.num_vars,
            terms: self.terms.iter().filter(|(m, _)| m.degree() == d).map(|(m, c)| (m.clone(), c.clone())).collect(),
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(Monomial::degree);
        match degs.next() {
            None => true,
            Some(d) => degs.all(|e| e == d),
        }
    }

    fn check_vars(&self, other: &MultiPoly) -> Result<()> {
        if self.num_vars != other.num_vars {
            return Err(Error::DimensionMismatch { expected: self.num_vars, found: other.num_vars });
        }
        Ok(())
    }

    pub fn add(&self, other: &MultiPoly) -> Result<MultiPoly> {
        self.check_vars(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &MultiPoly) -> Result<MultiPoly> {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, s: &Rational) -> MultiPoly {
        if s.is_zero() {
            return MultiPoly::zero(self.num_vars);
        }
        MultiPoly { num_vars: self.num_vars, terms: self.terms.iter().map(|(m, c)| (m.clone(), c * s)).collect() }
    }

    pub fn mul(&self, other: &MultiPoly) -> Result<MultiPoly> {
        self.check_vars(other)?;
        let mut out = MultiPoly::zero(self.num_vars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let e = ma.0.iter().zip(&mb.0).map(|(a, b)| a + b).collect();
                out.add_term(Monomial(e), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: u32) -> MultiPoly {
        let mut out = MultiPoly::constant(self.num_vars, Rational::one());
        for _ in 0..k {
            out = out.mul(self).expect("same ring");
        }
        out
    }

    /// `∂f/∂x_{i+1}`.
    pub fn partial(&self, i: usize) -> MultiPoly {
        let mut out = MultiPoly::zero(self.num_vars);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut ex = m.0.clone();
            ex[i] -= 1;
            out.add_term(Monomial(ex), c * Rational::from_integer(BigInt::from(e)));
        }
        out
    }

    /// `x -> f(P(g) x)`, where `(P(g) x)_{g(i)} = x_i`.
    pub fn compose_permutation(&self, g: &Permutation) -> Result<MultiPoly> {
        if g.len() != self.num_vars {
            return Err(Error::DimensionMismatch { expected: self.num_vars, found: g.len() });
        }
        let mut out = MultiPoly::zero(self.num_vars);
        for (m, c) in &self.terms {
            let e = (0..self.num_vars).map(|j| m.0[g.apply(j)]).collect();
            out.add_term(Monomial(e), c.clone());
        }
        Ok(out)
    }

    pub fn evaluate(&self, x: &[Rational]) -> Result<Rational> {
        if x.len() != self.num_vars {
            return Err(Error::DimensionMismatch { expected: self.num_vars, found: x.len() });
        }
        let mut total = Rational::zero();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for (xi, &e) in x.iter().zip(&m.0) {
                if e > 0 {
                    term *= num_traits::pow(xi.clone(), e as usize);
                }
            }
            total += term;
        }
        Ok(total)
    }

    /// Floating-point evaluation for the numerical harness.
    pub fn evaluate_f64(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.num_vars);
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut term = crate::linalg::rational_to_f64(c);
                for (xi, &e) in x.iter().zip(&m.0) {
                    term *= xi.powi(e as i32);
                }
                term
            })
            .sum()
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let mag = c.abs();
            if k == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if c.is_negative() { '-' } else { '+' })?;
            }
            let vars: Vec<String> = m
                .0
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| if e == 1 { format!("x{}", i + 1) } else { format!("x{}^{}", i + 1, e) })
                .collect();
            if vars.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{mag}*{}", vars.join("*"))?;
            }
        }
        Ok(())
    }
}

impl serde::Serialize for MultiPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// `Σ_i c_i ∂_i f`.
pub fn directional_derivative(f: &MultiPoly, c: &[Rational]) -> Result<MultiPoly> {
    if c.len() != f.num_vars {
        return Err(Error::DimensionMismatch { expected: f.num_vars, found: c.len() });
    }
    let mut out = MultiPoly::zero(f.num_vars);
    for (i, ci) in c.iter().enumerate() {
        if ci.is_zero() {
            continue;
        }
        for (m, coef) in f.partial(i).terms {
            out.add_term(m, coef * ci);
        }
    }
    Ok(out)
}

/// A product of directional derivatives `D_{c_1} ⋯ D_{c_k}`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DiffProduct {
    directions: Vec<Vec<Rational>>,
}

impl DiffProduct {
    pub fn new(directions: Vec<Vec<Rational>>) -> Result<Self> {
        if let Some(first) = directions.first() {
            if let Some(bad) = directions.iter().find(|c| c.len() != first.len()) {
                return Err(Error::DimensionMismatch { expected: first.len(), found: bad.len() });
            }
        }
        Ok(DiffProduct { directions })
    }

    pub fn directions(&self) -> &[Vec<Rational>] {
        &self.directions
    }

    pub fn apply(&self, f: &MultiPoly) -> Result<MultiPoly> {
        let mut g = f.clone();
        for c in self.directions.iter().rev() {
            if g.is_zero() {
                break;
            }
            g = directional_derivative(&g, c)?;
        }
        Ok(g)
    }

    /// The symbol `Π_k (c_k · x)`, whose operator is this product.
    pub fn symbol(&self, num_vars: usize) -> MultiPoly {
        self.directions
            .iter()
            .fold(MultiPoly::constant(num_vars, Rational::one()), |acc, c| acc.mul(&MultiPoly::linear_form(c)).expect("same ring"))
    }
}

/// `P(∂) f`: substitutes `∂_i` for `x_i` in `P` and applies the result to `f`.
pub fn apply_operator(p: &MultiPoly, f: &MultiPoly) -> Result<MultiPoly> {
    p.check_vars(f)?;
    let mut out = MultiPoly::zero(f.num_vars);
    for (alpha, pa) in &p.terms {
        for (beta, fb) in &f.terms {
            if !alpha.divides(beta) {
                continue;
            }
            let mut weight = BigInt::one();
            let mut e = Vec::with_capacity(f.num_vars);
            for (&a, &b) in alpha.0.iter().zip(&beta.0) {
                weight *= falling_factorial(b, a);
                e.push(b - a);
            }
            out.add_term(Monomial(e), pa * fb * Rational::from_integer(weight));
        }
    }
    Ok(out)
}

/// `(1/|G|) Σ_g f∘g`.
pub fn reynolds(f: &MultiPoly, group: &PermGroup) -> Result<MultiPoly> {
    if group.base_size() != f.num_vars {
        return Err(Error::DimensionMismatch { expected: f.num_vars, found: group.base_size() });
    }
    let mut out = MultiPoly::zero(f.num_vars);
    for g in group.elements() {
        for (m, c) in f.compose_permutation(g)?.terms {
            out.add_term(m, c);
        }
    }
    Ok(out.scale(&Rational::new(BigInt::one(), BigInt::from(group.order()))))
}

/// True iff `f∘g = f` for every generator.
pub fn is_invariant(f: &MultiPoly, group: &PermGroup) -> Result<bool> {
    if group.base_size() != f.num_vars {
        return Err(Error::DimensionMismatch { expected: f.num_vars, found: group.base_size() });
    }
    for g in group.generators() {
        if &f.compose_permutation(g)? != f {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `Σ_{σ ∈ S_ℓ} x_{σ(1)}^{a_1} ⋯ x_{σ(ℓ)}^{a_ℓ}` in `ℓ` variables.
pub fn symmetrized_monomial(a: &[u32], ell: usize) -> Result<MultiPoly> {
    symmetrized_monomial_on(a, &(0..ell).collect::<Vec<_>>(), ell)
}

/// Symmetrized monomial on the variables `vars[0..ℓ]` of an `n`-variable ring.
pub fn symmetrized_monomial_on(a: &[u32], vars: &[usize], num_vars: usize) -> Result<MultiPoly> {
    let ell = vars.len();
    if a.len() != ell {
        return Err(Error::InvalidExponents(format!("{} exponents for {ell} variables", a.len())));
    }
    if a.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidExponents("exponents must be strictly increasing".into()));
    }
    if vars.iter().any(|&v| v >= num_vars) || vars.iter().collect::<BTreeSet<_>>().len() != ell {
        return Err(Error::InvalidExponents("variables must be distinct and in range".into()));
    }
    let sym = symmetric_group(ell).map_err(|e| Error::InvalidExponents(e.to_string()))?;
    let mut out = MultiPoly::zero(num_vars);
    for sigma in sym.elements() {
        let mut e = vec![0; num_vars];
        for (j, &aj) in a.iter().enumerate() {
            e[vars[sigma.apply(j)]] = aj;
        }
        out.add_term(Monomial(e), Rational::one());
    }
    Ok(out)
}

/// `(x_1 + ⋯ + x_n)^d`.
pub fn power_of_sum(n: usize, d: u32) -> MultiPoly {
    MultiPoly::linear_form(&vec![Rational::one(); n]).pow(d)
}

/// `x_1 ⋯ x_n`.
pub fn product_monomial(n: usize) -> MultiPoly {
    MultiPoly::monomial(Monomial(vec![1; n]), Rational::one())
}

/// Sums of monomial orbits under `group`, a basis of the invariant forms of degree `d`.
pub fn invariant_forms(group: &PermGroup, d: u32) -> Vec<MultiPoly> {
    let n = group.base_size();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for m in monomials_of_degree(n, d) {
        if seen.contains(&m) {
            continue;
        }
        let mut orbit = MultiPoly::zero(n);
        for g in group.elements() {
            let image = Monomial((0..n).map(|j| m.0[g.apply(j)]).collect());
            if seen.insert(image.clone()) {
                orbit.add_term(image, Rational::one());
            }
        }
        out.push(orbit);
    }
    out
}

/// One graded slice of an ideal, as a subspace of coefficient vectors over `monomials`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdealSlice {
    pub num_vars: usize,
    pub degree: u32,
    pub monomials: Vec<Monomial>,
    pub space: Subspace,
}

impl IdealSlice {
    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn polys(&self) -> Vec<MultiPoly> {
        self.space
            .basis_vectors()
            .iter()
            .map(|v| MultiPoly::from_coefficients(self.num_vars, &self.monomials, v))
            .collect()
    }
}

/// Row space of the map from degree-`d` coefficients to the coefficients of `P` restricted to `L`.
fn restriction_constraints(l: &Subspace, d: u32, monomials: &[Monomial]) -> Subspace {
    let n = l.ambient_dim();
    let k = l.dim();
    if k == 0 {
        return Subspace::zero(monomials.len());
    }
    if k == n {
        return Subspace::full(monomials.len());
    }
    // generic point of L: x_i = Σ_j t_j v_{j,i}
    let basis = l.basis_vectors();
    let forms: Vec<MultiPoly> =
        (0..n).map(|i| MultiPoly::linear_form(&basis.iter().map(|v| v[i].clone()).collect::<Vec<_>>())).collect();
    let mut powers: Vec<Vec<MultiPoly>> = forms
        .iter()
        .map(|f| {
            let mut p = vec![MultiPoly::constant(k, Rational::one())];
            for e in 1..=d as usize {
                let next = p[e - 1].mul(f).expect("same ring");
                p.push(next);
            }
            p
        })
        .collect();
    let t_monomials = monomials_of_degree(k, d);
    let t_index: BTreeMap<&Monomial, usize> = t_monomials.iter().enumerate().map(|(r, m)| (m, r)).collect();
    let mut c = RationalMatrix::zeros(t_monomials.len(), monomials.len());
    for (col, m) in monomials.iter().enumerate() {
        let mut image = MultiPoly::constant(k, Rational::one());
        for (i, &e) in m.0.iter().enumerate() {
            if e > 0 {
                image = image.mul(&powers[i][e as usize]).expect("same ring");
            }
        }
        for (tm, coef) in image.terms {
            c.set(t_index[&tm], col, coef);
        }
    }
    powers.clear();
    Subspace::row_space(&c)
}

/// Degree-`d` forms vanishing on `L`.
pub fn vanishing_ideal_slice(l: &Subspace, d: u32) -> IdealSlice {
    annihilator_slice(std::slice::from_ref(l), d).expect("single subspace")
}

pub fn vanishing_ideal_graded(l: &Subspace, d: u32) -> Vec<MultiPoly> {
    vanishing_ideal_slice(l, d).polys()
}

/// Degree-`d` slice of `I(L_1 ∪ ⋯ ∪ L_ℓ) = ∩ I(L_i)`.
///
/// Each member contributes the row space of its restriction map; the slice is
/// the common kernel. Members are processed in parallel and summed in order.
pub fn annihilator_slice(family: &[Subspace], d: u32) -> Result<IdealSlice> {
    let n = family.first().map_or(0, Subspace::ambient_dim);
    if let Some(bad) = family.iter().find(|l| l.ambient_dim() != n) {
        return Err(Error::DimensionMismatch { expected: n, found: bad.ambient_dim() });
    }
    let monomials = monomials_of_degree(n, d);
    let total = monomials.len();
    let mut distinct: Vec<&Subspace> = Vec::new();
    for l in family {
        if !distinct.contains(&l) {
            distinct.push(l);
        }
    }
    let space = if distinct.iter().any(|l| l.dim() == n) {
        Subspace::zero(total)
    } else {
        let constraints: Vec<Subspace> =
            distinct.par_iter().map(|l| restriction_constraints(l, d, &monomials)).collect();
        let mut acc = Subspace::zero(total);
        for c in &constraints {
            acc = acc.sum(c)?;
            if acc.dim() == total {
                break;
            }
        }
        kernel(acc.basis())
    };
    Ok(IdealSlice { num_vars: n, degree: d, monomials, space })
}

pub fn annihilator_graded(family: &[Subspace], d: u32) -> Result<Vec<MultiPoly>> {
    Ok(annihilator_slice(family, d)?.polys())
}
