//! Decision procedures for universality classes of shallow invariant networks.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::groups::{self, is_normal, PermGroup};
use crate::linalg::{is_zero_vector, kernel, Rational, RationalMatrix, Subspace};
use crate::polynomials::{
    annihilator_slice, apply_operator, falling_factorial, factorial, invariant_forms, is_invariant, power_of_sum,
    product_monomial, symmetrized_monomial_on, DiffProduct, MultiPoly,
};
use crate::representations::{equivariant_hom_basis, flattened_span, verify_equivariance, BasisMapFamily, PermRep};

/// Default bound on the number of kernel-basis tuples the directional test may enumerate.
pub const DIRECTIONAL_TUPLE_CAP: u128 = 10_000_000;

fn ser_rational<S: Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

fn ser_vector<S: Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|q| q.to_string()))
}

fn ser_vectors<S: Serializer>(vs: &[Vec<Rational>], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(vs.iter().map(|v| v.iter().map(|q| q.to_string()).collect::<Vec<_>>()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SeparationPair {
    #[serde(serialize_with = "ser_vector")]
    pub x: Vec<Rational>,
    #[serde(serialize_with = "ser_vector")]
    pub y: Vec<Rational>,
    pub equivalent: bool,
    /// Sorted images `φ_i(x)`.
    #[serde(serialize_with = "ser_vectors")]
    pub multiset_x: Vec<Vec<Rational>>,
    #[serde(serialize_with = "ser_vectors")]
    pub multiset_y: Vec<Vec<Rational>>,
}

fn image_multiset(x: &[Rational], family: &BasisMapFamily) -> Result<Vec<Vec<Rational>>> {
    if x.len() != family.source_dim {
        return Err(Error::DimensionMismatch { expected: family.source_dim, found: x.len() });
    }
    let mut images = family.maps.iter().map(|phi| phi.mul_vec(x)).collect::<Result<Vec<_>>>()?;
    images.sort();
    Ok(images)
}

/// `x ~ y` iff the multisets `{{φ_i(x)}}` and `{{φ_i(y)}}` coincide.
pub fn separation_equivalent(x: &[Rational], y: &[Rational], family: &BasisMapFamily) -> Result<SeparationPair> {
    let multiset_x = image_multiset(x, family)?;
    let multiset_y = image_multiset(y, family)?;
    Ok(SeparationPair { x: x.to_vec(), y: y.to_vec(), equivalent: multiset_x == multiset_y, multiset_x, multiset_y })
}

/// True iff some `g` maps `x` to `y`, by brute force over the group.
pub fn orbit_equivalent(x: &[Rational], y: &[Rational], group: &PermGroup) -> Result<bool> {
    let n = group.base_size();
    for v in [x, y] {
        if v.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: v.len() });
        }
    }
    Ok(group.elements().iter().any(|g| (0..n).all(|i| y[g.apply(i)] == x[i])))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    Member,
    NonMember,
    FailsBySufficientTest,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// An element `P` of the vanishing ideal with `P(∂) f = image ≠ 0`.
    Annihilator { operator: MultiPoly, image: MultiPoly },
    /// Kernel directions with `D_{c_1} ⋯ D_{c_ℓ} f = image ≠ 0`.
    Directions {
        #[serde(serialize_with = "ser_vectors")]
        directions: Vec<Vec<Rational>>,
        image: MultiPoly,
    },
}

impl Witness {
    /// Recomputes the witnessed value and checks it is the stored nonzero image.
    pub fn reverify(&self, f: &MultiPoly) -> Result<bool> {
        Ok(match self {
            Witness::Annihilator { operator, image } => {
                let v = apply_operator(operator, f)?;
                !v.is_zero() && &v == image
            }
            Witness::Directions { directions, image } => {
                let v = DiffProduct::new(directions.clone())?.apply(f)?;
                !v.is_zero() && &v == image
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UniversalityVerdict {
    pub status: Status,
    pub witness: Option<Witness>,
    pub details: String,
    pub degrees_checked: Vec<u32>,
}

/// Serialized form of a verdict.
#[derive(Clone, Debug, Serialize)]
pub struct VerdictReport {
    pub target: String,
    pub family: String,
    pub status: Status,
    pub witness: Option<Witness>,
    pub degrees_checked: Vec<u32>,
    pub details: String,
    /// Wall-clock milliseconds; left empty unless explicitly requested so reports stay byte-stable.
    pub timings: Option<f64>,
}

impl UniversalityVerdict {
    pub fn report(&self, target: &str, family: &str) -> VerdictReport {
        VerdictReport {
            target: target.into(),
            family: family.into(),
            status: self.status,
            witness: self.witness.clone(),
            degrees_checked: self.degrees_checked.clone(),
            details: self.details.clone(),
            timings: None,
        }
    }
}

fn check_target(f: &MultiPoly, family: &BasisMapFamily) -> Result<()> {
    if f.num_vars() != family.source_dim {
        return Err(Error::DimensionMismatch { expected: family.source_dim, found: f.num_vars() });
    }
    if !is_invariant(f, &family.group)? {
        return Err(Error::NotInvariant);
    }
    Ok(())
}

/// Decides whether the invariant polynomial `f` lies in the class of `family`.
///
/// `f` is a member iff `P(∂) f = 0` for every `P` in the vanishing ideal of
/// `L(φ_1) ∪ ⋯ ∪ L(φ_ℓ)`. The ideal is homogeneous and operators of degree
/// above `deg f` act as zero, so slices `1..=deg f` decide the question.
pub fn decide_polynomial_in_class(f: &MultiPoly, family: &BasisMapFamily) -> Result<UniversalityVerdict> {
    check_target(f, family)?;
    let deg = f.degree().unwrap_or(0);
    let spans = family.row_spaces();
    let mut checked = Vec::new();
    for d in 1..=deg {
        checked.push(d);
        let slice = annihilator_slice(&spans, d)?;
        for p in slice.polys() {
            let image = apply_operator(&p, f)?;
            if !image.is_zero() {
                return Ok(UniversalityVerdict {
                    status: Status::NonMember,
                    details: format!("degree-{d} annihilator does not kill the target"),
                    witness: Some(Witness::Annihilator { operator: p, image }),
                    degrees_checked: checked,
                });
            }
        }
    }
    Ok(UniversalityVerdict {
        status: Status::Member,
        witness: None,
        details: format!("all annihilator slices up to degree {deg} kill the target"),
        degrees_checked: checked,
    })
}

pub fn directional_failure_test(f: &MultiPoly, family: &BasisMapFamily) -> Result<UniversalityVerdict> {
    directional_failure_test_capped(f, family, DIRECTIONAL_TUPLE_CAP)
}

/// Searches kernel-basis tuples `(c_1, …, c_ℓ)`, `c_i ∈ L(φ_i)^⊥`, for `D_{c_1} ⋯ D_{c_ℓ} f ≠ 0`.
///
/// The product is multilinear in the directions, so it vanishes on all
/// kernel tuples iff it vanishes on all tuples of kernel basis vectors.
pub fn directional_failure_test_capped(f: &MultiPoly, family: &BasisMapFamily, cap: u128) -> Result<UniversalityVerdict> {
    check_target(f, family)?;
    let ell = family.len();
    let inconclusive = |details: String| UniversalityVerdict {
        status: Status::Inconclusive,
        witness: None,
        details,
        degrees_checked: Vec::new(),
    };
    if (f.degree().unwrap_or(0) as usize) < ell {
        return Ok(inconclusive(format!("{ell} derivatives exceed the target degree")));
    }
    let kernels: Vec<Vec<Vec<Rational>>> = family.kernels().iter().map(Subspace::basis_vectors).collect();
    if let Some(i) = kernels.iter().position(Vec::is_empty) {
        return Ok(inconclusive(format!("basis map {} has trivial kernel", i + 1)));
    }
    let needed = kernels.iter().try_fold(1u128, |acc, k| acc.checked_mul(k.len() as u128)).unwrap_or(u128::MAX);
    if needed > cap {
        return Err(Error::EnumerationCapExceeded { needed, cap });
    }

    fn search(level: usize, g: &MultiPoly, kernels: &[Vec<Vec<Rational>>], chosen: &mut Vec<usize>) -> Option<MultiPoly> {
        if g.is_zero() {
            return None;
        }
        if level == kernels.len() {
            return Some(g.clone());
        }
        for (k, c) in kernels[level].iter().enumerate() {
            let next = crate::polynomials::directional_derivative(g, c).expect("direction length checked");
            chosen.push(k);
            if let Some(v) = search(level + 1, &next, kernels, chosen) {
                return Some(v);
            }
            chosen.pop();
        }
        None
    }

    let found = (0..kernels[0].len()).into_par_iter().find_map_first(|k| {
        let first = crate::polynomials::directional_derivative(f, &kernels[0][k]).expect("direction length checked");
        let mut chosen = vec![k];
        search(1, &first, &kernels, &mut chosen).map(|image| (chosen, image))
    });
    Ok(match found {
        Some((chosen, image)) => UniversalityVerdict {
            status: Status::FailsBySufficientTest,
            details: "a product of kernel directional derivatives is nonzero".into(),
            witness: Some(Witness::Directions {
                directions: chosen.iter().enumerate().map(|(i, &k)| kernels[i][k].clone()).collect(),
                image,
            }),
            degrees_checked: Vec::new(),
        },
        None => inconclusive(format!("all {needed} kernel-basis tuples give zero")),
    })
}

/// Value of the symmetrized-monomial failure certificate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SymmetrizedCertificate {
    /// Coefficient extracted from the symbolic derivative; nonzero certifies failure.
    #[serde(serialize_with = "ser_rational")]
    pub value: Rational,
    /// Closed-form sum with block weights `a_j!/((a_j - s_j)! s_j!)`.
    #[serde(serialize_with = "ser_rational")]
    pub closed_form: Rational,
    /// Closed-form sum with the literal weights `a_j!/s_j!`.
    #[serde(serialize_with = "ser_rational")]
    pub literal_weights: Rational,
    /// Basis element `t` with `φ_i^t = e_{anchor_i}^T`.
    pub selector: usize,
    pub anchors: Vec<usize>,
    pub agrees: bool,
    pub certifies_failure: bool,
}

/// Coefficient of multidegree `(a_j - s_j)` at the anchor coordinates in
/// `D_{c_1} ⋯ D_{c_ℓ}` of the symmetrized monomial `Σ_σ Π_j x_{anchor_{σ(j)}}^{a_j}`.
pub fn symmetrized_monomial_certificate(
    family: &BasisMapFamily,
    s: &[u32],
    a: &[u32],
    c: &[Vec<Rational>],
) -> Result<SymmetrizedCertificate> {
    let ell = family.len();
    let n = family.source_dim;
    let bad = |msg: String| Err(Error::InvalidParameters(msg));
    if s.len() != ell || a.len() != ell || c.len() != ell {
        return bad(format!("expected {ell} block sizes, exponents and directions"));
    }
    if s.iter().any(|&si| si as usize > ell) || s.iter().map(|&si| si as usize).sum::<usize>() != ell {
        return bad(format!("block sizes must lie in 0..={ell} and sum to {ell}"));
    }
    if a[0] as usize <= ell {
        return bad(format!("first exponent must exceed {ell}"));
    }
    // the gap condition only constrains consecutive pairs
    if a.windows(2).any(|w| w[0] as usize + ell >= w[1] as usize) {
        return bad(format!("consecutive exponents must differ by more than {ell}"));
    }
    if let Some(bad_len) = c.iter().find(|ci| ci.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, found: bad_len.len() });
    }
    for (i, (phi, ci)) in family.maps.iter().zip(c).enumerate() {
        if !is_zero_vector(&phi.mul_vec(ci)?) {
            return Err(Error::KernelMembershipViolated { index: i });
        }
    }
    let Some((selector, anchors)) = family.coordinate_selector() else {
        return bad("no basis element selects distinct coordinates".into());
    };

    let f = symmetrized_monomial_on(a, &anchors, n)?;
    let image = DiffProduct::new(c.to_vec())?.apply(&f)?;
    let value = if a.iter().zip(s).any(|(ai, si)| ai < si) {
        Rational::zero()
    } else {
        let mut e = vec![0u32; n];
        for j in 0..ell {
            e[anchors[j]] = a[j] - s[j];
        }
        image.coefficient(&e)
    };

    let block_sum = |weights: &[BigInt]| -> Result<Rational> {
        let sym = groups::symmetric_group(ell)?;
        let mut total = Rational::zero();
        for sigma in sym.elements() {
            let mut term = Rational::one();
            let mut k = 0;
            for j in 0..ell {
                for _ in 0..s[j] {
                    term *= &c[sigma.apply(k)][anchors[j]];
                    k += 1;
                }
            }
            total += term;
        }
        let weight: BigInt = weights.iter().product();
        Ok(total * Rational::from_integer(weight))
    };
    let mut closed = Vec::new();
    let mut literal = Vec::new();
    let mut denom = BigInt::one();
    for j in 0..ell {
        closed.push(falling_factorial(a[j], s[j]));
        denom *= factorial(s[j]);
        if s[j] != 0 {
            literal.push(factorial(a[j]));
        }
    }
    let closed_form = block_sum(&closed)? / Rational::from_integer(denom.clone());
    let literal_weights = block_sum(&literal)? / Rational::from_integer(denom);
    Ok(SymmetrizedCertificate {
        agrees: closed_form == value,
        certifies_failure: !value.is_zero(),
        value,
        closed_form,
        literal_weights,
        selector,
        anchors,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComponentCheck {
    pub k_order: usize,
    pub kh_order: usize,
    /// `|G/K|` and `|G/KH|`.
    pub source_dim: usize,
    pub reduced_dim: usize,
    pub hom_dim: usize,
    pub double_cosets: usize,
    pub reduced_double_cosets: usize,
    pub reduced_hom_dim: usize,
    pub immersion_equivariant: bool,
    pub immersion_injective: bool,
    pub subgroup_acts_trivially: bool,
    pub pullback_rank: usize,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NormalCertificate {
    pub granted: bool,
    pub refusal: Option<String>,
    pub group_order: usize,
    pub subgroup_order: usize,
    pub quotient_order: Option<usize>,
    pub hidden_dim: Option<usize>,
    pub components: Vec<ComponentCheck>,
}

/// Certificate that networks `⊕_i ℝ^{G/K_i} → ℝ^{G/H} → ℝ` are separation-constrained
/// universal, for normal `H`; otherwise a refusal naming the failed check.
pub fn normal_subgroup_certificate(group: &Arc<PermGroup>, h: &PermGroup, components: &[PermGroup]) -> Result<NormalCertificate> {
    h.validate_subgroup_of(group)?;
    for k in components {
        k.validate_subgroup_of(group)?;
    }
    let mut cert = NormalCertificate {
        granted: false,
        refusal: None,
        group_order: group.order(),
        subgroup_order: h.order(),
        quotient_order: None,
        hidden_dim: None,
        components: Vec::new(),
    };
    if !is_normal(h, group)? {
        cert.refusal = Some("subgroup is not normal".into());
        return Ok(cert);
    }
    if components.is_empty() {
        cert.refusal = Some("input representation has no components".into());
        return Ok(cert);
    }
    let quotient = groups::quotient_group(group, h)?;
    let hidden = PermRep::cosets(group.clone(), h)?;
    cert.quotient_order = Some(quotient.order());
    cert.hidden_dim = Some(hidden.dim());
    if quotient.order() * h.order() != group.order() || hidden.dim() != quotient.order() {
        cert.refusal = Some("quotient order does not match the index".into());
        return Ok(cert);
    }
    let h_indices: Vec<usize> = h.elements().iter().map(|x| group.index_of(x).unwrap()).collect();
    for k in components {
        let kh = group.join(k, h)?;
        let source = groups::left_cosets(group, k)?;
        let reduced = groups::left_cosets(group, &kh)?;
        let v = PermRep::cosets(group.clone(), k)?;
        let w = PermRep::cosets(group.clone(), &kh)?;
        // ι[gK][g'KH] = 1 iff gK ⊆ g'KH
        let mut iota = RationalMatrix::zeros(source.len(), reduced.len());
        for (r, coset) in source.cosets.iter().enumerate() {
            iota.set(r, reduced.coset_of[coset[0]], Rational::one());
        }
        let immersion_equivariant = verify_equivariance(&iota, &w, &v)?;
        let immersion_injective = iota.rank() == reduced.len();
        let subgroup_acts_trivially =
            h_indices.iter().all(|&x| (0..reduced.len()).all(|p| w.gset().act(x, p) == p));
        let hom = equivariant_hom_basis(&v, &hidden)?;
        let reduced_hom = equivariant_hom_basis(&w, &hidden)?;
        let pulled: Vec<RationalMatrix> = hom.iter().map(|m| m.mul(&iota)).collect::<Result<_>>()?;
        let pullback_rank = flattened_span(&pulled, hidden.dim() * reduced.len()).dim();
        let double = groups::double_cosets(h, group, k)?.count;
        let reduced_double = groups::double_cosets(h, group, &kh)?.count;
        let passed = immersion_equivariant
            && immersion_injective
            && subgroup_acts_trivially
            && hom.len() == double
            && double == reduced_double
            && reduced_double == reduced_hom.len()
            && pullback_rank == hom.len();
        cert.components.push(ComponentCheck {
            k_order: k.order(),
            kh_order: kh.order(),
            source_dim: source.len(),
            reduced_dim: reduced.len(),
            hom_dim: hom.len(),
            double_cosets: double,
            reduced_double_cosets: reduced_double,
            reduced_hom_dim: reduced_hom.len(),
            immersion_equivariant,
            immersion_injective,
            subgroup_acts_trivially,
            pullback_rank,
            passed,
        });
    }
    if let Some(i) = cert.components.iter().position(|c| !c.passed) {
        cert.refusal = Some(format!("component {} fails the pullback checks", i + 1));
    } else {
        cert.granted = true;
    }
    Ok(cert)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassRelation {
    Equal,
    FirstStrictlyInSecond,
    SecondStrictlyInFirst,
    Incomparable,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DegreeComparison {
    pub degree: u32,
    pub dim_first: usize,
    pub dim_second: usize,
    pub first_in_second: bool,
    pub second_in_first: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SeparatingWitness {
    pub degree: u32,
    pub polynomial: MultiPoly,
    /// Name of the family whose class contains the witness.
    pub member_of: String,
    pub not_member_of: String,
    /// Annihilator of the excluding family that fails to kill the witness, if any;
    /// otherwise the witness is excluded by invariance alone.
    pub violating_operator: Option<MultiPoly>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassComparison {
    pub first: String,
    pub second: String,
    pub degree_cap: u32,
    pub relation: ClassRelation,
    pub degrees: Vec<DegreeComparison>,
    pub witnesses: Vec<SeparatingWitness>,
}

/// Degree-`d` forms in the class of `family`: invariant forms apolar to the ideal slice.
fn class_forms(family: &BasisMapFamily, d: u32) -> Result<(Subspace, Vec<MultiPoly>)> {
    let slice = annihilator_slice(&family.row_spaces(), d)?;
    let monomials = &slice.monomials;
    let inv = invariant_forms(&family.group, d);
    let ops = slice.space.basis_vectors();
    // pairing ⟨P, m_O⟩ = Σ_{β ∈ O} p_β β!
    let mut pairing = RationalMatrix::zeros(ops.len(), inv.len());
    for (r, p) in ops.iter().enumerate() {
        for (o, form) in inv.iter().enumerate() {
            let mut acc = Rational::zero();
            for (m, _) in form.terms() {
                let idx = monomials.binary_search(m).expect("same degree");
                if !p[idx].is_zero() {
                    acc += &p[idx] * Rational::from_integer(m.factorial());
                }
            }
            pairing.set(r, o, acc);
        }
    }
    let lambdas = kernel(&pairing).basis_vectors();
    let mut vectors = Vec::with_capacity(lambdas.len());
    for lambda in &lambdas {
        let mut v = vec![Rational::zero(); monomials.len()];
        for (form, l) in inv.iter().zip(lambda) {
            if l.is_zero() {
                continue;
            }
            for (m, _) in form.terms() {
                v[monomials.binary_search(m).unwrap()] += l;
            }
        }
        vectors.push(v);
    }
    let space = Subspace::from_vectors(monomials.len(), vectors)?;
    let polys = space.basis_vectors().iter().map(|v| MultiPoly::from_coefficients(family.source_dim, monomials, v)).collect();
    Ok((space, polys))
}

fn coefficient_vector(p: &MultiPoly, d: u32) -> Vec<Rational> {
    crate::polynomials::monomials_of_degree(p.num_vars(), d).iter().map(|m| p.coefficient(m.exponents())).collect()
}

fn separating_witness(
    d: u32,
    wider: &BasisMapFamily,
    wider_forms: &[MultiPoly],
    narrower: &BasisMapFamily,
    narrower_space: &Subspace,
) -> Result<SeparatingWitness> {
    let n = wider.source_dim;
    let wider_space = Subspace::from_vectors(
        narrower_space.ambient_dim(),
        wider_forms.iter().map(|p| coefficient_vector(p, d)).collect(),
    )?;
    let mut candidates = vec![power_of_sum(n, d)];
    if d as usize == n {
        candidates.push(product_monomial(n));
    }
    candidates.extend(wider_forms.iter().cloned());
    let mut chosen = None;
    for p in candidates {
        let v = coefficient_vector(&p, d);
        if wider_space.contains(&v)? && !narrower_space.contains(&v)? {
            chosen = Some(p);
            break;
        }
    }
    let polynomial = chosen.expect("strict inclusion has a separating basis element");
    let mut violating_operator = None;
    if is_invariant(&polynomial, &narrower.group)? {
        for p in annihilator_slice(&narrower.row_spaces(), d)?.polys() {
            if !apply_operator(&p, &polynomial)?.is_zero() {
                violating_operator = Some(p);
                break;
            }
        }
    }
    Ok(SeparatingWitness {
        degree: d,
        polynomial,
        member_of: wider.name.clone(),
        not_member_of: narrower.name.clone(),
        violating_operator,
    })
}

/// Compares the polynomial parts (degree `1..=cap`) of two universality classes.
pub fn compare_classes(first: &BasisMapFamily, second: &BasisMapFamily, degree_cap: u32) -> Result<ClassComparison> {
    if first.source_dim != second.source_dim {
        return Err(Error::DimensionMismatch { expected: first.source_dim, found: second.source_dim });
    }
    let mut degrees = Vec::new();
    let mut witnesses = Vec::new();
    for d in 1..=degree_cap {
        let (space_a, forms_a) = class_forms(first, d)?;
        let (space_b, forms_b) = class_forms(second, d)?;
        let a_in_b = space_a.is_subspace_of(&space_b)?;
        let b_in_a = space_b.is_subspace_of(&space_a)?;
        if !b_in_a {
            witnesses.push(separating_witness(d, second, &forms_b, first, &space_a)?);
        }
        if !a_in_b {
            witnesses.push(separating_witness(d, first, &forms_a, second, &space_b)?);
        }
        degrees.push(DegreeComparison {
            degree: d,
            dim_first: space_a.dim(),
            dim_second: space_b.dim(),
            first_in_second: a_in_b,
            second_in_first: b_in_a,
        });
    }
    let all_ab = degrees.iter().all(|x| x.first_in_second);
    let all_ba = degrees.iter().all(|x| x.second_in_first);
    let relation = match (all_ab, all_ba) {
        (true, true) => ClassRelation::Equal,
        (true, false) => ClassRelation::FirstStrictlyInSecond,
        (false, true) => ClassRelation::SecondStrictlyInFirst,
        (false, false) => ClassRelation::Incomparable,
    };
    Ok(ClassComparison { first: first.name.clone(), second: second.name.clone(), degree_cap, relation, degrees, witnesses })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{alternating_group, cyclic_group, symmetric_group, Permutation};
    use crate::linalg::{rat, rat_frac};
    use crate::polynomials::{reynolds, symmetrized_monomial};
    use crate::representations::{c1_family, pointnet_family, regular_family};

    fn v(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| rat(x)).collect()
    }

    fn diff(n: usize, i: usize, j: usize) -> Vec<Rational> {
        (0..n).map(|k| rat((k == i) as i64 - (k == j) as i64)).collect()
    }

    #[test]
    fn separation_examples() {
        let c1 = c1_family(3).unwrap();
        assert!(separation_equivalent(&v(&[1, 2, 3]), &v(&[3, 1, 2]), &c1).unwrap().equivalent);
        assert!(!separation_equivalent(&v(&[1, 2, 3]), &v(&[1, 2, 4]), &c1).unwrap().equivalent);
        assert!(separation_equivalent(&v(&[5, 0, 5]), &v(&[5, 0, 5]), &c1).unwrap().equivalent);
        assert!(matches!(separation_equivalent(&v(&[1]), &v(&[1]), &c1), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn orbit_examples() {
        let s4 = symmetric_group(4).unwrap();
        assert!(orbit_equivalent(&v(&[1, 2, 3, 4]), &v(&[4, 2, 1, 3]), &s4).unwrap());
        assert!(!orbit_equivalent(&v(&[0, 0, 0, 0]), &v(&[0, 0, 1, 0]), &s4).unwrap());
        let z4 = cyclic_group(4).unwrap();
        assert!(orbit_equivalent(&v(&[1, 2, 3, 4]), &v(&[4, 1, 2, 3]), &z4).unwrap());
        assert!(!orbit_equivalent(&v(&[1, 2, 3, 4]), &v(&[2, 1, 3, 4]), &z4).unwrap());
    }

    #[test]
    fn membership_examples() {
        for n in 3..=5usize {
            let f = power_of_sum(n, n as u32);
            let c1 = decide_polynomial_in_class(&f, &c1_family(n).unwrap()).unwrap();
            assert_eq!(c1.status, Status::NonMember);
            assert!(c1.witness.as_ref().unwrap().reverify(&f).unwrap());
            let pn = decide_polynomial_in_class(&f, &pointnet_family(n).unwrap()).unwrap();
            assert_eq!(pn.status, Status::Member);
            assert_eq!(pn.degrees_checked, (1..=n as u32).collect::<Vec<_>>());
        }
        let constant = MultiPoly::constant(3, rat(4));
        assert_eq!(decide_polynomial_in_class(&constant, &c1_family(3).unwrap()).unwrap().status, Status::Member);
        let x1 = MultiPoly::var(3, 0);
        assert_eq!(decide_polynomial_in_class(&x1, &pointnet_family(3).unwrap()), Err(Error::NotInvariant));
    }

    #[test]
    fn product_monomial_membership_for_pointnet() {
        for n in 4..=5usize {
            let f = product_monomial(n);
            let verdict = decide_polynomial_in_class(&f, &pointnet_family(n).unwrap()).unwrap();
            assert_eq!(verdict.status, Status::NonMember);
            assert!(verdict.witness.unwrap().reverify(&f).unwrap());
        }
    }

    #[test]
    fn three_variable_product_is_a_pointnet_member() {
        // e3 = (p1^3 - 3 p1 p2 + 2 p3) / 6 and each power-sum term is Σ_i h(x_i, Σx)
        let p = |k: u32| (0..3).fold(MultiPoly::zero(3), |acc, i| acc.add(&MultiPoly::var(3, i).pow(k)).unwrap());
        let e3 = p(1).pow(3).sub(&p(1).mul(&p(2)).unwrap().scale(&rat(3))).unwrap().add(&p(3).scale(&rat(2))).unwrap();
        assert_eq!(e3.scale(&rat_frac(1, 6)), product_monomial(3));
        let f = product_monomial(3);
        let fam = pointnet_family(3).unwrap();
        assert_eq!(decide_polynomial_in_class(&f, &fam).unwrap().status, Status::Member);
        assert_eq!(directional_failure_test(&f, &fam).unwrap().status, Status::Inconclusive);
    }

    #[test]
    fn directional_examples() {
        for n in 2..=5usize {
            let f = power_of_sum(n, n as u32);
            let verdict = directional_failure_test(&f, &c1_family(n).unwrap()).unwrap();
            assert_eq!(verdict.status, Status::FailsBySufficientTest);
            let Some(Witness::Directions { image, .. }) = &verdict.witness else { panic!() };
            assert_eq!(image.constant_value(), Some(Rational::from_integer(factorial(n as u32))));
            assert!(verdict.witness.unwrap().reverify(&f).unwrap());
        }
        assert_eq!(
            directional_failure_test(&power_of_sum(3, 3), &pointnet_family(3).unwrap()).unwrap().status,
            Status::Inconclusive
        );
    }

    #[test]
    fn listed_pointnet_directions_give_two() {
        for n in 4..=6usize {
            let fam = pointnet_family(n).unwrap();
            let mut cs: Vec<Vec<Rational>> = (0..n - 2).map(|i| diff(n, i + 1, n - 1)).collect();
            cs.push(diff(n, n - 1, 1));
            cs.push(diff(n, 0, 1));
            for (phi, c) in fam.maps.iter().zip(&cs) {
                assert!(is_zero_vector(&phi.mul_vec(c).unwrap()));
            }
            let value = DiffProduct::new(cs).unwrap().apply(&product_monomial(n)).unwrap();
            assert_eq!(value, MultiPoly::constant(n, rat(2)));
        }
    }

    #[test]
    fn directional_cap_is_enforced() {
        let f = power_of_sum(4, 4);
        assert_eq!(
            directional_failure_test_capped(&f, &c1_family(4).unwrap(), 10),
            Err(Error::EnumerationCapExceeded { needed: 81, cap: 10 })
        );
    }

    fn listed_n3_directions() -> Vec<Vec<Rational>> {
        vec![diff(3, 1, 2), diff(3, 2, 0), diff(3, 0, 1)]
    }

    #[test]
    fn certificate_for_three_point_pointnet() {
        let fam = pointnet_family(3).unwrap();
        let cert = symmetrized_monomial_certificate(&fam, &[2, 1, 0], &[4, 8, 12], &listed_n3_directions()).unwrap();
        assert_eq!(cert.value, rat(-96));
        assert!(cert.agrees && cert.certifies_failure);
        assert_eq!(cert.anchors, vec![0, 1, 2]);
        for a1 in 4..=6u32 {
            for a2 in (a1 + 4)..=(a1 + 6) {
                let a = [a1, a2, a2 + 4];
                let cert = symmetrized_monomial_certificate(&fam, &[2, 1, 0], &a, &listed_n3_directions()).unwrap();
                assert_eq!(cert.value, rat(-((a1 * (a1 - 1) * a2) as i64)));
                assert_eq!(cert.closed_form, cert.value);
            }
        }
    }

    #[test]
    fn certificate_with_zero_directions_is_zero() {
        let fam = pointnet_family(3).unwrap();
        let zeros = vec![vec![rat(0); 3]; 3];
        let cert = symmetrized_monomial_certificate(&fam, &[1, 1, 1], &[4, 8, 12], &zeros).unwrap();
        assert_eq!((cert.value, cert.certifies_failure), (rat(0), false));
    }

    #[test]
    fn certificate_single_map_matches_derivative_oracle() {
        // one map: c_1 is orthogonal to the selected coordinate, so the value is 0
        let fam = crate::representations::basis_maps(
            &crate::representations::layer_custom(
                &PermRep::natural(Arc::new(groups::trivial_group(2))),
                &PermRep::trivial(Arc::new(groups::trivial_group(2)), 1),
                vec![RationalMatrix::from_i64(&[&[1, 0]])],
            )
            .unwrap(),
        );
        let c = vec![v(&[0, 3])];
        let cert = symmetrized_monomial_certificate(&fam, &[1], &[2], &c).unwrap();
        let oracle = crate::polynomials::directional_derivative(&MultiPoly::var(2, 0).pow(2), &c[0]).unwrap();
        assert_eq!(cert.value, oracle.coefficient(&[1, 0]));
        assert!(cert.agrees);
    }

    #[test]
    fn certificate_rejects_bad_parameters() {
        let fam = pointnet_family(3).unwrap();
        let cs = listed_n3_directions();
        let invalid = |s: &[u32], a: &[u32]| matches!(symmetrized_monomial_certificate(&fam, s, a, &cs), Err(Error::InvalidParameters(_)));
        assert!(invalid(&[2, 1, 1], &[4, 8, 12]));
        assert!(invalid(&[2, 1, 0], &[3, 8, 12]));
        assert!(invalid(&[2, 1, 0], &[4, 7, 12]));
        assert!(invalid(&[2, 1], &[4, 8]));
        let mut wrong = cs.clone();
        wrong[1] = diff(3, 1, 2);
        assert_eq!(
            symmetrized_monomial_certificate(&fam, &[2, 1, 0], &[4, 8, 12], &wrong),
            Err(Error::KernelMembershipViolated { index: 1 })
        );
    }

    #[test]
    fn symmetrized_monomial_is_not_a_pointnet_member() {
        let f = symmetrized_monomial(&[4, 8, 12], 3).unwrap();
        let verdict = decide_polynomial_in_class(&f, &pointnet_family(3).unwrap()).unwrap();
        assert_eq!(verdict.status, Status::NonMember);
    }

    #[test]
    fn normal_certificates() {
        let z6 = Arc::new(cyclic_group(6).unwrap());
        let natural_stab = z6.stabilizer(0).unwrap();
        for h in z6.subgroups() {
            let cert = normal_subgroup_certificate(&z6, &h, &[natural_stab.clone()]).unwrap();
            assert!(cert.granted, "{cert:?}");
        }
        let s3 = Arc::new(symmetric_group(3).unwrap());
        let t = groups::group_closure(3, &[Permutation::from_cycles(3, &[&[0, 1]]).unwrap()], 10).unwrap();
        let cert = normal_subgroup_certificate(&s3, &t, &[s3.stabilizer(0).unwrap()]).unwrap();
        assert!(!cert.granted);
        assert_eq!(cert.refusal.as_deref(), Some("subgroup is not normal"));
        let s4 = Arc::new(symmetric_group(4).unwrap());
        let a4 = alternating_group(4).unwrap();
        let cert = normal_subgroup_certificate(&s4, &a4, &[s4.stabilizer(0).unwrap()]).unwrap();
        assert!(cert.granted);
        assert_eq!(cert.hidden_dim, Some(2));
        let outside = groups::group_closure(5, &[Permutation::from_cycles(5, &[&[3, 4]]).unwrap()], 10).unwrap();
        assert!(matches!(normal_subgroup_certificate(&s4, &outside, &[]), Err(_)));
    }

    #[test]
    fn compare_examples() {
        let c1 = c1_family(3).unwrap();
        let pn = pointnet_family(3).unwrap();
        let cmp = compare_classes(&c1, &pn, 3).unwrap();
        assert_eq!(cmp.relation, ClassRelation::FirstStrictlyInSecond);
        let w = &cmp.witnesses[0];
        assert_eq!((w.degree, &w.polynomial), (2, &power_of_sum(3, 2)));
        for fam in [&c1, &pn] {
            assert_eq!(compare_classes(fam, fam, 3).unwrap().relation, ClassRelation::Equal);
        }
        let reg = regular_family(3).unwrap();
        assert_eq!(compare_classes(&pn, &reg, 3).unwrap().relation, ClassRelation::Equal);
        let cmp = compare_classes(&pn, &reg, 6).unwrap();
        assert_eq!(cmp.relation, ClassRelation::FirstStrictlyInSecond);
        let w = &cmp.witnesses[0];
        assert_eq!(w.degree, 6);
        assert!(is_invariant(&w.polynomial, &symmetric_group(3).unwrap()).unwrap());
        assert_eq!(reynolds(&w.polynomial, &symmetric_group(3).unwrap()).unwrap(), w.polynomial);
        let op = w.violating_operator.as_ref().unwrap();
        assert!(!apply_operator(op, &w.polynomial).unwrap().is_zero());
    }
}
