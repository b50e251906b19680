//! Permutation representations and equivariant layer spaces.
//!
//! A [`LayerSpace`] is the affine family `v -> sum_t x_t phi^t(v) + sum_j y_j 1_{X_j}`
//! spanned by equivariant linear maps `phi^t` and the orbit indicators of the
//! target G-set. [`BasisMapFamily`] is the per-output-coordinate view of the
//! same data that the universality analysis works with.

use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::groups::{self, PermGroup, Permutation};
use crate::linalg::{kernel, rat, Rational, RationalMatrix, Subspace};

/// A finite set with a `G`-action, stored as a full action table.
#[derive(Clone, Debug)]
pub struct GSet {
    group: Arc<PermGroup>,
    size: usize,
    /// `table[k][x]` is the image of point `x` under group element `k`.
    table: Vec<Vec<usize>>,
}

const EXHAUSTIVE_CHECK_BUDGET: usize = 1_000_000;

impl GSet {
    /// Builds a G-set from an action function, validating the action laws.
    pub fn from_fn<F>(group: Arc<PermGroup>, size: usize, action: F) -> Result<GSet>
    where
        F: Fn(&Permutation, usize) -> usize,
    {
        let table: Vec<Vec<usize>> = group.elements().iter().map(|g| (0..size).map(|x| action(g, x)).collect()).collect();
        GSet::from_table(group, size, table)
    }

    pub fn from_table(group: Arc<PermGroup>, size: usize, table: Vec<Vec<usize>>) -> Result<GSet> {
        if table.len() != group.order() || table.iter().any(|row| row.len() != size) {
            return Err(Error::InvalidAction("action table has the wrong shape".into()));
        }
        for row in &table {
            let mut seen = vec![false; size];
            for &y in row {
                if y >= size || seen[y] {
                    return Err(Error::InvalidAction("group element does not act bijectively".into()));
                }
                seen[y] = true;
            }
        }
        if table[0].iter().enumerate().any(|(x, &y)| x != y) {
            return Err(Error::InvalidAction("identity acts nontrivially".into()));
        }
        let gen_idx: Vec<usize> = group.generators().iter().map(|s| group.index_of(s).unwrap()).collect();
        // phi_g . phi_s = phi_{gs} for all g and generators s forces a homomorphism
        let all: Vec<usize> = if group.order() * size <= EXHAUSTIVE_CHECK_BUDGET {
            (0..group.order()).collect()
        } else {
            gen_idx.clone()
        };
        for &g in &all {
            for &s in &gen_idx {
                let gs = group.mul_index(g, s);
                for x in 0..size {
                    if table[g][table[s][x]] != table[gs][x] {
                        return Err(Error::InvalidAction("compatibility law fails".into()));
                    }
                }
            }
        }
        Ok(GSet { group, size, table })
    }

    /// The base set of a permutation group with its defining action.
    pub fn natural(group: Arc<PermGroup>) -> GSet {
        let size = group.base_size();
        let table = group.elements().iter().map(|g| g.images().to_vec()).collect();
        GSet { group, size, table }
    }

    pub fn trivial(group: Arc<PermGroup>, size: usize) -> GSet {
        let table = vec![(0..size).collect(); group.order()];
        GSet { group, size, table }
    }

    /// Left cosets `G/H` with left translation.
    pub fn cosets(group: Arc<PermGroup>, subgroup: &PermGroup) -> Result<GSet> {
        let space = groups::left_cosets(&group, subgroup)?;
        let size = space.len();
        Ok(GSet { group, size, table: space.action })
    }

    /// `G` acting on itself by left multiplication (`G/{e}`).
    pub fn regular(group: Arc<PermGroup>) -> GSet {
        let triv = groups::trivial_group(group.base_size());
        GSet::cosets(group, &triv).expect("trivial subgroup")
    }

    pub fn group(&self) -> &Arc<PermGroup> {
        &self.group
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Image of `point` under the group element with index `k`.
    #[inline]
    pub fn act(&self, k: usize, point: usize) -> usize {
        self.table[k][point]
    }

    pub fn disjoint_union(&self, other: &GSet) -> Result<GSet> {
        check_same_group(&self.group, &other.group)?;
        let table = self
            .table
            .iter()
            .zip(&other.table)
            .map(|(a, b)| a.iter().copied().chain(b.iter().map(|&y| y + self.size)).collect())
            .collect();
        Ok(GSet { group: self.group.clone(), size: self.size + other.size, table })
    }

    /// Product set, with `(x, y)` stored at index `x * other.size + y`.
    pub fn product(&self, other: &GSet) -> Result<GSet> {
        check_same_group(&self.group, &other.group)?;
        let table = self
            .table
            .iter()
            .zip(&other.table)
            .map(|(a, b)| {
                let mut row = Vec::with_capacity(self.size * other.size);
                for x in 0..self.size {
                    for y in 0..other.size {
                        row.push(a[x] * other.size + b[y]);
                    }
                }
                row
            })
            .collect();
        Ok(GSet { group: self.group.clone(), size: self.size * other.size, table })
    }

    /// Orbits of the action, each sorted, ordered by smallest element.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let mut label = vec![usize::MAX; self.size];
        let mut out: Vec<Vec<usize>> = Vec::new();
        for x in 0..self.size {
            if label[x] != usize::MAX {
                continue;
            }
            let mut orbit: Vec<usize> = self.table.iter().map(|row| row[x]).collect();
            orbit.sort_unstable();
            orbit.dedup();
            for &y in &orbit {
                label[y] = out.len();
            }
            out.push(orbit);
        }
        out
    }
}

fn same_group(a: &Arc<PermGroup>, b: &Arc<PermGroup>) -> bool {
    Arc::ptr_eq(a, b) || (a.base_size() == b.base_size() && a.elements() == b.elements())
}

fn check_same_group(a: &Arc<PermGroup>, b: &Arc<PermGroup>) -> Result<()> {
    if same_group(a, b) {
        Ok(())
    } else {
        Err(Error::GroupMismatch)
    }
}

/// The permutation representation `R^X` of a G-set `X`: `g(e_x) = e_{gx}`.
#[derive(Clone, Debug)]
pub struct PermRep {
    gset: GSet,
}

pub fn perm_rep(gset: GSet) -> Result<PermRep> {
    // re-run the law checks; GSet values built by hand-written tables come through here
    let gset = GSet::from_table(gset.group.clone(), gset.size, gset.table)?;
    Ok(PermRep { gset })
}

impl PermRep {
    pub fn natural(group: Arc<PermGroup>) -> PermRep {
        PermRep { gset: GSet::natural(group) }
    }

    pub fn trivial(group: Arc<PermGroup>, dim: usize) -> PermRep {
        PermRep { gset: GSet::trivial(group, dim) }
    }

    pub fn regular(group: Arc<PermGroup>) -> PermRep {
        PermRep { gset: GSet::regular(group) }
    }

    pub fn cosets(group: Arc<PermGroup>, subgroup: &PermGroup) -> Result<PermRep> {
        Ok(PermRep { gset: GSet::cosets(group, subgroup)? })
    }

    pub fn gset(&self) -> &GSet {
        &self.gset
    }

    pub fn dim(&self) -> usize {
        self.gset.size
    }

    pub fn group(&self) -> &Arc<PermGroup> {
        &self.gset.group
    }

    /// Permutation matrix of the group element with index `k`.
    pub fn matrix(&self, k: usize) -> RationalMatrix {
        let n = self.dim();
        let mut m = RationalMatrix::zeros(n, n);
        for x in 0..n {
            m.set(self.gset.act(k, x), x, Rational::one());
        }
        m
    }
}

pub fn direct_sum(v: &PermRep, w: &PermRep) -> Result<PermRep> {
    Ok(PermRep { gset: v.gset.disjoint_union(&w.gset)? })
}

pub fn tensor(v: &PermRep, w: &PermRep) -> Result<PermRep> {
    Ok(PermRep { gset: v.gset.product(&w.gset)? })
}

/// `(V ⊕ W, V ⊗ W)` realized on `X ⊔ Y` and `X × Y`.
pub fn tensor_and_sum(v: &PermRep, w: &PermRep) -> Result<(PermRep, PermRep)> {
    Ok((direct_sum(v, w)?, tensor(v, w)?))
}

/// Basis of `Hom_G(V, W)`: one 0/1 indicator matrix per orbit of the diagonal
/// action on `Y × X`, ordered by the orbit's smallest `(row, col)` pair.
pub fn equivariant_hom_basis(v: &PermRep, w: &PermRep) -> Result<Vec<RationalMatrix>> {
    check_same_group(v.group(), w.group())?;
    let (rows, cols) = (w.dim(), v.dim());
    let order = v.group().order();
    let mut seen = vec![false; rows * cols];
    let mut basis = Vec::new();
    for y in 0..rows {
        for x in 0..cols {
            if seen[y * cols + x] {
                continue;
            }
            let mut m = RationalMatrix::zeros(rows, cols);
            for k in 0..order {
                let (gy, gx) = (w.gset.act(k, y), v.gset.act(k, x));
                if !seen[gy * cols + gx] {
                    seen[gy * cols + gx] = true;
                    m.set(gy, gx, Rational::one());
                }
            }
            basis.push(m);
        }
    }
    Ok(basis)
}

/// Number of orbits of `G` on `Y × X`, i.e. `dim Hom_G(V, W)`, without building matrices.
pub fn hom_dimension(v: &PermRep, w: &PermRep) -> Result<usize> {
    check_same_group(v.group(), w.group())?;
    Ok(v.gset.product(&w.gset)?.orbits().len())
}

/// Orbit indicators `1_{X_j}` of a G-set, ordered by smallest orbit element.
pub fn orbit_indicators(w: &PermRep) -> Vec<Vec<Rational>> {
    w.gset
        .orbits()
        .into_iter()
        .map(|orbit| {
            let mut v = vec![Rational::zero(); w.dim()];
            for x in orbit {
                v[x] = Rational::one();
            }
            v
        })
        .collect()
}

/// `W^G`, spanned by the orbit indicators.
pub fn fixed_point_space(w: &PermRep) -> Subspace {
    Subspace::from_vectors(w.dim(), orbit_indicators(w)).expect("indicator length matches")
}

/// True iff `P_W(g) M = M P_V(g)` for every generator `g`.
pub fn verify_equivariance(m: &RationalMatrix, v: &PermRep, w: &PermRep) -> Result<bool> {
    check_same_group(v.group(), w.group())?;
    if m.rows() != w.dim() {
        return Err(Error::DimensionMismatch { expected: w.dim(), found: m.rows() });
    }
    if m.cols() != v.dim() {
        return Err(Error::DimensionMismatch { expected: v.dim(), found: m.cols() });
    }
    let group = v.group();
    for s in group.generators() {
        let k = group.index_of(s).unwrap();
        for y in 0..m.rows() {
            for x in 0..m.cols() {
                if m.get(w.gset.act(k, y), v.gset.act(k, x)) != m.get(y, x) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// An equivariant affine layer family.
#[derive(Clone, Debug)]
pub struct LayerSpace {
    pub source: PermRep,
    pub target: PermRep,
    pub linear_basis: Vec<RationalMatrix>,
    pub bias_orbits: Vec<Vec<Rational>>,
}

/// The full space `Aff_G(V, W)`.
pub fn layer_full(v: &PermRep, w: &PermRep) -> Result<LayerSpace> {
    Ok(LayerSpace {
        linear_basis: equivariant_hom_basis(v, w)?,
        bias_orbits: orbit_indicators(w),
        source: v.clone(),
        target: w.clone(),
    })
}

/// Circulant matrix `A(e_i)` (1-based `i`): entry `(r, c)` is 1 iff `r - c ≡ i - 1 (mod n)`.
pub fn circulant_unit(n: usize, i: usize) -> RationalMatrix {
    let mut m = RationalMatrix::zeros(n, n);
    for c in 0..n {
        m.set((c + i - 1) % n, c, Rational::one());
    }
    m
}

/// Width-`k` circular convolutions `C^k` on `R^n` under `Z_n`.
pub fn layer_conv(n: usize, k: usize) -> Result<LayerSpace> {
    if n == 0 || k == 0 || k > n {
        return Err(Error::OutOfRange(format!("convolution width {k} on {n} points")));
    }
    let rep = PermRep::natural(Arc::new(groups::cyclic_group(n)?));
    Ok(LayerSpace {
        linear_basis: (1..=k).map(|i| circulant_unit(n, i)).collect(),
        bias_orbits: orbit_indicators(&rep),
        source: rep.clone(),
        target: rep,
    })
}

/// `Aff_{S_n}(R^n, R^n)` with the orbit basis `{id, 11^T - id}`.
pub fn layer_pointnet(n: usize) -> Result<LayerSpace> {
    if n == 0 {
        return Err(Error::OutOfRange("PointNet layer needs n >= 1".into()));
    }
    let rep = PermRep::natural(Arc::new(groups::symmetric_group(n)?));
    layer_full(&rep, &rep)
}

/// Invariant layer `Aff_G(V, R)`.
pub fn layer_invariant(v: &PermRep) -> Result<LayerSpace> {
    layer_full(v, &PermRep::trivial(v.group().clone(), 1))
}

/// A user-supplied layer; every matrix must be equivariant and the set independent.
pub fn layer_custom(v: &PermRep, w: &PermRep, matrices: Vec<RationalMatrix>) -> Result<LayerSpace> {
    for (t, m) in matrices.iter().enumerate() {
        if !verify_equivariance(m, v, w)? {
            return Err(Error::InvalidLayer(format!("basis matrix {t} is not equivariant")));
        }
    }
    if flattened_span(&matrices, v.dim() * w.dim()).dim() != matrices.len() {
        return Err(Error::InvalidLayer("basis matrices are linearly dependent".into()));
    }
    Ok(LayerSpace { linear_basis: matrices, bias_orbits: orbit_indicators(w), source: v.clone(), target: w.clone() })
}

/// Span of matrices viewed as flat vectors.
pub fn flattened_span(matrices: &[RationalMatrix], len: usize) -> Subspace {
    Subspace::from_vectors(len, matrices.iter().map(|m| m.entries().to_vec()).collect()).expect("matrix sizes agree")
}

impl LayerSpace {
    pub fn linear_dim(&self) -> usize {
        self.linear_basis.len()
    }

    /// Re-expresses the linear basis as `phi'^s = sum_t T[s][t] phi^t` for invertible `T`.
    pub fn change_basis(&self, t: &RationalMatrix) -> Result<LayerSpace> {
        let m = self.linear_dim();
        if t.rows() != m || t.cols() != m {
            return Err(Error::DimensionMismatch { expected: m, found: t.rows().max(t.cols()) });
        }
        if t.rank() != m {
            return Err(Error::InvalidLayer("basis change matrix is singular".into()));
        }
        let (rows, cols) = (self.target.dim(), self.source.dim());
        let linear_basis = (0..m)
            .map(|s| {
                (0..m).fold(RationalMatrix::zeros(rows, cols), |acc, k| {
                    acc.add(&self.linear_basis[k].scale(t.get(s, k))).expect("same shape")
                })
            })
            .collect();
        Ok(LayerSpace { linear_basis, ..self.clone() })
    }

    /// Checks the structural invariants: equivariance, independence, bias = orbit indicators.
    pub fn validate(&self) -> Result<()> {
        for m in &self.linear_basis {
            if !verify_equivariance(m, &self.source, &self.target)? {
                return Err(Error::InvalidLayer("non-equivariant basis element".into()));
            }
        }
        if flattened_span(&self.linear_basis, self.source.dim() * self.target.dim()).dim() != self.linear_dim() {
            return Err(Error::InvalidLayer("dependent linear basis".into()));
        }
        if self.bias_orbits != orbit_indicators(&self.target) {
            return Err(Error::InvalidLayer("bias directions are not the target orbit indicators".into()));
        }
        Ok(())
    }
}

/// The basis maps `phi_i : x -> (phi^1_i(x), ..., phi^m_i(x))`, one per output coordinate.
#[derive(Clone, Debug)]
pub struct BasisMapFamily {
    pub name: String,
    pub group: Arc<PermGroup>,
    pub source_dim: usize,
    /// `maps[i]` is `m × source_dim`; its row `t` is row `i` of `phi^t`.
    pub maps: Vec<RationalMatrix>,
}

pub fn basis_maps(layer: &LayerSpace) -> BasisMapFamily {
    let (ell, n, m) = (layer.target.dim(), layer.source.dim(), layer.linear_dim());
    let maps = (0..ell)
        .map(|i| {
            let rows = layer.linear_basis.iter().map(|phi| phi.row(i).to_vec()).collect();
            RationalMatrix::from_rows(rows, n).expect("rows have source length")
        })
        .collect();
    BasisMapFamily { name: String::new(), group: layer.source.group().clone(), source_dim: n, maps }
        .with_m_checked(m)
}

impl BasisMapFamily {
    fn with_m_checked(self, m: usize) -> Self {
        debug_assert!(self.maps.iter().all(|phi| phi.rows() == m));
        self
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Number of maps, `ℓ = |Y|`.
    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    /// Number of linear basis elements `m`.
    pub fn basis_count(&self) -> usize {
        self.maps.first().map_or(0, |phi| phi.rows())
    }

    /// `L(phi_i)`, the span of the rows of each basis map.
    pub fn row_spaces(&self) -> Vec<Subspace> {
        self.maps.iter().map(Subspace::row_space).collect()
    }

    /// `L(phi_i)^⊥`, the admissible directions for each map.
    pub fn kernels(&self) -> Vec<Subspace> {
        self.maps.iter().map(kernel).collect()
    }

    pub fn apply(&self, i: usize, x: &[Rational]) -> Result<Vec<Rational>> {
        self.maps[i].mul_vec(x)
    }

    /// Reassembles `phi^1, ..., phi^m` from the stacked rows.
    pub fn reconstruct_linear_basis(&self) -> Vec<RationalMatrix> {
        (0..self.basis_count())
            .map(|t| {
                let rows = self.maps.iter().map(|phi| phi.row(t).to_vec()).collect();
                RationalMatrix::from_rows(rows, self.source_dim).unwrap()
            })
            .collect()
    }

    /// A basis element whose every row is a distinct unit covector, giving
    /// `phi_i^t = e_{alpha_i}^T`; returns `(t, alpha)`.
    pub fn coordinate_selector(&self) -> Option<(usize, Vec<usize>)> {
        'basis: for t in 0..self.basis_count() {
            let mut alpha = Vec::with_capacity(self.len());
            for phi in &self.maps {
                let row = phi.row(t);
                let nonzero: Vec<usize> = (0..row.len()).filter(|&c| !row[c].is_zero()).collect();
                if nonzero.len() != 1 || !row[nonzero[0]].is_one() || alpha.contains(&nonzero[0]) {
                    continue 'basis;
                }
                alpha.push(nonzero[0]);
            }
            return Some((t, alpha));
        }
        None
    }
}

/// Width-one convolution family on `R^n` (maps `phi_a = e_a^T`).
pub fn c1_family(n: usize) -> Result<BasisMapFamily> {
    Ok(basis_maps(&layer_conv(n, 1)?).named(format!("C1(n={n})")))
}

/// PointNet family with the basis `{id, 11^T}`, so `phi_a = [e_a^T; 1^T]`.
pub fn pointnet_family(n: usize) -> Result<BasisMapFamily> {
    let layer = layer_pointnet(n)?;
    let layer = if n == 1 {
        layer
    } else {
        layer.change_basis(&RationalMatrix::from_i64(&[&[1, 0], &[1, 1]]))?
    };
    Ok(basis_maps(&layer).named(format!("PointNet(n={n})")))
}

/// Regular-hidden family: basis maps of `Aff_{S_n}(R^n, R^{S_n})`.
pub fn regular_family(n: usize) -> Result<BasisMapFamily> {
    let group = Arc::new(groups::symmetric_group(n)?);
    let layer = layer_full(&PermRep::natural(group.clone()), &PermRep::regular(group))?;
    Ok(basis_maps(&layer).named(format!("Regular(n={n})")))
}

/// Ones vector of length `n`.
pub fn ones(n: usize) -> Vec<Rational> {
    vec![rat(1); n]
}
