//! Finite permutation groups, materialized by full element enumeration.
//!
//! Every group here is a subgroup of the symmetric group on `0..base_size`.
//! Elements are canonicalized by their image arrays, so equality of group
//! elements is array equality and membership is a hash lookup.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default ceiling on the order of any enumerated group.
pub const DEFAULT_ORDER_CAP: usize = 10_080;

/// Largest `n` accepted by [`symmetric_group`] unless a larger cap is passed.
pub const DEFAULT_SYMMETRIC_CAP: usize = 8;

/// A bijection of `0..n`, stored as its image array.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let n = image.len();
        let mut seen = vec![false; n];
        for &i in &image {
            if i >= n || seen[i] {
                return Err(Error::InvalidPermutation(format!("{image:?} is not a bijection")));
            }
            seen[i] = true;
        }
        Ok(Permutation(image))
    }

    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    /// Builds a permutation from disjoint cycles, e.g. `[[0, 1, 2]]` for `0 -> 1 -> 2 -> 0`.
    pub fn from_cycles(n: usize, cycles: &[&[usize]]) -> Result<Self> {
        let mut image: Vec<usize> = (0..n).collect();
        let mut touched = vec![false; n];
        for cycle in cycles {
            for (k, &a) in cycle.iter().enumerate() {
                if a >= n || touched[a] {
                    return Err(Error::InvalidPermutation(format!("bad cycle {cycle:?}")));
                }
                touched[a] = true;
                image[a] = cycle[(k + 1) % cycle.len()];
            }
        }
        Permutation::new(image)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    #[inline]
    pub fn apply(&self, point: usize) -> usize {
        self.0[point]
    }

    /// `self * other`, i.e. apply `other` first, then `self`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        debug_assert_eq!(self.len(), other.len());
        Permutation(other.0.iter().map(|&i| self.0[i]).collect())
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.len()];
        for (i, &j) in self.0.iter().enumerate() {
            inv[j] = i;
        }
        Permutation(inv)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// Parity of the permutation; `true` for even.
    pub fn is_even(&self) -> bool {
        let mut seen = vec![false; self.len()];
        let mut transpositions = 0;
        for start in 0..self.len() {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                i = self.0[i];
                len += 1;
            }
            transpositions += len - 1;
        }
        transpositions % 2 == 0
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Perm{:?}", self.0)
    }
}

/// A finite group of permutations of `0..base_size` with all elements enumerated.
///
/// Elements are stored in breadth-first discovery order starting from the
/// identity, which is always at index 0.
#[derive(Clone)]
pub struct PermGroup {
    base_size: usize,
    generators: Vec<Permutation>,
    elements: Vec<Permutation>,
    index: HashMap<Permutation, usize>,
}

impl PartialEq for PermGroup {
    /// Two groups are equal when they have the same element set.
    fn eq(&self, other: &Self) -> bool {
        self.base_size == other.base_size
            && self.order() == other.order()
            && other.elements.iter().all(|g| self.contains(g))
    }
}

impl Eq for PermGroup {}

impl fmt::Debug for PermGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PermGroup")
            .field("base_size", &self.base_size)
            .field("order", &self.order())
            .field("generators", &self.generators)
            .finish()
    }
}

/// Breadth-first closure of `generators` inside `Sym(base_size)`.
pub fn group_closure(base_size: usize, generators: &[Permutation], order_cap: usize) -> Result<PermGroup> {
    if order_cap == 0 {
        return Err(Error::OutOfRange("order_cap must be at least 1".into()));
    }
    for g in generators {
        if g.len() != base_size {
            return Err(Error::InvalidPermutation(format!(
                "generator {g:?} acts on {} points, expected {base_size}",
                g.len()
            )));
        }
        // re-validate in case the value was deserialized without checks
        Permutation::new(g.0.clone())?;
    }
    let id = Permutation::identity(base_size);
    let mut elements = vec![id.clone()];
    let mut index = HashMap::from([(id, 0usize)]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(k) = queue.pop_front() {
        for s in generators {
            let next = s.compose(&elements[k]);
            if !index.contains_key(&next) {
                if elements.len() == order_cap {
                    return Err(Error::CapExceeded { cap: order_cap });
                }
                index.insert(next.clone(), elements.len());
                queue.push_back(elements.len());
                elements.push(next);
            }
        }
    }
    let generators = generators.iter().filter(|g| !g.is_identity()).cloned().collect();
    Ok(PermGroup { base_size, generators, elements, index })
}

/// Symmetric group `S_n` acting naturally on `0..n`, with `n` at most [`DEFAULT_SYMMETRIC_CAP`].
pub fn symmetric_group(n: usize) -> Result<PermGroup> {
    symmetric_group_capped(n, DEFAULT_SYMMETRIC_CAP)
}

pub fn symmetric_group_capped(n: usize, cap: usize) -> Result<PermGroup> {
    if n == 0 {
        return Err(Error::OutOfRange("symmetric group needs n >= 1".into()));
    }
    if n > cap {
        return Err(Error::CapExceeded { cap });
    }
    let mut gens = Vec::new();
    if n >= 2 {
        gens.push(Permutation::from_cycles(n, &[&[0, 1]])?);
    }
    if n >= 3 {
        let cycle: Vec<usize> = (0..n).collect();
        gens.push(Permutation::from_cycles(n, &[&cycle])?);
    }
    let order: usize = (1..=n).product();
    group_closure(n, &gens, order.max(DEFAULT_ORDER_CAP))
}

/// Cyclic group `Z_n` generated by the shift `i -> i + 1 mod n`.
pub fn cyclic_group(n: usize) -> Result<PermGroup> {
    if n == 0 {
        return Err(Error::OutOfRange("cyclic group needs n >= 1".into()));
    }
    let shift = Permutation((0..n).map(|i| (i + 1) % n).collect());
    group_closure(n, &[shift], n.max(1))
}

/// Alternating group `A_n`, generated by the 3-cycles `(0 1 i)`.
pub fn alternating_group(n: usize) -> Result<PermGroup> {
    if n == 0 || n > DEFAULT_SYMMETRIC_CAP {
        return Err(Error::OutOfRange(format!("alternating group of degree {n}")));
    }
    let gens = (2..n)
        .map(|i| Permutation::from_cycles(n, &[&[0, 1, i]]))
        .collect::<Result<Vec<_>>>()?;
    group_closure(n, &gens, DEFAULT_ORDER_CAP.max((1..=n).product::<usize>() / 2))
}

pub fn trivial_group(n: usize) -> PermGroup {
    group_closure(n, &[], 1).expect("trivial closure cannot exceed cap 1")
}

impl PermGroup {
    /// Validates an explicit element list as a group (contains the identity and is closed).
    pub fn from_elements(base_size: usize, elements: Vec<Permutation>) -> Result<PermGroup> {
        let set: HashSet<&Permutation> = elements.iter().collect();
        if !set.contains(&Permutation::identity(base_size)) {
            return Err(Error::NotASubgroup("identity missing".into()));
        }
        for a in &elements {
            if a.len() != base_size {
                return Err(Error::InvalidPermutation(format!("{a:?} has wrong length")));
            }
            for b in &elements {
                if !set.contains(&a.compose(b)) {
                    return Err(Error::NotASubgroup("element list is not closed under composition".into()));
                }
            }
        }
        group_closure(base_size, &elements, elements.len())
    }

    pub fn base_size(&self) -> usize {
        self.base_size
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    pub fn elements(&self) -> &[Permutation] {
        &self.elements
    }

    pub fn element(&self, k: usize) -> &Permutation {
        &self.elements[k]
    }

    pub fn contains(&self, g: &Permutation) -> bool {
        self.index.contains_key(g)
    }

    pub fn index_of(&self, g: &Permutation) -> Option<usize> {
        self.index.get(g).copied()
    }

    /// Index of the product `elements[a] * elements[b]`.
    pub fn mul_index(&self, a: usize, b: usize) -> usize {
        self.index[&self.elements[a].compose(&self.elements[b])]
    }

    pub fn inverse_index(&self, a: usize) -> usize {
        self.index[&self.elements[a].inverse()]
    }

    pub fn is_abelian(&self) -> bool {
        self.generators
            .iter()
            .all(|a| self.generators.iter().all(|b| a.compose(b) == b.compose(a)))
    }

    /// Checks that every element of `self` lies in `parent` and that `self` is closed.
    pub fn validate_subgroup_of(&self, parent: &PermGroup) -> Result<()> {
        if self.base_size != parent.base_size {
            return Err(Error::NotASubgroup(format!(
                "acts on {} points, parent on {}",
                self.base_size, parent.base_size
            )));
        }
        if let Some(g) = self.elements.iter().find(|g| !parent.contains(g)) {
            return Err(Error::NotASubgroup(format!("{g:?} is not in the parent group")));
        }
        for h in &self.elements {
            for s in &self.generators {
                if !self.contains(&s.compose(h)) {
                    return Err(Error::NotASubgroup("element list is not closed".into()));
                }
            }
        }
        Ok(())
    }

    /// Stabilizer of a base point.
    pub fn stabilizer(&self, point: usize) -> Result<PermGroup> {
        if point >= self.base_size {
            return Err(Error::OutOfRange(format!("point {point} outside base set")));
        }
        let fixing: Vec<Permutation> =
            self.elements.iter().filter(|g| g.apply(point) == point).cloned().collect();
        group_closure(self.base_size, &fixing, fixing.len())
    }

    /// Subgroup generated by two subgroups of `self`.
    pub fn join(&self, a: &PermGroup, b: &PermGroup) -> Result<PermGroup> {
        let gens: Vec<Permutation> = a.generators.iter().chain(&b.generators).cloned().collect();
        let joined = group_closure(self.base_size, &gens, self.order())?;
        joined.validate_subgroup_of(self)?;
        Ok(joined)
    }

    /// Every subgroup of `self`, ordered by increasing order, then by sorted element indices.
    pub fn subgroups(&self) -> Vec<PermGroup> {
        let key = |h: &PermGroup| {
            let mut idx: Vec<usize> = h.elements.iter().map(|g| self.index[g]).collect();
            idx.sort_unstable();
            idx
        };
        let cyclic: Vec<PermGroup> = self
            .elements
            .iter()
            .map(|g| group_closure(self.base_size, std::slice::from_ref(g), self.order()).unwrap())
            .collect();
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        let mut found: Vec<PermGroup> = Vec::new();
        for c in &cyclic {
            if seen.insert(key(c)) {
                found.push(c.clone());
            }
        }
        let mut frontier = found.clone();
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for h in &frontier {
                for c in &cyclic {
                    if c.generators.iter().all(|g| h.contains(g)) {
                        continue;
                    }
                    let joined = self.join(h, c).unwrap();
                    if seen.insert(key(&joined)) {
                        next.push(joined);
                    }
                }
            }
            found.extend(next.iter().cloned());
            frontier = next;
        }
        found.sort_by_cached_key(|h| (h.order(), key(h)));
        found
    }
}

/// True iff `g h g^-1` stays in `h` for all `g` in `g_group` (checked on generators of G).
pub fn is_normal(h: &PermGroup, g_group: &PermGroup) -> Result<bool> {
    h.validate_subgroup_of(g_group)?;
    for g in g_group.generators() {
        let g_inv = g.inverse();
        for x in h.elements() {
            if !h.contains(&g.compose(x).compose(&g_inv)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The set `G/H` of left cosets with the left-translation action of `G`.
#[derive(Clone, Debug)]
pub struct CosetSpace {
    pub parent: PermGroup,
    pub subgroup: PermGroup,
    /// Each coset as a sorted list of parent element indices; ordered by smallest index.
    pub cosets: Vec<Vec<usize>>,
    /// `coset_of[k]` is the coset containing parent element `k`.
    pub coset_of: Vec<usize>,
    /// `action[k][c]` is the coset `g_k * c`.
    pub action: Vec<Vec<usize>>,
}

impl CosetSpace {
    pub fn len(&self) -> usize {
        self.cosets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cosets.is_empty()
    }

    /// Action of a parent element on coset indices, as a permutation.
    pub fn action_permutation(&self, g: &Permutation) -> Permutation {
        let k = self.parent.index_of(g).expect("element of the parent group");
        Permutation(self.action[k].clone())
    }
}

pub fn left_cosets(g_group: &PermGroup, h: &PermGroup) -> Result<CosetSpace> {
    h.validate_subgroup_of(g_group)?;
    let n = g_group.order();
    let mut coset_of = vec![usize::MAX; n];
    let mut cosets = Vec::with_capacity(n / h.order());
    for k in 0..n {
        if coset_of[k] != usize::MAX {
            continue;
        }
        let g = g_group.element(k);
        let mut members: Vec<usize> =
            h.elements().iter().map(|x| g_group.index_of(&g.compose(x)).unwrap()).collect();
        members.sort_unstable();
        for &m in &members {
            coset_of[m] = cosets.len();
        }
        cosets.push(members);
    }
    let action = (0..n)
        .map(|k| cosets.iter().map(|c| coset_of[g_group.mul_index(k, c[0])]).collect())
        .collect();
    Ok(CosetSpace { parent: g_group.clone(), subgroup: h.clone(), cosets, coset_of, action })
}

/// `G/H` as a permutation group on coset indices; requires `H` normal.
pub fn quotient_group(g_group: &PermGroup, h: &PermGroup) -> Result<PermGroup> {
    if !is_normal(h, g_group)? {
        return Err(Error::NotNormal);
    }
    let space = left_cosets(g_group, h)?;
    let gens: Vec<Permutation> = g_group.generators().iter().map(|g| space.action_permutation(g)).collect();
    group_closure(space.len(), &gens, space.len().max(1))
}

/// Double cosets `H g K`: their number and the smallest-index representative of each.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DoubleCosets {
    pub count: usize,
    pub representatives: Vec<Permutation>,
}

pub fn double_cosets(h: &PermGroup, g_group: &PermGroup, k: &PermGroup) -> Result<DoubleCosets> {
    h.validate_subgroup_of(g_group)?;
    k.validate_subgroup_of(g_group)?;
    let mut covered = vec![false; g_group.order()];
    let mut representatives = Vec::new();
    for idx in 0..g_group.order() {
        if covered[idx] {
            continue;
        }
        let g = g_group.element(idx);
        representatives.push(g.clone());
        for a in h.elements() {
            let ag = a.compose(g);
            for b in k.elements() {
                covered[g_group.index_of(&ag.compose(b)).unwrap()] = true;
            }
        }
    }
    Ok(DoubleCosets { count: representatives.len(), representatives })
}

/// Partition of `0..set_size` into orbits under `action(g, point)`.
///
/// The identity and compatibility laws are spot-checked on the generators
/// before the orbits are computed.
pub fn orbits<F>(g_group: &PermGroup, set_size: usize, action: F) -> Result<Vec<Vec<usize>>>
where
    F: Fn(&Permutation, usize) -> usize,
{
    let id = g_group.element(0);
    for p in 0..set_size {
        if action(id, p) != p {
            return Err(Error::InvalidAction(format!("identity moves point {p}")));
        }
    }
    let gens = g_group.generators();
    for s in gens {
        for t in gens {
            let st = s.compose(t);
            for p in 0..set_size {
                let q = action(t, p);
                if q >= set_size {
                    return Err(Error::InvalidAction(format!("point {p} mapped outside the set")));
                }
                if action(s, q) != action(&st, p) {
                    return Err(Error::InvalidAction("compatibility law fails".into()));
                }
            }
        }
    }
    let mut label = vec![usize::MAX; set_size];
    let mut out: Vec<Vec<usize>> = Vec::new();
    for start in 0..set_size {
        if label[start] != usize::MAX {
            continue;
        }
        let id = out.len();
        label[start] = id;
        let mut orbit = vec![start];
        let mut i = 0;
        while i < orbit.len() {
            let p = orbit[i];
            for s in gens {
                let q = action(s, p);
                if label[q] == usize::MAX {
                    label[q] = id;
                    orbit.push(q);
                }
            }
            i += 1;
        }
        orbit.sort_unstable();
        out.push(orbit);
    }
    Ok(out)
}
