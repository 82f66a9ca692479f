//! Explicit finite topological spaces.
//!
//! Every finite topology is an Alexandrov topology: the intersection of all
//! open sets containing a point is itself open. [`FiniteTopology`] stores that
//! minimal neighbourhood for every point instead of the (possibly
//! exponentially large) family of open sets. A set is open exactly when it
//! contains the minimal neighbourhood of each of its points, and the open
//! family can be materialised with [`FiniteTopology::opens`] when it is small.

mod enumerate;
mod hyperspace;

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::PointSet;

pub use enumerate::{enumerate_topologies, Topologies, MAX_ENUMERATION_POINTS};
pub use hyperspace::{vietoris_space, Carrier, HyperPoint, HyperSpace, DEFAULT_HYPERSPACE_CAP};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TopologyError {
    #[error("a topology needs at least one point")]
    NoPoints,
    #[error("set {set} mentions points outside 0..{n}")]
    PointOutOfRange { set: PointSet, n: usize },
    #[error("the family must contain both the empty set and the full set")]
    MissingEmptyOrFull,
    #[error("family not closed under union: {0} ∪ {1} is missing")]
    NotClosedUnderUnion(PointSet, PointSet),
    #[error("family not closed under intersection: {0} ∩ {1} is missing")]
    NotClosedUnderIntersection(PointSet, PointSet),
    #[error("basis does not cover all points")]
    BasisNotCovering,
    #[error("not a basis: {0} ∩ {1} is not a union of basis sets")]
    NotABasis(PointSet, PointSet),
    #[error("subspace must be nonempty")]
    EmptySubspace,
    #[error("point counts differ: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("hyperspace over {points} base points exceeds the cap of {cap}")]
    CapExceeded { points: usize, cap: usize },
    #[error("cannot enumerate topologies on {0} points (limit {MAX_ENUMERATION_POINTS})")]
    TooManyPoints(usize),
    #[error("invalid neighbourhood system at point {0}")]
    InvalidNeighborhoods(usize),
}

pub type Result<T, E = TopologyError> = std::result::Result<T, E>;

/// A topology on the points `0..n`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FiniteTopology {
    nbhd: Vec<PointSet>,
}

/// Which of the two standard extreme topologies to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CanonicalKind {
    Trivial,
    Discrete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SetStatus {
    pub open: bool,
    pub closed: bool,
}

impl SetStatus {
    pub fn clopen(&self) -> bool {
        self.open && self.closed
    }
}

/// Position of one topology relative to another in the lattice of topologies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatticeOrder {
    Equal,
    /// The left topology has strictly more open sets.
    Finer,
    Coarser,
    Incomparable,
}

/// A partition of `0..n` into disjoint nonempty classes, ordered by least member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointPartition {
    classes: Vec<PointSet>,
    class_of: Vec<usize>,
}

impl PointPartition {
    pub fn classes(&self) -> &[PointSet] {
        &self.classes
    }

    pub fn class_of(&self, x: usize) -> usize {
        self.class_of[x]
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
}

/// A subspace together with the renumbering between old and new points.
#[derive(Debug, Clone)]
pub struct Subspace {
    pub topology: FiniteTopology,
    pub old_to_new: Vec<Option<usize>>,
    pub new_to_old: Vec<usize>,
}

impl Subspace {
    pub fn map_set(&self, set: &PointSet) -> PointSet {
        set.iter()
            .filter_map(|p| self.old_to_new.get(p).copied().flatten())
            .collect()
    }
}

fn check_range(n: usize, set: &PointSet) -> Result<()> {
    if set.bound() > n {
        return Err(TopologyError::PointOutOfRange { set: set.clone(), n });
    }
    Ok(())
}

/// Checks the topology axioms on an explicit family and builds the topology.
pub fn validate_topology(n: usize, family: &[PointSet]) -> Result<FiniteTopology> {
    if n == 0 {
        return Err(TopologyError::NoPoints);
    }
    for set in family {
        check_range(n, set)?;
    }
    let members: HashSet<&PointSet> = family.iter().collect();
    let full = PointSet::full(n);
    if !members.contains(&PointSet::new()) || !members.contains(&full) {
        return Err(TopologyError::MissingEmptyOrFull);
    }
    let distinct: Vec<&PointSet> = {
        let mut v: Vec<&PointSet> = members.iter().copied().collect();
        v.sort();
        v
    };
    for (i, a) in distinct.iter().enumerate() {
        for b in &distinct[i + 1..] {
            if !members.contains(&a.union(b)) {
                return Err(TopologyError::NotClosedUnderUnion((*a).clone(), (*b).clone()));
            }
        }
    }
    for (i, a) in distinct.iter().enumerate() {
        for b in &distinct[i + 1..] {
            if !members.contains(&a.intersection(b)) {
                return Err(TopologyError::NotClosedUnderIntersection(
                    (*a).clone(),
                    (*b).clone(),
                ));
            }
        }
    }
    let nbhd = (0..n)
        .map(|x| {
            distinct
                .iter()
                .filter(|s| s.contains(x))
                .fold(full.clone(), |acc, s| acc.intersection(s))
        })
        .collect();
    Ok(FiniteTopology { nbhd })
}

pub fn canonical_topology(kind: CanonicalKind, n: usize) -> Result<FiniteTopology> {
    if n == 0 {
        return Err(TopologyError::NoPoints);
    }
    Ok(match kind {
        CanonicalKind::Trivial => FiniteTopology::trivial(n),
        CanonicalKind::Discrete => FiniteTopology::discrete(n),
    })
}

/// Closes `basis` under arbitrary unions. Fails when the basis does not cover
/// the space or when the union closure is not closed under intersection.
pub fn generate_from_basis(n: usize, basis: &[PointSet]) -> Result<FiniteTopology> {
    if n == 0 {
        return Err(TopologyError::NoPoints);
    }
    for set in basis {
        check_range(n, set)?;
    }
    let full = PointSet::full(n);
    let cover = basis.iter().fold(PointSet::new(), |acc, b| acc.union(b));
    if cover != full {
        return Err(TopologyError::BasisNotCovering);
    }
    // I is a union of basis sets iff every point of I lies in a basis set inside I.
    let is_union = |target: &PointSet| {
        target
            .iter()
            .all(|y| basis.iter().any(|b| b.contains(y) && b.is_subset(target)))
    };
    for (i, a) in basis.iter().enumerate() {
        for b in &basis[i + 1..] {
            let meet = a.intersection(b);
            if !is_union(&meet) {
                return Err(TopologyError::NotABasis(a.clone(), b.clone()));
            }
        }
    }
    Ok(FiniteTopology::from_subbasis(n, basis))
}

/// Product topology on `n1 * n2` points, pairing `(i, j)` with `i * n2 + j`.
pub fn product_topology(t1: &FiniteTopology, t2: &FiniteTopology) -> FiniteTopology {
    let n2 = t2.n_points();
    let mut nbhd = Vec::with_capacity(t1.n_points() * n2);
    for i in 0..t1.n_points() {
        for j in 0..n2 {
            let mut m = PointSet::new();
            for a in &t1.nbhd[i] {
                for b in &t2.nbhd[j] {
                    m.insert(a * n2 + b);
                }
            }
            nbhd.push(m);
        }
    }
    FiniteTopology { nbhd }
}

/// `{A ∩ S | A open}`, renumbered densely in increasing point order.
pub fn subspace_topology(t: &FiniteTopology, s: &PointSet) -> Result<Subspace> {
    if s.is_empty() {
        return Err(TopologyError::EmptySubspace);
    }
    check_range(t.n_points(), s)?;
    let new_to_old: Vec<usize> = s.to_vec();
    let mut old_to_new = vec![None; t.n_points()];
    for (new, &old) in new_to_old.iter().enumerate() {
        old_to_new[old] = Some(new);
    }
    let nbhd = new_to_old
        .iter()
        .map(|&old| {
            t.nbhd[old]
                .iter()
                .filter_map(|p| old_to_new[p])
                .collect::<PointSet>()
        })
        .collect();
    Ok(Subspace {
        topology: FiniteTopology { nbhd },
        old_to_new,
        new_to_old,
    })
}

impl FiniteTopology {
    pub fn trivial(n: usize) -> Self {
        Self {
            nbhd: vec![PointSet::full(n); n],
        }
    }

    pub fn discrete(n: usize) -> Self {
        Self {
            nbhd: (0..n).map(PointSet::singleton).collect(),
        }
    }

    /// Builds a topology directly from its minimal neighbourhoods.
    ///
    /// Requires `x ∈ m(x)` and `y ∈ m(x) ⇒ m(y) ⊆ m(x)`.
    pub fn from_neighborhoods(nbhd: Vec<PointSet>) -> Result<Self> {
        let n = nbhd.len();
        if n == 0 {
            return Err(TopologyError::NoPoints);
        }
        for (x, m) in nbhd.iter().enumerate() {
            check_range(n, m)?;
            if !m.contains(x) || m.iter().any(|y| !nbhd[y].is_subset(m)) {
                return Err(TopologyError::InvalidNeighborhoods(x));
            }
        }
        Ok(Self { nbhd })
    }

    /// The topology generated by an arbitrary family of sets (closing under
    /// finite intersections and then under arbitrary unions). Always valid.
    pub fn from_subbasis(n: usize, subbasis: &[PointSet]) -> Self {
        let full = PointSet::full(n);
        let nbhd = (0..n)
            .map(|x| {
                subbasis
                    .iter()
                    .filter(|s| s.contains(x))
                    .fold(full.clone(), |acc, s| acc.intersection(s))
            })
            .collect();
        Self { nbhd }
    }

    pub fn n_points(&self) -> usize {
        self.nbhd.len()
    }

    pub fn full_set(&self) -> PointSet {
        PointSet::full(self.n_points())
    }

    /// Smallest open set containing `x`.
    pub fn minimal_neighborhood(&self, x: usize) -> &PointSet {
        &self.nbhd[x]
    }

    pub fn neighborhoods(&self) -> &[PointSet] {
        &self.nbhd
    }

    /// Smallest open set containing every point of `set`.
    pub fn neighborhood_of_set(&self, set: &PointSet) -> PointSet {
        set.iter()
            .fold(PointSet::new(), |acc, x| acc.union(&self.nbhd[x]))
    }

    pub fn is_open(&self, set: &PointSet) -> bool {
        set.bound() <= self.n_points() && set.iter().all(|x| self.nbhd[x].is_subset(set))
    }

    pub fn is_closed(&self, set: &PointSet) -> bool {
        set.bound() <= self.n_points() && self.is_open(&set.complement(self.n_points()))
    }

    pub fn is_clopen(&self, set: &PointSet) -> bool {
        self.is_open(set) && self.is_closed(set)
    }

    pub fn set_status(&self, set: &PointSet) -> SetStatus {
        SetStatus {
            open: self.is_open(set),
            closed: self.is_closed(set),
        }
    }

    /// Every open set, sorted by their sorted point lists.
    pub fn opens(&self) -> Vec<PointSet> {
        let mut family: HashSet<PointSet> = HashSet::from([PointSet::new()]);
        for m in &self.nbhd {
            let grown: Vec<PointSet> = family.iter().map(|f| f.union(m)).collect();
            family.extend(grown);
        }
        let mut opens: Vec<PointSet> = family.into_iter().collect();
        opens.sort_by_key(|s| s.to_vec());
        opens
    }

    /// Every clopen set. Clopen sets are exactly unions of connected
    /// components of the specialisation preorder.
    pub fn clopens(&self) -> Vec<PointSet> {
        let components = self.components();
        let mut out = Vec::with_capacity(1 << components.len().min(20));
        for mask in 0u64..(1u64 << components.len()) {
            let set = components
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .fold(PointSet::new(), |acc, (_, c)| acc.union(c));
            out.push(set);
        }
        out.sort_by_key(|s| s.to_vec());
        out
    }

    /// Connected components (the minimal nonempty clopen sets).
    pub fn components(&self) -> Vec<PointSet> {
        let n = self.n_points();
        let mut seen = PointSet::new();
        let mut out = Vec::new();
        for start in 0..n {
            if seen.contains(start) {
                continue;
            }
            let mut comp = PointSet::singleton(start);
            loop {
                let mut grown = comp.clone();
                for x in 0..n {
                    if self.nbhd[x].intersects(&comp) {
                        grown.insert(x);
                        grown.union_with(&self.nbhd[x]);
                    }
                }
                if grown == comp {
                    break;
                }
                comp = grown;
            }
            seen.union_with(&comp);
            out.push(comp);
        }
        out
    }

    pub fn indistinguishability_partition(&self) -> PointPartition {
        let mut classes: Vec<PointSet> = Vec::new();
        let mut class_of = vec![0; self.n_points()];
        for (x, slot) in class_of.iter_mut().enumerate() {
            match classes
                .iter()
                .position(|c| self.nbhd[c.first().unwrap()] == self.nbhd[x])
            {
                Some(i) => {
                    classes[i].insert(x);
                    *slot = i;
                }
                None => {
                    *slot = classes.len();
                    classes.push(PointSet::singleton(x));
                }
            }
        }
        PointPartition { classes, class_of }
    }

    /// True iff any two distinct points are separated by some open set.
    pub fn is_kolmogorov(&self) -> bool {
        self.indistinguishability_partition().len() == self.n_points()
    }

    pub fn is_trivial(&self) -> bool {
        *self == Self::trivial(self.n_points())
    }

    pub fn is_discrete(&self) -> bool {
        *self == Self::discrete(self.n_points())
    }

    fn same_size(&self, other: &Self) -> Result<()> {
        if self.n_points() != other.n_points() {
            return Err(TopologyError::SizeMismatch(self.n_points(), other.n_points()));
        }
        Ok(())
    }

    /// Compares `self` against `other`: `Finer` means `self` has every open set
    /// of `other` and more.
    pub fn lattice_compare(&self, other: &Self) -> Result<LatticeOrder> {
        self.same_size(other)?;
        // self ⊇ other as families iff every minimal neighbourhood shrinks.
        let finer_eq = (0..self.n_points()).all(|x| self.nbhd[x].is_subset(&other.nbhd[x]));
        let coarser_eq = (0..self.n_points()).all(|x| other.nbhd[x].is_subset(&self.nbhd[x]));
        Ok(match (finer_eq, coarser_eq) {
            (true, true) => LatticeOrder::Equal,
            (true, false) => LatticeOrder::Finer,
            (false, true) => LatticeOrder::Coarser,
            (false, false) => LatticeOrder::Incomparable,
        })
    }

    /// The sets open in both topologies.
    pub fn lattice_meet(&self, other: &Self) -> Result<Self> {
        self.same_size(other)?;
        let nbhd = (0..self.n_points())
            .map(|x| {
                let mut m = PointSet::singleton(x);
                loop {
                    let grown = m
                        .iter()
                        .fold(m.clone(), |acc, y| acc.union(&self.nbhd[y]).union(&other.nbhd[y]));
                    if grown == m {
                        break m;
                    }
                    m = grown;
                }
            })
            .collect();
        Ok(Self { nbhd })
    }

    /// The coarsest topology containing the opens of both.
    pub fn lattice_join(&self, other: &Self) -> Result<Self> {
        self.same_size(other)?;
        let nbhd = self
            .nbhd
            .iter()
            .zip(&other.nbhd)
            .map(|(a, b)| a.intersection(b))
            .collect();
        Ok(Self { nbhd })
    }

    /// Number of topological indistinguishability classes.
    pub fn distinguishability_bound(&self) -> usize {
        self.indistinguishability_partition().len()
    }
}

impl fmt::Debug for FiniteTopology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteTopology")
            .field("n", &self.n_points())
            .field("nbhd", &self.nbhd)
            .finish()
    }
}
