//! Transition operators on finite spaces.
//!
//! A [`SingleOp`] maps each point to one point; a [`MultiOp`] maps each point
//! to a (possibly empty) set of points and models nondeterminism. Continuity is
//! decided through minimal neighbourhoods, which is exact on finite spaces.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::topology::{FiniteTopology, HyperSpace, Subspace};
use crate::PointSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OperatorError {
    #[error("operator over {op} points used with a space of {space} points")]
    SizeMismatch { op: usize, space: usize },
    #[error("table entry {entry} for point {point} is out of range")]
    OutOfRange { point: usize, entry: usize },
    #[error("discontinuous at {point}: neighbour {neighbor} escapes the image neighbourhood")]
    Discontinuous { point: usize, neighbor: usize },
    #[error("point {point} leaves the subspace (image {image})")]
    NotClosed { point: usize, image: PointSet },
    #[error("hyperpoint {0} has an empty image")]
    EmptyImage(PointSet),
    #[error("image {image} of hyperpoint {hyperpoint} is outside the carrier")]
    ImageOutsideCarrier { hyperpoint: PointSet, image: PointSet },
    #[error("anchor {anchor} is not a member of its set {set}")]
    AnchorOutside { anchor: usize, set: PointSet },
    #[error("accepting and rejecting sets overlap")]
    OverlappingSets,
    #[error("operator is not a bijection")]
    NotInvertible,
}

pub type Result<T, E = OperatorError> = std::result::Result<T, E>;

/// Why a homeomorphism check failed.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HomeomorphismFailure {
    #[error("point counts differ")]
    SizeMismatch,
    #[error("map is not a bijection")]
    NotBijective,
    #[error("map is not continuous")]
    NotContinuous,
    #[error("inverse map is not continuous")]
    InverseNotContinuous,
    #[error("operators disagree at point {0}")]
    OperatorMismatch(usize),
    #[error("observable sets do not correspond")]
    ObservableMismatch,
    #[error("initial configurations do not correspond")]
    InitialMismatch,
    #[error("alphabets or endmarkers differ")]
    InterfaceMismatch,
    #[error("one machine is deterministic and the other is not")]
    KindMismatch,
}

/// A total single-valued operator on `0..n`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SingleOp {
    table: Vec<usize>,
}

/// A multi-valued operator on `0..n`; images may be empty.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiOp {
    table: Vec<PointSet>,
}

/// How [`MultiOp::lift`] treats an empty union of images.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LiftMode {
    /// An empty image is an error.
    #[default]
    Strict,
    /// An empty image goes to the carrier's `∅` sink hyperpoint.
    Permissive,
}

fn check_size(op: usize, space: usize) -> Result<()> {
    if op != space {
        return Err(OperatorError::SizeMismatch { op, space });
    }
    Ok(())
}

impl SingleOp {
    pub fn new(table: Vec<usize>) -> Result<Self> {
        let n = table.len();
        if let Some((point, &entry)) = table.iter().enumerate().find(|(_, &e)| e >= n) {
            return Err(OperatorError::OutOfRange { point, entry });
        }
        Ok(Self { table })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            table: (0..n).collect(),
        }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize) -> usize) -> Result<Self> {
        Self::new((0..n).map(f).collect())
    }

    pub fn n_points(&self) -> usize {
        self.table.len()
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn apply(&self, v: usize) -> usize {
        self.table[v]
    }

    pub fn image(&self, set: &PointSet) -> PointSet {
        set.iter().map(|v| self.table[v]).collect()
    }

    /// `{v | B(v) ∈ set}`, defined whether or not the operator is invertible.
    pub fn preimage(&self, set: &PointSet) -> PointSet {
        (0..self.n_points())
            .filter(|&v| set.contains(self.table[v]))
            .collect()
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &SingleOp) -> Result<SingleOp> {
        check_size(self.n_points(), other.n_points())?;
        Ok(SingleOp {
            table: other.table.iter().map(|&v| self.table[v]).collect(),
        })
    }

    pub fn to_multi(&self) -> MultiOp {
        MultiOp {
            table: self.table.iter().map(|&v| PointSet::singleton(v)).collect(),
        }
    }

    pub fn is_bijective(&self) -> bool {
        let mut seen = vec![false; self.n_points()];
        self.table.iter().all(|&v| !std::mem::replace(&mut seen[v], true))
    }

    pub fn inverse(&self) -> Result<SingleOp> {
        if !self.is_bijective() {
            return Err(OperatorError::NotInvertible);
        }
        let mut table = vec![0; self.n_points()];
        for (v, &w) in self.table.iter().enumerate() {
            table[w] = v;
        }
        Ok(SingleOp { table })
    }

    /// Continuity with respect to `t`: `B(m(x)) ⊆ m(B(x))` for every point.
    pub fn check_continuity(&self, t: &FiniteTopology) -> Result<()> {
        check_continuity_between(&self.table, t, t)
    }

    pub fn is_continuous(&self, t: &FiniteTopology) -> bool {
        self.check_continuity(t).is_ok()
    }

    /// `B|S`, renumbered through the subspace map. Requires `B(S) ⊆ S`.
    pub fn restrict(&self, sub: &Subspace) -> Result<SingleOp> {
        check_size(self.n_points(), sub.old_to_new.len())?;
        let table = sub
            .new_to_old
            .iter()
            .map(|&old| {
                let image = self.table[old];
                sub.old_to_new[image].ok_or_else(|| OperatorError::NotClosed {
                    point: old,
                    image: PointSet::singleton(image),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SingleOp { table })
    }
}

/// Continuity of a map `f: T1 → T2` given by its table.
pub fn check_continuity_between(table: &[usize], from: &FiniteTopology, to: &FiniteTopology) -> Result<()> {
    check_size(table.len(), from.n_points())?;
    for (x, &fx) in table.iter().enumerate() {
        if fx >= to.n_points() {
            return Err(OperatorError::OutOfRange { point: x, entry: fx });
        }
        let target = to.minimal_neighborhood(fx);
        if let Some(y) = from
            .minimal_neighborhood(x)
            .iter()
            .find(|&y| !target.contains(table[y]))
        {
            return Err(OperatorError::Discontinuous {
                point: x,
                neighbor: y,
            });
        }
    }
    Ok(())
}

impl MultiOp {
    pub fn new(n: usize, table: Vec<PointSet>) -> Result<Self> {
        check_size(table.len(), n)?;
        for (point, image) in table.iter().enumerate() {
            if image.bound() > n {
                return Err(OperatorError::OutOfRange {
                    point,
                    entry: image.bound() - 1,
                });
            }
        }
        Ok(Self { table })
    }

    pub fn identity(n: usize) -> Self {
        SingleOp::identity(n).to_multi()
    }

    pub fn n_points(&self) -> usize {
        self.table.len()
    }

    pub fn table(&self) -> &[PointSet] {
        &self.table
    }

    pub fn apply(&self, v: usize) -> &PointSet {
        &self.table[v]
    }

    /// `B(A) = ⋃_{v ∈ A} B(v)`.
    pub fn image(&self, set: &PointSet) -> PointSet {
        let mut out = PointSet::new();
        for v in set {
            out.union_with(&self.table[v]);
        }
        out
    }

    /// `B◇C` with `(B◇C)(v) = B(C(v))`.
    pub fn compose(&self, other: &MultiOp) -> Result<MultiOp> {
        check_size(self.n_points(), other.n_points())?;
        Ok(MultiOp {
            table: other.table.iter().map(|s| self.image(s)).collect(),
        })
    }

    /// `B⁻¹(v) = {w | v ∈ B(w)}`.
    pub fn invert(&self) -> MultiOp {
        let mut table = vec![PointSet::new(); self.n_points()];
        for (w, image) in self.table.iter().enumerate() {
            for v in image {
                table[v].insert(w);
            }
        }
        MultiOp { table }
    }

    /// The single-valued operator this is, if every image is a singleton.
    pub fn as_single(&self) -> Option<SingleOp> {
        self.table
            .iter()
            .map(|s| (s.len() == 1).then(|| s.first().unwrap()))
            .collect::<Option<Vec<_>>>()
            .map(|table| SingleOp { table })
    }

    /// Upper continuity: `B(m(x)) ⊆ ⋃_{y ∈ B(x)} m(y)` for every point.
    pub fn check_continuity(&self, t: &FiniteTopology) -> Result<()> {
        check_size(self.n_points(), t.n_points())?;
        for x in 0..self.n_points() {
            let allowed = t.neighborhood_of_set(&self.table[x]);
            if let Some(y) = t
                .minimal_neighborhood(x)
                .iter()
                .find(|&y| !self.table[y].is_subset(&allowed))
            {
                return Err(OperatorError::Discontinuous {
                    point: x,
                    neighbor: y,
                });
            }
        }
        Ok(())
    }

    pub fn is_continuous(&self, t: &FiniteTopology) -> bool {
        self.check_continuity(t).is_ok()
    }

    /// Lower continuity: `B⁻¹(A)` is open for every open `A`. Together with
    /// [`MultiOp::check_continuity`] this makes the lifted operator continuous
    /// on the Vietoris hyperspace.
    pub fn check_lower_continuity(&self, t: &FiniteTopology) -> Result<()> {
        check_size(self.n_points(), t.n_points())?;
        for x in 0..self.n_points() {
            for z in &self.table[x] {
                let target = t.minimal_neighborhood(z);
                if let Some(y) = t
                    .minimal_neighborhood(x)
                    .iter()
                    .find(|&y| !self.table[y].intersects(target))
                {
                    return Err(OperatorError::Discontinuous {
                        point: x,
                        neighbor: y,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn restrict(&self, sub: &Subspace) -> Result<MultiOp> {
        check_size(self.n_points(), sub.old_to_new.len())?;
        let table = sub
            .new_to_old
            .iter()
            .map(|&old| {
                let image = &self.table[old];
                image
                    .iter()
                    .map(|p| sub.old_to_new[p])
                    .collect::<Option<PointSet>>()
                    .ok_or_else(|| OperatorError::NotClosed {
                        point: old,
                        image: image.clone(),
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MultiOp { table })
    }

    /// `B'(W) = ⋃_{w ∈ W} B(w)` as a single-valued operator on hyperpoints.
    pub fn lift(&self, hyper: &HyperSpace, mode: LiftMode) -> Result<SingleOp> {
        check_size(self.n_points(), hyper.base_points())?;
        let table = hyper
            .points()
            .iter()
            .map(|w| {
                let image = self.image(w);
                if image.is_empty() && !w.is_empty() && mode == LiftMode::Strict {
                    return Err(OperatorError::EmptyImage(w.clone()));
                }
                hyper
                    .index_of(&image)
                    .ok_or_else(|| OperatorError::ImageOutsideCarrier {
                        hyperpoint: w.clone(),
                        image,
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SingleOp { table })
    }
}

impl From<SingleOp> for MultiOp {
    fn from(op: SingleOp) -> Self {
        op.to_multi()
    }
}

impl fmt::Debug for SingleOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SingleOp{:?}", self.table)
    }
}

impl fmt::Debug for MultiOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiOp{:?}", self.table)
    }
}

/// Checks that `f` is a homeomorphism from `t1` onto `t2`.
pub fn check_homeomorphism(
    t1: &FiniteTopology,
    t2: &FiniteTopology,
    f: &SingleOp,
) -> std::result::Result<(), HomeomorphismFailure> {
    if t1.n_points() != t2.n_points() || f.n_points() != t1.n_points() {
        return Err(HomeomorphismFailure::SizeMismatch);
    }
    let inv = f.inverse().map_err(|_| HomeomorphismFailure::NotBijective)?;
    check_continuity_between(f.table(), t1, t2).map_err(|_| HomeomorphismFailure::NotContinuous)?;
    check_continuity_between(inv.table(), t2, t1).map_err(|_| HomeomorphismFailure::InverseNotContinuous)?;
    Ok(())
}

/// `B1(v) = w` implies `B2(f(v)) = f(w)` for every `v`.
pub fn ops_homeomorphic(
    b1: &MultiOp,
    b2: &MultiOp,
    f: &SingleOp,
) -> std::result::Result<(), HomeomorphismFailure> {
    if b1.n_points() != f.n_points() || b2.n_points() != f.n_points() {
        return Err(HomeomorphismFailure::SizeMismatch);
    }
    for v in 0..b1.n_points() {
        if f.image(b1.apply(v)) != *b2.apply(f.apply(v)) {
            return Err(HomeomorphismFailure::OperatorMismatch(v));
        }
    }
    Ok(())
}

/// `f(A1) = A2` and `f(B1) = B2`.
pub fn pairs_homeomorphic(
    first: (&PointSet, &PointSet),
    second: (&PointSet, &PointSet),
    f: &SingleOp,
) -> std::result::Result<(), HomeomorphismFailure> {
    if f.image(first.0) == *second.0 && f.image(first.1) == *second.1 {
        Ok(())
    } else {
        Err(HomeomorphismFailure::ObservableMismatch)
    }
}

/// The collapser `D[v_acc, v_rej]`: `E_acc ↦ v_acc`, `E_rej ↦ v_rej`, identity
/// elsewhere. Continuity against `t` is checked after construction.
pub fn make_d_operator(
    t: &FiniteTopology,
    accept: &PointSet,
    reject: &PointSet,
    v_acc: usize,
    v_rej: usize,
) -> Result<SingleOp> {
    if accept.intersects(reject) {
        return Err(OperatorError::OverlappingSets);
    }
    for (anchor, set) in [(v_acc, accept), (v_rej, reject)] {
        if !set.contains(anchor) {
            return Err(OperatorError::AnchorOutside {
                anchor,
                set: set.clone(),
            });
        }
    }
    let d = SingleOp::from_fn(t.n_points(), |v| {
        if accept.contains(v) {
            v_acc
        } else if reject.contains(v) {
            v_rej
        } else {
            v
        }
    })?;
    d.check_continuity(t)?;
    Ok(d)
}

/// A monoid generated by single-valued operators under composition.
#[derive(Debug, Clone)]
pub struct GeneratedMonoid {
    pub elements: Vec<SingleOp>,
    /// False when the cap stopped the closure early.
    pub closed: bool,
}

impl GeneratedMonoid {
    pub fn contains(&self, op: &SingleOp) -> bool {
        self.elements.contains(op)
    }
}

/// `n^n`, saturating: every single-valued monoid on `n` points fits in it.
pub fn full_transformation_bound(n: usize) -> usize {
    (0..n)
        .try_fold(1usize, |acc, _| acc.checked_mul(n))
        .unwrap_or(usize::MAX)
}

/// Closure of `{I} ∪ generators` under composition, up to `cap` elements
/// (default `n^n`). Elements appear in breadth-first order starting with `I`.
pub fn generated_monoid(n: usize, generators: &[SingleOp], cap: Option<usize>) -> Result<GeneratedMonoid> {
    for g in generators {
        check_size(g.n_points(), n)?;
    }
    let cap = cap.unwrap_or_else(|| full_transformation_bound(n)).max(1);
    let identity = SingleOp::identity(n);
    let mut seen: HashSet<SingleOp> = HashSet::from([identity.clone()]);
    let mut elements = vec![identity.clone()];
    let mut queue = VecDeque::from([identity]);
    while let Some(e) = queue.pop_front() {
        for g in generators {
            let next = g.compose(&e)?;
            if seen.contains(&next) {
                continue;
            }
            if elements.len() >= cap {
                return Ok(GeneratedMonoid {
                    elements,
                    closed: false,
                });
            }
            seen.insert(next.clone());
            elements.push(next.clone());
            queue.push_back(next);
        }
    }
    Ok(GeneratedMonoid {
        elements,
        closed: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pset;
    use crate::topology::{
        enumerate_topologies, subspace_topology, validate_topology, vietoris_space, Carrier,
        DEFAULT_HYPERSPACE_CAP,
    };
    use proptest::prelude::*;

    fn zero_topology() -> FiniteTopology {
        validate_topology(3, &[pset![], pset![0], pset![1, 2], pset![0, 1, 2]]).unwrap()
    }

    fn zero_b1() -> SingleOp {
        SingleOp::from_fn(3, |n| (n + 1).min(2)).unwrap()
    }

    fn multi(table: &[&[usize]]) -> MultiOp {
        MultiOp::new(
            table.len(),
            table.iter().map(|s| s.iter().copied().collect()).collect(),
        )
        .unwrap()
    }

    fn arb_multi(max_n: usize) -> impl Strategy<Value = MultiOp> {
        (1..=max_n).prop_flat_map(|n| {
            proptest::collection::vec(0u64..(1u64 << n), n).prop_map(move |masks| {
                MultiOp::new(n, masks.into_iter().map(PointSet::from_mask).collect()).unwrap()
            })
        })
    }

    #[test]
    fn continuity_examples() {
        let t = zero_topology();
        assert!(zero_b1().is_continuous(&t));
        assert!(SingleOp::identity(3).is_continuous(&t));
        let f = SingleOp::new(vec![0, 0, 2]).unwrap();
        assert_eq!(
            f.check_continuity(&t),
            Err(OperatorError::Discontinuous {
                point: 1,
                neighbor: 2
            })
        );
        assert_eq!(
            SingleOp::identity(2).check_continuity(&t),
            Err(OperatorError::SizeMismatch { op: 2, space: 3 })
        );
    }

    #[test]
    fn multi_continuity_with_empty_images() {
        let sierpinski = validate_topology(2, &[pset![], pset![0], pset![0, 1]]).unwrap();
        // 1 ∈ m(1) = V sends 0 somewhere while B(1) = ∅ has no neighbourhood.
        assert!(!multi(&[&[0], &[]]).is_continuous(&sierpinski));
        assert!(multi(&[&[], &[0, 1]]).is_continuous(&sierpinski));
        let upper_only = multi(&[&[1], &[0, 1]]);
        assert!(upper_only.is_continuous(&sierpinski));
        assert!(upper_only.check_lower_continuity(&sierpinski).is_err());
    }

    #[test]
    fn compose_examples() {
        let b = zero_b1();
        assert_eq!(SingleOp::identity(3).compose(&b).unwrap(), b);
        assert_eq!(b.compose(&b).unwrap().table(), &[2, 2, 2]);
        let a = multi(&[&[1, 2], &[], &[0]]);
        assert_eq!(a.compose(&MultiOp::identity(3)).unwrap(), a);
        assert!(b.compose(&SingleOp::identity(2)).is_err());
    }

    #[test]
    fn invert_examples() {
        let b = multi(&[&[1, 2], &[2], &[]]);
        assert_eq!(b.invert(), multi(&[&[], &[0], &[0, 1]]));
        assert_eq!(MultiOp::identity(4).invert(), MultiOp::identity(4));
    }

    #[test]
    fn restrict_examples() {
        let t = zero_topology();
        let sub = subspace_topology(&t, &pset![1, 2]).unwrap();
        assert_eq!(zero_b1().restrict(&sub).unwrap().table(), &[1, 1]);
        let full = subspace_topology(&t, &t.full_set()).unwrap();
        assert_eq!(zero_b1().restrict(&full).unwrap(), zero_b1());
        let sub = subspace_topology(&t, &pset![0]).unwrap();
        assert_eq!(
            zero_b1().restrict(&sub),
            Err(OperatorError::NotClosed {
                point: 0,
                image: pset![1]
            })
        );
    }

    #[test]
    fn lift_examples() {
        let d2 = FiniteTopology::discrete(2);
        let h = vietoris_space(&d2, Carrier::AllNonemptySubsets, DEFAULT_HYPERSPACE_CAP).unwrap();
        let lifted = MultiOp::identity(2).lift(&h, LiftMode::Strict).unwrap();
        assert_eq!(lifted, SingleOp::identity(3));

        let b_a = multi(&[&[0, 1], &[]]);
        assert_eq!(
            b_a.lift(&h, LiftMode::Strict),
            Err(OperatorError::EmptyImage(pset![1]))
        );
        assert!(matches!(
            b_a.lift(&h, LiftMode::Permissive),
            Err(OperatorError::ImageOutsideCarrier { .. })
        ));
        let hs = vietoris_space(&d2, Carrier::PowersetWithSink, DEFAULT_HYPERSPACE_CAP).unwrap();
        let lifted = b_a.lift(&hs, LiftMode::Permissive).unwrap();
        let idx = |s: PointSet| hs.index_of(&s).unwrap();
        assert_eq!(lifted.apply(idx(pset![0])), idx(pset![0, 1]));
        assert_eq!(lifted.apply(idx(pset![1])), idx(pset![]));

        let hz = vietoris_space(
            &zero_topology(),
            Carrier::AllNonemptySubsets,
            DEFAULT_HYPERSPACE_CAP,
        )
        .unwrap();
        let lifted = zero_b1().to_multi().lift(&hz, LiftMode::Strict).unwrap();
        let idx = |s: PointSet| hz.index_of(&s).unwrap();
        assert_eq!(lifted.apply(idx(pset![0, 1])), idx(pset![1, 2]));
    }

    #[test]
    fn homeomorphism_examples() {
        let t = zero_topology();
        assert!(check_homeomorphism(&t, &t, &SingleOp::identity(3)).is_ok());
        let swap = SingleOp::new(vec![1, 0]).unwrap();
        assert_eq!(
            check_homeomorphism(&FiniteTopology::discrete(2), &FiniteTopology::trivial(2), &swap),
            Err(HomeomorphismFailure::InverseNotContinuous)
        );
        assert_eq!(
            check_homeomorphism(
                &FiniteTopology::trivial(2),
                &FiniteTopology::discrete(2),
                &SingleOp::identity(2)
            ),
            Err(HomeomorphismFailure::NotContinuous)
        );
        let d = FiniteTopology::discrete(2);
        assert!(check_homeomorphism(&d, &d, &swap).is_ok());
        let collapse = SingleOp::new(vec![0, 0]).unwrap();
        assert_eq!(
            check_homeomorphism(&d, &d, &collapse),
            Err(HomeomorphismFailure::NotBijective)
        );

        let b1 = multi(&[&[1], &[0]]);
        assert!(ops_homeomorphic(&b1, &b1, &swap).is_ok());
        let b2 = multi(&[&[0], &[0]]);
        assert_eq!(
            ops_homeomorphic(&b2, &b2, &swap),
            Err(HomeomorphismFailure::OperatorMismatch(0))
        );
        assert!(pairs_homeomorphic((&pset![0], &pset![1]), (&pset![1], &pset![0]), &swap).is_ok());
    }

    #[test]
    fn d_operator_examples() {
        let t = zero_topology();
        let d = make_d_operator(&t, &pset![0], &pset![1, 2], 0, 1).unwrap();
        assert_eq!(d.table(), &[0, 1, 1]);
        assert_eq!(d.compose(&d).unwrap(), d);
        let d4 = FiniteTopology::discrete(4);
        let d = make_d_operator(&d4, &pset![0], &pset![2], 0, 2).unwrap();
        assert_eq!(d, SingleOp::identity(4));
        assert_eq!(
            make_d_operator(&t, &pset![0], &pset![1, 2], 1, 1),
            Err(OperatorError::AnchorOutside {
                anchor: 1,
                set: pset![0]
            })
        );
        assert_eq!(
            make_d_operator(&t, &pset![0, 1], &pset![1, 2], 0, 2),
            Err(OperatorError::OverlappingSets)
        );
        // On the chain 0 ≤ 1 ≤ 2, folding 0 onto 2 is not monotone.
        let s = validate_topology(3, &[pset![], pset![0], pset![0, 1], pset![0, 1, 2]]).unwrap();
        assert!(matches!(
            make_d_operator(&s, &pset![0, 2], &pset![1], 2, 1),
            Err(OperatorError::Discontinuous { .. })
        ));
    }

    #[test]
    fn monoid_examples() {
        let m = generated_monoid(3, &[], None).unwrap();
        assert_eq!(m.elements, vec![SingleOp::identity(3)]);
        assert!(m.closed);
        let b1 = zero_b1();
        let m = generated_monoid(3, std::slice::from_ref(&b1), None).unwrap();
        let b1b1 = b1.compose(&b1).unwrap();
        assert_eq!(m.elements, vec![SingleOp::identity(3), b1.clone(), b1b1.clone()]);
        assert_eq!(b1.compose(&b1b1).unwrap(), b1b1);
        let swap = SingleOp::new(vec![1, 0]).unwrap();
        let m = generated_monoid(2, &[swap.clone(), swap], None).unwrap();
        assert_eq!(m.elements.len(), 2);
        let m = generated_monoid(3, &[zero_b1()], Some(2)).unwrap();
        assert!(!m.closed);
        assert_eq!(full_transformation_bound(3), 27);
    }

    /// Every multi-op on `n` points.
    fn all_multis(n: usize) -> impl Iterator<Item = MultiOp> {
        let images = 1u64 << n;
        (0..images.pow(n as u32)).map(move |code| {
            let table = (0..n)
                .map(|i| PointSet::from_mask((code / images.pow(i as u32)) % images))
                .collect();
            MultiOp::new(n, table).unwrap()
        })
    }

    #[test]
    fn inverse_basic_exhaustive_small() {
        for n in 1..=3usize {
            let subsets: Vec<PointSet> = (1u64..(1 << n)).map(PointSet::from_mask).collect();
            for b in all_multis(n) {
                let inv = b.invert();
                for a in &subsets {
                    // (1), for A whose points all have nonempty composed images.
                    if a.iter().all(|v| !b.apply(v).is_empty()) {
                        assert!(a.is_subset(&inv.image(&b.image(a))));
                    }
                    if a.iter().all(|v| !inv.apply(v).is_empty()) {
                        assert!(a.is_subset(&b.image(&inv.image(a))));
                    }
                    for a2 in &subsets {
                        if a.intersects(&inv.image(a2)) {
                            assert!(b.image(a).intersects(a2));
                        }
                        if a.is_subset(a2) {
                            assert!(b.image(a).is_subset(&b.image(a2)));
                            assert!(inv.image(a).is_subset(&inv.image(a2)));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn inverse_basic_first_part_needs_nonempty_images() {
        // B(0) = {0}, B(1) = ∅: A = {0,1} has B(A) = {0} ≠ ∅, yet
        // (B⁻¹◇B)(A) = {0} misses 1.
        let b = multi(&[&[0], &[]]);
        let a = pset![0, 1];
        assert!(!b.image(&a).is_empty());
        assert_eq!(b.invert().compose(&b).unwrap().image(&a), pset![0]);
        assert!(!a.is_subset(&b.invert().image(&b.image(&a))));
    }

    proptest! {
        #[test]
        fn inverse_is_involution(b in arb_multi(5)) {
            prop_assert_eq!(b.invert().invert(), b);
        }

        #[test]
        fn left_act_law(n in 1usize..6, a in proptest::collection::vec(0usize..6, 6), b in proptest::collection::vec(0usize..6, 6)) {
            let a = SingleOp::from_fn(n, |i| a[i] % n).unwrap();
            let b = SingleOp::from_fn(n, |i| b[i] % n).unwrap();
            let ab = a.compose(&b).unwrap();
            let mab = a.to_multi().compose(&b.to_multi()).unwrap();
            for v in 0..n {
                prop_assert_eq!(ab.apply(v), a.apply(b.apply(v)));
                prop_assert_eq!(mab.apply(v), &PointSet::singleton(ab.apply(v)));
            }
        }

        #[test]
        fn composition_preserves_continuity(seed in any::<u64>()) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = 1 + (seed % 5) as usize;
            let t = crate::sample::random_topology(&mut rng, n);
            let a = crate::sample::random_continuous_map(&mut rng, &t);
            let b = crate::sample::random_continuous_map(&mut rng, &t);
            prop_assert!(a.compose(&b).unwrap().is_continuous(&t));
            let ma = crate::sample::random_continuous_multi(&mut rng, &t, true);
            let mb = crate::sample::random_continuous_multi(&mut rng, &t, true);
            prop_assert!(ma.compose(&mb).unwrap().is_continuous(&t));
        }
    }

    #[test]
    fn lifted_ops_continuous_when_both_semicontinuous() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in 1..=4 {
            for t in enumerate_topologies(n).unwrap() {
                let h = vietoris_space(&t, Carrier::PowersetWithSink, DEFAULT_HYPERSPACE_CAP).unwrap();
                for _ in 0..3 {
                    let b = crate::sample::random_vietoris_continuous_multi(&mut rng, &t, true);
                    let lifted = b.lift(&h, LiftMode::Permissive).unwrap();
                    assert!(lifted.is_continuous(&h.topology), "{t:?} {b:?}");
                }
            }
        }
        for n in 1..=5 {
            let t = FiniteTopology::discrete(n);
            let h = vietoris_space(&t, Carrier::AllNonemptySubsets, DEFAULT_HYPERSPACE_CAP).unwrap();
            let b = crate::sample::random_vietoris_continuous_multi(&mut rng, &t, false);
            assert!(b.lift(&h, LiftMode::Strict).unwrap().is_continuous(&h.topology));
        }
    }

    #[test]
    fn upper_continuity_alone_does_not_lift() {
        let sierpinski = validate_topology(2, &[pset![], pset![0], pset![0, 1]]).unwrap();
        let b = multi(&[&[1], &[0, 1]]);
        assert!(b.is_continuous(&sierpinski));
        let h = vietoris_space(&sierpinski, Carrier::AllNonemptySubsets, DEFAULT_HYPERSPACE_CAP).unwrap();
        let lifted = b.lift(&h, LiftMode::Strict).unwrap();
        assert!(!lifted.is_continuous(&h.topology));
        // B'⁻¹([{0}]^-) = [{1}]^-, which is not open.
        let pre = lifted.preimage(&h.lower(&pset![0]));
        assert_eq!(pre, h.lower(&pset![1]));
        assert!(!h.topology.is_open(&pre));
    }
}
