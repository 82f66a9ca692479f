//! The Vietoris hyperspace of a finite topology.

use std::collections::HashMap;

use super::{FiniteTopology, Result, TopologyError};
use crate::PointSet;

/// Base-point limit for powerset carriers (1023 hyperpoints).
pub const DEFAULT_HYPERSPACE_CAP: usize = 10;

/// A nonempty set of base points used as a single point of a hyperspace.
/// The empty set only appears as the sink of [`Carrier::PowersetWithSink`].
pub type HyperPoint = PointSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Carrier {
    /// Nonempty open sets of the base space.
    OpenSetsOnly,
    /// Every nonempty subset of the base points.
    AllNonemptySubsets,
    /// Every subset, with `∅` as an extra isolated sink hyperpoint at index 0.
    PowersetWithSink,
}

/// A hyperspace: the carrier's subsets, numbered densely, with the topology
/// generated by `[A]^+ = {X | X ⊆ A}` and `[A]^- = {X | X ∩ A ≠ ∅}` over
/// open `A`.
#[derive(Debug, Clone)]
pub struct HyperSpace {
    pub topology: FiniteTopology,
    points: Vec<HyperPoint>,
    index: HashMap<HyperPoint, usize>,
    base_points: usize,
    carrier: Carrier,
}

impl HyperSpace {
    pub fn points(&self) -> &[HyperPoint] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &HyperPoint {
        &self.points[i]
    }

    pub fn index_of(&self, set: &PointSet) -> Option<usize> {
        self.index.get(set).copied()
    }

    pub fn base_points(&self) -> usize {
        self.base_points
    }

    pub fn carrier(&self) -> Carrier {
        self.carrier
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `[A]^+` as a set of hyperpoint indices.
    pub fn upper(&self, a: &PointSet) -> PointSet {
        self.select(|x| x.is_subset(a))
    }

    /// `[A]^-` as a set of hyperpoint indices.
    pub fn lower(&self, a: &PointSet) -> PointSet {
        self.select(|x| x.intersects(a))
    }

    pub fn select(&self, pred: impl Fn(&PointSet) -> bool) -> PointSet {
        self.points
            .iter()
            .enumerate()
            .filter(|(_, x)| pred(x))
            .map(|(i, _)| i)
            .collect()
    }
}

/// Builds the Vietoris hyperspace of `base` over the chosen carrier.
///
/// Powerset carriers are refused when `base` has more than `cap` points; the
/// open-set carrier is refused when it would exceed `2^cap - 1` hyperpoints.
pub fn vietoris_space(base: &FiniteTopology, carrier: Carrier, cap: usize) -> Result<HyperSpace> {
    let n = base.n_points();
    let points: Vec<HyperPoint> = match carrier {
        Carrier::OpenSetsOnly => {
            let opens: Vec<PointSet> = base.opens().into_iter().filter(|s| !s.is_empty()).collect();
            if cap < 64 && opens.len() as u64 >= (1u64 << cap) {
                return Err(TopologyError::CapExceeded { points: n, cap });
            }
            let mut opens = opens;
            opens.sort();
            opens
        }
        Carrier::AllNonemptySubsets | Carrier::PowersetWithSink => {
            if n > cap || n >= 64 {
                return Err(TopologyError::CapExceeded { points: n, cap });
            }
            let start = if carrier == Carrier::PowersetWithSink {
                0
            } else {
                1
            };
            (start..(1u64 << n)).map(PointSet::from_mask).collect()
        }
    };
    let index = points.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();

    // The intersection of all subbasis sets containing X is
    // [m(X)]^+ ∩ ⋂_{x ∈ X} [m(x)]^-, where m(X) is the union of the m(x).
    let nbhd = points
        .iter()
        .map(|x| {
            let hull = base.neighborhood_of_set(x);
            let point_nbhds: Vec<&PointSet> = x.iter().map(|p| base.minimal_neighborhood(p)).collect();
            points
                .iter()
                .enumerate()
                .filter(|(_, y)| y.is_subset(&hull) && point_nbhds.iter().all(|m| y.intersects(m)))
                .map(|(i, _)| i)
                .collect::<PointSet>()
        })
        .collect();
    Ok(HyperSpace {
        topology: FiniteTopology { nbhd },
        points,
        index,
        base_points: n,
        carrier,
    })
}
