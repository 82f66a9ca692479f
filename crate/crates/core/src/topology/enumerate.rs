//! Exhaustive enumeration of the topologies on a small point set.
//!
//! Finite topologies on `0..n` are in bijection with preorders on `0..n`.
//! Orientation: `x ≤ y` iff `x` lies in every open set containing `y`, i.e.
//! `x ∈ m(y)`. The open sets are then exactly the down-closed sets.

use super::{FiniteTopology, Result, TopologyError};
use crate::PointSet;

pub const MAX_ENUMERATION_POINTS: usize = 5;

/// Streams every topology on `0..n` exactly once.
pub fn enumerate_topologies(n: usize) -> Result<Topologies> {
    if n == 0 {
        return Err(TopologyError::NoPoints);
    }
    if n > MAX_ENUMERATION_POINTS {
        return Err(TopologyError::TooManyPoints(n));
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|x| (0..n).filter(move |&y| y != x).map(move |y| (x, y)))
        .collect();
    Ok(Topologies {
        n,
        end: 1u64 << pairs.len(),
        pairs,
        next: 0,
    })
}

pub struct Topologies {
    n: usize,
    pairs: Vec<(usize, usize)>,
    next: u64,
    end: u64,
}

impl Iterator for Topologies {
    type Item = FiniteTopology;

    fn next(&mut self) -> Option<FiniteTopology> {
        while self.next < self.end {
            let bits = self.next;
            self.next += 1;
            // down[y] = {x | x ≤ y}
            let mut down: Vec<u32> = (0..self.n).map(|y| 1u32 << y).collect();
            for (i, &(x, y)) in self.pairs.iter().enumerate() {
                if bits & (1 << i) != 0 {
                    down[y] |= 1 << x;
                }
            }
            let transitive = (0..self.n).all(|y| {
                (0..self.n)
                    .filter(|&x| down[y] & (1 << x) != 0)
                    .all(|x| down[x] & !down[y] == 0)
            });
            if transitive {
                let nbhd = down.iter().map(|&d| PointSet::from_mask(d as u64)).collect();
                return Some(FiniteTopology { nbhd });
            }
        }
        None
    }
}
