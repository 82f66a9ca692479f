//! Random generators for topologies, continuous operators and machines.
//!
//! Used by property tests, the acceptance suite and the benchmarks. Every
//! generator takes an explicit RNG so runs are reproducible from a seed.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::machine::{Dynamics, OpFamily};
use crate::operators::{MultiOp, SingleOp};
use crate::topology::FiniteTopology;
use crate::{Alphabet, Endmarkers, FiniteTopMachine, ObservablePair, PointSet, RejectMode};

/// A random topology on `n` points, generated from a few random subsets.
pub fn random_topology<R: Rng + ?Sized>(rng: &mut R, n: usize) -> FiniteTopology {
    let k = rng.gen_range(0..=n + 1);
    let subbasis: Vec<PointSet> = (0..k)
        .map(|_| (0..n).filter(|_| rng.gen_bool(0.5)).collect())
        .collect();
    FiniteTopology::from_subbasis(n, &subbasis)
}

/// A uniformly shuffled permutation of `0..n`.
pub fn random_permutation<R: Rng + ?Sized>(rng: &mut R, n: usize) -> SingleOp {
    let mut table: Vec<usize> = (0..n).collect();
    table.shuffle(rng);
    SingleOp::new(table).expect("permutation is in range")
}

/// Backtracking search over per-point candidates with a pairwise constraint
/// `ok(x, image_x, y, image_y)` checked for every `y ∈ m(x)` and `x ∈ m(y)`.
fn backtrack<T: Clone, R: Rng + ?Sized>(
    rng: &mut R,
    t: &FiniteTopology,
    candidates: &[T],
    ok: &dyn Fn(usize, &T, usize, &T) -> bool,
) -> Option<Vec<T>> {
    fn go<T: Clone, R: Rng + ?Sized>(
        rng: &mut R,
        t: &FiniteTopology,
        candidates: &[T],
        ok: &dyn Fn(usize, &T, usize, &T) -> bool,
        chosen: &mut Vec<T>,
    ) -> bool {
        let x = chosen.len();
        if x == t.n_points() {
            return true;
        }
        let mut order: Vec<usize> = (0..candidates.len()).collect();
        order.shuffle(rng);
        for i in order {
            let c = &candidates[i];
            let fits = (0..x).all(|y| {
                (!t.minimal_neighborhood(x).contains(y) || ok(x, c, y, &chosen[y]))
                    && (!t.minimal_neighborhood(y).contains(x) || ok(y, &chosen[y], x, c))
            }) && ok(x, c, x, c);
            if fits {
                chosen.push(c.clone());
                if go(rng, t, candidates, ok, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    let mut chosen = Vec::with_capacity(t.n_points());
    go(rng, t, candidates, ok, &mut chosen).then_some(chosen)
}

/// A random continuous single-valued operator on `t`.
pub fn random_continuous_map<R: Rng + ?Sized>(rng: &mut R, t: &FiniteTopology) -> SingleOp {
    let candidates: Vec<usize> = (0..t.n_points()).collect();
    // y ∈ m(x) requires f(y) ∈ m(f(x)).
    let ok = |_x: usize, fx: &usize, _y: usize, fy: &usize| t.minimal_neighborhood(*fx).contains(*fy);
    let table = backtrack(rng, t, &candidates, &ok).expect("the identity is continuous");
    SingleOp::new(table).expect("table in range")
}

fn subset_candidates(n: usize, allow_empty: bool) -> Vec<PointSet> {
    let start = if allow_empty { 0 } else { 1 };
    (start..(1u64 << n)).map(PointSet::from_mask).collect()
}

/// A random multi-valued operator on `t` satisfying the upper continuity
/// condition `B(m(x)) ⊆ ⋃_{z ∈ B(x)} m(z)`. Requires `n ≤ 12`.
pub fn random_continuous_multi<R: Rng + ?Sized>(
    rng: &mut R,
    t: &FiniteTopology,
    allow_empty: bool,
) -> MultiOp {
    let candidates = subset_candidates(t.n_points(), allow_empty);
    let ok = |_x: usize, bx: &PointSet, _y: usize, by: &PointSet| by.is_subset(&t.neighborhood_of_set(bx));
    let table = backtrack(rng, t, &candidates, &ok).expect("singleton identity is continuous");
    MultiOp::new(t.n_points(), table).expect("table in range")
}

/// Like [`random_continuous_multi`], additionally lower continuous
/// (`B⁻¹(A)` open for open `A`), so that its lift to the Vietoris
/// hyperspace is continuous.
pub fn random_vietoris_continuous_multi<R: Rng + ?Sized>(
    rng: &mut R,
    t: &FiniteTopology,
    allow_empty: bool,
) -> MultiOp {
    let candidates = subset_candidates(t.n_points(), allow_empty);
    let ok = |_x: usize, bx: &PointSet, _y: usize, by: &PointSet| {
        by.is_subset(&t.neighborhood_of_set(bx))
            && bx.iter().all(|z| by.intersects(t.minimal_neighborhood(z)))
    };
    let table = backtrack(rng, t, &candidates, &ok).expect("singleton identity is continuous");
    MultiOp::new(t.n_points(), table).expect("table in range")
}

/// A random valid observable: each connected component of `t` goes to the
/// accepting set, the rejecting set or (unless `total`) neither.
pub fn random_observable<R: Rng + ?Sized>(rng: &mut R, t: &FiniteTopology, total: bool) -> ObservablePair {
    let mut obs = ObservablePair::default();
    let choices = if total { 2 } else { 3 };
    for c in t.components() {
        match rng.gen_range(0..choices) {
            0 => obs.accept.union_with(&c),
            1 => obs.reject.union_with(&c),
            _ => {}
        }
    }
    obs
}

/// Shape of a random machine.
#[derive(Debug, Clone)]
pub struct MachineShape {
    pub points: usize,
    pub alphabet: Alphabet,
    pub endmarkers: Endmarkers,
    pub deterministic: bool,
    /// No `E_non`: every configuration accepts or rejects.
    pub total: bool,
    /// Allow empty images in nondeterministic operators.
    pub allow_empty: bool,
    /// Keep nondeterministic operators lower continuous as well.
    pub vietoris: bool,
}

impl MachineShape {
    pub fn dta(points: usize, alphabet: &str) -> Self {
        Self {
            points,
            alphabet: Alphabet::from_chars(alphabet).expect("distinct symbols"),
            endmarkers: Endmarkers::BOTH,
            deterministic: true,
            total: false,
            allow_empty: false,
            vietoris: false,
        }
    }

    pub fn nta(points: usize, alphabet: &str) -> Self {
        Self {
            deterministic: false,
            allow_empty: true,
            vietoris: true,
            ..Self::dta(points, alphabet)
        }
    }
}

/// A random valid machine of the given shape over the given topology.
pub fn random_machine_over<R: Rng + ?Sized>(
    rng: &mut R,
    t: FiniteTopology,
    shape: &MachineShape,
) -> FiniteTopMachine {
    let n = t.n_points();
    let letters = shape.alphabet.len();
    let dynamics = if shape.deterministic {
        let mut op = || random_continuous_map(rng, &t);
        let letters = (0..letters).map(|_| op()).collect();
        let left = shape.endmarkers.left.then(&mut op);
        let right = shape.endmarkers.right.then(&mut op);
        Dynamics::Deterministic(OpFamily { letters, left, right })
    } else {
        let mut op = || {
            if shape.vietoris {
                random_vietoris_continuous_multi(rng, &t, shape.allow_empty)
            } else {
                random_continuous_multi(rng, &t, shape.allow_empty)
            }
        };
        let letters = (0..letters).map(|_| op()).collect();
        let left = shape.endmarkers.left.then(&mut op);
        let right = shape.endmarkers.right.then(&mut op);
        Dynamics::Nondeterministic(OpFamily { letters, left, right })
    };
    let observable = random_observable(rng, &t, shape.total);
    FiniteTopMachine {
        alphabet: shape.alphabet.clone(),
        endmarkers: shape.endmarkers,
        initial: rng.gen_range(0..n),
        topology: t,
        dynamics,
        observable,
        reject_mode: RejectMode::default(),
    }
}

/// A random valid machine of the given shape over a random topology.
pub fn random_machine<R: Rng + ?Sized>(rng: &mut R, shape: &MachineShape) -> FiniteTopMachine {
    let t = random_topology(rng, shape.points);
    random_machine_over(rng, t, shape)
}

/// A random column-stochastic `k × k` matrix, row-major.
pub fn random_stochastic<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<Vec<f64>> {
    let mut m = vec![vec![0.0; k]; k];
    for j in 0..k {
        let col: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..1.0) + 1e-3).collect();
        let sum: f64 = col.iter().sum();
        for (row, x) in m.iter_mut().zip(&col) {
            row[j] = x / sum;
        }
    }
    m
}

/// A random `k × k` unitary matrix, from Gram-Schmidt on a random complex
/// matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, k: usize) -> nalgebra::DMatrix<num::complex::Complex64> {
    use num::complex::Complex64;
    let m = nalgebra::DMatrix::from_fn(k, k, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    m.qr().q()
}

/// A random Kraus family `{A_j}` with `Σ A_j† A_j = I`: the blocks of the
/// first `k` columns of a random `(m k) × (m k)` unitary.
pub fn random_kraus<R: Rng + ?Sized>(
    rng: &mut R,
    k: usize,
    m: usize,
) -> Vec<nalgebra::DMatrix<num::complex::Complex64>> {
    let u = random_unitary(rng, m * k);
    (0..m).map(|j| u.view((j * k, 0), (k, k)).into_owned()).collect()
}
