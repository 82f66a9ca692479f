//! Independent oracles: bounded language comparison, automata-base axioms and
//! small-topology statistics.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use thiserror::Error;

use crate::machine::{word_count, words_up_to, ExtSymbol, Recognizer, DEFAULT_WORD_BUDGET};
use crate::operators::{generated_monoid, OperatorError, SingleOp};
use crate::topology::{enumerate_topologies, FiniteTopology, TopologyError};
use crate::{FiniteTopMachine, PointSet, Verdict};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("machines have different alphabets")]
    AlphabetMismatch,
    #[error("comparison would visit {words} words (budget {budget})")]
    BudgetExceeded { words: u64, budget: u64 },
    #[error("classification is limited to {max} points, got {n}")]
    TooManyPoints { n: usize, max: usize },
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

pub type Result<T, E = VerifyError> = std::result::Result<T, E>;

/// What counts as agreement on a word.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum CompareMode {
    /// Accept, Reject and Undetermined must all match.
    #[default]
    ThreeValued,
    /// Only membership in the accepted set matters, for comparing against
    /// machines that never leave a word undetermined.
    AcceptedOnly,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Comparison {
    Equivalent {
        words: u64,
    },
    /// The first disagreeing word in length-then-lex order.
    Counterexample {
        word: String,
        left: Verdict,
        right: Verdict,
    },
}

impl Comparison {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Comparison::Equivalent { .. })
    }
}

/// Compares two recognizers on every word of length at most `max_len`.
pub fn brute_force_compare<A, B>(
    m1: &A,
    m2: &B,
    max_len: usize,
    mode: CompareMode,
    budget: u64,
) -> Result<Comparison>
where
    A: Recognizer + ?Sized,
    B: Recognizer + ?Sized,
{
    if m1.alphabet() != m2.alphabet() {
        return Err(VerifyError::AlphabetMismatch);
    }
    let k = m1.alphabet().len();
    let words = word_count(k, max_len);
    if words > budget {
        return Err(VerifyError::BudgetExceeded { words, budget });
    }
    for w in words_up_to(k, max_len) {
        let (left, right) = (m1.verdict_of(&w), m2.verdict_of(&w));
        let agree = match mode {
            CompareMode::ThreeValued => left == right,
            CompareMode::AcceptedOnly => (left == Verdict::Accept) == (right == Verdict::Accept),
        };
        if !agree {
            return Ok(Comparison::Counterexample {
                word: m1.alphabet().decode(&w),
                left,
                right,
            });
        }
    }
    Ok(Comparison::Equivalent { words })
}

/// [`brute_force_compare`] with three-valued verdicts and the default budget.
pub fn equivalent_up_to<A, B>(m1: &A, m2: &B, max_len: usize) -> Result<bool>
where
    A: Recognizer + ?Sized,
    B: Recognizer + ?Sized,
{
    Ok(brute_force_compare(m1, m2, max_len, CompareMode::ThreeValued, DEFAULT_WORD_BUDGET)?.is_equivalent())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomReport {
    pub monoid_size: usize,
    /// False when the cap stopped the closure early.
    pub closed: bool,
    pub identity: bool,
    pub associativity: bool,
    pub triples_checked: usize,
    pub left_act: bool,
}

impl AxiomReport {
    pub fn holds(&self) -> bool {
        self.identity && self.associativity && self.left_act
    }
}

const MAX_TRIPLES: usize = 20_000;

/// Checks the monoid generated by `ops` against the identity laws,
/// associativity (every triple, or a fixed-seed sample of them for large
/// monoids) and the left-act law `(A∘B)•v = A•(B•v)` on every pair and point.
pub fn verify_base_axioms(n: usize, ops: &[SingleOp], cap: Option<usize>) -> Result<AxiomReport> {
    let monoid = generated_monoid(n, ops, cap)?;
    let els = &monoid.elements;
    let id = SingleOp::identity(n);
    let compose = |a: &SingleOp, b: &SingleOp| a.compose(b).expect("same size");

    let identity = els.iter().all(|a| compose(a, &id) == *a && compose(&id, a) == *a)
        && (0..n).all(|v| id.apply(v) == v);

    let m = els.len();
    let triples: Vec<(usize, usize, usize)> = if m.pow(3) <= MAX_TRIPLES {
        (0..m)
            .flat_map(|a| (0..m).flat_map(move |b| (0..m).map(move |c| (a, b, c))))
            .collect()
    } else {
        let mut rng = StdRng::seed_from_u64(0);
        (0..MAX_TRIPLES)
            .map(|_| (rng.gen_range(0..m), rng.gen_range(0..m), rng.gen_range(0..m)))
            .collect()
    };
    let associativity = triples.iter().all(|&(a, b, c)| {
        let (a, b, c) = (&els[a], &els[b], &els[c]);
        compose(&compose(a, b), c) == compose(a, &compose(b, c))
    });

    let left_act = els.iter().all(|a| {
        els.iter().all(|b| {
            let ab = compose(a, b);
            (0..n).all(|v| ab.apply(v) == a.apply(b.apply(v)))
        })
    });

    Ok(AxiomReport {
        monoid_size: m,
        closed: monoid.closed,
        identity,
        associativity,
        triples_checked: triples.len(),
        left_act,
    })
}

/// The number of indistinguishability classes: an upper bound on the states
/// of the quotient DFA.
pub fn distinguishability_bound(t: &FiniteTopology) -> usize {
    t.indistinguishability_partition().len()
}

/// Searches for a continuation telling configurations `u` and `v` apart:
/// a word `x` (followed by `$` when the machine has one) after which the
/// two observations differ. Only deterministic machines are supported.
pub fn separating_suffix(m: &FiniteTopMachine, u: usize, v: usize, max_len: usize) -> Option<String> {
    let ops = m.dynamics.as_single()?;
    let run = |mut p: usize, w: &[usize]| {
        for &a in w {
            p = ops.letters[a].apply(p);
        }
        if let Some(r) = ops.get(ExtSymbol::Right) {
            p = r.apply(p);
        }
        m.observe(p)
    };
    words_up_to(m.alphabet.len(), max_len)
        .find(|w| run(u, w) != run(v, w))
        .map(|w| m.alphabet.decode(&w))
}

pub const MAX_CLASSIFY_POINTS: usize = 4;

/// Structural data for one topology on `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopologyRow {
    pub topology: FiniteTopology,
    pub opens: usize,
    pub kolmogorov: bool,
    pub classes: usize,
    pub trivial: bool,
    pub discrete: bool,
    /// Ordered pairs of disjoint clopen sets, `(∅, ∅)` included.
    pub observables: usize,
}

pub fn classify_topology(t: &FiniteTopology) -> TopologyRow {
    let clopens = t.clopens();
    let observables = clopens
        .iter()
        .map(|a| clopens.iter().filter(|r| !a.intersects(r)).count())
        .sum();
    TopologyRow {
        topology: t.clone(),
        opens: t.opens().len(),
        kolmogorov: t.is_kolmogorov(),
        classes: distinguishability_bound(t),
        trivial: t.is_trivial(),
        discrete: t.is_discrete(),
        observables,
    }
}

/// One row per topology on `0..n`, in enumeration order.
pub fn classify_small_topologies(n: usize) -> Result<Vec<TopologyRow>> {
    if n > MAX_CLASSIFY_POINTS {
        return Err(VerifyError::TooManyPoints {
            n,
            max: MAX_CLASSIFY_POINTS,
        });
    }
    Ok(enumerate_topologies(n)?.map(|t| classify_topology(&t)).collect())
}

/// The observable pairs counted by [`classify_topology`], listed.
pub fn clopen_observables(t: &FiniteTopology) -> Vec<(PointSet, PointSet)> {
    let clopens = t.clopens();
    let mut pairs = Vec::new();
    for a in &clopens {
        for r in clopens.iter().filter(|r| !a.intersects(r)) {
            pairs.push((a.clone(), r.clone()));
        }
    }
    pairs
}
