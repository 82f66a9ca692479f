//! Machine-to-machine transformations. Every construction validates its
//! output and fails rather than return an invalid machine.

use std::collections::{BTreeMap, HashMap, VecDeque};

use thiserror::Error;

use crate::machine::{Dynamics, ExtSymbol, OpFamily, ValidationReport};
use crate::operators::{
    check_continuity_between, make_d_operator, LiftMode, MultiOp, OperatorError, SingleOp,
};
use crate::topology::{
    product_topology, subspace_topology, vietoris_space, Carrier, HyperSpace, TopologyError,
    DEFAULT_HYPERSPACE_CAP,
};
use crate::{Alphabet, Dfa, FiniteTopMachine, ObservablePair, PointPartition, PointSet, RejectMode};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructionError {
    #[error("input machine is invalid: {0}")]
    InvalidInput(ValidationReport),
    #[error("construction produced an invalid machine: {0}")]
    InvalidOutput(ValidationReport),
    #[error("construction needs a deterministic machine")]
    NotDeterministic,
    #[error("construction needs the {0} endmarker")]
    MissingEndmarker(&'static str),
    #[error("construction needs a markless machine")]
    Endmarked,
    #[error("operator {symbol} maps class {class} into several classes")]
    ClassMapConflict { symbol: String, class: usize },
    #[error("class {0} meets both the accepting and rejecting sets")]
    AcceptRejectClash(usize),
    #[error("initial configuration {{{0}}} is not open")]
    InitialNotOpen(usize),
    #[error("lifted operator {0} is not continuous on the hyperspace")]
    LiftedOperatorDiscontinuous(String),
    #[error("hyperspace observable is not clopen")]
    ObservableNotClopen,
    #[error("left endmarker operator is not invertible")]
    NotInvertible,
    #[error("inverse of the left endmarker operator is not continuous")]
    InverseNotContinuous,
    #[error("symbol {0:?} is not in the alphabet")]
    UnknownSymbol(char),
    #[error("machines have different alphabets or endmarkers")]
    AlphabetMismatch,
    #[error("{{v0}} and its complement must both be open")]
    PreconditionTopology,
    #[error("accepting and rejecting sets must be nonempty")]
    EmptyObservable,
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

pub type Result<T, E = ConstructionError> = std::result::Result<T, E>;

fn check_input(m: &FiniteTopMachine) -> Result<()> {
    let report = m.validate();
    if report.is_valid() {
        Ok(())
    } else {
        Err(ConstructionError::InvalidInput(report))
    }
}

fn checked(m: FiniteTopMachine) -> Result<FiniteTopMachine> {
    let report = m.validate();
    if report.is_valid() {
        Ok(m)
    } else {
        Err(ConstructionError::InvalidOutput(report))
    }
}

fn single_ops(m: &FiniteTopMachine) -> Result<&OpFamily<SingleOp>> {
    m.dynamics.as_single().ok_or(ConstructionError::NotDeterministic)
}

/// A quotient automaton and the classes its states stand for.
#[derive(Debug, Clone)]
pub struct Quotient {
    pub dfa: Dfa,
    /// State `i` of the DFA is class `i`.
    pub classes: PointPartition,
    pub warnings: Vec<String>,
}

/// Collapses topologically indistinguishable configurations of a 1dta into
/// the states of a DFA.
pub fn quotient_to_dfa(m: &FiniteTopMachine) -> Result<Quotient> {
    check_input(m)?;
    let ops = single_ops(m)?;
    let classes = m.topology.indistinguishability_partition();
    let transitions = ops.try_map(|b| -> Result<SingleOp> {
        let table = classes
            .classes()
            .iter()
            .map(|class| classes.class_of(b.apply(class.first().unwrap())))
            .collect();
        Ok(SingleOp::new(table)?)
    })?;
    for (sym, b) in ops.iter() {
        let q = transitions.get(sym).unwrap();
        for (c, class) in classes.classes().iter().enumerate() {
            if class.iter().any(|v| classes.class_of(b.apply(v)) != q.apply(c)) {
                return Err(ConstructionError::ClassMapConflict {
                    symbol: m.symbol_label(sym),
                    class: c,
                });
            }
        }
    }
    let mut accept = PointSet::new();
    let mut reject = PointSet::new();
    let mut warnings = Vec::new();
    for (c, class) in classes.classes().iter().enumerate() {
        let acc = class.intersects(&m.observable.accept);
        let rej = class.intersects(&m.observable.reject);
        if acc && rej {
            return Err(ConstructionError::AcceptRejectClash(c));
        }
        let observed = if acc {
            &m.observable.accept
        } else {
            &m.observable.reject
        };
        if (acc || rej) && !class.is_subset(observed) {
            warnings.push(format!("class {c} {class} is only partly observed"));
        }
        if acc {
            accept.insert(c);
        }
        if rej {
            reject.insert(c);
        }
    }
    let dfa = Dfa {
        n_states: classes.len(),
        alphabet: m.alphabet.clone(),
        endmarkers: m.endmarkers,
        transitions,
        start: classes.class_of(m.initial),
        accept,
        reject,
    };
    Ok(Quotient {
        dfa,
        classes,
        warnings,
    })
}

/// How [`vietoris_determinize`] builds its output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeterminizeMode {
    /// A 1dta over the Vietoris hyperspace.
    Explicit { lift: LiftMode, cap: usize },
    /// The reachable subsets only, as a DFA.
    Subset,
}

impl Default for DeterminizeMode {
    fn default() -> Self {
        DeterminizeMode::Explicit {
            lift: LiftMode::Strict,
            cap: DEFAULT_HYPERSPACE_CAP,
        }
    }
}

#[derive(Debug, Clone)]
pub enum Determinized {
    Explicit {
        machine: FiniteTopMachine,
        hyperspace: HyperSpace,
    },
    Subset(SubsetDfa),
}

impl Determinized {
    /// The result as a 1dta (a subset DFA becomes a discrete-topology machine).
    pub fn into_machine(self) -> FiniteTopMachine {
        match self {
            Determinized::Explicit { machine, .. } => machine,
            Determinized::Subset(s) => s.dfa.to_machine(),
        }
    }
}

/// A subset-construction DFA; state `i` stands for `subsets[i]`.
#[derive(Debug, Clone)]
pub struct SubsetDfa {
    pub dfa: Dfa,
    pub subsets: Vec<PointSet>,
}

pub fn vietoris_determinize(m: &FiniteTopMachine, mode: DeterminizeMode) -> Result<Determinized> {
    match mode {
        DeterminizeMode::Explicit { lift, cap } => {
            let (machine, hyperspace) = determinize_explicit(m, lift, cap)?;
            Ok(Determinized::Explicit { machine, hyperspace })
        }
        DeterminizeMode::Subset => Ok(Determinized::Subset(determinize_subsets(m)?)),
    }
}

/// The hyperspace 1dta: configurations are sets of base configurations,
/// operators are lifted by union, the initial point is `{v0}`, and the
/// observable is `([E_acc]^-, [E_rej]^+)`.
///
/// With [`LiftMode::Permissive`] the carrier includes `∅` as an isolated
/// sink, which is never accepting and, under [`RejectMode::Subset`], never
/// rejecting. Under [`RejectMode::Disjoint`] the rejecting set is the
/// complement of `[E_acc]^-`.
pub fn determinize_explicit(
    m: &FiniteTopMachine,
    lift: LiftMode,
    cap: usize,
) -> Result<(FiniteTopMachine, HyperSpace)> {
    check_input(m)?;
    if !m.topology.is_open(&PointSet::singleton(m.initial)) {
        return Err(ConstructionError::InitialNotOpen(m.initial));
    }
    let carrier = match lift {
        LiftMode::Strict => Carrier::AllNonemptySubsets,
        LiftMode::Permissive => Carrier::PowersetWithSink,
    };
    let h = vietoris_space(&m.topology, carrier, cap)?;
    let multi = m.dynamics.to_multi();
    let lifted = multi.try_map(|b| b.lift(&h, lift))?;
    for (sym, op) in lifted.iter() {
        if !op.is_continuous(&h.topology) {
            return Err(ConstructionError::LiftedOperatorDiscontinuous(
                m.symbol_label(sym),
            ));
        }
    }
    let accept = h.lower(&m.observable.accept);
    let reject = match m.reject_mode {
        RejectMode::Subset => h
            .upper(&m.observable.reject)
            .difference(&h.select(|x| x.is_empty())),
        RejectMode::Disjoint => accept.complement(h.len()),
    };
    if !h.topology.is_clopen(&accept) || !h.topology.is_clopen(&reject) {
        return Err(ConstructionError::ObservableNotClopen);
    }
    let initial = h
        .index_of(&PointSet::singleton(m.initial))
        .expect("singletons are hyperpoints");
    let machine = checked(FiniteTopMachine {
        alphabet: m.alphabet.clone(),
        endmarkers: m.endmarkers,
        topology: h.topology.clone(),
        dynamics: Dynamics::Deterministic(lifted),
        initial,
        observable: ObservablePair::new(accept, reject),
        reject_mode: RejectMode::default(),
    })?;
    Ok((machine, h))
}

/// The classical subset construction over reachable configuration sets,
/// with the machine's verdict rule on each set.
pub fn determinize_subsets(m: &FiniteTopMachine) -> Result<SubsetDfa> {
    check_input(m)?;
    let symbols: Vec<ExtSymbol> = m
        .endmarkers
        .left
        .then_some(ExtSymbol::Left)
        .into_iter()
        .chain((0..m.alphabet.len()).map(ExtSymbol::Letter))
        .chain(m.endmarkers.right.then_some(ExtSymbol::Right))
        .collect();
    let start = PointSet::singleton(m.initial);
    let mut index: HashMap<PointSet, usize> = HashMap::from([(start.clone(), 0)]);
    let mut subsets = vec![start];
    let mut edges: Vec<Vec<usize>> = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let mut row = Vec::with_capacity(symbols.len());
        for &s in &symbols {
            let next = m.dynamics.image(s, &subsets[i]);
            let j = *index.entry(next.clone()).or_insert_with(|| {
                subsets.push(next);
                queue.push_back(subsets.len() - 1);
                subsets.len() - 1
            });
            row.push(j);
        }
        if edges.len() <= i {
            edges.resize(i + 1, Vec::new());
        }
        edges[i] = row;
    }
    let n = subsets.len();
    let op = |k: usize| SingleOp::new((0..n).map(|i| edges[i][k]).collect()).expect("in range");
    let mut k = 0;
    let mut next_op = || {
        k += 1;
        op(k - 1)
    };
    let left = m.endmarkers.left.then(&mut next_op);
    let letters = (0..m.alphabet.len()).map(|_| next_op()).collect();
    let right = m.endmarkers.right.then(&mut next_op);
    let mut accept = PointSet::new();
    let mut reject = PointSet::new();
    for (i, s) in subsets.iter().enumerate() {
        match m.verdict_of_set(s) {
            crate::Verdict::Accept => accept.insert(i),
            crate::Verdict::Reject => reject.insert(i),
            crate::Verdict::Undetermined => {}
        }
    }
    Ok(SubsetDfa {
        dfa: Dfa {
            n_states: n,
            alphabet: m.alphabet.clone(),
            endmarkers: m.endmarkers,
            transitions: OpFamily { letters, left, right },
            start: 0,
            accept,
            reject,
        },
        subsets,
    })
}

/// Removes `¢` by conjugating every letter operator with `B_¢`, which must
/// be a homeomorphism: `B'_σ = B_¢⁻¹ B_σ B_¢` and `B'_$ = B_$ B_¢`.
/// A machine without `$` instead observes through `B_¢`.
pub fn eliminate_left_endmarker(m: &FiniteTopMachine) -> Result<FiniteTopMachine> {
    check_input(m)?;
    let ops = single_ops(m)?;
    let left = ops
        .left
        .as_ref()
        .ok_or(ConstructionError::MissingEndmarker("left"))?;
    let inv = left.inverse().map_err(|_| ConstructionError::NotInvertible)?;
    check_continuity_between(inv.table(), &m.topology, &m.topology)
        .map_err(|_| ConstructionError::InverseNotContinuous)?;
    let letters = ops
        .letters
        .iter()
        .map(|b| Ok(inv.compose(&b.compose(left)?)?))
        .collect::<Result<Vec<_>>>()?;
    let (right, observable) = match &ops.right {
        Some(r) => (Some(r.compose(left)?), m.observable.clone()),
        None => (
            None,
            ObservablePair::new(
                left.preimage(&m.observable.accept),
                left.preimage(&m.observable.reject),
            ),
        ),
    };
    let mut out = m.clone();
    out.endmarkers.left = false;
    out.dynamics = Dynamics::Deterministic(OpFamily {
        letters,
        left: None,
        right,
    });
    out.observable = observable;
    checked(out)
}

/// Removes `$` by pulling the observable back along `B_$`.
pub fn eliminate_right_endmarker(m: &FiniteTopMachine) -> Result<FiniteTopMachine> {
    check_input(m)?;
    let ops = single_ops(m)?;
    let right = ops
        .right
        .as_ref()
        .ok_or(ConstructionError::MissingEndmarker("right"))?;
    let observable = ObservablePair::new(
        right.preimage(&m.observable.accept),
        right.preimage(&m.observable.reject),
    );
    let mut out = m.clone();
    out.endmarkers.right = false;
    out.dynamics = Dynamics::Deterministic(OpFamily {
        letters: ops.letters.clone(),
        left: ops.left.clone(),
        right: None,
    });
    out.observable = observable;
    checked(out)
}

/// The machine reading `σ` as the word `h(σ)`. The new alphabet is the
/// domain of `h`; endmarker operators are kept.
pub fn apply_inverse_homomorphism(
    m: &FiniteTopMachine,
    h: &BTreeMap<char, String>,
) -> Result<FiniteTopMachine> {
    check_input(m)?;
    let alphabet = Alphabet::new(h.keys().copied()).expect("map keys are distinct");
    let n = m.n_points();
    let images: Vec<Vec<usize>> = h
        .values()
        .map(|w| {
            w.chars()
                .map(|c| m.alphabet.index_of(c).ok_or(ConstructionError::UnknownSymbol(c)))
                .collect()
        })
        .collect::<Result<_>>()?;
    let dynamics = match &m.dynamics {
        Dynamics::Deterministic(ops) => {
            let letters = images
                .iter()
                .map(|w| {
                    w.iter()
                        .try_fold(SingleOp::identity(n), |acc, &i| acc.then(&ops.letters[i]))
                })
                .collect::<Result<_, _>>()?;
            Dynamics::Deterministic(OpFamily {
                letters,
                left: ops.left.clone(),
                right: ops.right.clone(),
            })
        }
        Dynamics::Nondeterministic(ops) => {
            let letters = images
                .iter()
                .map(|w| {
                    w.iter()
                        .try_fold(MultiOp::identity(n), |acc, &i| ops.letters[i].compose(&acc))
                })
                .collect::<Result<_, _>>()?;
            Dynamics::Nondeterministic(OpFamily {
                letters,
                left: ops.left.clone(),
                right: ops.right.clone(),
            })
        }
    };
    let mut out = m.clone();
    out.alphabet = alphabet;
    out.dynamics = dynamics;
    checked(out)
}

/// Swaps the accepting and rejecting sets.
pub fn complement_machine(m: &FiniteTopMachine) -> Result<FiniteTopMachine> {
    check_input(m)?;
    let mut out = m.clone();
    out.observable = m.observable.swapped();
    checked(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProductMode {
    Union,
    Intersection,
}

/// Runs two 1dta's side by side on the product space. Point `(i, j)` has
/// index `i · n2 + j`.
pub fn product_machine(
    m1: &FiniteTopMachine,
    m2: &FiniteTopMachine,
    mode: ProductMode,
) -> Result<FiniteTopMachine> {
    check_input(m1)?;
    check_input(m2)?;
    if m1.alphabet != m2.alphabet || m1.endmarkers != m2.endmarkers {
        return Err(ConstructionError::AlphabetMismatch);
    }
    let (ops1, ops2) = (single_ops(m1)?, single_ops(m2)?);
    let (n1, n2) = (m1.n_points(), m2.n_points());
    let pair = |b1: &SingleOp, b2: &SingleOp| {
        SingleOp::from_fn(n1 * n2, |p| b1.apply(p / n2) * n2 + b2.apply(p % n2))
    };
    let letters = ops1
        .letters
        .iter()
        .zip(&ops2.letters)
        .map(|(a, b)| pair(a, b))
        .collect::<Result<_, _>>()?;
    let marker = |a: &Option<SingleOp>, b: &Option<SingleOp>| match (a, b) {
        (Some(a), Some(b)) => pair(a, b).map(Some),
        _ => Ok(None),
    };
    let left = marker(&ops1.left, &ops2.left)?;
    let right = marker(&ops1.right, &ops2.right)?;
    let rect = |a: &PointSet, b: &PointSet| -> PointSet {
        a.iter().flat_map(|i| b.iter().map(move |j| i * n2 + j)).collect()
    };
    let (v1, v2) = (m1.topology.full_set(), m2.topology.full_set());
    let (o1, o2) = (&m1.observable, &m2.observable);
    let either = |e1: &PointSet, e2: &PointSet| rect(&v1, e2).union(&rect(e1, &v2));
    let observable = match mode {
        ProductMode::Union => {
            ObservablePair::new(either(&o1.accept, &o2.accept), rect(&o1.reject, &o2.reject))
        }
        ProductMode::Intersection => {
            ObservablePair::new(rect(&o1.accept, &o2.accept), either(&o1.reject, &o2.reject))
        }
    };
    checked(FiniteTopMachine {
        alphabet: m1.alphabet.clone(),
        endmarkers: m1.endmarkers,
        topology: product_topology(&m1.topology, &m2.topology),
        dynamics: Dynamics::Deterministic(OpFamily { letters, left, right }),
        initial: m1.initial * n2 + m2.initial,
        observable,
        reject_mode: RejectMode::default(),
    })
}

/// Restricts a markless machine to the configurations reachable from its
/// initial one.
pub fn normalize_machine(m: &FiniteTopMachine) -> Result<FiniteTopMachine> {
    check_input(m)?;
    if !m.endmarkers.is_markless() {
        return Err(ConstructionError::Endmarked);
    }
    let sub = subspace_topology(&m.topology, &m.reachable())?;
    let dynamics = match &m.dynamics {
        Dynamics::Deterministic(ops) => Dynamics::Deterministic(ops.try_map(|b| b.restrict(&sub))?),
        Dynamics::Nondeterministic(ops) => Dynamics::Nondeterministic(ops.try_map(|b| b.restrict(&sub))?),
    };
    checked(FiniteTopMachine {
        alphabet: m.alphabet.clone(),
        endmarkers: m.endmarkers,
        initial: sub.old_to_new[m.initial].expect("initial point is reachable"),
        observable: ObservablePair::new(
            sub.map_set(&m.observable.accept),
            sub.map_set(&m.observable.reject),
        ),
        topology: sub.topology,
        dynamics,
        reject_mode: m.reject_mode,
    })
}

/// A 1nta recognising the reversal of `m`'s language. It starts at the
/// accepting anchor, runs the inverse operators backwards and accepts when
/// it can reach `v0`. `anchors` default to the least members of the
/// accepting and rejecting sets. The result rejects when `v0` is
/// unreachable, so it uses [`RejectMode::Disjoint`].
pub fn reverse_nta(m: &FiniteTopMachine, anchors: Option<(usize, usize)>) -> Result<FiniteTopMachine> {
    check_input(m)?;
    if !m.endmarkers.left {
        return Err(ConstructionError::MissingEndmarker("left"));
    }
    if !m.endmarkers.right {
        return Err(ConstructionError::MissingEndmarker("right"));
    }
    let v0 = PointSet::singleton(m.initial);
    if !m.topology.is_clopen(&v0) {
        return Err(ConstructionError::PreconditionTopology);
    }
    let obs = &m.observable;
    let (v_acc, v_rej) = match anchors {
        Some(a) => a,
        None => match (obs.accept.first(), obs.reject.first()) {
            (Some(a), Some(r)) => (a, r),
            _ => return Err(ConstructionError::EmptyObservable),
        },
    };
    let d = make_d_operator(&m.topology, &obs.accept, &obs.reject, v_acc, v_rej)?;
    let ops = m.dynamics.to_multi();
    let right = ops.right.as_ref().expect("validated");
    let left = ops.left.as_ref().expect("validated");
    let reversed = OpFamily {
        letters: ops.letters.iter().map(MultiOp::invert).collect(),
        left: Some(d.to_multi().compose(right)?.invert()),
        right: Some(left.invert()),
    };
    let n = m.n_points();
    checked(FiniteTopMachine {
        alphabet: m.alphabet.clone(),
        endmarkers: m.endmarkers,
        topology: m.topology.clone(),
        dynamics: Dynamics::Nondeterministic(reversed),
        initial: v_acc,
        observable: ObservablePair::new(v0.clone(), v0.complement(n)),
        reject_mode: RejectMode::Disjoint,
    })
}

trait Then {
    fn then(&self, next: &SingleOp) -> std::result::Result<SingleOp, OperatorError>;
}

impl Then for SingleOp {
    /// `next ∘ self`: apply `self` first.
    fn then(&self, next: &SingleOp) -> std::result::Result<SingleOp, OperatorError> {
        next.compose(self)
    }
}
