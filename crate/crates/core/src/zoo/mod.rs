//! Classical, probabilistic, quantum and pushdown automata expressed as
//! topological automata, plus the named example machines.

mod pushdown;
mod quantum;
mod stochastic;

use std::fmt;

use thiserror::Error;

use crate::machine::{
    Dynamics, ExtSymbol, LazyDynamics, LazyTopMachine, Observation, OpFamily, Recognizer, ValidationReport,
};
use crate::operators::{MultiOp, SingleOp};
use crate::topology::{validate_topology, FiniteTopology};
use crate::{pset, Alphabet, Dfa, Endmarkers, FiniteTopMachine, ObservablePair, PointSet, RejectMode};

pub use pushdown::{make_pushdown, PushdownDynamics, PushdownMove, PushdownSpec, StackConfig};
pub use quantum::{
    make_mm_qfa, make_mo_qfa, make_superop_qfa, KrausSpec, MmConfig, MmQfaDynamics, MoQfaDynamics,
    QuantumSpec, SuperopDynamics,
};
pub(crate) use stochastic::rational_to_f64;
pub use stochastic::{
    make_exact_pfa, make_gfa, make_pfa, ExactPfaDynamics, ExactStochasticSpec, GfaDynamics, GfaSpec,
    PfaDynamics, StochasticSpec,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ZooError {
    #[error("accepting and rejecting sets overlap")]
    Overlap,
    #[error("index {0} is out of range")]
    IndexOutOfRange(usize),
    #[error("matrix for {symbol} is {rows}x{cols}, expected {k}x{k}")]
    DimensionMismatch {
        symbol: String,
        rows: usize,
        cols: usize,
        k: usize,
    },
    #[error("initial vector has length {0}")]
    BadInitial(usize),
    #[error("matrix for {0} is not column-stochastic")]
    NonStochastic(String),
    #[error("matrix for {0} is not unitary")]
    NonUnitary(String),
    #[error("Kraus operators for {0} do not sum to the identity")]
    KrausIncomplete(String),
    #[error("epsilon {0} is outside [0, 1)")]
    EpsilonOutOfRange(f64),
    #[error("projection index sets must partition the basis")]
    NotAPartition,
    #[error("{0} letter matrices for an alphabet of {1}")]
    LetterCount(usize, usize),
    #[error("pushdown move for {symbol} in state {state} is invalid: {reason}")]
    BadMove {
        symbol: String,
        state: usize,
        reason: String,
    },
    #[error("unknown example {0:?}")]
    UnknownName(String),
    #[error("invalid machine: {0}")]
    Invalid(ValidationReport),
}

pub type Result<T, E = ZooError> = std::result::Result<T, E>;

fn checked(m: FiniteTopMachine) -> Result<FiniteTopMachine> {
    let report = m.validate();
    if report.is_valid() {
        Ok(m)
    } else {
        Err(ZooError::Invalid(report))
    }
}

/// Imports a classical DFA as a 1dta over the discrete topology.
pub fn import_dfa(dfa: &Dfa) -> Result<FiniteTopMachine> {
    if dfa.accept.intersects(&dfa.reject) {
        return Err(ZooError::Overlap);
    }
    checked(dfa.to_machine())
}

/// A classical nondeterministic automaton; images may be empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nfa {
    pub n_states: usize,
    pub alphabet: Alphabet,
    pub endmarkers: Endmarkers,
    pub transitions: OpFamily<MultiOp>,
    pub start: usize,
    pub accept: PointSet,
    pub reject: PointSet,
}

/// Imports a classical NFA as a 1nta over the discrete topology.
pub fn import_nfa(nfa: &Nfa, reject_mode: RejectMode) -> Result<FiniteTopMachine> {
    if nfa.accept.intersects(&nfa.reject) {
        return Err(ZooError::Overlap);
    }
    checked(FiniteTopMachine {
        alphabet: nfa.alphabet.clone(),
        endmarkers: nfa.endmarkers,
        topology: FiniteTopology::discrete(nfa.n_states),
        dynamics: Dynamics::Nondeterministic(nfa.transitions.clone()),
        initial: nfa.start,
        observable: ObservablePair::new(nfa.accept.clone(), nfa.reject.clone()),
        reject_mode,
    })
}

/// The markless NFA for `Σ*a` over `{a, b}`: state 1 is reached by guessing
/// the final `a`, and has no outgoing moves.
pub fn ends_with_a_nfa() -> Nfa {
    let ops = |table: &[PointSet]| MultiOp::new(2, table.to_vec()).unwrap();
    Nfa {
        n_states: 2,
        alphabet: Alphabet::from_chars("ab").unwrap(),
        endmarkers: Endmarkers::NONE,
        transitions: OpFamily {
            letters: vec![ops(&[pset![0, 1], pset![]]), ops(&[pset![0], pset![]])],
            left: None,
            right: None,
        },
        start: 0,
        accept: pset![1],
        reject: pset![0],
    }
}

/// Configuration of a [`language_machine`]: the word read so far, or the
/// verdict sentinel written by `$`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WordConfig {
    Word(String),
    Sentinel(bool),
}

/// Dynamics `B_σ(v) = vσ` over the free monoid, with membership decided by a
/// predicate.
pub struct LanguageDynamics<F> {
    alphabet: Alphabet,
    endmarked: bool,
    pred: F,
}

impl<F: Fn(&str) -> bool> LazyDynamics for LanguageDynamics<F> {
    type Config = WordConfig;

    fn deterministic(&self) -> bool {
        true
    }

    fn init(&self) -> WordConfig {
        WordConfig::Word(String::new())
    }

    fn step(&self, config: &WordConfig, symbol: ExtSymbol) -> Vec<WordConfig> {
        let next = match (config, symbol) {
            (WordConfig::Word(v), ExtSymbol::Letter(i)) => {
                let mut w = v.clone();
                w.push(self.alphabet.symbol(i));
                WordConfig::Word(w)
            }
            (WordConfig::Word(v), ExtSymbol::Right) => WordConfig::Sentinel((self.pred)(v)),
            (c, _) => c.clone(),
        };
        vec![next]
    }

    fn classify(&self, config: &WordConfig) -> Observation {
        let member = match config {
            WordConfig::Word(_) if self.endmarked => return Observation::Neither,
            WordConfig::Word(v) => (self.pred)(v),
            WordConfig::Sentinel(b) => *b,
        };
        if member {
            Observation::Accept
        } else {
            Observation::Reject
        }
    }

    fn render(&self, config: &WordConfig) -> String {
        match config {
            WordConfig::Word(v) => format!("{v:?}"),
            WordConfig::Sentinel(b) => format!("s_{}", u8::from(*b)),
        }
    }
}

/// A machine recognising exactly the words satisfying `pred`. When
/// endmarked, `$` moves the configuration to a sentinel that records the
/// verdict; otherwise the word itself is observed.
pub fn language_machine<F: Fn(&str) -> bool>(
    pred: F,
    alphabet: Alphabet,
    endmarked: bool,
) -> LazyTopMachine<LanguageDynamics<F>> {
    let dynamics = LanguageDynamics {
        alphabet: alphabet.clone(),
        endmarked,
        pred,
    };
    LazyTopMachine::new(alphabet, Endmarkers::uniform(endmarked), dynamics)
}

/// The integer counter: `a` adds one, `b` subtracts one, and the machine
/// accepts exactly at zero.
#[derive(Debug, Clone, Copy, Default)]
pub struct CounterDynamics;

impl LazyDynamics for CounterDynamics {
    type Config = i64;

    fn deterministic(&self) -> bool {
        true
    }

    fn init(&self) -> i64 {
        0
    }

    fn step(&self, config: &i64, symbol: ExtSymbol) -> Vec<i64> {
        vec![match symbol {
            ExtSymbol::Letter(0) => config + 1,
            ExtSymbol::Letter(_) => config - 1,
            _ => *config,
        }]
    }

    fn classify(&self, config: &i64) -> Observation {
        if *config == 0 {
            Observation::Accept
        } else {
            Observation::Reject
        }
    }

    fn render(&self, config: &i64) -> String {
        config.to_string()
    }
}

pub fn equal_machine() -> LazyTopMachine<CounterDynamics> {
    LazyTopMachine::new(
        Alphabet::from_chars("ab").unwrap(),
        Endmarkers::BOTH,
        CounterDynamics,
    )
}

fn counting_machine(counting_letter: usize) -> FiniteTopMachine {
    let t = validate_topology(3, &[pset![], pset![0], pset![1, 2], pset![0, 1, 2]]).expect("valid topology");
    let step = SingleOp::from_fn(3, |n| (n + 1).min(2)).unwrap();
    let mut letters = vec![SingleOp::identity(3), SingleOp::identity(3)];
    letters[counting_letter] = step;
    FiniteTopMachine {
        alphabet: Alphabet::from_chars("01").unwrap(),
        endmarkers: Endmarkers::BOTH,
        topology: t,
        dynamics: Dynamics::Deterministic(OpFamily {
            letters,
            left: Some(SingleOp::identity(3)),
            right: Some(SingleOp::identity(3)),
        }),
        initial: 0,
        observable: ObservablePair::new(pset![0], pset![1, 2]),
        reject_mode: RejectMode::default(),
    }
}

/// The three-point machine over `{∅, {0}, {1,2}, V}` recognising `0*`.
pub fn zero_machine() -> FiniteTopMachine {
    counting_machine(1)
}

/// The ZERO machine with the roles of `0` and `1` swapped: recognises `1*`.
pub fn ones_machine() -> FiniteTopMachine {
    counting_machine(0)
}

/// Balanced parentheses over `()` as a deterministic pushdown machine.
///
/// States: 0 scanning, 1 underflow (dead), 2 accepted at `$` with an empty
/// stack.
pub fn dyck_machine() -> LazyTopMachine<PushdownDynamics> {
    let mv = |next: usize, push: &[usize]| {
        vec![PushdownMove {
            next,
            push: push.to_vec(),
        }]
    };
    const X: usize = 0;
    // Rows are indexed by state, then by top symbol (X, then ⊥).
    let open = vec![
        vec![mv(0, &[X, X]), mv(0, &[X])],
        vec![mv(1, &[X]), mv(1, &[])],
        vec![mv(2, &[X]), mv(2, &[])],
    ];
    let close = vec![
        vec![mv(0, &[]), mv(1, &[])],
        vec![mv(1, &[X]), mv(1, &[])],
        vec![mv(2, &[X]), mv(2, &[])],
    ];
    let end = vec![
        vec![mv(0, &[X]), mv(2, &[])],
        vec![mv(1, &[X]), mv(1, &[])],
        vec![mv(2, &[X]), mv(2, &[])],
    ];
    let spec = PushdownSpec {
        states: 3,
        stack_alphabet: vec!['X'],
        alphabet: Alphabet::from_chars("()").unwrap(),
        endmarkers: Endmarkers::BOTH,
        initial: 0,
        moves: OpFamily {
            letters: vec![open, close],
            left: None,
            right: Some(end),
        },
        accept: pset![2],
        reject: pset![0, 1],
    };
    make_pushdown(spec, true).expect("valid pushdown spec")
}

pub const BUILTIN_NAMES: [&str; 4] = ["zero", "ones", "equal", "dyck"];

/// A named example machine.
pub enum Builtin {
    Finite(FiniteTopMachine),
    Counter(LazyTopMachine<CounterDynamics>),
    Pushdown(LazyTopMachine<PushdownDynamics>),
}

impl Builtin {
    pub fn recognizer(&self) -> &dyn Recognizer {
        match self {
            Builtin::Finite(m) => m,
            Builtin::Counter(m) => m,
            Builtin::Pushdown(m) => m,
        }
    }
}

impl fmt::Debug for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Builtin::Finite(m) => f.debug_tuple("Finite").field(m).finish(),
            Builtin::Counter(_) => f.write_str("Counter"),
            Builtin::Pushdown(_) => f.write_str("Pushdown"),
        }
    }
}

pub fn builtin_example(name: &str) -> Result<Builtin> {
    match name {
        "zero" => Ok(Builtin::Finite(zero_machine())),
        "ones" => Ok(Builtin::Finite(ones_machine())),
        "equal" => Ok(Builtin::Counter(equal_machine())),
        "dyck" => Ok(Builtin::Pushdown(dyck_machine())),
        _ => Err(ZooError::UnknownName(name.to_string())),
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(ZooError::EpsilonOutOfRange(epsilon));
    }
    Ok(())
}

fn check_indices(k: usize, accept: &[usize], reject: &[usize]) -> Result<()> {
    if let Some(&i) = accept.iter().chain(reject).find(|&&i| i >= k) {
        return Err(ZooError::IndexOutOfRange(i));
    }
    if accept.iter().any(|i| reject.contains(i)) {
        return Err(ZooError::Overlap);
    }
    Ok(())
}

/// Classification against two thresholds; meeting both is `Neither`.
fn threshold_observation(accept_hit: bool, reject_hit: bool) -> Observation {
    match (accept_hit, reject_hit) {
        (true, false) => Observation::Accept,
        (false, true) => Observation::Reject,
        _ => Observation::Neither,
    }
}

fn symbol_name(alphabet: &Alphabet, s: ExtSymbol) -> String {
    match s {
        ExtSymbol::Left => "lend".into(),
        ExtSymbol::Right => "rend".into(),
        ExtSymbol::Letter(i) => alphabet.symbol(i).to_string(),
    }
}

#[cfg(test)]
mod tests;
