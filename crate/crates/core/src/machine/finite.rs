use std::collections::VecDeque;
use std::fmt;

use super::{
    Alphabet, Endmarkers, ExtSymbol, MachineError, ObservablePair, Observation, Recognizer, RejectMode,
    Result, RunTrace, TraceStep, Verdict,
};
use crate::operators::{
    check_homeomorphism, ops_homeomorphic, pairs_homeomorphic, HomeomorphismFailure, MultiOp, OperatorError,
    SingleOp,
};
use crate::topology::FiniteTopology;
use crate::PointSet;

/// One operator per letter, plus the endmarker operators when present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpFamily<O> {
    pub letters: Vec<O>,
    pub left: Option<O>,
    pub right: Option<O>,
}

impl<O> OpFamily<O> {
    pub fn get(&self, s: ExtSymbol) -> Option<&O> {
        match s {
            ExtSymbol::Left => self.left.as_ref(),
            ExtSymbol::Right => self.right.as_ref(),
            ExtSymbol::Letter(i) => self.letters.get(i),
        }
    }

    /// Present operators in the order `¢`, letters, `$`.
    pub fn iter(&self) -> impl Iterator<Item = (ExtSymbol, &O)> {
        self.left
            .iter()
            .map(|o| (ExtSymbol::Left, o))
            .chain(
                self.letters
                    .iter()
                    .enumerate()
                    .map(|(i, o)| (ExtSymbol::Letter(i), o)),
            )
            .chain(self.right.iter().map(|o| (ExtSymbol::Right, o)))
    }

    pub fn map<P>(&self, mut f: impl FnMut(&O) -> P) -> OpFamily<P> {
        OpFamily {
            letters: self.letters.iter().map(&mut f).collect(),
            left: self.left.as_ref().map(&mut f),
            right: self.right.as_ref().map(&mut f),
        }
    }

    pub fn try_map<P, E>(&self, mut f: impl FnMut(&O) -> Result<P, E>) -> Result<OpFamily<P>, E> {
        Ok(OpFamily {
            letters: self.letters.iter().map(&mut f).collect::<Result<_, E>>()?,
            left: self.left.as_ref().map(&mut f).transpose()?,
            right: self.right.as_ref().map(&mut f).transpose()?,
        })
    }
}

/// The operator family of a machine: single-valued for a 1dta, multi-valued
/// for a 1nta.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Dynamics {
    Deterministic(OpFamily<SingleOp>),
    Nondeterministic(OpFamily<MultiOp>),
}

impl Dynamics {
    pub fn is_deterministic(&self) -> bool {
        matches!(self, Dynamics::Deterministic(_))
    }

    /// The multi-valued view; single-valued operators get singleton images.
    pub fn to_multi(&self) -> OpFamily<MultiOp> {
        match self {
            Dynamics::Deterministic(ops) => ops.map(SingleOp::to_multi),
            Dynamics::Nondeterministic(ops) => ops.clone(),
        }
    }

    pub fn as_single(&self) -> Option<&OpFamily<SingleOp>> {
        match self {
            Dynamics::Deterministic(ops) => Some(ops),
            Dynamics::Nondeterministic(_) => None,
        }
    }

    /// Image of a configuration set under one symbol.
    pub fn image(&self, s: ExtSymbol, set: &PointSet) -> PointSet {
        match self {
            Dynamics::Deterministic(ops) => ops.get(s).map_or_else(|| set.clone(), |b| b.image(set)),
            Dynamics::Nondeterministic(ops) => ops.get(s).map_or_else(|| set.clone(), |b| b.image(set)),
        }
    }

    fn letter_count(&self) -> usize {
        match self {
            Dynamics::Deterministic(ops) => ops.letters.len(),
            Dynamics::Nondeterministic(ops) => ops.letters.len(),
        }
    }

    fn marker_presence(&self) -> (bool, bool) {
        match self {
            Dynamics::Deterministic(ops) => (ops.left.is_some(), ops.right.is_some()),
            Dynamics::Nondeterministic(ops) => (ops.left.is_some(), ops.right.is_some()),
        }
    }
}

/// A 1dta or 1nta over an explicit finite topology.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteTopMachine {
    pub alphabet: Alphabet,
    pub endmarkers: Endmarkers,
    pub topology: FiniteTopology,
    pub dynamics: Dynamics,
    pub initial: usize,
    pub observable: ObservablePair,
    /// Only consulted by nondeterministic machines.
    pub reject_mode: RejectMode,
}

/// A single reason a machine is invalid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    OpCountMismatch {
        letters: usize,
        alphabet: usize,
    },
    MissingEndmarkerOp(&'static str),
    UnexpectedEndmarkerOp(&'static str),
    OpSize {
        symbol: String,
        size: usize,
    },
    OpOutOfRange {
        symbol: String,
    },
    Discontinuous {
        symbol: String,
        point: usize,
        neighbor: usize,
    },
    InitialOutOfRange(usize),
    ObservableOutOfRange,
    ObservableOverlap(PointSet),
    NotClopen {
        role: &'static str,
        set: PointSet,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::OpCountMismatch { letters, alphabet } => {
                write!(f, "{letters} letter operators for an alphabet of {alphabet}")
            }
            Violation::MissingEndmarkerOp(m) => write!(f, "missing operator for {m}"),
            Violation::UnexpectedEndmarkerOp(m) => write!(f, "unexpected operator for {m}"),
            Violation::OpSize { symbol, size } => {
                write!(f, "operator {symbol} acts on {size} points")
            }
            Violation::OpOutOfRange { symbol } => write!(f, "operator {symbol} leaves the space"),
            Violation::Discontinuous {
                symbol,
                point,
                neighbor,
            } => write!(
                f,
                "operator {symbol} is not continuous at point {point} (neighbour {neighbor})"
            ),
            Violation::InitialOutOfRange(v) => write!(f, "initial point {v} is out of range"),
            Violation::ObservableOutOfRange => write!(f, "observable mentions unknown points"),
            Violation::ObservableOverlap(s) => {
                write!(f, "accept and reject sets overlap in {s}")
            }
            Violation::NotClopen { role, set } => write!(f, "{role} set {set} is not clopen"),
        }
    }
}

/// Every violation found by [`FiniteTopMachine::validate`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationReport {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlimReport {
    pub slim: bool,
    pub unreachable: PointSet,
}

fn marker_name(s: ExtSymbol) -> &'static str {
    match s {
        ExtSymbol::Left => "lend",
        _ => "rend",
    }
}

impl FiniteTopMachine {
    pub fn n_points(&self) -> usize {
        self.topology.n_points()
    }

    pub fn is_deterministic(&self) -> bool {
        self.dynamics.is_deterministic()
    }

    pub fn symbol_label(&self, s: ExtSymbol) -> String {
        s.label(&self.alphabet)
    }

    /// Checks operator shapes, continuity, the initial point and the
    /// observable. Every problem is reported.
    pub fn validate(&self) -> ValidationReport {
        let n = self.n_points();
        let mut violations = Vec::new();
        if self.dynamics.letter_count() != self.alphabet.len() {
            violations.push(Violation::OpCountMismatch {
                letters: self.dynamics.letter_count(),
                alphabet: self.alphabet.len(),
            });
        }
        let (has_left, has_right) = self.dynamics.marker_presence();
        for (sym, want, have) in [
            (ExtSymbol::Left, self.endmarkers.left, has_left),
            (ExtSymbol::Right, self.endmarkers.right, has_right),
        ] {
            if want && !have {
                violations.push(Violation::MissingEndmarkerOp(marker_name(sym)));
            } else if have && !want {
                violations.push(Violation::UnexpectedEndmarkerOp(marker_name(sym)));
            }
        }
        let mut record = |sym: ExtSymbol, size: usize, result: std::result::Result<(), OperatorError>| {
            let symbol = match sym {
                ExtSymbol::Letter(_) => self.symbol_label(sym),
                _ => marker_name(sym).to_string(),
            };
            match result {
                Ok(()) => {}
                Err(OperatorError::Discontinuous { point, neighbor }) => {
                    violations.push(Violation::Discontinuous {
                        symbol,
                        point,
                        neighbor,
                    })
                }
                Err(OperatorError::SizeMismatch { .. }) => {
                    violations.push(Violation::OpSize { symbol, size })
                }
                Err(_) => violations.push(Violation::OpOutOfRange { symbol }),
            }
        };
        match &self.dynamics {
            Dynamics::Deterministic(ops) => {
                for (sym, op) in ops.iter() {
                    record(sym, op.n_points(), op.check_continuity(&self.topology));
                }
            }
            Dynamics::Nondeterministic(ops) => {
                for (sym, op) in ops.iter() {
                    record(sym, op.n_points(), op.check_continuity(&self.topology));
                }
            }
        }
        if self.initial >= n {
            violations.push(Violation::InitialOutOfRange(self.initial));
        }
        let obs = &self.observable;
        if obs.accept.bound() > n || obs.reject.bound() > n {
            violations.push(Violation::ObservableOutOfRange);
        } else {
            if obs.accept.intersects(&obs.reject) {
                violations.push(Violation::ObservableOverlap(obs.accept.intersection(&obs.reject)));
            }
            for (role, set) in [("accept", &obs.accept), ("reject", &obs.reject)] {
                if !self.topology.is_clopen(set) {
                    violations.push(Violation::NotClopen {
                        role,
                        set: set.clone(),
                    });
                }
            }
        }
        ValidationReport { violations }
    }

    pub fn observe(&self, v: usize) -> Observation {
        if self.observable.accept.contains(v) {
            Observation::Accept
        } else if self.observable.reject.contains(v) {
            Observation::Reject
        } else {
            Observation::Neither
        }
    }

    /// Verdict of a final configuration set under this machine's rules.
    pub fn verdict_of_set(&self, set: &PointSet) -> Verdict {
        match &self.dynamics {
            Dynamics::Deterministic(_) => match set.first() {
                Some(v) => Verdict::from_observation(self.observe(v)),
                None => Verdict::Undetermined,
            },
            Dynamics::Nondeterministic(_) => self.reject_mode.verdict(set.iter().map(|v| self.observe(v))),
        }
    }

    /// The final configuration set reached on a word (a singleton for a 1dta).
    pub fn final_set(&self, word: &[usize]) -> PointSet {
        match &self.dynamics {
            Dynamics::Deterministic(ops) => PointSet::singleton(self.final_point(ops, word)),
            Dynamics::Nondeterministic(ops) => {
                let mut set = PointSet::singleton(self.initial);
                for s in self.endmarkers.extend(word) {
                    if let Some(b) = ops.get(s) {
                        set = b.image(&set);
                    }
                }
                set
            }
        }
    }

    fn final_point(&self, ops: &OpFamily<SingleOp>, word: &[usize]) -> usize {
        let mut v = self.initial;
        for s in self.endmarkers.extend(word) {
            if let Some(b) = ops.get(s) {
                v = b.apply(v);
            }
        }
        v
    }

    /// Configurations reachable from the initial point under any sequence of
    /// operators (endmarkers included when present).
    pub fn reachable(&self) -> PointSet {
        let multi = self.dynamics.to_multi();
        let mut seen = PointSet::singleton(self.initial);
        let mut queue = VecDeque::from([self.initial]);
        while let Some(v) = queue.pop_front() {
            for (_, op) in multi.iter() {
                for w in op.apply(v) {
                    if !seen.contains(w) {
                        seen.insert(w);
                        queue.push_back(w);
                    }
                }
            }
        }
        seen
    }

    /// Whether every point is reached from the initial one. Defined for
    /// markless machines only.
    pub fn is_slim(&self) -> Result<SlimReport> {
        if !self.endmarkers.is_markless() {
            return Err(MachineError::Endmarked);
        }
        let unreachable = self.reachable().complement(self.n_points());
        Ok(SlimReport {
            slim: unreachable.is_empty(),
            unreachable,
        })
    }

    fn render_set(&self, set: &PointSet) -> String {
        if self.is_deterministic() {
            set.first().map_or_else(String::new, |v| v.to_string())
        } else {
            set.to_string()
        }
    }
}

impl Recognizer for FiniteTopMachine {
    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn endmarkers(&self) -> Endmarkers {
        self.endmarkers
    }

    fn verdict_of(&self, word: &[usize]) -> Verdict {
        match &self.dynamics {
            Dynamics::Deterministic(ops) => {
                Verdict::from_observation(self.observe(self.final_point(ops, word)))
            }
            Dynamics::Nondeterministic(_) => self.verdict_of_set(&self.final_set(word)),
        }
    }

    fn trace_of(&self, word: &[usize]) -> RunTrace {
        let mut set = PointSet::singleton(self.initial);
        let mut steps = vec![TraceStep {
            symbol: None,
            config: self.render_set(&set),
        }];
        for s in self.endmarkers.extend(word) {
            set = self.dynamics.image(s, &set);
            steps.push(TraceStep {
                symbol: Some(self.symbol_label(s)),
                config: self.render_set(&set),
            });
        }
        RunTrace {
            steps,
            verdict: self.verdict_of_set(&set),
        }
    }
}

/// Checks that `f` is a homeomorphism between the machines: initial points,
/// spaces, operators and observables all correspond.
pub fn machines_homeomorphic(
    m1: &FiniteTopMachine,
    m2: &FiniteTopMachine,
    f: &SingleOp,
) -> std::result::Result<(), HomeomorphismFailure> {
    if m1.alphabet != m2.alphabet || m1.endmarkers != m2.endmarkers {
        return Err(HomeomorphismFailure::InterfaceMismatch);
    }
    if m1.is_deterministic() != m2.is_deterministic() {
        return Err(HomeomorphismFailure::KindMismatch);
    }
    check_homeomorphism(&m1.topology, &m2.topology, f)?;
    if f.apply(m1.initial) != m2.initial {
        return Err(HomeomorphismFailure::InitialMismatch);
    }
    let (ops1, ops2) = (m1.dynamics.to_multi(), m2.dynamics.to_multi());
    for ((_, b1), (_, b2)) in ops1.iter().zip(ops2.iter()) {
        ops_homeomorphic(b1, b2, f)?;
    }
    pairs_homeomorphic(
        (&m1.observable.accept, &m1.observable.reject),
        (&m2.observable.accept, &m2.observable.reject),
        f,
    )
}
