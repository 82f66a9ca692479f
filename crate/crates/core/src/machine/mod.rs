//! One-way topological automata.
//!
//! A machine reads `¢ x $` (or just `x` when markless), applying one operator
//! per symbol to its configuration, and observes the final configuration
//! once. [`FiniteTopMachine`] carries an explicit finite topology;
//! [`LazyTopMachine`] wraps an infinite configuration space described only by
//! its dynamics.

mod dfa;
mod finite;
mod lazy;

use std::fmt;

use thiserror::Error;

pub use dfa::Dfa;
pub use finite::{
    machines_homeomorphic, Dynamics, FiniteTopMachine, OpFamily, SlimReport, ValidationReport, Violation,
};
pub use lazy::{LazyDynamics, LazyTopMachine, Observation};

/// Default cap on the number of words any exhaustive enumeration may visit.
pub const DEFAULT_WORD_BUDGET: u64 = 20_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MachineError {
    #[error("symbol {0:?} is not in the alphabet")]
    UnknownSymbol(char),
    #[error("alphabet lists {0:?} twice")]
    DuplicateSymbol(char),
    #[error("operation requires a markless machine")]
    Endmarked,
    #[error("enumeration would visit {words} words (budget {budget})")]
    BudgetExceeded { words: u64, budget: u64 },
}

pub type Result<T, E = MachineError> = std::result::Result<T, E>;

/// An input alphabet: distinct characters kept in sorted order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Alphabet {
    symbols: Vec<char>,
}

impl Alphabet {
    pub fn new(symbols: impl IntoIterator<Item = char>) -> Result<Self> {
        let mut symbols: Vec<char> = symbols.into_iter().collect();
        symbols.sort_unstable();
        if let Some(w) = symbols.windows(2).find(|w| w[0] == w[1]) {
            return Err(MachineError::DuplicateSymbol(w[0]));
        }
        Ok(Self { symbols })
    }

    /// Builds an alphabet from the characters of `s`, e.g. `"ab"`.
    pub fn from_chars(s: &str) -> Result<Self> {
        Self::new(s.chars())
    }

    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn index_of(&self, c: char) -> Option<usize> {
        self.symbols.binary_search(&c).ok()
    }

    pub fn symbol(&self, i: usize) -> char {
        self.symbols[i]
    }

    /// Letter indices of `word`.
    pub fn encode(&self, word: &str) -> Result<Vec<usize>> {
        word.chars()
            .map(|c| self.index_of(c).ok_or(MachineError::UnknownSymbol(c)))
            .collect()
    }

    pub fn decode(&self, word: &[usize]) -> String {
        word.iter().map(|&i| self.symbols[i]).collect()
    }
}

/// A symbol of the extended alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExtSymbol {
    /// The left endmarker `¢`.
    Left,
    Letter(usize),
    /// The right endmarker `$`.
    Right,
}

impl ExtSymbol {
    pub fn label(self, alphabet: &Alphabet) -> String {
        match self {
            ExtSymbol::Left => "¢".into(),
            ExtSymbol::Right => "$".into(),
            ExtSymbol::Letter(i) => alphabet.symbol(i).to_string(),
        }
    }
}

/// Which endmarkers surround the input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Endmarkers {
    pub left: bool,
    pub right: bool,
}

impl Endmarkers {
    pub const BOTH: Endmarkers = Endmarkers {
        left: true,
        right: true,
    };
    pub const NONE: Endmarkers = Endmarkers {
        left: false,
        right: false,
    };

    pub fn uniform(on: bool) -> Self {
        Self { left: on, right: on }
    }

    pub fn is_markless(self) -> bool {
        !self.left && !self.right
    }

    /// The extended word actually fed to the machine.
    pub fn extend(self, word: &[usize]) -> impl Iterator<Item = ExtSymbol> + '_ {
        self.left
            .then_some(ExtSymbol::Left)
            .into_iter()
            .chain(word.iter().map(|&i| ExtSymbol::Letter(i)))
            .chain(self.right.then_some(ExtSymbol::Right))
    }
}

/// The accepting and rejecting sets; everything else is `E_non`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ObservablePair {
    pub accept: crate::PointSet,
    pub reject: crate::PointSet,
}

impl ObservablePair {
    pub fn new(accept: crate::PointSet, reject: crate::PointSet) -> Self {
        Self { accept, reject }
    }

    pub fn swapped(&self) -> Self {
        Self {
            accept: self.reject.clone(),
            reject: self.accept.clone(),
        }
    }
}

/// How a nondeterministic machine rejects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum RejectMode {
    /// The final set is nonempty and contained in `E_rej`.
    #[default]
    Subset,
    /// The final set misses `E_acc`.
    Disjoint,
}

impl RejectMode {
    /// Verdict of a nondeterministic run from its final configurations,
    /// given which of them are accepting and which rejecting.
    pub fn verdict(self, mut observations: impl Iterator<Item = Observation>) -> Verdict {
        let mut empty = true;
        let mut all_reject = true;
        for o in observations.by_ref() {
            empty = false;
            match o {
                Observation::Accept => return Verdict::Accept,
                Observation::Reject => {}
                Observation::Neither => all_reject = false,
            }
        }
        match self {
            RejectMode::Disjoint => Verdict::Reject,
            RejectMode::Subset if all_reject && !empty => Verdict::Reject,
            RejectMode::Subset => Verdict::Undetermined,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Verdict {
    Accept,
    Reject,
    Undetermined,
}

impl Verdict {
    pub fn swapped(self) -> Self {
        match self {
            Verdict::Accept => Verdict::Reject,
            Verdict::Reject => Verdict::Accept,
            Verdict::Undetermined => Verdict::Undetermined,
        }
    }

    pub fn from_observation(o: Observation) -> Self {
        match o {
            Observation::Accept => Verdict::Accept,
            Observation::Reject => Verdict::Reject,
            Observation::Neither => Verdict::Undetermined,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Accept => "ACCEPT",
            Verdict::Reject => "REJECT",
            Verdict::Undetermined => "UNDETERMINED",
        })
    }
}

/// One line of a run: the configuration after reading `symbol`
/// (`None` for the initial configuration).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub symbol: Option<String>,
    pub config: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunTrace {
    pub steps: Vec<TraceStep>,
    pub verdict: Verdict,
}

impl fmt::Display for RunTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, step) in self.steps.iter().enumerate() {
            writeln!(
                f,
                "{i}\t{}\t{}",
                step.symbol.as_deref().unwrap_or("-"),
                step.config
            )?;
        }
        write!(f, "{}", self.verdict)
    }
}

/// Anything that assigns a verdict to each word over an alphabet.
pub trait Recognizer {
    fn alphabet(&self) -> &Alphabet;

    fn endmarkers(&self) -> Endmarkers;

    /// Verdict on a word given as letter indices (assumed in range).
    fn verdict_of(&self, word: &[usize]) -> Verdict;

    fn trace_of(&self, word: &[usize]) -> RunTrace;

    fn evaluate(&self, word: &str) -> Result<Verdict> {
        Ok(self.verdict_of(&self.alphabet().encode(word)?))
    }

    fn trace(&self, word: &str) -> Result<RunTrace> {
        Ok(self.trace_of(&self.alphabet().encode(word)?))
    }
}

impl<R: Recognizer + ?Sized> Recognizer for &R {
    fn alphabet(&self) -> &Alphabet {
        (**self).alphabet()
    }
    fn endmarkers(&self) -> Endmarkers {
        (**self).endmarkers()
    }
    fn verdict_of(&self, word: &[usize]) -> Verdict {
        (**self).verdict_of(word)
    }
    fn trace_of(&self, word: &[usize]) -> RunTrace {
        (**self).trace_of(word)
    }
}

impl<R: Recognizer + ?Sized> Recognizer for Box<R> {
    fn alphabet(&self) -> &Alphabet {
        (**self).alphabet()
    }
    fn endmarkers(&self) -> Endmarkers {
        (**self).endmarkers()
    }
    fn verdict_of(&self, word: &[usize]) -> Verdict {
        (**self).verdict_of(word)
    }
    fn trace_of(&self, word: &[usize]) -> RunTrace {
        (**self).trace_of(word)
    }
}

/// Number of words of length at most `max_len` over `k` letters, saturating.
pub fn word_count(k: usize, max_len: usize) -> u64 {
    let mut total: u64 = 0;
    let mut layer: u64 = 1;
    for _ in 0..=max_len {
        total = total.saturating_add(layer);
        layer = layer.saturating_mul(k as u64);
    }
    total
}

/// All words of length at most `max_len`, shortest first and lexicographic
/// within a length.
pub fn words_up_to(k: usize, max_len: usize) -> WordIter {
    WordIter {
        k,
        max_len,
        current: Some(Vec::new()),
    }
}

pub struct WordIter {
    k: usize,
    max_len: usize,
    current: Option<Vec<usize>>,
}

impl Iterator for WordIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let word = self.current.take()?;
        let mut next = word.clone();
        let mut i = next.len();
        loop {
            if i == 0 {
                if next.len() < self.max_len && self.k > 0 {
                    next = vec![0; next.len() + 1];
                    self.current = Some(next);
                }
                break;
            }
            i -= 1;
            if next[i] + 1 < self.k {
                next[i] += 1;
                self.current = Some(next);
                break;
            }
            next[i] = 0;
        }
        Some(word)
    }
}

/// Words up to a length, split by verdict.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Language {
    pub accepted: Vec<String>,
    pub rejected: Vec<String>,
    pub undetermined: Vec<String>,
}

/// Classifies every word of length at most `max_len`.
pub fn enumerate_language<R: Recognizer + ?Sized>(m: &R, max_len: usize, budget: u64) -> Result<Language> {
    let alphabet = m.alphabet();
    let words = word_count(alphabet.len(), max_len);
    if words > budget {
        return Err(MachineError::BudgetExceeded { words, budget });
    }
    let mut lang = Language::default();
    for w in words_up_to(alphabet.len(), max_len) {
        let s = alphabet.decode(&w);
        match m.verdict_of(&w) {
            Verdict::Accept => lang.accepted.push(s),
            Verdict::Reject => lang.rejected.push(s),
            Verdict::Undetermined => lang.undetermined.push(s),
        }
    }
    Ok(lang)
}
