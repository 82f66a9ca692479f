use super::{
    Alphabet, Dynamics, Endmarkers, ExtSymbol, FiniteTopMachine, ObservablePair, OpFamily, Recognizer,
    RejectMode, RunTrace, TraceStep, Verdict,
};
use crate::operators::SingleOp;
use crate::topology::FiniteTopology;
use crate::PointSet;

/// A classical deterministic automaton over the extended alphabet. States
/// outside both the accepting and rejecting sets give `Undetermined`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfa {
    pub n_states: usize,
    pub alphabet: Alphabet,
    pub endmarkers: Endmarkers,
    pub transitions: OpFamily<SingleOp>,
    pub start: usize,
    pub accept: PointSet,
    pub reject: PointSet,
}

impl Dfa {
    pub fn step(&self, q: usize, s: ExtSymbol) -> usize {
        self.transitions.get(s).map_or(q, |op| op.apply(q))
    }

    pub fn final_state(&self, word: &[usize]) -> usize {
        self.endmarkers
            .extend(word)
            .fold(self.start, |q, s| self.step(q, s))
    }

    pub fn classify(&self, q: usize) -> Verdict {
        if self.accept.contains(q) {
            Verdict::Accept
        } else if self.reject.contains(q) {
            Verdict::Reject
        } else {
            Verdict::Undetermined
        }
    }

    /// The same automaton as a 1dta over the discrete topology on its states.
    pub fn to_machine(&self) -> FiniteTopMachine {
        FiniteTopMachine {
            alphabet: self.alphabet.clone(),
            endmarkers: self.endmarkers,
            topology: FiniteTopology::discrete(self.n_states),
            dynamics: Dynamics::Deterministic(self.transitions.clone()),
            initial: self.start,
            observable: ObservablePair::new(self.accept.clone(), self.reject.clone()),
            reject_mode: RejectMode::default(),
        }
    }
}

impl Recognizer for Dfa {
    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn endmarkers(&self) -> Endmarkers {
        self.endmarkers
    }

    fn verdict_of(&self, word: &[usize]) -> Verdict {
        self.classify(self.final_state(word))
    }

    fn trace_of(&self, word: &[usize]) -> RunTrace {
        let mut q = self.start;
        let mut steps = vec![TraceStep {
            symbol: None,
            config: q.to_string(),
        }];
        for s in self.endmarkers.extend(word) {
            q = self.step(q, s);
            steps.push(TraceStep {
                symbol: Some(s.label(&self.alphabet)),
                config: q.to_string(),
            });
        }
        RunTrace {
            steps,
            verdict: self.classify(q),
        }
    }
}
