use super::{symbol_name, Result, ZooError};
use crate::machine::{ExtSymbol, LazyDynamics, LazyTopMachine, Observation, OpFamily};
use crate::{Alphabet, Endmarkers, PointSet};

/// One move: the next state and the string written in place of the top
/// symbol (bottom to top).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PushdownMove {
    pub next: usize,
    pub push: Vec<usize>,
}

/// A pushdown automaton whose moves read one input symbol each.
///
/// `moves` holds, per symbol, a table indexed by state and then by top stack
/// symbol; index `stack_alphabet.len()` is the row read when the stack is
/// empty (only `⊥` remains). Each entry lists the possible moves, exactly
/// one for a deterministic machine. A missing endmarker table leaves the
/// configuration unchanged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PushdownSpec {
    pub states: usize,
    pub stack_alphabet: Vec<char>,
    pub alphabet: Alphabet,
    pub endmarkers: Endmarkers,
    pub initial: usize,
    pub moves: OpFamily<Vec<Vec<Vec<PushdownMove>>>>,
    pub accept: PointSet,
    pub reject: PointSet,
}

/// A state and the stack above `⊥`, bottom first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StackConfig {
    pub state: usize,
    pub stack: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct PushdownDynamics {
    spec: PushdownSpec,
    deterministic: bool,
}

impl PushdownDynamics {
    pub fn spec(&self) -> &PushdownSpec {
        &self.spec
    }
}

impl LazyDynamics for PushdownDynamics {
    type Config = StackConfig;

    fn deterministic(&self) -> bool {
        self.deterministic
    }

    fn init(&self) -> StackConfig {
        StackConfig {
            state: self.spec.initial,
            stack: Vec::new(),
        }
    }

    fn step(&self, config: &StackConfig, symbol: ExtSymbol) -> Vec<StackConfig> {
        let Some(table) = self.spec.moves.get(symbol) else {
            return vec![config.clone()];
        };
        let mut rest = config.stack.clone();
        let top = rest.pop().unwrap_or(self.spec.stack_alphabet.len());
        table[config.state][top]
            .iter()
            .map(|m| {
                let mut stack = rest.clone();
                stack.extend_from_slice(&m.push);
                StackConfig { state: m.next, stack }
            })
            .collect()
    }

    fn classify(&self, config: &StackConfig) -> Observation {
        if self.spec.accept.contains(config.state) {
            Observation::Accept
        } else if self.spec.reject.contains(config.state) {
            Observation::Reject
        } else {
            Observation::Neither
        }
    }

    fn render(&self, config: &StackConfig) -> String {
        let stack: String = std::iter::once('⊥')
            .chain(config.stack.iter().map(|&z| self.spec.stack_alphabet[z]))
            .collect();
        format!("({}, {})", config.state, stack)
    }
}

/// Builds a pushdown machine. A deterministic machine must have exactly one
/// move per state and top symbol.
pub fn make_pushdown(spec: PushdownSpec, deterministic: bool) -> Result<LazyTopMachine<PushdownDynamics>> {
    if spec.accept.intersects(&spec.reject) {
        return Err(ZooError::Overlap);
    }
    if let Some(bad) = [&spec.accept, &spec.reject]
        .iter()
        .find_map(|s| s.iter().find(|&q| q >= spec.states))
    {
        return Err(ZooError::IndexOutOfRange(bad));
    }
    if spec.initial >= spec.states {
        return Err(ZooError::IndexOutOfRange(spec.initial));
    }
    if spec.moves.letters.len() != spec.alphabet.len() {
        return Err(ZooError::LetterCount(
            spec.moves.letters.len(),
            spec.alphabet.len(),
        ));
    }
    let rows = spec.stack_alphabet.len() + 1;
    for (sym, table) in spec.moves.iter() {
        let bad = |state: usize, reason: &str| ZooError::BadMove {
            symbol: symbol_name(&spec.alphabet, sym),
            state,
            reason: reason.to_string(),
        };
        if table.len() != spec.states {
            return Err(bad(table.len(), "wrong number of states"));
        }
        for (q, row) in table.iter().enumerate() {
            if row.len() != rows {
                return Err(bad(q, "one entry per stack symbol and one for the bottom"));
            }
            for moves in row {
                if deterministic && moves.len() != 1 {
                    return Err(bad(q, "a deterministic machine needs exactly one move"));
                }
                for m in moves {
                    if m.next >= spec.states {
                        return Err(bad(q, "next state out of range"));
                    }
                    if m.push.iter().any(|&z| z >= spec.stack_alphabet.len()) {
                        return Err(bad(q, "unknown stack symbol"));
                    }
                }
            }
        }
    }
    let alphabet = spec.alphabet.clone();
    let endmarkers = spec.endmarkers;
    Ok(LazyTopMachine::new(
        alphabet,
        endmarkers,
        PushdownDynamics { spec, deterministic },
    ))
}
