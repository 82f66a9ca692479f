use super::{Alphabet, Endmarkers, ExtSymbol, Recognizer, RejectMode, RunTrace, TraceStep, Verdict};

/// Where a single configuration sits relative to the observable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Observation {
    Accept,
    Reject,
    Neither,
}

/// The dynamics of a machine whose configuration space is not materialised.
///
/// Implementations must be stateless: everything a run needs is in the
/// configuration passed to each call.
pub trait LazyDynamics {
    type Config: Clone + PartialEq;

    /// Whether [`LazyDynamics::step`] always returns exactly one configuration.
    fn deterministic(&self) -> bool;

    fn init(&self) -> Self::Config;

    fn step(&self, config: &Self::Config, symbol: ExtSymbol) -> Vec<Self::Config>;

    fn classify(&self, config: &Self::Config) -> Observation;

    fn render(&self, config: &Self::Config) -> String;

    /// Model-specific invariants (probability mass, norms, traces).
    fn check_invariants(&self, _config: &Self::Config) -> Result<(), String> {
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct LazyTopMachine<D> {
    pub alphabet: Alphabet,
    pub endmarkers: Endmarkers,
    pub reject_mode: RejectMode,
    pub dynamics: D,
}

impl<D: LazyDynamics> LazyTopMachine<D> {
    pub fn new(alphabet: Alphabet, endmarkers: Endmarkers, dynamics: D) -> Self {
        Self {
            alphabet,
            endmarkers,
            reject_mode: RejectMode::default(),
            dynamics,
        }
    }

    fn advance(&self, configs: Vec<D::Config>, s: ExtSymbol) -> Vec<D::Config> {
        let mut next: Vec<D::Config> = Vec::with_capacity(configs.len());
        for c in &configs {
            for d in self.dynamics.step(c, s) {
                if self.dynamics.deterministic() || !next.contains(&d) {
                    next.push(d);
                }
            }
        }
        next
    }

    /// Every configuration set visited on `word`, starting with `{init}`.
    pub fn run_sets(&self, word: &[usize]) -> Vec<Vec<D::Config>> {
        let mut sets = vec![vec![self.dynamics.init()]];
        for s in self.endmarkers.extend(word) {
            let next = self.advance(sets.last().unwrap().clone(), s);
            sets.push(next);
        }
        sets
    }

    pub fn final_configs(&self, word: &[usize]) -> Vec<D::Config> {
        let mut configs = vec![self.dynamics.init()];
        for s in self.endmarkers.extend(word) {
            configs = self.advance(configs, s);
        }
        configs
    }

    fn verdict_of_configs(&self, configs: &[D::Config]) -> Verdict {
        let obs = configs.iter().map(|c| self.dynamics.classify(c));
        if self.dynamics.deterministic() {
            obs.map(Verdict::from_observation)
                .next()
                .unwrap_or(Verdict::Undetermined)
        } else {
            self.reject_mode.verdict(obs)
        }
    }

    /// Checks the model invariants at every configuration visited on `word`.
    pub fn check_run(&self, word: &[usize]) -> Result<(), String> {
        for (i, set) in self.run_sets(word).iter().enumerate() {
            for c in set {
                self.dynamics
                    .check_invariants(c)
                    .map_err(|e| format!("step {i}: {e}"))?;
            }
        }
        Ok(())
    }

    fn render_set(&self, configs: &[D::Config]) -> String {
        if self.dynamics.deterministic() && configs.len() == 1 {
            return self.dynamics.render(&configs[0]);
        }
        let parts: Vec<String> = configs.iter().map(|c| self.dynamics.render(c)).collect();
        format!("{{{}}}", parts.join(", "))
    }
}

impl<D: LazyDynamics> Recognizer for LazyTopMachine<D> {
    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn endmarkers(&self) -> Endmarkers {
        self.endmarkers
    }

    fn verdict_of(&self, word: &[usize]) -> Verdict {
        self.verdict_of_configs(&self.final_configs(word))
    }

    fn trace_of(&self, word: &[usize]) -> RunTrace {
        let sets = self.run_sets(word);
        let symbols = std::iter::once(None).chain(
            self.endmarkers
                .extend(word)
                .map(|s| Some(s.label(&self.alphabet))),
        );
        let steps = sets
            .iter()
            .zip(symbols)
            .map(|(set, symbol)| TraceStep {
                symbol,
                config: self.render_set(set),
            })
            .collect();
        RunTrace {
            steps,
            verdict: self.verdict_of_configs(sets.last().unwrap()),
        }
    }
}
