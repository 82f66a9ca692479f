use nalgebra::{DMatrix, DVector};
use num::{BigRational, One, Signed, Zero};

use super::{check_epsilon, check_indices, symbol_name, threshold_observation, Result, ZooError};
use crate::machine::{ExtSymbol, LazyDynamics, LazyTopMachine, Observation, OpFamily};
use crate::{Alphabet, Endmarkers, TOLERANCE};

/// A probabilistic automaton. Matrices act on column vectors from the left
/// and must be column-stochastic; a missing endmarker matrix is the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticSpec {
    pub alphabet: Alphabet,
    pub endmarkers: Endmarkers,
    pub k: usize,
    pub matrices: OpFamily<DMatrix<f64>>,
    /// Defaults to the first basis vector.
    pub initial: Option<DVector<f64>>,
    pub epsilon: f64,
    pub accept: Vec<usize>,
    pub reject: Vec<usize>,
}

fn check_square<T>(alphabet: &Alphabet, k: usize, ops: &OpFamily<DMatrix<T>>) -> Result<()>
where
    T: nalgebra::Scalar,
{
    if ops.letters.len() != alphabet.len() {
        return Err(ZooError::LetterCount(ops.letters.len(), alphabet.len()));
    }
    for (s, m) in ops.iter() {
        if m.nrows() != k || m.ncols() != k {
            return Err(ZooError::DimensionMismatch {
                symbol: symbol_name(alphabet, s),
                rows: m.nrows(),
                cols: m.ncols(),
                k,
            });
        }
    }
    Ok(())
}

fn is_stochastic_vector(v: &DVector<f64>) -> bool {
    v.iter().all(|&x| x >= -TOLERANCE) && (v.sum() - 1.0).abs() <= TOLERANCE
}

fn basis_vector(k: usize) -> DVector<f64> {
    DVector::from_fn(k, |i, _| if i == 0 { 1.0 } else { 0.0 })
}

#[derive(Debug, Clone)]
pub struct PfaDynamics {
    spec: StochasticSpec,
    initial: DVector<f64>,
}

impl PfaDynamics {
    pub fn spec(&self) -> &StochasticSpec {
        &self.spec
    }
}

fn mass(v: &DVector<f64>, idx: &[usize]) -> f64 {
    idx.iter().map(|&i| v[i]).sum()
}

impl LazyDynamics for PfaDynamics {
    type Config = DVector<f64>;

    fn deterministic(&self) -> bool {
        true
    }

    fn init(&self) -> DVector<f64> {
        self.initial.clone()
    }

    fn step(&self, v: &DVector<f64>, s: ExtSymbol) -> Vec<DVector<f64>> {
        vec![match self.spec.matrices.get(s) {
            Some(m) => m * v,
            None => v.clone(),
        }]
    }

    fn classify(&self, v: &DVector<f64>) -> Observation {
        let cut = 1.0 - self.spec.epsilon - TOLERANCE;
        threshold_observation(
            mass(v, &self.spec.accept) >= cut,
            mass(v, &self.spec.reject) >= cut,
        )
    }

    fn render(&self, v: &DVector<f64>) -> String {
        render_vector(v.iter().copied())
    }

    fn check_invariants(&self, v: &DVector<f64>) -> std::result::Result<(), String> {
        if is_stochastic_vector(v) {
            Ok(())
        } else {
            Err(format!("not a probability vector: {}", self.render(v)))
        }
    }
}

pub(crate) fn render_vector(v: impl Iterator<Item = f64>) -> String {
    let parts: Vec<String> = v.map(|x| format!("{:.6}", x + 0.0)).collect();
    format!("[{}]", parts.join(", "))
}

pub fn make_pfa(spec: StochasticSpec) -> Result<LazyTopMachine<PfaDynamics>> {
    check_epsilon(spec.epsilon)?;
    check_indices(spec.k, &spec.accept, &spec.reject)?;
    check_square(&spec.alphabet, spec.k, &spec.matrices)?;
    for (s, m) in spec.matrices.iter() {
        if !m.column_iter().all(|c| is_stochastic_vector(&c.into_owned())) {
            return Err(ZooError::NonStochastic(symbol_name(&spec.alphabet, s)));
        }
    }
    let initial = spec.initial.clone().unwrap_or_else(|| basis_vector(spec.k));
    if initial.len() != spec.k || !is_stochastic_vector(&initial) {
        return Err(ZooError::BadInitial(initial.len()));
    }
    Ok(LazyTopMachine::new(
        spec.alphabet.clone(),
        spec.endmarkers,
        PfaDynamics { spec, initial },
    ))
}

/// A probabilistic automaton with exact rational entries and an exact cut.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactStochasticSpec {
    pub alphabet: Alphabet,
    pub endmarkers: Endmarkers,
    pub k: usize,
    pub matrices: OpFamily<Vec<Vec<BigRational>>>,
    pub initial: Option<Vec<BigRational>>,
    pub epsilon: BigRational,
    pub accept: Vec<usize>,
    pub reject: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct ExactPfaDynamics {
    spec: ExactStochasticSpec,
    initial: Vec<BigRational>,
}

impl ExactPfaDynamics {
    pub fn spec(&self) -> &ExactStochasticSpec {
        &self.spec
    }
}

impl LazyDynamics for ExactPfaDynamics {
    type Config = Vec<BigRational>;

    fn deterministic(&self) -> bool {
        true
    }

    fn init(&self) -> Vec<BigRational> {
        self.initial.clone()
    }

    fn step(&self, v: &Vec<BigRational>, s: ExtSymbol) -> Vec<Vec<BigRational>> {
        vec![match self.spec.matrices.get(s) {
            Some(m) => m
                .iter()
                .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
                .collect(),
            None => v.clone(),
        }]
    }

    fn classify(&self, v: &Vec<BigRational>) -> Observation {
        let cut = BigRational::one() - &self.spec.epsilon;
        let mass = |idx: &[usize]| idx.iter().map(|&i| v[i].clone()).sum::<BigRational>();
        threshold_observation(mass(&self.spec.accept) >= cut, mass(&self.spec.reject) >= cut)
    }

    fn render(&self, v: &Vec<BigRational>) -> String {
        let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        format!("[{}]", parts.join(", "))
    }

    fn check_invariants(&self, v: &Vec<BigRational>) -> std::result::Result<(), String> {
        let total: BigRational = v.iter().cloned().sum();
        if v.iter().all(|x| !x.is_negative()) && total.is_one() {
            Ok(())
        } else {
            Err(format!("not a probability vector: {}", self.render(v)))
        }
    }
}

pub fn make_exact_pfa(spec: ExactStochasticSpec) -> Result<LazyTopMachine<ExactPfaDynamics>> {
    if spec.epsilon.is_negative() || spec.epsilon >= BigRational::one() {
        return Err(ZooError::EpsilonOutOfRange(rational_to_f64(&spec.epsilon)));
    }
    check_indices(spec.k, &spec.accept, &spec.reject)?;
    if spec.matrices.letters.len() != spec.alphabet.len() {
        return Err(ZooError::LetterCount(
            spec.matrices.letters.len(),
            spec.alphabet.len(),
        ));
    }
    let k = spec.k;
    for (s, m) in spec.matrices.iter() {
        if m.len() != k || m.iter().any(|r| r.len() != k) {
            return Err(ZooError::DimensionMismatch {
                symbol: symbol_name(&spec.alphabet, s),
                rows: m.len(),
                cols: m.first().map_or(0, Vec::len),
                k,
            });
        }
        let stochastic = (0..k).all(|j| {
            let col_sum: BigRational = (0..k).map(|i| m[i][j].clone()).sum();
            col_sum.is_one() && (0..k).all(|i| !m[i][j].is_negative())
        });
        if !stochastic {
            return Err(ZooError::NonStochastic(symbol_name(&spec.alphabet, s)));
        }
    }
    let initial = spec.initial.clone().unwrap_or_else(|| {
        (0..k)
            .map(|i| {
                if i == 0 {
                    BigRational::one()
                } else {
                    BigRational::zero()
                }
            })
            .collect()
    });
    let total: BigRational = initial.iter().cloned().sum();
    if initial.len() != k || !total.is_one() || initial.iter().any(|x| x.is_negative()) {
        return Err(ZooError::BadInitial(initial.len()));
    }
    Ok(LazyTopMachine::new(
        spec.alphabet.clone(),
        spec.endmarkers,
        ExactPfaDynamics { spec, initial },
    ))
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    use num::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// A generalized automaton: arbitrary real matrices, observed by membership
/// in the subspaces spanned by the accepting or rejecting basis vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct GfaSpec {
    pub alphabet: Alphabet,
    pub endmarkers: Endmarkers,
    pub k: usize,
    pub matrices: OpFamily<DMatrix<f64>>,
    pub initial: Option<DVector<f64>>,
    pub accept: Vec<usize>,
    pub reject: Vec<usize>,
    pub tolerance: f64,
}

#[derive(Debug, Clone)]
pub struct GfaDynamics {
    spec: GfaSpec,
    initial: DVector<f64>,
}

impl GfaDynamics {
    pub fn spec(&self) -> &GfaSpec {
        &self.spec
    }

    fn in_span(&self, v: &DVector<f64>, idx: &[usize]) -> bool {
        v.iter()
            .enumerate()
            .all(|(i, x)| idx.contains(&i) || x.abs() <= self.spec.tolerance)
    }
}

impl LazyDynamics for GfaDynamics {
    type Config = DVector<f64>;

    fn deterministic(&self) -> bool {
        true
    }

    fn init(&self) -> DVector<f64> {
        self.initial.clone()
    }

    fn step(&self, v: &DVector<f64>, s: ExtSymbol) -> Vec<DVector<f64>> {
        vec![match self.spec.matrices.get(s) {
            Some(m) => m * v,
            None => v.clone(),
        }]
    }

    fn classify(&self, v: &DVector<f64>) -> Observation {
        // The zero vector lies in both subspaces and is left unobserved.
        threshold_observation(
            self.in_span(v, &self.spec.accept),
            self.in_span(v, &self.spec.reject),
        )
    }

    fn render(&self, v: &DVector<f64>) -> String {
        render_vector(v.iter().copied())
    }
}

pub fn make_gfa(spec: GfaSpec) -> Result<LazyTopMachine<GfaDynamics>> {
    check_indices(spec.k, &spec.accept, &spec.reject)?;
    check_square(&spec.alphabet, spec.k, &spec.matrices)?;
    let initial = spec.initial.clone().unwrap_or_else(|| basis_vector(spec.k));
    if initial.len() != spec.k {
        return Err(ZooError::BadInitial(initial.len()));
    }
    Ok(LazyTopMachine::new(
        spec.alphabet.clone(),
        spec.endmarkers,
        GfaDynamics { spec, initial },
    ))
}
