use nalgebra::{DMatrix, DVector};
use num::complex::Complex64;

use super::stochastic::render_vector;
use super::{check_epsilon, check_indices, symbol_name, threshold_observation, Result, ZooError};
use crate::machine::{ExtSymbol, LazyDynamics, LazyTopMachine, Observation, OpFamily};
use crate::{Alphabet, Endmarkers, TOLERANCE};

/// A unitary quantum automaton. Projections are given by index sets of
/// basis vectors; a missing endmarker matrix is the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumSpec {
    pub alphabet: Alphabet,
    pub endmarkers: Endmarkers,
    pub k: usize,
    pub matrices: OpFamily<DMatrix<Complex64>>,
    /// Defaults to the first basis vector.
    pub initial: Option<DVector<Complex64>>,
    pub epsilon: f64,
    pub accept: Vec<usize>,
    pub reject: Vec<usize>,
    /// Non-halting indices of a measure-many automaton; defaults to the rest.
    pub non: Option<Vec<usize>>,
}

/// A quantum automaton with superoperator dynamics `ρ ↦ Σ_j A_j ρ A_j†`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSpec {
    pub alphabet: Alphabet,
    pub endmarkers: Endmarkers,
    pub k: usize,
    pub kraus: OpFamily<Vec<DMatrix<Complex64>>>,
    pub epsilon: f64,
    pub accept: Vec<usize>,
    pub reject: Vec<usize>,
}

fn check_unitaries(spec: &QuantumSpec) -> Result<DVector<Complex64>> {
    check_epsilon(spec.epsilon)?;
    check_indices(spec.k, &spec.accept, &spec.reject)?;
    let k = spec.k;
    if spec.matrices.letters.len() != spec.alphabet.len() {
        return Err(ZooError::LetterCount(
            spec.matrices.letters.len(),
            spec.alphabet.len(),
        ));
    }
    for (s, m) in spec.matrices.iter() {
        if m.nrows() != k || m.ncols() != k {
            return Err(ZooError::DimensionMismatch {
                symbol: symbol_name(&spec.alphabet, s),
                rows: m.nrows(),
                cols: m.ncols(),
                k,
            });
        }
        if (m.adjoint() * m - DMatrix::identity(k, k)).norm() > TOLERANCE * k as f64 {
            return Err(ZooError::NonUnitary(symbol_name(&spec.alphabet, s)));
        }
    }
    let initial = spec
        .initial
        .clone()
        .unwrap_or_else(|| DVector::from_fn(k, |i, _| Complex64::from(if i == 0 { 1.0 } else { 0.0 })));
    if initial.len() != k || (initial.norm() - 1.0).abs() > TOLERANCE {
        return Err(ZooError::BadInitial(initial.len()));
    }
    Ok(initial)
}

fn apply(ops: &OpFamily<DMatrix<Complex64>>, s: ExtSymbol, v: &DVector<Complex64>) -> DVector<Complex64> {
    match ops.get(s) {
        Some(m) => m * v,
        None => v.clone(),
    }
}

fn projected_norm_sq(v: &DVector<Complex64>, idx: &[usize]) -> f64 {
    idx.iter().map(|&i| v[i].norm_sqr()).sum()
}

fn render_complex(v: &DVector<Complex64>) -> String {
    let parts: Vec<String> = v
        .iter()
        .map(|z| format!("{:.6}{:+.6}i", z.re + 0.0, z.im + 0.0))
        .collect();
    format!("[{}]", parts.join(", "))
}

/// Measure-once: observed only at the end, with the strict threshold
/// `‖Π v‖² > 1 − ε`.
#[derive(Debug, Clone)]
pub struct MoQfaDynamics {
    spec: QuantumSpec,
    initial: DVector<Complex64>,
}

impl MoQfaDynamics {
    pub fn spec(&self) -> &QuantumSpec {
        &self.spec
    }
}

impl LazyDynamics for MoQfaDynamics {
    type Config = DVector<Complex64>;

    fn deterministic(&self) -> bool {
        true
    }

    fn init(&self) -> DVector<Complex64> {
        self.initial.clone()
    }

    fn step(&self, v: &DVector<Complex64>, s: ExtSymbol) -> Vec<DVector<Complex64>> {
        vec![apply(&self.spec.matrices, s, v)]
    }

    fn classify(&self, v: &DVector<Complex64>) -> Observation {
        let cut = 1.0 - self.spec.epsilon + TOLERANCE;
        threshold_observation(
            projected_norm_sq(v, &self.spec.accept) > cut,
            projected_norm_sq(v, &self.spec.reject) > cut,
        )
    }

    fn render(&self, v: &DVector<Complex64>) -> String {
        render_complex(v)
    }

    fn check_invariants(&self, v: &DVector<Complex64>) -> std::result::Result<(), String> {
        let norm = v.norm();
        if (norm - 1.0).abs() <= TOLERANCE {
            Ok(())
        } else {
            Err(format!("norm {norm} is not 1"))
        }
    }
}

pub fn make_mo_qfa(spec: QuantumSpec) -> Result<LazyTopMachine<MoQfaDynamics>> {
    let initial = check_unitaries(&spec)?;
    Ok(LazyTopMachine::new(
        spec.alphabet.clone(),
        spec.endmarkers,
        MoQfaDynamics { spec, initial },
    ))
}

/// Measure-many configuration: the non-halting amplitude vector and the
/// signed square roots of the accumulated accepting and rejecting mass.
#[derive(Debug, Clone, PartialEq)]
pub struct MmConfig {
    pub v: DVector<Complex64>,
    pub gamma_acc: f64,
    pub gamma_rej: f64,
}

#[derive(Debug, Clone)]
pub struct MmQfaDynamics {
    spec: QuantumSpec,
    initial: DVector<Complex64>,
    non: Vec<usize>,
}

impl MmQfaDynamics {
    pub fn spec(&self) -> &QuantumSpec {
        &self.spec
    }
}

pub(crate) fn fold(gamma: f64, mass: f64) -> f64 {
    let sign = if gamma < 0.0 { -1.0 } else { 1.0 };
    sign * (gamma * gamma + mass).sqrt()
}

impl LazyDynamics for MmQfaDynamics {
    type Config = MmConfig;

    fn deterministic(&self) -> bool {
        true
    }

    fn init(&self) -> MmConfig {
        MmConfig {
            v: self.initial.clone(),
            gamma_acc: 0.0,
            gamma_rej: 0.0,
        }
    }

    fn step(&self, c: &MmConfig, s: ExtSymbol) -> Vec<MmConfig> {
        let u = apply(&self.spec.matrices, s, &c.v);
        let mut v = DVector::zeros(u.len());
        for &i in &self.non {
            v[i] = u[i];
        }
        vec![MmConfig {
            v,
            gamma_acc: fold(c.gamma_acc, projected_norm_sq(&u, &self.spec.accept)),
            gamma_rej: fold(c.gamma_rej, projected_norm_sq(&u, &self.spec.reject)),
        }]
    }

    fn classify(&self, c: &MmConfig) -> Observation {
        let cut = 1.0 - self.spec.epsilon - TOLERANCE;
        threshold_observation(c.gamma_acc >= cut, c.gamma_rej >= cut)
    }

    fn render(&self, c: &MmConfig) -> String {
        format!(
            "({}, {:.6}, {:.6})",
            render_complex(&c.v),
            c.gamma_acc + 0.0,
            c.gamma_rej + 0.0
        )
    }

    fn check_invariants(&self, c: &MmConfig) -> std::result::Result<(), String> {
        let total = c.gamma_acc.powi(2) + c.gamma_rej.powi(2) + c.v.norm_squared();
        if (total - 1.0).abs() <= TOLERANCE {
            Ok(())
        } else {
            Err(format!("total mass {total} is not 1"))
        }
    }
}

pub fn make_mm_qfa(spec: QuantumSpec) -> Result<LazyTopMachine<MmQfaDynamics>> {
    let initial = check_unitaries(&spec)?;
    let k = spec.k;
    let non: Vec<usize> = match &spec.non {
        Some(non) => non.clone(),
        None => (0..k)
            .filter(|i| !spec.accept.contains(i) && !spec.reject.contains(i))
            .collect(),
    };
    let mut seen = vec![0u8; k];
    for &i in spec.accept.iter().chain(&spec.reject).chain(&non) {
        if i >= k {
            return Err(ZooError::IndexOutOfRange(i));
        }
        seen[i] += 1;
    }
    if seen.iter().any(|&c| c != 1) {
        return Err(ZooError::NotAPartition);
    }
    Ok(LazyTopMachine::new(
        spec.alphabet.clone(),
        spec.endmarkers,
        MmQfaDynamics { spec, initial, non },
    ))
}

#[derive(Debug, Clone)]
pub struct SuperopDynamics {
    spec: KrausSpec,
}

impl SuperopDynamics {
    pub fn spec(&self) -> &KrausSpec {
        &self.spec
    }
}

fn projected_trace(rho: &DMatrix<Complex64>, idx: &[usize]) -> f64 {
    idx.iter().map(|&i| rho[(i, i)].re).sum()
}

impl LazyDynamics for SuperopDynamics {
    type Config = DMatrix<Complex64>;

    fn deterministic(&self) -> bool {
        true
    }

    fn init(&self) -> DMatrix<Complex64> {
        let k = self.spec.k;
        DMatrix::from_fn(k, k, |i, j| {
            Complex64::from(if i == 0 && j == 0 { 1.0 } else { 0.0 })
        })
    }

    fn step(&self, rho: &DMatrix<Complex64>, s: ExtSymbol) -> Vec<DMatrix<Complex64>> {
        vec![match self.spec.kraus.get(s) {
            Some(family) => family
                .iter()
                .fold(DMatrix::zeros(rho.nrows(), rho.ncols()), |acc, a| {
                    acc + a * rho * a.adjoint()
                }),
            None => rho.clone(),
        }]
    }

    fn classify(&self, rho: &DMatrix<Complex64>) -> Observation {
        let cut = 1.0 - self.spec.epsilon - TOLERANCE;
        threshold_observation(
            projected_trace(rho, &self.spec.accept) >= cut,
            projected_trace(rho, &self.spec.reject) >= cut,
        )
    }

    fn render(&self, rho: &DMatrix<Complex64>) -> String {
        render_vector((0..rho.nrows()).map(|i| rho[(i, i)].re))
    }

    fn check_invariants(&self, rho: &DMatrix<Complex64>) -> std::result::Result<(), String> {
        let trace = rho.trace();
        if (trace.re - 1.0).abs() > TOLERANCE || trace.im.abs() > TOLERANCE {
            return Err(format!("trace {trace} is not 1"));
        }
        if (rho - rho.adjoint()).norm() > TOLERANCE {
            return Err("density matrix is not Hermitian".into());
        }
        let min = rho
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .fold(f64::INFINITY, |m, &x| m.min(x));
        if min < -TOLERANCE {
            return Err(format!("density matrix has eigenvalue {min}"));
        }
        Ok(())
    }
}

pub fn make_superop_qfa(spec: KrausSpec) -> Result<LazyTopMachine<SuperopDynamics>> {
    check_epsilon(spec.epsilon)?;
    check_indices(spec.k, &spec.accept, &spec.reject)?;
    let k = spec.k;
    if k == 0 {
        return Err(ZooError::BadInitial(0));
    }
    if spec.kraus.letters.len() != spec.alphabet.len() {
        return Err(ZooError::LetterCount(
            spec.kraus.letters.len(),
            spec.alphabet.len(),
        ));
    }
    for (s, family) in spec.kraus.iter() {
        let name = symbol_name(&spec.alphabet, s);
        if let Some(a) = family.iter().find(|a| a.nrows() != k || a.ncols() != k) {
            return Err(ZooError::DimensionMismatch {
                symbol: name,
                rows: a.nrows(),
                cols: a.ncols(),
                k,
            });
        }
        let sum = family
            .iter()
            .fold(DMatrix::zeros(k, k), |acc: DMatrix<Complex64>, a| {
                acc + a.adjoint() * a
            });
        if (sum - DMatrix::identity(k, k)).norm() > TOLERANCE * k as f64 {
            return Err(ZooError::KrausIncomplete(name));
        }
    }
    Ok(LazyTopMachine::new(
        spec.alphabet.clone(),
        spec.endmarkers,
        SuperopDynamics { spec },
    ))
}
