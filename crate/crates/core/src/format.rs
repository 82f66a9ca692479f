//! The JSON machine file format.
//!
//! ```json
//! {
//!   "type": "finite-dta",
//!   "points": 3,
//!   "alphabet": ["0", "1"],
//!   "endmarked": true,
//!   "opens": [[0], [1, 2]],
//!   "initial": 0,
//!   "accept": [0],
//!   "reject": [1, 2],
//!   "ops": {"0": [0, 1, 2], "1": [1, 2, 2], "lend": [0, 1, 2], "rend": [0, 1, 2]}
//! }
//! ```
//!
//! `opens` may list any family of open sets that generates the topology;
//! the canonical form lists the distinct minimal neighbourhoods. A
//! `finite-nta` maps each point to a list of points, a `dfa` has no
//! `opens` (its topology is discrete), and a `zoo` file names a built-in
//! example or embeds a probabilistic, quantum or pushdown model.
//!
//! Canonical output sorts keys and point lists, so parsing it back gives
//! the same machine and serialising again gives the same bytes.

use std::collections::BTreeMap;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num::complex::Complex64;
use num::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::machine::{Dynamics, ExtSymbol, LazyTopMachine, OpFamily, Recognizer, ValidationReport};
use crate::operators::{MultiOp, SingleOp};
use crate::topology::FiniteTopology;
use crate::zoo::{
    builtin_example, make_exact_pfa, make_gfa, make_mm_qfa, make_mo_qfa, make_pfa, make_pushdown,
    make_superop_qfa, Builtin, ExactPfaDynamics, ExactStochasticSpec, GfaDynamics, GfaSpec, KrausSpec,
    MmQfaDynamics, MoQfaDynamics, PfaDynamics, PushdownDynamics, PushdownMove, PushdownSpec, QuantumSpec,
    StochasticSpec, SuperopDynamics, ZooError,
};
use crate::{Alphabet, Dfa, Endmarkers, FiniteTopMachine, ObservablePair, PointSet, RejectMode};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid machine: {0}")]
    Structure(String),
    #[error("invalid machine:\n{0}")]
    Invalid(ValidationReport),
    #[error("invalid machine: {0}")]
    Zoo(#[from] ZooError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl FormatError {
    /// 4 when the document could not be read, 3 when it describes an
    /// invalid machine.
    pub fn exit_code(&self) -> i32 {
        match self {
            FormatError::Parse(_) | FormatError::Io(_) => 4,
            _ => 3,
        }
    }
}

pub type Result<T, E = FormatError> = std::result::Result<T, E>;

fn structure(msg: impl Into<String>) -> FormatError {
    FormatError::Structure(msg.into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum MachineFile {
    FiniteDta(FiniteFile<usize>),
    FiniteNta(FiniteFile<Vec<usize>>),
    Dfa(DfaFile),
    Zoo(ZooFile),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// `true`, `false`, or the one endmarker the machine reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EndmarkedField {
    Flag(bool),
    Only(Side),
}

impl Default for EndmarkedField {
    fn default() -> Self {
        EndmarkedField::Flag(false)
    }
}

impl From<EndmarkedField> for Endmarkers {
    fn from(e: EndmarkedField) -> Self {
        match e {
            EndmarkedField::Flag(b) => Endmarkers::uniform(b),
            EndmarkedField::Only(Side::Left) => Endmarkers {
                left: true,
                right: false,
            },
            EndmarkedField::Only(Side::Right) => Endmarkers {
                left: false,
                right: true,
            },
        }
    }
}

impl From<Endmarkers> for EndmarkedField {
    fn from(e: Endmarkers) -> Self {
        match (e.left, e.right) {
            (true, false) => EndmarkedField::Only(Side::Left),
            (false, true) => EndmarkedField::Only(Side::Right),
            (l, _) => EndmarkedField::Flag(l),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RejectModeField {
    Subset,
    Disjoint,
}

impl From<RejectModeField> for RejectMode {
    fn from(m: RejectModeField) -> Self {
        match m {
            RejectModeField::Subset => RejectMode::Subset,
            RejectModeField::Disjoint => RejectMode::Disjoint,
        }
    }
}

impl From<RejectMode> for RejectModeField {
    fn from(m: RejectMode) -> Self {
        match m {
            RejectMode::Subset => RejectModeField::Subset,
            RejectMode::Disjoint => RejectModeField::Disjoint,
        }
    }
}

/// A finite-topology machine. `T` is a point for a 1dta and a point list
/// for a 1nta.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteFile<T> {
    pub points: usize,
    pub alphabet: Vec<char>,
    #[serde(default)]
    pub endmarked: EndmarkedField,
    pub opens: Vec<Vec<usize>>,
    pub initial: usize,
    pub accept: Vec<usize>,
    pub reject: Vec<usize>,
    pub ops: BTreeMap<String, Vec<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reject_mode: Option<RejectModeField>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DfaFile {
    pub points: usize,
    pub alphabet: Vec<char>,
    #[serde(default)]
    pub endmarked: EndmarkedField,
    pub initial: usize,
    pub accept: Vec<usize>,
    /// Defaults to every non-accepting state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reject: Option<Vec<usize>>,
    pub ops: BTreeMap<String, Vec<usize>>,
}

/// A number in a zoo spec: a real, a `[re, im]` pair, or an exact
/// rational written as a string such as `"1/3"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
    Exact(String),
}

impl Entry {
    fn rational(&self) -> Result<BigRational> {
        match self {
            Entry::Exact(s) => BigRational::from_str(s.trim())
                .map_err(|_| structure(format!("{s:?} is not a rational number"))),
            Entry::Real(x) => {
                BigRational::from_float(*x).ok_or_else(|| structure(format!("{x} is not finite")))
            }
            Entry::Complex(_) => Err(structure("complex entry where a real is expected")),
        }
    }

    fn real(&self) -> Result<f64> {
        match self {
            Entry::Real(x) => Ok(*x),
            Entry::Exact(_) => Ok(crate::zoo::rational_to_f64(&self.rational()?)),
            Entry::Complex([re, im]) if *im == 0.0 => Ok(*re),
            Entry::Complex(_) => Err(structure("complex entry where a real is expected")),
        }
    }

    fn complex(&self) -> Result<Complex64> {
        match self {
            Entry::Complex([re, im]) => Ok(Complex64::new(*re, *im)),
            other => Ok(Complex64::new(other.real()?, 0.0)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialField {
    State(usize),
    Vector(Vec<Entry>),
}

/// One pushdown move: in `state` with `top` on the stack (absent for the
/// empty stack), go to `next` and replace the top with `push`, written
/// bottom to top.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoveRule {
    pub state: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top: Option<char>,
    pub next: usize,
    #[serde(default)]
    pub push: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    Pfa,
    PfaExact,
    Gfa,
    MoQfa,
    MmQfa,
    SuperopQfa,
    Dpda,
    Npda,
}

type Matrix = Vec<Vec<Entry>>;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZooFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<Model>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabet: Option<Vec<char>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endmarked: Option<EndmarkedField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrices: Option<BTreeMap<String, Matrix>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kraus: Option<BTreeMap<String, Vec<Matrix>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<Entry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accept: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reject: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub non: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub states: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stack: Option<Vec<char>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moves: Option<BTreeMap<String, Vec<MoveRule>>>,
}

/// A zoo machine, whatever its configuration space.
#[derive(Debug)]
pub enum ZooMachine {
    Builtin(Builtin),
    Pfa(LazyTopMachine<PfaDynamics>),
    ExactPfa(LazyTopMachine<ExactPfaDynamics>),
    Gfa(LazyTopMachine<GfaDynamics>),
    MoQfa(LazyTopMachine<MoQfaDynamics>),
    MmQfa(LazyTopMachine<MmQfaDynamics>),
    Superop(LazyTopMachine<SuperopDynamics>),
    Pushdown(LazyTopMachine<PushdownDynamics>),
}

impl ZooMachine {
    pub fn recognizer(&self) -> &dyn Recognizer {
        match self {
            ZooMachine::Builtin(b) => b.recognizer(),
            ZooMachine::Pfa(m) => m,
            ZooMachine::ExactPfa(m) => m,
            ZooMachine::Gfa(m) => m,
            ZooMachine::MoQfa(m) => m,
            ZooMachine::MmQfa(m) => m,
            ZooMachine::Superop(m) => m,
            ZooMachine::Pushdown(m) => m,
        }
    }

    /// Checks the model's numeric invariants along the run on `word`.
    pub fn check_run(&self, word: &[usize]) -> std::result::Result<(), String> {
        match self {
            ZooMachine::Builtin(_) => Ok(()),
            ZooMachine::Pfa(m) => m.check_run(word),
            ZooMachine::ExactPfa(m) => m.check_run(word),
            ZooMachine::Gfa(m) => m.check_run(word),
            ZooMachine::MoQfa(m) => m.check_run(word),
            ZooMachine::MmQfa(m) => m.check_run(word),
            ZooMachine::Superop(m) => m.check_run(word),
            ZooMachine::Pushdown(m) => m.check_run(word),
        }
    }
}

/// A loaded machine file.
#[derive(Debug)]
pub enum Machine {
    Finite(FiniteTopMachine),
    Dfa(Dfa),
    Zoo {
        file: Box<ZooFile>,
        machine: Box<ZooMachine>,
    },
}

impl Machine {
    pub fn recognizer(&self) -> &dyn Recognizer {
        match self {
            Machine::Finite(m) => m,
            Machine::Dfa(d) => d,
            Machine::Zoo { machine, .. } => machine.recognizer(),
        }
    }

    /// The machine as an explicit finite-topology machine, if it is one. A
    /// DFA becomes a machine over the discrete topology.
    pub fn to_finite(&self) -> Option<FiniteTopMachine> {
        match self {
            Machine::Finite(m) => Some(m.clone()),
            Machine::Dfa(d) => Some(d.to_machine()),
            Machine::Zoo { machine, .. } => match machine.as_ref() {
                ZooMachine::Builtin(Builtin::Finite(m)) => Some(m.clone()),
                _ => None,
            },
        }
    }

    pub fn to_file(&self) -> MachineFile {
        match self {
            Machine::Finite(m) => finite_to_file(m),
            Machine::Dfa(d) => dfa_to_file(d),
            Machine::Zoo { file, .. } => MachineFile::Zoo(file.as_ref().clone()),
        }
    }

    pub fn to_canonical_string(&self) -> String {
        to_canonical_string(&self.to_file())
    }
}

/// Sorted keys, one field per line, arrays kept on one line, with a
/// trailing newline.
pub fn to_canonical_string(file: &MachineFile) -> String {
    // serde_json's map type keeps keys sorted.
    let value = serde_json::to_value(file).expect("machine files serialise");
    let mut s = String::new();
    write_value(&value, 0, &mut s);
    s.push('\n');
    s
}

fn write_value(v: &serde_json::Value, indent: usize, out: &mut String) {
    match v {
        serde_json::Value::Object(map) if !map.is_empty() => {
            out.push_str("{\n");
            for (i, (k, v)) in map.iter().enumerate() {
                out.push_str(&" ".repeat(indent + 2));
                out.push_str(&serde_json::to_string(k).expect("strings serialise"));
                out.push_str(": ");
                write_value(v, indent + 2, out);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&" ".repeat(indent));
            out.push('}');
        }
        other => out.push_str(&serde_json::to_string(other).expect("values serialise")),
    }
}

pub fn parse_file(text: &str) -> Result<MachineFile> {
    serde_json::from_str(text).map_err(|e| FormatError::Parse(e.to_string()))
}

pub fn parse_machine(text: &str) -> Result<Machine> {
    build_machine(parse_file(text)?)
}

pub fn load_machine(path: impl AsRef<std::path::Path>) -> Result<Machine> {
    parse_machine(&std::fs::read_to_string(path)?)
}

pub fn build_machine(file: MachineFile) -> Result<Machine> {
    match file {
        MachineFile::FiniteDta(f) => {
            let points = f.points;
            let m = build_finite(
                &f,
                |name, table| {
                    if table.len() != points {
                        return Err(structure(format!(
                            "operator {name} has {} entries, expected {points}",
                            table.len()
                        )));
                    }
                    SingleOp::new(table.clone()).map_err(|e| structure(format!("operator {name}: {e}")))
                },
                || SingleOp::identity(points),
            )
            .map(|(base, ops)| FiniteTopMachine {
                dynamics: Dynamics::Deterministic(ops),
                ..base
            })?;
            Ok(Machine::Finite(valid(m)?))
        }
        MachineFile::FiniteNta(f) => {
            let points = f.points;
            let (base, ops) = build_finite(
                &f,
                |name, table| {
                    let sets = table
                        .iter()
                        .map(|img| point_set(points, img, name))
                        .collect::<Result<Vec<_>>>()?;
                    MultiOp::new(points, sets).map_err(|e| structure(format!("operator {name}: {e}")))
                },
                || MultiOp::identity(points),
            )?;
            let m = FiniteTopMachine {
                dynamics: Dynamics::Nondeterministic(ops),
                reject_mode: f.reject_mode.map_or(RejectMode::default(), Into::into),
                ..base
            };
            Ok(Machine::Finite(valid(m)?))
        }
        MachineFile::Dfa(f) => Ok(Machine::Dfa(build_dfa(&f)?)),
        MachineFile::Zoo(f) => {
            let machine = build_zoo(&f)?;
            Ok(Machine::Zoo {
                file: Box::new(f),
                machine: Box::new(machine),
            })
        }
    }
}

fn valid(m: FiniteTopMachine) -> Result<FiniteTopMachine> {
    let report = m.validate();
    if report.is_valid() {
        Ok(m)
    } else {
        Err(FormatError::Invalid(report))
    }
}

fn point_set(n: usize, points: &[usize], what: &str) -> Result<PointSet> {
    if let Some(p) = points.iter().find(|&&p| p >= n) {
        return Err(structure(format!("{what} mentions point {p}, outside 0..{n}")));
    }
    Ok(points.iter().copied().collect())
}

fn alphabet_of(symbols: &[char]) -> Result<Alphabet> {
    Alphabet::new(symbols.iter().copied()).map_err(|e| structure(e.to_string()))
}

fn symbol_key(alphabet: &Alphabet, s: ExtSymbol) -> String {
    match s {
        ExtSymbol::Left => "lend".into(),
        ExtSymbol::Right => "rend".into(),
        ExtSymbol::Letter(i) => alphabet.symbol(i).to_string(),
    }
}

/// Reads an operator table keyed by symbol. Every letter needs an entry;
/// `lend`/`rend` are optional (the identity) and allowed only when the
/// machine reads that endmarker.
fn family<U, T>(
    alphabet: &Alphabet,
    endmarkers: Endmarkers,
    map: &BTreeMap<String, U>,
    mut f: impl FnMut(&str, &U) -> Result<T>,
) -> Result<OpFamily<T>> {
    for key in map.keys() {
        let known = match key.as_str() {
            "lend" => endmarkers.left,
            "rend" => endmarkers.right,
            k => {
                let mut chars = k.chars();
                matches!((chars.next(), chars.next()), (Some(c), None) if alphabet.index_of(c).is_some())
            }
        };
        if !known {
            return Err(structure(format!("unexpected operator key {key:?}")));
        }
    }
    let letters = alphabet
        .symbols()
        .iter()
        .map(|c| {
            let key = c.to_string();
            let u = map
                .get(&key)
                .ok_or_else(|| structure(format!("missing operator for {key:?}")))?;
            f(&key, u)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut marker = |key: &str| map.get(key).map(|u| f(key, u)).transpose();
    let left = marker("lend")?;
    let right = marker("rend")?;
    Ok(OpFamily { letters, left, right })
}

fn family_to_map<T, U>(alphabet: &Alphabet, ops: &OpFamily<T>, f: impl Fn(&T) -> U) -> BTreeMap<String, U> {
    ops.iter()
        .map(|(s, op)| (symbol_key(alphabet, s), f(op)))
        .collect()
}

/// A missing `lend`/`rend` operator is read as the identity.
fn build_finite<T, O>(
    f: &FiniteFile<T>,
    op: impl FnMut(&str, &Vec<T>) -> Result<O>,
    identity: impl Fn() -> O,
) -> Result<(FiniteTopMachine, OpFamily<O>)> {
    let n = f.points;
    if n == 0 {
        return Err(structure("a machine needs at least one point"));
    }
    let alphabet = alphabet_of(&f.alphabet)?;
    let endmarkers: Endmarkers = f.endmarked.into();
    let opens = f
        .opens
        .iter()
        .map(|s| point_set(n, s, "opens"))
        .collect::<Result<Vec<_>>>()?;
    let topology = FiniteTopology::from_subbasis(n, &opens);
    if f.initial >= n {
        return Err(structure(format!(
            "initial point {} is outside 0..{n}",
            f.initial
        )));
    }
    let observable = ObservablePair::new(
        point_set(n, &f.accept, "accept")?,
        point_set(n, &f.reject, "reject")?,
    );
    let mut ops = family(&alphabet, endmarkers, &f.ops, op)?;
    if endmarkers.left && ops.left.is_none() {
        ops.left = Some(identity());
    }
    if endmarkers.right && ops.right.is_none() {
        ops.right = Some(identity());
    }
    let base = FiniteTopMachine {
        alphabet,
        endmarkers,
        topology,
        // Replaced by the caller.
        dynamics: Dynamics::Deterministic(OpFamily {
            letters: Vec::new(),
            left: None,
            right: None,
        }),
        initial: f.initial,
        observable,
        reject_mode: RejectMode::default(),
    };
    Ok((base, ops))
}

fn build_dfa(f: &DfaFile) -> Result<Dfa> {
    let n = f.points;
    if n == 0 {
        return Err(structure("a machine needs at least one point"));
    }
    let alphabet = alphabet_of(&f.alphabet)?;
    let endmarkers: Endmarkers = f.endmarked.into();
    let transitions = family(&alphabet, endmarkers, &f.ops, |name, table: &Vec<usize>| {
        if table.len() != n {
            return Err(structure(format!(
                "operator {name} has {} entries, expected {n}",
                table.len()
            )));
        }
        SingleOp::new(table.clone()).map_err(|e| structure(format!("operator {name}: {e}")))
    })?;
    if f.initial >= n {
        return Err(structure(format!(
            "initial state {} is outside 0..{n}",
            f.initial
        )));
    }
    let accept = point_set(n, &f.accept, "accept")?;
    let reject = match &f.reject {
        Some(r) => point_set(n, r, "reject")?,
        None => accept.complement(n),
    };
    let dfa = Dfa {
        n_states: n,
        alphabet,
        endmarkers,
        transitions,
        start: f.initial,
        accept,
        reject,
    };
    valid(dfa.to_machine())?;
    Ok(dfa)
}

fn finite_to_file(m: &FiniteTopMachine) -> MachineFile {
    let mut opens: Vec<Vec<usize>> = m.topology.neighborhoods().iter().map(PointSet::to_vec).collect();
    opens.sort();
    opens.dedup();
    let alphabet = m.alphabet.symbols().to_vec();
    let endmarked = m.endmarkers.into();
    let accept = m.observable.accept.to_vec();
    let reject = m.observable.reject.to_vec();
    match &m.dynamics {
        Dynamics::Deterministic(ops) => MachineFile::FiniteDta(FiniteFile {
            points: m.n_points(),
            alphabet,
            endmarked,
            opens,
            initial: m.initial,
            accept,
            reject,
            ops: family_to_map(&m.alphabet, ops, |b| b.table().to_vec()),
            reject_mode: None,
        }),
        Dynamics::Nondeterministic(ops) => MachineFile::FiniteNta(FiniteFile {
            points: m.n_points(),
            alphabet,
            endmarked,
            opens,
            initial: m.initial,
            accept,
            reject,
            ops: family_to_map(&m.alphabet, ops, |b| {
                b.table().iter().map(PointSet::to_vec).collect()
            }),
            reject_mode: Some(m.reject_mode.into()),
        }),
    }
}

fn dfa_to_file(d: &Dfa) -> MachineFile {
    MachineFile::Dfa(DfaFile {
        points: d.n_states,
        alphabet: d.alphabet.symbols().to_vec(),
        endmarked: d.endmarkers.into(),
        initial: d.start,
        accept: d.accept.to_vec(),
        reject: Some(d.reject.to_vec()),
        ops: family_to_map(&d.alphabet, &d.transitions, |b| b.table().to_vec()),
    })
}

/// Serialises a finite machine in canonical form.
pub fn finite_to_string(m: &FiniteTopMachine) -> String {
    to_canonical_string(&finite_to_file(m))
}

pub fn dfa_to_string(d: &Dfa) -> String {
    to_canonical_string(&dfa_to_file(d))
}

fn require<'a, T>(field: &'a Option<T>, name: &str) -> Result<&'a T> {
    field
        .as_ref()
        .ok_or_else(|| structure(format!("zoo spec needs {name:?}")))
}

fn matrix<T: nalgebra::Scalar + num::Zero>(
    rows: &Matrix,
    name: &str,
    f: impl Fn(&Entry) -> Result<T>,
) -> Result<DMatrix<T>> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != c) {
        return Err(structure(format!("matrix for {name} is ragged")));
    }
    let mut m = DMatrix::zeros(r, c);
    for (i, row) in rows.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            m[(i, j)] = f(e)?;
        }
    }
    Ok(m)
}

fn vector<T: nalgebra::Scalar>(
    initial: &Option<InitialField>,
    f: impl Fn(&Entry) -> Result<T>,
) -> Result<Option<DVector<T>>> {
    match initial {
        None => Ok(None),
        Some(InitialField::Vector(v)) => {
            let entries = v.iter().map(f).collect::<Result<Vec<_>>>()?;
            Ok(Some(DVector::from_vec(entries)))
        }
        Some(InitialField::State(_)) => Err(structure("initial must be a vector for this model")),
    }
}

fn check_fields(f: &ZooFile, model: Model) -> Result<()> {
    let present = [
        ("k", f.k.is_some()),
        ("matrices", f.matrices.is_some()),
        ("kraus", f.kraus.is_some()),
        ("epsilon", f.epsilon.is_some()),
        ("tolerance", f.tolerance.is_some()),
        ("non", f.non.is_some()),
        ("states", f.states.is_some()),
        ("stack", f.stack.is_some()),
        ("moves", f.moves.is_some()),
    ];
    let allowed: &[&str] = match model {
        Model::Pfa | Model::PfaExact | Model::MoQfa => &["k", "matrices", "epsilon"],
        Model::MmQfa => &["k", "matrices", "epsilon", "non"],
        Model::Gfa => &["k", "matrices", "tolerance"],
        Model::SuperopQfa => &["k", "kraus", "epsilon"],
        Model::Dpda | Model::Npda => &["states", "stack", "moves"],
    };
    match present
        .iter()
        .find(|(name, here)| *here && !allowed.contains(name))
    {
        Some((name, _)) => Err(structure(format!("field {name:?} does not apply to this model"))),
        None => Ok(()),
    }
}

fn build_zoo(f: &ZooFile) -> Result<ZooMachine> {
    if let Some(name) = &f.name {
        if *f
            != (ZooFile {
                name: Some(name.clone()),
                ..ZooFile::default()
            })
        {
            return Err(structure("a named zoo machine takes no other fields"));
        }
        return Ok(ZooMachine::Builtin(builtin_example(name)?));
    }
    let model = *require(&f.model, "model")?;
    check_fields(f, model)?;
    let alphabet = alphabet_of(require(&f.alphabet, "alphabet")?)?;
    let endmarkers: Endmarkers = f.endmarked.unwrap_or_default().into();
    let accept = require(&f.accept, "accept")?.clone();
    let reject = require(&f.reject, "reject")?.clone();
    let epsilon = || -> Result<f64> { f.epsilon.as_ref().map_or(Ok(0.0), Entry::real) };
    match model {
        Model::Pfa | Model::Gfa => {
            let k = *require(&f.k, "k")?;
            let matrices = family(
                &alphabet,
                endmarkers,
                require(&f.matrices, "matrices")?,
                |name, m| matrix(m, name, Entry::real),
            )?;
            let initial = vector(&f.initial, Entry::real)?;
            if model == Model::Pfa {
                let spec = StochasticSpec {
                    alphabet,
                    endmarkers,
                    k,
                    matrices,
                    initial,
                    epsilon: epsilon()?,
                    accept,
                    reject,
                };
                Ok(ZooMachine::Pfa(make_pfa(spec)?))
            } else {
                let tolerance = f.tolerance.unwrap_or(crate::TOLERANCE);
                let spec = GfaSpec {
                    alphabet,
                    endmarkers,
                    k,
                    matrices,
                    initial,
                    accept,
                    reject,
                    tolerance,
                };
                Ok(ZooMachine::Gfa(make_gfa(spec)?))
            }
        }
        Model::PfaExact => {
            let k = *require(&f.k, "k")?;
            let matrices = family(
                &alphabet,
                endmarkers,
                require(&f.matrices, "matrices")?,
                |_, m| {
                    m.iter()
                        .map(|row| row.iter().map(Entry::rational).collect::<Result<Vec<_>>>())
                        .collect::<Result<Vec<_>>>()
                },
            )?;
            let initial = match &f.initial {
                None => None,
                Some(InitialField::Vector(v)) => {
                    Some(v.iter().map(Entry::rational).collect::<Result<Vec<_>>>()?)
                }
                Some(InitialField::State(_)) => {
                    return Err(structure("initial must be a vector for this model"))
                }
            };
            let epsilon = f
                .epsilon
                .as_ref()
                .map_or(Ok(BigRational::from_integer(0.into())), Entry::rational)?;
            let spec = ExactStochasticSpec {
                alphabet,
                endmarkers,
                k,
                matrices,
                initial,
                epsilon,
                accept,
                reject,
            };
            Ok(ZooMachine::ExactPfa(make_exact_pfa(spec)?))
        }
        Model::MoQfa | Model::MmQfa => {
            let k = *require(&f.k, "k")?;
            let matrices = family(
                &alphabet,
                endmarkers,
                require(&f.matrices, "matrices")?,
                |name, m| matrix(m, name, Entry::complex),
            )?;
            let initial = vector(&f.initial, Entry::complex)?;
            let spec = QuantumSpec {
                alphabet,
                endmarkers,
                k,
                matrices,
                initial,
                epsilon: epsilon()?,
                accept,
                reject,
                non: f.non.clone(),
            };
            if model == Model::MoQfa {
                Ok(ZooMachine::MoQfa(make_mo_qfa(spec)?))
            } else {
                Ok(ZooMachine::MmQfa(make_mm_qfa(spec)?))
            }
        }
        Model::SuperopQfa => {
            let k = *require(&f.k, "k")?;
            if f.initial.is_some() {
                return Err(structure(
                    "a superoperator machine starts in the first basis state",
                ));
            }
            let kraus = family(&alphabet, endmarkers, require(&f.kraus, "kraus")?, |name, ms| {
                ms.iter()
                    .map(|m| matrix(m, name, Entry::complex))
                    .collect::<Result<Vec<_>>>()
            })?;
            let spec = KrausSpec {
                alphabet,
                endmarkers,
                k,
                kraus,
                epsilon: epsilon()?,
                accept,
                reject,
            };
            Ok(ZooMachine::Superop(make_superop_qfa(spec)?))
        }
        Model::Dpda | Model::Npda => {
            let states = *require(&f.states, "states")?;
            let stack = f.stack.clone().unwrap_or_default();
            let initial = match &f.initial {
                None => 0,
                Some(InitialField::State(q)) => *q,
                Some(InitialField::Vector(_)) => {
                    return Err(structure("initial must be a state for this model"))
                }
            };
            let stack_index = |c: char| {
                stack
                    .iter()
                    .position(|&z| z == c)
                    .ok_or_else(|| structure(format!("{c:?} is not a stack symbol")))
            };
            let moves = family(
                &alphabet,
                endmarkers,
                require(&f.moves, "moves")?,
                |name, rules| {
                    let mut table = vec![vec![Vec::new(); stack.len() + 1]; states];
                    for rule in rules {
                        if rule.state >= states {
                            return Err(structure(format!(
                                "move for {name} from unknown state {}",
                                rule.state
                            )));
                        }
                        let top = rule.top.map_or(Ok(stack.len()), stack_index)?;
                        let push = rule.push.chars().map(stack_index).collect::<Result<Vec<_>>>()?;
                        table[rule.state][top].push(PushdownMove {
                            next: rule.next,
                            push,
                        });
                    }
                    Ok(table)
                },
            )?;
            let spec = PushdownSpec {
                states,
                stack_alphabet: stack.clone(),
                alphabet,
                endmarkers,
                initial,
                moves,
                accept: accept.iter().copied().collect(),
                reject: reject.iter().copied().collect(),
            };
            Ok(ZooMachine::Pushdown(make_pushdown(spec, model == Model::Dpda)?))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{complement_machine, quotient_to_dfa};
    use crate::verify::equivalent_up_to;
    use crate::zoo::zero_machine;
    use crate::Verdict;

    const ZERO: &str = r#"{
        "type": "finite-dta",
        "points": 3,
        "alphabet": ["0", "1"],
        "endmarked": true,
        "opens": [[0], [1, 2]],
        "initial": 0,
        "accept": [0],
        "reject": [1, 2],
        "ops": {"0": [0, 1, 2], "1": [1, 2, 2], "lend": [0, 1, 2], "rend": [0, 1, 2]}
    }"#;

    fn finite(text: &str) -> FiniteTopMachine {
        match parse_machine(text).unwrap() {
            Machine::Finite(m) => m,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_file_matches_builtin() {
        let m = finite(ZERO);
        assert_eq!(m, zero_machine());
        let again = finite(&finite_to_string(&m));
        assert_eq!(again, m);
        assert_eq!(finite_to_string(&again), finite_to_string(&m));
    }

    #[test]
    fn canonical_form_sorts() {
        let text = finite_to_string(&zero_machine());
        let keys: Vec<&str> = text
            .lines()
            .filter(|l| l.starts_with("  \""))
            .map(|l| l.trim().split('"').nth(1).unwrap())
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert!(text.ends_with("}\n"));
    }

    #[test]
    fn errors_have_exit_codes() {
        let e = parse_machine("{ not json").unwrap_err();
        assert_eq!(e.exit_code(), 4);
        let e = parse_machine(&ZERO.replace("\"points\"", "\"bogus\": 1, \"points\"")).unwrap_err();
        assert_eq!(e.exit_code(), 4, "{e}");
        let e = parse_machine(&ZERO.replace("\"accept\": [0]", "\"accept\": [1]")).unwrap_err();
        assert_eq!(e.exit_code(), 3);
        assert!(e.to_string().contains("not clopen"), "{e}");
        let e = parse_machine(&ZERO.replace("\"1\": [1, 2, 2]", "\"1\": [1, 2, 3]")).unwrap_err();
        assert_eq!(e.exit_code(), 3);
        let e = parse_machine(&ZERO.replace(", \"lend\": [0, 1, 2]", ", \"x\": [0, 1, 2]")).unwrap_err();
        assert_eq!(e.exit_code(), 3);
    }

    #[test]
    fn missing_endmarker_ops_are_identity() {
        let m = finite(&ZERO.replace(", \"lend\": [0, 1, 2], \"rend\": [0, 1, 2]", ""));
        assert!(equivalent_up_to(&m, &zero_machine(), 6).unwrap());
        let half = finite(
            &ZERO
                .replace("\"endmarked\": true", "\"endmarked\": \"left\"")
                .replace(", \"rend\": [0, 1, 2]", ""),
        );
        assert_eq!(
            half.endmarkers,
            Endmarkers {
                left: true,
                right: false
            }
        );
        let text = finite_to_string(&half);
        assert!(text.contains("\"endmarked\": \"left\""));
        assert_eq!(finite(&text), half);
    }

    #[test]
    fn nta_and_dfa_round_trip() {
        let nta = r#"{"type": "finite-nta", "points": 2, "alphabet": ["a", "b"], "opens": [[0], [1]],
            "initial": 0, "accept": [1], "reject": [0],
            "ops": {"a": [[0, 1], []], "b": [[0], []]}}"#;
        let m = finite(nta);
        assert!(!m.is_deterministic());
        assert_eq!(m.evaluate("ba").unwrap(), Verdict::Accept);
        assert_eq!(finite(&finite_to_string(&m)), m);

        let q = quotient_to_dfa(&zero_machine()).unwrap().dfa;
        let text = dfa_to_string(&q);
        match parse_machine(&text).unwrap() {
            Machine::Dfa(d) => {
                assert_eq!(d, q);
                assert_eq!(dfa_to_string(&d), text);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn complement_twice_is_byte_identical() {
        let m = finite(ZERO);
        let twice = complement_machine(&complement_machine(&m).unwrap()).unwrap();
        assert_eq!(finite_to_string(&twice), finite_to_string(&m));
    }

    #[test]
    fn zoo_files() {
        let named = parse_machine(r#"{"type": "zoo", "name": "equal"}"#).unwrap();
        assert_eq!(named.recognizer().evaluate("abab").unwrap(), Verdict::Accept);
        assert!(parse_machine(r#"{"type": "zoo", "name": "equal", "k": 2}"#).is_err());
        assert_eq!(
            parse_machine(r#"{"type": "zoo", "name": "nope"}"#)
                .unwrap_err()
                .exit_code(),
            3
        );

        let pfa = r#"{"type": "zoo", "model": "pfa", "alphabet": ["a"], "endmarked": true, "k": 2,
            "matrices": {"a": [[0.5, 0.5], [0.5, 0.5]]}, "epsilon": 0.4, "accept": [0], "reject": [1]}"#;
        let m = parse_machine(pfa).unwrap();
        assert_eq!(m.recognizer().evaluate("a").unwrap(), Verdict::Undetermined);
        assert_eq!(m.recognizer().evaluate("").unwrap(), Verdict::Accept);
        let again = parse_machine(&m.to_canonical_string()).unwrap();
        assert_eq!(again.to_canonical_string(), m.to_canonical_string());

        let exact = r#"{"type": "zoo", "model": "pfa-exact", "alphabet": ["a"], "k": 2,
            "matrices": {"a": [["1/3", "2/3"], ["2/3", "1/3"]]}, "epsilon": "1/3", "accept": [0], "reject": [1]}"#;
        let m = parse_machine(exact).unwrap();
        // One step gives (1/3, 2/3): exactly on the rejecting cut.
        assert_eq!(m.recognizer().evaluate("a").unwrap(), Verdict::Reject);

        let mo = r#"{"type": "zoo", "model": "mo-qfa", "alphabet": ["a"], "k": 2,
            "matrices": {"a": [[0, 1], [1, 0]]}, "epsilon": 0.25, "accept": [0], "reject": [1]}"#;
        let m = parse_machine(mo).unwrap();
        assert_eq!(m.recognizer().evaluate("aa").unwrap(), Verdict::Accept);
        assert_eq!(m.recognizer().evaluate("a").unwrap(), Verdict::Reject);

        let dpda = r#"{"type": "zoo", "model": "dpda", "alphabet": ["a", "b"], "endmarked": true,
            "states": 2, "stack": ["X"], "accept": [0], "reject": [1],
            "moves": {
                "a": [{"state": 0, "next": 0, "push": "X"}, {"state": 0, "top": "X", "next": 0, "push": "XX"},
                      {"state": 1, "next": 1}, {"state": 1, "top": "X", "next": 1, "push": "X"}],
                "b": [{"state": 0, "next": 1}, {"state": 0, "top": "X", "next": 0},
                      {"state": 1, "next": 1}, {"state": 1, "top": "X", "next": 1, "push": "X"}],
                "rend": [{"state": 0, "next": 0}, {"state": 0, "top": "X", "next": 1, "push": "X"},
                         {"state": 1, "next": 1}, {"state": 1, "top": "X", "next": 1, "push": "X"}]
            }}"#;
        let m = parse_machine(dpda).unwrap();
        assert_eq!(m.recognizer().evaluate("aabb").unwrap(), Verdict::Accept);
        assert_eq!(m.recognizer().evaluate("abb").unwrap(), Verdict::Reject);
        assert_eq!(m.recognizer().evaluate("aab").unwrap(), Verdict::Reject);

        let stray = pfa.replace("\"k\": 2", "\"k\": 2, \"states\": 3");
        assert_eq!(parse_machine(&stray).unwrap_err().exit_code(), 3);
    }
}
