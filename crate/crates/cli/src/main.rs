use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use topaut::constructions::{
    apply_inverse_homomorphism, complement_machine, eliminate_left_endmarker, eliminate_right_endmarker,
    normalize_machine, product_machine, quotient_to_dfa, reverse_nta, vietoris_determinize, DeterminizeMode,
    ProductMode,
};
use topaut::format::{self, dfa_to_string, finite_to_string, load_machine, Machine};
use topaut::machine::DEFAULT_WORD_BUDGET;
use topaut::operators::LiftMode;
use topaut::topology::{enumerate_topologies, DEFAULT_HYPERSPACE_CAP};
use topaut::verify::{brute_force_compare, classify_small_topologies, CompareMode, Comparison};
use topaut::{FiniteTopMachine, Verdict};

const EXIT_INVALID: u8 = 3;
const EXIT_PARSE: u8 = 4;

#[derive(Parser)]
#[command(name = "topaut", version, about = "One-way topological automata")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a machine file.
    Validate { file: PathBuf },
    /// Run a machine on one word. Exit 0 accept, 1 reject, 2 undetermined.
    Run {
        file: PathBuf,
        #[arg(long, short, default_value = "")]
        word: String,
        /// Print every configuration along the run.
        #[arg(long)]
        trace: bool,
    },
    /// Apply a construction and write the resulting machine.
    Convert {
        file: PathBuf,
        /// quotient-dfa | determinize[:explicit|:subset] | strip-lend |
        /// strip-rend | complement | normalize | reverse | invhom:MAPFILE |
        /// product:FILE2:union|intersection
        #[arg(long)]
        op: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Allow empty images when lifting operators (explicit determinization).
        #[arg(long)]
        permissive: bool,
        /// Largest base space the explicit hyperspace may be built over.
        #[arg(long, default_value_t = DEFAULT_HYPERSPACE_CAP)]
        cap: usize,
    },
    /// Compare two machines on every word up to a length.
    Compare {
        first: PathBuf,
        second: PathBuf,
        #[arg(long, default_value_t = 8)]
        max_len: usize,
        /// Compare accepted sets only, ignoring reject/undetermined.
        #[arg(long)]
        accepted_only: bool,
    },
    /// List (or classify) every topology on n points.
    Topologies {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        classify: bool,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn invalid(message: impl ToString) -> Self {
        Failure {
            code: EXIT_INVALID,
            message: message.to_string(),
        }
    }

    fn parse(message: impl ToString) -> Self {
        Failure {
            code: EXIT_PARSE,
            message: message.to_string(),
        }
    }
}

impl From<format::FormatError> for Failure {
    fn from(e: format::FormatError) -> Self {
        Failure {
            code: e.exit_code() as u8,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<(String, u8), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_PARSE } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok((out, code)) => {
            print!("{out}");
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn dispatch(command: Command) -> Outcome {
    match command {
        Command::Validate { file } => validate(&file),
        Command::Run { file, word, trace } => run(&file, &word, trace),
        Command::Convert {
            file,
            op,
            out,
            permissive,
            cap,
        } => {
            let lift = if permissive {
                LiftMode::Permissive
            } else {
                LiftMode::Strict
            };
            let text = convert(&file, &op, lift, cap)?;
            match out {
                Some(path) => {
                    std::fs::write(&path, text)
                        .map_err(|e| Failure::parse(format!("{}: {e}", path.display())))?;
                    Ok((String::new(), 0))
                }
                None => Ok((text, 0)),
            }
        }
        Command::Compare {
            first,
            second,
            max_len,
            accepted_only,
        } => {
            let mode = if accepted_only {
                CompareMode::AcceptedOnly
            } else {
                CompareMode::ThreeValued
            };
            compare(&first, &second, max_len, mode)
        }
        Command::Topologies { n, classify } => topologies(n, classify),
    }
}

fn validate(file: &Path) -> Outcome {
    match load_machine(file) {
        Ok(m) => {
            let r = m.recognizer();
            let kind = match &m {
                Machine::Finite(f) if f.is_deterministic() => {
                    format!("finite-dta on {} points", f.n_points())
                }
                Machine::Finite(f) => format!("finite-nta on {} points", f.n_points()),
                Machine::Dfa(d) => format!("dfa with {} states", d.n_states),
                Machine::Zoo { .. } => "zoo machine".to_string(),
            };
            let alphabet: String = r.alphabet().symbols().iter().collect();
            Ok((format!("valid: {kind}, alphabet {{{alphabet}}}\n"), 0))
        }
        Err(e @ format::FormatError::Invalid(_)) => Ok((format!("{e}\n"), EXIT_INVALID)),
        Err(e) => Err(e.into()),
    }
}

fn run(file: &Path, word: &str, trace: bool) -> Outcome {
    let m = load_machine(file)?;
    let r = m.recognizer();
    let encoded = r.alphabet().encode(word).map_err(Failure::parse)?;
    let (text, verdict) = if trace {
        let t = r.trace_of(&encoded);
        (format!("{t}\n"), t.verdict)
    } else {
        let v = r.verdict_of(&encoded);
        (format!("{v}\n"), v)
    };
    let code = match verdict {
        Verdict::Accept => 0,
        Verdict::Reject => 1,
        Verdict::Undetermined => 2,
    };
    Ok((text, code))
}

fn finite(m: &Machine) -> Result<FiniteTopMachine, Failure> {
    m.to_finite()
        .ok_or_else(|| Failure::invalid("this construction needs a finite-topology machine"))
}

fn convert(file: &Path, op: &str, lift: LiftMode, cap: usize) -> Result<String, Failure> {
    let m = finite(&load_machine(file)?)?;
    let (name, arg) = op.split_once(':').unwrap_or((op, ""));
    let fail = Failure::invalid;
    let out = match (name, arg) {
        ("quotient-dfa", "") => return Ok(dfa_to_string(&quotient_to_dfa(&m).map_err(fail)?.dfa)),
        ("determinize", mode) => {
            let mode = match mode {
                "" | "subset" => DeterminizeMode::Subset,
                "explicit" => DeterminizeMode::Explicit { lift, cap },
                other => return Err(Failure::parse(format!("unknown determinize mode {other:?}"))),
            };
            vietoris_determinize(&m, mode).map_err(fail)?.into_machine()
        }
        ("strip-lend", "") => eliminate_left_endmarker(&m).map_err(fail)?,
        ("strip-rend", "") => eliminate_right_endmarker(&m).map_err(fail)?,
        ("complement", "") => complement_machine(&m).map_err(fail)?,
        ("normalize", "") => normalize_machine(&m).map_err(fail)?,
        ("reverse", "") => reverse_nta(&m, None).map_err(fail)?,
        ("invhom", path) if !path.is_empty() => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::parse(format!("{path}: {e}")))?;
            let h: BTreeMap<char, String> =
                serde_json::from_str(&text).map_err(|e| Failure::parse(format!("{path}: {e}")))?;
            apply_inverse_homomorphism(&m, &h).map_err(fail)?
        }
        ("product", rest) => {
            let (path, mode) = rest
                .rsplit_once(':')
                .ok_or_else(|| Failure::parse("product needs FILE2:union or FILE2:intersection"))?;
            let mode = match mode {
                "union" => ProductMode::Union,
                "intersection" => ProductMode::Intersection,
                other => return Err(Failure::parse(format!("unknown product mode {other:?}"))),
            };
            let other = finite(&load_machine(path)?)?;
            product_machine(&m, &other, mode).map_err(fail)?
        }
        _ => return Err(Failure::parse(format!("unknown operation {op:?}"))),
    };
    Ok(finite_to_string(&out))
}

fn compare(first: &Path, second: &Path, max_len: usize, mode: CompareMode) -> Outcome {
    let (a, b) = (load_machine(first)?, load_machine(second)?);
    let result = brute_force_compare(a.recognizer(), b.recognizer(), max_len, mode, DEFAULT_WORD_BUDGET)
        .map_err(Failure::invalid)?;
    Ok(match result {
        Comparison::Equivalent { words } => {
            (format!("EQUIVALENT ({words} words up to length {max_len})\n"), 0)
        }
        Comparison::Counterexample { word, left, right } => {
            (format!("COUNTEREXAMPLE {word:?}: {left} vs {right}\n"), 1)
        }
    })
}

fn topologies(n: usize, classify: bool) -> Outcome {
    let mut out = String::new();
    let count = if classify {
        let rows = classify_small_topologies(n).map_err(Failure::invalid)?;
        writeln!(
            out,
            "#\tkolmogorov\tclasses\ttrivial\tdiscrete\tobservables\topens"
        )
        .unwrap();
        for (i, r) in rows.iter().enumerate() {
            let opens: Vec<String> = r.topology.opens().iter().map(ToString::to_string).collect();
            writeln!(
                out,
                "{i}\t{}\t{}\t{}\t{}\t{}\t{}",
                r.kolmogorov,
                r.classes,
                r.trivial,
                r.discrete,
                r.observables,
                opens.join(" ")
            )
            .unwrap();
        }
        rows.len()
    } else {
        let mut count = 0;
        for (i, t) in enumerate_topologies(n).map_err(Failure::invalid)?.enumerate() {
            let opens: Vec<String> = t.opens().iter().map(ToString::to_string).collect();
            writeln!(out, "{i}\t{}", opens.join(" ")).unwrap();
            count += 1;
        }
        count
    };
    writeln!(out, "{count} topologies").unwrap();
    Ok((out, 0))
}
