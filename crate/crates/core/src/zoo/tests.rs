use nalgebra::{DMatrix, DVector};
use num::complex::Complex64;
use num::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::machine::{enumerate_language, words_up_to, DEFAULT_WORD_BUDGET};
use crate::sample;

fn verdicts<R: Recognizer + ?Sized>(m: &R, max_len: usize) -> Vec<(String, crate::Verdict)> {
    let a = m.alphabet().clone();
    words_up_to(a.len(), max_len)
        .map(|w| (a.decode(&w), m.verdict_of(&w)))
        .collect()
}

fn expect_language<R: Recognizer + ?Sized>(m: &R, max_len: usize, member: impl Fn(&str) -> bool) {
    for (w, v) in verdicts(m, max_len) {
        let want = if member(&w) {
            crate::Verdict::Accept
        } else {
            crate::Verdict::Reject
        };
        assert_eq!(v, want, "word {w:?}");
    }
}

fn parity_dfa() -> Dfa {
    Dfa {
        n_states: 2,
        alphabet: Alphabet::from_chars("a").unwrap(),
        endmarkers: Endmarkers::NONE,
        transitions: OpFamily {
            letters: vec![SingleOp::new(vec![1, 0]).unwrap()],
            left: None,
            right: None,
        },
        start: 0,
        accept: pset![0],
        reject: pset![1],
    }
}

fn real(rows: &[&[f64]]) -> DMatrix<f64> {
    DMatrix::from_row_iterator(
        rows.len(),
        rows[0].len(),
        rows.iter().flat_map(|r| r.iter().copied()),
    )
}

#[test]
fn zero_machine_examples() {
    let m = zero_machine();
    assert!(m.validate().is_valid());
    assert_eq!(m.evaluate("00").unwrap(), crate::Verdict::Accept);
    assert_eq!(m.evaluate("01").unwrap(), crate::Verdict::Reject);
    expect_language(&m, 8, |w| w.chars().all(|c| c == '0'));
    assert!(!m.topology.is_kolmogorov());
    expect_language(&ones_machine(), 8, |w| w.chars().all(|c| c == '1'));
}

#[test]
fn equal_machine_examples() {
    let m = equal_machine();
    expect_language(&m, 10, |w| {
        w.chars().filter(|&c| c == 'a').count() == w.chars().filter(|&c| c == 'b').count()
    });
    let trace = m.trace("ab").unwrap();
    let configs: Vec<&str> = trace.steps.iter().map(|s| s.config.as_str()).collect();
    assert_eq!(configs, ["0", "0", "1", "0", "0"]);
    assert_eq!(trace.verdict, crate::Verdict::Accept);
}

#[test]
fn equal_has_six_distinguishable_prefixes() {
    // a^i b^j is accepted iff i = j, so the prefixes a^0..a^5 are pairwise
    // separated by some suffix b^j.
    let m = equal_machine();
    let prefix = |i: usize| "a".repeat(i);
    for i in 0..6 {
        for j in (i + 1)..6 {
            let separated = (0..6).any(|s| {
                let suffix = "b".repeat(s);
                m.evaluate(&(prefix(i) + &suffix)).unwrap() != m.evaluate(&(prefix(j) + &suffix)).unwrap()
            });
            assert!(separated, "a^{i} and a^{j}");
        }
    }
}

#[test]
fn dyck_examples() {
    let m = dyck_machine();
    assert_eq!(m.evaluate("(())").unwrap(), crate::Verdict::Accept);
    assert_eq!(m.evaluate("(()").unwrap(), crate::Verdict::Reject);
    assert_eq!(m.evaluate("())(").unwrap(), crate::Verdict::Reject);
    let trace = m.trace("(()").unwrap();
    let configs: Vec<&str> = trace.steps.iter().map(|s| s.config.as_str()).collect();
    assert_eq!(
        configs,
        ["(0, ⊥)", "(0, ⊥)", "(0, ⊥X)", "(0, ⊥XX)", "(0, ⊥X)", "(0, ⊥X)"]
    );
    expect_language(&m, 8, |w| {
        let mut depth = 0i32;
        for c in w.chars() {
            depth += if c == '(' { 1 } else { -1 };
            if depth < 0 {
                return false;
            }
        }
        depth == 0
    });
}

#[test]
fn builtin_lookup() {
    for name in BUILTIN_NAMES {
        assert!(builtin_example(name).is_ok());
    }
    assert!(matches!(builtin_example("nope"), Err(ZooError::UnknownName(_))));
}

#[test]
fn classical_import_examples() {
    let all = Dfa {
        n_states: 1,
        alphabet: Alphabet::from_chars("ab").unwrap(),
        endmarkers: Endmarkers::NONE,
        transitions: OpFamily {
            letters: vec![SingleOp::identity(1), SingleOp::identity(1)],
            left: None,
            right: None,
        },
        start: 0,
        accept: pset![0],
        reject: pset![],
    };
    expect_language(&import_dfa(&all).unwrap(), 6, |_| true);
    let parity = import_dfa(&parity_dfa()).unwrap();
    assert!(parity.validate().is_valid());
    expect_language(&parity, 8, |w| w.len() % 2 == 0);
    let nfa = import_nfa(&ends_with_a_nfa(), RejectMode::Subset).unwrap();
    expect_language(&nfa, 8, |w| w.ends_with('a'));
    let mut bad = parity_dfa();
    bad.reject = pset![0];
    assert_eq!(import_dfa(&bad), Err(ZooError::Overlap));
}

#[test]
fn language_machine_examples() {
    let ab = Alphabet::from_chars("01").unwrap();
    for endmarked in [false, true] {
        expect_language(
            &language_machine(|w: &str| w.contains('1'), ab.clone(), endmarked),
            8,
            |w| w.contains('1'),
        );
        let palindrome = |w: &str| w.chars().eq(w.chars().rev());
        expect_language(
            &language_machine(palindrome, ab.clone(), endmarked),
            8,
            palindrome,
        );
        let lang = enumerate_language(
            &language_machine(|_: &str| false, ab.clone(), endmarked),
            8,
            DEFAULT_WORD_BUDGET,
        )
        .unwrap();
        assert!(lang.accepted.is_empty() && lang.undetermined.is_empty());
    }
    let m = language_machine(|w: &str| w.is_empty(), ab, true);
    let trace = m.trace("0").unwrap();
    assert_eq!(trace.steps.last().unwrap().config, "s_0");
}

fn parity_pfa(epsilon: f64) -> StochasticSpec {
    StochasticSpec {
        alphabet: Alphabet::from_chars("a").unwrap(),
        endmarkers: Endmarkers::BOTH,
        k: 2,
        matrices: OpFamily {
            letters: vec![real(&[&[0.0, 1.0], &[1.0, 0.0]])],
            left: None,
            right: None,
        },
        initial: None,
        epsilon,
        accept: vec![0],
        reject: vec![1],
    }
}

#[test]
fn pfa_examples() {
    let one = StochasticSpec {
        alphabet: Alphabet::from_chars("ab").unwrap(),
        endmarkers: Endmarkers::NONE,
        k: 1,
        matrices: OpFamily {
            letters: vec![real(&[&[1.0]]), real(&[&[1.0]])],
            left: None,
            right: None,
        },
        initial: None,
        epsilon: 0.0,
        accept: vec![0],
        reject: vec![],
    };
    expect_language(&make_pfa(one).unwrap(), 6, |_| true);

    let pfa = make_pfa(parity_pfa(0.0)).unwrap();
    let dfa = import_dfa(&parity_dfa()).unwrap();
    assert_eq!(verdicts(&pfa, 8), verdicts(&dfa, 8));

    // Mixing matrix: one step from e0 gives (0.5, 0.5), inside (0.4, 0.6).
    let mut mixing = parity_pfa(0.4);
    mixing.matrices.letters = vec![real(&[&[0.5, 0.5], &[0.5, 0.5]])];
    let m = make_pfa(mixing).unwrap();
    assert_eq!(m.evaluate("").unwrap(), crate::Verdict::Accept);
    assert_eq!(m.evaluate("a").unwrap(), crate::Verdict::Undetermined);

    let mut bad = parity_pfa(0.0);
    bad.matrices.letters = vec![real(&[&[0.5, 1.0], &[0.6, 0.0]])];
    assert!(matches!(make_pfa(bad), Err(ZooError::NonStochastic(_))));
    let mut bad = parity_pfa(0.0);
    bad.reject = vec![0];
    assert_eq!(make_pfa(bad).unwrap_err(), ZooError::Overlap);
    assert!(matches!(
        make_pfa(parity_pfa(1.0)),
        Err(ZooError::EpsilonOutOfRange(_))
    ));
}

#[test]
fn exact_pfa_cut_is_exact() {
    let r = |p: i64, q: i64| BigRational::new(p.into(), q.into());
    let spec = ExactStochasticSpec {
        alphabet: Alphabet::from_chars("a").unwrap(),
        endmarkers: Endmarkers::NONE,
        k: 2,
        matrices: OpFamily {
            letters: vec![vec![vec![r(1, 2), r(1, 2)], vec![r(1, 2), r(1, 2)]]],
            left: None,
            right: None,
        },
        initial: None,
        epsilon: r(1, 2),
        accept: vec![0],
        reject: vec![1],
    };
    // Mass exactly 1/2 meets both cuts at ε = 1/2, so it is unobserved.
    let m = make_exact_pfa(spec.clone()).unwrap();
    assert_eq!(m.evaluate("a").unwrap(), crate::Verdict::Undetermined);
    assert!(m.check_run(&[0, 0, 0]).is_ok());
    let m = make_exact_pfa(ExactStochasticSpec {
        epsilon: r(1, 3),
        ..spec
    })
    .unwrap();
    assert_eq!(m.evaluate("").unwrap(), crate::Verdict::Accept);
    assert_eq!(m.evaluate("a").unwrap(), crate::Verdict::Undetermined);
}

#[test]
fn gfa_subspace_membership() {
    let spec = GfaSpec {
        alphabet: Alphabet::from_chars("ab").unwrap(),
        endmarkers: Endmarkers::NONE,
        k: 2,
        matrices: OpFamily {
            letters: vec![
                real(&[&[0.0, 2.0], &[3.0, 0.0]]),
                real(&[&[1.0, 1.0], &[0.0, 0.0]]),
            ],
            left: None,
            right: None,
        },
        initial: None,
        accept: vec![0],
        reject: vec![1],
        tolerance: crate::TOLERANCE,
    };
    let m = make_gfa(spec.clone()).unwrap();
    assert_eq!(m.evaluate("").unwrap(), crate::Verdict::Accept);
    assert_eq!(m.evaluate("a").unwrap(), crate::Verdict::Reject);
    assert_eq!(m.evaluate("aa").unwrap(), crate::Verdict::Accept);
    let mixed = GfaSpec {
        initial: Some(DVector::from_vec(vec![1.0, 1.0])),
        ..spec.clone()
    };
    assert_eq!(
        make_gfa(mixed).unwrap().evaluate("").unwrap(),
        crate::Verdict::Undetermined
    );
    let zero = GfaSpec {
        initial: Some(DVector::from_vec(vec![0.0, 0.0])),
        ..spec
    };
    assert_eq!(
        make_gfa(zero).unwrap().evaluate("").unwrap(),
        crate::Verdict::Undetermined
    );
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn hadamard() -> DMatrix<Complex64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_row_slice(2, 2, &[c(h), c(h), c(h), c(-h)])
}

fn quantum(k: usize, letters: Vec<DMatrix<Complex64>>, alphabet: &str) -> QuantumSpec {
    QuantumSpec {
        alphabet: Alphabet::from_chars(alphabet).unwrap(),
        endmarkers: Endmarkers::BOTH,
        k,
        matrices: OpFamily {
            letters,
            left: None,
            right: None,
        },
        initial: None,
        epsilon: 0.1,
        accept: vec![0],
        reject: vec![1],
        non: None,
    }
}

#[test]
fn mo_qfa_examples() {
    let m = make_mo_qfa(quantum(2, vec![hadamard()], "a")).unwrap();
    assert_eq!(m.evaluate("").unwrap(), crate::Verdict::Accept);
    assert_eq!(m.evaluate("a").unwrap(), crate::Verdict::Undetermined);
    assert_eq!(m.evaluate("aa").unwrap(), crate::Verdict::Accept);
    // ε = 0 never accepts under the strict threshold.
    let strict = QuantumSpec {
        epsilon: 0.0,
        ..quantum(2, vec![hadamard()], "a")
    };
    assert_eq!(
        make_mo_qfa(strict).unwrap().evaluate("").unwrap(),
        crate::Verdict::Undetermined
    );
    let bad = quantum(
        2,
        vec![DMatrix::from_row_slice(2, 2, &[c(1.0), c(1.0), c(0.0), c(1.0)])],
        "a",
    );
    assert!(matches!(make_mo_qfa(bad), Err(ZooError::NonUnitary(_))));
}

#[test]
fn mm_qfa_examples() {
    let spec = QuantumSpec {
        accept: vec![0],
        reject: vec![],
        endmarkers: Endmarkers::NONE,
        ..quantum(1, vec![DMatrix::identity(1, 1)], "a")
    };
    let m = make_mm_qfa(spec).unwrap();
    let config = m
        .dynamics
        .step(&m.dynamics.init(), ExtSymbol::Letter(0))
        .remove(0);
    assert!((config.gamma_acc - 1.0).abs() < 1e-12);
    assert_eq!(m.evaluate("a").unwrap(), crate::Verdict::Accept);

    // Three levels: 0 accepting, 1 rejecting, 2 non-halting.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut spec = quantum(3, vec![sample::random_unitary(&mut rng, 3)], "a");
    spec.initial = Some(DVector::from_vec(vec![c(0.0), c(0.0), c(1.0)]));
    let m = make_mm_qfa(spec.clone()).unwrap();
    assert!(m.check_run(&[0; 12]).is_ok());

    spec.non = Some(vec![1, 2]);
    assert_eq!(make_mm_qfa(spec).unwrap_err(), ZooError::NotAPartition);
}

#[test]
fn mm_fold_keeps_sign() {
    assert_eq!(quantum::fold(-0.6, 0.64), -1.0);
    assert_eq!(quantum::fold(0.0, 0.25), 0.5);
}

#[test]
fn superop_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let spec = KrausSpec {
        alphabet: Alphabet::from_chars("ab").unwrap(),
        endmarkers: Endmarkers::BOTH,
        k: 3,
        kraus: OpFamily {
            letters: vec![
                sample::random_kraus(&mut rng, 3, 2),
                sample::random_kraus(&mut rng, 3, 3),
            ],
            left: None,
            right: Some(sample::random_kraus(&mut rng, 3, 1)),
        },
        epsilon: 0.2,
        accept: vec![0],
        reject: vec![1, 2],
    };
    let m = make_superop_qfa(spec.clone()).unwrap();
    for _ in 0..20 {
        let len = rng.gen_range(0..=12);
        let w: Vec<usize> = (0..len).map(|_| rng.gen_range(0..2)).collect();
        m.check_run(&w).unwrap();
    }
    // Identity dynamics keep ρ = e0 e0†, which is accepted.
    let id = KrausSpec {
        kraus: OpFamily {
            letters: vec![vec![DMatrix::identity(3, 3)], vec![DMatrix::identity(3, 3)]],
            left: None,
            right: None,
        },
        ..spec.clone()
    };
    assert_eq!(
        make_superop_qfa(id).unwrap().evaluate("abba").unwrap(),
        crate::Verdict::Accept
    );
    let incomplete = KrausSpec {
        kraus: OpFamily {
            letters: vec![
                vec![DMatrix::identity(3, 3) * c(0.5)],
                vec![DMatrix::identity(3, 3)],
            ],
            left: None,
            right: None,
        },
        ..spec
    };
    assert!(matches!(
        make_superop_qfa(incomplete),
        Err(ZooError::KrausIncomplete(_))
    ));
}

#[test]
fn stack_ignoring_dpda_matches_dfa() {
    // The parity DFA, with every move writing the top symbol back.
    let dfa = parity_dfa();
    let table: Vec<Vec<Vec<PushdownMove>>> = (0..2)
        .map(|q| {
            let next = dfa.transitions.letters[0].apply(q);
            vec![
                vec![PushdownMove { next, push: vec![0] }],
                vec![PushdownMove { next, push: vec![] }],
            ]
        })
        .collect();
    let spec = PushdownSpec {
        states: 2,
        stack_alphabet: vec!['Z'],
        alphabet: dfa.alphabet.clone(),
        endmarkers: Endmarkers::NONE,
        initial: 0,
        moves: OpFamily {
            letters: vec![table],
            left: None,
            right: None,
        },
        accept: dfa.accept.clone(),
        reject: dfa.reject.clone(),
    };
    let pda = make_pushdown(spec, true).unwrap();
    assert_eq!(verdicts(&pda, 8), verdicts(&import_dfa(&dfa).unwrap(), 8));
}

#[test]
fn single_state_dpda_accepts_everything() {
    let stay = vec![vec![vec![PushdownMove {
        next: 0,
        push: vec![],
    }]]];
    let spec = PushdownSpec {
        states: 1,
        stack_alphabet: vec![],
        alphabet: Alphabet::from_chars("xy").unwrap(),
        endmarkers: Endmarkers::BOTH,
        initial: 0,
        moves: OpFamily {
            letters: vec![stay.clone(), stay],
            left: None,
            right: None,
        },
        accept: pset![0],
        reject: pset![],
    };
    expect_language(&make_pushdown(spec, true).unwrap(), 6, |_| true);
}

#[test]
fn npda_guesses_the_middle() {
    // Even-length palindromes over {a,b}. State 0 pushes and may guess the
    // middle, state 1 pops matching symbols, 2 is dead, 3 accepts at `$`.
    const BOTTOM: usize = 2;
    let mv = |next: usize, push: Vec<usize>| PushdownMove { next, push };
    let keep = |top: usize| if top == BOTTOM { vec![] } else { vec![top] };
    let letter = |sym: usize| -> Vec<Vec<Vec<PushdownMove>>> {
        (0..4)
            .map(|q| {
                (0..=BOTTOM)
                    .map(|top| match q {
                        0 => {
                            let mut pushed = keep(top);
                            pushed.push(sym);
                            let mut moves = vec![mv(0, pushed)];
                            if top == sym {
                                moves.push(mv(1, vec![]));
                            }
                            moves
                        }
                        1 if top == sym => vec![mv(1, vec![])],
                        3 => vec![mv(3, keep(top))],
                        _ => vec![mv(2, keep(top))],
                    })
                    .collect()
            })
            .collect()
    };
    let end: Vec<Vec<Vec<PushdownMove>>> = (0..4)
        .map(|q| {
            (0..=BOTTOM)
                .map(|top| {
                    let accept = q == 3 || (q < 2 && top == BOTTOM);
                    vec![mv(if accept { 3 } else { 2 }, keep(top))]
                })
                .collect()
        })
        .collect();
    let spec = PushdownSpec {
        states: 4,
        stack_alphabet: vec!['a', 'b'],
        alphabet: Alphabet::from_chars("ab").unwrap(),
        endmarkers: Endmarkers::BOTH,
        initial: 0,
        moves: OpFamily {
            letters: vec![letter(0), letter(1)],
            left: None,
            right: Some(end),
        },
        accept: pset![3],
        reject: pset![0, 1, 2],
    };
    assert!(matches!(
        make_pushdown(spec.clone(), true),
        Err(ZooError::BadMove { .. })
    ));
    let m = make_pushdown(spec, false).unwrap();
    expect_language(&m, 8, |w| w.len() % 2 == 0 && w.chars().eq(w.chars().rev()));
}

fn stochastic(rng: &mut ChaCha8Rng, k: usize) -> DMatrix<f64> {
    let m = sample::random_stochastic(rng, k);
    DMatrix::from_fn(k, k, |i, j| m[i][j])
}

#[test]
fn numeric_invariants_along_random_runs() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let alphabet = Alphabet::from_chars("ab").unwrap();
    for _ in 0..20 {
        let k = rng.gen_range(1..=4);
        let pfa = make_pfa(StochasticSpec {
            alphabet: alphabet.clone(),
            endmarkers: Endmarkers::BOTH,
            k,
            matrices: OpFamily {
                letters: vec![stochastic(&mut rng, k), stochastic(&mut rng, k)],
                left: Some(stochastic(&mut rng, k)),
                right: None,
            },
            initial: None,
            epsilon: 0.25,
            accept: vec![0],
            reject: vec![],
        })
        .unwrap();
        let unitary = |rng: &mut ChaCha8Rng| sample::random_unitary(rng, k);
        let mut spec = quantum(k, vec![unitary(&mut rng), unitary(&mut rng)], "ab");
        spec.accept = vec![0];
        spec.reject = if k > 1 { vec![k - 1] } else { vec![] };
        spec.matrices.left = Some(unitary(&mut rng));
        let mo = make_mo_qfa(spec.clone()).unwrap();
        let mm = make_mm_qfa(spec).unwrap();
        let len = rng.gen_range(0..=12);
        let w: Vec<usize> = (0..len).map(|_| rng.gen_range(0..2)).collect();
        pfa.check_run(&w).unwrap();
        mo.check_run(&w).unwrap();
        mm.check_run(&w).unwrap();
    }
}
