use cghz_core::dsl::{format_real, parse, parse_real, serialize};
use cghz_core::engine::{Circuit, Instruction};
use cghz_core::protocol::{build_cghz_circuit, ProtocolParams};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn builder_circuits_round_trip() {
    for n in 1..=12usize {
        for m in 1..=12 / n {
            for alpha in [0.7, 2.0, 3.1] {
                let c = build_cghz_circuit(&ProtocolParams::new(n, m, alpha).unwrap()).unwrap();
                let back = parse(&serialize(&c)).unwrap();
                assert_eq!(back.circuit, c);
                assert!(back.warnings.is_empty());
            }
        }
    }
}

fn name() -> impl Strategy<Value = String> {
    "[a-z_][a-z0-9_]{0,6}"
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |x| x.is_finite()),
        -5.0..5.0f64,
        Just(0.0),
        Just(-0.0),
    ]
}

fn instruction() -> impl Strategy<Value = Instruction> {
    prop_oneof![
        (name(), finite(), finite()).prop_map(|(mode, re, im)| Instruction::Prep {
            mode,
            amplitude: Complex64::new(re, im)
        }),
        (name(), finite()).prop_map(|(mode, r)| Instruction::Hadamard {
            mode,
            alpha_ref: r.abs() + 1e-3
        }),
        (name(), name()).prop_map(|(first, second)| Instruction::Bs { first, second }),
        (name(), name()).prop_map(|(source, new_mode)| Instruction::Split { source, new_mode }),
        name().prop_map(|mode| Instruction::Select0 { mode }),
    ]
}

/// Bind every referenced name first so the circuit passes validation.
fn make_valid(alpha: f64, body: Vec<Instruction>) -> Circuit {
    let mut c = Circuit::new(alpha);
    let mut used = std::collections::BTreeSet::new();
    let mut fresh = 0;
    for ins in body {
        let ins = match ins {
            Instruction::Prep { amplitude, .. } => {
                fresh += 1;
                Instruction::Prep {
                    mode: format!("p{fresh}"),
                    amplitude,
                }
            }
            Instruction::Split { .. } => {
                fresh += 1;
                Instruction::Split {
                    source: "root".into(),
                    new_mode: format!("s{fresh}"),
                }
            }
            Instruction::Select0 { .. } => continue,
            Instruction::Bs { first, second } if first != second => {
                used.insert(first.clone());
                used.insert(second.clone());
                Instruction::Bs {
                    first: format!("u_{first}"),
                    second: format!("u_{second}"),
                }
            }
            Instruction::Bs { .. } => continue,
            Instruction::Hadamard { mode, alpha_ref } => {
                used.insert(mode.clone());
                Instruction::Hadamard {
                    mode: format!("u_{mode}"),
                    alpha_ref,
                }
            }
        };
        c.push(ins);
    }
    let mut full = Circuit::new(alpha);
    full.prep("root");
    for u in &used {
        full.prep(format!("u_{u}"));
    }
    full.extend(c);
    full.select0("root");
    full
}

proptest! {
    #[test]
    fn reals_round_trip(x in finite()) {
        prop_assert_eq!(parse_real(&format_real(x)).unwrap().to_bits(), x.to_bits());
    }

    #[test]
    fn random_circuits_round_trip(alpha in 0.01..10.0f64, body in prop::collection::vec(instruction(), 0..24)) {
        let c = make_valid(alpha, body);
        let text = serialize(&c);
        let back = parse(&text).map_err(|d| TestCaseError::fail(format!("{d:?}\n{text}")))?;
        prop_assert_eq!(back.circuit, c);
    }

    #[test]
    fn arbitrary_text_never_panics(s in "(?s).{0,400}") {
        let _ = parse(&s);
    }
}

#[test]
fn mutations_never_panic() {
    let base = serialize(&build_cghz_circuit(&ProtocolParams::new(2, 3, 2.0).unwrap()).unwrap());
    let alphabet: Vec<char> = "abcxyz0129+-.eEi #\n\t_ refalphpsbl\u{e9}\u{1F600}"
        .chars()
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..2000 {
        let mut chars: Vec<char> = base.chars().collect();
        for _ in 0..rng.gen_range(1..8) {
            let at = rng.gen_range(0..=chars.len());
            match rng.gen_range(0..3) {
                0 if at < chars.len() => {
                    chars.remove(at);
                }
                1 if at < chars.len() => chars[at] = alphabet[rng.gen_range(0..alphabet.len())],
                _ => chars.insert(at, alphabet[rng.gen_range(0..alphabet.len())]),
            }
        }
        let text: String = chars.into_iter().collect();
        if let Err(diags) = parse(&text) {
            assert!(!diags.is_empty());
            for d in diags {
                assert!(d.span.line >= 1 && d.span.column >= 1);
            }
        }
    }
}
