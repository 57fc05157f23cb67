use cghz_core::analysis::{error_report, evaluate, fidelity, sweep, theoretical_p, SweepGrid};
use cghz_core::coherent::{normalize, CsState};
use cghz_core::engine::{run, Circuit};
use cghz_core::optics::SelectionMode;
use cghz_core::protocol::{build_cghz_circuit, ProtocolParams};
use num_complex::Complex64;
use proptest::prelude::*;

mod common;
use common::{branch_fidelity_closed_form, independent_false_vacuum};

fn grid(n: usize, m: usize, alpha: Vec<f64>, mode: SelectionMode) -> SweepGrid {
    SweepGrid {
        n: vec![n],
        m: vec![m],
        alpha,
        mode,
    }
}

#[test]
fn sweep_examples() {
    let out = sweep(&grid(2, 2, vec![3.0], SelectionMode::Exact));
    let p = &out.points[0];
    assert!((p.p_success_sim / 0.125 - 1.0).abs() < 1e-2);
    assert_eq!(p.p_success_theory, 0.125);

    let out = sweep(&grid(2, 2, vec![0.5, 3.0], SelectionMode::branch()));
    assert!(out.points[0].fidelity < out.points[1].fidelity);

    for mode in [SelectionMode::Exact, SelectionMode::branch()] {
        let out = sweep(&grid(1, 1, vec![0.3, 1.0, 7.0], mode));
        for p in &out.points {
            assert!((p.fidelity - 1.0).abs() < 1e-12, "{p:?}");
            assert_eq!(p.p_success_sim, 1.0);
        }
    }
}

#[test]
fn sweep_is_deterministic() {
    let g = SweepGrid {
        n: vec![1, 2, 3],
        m: vec![1, 2],
        alpha: vec![0.7, 1.1, 2.0],
        mode: SelectionMode::Exact,
    };
    assert_eq!(sweep(&g), sweep(&g));
}

#[test]
fn branch_fidelity_baseline_at_alpha_one() {
    let p = ProtocolParams::new(2, 2, 1.0).unwrap();
    let (_, f) = evaluate(&p, SelectionMode::branch()).unwrap();
    let want = branch_fidelity_closed_form(2, 2, 1.0);
    assert!((f - want).abs() < 1e-12, "{f} vs {want}");
    assert!(f > 0.98 && f < 0.99);
}

#[test]
fn success_probability_converges() {
    let p3 = evaluate(
        &ProtocolParams::new(2, 2, 3.0).unwrap(),
        SelectionMode::Exact,
    )
    .unwrap()
    .0;
    let p4 = evaluate(
        &ProtocolParams::new(2, 2, 4.0).unwrap(),
        SelectionMode::Exact,
    )
    .unwrap()
    .0;
    let d3 = (p3.p_success / 0.125 - 1.0).abs();
    let d4 = (p4.p_success / 0.125 - 1.0).abs();
    assert!(d3 < 1e-2 && d4 < d3, "{d3} {d4}");
    assert!(p3.p_success <= 1.0);
}

#[test]
fn error_report_examples() {
    let mut c = Circuit::new(1.0);
    c.prep("a").h("a");
    let rep = error_report(&run(&c, SelectionMode::branch()).unwrap());
    assert_eq!(rep.selections, 0);
    assert_eq!(rep.total_false_vacuum, 0.0);
    assert_eq!(rep.max_single, 0.0);

    let circuit = build_cghz_circuit(&ProtocolParams::new(2, 2, 2.0).unwrap()).unwrap();
    let r = run(&circuit, SelectionMode::branch()).unwrap();
    let want = independent_false_vacuum(&circuit, SelectionMode::branch());
    assert!(
        (r.total_false_vacuum - want).abs() <= 1e-12 * want,
        "{} vs {want}",
        r.total_false_vacuum
    );

    let total = |a: f64| {
        let p = ProtocolParams::new(2, 2, a).unwrap();
        evaluate(&p, SelectionMode::branch())
            .unwrap()
            .0
            .total_false_vacuum
    };
    assert!(total(1.0) > total(2.0));
}

#[test]
fn false_vacuum_decreases_with_alpha() {
    let alphas: Vec<f64> = (1..=12).map(|k| 0.25 * k as f64 + 0.25).collect();
    let out = sweep(&grid(2, 2, alphas, SelectionMode::branch()));
    for w in out.points.windows(2) {
        assert!(w[1].false_vacuum_total < w[0].false_vacuum_total, "{w:?}");
    }
}

#[test]
fn theory_identity() {
    for n in 1..=16usize {
        for m in 1..=16 / n {
            assert_eq!(theoretical_p(n, m) * 2f64.powi((n * m - 1) as i32), 1.0);
        }
    }
}

#[test]
fn fidelity_vacuum_against_cat() {
    let alpha = 3.0;
    let vac = CsState::vacuum(1);
    let cat = normalize(
        &CsState::coherent(&[Complex64::new(alpha, 0.0)])
            .unwrap()
            .superpose(&CsState::coherent(&[Complex64::new(-alpha, 0.0)]).unwrap())
            .unwrap(),
    )
    .unwrap();
    // |⟨0|cat⟩|² = 2e^{−α²} / (1 + e^{−2α²})
    let want = 2.0 * (-alpha * alpha).exp() / (1.0 + (-2.0 * alpha * alpha).exp());
    assert!((fidelity(&vac, &cat).unwrap() - want).abs() < 1e-15);
}

fn arb_state() -> impl Strategy<Value = CsState> {
    let amp = (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(r, i)| Complex64::new(r, i));
    prop::collection::vec((amp.clone(), prop::collection::vec(amp, 2)), 1..8).prop_filter_map(
        "zero state",
        |ts| {
            let terms = ts
                .into_iter()
                .map(|(c, a)| cghz_core::CoherentTerm::new(c, a))
                .collect();
            normalize(&CsState::from_terms(2, terms).ok()?).ok()
        },
    )
}

proptest! {
    #[test]
    fn fidelity_symmetric(a in arb_state(), b in arb_state()) {
        let ab = fidelity(&a, &b).unwrap();
        let ba = fidelity(&b, &a).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&ab));
    }
}
