#![allow(dead_code)]

use cghz_core::engine::{run, Circuit, Instruction};
use cghz_core::optics::SelectionMode;
use cghz_core::CsState;
use num_complex::Complex64;

/// Branch-mode output of the preparation circuit is
/// `a·GHZ⁺_m^⊗N + b·GHZ⁻_m^⊗N` with `(a/b)² = [(1−e)(1+eᵐ)/((1+e)(1−eᵐ))]^N`,
/// `e = e^{−2α²}`. For real α the two blocks are orthonormal, so the fidelity
/// with the equal-weight target is `(1+r)²/(2(1+r²))`.
pub fn branch_fidelity_closed_form(n: usize, m: usize, alpha: f64) -> f64 {
    let e = (-2.0 * alpha * alpha).exp();
    let em = e.powi(m as i32);
    let r2 = ((1.0 - e) * (1.0 + em) / ((1.0 + e) * (1.0 - em))).powi(n as i32);
    let r = r2.sqrt();
    (1.0 + r).powi(2) / (2.0 * (1.0 + r * r))
}

fn overlap(a: Complex64, b: Complex64) -> Complex64 {
    (-(a.norm_sqr() + b.norm_sqr()) / 2.0 + a.conj() * b).exp()
}

/// Squared norm of `⟨0|_i` applied to the photon-carrying branches of `s`,
/// by explicit double sum over term pairs.
pub fn false_vacuum_gram(s: &CsState, i: usize, label_tol: f64) -> f64 {
    let proj: Vec<(Complex64, Vec<Complex64>)> = s
        .terms()
        .iter()
        .filter(|t| t.amps[i].norm() > label_tol)
        .map(|t| {
            let mut amps = t.amps.clone();
            let a = amps.remove(i);
            (t.coeff * (-a.norm_sqr() / 2.0).exp(), amps)
        })
        .collect();
    let mut total = Complex64::new(0.0, 0.0);
    for (cj, aj) in &proj {
        for (ck, ak) in &proj {
            let mut o = cj.conj() * ck;
            for (x, y) in aj.iter().zip(ak) {
                o *= overlap(*x, *y);
            }
            total += o;
        }
    }
    total.re
}

/// Total false-vacuum probability of `c`, recomputed from the state just
/// before each selection.
pub fn independent_false_vacuum(c: &Circuit, mode: SelectionMode) -> f64 {
    let tol = match mode {
        SelectionMode::Exact => 1e-9,
        SelectionMode::Branch { tol } => tol,
    };
    let mut total = 0.0;
    for (k, ins) in c.instructions.iter().enumerate() {
        if let Instruction::Select0 { mode: name } = ins {
            let mut prefix = c.clone();
            prefix.instructions.truncate(k);
            let r = run(&prefix, mode).unwrap();
            let i = r.mode_order.iter().position(|m| m == name).unwrap();
            total += false_vacuum_gram(&r.final_state, i, tol);
        }
    }
    total
}

/// `Σ_jk c_j* c_k Π ⟨a_j|a_k⟩`.
pub fn gram_sum(s: &CsState) -> f64 {
    let mut total = Complex64::new(0.0, 0.0);
    for a in s.terms() {
        for b in s.terms() {
            let mut o = a.coeff.conj() * b.coeff;
            for (x, y) in a.amps.iter().zip(&b.amps) {
                o *= overlap(*x, *y);
            }
            total += o;
        }
    }
    total.re
}
