//! Linear-optics primitives on coherent superpositions: the 50:50 beam
//! splitter, mode splitting against a vacuum ancilla, the coherent-qubit
//! Hadamard, and vacuum post-selection.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coherent::{
    inner_unchecked, merge_terms, norm_const, norm_sqr, normalize, overlap, CoherentTerm, CsState,
    NormKind, DEFAULT_MERGE_TOL,
};
use crate::error::{Error, Result};

/// Amplitude tolerance for recognising `±alpha_ref` in the Hadamard domain check.
pub const GATE_DOMAIN_TOL: f64 = 1e-9;

/// Amplitudes at or below this magnitude count as vacuum when classifying
/// false-vacuum contributions in exact selection.
pub const VACUUM_LABEL_TOL: f64 = 1e-9;

/// How a vacuum post-selection is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SelectionMode {
    /// Project every term onto `⟨0|` of the measured mode, keeping the
    /// false-vacuum amplitudes of non-vacuum branches.
    Exact,
    /// Keep only terms whose measured amplitude is within `tol` of zero.
    Branch { tol: f64 },
}

impl SelectionMode {
    pub const DEFAULT_BRANCH_TOL: f64 = 1e-9;

    pub fn branch() -> Self {
        SelectionMode::Branch {
            tol: Self::DEFAULT_BRANCH_TOL,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            SelectionMode::Exact => "exact",
            SelectionMode::Branch { .. } => "branch",
        }
    }
}

/// Bookkeeping for one vacuum post-selection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionRecord {
    /// Position of the measured mode in the input state.
    pub mode: usize,
    /// Probability of the vacuum outcome (exact) or weight of the kept branch.
    pub kept_prob: f64,
    /// Squared norm of the discarded terms. Always zero in exact mode.
    pub discarded_weight: f64,
    /// Probability that the non-vacuum branches read as vacuum: squared norm,
    /// through the Gram sum, of their projection onto `⟨0|`.
    pub false_vacuum_prob: f64,
    /// Same contributions summed term by term, ignoring interference:
    /// `Σ |c·e^{-|a|²/2}|²`.
    pub false_vacuum_incoherent: f64,
}

fn check_mode(s: &CsState, i: usize) -> Result<()> {
    if i >= s.mode_count() {
        return Err(Error::Shape(format!(
            "mode index {i} out of range for {} modes",
            s.mode_count()
        )));
    }
    Ok(())
}

/// 50:50 beam splitter: `(a_i, a_j) -> ((a_i+a_j)/√2, (a_i−a_j)/√2)` on every term.
pub fn apply_bs(s: &CsState, i: usize, j: usize) -> Result<CsState> {
    check_mode(s, i)?;
    check_mode(s, j)?;
    if i == j {
        return Err(Error::Shape(format!(
            "beam splitter needs two distinct modes, got {i} twice"
        )));
    }
    let terms = s
        .terms()
        .iter()
        .map(|t| {
            let mut amps = t.amps.clone();
            let (a, b) = (amps[i], amps[j]);
            amps[i] = (a + b) * FRAC_1_SQRT_2;
            amps[j] = (a - b) * FRAC_1_SQRT_2;
            CoherentTerm::new(t.coeff, amps)
        })
        .collect();
    Ok(s.with_terms(s.mode_count(), terms)
        .mark_normalized(s.is_normalized()))
}

/// Append a vacuum mode and mix it with mode `i`, so `|√2α⟩ -> |α⟩|α⟩`.
/// The new mode is the last one.
pub fn split_mode(s: &CsState, i: usize) -> Result<CsState> {
    check_mode(s, i)?;
    let widened = s.append_mode(Complex64::new(0.0, 0.0))?;
    apply_bs(&widened, i, widened.mode_count() - 1)
}

/// What the Hadamard does with amplitudes outside `{+α, −α}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum HadamardDomain {
    /// Off-basis amplitudes are an error.
    #[default]
    Strict,
    /// Off-basis coherent states are first resolved in the `{|α⟩, |−α⟩}`
    /// dual basis; their component orthogonal to that span is annihilated.
    Projected,
}

/// Coherent-qubit Hadamard on mode `i`:
/// `|α⟩ -> N₀/√2 (|α⟩+|−α⟩)`, `|−α⟩ -> N₀′/√2 (|α⟩−|−α⟩)`.
pub fn apply_hadamard(s: &CsState, i: usize, alpha_ref: f64) -> Result<CsState> {
    apply_hadamard_with(s, i, alpha_ref, HadamardDomain::Strict)
}

pub fn apply_hadamard_with(
    s: &CsState,
    i: usize,
    alpha_ref: f64,
    domain: HadamardDomain,
) -> Result<CsState> {
    check_mode(s, i)?;
    let n0 = norm_const(NormKind::N0, alpha_ref)?;
    let n0p = norm_const(NormKind::N0p, alpha_ref)?;
    let plus = Complex64::new(alpha_ref, 0.0);
    let minus = -plus;
    // ⟨α|−α⟩ for real α
    let e = (-2.0 * alpha_ref * alpha_ref).exp();

    let mut terms = Vec::with_capacity(2 * s.len());
    for t in s.terms() {
        let beta = t.amps[i];
        let (w_plus, w_minus) = if (beta - plus).norm() <= GATE_DOMAIN_TOL {
            (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
        } else if (beta - minus).norm() <= GATE_DOMAIN_TOL {
            (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
        } else {
            match domain {
                HadamardDomain::Strict => {
                    return Err(Error::GateDomain {
                        mode: i,
                        amplitude: beta.to_string(),
                        alpha_ref,
                    })
                }
                HadamardDomain::Projected => {
                    // inverse Gram matrix of {|α⟩, |−α⟩} applied to (⟨α|β⟩, ⟨−α|β⟩)
                    let op = overlap(plus, beta);
                    let om = overlap(minus, beta);
                    let det = 1.0 - e * e;
                    ((op - om * e) / det, (om - op * e) / det)
                }
            }
        };
        let to_plus = (w_plus * n0 + w_minus * n0p) * FRAC_1_SQRT_2;
        let to_minus = (w_plus * n0 - w_minus * n0p) * FRAC_1_SQRT_2;
        for (w, amp) in [(to_plus, plus), (to_minus, minus)] {
            if w.norm() == 0.0 {
                continue;
            }
            let mut amps = t.amps.clone();
            amps[i] = amp;
            terms.push(CoherentTerm::new(t.coeff * w, amps));
        }
    }
    Ok(merge_terms(
        &s.with_terms(s.mode_count(), terms),
        DEFAULT_MERGE_TOL,
    ))
}

fn drop_mode(t: &CoherentTerm, i: usize, coeff: Complex64) -> CoherentTerm {
    let mut amps = t.amps.clone();
    amps.remove(i);
    CoherentTerm::new(coeff, amps)
}

fn vacuum_factor(a: Complex64) -> f64 {
    // ⟨0|a⟩ = e^{-|a|²/2}
    let x = -a.norm_sqr() / 2.0;
    if x < 1e-300f64.ln() {
        0.0
    } else {
        x.exp()
    }
}

fn ensure_normalized(s: &CsState) -> Result<()> {
    if s.is_normalized() {
        return Ok(());
    }
    let n2 = norm_sqr(s)?;
    if (n2 - 1.0).abs() > 1e-8 {
        return Err(Error::NotNormalized(n2));
    }
    Ok(())
}

/// Post-select "no photon" on mode `i` and remove that mode.
///
/// Returns the renormalized conditional state and the selection record.
pub fn select_vacuum(
    s: &CsState,
    i: usize,
    mode: SelectionMode,
) -> Result<(CsState, SelectionRecord)> {
    check_mode(s, i)?;
    ensure_normalized(s)?;
    let out_modes = s.mode_count() - 1;

    // Projections of the branches that carry photons in mode i.
    let mut wrong = Vec::new();
    let mut kept = Vec::new();
    let mut discarded = Vec::new();
    let label_tol = match mode {
        SelectionMode::Exact => VACUUM_LABEL_TOL,
        SelectionMode::Branch { tol } => {
            if tol.is_nan() || tol < 0.0 {
                return Err(Error::Parameter(format!(
                    "branch tolerance {tol} must be >= 0"
                )));
            }
            tol
        }
    };
    for t in s.terms() {
        let a = t.amps[i];
        let projected = drop_mode(t, i, t.coeff * vacuum_factor(a));
        let is_vacuum = a.norm() <= label_tol;
        if !is_vacuum {
            wrong.push(projected.clone());
        }
        match mode {
            SelectionMode::Exact => kept.push(projected),
            SelectionMode::Branch { .. } => {
                if is_vacuum {
                    kept.push(drop_mode(t, i, t.coeff));
                } else {
                    discarded.push(t.clone());
                }
            }
        }
    }

    let false_vacuum_incoherent = wrong.iter().map(|t| t.coeff.norm_sqr()).sum();
    let wrong = s.with_terms(out_modes, wrong);
    let false_vacuum_prob = inner_unchecked(&wrong, &wrong).re.max(0.0);
    let discarded = s.with_terms(s.mode_count(), discarded);
    let discarded_weight = inner_unchecked(&discarded, &discarded).re.max(0.0);

    let kept = s.with_terms(out_modes, kept);
    let mut kept_prob = norm_sqr(&kept)?;
    if kept_prob > 1.0 && kept_prob <= 1.0 + 1e-12 {
        kept_prob = 1.0;
    }
    if kept_prob.sqrt() <= 1e-12 {
        return Err(Error::ZeroProbability {
            mode: i,
            prob: kept_prob,
        });
    }
    let state = normalize(&kept)?;
    Ok((
        state,
        SelectionRecord {
            mode: i,
            kept_prob,
            discarded_weight,
            false_vacuum_prob,
            false_vacuum_incoherent,
        },
    ))
}
